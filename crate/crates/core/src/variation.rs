//! `s`-variation, Hölder, atomic and difference functionals on sampled paths
//! and step functions.
//!
//! The `V^s` seminorm of a sampled path is the exact supremum over all
//! subsequences of the sample points. It is computed by the dynamic program
//!
//! ```text
//! best[j] = max(0, max_{i<j} best[i] + ‖v_j − v_i‖^s),   [f]_{V^s} = best[N]^{1/s}
//! ```
//!
//! `best` is non-decreasing in `j`, which lets [`variation_power_sum`] skip
//! whole dyadic blocks of predecessors using triangle-inequality bounds. The
//! pruning only discards candidates that are strictly smaller than the
//! running maximum, so the result is the same floating-point value as the
//! plain quadratic recursion.

use crate::error::{Error, Result};
use crate::spaces::{lp_aggregate, Exponent, NormedSpace, SpaceDescriptor};

/// Largest `N` (number of increments) accepted by [`brute_force_vs`].
pub const BRUTE_FORCE_MAX_STEPS: usize = 16;

/// Relative slack on pruning bounds; covers rounding in the triangle
/// inequality so no candidate that could win is skipped.
const PRUNE_SLACK: f64 = 1e-9;

fn check_variation_exponent(s: f64) -> Result<()> {
    if !s.is_finite() || s < 1.0 {
        return Err(Error::InvalidExponent {
            name: "s",
            value: s,
            reason: "variation exponent must be a finite real >= 1",
        });
    }
    Ok(())
}

/// Values of a function at strictly increasing times.
#[derive(Clone, Debug)]
pub struct SampledPath<S: NormedSpace = SpaceDescriptor> {
    times: Vec<f64>,
    values: Vec<S::Elem>,
    space: S,
}

impl<S: NormedSpace> SampledPath<S> {
    pub fn new(times: Vec<f64>, values: Vec<S::Elem>, space: S) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Empty("sampled path"));
        }
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: values.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "sample times must be finite and strictly increasing".into(),
            ));
        }
        for v in &values {
            space.validate(v)?;
        }
        Ok(SampledPath {
            times,
            values,
            space,
        })
    }

    /// Samples at times `0, 1, …, N`.
    pub fn uniform(values: Vec<S::Elem>, space: S) -> Result<Self> {
        let times = (0..values.len()).map(|i| i as f64).collect();
        Self::new(times, values, space)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[S::Elem] {
        &self.values
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    /// Number of sample points (`N + 1`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of increments `N`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| self.space.norm_of(v))
            .fold(0.0, f64::max)
    }

    /// Length of the time interval `t_N − t_0`.
    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.space.distance(&self.values[i], &self.values[j])
    }
}

/// Dyadic blocks of sample indices, each with a center and a radius
/// covering every point of the block.
struct BlockBounds {
    /// `levels[n][b]` covers indices `[b·2^n, (b+1)·2^n)`.
    levels: Vec<Vec<(usize, f64)>>,
}

impl BlockBounds {
    fn new<F: Fn(usize, usize) -> f64>(n_points: usize, dist: &F) -> Self {
        let mut levels = vec![Vec::new()];
        let mut size = 2;
        while size / 2 < n_points {
            let blocks = n_points.div_ceil(size);
            let level = (0..blocks)
                .map(|b| {
                    let lo = b * size;
                    let hi = ((b + 1) * size).min(n_points);
                    let center = (lo + size / 2).min(hi - 1);
                    let radius = (lo..hi).map(|i| dist(center, i)).fold(0.0, f64::max);
                    (center, radius)
                })
                .collect();
            levels.push(level);
            size *= 2;
        }
        BlockBounds { levels }
    }

    fn top(&self) -> usize {
        self.levels.len() - 1
    }
}

/// `x^s`, with small integer exponents done by multiplication.
#[inline]
pub(crate) fn increment_power(x: f64, s: f64) -> f64 {
    if s == 1.0 {
        x
    } else if s == 2.0 {
        x * x
    } else if s == 3.0 {
        x * x * x
    } else if s == 4.0 {
        let y = x * x;
        y * y
    } else {
        x.powf(s)
    }
}

/// `max Σ ‖v_{i_{k+1}} − v_{i_k}‖^s` over all increasing index chains, for a
/// path given by its point count and a distance oracle.
///
/// `dist(i, j)` is always called with `i < j` for chain increments.
pub fn variation_power_sum<F>(n_points: usize, s: f64, dist: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    if n_points < 2 {
        return 0.0;
    }
    let bounds = BlockBounds::new(n_points, &dist);
    let mut best = vec![0.0_f64; n_points];
    for j in 1..n_points {
        // extending the best chain ending at j − 1 is always admissible
        let mut running = best[j - 1] + increment_power(dist(j - 1, j), s);
        let top = bounds.top();
        if let Some(b) = block_bound(&bounds, &best, &dist, s, j, top, 0) {
            visit(&bounds, &best, &dist, s, j, top, 0, b, &mut running);
        }
        best[j] = running;
    }
    best[n_points - 1]
}

/// Blocks at or below this level are scanned exhaustively.
const SCAN_LEVEL: usize = 4;

/// Upper bound for `best[i] + ‖v_i − v_j‖^s` over the block's indices below
/// `j`; `None` when the block lies entirely at or after `j`.
fn block_bound<F: Fn(usize, usize) -> f64>(
    bounds: &BlockBounds,
    best: &[f64],
    dist: &F,
    s: f64,
    j: usize,
    level: usize,
    block: usize,
) -> Option<f64> {
    let lo = block << level;
    if lo >= j {
        return None;
    }
    let hi = ((block + 1) << level).min(j);
    let (center, radius) = bounds.levels[level][block];
    Some(best[hi - 1] + increment_power(dist(center, j) + radius, s))
}

#[allow(clippy::too_many_arguments)]
fn visit<F: Fn(usize, usize) -> f64>(
    bounds: &BlockBounds,
    best: &[f64],
    dist: &F,
    s: f64,
    j: usize,
    level: usize,
    block: usize,
    bound: f64,
    running: &mut f64,
) {
    if bound * (1.0 + PRUNE_SLACK) < *running {
        return;
    }
    if level <= SCAN_LEVEL {
        let lo = block << level;
        let hi = ((block + 1) << level).min(j);
        for i in lo..hi {
            let cand = best[i] + increment_power(dist(i, j), s);
            if cand > *running {
                *running = cand;
            }
        }
        return;
    }
    let left = block_bound(bounds, best, dist, s, j, level - 1, 2 * block);
    let right = block_bound(bounds, best, dist, s, j, level - 1, 2 * block + 1);
    match (left, right) {
        (Some(l), Some(r)) => {
            let (first, fb, second, sb) = if r >= l {
                (2 * block + 1, r, 2 * block, l)
            } else {
                (2 * block, l, 2 * block + 1, r)
            };
            visit(bounds, best, dist, s, j, level - 1, first, fb, running);
            visit(bounds, best, dist, s, j, level - 1, second, sb, running);
        }
        (Some(l), None) => visit(bounds, best, dist, s, j, level - 1, 2 * block, l, running),
        _ => {}
    }
}

/// `[f]_{V^s}` over the sample points.
pub fn vs_seminorm<S: NormedSpace>(path: &SampledPath<S>, s: f64) -> Result<f64> {
    check_variation_exponent(s)?;
    let total = variation_power_sum(path.len(), s, |i, j| path.distance(i, j));
    Ok(total.powf(1.0 / s))
}

/// An optimal partition recovered by the plain quadratic recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalPartition {
    pub value: f64,
    /// Indices of the chosen sample points, increasing.
    pub points: Vec<usize>,
}

/// `[f]_{V^s}` together with a maximizing subsequence. Ties go to the
/// earlier predecessor, so the partition is deterministic.
pub fn vs_partition<S: NormedSpace>(path: &SampledPath<S>, s: f64) -> Result<OptimalPartition> {
    check_variation_exponent(s)?;
    let n = path.len();
    let mut best = vec![0.0_f64; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for j in 1..n {
        for i in 0..j {
            let cand = best[i] + increment_power(path.distance(i, j), s);
            if cand > best[j] {
                best[j] = cand;
                pred[j] = Some(i);
            }
        }
    }
    let mut points = vec![n - 1];
    let mut cur = n - 1;
    while let Some(p) = pred[cur] {
        points.push(p);
        cur = p;
    }
    points.reverse();
    Ok(OptimalPartition {
        value: best[n - 1].powf(1.0 / s),
        points,
    })
}

/// Exhaustive maximum over every subsequence of the sample points.
/// Limited to `N ≤ 16` increments.
pub fn brute_force_vs<S: NormedSpace>(path: &SampledPath<S>, s: f64) -> Result<f64> {
    check_variation_exponent(s)?;
    let n = path.len();
    if n - 1 > BRUTE_FORCE_MAX_STEPS {
        return Err(Error::TooLarge {
            points: n,
            limit: BRUTE_FORCE_MAX_STEPS + 1,
        });
    }
    let mut best = 0.0_f64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut acc = 0.0_f64;
        let mut prev: Option<usize> = None;
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            if let Some(p) = prev {
                acc += increment_power(path.distance(p, i), s);
            }
            prev = Some(i);
        }
        best = best.max(acc);
    }
    Ok(best.powf(1.0 / s))
}

/// `‖f‖_{V^s} = ‖f‖_∞ + [f]_{V^s}`; at `s = ∞` this is the sup norm.
pub fn vs_norm<S: NormedSpace>(path: &SampledPath<S>, s: Exponent) -> Result<f64> {
    match s {
        Exponent::Infinity => Ok(path.sup_norm()),
        Exponent::Finite(s) => Ok(path.sup_norm() + vs_seminorm(path, s)?),
    }
}

/// `ℓ^r` aggregate of per-interval `V^s` norms, or of the seminorms when
/// `homogeneous` is set.
pub fn ell_r_vs_norm<S: NormedSpace>(
    paths: &[SampledPath<S>],
    r: Exponent,
    s: f64,
    homogeneous: bool,
) -> Result<f64> {
    check_variation_exponent(s)?;
    let per_interval = paths
        .iter()
        .map(|p| {
            if homogeneous {
                vs_seminorm(p, s)
            } else {
                vs_norm(p, Exponent::Finite(s))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lp_aggregate(per_interval, r))
}

/// `[f]_{C^α} = max_{i≠j} ‖f(t_i) − f(t_j)‖ / |t_i − t_j|^α`.
pub fn holder_seminorm<S: NormedSpace>(path: &SampledPath<S>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "Hölder exponent must lie in (0, 1], got {alpha}"
        )));
    }
    if path.len() < 2 {
        return Err(Error::OutOfRange(
            "Hölder seminorm needs at least two samples".into(),
        ));
    }
    let t = path.times();
    let mut best = 0.0_f64;
    for j in 1..path.len() {
        for i in 0..j {
            best = best.max(path.distance(i, j) / (t[j] - t[i]).powf(alpha));
        }
    }
    Ok(best)
}

/// `‖f‖_{C^α} = ‖f‖_∞ + [f]_{C^α}`.
pub fn holder_norm<S: NormedSpace>(path: &SampledPath<S>, alpha: f64) -> Result<f64> {
    Ok(path.sup_norm() + holder_seminorm(path, alpha)?)
}

/// A step function `Σ c_I 1_I` over consecutive half-open intervals
/// `[b_i, b_{i+1})`, zero outside `[b_0, b_k)`. A zero piece encodes a gap.
#[derive(Clone, Debug)]
pub struct StepFunction<S: NormedSpace = SpaceDescriptor> {
    breakpoints: Vec<f64>,
    pieces: Vec<S::Elem>,
    space: S,
}

impl<S: NormedSpace + Clone> StepFunction<S> {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<S::Elem>, space: S) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Empty("step function pieces"));
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: pieces.len() + 1,
                actual: breakpoints.len(),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidGrid(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        for p in &pieces {
            space.validate(p)?;
        }
        Ok(StepFunction {
            breakpoints,
            pieces,
            space,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[S::Elem] {
        &self.pieces
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn value_at(&self, x: f64) -> S::Elem {
        let b = &self.breakpoints;
        if x < b[0] || x >= b[b.len() - 1] {
            return self.space.zero_elem();
        }
        // last breakpoint <= x
        let idx = b.partition_point(|&t| t <= x) - 1;
        self.pieces[idx].clone()
    }

    /// Samples at every breakpoint, one interior point per piece and one
    /// point left of the support. The discrete `V^s` supremum over these
    /// samples equals the continuum supremum of the step function.
    pub fn to_path(&self) -> SampledPath<S> {
        let b = &self.breakpoints;
        let zero = self.space.zero_elem();
        let mut times = vec![b[0] - 1.0];
        let mut values = vec![zero.clone()];
        for (i, piece) in self.pieces.iter().enumerate() {
            times.push(b[i]);
            values.push(piece.clone());
            times.push(0.5 * (b[i] + b[i + 1]));
            values.push(piece.clone());
        }
        times.push(b[b.len() - 1]);
        values.push(zero);
        SampledPath {
            times,
            values,
            space: self.space.clone(),
        }
    }
}

/// Atom-budget upper bound `(Σ_I ‖c_I‖^s)^{1/s}` for the atomic `R^s` norm:
/// a step function is one atom scaled by this value.
pub fn rs_atom_upper<S: NormedSpace + Clone>(step: &StepFunction<S>, s: f64) -> Result<f64> {
    check_variation_exponent(s)?;
    Ok(lp_aggregate(
        step.pieces.iter().map(|c| step.space.norm_of(c)),
        Exponent::Finite(s),
    ))
}

/// `∫ ‖f(x+h) − f(x)‖^r dx`, exact for step functions: the integrand is
/// constant between consecutive points of `B ∪ (B − h)`.
pub fn difference_seminorm<S: NormedSpace + Clone>(
    step: &StepFunction<S>,
    r: f64,
    h: f64,
) -> Result<f64> {
    check_variation_exponent(r)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::OutOfRange(format!(
            "shift h must be a positive real, got {h}"
        )));
    }
    let mut cuts: Vec<f64> = step.breakpoints.iter().flat_map(|&b| [b, b - h]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let total = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let jump = step
                .space
                .distance(&step.value_at(mid + h), &step.value_at(mid));
            if jump == 0.0 {
                0.0
            } else {
                (w[1] - w[0]) * jump.powf(r)
            }
        })
        .sum();
    Ok(total)
}
