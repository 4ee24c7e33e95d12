//! Carleson maximal, variational Carleson and Rubio de Francia square
//! functionals on periodic signals.
//!
//! For a cut `a` the partial sum `C_a f` keeps the modes `k < a`. On an
//! `N`-point grid only the `N + 1` cuts `−N/2, …, N/2` give distinct partial
//! sums, so every supremum over cuts is a maximum over that list.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiplier::{
    check_disjoint, frequencies, FourierPlan, FrequencyInterval, Signal, Spectrum,
};
use crate::spaces::{dual_exponent, lp_aggregate, Exponent, SpaceDescriptor};
use crate::variation::variation_power_sum;
use crate::weights::{ap_constant, weighted_lp_norm, weighted_lp_norm_scalar, WeightFamily};
use crate::{derive_seed, Complex64};

/// Largest grid accepted by [`variational_carleson`].
pub const MAX_VARIATIONAL_GRID: usize = 4096;

/// A finite family of pairwise disjoint frequency intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalFamily {
    intervals: Vec<FrequencyInterval>,
}

impl IntervalFamily {
    pub fn new(intervals: Vec<FrequencyInterval>) -> Result<Self> {
        check_disjoint(&intervals)?;
        Ok(IntervalFamily { intervals })
    }

    /// Every grid frequency of an `n`-point grid as its own interval.
    pub fn singletons(n: usize) -> Self {
        IntervalFamily {
            intervals: frequencies(n).map(FrequencyInterval::singleton).collect(),
        }
    }

    pub fn intervals(&self) -> &[FrequencyInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// `C_a f = S_{(−∞, a)} f`.
pub fn partial_fourier(f: &Signal, a: i64) -> Result<Signal> {
    let plan = FourierPlan::new(f.len())?;
    let mut spec = plan.forward(f)?;
    spec.mask(|k| k < a);
    plan.inverse(&spec)
}

/// Per-point partial-sum paths, built from the spectrum with a twiddle table.
struct PartialSums {
    n: usize,
    dim: usize,
    /// Fourier coefficients in ascending frequency order, already divided
    /// by `N`.
    coeffs: Vec<Complex64>,
    twiddles: Vec<Complex64>,
    space: SpaceDescriptor,
}

impl PartialSums {
    fn new(f: &Signal) -> Result<Self> {
        let n = f.len();
        let dim = f.space().dimension();
        let spec: Spectrum = FourierPlan::new(n)?.forward(f)?;
        let scale = 1.0 / n as f64;
        let coeffs = frequencies(n)
            .flat_map(|k| {
                spec.at(k)
                    .coords()
                    .iter()
                    .map(move |z| z * scale)
                    .collect::<Vec<_>>()
            })
            .collect();
        let twiddles = (0..n)
            .map(|r| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / n as f64))
            .collect();
        Ok(PartialSums {
            n,
            dim,
            coeffs,
            twiddles,
            space: f.space().clone(),
        })
    }

    /// `C_a f(x_t)` for the cuts `a = −N/2, …, N/2`, flattened.
    fn path(&self, t: usize) -> Vec<Complex64> {
        let (n, d) = (self.n, self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); (n + 1) * d];
        let mut acc = vec![Complex64::new(0.0, 0.0); d];
        for (j, k) in frequencies(n).enumerate() {
            let r = (k.rem_euclid(n as i64) as usize * t) % n;
            let tw = self.twiddles[r];
            for c in 0..d {
                acc[c] += self.coeffs[j * d + c] * tw;
            }
            out[(j + 1) * d..(j + 2) * d].copy_from_slice(&acc);
        }
        out
    }
}

/// `C_* f(x) = max_a ‖C_a f(x)‖_X` at every grid point.
pub fn carleson_maximal(f: &Signal) -> Result<Vec<f64>> {
    let sums = PartialSums::new(f)?;
    let d = sums.dim;
    Ok((0..f.len())
        .into_par_iter()
        .map(|t| {
            sums.path(t)
                .chunks(d)
                .map(|v| sums.space.norm_of_coords(v))
                .fold(0.0, f64::max)
        })
        .collect())
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidExponent {
            name: "q",
            value: q,
            reason: "variation exponent must satisfy 1 ≤ q < ∞",
        });
    }
    Ok(())
}

/// `C_*^q f(x) = [a ↦ C_a f(x)]_{V^q}` at every grid point, equal to the
/// supremum of `(Σ_I ‖S_I f(x)‖^q)^{1/q}` over disjoint interval families.
pub fn variational_carleson(f: &Signal, q: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    if f.len() > MAX_VARIATIONAL_GRID {
        return Err(Error::TooLarge {
            points: f.len(),
            limit: MAX_VARIATIONAL_GRID,
        });
    }
    let sums = PartialSums::new(f)?;
    let d = sums.dim;
    let n = f.len();
    Ok((0..n)
        .into_par_iter()
        .map(|t| {
            let path = sums.path(t);
            let total = if d == 1 && sums.space.is_euclidean() {
                variation_power_sum(n + 1, q, |i, j| (path[i] - path[j]).norm_sqr().sqrt())
            } else {
                variation_power_sum(n + 1, q, |i, j| {
                    sums.space
                        .distance_coords(&path[i * d..(i + 1) * d], &path[j * d..(j + 1) * d])
                })
            };
            total.powf(1.0 / q)
        })
        .collect())
}

/// `(Σ_{I ∈ 𝓘} ‖S_I f(x)‖^q)^{1/q}` at every grid point.
pub fn rubio_functional(f: &Signal, family: &IntervalFamily, q: Exponent) -> Result<Vec<f64>> {
    let plan = FourierPlan::new(f.len())?;
    let spec = plan.forward(f)?;
    let mut per_interval = Vec::with_capacity(family.len());
    for interval in family.intervals() {
        let mut masked = spec.clone();
        masked.mask(|k| interval.contains(k));
        per_interval.push(plan.inverse(&masked)?.pointwise_norms());
    }
    Ok((0..f.len())
        .map(|t| lp_aggregate(per_interval.iter().map(|norms| norms[t]), q))
        .collect())
}

/// Parameters of the weighted variational Carleson growth experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RubioGrowthConfig {
    pub space: SpaceDescriptor,
    pub p: f64,
    pub q: f64,
    pub weights: Vec<WeightFamily>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RubioGrowthRow {
    pub n: usize,
    pub weight: WeightFamily,
    pub trial: usize,
    /// `‖C_*^q f‖_{L^p(w)} / ‖f‖_{L^p(w;X)}`.
    pub ratio: f64,
    /// `[w]_{A_{p/q'}}` on the same grid.
    pub ap_constant: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RubioGrowthSummary {
    pub n: usize,
    pub weight: WeightFamily,
    pub max_ratio: f64,
    pub ap_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RubioGrowthTable {
    pub rows: Vec<RubioGrowthRow>,
    pub summary: Vec<RubioGrowthSummary>,
}

/// Validates `p > q'`; the limiting case `p = q'` is known to fail.
pub fn check_rubio_exponents(p: f64, q: f64) -> Result<()> {
    check_q(q)?;
    let q_dual = dual_exponent(Exponent::Finite(q));
    let ok = match q_dual {
        Exponent::Infinity => false,
        Exponent::Finite(qd) => p > qd && p.is_finite(),
    };
    if !ok {
        return Err(Error::OutOfRange(format!(
            "need p > q' = {q_dual} (got p = {p}, q = {q}); the limiting case p = q' was shown to be false"
        )));
    }
    Ok(())
}

/// Ratios `‖C_*^q f‖_{L^p(w)} / ‖f‖_{L^p(w;X)}` on random complex Gaussian
/// signals over a unit period. Signals depend only on `(seed, n, trial)`,
/// so every weight sees the same signals.
pub fn rubio_growth_experiment(config: &RubioGrowthConfig) -> Result<RubioGrowthTable> {
    check_rubio_exponents(config.p, config.q)?;
    if config.trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    let p = Exponent::Finite(config.p);
    let ap_index = config.p / config.q * (config.q - 1.0);
    let mut table = RubioGrowthTable::default();
    for &n in &config.sizes {
        let weights = config
            .weights
            .iter()
            .map(|fam| {
                let w = fam.build(n)?;
                let a = ap_constant(&w, ap_index)?;
                Ok((*fam, w, a))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut maxima = vec![f64::NEG_INFINITY; weights.len()];
        for trial in 0..config.trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.seed,
                ((n as u64) << 32) | trial as u64,
            ));
            let f = Signal::random_gaussian(n, config.space.clone(), 1.0, &mut rng)?;
            let cq = variational_carleson(&f, config.q)?;
            for (i, (fam, w, a)) in weights.iter().enumerate() {
                let ratio = weighted_lp_norm_scalar(&cq, w, p)? / weighted_lp_norm(&f, w, p)?;
                maxima[i] = maxima[i].max(ratio);
                table.rows.push(RubioGrowthRow {
                    n,
                    weight: *fam,
                    trial,
                    ratio,
                    ap_constant: *a,
                });
            }
        }
        for ((fam, _, a), max_ratio) in weights.iter().zip(maxima) {
            table.summary.push(RubioGrowthSummary {
                n,
                weight: *fam,
                max_ratio,
                ap_constant: *a,
            });
        }
    }
    Ok(table)
}
