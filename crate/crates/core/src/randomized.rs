//! Rademacher averages, finite-family type and cotype constants, and lower
//! bounds for `R`-boundedness constants.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiplier::{
    check_grid_size, frequency_projection, unit_mode, FrequencyInterval, Signal,
};
use crate::spaces::{
    lp_aggregate, operator_norm, ElementValue, Exponent, NormMode, NormedSpace, OperatorSpace,
    OperatorValue, ProbeBudget, SpaceDescriptor,
};
use crate::variation::{rs_atom_upper, StepFunction};
use crate::weights::{weighted_lp_norm, weighted_lp_norm_scalar, WeightGrid};
use crate::{derive_seed, Complex64};

/// Largest family averaged by full sign enumeration.
pub const EXACT_ENUMERATION_LIMIT: usize = 12;

const BATCH: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateMethod::Exact => "exact",
            EstimateMethod::MonteCarlo => "montecarlo",
        })
    }
}

/// Random signs used in the averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignKind {
    /// Real `±1`.
    Rademacher,
    /// Uniform eighth roots of unity, a discrete stand-in for Steinhaus
    /// variables.
    Steinhaus8,
}

impl SignKind {
    fn alphabet(self) -> usize {
        match self {
            SignKind::Rademacher => 2,
            SignKind::Steinhaus8 => 8,
        }
    }

    fn sign(self, symbol: usize) -> Complex64 {
        match self {
            SignKind::Rademacher => Complex64::new(if symbol == 0 { 1.0 } else { -1.0 }, 0.0),
            SignKind::Steinhaus8 => {
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * symbol as f64)
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        self.sign(rng.random_range(0..self.alphabet()))
    }

    /// Number of sign patterns for `n` terms, when it fits the exact limit.
    fn patterns(self, n: usize) -> Option<usize> {
        let limit = 1usize << EXACT_ENUMERATION_LIMIT;
        let mut count = 1usize;
        for _ in 0..n {
            count = count.checked_mul(self.alphabet())?;
            if count > limit {
                return None;
            }
        }
        Some(count)
    }
}

impl fmt::Display for SignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignKind::Rademacher => "rademacher",
            SignKind::Steinhaus8 => "steinhaus8",
        })
    }
}

/// Monte Carlo effort, used only when enumeration is out of reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleBudget {
    pub samples: usize,
    pub seed: u64,
    pub signs: SignKind,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            samples: 20_000,
            seed: 0x5eed_0002,
            signs: SignKind::Rademacher,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RademacherEstimate {
    /// `(𝔼‖Σ ε_n x_n‖^m)^{1/m}`.
    pub mean: f64,
    /// Zero exactly when `method` is `Exact`.
    pub stderr: f64,
    pub method: EstimateMethod,
    pub sample_count: usize,
}

fn check_moment(moment: f64) -> Result<()> {
    if !(moment >= 1.0) || !moment.is_finite() {
        return Err(Error::InvalidExponent {
            name: "moment",
            value: moment,
            reason: "moments must satisfy 1 ≤ m < ∞",
        });
    }
    Ok(())
}

fn signed_sum(
    space: &SpaceDescriptor,
    vectors: &[ElementValue],
    signs: &[Complex64],
    buf: &mut [Complex64],
) -> f64 {
    buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (v, e) in vectors.iter().zip(signs) {
        for (b, x) in buf.iter_mut().zip(&v.0) {
            *b += x * e;
        }
    }
    space.norm_of_coords(buf)
}

/// `(𝔼‖Σ ε_n x_n‖^m)^{1/m}`: exact over all sign patterns when there are at
/// most `2^12` of them, otherwise Monte Carlo in fixed-size batches with
/// per-batch seeds and a delta-method standard error.
pub fn rademacher_mean(
    vectors: &[ElementValue],
    space: &SpaceDescriptor,
    moment: f64,
    budget: &SampleBudget,
) -> Result<RademacherEstimate> {
    if vectors.is_empty() {
        return Err(Error::Empty("vectors"));
    }
    check_moment(moment)?;
    for v in vectors {
        space.check(v)?;
    }
    let n = vectors.len();
    let d = space.dimension();
    let all_zero = vectors
        .iter()
        .all(|v| v.0.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    let signs_kind = budget.signs;

    if let Some(count) = signs_kind.patterns(n).or(all_zero.then_some(1)) {
        let mut buf = vec![Complex64::new(0.0, 0.0); d];
        let mut signs = vec![Complex64::new(1.0, 0.0); n];
        let base = signs_kind.alphabet();
        let mut sum = 0.0;
        for pattern in 0..count {
            let mut code = pattern;
            for s in signs.iter_mut() {
                *s = signs_kind.sign(code % base);
                code /= base;
            }
            sum += signed_sum(space, vectors, &signs, &mut buf).powf(moment);
        }
        return Ok(RademacherEstimate {
            mean: (sum / count as f64).powf(1.0 / moment),
            stderr: 0.0,
            method: EstimateMethod::Exact,
            sample_count: count,
        });
    }

    Ok(sample_mean(vectors, space, moment, budget))
}

/// Monte Carlo estimate of `(𝔼‖Σ ε_n x_n‖^m)^{1/m}` regardless of family
/// size.
pub fn rademacher_mean_sampled(
    vectors: &[ElementValue],
    space: &SpaceDescriptor,
    moment: f64,
    budget: &SampleBudget,
) -> Result<RademacherEstimate> {
    if vectors.is_empty() {
        return Err(Error::Empty("vectors"));
    }
    check_moment(moment)?;
    for v in vectors {
        space.check(v)?;
    }
    Ok(sample_mean(vectors, space, moment, budget))
}

fn sample_mean(
    vectors: &[ElementValue],
    space: &SpaceDescriptor,
    moment: f64,
    budget: &SampleBudget,
) -> RademacherEstimate {
    let n = vectors.len();
    let d = space.dimension();
    let signs_kind = budget.signs;
    let samples = budget.samples.max(2);
    let batches = samples.div_ceil(BATCH);
    let partial: Vec<(f64, f64, usize)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, b as u64));
            let size = BATCH.min(samples - b * BATCH);
            let mut buf = vec![Complex64::new(0.0, 0.0); d];
            let mut signs = vec![Complex64::new(1.0, 0.0); n];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..size {
                for s in signs.iter_mut() {
                    *s = signs_kind.draw(&mut rng);
                }
                let y = signed_sum(space, vectors, &signs, &mut buf).powf(moment);
                s1 += y;
                s2 += y * y;
            }
            (s1, s2, size)
        })
        .collect();
    let (s1, s2, count) = partial.iter().fold((0.0, 0.0, 0usize), |acc, p| {
        (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2)
    });
    let m = s1 / count as f64;
    let var = ((s2 - count as f64 * m * m) / (count as f64 - 1.0)).max(0.0);
    let se_m = (var / count as f64).sqrt();
    let mean = m.powf(1.0 / moment);
    let stderr = if m > 0.0 {
        mean / (moment * m) * se_m
    } else {
        0.0
    };
    RademacherEstimate {
        mean,
        stderr,
        method: EstimateMethod::MonteCarlo,
        sample_count: count,
    }
}

fn norms(space: &SpaceDescriptor, family: &[ElementValue]) -> Result<Vec<f64>> {
    family
        .iter()
        .map(|v| {
            space.check(v)?;
            Ok(space.norm_of(v))
        })
        .collect()
}

/// `(𝔼‖Σ ε_n x_n‖²)^{1/2} / (Σ ‖x_n‖^t)^{1/t}` for `t ∈ [1, 2]`.
pub fn type_constant(
    space: &SpaceDescriptor,
    family: &[ElementValue],
    t: f64,
    budget: &SampleBudget,
) -> Result<f64> {
    if !(1.0..=2.0).contains(&t) {
        return Err(Error::InvalidExponent {
            name: "t",
            value: t,
            reason: "type exponents lie in [1, 2]",
        });
    }
    let denom = lp_aggregate(norms(space, family)?, Exponent::Finite(t));
    if denom == 0.0 {
        return Err(Error::Empty("nonzero vectors"));
    }
    Ok(rademacher_mean(family, space, 2.0, budget)?.mean / denom)
}

/// `(Σ ‖x_n‖^q)^{1/q} / (𝔼‖Σ ε_n x_n‖²)^{1/2}` for `q ∈ [2, ∞]`.
pub fn cotype_constant(
    space: &SpaceDescriptor,
    family: &[ElementValue],
    q: Exponent,
    budget: &SampleBudget,
) -> Result<f64> {
    if let Exponent::Finite(qf) = q {
        if qf < 2.0 {
            return Err(Error::InvalidExponent {
                name: "q",
                value: qf,
                reason: "cotype exponents lie in [2, ∞]",
            });
        }
    }
    let numer = lp_aggregate(norms(space, family)?, q);
    let denom = rademacher_mean(family, space, 2.0, budget)?.mean;
    if denom == 0.0 {
        return Err(Error::Empty("nonzero vectors"));
    }
    Ok(numer / denom)
}

/// Search effort for [`rbound_lower`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RBoundBudget {
    /// Random tuples drawn before refinement.
    pub trials: usize,
    /// Largest tuple length; capped at the exact enumeration limit.
    pub max_tuple: usize,
    pub moment: f64,
    pub seed: u64,
    pub signs: SignKind,
}

impl Default for RBoundBudget {
    fn default() -> Self {
        RBoundBudget {
            trials: 32,
            max_tuple: 6,
            moment: 2.0,
            seed: 0x5eed_0003,
            signs: SignKind::Rademacher,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RBoundEstimate {
    /// Largest ratio found; a lower bound for `R(𝒯)`.
    pub value: f64,
    /// Indices into the family for the best tuple.
    pub operators: Vec<usize>,
    pub vectors: Vec<ElementValue>,
}

struct RatioEvaluator<'a> {
    ops: &'a [OperatorValue],
    domain: &'a SpaceDescriptor,
    codomain: &'a SpaceDescriptor,
    budget: SampleBudget,
    moment: f64,
}

impl RatioEvaluator<'_> {
    fn ratio(&self, idx: &[usize], xs: &[ElementValue]) -> Result<f64> {
        let denom = rademacher_mean(xs, self.domain, self.moment, &self.budget)?.mean;
        if !(denom > 0.0) {
            return Ok(0.0);
        }
        let images: Vec<ElementValue> = idx
            .iter()
            .zip(xs)
            .map(|(&i, x)| self.ops[i].apply_unchecked(&x.0))
            .collect();
        Ok(rademacher_mean(&images, self.codomain, self.moment, &self.budget)?.mean / denom)
    }
}

/// Lower bound for the `R`-bound of a finite operator family: singleton
/// witnesses first, then random tuples (indices drawn with repetition,
/// Gaussian vectors), each refined by coordinate ascent with multiplicative
/// steps `{2, 1/2, 1.1, 1/1.1}` until no step improves. Sign averages are
/// exact because tuples never exceed the enumeration limit.
pub fn rbound_lower(ops: &[OperatorValue], budget: &RBoundBudget) -> Result<RBoundEstimate> {
    let first = ops.first().ok_or(Error::Empty("operator family"))?;
    let (domain, codomain) = (first.domain(), first.codomain());
    for t in ops {
        if t.domain() != domain || t.codomain() != codomain {
            return Err(Error::SpaceMismatch(format!(
                "family mixes {domain} -> {codomain} with {} -> {}",
                t.domain(),
                t.codomain()
            )));
        }
    }
    check_moment(budget.moment)?;
    let eval = RatioEvaluator {
        ops,
        domain,
        codomain,
        budget: SampleBudget {
            samples: 0,
            seed: budget.seed,
            signs: budget.signs,
        },
        moment: budget.moment,
    };
    let probe = ProbeBudget {
        trials: 32,
        seed: budget.seed,
    };

    let mut best = RBoundEstimate {
        value: f64::NEG_INFINITY,
        operators: vec![],
        vectors: vec![],
    };
    for (i, t) in ops.iter().enumerate() {
        let witness = operator_norm(t, NormMode::Auto, &probe)?.witness;
        let r = eval.ratio(&[i], std::slice::from_ref(&witness))?;
        if r > best.value {
            best = RBoundEstimate {
                value: r,
                operators: vec![i],
                vectors: vec![witness],
            };
        }
    }

    let max_tuple = budget.max_tuple.clamp(1, EXACT_ENUMERATION_LIMIT);
    let max_tuple = match budget.signs {
        SignKind::Rademacher => max_tuple,
        SignKind::Steinhaus8 => max_tuple.min(EXACT_ENUMERATION_LIMIT / 3),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let d = domain.dimension();
    for _ in 0..budget.trials {
        let len = rng.random_range(1..=max_tuple);
        let idx: Vec<usize> = (0..len).map(|_| rng.random_range(0..ops.len())).collect();
        let mut xs: Vec<ElementValue> = (0..len)
            .map(|_| ElementValue::random_gaussian(d, &mut rng))
            .collect();
        let mut value = eval.ratio(&idx, &xs)?;
        loop {
            let mut improved = false;
            for n in 0..len {
                for factor in [2.0, 0.5, 1.1, 1.0 / 1.1] {
                    let saved = xs[n].clone();
                    xs[n] = saved.scale(Complex64::new(factor, 0.0));
                    let r = eval.ratio(&idx, &xs)?;
                    if r > value * (1.0 + 1e-12) {
                        value = r;
                        improved = true;
                    } else {
                        xs[n] = saved;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if value > best.value {
            best = RBoundEstimate {
                value,
                operators: idx,
                vectors: xs,
            };
        }
    }
    Ok(best)
}

/// Settings of the `R`-bounded range experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeExperimentConfig {
    /// Type exponent of the codomain `ℓ^t`.
    pub t: f64,
    /// Cotype exponent of the domain `ℓ^q`.
    pub q: f64,
    pub r: Exponent,
    pub dim: usize,
    /// Pieces per random step symbol.
    pub pieces: usize,
    pub trials: usize,
    pub rbound: RBoundBudget,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RangeExperimentRow {
    pub trial: usize,
    pub rbound_lower: f64,
    /// `(Σ_I ‖c_I‖^r)^{1/r}` over the pieces.
    pub lr_value: f64,
    pub ratio: f64,
}

/// Checks `1/r = 1/t − 1/q`.
pub fn check_range_exponents(t: f64, q: f64, r: Exponent) -> Result<()> {
    if !(1.0..=2.0).contains(&t) || !(q >= 2.0) {
        return Err(Error::OutOfRange(format!(
            "need t ∈ [1, 2] and q ≥ 2, got t = {t}, q = {q}"
        )));
    }
    let expected = 1.0 / t - 1.0 / q;
    if (r.reciprocal() - expected).abs() > 1e-12 {
        return Err(Error::OutOfRange(format!(
            "exponents violate 1/r = 1/t − 1/q: 1/{r} ≠ 1/{t} − 1/{q} = {expected}"
        )));
    }
    Ok(())
}

/// For random step symbols `ℓ^q_d → ℓ^t_d` with Gaussian pieces, compares
/// the `R`-bound lower estimate of the range with the `ℓ^r` budget of the
/// pieces.
pub fn rr_to_rbound_experiment(config: &RangeExperimentConfig) -> Result<Vec<RangeExperimentRow>> {
    check_range_exponents(config.t, config.q, config.r)?;
    if config.pieces == 0 || config.dim == 0 {
        return Err(Error::OutOfRange("pieces and dim must be positive".into()));
    }
    let domain = SpaceDescriptor::sequence(Exponent::Finite(config.q), config.dim)?;
    let codomain = SpaceDescriptor::sequence(Exponent::Finite(config.t), config.dim)?;
    let space = OperatorSpace::new(domain.clone(), codomain.clone());
    let Exponent::Finite(r) = config.r else {
        return Err(Error::OutOfRange(
            "the range experiment needs a finite r".into(),
        ));
    };
    (0..config.trials)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial as u64));
            let pieces: Vec<OperatorValue> = (0..config.pieces)
                .map(|_| {
                    let m = nalgebra::DMatrix::from_fn(config.dim, config.dim, |_, _| {
                        let v = ElementValue::random_gaussian(1, &mut rng);
                        v.0[0] / config.dim as f64
                    });
                    OperatorValue::new(m, domain.clone(), codomain.clone())
                })
                .collect::<Result<_>>()?;
            let breakpoints: Vec<f64> = (0..=config.pieces).map(|i| i as f64).collect();
            let step = StepFunction::new(breakpoints, pieces.clone(), space.clone())?;
            let lr_value = rs_atom_upper(&step, r)?;
            let mut rb = config.rbound;
            rb.seed = derive_seed(config.rbound.seed, trial as u64);
            let rbound_lower = rbound_lower(&pieces, &rb)?.value;
            Ok(RangeExperimentRow {
                trial,
                rbound_lower,
                lr_value,
                ratio: rbound_lower / lr_value,
            })
        })
        .collect()
}

/// Settings of the cotype reconstruction experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CotypeExperimentConfig {
    pub space: SpaceDescriptor,
    pub p: f64,
    pub q: Exponent,
    /// Number of modulated terms.
    pub modes: usize,
    /// Grid size.
    pub n: usize,
    /// Sign draws.
    pub trials: usize,
    pub signs: SignKind,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CotypeExperimentRow {
    pub trial: usize,
    /// `max_n sup_x ‖S_{I_n} f(x) − φ(x) e_{3n}(x) ε_n x_n‖`.
    pub recovery_error: f64,
    /// `‖f‖_{L^p(X)}`.
    pub signal_norm: f64,
    /// `‖(Σ_n ‖S_{I_n} f‖^q)^{1/q}‖_{L^p}`.
    pub rubio_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CotypeExperimentSummary {
    pub rows: Vec<CotypeExperimentRow>,
    pub max_recovery_error: f64,
    /// `‖φ‖_p (Σ‖x_n‖^q)^{1/q} / (mean_ε ‖f_ε‖_p^p)^{1/p}` over the draws.
    pub cotype_ratio_sampled: f64,
    /// `(Σ‖x_n‖^q)^{1/q} / (𝔼‖Σ ε_n x_n‖^p)^{1/p}` by enumeration or Monte
    /// Carlo.
    pub cotype_ratio_reference: RademacherEstimate,
    pub reference_ratio: f64,
}

/// The frequency window `[3n − 1, 3n + 2)` isolating the `n`-th term.
pub fn cotype_window(n: usize) -> FrequencyInterval {
    let c = 3 * n as i64;
    FrequencyInterval::new(c - 1, c + 2).expect("window is nonempty")
}

/// Builds `f_ε = φ Σ_n ε_n e_{3n} x_n` with `φ = 1 + cos(2πx)` (spectrum in
/// `{−1, 0, 1}`), checks that each window projection returns its own term,
/// and reports the resulting cotype ratios.
pub fn cotype_from_rubio_experiment(
    config: &CotypeExperimentConfig,
) -> Result<CotypeExperimentSummary> {
    check_grid_size(config.n)?;
    let half = (config.n / 2) as i64;
    if config.modes == 0 || 3 * config.modes as i64 + 1 >= half {
        return Err(Error::OutOfRange(format!(
            "{} modes need frequencies up to {} but the band ends at {}",
            config.modes,
            3 * config.modes + 1,
            half - 1
        )));
    }
    if !(config.p >= 1.0) || !config.p.is_finite() || config.trials == 0 {
        return Err(Error::OutOfRange(
            "need 1 ≤ p < ∞ and at least one trial".into(),
        ));
    }
    let n = config.n;
    let space = config.space.clone();
    let d = space.dimension();
    let p = Exponent::Finite(config.p);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let xs: Vec<ElementValue> = (0..config.modes)
        .map(|_| ElementValue::random_gaussian(d, &mut rng))
        .collect();
    let phi: Vec<f64> = (0..n)
        .map(|t| 1.0 + (2.0 * std::f64::consts::PI * t as f64 / n as f64).cos())
        .collect();
    let w = WeightGrid::constant(n, 1.0, 1.0 / n as f64)?;
    let phi_norm = weighted_lp_norm_scalar(&phi, &w, p)?;
    let lq = lp_aggregate(xs.iter().map(|x| space.norm_of(x)), config.q);

    let mut rows = Vec::with_capacity(config.trials);
    let mut power_sum = 0.0;
    for trial in 0..config.trials {
        let eps: Vec<Complex64> = (0..config.modes)
            .map(|_| config.signs.draw(&mut rng))
            .collect();
        let term = |m: usize, t: usize| -> ElementValue {
            xs[m].scale(eps[m] * unit_mode(3 * (m as i64 + 1), t, n) * phi[t])
        };
        let f = Signal::from_fn(n, space.clone(), 1.0, |t| {
            let mut acc = ElementValue::zeros(d);
            for m in 0..config.modes {
                acc = &acc + &term(m, t);
            }
            acc
        })?;
        let mut recovery_error: f64 = 0.0;
        let mut piece_norms = Vec::with_capacity(config.modes);
        for m in 0..config.modes {
            let s = frequency_projection(&cotype_window(m + 1), &f)?;
            let expected = Signal::from_fn(n, space.clone(), 1.0, |t| term(m, t))?;
            recovery_error = recovery_error.max(s.sup_distance(&expected)?);
            piece_norms.push(s.pointwise_norms());
        }
        let rubio: Vec<f64> = (0..n)
            .map(|t| lp_aggregate(piece_norms.iter().map(|v| v[t]), config.q))
            .collect();
        let signal_norm = weighted_lp_norm(&f, &w, p)?;
        power_sum += signal_norm.powf(config.p);
        rows.push(CotypeExperimentRow {
            trial,
            recovery_error,
            signal_norm,
            rubio_norm: weighted_lp_norm_scalar(&rubio, &w, p)?,
        });
    }
    let sampled = phi_norm * lq / (power_sum / config.trials as f64).powf(1.0 / config.p);
    let budget = SampleBudget {
        samples: 100_000,
        seed: derive_seed(config.seed, u64::MAX),
        signs: config.signs,
    };
    let reference = rademacher_mean(&xs, &space, config.p, &budget)?;
    Ok(CotypeExperimentSummary {
        max_recovery_error: rows.iter().map(|r| r.recovery_error).fold(0.0, f64::max),
        rows,
        cotype_ratio_sampled: sampled,
        reference_ratio: lq / reference.mean,
        cotype_ratio_reference: reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::singular_values;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_family(n: usize, d: usize, seed: u64) -> Vec<ElementValue> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| ElementValue::random_gaussian(d, &mut rng))
            .collect()
    }

    fn l(p: f64, n: usize) -> SpaceDescriptor {
        SpaceDescriptor::sequence(Exponent::Finite(p), n).unwrap()
    }

    /// Plain enumeration of all `2^N` real sign patterns.
    fn enumerate(vectors: &[ElementValue], space: &SpaceDescriptor, moment: f64) -> f64 {
        let n = vectors.len();
        let mut total = 0.0;
        for mask in 0..1usize << n {
            let mut acc = ElementValue::zeros(space.dimension());
            for (i, v) in vectors.iter().enumerate() {
                let s = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                acc = &acc + &v.scale(c(s, 0.0));
            }
            total += space.norm_of(&acc).powf(moment);
        }
        (total / (1usize << n) as f64).powf(1.0 / moment)
    }

    #[test]
    fn single_vector_mean_is_its_norm() {
        let space = l(3.0, 4);
        let x = random_family(1, 4, 1);
        let est = rademacher_mean(&x, &space, 1.0, &SampleBudget::default()).unwrap();
        assert_eq!(est.method, EstimateMethod::Exact);
        assert_eq!(est.stderr, 0.0);
        assert!((est.mean - space.norm_of(&x[0])).abs() < 1e-14);
    }

    #[test]
    fn hilbert_moment_two_identity() {
        let space = l(2.0, 3);
        for n in [1, 5, 12] {
            let xs = random_family(n, 3, n as u64);
            let est = rademacher_mean(&xs, &space, 2.0, &SampleBudget::default()).unwrap();
            let direct = xs
                .iter()
                .map(|x| space.norm_of(x).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((est.mean - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn exact_matches_plain_enumeration() {
        let space = l(1.0, 2);
        let xs = random_family(7, 2, 3);
        for m in [1.0, 1.5, 3.0] {
            let est = rademacher_mean(&xs, &space, m, &SampleBudget::default()).unwrap();
            assert!((est.mean - enumerate(&xs, &space, m)).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_within_three_stderr() {
        let space = l(1.0, 2);
        let xs = random_family(3, 2, 4);
        let exact = enumerate(&xs, &space, 1.0);
        // force sampling by asking for more terms than the enumeration limit
        let mut padded = xs.clone();
        padded.extend(std::iter::repeat_n(ElementValue::zeros(2), 12));
        let est = rademacher_mean(&padded, &space, 1.0, &SampleBudget::default()).unwrap();
        assert_eq!(est.method, EstimateMethod::MonteCarlo);
        assert!(est.stderr > 0.0);
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "{} vs {exact} ± {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let space = l(3.0, 2);
        let xs = random_family(20, 2, 5);
        let a = rademacher_mean(&xs, &space, 1.0, &SampleBudget::default()).unwrap();
        let b = rademacher_mean(&xs, &space, 1.0, &SampleBudget::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn steinhaus_signs_enumerate_small_families() {
        let space = l(2.0, 2);
        let xs = random_family(3, 2, 6);
        let budget = SampleBudget {
            signs: SignKind::Steinhaus8,
            ..SampleBudget::default()
        };
        let est = rademacher_mean(&xs, &space, 2.0, &budget).unwrap();
        assert_eq!(est.sample_count, 512);
        let direct = xs
            .iter()
            .map(|x| space.norm_of(x).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((est.mean - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn type_and_cotype_basics() {
        let budget = SampleBudget::default();
        let h = l(2.0, 4);
        let xs = random_family(6, 4, 7);
        assert!((type_constant(&h, &xs, 2.0, &budget).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (cotype_constant(&h, &xs, Exponent::Finite(2.0), &budget).unwrap() - 1.0).abs() < 1e-12
        );
        let one = &xs[..1];
        let x = l(1.0, 4);
        assert!((type_constant(&x, one, 1.3, &budget).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (cotype_constant(&x, one, Exponent::Infinity, &budget).unwrap() - 1.0).abs() < 1e-12
        );
        assert!(type_constant(&x, one, 2.5, &budget).is_err());
        assert!(cotype_constant(&x, one, Exponent::Finite(1.5), &budget).is_err());
    }

    #[test]
    fn ell_one_basis_type_ratio() {
        let budget = SampleBudget::default();
        for n in [2usize, 5, 12] {
            let space = l(1.0, n);
            let basis: Vec<ElementValue> = (0..n).map(|i| ElementValue::basis(n, i)).collect();
            for t in [1.0, 1.5, 2.0] {
                let ratio = type_constant(&space, &basis, t, &budget).unwrap();
                let enumerated = enumerate(&basis, &space, 2.0) / (n as f64).powf(1.0 / t);
                assert!((ratio - enumerated).abs() < 1e-12);
                assert!((ratio - (n as f64).powf(1.0 - 1.0 / t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kahane_moment_comparison_on_hilbert_space() {
        let space = l(2.0, 3);
        for seed in 0..10 {
            let xs = random_family(8, 3, seed);
            let m1 = rademacher_mean(&xs, &space, 1.0, &SampleBudget::default())
                .unwrap()
                .mean;
            let m2 = rademacher_mean(&xs, &space, 2.0, &SampleBudget::default())
                .unwrap()
                .mean;
            assert!(m1 <= m2 + 1e-12 && m2 <= 2f64.sqrt() * m1);
        }
    }

    #[test]
    fn rbound_of_singleton_is_operator_norm() {
        let space = l(2.0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = nalgebra::DMatrix::from_fn(3, 3, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let t = OperatorValue::new(m.clone(), space.clone(), space).unwrap();
        let est = rbound_lower(std::slice::from_ref(&t), &RBoundBudget::default()).unwrap();
        let sigma = singular_values(&m)[0];
        assert!((est.value - sigma).abs() < 1e-9 * sigma);
    }

    #[test]
    fn rbound_of_plus_minus_identity_is_one() {
        let space = l(3.0, 2);
        let id = OperatorValue::identity(&space);
        let fam = [id.clone(), id.scale(c(-1.0, 0.0))];
        for moment in [1.0, 2.0] {
            let budget = RBoundBudget {
                moment,
                ..RBoundBudget::default()
            };
            let est = rbound_lower(&fam, &budget).unwrap();
            assert!((est.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rbound_on_hilbert_space_is_sup_norm() {
        let space = l(2.0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ops: Vec<OperatorValue> = (0..4)
            .map(|_| {
                let m =
                    nalgebra::DMatrix::from_fn(3, 3, |_, _| c(rng.random_range(-1.0..1.0), 0.0));
                OperatorValue::new(m, space.clone(), space.clone()).unwrap()
            })
            .collect();
        let sup = ops
            .iter()
            .map(|t| singular_values(t.matrix())[0])
            .fold(0.0, f64::max);
        let est = rbound_lower(&ops, &RBoundBudget::default()).unwrap();
        assert!(est.value <= sup * (1.0 + 1e-9));
        assert!(est.value >= sup * (1.0 - 1e-9));
    }

    #[test]
    fn rbound_dominates_singletons() {
        let space = l(3.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ops: Vec<OperatorValue> = (0..3)
            .map(|_| {
                let entries: Vec<Complex64> = (0..2)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                OperatorValue::diagonal(&entries, &space).unwrap()
            })
            .collect();
        let budget = RBoundBudget {
            moment: 1.0,
            ..RBoundBudget::default()
        };
        let est = rbound_lower(&ops, &budget).unwrap();
        for t in &ops {
            let single = rbound_lower(std::slice::from_ref(t), &budget).unwrap();
            assert!(est.value >= single.value);
        }
    }

    #[test]
    fn rbound_rejects_mixed_spaces() {
        let a = OperatorValue::identity(&l(2.0, 2));
        let b = OperatorValue::identity(&l(3.0, 2));
        assert!(rbound_lower(&[a, b], &RBoundBudget::default()).is_err());
        assert!(rbound_lower(&[], &RBoundBudget::default()).is_err());
    }

    #[test]
    fn range_experiment_validates_exponents() {
        let cfg = RangeExperimentConfig {
            t: 1.5,
            q: 3.0,
            r: Exponent::Finite(2.0),
            dim: 2,
            pieces: 3,
            trials: 2,
            rbound: RBoundBudget::default(),
            seed: 1,
        };
        assert!(rr_to_rbound_experiment(&cfg).is_err());
        let cfg = RangeExperimentConfig {
            r: Exponent::Finite(3.0),
            rbound: RBoundBudget {
                trials: 4,
                ..RBoundBudget::default()
            },
            ..cfg
        };
        let rows = rr_to_rbound_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }

    #[test]
    fn constant_symbol_range_ratio() {
        let cfg = RangeExperimentConfig {
            t: 2.0,
            q: 2.0,
            r: Exponent::Infinity,
            dim: 2,
            pieces: 1,
            trials: 1,
            rbound: RBoundBudget::default(),
            seed: 3,
        };
        // r = ∞ has no finite atom budget; the Hilbert case is checked directly
        assert!(rr_to_rbound_experiment(&cfg).is_err());
        let cfg = RangeExperimentConfig {
            t: 1.5,
            q: 3.0,
            r: Exponent::Finite(3.0),
            ..cfg
        };
        let rows = rr_to_rbound_experiment(&cfg).unwrap();
        assert!(rows[0].ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn cotype_windows_recover_terms() {
        let cfg = CotypeExperimentConfig {
            space: l(2.0, 3),
            p: 2.0,
            q: Exponent::Finite(2.0),
            modes: 1,
            n: 64,
            trials: 3,
            signs: SignKind::Rademacher,
            seed: 11,
        };
        let out = cotype_from_rubio_experiment(&cfg).unwrap();
        assert!(out.max_recovery_error <= 1e-10);
        let cfg = CotypeExperimentConfig { modes: 8, ..cfg };
        let out = cotype_from_rubio_experiment(&cfg).unwrap();
        assert!(out.max_recovery_error <= 1e-10);
        assert!((out.cotype_ratio_sampled - 1.0).abs() < 1e-10);
        assert!((out.reference_ratio - 1.0).abs() < 1e-12);
        let cfg = CotypeExperimentConfig {
            modes: 11,
            n: 64,
            ..cfg
        };
        assert!(cotype_from_rubio_experiment(&cfg).is_err());
    }

    #[test]
    fn cotype_reference_on_ell_one() {
        let cfg = CotypeExperimentConfig {
            space: l(1.0, 8),
            p: 2.0,
            q: Exponent::Finite(2.0),
            modes: 8,
            n: 128,
            trials: 4,
            signs: SignKind::Rademacher,
            seed: 12,
        };
        let out = cotype_from_rubio_experiment(&cfg).unwrap();
        assert_eq!(out.cotype_ratio_reference.method, EstimateMethod::Exact);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<ElementValue> = (0..8)
            .map(|_| ElementValue::random_gaussian(8, &mut rng))
            .collect();
        let lq = xs
            .iter()
            .map(|x| cfg.space.norm_of(x).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((out.reference_ratio - lq / enumerate(&xs, &cfg.space, 2.0)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn convex_hull_does_not_raise_hilbert_rbound(seed in any::<u64>()) {
            let space = l(2.0, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ops: Vec<OperatorValue> = (0..3)
                .map(|_| {
                    let m = nalgebra::DMatrix::from_fn(2, 2, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                    OperatorValue::new(m, space.clone(), space.clone()).unwrap()
                })
                .collect();
            let mid = ops[0].sum(&ops[1]).unwrap().scale(c(0.5, 0.0));
            let mut enlarged = ops.clone();
            enlarged.push(mid);
            let budget = RBoundBudget { trials: 6, ..RBoundBudget::default() };
            let a = rbound_lower(&ops, &budget).unwrap().value;
            let b = rbound_lower(&enlarged, &budget).unwrap().value;
            prop_assert!(b <= a * (1.0 + 1e-9));
        }
    }
}
