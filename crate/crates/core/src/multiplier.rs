//! Periodic discrete Fourier multipliers acting on vector-valued signals.
//!
//! A signal holds `N` samples (`N` a power of two) over one period. Grid
//! frequencies are the integers `k ∈ [−N/2, N/2)`; the forward transform is
//! the plain sum `f̂(k) = Σ_t f(t) e^{−2πikt/N}` and the inverse carries the
//! factor `1/N`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spaces::{
    operator_norm, ElementValue, Exponent, NormMode, NormedSpace, OperatorSpace, OperatorValue,
    ProbeBudget, SpaceDescriptor,
};
use crate::variation::{vs_seminorm, SampledPath};
use crate::weights::{weighted_lp_norm, WeightGrid};
use crate::Complex64;

/// The zero frequency forms its own partition cell.
pub const ZERO_CELL: FrequencyInterval = FrequencyInterval { lo: 0, hi: 1 };

/// The unpaired Nyquist frequency `−N/2` is merged into the topmost negative
/// dyadic block (or forms its own cell when `N = 2`).
pub const NYQUIST_JOINS_TOP_NEGATIVE_BLOCK: bool = true;

/// Symbol jumps probed by [`estimate_multiplier_norm`].
pub const JUMP_PROBES: usize = 8;

pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "grid size must be a power of two ≥ 2, got {n}"
        )));
    }
    Ok(())
}

/// FFT bin holding frequency `k`.
pub fn bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Grid frequency stored in FFT bin `b`.
pub fn frequency(b: usize, n: usize) -> i64 {
    if b >= n / 2 {
        b as i64 - n as i64
    } else {
        b as i64
    }
}

/// `e^{2πikt/N}`, with the phase reduced modulo `N` before scaling.
pub fn unit_mode(k: i64, t: usize, n: usize) -> Complex64 {
    let r = (k.rem_euclid(n as i64) as u128 * t as u128 % n as u128) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r / n as f64)
}

/// Grid frequencies in ascending order.
pub fn frequencies(n: usize) -> impl Iterator<Item = i64> + Clone {
    let half = (n / 2) as i64;
    -half..half
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<ElementValue>,
    space: SpaceDescriptor,
    period: f64,
}

impl Signal {
    pub fn new(samples: Vec<ElementValue>, space: SpaceDescriptor, period: f64) -> Result<Self> {
        check_grid_size(samples.len())?;
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        for v in &samples {
            space.check(v)?;
        }
        Ok(Signal {
            samples,
            space,
            period,
        })
    }

    pub fn from_fn(
        n: usize,
        space: SpaceDescriptor,
        period: f64,
        f: impl FnMut(usize) -> ElementValue,
    ) -> Result<Self> {
        Self::new((0..n).map(f).collect(), space, period)
    }

    pub fn zeros(n: usize, space: SpaceDescriptor, period: f64) -> Result<Self> {
        let z = space.zero();
        Self::new(vec![z; n], space, period)
    }

    /// `value · e^{2πikt/N}`.
    pub fn single_mode(
        n: usize,
        space: SpaceDescriptor,
        period: f64,
        k: i64,
        value: &ElementValue,
    ) -> Result<Self> {
        space.check(value)?;
        Self::from_fn(n, space, period, |t| value.scale(unit_mode(k, t, n)))
    }

    /// Independent standard complex Gaussian coordinates at every sample.
    pub fn random_gaussian<R: Rng + ?Sized>(
        n: usize,
        space: SpaceDescriptor,
        period: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let d = space.dimension();
        Self::from_fn(n, space, period, |_| ElementValue::random_gaussian(d, rng))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ElementValue] {
        &self.samples
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn pointwise_norms(&self) -> Vec<f64> {
        self.samples.iter().map(|v| self.space.norm_of(v)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.pointwise_norms().into_iter().fold(0.0, f64::max)
    }

    fn same_grid(&self, other: &Signal) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{} vs {}",
                self.space, other.space
            )));
        }
        if self.len() != other.len() {
            return Err(Error::InvalidGrid(format!(
                "{} vs {} samples",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// `max_t ‖f(t) − g(t)‖`.
    pub fn sup_distance(&self, other: &Signal) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| self.space.distance(a, b))
            .fold(0.0, f64::max))
    }

    pub fn scale(&self, lambda: Complex64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|v| v.scale(lambda)).collect(),
            space: self.space.clone(),
            period: self.period,
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.same_grid(other)?;
        Ok(Signal {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
            space: self.space.clone(),
            period: self.period,
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.same_grid(other)?;
        Ok(Signal {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
            space: self.space.clone(),
            period: self.period,
        })
    }
}

/// Fourier coefficients of a signal, stored in FFT bin order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<ElementValue>,
    space: SpaceDescriptor,
    period: f64,
}

impl Spectrum {
    /// Coefficients given per frequency.
    pub fn from_fn(
        n: usize,
        space: SpaceDescriptor,
        period: f64,
        mut f: impl FnMut(i64) -> ElementValue,
    ) -> Result<Self> {
        check_grid_size(n)?;
        let coeffs: Vec<ElementValue> = (0..n).map(|b| f(frequency(b, n))).collect();
        for c in &coeffs {
            space.check(c)?;
        }
        Ok(Spectrum {
            coeffs,
            space,
            period,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn at(&self, k: i64) -> &ElementValue {
        &self.coeffs[bin(k, self.coeffs.len())]
    }

    /// Zero every coefficient whose frequency fails `keep`.
    pub fn mask(&mut self, keep: impl Fn(i64) -> bool) {
        let n = self.coeffs.len();
        let zero = self.space.zero();
        for (b, c) in self.coeffs.iter_mut().enumerate() {
            if !keep(frequency(b, n)) {
                *c = zero.clone();
            }
        }
    }
}

/// Forward and inverse FFT plans for one grid size.
#[derive(Clone)]
pub struct FourierPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierPlan").field("n", &self.n).finish()
    }
}

impl FourierPlan {
    pub fn new(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        let mut planner = FftPlanner::new();
        Ok(FourierPlan {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::InvalidGrid(format!(
                "plan is for {} points, got {n}",
                self.n
            )));
        }
        Ok(())
    }

    fn transform(
        &self,
        fft: &dyn Fft<f64>,
        values: &[ElementValue],
        dim: usize,
        factor: f64,
    ) -> Vec<ElementValue> {
        let n = self.n;
        let mut out = vec![ElementValue::zeros(dim); n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..dim {
            for (slot, v) in buf.iter_mut().zip(values) {
                *slot = v.0[c];
            }
            fft.process(&mut buf);
            for (o, z) in out.iter_mut().zip(&buf) {
                o.0[c] = z * factor;
            }
        }
        out
    }

    pub fn forward(&self, f: &Signal) -> Result<Spectrum> {
        self.check(f.len())?;
        let coeffs = self.transform(self.forward.as_ref(), &f.samples, f.space.dimension(), 1.0);
        Ok(Spectrum {
            coeffs,
            space: f.space.clone(),
            period: f.period,
        })
    }

    pub fn inverse(&self, s: &Spectrum) -> Result<Signal> {
        self.check(s.len())?;
        let samples = self.transform(
            self.inverse.as_ref(),
            &s.coeffs,
            s.space.dimension(),
            1.0 / self.n as f64,
        );
        Ok(Signal {
            samples,
            space: s.space.clone(),
            period: s.period,
        })
    }
}

pub fn dft(f: &Signal) -> Result<Spectrum> {
    FourierPlan::new(f.len())?.forward(f)
}

pub fn idft(s: &Spectrum) -> Result<Signal> {
    FourierPlan::new(s.len())?.inverse(s)
}

/// Half-open integer frequency band `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyInterval {
    lo: i64,
    hi: i64,
}

impl FrequencyInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(FrequencyInterval { lo, hi })
    }

    pub fn singleton(k: i64) -> Self {
        FrequencyInterval { lo: k, hi: k + 1 }
    }

    /// All of `[−N/2, N/2)`.
    pub fn full_band(n: usize) -> Self {
        let half = (n / 2) as i64;
        FrequencyInterval {
            lo: -half,
            hi: half,
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k < self.hi
    }

    pub fn intersects(&self, other: &FrequencyInterval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn within_band(&self, n: usize) -> bool {
        let band = Self::full_band(n);
        band.lo <= self.lo && self.hi <= band.hi
    }

    /// Grid frequencies of an `n`-point grid lying in the interval.
    pub fn grid_frequencies(&self, n: usize) -> std::ops::Range<i64> {
        let band = Self::full_band(n);
        let lo = self.lo.max(band.lo);
        let hi = self.hi.min(band.hi).max(lo);
        lo..hi
    }
}

impl fmt::Display for FrequencyInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// Errors on the first overlapping pair.
pub fn check_disjoint(intervals: &[FrequencyInterval]) -> Result<()> {
    let mut sorted: Vec<FrequencyInterval> = intervals.to_vec();
    sorted.sort();
    for pair in sorted.windows(2) {
        if pair[0].hi > pair[1].lo {
            return Err(Error::OverlappingIntervals(
                pair[0].lo, pair[0].hi, pair[1].lo, pair[1].hi,
            ));
        }
    }
    Ok(())
}

/// `{0}`, the blocks `±[2^k, 2^{k+1})` clipped to the band, and the Nyquist
/// frequency, sorted by lower end. Disjoint and covering every grid
/// frequency.
pub fn dyadic_partition(n: usize) -> Result<Vec<FrequencyInterval>> {
    check_grid_size(n)?;
    let half = (n / 2) as i64;
    let mut cells = vec![ZERO_CELL];
    let mut lo = 1_i64;
    while lo < half {
        let hi = (2 * lo).min(half);
        cells.push(FrequencyInterval { lo, hi });
        let neg_lo = if hi == half { -half } else { -hi + 1 };
        cells.push(FrequencyInterval {
            lo: neg_lo,
            hi: -lo + 1,
        });
        lo = hi;
    }
    if half == 1 {
        cells.push(FrequencyInterval::singleton(-1));
    }
    cells.sort();
    Ok(cells)
}

/// Operator-valued function on the grid frequencies of an `N`-point grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    /// Entry `i` belongs to frequency `i − N/2`.
    entries: Vec<OperatorValue>,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
}

impl Symbol {
    /// `entries` in ascending frequency order, starting at `−N/2`.
    pub fn new(
        entries: Vec<OperatorValue>,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
    ) -> Result<Self> {
        check_grid_size(entries.len())?;
        for (i, e) in entries.iter().enumerate() {
            if e.domain() != &domain || e.codomain() != &codomain {
                return Err(Error::SpaceMismatch(format!(
                    "symbol entry {i} maps {} -> {}, expected {domain} -> {codomain}",
                    e.domain(),
                    e.codomain()
                )));
            }
        }
        Ok(Symbol {
            entries,
            domain,
            codomain,
        })
    }

    pub fn from_fn(
        n: usize,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
        f: impl FnMut(i64) -> OperatorValue,
    ) -> Result<Self> {
        check_grid_size(n)?;
        Self::new(frequencies(n).map(f).collect(), domain, codomain)
    }

    /// Scalar symbol `k ↦ λ(k)·I`.
    pub fn scalar_fn(
        n: usize,
        space: SpaceDescriptor,
        mut f: impl FnMut(i64) -> Complex64,
    ) -> Result<Self> {
        let sp = space.clone();
        Self::from_fn(n, space.clone(), space, |k| {
            OperatorValue::scalar(f(k), &sp)
        })
    }

    pub fn identity(n: usize, space: SpaceDescriptor) -> Result<Self> {
        Self::scalar_fn(n, space, |_| Complex64::new(1.0, 0.0))
    }

    pub fn constant(n: usize, value: &OperatorValue) -> Result<Self> {
        Self::from_fn(n, value.domain().clone(), value.codomain().clone(), |_| {
            value.clone()
        })
    }

    pub fn indicator(
        n: usize,
        space: SpaceDescriptor,
        interval: FrequencyInterval,
    ) -> Result<Self> {
        Self::scalar_fn(n, space, |k| {
            Complex64::new(if interval.contains(k) { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain(&self) -> &SpaceDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceDescriptor {
        &self.codomain
    }

    pub fn entries(&self) -> &[OperatorValue] {
        &self.entries
    }

    pub fn at(&self, k: i64) -> &OperatorValue {
        &self.entries[(k + (self.entries.len() / 2) as i64) as usize]
    }

    /// Pointwise product `k ↦ self(k)·inner(k)`.
    pub fn compose(&self, inner: &Symbol) -> Result<Symbol> {
        if self.len() != inner.len() {
            return Err(Error::InvalidGrid(format!(
                "{} vs {} frequencies",
                self.len(),
                inner.len()
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&inner.entries)
            .map(|(a, b)| a.compose(b))
            .collect::<Result<Vec<_>>>()?;
        Symbol::new(entries, inner.domain.clone(), self.codomain.clone())
    }

    pub fn scale(&self, lambda: Complex64) -> Symbol {
        Symbol {
            entries: self.entries.iter().map(|e| e.scale(lambda)).collect(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// The operator-valued path `k ↦ m(k)` over the grid frequencies of
    /// `interval`, parametrized by `k`.
    pub fn path_on(&self, interval: &FrequencyInterval) -> Option<SampledPath<OperatorSpace>> {
        let ks = interval.grid_frequencies(self.len());
        if ks.is_empty() {
            return None;
        }
        let times: Vec<f64> = ks.clone().map(|k| k as f64).collect();
        let values: Vec<OperatorValue> = ks.map(|k| self.at(k).clone()).collect();
        let space = OperatorSpace::new(self.domain.clone(), self.codomain.clone());
        SampledPath::new(times, values, space).ok()
    }

    /// The whole symbol as a path over all grid frequencies.
    pub fn full_path(&self) -> SampledPath<OperatorSpace> {
        self.path_on(&FrequencyInterval::full_band(self.len()))
            .expect("the band holds at least two frequencies")
    }

    fn apply_spectrum(&self, spec: &Spectrum) -> Spectrum {
        let n = spec.len();
        let coeffs = spec
            .coeffs
            .iter()
            .enumerate()
            .map(|(b, c)| self.at(frequency(b, n)).apply_unchecked(&c.0))
            .collect();
        Spectrum {
            coeffs,
            space: self.codomain.clone(),
            period: spec.period,
        }
    }
}

fn check_applicable(m: &Symbol, f: &Signal) -> Result<()> {
    if f.space() != m.domain() {
        return Err(Error::SpaceMismatch(format!(
            "signal takes values in {}, symbol acts on {}",
            f.space(),
            m.domain()
        )));
    }
    if f.len() != m.len() {
        return Err(Error::InvalidGrid(format!(
            "signal has {} samples, symbol has {} frequencies",
            f.len(),
            m.len()
        )));
    }
    Ok(())
}

fn apply_with_plan(plan: &FourierPlan, m: &Symbol, f: &Signal) -> Result<Signal> {
    check_applicable(m, f)?;
    plan.inverse(&m.apply_spectrum(&plan.forward(f)?))
}

/// `T_m f = F^{-1}(m · F f)`.
pub fn apply_multiplier(m: &Symbol, f: &Signal) -> Result<Signal> {
    check_applicable(m, f)?;
    apply_with_plan(&FourierPlan::new(f.len())?, m, f)
}

/// `S_I f`: the multiplier with symbol `1_I`, evaluated on grid frequencies.
pub fn frequency_projection(interval: &FrequencyInterval, f: &Signal) -> Result<Signal> {
    let plan = FourierPlan::new(f.len())?;
    let mut spec = plan.forward(f)?;
    spec.mask(|k| interval.contains(k));
    plan.inverse(&spec)
}

/// `[m]_{V^s(I; L(X,Y))}` for each interval. Intervals holding fewer than two
/// grid frequencies contribute zero.
pub fn symbol_variation_profile(
    m: &Symbol,
    partition: &[FrequencyInterval],
    s: f64,
) -> Result<Vec<f64>> {
    check_disjoint(partition)?;
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::InvalidExponent {
            name: "s",
            value: s,
            reason: "variation exponent must satisfy 1 ≤ s < ∞",
        });
    }
    partition
        .iter()
        .map(|interval| match m.path_on(interval) {
            Some(path) => vs_seminorm(&path, s),
            None => Ok(0.0),
        })
        .collect()
}

/// How grid frequency `k` maps to the variable `ξ` of a continuum symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrequencyScale {
    /// `ξ = k`.
    Plain,
    /// `ξ = 2πk`.
    TwoPi,
}

impl FrequencyScale {
    pub fn xi(self, k: f64) -> f64 {
        match self {
            FrequencyScale::Plain => k,
            FrequencyScale::TwoPi => 2.0 * std::f64::consts::PI * k,
        }
    }
}

/// Diagonal entry `2^n / (iξ + 2^n)`.
pub fn resolvent_entry(n: u32, xi: f64) -> Complex64 {
    let a = (n as f64).exp2();
    Complex64::new(a, 0.0) / Complex64::new(a, xi)
}

/// `A(iξ + A)^{-1}` with `A = diag(2^1, …, 2^{n_dims})` on `ℓ^p_{n_dims}`.
pub fn resolvent_matrix(n_dims: usize, xi: f64, p: Exponent) -> Result<OperatorValue> {
    if n_dims == 0 {
        return Err(Error::OutOfRange("resolvent needs n_dims ≥ 1".into()));
    }
    let space = SpaceDescriptor::sequence(p, n_dims)?;
    let entries: Vec<Complex64> = (1..=n_dims as u32)
        .map(|n| resolvent_entry(n, xi))
        .collect();
    OperatorValue::diagonal(&entries, &space)
}

/// The resolvent symbol sampled at the grid frequencies of an `N`-point grid.
pub fn resolvent_symbol(
    n_dims: usize,
    n: usize,
    p: Exponent,
    scale: FrequencyScale,
) -> Result<Symbol> {
    check_grid_size(n)?;
    let space = SpaceDescriptor::sequence(p, n_dims)?;
    let entries = frequencies(n)
        .map(|k| resolvent_matrix(n_dims, scale.xi(k as f64), p))
        .collect::<Result<Vec<_>>>()?;
    Symbol::new(entries, space.clone(), space)
}

/// Steps of the nonlinear power iteration in [`estimate_multiplier_norm`].
pub const POWER_STEPS: usize = 25;

/// `(p, q_X, q_Y)` when `L^p(ℓ^{q_X}) → L^p(ℓ^{q_Y})` has smooth duality
/// maps, i.e. every exponent is finite and above 1.
fn power_exponents(m: &Symbol, p: Exponent) -> Option<(f64, f64, f64)> {
    let smooth = |e: Exponent| e.as_finite().filter(|v| *v > 1.0);
    Some((
        smooth(p)?,
        smooth(m.domain().sequence_exponent()?)?,
        smooth(m.codomain().sequence_exponent()?)?,
    ))
}

/// `‖v‖_q^{power} J_q(v)`, where `J_q(v)_i = |v_i|^{q−2} v_i / ‖v‖_q^{q−1}`
/// is the norming functional of `v` in `ℓ^q` under `Σ conj(g_i) v_i`.
fn duality_map(v: &[Complex64], q: f64, power: f64) -> ElementValue {
    let norm = v
        .iter()
        .map(|z| z.norm().powf(q))
        .sum::<f64>()
        .powf(1.0 / q);
    if !(norm > 0.0) {
        return ElementValue::zeros(v.len());
    }
    let factor = norm.powf(power - (q - 1.0));
    ElementValue::new(
        v.iter()
            .map(|z| {
                let a = z.norm();
                if a == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * (a.powf(q - 2.0) * factor)
                }
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierNormEstimate {
    /// Largest observed `‖T_m f‖ / ‖f‖`; a lower bound for the operator norm.
    pub ratio: f64,
    pub best_probe: Signal,
    pub probes_evaluated: usize,
}

/// Lower bound for `‖T_m‖` on `L^p(w; X) → L^p(w; Y)`.
///
/// Probe schedule: a single mode at every frequency carrying the norm
/// witness of `m(k)`, modulated boxes of three widths at the
/// [`JUMP_PROBES`] largest jumps `m(k) − m(k−1)` carrying the witness of the
/// jump, a random bump on every dyadic cell, `probes` Gaussian signals,
/// [`POWER_STEPS`] of nonlinear power iteration (from a Gaussian start and
/// from the best probe) when the duality maps are smooth, then `probes`
/// steps of perturbative ascent from the best probe.
/// Deterministic in `seed`.
pub fn estimate_multiplier_norm(
    m: &Symbol,
    p: Exponent,
    w: &WeightGrid,
    probes: usize,
    seed: u64,
) -> Result<MultiplierNormEstimate> {
    if probes == 0 {
        return Err(Error::OutOfRange("at least one probe is required".into()));
    }
    let n = m.len();
    if w.len() != n {
        return Err(Error::InvalidGrid(format!(
            "weight has {} samples, symbol has {n} frequencies",
            w.len()
        )));
    }
    let plan = FourierPlan::new(n)?;
    let period = w.spacing() * n as f64;
    let domain = m.domain().clone();
    let d = domain.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = ProbeBudget { trials: 16, seed };

    let mut evaluated = 0usize;
    let mut evaluate = |f: &Signal| -> Result<Option<f64>> {
        let denom = weighted_lp_norm(f, w, p)?;
        if !(denom > 0.0) {
            return Ok(None);
        }
        evaluated += 1;
        let image = apply_with_plan(&plan, m, f)?;
        Ok(Some(weighted_lp_norm(&image, w, p)? / denom))
    };

    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_probe: Option<Signal> = None;
    let offer =
        |f: Signal, r: Option<f64>, best_ratio: &mut f64, best_probe: &mut Option<Signal>| {
            if let Some(r) = r {
                if r > *best_ratio {
                    *best_ratio = r;
                    *best_probe = Some(f);
                }
            }
        };

    // |e_k| ≡ 1, so a single mode e_k·v has ratio ‖m(k)v‖/‖v‖ exactly; only
    // the winning mode is pushed through the transform.
    let mut best_mode: Option<(f64, i64, ElementValue)> = None;
    for k in frequencies(n) {
        let op = m.at(k);
        let witness = operator_norm(op, NormMode::Auto, &budget)?.witness;
        let norm_in = domain.norm_of(&witness);
        if !(norm_in > 0.0) {
            continue;
        }
        let r = m.codomain().norm_of(&op.apply_unchecked(&witness.0)) / norm_in;
        if best_mode.as_ref().is_none_or(|(b, _, _)| r > *b) {
            best_mode = Some((r, k, witness));
        }
    }
    if let Some((_, k, v)) = best_mode {
        let f = Signal::single_mode(n, domain.clone(), period, k, &v)?;
        let r = evaluate(&f)?;
        offer(f, r, &mut best_ratio, &mut best_probe);
    }

    // Modulated boxes straddling the largest jumps of the symbol.
    let mut jumps: Vec<(f64, i64)> = frequencies(n)
        .skip(1)
        .map(|k| {
            let diff = m.at(k).matrix() - m.at(k - 1).matrix();
            (diff.iter().map(|z| z.norm_sqr()).sum::<f64>(), k)
        })
        .filter(|(size, _)| *size > 0.0)
        .collect();
    jumps.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in jumps.iter().take(JUMP_PROBES) {
        let diff = m.at(k).difference(m.at(k - 1))?;
        let v = operator_norm(&diff, NormMode::Auto, &budget)?.witness;
        for width in [(n / 64).max(1), (n / 16).max(1), n / 4] {
            let f = Signal::from_fn(n, domain.clone(), period, |t| {
                if t < width {
                    v.scale(unit_mode(k, t, n))
                } else {
                    ElementValue::zeros(d)
                }
            })?;
            let r = evaluate(&f)?;
            offer(f, r, &mut best_ratio, &mut best_probe);
        }
    }

    for cell in dyadic_partition(n)? {
        let spec = Spectrum::from_fn(n, domain.clone(), period, |k| {
            if cell.contains(k) {
                ElementValue::random_gaussian(d, &mut rng)
            } else {
                ElementValue::zeros(d)
            }
        })?;
        let f = plan.inverse(&spec)?;
        let r = evaluate(&f)?;
        offer(f, r, &mut best_ratio, &mut best_probe);
    }

    for _ in 0..probes {
        let f = Signal::random_gaussian(n, domain.clone(), period, &mut rng)?;
        let r = evaluate(&f)?;
        offer(f, r, &mut best_ratio, &mut best_probe);
    }

    if let Some((p, q_dom, q_cod)) = power_exponents(m, p) {
        let adjoint = Symbol::new(
            m.entries()
                .iter()
                .map(|e| {
                    OperatorValue::new(e.matrix().adjoint(), m.codomain().clone(), domain.clone())
                })
                .collect::<Result<Vec<_>>>()?,
            m.codomain().clone(),
            domain.clone(),
        )?;
        let q_dom_dual = q_dom / (q_dom - 1.0);
        let p_dual = p / (p - 1.0);
        let ws = w.samples();
        let mut starts = vec![Signal::random_gaussian(
            n,
            domain.clone(),
            period,
            &mut rng,
        )?];
        starts.extend(best_probe.clone());
        for mut x in starts {
            for _ in 0..POWER_STEPS {
                let y = apply_with_plan(&plan, m, &x)?;
                let g = Signal::new(
                    y.samples()
                        .iter()
                        .zip(ws)
                        .map(|(v, wt)| {
                            duality_map(&v.0, q_cod, p - 1.0).scale(Complex64::new(*wt, 0.0))
                        })
                        .collect(),
                    m.codomain().clone(),
                    period,
                )?;
                let z = apply_with_plan(&plan, &adjoint, &g)?;
                let next: Vec<ElementValue> = z
                    .samples()
                    .iter()
                    .zip(ws)
                    .map(|(v, wt)| {
                        duality_map(
                            &v.scale(Complex64::new(1.0 / wt, 0.0)).0,
                            q_dom_dual,
                            p_dual - 1.0,
                        )
                    })
                    .collect();
                let next = Signal::new(next, domain.clone(), period)?;
                let sup = next.sup_norm();
                if !(sup > 0.0) || !sup.is_finite() {
                    break;
                }
                x = next.scale(Complex64::new(1.0 / sup, 0.0));
                let r = evaluate(&x)?;
                offer(x.clone(), r, &mut best_ratio, &mut best_probe);
            }
        }
    }

    let Some(mut current) = best_probe.clone() else {
        return Err(Error::Empty("nonzero probes"));
    };
    let mut step = 0.5;
    for _ in 0..probes {
        let scale = current.sup_norm().max(f64::MIN_POSITIVE) * step;
        let noise = Signal::random_gaussian(n, domain.clone(), period, &mut rng)?
            .scale(Complex64::new(scale, 0.0));
        let cand = current.add(&noise)?;
        let r = evaluate(&cand)?;
        if r.is_some_and(|r| r > best_ratio) {
            current = cand.clone();
            offer(cand, r, &mut best_ratio, &mut best_probe);
            step = (step * 1.5).min(2.0);
        } else {
            step = (step * 0.7).max(1e-6);
        }
    }

    Ok(MultiplierNormEstimate {
        ratio: best_ratio,
        best_probe: best_probe.expect("a probe was accepted"),
        probes_evaluated: evaluated,
    })
}
