//! Finite-dimensional Banach spaces: `ℓ^p_n`, Schatten classes `S^t_n` and
//! the scalar field, together with vector and operator norms.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest Schatten matrix side accepted.
pub const MAX_SCHATTEN_SIDE: usize = 256;

/// Convergence tolerance handed to the singular value decomposition.
pub const SVD_TOLERANCE: f64 = 1e-12;

/// An exponent in `[1, ∞]`. Infinity is a separate variant, never a float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p.is_nan() {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
                reason: "finite exponents must be finite reals; use Exponent::Infinity",
            });
        }
        if p < 1.0 {
            return Err(Error::InvalidExponent {
                name: "p",
                value: p,
                reason: "exponent must be at least 1",
            });
        }
        Ok(Exponent::Finite(p))
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn dual(self) -> Exponent {
        dual_exponent(self)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let value = if let Some((num, den)) = other.split_once('/') {
                    let num: f64 = num.trim().parse().map_err(|_| bad_exponent(s))?;
                    let den: f64 = den.trim().parse().map_err(|_| bad_exponent(s))?;
                    num / den
                } else {
                    other.parse().map_err(|_| bad_exponent(s))?
                };
                Exponent::finite(value)
            }
        }
    }
}

fn bad_exponent(_s: &str) -> Error {
    Error::InvalidExponent {
        name: "p",
        value: f64::NAN,
        reason: "not a number, a fraction or 'inf'",
    }
}

/// Hölder conjugate: `1/p + 1/p' = 1`, with `1 ↔ ∞`.
pub fn dual_exponent(p: Exponent) -> Exponent {
    match p {
        Exponent::Infinity => Exponent::Finite(1.0),
        Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
        Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
    }
}

/// `(Σ a_i^p)^{1/p}` for nonnegative `a_i`, or `max a_i` at `p = ∞`.
///
/// The sum is rescaled by the largest term so large exponents do not
/// overflow.
pub fn lp_aggregate<I>(values: I, p: Exponent) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(_) if max == 0.0 => 0.0,
        Exponent::Finite(p) if p == 1.0 => values.iter().sum(),
        Exponent::Finite(p) => {
            let sum: f64 = values.iter().map(|&a| (a / max).powf(p)).sum();
            max * sum.powf(1.0 / p)
        }
    }
}

/// `|z|` without the overflow guard of `hypot`; the grids here stay far
/// from `f64` overflow.
#[inline]
fn modulus(z: Complex64) -> f64 {
    z.norm_sqr().sqrt()
}

/// `ℓ^p` norm of a short vector of moduli without allocating for the common
/// exponents 1, 2 and ∞.
fn lp_of_moduli<I>(moduli: I, p: Exponent) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    match p {
        Exponent::Infinity => moduli.fold(0.0, f64::max),
        Exponent::Finite(p) if p == 1.0 => moduli.sum(),
        Exponent::Finite(p) if p == 2.0 => {
            let max = moduli.clone().fold(0.0, f64::max);
            if max == 0.0 || !(1e-150..=1e150).contains(&max) {
                lp_aggregate(moduli, Exponent::Finite(2.0))
            } else {
                moduli.map(|a| a * a).sum::<f64>().sqrt()
            }
        }
        p => lp_aggregate(moduli, p),
    }
}

/// A finite-dimensional normed space.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceDescriptor {
    /// The complex field with the modulus.
    Scalar,
    /// `ℓ^p_n`.
    SequenceP { p: Exponent, n: usize },
    /// `n × n` complex matrices normed by the `ℓ^t` norm of the singular
    /// values. Elements are stored row-major.
    Schatten { t: Exponent, side: usize },
}

impl SpaceDescriptor {
    pub fn sequence(p: Exponent, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange(
                "sequence space dimension must be positive".into(),
            ));
        }
        Ok(SpaceDescriptor::SequenceP { p, n })
    }

    pub fn schatten(t: Exponent, side: usize) -> Result<Self> {
        if side == 0 || side > MAX_SCHATTEN_SIDE {
            return Err(Error::OutOfRange(format!(
                "Schatten side must lie in 1..={MAX_SCHATTEN_SIDE}, got {side}"
            )));
        }
        Ok(SpaceDescriptor::Schatten { t, side })
    }

    /// Number of complex coordinates of an element.
    pub fn dimension(&self) -> usize {
        match self {
            SpaceDescriptor::Scalar => 1,
            SpaceDescriptor::SequenceP { n, .. } => *n,
            SpaceDescriptor::Schatten { side, .. } => side * side,
        }
    }

    /// Whether the norm is the Euclidean norm of the coordinate vector.
    pub fn is_euclidean(&self) -> bool {
        match self {
            SpaceDescriptor::Scalar => true,
            SpaceDescriptor::SequenceP { p, .. } | SpaceDescriptor::Schatten { t: p, .. } => {
                *p == Exponent::Finite(2.0)
            }
        }
    }

    /// The `ℓ^p` exponent when the space is a sequence space (the scalar
    /// field counts as any `ℓ^p_1`, reported as `ℓ^2_1`).
    pub fn sequence_exponent(&self) -> Option<Exponent> {
        match self {
            SpaceDescriptor::Scalar => Some(Exponent::Finite(2.0)),
            SpaceDescriptor::SequenceP { p, .. } => Some(*p),
            SpaceDescriptor::Schatten { .. } => None,
        }
    }

    pub fn check(&self, v: &ElementValue) -> Result<()> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn norm_of_coords(&self, coords: &[Complex64]) -> f64 {
        match self {
            SpaceDescriptor::Scalar => modulus(coords[0]),
            SpaceDescriptor::SequenceP { p, .. } => {
                lp_of_moduli(coords.iter().map(|z| modulus(*z)), *p)
            }
            SpaceDescriptor::Schatten { t, side } => {
                let m = DMatrix::from_row_slice(*side, *side, coords);
                lp_aggregate(singular_values(&m), *t)
            }
        }
    }

    pub fn zero(&self) -> ElementValue {
        ElementValue::zeros(self.dimension())
    }

    /// `‖a − b‖` for raw coordinate slices of matching length.
    pub(crate) fn distance_coords(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        match self {
            SpaceDescriptor::Scalar => modulus(a[0] - b[0]),
            SpaceDescriptor::SequenceP { p, .. } => {
                lp_of_moduli(a.iter().zip(b).map(|(x, y)| modulus(x - y)), *p)
            }
            SpaceDescriptor::Schatten { .. } => {
                let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                self.norm_of_coords(&diff)
            }
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceDescriptor::Scalar => write!(f, "scalar"),
            SpaceDescriptor::SequenceP { p, n } => write!(f, "sequence:{p}:{n}"),
            SpaceDescriptor::Schatten { t, side } => write!(f, "schatten:{t}:{side}"),
        }
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;

    /// Parses `scalar`, `sequence:<p>:<n>` or `schatten:<t>:<side>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let bad = || Error::OutOfRange(format!("cannot parse space descriptor '{s}'"));
        match parts.as_slice() {
            ["scalar"] => Ok(SpaceDescriptor::Scalar),
            ["sequence", p, n] => {
                SpaceDescriptor::sequence(p.parse()?, n.parse().map_err(|_| bad())?)
            }
            ["schatten", t, side] => {
                SpaceDescriptor::schatten(t.parse()?, side.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }
}

/// Singular values of a complex matrix. Diagonal matrices take the moduli
/// of their diagonal directly.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if is_diagonal(m) {
        return (0..m.nrows().min(m.ncols()))
            .map(|i| m[(i, i)].norm())
            .collect();
    }
    match m.clone().try_svd(false, false, SVD_TOLERANCE, 0) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => m.singular_values().iter().copied().collect(),
    }
}

fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != zero {
                return false;
            }
        }
    }
    true
}

/// A vector of complex coordinates; Schatten elements are flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementValue(pub Vec<Complex64>);

impl ElementValue {
    pub fn new(coords: Vec<Complex64>) -> Self {
        ElementValue(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        ElementValue(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        ElementValue(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scalar(z: Complex64) -> Self {
        ElementValue(vec![z])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        ElementValue(self.0.iter().map(|z| z * lambda).collect())
    }

    /// A vector with independent standard complex Gaussian coordinates.
    pub fn random_gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        ElementValue(
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
    }
}

impl Add for &ElementValue {
    type Output = ElementValue;
    fn add(self, rhs: &ElementValue) -> ElementValue {
        ElementValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ElementValue {
    type Output = ElementValue;
    fn sub(self, rhs: &ElementValue) -> ElementValue {
        ElementValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// `‖v‖` in the given space.
pub fn norm(space: &SpaceDescriptor, v: &ElementValue) -> Result<f64> {
    space.check(v)?;
    Ok(space.norm_of_coords(&v.0))
}

/// A space whose elements can be measured; lets variation functionals run
/// over vector-valued and operator-valued paths alike.
pub trait NormedSpace {
    type Elem: Clone + fmt::Debug;

    fn validate(&self, v: &Self::Elem) -> Result<()>;

    /// Norm of an element already validated against this space.
    fn norm_of(&self, v: &Self::Elem) -> f64;

    /// `‖a − b‖`.
    fn distance(&self, a: &Self::Elem, b: &Self::Elem) -> f64;

    fn zero_elem(&self) -> Self::Elem;
}

impl NormedSpace for SpaceDescriptor {
    type Elem = ElementValue;

    fn validate(&self, v: &ElementValue) -> Result<()> {
        self.check(v)
    }

    fn norm_of(&self, v: &ElementValue) -> f64 {
        self.norm_of_coords(&v.0)
    }

    fn distance(&self, a: &ElementValue, b: &ElementValue) -> f64 {
        self.distance_coords(&a.0, &b.0)
    }

    fn zero_elem(&self) -> ElementValue {
        self.zero()
    }
}

/// A linear map between two finite-dimensional spaces, stored as a
/// `dim(codomain) × dim(domain)` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorValue {
    matrix: DMatrix<Complex64>,
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
}

impl OperatorValue {
    pub fn new(
        matrix: DMatrix<Complex64>,
        domain: SpaceDescriptor,
        codomain: SpaceDescriptor,
    ) -> Result<Self> {
        if matrix.ncols() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dimension(),
                actual: matrix.nrows(),
            });
        }
        Ok(OperatorValue {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn identity(space: &SpaceDescriptor) -> Self {
        Self::scalar(Complex64::new(1.0, 0.0), space)
    }

    /// `λ·I` on `space`.
    pub fn scalar(lambda: Complex64, space: &SpaceDescriptor) -> Self {
        let d = space.dimension();
        OperatorValue {
            matrix: DMatrix::from_diagonal_element(d, d, lambda),
            domain: space.clone(),
            codomain: space.clone(),
        }
    }

    pub fn zero(domain: &SpaceDescriptor, codomain: &SpaceDescriptor) -> Self {
        OperatorValue {
            matrix: DMatrix::zeros(codomain.dimension(), domain.dimension()),
            domain: domain.clone(),
            codomain: codomain.clone(),
        }
    }

    pub fn diagonal(entries: &[Complex64], space: &SpaceDescriptor) -> Result<Self> {
        if entries.len() != space.dimension() {
            return Err(Error::DimensionMismatch {
                expected: space.dimension(),
                actual: entries.len(),
            });
        }
        let d = entries.len();
        let mut matrix = DMatrix::zeros(d, d);
        for (i, &z) in entries.iter().enumerate() {
            matrix[(i, i)] = z;
        }
        Ok(OperatorValue {
            matrix,
            domain: space.clone(),
            codomain: space.clone(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn domain(&self) -> &SpaceDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceDescriptor {
        &self.codomain
    }

    pub fn apply(&self, x: &ElementValue) -> Result<ElementValue> {
        self.domain.check(x)?;
        Ok(self.apply_unchecked(&x.0))
    }

    pub(crate) fn apply_unchecked(&self, x: &[Complex64]) -> ElementValue {
        let rows = self.matrix.nrows();
        let mut out = vec![Complex64::new(0.0, 0.0); rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * xj;
            }
        }
        ElementValue(out)
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        OperatorValue {
            matrix: &self.matrix * lambda,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// `self − other`, both sharing domain and codomain.
    pub fn difference(&self, other: &OperatorValue) -> Result<Self> {
        self.same_spaces(other)?;
        Ok(OperatorValue {
            matrix: &self.matrix - &other.matrix,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    pub fn sum(&self, other: &OperatorValue) -> Result<Self> {
        self.same_spaces(other)?;
        Ok(OperatorValue {
            matrix: &self.matrix + &other.matrix,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    /// The composition `self ∘ inner`.
    pub fn compose(&self, inner: &OperatorValue) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(Error::SpaceMismatch(format!(
                "cannot compose: inner codomain {} differs from outer domain {}",
                inner.codomain, self.domain
            )));
        }
        Ok(OperatorValue {
            matrix: &self.matrix * &inner.matrix,
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    fn same_spaces(&self, other: &OperatorValue) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch(format!(
                "operators act {} -> {} and {} -> {}",
                self.domain, self.codomain, other.domain, other.codomain
            )));
        }
        Ok(())
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols() && is_diagonal(&self.matrix)
    }

    /// `Some(λ)` when the operator is `λ·I` on a single space.
    pub fn as_scalar_multiple(&self) -> Option<Complex64> {
        if self.domain != self.codomain || !self.is_diagonal() {
            return None;
        }
        let first = self.matrix[(0, 0)];
        (1..self.matrix.nrows())
            .all(|i| self.matrix[(i, i)] == first)
            .then_some(first)
    }
}

impl Mul<&OperatorValue> for &OperatorValue {
    type Output = Result<OperatorValue>;
    fn mul(self, rhs: &OperatorValue) -> Result<OperatorValue> {
        self.compose(rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// Closed form only; errors when none is available.
    Exact,
    /// Random probes plus normalized ascent; always a lower bound.
    Estimate,
    /// Closed form when available, estimate otherwise.
    Auto,
}

/// Search effort for operator-norm estimation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeBudget {
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProbeBudget {
    fn default() -> Self {
        ProbeBudget {
            trials: 64,
            seed: 0x5eed_0001,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    /// True only when `value` came from a closed form.
    pub certified: bool,
    /// A unit-norm input attaining `value` (up to rounding).
    pub witness: ElementValue,
}

/// `‖T‖_{L(X,Y)}`, exact where a closed form exists, otherwise a
/// reproducible lower bound.
pub fn operator_norm(
    t: &OperatorValue,
    mode: NormMode,
    budget: &ProbeBudget,
) -> Result<OperatorNorm> {
    match mode {
        NormMode::Exact => closed_form(t).ok_or_else(|| {
            Error::NoClosedForm(format!("an operator {} -> {}", t.domain, t.codomain))
        }),
        NormMode::Estimate => Ok(estimate_norm(t, budget)),
        NormMode::Auto => Ok(closed_form(t).unwrap_or_else(|| estimate_norm(t, budget))),
    }
}

fn closed_form(t: &OperatorValue) -> Option<OperatorNorm> {
    let dom = &t.domain;
    let cod = &t.codomain;
    let d = dom.dimension();
    let certified = |value: f64, witness: ElementValue| {
        Some(OperatorNorm {
            value,
            certified: true,
            witness,
        })
    };

    if let Some(lambda) = t.as_scalar_multiple() {
        let mut w = ElementValue::basis(d, 0);
        let n = dom.norm_of(&w);
        w = w.scale(Complex64::new(1.0 / n, 0.0));
        return certified(lambda.norm(), w);
    }

    let dom_p = dom.sequence_exponent();
    let cod_p = cod.sequence_exponent();

    if dom == cod && t.is_diagonal() && dom_p.is_some() {
        let (idx, value) = (0..d)
            .map(|i| t.matrix[(i, i)].norm())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        return certified(value, ElementValue::basis(d, idx));
    }

    if dom.is_euclidean() && cod.is_euclidean() {
        let svd = t.matrix.clone().svd(false, true);
        let v_t = svd.v_t.as_ref()?;
        let (idx, &sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let witness = ElementValue((0..d).map(|j| v_t[(idx, j)].conj()).collect());
        return certified(sigma, witness);
    }

    // ℓ^1 domain: extreme points are the basis vectors.
    if dom_p == Some(Exponent::Finite(1.0)) {
        let (idx, value) = (0..d)
            .map(|j| {
                let col: Vec<Complex64> = t.matrix.column(j).iter().copied().collect();
                cod.norm_of_coords(&col)
            })
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        return certified(value, ElementValue::basis(d, idx));
    }

    // ℓ^∞ codomain over an ℓ^p domain: largest dual norm of a row.
    if let (Some(p), Some(Exponent::Infinity)) = (dom_p, cod_p) {
        let dual = dual_exponent(p);
        let (idx, value) = (0..t.matrix.nrows())
            .map(|i| lp_aggregate(t.matrix.row(i).iter().map(|z| z.norm()), dual))
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        let row: Vec<Complex64> = t.matrix.row(idx).iter().copied().collect();
        let witness = dual_direction(&row, dual);
        let n = dom.norm_of(&witness);
        let witness = if n > 0.0 {
            witness.scale(Complex64::new(1.0 / n, 0.0))
        } else {
            ElementValue::basis(d, 0)
        };
        return certified(value, witness);
    }

    None
}

/// The vector `x` with `Σ r_j x_j = ‖r‖_{q}` maximal over the `ℓ^{q'}` ball
/// (unnormalized): `x_j = conj(sgn r_j)|r_j|^{q−1}`.
fn dual_direction(r: &[Complex64], q: Exponent) -> ElementValue {
    match q {
        Exponent::Finite(q) if q == 1.0 => ElementValue(
            r.iter()
                .map(|z| {
                    let a = z.norm();
                    if a > 0.0 {
                        z.conj() / a
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect(),
        ),
        Exponent::Finite(q) => ElementValue(
            r.iter()
                .map(|z| {
                    let a = z.norm();
                    if a > 0.0 {
                        z.conj() / a * a.powf(q - 1.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect(),
        ),
        Exponent::Infinity => {
            let idx = r
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut x = ElementValue::zeros(r.len());
            let a = r[idx].norm();
            if a > 0.0 {
                x.0[idx] = r[idx].conj() / a;
            }
            x
        }
    }
}

fn ratio(t: &OperatorValue, x: &ElementValue) -> f64 {
    let nx = t.domain.norm_of(x);
    if nx == 0.0 {
        return 0.0;
    }
    t.codomain.norm_of(&t.apply_unchecked(&x.0)) / nx
}

fn normalized(space: &SpaceDescriptor, x: ElementValue) -> ElementValue {
    let n = space.norm_of(&x);
    if n > 0.0 {
        x.scale(Complex64::new(1.0 / n, 0.0))
    } else {
        x
    }
}

/// One nonlinear power step for `ℓ^p → ℓ^q` with `1 < p, q < ∞`.
fn power_step(t: &OperatorValue, x: &ElementValue, p: f64, q: f64) -> ElementValue {
    let y = t.apply_unchecked(&x.0);
    // z = dual of y in ℓ^{q'}: pairing ⟨y, z⟩ = ‖y‖_q^q
    let z: Vec<Complex64> =
        y.0.iter()
            .map(|w| {
                let a = w.norm();
                if a > 0.0 {
                    w.conj() / a * a.powf(q - 1.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
    // w = Tᵀ z, so that ⟨T x, z⟩ = ⟨x, w⟩
    let d = t.matrix.ncols();
    let mut w = vec![Complex64::new(0.0, 0.0); d];
    for (j, wj) in w.iter_mut().enumerate() {
        for (i, zi) in z.iter().enumerate() {
            *wj += t.matrix[(i, j)] * zi;
        }
    }
    let p_dual = p / (p - 1.0);
    ElementValue(
        w.iter()
            .map(|c| {
                let a = c.norm();
                if a > 0.0 {
                    c.conj() / a * a.powf(p_dual - 1.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
}

fn estimate_norm(t: &OperatorValue, budget: &ProbeBudget) -> OperatorNorm {
    let dom = &t.domain;
    let d = dom.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);

    let mut best_x = ElementValue::basis(d, 0);
    let mut best = ratio(t, &best_x);
    let consider = |x: ElementValue, best: &mut f64, best_x: &mut ElementValue| {
        let r = ratio(t, &x);
        if r > *best {
            *best = r;
            *best_x = x;
        }
    };

    for j in 1..d {
        consider(ElementValue::basis(d, j), &mut best, &mut best_x);
    }
    consider(
        ElementValue(vec![Complex64::new(1.0, 0.0); d]),
        &mut best,
        &mut best_x,
    );
    for _ in 0..budget.trials {
        consider(
            ElementValue::random_gaussian(d, &mut rng),
            &mut best,
            &mut best_x,
        );
    }

    let exponents = match (dom.sequence_exponent(), t.codomain.sequence_exponent()) {
        (Some(Exponent::Finite(p)), Some(Exponent::Finite(q))) if p > 1.0 && q > 1.0 => {
            Some((p, q))
        }
        _ => None,
    };

    best_x = normalized(dom, best_x);
    let mut step = 0.5;
    for _ in 0..budget.trials.max(8) {
        if let Some((p, q)) = exponents {
            let cand = normalized(dom, power_step(t, &best_x, p, q));
            let r = ratio(t, &cand);
            if r > best {
                best = r;
                best_x = cand;
            }
        }
        let noise = ElementValue::random_gaussian(d, &mut rng)
            .scale(Complex64::new(step / (d as f64).sqrt(), 0.0));
        let cand = normalized(dom, &best_x + &noise);
        let r = ratio(t, &cand);
        if r > best {
            best = r;
            best_x = cand;
            step = (step * 1.5).min(2.0);
        } else {
            step = (step * 0.7).max(1e-6);
        }
    }

    OperatorNorm {
        value: best,
        certified: false,
        witness: best_x,
    }
}

/// `L(X, Y)` under the operator norm, so operator-valued paths can be fed
/// to the variation functionals.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpace {
    pub domain: SpaceDescriptor,
    pub codomain: SpaceDescriptor,
    pub budget: ProbeBudget,
}

impl OperatorSpace {
    pub fn new(domain: SpaceDescriptor, codomain: SpaceDescriptor) -> Self {
        OperatorSpace {
            domain,
            codomain,
            budget: ProbeBudget::default(),
        }
    }
}

impl NormedSpace for OperatorSpace {
    type Elem = OperatorValue;

    fn validate(&self, v: &OperatorValue) -> Result<()> {
        if v.domain != self.domain || v.codomain != self.codomain {
            return Err(Error::SpaceMismatch(format!(
                "expected an operator {} -> {}, got {} -> {}",
                self.domain, self.codomain, v.domain, v.codomain
            )));
        }
        Ok(())
    }

    fn norm_of(&self, v: &OperatorValue) -> f64 {
        closed_form(v)
            .unwrap_or_else(|| estimate_norm(v, &self.budget))
            .value
    }

    fn distance(&self, a: &OperatorValue, b: &OperatorValue) -> f64 {
        let diff = OperatorValue {
            matrix: &a.matrix - &b.matrix,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        };
        self.norm_of(&diff)
    }

    fn zero_elem(&self) -> OperatorValue {
        OperatorValue::zero(&self.domain, &self.codomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn l2(n: usize) -> SpaceDescriptor {
        SpaceDescriptor::sequence(Exponent::Finite(2.0), n).unwrap()
    }

    #[test]
    fn pythagoras() {
        let v = ElementValue::from_real(&[3.0, 4.0]);
        assert_eq!(norm(&l2(2), &v).unwrap(), 5.0);
    }

    #[test]
    fn sup_and_l1_norms() {
        let v = ElementValue::from_real(&[3.0, -4.0, 1.0]);
        let linf = SpaceDescriptor::sequence(Exponent::Infinity, 3).unwrap();
        let l1 = SpaceDescriptor::sequence(Exponent::Finite(1.0), 3).unwrap();
        assert_eq!(norm(&linf, &v).unwrap(), 4.0);
        assert_eq!(norm(&l1, &v).unwrap(), 8.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let v = ElementValue::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(
            norm(&l2(2), &v),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn schatten_of_diagonal_is_lp_of_diagonal() {
        for t in [
            Exponent::Finite(1.0),
            Exponent::Finite(1.5),
            Exponent::Finite(3.0),
            Exponent::Infinity,
        ] {
            let s = SpaceDescriptor::schatten(t, 3).unwrap();
            let diag = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)];
            let mut m = ElementValue::zeros(9);
            for i in 0..3 {
                m.0[i * 3 + i] = diag[i];
            }
            let expected = norm(
                &SpaceDescriptor::sequence(t, 3).unwrap(),
                &ElementValue(diag.to_vec()),
            )
            .unwrap();
            assert!((norm(&s, &m).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s2 = SpaceDescriptor::schatten(Exponent::Finite(2.0), 2).unwrap();
        for _ in 0..50 {
            let m = ElementValue::random_gaussian(4, &mut rng);
            let frob = m.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm(&s2, &m).unwrap() - frob).abs() < 1e-12 * frob.max(1.0));
        }
    }

    #[test]
    fn schatten_infinity_is_largest_singular_value() {
        // [[1, 1], [0, 1]] has singular values (1 ± √5)/2 in modulus: φ and 1/φ.
        let s = SpaceDescriptor::schatten(Exponent::Infinity, 2).unwrap();
        let m = ElementValue::from_real(&[1.0, 1.0, 0.0, 1.0]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((norm(&s, &m).unwrap() - phi).abs() < 1e-12);
        let s1 = SpaceDescriptor::schatten(Exponent::Finite(1.0), 2).unwrap();
        assert!((norm(&s1, &m).unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dual_exponents() {
        assert_eq!(dual_exponent(Exponent::Finite(2.0)), Exponent::Finite(2.0));
        assert_eq!(dual_exponent(Exponent::Finite(1.0)), Exponent::Infinity);
        assert_eq!(dual_exponent(Exponent::Infinity), Exponent::Finite(1.0));
        let q = dual_exponent(Exponent::Finite(4.0 / 3.0))
            .as_finite()
            .unwrap();
        assert!((q - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("3".parse::<Exponent>().unwrap(), Exponent::Finite(3.0));
        assert!(
            ("4/3".parse::<Exponent>().unwrap().as_finite().unwrap() - 4.0 / 3.0).abs() < 1e-15
        );
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert!(Exponent::finite(f64::INFINITY).is_err());
    }

    #[test]
    fn space_parsing_round_trips() {
        for s in ["scalar", "sequence:2:3", "schatten:1.5:2", "sequence:inf:4"] {
            let d: SpaceDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("schatten:2:0".parse::<SpaceDescriptor>().is_err());
        assert!("hilbert:2".parse::<SpaceDescriptor>().is_err());
    }

    #[test]
    fn identity_has_norm_one_on_every_space() {
        let spaces = [
            SpaceDescriptor::Scalar,
            l2(3),
            SpaceDescriptor::sequence(Exponent::Finite(1.3), 4).unwrap(),
            SpaceDescriptor::schatten(Exponent::Finite(3.0), 2).unwrap(),
        ];
        for s in &spaces {
            let n = operator_norm(
                &OperatorValue::identity(s),
                NormMode::Exact,
                &ProbeBudget::default(),
            )
            .unwrap();
            assert_eq!(n.value, 1.0);
            assert!(n.certified);
        }
    }

    #[test]
    fn diagonal_on_lp() {
        for p in [1.0, 1.5, 3.0] {
            let s = SpaceDescriptor::sequence(Exponent::Finite(p), 2).unwrap();
            let t = OperatorValue::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)], &s).unwrap();
            let n = operator_norm(&t, NormMode::Exact, &ProbeBudget::default()).unwrap();
            assert_eq!(n.value, 2.0);
            assert!(n.certified);
        }
    }

    #[test]
    fn exact_mode_without_closed_form_errors() {
        let x = SpaceDescriptor::sequence(Exponent::Finite(3.0), 2).unwrap();
        let y = SpaceDescriptor::sequence(Exponent::Finite(1.5), 2).unwrap();
        let m =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(-1.0, 0.0)]);
        let t = OperatorValue::new(m, x, y).unwrap();
        assert!(matches!(
            operator_norm(&t, NormMode::Exact, &ProbeBudget::default()),
            Err(Error::NoClosedForm(_))
        ));
        let est = operator_norm(&t, NormMode::Auto, &ProbeBudget::default()).unwrap();
        assert!(!est.certified);
        assert!(est.value > 0.0);
    }

    /// Dense search over the complex unit sphere of C², parametrized as
    /// (cos θ, e^{iφ} sin θ), followed by local grid refinement.
    fn sphere_search(m: &DMatrix<Complex64>) -> f64 {
        let eval = |theta: f64, phi: f64| {
            let x = [c(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phi)];
            let y0 = m[(0, 0)] * x[0] + m[(0, 1)] * x[1];
            let y1 = m[(1, 0)] * x[0] + m[(1, 1)] * x[1];
            (y0.norm_sqr() + y1.norm_sqr()).sqrt()
        };
        let n = 400;
        let (mut bt, mut bp, mut best) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
            for j in 0..n {
                let phi = std::f64::consts::TAU * j as f64 / n as f64;
                let v = eval(theta, phi);
                if v > best {
                    (bt, bp, best) = (theta, phi, v);
                }
            }
        }
        let mut h = std::f64::consts::TAU / n as f64;
        for _ in 0..60 {
            for i in -10..=10 {
                for j in -10..=10 {
                    let theta = bt + h * i as f64 / 10.0;
                    let phi = bp + h * j as f64 / 10.0;
                    let v = eval(theta, phi);
                    if v > best {
                        (bt, bp, best) = (theta, phi, v);
                    }
                }
            }
            h *= 0.5;
        }
        best
    }

    #[test]
    fn euclidean_norm_matches_sphere_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let entries: Vec<Complex64> = ElementValue::random_gaussian(4, &mut rng).0;
            let m = DMatrix::from_row_slice(2, 2, &entries);
            let t = OperatorValue::new(m.clone(), l2(2), l2(2)).unwrap();
            let exact = operator_norm(&t, NormMode::Exact, &ProbeBudget::default()).unwrap();
            let brute = sphere_search(&m);
            assert!(
                (exact.value - brute).abs() < 1e-6,
                "{} vs {}",
                exact.value,
                brute
            );
            // witness attains the norm
            assert!((ratio(&t, &exact.witness) - exact.value).abs() < 1e-10);
        }
    }

    #[test]
    fn estimate_never_exceeds_exact_on_hilbert_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..20 {
            let n = 2 + trial % 4;
            let entries = ElementValue::random_gaussian(n * n, &mut rng).0;
            let t =
                OperatorValue::new(DMatrix::from_row_slice(n, n, &entries), l2(n), l2(n)).unwrap();
            let budget = ProbeBudget {
                trials: 32,
                seed: trial as u64,
            };
            let exact = operator_norm(&t, NormMode::Exact, &budget).unwrap().value;
            let est = operator_norm(&t, NormMode::Estimate, &budget).unwrap();
            assert!(!est.certified);
            assert!(est.value <= exact * (1.0 + 1e-12));
            assert!(est.value >= 0.9 * exact, "{} vs {}", est.value, exact);
        }
    }

    #[test]
    fn l1_domain_closed_form_matches_estimate() {
        let x = SpaceDescriptor::sequence(Exponent::Finite(1.0), 3).unwrap();
        let y = SpaceDescriptor::sequence(Exponent::Finite(3.0), 2).unwrap();
        let m = DMatrix::from_row_slice(
            2,
            3,
            &[
                c(1.0, 0.0),
                c(0.0, 2.0),
                c(0.5, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(-3.0, 0.0),
            ],
        );
        let t = OperatorValue::new(m, x, y).unwrap();
        let exact = operator_norm(&t, NormMode::Exact, &ProbeBudget::default()).unwrap();
        let est = operator_norm(&t, NormMode::Estimate, &ProbeBudget::default()).unwrap();
        assert!(est.value <= exact.value * (1.0 + 1e-12));
        assert!((est.value - exact.value).abs() < 1e-9);
    }

    #[test]
    fn linf_codomain_closed_form() {
        let x = SpaceDescriptor::sequence(Exponent::Finite(3.0), 2).unwrap();
        let y = SpaceDescriptor::sequence(Exponent::Infinity, 2).unwrap();
        let m =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.5, 1.0), c(-1.0, 0.0)]);
        let t = OperatorValue::new(m, x, y).unwrap();
        let exact = operator_norm(&t, NormMode::Exact, &ProbeBudget::default()).unwrap();
        assert!((ratio(&t, &exact.witness) - exact.value).abs() < 1e-12);
        let est = operator_norm(
            &t,
            NormMode::Estimate,
            &ProbeBudget {
                trials: 200,
                seed: 3,
            },
        )
        .unwrap();
        assert!(est.value <= exact.value * (1.0 + 1e-12));
        assert!(est.value > 0.99 * exact.value);
    }

    fn arb_space() -> impl Strategy<Value = SpaceDescriptor> {
        prop_oneof![
            Just(SpaceDescriptor::Scalar),
            (1.0f64..6.0, 1usize..5).prop_map(|(p, n)| SpaceDescriptor::sequence(
                Exponent::Finite(p),
                n
            )
            .unwrap()),
            (1usize..5).prop_map(|n| SpaceDescriptor::sequence(Exponent::Infinity, n).unwrap()),
            (1.0f64..6.0, 1usize..4).prop_map(|(t, n)| SpaceDescriptor::schatten(
                Exponent::Finite(t),
                n
            )
            .unwrap()),
            (1usize..4).prop_map(|n| SpaceDescriptor::schatten(Exponent::Infinity, n).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn norm_is_a_norm(space in arb_space(), seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = space.dimension();
            let v = ElementValue::random_gaussian(d, &mut rng);
            let w = ElementValue::random_gaussian(d, &mut rng);
            let nv = norm(&space, &v).unwrap();
            let nw = norm(&space, &w).unwrap();
            let nsum = norm(&space, &(&v + &w)).unwrap();
            prop_assert!(nsum <= nv + nw + 1e-10);
            let lambda = c(re, im);
            let scaled = norm(&space, &v.scale(lambda)).unwrap();
            prop_assert!((scaled - lambda.norm() * nv).abs() <= 1e-10 * (1.0 + nv));
        }
    }
}
