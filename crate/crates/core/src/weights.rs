//! Discrete Muckenhoupt `A_p` constants and weighted Bochner norms on a
//! uniform grid.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::multiplier::Signal;
use crate::spaces::{Exponent, NormedSpace};

/// Positive samples of a weight on a uniform grid with the given spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightGrid {
    samples: Vec<f64>,
    spacing: f64,
}

impl WeightGrid {
    pub fn new(samples: Vec<f64>, spacing: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("weight samples"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidWeight(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if let Some((i, w)) = samples
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(Error::InvalidWeight(format!(
                "sample {i} is {w}; weights must be positive and finite"
            )));
        }
        Ok(WeightGrid { samples, spacing })
    }

    pub fn constant(n: usize, value: f64, spacing: f64) -> Result<Self> {
        Self::new(vec![value; n], spacing)
    }

    /// `|x|^a` at the cell midpoints `x_i = (i − n/2 + 1/2)·spacing`, a grid
    /// symmetric about the origin that never samples `x = 0`.
    pub fn power(n: usize, spacing: f64, exponent: f64) -> Result<Self> {
        let half = n as f64 / 2.0;
        let samples = (0..n)
            .map(|i| ((i as f64 - half + 0.5) * spacing).abs().powf(exponent))
            .collect();
        Self::new(samples, spacing)
    }

    /// `1` on the left half of the grid and `level` on the right half.
    pub fn step(n: usize, spacing: f64, level: f64) -> Result<Self> {
        let samples = (0..n)
            .map(|i| if i < n / 2 { 1.0 } else { level })
            .collect();
        Self::new(samples, spacing)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same weight with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|w| w * factor).collect(),
            self.spacing,
        )
    }
}

/// A named one-parameter family of weights, instantiated on any grid size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightFamily {
    /// `w ≡ 1`.
    Unit,
    /// `|x|^a` on the symmetric midpoint grid over `[−1/2, 1/2)`.
    Power(f64),
    /// Two-level step weight `1 | level`.
    Step(f64),
}

impl WeightFamily {
    /// The weight on an `n`-point grid over a unit period.
    pub fn build(&self, n: usize) -> Result<WeightGrid> {
        let spacing = 1.0 / n as f64;
        match *self {
            WeightFamily::Unit => WeightGrid::constant(n, 1.0, spacing),
            WeightFamily::Power(a) => WeightGrid::power(n, spacing, a),
            WeightFamily::Step(level) => WeightGrid::step(n, spacing, level),
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Unit => write!(f, "unit"),
            WeightFamily::Power(a) => write!(f, "power:{a}"),
            WeightFamily::Step(l) => write!(f, "step:{l}"),
        }
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    /// `unit`, `power:<a>` or `step:<level>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWeight(format!("cannot parse weight family '{s}'"));
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        match parts.as_slice() {
            ["unit"] | ["one"] | ["1"] => Ok(WeightFamily::Unit),
            ["power", a] => Ok(WeightFamily::Power(a.parse().map_err(|_| bad())?)),
            ["step", l] => {
                let l: f64 = l.parse().map_err(|_| bad())?;
                if !(l > 0.0) {
                    return Err(bad());
                }
                Ok(WeightFamily::Step(l))
            }
            _ => Err(bad()),
        }
    }
}

fn check_ap_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent {
            name: "p",
            value: p,
            reason: "A_p constants need 1 < p < ∞",
        });
    }
    Ok(())
}

/// `[w]_{A_p} = max_J (avg_J w)(avg_J w^{1−p'})^{p−1}` over all windows `J`
/// of consecutive grid cells.
///
/// `w^{1−p'}` and the product are formed in log space. Single-cell windows
/// have value exactly one, so the result is clamped below at 1.
pub fn ap_constant(w: &WeightGrid, p: f64) -> Result<f64> {
    check_ap_exponent(p)?;
    let p_dual = p / (p - 1.0);
    let dual_power: Vec<f64> = w
        .samples
        .iter()
        .map(|&x| ((1.0 - p_dual) * x.ln()).exp())
        .collect();
    let n = w.samples.len();
    let mut best_log = f64::NEG_INFINITY;
    for start in 0..n {
        let mut sum_w = 0.0;
        let mut sum_dual = 0.0;
        for end in start..n {
            sum_w += w.samples[end];
            sum_dual += dual_power[end];
            let len = (end - start + 1) as f64;
            let log_value = (sum_w / len).ln() + (p - 1.0) * (sum_dual / len).ln();
            if log_value > best_log {
                best_log = log_value;
            }
        }
    }
    Ok(best_log.exp().max(1.0))
}

/// One row of a self-improvement sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfImprovementRow {
    pub epsilon: f64,
    pub ap_lower: f64,
    /// `[w]_{A_{p−ε}} / [w]_{A_p}`.
    pub ratio: f64,
}

/// `[w]_{A_{p−ε}} / [w]_{A_p}` for each `ε` with `p − ε > 1`.
pub fn self_improvement_sweep(
    w: &WeightGrid,
    p: f64,
    epsilons: &[f64],
) -> Result<Vec<SelfImprovementRow>> {
    let base = ap_constant(w, p)?;
    epsilons
        .iter()
        .map(|&eps| {
            if !(eps >= 0.0) || p - eps <= 1.0 {
                return Err(Error::OutOfRange(format!(
                    "epsilon {eps} leaves p − ε outside (1, ∞)"
                )));
            }
            let ap_lower = ap_constant(w, p - eps)?;
            Ok(SelfImprovementRow {
                epsilon: eps,
                ap_lower,
                ratio: ap_lower / base,
            })
        })
        .collect()
}

/// `(Σ g_i^p w_i Δx)^{1/p}` for a nonnegative grid function; `p = ∞`
/// ignores the weight.
pub fn weighted_lp_norm_scalar(g: &[f64], w: &WeightGrid, p: Exponent) -> Result<f64> {
    if g.len() != w.len() {
        return Err(Error::InvalidGrid(format!(
            "function has {} samples, weight has {}",
            g.len(),
            w.len()
        )));
    }
    Ok(match p {
        Exponent::Infinity => g.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let max = g.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                return Ok(0.0);
            }
            let sum: f64 = g
                .iter()
                .zip(&w.samples)
                .map(|(&gi, &wi)| (gi / max).powf(p) * wi)
                .sum();
            max * (sum * w.spacing).powf(1.0 / p)
        }
    })
}

/// `‖f‖_{L^p(w;X)}` on matching grids.
pub fn weighted_lp_norm(f: &Signal, w: &WeightGrid, p: Exponent) -> Result<f64> {
    let spacing = f.spacing();
    if f.len() != w.len() || (spacing - w.spacing).abs() > 1e-12 * spacing {
        return Err(Error::InvalidGrid(format!(
            "signal grid ({} points, spacing {spacing}) does not match weight grid ({} points, spacing {})",
            f.len(),
            w.len(),
            w.spacing
        )));
    }
    let pointwise: Vec<f64> = f.samples().iter().map(|v| f.space().norm_of(v)).collect();
    weighted_lp_norm_scalar(&pointwise, w, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{ElementValue, SpaceDescriptor};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kahan_mean(values: impl Iterator<Item = f64>) -> f64 {
        let (mut sum, mut comp, mut count) = (0.0_f64, 0.0_f64, 0usize);
        for v in values {
            let y = v - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            count += 1;
        }
        sum / count as f64
    }

    /// Independent window enumeration with compensated averages and direct
    /// powers.
    fn ap_oracle(w: &[f64], p: f64) -> f64 {
        let p_dual = p / (p - 1.0);
        let mut best = 0.0_f64;
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                let avg_w = kahan_mean(w[i..j].iter().copied());
                let avg_d = kahan_mean(w[i..j].iter().map(|x| x.powf(1.0 - p_dual)));
                best = best.max(avg_w * avg_d.powf(p - 1.0));
            }
        }
        best
    }

    #[test]
    fn constant_weights_have_constant_one() {
        for p in [1.1, 2.0, 3.7] {
            assert_eq!(
                ap_constant(&WeightGrid::constant(64, 1.0, 0.1).unwrap(), p).unwrap(),
                1.0
            );
            let c = ap_constant(&WeightGrid::constant(64, 7.3, 0.1).unwrap(), p).unwrap();
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_inputs() {
        let w = WeightGrid::constant(4, 1.0, 1.0).unwrap();
        assert!(ap_constant(&w, 1.0).is_err());
        assert!(ap_constant(&w, 0.5).is_err());
        assert!(WeightGrid::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(WeightGrid::new(vec![1.0, f64::INFINITY], 1.0).is_err());
        assert!(WeightGrid::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn power_weight_matches_oracle() {
        for (a, p) in [(0.5, 2.0), (-0.5, 2.0), (1.5, 3.0), (-0.8, 1.5)] {
            let w = WeightGrid::power(128, 1.0 / 128.0, a).unwrap();
            let fast = ap_constant(&w, p).unwrap();
            let slow = ap_oracle(w.samples(), p);
            assert!(
                (fast - slow).abs() < 1e-10 * slow,
                "a={a} p={p}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn power_weight_stable_under_refinement() {
        let a = 0.5;
        let p = 2.0;
        let coarse = ap_constant(&WeightGrid::power(256, 1.0 / 256.0, a).unwrap(), p).unwrap();
        let fine = ap_constant(&WeightGrid::power(512, 1.0 / 512.0, a).unwrap(), p).unwrap();
        assert!(((fine - coarse) / coarse).abs() < 0.02);
    }

    #[test]
    fn step_weight_has_closed_form() {
        // the best window straddles the jump: (1+L)/2 · ((1 + L^{-1})/2) at p = 2
        let level = 9.0;
        let w = WeightGrid::step(16, 1.0, level).unwrap();
        let expected = (1.0 + level) / 2.0 * (1.0 + 1.0 / level) / 2.0;
        assert!((ap_constant(&w, 2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn self_improvement_ratios_at_least_one() {
        let w = WeightGrid::power(64, 1.0 / 64.0, 0.7).unwrap();
        let rows = self_improvement_sweep(&w, 3.0, &[0.0, 0.1, 0.5, 1.0]).unwrap();
        assert_eq!(rows[0].ratio, 1.0);
        for r in &rows {
            assert!(r.ratio >= 1.0 - 1e-12);
        }
        assert!(self_improvement_sweep(&w, 3.0, &[2.0]).is_err());
    }

    #[test]
    fn weighted_norm_of_unit_sample() {
        let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 2).unwrap();
        let mut samples = vec![space.zero(); 4];
        samples[1] = ElementValue::from_real(&[0.6, 0.8]);
        let f = Signal::new(samples, space, 4.0).unwrap();
        let w = WeightGrid::constant(4, 1.0, 1.0).unwrap();
        assert!((weighted_lp_norm(&f, &w, Exponent::Finite(2.0)).unwrap() - 1.0).abs() < 1e-15);
        let w2 = w.scaled(2.0).unwrap();
        let n1 = weighted_lp_norm(&f, &w, Exponent::Finite(3.0)).unwrap();
        let n2 = weighted_lp_norm(&f, &w2, Exponent::Finite(3.0)).unwrap();
        assert!((n2.powi(3) - 2.0 * n1.powi(3)).abs() < 1e-14);
        assert_eq!(weighted_lp_norm(&f, &w2, Exponent::Infinity).unwrap(), 1.0);
    }

    #[test]
    fn weighted_norm_grid_mismatch() {
        let f = Signal::new(
            vec![ElementValue::from_real(&[1.0]); 4],
            SpaceDescriptor::Scalar,
            4.0,
        )
        .unwrap();
        assert!(weighted_lp_norm(
            &f,
            &WeightGrid::constant(8, 1.0, 1.0).unwrap(),
            Exponent::Finite(2.0)
        )
        .is_err());
        assert!(weighted_lp_norm(
            &f,
            &WeightGrid::constant(4, 1.0, 0.5).unwrap(),
            Exponent::Finite(2.0)
        )
        .is_err());
    }

    #[test]
    fn weighted_norm_matches_resummation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = SpaceDescriptor::sequence(Exponent::Finite(3.0), 2).unwrap();
        for _ in 0..20 {
            let n = 32;
            let samples: Vec<ElementValue> = (0..n)
                .map(|_| ElementValue::random_gaussian(2, &mut rng))
                .collect();
            let f = Signal::new(samples.clone(), space.clone(), 2.0).unwrap();
            let w = WeightGrid::new(
                (0..n).map(|_| rng.random_range(0.1..10.0)).collect(),
                2.0 / n as f64,
            )
            .unwrap();
            for p in [1.0, 2.5, 4.0] {
                let direct: f64 = samples
                    .iter()
                    .zip(w.samples())
                    .map(|(v, wi)| {
                        let nv = v
                            .coords()
                            .iter()
                            .map(|z| z.norm().powi(3))
                            .sum::<f64>()
                            .cbrt();
                        nv.powf(p) * wi * w.spacing()
                    })
                    .sum::<f64>()
                    .powf(1.0 / p);
                let fast = weighted_lp_norm(&f, &w, Exponent::Finite(p)).unwrap();
                assert!((fast - direct).abs() < 1e-12 * direct);
            }
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!("unit".parse::<WeightFamily>().unwrap(), WeightFamily::Unit);
        assert_eq!(
            "power:0.5".parse::<WeightFamily>().unwrap(),
            WeightFamily::Power(0.5)
        );
        assert_eq!(
            "step:4".parse::<WeightFamily>().unwrap(),
            WeightFamily::Step(4.0)
        );
        assert!("step:-1".parse::<WeightFamily>().is_err());
        assert!("gauss".parse::<WeightFamily>().is_err());
        assert_eq!(WeightFamily::Power(0.5).to_string(), "power:0.5");
    }

    proptest! {
        #[test]
        fn ap_monotone_in_p_and_at_least_one(seed in any::<u64>(), p0 in 1.2f64..4.0, dp in 0.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = WeightGrid::new((0..24).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect(), 1.0).unwrap();
            let a0 = ap_constant(&w, p0).unwrap();
            let a1 = ap_constant(&w, p0 + dp).unwrap();
            prop_assert!(a0 >= 1.0);
            prop_assert!(a1 <= a0 + 1e-10 * a0.max(1.0));
        }
    }
}
