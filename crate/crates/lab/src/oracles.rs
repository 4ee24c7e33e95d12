//! Slow, direct reference computations used to cross-check the library.

use std::f64::consts::PI;

use varmult_core::multiplier::Signal;
use varmult_core::spaces::{ElementValue, NormedSpace, SpaceDescriptor};
use varmult_core::Complex64;

/// Largest grid the family enumeration accepts.
pub const FAMILY_ENUMERATION_MAX_GRID: usize = 8;

/// Largest family the sign enumeration accepts.
pub const SIGN_ENUMERATION_MAX_TERMS: usize = 16;

/// `F(k) = Σ_t f(t) e^{−2πikt/N}` for `k ∈ [−N/2, N/2)`, by direct summation.
pub fn direct_dft(f: &Signal) -> Vec<ElementValue> {
    let n = f.len();
    let d = f.space().dimension();
    let half = (n / 2) as i64;
    (-half..half)
        .map(|k| {
            let mut acc = vec![Complex64::new(0.0, 0.0); d];
            for (t, v) in f.samples().iter().enumerate() {
                let phase =
                    Complex64::from_polar(1.0, -2.0 * PI * (k * t as i64) as f64 / n as f64);
                for (a, x) in acc.iter_mut().zip(&v.0) {
                    *a += x * phase;
                }
            }
            ElementValue::new(acc)
        })
        .collect()
}

/// `sup_𝓘 (Σ_{I∈𝓘} ‖S_I f(x)‖^q)^{1/q}` at grid point `x`, enumerating
/// every family of disjoint intervals whose endpoints are frequency cuts.
pub fn family_enumeration(f: &Signal, x: usize, q: f64) -> f64 {
    let n = f.len();
    assert!(
        n <= FAMILY_ENUMERATION_MAX_GRID,
        "family enumeration is exponential in N"
    );
    let space = f.space();
    let d = space.dimension();
    let half = (n / 2) as i64;
    let coeffs = direct_dft(f);
    // prefix[i] = Σ_{k < cut_i} F(k) e^{2πikx/N} / N, cut_i = −N/2 + i
    let mut prefix = vec![vec![Complex64::new(0.0, 0.0); d]];
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as i64 - half;
        let phase =
            Complex64::from_polar(1.0 / n as f64, 2.0 * PI * (k * x as i64) as f64 / n as f64);
        let mut next = prefix[i].clone();
        for (a, z) in next.iter_mut().zip(&c.0) {
            *a += z * phase;
        }
        prefix.push(next);
    }
    let piece = |i: usize, j: usize| -> f64 {
        let diff: Vec<Complex64> = prefix[j]
            .iter()
            .zip(&prefix[i])
            .map(|(a, b)| a - b)
            .collect();
        space.norm_of(&ElementValue::new(diff)).powf(q)
    };
    let cuts = n + 1;
    let mut best = 0.0_f64;
    let mut stack: Vec<(usize, f64)> = vec![(0, 0.0)];
    while let Some((pos, acc)) = stack.pop() {
        best = best.max(acc);
        for i in pos..cuts {
            for j in i + 1..cuts {
                stack.push((j, acc + piece(i, j)));
            }
        }
    }
    best.powf(1.0 / q)
}

/// `(2^{−n} Σ_ε ‖Σ ε_i x_i‖^m)^{1/m}` over all real sign patterns.
pub fn rademacher_exact(vectors: &[ElementValue], space: &SpaceDescriptor, moment: f64) -> f64 {
    let n = vectors.len();
    assert!(
        n <= SIGN_ENUMERATION_MAX_TERMS,
        "sign enumeration is exponential in the family size"
    );
    let d = space.dimension();
    let patterns = 1usize << n;
    let mut total = 0.0;
    for mask in 0..patterns {
        let mut acc = vec![Complex64::new(0.0, 0.0); d];
        for (i, v) in vectors.iter().enumerate() {
            let sign = if mask >> i & 1 == 0 { 1.0 } else { -1.0 };
            for (a, x) in acc.iter_mut().zip(&v.0) {
                *a += x * sign;
            }
        }
        total += space.norm_of(&ElementValue::new(acc)).powf(moment);
    }
    (total / patterns as f64).powf(1.0 / moment)
}

/// `max_j` of the best sum of `‖v_j − v_i‖^s` over increasing index chains,
/// by trying every subset of interior points.
pub fn subsequence_enumeration(values: &[ElementValue], space: &SpaceDescriptor, s: f64) -> f64 {
    let n = values.len();
    assert!(
        n <= 20,
        "subsequence enumeration is exponential in the path length"
    );
    let mut best = 0.0_f64;
    for mask in 0u32..(1u32 << n) {
        let mut prev: Option<usize> = None;
        let mut acc = 0.0;
        for j in 0..n {
            if mask >> j & 1 == 1 {
                if let Some(i) = prev {
                    acc += space.distance(&values[i], &values[j]).powf(s);
                }
                prev = Some(j);
            }
        }
        best = best.max(acc);
    }
    best.powf(1.0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use varmult_core::spaces::Exponent;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_of_constant_is_a_spike() {
        let f = Signal::from_fn(4, SpaceDescriptor::Scalar, 1.0, |_| {
            ElementValue::scalar(c(1.0, 0.0))
        })
        .unwrap();
        let coeffs = direct_dft(&f);
        // k = −2, −1, 0, 1
        assert!((coeffs[2].0[0] - c(4.0, 0.0)).norm() < 1e-12);
        for i in [0, 1, 3] {
            assert!(coeffs[i].0[0].norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_family_value() {
        // f = e_1: every family sees one unit coefficient at x, so the value is 1.
        let f = Signal::single_mode(
            8,
            SpaceDescriptor::Scalar,
            1.0,
            1,
            &ElementValue::scalar(c(1.0, 0.0)),
        )
        .unwrap();
        for x in 0..8 {
            assert!((family_enumeration(&f, x, 2.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_modes_split_into_two_intervals() {
        // f = e_0 + e_1 at x = 0: separate intervals give (1 + 1)^{1/q}, one
        // interval gives 2; the supremum is 2 at q ≥ 1.
        let one = ElementValue::scalar(c(1.0, 0.0));
        let f = Signal::single_mode(4, SpaceDescriptor::Scalar, 1.0, 0, &one)
            .unwrap()
            .add(&Signal::single_mode(4, SpaceDescriptor::Scalar, 1.0, 1, &one).unwrap())
            .unwrap();
        assert!((family_enumeration(&f, 0, 1.0) - 2.0).abs() < 1e-12);
        assert!((family_enumeration(&f, 0, 2.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rademacher_of_orthogonal_pair() {
        let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 2).unwrap();
        let v = vec![
            ElementValue::from_real(&[3.0, 0.0]),
            ElementValue::from_real(&[0.0, 4.0]),
        ];
        assert!((rademacher_exact(&v, &space, 2.0) - 5.0).abs() < 1e-12);
        assert!((rademacher_exact(&v, &space, 1.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn subsequences_of_indicator() {
        let space = SpaceDescriptor::Scalar;
        let v: Vec<_> = [0.0, 0.0, 1.0, 1.0, 0.0]
            .iter()
            .map(|x| ElementValue::from_real(&[*x]))
            .collect();
        assert!((subsequence_enumeration(&v, &space, 2.0) - 2f64.sqrt()).abs() < 1e-12);
    }
}
