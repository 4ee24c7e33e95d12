use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use varmult_core::carleson::{carleson_maximal, partial_fourier, rubio_functional, IntervalFamily};
use varmult_core::multiplier::{
    apply_multiplier, dyadic_partition, estimate_multiplier_norm, frequency_projection,
    FrequencyInterval, Signal, Symbol,
};
use varmult_core::randomized::{rademacher_mean, EstimateMethod, SampleBudget};
use varmult_core::spaces::{ElementValue, Exponent, OperatorValue, SpaceDescriptor};
use varmult_core::variation::{vs_norm, vs_seminorm};
use varmult_core::weights::{ap_constant, WeightGrid};
use varmult_core::Complex64;

fn gaussian(n: usize, space: SpaceDescriptor, seed: u64) -> Signal {
    Signal::random_gaussian(n, space, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn indicator_symbol_matches_frequency_projection_and_its_variation() {
    let space = SpaceDescriptor::sequence(Exponent::Finite(3.0), 2).unwrap();
    let band = FrequencyInterval::new(-5, 9).unwrap();
    let m = Symbol::indicator(64, space.clone(), band).unwrap();
    let f = gaussian(64, space, 1);
    let a = apply_multiplier(&m, &f).unwrap();
    let b = frequency_projection(&band, &f).unwrap();
    assert!(a.sup_distance(&b).unwrap() < 1e-12);

    let path = m.full_path();
    for s in [1.0, 1.5, 2.0, 4.0] {
        let expected = 2f64.powf(1.0 / s);
        assert!((vs_seminorm(&path, s).unwrap() - expected).abs() < 1e-12);
        assert!((vs_norm(&path, Exponent::Finite(s)).unwrap() - 1.0 - expected).abs() < 1e-12);
    }
}

#[test]
fn dyadic_projections_reassemble_the_signal() {
    let space = SpaceDescriptor::Scalar;
    let f = gaussian(256, space.clone(), 2);
    let mut sum = Signal::zeros(256, space, 1.0).unwrap();
    for cell in dyadic_partition(256).unwrap() {
        sum = sum.add(&frequency_projection(&cell, &f).unwrap()).unwrap();
    }
    assert!(sum.sup_distance(&f).unwrap() < 1e-10);
}

#[test]
fn estimator_is_exact_on_scalar_multiples_of_the_identity() {
    let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 3).unwrap();
    let op = OperatorValue::scalar(Complex64::new(0.0, 2.5), &space);
    let m = Symbol::constant(128, &op).unwrap();
    let w = WeightGrid::power(128, 1.0 / 128.0, 0.5).unwrap();
    for p in [1.5, 3.0] {
        let est = estimate_multiplier_norm(&m, Exponent::Finite(p), &w, 4, 7).unwrap();
        assert!((est.ratio - 2.5).abs() < 1e-10, "p = {p}: {}", est.ratio);
    }
    assert!(ap_constant(&w, 2.0).unwrap() >= 1.0);
}

#[test]
fn carleson_and_rubio_dominate_their_pieces() {
    let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 2).unwrap();
    let f = gaussian(32, space, 3);
    let full = rubio_functional(
        &f,
        &IntervalFamily::new(vec![FrequencyInterval::full_band(32)]).unwrap(),
        Exponent::Finite(2.0),
    )
    .unwrap();
    for (a, b) in full.iter().zip(f.pointwise_norms()) {
        assert!((a - b).abs() < 1e-10);
    }
    let maximal = carleson_maximal(&f).unwrap();
    for a in [-16, -3, 0, 5, 16] {
        let cut = partial_fourier(&f, a).unwrap().pointwise_norms();
        for (m, c) in maximal.iter().zip(cut) {
            assert!(*m >= c - 1e-10);
        }
    }
}

#[test]
fn rademacher_average_of_an_orthonormal_family() {
    let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 6).unwrap();
    let basis: Vec<ElementValue> = (0..6).map(|i| ElementValue::basis(6, i)).collect();
    let est = rademacher_mean(&basis, &space, 2.0, &SampleBudget::default()).unwrap();
    assert_eq!(est.method, EstimateMethod::Exact);
    assert!((est.mean - 6f64.sqrt()).abs() < 1e-12);
}
