//! The numbered acceptance criteria. `selftest` runs 1–8; the acceptance
//! test target runs all of them.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varmult_core::multiplier::{
    dft, dyadic_partition, estimate_multiplier_norm, frequency_projection, idft, Signal, Symbol,
};
use varmult_core::randomized::{
    rademacher_mean, rademacher_mean_sampled, rbound_lower, EstimateMethod, RBoundBudget,
    SampleBudget, SignKind,
};
use varmult_core::spaces::{
    singular_values, ElementValue, Exponent, NormedSpace, OperatorValue, SpaceDescriptor,
};
use varmult_core::variation::{vs_seminorm, SampledPath};
use varmult_core::weights::{ap_constant, WeightFamily, WeightGrid};
use varmult_core::{derive_seed, Complex64};

use crate::config::ExperimentConfig;
use crate::experiments::prepare;
use crate::oracles::rademacher_exact;
use crate::output::Outcome;
use crate::LabError;

/// Seed shared by every criterion.
pub const SEED: u64 = 0x5eed_1ab0;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{mark}] criterion {:>2} {}: {} ({:.2} s)",
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    run: fn() -> Result<(bool, String), LabError>,
    /// Wall-clock budget, when the criterion states one.
    limit: Option<Duration>,
}

impl Criterion {
    pub fn run(&self) -> CriterionReport {
        let start = Instant::now();
        let result = (self.run)();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(limit) = self.limit {
            if elapsed > limit {
                passed = false;
                detail.push_str(&format!(
                    "; exceeded the {:.0} s budget",
                    limit.as_secs_f64()
                ));
            }
        }
        CriterionReport {
            id: self.id,
            name: self.name,
            passed,
            detail,
            elapsed,
        }
    }
}

pub static CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "resolvent jumps",
        run: criterion_1,
        limit: Some(Duration::from_secs(1)),
    },
    Criterion {
        id: 2,
        name: "variation dynamic program",
        run: criterion_2,
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 3,
        name: "variation closed forms",
        run: criterion_3,
        limit: None,
    },
    Criterion {
        id: 4,
        name: "embedding suite",
        run: criterion_4,
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 5,
        name: "multiplier algebra",
        run: criterion_5,
        limit: None,
    },
    Criterion {
        id: 6,
        name: "Carleson oracle",
        run: criterion_6,
        limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 7,
        name: "weight suite",
        run: criterion_7,
        limit: None,
    },
    Criterion {
        id: 8,
        name: "Rademacher suite",
        run: criterion_8,
        limit: None,
    },
    Criterion {
        id: 9,
        name: "boundedness trends",
        run: criterion_9,
        limit: None,
    },
];

/// Criteria run by `varmult-lab selftest`.
pub fn selftest_criteria() -> impl Iterator<Item = &'static Criterion> {
    CRITERIA.iter().filter(|c| c.id <= 8)
}

fn run_experiment(text: &str) -> Result<Outcome, LabError> {
    let cfg = ExperimentConfig::parse(text, Some(SEED))?;
    Ok(prepare(&cfg)?()?)
}

fn describe(outcome: &Outcome) -> String {
    outcome
        .checks
        .iter()
        .map(|c| format!("{} [{}]", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Folds named sub-checks into one verdict.
struct Verdict {
    passed: bool,
    parts: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            parts: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.parts.push(if ok {
            detail
        } else {
            format!("FAILED {detail}")
        });
    }

    fn experiment(&mut self, outcome: &Outcome) {
        self.check(outcome.passed(), describe(outcome));
    }

    fn finish(self) -> Result<(bool, String), LabError> {
        Ok((self.passed, self.parts.join("; ")))
    }
}

fn criterion_1() -> Result<(bool, String), LabError> {
    let outcome = run_experiment("experiment = example_1_4\nn_dims = 20\n")?;
    Ok((outcome.passed(), describe(&outcome)))
}

fn criterion_2() -> Result<(bool, String), LabError> {
    let outcome = run_experiment(
        "experiment = vs_oracle\ngrid_sizes = 1,2,3,4,5,6,7,8,9,10,11,12,13\ns = 1, 1.5, 2, 3\n\
         space = scalar, sequence:2:3\ntrials = 1000\n",
    )?;
    let mut v = Verdict::new();
    v.experiment(&outcome);
    v.parts.extend(outcome.notes.iter().cloned());
    v.finish()
}

fn scalar_path(values: &[f64]) -> SampledPath {
    SampledPath::uniform(
        values
            .iter()
            .map(|x| ElementValue::from_real(&[*x]))
            .collect(),
        SpaceDescriptor::Scalar,
    )
    .expect("nonempty path")
}

fn criterion_3() -> Result<(bool, String), LabError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 3));
    let ss = [1.0, 1.5, 2.0, 2.5, 3.0, 7.0];
    let (mut mono_err, mut jump_err, mut const_max) = (0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..300 {
        let s = ss[trial % ss.len()];
        let n = rng.random_range(1..=20);
        let mut values: Vec<f64> = vec![rng.random_range(-1.0..1.0)];
        for _ in 0..n {
            let last = values[values.len() - 1];
            values.push(last + rng.random_range(0.0..1.0));
        }
        if trial % 2 == 1 {
            values.iter_mut().for_each(|x| *x = -*x);
        }
        let expected = (values[n] - values[0]).abs();
        mono_err = mono_err.max((vs_seminorm(&scalar_path(&values), s)? - expected).abs());

        let (a, b, c) = (
            rng.random_range(1..5),
            rng.random_range(1..5),
            rng.random_range(1..5),
        );
        let ind: Vec<f64> = std::iter::repeat_n(0.0, a)
            .chain(std::iter::repeat_n(1.0, b))
            .chain(std::iter::repeat_n(0.0, c))
            .collect();
        jump_err = jump_err.max((vs_seminorm(&scalar_path(&ind), s)? - 2f64.powf(1.0 / s)).abs());

        let level = rng.random_range(-5.0..5.0);
        let constant = vec![level; n + 1];
        const_max = const_max.max(vs_seminorm(&scalar_path(&constant), s)?);
    }
    let mut v = Verdict::new();
    v.check(
        mono_err <= 1e-12,
        format!("monotone paths max error {mono_err:.2e}"),
    );
    v.check(
        jump_err <= 1e-12,
        format!("two-jump indicators max error {jump_err:.2e}"),
    );
    v.check(
        const_max == 0.0,
        format!("constant paths max value {const_max:.2e}"),
    );
    v.finish()
}

fn criterion_4() -> Result<(bool, String), LabError> {
    let mut v = Verdict::new();
    v.experiment(&run_experiment(
        "experiment = embedding_chain\ntrials = 500\n",
    )?);
    v.experiment(&run_experiment(
        "experiment = difference_norm\ntrials = 500\n",
    )?);
    v.finish()
}

fn criterion_5() -> Result<(bool, String), LabError> {
    let mut v = Verdict::new();
    let space = SpaceDescriptor::sequence(Exponent::Finite(2.0), 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 5));
    let (mut round_trip, mut orth) = (0.0_f64, 0.0_f64);
    for n in [64, 1024, 4096] {
        let f = Signal::random_gaussian(n, space.clone(), 1.0, &mut rng)?;
        round_trip = round_trip.max(idft(&dft(&f)?)?.sup_distance(&f)?);
        let blocks = dyadic_partition(n)?;
        let parts = blocks
            .iter()
            .map(|b| frequency_projection(b, &f))
            .collect::<Result<Vec<_>, _>>()?;
        let zero = Signal::zeros(n, space.clone(), 1.0)?;
        for (i, bi) in blocks.iter().enumerate() {
            for (j, part) in parts.iter().enumerate() {
                if i != j {
                    orth = orth.max(frequency_projection(bi, part)?.sup_distance(&zero)?);
                }
            }
        }
    }
    v.check(
        round_trip <= 1e-10,
        format!("DFT round trip {round_trip:.2e}"),
    );
    v.experiment(&run_experiment(
        "experiment = littlewood_paley\ngrid_sizes = 64, 1024, 4096\n",
    )?);
    v.check(
        orth <= 1e-10,
        format!("projection orthogonality {orth:.2e}"),
    );

    let h = SpaceDescriptor::sequence(Exponent::Finite(2.0), 3)?;
    let mut worst = 0.0_f64;
    for trial in 0..5 {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 50 + trial));
        let entries = (0..n)
            .map(|_| {
                let m = varmult_core::spaces::OperatorValue::identity(&h);
                let rand = m
                    .matrix()
                    .map(|_| ElementValue::random_gaussian(1, &mut rng).0[0]);
                OperatorValue::new(rand, h.clone(), h.clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sigma = entries
            .iter()
            .map(|e| singular_values(e.matrix())[0])
            .fold(0.0_f64, f64::max);
        let m = Symbol::new(entries, h.clone(), h.clone())?;
        let w = WeightFamily::Unit.build(n)?;
        let est =
            estimate_multiplier_norm(&m, Exponent::Finite(2.0), &w, 4, derive_seed(SEED, trial))?;
        worst = worst.max((est.ratio - sigma).abs());
    }
    v.check(
        worst <= 1e-9,
        format!("Plancherel multiplier norm vs max singular value {worst:.2e}"),
    );
    v.finish()
}

fn criterion_6() -> Result<(bool, String), LabError> {
    let outcome = run_experiment(
        "experiment = carleson_oracle\ngrid_sizes = 2, 4, 8\nq = 1, 2, 3\nspace = scalar, sequence:2:2\ntrials = 200\n",
    )?;
    let mut v = Verdict::new();
    v.experiment(&outcome);
    v.parts.extend(outcome.notes.iter().cloned());
    v.finish()
}

fn criterion_7() -> Result<(bool, String), LabError> {
    let mut v = Verdict::new();
    let ps = [1.1, 1.5, 2.0, 3.0, 4.0, 10.0];
    let mut unit_exact = true;
    for n in [16, 256] {
        let w = WeightGrid::constant(n, 1.0, 1.0 / n as f64)?;
        for p in ps {
            unit_exact &= ap_constant(&w, p)? == 1.0;
        }
    }
    v.check(unit_exact, "A_p(1) = 1 exactly".into());

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 7));
    let ladder = [1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0];
    let mut worst_rise = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-2.0_f64..2.0).exp())
            .collect();
        let w = WeightGrid::new(samples, 1.0 / n as f64)?;
        let values = ladder
            .iter()
            .map(|&p| ap_constant(&w, p))
            .collect::<Result<Vec<_>, _>>()?;
        for pair in values.windows(2) {
            worst_rise = worst_rise.max(pair[1] - pair[0]);
        }
    }
    v.check(
        worst_rise <= 1e-10,
        format!("100 random weights: largest rise in p {worst_rise:.2e}"),
    );

    let mut worst_change = 0.0_f64;
    for a in [-0.5, 0.5] {
        for p in [2.0, 3.0] {
            let coarse = ap_constant(&WeightFamily::Power(a).build(512)?, p)?;
            let fine = ap_constant(&WeightFamily::Power(a).build(1024)?, p)?;
            worst_change = worst_change.max((fine / coarse - 1.0).abs());
        }
    }
    v.check(
        worst_change <= 0.02,
        format!(
            "power weights 512 → 1024: largest relative change {:.3}%",
            100.0 * worst_change
        ),
    );
    v.finish()
}

fn criterion_8() -> Result<(bool, String), LabError> {
    let mut v = Verdict::new();
    let h = SpaceDescriptor::sequence(Exponent::Finite(2.0), 3)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 8));
    let mut hilbert = 0.0_f64;
    let mut all_exact = true;
    for size in 1..=12 {
        let xs: Vec<ElementValue> = (0..size)
            .map(|_| ElementValue::random_gaussian(3, &mut rng))
            .collect();
        let est = rademacher_mean(&xs, &h, 2.0, &SampleBudget::default())?;
        let expected = xs.iter().map(|x| h.norm_of(x).powi(2)).sum::<f64>().sqrt();
        hilbert = hilbert.max((est.mean - expected).abs() / expected);
        all_exact &= est.method == EstimateMethod::Exact && est.stderr == 0.0;
    }
    v.check(
        hilbert <= 1e-12 && all_exact,
        format!("Hilbert moment-2 identity, exact enumeration, relative error {hilbert:.2e}"),
    );

    let l1 = SpaceDescriptor::sequence(Exponent::Finite(1.0), 3)?;
    let trials = 500;
    let mut within = 0usize;
    for trial in 0..trials {
        let size = 2 + trial % 11;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 1000 + trial as u64));
        let xs: Vec<ElementValue> = (0..size)
            .map(|_| ElementValue::random_gaussian(3, &mut rng))
            .collect();
        let exact = rademacher_exact(&xs, &l1, 1.0);
        let budget = SampleBudget {
            samples: 100_000,
            seed: derive_seed(SEED, 2000 + trial as u64),
            signs: SignKind::Rademacher,
        };
        let mc = rademacher_mean_sampled(&xs, &l1, 1.0, &budget)?;
        within += ((mc.mean - exact).abs() <= 3.0 * mc.stderr) as usize;
    }
    v.check(
        within * 100 >= 99 * trials,
        format!("Monte Carlo within 3 stderr of enumeration in {within}/{trials} trials"),
    );

    let h2 = SpaceDescriptor::sequence(Exponent::Finite(2.0), 2)?;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED, 3000 + trial));
        let ops = (0..3)
            .map(|_| {
                let m = OperatorValue::identity(&h2).matrix().map(|_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                OperatorValue::new(m, h2.clone(), h2.clone())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mid = ops[0].sum(&ops[1])?.scale(Complex64::new(0.5, 0.0));
        let mut enlarged = ops.clone();
        enlarged.push(mid);
        let budget = RBoundBudget {
            trials: 8,
            seed: derive_seed(SEED, 4000 + trial),
            ..RBoundBudget::default()
        };
        let a = rbound_lower(&ops, &budget)?.value;
        let b = rbound_lower(&enlarged, &budget)?.value;
        worst = worst.max(b / a - 1.0);
    }
    v.check(
        worst <= 1e-9,
        format!("convex hull on matched seeds: largest relative increase {worst:.2e}"),
    );
    v.finish()
}

fn criterion_9() -> Result<(bool, String), LabError> {
    let mut v = Verdict::new();
    let a = run_experiment(
        "experiment = multiplier_norm_vs_vsnorm\ngrid_sizes = 256, 512, 1024, 2048\ntrials = 50\n",
    )?;
    v.experiment(&a);
    let b = run_experiment(
        "experiment = rubio_growth\np = 4\nq = 4\nweight = unit, power:0.5\ngrid_sizes = 256, 1024\ntrials = 100\n",
    )?;
    v.experiment(&b);
    let c = run_experiment("experiment = decay_condition\n")?;
    v.experiment(&c);
    v.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_sequential() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, i + 1);
        }
        assert_eq!(selftest_criteria().count(), 8);
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3] {
            let report = CRITERIA[id - 1].run();
            assert!(report.passed, "{report}");
        }
    }

    #[test]
    fn report_line_format() {
        let r = CriterionReport {
            id: 4,
            name: "demo",
            passed: false,
            detail: "x".into(),
            elapsed: Duration::from_millis(1500),
        };
        assert_eq!(r.to_string(), "[FAIL] criterion  4 demo: x (1.50 s)");
    }
}
