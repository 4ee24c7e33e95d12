//! The experiment registry.
//!
//! Each experiment validates its configuration up front and returns a job;
//! running the job produces a fixed-column table, summary notes and checks.
//! Every row repeats the full parameter tuple.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varmult_core::carleson::{
    check_rubio_exponents, rubio_functional, rubio_growth_experiment, variational_carleson,
    IntervalFamily, RubioGrowthConfig,
};
use varmult_core::multiplier::{
    dyadic_partition, estimate_multiplier_norm, frequency_projection, resolvent_entry,
    resolvent_matrix, resolvent_symbol, symbol_variation_profile, FrequencyInterval,
    FrequencyScale, Signal, Symbol, ZERO_CELL,
};
use varmult_core::randomized::{
    check_range_exponents, cotype_from_rubio_experiment, rr_to_rbound_experiment,
    CotypeExperimentConfig, RBoundBudget, RangeExperimentConfig, SignKind,
};
use varmult_core::spaces::{
    lp_aggregate, operator_norm, ElementValue, Exponent, NormMode, OperatorSpace, OperatorValue,
    ProbeBudget, SpaceDescriptor,
};
use varmult_core::variation::{
    brute_force_vs, difference_seminorm, holder_seminorm, rs_atom_upper, vs_norm, vs_seminorm,
    SampledPath, StepFunction, BRUTE_FORCE_MAX_STEPS,
};
use varmult_core::weights::{ap_constant, self_improvement_sweep, WeightFamily};
use varmult_core::{derive_seed, Complex64};

use crate::config::{ConfigError, ConfigResult, ExperimentConfig};
use crate::oracles::{family_enumeration, FAMILY_ENUMERATION_MAX_GRID};
use crate::output::{Cell, Check, Outcome, Table};
use crate::LabError;

pub type Job = Box<dyn FnOnce() -> Result<Outcome, LabError> + Send>;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    /// Keys accepted on top of the common ones.
    pub keys: &'static [&'static str],
    prepare: fn(&ExperimentConfig) -> ConfigResult<Job>,
}

impl Experiment {
    /// A minimal config that selects this experiment with its defaults.
    pub fn default_config(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig::parse(
            &format!("experiment = {}\nseed = {seed}\n", self.name),
            None,
        )
        .expect("minimal config parses")
    }
}

pub static REGISTRY: &[Experiment] = &[
    Experiment {
        name: "example_1_4",
        description: "jumps of the diagonal resolvent symbol across dyadic frequencies",
        keys: &["n_dims"],
        prepare: example_1_4,
    },
    Experiment {
        name: "vs_oracle",
        description: "V^s dynamic program against subsequence enumeration",
        keys: &[],
        prepare: vs_oracle,
    },
    Experiment {
        name: "embedding_chain",
        description: "atom, step-function and Hölder bounds on V^s seminorms",
        keys: &["pieces"],
        prepare: embedding_chain,
    },
    Experiment {
        name: "difference_norm",
        description: "difference integral of step functions against h·[f]_{V^r}^r",
        keys: &["pieces", "h"],
        prepare: difference_norm,
    },
    Experiment {
        name: "ap_table",
        description: "A_p constants, monotonicity in p, refinement and self-improvement",
        keys: &["epsilons"],
        prepare: ap_table,
    },
    Experiment {
        name: "multiplier_norm_vs_vsnorm",
        description: "multiplier-norm estimate of V^s-normalized step symbols across grid sizes",
        keys: &["dim", "pieces", "probes"],
        prepare: multiplier_norm_vs_vsnorm,
    },
    Experiment {
        name: "decay_condition",
        description: "dyadic l^r(V^s) profile of the resolvent symbol against its multiplier ratio",
        keys: &["probes", "scale"],
        prepare: decay_condition,
    },
    Experiment {
        name: "rubio_growth",
        description: "weighted variational Carleson ratios across grid sizes",
        keys: &[],
        prepare: rubio_growth,
    },
    Experiment {
        name: "carleson_oracle",
        description: "variational Carleson against disjoint-family enumeration",
        keys: &[],
        prepare: carleson_oracle,
    },
    Experiment {
        name: "rbound_vs_rr",
        description: "R-bound lower estimates of step-symbol ranges against their l^r budget",
        keys: &["dim", "pieces", "rbound_trials", "moment", "signs"],
        prepare: rbound_vs_rr,
    },
    Experiment {
        name: "cotype_from_rubio",
        description: "window projections of modulated bumps and the resulting cotype ratio",
        keys: &["modes", "signs"],
        prepare: cotype_from_rubio,
    },
    Experiment {
        name: "littlewood_paley",
        description: "reconstruction from dyadic frequency projections",
        keys: &[],
        prepare: littlewood_paley,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Names and descriptions in registry order.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    REGISTRY.iter().map(|e| (e.name, e.description)).collect()
}

/// Validates `config` and returns the job that runs it.
pub fn prepare(config: &ExperimentConfig) -> ConfigResult<Job> {
    let exp = find(&config.experiment).ok_or_else(|| {
        let names: Vec<_> = REGISTRY.iter().map(|e| e.name).collect();
        ConfigError::new(
            "experiment",
            format!(
                "unknown experiment `{}`; known: {}",
                config.experiment,
                names.join(", ")
            ),
        )
    })?;
    config.check_keys(exp.keys)?;
    (exp.prepare)(config)
}

fn core_to_config(field: &str) -> impl Fn(varmult_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::new(field, e.to_string())
}

fn single_space(cfg: &ExperimentConfig, default: SpaceDescriptor) -> ConfigResult<SpaceDescriptor> {
    cfg.space_or(default)
}

fn space_list(
    cfg: &ExperimentConfig,
    default: Vec<SpaceDescriptor>,
) -> ConfigResult<Vec<SpaceDescriptor>> {
    Ok(cfg
        .list_with_parser("space", |raw| {
            raw.parse::<SpaceDescriptor>().map_err(|e| e.to_string())
        })?
        .unwrap_or(default))
}

fn seq(p: f64, n: usize) -> SpaceDescriptor {
    SpaceDescriptor::sequence(Exponent::Finite(p), n).expect("positive dimension")
}

fn positive(cfg: &ExperimentConfig, key: &str, default: usize) -> ConfigResult<usize> {
    let v = cfg.get_or(key, default)?;
    if v == 0 {
        return Err(ConfigError::new(key, "must be positive"));
    }
    Ok(v)
}

fn variation_exponents(
    cfg: &ExperimentConfig,
    key: &str,
    default: Vec<f64>,
) -> ConfigResult<Vec<f64>> {
    let list = cfg
        .exponents(key)?
        .unwrap_or_else(|| default.into_iter().map(Exponent::Finite).collect());
    list.into_iter()
        .map(|e| match e {
            Exponent::Finite(v) if v >= 1.0 => Ok(v),
            other => Err(ConfigError::new(
                key,
                format!("needs a finite exponent ≥ 1, got {other}"),
            )),
        })
        .collect()
}

fn sign_kind(cfg: &ExperimentConfig) -> ConfigResult<SignKind> {
    match cfg.raw("signs").unwrap_or("rademacher") {
        "rademacher" => Ok(SignKind::Rademacher),
        "steinhaus8" => Ok(SignKind::Steinhaus8),
        other => Err(ConfigError::new(
            "signs",
            format!("expected `rademacher` or `steinhaus8`, got `{other}`"),
        )),
    }
}

fn theta_cell(cfg: &ExperimentConfig) -> Cell {
    cfg.theta.map_or(Cell::from(""), Cell::from)
}

/// `(slope, intercept, r²)` of the least-squares line through the points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, my - slope * mx, r2)
}

fn random_path(rng: &mut ChaCha8Rng, points: usize, space: &SpaceDescriptor) -> SampledPath {
    let values = (0..points)
        .map(|_| ElementValue::random_gaussian(space.dimension(), rng))
        .collect();
    SampledPath::uniform(values, space.clone()).expect("nonempty path")
}

/// Random breakpoints and Gaussian pieces; roughly one piece in five is a gap.
pub fn random_step(rng: &mut ChaCha8Rng, pieces: usize, space: &SpaceDescriptor) -> StepFunction {
    let mut breakpoints = vec![rng.random_range(-1.0..1.0)];
    for _ in 0..pieces {
        let last = breakpoints[breakpoints.len() - 1];
        breakpoints.push(last + rng.random_range(0.05..1.0));
    }
    let values = (0..pieces)
        .map(|_| {
            if rng.random_bool(0.2) {
                space.zero()
            } else {
                ElementValue::random_gaussian(space.dimension(), rng)
            }
        })
        .collect();
    StepFunction::new(breakpoints, values, space.clone()).expect("valid step function")
}

/// A step function rescaled to unit `ℓ^s` budget.
pub fn random_atom(
    rng: &mut ChaCha8Rng,
    pieces: usize,
    space: &SpaceDescriptor,
    s: f64,
) -> StepFunction {
    loop {
        let step = random_step(rng, pieces, space);
        let budget = rs_atom_upper(&step, s).expect("valid exponent");
        if budget > 0.0 {
            let scaled = step
                .pieces()
                .iter()
                .map(|c| c.scale(Complex64::new(1.0 / budget, 0.0)))
                .collect();
            return StepFunction::new(step.breakpoints().to_vec(), scaled, space.clone())
                .expect("same breakpoints");
        }
    }
}

fn example_1_4(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let n_dims: usize = cfg.get_or("n_dims", 20)?;
    if !(1..=60).contains(&n_dims) {
        return Err(ConfigError::new(
            "n_dims",
            format!("must lie in 1..=60, got {n_dims}"),
        ));
    }
    let p = cfg.exponent_or("p", Exponent::Finite(2.0))?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let target = 0.1_f64.sqrt();
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "p",
            "n_dims",
            "n",
            "xi_lo",
            "xi_hi",
            "diff_norm",
            "entry_n_diff",
        ]);
        let (mut min_norm, mut worst_entry) = (f64::INFINITY, 0.0_f64);
        for n in 1..=n_dims {
            let lo = (n as f64).exp2();
            let hi = 2.0 * lo;
            let diff =
                resolvent_matrix(n_dims, hi, p)?.difference(&resolvent_matrix(n_dims, lo, p)?)?;
            let norm = operator_norm(&diff, NormMode::Exact, &ProbeBudget::default())?.value;
            let entry = diff.matrix()[(n - 1, n - 1)].norm();
            let direct = (resolvent_entry(n as u32, hi) - resolvent_entry(n as u32, lo)).norm();
            min_norm = min_norm.min(norm);
            worst_entry = worst_entry
                .max((entry - target).abs())
                .max((direct - target).abs());
            table.push(vec![
                "example_1_4".into(),
                seed.into(),
                theta.clone(),
                p.to_string().into(),
                n_dims.into(),
                n.into(),
                lo.into(),
                hi.into(),
                norm.into(),
                entry.into(),
            ]);
        }
        Ok(Outcome {
            table,
            notes: vec![
                format!("smallest jump norm {min_norm:.16e} (1/sqrt(10) = {target:.16e})"),
                format!("largest entry deviation from 1/sqrt(10): {worst_entry:.3e}"),
            ],
            checks: vec![
                Check::new(
                    "jump lower bound",
                    min_norm >= target - 1e-9,
                    format!("min over n of ‖m(2^(n+1)) − m(2^n)‖ = {min_norm:.12}, need ≥ 1/sqrt(10) − 1e-9"),
                ),
                Check::new(
                    "entry n equals 1/sqrt(10)",
                    worst_entry <= 1e-12,
                    format!("max deviation {worst_entry:.3e}, need ≤ 1e-12"),
                ),
            ],
        })
    }))
}

fn vs_oracle(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let sizes: Vec<usize> = cfg.list_or("grid_sizes", (2..=12).collect())?;
    if let Some(bad) = sizes.iter().find(|&&n| n == 0 || n > BRUTE_FORCE_MAX_STEPS) {
        return Err(ConfigError::new(
            "grid_sizes",
            format!("path steps must lie in 1..={BRUTE_FORCE_MAX_STEPS}, got {bad}"),
        ));
    }
    let ss = variation_exponents(cfg, "s", vec![1.0, 1.5, 2.0, 3.0])?;
    let spaces = space_list(cfg, vec![SpaceDescriptor::Scalar, seq(2.0, 3)])?;
    let trials = cfg.trials_or(1000)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "s",
            "n",
            "trial",
            "dp_value",
            "brute_value",
            "abs_diff",
            "bitwise",
            "matches",
        ]);
        let (mut matches, mut bitwise) = (0usize, 0usize);
        for trial in 0..trials {
            let n = sizes[trial % sizes.len()];
            let s = ss[(trial / sizes.len()) % ss.len()];
            let space = &spaces[(trial / (sizes.len() * ss.len())) % spaces.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let path = random_path(&mut rng, n + 1, space);
            let dp = vs_seminorm(&path, s)?;
            let brute = brute_force_vs(&path, s)?;
            let diff = (dp - brute).abs();
            let ok = diff <= 1e-12 * dp.max(1.0);
            matches += ok as usize;
            bitwise += (dp.to_bits() == brute.to_bits()) as usize;
            table.push(vec![
                "vs_oracle".into(),
                seed.into(),
                theta.clone(),
                space.to_string().into(),
                s.into(),
                n.into(),
                trial.into(),
                dp.into(),
                brute.into(),
                diff.into(),
                (dp.to_bits() == brute.to_bits()).into(),
                ok.into(),
            ]);
        }
        Ok(Outcome {
            table,
            notes: vec![
                format!("{matches}/{trials} exact matches"),
                format!("{bitwise}/{trials} bit-identical"),
            ],
            checks: vec![Check::new(
                "dynamic program equals enumeration",
                matches == trials,
                format!("{matches}/{trials} within 1e-12"),
            )],
        })
    }))
}

fn embedding_chain(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let s = cfg.finite_or("s", 2.0)?;
    let t = cfg.finite_or("t", 3.0)?;
    if s < 1.0 || t < 1.0 {
        return Err(ConfigError::new(
            "s",
            format!("s and t must be ≥ 1, got s = {s}, t = {t}"),
        ));
    }
    let space = single_space(cfg, seq(2.0, 3))?;
    let pieces = positive(cfg, "pieces", 6)?;
    let trials = cfg.trials_or(500)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "s",
            "t",
            "pieces",
            "trial",
            "kind",
            "vs_seminorm",
            "rs_atom_upper_s",
            "rs_atom_upper_t",
            "vs_norm_s",
            "bound",
            "holds",
        ]);
        let mut fails = [0usize; 3];
        let mut worst = [f64::NEG_INFINITY; 3];
        let kinds = ["atom", "step", "holder"];
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let atom = random_atom(&mut rng, pieces, &space, s);
            let step = random_step(&mut rng, pieces, &space);
            let path = random_path(&mut rng, pieces + 2, &space);
            for (k, kind) in kinds.iter().enumerate() {
                let (vs, rs_s, rs_t, norm_s, bound) = match k {
                    0 | 1 => {
                        let f = if k == 0 { &atom } else { &step };
                        let p = f.to_path();
                        let vs = vs_seminorm(&p, s)?;
                        let rs_s = rs_atom_upper(f, s)?;
                        let bound = if k == 0 { 2.0 } else { 2.0 * rs_s };
                        (
                            vs,
                            rs_s,
                            rs_atom_upper(f, t)?,
                            vs_norm(&p, Exponent::Finite(s))?,
                            bound,
                        )
                    }
                    _ => {
                        let vs = vs_seminorm(&path, s)?;
                        let norm_s = vs_norm(&path, Exponent::Finite(s))?;
                        let bound = path.sup_norm()
                            + path.duration().powf(1.0 / s) * holder_seminorm(&path, 1.0 / s)?;
                        (vs, f64::NAN, f64::NAN, norm_s, bound)
                    }
                };
                let lhs = if k == 2 { norm_s } else { vs };
                let holds = lhs <= bound + 1e-10;
                fails[k] += !holds as usize;
                worst[k] = worst[k].max(lhs - bound);
                table.push(vec![
                    "embedding_chain".into(),
                    seed.into(),
                    theta.clone(),
                    space.to_string().into(),
                    s.into(),
                    t.into(),
                    pieces.into(),
                    trial.into(),
                    (*kind).into(),
                    vs.into(),
                    rs_s.into(),
                    rs_t.into(),
                    norm_s.into(),
                    bound.into(),
                    holds.into(),
                ]);
            }
        }
        let names = [
            "unit atoms: [a]_V^s ≤ 2",
            "steps: [f]_V^s ≤ 2·atom budget",
            "paths: ‖f‖_V^s ≤ ‖f‖_∞ + |J|^(1/s)·[f]_C^(1/s)",
        ];
        Ok(Outcome {
            table,
            notes: (0..3)
                .map(|k| format!("{}: largest lhs − bound {:.3e}", kinds[k], worst[k]))
                .collect(),
            checks: (0..3)
                .map(|k| {
                    Check::new(
                        names[k],
                        fails[k] == 0,
                        format!("{} of {trials} violate by more than 1e-10", fails[k]),
                    )
                })
                .collect(),
        })
    }))
}

fn difference_norm(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let rs = variation_exponents(cfg, "r", vec![1.0, 2.0, 3.0])?;
    let hs: Vec<f64> = cfg.list_or("h", vec![0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0])?;
    if let Some(bad) = hs.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
        return Err(ConfigError::new(
            "h",
            format!("shifts must be positive, got {bad}"),
        ));
    }
    let space = single_space(cfg, seq(2.0, 3))?;
    let pieces = positive(cfg, "pieces", 6)?;
    let trials = cfg.trials_or(500)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "pieces",
            "trial",
            "r",
            "h",
            "difference",
            "vs_seminorm_r",
            "bound",
            "holds",
        ]);
        let (mut fails, mut count, mut worst_ratio) = (0usize, 0usize, 0.0_f64);
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let step = random_step(&mut rng, pieces, &space);
            let path = step.to_path();
            for &r in &rs {
                let vs = vs_seminorm(&path, r)?;
                for &h in &hs {
                    let d = difference_seminorm(&step, r, h)?;
                    let bound = h * vs.powf(r);
                    let holds = d <= bound + 1e-10;
                    fails += !holds as usize;
                    count += 1;
                    if bound > 0.0 {
                        worst_ratio = worst_ratio.max(d / bound);
                    }
                    table.push(vec![
                        "difference_norm".into(),
                        seed.into(),
                        theta.clone(),
                        space.to_string().into(),
                        pieces.into(),
                        trial.into(),
                        r.into(),
                        h.into(),
                        d.into(),
                        vs.into(),
                        bound.into(),
                        holds.into(),
                    ]);
                }
            }
        }
        Ok(Outcome {
            table,
            notes: vec![format!(
                "largest difference / (h·[f]_V^r^r) = {worst_ratio:.6}"
            )],
            checks: vec![Check::new(
                "difference integral ≤ h·[f]_V^r^r",
                fails == 0,
                format!("{fails} of {count} cases violate by more than 1e-10"),
            )],
        })
    }))
}

fn ap_table(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let weights = cfg.weights_or(vec![
        WeightFamily::Unit,
        WeightFamily::Power(-0.5),
        WeightFamily::Power(0.5),
        WeightFamily::Step(4.0),
    ])?;
    let mut ps = variation_exponents(cfg, "p", vec![1.5, 2.0, 3.0, 4.0])?;
    if let Some(bad) = ps.iter().find(|p| **p <= 1.0) {
        return Err(ConfigError::new("p", format!("A_p needs p > 1, got {bad}")));
    }
    ps.sort_by(f64::total_cmp);
    let sizes = cfg.grid_sizes_or(vec![256, 512, 1024])?;
    let epsilons: Vec<f64> = cfg.list_or("epsilons", vec![0.05, 0.1, 0.2])?;
    if let Some(bad) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(ConfigError::new(
            "epsilons",
            format!("must be positive, got {bad}"),
        ));
    }
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "n",
            "weight",
            "p",
            "kind",
            "epsilon",
            "ap_constant",
            "ap_lower",
            "ratio",
        ]);
        let mut notes = Vec::new();
        let (mut below_one, mut unit_off, mut nonmonotone) = (0usize, 0usize, 0usize);
        // values[(weight, p)] per grid size
        let mut values = vec![vec![Vec::new(); ps.len()]; weights.len()];
        for &n in &sizes {
            for (wi, fam) in weights.iter().enumerate() {
                let w = fam.build(n)?;
                let mut prev = f64::INFINITY;
                for (pi, &p) in ps.iter().enumerate() {
                    let a = ap_constant(&w, p)?;
                    values[wi][pi].push(a);
                    below_one += (a < 1.0) as usize;
                    if *fam == WeightFamily::Unit {
                        unit_off += (a != 1.0) as usize;
                    }
                    nonmonotone += (a > prev + 1e-10) as usize;
                    prev = a;
                    let base = |kind: &str, eps: f64, lower: f64, ratio: f64| -> Vec<Cell> {
                        vec![
                            "ap_table".into(),
                            seed.into(),
                            theta.clone(),
                            n.into(),
                            fam.to_string().into(),
                            p.into(),
                            kind.into(),
                            eps.into(),
                            a.into(),
                            lower.into(),
                            ratio.into(),
                        ]
                    };
                    table.push(base("ap", 0.0, a, 1.0));
                    let admissible: Vec<f64> =
                        epsilons.iter().copied().filter(|e| p - e > 1.0).collect();
                    for row in self_improvement_sweep(&w, p, &admissible)? {
                        table.push(base(
                            "self_improvement",
                            row.epsilon,
                            row.ap_lower,
                            row.ratio,
                        ));
                    }
                }
            }
        }
        let mut unstable = Vec::new();
        if sizes.len() >= 2 {
            let last = sizes.len() - 1;
            for (wi, fam) in weights.iter().enumerate() {
                for (pi, &p) in ps.iter().enumerate() {
                    let in_class = match fam {
                        WeightFamily::Power(a) => *a > -1.0 && *a < p - 1.0,
                        _ => true,
                    };
                    let (a0, a1) = (values[wi][pi][last - 1], values[wi][pi][last]);
                    let change = (a1 / a0 - 1.0).abs();
                    notes.push(format!(
                        "{fam} p = {p}: A_p {a0:.6} at N = {} → {a1:.6} at N = {} ({:+.3}%)",
                        sizes[last - 1],
                        sizes[last],
                        100.0 * (a1 / a0 - 1.0)
                    ));
                    if in_class && change > 0.02 {
                        unstable.push(format!("{fam} at p = {p}"));
                    }
                }
            }
        }
        Ok(Outcome {
            table,
            notes,
            checks: vec![
                Check::new(
                    "A_p ≥ 1",
                    below_one == 0,
                    format!("{below_one} values below 1"),
                ),
                Check::new(
                    "unit weight has A_p = 1",
                    unit_off == 0,
                    format!("{unit_off} values differ from 1"),
                ),
                Check::new(
                    "A_p non-increasing in p",
                    nonmonotone == 0,
                    format!("{nonmonotone} increases above 1e-10"),
                ),
                Check::new(
                    "refinement stability within 2%",
                    unstable.is_empty(),
                    if unstable.is_empty() {
                        "every weight in its A_p class is stable".to_string()
                    } else {
                        format!("unstable: {}", unstable.join("; "))
                    },
                ),
            ],
        })
    }))
}

/// Relative breakpoints on a 1/16 lattice of `(−1, 1)`, so every piece
/// covers at least `N/32` frequencies.
fn lattice_breakpoints(rng: &mut ChaCha8Rng, pieces: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (-15..16).collect();
    // partial Fisher-Yates
    for i in 0..pieces - 1 {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen = cuts[..pieces - 1].to_vec();
    chosen.sort_unstable();
    chosen
}

fn diagonal_step_symbol(
    n: usize,
    cuts: &[i64],
    diagonals: &[Vec<Complex64>],
    space: &SpaceDescriptor,
) -> varmult_core::Result<Symbol> {
    let ops = diagonals
        .iter()
        .map(|d| OperatorValue::diagonal(d, space))
        .collect::<varmult_core::Result<Vec<_>>>()?;
    let scale = (n / 32) as i64;
    Symbol::from_fn(n, space.clone(), space.clone(), |k| {
        let piece = cuts.partition_point(|&c| c * scale <= k);
        ops[piece].clone()
    })
}

fn multiplier_norm_vs_vsnorm(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let p = cfg.exponent_or("p", Exponent::Finite(3.0))?;
    let dim = positive(cfg, "dim", 3)?;
    let s = cfg.finite_or("s", 2.0)?;
    if s < 1.0 {
        return Err(ConfigError::new("s", format!("must be ≥ 1, got {s}")));
    }
    let sizes = cfg.grid_sizes_or(vec![256, 512, 1024, 2048])?;
    if let Some(bad) = sizes.iter().find(|&&n| n < 32) {
        return Err(ConfigError::new(
            "grid_sizes",
            format!("need N ≥ 32 for the breakpoint lattice, got {bad}"),
        ));
    }
    let pieces = positive(cfg, "pieces", 4)?;
    if pieces > 31 {
        return Err(ConfigError::new(
            "pieces",
            "at most 31 pieces fit the breakpoint lattice",
        ));
    }
    let probes = positive(cfg, "probes", 8)?;
    let trials = cfg.trials_or(50)?;
    let space = SpaceDescriptor::sequence(p, dim).map_err(core_to_config("dim"))?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "p",
            "s",
            "pieces",
            "probes",
            "n",
            "trial",
            "vs_norm",
            "ratio",
        ]);
        let op_space = OperatorSpace::new(space.clone(), space.clone());
        let mut maxima = vec![f64::NEG_INFINITY; sizes.len()];
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let cuts = lattice_breakpoints(&mut rng, pieces);
            let diagonals: Vec<Vec<Complex64>> = (0..pieces)
                .map(|_| ElementValue::random_gaussian(dim, &mut rng).0)
                .collect();
            let values = diagonals
                .iter()
                .map(|d| OperatorValue::diagonal(d, &space))
                .collect::<varmult_core::Result<Vec<_>>>()?;
            // repeated samples do not change V^s, so the piece values suffice
            let path = SampledPath::uniform(values, op_space.clone())?;
            let norm = vs_norm(&path, Exponent::Finite(s))?;
            let inv = Complex64::new(1.0 / norm, 0.0);
            for (si, &n) in sizes.iter().enumerate() {
                let m = diagonal_step_symbol(n, &cuts, &diagonals, &space)?.scale(inv);
                let w = WeightFamily::Unit.build(n)?;
                let est = estimate_multiplier_norm(
                    &m,
                    p,
                    &w,
                    probes,
                    derive_seed(seed, ((n as u64) << 32) | trial as u64),
                )?;
                maxima[si] = maxima[si].max(est.ratio);
                table.push(vec![
                    "multiplier_norm_vs_vsnorm".into(),
                    seed.into(),
                    theta.clone(),
                    space.to_string().into(),
                    p.to_string().into(),
                    s.into(),
                    pieces.into(),
                    probes.into(),
                    n.into(),
                    trial.into(),
                    norm.into(),
                    est.ratio.into(),
                ]);
            }
        }
        let notes = sizes
            .iter()
            .zip(&maxima)
            .map(|(n, m)| format!("N = {n}: max ratio {m:.6}"))
            .collect();
        let growth = maxima[maxima.len() - 1] / maxima[0];
        Ok(Outcome {
            table,
            notes,
            checks: vec![Check::new(
                "ratio growth ≤ 25%",
                growth <= 1.25,
                format!(
                    "max ratio {:.6} at N = {} vs {:.6} at N = {} (factor {growth:.4})",
                    maxima[maxima.len() - 1],
                    sizes[sizes.len() - 1],
                    maxima[0],
                    sizes[0]
                ),
            )],
        })
    }))
}

fn decay_condition(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let p = cfg.exponent_or("p", Exponent::Finite(3.0))?;
    let s = cfg.finite_or("s", 2.0)?;
    if s < 1.0 {
        return Err(ConfigError::new("s", format!("must be ≥ 1, got {s}")));
    }
    let r = cfg.exponent_or("r", Exponent::Finite(2.0))?;
    let Exponent::Finite(r_val) = r else {
        return Err(ConfigError::new(
            "r",
            "the divergence test needs a finite r",
        ));
    };
    let sizes = cfg.grid_sizes_or(vec![64, 128, 256, 512, 1024, 2048, 4096])?;
    if sizes.len() < 3 || sizes.iter().any(|&n| n < 8) {
        return Err(ConfigError::new(
            "grid_sizes",
            "need at least three sizes, each ≥ 8",
        ));
    }
    let probes = positive(cfg, "probes", 8)?;
    let scale = match cfg.raw("scale").unwrap_or("plain") {
        "plain" => FrequencyScale::Plain,
        "two_pi" => FrequencyScale::TwoPi,
        other => {
            return Err(ConfigError::new(
                "scale",
                format!("expected `plain` or `two_pi`, got `{other}`"),
            ))
        }
    };
    let scale_name = cfg.raw("scale").unwrap_or("plain").to_string();
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "p",
            "s",
            "r",
            "scale",
            "probes",
            "n",
            "n_dims",
            "blocks",
            "block_lo",
            "block_hi",
            "block_seminorm",
            "aggregate",
            "multiplier_ratio",
        ]);
        let (mut ks, mut powers, mut ratios, mut notes) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for &n in &sizes {
            let n_dims = n.trailing_zeros() as usize;
            let m = resolvent_symbol(n_dims, n, p, scale)?;
            let blocks: Vec<FrequencyInterval> = dyadic_partition(n)?
                .into_iter()
                .filter(|b| *b != ZERO_CELL)
                .collect();
            let profile = symbol_variation_profile(&m, &blocks, s)?;
            let aggregate = lp_aggregate(profile.iter().copied(), r);
            let w = WeightFamily::Unit.build(n)?;
            let ratio =
                estimate_multiplier_norm(&m, p, &w, probes, derive_seed(seed, n as u64))?.ratio;
            ks.push(blocks.len() as f64);
            powers.push(aggregate.powf(r_val));
            ratios.push(ratio);
            notes.push(format!(
                "N = {n}: {} blocks, aggregate {aggregate:.6}, multiplier ratio {ratio:.6}",
                blocks.len()
            ));
            for (b, v) in blocks.iter().zip(&profile) {
                table.push(vec![
                    "decay_condition".into(),
                    seed.into(),
                    theta.clone(),
                    p.to_string().into(),
                    s.into(),
                    r.to_string().into(),
                    scale_name.clone().into(),
                    probes.into(),
                    n.into(),
                    n_dims.into(),
                    blocks.len().into(),
                    b.lo().into(),
                    b.hi().into(),
                    (*v).into(),
                    aggregate.into(),
                    ratio.into(),
                ]);
            }
        }
        let (slope, _, r2) = linear_fit(&ks, &powers);
        let spread = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            / ratios.iter().copied().fold(f64::INFINITY, f64::min);
        notes.push(format!(
            "aggregate^r against block count: slope {slope:.6}, r² {r2:.6}"
        ));
        Ok(Outcome {
            table,
            notes,
            checks: vec![
                Check::new(
                    "profile diverges linearly in block count",
                    slope > 0.0 && r2 >= 0.95,
                    format!("slope {slope:.6}, r² {r2:.6}; need slope > 0 and r² ≥ 0.95"),
                ),
                Check::new(
                    "multiplier ratio stays flat",
                    spread <= 1.25,
                    format!("max/min ratio {spread:.6}, need ≤ 1.25"),
                ),
            ],
        })
    }))
}

fn rubio_growth(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let space = single_space(cfg, SpaceDescriptor::Scalar)?;
    let p = cfg.finite_or("p", 4.0)?;
    let q = cfg.finite_or("q", 4.0)?;
    check_rubio_exponents(p, q).map_err(core_to_config("p"))?;
    let weights = cfg.weights_or(vec![WeightFamily::Unit, WeightFamily::Power(0.5)])?;
    let sizes = cfg.grid_sizes_or(vec![256, 1024])?;
    if let Some(bad) = sizes
        .iter()
        .find(|&&n| n > varmult_core::carleson::MAX_VARIATIONAL_GRID)
    {
        return Err(ConfigError::new(
            "grid_sizes",
            format!(
                "variational grids are capped at {}, got {bad}",
                varmult_core::carleson::MAX_VARIATIONAL_GRID
            ),
        ));
    }
    let trials = cfg.trials_or(100)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let result = rubio_growth_experiment(&RubioGrowthConfig {
            space: space.clone(),
            p,
            q,
            weights: weights.clone(),
            sizes: sizes.clone(),
            trials,
            seed,
        })?;
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "p",
            "q",
            "weight",
            "n",
            "trial",
            "ratio",
            "ap_constant",
        ]);
        for row in &result.rows {
            table.push(vec![
                "rubio_growth".into(),
                seed.into(),
                theta.clone(),
                space.to_string().into(),
                p.into(),
                q.into(),
                row.weight.to_string().into(),
                row.n.into(),
                row.trial.into(),
                row.ratio.into(),
                row.ap_constant.into(),
            ]);
        }
        let notes = result
            .summary
            .iter()
            .map(|s| {
                format!(
                    "N = {} weight {}: max ratio {:.6}, A_(p/q') = {:.6}",
                    s.n, s.weight, s.max_ratio, s.ap_constant
                )
            })
            .collect();
        let (first, last) = (sizes[0], sizes[sizes.len() - 1]);
        let checks = weights
            .iter()
            .map(|w| {
                let at = |n: usize| {
                    result
                        .summary
                        .iter()
                        .find(|s| s.n == n && s.weight == *w)
                        .map(|s| s.max_ratio)
                        .unwrap_or(f64::NAN)
                };
                let change = at(last) / at(first) - 1.0;
                Check::new(
                    format!("max ratio stable for weight {w}"),
                    change.abs() <= 0.2,
                    format!(
                        "{:.6} at N = {first} → {:.6} at N = {last} ({:+.2}%)",
                        at(first),
                        at(last),
                        100.0 * change
                    ),
                )
            })
            .collect();
        Ok(Outcome {
            table,
            notes,
            checks,
        })
    }))
}

/// A random family of disjoint intervals with cut endpoints.
fn random_family(rng: &mut ChaCha8Rng, n: usize) -> IntervalFamily {
    let half = (n / 2) as i64;
    let mut cuts: Vec<i64> = (-half..=half).filter(|_| rng.random_bool(0.5)).collect();
    if cuts.len() < 2 {
        cuts = vec![-half, half];
    }
    let intervals = cuts
        .windows(2)
        .filter(|_| rng.random_bool(0.7))
        .map(|w| FrequencyInterval::new(w[0], w[1]).expect("increasing cuts"))
        .collect::<Vec<_>>();
    let intervals = if intervals.is_empty() {
        vec![FrequencyInterval::new(cuts[0], cuts[1]).expect("increasing cuts")]
    } else {
        intervals
    };
    IntervalFamily::new(intervals).expect("disjoint by construction")
}

fn carleson_oracle(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let sizes = cfg.grid_sizes_or(vec![2, 4, 8])?;
    if let Some(bad) = sizes.iter().find(|&&n| n > FAMILY_ENUMERATION_MAX_GRID) {
        return Err(ConfigError::new(
            "grid_sizes",
            format!(
                "family enumeration is limited to N ≤ {FAMILY_ENUMERATION_MAX_GRID}, got {bad}"
            ),
        ));
    }
    let qs = variation_exponents(cfg, "q", vec![1.0, 2.0, 3.0])?;
    let spaces = space_list(cfg, vec![SpaceDescriptor::Scalar, seq(2.0, 2)])?;
    let trials = cfg.trials_or(200)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "n",
            "q",
            "trial",
            "max_value",
            "max_abs_diff",
            "matches",
            "chain_holds",
        ]);
        let (mut mismatches, mut chain_fails, mut cases) = (0usize, 0usize, 0usize);
        for trial in 0..trials {
            let space = &spaces[trial % spaces.len()];
            let n = sizes[(trial / spaces.len()) % sizes.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
            let f = Signal::random_gaussian(n, space.clone(), 1.0, &mut rng)?;
            let families = [
                IntervalFamily::singletons(n),
                IntervalFamily::new(dyadic_partition(n)?)?,
                random_family(&mut rng, n),
            ];
            for &q in &qs {
                let values = variational_carleson(&f, q)?;
                let (mut max_value, mut max_diff, mut ok) = (0.0_f64, 0.0_f64, true);
                for (x, &v) in values.iter().enumerate() {
                    let oracle = family_enumeration(&f, x, q);
                    let diff = (v - oracle).abs();
                    max_value = max_value.max(v);
                    max_diff = max_diff.max(diff);
                    ok &= diff <= 1e-10 * v.max(1.0);
                }
                let mut chain = true;
                for fam in &families {
                    let rubio = rubio_functional(&f, fam, Exponent::Finite(q))?;
                    chain &= rubio
                        .iter()
                        .zip(&values)
                        .all(|(a, b)| *a <= b + 1e-12 * b.max(1.0));
                }
                mismatches += !ok as usize;
                chain_fails += !chain as usize;
                cases += 1;
                table.push(vec![
                    "carleson_oracle".into(),
                    seed.into(),
                    theta.clone(),
                    space.to_string().into(),
                    n.into(),
                    q.into(),
                    trial.into(),
                    max_value.into(),
                    max_diff.into(),
                    ok.into(),
                    chain.into(),
                ]);
            }
        }
        Ok(Outcome {
            table,
            notes: vec![format!(
                "{}/{cases} signal-exponent cases match enumeration",
                cases - mismatches
            )],
            checks: vec![
                Check::new(
                    "variational Carleson equals family enumeration",
                    mismatches == 0,
                    format!("{mismatches} of {cases} cases differ by more than 1e-10"),
                ),
                Check::new(
                    "Rubio functional ≤ variational Carleson",
                    chain_fails == 0,
                    format!("{chain_fails} of {cases} cases violate the pointwise bound"),
                ),
            ],
        })
    }))
}

fn rbound_vs_rr(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let t = cfg.finite_or("t", 1.5)?;
    let q = cfg.finite_or("q", 3.0)?;
    let r = cfg.exponent_or("r", Exponent::Finite(3.0))?;
    check_range_exponents(t, q, r).map_err(core_to_config("r"))?;
    if r.is_infinite() {
        return Err(ConfigError::new(
            "r",
            "the range experiment needs a finite r",
        ));
    }
    let dim = positive(cfg, "dim", 3)?;
    let pieces = positive(cfg, "pieces", 4)?;
    let trials = cfg.trials_or(20)?;
    let rb_trials = positive(cfg, "rbound_trials", 32)?;
    let moment = cfg.finite_or("moment", 2.0)?;
    if moment < 1.0 {
        return Err(ConfigError::new(
            "moment",
            format!("must be ≥ 1, got {moment}"),
        ));
    }
    let signs = sign_kind(cfg)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let rows = rr_to_rbound_experiment(&RangeExperimentConfig {
            t,
            q,
            r,
            dim,
            pieces,
            trials,
            rbound: RBoundBudget {
                trials: rb_trials,
                moment,
                seed: derive_seed(seed, u64::MAX),
                signs,
                ..RBoundBudget::default()
            },
            seed,
        })?;
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "t",
            "q",
            "r",
            "dim",
            "pieces",
            "moment",
            "signs",
            "trial",
            "rbound_lower",
            "lr_value",
            "ratio",
        ]);
        for row in &rows {
            table.push(vec![
                "rbound_vs_rr".into(),
                seed.into(),
                theta.clone(),
                t.into(),
                q.into(),
                r.to_string().into(),
                dim.into(),
                pieces.into(),
                moment.into(),
                signs.to_string().into(),
                row.trial.into(),
                row.rbound_lower.into(),
                row.lr_value.into(),
                row.ratio.into(),
            ]);
        }
        let max = rows
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let bad = rows
            .iter()
            .filter(|r| !(r.ratio.is_finite() && r.ratio > 0.0))
            .count();
        Ok(Outcome {
            table,
            notes: vec![format!(
                "baseline: max ratio {max:.6} over {} trials ({signs} signs)",
                rows.len()
            )],
            checks: vec![Check::new(
                "ratios finite and positive",
                bad == 0,
                format!("{bad} of {} ratios are not finite and positive", rows.len()),
            )],
        })
    }))
}

fn cotype_from_rubio(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let space = single_space(cfg, seq(1.0, 8))?;
    let p = cfg.finite_or("p", 2.0)?;
    let q = cfg.exponent_or("q", Exponent::Finite(2.0))?;
    let modes = positive(cfg, "modes", 4)?;
    let sizes = cfg.grid_sizes_or(vec![64])?;
    if sizes.len() != 1 {
        return Err(ConfigError::new(
            "grid_sizes",
            "expected a single grid size",
        ));
    }
    let n = sizes[0];
    if 3 * modes + 1 >= n / 2 {
        return Err(ConfigError::new(
            "modes",
            format!(
                "{modes} modes need frequencies up to {} but N = {n} ends at {}",
                3 * modes + 1,
                n / 2 - 1
            ),
        ));
    }
    let trials = cfg.trials_or(16)?;
    let signs = sign_kind(cfg)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let summary = cotype_from_rubio_experiment(&CotypeExperimentConfig {
            space: space.clone(),
            p,
            q,
            modes,
            n,
            trials,
            signs,
            seed,
        })?;
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "p",
            "q",
            "modes",
            "n",
            "signs",
            "trial",
            "recovery_error",
            "signal_norm",
            "rubio_norm",
        ]);
        for row in &summary.rows {
            table.push(vec![
                "cotype_from_rubio".into(),
                seed.into(),
                theta.clone(),
                space.to_string().into(),
                p.into(),
                q.to_string().into(),
                modes.into(),
                n.into(),
                signs.to_string().into(),
                row.trial.into(),
                row.recovery_error.into(),
                row.signal_norm.into(),
                row.rubio_norm.into(),
            ]);
        }
        let reference = &summary.cotype_ratio_reference;
        Ok(Outcome {
            table,
            notes: vec![
                format!("max recovery error {:.3e}", summary.max_recovery_error),
                format!("sampled cotype ratio {:.6}", summary.cotype_ratio_sampled),
                format!(
                    "reference cotype ratio {:.6} (Rademacher mean {:.6} ± {:.2e}, {} over {} samples, {signs} signs)",
                    summary.reference_ratio, reference.mean, reference.stderr, reference.method, reference.sample_count
                ),
            ],
            checks: vec![Check::new(
                "window projections recover each term",
                summary.max_recovery_error <= 1e-10,
                format!("max error {:.3e}, need ≤ 1e-10", summary.max_recovery_error),
            )],
        })
    }))
}

fn littlewood_paley(cfg: &ExperimentConfig) -> ConfigResult<Job> {
    let sizes = cfg.grid_sizes_or(vec![64, 1024, 4096])?;
    let space = single_space(cfg, seq(2.0, 2))?;
    let trials = cfg.trials_or(3)?;
    let (seed, theta) = (cfg.seed, theta_cell(cfg));
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "experiment",
            "seed",
            "theta",
            "space",
            "n",
            "trial",
            "blocks",
            "reconstruction_error",
            "idempotence_error",
        ]);
        let (mut worst_rec, mut worst_idem) = (0.0_f64, 0.0_f64);
        for &n in &sizes {
            let blocks = dyadic_partition(n)?;
            for trial in 0..trials {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, ((n as u64) << 32) | trial as u64));
                let f = Signal::random_gaussian(n, space.clone(), 1.0, &mut rng)?;
                let mut sum = Signal::zeros(n, space.clone(), 1.0)?;
                let mut idem = 0.0_f64;
                for b in &blocks {
                    let part = frequency_projection(b, &f)?;
                    idem = idem.max(frequency_projection(b, &part)?.sup_distance(&part)?);
                    sum = sum.add(&part)?;
                }
                let rec = sum.sup_distance(&f)?;
                worst_rec = worst_rec.max(rec);
                worst_idem = worst_idem.max(idem);
                table.push(vec![
                    "littlewood_paley".into(),
                    seed.into(),
                    theta.clone(),
                    space.to_string().into(),
                    n.into(),
                    trial.into(),
                    blocks.len().into(),
                    rec.into(),
                    idem.into(),
                ]);
            }
        }
        Ok(Outcome {
            table,
            notes: vec![
                format!("max reconstruction error {worst_rec:.3e}"),
                format!("max idempotence error {worst_idem:.3e}"),
            ],
            checks: vec![
                Check::new(
                    "dyadic reconstruction",
                    worst_rec <= 1e-10,
                    format!("max error {worst_rec:.3e}, need ≤ 1e-10"),
                ),
                Check::new(
                    "projection idempotence",
                    worst_idem <= 1e-10,
                    format!("max error {worst_idem:.3e}, need ≤ 1e-10"),
                ),
            ],
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_listed() {
        let names: Vec<_> = list_experiments().into_iter().map(|(n, _)| n).collect();
        assert!(names.contains(&"example_1_4"));
        assert_eq!(names.len(), REGISTRY.len());
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn every_default_config_validates() {
        for exp in REGISTRY {
            let cfg = exp.default_config(1);
            assert!(prepare(&cfg).is_ok(), "{} rejects its defaults", exp.name);
        }
    }

    #[test]
    fn unknown_experiment_and_keys() {
        let cfg = ExperimentConfig::parse("experiment = nope\nseed = 1\n", None).unwrap();
        assert_eq!(prepare(&cfg).err().unwrap().field, "experiment");
        let cfg =
            ExperimentConfig::parse("experiment = vs_oracle\nseed = 1\nmodes = 3\n", None).unwrap();
        assert_eq!(prepare(&cfg).err().unwrap().field, "modes");
    }

    #[test]
    fn exponent_relations_are_cited() {
        let cfg = ExperimentConfig::parse(
            "experiment = rubio_growth\nseed = 1\np = 1.2\nq = 4\n",
            None,
        )
        .unwrap();
        let err = prepare(&cfg).err().unwrap();
        assert_eq!(err.field, "p");
        assert!(err.message.contains("p > q'"), "{}", err.message);
        let cfg = ExperimentConfig::parse(
            "experiment = rbound_vs_rr\nseed = 1\nt = 1.5\nq = 3\nr = 2\n",
            None,
        )
        .unwrap();
        let err = prepare(&cfg).err().unwrap();
        assert_eq!(err.field, "r");
        assert!(err.message.contains("1/r = 1/t − 1/q"), "{}", err.message);
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        assert!(
            (slope - 2.0).abs() < 1e-12
                && (intercept - 1.0).abs() < 1e-12
                && (r2 - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn lattice_breakpoints_are_sorted_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for pieces in 1..10 {
            let cuts = lattice_breakpoints(&mut rng, pieces);
            assert_eq!(cuts.len(), pieces - 1);
            assert!(cuts.windows(2).all(|w| w[0] < w[1]));
            assert!(cuts.iter().all(|c| (-15..16).contains(c)));
        }
    }

    #[test]
    fn step_symbol_pieces_are_nonempty() {
        let space = seq(3.0, 2);
        let cuts = vec![-15, 0, 15];
        let diags: Vec<Vec<Complex64>> = (0..4)
            .map(|i| vec![Complex64::new(i as f64 + 1.0, 0.0); 2])
            .collect();
        let m = diagonal_step_symbol(32, &cuts, &diags, &space).unwrap();
        // piece boundaries at k = −15, 0, 15 on N = 32
        assert_eq!(m.at(-16).matrix()[(0, 0)].re, 1.0);
        assert_eq!(m.at(-15).matrix()[(0, 0)].re, 2.0);
        assert_eq!(m.at(-1).matrix()[(0, 0)].re, 2.0);
        assert_eq!(m.at(0).matrix()[(0, 0)].re, 3.0);
        assert_eq!(m.at(15).matrix()[(0, 0)].re, 4.0);
    }

    #[test]
    fn small_runs_pass_their_checks() {
        let configs = [
            "experiment = example_1_4\nn_dims = 10\n",
            "experiment = vs_oracle\ngrid_sizes = 12\ntrials = 20\n",
            "experiment = embedding_chain\ntrials = 10\n",
            "experiment = difference_norm\ntrials = 10\n",
            "experiment = ap_table\ngrid_sizes = 512, 1024\n",
            "experiment = carleson_oracle\ntrials = 6\n",
            "experiment = rbound_vs_rr\ntrials = 2\nrbound_trials = 4\n",
            "experiment = cotype_from_rubio\ntrials = 4\n",
            "experiment = littlewood_paley\ngrid_sizes = 64, 128\ntrials = 1\n",
        ];
        for text in configs {
            let cfg = ExperimentConfig::parse(text, Some(11)).unwrap();
            let outcome = prepare(&cfg).unwrap()().unwrap();
            assert!(outcome.passed(), "{text}: {:?}", outcome.checks);
            assert!(!outcome.table.rows().is_empty());
        }
    }

    #[test]
    fn vs_oracle_summary_counts_matches() {
        let cfg = ExperimentConfig::parse(
            "experiment = vs_oracle\ngrid_sizes = 12\ntrials = 25\n",
            Some(4),
        )
        .unwrap();
        let outcome = prepare(&cfg).unwrap()().unwrap();
        assert!(outcome.notes.contains(&"25/25 exact matches".to_string()));
    }
}
