use std::path::PathBuf;

use extsob::ellipticity::{check_parameter_ellipticity, EllipticityConfig, Sector, SphereDensities};
use extsob::estimates::{
    estimate_sweep, find_lambda0, log_slope, solve, sweep_csv, verify_interp_inequality, verify_sandwich,
    Lambda0Config, Lambda0Criterion, SolveConfig, SweepRow, SweepSpec, TrialCorpus,
};
use extsob::interpolation::{
    verify_lemma3_param_equality, verify_prop1_equality, verify_prop2_bound, verify_prop3_direct_sum, HilbertCouple,
};
use extsob::psdo::LinearOperator;
use extsob::ro::{make_interpolation_parameter, matuszewska_indices, IndexGrids, RoFunction, DEFAULT_INDEX_MARGIN};
use extsob::spectral::{hoermander_norm, io, param_norm, SpectralField};
use extsob::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{parse_complex, ConfigError, Resolved};
use crate::report::{num, Artifact, Report};

fn d_gate_offsets() -> Vec<[f64; 2]> {
    vec![[1.0, 1.0], [0.5, 3.0], [4.0, 0.5]]
}
fn d_rs() -> Vec<f64> {
    vec![0.0, 1.0, 1e2, 1e4, 1e6, 1e8]
}
fn d_one() -> f64 {
    1.0
}
fn d_true() -> bool {
    true
}

macro_rules! default_fn {
    ($name:ident, $t:ty, $v:expr) => {
        fn $name() -> $t {
            $v
        }
    };
}
default_fn!(d_index_tol, f64, 0.05);
default_fn!(d_margin_tol, f64, 1e-6);
default_fn!(d_threshold, f64, 1e-6);
default_fn!(d_n_xi, usize, 256);
default_fn!(d_n_lambda, usize, 64);
default_fn!(d_x_density, usize, 16);
default_fn!(d_delta, f64, 1e-3);
default_fn!(d_cap, f64, 1e6);
default_fn!(d_ray_count, usize, 5);
default_fn!(d_bisect_tol, f64, 1e-3);
default_fn!(d_rel_tol, f64, 1e-3);
default_fn!(d_decades, usize, 6);
default_fn!(d_per_decade, usize, 4);
default_fn!(d_slope_tol, f64, 0.05);
default_fn!(d_solve_tol, f64, 1e-10);
default_fn!(d_random_trials, usize, 16);
default_fn!(d_trials, usize, 8);
default_fn!(d_equality_tol, f64, 1e-10);
default_fn!(d_r_ratio, f64, 2.0);
default_fn!(d_residual_floor, f64, f64::EPSILON);
default_fn!(d_bound_tol, f64, 1e-12);
default_fn!(d_samples, usize, 10_000);
default_fn!(d_r_max, f64, 1e6);
default_fn!(d_exp_max, f64, 8.0);
default_fn!(d_violation_tol, f64, 1e-12);
default_fn!(d_sandwich_radii, Vec<f64>, vec![0.0, 1e-2, 1.0, 1e2, 1e4, 1e6]);
default_fn!(d_rhs, String, "random".into());
default_fn!(d_lambda, String, "-1".into());
default_fn!(d_fields, usize, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Both constants must stay λ-uniform.
    TwoSided,
    /// Only the lower constant is expected to stay bounded.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpCheck {
    Prop1,
    Lemma3,
    Prop2,
    Prop3,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum SuiteKind {
    Indices {
        #[serde(default)]
        functions: Vec<String>,
        /// Expected `(σ₀, σ₁)` per function.
        #[serde(default)]
        expect: std::collections::BTreeMap<String, [f64; 2]>,
        #[serde(default = "d_index_tol")]
        tol: f64,
    },
    Ellipticity {
        family: String,
        sector: String,
        #[serde(default = "d_true")]
        expect_elliptic: bool,
        expect_margin: Option<f64>,
        #[serde(default = "d_margin_tol")]
        margin_tol: f64,
        #[serde(default = "d_threshold")]
        threshold: f64,
        #[serde(default = "d_n_xi")]
        n_xi: usize,
        #[serde(default = "d_n_lambda")]
        n_lambda: usize,
        #[serde(default = "d_x_density")]
        x_density: usize,
    },
    Lambda0 {
        family: String,
        sector: String,
        phi: String,
        /// `0` means invertibility only.
        #[serde(default = "d_delta")]
        delta: f64,
        /// `inf` disables the cap.
        #[serde(default = "d_cap")]
        cap: f64,
        #[serde(default = "d_ray_count")]
        ray_count: usize,
        #[serde(default = "d_bisect_tol")]
        bisect_tol: f64,
        expect: Option<f64>,
        #[serde(default = "d_rel_tol")]
        expect_rel_tol: f64,
    },
    EstimateSweep {
        family: String,
        sector: String,
        phi: String,
        #[serde(default = "d_mode")]
        mode: SweepMode,
        /// First radius; defaults to the computed `λ₀` in two-sided mode
        /// and to 1 otherwise.
        start: Option<f64>,
        #[serde(default = "d_decades")]
        decades: usize,
        #[serde(default = "d_per_decade")]
        per_decade: usize,
        #[serde(default = "d_ray_count")]
        ray_count: usize,
        #[serde(default = "d_slope_tol")]
        slope_tol: f64,
        #[serde(default = "d_solve_tol")]
        solve_tol: f64,
        #[serde(default = "d_random_trials")]
        random_trials: usize,
        #[serde(default = "d_rhs")]
        rhs: String,
        /// One-sided mode: require at least one singular point.
        #[serde(default)]
        require_singular: bool,
    },
    Interpolation {
        check: InterpCheck,
        #[serde(default)]
        functions: Vec<String>,
        /// Absolute `(s0, s1)` gates; when empty, gates are placed at
        /// `(σ₀ − margin − a, σ₁ + margin + b)` for each offset `(a, b)`.
        #[serde(default)]
        gates: Vec<[f64; 2]>,
        #[serde(default = "d_gate_offsets")]
        gate_offsets: Vec<[f64; 2]>,
        #[serde(default = "d_trials")]
        trials: usize,
        #[serde(default = "d_equality_tol")]
        tol: f64,
        #[serde(default = "d_rs")]
        rs: Vec<f64>,
        #[serde(default = "d_one")]
        theta: f64,
        /// Parameter couples: max residual over `rs` at most this multiple of the
        /// `r = 0` residual (floored at `residual_floor`).
        #[serde(default = "d_r_ratio")]
        r_ratio: f64,
        #[serde(default = "d_residual_floor")]
        residual_floor: f64,
        family: Option<String>,
        #[serde(default = "d_lambda")]
        lambda: String,
        #[serde(default = "d_bound_tol")]
        bound_tol: f64,
    },
    Inequalities {
        #[serde(default)]
        functions: Vec<String>,
        #[serde(default = "d_samples")]
        samples: usize,
        #[serde(default = "d_trials")]
        trials: usize,
        #[serde(default = "d_r_max")]
        r_max: f64,
        #[serde(default = "d_exp_max")]
        eps_max: f64,
        #[serde(default = "d_exp_max")]
        delta_max: f64,
        #[serde(default = "d_violation_tol")]
        tol: f64,
        /// Family supplying `m` and `q` for the sandwich check.
        #[serde(default = "d_family")]
        family: String,
        #[serde(default = "d_sandwich_radii")]
        sandwich_radii: Vec<f64>,
    },
    Solve {
        family: String,
        #[serde(default = "d_lambda")]
        lambda: String,
        #[serde(default = "d_rhs")]
        rhs: String,
        #[serde(default = "d_solve_tol")]
        tol: f64,
    },
    Norms {
        #[serde(default)]
        functions: Vec<String>,
        /// Fields to measure: `random`, `mode:<k1>,<k2>,…` or `file:<path>`.
        #[serde(default)]
        fields: Vec<String>,
        #[serde(default = "d_fields")]
        random_fields: usize,
        /// Optional parameter-norm arguments `(r, θ)`.
        #[serde(default)]
        param: Vec<[f64; 2]>,
    },
}

fn d_mode() -> SweepMode {
    SweepMode::TwoSided
}
fn d_family() -> String {
    "lap".into()
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteSpec {
    pub name: Option<String>,
    /// Report path relative to the output directory.
    pub output: Option<PathBuf>,
    #[serde(flatten)]
    pub kind: SuiteKind,
}

impl SuiteKind {
    pub fn label(&self) -> &'static str {
        match self {
            SuiteKind::Indices { .. } => "indices",
            SuiteKind::Ellipticity { .. } => "ellipticity",
            SuiteKind::Lambda0 { .. } => "lambda0",
            SuiteKind::EstimateSweep { .. } => "estimate_sweep",
            SuiteKind::Interpolation { .. } => "interpolation",
            SuiteKind::Inequalities { .. } => "inequalities",
            SuiteKind::Solve { .. } => "solve",
            SuiteKind::Norms { .. } => "norms",
        }
    }

    /// Resolves every name the suite refers to, without running anything.
    pub fn validate(&self, r: &Resolved) -> Result<(), ConfigError> {
        let fns = |names: &[String]| r.functions(names).map(|_| ());
        match self {
            SuiteKind::Indices { functions, expect, .. } => {
                fns(functions)?;
                fns(&expect.keys().cloned().collect::<Vec<_>>())
            }
            SuiteKind::Ellipticity { family, sector, .. } => {
                r.family(family)?;
                r.sector(sector).map(|_| ())
            }
            SuiteKind::Lambda0 { family, sector, phi, .. }
            | SuiteKind::EstimateSweep { family, sector, phi, .. } => {
                r.family(family)?;
                r.sector(sector)?;
                r.phi(phi).map(|_| ())
            }
            SuiteKind::Interpolation {
                check,
                functions,
                family,
                lambda,
                ..
            } => {
                fns(functions)?;
                if *check == InterpCheck::Prop2 {
                    let f = family
                        .as_deref()
                        .ok_or_else(|| ConfigError::Invalid("prop2 needs a `family`".into()))?;
                    r.family(f)?;
                    parse_complex(lambda)?;
                }
                Ok(())
            }
            SuiteKind::Inequalities { functions, family, .. } => {
                fns(functions)?;
                r.family(family).map(|_| ())
            }
            SuiteKind::Solve { family, lambda, rhs, .. } => {
                r.family(family)?;
                parse_complex(lambda)?;
                check_field_spec(rhs)
            }
            SuiteKind::Norms { functions, fields, .. } => {
                fns(functions)?;
                fields.iter().try_for_each(|f| check_field_spec(f))
            }
        }
    }
}

fn check_field_spec(s: &str) -> Result<(), ConfigError> {
    if s == "random" || s.starts_with("random:") || s.starts_with("file:") {
        return Ok(());
    }
    parse_mode(s).map(|_| ())
}

fn parse_mode(s: &str) -> Result<Vec<i64>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("expected random, mode:<k1>,… or file:<path>, got {s:?}"));
    let rest = s.strip_prefix("mode:").ok_or_else(bad)?;
    rest.split(',').map(|k| k.trim().parse::<i64>().map_err(|_| bad())).collect()
}

/// A field named by `random[:<seed>]`, `mode:<k1>,…` or `file:<path>`.
fn field_from_spec(s: &str, r: &Resolved) -> extsob::Result<SpectralField> {
    if let Some(p) = s.strip_prefix("file:") {
        return io::read_field_on(std::path::Path::new(p), &r.grid);
    }
    if s == "random" || s.starts_with("random:") {
        let seed = match s.strip_prefix("random:") {
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| extsob::Error::Domain(format!("bad seed in {s:?}")))?,
            None => r.seed,
        };
        return Ok(random_fields(r, seed, 1).remove(0));
    }
    let k = parse_mode(s).map_err(|e| extsob::Error::Domain(e.to_string()))?;
    SpectralField::single_mode(&r.grid, &k, Complex64::new(1.0, 0.0))
}

fn random_fields(r: &Resolved, seed: u64, count: usize) -> Vec<SpectralField> {
    TrialCorpus::random_only(&r.grid, seed, count).fields().to_vec()
}

/// Angles spanning `sector`, edges included.
fn ray_args(sector: &Sector, count: usize) -> Vec<f64> {
    if sector.is_ray() || count <= 1 {
        return vec![sector.theta_min];
    }
    (0..count)
        .map(|k| sector.theta_min + sector.width() * k as f64 / (count - 1) as f64)
        .collect()
}

/// Default gates sit `offset` outside the estimated index interval.
fn gates_for(phi: &RoFunction, gates: &[[f64; 2]], offsets: &[[f64; 2]]) -> extsob::Result<Vec<[f64; 2]>> {
    if !gates.is_empty() {
        return Ok(gates.to_vec());
    }
    let est = phi.indices()?;
    Ok(offsets
        .iter()
        .map(|[a, b]| [est.sigma0 - DEFAULT_INDEX_MARGIN - a, est.sigma1 + DEFAULT_INDEX_MARGIN + b])
        .collect())
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Outcome {
            report,
            artifacts: Vec::new(),
        }
    }
}

/// Runs one suite. Library errors become a failed report rather than an
/// abort; unresolved names were rejected by [`SuiteKind::validate`].
pub fn run_suite(spec: &SuiteSpec, r: &Resolved) -> Result<Outcome, ConfigError> {
    spec.kind.validate(r)?;
    let name = spec.name.clone().unwrap_or_else(|| spec.kind.label().to_string());
    let mut inputs = inputs_of(&spec.kind);
    inputs.insert("name".into(), json!(name));
    inputs.insert("seed".into(), json!(r.seed));
    inputs.insert("grid".into(), json!(r.grid.sizes()));
    let base = Report {
        suite: spec.kind.label().to_string(),
        inputs: Value::Object(inputs),
        values: Value::Null,
        tolerances: Value::Null,
        pass: false,
    };
    match execute(&spec.kind, r, base.clone()) {
        Ok(o) => Ok(o),
        Err(e) => Ok(Outcome::new(Report {
            values: json!({ "error": e.to_string() }),
            ..base
        })),
    }
}

fn inputs_of(kind: &SuiteKind) -> Map<String, Value> {
    // The declaration itself, minus tolerance fields which get their own block.
    let v = match kind {
        SuiteKind::Indices { functions, .. } => json!({ "functions": functions }),
        SuiteKind::Ellipticity {
            family,
            sector,
            n_xi,
            n_lambda,
            x_density,
            ..
        } => json!({ "family": family, "sector": sector, "n_xi": n_xi, "n_lambda": n_lambda, "x_density": x_density }),
        SuiteKind::Lambda0 {
            family,
            sector,
            phi,
            ray_count,
            ..
        } => json!({ "family": family, "sector": sector, "phi": phi, "ray_count": ray_count }),
        SuiteKind::EstimateSweep {
            family,
            sector,
            phi,
            mode,
            start,
            decades,
            per_decade,
            ray_count,
            random_trials,
            rhs,
            ..
        } => json!({
            "family": family, "sector": sector, "phi": phi,
            "mode": if *mode == SweepMode::TwoSided { "two_sided" } else { "one_sided" },
            "start": start, "decades": decades, "per_decade": per_decade,
            "ray_count": ray_count, "random_trials": random_trials, "rhs": rhs,
        }),
        SuiteKind::Interpolation {
            check,
            functions,
            gates,
            gate_offsets,
            trials,
            rs,
            theta,
            family,
            lambda,
            ..
        } => json!({
            "check": format!("{check:?}").to_lowercase(), "functions": functions, "gates": gates,
            "gate_offsets": gate_offsets, "trials": trials, "rs": rs, "theta": theta,
            "family": family, "lambda": lambda,
        }),
        SuiteKind::Inequalities {
            functions,
            samples,
            trials,
            r_max,
            eps_max,
            delta_max,
            family,
            sandwich_radii,
            ..
        } => json!({
            "functions": functions, "samples": samples, "trials": trials, "r_max": r_max,
            "eps_max": eps_max, "delta_max": delta_max, "family": family, "sandwich_radii": sandwich_radii,
        }),
        SuiteKind::Solve {
            family, lambda, rhs, ..
        } => json!({ "family": family, "lambda": lambda, "rhs": rhs }),
        SuiteKind::Norms {
            functions,
            fields,
            random_fields,
            param,
        } => json!({ "functions": functions, "fields": fields, "random_fields": random_fields, "param": param }),
    };
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

fn execute(kind: &SuiteKind, r: &Resolved, base: Report) -> extsob::Result<Outcome> {
    let cfg_err = |e: ConfigError| extsob::Error::Domain(e.to_string());
    match kind {
        SuiteKind::Indices { functions, expect, tol } => {
            let grids = IndexGrids::default();
            let mut rows = Vec::new();
            let mut pass = true;
            for (name, phi) in r.functions(functions).map_err(cfg_err)? {
                match matuszewska_indices(&phi, &grids) {
                    Ok(est) => {
                        let ok = expect
                            .get(&name)
                            .map_or(true, |[a, b]| (est.sigma0 - a).abs() <= *tol && (est.sigma1 - b).abs() <= *tol);
                        pass &= ok;
                        rows.push(json!({
                            "name": name, "sigma0": num(est.sigma0), "sigma1": num(est.sigma1),
                            "worst_c": num(est.worst_c), "grid_spec": grids, "pass": ok,
                        }));
                    }
                    Err(e) => {
                        pass = false;
                        rows.push(json!({ "name": name, "error": e.to_string(), "grid_spec": grids, "pass": false }));
                    }
                }
            }
            Ok(Outcome::new(Report {
                values: json!({ "indices": rows }),
                tolerances: json!({ "index_tol": tol }),
                pass,
                ..base
            }))
        }

        SuiteKind::Ellipticity {
            family,
            sector,
            expect_elliptic,
            expect_margin,
            margin_tol,
            threshold,
            n_xi,
            n_lambda,
            x_density,
        } => {
            let fam = r.family(family).map_err(cfg_err)?;
            let k = r.sector(sector).map_err(cfg_err)?;
            let cfg = EllipticityConfig {
                densities: SphereDensities {
                    n_xi: *n_xi,
                    n_lambda: *n_lambda,
                },
                x_density: *x_density,
                threshold: *threshold,
                refine: true,
            };
            let rep = check_parameter_ellipticity(&fam, &k, &cfg)?;
            let margin_ok = expect_margin.map_or(true, |m| (rep.margin - m).abs() <= *margin_tol);
            let pass = rep.is_elliptic == *expect_elliptic && margin_ok;
            let mut csv = String::from("arg,margin\n");
            for m in &rep.per_ray_minima {
                csv.push_str(&format!("{:e},{:e}\n", m.arg, m.margin));
            }
            Ok(Outcome {
                report: Report {
                    values: serde_json::to_value(&rep).expect("margin report serializes"),
                    tolerances: json!({
                        "threshold": threshold, "expect_elliptic": expect_elliptic,
                        "expect_margin": expect_margin, "margin_tol": margin_tol,
                    }),
                    pass,
                    ..base
                },
                artifacts: vec![Artifact::Csv(csv)],
            })
        }

        SuiteKind::Lambda0 {
            family,
            sector,
            phi,
            delta,
            cap,
            ray_count,
            bisect_tol,
            expect,
            expect_rel_tol,
        } => {
            let fam = r.family(family).map_err(cfg_err)?;
            let k = r.sector(sector).map_err(cfg_err)?;
            let phi = r.phi(phi).map_err(cfg_err)?;
            let (crit, cfg) = lambda0_setup(*delta, *cap, *ray_count, *bisect_tol, r.seed);
            let rep = find_lambda0(&fam, &r.grid, &k, &phi, crit, &cfg)?;
            let pass = expect.map_or(true, |e| (rep.lambda0 - e).abs() <= expect_rel_tol * e);
            Ok(Outcome::new(Report {
                values: serde_json::to_value(&rep).expect("lambda0 report serializes"),
                tolerances: json!({
                    "delta": delta, "cap": num(*cap), "bisect_tol": bisect_tol,
                    "expect": expect, "expect_rel_tol": expect_rel_tol,
                }),
                pass,
                ..base
            }))
        }

        SuiteKind::EstimateSweep {
            family,
            sector,
            phi,
            mode,
            start,
            decades,
            per_decade,
            ray_count,
            slope_tol,
            solve_tol,
            random_trials,
            rhs,
            require_singular,
        } => {
            let fam = r.family(family).map_err(cfg_err)?;
            let k = r.sector(sector).map_err(cfg_err)?;
            let phi = r.phi(phi).map_err(cfg_err)?;
            let (lambda0, start) = match (start, mode) {
                (Some(s), _) => (None, *s),
                (None, SweepMode::OneSided) => (None, 1.0),
                (None, SweepMode::TwoSided) => {
                    let (crit, cfg) = lambda0_setup(d_delta(), d_cap(), *ray_count, d_bisect_tol(), r.seed);
                    let l0 = find_lambda0(&fam, &r.grid, &k, &phi, crit, &cfg)?.lambda0;
                    (Some(l0), l0)
                }
            };
            let spec = SweepSpec::decades(ray_args(&k, *ray_count), start, *decades, *per_decade)?;
            let compiled = fam.compile(&r.grid)?;
            let corpus = if compiled.is_multiplier() {
                TrialCorpus::standard(&r.grid, r.seed)
            } else {
                TrialCorpus::random_only(&r.grid, r.seed, *random_trials)
            };
            let f = field_from_spec(rhs, r)?;
            let solve_cfg = SolveConfig {
                tol: *solve_tol,
                ..SolveConfig::default()
            };
            let rows = estimate_sweep(&compiled, &phi, &spec, &corpus, &f, &solve_cfg)?;
            let (values, pass) = sweep_verdict(&rows, &spec, *mode, *slope_tol, *solve_tol, *require_singular);
            let mut values = values;
            values["lambda0"] = lambda0.map_or(Value::Null, num);
            values["start"] = num(start);
            Ok(Outcome {
                report: Report {
                    values,
                    tolerances: json!({
                        "slope_tol": slope_tol, "solve_tol": solve_tol, "require_singular": require_singular,
                    }),
                    pass,
                    ..base
                },
                artifacts: vec![Artifact::Csv(sweep_csv(&rows))],
            })
        }

        SuiteKind::Interpolation {
            check,
            functions,
            gates,
            gate_offsets,
            trials,
            tol,
            rs,
            theta,
            r_ratio,
            residual_floor,
            family,
            lambda,
            bound_tol,
        } => {
            let fields = random_fields(r, r.seed, *trials);
            let phis = r.functions(functions).map_err(cfg_err)?;
            let (values, pass) = match check {
                InterpCheck::Prop1 => {
                    let mut rows = Vec::new();
                    let mut worst = 0.0f64;
                    for (name, phi) in &phis {
                        for [s0, s1] in gates_for(phi, gates, gate_offsets)? {
                            let res = max(fields
                                .iter()
                                .map(|u| verify_prop1_equality(u, phi, s0, s1))
                                .collect::<extsob::Result<Vec<_>>>()?);
                            worst = worst.max(res);
                            rows.push(json!({ "phi": name, "s0": s0, "s1": s1, "max_residual": num(res) }));
                        }
                    }
                    (json!({ "rows": rows, "max_residual": num(worst) }), worst <= *tol)
                }
                InterpCheck::Lemma3 => {
                    let mut rows = Vec::new();
                    let mut pass = true;
                    for (name, eta) in &phis {
                        let [l0, l1] = gates_for(eta, gates, gate_offsets)?[0];
                        let mut per_r = Vec::new();
                        for &rr in rs {
                            let res = max(fields
                                .iter()
                                .map(|u| verify_lemma3_param_equality(u, eta, l0, l1, *theta, rr))
                                .collect::<extsob::Result<Vec<_>>>()?);
                            per_r.push((rr, res));
                        }
                        let worst = max(per_r.iter().map(|p| p.1));
                        let at_zero = per_r.iter().find(|p| p.0 == 0.0).map(|p| p.1);
                        let ratio_ok = at_zero.map_or(true, |z| worst <= r_ratio * z.max(*residual_floor));
                        pass &= worst <= *tol && ratio_ok;
                        rows.push(json!({
                            "eta": name, "l0": l0, "l1": l1,
                            "residuals": per_r.iter().map(|(rr, res)| json!({ "r": num(*rr), "residual": num(*res) })).collect::<Vec<_>>(),
                            "max_residual": num(worst), "r_zero_residual": at_zero.map(num),
                        }));
                    }
                    (json!({ "rows": rows }), pass)
                }
                InterpCheck::Prop2 => {
                    let fam = r.family(family.as_deref().unwrap_or("lap")).map_err(cfg_err)?;
                    let lam = parse_complex(lambda).map_err(cfg_err)?;
                    let op = fam.compile(&r.grid)?.at(lam);
                    let ord = fam.order();
                    let mut rows = Vec::new();
                    let mut pass = true;
                    for (name, phi) in &phis {
                        for [s0, s1] in gates_for(phi, gates, gate_offsets)? {
                            let psi = make_interpolation_parameter(phi, s0, s1, DEFAULT_INDEX_MARGIN)?;
                            let x = HilbertCouple::sobolev(s0, s1, &r.grid)?;
                            let y = HilbertCouple::sobolev(s0 - ord, s1 - ord, &r.grid)?;
                            let rep = verify_prop2_bound(&op, &x, &y, &psi, &fields)?;
                            let ok = rep.diagonal_bound_holds(*bound_tol).unwrap_or(true);
                            pass &= ok;
                            let mut v = serde_json::to_value(&rep).expect("prop2 report serializes");
                            v["phi"] = json!(name);
                            v["s0"] = json!(s0);
                            v["s1"] = json!(s1);
                            v["pass"] = json!(ok);
                            rows.push(v);
                        }
                    }
                    (json!({ "rows": rows, "multiplier": op.multiplier().is_some() }), pass)
                }
                InterpCheck::Prop3 => {
                    let mut rows = Vec::new();
                    let mut worst = 0.0f64;
                    for (name, phi) in &phis {
                        let gs = gates_for(phi, gates, gate_offsets)?;
                        let psi = make_interpolation_parameter(phi, gs[0][0], gs[0][1], DEFAULT_INDEX_MARGIN)?;
                        let couples = gs
                            .iter()
                            .map(|[a, b]| HilbertCouple::sobolev(*a, *b, &r.grid))
                            .collect::<extsob::Result<Vec<_>>>()?;
                        let parts = random_fields(r, r.seed.wrapping_add(1), couples.len());
                        let res = verify_prop3_direct_sum(&couples, &psi, &parts)?;
                        worst = worst.max(res);
                        rows.push(json!({ "phi": name, "components": couples.len(), "residual": num(res) }));
                    }
                    (json!({ "rows": rows, "max_residual": num(worst) }), worst <= *tol)
                }
            };
            Ok(Outcome::new(Report {
                values,
                tolerances: json!({
                    "tol": tol, "r_ratio": r_ratio, "residual_floor": residual_floor, "bound_tol": bound_tol,
                }),
                pass,
                ..base
            }))
        }

        SuiteKind::Inequalities {
            functions,
            samples,
            trials,
            r_max,
            eps_max,
            delta_max,
            tol,
            family,
            sandwich_radii,
        } => {
            let fam = r.family(family).map_err(cfg_err)?;
            let phis = r.functions(functions).map_err(cfg_err)?;
            if phis.is_empty() {
                return Err(extsob::Error::EmptySample("no weights declared".into()));
            }
            let fields = random_fields(r, r.seed, *trials);
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            let mut min_rel = f64::INFINITY;
            let mut violations = 0usize;
            for i in 0..*samples {
                let u = &fields[i % fields.len()];
                let eta = &phis[i % phis.len()].1;
                // Half the radii log-uniform, half uniform, and r = 0 now and then.
                let rr = match i % 16 {
                    0 => 0.0,
                    k if k % 2 == 0 => rng.random_range(0.0..=*r_max),
                    _ => r_max.powf(rng.random_range(0.0..=1.0)),
                };
                let eps = rng.random_range(0.0..=*eps_max);
                let delta = rng.random_range(0.0..=*delta_max);
                let s = verify_interp_inequality(u, eta, rr, eps, delta)?.relative();
                min_rel = min_rel.min(s);
                if s < -tol {
                    violations += 1;
                }
            }

            let (m, q) = (fam.m(), fam.q());
            let mut sandwich_max = 0.0f64;
            for (_, phi) in &phis {
                for u in &fields {
                    for &rad in sandwich_radii {
                        let s = verify_sandwich(u, phi, Complex64::new(-rad, 0.0), m, q)?;
                        sandwich_max = sandwich_max.max(s.max_violation);
                    }
                }
            }
            // Equality witness: a single mode with |λ|^q = ⟨ξ⟩^{mq}.
            let mut k = vec![0i64; r.grid.dim()];
            k[0] = 1;
            let x = SpectralField::single_mode(&r.grid, &k, Complex64::new(1.0, 0.0))?;
            let lam = 2f64.powf(m / 2.0);
            let w = verify_sandwich(&x, &phis[0].1, Complex64::new(-lam, 0.0), m, q)?;
            let witness_ratio = w.middle / w.left;
            let witness_ok = (witness_ratio - std::f64::consts::SQRT_2).abs() <= *tol * std::f64::consts::SQRT_2;
            let pass = violations == 0 && sandwich_max <= *tol && witness_ok;
            Ok(Outcome::new(Report {
                values: json!({
                    "samples": samples, "min_relative_slack": num(min_rel), "violations": violations,
                    "sandwich_max_violation": num(sandwich_max),
                    "witness": { "frequency": k, "lambda": num(-lam), "ratio": num(witness_ratio) },
                }),
                tolerances: json!({ "violation_tol": tol }),
                pass,
                ..base
            }))
        }

        SuiteKind::Solve { family, lambda, rhs, tol } => {
            let fam = r.family(family).map_err(cfg_err)?;
            let lam = parse_complex(lambda).map_err(cfg_err)?;
            let f = field_from_spec(rhs, r)?;
            let cfg = SolveConfig {
                tol: *tol,
                ..SolveConfig::default()
            };
            let sol = solve(&fam, lam, &f, &cfg)?;
            let pass = sol.residual <= *tol;
            Ok(Outcome {
                report: Report {
                    values: json!({
                        "residual": num(sol.residual), "iterations": sol.iterations,
                        "lambda": [num(lam.re), num(lam.im)],
                        "history": sol.history.iter().map(|h| num(*h)).collect::<Vec<_>>(),
                    }),
                    tolerances: json!({ "tol": tol }),
                    pass,
                    ..base
                },
                artifacts: vec![Artifact::Field(sol.u)],
            })
        }

        SuiteKind::Norms {
            functions,
            fields,
            random_fields: count,
            param,
        } => {
            let phis = r.functions(functions).map_err(cfg_err)?;
            let mut us: Vec<(String, SpectralField)> = fields
                .iter()
                .map(|s| Ok((s.clone(), field_from_spec(s, r)?)))
                .collect::<extsob::Result<_>>()?;
            for (i, u) in random_fields(r, r.seed, *count).into_iter().enumerate() {
                us.push((format!("random#{i}"), u));
            }
            let mut rows = Vec::new();
            for (fname, u) in &us {
                for (pname, phi) in &phis {
                    let mut row = json!({ "field": fname, "phi": pname, "norm": num(hoermander_norm(u, phi)?) });
                    let pn = param
                        .iter()
                        .map(|[rr, th]| Ok(json!({ "r": num(*rr), "theta": num(*th), "norm": num(param_norm(u, phi, *rr, *th)?) })))
                        .collect::<extsob::Result<Vec<_>>>()?;
                    if !pn.is_empty() {
                        row["param_norms"] = json!(pn);
                    }
                    rows.push(row);
                }
            }
            Ok(Outcome::new(Report {
                values: json!({ "norms": rows }),
                tolerances: json!({}),
                pass: true,
                ..base
            }))
        }
    }
}

fn lambda0_setup(delta: f64, cap: f64, ray_count: usize, bisect_tol: f64, seed: u64) -> (Lambda0Criterion, Lambda0Config) {
    let crit = Lambda0Criterion {
        delta: (delta > 0.0).then_some(delta),
        cap: cap.is_finite().then_some(cap),
    };
    let cfg = Lambda0Config {
        ray_count,
        bisect_tol,
        seed,
        ..Lambda0Config::default()
    };
    (crit, cfg)
}

/// Slopes of `ln c` over the last two decades of each ray, and the verdict.
fn sweep_verdict(
    rows: &[SweepRow],
    spec: &SweepSpec,
    mode: SweepMode,
    slope_tol: f64,
    solve_tol: f64,
    require_singular: bool,
) -> (Value, bool) {
    let hi = spec.radii.last().copied().unwrap_or(0.0);
    let lo = hi / 100.0 * (1.0 - 1e-12);
    let upper = |r: &SweepRow| r.c_upper_exact.unwrap_or(r.c_upper);
    let lower = |r: &SweepRow| r.c_lower_exact.unwrap_or(r.c_lower);
    let mut rays = Vec::new();
    let mut pass = true;
    for &a in &spec.args {
        let on: Vec<&SweepRow> = rows.iter().filter(|r| r.arg == a).collect();
        let su = log_slope(&on.iter().map(|r| (r.modulus, upper(r))).collect::<Vec<_>>(), lo, hi);
        let sl = log_slope(&on.iter().map(|r| (r.modulus, lower(r))).collect::<Vec<_>>(), lo, hi);
        let flat = |s: Option<f64>| s.is_some_and(|s| s.abs() <= slope_tol);
        let singular: Vec<&str> = on.iter().filter_map(|r| r.witness.as_deref()).collect();
        let lower_bounded = on.iter().all(|r| lower(r).is_finite()) && flat(sl);
        let ok = match mode {
            SweepMode::TwoSided => {
                lower_bounded
                    && flat(su)
                    && on.iter().all(|r| upper(r).is_finite() && r.residual.is_some_and(|x| x <= solve_tol))
            }
            SweepMode::OneSided => lower_bounded && (!require_singular || !singular.is_empty()),
        };
        pass &= ok;
        rays.push(json!({
            "arg": num(a),
            "slope_upper": su.map(num), "slope_lower": sl.map(num),
            "max_c_upper": num(on.iter().map(|r| upper(r)).fold(0.0, f64::max)),
            "max_c_lower": num(max(on.iter().map(|r| lower(r)))),
            "max_residual": on.iter().filter_map(|r| r.residual).reduce(f64::max).map(num),
            "singular_points": singular.len(),
            "first_singular_witness": singular.first(),
            "pass": ok,
        }));
    }
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "modulus": num(r.modulus), "arg": num(r.arg),
                "c_upper": num(r.c_upper), "c_lower": num(r.c_lower),
                "c_upper_exact": r.c_upper_exact.map(num), "c_lower_exact": r.c_lower_exact.map(num),
                "residual": r.residual.map(num), "failure": r.failure, "witness": r.witness,
            })
        })
        .collect();
    (json!({ "rays": rays, "rows": table }), pass)
}

/// Declared suites of one kind.
pub fn pick<'a>(suites: &'a [SuiteSpec], label: &str) -> Vec<&'a SuiteSpec> {
    suites.iter().filter(|s| s.kind.label() == label).collect()
}
