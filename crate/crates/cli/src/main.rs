//! `extsob`: runs verification suites for parameter-elliptic families on
//! the torus and writes JSON reports.
//!
//! Exit status is 0 when every suite passes, 1 when some suite fails and 2
//! for configuration or usage errors.

mod config;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use config::{parse_grid_override, ConfigError, ExperimentConfig, Resolved};
use suites::{pick, run_suite, SuiteSpec};

#[derive(Parser)]
#[command(name = "extsob", version, about = "Spectral experiments on the extended Sobolev scale")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid sizes such as `64x64`, replacing `grid.sizes`.
    #[arg(long, global = true)]
    grid_override: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Prop1,
    Lemma3,
    Prop2,
    Prop3,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every suite of the configuration in order.
    Run,
    /// Matuszewska index estimates.
    Indices {
        #[arg(long)]
        phi: Vec<String>,
    },
    /// Parameter-ellipticity margin of a family in a sector.
    CheckEllipticity {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        sector: Option<String>,
        #[arg(long)]
        n_xi: Option<usize>,
        #[arg(long)]
        n_lambda: Option<usize>,
    },
    /// Interpolation equalities and bounds.
    InterpVerify {
        #[arg(long, value_enum)]
        check: Vec<Check>,
        #[arg(long)]
        phi: Vec<String>,
        #[arg(long)]
        family: Option<String>,
    },
    /// Two-sided a priori constants along rays of a sector; prints CSV.
    EstimateSweep {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        sector: Option<String>,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        decades: Option<usize>,
        #[arg(long)]
        per_decade: Option<usize>,
        /// First radius (default: the computed threshold λ₀).
        #[arg(long)]
        start: Option<f64>,
        /// Only require the lower constant to stay bounded.
        #[arg(long)]
        one_sided: bool,
    },
    /// Solve `A(λ)u = f`, write `u` and print the residual.
    Solve {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// `random[:seed]`, `mode:k1,k2` or `file:<path>`.
        #[arg(long)]
        rhs: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Hörmander norms of fields.
    Norms {
        #[arg(long)]
        phi: Vec<String>,
        #[arg(long)]
        field: Vec<String>,
    },
}

enum Failure {
    Config(String),
    Suite,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn insert(m: &mut Map<String, Value>, k: &str, v: Option<Value>) {
    if let Some(v) = v {
        m.insert(k.into(), v);
    }
}

/// Builds suites for a subcommand: from flags when any target flag is
/// given, else the configuration's suites of that kind.
fn adhoc(label: &str, fields: Map<String, Value>, declared: &[SuiteSpec]) -> Result<Vec<SuiteSpec>, ConfigError> {
    if fields.is_empty() {
        let found: Vec<SuiteSpec> = pick(declared, label).into_iter().cloned().collect();
        if !found.is_empty() {
            return Ok(found);
        }
    }
    let mut m = fields;
    m.insert("suite".into(), json!(label));
    let spec: SuiteSpec =
        serde_json::from_value(Value::Object(m)).map_err(|e| ConfigError::Invalid(format!("{label}: {e}")))?;
    Ok(vec![spec])
}

fn real_main(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    let cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let grid = c.grid_override.as_deref().map(parse_grid_override).transpose()?;
    let resolved = Resolved::new(&cfg, grid.as_deref(), c.seed)?;

    let (suites, csv_to_stdout) = match &cli.cmd {
        Cmd::Run => {
            if c.config.is_none() {
                return Err(Failure::Config("run needs --config".into()));
            }
            (cfg.suites.clone(), false)
        }
        Cmd::Indices { phi } => {
            let mut m = Map::new();
            insert(&mut m, "functions", (!phi.is_empty()).then(|| json!(phi)));
            (adhoc("indices", m, &cfg.suites)?, false)
        }
        Cmd::CheckEllipticity {
            family,
            sector,
            n_xi,
            n_lambda,
        } => {
            let mut m = Map::new();
            insert(&mut m, "family", family.as_ref().map(|v| json!(v)));
            insert(&mut m, "sector", sector.as_ref().map(|v| json!(v)));
            insert(&mut m, "n_xi", n_xi.map(|v| json!(v)));
            insert(&mut m, "n_lambda", n_lambda.map(|v| json!(v)));
            (adhoc("ellipticity", m, &cfg.suites)?, false)
        }
        Cmd::InterpVerify { check, phi, family } => {
            let declared = pick(&cfg.suites, "interpolation");
            if check.is_empty() && phi.is_empty() && family.is_none() && !declared.is_empty() {
                (declared.into_iter().cloned().collect(), false)
            } else {
                let checks = if check.is_empty() {
                    vec![Check::Prop1, Check::Lemma3, Check::Prop2, Check::Prop3]
                } else {
                    check.clone()
                };
                let mut out = Vec::new();
                for k in checks {
                    let mut m = Map::new();
                    let name = k.to_possible_value().expect("no skipped variants").get_name().to_string();
                    m.insert("check".into(), json!(name));
                    m.insert("name".into(), json!(format!("interpolation_{name}")));
                    let phis = if phi.is_empty() { vec!["rho".to_string()] } else { phi.clone() };
                    m.insert("functions".into(), json!(phis));
                    m.insert("family".into(), json!(family.clone().unwrap_or_else(|| "lap".into())));
                    out.extend(adhoc("interpolation", m, &[])?);
                }
                (out, false)
            }
        }
        Cmd::EstimateSweep {
            family,
            sector,
            phi,
            decades,
            per_decade,
            start,
            one_sided,
        } => {
            let mut m = Map::new();
            insert(&mut m, "family", family.as_ref().map(|v| json!(v)));
            insert(&mut m, "sector", sector.as_ref().map(|v| json!(v)));
            insert(&mut m, "phi", phi.as_ref().map(|v| json!(v)));
            insert(&mut m, "decades", decades.map(|v| json!(v)));
            insert(&mut m, "per_decade", per_decade.map(|v| json!(v)));
            insert(&mut m, "start", start.map(|v| json!(v)));
            insert(&mut m, "mode", one_sided.then(|| json!("one_sided")));
            (adhoc("estimate_sweep", m, &cfg.suites)?, true)
        }
        Cmd::Solve { family, lambda, rhs, tol } => {
            let mut m = Map::new();
            insert(&mut m, "family", family.as_ref().map(|v| json!(v)));
            insert(&mut m, "lambda", lambda.as_ref().map(|v| json!(v)));
            insert(&mut m, "rhs", rhs.as_ref().map(|v| json!(v)));
            insert(&mut m, "tol", tol.map(|v| json!(v)));
            (adhoc("solve", m, &cfg.suites)?, false)
        }
        Cmd::Norms { phi, field } => {
            let mut m = Map::new();
            insert(&mut m, "functions", (!phi.is_empty()).then(|| json!(phi)));
            insert(&mut m, "fields", (!field.is_empty()).then(|| json!(field)));
            (adhoc("norms", m, &cfg.suites)?, false)
        }
    };

    // Resolve every reference before running anything.
    for s in &suites {
        s.kind.validate(&resolved)?;
    }

    let is_run = matches!(cli.cmd, Cmd::Run);
    let is_solve = matches!(cli.cmd, Cmd::Solve { .. });
    let out_dir = c
        .out
        .clone()
        .or_else(|| is_run.then(|| PathBuf::from("reports")))
        .or_else(|| is_solve.then(|| PathBuf::from(".")));

    let mut entries = Vec::new();
    for (i, s) in suites.iter().enumerate() {
        let outcome = run_suite(s, &resolved)?;
        let name = outcome.report.inputs["name"].as_str().unwrap_or_default().to_string();
        let stem = s.output.clone().unwrap_or_else(|| {
            if suites.len() == 1 {
                PathBuf::from(&name)
            } else {
                PathBuf::from(format!("{i:02}_{name}"))
            }
        });
        let stem = stem.with_extension("");
        let pass = outcome.report.pass;
        if let Some(dir) = &out_dir {
            let written = report::write(dir, &stem, &outcome.report, &outcome.artifacts)
                .map_err(|e| Failure::Config(format!("writing reports to {}: {e}", dir.display())))?;
            let shown: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
            eprintln!("{} {name} ({}) -> {}", if pass { "PASS" } else { "FAIL" }, s.kind.label(), shown.join(", "));
        }
        if !is_run {
            print_outcome(&outcome, csv_to_stdout);
        }
        entries.push((name, s.kind.label().to_string(), pass));
    }
    if is_run {
        let dir = out_dir.as_deref().unwrap_or(Path::new("reports"));
        let summary = report::summary(&entries, c.config.as_deref());
        std::fs::write(dir.join("summary.json"), report::to_json(&summary))
            .map_err(|e| Failure::Config(format!("writing summary: {e}")))?;
        let mut text = String::new();
        for (name, suite, pass) in &entries {
            text += &format!("{} {name} ({suite})\n", if *pass { "PASS" } else { "FAIL" });
        }
        stdout(&text);
    }
    if entries.iter().all(|e| e.2) {
        Ok(())
    } else {
        Err(Failure::Suite)
    }
}

/// Writes to stdout, ignoring a closed pipe (`extsob ... | head`).
fn stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn print_outcome(o: &suites::Outcome, csv: bool) {
    if csv {
        for a in &o.artifacts {
            if let report::Artifact::Csv(t) = a {
                stdout(t);
                return;
            }
        }
    }
    let mut text = String::new();
    if let Some(r) = o.report.values.get("residual") {
        text += &format!("residual = {r}\n");
    }
    text += &report::to_json(&o.report);
    stdout(&text);
}
