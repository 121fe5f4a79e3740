use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use extsob::ellipticity::Sector;
use extsob::expr::{Env, Expr};
use extsob::psdo::{HomogeneousComponent, ParameterFamily, PolyhomSymbol};
use extsob::ro::{RoFunction, SampledFn, Tail};
use extsob::spectral::TorusGrid;
use extsob::Complex64;
use serde::Deserialize;

use crate::suites::SuiteSpec;

/// Problems in the configuration or command line; these map to exit code 2.
#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Unresolved { what: &'static str, name: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Unresolved { what, name } => write!(f, "unresolved {what} {name:?}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<extsob::Error> for ConfigError {
    fn from(e: extsob::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Dimension; must agree with `sizes` when given.
    pub n: Option<usize>,
    pub sizes: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: None,
            sizes: vec![32, 32],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RoSpec {
    Power {
        s: f64,
    },
    LogPower {
        s: f64,
        #[serde(default)]
        log_exponents: Vec<f64>,
    },
    Tabulated {
        knots: Vec<(f64, f64)>,
        #[serde(default)]
        extrapolation_power: f64,
    },
    GammaIntegral {
        points_per_decade: usize,
        #[serde(default)]
        beta: Vec<f64>,
        gamma: Vec<f64>,
        #[serde(default)]
        periodic: bool,
    },
}

impl RoSpec {
    pub fn build(&self) -> Result<RoFunction, ConfigError> {
        Ok(match self {
            RoSpec::Power { s } => RoFunction::power(*s),
            RoSpec::LogPower { s, log_exponents } => {
                if !s.is_finite() || log_exponents.iter().any(|a| !a.is_finite()) {
                    return Err(ConfigError::Invalid("log_power exponents must be finite".into()));
                }
                RoFunction::log_power(*s, log_exponents.clone())
            }
            RoSpec::Tabulated {
                knots,
                extrapolation_power,
            } => RoFunction::tabulated(knots, *extrapolation_power)?,
            RoSpec::GammaIntegral {
                points_per_decade,
                beta,
                gamma,
                periodic,
            } => {
                let tail = if *periodic { Tail::Periodic } else { Tail::Hold };
                let beta = if beta.is_empty() {
                    SampledFn::constant(0.0)?
                } else {
                    SampledFn::new(*points_per_decade, beta.clone(), tail)?
                };
                let gamma = SampledFn::new(*points_per_decade, gamma.clone(), tail)?;
                RoFunction::gamma_integral(beta, gamma)
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub degree: f64,
    pub expr: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    /// Homogeneous terms in strictly decreasing degree.
    pub terms: Vec<TermSpec>,
    /// Optional full-symbol expression replacing the term sum on the lattice.
    pub full: Option<String>,
    pub order: Option<f64>,
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// `laplacian_resolvent` builds `−Δ − λ`; otherwise give `m` and
    /// `components`.
    pub preset: Option<String>,
    pub m: Option<f64>,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

fn parse_expr(src: &str) -> Result<Expr, ConfigError> {
    Expr::parse(src).map_err(|e| ConfigError::Invalid(format!("{src:?}: {e}")))
}

impl FamilySpec {
    pub fn build(&self, dim: usize) -> Result<ParameterFamily, ConfigError> {
        if let Some(p) = &self.preset {
            return builtin_family(p, dim).ok_or_else(|| ConfigError::Unresolved {
                what: "family preset",
                name: p.clone(),
            });
        }
        let m = self
            .m
            .ok_or_else(|| ConfigError::Invalid("family needs `m` or a `preset`".into()))?;
        let comps = self
            .components
            .iter()
            .map(|c| {
                let terms = c
                    .terms
                    .iter()
                    .map(|t| HomogeneousComponent::new(t.degree, parse_expr(&t.expr)?).map_err(ConfigError::from))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut s = PolyhomSymbol::new(dim, terms)?;
                if let Some(f) = &c.full {
                    s = s.with_full(parse_expr(f)?)?;
                }
                if let Some(k) = c.order {
                    s = s.with_order(k)?;
                }
                if let Some(r) = c.cutoff {
                    s = s.with_cutoff_radius(r)?;
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(ParameterFamily::new(m, comps)?)
    }
}

/// Families available without a declaration.
pub fn builtin_family(name: &str, dim: usize) -> Option<ParameterFamily> {
    match name {
        "lap" | "laplacian_resolvent" => Some(ParameterFamily::laplacian_resolvent(dim)),
        _ => None,
    }
}

/// Weights available without a declaration: `one`, `rho`, `rho^<s>`,
/// `power:<s>`, `log_power:<s>:<a1>,<a2>,…`.
pub fn builtin_phi(name: &str) -> Option<RoFunction> {
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    match name {
        "one" => Some(RoFunction::one()),
        "rho" => Some(RoFunction::power(1.0)),
        _ => {
            if let Some(s) = name.strip_prefix("rho^") {
                return num(s).map(RoFunction::power);
            }
            if let Some(s) = name.strip_prefix("power:") {
                return num(s).map(RoFunction::power);
            }
            let rest = name.strip_prefix("log_power:")?;
            let (s, logs) = rest.split_once(':').unwrap_or((rest, ""));
            let logs = logs
                .split(',')
                .filter(|v| !v.trim().is_empty())
                .map(num)
                .collect::<Option<Vec<_>>>()?;
            Some(RoFunction::log_power(num(s)?, logs))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub ro_functions: BTreeMap<String, RoSpec>,
    #[serde(default)]
    pub families: BTreeMap<String, FamilySpec>,
    /// Named angles, written `ray:<angle>` or `sector:<min>,<max>`.
    #[serde(default)]
    pub sectors: BTreeMap<String, String>,
    #[serde(default)]
    pub suites: Vec<SuiteSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            grid: GridSpec::default(),
            ro_functions: BTreeMap::new(),
            families: BTreeMap::new(),
            sectors: BTreeMap::new(),
            suites: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }
}

/// `64x64`, `64,64` or `128`.
pub fn parse_grid_override(s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(['x', ','])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| ConfigError::Invalid(format!("bad grid override {s:?}")))
        })
        .collect()
}

/// `-1+0i`, `2.5`, `-3i`, `1e3*exp(0.5i)`: any constant expression.
pub fn parse_complex(s: &str) -> Result<Complex64, ConfigError> {
    let v = parse_expr(s)?.eval(&Env::scalar(f64::NAN));
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(ConfigError::Invalid(format!("{s:?} is not a finite complex number")));
    }
    Ok(v)
}

/// A configuration with every declaration built and checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub seed: u64,
    pub grid: Arc<TorusGrid>,
    pub ro: BTreeMap<String, RoFunction>,
    pub families: BTreeMap<String, ParameterFamily>,
    pub sectors: BTreeMap<String, Sector>,
}

impl Resolved {
    pub fn new(cfg: &ExperimentConfig, grid_override: Option<&[usize]>, seed: Option<u64>) -> Result<Self, ConfigError> {
        let sizes = grid_override.map(<[usize]>::to_vec).unwrap_or_else(|| cfg.grid.sizes.clone());
        if grid_override.is_none() {
            if let Some(n) = cfg.grid.n {
                if n != sizes.len() {
                    return Err(ConfigError::Invalid(format!(
                        "grid.n = {n} but {} sizes given",
                        sizes.len()
                    )));
                }
            }
        }
        let grid = TorusGrid::new(&sizes)?;
        let ro = cfg
            .ro_functions
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.build()?)))
            .collect::<Result<_, ConfigError>>()?;
        let families = cfg
            .families
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.build(grid.dim())?)))
            .collect::<Result<_, ConfigError>>()?;
        let sectors = cfg
            .sectors
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.parse::<Sector>()?)))
            .collect::<Result<_, ConfigError>>()?;
        Ok(Resolved {
            seed: seed.unwrap_or(cfg.seed),
            grid,
            ro,
            families,
            sectors,
        })
    }

    pub fn phi(&self, name: &str) -> Result<RoFunction, ConfigError> {
        self.ro
            .get(name)
            .cloned()
            .or_else(|| builtin_phi(name))
            .ok_or_else(|| ConfigError::Unresolved {
                what: "ro function",
                name: name.to_string(),
            })
    }

    pub fn family(&self, name: &str) -> Result<ParameterFamily, ConfigError> {
        self.families
            .get(name)
            .cloned()
            .or_else(|| builtin_family(name, self.grid.dim()))
            .ok_or_else(|| ConfigError::Unresolved {
                what: "family",
                name: name.to_string(),
            })
    }

    /// A declared name or a literal such as `ray:pi`.
    pub fn sector(&self, name: &str) -> Result<Sector, ConfigError> {
        if let Some(s) = self.sectors.get(name) {
            return Ok(*s);
        }
        if name.contains(':') {
            return Ok(name.parse::<Sector>()?);
        }
        Err(ConfigError::Unresolved {
            what: "sector",
            name: name.to_string(),
        })
    }

    /// The named functions, or every declared one when `names` is empty.
    pub fn functions(&self, names: &[String]) -> Result<Vec<(String, RoFunction)>, ConfigError> {
        if names.is_empty() {
            return Ok(self.ro.iter().map(|(k, v)| (k.clone(), v.clone())).collect());
        }
        names.iter().map(|n| Ok((n.clone(), self.phi(n)?))).collect()
    }
}
