use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::XlabError;
use crate::dist::{HeavyTailLaw, SignMode, SlowlyVarying};
use crate::limits::{TheoremId, TheoremParams, DEFAULT_MC_SIZE, DEFAULT_SUMMANDS};

/// Solver used for the raw statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    /// Eigen at `r = p = 2`, power method on nonnegative matrices with
    /// `p <= r`, multistart ascent otherwise.
    Auto,
    Power,
    Ascent,
    /// Brute force; refused beyond the oracle size limit.
    Oracle,
    /// Closed form of the large part.
    Closed,
    /// Lower end of the ansatz sandwich (shifted theorems only).
    Bounds,
}

impl FromStr for MethodChoice {
    type Err = XlabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => MethodChoice::Auto,
            "power" => MethodChoice::Power,
            "ascent" => MethodChoice::Ascent,
            "oracle" => MethodChoice::Oracle,
            "closed" => MethodChoice::Closed,
            "bounds" => MethodChoice::Bounds,
            other => return Err(XlabError::Usage(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Ascent restarts; `None` picks 50 up to `n = 100` and 20 above.
    pub restarts: Option<usize>,
    pub tol: f64,
    pub method: MethodChoice,
    /// Per-trial wall-clock budget in seconds.
    pub trial_timeout: Option<f64>,
}

impl SolverOptions {
    pub fn restarts_for(&self, n: usize) -> usize {
        self.restarts.unwrap_or(if n <= 100 { 50 } else { 20 })
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: None,
            tol: 1e-10,
            method: MethodChoice::Auto,
            trial_timeout: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputPaths {
    pub records: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plotdata: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub theorem: TheoremId,
    pub alpha: f64,
    pub r: f64,
    pub p: f64,
    pub mu: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub law: HeavyTailLaw,
    pub solver: SolverOptions,
    /// Reference draws; `0` skips the reference.
    pub mc_size: usize,
    pub summands: usize,
    pub outputs: OutputPaths,
}

const KEYS: &[&str] = &[
    "theorem",
    "alpha",
    "r",
    "p",
    "mu",
    "n_grid",
    "trials",
    "master_seed",
    "restarts",
    "tol",
    "method",
    "trial_timeout",
    "sv_family",
    "sign_mode",
    "centered",
    "shift",
    "mc_size",
    "summands",
    "records",
    "summary",
    "plotdata",
    "reference",
];

const REQUIRED: &[&str] = &["theorem", "alpha", "n_grid", "trials"];

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, XlabError> {
    v.parse()
        .map_err(|_| XlabError::Usage(format!("invalid value {v:?} for key `{key}`")))
}

/// `inf`/`infinity` are accepted for exponents.
fn parse_real(key: &str, v: &str) -> Result<f64, XlabError> {
    let x: f64 = parse_value(key, v)?;
    if x.is_nan() {
        return Err(XlabError::Usage(format!("invalid value {v:?} for key `{key}`")));
    }
    Ok(x)
}

fn parse_sv(v: &str) -> Result<SlowlyVarying, XlabError> {
    if v == "constant" {
        return Ok(SlowlyVarying::Constant);
    }
    match v.split_once(':') {
        Some(("log", c)) | Some(("log_power", c)) => Ok(SlowlyVarying::LogPower(parse_real("sv_family", c)?)),
        _ => Err(XlabError::Usage(format!(
            "sv_family must be `constant` or `log:<c>`, got {v:?}"
        ))),
    }
}

fn parse_sign(v: &str) -> Result<SignMode, XlabError> {
    match v {
        "symmetric" => Ok(SignMode::Symmetric),
        "positive" => Ok(SignMode::Positive),
        _ => match v.split_once(':') {
            Some(("two_point", q)) => Ok(SignMode::TwoPoint(parse_real("sign_mode", q)?)),
            _ => Err(XlabError::Usage(format!(
                "sign_mode must be `symmetric`, `positive` or `two_point:<q>`, got {v:?}"
            ))),
        },
    }
}

/// Whether draws of `law` have mean zero.
pub fn law_is_centered(law: &HeavyTailLaw) -> bool {
    law.shift == 0.0
        && (law.centered
            || matches!(law.sign_mode, SignMode::Symmetric)
            || law.sign_mode == SignMode::TwoPoint(0.5))
}

impl ExperimentConfig {
    /// Defaults for everything but the required keys.
    pub fn new(theorem: TheoremId, alpha: f64, n_grid: Vec<usize>, trials: usize) -> Self {
        ExperimentConfig {
            theorem,
            alpha,
            r: 2.0,
            p: 2.0,
            mu: 0.0,
            n_grid,
            trials,
            master_seed: 0,
            law: HeavyTailLaw::pareto(alpha),
            solver: SolverOptions::default(),
            mc_size: DEFAULT_MC_SIZE,
            summands: DEFAULT_SUMMANDS,
            outputs: OutputPaths::default(),
        }
    }

    pub fn params(&self) -> TheoremParams {
        TheoremParams::new(self.alpha, self.r, self.p)
            .with_mu(self.mu)
            .centered(law_is_centered(&self.law))
    }

    /// Checks the grid, the trial count, the law and the theorem window.
    pub fn validate(&self) -> Result<(), XlabError> {
        if self.n_grid.is_empty() {
            return Err(XlabError::Usage("n_grid is empty".into()));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(XlabError::Usage("n_grid must be positive and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(XlabError::Usage("trials must be at least 1".into()));
        }
        if self.law.alpha != self.alpha {
            return Err(XlabError::Usage("law index differs from alpha".into()));
        }
        self.law.validate().map_err(|e| XlabError::Regime(e.to_string()))?;
        Ok(self.theorem.validate(&self.params())?)
    }

    /// Parses flat `key = value` text; `#` starts a comment. Unknown keys,
    /// repeated keys and missing required keys are usage errors; the theorem
    /// window is checked last, as a regime error.
    pub fn parse(text: &str) -> Result<Self, XlabError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| XlabError::Usage(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(XlabError::Usage(format!("unknown config key `{k}`")));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(XlabError::Usage(format!("config key `{k}` given twice")));
            }
        }
        for key in REQUIRED {
            if !map.contains_key(*key) {
                return Err(XlabError::Usage(format!("missing config key `{key}`")));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let theorem: TheoremId = get("theorem")
            .unwrap()
            .parse()
            .map_err(|e: crate::limits::LimitsError| XlabError::Usage(e.to_string()))?;
        let alpha = parse_real("alpha", get("alpha").unwrap())?;
        let n_grid = get("n_grid")
            .unwrap()
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| parse_value::<usize>("n_grid", s))
            .collect::<Result<Vec<_>, _>>()?;
        let trials = parse_value("trials", get("trials").unwrap())?;
        let mut cfg = ExperimentConfig::new(theorem, alpha, n_grid, trials);
        if let Some(v) = get("r") {
            cfg.r = parse_real("r", v)?;
        }
        if let Some(v) = get("p") {
            cfg.p = parse_real("p", v)?;
        }
        if let Some(v) = get("mu") {
            cfg.mu = parse_real("mu", v)?;
        }
        if let Some(v) = get("master_seed") {
            cfg.master_seed = parse_value("master_seed", v)?;
        }
        if let Some(v) = get("restarts") {
            cfg.solver.restarts = Some(parse_value("restarts", v)?);
        }
        if let Some(v) = get("tol") {
            cfg.solver.tol = parse_real("tol", v)?;
        }
        if let Some(v) = get("method") {
            cfg.solver.method = v.parse()?;
        }
        if let Some(v) = get("trial_timeout") {
            let t = parse_real("trial_timeout", v)?;
            cfg.solver.trial_timeout = (t > 0.0).then_some(t);
        }
        if let Some(v) = get("sv_family") {
            cfg.law.sv_family = parse_sv(v)?;
        }
        if let Some(v) = get("sign_mode") {
            cfg.law.sign_mode = parse_sign(v)?;
        }
        if let Some(v) = get("centered") {
            cfg.law.centered = parse_value("centered", v)?;
        }
        if let Some(v) = get("shift") {
            cfg.law.shift = parse_real("shift", v)?;
        }
        if let Some(v) = get("mc_size") {
            cfg.mc_size = parse_value("mc_size", v)?;
        }
        if let Some(v) = get("summands") {
            cfg.summands = parse_value::<f64>("summands", v)? as usize;
        }
        let path = |k: &str| get(k).map(PathBuf::from);
        cfg.outputs = OutputPaths {
            records: path("records"),
            summary: path("summary"),
            plotdata: path("plotdata"),
            reference: path("reference"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, XlabError> {
        let text = std::fs::read_to_string(path).map_err(|e| XlabError::io(path, e))?;
        Self::parse(&text)
    }
}
