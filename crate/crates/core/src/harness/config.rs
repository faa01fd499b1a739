//! Line-oriented `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::losses::{LossKind, DEFAULT_HUBER_WIDTH};
use crate::solvers::{Gamma, SolverKind, XUpdate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// Logistic loss, `λ₁‖Ax‖₁`, no ridge.
    FusedLasso,
    /// Ridge-regularized logistic loss with `λ₁‖Ax‖₁`.
    GgLogistic,
    /// Ridge-regularized huberized hinge with `λ₁‖Ax‖₁`.
    GgSvm,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::FusedLasso => "fused_lasso",
            ProblemKind::GgLogistic => "gg_logistic",
            ProblemKind::GgSvm => "gg_svm",
        }
    }

    pub fn is_strongly_convex(self) -> bool {
        !matches!(self, ProblemKind::FusedLasso)
    }

    pub fn loss_kind(self, lambda2: f64, huber_width: f64) -> LossKind {
        match self {
            ProblemKind::FusedLasso => LossKind::Logistic,
            ProblemKind::GgLogistic => LossKind::L2Logistic { lambda2 },
            ProblemKind::GgSvm => LossKind::HuberizedHinge { lambda2, huber_width },
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fused_lasso" => Ok(ProblemKind::FusedLasso),
            "gg_logistic" => Ok(ProblemKind::GgLogistic),
            "gg_svm" => Ok(ProblemKind::GgSvm),
            _ => Err(Error::InvalidParameter(format!("unknown problem '{s}'"))),
        }
    }
}

/// Where the training data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Libsvm(PathBuf),
    /// Block-correlated dense Gaussian features.
    Grouped { n: usize, d: usize },
    /// Sparse one-hot features shaped like the adult census benchmark.
    Census { n: usize },
}

/// Train plus test size of the adult census benchmark.
pub const CENSUS_DEFAULT_N: usize = 32_561;

/// Graph part `G` of the penalty `A = [G; I]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Threshold(f64),
    EdgeList(PathBuf),
}

/// Constant momentum weight for `asvrg_sc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    /// Largest admissible value `1 − δ(b)/(α − 1)`.
    Bound,
    /// `θ*` with its matching `η = 1/(Lα)`; overrides `eta`.
    Optimal,
    Value(f64),
}

/// Penalty `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice {
    Value(f64),
    /// `β* = √(L_f μ/(σ_min ‖AᵀA‖₂))`; needs a strongly convex loss.
    Star,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub data: DataSource,
    pub test_path: Option<PathBuf>,
    pub test_fraction: f64,
    pub data_seed: u64,
    pub dim: Option<usize>,
    pub lambda1: f64,
    /// `None` selects 1e-2 for strongly convex problems and 0 otherwise.
    pub lambda2: Option<f64>,
    pub huber_width: f64,
    pub solvers: Vec<SolverKind>,
    pub epochs: usize,
    /// Stops a run once this many gradient passes are used.
    pub max_passes: Option<f64>,
    /// `None` selects `m = 2n/b`.
    pub m: Option<usize>,
    pub eta: f64,
    /// Initial step of STOC-ADMM; defaults to `eta`.
    pub stoc_eta: Option<f64>,
    pub beta: BetaChoice,
    pub batch_size: usize,
    pub gamma: Gamma,
    pub theta: ThetaChoice,
    pub theta0: Option<f64>,
    pub x_update: XUpdate,
    pub graph: GraphSource,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub reference_tol: f64,
    pub cache_dir: Option<PathBuf>,
    pub eta_grid: Vec<f64>,
    /// Grid for the initial STOC-ADMM step; falls back to `eta_grid`.
    pub stoc_eta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::FusedLasso,
            data: DataSource::Grouped { n: 1000, d: 50 },
            test_path: None,
            test_fraction: 0.2,
            data_seed: 1,
            dim: None,
            lambda1: 1e-5,
            lambda2: None,
            huber_width: DEFAULT_HUBER_WIDTH,
            solvers: vec![SolverKind::AsvrgGc],
            epochs: 30,
            max_passes: None,
            m: None,
            eta: 0.1,
            stoc_eta: None,
            beta: BetaChoice::Value(1.0),
            batch_size: 20,
            gamma: Gamma::Fixed(1.0),
            theta: ThetaChoice::Bound,
            theta0: None,
            x_update: XUpdate::Exact,
            graph: GraphSource::Threshold(0.5),
            seeds: vec![1],
            output_dir: PathBuf::from("traces"),
            reference_tol: 1e-10,
            cache_dir: None,
            eta_grid: Vec::new(),
            stoc_eta_grid: Vec::new(),
            beta_grid: Vec::new(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn lambda2(&self) -> f64 {
        self.lambda2
            .unwrap_or(if self.problem.is_strongly_convex() { 1e-2 } else { 0.0 })
    }

    pub fn loss_kind(&self) -> LossKind {
        self.problem.loss_kind(self.lambda2(), self.huber_width)
    }

    /// Parses a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).with_context(format!("reading {}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| e.with_context(path.display().to_string()))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: Error| match e {
                Error::InvalidParameter(msg) => Error::Parse { line: k + 1, msg },
                other => other,
            };
            match key {
                "dataset" | "test" | "graph" | "output_dir" | "cache_dir" => {
                    let p = Path::new(value);
                    let resolved = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
                    cfg.set(key, resolved.to_str().unwrap_or(value)).map_err(wrap)?;
                }
                _ => cfg.set(key, value).map_err(wrap)?,
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting; also used for CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "dataset" => self.data = DataSource::Libsvm(PathBuf::from(value)),
            "synthetic" => {
                let n = match self.data {
                    DataSource::Grouped { n, .. } | DataSource::Census { n } => Some(n),
                    DataSource::Libsvm(_) => None,
                };
                self.data = match value {
                    "grouped" => DataSource::Grouped { n: n.unwrap_or(1000), d: 50 },
                    "census" => DataSource::Census { n: n.unwrap_or(CENSUS_DEFAULT_N) },
                    _ => return Err(Error::InvalidParameter(format!("unknown synthetic data '{value}'"))),
                }
            }
            "synthetic_n" => {
                let v = parse_num(key, value)?;
                match &mut self.data {
                    DataSource::Grouped { n, .. } | DataSource::Census { n } => *n = v,
                    DataSource::Libsvm(_) => self.data = DataSource::Grouped { n: v, d: 50 },
                }
            }
            "synthetic_d" => {
                let v = parse_num(key, value)?;
                match &mut self.data {
                    DataSource::Grouped { d, .. } => *d = v,
                    _ => self.data = DataSource::Grouped { n: 1000, d: v },
                }
            }
            "test" => self.test_path = Some(PathBuf::from(value)),
            "test_fraction" => self.test_fraction = parse_num(key, value)?,
            "data_seed" => self.data_seed = parse_num(key, value)?,
            "dim" => self.dim = Some(parse_num(key, value)?),
            "lambda1" => self.lambda1 = parse_num(key, value)?,
            "lambda2" => self.lambda2 = Some(parse_num(key, value)?),
            "huber_width" => self.huber_width = parse_num(key, value)?,
            "solver" | "solvers" => {
                self.solvers = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "epochs" => self.epochs = parse_num(key, value)?,
            "m" => self.m = if value == "auto" { None } else { Some(parse_num(key, value)?) },
            "eta" => self.eta = parse_num(key, value)?,
            "stoc_eta" => self.stoc_eta = Some(parse_num(key, value)?),
            "beta" => {
                self.beta = if value == "star" { BetaChoice::Star } else { BetaChoice::Value(parse_num(key, value)?) }
            }
            "batch_size" | "b" => self.batch_size = parse_num(key, value)?,
            "gamma" => {
                self.gamma = if value == "auto" { Gamma::Auto } else { Gamma::Fixed(parse_num(key, value)?) }
            }
            "theta" => {
                self.theta = match value {
                    "bound" => ThetaChoice::Bound,
                    "optimal" => ThetaChoice::Optimal,
                    v => ThetaChoice::Value(parse_num(key, v)?),
                }
            }
            "theta0" => self.theta0 = if value == "auto" { None } else { Some(parse_num(key, value)?) },
            "x_update" => {
                self.x_update = match value {
                    "exact" => XUpdate::Exact,
                    "linearized" => XUpdate::Linearized,
                    _ => return Err(Error::InvalidParameter(format!("unknown x_update '{value}'"))),
                }
            }
            "graph_threshold" => self.graph = GraphSource::Threshold(parse_num(key, value)?),
            "graph" => self.graph = GraphSource::EdgeList(PathBuf::from(value)),
            "seeds" | "seed" => self.seeds = parse_list(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "reference_tol" => self.reference_tol = parse_num(key, value)?,
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            "eta_grid" => self.eta_grid = parse_list(key, value)?,
            "stoc_eta_grid" => self.stoc_eta_grid = parse_list(key, value)?,
            "max_passes" => {
                self.max_passes = if value == "none" { None } else { Some(parse_num(key, value)?) }
            }
            "beta_grid" => self.beta_grid = parse_list(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if !(self.lambda1 >= 0.0) {
            return bad(format!("lambda1 must be non-negative, got {}", self.lambda1));
        }
        if !(self.lambda2() >= 0.0) {
            return bad(format!("lambda2 must be non-negative, got {}", self.lambda2()));
        }
        if !(self.reference_tol > 0.0) {
            return bad(format!("reference_tol must be positive, got {}", self.reference_tol));
        }
        if let Some(p) = self.max_passes {
            if !(p > 0.0) {
                return bad(format!("max_passes must be positive, got {p}"));
            }
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if let GraphSource::Threshold(t) = self.graph {
            if !(t > 0.0) {
                return bad(format!("graph_threshold must be positive, got {t}"));
            }
        }
        if matches!(self.beta, BetaChoice::Star) && !self.problem.is_strongly_convex() {
            return bad("beta = star needs a strongly convex problem".into());
        }
        if let BetaChoice::Value(b) = self.beta {
            if !(b > 0.0) {
                return bad(format!("beta must be positive, got {b}"));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction));
        }
        self.loss_kind().validate()
    }
}
