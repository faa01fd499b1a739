//! Builds the problem described by an [`ExperimentConfig`], computes (or
//! loads) its reference optimum and runs every `(solver, seed)` pair.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::config::{BetaChoice, DataSource, ExperimentConfig, GraphSource, ThetaChoice};
use crate::harness::graph::{build_graph_matrix, read_edge_list};
use crate::harness::libsvm::read_libsvm;
use crate::harness::synthetic::{census_like, split_train_test, GroupedGaussian};
use crate::harness::trace::{summarize, write_summary, write_trace_file, SummaryRow};
use crate::linalg::{SparseMatrixCsr, SpectralConstants};
use crate::losses::{Dataset, FiniteSum, Loss, LossKind};
use crate::metrics::{compute_reference, ReferenceSolution, TraceRecord};
use crate::prox::Regularizer;
use crate::solvers::{
    beta_star, gamma_min, optimal_theta_sc, rho_rate, theta_upper_bound, Gamma, MomentumSchedule, Problem, RateParams,
    Solver, SolverConfig, SolverKind,
};

/// Environment variable capping the number of concurrent solver runs.
pub const WORKERS_ENV: &str = "ASVRG_WORKERS";

/// Tolerance and iteration cap of the spectral estimates.
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_ITER: usize = 1_000_000;

fn read_libsvm_file(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::from(e).with_context(format!("opening {}", path.display())))?;
    read_libsvm(BufReader::new(file), dim).map_err(|e| e.with_context(path.display().to_string()))
}

/// Training set and optional test set. Without a test file the data is
/// split by a seeded shuffle.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let full = match &cfg.data {
        DataSource::Libsvm(path) => {
            let train = read_libsvm_file(path, cfg.dim)?;
            if let Some(test_path) = &cfg.test_path {
                let test = read_libsvm_file(test_path, cfg.dim)?;
                if test.dim() == train.dim() {
                    return Ok((train, test));
                }
                let d = Some(train.dim().max(test.dim()));
                return Ok((read_libsvm_file(path, d)?, read_libsvm_file(test_path, d)?));
            }
            train
        }
        DataSource::Grouped { n, d } => GroupedGaussian::new(*n, *d, cfg.data_seed).generate()?,
        DataSource::Census { n } => census_like(*n, cfg.data_seed)?,
    };
    if let Some(test_path) = &cfg.test_path {
        let test = read_libsvm_file(test_path, Some(full.dim()))?;
        return Ok((full, test));
    }
    split_train_test(&full, cfg.test_fraction, cfg.data_seed)
}

pub fn build_penalty(cfg: &ExperimentConfig, train: &Dataset) -> Result<SparseMatrixCsr> {
    match &cfg.graph {
        GraphSource::Threshold(t) => build_graph_matrix(train, *t),
        GraphSource::EdgeList(path) => {
            let file = File::open(path).map_err(|e| Error::from(e).with_context(format!("opening {}", path.display())))?;
            read_edge_list(BufReader::new(file), train.dim())
                .map_err(|e| e.with_context(path.display().to_string()))?
                .penalty_matrix()
        }
    }
}

/// Everything a run needs that does not depend on the solver.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub train: Dataset,
    pub test: Dataset,
    pub a: SparseMatrixCsr,
    pub kind: LossKind,
    pub reg: Regularizer,
}

impl ExperimentData {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (train, test) = load_data(cfg)?;
        let a = build_penalty(cfg, &train)?;
        Ok(Self {
            train,
            test,
            a,
            kind: cfg.loss_kind(),
            reg: Regularizer::L1(cfg.lambda1),
        })
    }

    pub fn problem(&self) -> Result<Problem<Loss<'_>>> {
        Problem::new(Loss::new(self.kind, &self.train)?, self.reg, self.a.clone())
    }
}

fn hash_matrix(h: &mut Sha256, m: &SparseMatrixCsr) {
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for &o in m.row_offsets() {
        h.update((o as u64).to_le_bytes());
    }
    for &c in m.col_indices() {
        h.update((c as u64).to_le_bytes());
    }
    for &v in m.values() {
        h.update(v.to_bits().to_le_bytes());
    }
}

/// Content hash of (dataset, loss kind, regularizer, penalty matrix, tol).
pub fn problem_hash(problem: &Problem<Loss<'_>>, tol: f64) -> String {
    let mut h = Sha256::new();
    h.update(b"reference-v1");
    hash_matrix(&mut h, problem.loss.data.features());
    for &l in problem.loss.data.labels() {
        h.update(l.to_bits().to_le_bytes());
    }
    let (tag, params): (&[u8], Vec<f64>) = match problem.loss.kind {
        LossKind::Logistic => (b"logistic", vec![]),
        LossKind::L2Logistic { lambda2 } => (b"l2logistic", vec![lambda2]),
        LossKind::HuberizedHinge { lambda2, huber_width } => (b"huber", vec![lambda2, huber_width]),
    };
    h.update(tag);
    for p in params {
        h.update(p.to_bits().to_le_bytes());
    }
    h.update(problem.reg.weight().to_bits().to_le_bytes());
    hash_matrix(&mut h, &problem.a);
    h.update(tol.to_bits().to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads the reference from `cache_dir` or computes and stores it. The
/// file is written under a temporary name and renamed into place.
pub fn cached_reference(problem: &Problem<Loss<'_>>, tol: f64, cache_dir: Option<&Path>) -> Result<ReferenceSolution> {
    let Some(dir) = cache_dir else {
        return compute_reference(problem, tol);
    };
    let path = dir.join(format!("{}.json", problem_hash(problem, tol)));
    if let Ok(file) = File::open(&path) {
        match serde_json::from_reader::<_, ReferenceSolution>(BufReader::new(file)) {
            Ok(r) if r.x_star.len() == problem.dim() => {
                log::info!("reference loaded from {}", path.display());
                return Ok(r);
            }
            _ => log::warn!("ignoring unreadable reference cache {}", path.display()),
        }
    }
    let reference = compute_reference(problem, tol)?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.{:?}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("reference"),
        std::process::id(),
        std::thread::current().id()
    ));
    {
        let mut f = File::create(&tmp)?;
        serde_json::to_writer(&mut f, &reference)
            .map_err(|e| Error::InvalidParameter(format!("serializing reference: {e}")))?;
        f.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(reference)
}

/// Step size and penalty for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub eta: f64,
    pub beta: f64,
}

fn rate_params<F: FiniteSum>(problem: &Problem<F>, spectra: &SpectralConstants) -> Result<RateParams> {
    RateParams::new(problem.loss.strong_convexity(), problem.loss.smoothness(), None, spectra)
}

/// Default step size and penalty of `kind` under `cfg`.
pub fn default_tuning<F: FiniteSum>(
    cfg: &ExperimentConfig,
    kind: SolverKind,
    problem: &Problem<F>,
    spectra: &SpectralConstants,
) -> Result<Tuning> {
    let beta = match cfg.beta {
        BetaChoice::Value(b) => b,
        BetaChoice::Star => beta_star(&rate_params(problem, spectra)?, spectra)?,
    };
    let eta = match kind {
        SolverKind::Stoc => cfg.stoc_eta.unwrap_or(cfg.eta),
        _ => cfg.eta,
    };
    Ok(Tuning { eta, beta })
}

/// Resolves a full [`SolverConfig`] for `kind`, logging a warning when the
/// configuration is outside the regime covered by the rate guarantees.
pub fn solver_config<F: FiniteSum>(
    cfg: &ExperimentConfig,
    kind: SolverKind,
    problem: &Problem<F>,
    spectra: &SpectralConstants,
    seed: u64,
    tuning: Tuning,
) -> Result<SolverConfig> {
    let n = problem.loss.num_samples();
    let b = cfg.batch_size;
    let l = problem.loss.smoothness();
    let m = if kind.is_variance_reduced() {
        cfg.m.unwrap_or_else(|| SolverConfig::default_epoch_length(n, b))
    } else {
        1
    };
    let mut config = SolverConfig {
        m,
        eta: tuning.eta,
        beta: tuning.beta,
        batch_size: b,
        gamma: cfg.gamma,
        epochs: cfg.epochs,
        seed,
        schedule: MomentumSchedule::FixedOne,
        x_update: cfg.x_update,
        ..SolverConfig::default()
    };
    match kind {
        SolverKind::Batch | SolverKind::Stoc | SolverKind::Svrg => {}
        SolverKind::AsvrgGc => config.schedule = MomentumSchedule::DecayingTheta(cfg.theta0),
        SolverKind::AsvrgSc => {
            let theta = match cfg.theta {
                ThetaChoice::Value(t) => t,
                ThetaChoice::Bound => theta_upper_bound(n, b, l, config.eta)?,
                ThetaChoice::Optimal => {
                    let opt = optimal_theta_sc(m, n, b, &rate_params(problem, spectra)?)?;
                    config.eta = opt.eta;
                    opt.theta
                }
            };
            config.schedule = MomentumSchedule::ConstantTheta(theta);
            if problem.loss.strong_convexity() > 0.0 {
                let rho = rho_rate(theta, &rate_params(problem, spectra)?, &config, spectra);
                if rho >= 1.0 {
                    log::warn!("{kind}: rho = {rho:.4} >= 1, the linear-rate guarantee does not apply");
                }
            }
        }
    }
    if let (Gamma::Fixed(g), MomentumSchedule::ConstantTheta(t)) = (config.gamma, config.schedule) {
        let gm = gamma_min(config.eta, config.beta, t, spectra.ata_norm)?;
        if g < gm {
            log::warn!("{kind}: gamma = {g} is below gamma_min = {gm:.4}, G is not positive definite");
        }
    }
    Ok(config)
}

/// Runs one solver and records the epoch-0 state followed by every epoch.
/// With `max_passes` the run also stops at the first epoch that reaches the
/// budget.
pub fn run_trace<F: FiniteSum>(
    kind: SolverKind,
    problem: &Problem<F>,
    config: SolverConfig,
    max_passes: Option<f64>,
    spectra: Option<&SpectralConstants>,
    reference: Option<&ReferenceSolution>,
    test: Option<(&Dataset, LossKind)>,
) -> Result<Vec<TraceRecord>> {
    let mut solver = Solver::new(kind, problem, config, spectra)?;
    let mut records = Vec::with_capacity(config.epochs + 1);
    records.push(TraceRecord::from_state(problem, solver.state(), 0.0, reference, test)?);
    let mut wall = 0.0;
    for _ in 0..config.epochs {
        if max_passes.is_some_and(|p| solver.state().passes >= p - 1e-9) {
            break;
        }
        wall += solver.epoch()?;
        records.push(TraceRecord::from_state(problem, solver.state(), wall, reference, test)?);
    }
    Ok(records)
}

/// `ASVRG_WORKERS` if set, else the available parallelism, capped at `jobs`.
pub fn worker_count(jobs: usize) -> usize {
    let cap = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1));
    cap.min(jobs).max(1)
}

/// Applies `f` to every item on up to `workers` threads, keeping order.
pub fn parallel_map<T, R, Fn_>(items: &[T], workers: usize, f: Fn_) -> Vec<R>
where
    T: Sync,
    R: Send,
    Fn_: Fn(&T) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Final objective of a short run, for grid search. `None` if the run is
/// rejected or diverges.
fn grid_score<F: FiniteSum>(
    cfg: &ExperimentConfig,
    kind: SolverKind,
    problem: &Problem<F>,
    spectra: &SpectralConstants,
    tuning: Tuning,
) -> Option<f64> {
    let config = solver_config(cfg, kind, problem, spectra, cfg.seeds[0], tuning).ok()?;
    let trace = run_trace(kind, problem, config, cfg.max_passes, Some(spectra), None, None).ok()?;
    trace.last().map(|r| r.objective).filter(|v| v.is_finite())
}

/// Picks `(η, β)` from `eta_grid × beta_grid` by final objective on the
/// first seed. STOC-ADMM searches `stoc_eta_grid` when it is set. Empty
/// grids keep the configured value.
pub fn grid_search<F: FiniteSum>(
    cfg: &ExperimentConfig,
    kind: SolverKind,
    problem: &Problem<F>,
    spectra: &SpectralConstants,
) -> Result<Tuning> {
    let base = default_tuning(cfg, kind, problem, spectra)?;
    let eta_grid = match kind {
        SolverKind::Stoc if !cfg.stoc_eta_grid.is_empty() => &cfg.stoc_eta_grid,
        _ => &cfg.eta_grid,
    };
    if eta_grid.is_empty() && cfg.beta_grid.is_empty() {
        return Ok(base);
    }
    let etas = if eta_grid.is_empty() { vec![base.eta] } else { eta_grid.clone() };
    let betas = if cfg.beta_grid.is_empty() { vec![base.beta] } else { cfg.beta_grid.clone() };
    let candidates: Vec<Tuning> = etas
        .iter()
        .flat_map(|&eta| betas.iter().map(move |&beta| Tuning { eta, beta }))
        .collect();
    let scores = parallel_map(&candidates, worker_count(candidates.len()), |&t| {
        grid_score(cfg, kind, problem, spectra, t)
    });
    let best = candidates
        .iter()
        .zip(&scores)
        .filter_map(|(t, s)| s.map(|s| (*t, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidParameter(format!("{kind}: no grid point produced a finite run")))?;
    log::info!("{kind}: grid search chose eta = {}, beta = {}", best.0.eta, best.0.beta);
    Ok(best.0)
}

/// One finished `(solver, seed)` run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: SolverKind,
    pub seed: u64,
    pub config: SolverConfig,
    pub path: PathBuf,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub spectra: SpectralConstants,
    pub reference: ReferenceSolution,
    pub runs: Vec<RunOutcome>,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

/// `<solver>_seed<seed>.csv`, with `_<k>` appended to the k-th repeat of
/// a seed.
fn trace_file_names(kinds: &[SolverKind], seeds: &[u64]) -> Vec<(SolverKind, u64, String)> {
    let mut out = Vec::new();
    for &kind in kinds {
        let mut seen: HashMap<u64, usize> = HashMap::new();
        for &seed in seeds {
            let k = seen.entry(seed).or_insert(0);
            *k += 1;
            let name = if *k == 1 {
                format!("{}_seed{seed}.csv", kind.name())
            } else {
                format!("{}_seed{seed}_{k}.csv", kind.name())
            };
            out.push((kind, seed, name));
        }
    }
    out
}

/// Builds the problem and reference, then runs every configured solver for
/// every seed, writing one trace per run plus `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = ExperimentData::prepare(cfg)?;
    let problem = data.problem()?;
    let spectra = SpectralConstants::compute(&problem.a, SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
    log::info!(
        "n = {}, d1 = {}, d2 = {}, L = {:.4}, ‖AᵀA‖ = {:.4}, σ_min = {:.4}",
        data.train.len(),
        problem.dim(),
        problem.dual_dim(),
        problem.loss.smoothness(),
        spectra.ata_norm,
        spectra.aat_min_eig
    );
    let cache_dir = cfg.cache_dir.clone().unwrap_or_else(|| cfg.output_dir.join("cache"));
    let reference = cached_reference(&problem, cfg.reference_tol, Some(&cache_dir))
        .map_err(|e| e.with_context("reference solve"))?;
    fs::create_dir_all(&cfg.output_dir)?;

    let mut tunings = HashMap::new();
    for &kind in &cfg.solvers {
        tunings.insert(kind, grid_search(cfg, kind, &problem, &spectra)?);
    }
    let jobs = trace_file_names(&cfg.solvers, &cfg.seeds);
    let test = Some((&data.test, data.kind));
    let results = parallel_map(&jobs, worker_count(jobs.len()), |(kind, seed, name)| -> Result<RunOutcome> {
        let context = format!("{kind} seed {seed}");
        let config = solver_config(cfg, *kind, &problem, &spectra, *seed, tunings[kind])
            .map_err(|e| e.with_context(context.clone()))?;
        let records = run_trace(*kind, &problem, config, cfg.max_passes, Some(&spectra), Some(&reference), test)
            .map_err(|e| e.with_context(context.clone()))?;
        let path = cfg.output_dir.join(name);
        write_trace_file(&path, &records)?;
        Ok(RunOutcome { kind: *kind, seed: *seed, config, path, records })
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summary = Vec::new();
    for &kind in &cfg.solvers {
        let traces: Vec<Vec<TraceRecord>> =
            runs.iter().filter(|r| r.kind == kind).map(|r| r.records.clone()).collect();
        summary.extend(summarize(kind.name(), &traces));
    }
    let summary_path = cfg.output_dir.join("summary.csv");
    write_summary(&summary, std::io::BufWriter::new(File::create(&summary_path)?))?;
    Ok(ExperimentReport { spectra, reference, runs, summary, summary_path })
}
