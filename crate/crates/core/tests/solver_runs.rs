//! Every solver on every problem family: finite iterates and a final gap
//! below the first-epoch gap.

use asvrg_admm::harness::experiment::{run_trace, ExperimentData};
use asvrg_admm::harness::config::{DataSource, ExperimentConfig, ProblemKind};
use asvrg_admm::linalg::SpectralConstants;
use asvrg_admm::losses::FiniteSum;
use asvrg_admm::metrics::{compute_reference, kkt_residuals};
use asvrg_admm::solvers::{Gamma, MomentumSchedule, SolverConfig, SolverKind};

fn config_for(kind: SolverKind, l: f64, n: usize) -> SolverConfig {
    let b = 10;
    let vr = kind.is_variance_reduced();
    SolverConfig {
        m: if vr { SolverConfig::default_epoch_length(n, b) } else { 1 },
        eta: match kind {
            SolverKind::Stoc => 2.0 / l,
            SolverKind::Batch => 1.0,
            _ => 0.4 / l,
        },
        beta: 1.0,
        batch_size: if kind == SolverKind::Stoc { 1 } else { b },
        gamma: Gamma::Fixed(1.0),
        epochs: if kind == SolverKind::Stoc { 15 } else { 10 },
        seed: 7,
        schedule: match kind {
            SolverKind::AsvrgGc => MomentumSchedule::DecayingTheta(None),
            SolverKind::AsvrgSc => MomentumSchedule::ConstantTheta(0.6),
            _ => MomentumSchedule::FixedOne,
        },
        ..SolverConfig::default()
    }
}

#[test]
fn all_solvers_make_progress_on_all_problems() {
    for problem_kind in [ProblemKind::FusedLasso, ProblemKind::GgLogistic, ProblemKind::GgSvm] {
        let cfg = ExperimentConfig {
            problem: problem_kind,
            data: DataSource::Grouped { n: 400, d: 20 },
            lambda1: 1e-3,
            ..ExperimentConfig::default()
        };
        let data = ExperimentData::prepare(&cfg).unwrap();
        let p = data.problem().unwrap();
        let spectra = SpectralConstants::compute(&p.a, 1e-10, 1_000_000).unwrap();
        let reference = compute_reference(&p, 1e-10).unwrap();
        let kkt = kkt_residuals(&p, &reference.x_star, &reference.y_star, &reference.lambda_star, reference.beta);
        assert!(kkt.max() <= 1e-10, "{problem_kind:?}: {kkt:?}");
        let l = p.loss.smoothness();
        for kind in SolverKind::ALL {
            if kind == SolverKind::AsvrgSc && !problem_kind.is_strongly_convex() {
                continue;
            }
            let sc = config_for(kind, l, p.loss.num_samples());
            let tr = run_trace(kind, &p, sc, None, Some(&spectra), Some(&reference), Some((&data.test, data.kind)))
                .unwrap_or_else(|e| panic!("{problem_kind:?}/{kind}: {e}"));
            for r in &tr {
                assert!(r.objective.is_finite() && r.sup_z.is_finite() && r.sup_lambda.is_finite());
                assert!(r.objective_gap >= -1e-9, "{problem_kind:?}/{kind}: gap {}", r.objective_gap);
            }
            let (first, last) = (tr[1].objective_gap, tr.last().unwrap().objective_gap);
            assert!(last < first, "{problem_kind:?}/{kind}: gap {first:.3e} -> {last:.3e}");
        }
    }
}

#[test]
fn fused_lasso_preset_favors_the_accelerated_solver_at_32_epochs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        output_dir: dir.path().to_path_buf(),
        solvers: vec![SolverKind::AsvrgGc, SolverKind::Svrg],
        epochs: 32,
        reference_tol: 1e-9,
        ..ExperimentConfig::default()
    };
    assert_eq!(cfg.problem, ProblemKind::FusedLasso);
    let l = ExperimentData::prepare(&cfg).unwrap().problem().unwrap().loss.smoothness();
    cfg.eta = 0.4 / l;
    let report = asvrg_admm::harness::run_experiment(&cfg).unwrap();
    let gap = |k: SolverKind| report.runs.iter().find(|r| r.kind == k).unwrap().records[32].objective_gap;
    assert!(gap(SolverKind::AsvrgGc) < gap(SolverKind::Svrg), "{} vs {}", gap(SolverKind::AsvrgGc), gap(SolverKind::Svrg));
}
