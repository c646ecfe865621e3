mod common;

use std::time::Instant;

use common::{random_qp, AffineModel};
use fpddp::build_feasibility_problem;
use fpddp::ocp::{dynamics_defect, Trajectory};
use fpddp::riccati::{
    backward_sweep, dense_qp_oracle, linear_rollout, qp_optimal_objective,
    qp_optimal_objective_dual, QpStep,
};
use fpddp::solver::nonlinear_rollout;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zero_base(nx: usize, nu: usize, n: usize) -> Trajectory {
    Trajectory {
        init: DVector::zeros(nx),
        states: vec![DVector::zeros(nx); n + 1],
        controls: vec![DVector::zeros(nu); n],
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check_against_oracle(seed: u64, with_defects: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, nu, n) = (
        rng.gen_range(1..=4),
        rng.gen_range(1..=2),
        rng.gen_range(1..=10),
    );
    let qp = random_qp(&mut rng, nx, nu, n, with_defects);
    let bp = backward_sweep(&qp).unwrap();
    let (step, _) = linear_rollout(&bp, &qp, &zero_base(nx, nu, n), 1.0);
    let oracle = dense_qp_oracle(&qp).unwrap();
    let diff = step.max_abs_diff(&oracle.step);
    assert!(diff <= 1e-8, "seed {seed}: primal difference {diff:e}");
    let primal = qp_optimal_objective(&bp);
    let dual = qp_optimal_objective_dual(&bp);
    assert!(
        rel(primal, oracle.objective) <= 1e-10,
        "seed {seed}: {primal} vs {}",
        oracle.objective
    );
    assert!(
        rel(dual, oracle.objective) <= 1e-10,
        "seed {seed}: {dual} vs {}",
        oracle.objective
    );
    assert!(rel(primal, dual) <= 1e-10);
    assert!(qp.dynamics_residual(&step) <= 1e-10);
    assert!(rel(qp.objective(&step), oracle.objective) <= 1e-8);
}

#[test]
fn thirty_seeded_instances_match_dense_oracle() {
    for seed in 0..30 {
        check_against_oracle(seed, false);
    }
}

#[test]
fn thirty_seeded_instances_with_offsets_match_dense_oracle() {
    for seed in 100..130 {
        check_against_oracle(seed, true);
    }
}

#[test]
fn oracle_honors_linearized_dynamics_with_offsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let qp = random_qp(&mut rng, 3, 2, 6, true);
    let oracle = dense_qp_oracle(&qp).unwrap();
    assert!(qp.dynamics_residual(&oracle.step) <= 1e-10);
}

#[test]
fn optimal_objective_is_nonpositive_and_zero_only_without_feedforward() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let mut qp = random_qp(&mut rng, 3, 1, 5, false);
        let bp = backward_sweep(&qp).unwrap();
        assert!(qp_optimal_objective(&bp) < 0.0);
        assert!(bp.max_feedforward() > 1e-12);
        for s in &mut qp.stages {
            s.lx.fill(0.0);
            s.lu.fill(0.0);
        }
        qp.vx.fill(0.0);
        let bp = backward_sweep(&qp).unwrap();
        assert_eq!(qp_optimal_objective(&bp), 0.0);
        assert!(bp.max_feedforward() <= 1e-12);
    }
}

#[test]
fn sweep_cost_grows_linearly_with_horizon() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let time = |n: usize, rng: &mut ChaCha8Rng| {
        let qp = random_qp(rng, 4, 2, n, false);
        let start = Instant::now();
        for _ in 0..10 {
            std::hint::black_box(backward_sweep(&qp).unwrap());
        }
        start.elapsed().as_secs_f64()
    };
    time(100, &mut rng);
    let short = (0..3)
        .map(|_| time(200, &mut rng))
        .fold(f64::INFINITY, f64::min);
    let long = (0..3)
        .map(|_| time(400, &mut rng))
        .fold(f64::INFINITY, f64::min);
    assert!(
        long < 3.0 * short,
        "N = 200: {short:.4}s, N = 400: {long:.4}s"
    );
}

#[test]
fn linear_and_nonlinear_rollouts_coincide_on_affine_dynamics() {
    let model = AffineModel::double_integrator(15);
    let focp = build_feasibility_problem(&model).unwrap();
    let base = model.zero_controls();
    let qp = focp.stage_data(&base, 1e-3).unwrap();
    let bp = backward_sweep(&qp).unwrap();
    for alpha in [1.0, 0.5, 0.25, 0.125, 0.01] {
        let (_, linear) = linear_rollout(&bp, &qp, &base, alpha);
        let nonlinear = nonlinear_rollout(&model, &bp, &base, alpha).unwrap();
        assert!(linear.max_abs_diff(&nonlinear) <= 1e-12, "alpha {alpha}");
    }
}

#[test]
fn zero_gradient_step_is_zero() {
    let model = AffineModel::double_integrator(5);
    let base = model.zero_controls();
    let focp = build_feasibility_problem(&model).unwrap();
    let mut qp = focp.stage_data(&base, 0.0).unwrap();
    for s in &mut qp.stages {
        s.lx.fill(0.0);
        s.lu.fill(0.0);
        s.lxx.fill_with_identity();
        s.luu.fill_with_identity();
        s.lux.fill(0.0);
    }
    qp.vx.fill(0.0);
    qp.vxx.fill_with_identity();
    let bp = backward_sweep(&qp).unwrap();
    let (step, trial) = linear_rollout(&bp, &qp, &base, 1.0);
    assert_eq!(step.inf_norm(), 0.0);
    assert_eq!(trial, base);
    assert_eq!(QpStep::between(&base, &trial).inf_norm(), 0.0);
    assert_eq!(dynamics_defect(&model, &trial).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn riccati_matches_oracle_on_random_instances(seed in any::<u64>(), defects in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, nu, n) = (rng.gen_range(1..=4), rng.gen_range(1..=2), rng.gen_range(1..=10));
        let qp = random_qp(&mut rng, nx, nu, n, defects);
        let bp = backward_sweep(&qp).unwrap();
        let (step, _) = linear_rollout(&bp, &qp, &zero_base(nx, nu, n), 1.0);
        let oracle = dense_qp_oracle(&qp).unwrap();
        prop_assert!(step.max_abs_diff(&oracle.step) <= 1e-8);
        prop_assert!(rel(qp_optimal_objective(&bp), qp_optimal_objective_dual(&bp)) <= 1e-10);
        if !defects {
            prop_assert!(qp_optimal_objective(&bp) <= 0.0);
        }
    }

    #[test]
    fn value_hessians_are_symmetric_psd(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_qp(&mut rng, 3, 2, 6, false);
        let bp = backward_sweep(&qp).unwrap();
        for p in &bp.value_hess {
            prop_assert!((p - p.transpose()).amax() <= 1e-12 * p.amax().max(1.0));
            let min_eig = p.clone().symmetric_eigen().eigenvalues.min();
            prop_assert!(min_eig >= -1e-10 * p.amax().max(1.0));
        }
        for g in &bp.stages {
            prop_assert!((g.factor().reconstruct() - &g.hessian).amax() <= 1e-10 * g.hessian.amax());
        }
    }
}
