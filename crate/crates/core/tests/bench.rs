use fpddp::bench::{
    linspace, performance_profile, read_records, run_sweep, write_profile, write_records, Metric,
    RunRecord, RunStatus, SolverKind, SweepConfig,
};
use fpddp::problems::ProblemId;
use fpddp::SolverSettings;
use proptest::prelude::*;

fn record(instance: usize, solver: &str, status: RunStatus, evals: usize) -> RunRecord {
    RunRecord {
        problem: "cart_pendulum".into(),
        solver: solver.into(),
        sigma: None,
        obstacle: Some(1.0 + instance as f64 * 0.25),
        status,
        iterations: evals,
        hessian_evals: evals,
        wall_time: evals as f64 * 1e-3,
        objective: 0.0,
        kkt: 0.0,
        defect: 0.0,
    }
}

#[test]
fn sweep_records_are_ordered_and_reproducible() {
    let config = SweepConfig {
        problem: ProblemId::CartPendulum,
        solvers: vec![SolverKind::FpDdp, SolverKind::Dss],
        lo: 2.0,
        hi: 3.0,
        n: 2,
        settings: SolverSettings::default(),
        jobs: Some(2),
    };
    let parallel = run_sweep(&config).unwrap();
    let serial = run_sweep(&SweepConfig {
        jobs: Some(1),
        ..config.clone()
    })
    .unwrap();
    assert_eq!(parallel.len(), 4);
    let keys: Vec<(String, Option<f64>)> = parallel
        .iter()
        .map(|r| (r.solver.clone(), r.obstacle))
        .collect();
    assert_eq!(
        keys,
        vec![
            ("fpddp".into(), Some(2.0)),
            ("fpddp".into(), Some(3.0)),
            ("dss".into(), Some(2.0)),
            ("dss".into(), Some(3.0)),
        ]
    );
    for (a, b) in parallel.iter().zip(&serial) {
        assert!(a.same_outcome(b), "{a:?} vs {b:?}");
    }
    assert!(parallel.iter().all(|r| r.wall_time > 0.0));
}

#[test]
fn sweep_rejects_bad_ranges() {
    let config = SweepConfig {
        problem: ProblemId::CartPendulum,
        solvers: vec![SolverKind::FpDdp],
        lo: 1.0,
        hi: 9.0,
        n: 3,
        settings: SolverSettings::default(),
        jobs: None,
    };
    assert!(run_sweep(&config).is_err());
    assert!(run_sweep(&SweepConfig {
        hi: 0.5,
        ..config.clone()
    })
    .is_err());
    assert!(run_sweep(&SweepConfig {
        solvers: vec![],
        hi: 2.0,
        ..config
    })
    .is_err());
    assert_eq!(linspace(1.0, 4.3, 100).last(), Some(&4.3));
}

#[test]
fn dominating_solver_has_the_higher_curve() {
    let mut records = Vec::new();
    for i in 0..5 {
        records.push(record(i, "fast", RunStatus::Feasible, 2 + i));
        records.push(record(
            i,
            "slow",
            if i == 4 {
                RunStatus::MaxIter
            } else {
                RunStatus::Feasible
            },
            4 + 3 * i,
        ));
    }
    let profile = performance_profile(&records, Metric::HessianEvals).unwrap();
    for &tau in profile.taus.iter().chain([1.0, 1e9].iter()) {
        assert!(profile.rho("fast", tau).unwrap() >= profile.rho("slow", tau).unwrap());
    }
    assert_eq!(profile.rho("fast", 1.0), Some(1.0));
    assert_eq!(profile.rho("slow", 1.0), Some(0.0));
    assert_eq!(profile.rho("slow", f64::INFINITY), Some(0.8));
}

#[test]
fn unsolved_instances_are_excluded() {
    let records = vec![
        record(0, "a", RunStatus::Feasible, 3),
        record(0, "b", RunStatus::Feasible, 6),
        record(1, "a", RunStatus::Stationary, 3),
        record(1, "b", RunStatus::RegFailure, 3),
    ];
    let profile = performance_profile(&records, Metric::HessianEvals).unwrap();
    assert_eq!(profile.instances.len(), 1);
    assert_eq!(profile.excluded.len(), 1);
    let mut out = Vec::new();
    write_profile(&mut out, &profile).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(
        text.lines().collect::<Vec<_>>(),
        ["tau,a,b", "1,1,0", "2,1,1", "inf,1,1"]
    );
}

fn arb_status() -> impl Strategy<Value = RunStatus> {
    prop_oneof![
        Just(RunStatus::Feasible),
        Just(RunStatus::Stationary),
        Just(RunStatus::MaxIter),
        Just(RunStatus::RegFailure),
        Just(RunStatus::Error),
    ]
}

fn arb_record() -> impl Strategy<Value = RunRecord> {
    (
        prop_oneof![Just("fpddp"), Just("dss"), Just("dms")],
        proptest::option::of(1e-4..10.0f64),
        proptest::option::of(-10.0..10.0f64),
        arb_status(),
        0..500usize,
        0..500usize,
        (0.0..10.0f64, 0.0..1.0f64, 0.0..1e6f64, 0.0..1.0f64),
    )
        .prop_map(
            |(solver, sigma, obstacle, status, iterations, hessian_evals, (w, f, k, d))| {
                RunRecord {
                    problem: "cart_pendulum".into(),
                    solver: solver.into(),
                    sigma,
                    obstacle,
                    status,
                    iterations,
                    hessian_evals,
                    wall_time: w,
                    objective: f,
                    kkt: k,
                    defect: d,
                }
            },
        )
}

/// Instances × solvers grid with random outcomes and costs.
fn arb_grid() -> impl Strategy<Value = Vec<RunRecord>> {
    (1..6usize, 1..4usize).prop_flat_map(|(n, s)| {
        proptest::collection::vec((any::<bool>(), 1..40usize), n * s).prop_map(move |cells| {
            cells
                .iter()
                .enumerate()
                .map(|(idx, &(ok, evals))| {
                    let status = if ok {
                        RunStatus::Feasible
                    } else {
                        RunStatus::MaxIter
                    };
                    record(idx / s, ["a", "b", "c"][idx % s], status, evals)
                })
                .collect()
        })
    })
}

proptest! {
    #[test]
    fn records_survive_a_csv_round_trip(records in proptest::collection::vec(arb_record(), 0..20)) {
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn profile_curves_are_consistent(records in arb_grid()) {
        let solved_any = records.iter().any(|r| r.status.solved());
        let profile = performance_profile(&records, Metric::HessianEvals);
        prop_assert_eq!(profile.is_ok(), solved_any);
        let Ok(profile) = profile else { return Ok(()) };
        let n = profile.instances.len();

        for (s, curve) in profile.curves.iter().enumerate() {
            prop_assert!(curve.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(curve.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let name = &profile.solvers[s];
            let solved = records
                .iter()
                .filter(|r| r.solver == *name && r.status.solved())
                .filter(|r| profile.instances.contains(&r.instance_label()))
                .count();
            prop_assert_eq!(profile.rho(name, f64::INFINITY).unwrap(), solved as f64 / n as f64);
        }
        prop_assert!(profile.taus.first() == Some(&1.0));
        let best: f64 = profile.solvers.iter().map(|s| profile.rho(s, 1.0).unwrap()).sum();
        prop_assert!(best * n as f64 >= n as f64 - 1e-9);
    }
}
