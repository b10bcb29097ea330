use snewton_bench::catalog::{catalog, running_example};
use snewton_bench::experiments::{
    cluster_trace, run_convergence, run_efficiency, run_precision, run_robustness,
    run_robustness_from, run_stability, run_table1, time_iteration,
};
use snewton_core::C64;

#[test]
fn running_example_reaches_ten_digits_in_three_steps() {
    let t = run_convergence(&running_example(), 2, 3, 0.1, 0).unwrap();
    let e = t.exponents().unwrap();
    assert_eq!(e.len(), 4);
    assert!(e[1..].iter().any(|x| x.map_or(true, |v| v <= -10)), "{e:?}");
}

#[test]
fn benchmark_exponents_never_increase_above_the_floor() {
    let r = run_table1(&catalog(), 3, 0).unwrap();
    assert_eq!(r.rows.len(), 6);
    for row in &r.rows {
        let e: Vec<i32> = row
            .exponents
            .iter()
            .map(|x| x.unwrap_or(i32::MIN))
            .collect();
        for w in e.windows(2) {
            assert!(w[1] <= w[0] || w[0] <= -14, "{}: {e:?}", row.system);
        }
    }
}

#[test]
fn precision_rows_start_at_the_stated_distance() {
    let r = run_precision(3, 0).unwrap();
    let first: Vec<Option<i32>> = r.rows.iter().map(|row| row.exponents[0]).collect();
    // ||(h, h, h)|| = sqrt(3) h
    assert_eq!(first, vec![Some(-4), Some(-3), Some(-2)]);
}

#[test]
fn far_cluster_converges_to_the_origin() {
    let (t, target) = cluster_trace(2, 1e-2, 3, 0).unwrap();
    assert_eq!(t.steps[0].kappa, 2);
    assert!(target.iter().all(|z| *z == C64::default()));
    assert!(*t.errors.unwrap().last().unwrap() < 1e-9);
}

#[test]
fn vanishing_linear_term_behaves_like_a_triple_square() {
    let r = run_stability(&[20], &[1e-2], 0).unwrap();
    assert_eq!(r.rows[0].kappa, Some(3));
    let e = r.rows[0].errors.last().unwrap();
    assert!(*e < 1e-12, "{e:e}");
}

#[test]
fn stability_grid_has_one_row_per_pair() {
    let r = run_stability(&[2, 3], &[1e-2, 1e-1], 0).unwrap();
    assert_eq!(r.rows.len(), 4);
    let kappas: Vec<_> = r.rows.iter().map(|row| row.kappa.unwrap()).collect();
    assert_eq!(kappas, vec![2, 3, 3, 3]);
}

#[test]
fn efficiency_smoke_run() {
    let r = run_efficiency(&[(2, 1)], 1, 0).unwrap();
    assert_eq!(r.rows.len(), 1);
    let t = r.rows[0].timing.unwrap();
    assert!(t.two_step > 0.0 && t.lvz > 0.0);
}

#[test]
fn iteration_cost_grows_with_n() {
    let times: Vec<_> = [10, 25, 50]
        .iter()
        .map(|&n| time_iteration(n, 2, 1, 0).unwrap())
        .collect();
    for w in times.windows(2) {
        assert!(w[0].two_step < w[1].two_step, "{times:?}");
        assert!(w[0].lvz < w[1].lvz, "{times:?}");
    }
}

#[test]
fn robustness_report_limits() {
    let r = run_robustness(0).unwrap();
    assert_eq!(r.rows.len(), 2);
    let two = &r.rows[0];
    assert!(two.errors.len() <= 7 && *two.errors.last().unwrap() <= 1e-6);
    let gn = &r.rows[1];
    assert_eq!(gn.stationary, Some(true));
    let l = gn.limit.as_ref().unwrap();
    assert!((l[0][0] - 0.5).abs() < 1e-3 && (l[1][0] - 0.612372).abs() < 1e-3);
}

#[test]
fn robustness_from_the_origin_stops_at_once() {
    let r = run_robustness_from(&[C64::default(); 2], 0).unwrap();
    assert_eq!(r.rows[0].exponents, vec![None]);
    assert_eq!(r.rows[1].converged, Some(true));
    assert_eq!(r.rows[1].errors, vec![0.0]);
}

#[test]
fn reports_are_reproducible() {
    let a = run_table1(&catalog(), 3, 5).unwrap().to_json(false);
    let b = run_table1(&catalog(), 3, 5).unwrap().to_json(false);
    assert_eq!(a.to_string(), b.to_string());
}
