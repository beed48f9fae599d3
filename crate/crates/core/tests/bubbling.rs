use soapbubble::bubbling::*;
use soapbubble::geometry::*;
use soapbubble::torsion::{solve_torsion, TorsionSolution};
use soapbubble::Error;

fn setup(shape: Shape, h: f64) -> (ImplicitDomain, TorsionSolution, GeometricSummary, f64) {
    let d = ImplicitDomain::build(shape, Some(h)).unwrap();
    let sol = solve_torsion(&d).unwrap();
    let b = sample_boundary(&d.shape, &d.grid, &d.level, 2000).unwrap();
    let s = geometric_summary(&d, &b).unwrap();
    let g = sol.gradient_bound(&sol.normal_derivative(&b));
    (d, sol, s, g)
}

fn disk() -> Shape {
    Shape::new(2, Family::Ball { center: [0.0; 3], rho: 1.0 }).unwrap()
}

fn two_disks() -> Shape {
    Shape::new(2, Family::UnionOfBalls { centers: vec![[-1.5, 0.0, 0.0], [1.5, 0.0, 0.0]], radii: vec![1.0, 1.0] }).unwrap()
}

#[test]
fn disk_level_sets_are_circles() {
    let h = 1.0 / 64.0;
    let (_, sol, _, _) = setup(disk(), h);
    for eps in [0.0, 0.05, 0.1, 0.2] {
        let c = sublevel_decomposition(&sol, eps).unwrap();
        assert_eq!(c.len(), 1);
        let r = (1.0f64 - 4.0 * eps).sqrt();
        assert!(c[0].z.iter().all(|v| v.abs() <= h));
        assert!((c[0].rho_int - r).abs() < 1e-3 && (c[0].rho_ext - r).abs() < 1e-3, "{eps}: {:?}", c[0]);
        assert!(c[0].rho_int <= c[0].rho_ext);
    }
    let e = sublevel_decomposition(&sol, 0.25).unwrap_err();
    assert!(matches!(e, Error::EmptySublevel { .. }));
}

#[test]
fn two_disks_split_and_filter() {
    let h = 1.0 / 64.0;
    let (d, sol, s, g) = setup(two_disks(), h);
    // 2 eps = 0.1: the level u = -0.1 of (r^2 - 1)/2 is r = sqrt(0.8)
    let c = sublevel_decomposition(&sol, 0.05).unwrap();
    assert_eq!(c.len(), 2);
    for comp in &c {
        assert!((comp.rho_int - 0.8f64.sqrt()).abs() <= 2.0 * h, "{comp:?}");
    }
    let ledger = ConstantsLedger::new(2, s.diameter, s.m0_minus, g, s.volume, None);
    let c0 = sublevel_decomposition(&sol, 0.0).unwrap();
    let f = ball_filter(&c0, s.r, s.delta, &ledger, FilterMode::Paper, 2.0 * h).unwrap();
    assert_eq!(f.m, 2);
    assert!(f.unclassified.is_empty());
    let balls: Vec<Ball> = c0.iter().map(|c| Ball { z: c.z, rho: c.rho_int }).collect();
    let m = bubble_metrics(&d, &s, &balls).unwrap();
    assert!(m.sym_diff <= 3e-2 && m.hausdorff <= 2.0 * h && m.perim_diff <= 5e-2);
    assert!((m.sym_diff - m.sym_diff_grid).abs() < 1e-2);
    let er = equal_radius_family(&balls, s.r, &d, &s).unwrap();
    assert_eq!(er.steps, 0);
    assert!(er.displacements.iter().all(|&x| x == 0.0));
    let cv = convexity_check(&sol, &c0, &ledger, s.delta);
    assert!((cv.min_eigenvalue - 1.0).abs() < 1e-6, "{cv:?}");
}

#[test]
fn dumbbell_splits_into_two_lobes() {
    let h = 1.0 / 64.0;
    let (d, sol, s, g) = setup(Shape::new(2, Family::Dumbbell { d: 3.0, rho: 1.0, w: 0.2, k: 0.05 }).unwrap(), h);
    let eps = split_epsilon(&sol).expect("two significant minima");
    let c = sublevel_decomposition(&sol, eps).unwrap();
    assert_eq!(c.len(), 2);
    assert!((c[0].z[0] + c[1].z[0]).abs() < 2.0 * h);
    // Just above the neck the set is still connected.
    let neck = -sol.u[sol.grid.index(sol.grid.cell_of([0.0, 0.0, 0.0]))];
    assert_eq!(sublevel_decomposition(&sol, 0.4 * neck).unwrap().len(), 1);
    let ledger = ConstantsLedger::new(2, s.diameter, s.m0_minus, g, s.volume, None);
    let f = ball_filter(&c, s.r, s.delta, &ledger, FilterMode::Empirical, 2.0 * h).unwrap();
    assert_eq!(f.m, 2);
    let balls: Vec<Ball> = c.iter().map(|c| Ball { z: c.z, rho: c.rho_int }).collect();
    let m = bubble_metrics(&d, &s, &balls).unwrap();
    // At least the neck rectangle is missed.
    assert!(m.sym_diff > 2.0 * 0.2 * 1.0);
    let paper = ball_filter(&c, s.r, s.delta, &ledger, FilterMode::Paper, 2.0 * h);
    assert!(matches!(paper, Err(Error::Precondition(_))), "delta > 1 here");
}

#[test]
fn equal_radius_on_dumbbell() {
    let h = 1.0 / 64.0;
    let shape = Shape::new(2, Family::Dumbbell { d: 3.0, rho: 1.0, w: 0.15, k: 0.05 }).unwrap();
    let (d, sol, s, _) = setup(shape, h);
    let c = sublevel_decomposition(&sol, split_epsilon(&sol).unwrap()).unwrap();
    let balls: Vec<Ball> = c.iter().map(|c| Ball { z: c.z, rho: c.rho_int }).collect();
    let er = equal_radius_family(&balls, s.r, &d, &s).unwrap();
    assert!(er.checks.iter().all(|c| c.holds), "{:?}", er.checks);
    assert!(er.balls.iter().all(|b| b.rho == s.r));
}

#[test]
fn protruding_ball_is_reported() {
    let (d, _, s, _) = setup(disk(), 1.0 / 32.0);
    let e = bubble_metrics(&d, &s, &[Ball { z: [0.5, 0.0, 0.0], rho: 0.8 }]).unwrap_err();
    assert!(matches!(e, Error::ContainmentViolation { ball: 0, .. }));
    let e = bubble_metrics(&d, &s, &[Ball { z: [-0.3, 0.0, 0.0], rho: 0.4 }, Ball { z: [0.3, 0.0, 0.0], rho: 0.4 }]).unwrap_err();
    assert!(matches!(e, Error::OverlapViolation { i: 0, j: 1, .. }));
}

#[test]
fn disk_theorem_bounds_hold_with_zero_deficit() {
    let h = 1.0 / 64.0;
    let (d, sol, s, g) = setup(disk(), h);
    assert_eq!(s.delta, 0.0);
    let ledger = ConstantsLedger::new(2, s.diameter, s.m0_minus, g, s.volume, None);
    let c = sublevel_decomposition(&sol, 0.0).unwrap();
    let balls: Vec<Ball> = c.iter().map(|c| Ball { z: c.z, rho: c.rho_int }).collect();
    let m = bubble_metrics(&d, &s, &balls).unwrap();
    let t = theorem_bound_check(&m, &s, 0.0, &ledger, 1, h);
    assert_eq!(t.path, BoundPath::Constructive);
    assert!(t.all_hold(), "{t:?}");
}
