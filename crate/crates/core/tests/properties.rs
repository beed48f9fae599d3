use proptest::prelude::*;

use soapbubble::bubbling::equal_radius::separate;
use soapbubble::bubbling::{Ball, ConstantsLedger};
use soapbubble::geometry::{closed_form_summary, Family, GeometricSummary, Shape};
use soapbubble::grid::{BBox, Grid};
use soapbubble::identities::holder_corollary_check;
use soapbubble::quadrature::volume;
use soapbubble::tubular::annulus_tubular_reports;
use soapbubble::vecmath::{det_sum, dist};

fn measure() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0..5.0f64, 0.01..2.0f64), 1..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summary_scale_covariance(pairs in measure(), dim in 2usize..4, lambda in 0.1..10.0f64, vol in 0.5..5.0f64) {
        let per: f64 = pairs.iter().map(|p| p.1).sum();
        let a = GeometricSummary::from_measure(dim, vol, per, 1.0, pairs.clone(), false);
        let n = dim as i32;
        let scaled: Vec<_> = pairs.iter().map(|&(h, w)| (h / lambda, w * lambda.powi(n - 1))).collect();
        let b = GeometricSummary::from_measure(dim, vol * lambda.powi(n), per * lambda.powi(n - 1), lambda, scaled, false);
        prop_assert!((b.r - lambda * a.r).abs() <= 1e-12 * b.r);
        prop_assert!((b.h0 * lambda - a.h0).abs() <= 1e-12 * a.h0);
        let expect = a.l1_deviation * lambda.powi(n - 2);
        prop_assert!((b.l1_deviation - expect).abs() <= 1e-10 * expect.max(1e-300));
    }

    #[test]
    fn annulus_delta_scales(r_in in 0.05..0.9f64, lambda in 0.2..5.0f64, dim in 2usize..4) {
        let s = Shape::new(dim, Family::Annulus { r_out: 1.0, r_in }).unwrap();
        let a = closed_form_summary(&s).unwrap();
        let b = closed_form_summary(&s.scaled(lambda)).unwrap();
        let expect = a.delta * lambda.powi(dim as i32 - 2);
        prop_assert!((b.delta - expect).abs() <= 1e-10 * expect.max(1.0));
        prop_assert!((b.m0_minus * lambda - a.m0_minus).abs() <= 1e-10 * a.m0_minus);
    }

    #[test]
    fn holder_chain(pairs in measure(), dim in 3usize..6, vol in 0.5..5.0f64) {
        let per: f64 = pairs.iter().map(|p| p.1).sum();
        let s = GeometricSummary::from_measure(dim, vol, per, 1.0, pairs, false);
        prop_assert!(s.delta <= s.l1_deviation * (1.0 + 1e-12));
        let c = holder_corollary_check(&s).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn det_sum_independent_of_threads(v in prop::collection::vec(-1e6..1e6f64, 0..20000)) {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| det_sum(&v));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| det_sum(&v));
        prop_assert_eq!(one.to_bits(), four.to_bits());
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum();
        prop_assert!((one - naive).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn half_plane_volume_exact(theta in 0.0..std::f64::consts::TAU, c in -0.8..0.8f64, h in 0.02..0.2f64) {
        let bbox = BBox { min: [-1.0, -1.0, 0.0], max: [1.0, 1.0, 0.0] };
        let g = Grid::covering(&bbox, 2, h);
        let (nx, ny) = (theta.cos(), theta.sin());
        let level: Vec<f64> = (0..g.len()).map(|i| { let p = g.point(i); nx * p[0] + ny * p[1] - c }).collect();
        let neg: Vec<f64> = level.iter().map(|v| -v).collect();
        let total = (g.n[0] - 1) as f64 * (g.n[1] - 1) as f64 * h * h;
        prop_assert!((volume(&g, &level) + volume(&g, &neg) - total).abs() < 1e-10);
    }

    #[test]
    fn ledger_constants_positive(dim in 2usize..4, d in 0.5..10.0f64, m0 in 0.0..50.0f64, g in 0.1..10.0f64, frac in 0.01..1.0f64) {
        let vol = frac * soapbubble::vecmath::unit_ball_volume(dim) * (d / 2.0f64).powi(dim as i32);
        let l = ConstantsLedger::new(dim, d, m0, g, vol, None);
        prop_assert!(l.all_finite_positive());
        prop_assert!(l.min_threshold() <= 1.0);
        let a = l.alpha;
        prop_assert!((1.0 - (dim as f64 + 3.0) * a - a / 2.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_tubes_below_bound(r_in in 0.01..1.5f64, eta in 0.001..3.0f64, dim in 2usize..4) {
        let s = Shape::new(dim, Family::Annulus { r_out: 2.0, r_in }).unwrap();
        let sum = closed_form_summary(&s).unwrap();
        let r = &annulus_tubular_reports(&s, &sum, &[eta]).unwrap()[0];
        prop_assert!(r.holds, "{:?}", r);
        prop_assert!(r.measured <= sum.volume * (1.0 + 1e-12));
    }

    #[test]
    fn separation_yields_disjoint_balls(pts in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..8), r in 0.1..0.6f64) {
        let mut balls: Vec<Ball> = pts.iter().map(|&(x, y)| Ball { z: [x, y, 0.0], rho: r }).collect();
        if separate(&mut balls).is_ok() {
            for i in 0..balls.len() {
                for j in i + 1..balls.len() {
                    prop_assert!(dist(balls[i].z, balls[j].z) >= 2.0 * r * (1.0 - 1e-9));
                }
            }
        }
    }
}
