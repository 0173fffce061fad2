use angwalk::criteria::drift_alpha;
use angwalk::hull_tracker::{inscribed_radius, HullObserver, HullState};
use angwalk::projection_classifier::ProjectionObserver;
use angwalk::pruitt::{pruitt_diagnostic, u_sequence, TailFunction};
use angwalk::rng;
use angwalk::samplers::{make_increment_sampler, IncrementSpec, ScalarLaw};
use angwalk::sphere_geom::{direction_grid, hat, s_hull, s_hull_contains, UnitVec};
use angwalk::walk_engine::{biggest_jump_bound_check, run_walk, WalkState};
use angwalk::Error;
use proptest::prelude::*;

fn lattice_path(seed: u64, n: u64) -> Vec<[f64; 2]> {
    let spec = IncrementSpec::coordinate_product(vec![
        ScalarLaw::Rademacher,
        ScalarLaw::STwoSided { alpha: 1.5 },
    ]);
    let sampler = make_increment_sampler(&spec).unwrap();
    let mut r = rng::stream(seed, 0);
    let mut p = [0.0, 0.0];
    let mut out = vec![p];
    for _ in 0..n {
        let x = sampler.sample_vec(&mut r);
        p = [p[0] + x[0], p[1] + x[1]];
        out.push(p);
    }
    out
}

/// Gift-wrapping hull and the inscribed radius about the origin, computed
/// without the crate's hull code.
fn brute_inscribed_radius(pts: &[[f64; 2]]) -> f64 {
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut edges = Vec::new();
    for &a in pts {
        for &b in pts {
            if a == b {
                continue;
            }
            // a -> b is a hull edge iff every point is on its left or on the segment line
            if pts.iter().all(|&c| cross(a, b, c) >= 0.0) {
                edges.push((a, b));
            }
        }
    }
    if edges.len() < 3 {
        return 0.0;
    }
    let mut r = f64::INFINITY;
    for (a, b) in edges {
        let c = cross(a, b, [0.0, 0.0]);
        if c <= 0.0 {
            return 0.0;
        }
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        r = r.min(c / len);
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inscribed_radius_matches_brute_force(seed in any::<u64>(), n in 3u64..120) {
        let pts = lattice_path(seed, n);
        let mut h = HullState::with_defaults(2).unwrap();
        pts.iter().for_each(|p| h.push(p));
        let r = inscribed_radius(&mut h);
        let want = brute_inscribed_radius(&pts);
        prop_assert!((r - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", r, want);
        // every point of the open ball B(0, r) lies in the hull
        let mut g = rng::stream(seed, 1);
        for _ in 0..100 {
            let t: f64 = rand::Rng::random::<f64>(&mut g) * std::f64::consts::TAU;
            let s: f64 = rand::Rng::random::<f64>(&mut g) * (r - 1e-6).max(0.0);
            prop_assert!(h.contains(&[s * t.cos(), s * t.sin()]).unwrap());
        }
    }

    #[test]
    fn positive_combinations_stay_in_the_s_hull(
        d in 2usize..5,
        raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..6),
        w in prop::collection::vec(0.01f64..10.0, 6),
    ) {
        let gens: Vec<UnitVec> = raw.iter().map(|v| hat(&v[..d])).filter(|u| !u.is_zero()).collect();
        prop_assume!(!gens.is_empty());
        let h = s_hull(&gens).unwrap();
        for g in &gens {
            prop_assert!(s_hull_contains(&h, g));
        }
        let mut x = vec![0.0; d];
        for (g, wi) in gens.iter().zip(&w) {
            x.iter_mut().zip(g.as_slice()).for_each(|(a, b)| *a += wi * b);
        }
        let u = hat(&x);
        prop_assume!(!u.is_zero() && x.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        prop_assert!(s_hull_contains(&h, &u));
    }

    #[test]
    fn chord_identity(x in prop::collection::vec(-1e6f64..1e6, 3), y in prop::collection::vec(-1.0f64..1.0, 3)) {
        let a = hat(&x);
        let b = hat(&y);
        prop_assume!(!a.is_zero() && !b.is_zero());
        let lhs: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| (p - q).powi(2)).sum();
        prop_assert!((lhs - (2.0 - 2.0 * a.dot(b.as_slice()))).abs() <= 1e-9);
    }

    #[test]
    fn hazard_terms_are_probabilities(alpha in 0.05f64..4.0) {
        let u = u_sequence(&TailFunction::Poly { alpha }, 64).unwrap();
        prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
        let d = pruitt_diagnostic(&u);
        prop_assert!(d.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn same_seed_same_record() {
    let spec = drift_alpha(0.7);
    let a = run_walk(&spec, 5000, 9, &mut []).unwrap();
    let b = run_walk(&spec, 5000, 9, &mut []).unwrap();
    let c = run_walk(&spec, 5000, 10, &mut []).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), c.to_csv());
}

#[test]
fn drift_walk_first_coordinate_is_n() {
    let rec = run_walk(&drift_alpha(2.0), 10_000, 4, &mut []).unwrap();
    for row in &rec.checkpoints {
        assert_eq!(row.lattice.as_ref().unwrap()[0], row.n as i64);
    }
}

#[test]
fn projection_extremes_include_the_start() {
    let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher; 2]).with_drift(vec![0.3, 0.0]);
    let mut obs = ProjectionObserver::new(direction_grid(2, 32, 0).unwrap());
    run_walk(&spec, 4096, 1, &mut [&mut obs]).unwrap();
    for s in obs.stats() {
        assert!(s.mins.iter().all(|&m| m <= 0.0));
        assert!(s.maxs.iter().all(|&m| m >= 0.0));
        assert!(s.mins.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn hull_radius_never_shrinks() {
    let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher, ScalarLaw::STwoSided { alpha: 0.8 }]);
    for seed in 0..5 {
        let mut obs = HullObserver::new(HullState::with_defaults(2).unwrap());
        run_walk(&spec, 50_000, seed, &mut [&mut obs]).unwrap();
        assert!(obs.rows.windows(2).all(|w| w[1].inscribed_radius >= w[0].inscribed_radius));
    }
}

#[test]
fn bound_check_needs_a_radial_walk() {
    let sampler = make_increment_sampler(&drift_alpha(0.5)).unwrap();
    let state = WalkState::new(&sampler);
    assert!(matches!(biggest_jump_bound_check(&state), Err(Error::UnsupportedSpec(_))));
}
