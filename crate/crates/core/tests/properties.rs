use adq_core::functionals::{curvature_atoms, psi, wulff_supports, Budgets};
use adq_core::io::{self, Body};
use adq_core::{fixtures, hemisphere_check, solve_discrete_lp, DiscreteMeasure, SolveConfig, UnitVector};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![(2, 1), (3, 1), (3, 2)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_and_atoms_scale(seed in any::<u64>(), (n, m) in dims(), c in 0.3f64..3.0, p in 0.0f64..4.0) {
        let k = if n == 2 { 6 } else { 9 };
        let poly = fixtures::random_rounded_polytope(n, k, 4.0, seed);
        let b = Budgets::for_dim(n);
        let mn = (m * n) as f64;
        let big = poly.scaled(c);
        prop_assert!(rel(psi(&big, m, &b).unwrap(), c.powf(mn) * psi(&poly, m, &b).unwrap()) < 1e-9);
        let a = curvature_atoms(&poly, p, m, &b).unwrap();
        let a2 = curvature_atoms(&big, p, m, &b).unwrap();
        for (x, y) in a.masses.iter().zip(&a2.masses) {
            if *x > 1e-12 {
                prop_assert!(rel(*y, c.powf(mn - p) * x) < 1e-9);
            }
        }
    }

    #[test]
    fn atoms_sum_to_m_psi(seed in any::<u64>(), (n, m) in dims()) {
        let k = if n == 2 { 7 } else { 10 };
        let poly = fixtures::random_rounded_polytope(n, k, 4.0, seed);
        let b = Budgets { grassmann: 20_000, ..Budgets::for_dim(n) };
        let total = curvature_atoms(&poly, 0.0, m, &b).unwrap().total();
        prop_assert!(rel(total, m as f64 * psi(&poly, m, &b).unwrap()) < 2e-3);
    }

    #[test]
    fn planar_psi_is_unimodular_invariant(seed in any::<u64>()) {
        let poly = fixtures::random_rounded_polytope(2, 6, 4.0, seed);
        let a = fixtures::random_unimodular(2, 3.0, seed ^ 0x5eed);
        let b = Budgets::for_dim(2);
        let img = poly.linear_image(&a).unwrap();
        prop_assert!(rel(psi(&img, 1, &b).unwrap(), psi(&poly, 1, &b).unwrap()) < 1e-3);
    }

    #[test]
    fn wulff_family_starts_at_h0(h0 in prop::collection::vec(0.2f64..3.0, 1..10), p in -2.0f64..5.0) {
        let f = vec![0.7; h0.len()];
        let s = wulff_supports(&h0, &f, 0.0, p).unwrap();
        for (x, y) in s.iter().zip(&h0) {
            prop_assert!(rel(*x, *y) < 1e-12);
        }
    }

    #[test]
    fn half_plane_measures_are_rejected(angles in prop::collection::vec(-80.0f64..80.0, 1..8)) {
        let atoms: Vec<UnitVector> = angles.iter().map(|a| UnitVector::from_angle(a.to_radians())).collect();
        let k = atoms.len();
        if let Ok(mu) = DiscreteMeasure::new(atoms, vec![1.0; k]) {
            let h = hemisphere_check(&mu).unwrap();
            prop_assert!(!h.admissible);
            let w = h.witness.unwrap();
            for u in mu.atoms() {
                prop_assert!(u[0] * w[0] + u[1] * w[1] <= 1e-12);
            }
        }
    }

    #[test]
    fn body_files_round_trip_bytes(seed in any::<u64>(), n in 2usize..=3) {
        let poly = fixtures::random_polytope(n, 3 * n, seed);
        let text = io::polytope_to_string(&poly, None);
        let Body::Polytope(back) = io::parse_body(&text).unwrap().0 else { panic!("kind") };
        prop_assert_eq!(io::polytope_to_string(&back, None), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn planar_solutions_reproduce_the_measure(seed in any::<u64>(), p in 2.5f64..5.0) {
        let poly = fixtures::random_rounded_polytope(2, 5, 4.0, seed);
        let weights: Vec<f64> = (0..poly.len()).map(|i| 0.5 + ((seed >> (4 * i)) & 0xf) as f64 / 15.0).collect();
        let mu = DiscreteMeasure::new(poly.normals().to_vec(), weights).unwrap();
        let r = solve_discrete_lp(&mu, &SolveConfig::new(2, p, 1)).unwrap();
        prop_assert!(r.converged());
        prop_assert!(r.measure_residual <= 1e-2, "residual {}", r.measure_residual);
    }
}
