//! Standard bodies and measures used by tests, the CLI and the verification suite.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{Ball, HPolytope, UnitVector};
use crate::grassmann::random_directions;
use crate::solver::DiscreteMeasure;

fn ring(count: usize, offset: f64) -> Vec<UnitVector> {
    (0..count)
        .map(|j| UnitVector::from_angle(offset + 2.0 * PI * j as f64 / count as f64))
        .collect()
}

fn axes(n: usize) -> Vec<UnitVector> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(UnitVector::axis(n, i));
        out.push(UnitVector::axis(n, i).negated());
    }
    out
}

/// `[-1, 1]^2`, normals ordered e1, e2, -e1, -e2.
pub fn square() -> HPolytope {
    let normals = vec![
        UnitVector::axis(2, 0),
        UnitVector::axis(2, 1),
        UnitVector::axis(2, 0).negated(),
        UnitVector::axis(2, 1).negated(),
    ];
    HPolytope::new(normals, vec![1.0; 4]).expect("square")
}

/// `[-1, 1]^3`, normals ordered e1, -e1, e2, -e2, e3, -e3.
pub fn cube() -> HPolytope {
    HPolytope::new(axes(3), vec![1.0; 6]).expect("cube")
}

/// Equilateral triangle with inradius 1 and facet normals at 90, 210 and 330 degrees.
pub fn equilateral_triangle() -> HPolytope {
    HPolytope::new(ring(3, PI / 2.0), vec![1.0; 3]).expect("triangle")
}

/// Regular octagon with inradius 1 and facet normals at multiples of 45 degrees.
pub fn regular_octagon() -> HPolytope {
    HPolytope::new(ring(8, 0.0), vec![1.0; 8]).expect("octagon")
}

pub fn ball(n: usize) -> Ball {
    Ball::unit(n)
}

/// Unit weights on the triangle normals.
pub fn triangle_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(ring(3, PI / 2.0), vec![1.0; 3]).expect("triangle measure")
}

/// Unit weights on `±e1, ±e2`.
pub fn cross_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(square().normals().to_vec(), vec![1.0; 4]).expect("cross measure")
}

/// Unit weights on eight directions at 45 degree spacing.
pub fn octagon_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(ring(8, 0.0), vec![1.0; 8]).expect("octagon measure")
}

/// Atoms `{e1, e2}`: concentrated on a closed half-circle.
pub fn hemisphere_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(vec![UnitVector::axis(2, 0), UnitVector::axis(2, 1)], vec![1.0; 2])
        .expect("hemisphere measure")
}

/// Atoms `{e1, e2, -(e1+e2)/sqrt 2}`.
pub fn tripod_measure() -> DiscreteMeasure {
    let d = UnitVector::normalize(&[-1.0, -1.0]).unwrap();
    DiscreteMeasure::new(vec![UnitVector::axis(2, 0), UnitVector::axis(2, 1), d], vec![1.0; 3])
        .expect("tripod measure")
}

/// All mass on `±e1`.
pub fn line_measure() -> DiscreteMeasure {
    DiscreteMeasure::new(
        vec![UnitVector::axis(2, 0), UnitVector::axis(2, 0).negated()],
        vec![1.0; 2],
    )
    .expect("line measure")
}

/// Random polytope with `k` random facet normals and supports in `[0.5, 1.5]`.
pub fn random_polytope(n: usize, k: usize, seed: u64) -> HPolytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s: u64 = rng.random();
        let normals: Vec<UnitVector> = random_directions(n, k, s)
            .into_iter()
            .map(|v| UnitVector::normalize(&v).unwrap())
            .collect();
        let supports: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
        if let Ok(p) = HPolytope::new(normals, supports) {
            return p;
        }
    }
}

/// Random origin-symmetric polytope with `pairs` pairs of opposite normals.
pub fn random_symmetric_polytope(n: usize, pairs: usize, seed: u64) -> HPolytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s: u64 = rng.random();
        let mut normals = Vec::with_capacity(2 * pairs);
        let mut supports = Vec::with_capacity(2 * pairs);
        for v in random_directions(n, pairs, s) {
            let u = UnitVector::normalize(&v).unwrap();
            let t = rng.random_range(0.5..1.5);
            normals.push(u.negated());
            normals.push(u);
            supports.push(t);
            supports.push(t);
        }
        if let Ok(p) = HPolytope::new(normals, supports) {
            return p;
        }
    }
}

/// Random `n x n` matrix with determinant 1 and condition number at most `max_cond`.
pub fn random_unimodular(n: usize, max_cond: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        // Rotation * diagonal(det 1) * rotation.
        let r1 = crate::grassmann::random_rotation(n, rng.random());
        let r2 = crate::grassmann::random_rotation(n, rng.random());
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8f64).exp()).collect();
        let prod: f64 = d.iter().product();
        let g = prod.powf(1.0 / n as f64);
        d.iter_mut().for_each(|x| *x /= g);
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        if hi / lo > max_cond {
            continue;
        }
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = (0..n).map(|k| r1[i][k] * d[k] * r2[k][j]).sum();
            }
        }
        return out;
    }
}

/// Random polytope as in [`random_polytope`], redrawn until its outer radius is at most `max_radius`.
pub fn random_rounded_polytope(n: usize, k: usize, max_radius: f64, seed: u64) -> HPolytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p = random_polytope(n, k, rng.random());
        if p.outer_radius() <= max_radius {
            return p;
        }
    }
}
