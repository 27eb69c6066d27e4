//! Whether a finite set of directions positively spans R^n, decided by linear programming.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::vecops::{self, cross3, dot, norm};

const MARGIN_TOL: f64 = 1e-10;

/// Largest `delta` with `sum l_i u_i = 0`, `sum l_i = 1`, `l_i >= delta`.
/// `None` when the origin is outside the convex hull.
pub fn interior_margin(dirs: &[&[f64]]) -> Option<f64> {
    let n = dirs.first()?.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let delta = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let lambda: Vec<_> = dirs
        .iter()
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for &l in &lambda {
        lp.add_constraint([(l, 1.0), (delta, -1.0)], ComparisonOp::Ge, 0.0);
    }
    for c in 0..n {
        let row: Vec<_> = lambda.iter().zip(dirs).map(|(&l, u)| (l, u[c])).collect();
        lp.add_constraint(row, ComparisonOp::Eq, 0.0);
    }
    let ones: Vec<_> = lambda.iter().map(|&l| (l, 1.0)).collect();
    lp.add_constraint(ones, ComparisonOp::Eq, 1.0);
    lp.solve().ok().map(|s| s.objective())
}

fn full_rank(dirs: &[&[f64]]) -> bool {
    let n = dirs[0].len();
    let k = dirs.len() as f64;
    let mut g = vec![vec![0.0; n]; n];
    for u in dirs {
        for r in 0..n {
            for c in 0..n {
                g[r][c] += u[r] * u[c] / k;
            }
        }
    }
    vecops::determinant(&g) > 1e-14
}

/// True iff the directions are not contained in any closed hemisphere.
pub fn origin_in_interior_of_hull(dirs: &[&[f64]]) -> bool {
    if dirs.len() <= dirs.first().map_or(0, |u| u.len()) || !full_rank(dirs) {
        return false;
    }
    interior_margin(dirs).is_some_and(|d| d > MARGIN_TOL)
}

/// A unit `w` with `u.w <= 0` for every direction, or `None` if no closed hemisphere contains them.
pub fn hemisphere_witness(dirs: &[&[f64]]) -> Option<Vec<f64>> {
    if origin_in_interior_of_hull(dirs) {
        return None;
    }
    let n = dirs[0].len();
    let valid = |w: &[f64]| dirs.iter().all(|u| dot(u, w) <= 1e-9);

    // Strict separation: maximize s subject to u_i.w + s <= 0 over the box |w_j| <= 1.
    if interior_margin(dirs).is_none() {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let s = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
        let w: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
        for u in dirs {
            let mut row: Vec<_> = w.iter().zip(u.iter()).map(|(&v, &c)| (v, c)).collect();
            row.push((s, 1.0));
            lp.add_constraint(row, ComparisonOp::Le, 0.0);
        }
        if let Ok(sol) = lp.solve() {
            let wv: Vec<f64> = w.iter().map(|&v| *sol.var_value(v)).collect();
            let r = norm(&wv);
            if r > 1e-12 {
                let wv = vecops::scale(&wv, 1.0 / r);
                if valid(&wv) {
                    return Some(wv);
                }
            }
        }
    }

    // Origin on the hull boundary: the supporting plane is spanned by atoms.
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if n == 2 {
        for u in dirs {
            candidates.push(vec![-u[1], u[0]]);
            candidates.push(vec![u[1], -u[0]]);
        }
    } else if n == 3 {
        for (i, a) in dirs.iter().enumerate() {
            let a3 = vecops::to3(a);
            for b in &dirs[i + 1..] {
                let c = cross3(&a3, &vecops::to3(b));
                if norm(&c) > 1e-9 {
                    candidates.push(c.to_vec());
                    candidates.push(vecops::neg(&c));
                }
            }
            // Rank-one sets: any vector orthogonal to the common line.
            let (p, q) = vecops::plane_basis(&vecops::to3(&vecops::scale(a, 1.0 / norm(a))));
            candidates.push(p.to_vec());
            candidates.push(q.to_vec());
        }
    }
    for e in 0..n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        candidates.push(v.clone());
        v[e] = -1.0;
        candidates.push(v);
    }
    candidates
        .into_iter()
        .map(|c| vecops::scale(&c, 1.0 / norm(&c)))
        .find(|w| valid(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn cross_is_spanning() {
        let d: Vec<&[f64]> = vec![&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]];
        assert!(origin_in_interior_of_hull(&d));
        assert!((interior_margin(&d).unwrap() - 0.25).abs() < 1e-12);
        assert!(hemisphere_witness(&d).is_none());
    }

    #[test]
    fn quarter_plane_witness() {
        let d: Vec<&[f64]> = vec![&[1.0, 0.0], &[0.0, 1.0]];
        let w = hemisphere_witness(&d).unwrap();
        assert!((w[0] + FRAC_1_SQRT_2).abs() < 1e-12 && (w[1] + FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn boundary_cases() {
        let d: Vec<&[f64]> = vec![&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]];
        assert!(!origin_in_interior_of_hull(&d));
        let w = hemisphere_witness(&d).unwrap();
        assert!(d.iter().all(|u| dot(u, &w) <= 1e-12));
        let line: Vec<&[f64]> = vec![&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]];
        assert!(hemisphere_witness(&line).is_some());
        let oct: Vec<&[f64]> = vec![
            &[1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, -1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ];
        let w = hemisphere_witness(&oct).unwrap();
        assert!(w[2] < -0.99);
    }
}
