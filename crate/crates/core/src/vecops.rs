//! Small dense vector and matrix helpers for n <= 3 (and generic n where cheap).

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

#[inline]
pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn to3(a: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..a.len()].copy_from_slice(a);
    out
}

/// Orthonormal basis (a, b) of the plane orthogonal to the unit vector `u` in R^3,
/// oriented so that a x b = u. Deterministic and smooth away from u = ±e1.
pub fn plane_basis(u: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Pick the coordinate axis least aligned with u.
    let ax = u.iter().map(|c| c.abs()).collect::<Vec<_>>();
    let mut helper = [0.0; 3];
    let idx = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        0
    } else if ax[1] <= ax[2] {
        1
    } else {
        2
    };
    helper[idx] = 1.0;
    let mut a = cross3(&helper, u);
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    for c in a.iter_mut() {
        *c /= na;
    }
    let b = cross3(u, &a);
    (a, b)
}

/// Modified Gram-Schmidt on the rows of `vs`; returns None on rank deficiency.
pub fn orthonormalize(vs: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let nw = norm(&w);
        if nw < 1e-12 * norm(v).max(1e-300) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        out.push(w);
    }
    Some(out)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-13 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[row][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Inverse of a small square matrix (row-major rows).
pub fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn determinant(a: &[Vec<f64>]) -> f64 {
    match a.len() {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => {
            // LU without pivot bookkeeping is enough for the few callers here.
            let n = a.len();
            let mut m = a.to_vec();
            let mut det = 1.0;
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
                    .unwrap();
                if m[piv][col] == 0.0 {
                    return 0.0;
                }
                if piv != col {
                    m.swap(col, piv);
                    det = -det;
                }
                det *= m[col][col];
                for row in col + 1..n {
                    let f = m[row][col] / m[col][col];
                    for c in col..n {
                        m[row][c] -= f * m[col][c];
                    }
                }
            }
            det
        }
    }
}
