//! Sutherland-Hodgman clipping of convex polygons and polyhedra by halfspaces.

use crate::vecops::plane_basis;

/// Label carried by the edges/faces of the initial bounding box.
pub(crate) const BOX_LABEL: usize = usize::MAX;

/// Convex polygon with `labels[j]` naming the constraint that bounds edge `pts[j] -> pts[j+1]`.
#[derive(Clone, Debug)]
pub(crate) struct LabeledPolygon {
    pub pts: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
}

impl LabeledPolygon {
    pub fn square(half: f64) -> Self {
        LabeledPolygon {
            pts: vec![[-half, -half], [half, -half], [half, half], [-half, half]],
            labels: vec![BOX_LABEL; 4],
        }
    }

    fn push(&mut self, p: [f64; 2], label: usize, eps: f64) {
        if let Some(last) = self.pts.last() {
            if (last[0] - p[0]).abs() <= eps && (last[1] - p[1]).abs() <= eps {
                *self.labels.last_mut().unwrap() = label;
                return;
            }
        }
        self.pts.push(p);
        self.labels.push(label);
    }

    /// Keeps `{x : a.x <= t}`.
    pub fn clip(&self, a: [f64; 2], t: f64, label: usize, eps: f64) -> LabeledPolygon {
        let r = self.pts.len();
        let mut out = LabeledPolygon {
            pts: Vec::with_capacity(r + 1),
            labels: Vec::with_capacity(r + 1),
        };
        for j in 0..r {
            let cur = self.pts[j];
            let next = self.pts[(j + 1) % r];
            let dc = a[0] * cur[0] + a[1] * cur[1] - t;
            let dn = a[0] * next[0] + a[1] * next[1] - t;
            let cin = dc <= eps;
            let nin = dn <= eps;
            let cross = || {
                let s = dc / (dc - dn);
                [cur[0] + s * (next[0] - cur[0]), cur[1] + s * (next[1] - cur[1])]
            };
            match (cin, nin) {
                (true, true) => out.push(cur, self.labels[j], eps),
                (true, false) => {
                    out.push(cur, self.labels[j], eps);
                    out.push(cross(), label, eps);
                }
                (false, true) => out.push(cross(), self.labels[j], eps),
                (false, false) => {}
            }
        }
        while out.pts.len() > 1 {
            let (f, l) = (out.pts[0], *out.pts.last().unwrap());
            if (f[0] - l[0]).abs() <= eps && (f[1] - l[1]).abs() <= eps {
                out.pts.pop();
                out.labels.pop();
            } else {
                break;
            }
        }
        if out.pts.len() < 3 {
            out.pts.clear();
            out.labels.clear();
        }
        out
    }

    #[cfg(test)]
    pub fn area(&self) -> f64 {
        shoelace(&self.pts)
    }
}

pub(crate) fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let r = pts.len();
    if r < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for j in 0..r {
        let p = pts[j];
        let q = pts[(j + 1) % r];
        s += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * s.abs()
}

/// Area of `{x in [-half, half]^2 : a_i.x <= t_i}` without label bookkeeping.
pub(crate) fn halfplane_area(a: &[[f64; 2]], t: &[f64], half: f64) -> f64 {
    let eps = 1e-13 * half;
    let mut cur: Vec<[f64; 2]> = vec![[-half, -half], [half, -half], [half, half], [-half, half]];
    let mut nxt: Vec<[f64; 2]> = Vec::with_capacity(a.len() + 4);
    for (ai, &ti) in a.iter().zip(t) {
        nxt.clear();
        let r = cur.len();
        for j in 0..r {
            let c = cur[j];
            let n = cur[(j + 1) % r];
            let dc = ai[0] * c[0] + ai[1] * c[1] - ti;
            let dn = ai[0] * n[0] + ai[1] * n[1] - ti;
            if dc <= eps {
                nxt.push(c);
            }
            if (dc <= eps) != (dn <= eps) {
                let s = dc / (dc - dn);
                nxt.push([c[0] + s * (n[0] - c[0]), c[1] + s * (n[1] - c[1])]);
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
        if cur.len() < 3 {
            return 0.0;
        }
    }
    shoelace(&cur)
}

#[derive(Clone, Debug)]
pub(crate) struct Face {
    pub label: usize,
    pub pts: Vec<[f64; 3]>,
}

/// The cube `[-half, half]^3` as six outward-oriented faces.
pub(crate) fn cube_faces(half: f64) -> Vec<Face> {
    let h = half;
    let quads = [
        [[h, -h, -h], [h, h, -h], [h, h, h], [h, -h, h]],
        [[-h, -h, -h], [-h, -h, h], [-h, h, h], [-h, h, -h]],
        [[-h, h, -h], [-h, h, h], [h, h, h], [h, h, -h]],
        [[-h, -h, -h], [h, -h, -h], [h, -h, h], [-h, -h, h]],
        [[-h, -h, h], [h, -h, h], [h, h, h], [-h, h, h]],
        [[-h, -h, -h], [-h, h, -h], [h, h, -h], [h, -h, -h]],
    ];
    quads
        .iter()
        .map(|q| Face {
            label: BOX_LABEL,
            pts: q.to_vec(),
        })
        .collect()
}

fn close3(p: &[f64; 3], q: &[f64; 3], eps: f64) -> bool {
    (p[0] - q[0]).abs() <= eps && (p[1] - q[1]).abs() <= eps && (p[2] - q[2]).abs() <= eps
}

/// Keeps `{x : u.x <= t}` and closes the cut with a cap face labeled `label`.
pub(crate) fn clip_polyhedron(faces: &[Face], u: [f64; 3], t: f64, label: usize, eps: f64) -> Vec<Face> {
    let d = |p: &[f64; 3]| u[0] * p[0] + u[1] * p[1] + u[2] * p[2] - t;
    let mut out = Vec::with_capacity(faces.len() + 1);
    let mut cap: Vec<[f64; 3]> = Vec::new();
    for f in faces {
        let r = f.pts.len();
        let mut pts: Vec<[f64; 3]> = Vec::with_capacity(r + 1);
        let add = |p: [f64; 3], pts: &mut Vec<[f64; 3]>| {
            if pts.last().is_none_or(|l| !close3(l, &p, eps)) {
                pts.push(p);
            }
        };
        for j in 0..r {
            let c = f.pts[j];
            let n = f.pts[(j + 1) % r];
            let dc = d(&c);
            let dn = d(&n);
            if dc <= eps {
                add(c, &mut pts);
                if dc.abs() <= eps {
                    cap.push(c);
                }
            }
            if (dc <= eps) != (dn <= eps) {
                let s = dc / (dc - dn);
                let p = [
                    c[0] + s * (n[0] - c[0]),
                    c[1] + s * (n[1] - c[1]),
                    c[2] + s * (n[2] - c[2]),
                ];
                add(p, &mut pts);
                cap.push(p);
            }
        }
        while pts.len() > 1 && close3(&pts[0], pts.last().unwrap(), eps) {
            pts.pop();
        }
        if pts.len() >= 3 {
            out.push(Face { label: f.label, pts });
        }
    }
    let mut uniq: Vec<[f64; 3]> = Vec::new();
    for p in cap {
        if !uniq.iter().any(|q| close3(q, &p, 4.0 * eps)) {
            uniq.push(p);
        }
    }
    if uniq.len() >= 3 {
        let (a, b) = plane_basis(&u);
        let k = uniq.len() as f64;
        let c = [
            uniq.iter().map(|p| p[0]).sum::<f64>() / k,
            uniq.iter().map(|p| p[1]).sum::<f64>() / k,
            uniq.iter().map(|p| p[2]).sum::<f64>() / k,
        ];
        let ang = |p: &[f64; 3]| {
            let w = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let x = w[0] * a[0] + w[1] * a[1] + w[2] * a[2];
            let y = w[0] * b[0] + w[1] * b[1] + w[2] * b[2];
            y.atan2(x)
        };
        uniq.sort_by(|p, q| ang(p).total_cmp(&ang(q)));
        if polygon_area3(&uniq) > eps * eps {
            out.push(Face { label, pts: uniq });
        }
    }
    out
}

/// Area of a planar polygon in R^3 (vertices in cyclic order).
pub(crate) fn polygon_area3(pts: &[[f64; 3]]) -> f64 {
    vector_area3(pts).iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Half the sum of cross products; its direction is the polygon's oriented normal.
pub(crate) fn vector_area3(pts: &[[f64; 3]]) -> [f64; 3] {
    let r = pts.len();
    let mut s = [0.0; 3];
    if r < 3 {
        return s;
    }
    let o = pts[0];
    for j in 1..r - 1 {
        let p = [pts[j][0] - o[0], pts[j][1] - o[1], pts[j][2] - o[2]];
        let q = [pts[j + 1][0] - o[0], pts[j + 1][1] - o[1], pts[j + 1][2] - o[2]];
        let c = crate::vecops::cross3(&p, &q);
        for i in 0..3 {
            s[i] += 0.5 * c[i];
        }
    }
    s
}
