//! Polytopes in H-representation, the analytic ball, and the star-body interface
//! shared by every functional.

use std::f64::consts::PI;
use std::ops::Deref;

use crate::clip::{self, Face, LabeledPolygon, BOX_LABEL};
use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::spanning;
use crate::vecops::{self, dot, norm};

/// Tolerance for unit-norm checks.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance for constraint tightness, relative to the body's scale.
pub const TIGHT_TOL: f64 = 1e-9;

/// Volume of the unit ball in R^k.
pub fn omega(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / k as f64 * omega(k - 2),
    }
}

/// A point of the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if (r - 1.0).abs() > UNIT_TOL || !r.is_finite() {
            return Err(Error::NotUnit(r));
        }
        Ok(UnitVector(coords))
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        let r = norm(coords);
        if !(r > 1e-300) || !r.is_finite() {
            return Err(Error::NotUnit(r));
        }
        Ok(UnitVector(coords.iter().map(|c| c / r).collect()))
    }

    pub fn from_angle(theta: f64) -> Self {
        UnitVector(vec![theta.cos(), theta.sin()])
    }

    pub fn axis(n: usize, i: usize) -> Self {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        UnitVector(c)
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        UnitVector(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        UnitVector(vecops::neg(&self.0))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Bodies that the functionals can integrate over: polytopes and the analytic ball.
pub trait StarBody {
    fn dim(&self) -> usize;
    /// Radial function at a unit direction.
    fn radial(&self, u: &[f64]) -> f64;
    /// Support function at a unit direction.
    fn support(&self, v: &[f64]) -> f64;
    /// m-dimensional volume of the central section by `xi`.
    fn section_volume(&self, xi: &Subspace) -> f64;
    fn origin_interior(&self) -> bool;
    /// Angles in `[0, pi)` at which the plane `span{u, cos(th) a + sin(th) b}` meets a
    /// non-smooth point of the boundary. Empty when unknown.
    fn pencil_breaks(&self, _u: &[f64], _a: &[f64], _b: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// One facet of an H-polytope. Degenerate facets have area 0 and list the
/// vertices on which their constraint is tight.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: usize,
    pub vertices: Vec<usize>,
    pub area: f64,
}

impl Facet {
    pub fn is_degenerate(&self) -> bool {
        self.area == 0.0
    }
}

/// Dual of the normal cone at the origin: `{x : x.u_i <= 0 for active i}`.
#[derive(Clone, Debug)]
pub struct NormalConeDual {
    pub active: Vec<usize>,
    normals: Vec<Vec<f64>>,
}

impl NormalConeDual {
    pub fn is_whole_space(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals.iter().all(|u| dot(u, x) <= 0.0)
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        self.normals.iter().all(|u| dot(u, x) < 0.0)
    }
}

/// Convex polytope `{x : x.u_i <= t_i}` with derived vertices and facets.
#[derive(Clone, Debug)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<UnitVector>,
    supports: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    radius: f64,
    volume: f64,
}

impl HPolytope {
    pub fn new(normals: Vec<UnitVector>, supports: Vec<f64>) -> Result<Self> {
        let k = normals.len();
        let n = normals.first().map_or(0, |u| u.dim());
        if !(2..=3).contains(&n) {
            return Err(Error::BadDims { n, m: 0 });
        }
        if normals.iter().any(|u| u.dim() != n) {
            return Err(Error::DegenerateInput("normals of mixed dimension".into()));
        }
        if supports.len() != k {
            return Err(Error::DegenerateInput(format!(
                "{k} normals but {} supports",
                supports.len()
            )));
        }
        if k < n + 1 {
            return Err(Error::DegenerateInput(format!(
                "{k} halfspaces cannot bound a body in dimension {n}"
            )));
        }
        for (i, &t) in supports.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::DegenerateInput(format!("support {i} is not finite")));
            }
            if t < 0.0 {
                return Err(Error::OriginOutside { index: i, value: t });
            }
        }
        let dirs: Vec<&[f64]> = normals.iter().map(|u| u.coords()).collect();
        if !spanning::origin_in_interior_of_hull(&dirs) {
            return Err(Error::UnboundedBody);
        }
        let tmax = supports.iter().cloned().fold(0.0f64, f64::max);
        if tmax == 0.0 {
            return Err(Error::DegenerateInput("all supports vanish".into()));
        }
        let mut half = 4.0 * tmax;
        for _ in 0..80 {
            if let Some(p) = Self::enumerate(n, &normals, &supports, half)? {
                return Ok(p);
            }
            half *= 2.0;
        }
        Err(Error::UnboundedBody)
    }

    /// Builds the body by clipping a cube of half-width `half`; returns None if
    /// the cube is still visible.
    fn enumerate(n: usize, normals: &[UnitVector], supports: &[f64], half: f64) -> Result<Option<Self>> {
        let eps = 1e-12 * half;
        // Raw cycles per label, as points.
        let mut cycles: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
        if n == 2 {
            let mut poly = LabeledPolygon::square(half);
            for (i, (u, &t)) in normals.iter().zip(supports).enumerate() {
                poly = poly.clip([u[0], u[1]], t, i, eps);
                if poly.pts.is_empty() {
                    break;
                }
            }
            if poly.pts.len() < 3 {
                return Err(Error::DegenerateInput("body has empty interior".into()));
            }
            if poly.labels.contains(&BOX_LABEL) {
                return Ok(None);
            }
            let r = poly.pts.len();
            for j in 0..r {
                let a = poly.pts[j];
                let b = poly.pts[(j + 1) % r];
                cycles.push((poly.labels[j], vec![a.to_vec(), b.to_vec()]));
            }
        } else {
            let mut faces = clip::cube_faces(half);
            for (i, (u, &t)) in normals.iter().zip(supports).enumerate() {
                faces = clip::clip_polyhedron(&faces, [u[0], u[1], u[2]], t, i, eps);
                if faces.len() < 4 {
                    break;
                }
            }
            if faces.len() < 4 {
                return Err(Error::DegenerateInput("body has empty interior".into()));
            }
            if faces.iter().any(|f| f.label == BOX_LABEL) {
                return Ok(None);
            }
            for Face { label, pts } in faces {
                cycles.push((label, pts.iter().map(|p| p.to_vec()).collect()));
            }
        }

        // Merge coincident points.
        let merge_tol = 1e-9 * half;
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut index_cycles: Vec<(usize, Vec<usize>)> = Vec::new();
        for (label, pts) in &cycles {
            let mut idx = Vec::with_capacity(pts.len());
            for p in pts {
                let found = vertices
                    .iter()
                    .position(|v| v.iter().zip(p).all(|(a, b)| (a - b).abs() <= merge_tol));
                let id = match found {
                    Some(id) => id,
                    None => {
                        vertices.push(p.clone());
                        vertices.len() - 1
                    }
                };
                if idx.last() != Some(&id) {
                    idx.push(id);
                }
            }
            while idx.len() > 1 && idx.first() == idx.last() {
                idx.pop();
            }
            index_cycles.push((*label, idx));
        }

        // Polish each vertex by least squares over its tight constraints.
        let tight_tol = 1e-8 * half;
        for v in vertices.iter_mut() {
            let tight: Vec<usize> = (0..normals.len())
                .filter(|&i| (dot(v, &normals[i]) - supports[i]).abs() <= tight_tol)
                .collect();
            if tight.len() < n {
                continue;
            }
            let mut a = vec![vec![0.0; n]; n];
            let mut b = vec![0.0; n];
            for &i in &tight {
                let u = &normals[i];
                for r in 0..n {
                    b[r] += u[r] * supports[i];
                    for c in 0..n {
                        a[r][c] += u[r] * u[c];
                    }
                }
            }
            if let Some(x) = vecops::solve(&a, &b) {
                if vecops::norm(&vecops::sub(&x, v)) <= tight_tol * 10.0 {
                    *v = x;
                }
            }
        }

        let radius = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let scale = radius.max(f64::MIN_POSITIVE);
        let area_floor = 1e-12 * scale.powi(n as i32 - 1);
        let mut facets = Vec::with_capacity(normals.len());
        for i in 0..normals.len() {
            let cyc = index_cycles.iter().find(|(l, _)| *l == i).map(|(_, c)| c.clone());
            let (mut verts, area) = match cyc {
                Some(c) if c.len() >= n => {
                    let area = if n == 2 {
                        norm(&vecops::sub(&vertices[c[0]], &vertices[c[1]]))
                    } else {
                        let pts: Vec<[f64; 3]> = c.iter().map(|&j| vecops::to3(&vertices[j])).collect();
                        clip::polygon_area3(&pts)
                    };
                    (c, area)
                }
                _ => (Vec::new(), 0.0),
            };
            let area = if area <= area_floor { 0.0 } else { area };
            if area == 0.0 {
                verts = (0..vertices.len())
                    .filter(|&j| (dot(&vertices[j], &normals[i]) - supports[i]).abs() <= TIGHT_TOL * scale.max(1.0))
                    .collect();
            } else if n == 3 {
                let pts: Vec<[f64; 3]> = verts.iter().map(|&j| vecops::to3(&vertices[j])).collect();
                if dot(&clip::vector_area3(&pts), &normals[i]) < 0.0 {
                    verts.reverse();
                }
            }
            facets.push(Facet {
                normal: i,
                vertices: verts,
                area,
            });
        }
        let volume = if n == 2 {
            let pts: Vec<[f64; 2]> = cycles.iter().map(|(_, p)| [p[0][0], p[0][1]]).collect();
            clip::shoelace(&pts)
        } else {
            facets
                .iter()
                .map(|f| supports[f.normal] * f.area / 3.0)
                .sum()
        };
        Ok(Some(HPolytope {
            dim: n,
            normals: normals.to_vec(),
            supports: supports.to_vec(),
            vertices,
            facets,
            radius,
            volume,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[UnitVector] {
        &self.normals
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Largest vertex norm.
    pub fn outer_radius(&self) -> f64 {
        self.radius
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(norm(&vecops::sub(a, b)));
            }
        }
        d
    }

    pub fn origin_interior(&self) -> bool {
        self.supports.iter().all(|&t| t > 0.0)
    }

    pub fn normal_cone_dual(&self) -> NormalConeDual {
        let active: Vec<usize> = (0..self.len()).filter(|&i| self.supports[i] == 0.0).collect();
        let normals = active.iter().map(|&i| self.normals[i].to_vec()).collect();
        NormalConeDual { active, normals }
    }

    /// `h_P(v) = max_x x.v` over the vertices.
    pub fn support(&self, v: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|x| dot(x, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `rho_P(u) = min t_i / (u.u_i)` over `u.u_i > 0`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (ui, &t) in self.normals.iter().zip(&self.supports) {
            let c = dot(u, ui);
            if c > 0.0 {
                let r = t / c;
                if r < best {
                    best = r;
                }
            }
        }
        best
    }

    /// Index of the facet hit by the ray through `u`; ties go to the smallest index.
    pub fn gauss_map_at(&self, u: &[f64]) -> Result<usize> {
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for (i, (ui, &t)) in self.normals.iter().zip(&self.supports).enumerate() {
            let c = dot(u, ui);
            if c > 0.0 {
                let r = t / c;
                if r < best * (1.0 - 1e-12) {
                    best = r;
                    arg = i;
                }
            }
        }
        if arg == usize::MAX || best <= 0.0 {
            return Err(Error::ZeroRadial);
        }
        Ok(arg)
    }

    /// `D h_P(u) = max_i (u.u_i) / t_i`, which equals `1 / rho_P(u)`.
    pub fn dual_operator(&self, u: &[f64]) -> Result<f64> {
        if !self.origin_interior() {
            return Err(Error::OriginOnBoundary);
        }
        Ok(self
            .normals
            .iter()
            .zip(&self.supports)
            .map(|(ui, &t)| dot(u, ui) / t)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Dilation `cP` for `c > 0`; scales every derived quantity directly.
    pub fn scaled(&self, c: f64) -> HPolytope {
        assert!(c > 0.0, "dilation factor must be positive");
        let n = self.dim as i32;
        HPolytope {
            dim: self.dim,
            normals: self.normals.clone(),
            supports: self.supports.iter().map(|t| t * c).collect(),
            vertices: self.vertices.iter().map(|v| vecops::scale(v, c)).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    area: f.area * c.powi(n - 1),
                    ..f.clone()
                })
                .collect(),
            radius: self.radius * c,
            volume: self.volume * c.powi(n),
        }
    }

    /// Image `AP` under an invertible linear map given by its rows.
    pub fn linear_image(&self, a: &[Vec<f64>]) -> Result<HPolytope> {
        let inv = vecops::inverse(a).ok_or_else(|| Error::DegenerateInput("singular linear map".into()))?;
        let inv_t = vecops::transpose(&inv);
        let mut normals = Vec::with_capacity(self.len());
        let mut supports = Vec::with_capacity(self.len());
        for (u, &t) in self.normals.iter().zip(&self.supports) {
            let w = vecops::mat_vec(&inv_t, u);
            let r = norm(&w);
            normals.push(UnitVector(vecops::scale(&w, 1.0 / r)));
            supports.push(t / r);
        }
        HPolytope::new(normals, supports)
    }

    /// Same normals with new support numbers.
    pub fn with_supports(&self, supports: Vec<f64>) -> Result<HPolytope> {
        HPolytope::new(self.normals.clone(), supports)
    }

    /// Section by a central subspace: chord length (m=1) or polygon area (n=3, m=2).
    pub fn section_volume(&self, xi: &Subspace) -> f64 {
        match xi.dim() {
            1 => {
                let u = &xi.frame()[0];
                let neg = vecops::neg(u);
                self.radial(u) + self.radial(&neg)
            }
            2 if self.dim == 3 => {
                let (ea, eb) = (&xi.frame()[0], &xi.frame()[1]);
                let mut a = Vec::with_capacity(self.len());
                let mut t = Vec::with_capacity(self.len());
                for (u, &ti) in self.normals.iter().zip(&self.supports) {
                    let p = [dot(u, ea), dot(u, eb)];
                    if p[0].abs() + p[1].abs() <= 1e-15 {
                        continue;
                    }
                    a.push(p);
                    t.push(ti);
                }
                let r = self.radius;
                let area = clip::halfplane_area(&a, &t, 2.0 * r);
                if area < 1e-14 * r * r {
                    0.0
                } else {
                    area
                }
            }
            _ => f64::NAN,
        }
    }

    /// Splits `K cap xi` into the cones from the origin over its boundary pieces:
    /// `(facet index, m-volume of the cone)`. Volumes sum to the section volume.
    pub fn section_cones(&self, xi: &Subspace) -> Vec<(usize, f64)> {
        match xi.dim() {
            1 => {
                let u = &xi.frame()[0];
                let hit = |s: f64| {
                    let mut best = (usize::MAX, f64::INFINITY);
                    for (i, (n, &t)) in self.normals.iter().zip(&self.supports).enumerate() {
                        let d = s * dot(n, u);
                        if d > 0.0 && t / d < best.1 {
                            best = (i, t / d);
                        }
                    }
                    best
                };
                vec![hit(1.0), hit(-1.0)]
            }
            2 if self.dim == 3 => {
                let (ea, eb) = (&xi.frame()[0], &xi.frame()[1]);
                let r = self.radius;
                let mut poly = LabeledPolygon::square(2.0 * r);
                for (i, (u, &ti)) in self.normals.iter().zip(&self.supports).enumerate() {
                    let p = [dot(u, ea), dot(u, eb)];
                    if p[0].abs() + p[1].abs() <= 1e-15 {
                        continue;
                    }
                    poly = poly.clip(p, ti, i, 1e-15 * r);
                    if poly.pts.is_empty() {
                        return Vec::new();
                    }
                }
                let k = poly.pts.len();
                (0..k)
                    .map(|j| {
                        let (a, b) = (poly.pts[j], poly.pts[(j + 1) % k]);
                        (poly.labels[j], 0.5 * (a[0] * b[1] - a[1] * b[0]).abs())
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

impl StarBody for HPolytope {
    fn dim(&self) -> usize {
        self.dim
    }
    fn radial(&self, u: &[f64]) -> f64 {
        HPolytope::radial(self, u)
    }
    fn support(&self, v: &[f64]) -> f64 {
        HPolytope::support(self, v)
    }
    fn section_volume(&self, xi: &Subspace) -> f64 {
        HPolytope::section_volume(self, xi)
    }
    fn origin_interior(&self) -> bool {
        HPolytope::origin_interior(self)
    }

    fn pencil_breaks(&self, _u: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
        self.vertices
            .iter()
            .filter_map(|v| {
                let (x, y) = (dot(v, a), dot(v, b));
                (x.hypot(y) > 1e-12 * norm(v)).then(|| y.atan2(x).rem_euclid(PI))
            })
            .collect()
    }
}

/// Centered Euclidean ball of radius `r` in R^n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub n: usize,
    pub r: f64,
}

impl Ball {
    pub fn unit(n: usize) -> Self {
        Ball { n, r: 1.0 }
    }
}

impl StarBody for Ball {
    fn dim(&self) -> usize {
        self.n
    }
    fn radial(&self, _u: &[f64]) -> f64 {
        self.r
    }
    fn support(&self, _v: &[f64]) -> f64 {
        self.r
    }
    fn section_volume(&self, xi: &Subspace) -> f64 {
        let m = xi.dim();
        omega(m) * self.r.powi(m as i32)
    }
    fn origin_interior(&self) -> bool {
        self.r > 0.0
    }
}

/// Deterministic direction grid: uniform angles (n=2) or a Fibonacci sphere (n=3).
pub fn direction_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        (0..count)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    } else {
        crate::grassmann::fibonacci_sphere(count)
    }
}

/// Hausdorff distance via support functions on vertex directions, facet normals and a fixed grid.
pub fn hausdorff_distance(p: &HPolytope, q: &HPolytope) -> f64 {
    let n = p.dim();
    let mut dirs: Vec<Vec<f64>> = direction_grid(n, if n == 2 { 720 } else { 2000 });
    for body in [p, q] {
        dirs.extend(body.normals().iter().map(|u| u.to_vec()));
        for v in body.vertices() {
            let r = norm(v);
            if r > 0.0 {
                dirs.push(vecops::scale(v, 1.0 / r));
            }
        }
    }
    dirs.iter()
        .map(|d| (p.support(d) - q.support(d)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn u2(x: f64, y: f64) -> UnitVector {
        UnitVector::normalize(&[x, y]).unwrap()
    }

    #[test]
    fn square_vertices() {
        let sq = fixtures::square();
        assert_eq!(sq.vertices().len(), 4);
        for v in sq.vertices() {
            assert!((v[0].abs() - 1.0).abs() < 1e-15 && (v[1].abs() - 1.0).abs() < 1e-15);
        }
        assert!((sq.volume() - 4.0).abs() < 1e-12);
        assert!(sq.facets().iter().all(|f| (f.area - 2.0).abs() < 1e-12));
    }

    #[test]
    fn cube_facets() {
        let c = fixtures::cube();
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.facets().len(), 6);
        for f in c.facets() {
            assert!((f.area - 4.0).abs() < 1e-12);
            assert_eq!(f.vertices.len(), 4);
        }
        assert!((c.volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_constraint_is_degenerate() {
        let normals = vec![u2(1.0, 0.0), u2(-1.0, 0.0), u2(0.0, 1.0), u2(0.0, -1.0), u2(1.0, 1.0)];
        let p = HPolytope::new(normals, vec![1.0, 1.0, 1.0, 1.0, 10.0]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(p.facets()[4].is_degenerate());
        assert!(p.facets()[4].vertices.is_empty());
        assert!(!p.facets()[0].is_degenerate());
    }

    #[test]
    fn touching_constraint_keeps_support_set() {
        let normals = vec![u2(1.0, 0.0), u2(-1.0, 0.0), u2(0.0, 1.0), u2(0.0, -1.0), u2(1.0, 1.0)];
        let p = HPolytope::new(normals, vec![1.0, 1.0, 1.0, 1.0, 2f64.sqrt()]).unwrap();
        assert!(p.facets()[4].is_degenerate());
        assert_eq!(p.facets()[4].vertices.len(), 1);
    }

    #[test]
    fn build_errors() {
        let hemi = vec![u2(1.0, 0.0), u2(0.0, 1.0), u2(1.0, 1.0)];
        assert!(matches!(HPolytope::new(hemi, vec![1.0; 3]), Err(Error::UnboundedBody)));
        let few = vec![u2(1.0, 0.0), u2(-1.0, 0.0)];
        assert!(matches!(HPolytope::new(few, vec![1.0; 2]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn support_and_radial_examples() {
        let sq = fixtures::square();
        let d = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        assert_eq!(sq.support(&[1.0, 0.0]), 1.0);
        assert!((sq.support(&d) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sq.radial(&[1.0, 0.0]), 1.0);
        assert!((sq.radial(&d) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sq.dual_operator(&d).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(sq.dual_operator(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn boundary_origin_radial_is_zero() {
        let normals = vec![u2(-1.0, 0.0), u2(0.0, 1.0), u2(0.0, -1.0), u2(1.0, 0.0)];
        let p = HPolytope::new(normals, vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.radial(&[-1.0, 0.0]), 0.0);
        assert!(matches!(p.gauss_map_at(&[-1.0, 0.0]), Err(Error::ZeroRadial)));
        assert!(matches!(p.dual_operator(&[1.0, 0.0]), Err(Error::OriginOnBoundary)));
        let cone = p.normal_cone_dual();
        assert_eq!(cone.active, vec![0]);
        assert!(cone.contains(&[1.0, 0.5]) && !cone.contains(&[-1.0, 0.0]));
        assert!(fixtures::square().normal_cone_dual().is_whole_space());
    }

    #[test]
    fn gauss_map_examples() {
        let sq = fixtures::square();
        assert_eq!(sq.gauss_map_at(&[1.0, 0.0]).unwrap(), 0);
        assert_eq!(sq.gauss_map_at(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap(), 0);
        let th = 10f64.to_radians();
        assert_eq!(sq.gauss_map_at(&[th.cos(), th.sin()]).unwrap(), 0);
    }

    #[test]
    fn hausdorff_examples() {
        let sq = fixtures::square();
        assert_eq!(hausdorff_distance(&sq, &sq), 0.0);
        assert!((hausdorff_distance(&sq, &sq.scaled(2.0)) - 2f64.sqrt()).abs() < 1e-12);
        let eps = 0.01;
        let grown = sq.with_supports(vec![1.0 + eps; 4]).unwrap();
        assert!((hausdorff_distance(&sq, &grown) - 2f64.sqrt() * eps).abs() < 1e-12);
    }

    #[test]
    fn dense_grid_hausdorff_agrees() {
        // Brute force over 100k directions against the fan-aware evaluation.
        let p = fixtures::equilateral_triangle();
        let q = fixtures::regular_octagon().scaled(0.8);
        let brute = (0..100_000)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / 100_000.0;
                let d = [th.cos(), th.sin()];
                (p.support(&d) - q.support(&d)).abs()
            })
            .fold(0.0, f64::max);
        let fast = hausdorff_distance(&p, &q);
        assert!(fast >= brute - 1e-12 && fast - brute < 1e-6);
    }

    #[test]
    fn redundant_cube_cut_vertices_are_tight() {
        let mut normals: Vec<UnitVector> = fixtures::cube().normals().to_vec();
        normals.push(UnitVector::normalize(&[1.0, 1.0, 1.0]).unwrap());
        let mut t = vec![1.0; 6];
        t.push(3f64.sqrt());
        let p = HPolytope::new(normals, t).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert!(p.facets()[6].is_degenerate());
        assert_eq!(p.facets()[6].vertices.len(), 1);
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega(1), 2.0);
        assert!((omega(2) - PI).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    fn random_polytope_strategy(n: usize) -> impl Strategy<Value = HPolytope> {
        (any::<u64>(), 6usize..14).prop_map(move |(seed, k)| fixtures::random_polytope(n, k, seed))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn vertices_satisfy_constraints(p in prop_oneof![random_polytope_strategy(2), random_polytope_strategy(3)]) {
            let tol = TIGHT_TOL * p.outer_radius().max(1.0);
            for v in p.vertices() {
                let mut tight = 0;
                for (u, &t) in p.normals().iter().zip(p.supports()) {
                    let d = dot(v, u) - t;
                    prop_assert!(d <= tol);
                    if d.abs() <= tol { tight += 1; }
                }
                prop_assert!(tight >= p.dim());
            }
        }

        #[test]
        fn radial_point_lies_on_boundary(p in random_polytope_strategy(3), seed in any::<u64>()) {
            for u in crate::grassmann::random_directions(3, 20, seed) {
                let r = p.radial(&u);
                let i = p.gauss_map_at(&u).unwrap();
                let x = vecops::scale(&u, r);
                for (uj, &tj) in p.normals().iter().zip(p.supports()) {
                    prop_assert!(dot(&x, uj) - tj <= 1e-9);
                }
                prop_assert!((dot(&x, &p.normals()[i]) - p.supports()[i]).abs() <= 1e-9);
            }
        }

        #[test]
        fn dilation_homogeneity(p in prop_oneof![random_polytope_strategy(2), random_polytope_strategy(3)],
                                c in prop::sample::select(vec![0.5, 2.0, 7.3]), seed in any::<u64>()) {
            let q = p.scaled(c);
            let rebuilt = p.with_supports(p.supports().iter().map(|t| t * c).collect()).unwrap();
            for u in crate::grassmann::random_directions(p.dim(), 20, seed) {
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                prop_assert!(rel(q.support(&u), c * p.support(&u)) <= 1e-12);
                prop_assert!(rel(q.radial(&u), c * p.radial(&u)) <= 1e-12);
                prop_assert!(rel(rebuilt.support(&u), c * p.support(&u)) <= 1e-12);
                prop_assert!(rel(rebuilt.radial(&u), c * p.radial(&u)) <= 1e-12);
            }
        }

        #[test]
        fn facet_reconstruction_roundtrip(p in prop_oneof![random_polytope_strategy(2), random_polytope_strategy(3)], seed in any::<u64>()) {
            // Recover each proper facet's halfspace from its vertex cycle alone.
            let n = p.dim();
            let mut normals = Vec::new();
            let mut supports = Vec::new();
            for f in p.facets().iter().filter(|f| !f.is_degenerate()) {
                let vs: Vec<&Vec<f64>> = f.vertices.iter().map(|&j| &p.vertices()[j]).collect();
                let w = if n == 2 {
                    let d = vecops::sub(vs[1], vs[0]);
                    vec![d[1], -d[0]]
                } else {
                    let pts: Vec<[f64; 3]> = vs.iter().map(|v| vecops::to3(v)).collect();
                    clip::vector_area3(&pts).to_vec()
                };
                let mut u = UnitVector::normalize(&w).unwrap();
                if dot(&u, &p.normals()[f.normal]) < 0.0 { u = u.negated(); }
                supports.push(dot(&u, vs[0]));
                normals.push(u);
            }
            let q = HPolytope::new(normals, supports).unwrap();
            for u in crate::grassmann::random_directions(n, 50, seed) {
                prop_assert!((q.support(&u) - p.support(&u)).abs() <= 1e-9 * p.outer_radius().max(1.0));
            }
        }
    }

    #[test]
    fn dual_operator_inverts_radial() {
        let p = fixtures::random_polytope(3, 12, 11);
        for u in crate::grassmann::random_directions(3, 1000, 5) {
            let prod = p.dual_operator(&u).unwrap() * p.radial(&u);
            assert!((prod - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn radial_cones_partition_sphere() {
        let p = fixtures::random_polytope(3, 10, 3);
        let mut counts = vec![0usize; p.len()];
        for u in crate::grassmann::random_directions(3, 10_000, 9) {
            let hits: Vec<usize> = (0..p.len())
                .filter(|&i| {
                    let c = dot(&u, &p.normals()[i]);
                    c > 0.0 && (p.supports()[i] / c - p.radial(&u)).abs() <= 1e-12 * p.radial(&u)
                })
                .collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(hits[0], p.gauss_map_at(&u).unwrap());
            counts[hits[0]] += 1;
        }
        for (f, c) in p.facets().iter().zip(counts) {
            if f.is_degenerate() {
                assert_eq!(c, 0);
            }
        }
    }
}
