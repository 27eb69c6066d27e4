//! Affine dual quermassintegrals, dual intrinsic volumes, curvature totals,
//! per-facet curvature atoms, Wulff families and the symmetric-problem energy.

use crate::clip;
use crate::convex::{omega, HPolytope, StarBody, UnitVector};
use crate::error::{Error, Result};
use crate::grassmann::{self, gauss_legendre, QuadratureRule, Subspace};
use crate::solver::DiscreteMeasure;
use crate::transforms::dual_radon_section_power;
use crate::vecops::{self, dot, norm};

/// Quadrature budgets shared by every functional.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Nodes of the sphere rule.
    pub sphere: usize,
    /// Nodes of the rule on G(n, m).
    pub grassmann: usize,
    /// Nodes of the rule on G_u(n-1, m-1).
    pub sub: usize,
    /// Uniform refinement levels of the facet triangulation.
    pub refine: usize,
    /// Relative tolerance of adaptive facet subdivision for m = 1 in space; 0 disables it.
    pub facet_tol: f64,
    pub seed: u64,
}

impl Budgets {
    pub fn for_dim(n: usize) -> Self {
        if n == 2 {
            Budgets {
                sphere: 4096,
                grassmann: 4096,
                sub: 1,
                refine: 2,
                facet_tol: 0.0,
                seed: 0,
            }
        } else {
            Budgets {
                sphere: 512,
                grassmann: 4096,
                sub: 128,
                refine: 2,
                facet_tol: 1e-7,
                seed: 0,
            }
        }
    }
}

fn check_m(n: usize, m: usize) -> Result<()> {
    if m < 1 || m >= n {
        return Err(Error::BadDims { n, m });
    }
    Ok(())
}

/// `integral over G(n, m) of |K cap xi|^n` against the given rule.
pub fn psi_grassmann<B: StarBody + ?Sized>(body: &B, m: usize, rule: &QuadratureRule<Subspace>) -> Result<f64> {
    let n = body.dim();
    check_m(n, m)?;
    if rule.nodes.first().is_some_and(|(xi, _)| xi.dim() != m || xi.ambient_dim() != n) {
        return Err(Error::BadDims { n, m });
    }
    Ok(rule.integrate(|xi| body.section_volume(xi).powi(n as i32)))
}

/// `psi_grassmann` on the default rule for the budgets.
pub fn psi<B: StarBody + ?Sized>(body: &B, m: usize, budgets: &Budgets) -> Result<f64> {
    let rule = grassmann::grassmann_rule(body.dim(), m, budgets.grassmann, budgets.seed)?;
    psi_grassmann(body, m, &rule)
}

/// `(1/m) integral over the sphere of rho^m R*_m(|K cap .|^{n-1})`.
pub fn psi_spherical<B: StarBody + ?Sized>(body: &B, m: usize, budgets: &Budgets) -> Result<f64> {
    let n = body.dim();
    check_m(n, m)?;
    let rule = grassmann::sphere_rule(n, budgets.sphere, budgets.seed)?;
    let area = n as f64 * omega(n);
    let s = rule.integrate(|u| {
        body.radial(u).powi(m as i32) * dual_radon_section_power(body, u, m, n as i32 - 1, budgets.sub)
    });
    Ok(area * s / m as f64)
}

/// `(1/n) integral over the sphere of rho^q`.
pub fn dual_intrinsic_volume<B: StarBody + ?Sized>(body: &B, q: f64, budgets: &Budgets) -> Result<f64> {
    if !body.origin_interior() {
        return Err(Error::OriginOnBoundary);
    }
    let n = body.dim();
    let rule = grassmann::sphere_rule(n, budgets.sphere, budgets.seed)?;
    Ok(omega(n) * rule.integrate(|u| body.radial(u).powf(q)))
}

/// Total mass `(1/n) integral of (u . nu(rho(u) u))^{-p} rho^{q-p}` with unit weight.
pub fn dual_curvature_total(body: &dyn CurvatureBody, p: f64, q: f64, budgets: &Budgets) -> Result<f64> {
    if !body.origin_interior() {
        return Err(Error::OriginOnBoundary);
    }
    let n = body.dim();
    let rule = grassmann::sphere_rule(n, budgets.sphere, budgets.seed)?;
    let mut s = 0.0;
    for (u, w) in &rule.nodes {
        let r = body.radial(u);
        let nu = body.radial_normal(u)?;
        s += w * dot(u, &nu).powf(-p) * r.powf(q - p);
    }
    Ok(omega(n) * s)
}

/// Star bodies with a radial Gauss map.
pub trait CurvatureBody: StarBody {
    /// Outer unit normal at the boundary point `rho(u) u`.
    fn radial_normal(&self, u: &[f64]) -> Result<Vec<f64>>;
}

impl CurvatureBody for HPolytope {
    fn radial_normal(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.normals()[self.gauss_map_at(u)?].to_vec())
    }
}

impl CurvatureBody for crate::convex::Ball {
    fn radial_normal(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(u.to_vec())
    }
}

/// Masses of the curvature measure on the facet normals of a polytope.
#[derive(Clone, Debug)]
pub struct CurvatureAtoms {
    pub normals: Vec<UnitVector>,
    /// `masses[i] = supports[i]^{-p} * base[i]`.
    pub masses: Vec<f64>,
    /// The p = 0 masses.
    pub base: Vec<f64>,
    pub p: f64,
    pub m: usize,
}

impl CurvatureAtoms {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Degree-5 seven-point rule on the reference triangle: barycentric points and weights summing to 1.
fn triangle_rule() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w2 = (155.0 + s15) / 1200.0;
    let c = 1.0 / 3.0;
    [
        ([c, c, c], 0.225),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

fn refine(tris: Vec<[[f64; 3]; 3]>, levels: usize) -> Vec<[[f64; 3]; 3]> {
    let mut cur = tris;
    for _ in 0..levels {
        let mut next = Vec::with_capacity(cur.len() * 4);
        for [a, b, c] in cur {
            let mid = |p: [f64; 3], q: [f64; 3]| [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0];
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        cur = next;
    }
    cur
}

/// Pieces of a facet on which the chord through the origin is smooth:
/// `{x in F_i : -x lies in the radial cone of facet j}` for each j.
fn kink_pieces_3d(p: &HPolytope, poly: &[[f64; 3]]) -> Vec<Vec<[f64; 3]>> {
    let k = p.len();
    let scaled: Vec<[f64; 3]> = (0..k)
        .map(|l| {
            let u = &p.normals()[l];
            let t = p.supports()[l];
            [u[0] / t, u[1] / t, u[2] / t]
        })
        .collect();
    let eps = 1e-13 * p.outer_radius().max(1.0);
    let mut out = Vec::new();
    for j in 0..k {
        let mut face = vec![clip::Face {
            label: 0,
            pts: poly.to_vec(),
        }];
        // Quick reject: -x must see facet j.
        let uj = &p.normals()[j];
        face = clip_face(&face, [uj[0], uj[1], uj[2]], eps);
        for l in 0..k {
            if l == j || face.is_empty() {
                continue;
            }
            let a = [
                scaled[j][0] - scaled[l][0],
                scaled[j][1] - scaled[l][1],
                scaled[j][2] - scaled[l][2],
            ];
            face = clip_face(&face, a, eps);
        }
        if let Some(f) = face.pop() {
            if f.pts.len() >= 3 && clip::polygon_area3(&f.pts) > 0.0 {
                out.push(f.pts);
            }
        }
    }
    out
}

/// Keeps `{x : a.x <= 0}` of a single planar polygon.
fn clip_face(face: &[clip::Face], a: [f64; 3], eps: f64) -> Vec<clip::Face> {
    let Some(f) = face.first() else {
        return Vec::new();
    };
    let r = f.pts.len();
    let d = |q: &[f64; 3]| a[0] * q[0] + a[1] * q[1] + a[2] * q[2];
    let mut pts = Vec::with_capacity(r + 1);
    for j in 0..r {
        let c = f.pts[j];
        let n = f.pts[(j + 1) % r];
        let (dc, dn) = (d(&c), d(&n));
        if dc <= 0.0 {
            pts.push(c);
        }
        if (dc <= 0.0) != (dn <= 0.0) {
            let s = dc / (dc - dn);
            pts.push([c[0] + s * (n[0] - c[0]), c[1] + s * (n[1] - c[1]), c[2] + s * (n[2] - c[2])]);
        }
    }
    let _ = eps;
    if pts.len() < 3 {
        return Vec::new();
    }
    vec![clip::Face { label: 0, pts }]
}

/// Splits the segment `[a, b]` where `-x` crosses a vertex direction.
fn kink_pieces_2d(p: &HPolytope, a: &[f64], b: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = vecops::sub(b, a);
    let cross = |x: &[f64], y: &[f64]| x[0] * y[1] - x[1] * y[0];
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for v in p.vertices() {
        let den = cross(&d, v);
        if den.abs() < 1e-300 {
            continue;
        }
        let lam = -cross(a, v) / den;
        // The crossing point must be opposite the vertex.
        let x = [a[0] + lam * d[0], a[1] + lam * d[1]];
        if lam > 1e-12 && lam < 1.0 - 1e-12 && dot(&x, v) < 0.0 {
            cuts.push(lam);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    cuts.windows(2)
        .map(|w| {
            (
                vec![a[0] + w[0] * d[0], a[1] + w[0] * d[1]],
                vec![a[0] + w[1] * d[0], a[1] + w[1] * d[1]],
            )
        })
        .collect()
}

/// Facet-surface integrals `integral over F_i of t_i |x|^{m-n} R*_m(profile)(x/|x|)`, the p = 0 atoms.
fn facet_atoms(p: &HPolytope, m: usize, budgets: &Budgets) -> Vec<f64> {
    let n = p.dim();
    let e = n as i32 - 1;
    let integrand = |x: &[f64], t: f64| {
        let r = norm(x);
        let u = vecops::scale(x, 1.0 / r);
        t * r.powi(m as i32 - n as i32) * dual_radon_section_power(p, &u, m, e, budgets.sub)
    };
    let gl = gauss_legendre(16);
    let tri = triangle_rule();
    let mut atoms = Vec::with_capacity(p.len());
    for f in p.facets() {
        let t = p.supports()[f.normal];
        if f.is_degenerate() {
            atoms.push(0.0);
            continue;
        }
        let verts: Vec<&Vec<f64>> = f.vertices.iter().map(|&j| &p.vertices()[j]).collect();
        let mut s = 0.0;
        if n == 2 {
            for (a, b) in kink_pieces_2d(p, verts[0], verts[1]) {
                let len = norm(&vecops::sub(&b, &a));
                for &(x, w) in gl {
                    let pt = [a[0] + x * (b[0] - a[0]), a[1] + x * (b[1] - a[1])];
                    s += w * len * integrand(&pt, t);
                }
            }
        } else {
            let poly: Vec<[f64; 3]> = verts.iter().map(|v| vecops::to3(v)).collect();
            let pieces = if m == 1 { kink_pieces_3d(p, &poly) } else { vec![poly] };
            let mut tris = Vec::new();
            for piece in pieces {
                tris.extend((1..piece.len() - 1).map(|j| [piece[0], piece[j], piece[j + 1]]));
            }
            let tris = refine(tris, budgets.refine);
            let rule = |[a, b, c]: &[[f64; 3]; 3]| -> f64 {
                let area = clip::polygon_area3(&[*a, *b, *c]);
                if area == 0.0 {
                    return 0.0;
                }
                tri.iter()
                    .map(|(bary, w)| {
                        let x: Vec<f64> = (0..3).map(|d| bary[0] * a[d] + bary[1] * b[d] + bary[2] * c[d]).collect();
                        w * area * integrand(&x, t)
                    })
                    .sum()
            };
            let coarse: Vec<f64> = tris.iter().map(&rule).collect();
            s = coarse.iter().sum();
            if budgets.facet_tol > 0.0 && m == 1 {
                let tol = budgets.facet_tol * s.abs();
                s = tris
                    .iter()
                    .zip(&coarse)
                    .map(|(tr, &v)| adapt(&rule, *tr, v, tol * clip::polygon_area3(tr) / f.area, 0))
                    .sum();
            }
        }
        atoms.push(s);
    }
    atoms
}

/// Subdivides until the four children agree with their parent to `tol`.
fn adapt(rule: &impl Fn(&[[f64; 3]; 3]) -> f64, tr: [[f64; 3]; 3], value: f64, tol: f64, depth: usize) -> f64 {
    let kids = refine(vec![tr], 1);
    let vals: Vec<f64> = kids.iter().map(rule).collect();
    let sum: f64 = vals.iter().sum();
    if (sum - value).abs() <= tol || depth >= 10 {
        return sum;
    }
    kids.into_iter()
        .zip(vals)
        .map(|(k, v)| adapt(rule, k, v, tol / 4.0, depth + 1))
        .sum()
}

fn check_interior(p: &HPolytope) -> Result<()> {
    for (i, &t) in p.supports().iter().enumerate() {
        if t < 0.0 {
            return Err(Error::NonPositiveSupport { index: i, value: t });
        }
        if t == 0.0 {
            return Err(Error::OriginOnBoundary);
        }
    }
    Ok(())
}

/// Grassmannian form of the p = 0 atoms on a fixed rule:
/// `atom_i = m * sum_xi w |K cap xi|^{n-1} |cone_i(xi)|`. On the same rule these are exactly
/// `(t_i / n) d psi / d t_i`, so objective and gradient agree to rounding.
pub fn section_atoms(p: &HPolytope, m: usize, rule: &QuadratureRule<Subspace>) -> Result<Vec<f64>> {
    let n = p.dim();
    check_m(n, m)?;
    check_interior(p)?;
    let mut atoms = vec![0.0; p.len()];
    for (xi, w) in &rule.nodes {
        let cones = p.section_cones(xi);
        let vol: f64 = cones.iter().map(|c| c.1).sum();
        let f = w * m as f64 * vol.powi(n as i32 - 1);
        for (i, a) in cones {
            if i < atoms.len() {
                atoms[i] += f * a;
            }
        }
    }
    Ok(atoms)
}

/// Per-facet masses of the L_p curvature measure (facet-surface form).
pub fn curvature_atoms(p: &HPolytope, pexp: f64, m: usize, budgets: &Budgets) -> Result<CurvatureAtoms> {
    check_m(p.dim(), m)?;
    check_interior(p)?;
    let base = facet_atoms(p, m, budgets);
    let masses = base
        .iter()
        .zip(p.supports())
        .map(|(a, t)| t.powf(-pexp) * a)
        .collect();
    Ok(CurvatureAtoms {
        normals: p.normals().to_vec(),
        masses,
        base,
        p: pexp,
        m,
    })
}

/// Same masses by binning sphere-rule nodes through the radial Gauss map.
pub fn curvature_atoms_cone(p: &HPolytope, pexp: f64, m: usize, budgets: &Budgets) -> Result<CurvatureAtoms> {
    let n = p.dim();
    check_m(n, m)?;
    check_interior(p)?;
    let rule = grassmann::sphere_rule(n, budgets.sphere, budgets.seed)?;
    let area = n as f64 * omega(n);
    let mut base = vec![0.0; p.len()];
    for (u, w) in &rule.nodes {
        let i = p.gauss_map_at(u)?;
        base[i] += w * area * p.radial(u).powi(m as i32) * dual_radon_section_power(p, u, m, n as i32 - 1, budgets.sub);
    }
    let masses = base
        .iter()
        .zip(p.supports())
        .map(|(a, t)| t.powf(-pexp) * a)
        .collect();
    Ok(CurvatureAtoms {
        normals: p.normals().to_vec(),
        masses,
        base,
        p: pexp,
        m,
    })
}

/// Member `K_t` of the L_p Wulff family: supports `(h0^p + t f)^{1/p}`, or `h0 e^{t f}` at p = 0.
pub fn wulff_shape(normals: &[UnitVector], h0: &[f64], f: &[f64], t: f64, p: f64) -> Result<HPolytope> {
    let supports = wulff_supports(h0, f, t, p)?;
    HPolytope::new(normals.to_vec(), supports)
}

pub fn wulff_supports(h0: &[f64], f: &[f64], t: f64, p: f64) -> Result<Vec<f64>> {
    h0.iter()
        .zip(f)
        .enumerate()
        .map(|(i, (&h, &fi))| {
            let v = if p == 0.0 {
                h * (t * fi).exp()
            } else {
                let b = h.powf(p) + t * fi;
                if b <= 0.0 {
                    return Err(Error::NonPositiveSupport { index: i, value: b });
                }
                b.powf(1.0 / p)
            };
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonPositiveSupport { index: i, value: v })
            }
        })
        .collect()
}

/// First variation of psi along the Wulff family generated by `f` on the facet normals.
pub fn variation_derivative(p: &HPolytope, f: &[f64], pexp: f64, m: usize, budgets: &Budgets) -> Result<f64> {
    let atoms = curvature_atoms(p, pexp, m, budgets)?;
    Ok(variation_from_atoms(&atoms, f, p.dim()))
}

pub fn variation_from_atoms(atoms: &CurvatureAtoms, f: &[f64], n: usize) -> f64 {
    let s: f64 = atoms.masses.iter().zip(f).map(|(a, fi)| a * fi).sum();
    if atoms.p == 0.0 {
        n as f64 * s
    } else {
        n as f64 / atoms.p * s
    }
}

/// `E_{p,mu}(K)`: `-(1/p) log((1/|mu|) sum a h^p)` for p > 0, `-(1/|mu|) sum a log h` for p = 0.
pub fn energy<B: StarBody + ?Sized>(body: &B, measure: &DiscreteMeasure, p: f64) -> f64 {
    let total = measure.total();
    let it = measure.atoms().iter().zip(measure.weights());
    if p == 0.0 {
        -it.map(|(u, a)| a * body.support(u).ln()).sum::<f64>() / total
    } else {
        -(it.map(|(u, a)| a * body.support(u).powf(p)).sum::<f64>() / total).ln() / p
    }
}

/// `J = (1/(mn)) log psi_m(K) + E_{p,mu}(K)` for origin-symmetric K and even mu.
pub fn j_functional<B: StarBody + ?Sized>(body: &B, measure: &DiscreteMeasure, p: f64, m: usize, budgets: &Budgets) -> Result<f64> {
    measure.check_even()?;
    let mut worst: f64 = 0.0;
    for u in measure.atoms() {
        let d = (body.support(u) - body.support(&u.negated())).abs();
        worst = worst.max(d);
    }
    if worst > 1e-8 {
        return Err(Error::AsymmetricInput(worst));
    }
    let n = body.dim();
    let psi = psi(body, m, budgets)?;
    Ok(psi.ln() / (m * n) as f64 + energy(body, measure, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::convex::Ball;
    use crate::fixtures;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = gauss_legendre(16);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(31)).sum();
        assert!((s - 1.0 / 32.0).abs() < 1e-15);
        assert!((gl.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let rule = triangle_rule();
        // Integral of x^a y^b over the unit reference triangle = a! b! / (a+b+2)!; divide by area 1/2.
        let fact = |k: u32| (1..=k).map(|x| x as f64).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2) * 2.0;
                let approx: f64 = rule.iter().map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32)).sum();
                assert!((approx - exact).abs() < 1e-14, "{a} {b}");
            }
        }
    }

    #[test]
    fn ball_values() {
        for (n, m) in [(2usize, 1usize), (3, 1), (3, 2)] {
            let b = Ball::unit(n);
            let bud = Budgets::for_dim(n);
            let exact = omega(m).powi(n as i32);
            assert!(rel(psi(&b, m, &bud).unwrap(), exact) < 1e-12);
            assert!(rel(psi_spherical(&b, m, &bud).unwrap(), exact) < 1e-12);
        }
    }

    #[test]
    fn square_value() {
        let sq = fixtures::square();
        let bud = Budgets::for_dim(2);
        assert!(rel(psi(&sq, 1, &bud).unwrap(), 16.0 / PI) < 1e-6);
        assert!(rel(psi_spherical(&sq, 1, &bud).unwrap(), 16.0 / PI) < 1e-3);
    }

    #[test]
    fn dual_intrinsic_examples() {
        let bud = Budgets::for_dim(2);
        assert!(rel(dual_intrinsic_volume(&Ball::unit(3), 2.5, &Budgets::for_dim(3)).unwrap(), omega(3)) < 1e-12);
        let sq = fixtures::square();
        assert!(rel(dual_intrinsic_volume(&sq, 2.0, &bud).unwrap(), 4.0) < 1e-6);
        let a = dual_intrinsic_volume(&sq, 1.3, &bud).unwrap();
        let b = dual_intrinsic_volume(&sq.scaled(2.0), 1.3, &bud).unwrap();
        assert!(rel(b / a, 2f64.powf(1.3)) < 1e-12);
    }

    #[test]
    fn curvature_total_examples() {
        let bud = Budgets::for_dim(2);
        let b = Ball::unit(2);
        assert!(rel(dual_curvature_total(&b, 1.7, 0.4, &bud).unwrap(), PI) < 1e-12);
        let sq = fixtures::square();
        assert!(rel(dual_curvature_total(&sq, 0.0, 2.0, &bud).unwrap(), 4.0) < 1e-6);
        let a = dual_curvature_total(&sq, 1.5, 3.0, &bud).unwrap();
        let c = dual_curvature_total(&sq.scaled(3.0), 1.5, 3.0, &bud).unwrap();
        assert!(rel(c / a, 3f64.powf(1.5)) < 1e-10);
    }

    #[test]
    fn square_atoms() {
        let sq = fixtures::square();
        let at = curvature_atoms(&sq, 0.0, 1, &Budgets::for_dim(2)).unwrap();
        for a in &at.masses {
            assert!(rel(*a, 4.0 / PI) < 1e-10, "{a}");
        }
        // Binning error is about one node per cone.
        let bud = Budgets { sphere: 40_001, ..Budgets::for_dim(2) };
        let cone = curvature_atoms_cone(&sq, 0.0, 1, &bud).unwrap();
        for a in &cone.masses {
            assert!(rel(*a, 4.0 / PI) < 1e-3, "{a}");
        }
    }

    #[test]
    fn planar_closed_form_atoms() {
        // atom_i(0) = (1/pi) integral over Delta_i of rho (rho(u) + rho(-u)) du, by a dense angular sum.
        let p = fixtures::random_polytope(2, 7, 21);
        let at = curvature_atoms(&p, 0.0, 1, &Budgets::for_dim(2)).unwrap();
        // Midpoint sums per facet cone, so the binning introduces no jumps.
        let mut oracle = vec![0.0; p.len()];
        let steps = 200_000;
        for f in p.facets().iter().filter(|f| !f.is_degenerate()) {
            let (a, b) = (&p.vertices()[f.vertices[0]], &p.vertices()[f.vertices[1]]);
            let th0 = a[1].atan2(a[0]);
            let span = (b[1].atan2(b[0]) - th0).rem_euclid(2.0 * PI);
            let h = span / steps as f64;
            for j in 0..steps {
                let th = th0 + h * (j as f64 + 0.5);
                let u = [th.cos(), th.sin()];
                oracle[f.normal] += p.radial(&u) * (p.radial(&u) + p.radial(&[-u[0], -u[1]])) / PI * h;
            }
        }
        for (a, o) in at.base.iter().zip(&oracle) {
            assert!((a - o).abs() <= 1e-6 * o.max(1e-3), "{a} {o}");
        }
    }

    #[test]
    fn ball_total_mass() {
        // Planar unit ball as a fine polygon approaches m * omega_m^n = 4.
        let k = 720;
        let normals: Vec<UnitVector> = (0..k).map(|j| UnitVector::from_angle(2.0 * PI * j as f64 / k as f64)).collect();
        let poly = HPolytope::new(normals, vec![1.0; k]).unwrap();
        let at = curvature_atoms(&poly, 0.0, 1, &Budgets::for_dim(2)).unwrap();
        assert!(rel(at.total(), 4.0) < 1e-4);
    }

    #[test]
    fn atom_relation_and_degenerate_facets() {
        let normals = vec![
            UnitVector::axis(2, 0),
            UnitVector::axis(2, 1),
            UnitVector::axis(2, 0).negated(),
            UnitVector::axis(2, 1).negated(),
            UnitVector::normalize(&[1.0, 1.0]).unwrap(),
        ];
        let p = HPolytope::new(normals, vec![1.0, 1.0, 1.0, 1.0, 5.0]).unwrap();
        let at = curvature_atoms(&p, 2.5, 1, &Budgets::for_dim(2)).unwrap();
        assert_eq!(at.masses[4], 0.0);
        for i in 0..5 {
            assert_eq!(at.masses[i], p.supports()[i].powf(-2.5) * at.base[i]);
        }
    }

    #[test]
    fn total_mass_identity_3d() {
        let p = fixtures::random_polytope(3, 10, 5);
        let bud = Budgets { grassmann: 20000, ..Budgets::for_dim(3) };
        for m in 1..3 {
            let at = curvature_atoms(&p, 0.0, m, &bud).unwrap();
            let psi = psi(&p, m, &bud).unwrap();
            assert!(rel(at.total(), m as f64 * psi) < 2e-3, "m={m} {} {}", at.total(), m as f64 * psi);
        }
    }

    #[test]
    fn wulff_examples() {
        let sq = fixtures::square();
        let f = [0.3, -0.2, 0.1, 0.4];
        let same = wulff_shape(sq.normals(), sq.supports(), &f, 0.0, 2.0).unwrap();
        assert_eq!(same.supports(), sq.supports());
        let h0p: Vec<f64> = sq.supports().iter().map(|h| h.powf(3.0)).collect();
        let grown = wulff_shape(sq.normals(), sq.supports(), &h0p, 0.5, 3.0).unwrap();
        assert!(grown.supports().iter().all(|t| (t - 1.5f64.powf(1.0 / 3.0)).abs() < 1e-15));
        let dil = wulff_shape(sq.normals(), sq.supports(), &[1.0; 4], 0.2, 0.0).unwrap();
        assert!(dil.supports().iter().all(|t| (t - 0.2f64.exp()).abs() < 1e-15));
        assert!(matches!(
            wulff_shape(sq.normals(), sq.supports(), &[-1.0; 4], 2.0, 1.0),
            Err(Error::NonPositiveSupport { .. })
        ));
    }

    #[test]
    fn variation_examples() {
        let sq = fixtures::square();
        let bud = Budgets::for_dim(2);
        let d = variation_derivative(&sq, &[1.0; 4], 0.0, 1, &bud).unwrap();
        assert!(rel(d, 2.0 * 16.0 / PI) < 1e-9);
        let d = variation_derivative(&sq, &[1.0, -1.0, 1.0, -1.0], 1.5, 1, &bud).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn finite_difference_on_square() {
        let sq = fixtures::square();
        let bud = Budgets::for_dim(2);
        let f = [0.7, -0.3, 0.2, 0.5];
        for p in [0.0, 1.5, 3.0] {
            let h = 1e-4;
            let plus = wulff_shape(sq.normals(), sq.supports(), &f, h, p).unwrap();
            let minus = wulff_shape(sq.normals(), sq.supports(), &f, -h, p).unwrap();
            let rule = grassmann::grassmann_rule(2, 1, 20000, 0).unwrap();
            let fd = (psi_grassmann(&plus, 1, &rule).unwrap() - psi_grassmann(&minus, 1, &rule).unwrap()) / (2.0 * h);
            let an = variation_derivative(&sq, &f, p, 1, &bud).unwrap();
            assert!(rel(fd, an) < 1e-2, "p={p}: {fd} vs {an}");
        }
    }

    #[test]
    fn j_functional_examples() {
        let mu = crate::fixtures::octagon_measure();
        let bud = Budgets::for_dim(2);
        let jb = j_functional(&Ball::unit(2), &mu, 1.5, 1, &bud).unwrap();
        assert!((jb - 2f64.ln()).abs() < 1e-12);
        let cube_mu = DiscreteMeasure::new(fixtures::cube().normals().to_vec(), vec![1.0; 6]).unwrap();
        let jb3 = j_functional(&Ball::unit(3), &cube_mu, 1.0, 2, &Budgets::for_dim(3)).unwrap();
        assert!((jb3 - 0.5 * PI.ln()).abs() < 1e-9, "{jb3}");
        let oct = fixtures::regular_octagon();
        let j1 = j_functional(&oct, &mu, 2.0, 1, &bud).unwrap();
        let j2 = j_functional(&oct.scaled(0.5), &mu, 2.0, 1, &bud).unwrap();
        assert!((j1 - j2).abs() < 1e-8);
        let tri = fixtures::equilateral_triangle();
        assert!(matches!(
            j_functional(&tri, &crate::fixtures::cross_measure(), 1.0, 1, &bud),
            Err(Error::AsymmetricInput(_))
        ));
    }

    #[test]
    fn section_atoms_are_the_rule_gradient() {
        let p = fixtures::random_polytope(3, 9, 5);
        let rule = grassmann::grassmann_rule(3, 2, 4096, 0).unwrap();
        let atoms = section_atoms(&p, 2, &rule).unwrap();
        let psi0 = psi_grassmann(&p, 2, &rule).unwrap();
        assert!(rel(atoms.iter().sum::<f64>(), 2.0 * psi0) < 1e-12);
        let h = 1e-6;
        for i in [0, 4] {
            let mut up = p.supports().to_vec();
            let mut dn = up.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (psi_grassmann(&p.with_supports(up).unwrap(), 2, &rule).unwrap()
                - psi_grassmann(&p.with_supports(dn).unwrap(), 2, &rule).unwrap())
                / (2.0 * h);
            assert!(rel(fd, 3.0 * atoms[i] / p.supports()[i]) < 1e-5);
        }
        let facet = curvature_atoms(&p, 0.0, 2, &Budgets::for_dim(3)).unwrap();
        for (a, b) in atoms.iter().zip(&facet.base) {
            assert!((a - b).abs() <= 1e-2 * facet.total() / 9.0, "{a} {b}");
        }
    }
}
