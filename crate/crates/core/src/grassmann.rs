//! Subspaces, Haar sampling on Grassmannians, and deterministic quadrature on
//! G(n, m), on the sphere, and on the sub-Grassmannians of u-perp.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::convex::StarBody;
use crate::error::{Error, Result};
use crate::vecops::{self, dot, norm};

/// An m-dimensional linear subspace of R^n held by an orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    n: usize,
    frame: Vec<Vec<f64>>,
}

impl Subspace {
    /// Accepts a frame that is already orthonormal within 1e-10.
    pub fn new(n: usize, frame: Vec<Vec<f64>>) -> Result<Self> {
        if frame.len() > n || frame.iter().any(|f| f.len() != n) {
            return Err(Error::BadDims { n, m: frame.len() });
        }
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - e).abs() > 1e-10 {
                    return Err(Error::DegenerateInput("frame is not orthonormal".into()));
                }
            }
        }
        Ok(Subspace { n, frame })
    }

    /// Orthonormalizes the given spanning vectors.
    pub fn span(n: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let frame = vecops::orthonormalize(vectors)
            .ok_or_else(|| Error::DegenerateInput("spanning vectors are dependent".into()))?;
        Subspace::new(n, frame)
    }

    /// The line through a unit vector.
    pub fn line(u: &[f64]) -> Self {
        Subspace {
            n: u.len(),
            frame: vec![u.to_vec()],
        }
    }

    /// The plane orthogonal to a unit vector of R^3.
    pub fn plane_orthogonal_to(u: &[f64]) -> Self {
        let (a, b) = vecops::plane_basis(&vecops::to3(u));
        Subspace {
            n: 3,
            frame: vec![a.to_vec(), b.to_vec()],
        }
    }

    /// Hyperplane `u^perp` (n = 2 or 3).
    pub fn orthogonal_complement_of(u: &[f64]) -> Self {
        if u.len() == 2 {
            Subspace::line(&[-u[1], u[0]])
        } else {
            Subspace::plane_orthogonal_to(u)
        }
    }

    pub(crate) fn trivial(n: usize) -> Self {
        Subspace { n, frame: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn rotated(&self, r: &[Vec<f64>]) -> Subspace {
        Subspace {
            n: self.n,
            frame: self.frame.iter().map(|f| vecops::mat_vec(r, f)).collect(),
        }
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for f in &self.frame {
            let c = dot(f, x);
            for (o, fi) in out.iter_mut().zip(f) {
                *o += c * fi;
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        norm(&vecops::sub(x, &self.project(x))) <= tol * norm(x).max(1.0)
    }

    /// Frame-independent key: the projection matrix quantized on a 1e-7 grid.
    pub fn canonical_key(&self) -> Vec<i64> {
        let mut key = Vec::with_capacity(self.n * (self.n + 1) / 2 + 1);
        key.push(self.dim() as i64);
        for r in 0..self.n {
            for c in r..self.n {
                let v: f64 = self.frame.iter().map(|f| f[r] * f[c]).sum();
                key.push((v * 1e7).round() as i64);
            }
        }
        key
    }
}

/// How a quadrature rule's nodes were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    CircleUniform,
    SphereFibonacci,
    MonteCarlo,
    /// The one-point space G_u(n-1, 0).
    Point,
}

/// Equal- or positive-weight quadrature; weights sum to 1.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    pub kind: RuleKind,
    pub nodes: Vec<(T, f64)>,
    pub seed: Option<u64>,
}

impl<T> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of `w f(node)` in node order.
    pub fn integrate(&self, mut f: impl FnMut(&T) -> f64) -> f64 {
        self.nodes.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 1 || m >= n {
        return Err(Error::BadDims { n, m });
    }
    Ok(())
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Haar-distributed subspaces: orthonormalized standard Gaussian vectors.
pub fn haar_sample(n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<Subspace>> {
    check_dims(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let vs: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vector(&mut rng, n)).collect();
        if let Some(frame) = vecops::orthonormalize(&vs) {
            out.push(Subspace { n, frame });
        }
    }
    Ok(out)
}

/// Uniformly distributed unit vectors.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = gaussian_vector(&mut rng, n);
        let r = norm(&g);
        if r > 1e-12 {
            out.push(vecops::scale(&g, 1.0 / r));
        }
    }
    out
}

/// Haar-random rotation (determinant +1), as rows.
pub fn random_rotation(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let vs: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(&mut rng, n)).collect();
        if let Some(mut q) = vecops::orthonormalize(&vs) {
            if vecops::determinant(&q) < 0.0 {
                q[0] = vecops::neg(&q[0]);
            }
            return q;
        }
    }
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Fibonacci lattice on S^2 with `count` points, equal area per point.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Fibonacci lattice on the open upper hemisphere z > 0.
pub fn fibonacci_hemisphere(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let z = (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Deterministic rule realizing the Haar probability on G(n, m).
pub fn grassmann_rule(n: usize, m: usize, budget: usize, seed: u64) -> Result<QuadratureRule<Subspace>> {
    check_dims(n, m)?;
    if budget < 16 {
        return Err(Error::BudgetTooSmall { got: budget, min: 16 });
    }
    let w = 1.0 / budget as f64;
    let rule = match (n, m) {
        (2, 1) => QuadratureRule {
            kind: RuleKind::CircleUniform,
            nodes: (0..budget)
                .map(|j| {
                    let th = PI * j as f64 / budget as f64;
                    (Subspace::line(&[th.cos(), th.sin()]), w)
                })
                .collect(),
            seed: None,
        },
        (3, 1) | (3, 2) => QuadratureRule {
            kind: RuleKind::SphereFibonacci,
            nodes: fibonacci_hemisphere(budget)
                .into_iter()
                .map(|p| {
                    let xi = if m == 1 {
                        Subspace::line(&p)
                    } else {
                        Subspace::plane_orthogonal_to(&p)
                    };
                    (xi, w)
                })
                .collect(),
            seed: None,
        },
        _ => QuadratureRule {
            kind: RuleKind::MonteCarlo,
            nodes: haar_sample(n, m, budget, seed)?.into_iter().map(|s| (s, w)).collect(),
            seed: Some(seed),
        },
    };
    Ok(rule)
}

/// Probability rule on S^{n-1}: uniform angles (n=2), Fibonacci lattice (n=3),
/// Gaussian Monte Carlo otherwise.
pub fn sphere_rule(n: usize, budget: usize, seed: u64) -> Result<QuadratureRule<Vec<f64>>> {
    if n < 2 {
        return Err(Error::BadDims { n, m: 0 });
    }
    if budget < 16 {
        return Err(Error::BudgetTooSmall { got: budget, min: 16 });
    }
    let w = 1.0 / budget as f64;
    Ok(match n {
        2 => QuadratureRule {
            kind: RuleKind::CircleUniform,
            nodes: (0..budget)
                .map(|j| {
                    let th = 2.0 * PI * j as f64 / budget as f64;
                    (vec![th.cos(), th.sin()], w)
                })
                .collect(),
            seed: None,
        },
        3 => QuadratureRule {
            kind: RuleKind::SphereFibonacci,
            nodes: fibonacci_sphere(budget).into_iter().map(|p| (p, w)).collect(),
            seed: None,
        },
        _ => QuadratureRule {
            kind: RuleKind::MonteCarlo,
            nodes: random_directions(n, budget, seed).into_iter().map(|p| (p, w)).collect(),
            seed: Some(seed),
        },
    })
}

/// Rule for G_u(n-1, m-1), the (m-1)-subspaces of u-perp.
pub fn sub_grassmann_rule(u: &[f64], m: usize, budget: usize) -> Result<QuadratureRule<Subspace>> {
    let n = u.len();
    check_dims(n, m)?;
    if m == 1 {
        return Ok(QuadratureRule {
            kind: RuleKind::Point,
            nodes: vec![(Subspace::trivial(n), 1.0)],
            seed: None,
        });
    }
    if budget == 0 {
        return Err(Error::BudgetTooSmall { got: 0, min: 1 });
    }
    let w = 1.0 / budget as f64;
    if n == 3 {
        let (a, b) = vecops::plane_basis(&vecops::to3(u));
        let nodes = (0..budget)
            .map(|j| {
                let th = PI * j as f64 / budget as f64;
                let (c, s) = (th.cos(), th.sin());
                let z = vec![c * a[0] + s * b[0], c * a[1] + s * b[1], c * a[2] + s * b[2]];
                (Subspace::line(&z), w)
            })
            .collect();
        return Ok(QuadratureRule {
            kind: RuleKind::CircleUniform,
            nodes,
            seed: None,
        });
    }
    // Generic: Haar samples of G(n-1, m-1) carried into u-perp by an orthonormal basis.
    let mut spanning = vec![u.to_vec()];
    for e in 0..n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        spanning.push(v);
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in spanning {
        let mut w = v.clone();
        for q in std::iter::once(&u.to_vec()).chain(basis.iter()) {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
        let r = norm(&w);
        if r > 1e-8 && basis.len() < n - 1 {
            basis.push(vecops::scale(&w, 1.0 / r));
        }
    }
    let seed = u.iter().fold(0u64, |h, c| h.rotate_left(7) ^ c.to_bits());
    let nodes = if m - 1 == n - 1 {
        vec![(Subspace { n, frame: basis }, 1.0)]
    } else {
        haar_sample(n - 1, m - 1, budget, seed)?
            .into_iter()
            .map(|s| {
                let frame = s
                    .frame
                    .iter()
                    .map(|f| {
                        let mut x = vec![0.0; n];
                        for (c, b) in f.iter().zip(&basis) {
                            for (xi, bi) in x.iter_mut().zip(b) {
                                *xi += c * bi;
                            }
                        }
                        x
                    })
                    .collect();
                (Subspace { n, frame }, w)
            })
            .collect()
    };
    Ok(QuadratureRule {
        kind: RuleKind::MonteCarlo,
        nodes,
        seed: Some(seed),
    })
}

/// `span{u, zeta}` for a unit `u` orthogonal to `zeta`.
pub fn join(u: &[f64], zeta: &Subspace) -> Subspace {
    let mut frame = Vec::with_capacity(zeta.dim() + 1);
    frame.push(u.to_vec());
    frame.extend(zeta.frame().iter().cloned());
    Subspace { n: u.len(), frame }
}

/// m-dimensional volume of `K intersected with xi`.
pub fn section_volume<B: StarBody + ?Sized>(body: &B, xi: &Subspace) -> f64 {
    body.section_volume(xi)
}

fn gauss_legendre_nodes(k: usize) -> Vec<(f64, f64)> {
    // Nodes on [0, 1] with weights summing to 1.
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        let mut x = (PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Gauss-Legendre nodes on [0, 1], weights summing to 1, for orders 1 to 32.
pub(crate) fn gauss_legendre(k: usize) -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (0..=32).map(|q| if q == 0 { Vec::new() } else { gauss_legendre_nodes(q) }).collect());
    &table[k.clamp(1, 32)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Ball;
    use crate::fixtures;
    use proptest::prelude::*;

    fn ks_uniform(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max)
    }

    fn line_angle(s: &Subspace) -> f64 {
        let f = &s.frame()[0];
        f[1].atan2(f[0]).rem_euclid(PI) / PI
    }

    #[test]
    fn haar_lines_in_plane_are_uniform() {
        let xs: Vec<f64> = haar_sample(2, 1, 10_000, 17).unwrap().iter().map(line_angle).collect();
        assert!(ks_uniform(xs) < 0.02);
    }

    #[test]
    fn haar_lines_in_space_have_uniform_moments() {
        let s = haar_sample(3, 1, 10_000, 23).unwrap();
        let mean: f64 = s.iter().map(|x| x.frame()[0][2].powi(2)).sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn haar_is_rotation_invariant() {
        let s = haar_sample(2, 1, 10_000, 29).unwrap();
        let th: f64 = 0.7;
        let r = vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]];
        let a: Vec<f64> = s.iter().map(line_angle).collect();
        let b: Vec<f64> = s.iter().map(|x| line_angle(&x.rotated(&r))).collect();
        assert!(ks_uniform(a) < 0.03 && ks_uniform(b) < 0.03);
    }

    #[test]
    fn haar_rejects_bad_dims() {
        assert!(matches!(haar_sample(3, 3, 1, 0), Err(Error::BadDims { .. })));
        assert!(matches!(haar_sample(3, 0, 1, 0), Err(Error::BadDims { .. })));
    }

    #[test]
    fn grassmann_rule_examples() {
        let r = grassmann_rule(2, 1, 64, 0).unwrap();
        assert!((r.weight_sum() - 1.0).abs() < 1e-14);
        let c2 = r.integrate(|xi| xi.frame()[0][0].powi(2));
        assert!((c2 - 0.5).abs() < 1e-12);
        let r = grassmann_rule(3, 1, 2000, 0).unwrap();
        let m = r.integrate(|xi| xi.frame()[0][2].powi(2));
        assert!((m - 1.0 / 3.0).abs() < 1e-3);
        assert!(matches!(grassmann_rule(3, 1, 8, 0), Err(Error::BudgetTooSmall { .. })));
        let mc = grassmann_rule(4, 2, 32, 5).unwrap();
        assert_eq!(mc.kind, RuleKind::MonteCarlo);
        assert_eq!(mc.seed, Some(5));
    }

    #[test]
    fn sub_grassmann_examples() {
        let r = sub_grassmann_rule(&[0.0, 0.0, 1.0], 1, 50).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.nodes[0].1, 1.0);
        let r = sub_grassmann_rule(&[0.0, 0.0, 1.0], 2, 40).unwrap();
        assert_eq!(r.len(), 40);
        for (j, (z, w)) in r.nodes.iter().enumerate() {
            assert!((w - 1.0 / 40.0).abs() < 1e-15);
            assert!(z.frame()[0][2].abs() < 1e-15);
            let ang = z.frame()[0][1].atan2(z.frame()[0][0]).rem_euclid(PI);
            let expected = PI * j as f64 / 40.0;
            // Uniform spacing in angle (up to the basis offset).
            let first = r.nodes[0].0.frame()[0][1].atan2(r.nodes[0].0.frame()[0][0]).rem_euclid(PI);
            let d = (ang - first - expected).rem_euclid(PI);
            assert!(d < 1e-12 || (PI - d) < 1e-12);
        }
        for u in random_directions(3, 20, 3) {
            assert!((sub_grassmann_rule(&u, 2, 17).unwrap().weight_sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn section_examples() {
        let b3 = Ball::unit(3);
        let xi = Subspace::plane_orthogonal_to(&[0.3, 0.4, (0.75f64).sqrt()]);
        assert!((section_volume(&b3, &xi) - PI).abs() < 1e-15);
        let sq = fixtures::square();
        assert!((section_volume(&sq, &Subspace::line(&[1.0, 0.0])) - 2.0).abs() < 1e-15);
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!((section_volume(&sq, &Subspace::line(&[d, d])) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let cube = fixtures::cube();
        let xy = Subspace::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((section_volume(&cube, &xy) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_key_ignores_frame() {
        let a = Subspace::plane_orthogonal_to(&[0.0, 0.0, 1.0]);
        let b = Subspace::new(3, vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
        let l1 = Subspace::line(&[0.6, 0.8]);
        let l2 = Subspace::line(&[-0.6, -0.8]);
        assert_eq!(l1.canonical_key(), l2.canonical_key());
    }

    fn brute_chord(p: &crate::convex::HPolytope, u: &[f64]) -> f64 {
        // Interval {s : s u.u_i <= t_i for all i}.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (ui, &t) in p.normals().iter().zip(p.supports()) {
            let c = dot(u, ui);
            if c > 0.0 {
                hi = hi.min(t / c);
            } else if c < 0.0 {
                lo = lo.max(t / c);
            }
        }
        hi - lo
    }

    #[test]
    fn chord_matches_interval_clipping() {
        for (n, seed) in [(2usize, 1u64), (3, 2)] {
            let p = fixtures::random_polytope(n, 11, seed);
            for u in random_directions(n, 1000, seed + 10) {
                let a = section_volume(&p, &Subspace::line(&u));
                assert!((a - brute_chord(&p, &u)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn trapezoid_rule_converges() {
        let sq = fixtures::square();
        let val = |b: usize| {
            grassmann_rule(2, 1, b, 0)
                .unwrap()
                .integrate(|xi| section_volume(&sq, xi).powi(2))
        };
        let exact = 16.0 / PI;
        let (e1, e2) = ((val(60) - exact).abs(), (val(120) - exact).abs());
        assert!(e2 <= e1 / 3.0 || e2 < 1e-12, "errors {e1} {e2}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn section_scaling(seed in any::<u64>(), c in prop::sample::select(vec![0.5, 3.0])) {
            let p = fixtures::random_polytope(3, 10, seed);
            let q = p.scaled(c);
            for m in 1..3 {
                for xi in haar_sample(3, m, 10, seed ^ 7).unwrap() {
                    let a = section_volume(&p, &xi);
                    let b = section_volume(&q, &xi);
                    prop_assert!((b - c.powi(m as i32) * a).abs() <= 1e-10 * b.abs().max(1e-300));
                }
            }
        }

        #[test]
        fn section_rotation_invariance(seed in any::<u64>()) {
            let p = fixtures::random_polytope(3, 10, seed);
            let r = random_rotation(3, seed ^ 99);
            let rp = p.linear_image(&r).unwrap();
            for m in 1..3 {
                for xi in haar_sample(3, m, 10, seed ^ 3).unwrap() {
                    let a = section_volume(&p, &xi);
                    let b = section_volume(&rp, &xi.rotated(&r));
                    prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
                }
            }
        }
    }
}
