//! Radon transforms over great subspheres, the dual transform over subspaces
//! containing a direction, section profiles, and intersection bodies.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use crate::convex::{omega, StarBody};
use crate::error::{Error, Result};
use crate::grassmann::{self, Subspace};
use crate::vecops;

/// A real function on the unit sphere.
pub struct SphericalFunction<'a> {
    f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync + 'a>,
    pub tag: String,
}

impl<'a> SphericalFunction<'a> {
    pub fn new(tag: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'a) -> Self {
        SphericalFunction {
            f: Box::new(f),
            tag: tag.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        SphericalFunction::new(format!("const {c}"), move |_| c)
    }

    /// `u -> rho_K(u)^q`.
    pub fn radial_power<B: StarBody + Sync + ?Sized>(body: &'a B, q: f64) -> Self {
        SphericalFunction::new(format!("rho^{q}"), move |u| body.radial(u).powf(q))
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.f)(u)
    }
}

/// A real function on G(n, m).
pub struct GrassmannFunction<'a> {
    pub n: usize,
    pub m: usize,
    f: Box<dyn Fn(&Subspace) -> f64 + Send + Sync + 'a>,
    pub tag: String,
}

impl<'a> GrassmannFunction<'a> {
    pub fn new(
        n: usize,
        m: usize,
        tag: impl Into<String>,
        f: impl Fn(&Subspace) -> f64 + Send + Sync + 'a,
    ) -> Self {
        GrassmannFunction {
            n,
            m,
            f: Box::new(f),
            tag: tag.into(),
        }
    }

    pub fn constant(n: usize, m: usize, c: f64) -> Self {
        GrassmannFunction::new(n, m, format!("const {c}"), move |_| c)
    }

    pub fn eval(&self, xi: &Subspace) -> f64 {
        (self.f)(xi)
    }
}

/// Integral of `f` over the great subsphere `S^{n-1} cap xi`.
pub fn radon_m(f: &SphericalFunction, xi: &Subspace, budget: usize) -> Result<f64> {
    let fr = xi.frame();
    match xi.dim() {
        1 => Ok(f.eval(&fr[0]) + f.eval(&vecops::neg(&fr[0]))),
        2 => {
            if budget == 0 {
                return Err(Error::BudgetTooSmall { got: 0, min: 1 });
            }
            let h = 2.0 * PI / budget as f64;
            let mut s = 0.0;
            for j in 0..budget {
                let th = h * j as f64;
                let w: Vec<f64> = fr[0].iter().zip(&fr[1]).map(|(a, b)| th.cos() * a + th.sin() * b).collect();
                s += f.eval(&w);
            }
            Ok(s * h)
        }
        3 => {
            let pts = grassmann::fibonacci_sphere(budget.max(16));
            let w = 4.0 * PI / pts.len() as f64;
            let mut s = 0.0;
            for p in pts {
                let x: Vec<f64> = (0..xi.ambient_dim())
                    .map(|c| p[0] * fr[0][c] + p[1] * fr[1][c] + p[2] * fr[2][c])
                    .collect();
                s += f.eval(&x);
            }
            Ok(s * w)
        }
        m => Err(Error::BadDims { n: xi.ambient_dim(), m }),
    }
}

/// Normalizing constant `m omega_m / (n omega_n)` of the dual transform.
pub fn dual_radon_constant(n: usize, m: usize) -> f64 {
    m as f64 * omega(m) / (n as f64 * omega(n))
}

/// `(m omega_m / (n omega_n))` times the average of `F` over the m-subspaces containing `u`.
pub fn dual_radon_m(f: &GrassmannFunction, u: &[f64], budget: usize) -> Result<f64> {
    let (n, m) = (f.n, f.m);
    if u.len() != n || m < 1 || m >= n {
        return Err(Error::BadDims { n, m });
    }
    let c = dual_radon_constant(n, m);
    if m == 1 {
        return Ok(c * f.eval(&Subspace::line(u)));
    }
    let rule = grassmann::sub_grassmann_rule(u, m, budget)?;
    Ok(c * rule.integrate(|zeta| f.eval(&grassmann::join(u, zeta))))
}

/// Memoized `xi -> |K cap xi|^e` keyed by the quantized projection matrix.
pub struct SectionProfile<'a, B: ?Sized> {
    body: &'a B,
    exponent: i32,
    cache: RwLock<HashMap<Vec<i64>, f64>>,
}

impl<'a, B: StarBody + Sync + ?Sized> SectionProfile<'a, B> {
    pub fn new(body: &'a B, exponent: i32) -> Self {
        SectionProfile {
            body,
            exponent,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn eval(&self, xi: &Subspace) -> f64 {
        let key = xi.canonical_key();
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return *v;
        }
        let v = self.body.section_volume(xi).powi(self.exponent);
        self.cache.write().unwrap().insert(key, v);
        v
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

/// `xi -> |K cap xi|^{n-1}` on G(n, m).
pub fn section_profile<'a, B: StarBody + Sync + ?Sized>(body: &'a B, m: usize) -> GrassmannFunction<'a> {
    let n = body.dim();
    let memo = SectionProfile::new(body, n as i32 - 1);
    GrassmannFunction::new(n, m, "section profile", move |xi| memo.eval(xi))
}

/// `xi -> |K cap xi|^e` for an arbitrary integer exponent.
pub fn section_power<'a, B: StarBody + Sync + ?Sized>(body: &'a B, m: usize, e: i32) -> GrassmannFunction<'a> {
    let memo = SectionProfile::new(body, e);
    GrassmannFunction::new(body.dim(), m, format!("section^{e}"), move |xi| memo.eval(xi))
}

/// Unboxed, unmemoized dual transform of `|K cap .|^e`, used on hot paths.
pub(crate) fn dual_radon_section_power<B: StarBody + ?Sized>(body: &B, u: &[f64], m: usize, e: i32, sub_budget: usize) -> f64 {
    let n = u.len();
    let c = dual_radon_constant(n, m);
    if m == 1 {
        return c * body.section_volume(&Subspace::line(u)).powi(e);
    }
    debug_assert!(n == 3 && m == 2);
    let (a, b) = vecops::plane_basis(&vecops::to3(u));
    let area = |th: f64| {
        let (ct, st) = (th.cos(), th.sin());
        let z = vec![ct * a[0] + st * b[0], ct * a[1] + st * b[1], ct * a[2] + st * b[2]];
        body.section_volume(&grassmann::join(u, &Subspace::line(&z))).powi(e)
    };
    let mut breaks = body.pencil_breaks(u, &a, &b);
    if breaks.is_empty() {
        let s: f64 = (0..sub_budget).map(|j| area(PI * j as f64 / sub_budget as f64)).sum();
        return c * s / sub_budget as f64;
    }
    // Gauss-Legendre on each arc of the pencil between vertex-incidence angles.
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    breaks.push(breaks[0] + PI);
    let mut s = 0.0;
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let q = (len / PI * sub_budget as f64).ceil() as usize;
        let gl = grassmann::gauss_legendre(q.clamp(3, 16));
        s += len * gl.iter().map(|&(x, wt)| wt * area(w[0] + x * len)).sum::<f64>();
    }
    c * s / PI
}

/// `rho_{IK}(u) = vol_{n-1}(K cap u-perp)`.
pub fn intersection_body_radial<B: StarBody + ?Sized>(body: &B, u: &[f64]) -> Result<f64> {
    let n = body.dim();
    if !(2..=3).contains(&n) || u.len() != n {
        return Err(Error::BadDims { n, m: n.saturating_sub(1) });
    }
    Ok(body.section_volume(&Subspace::orthogonal_complement_of(u)))
}

/// `rho_{I_m K}(u) = (R*_m |K cap .|^{n-1})(u)^{1/(n-m)}`.
pub fn bidual_intersection_radial<B: StarBody + Sync + ?Sized>(body: &B, u: &[f64], m: usize, budget: usize) -> Result<f64> {
    let n = body.dim();
    let v = dual_radon_m(&section_profile(body, m), u, budget)?;
    Ok(v.powf(1.0 / (n - m) as f64))
}

/// `rho_{I(IK)}(u)`: polar-coordinate volume of `IK cap u-perp` from the radial function of IK.
pub fn iterated_intersection_radial<B: StarBody + Sync + ?Sized>(body: &B, u: &[f64], budget: usize) -> Result<f64> {
    let n = body.dim();
    if !(2..=3).contains(&n) || u.len() != n {
        return Err(Error::BadDims { n, m: n.saturating_sub(1) });
    }
    let ik = SphericalFunction::new("rho_IK^{n-1}/(n-1)", |w| {
        body.section_volume(&Subspace::orthogonal_complement_of(w)).powi(n as i32 - 1) / (n - 1) as f64
    });
    radon_m(&ik, &Subspace::orthogonal_complement_of(u), budget)
}

/// Tabulates a radial function over a direction grid as `(direction, value)` rows.
pub fn tabulate(n: usize, count: usize, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<(Vec<f64>, f64)>> {
    crate::convex::direction_grid(n, count)
        .into_iter()
        .map(|u| {
            let v = f(&u)?;
            Ok((u, v))
        })
        .collect()
}
