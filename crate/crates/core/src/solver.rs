//! Admissibility checks and the discrete, symmetric and general-measure solvers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{hausdorff_distance, HPolytope, UnitVector};
use crate::error::{Error, Result};
use crate::functionals::{self, curvature_atoms, Budgets};
use crate::grassmann::{self, Subspace};
use crate::spanning;
use crate::vecops::{self, dot, norm};

/// Finite positive combination of point masses on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    n: usize,
    atoms: Vec<UnitVector>,
    weights: Vec<f64>,
}

/// Minimum angular separation between distinct atoms.
pub const ATOM_SEPARATION: f64 = 1e-6;

impl DiscreteMeasure {
    pub fn new(atoms: Vec<UnitVector>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let n = atoms[0].dim();
        if n < 2 || atoms.iter().any(|u| u.dim() != n) {
            return Err(Error::InvalidMeasure("atoms of mixed or too small dimension".into()));
        }
        if weights.len() != atoms.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!("weight {i} is not positive: {w}")));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let c = dot(&atoms[i], &atoms[j]).clamp(-1.0, 1.0);
                if c.acos() < ATOM_SEPARATION {
                    return Err(Error::InvalidMeasure(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        Ok(DiscreteMeasure { n, atoms, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[UnitVector] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the atom at `-atoms[i]`, if present.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        let u = &self.atoms[i];
        (0..self.len()).find(|&j| dot(&self.atoms[j], u) < -1.0 + 1e-12)
    }

    pub fn is_even(&self) -> bool {
        self.check_even().is_ok()
    }

    pub fn check_even(&self) -> Result<()> {
        for i in 0..self.len() {
            let Some(j) = self.antipode(i) else {
                return Err(Error::NotEven(format!("atom {i} has no antipode")));
            };
            let (a, b) = (self.weights[i], self.weights[j]);
            if (a - b).abs() > 1e-12 * a.max(b).max(1.0) {
                return Err(Error::NotEven(format!("weights {a} and {b} of atoms {i}, {j} differ")));
            }
        }
        Ok(())
    }

    /// Same atoms, weights multiplied by `c`.
    pub fn scaled(&self, c: f64) -> DiscreteMeasure {
        DiscreteMeasure {
            n: self.n,
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// Outcome of the closed-hemisphere test.
#[derive(Clone, Debug, PartialEq)]
pub struct HemisphereCheck {
    pub admissible: bool,
    /// `w` with no mass in `{u : u.w > 0}` when not admissible.
    pub witness: Option<Vec<f64>>,
    /// Optimal margin of the feasibility program, when feasible.
    pub margin: Option<f64>,
}

/// Whether the measure is not concentrated on any closed hemisphere.
pub fn hemisphere_check(measure: &DiscreteMeasure) -> Result<HemisphereCheck> {
    if measure.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let dirs: Vec<&[f64]> = measure.atoms().iter().map(|u| u.coords()).collect();
    let admissible = spanning::origin_in_interior_of_hull(&dirs);
    Ok(HemisphereCheck {
        admissible,
        witness: if admissible { None } else { spanning::hemisphere_witness(&dirs) },
        margin: spanning::interior_margin(&dirs),
    })
}

/// Outcome of the strict subspace concentration test.
#[derive(Clone, Debug)]
pub struct ConcentrationCheck {
    pub holds: bool,
    /// Largest `(mu(xi cap S)/|mu|) * n / dim xi` over atom-spanned proper subspaces.
    pub worst_ratio: f64,
    pub worst_subspace: Option<Subspace>,
}

/// Strict subspace concentration over all proper subspaces spanned by atoms.
pub fn subspace_concentration_check(measure: &DiscreteMeasure) -> Result<ConcentrationCheck> {
    measure.check_even()?;
    let n = measure.n();
    let atoms: Vec<Vec<f64>> = measure.atoms().iter().map(|u| u.to_vec()).collect();
    let mut candidates: Vec<Subspace> = atoms.iter().map(|u| Subspace::line(u)).collect();
    if n >= 3 {
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if let Ok(s) = Subspace::span(n, &[atoms[i].clone(), atoms[j].clone()]) {
                    if n > 3 || s.dim() < n {
                        candidates.push(s);
                    }
                }
            }
        }
    }
    let total = measure.total();
    let mut worst = 0.0;
    let mut worst_sub = None;
    for xi in candidates {
        let mass: f64 = atoms
            .iter()
            .zip(measure.weights())
            .filter(|(u, _)| xi.contains(u, 1e-9))
            .map(|(_, w)| w)
            .sum();
        let r = mass / total * n as f64 / xi.dim() as f64;
        if r > worst {
            worst = r;
            worst_sub = Some(xi);
        }
    }
    Ok(ConcentrationCheck {
        holds: worst < 1.0 - 1e-12,
        worst_ratio: worst,
        worst_subspace: worst_sub,
    })
}

/// Solver parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub p: f64,
    pub m: usize,
    pub max_iters: usize,
    /// Stop when the Lagrange residual falls below this.
    pub tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub initial_step: f64,
    /// Initial log-barrier weight.
    pub barrier: f64,
    /// Accepted steps between barrier halvings.
    pub barrier_halving: usize,
    pub budgets: Budgets,
    pub seed: u64,
    /// Proceed past failed concentration or exponent-range checks.
    pub force: bool,
    /// Starting supports; rescaled onto the constraint set.
    pub initial_supports: Option<Vec<f64>>,
}

impl SolveConfig {
    pub fn new(n: usize, p: f64, m: usize) -> Self {
        SolveConfig {
            p,
            m,
            max_iters: 3000,
            tol: 1e-6,
            armijo: 1e-4,
            max_backtracks: 40,
            initial_step: 1.0,
            barrier: 1e-4,
            barrier_halving: 50,
            budgets: Budgets::for_dim(n),
            seed: 0,
            force: false,
            initial_supports: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    BudgetExhausted,
}

/// Result of a solve, including post-hoc verification.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub polytope: HPolytope,
    pub lagrange_residual: f64,
    /// Max relative error between recomputed curvature atoms and the target weights.
    pub measure_residual: f64,
    pub iterations: usize,
    pub psi_value: f64,
    /// Objective after each accepted step.
    pub objective_trace: Vec<f64>,
    /// Barrier weight in force at each trace entry.
    pub barrier_trace: Vec<f64>,
    /// Symmetric energy at the solution, when applicable.
    pub j_value: Option<f64>,
    pub discretization: Option<usize>,
    pub flags: Vec<String>,
    pub p: f64,
    pub m: usize,
    pub seed: u64,
    pub budgets: Budgets,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

fn check_discrete_exponent(n: usize, p: f64, m: usize) -> Result<()> {
    let mn = (m * n) as f64;
    if !(p > 1.0) || (p - mn).abs() < 1e-12 {
        return Err(Error::ExcludedExponent { p, mn });
    }
    Ok(())
}

/// `max_i |lambda a_i - b_i| / b_i` with least-squares `lambda`; infinite if some `a_i = 0`.
pub fn lagrange_residual(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for (&ai, &bi) in a.iter().zip(b) {
        let r = ai / bi;
        num += r;
        den += r * r;
    }
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    if a.iter().any(|&x| x <= 0.0) {
        return (f64::INFINITY, lambda);
    }
    let res = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| (lambda * ai - bi).abs() / bi)
        .fold(0.0, f64::max);
    (res, lambda)
}

fn measure_residual(masses: &[f64], weights: &[f64]) -> f64 {
    masses
        .iter()
        .zip(weights)
        .map(|(a, w)| (a - w).abs() / w)
        .fold(0.0, f64::max)
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    /// p = 0 atoms of the current body.
    atoms: Vec<f64>,
    supports: Vec<f64>,
}

struct Ascent {
    eval: Eval,
    iterations: usize,
    trace: Vec<f64>,
    barrier_trace: Vec<f64>,
    converged: bool,
    residual: f64,
}

/// Quasi-Newton (BFGS) ascent with Armijo backtracking and a barrier weight that halves on a schedule.
fn ascend(
    x0: Vec<f64>,
    config: &SolveConfig,
    mut barrier: f64,
    retract: impl Fn(Vec<f64>) -> Vec<f64>,
    evaluate: impl Fn(&[f64], f64) -> Result<Eval>,
    residual: impl Fn(&Eval) -> f64,
) -> Result<Ascent> {
    let mut x = retract(x0);
    let mut eval = evaluate(&x, barrier)?;
    let dim = x.len();
    let identity = |scale: f64| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { scale } else { 0.0 }).collect())
            .collect()
    };
    // Inverse of the negated Hessian.
    let mut h = identity(config.initial_step);
    let mut fresh = true;
    let mut accepted = 0usize;
    let mut trace = vec![eval.value];
    let mut barrier_trace = vec![barrier];
    let mut iterations = 0;
    let mut res = residual(&eval);
    let mut flat_steps = 0;
    while iterations < config.max_iters && res > config.tol && flat_steps < 5 {
        iterations += 1;
        let mut dir = vecops::mat_vec(&h, &eval.grad);
        let mut slope = dot(&dir, &eval.grad);
        if !(slope > 0.0) {
            h = identity(config.initial_step);
            fresh = true;
            dir = eval.grad.clone();
            slope = dot(&dir, &eval.grad);
        }
        let mut moved = None;
        let mut eta = 1.0;
        for _ in 0..=config.max_backtracks {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + eta * di).collect();
            let cand = retract(cand);
            // Candidates leaving the domain (unbounded or empty bodies) count as failures.
            if let Ok(e) = evaluate(&cand, barrier) {
                if e.value >= eval.value + config.armijo * eta * slope {
                    moved = Some((cand, e));
                    break;
                }
            }
            eta *= 0.5;
        }
        match moved {
            Some((cand, e)) => {
                accepted += 1;
                if e.value - eval.value <= 1e-14 * e.value.abs().max(1.0) {
                    flat_steps += 1;
                } else {
                    flat_steps = 0;
                }
                let mean = |v: Vec<f64>| {
                    let c = v.iter().sum::<f64>() / dim as f64;
                    v.into_iter().map(|x| x - c).collect::<Vec<_>>()
                };
                let step = mean(dir.iter().map(|d| eta * d).collect());
                let y: Vec<f64> = eval.grad.iter().zip(&e.grad).map(|(a, b)| a - b).collect();
                let sy = dot(&step, &y);
                x = cand;
                eval = e;
                if sy > 1e-12 * norm(&step) * norm(&y) {
                    if fresh {
                        h = identity(sy / dot(&y, &y));
                        fresh = false;
                    }
                    bfgs_update(&mut h, &step, &y, sy);
                }
                trace.push(eval.value);
                barrier_trace.push(barrier);
                let gmax = eval.grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
                if barrier > 0.0 && (accepted % config.barrier_halving == 0 || gmax < barrier) {
                    barrier *= 0.5;
                    eval = evaluate(&x, barrier)?;
                }
            }
            None if !fresh => {
                h = identity(config.initial_step);
                fresh = true;
            }
            None if barrier > 1e-14 => {
                barrier *= 0.5;
                eval = evaluate(&x, barrier)?;
            }
            None => {
                res = residual(&eval);
                break;
            }
        }
        res = residual(&eval);
    }
    Ok(Ascent {
        converged: res <= config.tol,
        eval,
        iterations,
        trace,
        barrier_trace,
        residual: res,
    })
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let hy = vecops::mat_vec(h, y);
    let yhy = dot(y, &hy);
    let rho = 1.0 / sy;
    let n = s.len();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Atoms driving the ascent: facet form for m = 1, and for planar sections the Grassmannian
/// form on a fixed rule, whose atoms are the exact gradient of the same discretized psi.
struct AtomOracle {
    m: usize,
    budgets: Budgets,
    rule: Option<grassmann::QuadratureRule<Subspace>>,
}

impl AtomOracle {
    fn new(n: usize, m: usize, budgets: Budgets) -> Result<Self> {
        let rule = if n == 3 && m >= 2 {
            Some(grassmann::grassmann_rule(n, m, budgets.grassmann, budgets.seed)?)
        } else {
            None
        };
        Ok(AtomOracle { m, budgets, rule })
    }

    fn atoms(&self, body: &HPolytope) -> Result<Vec<f64>> {
        match &self.rule {
            Some(rule) => functionals::section_atoms(body, self.m, rule),
            None => Ok(curvature_atoms(body, 0.0, self.m, &self.budgets)?.base),
        }
    }
}

/// Maximizer `P(z_0)` of psi over `{z : sum a_i t_i^p = 1}` before rescaling.
struct DiscreteOptimum {
    body: HPolytope,
    ascent: Ascent,
    lambda: f64,
}

fn optimize_discrete(measure: &DiscreteMeasure, config: &SolveConfig) -> Result<DiscreteOptimum> {
    let k = measure.len();
    let p = config.p;
    let m = config.m;
    let alpha = measure.weights().to_vec();
    let normals = measure.atoms().to_vec();
    let x0: Vec<f64> = match &config.initial_supports {
        Some(t) if t.len() == k && t.iter().all(|&v| v > 0.0) => t.iter().map(|v| v.ln()).collect(),
        Some(_) => return Err(Error::InvalidMeasure("initial supports do not match the atoms".into())),
        None => alpha.iter().map(|a| -(k as f64 * a).ln() / p).collect(),
    };
    let log_f = |s: &[f64]| -> f64 {
        let mx = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = s.iter().zip(&alpha).map(|(si, a)| a * (p * (si - mx)).exp()).sum();
        p * mx + sum.ln()
    };
    let retract = |s: Vec<f64>| {
        let lf = log_f(&s);
        s.into_iter().map(|si| si - lf / p).collect::<Vec<_>>()
    };
    let oracle = AtomOracle::new(measure.n(), m, config.budgets)?;
    let evaluate = |s: &[f64], beta: f64| -> Result<Eval> {
        let t: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let body = HPolytope::new(normals.clone(), t.clone())?;
        let atoms = oracle.atoms(&body)?;
        let total: f64 = atoms.iter().sum();
        let lf = log_f(s);
        let f = lf.exp();
        let kf = k as f64;
        let value = (total / m as f64).ln() / (m * body.dim()) as f64 - lf / p
            + beta / kf * (s.iter().sum::<f64>() - kf / p * lf);
        let grad = (0..k)
            .map(|i| {
                let share = alpha[i] * t[i].powf(p) / f;
                atoms[i] / total - share + beta * (1.0 / kf - share)
            })
            .collect();
        Ok(Eval {
            value,
            grad,
            atoms,
            supports: t,
        })
    };
    let residual = |e: &Eval| {
        let b: Vec<f64> = e.supports.iter().zip(&alpha).map(|(t, a)| a * t.powf(p)).collect();
        lagrange_residual(&e.atoms, &b).0
    };
    let ascent = ascend(x0, config, config.barrier, retract, evaluate, residual)?;
    let body = HPolytope::new(normals, ascent.eval.supports.clone())?;
    let b: Vec<f64> = ascent.eval.supports.iter().zip(&alpha).map(|(t, a)| a * t.powf(p)).collect();
    let (_, lambda) = lagrange_residual(&ascent.eval.atoms, &b);
    Ok(DiscreteOptimum { body, ascent, lambda })
}

fn finish_report(
    body: HPolytope,
    ascent: &Ascent,
    measure: &DiscreteMeasure,
    config: &SolveConfig,
    flags: Vec<String>,
) -> Result<SolveReport> {
    let fresh = curvature_atoms(&body, config.p, config.m, &config.budgets)?;
    let psi_value = functionals::psi(&body, config.m, &config.budgets)?;
    let report = SolveReport {
        status: if ascent.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::BudgetExhausted
        },
        measure_residual: measure_residual(&fresh.masses, measure.weights()),
        polytope: body,
        lagrange_residual: ascent.residual,
        iterations: ascent.iterations,
        psi_value,
        objective_trace: ascent.trace.clone(),
        barrier_trace: ascent.barrier_trace.clone(),
        j_value: None,
        discretization: None,
        flags,
        p: config.p,
        m: config.m,
        seed: config.seed,
        budgets: config.budgets,
    };
    Ok(report)
}

/// Discrete L_p Minkowski problem for `p > 1`, `p != mn`: returns P with curvature atoms equal to the weights.
pub fn solve_discrete_lp(measure: &DiscreteMeasure, config: &SolveConfig) -> Result<SolveReport> {
    let n = measure.n();
    check_discrete_exponent(n, config.p, config.m)?;
    let hemi = hemisphere_check(measure)?;
    if !hemi.admissible {
        return Err(Error::InadmissibleMeasure { witness: hemi.witness });
    }
    let opt = optimize_discrete(measure, config)?;
    let (p, mn) = (config.p, (config.m * n) as f64);
    // lambda = lambda_0^{-p} psi(P(z_0))^{-1}, then c^{mn-p} = psi(lambda_0 P(z_0))^{-1}.
    let psi0: f64 = opt.ascent.eval.atoms.iter().sum::<f64>() / config.m as f64;
    let lambda0 = (opt.lambda * psi0).powf(-1.0 / p);
    let p0 = opt.body.scaled(lambda0);
    let c = (psi0 * lambda0.powf(mn)).powf(-1.0 / (mn - p));
    let body = p0.scaled(c);
    let report = finish_report(body, &opt.ascent, measure, config, Vec::new())?;
    if report.converged() {
        Ok(report)
    } else {
        Err(Error::NoConvergence(Box::new(report)))
    }
}

/// Pairs `(i, j)` of antipodal atoms with `i < j`.
fn antipodal_pairs(measure: &DiscreteMeasure) -> Vec<(usize, usize)> {
    (0..measure.len())
        .filter_map(|i| measure.antipode(i).filter(|&j| i < j).map(|j| (i, j)))
        .collect()
}

/// Symmetric L_p Minkowski problem for even measures, `p >= 0`, by maximizing J over
/// origin-symmetric polytopes with facet normals on the atoms.
pub fn solve_symmetric(measure: &DiscreteMeasure, config: &SolveConfig) -> Result<SolveReport> {
    measure.check_even()?;
    let n = measure.n();
    let (p, m) = (config.p, config.m);
    let mn = (m * n) as f64;
    if !(p >= 0.0) || (p - mn).abs() < 1e-12 {
        return Err(Error::ExcludedExponent { p, mn });
    }
    let mut flags = Vec::new();
    let conc = subspace_concentration_check(measure)?;
    if !conc.holds {
        if config.force {
            flags.push(format!("concentration-override (worst ratio {:.6})", conc.worst_ratio));
        } else {
            return Err(Error::ConcentrationFail { ratio: conc.worst_ratio });
        }
    }
    let hemi = hemisphere_check(measure)?;
    if !hemi.admissible {
        return Err(Error::InadmissibleMeasure { witness: hemi.witness });
    }
    let pairs = antipodal_pairs(measure);
    let k = measure.len();
    let alpha = measure.weights().to_vec();
    let total = measure.total();
    let normals = measure.atoms().to_vec();
    let expand = |sigma: &[f64]| {
        let mut s = vec![0.0; k];
        for (q, &(i, j)) in pairs.iter().enumerate() {
            s[i] = sigma[q];
            s[j] = sigma[q];
        }
        s
    };
    let x0: Vec<f64> = match &config.initial_supports {
        Some(t) if t.len() == k && t.iter().all(|&v| v > 0.0) => pairs.iter().map(|&(i, _)| t[i].ln()).collect(),
        Some(_) => return Err(Error::InvalidMeasure("initial supports do not match the atoms".into())),
        None => vec![0.0; pairs.len()],
    };
    let retract = |sigma: Vec<f64>| {
        let mean = sigma.iter().sum::<f64>() / sigma.len() as f64;
        sigma.into_iter().map(|v| v - mean).collect::<Vec<_>>()
    };
    let oracle = AtomOracle::new(n, m, config.budgets)?;
    let evaluate = |sigma: &[f64], _beta: f64| -> Result<Eval> {
        let s = expand(sigma);
        let t: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        let body = HPolytope::new(normals.clone(), t.clone())?;
        let atoms = oracle.atoms(&body)?;
        let atom_total: f64 = atoms.iter().sum();
        let (energy, shares): (f64, Vec<f64>) = if p == 0.0 {
            let e = -s.iter().zip(&alpha).map(|(si, a)| a * si).sum::<f64>() / total;
            (e, alpha.iter().map(|a| a / total).collect())
        } else {
            let w: Vec<f64> = t.iter().zip(&alpha).map(|(ti, a)| a * ti.powf(p)).collect();
            let sw: f64 = w.iter().sum();
            (-(sw / total).ln() / p, w.iter().map(|x| x / sw).collect())
        };
        let value = (atom_total / m as f64).ln() / mn + energy;
        let grad = pairs
            .iter()
            .map(|&(i, j)| atoms[i] / atom_total - shares[i] + atoms[j] / atom_total - shares[j])
            .collect();
        Ok(Eval {
            value,
            grad,
            atoms,
            supports: t,
        })
    };
    let residual = |e: &Eval| {
        let b: Vec<f64> = e.supports.iter().zip(&alpha).map(|(t, a)| a * t.powf(p)).collect();
        lagrange_residual(&e.atoms, &b).0
    };
    let ascent = ascend(x0, config, 0.0, retract, evaluate, residual)?;
    let k0 = HPolytope::new(normals, ascent.eval.supports.clone())?;
    // c^{mn-p} = (m psi(K_0))^{-1} integral of h^p dmu.
    let m_psi: f64 = ascent.eval.atoms.iter().sum();
    let hp: f64 = ascent.eval.supports.iter().zip(&alpha).map(|(t, a)| a * t.powf(p)).sum();
    let c = (hp / m_psi).powf(1.0 / (mn - p));
    let body = k0.scaled(c);
    let mut report = finish_report(body, &ascent, measure, config, flags)?;
    report.j_value = Some(*ascent.trace.last().unwrap());
    if report.converged() {
        Ok(report)
    } else {
        Err(Error::NoConvergence(Box::new(report)))
    }
}

/// Input to the general-measure solver.
pub enum GeneralInput<'a> {
    Discrete(&'a DiscreteMeasure),
    /// Density with respect to spherical Lebesgue measure on S^{n-1}.
    Density {
        n: usize,
        density: &'a dyn Fn(&[f64]) -> f64,
    },
}

/// Atomizes onto `resolution` cells (arcs for n=2, Fibonacci Voronoi cells for n=3),
/// each atom at its cell's mass-weighted mean direction.
pub fn discretize(input: &GeneralInput, resolution: usize) -> Result<DiscreteMeasure> {
    if resolution < 3 {
        return Err(Error::BudgetTooSmall { got: resolution, min: 3 });
    }
    let n = match input {
        GeneralInput::Discrete(mu) => mu.n(),
        GeneralInput::Density { n, .. } => *n,
    };
    let centers = if n == 3 {
        grassmann::fibonacci_sphere(resolution)
    } else if n == 2 {
        Vec::new()
    } else {
        return Err(Error::BadDims { n, m: 0 });
    };
    let cell_of = |u: &[f64]| -> usize {
        if n == 2 {
            let th = u[1].atan2(u[0]).rem_euclid(2.0 * PI);
            ((th / (2.0 * PI) * resolution as f64) as usize).min(resolution - 1)
        } else {
            (0..centers.len())
                .max_by(|&a, &b| dot(&centers[a], u).total_cmp(&dot(&centers[b], u)))
                .unwrap()
        }
    };
    // Per cell: (first contributing index, mass, weighted direction sum, contributors).
    let mut cells: Vec<(usize, f64, Vec<f64>, Vec<usize>)> = (0..resolution).map(|_| (usize::MAX, 0.0, vec![0.0; n], Vec::new())).collect();
    let samples: Vec<(Vec<f64>, f64)> = match input {
        GeneralInput::Discrete(mu) => mu.atoms().iter().zip(mu.weights()).map(|(u, &w)| (u.to_vec(), w)).collect(),
        GeneralInput::Density { density, .. } => {
            let fine = if n == 2 { 64 * resolution } else { 256 * resolution };
            let pts = if n == 2 {
                (0..fine)
                    .map(|j| {
                        let th = 2.0 * PI * (j as f64 + 0.5) / fine as f64;
                        vec![th.cos(), th.sin()]
                    })
                    .collect()
            } else {
                grassmann::fibonacci_sphere(fine)
            };
            let area = n as f64 * crate::convex::omega(n) / fine as f64;
            pts.into_iter()
                .map(|u| {
                    let w = density(&u) * area;
                    (u, w)
                })
                .collect()
        }
    };
    for (idx, (u, w)) in samples.iter().enumerate() {
        if !(*w >= 0.0) {
            return Err(Error::InvalidMeasure(format!("negative density at sample {idx}")));
        }
        if *w == 0.0 {
            continue;
        }
        let c = &mut cells[cell_of(u)];
        if c.0 == usize::MAX {
            c.0 = idx;
        }
        c.1 += w;
        for (a, b) in c.2.iter_mut().zip(u) {
            *a += w * b;
        }
        c.3.push(idx);
    }
    let mut used: Vec<&(usize, f64, Vec<f64>, Vec<usize>)> = cells.iter().filter(|c| c.1 > 0.0).collect();
    used.sort_by_key(|c| c.0);
    let mut atoms = Vec::with_capacity(used.len());
    let mut weights = Vec::with_capacity(used.len());
    for (first, mass, dir, members) in used {
        let u = if members.len() == 1 {
            UnitVector::new_unchecked(samples[*first].0.clone())
        } else {
            if norm(dir) < 1e-12 * mass {
                return Err(Error::InvalidMeasure("cell mass cancels to a zero mean direction".into()));
            }
            UnitVector::normalize(dir)?
        };
        atoms.push(u);
        weights.push(*mass);
    }
    DiscreteMeasure::new(atoms, weights)
}

/// General-measure path: discretize, then solve the discrete problem.
pub fn solve_general(input: &GeneralInput, resolution: usize, config: &SolveConfig) -> Result<SolveReport> {
    let n = match input {
        GeneralInput::Discrete(mu) => mu.n(),
        GeneralInput::Density { n, .. } => *n,
    };
    let bound = (n + config.m * (n - 2)) as f64;
    let mut flags = Vec::new();
    if !(config.p > bound) {
        if config.force {
            flags.push(format!("below-guarantee (p={} <= {bound})", config.p));
        } else {
            return Err(Error::ExponentBelowGuarantee { p: config.p, bound });
        }
    }
    let mu = discretize(input, resolution)?;
    let attach = |mut r: SolveReport| {
        r.discretization = Some(resolution);
        r.flags.extend(flags.iter().cloned());
        r
    };
    match solve_discrete_lp(&mu, config) {
        Ok(r) => Ok(attach(r)),
        Err(Error::NoConvergence(r)) => Err(Error::NoConvergence(Box::new(attach(*r)))),
        Err(e) => Err(e),
    }
}

/// Multi-start dispersion of discrete solutions.
#[derive(Clone, Debug)]
pub struct UniquenessProbe {
    pub reports: Vec<SolveReport>,
    pub max_hausdorff: f64,
    pub diameter: f64,
    /// True when bodies were normalized by `psi^{1/(mn)}` before comparison (p = mn).
    pub normalized: bool,
}

/// Solves from `starts` seeded interior starts and measures the spread of the solutions.
pub fn uniqueness_probe(measure: &DiscreteMeasure, config: &SolveConfig, starts: usize) -> Result<UniquenessProbe> {
    let n = measure.n();
    let mn = (config.m * n) as f64;
    let dilation_only = (config.p - mn).abs() < 1e-12;
    if !(config.p > 1.0) {
        return Err(Error::ExcludedExponent { p: config.p, mn });
    }
    let k = measure.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reports = Vec::with_capacity(starts);
    let mut bodies = Vec::with_capacity(starts);
    for s in 0..starts.max(1) {
        let mut cfg = config.clone();
        if s > 0 {
            let base: Vec<f64> = measure
                .weights()
                .iter()
                .map(|a| (k as f64 * a).powf(-1.0 / config.p))
                .collect();
            cfg.initial_supports = Some(base.iter().map(|t| t * rng.random_range(-0.5..0.5f64).exp()).collect());
        }
        let report = if dilation_only {
            let hemi = hemisphere_check(measure)?;
            if !hemi.admissible {
                return Err(Error::InadmissibleMeasure { witness: hemi.witness });
            }
            let opt = optimize_discrete(measure, &cfg)?;
            let psi = functionals::psi(&opt.body, cfg.m, &cfg.budgets)?;
            let body = opt.body.scaled(psi.powf(-1.0 / mn));
            let mut r = finish_report(body, &opt.ascent, measure, &cfg, vec!["dilation-normalized".into()])?;
            r.psi_value = psi;
            r
        } else {
            match solve_discrete_lp(measure, &cfg) {
                Ok(r) => r,
                Err(Error::NoConvergence(r)) => *r,
                Err(e) => return Err(e),
            }
        };
        bodies.push(report.polytope.clone());
        reports.push(report);
    }
    let mut max_h: f64 = 0.0;
    for i in 0..bodies.len() {
        for j in i + 1..bodies.len() {
            max_h = max_h.max(hausdorff_distance(&bodies[i], &bodies[j]));
        }
    }
    let diameter = bodies.iter().map(|b| b.diameter()).fold(0.0, f64::max);
    Ok(UniquenessProbe {
        reports,
        max_hausdorff: max_h,
        diameter,
        normalized: dilation_only,
    })
}

/// Convenience: the target weights as a fresh measure on the report's facet normals.
pub fn report_atoms_measure(report: &SolveReport) -> Result<DiscreteMeasure> {
    let at = curvature_atoms(&report.polytope, report.p, report.m, &report.budgets)?;
    let keep: Vec<usize> = (0..at.masses.len()).filter(|&i| at.masses[i] > 0.0).collect();
    DiscreteMeasure::new(
        keep.iter().map(|&i| at.normals[i].clone()).collect(),
        keep.iter().map(|&i| at.masses[i]).collect(),
    )
}
