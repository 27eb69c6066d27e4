//! Browser bindings: solve planar Minkowski problems, tabulate radial curves, evaluate psi and atoms.
//!
//! Each export takes plain numbers and returns a JSON string. The `*_json` functions are the same
//! operations without the JS boundary.

use adq_core::convex::{direction_grid, UnitVector};
use adq_core::functionals::{curvature_atoms, psi};
use adq_core::solver::{hemisphere_check, solve_discrete_lp, solve_symmetric};
use adq_core::transforms::{bidual_intersection_radial, intersection_body_radial};
use adq_core::{Budgets, DiscreteMeasure, HPolytope, SolveConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn directions(angles_deg: &[f64]) -> Vec<UnitVector> {
    angles_deg.iter().map(|a| UnitVector::from_angle(a.to_radians())).collect()
}

fn polygon(angles_deg: &[f64], supports: &[f64]) -> Result<HPolytope, String> {
    if angles_deg.len() != supports.len() {
        return Err(format!("{} angles but {} supports", angles_deg.len(), supports.len()));
    }
    HPolytope::new(directions(angles_deg), supports.to_vec()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SolveOut {
    supports: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    status: String,
    iterations: usize,
    lagrange_residual: Option<f64>,
    measure_residual: f64,
    psi: f64,
    flags: Vec<String>,
}

#[derive(Serialize)]
struct Inadmissible {
    error: String,
    witness: Option<Vec<f64>>,
}

/// Solves for the polygon whose curvature measure (m = 1) is the given discrete measure.
pub fn solve_polygon_json(angles_deg: &[f64], weights: &[f64], p: f64, symmetric: bool) -> Result<String, String> {
    let mu = DiscreteMeasure::new(directions(angles_deg), weights.to_vec()).map_err(|e| e.to_string())?;
    let hemi = hemisphere_check(&mu).map_err(|e| e.to_string())?;
    if !hemi.admissible {
        let out = Inadmissible {
            error: "all atoms lie in a closed half-plane".into(),
            witness: hemi.witness,
        };
        return Err(serde_json::to_string(&out).unwrap_or_default());
    }
    let mut cfg = SolveConfig::new(2, p, 1);
    cfg.force = symmetric;
    let report = if symmetric { solve_symmetric(&mu, &cfg) } else { solve_discrete_lp(&mu, &cfg) };
    let r = match report {
        Ok(r) => r,
        Err(adq_core::Error::NoConvergence(r)) => *r,
        Err(e) => return Err(e.to_string()),
    };
    let out = SolveOut {
        supports: r.polytope.supports().to_vec(),
        vertices: r.polytope.vertices().to_vec(),
        status: format!("{:?}", r.status),
        iterations: r.iterations,
        lagrange_residual: r.lagrange_residual.is_finite().then_some(r.lagrange_residual),
        measure_residual: r.measure_residual,
        psi: r.psi_value,
        flags: r.flags,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curves {
    body: Vec<[f64; 2]>,
    intersection: Vec<[f64; 2]>,
    bidual: Vec<[f64; 2]>,
}

/// Boundary points `rho(u) u` of the polygon, its intersection body and its bi-dual intersection body.
pub fn radial_curves_json(angles_deg: &[f64], supports: &[f64], count: usize) -> Result<String, String> {
    let p = polygon(angles_deg, supports)?;
    let mut out = Curves {
        body: Vec::with_capacity(count),
        intersection: Vec::with_capacity(count),
        bidual: Vec::with_capacity(count),
    };
    for u in direction_grid(2, count.max(3)) {
        let at = |r: f64| [r * u[0], r * u[1]];
        out.body.push(at(p.radial(&u)));
        out.intersection.push(at(intersection_body_radial(&p, &u).map_err(|e| e.to_string())?));
        out.bidual.push(at(bidual_intersection_radial(&p, &u, 1, 1).map_err(|e| e.to_string())?));
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Functionals {
    psi: f64,
    atoms: Vec<f64>,
    total: f64,
}

/// `psi_1` of the polygon and its L_p curvature atoms on the facet normals.
pub fn psi_atoms_json(angles_deg: &[f64], supports: &[f64], p: f64) -> Result<String, String> {
    let poly = polygon(angles_deg, supports)?;
    let b = Budgets::for_dim(2);
    let v = psi(&poly, 1, &b).map_err(|e| e.to_string())?;
    let atoms = curvature_atoms(&poly, p, 1, &b).map_err(|e| e.to_string())?;
    let out = Functionals {
        psi: v,
        total: atoms.total(),
        atoms: atoms.masses,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve_polygon(angles_deg: &[f64], weights: &[f64], p: f64, symmetric: bool) -> Result<String, JsValue> {
    solve_polygon_json(angles_deg, weights, p, symmetric).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn radial_curves(angles_deg: &[f64], supports: &[f64], count: usize) -> Result<String, JsValue> {
    radial_curves_json(angles_deg, supports, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn psi_atoms(angles_deg: &[f64], supports: &[f64], p: f64) -> Result<String, JsValue> {
    psi_atoms_json(angles_deg, supports, p).map_err(|e| JsValue::from_str(&e))
}
