//! Versioned JSON documents for bodies, measures and solve reports, plus OBJ and CSV export.
//!
//! Numbers are written in shortest round-trip form, so save(load(save(x))) == save(x) byte for byte.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::convex::{Ball, HPolytope, UnitVector};
use crate::error::{Error, Result};
use crate::functionals::Budgets;
use crate::solver::{DiscreteMeasure, SolveReport, SolveStatus};

pub const FORMAT_VERSION: u32 = 1;
pub const BODY_FORMAT: &str = "adq-body";
pub const MEASURE_FORMAT: &str = "adq-measure";
pub const REPORT_FORMAT: &str = "adq-report";

/// Minimum norm of a direction accepted from a file.
pub const MIN_INPUT_NORM: f64 = 1e-8;

fn format_err(file: &'static str, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        file,
        field: field.into(),
        message: message.into(),
    }
}

fn parse_doc<T: DeserializeOwned>(file: &'static str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "document".to_string() } else { path };
        format_err(file, field, e.into_inner().to_string())
    })
}

fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn check_header(file: &'static str, format: &str, expected: &str, version: u32) -> Result<()> {
    if format != expected {
        return Err(format_err(file, "format", format!("expected \"{expected}\", found \"{format}\"")));
    }
    if version != FORMAT_VERSION {
        return Err(format_err(file, "version", format!("unsupported version {version}")));
    }
    Ok(())
}

fn check_dim(file: &'static str, n: usize) -> Result<()> {
    if !(2..=3).contains(&n) {
        return Err(format_err(file, "n", format!("dimension {n} not supported (2 or 3)")));
    }
    Ok(())
}

/// Unit vector from file coordinates; vectors already unit to rounding are kept verbatim.
fn load_direction(file: &'static str, field: String, v: &[f64], n: usize) -> Result<UnitVector> {
    if v.len() != n {
        return Err(format_err(file, field, format!("expected {n} coordinates, found {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(format_err(file, field, "non-finite coordinate"));
    }
    let r = crate::vecops::norm(v);
    if r < MIN_INPUT_NORM {
        return Err(format_err(file, field, format!("norm {r:e} below {MIN_INPUT_NORM:e}")));
    }
    if (r - 1.0).abs() <= 1e-15 {
        return Ok(UnitVector::new_unchecked(v.to_vec()));
    }
    UnitVector::normalize(v).map_err(|e| format_err(file, field, e.to_string()))
}

/// Who produced a file and with which settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub budgets: Budgets,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(command: impl Into<String>, seed: u64, budgets: Budgets) -> Self {
        Provenance {
            command: command.into(),
            seed,
            budgets,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    format: String,
    version: u32,
    kind: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    normals: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    supports: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

/// A body read from a body file.
#[derive(Clone, Debug)]
pub enum Body {
    Polytope(HPolytope),
    Ball(Ball),
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Ball(b) => b.n,
        }
    }
}

pub fn polytope_to_string(p: &HPolytope, provenance: Option<&Provenance>) -> String {
    to_pretty(&BodyDoc {
        format: BODY_FORMAT.into(),
        version: FORMAT_VERSION,
        kind: "polytope".into(),
        n: p.dim(),
        radius: None,
        normals: p.normals().iter().map(|u| u.to_vec()).collect(),
        supports: p.supports().to_vec(),
        vertices: p.vertices().to_vec(),
        provenance: provenance.cloned(),
    })
}

pub fn ball_to_string(b: &Ball, provenance: Option<&Provenance>) -> String {
    to_pretty(&BodyDoc {
        format: BODY_FORMAT.into(),
        version: FORMAT_VERSION,
        kind: "ball".into(),
        n: b.n,
        radius: Some(b.r),
        normals: Vec::new(),
        supports: Vec::new(),
        vertices: Vec::new(),
        provenance: provenance.cloned(),
    })
}

/// Parses a body file. Vertices in the file are ignored and recomputed.
pub fn parse_body(text: &str) -> Result<(Body, Option<Provenance>)> {
    const F: &str = "body file";
    let doc: BodyDoc = parse_doc(F, text)?;
    check_header(F, &doc.format, BODY_FORMAT, doc.version)?;
    check_dim(F, doc.n)?;
    for (i, v) in doc.vertices.iter().enumerate() {
        if v.len() != doc.n || v.iter().any(|c| !c.is_finite()) {
            return Err(format_err(F, format!("vertices[{i}]"), "malformed vertex"));
        }
    }
    let body = match doc.kind.as_str() {
        "ball" => {
            let r = doc.radius.ok_or_else(|| format_err(F, "radius", "missing for kind \"ball\""))?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(format_err(F, "radius", format!("must be positive, found {r}")));
            }
            if !doc.normals.is_empty() || !doc.supports.is_empty() {
                return Err(format_err(F, "normals", "not allowed for kind \"ball\""));
            }
            Body::Ball(Ball { n: doc.n, r })
        }
        "polytope" => {
            if doc.radius.is_some() {
                return Err(format_err(F, "radius", "not allowed for kind \"polytope\""));
            }
            if doc.supports.len() != doc.normals.len() {
                return Err(format_err(
                    F,
                    "supports",
                    format!("{} supports for {} normals", doc.supports.len(), doc.normals.len()),
                ));
            }
            let normals = doc
                .normals
                .iter()
                .enumerate()
                .map(|(i, v)| load_direction(F, format!("normals[{i}]"), v, doc.n))
                .collect::<Result<Vec<_>>>()?;
            for (i, t) in doc.supports.iter().enumerate() {
                if !t.is_finite() {
                    return Err(format_err(F, format!("supports[{i}]"), "non-finite support"));
                }
            }
            let p = HPolytope::new(normals, doc.supports).map_err(|e| format_err(F, "normals", e.to_string()))?;
            Body::Polytope(p)
        }
        other => return Err(format_err(F, "kind", format!("unknown kind \"{other}\""))),
    };
    Ok((body, doc.provenance))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    format: String,
    version: u32,
    n: usize,
    #[serde(default)]
    even: bool,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub fn measure_to_string(mu: &DiscreteMeasure) -> String {
    to_pretty(&MeasureDoc {
        format: MEASURE_FORMAT.into(),
        version: FORMAT_VERSION,
        n: mu.n(),
        even: mu.is_even(),
        atoms: mu.atoms().iter().map(|u| u.to_vec()).collect(),
        weights: mu.weights().to_vec(),
    })
}

/// Parses a measure file; atoms are normalized and an `even` flag is enforced.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    const F: &str = "measure file";
    let doc: MeasureDoc = parse_doc(F, text)?;
    check_header(F, &doc.format, MEASURE_FORMAT, doc.version)?;
    check_dim(F, doc.n)?;
    if doc.atoms.is_empty() {
        return Err(format_err(F, "atoms", "empty"));
    }
    if doc.weights.len() != doc.atoms.len() {
        return Err(format_err(
            F,
            "weights",
            format!("{} weights for {} atoms", doc.weights.len(), doc.atoms.len()),
        ));
    }
    for (i, w) in doc.weights.iter().enumerate() {
        if !(*w > 0.0 && w.is_finite()) {
            return Err(format_err(F, format!("weights[{i}]"), format!("must be positive, found {w}")));
        }
    }
    let atoms = doc
        .atoms
        .iter()
        .enumerate()
        .map(|(i, v)| load_direction(F, format!("atoms[{i}]"), v, doc.n))
        .collect::<Result<Vec<_>>>()?;
    let mu = DiscreteMeasure::new(atoms, doc.weights).map_err(|e| format_err(F, "atoms", e.to_string()))?;
    if doc.even {
        mu.check_even().map_err(|e| format_err(F, "even", e.to_string()))?;
    }
    Ok(mu)
}

/// Serialized solve report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub format: String,
    pub version: u32,
    pub command: String,
    pub status: String,
    pub p: f64,
    pub m: usize,
    pub seed: u64,
    pub budgets: Budgets,
    pub iterations: usize,
    /// Null when infinite (a degenerate facet remained).
    pub lagrange_residual: Option<f64>,
    pub measure_residual: Option<f64>,
    pub psi_value: f64,
    pub j_value: Option<f64>,
    pub discretization: Option<usize>,
    pub flags: Vec<String>,
    pub normals: Vec<Vec<f64>>,
    pub supports: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub tool_version: String,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn report_doc(report: &SolveReport, command: &str) -> ReportDoc {
    ReportDoc {
        format: REPORT_FORMAT.into(),
        version: FORMAT_VERSION,
        command: command.into(),
        status: match report.status {
            SolveStatus::Converged => "converged".into(),
            SolveStatus::BudgetExhausted => "budget-exhausted".into(),
        },
        p: report.p,
        m: report.m,
        seed: report.seed,
        budgets: report.budgets,
        iterations: report.iterations,
        lagrange_residual: finite(report.lagrange_residual),
        measure_residual: finite(report.measure_residual),
        psi_value: report.psi_value,
        j_value: report.j_value,
        discretization: report.discretization,
        flags: report.flags.clone(),
        normals: report.polytope.normals().iter().map(|u| u.to_vec()).collect(),
        supports: report.polytope.supports().to_vec(),
        objective_trace: report.objective_trace.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
    }
}

pub fn report_to_string(report: &SolveReport, command: &str) -> String {
    to_pretty(&report_doc(report, command))
}

pub fn parse_report(text: &str) -> Result<ReportDoc> {
    const F: &str = "report file";
    let doc: ReportDoc = parse_doc(F, text)?;
    check_header(F, &doc.format, REPORT_FORMAT, doc.version)?;
    Ok(doc)
}

/// Triangle mesh for external viewers.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Enclosed volume by the divergence theorem.
    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                crate::vecops::dot(&crate::vecops::cross3(&a, &b), &c) / 6.0
            })
            .sum()
    }
}

/// Fan-triangulated, outward-oriented facets of a 3-polytope.
pub fn polytope_mesh(p: &HPolytope) -> Result<Mesh> {
    if p.dim() != 3 {
        return Err(Error::BadDims { n: p.dim(), m: 2 });
    }
    let vertices = p.vertices().iter().map(|v| [v[0], v[1], v[2]]).collect();
    let mut faces = Vec::new();
    for f in p.facets().iter().filter(|f| !f.is_degenerate()) {
        let c = &f.vertices;
        for j in 1..c.len() - 1 {
            faces.push([c[0], c[j], c[j + 1]]);
        }
    }
    Ok(Mesh { vertices, faces })
}

/// Wavefront OBJ text: vertex lines, then 1-based face lines.
pub fn mesh_to_obj(mesh: &Mesh) -> String {
    let mut s = String::from("# adq polytope mesh\n");
    for v in &mesh.vertices {
        s.push_str(&format!("v {:e} {:e} {:e}\n", v[0], v[1], v[2]));
    }
    for f in &mesh.faces {
        s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    s
}

/// Reads `v` and `f` records of an OBJ file; polygons are fan-triangulated.
pub fn parse_obj(text: &str) -> Result<Mesh> {
    const F: &str = "obj file";
    let mut vertices = Vec::new();
    let mut polys = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .map(|x| x.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format_err(F, format!("line {}", ln + 1), e.to_string()))?;
                if c.len() < 3 || c.iter().any(|x| !x.is_finite()) {
                    return Err(format_err(F, format!("line {}", ln + 1), "vertex needs 3 finite coordinates"));
                }
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|x| x.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format_err(F, format!("line {}", ln + 1), e.to_string()))?;
                if idx.len() < 3 {
                    return Err(format_err(F, format!("line {}", ln + 1), "face needs 3 indices"));
                }
                polys.push((ln + 1, idx));
            }
            _ => {}
        }
    }
    let mut faces = Vec::new();
    for (ln, idx) in polys {
        if idx.iter().any(|&i| i == 0 || i > vertices.len()) {
            return Err(format_err(F, format!("line {ln}"), "vertex index out of range"));
        }
        for j in 1..idx.len() - 1 {
            faces.push([idx[0] - 1, idx[j] - 1, idx[j + 1] - 1]);
        }
    }
    Ok(Mesh { vertices, faces })
}

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| format_err("csv", "write", e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:e}"))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| format_err("csv", "write", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

/// Counter-clockwise vertex list of a polygon as `x,y` rows.
pub fn polygon_csv(p: &HPolytope) -> Result<String> {
    if p.dim() != 2 {
        return Err(Error::BadDims { n: p.dim(), m: 1 });
    }
    let mut v = p.vertices().to_vec();
    let c: Vec<f64> = (0..2).map(|d| v.iter().map(|x| x[d]).sum::<f64>() / v.len() as f64).collect();
    v.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    csv_string(&["x", "y"], v.into_iter())
}

/// `ux,uy[,uz],value` rows of a tabulated radial function.
pub fn radial_csv(rows: &[(Vec<f64>, f64)]) -> Result<String> {
    let n = rows.first().map_or(2, |r| r.0.len());
    let header: &[&str] = if n == 3 {
        &["ux", "uy", "uz", "value"]
    } else {
        &["ux", "uy", "value"]
    };
    csv_string(
        header,
        rows.iter().map(|(u, v)| {
            let mut r = u.clone();
            r.push(*v);
            r
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn body_roundtrip_is_byte_stable() {
        let prov = Provenance::new("test", 7, Budgets::for_dim(3));
        for p in [fixtures::cube(), fixtures::random_polytope(3, 11, 3), fixtures::random_polytope(2, 6, 1)] {
            let a = polytope_to_string(&p, Some(&prov));
            let (body, pr) = parse_body(&a).unwrap();
            let Body::Polytope(q) = body else { panic!() };
            assert_eq!(pr.as_ref(), Some(&prov));
            assert_eq!(polytope_to_string(&q, pr.as_ref()), a);
        }
        let b = ball_to_string(&Ball::unit(3), None);
        let (Body::Ball(ball), _) = parse_body(&b).unwrap() else { panic!() };
        assert_eq!(ball_to_string(&ball, None), b);
    }

    #[test]
    fn measure_roundtrip_and_normalization() {
        let mu = fixtures::octagon_measure();
        let s = measure_to_string(&mu);
        assert_eq!(measure_to_string(&parse_measure(&s).unwrap()), s);
        let raw = r#"{"format":"adq-measure","version":1,"n":2,"atoms":[[2,0],[0,3],[-1,-1]],"weights":[1,1,1]}"#;
        let mu = parse_measure(raw).unwrap();
        assert_eq!(mu.atoms()[0].coords(), &[1.0, 0.0]);
        let tiny = r#"{"format":"adq-measure","version":1,"n":2,"atoms":[[1e-9,0],[0,1],[-1,-1]],"weights":[1,1,1]}"#;
        assert!(matches!(parse_measure(tiny), Err(Error::Format { field, .. }) if field == "atoms[0]"));
        let odd = r#"{"format":"adq-measure","version":1,"n":2,"even":true,"atoms":[[1,0],[0,1],[-1,-1]],"weights":[1,1,1]}"#;
        assert!(matches!(parse_measure(odd), Err(Error::Format { field, .. }) if field == "even"));
    }

    #[test]
    fn named_field_errors() {
        let bad = r#"{"format":"adq-measure","version":1,"n":2,"atoms":[[1,0],[0,"x"]],"weights":[1,1]}"#;
        match parse_measure(bad) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "atoms[1][1]"),
            other => panic!("{other:?}"),
        }
        let missing = r#"{"format":"adq-body","version":1,"kind":"ball","n":3}"#;
        assert!(matches!(parse_body(missing), Err(Error::Format { field, .. }) if field == "radius"));
        let ver = r#"{"format":"adq-body","version":9,"kind":"ball","n":3,"radius":1}"#;
        assert!(matches!(parse_body(ver), Err(Error::Format { field, .. }) if field == "version"));
    }

    #[test]
    fn cube_mesh() {
        let mesh = polytope_mesh(&fixtures::cube()).unwrap();
        let obj = mesh_to_obj(&mesh);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 12);
        assert!((mesh.volume() - 8.0).abs() < 1e-12);
        assert_eq!(parse_obj(&obj).unwrap(), mesh);
        assert!(polytope_mesh(&fixtures::square()).is_err());
    }

    #[test]
    fn mesh_volume_matches_polytope() {
        for seed in 0..10 {
            let p = fixtures::random_polytope(3, 14, seed);
            let mesh = polytope_mesh(&p).unwrap();
            assert!((mesh.volume() - p.volume()).abs() <= 1e-9 * p.volume());
        }
    }

    #[test]
    fn csv_exports() {
        let csv = polygon_csv(&fixtures::square()).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("x,y\n"));
        let rows = vec![(vec![1.0, 0.0, 0.0], 2.0)];
        assert_eq!(radial_csv(&rows).unwrap(), "ux,uy,uz,value\n1e0,0e0,0e0,2e0\n");
    }

    fn mutate(rng: &mut ChaCha8Rng, s: &str) -> String {
        let mut b: Vec<char> = s.chars().collect();
        for _ in 0..rng.random_range(1..4) {
            let i = rng.random_range(0..b.len());
            match rng.random_range(0..6) {
                0 => {
                    b.remove(i);
                }
                1 => b.insert(i, ['"', ',', '[', ']', '-', '9', 'e', '}'][rng.random_range(0..8)]),
                2 => b[i] = '0',
                3 => b.truncate(i.max(1)),
                4 => {
                    let j = rng.random_range(0..b.len());
                    b.swap(i, j);
                }
                _ => {
                    let t: String = b.iter().collect();
                    let t = t.replacen("1", "-1", 1).replacen("\"n\": 2", "\"n\": 7", 1);
                    b = t.chars().collect();
                }
            }
            if b.is_empty() {
                b.push('{');
            }
        }
        b.into_iter().collect()
    }

    #[test]
    fn fuzzed_files_never_panic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let body = polytope_to_string(&fixtures::square(), None);
        let measure = measure_to_string(&fixtures::triangle_measure());
        let mut rejected = 0;
        for k in 0..100 {
            let src = if k % 2 == 0 { &body } else { &measure };
            let m = mutate(&mut rng, src);
            let r = std::panic::catch_unwind(|| {
                if k % 2 == 0 {
                    parse_body(&m).err()
                } else {
                    parse_measure(&m).err()
                }
            });
            match r {
                Ok(Some(Error::Format { field, .. })) => {
                    assert!(!field.is_empty());
                    rejected += 1;
                }
                Ok(Some(e)) => panic!("unnamed error {e}"),
                Ok(None) => {}
                Err(_) => panic!("parser panicked on {m}"),
            }
        }
        assert!(rejected > 50);
    }
}
