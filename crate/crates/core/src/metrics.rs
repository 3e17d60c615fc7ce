//! Error norms on the mesh hierarchy and the convergence studies built on
//! them: representer self-convergence against an overrefined surrogate,
//! boundary-proximity degradation, and full-recovery error tables.

use crate::error::{Error, Result};
use crate::exprlang::FieldExpr;
use crate::fem::Forms;
use crate::mesh::{generate, prolong, CoeffVec, DomainSpec, TriMesh};
use crate::recovery::{self, MeasurementSet};
use crate::riesz;
use rayon::prelude::*;
use serde::Serialize;

/// Distances from every vertex and triangle centroid to the boundary,
/// cached once per mesh for the d-restricted max norms.
pub struct EvalSet {
    vertex_dist: Vec<f64>,
    centroid_dist: Vec<f64>,
}

impl EvalSet {
    pub fn new(mesh: &TriMesh) -> Self {
        let vertex_dist = mesh
            .vertices
            .par_iter()
            .map(|&v| mesh.dist_to_boundary(v))
            .collect();
        let centroid_dist = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| mesh.dist_to_boundary(mesh.centroid(t)))
            .collect();
        Self { vertex_dist, centroid_dist }
    }
}

fn diff_values(mesh: &TriMesh, a: &CoeffVec, b: &CoeffVec) -> Result<Vec<f64>> {
    let a = if a.level == mesh.level { a.clone() } else { prolong(a, mesh)? };
    let b = if b.level == mesh.level { b.clone() } else { prolong(b, mesh)? };
    if a.values.len() != mesh.num_vertices() || b.values.len() != mesh.num_vertices() {
        return Err(Error::HierarchyMismatch("coefficient length does not match mesh".into()));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
}

/// Energy norm sqrt(e^T (A + M) e) of the difference, on `mesh`'s level.
/// Coarser inputs are prolonged through the nested hierarchy first.
pub fn h1_error(mesh: &TriMesh, forms: &Forms, a: &CoeffVec, b: &CoeffVec) -> Result<f64> {
    if forms.level != mesh.level {
        return Err(Error::HierarchyMismatch("forms assembled on a different level".into()));
    }
    let e = diff_values(mesh, a, b)?;
    let val = forms.stiffness.quad_form(&e, &e) + forms.mass.quad_form(&e, &e);
    Ok(val.max(0.0).sqrt())
}

fn linf_of(mesh: &TriMesh, e: &[f64], restrict: Option<(f64, &EvalSet)>) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut hits = 0usize;
    for (i, &v) in e.iter().enumerate() {
        if let Some((d, set)) = restrict {
            if set.vertex_dist[i] <= d {
                continue;
            }
        }
        hits += 1;
        best = best.max(v.abs());
    }
    for t in 0..mesh.num_triangles() {
        if let Some((d, set)) = restrict {
            if set.centroid_dist[t] <= d {
                continue;
            }
        }
        hits += 1;
        let [a, b, c] = mesh.triangles[t];
        best = best.max(((e[a] + e[b] + e[c]) / 3.0).abs());
    }
    if hits == 0 {
        let d = restrict.map(|(d, _)| d).unwrap_or(0.0);
        return Err(Error::Config(format!(
            "no evaluation points at distance > {d} from the boundary"
        )));
    }
    Ok(best)
}

/// Max |a - b| over fine vertices and triangle centroids.
pub fn linf_error(mesh: &TriMesh, a: &CoeffVec, b: &CoeffVec) -> Result<f64> {
    let e = diff_values(mesh, a, b)?;
    linf_of(mesh, &e, None)
}

/// Same, restricted to points farther than `d` from the boundary.
pub fn linf_d_error(
    mesh: &TriMesh,
    a: &CoeffVec,
    b: &CoeffVec,
    d: f64,
    set: &EvalSet,
) -> Result<f64> {
    let e = diff_values(mesh, a, b)?;
    linf_of(mesh, &e, Some((d, set)))
}

/// Max-norm error of a coefficient vector against an analytic field, at
/// vertices and centroids, optionally restricted away from the boundary.
pub fn linf_field_error(
    mesh: &TriMesh,
    coeffs: &CoeffVec,
    field: &FieldExpr,
    restrict: Option<(f64, &EvalSet)>,
) -> Result<f64> {
    if coeffs.level != mesh.level || coeffs.values.len() != mesh.num_vertices() {
        return Err(Error::HierarchyMismatch("coefficient vector does not match mesh".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut hits = 0usize;
    for (i, &v) in coeffs.values.iter().enumerate() {
        if let Some((d, set)) = restrict {
            if set.vertex_dist[i] <= d {
                continue;
            }
        }
        hits += 1;
        let exact = field.eval(mesh.vertices[i][0], mesh.vertices[i][1])?;
        best = best.max((v - exact).abs());
    }
    for t in 0..mesh.num_triangles() {
        if let Some((d, set)) = restrict {
            if set.centroid_dist[t] <= d {
                continue;
            }
        }
        hits += 1;
        let [a, b, c] = mesh.triangles[t];
        let approx = (coeffs.values[a] + coeffs.values[b] + coeffs.values[c]) / 3.0;
        let cen = mesh.centroid(t);
        best = best.max((approx - field.eval(cen[0], cen[1])?).abs());
    }
    if hits == 0 {
        return Err(Error::Config("no evaluation points survive the distance restriction".into()));
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub level: usize,
    pub h: f64,
    pub err_h1: f64,
    pub err_linf: f64,
    pub err_linf_d: f64,
    pub rate_h1: Option<f64>,
    pub rate_linf: Option<f64>,
    pub rate_linf_d: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub rows: Vec<StudyRow>,
    pub surrogate_level: usize,
    pub d: f64,
}

impl ErrorReport {
    pub fn ls_rates(&self) -> [f64; 3] {
        let levels: Vec<f64> = self.rows.iter().map(|r| r.level as f64).collect();
        [
            ls_rate(&levels, &self.rows.iter().map(|r| r.err_h1).collect::<Vec<_>>()),
            ls_rate(&levels, &self.rows.iter().map(|r| r.err_linf).collect::<Vec<_>>()),
            ls_rate(&levels, &self.rows.iter().map(|r| r.err_linf_d).collect::<Vec<_>>()),
        ]
    }
}

/// Least-squares slope of log2(err) against level, negated so that a
/// first-order method reports +1.
pub fn ls_rate(levels: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(levels.len(), errs.len());
    let n = levels.len() as f64;
    let logs: Vec<f64> = errs.iter().map(|&e| e.max(f64::MIN_POSITIVE).log2()).collect();
    let mx = levels.iter().sum::<f64>() / n;
    let my = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in levels.iter().zip(&logs) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    -num / den
}

fn fill_rates(rows: &mut [StudyRow]) {
    for i in 1..rows.len() {
        let prev = rows[i - 1].clone();
        let gap = (rows[i].level - prev.level) as f64;
        rows[i].rate_h1 = Some((prev.err_h1 / rows[i].err_h1).log2() / gap);
        rows[i].rate_linf = Some((prev.err_linf / rows[i].err_linf).log2() / gap);
        rows[i].rate_linf_d = Some((prev.err_linf_d / rows[i].err_linf_d).log2() / gap);
    }
}

/// Minimum number of levels the surrogate must sit above the finest study
/// level for it to serve as a reference.
pub const SURROGATE_MIN_GAP: usize = 2;

/// Self-convergence of the representer of one measurement point against the
/// surrogate computed at `surrogate_level`, with all errors measured on the
/// surrogate mesh.
pub fn representer_study(
    spec: DomainSpec,
    point: [f64; 2],
    k_min: usize,
    k_max: usize,
    surrogate_level: usize,
    d: f64,
) -> Result<ErrorReport> {
    if k_min > k_max || k_max + SURROGATE_MIN_GAP > surrogate_level {
        return Err(Error::Config(format!(
            "study levels {k_min}..{k_max} need a surrogate at least {SURROGATE_MIN_GAP} above, got {surrogate_level}"
        )));
    }
    let fine = generate(spec, surrogate_level)?;
    let fine_forms = Forms::assemble(&fine)?;
    let reference = riesz::representer_schur(&fine, &fine_forms, point)?;
    let set = EvalSet::new(&fine);

    let mut rows = Vec::new();
    for k in k_min..=k_max {
        let mesh = fine.level_mesh(k).ok_or_else(|| {
            Error::HierarchyMismatch(format!("level {k} missing from hierarchy"))
        })?;
        let forms = Forms::assemble(mesh)?;
        let pair = riesz::representer_schur(mesh, &forms, point)?;
        let phi = prolong(&pair.phi, &fine)?;
        rows.push(StudyRow {
            level: k,
            h: mesh_width(spec, k),
            err_h1: h1_error(&fine, &fine_forms, &phi, &reference.phi)?,
            err_linf: linf_error(&fine, &phi, &reference.phi)?,
            err_linf_d: linf_d_error(&fine, &phi, &reference.phi, d, &set)?,
            rate_h1: None,
            rate_linf: None,
            rate_linf_d: None,
        });
    }
    fill_rates(&mut rows);
    Ok(ErrorReport { rows, surrogate_level, d })
}

/// Representative mesh width: the base cell size halved k times.
pub fn mesh_width(spec: DomainSpec, k: usize) -> f64 {
    let base = match spec {
        DomainSpec::UnitSquare => std::f64::consts::SQRT_2,
        DomainSpec::LShape => std::f64::consts::SQRT_2,
        DomainSpec::PolygonDisc { .. } => 1.0,
    };
    base / (1u64 << k) as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct ProximityRow {
    pub point: [f64; 2],
    pub boundary_distance: f64,
    pub err_h1: f64,
    pub err_linf: f64,
}

/// Representer error at a fixed level for points approaching the boundary.
pub fn boundary_proximity_study(
    spec: DomainSpec,
    points: &[[f64; 2]],
    k: usize,
    surrogate_level: usize,
) -> Result<Vec<ProximityRow>> {
    if k + SURROGATE_MIN_GAP > surrogate_level {
        return Err(Error::Config(format!(
            "proximity study at level {k} needs a surrogate at least {SURROGATE_MIN_GAP} above, got {surrogate_level}"
        )));
    }
    let fine = generate(spec, surrogate_level)?;
    let fine_forms = Forms::assemble(&fine)?;
    let mesh = fine
        .level_mesh(k)
        .ok_or_else(|| Error::HierarchyMismatch(format!("level {k} missing from hierarchy")))?;
    let forms = Forms::assemble(mesh)?;

    let mut rows = Vec::new();
    for &p in points {
        let coarse = riesz::representer_schur(mesh, &forms, p)?;
        let reference = riesz::representer_schur(&fine, &fine_forms, p)?;
        let phi = prolong(&coarse.phi, &fine)?;
        rows.push(ProximityRow {
            point: p,
            boundary_distance: fine.dist_to_boundary(p),
            err_h1: h1_error(&fine, &fine_forms, &phi, &reference.phi)?,
            err_linf: linf_error(&fine, &phi, &reference.phi)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryRow {
    pub level: usize,
    pub h: f64,
    pub err_linf: f64,
    pub err_linf_d: f64,
    pub max_residual: f64,
    pub discarded: usize,
    pub condition_estimate: f64,
}

/// Recovery error per level against the analytic field the measurements
/// were sampled from, in the interior max norm.
pub fn recovery_study(
    spec: DomainSpec,
    f: &FieldExpr,
    exact: &FieldExpr,
    measurements: &MeasurementSet,
    k_min: usize,
    k_max: usize,
    d: f64,
    tau_rel: f64,
) -> Result<Vec<RecoveryRow>> {
    if k_min > k_max {
        return Err(Error::Config(format!("empty level range {k_min}..{k_max}")));
    }
    let top = generate(spec, k_max)?;
    let mut rows = Vec::new();
    for k in k_min..=k_max {
        let mesh = top.level_mesh(k).ok_or_else(|| {
            Error::HierarchyMismatch(format!("level {k} missing from hierarchy"))
        })?;
        let forms = Forms::assemble(mesh)?;
        let rec = recovery::run_recovery(mesh, &forms, f, measurements, tau_rel)?;
        let set = EvalSet::new(mesh);
        rows.push(RecoveryRow {
            level: k,
            h: mesh_width(spec, k),
            err_linf: linf_field_error(mesh, &rec.u_star, exact, None)?,
            err_linf_d: linf_field_error(mesh, &rec.u_star, exact, Some((d, &set)))?,
            max_residual: rec.max_residual(),
            discarded: rec.observation.discarded(),
            condition_estimate: rec.observation.condition_estimate(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse_field;
    use crate::util::SplitMix64;

    fn random_coeffs(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SplitMix64::new(seed);
        (0..n).map(|_| rng.next_signed()).collect()
    }

    #[test]
    fn norms_are_norms() {
        let mesh = generate(DomainSpec::UnitSquare, 3).unwrap();
        let forms = Forms::assemble(&mesh).unwrap();
        let n = mesh.num_vertices();
        let a = CoeffVec::volume(3, random_coeffs(n, 1));
        let b = CoeffVec::volume(3, random_coeffs(n, 2));
        let c = CoeffVec::volume(3, random_coeffs(n, 3));
        // identity, symmetry, triangle inequality
        assert_eq!(h1_error(&mesh, &forms, &a, &a).unwrap(), 0.0);
        let ab = h1_error(&mesh, &forms, &a, &b).unwrap();
        let ba = h1_error(&mesh, &forms, &b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-13);
        let ac = h1_error(&mesh, &forms, &a, &c).unwrap();
        let cb = h1_error(&mesh, &forms, &c, &b).unwrap();
        assert!(ab <= ac + cb + 1e-13);
        assert!(ab > 0.0);
        let li = linf_error(&mesh, &a, &b).unwrap();
        assert!(li > 0.0 && li <= 2.0);
    }

    #[test]
    fn prolongation_is_error_neutral() {
        // a coarse vector compared against its own prolongation is exact
        let fine = generate(DomainSpec::UnitSquare, 4).unwrap();
        let fine_forms = Forms::assemble(&fine).unwrap();
        let coarse = fine.level_mesh(2).unwrap();
        let a = CoeffVec::volume(2, random_coeffs(coarse.num_vertices(), 5));
        let lifted = prolong(&a, &fine).unwrap();
        assert!(h1_error(&fine, &fine_forms, &a, &lifted).unwrap() < 1e-13);
        assert!(linf_error(&fine, &a, &lifted).unwrap() < 1e-14);
    }

    #[test]
    fn d_restriction_limits() {
        let mesh = generate(DomainSpec::UnitSquare, 3).unwrap();
        let set = EvalSet::new(&mesh);
        let n = mesh.num_vertices();
        let a = CoeffVec::volume(3, random_coeffs(n, 7));
        let b = CoeffVec::volume(3, vec![0.0; n]);
        let full = linf_error(&mesh, &a, &b).unwrap();
        let at_zero = linf_d_error(&mesh, &a, &b, 0.0, &set).unwrap();
        // d = 0 drops only points exactly on the boundary
        assert!(at_zero <= full);
        let restricted = linf_d_error(&mesh, &a, &b, 0.25, &set).unwrap();
        assert!(restricted <= full);
        assert!(linf_d_error(&mesh, &a, &b, 10.0, &set).is_err());
    }

    #[test]
    fn ls_rate_recovers_synthetic_order() {
        let levels = [3.0, 4.0, 5.0, 6.0];
        let errs: Vec<f64> = levels.iter().map(|k| 7.3 * 2f64.powf(-1.7 * k)).collect();
        assert!((ls_rate(&levels, &errs) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn field_error_of_interpolant_is_zero() {
        let mesh = generate(DomainSpec::UnitSquare, 3).unwrap();
        let field = parse_field("1+2*x-y").unwrap();
        let coeffs = CoeffVec::volume(
            3,
            mesh.vertices.iter().map(|v| 1.0 + 2.0 * v[0] - v[1]).collect(),
        );
        // linear fields are exactly represented at vertices and centroids
        assert!(linf_field_error(&mesh, &coeffs, &field, None).unwrap() < 1e-13);
    }

    #[test]
    fn study_guards() {
        assert!(representer_study(DomainSpec::UnitSquare, [0.5, 0.5], 2, 5, 6, 0.1).is_err());
        assert!(boundary_proximity_study(DomainSpec::UnitSquare, &[[0.5, 0.5]], 5, 6).is_err());
    }

    #[test]
    fn small_representer_study_runs() {
        let report =
            representer_study(DomainSpec::UnitSquare, [0.5, 0.5], 2, 3, 5, 0.25).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows[0].rate_h1.is_none());
        assert!(report.rows[1].rate_h1.is_some());
        for row in &report.rows {
            assert!(row.err_h1 > 0.0 && row.err_linf > 0.0 && row.err_linf_d > 0.0);
            assert!(row.err_linf_d <= row.err_linf + 1e-15);
        }
        // errors shrink with refinement
        assert!(report.rows[1].err_h1 < report.rows[0].err_h1);
    }
}
