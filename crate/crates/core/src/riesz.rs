//! Discrete Riesz representers of point-evaluation functionals on the space
//! of discrete harmonic functions.
//!
//! The production path (`representer_schur`) eliminates the interior through
//! two interior solves and one boundary solve. Two independent cross-checks
//! are kept for validation: a dense route that harmonically extends every
//! boundary basis function, and the full indefinite saddle-point system.

use crate::error::{Error, Result};
use crate::fem::{point_eval, Forms, PointEval};
use crate::linalg::{self, DMat, ObservationMatrix};
use crate::mesh::{CoeffVec, TriMesh};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct RieszDiagnostics {
    /// Relative residuals of the interior solves, in execution order.
    pub interior_residuals: Vec<f64>,
    /// Relative residual of the boundary H1(Gamma) solve.
    pub boundary_residual: f64,
}

/// Boundary solution psi and its discrete harmonic extension phi for one
/// measurement point.
#[derive(Debug, Clone)]
pub struct RieszPair {
    pub point: [f64; 2],
    pub psi: CoeffVec,
    pub phi: CoeffVec,
    pub diagnostics: RieszDiagnostics,
}

impl RieszPair {
    /// psi^T (M + S) psi, which equals phi(x) by the representer property.
    pub fn boundary_energy(&self, forms: &Forms) -> f64 {
        let y = forms.apply_boundary_h1(&self.psi.values);
        y.iter().zip(&self.psi.values).map(|(a, b)| a * b).sum()
    }
}

fn split_functional(forms: &Forms, eval: &PointEval) -> (Vec<f64>, Vec<f64>) {
    let mut e_interior = vec![0.0; forms.partition.interior.len()];
    let mut e_boundary = vec![0.0; forms.partition.boundary.len()];
    for &(vertex, weight) in &eval.nodes {
        if let Some(p) = forms.interior_position(vertex) {
            e_interior[p] += weight;
        } else if let Some(p) = forms.boundary_position(vertex) {
            e_boundary[p] += weight;
        }
    }
    (e_interior, e_boundary)
}

fn boundary_residual(forms: &Forms, psi: &[f64], rhs: &[f64]) -> f64 {
    let applied = forms.apply_boundary_h1(psi);
    let num: f64 = applied
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Two-interior-solve Schur procedure:
/// (1) split e into interior/boundary parts, (2) solve A_II z = e_I,
/// (3) rhs = e_B - A_BI z, (4) solve (M+S) psi = rhs, (5) phi = E_h psi.
pub fn representer_schur(mesh: &TriMesh, forms: &Forms, point: [f64; 2]) -> Result<RieszPair> {
    let eval = point_eval(mesh, point)?;
    representer_schur_from_eval(forms, &eval)
}

pub fn representer_schur_from_eval(forms: &Forms, eval: &PointEval) -> Result<RieszPair> {
    let (e_interior, e_boundary) = split_functional(forms, eval);
    let mut interior_residuals = Vec::new();

    // z = A_II^{-1} e_I; for boundary measurement points e_I = 0 and z = 0
    let z = if e_interior.iter().any(|&v| v != 0.0) {
        let sol = forms.solve_interior(&e_interior)?;
        interior_residuals.push(sol.residual);
        sol.x
    } else {
        vec![0.0; e_interior.len()]
    };

    // rhs_j = e_B - (A_BI z)_j, i.e. g |-> (E_h g)(x) on boundary basis functions
    let mut full = vec![0.0; forms.num_vertices];
    for (p, &i) in forms.partition.interior.iter().enumerate() {
        full[i] = z[p];
    }
    let coupled = forms.stiffness.matvec(&full);
    let rhs: Vec<f64> = forms
        .partition
        .boundary
        .iter()
        .enumerate()
        .map(|(p, &i)| e_boundary[p] - coupled[i])
        .collect();

    let psi = forms.solve_boundary(&rhs);
    let b_res = boundary_residual(forms, &psi, &rhs);

    let psi_vec = CoeffVec::boundary(forms.level, psi);
    let phi = forms.harmonic_extend(&psi_vec)?;
    interior_residuals.push(forms.interior_residual(&phi));

    Ok(RieszPair {
        point: eval.point,
        psi: psi_vec,
        phi,
        diagnostics: RieszDiagnostics {
            interior_residuals,
            boundary_residual: b_res,
        },
    })
}

const DENSE_ORACLE_MAX_BOUNDARY: usize = 2000;

/// Validation route: build the load vector by harmonically extending every
/// boundary nodal basis function. Must match `representer_schur`.
pub fn representer_dense_oracle(
    mesh: &TriMesh,
    forms: &Forms,
    point: [f64; 2],
) -> Result<RieszPair> {
    let nb = forms.partition.boundary.len();
    if nb > DENSE_ORACLE_MAX_BOUNDARY {
        return Err(Error::SizeGuard(format!(
            "dense representer oracle limited to {DENSE_ORACLE_MAX_BOUNDARY} boundary DOFs, got {nb}"
        )));
    }
    let eval = point_eval(mesh, point)?;
    let mut rhs = vec![0.0; nb];
    for j in 0..nb {
        let mut g = vec![0.0; nb];
        g[j] = 1.0;
        let extension = forms.harmonic_extend(&CoeffVec::boundary(forms.level, g))?;
        rhs[j] = eval.apply(&extension.values);
    }
    let psi = forms.solve_boundary(&rhs);
    let b_res = boundary_residual(forms, &psi, &rhs);
    let psi_vec = CoeffVec::boundary(forms.level, psi);
    let phi = forms.harmonic_extend(&psi_vec)?;
    let interior_residuals = vec![forms.interior_residual(&phi)];
    Ok(RieszPair {
        point: eval.point,
        psi: psi_vec,
        phi,
        diagnostics: RieszDiagnostics {
            interior_residuals,
            boundary_residual: b_res,
        },
    })
}

const SADDLE_ORACLE_MAX_UNKNOWNS: usize = 4000;

/// Validation route: solve the full indefinite block system in
/// (phi over all DOFs, pi over interior DOFs):
///   row 1:  T^T (M+S) T phi + A[:, I] pi = e
///   row 2:  A[I, :] phi = 0
/// Also returns the multiplier, which is the interior Green's function.
pub fn representer_saddle_oracle(
    mesh: &TriMesh,
    forms: &Forms,
    point: [f64; 2],
) -> Result<(RieszPair, Vec<f64>)> {
    let n = forms.num_vertices;
    let ni = forms.partition.interior.len();
    let total = n + ni;
    if total > SADDLE_ORACLE_MAX_UNKNOWNS {
        return Err(Error::SizeGuard(format!(
            "saddle-point oracle limited to {SADDLE_ORACLE_MAX_UNKNOWNS} unknowns, got {total}"
        )));
    }
    let eval = point_eval(mesh, point)?;

    let mut system = DMat::zeros(total, total);
    // boundary H1 block mapped through the trace
    let bsum = {
        let mut b = forms.boundary_mass.to_dense();
        let s = forms.boundary_stiffness.to_dense();
        for k in 0..b.data.len() {
            b.data[k] += s.data[k];
        }
        b
    };
    for (pi_, &vi) in forms.partition.boundary.iter().enumerate() {
        for (pj, &vj) in forms.partition.boundary.iter().enumerate() {
            system[(vi, vj)] = bsum[(pi_, pj)];
        }
    }
    // A[:, I] and its transpose
    let a_dense = forms.stiffness.to_dense();
    for (p, &j) in forms.partition.interior.iter().enumerate() {
        for i in 0..n {
            system[(i, n + p)] += a_dense[(i, j)];
            system[(n + p, i)] += a_dense[(j, i)];
        }
    }

    let mut rhs = vec![0.0; total];
    for &(vertex, weight) in &eval.nodes {
        rhs[vertex] += weight;
    }

    let solution = linalg::lu_solve(&system, &rhs)?;
    let phi_values = solution[..n].to_vec();
    let multiplier = solution[n..].to_vec();

    let phi = CoeffVec::volume(forms.level, phi_values);
    let psi = CoeffVec::boundary(forms.level, forms.trace(&phi.values));
    let interior_residuals = vec![forms.interior_residual(&phi)];
    Ok((
        RieszPair {
            point: eval.point,
            psi,
            phi,
            diagnostics: RieszDiagnostics {
                interior_residuals,
                boundary_residual: 0.0,
            },
        },
        multiplier,
    ))
}

/// Representers for many points, sharing the assembled factorizations.
pub fn representers(mesh: &TriMesh, forms: &Forms, points: &[[f64; 2]]) -> Result<Vec<RieszPair>> {
    let evals: Vec<PointEval> = points
        .iter()
        .map(|&p| point_eval(mesh, p))
        .collect::<Result<_>>()?;
    evals
        .par_iter()
        .map(|e| representer_schur_from_eval(forms, e))
        .collect()
}

/// Observation matrix G_ij = phi_j(x_i).
pub fn assemble_observation(
    mesh: &TriMesh,
    pairs: &[RieszPair],
    tau_rel: f64,
) -> Result<ObservationMatrix> {
    let m = pairs.len();
    for pair in pairs {
        if pair.phi.level != mesh.level {
            return Err(Error::HierarchyMismatch(
                "observation assembly mixes representers from different levels".into(),
            ));
        }
    }
    let evals: Vec<PointEval> = pairs
        .iter()
        .map(|p| point_eval(mesh, p.point))
        .collect::<Result<_>>()?;
    let mut entries = DMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            entries[(i, j)] = evals[i].apply(&pairs[j].phi.values);
        }
    }
    ObservationMatrix::new(entries, tau_rel)
}
