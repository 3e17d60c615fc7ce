//! Internal SPD solve policy: Jacobi-preconditioned conjugate gradients.
//! Callers only see "solve to relative residual tolerance".

use crate::error::{Error, Result};
use crate::fem::SymSparse;

pub const CG_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    /// Achieved relative residual |b - Ax| / |b|.
    pub residual: f64,
    pub iterations: usize,
}

pub fn cg(mat: &SymSparse, rhs: &[f64], tol: f64) -> Result<CgSolution> {
    let n = mat.n;
    assert_eq!(rhs.len(), n);
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], residual: 0.0, iterations: 0 });
    }
    let max_iter = 10 * n + 100;
    let diag = mat.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = dot(&r, &z);
    let mut best_res = f64::INFINITY;

    for iter in 0..max_iter {
        let ap = mat.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // matrix not positive definite on this subspace; bail with state
            return Err(Error::SolverNonConvergence {
                residual: norm(&r) / b_norm,
                iterations: iter,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / b_norm;
        best_res = best_res.min(res);
        if res <= tol {
            return Ok(CgSolution { x, residual: res, iterations: iter + 1 });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // accept mild stagnation near machine precision
    let res = norm(&r) / b_norm;
    if res <= tol * 100.0 {
        return Ok(CgSolution { x, residual: res, iterations: max_iter });
    }
    Err(Error::SolverNonConvergence { residual: res, iterations: max_iter })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
