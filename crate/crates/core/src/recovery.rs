//! Recovery of the Poisson solution with unknown boundary data from interior
//! point measurements: subtract the source-only part u0, solve the
//! observation system through a thresholded pseudo-inverse, and re-expand in
//! the representer basis.

use crate::error::{Error, Result};
use crate::exprlang::FieldExpr;
use crate::fem::{point_eval, Forms, PointEval};
use crate::linalg::{self, DeltaBound, ObservationMatrix};
use crate::mesh::{CoeffVec, TriMesh};
use crate::riesz::{self, RieszPair};
use crate::util::SplitMix64;
use serde::Serialize;

/// Minimum pairwise distance between measurement points.
pub const MIN_POINT_SEPARATION: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl MeasurementSet {
    pub fn new(points: Vec<[f64; 2]>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Config(format!(
                "{} measurement points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::Config("empty measurement set".into()));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = ((points[i][0] - points[j][0]).powi(2)
                    + (points[i][1] - points[j][1]).powi(2))
                .sqrt();
                if d <= MIN_POINT_SEPARATION {
                    return Err(Error::Config(format!(
                        "measurement points {i} and {j} coincide (distance {d:.3e})"
                    )));
                }
            }
        }
        Ok(Self { points, values })
    }
}

/// Four points per index on the sides of the square [0.1, 0.9]^2:
/// (0.9, t), (0.1, t), (t, 0.1), (t, 0.9) with t = (i+1)/17, i = 0..m/4-1.
pub fn box_formation(m: usize) -> Result<Vec<[f64; 2]>> {
    if m == 0 || m % 4 != 0 {
        return Err(Error::Config(format!(
            "box formation needs a positive multiple of 4 points, got {m}"
        )));
    }
    if m / 4 > 16 {
        return Err(Error::Config(format!(
            "box formation supports at most 64 points, got {m}"
        )));
    }
    let mut points = Vec::with_capacity(m);
    for i in 0..m / 4 {
        let t = (i + 1) as f64 / 17.0;
        points.push([0.9, t]);
        points.push([0.1, t]);
        points.push([t, 0.1]);
        points.push([t, 0.9]);
    }
    Ok(points)
}

/// Uniform interior lattice: m = k^2 points ((i+1)/(k+1), (j+1)/(k+1)).
pub fn grid_formation(m: usize) -> Result<Vec<[f64; 2]>> {
    let k = (m as f64).sqrt().round() as usize;
    if k == 0 || k * k != m {
        return Err(Error::Config(format!(
            "grid formation needs a positive perfect square, got {m}"
        )));
    }
    let mut points = Vec::with_capacity(m);
    let h = 1.0 / (k + 1) as f64;
    for i in 0..k {
        for j in 0..k {
            points.push([(i + 1) as f64 * h, (j + 1) as f64 * h]);
        }
    }
    Ok(points)
}

/// Sample an analytic field at the measurement points.
pub fn synthesize_measurements(field: &FieldExpr, points: &[[f64; 2]]) -> Result<MeasurementSet> {
    let values = points
        .iter()
        .map(|p| field.eval(p[0], p[1]).map_err(Error::from))
        .collect::<Result<Vec<f64>>>()?;
    MeasurementSet::new(points.to_vec(), values)
}

/// Same, with additive uniform noise in [-amplitude, amplitude].
pub fn synthesize_noisy_measurements(
    field: &FieldExpr,
    points: &[[f64; 2]],
    amplitude: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    let mut set = synthesize_measurements(field, points)?;
    let mut rng = SplitMix64::new(seed);
    for v in set.values.iter_mut() {
        *v += amplitude * rng.next_signed();
    }
    Ok(set)
}

pub struct RecoveryResult {
    /// Source-only part: homogeneous Dirichlet solve of -Laplace u = f.
    pub u0: CoeffVec,
    pub pairs: Vec<RieszPair>,
    pub observation: ObservationMatrix,
    /// Coefficients of the representer expansion.
    pub coefficients: Vec<f64>,
    /// Recovered field u0 + sum_i coefficients[i] * phi_i.
    pub u_star: CoeffVec,
    /// lambda_i(u_star) - omega_i per measurement.
    pub residuals: Vec<f64>,
}

impl RecoveryResult {
    /// The discrete harmonic part u_star - u0.
    pub fn harmonic_part(&self) -> CoeffVec {
        let values = self
            .u_star
            .values
            .iter()
            .zip(&self.u0.values)
            .map(|(a, b)| a - b)
            .collect();
        CoeffVec::volume(self.u_star.level, values)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Full recovery pipeline on one mesh level.
pub fn run_recovery(
    mesh: &TriMesh,
    forms: &Forms,
    f: &FieldExpr,
    measurements: &MeasurementSet,
    tau_rel: f64,
) -> Result<RecoveryResult> {
    let evals: Vec<PointEval> = measurements
        .points
        .iter()
        .map(|&p| point_eval(mesh, p))
        .collect::<Result<_>>()?;

    let u0 = forms.solve_u0(mesh, f)?;
    let shifted: Vec<f64> = measurements
        .values
        .iter()
        .zip(&evals)
        .map(|(omega, e)| omega - e.apply(&u0.values))
        .collect();

    let pairs = riesz::representers(mesh, forms, &measurements.points)?;
    let observation = riesz::assemble_observation(mesh, &pairs, tau_rel)?;
    let coefficients = observation.pinv().matvec(&shifted);

    let mut u_star = u0.values.clone();
    for (c, pair) in coefficients.iter().zip(&pairs) {
        for (u, phi) in u_star.iter_mut().zip(&pair.phi.values) {
            *u += c * phi;
        }
    }
    let u_star = CoeffVec::volume(mesh.level, u_star);

    let residuals: Vec<f64> = evals
        .iter()
        .zip(&measurements.values)
        .map(|(e, omega)| e.apply(&u_star.values) - omega)
        .collect();

    Ok(RecoveryResult { u0, pairs, observation, coefficients, u_star, residuals })
}

/// User-supplied analytic proxies for the a-priori constants in the
/// near-optimality bound.
#[derive(Debug, Clone, Serialize)]
pub struct NormProxies {
    /// Bound on the source term: Lambda_0 |f|.
    pub source: f64,
    /// Bound on the boundary data: Lambda_s C_B.
    pub boundary: f64,
    /// Stability constant C_X of the measurement set.
    pub stability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NearOptimalityReport {
    pub m: usize,
    pub discarded: usize,
    pub condition_estimate: f64,
    /// l1 -> l1 operator norm of the (pseudo-)inverse observation matrix.
    pub g_inv_l1: f64,
    /// Perturbation amplification factor, or divergence of its series.
    pub delta: DeltaBound,
    /// Composite accuracy bound; absent when the delta series diverges.
    pub epsilon: Option<f64>,
}

/// Accuracy bound eps = (1 + delta) (source + boundary) eps1
///                     + (1 + (1 + delta) stability) eps2-weighted-residual.
pub fn near_optimality_report(
    result: &RecoveryResult,
    eps1: f64,
    eps2: f64,
    proxies: &NormProxies,
) -> Result<NearOptimalityReport> {
    let g_inv_l1 = linalg::l1_opnorm(&result.observation.pinv());
    let m = result.observation.m();
    let delta = linalg::delta_bound(g_inv_l1, m, eps2);
    let epsilon = match delta {
        DeltaBound::Bound(d) => {
            let residual_term = linalg::weighted_l2(&result.residuals)?;
            Some(
                (1.0 + d) * (proxies.source + proxies.boundary) * eps1
                    + (1.0 + (1.0 + d) * proxies.stability) * residual_term.max(eps2),
            )
        }
        DeltaBound::Diverged => None,
    };
    Ok(NearOptimalityReport {
        m,
        discarded: result.observation.discarded(),
        condition_estimate: result.observation.condition_estimate(),
        g_inv_l1,
        delta,
        epsilon,
    })
}
