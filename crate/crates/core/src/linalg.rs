//! Dense linear algebra for the m-by-m observation matrix: one-sided Jacobi
//! SVD, threshold-regularized pseudo-inverse, l1->l1 operator norm, and the
//! Neumann-series perturbation bound. The measurement count is small (tens),
//! so everything here is plain dense arithmetic.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn transpose(&self) -> DMat {
        let mut t = DMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DMat) -> DMat {
        assert_eq!(self.cols, other.rows);
        let mut out = DMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ---------- SVD ----------

#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMat,
    /// Singular values, non-negative, descending.
    pub sigma: Vec<f64>,
    pub vt: DMat,
}

const JACOBI_SWEEPS: usize = 30;
const JACOBI_TOL: f64 = 1e-15;

/// One-sided Jacobi SVD for a square matrix. Columns of a working copy are
/// rotated until mutually orthogonal; accurate for the small symmetric
/// systems this artifact produces.
pub fn svd(mat: &DMat) -> Result<Svd> {
    if mat.rows != mat.cols {
        return Err(Error::Linalg("svd expects a square matrix".into()));
    }
    if mat.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Linalg("svd input has non-finite entries".into()));
    }
    let n = mat.rows;
    // column-major working copies
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| mat[(i, j)]).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = n < 2;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = b[p].iter().map(|x| x * x).sum();
                let beta: f64 = b[q].iter().map(|x| x * x).sum();
                let gamma: f64 = b[p].iter().zip(&b[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let bp = b[p][i];
                    let bq = b[q][i];
                    b[p][i] = c * bp - s * bq;
                    b[q][i] = s * bp + c * bq;
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Linalg(format!(
            "one-sided Jacobi SVD did not converge in {JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = b.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (rank, &j) in order.iter().enumerate() {
        if sigma[rank] > sigma_max * 1e-300 && sigma[rank] > 0.0 {
            u_cols.push(b[j].iter().map(|x| x / sigma[rank]).collect());
        } else {
            u_cols.push(vec![0.0; n]);
        }
    }
    complete_orthonormal(&mut u_cols);

    let mut u = DMat::zeros(n, n);
    let mut vt = DMat::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            u[(i, k)] = u_cols[k][i];
            vt[(k, i)] = v[j][i];
        }
    }
    Ok(Svd { u, sigma, vt })
}

/// Replace zero columns by an orthonormal completion (Gram-Schmidt against
/// the standard basis).
fn complete_orthonormal(cols: &mut [Vec<f64>]) {
    let n = cols.len();
    for k in 0..n {
        if cols[k].iter().any(|&x| x != 0.0) {
            continue;
        }
        'candidates: for cand in 0..n {
            let mut w = vec![0.0; n];
            w[cand] = 1.0;
            for other in cols.iter().take(n) {
                let dot: f64 = w.iter().zip(other).map(|(a, b)| a * b).sum();
                for i in 0..n {
                    w[i] -= dot * other[i];
                }
            }
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for x in w.iter_mut() {
                    *x /= norm;
                }
                cols[k] = w;
                break 'candidates;
            }
        }
    }
}

/// Moore-Penrose pseudo-inverse with relative singular-value threshold:
/// only sigma_i > tau_rel * sigma_1 are inverted.
pub fn pinv_threshold(mat: &DMat, tau_rel: f64) -> Result<DMat> {
    if !(0.0..1.0).contains(&tau_rel) {
        return Err(Error::Linalg(format!("tau_rel must be in [0, 1), got {tau_rel}")));
    }
    let decomposition = svd(mat)?;
    Ok(pinv_from_svd(&decomposition, tau_rel))
}

pub fn pinv_from_svd(decomposition: &Svd, tau_rel: f64) -> DMat {
    let n = decomposition.sigma.len();
    let sigma_max = decomposition.sigma.first().copied().unwrap_or(0.0);
    // pinv = V * diag(1/sigma_i or 0) * U^T
    let mut out = DMat::zeros(n, n);
    for k in 0..n {
        let s = decomposition.sigma[k];
        if s <= tau_rel * sigma_max || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for i in 0..n {
            let vik = decomposition.vt[(k, i)];
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += vik * inv * decomposition.u[(j, k)];
            }
        }
    }
    out
}

/// Number of singular values retained by the threshold.
pub fn rank_at_threshold(sigma: &[f64], tau_rel: f64) -> usize {
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    sigma.iter().filter(|&&s| s > tau_rel * sigma_max && s > 0.0).count()
}

/// l1 -> l1 operator norm: maximum absolute column sum.
pub fn l1_opnorm(mat: &DMat) -> f64 {
    (0..mat.cols)
        .map(|j| (0..mat.rows).map(|i| mat[(i, j)].abs()).sum())
        .fold(0.0f64, f64::max)
}

/// The perturbation bound delta = m |G^-1|^2 eps2 / (1 - m |G^-1| eps2),
/// or `Diverged` when the Neumann series condition m |G^-1| eps2 < 1 fails.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBound {
    Bound(f64),
    Diverged,
}

pub fn delta_bound(g_inv_norm: f64, m: usize, eps2: f64) -> DeltaBound {
    let coupling = m as f64 * g_inv_norm * eps2;
    if coupling < 1.0 {
        DeltaBound::Bound(m as f64 * g_inv_norm * g_inv_norm * eps2 / (1.0 - coupling))
    } else {
        DeltaBound::Diverged
    }
}

/// Weighted l2 norm (m^-1 sum z_i^2)^(1/2).
pub fn weighted_l2(z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Linalg("weighted_l2 of empty vector".into()));
    }
    let m = z.len() as f64;
    Ok((z.iter().map(|v| v * v).sum::<f64>() / m).sqrt())
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi, ascending.
pub fn sym_eigenvalues(mat: &DMat) -> Result<Vec<f64>> {
    if mat.rows != mat.cols {
        return Err(Error::Linalg("sym_eigenvalues expects a square matrix".into()));
    }
    let n = mat.rows;
    let mut a = mat.clone();
    let scale = a.max_abs().max(1e-300);
    for _ in 0..50 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

// ---------- dense factorizations ----------

/// Cholesky factorization of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct DenseChol {
    n: usize,
    /// Lower-triangular factor, row-major.
    l: Vec<f64>,
}

impl DenseChol {
    pub fn factor(mat: &DMat) -> Result<Self> {
        if mat.rows != mat.cols {
            return Err(Error::Linalg("cholesky expects a square matrix".into()));
        }
        let n = mat.rows;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = mat[(i, j)];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::Linalg(format!(
                            "matrix not positive definite at pivot {i} ({sum:.3e})"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// Solve a general square system by LU with partial pivoting. Used for the
/// indefinite saddle-point cross-check on coarse meshes.
pub fn lu_solve(mat: &DMat, rhs: &[f64]) -> Result<Vec<f64>> {
    if mat.rows != mat.cols || mat.rows != rhs.len() {
        return Err(Error::Linalg("lu_solve dimension mismatch".into()));
    }
    let n = mat.rows;
    let mut a = mat.data.clone();
    let mut x = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[perm[col] * n + col].abs();
        for row in (col + 1)..n {
            let v = a[perm[row] * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(Error::Linalg(format!("singular system at column {col}")));
        }
        perm.swap(col, pivot);
        let p = perm[col];
        let diag = a[p * n + col];
        for row in (col + 1)..n {
            let r = perm[row];
            let factor = a[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            a[r * n + col] = factor;
            for k in (col + 1)..n {
                a[r * n + k] -= factor * a[p * n + k];
            }
            x[r] -= factor * x[p];
        }
    }
    // back substitution
    let mut out = vec![0.0; n];
    for i in (0..n).rev() {
        let p = perm[i];
        let mut sum = x[p];
        for k in (i + 1)..n {
            sum -= a[p * n + k] * out[k];
        }
        out[i] = sum / a[p * n + i];
    }
    Ok(out)
}

// ---------- observation matrix ----------

/// Dense symmetric observation matrix with its SVD and the relative
/// threshold used for the regularized pseudo-inverse.
#[derive(Debug, Clone)]
pub struct ObservationMatrix {
    pub entries: DMat,
    pub svd: Svd,
    pub tau_rel: f64,
}

pub const DEFAULT_TAU_REL: f64 = 1e-14;

impl ObservationMatrix {
    pub fn new(entries: DMat, tau_rel: f64) -> Result<Self> {
        if entries.rows != entries.cols {
            return Err(Error::Linalg("observation matrix must be square".into()));
        }
        if !(0.0..1.0).contains(&tau_rel) {
            return Err(Error::Linalg(format!("tau_rel must be in [0, 1), got {tau_rel}")));
        }
        let decomposition = svd(&entries)?;
        Ok(Self { entries, svd: decomposition, tau_rel })
    }

    pub fn m(&self) -> usize {
        self.entries.rows
    }

    pub fn pinv(&self) -> DMat {
        pinv_from_svd(&self.svd, self.tau_rel)
    }

    /// Count of singular values discarded by the threshold.
    pub fn discarded(&self) -> usize {
        self.m() - rank_at_threshold(&self.svd.sigma, self.tau_rel)
    }

    /// sigma_1 / sigma_rank over the retained singular values.
    pub fn condition_estimate(&self) -> f64 {
        let rank = rank_at_threshold(&self.svd.sigma, self.tau_rel);
        if rank == 0 {
            return f64::INFINITY;
        }
        self.svd.sigma[0] / self.svd.sigma[rank - 1]
    }

    pub fn symmetry_defect(&self) -> f64 {
        let m = self.m();
        let mut defect = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                defect = defect.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        defect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    fn random_mat(n: usize, rng: &mut SplitMix64) -> DMat {
        let mut m = DMat::zeros(n, n);
        for v in m.data.iter_mut() {
            *v = rng.next_signed();
        }
        m
    }

    fn random_spd(n: usize, rng: &mut SplitMix64) -> DMat {
        let b = random_mat(n, rng);
        let mut spd = b.matmul(&b.transpose());
        for i in 0..n {
            spd[(i, i)] += 0.1;
        }
        spd
    }

    #[test]
    fn svd_identity_and_diag() {
        let s = svd(&DMat::identity(3)).unwrap();
        for v in &s.sigma {
            assert!((v - 1.0).abs() < 1e-14);
        }

        let d = DMat::from_rows(&[vec![3.0, 0.0], vec![0.0, 0.0]]);
        let s = svd(&d).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-14);
        assert_eq!(s.sigma[1], 0.0);
        // orthogonality holds even with the completed null column
        let utu = s.u.transpose().matmul(&s.u);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((utu[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_reconstruction_and_orthogonality() {
        let mut rng = SplitMix64::new(11);
        let a = random_mat(5, &mut rng);
        let s = svd(&a).unwrap();
        // reconstruct U * Sigma * V^T
        let mut us = s.u.clone();
        for i in 0..5 {
            for j in 0..5 {
                us[(i, j)] *= s.sigma[j];
            }
        }
        let rec = us.matmul(&s.vt);
        let mut diff = 0.0f64;
        for i in 0..25 {
            diff += (rec.data[i] - a.data[i]).powi(2);
        }
        assert!(diff.sqrt() <= 1e-12 * a.frobenius_norm());

        for m in [&s.u, &s.vt.transpose()] {
            let mtm = m.transpose().matmul(m);
            for i in 0..5 {
                for j in 0..5 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((mtm[(i, j)] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pinv_discards_below_cutoff() {
        let d = DMat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-20]]);
        let p = pinv_threshold(&d, 1e-14).unwrap();
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
        assert_eq!(p[(1, 1)], 0.0);

        let p = pinv_threshold(&DMat::identity(4), 1e-14).unwrap();
        for i in 0..4 {
            assert!((p[(i, i)] - 1.0).abs() < 1e-13);
        }

        // all-zero matrix: zero pseudo-inverse is valid
        let p = pinv_threshold(&DMat::zeros(3, 3), 0.0).unwrap();
        assert!(p.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pinv_of_pd_matrix_inverts() {
        let mut rng = SplitMix64::new(5);
        let a = random_spd(4, &mut rng);
        let p = pinv_threshold(&a, 0.0).unwrap();
        let prod = p.matmul(&a);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn moore_penrose_identities_random_spd() {
        let mut rng = SplitMix64::new(17);
        for n in [2, 8, 16, 64] {
            let g = random_spd(n, &mut rng);
            let p = pinv_threshold(&g, 0.0).unwrap();
            let gp = g.matmul(&p);
            let pg = p.matmul(&g);
            let scale_g = g.frobenius_norm();
            let scale_p = p.frobenius_norm();
            let r1 = sub_norm(&gp.matmul(&g), &g);
            let r2 = sub_norm(&pg.matmul(&p), &p);
            let r3 = sub_norm(&gp.transpose(), &gp);
            let r4 = sub_norm(&pg.transpose(), &pg);
            assert!(r1 <= 1e-9 * scale_g, "n={n}: {r1:.3e}");
            assert!(r2 <= 1e-9 * scale_p, "n={n}: {r2:.3e}");
            assert!(r3 <= 1e-9 * gp.frobenius_norm().max(1.0));
            assert!(r4 <= 1e-9 * pg.frobenius_norm().max(1.0));
        }
    }

    fn sub_norm(a: &DMat, b: &DMat) -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn threshold_monotonicity() {
        let mut rng = SplitMix64::new(23);
        let g = random_spd(6, &mut rng);
        let s = svd(&g).unwrap();
        let mut prev_rank = usize::MAX;
        for tau in [0.0, 1e-12, 1e-6, 1e-3, 0.1, 0.9] {
            let rank = rank_at_threshold(&s.sigma, tau);
            assert!(rank <= prev_rank);
            prev_rank = rank;
        }
    }

    #[test]
    fn l1_norm_examples() {
        assert_eq!(l1_opnorm(&DMat::identity(7)), 1.0);
        let m = DMat::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]);
        assert_eq!(l1_opnorm(&m), 6.0);
    }

    #[test]
    fn l1_norm_dominates_random_unit_vectors() {
        let mut rng = SplitMix64::new(31);
        let m = random_mat(5, &mut rng);
        let norm = l1_opnorm(&m);
        let mut best = 0.0f64;
        for _ in 0..1000 {
            let mut x: Vec<f64> = (0..5).map(|_| rng.next_signed()).collect();
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            for v in x.iter_mut() {
                *v /= l1;
            }
            let y = m.matvec(&x);
            best = best.max(y.iter().map(|v| v.abs()).sum());
        }
        assert!(best <= norm + 1e-12);
        assert!(norm - best <= norm); // sampling only gives a lower bound
    }

    #[test]
    fn delta_bound_examples() {
        assert_eq!(delta_bound(1.0, 1, 0.0), DeltaBound::Bound(0.0));
        assert_eq!(delta_bound(1.0, 2, 0.25), DeltaBound::Bound(1.0));
        assert_eq!(delta_bound(1.0, 1, 1.0), DeltaBound::Diverged);
    }

    #[test]
    fn weighted_l2_examples() {
        let v = weighted_l2(&[3.0, 4.0]).unwrap();
        assert!((v - 5.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((weighted_l2(&vec![1.0; 9]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(weighted_l2(&[-2.5]).unwrap(), 2.5);
        assert!(weighted_l2(&[]).is_err());
    }

    #[test]
    fn sym_eigenvalues_match_known() {
        let m = DMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = sym_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_and_lu_solve() {
        let mut rng = SplitMix64::new(41);
        let a = random_spd(10, &mut rng);
        let x_true: Vec<f64> = (0..10).map(|_| rng.next_signed()).collect();
        let b = a.matvec(&x_true);

        let chol = DenseChol::factor(&a).unwrap();
        let x = chol.solve(&b);
        for i in 0..10 {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }

        let x = lu_solve(&a, &b).unwrap();
        for i in 0..10 {
            assert!((x[i] - x_true[i]).abs() < 1e-8);
        }

        assert!(DenseChol::factor(&DMat::from_rows(&[vec![0.0]])).is_err());
        assert!(lu_solve(&DMat::zeros(2, 2), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn observation_matrix_diagnostics() {
        let g = DMat::from_rows(&[vec![2.0, 0.0], vec![0.0, 1e-20]]);
        let obs = ObservationMatrix::new(g, 1e-14).unwrap();
        assert_eq!(obs.discarded(), 1);
        assert_eq!(obs.condition_estimate(), 1.0);
        assert_eq!(obs.symmetry_defect(), 0.0);
    }
}
