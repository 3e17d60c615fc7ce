//! Piecewise-linear finite element operators: volume stiffness and mass on
//! the triangulated domain, H1 mass/stiffness along the closed boundary
//! curve, load vectors, point-evaluation functionals, the interior/boundary
//! DOF partition, discrete harmonic extension, and the homogeneous Dirichlet
//! solve.

use crate::error::{Error, Result};
use crate::exprlang::FieldExpr;
use crate::linalg::{DMat, DenseChol};
use crate::mesh::{CoeffVec, DofSpace, TriMesh};
use crate::solver::{self, CgSolution};

/// Symmetric sparse matrix in compressed-row form. Both triangles are
/// stored, so `matvec` is a plain CSR product; assembly accumulates
/// symmetric element contributions in identical order, making the stored
/// matrix bitwise equal to its transpose.
#[derive(Debug, Clone)]
pub struct SymSparse {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymSparse {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, vals }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut sum = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                sum += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = sum;
        }
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[k] == j {
                return self.vals[k];
            }
        }
        0.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum()
            })
            .fold(0.0f64, f64::max)
    }

    /// Quadratic form x^T A y.
    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMat {
        let mut m = DMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = self.vals[k];
            }
        }
        m
    }

    /// Extract the principal submatrix on `ids`, re-indexed by position.
    pub fn submatrix(&self, ids: &[usize]) -> SymSparse {
        let mut pos = vec![usize::MAX; self.n];
        for (p, &i) in ids.iter().enumerate() {
            pos[i] = p;
        }
        let mut triplets = Vec::new();
        for (p, &i) in ids.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if pos[j] != usize::MAX {
                    triplets.push((p, pos[j], self.vals[k]));
                }
            }
        }
        SymSparse::from_triplets(ids.len(), &triplets)
    }
}

/// Interior/boundary split of the vertex DOFs. Boundary DOFs keep the
/// cyclic order of the boundary loop.
#[derive(Debug, Clone)]
pub struct DofPartition {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl DofPartition {
    pub fn build(mesh: &TriMesh) -> Self {
        let mut on_boundary = vec![false; mesh.num_vertices()];
        for &b in &mesh.boundary_loop {
            on_boundary[b] = true;
        }
        let interior = (0..mesh.num_vertices())
            .filter(|&i| !on_boundary[i])
            .collect();
        Self { interior, boundary: mesh.boundary_loop.clone() }
    }
}

/// Exact point-evaluation functional on the P1 space.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub point: [f64; 2],
    pub triangle: usize,
    pub nodes: [(usize, f64); 3],
}

impl PointEval {
    pub fn apply(&self, coeffs: &[f64]) -> f64 {
        self.nodes.iter().map(|&(i, w)| w * coeffs[i]).sum()
    }
}

pub fn point_eval(mesh: &TriMesh, p: [f64; 2]) -> Result<PointEval> {
    let (t, bary) = mesh.locate(p)?;
    let [a, b, c] = mesh.triangles[t];
    Ok(PointEval {
        point: p,
        triangle: t,
        nodes: [(a, bary[0]), (b, bary[1]), (c, bary[2])],
    })
}

pub fn assemble_volume_stiffness(mesh: &TriMesh) -> Result<SymSparse> {
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * 9);
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.triangles[t];
        let area = mesh.signed_area(t);
        if area <= 0.0 {
            return Err(Error::Mesh(format!("degenerate triangle {t} (area {area:.3e})")));
        }
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        let pc = mesh.vertices[c];
        // edge vector opposite each node; grad(lambda_i) = rot90(e_i)/(2A)
        let e = [
            [pc[0] - pb[0], pc[1] - pb[1]],
            [pa[0] - pc[0], pa[1] - pc[1]],
            [pb[0] - pa[0], pb[1] - pa[1]],
        ];
        let nodes = [a, b, c];
        for i in 0..3 {
            for j in 0..3 {
                let kij = (e[i][0] * e[j][0] + e[i][1] * e[j][1]) / (4.0 * area);
                triplets.push((nodes[i], nodes[j], kij));
            }
        }
    }
    Ok(SymSparse::from_triplets(mesh.num_vertices(), &triplets))
}

pub fn assemble_volume_mass(mesh: &TriMesh) -> Result<SymSparse> {
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * 9);
    for t in 0..mesh.num_triangles() {
        let area = mesh.signed_area(t);
        if area <= 0.0 {
            return Err(Error::Mesh(format!("degenerate triangle {t} (area {area:.3e})")));
        }
        let nodes = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { 2.0 } else { 1.0 };
                triplets.push((nodes[i], nodes[j], area / 12.0 * w));
            }
        }
    }
    Ok(SymSparse::from_triplets(mesh.num_vertices(), &triplets))
}

/// 1D periodic P1 mass and stiffness along the arc length of the boundary
/// polygon, indexed by boundary-loop position. `u^T (M + S) v` realizes the
/// H1 inner product on the closed curve.
pub fn assemble_boundary_h1(mesh: &TriMesh) -> Result<(SymSparse, SymSparse)> {
    let n = mesh.boundary_loop.len();
    let mut mass = Vec::with_capacity(n * 4);
    let mut stiff = Vec::with_capacity(n * 4);
    for i in 0..n {
        let j = (i + 1) % n;
        let pa = mesh.vertices[mesh.boundary_loop[i]];
        let pb = mesh.vertices[mesh.boundary_loop[j]];
        let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
        if len == 0.0 {
            return Err(Error::Mesh(format!("zero-length boundary segment at loop position {i}")));
        }
        mass.push((i, i, len / 3.0));
        mass.push((j, j, len / 3.0));
        mass.push((i, j, len / 6.0));
        mass.push((j, i, len / 6.0));
        stiff.push((i, i, 1.0 / len));
        stiff.push((j, j, 1.0 / len));
        stiff.push((i, j, -1.0 / len));
        stiff.push((j, i, -1.0 / len));
    }
    Ok((
        SymSparse::from_triplets(n, &mass),
        SymSparse::from_triplets(n, &stiff),
    ))
}

/// Load vector by the degree-2-exact 3-point edge-midpoint rule per triangle.
pub fn assemble_load(mesh: &TriMesh, f: &FieldExpr) -> Result<Vec<f64>> {
    let mut load = vec![0.0; mesh.num_vertices()];
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.triangles[t];
        let area = mesh.signed_area(t);
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        let pc = mesh.vertices[c];
        let mids = [
            [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0],
            [(pb[0] + pc[0]) / 2.0, (pb[1] + pc[1]) / 2.0],
            [(pc[0] + pa[0]) / 2.0, (pc[1] + pa[1]) / 2.0],
        ];
        let mut fv = [0.0; 3];
        for (k, m) in mids.iter().enumerate() {
            fv[k] = f.eval(m[0], m[1])?;
        }
        // basis value 1/2 on the two midpoints of edges meeting at the node
        load[a] += area / 3.0 * 0.5 * (fv[0] + fv[2]);
        load[b] += area / 3.0 * 0.5 * (fv[0] + fv[1]);
        load[c] += area / 3.0 * 0.5 * (fv[1] + fv[2]);
    }
    Ok(load)
}

/// Assembled operators and shared factorizations for one mesh level.
pub struct Forms {
    pub level: usize,
    pub num_vertices: usize,
    pub stiffness: SymSparse,
    pub mass: SymSparse,
    pub boundary_mass: SymSparse,
    pub boundary_stiffness: SymSparse,
    pub partition: DofPartition,
    /// Interior block of the stiffness matrix, re-indexed by interior position.
    pub a_interior: SymSparse,
    interior_pos: Vec<usize>,
    boundary_pos: Vec<usize>,
    boundary_chol: DenseChol,
}

const NO_POS: usize = usize::MAX;

impl Forms {
    pub fn assemble(mesh: &TriMesh) -> Result<Self> {
        let stiffness = assemble_volume_stiffness(mesh)?;
        let mass = assemble_volume_mass(mesh)?;
        let (boundary_mass, boundary_stiffness) = assemble_boundary_h1(mesh)?;
        let partition = DofPartition::build(mesh);

        let nv = mesh.num_vertices();
        let mut interior_pos = vec![NO_POS; nv];
        for (p, &i) in partition.interior.iter().enumerate() {
            interior_pos[i] = p;
        }
        let mut boundary_pos = vec![NO_POS; nv];
        for (p, &i) in partition.boundary.iter().enumerate() {
            boundary_pos[i] = p;
        }

        let a_interior = stiffness.submatrix(&partition.interior);

        let nb = partition.boundary.len();
        let mut bmat = boundary_mass.to_dense();
        for i in 0..nb {
            for k in boundary_stiffness.row_ptr[i]..boundary_stiffness.row_ptr[i + 1] {
                bmat[(i, boundary_stiffness.col_idx[k])] += boundary_stiffness.vals[k];
            }
        }
        let boundary_chol = DenseChol::factor(&bmat)?;

        Ok(Self {
            level: mesh.level,
            num_vertices: nv,
            stiffness,
            mass,
            boundary_mass,
            boundary_stiffness,
            partition,
            a_interior,
            interior_pos,
            boundary_pos,
            boundary_chol,
        })
    }

    pub fn interior_position(&self, vertex: usize) -> Option<usize> {
        let p = self.interior_pos[vertex];
        (p != NO_POS).then_some(p)
    }

    pub fn boundary_position(&self, vertex: usize) -> Option<usize> {
        let p = self.boundary_pos[vertex];
        (p != NO_POS).then_some(p)
    }

    /// Restrict a full vertex vector to interior positions.
    pub fn restrict_interior(&self, full: &[f64]) -> Vec<f64> {
        self.partition.interior.iter().map(|&i| full[i]).collect()
    }

    /// Restrict a full vertex vector to boundary-loop positions (the trace).
    pub fn trace(&self, full: &[f64]) -> Vec<f64> {
        self.partition.boundary.iter().map(|&i| full[i]).collect()
    }

    pub fn solve_interior(&self, rhs: &[f64]) -> Result<CgSolution> {
        solver::cg(&self.a_interior, rhs, solver::CG_TOL)
    }

    /// Solve (M_Gamma + S_Gamma) x = rhs through the shared factorization.
    pub fn solve_boundary(&self, rhs: &[f64]) -> Vec<f64> {
        self.boundary_chol.solve(rhs)
    }

    /// Apply M_Gamma + S_Gamma (the discrete H1(Gamma) Riesz map).
    pub fn apply_boundary_h1(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.boundary_mass.matvec(x);
        for (yi, si) in y.iter_mut().zip(self.boundary_stiffness.matvec(x)) {
            *yi += si;
        }
        y
    }

    /// Discrete harmonic extension: boundary values `g` (loop order), interior
    /// values from A_II u_I = -A_IB g.
    pub fn harmonic_extend(&self, g: &CoeffVec) -> Result<CoeffVec> {
        if g.space != DofSpace::Boundary || g.values.len() != self.partition.boundary.len() {
            return Err(Error::Mesh("harmonic_extend expects boundary trace coefficients".into()));
        }
        let mut full = vec![0.0; self.num_vertices];
        for (p, &i) in self.partition.boundary.iter().enumerate() {
            full[i] = g.values[p];
        }
        let coupled = self.stiffness.matvec(&full);
        let rhs: Vec<f64> = self.partition.interior.iter().map(|&i| -coupled[i]).collect();
        let sol = self.solve_interior(&rhs)?;
        for (p, &i) in self.partition.interior.iter().enumerate() {
            full[i] = sol.x[p];
        }
        Ok(CoeffVec::volume(self.level, full))
    }

    /// Homogeneous Dirichlet solve -Laplace(u0) = f, u0 = 0 on the boundary.
    pub fn solve_u0(&self, mesh: &TriMesh, f: &FieldExpr) -> Result<CoeffVec> {
        if mesh.level != self.level {
            return Err(Error::HierarchyMismatch("solve_u0 mesh level mismatch".into()));
        }
        let load = assemble_load(mesh, f)?;
        let rhs = self.restrict_interior(&load);
        let sol = self.solve_interior(&rhs)?;
        let mut full = vec![0.0; self.num_vertices];
        for (p, &i) in self.partition.interior.iter().enumerate() {
            full[i] = sol.x[p];
        }
        Ok(CoeffVec::volume(self.level, full))
    }

    /// Max interior residual of A u relative to |A|_inf |u|_inf; zero for a
    /// discrete harmonic function.
    pub fn interior_residual(&self, u: &CoeffVec) -> f64 {
        let au = self.stiffness.matvec(&u.values);
        let max_res = self
            .partition
            .interior
            .iter()
            .map(|&i| au[i].abs())
            .fold(0.0f64, f64::max);
        let scale = self.stiffness.inf_norm()
            * u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            max_res / scale
        } else {
            max_res
        }
    }
}
