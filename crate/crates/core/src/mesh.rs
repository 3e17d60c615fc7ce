//! Nested uniform triangulations of the experiment domains.
//!
//! Each refinement splits every triangle into four congruent children by
//! edge midpoints; the full hierarchy down to level 0 is retained so that
//! coefficient vectors can be prolonged exactly between levels. The boundary
//! is kept as a cyclically ordered vertex loop tracing the closed curve once.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const DEFAULT_MAX_LEVEL: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    UnitSquare,
    LShape,
    PolygonDisc { sides: usize },
}

impl DomainSpec {
    pub fn name(&self) -> String {
        match self {
            DomainSpec::UnitSquare => "unit_square".into(),
            DomainSpec::LShape => "l_shape".into(),
            DomainSpec::PolygonDisc { sides } => format!("polygon_disc_{sides}"),
        }
    }
}

/// Child-vertex provenance relative to the parent mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Same vertex as parent index.
    Old(usize),
    /// Midpoint of the parent edge (a, b).
    Midpoint(usize, usize),
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub level: usize,
    pub domain: DomainSpec,
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Cyclically ordered boundary vertex indices tracing the boundary once.
    pub boundary_loop: Vec<usize>,
    /// Level k-1 mesh; `None` at level 0.
    pub parent: Option<Box<TriMesh>>,
    /// Per-vertex provenance relative to the parent; `Old(i)` self-maps at level 0.
    pub provenance: Vec<Provenance>,
}

/// Which degrees of freedom a coefficient vector indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofSpace {
    /// One value per mesh vertex.
    Volume,
    /// One value per boundary-loop position.
    Boundary,
}

/// Finite element coefficient vector tied to one mesh level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec {
    pub level: usize,
    pub space: DofSpace,
    pub values: Vec<f64>,
}

impl CoeffVec {
    pub fn volume(level: usize, values: Vec<f64>) -> Self {
        Self { level, space: DofSpace::Volume, values }
    }

    pub fn boundary(level: usize, values: Vec<f64>) -> Self {
        Self { level, space: DofSpace::Boundary, values }
    }
}

pub fn generate(spec: DomainSpec, k: usize) -> Result<TriMesh> {
    generate_with_max(spec, k, DEFAULT_MAX_LEVEL)
}

pub fn generate_with_max(spec: DomainSpec, k: usize, max_level: usize) -> Result<TriMesh> {
    if k > max_level {
        return Err(Error::Mesh(format!(
            "refinement level {k} exceeds the configured maximum {max_level}"
        )));
    }
    let mut mesh = base_mesh(spec)?;
    for _ in 0..k {
        mesh = refine(mesh);
    }
    Ok(mesh)
}

fn base_mesh(spec: DomainSpec) -> Result<TriMesh> {
    let (vertices, triangles, boundary_loop): (Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<usize>) =
        match spec {
            DomainSpec::UnitSquare => (
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                vec![[0, 1, 2], [0, 2, 3]],
                vec![0, 1, 2, 3],
            ),
            DomainSpec::LShape => {
                // (-1,1)^2 minus the closed quadrant [0,1]x[-1,0]; the
                // reentrant corner sits at the origin.
                let v = vec![
                    [-1.0, -1.0],
                    [0.0, -1.0],
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [1.0, 1.0],
                    [0.0, 1.0],
                    [-1.0, 1.0],
                    [-1.0, 0.0],
                ];
                let t = vec![
                    [0, 1, 2],
                    [0, 2, 7],
                    [7, 2, 5],
                    [7, 5, 6],
                    [2, 3, 4],
                    [2, 4, 5],
                ];
                (v, t, vec![0, 1, 2, 3, 4, 5, 6, 7])
            }
            DomainSpec::PolygonDisc { sides } => {
                if sides < 3 {
                    return Err(Error::Mesh(format!(
                        "polygon_disc needs at least 3 sides, got {sides}"
                    )));
                }
                let mut v = vec![[0.0, 0.0]];
                for i in 0..sides {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
                    v.push([th.cos(), th.sin()]);
                }
                let t = (0..sides)
                    .map(|i| [0, 1 + i, 1 + (i + 1) % sides])
                    .collect();
                (v, t, (1..=sides).collect())
            }
        };
    let nv = vertices.len();
    Ok(TriMesh {
        level: 0,
        domain: spec,
        vertices,
        triangles,
        boundary_loop,
        parent: None,
        provenance: (0..nv).map(Provenance::Old).collect(),
    })
}

fn refine(parent: TriMesh) -> TriMesh {
    let nv = parent.vertices.len();
    let mut vertices = parent.vertices.clone();
    let mut provenance: Vec<Provenance> = (0..nv).map(Provenance::Old).collect();

    let boundary_edges: std::collections::HashSet<(usize, usize)> = parent
        .loop_edges()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    let project = matches!(parent.domain, DomainSpec::PolygonDisc { .. });

    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>, provenance: &mut Vec<Provenance>| {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let pa = vertices[a];
            let pb = vertices[b];
            let mut p = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            if project && boundary_edges.contains(&key) {
                // vertex-fitted polygonal approximation of the unit circle
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                p = [p[0] / r, p[1] / r];
            }
            vertices.push(p);
            provenance.push(Provenance::Midpoint(key.0, key.1));
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(parent.triangles.len() * 4);
    for &[a, b, c] in &parent.triangles {
        let mab = mid(a, b, &mut vertices, &mut provenance);
        let mbc = mid(b, c, &mut vertices, &mut provenance);
        let mca = mid(c, a, &mut vertices, &mut provenance);
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }

    let mut boundary_loop = Vec::with_capacity(parent.boundary_loop.len() * 2);
    for (a, b) in parent.loop_edges() {
        let key = (a.min(b), a.max(b));
        boundary_loop.push(a);
        boundary_loop.push(midpoints[&key]);
    }

    TriMesh {
        level: parent.level + 1,
        domain: parent.domain,
        vertices,
        triangles,
        boundary_loop,
        provenance,
        parent: Some(Box::new(parent)),
    }
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Barycentric coordinates of `p` in triangle (p0, p1, p2); sums to 1.
pub fn barycentric(p: [f64; 2], p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> [f64; 3] {
    let ax = p1[0] - p0[0];
    let ay = p1[1] - p0[1];
    let bx = p2[0] - p0[0];
    let by = p2[1] - p0[1];
    let cx = p[0] - p0[0];
    let cy = p[1] - p0[1];
    let det = ax * by - ay * bx;
    let beta = (cx * by - cy * bx) / det;
    let gamma = (ax * cy - ay * cx) / det;
    [1.0 - beta - gamma, beta, gamma]
}

pub const BARYCENTRIC_TOL: f64 = 1e-12;

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Consecutive boundary-loop vertex pairs, including the closing edge.
    pub fn loop_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.boundary_loop.len();
        (0..n).map(move |i| (self.boundary_loop[i], self.boundary_loop[(i + 1) % n]))
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        [
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
        ]
    }

    /// Triangle index and barycentric coordinates of `p`; ties on shared
    /// edges/vertices resolve to the lowest triangle index.
    pub fn locate(&self, p: [f64; 2]) -> Result<(usize, [f64; 3])> {
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let bary = barycentric(p, self.vertices[a], self.vertices[b], self.vertices[c]);
            if bary.iter().all(|&l| l >= -BARYCENTRIC_TOL) {
                return Ok((t, bary));
            }
        }
        let distance = (0..self.triangles.len())
            .map(|t| self.dist_to_triangle(p, t))
            .fold(f64::INFINITY, f64::min);
        Err(Error::OutsideDomain { x: p[0], y: p[1], distance })
    }

    fn dist_to_triangle(&self, p: [f64; 2], t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        let bary = barycentric(p, pa, pb, pc);
        if bary.iter().all(|&l| l >= 0.0) {
            return 0.0;
        }
        seg_dist(p, pa, pb)
            .min(seg_dist(p, pb, pc))
            .min(seg_dist(p, pc, pa))
    }

    /// Euclidean distance from `p` to the polygonal boundary loop.
    pub fn dist_to_boundary(&self, p: [f64; 2]) -> f64 {
        self.loop_edges()
            .map(|(a, b)| seg_dist(p, self.vertices[a], self.vertices[b]))
            .fold(f64::INFINITY, f64::min)
    }

    /// The level-`k` ancestor mesh, if `k <= self.level`.
    pub fn level_mesh(&self, k: usize) -> Option<&TriMesh> {
        let mut m = self;
        loop {
            if m.level == k {
                return Some(m);
            }
            match &m.parent {
                Some(p) if m.level > k => m = p,
                _ => return None,
            }
        }
    }

    /// Plain-text dump: "nv nt nb", vertex lines, triangle lines, loop indices.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} {}\n",
            self.num_vertices(),
            self.num_triangles(),
            self.boundary_loop.len()
        ));
        for v in &self.vertices {
            out.push_str(&format!("{:.17e} {:.17e}\n", v[0], v[1]));
        }
        for t in &self.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for b in &self.boundary_loop {
            out.push_str(&format!("{b}\n"));
        }
        out
    }
}

/// Piecewise-linear injection of a coarse coefficient vector onto a finer
/// mesh of the same hierarchy; exact for functions in the coarse space.
pub fn prolong(coarse: &CoeffVec, target: &TriMesh) -> Result<CoeffVec> {
    if coarse.space != DofSpace::Volume {
        return Err(Error::HierarchyMismatch(
            "prolong operates on volume coefficient vectors".into(),
        ));
    }
    if coarse.level > target.level {
        return Err(Error::HierarchyMismatch(format!(
            "cannot prolong level {} onto coarser level {}",
            coarse.level, target.level
        )));
    }
    // collect the chain coarse+1 ..= target.level
    let mut chain: Vec<&TriMesh> = Vec::new();
    let mut m = target;
    while m.level > coarse.level {
        chain.push(m);
        m = m
            .parent
            .as_deref()
            .ok_or_else(|| Error::HierarchyMismatch("missing parent mesh".into()))?;
    }
    if m.num_vertices() != coarse.values.len() {
        return Err(Error::HierarchyMismatch(format!(
            "coefficient length {} does not match level-{} vertex count {}",
            coarse.values.len(),
            m.level,
            m.num_vertices()
        )));
    }
    chain.reverse();
    let mut values = coarse.values.clone();
    for mesh in chain {
        let mut next = Vec::with_capacity(mesh.num_vertices());
        for prov in &mesh.provenance {
            next.push(match *prov {
                Provenance::Old(i) => values[i],
                Provenance::Midpoint(a, b) => 0.5 * (values[a] + values[b]),
            });
        }
        values = next;
    }
    Ok(CoeffVec::volume(target.level, values))
}
