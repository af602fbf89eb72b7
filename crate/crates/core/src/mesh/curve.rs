use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Reference coordinates of the two-point Gauss rule on `[0, 1]`; each
/// point carries weight one half. Exact for cubic integrands.
pub const GAUSS_POINTS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Closed polygon made of mesh edges, e.g. the interface Γ or the boundary ∂Ω.
///
/// Edge `e` joins local vertex `e` to local vertex `(e + 1) % len`. Functions
/// on the curve are stored as one value per local vertex and are understood
/// as piecewise linear along the polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    nodes: Vec<usize>,
    angles: Vec<f64>,
    lengths: Vec<f64>,
}

impl Curve {
    pub(crate) fn with_angles(coords: &[[f64; 2]], nodes: Vec<usize>, angles: Vec<f64>) -> Self {
        let n = nodes.len();
        let lengths = (0..n)
            .map(|e| {
                let p = coords[nodes[e]];
                let q = coords[nodes[(e + 1) % n]];
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .collect();
        Curve { nodes, angles, lengths }
    }

    pub(crate) fn from_edges(coords: &[[f64; 2]], edges: &[[usize; 2]]) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::MeshFormat("a closed curve needs at least 3 edges".into()));
        }
        let mut nodes = Vec::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            let next = edges[(e + 1) % edges.len()];
            if edge[1] != next[0] {
                return Err(Error::MeshFormat(format!(
                    "edges {e} and {} are not consecutive in a closed cycle",
                    (e + 1) % edges.len()
                )));
            }
            if edge[0] >= coords.len() {
                return Err(Error::MeshFormat(format!("edge {e} references a missing node")));
            }
            nodes.push(edge[0]);
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != nodes.len() {
            return Err(Error::MeshFormat("curve visits a node twice".into()));
        }
        let angles = nodes
            .iter()
            .map(|&n| coords[n][1].atan2(coords[n][0]).rem_euclid(TAU))
            .collect();
        Ok(Self::with_angles(coords, nodes, angles))
    }

    /// Number of vertices (equal to the number of edges).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Global mesh node index of every local vertex, in cyclic order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Local vertex indices of edge `e`.
    #[inline]
    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        (e, (e + 1) % self.nodes.len())
    }

    /// Edges as pairs of global node indices.
    pub fn edges(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        (0..self.len()).map(move |e| {
            let (i, j) = self.edge_vertices(e);
            [self.nodes[i], self.nodes[j]]
        })
    }

    /// Product with the P1 mass matrix of the polygon.
    pub fn mass_apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len());
        let mut out = vec![0.0; v.len()];
        for (e, &l) in self.lengths.iter().enumerate() {
            let (i, j) = self.edge_vertices(e);
            out[i] += l * (2.0 * v[i] + v[j]) / 6.0;
            out[j] += l * (v[i] + 2.0 * v[j]) / 6.0;
        }
        out
    }

    /// L² inner product of two piecewise-linear functions on the polygon.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), self.len());
        assert_eq!(b.len(), self.len());
        let mut sum = 0.0;
        for (e, &l) in self.lengths.iter().enumerate() {
            let (i, j) = self.edge_vertices(e);
            sum += l * (2.0 * a[i] * b[i] + a[i] * b[j] + a[j] * b[i] + 2.0 * a[j] * b[j]) / 6.0;
        }
        sum
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// `∫ v² ds` over a single edge.
    #[inline]
    pub fn edge_square_integral(&self, v: &[f64], e: usize) -> f64 {
        let (i, j) = self.edge_vertices(e);
        self.lengths[e] * (v[i] * v[i] + v[i] * v[j] + v[j] * v[j]) / 3.0
    }

    /// Solves `M x = rhs` with the cyclic tridiagonal P1 mass matrix.
    pub fn mass_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let l = &self.lengths;
        let diag: Vec<f64> = (0..n).map(|i| (l[(i + n - 1) % n] + l[i]) / 3.0).collect();
        // off[i] couples i and i+1; the corner couples n-1 and 0
        let off: Vec<f64> = (0..n - 1).map(|i| l[i] / 6.0).collect();
        let corner = l[n - 1] / 6.0;

        // Sherman-Morrison on the cyclic corner
        let shift = -diag[0];
        let mut d = diag.clone();
        d[0] -= shift;
        d[n - 1] -= corner * corner / shift;
        let x = tridiagonal_solve(&off, &d, rhs);
        let mut u = vec![0.0; n];
        u[0] = shift;
        u[n - 1] = corner;
        let z = tridiagonal_solve(&off, &d, &u);
        let fact = (x[0] + corner * x[n - 1] / shift) / (1.0 + z[0] + corner * z[n - 1] / shift);
        x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
    }
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn tridiagonal_solve(off: &[f64], diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = off[i - 1] / beta;
        beta = diag[i] - off[i - 1] * c[i];
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}
