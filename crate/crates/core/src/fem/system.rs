use crate::error::{param, Error, Result};
use crate::fem::{BoundaryFn, Conductivity, Field, InterfaceFn, RobinCoefficient};
use crate::mesh::{Curve, Mesh, GAUSS_POINTS};
use crate::sparse::{pcg_jacobi, CsrMatrix, SkylineCholesky};

/// Linear solver used for every solve against an assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Envelope Cholesky factorization, computed once at assembly.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    Pcg { rel_tol: f64, max_iter: usize },
}

impl LinearSolver {
    /// Conjugate gradients with relative residual `1e-12` and
    /// `20·(node count)` iterations.
    pub fn default_pcg(mesh: &Mesh) -> Self {
        LinearSolver::Pcg {
            rel_tol: 1e-12,
            max_iter: 20 * mesh.node_count(),
        }
    }
}

/// Stiffness part `∫ σ ∇u·∇w` of the bilinear form, precomputed for a
/// mesh and conductivity so that systems for many Robin coefficients can
/// be assembled cheaply.
#[derive(Debug, Clone)]
pub struct Discretization<'m> {
    mesh: &'m Mesh,
    sigma: Conductivity,
    stiffness: CsrMatrix,
    solver: LinearSolver,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh, sigma: Conductivity) -> Self {
        let mut triplets = Vec::with_capacity(9 * mesh.triangles().len() + 4 * mesh.interface().len());
        for tri in mesh.triangles() {
            let p = tri.nodes.map(|n| mesh.nodes()[n]);
            let area = mesh.signed_area(tri);
            // gradients of the barycentric coordinates, times 2·area
            let grads = [
                [p[1][1] - p[2][1], p[2][0] - p[1][0]],
                [p[2][1] - p[0][1], p[0][0] - p[2][0]],
                [p[0][1] - p[1][1], p[1][0] - p[0][0]],
            ];
            let scale = sigma.value(tri.region) / (4.0 * area);
            for a in 0..3 {
                for b in 0..3 {
                    let k = scale * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    triplets.push((tri.nodes[a], tri.nodes[b], k));
                }
            }
        }
        // reserve the interface couplings in the pattern
        for [p, q] in mesh.interface().edges() {
            for (r, c) in [(p, p), (p, q), (q, p), (q, q)] {
                triplets.push((r, c, 0.0));
            }
        }
        Discretization {
            mesh,
            sigma,
            stiffness: CsrMatrix::from_triplets(mesh.node_count(), &triplets),
            solver: LinearSolver::Direct,
        }
    }

    pub fn with_solver(mut self, solver: LinearSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn sigma(&self) -> Conductivity {
        self.sigma
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Adds `∫_Γ γ u w ds` (two-point Gauss per edge) and prepares the solver.
    pub fn system(&self, gamma: impl Into<RobinCoefficient>) -> Result<SparseSystem<'m>> {
        let gamma = gamma.into();
        let curve = self.mesh.interface();
        if gamma.edge_count() != curve.len() {
            return param(format!(
                "Robin coefficient has {} edges, the interface has {}",
                gamma.edge_count(),
                curve.len()
            ));
        }
        if !gamma.is_finite() {
            return param("Robin coefficient has non-finite values");
        }
        let min = gamma.min();
        if !(min > 0.0) {
            return Err(Error::Coercivity { min });
        }
        let mut matrix = self.stiffness.clone();
        for (e, [p, q]) in curve.edges().enumerate() {
            let local = weighted_edge_mass(curve.edge_lengths()[e], gamma.at_gauss(e));
            matrix.add_to(p, p, local[0][0]);
            matrix.add_to(p, q, local[0][1]);
            matrix.add_to(q, p, local[1][0]);
            matrix.add_to(q, q, local[1][1]);
        }
        let factor = match self.solver {
            LinearSolver::Direct => Some(SkylineCholesky::factor(&matrix)?),
            LinearSolver::Pcg { .. } => None,
        };
        Ok(SparseSystem {
            mesh: self.mesh,
            sigma: self.sigma,
            gamma,
            matrix,
            solver: self.solver,
            factor,
        })
    }
}

/// `∫_e w(s) φ_a φ_b ds` for the two hat functions of an edge, with the
/// weight given at the Gauss points.
#[inline]
pub(crate) fn weighted_edge_mass(length: f64, weight_at_gauss: [f64; 2]) -> [[f64; 2]; 2] {
    let mut local = [[0.0; 2]; 2];
    for (&xi, &w) in GAUSS_POINTS.iter().zip(&weight_at_gauss) {
        let phi = [1.0 - xi, xi];
        let jw = 0.5 * length * w;
        for a in 0..2 {
            for b in 0..2 {
                local[a][b] += jw * phi[a] * phi[b];
            }
        }
    }
    local
}

/// Assembled symmetric positive definite system `K(σ, γ)` together with its
/// solver state.
#[derive(Debug, Clone)]
pub struct SparseSystem<'m> {
    mesh: &'m Mesh,
    sigma: Conductivity,
    gamma: RobinCoefficient,
    matrix: CsrMatrix,
    solver: LinearSolver,
    factor: Option<SkylineCholesky>,
}

/// Assembles `K(σ, γ)` from scratch with the direct solver.
pub fn assemble_system<'m>(
    mesh: &'m Mesh,
    sigma: Conductivity,
    gamma: impl Into<RobinCoefficient>,
) -> Result<SparseSystem<'m>> {
    Discretization::new(mesh, sigma).system(gamma)
}

impl<'m> SparseSystem<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn sigma(&self) -> Conductivity {
        self.sigma
    }

    pub fn gamma(&self) -> &RobinCoefficient {
        &self.gamma
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves `K u = load` for an assembled load vector.
    pub fn solve_load(&self, load: &[f64]) -> Result<Field> {
        assert_eq!(load.len(), self.mesh.node_count());
        let values = match (&self.factor, self.solver) {
            (Some(factor), _) => factor.solve(load),
            (None, LinearSolver::Pcg { rel_tol, max_iter }) => {
                pcg_jacobi(&self.matrix, load, rel_tol, max_iter)?.solution
            }
            (None, LinearSolver::Direct) => unreachable!("direct systems carry a factor"),
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("solve produced non-finite values".into()));
        }
        Ok(Field::new(values))
    }

    /// State equation with boundary current `g`: `a(u, w) = ∫_∂Ω g w ds`.
    pub fn solve_forward(&self, g: &BoundaryFn) -> Result<Field> {
        g.check_len(self.mesh)?;
        self.solve_load(&curve_load(self.mesh, self.mesh.boundary(), g.values(), 1.0))
    }

    /// Adjoint equation `a(v, w) = −∫_∂Ω r w ds` for a boundary residual
    /// `r = u|_∂Ω − u_a`.
    pub fn solve_adjoint(&self, residual: &BoundaryFn) -> Result<Field> {
        residual.check_len(self.mesh)?;
        self.solve_load(&curve_load(self.mesh, self.mesh.boundary(), residual.values(), -1.0))
    }

    /// Interface source problem `a(v, w) = ∫_Γ f w ds`.
    pub fn solve_interface_source(&self, f: &InterfaceFn) -> Result<Field> {
        f.check_len(self.mesh)?;
        self.solve_load(&curve_load(self.mesh, self.mesh.interface(), f.values(), 1.0))
    }

    /// `uᵀ K u`, the energy `a(u, u)`.
    pub fn energy(&self, u: &Field) -> f64 {
        let ku = self.matrix.mul_vec(u.values());
        u.values().iter().zip(&ku).map(|(a, b)| a * b).sum()
    }

    /// `∫_Γ w(γ) u v ds` evaluated with the same two-point rule as the
    /// system matrix, for a pointwise weight `w` of the Robin coefficient.
    pub fn interface_weighted_product(&self, u: &InterfaceFn, v: &InterfaceFn, weight: impl Fn(f64) -> f64) -> f64 {
        let curve = self.mesh.interface();
        let (u, v) = (u.values(), v.values());
        let mut sum = 0.0;
        for e in 0..curve.len() {
            let (i, j) = curve.edge_vertices(e);
            let gamma = self.gamma.at_gauss(e);
            for (k, &xi) in GAUSS_POINTS.iter().enumerate() {
                let uq = (1.0 - xi) * u[i] + xi * u[j];
                let vq = (1.0 - xi) * v[i] + xi * v[j];
                sum += 0.5 * curve.edge_lengths()[e] * weight(gamma[k]) * uq * vq;
            }
        }
        sum
    }
}

/// Embeds `∫_curve f w ds` into a global load vector (scaled by `sign`).
fn curve_load(mesh: &Mesh, curve: &Curve, f: &[f64], sign: f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.node_count()];
    for (local, &node) in curve.mass_apply(f).iter().zip(curve.nodes()) {
        load[node] += sign * local;
    }
    load
}

/// Restriction of a field to the interface vertices.
pub fn trace_interface(mesh: &Mesh, u: &Field) -> Result<InterfaceFn> {
    u.check_len(mesh)?;
    Ok(InterfaceFn::new(
        mesh.interface().nodes().iter().map(|&n| u.values()[n]).collect(),
    ))
}

/// Restriction of a field to the boundary vertices.
pub fn trace_boundary(mesh: &Mesh, u: &Field) -> Result<BoundaryFn> {
    u.check_len(mesh)?;
    Ok(BoundaryFn::new(
        mesh.boundary().nodes().iter().map(|&n| u.values()[n]).collect(),
    ))
}

/// `∫_Γ f₁ f₂ ds` for piecewise-linear functions on the interface polygon.
pub fn interface_l2(mesh: &Mesh, f1: &InterfaceFn, f2: &InterfaceFn) -> Result<f64> {
    f1.check_len(mesh)?;
    f2.check_len(mesh)?;
    Ok(mesh.interface().inner(f1.values(), f2.values()))
}

/// `∫_∂Ω f₁ f₂ ds` for piecewise-linear functions on the boundary polygon.
pub fn boundary_l2(mesh: &Mesh, f1: &BoundaryFn, f2: &BoundaryFn) -> Result<f64> {
    f1.check_len(mesh)?;
    f2.check_len(mesh)?;
    Ok(mesh.boundary().inner(f1.values(), f2.values()))
}
