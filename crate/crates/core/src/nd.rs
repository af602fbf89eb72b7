//! Discrete Neumann-to-Dirichlet map, its Galerkin form in a trigonometric
//! basis, and the monotonicity and Alessandrini checks built on it.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::fem::{trace_boundary, trace_interface, BoundaryFn, SparseSystem};
use crate::mesh::{Curve, Mesh, GAUSS_POINTS};

/// `Λ(γ) g = u|_∂Ω`.
pub fn apply_nd(system: &SparseSystem<'_>, g: &BoundaryFn) -> Result<BoundaryFn> {
    trace_boundary(system.mesh(), &system.solve_forward(g)?)
}

/// `∫_∂Ω h Λ(γ) g ds`.
pub fn nd_pairing(system: &SparseSystem<'_>, h: &BoundaryFn, g: &BoundaryFn) -> Result<f64> {
    let lg = apply_nd(system, g)?;
    h.check_len(system.mesh())?;
    Ok(system.mesh().boundary().inner(h.values(), lg.values()))
}

/// Symmetric Galerkin matrix of `g ↦ ∫_∂Ω g Λ(γ) g ds` on the span of
/// `{1, cos kθ, sin kθ : k = 1..n_modes}`, orthonormalized in the discrete
/// boundary mass inner product.
#[derive(Debug, Clone)]
pub struct NdForm {
    n_modes: usize,
    basis: Vec<Vec<f64>>,
    matrix: DMatrix<f64>,
}

impl NdForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthonormal basis functions as nodal values on ∂Ω, in the order
    /// `1, cos θ, sin θ, cos 2θ, …`.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |F_ij − F_ji| / max |F_ij|`.
    pub fn symmetry_residual(&self) -> f64 {
        let scale = self.matrix.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }

    /// Spectral norm of the (symmetrized) matrix.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = extreme_eigenvalues(&self.matrix);
        lo.abs().max(hi.abs())
    }

    fn check_compatible(&self, other: &NdForm) -> Result<()> {
        if self.n_modes != other.n_modes || self.basis != other.basis {
            return param("Galerkin forms use different bases");
        }
        Ok(())
    }
}

/// Orthonormal trigonometric basis on a boundary curve.
fn trig_basis(curve: &Curve, n_modes: usize) -> Result<Vec<Vec<f64>>> {
    let dim = 2 * n_modes + 1;
    if n_modes == 0 {
        return param("n_modes must be positive");
    }
    if dim > curve.len() {
        return param(format!(
            "2·n_modes+1 = {dim} exceeds the {} boundary nodes",
            curve.len()
        ));
    }
    let mut raw = Vec::with_capacity(dim);
    raw.push(vec![1.0; curve.len()]);
    for k in 1..=n_modes {
        let k = k as f64;
        raw.push(curve.angles().iter().map(|t| (k * t).cos()).collect());
        raw.push(curve.angles().iter().map(|t| (k * t).sin()).collect());
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for (i, mut v) in raw.into_iter().enumerate() {
        let original = curve.norm(&v);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = curve.inner(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = curve.norm(&v);
        if !(n > 1e-10 * original) {
            return param(format!("trigonometric basis is rank deficient at function {i}"));
        }
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    Ok(basis)
}

/// One forward solve per basis function; `F_ij = ⟨b_i, Λ(γ) b_j⟩_∂Ω`.
pub fn nd_form_matrix(system: &SparseSystem<'_>, n_modes: usize) -> Result<NdForm> {
    let curve = system.mesh().boundary();
    let basis = trig_basis(curve, n_modes)?;
    let images: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|b| apply_nd(system, &BoundaryFn::new(b.clone())).map(|u| u.into_values()))
        .collect::<Result<_>>()?;
    let dim = basis.len();
    let matrix = DMatrix::from_fn(dim, dim, |i, j| curve.inner(&basis[i], &images[j]));
    Ok(NdForm { n_modes, basis, matrix })
}

fn extreme_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    (eig.min(), eig.max())
}

/// Galerkin surrogate of `‖Λ(γ₁) − Λ(γ₂)‖_*`: the spectral radius of
/// `F₁ − F₂`. It is a lower bound of the operator norm that grows with the
/// number of modes.
pub fn operator_norm_diff(f1: &NdForm, f2: &NdForm) -> Result<f64> {
    f1.check_compatible(f2)?;
    let (lo, hi) = extreme_eigenvalues(&(&f1.matrix - &f2.matrix));
    Ok(lo.abs().max(hi.abs()))
}

/// Result of a quadratic-form monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityCheck {
    /// Smallest eigenvalue of `F(γ₁) − F(γ₂)`.
    pub lambda_min: f64,
    /// `‖F(γ₁)‖`.
    pub scale: f64,
    pub passed: bool,
}

/// Relative tolerance on `λ_min` for [`check_monotonicity`].
pub const MONOTONICITY_TOL: f64 = 1e-8;

/// Checks `Λ(γ₁) ≥ Λ(γ₂)` as quadratic forms on the Galerkin space, for
/// `γ₁ ≤ γ₂` pointwise.
pub fn check_monotonicity(
    system1: &SparseSystem<'_>,
    system2: &SparseSystem<'_>,
    n_modes: usize,
) -> Result<MonotonicityCheck> {
    same_setting(system1, system2)?;
    if !system1.gamma().is_below(system2.gamma()) {
        return param("monotonicity check needs gamma1 <= gamma2 pointwise");
    }
    let f1 = nd_form_matrix(system1, n_modes)?;
    let f2 = nd_form_matrix(system2, n_modes)?;
    let (lambda_min, _) = extreme_eigenvalues(&(f1.matrix() - f2.matrix()));
    let scale = f1.norm();
    Ok(MonotonicityCheck {
        lambda_min,
        scale,
        passed: lambda_min >= -MONOTONICITY_TOL * scale,
    })
}

fn same_setting(system1: &SparseSystem<'_>, system2: &SparseSystem<'_>) -> Result<()> {
    if !std::ptr::eq(system1.mesh(), system2.mesh()) && system1.mesh() != system2.mesh() {
        return param("systems are assembled on different meshes");
    }
    if system1.sigma() != system2.sigma() {
        return param("systems use different conductivities");
    }
    Ok(())
}

/// Sums `½·|e|·f(e, q, ξ_q)` over the two Gauss points of every interface
/// edge.
fn interface_gauss_sum(curve: &Curve, mut f: impl FnMut(usize, usize, f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for e in 0..curve.len() {
        let half = 0.5 * curve.edge_lengths()[e];
        for (q, &xi) in GAUSS_POINTS.iter().enumerate() {
            sum += half * f(e, q, xi);
        }
    }
    sum
}

fn interpolate(curve: &Curve, v: &[f64], e: usize, xi: f64) -> f64 {
    let (i, j) = curve.edge_vertices(e);
    (1.0 - xi) * v[i] + xi * v[j]
}

/// The three terms of the two-sided monotonicity estimate for a single
/// current `g`:
///
/// ```text
/// lhs = ∫_Γ (γ₁ − γ₂) u₂² ds
/// mid = ∫_∂Ω g (Λ(γ₂) − Λ(γ₁)) g ds
/// rhs = ∫_Γ (γ₂ − γ₂²/γ₁) u₂² ds
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityEstimate {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
}

impl MonotonicityEstimate {
    /// `lhs ≥ mid ≥ rhs` up to `rel_slack` times the largest magnitude.
    pub fn holds(&self, rel_slack: f64) -> bool {
        let slack = rel_slack * self.lhs.abs().max(self.mid.abs()).max(self.rhs.abs());
        self.lhs >= self.mid - slack && self.mid >= self.rhs - slack
    }
}

pub fn monotonicity_estimate_check(
    system1: &SparseSystem<'_>,
    system2: &SparseSystem<'_>,
    g: &BoundaryFn,
) -> Result<MonotonicityEstimate> {
    same_setting(system1, system2)?;
    let mesh = system1.mesh();
    let u1 = system1.solve_forward(g)?;
    let u2 = system2.solve_forward(g)?;
    let boundary = mesh.boundary();
    let mid = boundary.inner(g.values(), trace_boundary(mesh, &u2)?.values())
        - boundary.inner(g.values(), trace_boundary(mesh, &u1)?.values());

    let curve = mesh.interface();
    let t2 = trace_interface(mesh, &u2)?;
    let (g1, g2) = (system1.gamma(), system2.gamma());
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for e in 0..curve.len() {
        let half = 0.5 * curve.edge_lengths()[e];
        for (q, &xi) in GAUSS_POINTS.iter().enumerate() {
            let a = g1.at_gauss(e)[q];
            let b = g2.at_gauss(e)[q];
            let u = interpolate(curve, t2.values(), e, xi);
            lhs += half * (a - b) * u * u;
            rhs += half * (b - b * b / a) * u * u;
        }
    }
    Ok(MonotonicityEstimate { lhs, mid, rhs })
}

/// Relative residual of the Alessandrini identity
///
/// ```text
/// ∫_∂Ω h (Λ(γ₂) − Λ(γ₁)) g ds = ∫_Γ (γ₁ − γ₂) u₁ʰ u₂ᵍ ds
/// ```
///
/// scaled by `‖h‖ (‖Λ(γ₁)g‖ + ‖Λ(γ₂)g‖)`. Zero when both sides vanish.
pub fn alessandrini_residual(
    system1: &SparseSystem<'_>,
    system2: &SparseSystem<'_>,
    g: &BoundaryFn,
    h: &BoundaryFn,
) -> Result<f64> {
    same_setting(system1, system2)?;
    let mesh = system1.mesh();
    h.check_len(mesh)?;
    let u2g = system2.solve_forward(g)?;
    let u1g = system1.solve_forward(g)?;
    let u1h = system1.solve_forward(h)?;
    let b1 = trace_boundary(mesh, &u1g)?;
    let b2 = trace_boundary(mesh, &u2g)?;
    let boundary = mesh.boundary();
    let left = boundary.inner(h.values(), b2.values()) - boundary.inner(h.values(), b1.values());

    let curve = mesh.interface();
    let t1 = trace_interface(mesh, &u1h)?;
    let t2 = trace_interface(mesh, &u2g)?;
    let (g1, g2) = (system1.gamma(), system2.gamma());
    let right = interface_gauss_sum(curve, |e, q, xi| {
        (g1.at_gauss(e)[q] - g2.at_gauss(e)[q])
            * interpolate(curve, t1.values(), e, xi)
            * interpolate(curve, t2.values(), e, xi)
    });

    let scale = boundary.norm(h.values()) * (boundary.norm(b1.values()) + boundary.norm(b2.values()));
    if scale == 0.0 {
        return Ok((left - right).abs());
    }
    Ok((left - right).abs() / scale)
}

/// Relative self-adjointness defect `|⟨h, Λg⟩ − ⟨g, Λh⟩| / (‖g‖‖Λh‖ + ‖h‖‖Λg‖)`.
pub fn self_adjointness_residual(system: &SparseSystem<'_>, g: &BoundaryFn, h: &BoundaryFn) -> Result<f64> {
    let mesh: &Mesh = system.mesh();
    let lg = apply_nd(system, g)?;
    let lh = apply_nd(system, h)?;
    let b = mesh.boundary();
    let hg = b.inner(h.values(), lg.values());
    let gh = b.inner(g.values(), lh.values());
    let scale = b.norm(g.values()) * b.norm(lh.values()) + b.norm(h.values()) * b.norm(lg.values());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((hg - gh).abs() / scale)
}

/// `⟨Λ(γ) g_i, g_i⟩` for `g_i = sin(iθ)`, `i = 1..=count`.
pub fn sine_probe_diagonal(system: &SparseSystem<'_>, count: usize) -> Result<Vec<f64>> {
    let mesh = system.mesh();
    (1..=count)
        .into_par_iter()
        .map(|i| {
            let g = BoundaryFn::from_angle_fn(mesh, |t| (i as f64 * t).sin());
            nd_pairing(system, &g, &g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{analytic_concentric_oracle, assemble_system, Conductivity, Discretization, InterfaceFn};
    use crate::mesh::generate_disk_mesh;

    #[test]
    fn basis_is_orthonormal() {
        let mesh = generate_disk_mesh(1, 1, 32).unwrap();
        let basis = trig_basis(mesh.boundary(), 8).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((mesh.boundary().inner(a, b) - expect).abs() < 1e-10);
            }
        }
        assert!(trig_basis(mesh.boundary(), 16).is_err());
        assert!(trig_basis(mesh.boundary(), 0).is_err());
    }

    #[test]
    fn constant_gamma_form_is_nearly_diagonal() {
        let mesh = generate_disk_mesh(4, 4, 64).unwrap();
        let sigma = Conductivity::default();
        let sys = assemble_system(&mesh, sigma, InterfaceFn::constant(&mesh, 1.5)).unwrap();
        let form = nd_form_matrix(&sys, 4).unwrap();
        assert!(form.symmetry_residual() < 1e-10);
        let m = form.matrix();
        for i in 0..form.dim() {
            for j in 0..form.dim() {
                if i != j {
                    assert!(m[(i, j)].abs() < 1e-3 * m[(0, 0)], "({i},{j}) {}", m[(i, j)]);
                }
            }
        }
        // mode k appears at positions 2k-1 and 2k
        for k in 0..=4u32 {
            let exact = analytic_concentric_oracle(sigma, 1.5, k).unwrap().boundary_factor();
            let pos = if k == 0 { 0 } else { 2 * k as usize - 1 };
            let rel = (m[(pos, pos)] - exact).abs() / exact;
            assert!(rel < 5e-2, "mode {k}: {rel}");
        }
    }

    #[test]
    fn identical_forms_have_zero_distance() {
        let mesh = generate_disk_mesh(2, 2, 32).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let f = nd_form_matrix(&sys, 3).unwrap();
        assert_eq!(operator_norm_diff(&f, &f).unwrap(), 0.0);
        let other = nd_form_matrix(&sys, 4).unwrap();
        assert!(operator_norm_diff(&f, &other).is_err());
    }

    #[test]
    fn monotonicity_rejects_unordered_pair() {
        let mesh = generate_disk_mesh(2, 2, 32).unwrap();
        let disc = Discretization::new(&mesh, Conductivity::default());
        let s1 = disc.system(InterfaceFn::constant(&mesh, 2.0)).unwrap();
        let s2 = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
        assert!(check_monotonicity(&s1, &s2, 3).is_err());
        let ok = check_monotonicity(&s2, &s1, 3).unwrap();
        assert!(ok.passed && ok.lambda_min > 0.0);
        let same = check_monotonicity(&s2, &s2, 3).unwrap();
        assert!(same.lambda_min.abs() < 1e-12);
    }

    #[test]
    fn equal_coefficients_give_zero_estimate() {
        let mesh = generate_disk_mesh(2, 2, 32).unwrap();
        let disc = Discretization::new(&mesh, Conductivity::default());
        let s = disc
            .system(InterfaceFn::from_angle_fn(&mesh, |t| 1.0 + 0.3 * t.cos()))
            .unwrap();
        let g = BoundaryFn::from_angle_fn(&mesh, |t| t.cos());
        let est = monotonicity_estimate_check(&s, &s, &g).unwrap();
        assert_eq!((est.lhs, est.mid), (0.0, 0.0));
        assert!(est.rhs.abs() < 1e-16);
        assert_eq!(alessandrini_residual(&s, &s, &g, &g).unwrap(), 0.0);
    }

    #[test]
    fn estimate_chain_for_constant_pair() {
        let mesh = generate_disk_mesh(3, 3, 32).unwrap();
        let disc = Discretization::new(&mesh, Conductivity::default());
        let s1 = disc.system(InterfaceFn::constant(&mesh, 2.0)).unwrap();
        let s2 = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let g = BoundaryFn::from_angle_fn(&mesh, |t| t.cos());
        let est = monotonicity_estimate_check(&s1, &s2, &g).unwrap();
        assert!(est.holds(1e-8), "{est:?}");
        assert!(est.lhs > 0.0);
    }

    #[test]
    fn alessandrini_identity_for_constant_pair() {
        let mesh = generate_disk_mesh(3, 3, 32).unwrap();
        let disc = Discretization::new(&mesh, Conductivity::default());
        let s1 = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let s2 = disc.system(InterfaceFn::constant(&mesh, 2.0)).unwrap();
        let g = BoundaryFn::from_angle_fn(&mesh, |t| t.cos());
        let h = BoundaryFn::from_angle_fn(&mesh, |t| t.sin());
        assert!(alessandrini_residual(&s1, &s2, &g, &h).unwrap() <= 1e-10);
    }

    #[test]
    fn nd_is_linear() {
        let mesh = generate_disk_mesh(2, 2, 16).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let g = BoundaryFn::from_angle_fn(&mesh, |t| (3.0 * t).cos());
        let a = apply_nd(&sys, &g.scaled(2.5)).unwrap();
        let b = apply_nd(&sys, &g).unwrap().scaled(2.5);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-13 * (1.0 + y.abs()));
        }
    }
}
