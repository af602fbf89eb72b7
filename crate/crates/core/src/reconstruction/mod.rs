//! Output least-squares recovery of the Robin coefficient from boundary
//! measurements: synthetic data, multiplicative noise, the cost functional,
//! its adjoint gradient and a BFGS driver.
//!
//! ```text
//! J(γ) = ½ Σ_k ∫_∂Ω (u_k(γ) − u_a,k)² ds + (λ/2) ∫_Γ γ² ds
//! DJ(γ; γ̂) = Σ_k ∫_Γ γ̂ u_k v_k ds + λ ∫_Γ γ γ̂ ds
//! ```
//!
//! where `v_k` solves the adjoint problem with load `−(u_k − u_a,k)` on ∂Ω.

mod bfgs;

pub use bfgs::{bfgs_minimize, BfgsOptions, BfgsRecord, BfgsState, BfgsStatus};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::fem::{trace_boundary, trace_interface, BoundaryFn, Discretization, InterfaceFn};
use crate::mesh::GAUSS_POINTS;

/// Boundary currents and the corresponding (possibly noisy) voltages.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub fluxes: Vec<BoundaryFn>,
    pub measurements: Vec<BoundaryFn>,
    pub noise_level: f64,
    pub seed: Option<u64>,
}

impl DataSet {
    pub fn new(fluxes: Vec<BoundaryFn>, measurements: Vec<BoundaryFn>) -> Result<Self> {
        if fluxes.len() != measurements.len() {
            return param(format!(
                "{} fluxes but {} measurements",
                fluxes.len(),
                measurements.len()
            ));
        }
        if fluxes.is_empty() {
            return param("data set needs at least one flux");
        }
        if measurements.iter().any(|m| !m.is_finite()) {
            return param("measurements contain non-finite values");
        }
        Ok(DataSet {
            fluxes,
            measurements,
            noise_level: 0.0,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.fluxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fluxes.is_empty()
    }
}

/// Noise-free data: one forward solve per flux under `gamma_true`.
pub fn synthesize_data(
    discretization: &Discretization<'_>,
    gamma_true: &InterfaceFn,
    fluxes: &[BoundaryFn],
) -> Result<DataSet> {
    let system = discretization.system(gamma_true)?;
    let mesh = discretization.mesh();
    let measurements = fluxes
        .iter()
        .map(|g| trace_boundary(mesh, &system.solve_forward(g)?))
        .collect::<Result<Vec<_>>>()?;
    DataSet::new(fluxes.to_vec(), measurements)
}

/// Replaces every measured value `u` by `u·(1 + ε δ)` with independent
/// standard normal `δ`, drawn from a generator seeded with `seed`.
pub fn add_noise(data: &DataSet, eps: f64, seed: u64) -> Result<DataSet> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return param(format!("noise level must be non-negative, got {eps}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measurements = data
        .measurements
        .iter()
        .map(|m| {
            BoundaryFn::new(
                m.values()
                    .iter()
                    .map(|&u| {
                        let delta: f64 = StandardNormal.sample(&mut rng);
                        u * (1.0 + eps * delta)
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(DataSet {
        fluxes: data.fluxes.clone(),
        measurements,
        noise_level: eps,
        seed: Some(seed),
    })
}

/// `J(γ)`.
pub fn cost(discretization: &Discretization<'_>, gamma: &InterfaceFn, data: &DataSet, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let system = discretization.system(gamma)?;
    let mesh = discretization.mesh();
    let boundary = mesh.boundary();
    let mut misfit = 0.0;
    for (g, ua) in data.fluxes.iter().zip(&data.measurements) {
        let u = trace_boundary(mesh, &system.solve_forward(g)?)?;
        let r = u.add_scaled(-1.0, ua);
        misfit += boundary.inner(r.values(), r.values());
    }
    Ok(0.5 * misfit + 0.5 * lambda * mesh.interface().inner(gamma.values(), gamma.values()))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return param(format!("regularization parameter must be non-negative, got {lambda}"));
    }
    Ok(())
}

/// Cost, the load `ℓ_i = DJ(γ; φ_i)` of the derivative on the interface
/// hat functions, and its `L²(Γ)` Riesz representer.
#[derive(Debug, Clone)]
pub struct CostGradient {
    pub cost: f64,
    pub load: Vec<f64>,
    pub gradient: InterfaceFn,
}

/// `J(γ)` together with the gradient in one sweep of forward and adjoint
/// solves (the fluxes run in parallel).
pub fn cost_and_gradient(
    discretization: &Discretization<'_>,
    gamma: &InterfaceFn,
    data: &DataSet,
    lambda: f64,
) -> Result<CostGradient> {
    check_lambda(lambda)?;
    let system = discretization.system(gamma)?;
    let mesh = discretization.mesh();
    let curve = mesh.interface();
    let n = curve.len();

    let per_flux: Vec<(f64, Vec<f64>)> = data
        .fluxes
        .par_iter()
        .zip(&data.measurements)
        .map(|(g, ua)| {
            let u = system.solve_forward(g)?;
            let r = trace_boundary(mesh, &u)?.add_scaled(-1.0, ua);
            let misfit = mesh.boundary().inner(r.values(), r.values());
            let v = system.solve_adjoint(&r)?;
            let (ut, vt) = (trace_interface(mesh, &u)?, trace_interface(mesh, &v)?);
            let (ut, vt) = (ut.values(), vt.values());
            let mut load = vec![0.0; n];
            for e in 0..n {
                let (i, j) = curve.edge_vertices(e);
                let half = 0.5 * curve.edge_lengths()[e];
                for &xi in &GAUSS_POINTS {
                    let uq = (1.0 - xi) * ut[i] + xi * ut[j];
                    let vq = (1.0 - xi) * vt[i] + xi * vt[j];
                    load[i] += half * (1.0 - xi) * uq * vq;
                    load[j] += half * xi * uq * vq;
                }
            }
            Ok((misfit, load))
        })
        .collect::<Result<_>>()?;

    let mut misfit = 0.0;
    let mut load = vec![0.0; n];
    for (m, l) in per_flux {
        misfit += m;
        load.iter_mut().zip(&l).for_each(|(a, b)| *a += b);
    }
    if lambda > 0.0 {
        let reg = curve.mass_apply(gamma.values());
        load.iter_mut().zip(&reg).for_each(|(a, b)| *a += lambda * b);
    }
    let cost = 0.5 * misfit + 0.5 * lambda * curve.inner(gamma.values(), gamma.values());
    let gradient = InterfaceFn::new(curve.mass_solve(&load));
    Ok(CostGradient { cost, load, gradient })
}

/// Riesz representer of `DJ(γ; ·)` in `L²(Γ)`: the piecewise-linear `R`
/// with `∫_Γ R γ̂ ds = DJ(γ; γ̂)` for every piecewise-linear `γ̂`.
pub fn gradient(
    discretization: &Discretization<'_>,
    gamma: &InterfaceFn,
    data: &DataSet,
    lambda: f64,
) -> Result<InterfaceFn> {
    Ok(cost_and_gradient(discretization, gamma, data, lambda)?.gradient)
}

/// Relative `L²(Γ)` distance `‖γ − γ_ref‖ / ‖γ_ref‖`.
pub fn relative_l2_error(discretization: &Discretization<'_>, gamma: &InterfaceFn, reference: &InterfaceFn) -> f64 {
    let curve = discretization.mesh().interface();
    let diff = gamma.add_scaled(-1.0, reference);
    curve.norm(diff.values()) / curve.norm(reference.values())
}
