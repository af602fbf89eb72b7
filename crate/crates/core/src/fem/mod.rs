//! P1 finite elements for the two-layer transmission problem with a Robin
//! interface condition.
//!
//! The discrete problem finds `u` in the continuous P1 space with
//!
//! ```text
//! ∫_Ω σ ∇u·∇w dx + ∫_Γ γ u w ds = ℓ(w)   for every P1 test function w,
//! ```
//!
//! where the load `ℓ` is a boundary current (`∫_∂Ω g w ds`), an adjoint
//! residual (`-∫_∂Ω r w ds`) or an interface source (`∫_Γ f w ds`).

mod functions;
mod oracle;
mod system;

pub use functions::{BoundaryFn, Field, InterfaceFn, RobinCoefficient};
pub use oracle::{analytic_concentric_oracle, ConcentricSolution};
pub use system::{
    assemble_system, boundary_l2, interface_l2, trace_boundary, trace_interface, Discretization, LinearSolver,
    SparseSystem,
};

use crate::error::{param, Result};

/// Piecewise-constant conductivity `σ₁` on the inner disk and `σ₂` on the
/// outer annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductivity {
    pub inner: f64,
    pub outer: f64,
}

impl Conductivity {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > 0.0) || !inner.is_finite() || !outer.is_finite() {
            return param(format!(
                "conductivities must be positive and finite (got {inner}, {outer})"
            ));
        }
        Ok(Conductivity { inner, outer })
    }

    pub fn value(&self, region: crate::mesh::Region) -> f64 {
        match region {
            crate::mesh::Region::Inner => self.inner,
            crate::mesh::Region::Outer => self.outer,
        }
    }
}

impl Default for Conductivity {
    /// `σ = 2` inside, `σ = 1` outside.
    fn default() -> Self {
        Conductivity { inner: 2.0, outer: 1.0 }
    }
}
