//! Forward and inverse solvers for a two-layer conductor whose layers are
//! coupled through a Robin transmission condition on the interface circle.
//!
//! The unit disk carries conductivity `σ₁` inside radius one half and `σ₂`
//! outside. On the interface `Γ` the potential is continuous and the flux
//! jump equals `γ u`. A boundary current `g` on `∂Ω` produces a voltage
//! `u|_∂Ω = Λ(γ) g`; this crate discretizes that map with P1 elements and
//! builds the tools for recovering `γ` from it:
//!
//! - [`mesh`]: structured polar meshes with exact interface and boundary rings,
//! - [`fem`]: assembly, solves, traces and an analytic concentric solution,
//! - [`nd`]: Galerkin forms of `Λ(γ)`, monotonicity and Alessandrini checks,
//! - [`runge`]: conjugate gradients on the normal equations, localized potentials,
//! - [`lipschitz`]: the computable stability constant for piecewise-constant `γ`,
//! - [`reconstruction`]: adjoint gradients and BFGS.
//!
//! ```
//! use robininv_core::fem::{assemble_system, BoundaryFn, Conductivity, InterfaceFn};
//! use robininv_core::mesh::generate_disk_mesh;
//! use robininv_core::nd::apply_nd;
//!
//! let mesh = generate_disk_mesh(4, 4, 64)?;
//! let system = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 2.0))?;
//! let voltage = apply_nd(&system, &BoundaryFn::constant(&mesh, 1.0))?;
//! assert!((voltage.values()[0] - (1.0 + 2f64.ln())).abs() < 1e-2);
//! # Ok::<(), robininv_core::Error>(())
//! ```

pub mod error;
pub mod fem;
pub mod lipschitz;
pub mod mesh;
pub mod nd;
pub mod reconstruction;
pub mod runge;
pub mod sparse;

pub use error::{Error, Result};
pub use fem::{BoundaryFn, Conductivity, Discretization, Field, InterfaceFn, RobinCoefficient, SparseSystem};
pub use lipschitz::LipschitzReport;
pub use mesh::{Mesh, PartitionSpec};
pub use nd::NdForm;
pub use reconstruction::{BfgsState, DataSet};
pub use runge::CgneResult;
