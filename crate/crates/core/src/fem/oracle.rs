use nalgebra::{Matrix3, Vector3};

use crate::error::{param, Error, Result};
use crate::fem::Conductivity;
use crate::mesh::INTERFACE_RADIUS;

/// Separated solution for a single Fourier mode on the concentric geometry.
///
/// For the boundary current `g = cos(nθ)` (or `sin(nθ)`, or `1` when
/// `n = 0`) the potential is `u = R(r)·cos(nθ)` with
///
/// ```text
/// R(r) = A rⁿ               r < ρ
/// R(r) = B rⁿ + C r⁻ⁿ       ρ < r < 1      (n ≥ 1)
/// R(r) = B + C ln r         ρ < r < 1      (n = 0)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentricSolution {
    pub mode: u32,
    pub inner: f64,
    pub outer_pos: f64,
    pub outer_neg: f64,
}

impl ConcentricSolution {
    /// Radial factor `R(r)` for `0 ≤ r ≤ 1`.
    pub fn radial(&self, r: f64) -> f64 {
        let n = self.mode as i32;
        if r <= INTERFACE_RADIUS {
            self.inner * r.powi(n)
        } else if n == 0 {
            self.outer_pos + self.outer_neg * r.ln()
        } else {
            self.outer_pos * r.powi(n) + self.outer_neg * r.powi(-n)
        }
    }

    /// `R(1)`, the eigenvalue of the Neumann-to-Dirichlet map on this mode.
    pub fn boundary_factor(&self) -> f64 {
        if self.mode == 0 {
            self.outer_pos
        } else {
            self.outer_pos + self.outer_neg
        }
    }
}

/// Closed-form solution for constant `γ` on the disk with interface radius
/// one half.
pub fn analytic_concentric_oracle(sigma: Conductivity, gamma: f64, mode: u32) -> Result<ConcentricSolution> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return param(format!("gamma must be positive and finite, got {gamma}"));
    }
    let rho = INTERFACE_RADIUS;
    let (s1, s2) = (sigma.inner, sigma.outer);
    if mode == 0 {
        let c = 1.0 / s2;
        let a = s2 * c / (rho * gamma);
        return Ok(ConcentricSolution {
            mode,
            inner: a,
            outer_pos: a - c * rho.ln(),
            outer_neg: c,
        });
    }
    let n = mode as i32;
    let nf = mode as f64;
    let (rn, rm) = (rho.powi(n), rho.powi(-n));
    #[rustfmt::skip]
    let m = Matrix3::new(
        rn, -rn, -rm,
        -s1 * nf * rho.powi(n - 1) - gamma * rn, s2 * nf * rho.powi(n - 1), -s2 * nf * rho.powi(-n - 1),
        0.0, s2 * nf, -s2 * nf,
    );
    let x = m
        .lu()
        .solve(&Vector3::new(0.0, 0.0, 1.0))
        .ok_or_else(|| Error::Numerical("singular concentric system".into()))?;
    Ok(ConcentricSolution {
        mode,
        inner: x[0],
        outer_pos: x[1],
        outer_neg: x[2],
    })
}
