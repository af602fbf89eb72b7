use nalgebra::{DMatrix, DVector};

use super::{cost, cost_and_gradient, DataSet};
use crate::error::{param, Result};
use crate::fem::{Discretization, InterfaceFn};
use crate::mesh::Curve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    /// Lower clip bound for the coefficient.
    pub c0: f64,
    /// Upper clip bound for the coefficient.
    pub c1: f64,
    /// Stop when `‖∇J‖_∞ ≤ max(gtol_abs, gtol_rel·‖∇J(γ₀)‖_∞)`.
    pub gtol_rel: f64,
    pub gtol_abs: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the Armijo rule.
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            c0: 1e-3,
            c1: 10.0,
            gtol_rel: 1e-8,
            gtol_abs: 0.0,
            max_iter: 200,
            armijo: 1e-4,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxIter,
    LineSearchFailure,
}

impl BfgsStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BfgsStatus::Converged => "converged",
            BfgsStatus::MaxIter => "max_iter",
            BfgsStatus::LineSearchFailure => "line_search_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsRecord {
    pub iteration: usize,
    pub cost: f64,
    pub grad_inf: f64,
    /// Accepted step length that produced this iterate (0 for the start).
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct BfgsState {
    pub gamma: InterfaceFn,
    /// Inverse Hessian approximation with respect to the `L²(Γ)` inner
    /// product.
    pub inv_hessian: DMatrix<f64>,
    pub history: Vec<BfgsRecord>,
    pub status: BfgsStatus,
    pub skipped_updates: usize,
}

impl BfgsState {
    pub fn final_cost(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.cost)
    }

    pub fn final_grad_inf(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.grad_inf)
    }
}

fn clip(v: &DVector<f64>, lo: f64, hi: f64) -> DVector<f64> {
    v.map(|x| x.clamp(lo, hi))
}

/// Zeroes direction components that would push a coefficient sitting on a
/// clip bound further outside.
fn freeze_active(d: &mut DVector<f64>, x: &DVector<f64>, r: &DVector<f64>, opts: &BfgsOptions) {
    for i in 0..d.len() {
        let at_lower = x[i] <= opts.c0 && r[i] > 0.0;
        let at_upper = x[i] >= opts.c1 && r[i] < 0.0;
        if at_lower || at_upper {
            d[i] = 0.0;
        }
    }
}

/// Armijo backtracking on the clipped path `clip(x + t d)`.
#[allow(clippy::too_many_arguments)]
fn line_search(
    discretization: &Discretization<'_>,
    data: &DataSet,
    lambda: f64,
    x: &DVector<f64>,
    d: &DVector<f64>,
    mr: &DVector<f64>,
    j: f64,
    opts: &BfgsOptions,
) -> Result<Option<(DVector<f64>, f64, f64)>> {
    let mut t = 1.0;
    for _ in 0..=opts.max_halvings {
        let trial = clip(&(x + d * t), opts.c0, opts.c1);
        let slope = (&trial - x).dot(mr);
        if slope < 0.0 {
            let jt = cost(
                discretization,
                &InterfaceFn::new(trial.as_slice().to_vec()),
                data,
                lambda,
            )?;
            if jt <= j + opts.armijo * slope {
                return Ok(Some((trial, jt, t)));
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

fn mass(curve: &Curve, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(curve.mass_apply(v.as_slice()))
}

/// Quasi-Newton minimization of the output least-squares cost.
///
/// Directions are `−H ∇J` with `H` updated by the BFGS formula in the
/// `L²(Γ)` geometry; steps start at length one and are halved until the
/// Armijo condition holds for the clipped trial point, so the recorded cost
/// never increases. Updates with `⟨s, y⟩ ≤ 1e−12 ‖s‖‖y‖` are skipped.
pub fn bfgs_minimize(
    discretization: &Discretization<'_>,
    data: &DataSet,
    lambda: f64,
    gamma_init: &InterfaceFn,
    opts: &BfgsOptions,
) -> Result<BfgsState> {
    if !(opts.c0 > 0.0 && opts.c1 > opts.c0) {
        return param(format!(
            "clip bounds must satisfy 0 < c0 < c1 (got {}, {})",
            opts.c0, opts.c1
        ));
    }
    if !(opts.armijo > 0.0 && opts.armijo < 1.0) {
        return param(format!("Armijo constant must lie in (0, 1), got {}", opts.armijo));
    }
    gamma_init.check_len(discretization.mesh())?;
    if gamma_init.values().iter().any(|&v| v < opts.c0 || v > opts.c1) {
        return param(format!("initial coefficient leaves [{}, {}]", opts.c0, opts.c1));
    }
    let curve = discretization.mesh().interface();
    let n = curve.len();
    let to_fn = |v: &DVector<f64>| InterfaceFn::new(v.as_slice().to_vec());

    let mut x = DVector::from_column_slice(gamma_init.values());
    let first = cost_and_gradient(discretization, gamma_init, data, lambda)?;
    let mut j = first.cost;
    let mut r = DVector::from_vec(first.gradient.into_values());
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut skipped = 0;
    let gtol = opts.gtol_abs.max(opts.gtol_rel * r.amax());
    let mut history = vec![BfgsRecord {
        iteration: 0,
        cost: j,
        grad_inf: r.amax(),
        step: 0.0,
    }];

    let mut status = BfgsStatus::MaxIter;
    for it in 1..=opts.max_iter + 1 {
        if r.amax() <= gtol {
            status = BfgsStatus::Converged;
            break;
        }
        if it > opts.max_iter {
            break;
        }
        let mr = mass(curve, &r);
        let mut d = -(&h * &r);
        freeze_active(&mut d, &x, &r, opts);
        if d.dot(&mr) >= 0.0 {
            // not a descent direction: restart from steepest descent
            h = DMatrix::identity(n, n);
            scaled = false;
            d = -r.clone();
            freeze_active(&mut d, &x, &r, opts);
        }

        let mut search = line_search(discretization, data, lambda, &x, &d, &mr, j, opts)?;
        if search.is_none() && scaled {
            // retry once along the projected steepest descent direction
            h = DMatrix::identity(n, n);
            scaled = false;
            d = -r.clone();
            freeze_active(&mut d, &x, &r, opts);
            search = line_search(discretization, data, lambda, &x, &d, &mr, j, opts)?;
        }
        let Some((x_new, j_new, t)) = search else {
            status = BfgsStatus::LineSearchFailure;
            break;
        };

        let next = cost_and_gradient(discretization, &to_fn(&x_new), data, lambda)?;
        debug_assert!((next.cost - j_new).abs() <= 1e-12 * j_new.abs().max(1e-300));
        let r_new = DVector::from_vec(next.gradient.into_values());
        let s = &x_new - &x;
        let y = &r_new - &r;
        let ms = mass(curve, &s);
        let my = mass(curve, &y);
        let sy = s.dot(&my);
        let s_norm = s.dot(&ms).max(0.0).sqrt();
        let y_norm = y.dot(&my).max(0.0).sqrt();
        if sy > 1e-12 * s_norm * y_norm {
            if !scaled {
                h *= sy / (y_norm * y_norm);
                scaled = true;
            }
            let rho = 1.0 / sy;
            // H ← (I − ρ s (My)ᵀ) H (I − ρ y (Ms)ᵀ) + ρ s (Ms)ᵀ
            let left = DMatrix::identity(n, n) - &s * my.transpose() * rho;
            let right = DMatrix::identity(n, n) - &y * ms.transpose() * rho;
            h = &left * &h * &right + &s * ms.transpose() * rho;
        } else {
            skipped += 1;
        }

        x = x_new;
        r = r_new;
        j = j_new;
        history.push(BfgsRecord {
            iteration: it,
            cost: j,
            grad_inf: r.amax(),
            step: t,
        });
    }

    Ok(BfgsState {
        gamma: to_fn(&x),
        inv_hessian: h,
        history,
        status,
        skipped_updates: skipped,
    })
}
