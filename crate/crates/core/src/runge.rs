//! The operators `A f = v|_∂Ω` (interface source) and `A* g = u|_Γ`
//! (boundary current), conjugate gradients on the normal equations of
//! `A* g = f`, Runge approximation and localized potentials.

use crate::error::{param, Result};
use crate::fem::{trace_boundary, trace_interface, BoundaryFn, InterfaceFn, SparseSystem};
use crate::mesh::{Curve, PartitionSpec};

/// `A f`: boundary trace of the interface-source solution.
pub fn apply_a(system: &SparseSystem<'_>, f: &InterfaceFn) -> Result<BoundaryFn> {
    trace_boundary(system.mesh(), &system.solve_interface_source(f)?)
}

/// `A* g`: interface trace of the forward solution.
pub fn apply_astar(system: &SparseSystem<'_>, g: &BoundaryFn) -> Result<InterfaceFn> {
    trace_interface(system.mesh(), &system.solve_forward(g)?)
}

/// State of the iteration handed to a stopping rule.
#[derive(Debug)]
pub struct CgneStep<'a> {
    pub iteration: usize,
    /// `‖A* g − target‖_{L²(Γ)}`.
    pub residual: f64,
    /// The interface trace `A* g` of the current iterate.
    pub trace: &'a InterfaceFn,
    pub g: &'a BoundaryFn,
}

/// Verdict of a stopping rule: whether to stop, and optionally the value of
/// the functional it monitors.
pub type StopVerdict = (bool, Option<f64>);

#[derive(Debug, Clone)]
pub struct CgneResult {
    pub g: BoundaryFn,
    /// `A* g` for the returned current.
    pub trace: InterfaceFn,
    pub iterations: usize,
    /// Residual norms, starting with the zero iterate.
    pub residual_history: Vec<f64>,
    pub achieved: bool,
    pub functional_value: Option<f64>,
}

/// Conjugate gradients for the least-squares problem `min ‖A* g − target‖`
/// in the `L²(Γ)` and `L²(∂Ω)` inner products. Every iteration costs one
/// boundary-current solve and one interface-source solve.
///
/// `stop` is consulted for the zero iterate and after every step; when it
/// never fires the result carries `achieved = false`.
pub fn cgne_solve(
    system: &SparseSystem<'_>,
    target: &InterfaceFn,
    mut stop: impl FnMut(&CgneStep<'_>) -> StopVerdict,
    max_iter: usize,
) -> Result<CgneResult> {
    let mesh = system.mesh();
    target.check_len(mesh)?;
    if max_iter == 0 {
        return param("max_iter must be at least 1");
    }
    let gamma_curve = mesh.interface();
    let boundary = mesh.boundary();

    let mut g = BoundaryFn::zeros(boundary.len());
    let mut trace = InterfaceFn::zeros(gamma_curve.len());
    let mut r = target.clone();
    let mut history = vec![gamma_curve.norm(r.values())];

    let verdict = stop(&CgneStep {
        iteration: 0,
        residual: history[0],
        trace: &trace,
        g: &g,
    });
    if verdict.0 {
        return Ok(CgneResult {
            g,
            trace,
            iterations: 0,
            residual_history: history,
            achieved: true,
            functional_value: verdict.1,
        });
    }
    let mut functional_value = verdict.1;

    let mut s = apply_a(system, &r)?;
    let mut p = s.clone();
    let mut s_norm2 = boundary.inner(s.values(), s.values());
    for it in 1..=max_iter {
        if !(s_norm2 > 0.0) {
            // the normal-equation residual vanished: no further progress
            break;
        }
        let q = apply_astar(system, &p)?;
        let q_norm2 = gamma_curve.inner(q.values(), q.values());
        if !(q_norm2 > 0.0) {
            break;
        }
        let alpha = s_norm2 / q_norm2;
        g = g.add_scaled(alpha, &p);
        r = r.add_scaled(-alpha, &q);
        trace = target.add_scaled(-1.0, &r);
        history.push(gamma_curve.norm(r.values()));

        let verdict = stop(&CgneStep {
            iteration: it,
            residual: history[it],
            trace: &trace,
            g: &g,
        });
        functional_value = verdict.1;
        if verdict.0 {
            return Ok(CgneResult {
                g,
                trace,
                iterations: it,
                residual_history: history,
                achieved: true,
                functional_value,
            });
        }

        s = apply_a(system, &r)?;
        let next = boundary.inner(s.values(), s.values());
        p = s.add_scaled(next / s_norm2, &p);
        s_norm2 = next;
    }
    let iterations = history.len() - 1;
    Ok(CgneResult {
        g,
        trace,
        iterations,
        residual_history: history,
        achieved: false,
        functional_value,
    })
}

/// Finds `g` with `‖A* g − f‖_{L²(Γ)} ≤ tol`.
pub fn runge_approximate(system: &SparseSystem<'_>, f: &InterfaceFn, tol: f64, max_iter: usize) -> Result<CgneResult> {
    if !(tol > 0.0) {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    cgne_solve(system, f, |step| (step.residual <= tol, Some(step.residual)), max_iter)
}

/// `∫ u² ds` over the interface edges selected by `mask`.
pub fn masked_square_integral(curve: &Curve, values: &[f64], mask: &[bool]) -> f64 {
    (0..curve.len())
        .filter(|&e| mask[e])
        .map(|e| curve.edge_square_integral(values, e))
        .sum()
}

/// Localized potential on a set of arcs `M`.
#[derive(Debug, Clone)]
pub struct LocalizedPotential {
    /// Rescaled current `g̃ / (∫_{Γ∖M} ũ²)^{1/4}` and its run data.
    pub result: CgneResult,
    /// `∫_M u² ds` for the rescaled current.
    pub on_arcs: f64,
    /// `∫_{Γ∖M} u² ds` for the rescaled current.
    pub off_arcs: f64,
    /// Scale-free ratio `∫_M u² / ∫_{Γ∖M} u²` at every iteration ≥ 1.
    pub ratio_history: Vec<f64>,
}

/// Interface target `χ_M / |M|` for a set of arcs, as a nodal interpolant.
pub fn arc_target(curve: &Curve, partition: &PartitionSpec, arcs: &[usize]) -> Result<(InterfaceFn, Vec<bool>)> {
    if arcs.is_empty() {
        return param("arc set is empty");
    }
    if let Some(&bad) = arcs.iter().find(|&&a| a >= partition.arcs()) {
        return param(format!(
            "arc {} does not exist (partition has {})",
            bad + 1,
            partition.arcs()
        ));
    }
    let mask = partition.edge_mask(arcs);
    if mask.iter().all(|&m| m) {
        return param("arc set must be a proper subset of the interface");
    }
    let length: f64 = (0..curve.len())
        .filter(|&e| mask[e])
        .map(|e| curve.edge_lengths()[e])
        .sum();
    let chi = InterfaceFn::edge_indicator(curve, &mask);
    Ok((chi.scaled(1.0 / length), mask))
}

/// Runge iterates towards `χ_M/|M|`, rescaled so that `∫_{Γ∖M} u²` shrinks
/// while `∫_M u²` grows. Stops once `∫_M u² ≥ alpha` and
/// `∫_{Γ∖M} u² ≤ beta` hold for the rescaled current.
pub fn localized_potential(
    system: &SparseSystem<'_>,
    partition: &PartitionSpec,
    arcs: &[usize],
    alpha: f64,
    beta: f64,
    max_iter: usize,
) -> Result<LocalizedPotential> {
    if !(alpha > 0.0 && beta > 0.0) {
        return param(format!("thresholds must be positive (alpha={alpha}, beta={beta})"));
    }
    let curve = system.mesh().interface();
    if partition.edge_count() != curve.len() {
        return param("partition does not belong to this mesh");
    }
    let (target, mask) = arc_target(curve, partition, arcs)?;
    let complement: Vec<bool> = mask.iter().map(|m| !m).collect();

    let mut ratio_history = Vec::new();
    let raw = cgne_solve(
        system,
        &target,
        |step| {
            let on = masked_square_integral(curve, step.trace.values(), &mask);
            let off = masked_square_integral(curve, step.trace.values(), &complement);
            if step.iteration == 0 || !(off > 0.0) {
                return (false, None);
            }
            ratio_history.push(on / off);
            let on_scaled = on / off.sqrt();
            let off_scaled = off.sqrt();
            (on_scaled >= alpha && off_scaled <= beta, Some(on_scaled))
        },
        max_iter,
    )?;

    let off = masked_square_integral(curve, raw.trace.values(), &complement);
    let scale = if off > 0.0 { off.powf(-0.25) } else { 1.0 };
    let result = CgneResult {
        g: raw.g.scaled(scale),
        trace: raw.trace.scaled(scale),
        ..raw
    };
    let on_arcs = masked_square_integral(curve, result.trace.values(), &mask);
    let off_arcs = masked_square_integral(curve, result.trace.values(), &complement);
    Ok(LocalizedPotential {
        result,
        on_arcs,
        off_arcs,
        ratio_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_system, Conductivity};
    use crate::mesh::{generate_disk_mesh, interface_partition};

    #[test]
    fn zero_target_stops_immediately() {
        let mesh = generate_disk_mesh(2, 2, 16).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let res = runge_approximate(&sys, &InterfaceFn::constant(&mesh, 0.0), 1e-8, 10).unwrap();
        assert!(res.achieved);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.g.max_abs(), 0.0);
    }

    #[test]
    fn target_in_range_is_reached() {
        let mesh = generate_disk_mesh(2, 2, 32).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
        let g0 = BoundaryFn::from_angle_fn(&mesh, |t| t.cos() + 0.5 * (2.0 * t).sin());
        let f = apply_astar(&sys, &g0).unwrap();
        let res = runge_approximate(&sys, &f, 1e-8 * mesh.interface().norm(f.values()), 200).unwrap();
        assert!(res.achieved, "{:?}", res.residual_history.last());
        for w in res.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn radial_trace_value() {
        let mesh = generate_disk_mesh(4, 4, 64).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 2.0)).unwrap();
        let t = apply_astar(&sys, &BoundaryFn::constant(&mesh, 1.0)).unwrap();
        assert!(t.values().iter().all(|v| (v - 1.0).abs() < 1e-2));
    }

    #[test]
    fn arc_target_validation() {
        let mesh = generate_disk_mesh(1, 1, 16).unwrap();
        let p = interface_partition(&mesh, 4).unwrap();
        assert!(arc_target(mesh.interface(), &p, &[]).is_err());
        assert!(arc_target(mesh.interface(), &p, &[0, 1, 2, 3]).is_err());
        assert!(arc_target(mesh.interface(), &p, &[4]).is_err());
        let (t, mask) = arc_target(mesh.interface(), &p, &[0]).unwrap();
        let on = masked_square_integral(mesh.interface(), &[1.0; 16], &mask);
        assert!((on - mesh.interface().total_length() / 4.0).abs() < 1e-14);
        assert!(t.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn max_iter_zero_is_rejected() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
        assert!(cgne_solve(&sys, &InterfaceFn::constant(&mesh, 1.0), |_| (false, None), 0).is_err());
    }
}
