//! Computable Lipschitz stability constant for Robin coefficients that are
//! piecewise constant on a partition of the interface, with values in
//! `[a, b]`.
//!
//! For `k = 1..K` and every arc `m`, the coefficient
//! `γ^{(km)} = (k+5)a/4` on arc `m` and `a/2` elsewhere is paired with a
//! current `g^{(km)}` whose interface trace satisfies
//!
//! ```text
//! ½ ∫_{Γ_m} u² ds − (2b/a − 1) ∫_{Γ∖Γ_m} u² ds ≥ 1.
//! ```
//!
//! `G` is the largest `‖g^{(km)}‖²_{L²(∂Ω)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::fem::{BoundaryFn, Discretization, InterfaceFn, RobinCoefficient};
use crate::mesh::PartitionSpec;
use crate::nd::{nd_form_matrix, operator_norm_diff};
use crate::runge::{cgne_solve, masked_square_integral, CgneResult};

fn check_bounds(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return param(format!("bounds must satisfy 0 < a < b (got a={a}, b={b})"));
    }
    Ok(())
}

/// `K = ⌊4(b/a − 1)⌋ + 1`.
pub fn compute_k(a: f64, b: f64) -> Result<usize> {
    check_bounds(a, b)?;
    let k = (4.0 * (b / a - 1.0)).floor() as usize + 1;
    if !(b < (k as f64 + 4.0) * a / 4.0) {
        return param(format!("K = {k} does not satisfy b < (K+4)a/4 for a={a}, b={b}"));
    }
    Ok(k)
}

/// `γ^{(km)}` with 1-based `k` and `m`.
pub fn build_gamma_km(k: usize, m: usize, a: f64, partition: &PartitionSpec) -> Result<RobinCoefficient> {
    if k == 0 {
        return param("k starts at 1");
    }
    if m == 0 || m > partition.arcs() {
        return param(format!("arc index {m} outside 1..={}", partition.arcs()));
    }
    if !(a > 0.0) {
        return param(format!("lower bound must be positive, got {a}"));
    }
    let values: Vec<f64> = (1..=partition.arcs())
        .map(|arc| if arc == m { (k as f64 + 5.0) * a / 4.0 } else { a / 2.0 })
        .collect();
    RobinCoefficient::per_arc(partition, &values)
}

/// `½ ∫_{Γ_m} u² − (2b/a − 1) ∫_{Γ∖Γ_m} u²` for an interface trace `u`.
pub fn condition_functional(
    discretization: &Discretization<'_>,
    partition: &PartitionSpec,
    m: usize,
    a: f64,
    b: f64,
    trace: &InterfaceFn,
) -> f64 {
    let curve = discretization.mesh().interface();
    let on = partition.edge_mask(&[m - 1]);
    let off: Vec<bool> = on.iter().map(|x| !x).collect();
    0.5 * masked_square_integral(curve, trace.values(), &on)
        - (2.0 * b / a - 1.0) * masked_square_integral(curve, trace.values(), &off)
}

/// CGNE for `A* g = 4χ_{Γ_m}` under `γ^{(km)}`, stopped as soon as the
/// condition functional reaches 1.
pub fn compute_gkm(
    discretization: &Discretization<'_>,
    k: usize,
    m: usize,
    a: f64,
    b: f64,
    partition: &PartitionSpec,
    max_iter: usize,
) -> Result<CgneResult> {
    check_bounds(a, b)?;
    let gamma = build_gamma_km(k, m, a, partition)?;
    let system = discretization.system(&gamma)?;
    let curve = discretization.mesh().interface();
    let target = InterfaceFn::edge_indicator(curve, &partition.edge_mask(&[m - 1])).scaled(4.0);
    cgne_solve(
        &system,
        &target,
        |step| {
            let value = condition_functional(discretization, partition, m, a, b, step.trace);
            (value >= 1.0, Some(value))
        },
        max_iter,
    )
}

#[derive(Debug, Clone)]
pub struct GkmEntry {
    pub k: usize,
    pub m: usize,
    pub gamma: RobinCoefficient,
    pub g: BoundaryFn,
    /// `‖g^{(km)}‖²_{L²(∂Ω)}`.
    pub norm_sq: f64,
    pub iterations: usize,
    pub achieved: bool,
    pub functional_value: f64,
}

#[derive(Debug, Clone)]
pub struct LipschitzReport {
    pub a: f64,
    pub b: f64,
    pub k_max: usize,
    pub partition: PartitionSpec,
    /// Entries ordered by `k`, then `m`.
    pub entries: Vec<GkmEntry>,
    /// Largest squared norm over the achieved entries.
    pub g_max: f64,
    pub complete: bool,
}

impl LipschitzReport {
    /// `G`, the constant in `‖γ₁ − γ₂‖_∞ ≤ G ‖Λ(γ₁) − Λ(γ₂)‖_*`.
    pub fn constant_proof(&self) -> f64 {
        self.g_max
    }

    /// `1/G`, the constant as it appears in the theorem statement.
    pub fn constant_stated(&self) -> f64 {
        1.0 / self.g_max
    }
}

/// Runs all `K·M` localized-potential computations (in parallel) and
/// reduces them to `G`.
pub fn lipschitz_constant(
    discretization: &Discretization<'_>,
    a: f64,
    b: f64,
    partition: &PartitionSpec,
    max_iter: usize,
) -> Result<LipschitzReport> {
    let k_max = compute_k(a, b)?;
    if partition.edge_count() != discretization.mesh().interface().len() {
        return param("partition does not belong to this mesh");
    }
    let boundary = discretization.mesh().boundary();
    let pairs: Vec<(usize, usize)> = (1..=k_max)
        .flat_map(|k| (1..=partition.arcs()).map(move |m| (k, m)))
        .collect();
    let entries: Vec<GkmEntry> = pairs
        .par_iter()
        .map(|&(k, m)| {
            let run = compute_gkm(discretization, k, m, a, b, partition, max_iter)?;
            Ok(GkmEntry {
                k,
                m,
                gamma: build_gamma_km(k, m, a, partition)?,
                norm_sq: boundary.inner(run.g.values(), run.g.values()),
                iterations: run.iterations,
                achieved: run.achieved,
                functional_value: run.functional_value.unwrap_or(0.0),
                g: run.g,
            })
        })
        .collect::<Result<_>>()?;
    let g_max = entries
        .iter()
        .filter(|e| e.achieved)
        .fold(0.0, |acc: f64, e| acc.max(e.norm_sq));
    let complete = entries.iter().all(|e| e.achieved);
    Ok(LipschitzReport {
        a,
        b,
        k_max,
        partition: partition.clone(),
        entries,
        g_max,
        complete,
    })
}

/// One sampled coefficient pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySample {
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    /// `‖γ₁ − γ₂‖_∞`.
    pub gamma_diff: f64,
    /// Galerkin surrogate of `‖Λ(γ₁) − Λ(γ₂)‖_*`.
    pub nd_diff: f64,
    /// `gamma_diff / nd_diff`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityCheck {
    pub n_modes: usize,
    pub samples: Vec<StabilitySample>,
    /// Pairs drawn with `γ₁ = γ₂`, which carry no information.
    pub skipped: usize,
}

impl StabilityCheck {
    pub fn max_ratio(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.ratio))
    }

    /// Whether `gamma_diff ≤ factor · constant · nd_diff` for every sample.
    pub fn satisfies(&self, constant: f64, factor: f64) -> bool {
        self.samples
            .iter()
            .all(|s| s.gamma_diff <= factor * constant * s.nd_diff)
    }
}

/// Draws `n_samples` seeded pairs of piecewise-constant coefficients with
/// values in `[a, b]` and compares `‖γ₁ − γ₂‖_∞` with the Galerkin surrogate
/// of `‖Λ(γ₁) − Λ(γ₂)‖_*`.
pub fn verify_stability(
    discretization: &Discretization<'_>,
    report: &LipschitzReport,
    n_samples: usize,
    seed: u64,
    n_modes: usize,
) -> Result<StabilityCheck> {
    if !report.complete {
        return param("Lipschitz report is incomplete");
    }
    let arcs = report.partition.arcs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples)
        .map(|_| {
            let mut draw = || -> Vec<f64> { (0..arcs).map(|_| rng.random_range(report.a..=report.b)).collect() };
            let g1 = draw();
            let g2 = draw();
            (g1, g2)
        })
        .collect();
    let skipped = draws.iter().filter(|(g1, g2)| g1 == g2).count();
    let samples = draws
        .into_par_iter()
        .filter(|(g1, g2)| g1 != g2)
        .map(|(gamma1, gamma2)| {
            let s1 = discretization.system(RobinCoefficient::per_arc(&report.partition, &gamma1)?)?;
            let s2 = discretization.system(RobinCoefficient::per_arc(&report.partition, &gamma2)?)?;
            let nd_diff = operator_norm_diff(&nd_form_matrix(&s1, n_modes)?, &nd_form_matrix(&s2, n_modes)?)?;
            let gamma_diff = gamma1
                .iter()
                .zip(&gamma2)
                .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
            Ok(StabilitySample {
                ratio: gamma_diff / nd_diff,
                gamma1,
                gamma2,
                gamma_diff,
                nd_diff,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityCheck {
        n_modes,
        samples,
        skipped,
    })
}
