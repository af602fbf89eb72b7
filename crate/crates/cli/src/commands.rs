use std::fmt;
use std::io;

use clap::ValueEnum;
use robininv_core::fem::{trace_boundary, trace_interface, BoundaryFn, Conductivity, Discretization, InterfaceFn};
use robininv_core::lipschitz::{lipschitz_constant, verify_stability};
use robininv_core::mesh::{generate_disk_mesh, interface_partition, write_mesh, Mesh};
use robininv_core::nd::{check_monotonicity, nd_form_matrix, sine_probe_diagonal};
use robininv_core::reconstruction::{
    add_noise, bfgs_minimize, relative_l2_error, synthesize_data, BfgsOptions, BfgsState,
};
use robininv_core::runge::localized_potential;

use crate::config::{Config, ConfigError};
use crate::output::{gnuplot, Output, Summary};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write the mesh file.
    Mesh,
    /// Solve one forward problem and write the field and its traces.
    Forward,
    /// Write the Galerkin matrix of the Neumann-to-Dirichlet map.
    Ndmap,
    /// Compare sine-probe responses of exp(-cos θ) and exp(-cos θ)+1.
    Monotonicity,
    /// Localized potential for a set of interface arcs.
    Locpot,
    /// Stability constant for piecewise-constant coefficients, with sampling check.
    Lipschitz,
    /// One BFGS reconstruction.
    Reconstruct,
    /// Reconstruction of exp(-cos θ / 2) at all noise levels, two initial guesses.
    Example1,
    /// Reconstruction of 1 + cos² θ at all noise levels.
    Example2,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mesh => "mesh",
            Command::Forward => "forward",
            Command::Ndmap => "ndmap",
            Command::Monotonicity => "monotonicity",
            Command::Locpot => "locpot",
            Command::Lipschitz => "lipschitz",
            Command::Reconstruct => "reconstruct",
            Command::Example1 => "example1",
            Command::Example2 => "example2",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Numerical(String),
    Io(String),
    NotAchieved(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
            CliError::NotAchieved(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Param(m) => write!(f, "parameter error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::NotAchieved(m) => write!(f, "not achieved: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<robininv_core::Error> for CliError {
    fn from(e: robininv_core::Error) -> Self {
        use robininv_core::Error as E;
        match e {
            E::Parameter(_) | E::Coercivity { .. } | E::MeshFormat(_) => CliError::Param(e.to_string()),
            E::Numerical(_) | E::NotConverged { .. } => CliError::Numerical(e.to_string()),
            E::Io(e) => CliError::Io(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Param(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Noise levels of the reconstruction examples.
pub const NOISE_LEVELS: [f64; 5] = [0.0, 0.01, 0.03, 0.05, 0.1];

/// Runs one subcommand, writing its files under the configured output
/// directory. The summary is returned even when the run ends with a
/// non-achievement, which is reported as the error.
pub fn execute(command: Command, cfg: &Config) -> (Summary, Result<()>) {
    let mut summary = Summary::default();
    summary.line("command", command.name());
    summary.line("config_hash", cfg.hash());
    summary.line("seed", cfg.seed);
    let result = Output::create(&cfg.output_dir, &cfg.hash(), cfg.seed, cfg.plot_scripts)
        .map_err(CliError::from)
        .and_then(|mut out| {
            let res = dispatch(command, cfg, &mut out, &mut summary);
            out.save(&format!("{}_summary.txt", command.name()), summary.text())?;
            res
        });
    (summary, result)
}

fn dispatch(command: Command, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mesh = generate_disk_mesh(cfg.n_r_inner, cfg.n_r_outer, cfg.n_theta)?;
    summary.line("mesh", format!("{} {} {}", cfg.n_r_inner, cfg.n_r_outer, cfg.n_theta));
    let sigma = Conductivity::new(cfg.sigma1, cfg.sigma2)?;
    let disc = Discretization::new(&mesh, sigma);
    match command {
        Command::Mesh => mesh_cmd(&mesh, out, summary),
        Command::Forward => forward(&disc, cfg, out, summary),
        Command::Ndmap => ndmap(&disc, cfg, out, summary),
        Command::Monotonicity => monotonicity(&disc, cfg, out, summary),
        Command::Locpot => locpot(&disc, cfg, out, summary),
        Command::Lipschitz => lipschitz(&disc, cfg, out, summary),
        Command::Reconstruct => reconstruct(&disc, cfg, out, summary),
        Command::Example1 => {
            let plan = ExamplePlan {
                name: "example1",
                truth: profile("exp_cos:-0.5"),
                fluxes: vec![profile("cos:1"), profile("sin:1"), profile("cos:2")],
                inits: vec![("expcos", profile("exp_cos:-0.2")), ("one", profile("const:1"))],
            };
            example(&disc, cfg, &plan, out, summary)
        }
        Command::Example2 => {
            let plan = ExamplePlan {
                name: "example2",
                truth: profile("const:1+cos_sq"),
                fluxes: vec![
                    profile("const:5+cos:1"),
                    profile("const:1+sin:1"),
                    profile("const:3+cos:2"),
                ],
                inits: vec![("one", profile("const:1"))],
            };
            example(&disc, cfg, &plan, out, summary)
        }
    }
}

fn profile(text: &str) -> Profile {
    Profile::parse(text).expect("built-in profile")
}

fn on_interface(mesh: &Mesh, p: &Profile) -> InterfaceFn {
    InterfaceFn::from_angle_fn(mesh, |t| p.eval(t))
}

fn on_boundary(mesh: &Mesh, p: &Profile) -> BoundaryFn {
    BoundaryFn::from_angle_fn(mesh, |t| p.eval(t))
}

fn mesh_cmd(mesh: &Mesh, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf)?;
    out.save("mesh.txt", &String::from_utf8_lossy(&buf))?;
    summary.line("nodes", mesh.node_count());
    summary.line("triangles", mesh.triangles().len());
    summary.line("interface_edges", mesh.interface().len());
    summary.line("boundary_edges", mesh.boundary().len());
    summary.line("h", mesh.h());
    summary.line("area", mesh.total_area());
    Ok(())
}

fn forward(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mesh = disc.mesh();
    let system = disc.system(on_interface(mesh, &cfg.gamma))?;
    let g = on_boundary(mesh, &cfg.flux);
    let u = system.solve_forward(&g)?;

    let mut field = out.csv(&["node", "x", "y", "u"]);
    for (i, ([x, y], v)) in mesh.nodes().iter().zip(u.values()).enumerate() {
        field.row([i.to_string(), x.to_string(), y.to_string(), v.to_string()]);
    }
    out.save_csv("forward_field.csv", field)?;

    let ti = trace_interface(mesh, &u)?;
    let tb = trace_boundary(mesh, &u)?;
    for (name, angles, values) in [
        ("forward_interface.csv", mesh.interface().angles(), ti.values()),
        ("forward_boundary.csv", mesh.boundary().angles(), tb.values()),
    ] {
        let mut csv = out.csv(&["theta", "u"]);
        for (t, v) in angles.iter().zip(values) {
            csv.row([t, v]);
        }
        out.save_csv(name, csv)?;
    }
    out.plot(
        "forward_traces.gp",
        &gnuplot(
            "Traces of the forward solution",
            "theta",
            "u",
            false,
            &[
                ("forward_interface.csv", 1, 2, "lines"),
                ("forward_boundary.csv", 1, 2, "lines"),
            ],
        ),
    )?;
    summary.line("gamma", &cfg.gamma);
    summary.line("flux", &cfg.flux);
    summary.line("energy", system.energy(&u));
    summary.line("boundary_trace_l2", mesh.boundary().norm(tb.values()));
    summary.line("interface_trace_l2", mesh.interface().norm(ti.values()));
    Ok(())
}

fn ndmap(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let system = disc.system(on_interface(disc.mesh(), &cfg.gamma))?;
    let form = nd_form_matrix(&system, cfg.n_modes)?;
    let mut csv = out.csv(&["row", "col", "value"]);
    let m = form.matrix();
    for r in 0..form.dim() {
        for c in 0..form.dim() {
            csv.row([r.to_string(), c.to_string(), m[(r, c)].to_string()]);
        }
    }
    out.save_csv("ndmap.csv", csv)?;
    summary.line("gamma", &cfg.gamma);
    summary.line("n_modes", cfg.n_modes);
    summary.line("dimension", form.dim());
    summary.line("norm", form.norm());
    summary.line("symmetry_residual", form.symmetry_residual());
    Ok(())
}

/// Number of sine probes in the monotonicity comparison.
const SINE_PROBES: usize = 10;

fn monotonicity(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mesh = disc.mesh();
    let gamma1 = InterfaceFn::from_angle_fn(mesh, |t| (-t.cos()).exp());
    let gamma2 = InterfaceFn::from_angle_fn(mesh, |t| (-t.cos()).exp() + 1.0);
    let s1 = disc.system(&gamma1)?;
    let s2 = disc.system(&gamma2)?;
    let d1 = sine_probe_diagonal(&s1, SINE_PROBES)?;
    let d2 = sine_probe_diagonal(&s2, SINE_PROBES)?;

    let mut csv = out.csv(&["i", "nd_gamma1", "nd_gamma2"]);
    for (i, (a, b)) in d1.iter().zip(&d2).enumerate() {
        csv.row([(i + 1).to_string(), a.to_string(), b.to_string()]);
    }
    out.save_csv("monotonicity.csv", csv)?;
    out.plot(
        "monotonicity.gp",
        &gnuplot(
            "Sine-probe responses",
            "i",
            "<Lambda g_i, g_i>",
            true,
            &[
                ("monotonicity.csv", 1, 2, "linespoints"),
                ("monotonicity.csv", 1, 3, "linespoints"),
            ],
        ),
    )?;

    let ordered = d1.iter().zip(&d2).filter(|(a, b)| a >= b).count();
    let check = check_monotonicity(&s1, &s2, cfg.n_modes)?;
    summary.line("ordered_rows", format!("{ordered}/{SINE_PROBES}"));
    summary.line("n_modes", cfg.n_modes);
    summary.line("lambda_min", check.lambda_min);
    summary.line("form_norm", check.scale);
    summary.line("quadratic_form_ordered", check.passed);
    if ordered < SINE_PROBES || !check.passed {
        return Err(CliError::NotAchieved("monotonicity ordering violated".into()));
    }
    Ok(())
}

fn locpot(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mesh = disc.mesh();
    let system = disc.system(on_interface(mesh, &cfg.gamma))?;
    let partition = interface_partition(mesh, cfg.partition_m)?;
    let arcs: Vec<usize> = cfg.locpot_arcs.iter().map(|m| m - 1).collect();
    let lp = localized_potential(&system, &partition, &arcs, cfg.alpha, cfg.beta, cfg.cgne_max_iter)?;
    let res = &lp.result;

    let mut trace = out.csv(&["theta", "u", "on_arcs"]);
    let mask = partition.edge_mask(&arcs);
    let curve = mesh.interface();
    for (i, (t, v)) in curve.angles().iter().zip(res.trace.values()).enumerate() {
        // edge i runs from node i to node i+1
        trace.row([t.to_string(), v.to_string(), u8::from(mask[i]).to_string()]);
    }
    out.save_csv("locpot_trace.csv", trace)?;

    let mut current = out.csv(&["theta", "g"]);
    for (t, v) in mesh.boundary().angles().iter().zip(res.g.values()) {
        current.row([t, v]);
    }
    out.save_csv("locpot_current.csv", current)?;

    let mut history = out.csv(&["iter", "residual", "ratio"]);
    for (i, r) in res.residual_history.iter().enumerate() {
        let ratio = if i == 0 {
            f64::NAN
        } else {
            lp.ratio_history.get(i - 1).copied().unwrap_or(f64::NAN)
        };
        history.row([i.to_string(), r.to_string(), ratio.to_string()]);
    }
    out.save_csv("locpot_history.csv", history)?;
    out.plot(
        "locpot.gp",
        &gnuplot(
            "Localized potential on the interface",
            "theta",
            "u",
            false,
            &[("locpot_trace.csv", 1, 2, "lines")],
        ),
    )?;

    summary.line(
        "arcs",
        cfg.locpot_arcs
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    summary.line("iterations", res.iterations);
    summary.line("achieved", res.achieved);
    summary.line("on_arcs_integral", lp.on_arcs);
    summary.line("off_arcs_integral", lp.off_arcs);
    summary.line("current_l2", mesh.boundary().norm(res.g.values()));
    if !res.achieved {
        return Err(CliError::NotAchieved(format!(
            "thresholds alpha={} beta={} not reached in {} iterations",
            cfg.alpha, cfg.beta, cfg.cgne_max_iter
        )));
    }
    Ok(())
}

fn lipschitz(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let partition = interface_partition(disc.mesh(), cfg.partition_m)?;
    let report = lipschitz_constant(disc, cfg.a, cfg.b, &partition, cfg.cgne_max_iter)?;

    let mut gkm = out.csv(&[
        "k",
        "m",
        "gamma_on_arc",
        "iterations",
        "achieved",
        "functional",
        "norm_sq",
    ]);
    for e in &report.entries {
        let on_arc = (e.k as f64 + 5.0) * cfg.a / 4.0;
        gkm.row([
            e.k.to_string(),
            e.m.to_string(),
            on_arc.to_string(),
            e.iterations.to_string(),
            e.achieved.to_string(),
            e.functional_value.to_string(),
            e.norm_sq.to_string(),
        ]);
    }
    out.save_csv("lipschitz_gkm.csv", gkm)?;

    summary.line("a", cfg.a);
    summary.line("b", cfg.b);
    summary.line("K", report.k_max);
    summary.line("M", cfg.partition_m);
    summary.line(
        "achieved",
        format!(
            "{}/{}",
            report.entries.iter().filter(|e| e.achieved).count(),
            report.entries.len()
        ),
    );
    if !report.complete {
        return Err(CliError::NotAchieved(format!(
            "some localized potentials missed the condition within {} iterations",
            cfg.cgne_max_iter
        )));
    }

    let check = verify_stability(disc, &report, cfg.verify_samples, cfg.seed, cfg.n_modes)?;
    let proof = report.constant_proof();
    let stated = report.constant_stated();
    let mut ver = out.csv(&[
        "sample",
        "gamma1",
        "gamma2",
        "gamma_diff",
        "nd_diff",
        "ratio",
        "proof_bound",
        "stated_bound",
    ]);
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    for (i, s) in check.samples.iter().enumerate() {
        ver.row([
            i.to_string(),
            join(&s.gamma1),
            join(&s.gamma2),
            s.gamma_diff.to_string(),
            s.nd_diff.to_string(),
            s.ratio.to_string(),
            (s.gamma_diff <= 1.05 * proof * s.nd_diff).to_string(),
            (s.gamma_diff <= 1.05 * stated * s.nd_diff).to_string(),
        ]);
    }
    out.save_csv("lipschitz_verification.csv", ver)?;

    let proof_ok = check.satisfies(proof, 1.05);
    let stated_ok = check.satisfies(stated, 1.05);
    let mut sum = out.csv(&[
        "K",
        "M",
        "G",
        "constant_proof",
        "constant_stated",
        "max_ratio",
        "proof_bound_holds",
        "stated_bound_holds",
    ]);
    sum.row([
        report.k_max.to_string(),
        cfg.partition_m.to_string(),
        report.g_max.to_string(),
        proof.to_string(),
        stated.to_string(),
        check.max_ratio().to_string(),
        proof_ok.to_string(),
        stated_ok.to_string(),
    ]);
    out.save_csv("lipschitz_summary.csv", sum)?;

    summary.line("G", report.g_max);
    summary.line("constant_proof", proof);
    summary.line("constant_stated", stated);
    summary.line("samples", check.samples.len());
    summary.line("skipped_equal_pairs", check.skipped);
    summary.line("max_ratio", check.max_ratio());
    summary.line("proof_bound_holds", proof_ok);
    summary.line("stated_bound_holds", stated_ok);
    summary.note(
        "note: the construction bounds |gamma1 - gamma2| by G times the operator difference; \
         the reciprocal 1/G is listed as constant_stated for comparison and is checked separately",
    );
    Ok(())
}

fn bfgs_options(cfg: &Config) -> BfgsOptions {
    BfgsOptions {
        c0: cfg.c0,
        c1: cfg.c1,
        gtol_rel: cfg.gtol_rel,
        max_iter: cfg.max_iter,
        ..BfgsOptions::default()
    }
}

struct RunOutcome {
    state: BfgsState,
    error: f64,
}

#[allow(clippy::too_many_arguments)]
fn reconstruction_run(
    disc: &Discretization<'_>,
    cfg: &Config,
    truth: &InterfaceFn,
    fluxes: &[BoundaryFn],
    eps: f64,
    init: &InterfaceFn,
    out: &mut Output,
    prefix: &str,
) -> Result<RunOutcome> {
    let clean = synthesize_data(disc, truth, fluxes)?;
    let data = add_noise(&clean, eps, cfg.seed)?;
    let state = bfgs_minimize(disc, &data, cfg.lambda, init, &bfgs_options(cfg))?;
    let error = relative_l2_error(disc, &state.gamma, truth);

    let mut history = out.csv(&["iter", "J", "grad_inf_norm", "step"]);
    for r in &state.history {
        history.row([
            r.iteration.to_string(),
            r.cost.to_string(),
            r.grad_inf.to_string(),
            r.step.to_string(),
        ]);
    }
    out.save_csv(&format!("{prefix}_history.csv"), history)?;

    let mut coef = out.csv(&["theta", "gamma_rec", "gamma_true"]);
    let curve = disc.mesh().interface();
    for ((t, g), tr) in curve.angles().iter().zip(state.gamma.values()).zip(truth.values()) {
        coef.row([t, g, tr]);
    }
    out.save_csv(&format!("{prefix}_coefficient.csv"), coef)?;
    out.plot(
        &format!("{prefix}.gp"),
        &gnuplot(
            "Reconstructed coefficient",
            "theta",
            "gamma",
            false,
            &[
                (&format!("{prefix}_coefficient.csv"), 1, 2, "lines"),
                (&format!("{prefix}_coefficient.csv"), 1, 3, "lines"),
            ],
        ),
    )?;
    Ok(RunOutcome { state, error })
}

fn reconstruct(disc: &Discretization<'_>, cfg: &Config, out: &mut Output, summary: &mut Summary) -> Result<()> {
    let mesh = disc.mesh();
    let truth = on_interface(mesh, &cfg.gamma_true);
    let fluxes: Vec<BoundaryFn> = cfg.fluxes.iter().map(|p| on_boundary(mesh, p)).collect();
    let init = on_interface(mesh, &cfg.gamma_init);
    let run = reconstruction_run(disc, cfg, &truth, &fluxes, cfg.eps, &init, out, "reconstruct")?;
    let h = &run.state.history;
    summary.line("gamma_true", &cfg.gamma_true);
    summary.line("gamma_init", &cfg.gamma_init);
    summary.line("eps", cfg.eps);
    summary.line("lambda", cfg.lambda);
    summary.line("status", run.state.status.as_str());
    summary.line("iterations", h.len() - 1);
    summary.line("cost_initial", h[0].cost);
    summary.line("cost_final", run.state.final_cost());
    summary.line("grad_initial", h[0].grad_inf);
    summary.line("grad_final", run.state.final_grad_inf());
    summary.line("relative_l2_error", run.error);
    Ok(())
}

struct ExamplePlan {
    name: &'static str,
    truth: Profile,
    fluxes: Vec<Profile>,
    inits: Vec<(&'static str, Profile)>,
}

fn example(
    disc: &Discretization<'_>,
    cfg: &Config,
    plan: &ExamplePlan,
    out: &mut Output,
    summary: &mut Summary,
) -> Result<()> {
    let mesh = disc.mesh();
    let truth = on_interface(mesh, &plan.truth);
    let fluxes: Vec<BoundaryFn> = plan.fluxes.iter().map(|p| on_boundary(mesh, p)).collect();
    let mut table = out.csv(&[
        "eps",
        "init",
        "status",
        "iterations",
        "cost_initial",
        "cost_final",
        "grad_initial",
        "grad_final",
        "relative_l2_error",
    ]);
    summary.line("gamma_true", &plan.truth);
    summary.line("lambda", cfg.lambda);
    for &eps in &NOISE_LEVELS {
        for (label, init) in &plan.inits {
            let init = on_interface(mesh, init);
            let prefix = format!("{}_eps{eps}_{label}", plan.name);
            let run = reconstruction_run(disc, cfg, &truth, &fluxes, eps, &init, out, &prefix)?;
            let h = &run.state.history;
            table.row([
                eps.to_string(),
                label.to_string(),
                run.state.status.as_str().to_string(),
                (h.len() - 1).to_string(),
                h[0].cost.to_string(),
                run.state.final_cost().to_string(),
                h[0].grad_inf.to_string(),
                run.state.final_grad_inf().to_string(),
                run.error.to_string(),
            ]);
            summary.line(
                &format!("eps={eps} init={label}"),
                format!(
                    "{} after {} iterations, relative error {:.4e}",
                    run.state.status.as_str(),
                    h.len() - 1,
                    run.error
                ),
            );
        }
    }
    out.save_csv(&format!("{}_summary.csv", plan.name), table)?;
    let series: Vec<String> = NOISE_LEVELS
        .iter()
        .map(|eps| format!("{}_eps{eps}_{}_history.csv", plan.name, plan.inits[0].0))
        .collect();
    let refs: Vec<(&str, usize, usize, &str)> = series.iter().map(|s| (s.as_str(), 1, 2, "lines")).collect();
    out.plot(
        &format!("{}_history.gp", plan.name),
        &gnuplot("Cost history", "iteration", "J", true, &refs),
    )?;
    Ok(())
}
