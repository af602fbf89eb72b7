use approx::assert_relative_eq;
use robininv_core::fem::{
    analytic_concentric_oracle, assemble_system, trace_boundary, trace_interface, BoundaryFn, Conductivity,
    Discretization, InterfaceFn,
};
use robininv_core::mesh::{generate_disk_mesh, Mesh};
use robininv_core::reconstruction::synthesize_data;
use robininv_core::sparse::SkylineCholesky;

fn mode_current(mesh: &Mesh, n: u32) -> BoundaryFn {
    BoundaryFn::from_angle_fn(mesh, |t| (n as f64 * t).cos())
}

fn trace_error(mesh: &Mesh, sigma: Conductivity, gamma: f64, n: u32) -> f64 {
    let sys = assemble_system(mesh, sigma, InterfaceFn::constant(mesh, gamma)).unwrap();
    let u = trace_boundary(mesh, &sys.solve_forward(&mode_current(mesh, n)).unwrap()).unwrap();
    let factor = analytic_concentric_oracle(sigma, gamma, n).unwrap().boundary_factor();
    let exact = mode_current(mesh, n).scaled(factor);
    let diff = u.add_scaled(-1.0, &exact);
    mesh.boundary().norm(diff.values()) / mesh.boundary().norm(exact.values())
}

#[test]
fn concentric_modes_converge_at_second_order() {
    let sigma = Conductivity::default();
    let meshes: Vec<Mesh> = [(2, 32), (4, 64), (8, 128)]
        .iter()
        .map(|&(r, t)| generate_disk_mesh(r, r, t).unwrap())
        .collect();
    for gamma in [1.0, 2.0] {
        for n in 0..=2 {
            let errors: Vec<f64> = meshes.iter().map(|m| trace_error(m, sigma, gamma, n)).collect();
            for w in errors.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.8, "gamma {gamma} mode {n}: errors {errors:?}");
            }
            assert!(errors[2] < 1e-2);
        }
    }
}

#[test]
fn mode_one_matches_oracle_on_default_mesh() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    assert!(trace_error(&mesh, Conductivity::default(), 1.3, 1) < 1e-2);
}

#[test]
fn smallest_eigenvalue_is_positive() {
    let mesh = generate_disk_mesh(2, 2, 16).unwrap();
    let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let chol = SkylineCholesky::factor(sys.matrix()).unwrap();
    let mut x = vec![1.0; mesh.node_count()];
    let mut mu = 0.0;
    for _ in 0..500 {
        let y = chol.solve(&x);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        mu = norm / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / norm).collect();
    }
    let lambda_min = 1.0 / mu;
    assert!(lambda_min > 0.0 && lambda_min.is_finite());
}

#[test]
fn interface_trace_of_radial_solution() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let sys = assemble_system(&mesh, Conductivity::default(), InterfaceFn::constant(&mesh, 2.0)).unwrap();
    let u = sys.solve_forward(&BoundaryFn::constant(&mesh, 1.0)).unwrap();
    for v in trace_interface(&mesh, &u).unwrap().values() {
        assert_relative_eq!(*v, 1.0, max_relative = 1e-2);
    }
}

#[test]
fn adjoint_field_vanishes_along_homotopy_to_truth() {
    let mesh = generate_disk_mesh(3, 3, 32).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let truth = InterfaceFn::from_angle_fn(&mesh, |t| 1.0 + 0.5 * t.cos());
    let start = InterfaceFn::constant(&mesh, 2.0);
    let g = BoundaryFn::from_angle_fn(&mesh, |t| t.sin() + 0.5);
    let data = synthesize_data(&disc, &truth, std::slice::from_ref(&g)).unwrap();
    let mut last = f64::INFINITY;
    for t in [0.0, 0.5, 0.9, 0.99, 1.0] {
        let gamma = start.scaled(1.0 - t).add_scaled(t, &truth);
        let sys = disc.system(&gamma).unwrap();
        let u = trace_boundary(&mesh, &sys.solve_forward(&g).unwrap()).unwrap();
        let v = sys.solve_adjoint(&u.add_scaled(-1.0, &data.measurements[0])).unwrap();
        let size = v.max_abs();
        assert!(size <= last);
        last = size;
    }
    assert_eq!(last, 0.0);
}

#[test]
fn energy_bound_for_coercive_systems() {
    let mesh = generate_disk_mesh(2, 2, 32).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::new(0.5, 3.0).unwrap());
    for c0 in [1e-3, 0.1, 10.0] {
        let sys = disc
            .system(InterfaceFn::from_angle_fn(&mesh, |t| c0 * (1.5 + t.sin())))
            .unwrap();
        let g = BoundaryFn::from_angle_fn(&mesh, |t| (2.0 * t).cos());
        let u = sys.solve_forward(&g).unwrap();
        let ub = trace_boundary(&mesh, &u).unwrap();
        let bound = mesh.boundary().norm(g.values()) * mesh.boundary().norm(ub.values());
        assert!(sys.energy(&u) <= bound * (1.0 + 1e-10));
    }
}
