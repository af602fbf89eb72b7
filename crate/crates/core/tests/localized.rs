use robininv_core::fem::{trace_interface, Conductivity, Discretization, InterfaceFn};
use robininv_core::mesh::{generate_disk_mesh, interface_partition};
use robininv_core::runge::{arc_target, cgne_solve, localized_potential, masked_square_integral, runge_approximate};

#[test]
fn quarter_arc_target_is_reached() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let sys = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let p = interface_partition(&mesh, 4).unwrap();
    let (target, _) = arc_target(mesh.interface(), &p, &[0]).unwrap();
    let chi = runge_approximate(&sys, &target, 0.05, 500).unwrap();
    assert!(chi.achieved);
    for w in chi.residual_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }

    // a smooth target of the same size is easier
    let scale = mesh.interface().norm(target.values())
        / mesh
            .interface()
            .norm(&mesh.interface().angles().iter().map(|t| t.sin()).collect::<Vec<_>>());
    let smooth = InterfaceFn::from_angle_fn(&mesh, |t| scale * t.sin());
    let sin = runge_approximate(&sys, &smooth, 0.05, 500).unwrap();
    assert!(sin.achieved && sin.iterations < chi.iterations);

    let tight = runge_approximate(&sys, &target, 0.01, 2000).unwrap();
    assert!(tight.iterations >= chi.iterations);
}

#[test]
fn residual_decreases_for_scaled_indicator() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let sys = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let p = interface_partition(&mesh, 4).unwrap();
    let target = InterfaceFn::edge_indicator(mesh.interface(), &p.edge_mask(&[0])).scaled(4.0);
    let run = cgne_solve(&sys, &target, |_| (false, None), 60).unwrap();
    assert!(!run.achieved);
    assert_eq!(run.iterations, 60);
    for w in run.residual_history.windows(2) {
        assert!(w[1] < w[0], "{w:?}");
    }
}

#[test]
fn localized_potential_and_its_complement() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let sys = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let p = interface_partition(&mesh, 4).unwrap();

    let lp = localized_potential(&sys, &p, &[0], 2.0, 0.5, 500).unwrap();
    assert!(lp.result.achieved);
    assert!(lp.on_arcs >= 2.0 && lp.off_arcs <= 0.5);
    let first = lp.ratio_history[0];
    let last = *lp.ratio_history.last().unwrap();
    assert!(last >= 10.0 * first, "{first} -> {last}");

    // re-evaluate from scratch with the returned current
    let u = trace_interface(&mesh, &sys.solve_forward(&lp.result.g).unwrap()).unwrap();
    let mask = p.edge_mask(&[0]);
    let off: Vec<bool> = mask.iter().map(|m| !m).collect();
    let on_again = masked_square_integral(mesh.interface(), u.values(), &mask);
    let off_again = masked_square_integral(mesh.interface(), u.values(), &off);
    assert!((on_again - lp.on_arcs).abs() < 1e-8 * lp.on_arcs);
    assert!(on_again >= 2.0 && off_again <= 0.5);

    let comp = localized_potential(&sys, &p, &[1, 2, 3], 2.0, 0.5, 500).unwrap();
    assert!(comp.result.achieved);
    let u = trace_interface(&mesh, &sys.solve_forward(&comp.result.g).unwrap()).unwrap();
    assert!(masked_square_integral(mesh.interface(), u.values(), &off) >= 2.0);
    assert!(masked_square_integral(mesh.interface(), u.values(), &mask) <= 0.5);
}

#[test]
fn degenerate_arc_sets_are_rejected() {
    let mesh = generate_disk_mesh(2, 2, 32).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let sys = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let p = interface_partition(&mesh, 4).unwrap();
    assert!(localized_potential(&sys, &p, &[], 2.0, 0.5, 10).is_err());
    assert!(localized_potential(&sys, &p, &[0, 1, 2, 3], 2.0, 0.5, 10).is_err());
    assert!(localized_potential(&sys, &p, &[0], -1.0, 0.5, 10).is_err());
}
