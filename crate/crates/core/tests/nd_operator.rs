use robininv_core::fem::{BoundaryFn, Conductivity, Discretization, InterfaceFn};
use robininv_core::mesh::generate_disk_mesh;
use robininv_core::nd::{apply_nd, check_monotonicity, nd_form_matrix, operator_norm_diff, sine_probe_diagonal};

#[test]
fn sine_probes_are_ordered_for_shifted_coefficient() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let g1 = InterfaceFn::from_angle_fn(&mesh, |t| (-t.cos()).exp());
    let g2 = InterfaceFn::from_angle_fn(&mesh, |t| (-t.cos()).exp() + 1.0);
    let (s1, s2) = (disc.system(&g1).unwrap(), disc.system(&g2).unwrap());
    let d1 = sine_probe_diagonal(&s1, 10).unwrap();
    let d2 = sine_probe_diagonal(&s2, 10).unwrap();
    for (i, (a, b)) in d1.iter().zip(&d2).enumerate() {
        assert!(a >= b, "probe {}: {a} < {b}", i + 1);
    }
    let check = check_monotonicity(&s1, &s2, 10).unwrap();
    assert!(check.passed, "{check:?}");
}

#[test]
fn constant_pair_is_monotone() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let s1 = disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap();
    let s2 = disc.system(InterfaceFn::constant(&mesh, 2.0)).unwrap();
    let check = check_monotonicity(&s1, &s2, 10).unwrap();
    assert!(check.lambda_min >= -1e-8 * check.scale);
}

#[test]
fn galerkin_norm_grows_with_modes_and_is_symmetric() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let s1 = disc
        .system(InterfaceFn::from_angle_fn(&mesh, |t| 1.0 + 0.5 * (3.0 * t).sin()))
        .unwrap();
    let s2 = disc
        .system(InterfaceFn::from_angle_fn(&mesh, |t| 1.5 + 0.2 * t.cos()))
        .unwrap();
    let mut last = 0.0;
    for n in [4, 8, 16] {
        let (f1, f2) = (nd_form_matrix(&s1, n).unwrap(), nd_form_matrix(&s2, n).unwrap());
        let d = operator_norm_diff(&f1, &f2).unwrap();
        assert_eq!(d, operator_norm_diff(&f2, &f1).unwrap());
        assert!(d >= last * (1.0 - 1e-12), "n_modes {n}: {d} < {last}");
        assert!(f1.symmetry_residual() < 1e-10);
        last = d;
    }
}

#[test]
fn basis_gram_matrix_is_identity() {
    let mesh = generate_disk_mesh(2, 2, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let form = nd_form_matrix(&disc.system(InterfaceFn::constant(&mesh, 1.0)).unwrap(), 16).unwrap();
    let b = form.basis();
    for i in 0..b.len() {
        for j in 0..b.len() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((mesh.boundary().inner(&b[i], &b[j]) - expect).abs() < 1e-10);
        }
    }
}

#[test]
fn radial_voltage() {
    let mesh = generate_disk_mesh(4, 4, 64).unwrap();
    let disc = Discretization::new(&mesh, Conductivity::default());
    let sys = disc.system(InterfaceFn::constant(&mesh, 2.0)).unwrap();
    let v = apply_nd(&sys, &BoundaryFn::constant(&mesh, 1.0)).unwrap();
    let exact = 1.0 + std::f64::consts::LN_2;
    assert!(v.values().iter().all(|x| (x - exact).abs() < 1e-2 * exact));
}
