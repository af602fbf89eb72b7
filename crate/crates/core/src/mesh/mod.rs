//! Structured polar triangulation of the unit disk with an interior
//! interface circle of radius one half.
//!
//! Node rings are placed exactly on the interface and on the outer boundary,
//! so the inner disk and the outer annulus are unions of whole triangles and
//! both circles are resolved by closed polygons. Nodes are numbered ring by
//! ring (center first), which keeps the stiffness matrix profile narrow.

mod curve;
mod io;
mod partition;

use std::f64::consts::TAU;

pub use curve::{Curve, GAUSS_POINTS};
pub use io::{read_mesh, write_mesh};
pub use partition::{interface_partition, PartitionSpec};

use crate::error::{param, Error, Result};

/// Radius of the interface circle.
pub const INTERFACE_RADIUS: f64 = 0.5;
/// Radius of the outer boundary.
pub const OUTER_RADIUS: f64 = 1.0;

const ON_CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Inner disk, r < 0.5.
    Inner,
    /// Outer annulus, 0.5 < r < 1.
    Outer,
}

impl Region {
    pub fn tag(self) -> u8 {
        match self {
            Region::Inner => 1,
            Region::Outer => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Region::Inner),
            2 => Some(Region::Outer),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub nodes: [usize; 3],
    pub region: Region,
}

/// Conforming triangulation of the disk. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    node_angle: Vec<Option<f64>>,
    triangles: Vec<Triangle>,
    interface: Curve,
    boundary: Curve,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from raw parts and checks every structural invariant.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<Triangle>,
        interface_edges: &[[usize; 2]],
        boundary_edges: &[[usize; 2]],
    ) -> Result<Self> {
        let interface = Curve::from_edges(&nodes, interface_edges)?;
        let boundary = Curve::from_edges(&nodes, boundary_edges)?;
        let mut node_angle = vec![None; nodes.len()];
        for curve in [&interface, &boundary] {
            for (&n, &theta) in curve.nodes().iter().zip(curve.angles()) {
                node_angle[n] = Some(theta);
            }
        }
        let h = max_edge_length(&nodes, &triangles);
        let mesh = Mesh {
            nodes,
            node_angle,
            triangles,
            interface,
            boundary,
            h,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Polar angle in `[0, 2π)` for nodes on the interface or the boundary.
    pub fn node_angle(&self, node: usize) -> Option<f64> {
        self.node_angle[node]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// The interface polygon Γ.
    pub fn interface(&self) -> &Curve {
        &self.interface
    }

    /// The outer boundary polygon ∂Ω.
    pub fn boundary(&self) -> &Curve {
        &self.boundary
    }

    pub fn interface_edges(&self) -> Vec<[usize; 2]> {
        self.interface.edges().collect()
    }

    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.boundary.edges().collect()
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn signed_area(&self, tri: &Triangle) -> f64 {
        let [a, b, c] = tri.nodes.map(|n| self.nodes[n]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.signed_area(t)).sum()
    }

    fn validate(&self) -> Result<()> {
        let radius = |n: usize| self.nodes[n][0].hypot(self.nodes[n][1]);
        for (curve, r, name) in [
            (&self.interface, INTERFACE_RADIUS, "interface"),
            (&self.boundary, OUTER_RADIUS, "boundary"),
        ] {
            for &n in curve.nodes() {
                let [x, y] = self.nodes[n];
                if (x * x + y * y - r * r).abs() > ON_CIRCLE_TOL {
                    return Err(Error::MeshFormat(format!(
                        "{name} node {n} is not on the circle of radius {r}"
                    )));
                }
            }
        }
        for (i, tri) in self.triangles.iter().enumerate() {
            if tri.nodes.iter().any(|&n| n >= self.nodes.len()) {
                return Err(Error::MeshFormat(format!("triangle {i} references a missing node")));
            }
            if self.signed_area(tri) <= 0.0 {
                return Err(Error::MeshFormat(format!("triangle {i} has non-positive area")));
            }
            let straddles = tri.nodes.iter().any(|&n| match tri.region {
                Region::Inner => radius(n) > INTERFACE_RADIUS + ON_CIRCLE_TOL,
                Region::Outer => radius(n) < INTERFACE_RADIUS - ON_CIRCLE_TOL,
            });
            if straddles {
                return Err(Error::MeshFormat(format!("triangle {i} crosses the interface")));
            }
        }
        Ok(())
    }
}

/// Generates the structured polar mesh.
///
/// Rings sit at `0.5·j/n_r_inner` (j = 1..n_r_inner) and
/// `0.5 + 0.5·j/n_r_outer` (j = 1..n_r_outer), each carrying `n_theta`
/// equally spaced nodes at angles `2πi/n_theta`. Every annular band is
/// split into `2·n_theta` triangles and the innermost disk is a fan around
/// the origin.
pub fn generate_disk_mesh(n_r_inner: usize, n_r_outer: usize, n_theta: usize) -> Result<Mesh> {
    if n_r_inner == 0 || n_r_outer == 0 {
        return param(format!(
            "ring counts must be positive (got n_r_inner={n_r_inner}, n_r_outer={n_r_outer})"
        ));
    }
    if n_theta < 8 || !n_theta.is_multiple_of(2) {
        return param(format!("n_theta must be even and at least 8 (got {n_theta})"));
    }

    let rings = n_r_inner + n_r_outer;
    let radius = |j: usize| {
        if j <= n_r_inner {
            INTERFACE_RADIUS * j as f64 / n_r_inner as f64
        } else {
            INTERFACE_RADIUS + (OUTER_RADIUS - INTERFACE_RADIUS) * (j - n_r_inner) as f64 / n_r_outer as f64
        }
    };
    let angle = |i: usize| TAU * i as f64 / n_theta as f64;
    // ring j in 1..=rings, angular index i in 0..n_theta
    let id = |j: usize, i: usize| 1 + (j - 1) * n_theta + i % n_theta;

    let mut nodes = Vec::with_capacity(1 + rings * n_theta);
    nodes.push([0.0, 0.0]);
    for j in 1..=rings {
        let r = radius(j);
        for i in 0..n_theta {
            let (s, c) = angle(i).sin_cos();
            nodes.push([r * c, r * s]);
        }
    }

    let mut triangles = Vec::with_capacity(n_theta * (2 * rings - 1));
    for i in 0..n_theta {
        triangles.push(Triangle {
            nodes: [0, id(1, i), id(1, i + 1)],
            region: Region::Inner,
        });
    }
    for j in 1..rings {
        let region = if j < n_r_inner { Region::Inner } else { Region::Outer };
        for i in 0..n_theta {
            let (a, b) = (id(j, i), id(j, i + 1));
            let (c, d) = (id(j + 1, i + 1), id(j + 1, i));
            triangles.push(Triangle {
                nodes: [a, d, c],
                region,
            });
            triangles.push(Triangle {
                nodes: [a, c, b],
                region,
            });
        }
    }

    let ring_edges = |j: usize| -> Vec<[usize; 2]> { (0..n_theta).map(|i| [id(j, i), id(j, i + 1)]).collect() };
    let interface = Curve::with_angles(
        &nodes,
        (0..n_theta).map(|i| id(n_r_inner, i)).collect(),
        (0..n_theta).map(angle).collect(),
    );
    let boundary = Curve::with_angles(
        &nodes,
        (0..n_theta).map(|i| id(rings, i)).collect(),
        (0..n_theta).map(angle).collect(),
    );
    debug_assert_eq!(interface.edges().collect::<Vec<_>>(), ring_edges(n_r_inner));

    let mut node_angle = vec![None; nodes.len()];
    for curve in [&interface, &boundary] {
        for (&n, &theta) in curve.nodes().iter().zip(curve.angles()) {
            node_angle[n] = Some(theta);
        }
    }
    let h = max_edge_length(&nodes, &triangles);
    let mesh = Mesh {
        nodes,
        node_angle,
        triangles,
        interface,
        boundary,
        h,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn max_edge_length(nodes: &[[f64; 2]], triangles: &[Triangle]) -> f64 {
    let mut h: f64 = 0.0;
    for tri in triangles {
        for k in 0..3 {
            let p = nodes[tri.nodes[k]];
            let q = nodes[tri.nodes[(k + 1) % 3]];
            h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smallest_mesh_counts() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        assert_eq!(mesh.node_count(), 17);
        assert_eq!(mesh.triangles().len(), 24);
        assert_eq!(mesh.interface().len(), 8);
        assert_eq!(mesh.boundary().len(), 8);
    }

    #[test]
    fn interface_ring_is_exact() {
        let mesh = generate_disk_mesh(2, 2, 8).unwrap();
        // ring index n_r_inner = 2 holds nodes 1 + 8 .. 1 + 16
        for n in 9..17 {
            let [x, y] = mesh.nodes()[n];
            assert!((x * x + y * y - 0.25).abs() <= 1e-12);
        }
        assert_eq!(mesh.interface().nodes(), (9..17).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn mesh_size_halves_under_refinement() {
        let coarse = generate_disk_mesh(2, 2, 32).unwrap();
        let fine = generate_disk_mesh(4, 4, 64).unwrap();
        let ratio = coarse.h() / fine.h();
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(generate_disk_mesh(0, 1, 8), Err(Error::Parameter(_))));
        assert!(matches!(generate_disk_mesh(1, 0, 8), Err(Error::Parameter(_))));
        assert!(matches!(generate_disk_mesh(1, 1, 6), Err(Error::Parameter(_))));
        assert!(matches!(generate_disk_mesh(1, 1, 9), Err(Error::Parameter(_))));
    }

    #[test]
    fn area_and_interface_length() {
        let mesh = generate_disk_mesh(4, 4, 64).unwrap();
        assert!(mesh.triangles().iter().all(|t| mesh.signed_area(t) > 0.0));
        // inscribed 64-gon: relative area defect is about (2π/64)²/6
        assert!((mesh.total_area() - PI).abs() / PI < 2e-3);
        let n = 64.0;
        let expected = PI * (0.5 * 2.0) * ((PI / n).sin() / (PI / n));
        assert!((mesh.interface().total_length() - expected).abs() < 1e-13);
    }

    #[test]
    fn regions_do_not_straddle() {
        let mesh = generate_disk_mesh(3, 2, 16).unwrap();
        let inner = mesh.triangles().iter().filter(|t| t.region == Region::Inner).count();
        // fan + 2 bands of 32 triangles inside
        assert_eq!(inner, 16 + 2 * 32);
        assert_eq!(mesh.triangles().len() - inner, 2 * 32);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_disk_mesh(3, 3, 24).unwrap();
        let b = generate_disk_mesh(3, 3, 24).unwrap();
        assert_eq!(a, b);
    }
}
