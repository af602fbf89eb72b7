use crate::error::{param, Result};
use crate::mesh::{Curve, Mesh, PartitionSpec, GAUSS_POINTS};

macro_rules! nodal_fn {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Self {
                $name(values)
            }

            pub fn zeros(len: usize) -> Self {
                $name(vec![0.0; len])
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_values(self) -> Vec<f64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn scaled(&self, factor: f64) -> Self {
                $name(self.0.iter().map(|v| v * factor).collect())
            }

            /// `self + factor·other`
            pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
                assert_eq!(self.len(), other.len());
                $name(self.0.iter().zip(&other.0).map(|(a, b)| a + factor * b).collect())
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }
    };
}

nodal_fn!(
    /// Piecewise-linear function on the interface Γ, one value per
    /// interface vertex in cyclic order.
    InterfaceFn
);
nodal_fn!(
    /// Piecewise-linear function on the boundary ∂Ω, one value per
    /// boundary vertex in cyclic order.
    BoundaryFn
);
nodal_fn!(
    /// Nodal P1 field on the whole mesh.
    Field
);

impl InterfaceFn {
    /// Samples `f(θ)` at the interface vertices.
    pub fn from_angle_fn(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Self {
        InterfaceFn(mesh.interface().angles().iter().map(|&t| f(t)).collect())
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        InterfaceFn(vec![value; mesh.interface().len()])
    }

    /// Nodal interpolant of the indicator of a set of interface edges.
    /// Vertices shared between a selected and an unselected edge take the
    /// value one half.
    pub fn edge_indicator(curve: &Curve, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), curve.len());
        let n = curve.len();
        let values = (0..n)
            .map(|i| {
                let before = mask[(i + n - 1) % n];
                let after = mask[i];
                match (before, after) {
                    (true, true) => 1.0,
                    (false, false) => 0.0,
                    _ => 0.5,
                }
            })
            .collect();
        InterfaceFn(values)
    }

    pub(crate) fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.interface().len() {
            return param(format!(
                "interface function has {} values, the mesh has {} interface nodes",
                self.len(),
                mesh.interface().len()
            ));
        }
        if !self.is_finite() {
            return param("interface function has non-finite values");
        }
        Ok(())
    }
}

impl BoundaryFn {
    pub fn from_angle_fn(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Self {
        BoundaryFn(mesh.boundary().angles().iter().map(|&t| f(t)).collect())
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        BoundaryFn(vec![value; mesh.boundary().len()])
    }

    pub(crate) fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.boundary().len() {
            return param(format!(
                "boundary function has {} values, the mesh has {} boundary nodes",
                self.len(),
                mesh.boundary().len()
            ));
        }
        if !self.is_finite() {
            return param("boundary function has non-finite values");
        }
        Ok(())
    }
}

impl Field {
    pub(crate) fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.node_count() {
            return param(format!(
                "field has {} values, the mesh has {} nodes",
                self.len(),
                mesh.node_count()
            ));
        }
        Ok(())
    }
}

/// Robin coefficient as a possibly discontinuous piecewise-linear function
/// on the interface: each edge stores its own endpoint values.
///
/// A nodal [`InterfaceFn`] gives the continuous case; piecewise constants on
/// a [`PartitionSpec`] give equal endpoint values on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinCoefficient {
    ends: Vec<[f64; 2]>,
}

impl RobinCoefficient {
    pub fn from_nodal(values: &InterfaceFn) -> Self {
        let v = values.values();
        let n = v.len();
        RobinCoefficient {
            ends: (0..n).map(|e| [v[e], v[(e + 1) % n]]).collect(),
        }
    }

    /// One constant per interface edge.
    pub fn per_edge(values: &[f64]) -> Self {
        RobinCoefficient {
            ends: values.iter().map(|&c| [c, c]).collect(),
        }
    }

    /// One constant per arc of a partition.
    pub fn per_arc(partition: &PartitionSpec, arc_values: &[f64]) -> Result<Self> {
        if arc_values.len() != partition.arcs() {
            return param(format!(
                "expected {} arc values, got {}",
                partition.arcs(),
                arc_values.len()
            ));
        }
        let per_edge: Vec<f64> = partition.edge_arcs().iter().map(|&a| arc_values[a]).collect();
        Ok(Self::per_edge(&per_edge))
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        RobinCoefficient {
            ends: vec![[value, value]; mesh.interface().len()],
        }
    }

    pub fn edge_count(&self) -> usize {
        self.ends.len()
    }

    pub fn edge_ends(&self, e: usize) -> [f64; 2] {
        self.ends[e]
    }

    /// Value on edge `e` at reference coordinate `xi ∈ [0, 1]`.
    #[inline]
    pub fn at(&self, e: usize, xi: f64) -> f64 {
        let [a, b] = self.ends[e];
        (1.0 - xi) * a + xi * b
    }

    /// Values at the two Gauss points of edge `e`.
    #[inline]
    pub fn at_gauss(&self, e: usize) -> [f64; 2] {
        GAUSS_POINTS.map(|xi| self.at(e, xi))
    }

    pub fn min(&self) -> f64 {
        self.ends.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.ends.iter().flatten().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// `‖self − other‖_∞`, attained at an edge endpoint.
    pub fn sup_distance(&self, other: &RobinCoefficient) -> f64 {
        assert_eq!(self.edge_count(), other.edge_count());
        self.ends
            .iter()
            .flatten()
            .zip(other.ends.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Pointwise `self ≤ other` on the whole interface.
    pub fn is_below(&self, other: &RobinCoefficient) -> bool {
        self.edge_count() == other.edge_count()
            && self
                .ends
                .iter()
                .flatten()
                .zip(other.ends.iter().flatten())
                .all(|(a, b)| a <= b)
    }

    pub fn is_finite(&self) -> bool {
        self.ends.iter().flatten().all(|v| v.is_finite())
    }
}

impl From<&InterfaceFn> for RobinCoefficient {
    fn from(values: &InterfaceFn) -> Self {
        RobinCoefficient::from_nodal(values)
    }
}

impl From<InterfaceFn> for RobinCoefficient {
    fn from(values: InterfaceFn) -> Self {
        RobinCoefficient::from_nodal(&values)
    }
}

impl From<&RobinCoefficient> for RobinCoefficient {
    fn from(value: &RobinCoefficient) -> Self {
        value.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disk_mesh, interface_partition};

    #[test]
    fn nodal_coefficient_is_continuous() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        let g = InterfaceFn::from_angle_fn(&mesh, |t| 1.0 + t.cos());
        let c = RobinCoefficient::from_nodal(&g);
        for e in 0..8 {
            assert_eq!(c.at(e, 1.0), c.at((e + 1) % 8, 0.0));
        }
        assert_eq!(c.min(), 0.0 + 1.0 + (std::f64::consts::PI).cos());
    }

    #[test]
    fn per_arc_values() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        let p = interface_partition(&mesh, 4).unwrap();
        let c = RobinCoefficient::per_arc(&p, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(c.edge_ends(0), [1.0, 1.0]);
        assert_eq!(c.edge_ends(7), [4.0, 4.0]);
        assert!(RobinCoefficient::per_arc(&p, &[1.0]).is_err());
        let d = RobinCoefficient::per_arc(&p, &[1.5, 2.0, 3.0, 4.0]).unwrap();
        assert!(c.is_below(&d));
        assert!(!d.is_below(&c));
        assert_eq!(c.sup_distance(&d), 0.5);
    }

    #[test]
    fn indicator_has_half_values_at_arc_ends() {
        let mesh = generate_disk_mesh(1, 1, 8).unwrap();
        let mask = [true, true, false, false, false, false, false, false];
        let chi = InterfaceFn::edge_indicator(mesh.interface(), &mask);
        assert_eq!(chi.values(), &[0.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
