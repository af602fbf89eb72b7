use std::f64::consts::TAU;

use super::Mesh;
use crate::error::{param, Result};

/// Partition of the interface into `M` contiguous arcs of whole edges.
///
/// Arcs are indexed from 0 in code; reports print them 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    arcs: usize,
    arc_of_edge: Vec<usize>,
    arc_bounds: Vec<(f64, f64)>,
}

impl PartitionSpec {
    pub fn arcs(&self) -> usize {
        self.arcs
    }

    pub fn arc_of_edge(&self, edge: usize) -> usize {
        self.arc_of_edge[edge]
    }

    pub fn edge_arcs(&self) -> &[usize] {
        &self.arc_of_edge
    }

    pub fn edge_count(&self) -> usize {
        self.arc_of_edge.len()
    }

    /// `(start, end)` angles of an arc; the last arc ends at 2π.
    pub fn arc_bounds(&self, arc: usize) -> (f64, f64) {
        self.arc_bounds[arc]
    }

    pub fn edges_of_arc(&self, arc: usize) -> impl Iterator<Item = usize> + '_ {
        self.arc_of_edge
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == arc)
            .map(|(e, _)| e)
    }

    /// Mask over interface edges selecting a set of arcs.
    pub fn edge_mask(&self, arcs: &[usize]) -> Vec<bool> {
        self.arc_of_edge.iter().map(|a| arcs.contains(a)).collect()
    }
}

/// Splits the interface into `arcs` contiguous arcs of (nearly) equal
/// angular extent, starting at θ = 0.
pub fn interface_partition(mesh: &Mesh, arcs: usize) -> Result<PartitionSpec> {
    let curve = mesh.interface();
    let edges = curve.len();
    if arcs == 0 || arcs > edges {
        return param(format!("partition needs between 1 and {edges} arcs (got {arcs})"));
    }
    let arc_of_edge: Vec<usize> = (0..edges).map(|e| e * arcs / edges).collect();
    let mut arc_bounds = Vec::with_capacity(arcs);
    for m in 0..arcs {
        let first = arc_of_edge
            .iter()
            .position(|&a| a == m)
            .expect("every arc owns an edge");
        let start = curve.angles()[first];
        let end = match arc_of_edge.iter().position(|&a| a == m + 1) {
            Some(next) => curve.angles()[next],
            None => TAU,
        };
        arc_bounds.push((start, end));
    }
    Ok(PartitionSpec {
        arcs,
        arc_of_edge,
        arc_bounds,
    })
}
