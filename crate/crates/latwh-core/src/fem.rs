//! Exact finite-element construction that reproduces the lattice stencil.
//!
//! Linear triangular elements on a unit-square grid, with each square split
//! along one of its two diagonals, are assembled in exact rational
//! arithmetic. Averaging the two split choices and lumping the averaged
//! mass matrix yields, row for row, the discrete Helmholtz stencil of
//! [`crate::lattice::stencil_row`], including every boundary row. The
//! equivalence is checked entry by entry over a whole domain by
//! [`stencil_equivalence`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::lattice::{stencil_row, LatticeDomain, LatticeError, Node};

/// Exact rational coefficient type of the element matrices.
pub type Q = Rational64;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// Which diagonal splits each unit square into two triangles.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Partition {
    /// Diagonal from the lower-right to the upper-left corner.
    Diag1,
    /// Diagonal from the lower-left to the upper-right corner.
    Diag2,
}

/// Element stiffness `−∫∇φᵢ·∇φⱼ` of a linear triangle, exact.
pub fn triangle_stiffness(v: [(Q, Q); 3]) -> [[Q; 3]; 3] {
    let e = |i: usize| {
        let a = v[(i + 1) % 3];
        let b = v[(i + 2) % 3];
        (a.0 - b.0, a.1 - b.1)
    };
    let det = (v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[1].1 - v[0].1) * (v[2].0 - v[0].0);
    let four_area = det.abs() * q(2);
    let mut k = [[Q::zero(); 3]; 3];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let (ei, ej) = (e(i), e(j));
            *entry = -(ei.0 * ej.0 + ei.1 * ej.1) / four_area;
        }
    }
    k
}

/// Element mass `∫φᵢφⱼ` of a linear triangle, exact:
/// `area/12·(1 + δᵢⱼ)`.
pub fn triangle_mass(v: [(Q, Q); 3]) -> [[Q; 3]; 3] {
    let det = (v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[1].1 - v[0].1) * (v[2].0 - v[0].0);
    let area = det.abs() / q(2);
    let mut m = [[Q::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = area / q(12) * q(if i == j { 2 } else { 1 });
        }
    }
    m
}

/// Unit-square corner coordinates in local order: lower-left, lower-right,
/// upper-left, upper-right.
const CORNERS: [(i64, i64); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

fn partition_triangles(p: Partition) -> [[usize; 3]; 2] {
    match p {
        Partition::Diag1 => [[0, 1, 2], [3, 2, 1]],
        Partition::Diag2 => [[1, 0, 3], [2, 0, 3]],
    }
}

type TriangleElement = fn([(Q, Q); 3]) -> [[Q; 3]; 3];

fn accumulate_square(p: Partition, element: TriangleElement) -> [[Q; 4]; 4] {
    let mut out = [[Q::zero(); 4]; 4];
    for tri in partition_triangles(p) {
        let verts = [
            (q(CORNERS[tri[0]].0), q(CORNERS[tri[0]].1)),
            (q(CORNERS[tri[1]].0), q(CORNERS[tri[1]].1)),
            (q(CORNERS[tri[2]].0), q(CORNERS[tri[2]].1)),
        ];
        let e = element(verts);
        for a in 0..3 {
            for b in 0..3 {
                out[tri[a]][tri[b]] += e[a][b];
            }
        }
    }
    out
}

/// Stiffness of one unit square under the given partition (the two
/// partitions give the same matrix).
pub fn square_stiffness(p: Partition) -> [[Q; 4]; 4] {
    accumulate_square(p, triangle_stiffness)
}

/// Consistent mass of one unit square under the given partition.
pub fn square_mass(p: Partition) -> [[Q; 4]; 4] {
    accumulate_square(p, triangle_mass)
}

/// Consistent mass averaged over the two partitions.
pub fn square_mass_averaged() -> [[Q; 4]; 4] {
    let m1 = square_mass(Partition::Diag1);
    let m2 = square_mass(Partition::Diag2);
    let mut out = [[Q::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (m1[i][j] + m2[i][j]) / q(2);
        }
    }
    out
}

/// Row-sum lumping of the averaged mass: `¼·I`.
pub fn square_mass_lumped() -> [[Q; 4]; 4] {
    let avg = square_mass_averaged();
    let mut out = [[Q::zero(); 4]; 4];
    for i in 0..4 {
        out[i][i] = avg[i].iter().sum();
    }
    out
}

/// Globally assembled stiffness, consistent (averaged) mass, and lumped
/// mass over every unit square of a two-dimensional domain.
#[derive(Clone, Debug)]
pub struct FemSystem {
    stiffness: BTreeMap<Node, BTreeMap<Node, Q>>,
    mass: BTreeMap<Node, BTreeMap<Node, Q>>,
    lumped_mass: BTreeMap<Node, Q>,
}

impl FemSystem {
    /// Assembles every unit square whose four corners lie in the domain,
    /// using partition-averaged element matrices.
    pub fn assemble(domain: &LatticeDomain) -> Result<Self, LatticeError> {
        if domain.dim() != 2 {
            return Err(LatticeError::DimensionMismatch);
        }
        let k1 = square_stiffness(Partition::Diag1);
        let k2 = square_stiffness(Partition::Diag2);
        let mut ks = [[Q::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                ks[i][j] = (k1[i][j] + k2[i][j]) / q(2);
            }
        }
        let ms = square_mass_averaged();

        let mut stiffness: BTreeMap<Node, BTreeMap<Node, Q>> = BTreeMap::new();
        let mut mass: BTreeMap<Node, BTreeMap<Node, Q>> = BTreeMap::new();
        for node in domain.nodes() {
            let corners: Vec<Node> = CORNERS
                .iter()
                .map(|&(dm, dn)| Node::xy(node.m + dm as i32, node.n + dn as i32))
                .collect();
            if !corners.iter().all(|c| domain.contains(*c)) {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    *stiffness
                        .entry(corners[a])
                        .or_default()
                        .entry(corners[b])
                        .or_insert_with(Q::zero) += ks[a][b];
                    *mass
                        .entry(corners[a])
                        .or_default()
                        .entry(corners[b])
                        .or_insert_with(Q::zero) += ms[a][b];
                }
            }
        }
        let lumped_mass = mass
            .iter()
            .map(|(node, row)| (*node, row.values().sum()))
            .collect();
        Ok(Self {
            stiffness,
            mass,
            lumped_mass,
        })
    }

    pub fn stiffness_row(&self, node: Node) -> Option<&BTreeMap<Node, Q>> {
        self.stiffness.get(&node)
    }

    pub fn mass_row(&self, node: Node) -> Option<&BTreeMap<Node, Q>> {
        self.mass.get(&node)
    }

    pub fn lumped_mass(&self, node: Node) -> Q {
        self.lumped_mass.get(&node).copied().unwrap_or_else(Q::zero)
    }
}

/// One row of the element-by-element comparison: the assembled
/// stiffness/lumped-mass pair against the stencil's constant/mass
/// coefficients.
#[derive(Clone, Debug)]
pub struct RowMismatch {
    pub node: Node,
    pub neighbor: Node,
    pub fem_mass: Q,
    pub fem_const: Q,
    pub stencil_mass: Q,
    pub stencil_const: Q,
}

/// Outcome of comparing every assembled row of a domain with the lattice
/// stencil.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub rows: usize,
    pub mismatches: Vec<RowMismatch>,
}

impl EquivalenceReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares, for every node of the domain, the assembled row
/// `stiffness + k̃²·lumped mass` with the stencil row, coefficient by
/// coefficient in exact arithmetic.
pub fn stencil_equivalence(domain: &LatticeDomain) -> Result<EquivalenceReport, LatticeError> {
    let system = FemSystem::assemble(domain)?;
    let mut report = EquivalenceReport {
        rows: 0,
        mismatches: Vec::new(),
    };
    let empty = BTreeMap::new();
    for node in domain.nodes() {
        report.rows += 1;
        let terms = stencil_row(domain, node)?;
        let fem_row = system.stiffness_row(node).unwrap_or(&empty);
        let mut neighbors: Vec<Node> = terms.iter().map(|t| t.node).collect();
        for nb in fem_row.keys() {
            if !neighbors.contains(nb) {
                neighbors.push(*nb);
            }
        }
        for nb in neighbors {
            let term = terms.iter().find(|t| t.node == nb);
            let stencil_mass = Q::new(term.map_or(0, |t| t.mass8), 8);
            let stencil_const = Q::new(term.map_or(0, |t| t.const8), 8);
            let fem_const = fem_row.get(&nb).copied().unwrap_or_else(Q::zero);
            let fem_mass = if nb == node {
                system.lumped_mass(node)
            } else {
                Q::zero()
            };
            if fem_mass != stencil_mass || fem_const != stencil_const {
                report.mismatches.push(RowMismatch {
                    node,
                    neighbor: nb,
                    fem_mass,
                    fem_const,
                    stencil_mass,
                    stencil_const,
                });
            }
        }
    }
    Ok(report)
}
