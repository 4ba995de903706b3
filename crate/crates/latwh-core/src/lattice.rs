//! Square and cubic lattice domains for the discrete Helmholtz equation:
//! interior five/seven-point stencils, boundary weight rows, classification
//! of rectilinear boundary nodes, discrete normal derivatives, and the
//! discrete Green's identity.
//!
//! All operator rows come from cell counting on the unit squares (2D) or
//! cubes (3D) spanned by the domain's nodes: a neighbor edge carries weight
//! `(#cells containing the edge) / 2` in 2D and `/ 4` in 3D, and a node
//! carries the self-weight `(#cells containing the node) * (k̃² - 4) / 4` in
//! 2D and `* (k̃² - 6) / 8` in 3D. Interior rows (all cells present) reduce
//! to the usual five/seven-point Helmholtz stencil, boundary rows reproduce
//! the right-angle/straight-line weight tables, and the resulting combined
//! operator is symmetric, which is what makes the summation-by-parts Green's
//! identity exact.
//!
//! A node belongs to the interior when every surrounding cell is occupied;
//! otherwise it is a boundary node. (A re-entrant corner keeps all its axis
//! neighbors, so testing neighbor presence alone would misclassify it.)

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::C;

/// A lattice node. Two-dimensional domains keep `l = 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Node {
    pub m: i32,
    pub n: i32,
    pub l: i32,
}

impl Node {
    /// Node in the plane `l = 0`.
    pub const fn xy(m: i32, n: i32) -> Self {
        Self { m, n, l: 0 }
    }

    /// Three-dimensional node.
    pub const fn xyz(m: i32, n: i32, l: i32) -> Self {
        Self { m, n, l }
    }

    fn shifted(mut self, axis: usize, by: i32) -> Self {
        match axis {
            0 => self.m += by,
            1 => self.n += by,
            _ => self.l += by,
        }
        self
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.m, self.n, self.l)
    }
}

/// Errors from domain construction and lattice operators.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LatticeError {
    /// An extent has fewer than three nodes along some side.
    DegenerateExtent,
    /// Unsupported dimension, or a node inconsistent with the dimension.
    DimensionMismatch,
    /// The node pattern near the given node is not a rectilinear boundary.
    NonRectilinearBoundary(Node),
    /// The node is not a boundary node of the domain.
    NotBoundary(Node),
    /// The node is outside the domain.
    OutsideDomain(Node),
    /// A stencil neighbor value is missing from the field.
    MissingNeighborValue(Node),
    /// A field value required at the given node is missing.
    MissingFieldValue(Node),
    /// The supplied boundary class does not match the node.
    UnsupportedClass,
    /// A boundary node could not be classified.
    DomainClassificationFailed(Node),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegenerateExtent => {
                write!(f, "degenerate extent: each side needs at least three nodes")
            }
            Self::DimensionMismatch => write!(f, "dimension mismatch"),
            Self::NonRectilinearBoundary(v) => {
                write!(f, "non-rectilinear boundary near node {v}")
            }
            Self::NotBoundary(v) => write!(f, "node {v} is not a boundary node"),
            Self::OutsideDomain(v) => write!(f, "node {v} is outside the domain"),
            Self::MissingNeighborValue(v) => write!(f, "missing neighbor value at node {v}"),
            Self::MissingFieldValue(v) => write!(f, "missing field value at node {v}"),
            Self::UnsupportedClass => write!(f, "boundary class does not match the node"),
            Self::DomainClassificationFailed(v) => {
                write!(f, "could not classify boundary node {v}")
            }
        }
    }
}

impl core::error::Error for LatticeError {}

/// Classification of a boundary node of a rectilinear domain.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryClass {
    /// 2D corner whose right angle lies outside the domain (re-entrant
    /// corner; three occupied squares around the node).
    ExternalRightAngle,
    /// 2D corner whose right angle lies inside the domain (convex corner;
    /// one occupied square).
    InternalRightAngle,
    /// 2D node on a straight boundary line (two edge-adjacent squares).
    StraightLine,
    /// 3D node on a planar face (four occupied cubes forming a half block).
    Planar3D,
    /// Any other 3D rectilinear boundary node: `l` occupied cubes around the
    /// node, `p` the smallest edge cube count toward an in-domain boundary
    /// neighbor. Per-neighbor weights are `(edge cube count) / 4`.
    Other3D { p: u8, l: u8 },
}

/// A finite rectilinear union of lattice rectangles or boxes.
///
/// Construction validates that every boundary node classifies to one of the
/// supported patterns, so downstream operators cannot encounter an
/// unclassifiable node.
#[derive(Clone, Debug)]
pub struct LatticeDomain {
    dim: u8,
    nodes: BTreeSet<Node>,
    interior: BTreeSet<Node>,
    boundary: BTreeSet<Node>,
}

fn check_extent(extent: (i32, i32)) -> Result<(), LatticeError> {
    if extent.1 - extent.0 < 2 {
        Err(LatticeError::DegenerateExtent)
    } else {
        Ok(())
    }
}

fn directions(dim: u8) -> impl Iterator<Item = (usize, i32)> {
    (0..dim as usize).flat_map(|d| [(d, 1), (d, -1)])
}

impl LatticeDomain {
    /// Rectangle `m_extent.0..=m_extent.1 × n_extent.0..=n_extent.1`.
    pub fn build_rectangle(
        m_extent: (i32, i32),
        n_extent: (i32, i32),
    ) -> Result<Self, LatticeError> {
        check_extent(m_extent)?;
        check_extent(n_extent)?;
        let mut nodes = BTreeSet::new();
        for m in m_extent.0..=m_extent.1 {
            for n in n_extent.0..=n_extent.1 {
                nodes.insert(Node::xy(m, n));
            }
        }
        Self::from_nodes(2, nodes)
    }

    /// Box spanning the three inclusive extents.
    pub fn build_box(
        m_extent: (i32, i32),
        n_extent: (i32, i32),
        l_extent: (i32, i32),
    ) -> Result<Self, LatticeError> {
        check_extent(m_extent)?;
        check_extent(n_extent)?;
        check_extent(l_extent)?;
        let mut nodes = BTreeSet::new();
        for m in m_extent.0..=m_extent.1 {
            for n in n_extent.0..=n_extent.1 {
                for l in l_extent.0..=l_extent.1 {
                    nodes.insert(Node::xyz(m, n, l));
                }
            }
        }
        Self::from_nodes(3, nodes)
    }

    /// L-shape: the rectangle minus its upper-right block
    /// `{m > cut.0, n > cut.1}`. The re-entrant corner sits at `cut`; every
    /// side of the L keeps at least three nodes.
    pub fn build_l_shape(
        m_extent: (i32, i32),
        n_extent: (i32, i32),
        cut: (i32, i32),
    ) -> Result<Self, LatticeError> {
        if cut.0 - m_extent.0 < 2
            || m_extent.1 - cut.0 < 2
            || cut.1 - n_extent.0 < 2
            || n_extent.1 - cut.1 < 2
        {
            return Err(LatticeError::DegenerateExtent);
        }
        let mut nodes = BTreeSet::new();
        for m in m_extent.0..=m_extent.1 {
            for n in n_extent.0..=n_extent.1 {
                if m > cut.0 && n > cut.1 {
                    continue;
                }
                nodes.insert(Node::xy(m, n));
            }
        }
        Self::from_nodes(2, nodes)
    }

    /// Builds a domain from an explicit node set, validating that every node
    /// is either cell-interior or a classifiable rectilinear boundary node.
    pub fn from_nodes(dim: u8, nodes: BTreeSet<Node>) -> Result<Self, LatticeError> {
        if dim != 2 && dim != 3 {
            return Err(LatticeError::DimensionMismatch);
        }
        if dim == 2 && nodes.iter().any(|v| v.l != 0) {
            return Err(LatticeError::DimensionMismatch);
        }
        if nodes.is_empty() {
            return Err(LatticeError::DegenerateExtent);
        }
        let mut domain = Self {
            dim,
            nodes,
            interior: BTreeSet::new(),
            boundary: BTreeSet::new(),
        };
        let full = 1u8 << dim;
        for &v in &domain.nodes {
            if domain.node_cell_count(v) == full {
                domain.interior.insert(v);
            } else {
                domain.boundary.insert(v);
            }
        }
        domain.validate()?;
        Ok(domain)
    }

    fn validate(&self) -> Result<(), LatticeError> {
        for &v in &self.boundary {
            classify_boundary(self, v)?;
            for (d, s) in directions(self.dim) {
                let nb = v.shifted(d, s);
                if self.nodes.contains(&nb) && self.edge_cell_count(v, d, s) == 0 {
                    return Err(LatticeError::NonRectilinearBoundary(v));
                }
            }
        }
        Ok(())
    }

    /// Lattice dimension (2 or 3).
    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn contains(&self, node: Node) -> bool {
        self.nodes.contains(&node)
    }

    pub fn is_interior(&self, node: Node) -> bool {
        self.interior.contains(&node)
    }

    pub fn is_boundary(&self, node: Node) -> bool {
        self.boundary.contains(&node)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    /// All nodes in sorted order.
    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.nodes.iter().copied()
    }

    /// Interior (cell-complete) nodes in sorted order.
    pub fn interior(&self) -> impl Iterator<Item = Node> + '_ {
        self.interior.iter().copied()
    }

    /// Boundary nodes in sorted order.
    pub fn boundary(&self) -> impl Iterator<Item = Node> + '_ {
        self.boundary.iter().copied()
    }

    fn cell_occupied(&self, corner: Node) -> bool {
        let dim = self.dim as usize;
        (0..1usize << dim).all(|bits| {
            let mut c = corner;
            for d in 0..dim {
                if bits >> d & 1 == 1 {
                    c = c.shifted(d, 1);
                }
            }
            self.nodes.contains(&c)
        })
    }

    fn node_cell_count(&self, v: Node) -> u8 {
        let dim = self.dim as usize;
        let mut count = 0;
        for bits in 0..1usize << dim {
            let mut corner = v;
            for d in 0..dim {
                if bits >> d & 1 == 1 {
                    corner = corner.shifted(d, -1);
                }
            }
            if self.cell_occupied(corner) {
                count += 1;
            }
        }
        count
    }

    fn edge_cell_count(&self, v: Node, axis: usize, step: i32) -> u8 {
        let low = if step > 0 { v } else { v.shifted(axis, -1) };
        let dim = self.dim as usize;
        let others: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
        let mut count = 0;
        for bits in 0..1usize << others.len() {
            let mut corner = low;
            for (i, &d) in others.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    corner = corner.shifted(d, -1);
                }
            }
            if self.cell_occupied(corner) {
                count += 1;
            }
        }
        count
    }
}

fn octants_face_connected(occ: &[bool; 8]) -> bool {
    let total = occ.iter().filter(|&&o| o).count();
    let Some(start) = occ.iter().position(|&o| o) else {
        return false;
    };
    let mut seen = [false; 8];
    seen[start] = true;
    let mut stack = vec![start];
    let mut visited = 0;
    while let Some(i) = stack.pop() {
        visited += 1;
        for d in 0..3 {
            let j = i ^ (1 << d);
            if occ[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    visited == total
}

/// Classifies a boundary node by the pattern of occupied cells around it.
pub fn classify_boundary(domain: &LatticeDomain, node: Node) -> Result<BoundaryClass, LatticeError> {
    if !domain.contains(node) {
        return Err(LatticeError::OutsideDomain(node));
    }
    if !domain.is_boundary(node) {
        return Err(LatticeError::NotBoundary(node));
    }
    if domain.dim == 2 {
        let mut occ = [[false; 2]; 2];
        let mut total = 0;
        for (i, em) in [-1, 0].into_iter().enumerate() {
            for (j, en) in [-1, 0].into_iter().enumerate() {
                if domain.cell_occupied(Node::xy(node.m + em, node.n + en)) {
                    occ[i][j] = true;
                    total += 1;
                }
            }
        }
        match total {
            1 => Ok(BoundaryClass::InternalRightAngle),
            3 => Ok(BoundaryClass::ExternalRightAngle),
            2 => {
                let adjacent = (occ[0][0] && occ[0][1])
                    || (occ[1][0] && occ[1][1])
                    || (occ[0][0] && occ[1][0])
                    || (occ[0][1] && occ[1][1]);
                if adjacent {
                    Ok(BoundaryClass::StraightLine)
                } else {
                    Err(LatticeError::NonRectilinearBoundary(node))
                }
            }
            _ => Err(LatticeError::NonRectilinearBoundary(node)),
        }
    } else {
        let mut occ = [false; 8];
        let mut total = 0u8;
        for (bits, slot) in occ.iter_mut().enumerate() {
            let corner = Node::xyz(
                node.m - (bits & 1) as i32,
                node.n - (bits >> 1 & 1) as i32,
                node.l - (bits >> 2 & 1) as i32,
            );
            if domain.cell_occupied(corner) {
                *slot = true;
                total += 1;
            }
        }
        if total == 0 || total == 8 {
            return Err(LatticeError::NonRectilinearBoundary(node));
        }
        for axis in 0..3 {
            for side in 0..2usize {
                if (0..8).all(|bits| occ[bits] == (bits >> axis & 1 == side)) {
                    return Ok(BoundaryClass::Planar3D);
                }
            }
        }
        if !octants_face_connected(&occ) {
            return Err(LatticeError::NonRectilinearBoundary(node));
        }
        let mut p = u8::MAX;
        for (d, s) in directions(3) {
            let nb = node.shifted(d, s);
            if domain.contains(nb) && domain.is_boundary(nb) {
                p = p.min(domain.edge_cell_count(node, d, s));
            }
        }
        if p == 0 || p == u8::MAX {
            return Err(LatticeError::NonRectilinearBoundary(node));
        }
        Ok(BoundaryClass::Other3D { p, l: total })
    }
}

/// One entry of an operator row; its weight is `(mass8·k̃² + const8) / 8`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RowTerm {
    pub node: Node,
    pub mass8: i64,
    pub const8: i64,
}

impl RowTerm {
    /// Complex weight at the given `k̃²`.
    pub fn value(&self, k2: C) -> C {
        (k2 * self.mass8 as f64 + self.const8 as f64) / 8.0
    }
}

/// Operator row at `node`: the interior Helmholtz stencil on interior nodes
/// and the boundary weight row on boundary nodes, as exact integer eighths.
/// Off-diagonal entries are symmetric across the whole domain.
pub fn stencil_row(domain: &LatticeDomain, node: Node) -> Result<Vec<RowTerm>, LatticeError> {
    if !domain.contains(node) {
        return Err(LatticeError::OutsideDomain(node));
    }
    let o = domain.node_cell_count(node) as i64;
    let (self_mass, self_const, nb_scale) = if domain.dim() == 2 {
        (2 * o, -8 * o, 4)
    } else {
        (o, -6 * o, 2)
    };
    let mut row = vec![RowTerm {
        node,
        mass8: self_mass,
        const8: self_const,
    }];
    for (d, s) in directions(domain.dim()) {
        let nb = node.shifted(d, s);
        if domain.contains(nb) {
            let c = domain.edge_cell_count(node, d, s) as i64;
            if c > 0 {
                row.push(RowTerm {
                    node: nb,
                    mass8: 0,
                    const8: nb_scale * c,
                });
            }
        }
    }
    row.sort_by_key(|t| t.node);
    Ok(row)
}

/// Complex-valued lattice field.
#[derive(Clone, Debug)]
pub struct Field {
    dim: u8,
    values: BTreeMap<Node, C>,
}

impl Field {
    /// Empty field over the plane `l = 0`.
    pub fn new_2d() -> Self {
        Self {
            dim: 2,
            values: BTreeMap::new(),
        }
    }

    /// Empty three-dimensional field.
    pub fn new_3d() -> Self {
        Self {
            dim: 3,
            values: BTreeMap::new(),
        }
    }

    /// Field over all nodes of the domain.
    pub fn from_fn(domain: &LatticeDomain, mut f: impl FnMut(Node) -> C) -> Self {
        let mut values = BTreeMap::new();
        for v in domain.nodes() {
            values.insert(v, f(v));
        }
        Self {
            dim: domain.dim(),
            values,
        }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    /// Inserts a value; panics if a 2D field is given a node with `l != 0`.
    pub fn insert(&mut self, node: Node, value: C) {
        assert!(
            self.dim == 3 || node.l == 0,
            "2D field given a node with l != 0"
        );
        self.values.insert(node, value);
    }

    pub fn get(&self, node: Node) -> Option<C> {
        self.values.get(&node).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries in node order.
    pub fn iter(&self) -> impl Iterator<Item = (Node, C)> + '_ {
        self.values.iter().map(|(&v, &c)| (v, c))
    }
}

fn field_value(u: &Field, node: Node) -> Result<C, LatticeError> {
    u.get(node).ok_or(LatticeError::MissingFieldValue(node))
}

fn apply_row(u: &Field, row: &[RowTerm], k2: C) -> Result<C, LatticeError> {
    let mut acc = C::zero();
    for term in row {
        let v = u
            .get(term.node)
            .ok_or(LatticeError::MissingNeighborValue(term.node))?;
        acc += term.value(k2) * v;
    }
    Ok(acc)
}

/// Five/seven-point Helmholtz residual `Δu(ν) + k̃²·u(ν) − f` at `node`.
pub fn helmholtz_residual(u: &Field, node: Node, k2: C, f: C) -> Result<C, LatticeError> {
    let center = field_value(u, node)?;
    let mut acc = (k2 - 2.0 * u.dim() as f64) * center;
    for (d, s) in directions(u.dim()) {
        let nb = node.shifted(d, s);
        acc += u.get(nb).ok_or(LatticeError::MissingNeighborValue(nb))?;
    }
    Ok(acc - f)
}

/// Discrete normal derivative at a boundary node: the boundary weight row
/// applied to `u`. The supplied class must match the node's classification.
pub fn normal_derivative(
    u: &Field,
    node: Node,
    k2: C,
    class: BoundaryClass,
    domain: &LatticeDomain,
) -> Result<C, LatticeError> {
    let actual = classify_boundary(domain, node)?;
    if actual != class {
        return Err(LatticeError::UnsupportedClass);
    }
    apply_row(u, &stencil_row(domain, node)?, k2)
}

/// Residual of the discrete Green's identity
/// `Σ_∂Ω (∂ν[u]·w − ∂ν[w]·u) − Σ_Ω (g·u − f·w)`,
/// where `f` and `g` are the interior Helmholtz sources of `u` and `w`.
pub fn greens_residual(
    u: &Field,
    w: &Field,
    f: &Field,
    g: &Field,
    domain: &LatticeDomain,
    k2: C,
) -> Result<C, LatticeError> {
    let mut lhs = C::zero();
    for v in domain.boundary() {
        classify_boundary(domain, v)
            .map_err(|_| LatticeError::DomainClassificationFailed(v))?;
        let row = stencil_row(domain, v)?;
        let du = apply_row(u, &row, k2)?;
        let dw = apply_row(w, &row, k2)?;
        lhs += du * field_value(w, v)? - dw * field_value(u, v)?;
    }
    let mut rhs = C::zero();
    for v in domain.interior() {
        rhs += field_value(g, v)? * field_value(u, v)? - field_value(f, v)? * field_value(w, v)?;
    }
    Ok(lhs - rhs)
}

/// Boundary derivative row of a half-plane along a straight line:
/// `½(u_prev + u_next) + u_inward + (k̃²/2 − 2)·u_center`.
pub fn straight_line_derivative(u_prev: C, u_next: C, u_inward: C, u_center: C, k2: C) -> C {
    0.5 * (u_prev + u_next) + u_inward + (k2 * 0.5 - 2.0) * u_center
}

/// Boundary derivative row of a half-space along a plane:
/// `½·Σ(in-plane neighbors) + u_inward + (k̃² − 6)/2·u_center`.
pub fn planar_derivative(u_in_plane: [C; 4], u_inward: C, u_center: C, k2: C) -> C {
    0.5 * u_in_plane.into_iter().sum::<C>() + u_inward + (k2 - 6.0) * 0.5 * u_center
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    /// Deterministic pseudo-random complex value per node.
    fn hash_field(node: Node, salt: u64) -> C {
        fn mix(mut x: u64) -> u64 {
            x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
            x ^ (x >> 31)
        }
        let seed = (node.m as u64)
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add((node.n as u64).wrapping_mul(0xc2b2ae3d27d4eb4f))
            .wrapping_add((node.l as u64).wrapping_mul(0x165667b19e3779f9))
            .wrapping_add(salt);
        let a = mix(seed);
        let b = mix(seed.wrapping_add(0x1234_5678_9abc_def0));
        let to_unit = |x: u64| (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        c(to_unit(a), to_unit(b))
    }

    #[test]
    fn rectangle_counts_and_classes() {
        let dom = LatticeDomain::build_rectangle((0, 4), (0, 3)).unwrap();
        assert_eq!(dom.node_count(), 20);
        assert_eq!(dom.interior_count(), 6);
        assert_eq!(dom.boundary_count(), 14);
        for corner in [
            Node::xy(0, 0),
            Node::xy(4, 0),
            Node::xy(0, 3),
            Node::xy(4, 3),
        ] {
            assert_eq!(
                classify_boundary(&dom, corner).unwrap(),
                BoundaryClass::InternalRightAngle
            );
        }
        assert_eq!(
            classify_boundary(&dom, Node::xy(2, 0)).unwrap(),
            BoundaryClass::StraightLine
        );
        assert_eq!(
            classify_boundary(&dom, Node::xy(1, 1)),
            Err(LatticeError::NotBoundary(Node::xy(1, 1)))
        );
        assert_eq!(
            classify_boundary(&dom, Node::xy(9, 9)),
            Err(LatticeError::OutsideDomain(Node::xy(9, 9)))
        );
    }

    #[test]
    fn degenerate_extents_rejected() {
        assert!(matches!(
            LatticeDomain::build_rectangle((0, 1), (0, 5)),
            Err(LatticeError::DegenerateExtent)
        ));
        assert!(matches!(
            LatticeDomain::build_box((0, 2), (0, 2), (0, 1)),
            Err(LatticeError::DegenerateExtent)
        ));
        assert!(matches!(
            LatticeDomain::build_l_shape((0, 5), (0, 5), (4, 3)),
            Err(LatticeError::DegenerateExtent)
        ));
    }

    #[test]
    fn l_shape_classes() {
        let dom = LatticeDomain::build_l_shape((0, 5), (0, 5), (3, 3)).unwrap();
        assert_eq!(dom.node_count(), 36 - 4);
        assert_eq!(
            classify_boundary(&dom, Node::xy(3, 3)).unwrap(),
            BoundaryClass::ExternalRightAngle
        );
        for corner in [
            Node::xy(0, 0),
            Node::xy(5, 0),
            Node::xy(0, 5),
            Node::xy(5, 3),
            Node::xy(3, 5),
        ] {
            assert_eq!(
                classify_boundary(&dom, corner).unwrap(),
                BoundaryClass::InternalRightAngle,
                "at {corner}"
            );
        }
        assert_eq!(
            classify_boundary(&dom, Node::xy(4, 3)).unwrap(),
            BoundaryClass::StraightLine
        );
        assert!(dom.is_interior(Node::xy(2, 3)));
    }

    #[test]
    fn box_classes() {
        let dom = LatticeDomain::build_box((0, 3), (0, 3), (0, 3)).unwrap();
        assert_eq!(dom.node_count(), 64);
        assert_eq!(dom.interior_count(), 8);
        assert_eq!(
            classify_boundary(&dom, Node::xyz(1, 1, 0)).unwrap(),
            BoundaryClass::Planar3D
        );
        assert_eq!(
            classify_boundary(&dom, Node::xyz(1, 0, 0)).unwrap(),
            BoundaryClass::Other3D { p: 1, l: 2 }
        );
        assert_eq!(
            classify_boundary(&dom, Node::xyz(0, 0, 0)).unwrap(),
            BoundaryClass::Other3D { p: 1, l: 1 }
        );
    }

    #[test]
    fn corner_touching_blocks_rejected() {
        let mut nodes = BTreeSet::new();
        for m in 0..=2 {
            for n in 0..=2 {
                nodes.insert(Node::xy(m, n));
                nodes.insert(Node::xy(m + 2, n + 2));
            }
        }
        assert!(matches!(
            LatticeDomain::from_nodes(2, nodes),
            Err(LatticeError::NonRectilinearBoundary(_))
        ));
    }

    fn row_map(dom: &LatticeDomain, v: Node) -> BTreeMap<Node, (i64, i64)> {
        stencil_row(dom, v)
            .unwrap()
            .into_iter()
            .map(|t| (t.node, (t.mass8, t.const8)))
            .collect()
    }

    #[test]
    fn weight_tables_match_cell_counts() {
        let dom = LatticeDomain::build_rectangle((0, 4), (0, 3)).unwrap();

        // convex corner: self k̃²/4 − 1, both neighbors ½
        let row = row_map(&dom, Node::xy(0, 0));
        assert_eq!(row[&Node::xy(0, 0)], (2, -8));
        assert_eq!(row[&Node::xy(1, 0)], (0, 4));
        assert_eq!(row[&Node::xy(0, 1)], (0, 4));
        assert_eq!(row.len(), 3);

        // straight line: self 2(k̃²/4 − 1), along-boundary ½, inward 1
        let row = row_map(&dom, Node::xy(2, 0));
        assert_eq!(row[&Node::xy(2, 0)], (4, -16));
        assert_eq!(row[&Node::xy(1, 0)], (0, 4));
        assert_eq!(row[&Node::xy(3, 0)], (0, 4));
        assert_eq!(row[&Node::xy(2, 1)], (0, 8));
        assert_eq!(row.len(), 4);

        // interior: five-point stencil
        let row = row_map(&dom, Node::xy(2, 1));
        assert_eq!(row[&Node::xy(2, 1)], (8, -32));
        for nb in [
            Node::xy(1, 1),
            Node::xy(3, 1),
            Node::xy(2, 0),
            Node::xy(2, 2),
        ] {
            assert_eq!(row[&nb], (0, 8));
        }

        // re-entrant corner: self 3(k̃²/4 − 1), boundary-side ½, interior-side 1
        let dom = LatticeDomain::build_l_shape((0, 5), (0, 5), (3, 3)).unwrap();
        let row = row_map(&dom, Node::xy(3, 3));
        assert_eq!(row[&Node::xy(3, 3)], (6, -24));
        assert_eq!(row[&Node::xy(4, 3)], (0, 4));
        assert_eq!(row[&Node::xy(3, 4)], (0, 4));
        assert_eq!(row[&Node::xy(2, 3)], (0, 8));
        assert_eq!(row[&Node::xy(3, 2)], (0, 8));
        assert!(dom.is_boundary(Node::xy(4, 3)));
        assert!(dom.is_boundary(Node::xy(3, 4)));
        assert!(dom.is_interior(Node::xy(2, 3)));
        assert!(dom.is_interior(Node::xy(3, 2)));
    }

    #[test]
    fn box_weight_rows() {
        let dom = LatticeDomain::build_box((0, 3), (0, 3), (0, 3)).unwrap();

        // face node: self (k̃² − 6)/2, in-plane ½, inward 1
        let row = row_map(&dom, Node::xyz(1, 1, 0));
        assert_eq!(row[&Node::xyz(1, 1, 0)], (4, -24));
        for nb in [
            Node::xyz(0, 1, 0),
            Node::xyz(2, 1, 0),
            Node::xyz(1, 0, 0),
            Node::xyz(1, 2, 0),
        ] {
            assert_eq!(row[&nb], (0, 4));
        }
        assert_eq!(row[&Node::xyz(1, 1, 1)], (0, 8));

        // box edge node: self (k̃² − 6)/4, along-edge ¼, inward ½
        let row = row_map(&dom, Node::xyz(1, 0, 0));
        assert_eq!(row[&Node::xyz(1, 0, 0)], (2, -12));
        assert_eq!(row[&Node::xyz(0, 0, 0)], (0, 2));
        assert_eq!(row[&Node::xyz(2, 0, 0)], (0, 2));
        assert_eq!(row[&Node::xyz(1, 1, 0)], (0, 4));
        assert_eq!(row[&Node::xyz(1, 0, 1)], (0, 4));

        // box corner: self (k̃² − 6)/8, neighbors ¼
        let row = row_map(&dom, Node::xyz(0, 0, 0));
        assert_eq!(row[&Node::xyz(0, 0, 0)], (1, -6));
        for nb in [Node::xyz(1, 0, 0), Node::xyz(0, 1, 0), Node::xyz(0, 0, 1)] {
            assert_eq!(row[&nb], (0, 2));
        }

        // interior: seven-point stencil
        let row = row_map(&dom, Node::xyz(1, 1, 1));
        assert_eq!(row[&Node::xyz(1, 1, 1)], (8, -48));
        assert_eq!(row[&Node::xyz(2, 1, 1)], (0, 8));
    }

    fn assert_symmetric(dom: &LatticeDomain) {
        let mut entries: BTreeMap<(Node, Node), (i64, i64)> = BTreeMap::new();
        for v in dom.nodes() {
            for t in stencil_row(dom, v).unwrap() {
                entries.insert((v, t.node), (t.mass8, t.const8));
            }
        }
        for (&(a, b), &w) in &entries {
            if a != b {
                assert_eq!(entries.get(&(b, a)), Some(&w), "asymmetry at {a} / {b}");
            }
        }
    }

    #[test]
    fn operator_symmetry() {
        assert_symmetric(&LatticeDomain::build_rectangle((0, 5), (-2, 2)).unwrap());
        assert_symmetric(&LatticeDomain::build_l_shape((0, 6), (0, 5), (3, 2)).unwrap());
        assert_symmetric(&LatticeDomain::build_box((0, 3), (0, 4), (0, 3)).unwrap());
    }

    #[test]
    fn helmholtz_residual_of_separable_field() {
        // u(m,n) = 2^m·3^n at k̃² = 1:
        // residual = (2 + 1/2 + 3 + 1/3 + 1 − 4)·u = (17/6)·u
        let mut u = Field::new_2d();
        for m in 0..=4 {
            for n in 0..=4 {
                u.insert(
                    Node::xy(m, n),
                    c(2f64.powi(m) * 3f64.powi(n), 0.0),
                );
            }
        }
        let node = Node::xy(2, 2);
        let got = helmholtz_residual(&u, node, c(1.0, 0.0), C::zero()).unwrap();
        let want = 17.0 / 6.0 * 4.0 * 9.0;
        assert!((got - want).norm() < 1e-12 * want.abs());

        let missing = helmholtz_residual(&u, Node::xy(0, 0), c(1.0, 0.0), C::zero());
        assert_eq!(
            missing,
            Err(LatticeError::MissingNeighborValue(Node::xy(-1, 0)))
        );
    }

    #[test]
    fn normal_derivative_checks_class() {
        let dom = LatticeDomain::build_rectangle((0, 4), (0, 3)).unwrap();
        let u = Field::from_fn(&dom, |v| hash_field(v, 1));
        let k2 = c(1.3, 0.7);
        let got = normal_derivative(
            &u,
            Node::xy(0, 0),
            k2,
            BoundaryClass::InternalRightAngle,
            &dom,
        )
        .unwrap();
        let want = 0.5 * u.get(Node::xy(1, 0)).unwrap()
            + 0.5 * u.get(Node::xy(0, 1)).unwrap()
            + (k2 / 4.0 - 1.0) * u.get(Node::xy(0, 0)).unwrap();
        assert!((got - want).norm() < 1e-14);
        assert_eq!(
            normal_derivative(&u, Node::xy(0, 0), k2, BoundaryClass::StraightLine, &dom),
            Err(LatticeError::UnsupportedClass)
        );
    }

    fn greens_check(dom: &LatticeDomain, salt: u64) {
        let k2 = c(1.1, 0.4);
        let u = Field::from_fn(dom, |v| hash_field(v, salt));
        let w = Field::from_fn(dom, |v| hash_field(v, salt ^ 0xdead_beef));
        let mut f = if dom.dim() == 2 {
            Field::new_2d()
        } else {
            Field::new_3d()
        };
        let mut g = f.clone();
        for v in dom.interior() {
            f.insert(v, helmholtz_residual(&u, v, k2, C::zero()).unwrap());
            g.insert(v, helmholtz_residual(&w, v, k2, C::zero()).unwrap());
        }
        let res = greens_residual(&u, &w, &f, &g, dom, k2).unwrap();
        assert!(res.norm() < 1e-12, "residual {} on {:?}", res.norm(), dom.dim());
    }

    #[test]
    fn greens_identity_exact() {
        greens_check(&LatticeDomain::build_rectangle((0, 6), (0, 5)).unwrap(), 7);
        greens_check(&LatticeDomain::build_l_shape((0, 6), (0, 6), (3, 3)).unwrap(), 8);
        greens_check(&LatticeDomain::build_box((0, 3), (0, 3), (0, 4)).unwrap(), 9);
    }

    #[test]
    fn thin_strip_from_nodes_is_valid_and_symmetric() {
        let mut nodes = BTreeSet::new();
        for m in 0..=5 {
            for n in 0..=1 {
                nodes.insert(Node::xy(m, n));
            }
        }
        let dom = LatticeDomain::from_nodes(2, nodes).unwrap();
        assert_eq!(dom.interior_count(), 0);
        assert_symmetric(&dom);
    }

    proptest! {
        #[test]
        fn prop_rectangles_symmetric(m0 in -4i32..4, w in 2i32..7, n0 in -4i32..4, h in 2i32..7) {
            let dom = LatticeDomain::build_rectangle((m0, m0 + w), (n0, n0 + h)).unwrap();
            assert_symmetric(&dom);
            for v in dom.boundary() {
                classify_boundary(&dom, v).unwrap();
            }
        }

        #[test]
        fn prop_l_shapes_symmetric(w in 4i32..9, h in 4i32..9, cm in 2i32..5, cn in 2i32..5) {
            prop_assume!(w - cm >= 2 && h - cn >= 2);
            let dom = LatticeDomain::build_l_shape((0, w), (0, h), (cm, cn)).unwrap();
            assert_symmetric(&dom);
            let mut re_entrant = 0;
            for v in dom.boundary() {
                if classify_boundary(&dom, v).unwrap() == BoundaryClass::ExternalRightAngle {
                    re_entrant += 1;
                }
            }
            prop_assert_eq!(re_entrant, 1);
        }

        #[test]
        fn prop_boxes_symmetric(w in 2i32..5, h in 2i32..5, d in 2i32..5) {
            let dom = LatticeDomain::build_box((0, w), (0, h), (0, d)).unwrap();
            assert_symmetric(&dom);
            for v in dom.boundary() {
                classify_boundary(&dom, v).unwrap();
            }
        }
    }
}
