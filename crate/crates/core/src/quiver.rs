//! Quivers, doubling with the star involution, affine ADE constructors, the
//! moment-map elements, and n-fold product quivers.
//!
//! Vertex ids are dense integers 0…|I|−1 so they index directly into exact
//! matrices. Path products are composed right-to-left throughout the crate:
//! in a product `p·q` the path `q` is traversed first, so `p·q` is defined
//! when `tail(p) = head(q)`.

use crate::{Error, Result};

pub type VertexId = u8;
pub type EdgeId = u16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: usize,
    /// (tail, head) per edge; loops permitted.
    edges: Vec<(VertexId, VertexId)>,
}

impl Quiver {
    pub fn new(vertices: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Quiver> {
        for &(t, h) in &edges {
            if t as usize >= vertices || h as usize >= vertices {
                return Err(Error::InvalidQuiver(format!(
                    "edge ({t},{h}) references a vertex outside 0..{vertices}"
                )));
            }
        }
        Ok(Quiver { vertices, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn tail(&self, e: usize) -> VertexId {
        self.edges[e].0
    }

    pub fn head(&self, e: usize) -> VertexId {
        self.edges[e].1
    }

    /// Reverse the edges in `flip_set`, keeping ids and all other edges.
    pub fn reorient(&self, flip_set: &[usize]) -> Result<Quiver> {
        let mut edges = self.edges.clone();
        for &e in flip_set {
            if e >= edges.len() {
                return Err(Error::InvalidQuiver(format!("flip of nonexistent edge {e}")));
            }
            edges[e] = (edges[e].1, edges[e].0);
        }
        Ok(Quiver { vertices: self.vertices, edges })
    }

    pub fn double(&self) -> DoubledQuiver {
        DoubledQuiver::new(self.clone())
    }

    /// Undirected edge multiset, for orientation-insensitive comparisons.
    pub fn undirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<(VertexId, VertexId)> = self
            .edges
            .iter()
            .map(|&(t, h)| if t <= h { (t, h) } else { (h, t) })
            .collect();
        out.sort();
        out
    }

    /// Is there a vertex bijection matching the undirected edge multisets?
    pub fn is_isomorphic_undirected(&self, other: &Quiver) -> bool {
        if self.vertices != other.vertices || self.edges.len() != other.edges.len() {
            return false;
        }
        let target = other.undirected_edges();
        // Brute force over bijections; graphs here have at most ~10 vertices.
        let n = self.vertices;
        let mut map: Vec<usize> = (0..n).collect();
        loop {
            let mut mapped: Vec<(VertexId, VertexId)> = self
                .edges
                .iter()
                .map(|&(t, h)| {
                    let (a, b) = (map[t as usize] as VertexId, map[h as usize] as VertexId);
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect();
            mapped.sort();
            if mapped == target {
                return true;
            }
            // next permutation of `map`
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| map[i] < map[i + 1]) else {
                return false;
            };
            let j = (i + 1..n).rev().find(|&j| map[j] > map[i]).unwrap();
            map.swap(i, j);
            map[i + 1..].reverse();
        }
    }
}

/// Affine Dynkin family labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffineFamily {
    A,
    D,
    E,
}

/// Fixed-orientation affine ADE quiver with `index + 1` vertices.
///
/// A_0 is the one-vertex quiver with a single loop. For l >= 1 the A_l cycle
/// is split lowest-vertex-first (edges i→i+1 plus 0→l), which is exactly the
/// orientation produced by [`crate::groups::mckay_quiver`] on cyclic groups;
/// in particular A_1 has two parallel edges 0→1. D and E orient every arm
/// edge toward the adjacent branch vertex.
pub fn affine_quiver(family: AffineFamily, index: usize) -> Result<Quiver> {
    match family {
        AffineFamily::A => {
            if index == 0 {
                return Quiver::new(1, vec![(0, 0)]);
            }
            let l = index;
            let mut edges: Vec<(VertexId, VertexId)> = (0..l).map(|i| (i as VertexId, i as VertexId + 1)).collect();
            edges.push((0, l as VertexId));
            Quiver::new(l + 1, edges)
        }
        AffineFamily::D => {
            if index < 4 {
                return Err(Error::InvalidQuiver(format!("affine D requires index >= 4, got {index}")));
            }
            let k = index;
            // Leaves 0,1 attach to branch 2; leaves k-1,k attach to branch k-2;
            // spine 2..k-2 oriented toward the higher branch.
            let mut edges: Vec<(VertexId, VertexId)> = vec![(0, 2), (1, 2)];
            for i in 2..k - 2 {
                edges.push((i as VertexId, i as VertexId + 1));
            }
            edges.push((k as VertexId - 1, k as VertexId - 2));
            edges.push((k as VertexId, k as VertexId - 2));
            Quiver::new(k + 1, edges)
        }
        AffineFamily::E => {
            // Center vertex 0 with three arms, edges oriented toward the center.
            let arms: [usize; 3] = match index {
                6 => [2, 2, 2],
                7 => [3, 3, 1],
                8 => [5, 2, 1],
                _ => {
                    return Err(Error::InvalidQuiver(format!("affine E requires index in {{6,7,8}}, got {index}")))
                }
            };
            let mut edges = Vec::new();
            let mut next: VertexId = 1;
            for &len in &arms {
                let mut prev: VertexId = 0;
                for _ in 0..len {
                    edges.push((next, prev));
                    prev = next;
                    next += 1;
                }
            }
            Quiver::new(index + 1, edges)
        }
    }
}

/// The double of a quiver: a reverse edge `a*` adjoined for each edge `a`,
/// carrying the star involution on edge ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubledQuiver {
    base: Quiver,
    /// (tail, head) for all 2·|Q| edges; `e < |Q|` are the original edges,
    /// `|Q| + e` is the reverse of `e`.
    edges: Vec<(VertexId, VertexId)>,
}

impl DoubledQuiver {
    pub fn new(base: Quiver) -> DoubledQuiver {
        let mut edges = base.edges.clone();
        edges.extend(base.edges.iter().map(|&(t, h)| (h, t)));
        DoubledQuiver { base, edges }
    }

    pub fn base(&self) -> &Quiver {
        &self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edges[e as usize].0
    }

    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edges[e as usize].1
    }

    /// The star involution a ↔ a*.
    pub fn star(&self, e: EdgeId) -> EdgeId {
        let n = self.base.edges.len() as EdgeId;
        if e < n {
            e + n
        } else {
            e - n
        }
    }

    /// Is this edge an original edge of the base quiver?
    pub fn is_original(&self, e: EdgeId) -> bool {
        (e as usize) < self.base.edges.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        0..self.edges.len() as EdgeId
    }

    pub fn edges_from(&self, v: VertexId) -> Vec<EdgeId> {
        self.edge_ids().filter(|&e| self.tail(e) == v).collect()
    }

    pub fn edges_into(&self, v: VertexId) -> Vec<EdgeId> {
        self.edge_ids().filter(|&e| self.head(e) == v).collect()
    }
}

/// A term of a moment element: the length-2 loop `a·b` (b traversed first)
/// with a sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentTerm {
    pub outer: EdgeId,
    pub inner: EdgeId,
    pub sign: i8,
}

/// For each vertex i, the degree-2 loop combination
/// r_i = Σ_{a∈Q, h(a)=i} a·a* − Σ_{a∈Q, t(a)=i} a*·a,
/// whose sum over i is r = Σ_{a∈Q} [a, a*].
pub fn moment_elements(q: &DoubledQuiver) -> Vec<Vec<MomentTerm>> {
    let originals = q.base.edge_count() as EdgeId;
    let mut out = vec![Vec::new(); q.vertex_count()];
    for a in 0..originals {
        let star = q.star(a);
        // a·a* is a loop at h(a): a* first, then a.
        out[q.head(a) as usize].push(MomentTerm { outer: a, inner: star, sign: 1 });
        // a*·a is a loop at t(a): a first, then a*.
        out[q.tail(a) as usize].push(MomentTerm { outer: star, inner: a, sign: -1 });
    }
    out
}

/// The n-fold product quiver of a doubled quiver: vertices are label tuples
/// in I^n and each edge moves exactly one coordinate along an edge of the
/// doubled quiver.
#[derive(Clone, Debug)]
pub struct ProductQuiver {
    qbar: DoubledQuiver,
    n: usize,
}

/// An edge of the product quiver: edge `edge` at slot `slot`, idle labels
/// elsewhere (the full tail tuple is stored; `tail[slot]` is the edge tail).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductEdge {
    pub slot: u8,
    pub edge: EdgeId,
    pub tail: Vec<VertexId>,
}

impl ProductQuiver {
    pub fn new(qbar: DoubledQuiver, n: usize) -> Result<ProductQuiver> {
        if n < 1 {
            return Err(Error::InvalidQuiver("product quiver requires n >= 1".into()));
        }
        Ok(ProductQuiver { qbar, n })
    }

    pub fn qbar(&self) -> &DoubledQuiver {
        &self.qbar
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.qbar.vertex_count().pow(self.n as u32)
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.qbar.vertex_count().pow(self.n as u32 - 1) * self.qbar.edge_count()
    }

    pub fn vertices(&self) -> Vec<Vec<VertexId>> {
        let k = self.qbar.vertex_count() as VertexId;
        let mut out = vec![vec![]];
        for _ in 0..self.n {
            let mut next = Vec::with_capacity(out.len() * k as usize);
            for v in &out {
                for i in 0..k {
                    let mut w = v.clone();
                    w.push(i);
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    pub fn edge_head(&self, e: &ProductEdge) -> Vec<VertexId> {
        let mut h = e.tail.clone();
        h[e.slot as usize] = self.qbar.head(e.edge);
        h
    }

    /// All product edges, enumerated deterministically.
    pub fn all_edges(&self) -> Vec<ProductEdge> {
        let mut out = Vec::new();
        for tail in self.vertices() {
            for slot in 0..self.n {
                for e in self.qbar.edge_ids() {
                    if self.qbar.tail(e) == tail[slot] {
                        out.push(ProductEdge { slot: slot as u8, edge: e, tail: tail.clone() });
                    }
                }
            }
        }
        out
    }

    /// Product edges with the given tail tuple.
    pub fn edges_from(&self, tail: &[VertexId]) -> Vec<ProductEdge> {
        let mut out = Vec::new();
        for slot in 0..self.n {
            for e in self.qbar.edge_ids() {
                if self.qbar.tail(e) == tail[slot] {
                    out.push(ProductEdge { slot: slot as u8, edge: e, tail: tail.to_vec() });
                }
            }
        }
        out
    }

    /// Product edges with the given head tuple.
    pub fn edges_into(&self, head: &[VertexId]) -> Vec<ProductEdge> {
        let mut out = Vec::new();
        for slot in 0..self.n {
            for e in self.qbar.edge_ids() {
                if self.qbar.head(e) == head[slot] {
                    let mut tail = head.to_vec();
                    tail[slot] = self.qbar.tail(e);
                    out.push(ProductEdge { slot: slot as u8, edge: e, tail });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_a1_is_two_parallel_edges() {
        let q = affine_quiver(AffineFamily::A, 1).unwrap();
        assert_eq!(q.vertex_count(), 2);
        assert_eq!(q.edges(), &[(0, 1), (0, 1)]);
    }

    #[test]
    fn affine_a0_is_the_one_loop_quiver() {
        let q = affine_quiver(AffineFamily::A, 0).unwrap();
        assert_eq!(q.vertex_count(), 1);
        assert_eq!(q.edges(), &[(0, 0)]);
    }

    #[test]
    fn affine_d4_is_a_star_into_the_center() {
        let q = affine_quiver(AffineFamily::D, 4).unwrap();
        assert_eq!(q.vertex_count(), 5);
        assert_eq!(q.edge_count(), 4);
        assert!(q.edges().iter().all(|&(_, h)| h == 2));
        assert!(affine_quiver(AffineFamily::D, 3).is_err());
    }

    #[test]
    fn affine_e_vertex_counts() {
        for idx in [6usize, 7, 8] {
            let q = affine_quiver(AffineFamily::E, idx).unwrap();
            assert_eq!(q.vertex_count(), idx + 1);
            assert_eq!(q.edge_count(), idx);
        }
        assert!(affine_quiver(AffineFamily::E, 5).is_err());
    }

    #[test]
    fn star_is_an_involution_swapping_head_and_tail() {
        let q = affine_quiver(AffineFamily::D, 4).unwrap().double();
        for e in q.edge_ids() {
            assert_eq!(q.star(q.star(e)), e);
            assert_eq!(q.head(q.star(e)), q.tail(e));
            assert_eq!(q.tail(q.star(e)), q.head(e));
        }
        assert_eq!(q.edge_count(), 8);
    }

    #[test]
    fn moment_elements_of_affine_a1() {
        // Edges a = 0, b = 1 (both 0→1), stars 2, 3.
        let q = affine_quiver(AffineFamily::A, 1).unwrap().double();
        let r = moment_elements(&q);
        assert_eq!(r[1], vec![
            MomentTerm { outer: 0, inner: 2, sign: 1 },
            MomentTerm { outer: 1, inner: 3, sign: 1 },
        ]);
        assert_eq!(r[0], vec![
            MomentTerm { outer: 2, inner: 0, sign: -1 },
            MomentTerm { outer: 3, inner: 1, sign: -1 },
        ]);
    }

    #[test]
    fn moment_element_of_jordan_quiver() {
        let q = affine_quiver(AffineFamily::A, 0).unwrap().double();
        let r = moment_elements(&q);
        assert_eq!(r[0], vec![
            MomentTerm { outer: 0, inner: 1, sign: 1 },
            MomentTerm { outer: 1, inner: 0, sign: -1 },
        ]);
    }

    #[test]
    fn moment_terms_are_loops_at_their_vertex() {
        let q = affine_quiver(AffineFamily::D, 4).unwrap().double();
        for (i, terms) in moment_elements(&q).iter().enumerate() {
            for t in terms {
                assert_eq!(q.tail(t.inner) as usize, i);
                assert_eq!(q.head(t.outer) as usize, i);
                assert_eq!(q.head(t.inner), q.tail(t.outer));
            }
        }
    }

    #[test]
    fn product_quiver_counts() {
        let qbar = affine_quiver(AffineFamily::A, 1).unwrap().double();
        let p1 = ProductQuiver::new(qbar.clone(), 1).unwrap();
        assert_eq!(p1.vertex_count(), 2);
        assert_eq!(p1.all_edges().len(), 4);
        let p2 = ProductQuiver::new(qbar, 2).unwrap();
        assert_eq!(p2.vertex_count(), 4);
        assert_eq!(p2.edge_count(), 16);
        assert_eq!(p2.all_edges().len(), 16);
        for e in p2.all_edges() {
            let head = p2.edge_head(&e);
            let diff = e.tail.iter().zip(head.iter()).filter(|(a, b)| a != b).count();
            // head and tail differ at most in the active slot (loops differ in none)
            assert!(diff <= 1);
        }
    }

    #[test]
    fn reorient_flips_exactly_the_requested_edges() {
        let q = affine_quiver(AffineFamily::A, 1).unwrap();
        assert_eq!(q.reorient(&[]).unwrap(), q);
        let flipped = q.reorient(&[1]).unwrap();
        assert_eq!(flipped.edges(), &[(0, 1), (1, 0)]);
        // Doubles are isomorphic as undirected multigraphs.
        assert!(flipped.is_isomorphic_undirected(&q));
        assert!(q.reorient(&[7]).is_err());
    }
}
