//! Decorated cubic ribbon graphs: the data model, admissibility checks,
//! generators for the standard graph families, and structural queries.
//!
//! A network is a 3-regular multigraph (loops and parallel edges allowed)
//! with a cyclic order of half-edges at every vertex (a rotation system),
//! an integer decoration per edge (a strand count, i.e. twice a spin), and
//! an optional list of vertex-less circle components. Rotation triples are
//! read counterclockwise as seen from outside the embedding surface; all
//! downstream sign conventions reference that direction.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Identifier of a half-edge (an edge end attached to one vertex slot).
    HalfEdgeId
);
id_type!(
    /// Identifier of a vertex.
    VertexId
);
id_type!(
    /// Identifier of an edge.
    EdgeId
);

/// A decorated cubic ribbon graph. Immutable after construction; all
/// operations return new values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinNetwork {
    vertices: Vec<(VertexId, [HalfEdgeId; 3])>,
    edges: Vec<(EdgeId, [HalfEdgeId; 2])>,
    decoration: BTreeMap<EdgeId, u32>,
    trivial_components: Vec<u32>,
    half_to_vertex: BTreeMap<HalfEdgeId, (usize, u8)>,
    half_to_edge: BTreeMap<HalfEdgeId, (usize, u8)>,
}

/// Why a vertex triple fails admissibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationReason {
    /// The triple sum is odd.
    Parity,
    /// The triangle inequality fails.
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub vertex: VertexId,
    pub triple: [u32; 3],
    pub reason: ViolationReason,
}

/// Outcome of the per-vertex parity and triangle checks. A loop decoration
/// participates twice in its vertex triple, so the loop rule (`b` even and
/// `b <= 2a`) needs no special casing. Trivial components are always
/// admissible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<Violation>,
}

/// Checks a single triple for parity and the triangle inequality.
pub fn triple_admissible(a: u32, b: u32, c: u32) -> bool {
    (a + b + c) % 2 == 0 && a + b >= c && a + c >= b && b + c >= a
}

impl SpinNetwork {
    /// Validates and builds a network from raw parts.
    pub fn build(
        vertices: Vec<(VertexId, [HalfEdgeId; 3])>,
        edges: Vec<(EdgeId, [HalfEdgeId; 2])>,
        decoration: BTreeMap<EdgeId, u32>,
        trivial_components: Vec<u32>,
    ) -> Result<Self> {
        let mut half_to_vertex = BTreeMap::new();
        let mut vertex_ids = BTreeSet::new();
        for (vi, (v, rot)) in vertices.iter().enumerate() {
            if !vertex_ids.insert(*v) {
                return Err(Error::DuplicateId(v.0));
            }
            for (slot, h) in rot.iter().enumerate() {
                if half_to_vertex.insert(*h, (vi, slot as u8)).is_some() {
                    return Err(Error::DuplicateHalfEdge(*h));
                }
            }
        }
        let mut half_to_edge = BTreeMap::new();
        let mut edge_ids = BTreeSet::new();
        for (ei, (e, pair)) in edges.iter().enumerate() {
            if !edge_ids.insert(*e) {
                return Err(Error::DuplicateId(e.0));
            }
            for (side, h) in pair.iter().enumerate() {
                if half_to_edge.insert(*h, (ei, side as u8)).is_some() {
                    return Err(Error::DuplicateHalfEdge(*h));
                }
            }
        }
        for h in half_to_vertex.keys() {
            if !half_to_edge.contains_key(h) {
                return Err(Error::DanglingHalfEdge(*h));
            }
        }
        for h in half_to_edge.keys() {
            if !half_to_vertex.contains_key(h) {
                return Err(Error::DanglingHalfEdge(*h));
            }
        }
        for (e, _) in &edges {
            if !decoration.contains_key(e) {
                return Err(Error::MissingDecoration(e.0));
            }
        }
        Ok(SpinNetwork {
            vertices,
            edges,
            decoration,
            trivial_components,
            half_to_vertex,
            half_to_edge,
        })
    }

    pub fn vertices(&self) -> &[(VertexId, [HalfEdgeId; 3])] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(EdgeId, [HalfEdgeId; 2])] {
        &self.edges
    }

    pub fn trivial_components(&self) -> &[u32] {
        &self.trivial_components
    }

    pub fn decoration(&self, e: EdgeId) -> u32 {
        self.decoration[&e]
    }

    pub fn decorations(&self) -> &BTreeMap<EdgeId, u32> {
        &self.decoration
    }

    pub fn vertex_of(&self, h: HalfEdgeId) -> VertexId {
        self.vertices[self.half_to_vertex[&h].0].0
    }

    pub fn edge_of(&self, h: HalfEdgeId) -> EdgeId {
        self.edges[self.half_to_edge[&h].0].0
    }

    /// The other half of the edge containing `h`.
    pub fn mate(&self, h: HalfEdgeId) -> HalfEdgeId {
        let (ei, side) = self.half_to_edge[&h];
        self.edges[ei].1[1 - side as usize]
    }

    pub fn rotation(&self, v: VertexId) -> Result<[HalfEdgeId; 3]> {
        self.vertices
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, r)| *r)
            .ok_or(Error::UnknownVertex(v))
    }

    /// The half-edge following `h` counterclockwise at its vertex.
    pub fn rotation_next(&self, h: HalfEdgeId) -> HalfEdgeId {
        let (vi, slot) = self.half_to_vertex[&h];
        self.vertices[vi].1[(slot as usize + 1) % 3]
    }

    /// Decoration carried by the edge of `h`.
    pub fn gamma(&self, h: HalfEdgeId) -> u32 {
        self.decoration[&self.edge_of(h)]
    }

    /// Decorations at a vertex, in rotation order. A loop contributes its
    /// decoration twice.
    pub fn triple_at(&self, v: VertexId) -> Result<[u32; 3]> {
        let rot = self.rotation(v)?;
        Ok([self.gamma(rot[0]), self.gamma(rot[1]), self.gamma(rot[2])])
    }

    /// Per-vertex parity and triangle checks.
    pub fn check_admissible(&self) -> AdmissibilityReport {
        let mut violations = Vec::new();
        for (v, _) in &self.vertices {
            let t = self.triple_at(*v).expect("vertex exists");
            if (t[0] + t[1] + t[2]) % 2 != 0 {
                violations.push(Violation {
                    vertex: *v,
                    triple: t,
                    reason: ViolationReason::Parity,
                });
            }
            let m = t[0].max(t[1]).max(t[2]);
            if 2 * m > t[0] + t[1] + t[2] {
                violations.push(Violation {
                    vertex: *v,
                    triple: t,
                    reason: ViolationReason::Triangle,
                });
            }
        }
        AdmissibilityReport {
            admissible: violations.is_empty(),
            violations,
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().admissible
    }

    /// Reverses the rotation triple at `v`; everything else is unchanged.
    pub fn flip_cyclic_order(&self, v: VertexId) -> Result<SpinNetwork> {
        if !self.vertices.iter().any(|(w, _)| *w == v) {
            return Err(Error::UnknownVertex(v));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|(w, r)| {
                if *w == v {
                    (*w, [r[2], r[1], r[0]])
                } else {
                    (*w, *r)
                }
            })
            .collect();
        SpinNetwork::build(
            vertices,
            self.edges.clone(),
            self.decoration.clone(),
            self.trivial_components.clone(),
        )
    }

    /// Multiplies every decoration (including trivial components) by `n`.
    /// Parity and triangle constraints are homogeneous, so admissibility is
    /// preserved.
    pub fn scale_decoration(&self, n: u32) -> SpinNetwork {
        let decoration = self.decoration.iter().map(|(e, g)| (*e, g * n)).collect();
        let trivial = self.trivial_components.iter().map(|g| g * n).collect();
        SpinNetwork::build(self.vertices.clone(), self.edges.clone(), decoration, trivial)
            .expect("scaling preserves structure")
    }

    /// Replaces the decoration map (same edge set).
    pub fn with_decorations(&self, decoration: BTreeMap<EdgeId, u32>) -> Result<SpinNetwork> {
        SpinNetwork::build(
            self.vertices.clone(),
            self.edges.clone(),
            decoration,
            self.trivial_components.clone(),
        )
    }

    pub fn with_uniform_decoration(&self, gamma: u32) -> SpinNetwork {
        let decoration = self.edges.iter().map(|(e, _)| (*e, gamma)).collect();
        self.with_decorations(decoration).expect("same edges")
    }

    /// Disjoint union; identifiers of `other` are shifted above ours.
    pub fn disjoint_union(&self, other: &SpinNetwork) -> SpinNetwork {
        let v_off = self.vertices.iter().map(|(v, _)| v.0 + 1).max().unwrap_or(0);
        let e_off = self.edges.iter().map(|(e, _)| e.0 + 1).max().unwrap_or(0);
        let h_off = self
            .half_to_edge
            .keys()
            .map(|h| h.0 + 1)
            .max()
            .unwrap_or(0);
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        let mut decoration = self.decoration.clone();
        let mut trivial = self.trivial_components.clone();
        for (v, r) in other.vertices() {
            vertices.push((
                VertexId(v.0 + v_off),
                [
                    HalfEdgeId(r[0].0 + h_off),
                    HalfEdgeId(r[1].0 + h_off),
                    HalfEdgeId(r[2].0 + h_off),
                ],
            ));
        }
        for (e, pair) in other.edges() {
            edges.push((
                EdgeId(e.0 + e_off),
                [HalfEdgeId(pair[0].0 + h_off), HalfEdgeId(pair[1].0 + h_off)],
            ));
            decoration.insert(EdgeId(e.0 + e_off), other.decoration(*e));
        }
        trivial.extend_from_slice(other.trivial_components());
        SpinNetwork::build(vertices, edges, decoration, trivial).expect("disjoint ids")
    }

    /// Vertex sets of the connected components of the non-trivial part,
    /// each sorted; the list is sorted by its smallest member.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(vi) = stack.pop() {
                comp.push(self.vertices[vi].0);
                for h in self.vertices[vi].1 {
                    let mate = self.mate(h);
                    let wi = self.half_to_vertex[&mate].0;
                    if !seen[wi] {
                        seen[wi] = true;
                        stack.push(wi);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out.sort();
        out
    }

    /// Splits into connected sub-networks (ids preserved); the trivial
    /// components are returned separately.
    pub fn split_components(&self) -> (Vec<SpinNetwork>, Vec<u32>) {
        let comps = self.connected_components();
        let mut nets = Vec::new();
        for comp in comps {
            let vset: BTreeSet<VertexId> = comp.iter().copied().collect();
            let vertices: Vec<_> = self
                .vertices
                .iter()
                .filter(|(v, _)| vset.contains(v))
                .cloned()
                .collect();
            let edges: Vec<_> = self
                .edges
                .iter()
                .filter(|(_, pair)| vset.contains(&self.vertex_of(pair[0])))
                .cloned()
                .collect();
            let decoration = edges
                .iter()
                .map(|(e, _)| (*e, self.decoration[e]))
                .collect();
            nets.push(
                SpinNetwork::build(vertices, edges, decoration, Vec::new())
                    .expect("component of a valid network"),
            );
        }
        (nets, self.trivial_components.clone())
    }

    /// All cut-edges, by a depth-first low-link sweep. Loops are never
    /// bridges; of a parallel pair neither is.
    pub fn find_bridges(&self) -> Vec<EdgeId> {
        let n = self.vertices.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut clock = 0usize;
        let mut bridges = Vec::new();
        // adjacency: vertex index -> (edge index, neighbour vertex index)
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (ei, (_, pair)) in self.edges.iter().enumerate() {
            let a = self.half_to_vertex[&pair[0]].0;
            let b = self.half_to_vertex[&pair[1]].0;
            if a == b {
                continue;
            }
            adj[a].push((ei, b));
            adj[b].push((ei, a));
        }
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // stack frame: (vertex, incoming edge index, next adjacency slot)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = clock;
            low[root] = clock;
            clock += 1;
            while let Some(&mut (v, via, ref mut slot)) = stack.last_mut() {
                if *slot < adj[v].len() {
                    let (ei, w) = adj[v][*slot];
                    *slot += 1;
                    if ei == via {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = clock;
                        low[w] = clock;
                        clock += 1;
                        stack.push((w, ei, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&mut (p, _, _)) = stack.last_mut() {
                        low[p] = low[p].min(low[v]);
                        if low[v] > disc[p] {
                            bridges.push(self.edges[via].0);
                        }
                    }
                }
            }
        }
        bridges.sort();
        bridges
    }

    /// Number of faces of the embedding determined by the rotation system
    /// (orbits of "cross the edge, then turn to the next half-edge").
    pub fn face_count(&self) -> usize {
        let mut seen: BTreeSet<HalfEdgeId> = BTreeSet::new();
        let mut faces = 0;
        for h0 in self.half_to_edge.keys() {
            if seen.contains(h0) {
                continue;
            }
            faces += 1;
            let mut h = *h0;
            loop {
                seen.insert(h);
                h = self.rotation_next(self.mate(h));
                if h == *h0 {
                    break;
                }
            }
        }
        faces
    }
}

fn h(i: u32) -> HalfEdgeId {
    HalfEdgeId(i)
}

/// Theta: two vertices joined by three parallel edges decorated `(a, b, c)`,
/// with the spherical rotation system (mirrored triples).
pub fn theta(a: u32, b: u32, c: u32) -> SpinNetwork {
    let vertices = vec![
        (VertexId(0), [h(0), h(2), h(4)]),
        (VertexId(1), [h(1), h(5), h(3)]),
    ];
    let edges = vec![
        (EdgeId(0), [h(0), h(1)]),
        (EdgeId(1), [h(2), h(3)]),
        (EdgeId(2), [h(4), h(5)]),
    ];
    let deco = [(EdgeId(0), a), (EdgeId(1), b), (EdgeId(2), c)]
        .into_iter()
        .collect();
    SpinNetwork::build(vertices, edges, deco, Vec::new()).unwrap()
}

/// Dumbbell: two loop vertices joined by a bridge; the loops carry `a` and
/// `b`, the bridge carries `c`.
pub fn dumbbell(a: u32, b: u32, c: u32) -> SpinNetwork {
    let vertices = vec![
        (VertexId(0), [h(0), h(1), h(4)]),
        (VertexId(1), [h(5), h(2), h(3)]),
    ];
    let edges = vec![
        (EdgeId(0), [h(0), h(1)]),
        (EdgeId(1), [h(2), h(3)]),
        (EdgeId(2), [h(4), h(5)]),
    ];
    let deco = [(EdgeId(0), a), (EdgeId(1), b), (EdgeId(2), c)]
        .into_iter()
        .collect();
    SpinNetwork::build(vertices, edges, deco, Vec::new()).unwrap()
}

/// K4 with the planar rotation system. Edge order: (01),(02),(03),(12),(13),(23).
pub fn tetrahedron(gamma: [u32; 6]) -> SpinNetwork {
    // Half-edges: edge i gets half-edges 2i (first endpoint) and 2i+1.
    // Edges: e0=(0,1) e1=(0,2) e2=(0,3) e3=(1,2) e4=(1,3) e5=(2,3).
    let vertices = vec![
        (VertexId(0), [h(0), h(4), h(2)]),  // at 0: e01, e03, e02
        (VertexId(1), [h(6), h(8), h(1)]),  // at 1: e12, e13, e01
        (VertexId(2), [h(3), h(10), h(7)]), // at 2: e02, e23, e12
        (VertexId(3), [h(5), h(9), h(11)]), // at 3: e03, e13, e23
    ];
    let edges = vec![
        (EdgeId(0), [h(0), h(1)]),
        (EdgeId(1), [h(2), h(3)]),
        (EdgeId(2), [h(4), h(5)]),
        (EdgeId(3), [h(6), h(7)]),
        (EdgeId(4), [h(8), h(9)]),
        (EdgeId(5), [h(10), h(11)]),
    ];
    let deco = (0..6).map(|i| (EdgeId(i), gamma[i as usize])).collect();
    SpinNetwork::build(vertices, edges, deco, Vec::new()).unwrap()
}

/// Generalized drum: two `s`-cycles joined by `s` rungs (`|V| = 2s`,
/// `|E| = 3s`). `cycles[i]` decorates both the top and bottom edge `i`
/// (the symmetric pattern), `rungs[i]` the rung at vertex `i`.
/// `drum(1, ..)` degenerates to the dumbbell shape.
pub fn drum(s: u32, cycles: &[u32], rungs: &[u32]) -> Result<SpinNetwork> {
    if s < 1 || cycles.len() != s as usize || rungs.len() != s as usize {
        return Err(Error::InvalidParameter(format!(
            "drum requires s >= 1 and s decorations per ring, got s={s}"
        )));
    }
    let s = s as usize;
    // Edge ids: top 0..s, bottom s..2s, rungs 2s..3s.
    // Half-edges: edge e -> (2e, 2e+1); top edge i runs t_i -> t_{i+1}.
    let top = |i: usize| (h(2 * i as u32), h(2 * i as u32 + 1));
    let bot = |i: usize| (h(2 * (s + i) as u32), h(2 * (s + i) as u32 + 1));
    let rung = |i: usize| (h(2 * (2 * s + i) as u32), h(2 * (2 * s + i) as u32 + 1));
    let mut vertices = Vec::new();
    for i in 0..s {
        let prev = (i + s - 1) % s;
        vertices.push((VertexId(i as u32), [top(prev).1, top(i).0, rung(i).0]));
    }
    for i in 0..s {
        let prev = (i + s - 1) % s;
        vertices.push((
            VertexId((s + i) as u32),
            [bot(prev).1, rung(i).1, bot(i).0],
        ));
    }
    let mut edges = Vec::new();
    let mut deco = BTreeMap::new();
    for i in 0..s {
        edges.push((EdgeId(i as u32), [top(i).0, top(i).1]));
        deco.insert(EdgeId(i as u32), cycles[i]);
    }
    for i in 0..s {
        edges.push((EdgeId((s + i) as u32), [bot(i).0, bot(i).1]));
        deco.insert(EdgeId((s + i) as u32), cycles[i]);
    }
    for i in 0..s {
        edges.push((EdgeId((2 * s + i) as u32), [rung(i).0, rung(i).1]));
        deco.insert(EdgeId((2 * s + i) as u32), rungs[i]);
    }
    SpinNetwork::build(vertices, edges, deco, Vec::new())
}

pub fn drum_uniform(s: u32, gamma: u32) -> Result<SpinNetwork> {
    drum(s, &vec![gamma; s as usize], &vec![gamma; s as usize])
}

/// A single vertex-less circle with decoration `a`.
pub fn trivial(a: u32) -> SpinNetwork {
    SpinNetwork::build(Vec::new(), Vec::new(), BTreeMap::new(), vec![a]).unwrap()
}

/// Two disjoint vertex-less circles decorated `a` and `b`.
pub fn cycle_pair(a: u32, b: u32) -> SpinNetwork {
    SpinNetwork::build(Vec::new(), Vec::new(), BTreeMap::new(), vec![a, b]).unwrap()
}

/// Named family generator backing the command-line `gen` subcommand.
#[derive(Debug, Clone)]
pub enum Family {
    Theta { a: u32, b: u32, c: u32 },
    Tetrahedron { gamma: [u32; 6] },
    Drum { s: u32, cycles: Vec<u32>, rungs: Vec<u32> },
    Dumbbell { a: u32, b: u32, c: u32 },
    Trivial { a: u32 },
    CyclePair { a: u32, b: u32 },
}

pub fn generate(family: &Family) -> Result<SpinNetwork> {
    match family {
        Family::Theta { a, b, c } => Ok(theta(*a, *b, *c)),
        Family::Tetrahedron { gamma } => Ok(tetrahedron(*gamma)),
        Family::Drum { s, cycles, rungs } => drum(*s, cycles, rungs),
        Family::Dumbbell { a, b, c } => Ok(dumbbell(*a, *b, *c)),
        Family::Trivial { a } => Ok(trivial(*a)),
        Family::CyclePair { a, b } => Ok(cycle_pair(*a, *b)),
    }
}

/// A random connected-or-not cubic ribbon multigraph on `n` vertices
/// (n even): a uniform perfect matching on the 3n half-edge stubs plus
/// uniform rotations. Decorations start at zero.
pub fn random_cubic<R: Rng>(n: u32, rng: &mut R) -> Result<SpinNetwork> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "vertex count must be positive and even, got {n}"
        )));
    }
    let mut stubs: Vec<u32> = (0..3 * n).collect();
    stubs.shuffle(rng);
    let mut vertices = Vec::new();
    for v in 0..n {
        let mut rot = [h(3 * v), h(3 * v + 1), h(3 * v + 2)];
        // random cyclic class: shuffle the triple
        for i in (1..3).rev() {
            rot.swap(i, rng.gen_range(0..=i));
        }
        vertices.push((VertexId(v), rot));
    }
    let mut edges = Vec::new();
    let mut deco = BTreeMap::new();
    for (ei, pair) in stubs.chunks(2).enumerate() {
        edges.push((EdgeId(ei as u32), [h(pair[0]), h(pair[1])]));
        deco.insert(EdgeId(ei as u32), 0);
    }
    SpinNetwork::build(vertices, edges, deco, Vec::new())
}

/// Rejection-samples a decoration with all values at most `max_gamma`.
/// Returns `None` when no admissible decoration is found in `attempts` tries.
pub fn random_admissible_decoration<R: Rng>(
    net: &SpinNetwork,
    max_gamma: u32,
    rng: &mut R,
    attempts: u32,
) -> Option<SpinNetwork> {
    for _ in 0..attempts {
        let deco: BTreeMap<EdgeId, u32> = net
            .edges()
            .iter()
            .map(|(e, _)| (*e, rng.gen_range(0..=max_gamma)))
            .collect();
        let candidate = net.with_decorations(deco).expect("same edges");
        if candidate.is_admissible() {
            return Some(candidate);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn theta_is_valid_and_planar() {
        let t = theta(2, 2, 2);
        assert_eq!(t.vertices().len(), 2);
        assert_eq!(t.edges().len(), 3);
        assert!(t.is_admissible());
        // V - E + F = 2 on the sphere
        assert_eq!(t.face_count(), 3);
    }

    #[test]
    fn tetrahedron_is_valid_and_planar() {
        let t = tetrahedron([2; 6]);
        assert_eq!(t.vertices().len(), 4);
        assert_eq!(t.edges().len(), 6);
        assert!(t.is_admissible());
        assert_eq!(t.face_count(), 4);
    }

    #[test]
    fn duplicate_half_edge_rejected() {
        let vertices = vec![
            (VertexId(0), [h(0), h(2), h(4)]),
            (VertexId(1), [h(1), h(0), h(3)]), // h0 used twice
        ];
        let edges = vec![
            (EdgeId(0), [h(0), h(1)]),
            (EdgeId(1), [h(2), h(3)]),
            (EdgeId(2), [h(4), h(5)]),
        ];
        let deco = (0..3).map(|i| (EdgeId(i), 0)).collect();
        let err = SpinNetwork::build(vertices, edges, deco, Vec::new()).unwrap_err();
        assert!(matches!(err, Error::DuplicateHalfEdge(_)));
    }

    #[test]
    fn trivial_component_network() {
        let c = trivial(5);
        assert_eq!(c.trivial_components(), &[5]);
        assert!(c.is_admissible());
    }

    #[test]
    fn admissibility_examples() {
        assert!(theta(2, 2, 2).is_admissible());
        let bad = theta(1, 1, 1).check_admissible();
        assert!(!bad.admissible);
        assert!(bad
            .violations
            .iter()
            .all(|v| v.reason == ViolationReason::Parity));
        // loop a=1, stem b=3: the stem exceeds twice the loop decoration
        let loopy = dumbbell(1, 1, 3).check_admissible();
        assert!(!loopy.admissible);
        assert!(loopy
            .violations
            .iter()
            .any(|v| v.reason == ViolationReason::Triangle));
        // loop rule in admissible form: b even, b <= 2a
        assert!(dumbbell(1, 1, 2).is_admissible());
    }

    #[test]
    fn drum_shapes() {
        let d2 = drum_uniform(2, 2).unwrap();
        assert_eq!(d2.vertices().len(), 4);
        assert_eq!(d2.edges().len(), 6);
        assert!(d2.is_admissible());
        let d1 = drum_uniform(1, 2).unwrap();
        assert_eq!(d1.vertices().len(), 2);
        assert_eq!(d1.edges().len(), 3);
        let d5 = drum_uniform(5, 2).unwrap();
        assert_eq!(d5.vertices().len(), 10);
        assert_eq!(d5.edges().len(), 15);
        assert!(d5.is_admissible());
        assert!(drum(2, &[2], &[2, 2]).is_err());
    }

    #[test]
    fn dumbbell_bridge() {
        let d = dumbbell(3, 4, 0);
        assert_eq!(d.find_bridges(), vec![EdgeId(2)]);
        assert!(theta(2, 2, 2).find_bridges().is_empty());
        let d3 = drum_uniform(3, 2).unwrap();
        assert!(d3.find_bridges().is_empty());
    }

    #[test]
    fn union_components() {
        let u = theta(2, 2, 2).disjoint_union(&tetrahedron([2; 6]));
        assert_eq!(u.connected_components().len(), 2);
        let (nets, triv) = u.split_components();
        assert_eq!(nets.len(), 2);
        assert!(triv.is_empty());
        assert_eq!(nets[0].edges().len(), 3);
        assert_eq!(nets[1].edges().len(), 6);
    }

    #[test]
    fn flip_is_involution() {
        let t = tetrahedron([2; 6]);
        let f = t.flip_cyclic_order(VertexId(2)).unwrap();
        assert_ne!(t, f);
        assert_eq!(t, f.flip_cyclic_order(VertexId(2)).unwrap());
        assert!(t.flip_cyclic_order(VertexId(9)).is_err());
    }

    #[test]
    fn scaling() {
        let t = theta(2, 2, 2).scale_decoration(3);
        assert_eq!(t.decoration(EdgeId(0)), 6);
        let z = theta(2, 4, 2).scale_decoration(0);
        assert!(z.is_admissible());
        assert_eq!(z.decoration(EdgeId(1)), 0);
        let d = drum_uniform(2, 2).unwrap().scale_decoration(10);
        assert!(d.decorations().values().all(|g| *g == 20));
    }

    #[test]
    fn random_cubic_networks_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 2 * rng.gen_range(1..=6);
            let g = random_cubic(n, &mut rng).unwrap();
            assert_eq!(g.vertices().len(), n as usize);
            assert_eq!(g.edges().len(), (3 * n / 2) as usize);
        }
    }
}
