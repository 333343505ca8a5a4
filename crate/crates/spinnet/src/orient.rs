//! Smooth orientations and gate signages.
//!
//! A smooth orientation directs every edge so that each vertex sees
//! (indegree, outdegree) of (1,2) or (2,1) — no sources, no sinks; a loop
//! contributes one in and one out at its vertex. The gate at a vertex is the
//! pair of half-edges sharing a direction, and a gate signage orders each
//! gate. Both are inputs to the Clebsch-Gordan engine; the signage affects
//! only the sign of the evaluation.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, HalfEdgeId, SpinNetwork, VertexId};

/// Edge directions as ordered pairs `(tail, head)` of half-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothOrientation {
    direction: BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)>,
}

impl SmoothOrientation {
    pub fn new(direction: BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)>) -> Self {
        SmoothOrientation { direction }
    }

    pub fn direction(&self, e: EdgeId) -> Option<(HalfEdgeId, HalfEdgeId)> {
        self.direction.get(&e).copied()
    }

    pub fn directions(&self) -> &BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)> {
        &self.direction
    }

    /// True when `h` points out of its vertex (is the tail of its edge).
    pub fn is_tail(&self, net: &SpinNetwork, h: HalfEdgeId) -> bool {
        self.direction[&net.edge_of(h)].0 == h
    }

    /// Reverses one edge, for sampling alternative orientations.
    pub fn reversed(&self, e: EdgeId) -> SmoothOrientation {
        let mut direction = self.direction.clone();
        if let Some(d) = direction.get_mut(&e) {
            *d = (d.1, d.0);
        }
        SmoothOrientation { direction }
    }
}

/// Per-vertex ordering of the two same-direction half-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSignage {
    order: BTreeMap<VertexId, (HalfEdgeId, HalfEdgeId)>,
}

impl GateSignage {
    pub fn new(order: BTreeMap<VertexId, (HalfEdgeId, HalfEdgeId)>) -> Self {
        GateSignage { order }
    }

    pub fn order(&self, v: VertexId) -> Option<(HalfEdgeId, HalfEdgeId)> {
        self.order.get(&v).copied()
    }

    pub fn orders(&self) -> &BTreeMap<VertexId, (HalfEdgeId, HalfEdgeId)> {
        &self.order
    }

    /// Swaps the gate order at one vertex; the CG value changes by
    /// (-1)^(number of epsilons at that vertex).
    pub fn flipped(&self, v: VertexId) -> GateSignage {
        let mut order = self.order.clone();
        if let Some(o) = order.get_mut(&v) {
            *o = (o.1, o.0);
        }
        GateSignage { order }
    }
}

/// Split of the vertex set by indegree; in a smooth orientation of a closed
/// cubic network the two classes have equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPartition {
    /// Vertices with indegree 2 (merging side).
    pub v_pi: BTreeSet<VertexId>,
    /// Vertices with indegree 1 (splitting side).
    pub v_iota: BTreeSet<VertexId>,
}

fn degree_pair(net: &SpinNetwork, o: &SmoothOrientation, v: VertexId) -> (u8, u8) {
    let rot = net.rotation(v).expect("vertex exists");
    let mut indeg = 0;
    let mut outdeg = 0;
    for h in rot {
        if o.is_tail(net, h) {
            outdeg += 1;
        } else {
            indeg += 1;
        }
    }
    (indeg, outdeg)
}

/// True iff every vertex is (1,2) or (2,1) under `o` and `o` covers all edges.
pub fn validate_smooth(net: &SpinNetwork, o: &SmoothOrientation) -> bool {
    for (e, pair) in net.edges() {
        match o.direction(*e) {
            Some((t, h)) => {
                let ok = (t == pair[0] && h == pair[1]) || (t == pair[1] && h == pair[0]);
                if !ok {
                    return false;
                }
            }
            None => return false,
        }
    }
    net.vertices()
        .iter()
        .all(|(v, _)| matches!(degree_pair(net, o, *v), (1, 2) | (2, 1)))
}

/// Builds a smooth orientation by the spanning-tree construction, applied
/// per connected component: grow a breadth-first tree from the lowest
/// vertex id, re-root it at its lowest-id leaf, orient tree edges toward the
/// root, then orient the leftover edges coherently along the paths and
/// cycles they form. Existence is guaranteed for every cubic network.
pub fn find_smooth_orientation(net: &SpinNetwork) -> Result<SmoothOrientation> {
    let mut direction: BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)> = BTreeMap::new();
    let vindex: BTreeMap<VertexId, usize> = net
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, (v, _))| (*v, i))
        .collect();

    for comp in net.connected_components() {
        let comp_set: BTreeSet<VertexId> = comp.iter().copied().collect();
        // Breadth-first spanning tree from the lowest vertex id; neighbours
        // explored in edge-id order for reproducibility.
        let mut tree_edges: BTreeSet<EdgeId> = BTreeSet::new();
        let mut parent: BTreeMap<VertexId, (EdgeId, VertexId)> = BTreeMap::new();
        let mut visited: BTreeSet<VertexId> = BTreeSet::new();
        let start = comp[0];
        visited.insert(start);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut incident: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> = BTreeMap::new();
        for (e, pair) in net.edges() {
            let a = net.vertex_of(pair[0]);
            let b = net.vertex_of(pair[1]);
            if !comp_set.contains(&a) || a == b {
                continue;
            }
            incident.entry(a).or_default().push((*e, b));
            incident.entry(b).or_default().push((*e, a));
        }
        for adj in incident.values_mut() {
            adj.sort();
        }
        while let Some(v) = queue.pop_front() {
            for (e, w) in incident.get(&v).cloned().unwrap_or_default() {
                if visited.insert(w) {
                    tree_edges.insert(e);
                    parent.insert(w, (e, v));
                    queue.push_back(w);
                }
            }
        }

        if comp.len() == 1 {
            // A lone cubic vertex cannot close up on itself (one half-edge
            // would dangle), so components always carry a tree edge.
            unreachable!("cubic components have at least two vertices");
        }

        // Tree degree per vertex; root = lowest-id leaf.
        let mut tree_deg: BTreeMap<VertexId, u32> = comp.iter().map(|v| (*v, 0)).collect();
        for e in &tree_edges {
            let (_, pair) = net
                .edges()
                .iter()
                .find(|(ee, _)| ee == e)
                .expect("tree edge");
            *tree_deg.get_mut(&net.vertex_of(pair[0])).unwrap() += 1;
            *tree_deg.get_mut(&net.vertex_of(pair[1])).unwrap() += 1;
        }
        let root = *tree_deg
            .iter()
            .filter(|(_, d)| **d == 1)
            .map(|(v, _)| v)
            .min()
            .expect("a tree has leaves");

        // Orient tree edges toward the root: BFS from root, each edge points
        // from the farther vertex to the nearer one.
        let mut order = vec![root];
        let mut seen: BTreeSet<VertexId> = [root].into();
        let mut qi = 0;
        while qi < order.len() {
            let v = order[qi];
            qi += 1;
            for (e, w) in incident.get(&v).cloned().unwrap_or_default() {
                if tree_edges.contains(&e) && seen.insert(w) {
                    // edge e runs w -> v (toward the root side)
                    let (_, pair) = net.edges().iter().find(|(ee, _)| ee == &e).unwrap();
                    let (tail, head) = if net.vertex_of(pair[0]) == w {
                        (pair[0], pair[1])
                    } else {
                        (pair[1], pair[0])
                    };
                    direction.insert(e, (tail, head));
                    order.push(w);
                }
            }
        }

        // Remaining edges: every vertex has at most two leftover half-edges,
        // so they decompose into paths and cycles; orient each coherently.
        let mut pending: BTreeMap<VertexId, Vec<HalfEdgeId>> = BTreeMap::new();
        let mut unoriented: BTreeSet<EdgeId> = BTreeSet::new();
        for (e, pair) in net.edges() {
            if !comp_set.contains(&net.vertex_of(pair[0])) {
                continue;
            }
            if direction.contains_key(e) {
                continue;
            }
            unoriented.insert(*e);
            pending
                .entry(net.vertex_of(pair[0]))
                .or_default()
                .push(pair[0]);
            pending
                .entry(net.vertex_of(pair[1]))
                .or_default()
                .push(pair[1]);
        }
        for l in pending.values_mut() {
            l.sort();
        }

        let walk = |start_half: HalfEdgeId,
                        direction: &mut BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)>,
                        unoriented: &mut BTreeSet<EdgeId>,
                        pending: &mut BTreeMap<VertexId, Vec<HalfEdgeId>>| {
            let mut hout = start_half;
            loop {
                let e = net.edge_of(hout);
                if !unoriented.remove(&e) {
                    break;
                }
                let hin = net.mate(hout);
                direction.insert(e, (hout, hin));
                let v = net.vertex_of(hout);
                pending.get_mut(&v).map(|l| l.retain(|x| *x != hout));
                let w = net.vertex_of(hin);
                let list = pending.get_mut(&w).expect("endpoint is pending");
                list.retain(|x| *x != hin);
                match list.first() {
                    Some(next) => hout = *next,
                    None => break,
                }
            }
        };

        // Paths first: start from vertices holding exactly one leftover
        // half-edge, in id order.
        loop {
            let start = pending
                .iter()
                .filter(|(_, l)| l.len() == 1)
                .map(|(_, l)| l[0])
                .min();
            match start {
                Some(h0) => walk(h0, &mut direction, &mut unoriented, &mut pending),
                None => break,
            }
        }
        // Cycles (including loops): start from the lowest leftover half-edge.
        while let Some(e) = unoriented.iter().next().copied() {
            let (_, pair) = net.edges().iter().find(|(ee, _)| ee == &e).unwrap();
            let h0 = pair[0].min(pair[1]);
            walk(h0, &mut direction, &mut unoriented, &mut pending);
        }
        let _ = vindex;
    }

    let o = SmoothOrientation::new(direction);
    if validate_smooth(net, &o) {
        Ok(o)
    } else {
        Err(Error::BadOrientation)
    }
}

/// The two same-direction half-edges at `v` under `o`.
pub fn gate_at(net: &SpinNetwork, o: &SmoothOrientation, v: VertexId) -> Result<[HalfEdgeId; 2]> {
    let rot = net.rotation(v)?;
    let outs: Vec<HalfEdgeId> = rot.iter().copied().filter(|h| o.is_tail(net, *h)).collect();
    let ins: Vec<HalfEdgeId> = rot
        .iter()
        .copied()
        .filter(|h| !o.is_tail(net, *h))
        .collect();
    match (ins.len(), outs.len()) {
        (1, 2) => Ok([outs[0], outs[1]]),
        (2, 1) => Ok([ins[0], ins[1]]),
        _ => Err(Error::BadOrientation),
    }
}

/// The half-edge at `v` whose direction is unique (the non-gate one).
pub fn odd_half_edge(
    net: &SpinNetwork,
    o: &SmoothOrientation,
    v: VertexId,
) -> Result<HalfEdgeId> {
    let gate = gate_at(net, o, v)?;
    let rot = net.rotation(v)?;
    Ok(rot
        .into_iter()
        .find(|h| *h != gate[0] && *h != gate[1])
        .expect("three distinct half-edges"))
}

/// Face-derived gate order: the pair `(x, y)` such that `y` immediately
/// follows `x` in the counterclockwise rotation at the vertex, i.e. the
/// ordering that runs counterclockwise along the face touching the gate
/// corner. Exactly one of the two orders has this property.
pub fn canonical_gate_signage(net: &SpinNetwork, o: &SmoothOrientation) -> Result<GateSignage> {
    let mut order = BTreeMap::new();
    for (v, _) in net.vertices() {
        let [x, y] = gate_at(net, o, *v)?;
        let pair = if net.rotation_next(x) == y { (x, y) } else { (y, x) };
        order.insert(*v, pair);
    }
    Ok(GateSignage::new(order))
}

/// Gate order taken from the rotation triple read from its stored start:
/// whichever gate member appears first is listed first.
pub fn arbitrary_gate_signage(net: &SpinNetwork, o: &SmoothOrientation) -> Result<GateSignage> {
    let mut order = BTreeMap::new();
    for (v, rot) in net.vertices() {
        let gate = gate_at(net, o, *v)?;
        let firsts: Vec<HalfEdgeId> = rot
            .iter()
            .copied()
            .filter(|h| gate.contains(h))
            .collect();
        order.insert(*v, (firsts[0], firsts[1]));
    }
    Ok(GateSignage::new(order))
}

/// Splits vertices by indegree. For closed cubic networks the two classes
/// always balance: counting half-edges, 2|v_pi| + |v_iota| = |v_pi| + 2|v_iota|.
pub fn classify_vertices(net: &SpinNetwork, o: &SmoothOrientation) -> Result<VertexPartition> {
    let mut v_pi = BTreeSet::new();
    let mut v_iota = BTreeSet::new();
    for (v, _) in net.vertices() {
        match degree_pair(net, o, *v) {
            (2, 1) => v_pi.insert(*v),
            (1, 2) => v_iota.insert(*v),
            _ => return Err(Error::BadOrientation),
        };
    }
    Ok(VertexPartition { v_pi, v_iota })
}

/// Enumerates all smooth orientations of a small network (2^|E| scan),
/// used by sign-independence tests.
pub fn all_smooth_orientations(net: &SpinNetwork) -> Vec<SmoothOrientation> {
    let m = net.edges().len();
    assert!(m <= 16, "enumeration is for small networks");
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let mut direction = BTreeMap::new();
        for (i, (e, pair)) in net.edges().iter().enumerate() {
            let (t, h) = if mask >> i & 1 == 0 {
                (pair[0], pair[1])
            } else {
                (pair[1], pair[0])
            };
            direction.insert(*e, (t, h));
        }
        let o = SmoothOrientation::new(direction);
        if validate_smooth(net, &o) {
            out.push(o);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn theta_orientation_forced_shape() {
        let t = graph::theta(2, 2, 2);
        let o = find_smooth_orientation(&t).unwrap();
        assert!(validate_smooth(&t, &o));
        let p = classify_vertices(&t, &o).unwrap();
        assert_eq!(p.v_pi.len(), 1);
        assert_eq!(p.v_iota.len(), 1);
    }

    #[test]
    fn all_same_direction_is_not_smooth() {
        let t = graph::theta(2, 2, 2);
        // all three edges pointing the same way: a (3,0) vertex
        let direction = t.edges().iter().map(|(e, p)| (*e, (p[0], p[1]))).collect();
        let o = SmoothOrientation::new(direction);
        assert!(!validate_smooth(&t, &o));
    }

    #[test]
    fn tetrahedron_and_drums_validate() {
        for net in [
            graph::tetrahedron([2; 6]),
            graph::drum_uniform(2, 2).unwrap(),
            graph::drum_uniform(3, 2).unwrap(),
            graph::dumbbell(2, 2, 0),
        ] {
            let o = find_smooth_orientation(&net).unwrap();
            assert!(validate_smooth(&net, &o));
            let p = classify_vertices(&net, &o).unwrap();
            assert_eq!(p.v_pi.len(), p.v_iota.len());
            assert_eq!(p.v_pi.len() + p.v_iota.len(), net.vertices().len());
        }
    }

    #[test]
    fn random_networks_get_smooth_orientations() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let n = 2 * rng.gen_range(1..=6);
            let g = graph::random_cubic(n, &mut rng).unwrap();
            let o = find_smooth_orientation(&g).unwrap();
            assert!(validate_smooth(&g, &o));
        }
    }

    #[test]
    fn disconnected_networks_handled_per_component() {
        let u = graph::theta(2, 2, 2).disjoint_union(&graph::tetrahedron([2; 6]));
        let o = find_smooth_orientation(&u).unwrap();
        assert!(validate_smooth(&u, &o));
    }

    #[test]
    fn gate_signages_cover_all_vertices() {
        let net = graph::tetrahedron([2; 6]);
        let o = find_smooth_orientation(&net).unwrap();
        for gs in [
            canonical_gate_signage(&net, &o).unwrap(),
            arbitrary_gate_signage(&net, &o).unwrap(),
        ] {
            for (v, _) in net.vertices() {
                let (x, y) = gs.order(*v).unwrap();
                let gate = gate_at(&net, &o, *v).unwrap();
                assert!(gate.contains(&x) && gate.contains(&y) && x != y);
            }
        }
    }

    #[test]
    fn theta_has_six_smooth_orientations() {
        // Choose the minority edge (3 ways) and the overall direction (2).
        let t = graph::theta(2, 2, 2);
        assert_eq!(all_smooth_orientations(&t).len(), 6);
    }
}
