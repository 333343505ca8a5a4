//! Greedy contraction-order planner.
//!
//! Nodes are tensors described by their labeled axes; contraction edges are
//! label pairs. At each step the planner merges the connected pair whose
//! merged node has the smallest product of remaining open-axis sizes,
//! breaking ties by the lowest edge label between the pair. Disconnected
//! remainders are combined by outer products at the end, so the plan always
//! reduces to a single node.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Axis labels and weights of one tensor, for planning purposes.
#[derive(Debug, Clone)]
pub struct NodeShape {
    pub axes: Vec<(u64, u32)>,
}

/// Merge `right` into `left` (slot indices into the original tensor list;
/// the merged tensor stays in `left`'s slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
}

fn open_size_product(axes: &BTreeSet<(u64, u32)>, closed: &BTreeSet<u64>) -> f64 {
    axes.iter()
        .filter(|(l, _)| !closed.contains(l))
        .map(|(_, w)| (*w as f64) + 1.0)
        .product()
}

/// Computes a deterministic merge order for the whole node list.
pub fn plan_contraction(nodes: &[NodeShape], edges: &[(u64, u64)]) -> Result<Vec<MergeStep>> {
    // Validate that edge labels are present and unique.
    let mut label_owner = std::collections::BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        for (l, _) in &n.axes {
            if label_owner.insert(*l, i).is_some() {
                return Err(Error::AxisMismatch(format!("label {l} appears twice")));
            }
        }
    }
    for (l1, l2) in edges {
        if !label_owner.contains_key(l1) || !label_owner.contains_key(l2) {
            return Err(Error::AxisMismatch(format!("edge ({l1},{l2}) has no axis")));
        }
    }

    let mut alive: Vec<Option<BTreeSet<(u64, u32)>>> = nodes
        .iter()
        .map(|n| Some(n.axes.iter().copied().collect()))
        .collect();
    let owner = |sets: &Vec<Option<BTreeSet<(u64, u32)>>>, l: u64| -> Option<usize> {
        sets.iter()
            .position(|s| s.as_ref().is_some_and(|s| s.iter().any(|(x, _)| *x == l)))
    };

    let mut steps = Vec::new();
    loop {
        // Candidate merges: pairs of live nodes connected by at least one edge.
        let mut best: Option<(f64, u64, usize, usize)> = None;
        for (l1, l2) in edges {
            let (Some(i), Some(j)) = (owner(&alive, *l1), owner(&alive, *l2)) else {
                continue;
            };
            if i == j {
                continue;
            }
            let (i, j) = (i.min(j), i.max(j));
            let mut merged: BTreeSet<(u64, u32)> = alive[i].as_ref().unwrap().clone();
            merged.extend(alive[j].as_ref().unwrap().iter().copied());
            // Labels closed after this merge: every edge with both ends inside.
            let mut closed = BTreeSet::new();
            for (a, b) in edges {
                let has = |l: &u64| merged.iter().any(|(x, _)| x == l);
                if has(a) && has(b) {
                    closed.insert(*a);
                    closed.insert(*b);
                }
            }
            let cost = open_size_product(&merged, &closed);
            let tie = (*l1).min(*l2);
            let cand = (cost, tie, i, j);
            best = match best {
                None => Some(cand),
                Some(b) => {
                    if cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2, cand.3) < (b.1, b.2, b.3))
                    {
                        Some(cand)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        match best {
            Some((_, _, i, j)) => {
                let right = alive[j].take().unwrap();
                alive[i].as_mut().unwrap().extend(right);
                steps.push(MergeStep { left: i, right: j });
            }
            None => break,
        }
    }

    // Outer products for disconnected leftovers, lowest slots first.
    let live: Vec<usize> = alive
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.as_ref().map(|_| i))
        .collect();
    for w in live.windows(2) {
        steps.push(MergeStep { left: live[0], right: w[1] });
    }
    Ok(steps)
}
