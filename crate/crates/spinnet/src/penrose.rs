//! The Penrose evaluation: a brute-force state sum over per-edge strand
//! permutations.
//!
//! Every edge of decoration `m` is thickened into a band of `m` parallel
//! strands broken by an antisymmetrizer bar (a signed sum over the `m!`
//! permutations). At each vertex the strands connect in the unique
//! non-crossing way compatible with the rotation. A state is a choice of
//! permutation per edge; it resolves the diagram into closed curves, and
//! contributes the product of the permutation signs times `(-2)` to the
//! number of curves.
//!
//! Crossing counts reduce to permutation signs: any two planar drawings of a
//! permutation's strand diagram differ by an even number of crossings, so
//! `(-1)^crossings` per edge is exactly `sign(sigma_e)`.
//!
//! Band slot convention: slot `i` (0-based, ordered along the rotation
//! direction as seen entering the vertex) connects to slot `m-1-sigma(i)`
//! on the far side — crossing an untwisted band in an oriented surface
//! reverses the apparent slot order, and the bar permutation composes with
//! that reversal. This convention reproduces the worked value
//! `theta(2,2,2) = -24` and is pinned by the acceptance suite.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::factorial;
use crate::error::{Error, Result};
use crate::graph::{HalfEdgeId, SpinNetwork};
use crate::par;
use crate::{EvalOptions, Parallelism};

/// One strand position at a half-edge. Index is 1-based, counted along the
/// rotation direction as seen entering the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrandSlot {
    pub half_edge: HalfEdgeId,
    pub index: u32,
}

/// The non-crossing strand connection at one vertex: between bundles `x`
/// and `y` (third `z`) exactly `(x+y-z)/2` strands run, nested toward the
/// shared corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMatching {
    pub pairs: Vec<(StrandSlot, StrandSlot)>,
}

/// Result of a Penrose state sum.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSumResult {
    /// Always an integer.
    pub value: BigRational,
    pub states_visited: u64,
}

/// The unique non-crossing, bundle-separating matching for an admissible
/// triple laid out counterclockwise around a vertex disc. Bundles are
/// numbered 0, 1, 2 in rotation order; the half-edge ids are placeholders
/// `0, 1, 2` (callers at a concrete vertex substitute their own).
pub fn vertex_matching(a: u32, b: u32, c: u32) -> Result<VertexMatching> {
    if !crate::graph::triple_admissible(a, b, c) {
        return Err(Error::Inadmissible(format!("triple ({a},{b},{c})")));
    }
    let mut pairs = Vec::new();
    let gamma = [a, b, c];
    for bundle in 0..3usize {
        let next = (bundle + 1) % 3;
        let (x, y, z) = (gamma[bundle], gamma[next], gamma[(bundle + 2) % 3]);
        let k = (x + y - z) / 2;
        for i in 0..k {
            pairs.push((
                StrandSlot {
                    half_edge: HalfEdgeId(bundle as u32),
                    index: x - k + i + 1,
                },
                StrandSlot {
                    half_edge: HalfEdgeId(next as u32),
                    index: k - i,
                },
            ));
        }
    }
    Ok(VertexMatching { pairs })
}

struct EdgePerms {
    base0: usize,
    base1: usize,
    m: usize,
    perms: Vec<Vec<u8>>,
    signs: Vec<i8>,
}

struct Enumeration {
    total_slots: usize,
    /// vertex-matching involution on global slots
    vmatch: Vec<usize>,
    edges: Vec<EdgePerms>,
    states: u64,
}

fn lex_permutations(m: usize) -> (Vec<Vec<u8>>, Vec<i8>) {
    let mut perms = Vec::new();
    let mut signs = Vec::new();
    let mut cur: Vec<u8> = (0..m as u8).collect();
    loop {
        let mut inv = 0u32;
        for i in 0..m {
            for j in i + 1..m {
                if cur[i] > cur[j] {
                    inv += 1;
                }
            }
        }
        perms.push(cur.clone());
        signs.push(if inv % 2 == 0 { 1 } else { -1 });
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    (perms, signs)
}

fn prepare(net: &SpinNetwork, limit: u64) -> Result<Enumeration> {
    let mut states = 1u64;
    for (e, _) in net.edges() {
        let m = net.decoration(*e) as u64;
        let f = (1..=m).fold(1u64, u64::saturating_mul);
        states = states.saturating_mul(f);
        if states > limit {
            return Err(Error::StateLimitExceeded { states, limit });
        }
    }

    let mut slot_base = BTreeMap::new();
    let mut total = 0usize;
    for (e, pair) in net.edges() {
        let m = net.decoration(*e) as usize;
        for h in pair {
            slot_base.insert(*h, total);
            total += m;
        }
    }

    let mut vmatch = vec![usize::MAX; total];
    for (v, rot) in net.vertices() {
        let t = net.triple_at(*v).expect("vertex exists");
        let matching = vertex_matching(t[0], t[1], t[2])?;
        for (s1, s2) in matching.pairs {
            let g1 = slot_base[&rot[s1.half_edge.0 as usize]] + s1.index as usize - 1;
            let g2 = slot_base[&rot[s2.half_edge.0 as usize]] + s2.index as usize - 1;
            vmatch[g1] = g2;
            vmatch[g2] = g1;
        }
    }
    debug_assert!(vmatch.iter().all(|&s| s != usize::MAX));

    let mut edges = Vec::new();
    for (e, pair) in net.edges() {
        let m = net.decoration(*e) as usize;
        let (perms, signs) = lex_permutations(m);
        edges.push(EdgePerms {
            base0: slot_base[&pair[0]],
            base1: slot_base[&pair[1]],
            m,
            perms,
            signs,
        });
    }
    Ok(Enumeration {
        total_slots: total,
        vmatch,
        edges,
        states,
    })
}

fn count_curves(vmatch: &[usize], bstep: &[usize], visited: &mut [u64], epoch: u64) -> u32 {
    let mut curves = 0;
    for start in 0..vmatch.len() {
        if visited[start] == epoch {
            continue;
        }
        curves += 1;
        let mut s = start;
        loop {
            visited[s] = epoch;
            let t = vmatch[s];
            visited[t] = epoch;
            s = bstep[t];
            if s == start {
                break;
            }
        }
    }
    curves
}

fn write_band(bstep: &mut [usize], e: &EdgePerms, perm: &[u8]) {
    // side-0 slot i -> side-1 slot m-1-perm[i], and back
    for (i, &p) in perm.iter().enumerate() {
        let j = e.m - 1 - p as usize;
        bstep[e.base0 + i] = e.base1 + j;
        bstep[e.base1 + j] = e.base0 + i;
    }
}

/// Histogram of signed state counts by curve number for one connected,
/// edge-bearing component. States are enumerated lexicographically by edge
/// id; the outermost edge is partitioned across workers. The merged
/// histogram is an exact integer object, so the result does not depend on
/// the partitioning.
fn histogram(en: &Enumeration, mode: Parallelism) -> Vec<i64> {
    let max_curves = en.total_slots / 2 + 2;
    let ne = en.edges.len();
    if ne == 0 {
        // the empty state: zero curves
        let mut hist = vec![0i64; max_curves];
        hist[0] = 1;
        return hist;
    }
    let first_count = en.edges[0].perms.len() as u64;

    let run_block = |first_idx: usize, hist: &mut [i64]| {
        let mut bstep = vec![0usize; en.total_slots];
        let mut visited = vec![0u64; en.total_slots];
        let mut epoch = 0u64;
        let mut digits = vec![0usize; ne];
        digits[0] = first_idx;
        for (d, e) in en.edges.iter().enumerate() {
            write_band(&mut bstep, e, &e.perms[digits[d]]);
        }
        loop {
            epoch += 1;
            let sign: i64 = en
                .edges
                .iter()
                .zip(&digits)
                .map(|(e, &d)| e.signs[d] as i64)
                .product();
            let n = count_curves(&en.vmatch, &bstep, &mut visited, epoch) as usize;
            hist[n] += sign;
            // odometer over edges 1.., the last edge fastest
            let mut d = ne;
            loop {
                if d <= 1 {
                    return;
                }
                d -= 1;
                digits[d] += 1;
                if digits[d] < en.edges[d].perms.len() {
                    write_band(&mut bstep, &en.edges[d], &en.edges[d].perms[digits[d]]);
                    break;
                }
                digits[d] = 0;
                write_band(&mut bstep, &en.edges[d], &en.edges[d].perms[0]);
            }
        }
    };

    par::fold_range(
        mode,
        first_count,
        || vec![0i64; max_curves],
        |mut hist, first_idx| {
            run_block(first_idx as usize, &mut hist);
            hist
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

fn closed_form_trivial(a: u32) -> BigInt {
    let f = factorial(a + 1);
    if a % 2 == 0 {
        f
    } else {
        -f
    }
}

/// Exact Penrose evaluation. Factorizes over connected components; trivial
/// components contribute `(-1)^a (a+1)!` in closed form.
pub fn penrose_evaluate(net: &SpinNetwork, opts: &EvalOptions) -> Result<StateSumResult> {
    let report = net.check_admissible();
    if !report.admissible {
        return Err(Error::Inadmissible(format!(
            "{} vertex violations",
            report.violations.len()
        )));
    }
    let mut total_states = 1u64;
    for (e, _) in net.edges() {
        let m = net.decoration(*e) as u64;
        total_states = total_states.saturating_mul((1..=m).fold(1u64, u64::saturating_mul));
    }
    if total_states > opts.state_limit {
        return Err(Error::StateLimitExceeded {
            states: total_states,
            limit: opts.state_limit,
        });
    }

    let (components, trivial) = net.split_components();
    let mut value = BigInt::one();
    let mut visited = 0u64;
    for comp in components {
        let en = prepare(&comp, opts.state_limit)?;
        let hist = histogram(&en, opts.parallelism);
        let mut comp_value = BigInt::zero();
        let mut pow = BigInt::one(); // (-2)^n
        for count in &hist {
            if *count != 0 {
                comp_value += BigInt::from(*count) * &pow;
            }
            pow *= BigInt::from(-2);
        }
        value *= comp_value;
        visited += en.states;
    }
    for a in trivial {
        value *= closed_form_trivial(a);
    }
    Ok(StateSumResult {
        value: BigRational::from_integer(value),
        states_visited: visited,
    })
}

/// `((a+b-c)/2)! ((a+c-b)/2)! ((b+c-a)/2)!` multiplied over all vertices
/// (loop decorations counted twice), the factor between the Penrose and
/// standard evaluations.
pub fn vertex_factorial_product(net: &SpinNetwork) -> BigInt {
    let mut prod = BigInt::one();
    for (v, _) in net.vertices() {
        let [a, b, c] = net.triple_at(*v).expect("vertex exists");
        prod *=
            factorial((a + b - c) / 2) * factorial((a + c - b) / 2) * factorial((b + c - a) / 2);
    }
    prod
}

/// Standard evaluation via the Penrose engine.
pub fn standard_evaluate_from_penrose(
    net: &SpinNetwork,
    opts: &EvalOptions,
) -> Result<BigRational> {
    let p = penrose_evaluate(net, opts)?;
    Ok(p.value / BigRational::from_integer(vertex_factorial_product(net)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big;
    use crate::graph;

    fn value(net: &SpinNetwork) -> BigRational {
        penrose_evaluate(net, &EvalOptions::default()).unwrap().value
    }

    /// All non-crossing perfect matchings of a cyclic slot sequence that
    /// never pair two slots of the same bundle (brute-force oracle).
    fn noncrossing_matchings(bundles: &[usize]) -> Vec<Vec<(usize, usize)>> {
        fn arcs(slots: &[usize], bundles: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            let Some(&first) = slots.first() else {
                out.push(acc.clone());
                return;
            };
            for (pos, &j) in slots.iter().enumerate().skip(1) {
                if bundles[j] == bundles[first] || pos % 2 == 0 {
                    continue;
                }
                acc.push((first, j));
                let inner: Vec<usize> = slots[1..pos].to_vec();
                let outer: Vec<usize> = slots[pos + 1..].to_vec();
                // inner and outer arcs must match independently
                let mut inner_out = Vec::new();
                arcs(&inner, bundles, &mut Vec::new(), &mut inner_out);
                for im in inner_out {
                    let mut acc2 = acc.clone();
                    acc2.extend(im);
                    arcs(&outer, bundles, &mut acc2, out);
                }
                acc.pop();
            }
        }
        let slots: Vec<usize> = (0..bundles.len()).collect();
        let mut out = Vec::new();
        arcs(&slots, bundles, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn matching_is_the_unique_noncrossing_one() {
        for (a, b, c) in [(2, 2, 2), (6, 7, 5), (3, 3, 0), (4, 2, 2), (1, 2, 1)] {
            let fast = vertex_matching(a, b, c).unwrap();
            // linearize: bundle id per cyclic slot
            let mut bundles = Vec::new();
            for (i, g) in [a, b, c].iter().enumerate() {
                bundles.extend(std::iter::repeat(i).take(*g as usize));
            }
            let all = noncrossing_matchings(&bundles);
            assert_eq!(all.len(), 1, "matching not unique for ({a},{b},{c})");
            // convert ours to flat slot pairs for comparison
            let base = [0, a as usize, (a + b) as usize];
            let mut ours: Vec<(usize, usize)> = fast
                .pairs
                .iter()
                .map(|(s, t)| {
                    let x = base[s.half_edge.0 as usize] + s.index as usize - 1;
                    let y = base[t.half_edge.0 as usize] + t.index as usize - 1;
                    (x.min(y), x.max(y))
                })
                .collect();
            ours.sort();
            let mut theirs: Vec<(usize, usize)> = all[0]
                .iter()
                .map(|&(x, y)| (x.min(y), x.max(y)))
                .collect();
            theirs.sort();
            assert_eq!(ours, theirs, "mismatch for ({a},{b},{c})");
        }
    }

    #[test]
    fn matching_counts_match_the_admissibility_split() {
        // (6,7,5): 4 strands between bundles 0-1, 3 between 1-2, 2 between 2-0
        let m = vertex_matching(6, 7, 5).unwrap();
        let count = |x: u32, y: u32| {
            m.pairs
                .iter()
                .filter(|(s, t)| {
                    (s.half_edge.0, t.half_edge.0) == (x, y)
                        || (t.half_edge.0, s.half_edge.0) == (x, y)
                })
                .count()
        };
        assert_eq!(count(0, 1), 4);
        assert_eq!(count(1, 2), 3);
        assert_eq!(count(2, 0), 2);
        assert!(vertex_matching(1, 1, 1).is_err());
    }

    #[test]
    fn forced_matching_for_degenerate_bundle() {
        // (a,a,0): bundle 0 pairs with bundle 1 in reversed order
        let m = vertex_matching(3, 3, 0).unwrap();
        for (s, t) in &m.pairs {
            assert_eq!(s.index + t.index, 4);
        }
    }

    #[test]
    fn worked_example_theta_222() {
        let r = penrose_evaluate(&graph::theta(2, 2, 2), &EvalOptions::default()).unwrap();
        assert_eq!(r.value, big(-24));
        assert_eq!(r.states_visited, 8);
    }

    #[test]
    fn empty_decorations_give_one() {
        assert_eq!(value(&graph::theta(0, 0, 0)), big(1));
    }

    #[test]
    fn trivial_components_closed_form_vs_enumeration() {
        // oracle: sum over permutations of sign * (-2)^cycles
        for a in 0..=8u32 {
            let engine = value(&graph::trivial(a));
            let (perms, signs) = lex_permutations(a as usize);
            let mut oracle = BigInt::zero();
            for (perm, sign) in perms.iter().zip(&signs) {
                let mut seen = vec![false; a as usize];
                let mut cycles = 0;
                for s in 0..a as usize {
                    if seen[s] {
                        continue;
                    }
                    cycles += 1;
                    let mut t = s;
                    while !seen[t] {
                        seen[t] = true;
                        t = perm[t] as usize;
                    }
                }
                oracle += BigInt::from(*sign) * BigInt::from(-2).pow(cycles);
            }
            assert_eq!(engine, BigRational::from_integer(oracle), "a = {a}");
            // and the closed form
            assert_eq!(engine, BigRational::from_integer(closed_form_trivial(a)));
        }
    }

    #[test]
    fn dumbbell_with_decorated_bridge_vanishes() {
        assert_eq!(value(&graph::dumbbell(2, 2, 2)), big(0));
        assert_eq!(value(&graph::dumbbell(3, 2, 2)), big(0));
    }

    #[test]
    fn factorizes_over_components() {
        let t = graph::theta(2, 2, 2);
        let d = graph::dumbbell(2, 1, 0);
        let u = t.disjoint_union(&d);
        assert_eq!(value(&u), value(&t) * value(&d));
        let with_trivial = t.disjoint_union(&graph::trivial(3));
        assert_eq!(value(&with_trivial), value(&t) * big(-24));
    }

    #[test]
    fn sign_flip_on_theta() {
        // flipping one vertex of theta(a,b,c) multiplies by
        // (-1)^((a(a-1)+b(b-1)+c(c-1))/2)
        for (a, b, c) in [(2u32, 2, 2), (1, 1, 2), (3, 2, 1), (3, 3, 2)] {
            let t = graph::theta(a, b, c);
            let f = t.flip_cyclic_order(crate::graph::VertexId(0)).unwrap();
            let expo = (a * (a - 1) + b * (b - 1) + c * (c - 1)) / 2;
            let sign = if expo % 2 == 0 { big(1) } else { big(-1) };
            assert_eq!(value(&f), sign * value(&t), "({a},{b},{c})");
        }
    }

    #[test]
    fn state_guard() {
        let mut opts = EvalOptions::default();
        opts.state_limit = 5;
        let err = penrose_evaluate(&graph::theta(2, 2, 2), &opts).unwrap_err();
        assert!(matches!(err, Error::StateLimitExceeded { .. }));
    }

    #[test]
    fn standard_evaluation_examples() {
        let opts = EvalOptions::default();
        let s = standard_evaluate_from_penrose(&graph::theta(2, 2, 2), &opts).unwrap();
        assert_eq!(s, big(-24));
        let s0 = standard_evaluate_from_penrose(&graph::theta(0, 0, 0), &opts).unwrap();
        assert_eq!(s0, big(1));
        // trivial component: unchanged, no vertices
        let st = standard_evaluate_from_penrose(&graph::trivial(3), &opts).unwrap();
        assert_eq!(st, big(-24));
    }

    #[test]
    fn parallel_and_sequential_agree_bit_for_bit() {
        let net = graph::theta(3, 3, 2);
        let seq = penrose_evaluate(&net, &EvalOptions::sequential()).unwrap();
        let par = penrose_evaluate(&net, &EvalOptions::default()).unwrap();
        assert_eq!(seq, par);
    }
}
