//! Vertex tensors for Clebsch-Gordan networks.
//!
//! A trivalent vertex with gate decorations `a`, `b` and remaining
//! decoration `c` is replaced by three symmetrizers joined by strand
//! bundles: `k = (a+b-c)/2` epsilon strands between the two gate legs and
//! Kronecker-delta bundles of sizes `(a+c-b)/2` and `(b+c-a)/2` toward the
//! third leg. The compressed components admit a closed combinatorial sum
//! over the ways the index value 2 distributes across the bundles, with the
//! epsilon pairs contributing signs; that sum is certified against the
//! microscopic oracle in the tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{binomial, factorial};
use crate::error::{Error, Result};

use super::{Axis, RatTensor, SymTensor};

/// A vertex tensor: three axes `(gate1, gate2, odd)` with labels `0,1,2`,
/// plus the epsilon count at the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexTensor {
    pub tensor: RatTensor,
    /// Number of epsilon strands between the two gate legs.
    pub epsilon_count: u32,
}

fn admissible(a: u32, b: u32, c: u32) -> Result<()> {
    if crate::graph::triple_admissible(a, b, c) {
        Ok(())
    } else {
        Err(Error::Inadmissible(format!("triple ({a},{b},{c})")))
    }
}

/// Unnormalized component sum: distributions of value-2 indices over the
/// strand groups. `j` counts epsilon pairs carrying 2 on the gate-1 side,
/// each of which contributes a minus sign (epsilon arrows run gate1 -> gate2).
fn raw_component(a: u32, b: u32, k: u32, p: u32, q: u32) -> BigInt {
    let (a, b, k, p, q) = (a as i64, b as i64, k as i64, p as i64, q as i64);
    let j_min = 0.max(p - (a - k)).max(k - q);
    let j_max = k.min(p).min(b - q);
    let mut total = BigInt::zero();
    for j in j_min..=j_max {
        // value-2 counts: j on epsilon gate-1 sides, p - j on gate-1 deltas,
        // q - (k - j) on gate-2 deltas
        let term = binomial(k as u32, j as u32)
            * binomial((a - k) as u32, (p - j) as u32)
            * binomial((b - k) as u32, (q - k + j) as u32);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Exact vertex tensor in the compressed basis. Axes are labeled `0,1,2`
/// for `(gate1, gate2, odd)` with weights `(a, b, c)`; relabel for network
/// use. `gate_order = false` reverses every epsilon arrow, multiplying the
/// tensor by `(-1)^k`.
pub fn vertex_tensor(a: u32, b: u32, c: u32, gate_order: bool) -> Result<VertexTensor> {
    let (tensor, scale) = vertex_tensor_scaled(a, b, c, gate_order)?;
    let mut tensor = tensor;
    tensor.scale_by(&scale);
    Ok(VertexTensor {
        tensor,
        epsilon_count: (a + b - c) / 2,
    })
}

/// The vertex tensor multiplied by `a! b! c!` (making every entry an
/// integer), together with the factored-out scale `1 / (a! b! c!)`.
/// Evaluators contract the integer tensors and apply the collected scales
/// once at the end, which keeps big-rational reduction out of inner loops.
pub fn vertex_tensor_scaled(
    a: u32,
    b: u32,
    c: u32,
    gate_order: bool,
) -> Result<(RatTensor, BigRational)> {
    admissible(a, b, c)?;
    let k = (a + b - c) / 2;
    let axes = vec![
        Axis { label: 0, weight: a },
        Axis { label: 1, weight: b },
        Axis { label: 2, weight: c },
    ];
    let mut t = SymTensor::zeros(axes);
    for p in 0..=a {
        for q in 0..=b {
            if p + q < k {
                continue;
            }
            let r = p + q - k;
            if r > c {
                continue;
            }
            let raw = raw_component(a, b, k, p, q);
            if raw.is_zero() {
                continue;
            }
            // a! b! c! / (C(a,p) C(b,q) C(c,r)) = p!(a-p)! q!(b-q)! r!(c-r)!
            let mut val = raw
                * factorial(p)
                * factorial(a - p)
                * factorial(q)
                * factorial(b - q)
                * factorial(r)
                * factorial(c - r);
            if !gate_order && k % 2 == 1 {
                val = -val;
            }
            t.set(
                &[p as usize, q as usize, r as usize],
                BigRational::from_integer(val),
            );
        }
    }
    let scale = BigRational::new(BigInt::one(), factorial(a) * factorial(b) * factorial(c));
    Ok((t, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, ratio};

    #[test]
    fn epsilon_vertex() {
        // (1,1,0): the tensor is the epsilon matrix itself.
        let v = vertex_tensor(1, 1, 0, true).unwrap();
        assert_eq!(v.epsilon_count, 1);
        assert_eq!(v.tensor.get(&[0, 1, 0]), &big(1));
        assert_eq!(v.tensor.get(&[1, 0, 0]), &big(-1));
        assert_eq!(v.tensor.get(&[0, 0, 0]), &big(0));
        assert_eq!(v.tensor.get(&[1, 1, 0]), &big(0));
        let w = vertex_tensor(1, 1, 0, false).unwrap();
        assert_eq!(w.tensor.get(&[0, 1, 0]), &big(-1));
    }

    #[test]
    fn pure_delta_vertex() {
        // (1,1,2): symmetrized double delta, all components nonnegative.
        let v = vertex_tensor(1, 1, 2, true).unwrap().tensor;
        assert_eq!(v.get(&[0, 0, 0]), &big(1));
        assert_eq!(v.get(&[1, 0, 1]), &ratio(1, 2));
        assert_eq!(v.get(&[0, 1, 1]), &ratio(1, 2));
        assert_eq!(v.get(&[1, 1, 2]), &big(1));
        assert_eq!(v.get(&[1, 0, 0]), &big(0));
    }

    #[test]
    fn pairing_vertex_support() {
        // (a,a,0): nonzero only on the antidiagonal p + q = a.
        for a in 1..=4u32 {
            let v = vertex_tensor(a, a, 0, true).unwrap().tensor;
            for p in 0..=a as usize {
                for q in 0..=a as usize {
                    let z = v.get(&[p, q, 0]).is_zero();
                    assert_eq!(z, p + q != a as usize, "a={a} p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn inadmissible_rejected() {
        assert!(vertex_tensor(1, 1, 1, true).is_err());
        assert!(vertex_tensor(1, 1, 4, true).is_err());
    }

    #[test]
    fn scaled_entries_are_integers() {
        for (a, b, c) in [(2, 2, 2), (3, 3, 4), (4, 2, 2), (6, 5, 3)] {
            let (t, _) = vertex_tensor_scaled(a, b, c, true).unwrap();
            for e in t.entries() {
                assert!(e.is_integer());
            }
        }
    }
}
