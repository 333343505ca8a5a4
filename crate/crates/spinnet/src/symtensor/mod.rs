//! Exact tensors in the compressed symmetric basis.
//!
//! An axis of symbol weight `a` has `a + 1` slots: slot `p` holds the common
//! component of the underlying symmetric tensor over microscopic indices in
//! {1,2} with exactly `p` indices equal to 2. Contracting two such axes
//! inserts the binomial metric `C(a, p)`, which counts the microscopic index
//! tuples in each multiplicity class.
//!
//! Tensors are value types; the scalar is either `BigRational` (exact, the
//! default and the only mode used by correctness tests) or `f64` (reserved
//! for large-dilation asymptotics).

mod micro;
mod plan;
mod vertex;

pub use micro::{micro_contract, LineKind, MicroDiagram, MicroLine, MicroTensor, Port};
pub use plan::{plan_contraction, MergeStep, NodeShape};
pub use vertex::{vertex_tensor, vertex_tensor_scaled, VertexTensor};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};

/// Entry type of a [`SymTensor`]: exact rationals or binary64.
pub trait Scalar:
    Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static + Zero + One
{
    fn acc_add(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn from_bigint(x: &BigInt) -> Self;
    fn from_rational(x: &BigRational) -> Self;
}

impl Scalar for BigRational {
    fn acc_add(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn from_bigint(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }
    fn from_rational(x: &BigRational) -> Self {
        x.clone()
    }
}

impl Scalar for f64 {
    fn acc_add(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn from_bigint(x: &BigInt) -> Self {
        x.to_f64().unwrap_or_else(|| {
            let ln = arith::ln_biguint(x.magnitude());
            let v = ln.exp();
            if x.is_negative() {
                -v
            } else {
                v
            }
        })
    }
    fn from_rational(x: &BigRational) -> Self {
        arith::rational_to_f64(x)
    }
}

/// One tensor axis: an opaque label (half-edge ids, for network use) and the
/// symbol weight `a` (so the axis has `a + 1` slots).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub label: u64,
    pub weight: u32,
}

impl Axis {
    pub fn size(&self) -> usize {
        self.weight as usize + 1
    }
}

/// Dense multi-axis array in the compressed symmetric basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T: Scalar> {
    axes: Vec<Axis>,
    data: Vec<T>,
}

/// Exact tensor, the default scalar.
pub type RatTensor = SymTensor<BigRational>;

fn dims_product(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.size()).product()
}

/// Row-major offsets of every multi-index over the given axis subset.
fn enumerate_offsets(sizes: &[usize], strides: &[usize]) -> Vec<usize> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; sizes.len()];
    for _ in 0..total {
        out.push(idx.iter().zip(strides).map(|(i, s)| i * s).sum());
        for d in (0..sizes.len()).rev() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    if sizes.is_empty() {
        return vec![0];
    }
    out
}

impl<T: Scalar> SymTensor<T> {
    pub fn zeros(axes: Vec<Axis>) -> Self {
        let n = dims_product(&axes);
        SymTensor {
            data: vec![T::zero(); n],
            axes,
        }
    }

    pub fn scalar(value: T) -> Self {
        SymTensor {
            axes: Vec::new(),
            data: vec![value],
        }
    }

    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n = dims_product(&axes);
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..n {
            data.push(f(&idx));
            for d in (0..axes.len()).rev() {
                idx[d] += 1;
                if idx[d] < axes[d].size() {
                    break;
                }
                idx[d] = 0;
            }
        }
        SymTensor { axes, data }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.axes.len()];
        for d in (0..self.axes.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.axes[d + 1].size();
        }
        strides
    }

    pub fn axis_position(&self, label: u64) -> Option<usize> {
        self.axes.iter().position(|a| a.label == label)
    }

    pub fn get(&self, index: &[usize]) -> &T {
        let strides = self.strides();
        let lin: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
        &self.data[lin]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let strides = self.strides();
        let lin: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[lin] = value;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// The value of a zero-axis tensor.
    pub fn into_scalar(self) -> Result<T> {
        if self.axes.is_empty() {
            Ok(self.data.into_iter().next().expect("scalar holds one entry"))
        } else {
            Err(Error::AxisMismatch(format!(
                "expected a scalar, found {} open axes",
                self.axes.len()
            )))
        }
    }

    pub fn scale_by(&mut self, factor: &T) {
        for v in &mut self.data {
            *v = v.mul_ref(factor);
        }
    }

    /// Reorders axes; `perm[i]` is the current position of the new axis `i`.
    pub fn permute_axes(&self, perm: &[usize]) -> SymTensor<T> {
        assert_eq!(perm.len(), self.axes.len());
        let new_axes: Vec<Axis> = perm.iter().map(|&p| self.axes[p]).collect();
        let old_strides = self.strides();
        let mut out = SymTensor::zeros(new_axes);
        let sizes: Vec<usize> = out.axes.iter().map(|a| a.size()).collect();
        let mut idx = vec![0usize; sizes.len()];
        for lin in 0..out.data.len() {
            let old_lin: usize = idx
                .iter()
                .enumerate()
                .map(|(d, i)| i * old_strides[perm[d]])
                .sum();
            out.data[lin] = self.data[old_lin].clone();
            for d in (0..sizes.len()).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }

    /// Pairwise contraction over matched axis positions, inserting the
    /// binomial metric on every contracted axis. Free axes of `self` come
    /// first in the result, then free axes of `other`.
    pub fn contract_pair(&self, other: &SymTensor<T>, pairs: &[(usize, usize)]) -> Result<SymTensor<T>> {
        for &(i, j) in pairs {
            if i >= self.axes.len() || j >= other.axes.len() {
                return Err(Error::AxisMismatch("axis position out of range".into()));
            }
            if self.axes[i].weight != other.axes[j].weight {
                return Err(Error::AxisMismatch(format!(
                    "weights differ: {} vs {}",
                    self.axes[i].weight, other.axes[j].weight
                )));
            }
        }
        let a_shared: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let b_shared: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let a_free: Vec<usize> = (0..self.axes.len()).filter(|i| !a_shared.contains(i)).collect();
        let b_free: Vec<usize> = (0..other.axes.len()).filter(|j| !b_shared.contains(j)).collect();

        let a_strides = self.strides();
        let b_strides = other.strides();
        let shared_sizes: Vec<usize> = a_shared.iter().map(|&i| self.axes[i].size()).collect();

        // Per-class metric: product of binomials over the contracted axes.
        let shared_total: usize = shared_sizes.iter().product::<usize>().max(1);
        let mut weights = Vec::with_capacity(shared_total);
        {
            let tables: Vec<Vec<T>> = a_shared
                .iter()
                .map(|&i| {
                    let w = self.axes[i].weight;
                    (0..=w)
                        .map(|p| T::from_bigint(&arith::binomial(w, p)))
                        .collect()
                })
                .collect();
            let mut idx = vec![0usize; shared_sizes.len()];
            for _ in 0..shared_total {
                let mut w = T::one();
                for (d, &i) in idx.iter().enumerate() {
                    w = w.mul_ref(&tables[d][i]);
                }
                weights.push(w);
                for d in (0..shared_sizes.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < shared_sizes[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }

        let a_shared_off = enumerate_offsets(
            &shared_sizes,
            &a_shared.iter().map(|&i| a_strides[i]).collect::<Vec<_>>(),
        );
        let b_shared_off = enumerate_offsets(
            &b_shared.iter().map(|&j| other.axes[j].size()).collect::<Vec<_>>(),
            &b_shared.iter().map(|&j| b_strides[j]).collect::<Vec<_>>(),
        );
        let a_free_off = enumerate_offsets(
            &a_free.iter().map(|&i| self.axes[i].size()).collect::<Vec<_>>(),
            &a_free.iter().map(|&i| a_strides[i]).collect::<Vec<_>>(),
        );
        let b_free_off = enumerate_offsets(
            &b_free.iter().map(|&j| other.axes[j].size()).collect::<Vec<_>>(),
            &b_free.iter().map(|&j| b_strides[j]).collect::<Vec<_>>(),
        );

        let out_axes: Vec<Axis> = a_free
            .iter()
            .map(|&i| self.axes[i])
            .chain(b_free.iter().map(|&j| other.axes[j]))
            .collect();
        let mut out = SymTensor::zeros(out_axes);
        let mut pos = 0usize;
        for &ao in &a_free_off {
            for &bo in &b_free_off {
                let mut acc = T::zero();
                for s in 0..shared_total {
                    let av = &self.data[ao + a_shared_off[s]];
                    if av.is_zero() {
                        continue;
                    }
                    let bv = &other.data[bo + b_shared_off[s]];
                    if bv.is_zero() {
                        continue;
                    }
                    acc.acc_add(&av.mul_ref(bv).mul_ref(&weights[s]));
                }
                out.data[pos] = acc;
                pos += 1;
            }
        }
        Ok(out)
    }

    /// Traces two axes of the same tensor against each other with the
    /// binomial metric (a self-loop contraction).
    pub fn self_trace(&self, i: usize, j: usize) -> Result<SymTensor<T>> {
        if i == j || i >= self.axes.len() || j >= self.axes.len() {
            return Err(Error::AxisMismatch("bad trace positions".into()));
        }
        if self.axes[i].weight != self.axes[j].weight {
            return Err(Error::AxisMismatch("trace weights differ".into()));
        }
        let w = self.axes[i].weight;
        let strides = self.strides();
        let free: Vec<usize> = (0..self.axes.len()).filter(|&d| d != i && d != j).collect();
        let free_off = enumerate_offsets(
            &free.iter().map(|&d| self.axes[d].size()).collect::<Vec<_>>(),
            &free.iter().map(|&d| strides[d]).collect::<Vec<_>>(),
        );
        let out_axes: Vec<Axis> = free.iter().map(|&d| self.axes[d]).collect();
        let mut out = SymTensor::zeros(out_axes);
        let weights: Vec<T> = (0..=w)
            .map(|p| T::from_bigint(&arith::binomial(w, p)))
            .collect();
        for (pos, &fo) in free_off.iter().enumerate() {
            let mut acc = T::zero();
            for p in 0..=(w as usize) {
                let v = &self.data[fo + p * strides[i] + p * strides[j]];
                if v.is_zero() {
                    continue;
                }
                acc.acc_add(&v.mul_ref(&weights[p]));
            }
            out.data[pos] = acc;
        }
        Ok(out)
    }

    /// Outer product (contraction with no shared axes).
    pub fn outer(&self, other: &SymTensor<T>) -> SymTensor<T> {
        self.contract_pair(other, &[]).expect("no pairs to mismatch")
    }

    pub fn map_entries<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SymTensor<U> {
        SymTensor {
            axes: self.axes.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl RatTensor {
    pub fn to_f64_tensor(&self) -> SymTensor<f64> {
        self.map_entries(arith::rational_to_f64)
    }
}

/// The compressed matrix of the identity operator on weight `r`:
/// `Id[p][q] = delta_pq / C(r, p)`. Composing with the binomial metric this
/// acts as the identity on compressed coefficient vectors.
pub fn identity_compressed(label_out: u64, label_in: u64, r: u32) -> RatTensor {
    let axes = vec![
        Axis { label: label_out, weight: r },
        Axis { label: label_in, weight: r },
    ];
    SymTensor::from_fn(axes, |idx| {
        if idx[0] == idx[1] {
            BigRational::new(BigInt::one(), arith::binomial(r, idx[0] as u32))
        } else {
            BigRational::zero()
        }
    })
}

/// Contract a whole network of tensors.
///
/// Every axis label must be unique across `tensors`; `edges` lists label
/// pairs to contract (with the binomial metric of their common weight).
/// Labels not mentioned stay open. The contraction follows the greedy plan
/// of [`plan_contraction`]; exact results are independent of the plan.
pub fn contract_network<T: Scalar>(
    tensors: Vec<SymTensor<T>>,
    edges: &[(u64, u64)],
    max_intermediate: usize,
) -> Result<SymTensor<T>> {
    let mut slots: Vec<Option<SymTensor<T>>> = tensors.into_iter().map(Some).collect();
    if slots.is_empty() {
        return Ok(SymTensor::scalar(T::one()));
    }
    let shapes: Vec<NodeShape> = slots
        .iter()
        .map(|t| NodeShape {
            axes: t
                .as_ref()
                .unwrap()
                .axes()
                .iter()
                .map(|a| (a.label, a.weight))
                .collect(),
        })
        .collect();
    let steps = plan_contraction(&shapes, edges)?;

    // Trace out any edge whose two labels sit on one tensor.
    let trace_all = |t: SymTensor<T>| -> Result<SymTensor<T>> {
        let mut t = t;
        loop {
            let mut found = None;
            for (l1, l2) in edges {
                if let (Some(i), Some(j)) = (t.axis_position(*l1), t.axis_position(*l2)) {
                    found = Some((i, j));
                    break;
                }
            }
            match found {
                Some((i, j)) => t = t.self_trace(i, j)?,
                None => return Ok(t),
            }
        }
    };

    for i in 0..slots.len() {
        let t = slots[i].take().expect("slot filled");
        slots[i] = Some(trace_all(t)?);
    }

    for step in steps {
        let right = slots[step.right].take().expect("planned node exists");
        let left = slots[step.left].take().expect("planned node exists");
        let mut pairs = Vec::new();
        for (l1, l2) in edges {
            if let (Some(i), Some(j)) = (left.axis_position(*l1), right.axis_position(*l2)) {
                pairs.push((i, j));
            } else if let (Some(i), Some(j)) = (left.axis_position(*l2), right.axis_position(*l1)) {
                pairs.push((i, j));
            }
        }
        let out_entries: usize = left
            .axes()
            .iter()
            .enumerate()
            .filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i))
            .map(|(_, a)| a.size())
            .product::<usize>()
            * right
                .axes()
                .iter()
                .enumerate()
                .filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j))
                .map(|(_, a)| a.size())
                .product::<usize>();
        if out_entries > max_intermediate {
            return Err(Error::IntermediateTooLarge {
                entries: out_entries,
                limit: max_intermediate,
            });
        }
        let merged = left.contract_pair(&right, &pairs)?;
        slots[step.left] = Some(trace_all(merged)?);
    }

    let mut remaining = slots.into_iter().flatten();
    let result = remaining.next().expect("plan leaves one node");
    debug_assert!(remaining.next().is_none(), "plan merges every node");
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, ratio};

    fn ones(label: u64, weight: u32) -> RatTensor {
        SymTensor::from_fn(vec![Axis { label, weight }], |_| big(1))
    }

    #[test]
    fn all_ones_contraction_is_binomial_theorem() {
        // sum_p C(a,p) = 2^a
        for a in [0u32, 1, 3, 7] {
            let t = ones(0, a).contract_pair(&ones(1, a), &[(0, 0)]).unwrap();
            assert_eq!(t.into_scalar().unwrap(), big(1i64 << a));
        }
    }

    #[test]
    fn self_trace_matches_pair_contraction() {
        let m = identity_compressed(0, 1, 4);
        let traced = m.self_trace(0, 1).unwrap().into_scalar().unwrap();
        assert_eq!(traced, big(5)); // trace of the identity on weight 4
    }

    #[test]
    fn permute_round_trip() {
        let t = SymTensor::from_fn(
            vec![
                Axis { label: 0, weight: 1 },
                Axis { label: 1, weight: 2 },
                Axis { label: 2, weight: 3 },
            ],
            |idx| big((idx[0] * 100 + idx[1] * 10 + idx[2]) as i64),
        );
        let p = t.permute_axes(&[2, 0, 1]);
        assert_eq!(p.axes()[0].label, 2);
        assert_eq!(p.get(&[3, 1, 2]), t.get(&[1, 2, 3]));
        let back = p.permute_axes(&[1, 2, 0]);
        assert_eq!(back, t);
    }

    #[test]
    fn network_contraction_plan_invariance() {
        // A 3-cycle of random-ish small tensors, contracted with the planner
        // and by hand in a different order.
        let mk = |l1: u64, l2: u64| {
            SymTensor::from_fn(
                vec![Axis { label: l1, weight: 2 }, Axis { label: l2, weight: 2 }],
                |idx| ratio((idx[0] * 3 + 1) as i64, (idx[1] + 1) as i64),
            )
        };
        let a = mk(0, 1);
        let b = mk(2, 3);
        let c = mk(4, 5);
        let edges = [(1, 2), (3, 4), (5, 0)];
        let planned = contract_network(vec![a.clone(), b.clone(), c.clone()], &edges, 1 << 20)
            .unwrap()
            .into_scalar()
            .unwrap();
        let manual = {
            let bc = b.contract_pair(&c, &[(1, 0)]).unwrap(); // axes 2,5
            let abc = a.contract_pair(&bc, &[(1, 0), (0, 1)]).unwrap();
            abc.into_scalar().unwrap()
        };
        assert_eq!(planned, manual);
    }

    #[test]
    fn guard_triggers() {
        let t1 = ones(0, 40);
        let t2 = SymTensor::from_fn(
            vec![Axis { label: 1, weight: 40 }, Axis { label: 2, weight: 40 }],
            |_| big(1),
        );
        let err = contract_network(vec![t1, t2], &[], 100).unwrap_err();
        assert!(matches!(err, Error::IntermediateTooLarge { .. }));
    }
}
