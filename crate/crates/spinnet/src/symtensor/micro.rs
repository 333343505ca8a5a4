//! Microscopic brute-force oracle.
//!
//! Evaluates small diagrams of Kronecker deltas, epsilons and symmetrizers
//! by literally summing over index assignments in {1,2}, with symmetrizers
//! expanded as averages over permutations. This is the ground truth the
//! compressed-basis fast paths are certified against; it shares no code
//! with them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::factorial;
use crate::error::{Error, Result};

use super::{Axis, RatTensor, SymTensor};

const MAX_LEGS: usize = 22;

/// A dense tensor over microscopic indices: `legs.len()` binary indices,
/// entry order with leg 0 as the most significant bit. Index bit 0 means
/// value 1, bit 1 means value 2.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroTensor {
    pub legs: Vec<u32>,
    pub data: Vec<BigRational>,
}

impl MicroTensor {
    fn check(legs: usize) -> Result<()> {
        if legs > MAX_LEGS {
            Err(Error::MicroTooLarge(legs))
        } else {
            Ok(())
        }
    }

    fn index(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize)
    }

    pub fn get(&self, bits: &[u8]) -> &BigRational {
        &self.data[self.index(bits)]
    }

    fn leg_pos(&self, leg: u32) -> usize {
        self.legs.iter().position(|l| *l == leg).expect("leg present")
    }

    /// The symmetrizer of size `a`, expanded as the average over all `a!`
    /// permutations of delta strands. Legs: `a` inputs then `a` outputs.
    pub fn symmetrizer(a: u32, legs: Vec<u32>) -> Result<MicroTensor> {
        assert_eq!(legs.len(), 2 * a as usize);
        Self::check(legs.len())?;
        let n = 1usize << legs.len();
        let mut data = vec![BigRational::zero(); n];
        let mut perm: Vec<usize> = (0..a as usize).collect();
        let norm = BigRational::new(BigInt::one(), factorial(a));
        // Heap's algorithm over permutations of the output side.
        let mut c = vec![0usize; a as usize];
        let apply = |perm: &[usize], data: &mut Vec<BigRational>| {
            // delta pattern: input t matches output perm[t]
            for m in 0..1usize << a {
                // m = bits of the inputs, msb = input 0
                let mut out_bits = 0usize;
                for t in 0..a as usize {
                    let bit = (m >> (a as usize - 1 - t)) & 1;
                    out_bits |= bit << (a as usize - 1 - perm[t]);
                }
                data[(m << a) | out_bits] += &norm;
            }
        };
        if a == 0 {
            data[0] = BigRational::one();
            return Ok(MicroTensor { legs, data });
        }
        apply(&perm, &mut data);
        let mut i = 0usize;
        while i < a as usize {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                apply(&perm, &mut data);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        Ok(MicroTensor { legs, data })
    }

    /// Contract `self` and `other` over glued leg pairs, each pair weighted
    /// by a delta or by a directed epsilon. Each line must have one leg on
    /// `self` and the other on `other`, in either role.
    pub fn contract_with(&self, other: &MicroTensor, lines: &[MicroLine]) -> Result<MicroTensor> {
        // Positions of the glued legs on each side, line by line, plus a
        // flag telling whether the line's `from` leg is the one on `self`.
        let mut here = Vec::new();
        let mut there = Vec::new();
        let mut from_is_here = Vec::new();
        for l in lines {
            if self.legs.contains(&l.from_leg) {
                here.push(self.leg_pos(l.from_leg));
                there.push(other.leg_pos(l.to_leg));
                from_is_here.push(true);
            } else {
                here.push(self.leg_pos(l.to_leg));
                there.push(other.leg_pos(l.from_leg));
                from_is_here.push(false);
            }
        }
        let free_a: Vec<usize> = (0..self.legs.len()).filter(|i| !here.contains(i)).collect();
        let free_b: Vec<usize> = (0..other.legs.len()).filter(|j| !there.contains(j)).collect();
        let out_legs: Vec<u32> = free_a
            .iter()
            .map(|&i| self.legs[i])
            .chain(free_b.iter().map(|&j| other.legs[j]))
            .collect();
        Self::check(out_legs.len())?;
        let mut data = vec![BigRational::zero(); 1usize << out_legs.len()];
        let na = self.legs.len();
        let nb = other.legs.len();
        for fa in 0..1usize << free_a.len() {
            for fb in 0..1usize << free_b.len() {
                let mut acc = BigRational::zero();
                // ga, gb: values of the glued legs on self / other
                for ga in 0..1usize << lines.len() {
                    for gb in 0..1usize << lines.len() {
                        let mut weight = 1i64;
                        for (t, line) in lines.iter().enumerate() {
                            let va = (ga >> (lines.len() - 1 - t)) & 1;
                            let vb = (gb >> (lines.len() - 1 - t)) & 1;
                            let (x, y) = if from_is_here[t] { (va, vb) } else { (vb, va) };
                            weight *= match line.kind {
                                LineKind::Delta => (x == y) as i64,
                                // epsilon_{12} = 1, epsilon_{21} = -1
                                LineKind::Epsilon => match (x, y) {
                                    (0, 1) => 1,
                                    (1, 0) => -1,
                                    _ => 0,
                                },
                            };
                            if weight == 0 {
                                break;
                            }
                        }
                        if weight == 0 {
                            continue;
                        }
                        let mut ia = 0usize;
                        for (slot, &pos) in free_a.iter().enumerate() {
                            let bit = (fa >> (free_a.len() - 1 - slot)) & 1;
                            ia |= bit << (na - 1 - pos);
                        }
                        for (t, &pos) in here.iter().enumerate() {
                            let bit = (ga >> (lines.len() - 1 - t)) & 1;
                            ia |= bit << (na - 1 - pos);
                        }
                        let av = &self.data[ia];
                        if av.is_zero() {
                            continue;
                        }
                        let mut ib = 0usize;
                        for (slot, &pos) in free_b.iter().enumerate() {
                            let bit = (fb >> (free_b.len() - 1 - slot)) & 1;
                            ib |= bit << (nb - 1 - pos);
                        }
                        for (t, &pos) in there.iter().enumerate() {
                            let bit = (gb >> (lines.len() - 1 - t)) & 1;
                            ib |= bit << (nb - 1 - pos);
                        }
                        let bv = &other.data[ib];
                        if bv.is_zero() {
                            continue;
                        }
                        acc += av * bv * BigRational::from_integer(BigInt::from(weight));
                    }
                }
                data[(fa << free_b.len()) | fb] = acc;
            }
        }
        Ok(MicroTensor { legs: out_legs, data })
    }

    /// Contract glued pairs living on this one tensor.
    pub fn contract_self(&self, lines: &[MicroLine]) -> Result<MicroTensor> {
        let from: Vec<usize> = lines.iter().map(|l| self.leg_pos(l.from_leg)).collect();
        let to: Vec<usize> = lines.iter().map(|l| self.leg_pos(l.to_leg)).collect();
        let free: Vec<usize> = (0..self.legs.len())
            .filter(|i| !from.contains(i) && !to.contains(i))
            .collect();
        let out_legs: Vec<u32> = free.iter().map(|&i| self.legs[i]).collect();
        let n = self.legs.len();
        let mut data = vec![BigRational::zero(); 1usize << out_legs.len()];
        for f in 0..1usize << free.len() {
            let mut acc = BigRational::zero();
            for ga in 0..1usize << lines.len() {
                for gb in 0..1usize << lines.len() {
                    let mut weight = 1i64;
                    for (t, line) in lines.iter().enumerate() {
                        let x = (ga >> (lines.len() - 1 - t)) & 1;
                        let y = (gb >> (lines.len() - 1 - t)) & 1;
                        weight *= match line.kind {
                            LineKind::Delta => (x == y) as i64,
                            LineKind::Epsilon => match (x, y) {
                                (0, 1) => 1,
                                (1, 0) => -1,
                                _ => 0,
                            },
                        };
                        if weight == 0 {
                            break;
                        }
                    }
                    if weight == 0 {
                        continue;
                    }
                    let mut idx = 0usize;
                    for (slot, &pos) in free.iter().enumerate() {
                        idx |= ((f >> (free.len() - 1 - slot)) & 1) << (n - 1 - pos);
                    }
                    for (t, &pos) in from.iter().enumerate() {
                        idx |= ((ga >> (lines.len() - 1 - t)) & 1) << (n - 1 - pos);
                    }
                    for (t, &pos) in to.iter().enumerate() {
                        idx |= ((gb >> (lines.len() - 1 - t)) & 1) << (n - 1 - pos);
                    }
                    let v = &self.data[idx];
                    if v.is_zero() {
                        continue;
                    }
                    acc += v * BigRational::from_integer(BigInt::from(weight));
                }
            }
            data[f] = acc;
        }
        Ok(MicroTensor { legs: out_legs, data })
    }

    /// Compress groups of legs into symmetric-basis axes. Verifies that the
    /// tensor really is constant on each multiplicity class, which is the
    /// point of using this as an oracle.
    pub fn compress(&self, groups: &[Vec<u32>], labels: &[u64]) -> Result<RatTensor> {
        assert_eq!(groups.len(), labels.len());
        let positions: Vec<Vec<usize>> = groups
            .iter()
            .map(|g| g.iter().map(|l| self.leg_pos(*l)).collect())
            .collect();
        let total: usize = groups.iter().map(|g| g.len()).sum();
        if total != self.legs.len() {
            return Err(Error::AxisMismatch("groups must cover all legs".into()));
        }
        let axes: Vec<Axis> = groups
            .iter()
            .zip(labels)
            .map(|(g, l)| Axis { label: *l, weight: g.len() as u32 })
            .collect();
        let n = self.legs.len();
        let mut out = SymTensor::zeros(axes);
        let mut filled = vec![false; out.len()];
        for idx in 0..self.data.len() {
            let multi: Vec<usize> = positions
                .iter()
                .map(|pos| {
                    pos.iter()
                        .filter(|&&p| (idx >> (n - 1 - p)) & 1 == 1)
                        .count()
                })
                .collect();
            let strides = out.strides();
            let lin: usize = multi.iter().zip(&strides).map(|(i, s)| i * s).sum();
            if filled[lin] {
                if out.entries()[lin] != self.data[idx] {
                    return Err(Error::AxisMismatch(
                        "tensor is not symmetric under the declared groups".into(),
                    ));
                }
            } else {
                filled[lin] = true;
                out.set(&multi, self.data[idx].clone());
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Delta,
    /// Directed: contributes `epsilon_{from,to}`.
    Epsilon,
}

/// One glued pair of legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroLine {
    pub kind: LineKind,
    pub from_leg: u32,
    pub to_leg: u32,
}

/// A symmetrizer port: `slot` on the input or output side of symmetrizer
/// `sym`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Port {
    pub sym: usize,
    pub out_side: bool,
    pub slot: u32,
}

/// A microscopic diagram: symmetrizers of the given sizes, glued by lines;
/// any unglued ports are open legs of the result, in the declared order.
#[derive(Debug, Clone)]
pub struct MicroDiagram {
    pub symmetrizer_sizes: Vec<u32>,
    pub lines: Vec<(LineKind, Port, Port)>,
    pub open: Vec<Port>,
}

fn leg_id(diagram: &MicroDiagram, p: Port) -> u32 {
    let mut base = 0u32;
    for s in 0..p.sym {
        base += 2 * diagram.symmetrizer_sizes[s];
    }
    base + if p.out_side { diagram.symmetrizer_sizes[p.sym] } else { 0 } + p.slot
}

/// Evaluate a microscopic diagram by brute-force index summation. Returns
/// the tensor over the open ports (a scalar when the diagram is closed).
/// Lines between the same pair of symmetrizer tensors are contracted in one
/// batch to keep intermediates small.
pub fn micro_contract(diagram: &MicroDiagram) -> Result<MicroTensor> {
    // Build one tensor per symmetrizer.
    let mut parts: Vec<Option<MicroTensor>> = Vec::new();
    for (s, &a) in diagram.symmetrizer_sizes.iter().enumerate() {
        let legs: Vec<u32> = (0..2 * a)
            .map(|t| {
                leg_id(
                    diagram,
                    Port {
                        sym: s,
                        out_side: t >= a,
                        slot: t % a,
                    },
                )
            })
            .collect();
        parts.push(Some(MicroTensor::symmetrizer(a, legs)?));
    }
    let mut lines: Vec<MicroLine> = diagram
        .lines
        .iter()
        .map(|(kind, f, t)| MicroLine {
            kind: *kind,
            from_leg: leg_id(diagram, *f),
            to_leg: leg_id(diagram, *t),
        })
        .collect();

    let find_part = |parts: &Vec<Option<MicroTensor>>, leg: u32| -> usize {
        parts
            .iter()
            .position(|p| p.as_ref().is_some_and(|t| t.legs.contains(&leg)))
            .expect("leg belongs to a live tensor")
    };

    while !lines.is_empty() {
        let i = find_part(&parts, lines[0].from_leg);
        let j = find_part(&parts, lines[0].to_leg);
        if i == j {
            let batch: Vec<MicroLine> = lines
                .iter()
                .filter(|l| find_part(&parts, l.from_leg) == i && find_part(&parts, l.to_leg) == i)
                .copied()
                .collect();
            let t = parts[i].take().unwrap().contract_self(&batch)?;
            parts[i] = Some(t);
            lines.retain(|l| !batch.contains(l));
        } else {
            // batch every line joining i and j, in either direction
            let batch: Vec<MicroLine> = lines
                .iter()
                .filter(|l| {
                    let ends = (find_part(&parts, l.from_leg), find_part(&parts, l.to_leg));
                    ends == (i, j) || ends == (j, i)
                })
                .copied()
                .collect();
            let a = parts[i].take().unwrap();
            let b = parts[j].take().unwrap();
            let merged = a.contract_with(&b, &batch)?;
            parts[i] = Some(merged);
            lines.retain(|l| !batch.contains(l));
        }
    }

    // Outer-product any remaining parts, then order legs as declared.
    let mut acc: Option<MicroTensor> = None;
    for p in parts.into_iter().flatten() {
        acc = Some(match acc {
            None => p,
            Some(a) => a.contract_with(&p, &[])?,
        });
    }
    let t = acc.expect("at least one symmetrizer");
    let want: Vec<u32> = diagram.open.iter().map(|p| leg_id(diagram, *p)).collect();
    if want.len() != t.legs.len() {
        return Err(Error::AxisMismatch(format!(
            "open ports {} do not match remaining legs {}",
            want.len(),
            t.legs.len()
        )));
    }
    // reorder legs to the declared open order
    let n = t.legs.len();
    let perm: Vec<usize> = want.iter().map(|l| t.leg_pos(*l)).collect();
    let mut data = vec![BigRational::zero(); t.data.len()];
    for idx in 0..t.data.len() {
        let mut new_idx = 0usize;
        for (slot, &pos) in perm.iter().enumerate() {
            new_idx |= ((idx >> (n - 1 - pos)) & 1) << (n - 1 - slot);
        }
        data[new_idx] = t.data[idx].clone();
    }
    Ok(MicroTensor { legs: want, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::big;

    fn port(sym: usize, out_side: bool, slot: u32) -> Port {
        Port { sym, out_side, slot }
    }

    #[test]
    fn closed_loop_of_deltas_counts_dimension() {
        // a delta strands through two symmetrizers, closed into a loop: a + 1
        for a in 1..=5u32 {
            let mut lines = Vec::new();
            for t in 0..a {
                lines.push((LineKind::Delta, port(0, true, t), port(1, false, t)));
                lines.push((LineKind::Delta, port(1, true, t), port(0, false, t)));
            }
            let d = MicroDiagram {
                symmetrizer_sizes: vec![a, a],
                lines,
                open: vec![],
            };
            let v = micro_contract(&d).unwrap();
            assert_eq!(v.data[0], big(a as i64 + 1));
        }
    }

    #[test]
    fn epsilon_traced_with_itself() {
        // One epsilon closed through a size-2 symmetrizer chain is zero by
        // symmetry; a pair of opposite epsilons through size-1 symmetrizers
        // gives -2 (the closed 2-cycle of epsilon strands).
        let d = MicroDiagram {
            symmetrizer_sizes: vec![1, 1],
            lines: vec![
                (LineKind::Epsilon, port(0, true, 0), port(1, false, 0)),
                (LineKind::Epsilon, port(1, true, 0), port(0, false, 0)),
            ],
            open: vec![],
        };
        // tr(eps^2) = -2
        assert_eq!(micro_contract(&d).unwrap().data[0], big(-2));
        let d = MicroDiagram {
            symmetrizer_sizes: vec![2],
            lines: vec![(LineKind::Epsilon, port(0, true, 0), port(0, true, 1))],
            open: vec![port(0, false, 0), port(0, false, 1)],
        };
        // epsilon killed by symmetrization
        let t = micro_contract(&d).unwrap();
        assert!(t.data.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn symmetrizer_is_idempotent_projection() {
        let s = MicroTensor::symmetrizer(3, (0..6).collect()).unwrap();
        // S[(i),(j)] symmetric under permuting outputs; check one class
        assert_eq!(s.get(&[0, 0, 1, 0, 1, 0]), s.get(&[0, 0, 1, 1, 0, 0]));
        // trace over matched in/out = dim Sym^3 = 4
        let d = MicroDiagram {
            symmetrizer_sizes: vec![3],
            lines: (0..3)
                .map(|t| (LineKind::Delta, port(0, true, t), port(0, false, t)))
                .collect(),
            open: vec![],
        };
        assert_eq!(micro_contract(&d).unwrap().data[0], big(4));
    }

    #[test]
    fn compress_checks_symmetry() {
        // compressed symmetrizer = compressed identity matrix
        let s = MicroTensor::symmetrizer(2, vec![0, 1, 2, 3]).unwrap();
        let c = s.compress(&[vec![0, 1], vec![2, 3]], &[0, 1]).unwrap();
        assert_eq!(c, super::super::identity_compressed(0, 1, 2));
        // an epsilon is antisymmetric: compressing as one group must fail
        let mut data = vec![BigRational::zero(); 4];
        data[1] = big(1);
        data[2] = big(-1);
        let eps = MicroTensor { legs: vec![0, 1], data };
        assert!(eps.compress(&[vec![0, 1]], &[0]).is_err());
    }
}
