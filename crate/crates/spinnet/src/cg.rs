//! Clebsch-Gordan networks and their evaluations.
//!
//! A CG network is a graph with 3-valent vertices (and optionally 1-valent
//! external legs), a smooth orientation, a gate signage and an admissible
//! decoration. Each 3-valent vertex becomes a vertex tensor; edges are
//! contracted in the compressed symmetric basis with the binomial metric;
//! legs stay open. The rotation system plays no role here — only the
//! orientation and the signage do, and the signage only through the sign.
//!
//! Sign convention: at a splitting vertex (one in, two out) the epsilon
//! arrows run from the first gate half-edge to the second; at a merging
//! vertex they run the other way. With the face-derived canonical signage
//! this makes the theta network evaluate to its positive closed form, which
//! the acceptance suite pins down.

use std::collections::BTreeMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;

use crate::arith::{binomial, factorial, Radical};
use crate::error::{Error, Result};
use crate::forms::{self, SixJInput};
use crate::graph::{EdgeId, HalfEdgeId, SpinNetwork, VertexId};
use crate::orient::{self, GateSignage, SmoothOrientation};
use crate::symtensor::{
    contract_network, identity_compressed, vertex_tensor_scaled, Axis, RatTensor, Scalar,
    SymTensor,
};
use crate::EvalOptions;

/// A Clebsch-Gordan network.
#[derive(Debug, Clone)]
pub struct CgNetwork {
    vertices: Vec<(VertexId, [HalfEdgeId; 3])>,
    legs: Vec<(VertexId, HalfEdgeId)>,
    edges: Vec<(EdgeId, [HalfEdgeId; 2])>,
    decoration: BTreeMap<EdgeId, u32>,
    orientation: SmoothOrientation,
    gates: GateSignage,
    trivial: Vec<u32>,
}

/// Incrementally describes an open CG network; used mainly by tests that
/// build split and merge chains directly.
#[derive(Debug, Default)]
pub struct CgBuilder {
    vertices: Vec<(VertexId, [HalfEdgeId; 3])>,
    legs: Vec<(VertexId, HalfEdgeId)>,
    edges: Vec<(EdgeId, [HalfEdgeId; 2])>,
    decoration: BTreeMap<EdgeId, u32>,
    direction: BTreeMap<EdgeId, (HalfEdgeId, HalfEdgeId)>,
    gates: BTreeMap<VertexId, (HalfEdgeId, HalfEdgeId)>,
    trivial: Vec<u32>,
}

impl CgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: u32, halves: [u32; 3]) -> Self {
        self.vertices.push((VertexId(id), halves.map(HalfEdgeId)));
        self
    }

    pub fn leg(mut self, id: u32, half: u32) -> Self {
        self.legs.push((VertexId(id), HalfEdgeId(half)));
        self
    }

    /// Directed edge `tail -> head` with decoration `gamma`.
    pub fn edge(mut self, id: u32, tail: u32, head: u32, gamma: u32) -> Self {
        self.edges
            .push((EdgeId(id), [HalfEdgeId(tail), HalfEdgeId(head)]));
        self.decoration.insert(EdgeId(id), gamma);
        self.direction
            .insert(EdgeId(id), (HalfEdgeId(tail), HalfEdgeId(head)));
        self
    }

    pub fn gate(mut self, vertex: u32, first: u32, second: u32) -> Self {
        self.gates
            .insert(VertexId(vertex), (HalfEdgeId(first), HalfEdgeId(second)));
        self
    }

    pub fn circle(mut self, a: u32) -> Self {
        self.trivial.push(a);
        self
    }

    pub fn build(self) -> Result<CgNetwork> {
        CgNetwork::new(
            self.vertices,
            self.legs,
            self.edges,
            self.decoration,
            SmoothOrientation::new(self.direction),
            GateSignage::new(self.gates),
            self.trivial,
        )
    }
}

/// Role of one 3-valent vertex under the orientation.
struct VertexRole {
    gate: (HalfEdgeId, HalfEdgeId),
    odd: HalfEdgeId,
    /// true when the vertex splits (one in, two out)
    is_split: bool,
}

impl CgNetwork {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        vertices: Vec<(VertexId, [HalfEdgeId; 3])>,
        legs: Vec<(VertexId, HalfEdgeId)>,
        edges: Vec<(EdgeId, [HalfEdgeId; 2])>,
        decoration: BTreeMap<EdgeId, u32>,
        orientation: SmoothOrientation,
        gates: GateSignage,
        trivial: Vec<u32>,
    ) -> Result<CgNetwork> {
        let net = CgNetwork {
            vertices,
            legs,
            edges,
            decoration,
            orientation,
            gates,
            trivial,
        };
        net.validate()?;
        Ok(net)
    }

    /// Wraps a closed spin network with the given orientation and signage.
    pub fn from_network(
        net: &SpinNetwork,
        orientation: SmoothOrientation,
        gates: GateSignage,
    ) -> Result<CgNetwork> {
        CgNetwork::new(
            net.vertices().to_vec(),
            Vec::new(),
            net.edges().to_vec(),
            net.decorations().clone(),
            orientation,
            gates,
            net.trivial_components().to_vec(),
        )
    }

    /// Wraps a closed spin network, constructing the smooth orientation and
    /// the canonical gate signage.
    pub fn from_network_auto(net: &SpinNetwork) -> Result<CgNetwork> {
        let o = orient::find_smooth_orientation(net)?;
        let gates = orient::canonical_gate_signage(net, &o)?;
        CgNetwork::from_network(net, o, gates)
    }

    pub fn is_closed(&self) -> bool {
        self.legs.is_empty()
    }

    pub fn legs(&self) -> &[(VertexId, HalfEdgeId)] {
        &self.legs
    }

    fn edge_entry(&self, h: HalfEdgeId) -> &(EdgeId, [HalfEdgeId; 2]) {
        self.edges
            .iter()
            .find(|(_, pair)| pair.contains(&h))
            .expect("validated half-edge")
    }

    /// Decoration of the edge holding `h`.
    pub fn gamma(&self, h: HalfEdgeId) -> u32 {
        self.decoration[&self.edge_entry(h).0]
    }

    fn mate(&self, h: HalfEdgeId) -> HalfEdgeId {
        let (_, pair) = self.edge_entry(h);
        if pair[0] == h {
            pair[1]
        } else {
            pair[0]
        }
    }

    fn is_tail(&self, h: HalfEdgeId) -> bool {
        let (e, _) = self.edge_entry(h);
        self.orientation.direction(*e).expect("validated edge").0 == h
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (v, rot) in &self.vertices {
            for h in rot {
                if seen.insert(*h, *v).is_some() {
                    return Err(Error::DuplicateHalfEdge(*h));
                }
            }
        }
        for (v, h) in &self.legs {
            if seen.insert(*h, *v).is_some() {
                return Err(Error::DuplicateHalfEdge(*h));
            }
        }
        let mut in_edges = BTreeMap::new();
        for (e, pair) in &self.edges {
            if !self.decoration.contains_key(e) {
                return Err(Error::MissingDecoration(e.0));
            }
            for h in pair {
                if in_edges.insert(*h, *e).is_some() {
                    return Err(Error::DuplicateHalfEdge(*h));
                }
                if !seen.contains_key(h) {
                    return Err(Error::DanglingHalfEdge(*h));
                }
            }
            match self.orientation.direction(*e) {
                Some((t, hd)) => {
                    if !(pair.contains(&t) && pair.contains(&hd) && t != hd) {
                        return Err(Error::BadOrientation);
                    }
                }
                None => return Err(Error::BadOrientation),
            }
        }
        for h in seen.keys() {
            if !in_edges.contains_key(h) {
                return Err(Error::DanglingHalfEdge(*h));
            }
        }
        // smoothness, gate consistency and admissibility at 3-valent vertices
        for (v, _) in &self.vertices {
            self.role(*v)?;
            let t = self.triple(*v);
            if !crate::graph::triple_admissible(t[0], t[1], t[2]) {
                return Err(Error::Inadmissible(format!(
                    "triple ({},{},{}) at vertex {v:?}",
                    t[0], t[1], t[2]
                )));
            }
        }
        Ok(())
    }

    fn triple(&self, v: VertexId) -> [u32; 3] {
        let rot = self
            .vertices
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, r)| *r)
            .expect("vertex exists");
        [self.gamma(rot[0]), self.gamma(rot[1]), self.gamma(rot[2])]
    }

    fn role(&self, v: VertexId) -> Result<VertexRole> {
        let rot = self
            .vertices
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, r)| *r)
            .ok_or(Error::UnknownVertex(v))?;
        let outs: Vec<HalfEdgeId> = rot.iter().copied().filter(|h| self.is_tail(*h)).collect();
        let ins: Vec<HalfEdgeId> = rot.iter().copied().filter(|h| !self.is_tail(*h)).collect();
        let (same, is_split) = match (ins.len(), outs.len()) {
            (1, 2) => (outs, true),
            (2, 1) => (ins, false),
            _ => return Err(Error::BadOrientation),
        };
        let (g1, g2) = self.gates.order(v).ok_or(Error::BadGateSignage(v))?;
        if !(same.contains(&g1) && same.contains(&g2) && g1 != g2) {
            return Err(Error::BadGateSignage(v));
        }
        let odd = rot
            .into_iter()
            .find(|h| *h != g1 && *h != g2)
            .expect("third half-edge");
        Ok(VertexRole {
            gate: (g1, g2),
            odd,
            is_split,
        })
    }
}

/// Per-vertex tensor specs plus the global wiring of a CG network.
struct Assembly {
    /// (a, b, c, epsilons gate1->gate2, axis labels)
    vertex_specs: Vec<(u32, u32, u32, bool, [u64; 3])>,
    /// identity tensors for edges joining two legs
    strands: Vec<(u64, u64, u32)>,
    /// label pairs to contract
    contraction: Vec<(u64, u64)>,
    /// open axis labels in leg declaration order
    open_order: Vec<u64>,
    /// product of the squared pi-iota vertex normalizations
    piio_ratio: BigRational,
    /// product of dim(v) = (odd-edge decoration) + 1
    dim_product: BigInt,
    trivial: Vec<u32>,
}

fn assemble(cg: &CgNetwork) -> Result<Assembly> {
    let leg_halves: BTreeMap<HalfEdgeId, ()> = cg.legs.iter().map(|(_, h)| (*h, ())).collect();
    // An axis is labeled by its own half-edge, except that an axis whose
    // edge ends on a leg takes the leg-side half-edge id, so open axes are
    // named after the legs.
    let label_for = |h: HalfEdgeId| -> u64 {
        let mate = cg.mate(h);
        if leg_halves.contains_key(&mate) {
            mate.0 as u64
        } else {
            h.0 as u64
        }
    };

    let mut vertex_specs = Vec::new();
    let mut piio_ratio = BigRational::one();
    let mut dim_product = BigInt::one();
    for (v, _) in &cg.vertices {
        let role = cg.role(*v)?;
        let (a, b, c) = (
            cg.gamma(role.gate.0),
            cg.gamma(role.gate.1),
            cg.gamma(role.odd),
        );
        // epsilons run gate1 -> gate2 at splits, gate2 -> gate1 at merges
        let plus = role.is_split;
        vertex_specs.push((
            a,
            b,
            c,
            plus,
            [
                label_for(role.gate.0),
                label_for(role.gate.1),
                label_for(role.odd),
            ],
        ));
        let s = (a + b + c) / 2;
        piio_ratio *= BigRational::new(
            factorial(a) * factorial(b) * factorial(c + 1),
            factorial(s + 1)
                * factorial((a + b - c) / 2)
                * factorial((a + c - b) / 2)
                * factorial((b + c - a) / 2),
        );
        dim_product *= BigInt::from(c + 1);
    }

    let mut strands = Vec::new();
    let mut contraction = Vec::new();
    for (e, pair) in &cg.edges {
        let at_leg = [
            leg_halves.contains_key(&pair[0]),
            leg_halves.contains_key(&pair[1]),
        ];
        match at_leg {
            [true, true] => strands.push((pair[0].0 as u64, pair[1].0 as u64, cg.decoration[e])),
            [false, false] => contraction.push((pair[0].0 as u64, pair[1].0 as u64)),
            // vertex-to-leg edges stay open through the relabeling above
            _ => {}
        }
    }

    let open_order = cg.legs.iter().map(|(_, h)| h.0 as u64).collect();
    Ok(Assembly {
        vertex_specs,
        strands,
        contraction,
        open_order,
        piio_ratio,
        dim_product,
        trivial: cg.trivial.clone(),
    })
}

/// Cache of scaled vertex tensors shared by repeated evaluations
/// (single-writer inserts, concurrent readers). Oversized entries are
/// rebuilt on demand instead of cached.
static VERTEX_CACHE: Lazy<RwLock<BTreeMap<(u32, u32, u32, bool), (RatTensor, BigRational)>>> =
    Lazy::new(|| RwLock::new(BTreeMap::new()));

const CACHE_ENTRY_CAP: usize = 50_000;

fn scaled_vertex(a: u32, b: u32, c: u32, plus: bool) -> Result<(RatTensor, BigRational)> {
    let key = (a, b, c, plus);
    if let Some(hit) = VERTEX_CACHE.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let made = vertex_tensor_scaled(a, b, c, plus)?;
    if made.0.len() <= CACHE_ENTRY_CAP {
        VERTEX_CACHE.write().unwrap().insert(key, made.clone());
    }
    Ok(made)
}

fn relabel(t: &RatTensor, labels: [u64; 3]) -> RatTensor {
    SymTensor::from_fn(
        vec![
            Axis { label: labels[0], weight: t.axes()[0].weight },
            Axis { label: labels[1], weight: t.axes()[1].weight },
            Axis { label: labels[2], weight: t.axes()[2].weight },
        ],
        |idx| t.get(idx).clone(),
    )
}

fn finish_axes<T: Scalar>(t: SymTensor<T>, open_order: &[u64]) -> Result<SymTensor<T>> {
    if open_order.len() != t.axes().len() {
        return Err(Error::AxisMismatch(format!(
            "expected {} open axes, found {}",
            open_order.len(),
            t.axes().len()
        )));
    }
    if t.axes().is_empty() {
        return Ok(t);
    }
    let perm: Vec<usize> = open_order
        .iter()
        .map(|l| {
            t.axis_position(*l)
                .ok_or_else(|| Error::AxisMismatch(format!("missing open axis {l}")))
        })
        .collect::<Result<_>>()?;
    Ok(t.permute_axes(&perm))
}

/// Exact Clebsch-Gordan evaluation. Closed networks give a scalar tensor;
/// open networks give one axis per leg, in leg declaration order. Trivial
/// components multiply the result by `a + 1`; disconnected parts factorize
/// through the contraction itself.
pub fn cg_evaluate(cg: &CgNetwork, opts: &EvalOptions) -> Result<RatTensor> {
    let asm = assemble(cg)?;
    let mut tensors = Vec::new();
    let mut scale = BigRational::one();
    for (a, b, c, plus, labels) in &asm.vertex_specs {
        let (t, s) = scaled_vertex(*a, *b, *c, *plus)?;
        tensors.push(relabel(&t, *labels));
        scale *= s;
    }
    for (l1, l2, w) in &asm.strands {
        tensors.push(identity_compressed(*l1, *l2, *w));
    }
    for a in &asm.trivial {
        scale *= forms::loop_cg(*a);
    }
    let mut result = contract_network(tensors, &asm.contraction, opts.max_intermediate)?;
    result.scale_by(&scale);
    finish_axes(result, &asm.open_order)
}

/// Scalar value of a closed network.
pub fn cg_evaluate_closed(cg: &CgNetwork, opts: &EvalOptions) -> Result<BigRational> {
    cg_evaluate(cg, opts)?.into_scalar()
}

/// Binary64 contraction, for the asymptotics module only. Uses the
/// normalized (unscaled) vertex tensors so no intermediate overflows.
pub fn cg_evaluate_f64(cg: &CgNetwork, opts: &EvalOptions) -> Result<SymTensor<f64>> {
    let asm = assemble(cg)?;
    let mut tensors: Vec<SymTensor<f64>> = Vec::new();
    for (a, b, c, plus, labels) in &asm.vertex_specs {
        let v = crate::symtensor::vertex_tensor(*a, *b, *c, *plus)?;
        tensors.push(relabel(&v.tensor, *labels).to_f64_tensor());
    }
    for (l1, l2, w) in &asm.strands {
        tensors.push(identity_compressed(*l1, *l2, *w).to_f64_tensor());
    }
    let mut result = contract_network(tensors, &asm.contraction, opts.max_intermediate)?;
    let trivial: f64 = asm.trivial.iter().map(|a| (*a as f64) + 1.0).product();
    result.scale_by(&trivial);
    finish_axes(result, &asm.open_order)
}

fn radical_from_ratio(value: &BigRational, ratio: &BigRational) -> Radical {
    let sign = match value.numer().sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    };
    Radical::new(sign, value * value * ratio)
}

/// The pi-iota evaluation of a closed network: the CG value times the
/// square-root normalization of every vertex, carried exactly as a signed
/// square root.
pub fn pi_iota_evaluate(cg: &CgNetwork, opts: &EvalOptions) -> Result<Radical> {
    if !cg.is_closed() {
        return Err(Error::LegCount(cg.legs.len()));
    }
    let asm = assemble(cg)?;
    let value = cg_evaluate_closed(cg, opts)?;
    Ok(radical_from_ratio(&value, &asm.piio_ratio))
}

/// `|U|` through the CG engine: `prod_v dim(v)^(-1/2)` times the pi-iota
/// magnitude. The sign is not determined by this route.
pub fn unitary_magnitude_cg(net: &SpinNetwork, opts: &EvalOptions) -> Result<Radical> {
    let cg = CgNetwork::from_network_auto(net)?;
    let asm = assemble(&cg)?;
    let value = cg_evaluate_closed(&cg, opts)?;
    let piio = radical_from_ratio(&value, &asm.piio_ratio);
    let inv_dim = BigRational::new(BigInt::one(), asm.dim_product);
    Ok(Radical::new(piio.sign().abs(), piio.square() * inv_dim))
}

/// Outcome of a standard or unitary evaluation: when the Penrose engine is
/// unaffordable the value is a magnitude and `sign_known` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryValue {
    pub value: Radical,
    pub sign_known: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardValue {
    pub value: BigRational,
    pub sign_known: bool,
}

fn penrose_affordable(net: &SpinNetwork, opts: &EvalOptions) -> bool {
    let mut states = 1u64;
    for (e, _) in net.edges() {
        let m = net.decoration(*e) as u64;
        states = states.saturating_mul((1..=m).fold(1u64, u64::saturating_mul));
    }
    states <= opts.state_limit
}

fn theta_product(net: &SpinNetwork) -> Result<BigRational> {
    let mut prod = BigRational::one();
    for (v, _) in net.vertices() {
        let [a, b, c] = net.triple_at(*v).expect("vertex exists");
        prod *= forms::theta_big(a, b, c)?;
    }
    Ok(prod)
}

/// Unitary evaluation of one bridge-free piece. Prefer
/// [`unitary_evaluate`], which routes through the bridge reduction first.
pub fn unitary_component(net: &SpinNetwork, opts: &EvalOptions) -> Result<UnitaryValue> {
    if penrose_affordable(net, opts) {
        let s = crate::penrose::standard_evaluate_from_penrose(net, opts)?;
        let theta = theta_product(net)?;
        let sign = match s.numer().sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        };
        Ok(UnitaryValue {
            value: Radical::new(sign, &s * &s / theta),
            sign_known: true,
        })
    } else {
        Ok(UnitaryValue {
            value: unitary_magnitude_cg(net, opts)?,
            sign_known: false,
        })
    }
}

/// Unitary evaluation: factorizes across zero-decorated bridges (any
/// nonzero-decorated bridge forces an exact zero), evaluates each
/// bridge-free component with the Penrose sign when affordable, and
/// multiplies in the closed form of every circle.
pub fn unitary_evaluate(net: &SpinNetwork, opts: &EvalOptions) -> Result<UnitaryValue> {
    let reduction = crate::asym::bridge_reduce(net)?;
    match reduction {
        crate::asym::BridgeReduction::Zero => Ok(UnitaryValue {
            value: Radical::zero(),
            sign_known: true,
        }),
        crate::asym::BridgeReduction::Factored {
            components,
            trivial,
            delta,
        } => {
            let mut acc = delta;
            let mut sign_known = true;
            for comp in &components {
                let u = unitary_component(comp, opts)?;
                sign_known &= u.sign_known;
                acc = acc.mul(&u.value);
            }
            for a in &trivial {
                acc = acc.mul_rational(&forms::trivial_eval(*a));
            }
            Ok(UnitaryValue {
                value: acc,
                sign_known,
            })
        }
    }
}

/// Standard evaluation: exact and signed via the Penrose engine when
/// affordable, otherwise the magnitude from the CG engine through the
/// engine-correspondence factor `prod_e gamma(e)!` (a circle counts `a!`).
pub fn standard_evaluate(net: &SpinNetwork, opts: &EvalOptions) -> Result<StandardValue> {
    if penrose_affordable(net, opts) {
        return Ok(StandardValue {
            value: crate::penrose::standard_evaluate_from_penrose(net, opts)?,
            sign_known: true,
        });
    }
    let cg = CgNetwork::from_network_auto(net)?;
    let value = cg_evaluate_closed(&cg, opts)?;
    let mut scaled = value.abs();
    for (e, _) in net.edges() {
        scaled *= BigRational::from_integer(factorial(net.decoration(*e)));
    }
    for a in net.trivial_components() {
        scaled *= BigRational::from_integer(factorial(*a));
    }
    scaled /= BigRational::from_integer(crate::penrose::vertex_factorial_product(net));
    Ok(StandardValue {
        value: scaled,
        sign_known: false,
    })
}

/// Both engines on one network. Checks `|P| = prod_e gamma(e)! * |CG|`
/// exactly (a circle contributes `a!` to the product) and records the
/// observed global sign; a mismatch is a hard error.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub penrose: BigRational,
    pub cg: BigRational,
    pub gamma_factorial_product: BigInt,
    /// `sign(P) * sign(CG)` when both are nonzero.
    pub mu: Option<i8>,
}

pub fn cross_check(net: &SpinNetwork, opts: &EvalOptions) -> Result<CrossCheck> {
    let p = crate::penrose::penrose_evaluate(net, opts)?.value;
    let cg_net = CgNetwork::from_network_auto(net)?;
    let cg = cg_evaluate_closed(&cg_net, opts)?;
    let mut fac = BigInt::one();
    for (e, _) in net.edges() {
        fac *= factorial(net.decoration(*e));
    }
    for a in net.trivial_components() {
        fac *= factorial(*a);
    }
    let lhs = p.abs();
    let rhs = cg.abs() * BigRational::from_integer(fac.clone());
    if lhs != rhs {
        return Err(Error::CrossCheckMismatch(format!(
            "|P| = {lhs} but gamma! * |CG| = {rhs}"
        )));
    }
    let mu = if p.is_zero() || cg.is_zero() {
        None
    } else {
        let sp = if p.is_negative() { -1 } else { 1 };
        let sc = if cg.is_negative() { -1 } else { 1 };
        Some(sp * sc)
    };
    Ok(CrossCheck {
        penrose: p,
        cg,
        gamma_factorial_product: fac,
        mu,
    })
}

/// Schur constant of a two-leg network: the closed trace divided by the
/// leg dimension; zero when the leg decorations differ.
pub fn schur_constant(cg: &CgNetwork, opts: &EvalOptions) -> Result<BigRational> {
    if cg.legs.len() != 2 {
        return Err(Error::LegCount(cg.legs.len()));
    }
    let a = cg.gamma(cg.legs[0].1);
    let b = cg.gamma(cg.legs[1].1);
    if a != b {
        return Ok(BigRational::zero());
    }
    let t = cg_evaluate(cg, opts)?;
    let mut trace = BigRational::zero();
    for p in 0..=(a as usize) {
        trace += t.get(&[p, p]) * BigRational::from_integer(binomial(a, p as u32));
    }
    Ok(trace / BigRational::from_integer(BigInt::from(a + 1)))
}

/// Nonzero fibers of a 3-axis tensor along axis 0, indexed by the other two
/// positions; the streamed tetrahedron contraction walks these.
fn fiberize(t: &RatTensor) -> Vec<Vec<(usize, BigRational)>> {
    let d1 = t.axes()[1].size();
    let d2 = t.axes()[2].size();
    let d0 = t.axes()[0].size();
    let mut fibers = vec![Vec::new(); d1 * d2];
    for p0 in 0..d0 {
        for p1 in 0..d1 {
            for p2 in 0..d2 {
                let v = t.get(&[p0, p1, p2]);
                if !v.is_zero() {
                    fibers[p1 * d2 + p2].push((p0, v.clone()));
                }
            }
        }
    }
    fibers
}

/// Exact pi-iota value of the decorated tetrahedron with the canonical
/// orientation and signage, via a streamed two-pair contraction that never
/// materializes the four-axis intermediate. Matches the generic planner
/// route exactly (tested), but stays in memory for decorations in the tens.
pub fn tetrahedron_pi_iota(input: SixJInput) -> Result<Radical> {
    let SixJInput { a, b, c, d, e, f } = input;
    if !input.admissible() {
        return Err(Error::Inadmissible(format!("{input:?}")));
    }
    // edge order of graph::tetrahedron: (01),(02),(03),(12),(13),(23);
    // decorating them (a,b,c,f,e,d) realizes the four 6-j triads.
    let net = crate::graph::tetrahedron([a, b, c, f, e, d]);
    let cg = CgNetwork::from_network_auto(&net)?;
    let asm = assemble(&cg)?;

    let mut tensors = Vec::new();
    let mut scale = BigRational::one();
    for (ta, tb, tc, plus, labels) in &asm.vertex_specs {
        let (t, s) = scaled_vertex(*ta, *tb, *tc, *plus)?;
        tensors.push(relabel(&t, *labels));
        scale *= s;
    }

    // Pair (0,1) over their shared edge, and (2,3) over theirs.
    let shared_label = |x: &RatTensor, y: &RatTensor| -> Option<(usize, usize)> {
        for (l1, l2) in &asm.contraction {
            if let (Some(i), Some(j)) = (x.axis_position(*l1), y.axis_position(*l2)) {
                return Some((i, j));
            }
            if let (Some(i), Some(j)) = (x.axis_position(*l2), y.axis_position(*l1)) {
                return Some((i, j));
            }
        }
        None
    };
    let (s0, s1) = shared_label(&tensors[0], &tensors[1]).expect("K4 neighbours");
    let (s2, s3) = shared_label(&tensors[2], &tensors[3]).expect("K4 neighbours");
    let rotate = |t: &RatTensor, first: usize| -> RatTensor {
        let mut perm = vec![first];
        perm.extend((0..3).filter(|i| *i != first));
        t.permute_axes(&perm)
    };
    let t0 = rotate(&tensors[0], s0);
    let t1 = rotate(&tensors[1], s1);
    let t2 = rotate(&tensors[2], s2);
    let t3 = rotate(&tensors[3], s3);

    let value = stream_two_pair(&t0, &t1, &t2, &t3, &asm.contraction)?;
    let cg_value = value * scale;
    Ok(radical_from_ratio(&cg_value, &asm.piio_ratio))
}

/// Full contraction of four 3-axis tensors where `t0, t1` share their axis
/// 0, `t2, t3` share their axis 0, and the remaining eight axes are glued
/// in four labeled pairs across the two sides.
fn stream_two_pair(
    t0: &RatTensor,
    t1: &RatTensor,
    t2: &RatTensor,
    t3: &RatTensor,
    edges: &[(u64, u64)],
) -> Result<BigRational> {
    let weight_table = |w: u32| -> Vec<BigRational> {
        (0..=w)
            .map(|p| BigRational::from_integer(binomial(w, p)))
            .collect()
    };
    if t0.axes()[0].weight != t1.axes()[0].weight || t2.axes()[0].weight != t3.axes()[0].weight {
        return Err(Error::AxisMismatch("shared axes disagree".into()));
    }
    let w01 = weight_table(t0.axes()[0].weight);
    let w23 = weight_table(t2.axes()[0].weight);

    // The four driving axes; each free axis of t2 and t3 is glued to one.
    let free_labels = [
        t0.axes()[1].label,
        t0.axes()[2].label,
        t1.axes()[1].label,
        t1.axes()[2].label,
    ];
    let free_weights = [
        t0.axes()[1].weight,
        t0.axes()[2].weight,
        t1.axes()[1].weight,
        t1.axes()[2].weight,
    ];
    let partner_of = |l: u64| -> Option<u64> {
        edges.iter().find_map(|(x, y)| {
            if *x == l {
                Some(*y)
            } else if *y == l {
                Some(*x)
            } else {
                None
            }
        })
    };
    let source_for = |label: u64| -> Result<usize> {
        let partner = partner_of(label)
            .ok_or_else(|| Error::AxisMismatch(format!("axis {label} unglued")))?;
        free_labels
            .iter()
            .position(|l| *l == partner)
            .ok_or_else(|| Error::AxisMismatch(format!("axis {label} not cross-glued")))
    };
    let src2 = [source_for(t2.axes()[1].label)?, source_for(t2.axes()[2].label)?];
    let src3 = [source_for(t3.axes()[1].label)?, source_for(t3.axes()[2].label)?];
    let wfree: Vec<Vec<BigRational>> = free_weights.iter().map(|w| weight_table(*w)).collect();

    let f0 = fiberize(t0);
    let f2 = fiberize(t2);
    let d0 = [t0.axes()[1].size(), t0.axes()[2].size()];
    let d1 = [t1.axes()[1].size(), t1.axes()[2].size()];
    let t1s = t1.strides();
    let t3s = t3.strides();

    let mut acc = BigRational::zero();
    for i0 in 0..d0[0] {
        for i1 in 0..d0[1] {
            let fiber0 = &f0[i0 * d0[1] + i1];
            if fiber0.is_empty() {
                continue;
            }
            for j0 in 0..d1[0] {
                for j1 in 0..d1[1] {
                    let mut s1 = BigRational::zero();
                    for (ps, av) in fiber0 {
                        let bv = &t1.entries()[ps * t1s[0] + j0 * t1s[1] + j1 * t1s[2]];
                        if bv.is_zero() {
                            continue;
                        }
                        s1 += av * bv * &w01[*ps];
                    }
                    if s1.is_zero() {
                        continue;
                    }
                    let idx = [i0, i1, j0, j1];
                    let fiber2 = &f2[idx[src2[0]] * t2.axes()[2].size() + idx[src2[1]]];
                    if fiber2.is_empty() {
                        continue;
                    }
                    let mut s2 = BigRational::zero();
                    for (pt, cv) in fiber2 {
                        let dv = &t3.entries()
                            [pt * t3s[0] + idx[src3[0]] * t3s[1] + idx[src3[1]] * t3s[2]];
                        if dv.is_zero() {
                            continue;
                        }
                        s2 += cv * dv * &w23[*pt];
                    }
                    if s2.is_zero() {
                        continue;
                    }
                    acc += s1 * s2 * &wfree[0][i0] * &wfree[1][i1] * &wfree[2][j0] * &wfree[3][j1];
                }
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, ratio};
    use crate::graph;

    fn opts() -> EvalOptions {
        EvalOptions::default()
    }

    fn eval_net(net: &SpinNetwork) -> BigRational {
        let cg = CgNetwork::from_network_auto(net).unwrap();
        cg_evaluate_closed(&cg, &opts()).unwrap()
    }

    #[test]
    fn loop_networks_give_dimension() {
        assert_eq!(eval_net(&graph::trivial(0)), big(1));
        assert_eq!(eval_net(&graph::trivial(7)), big(8));
        assert_eq!(eval_net(&graph::cycle_pair(2, 3)), big(12));
    }

    #[test]
    fn theta_matches_closed_form() {
        for a in 0..=6u32 {
            for b in 0..=6u32 {
                for c in 0..=6u32 {
                    if !crate::graph::triple_admissible(a, b, c) {
                        continue;
                    }
                    let got = eval_net(&graph::theta(a, b, c));
                    let want = forms::theta_cg(a, b, c).unwrap();
                    assert_eq!(got, want, "theta({a},{b},{c})");
                }
            }
        }
    }

    #[test]
    fn gate_flip_changes_sign_by_epsilon_count() {
        let net = graph::theta(3, 2, 1);
        let o = orient::find_smooth_orientation(&net).unwrap();
        let canonical = orient::canonical_gate_signage(&net, &o).unwrap();
        let base = CgNetwork::from_network(&net, o.clone(), canonical.clone()).unwrap();
        let v0 = cg_evaluate_closed(&base, &opts()).unwrap();
        for (v, _) in net.vertices() {
            let role = base.role(*v).unwrap();
            let k = (base.gamma(role.gate.0) + base.gamma(role.gate.1) - base.gamma(role.odd)) / 2;
            let flipped = CgNetwork::from_network(&net, o.clone(), canonical.flipped(*v)).unwrap();
            let v1 = cg_evaluate_closed(&flipped, &opts()).unwrap();
            let sign = if k % 2 == 0 { big(1) } else { big(-1) };
            assert_eq!(v1, sign * &v0, "flip at {v:?}");
        }
    }

    #[test]
    fn signage_never_changes_magnitude() {
        let net = graph::theta(3, 2, 1);
        let o = orient::find_smooth_orientation(&net).unwrap();
        let canonical = orient::canonical_gate_signage(&net, &o).unwrap();
        let arbitrary = orient::arbitrary_gate_signage(&net, &o).unwrap();
        let v1 = cg_evaluate_closed(
            &CgNetwork::from_network(&net, o.clone(), canonical).unwrap(),
            &opts(),
        )
        .unwrap();
        let v2 = cg_evaluate_closed(
            &CgNetwork::from_network(&net, o, arbitrary).unwrap(),
            &opts(),
        )
        .unwrap();
        assert_eq!(v1.abs(), v2.abs());
    }

    #[test]
    fn cg_magnitude_independent_of_smooth_orientation() {
        for net in [graph::theta(2, 2, 2), graph::theta(4, 3, 3)] {
            let mut mags = Vec::new();
            for o in orient::all_smooth_orientations(&net) {
                let gates = orient::canonical_gate_signage(&net, &o).unwrap();
                let cg = CgNetwork::from_network(&net, o, gates).unwrap();
                mags.push(cg_evaluate_closed(&cg, &opts()).unwrap().abs());
            }
            assert!(mags.len() >= 2);
            assert!(mags.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn dumbbell_cg_and_unitary() {
        for (a, b) in [(1u32, 1u32), (2, 3), (4, 2)] {
            let v = eval_net(&graph::dumbbell(a, b, 0));
            assert_eq!(v, big(((a + 1) * (b + 1)) as i64));
        }
        // decorated bridge: exact zero straight out of the contraction
        assert_eq!(eval_net(&graph::dumbbell(2, 2, 2)), big(0));
        for a in 0..=10u32 {
            for b in 0..=10u32 {
                let u = unitary_evaluate(&graph::dumbbell(a, b, 0), &opts()).unwrap();
                assert!(u.sign_known);
                assert_eq!(u.value, forms::dumbbell_unitary(a, b, 0), "({a},{b})");
            }
        }
        let z = unitary_evaluate(&graph::dumbbell(3, 3, 2), &opts()).unwrap();
        assert!(z.value.is_zero());
    }

    #[test]
    fn theta_unitary_is_plus_minus_one() {
        for (a, b, c) in [(2u32, 2, 2), (4, 3, 1), (5, 5, 2), (6, 4, 2)] {
            let u = unitary_evaluate(&graph::theta(a, b, c), &opts()).unwrap();
            assert!(u.sign_known);
            assert_eq!(u.value.square(), &big(1), "theta({a},{b},{c})");
        }
        let u = unitary_evaluate(&graph::theta(2, 2, 2), &opts()).unwrap();
        assert_eq!(u.value, Radical::new(-1, big(1)));
    }

    #[test]
    fn cross_check_small_networks() {
        for net in [
            graph::theta(2, 2, 2),
            graph::theta(3, 2, 1),
            graph::dumbbell(2, 2, 0),
            graph::dumbbell(1, 2, 2),
            graph::tetrahedron([2; 6]),
            graph::theta(2, 2, 2).disjoint_union(&graph::trivial(3)),
        ] {
            cross_check(&net, &opts()).unwrap();
        }
        let r = cross_check(&graph::theta(2, 2, 2), &opts()).unwrap();
        assert_eq!(r.penrose, big(-24));
        assert_eq!(r.cg, big(3));
        assert_eq!(r.gamma_factorial_product, 8.into());
        assert_eq!(r.mu, Some(-1));
    }

    #[test]
    fn tetrahedron_uniform_two_unitary() {
        let u = unitary_evaluate(&graph::tetrahedron([2; 6]), &opts()).unwrap();
        assert!(u.sign_known);
        assert_eq!(u.value.square(), &ratio(1, 36));
    }

    #[test]
    fn pi_iota_theta_and_loops() {
        // |pi-iota| = |U| * prod sqrt(dim v): theta(2,2,2): 1 * sqrt(9) = 3
        let cg = CgNetwork::from_network_auto(&graph::theta(2, 2, 2)).unwrap();
        let p = pi_iota_evaluate(&cg, &opts()).unwrap();
        assert_eq!(p.square(), &big(9));
        let u = unitary_evaluate(&graph::theta(2, 2, 2), &opts()).unwrap();
        assert_eq!(p.square(), &(u.value.square() * big(9)));
        // a circle alone: no vertices, no factors
        let cg = CgNetwork::from_network_auto(&graph::trivial(4)).unwrap();
        let p = pi_iota_evaluate(&cg, &opts()).unwrap();
        assert_eq!(p, Radical::from_rational(&big(5)));
    }

    #[test]
    fn schur_bare_strand_and_mismatch() {
        // a single edge between two legs: constant 1
        for a in [0u32, 1, 4] {
            let cg = CgBuilder::new()
                .leg(0, 0)
                .leg(1, 1)
                .edge(0, 0, 1, a)
                .build()
                .unwrap();
            assert_eq!(schur_constant(&cg, &opts()).unwrap(), big(1));
        }
        // a two-vertex chain whose legs carry different decorations: zero
        let chain = CgBuilder::new()
            .leg(0, 0)
            .leg(1, 5)
            .vertex(10, [1, 2, 3])
            .vertex(11, [6, 7, 4])
            .edge(0, 0, 1, 2)
            .edge(1, 2, 6, 1)
            .edge(2, 3, 7, 1)
            .edge(3, 4, 5, 0)
            .gate(10, 2, 3)
            .gate(11, 6, 7)
            .build()
            .unwrap();
        assert_eq!(schur_constant(&chain, &opts()).unwrap(), big(0));
    }

    #[test]
    fn streamed_tetrahedron_matches_generic_route() {
        for gamma in [
            [2u32; 6],
            [4, 2, 2, 2, 2, 4],
            [3, 3, 2, 3, 3, 2],
            [6, 4, 2, 4, 6, 2],
        ] {
            let [a, b, c, f_, e, d] = gamma;
            let input = SixJInput::new(a, b, c, d, e, f_);
            if !input.admissible() {
                continue;
            }
            let stream = tetrahedron_pi_iota(input).unwrap();
            let net = crate::graph::tetrahedron([a, b, c, f_, e, d]);
            let cg = CgNetwork::from_network_auto(&net).unwrap();
            let generic = pi_iota_evaluate(&cg, &opts()).unwrap();
            assert_eq!(stream, generic, "{input:?}");
        }
    }

    #[test]
    fn sixj_regular_value() {
        let s = forms::sixj(SixJInput::new(2, 2, 2, 2, 2, 2)).unwrap();
        assert_eq!(s.square(), &ratio(1, 36));
    }
}
