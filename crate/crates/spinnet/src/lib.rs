//! Exact evaluation and asymptotics for classical SU(2) spin networks on
//! cubic ribbon graphs.
//!
//! A spin network here is a 3-regular ribbon graph (a rotation system)
//! decorated with nonnegative integers on the edges, possibly together with
//! vertex-less circle components. The crate provides two independent exact
//! evaluation engines that cross-validate each other:
//!
//! * [`penrose`] — the state sum over per-edge strand permutations, where
//!   every closed curve contributes a factor −2;
//! * [`cg`] — contraction of Clebsch-Gordan vertex tensors in the compressed
//!   symmetric basis, driven by a smooth orientation and a gate signage.
//!
//! On top of the engines sit closed formulas and 6-j symbols ([`forms`]),
//! and series/spectral-radius experiments ([`asym`]). All correctness-path
//! arithmetic is exact (`BigRational`); a binary64 contraction mode exists
//! only for large-dilation asymptotics runs.

pub mod arith;
pub mod asym;
pub mod cg;
pub mod error;
pub mod forms;
pub mod graph;
pub mod io;
pub mod orient;
mod par;
pub mod penrose;
pub mod symtensor;

pub use arith::Radical;
pub use error::Error;
pub use graph::{EdgeId, HalfEdgeId, SpinNetwork, VertexId};

/// How evaluation loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Single-threaded evaluation.
    Sequential,
    /// Partition work across the rayon pool. Falls back to sequential when
    /// the `parallel` feature is disabled. Exact results are bit-identical
    /// either way.
    #[default]
    Rayon,
}

/// Resource guards and scheduling knobs shared by the evaluators.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Penrose state-sum guard: refuse inputs with more than this many states.
    pub state_limit: u64,
    /// Largest number of entries a contraction intermediate may have.
    pub max_intermediate: usize,
    pub parallelism: Parallelism,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            state_limit: default_state_limit(),
            max_intermediate: 40_000_000,
            parallelism: Parallelism::default(),
        }
    }
}

impl EvalOptions {
    pub fn sequential() -> Self {
        EvalOptions {
            parallelism: Parallelism::Sequential,
            ..Self::default()
        }
    }
}

/// Default Penrose state guard (10^7), overridable via `SPINNET_STATE_LIMIT`.
pub fn default_state_limit() -> u64 {
    std::env::var("SPINNET_STATE_LIMIT")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000_000)
}
