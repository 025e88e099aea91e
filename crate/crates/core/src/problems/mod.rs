//! Inversion tasks: a given instance `x` plus a verifier that decides whether
//! a candidate witness `w` solves it, charging an explicit step cost.
//!
//! Verifier costs are fixed functions of the instance size, never of how
//! early a mismatch is found. Malformed witnesses reject at full cost.

pub mod cnf;
pub mod graph;
pub mod reduction;
pub mod tiling;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitString;

pub use cnf::CnfFormula;
pub use graph::Graph;
pub use tiling::TilingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Verdict {
    pub accepted: bool,
    pub steps: u64,
}

/// A pure, total acceptance test with a deterministic step cost.
pub trait Verifier: Send + Sync + fmt::Debug {
    fn verify(&self, w: &BitString) -> Verdict;
}

/// Accepts exactly `target`; costs `min(|w|, |target|) + 1` steps.
pub fn verify_identity(target: &BitString, w: &BitString) -> Verdict {
    let mut steps = 0u64;
    let mut equal = true;
    for (a, b) in target.iter().zip(w.iter()) {
        steps += 1;
        equal &= a == b;
    }
    // length comparison
    steps += 1;
    Verdict { accepted: equal && target.len() == w.len(), steps }
}

#[derive(Debug, Clone)]
pub enum TaskKind {
    /// `f` is the identity: the witness must equal the target.
    Identity(BitString),
    ThreeColoring(Graph),
    Sat(CnfFormula),
    Tiling(TilingInstance),
    Custom(Arc<dyn Verifier>),
}

/// A target instance `input` (the tape handed to the universal machine) and
/// the verifier defining which witnesses solve it.
#[derive(Debug, Clone)]
pub struct InversionTask {
    pub name: String,
    pub input: BitString,
    pub kind: TaskKind,
}

impl InversionTask {
    /// Find `w = x` given `x`.
    pub fn identity(x: BitString) -> Self {
        Self { name: format!("identity:{x}"), input: x.clone(), kind: TaskKind::Identity(x) }
    }

    /// Generate exactly `w` from input `x`.
    pub fn generate(w: BitString, x: BitString) -> Self {
        Self { name: format!("generate:{w}|{x}"), input: x, kind: TaskKind::Identity(w) }
    }

    pub fn three_coloring(g: Graph) -> Self {
        Self { name: format!("3col:n{}m{}", g.n(), g.edges().len()), input: g.encode(), kind: TaskKind::ThreeColoring(g) }
    }

    pub fn sat(f: CnfFormula) -> Self {
        Self { name: format!("sat:v{}c{}", f.num_vars(), f.clauses().len()), input: f.encode(), kind: TaskKind::Sat(f) }
    }

    pub fn tiling(t: TilingInstance) -> Self {
        Self { name: format!("tiling:n{}t{}", t.n(), t.tiles().len()), input: t.encode(), kind: TaskKind::Tiling(t) }
    }

    pub fn custom(name: impl Into<String>, input: BitString, verifier: Arc<dyn Verifier>) -> Self {
        Self { name: name.into(), input, kind: TaskKind::Custom(verifier) }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn verify(&self, w: &BitString) -> Verdict {
        match &self.kind {
            TaskKind::Identity(target) => verify_identity(target, w),
            TaskKind::ThreeColoring(g) => graph::verify_3col(g, w),
            TaskKind::Sat(f) => cnf::verify_sat(f, w),
            TaskKind::Tiling(t) => tiling::verify_tiling(t, w),
            TaskKind::Custom(v) => v.verify(w),
        }
    }
}
