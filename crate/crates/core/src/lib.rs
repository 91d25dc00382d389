//! A lambda-free construction calculus: operations are finite wired graphs
//! of typed socket boards over use-once values. The crate provides the type
//! system and its level hierarchy, the graph representation with a linearity
//! checker, an evaluator, relational types with decidable-fragment
//! evaluation and witness checking, a library of worked constructions
//! (higher-type primitive recursion, a witnessed theorem, a linear tree
//! structure, bounded search), and the combinatorial continuum type.

pub mod constructions;
pub mod continuum;
pub mod eval;
pub mod format;
pub mod graph;
pub mod prim;
pub mod rel;
pub mod rel_graphs;
pub mod types;
pub mod value;

pub use eval::{evaluate, evaluate_op_value, EvalError, EvalResult};
pub use graph::{
    compose_graphs, curry_transform, partial_apply, swap_inputs, uncurry_transform,
    ConstructionGraph, GraphBuilder, NodeId, NodeKind, Violation, Wire,
};
pub use prim::{OpSig, OutputSig, PrimitiveKind};
pub use rel::{
    check_witness, eval_relational, equiv_build, lem_build, negate, procedure_n, Axiom,
    RelEval, RelKind, RelationalType, Trichotomy, Witness,
};
pub use types::{des, ind1, level1_constructor, level_of, type_equal, type_index, Level, TypeExpr};
pub use value::{OpValue, Side, Value};
