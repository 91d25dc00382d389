//! Relation combinators realized as construction graphs: condition graphs
//! built from relational patterns, the shifted disjunction `Q+`, the bounded
//! window operations `L+`/`Lx`, and the nested-quantifier composition `P`.
//!
//! A condition is an operation whose output socket carries a relational type
//! object; branching primitives decide it with the relational evaluator. The
//! window operations disjoin (or conjoin) a family `R : N -> Types` over a
//! finite window by iterating one shift step from a neutral seed, so the
//! window width is an ordinary runtime natural.

use crate::graph::{curry_transform, partial_apply, ConstructionGraph, GraphBuilder, GraphError};
use crate::prim::{OpSig, PrimitiveKind};
use crate::rel::{negate, RelArg, RelError, RelKind, RelationalType};
use crate::types::{level_of, TypeExpr};
use crate::value::{const_op, OpValue, Value};
use std::collections::HashMap;

fn nat() -> TypeExpr {
    TypeExpr::Nat
}

/// The condition type `N -> Types1`.
pub fn cond_ty() -> TypeExpr {
    TypeExpr::arrow1(nat(), TypeExpr::Types(1))
}

fn cond_sig(args: usize) -> OpSig {
    OpSig::plain(vec![nat(); args], vec![TypeExpr::Types(1)])
}

fn graph_err(e: Vec<crate::graph::Violation>) -> RelError {
    RelError::FamilyEval(GraphError::Check(e).to_string())
}

/// Build a condition graph from a relational pattern: the listed holes, in
/// order, become the inputs. Every hole must be used; repeated uses are
/// served by copy chains. Quantifiers in the pattern embed their family as
/// a sub-condition over the bound hole alone.
pub fn condition_graph(
    body: &RelationalType,
    holes: &[u32],
) -> Result<ConstructionGraph, RelError> {
    for h in body.free_holes() {
        if !holes.contains(&h) {
            return Err(RelError::FreeHole(h));
        }
    }
    let mut counts: HashMap<u32, usize> = HashMap::new();
    count_uses(body, &mut counts);
    let mut b = GraphBuilder::new(format!("cond:{body}"));
    let mut pools: HashMap<u32, Vec<crate::graph::SocketRef>> = HashMap::new();
    for &h in holes {
        let n = *counts.get(&h).unwrap_or(&0);
        if n == 0 {
            return Err(RelError::UnusedHole(h));
        }
        let input = b.input(nat());
        pools.insert(h, b.copies(input, n));
    }
    let (out, _) = emit(&mut b, body, &mut pools)?;
    b.output(out);
    b.finish().map_err(graph_err)
}

fn count_uses(t: &RelationalType, counts: &mut HashMap<u32, usize>) {
    match t {
        RelationalType::Atom { lhs, rhs, .. } => {
            for arg in [lhs, rhs] {
                if let RelArg::Hole(h) = arg {
                    *counts.entry(*h).or_insert(0) += 1;
                }
            }
        }
        RelationalType::Conj(a, b) | RelationalType::Disj(a, b) => {
            count_uses(a, counts);
            count_uses(b, counts);
        }
        RelationalType::Neg(a) => count_uses(a, counts),
        // Families are embedded as separate graphs over their own hole.
        RelationalType::Pi(_) | RelationalType::Sigma(_) => {}
    }
}

fn emit(
    b: &mut GraphBuilder,
    t: &RelationalType,
    pools: &mut HashMap<u32, Vec<crate::graph::SocketRef>>,
) -> Result<(crate::graph::SocketRef, u32), RelError> {
    let arg_socket = |b: &mut GraphBuilder,
                          arg: &RelArg,
                          pools: &mut HashMap<u32, Vec<crate::graph::SocketRef>>|
     -> Result<crate::graph::SocketRef, RelError> {
        match arg {
            RelArg::Nat(n) => Ok(b.nat(*n)),
            RelArg::Hole(h) => pools
                .get_mut(h)
                .and_then(|v| v.pop())
                .ok_or(RelError::FreeHole(*h)),
        }
    };
    match t {
        RelationalType::Atom { kind, lhs, rhs } => {
            let l = arg_socket(b, lhs, pools)?;
            let r = arg_socket(b, rhs, pools)?;
            Ok((b.rel_atom(*kind, l, r), 1))
        }
        RelationalType::Conj(x, y) => {
            let (sx, lx) = emit(b, x, pools)?;
            let (sy, ly) = emit(b, y, pools)?;
            let level = lx.max(ly);
            Ok((b.ty_prod(level, sx, sy), level))
        }
        RelationalType::Disj(x, y) => {
            let (sx, lx) = emit(b, x, pools)?;
            let (sy, ly) = emit(b, y, pools)?;
            let level = lx.max(ly);
            Ok((b.ty_sum(level, sx, sy), level))
        }
        RelationalType::Neg(x) => {
            // The negation operation is grounded only on the quantifier-free
            // fragment; elsewhere the structural complement is emitted.
            if quantifier_free(x) {
                let (sx, _) = emit(b, x, pools)?;
                Ok((b.ty_neg(sx), 1))
            } else {
                emit(b, &negate(x), pools)
            }
        }
        RelationalType::Pi(fam) | RelationalType::Sigma(fam) => {
            let op = crate::rel::family_to_op(fam)?;
            let fam_level = match op.sig().outputs.sockets().first() {
                Some(TypeExpr::Types(k)) => *k,
                Some(other) => level_of(other).0,
                None => 1,
            };
            let opc = b.constant_op(op);
            let kind = if matches!(t, RelationalType::Pi(_)) {
                PrimitiveKind::TyPi {
                    domain: nat(),
                    level: fam_level,
                }
            } else {
                PrimitiveKind::TySigma {
                    domain: nat(),
                    level: fam_level,
                }
            };
            let out = b.add(kind, &[opc]);
            Ok((out[0], fam_level + 1))
        }
    }
}

fn quantifier_free(t: &RelationalType) -> bool {
    match t {
        RelationalType::Atom { .. } => true,
        RelationalType::Conj(a, b) | RelationalType::Disj(a, b) => {
            quantifier_free(a) && quantifier_free(b)
        }
        RelationalType::Neg(a) => quantifier_free(a),
        RelationalType::Pi(_) | RelationalType::Sigma(_) => false,
    }
}

/// Complement of a quantifier-free condition, as a graph postcomposing the
/// negation operation.
pub fn negated_condition(op: &OpValue) -> Result<ConstructionGraph, RelError> {
    let sig = op.sig();
    if sig.outputs.sockets() != vec![TypeExpr::Types(1)] {
        return Err(RelError::NonRelational(sig.as_arrow().to_string()));
    }
    let mut b = GraphBuilder::new("negated");
    let ins: Vec<_> = sig.inputs.iter().map(|t| b.input(t.clone())).collect();
    let t = b.apply_value(op.clone(), &ins);
    let out = b.ty_neg(t[0]);
    b.output(out);
    b.finish().map_err(graph_err)
}

/// `Q+(R1; R2)(i)` is `R1(i+1) + R2(i)`.
pub fn q_plus(r1: &OpValue, r2: &OpValue) -> Result<OpValue, RelError> {
    let mut b = GraphBuilder::new("q_plus");
    let i = b.input(nat());
    let (i1, i2) = b.copy(i);
    let j = b.succ(i1);
    let t1 = b.apply_value(r1.clone(), &[j]);
    let t2 = b.apply_value(r2.clone(), &[i2]);
    let out = b.ty_sum(1, t1[0], t2[0]);
    b.output(out);
    Ok(OpValue::from_graph(b.finish().map_err(graph_err)?))
}

/// Connective used by the window operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Disj,
    Conj,
}

/// The shift template `T(Q; R; i) = Q(i+1) (+|x) R(i)` of type
/// `(C; C; N) -> Types1` with `C` the condition type.
fn window_template(kind: WindowKind) -> ConstructionGraph {
    let mut b = GraphBuilder::new(match kind {
        WindowKind::Disj => "shift_disj",
        WindowKind::Conj => "shift_conj",
    });
    let q = b.input(cond_ty());
    let r = b.input(cond_ty());
    let i = b.input(nat());
    let (i1, i2) = b.copy(i);
    let j = b.succ(i1);
    let tq = b.apply_socket(cond_sig(1), q, &[j]);
    let tr = b.apply_socket(cond_sig(1), r, &[i2]);
    let out = match kind {
        WindowKind::Disj => b.ty_sum(1, tq[0], tr[0]),
        WindowKind::Conj => b.ty_prod(1, tq[0], tr[0]),
    };
    b.output(out);
    b.finish().expect("window template is well-formed")
}

/// The template curried to `(C; C) -> C`, ready for iteration.
fn window_template_curried(kind: WindowKind) -> ConstructionGraph {
    curry_transform(&window_template(kind), 2).expect("template curries")
}

/// Neutral element of the window connective, as a constant condition.
fn window_seed(kind: WindowKind) -> OpValue {
    let t = match kind {
        WindowKind::Disj => crate::rel::atom(RelKind::Equal, 1, 2),
        WindowKind::Conj => crate::rel::atom(RelKind::Equal, 1, 1),
    };
    let ty = crate::rel::rel_to_type_expr(&t).expect("atoms convert");
    const_op(nat(), Value::Type(ty)).expect("type values are typeable")
}

/// One window step `F_R : C -> C` with `F_R(Q)(i) = Q(i+1) (+|x) R(i)`.
fn window_step(kind: WindowKind, r: &OpValue) -> Result<OpValue, RelError> {
    let tc = window_template_curried(kind);
    let bound = partial_apply(&tc, vec![(1, Value::Op(r.clone()))])
        .map_err(|e| RelError::FamilyEval(e.to_string()))?;
    Ok(OpValue::from_graph(bound))
}

/// Window over a fixed relation: `l_window(kind, R, k)(n)` combines
/// `R(k), R(k+1), ..., R(k+n-1)` — `n` terms starting at `k` — with the
/// window connective. Built by iterating the shift step `n` times from the
/// neutral seed and sampling at `k`.
pub fn l_window(kind: WindowKind, r: &OpValue, k: u64) -> Result<OpValue, RelError> {
    let step = window_step(kind, r)?;
    let mut b = GraphBuilder::new(match kind {
        WindowKind::Disj => format!("l_plus@{k}"),
        WindowKind::Conj => format!("l_times@{k}"),
    });
    let n = b.input(nat());
    let stepc = b.constant_op(step);
    let g = b.iter_node(vec![cond_ty()], n, stepc);
    let seed = b.constant_op(window_seed(kind));
    let qn = b.apply_socket(OpSig::plain(vec![cond_ty()], vec![cond_ty()]), g, &[seed]);
    let start = b.nat(k);
    let out = b.apply_socket(cond_sig(1), qn[0], &[start]);
    b.output(out[0]);
    Ok(OpValue::from_graph(b.finish().map_err(graph_err)?))
}

/// Bounded existential window: `l_plus(R; k)(n)` is the disjunction of
/// `R(i)` over the `n`-term window starting at `k`.
pub fn l_plus(r: &OpValue, k: u64) -> Result<OpValue, RelError> {
    l_window(WindowKind::Disj, r, k)
}

/// Bounded universal window: the conjunction analogue.
pub fn l_times(r: &OpValue, k: u64) -> Result<OpValue, RelError> {
    l_window(WindowKind::Conj, r, k)
}

/// The open-relation window transformer `(C; N) -> Types1`: given a
/// condition and a width, the window value at start 1. This is the form
/// composed into larger constructions where the relation itself flows on a
/// wire.
pub fn l_window_transformer(kind: WindowKind) -> Result<ConstructionGraph, RelError> {
    let tc = OpValue::from_graph(window_template_curried(kind));
    let mut b = GraphBuilder::new(match kind {
        WindowKind::Disj => "lw_disj",
        WindowKind::Conj => "lw_conj",
    });
    let r = b.input(cond_ty());
    let n = b.input(nat());
    let step = b.bind_value(tc, &[1], &[r]);
    let g = b.iter_node(vec![cond_ty()], n, step);
    let seed = b.constant_op(window_seed(kind));
    let qn = b.apply_socket(OpSig::plain(vec![cond_ty()], vec![cond_ty()]), g, &[seed]);
    let start = b.nat(1);
    let out = b.apply_socket(cond_sig(1), qn[0], &[start]);
    b.output(out[0]);
    b.finish().map_err(graph_err)
}

/// Nested-quantifier composition: for `R : (N; N) -> Types`, the combinator
/// `P : N -> (N -> Types)` with
/// `P(n)(k) = (R(1;1) x .. x R(1;k)) + .. + (R(n;1) x .. x R(n;k))`,
/// built from currying, the conjunction window over the second argument,
/// and the disjunction window over the first.
pub fn nested_quantifier_compose(r: &OpValue) -> Result<OpValue, RelError> {
    let r_c = curry_transform(&r.to_graph(), 1).map_err(|e| RelError::FamilyEval(e.to_string()))?;
    let lw_conj = OpValue::from_graph(l_window_transformer(WindowKind::Conj)?);

    // inner(i)(k) = R(i;1) x ... x R(i;k), in flat form.
    let mut b = GraphBuilder::new("nested_inner");
    let i = b.input(nat());
    let k = b.input(nat());
    let ri = b.apply_value(OpValue::from_graph(r_c), &[i]);
    let t = b.apply_value(lw_conj, &[ri[0], k]);
    b.output(t[0]);
    let inner_flat = OpValue::from_graph(b.finish().map_err(graph_err)?);

    // p(n)(k) = disjunction over i = 1..n of inner(i)(k), in flat form.
    let tc_disj = OpValue::from_graph(window_template_curried(WindowKind::Disj));
    let mut b = GraphBuilder::new("nested_p");
    let n = b.input(nat());
    let k = b.input(nat());
    let mk = b.bind_value(inner_flat, &[1], &[k]);
    let tc_socket = b.constant_op(tc_disj);
    let step = b.bind_socket(
        OpSig::plain(vec![cond_ty(), cond_ty()], vec![cond_ty()]),
        tc_socket,
        &[1],
        &[mk],
    );
    let g = b.iter_node(vec![cond_ty()], n, step);
    let seed = b.constant_op(window_seed(WindowKind::Disj));
    let qn = b.apply_socket(OpSig::plain(vec![cond_ty()], vec![cond_ty()]), g, &[seed]);
    let start = b.nat(1);
    let out = b.apply_socket(cond_sig(1), qn[0], &[start]);
    b.output(out[0]);
    let p_flat = b.finish().map_err(graph_err)?;

    let p = curry_transform(&p_flat, 1).map_err(|e| RelError::FamilyEval(e.to_string()))?;
    Ok(OpValue::from_graph(p))
}
