//! Executes checked construction graphs: eager evaluation in topological
//! order, single consumption of every produced value, and branch pruning
//! downstream of inactive exclusive outputs.

use crate::graph::{
    compose_graphs, partial_apply, ConstructionGraph, GraphError, NodeKind,
};
use crate::prim::PrimitiveKind;
use crate::rel::{
    check_witness, eval_relational, type_expr_to_rel, RelError, RelEval,
};
use crate::types::{des, ind1, type_index, TypeError, TypeExpr};
use crate::value::{const_op, value_matches, OpValue, Side, Value};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("graph is not well-formed: {0}")]
    InvalidGraph(String),
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("input {index} does not fit socket `{expected}`: got {got}")]
    InputType {
        index: usize,
        expected: String,
        got: String,
    },
    #[error("runtime type mismatch at {0}: {1}")]
    RuntimeType(String, String),
    #[error("condition is not decidable: {0}")]
    UndecidableCondition(String),
    #[error("socket expected an operation value, got {0}")]
    NotAnOperation(String),
    #[error("witness validation failed: {0}")]
    WitnessCheck(String),
    #[error("both exclusive branches arrived active")]
    BothBranchesActive,
    #[error("operation output {0} is inactive where a value was required")]
    InactiveOutput(usize),
    #[error("natural number argument must be at least 1")]
    NatRange,
    #[error("value has no computable type: {0}")]
    Untypeable(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Evaluation outcome: one entry per graph output socket; `None` marks the
/// inactive side of an exclusive pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub outputs: Vec<Option<Value>>,
}

impl EvalResult {
    /// The active outputs, in socket order.
    pub fn active(&self) -> Vec<&Value> {
        self.outputs.iter().flatten().collect()
    }

    pub fn single(mut self) -> Result<Value, EvalError> {
        if self.outputs.len() == 1 {
            self.outputs
                .pop()
                .unwrap()
                .ok_or(EvalError::InactiveOutput(0))
        } else {
            Err(EvalError::ArityMismatch {
                expected: 1,
                got: self.outputs.len(),
            })
        }
    }
}

/// Evaluate a checked graph on input values.
pub fn evaluate(g: &ConstructionGraph, inputs: Vec<Value>) -> Result<EvalResult, EvalError> {
    let sig = g.signature();
    if inputs.len() != sig.inputs.len() {
        return Err(EvalError::ArityMismatch {
            expected: sig.inputs.len(),
            got: inputs.len(),
        });
    }
    for (i, v) in inputs.iter().enumerate() {
        if !value_matches(&sig.inputs[i], v) {
            return Err(EvalError::InputType {
                index: i,
                expected: sig.inputs[i].to_string(),
                got: v.to_string(),
            });
        }
    }

    let order = g
        .topo_order()
        .map_err(|stuck| EvalError::InvalidGraph(format!("cycle through {stuck:?}")))?;
    let index: HashMap<crate::graph::NodeId, usize> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id, i))
        .collect();

    // One slot per wire; slots start unset, hold Some(None) for inactive.
    let mut slots: Vec<Option<Option<Value>>> = vec![None; g.wires.len()];
    let mut in_wire: Vec<Vec<Option<usize>>> = g
        .nodes
        .iter()
        .map(|n| vec![None; n.in_sockets.len()])
        .collect();
    let mut out_wires: Vec<Vec<Option<usize>>> = g
        .nodes
        .iter()
        .map(|n| vec![None; n.out_sockets.len()])
        .collect();
    for (w_idx, w) in g.wires.iter().enumerate() {
        if let Some(&ni) = index.get(&w.to.0) {
            in_wire[ni][w.to.1] = Some(w_idx);
        }
        if let Some(&ni) = index.get(&w.from.0) {
            out_wires[ni][w.from.1] = Some(w_idx);
        }
    }

    let mut input_values: Vec<Option<Value>> = inputs.into_iter().map(Some).collect();
    let mut results: Vec<Option<Value>> = vec![None; g.outputs.len()];

    for ni in order {
        let node = &g.nodes[ni];
        let mut gathered: Vec<Option<Value>> = Vec::with_capacity(node.in_sockets.len());
        for (s, wire) in in_wire[ni].iter().enumerate() {
            let w = wire.ok_or_else(|| {
                EvalError::InvalidGraph(format!("unwired input {s} of {}", node.id))
            })?;
            let v = slots[w].take().ok_or_else(|| {
                EvalError::InvalidGraph(format!("value not ready on wire into {}", node.id))
            })?;
            gathered.push(v);
        }

        let outs: Vec<Option<Value>> = match &node.kind {
            NodeKind::Input { index: i, .. } => {
                vec![input_values[*i].take()]
            }
            NodeKind::Output { index: i, .. } => {
                results[*i] = gathered.pop().unwrap();
                Vec::new()
            }
            NodeKind::Constant { value, .. } => vec![Some(value.clone())],
            NodeKind::Sub(sub) => {
                if gathered.iter().any(|v| v.is_none()) {
                    vec![None; node.out_sockets.len()]
                } else {
                    let args = gathered.into_iter().map(|v| v.unwrap()).collect();
                    evaluate(sub, args)?.outputs
                }
            }
            NodeKind::Prim(PrimitiveKind::Merge(tys)) => {
                let k = tys.len();
                let mut outs = Vec::with_capacity(k);
                for i in 0..k {
                    let left = gathered[i].take();
                    let right = gathered[k + i].take();
                    outs.push(match (left, right) {
                        (Some(v), None) | (None, Some(v)) => Some(v),
                        (None, None) => None,
                        (Some(_), Some(_)) => return Err(EvalError::BothBranchesActive),
                    });
                }
                outs
            }
            NodeKind::Prim(pk) => {
                if gathered.iter().any(|v| v.is_none()) {
                    // Downstream of an inactive exclusive branch: do not fire.
                    vec![None; node.out_sockets.len()]
                } else {
                    let args = gathered.into_iter().map(|v| v.unwrap()).collect();
                    fire(pk, args)?
                }
            }
        };

        for (s, out) in outs.into_iter().enumerate() {
            if let Some(w) = out_wires[ni][s] {
                slots[w] = Some(out);
            }
        }
    }

    Ok(EvalResult { outputs: results })
}

/// Evaluate an operation value, exclusive outputs reported as `None`.
pub fn evaluate_op_exclusive(
    f: &OpValue,
    args: Vec<Value>,
) -> Result<Vec<Option<Value>>, EvalError> {
    match &f.body {
        crate::value::OpBody::Graph(g) => Ok(evaluate(g, args)?.outputs),
        crate::value::OpBody::Prim(pk) => {
            let expected = pk.signature().ins.len();
            if args.len() != expected {
                return Err(EvalError::ArityMismatch {
                    expected,
                    got: args.len(),
                });
            }
            fire(pk, args)
        }
    }
}

/// Evaluate an operation value that must produce every output.
pub fn evaluate_op_value(f: &OpValue, args: Vec<Value>) -> Result<Vec<Value>, EvalError> {
    let outs = evaluate_op_exclusive(f, args)?;
    outs.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(EvalError::InactiveOutput(i)))
        .collect()
}

fn expect_nat(v: &Value) -> Result<u64, EvalError> {
    v.as_nat()
        .ok_or_else(|| EvalError::RuntimeType("nat socket".into(), v.to_string()))
}

fn expect_op(v: Value) -> Result<OpValue, EvalError> {
    match v {
        Value::Op(op) => Ok(op),
        other => Err(EvalError::NotAnOperation(other.to_string())),
    }
}

fn expect_type(v: Value) -> Result<TypeExpr, EvalError> {
    match v {
        Value::Type(t) => Ok(t),
        other => Err(EvalError::RuntimeType("type socket".into(), other.to_string())),
    }
}

/// n-fold self-composition of an operation `A -> A`.
pub fn iter_op(n: u64, f: &OpValue) -> Result<OpValue, EvalError> {
    if n < 1 {
        return Err(EvalError::NatRange);
    }
    let g = f.to_graph();
    let width = g.signature().outputs.sockets().len();
    let pairing: Vec<(usize, usize)> = (0..width).map(|i| (i, i)).collect();
    let mut acc = g.clone();
    for _ in 1..n {
        acc = compose_graphs(&acc, &g, &pairing)?;
    }
    Ok(OpValue::from_graph(acc))
}

/// The sequence override produced by the `change` primitive: a wrapper
/// dispatching on equality with the changed index, the base sequence on the
/// other branch.
pub fn change_op(n: u64, a: Value, q: &OpValue) -> Result<OpValue, EvalError> {
    let elem_ty = match &q.sig().outputs.sockets()[..] {
        [t] => t.clone(),
        _ => {
            return Err(EvalError::RuntimeType(
                "change base".into(),
                "sequence must have one output".into(),
            ))
        }
    };
    let cond = {
        let mut b = crate::graph::GraphBuilder::new(format!("at{n}"));
        let k = b.input(TypeExpr::Nat);
        let pin = b.nat(n);
        let t = b.rel_atom(crate::rel::RelKind::Equal, k, pin);
        b.output(t);
        OpValue::from_graph(b.finish().map_err(GraphError::Check)?)
    };
    let then_op = const_op(TypeExpr::Nat, a).map_err(EvalError::Rel)?;
    let mut b = crate::graph::GraphBuilder::new(format!("change{n}"));
    let k = b.input(TypeExpr::Nat);
    let (l, r) = b.dispatch(cond, vec![0], then_op, q.clone(), &[k]);
    let m = b.merge(vec![elem_ty], &l, &r);
    b.output(m[0]);
    Ok(OpValue::from_graph(b.finish().map_err(GraphError::Check)?))
}

/// Build the conditional-branch operation `B -> (C || D)`.
pub fn ite_op(cond: OpValue, then_op: OpValue, else_op: OpValue) -> Result<OpValue, EvalError> {
    let b_tys = then_op.sig().inputs;
    let cond_inputs: Vec<usize> = (0..cond.sig().inputs.len()).collect();
    let mut b = crate::graph::GraphBuilder::new("ite");
    let ins: Vec<_> = b_tys.iter().map(|t| b.input(t.clone())).collect();
    let (l, r) = b.dispatch(cond, cond_inputs, then_op, else_op, &ins);
    b.outputs_exclusive(&l, &r);
    Ok(OpValue::from_graph(b.finish().map_err(GraphError::Check)?))
}

/// Build the bounded conditional iteration `B -> (B || B)`.
pub fn while_op(n: u64, cond: OpValue, body: OpValue) -> Result<OpValue, EvalError> {
    if n < 1 {
        return Err(EvalError::NatRange);
    }
    let b_tys = body.sig().inputs;
    let mut b = crate::graph::GraphBuilder::new(format!("while{n}"));
    let ins: Vec<_> = b_tys.iter().map(|t| b.input(t.clone())).collect();
    let outs = b.add(
        PrimitiveKind::Loop {
            bound: n,
            cond,
            body,
        },
        &ins,
    );
    let (l, r) = outs.split_at(b_tys.len());
    b.outputs_exclusive(l, r);
    Ok(OpValue::from_graph(b.finish().map_err(GraphError::Check)?))
}

/// Decide a condition operation at the given arguments.
fn decide_condition(cond: &OpValue, args: Vec<Value>) -> Result<bool, EvalError> {
    let outs = evaluate_op_value(cond, args)?;
    let t = match outs.into_iter().next() {
        Some(Value::Type(t)) => t,
        other => {
            return Err(EvalError::RuntimeType(
                "condition output".into(),
                format!("{other:?}"),
            ))
        }
    };
    let r = type_expr_to_rel(&t)?;
    if !r.is_ground() {
        return Err(EvalError::UndecidableCondition(r.to_string()));
    }
    match eval_relational(&r, None) {
        RelEval::Inhabited(_) => Ok(true),
        RelEval::Empty => Ok(false),
        RelEval::Undecidable => Err(EvalError::UndecidableCondition(r.to_string())),
    }
}

/// Fire one primitive node on its gathered input values.
fn fire(pk: &PrimitiveKind, mut args: Vec<Value>) -> Result<Vec<Option<Value>>, EvalError> {
    use PrimitiveKind::*;
    let all = |vals: Vec<Value>| vals.into_iter().map(Some).collect::<Vec<_>>();
    Ok(match pk {
        Join(_, _) => {
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            all(vec![Value::pair(a, b)])
        }
        Proj(_, _) => match args.pop().unwrap() {
            Value::Pair(a, b) => all(vec![*a, *b]),
            other => {
                return Err(EvalError::RuntimeType("pair socket".into(), other.to_string()))
            }
        },
        PlusLeft(_, b) => all(vec![Value::left(args.pop().unwrap(), b.clone())]),
        PlusRight(a, _) => all(vec![Value::right(args.pop().unwrap(), a.clone())]),
        Get(_, _) => match args.pop().unwrap() {
            Value::Tagged { side, payload, .. } => match side {
                Side::Left => vec![Some(*payload), None],
                Side::Right => vec![None, Some(*payload)],
            },
            other => {
                return Err(EvalError::RuntimeType("sum socket".into(), other.to_string()))
            }
        },
        Merge(_) => unreachable!("merge is handled by the evaluator loop"),
        Const { b, .. } => {
            let a = args.pop().unwrap();
            all(vec![Value::Op(const_op(b.clone(), a).map_err(EvalError::Rel)?)])
        }
        ConstN => {
            let c = args.pop().unwrap();
            all(vec![Value::Op(
                const_op(TypeExpr::Nat, c).map_err(EvalError::Rel)?,
            )])
        }
        ConstVal { value, .. } => {
            args.pop(); // the input object is consumed
            all(vec![(**value).clone()])
        }
        Id(_) => all(args),
        Copy(_) => {
            let v = args.pop().unwrap();
            all(vec![v.clone(), v])
        }
        Succ => all(vec![Value::Nat(expect_nat(&args[0])? + 1)]),
        Pred => all(vec![Value::Nat(crate::rel::pred(expect_nat(&args[0])?))]),
        Apply { sig, provided } => {
            let mut rest = args.split_off(1);
            let f = expect_op(args.pop().unwrap())?;
            if provided.iter().any(|&i| i >= sig.inputs.len()) {
                return Err(EvalError::Graph(GraphError::BindingRange(
                    *provided.iter().max().unwrap_or(&0),
                )));
            }
            if provided.len() == sig.inputs.len() {
                let mut ordered: Vec<Option<Value>> = (0..sig.inputs.len()).map(|_| None).collect();
                for (&slot, v) in provided.iter().zip(rest.drain(..)) {
                    ordered[slot] = Some(v);
                }
                let full: Result<Vec<Value>, EvalError> = ordered
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| v.ok_or(EvalError::Graph(GraphError::BindingRange(i))))
                    .collect();
                evaluate_op_exclusive(&f, full?)?
            } else {
                let bindings: Vec<(usize, Value)> =
                    provided.iter().copied().zip(rest.drain(..)).collect();
                let bound = partial_apply(&f.to_graph(), bindings)?;
                all(vec![Value::Op(OpValue::from_graph(bound))])
            }
        }
        Compose { pairing, .. } => {
            let g = expect_op(args.pop().unwrap())?;
            let f = expect_op(args.pop().unwrap())?;
            let composed = compose_graphs(&f.to_graph(), &g.to_graph(), pairing)?;
            all(vec![Value::Op(OpValue::from_graph(composed))])
        }
        Iter { .. } => {
            let f = expect_op(args.pop().unwrap())?;
            let n = expect_nat(&args[0])?;
            all(vec![Value::Op(iter_op(n, &f)?)])
        }
        Change { .. } => {
            let q = expect_op(args.pop().unwrap())?;
            let a = args.pop().unwrap();
            let n = expect_nat(&args[0])?;
            all(vec![Value::Op(change_op(n, a, &q)?)])
        }
        Ite { .. } => {
            let else_op = expect_op(args.pop().unwrap())?;
            let then_op = expect_op(args.pop().unwrap())?;
            let cond = expect_op(args.pop().unwrap())?;
            all(vec![Value::Op(ite_op(cond, then_op, else_op)?)])
        }
        While { .. } => {
            let body = expect_op(args.pop().unwrap())?;
            let cond = expect_op(args.pop().unwrap())?;
            let n = expect_nat(&args[0])?;
            all(vec![Value::Op(while_op(n, cond, body)?)])
        }
        SigmaF { family } => {
            let f = expect_op(args.pop().unwrap())?;
            all(vec![Value::Op(OpValue::prim(PrimitiveKind::SigmaWrap {
                family: family.clone(),
                f,
            }))])
        }
        SigmaWrap { family, f } => {
            let a = args.pop().unwrap();
            let w = evaluate_op_value(f, vec![a.clone()])?
                .into_iter()
                .next()
                .expect("one output");
            let fam_ty = expect_type(
                evaluate_op_value(family, vec![a.clone()])?
                    .into_iter()
                    .next()
                    .expect("one output"),
            )?;
            match (&w, type_expr_to_rel(&fam_ty)) {
                (Value::Witness(wit), Ok(rel)) => {
                    if !check_witness(&rel, wit) {
                        return Err(EvalError::WitnessCheck(format!(
                            "object does not witness `{rel}`"
                        )));
                    }
                }
                _ => {
                    if !value_matches(&fam_ty, &w) {
                        return Err(EvalError::WitnessCheck(format!(
                            "object `{w}` is not of the family type `{fam_ty}`"
                        )));
                    }
                }
            }
            all(vec![Value::pair(a, w)])
        }
        Dispatch {
            cond,
            cond_inputs,
            then_op,
            else_op,
        } => {
            let cond_args: Result<Vec<Value>, EvalError> = cond_inputs
                .iter()
                .map(|&i| {
                    args.get(i)
                        .cloned()
                        .ok_or(EvalError::Graph(GraphError::BindingRange(i)))
                })
                .collect();
            let cond_args = cond_args?;
            let taken = decide_condition(cond, cond_args)?;
            let c_len = then_op.sig().outputs.sockets().len();
            let d_len = else_op.sig().outputs.sockets().len();
            if taken {
                let mut outs: Vec<Option<Value>> = evaluate_op_value(then_op, args)?
                    .into_iter()
                    .map(Some)
                    .collect();
                outs.extend(std::iter::repeat_with(|| None).take(d_len));
                outs
            } else {
                let mut outs: Vec<Option<Value>> =
                    std::iter::repeat_with(|| None).take(c_len).collect();
                outs.extend(evaluate_op_value(else_op, args)?.into_iter().map(Some));
                outs
            }
        }
        Loop { bound, cond, body } => {
            let width = args.len();
            let mut state = args;
            let mut exhausted = true;
            for _ in 0..*bound {
                if decide_condition(cond, state.clone())? {
                    state = evaluate_op_value(body, state)?;
                } else {
                    exhausted = false;
                    break;
                }
            }
            let mut outs: Vec<Option<Value>> = Vec::with_capacity(2 * width);
            if exhausted {
                outs.extend(state.into_iter().map(Some));
                outs.extend(std::iter::repeat_with(|| None).take(width));
            } else {
                outs.extend(std::iter::repeat_with(|| None).take(width));
                outs.extend(state.into_iter().map(Some));
            }
            outs
        }
        RelAtomOp(kind) => {
            let k = expect_nat(&args[1])?;
            let n = expect_nat(&args[0])?;
            all(vec![Value::Type(TypeExpr::RelAtom {
                kind: *kind,
                lhs: crate::rel::RelArg::Nat(n),
                rhs: crate::rel::RelArg::Nat(k),
            })])
        }
        TyProd { .. } => {
            let b = expect_type(args.pop().unwrap())?;
            let a = expect_type(args.pop().unwrap())?;
            all(vec![Value::Type(TypeExpr::product(a, b))])
        }
        TySum { .. } => {
            let b = expect_type(args.pop().unwrap())?;
            let a = expect_type(args.pop().unwrap())?;
            all(vec![Value::Type(TypeExpr::sum(a, b))])
        }
        TyArrow { .. } => {
            let b = expect_type(args.pop().unwrap())?;
            let a = expect_type(args.pop().unwrap())?;
            all(vec![Value::Type(TypeExpr::arrow1(a, b))])
        }
        TyNeg => {
            let t = expect_type(args.pop().unwrap())?;
            let r = type_expr_to_rel(&t)?;
            let n = crate::rel::negate(&r);
            all(vec![Value::Type(crate::rel::rel_to_type_expr(&n)?)])
        }
        TyPi { .. } => {
            let fam = expect_op(args.pop().unwrap())?;
            all(vec![Value::Type(TypeExpr::Pi(Box::new(fam)))])
        }
        TySigma { .. } => {
            let fam = expect_op(args.pop().unwrap())?;
            all(vec![Value::Type(TypeExpr::Sigma(Box::new(fam)))])
        }
        Des => {
            let t = expect_type(args.pop().unwrap())?;
            let (a, b) = des(&t)?;
            all(vec![Value::Type(a), Value::Type(b)])
        }
        Ind1 => {
            let n = expect_nat(&args[0])?;
            if n < 1 {
                return Err(EvalError::NatRange);
            }
            all(vec![Value::Type(ind1(n))])
        }
        TyIndex => {
            let t = expect_type(args.pop().unwrap())?;
            all(vec![Value::Nat(type_index(&t)?)])
        }
        AxiomOp(ax) => {
            let ns: Result<Vec<u64>, EvalError> = args.iter().map(expect_nat).collect();
            let w = ax
                .witness(&ns?)
                .ok_or_else(|| EvalError::WitnessCheck(format!("bad arity for {}", ax.name())))?;
            all(vec![Value::Witness(w)])
        }
        Poly(p) => {
            let tys: Result<Vec<TypeExpr>, EvalError> =
                args.into_iter().map(expect_type).collect();
            let inst = p
                .instantiate(&tys?)
                .ok_or_else(|| EvalError::RuntimeType("poly".into(), p.name().into()))?;
            all(vec![Value::Op(OpValue::prim(inst))])
        }
        PolyTypeOf(p) => {
            let tys: Result<Vec<TypeExpr>, EvalError> =
                args.into_iter().map(expect_type).collect();
            let inst = p
                .instantiate(&tys?)
                .ok_or_else(|| EvalError::RuntimeType("poly".into(), p.name().into()))?;
            let arrow = OpValue::prim(inst).sig().as_arrow();
            all(vec![Value::Type(arrow)])
        }
    })
}
