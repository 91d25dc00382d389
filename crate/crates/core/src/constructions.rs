//! Worked constructions built from the primitives: the higher-type
//! primitive-recursion operator, the witnessed theorem that every natural
//! has a strictly greater one, extensional equality of functionals, the
//! linear tree structure driven by conditional branches, and bounded search
//! over an enumerated type.
//!
//! Each construction comes with an independent oracle used by the
//! reproduction reports and the acceptance suite.

use crate::eval::{
    change_op, evaluate, evaluate_op_value, iter_op, while_op, EvalError,
};
use crate::graph::{
    curry_transform, partial_apply, swap_inputs, ConstructionGraph, GraphBuilder, GraphError,
    SocketRef,
};
use crate::prim::{OpSig, PrimitiveKind};
use crate::rel::{check_witness, RelKind};
use crate::rel_graphs::{l_window_transformer, WindowKind};
use crate::types::TypeExpr;
use crate::value::{const_op, id_op, OpValue, Value};
use rand::Rng;
use std::sync::OnceLock;

fn nat() -> TypeExpr {
    TypeExpr::Nat
}

fn nn() -> TypeExpr {
    TypeExpr::arrow1(nat(), nat())
}

fn check_err(v: Vec<crate::graph::Violation>) -> EvalError {
    EvalError::Graph(GraphError::Check(v))
}

/// `A -> A` endomap type and the sequence type `C = N -> (A -> A)`.
fn endo(a: &TypeExpr) -> TypeExpr {
    TypeExpr::arrow1(a.clone(), a.clone())
}

fn seq_ty(a: &TypeExpr) -> TypeExpr {
    TypeExpr::arrow1(nat(), endo(a))
}

fn seq_sig(a: &TypeExpr) -> OpSig {
    OpSig::plain(vec![nat()], vec![endo(a)])
}

/// One step of the iterator construction: `op : N x C -> N x C` takes
/// `(n, c)` and returns `(n+1, c')` where `c'` differs from `c` only at
/// index `n+1`, which becomes the composition of `c(n)` and `c(n+1)`.
pub fn build_op_node(a: &TypeExpr) -> ConstructionGraph {
    let aa = endo(a);
    let c_ty = seq_ty(a);
    let d_ty = TypeExpr::product(nat(), c_ty);
    let aa_sig = OpSig::plain(vec![a.clone()], vec![a.clone()]);

    let mut b = GraphBuilder::new("op_step");
    let pair = b.input(d_ty);
    let (n0, c0) = b.proj(pair);
    let (n1, n2) = b.copy(n0);
    let (c1, cc) = b.copy(c0);
    let (c2, c3) = b.copy(cc);
    let s = b.succ(n2);
    let (u1, uu) = b.copy(s);
    let (u2, u3) = b.copy(uu);
    let cn = b.apply_socket(seq_sig(a), c1, &[n1]);
    let cn1 = b.apply_socket(seq_sig(a), c2, &[u1]);
    let f = b.add(
        PrimitiveKind::Compose {
            f: aa_sig.clone(),
            g: aa_sig,
            pairing: vec![(0, 0)],
        },
        &[cn[0], cn1[0]],
    );
    let cbar = b.change(aa, u2, f[0], c3);
    let out = b.join(u3, cbar);
    b.output(out);
    b.finish().expect("op construction is well-formed")
}

/// `Rec : (N; C) -> (A -> A)`: iterate the step operation from `(1, c)`,
/// project, step the counter back, and sample the sequence there — the
/// composition of the first `n` elements of `c`.
pub fn build_rec(a: &TypeExpr) -> ConstructionGraph {
    let aa = endo(a);
    let c_ty = seq_ty(a);
    let d_ty = TypeExpr::product(nat(), c_ty.clone());

    let mut b = GraphBuilder::new("rec");
    let n = b.input(nat());
    let c = b.input(c_ty);
    let step = b.constant_op(OpValue::from_graph(build_op_node(a)));
    let g = b.iter_node(vec![d_ty.clone()], n, step);
    let one = b.nat(1);
    let start = b.join(one, c);
    let res = b.apply_socket(OpSig::plain(vec![d_ty.clone()], vec![d_ty]), g, &[start]);
    let (nb, cb) = b.proj(res[0]);
    let pn = b.pred(nb);
    let out = b.apply_socket(seq_sig(a), cb, &[pn]);
    let _ = aa;
    b.output(out[0]);
    b.finish().expect("rec construction is well-formed")
}

/// The iterator in its sequence-to-sequence form `C -> C`: swap the inputs
/// of `Rec` and curry. Element `n` of the output is the composition of the
/// first `n` elements of the input sequence.
pub fn grzegorczyk_iterator(a: &TypeExpr) -> ConstructionGraph {
    let rec = build_rec(a);
    let swapped = swap_inputs(&rec, &[1, 0]).expect("two inputs");
    curry_transform(&swapped, 1).expect("curry at 1")
}

/// Evaluate a sequence value `c : N -> (A -> A)` at an index.
pub fn sequence_element(c: &OpValue, i: u64) -> Result<OpValue, EvalError> {
    match evaluate_op_value(c, vec![Value::Nat(i)])?.into_iter().next() {
        Some(Value::Op(op)) => Ok(op),
        other => Err(EvalError::NotAnOperation(format!("{other:?}"))),
    }
}

/// Evaluate an endomap value at a natural.
pub fn endo_at(f: &OpValue, x: u64) -> Result<u64, EvalError> {
    match evaluate_op_value(f, vec![Value::Nat(x)])?.into_iter().next() {
        Some(Value::Nat(n)) => Ok(n),
        other => Err(EvalError::RuntimeType("nat".into(), format!("{other:?}"))),
    }
}

/// The three test sequences used against the recursion oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSequence {
    ConstSucc,
    Alternating,
    Patched,
}

impl TestSequence {
    pub const ALL: [TestSequence; 3] = [
        TestSequence::ConstSucc,
        TestSequence::Alternating,
        TestSequence::Patched,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestSequence::ConstSucc => "const-succ",
            TestSequence::Alternating => "alternating",
            TestSequence::Patched => "patched",
        }
    }

    /// The sequence as an operation value `N -> (N -> N)`.
    pub fn op(&self) -> OpValue {
        let succ = OpValue::prim(PrimitiveKind::Succ);
        let base = const_op(nat(), Value::Op(succ.clone())).expect("ops are typeable");
        match self {
            TestSequence::ConstSucc => base,
            TestSequence::Alternating => {
                // Double-step at the even indices of the tested range.
                let d = iter_op(2, &succ).expect("iterate succ");
                let mut c = base;
                for i in [2u64, 4, 6, 8] {
                    c = change_op(i, Value::Op(d.clone()), &c).expect("patch sequence");
                }
                c
            }
            TestSequence::Patched => {
                let d = iter_op(2, &succ).expect("iterate succ");
                change_op(3, Value::Op(d), &base).expect("patch sequence")
            }
        }
    }

    /// Oracle view: the function at index `i` applied to `x`.
    pub fn oracle_apply(&self, i: u64, x: u64) -> u64 {
        match self {
            TestSequence::ConstSucc => x + 1,
            TestSequence::Alternating => {
                if i.is_multiple_of(2) && (2..=8).contains(&i) {
                    x + 2
                } else {
                    x + 1
                }
            }
            TestSequence::Patched => {
                if i == 3 {
                    x + 2
                } else {
                    x + 1
                }
            }
        }
    }
}

/// The recursion oracle: `R(a)(c)(1) = a`, `R(a)(c)(k+1) = c(k)(R(a)(c)(k))`.
pub fn recursion_oracle(seq: TestSequence, a: u64, k: u64) -> u64 {
    let mut acc = a;
    for i in 1..k {
        acc = seq.oracle_apply(i, acc);
    }
    acc
}

/// The family `F(k) = Greater(Succ(k); k)` as a condition graph.
pub fn greater_succ_family() -> ConstructionGraph {
    let mut b = GraphBuilder::new("greater_succ");
    let k = b.input(nat());
    let (k1, k2) = b.copy(k);
    let s = b.succ(k1);
    let t = b.rel_atom(RelKind::Greater, s, k2);
    b.output(t);
    b.finish().expect("family is well-formed")
}

/// Outcome of one theorem sample point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremSample {
    pub k: u64,
    pub first_is_input: bool,
    pub witness_valid: bool,
}

/// Build the inhabitant of "for every k there is a greater n": take the
/// family `F(k) = Greater(Succ(k); k)`, the axiom object `f` of its
/// dependent product, and form the pairing operation via the sigma
/// constructor. Returns the operation together with its verification at the
/// sampled points.
pub fn theorem_forall_exists_greater(
    samples: u64,
) -> Result<(OpValue, Vec<TheoremSample>), EvalError> {
    let family = OpValue::from_graph(greater_succ_family());
    let axiom_op = {
        let mut b = GraphBuilder::new("succ_greater_obj");
        let k = b.input(nat());
        let w = b.add(PrimitiveKind::AxiomOp(crate::rel::Axiom::SuccGreater), &[k]);
        b.output(w[0]);
        OpValue::from_graph(b.finish().map_err(check_err)?)
    };
    let sigma = OpValue::prim(PrimitiveKind::SigmaF {
        family: family.clone(),
    });
    let theorem = match evaluate_op_value(&sigma, vec![Value::Op(axiom_op)])?
        .into_iter()
        .next()
    {
        Some(Value::Op(op)) => op,
        other => return Err(EvalError::NotAnOperation(format!("{other:?}"))),
    };

    let mut report = Vec::new();
    for k in 1..=samples {
        let out = evaluate_op_value(&theorem, vec![Value::Nat(k)])?
            .into_iter()
            .next()
            .expect("one output");
        let (first_is_input, witness_valid) = match out {
            Value::Pair(a, w) => {
                let fi = a.as_nat() == Some(k);
                let wv = match *w {
                    Value::Witness(ref wit) => {
                        check_witness(&crate::rel::atom(RelKind::Greater, k + 1, k), wit)
                    }
                    _ => false,
                };
                (fi, wv)
            }
            _ => (false, false),
        };
        report.push(TheoremSample {
            k,
            first_is_input,
            witness_valid,
        });
    }
    Ok((theorem, report))
}

/// Extensional equality of functionals `(A -> N)` as a relation: the
/// dependent product over `a` of `Equal(f(a); g(a))`.
pub fn eq_functionals(a: &TypeExpr) -> Result<OpValue, EvalError> {
    let fn_ty = TypeExpr::arrow1(a.clone(), nat());
    let fn_sig = OpSig::plain(vec![a.clone()], vec![nat()]);
    let hbar = {
        let mut b = GraphBuilder::new("pointwise_equal");
        let x = b.input(a.clone());
        let f = b.input(fn_ty.clone());
        let g = b.input(fn_ty.clone());
        let (x1, x2) = b.copy(x);
        let fx = b.apply_socket(fn_sig.clone(), f, &[x1]);
        let gx = b.apply_socket(fn_sig, g, &[x2]);
        let t = b.rel_atom(RelKind::Equal, fx[0], gx[0]);
        b.output(t);
        b.finish().map_err(check_err)?
    };
    let mut b = GraphBuilder::new("eq_functionals");
    let f = b.input(fn_ty.clone());
    let g = b.input(fn_ty);
    let fam = b.bind_value(OpValue::from_graph(hbar), &[1, 2], &[f, g]);
    let out = b.add(
        PrimitiveKind::TyPi {
            domain: a.clone(),
            level: 1,
        },
        &[fam],
    );
    b.output(out[0]);
    Ok(OpValue::from_graph(b.finish().map_err(check_err)?))
}

/// Decide the functional-equality relation at two operations under a domain
/// bound.
pub fn eq_functionals_decide(
    rel_op: &OpValue,
    f: &OpValue,
    g: &OpValue,
    bound: u64,
) -> Result<crate::rel::RelEval, EvalError> {
    let t = evaluate_op_value(rel_op, vec![Value::Op(f.clone()), Value::Op(g.clone())])?
        .into_iter()
        .next()
        .expect("one output");
    let ty = match t {
        Value::Type(ty) => ty,
        other => return Err(EvalError::RuntimeType("type".into(), other.to_string())),
    };
    let rel = crate::rel::type_expr_to_rel(&ty)?;
    Ok(crate::rel::eval_relational(&rel, Some(bound)))
}

// ---------------------------------------------------------------------------
// The tree example.

/// Tree tables as operation values, plus the scope counter and the operand.
#[derive(Debug, Clone)]
pub struct TreeState {
    pub scope: u64,
    pub operand: u64,
    pub node: OpValue,
    pub father: OpValue,
    pub leaf: OpValue,
}

fn tree_tys() -> Vec<TypeExpr> {
    vec![nat(), nat(), nn(), nn(), nn()]
}

/// Initial tree: one root node. `node` and `leaf` send index 1 to 1 and
/// everything else to 3 (out of scope); `father` is constantly 1.
pub fn initial_tree_state() -> TreeState {
    let three = const_op(nat(), Value::Nat(3)).expect("nat constant");
    let node = change_op(1, Value::Nat(1), &three).expect("initial node table");
    let leaf = change_op(1, Value::Nat(1), &three).expect("initial leaf table");
    let father = const_op(nat(), Value::Nat(1)).expect("nat constant");
    TreeState {
        scope: 1,
        operand: 1,
        node,
        father,
        leaf,
    }
}

fn nn_sig() -> OpSig {
    OpSig::plain(vec![nat()], vec![nat()])
}

/// `R11 : (N; N; (N -> N); N) -> Types`: the operand is out of scope or
/// names a deleted node.
fn tree_r11() -> ConstructionGraph {
    let mut b = GraphBuilder::new("r11");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let slot = b.input(nat());
    let (o1, o2) = b.copy(o);
    let t1 = b.rel_atom(RelKind::Greater, o1, n);
    let v = b.apply_socket(nn_sig(), node_t, &[o2]);
    let t2 = b.rel_atom(RelKind::Equal, v[0], slot);
    let out = b.ty_sum(1, t1, t2);
    b.output(out);
    b.finish().expect("r11 is well-formed")
}

/// `R12 : (N; (N -> N); N) -> Types`: the operand was a leaf.
fn tree_r12() -> ConstructionGraph {
    let mut b = GraphBuilder::new("r12");
    let o = b.input(nat());
    let leaf_t = b.input(nn());
    let slot = b.input(nat());
    let v = b.apply_socket(nn_sig(), leaf_t, &[o]);
    let t = b.rel_atom(RelKind::Equal, v[0], slot);
    b.output(t);
    b.finish().expect("r12 is well-formed")
}

/// `R21`: out of scope, or deleted, or not a leaf, or the root.
fn tree_r21() -> ConstructionGraph {
    let mut b = GraphBuilder::new("r21");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let leaf_t = b.input(nn());
    let slot2 = b.input(nat());
    let slot1a = b.input(nat());
    let slot1b = b.input(nat());
    let os = b.copies(o, 4);
    let t1 = b.rel_atom(RelKind::Greater, os[0], n);
    let vn = b.apply_socket(nn_sig(), node_t, &[os[1]]);
    let t2 = b.rel_atom(RelKind::Equal, vn[0], slot2);
    let vl = b.apply_socket(nn_sig(), leaf_t, &[os[2]]);
    let e3 = b.rel_atom(RelKind::Equal, vl[0], slot1a);
    let t3 = b.ty_neg(e3);
    let t4 = b.rel_atom(RelKind::Equal, os[3], slot1b);
    let d1 = b.ty_sum(1, t1, t2);
    let d2 = b.ty_sum(1, d1, t3);
    let out = b.ty_sum(1, d2, t4);
    b.output(out);
    b.finish().expect("r21 is well-formed")
}

/// `R22 : ((N -> N); N; N) -> Types`: nodes `o` and `i` coincide or have
/// different fathers.
fn tree_r22() -> ConstructionGraph {
    let mut b = GraphBuilder::new("r22");
    let father_t = b.input(nn());
    let o = b.input(nat());
    let i = b.input(nat());
    let (f1, f2) = b.copy(father_t);
    let (o1, o2) = b.copy(o);
    let (i1, i2) = b.copy(i);
    let t1 = b.rel_atom(RelKind::Equal, o1, i1);
    let vi = b.apply_socket(nn_sig(), f1, &[i2]);
    let vo = b.apply_socket(nn_sig(), f2, &[o2]);
    let e = b.rel_atom(RelKind::Equal, vi[0], vo[0]);
    let t2 = b.ty_neg(e);
    let out = b.ty_sum(1, t1, t2);
    b.output(out);
    b.finish().expect("r22 is well-formed")
}

/// `S22 : (N; N; (N -> N)) -> Types`: `o` is the only child of its father
/// within scope, via the conjunction window of `R22` over indices `1..=n`.
fn tree_s22() -> Result<ConstructionGraph, EvalError> {
    let r22 = OpValue::from_graph(tree_r22());
    let lw = OpValue::from_graph(
        l_window_transformer(WindowKind::Conj).map_err(EvalError::Rel)?,
    );
    let mut b = GraphBuilder::new("s22");
    let n = b.input(nat());
    let o = b.input(nat());
    let father_t = b.input(nn());
    let m = b.bind_value(r22, &[0, 1], &[father_t, o]);
    let out = b.apply_value(lw, &[m, n]);
    b.output(out[0]);
    b.finish().map_err(check_err)
}

/// The successful `add` branch: allocate `Succ(n)` as a child of `o`.
fn tree_f11() -> ConstructionGraph {
    let mut b = GraphBuilder::new("f11");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let father_t = b.input(nn());
    let leaf_t = b.input(nn());
    let s = b.succ(n);
    let ss = b.copies(s, 4);
    let (o1, o2) = b.copy(o);
    let one_a = b.nat(1);
    let node2 = b.change(nat(), ss[0], one_a, node_t);
    let father2 = b.change(nat(), ss[1], o1, father_t);
    let one_b = b.nat(1);
    let leaf2 = b.change(nat(), ss[2], one_b, leaf_t);
    for out in [ss[3], o2, node2, father2, leaf2] {
        b.output(out);
    }
    b.finish().expect("f11 is well-formed")
}

/// The second `add` step: the operand stops being a leaf.
fn tree_t12() -> ConstructionGraph {
    let mut b = GraphBuilder::new("t12");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let father_t = b.input(nn());
    let leaf_t = b.input(nn());
    let (o1, o2) = b.copy(o);
    let two = b.nat(2);
    let leaf2 = b.change(nat(), o1, two, leaf_t);
    for out in [n, o2, node_t, father_t, leaf2] {
        b.output(out);
    }
    b.finish().expect("t12 is well-formed")
}

/// The successful `del` branch: mark the operand deleted.
fn tree_f21() -> ConstructionGraph {
    let mut b = GraphBuilder::new("f21");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let father_t = b.input(nn());
    let leaf_t = b.input(nn());
    let os = b.copies(o, 3);
    let two_a = b.nat(2);
    let node2 = b.change(nat(), os[0], two_a, node_t);
    let two_b = b.nat(2);
    let leaf2 = b.change(nat(), os[1], two_b, leaf_t);
    for out in [n, os[2], node2, father_t, leaf2] {
        b.output(out);
    }
    b.finish().expect("f21 is well-formed")
}

/// The second `del` step: the father becomes a leaf again.
fn tree_t22() -> ConstructionGraph {
    let mut b = GraphBuilder::new("t22");
    let n = b.input(nat());
    let o = b.input(nat());
    let node_t = b.input(nn());
    let father_t = b.input(nn());
    let leaf_t = b.input(nn());
    let (f1, f2) = b.copy(father_t);
    let (o1, o2) = b.copy(o);
    let p = b.apply_socket(nn_sig(), f1, &[o1]);
    let one = b.nat(1);
    let leaf2 = b.change(nat(), p[0], one, leaf_t);
    for out in [n, o2, node_t, f2, leaf2] {
        b.output(out);
    }
    b.finish().expect("t22 is well-formed")
}

#[allow(clippy::too_many_arguments)]
fn two_stage(
    name: &str,
    cond1: OpValue,
    cond1_inputs: Vec<usize>,
    then1: OpValue,
    else1: OpValue,
    cond2: OpValue,
    cond2_inputs: Vec<usize>,
    then2: OpValue,
    else2: OpValue,
) -> Result<ConstructionGraph, EvalError> {
    let tys = tree_tys();
    let mut b = GraphBuilder::new(name);
    let ins: Vec<SocketRef> = tys.iter().map(|t| b.input(t.clone())).collect();
    let (l1, r1) = b.dispatch(cond1, cond1_inputs, then1, else1, &ins);
    let m1 = b.merge(tys.clone(), &l1, &r1);
    let (l2, r2) = b.dispatch(cond2, cond2_inputs, then2, else2, &m1);
    let m2 = b.merge(tys, &l2, &r2);
    for s in m2 {
        b.output(s);
    }
    b.finish().map_err(check_err)
}

fn add_graph() -> &'static ConstructionGraph {
    static G: OnceLock<ConstructionGraph> = OnceLock::new();
    G.get_or_init(|| {
        let s11 = OpValue::from_graph(
            partial_apply(&tree_r11(), vec![(3, Value::Nat(2))]).expect("bind slot"),
        );
        let s12 = OpValue::from_graph(
            partial_apply(&tree_r12(), vec![(2, Value::Nat(1))]).expect("bind slot"),
        );
        let idb = id_op_tree();
        two_stage(
            "add",
            s11,
            vec![0, 1, 2],
            idb.clone(),
            OpValue::from_graph(tree_f11()),
            s12,
            vec![1, 4],
            OpValue::from_graph(tree_t12()),
            idb,
        )
        .expect("add graph builds")
    })
}

fn del_graph() -> &'static ConstructionGraph {
    static G: OnceLock<ConstructionGraph> = OnceLock::new();
    G.get_or_init(|| {
        let s21 = OpValue::from_graph(
            partial_apply(
                &tree_r21(),
                vec![(4, Value::Nat(2)), (5, Value::Nat(1)), (6, Value::Nat(1))],
            )
            .expect("bind slots"),
        );
        let s22 = OpValue::from_graph(tree_s22().expect("s22 builds"));
        let idb = id_op_tree();
        two_stage(
            "del",
            s21,
            vec![0, 1, 2, 4],
            idb.clone(),
            OpValue::from_graph(tree_f21()),
            s22,
            vec![0, 1, 3],
            OpValue::from_graph(tree_t22()),
            idb,
        )
        .expect("del graph builds")
    })
}

fn id_op_tree() -> OpValue {
    OpValue::prim(PrimitiveKind::Id(tree_tys()))
}

fn run_tree_graph(g: &ConstructionGraph, s: &TreeState) -> Result<TreeState, EvalError> {
    let inputs = vec![
        Value::Nat(s.scope),
        Value::Nat(s.operand),
        Value::Op(s.node.clone()),
        Value::Op(s.father.clone()),
        Value::Op(s.leaf.clone()),
    ];
    let mut outs = evaluate(g, inputs)?.outputs;
    let take_op = |v: Option<Value>| match v {
        Some(Value::Op(op)) => Ok(op),
        other => Err(EvalError::NotAnOperation(format!("{other:?}"))),
    };
    let leaf = take_op(outs.pop().unwrap())?;
    let father = take_op(outs.pop().unwrap())?;
    let node = take_op(outs.pop().unwrap())?;
    let operand = outs
        .pop()
        .unwrap()
        .and_then(|v| v.as_nat())
        .ok_or(EvalError::InactiveOutput(1))?;
    let scope = outs
        .pop()
        .unwrap()
        .and_then(|v| v.as_nat())
        .ok_or(EvalError::InactiveOutput(0))?;
    Ok(TreeState {
        scope,
        operand,
        node,
        father,
        leaf,
    })
}

/// Add a node under the operand, per the two-conditional construction.
pub fn tree_add(s: &TreeState) -> Result<TreeState, EvalError> {
    run_tree_graph(add_graph(), s)
}

/// Delete the operand if it is a non-root leaf, per the two-conditional
/// construction.
pub fn tree_del(s: &TreeState) -> Result<TreeState, EvalError> {
    run_tree_graph(del_graph(), s)
}

/// Look up one of the tree tables at an index.
pub fn tree_table_at(table: &OpValue, i: u64) -> Result<u64, EvalError> {
    endo_at(table, i)
}

/// Plain mutable replay of the same pseudo-code, used as the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeOracle {
    pub scope: u64,
    node: Vec<u64>,
    father: Vec<u64>,
    leaf: Vec<u64>,
}

impl TreeOracle {
    pub fn new() -> TreeOracle {
        TreeOracle {
            scope: 1,
            node: vec![1],
            father: vec![],
            leaf: vec![1],
        }
    }

    fn node_at(&self, i: u64) -> u64 {
        self.node.get(i as usize - 1).copied().unwrap_or(3)
    }

    fn father_at(&self, i: u64) -> u64 {
        self.father.get(i as usize - 1).copied().unwrap_or(1)
    }

    fn leaf_at(&self, i: u64) -> u64 {
        self.leaf.get(i as usize - 1).copied().unwrap_or(3)
    }

    fn set(table: &mut Vec<u64>, i: u64, v: u64, default: u64) {
        let idx = i as usize - 1;
        if table.len() <= idx {
            table.resize(idx + 1, default);
        }
        table[idx] = v;
    }

    pub fn add(&mut self, o: u64) {
        if !(o > self.scope || self.node_at(o) == 2) {
            let new = self.scope + 1;
            Self::set(&mut self.node, new, 1, 3);
            Self::set(&mut self.father, new, o, 1);
            Self::set(&mut self.leaf, new, 1, 3);
            self.scope = new;
        }
        if self.leaf_at(o) == 1 {
            Self::set(&mut self.leaf, o, 2, 3);
        }
    }

    pub fn del(&mut self, o: u64) {
        if !(o > self.scope || self.node_at(o) == 2 || self.leaf_at(o) != 1 || o == 1) {
            Self::set(&mut self.node, o, 2, 3);
            Self::set(&mut self.leaf, o, 2, 3);
        }
        let only_child = (1..=self.scope)
            .all(|i| i == o || self.father_at(i) != self.father_at(o));
        if only_child {
            let parent = self.father_at(o);
            Self::set(&mut self.leaf, parent, 1, 3);
        }
    }

    pub fn tables_at(&self, i: u64) -> (u64, u64, u64) {
        (self.node_at(i), self.father_at(i), self.leaf_at(i))
    }
}

impl Default for TreeOracle {
    fn default() -> Self {
        Self::new()
    }
}

/// One step of a tree script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeOp {
    Add(u64),
    Del(u64),
}

/// Uniform random scripts; the operand ranges over `1..=scope+2`, so out of
/// scope operands are exercised.
pub fn random_script<R: Rng>(rng: &mut R, max_len: usize) -> Vec<TreeOp> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.5) {
                TreeOp::Add(0) // operand chosen at replay time from the live scope
            } else {
                TreeOp::Del(0)
            }
        })
        .collect()
}

/// Replay a script against both the graph machinery and the oracle,
/// checking all table entries up to the scope after every step. Returns the
/// number of steps on success, the failing step otherwise.
pub fn replay_script<R: Rng>(
    rng: &mut R,
    script: &[TreeOp],
) -> Result<Result<usize, usize>, EvalError> {
    let mut state = initial_tree_state();
    let mut oracle = TreeOracle::new();
    for (step, op) in script.iter().enumerate() {
        let o = rng.gen_range(1..=oracle.scope + 2);
        state.operand = o;
        match op {
            TreeOp::Add(_) => {
                state = tree_add(&state)?;
                oracle.add(o);
            }
            TreeOp::Del(_) => {
                state = tree_del(&state)?;
                oracle.del(o);
            }
        }
        if state.scope != oracle.scope {
            return Ok(Err(step));
        }
        for i in 1..=oracle.scope {
            let got = (
                tree_table_at(&state.node, i)?,
                tree_table_at(&state.father, i)?,
                tree_table_at(&state.leaf, i)?,
            );
            if got != oracle.tables_at(i) {
                return Ok(Err(step));
            }
        }
    }
    Ok(Ok(script.len()))
}

// ---------------------------------------------------------------------------
// Bounded search.

/// The canonical enumeration as an operation value.
pub fn toy_enumeration() -> OpValue {
    OpValue::prim(PrimitiveKind::Ind1)
}

/// Decidable equality on enumerated type objects, through their indices.
pub fn toy_type_eq() -> OpValue {
    let mut b = GraphBuilder::new("ty_eq");
    let t1 = b.input(TypeExpr::Types(0));
    let t2 = b.input(TypeExpr::Types(0));
    let i1 = b.add(PrimitiveKind::TyIndex, &[t1]);
    let i2 = b.add(PrimitiveKind::TyIndex, &[t2]);
    let out = b.rel_atom(RelKind::Equal, i1[0], i2[0]);
    b.output(out);
    OpValue::from_graph(b.finish().expect("toy equality is well-formed"))
}

/// Bounded search: the least `k <= n` with `eq(target; enum(k))` inhabited,
/// or 1 when there is none. Built around the bounded loop primitive with
/// the condition "still below the bound and not yet found".
pub fn bounded_search_g(
    enumeration: &OpValue,
    eq: &OpValue,
    target: &Value,
    n: u64,
) -> Result<u64, EvalError> {
    let con = {
        let mut b = GraphBuilder::new("searching");
        let k = b.input(nat());
        let (k1, k2) = b.copy(k);
        let pin = b.nat(n);
        let below = b.rel_atom(RelKind::Lesser, k1, pin);
        let tv = b.apply_value(enumeration.clone(), &[k2]);
        let tgt = b.constant(target.clone());
        let e = b.apply_value(eq.clone(), &[tgt, tv[0]]);
        let not_found = b.ty_neg(e[0]);
        let out = b.ty_prod(1, below, not_found);
        b.output(out);
        OpValue::from_graph(b.finish().map_err(check_err)?)
    };
    let found = {
        let mut b = GraphBuilder::new("found");
        let k = b.input(nat());
        let tv = b.apply_value(enumeration.clone(), &[k]);
        let tgt = b.constant(target.clone());
        let e = b.apply_value(eq.clone(), &[tgt, tv[0]]);
        b.output(e[0]);
        OpValue::from_graph(b.finish().map_err(check_err)?)
    };
    let loop_op = while_op(n, con, OpValue::prim(PrimitiveKind::Succ))?;

    let mut b = GraphBuilder::new("bounded_search");
    let start = b.input(nat());
    let sig = loop_op.sig();
    let opc = b.constant_op(loop_op);
    let outs = b.apply_socket(sig, opc, &[start]);
    let k_star = b.merge(vec![nat()], &outs[..1], &outs[1..]);
    let one = const_op(nat(), Value::Nat(1)).map_err(EvalError::Rel)?;
    let (l, r) = b.dispatch(found, vec![0], id_op(nat()), one, &[k_star[0]]);
    let m = b.merge(vec![nat()], &l, &r);
    b.output(m[0]);
    let g = b.finish().map_err(check_err)?;

    let result = evaluate(&g, vec![Value::Nat(1)])?.single()?;
    result
        .as_nat()
        .ok_or_else(|| EvalError::RuntimeType("nat".into(), result.to_string()))
}

/// Linear-scan oracle for the bounded search.
pub fn linear_scan_oracle(
    enumeration: &OpValue,
    eq_holds: &dyn Fn(&Value, &Value) -> bool,
    target: &Value,
    n: u64,
) -> Result<u64, EvalError> {
    for k in 1..=n {
        let v = evaluate_op_value(enumeration, vec![Value::Nat(k)])?
            .into_iter()
            .next()
            .expect("one output");
        if eq_holds(target, &v) {
            return Ok(k);
        }
    }
    Ok(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_op_exclusive;

    #[test]
    fn op_step_advances_and_composes() {
        let a = nat();
        let op = build_op_node(&a);
        let c = TestSequence::ConstSucc.op();
        let start = Value::pair(Value::Nat(1), Value::Op(c));
        let out = evaluate(&op, vec![start]).unwrap().single().unwrap();
        match out {
            Value::Pair(n, c2) => {
                assert_eq!(n.as_nat(), Some(2));
                let c2 = c2.as_op().unwrap().clone();
                // c'(2) is now the two-fold successor; other entries are
                // untouched.
                let e2 = sequence_element(&c2, 2).unwrap();
                assert_eq!(endo_at(&e2, 5).unwrap(), 7);
                for k in [1u64, 3, 4, 7] {
                    let ek = sequence_element(&c2, k).unwrap();
                    assert_eq!(endo_at(&ek, 5).unwrap(), 6, "at index {k}");
                }
            }
            other => panic!("expected pair, got {other}"),
        }
    }

    #[test]
    fn rec_matches_recursion_oracle_small() {
        let rec = build_rec(&nat());
        for seq in TestSequence::ALL {
            let c = seq.op();
            for k in 1..=4 {
                for a in [1u64, 5] {
                    let out = evaluate(&rec, vec![Value::Nat(k), Value::Op(c.clone())])
                        .unwrap()
                        .single()
                        .unwrap();
                    let f = out.as_op().unwrap();
                    let got = endo_at(f, a).unwrap();
                    assert_eq!(
                        got,
                        recursion_oracle(seq, a, k + 1),
                        "{} k={k} a={a}",
                        seq.name()
                    );
                }
            }
        }
    }

    #[test]
    fn iterator_sequence_form() {
        let it = grzegorczyk_iterator(&nat());
        let c = TestSequence::Patched.op();
        let out = evaluate(&it, vec![Value::Op(c.clone())])
            .unwrap()
            .single()
            .unwrap();
        let cbar = out.as_op().unwrap().clone();
        // Element 1 is c(1); element n+1 composes element n with c(n+1).
        let e1 = sequence_element(&cbar, 1).unwrap();
        assert_eq!(endo_at(&e1, 4).unwrap(), 5);
        for n in 1..=5u64 {
            let en = sequence_element(&cbar, n).unwrap();
            let en1 = sequence_element(&cbar, n + 1).unwrap();
            for a in [1u64, 6] {
                let via_next = endo_at(&en1, a).unwrap();
                let stepwise =
                    TestSequence::Patched.oracle_apply(n + 1, endo_at(&en, a).unwrap());
                assert_eq!(via_next, stepwise, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn dependent_type_levels() {
        // A dependent product over a family into Types1 lives at level 2.
        let fam = OpValue::from_graph(greater_succ_family());
        let pi = TypeExpr::Pi(Box::new(fam));
        assert_eq!(crate::types::level_of(&pi), crate::types::Level(2));
    }

    #[test]
    fn theorem_spot_check() {
        let (_, report) = theorem_forall_exists_greater(5).unwrap();
        assert!(report.iter().all(|s| s.first_is_input && s.witness_valid));
    }

    #[test]
    fn eq_functionals_cases() {
        let rel = eq_functionals(&nat()).unwrap();
        let succ = OpValue::prim(PrimitiveKind::Succ);
        let two = iter_op(2, &succ).unwrap();
        assert!(eq_functionals_decide(&rel, &succ, &succ, 6)
            .unwrap()
            .is_inhabited());
        assert!(eq_functionals_decide(&rel, &succ, &two, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn tree_first_add() {
        let s0 = initial_tree_state();
        let mut s = s0.clone();
        s.operand = 1;
        let s1 = tree_add(&s).unwrap();
        assert_eq!(s1.scope, 2);
        assert_eq!(tree_table_at(&s1.node, 2).unwrap(), 1);
        assert_eq!(tree_table_at(&s1.father, 2).unwrap(), 1);
        assert_eq!(tree_table_at(&s1.leaf, 2).unwrap(), 1);
        assert_eq!(tree_table_at(&s1.leaf, 1).unwrap(), 2);
    }

    #[test]
    fn tree_del_root_is_noop() {
        let mut s = initial_tree_state();
        s.operand = 1;
        let s1 = tree_del(&s).unwrap();
        assert_eq!(s1.scope, 1);
        assert_eq!(tree_table_at(&s1.node, 1).unwrap(), 1);
    }

    #[test]
    fn tree_add_then_del_restores_leaf() {
        let mut s = initial_tree_state();
        s.operand = 1;
        s = tree_add(&s).unwrap();
        s.operand = 2;
        s = tree_del(&s).unwrap();
        let mut oracle = TreeOracle::new();
        oracle.add(1);
        oracle.del(2);
        assert_eq!(s.scope, oracle.scope);
        for i in 1..=oracle.scope {
            let got = (
                tree_table_at(&s.node, i).unwrap(),
                tree_table_at(&s.father, i).unwrap(),
                tree_table_at(&s.leaf, i).unwrap(),
            );
            assert_eq!(got, oracle.tables_at(i), "at {i}");
        }
    }

    #[test]
    fn bounded_search_finds_and_fails() {
        let en = toy_enumeration();
        let eq = toy_type_eq();
        let t5 = crate::types::ind1(5);
        assert_eq!(
            bounded_search_g(&en, &eq, &Value::Type(t5.clone()), 10).unwrap(),
            5
        );
        let t30 = crate::types::ind1(30);
        assert_eq!(
            bounded_search_g(&en, &eq, &Value::Type(t30), 10).unwrap(),
            1
        );
        assert_eq!(bounded_search_g(&en, &eq, &Value::Type(t5), 3).unwrap(), 1);
    }

    #[test]
    fn while_loop_oracle_case() {
        // Bounded loop: four rounds of successor while below ten.
        let con = {
            let mut b = GraphBuilder::new("below10");
            let k = b.input(nat());
            let pin = b.nat(10);
            let t = b.rel_atom(RelKind::Lesser, k, pin);
            b.output(t);
            OpValue::from_graph(b.finish().unwrap())
        };
        let w = while_op(4, con, OpValue::prim(PrimitiveKind::Succ)).unwrap();
        let outs = evaluate_op_exclusive(&w, vec![Value::Nat(1)]).unwrap();
        assert_eq!(outs[0].as_ref().and_then(|v| v.as_nat()), Some(5));
        assert_eq!(outs[1], None);
    }
}
