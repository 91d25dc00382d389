//! Property tests for the cross-cutting invariants: equivalence laws,
//! negation as involution, destructor/constructor inversion, literal
//! round-trips, signature instantiation, and similarity as an equivalence.

use construct_core::continuum::{similar, CubicalComplex};
use construct_core::eval::{evaluate_op_value, iter_op};
use construct_core::format::{parse_type, parse_value};
use construct_core::graph::prim_to_graph;
use construct_core::prim::PrimitiveKind;
use construct_core::rel::{
    self, eval_relational, negate, pred, procedure_n, RelKind, RelationalType,
};
use construct_core::types::{
    des, ind1, level1_constructor, type_equal, CtorKind, TypeEnumerator, TypeExpr,
};
use construct_core::value::{OpValue, Value};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn arb_type0() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![Just(TypeExpr::Nat), Just(TypeExpr::Continuum)];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::product(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::sum(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| TypeExpr::arrow1(a, b)),
        ]
    })
}

fn arb_rel() -> impl Strategy<Value = RelationalType> {
    let atom = (0..3u8, 1..=20u64, 1..=20u64).prop_map(|(k, n, m)| {
        let kind = [RelKind::Equal, RelKind::Lesser, RelKind::Greater][k as usize];
        rel::atom(kind, n, m)
    });
    atom.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| rel::conj(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| rel::disj(a, b)),
            inner.prop_map(rel::neg),
        ]
    })
}

fn arb_literal_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        (1..=100u64).prop_map(Value::Nat),
        arb_type0().prop_map(Value::Type),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Value::pair(a, b)),
            (inner.clone(), arb_type0()).prop_map(|(v, t)| Value::left(v, t)),
            (inner, arb_type0()).prop_map(|(v, t)| Value::right(v, t)),
        ]
    })
}

proptest! {
    #[test]
    fn type_equal_is_an_equivalence(a in arb_type0(), b in arb_type0(), c in arb_type0()) {
        prop_assert!(type_equal(&a, &a));
        prop_assert_eq!(type_equal(&a, &b), type_equal(&b, &a));
        if type_equal(&a, &b) && type_equal(&b, &c) {
            prop_assert!(type_equal(&a, &c));
        }
    }

    #[test]
    fn destructor_inverts_constructors(a in arb_type0(), b in arb_type0()) {
        for kind in [CtorKind::Product, CtorKind::Sum, CtorKind::Arrow] {
            let t = level1_constructor(kind, a.clone(), b.clone());
            prop_assert_eq!(des(&t).unwrap(), (a.clone(), b.clone()));
        }
    }

    #[test]
    fn type_syntax_round_trips(t in arb_type0()) {
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn negate_is_an_involution_up_to_evaluation(r in arb_rel()) {
        let double = negate(&negate(&r));
        prop_assert_eq!(
            eval_relational(&double, None).is_inhabited(),
            eval_relational(&r, None).is_inhabited()
        );
    }

    #[test]
    fn lem_is_inhabited_on_decidable_relations(r in arb_rel()) {
        prop_assert!(eval_relational(&rel::lem_build(&r), None).is_inhabited());
    }

    #[test]
    fn produced_witnesses_validate(r in arb_rel()) {
        if let rel::RelEval::Inhabited(w) = eval_relational(&r, None) {
            prop_assert!(rel::check_witness(&r, &w));
        }
    }

    #[test]
    fn value_literals_round_trip(v in arb_literal_value()) {
        let mut no_refs = |p: &str| {
            Err(construct_core::format::FormatError::UnresolvedRef(p.into()))
        };
        let reparsed = parse_value(&v.to_string(), &mut no_refs).unwrap();
        prop_assert_eq!(reparsed, v);
    }
}

#[test]
fn pred_succ_laws() {
    for n in 1..=100u64 {
        assert_eq!(pred(n + 1), n);
    }
    let seen: BTreeSet<u64> = (1..=100u64).map(|n| n + 1).collect();
    assert_eq!(seen.len(), 100, "successor is injective");
    assert_eq!(pred(1), 1, "predecessor saturates at 1");
}

#[test]
fn trichotomy_witness_rounds() {
    for n in 1..=30 {
        for k in 1..=30 {
            let t = procedure_n(n, k);
            match &t.witness.derivation {
                rel::Derivation::Comparison { rounds, .. } => {
                    assert_eq!(*rounds, n.min(k));
                }
                other => panic!("unexpected derivation {other:?}"),
            }
        }
    }
}

#[test]
fn iter_splits_additively() {
    let succ = OpValue::prim(PrimitiveKind::Succ);
    for n in 1..=6u64 {
        for m in 1..=6u64 {
            let whole = iter_op(n + m, &succ).unwrap();
            let left = iter_op(n, &succ).unwrap();
            let right = iter_op(m, &succ).unwrap();
            for a in [1u64, 7, 19] {
                let w = evaluate_op_value(&whole, vec![Value::Nat(a)]).unwrap();
                let mid = evaluate_op_value(&left, vec![Value::Nat(a)]).unwrap();
                let r = evaluate_op_value(&right, mid).unwrap();
                assert_eq!(w, r, "n={n} m={m} a={a}");
            }
        }
    }
}

#[test]
fn primitive_signatures_instantiate_to_checked_graphs() {
    // Every primitive with level-0 type parameters of size <= 3 wraps into
    // a graph that passes checking.
    let mut e = TypeEnumerator::new();
    let total: u128 = (0..=3).map(|w| e.count_at(w)).sum();
    let params: Vec<TypeExpr> = (1..=total as u64).map(ind1).collect();
    for t in &params {
        for kind in [
            PrimitiveKind::Join(t.clone(), TypeExpr::Nat),
            PrimitiveKind::Join(TypeExpr::Nat, t.clone()),
            PrimitiveKind::Proj(t.clone(), t.clone()),
            PrimitiveKind::PlusLeft(t.clone(), t.clone()),
            PrimitiveKind::PlusRight(t.clone(), TypeExpr::Continuum),
            PrimitiveKind::Get(t.clone(), t.clone()),
            PrimitiveKind::Const {
                a: t.clone(),
                b: TypeExpr::Nat,
            },
            PrimitiveKind::Id(vec![t.clone()]),
            PrimitiveKind::Copy(t.clone()),
            PrimitiveKind::Iter { a: vec![t.clone()] },
            PrimitiveKind::Change { elem: t.clone() },
        ] {
            let g = prim_to_graph(kind);
            assert!(g.check().is_empty(), "parameter {t}");
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> CubicalComplex {
    let mut active = BTreeSet::new();
    for y in 1..=8u32 {
        for x in 1..=8u32 {
            if rng.gen_bool(0.55) {
                active.insert(vec![x, y]);
            }
        }
    }
    CubicalComplex::new(2, 3, active).unwrap()
}

#[test]
fn similarity_is_an_equivalence_on_a_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sample: Vec<CubicalComplex> = (0..50).map(|_| random_complex(&mut rng)).collect();
    for c in &sample {
        assert!(similar(c, c), "reflexivity");
    }
    for i in 0..sample.len() {
        for j in (i + 1)..sample.len() {
            assert_eq!(
                similar(&sample[i], &sample[j]),
                similar(&sample[j], &sample[i]),
                "symmetry at ({i},{j})"
            );
        }
    }
    // Transitivity across triples sharing a class: group by pairwise
    // similarity to the first element of each class.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..sample.len() {
        for class in classes.iter_mut() {
            if similar(&sample[class[0]], &sample[i]) {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }
    for class in &classes {
        for &a in class {
            for &b in class {
                assert!(similar(&sample[a], &sample[b]), "transitivity inside class");
            }
        }
    }
    assert!(classes.len() > 1, "the sample should not be degenerate");
}
