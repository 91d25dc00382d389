//! Acceptance suite: one test per criterion, each printing a PASS line once
//! every assertion at the stated tolerance has held. All tolerances are
//! exact; criteria with a time budget assert it.

use construct_core::constructions::*;
use construct_core::continuum::{
    aggregate_adjacency, canonical_tree_string, component_tree, similar, unite, CubicalComplex,
};
use construct_core::eval::{evaluate, evaluate_op_value, iter_op};
use construct_core::format::load_graph_str;
use construct_core::graph::{
    curry_transform, uncurry_transform, ConstructionGraph, GraphBuilder, SocketRef,
};
use construct_core::prim::{OpSig, PrimitiveKind};
use construct_core::rel::{
    atom, conj, disj, equiv_build, eval_relational, lem_build, neg, negate,
    type_expr_to_rel, RelKind, RelationalType,
};
use construct_core::rel_graphs::{condition_graph, l_plus, l_times};
use construct_core::types::TypeExpr;
use construct_core::value::{OpValue, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

fn nat() -> TypeExpr {
    TypeExpr::Nat
}

#[test]
fn criterion_1_grzegorczyk_iterator_equations() {
    let t0 = Instant::now();
    let rec = build_rec(&nat());
    for seq in TestSequence::ALL {
        let c = seq.op();
        for k in 1..=8u64 {
            for a in 1..=15u64 {
                let out = evaluate(&rec, vec![Value::Nat(k), Value::Op(c.clone())])
                    .unwrap()
                    .single()
                    .unwrap();
                let f = out.as_op().unwrap();
                let got = endo_at(f, a).unwrap();
                let expect = recursion_oracle(seq, a, k + 1);
                assert_eq!(got, expect, "Rec({k};{})({a})", seq.name());
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("CRITERION 1 (grzegorczyk-iterator equations): PASS ({elapsed:?})");
}

#[test]
fn criterion_2_trichotomy() {
    let t0 = Instant::now();
    for n in 1..=50u64 {
        for k in 1..=50u64 {
            let verdicts = [RelKind::Equal, RelKind::Greater, RelKind::Lesser]
                .map(|kind| eval_relational(&atom(kind, n, k), None).is_inhabited());
            assert_eq!(
                verdicts.iter().filter(|v| **v).count(),
                1,
                "exactly one at ({n},{k})"
            );
            let expect = [n == k, n > k, n < k];
            assert_eq!(verdicts, expect, "agrees with comparison at ({n},{k})");
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("CRITERION 2 (trichotomy): PASS ({elapsed:?})");
}

#[test]
fn criterion_3_iter_oracle() {
    let t0 = Instant::now();
    let succ = OpValue::prim(PrimitiveKind::Succ);
    let double = iter_op(2, &succ).unwrap();
    let patched = {
        // A Change-patched endomap: x + 1 normally, but 9 at input 4.
        let base = OpValue::prim(PrimitiveKind::Succ);
        construct_core::eval::change_op(4, Value::Nat(9), &base).unwrap()
    };
    type Step = fn(u64) -> u64;
    let fns: [(&str, OpValue, Step); 3] = [
        ("succ", succ, |a| a + 1),
        ("double-succ", double, |a| a + 2),
        ("change-patched", patched, |a| if a == 4 { 9 } else { a + 1 }),
    ];
    for (name, f, oracle) in &fns {
        for n in 1..=12u64 {
            let it = iter_op(n, f).unwrap();
            for a in 1..=30u64 {
                let got = endo_at(&it, a).unwrap();
                let mut expect = a;
                for _ in 0..n {
                    expect = oracle(expect);
                }
                assert_eq!(got, expect, "iter({n},{name})({a})");
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    println!("CRITERION 3 (iter oracle): PASS ({elapsed:?})");
}

#[test]
fn criterion_4_linearity_gate() {
    let fixtures = [
        ("valid_succ_chain.json", true),
        ("valid_copy_fanout.json", true),
        ("valid_join_proj.json", true),
        ("valid_iter_adder.json", true),
        ("valid_get_branch.json", true),
        ("bad_double_use.json", false),
        ("bad_missing_copy.json", false),
        ("bad_dangling.json", false),
        ("bad_type_mismatch.json", false),
        ("bad_cycle.json", false),
    ];
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for (name, expect_ok) in fixtures {
        let src = std::fs::read_to_string(dir.join(name)).unwrap();
        let g = load_graph_str(&src).unwrap();
        let violations = g.check();
        assert_eq!(
            violations.is_empty(),
            expect_ok,
            "{name} misjudged: {violations:?}"
        );
    }
    println!("CRITERION 4 (linearity gate, 10 graphs): PASS");
}

/// Random linear graphs over naturals: inputs are combined pairwise with a
/// keep-first combinator (constant + application) and unary steps.
fn random_small_graph(rng: &mut ChaCha8Rng, k_inputs: usize) -> ConstructionGraph {
    let mut b = GraphBuilder::new("random");
    let mut pool: Vec<SocketRef> = (0..k_inputs).map(|_| b.input(nat())).collect();
    while pool.len() > 1 {
        let i = rng.gen_range(0..pool.len());
        let a = pool.swap_remove(i);
        let j = rng.gen_range(0..pool.len());
        let c = pool.swap_remove(j);
        let konst = b.add(PrimitiveKind::Const { a: nat(), b: nat() }, &[a]);
        let applied = b.apply_socket(OpSig::plain(vec![nat()], vec![nat()]), konst[0], &[c]);
        let mut s = applied[0];
        for _ in 0..rng.gen_range(0..3) {
            s = if rng.gen_bool(0.5) { b.succ(s) } else { b.pred(s) };
        }
        pool.push(s);
    }
    let mut s = pool.pop().unwrap();
    for _ in 0..rng.gen_range(0..2) {
        s = b.succ(s);
    }
    b.output(s);
    b.finish().expect("random graphs are linear by construction")
}

fn eval_nat(g: &ConstructionGraph, args: &[u64]) -> u64 {
    let vals = args.iter().map(|&n| Value::Nat(n)).collect();
    evaluate(g, vals).unwrap().single().unwrap().as_nat().unwrap()
}

/// Apply a curried graph stage-wise: the first group through the graph, the
/// rest through the produced operation.
fn eval_staged(curried: &ConstructionGraph, split: usize, args: &[u64]) -> u64 {
    let first: Vec<Value> = args[..split].iter().map(|&n| Value::Nat(n)).collect();
    let op = evaluate(curried, first).unwrap().single().unwrap();
    let f = op.as_op().unwrap().clone();
    let rest: Vec<Value> = args[split..].iter().map(|&n| Value::Nat(n)).collect();
    evaluate_op_value(&f, rest).unwrap()[0].as_nat().unwrap()
}

fn enumerate_points(k: usize, limit: u64) -> Vec<Vec<u64>> {
    let mut points = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in points {
            for v in 1..=limit {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

#[test]
fn criterion_5_curry_uncurry_roundtrips() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let k = if case % 2 == 0 { 2 } else { 3 };
        let g = random_small_graph(&mut rng, k);
        let split = rng.gen_range(1..k);
        let curried = curry_transform(&g, split).unwrap();
        let back = uncurry_transform(&curried).unwrap();
        let recurried = curry_transform(&back, split).unwrap();
        let limit = if k == 2 { 10 } else { 4 };
        for point in enumerate_points(k, limit) {
            let direct = eval_nat(&g, &point);
            // uncurry . curry preserves the flat behavior.
            assert_eq!(eval_nat(&back, &point), direct, "case {case} at {point:?}");
            // curry . uncurry preserves the staged behavior.
            assert_eq!(
                eval_staged(&recurried, split, &point),
                eval_staged(&curried, split, &point),
                "case {case} at {point:?}"
            );
        }
    }
    println!("CRITERION 5 (curry/uncurry round trips, 20 graphs): PASS");
}

#[test]
fn criterion_6_tree_replay() {
    let t0 = Instant::now();
    // Pinned fact: the initial state is the override-at-1 of the constant-3
    // table for node and leaf, the constant-1 table for father.
    let s0 = initial_tree_state();
    assert_eq!(s0.scope, 1);
    assert_eq!(tree_table_at(&s0.node, 1).unwrap(), 1);
    assert_eq!(tree_table_at(&s0.leaf, 1).unwrap(), 1);
    for i in 2..=6 {
        assert_eq!(tree_table_at(&s0.node, i).unwrap(), 3);
        assert_eq!(tree_table_at(&s0.leaf, i).unwrap(), 3);
        assert_eq!(tree_table_at(&s0.father, i).unwrap(), 1);
    }
    // Pinned fact: deleting the root is a no-op.
    let mut s = s0.clone();
    s.operand = 1;
    let after = tree_del(&s).unwrap();
    assert_eq!(after.scope, 1);
    assert_eq!(tree_table_at(&after.node, 1).unwrap(), 1);
    assert_eq!(tree_table_at(&after.leaf, 1).unwrap(), 1);

    let mut rng = ChaCha8Rng::seed_from_u64(20_260_810);
    for script_no in 0..100 {
        let script = random_script(&mut rng, 30);
        match replay_script(&mut rng, &script).unwrap() {
            Ok(_) => {}
            Err(step) => panic!("script {script_no} diverged from the oracle at step {step}"),
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("CRITERION 6 (tree replay, 100 scripts): PASS ({elapsed:?})");
}

fn random_rel(rng: &mut ChaCha8Rng, depth: u32) -> RelationalType {
    if depth == 0 || rng.gen_bool(0.4) {
        let kind = [RelKind::Equal, RelKind::Lesser, RelKind::Greater][rng.gen_range(0..3)];
        atom(kind, rng.gen_range(1..=20), rng.gen_range(1..=20))
    } else {
        match rng.gen_range(0..3) {
            0 => conj(random_rel(rng, depth - 1), random_rel(rng, depth - 1)),
            1 => disj(random_rel(rng, depth - 1), random_rel(rng, depth - 1)),
            _ => neg(random_rel(rng, depth - 1)),
        }
    }
}

#[test]
fn criterion_7_relational_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..200 {
        let r = random_rel(&mut rng, 3);
        let nn = negate(&negate(&r));
        assert_eq!(
            eval_relational(&nn, None).is_inhabited(),
            eval_relational(&r, None).is_inhabited(),
            "double negation, case {case}: {r}"
        );
        assert!(
            eval_relational(&lem_build(&r), None).is_inhabited(),
            "excluded middle, case {case}: {r}"
        );
    }

    // Window operations against brute-force expansion.
    type Truth = fn(u64) -> bool;
    let patterns: [(RelationalType, Truth); 2] = [
        (
            construct_core::rel::atom_args(
                RelKind::Equal,
                construct_core::rel::RelArg::Hole(0),
                construct_core::rel::RelArg::Nat(3),
            ),
            |i| i == 3,
        ),
        (
            construct_core::rel::atom_args(
                RelKind::Greater,
                construct_core::rel::RelArg::Hole(0),
                construct_core::rel::RelArg::Nat(2),
            ),
            |i| i > 2,
        ),
    ];
    for (pattern, truth) in patterns.iter() {
        let op = OpValue::from_graph(condition_graph(pattern, &[0]).unwrap());
        for k in 1..=5u64 {
            let lp = l_plus(&op, k).unwrap();
            let lt = l_times(&op, k).unwrap();
            for n in 1..=8u64 {
                let window: Vec<u64> = (k..k + n).collect();
                let decide = |w: &OpValue| {
                    let out = evaluate_op_value(w, vec![Value::Nat(n)]).unwrap();
                    match &out[0] {
                        Value::Type(t) => {
                            eval_relational(&type_expr_to_rel(t).unwrap(), None).is_inhabited()
                        }
                        other => panic!("expected a type, got {other}"),
                    }
                };
                assert_eq!(
                    decide(&lp),
                    window.iter().any(|&i| truth(i)),
                    "l_plus {pattern} k={k} n={n}"
                );
                assert_eq!(
                    decide(&lt),
                    window.iter().all(|&i| truth(i)),
                    "l_times {pattern} k={k} n={n}"
                );
            }
        }
    }

    // Equivalence of Greater(n;k) and Lesser(k;n).
    for n in 1..=20u64 {
        for k in 1..=20u64 {
            let e = equiv_build(&atom(RelKind::Greater, n, k), &atom(RelKind::Lesser, k, n));
            assert!(eval_relational(&e, None).is_inhabited(), "at ({n},{k})");
        }
    }
    println!("CRITERION 7 (relational algebra): PASS");
}

#[test]
fn criterion_8_witnessed_theorem() {
    let (_, report) = theorem_forall_exists_greater(20).unwrap();
    assert_eq!(report.len(), 20);
    for sample in &report {
        assert!(
            sample.first_is_input,
            "pair at k={} must carry the input",
            sample.k
        );
        assert!(
            sample.witness_valid,
            "witness at k={} must validate",
            sample.k
        );
    }
    println!("CRITERION 8 (witnessed theorem, k <= 20): PASS");
}

// Independent continuum oracle: union-find labeling over a 2D grid plus a
// separate canonical-tree encoder.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn oracle_analysis(c: &CubicalComplex) -> (usize, usize, usize, String) {
    assert_eq!(c.dim(), 2, "the oracle covers the 2D fixtures");
    let side = c.side() as usize;
    let cells = side * side;
    let border = cells; // one virtual node for the frame
    let mut dsu = Dsu::new(cells + 1);
    let at = |x: usize, y: usize| -> Vec<u32> { vec![x as u32 + 1, y as u32 + 1] };
    let idx = |x: usize, y: usize| y * side + x;
    for y in 0..side {
        for x in 0..side {
            let white = c.is_active(&at(x, y));
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx < side && ny < side && c.is_active(&at(nx, ny)) == white {
                    dsu.union(idx(x, y), idx(nx, ny));
                }
            }
            if !white && (x == 0 || y == 0 || x == side - 1 || y == side - 1) {
                dsu.union(idx(x, y), border);
            }
        }
    }
    let mut white_roots = BTreeSet::new();
    let mut black_roots = BTreeSet::new();
    for y in 0..side {
        for x in 0..side {
            let r = dsu.find(idx(x, y));
            if c.is_active(&at(x, y)) {
                white_roots.insert(r);
            } else {
                black_roots.insert(r);
            }
        }
    }
    let border_root = dsu.find(border);
    black_roots.insert(border_root);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for y in 0..side {
        for x in 0..side {
            if !c.is_active(&at(x, y)) {
                continue;
            }
            let w = dsu.find(idx(x, y));
            if x == 0 || y == 0 || x == side - 1 || y == side - 1 {
                edges.insert((w, border_root));
            }
            for (nx, ny) in [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ] {
                if nx < side && ny < side && !c.is_active(&at(nx, ny)) {
                    edges.insert((w, dsu.find(idx(nx, ny))));
                }
            }
        }
    }
    // Canonical rooted tree from the bipartite edges.
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(w, b) in &edges {
        adj.entry(w).or_default().push(b);
        adj.entry(b).or_default().push(w);
    }
    fn enc(
        v: usize,
        parent: Option<usize>,
        adj: &BTreeMap<usize, Vec<usize>>,
        whites: &BTreeSet<usize>,
    ) -> String {
        let mut parts: Vec<String> = adj
            .get(&v)
            .map(|ns| {
                ns.iter()
                    .filter(|&&u| Some(u) != parent)
                    .map(|&u| enc(u, Some(v), adj, whites))
                    .collect()
            })
            .unwrap_or_default();
        parts.sort();
        let tag = if whites.contains(&v) { 'w' } else { 'b' };
        format!("{tag}({})", parts.join(""))
    }
    let canon = enc(border_root, None, &adj, &white_roots);
    (white_roots.len(), black_roots.len(), edges.len(), canon)
}

fn grid2(rows: &[&str]) -> CubicalComplex {
    let mut active = BTreeSet::new();
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            if ch == '#' {
                active.insert(vec![x as u32 + 1, y as u32 + 1]);
            }
        }
    }
    let res = (rows.len() as u32).trailing_zeros();
    CubicalComplex::new(2, res, active).unwrap()
}

#[test]
fn criterion_9_continuum() {
    let t0 = Instant::now();
    let all64 = {
        let mut c = CubicalComplex::full(2).unwrap();
        for _ in 0..6 {
            c = c.subdivide();
        }
        c
    };
    let annulus = grid2(&["####", "#.##", "####", "####"]);
    let annulus64 = {
        let mut c = annulus.clone();
        for _ in 0..4 {
            c = c.subdivide();
        }
        c
    };
    let diagonal = grid2(&["#...", ".#..", "....", "...."]);
    let nested = grid2(&[
        "########", "#......#", "#.####.#", "#.####.#",
        "#.####.#", "#.####.#", "#......#", "########",
    ]);
    let fork = grid2(&[
        "####....", "#..#....", "#..#....", "####....",
        "........", "......##", "......##", "........",
    ]);

    for (name, c) in [
        ("all-active-64", &all64),
        ("annulus", &annulus),
        ("annulus-64", &annulus64),
        ("diagonal", &diagonal),
        ("equal-counts-nested", &nested),
        ("equal-counts-fork", &fork),
    ] {
        let l = unite(c);
        let r = aggregate_adjacency(c, &l);
        let t = component_tree(&r).unwrap();
        let (ow, ob, oe, ocanon) = oracle_analysis(c);
        assert_eq!(l.white_count(), ow, "{name}: white components");
        assert_eq!(l.black_count(), ob, "{name}: black components");
        assert_eq!(r.edges.len(), oe, "{name}: aggregated edges");
        assert_eq!(canonical_tree_string(&t), ocanon, "{name}: canonical tree");
        // The aggregated relation is a tree in dimension 2.
        assert_eq!(t.nodes.len(), ow + ob, "{name}: node count");
    }

    // Fixed expectations for the named fixtures.
    let l = unite(&diagonal);
    assert_eq!((l.white_count(), l.black_count()), (2, 1));
    let ln = unite(&nested);
    let lf = unite(&fork);
    assert_eq!(
        (ln.white_count(), ln.black_count()),
        (lf.white_count(), lf.black_count()),
        "the pair must have equal component counts"
    );
    assert!(!similar(&nested, &fork), "equal counts must not imply similarity");
    assert!(similar(&annulus, &annulus64));
    assert!(!similar(&annulus, &all64));

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    println!("CRITERION 9 (continuum fixtures): PASS ({elapsed:?})");
}

#[test]
fn criterion_10_bounded_search() {
    let en = toy_enumeration();
    let eq = toy_type_eq();
    let eq_holds = |a: &Value, b: &Value| a == b;
    for n in 1..=50u64 {
        let mut targets = vec![1, n / 2 + 1, n];
        targets.dedup();
        for t in targets {
            let target = Value::Type(construct_core::types::ind1(t));
            let got = bounded_search_g(&en, &eq, &target, n).unwrap();
            let expect = linear_scan_oracle(&en, &eq_holds, &target, n).unwrap();
            assert_eq!(got, expect, "search n={n} target index {t}");
            assert_eq!(got, t, "target within range is found at its index");
        }
        // A target beyond the bound reports 1 (unspecified).
        let absent = Value::Type(construct_core::types::ind1(n + 3));
        let got = bounded_search_g(&en, &eq, &absent, n).unwrap();
        let expect = linear_scan_oracle(&en, &eq_holds, &absent, n).unwrap();
        assert_eq!(got, expect);
        assert_eq!(got, 1, "absent target must report 1 at n={n}");
    }
    println!("CRITERION 10 (bounded search vs linear scan): PASS");
}
