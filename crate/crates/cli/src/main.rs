//! Command-line front end: check and evaluate graph files, run the
//! construction reproductions against their oracles, analyze continuum
//! grids, and enumerate types.
//!
//! Exit codes: 0 on success or a passing report, 1 on check violations or a
//! failing reproduction, 2 on usage or input errors.

use clap::{Parser, Subcommand};
use construct_core::constructions::{
    bounded_search_g, build_rec, endo_at, eq_functionals, eq_functionals_decide,
    grzegorczyk_iterator, initial_tree_state, linear_scan_oracle, random_script, recursion_oracle,
    replay_script, sequence_element, theorem_forall_exists_greater, toy_enumeration, toy_type_eq,
    tree_del, tree_table_at, TestSequence,
};
use construct_core::continuum::{
    aggregate_adjacency, canonical_tree_string, component_tree, similar, unite,
};
use construct_core::eval::{evaluate, evaluate_op_value, iter_op};
use construct_core::format::{graph_from_json, parse_continuum, parse_value, FormatError};
use construct_core::prim::PrimitiveKind;
use construct_core::rel::{eval_relational, type_expr_to_rel, RelEval};
use construct_core::types::{ind1, TypeExpr};
use construct_core::value::{OpValue, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "construct", version, about = "Socket-board construction calculus tools")]
struct Cli {
    /// Emit the report as a JSON object instead of KEY: value lines.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized reproduction scripts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quantifier bound for relational evaluation of results.
    #[arg(long, global = true)]
    bound: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a graph file for linearity, typing and shape violations.
    Check { path: PathBuf },
    /// Evaluate a checked graph file on an inputs document.
    Eval { graph: PathBuf, inputs: PathBuf },
    /// Run a named reproduction against its oracle.
    Repro { name: String },
    /// Continuum analysis.
    #[command(subcommand)]
    Continuum(ContinuumCmd),
    /// Print the first entries of the canonical type enumeration.
    EnumTypes { count: u64 },
}

#[derive(Subcommand)]
enum ContinuumCmd {
    /// Component counts, aggregated edges, and the canonical tree.
    Analyze { path: PathBuf },
    /// Similarity verdict for two complexes.
    Similar { first: PathBuf, second: PathBuf },
}

/// Ordered report with a stable `KEY: value` line discipline.
struct Report {
    lines: Vec<(String, String)>,
    pass: bool,
}

impl Report {
    fn new() -> Report {
        Report {
            lines: Vec::new(),
            pass: true,
        }
    }

    fn line(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    fn check(&mut self, key: impl Into<String>, ok: bool) {
        self.pass &= ok;
        self.line(key, if ok { "PASS" } else { "FAIL" });
    }

    fn render(&self, json: bool) -> String {
        if json {
            let mut obj = serde_json::Map::new();
            for (k, v) in &self.lines {
                obj.insert(k.clone(), serde_json::Value::String(v.clone()));
            }
            obj.insert(
                "result".into(),
                serde_json::Value::String(if self.pass { "PASS" } else { "FAIL" }.into()),
            );
            serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("report is json")
        } else {
            let mut out = String::new();
            for (k, v) in &self.lines {
                let _ = writeln!(out, "{k}: {v}");
            }
            let _ = writeln!(out, "RESULT: {}", if self.pass { "PASS" } else { "FAIL" });
            out
        }
    }
}

#[derive(Debug)]
enum CliError {
    Io(PathBuf, std::io::Error),
    Format(FormatError),
    Eval(construct_core::eval::EvalError),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Format(e) => write!(f, "{e}"),
            CliError::Eval(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Format(e)
    }
}

impl From<construct_core::eval::EvalError> for CliError {
    fn from(e: construct_core::eval::EvalError) -> Self {
        CliError::Eval(e)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_graph(path: &Path) -> Result<construct_core::ConstructionGraph, CliError> {
    let src = read(path)?;
    let v: serde_json::Value = serde_json::from_str(&src).map_err(FormatError::Json)?;
    Ok(graph_from_json(&v)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.cmd {
        Cmd::Check { path } => check_cmd(path),
        Cmd::Eval { graph, inputs } => eval_cmd(graph, inputs, cli.bound),
        Cmd::Repro { name } => repro_cmd(name, cli.seed, cli.bound),
        Cmd::Continuum(ContinuumCmd::Analyze { path }) => analyze_cmd(path),
        Cmd::Continuum(ContinuumCmd::Similar { first, second }) => similar_cmd(first, second),
        Cmd::EnumTypes { count } => enum_types_cmd(*count),
    }
}

fn check_cmd(path: &Path) -> Result<Report, CliError> {
    let g = load_graph(path)?;
    let violations = g.check();
    let mut report = Report::new();
    report.line("graph", &g.name);
    report.line("nodes", g.nodes.len());
    report.line("wires", g.wires.len());
    report.line("violations", violations.len());
    for (i, v) in violations.iter().enumerate() {
        report.line(format!("violation[{i}]"), v);
    }
    report.pass = violations.is_empty();
    Ok(report)
}

fn eval_cmd(graph: &Path, inputs: &Path, bound: Option<u64>) -> Result<Report, CliError> {
    let g = load_graph(graph)?;
    let violations = g.check();
    if !violations.is_empty() {
        let mut report = Report::new();
        report.line("graph", &g.name);
        for (i, v) in violations.iter().enumerate() {
            report.line(format!("violation[{i}]"), v);
        }
        report.pass = false;
        return Ok(report);
    }
    let base = inputs.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut loader = |rel: &str| -> Result<OpValue, FormatError> {
        let path = base.join(rel);
        let src = std::fs::read_to_string(&path)
            .map_err(|e| FormatError::Document(format!("{}: {e}", path.display())))?;
        let v: serde_json::Value = serde_json::from_str(&src)?;
        Ok(OpValue::from_graph(graph_from_json(&v)?))
    };
    let mut values = Vec::new();
    for line in read(inputs)?.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        values.push(parse_value(line, &mut loader)?);
    }
    let result = evaluate(&g, values)?;
    let mut report = Report::new();
    report.line("graph", &g.name);
    for (i, out) in result.outputs.iter().enumerate() {
        match out {
            Some(v) => {
                report.line(format!("out[{i}]"), v);
                if let (Some(b), Value::Type(t)) = (bound, v) {
                    if let Ok(rel) = type_expr_to_rel(t) {
                        let verdict = match eval_relational(&rel, Some(b)) {
                            RelEval::Inhabited(_) => "inhabited",
                            RelEval::Empty => "empty",
                            RelEval::Undecidable => "undecidable",
                        };
                        report.line(format!("rel[{i}]"), verdict);
                    }
                }
            }
            None => report.line(format!("out[{i}]"), "inactive"),
        }
    }
    Ok(report)
}

fn analyze_cmd(path: &Path) -> Result<Report, CliError> {
    let c = parse_continuum(&read(path)?)?;
    let labeling = unite(&c);
    let relation = aggregate_adjacency(&c, &labeling);
    let mut report = Report::new();
    report.line("dim", c.dim());
    report.line("resolution", c.resolution());
    report.line("active", c.active_count());
    report.line("white-components", labeling.white_count());
    report.line("black-components", labeling.black_count());
    report.line("edges", relation.edges.len());
    match component_tree(&relation) {
        Ok(tree) => report.line("tree", canonical_tree_string(&tree)),
        Err(e) => report.line("tree", format!("none ({e})")),
    }
    Ok(report)
}

fn similar_cmd(first: &Path, second: &Path) -> Result<Report, CliError> {
    let a = parse_continuum(&read(first)?)?;
    let b = parse_continuum(&read(second)?)?;
    let mut report = Report::new();
    report.line("first", format!("{a}"));
    report.line("second", format!("{b}"));
    report.line("similar", similar(&a, &b));
    Ok(report)
}

fn enum_types_cmd(count: u64) -> Result<Report, CliError> {
    if count < 1 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let mut report = Report::new();
    for n in 1..=count {
        report.line(format!("type[{n}]"), ind1(n));
    }
    Ok(report)
}

fn repro_cmd(name: &str, seed: Option<u64>, bound: Option<u64>) -> Result<Report, CliError> {
    match name {
        "iter" => repro_iter(),
        "grzegorczyk" => repro_grzegorczyk(),
        "forall-exists" => repro_forall_exists(),
        "tree" => repro_tree(seed),
        "bounded-search" => repro_bounded_search(),
        "eq-functionals" => repro_eq_functionals(bound),
        other => Err(CliError::Usage(format!(
            "unknown reproduction `{other}`; names: iter, grzegorczyk, forall-exists, tree, bounded-search, eq-functionals"
        ))),
    }
}

fn repro_iter() -> Result<Report, CliError> {
    let mut report = Report::new();
    let succ = OpValue::prim(PrimitiveKind::Succ);
    let double = iter_op(2, &succ)?;
    let patched = construct_core::eval::change_op(4, Value::Nat(9), &succ)?;
    type Step = fn(u64) -> u64;
    let cases: [(&str, OpValue, Step); 3] = [
        ("succ", succ, |a| a + 1),
        ("double-succ", double, |a| a + 2),
        ("change-patched", patched, |a| if a == 4 { 9 } else { a + 1 }),
    ];
    for (name, f, step) in &cases {
        for n in 1..=12u64 {
            let it = iter_op(n, f)?;
            let mut ok = true;
            for a in 1..=30u64 {
                let mut expect = a;
                for _ in 0..n {
                    expect = step(expect);
                }
                ok &= endo_at(&it, a)? == expect;
            }
            report.check(format!("iter f={name} n={n}"), ok);
        }
    }
    Ok(report)
}

fn repro_grzegorczyk() -> Result<Report, CliError> {
    let mut report = Report::new();
    let rec = build_rec(&TypeExpr::Nat);
    for seq in TestSequence::ALL {
        let c = seq.op();
        let mut ok = true;
        for k in 1..=8u64 {
            for a in 1..=15u64 {
                let out = evaluate(&rec, vec![Value::Nat(k), Value::Op(c.clone())])?
                    .single()?;
                let f = out
                    .as_op()
                    .ok_or_else(|| CliError::Usage("rec must return an operation".into()))?;
                ok &= endo_at(f, a)? == recursion_oracle(seq, a, k + 1);
            }
        }
        report.check(format!("rec seq={} k<=8 a<=15", seq.name()), ok);
    }
    // The curried sequence-to-sequence form: element n+1 extends element n.
    let itg = grzegorczyk_iterator(&TypeExpr::Nat);
    let c = TestSequence::Patched.op();
    let out = evaluate(&itg, vec![Value::Op(c)])?.single()?;
    let cbar = out
        .as_op()
        .ok_or_else(|| CliError::Usage("iterator must return an operation".into()))?
        .clone();
    let mut ok = true;
    for n in 1..=6u64 {
        let en = sequence_element(&cbar, n)?;
        let en1 = sequence_element(&cbar, n + 1)?;
        for a in [1u64, 4, 9] {
            ok &= endo_at(&en1, a)?
                == TestSequence::Patched.oracle_apply(n + 1, endo_at(&en, a)?);
        }
    }
    report.check("iterator sequence form n<=6", ok);
    Ok(report)
}

fn repro_forall_exists() -> Result<Report, CliError> {
    let mut report = Report::new();
    let (_, samples) = theorem_forall_exists_greater(20)?;
    for s in &samples {
        report.check(
            format!("k={} pair-and-witness", s.k),
            s.first_is_input && s.witness_valid,
        );
    }
    Ok(report)
}

fn repro_tree(seed: Option<u64>) -> Result<Report, CliError> {
    let mut report = Report::new();
    let seed = seed.unwrap_or(20_260_810);
    report.line("seed", seed);
    // Pinned facts before the randomized replay.
    let s0 = initial_tree_state();
    let init_ok = s0.scope == 1
        && tree_table_at(&s0.node, 1)? == 1
        && tree_table_at(&s0.leaf, 1)? == 1
        && tree_table_at(&s0.node, 2)? == 3
        && tree_table_at(&s0.father, 5)? == 1;
    report.check("initial state tables", init_ok);
    let mut s = s0;
    s.operand = 1;
    let after = tree_del(&s)?;
    report.check(
        "del on root is a no-op",
        after.scope == 1 && tree_table_at(&after.node, 1)? == 1,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0usize;
    let mut ok = true;
    for _ in 0..100 {
        let script = random_script(&mut rng, 30);
        steps += script.len();
        ok &= replay_script(&mut rng, &script)?.is_ok();
    }
    report.line("scripts", 100);
    report.line("steps", steps);
    report.check("replay matches mutable-tree oracle", ok);
    Ok(report)
}

fn repro_bounded_search() -> Result<Report, CliError> {
    let mut report = Report::new();
    let en = toy_enumeration();
    let eq = toy_type_eq();
    let eq_holds = |a: &Value, b: &Value| a == b;
    let mut cases = 0usize;
    let mut ok = true;
    for n in 1..=50u64 {
        let mut targets = vec![1, n / 2 + 1, n, n + 3];
        targets.dedup();
        for t in targets {
            let target = Value::Type(ind1(t));
            let got = bounded_search_g(&en, &eq, &target, n)?;
            let expect = linear_scan_oracle(&en, &eq_holds, &target, n)?;
            ok &= got == expect;
            cases += 1;
        }
    }
    report.line("cases", cases);
    report.check("search agrees with linear scan (failure reports 1)", ok);
    Ok(report)
}

fn repro_eq_functionals(bound: Option<u64>) -> Result<Report, CliError> {
    let mut report = Report::new();
    let bound = bound.unwrap_or(8);
    report.line("bound", bound);
    let rel = eq_functionals(&TypeExpr::Nat)?;
    let succ = OpValue::prim(PrimitiveKind::Succ);
    let double = iter_op(2, &succ)?;
    report.check(
        "eq(f,f) inhabited",
        eq_functionals_decide(&rel, &succ, &succ, bound)?.is_inhabited(),
    );
    report.check(
        "eq(succ, succ.succ) empty",
        eq_functionals_decide(&rel, &succ, &double, 1)?.is_empty(),
    );
    // Composing with the successor moves every sampled point.
    let mut ok = true;
    for a in 1..=bound {
        let shifted = evaluate_op_value(&double, vec![Value::Nat(a)])?;
        let plain = evaluate_op_value(&succ, vec![Value::Nat(a)])?;
        ok &= shifted[0] != plain[0];
    }
    report.check("compose(f, succ) differs pointwise", ok);
    Ok(report)
}
