//! Relational types over naturals and their algebra.
//!
//! A relational type is inhabited exactly when the relation holds;
//! inhabitation is truth. The three elementary relations are decided by the
//! dual-channel decrement loop ([`procedure_n`]), and every decision produces
//! a witness recording its derivation. Negation is grounded in complements:
//! each relational type is negated by a structural transform into the
//! complementary positive form, never by an opaque "empty type" marker.

use crate::eval::{evaluate_op_value, EvalError};
use crate::types::TypeExpr;
use crate::value::{OpValue, Value};
use std::fmt;
use thiserror::Error;

/// Kind of an elementary relational atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelKind {
    Equal,
    Lesser,
    Greater,
}

impl RelKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            RelKind::Equal => "eq",
            RelKind::Lesser => "lt",
            RelKind::Greater => "gt",
        }
    }

    /// The two complementary kinds.
    pub fn complements(&self) -> (RelKind, RelKind) {
        match self {
            RelKind::Equal => (RelKind::Greater, RelKind::Lesser),
            RelKind::Greater => (RelKind::Equal, RelKind::Lesser),
            RelKind::Lesser => (RelKind::Equal, RelKind::Greater),
        }
    }

    pub fn holds(&self, n: u64, k: u64) -> bool {
        match self {
            RelKind::Equal => n == k,
            RelKind::Lesser => n < k,
            RelKind::Greater => n > k,
        }
    }
}

/// An atom argument slot: a concrete natural or a hole marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelArg {
    Nat(u64),
    Hole(u32),
}

impl fmt::Display for RelArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelArg::Nat(n) => write!(f, "{n}"),
            RelArg::Hole(h) => write!(f, "_{}", h + 1),
        }
    }
}

/// A relational type: an atom, or a composite built by conjunction,
/// disjunction, negation, or quantification over the naturals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelationalType {
    Atom {
        kind: RelKind,
        lhs: RelArg,
        rhs: RelArg,
    },
    Conj(Box<RelationalType>, Box<RelationalType>),
    Disj(Box<RelationalType>, Box<RelationalType>),
    Neg(Box<RelationalType>),
    Pi(RelFamily),
    Sigma(RelFamily),
}

/// A family of relational types indexed by a natural, as used under a
/// quantifier. `Symbolic` families substitute into a body with one bound
/// hole; `Op` families evaluate an operation `N -> Types` at the index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelFamily {
    Symbolic {
        hole: u32,
        body: Box<RelationalType>,
    },
    Op(OpValue),
    Negated(Box<RelFamily>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelError {
    #[error("type `{0}` is not in the relational grammar")]
    NonRelational(String),
    #[error("relational pattern has free hole _{0} that is not an input")]
    FreeHole(u32),
    #[error("hole _{0} is declared but never used; a linear condition graph cannot discard it")]
    UnusedHole(u32),
    #[error("family evaluation failed: {0}")]
    FamilyEval(String),
}

pub fn atom(kind: RelKind, n: u64, k: u64) -> RelationalType {
    RelationalType::Atom {
        kind,
        lhs: RelArg::Nat(n),
        rhs: RelArg::Nat(k),
    }
}

pub fn atom_args(kind: RelKind, lhs: RelArg, rhs: RelArg) -> RelationalType {
    RelationalType::Atom { kind, lhs, rhs }
}

pub fn conj(a: RelationalType, b: RelationalType) -> RelationalType {
    RelationalType::Conj(Box::new(a), Box::new(b))
}

pub fn disj(a: RelationalType, b: RelationalType) -> RelationalType {
    RelationalType::Disj(Box::new(a), Box::new(b))
}

pub fn neg(a: RelationalType) -> RelationalType {
    RelationalType::Neg(Box::new(a))
}

impl RelationalType {
    /// True when no hole marker occurs free.
    pub fn is_ground(&self) -> bool {
        self.free_holes().is_empty()
    }

    pub fn free_holes(&self) -> Vec<u32> {
        let mut holes = Vec::new();
        self.collect_holes(&mut holes, &mut Vec::new());
        holes.sort_unstable();
        holes.dedup();
        holes
    }

    fn collect_holes(&self, out: &mut Vec<u32>, bound: &mut Vec<u32>) {
        match self {
            RelationalType::Atom { lhs, rhs, .. } => {
                for arg in [lhs, rhs] {
                    if let RelArg::Hole(h) = arg {
                        if !bound.contains(h) {
                            out.push(*h);
                        }
                    }
                }
            }
            RelationalType::Conj(a, b) | RelationalType::Disj(a, b) => {
                a.collect_holes(out, bound);
                b.collect_holes(out, bound);
            }
            RelationalType::Neg(a) => a.collect_holes(out, bound),
            RelationalType::Pi(f) | RelationalType::Sigma(f) => f.collect_holes(out, bound),
        }
    }

    /// Substitute `value` for every free occurrence of `hole`.
    pub fn substitute(&self, hole: u32, value: u64) -> RelationalType {
        match self {
            RelationalType::Atom { kind, lhs, rhs } => {
                let fill = |arg: &RelArg| match arg {
                    RelArg::Hole(h) if *h == hole => RelArg::Nat(value),
                    other => *other,
                };
                RelationalType::Atom {
                    kind: *kind,
                    lhs: fill(lhs),
                    rhs: fill(rhs),
                }
            }
            RelationalType::Conj(a, b) => conj(a.substitute(hole, value), b.substitute(hole, value)),
            RelationalType::Disj(a, b) => disj(a.substitute(hole, value), b.substitute(hole, value)),
            RelationalType::Neg(a) => neg(a.substitute(hole, value)),
            RelationalType::Pi(f) => RelationalType::Pi(f.substitute(hole, value)),
            RelationalType::Sigma(f) => RelationalType::Sigma(f.substitute(hole, value)),
        }
    }
}

impl RelFamily {
    pub fn symbolic(hole: u32, body: RelationalType) -> RelFamily {
        RelFamily::Symbolic {
            hole,
            body: Box::new(body),
        }
    }

    fn collect_holes(&self, out: &mut Vec<u32>, bound: &mut Vec<u32>) {
        match self {
            RelFamily::Symbolic { hole, body } => {
                bound.push(*hole);
                body.collect_holes(out, bound);
                bound.pop();
            }
            RelFamily::Op(_) => {}
            RelFamily::Negated(f) => f.collect_holes(out, bound),
        }
    }

    fn substitute(&self, hole: u32, value: u64) -> RelFamily {
        match self {
            RelFamily::Symbolic { hole: h, body } if *h != hole => RelFamily::Symbolic {
                hole: *h,
                body: Box::new(body.substitute(hole, value)),
            },
            other => other.clone(),
        }
    }

    /// Negated view of the family, pushed inside where possible.
    pub fn negated(&self) -> RelFamily {
        match self {
            RelFamily::Symbolic { hole, body } => RelFamily::Symbolic {
                hole: *hole,
                body: Box::new(negate(body)),
            },
            RelFamily::Negated(inner) => (**inner).clone(),
            op @ RelFamily::Op(_) => RelFamily::Negated(Box::new(op.clone())),
        }
    }

    /// Instantiate the family at index `n`.
    pub fn at(&self, n: u64) -> Result<RelationalType, RelError> {
        match self {
            RelFamily::Symbolic { hole, body } => Ok(body.substitute(*hole, n)),
            RelFamily::Op(op) => {
                let outs = evaluate_op_value(op, vec![Value::Nat(n)])
                    .map_err(|e| RelError::FamilyEval(e.to_string()))?;
                match outs.into_iter().next() {
                    Some(Value::Type(t)) => type_expr_to_rel(&t),
                    other => Err(RelError::FamilyEval(format!(
                        "family produced a non-type output: {other:?}"
                    ))),
                }
            }
            RelFamily::Negated(f) => Ok(negate(&f.at(n)?)),
        }
    }
}

/// Remove every negation by pushing it to the atoms.
pub fn normalize(t: &RelationalType) -> RelationalType {
    match t {
        RelationalType::Atom { .. } => t.clone(),
        RelationalType::Conj(a, b) => conj(normalize(a), normalize(b)),
        RelationalType::Disj(a, b) => disj(normalize(a), normalize(b)),
        RelationalType::Neg(a) => negate(a),
        RelationalType::Pi(f) => RelationalType::Pi(normalize_family(f)),
        RelationalType::Sigma(f) => RelationalType::Sigma(normalize_family(f)),
    }
}

fn normalize_family(f: &RelFamily) -> RelFamily {
    match f {
        RelFamily::Symbolic { hole, body } => RelFamily::Symbolic {
            hole: *hole,
            body: Box::new(normalize(body)),
        },
        other => other.clone(),
    }
}

/// Structural negation. Each atom maps to the disjunction of its two
/// complements, De Morgan distributes over conjunction and disjunction,
/// quantifiers dualize, and double negation collapses.
pub fn negate(t: &RelationalType) -> RelationalType {
    match t {
        RelationalType::Atom { kind, lhs, rhs } => {
            let (c1, c2) = kind.complements();
            disj(atom_args(c1, *lhs, *rhs), atom_args(c2, *lhs, *rhs))
        }
        RelationalType::Conj(a, b) => disj(negate(a), negate(b)),
        RelationalType::Disj(a, b) => conj(negate(a), negate(b)),
        RelationalType::Neg(a) => normalize(a),
        RelationalType::Pi(f) => RelationalType::Sigma(f.negated()),
        RelationalType::Sigma(f) => RelationalType::Pi(f.negated()),
    }
}

/// Pointwise logical equivalence of two relations:
/// `(not R1 + R2) x (not R2 + R1)`.
pub fn equiv_build(r1: &RelationalType, r2: &RelationalType) -> RelationalType {
    conj(
        disj(negate(r1), r2.clone()),
        disj(negate(r2), r1.clone()),
    )
}

/// The law of excluded middle over a relation: `R + not R`.
pub fn lem_build(r: &RelationalType) -> RelationalType {
    disj(r.clone(), negate(r))
}

/// Outcome of the dual-channel comparison procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trichotomy {
    pub outcome: RelKind,
    pub witness: Witness,
}

/// Decide the elementary relation between `n` and `k` by the dual-channel
/// decrement loop: both channels lose one unit signal per round until at
/// least one is empty. The witness records the number of rounds.
pub fn procedure_n(n: u64, k: u64) -> Trichotomy {
    let mut a = n;
    let mut b = k;
    let mut rounds = 0u64;
    let outcome = loop {
        match (a, b) {
            (0, 0) => break RelKind::Equal,
            (_, 0) => break RelKind::Greater,
            (0, _) => break RelKind::Lesser,
            _ => {
                a -= 1;
                b -= 1;
                rounds += 1;
            }
        }
    };
    Trichotomy {
        outcome,
        witness: Witness {
            of: atom(outcome, n, k),
            derivation: Derivation::Comparison { n, k, rounds },
        },
    }
}

/// A derivation-carrying object of a relational type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub of: RelationalType,
    pub derivation: Derivation,
}

/// How a witness was obtained: an axiom leaf, a comparison run, or a
/// composite step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Derivation {
    Axiom { axiom: Axiom, args: Vec<u64> },
    Comparison { n: u64, k: u64, rounds: u64 },
    Both(Box<Witness>, Box<Witness>),
    First(Box<Witness>),
    Second(Box<Witness>),
    /// Tabulated function for a bounded universal quantifier; entry `i`
    /// witnesses the family at index `i + 1`.
    Table(Vec<Witness>),
    Chosen { index: u64, witness: Box<Witness> },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.derivation {
            Derivation::Axiom { axiom, args } => {
                write!(f, "axiom {}(", axiom.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Derivation::Comparison { n, k, rounds } => write!(f, "compare({n};{k})@{rounds}"),
            Derivation::Both(a, b) => write!(f, "both({a}, {b})"),
            Derivation::First(w) => write!(f, "first({w})"),
            Derivation::Second(w) => write!(f, "second({w})"),
            Derivation::Table(ws) => write!(f, "table[{}]", ws.len()),
            Derivation::Chosen { index, witness } => write!(f, "chosen({index}, {witness})"),
        }
    }
}

/// The primitive objects introduced for the inhabited types describing the
/// comparison procedure. Each name, instantiated at concrete arguments,
/// yields the relational type it witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Completeness,
    DisjointEqualGreater,
    DisjointEqualLesser,
    DisjointLesserGreater,
    EqualRefl,
    EqualSym,
    EqualTrans,
    PredSucc,
    SuccEqualCongruence,
    SuccGreaterCongruence,
    PredGreaterCongruence,
    SuccGreater,
    SuccGreaterPredSucc,
    GreaterLesserSwap,
    GreaterTrans,
    LesserTrans,
    GreaterAntisym,
    SubstGreater,
    SubstLesser,
}

pub const ALL_AXIOMS: [Axiom; 19] = [
    Axiom::Completeness,
    Axiom::DisjointEqualGreater,
    Axiom::DisjointEqualLesser,
    Axiom::DisjointLesserGreater,
    Axiom::EqualRefl,
    Axiom::EqualSym,
    Axiom::EqualTrans,
    Axiom::PredSucc,
    Axiom::SuccEqualCongruence,
    Axiom::SuccGreaterCongruence,
    Axiom::PredGreaterCongruence,
    Axiom::SuccGreater,
    Axiom::SuccGreaterPredSucc,
    Axiom::GreaterLesserSwap,
    Axiom::GreaterTrans,
    Axiom::LesserTrans,
    Axiom::GreaterAntisym,
    Axiom::SubstGreater,
    Axiom::SubstLesser,
];

fn succ(n: u64) -> u64 {
    n + 1
}

/// Predecessor saturates at 1; the empty channel is a machine state inside
/// the comparison procedure, not a value.
pub fn pred(n: u64) -> u64 {
    if n <= 1 {
        1
    } else {
        n - 1
    }
}

impl Axiom {
    pub fn arity(&self) -> usize {
        use Axiom::*;
        match self {
            EqualRefl | PredSucc | SuccGreater | SuccGreaterPredSucc => 1,
            EqualTrans | GreaterTrans | LesserTrans | SubstGreater | SubstLesser => 3,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        use Axiom::*;
        match self {
            Completeness => "completeness",
            DisjointEqualGreater => "disjoint_equal_greater",
            DisjointEqualLesser => "disjoint_equal_lesser",
            DisjointLesserGreater => "disjoint_lesser_greater",
            EqualRefl => "equal_refl",
            EqualSym => "equal_sym",
            EqualTrans => "equal_trans",
            PredSucc => "pred_succ",
            SuccEqualCongruence => "succ_equal_congruence",
            SuccGreaterCongruence => "succ_greater_congruence",
            PredGreaterCongruence => "pred_greater_congruence",
            SuccGreater => "succ_greater",
            SuccGreaterPredSucc => "succ_greater_pred_succ",
            GreaterLesserSwap => "greater_lesser_swap",
            GreaterTrans => "greater_trans",
            LesserTrans => "lesser_trans",
            GreaterAntisym => "greater_antisym",
            SubstGreater => "subst_greater",
            SubstLesser => "subst_lesser",
        }
    }

    pub fn from_name(s: &str) -> Option<Axiom> {
        ALL_AXIOMS.iter().copied().find(|a| a.name() == s)
    }

    /// The relational type this axiom witnesses at the given arguments, in
    /// positive form. Implications appear as `not A + B`.
    pub fn schema(&self, args: &[u64]) -> Option<RelationalType> {
        use RelKind::*;
        if args.len() != self.arity() {
            return None;
        }
        let implies = |a: RelationalType, b: RelationalType| disj(negate(&a), b);
        Some(match self {
            Axiom::Completeness => {
                let (n, k) = (args[0], args[1]);
                disj(disj(atom(Equal, n, k), atom(Greater, n, k)), atom(Lesser, n, k))
            }
            Axiom::DisjointEqualGreater => {
                let (n, k) = (args[0], args[1]);
                negate(&conj(atom(Equal, n, k), atom(Greater, n, k)))
            }
            Axiom::DisjointEqualLesser => {
                let (n, k) = (args[0], args[1]);
                negate(&conj(atom(Equal, n, k), atom(Lesser, n, k)))
            }
            Axiom::DisjointLesserGreater => {
                let (n, k) = (args[0], args[1]);
                negate(&conj(atom(Lesser, n, k), atom(Greater, n, k)))
            }
            Axiom::EqualRefl => atom(Equal, args[0], args[0]),
            Axiom::EqualSym => {
                let (n, k) = (args[0], args[1]);
                implies(atom(Equal, n, k), atom(Equal, k, n))
            }
            Axiom::EqualTrans => {
                let (n, k, m) = (args[0], args[1], args[2]);
                implies(
                    conj(atom(Equal, n, k), atom(Equal, k, m)),
                    atom(Equal, n, m),
                )
            }
            Axiom::PredSucc => atom(Equal, args[0], pred(succ(args[0]))),
            Axiom::SuccEqualCongruence => {
                let (n, k) = (args[0], args[1]);
                equiv_build(&atom(Equal, n, k), &atom(Equal, succ(n), succ(k)))
            }
            Axiom::SuccGreaterCongruence => {
                let (n, k) = (args[0], args[1]);
                equiv_build(&atom(Greater, n, k), &atom(Greater, succ(n), succ(k)))
            }
            Axiom::PredGreaterCongruence => {
                let (n, k) = (args[0], args[1]);
                equiv_build(
                    &atom(Greater, succ(n), succ(k)),
                    &atom(Greater, pred(succ(n)), pred(succ(k))),
                )
            }
            Axiom::SuccGreater => atom(Greater, succ(args[0]), args[0]),
            Axiom::SuccGreaterPredSucc => atom(Greater, succ(args[0]), pred(succ(args[0]))),
            Axiom::GreaterLesserSwap => {
                let (n, k) = (args[0], args[1]);
                equiv_build(&atom(Greater, n, k), &atom(Lesser, k, n))
            }
            Axiom::GreaterTrans => {
                let (n, k, m) = (args[0], args[1], args[2]);
                implies(
                    conj(atom(Greater, n, k), atom(Greater, k, m)),
                    atom(Greater, n, m),
                )
            }
            Axiom::LesserTrans => {
                let (n, k, m) = (args[0], args[1], args[2]);
                implies(
                    conj(atom(Lesser, n, k), atom(Lesser, k, m)),
                    atom(Lesser, n, m),
                )
            }
            Axiom::GreaterAntisym => {
                let (n, k) = (args[0], args[1]);
                negate(&conj(atom(Greater, n, k), atom(Greater, k, n)))
            }
            Axiom::SubstGreater => {
                let (n, m, k) = (args[0], args[1], args[2]);
                implies(
                    conj(atom(Equal, n, m), atom(Greater, n, k)),
                    atom(Greater, m, k),
                )
            }
            Axiom::SubstLesser => {
                let (n, m, k) = (args[0], args[1], args[2]);
                implies(
                    conj(atom(Equal, n, m), atom(Lesser, n, k)),
                    atom(Lesser, m, k),
                )
            }
        })
    }

    pub fn witness(&self, args: &[u64]) -> Option<Witness> {
        Some(Witness {
            of: self.schema(args)?,
            derivation: Derivation::Axiom {
                axiom: *self,
                args: args.to_vec(),
            },
        })
    }
}

/// Result of deciding a relational type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelEval {
    Inhabited(Witness),
    Empty,
    Undecidable,
}

impl RelEval {
    pub fn is_inhabited(&self) -> bool {
        matches!(self, RelEval::Inhabited(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, RelEval::Empty)
    }
}

/// Decide a fully-instantiated relational type. Atoms run the comparison
/// procedure; a disjunction is true as soon as one component is verified and
/// a conjunction is false as soon as one component fails. Quantifiers over
/// the naturals are decided only under an explicit `bound`, reinterpreting
/// the domain as `1..=bound`; without a bound they are undecidable.
pub fn eval_relational(t: &RelationalType, bound: Option<u64>) -> RelEval {
    match t {
        RelationalType::Atom {
            kind,
            lhs: RelArg::Nat(n),
            rhs: RelArg::Nat(k),
        } => {
            let tri = procedure_n(*n, *k);
            if tri.outcome == *kind {
                RelEval::Inhabited(tri.witness)
            } else {
                RelEval::Empty
            }
        }
        RelationalType::Atom { .. } => RelEval::Undecidable,
        RelationalType::Conj(a, b) => match eval_relational(a, bound) {
            RelEval::Empty => RelEval::Empty,
            ra => match (ra, eval_relational(b, bound)) {
                (_, RelEval::Empty) => RelEval::Empty,
                (RelEval::Inhabited(wa), RelEval::Inhabited(wb)) => RelEval::Inhabited(Witness {
                    of: t.clone(),
                    derivation: Derivation::Both(Box::new(wa), Box::new(wb)),
                }),
                _ => RelEval::Undecidable,
            },
        },
        RelationalType::Disj(a, b) => match eval_relational(a, bound) {
            RelEval::Inhabited(wa) => RelEval::Inhabited(Witness {
                of: t.clone(),
                derivation: Derivation::First(Box::new(wa)),
            }),
            ra => match (ra, eval_relational(b, bound)) {
                (_, RelEval::Inhabited(wb)) => RelEval::Inhabited(Witness {
                    of: t.clone(),
                    derivation: Derivation::Second(Box::new(wb)),
                }),
                (RelEval::Empty, RelEval::Empty) => RelEval::Empty,
                _ => RelEval::Undecidable,
            },
        },
        RelationalType::Neg(a) => eval_relational(&negate(a), bound),
        RelationalType::Pi(fam) => match bound {
            None => RelEval::Undecidable,
            Some(b) => {
                let mut table = Vec::new();
                for i in 1..=b {
                    let inst = match fam.at(i) {
                        Ok(inst) => inst,
                        Err(_) => return RelEval::Undecidable,
                    };
                    match eval_relational(&inst, bound) {
                        RelEval::Inhabited(w) => table.push(w),
                        RelEval::Empty => return RelEval::Empty,
                        RelEval::Undecidable => return RelEval::Undecidable,
                    }
                }
                RelEval::Inhabited(Witness {
                    of: t.clone(),
                    derivation: Derivation::Table(table),
                })
            }
        },
        RelationalType::Sigma(fam) => match bound {
            None => RelEval::Undecidable,
            Some(b) => {
                for i in 1..=b {
                    let inst = match fam.at(i) {
                        Ok(inst) => inst,
                        Err(_) => return RelEval::Undecidable,
                    };
                    match eval_relational(&inst, bound) {
                        RelEval::Inhabited(w) => {
                            return RelEval::Inhabited(Witness {
                                of: t.clone(),
                                derivation: Derivation::Chosen {
                                    index: i,
                                    witness: Box::new(w),
                                },
                            })
                        }
                        RelEval::Empty => {}
                        RelEval::Undecidable => return RelEval::Undecidable,
                    }
                }
                RelEval::Empty
            }
        },
    }
}

/// Validate a derivation against a relational type. Axiom leaves must match
/// the axiom's schema at the recorded arguments; comparison leaves must
/// replay the decrement loop; composite steps follow the structure of the
/// (normalized) type.
pub fn check_witness(t: &RelationalType, w: &Witness) -> bool {
    let nt = normalize(t);
    match (&nt, &w.derivation) {
        (_, Derivation::Axiom { axiom, args }) => match axiom.schema(args) {
            Some(schema) => normalize(&schema) == nt,
            None => false,
        },
        (
            RelationalType::Atom {
                kind,
                lhs: RelArg::Nat(n),
                rhs: RelArg::Nat(k),
            },
            Derivation::Comparison {
                n: wn,
                k: wk,
                rounds,
            },
        ) => {
            let tri = procedure_n(*n, *k);
            wn == n && wk == k && tri.outcome == *kind && *rounds == (*n).min(*k)
        }
        (RelationalType::Conj(a, b), Derivation::Both(wa, wb)) => {
            check_witness(a, wa) && check_witness(b, wb)
        }
        (RelationalType::Disj(a, _), Derivation::First(wa)) => check_witness(a, wa),
        (RelationalType::Disj(_, b), Derivation::Second(wb)) => check_witness(b, wb),
        (RelationalType::Pi(fam), Derivation::Table(ws)) => {
            !ws.is_empty()
                && ws.iter().enumerate().all(|(i, wi)| {
                    fam.at(i as u64 + 1)
                        .map(|inst| check_witness(&inst, wi))
                        .unwrap_or(false)
                })
        }
        (RelationalType::Sigma(fam), Derivation::Chosen { index, witness }) => {
            *index >= 1
                && fam
                    .at(*index)
                    .map(|inst| check_witness(&inst, witness))
                    .unwrap_or(false)
        }
        _ => false,
    }
}

/// View of a relational type as a type expression: atoms stay atoms,
/// conjunction is product, disjunction is sum, and quantifiers become
/// dependent types over an operation-valued family.
pub fn rel_to_type_expr(t: &RelationalType) -> Result<TypeExpr, RelError> {
    match t {
        RelationalType::Atom { kind, lhs, rhs } => Ok(TypeExpr::RelAtom {
            kind: *kind,
            lhs: *lhs,
            rhs: *rhs,
        }),
        RelationalType::Conj(a, b) => Ok(TypeExpr::product(
            rel_to_type_expr(a)?,
            rel_to_type_expr(b)?,
        )),
        RelationalType::Disj(a, b) => {
            Ok(TypeExpr::sum(rel_to_type_expr(a)?, rel_to_type_expr(b)?))
        }
        RelationalType::Neg(a) => rel_to_type_expr(&negate(a)),
        RelationalType::Pi(fam) => Ok(TypeExpr::Pi(Box::new(family_to_op(fam)?))),
        RelationalType::Sigma(fam) => Ok(TypeExpr::Sigma(Box::new(family_to_op(fam)?))),
    }
}

/// The converse view. Products of relational parts are conjunctions, sums
/// are disjunctions, dependent types over `N` are quantifiers. Anything else
/// has no relational reading.
pub fn type_expr_to_rel(t: &TypeExpr) -> Result<RelationalType, RelError> {
    match t {
        TypeExpr::RelAtom { kind, lhs, rhs } => Ok(RelationalType::Atom {
            kind: *kind,
            lhs: *lhs,
            rhs: *rhs,
        }),
        TypeExpr::Product(a, b) => Ok(conj(type_expr_to_rel(a)?, type_expr_to_rel(b)?)),
        TypeExpr::Sum(a, b) => Ok(disj(type_expr_to_rel(a)?, type_expr_to_rel(b)?)),
        TypeExpr::Pi(fam) => Ok(RelationalType::Pi(RelFamily::Op((**fam).clone()))),
        TypeExpr::Sigma(fam) => Ok(RelationalType::Sigma(RelFamily::Op((**fam).clone()))),
        other => Err(RelError::NonRelational(other.to_string())),
    }
}

/// Build an operation `N -> Types` realizing a quantifier family.
pub fn family_to_op(fam: &RelFamily) -> Result<OpValue, RelError> {
    match fam {
        RelFamily::Op(op) => Ok(op.clone()),
        RelFamily::Symbolic { hole, body } => {
            crate::rel_graphs::condition_graph(body, &[*hole]).map(OpValue::from_graph)
        }
        RelFamily::Negated(inner) => {
            let op = family_to_op(inner)?;
            crate::rel_graphs::negated_condition(&op).map(OpValue::from_graph)
        }
    }
}

impl fmt::Display for RelationalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationalType::Atom { kind, lhs, rhs } => {
                write!(f, "{}({lhs};{rhs})", kind.keyword())
            }
            RelationalType::Conj(a, b) => write!(f, "and({a};{b})"),
            RelationalType::Disj(a, b) => write!(f, "or({a};{b})"),
            RelationalType::Neg(a) => write!(f, "not({a})"),
            RelationalType::Pi(fam) => match fam {
                RelFamily::Symbolic { hole, body } => write!(f, "pi(_{};{body})", hole + 1),
                _ => write!(f, "pi(<op>)"),
            },
            RelationalType::Sigma(fam) => match fam {
                RelFamily::Symbolic { hole, body } => write!(f, "sigma(_{};{body})", hole + 1),
                _ => write!(f, "sigma(<op>)"),
            },
        }
    }
}

/// Convenience: decide a ground, quantifier-free relational type.
pub fn decide(t: &RelationalType) -> Result<bool, EvalError> {
    match eval_relational(t, None) {
        RelEval::Inhabited(_) => Ok(true),
        RelEval::Empty => Ok(false),
        RelEval::Undecidable => Err(EvalError::UndecidableCondition(t.to_string())),
    }
}
