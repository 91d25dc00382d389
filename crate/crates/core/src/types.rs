//! Type expressions, the level hierarchy, and the canonical enumeration of
//! level-0 types.
//!
//! Types are socket descriptions: a wire in a construction graph carries
//! exactly one type, and an operation's interface is an ordered list of typed
//! sockets. Level 0 holds the primitive types (`N`, `C`) and their closure
//! under product, sum and arrow; `Types(k)` is the type of all types at level
//! `k`, so type-valued wires are possible from level 1 up.

use crate::rel::{RelArg, RelKind};
use crate::value::OpValue;
use std::cell::RefCell;
use std::fmt;
use thiserror::Error;

/// A type expression.
///
/// `RelAtom` is a relational type over naturals; its argument slots are
/// either both filled (a concrete, decidable type) or carry hole markers (a
/// parameterized relational type, usable as a socket pattern). `Pi` and
/// `Sigma` are dependent types over an operation-valued family whose output
/// is some `Types(k)`. `Excl` is the mutually-exclusive output type produced
/// by branching primitives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Nat,
    Continuum,
    Product(Box<TypeExpr>, Box<TypeExpr>),
    Sum(Box<TypeExpr>, Box<TypeExpr>),
    /// Operation type with ordered input and output socket lists. Both lists
    /// are non-empty.
    Arrow(Vec<TypeExpr>, Vec<TypeExpr>),
    /// The type of all types at level `n`.
    Types(u32),
    RelAtom {
        kind: RelKind,
        lhs: RelArg,
        rhs: RelArg,
    },
    Pi(Box<OpValue>),
    Sigma(Box<OpValue>),
    Excl(Box<TypeExpr>, Box<TypeExpr>),
}

/// The least level of the hierarchy at which a type expression lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("destructor requires a level-0 type, got `{0}` at level {1}")]
    DesOnHigherLevel(String, u32),
    #[error("type `{0}` is not in the level-0 enumeration")]
    NotEnumerable(String),
    #[error("enumeration index does not fit in 64 bits")]
    EnumerationOverflow,
}

impl TypeExpr {
    pub fn product(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn sum(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn excl(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Excl(Box::new(a), Box::new(b))
    }

    /// Binary arrow `a -> b`.
    pub fn arrow1(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(vec![a], vec![b])
    }

    pub fn atom(kind: RelKind, lhs: RelArg, rhs: RelArg) -> TypeExpr {
        TypeExpr::RelAtom { kind, lhs, rhs }
    }

    /// Fully-parameterized atom socket pattern, e.g. the output of a
    /// relational-atom node before its arguments are known.
    pub fn atom_pattern(kind: RelKind) -> TypeExpr {
        TypeExpr::RelAtom {
            kind,
            lhs: RelArg::Hole(0),
            rhs: RelArg::Hole(1),
        }
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, TypeExpr::Arrow(_, _))
    }

    /// Number of constructor applications (`Product`/`Sum`/`Arrow` nodes)
    /// in a level-0 expression. Leaves have weight 0.
    pub fn weight(&self) -> Option<usize> {
        match self {
            TypeExpr::Nat | TypeExpr::Continuum => Some(0),
            TypeExpr::Product(a, b) | TypeExpr::Sum(a, b) => Some(1 + a.weight()? + b.weight()?),
            TypeExpr::Arrow(ins, outs) if ins.len() == 1 && outs.len() == 1 => {
                Some(1 + ins[0].weight()? + outs[0].weight()?)
            }
            _ => None,
        }
    }
}

/// Structural equality on type expressions. Copy annotations from informal
/// presentations do not exist in the data model, so two types are equal
/// exactly when their trees are equal; `Pi`/`Sigma` compare their family
/// operations structurally, node identities included.
pub fn type_equal(a: &TypeExpr, b: &TypeExpr) -> bool {
    a == b
}

/// The least level at which `t` is a type.
pub fn level_of(t: &TypeExpr) -> Level {
    match t {
        TypeExpr::Nat | TypeExpr::Continuum => Level(0),
        TypeExpr::Product(a, b) | TypeExpr::Sum(a, b) | TypeExpr::Excl(a, b) => {
            Level(level_of(a).0.max(level_of(b).0))
        }
        TypeExpr::Arrow(ins, outs) => Level(
            ins.iter()
                .chain(outs.iter())
                .map(|t| level_of(t).0)
                .max()
                .unwrap_or(0),
        ),
        TypeExpr::Types(n) => Level(n + 1),
        TypeExpr::RelAtom { .. } => Level(1),
        TypeExpr::Pi(family) | TypeExpr::Sigma(family) => {
            // A family into Types(k) inhabits Types(k), so the dependent
            // type sits at level k + 1.
            match family.sig().outputs.sockets().first() {
                Some(TypeExpr::Types(k)) => Level(k + 1),
                Some(other) => level_of(other),
                None => Level(1),
            }
        }
    }
}

/// Right-nested product of a non-empty socket list; a single socket folds to
/// itself.
pub fn fold_sockets(list: &[TypeExpr]) -> TypeExpr {
    assert!(!list.is_empty(), "socket list must be non-empty");
    let mut it = list.iter().rev();
    let mut acc = it.next().unwrap().clone();
    for t in it {
        acc = TypeExpr::product(t.clone(), acc);
    }
    acc
}

/// Constructor kind for [`level1_constructor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CtorKind {
    Product,
    Sum,
    Arrow,
}

/// The level-1 view of the type constructors: given two types as objects,
/// build the composite type. The generic versions accept any level.
pub fn level1_constructor(kind: CtorKind, a: TypeExpr, b: TypeExpr) -> TypeExpr {
    match kind {
        CtorKind::Product => TypeExpr::product(a, b),
        CtorKind::Sum => TypeExpr::sum(a, b),
        CtorKind::Arrow => TypeExpr::arrow1(a, b),
    }
}

/// The common destructor for level-0 types. A primitive returns two copies
/// of itself; a composite returns its two components. A multi-input (or
/// multi-output) arrow folds the socket list into a right-nested product
/// before splitting.
pub fn des(t: &TypeExpr) -> Result<(TypeExpr, TypeExpr), TypeError> {
    let lvl = level_of(t);
    if lvl.0 != 0 {
        return Err(TypeError::DesOnHigherLevel(t.to_string(), lvl.0));
    }
    Ok(match t {
        TypeExpr::Nat | TypeExpr::Continuum => (t.clone(), t.clone()),
        TypeExpr::Product(a, b) | TypeExpr::Sum(a, b) | TypeExpr::Excl(a, b) => {
            ((**a).clone(), (**b).clone())
        }
        TypeExpr::Arrow(ins, outs) => (fold_sockets(ins), fold_sockets(outs)),
        _ => unreachable!("level-0 types are covered above"),
    })
}

/// Whether a value of type `src` may flow into a socket of type `dst`.
/// This is structural equality, extended by `Types` cumulativity (level
/// `n + 1` extends level `n`) and by hole wildcards on relational atoms:
/// a parameterized socket accepts any instantiation, and a parameterized
/// producer is accepted statically and validated at runtime.
pub fn socket_compatible(src: &TypeExpr, dst: &TypeExpr) -> bool {
    if src == dst {
        return true;
    }
    match (src, dst) {
        (TypeExpr::Types(j), TypeExpr::Types(k)) => j <= k,
        (
            TypeExpr::RelAtom {
                kind: k1,
                lhs: l1,
                rhs: r1,
            },
            TypeExpr::RelAtom {
                kind: k2,
                lhs: l2,
                rhs: r2,
            },
        ) => k1 == k2 && arg_compatible(l1, l2) && arg_compatible(r1, r2),
        (TypeExpr::Product(a, b), TypeExpr::Product(c, d))
        | (TypeExpr::Sum(a, b), TypeExpr::Sum(c, d))
        | (TypeExpr::Excl(a, b), TypeExpr::Excl(c, d)) => {
            socket_compatible(a, c) && socket_compatible(b, d)
        }
        (TypeExpr::Arrow(i1, o1), TypeExpr::Arrow(i2, o2)) => {
            i1.len() == i2.len()
                && o1.len() == o2.len()
                && i1.iter().zip(i2).all(|(a, b)| socket_compatible(a, b))
                && o1.iter().zip(o2).all(|(a, b)| socket_compatible(a, b))
        }
        _ => false,
    }
}

fn arg_compatible(a: &RelArg, b: &RelArg) -> bool {
    matches!(
        (a, b),
        (RelArg::Hole(_), _) | (_, RelArg::Hole(_))
    ) || a == b
}

/// Streaming enumerator behind [`ind1`]: level-0 types ordered by total
/// constructor count, then lexicographically on (constructor, left, right)
/// with `Product < Sum < Arrow`.
pub struct TypeEnumerator {
    levels: Vec<Vec<TypeExpr>>,
    counts: Vec<u128>,
}

const CTORS: [CtorKind; 3] = [CtorKind::Product, CtorKind::Sum, CtorKind::Arrow];

impl TypeEnumerator {
    pub fn new() -> Self {
        TypeEnumerator {
            levels: vec![vec![TypeExpr::Nat, TypeExpr::Continuum]],
            counts: vec![2],
        }
    }

    fn ensure_counts(&mut self, w: usize) {
        while self.counts.len() <= w {
            let k = self.counts.len();
            let mut pairs: u128 = 0;
            for lw in 0..k {
                pairs += self.counts[lw] * self.counts[k - 1 - lw];
            }
            self.counts.push(3 * pairs);
        }
    }

    /// Number of level-0 types with exactly `w` constructors.
    pub fn count_at(&mut self, w: usize) -> u128 {
        self.ensure_counts(w);
        self.counts[w]
    }

    fn ensure_level(&mut self, w: usize) {
        while self.levels.len() <= w {
            let k = self.levels.len();
            let mut level = Vec::new();
            for ctor in CTORS {
                for lw in 0..k {
                    let rw = k - 1 - lw;
                    for li in 0..self.levels[lw].len() {
                        for ri in 0..self.levels[rw].len() {
                            let l = self.levels[lw][li].clone();
                            let r = self.levels[rw][ri].clone();
                            level.push(level1_constructor(ctor, l, r));
                        }
                    }
                }
            }
            self.levels.push(level);
        }
    }

    /// The `n`-th type of the enumeration, 1-based.
    pub fn get(&mut self, n: u64) -> TypeExpr {
        assert!(n >= 1, "enumeration indices start at 1");
        let mut rest = (n - 1) as u128;
        let mut w = 0;
        loop {
            let c = self.count_at(w);
            if rest < c {
                break;
            }
            rest -= c;
            w += 1;
        }
        self.ensure_level(w);
        self.levels[w][rest as usize].clone()
    }

    /// Rank of `t` within its own weight class.
    fn rank(&mut self, t: &TypeExpr, w: usize) -> Result<u128, TypeError> {
        if w == 0 {
            return Ok(match t {
                TypeExpr::Nat => 0,
                TypeExpr::Continuum => 1,
                _ => unreachable!(),
            });
        }
        let (ctor, l, r) = match t {
            TypeExpr::Product(a, b) => (0u128, &**a, &**b),
            TypeExpr::Sum(a, b) => (1, &**a, &**b),
            TypeExpr::Arrow(ins, outs) => (2, &ins[0], &outs[0]),
            _ => unreachable!(),
        };
        let lw = l.weight().unwrap();
        let rw = w - 1 - lw;
        self.ensure_counts(w);
        let mut pairs: u128 = 0;
        for a in 0..w {
            pairs += self.counts[a] * self.counts[w - 1 - a];
        }
        let mut rank = ctor * pairs;
        for a in 0..lw {
            rank += self.counts[a] * self.counts[w - 1 - a];
        }
        rank += self.rank(l, lw)? * self.counts[rw];
        rank += self.rank(r, rw)?;
        Ok(rank)
    }

    /// Inverse of [`TypeEnumerator::get`]: the 1-based index of a level-0
    /// type built from `N`, `C` by binary product, sum and arrow.
    pub fn index_of(&mut self, t: &TypeExpr) -> Result<u64, TypeError> {
        let w = t
            .weight()
            .ok_or_else(|| TypeError::NotEnumerable(t.to_string()))?;
        self.ensure_counts(w);
        let mut idx: u128 = 1;
        for a in 0..w {
            idx += self.counts[a];
        }
        idx += self.rank(t, w)?;
        u64::try_from(idx).map_err(|_| TypeError::EnumerationOverflow)
    }
}

impl Default for TypeEnumerator {
    fn default() -> Self {
        Self::new()
    }
}

thread_local! {
    static SHARED_ENUM: RefCell<TypeEnumerator> = RefCell::new(TypeEnumerator::new());
}

/// The fixed total enumeration of level-0 types, 1-based. `ind1(1)` is `N`
/// and `ind1(2)` is `C`.
pub fn ind1(n: u64) -> TypeExpr {
    SHARED_ENUM.with(|e| e.borrow_mut().get(n))
}

/// Inverse of [`ind1`].
pub fn type_index(t: &TypeExpr) -> Result<u64, TypeError> {
    SHARED_ENUM.with(|e| e.borrow_mut().index_of(t))
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Nat => write!(f, "N"),
            TypeExpr::Continuum => write!(f, "C"),
            TypeExpr::Product(a, b) => write!(f, "({a} x {b})"),
            TypeExpr::Sum(a, b) => write!(f, "({a} + {b})"),
            TypeExpr::Excl(a, b) => write!(f, "({a} || {b})"),
            TypeExpr::Arrow(ins, outs) => {
                write!(f, "(")?;
                for (i, t) in ins.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, " -> ")?;
                for (i, t) in outs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            TypeExpr::Types(n) => write!(f, "Types{n}"),
            TypeExpr::RelAtom { kind, lhs, rhs } => write!(f, "{}({lhs};{rhs})", kind.keyword()),
            TypeExpr::Pi(fam) => write!(f, "pi[{}]", fam.sig().as_arrow()),
            TypeExpr::Sigma(fam) => write!(f, "sigma[{}]", fam.sig().as_arrow()),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
