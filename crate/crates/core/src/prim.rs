//! Primitive node kinds: their type parameters, socket signatures, and the
//! constructor/destructor inventory for level 0 plus the level-1 additions
//! (type operations, relational atoms, dependent-type constructors).
//!
//! A primitive's type parameters fully determine its socket boards. Some
//! kinds (`Dispatch`, `Loop`, `ConstVal`, `SigmaWrap`) carry operation values
//! as parameters; these are produced at runtime by the constructor kinds
//! (`Ite`, `While`, `Const`, `SigmaF`) and also accepted directly in graph
//! files.

use crate::rel::{Axiom, RelArg, RelKind};
use crate::types::{fold_sockets, TypeExpr};
use crate::value::{OpValue, Value};

/// An operation signature: ordered input sockets and output sockets, the
/// latter possibly split into two mutually exclusive groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpSig {
    pub inputs: Vec<TypeExpr>,
    pub outputs: OutputSig,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutputSig {
    Plain(Vec<TypeExpr>),
    /// Exactly one of the two groups carries values after evaluation.
    Excl(Vec<TypeExpr>, Vec<TypeExpr>),
}

impl OutputSig {
    /// All output sockets in order, exclusive groups flattened.
    pub fn sockets(&self) -> Vec<TypeExpr> {
        match self {
            OutputSig::Plain(v) => v.clone(),
            OutputSig::Excl(c, d) => c.iter().chain(d.iter()).cloned().collect(),
        }
    }

    pub fn excl_split(&self) -> Option<usize> {
        match self {
            OutputSig::Plain(_) => None,
            OutputSig::Excl(c, _) => Some(c.len()),
        }
    }
}

impl OpSig {
    pub fn plain(inputs: Vec<TypeExpr>, outputs: Vec<TypeExpr>) -> OpSig {
        OpSig {
            inputs,
            outputs: OutputSig::Plain(outputs),
        }
    }

    /// The arrow type labelling a socket that carries this operation. An
    /// exclusive output pair folds into a single `Excl` entry.
    pub fn as_arrow(&self) -> TypeExpr {
        let outs = match &self.outputs {
            OutputSig::Plain(v) => v.clone(),
            OutputSig::Excl(c, d) => vec![TypeExpr::excl(fold_sockets(c), fold_sockets(d))],
        };
        TypeExpr::Arrow(self.inputs.clone(), outs)
    }

    /// Read a signature back off an arrow type. A single `Excl` output
    /// becomes an exclusive pair of socket groups.
    pub fn from_arrow(t: &TypeExpr) -> Option<OpSig> {
        match t {
            TypeExpr::Arrow(ins, outs) => {
                let outputs = match outs.as_slice() {
                    [TypeExpr::Excl(c, d)] => {
                        OutputSig::Excl(vec![(**c).clone()], vec![(**d).clone()])
                    }
                    _ => OutputSig::Plain(outs.clone()),
                };
                Some(OpSig {
                    inputs: ins.clone(),
                    outputs,
                })
            }
            _ => None,
        }
    }
}

/// Socket boards of a single node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSig {
    pub ins: Vec<TypeExpr>,
    pub outs: Vec<TypeExpr>,
    pub excl_split: Option<usize>,
}

impl NodeSig {
    fn plain(ins: Vec<TypeExpr>, outs: Vec<TypeExpr>) -> NodeSig {
        NodeSig {
            ins,
            outs,
            excl_split: None,
        }
    }
}

/// A primitive operation usable as a node kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimitiveKind {
    /// `(A; B) -> A x B`
    Join(TypeExpr, TypeExpr),
    /// `A x B -> (A; B)`
    Proj(TypeExpr, TypeExpr),
    /// `A -> A + B`
    PlusLeft(TypeExpr, TypeExpr),
    /// `B -> A + B`
    PlusRight(TypeExpr, TypeExpr),
    /// `A + B -> (A || B)`; exactly one output fires.
    Get(TypeExpr, TypeExpr),
    /// Rejoin an exclusive pair of socket groups into one group. Exactly one
    /// side is active at runtime.
    Merge(Vec<TypeExpr>),
    /// `A -> (B -> A)`
    Const { a: TypeExpr, b: TypeExpr },
    /// `N -> (N -> N)`, the constant-sequence builder.
    ConstN,
    /// The operation produced by `Const`: consumes its input and emits the
    /// embedded value.
    ConstVal {
        b: TypeExpr,
        out_ty: TypeExpr,
        value: Box<Value>,
    },
    Id(Vec<TypeExpr>),
    Copy(TypeExpr),
    Succ,
    Pred,
    /// Application with an explicit list of which operation inputs this node
    /// supplies. Binding every input evaluates the operation; binding a
    /// subset yields the partially-applied operation.
    Apply { sig: OpSig, provided: Vec<usize> },
    /// Composition joining outputs of `f` to inputs of `g` along `pairing`;
    /// unpaired sockets stay open.
    Compose {
        f: OpSig,
        g: OpSig,
        pairing: Vec<(usize, usize)>,
    },
    /// `(N; (A -> A)) -> (A -> A)`, n-fold self-composition.
    Iter { a: Vec<TypeExpr> },
    /// `(N; A; (N -> A)) -> (N -> A)`, pointwise override of a sequence.
    Change { elem: TypeExpr },
    /// `((B -> Types); (B -> C); (B -> D)) -> (B -> (C || D))`.
    Ite {
        b: Vec<TypeExpr>,
        c: Vec<TypeExpr>,
        d: Vec<TypeExpr>,
    },
    /// `(N; (B -> Types); (B -> B)) -> (B -> (B || B))`, bounded conditional
    /// iteration.
    While { b: Vec<TypeExpr> },
    /// `Pi F -> (A -> Sigma F)` for the family `F : A -> Types`.
    SigmaF { family: OpValue },
    /// Conditional branch: evaluates `cond` on copies of the selected
    /// inputs, then runs exactly one branch on the originals.
    Dispatch {
        cond: OpValue,
        cond_inputs: Vec<usize>,
        then_op: OpValue,
        else_op: OpValue,
    },
    /// Bounded loop: applies `body` while `cond` holds, at most `bound`
    /// times. Left group is active when the bound is exhausted, right group
    /// when the condition failed.
    Loop {
        bound: u64,
        cond: OpValue,
        body: OpValue,
    },
    /// Produces `a; f(a)` of type `Sigma family`, validating the witness.
    SigmaWrap { family: OpValue, f: OpValue },
    /// Elementary relation as an operation `(N; N) -> Types1`.
    RelAtomOp(RelKind),
    /// Type constructors as operations on type objects.
    TyProd { level: u32 },
    TySum { level: u32 },
    TyArrow { level: u32 },
    /// Complement of a relational type, as an operation `Types1 -> Types1`.
    TyNeg,
    TyPi { domain: TypeExpr, level: u32 },
    TySigma { domain: TypeExpr, level: u32 },
    /// The common destructor for composite level-0 types.
    Des,
    /// The canonical enumeration of level-0 types, `N -> Types0`.
    Ind1,
    /// Inverse of the enumeration, `Types0 -> N`.
    TyIndex,
    /// Primitive witness object for an axiom, `(N; ...) -> <schema>`.
    AxiomOp(Axiom),
    /// Polymorphic level-1 view of a level-0 primitive: takes types as
    /// objects, returns the instantiated operation. Its output socket is
    /// typed by the dependent type over [`PrimitiveKind::PolyTypeOf`].
    Poly(PolyPrim),
    /// Determination operation of a polymorphic primitive: maps input type
    /// objects to the type object of the instantiated operation.
    PolyTypeOf(PolyPrim),
}

/// Which level-0 primitive a polymorphic node instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolyPrim {
    Join,
    Proj,
    PlusLeft,
    PlusRight,
    Get,
    Const,
    Copy,
    Id,
    Apply,
    Compose,
}

impl PolyPrim {
    pub fn arity(&self) -> usize {
        match self {
            PolyPrim::Copy | PolyPrim::Id => 1,
            PolyPrim::Compose => 3,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolyPrim::Join => "join",
            PolyPrim::Proj => "proj",
            PolyPrim::PlusLeft => "plus_l",
            PolyPrim::PlusRight => "plus_r",
            PolyPrim::Get => "get",
            PolyPrim::Const => "const",
            PolyPrim::Copy => "copy",
            PolyPrim::Id => "id",
            PolyPrim::Apply => "apply",
            PolyPrim::Compose => "compose",
        }
    }

    pub fn from_name(s: &str) -> Option<PolyPrim> {
        [
            PolyPrim::Join,
            PolyPrim::Proj,
            PolyPrim::PlusLeft,
            PolyPrim::PlusRight,
            PolyPrim::Get,
            PolyPrim::Const,
            PolyPrim::Copy,
            PolyPrim::Id,
            PolyPrim::Apply,
            PolyPrim::Compose,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }

    /// Instantiate at concrete type objects.
    pub fn instantiate(&self, tys: &[TypeExpr]) -> Option<PrimitiveKind> {
        if tys.len() != self.arity() {
            return None;
        }
        Some(match self {
            PolyPrim::Join => PrimitiveKind::Join(tys[0].clone(), tys[1].clone()),
            PolyPrim::Proj => PrimitiveKind::Proj(tys[0].clone(), tys[1].clone()),
            PolyPrim::PlusLeft => PrimitiveKind::PlusLeft(tys[0].clone(), tys[1].clone()),
            PolyPrim::PlusRight => PrimitiveKind::PlusRight(tys[0].clone(), tys[1].clone()),
            PolyPrim::Get => PrimitiveKind::Get(tys[0].clone(), tys[1].clone()),
            PolyPrim::Const => PrimitiveKind::Const {
                a: tys[0].clone(),
                b: tys[1].clone(),
            },
            PolyPrim::Copy => PrimitiveKind::Copy(tys[0].clone()),
            PolyPrim::Id => PrimitiveKind::Id(vec![tys[0].clone()]),
            PolyPrim::Apply => PrimitiveKind::Apply {
                sig: OpSig::plain(vec![tys[0].clone()], vec![tys[1].clone()]),
                provided: vec![0],
            },
            PolyPrim::Compose => PrimitiveKind::Compose {
                f: OpSig::plain(vec![tys[0].clone()], vec![tys[1].clone()]),
                g: OpSig::plain(vec![tys[1].clone()], vec![tys[2].clone()]),
                pairing: vec![(0, 0)],
            },
        })
    }
}

fn nat() -> TypeExpr {
    TypeExpr::Nat
}

fn types(level: u32) -> TypeExpr {
    TypeExpr::Types(level)
}

/// Shape of an axiom's relational type with every concrete argument replaced
/// by a fresh hole: the static socket pattern for witness-carrying wires.
fn axiom_pattern(ax: &Axiom) -> TypeExpr {
    let args = vec![1u64; ax.arity()];
    let schema = ax.schema(&args).expect("arity matches");
    let t = crate::rel::rel_to_type_expr(&schema).expect("axiom schemas are quantifier-free");
    let mut counter = 0u32;
    holeify(&t, &mut counter)
}

fn holeify(t: &TypeExpr, counter: &mut u32) -> TypeExpr {
    match t {
        TypeExpr::RelAtom { kind, .. } => {
            let lhs = RelArg::Hole(*counter);
            let rhs = RelArg::Hole(*counter + 1);
            *counter += 2;
            TypeExpr::RelAtom {
                kind: *kind,
                lhs,
                rhs,
            }
        }
        TypeExpr::Product(a, b) => {
            TypeExpr::product(holeify(a, counter), holeify(b, counter))
        }
        TypeExpr::Sum(a, b) => TypeExpr::sum(holeify(a, counter), holeify(b, counter)),
        other => other.clone(),
    }
}

impl PrimitiveKind {
    /// The socket boards this kind instantiates to.
    pub fn signature(&self) -> NodeSig {
        use PrimitiveKind::*;
        match self {
            Join(a, b) => NodeSig::plain(
                vec![a.clone(), b.clone()],
                vec![TypeExpr::product(a.clone(), b.clone())],
            ),
            Proj(a, b) => NodeSig::plain(
                vec![TypeExpr::product(a.clone(), b.clone())],
                vec![a.clone(), b.clone()],
            ),
            PlusLeft(a, b) => NodeSig::plain(
                vec![a.clone()],
                vec![TypeExpr::sum(a.clone(), b.clone())],
            ),
            PlusRight(a, b) => NodeSig::plain(
                vec![b.clone()],
                vec![TypeExpr::sum(a.clone(), b.clone())],
            ),
            Get(a, b) => NodeSig {
                ins: vec![TypeExpr::sum(a.clone(), b.clone())],
                outs: vec![a.clone(), b.clone()],
                excl_split: Some(1),
            },
            Merge(tys) => {
                let mut ins = tys.clone();
                ins.extend(tys.iter().cloned());
                NodeSig::plain(ins, tys.clone())
            }
            Const { a, b } => NodeSig::plain(
                vec![a.clone()],
                vec![TypeExpr::arrow1(b.clone(), a.clone())],
            ),
            ConstN => NodeSig::plain(vec![nat()], vec![TypeExpr::arrow1(nat(), nat())]),
            ConstVal { b, out_ty, .. } => {
                NodeSig::plain(vec![b.clone()], vec![out_ty.clone()])
            }
            Id(tys) => NodeSig::plain(tys.clone(), tys.clone()),
            Copy(a) => NodeSig::plain(vec![a.clone()], vec![a.clone(), a.clone()]),
            Succ | Pred => NodeSig::plain(vec![nat()], vec![nat()]),
            Apply { sig, provided } => {
                let mut ins = vec![sig.as_arrow()];
                for &i in provided {
                    ins.push(sig.inputs.get(i).cloned().unwrap_or(TypeExpr::Nat));
                }
                if provided.len() == sig.inputs.len() {
                    NodeSig {
                        ins,
                        outs: sig.outputs.sockets(),
                        excl_split: sig.outputs.excl_split(),
                    }
                } else {
                    let remaining: Vec<TypeExpr> = sig
                        .inputs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !provided.contains(i))
                        .map(|(_, t)| t.clone())
                        .collect();
                    let rest = OpSig {
                        inputs: remaining,
                        outputs: sig.outputs.clone(),
                    };
                    NodeSig::plain(ins, vec![rest.as_arrow()])
                }
            }
            Compose { f, g, pairing } => {
                let composed = composed_sig(f, g, pairing);
                NodeSig::plain(vec![f.as_arrow(), g.as_arrow()], vec![composed.as_arrow()])
            }
            Iter { a } => {
                let arrow = OpSig::plain(a.clone(), a.clone()).as_arrow();
                NodeSig::plain(vec![nat(), arrow.clone()], vec![arrow])
            }
            Change { elem } => {
                let seq = TypeExpr::arrow1(nat(), elem.clone());
                NodeSig::plain(vec![nat(), elem.clone(), seq.clone()], vec![seq])
            }
            Ite { b, c, d } => {
                let cond = OpSig::plain(b.clone(), vec![types(1)]).as_arrow();
                let t = OpSig::plain(b.clone(), c.clone()).as_arrow();
                let f = OpSig::plain(b.clone(), d.clone()).as_arrow();
                let out = OpSig {
                    inputs: b.clone(),
                    outputs: OutputSig::Excl(c.clone(), d.clone()),
                };
                NodeSig::plain(vec![cond, t, f], vec![out.as_arrow()])
            }
            While { b } => {
                let cond = OpSig::plain(b.clone(), vec![types(1)]).as_arrow();
                let body = OpSig::plain(b.clone(), b.clone()).as_arrow();
                let out = OpSig {
                    inputs: b.clone(),
                    outputs: OutputSig::Excl(b.clone(), b.clone()),
                };
                NodeSig::plain(vec![nat(), cond, body], vec![out.as_arrow()])
            }
            SigmaF { family } => {
                let a = family.sig().inputs;
                let pi = TypeExpr::Pi(Box::new(family.clone()));
                let out = OpSig::plain(a, vec![TypeExpr::Sigma(Box::new(family.clone()))]);
                NodeSig::plain(vec![pi], vec![out.as_arrow()])
            }
            Dispatch {
                then_op, else_op, ..
            } => {
                let b = then_op.sig().inputs;
                let c = then_op.sig().outputs.sockets();
                let d = else_op.sig().outputs.sockets();
                let split = c.len();
                let mut outs = c;
                outs.extend(d);
                NodeSig {
                    ins: b,
                    outs,
                    excl_split: Some(split),
                }
            }
            Loop { body, .. } => {
                let b = body.sig().inputs;
                let mut outs = b.clone();
                outs.extend(b.iter().cloned());
                NodeSig {
                    ins: b.clone(),
                    outs,
                    excl_split: Some(b.len()),
                }
            }
            SigmaWrap { family, .. } => {
                let a = family.sig().inputs;
                NodeSig::plain(a, vec![TypeExpr::Sigma(Box::new(family.clone()))])
            }
            RelAtomOp(_) => NodeSig::plain(vec![nat(), nat()], vec![types(1)]),
            TyProd { level } | TySum { level } | TyArrow { level } => NodeSig::plain(
                vec![types(*level), types(*level)],
                vec![types(*level)],
            ),
            TyNeg => NodeSig::plain(vec![types(1)], vec![types(1)]),
            TyPi { domain, level } | TySigma { domain, level } => NodeSig::plain(
                vec![TypeExpr::arrow1(domain.clone(), types(*level))],
                vec![types(*level + 1)],
            ),
            Des => NodeSig::plain(vec![types(0)], vec![types(0), types(0)]),
            Ind1 => NodeSig::plain(vec![nat()], vec![types(0)]),
            TyIndex => NodeSig::plain(vec![types(0)], vec![nat()]),
            AxiomOp(ax) => NodeSig::plain(vec![nat(); ax.arity()], vec![axiom_pattern(ax)]),
            Poly(p) => {
                let family = OpValue::prim(PrimitiveKind::PolyTypeOf(*p));
                NodeSig::plain(
                    vec![types(0); p.arity()],
                    vec![TypeExpr::Pi(Box::new(family))],
                )
            }
            PolyTypeOf(p) => NodeSig::plain(vec![types(0); p.arity()], vec![types(0)]),
        }
    }
}

/// Signature of the composition of `f` and `g` along `pairing`: inputs are
/// `f`'s inputs then `g`'s unpaired inputs; outputs are `g`'s outputs then
/// `f`'s unpaired outputs.
pub fn composed_sig(f: &OpSig, g: &OpSig, pairing: &[(usize, usize)]) -> OpSig {
    let mut inputs = f.inputs.clone();
    for (i, t) in g.inputs.iter().enumerate() {
        if !pairing.iter().any(|(_, gi)| *gi == i) {
            inputs.push(t.clone());
        }
    }
    let mut outputs = g.outputs.sockets();
    for (i, t) in f.outputs.sockets().iter().enumerate() {
        if !pairing.iter().any(|(fo, _)| *fo == i) {
            outputs.push(t.clone());
        }
    }
    OpSig {
        inputs,
        outputs: OutputSig::Plain(outputs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_are_type_driven() {
        let j = PrimitiveKind::Join(TypeExpr::Nat, TypeExpr::Continuum);
        let sig = j.signature();
        assert_eq!(sig.ins.len(), 2);
        assert_eq!(
            sig.outs,
            vec![TypeExpr::product(TypeExpr::Nat, TypeExpr::Continuum)]
        );

        let get = PrimitiveKind::Get(TypeExpr::Nat, TypeExpr::Nat);
        assert_eq!(get.signature().excl_split, Some(1));
    }

    #[test]
    fn apply_partial_leaves_remaining_inputs() {
        let sig = OpSig::plain(
            vec![TypeExpr::Continuum, TypeExpr::Nat],
            vec![TypeExpr::Nat],
        );
        let node = PrimitiveKind::Apply {
            sig,
            provided: vec![0],
        };
        let s = node.signature();
        assert_eq!(
            s.outs,
            vec![TypeExpr::Arrow(vec![TypeExpr::Nat], vec![TypeExpr::Nat])]
        );
    }

    #[test]
    fn arrow_roundtrip() {
        let sig = OpSig {
            inputs: vec![TypeExpr::Nat],
            outputs: OutputSig::Excl(vec![TypeExpr::Nat], vec![TypeExpr::Continuum]),
        };
        let arrow = sig.as_arrow();
        assert_eq!(OpSig::from_arrow(&arrow), Some(sig));
    }
}
