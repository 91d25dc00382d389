//! Runtime objects: unary naturals, pairs, tagged unions, operation values,
//! type values, witnesses, and continuum values. All values are immutable
//! after construction.

use crate::continuum::CubicalComplex;
use crate::graph::{prim_to_graph, ConstructionGraph};
use crate::prim::{OpSig, OutputSig, PrimitiveKind};
use crate::rel::{rel_to_type_expr, RelError, Witness};
use crate::types::{socket_compatible, TypeExpr};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// An operation as a value: either a wired graph or a bare primitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpValue {
    pub body: OpBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OpBody {
    Graph(Arc<ConstructionGraph>),
    Prim(Box<PrimitiveKind>),
}

impl OpValue {
    pub fn from_graph(g: ConstructionGraph) -> OpValue {
        OpValue {
            body: OpBody::Graph(Arc::new(g)),
        }
    }

    pub fn prim(pk: PrimitiveKind) -> OpValue {
        OpValue {
            body: OpBody::Prim(Box::new(pk)),
        }
    }

    pub fn sig(&self) -> OpSig {
        match &self.body {
            OpBody::Graph(g) => g.signature(),
            OpBody::Prim(pk) => {
                let s = pk.signature();
                let outputs = match s.excl_split {
                    None => OutputSig::Plain(s.outs),
                    Some(split) => {
                        let (c, d) = s.outs.split_at(split);
                        OutputSig::Excl(c.to_vec(), d.to_vec())
                    }
                };
                OpSig {
                    inputs: s.ins,
                    outputs,
                }
            }
        }
    }

    /// Graph form of the operation; bare primitives are wrapped.
    pub fn to_graph(&self) -> ConstructionGraph {
        match &self.body {
            OpBody::Graph(g) => (**g).clone(),
            OpBody::Prim(pk) => prim_to_graph((**pk).clone()),
        }
    }

    pub fn name(&self) -> String {
        match &self.body {
            OpBody::Graph(g) => g.name.clone(),
            OpBody::Prim(pk) => format!("{pk:?}"),
        }
    }
}

/// A runtime object together with enough structure to recover its type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    /// Unary natural, count of unit signals; always >= 1.
    Nat(u64),
    Pair(Box<Value>, Box<Value>),
    /// Injection into a sum; `other` is the type of the absent side.
    Tagged {
        side: Side,
        payload: Box<Value>,
        other: TypeExpr,
    },
    Op(OpValue),
    Type(TypeExpr),
    Witness(Witness),
    Continuum(CubicalComplex),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn left(payload: Value, other: TypeExpr) -> Value {
        Value::Tagged {
            side: Side::Left,
            payload: Box::new(payload),
            other,
        }
    }

    pub fn right(payload: Value, other: TypeExpr) -> Value {
        Value::Tagged {
            side: Side::Right,
            payload: Box::new(payload),
            other,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_op(&self) -> Option<&OpValue> {
        match self {
            Value::Op(op) => Some(op),
            _ => None,
        }
    }

    /// The type of this value. Fails only for witnesses whose relational
    /// type has no operation-backed family form.
    pub fn type_of(&self) -> Result<TypeExpr, RelError> {
        Ok(match self {
            Value::Nat(_) => TypeExpr::Nat,
            Value::Pair(a, b) => TypeExpr::product(a.type_of()?, b.type_of()?),
            Value::Tagged {
                side,
                payload,
                other,
            } => match side {
                Side::Left => TypeExpr::sum(payload.type_of()?, other.clone()),
                Side::Right => TypeExpr::sum(other.clone(), payload.type_of()?),
            },
            Value::Op(op) => op.sig().as_arrow(),
            Value::Type(t) => TypeExpr::Types(crate::types::level_of(t).0),
            Value::Witness(w) => rel_to_type_expr(&w.of)?,
            Value::Continuum(_) => TypeExpr::Continuum,
        })
    }
}

/// Whether a value may be transmitted through a socket of the given type.
/// Dependent sockets are accepted by shape (the producing node validates
/// them precisely); everything else goes through structural compatibility
/// with hole wildcards and `Types` cumulativity.
pub fn value_matches(socket: &TypeExpr, v: &Value) -> bool {
    match (socket, v) {
        (TypeExpr::Sigma(_), Value::Pair(_, _)) => true,
        (TypeExpr::Pi(_), Value::Op(_)) => true,
        _ => match v.type_of() {
            Ok(t) => socket_compatible(&t, socket),
            Err(_) => false,
        },
    }
}

/// The constant operation `b -> a` returned by the `const` primitive: it
/// consumes its input and emits the embedded value.
pub fn const_op(b: TypeExpr, value: Value) -> Result<OpValue, RelError> {
    let out_ty = value.type_of()?;
    Ok(OpValue::prim(PrimitiveKind::ConstVal {
        b,
        out_ty,
        value: Box::new(value),
    }))
}

/// Identity operation over one socket.
pub fn id_op(ty: TypeExpr) -> OpValue {
    OpValue::prim(PrimitiveKind::Id(vec![ty]))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Tagged {
                side,
                payload,
                other,
            } => match side {
                Side::Left => write!(f, "left({payload} : {other})"),
                Side::Right => write!(f, "right({payload} : {other})"),
            },
            Value::Op(op) => write!(f, "op[{}]", op.sig().as_arrow()),
            Value::Type(t) => write!(f, "type:{t}"),
            Value::Witness(w) => write!(f, "witness[{} ; {}]", w.of, w),
            Value::Continuum(c) => write!(
                f,
                "continuum[dim={},res={},active={}]",
                c.dim(),
                c.resolution(),
                c.active_count()
            ),
        }
    }
}
