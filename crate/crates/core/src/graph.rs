//! Operations as finite wired graphs of socket boards, with the use-once
//! discipline: every produced object is consumed by exactly one wire, and
//! duplication requires an explicit `Copy` node.

use crate::prim::{NodeSig, OpSig, OutputSig, PrimitiveKind};
use crate::types::{socket_compatible, TypeExpr};
use crate::value::{value_matches, OpValue, Value};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// What a node is: a primitive operation, an embedded constant, a graph
/// port, or an inlined sub-graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Prim(PrimitiveKind),
    Constant { value: Value, ty: TypeExpr },
    Input { index: usize, ty: TypeExpr },
    Output { index: usize, ty: TypeExpr },
    Sub(Arc<ConstructionGraph>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub in_sockets: Vec<TypeExpr>,
    pub out_sockets: Vec<TypeExpr>,
}

impl Node {
    pub fn new(id: NodeId, kind: NodeKind) -> Node {
        let sig = kind_signature(&kind);
        Node {
            id,
            kind,
            in_sockets: sig.ins,
            out_sockets: sig.outs,
        }
    }

    pub fn excl_split(&self) -> Option<usize> {
        match &self.kind {
            NodeKind::Prim(pk) => pk.signature().excl_split,
            NodeKind::Sub(g) => g.excl_split,
            _ => None,
        }
    }
}

pub fn kind_signature(kind: &NodeKind) -> NodeSig {
    match kind {
        NodeKind::Prim(pk) => pk.signature(),
        NodeKind::Constant { ty, .. } => NodeSig {
            ins: vec![],
            outs: vec![ty.clone()],
            excl_split: None,
        },
        NodeKind::Input { ty, .. } => NodeSig {
            ins: vec![],
            outs: vec![ty.clone()],
            excl_split: None,
        },
        NodeKind::Output { ty, .. } => NodeSig {
            ins: vec![ty.clone()],
            outs: vec![],
            excl_split: None,
        },
        NodeKind::Sub(g) => {
            let sig = g.signature();
            NodeSig {
                ins: sig.inputs.clone(),
                outs: sig.outputs.sockets(),
                excl_split: sig.outputs.excl_split(),
            }
        }
    }
}

/// A wire from an output socket to an input socket. Endpoint types must be
/// compatible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wire {
    pub from: (NodeId, usize),
    pub to: (NodeId, usize),
}

/// An operation as a wired graph. `inputs` and `outputs` list the port
/// nodes in socket order; `excl_split` marks the graph outputs as two
/// mutually exclusive groups split at that index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstructionGraph {
    pub name: String,
    pub nodes: Vec<Node>,
    pub wires: Vec<Wire>,
    pub inputs: Vec<NodeId>,
    pub outputs: Vec<NodeId>,
    pub excl_split: Option<usize>,
}

/// A single defect found by [`ConstructionGraph::check`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("wire endpoint references missing node {0}")]
    MissingNode(NodeId),
    #[error("wire endpoint {0} socket {1} is out of range")]
    SocketRange(NodeId, usize),
    #[error("output socket {1} of {0} is consumed by {2} wires; exactly one consumer is required")]
    DoubleConsumption(NodeId, usize, usize),
    #[error("output socket {1} of {0} is dangling; every produced object must be consumed")]
    DanglingOutput(NodeId, usize),
    #[error("input socket {1} of {0} is fed by {2} wires; exactly one producer is required")]
    DoubleFeed(NodeId, usize, usize),
    #[error("input socket {1} of {0} is dangling; every input must be fed")]
    DanglingInput(NodeId, usize),
    #[error("type mismatch on wire {0}:{1} -> {2}:{3}: `{4}` does not fit `{5}`")]
    TypeMismatch(NodeId, usize, NodeId, usize, String, String),
    #[error("cycle through nodes {0:?}")]
    Cycle(Vec<NodeId>),
    #[error("port list mismatch: {0}")]
    PortMismatch(String),
    #[error("node {0} socket lists do not match its kind signature")]
    SocketSignature(NodeId),
    #[error("exclusive split {0} is out of range for {1} outputs")]
    BadExclSplit(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph fails linearity/type checking: {0:?}")]
    Check(Vec<Violation>),
    #[error("pairing index out of range: f-output {0}, g-input {1}")]
    PairingRange(usize, usize),
    #[error("pairing is not one-to-one")]
    PairingDuplicate,
    #[error("paired sockets have incompatible types: `{0}` vs `{1}`")]
    PairingType(String, String),
    #[error("composition over exclusive output groups is not supported")]
    ExclCompose,
    #[error("binding index {0} out of range")]
    BindingRange(usize),
    #[error("binding for input {0} has mismatched type: expected `{1}`")]
    BindingType(usize, String),
    #[error("curry split must satisfy 1 <= split < input count, got {0} of {1}")]
    BadSplit(usize, usize),
    #[error("operation is not of curried shape: `{0}`")]
    NotCurried(String),
    #[error("input permutation is invalid")]
    BadPermutation,
    #[error("operation has no graph form")]
    NoGraphForm,
}

impl ConstructionGraph {
    /// The operation signature read off the port nodes.
    pub fn signature(&self) -> OpSig {
        let node_ty = |id: &NodeId, input: bool| {
            self.node(*id)
                .map(|n| match &n.kind {
                    NodeKind::Input { ty, .. } if input => ty.clone(),
                    NodeKind::Output { ty, .. } if !input => ty.clone(),
                    _ => TypeExpr::Nat,
                })
                .unwrap_or(TypeExpr::Nat)
        };
        let inputs: Vec<TypeExpr> = self.inputs.iter().map(|id| node_ty(id, true)).collect();
        let outs: Vec<TypeExpr> = self.outputs.iter().map(|id| node_ty(id, false)).collect();
        let outputs = match self.excl_split {
            Some(s) if s <= outs.len() => {
                OutputSig::Excl(outs[..s].to_vec(), outs[s..].to_vec())
            }
            _ => OutputSig::Plain(outs),
        };
        OpSig { inputs, outputs }
    }

    pub fn arrow_type(&self) -> TypeExpr {
        self.signature().as_arrow()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Stable topological order of node indices, or the ids stuck on a
    /// cycle.
    pub fn topo_order(&self) -> Result<Vec<usize>, Vec<NodeId>> {
        let index: HashMap<NodeId, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, i))
            .collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for w in &self.wires {
            if let (Some(&a), Some(&b)) = (index.get(&w.from.0), index.get(&w.to.0)) {
                succs[a].push(b);
                indegree[b] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| indegree[i] == 0)
            .collect();
        ready.sort_unstable();
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = std::collections::BinaryHeap::new();
        for i in ready {
            queue.push(std::cmp::Reverse(i));
        }
        while let Some(std::cmp::Reverse(i)) = queue.pop() {
            order.push(i);
            for &s in &succs[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    queue.push(std::cmp::Reverse(s));
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            let stuck: Vec<NodeId> = (0..self.nodes.len())
                .filter(|i| !order.contains(i))
                .map(|i| self.nodes[i].id)
                .collect();
            Err(stuck)
        }
    }

    /// Report every linearity, typing and shape defect. An empty report
    /// means the graph is well-formed.
    pub fn check(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id) {
                violations.push(Violation::DuplicateId(n.id));
            }
            let sig = kind_signature(&n.kind);
            if sig.ins != n.in_sockets || sig.outs != n.out_sockets {
                violations.push(Violation::SocketSignature(n.id));
            }
        }

        // Port lists must enumerate exactly the port nodes, in index order.
        let mut in_ports: Vec<(usize, NodeId)> = Vec::new();
        let mut out_ports: Vec<(usize, NodeId)> = Vec::new();
        for n in &self.nodes {
            match &n.kind {
                NodeKind::Input { index, .. } => in_ports.push((*index, n.id)),
                NodeKind::Output { index, .. } => out_ports.push((*index, n.id)),
                _ => {}
            }
        }
        in_ports.sort_unstable();
        out_ports.sort_unstable();
        let listed_in: Vec<NodeId> = self.inputs.clone();
        let expect_in: Vec<NodeId> = in_ports.iter().map(|(_, id)| *id).collect();
        if listed_in != expect_in
            || in_ports.iter().enumerate().any(|(i, (idx, _))| i != *idx)
        {
            violations.push(Violation::PortMismatch(format!(
                "inputs list {listed_in:?} does not match input ports {expect_in:?}"
            )));
        }
        let listed_out: Vec<NodeId> = self.outputs.clone();
        let expect_out: Vec<NodeId> = out_ports.iter().map(|(_, id)| *id).collect();
        if listed_out != expect_out
            || out_ports.iter().enumerate().any(|(i, (idx, _))| i != *idx)
        {
            violations.push(Violation::PortMismatch(format!(
                "outputs list {listed_out:?} does not match output ports {expect_out:?}"
            )));
        }
        if let Some(s) = self.excl_split {
            if s == 0 || s >= self.outputs.len() {
                violations.push(Violation::BadExclSplit(s, self.outputs.len()));
            }
        }

        // Wire sanity and per-socket counts.
        let mut out_count: HashMap<(NodeId, usize), usize> = HashMap::new();
        let mut in_count: HashMap<(NodeId, usize), usize> = HashMap::new();
        for w in &self.wires {
            for (id, socket, is_out) in [(w.from.0, w.from.1, true), (w.to.0, w.to.1, false)] {
                match self.node(id) {
                    None => violations.push(Violation::MissingNode(id)),
                    Some(n) => {
                        let count = if is_out {
                            n.out_sockets.len()
                        } else {
                            n.in_sockets.len()
                        };
                        if socket >= count {
                            violations.push(Violation::SocketRange(id, socket));
                        }
                    }
                }
            }
            *out_count.entry(w.from).or_insert(0) += 1;
            *in_count.entry(w.to).or_insert(0) += 1;
            if let (Some(src), Some(dst)) = (self.node(w.from.0), self.node(w.to.0)) {
                if let (Some(ft), Some(tt)) = (
                    src.out_sockets.get(w.from.1),
                    dst.in_sockets.get(w.to.1),
                ) {
                    if !socket_compatible(ft, tt) {
                        violations.push(Violation::TypeMismatch(
                            w.from.0,
                            w.from.1,
                            w.to.0,
                            w.to.1,
                            ft.to_string(),
                            tt.to_string(),
                        ));
                    }
                }
            }
        }
        for n in &self.nodes {
            for s in 0..n.out_sockets.len() {
                match out_count.get(&(n.id, s)).copied().unwrap_or(0) {
                    0 => violations.push(Violation::DanglingOutput(n.id, s)),
                    1 => {}
                    c => violations.push(Violation::DoubleConsumption(n.id, s, c)),
                }
            }
            for s in 0..n.in_sockets.len() {
                match in_count.get(&(n.id, s)).copied().unwrap_or(0) {
                    0 => violations.push(Violation::DanglingInput(n.id, s)),
                    1 => {}
                    c => violations.push(Violation::DoubleFeed(n.id, s, c)),
                }
            }
        }

        if let Err(stuck) = self.topo_order() {
            violations.push(Violation::Cycle(stuck));
        }
        violations
    }

    fn max_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id.0).max().map_or(0, |m| m + 1)
    }

    /// Wire feeding a given input socket.
    fn wire_into(&self, id: NodeId, socket: usize) -> Option<&Wire> {
        self.wires.iter().find(|w| w.to == (id, socket))
    }

    fn wire_out_of(&self, id: NodeId, socket: usize) -> Option<&Wire> {
        self.wires.iter().find(|w| w.from == (id, socket))
    }
}

/// Compose `f` then `g`, joining the paired `f`-outputs to `g`-inputs.
/// Unpaired `g`-inputs become extra inputs of the result, unpaired
/// `f`-outputs extra outputs, so the two-output variant
/// `((A -> (B; D)); (B -> C)) -> (A -> (C; D))` falls out of the general
/// mechanism.
pub fn compose_graphs(
    f: &ConstructionGraph,
    g: &ConstructionGraph,
    pairing: &[(usize, usize)],
) -> Result<ConstructionGraph, GraphError> {
    let f_sig = f.signature();
    let g_sig = g.signature();
    if f.excl_split.is_some() {
        return Err(GraphError::ExclCompose);
    }
    let f_outs = f_sig.outputs.sockets();
    let mut seen_f = HashSet::new();
    let mut seen_g = HashSet::new();
    for &(fo, gi) in pairing {
        if fo >= f_outs.len() || gi >= g_sig.inputs.len() {
            return Err(GraphError::PairingRange(fo, gi));
        }
        if !seen_f.insert(fo) || !seen_g.insert(gi) {
            return Err(GraphError::PairingDuplicate);
        }
        if !socket_compatible(&f_outs[fo], &g_sig.inputs[gi]) {
            return Err(GraphError::PairingType(
                f_outs[fo].to_string(),
                g_sig.inputs[gi].to_string(),
            ));
        }
    }
    if g.excl_split.is_some() && seen_f.len() < f_outs.len() {
        return Err(GraphError::ExclCompose);
    }

    let shift = f.max_id();
    let mut nodes = f.nodes.clone();
    let mut wires = f.wires.clone();
    for n in &g.nodes {
        let mut n = n.clone();
        n.id = NodeId(n.id.0 + shift);
        nodes.push(n);
    }
    for w in &g.wires {
        wires.push(Wire {
            from: (NodeId(w.from.0 .0 + shift), w.from.1),
            to: (NodeId(w.to.0 .0 + shift), w.to.1),
        });
    }

    let mut removed: HashSet<NodeId> = HashSet::new();
    for &(fo, gi) in pairing {
        let f_port = f.outputs[fo];
        let g_port = NodeId(g.inputs[gi].0 + shift);
        let src = f
            .wire_into(f_port, 0)
            .map(|w| w.from)
            .ok_or(GraphError::PairingRange(fo, gi))?;
        let dst = g
            .wire_out_of(g.inputs[gi], 0)
            .map(|w| (NodeId(w.to.0 .0 + shift), w.to.1))
            .ok_or(GraphError::PairingRange(fo, gi))?;
        wires.retain(|w| w.to != (f_port, 0) && w.from != (g_port, 0));
        removed.insert(f_port);
        removed.insert(g_port);
        wires.push(Wire { from: src, to: dst });
    }
    nodes.retain(|n| !removed.contains(&n.id));

    // Rebuild port indices: f inputs, then unpaired g inputs; g outputs,
    // then unpaired f outputs.
    let mut inputs: Vec<NodeId> = f.inputs.clone();
    for (gi, id) in g.inputs.iter().enumerate() {
        if !seen_g.contains(&gi) {
            inputs.push(NodeId(id.0 + shift));
        }
    }
    let mut outputs: Vec<NodeId> = g
        .outputs
        .iter()
        .map(|id| NodeId(id.0 + shift))
        .collect::<Vec<_>>();
    let mut f_extra = Vec::new();
    for (fo, id) in f.outputs.iter().enumerate() {
        if !seen_f.contains(&fo) {
            f_extra.push(*id);
        }
    }
    outputs.extend(f_extra);

    for n in nodes.iter_mut() {
        match &mut n.kind {
            NodeKind::Input { index, .. } => {
                *index = inputs.iter().position(|id| *id == n.id).unwrap_or(*index);
            }
            NodeKind::Output { index, .. } => {
                *index = outputs.iter().position(|id| *id == n.id).unwrap_or(*index);
            }
            _ => {}
        }
    }

    let composed = ConstructionGraph {
        name: format!("{}.{}", f.name, g.name),
        nodes,
        wires,
        inputs,
        outputs,
        excl_split: g.excl_split,
    };
    let violations = composed.check();
    if violations.is_empty() {
        Ok(composed)
    } else {
        Err(GraphError::Check(violations))
    }
}

/// Replace the bound input ports by embedded constants; remaining ports keep
/// their order.
pub fn partial_apply(
    g: &ConstructionGraph,
    bindings: Vec<(usize, Value)>,
) -> Result<ConstructionGraph, GraphError> {
    let sig = g.signature();
    let mut seen = HashSet::new();
    for (i, v) in &bindings {
        if *i >= sig.inputs.len() || !seen.insert(*i) {
            return Err(GraphError::BindingRange(*i));
        }
        if !value_matches(&sig.inputs[*i], v) {
            return Err(GraphError::BindingType(*i, sig.inputs[*i].to_string()));
        }
    }
    let mut out = g.clone();
    let bound_ids: Vec<(NodeId, Value)> = bindings
        .into_iter()
        .map(|(i, v)| (g.inputs[i], v))
        .collect();
    for (id, value) in bound_ids {
        let ty = sig.inputs[g.inputs.iter().position(|x| *x == id).unwrap()].clone();
        let node = out.nodes.iter_mut().find(|n| n.id == id).unwrap();
        node.kind = NodeKind::Constant { value, ty };
        out.inputs.retain(|x| *x != id);
    }
    for n in out.nodes.iter_mut() {
        if let NodeKind::Input { index, .. } = &mut n.kind {
            if let Some(pos) = out.inputs.iter().position(|id| *id == n.id) {
                *index = pos;
            }
        }
    }
    let violations = out.check();
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(GraphError::Check(violations))
    }
}

/// Split the input board after `split` sockets: the result consumes the
/// first group and emits the operation awaiting the rest.
pub fn curry_transform(
    g: &ConstructionGraph,
    split: usize,
) -> Result<ConstructionGraph, GraphError> {
    let sig = g.signature();
    if split == 0 || split >= sig.inputs.len() {
        return Err(GraphError::BadSplit(split, sig.inputs.len()));
    }
    let mut b = GraphBuilder::new(format!("{}.curry{}", g.name, split));
    let mut args = Vec::new();
    for t in &sig.inputs[..split] {
        args.push(b.input(t.clone()));
    }
    let opc = b.constant_op(OpValue::from_graph(g.clone()));
    let out = b.bind_socket(sig, opc, &(0..split).collect::<Vec<_>>(), &args);
    b.output(out);
    b.finish().map_err(GraphError::Check)
}

/// Inverse of currying: composes application with application, so an
/// operation `A -> (B -> C)` becomes `(A; B) -> C`.
pub fn uncurry_transform(g: &ConstructionGraph) -> Result<ConstructionGraph, GraphError> {
    let sig = g.signature();
    let inner = match &sig.outputs {
        OutputSig::Plain(outs) if outs.len() == 1 => {
            OpSig::from_arrow(&outs[0]).ok_or_else(|| GraphError::NotCurried(outs[0].to_string()))?
        }
        _ => return Err(GraphError::NotCurried(sig.as_arrow().to_string())),
    };
    let mut b = GraphBuilder::new(format!("{}.uncurry", g.name));
    let mut a_args = Vec::new();
    for t in &sig.inputs {
        a_args.push(b.input(t.clone()));
    }
    let mut b_args = Vec::new();
    for t in &inner.inputs {
        b_args.push(b.input(t.clone()));
    }
    let opc = b.constant_op(OpValue::from_graph(g.clone()));
    let first = b.apply_socket(sig.clone(), opc, &a_args);
    let outs = b.apply_socket(inner.clone(), first[0], &b_args);
    match inner.outputs.excl_split() {
        None => {
            for o in outs {
                b.output(o);
            }
        }
        Some(s) => {
            let (left, right) = outs.split_at(s);
            b.outputs_exclusive(left, right);
        }
    }
    b.finish().map_err(GraphError::Check)
}

/// Reorder the input board: new input `i` is old input `perm[i]`.
pub fn swap_inputs(
    g: &ConstructionGraph,
    perm: &[usize],
) -> Result<ConstructionGraph, GraphError> {
    let n = g.inputs.len();
    if perm.len() != n {
        return Err(GraphError::BadPermutation);
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(GraphError::BadPermutation);
        }
        seen[p] = true;
    }
    let mut out = g.clone();
    out.inputs = perm.iter().map(|&p| g.inputs[p]).collect();
    for node in out.nodes.iter_mut() {
        if let NodeKind::Input { index, .. } = &mut node.kind {
            if let Some(pos) = out.inputs.iter().position(|id| *id == node.id) {
                *index = pos;
            }
        }
    }
    let violations = out.check();
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(GraphError::Check(violations))
    }
}

/// Reference to one output socket of a node under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SocketRef {
    pub node: NodeId,
    pub socket: usize,
}

/// Single-owner mutable builder; [`GraphBuilder::finish`] checks the result.
#[derive(Debug)]
pub struct GraphBuilder {
    name: String,
    nodes: Vec<Node>,
    wires: Vec<Wire>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
    excl_split: Option<usize>,
    next: u32,
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            name: name.into(),
            nodes: Vec::new(),
            wires: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            excl_split: None,
            next: 0,
        }
    }

    fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        id
    }

    fn push(&mut self, kind: NodeKind, ins: &[SocketRef]) -> Vec<SocketRef> {
        let id = self.fresh();
        let node = Node::new(id, kind);
        for (i, src) in ins.iter().enumerate() {
            self.wires.push(Wire {
                from: (src.node, src.socket),
                to: (id, i),
            });
        }
        let outs = (0..node.out_sockets.len())
            .map(|socket| SocketRef { node: id, socket })
            .collect();
        self.nodes.push(node);
        outs
    }

    pub fn input(&mut self, ty: TypeExpr) -> SocketRef {
        let index = self.inputs.len();
        let outs = self.push(NodeKind::Input { index, ty }, &[]);
        self.inputs.push(outs[0].node);
        outs[0]
    }

    pub fn output(&mut self, from: SocketRef) {
        let index = self.outputs.len();
        let ty = self.socket_type(from);
        let id = self.fresh();
        let node = Node::new(id, NodeKind::Output { index, ty });
        self.wires.push(Wire {
            from: (from.node, from.socket),
            to: (id, 0),
        });
        self.nodes.push(node);
        self.outputs.push(id);
    }

    /// Declare the graph outputs as an exclusive pair of groups.
    pub fn outputs_exclusive(&mut self, left: &[SocketRef], right: &[SocketRef]) {
        for s in left {
            self.output(*s);
        }
        self.excl_split = Some(self.outputs.len());
        for s in right {
            self.output(*s);
        }
    }

    fn socket_type(&self, s: SocketRef) -> TypeExpr {
        self.nodes
            .iter()
            .find(|n| n.id == s.node)
            .and_then(|n| n.out_sockets.get(s.socket))
            .cloned()
            .unwrap_or(TypeExpr::Nat)
    }

    pub fn add(&mut self, kind: PrimitiveKind, ins: &[SocketRef]) -> Vec<SocketRef> {
        self.push(NodeKind::Prim(kind), ins)
    }

    pub fn constant(&mut self, value: Value) -> SocketRef {
        let ty = value.type_of().unwrap_or(TypeExpr::Nat);
        self.push(NodeKind::Constant { value, ty }, &[])[0]
    }

    pub fn constant_op(&mut self, op: OpValue) -> SocketRef {
        let ty = op.sig().as_arrow();
        self.push(
            NodeKind::Constant {
                value: Value::Op(op),
                ty,
            },
            &[],
        )[0]
    }

    pub fn nat(&mut self, n: u64) -> SocketRef {
        self.constant(Value::Nat(n))
    }

    pub fn succ(&mut self, x: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::Succ, &[x])[0]
    }

    pub fn pred(&mut self, x: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::Pred, &[x])[0]
    }

    pub fn copy(&mut self, x: SocketRef) -> (SocketRef, SocketRef) {
        let ty = self.socket_type(x);
        let outs = self.add(PrimitiveKind::Copy(ty), &[x]);
        (outs[0], outs[1])
    }

    /// `n` copies of a socket via a copy chain; `n >= 1`.
    pub fn copies(&mut self, x: SocketRef, n: usize) -> Vec<SocketRef> {
        let mut out = Vec::with_capacity(n);
        let mut cur = x;
        for _ in 1..n {
            let (a, b) = self.copy(cur);
            out.push(a);
            cur = b;
        }
        out.push(cur);
        out
    }

    pub fn join(&mut self, a: SocketRef, b: SocketRef) -> SocketRef {
        let ta = self.socket_type(a);
        let tb = self.socket_type(b);
        self.add(PrimitiveKind::Join(ta, tb), &[a, b])[0]
    }

    pub fn proj(&mut self, p: SocketRef) -> (SocketRef, SocketRef) {
        let (ta, tb) = match self.socket_type(p) {
            TypeExpr::Product(a, b) => ((*a).clone(), (*b).clone()),
            other => (other, TypeExpr::Nat),
        };
        let outs = self.add(PrimitiveKind::Proj(ta, tb), &[p]);
        (outs[0], outs[1])
    }

    pub fn rel_atom(&mut self, kind: crate::rel::RelKind, l: SocketRef, r: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::RelAtomOp(kind), &[l, r])[0]
    }

    pub fn ty_prod(&mut self, level: u32, a: SocketRef, b: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::TyProd { level }, &[a, b])[0]
    }

    pub fn ty_sum(&mut self, level: u32, a: SocketRef, b: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::TySum { level }, &[a, b])[0]
    }

    pub fn ty_neg(&mut self, a: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::TyNeg, &[a])[0]
    }

    /// Full application of an operation flowing on `op`.
    pub fn apply_socket(
        &mut self,
        sig: OpSig,
        op: SocketRef,
        args: &[SocketRef],
    ) -> Vec<SocketRef> {
        let provided = (0..sig.inputs.len()).collect();
        let mut ins = vec![op];
        ins.extend_from_slice(args);
        self.add(PrimitiveKind::Apply { sig, provided }, &ins)
    }

    /// Full application of an embedded operation value.
    pub fn apply_value(&mut self, op: OpValue, args: &[SocketRef]) -> Vec<SocketRef> {
        let sig = op.sig();
        let opc = self.constant_op(op);
        self.apply_socket(sig, opc, args)
    }

    /// Partial application binding `provided` (in that order) to `args`;
    /// yields the remaining operation.
    pub fn bind_socket(
        &mut self,
        sig: OpSig,
        op: SocketRef,
        provided: &[usize],
        args: &[SocketRef],
    ) -> SocketRef {
        let mut ins = vec![op];
        ins.extend_from_slice(args);
        self.add(
            PrimitiveKind::Apply {
                sig,
                provided: provided.to_vec(),
            },
            &ins,
        )[0]
    }

    pub fn bind_value(&mut self, op: OpValue, provided: &[usize], args: &[SocketRef]) -> SocketRef {
        let sig = op.sig();
        let opc = self.constant_op(op);
        self.bind_socket(sig, opc, provided, args)
    }

    pub fn iter_node(&mut self, a: Vec<TypeExpr>, n: SocketRef, f: SocketRef) -> SocketRef {
        self.add(PrimitiveKind::Iter { a }, &[n, f])[0]
    }

    pub fn change(
        &mut self,
        elem: TypeExpr,
        n: SocketRef,
        a: SocketRef,
        q: SocketRef,
    ) -> SocketRef {
        self.add(PrimitiveKind::Change { elem }, &[n, a, q])[0]
    }

    /// Conditional branch over the given state sockets; returns the two
    /// exclusive output groups.
    pub fn dispatch(
        &mut self,
        cond: OpValue,
        cond_inputs: Vec<usize>,
        then_op: OpValue,
        else_op: OpValue,
        ins: &[SocketRef],
    ) -> (Vec<SocketRef>, Vec<SocketRef>) {
        let split = then_op.sig().outputs.sockets().len();
        let outs = self.add(
            PrimitiveKind::Dispatch {
                cond,
                cond_inputs,
                then_op,
                else_op,
            },
            ins,
        );
        let (l, r) = outs.split_at(split);
        (l.to_vec(), r.to_vec())
    }

    pub fn merge(
        &mut self,
        tys: Vec<TypeExpr>,
        left: &[SocketRef],
        right: &[SocketRef],
    ) -> Vec<SocketRef> {
        let mut ins = left.to_vec();
        ins.extend_from_slice(right);
        self.add(PrimitiveKind::Merge(tys), &ins)
    }

    pub fn finish(self) -> Result<ConstructionGraph, Vec<Violation>> {
        let g = ConstructionGraph {
            name: self.name,
            nodes: self.nodes,
            wires: self.wires,
            inputs: self.inputs,
            outputs: self.outputs,
            excl_split: self.excl_split,
        };
        let violations = g.check();
        if violations.is_empty() {
            Ok(g)
        } else {
            Err(violations)
        }
    }
}

/// Wrap a bare primitive into the equivalent one-node graph.
pub fn prim_to_graph(pk: PrimitiveKind) -> ConstructionGraph {
    let sig = pk.signature();
    let mut b = GraphBuilder::new("prim");
    let ins: Vec<SocketRef> = sig.ins.iter().map(|t| b.input(t.clone())).collect();
    let outs = b.add(pk, &ins);
    match sig.excl_split {
        None => {
            for o in outs {
                b.output(o);
            }
        }
        Some(s) => {
            let (l, r) = outs.split_at(s);
            b.outputs_exclusive(l, r);
        }
    }
    b.finish().expect("primitive wrap is well-formed")
}

/// Identity operation over a socket list.
pub fn identity_graph(tys: Vec<TypeExpr>) -> ConstructionGraph {
    prim_to_graph(PrimitiveKind::Id(tys))
}

pub use crate::prim::{OpSig as Signature, OutputSig as OutputSignature};

impl fmt::Display for ConstructionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} nodes, {} wires)",
            self.name,
            self.arrow_type(),
            self.nodes.len(),
            self.wires.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate;
    use crate::types::TypeExpr;

    fn nat() -> TypeExpr {
        TypeExpr::Nat
    }

    fn succ_graph() -> ConstructionGraph {
        prim_to_graph(PrimitiveKind::Succ)
    }

    #[test]
    fn double_consumption_is_a_violation() {
        // One successor output wired into two consumers.
        let mut b = GraphBuilder::new("bad");
        let x = b.input(nat());
        let s = b.succ(x);
        let s2 = b.succ(s);
        b.output(s2);
        let mut g = match b.finish() {
            Ok(g) => g,
            Err(_) => unreachable!(),
        };
        // Manually wire the first successor's output into a second consumer.
        let extra = Node::new(NodeId(99), NodeKind::Output { index: 1, ty: nat() });
        let src = g.wires[1].from;
        g.nodes.push(extra);
        g.outputs.push(NodeId(99));
        g.wires.push(Wire { from: src, to: (NodeId(99), 0) });
        let violations = g.check();
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::DoubleConsumption(_, _, 2))));
        // Inserting a copy node instead passes.
        let mut b = GraphBuilder::new("good");
        let x = b.input(nat());
        let s = b.succ(x);
        let (a, c) = b.copy(s);
        let s2 = b.succ(a);
        b.output(s2);
        b.output(c);
        assert!(b.finish().is_ok());
    }

    #[test]
    fn type_mismatch_is_a_violation() {
        let mut b = GraphBuilder::new("bad_types");
        let x = b.input(TypeExpr::Continuum);
        let s = b.succ(x);
        b.output(s);
        match b.finish() {
            Err(vs) => assert!(vs.iter().any(|v| matches!(v, Violation::TypeMismatch(..)))),
            Ok(_) => panic!("expected a type violation"),
        }
    }

    #[test]
    fn cycle_is_a_violation() {
        let mut g = succ_graph();
        // Rewire the successor's input from its own output.
        let succ_id = g.nodes[1].id;
        g.wires = vec![
            Wire { from: (succ_id, 0), to: (succ_id, 0) },
            Wire { from: (g.inputs[0], 0), to: (g.outputs[0], 0) },
        ];
        // Make the port wire type-consistent for this test.
        let violations = g.check();
        assert!(violations.iter().any(|v| matches!(v, Violation::Cycle(_))));
    }

    #[test]
    fn compose_runs_g_after_f() {
        let s = succ_graph();
        let c = compose_graphs(&s, &s, &[(0, 0)]).unwrap();
        assert!(c.check().is_empty());
        let out = evaluate(&c, vec![Value::Nat(1)]).unwrap().single().unwrap();
        assert_eq!(out.as_nat(), Some(3));
    }

    #[test]
    fn compose_identity_law() {
        let s = succ_graph();
        let idg = identity_graph(vec![nat()]);
        let c = compose_graphs(&s, &idg, &[(0, 0)]).unwrap();
        for n in 1..=10 {
            let a = evaluate(&c, vec![Value::Nat(n)]).unwrap().single().unwrap();
            let b = evaluate(&s, vec![Value::Nat(n)]).unwrap().single().unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn compose_two_output_variant() {
        // f : N -> (N; N) by copy; g : N -> N. Pairing one channel leaves
        // the other as a result output: (N -> (N; N)) ; (N -> N) gives
        // N -> (N; N).
        let mut b = GraphBuilder::new("f");
        let x = b.input(nat());
        let (a, c) = b.copy(x);
        b.output(a);
        b.output(c);
        let f = b.finish().unwrap();
        let g = succ_graph();
        let composed = compose_graphs(&f, &g, &[(0, 0)]).unwrap();
        let sig = composed.signature();
        assert_eq!(sig.inputs.len(), 1);
        assert_eq!(sig.outputs.sockets().len(), 2);
        let res = evaluate(&composed, vec![Value::Nat(4)]).unwrap();
        // g's output first, then the unpaired f output.
        assert_eq!(res.outputs[0].as_ref().and_then(|v| v.as_nat()), Some(5));
        assert_eq!(res.outputs[1].as_ref().and_then(|v| v.as_nat()), Some(4));
    }

    #[test]
    fn partial_application() {
        // Two-input adder: iterate successor by the first input.
        let mut b = GraphBuilder::new("add");
        let n = b.input(nat());
        let x = b.input(nat());
        let sc = b.constant_op(OpValue::prim(PrimitiveKind::Succ));
        let it = b.iter_node(vec![nat()], n, sc);
        let out = b.apply_socket(OpSig::plain(vec![nat()], vec![nat()]), it, &[x]);
        b.output(out[0]);
        let add = b.finish().unwrap();
        let out = evaluate(&add, vec![Value::Nat(3), Value::Nat(4)])
            .unwrap()
            .single()
            .unwrap();
        assert_eq!(out.as_nat(), Some(7));

        let bound = partial_apply(&add, vec![(0, Value::Nat(3))]).unwrap();
        assert!(bound.check().is_empty());
        let out = evaluate(&bound, vec![Value::Nat(4)]).unwrap().single().unwrap();
        assert_eq!(out.as_nat(), Some(7));

        // Binding nothing leaves the graph unchanged.
        let same = partial_apply(&add, vec![]).unwrap();
        assert_eq!(same, add);

        // Binding everything yields a closed graph evaluating directly.
        let closed = partial_apply(&add, vec![(0, Value::Nat(3)), (1, Value::Nat(4))]).unwrap();
        let out = evaluate(&closed, vec![]).unwrap().single().unwrap();
        assert_eq!(out.as_nat(), Some(7));
    }

    #[test]
    fn curry_uncurry_roundtrip() {
        let mut b = GraphBuilder::new("add");
        let n = b.input(nat());
        let x = b.input(nat());
        let sc = b.constant_op(OpValue::prim(PrimitiveKind::Succ));
        let it = b.iter_node(vec![nat()], n, sc);
        let out = b.apply_socket(OpSig::plain(vec![nat()], vec![nat()]), it, &[x]);
        b.output(out[0]);
        let add = b.finish().unwrap();

        let curried = curry_transform(&add, 1).unwrap();
        // curried(3) yields an operation; applying it to 4 gives 7.
        let op = evaluate(&curried, vec![Value::Nat(3)]).unwrap().single().unwrap();
        let f = op.as_op().unwrap();
        let r = crate::eval::evaluate_op_value(f, vec![Value::Nat(4)]).unwrap();
        assert_eq!(r[0].as_nat(), Some(7));

        let back = uncurry_transform(&curried).unwrap();
        for (a, x) in [(1u64, 1u64), (2, 5), (4, 3)] {
            let lhs = evaluate(&back, vec![Value::Nat(a), Value::Nat(x)])
                .unwrap()
                .single()
                .unwrap();
            let rhs = evaluate(&add, vec![Value::Nat(a), Value::Nat(x)])
                .unwrap()
                .single()
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn uncurry_rejects_flat_operations() {
        assert!(matches!(
            uncurry_transform(&succ_graph()),
            Err(GraphError::NotCurried(_))
        ));
    }

    #[test]
    fn swap_permutes_inputs() {
        let mut b = GraphBuilder::new("first");
        let x = b.input(nat());
        let y = b.input(TypeExpr::Continuum);
        let c = b.add(
            PrimitiveKind::Const { a: nat(), b: TypeExpr::Continuum },
            &[x],
        );
        let out = b.apply_socket(
            OpSig::plain(vec![TypeExpr::Continuum], vec![nat()]),
            c[0],
            &[y],
        );
        b.output(out[0]);
        let g = b.finish().unwrap();
        let swapped = swap_inputs(&g, &[1, 0]).unwrap();
        assert_eq!(
            swapped.signature().inputs,
            vec![TypeExpr::Continuum, nat()]
        );
    }

    #[test]
    fn compose_is_associative_extensionally() {
        let s = succ_graph();
        let p = prim_to_graph(PrimitiveKind::Pred);
        let left = compose_graphs(&compose_graphs(&s, &s, &[(0, 0)]).unwrap(), &p, &[(0, 0)])
            .unwrap();
        let right = compose_graphs(&s, &compose_graphs(&s, &p, &[(0, 0)]).unwrap(), &[(0, 0)])
            .unwrap();
        for n in 1..=12 {
            let a = evaluate(&left, vec![Value::Nat(n)]).unwrap().single().unwrap();
            let b = evaluate(&right, vec![Value::Nat(n)]).unwrap().single().unwrap();
            assert_eq!(a, b, "n={n}");
        }
    }

    #[test]
    fn curry_of_relation_atom() {
        // Splitting the two-input comparison leaves a condition-valued
        // operation: (N; N -> Types1) becomes N -> (N -> Types1).
        let atom = prim_to_graph(PrimitiveKind::RelAtomOp(crate::rel::RelKind::Greater));
        let curried = curry_transform(&atom, 1).unwrap();
        assert_eq!(
            curried.arrow_type(),
            TypeExpr::arrow1(
                nat(),
                TypeExpr::arrow1(nat(), TypeExpr::Types(1))
            )
        );
    }

    #[test]
    fn linearity_census() {
        // In a checked graph, wire count equals non-port input sockets plus
        // graph outputs, and non-port output sockets plus graph inputs.
        for g in [
            succ_graph(),
            crate::constructions::build_rec(&nat()),
            crate::constructions::build_op_node(&nat()),
        ] {
            assert!(g.check().is_empty());
            let mut non_port_ins = 0;
            let mut non_port_outs = 0;
            for n in &g.nodes {
                if !matches!(n.kind, NodeKind::Input { .. } | NodeKind::Output { .. }) {
                    non_port_ins += n.in_sockets.len();
                    non_port_outs += n.out_sockets.len();
                }
            }
            assert_eq!(g.wires.len(), non_port_ins + g.outputs.len(), "{}", g.name);
            assert_eq!(g.wires.len(), non_port_outs + g.inputs.len(), "{}", g.name);
        }
    }
}
