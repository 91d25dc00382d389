//! The Continuum primitive type: uniform cubical complexes over the unit
//! d-cube, with binary subdivision, deactivation, component uniting, the
//! aggregated black/white adjacency relation, component trees, and the
//! similarity relation.
//!
//! Everything here is purely combinatorial. The grid after `k` subdivisions
//! has `2^k` cells per axis, indexed from 1; active cells are white, the
//! complement is black, and a virtual black frame around the grid is the
//! border component. Two cells are adjacent when they share a face of
//! dimension `d - 1`, i.e. their indices differ by one along exactly one
//! axis.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

pub type Cell = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubicalComplex {
    dim: usize,
    resolution: u32,
    active: BTreeSet<Cell>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContinuumError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cell index {0:?} is outside the {1}^{2} grid")]
    OutOfGrid(Cell, u32, usize),
    #[error("aggregated adjacency is not a tree rooted at the border (possible from dimension 3 up)")]
    NotATree,
}

impl CubicalComplex {
    /// The whole unit cube: resolution 0, one active cell.
    pub fn full(dim: usize) -> Result<CubicalComplex, ContinuumError> {
        if dim == 0 {
            return Err(ContinuumError::ZeroDimension);
        }
        let mut active = BTreeSet::new();
        active.insert(vec![1u32; dim]);
        Ok(CubicalComplex {
            dim,
            resolution: 0,
            active,
        })
    }

    pub fn new(
        dim: usize,
        resolution: u32,
        active: BTreeSet<Cell>,
    ) -> Result<CubicalComplex, ContinuumError> {
        if dim == 0 {
            return Err(ContinuumError::ZeroDimension);
        }
        let side = 1u32 << resolution;
        for cell in &active {
            if cell.len() != dim || cell.iter().any(|&c| c < 1 || c > side) {
                return Err(ContinuumError::OutOfGrid(cell.clone(), side, dim));
            }
        }
        Ok(CubicalComplex {
            dim,
            resolution,
            active,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn side(&self) -> u32 {
        1u32 << self.resolution
    }

    pub fn active_cells(&self) -> &BTreeSet<Cell> {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, cell: &[u32]) -> bool {
        self.active.contains(cell)
    }

    /// Divide every cell into `2^dim` equal children; the grid doubles per
    /// axis and each active cell becomes `2^dim` active children.
    pub fn subdivide(&self) -> CubicalComplex {
        let mut active = BTreeSet::new();
        for cell in &self.active {
            let mut children = vec![Vec::with_capacity(self.dim)];
            for &c in cell {
                let mut next = Vec::with_capacity(children.len() * 2);
                for base in children {
                    for off in [0u32, 1] {
                        let mut child = base.clone();
                        child.push(2 * c - 1 + off);
                        next.push(child);
                    }
                }
                children = next;
            }
            active.extend(children);
        }
        CubicalComplex {
            dim: self.dim,
            resolution: self.resolution + 1,
            active,
        }
    }

    /// Remove cells from the active set; removing an already-inactive cell
    /// is a no-op. Deactivation is irreversible within one object.
    pub fn deactivate(&self, cells: &BTreeSet<Cell>) -> Result<CubicalComplex, ContinuumError> {
        let side = self.side();
        for cell in cells {
            if cell.len() != self.dim || cell.iter().any(|&c| c < 1 || c > side) {
                return Err(ContinuumError::OutOfGrid(cell.clone(), side, self.dim));
            }
        }
        let active = self.active.difference(cells).cloned().collect();
        Ok(CubicalComplex {
            dim: self.dim,
            resolution: self.resolution,
            active,
        })
    }

    fn neighbors(&self, cell: &[u32]) -> Vec<Cell> {
        let side = self.side();
        let mut out = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            if cell[axis] > 1 {
                let mut c = cell.to_vec();
                c[axis] -= 1;
                out.push(c);
            }
            if cell[axis] < side {
                let mut c = cell.to_vec();
                c[axis] += 1;
                out.push(c);
            }
        }
        out
    }

    fn touches_boundary(&self, cell: &[u32]) -> bool {
        let side = self.side();
        cell.iter().any(|&c| c == 1 || c == side)
    }
}

/// Result of uniting all adjacent parts: connected components of the white
/// cells and of the black cells, the latter with the outer border merged in
/// as one distinguished component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub white: Vec<BTreeSet<Cell>>,
    pub black: Vec<BTreeSet<Cell>>,
    /// Index into `black` of the component containing the border. That
    /// component may hold no in-grid cells at all.
    pub border: usize,
}

impl ComponentLabeling {
    pub fn white_count(&self) -> usize {
        self.white.len()
    }

    pub fn black_count(&self) -> usize {
        self.black.len()
    }

    pub fn white_label(&self, cell: &[u32]) -> Option<usize> {
        self.white.iter().position(|c| c.contains(cell))
    }

    pub fn black_label(&self, cell: &[u32]) -> Option<usize> {
        self.black.iter().position(|c| c.contains(cell))
    }
}

fn flood(seed: &Cell, pool: &mut BTreeSet<Cell>, c: &CubicalComplex) -> BTreeSet<Cell> {
    let mut comp = BTreeSet::new();
    let mut queue = VecDeque::new();
    pool.remove(seed);
    comp.insert(seed.clone());
    queue.push_back(seed.clone());
    while let Some(cell) = queue.pop_front() {
        for nb in c.neighbors(&cell) {
            if pool.remove(&nb) {
                comp.insert(nb.clone());
                queue.push_back(nb);
            }
        }
    }
    comp
}

/// Unite all adjacent parts of the complex and of its dual. Components are
/// listed in first-cell order; black components touching the grid boundary
/// are merged into the border component, which always exists.
pub fn unite(c: &CubicalComplex) -> ComponentLabeling {
    let mut white = Vec::new();
    let mut pool = c.active.clone();
    while let Some(seed) = pool.iter().next().cloned() {
        white.push(flood(&seed, &mut pool, c));
    }

    let mut complement: BTreeSet<Cell> = BTreeSet::new();
    let side = c.side();
    let mut stack: Vec<Cell> = vec![Vec::new()];
    for _ in 0..c.dim {
        let mut next = Vec::new();
        for base in stack {
            for coord in 1..=side {
                let mut cell = base.clone();
                cell.push(coord);
                next.push(cell);
            }
        }
        stack = next;
    }
    for cell in stack {
        if !c.active.contains(&cell) {
            complement.insert(cell);
        }
    }

    let mut raw_black = Vec::new();
    let mut pool = complement;
    while let Some(seed) = pool.iter().next().cloned() {
        raw_black.push(flood(&seed, &mut pool, c));
    }
    // The virtual frame is one black seed region; every in-grid black
    // component touching the boundary is part of it.
    let mut border_cells = BTreeSet::new();
    let mut black = Vec::new();
    for comp in raw_black {
        if comp.iter().any(|cell| c.touches_boundary(cell)) {
            border_cells.extend(comp);
        } else {
            black.push(comp);
        }
    }
    let border = black.len();
    black.push(border_cells);
    ComponentLabeling {
        white,
        black,
        border,
    }
}

/// The aggregated adjacency relation between white components and black
/// components (border included): an edge whenever some white cell of one
/// shares a (d-1)-face with some black cell of the other, or lies on the
/// grid boundary (adjacent to the frame).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyRelation {
    pub white_count: usize,
    pub black_count: usize,
    pub border: usize,
    /// Edges as (white index, black index).
    pub edges: BTreeSet<(usize, usize)>,
}

pub fn aggregate_adjacency(c: &CubicalComplex, l: &ComponentLabeling) -> AdjacencyRelation {
    let mut white_of: BTreeMap<&Cell, usize> = BTreeMap::new();
    for (i, comp) in l.white.iter().enumerate() {
        for cell in comp {
            white_of.insert(cell, i);
        }
    }
    let mut black_of: BTreeMap<&Cell, usize> = BTreeMap::new();
    for (i, comp) in l.black.iter().enumerate() {
        for cell in comp {
            black_of.insert(cell, i);
        }
    }
    let mut edges = BTreeSet::new();
    for (i, comp) in l.white.iter().enumerate() {
        for cell in comp {
            if c.touches_boundary(cell) {
                edges.insert((i, l.border));
            }
            for nb in c.neighbors(cell) {
                if let Some(&b) = black_of.get(&nb) {
                    edges.insert((i, b));
                }
            }
        }
    }
    AdjacencyRelation {
        white_count: l.white.len(),
        black_count: l.black.len(),
        border: l.border,
        edges,
    }
}

/// The aggregated relation rooted at the border component, when it is a
/// tree: alternating black/white levels, root black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub color: Color,
    /// Component index within its color class.
    pub component: usize,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

pub fn component_tree(r: &AdjacencyRelation) -> Result<ComponentTree, ContinuumError> {
    let n = r.white_count + r.black_count;
    // Node ids: blacks first, then whites.
    let black_id = |b: usize| b;
    let white_id = |w: usize| r.black_count + w;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(w, b) in &r.edges {
        adj[white_id(w)].push(black_id(b));
        adj[black_id(b)].push(white_id(w));
    }
    // A tree has exactly nodes - 1 edges and is connected from the root.
    if r.edges.len() + 1 != n {
        return Err(ContinuumError::NotATree);
    }
    let root = black_id(r.border);
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen[root] = true;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    if order.len() != n {
        return Err(ContinuumError::NotATree);
    }
    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|v| TreeNode {
            color: if v < r.black_count {
                Color::Black
            } else {
                Color::White
            },
            component: if v < r.black_count {
                v
            } else {
                v - r.black_count
            },
            children: Vec::new(),
        })
        .collect();
    for v in 0..n {
        if v != root && parent[v] != usize::MAX {
            nodes[parent[v]].children.push(v);
        }
    }
    Ok(ComponentTree { nodes, root })
}

/// Canonical encoding of the rooted unordered tree: children encodings are
/// sorted, so two trees are isomorphic exactly when their strings match.
pub fn canonical_tree_string(t: &ComponentTree) -> String {
    fn enc(t: &ComponentTree, v: usize) -> String {
        let mut parts: Vec<String> = t.nodes[v].children.iter().map(|&c| enc(t, c)).collect();
        parts.sort();
        let tag = match t.nodes[v].color {
            Color::Black => 'b',
            Color::White => 'w',
        };
        format!("{tag}({})", parts.join(""))
    }
    enc(t, t.root)
}

/// Similarity: isomorphism of the aggregated adjacency relations, colors
/// and border marking respected. Tree-shaped relations (always, in
/// dimension 2) compare by canonical form; otherwise a small backtracking
/// matcher decides colored-graph isomorphism.
pub fn similar(c1: &CubicalComplex, c2: &CubicalComplex) -> bool {
    let r1 = aggregate_adjacency(c1, &unite(c1));
    let r2 = aggregate_adjacency(c2, &unite(c2));
    match (component_tree(&r1), component_tree(&r2)) {
        (Ok(t1), Ok(t2)) => canonical_tree_string(&t1) == canonical_tree_string(&t2),
        (Err(_), Err(_)) => relations_isomorphic(&r1, &r2),
        _ => false,
    }
}

/// Backtracking bipartite-graph isomorphism with the border pinned.
fn relations_isomorphic(r1: &AdjacencyRelation, r2: &AdjacencyRelation) -> bool {
    if r1.white_count != r2.white_count
        || r1.black_count != r2.black_count
        || r1.edges.len() != r2.edges.len()
    {
        return false;
    }
    let wn = r1.white_count;
    let bn = r1.black_count;
    // Adjacency matrices keyed by (white, black).
    let has1: BTreeSet<(usize, usize)> = r1.edges.clone();
    let has2: BTreeSet<(usize, usize)> = r2.edges.clone();

    #[allow(clippy::too_many_arguments)]
    fn extend(
        wn: usize,
        bn: usize,
        has1: &BTreeSet<(usize, usize)>,
        has2: &BTreeSet<(usize, usize)>,
        wmap: &mut Vec<Option<usize>>,
        bmap: &mut Vec<Option<usize>>,
        used_w: &mut Vec<bool>,
        used_b: &mut Vec<bool>,
    ) -> bool {
        if let Some(w) = (0..wn).find(|&w| wmap[w].is_none()) {
            for cand in 0..wn {
                if used_w[cand] {
                    continue;
                }
                wmap[w] = Some(cand);
                used_w[cand] = true;
                let consistent = (0..bn).all(|b| match bmap[b] {
                    Some(bc) => has1.contains(&(w, b)) == has2.contains(&(cand, bc)),
                    None => true,
                });
                if consistent && extend(wn, bn, has1, has2, wmap, bmap, used_w, used_b) {
                    return true;
                }
                wmap[w] = None;
                used_w[cand] = false;
            }
            return false;
        }
        if let Some(b) = (0..bn).find(|&b| bmap[b].is_none()) {
            for cand in 0..bn {
                if used_b[cand] {
                    continue;
                }
                bmap[b] = Some(cand);
                used_b[cand] = true;
                let consistent = (0..wn).all(|w| match wmap[w] {
                    Some(wc) => has1.contains(&(w, b)) == has2.contains(&(wc, cand)),
                    None => true,
                });
                if consistent && extend(wn, bn, has1, has2, wmap, bmap, used_w, used_b) {
                    return true;
                }
                bmap[b] = None;
                used_b[cand] = false;
            }
            return false;
        }
        true
    }

    let mut wmap = vec![None; wn];
    let mut bmap = vec![None; bn];
    let mut used_w = vec![false; wn];
    let mut used_b = vec![false; bn];
    bmap[r1.border] = Some(r2.border);
    used_b[r2.border] = true;
    extend(wn, bn, &has1, &has2, &mut wmap, &mut bmap, &mut used_w, &mut used_b)
}

impl fmt::Display for CubicalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "continuum dim={} res={} active={}",
            self.dim,
            self.resolution,
            self.active.len()
        )
    }
}
