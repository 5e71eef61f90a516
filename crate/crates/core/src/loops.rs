//! Colorings of a patch and the combinatorics built on them: loop
//! ensembles, exploration paths and trees, the inverse map from
//! branch-separated trees back to colorings, boundary paths, renewal
//! times, random loop orientations and height functions.
//!
//! Turn convention: when the edge just traversed points to a black face the
//! exploration turns right, otherwise left. Black faces then stay on the left
//! of the exploration, loops are oriented with black on their left, and tree
//! paths run counter-clockwise around loops with black inside.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::hexgrid::{direction_change, turn_direction, FaceCoord, FaceRef, HexPatch, LatticeVertex, PatchError, TurnDir};
use crate::rng::{rng_from_seed, skew_sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Black,
    White,
}

/// Colors of the faces outside the patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    AllWhiteOutside,
    /// Outside faces bordering the clockwise boundary arc from `a` to `b` are black.
    ChordalArc { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ColoringError {
    #[error("face index {0} out of range")]
    FaceOutOfRange(usize),
    #[error("expected {expected} face colors, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("chordal arc endpoint {0} is not a degree-two boundary vertex")]
    InvalidArcEndpoint(usize),
    #[error("chordal arc endpoints coincide")]
    DegenerateArc,
    #[error("outside colors do not form exactly two arcs")]
    InvalidBoundaryCondition,
    #[error("tree is not a spanning tree of the patch rooted at its root")]
    NotSpanningTree,
    #[error("tree is not branch-separated")]
    NotBranchSeparated,
    #[error("boundary path target {0} is invalid")]
    InvalidTarget(usize),
    #[error("loop intervals along the boundary path are not nested")]
    IntervalNesting,
    #[error(transparent)]
    Patch(#[from] PatchError),
}

/// A set of black faces in a patch together with the outside colors.
#[derive(Clone, Debug)]
pub struct Coloring<'p> {
    patch: &'p HexPatch,
    black: Vec<bool>,
    boundary: BoundaryCondition,
    outside_black: BTreeSet<FaceCoord>,
}

impl<'p> Coloring<'p> {
    pub fn new(patch: &'p HexPatch, black: Vec<bool>, boundary: BoundaryCondition) -> Result<Self, ColoringError> {
        if black.len() != patch.num_faces() {
            return Err(ColoringError::WrongLength { expected: patch.num_faces(), got: black.len() });
        }
        let outside_black = outside_black_faces(patch, boundary)?;
        Ok(Coloring { patch, black, boundary, outside_black })
    }

    pub fn all_white(patch: &'p HexPatch) -> Self {
        Coloring {
            patch,
            black: vec![false; patch.num_faces()],
            boundary: BoundaryCondition::AllWhiteOutside,
            outside_black: BTreeSet::new(),
        }
    }

    pub fn from_faces(patch: &'p HexPatch, faces: &[usize], boundary: BoundaryCondition) -> Result<Self, ColoringError> {
        let mut black = vec![false; patch.num_faces()];
        for &f in faces {
            *black.get_mut(f).ok_or(ColoringError::FaceOutOfRange(f))? = true;
        }
        Coloring::new(patch, black, boundary)
    }

    /// Bit `i` of `mask` colors face `i` black.
    pub fn from_mask(patch: &'p HexPatch, mask: u64, boundary: BoundaryCondition) -> Result<Self, ColoringError> {
        let black = (0..patch.num_faces()).map(|i| i < 64 && (mask >> i) & 1 == 1).collect();
        Coloring::new(patch, black, boundary)
    }

    pub fn with_boundary(&self, boundary: BoundaryCondition) -> Result<Self, ColoringError> {
        Coloring::new(self.patch, self.black.clone(), boundary)
    }

    /// The same black set on a re-rooted copy of the patch.
    pub fn on_patch<'q>(&self, patch: &'q HexPatch) -> Result<Coloring<'q>, ColoringError> {
        Coloring::new(patch, self.black.clone(), self.boundary)
    }

    pub fn patch(&self) -> &'p HexPatch {
        self.patch
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn black(&self) -> &[bool] {
        &self.black
    }

    pub fn black_faces(&self) -> Vec<usize> {
        (0..self.black.len()).filter(|&i| self.black[i]).collect()
    }

    pub fn mask(&self) -> u64 {
        self.black.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn set_face(&mut self, face: usize, black: bool) {
        self.black[face] = black;
    }

    pub fn is_black(&self, f: FaceRef) -> bool {
        match f {
            FaceRef::Inside(i) => self.black[i],
            FaceRef::Outside(c) => self.outside_black.contains(&c),
        }
    }

    pub fn color(&self, f: FaceRef) -> Color {
        if self.is_black(f) {
            Color::Black
        } else {
            Color::White
        }
    }

    /// Whether the patch edge `u - v` separates a black face from a white one.
    pub fn is_separating(&self, u: usize, v: usize) -> bool {
        self.is_black(self.patch.left_face(u, v)) != self.is_black(self.patch.right_face(u, v))
    }

    /// Turn the color rule asks for after traversing `prev -> cur`.
    pub fn preferred_turn(&self, prev: LatticeVertex, cur: usize) -> TurnDir {
        if self.is_black(self.patch.pointed_face(prev, self.patch.vertex(cur))) {
            TurnDir::Right
        } else {
            TurnDir::Left
        }
    }
}

fn outside_black_faces(patch: &HexPatch, boundary: BoundaryCondition) -> Result<BTreeSet<FaceCoord>, ColoringError> {
    let (a, b) = match boundary {
        BoundaryCondition::AllWhiteOutside => return Ok(BTreeSet::new()),
        BoundaryCondition::ChordalArc { a, b } => (a, b),
    };
    let pos = |v: usize| {
        if v < patch.num_vertices() && patch.degree(v) == 2 {
            patch.boundary_position(v).ok_or(ColoringError::InvalidArcEndpoint(v))
        } else {
            Err(ColoringError::InvalidArcEndpoint(v))
        }
    };
    let (pa, pb) = (pos(a)?, pos(b)?);
    if pa == pb {
        return Err(ColoringError::DegenerateArc);
    }
    let cyc = patch.boundary_cycle();
    let n = cyc.len();
    // Counter-clockwise edge i runs cyc[i] -> cyc[i+1]; the clockwise arc from a to b
    // uses the counter-clockwise edges from position pb up to position pa.
    let mut on_arc = vec![false; n];
    let mut i = pb;
    while i != pa {
        on_arc[i] = true;
        i = (i + 1) % n;
    }
    let outside = |i: usize| match patch.right_face(cyc[i], cyc[(i + 1) % n]) {
        FaceRef::Outside(c) => c,
        FaceRef::Inside(_) => unreachable!("boundary edges have an outside face on the right"),
    };
    let black: BTreeSet<FaceCoord> = (0..n).filter(|&i| on_arc[i]).map(outside).collect();
    let changes = (0..n)
        .filter(|&i| black.contains(&outside(i)) != black.contains(&outside((i + 1) % n)))
        .count();
    if changes != 2 {
        return Err(ColoringError::InvalidBoundaryCondition);
    }
    Ok(black)
}

/// A closed interface, as a cyclic vertex sequence oriented with black on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub vertices: Vec<usize>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges in traversal order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopEnsemble {
    pub loops: Vec<Loop>,
    /// Open interface between the two color-change points under a chordal boundary condition.
    pub chordal_path: Option<Vec<usize>>,
}

impl LoopEnsemble {
    /// Number of loops, not counting the chordal path.
    pub fn num_loops(&self) -> usize {
        self.loops.len()
    }

    /// Total number of interface edges, chordal path included.
    pub fn total_length(&self) -> usize {
        self.loops.iter().map(Loop::len).sum::<usize>() + self.chordal_path.as_ref().map_or(0, |p| p.len() - 1)
    }
}

/// All black/white interfaces of a coloring.
pub fn loops_from_coloring(c: &Coloring) -> LoopEnsemble {
    let p = c.patch();
    let nv = p.num_vertices();
    let mut succ = vec![None; nv];
    let mut has_pred = vec![false; nv];
    for &(a, b) in p.edges() {
        let la = c.is_black(p.left_face(a, b));
        let ra = c.is_black(p.right_face(a, b));
        if la != ra {
            let (u, v) = if la { (a, b) } else { (b, a) };
            succ[u] = Some(v);
            has_pred[v] = true;
        }
    }
    let mut used = vec![false; nv];
    let mut chordal_path = None;
    for v in 0..nv {
        if succ[v].is_some() && !has_pred[v] {
            let mut path = vec![v];
            used[v] = true;
            let mut cur = v;
            while let Some(w) = succ[cur] {
                path.push(w);
                used[w] = true;
                cur = w;
            }
            chordal_path = Some(path);
        }
    }
    let mut loops = Vec::new();
    for v in 0..nv {
        if used[v] || succ[v].is_none() {
            continue;
        }
        let mut verts = vec![v];
        used[v] = true;
        let mut cur = succ[v].unwrap();
        while cur != v {
            verts.push(cur);
            used[cur] = true;
            cur = succ[cur].expect("interfaces close up");
        }
        loops.push(Loop { vertices: verts });
    }
    LoopEnsemble { loops, chordal_path }
}

/// A turn taken by the exploration; forced turns go against the color rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Turn {
    Left,
    Right,
    ForcedLeft,
    ForcedRight,
}

impl Turn {
    fn new(dir: TurnDir, preferred: TurnDir) -> Turn {
        match (dir, dir == preferred) {
            (TurnDir::Left, true) => Turn::Left,
            (TurnDir::Right, true) => Turn::Right,
            (TurnDir::Left, false) => Turn::ForcedLeft,
            (TurnDir::Right, false) => Turn::ForcedRight,
        }
    }

    /// Geometric direction, regardless of whether the turn was forced.
    pub fn direction(self) -> TurnDir {
        match self {
            Turn::Left | Turn::ForcedLeft => TurnDir::Left,
            Turn::Right | Turn::ForcedRight => TurnDir::Right,
        }
    }

    pub fn is_forced(self) -> bool {
        matches!(self, Turn::ForcedLeft | Turn::ForcedRight)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationPath {
    pub vertices: Vec<usize>,
    /// `turns[k]` is the turn taken at `vertices[k]`.
    pub turns: Vec<Turn>,
}

/// Vertices reachable from `target` through unvisited vertices.
fn reachable(p: &HexPatch, target: usize, visited: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; p.num_vertices()];
    if visited[target] {
        return seen;
    }
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &w in p.neighbors(v) {
            if !visited[w] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// The exploration path from the root to `target`.
///
/// Panics if `target` is not a vertex of the patch.
pub fn exploration_path(c: &Coloring, target: usize) -> ExplorationPath {
    let p = c.patch();
    assert!(target < p.num_vertices(), "target out of range");
    let mut visited = vec![false; p.num_vertices()];
    let mut cur = p.root();
    visited[cur] = true;
    let mut prev = p.entry_tail();
    let mut vertices = vec![cur];
    let mut turns = Vec::new();
    while cur != target {
        let ok = reachable(p, target, &visited);
        let preferred = c.preferred_turn(prev, cur);
        let mut chosen = None;
        for dir in [preferred, preferred.opposite()] {
            if let Some(w) = p.step(prev, cur, dir) {
                if ok[w] {
                    chosen = Some((dir, w));
                    break;
                }
            }
        }
        let (dir, w) = chosen.expect("target stays reachable from the current vertex");
        turns.push(Turn::new(dir, preferred));
        visited[w] = true;
        prev = p.vertex(cur);
        cur = w;
        vertices.push(w);
    }
    ExplorationPath { vertices, turns }
}

/// A spanning tree given by parent links, rooted at the patch root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
}

impl RootedTree {
    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    /// Checks that the links form a spanning tree of `patch` rooted at its root.
    pub fn validate(&self, patch: &HexPatch) -> Result<(), ColoringError> {
        let n = patch.num_vertices();
        if self.parent.len() != n || self.root != patch.root() || self.parent[self.root].is_some() {
            return Err(ColoringError::NotSpanningTree);
        }
        for v in 0..n {
            if v == self.root {
                continue;
            }
            match self.parent[v] {
                Some(u) if u < n && patch.has_edge(u, v) => {}
                _ => return Err(ColoringError::NotSpanningTree),
            }
            // Walking up must reach the root within n steps.
            let mut cur = v;
            let mut steps = 0;
            while let Some(u) = self.parent[cur] {
                cur = u;
                steps += 1;
                if steps > n {
                    return Err(ColoringError::NotSpanningTree);
                }
            }
        }
        Ok(())
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(u) = p {
                ch[*u].push(v);
            }
        }
        ch
    }

    pub fn depths(&self) -> Vec<usize> {
        (0..self.parent.len())
            .map(|v| {
                let mut d = 0;
                let mut cur = v;
                while let Some(u) = self.parent[cur] {
                    d += 1;
                    cur = u;
                }
                d
            })
            .collect()
    }

    /// Whether `a` is `b` or an ancestor of `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match self.parent[cur] {
                Some(u) => cur = u,
                None => return false,
            }
        }
    }

    /// Vertices from the root to `v`.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(u) = self.parent[cur] {
            path.push(u);
            cur = u;
        }
        path.reverse();
        path
    }

    /// Undirected tree edges as `(min, max)`.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|u| (u.min(v), u.max(v))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPoint {
    pub vertex: usize,
    /// The child reached by turning in the direction the color rule asks for.
    pub proper_child: usize,
    pub other_child: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationTree {
    pub tree: RootedTree,
    /// Turn taken at the parent to arrive at each vertex; `None` at the root.
    pub turn: Vec<Option<Turn>>,
    /// Discovery index of each vertex; realizes the tree order.
    pub order: Vec<usize>,
    pub branch_points: Vec<BranchPoint>,
}

/// Depth-first exploration tree: at each vertex the preferred turn is explored first.
pub fn exploration_tree(c: &Coloring) -> ExplorationTree {
    let p = c.patch();
    let n = p.num_vertices();
    let root = p.root();
    let mut parent = vec![None; n];
    let mut turn = vec![None; n];
    let mut order = vec![usize::MAX; n];
    let mut branch_points = Vec::new();
    let mut next = 0;
    order[root] = next;
    next += 1;

    struct Frame {
        v: usize,
        options: [Option<(TurnDir, usize)>; 2],
        preferred: TurnDir,
        idx: usize,
        children: Vec<usize>,
    }
    let frame = |v: usize, prev: LatticeVertex| {
        let preferred = c.preferred_turn(prev, v);
        let options = [preferred, preferred.opposite()].map(|d| p.step(prev, v, d).map(|w| (d, w)));
        Frame { v, options, preferred, idx: 0, children: Vec::new() }
    };
    let mut stack = vec![frame(root, p.entry_tail())];
    while let Some(top) = stack.last_mut() {
        if top.idx < 2 {
            let opt = top.options[top.idx];
            top.idx += 1;
            if let Some((dir, w)) = opt {
                if order[w] == usize::MAX {
                    order[w] = next;
                    next += 1;
                    parent[w] = Some(top.v);
                    turn[w] = Some(Turn::new(dir, top.preferred));
                    top.children.push(w);
                    let prev = p.vertex(top.v);
                    stack.push(frame(w, prev));
                }
            }
        } else {
            let done = stack.pop().unwrap();
            if done.children.len() == 2 {
                branch_points.push(BranchPoint {
                    vertex: done.v,
                    proper_child: done.children[0],
                    other_child: done.children[1],
                });
            }
        }
    }
    branch_points.sort_by_key(|b| order[b.vertex]);
    ExplorationTree { tree: RootedTree { root, parent }, turn, order, branch_points }
}

/// Whether every patch edge joins two vertices on a common root path.
///
/// A spanning tree has this property exactly when every connected vertex set has
/// a unique minimal vertex in the tree order, and exactly when the local
/// branching criterion of [`is_branch_separated_local`] holds.
pub fn is_branch_separated(patch: &HexPatch, t: &RootedTree) -> bool {
    patch
        .edges()
        .iter()
        .all(|&(a, b)| t.is_ancestor(a, b) || t.is_ancestor(b, a))
}

/// Local criterion: whenever a vertex has two children, the two children lie in
/// different components of the patch with the root path to that vertex removed.
pub fn is_branch_separated_local(patch: &HexPatch, t: &RootedTree) -> bool {
    let children = t.children();
    for (v, ch) in children.iter().enumerate() {
        if ch.len() < 2 {
            continue;
        }
        let mut removed = vec![false; patch.num_vertices()];
        for u in t.path_to(v) {
            removed[u] = true;
        }
        let comp = reachable(patch, ch[0], &removed);
        if comp[ch[1]] {
            return false;
        }
    }
    true
}

/// Exhaustive check over all connected vertex subsets; only for `|V| <= 16`.
pub fn is_branch_separated_exhaustive(patch: &HexPatch, t: &RootedTree) -> Option<bool> {
    let n = patch.num_vertices();
    if n > 16 {
        return None;
    }
    let is_connected = |mask: u32| {
        let start = mask.trailing_zeros() as usize;
        let mut seen = 1u32 << start;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in patch.neighbors(v) {
                if mask & (1 << w) != 0 && seen & (1 << w) == 0 {
                    seen |= 1 << w;
                    stack.push(w);
                }
            }
        }
        seen == mask
    };
    for mask in 1u32..(1u32 << n) {
        if !is_connected(mask) {
            continue;
        }
        // A unique minimal vertex is an ancestor of every member.
        let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let has_min = members.iter().any(|&m| members.iter().all(|&x| t.is_ancestor(m, x)));
        if !has_min {
            return Some(false);
        }
    }
    Some(true)
}

fn geometric_turn(p: &HexPatch, t: &RootedTree, v: usize, next: usize) -> TurnDir {
    turn_direction(p.lattice_prev(t.parent[v]), p.vertex(v), p.vertex(next))
}

/// Recover the coloring whose exploration tree is `t` (outside colored white).
pub fn coloring_from_tree<'p>(patch: &'p HexPatch, t: &RootedTree) -> Result<Coloring<'p>, ColoringError> {
    t.validate(patch)?;
    if !is_branch_separated(patch, t) {
        return Err(ColoringError::NotBranchSeparated);
    }
    let depth = t.depths();
    let mut black = vec![false; patch.num_faces()];
    for (f, slot) in black.iter_mut().enumerate() {
        let mut verts = patch.face_vertices(f).to_vec();
        verts.sort_by_key(|&v| depth[v]);
        let (v, w) = (verts[0], verts[1]);
        // The child of v on the way to w.
        let mut cur = w;
        while t.parent[cur] != Some(v) {
            cur = t.parent[cur].expect("v is an ancestor of w");
        }
        *slot = geometric_turn(patch, t, v, cur) == TurnDir::Right;
    }
    Coloring::new(patch, black, BoundaryCondition::AllWhiteOutside)
}

/// Reconstruct the exploration path to a boundary vertex from the loops of an
/// all-white-outside coloring.
///
/// `P` is the clockwise boundary path from the root to `target`. Loops sharing
/// edges with `P` are spliced in along their arcs that avoid `P`, for the
/// maximal intervals of `P` they span.
pub fn boundary_path_from_loops(c: &Coloring, e: &LoopEnsemble, target: usize) -> Result<Vec<usize>, ColoringError> {
    let p = c.patch();
    let root = p.root();
    let tpos = p.boundary_position(target).ok_or(ColoringError::InvalidTarget(target))?;
    if target == root {
        return Err(ColoringError::InvalidTarget(target));
    }
    let cyc = p.boundary_cycle();
    let n = cyc.len();
    let mut path = vec![root];
    let mut i = p.root_position();
    while i != tpos {
        i = (i + n - 1) % n;
        path.push(cyc[i]);
    }
    let index_on_path = |v: usize| path.iter().position(|&x| x == v);
    let path_edges: BTreeSet<(usize, usize)> = path.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();

    // Interval [first, last] of path positions for every loop sharing an edge with P.
    let mut intervals = Vec::new();
    for (li, l) in e.loops.iter().enumerate() {
        let shares = l.edges().any(|(a, b)| path_edges.contains(&(a.min(b), a.max(b))));
        if !shares {
            continue;
        }
        let pos: Vec<usize> = l.vertices.iter().filter_map(|&v| index_on_path(v)).collect();
        let (lo, hi) = (*pos.iter().min().unwrap(), *pos.iter().max().unwrap());
        intervals.push((lo, hi, li));
    }
    // Maximal intervals must be disjoint in their interiors.
    let maximal: Vec<(usize, usize, usize)> = intervals
        .iter()
        .copied()
        .filter(|&(lo, hi, li)| !intervals.iter().any(|&(l2, h2, lj)| lj != li && l2 <= lo && hi <= h2))
        .collect();
    let mut sorted = maximal.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(ColoringError::IntervalNesting);
        }
    }

    let mut q = vec![root];
    let mut k = 0;
    let mut iv = sorted.iter().peekable();
    while k + 1 < path.len() {
        if let Some(&&(lo, hi, li)) = iv.peek() {
            if lo == k {
                let arc = loop_arc_avoiding(&e.loops[li], path[lo], path[hi], &path_edges)
                    .ok_or(ColoringError::IntervalNesting)?;
                q.extend_from_slice(&arc[1..]);
                k = hi;
                iv.next();
                continue;
            }
        }
        q.push(path[k + 1]);
        k += 1;
    }
    Ok(q)
}

/// The part of a loop from `from` to `to` (in either direction) that uses no edges of `avoid`.
fn loop_arc_avoiding(l: &Loop, from: usize, to: usize, avoid: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let n = l.len();
    let s = l.vertices.iter().position(|&v| v == from)?;
    for step in [1, n - 1] {
        let mut arc = vec![from];
        let mut i = s;
        let mut ok = true;
        while l.vertices[i] != to {
            let j = (i + step) % n;
            let (a, b) = (l.vertices[i], l.vertices[j]);
            if avoid.contains(&(a.min(b), a.max(b))) {
                ok = false;
                break;
            }
            arc.push(b);
            i = j;
        }
        if ok {
            return Some(arc);
        }
    }
    None
}

/// Renewal steps of the exploration path to `target` and the interface
/// excursions between consecutive renewals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenewalDecomposition {
    /// Steps `k` (indices into the path) at which the remaining domain has monochromatic boundary.
    pub times: Vec<usize>,
    /// `excursions[i]` lists the separating path edges between `times[i]` and `times[i + 1]`.
    pub excursions: Vec<Vec<(usize, usize)>>,
}

pub fn renewal_times(c: &Coloring, target: usize) -> RenewalDecomposition {
    let p = c.patch();
    let path = exploration_path(c, target);
    let verts = &path.vertices;
    let kmax = verts.len() - 1;
    let tail_of = |j: usize| if j == 0 { p.entry_tail() } else { p.vertex(verts[j - 1]) };
    let mut determined = vec![false; p.num_faces()];
    let mut times = Vec::new();
    for k in 0..=kmax {
        if k > 0 {
            // Reaching v_k reveals the face pointed at by the edge into v_{k-1}.
            if let FaceRef::Inside(f) = p.pointed_face(tail_of(k - 1), p.vertex(verts[k - 1])) {
                if !path.turns[k - 1].is_forced() {
                    determined[f] = true;
                }
            }
        }
        if k == kmax || remaining_boundary_monochromatic(c, &determined, target, tail_of(k), verts[k]) {
            times.push(k);
        }
    }
    let mut excursions = Vec::new();
    for w in times.windows(2) {
        let ex = (w[0] + 1..=w[1])
            .map(|j| (verts[j - 1], verts[j]))
            .filter(|&(a, b)| c.is_separating(a, b))
            .collect();
        excursions.push(ex);
    }
    RenewalDecomposition { times, excursions }
}

fn remaining_boundary_monochromatic(c: &Coloring, determined: &[bool], target: usize, tail: LatticeVertex, head: usize) -> bool {
    let p = c.patch();
    let nf = p.num_faces();
    let mut in_g = vec![false; nf];
    let mut queue: VecDeque<usize> = p.faces_at(target).filter(|&f| !determined[f]).collect();
    for &f in &queue {
        in_g[f] = true;
    }
    while let Some(f) = queue.pop_front() {
        for g in p.face_neighbors(f) {
            if !determined[g] && !in_g[g] {
                in_g[g] = true;
                queue.push_back(g);
            }
        }
    }
    let mut colors = BTreeSet::new();
    if in_g.iter().any(|&b| b) {
        for f in (0..nf).filter(|&f| in_g[f]) {
            for nb in p.face(f).neighbors() {
                let r = p.face_ref(nb);
                if let FaceRef::Inside(g) = r {
                    if in_g[g] {
                        continue;
                    }
                }
                colors.insert(c.is_black(r));
            }
        }
    } else {
        let (a, b) = (tail, p.vertex(head));
        colors.insert(c.is_black(p.face_ref(crate::hexgrid::left_face(a, b))));
        colors.insert(c.is_black(p.face_ref(crate::hexgrid::right_face(a, b))));
    }
    colors.len() <= 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

impl Orientation {
    fn flip(self) -> Orientation {
        match self {
            Orientation::Clockwise => Orientation::CounterClockwise,
            Orientation::CounterClockwise => Orientation::Clockwise,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopOrientation {
    pub loops: Vec<Orientation>,
    /// Smallest enclosing loop of each loop.
    pub parent: Vec<Option<usize>>,
    /// Orientation of every patch vertex not on a loop or the chordal path.
    pub isolated: Vec<(usize, Orientation)>,
}

fn polygon(p: &HexPatch, verts: &[usize]) -> Vec<(f64, f64)> {
    verts.iter().map(|&v| p.position(v)).collect()
}

fn signed_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum::<f64>()
}

fn point_in_polygon(pt: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.1 > pt.1) != (b.1 > pt.1) && pt.0 < (b.0 - a.0) * (pt.1 - a.1) / (b.1 - a.1) + a.0 {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Random orientations: outermost loops are counter-clockwise with probability
/// `(1 + beta) / 2`, and every other loop (and isolated vertex) copies the
/// orientation of its smallest enclosing loop with probability `(1 - beta) / 2`.
/// Vertices outside all loops use clockwise as their reference.
pub fn orient_loops(patch: &HexPatch, e: &LoopEnsemble, beta: f64, seed: u64) -> LoopOrientation {
    let mut rng = rng_from_seed(seed);
    let polys: Vec<Vec<(f64, f64)>> = e.loops.iter().map(|l| polygon(patch, &l.vertices)).collect();
    let areas: Vec<f64> = polys.iter().map(|q| signed_area(q).abs()).collect();
    let enclosing = |pt: (f64, f64), skip: Option<usize>| {
        (0..polys.len())
            .filter(|&j| Some(j) != skip && point_in_polygon(pt, &polys[j]))
            .min_by(|&a, &b| areas[a].total_cmp(&areas[b]))
    };
    let parent: Vec<Option<usize>> = (0..e.loops.len())
        .map(|i| {
            // Nudge toward the loop's centroid-free interior test: a vertex of loop i
            // lies strictly inside or outside every other loop.
            enclosing(patch.position(e.loops[i].vertices[0]), Some(i))
        })
        .collect();
    let mut by_area: Vec<usize> = (0..e.loops.len()).collect();
    by_area.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]));
    let mut orient = vec![Orientation::CounterClockwise; e.loops.len()];
    let copy_or_flip = |reference: Orientation, rng: &mut crate::rng::SimRng| {
        // Same as reference with probability (1 - beta)/2.
        if skew_sign(rng, -beta) > 0.0 {
            reference
        } else {
            reference.flip()
        }
    };
    for &i in &by_area {
        let reference = parent[i].map_or(Orientation::Clockwise, |j| orient[j]);
        orient[i] = copy_or_flip(reference, &mut rng);
    }
    let mut on_curve = vec![false; patch.num_vertices()];
    for l in &e.loops {
        for &v in &l.vertices {
            on_curve[v] = true;
        }
    }
    if let Some(cp) = &e.chordal_path {
        for &v in cp {
            on_curve[v] = true;
        }
    }
    let isolated = (0..patch.num_vertices())
        .filter(|&v| !on_curve[v])
        .map(|v| {
            let reference = enclosing(patch.position(v), None).map_or(Orientation::Clockwise, |j| orient[j]);
            (v, copy_or_flip(reference, &mut rng))
        })
        .collect();
    LoopOrientation { loops: orient, parent, isolated }
}

/// Orientation of a loop as traversed (by signed area).
pub fn traversal_orientation(patch: &HexPatch, l: &Loop) -> Orientation {
    if signed_area(&polygon(patch, &l.vertices)) > 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightFunction {
    pub values: Vec<i64>,
    pub base_face: usize,
    pub base_value: i64,
}

/// Net turning, in units of 60 degrees, from the entry edge at boundary position
/// `from` to the entry edge at `to`, going counter-clockwise around the patch.
pub fn rotation_constant(patch: &HexPatch, from: usize, to: usize) -> Result<i64, PatchError> {
    let pa = patch.with_root(from)?;
    let pb = patch.with_root(to)?;
    let cyc = patch.boundary_cycle();
    let n = cyc.len();
    let mut segs: Vec<(LatticeVertex, LatticeVertex)> = vec![(pa.entry_tail(), patch.vertex(cyc[from]))];
    let mut i = from;
    while i != to {
        let j = (i + 1) % n;
        segs.push((patch.vertex(cyc[i]), patch.vertex(cyc[j])));
        i = j;
    }
    segs.push((pb.entry_tail(), patch.vertex(cyc[to])));
    Ok(segs.windows(2).map(|w| direction_change(w[0].0, w[0].1, w[1].0, w[1].1)).sum())
}

/// Height function with the tree rooted at `boundary_cycle[root_position]`.
///
/// The base face is the face at that root. Its value is zero at the patch's
/// default root position and otherwise the counter-clockwise rotation constant
/// from the default position.
///
/// With the turn convention of this module, adding faces to the black set never
/// decreases a height, and moving the root counter-clockwise never decreases one.
pub fn height_function(c: &Coloring, root_position: usize) -> Result<HeightFunction, ColoringError> {
    let default_pos = c.patch().root_position();
    let rooted = c.patch().with_root(root_position)?;
    let rc = c.on_patch(&rooted)?;
    let base_value = if root_position == default_pos {
        0
    } else {
        rotation_constant(c.patch(), default_pos, root_position)?
    };
    let t = exploration_tree(&rc);
    let n = rooted.num_vertices();
    // Net turning along the root path to every vertex.
    let mut net = vec![0i64; n];
    let mut by_order: Vec<usize> = (0..n).collect();
    by_order.sort_by_key(|&v| t.order[v]);
    for &v in &by_order {
        if let Some(u) = t.tree.parent[v] {
            net[v] = net[u] + t.turn[v].unwrap().direction().signum();
        }
    }
    let values = (0..rooted.num_faces())
        .map(|f| {
            let m = *rooted.face_vertices(f).iter().min_by_key(|&&v| t.order[v]).unwrap();
            base_value + net[m]
        })
        .collect();
    Ok(HeightFunction { values, base_face: rooted.root_face(), base_value })
}
