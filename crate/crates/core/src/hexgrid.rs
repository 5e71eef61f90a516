//! Hexagonal lattice geometry and simply connected patches.
//!
//! Faces are pointy-top hexagons with unit edge length, addressed by axial
//! coordinates `(q, r)`. The center of face `(q, r)` sits at
//! `(sqrt(3) (q + r/2), 3r/2)` with the y axis pointing up. Every lattice
//! vertex is either the top corner or the bottom corner of exactly one face,
//! which gives a canonical name to each vertex.
//!
//! Geometric predicates (turn direction, ordering) use the exact integer
//! coordinates returned by [`LatticeVertex::doubled`].

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

/// Axial coordinate of a hexagonal face.
///
/// Ordered by row first (`r`, then `q`), so sorted faces read bottom to top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaceCoord {
    pub q: i32,
    pub r: i32,
}

impl PartialOrd for FaceCoord {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FaceCoord {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.r, self.q).cmp(&(other.r, other.q))
    }
}

/// Offsets of the six neighbouring faces, counter-clockwise starting east.
pub const FACE_NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

impl FaceCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        FaceCoord { q, r }
    }

    /// Corners in counter-clockwise order; corner `k` sits at angle `30 + 60k` degrees.
    pub fn corners(self) -> [LatticeVertex; 6] {
        let FaceCoord { q, r } = self;
        [
            LatticeVertex::bottom(q, r + 1),
            LatticeVertex::top(q, r),
            LatticeVertex::bottom(q - 1, r + 1),
            LatticeVertex::top(q, r - 1),
            LatticeVertex::bottom(q, r),
            LatticeVertex::top(q + 1, r - 1),
        ]
    }

    pub fn neighbors(self) -> [FaceCoord; 6] {
        FACE_NEIGHBOR_OFFSETS.map(|(dq, dr)| FaceCoord::new(self.q + dq, self.r + dr))
    }

    pub fn center(self) -> (f64, f64) {
        let (x2, y2) = (2 * self.q + self.r, 3 * self.r);
        (SQRT3_HALF * x2 as f64, 0.5 * y2 as f64)
    }
}

const SQRT3_HALF: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Top,
    Bottom,
}

/// A vertex of the infinite hexagonal lattice: the top or bottom corner of face `(q, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVertex {
    pub q: i32,
    pub r: i32,
    pub kind: VertexKind,
}

impl LatticeVertex {
    pub const fn top(q: i32, r: i32) -> Self {
        LatticeVertex { q, r, kind: VertexKind::Top }
    }

    pub const fn bottom(q: i32, r: i32) -> Self {
        LatticeVertex { q, r, kind: VertexKind::Bottom }
    }

    /// Position scaled to integers: `x = sqrt(3)/2 * X`, `y = Y / 2`.
    pub fn doubled(self) -> (i64, i64) {
        let x2 = 2 * self.q as i64 + self.r as i64;
        let y2 = 3 * self.r as i64;
        match self.kind {
            VertexKind::Top => (x2, y2 + 2),
            VertexKind::Bottom => (x2, y2 - 2),
        }
    }

    pub fn position(self) -> (f64, f64) {
        let (x2, y2) = self.doubled();
        (SQRT3_HALF * x2 as f64, 0.5 * y2 as f64)
    }

    /// The three faces sharing this vertex.
    pub fn faces(self) -> [FaceCoord; 3] {
        let (q, r) = (self.q, self.r);
        match self.kind {
            VertexKind::Top => [FaceCoord::new(q, r), FaceCoord::new(q, r + 1), FaceCoord::new(q - 1, r + 1)],
            VertexKind::Bottom => [FaceCoord::new(q, r), FaceCoord::new(q, r - 1), FaceCoord::new(q + 1, r - 1)],
        }
    }

    /// The three lattice neighbours.
    pub fn neighbors(self) -> [LatticeVertex; 3] {
        let (q, r) = (self.q, self.r);
        match self.kind {
            VertexKind::Top => [
                LatticeVertex::bottom(q, r + 1),
                LatticeVertex::bottom(q - 1, r + 1),
                LatticeVertex::bottom(q - 1, r + 2),
            ],
            VertexKind::Bottom => [
                LatticeVertex::top(q, r - 1),
                LatticeVertex::top(q + 1, r - 1),
                LatticeVertex::top(q + 1, r - 2),
            ],
        }
    }

    pub fn is_adjacent(self, other: LatticeVertex) -> bool {
        self.neighbors().contains(&other)
    }
}

/// Direction of a turn at a lattice vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TurnDir {
    Left,
    Right,
}

impl TurnDir {
    /// `+1` for left, `-1` for right.
    pub fn signum(self) -> i64 {
        match self {
            TurnDir::Left => 1,
            TurnDir::Right => -1,
        }
    }

    pub fn opposite(self) -> TurnDir {
        match self {
            TurnDir::Left => TurnDir::Right,
            TurnDir::Right => TurnDir::Left,
        }
    }
}

/// Turn made by the path `a -> b -> c` through adjacent lattice vertices.
pub fn turn_direction(a: LatticeVertex, b: LatticeVertex, c: LatticeVertex) -> TurnDir {
    let (ax, ay) = a.doubled();
    let (bx, by) = b.doubled();
    let (cx, cy) = c.doubled();
    let cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
    debug_assert!(cross != 0, "collinear turn on the hexagonal lattice");
    if cross > 0 {
        TurnDir::Left
    } else {
        TurnDir::Right
    }
}

/// Signed angle from direction `a -> b` to direction `c -> d`, in units of 60 degrees.
pub fn direction_change(a: LatticeVertex, b: LatticeVertex, c: LatticeVertex, d: LatticeVertex) -> i64 {
    let angle = |u: LatticeVertex, v: LatticeVertex| {
        let (ux, uy) = u.position();
        let (vx, vy) = v.position();
        libm::atan2(vy - uy, vx - ux)
    };
    let mut diff = angle(c, d) - angle(a, b);
    let pi = core::f64::consts::PI;
    while diff > pi + 1e-9 {
        diff -= 2.0 * pi;
    }
    while diff <= -pi + 1e-9 {
        diff += 2.0 * pi;
    }
    libm::round(diff / (pi / 3.0)) as i64
}

/// The face on the left of the directed lattice edge `u -> v`.
pub fn left_face(u: LatticeVertex, v: LatticeVertex) -> FaceCoord {
    for f in u.faces() {
        let c = f.corners();
        for k in 0..6 {
            if c[k] == u && c[(k + 1) % 6] == v {
                return f;
            }
        }
    }
    panic!("left_face called on non-adjacent vertices");
}

/// The face on the right of the directed lattice edge `u -> v`.
pub fn right_face(u: LatticeVertex, v: LatticeVertex) -> FaceCoord {
    left_face(v, u)
}

/// The face at the head of `u -> v` that does not contain the edge.
pub fn pointed_face_coord(u: LatticeVertex, v: LatticeVertex) -> FaceCoord {
    let flanks = u.faces();
    v.faces()
        .into_iter()
        .find(|f| !flanks.contains(f))
        .expect("pointed_face called on non-adjacent vertices")
}

/// A face seen from a patch: either one of its faces (by index) or a lattice face outside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaceRef {
    Inside(usize),
    Outside(FaceCoord),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchError {
    #[error("patch has no faces")]
    Empty,
    #[error("patch faces are not connected")]
    Disconnected,
    #[error("patch is not simply connected")]
    NotSimplyConnected,
    #[error("boundary position {0} is not a degree-two vertex")]
    NoDegreeTwoBoundaryVertex(usize),
}

/// A finite simply connected union of hexagons together with a root on its boundary.
#[derive(Clone, Debug)]
pub struct HexPatch {
    faces: Vec<FaceCoord>,
    face_index: BTreeMap<FaceCoord, usize>,
    vertices: Vec<LatticeVertex>,
    vertex_index: BTreeMap<LatticeVertex, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_index: BTreeMap<(usize, usize), usize>,
    face_vertices: Vec<[usize; 6]>,
    boundary_cycle: Vec<usize>,
    boundary_position: Vec<Option<usize>>,
    root_position: usize,
    entry_tail: LatticeVertex,
}

/// Build a patch from face coordinates, rooted at `boundary_cycle[root_choice]`.
pub fn build_patch(face_coords: &[FaceCoord], root_choice: usize) -> Result<HexPatch, PatchError> {
    let face_set: BTreeSet<FaceCoord> = face_coords.iter().copied().collect();
    if face_set.is_empty() {
        return Err(PatchError::Empty);
    }
    check_connected(&face_set)?;
    check_simply_connected(&face_set)?;

    let faces: Vec<FaceCoord> = face_set.iter().copied().collect();
    let face_index: BTreeMap<FaceCoord, usize> = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();

    let mut vset = BTreeSet::new();
    for f in &faces {
        vset.extend(f.corners());
    }
    let mut vertices: Vec<LatticeVertex> = vset.into_iter().collect();
    vertices.sort_by_key(|v| {
        let (x, y) = v.doubled();
        (y, x)
    });
    let vertex_index: BTreeMap<LatticeVertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut edge_set = BTreeSet::new();
    let mut face_vertices = Vec::with_capacity(faces.len());
    for f in &faces {
        let c = f.corners().map(|v| vertex_index[&v]);
        for k in 0..6 {
            let (a, b) = (c[k], c[(k + 1) % 6]);
            edge_set.insert((a.min(b), a.max(b)));
        }
        face_vertices.push(c);
    }
    let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
    let edge_index: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    // Directed boundary edges keep the patch on their left.
    let mut successor = BTreeMap::new();
    for f in &faces {
        let c = f.corners();
        for k in 0..6 {
            let (u, v) = (c[k], c[(k + 1) % 6]);
            if !face_set.contains(&right_face(u, v)) {
                successor.insert(vertex_index[&u], vertex_index[&v]);
            }
        }
    }
    let start = *successor.keys().min().expect("a finite patch has a boundary");
    let mut boundary_cycle = vec![start];
    let mut cur = successor[&start];
    while cur != start {
        boundary_cycle.push(cur);
        cur = successor[&cur];
    }
    let mut boundary_position = vec![None; vertices.len()];
    for (i, &v) in boundary_cycle.iter().enumerate() {
        boundary_position[v] = Some(i);
    }

    let mut patch = HexPatch {
        faces,
        face_index,
        vertices,
        vertex_index,
        adjacency,
        edges,
        edge_index,
        face_vertices,
        boundary_cycle,
        boundary_position,
        root_position: 0,
        entry_tail: LatticeVertex::top(0, 0),
    };
    patch.set_root(root_choice)?;
    Ok(patch)
}

fn check_connected(faces: &BTreeSet<FaceCoord>) -> Result<(), PatchError> {
    let first = *faces.iter().next().expect("non-empty");
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(f) = queue.pop_front() {
        for n in f.neighbors() {
            if faces.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    if seen.len() == faces.len() {
        Ok(())
    } else {
        Err(PatchError::Disconnected)
    }
}

fn check_simply_connected(faces: &BTreeSet<FaceCoord>) -> Result<(), PatchError> {
    let qmin = faces.iter().map(|f| f.q).min().unwrap() - 1;
    let qmax = faces.iter().map(|f| f.q).max().unwrap() + 1;
    let rmin = faces.iter().map(|f| f.r).min().unwrap() - 1;
    let rmax = faces.iter().map(|f| f.r).max().unwrap() + 1;
    let inside = |f: FaceCoord| f.q >= qmin && f.q <= qmax && f.r >= rmin && f.r <= rmax;
    let total = ((qmax - qmin + 1) * (rmax - rmin + 1)) as usize - faces.len();
    let start = FaceCoord::new(qmin, rmin);
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for n in f.neighbors() {
            if inside(n) && !faces.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    if seen.len() == total {
        Ok(())
    } else {
        Err(PatchError::NotSimplyConnected)
    }
}

impl HexPatch {
    /// Re-root at `boundary_cycle[position]`.
    pub fn set_root(&mut self, position: usize) -> Result<(), PatchError> {
        let v = *self
            .boundary_cycle
            .get(position)
            .ok_or(PatchError::NoDegreeTwoBoundaryVertex(position))?;
        if self.adjacency[v].len() != 2 {
            return Err(PatchError::NoDegreeTwoBoundaryVertex(position));
        }
        let lv = self.vertices[v];
        let tail = lv
            .neighbors()
            .into_iter()
            .find(|w| {
                self.vertex_index
                    .get(w)
                    .is_none_or(|&wi| !self.adjacency[v].contains(&wi))
            })
            .expect("degree-two vertex has a free lattice edge");
        self.root_position = position;
        self.entry_tail = tail;
        Ok(())
    }

    pub fn with_root(&self, position: usize) -> Result<HexPatch, PatchError> {
        let mut p = self.clone();
        p.set_root(position)?;
        Ok(p)
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[FaceCoord] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> FaceCoord {
        self.faces[i]
    }

    pub fn face_id(&self, f: FaceCoord) -> Option<usize> {
        self.face_index.get(&f).copied()
    }

    pub fn face_ref(&self, f: FaceCoord) -> FaceRef {
        match self.face_index.get(&f) {
            Some(&i) => FaceRef::Inside(i),
            None => FaceRef::Outside(f),
        }
    }

    /// Patch vertex indices of the corners of face `i`, counter-clockwise.
    pub fn face_vertices(&self, i: usize) -> [usize; 6] {
        self.face_vertices[i]
    }

    pub fn vertices(&self) -> &[LatticeVertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> LatticeVertex {
        self.vertices[i]
    }

    pub fn vertex_id(&self, v: LatticeVertex) -> Option<usize> {
        self.vertex_index.get(&v).copied()
    }

    pub fn position(&self, i: usize) -> (f64, f64) {
        self.vertices[i].position()
    }

    /// Neighbours of vertex `i` along patch edges.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Undirected edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_id(a, b).is_some()
    }

    /// Boundary vertices in counter-clockwise order, starting at the lowest vertex.
    pub fn boundary_cycle(&self) -> &[usize] {
        &self.boundary_cycle
    }

    pub fn boundary_position(&self, v: usize) -> Option<usize> {
        self.boundary_position[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_position[v].is_some()
    }

    pub fn root(&self) -> usize {
        self.boundary_cycle[self.root_position]
    }

    pub fn root_position(&self) -> usize {
        self.root_position
    }

    /// Tail of the entry edge `e0`: the lattice neighbour of the root outside the patch's edges.
    pub fn entry_tail(&self) -> LatticeVertex {
        self.entry_tail
    }

    /// The face containing the root and pointed at by the entry edge.
    pub fn root_face(&self) -> usize {
        match self.pointed_face(self.entry_tail, self.vertices[self.root()]) {
            FaceRef::Inside(i) => i,
            FaceRef::Outside(_) => unreachable!("the root has degree two so its third face is inside"),
        }
    }

    pub fn left_face(&self, u: usize, v: usize) -> FaceRef {
        self.face_ref(left_face(self.vertices[u], self.vertices[v]))
    }

    pub fn right_face(&self, u: usize, v: usize) -> FaceRef {
        self.face_ref(right_face(self.vertices[u], self.vertices[v]))
    }

    /// The face pointed at by the directed lattice edge `tail -> head`.
    pub fn pointed_face(&self, tail: LatticeVertex, head: LatticeVertex) -> FaceRef {
        self.face_ref(pointed_face_coord(tail, head))
    }

    /// Patch faces incident to vertex `v`.
    pub fn faces_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertices[v].faces().into_iter().filter_map(move |f| self.face_id(f))
    }

    /// Adjacent patch faces of face `i`.
    pub fn face_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.faces[i].neighbors().into_iter().filter_map(move |f| self.face_id(f))
    }

    /// From `prev -> cur`, the lattice neighbours reached by turning left and right.
    pub fn turn_targets(&self, prev: LatticeVertex, cur: usize) -> (LatticeVertex, LatticeVertex) {
        let c = self.vertices[cur];
        let mut left = None;
        let mut right = None;
        for w in c.neighbors() {
            if w == prev {
                continue;
            }
            match turn_direction(prev, c, w) {
                TurnDir::Left => left = Some(w),
                TurnDir::Right => right = Some(w),
            }
        }
        (left.expect("left neighbour"), right.expect("right neighbour"))
    }

    /// Patch neighbour of `cur` reached from `prev` by turning `dir`, if that edge is in the patch.
    pub fn step(&self, prev: LatticeVertex, cur: usize, dir: TurnDir) -> Option<usize> {
        let (l, r) = self.turn_targets(prev, cur);
        let w = if dir == TurnDir::Left { l } else { r };
        let wi = self.vertex_id(w)?;
        self.has_edge(cur, wi).then_some(wi)
    }

    /// Lattice predecessor used for turn computations at `v`: the parent, or `e0`'s tail at the root.
    pub fn lattice_prev(&self, parent: Option<usize>) -> LatticeVertex {
        match parent {
            Some(p) => self.vertices[p],
            None => self.entry_tail,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patch(coords: &[(i32, i32)]) -> Result<HexPatch, PatchError> {
        let f: Vec<FaceCoord> = coords.iter().map(|&(q, r)| FaceCoord::new(q, r)).collect();
        build_patch(&f, 0)
    }

    #[test]
    fn corners_are_unit_spaced_and_counter_clockwise() {
        let f = FaceCoord::new(2, -1);
        let (cx, cy) = f.center();
        let c = f.corners();
        for k in 0..6 {
            let (x, y) = c[k].position();
            let ang = libm::atan2(y - cy, x - cx).to_degrees();
            let expected = 30.0 + 60.0 * k as f64;
            let d = (ang - expected).rem_euclid(360.0);
            assert!(!(1e-9..=360.0 - 1e-9).contains(&d), "corner {k}: {ang}");
            assert!(c[k].is_adjacent(c[(k + 1) % 6]));
            assert!(c[k].faces().contains(&f));
        }
    }

    #[test]
    fn neighbors_are_symmetric() {
        for v in [LatticeVertex::top(1, 2), LatticeVertex::bottom(-3, 0)] {
            for w in v.neighbors() {
                assert!(w.neighbors().contains(&v));
                let (a, b) = (v.position(), w.position());
                let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!((d - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lone_hexagon() {
        let p = patch(&[(0, 0)]).unwrap();
        assert_eq!((p.num_faces(), p.num_vertices(), p.num_edges()), (1, 6, 6));
        assert_eq!(p.boundary_cycle().len(), 6);
        assert_eq!(p.vertex(p.root()), LatticeVertex::bottom(0, 0));
        assert_eq!(p.root_face(), 0);
    }

    #[test]
    fn pair_of_hexagons() {
        let p = patch(&[(0, 0), (1, 0)]).unwrap();
        assert_eq!((p.num_faces(), p.num_vertices(), p.num_edges()), (2, 10, 11));
        let deg3 = (0..p.num_vertices()).filter(|&v| p.degree(v) == 3).count();
        assert_eq!(deg3, 2);
        assert_eq!(p.boundary_cycle().len(), 10);
    }

    #[test]
    fn flower_counts() {
        let mut c = vec![(0, 0)];
        c.extend(FACE_NEIGHBOR_OFFSETS);
        let p = patch(&c).unwrap();
        assert_eq!((p.num_faces(), p.num_vertices(), p.num_edges()), (7, 24, 30));
    }

    #[test]
    fn ring_is_rejected() {
        let ring: Vec<(i32, i32)> = FACE_NEIGHBOR_OFFSETS.to_vec();
        assert_eq!(patch(&ring).unwrap_err(), PatchError::NotSimplyConnected);
        assert_eq!(patch(&[(0, 0), (3, 0)]).unwrap_err(), PatchError::Disconnected);
        assert_eq!(patch(&[]).unwrap_err(), PatchError::Empty);
    }

    #[test]
    fn degree_three_root_is_rejected() {
        let p = patch(&[(0, 0), (1, 0)]).unwrap();
        let pos = p.boundary_cycle().iter().position(|&v| p.degree(v) == 3).unwrap();
        assert_eq!(p.with_root(pos).unwrap_err(), PatchError::NoDegreeTwoBoundaryVertex(pos));
        assert!(p.with_root(99).is_err());
    }

    #[test]
    fn boundary_keeps_patch_on_left() {
        let p = patch(&[(0, 0), (1, 0), (0, 1)]).unwrap();
        let b = p.boundary_cycle();
        let mut area2 = 0.0;
        for i in 0..b.len() {
            let (u, v) = (b[i], b[(i + 1) % b.len()]);
            assert!(matches!(p.left_face(u, v), FaceRef::Inside(_)));
            assert!(matches!(p.right_face(u, v), FaceRef::Outside(_)));
            let (a, c) = (p.position(u), p.position(v));
            area2 += a.0 * c.1 - a.1 * c.0;
        }
        assert!(area2 > 0.0);
    }

    #[test]
    fn pointed_face_excludes_flanks() {
        let u = LatticeVertex::bottom(0, 0);
        for v in u.neighbors() {
            let pf = pointed_face_coord(u, v);
            assert_ne!(pf, left_face(u, v));
            assert_ne!(pf, right_face(u, v));
            assert!(v.faces().contains(&pf));
        }
    }

    #[test]
    fn turn_targets_split_left_right() {
        let p = patch(&[(0, 0)]).unwrap();
        let root = p.root();
        let (l, r) = p.turn_targets(p.entry_tail(), root);
        assert_eq!(turn_direction(p.entry_tail(), p.vertex(root), l), TurnDir::Left);
        assert_eq!(turn_direction(p.entry_tail(), p.vertex(root), r), TurnDir::Right);
        assert_eq!(p.vertex_id(p.entry_tail()), None);
    }
}
