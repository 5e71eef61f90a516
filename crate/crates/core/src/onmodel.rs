//! The O(n) loop model: colorings weighted by `n^N x^L`, where `N` counts
//! loops (the chordal path excluded) and `L` counts interface edges.

use alloc::vec;
use alloc::vec::Vec;

use crate::hexgrid::{FaceRef, HexPatch};
use crate::loops::{loops_from_coloring, BoundaryCondition, Coloring, ColoringError};
use crate::rng::{rng_from_seed, uniform, SimRng};

/// Largest face count for which exact enumeration is allowed.
pub const MAX_EXACT_FACES: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OnError {
    #[error("loop fugacity and edge weight must be positive (n = {n}, x = {x})")]
    InvalidParams { n: f64, x: f64 },
    #[error("exact enumeration needs at most {MAX_EXACT_FACES} faces, patch has {0}")]
    TooLarge(usize),
    #[error("critical point is defined for 0 < n <= 2, got {0}")]
    OutOfRange(f64),
    #[error("sweeps must be at least 1")]
    NoSweeps,
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnParams {
    pub n: f64,
    pub x: f64,
    pub boundary: BoundaryCondition,
}

impl OnParams {
    pub fn new(n: f64, x: f64, boundary: BoundaryCondition) -> Result<Self, OnError> {
        if n > 0.0 && x > 0.0 {
            Ok(OnParams { n, x, boundary })
        } else {
            Err(OnError::InvalidParams { n, x })
        }
    }

    fn log_weight_of(&self, loops: usize, length: usize) -> f64 {
        loops as f64 * libm::log(self.n) + length as f64 * libm::log(self.x)
    }
}

/// `N log n + L log x` for the coloring.
pub fn on_log_weight(c: &Coloring, p: &OnParams) -> f64 {
    let e = loops_from_coloring(c);
    p.log_weight_of(e.num_loops(), e.total_length())
}

#[derive(Clone, Copy)]
enum Side {
    Inside(usize),
    Outside(bool),
}

/// Precomputed incidence for counting `(N, L)` without building loop objects.
#[derive(Clone)]
pub struct LoopCounter {
    edges: Vec<(usize, usize, Side, Side)>,
    num_vertices: usize,
    parent: Vec<usize>,
}

impl LoopCounter {
    pub fn new(patch: &HexPatch, boundary: BoundaryCondition) -> Result<Self, ColoringError> {
        let probe = Coloring::new(patch, vec![false; patch.num_faces()], boundary)?;
        let side = |f: FaceRef| match f {
            FaceRef::Inside(i) => Side::Inside(i),
            FaceRef::Outside(_) => Side::Outside(probe.is_black(f)),
        };
        let edges = patch
            .edges()
            .iter()
            .map(|&(a, b)| (a, b, side(patch.left_face(a, b)), side(patch.right_face(a, b))))
            .collect();
        Ok(LoopCounter { edges, num_vertices: patch.num_vertices(), parent: vec![0; patch.num_vertices()] })
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// `(N, L)`: loops closed by the interface edges, and the number of interface edges.
    ///
    /// Interfaces are disjoint paths and cycles, so the number of cycles equals
    /// the number of edges that join already connected vertices.
    pub fn count(&mut self, black: impl Fn(usize) -> bool) -> (usize, usize) {
        for v in 0..self.num_vertices {
            self.parent[v] = v;
        }
        let color = |s: Side| match s {
            Side::Inside(i) => black(i),
            Side::Outside(b) => b,
        };
        let (mut loops, mut length) = (0, 0);
        for k in 0..self.edges.len() {
            let (a, b, l, r) = self.edges[k];
            if color(l) == color(r) {
                continue;
            }
            length += 1;
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                loops += 1;
            } else {
                self.parent[ra] = rb;
            }
        }
        (loops, length)
    }
}

/// Exact O(n) probabilities indexed by black-face bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub probs: Vec<f64>,
}

pub fn on_exact_distribution(patch: &HexPatch, p: &OnParams) -> Result<ExactDistribution, OnError> {
    let nf = patch.num_faces();
    if nf > MAX_EXACT_FACES {
        return Err(OnError::TooLarge(nf));
    }
    let mut counter = LoopCounter::new(patch, p.boundary)?;
    let logw: Vec<f64> = (0..1u64 << nf)
        .map(|m| {
            let (loops, length) = counter.count(|i| (m >> i) & 1 == 1);
            p.log_weight_of(loops, length)
        })
        .collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| libm::exp(l - max)).collect();
    let z: f64 = w.iter().sum();
    Ok(ExactDistribution { probs: w.into_iter().map(|x| x / z).collect() })
}

/// Single-face-flip Metropolis chain started from the all-white coloring.
pub struct OnChain {
    params: OnParams,
    counter: LoopCounter,
    black: Vec<bool>,
    log_weight: f64,
    rng: SimRng,
    accepted: u64,
    proposed: u64,
}

impl OnChain {
    pub fn new(patch: &HexPatch, params: OnParams, seed: u64) -> Result<Self, OnError> {
        let mut counter = LoopCounter::new(patch, params.boundary)?;
        let black = vec![false; patch.num_faces()];
        let (l, n) = counter.count(|_| false);
        let log_weight = params.log_weight_of(l, n);
        Ok(OnChain { params, counter, black, log_weight, rng: rng_from_seed(seed), accepted: 0, proposed: 0 })
    }

    /// One proposal; returns the flipped face and whether it was accepted.
    pub fn step(&mut self) -> (usize, bool) {
        let nf = self.black.len();
        let f = ((uniform(&mut self.rng) * nf as f64) as usize).min(nf - 1);
        self.black[f] = !self.black[f];
        let black = &self.black;
        let (l, n) = self.counter.count(|i| black[i]);
        let proposal = self.params.log_weight_of(l, n);
        let u = uniform(&mut self.rng);
        self.proposed += 1;
        if libm::log(1.0 - u) < proposal - self.log_weight {
            self.log_weight = proposal;
            self.accepted += 1;
            (f, true)
        } else {
            self.black[f] = !self.black[f];
            (f, false)
        }
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.black.len() {
            self.step();
        }
    }

    pub fn state(&self) -> &[bool] {
        &self.black
    }

    pub fn mask(&self) -> u64 {
        self.black.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (i, _)| m | (1 << i))
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }
}

/// Final state of a chain run for `sweeps` sweeps.
pub fn on_mcmc_sample<'p>(patch: &'p HexPatch, p: &OnParams, sweeps: usize, seed: u64) -> Result<Coloring<'p>, OnError> {
    if sweeps == 0 {
        return Err(OnError::NoSweeps);
    }
    let mut chain = OnChain::new(patch, *p, seed)?;
    for _ in 0..sweeps {
        chain.sweep();
    }
    Ok(Coloring::new(patch, chain.state().to_vec(), p.boundary)?)
}

/// Empirical distribution of the chain state over proposals after discarding
/// the first `sweeps / 2` sweeps, indexed like [`ExactDistribution`].
pub fn on_mcmc_distribution(patch: &HexPatch, p: &OnParams, sweeps: usize, seed: u64) -> Result<Vec<f64>, OnError> {
    let nf = patch.num_faces();
    if nf > MAX_EXACT_FACES {
        return Err(OnError::TooLarge(nf));
    }
    if sweeps == 0 {
        return Err(OnError::NoSweeps);
    }
    let mut chain = OnChain::new(patch, *p, seed)?;
    for _ in 0..sweeps / 2 {
        chain.sweep();
    }
    let mut counts = vec![0u64; 1 << nf];
    let mut mask = chain.mask();
    let mut total = 0u64;
    for _ in 0..(sweeps - sweeps / 2) * nf {
        let (f, acc) = chain.step();
        if acc {
            mask ^= 1 << f;
        }
        counts[mask as usize] += 1;
        total += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// `x_c(n) = (2 + sqrt(2 - n))^{-1/2}` for `0 < n <= 2`.
pub fn critical_x(n: f64) -> Result<f64, OnError> {
    if n > 0.0 && n <= 2.0 {
        Ok(1.0 / libm::sqrt(2.0 + libm::sqrt(2.0 - n)))
    } else {
        Err(OnError::OutOfRange(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexgrid::{build_patch, FaceCoord};
    use crate::loops::exploration_tree;
    use crate::stats::total_variation;

    fn patch(coords: &[(i32, i32)]) -> HexPatch {
        let f: Vec<FaceCoord> = coords.iter().map(|&(q, r)| FaceCoord::new(q, r)).collect();
        build_patch(&f, 0).unwrap()
    }

    const FREE: BoundaryCondition = BoundaryCondition::AllWhiteOutside;

    #[test]
    fn lone_hexagon_weights() {
        let p = patch(&[(0, 0)]);
        let params = OnParams::new(2.0, 0.5, FREE).unwrap();
        assert_eq!(on_log_weight(&Coloring::all_white(&p), &params), 0.0);
        let c = Coloring::from_faces(&p, &[0], FREE).unwrap();
        assert!((on_log_weight(&c, &params) - libm::log(0.03125)).abs() < 1e-12);
        let d = on_exact_distribution(&p, &params).unwrap();
        assert!((d.probs[1] - 0.03125 / 1.03125).abs() < 1e-12);
        let d = on_exact_distribution(&p, &OnParams::new(1.0, 1.0, FREE).unwrap()).unwrap();
        assert!((d.probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn counter_matches_loop_extraction_and_tree() {
        let p = patch(&[(0, 0), (1, 0), (0, 1), (-1, 1), (1, -1)]);
        let mut counter = LoopCounter::new(&p, FREE).unwrap();
        for m in 0..32u64 {
            let c = Coloring::from_mask(&p, m, FREE).unwrap();
            let e = loops_from_coloring(&c);
            assert_eq!(counter.count(|i| (m >> i) & 1 == 1), (e.num_loops(), e.total_length()));
            let tree = exploration_tree(&c).tree.edge_set();
            let loop_edges: Vec<(usize, usize)> = e.loops.iter().flat_map(|l| l.edges().collect::<Vec<_>>()).collect();
            let outside = loop_edges.iter().filter(|&&(a, b)| !tree.contains(&(a.min(b), a.max(b)))).count();
            assert_eq!(outside, e.num_loops());
        }
    }

    #[test]
    fn chordal_counter_excludes_path() {
        let p = patch(&[(0, 0), (1, 0)]);
        let target = *p.boundary_cycle().iter().find(|&&v| v != p.root() && p.degree(v) == 2).unwrap();
        let bc = BoundaryCondition::ChordalArc { a: p.root(), b: target };
        let mut counter = LoopCounter::new(&p, bc).unwrap();
        for m in 0..4u64 {
            let c = Coloring::from_mask(&p, m, bc).unwrap();
            let e = loops_from_coloring(&c);
            assert!(e.chordal_path.is_some());
            assert_eq!(counter.count(|i| (m >> i) & 1 == 1), (e.num_loops(), e.total_length()));
        }
    }

    #[test]
    fn exact_is_normalized_and_bounded() {
        let p = patch(&[(0, 0), (1, 0), (0, 1)]);
        let d = on_exact_distribution(&p, &OnParams::new(1.5, 0.6, FREE).unwrap()).unwrap();
        assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let big: Vec<FaceCoord> = (0..21).map(|q| FaceCoord::new(q, 0)).collect();
        let big = build_patch(&big, 0).unwrap();
        assert_eq!(on_exact_distribution(&big, &OnParams::new(1.0, 1.0, FREE).unwrap()), Err(OnError::TooLarge(21)));
        assert!(OnParams::new(0.0, 1.0, FREE).is_err());
    }

    #[test]
    fn uniform_chain_marginals() {
        let p = patch(&[(0, 0), (1, 0), (0, 1)]);
        let params = OnParams::new(1.0, 1.0, FREE).unwrap();
        let mut chain = OnChain::new(&p, params, 4).unwrap();
        let n = 30_000;
        let mut hits = 0;
        for _ in 0..n {
            chain.sweep();
            hits += chain.state()[0] as usize;
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        assert_eq!(chain.acceptance_rate(), 1.0);
    }

    #[test]
    fn chain_matches_exact() {
        let p = patch(&[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let params = OnParams::new(1.5, 0.6, FREE).unwrap();
        let exact = on_exact_distribution(&p, &params).unwrap();
        let emp = on_mcmc_distribution(&p, &params, 100_000, 11).unwrap();
        assert!(total_variation(&exact.probs, &emp) < 0.02);
    }

    #[test]
    fn detailed_balance_flows() {
        let p = patch(&[(0, 0), (1, 0)]);
        let params = OnParams::new(2.0, 0.7, FREE).unwrap();
        let mut chain = OnChain::new(&p, params, 8).unwrap();
        let mut flow = [[0u64; 4]; 4];
        let mut m = chain.mask();
        for _ in 0..400_000 {
            let (f, acc) = chain.step();
            if acc {
                let next = m ^ (1 << f);
                flow[m as usize][next as usize] += 1;
                m = next;
            }
        }
        for (a, b) in (0..4usize).flat_map(|a| (0..2).map(move |f| (a, a ^ (1 << f)))) {
            let (x, y) = (flow[a][b] as f64, flow[b][a] as f64);
            assert!((x - y).abs() <= 3.0 * (x + y).sqrt() + 1.0, "{a}->{b}: {x} vs {y}");
        }
    }

    #[test]
    fn critical_point() {
        assert!((critical_x(2.0).unwrap() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((critical_x(1.0).unwrap() - 0.57735).abs() < 1e-5);
        assert!(critical_x(0.5).unwrap() < critical_x(1.5).unwrap());
        assert!(critical_x(2.5).is_err() && critical_x(0.0).is_err());
    }
}
