//! The acceptance criteria as runnable checks.
//!
//! Each check returns a [`CriterionResult`] with a one-line detail string.
//! Monte Carlo checks draw sample `i` from `stream_seed(seed, i)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use cle_core::cle::{conformal_radius_sample, nested_radius_sequence, ThetaParams};
use cle_core::hexgrid::{build_patch, FaceCoord, HexPatch, FACE_NEIGHBOR_OFFSETS};
use cle_core::loewner::{
    chordal_forward, chordal_trace_point, delta_of, jump_coefficients, radial_forward, sle_driver, sle_kr_driver, sle_kr_driver_from_noise,
    zipper_driver, Driver, KrConfig, KrVariant, LoewnerMode,
};
use cle_core::loops::{
    boundary_path_from_loops, coloring_from_tree, exploration_path, exploration_tree, height_function, is_branch_separated, loops_from_coloring,
    BoundaryCondition, Coloring,
};
use cle_core::onmodel::{on_exact_distribution, on_mcmc_distribution, OnParams};
use cle_core::rng::{normal, rng_from_seed, stream_seed, uniform};
use cle_core::stats::{ks_p_value, ks_statistic, ks_two_sample, ks_two_sample_p_value, linear_fit, mean, normal_cdf, std_error, total_variation, variance};
use cle_core::stochastic::{bessel_path, empirical_char_fn, eps_bessel_path, stable_char_fn, stable_sample, BesselParams, StableParams};
use cle_core::Complex64;
use serde::Serialize;

use crate::batch::run_batch;

type Check = (&'static str, bool);

/// One named part of a criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Non-gating criteria are reported but do not affect the exit status.
    pub gating: bool,
    pub checks: Vec<SubCheck>,
    pub detail: String,
    /// Wall-clock time; not part of [`CriterionResult::line`] so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (non-gating)",
        };
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        let failed = if failed.is_empty() { String::new() } else { format!(" [failed: {}]", failed.join(", ")) };
        format!("[{verdict}] {:>2} {}: {}{failed}", self.id, self.name, self.detail)
    }

    pub fn check(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Discrete,
    Continuum,
    Cle,
    Exploratory,
    All,
}

impl Suite {
    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::Discrete => (1..=5).collect(),
            Suite::Continuum => (6..=10).collect(),
            Suite::Cle => (11..=13).collect(),
            Suite::Exploratory => vec![14],
            Suite::All => (1..=14).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub jobs: usize,
}

pub const NAMES: [&str; 14] = [
    "bijection",
    "loop/tree edge",
    "boundary-path equivalence",
    "heights",
    "O(n) MCMC",
    "Bessel marginals",
    "epsilon-jump limits",
    "stable sampler",
    "Loewner oracles",
    "SLE(kappa, rho) driver",
    "CLE conformal radius at kappa = 4",
    "renewal of nested radii",
    "kappa -> 8/3 trend",
    "discrete-to-continuum hint",
];

/// Runs one criterion; panics if `id` is not in `1..=14`.
pub fn run_criterion(id: u8, opt: &VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let seed = stream_seed(opt.seed, u64::from(id));
    let (parts, detail) = match id {
        1 => bijection(),
        2 => loop_tree_edge(),
        3 => boundary_path_equivalence(),
        4 => heights(),
        5 => on_mcmc(seed),
        6 => bessel_marginals(seed, opt.jobs),
        7 => eps_jump_limits(seed, opt.jobs),
        8 => stable_sampler(seed),
        9 => loewner_oracles(seed),
        10 => kr_driver(seed, opt.jobs),
        11 => cle_kappa_four(seed, opt.jobs),
        12 => nested_renewal(seed, opt.jobs),
        13 => kappa_trend(seed, opt.jobs),
        14 => discrete_to_continuum(seed, opt.jobs),
        _ => panic!("no criterion {id}"),
    };
    let checks: Vec<SubCheck> = parts.into_iter().map(|(name, passed)| SubCheck { name, passed }).collect();
    CriterionResult {
        id,
        name: NAMES[usize::from(id) - 1],
        passed: checks.iter().all(|c| c.passed),
        gating: id != 14,
        checks,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(suite: Suite, opt: &VerifyOptions) -> Vec<CriterionResult> {
    suite.criteria().into_iter().map(|id| run_criterion(id, opt)).collect()
}

fn patch(coords: &[(i32, i32)]) -> HexPatch {
    let f: Vec<FaceCoord> = coords.iter().map(|&(q, r)| FaceCoord::new(q, r)).collect();
    build_patch(&f, 0).expect("fixed patches are valid")
}

fn flower() -> HexPatch {
    let mut c = vec![(0, 0)];
    c.extend(FACE_NEIGHBOR_OFFSETS);
    patch(&c)
}

fn six_faces() -> HexPatch {
    let mut c = vec![(0, 0)];
    c.extend(&FACE_NEIGHBOR_OFFSETS[..5]);
    patch(&c)
}

fn four_faces() -> HexPatch {
    patch(&[(0, 0), (1, 0), (0, 1), (1, 1)])
}

fn colorings(p: &HexPatch) -> impl Iterator<Item = Coloring<'_>> {
    (0..1u64 << p.num_faces()).map(move |m| Coloring::from_mask(p, m, BoundaryCondition::AllWhiteOutside).expect("mask fits"))
}

fn bijection() -> (Vec<Check>, String) {
    let start = Instant::now();
    let p = flower();
    let mut trees = BTreeSet::new();
    let (mut round_trip, mut separated) = (0, 0);
    for c in colorings(&p) {
        let t = exploration_tree(&c).tree;
        if coloring_from_tree(&p, &t).is_ok_and(|back| back.mask() == c.mask()) {
            round_trip += 1;
        }
        if is_branch_separated(&p, &t) {
            separated += 1;
        }
        trees.insert(t.parent);
    }
    let three = patch(&[(0, 0), (1, 0), (0, 1)]);
    let small: BTreeSet<_> = colorings(&three).map(|c| exploration_tree(&c).tree.parent).collect();
    let secs = start.elapsed().as_secs_f64();
    let ok = vec![
        ("round trip", round_trip == 128),
        ("distinct trees", trees.len() == 128),
        ("branch-separated", separated == 128),
        ("three-face count", small.len() == 8),
        ("runtime", secs < 5.0),
    ];
    (ok, format!("round trips {round_trip}/128, distinct trees {}, branch-separated {separated}, 3-face trees {}", trees.len(), small.len()))
}

fn loop_tree_edge() -> (Vec<Check>, String) {
    let p = flower();
    let (mut loops, mut bad) = (0, 0);
    for c in colorings(&p) {
        let tree = exploration_tree(&c).tree.edge_set();
        for l in loops_from_coloring(&c).loops {
            loops += 1;
            if l.edges().filter(|&(a, b)| !tree.contains(&(a.min(b), a.max(b)))).count() != 1 {
                bad += 1;
            }
        }
    }
    (vec![("one non-tree edge", bad == 0)], format!("{loops} loops over 128 colorings, {bad} with other than one non-tree edge"))
}

fn boundary_path_equivalence() -> (Vec<Check>, String) {
    let p = four_faces();
    let root = p.root();
    let (mut cases, mut bad) = (0, 0);
    for c in colorings(&p) {
        let e = loops_from_coloring(&c);
        for &t in p.boundary_cycle() {
            if t == root || p.degree(t) != 2 {
                continue;
            }
            cases += 1;
            let chordal = c.with_boundary(BoundaryCondition::ChordalArc { a: root, b: t }).expect("degree-two endpoints");
            if boundary_path_from_loops(&c, &e, t).ok() != Some(exploration_path(&chordal, t).vertices) {
                bad += 1;
            }
        }
    }
    (vec![("equivalence", bad == 0)], format!("{cases} (coloring, target) cases, {bad} mismatches"))
}

fn heights() -> (Vec<Check>, String) {
    let start = Instant::now();
    let p7 = flower();
    let mut adjacency_bad = 0;
    for c in colorings(&p7) {
        let h = height_function(&c, p7.root_position()).expect("default root").values;
        for f in 0..p7.num_faces() {
            adjacency_bad += p7.face_neighbors(f).filter(|&g| (h[f] - h[g]).abs() > 6).count();
        }
    }
    let p6 = six_faces();
    let hs: Vec<Vec<i64>> = colorings(&p6).map(|c| height_function(&c, p6.root_position()).expect("default root").values).collect();
    let (mut pairs, mut mono_bad) = (0, 0);
    for a in 0..hs.len() {
        for b in 0..hs.len() {
            if a != b && a & b == a {
                pairs += 1;
                if !hs[a].iter().zip(&hs[b]).all(|(x, y)| x >= y) {
                    mono_bad += 1;
                }
            }
        }
    }
    let roots: Vec<usize> = (0..p6.boundary_cycle().len()).filter(|&i| p6.with_root(i).is_ok()).collect();
    let (mut shifts, mut rot_bad) = (0, 0);
    for c in colorings(&p6) {
        let hr: Vec<Vec<i64>> = roots.iter().map(|&r| height_function(&c, r).expect("valid root").values).collect();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                shifts += 1;
                if !hr[j].iter().zip(&hr[i]).all(|(x, y)| x >= y) {
                    rot_bad += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = vec![("adjacency", adjacency_bad == 0), ("monotonicity", mono_bad == 0), ("rotation", rot_bad == 0), ("runtime", secs < 60.0)];
    (
        ok,
        format!(
            "adjacency violations {adjacency_bad}; nested pairs with h_A >= h_B violated {mono_bad}/{pairs}; rotation violations {rot_bad}/{shifts}"
        ),
    )
}

fn on_mcmc(seed: u64) -> (Vec<Check>, String) {
    let start = Instant::now();
    let p = four_faces();
    let mut tvs = Vec::new();
    for (k, (n, x)) in [(1.0, 1.0), (1.5, 0.6), (2.0, 0.7)].into_iter().enumerate() {
        let params = OnParams::new(n, x, BoundaryCondition::AllWhiteOutside).expect("positive parameters");
        let exact = on_exact_distribution(&p, &params).expect("small patch");
        // 10^6 proposals in total: sweeps of one proposal per face.
        let emp = on_mcmc_distribution(&p, &params, 1_000_000 / p.num_faces(), stream_seed(seed, k as u64)).expect("small patch");
        tvs.push(total_variation(&exact.probs, &emp));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = vec![("total variation", tvs.iter().all(|&t| t < 0.02)), ("runtime", secs < 60.0)];
    (ok, format!("TV distances {:.4} {:.4} {:.4}", tvs[0], tvs[1], tvs[2]))
}

fn bessel_endpoint(delta: f64, dt: f64, paths: usize, seed: u64, jobs: usize) -> Vec<f64> {
    let p = BesselParams::new(delta, 0.0).expect("valid dimension");
    run_batch(paths, seed, jobs, |_, s| *bessel_path(&p, dt, 1.0, s).expect("valid grid").x.values.last().expect("non-empty"))
}

fn bessel_marginals(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let dt = 1e-3;
    let x1 = bessel_endpoint(1.0, dt, 10_000, stream_seed(seed, 0), jobs);
    let d = ks_statistic(&x1, |x| if x <= 0.0 { 0.0 } else { 2.0 * normal_cdf(x) - 1.0 });
    let p = ks_p_value(d, x1.len() as f64);
    let mut ok = vec![("delta = 1 KS", p > 0.01)];
    let mut means_ok = true;
    let mut detail = format!("delta=1 KS p={p:.3}");
    for (k, delta) in [1.0, 5.0 / 3.0, 2.0, 3.0].into_iter().enumerate() {
        let z: Vec<f64> = bessel_endpoint(delta, dt, 10_000, stream_seed(seed, 1 + k as u64), jobs).iter().map(|x| x * x).collect();
        let (m, se) = (mean(&z), std_error(&z));
        means_ok &= (m - delta).abs() < 3.0 * se;
        detail.push_str(&format!("; E[Z_1]({delta:.3})={m:.4}+-{se:.4}"));
    }
    ok.push(("means", means_ok));
    (ok, detail)
}

fn strictly(xs: &[f64], increasing: bool) -> bool {
    xs.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn eps_jump_limits(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let eps = [0.1, 0.05, 0.025];
    let (dt, paths) = (1e-5, 1000);
    // The same seeds for every epsilon couple the driving noise across the sweep.
    let eps_stats = |delta: f64, k: u64| -> Vec<(f64, f64)> {
        eps.iter()
            .map(|&e| {
                let p = BesselParams::new(delta, 0.0).and_then(|p| p.with_epsilon(e)).expect("valid parameters");
                let r = run_batch(paths, stream_seed(seed, k), jobs, |_, s| {
                    let path = eps_bessel_path(&p, dt, 1.0, s).expect("valid grid");
                    (*path.j.last().expect("non-empty"), path.sum_sq_jumps)
                });
                let j: Vec<f64> = r.iter().map(|v| v.0).collect();
                let sq: Vec<f64> = r.iter().map(|v| v.1).collect();
                (mean(&j), mean(&sq))
            })
            .collect()
    };
    let d3 = eps_stats(3.0, 0);
    let d05 = eps_stats(0.5, 1);
    let d15 = eps_stats(1.5, 2);
    let exact = BesselParams::new(5.0 / 3.0, 0.0).expect("valid dimension");
    let up: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let c = run_batch(paths, stream_seed(seed, 3), jobs, |_, s| bessel_path(&exact, dt, 1.0, s).expect("valid grid").upcrossings(e) as f64);
            e * mean(&c)
        })
        .collect();
    let col = |v: &[(f64, f64)], first: bool| -> Vec<f64> { v.iter().map(|x| if first { x.0 } else { x.1 }).collect() };
    let checks = [
        strictly(&col(&d3, true), false),
        strictly(&col(&d05, true), true),
        strictly(&col(&d05, false), false),
        strictly(&col(&d15, false), false),
        strictly(&up, false),
    ];
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    (
        vec![
            ("J delta=3 decreasing", checks[0]),
            ("J delta=0.5 increasing", checks[1]),
            ("squares delta=0.5 decreasing", checks[2]),
            ("squares delta=1.5 decreasing", checks[3]),
            ("upcrossings delta=5/3 decreasing", checks[4]),
        ],
        format!(
            "J(3)=[{}] J(0.5)=[{}] sq(0.5)=[{}] sq(1.5)=[{}] eps*up(5/3)=[{}]",
            fmt(&col(&d3, true)),
            fmt(&col(&d05, true)),
            fmt(&col(&d05, false)),
            fmt(&col(&d15, false)),
            fmt(&up)
        ),
    )
}

fn stable_sampler(seed: u64) -> (Vec<Check>, String) {
    let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    let (mut cf_ok, mut positive_ok) = (true, true);
    let mut detail = Vec::new();
    for (k, (alpha, beta, mu)) in [(0.5, 1.0, 0.0), (1.0, 0.0, 0.0), (1.5, 0.7, 0.0), (2.0, 0.0, 0.0)].into_iter().enumerate() {
        let s = StableParams::new(alpha, beta, mu, 1.0).expect("valid stable parameters");
        let xs = stable_sample(&s, 100_000, stream_seed(seed, k as u64));
        let sup = grid.iter().map(|&l| (empirical_char_fn(&xs, l) - stable_char_fn(&s, l)).norm()).fold(0.0, f64::max);
        cf_ok &= sup < 0.02;
        if alpha == 0.5 {
            let positive = xs.iter().all(|&x| x > 0.0);
            positive_ok &= positive;
            detail.push(format!("all positive {positive}"));
        }
        detail.push(format!("({alpha},{beta},{mu}) sup {sup:.4}"));
    }
    (vec![("characteristic function", cf_ok), ("positive support", positive_ok)], detail.join("; "))
}

fn loewner_oracles(seed: u64) -> (Vec<Check>, String) {
    let dt = 1e-4;
    let n = 10_000;
    let zero = Driver::new(LoewnerMode::Chordal, dt, vec![0.0; n + 1]);
    let tip = chordal_trace_point(&zero, n);
    let tip_err = (tip - Complex64::new(0.0, 2.0)).norm() / 2.0;
    let mut swallow_err: f64 = 0.0;
    for y in [0.5, 1.0, 1.5] {
        let r = chordal_forward(&zero, Complex64::new(0.0, y), 2.0);
        swallow_err = swallow_err.max(r.swallow_time.map_or(f64::INFINITY, |t| (t - y * y / 4.0).abs()));
    }
    let radial = sle_driver(2.0, LoewnerMode::Radial, dt, 1.0, seed).expect("valid driver");
    let r = radial_forward(&radial, Complex64::new(0.0, 0.0), 1.0);
    let logd = *r.log_abs_derivative.last().expect("non-empty");
    let ok = vec![("tip", tip_err < 1e-3), ("swallow time", swallow_err < 1e-3), ("radial derivative", (logd - 1.0).abs() < 1e-3)];
    (ok, format!("tip rel err {tip_err:.2e}; swallow err {swallow_err:.2e}; radial log|g'(0)| at 1 = {logd:.6}"))
}

fn kr_driver(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let spots = [delta_of(6.0, 0.0), delta_of(4.0, -2.0), delta_of(8.0, 2.0)];
    let spots_ok = (spots[0] - 5.0 / 3.0).abs() < 1e-12 && spots[1] == 1.0 && spots[2] == 2.0;
    let mut ratio_err: f64 = 0.0;
    for (kappa, rho) in [(3.0, -2.5), (4.0, -3.0), (6.0, -2.2), (7.0, -4.5)] {
        let (w2, o2) = jump_coefficients(kappa, rho);
        ratio_err = ratio_err.max((o2 / w2 + 2.0 / rho).abs());
    }
    let cfg = KrConfig {
        kappa: 3.0,
        rho: -2.5,
        mode: LoewnerMode::Chordal,
        variant: KrVariant::Eps { epsilon: 0.05, beta: 0.0, mu: 0.0 },
        x0: 0.0,
        dt: 1e-4,
        t_end: 1.0,
        seed,
    };
    let d = sle_kr_driver(&cfg).expect("admissible parameters");
    for j in &d.jump_events {
        ratio_err = ratio_err.max((j.o_jump / j.w_jump + 2.0 / cfg.rho).abs());
    }
    let (dt, paths) = (1e-5f64, 20);
    let n = 100_000;
    let sups: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&e| {
            let s = run_batch(paths, stream_seed(seed, 1), jobs, |_, s| {
                let mut rng = rng_from_seed(s);
                let noise: Vec<f64> = (0..n).map(|_| dt.sqrt() * normal(&mut rng)).collect();
                let base = KrConfig { kappa: 6.0, rho: 0.0, mode: LoewnerMode::Chordal, variant: KrVariant::Exact, x0: 0.0, dt, t_end: 1.0, seed: s };
                let exact = sle_kr_driver_from_noise(&base, &noise).expect("admissible");
                let eps = sle_kr_driver_from_noise(&KrConfig { variant: KrVariant::Eps { epsilon: e, beta: 1.0, mu: 0.0 }, ..base }, &noise).expect("admissible");
                let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let (oe, oc) = (exact.o.as_deref().unwrap_or(&[]), eps.o.as_deref().unwrap_or(&[]));
                sup(&exact.w, &eps.w).max(sup(oe, oc))
            });
            mean(&s)
        })
        .collect();
    let ok = vec![
        ("delta spot values", spots_ok),
        ("jump ratio", ratio_err < 1e-12 && !d.jump_events.is_empty()),
        ("sup distance decreasing", strictly(&sups, false)),
    ];
    (
        ok,
        format!(
            "delta spots {:.4},{:.4},{:.4}; jump ratio err {ratio_err:.1e} over {} driver jumps; sup distance [{:.3e},{:.3e},{:.3e}]",
            spots[0],
            spots[1],
            spots[2],
            d.jump_events.len(),
            sups[0],
            sups[1],
            sups[2]
        ),
    )
}

/// First time `|B| >= level` for standard Brownian motion, with a Brownian-bridge
/// correction for crossings between grid points.
pub fn reflected_first_passage(level: f64, dt: f64, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let sd = dt.sqrt();
    let (mut x, mut t) = (0.0f64, 0.0);
    loop {
        let y = x + sd * normal(&mut rng);
        t += dt;
        if y.abs() >= level {
            return t;
        }
        // Crossing probability of the nearer barrier given both endpoints inside.
        let barrier = if y + x >= 0.0 { level } else { -level };
        let p = (-2.0 * (barrier - x) * (barrier - y) / dt).exp();
        if uniform(&mut rng) < p {
            return t - 0.5 * dt;
        }
        x = y;
    }
}

fn cle_kappa_four(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let start = Instant::now();
    let p = ThetaParams::new(4.0, 0.0, 1e-3, 1e-5).expect("admissible");
    let n = 10_000;
    let t = run_batch(n, stream_seed(seed, 0), jobs, |_, s| conformal_radius_sample(p, 1, s)[0]);
    // At kappa = 4 the angle is 2|B|, so T is the first time |B| reaches pi.
    let oracle = run_batch(n, stream_seed(seed, 1), jobs, |_, s| reflected_first_passage(PI, 1e-4, s));
    let m = mean(&t);
    let rel = (m - PI * PI).abs() / (PI * PI);
    let pks = ks_two_sample_p_value(ks_two_sample(&t, &oracle), n, n);
    let secs = start.elapsed().as_secs_f64();
    let ok = vec![("mean", rel < 0.02), ("KS vs reflected BM", pks > 0.01), ("runtime", secs < 600.0)];
    (ok, format!("mean T {m:.4} (pi^2 = {:.4}, rel err {rel:.4}); oracle mean {:.4}; KS p {pks:.3}", PI * PI, mean(&oracle)))
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
    cov / (variance(a) * variance(b)).sqrt() * (a.len() as f64 - 1.0) / a.len() as f64
}

fn nested_renewal(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let p = ThetaParams::new(6.0, 1.0, 1e-2, 1e-3).expect("admissible");
    let n = 10_000;
    let s = run_batch(n, seed, jobs, |_, s| nested_radius_sequence(p, 2, s).expect("j_max >= 1"));
    let g1: Vec<f64> = s.iter().map(|r| r.gaps[0]).collect();
    let g2: Vec<f64> = s.iter().map(|r| r.gaps[1]).collect();
    let pks = ks_two_sample_p_value(ks_two_sample(&g1, &g2), n, n);
    let r = correlation(&g1, &g2);
    let bound = 3.0 / (n as f64).sqrt();
    (vec![("KS", pks > 0.01), ("correlation", r.abs() < bound)], format!("KS p {pks:.3}; correlation {r:.4} (bound {bound:.4}); mean gaps {:.3}, {:.3}", mean(&g1), mean(&g2)))
}

/// `E[T]` for the angle diffusion reflected at 0 and stopped at `2 pi`, in closed form.
pub fn mean_closure_time(kappa: f64) -> f64 {
    let a = (1.0 - 4.0 / kappa).abs();
    if a == 0.0 {
        return PI * PI;
    }
    4.0 * PI * (PI * a).tan() / (kappa * a)
}

fn kappa_trend(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let kappas = [3.2, 3.0, 2.8];
    let means: Vec<f64> = kappas
        .iter()
        .enumerate()
        .map(|(k, &kappa)| {
            let p = ThetaParams::new(kappa, 0.0, 1e-2, 1e-4).expect("admissible");
            mean(&run_batch(1000, stream_seed(seed, k as u64), jobs, |_, s| conformal_radius_sample(p, 1, s)[0]))
        })
        .collect();
    let trend_ok = strictly(&means, false);
    let kappa = 2.7;
    let cfg = KrConfig {
        kappa,
        rho: kappa - 6.0,
        mode: LoewnerMode::Chordal,
        variant: KrVariant::Eps { epsilon: 1e-2, beta: 1.0, mu: 0.0 },
        x0: 0.0,
        dt: 5e-6,
        t_end: 1.0,
        seed: 0,
    };
    let w1 = run_batch(2000, stream_seed(seed, 9), jobs, |_, s| {
        *sle_kr_driver(&KrConfig { seed: s, ..cfg }).expect("admissible").w.last().expect("non-empty")
    });
    let rate = variance(&w1) / cfg.t_end;
    let var_ok = (rate - 6.0).abs() < 0.6;
    let oracle: Vec<String> = kappas.iter().map(|&k| format!("{:.2}", mean_closure_time(k))).collect();
    (
        vec![("mean T decreasing", trend_ok), ("variance rate", var_ok)],
        format!(
            "mean T at kappa 3.2,3.0,2.8 = {:.2},{:.2},{:.2} (closed form {}); strictly decreasing {trend_ok}; Var(W_1) at kappa 2.7 = {rate:.3} (target 6 +- 10%)",
            means[0],
            means[1],
            means[2],
            oracle.join(",")
        ),
    )
}

/// Driving function of the percolation exploration path on a rhombus, seen through
/// the wedge map that opens the rhombus's sixty-degree root corner to a half-plane.
pub fn rhombus_driving(side: i32, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let faces: Vec<FaceCoord> = (0..side).flat_map(|r| (0..side).map(move |q| FaceCoord::new(q, r))).collect();
    let p = build_patch(&faces, 0).expect("rhombus is simply connected");
    let root = p.root();
    let far = |v: usize| {
        let (a, b) = (p.position(v), p.position(root));
        (a.0 - b.0).hypot(a.1 - b.1)
    };
    let target = *p.boundary_cycle().iter().filter(|&&v| p.degree(v) == 2).max_by(|&&a, &&b| far(a).total_cmp(&far(b))).expect("boundary");
    // With n = 1 and x = 1 all colorings are equally likely: independent fair faces.
    let mut rng = rng_from_seed(seed);
    let black: Vec<bool> = (0..p.num_faces()).map(|_| uniform(&mut rng) < 0.5).collect();
    let c = Coloring::new(&p, black, BoundaryCondition::ChordalArc { a: root, b: target }).expect("valid arc");
    let path = exploration_path(&c, target);
    let s3 = 3f64.sqrt();
    let rot = Complex64::from_polar(1.0, PI / 3.0);
    let apex = -0.5 * s3 * (1.0 + rot);
    let scale = s3 * f64::from(side);
    let pts: Vec<Complex64> = path
        .vertices
        .iter()
        .map(|&v| {
            let (x, y) = p.position(v);
            let z = (Complex64::new(x, y) - apex) / scale;
            z * z * z
        })
        .collect();
    zipper_driver(&pts).expect("finite points")
}

fn discrete_to_continuum(seed: u64, jobs: usize) -> (Vec<Check>, String) {
    let samples = run_batch(300, seed, jobs, |_, s| rhombus_driving(20, s));
    // Short enough that the curve stays where the opened rhombus still looks like the half-plane.
    let horizon = 0.05;
    let grid: Vec<f64> = (1..=20).map(|i| horizon * i as f64 / 20.0).collect();
    let vars: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let w: Vec<f64> = samples
                .iter()
                .filter(|(ts, _)| ts.last().is_some_and(|&e| e >= t))
                .map(|(ts, ws)| ws[ts.partition_point(|&x| x < t).min(ws.len() - 1)])
                .collect();
            variance(&w)
        })
        .collect();
    let fit = linear_fit(&grid, &vars);
    (vec![("linear variance", fit.r_squared > 0.9)], format!("linear fit of Var(W_t) on t up to {horizon}: slope {:.3} (unasserted kappa estimate), R^2 {:.3}", fit.slope, fit.r_squared))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_mean_closure_time() {
        assert!((mean_closure_time(4.0) - PI * PI).abs() < 1e-12);
        assert!((mean_closure_time(6.0) - 10.88).abs() < 0.01);
        assert!(mean_closure_time(2.8) > mean_closure_time(3.0));
    }

    #[test]
    fn reflected_passage_mean() {
        let t: Vec<f64> = (0..4000).map(|i| reflected_first_passage(1.0, 1e-3, stream_seed(4, i))).collect();
        // E[inf t: |B_t| = a] = a^2.
        assert!((mean(&t) - 1.0).abs() < 3.0 * std_error(&t), "{}", mean(&t));
    }

    #[test]
    fn suites_partition_criteria() {
        let mut all: Vec<u8> = [Suite::Discrete, Suite::Continuum, Suite::Cle, Suite::Exploratory].iter().flat_map(|s| s.criteria()).collect();
        all.sort_unstable();
        assert_eq!(all, Suite::All.criteria());
    }

    #[test]
    fn rhombus_driving_starts_at_corner() {
        let (t, w) = rhombus_driving(6, 3);
        assert_eq!(t[0], 0.0);
        assert!(w[0].abs() < 1e-2);
        assert!(t.windows(2).all(|p| p[1] >= p[0]));
    }
}
