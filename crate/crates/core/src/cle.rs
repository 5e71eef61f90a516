//! CLE statistics from the radial SLE_kappa(kappa - 6) exploration toward a
//! target point.
//!
//! The lifted angle `theta = arg W - arg O` solves
//! `d theta = (kappa - 4)/2 cot(theta/2) dt + sqrt(kappa) dB` between visits to
//! multiples of `2 pi`. Near a multiple the singular part of the drift is a
//! Bessel drift of dimension `3 - 8/kappa`, so each step uses the Bessel
//! splitting step in the distance to the nearest multiple plus an Euler step
//! for the smooth remainder. Reaching the current anchor multiple restarts the
//! angle at distance `epsilon`; reaching a neighbouring multiple closes a loop
//! around the target and moves the anchor there. Times are radial capacity,
//! i.e. `-log` of the conformal radius seen from the target.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::loewner::{radial_trace_point, zipper_driver, Driver, LoewnerMode, TracePath};
use crate::rng::{normal, rng_from_seed, skew_sign, stream_seed, SimRng};
use crate::stats::ks_two_sample;
use crate::stochastic::bessel_step;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CleError {
    #[error("inadmissible parameters: {0}")]
    InadmissibleParams(&'static str),
    #[error("target must lie in the open unit disk")]
    InvalidTarget,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub kappa: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub dt: f64,
}

impl ThetaParams {
    pub fn new(kappa: f64, beta: f64, epsilon: f64, dt: f64) -> Result<Self, CleError> {
        if !(kappa > 8.0 / 3.0 && kappa < 8.0) {
            return Err(CleError::InadmissibleParams("kappa must lie in (8/3, 8)"));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(CleError::InadmissibleParams("beta must lie in [-1, 1]"));
        }
        if kappa == 4.0 && beta != 0.0 {
            return Err(CleError::InadmissibleParams("kappa = 4 requires beta = 0"));
        }
        if !(epsilon > 0.0 && dt > 0.0) {
            return Err(CleError::InadmissibleParams("epsilon and dt must be positive"));
        }
        Ok(ThetaParams { kappa, beta, epsilon, dt })
    }

    pub fn delta(&self) -> f64 {
        3.0 - 8.0 / self.kappa
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Event {
    None,
    Collision,
    Closure,
}

/// `cot(u/2) - 2/u`, smooth near zero.
fn cot_regular(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        -u / 6.0 - u * u * u / 360.0
    } else {
        1.0 / libm::tan(u / 2.0) - 2.0 / u
    }
}

fn parity_side(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

struct ThetaStepper {
    p: ThetaParams,
    sk: f64,
    inv_sk: f64,
    sqdt: f64,
    delta: f64,
    drift: f64,
    rho: f64,
    theta: f64,
    /// Nearest multiple of `2 pi` to `theta`, kept up to date incrementally.
    near: i64,
    anchor: i64,
    /// Lifted argument of the driving point, when tracked.
    w: Option<f64>,
}

impl ThetaStepper {
    fn new(p: ThetaParams, track_w: bool) -> Self {
        ThetaStepper {
            p,
            sk: libm::sqrt(p.kappa),
            inv_sk: 1.0 / libm::sqrt(p.kappa),
            sqdt: libm::sqrt(p.dt),
            delta: p.delta(),
            drift: (p.kappa - 4.0) / 2.0,
            rho: p.kappa - 6.0,
            theta: 0.0,
            near: 0,
            anchor: 0,
            w: track_w.then_some(0.0),
        }
    }

    /// Restart at distance epsilon from the multiple `n`; even multiples are left upward.
    fn restart(&mut self, n: i64, rng: &mut SimRng) {
        let side = parity_side(n) * skew_sign(rng, self.p.beta);
        let e = side * self.p.epsilon;
        self.theta = TAU * n as f64 + e;
        self.near = n;
        if let Some(w) = self.w.as_mut() {
            if self.rho < -2.0 {
                *w += self.rho / (self.rho + 2.0) * e;
            }
        }
    }

    fn step(&mut self, rng: &mut SimRng) -> Event {
        let db = self.sqdt * normal(rng);
        let mut u = self.theta - TAU * self.near as f64;
        if u.abs() > PI {
            self.near = libm::round(self.theta / TAU) as i64;
            u = self.theta - TAU * self.near as f64;
        }
        let n = self.near;
        let side = if u > 0.0 {
            1.0
        } else if u < 0.0 {
            -1.0
        } else {
            parity_side(n)
        };
        let x = u.abs() * self.inv_sk;
        let (nx, hit) = bessel_step(x, side * db, self.delta, self.p.dt);
        let landed = if hit { 0.0 } else { nx };
        let need_reg = self.drift != 0.0 || self.w.is_some();
        let reg = if need_reg { cot_regular(u) } else { 0.0 };
        if let Some(w) = self.w.as_mut() {
            let inv_u = if self.delta == 1.0 {
                self.p.dt / u
            } else {
                side / self.sk * 2.0 / (self.delta - 1.0) * (landed - x - side * db)
            };
            *w += self.rho * inv_u + self.rho / 2.0 * reg * self.p.dt + self.sk * db;
        }
        if hit {
            self.theta = TAU * n as f64;
            let event = if n == self.anchor { Event::Collision } else { Event::Closure };
            self.anchor = n;
            self.restart(n, rng);
            event
        } else {
            self.theta = TAU * n as f64 + side * self.sk * nx + self.drift * reg * self.p.dt;
            Event::None
        }
    }
}

/// A sampled angle path with its anchors and loop closure events.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPath {
    pub dt: f64,
    pub theta: Vec<f64>,
    /// Anchor multiple `m` (theta near `2 pi m`) at each grid time.
    pub anchor: Vec<i64>,
    /// `(s_j, t_j)`: last visit of the anchor before closure `j`, and the closure time.
    pub closure_times: Vec<(f64, f64)>,
    pub beta: f64,
    pub kappa: f64,
    pub epsilon: f64,
}

struct Recorded {
    path: ThetaPath,
    w: Option<Vec<f64>>,
    closure_index: Vec<(usize, usize)>,
}

fn run_theta(p: ThetaParams, seed: u64, t_max: f64, max_closures: Option<usize>, track_w: bool) -> Recorded {
    let mut rng = rng_from_seed(seed);
    let mut st = ThetaStepper::new(p, track_w);
    st.restart(0, &mut rng);
    let mut theta = alloc::vec![st.theta];
    let mut anchor = alloc::vec![0];
    let mut w = st.w.map(|w| alloc::vec![w]);
    let mut closures = Vec::new();
    let mut closure_index = Vec::new();
    let mut last_visit = 0usize;
    let n_max = libm::round(t_max / p.dt) as usize;
    for k in 1..=n_max {
        match st.step(&mut rng) {
            Event::None => {}
            Event::Collision => last_visit = k,
            Event::Closure => {
                closures.push((last_visit as f64 * p.dt, k as f64 * p.dt));
                closure_index.push((last_visit, k));
                last_visit = k;
            }
        }
        theta.push(st.theta);
        anchor.push(st.anchor);
        if let (Some(v), Some(x)) = (w.as_mut(), st.w) {
            v.push(x);
        }
        if max_closures.is_some_and(|m| closures.len() >= m) {
            break;
        }
    }
    Recorded {
        path: ThetaPath { dt: p.dt, theta, anchor, closure_times: closures, beta: p.beta, kappa: p.kappa, epsilon: p.epsilon },
        w,
        closure_index,
    }
}

pub fn theta_path(p: ThetaParams, t_max: f64, seed: u64) -> ThetaPath {
    run_theta(p, seed, t_max, None, false).path
}

/// Closure times of the first `j_max` loops around the target, without storing the path.
pub fn closure_sequence(p: ThetaParams, j_max: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut st = ThetaStepper::new(p, false);
    st.restart(0, &mut rng);
    let mut out = Vec::with_capacity(j_max);
    let mut k: u64 = 0;
    while out.len() < j_max {
        k += 1;
        if st.step(&mut rng) == Event::Closure {
            out.push(k as f64 * p.dt);
        }
    }
    out
}

/// `T` together with the successive log-conformal-radius gaps of nested loops.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusSample {
    pub t: f64,
    pub gaps: Vec<f64>,
}

pub fn nested_radius_sequence(p: ThetaParams, j_max: usize, seed: u64) -> Result<RadiusSample, CleError> {
    if j_max < 1 {
        return Err(CleError::InadmissibleParams("j_max must be at least 1"));
    }
    let times = closure_sequence(p, j_max, seed);
    let mut gaps = Vec::with_capacity(j_max);
    let mut prev = 0.0;
    for &t in &times {
        gaps.push(t - prev);
        prev = t;
    }
    Ok(RadiusSample { t: gaps[0], gaps })
}

/// Independent samples of `T`, the `-log` conformal radius of the first loop around the target.
pub fn conformal_radius_sample(p: ThetaParams, count: usize, seed: u64) -> Vec<f64> {
    (0..count).map(|i| closure_sequence(p, 1, stream_seed(seed, i as u64))[0]).collect()
}

/// Part of a loop around the target traced between `s_j` and `t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopArc {
    pub index: usize,
    pub s: f64,
    pub t: f64,
    /// Tip of the trace at time `s`, where the arc leaves the boundary of the current domain.
    /// Up to discretisation it lies on that boundary.
    pub start: Complex64,
    /// The same point in the uniformised picture: `exp(i W_s)` on the unit circle.
    pub driver_start: Complex64,
    /// Trace points at grid times in `(s, t]`.
    pub arc: TracePath,
}

/// Radial driver of the exploration together with the angle path, up to the `j_max`-th closure.
pub fn exploration_driver(p: ThetaParams, j_max: usize, seed: u64) -> (ThetaPath, Driver) {
    let rec = run_theta(p, seed, f64::INFINITY, Some(j_max), true);
    let w = rec.w.unwrap();
    let o: Vec<f64> = w.iter().zip(&rec.path.theta).map(|(w, t)| w - t).collect();
    let mut d = Driver::new(LoewnerMode::Radial, p.dt, w);
    d.hat_o = Some(rec.path.theta.clone());
    d.o = Some(o);
    (rec.path, d)
}

pub fn cle_loop_arcs(p: ThetaParams, j_max: usize, seed: u64) -> Vec<LoopArc> {
    let rec = run_theta(p, seed, f64::INFINITY, Some(j_max), true);
    let d = Driver::new(LoewnerMode::Radial, p.dt, rec.w.unwrap());
    rec.closure_index
        .iter()
        .enumerate()
        .map(|(j, &(s, t))| {
            let start = radial_trace_point(&d, s);
            let driver_start = d.radial_point(s);
            let points = (s + 1..=t).map(|k| radial_trace_point(&d, k)).collect();
            LoopArc {
                index: j + 1,
                s: s as f64 * p.dt,
                t: t as f64 * p.dt,
                start,
                driver_start,
                arc: TracePath { dt: p.dt, points, mode: LoewnerMode::Radial },
            }
        })
        .collect()
}

/// Settings for [`target_invariance_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceConfig {
    pub params: ThetaParams,
    pub z1: Complex64,
    pub z2: Complex64,
    /// Half-plane capacity at which driving values are compared.
    pub capacity: f64,
    /// Radius around the starting point whose exit is the geometric stopping time.
    pub exit_radius: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    pub driver_ks: f64,
    pub driver_p: f64,
    pub capacity_ks: f64,
    pub capacity_p: f64,
    pub passed: bool,
}

/// Disk automorphism fixing 1 and sending the target `z` to 0, inverted: maps a curve aimed at 0 to one aimed at `z`.
fn retarget(zeta: Complex64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let lambda = (one - z.conj()) / (one - z);
    (zeta + lambda * z) / (lambda + z.conj() * zeta)
}

/// Cayley map sending the disk to the upper half-plane with `1 -> 0` and `-1 -> infinity`.
fn to_half_plane(zeta: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    i * (1.0 - zeta) / (1.0 + zeta)
}

/// Chordal driving value at half-plane capacity `cap` and capacity at exit of the ball around the start.
fn chordal_statistics(points: &[Complex64], cap: f64, radius: f64) -> Option<(f64, f64)> {
    let mut hp: Vec<Complex64> = points.iter().map(|&p| to_half_plane(p)).collect();
    hp[0] = Complex64::new(0.0, 0.0);
    let exit = hp.iter().position(|p| p.norm() >= radius)?;
    let (times, w) = zipper_driver(&hp).ok()?;
    let k = times.iter().position(|&t| t >= cap)?;
    Some((w[k], times[exit]))
}

/// Compares explorations aimed at `z1` and `z2`, viewed from their common start, before
/// either target is cut off: the chordal driving value at a fixed capacity and the
/// capacity at a geometric stopping time, by two-sample KS tests.
pub fn target_invariance_check(cfg: &InvarianceConfig) -> Result<InvarianceReport, CleError> {
    if !(cfg.z1.norm() < 1.0 && cfg.z2.norm() < 1.0) {
        return Err(CleError::InvalidTarget);
    }
    let p = cfg.params;
    // Radial time long enough for the hull near the start to pass the comparison capacity.
    let horizon = 40.0 * cfg.capacity.max(cfg.exit_radius * cfg.exit_radius);
    let family = |z: Complex64, stream: u64| {
        let mut drivers = Vec::new();
        let mut caps = Vec::new();
        for i in 0..cfg.count {
            let rec = run_theta(p, stream_seed(stream, i as u64), horizon, None, true);
            let d = Driver::new(LoewnerMode::Radial, p.dt, rec.w.unwrap());
            let pts: Vec<Complex64> = (0..=d.num_steps()).map(|k| retarget(radial_trace_point(&d, k), z)).collect();
            if let Some((w, c)) = chordal_statistics(&pts, cfg.capacity, cfg.exit_radius) {
                drivers.push(w);
                caps.push(c);
            }
        }
        (drivers, caps)
    };
    let same = cfg.z1 == cfg.z2;
    let (w1, c1) = family(cfg.z1, stream_seed(cfg.seed, 1));
    let (w2, c2) = if same { (w1.clone(), c1.clone()) } else { family(cfg.z2, stream_seed(cfg.seed, 2)) };
    let driver_ks = ks_two_sample(&w1, &w2);
    let capacity_ks = ks_two_sample(&c1, &c2);
    let driver_p = crate::stats::ks_two_sample_p_value(driver_ks, w1.len(), w2.len());
    let capacity_p = crate::stats::ks_two_sample_p_value(capacity_ks, c1.len(), c2.len());
    Ok(InvarianceReport {
        samples: w1.len().min(w2.len()),
        driver_ks,
        driver_p,
        capacity_ks,
        capacity_p,
        passed: driver_p > 0.01 && capacity_p > 0.01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_two_sample_p_value, mean, std_error};
    use core::f64::consts::PI;

    /// Mean first passage from 0 to 2 pi of the angle diffusion reflected at 0:
    /// `(2/kappa) int_0^{2pi} sin(y/2)^{-p} int_0^y sin(x/2)^p dx dy` with `p = 2(kappa-4)/kappa`.
    fn mean_closure_time(kappa: f64) -> f64 {
        let p = 2.0 * (kappa - 4.0) / kappa;
        let n = 400_000;
        let h = TAU / n as f64;
        let f = |x: f64| libm::pow(libm::sin(x / 2.0), p);
        let gauss = |a: f64, b: f64| {
            let (c, r) = ((a + b) / 2.0, (b - a) / (2.0 * libm::sqrt(3.0)));
            (f(c - r) + f(c + r)) * (b - a) / 2.0
        };
        // Cells touching 0 or 2 pi use sin(x/2) ~ distance/2, integrated exactly.
        let edge = |len: f64| 2.0 * libm::pow(len / 2.0, p + 1.0) / (p + 1.0);
        let (mut inner, mut total) = (0.0, 0.0);
        for i in 0..n {
            let (a, m, b) = (i as f64 * h, (i as f64 + 0.5) * h, (i as f64 + 1.0) * h);
            let half = inner + if i == 0 { edge(h / 2.0) } else { gauss(a, m) };
            total += half / f(m) * h;
            inner += if i == 0 || i == n - 1 { edge(h) } else { gauss(a, b) };
        }
        2.0 / kappa * total
    }

    #[test]
    fn params_validate() {
        assert!(ThetaParams::new(2.5, 0.0, 0.01, 1e-3).is_err());
        assert!(ThetaParams::new(4.0, 0.5, 0.01, 1e-3).is_err());
        assert!(ThetaParams::new(4.0, 0.0, 0.01, 1e-3).is_ok());
        assert!(ThetaParams::new(6.0, 1.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn quadrature_oracle_sanity() {
        assert!((mean_closure_time(4.0) - PI * PI).abs() < 1e-3);
        // Closed form of the same double integral.
        for kappa in [3.2, 6.0] {
            let a: f64 = 1.0 - 4.0 / kappa;
            let closed = 4.0 * PI * libm::tan(PI * a.abs()) / (kappa * a.abs());
            assert!((mean_closure_time(kappa) - closed).abs() < 1e-2 * closed, "{kappa}: {} {closed}", mean_closure_time(kappa));
        }
    }

    #[test]
    fn anchors_move_by_one_at_closures() {
        let p = ThetaParams::new(6.0, 0.0, 0.01, 1e-3).unwrap();
        let path = theta_path(p, 200.0, 4);
        assert!(path.closure_times.len() > 3);
        assert!(path.anchor.windows(2).all(|w| (w[1] - w[0]).abs() <= 1));
        let changes = path.anchor.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, path.closure_times.len());
        assert!(path.closure_times.windows(2).all(|w| w[0].1 <= w[1].0));
        for (k, &th) in path.theta.iter().enumerate() {
            let m = path.anchor[k] as f64 * TAU;
            assert!(th > m - TAU - 1e-9 && th < m + TAU + 1e-9);
        }
    }

    #[test]
    fn kappa_four_is_driftless() {
        let p = ThetaParams::new(4.0, 0.0, 1e-3, 1e-4).unwrap();
        let path = theta_path(p, 2.0, 1);
        let incs: Vec<f64> = path.theta.windows(2).map(|w| w[1] - w[0]).filter(|d| d.abs() < 0.05).collect();
        assert!(mean(&incs).abs() < 3.0 * std_error(&incs));
    }

    #[test]
    fn drift_regression_at_kappa_six() {
        let p = ThetaParams::new(6.0, 1.0, 0.01, 1e-4).unwrap();
        let mut resid = Vec::new();
        for seed in 0..10 {
            let path = theta_path(p, 5.0, seed);
            for k in 0..path.theta.len() - 1 {
                let u = path.theta[k] - TAU * libm::round(path.theta[k] / TAU);
                if u.abs() > 0.5 && path.anchor[k] == path.anchor[k + 1] {
                    resid.push((path.theta[k + 1] - path.theta[k]) / p.dt - 1.0 / libm::tan(path.theta[k] / 2.0));
                }
            }
        }
        assert!(mean(&resid).abs() < 3.0 * std_error(&resid));
    }

    #[test]
    fn mean_closure_time_matches_quadrature() {
        let p = ThetaParams::new(6.0, 1.0, 1e-3, 1e-3).unwrap();
        let ts = conformal_radius_sample(p, 2000, 5);
        let expect = mean_closure_time(6.0);
        assert!((mean(&ts) - expect).abs() < 3.0 * std_error(&ts) + 0.02 * expect, "{} vs {expect}", mean(&ts));
    }

    #[test]
    fn gaps_renew() {
        let p = ThetaParams::new(6.0, 1.0, 1e-3, 2e-3).unwrap();
        let s: Vec<RadiusSample> = (0..800).map(|i| nested_radius_sequence(p, 2, stream_seed(3, i)).unwrap()).collect();
        let g1: Vec<f64> = s.iter().map(|r| r.gaps[0]).collect();
        let g2: Vec<f64> = s.iter().map(|r| r.gaps[1]).collect();
        assert!(s.iter().all(|r| r.t == r.gaps[0] && r.gaps.iter().all(|&g| g > 0.0)));
        assert!(ks_two_sample_p_value(ks_two_sample(&g1, &g2), 800, 800) > 0.01);
    }

    #[test]
    fn loop_arcs_start_on_circle_and_stay_in_disk() {
        let p = ThetaParams::new(6.0, 1.0, 1e-3, 1e-3).unwrap();
        let arcs = cle_loop_arcs(p, 1, 2);
        assert_eq!(arcs.len(), 1);
        let a = &arcs[0];
        assert!((a.driver_start.norm() - 1.0).abs() < 1e-4);
        assert!(a.start.norm() <= 1.0 + 1e-6);
        assert_eq!(a.arc.points.len(), libm::round((a.t - a.s) / p.dt) as usize);
        assert!(a.arc.points.iter().all(|z| z.norm() <= 1.0 + 1e-6));
    }

    #[test]
    fn invariance_identical_targets() {
        let p = ThetaParams::new(6.0, 1.0, 1e-3, 1e-4).unwrap();
        let cfg = InvarianceConfig { params: p, z1: Complex64::new(0.0, 0.0), z2: Complex64::new(0.0, 0.0), capacity: 0.002, exit_radius: 0.1, count: 30, seed: 1 };
        let r = target_invariance_check(&cfg).unwrap();
        assert_eq!(r.driver_ks, 0.0);
        assert!(r.passed);
        assert!(target_invariance_check(&InvarianceConfig { z2: Complex64::new(1.0, 0.0), ..cfg }).is_err());
    }
}
