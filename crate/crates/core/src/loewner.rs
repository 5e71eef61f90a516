//! Chordal and radial Loewner chains with piecewise-constant driving.
//!
//! On a step of length `dt` with constant driving value the Loewner flow has
//! a closed form (a vertical slit for the chordal equation, a radial slit for
//! the radial one), so forward maps and traces are exact compositions of
//! elementary slit maps. The driving value on step `j` (from `t_{j-1}` to `t_j`)
//! is `W_j`.
//!
//! Radial drivers store lifted arguments: the driving point is `exp(i w_k)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::rng::{normal, rng_from_seed, skew_sign, stream_seed, SimRng};
use crate::stochastic::{bessel_step, StochasticError};

/// Points closer than this to the driving value are declared swallowed.
pub const SWALLOW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoewnerError {
    #[error("kappa must be non-negative and finite, got {0}")]
    InvalidKappa(f64),
    #[error("inadmissible parameters: {0}")]
    InadmissibleParams(&'static str),
    #[error("curve point {0} is not finite")]
    InvalidCurve(usize),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoewnerMode {
    Chordal,
    Radial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriverJump {
    pub index: usize,
    pub w_jump: f64,
    pub o_jump: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Driver {
    pub dt: f64,
    pub mode: LoewnerMode,
    /// Chordal driving values, or lifted arguments of the radial driving point.
    pub w: Vec<f64>,
    pub o: Option<Vec<f64>>,
    /// Lifted angle difference `w - o` (radial mode).
    pub hat_o: Option<Vec<f64>>,
    pub jump_events: Vec<DriverJump>,
}

impl Driver {
    pub fn new(mode: LoewnerMode, dt: f64, w: Vec<f64>) -> Self {
        Driver { dt, mode, w, o: None, hat_o: None, jump_events: Vec::new() }
    }

    pub fn num_steps(&self) -> usize {
        self.w.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Driving point on the unit circle at grid index `k` (radial mode).
    pub fn radial_point(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.w[k])
    }

    /// The same driving values over `[0, T]` run backwards in time.
    pub fn reversed(&self) -> Driver {
        let mut w = self.w.clone();
        w.reverse();
        Driver::new(self.mode, self.dt, w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePath {
    pub dt: f64,
    pub points: Vec<Complex64>,
    pub mode: LoewnerMode,
}

/// Trajectory of one point under the forward flow.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardResult {
    /// `g_{t_k}(z)` for every completed step before the swallow time.
    pub values: Vec<Complex64>,
    /// `log |g_{t_k}'(z)|` along the same grid.
    pub log_abs_derivative: Vec<f64>,
    pub swallow_time: Option<f64>,
}

fn steps_until(d: &Driver, until: f64) -> usize {
    let n = libm::floor(until / d.dt + 1e-9);
    (n.max(0.0) as usize).min(d.num_steps())
}

/// Square root of `s2` in the closed upper half-plane; on the real line the sign follows `hint`.
fn upper_sqrt(s2: Complex64, hint: f64) -> Complex64 {
    let mut s = s2.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re * hint < 0.0) {
        s = -s;
    }
    s
}

/// Vertical slit map of height `2 sqrt(dt)` at `w`.
pub fn chordal_slit_map(z: Complex64, w: f64, dt: f64) -> Complex64 {
    let zeta = z - w;
    w + upper_sqrt(zeta * zeta + 4.0 * dt, zeta.re)
}

pub fn chordal_slit_inverse(z: Complex64, w: f64, dt: f64) -> Complex64 {
    let zeta = z - w;
    w + upper_sqrt(zeta * zeta - 4.0 * dt, zeta.re)
}

pub fn chordal_forward(d: &Driver, z: Complex64, until: f64) -> ForwardResult {
    let n = steps_until(d, until);
    let mut values = vec![z];
    let mut logd = vec![0.0];
    let mut g = z;
    let mut ld = 0.0;
    for j in 1..=n {
        let w = d.w[j];
        let zeta = g - w;
        let s2 = zeta * zeta;
        // Swallowed inside this step if the flow reaches zero: h^2 + 4s = 0 for some s in (0, dt].
        if s2.im.abs() <= SWALLOW_TOL * s2.norm().max(1e-300) && s2.re < 0.0 && -s2.re <= 4.0 * d.dt {
            return ForwardResult { values, log_abs_derivative: logd, swallow_time: Some(d.time(j - 1) - s2.re / 4.0) };
        }
        let s = upper_sqrt(s2 + 4.0 * d.dt, zeta.re);
        ld += libm::log(zeta.norm() / s.norm());
        g = w + s;
        values.push(g);
        logd.push(ld);
        let next = d.w.get(j + 1).copied().unwrap_or(w);
        if (g - next).norm() < SWALLOW_TOL || (g.im <= 0.0 && next != w && (g.re - w) * (g.re - next) <= 0.0) {
            return ForwardResult { values, log_abs_derivative: logd, swallow_time: Some(d.time(j)) };
        }
    }
    ForwardResult { values, log_abs_derivative: logd, swallow_time: None }
}

/// Tip `gamma(t_k)`: the elementary inverse maps of steps `k, k-1, ..., 1` applied to `W_k`.
pub fn chordal_trace_point(d: &Driver, k: usize) -> Complex64 {
    let mut p = Complex64::new(d.w[k], 0.0);
    for j in (1..=k).rev() {
        p = chordal_slit_inverse(p, d.w[j], d.dt);
    }
    p
}

pub fn chordal_trace(d: &Driver) -> TracePath {
    let points = (0..=d.num_steps()).map(|k| chordal_trace_point(d, k)).collect();
    TracePath { dt: d.dt, points, mode: LoewnerMode::Chordal }
}

/// Recovers piecewise-constant driving from a curve in the closed upper half-plane
/// starting on the real line, one vertical slit per curve point. Returns capacity
/// times and driving values, both starting at `(0, Re z_0)`.
pub fn zipper_driver(points: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>), LoewnerError> {
    let mut pts: Vec<Complex64> = points.to_vec();
    let mut times = vec![0.0];
    let mut w = vec![pts[0].re];
    let mut t = 0.0;
    for k in 1..pts.len() {
        let p = pts[k];
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(LoewnerError::InvalidCurve(k));
        }
        // A point mapped onto the boundary (the curve touching it) adds no capacity.
        let wk = p.re;
        let m = p.im.max(0.0);
        let h = m * m / 4.0;
        t += h;
        times.push(t);
        w.push(wk);
        for q in pts.iter_mut().skip(k + 1) {
            *q = chordal_slit_map(*q, wk, h);
        }
    }
    Ok((times, w))
}

/// `F(u) = (1 + u)^2 / u`, the conserved quantity of the rotated radial flow up to `e^{-t}`.
fn radial_invariant(u: Complex64) -> Complex64 {
    (1.0 + u) * (1.0 + u) / u
}

/// Root of `u^2 + (2 - c) u + 1 = 0` in the closed disk; `hint` breaks ties on the circle.
fn radial_root(c: Complex64, hint: Complex64) -> Complex64 {
    let b = c - 2.0;
    let mut sq = (b * b - 4.0).sqrt();
    if (b * sq.conj()).re < 0.0 {
        sq = -sq;
    }
    let big = (b + sq) / 2.0;
    let small = 1.0 / big;
    if (small.norm() - 1.0).abs() < 1e-12 && (big.norm() - 1.0).abs() < 1e-12 {
        if big.im * hint.im > 0.0 {
            big
        } else {
            small
        }
    } else {
        small
    }
}

/// One constant-driving radial step of length `dt` for the point `z`, driving point `e^{iw}`.
pub fn radial_slit_map(z: Complex64, w: f64, dt: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let rot = Complex64::from_polar(1.0, w);
    let u0 = z / rot;
    rot * radial_root(radial_invariant(u0) * libm::exp(-dt), u0)
}

pub fn radial_slit_inverse(z: Complex64, w: f64, dt: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let rot = Complex64::from_polar(1.0, w);
    let u = z / rot;
    rot * radial_root(radial_invariant(u) * libm::exp(dt), u)
}

pub fn radial_forward(d: &Driver, z: Complex64, until: f64) -> ForwardResult {
    let n = steps_until(d, until);
    let mut values = vec![z];
    let mut logd = vec![0.0];
    let mut g = z;
    let mut ld = 0.0;
    if (z - d.radial_point(0)).norm() < SWALLOW_TOL {
        return ForwardResult { values, log_abs_derivative: logd, swallow_time: Some(0.0) };
    }
    for j in 1..=n {
        let rot = Complex64::from_polar(1.0, d.w[j]);
        let u0 = g / rot;
        let ratio = if u0.norm() < 1e-150 {
            libm::exp(d.dt)
        } else {
            let f0 = radial_invariant(u0);
            // On the radial slit F is real, at least 4, and flows down to 4 at the swallow time.
            if f0.im.abs() <= SWALLOW_TOL * f0.norm() && f0.re >= 4.0 && f0.re * libm::exp(-d.dt) <= 4.0 {
                let s = libm::log(f0.re / 4.0);
                return ForwardResult { values, log_abs_derivative: logd, swallow_time: Some(d.time(j - 1) + s) };
            }
            let u = radial_root(f0 * libm::exp(-d.dt), u0);
            let r = libm::exp(-d.dt) * ((u0 * u0 - 1.0) * u * u / ((u * u - 1.0) * u0 * u0)).norm();
            g = rot * u;
            r
        };
        ld += libm::log(ratio);
        values.push(g);
        logd.push(ld);
        // A boundary point is swallowed when the driving point passes over it between steps.
        let passed = g.norm() > 1.0 - 1e-12
            && d.w.get(j + 1).is_some_and(|&next| {
                let a = (g / rot).arg();
                let b = (g / Complex64::from_polar(1.0, next)).arg();
                a * b <= 0.0 && a.abs() < PI / 2.0 && b.abs() < PI / 2.0
            });
        if (g - d.radial_point(j)).norm() < SWALLOW_TOL || passed {
            return ForwardResult { values, log_abs_derivative: logd, swallow_time: Some(d.time(j)) };
        }
    }
    ForwardResult { values, log_abs_derivative: logd, swallow_time: None }
}

pub fn radial_trace_point(d: &Driver, k: usize) -> Complex64 {
    let mut p = d.radial_point(k);
    for j in (1..=k).rev() {
        p = radial_slit_inverse(p, d.w[j], d.dt);
    }
    p
}

pub fn radial_trace(d: &Driver) -> TracePath {
    let points = (0..=d.num_steps()).map(|k| radial_trace_point(d, k)).collect();
    TracePath { dt: d.dt, points, mode: LoewnerMode::Radial }
}

/// `W_t = sqrt(kappa) B_t` (chordal) or the argument of `exp(i sqrt(kappa) B_t)` (radial).
pub fn sle_driver(kappa: f64, mode: LoewnerMode, dt: f64, t_end: f64, seed: u64) -> Result<Driver, LoewnerError> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(LoewnerError::InvalidKappa(kappa));
    }
    let b = crate::stochastic::brownian_path(dt, t_end, seed)?;
    let sk = libm::sqrt(kappa);
    Ok(Driver::new(mode, dt, b.values.iter().map(|v| sk * v).collect()))
}

/// Bessel dimension `1 + 2 (rho + 2) / kappa` of the force-point process.
pub fn delta_of(kappa: f64, rho: f64) -> f64 {
    1.0 + 2.0 * (rho + 2.0) / kappa
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KrVariant {
    /// Coupled to a reflected Bessel path; `W - O = sqrt(kappa) X`.
    Exact,
    /// Restart at distance `epsilon` after each collision, with skew `beta` and drift `mu`.
    Eps { epsilon: f64, beta: f64, mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrConfig {
    pub kappa: f64,
    pub rho: f64,
    pub mode: LoewnerMode,
    pub variant: KrVariant,
    /// Initial `(W_0 - O_0) / sqrt(kappa)`.
    pub x0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl KrConfig {
    pub fn delta(&self) -> f64 {
        delta_of(self.kappa, self.rho)
    }

    fn validate(&self) -> Result<(), LoewnerError> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(LoewnerError::InvalidKappa(self.kappa));
        }
        let d = self.delta();
        if d.is_nan() || d <= 0.0 {
            return Err(LoewnerError::InadmissibleParams("delta must be positive"));
        }
        if self.x0.is_nan() || self.x0 < 0.0 {
            return Err(LoewnerError::InadmissibleParams("x0 must be non-negative"));
        }
        match self.variant {
            KrVariant::Exact if d == 1.0 => Err(LoewnerError::InadmissibleParams("exact variant needs delta != 1")),
            KrVariant::Exact => Ok(()),
            KrVariant::Eps { epsilon, beta, mu } => {
                if epsilon.is_nan() || epsilon <= 0.0 {
                    return Err(LoewnerError::InadmissibleParams("epsilon must be positive"));
                }
                if !(-1.0..=1.0).contains(&beta) {
                    return Err(LoewnerError::InadmissibleParams("beta must lie in [-1, 1]"));
                }
                let ok = if d == 1.0 {
                    beta == 0.0
                } else if d < 2.0 {
                    mu == 0.0
                } else {
                    beta == 1.0 && mu == 0.0
                };
                if ok {
                    Ok(())
                } else {
                    Err(LoewnerError::InadmissibleParams("unsupported (delta, beta, mu) combination"))
                }
            }
        }
    }
}

/// Jumps `(w_2, o_2)` of `(W, O)` per unit signed restart distance at a collision.
///
/// For `rho < -2` both move and `o_2 / w_2 = -2 / rho`; otherwise only `O` moves.
pub fn jump_coefficients(kappa: f64, rho: f64) -> (f64, f64) {
    let sk = libm::sqrt(kappa);
    if rho < -2.0 {
        (sk * rho / (rho + 2.0), -2.0 * sk / (rho + 2.0))
    } else {
        (0.0, -sk)
    }
}

/// `cot(u/2) - 2/u`, smooth near zero.
fn cot_regular(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        -u / 6.0 - u * u * u / 360.0
    } else {
        1.0 / libm::tan(u / 2.0) - 2.0 / u
    }
}

/// Evolves `(W, O)` for SLE_kappa(rho) on the given Brownian increments.
struct KrStepper {
    cfg: KrConfig,
    sk: f64,
    delta: f64,
    w: f64,
    o: f64,
    coins: SimRng,
}

impl KrStepper {
    fn anchor(&self) -> f64 {
        match self.cfg.mode {
            LoewnerMode::Chordal => 0.0,
            LoewnerMode::Radial => libm::round((self.w - self.o) / TAU),
        }
    }

    /// Side on which to restart after touching the anchor `m`; odd anchors are approached from above.
    fn preferred_side(&self, m: f64) -> f64 {
        if (m as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Applies a restart at distance `epsilon` on a fresh side; returns the jumps of `(W, O)`.
    fn restart(&mut self, m: f64, epsilon: f64, beta: f64, mu: f64) -> (f64, f64) {
        let side = self.preferred_side(m) * skew_sign(&mut self.coins, beta);
        let e = side * epsilon;
        let (w2, o2) = jump_coefficients(self.cfg.kappa, self.cfg.rho);
        let (wj, oj) = (w2 * e + mu * epsilon, o2 * e + mu * epsilon);
        self.w += wj;
        self.o += oj;
        (wj, oj)
    }

    fn step(&mut self, db: f64) -> bool {
        let dt = self.cfg.dt;
        let m = self.anchor();
        let u = self.w - self.o - TAU * m;
        let side = if u > 0.0 {
            1.0
        } else if u < 0.0 {
            -1.0
        } else {
            self.preferred_side(m)
        };
        let x = u.abs() / self.sk;
        let (nx, hit) = bessel_step(x, side * db, self.delta, dt);
        let eps_hit = hit && matches!(self.cfg.variant, KrVariant::Eps { .. });
        let landed = if eps_hit { 0.0 } else { nx };
        // Integral of 1/X over the step.
        let inv_x = if self.delta == 1.0 {
            dt / x.max(1e-300)
        } else {
            2.0 / (self.delta - 1.0) * (landed - x - side * db)
        };
        let (reg_o, reg_theta) = match self.cfg.mode {
            LoewnerMode::Chordal => (0.0, 0.0),
            LoewnerMode::Radial => {
                let r = cot_regular(u);
                (-r * dt, (self.cfg.rho + 2.0) / 2.0 * r * dt)
            }
        };
        self.o += -side * 2.0 / self.sk * inv_x + reg_o;
        self.w = self.o + TAU * m + side * self.sk * landed + reg_theta;
        eps_hit
    }
}

pub fn sle_kr_driver(cfg: &KrConfig) -> Result<Driver, LoewnerError> {
    cfg.validate()?;
    let n = libm::round(cfg.t_end / cfg.dt) as usize;
    if !(cfg.dt > 0.0 && n >= 1) {
        return Err(StochasticError::InvalidGrid { dt: cfg.dt, t_end: cfg.t_end }.into());
    }
    let mut rng = rng_from_seed(cfg.seed);
    let s = libm::sqrt(cfg.dt);
    let noise: Vec<f64> = (0..n).map(|_| s * normal(&mut rng)).collect();
    sle_kr_driver_from_noise(cfg, &noise)
}

/// Deterministic driver on the given Brownian increments; restart sides come from a stream of `cfg.seed`.
pub fn sle_kr_driver_from_noise(cfg: &KrConfig, noise: &[f64]) -> Result<Driver, LoewnerError> {
    cfg.validate()?;
    let sk = libm::sqrt(cfg.kappa);
    let mut st = KrStepper {
        cfg: *cfg,
        sk,
        delta: cfg.delta(),
        w: sk * cfg.x0,
        o: 0.0,
        coins: rng_from_seed(stream_seed(cfg.seed, 1)),
    };
    let mut jumps = Vec::new();
    if let KrVariant::Eps { epsilon, beta, mu } = cfg.variant {
        if cfg.x0 == 0.0 {
            let (w_jump, o_jump) = st.restart(0.0, epsilon, beta, mu);
            jumps.push(DriverJump { index: 0, w_jump, o_jump });
        }
    }
    let mut w = Vec::with_capacity(noise.len() + 1);
    let mut o = Vec::with_capacity(noise.len() + 1);
    w.push(st.w);
    o.push(st.o);
    for (k, &db) in noise.iter().enumerate() {
        if st.step(db) {
            if let KrVariant::Eps { epsilon, beta, mu } = cfg.variant {
                let m = st.anchor();
                let (w_jump, o_jump) = st.restart(m, epsilon, beta, mu);
                jumps.push(DriverJump { index: k + 1, w_jump, o_jump });
            }
        }
        w.push(st.w);
        o.push(st.o);
    }
    let hat_o = match cfg.mode {
        LoewnerMode::Radial => Some(w.iter().zip(&o).map(|(a, b)| a - b).collect()),
        LoewnerMode::Chordal => None,
    };
    Ok(Driver { dt: cfg.dt, mode: cfg.mode, w, o: Some(o), hat_o, jump_events: jumps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_error, variance};
    use crate::stochastic::{bessel_path_from_noise, BesselParams};

    fn constant(mode: LoewnerMode, dt: f64, n: usize, value: f64) -> Driver {
        Driver::new(mode, dt, vec![value; n + 1])
    }

    fn rk4(f: impl Fn(f64, Complex64) -> Complex64, z: Complex64, t_end: f64, n: usize) -> Complex64 {
        let h = t_end / n as f64;
        let mut y = z;
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, y + k1 * (h / 2.0));
            let k3 = f(t + h / 2.0, y + k2 * (h / 2.0));
            let k4 = f(t + h, y + k3 * h);
            y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        }
        y
    }

    #[test]
    fn chordal_closed_forms() {
        let d = constant(LoewnerMode::Chordal, 1e-3, 1000, 0.0);
        let r = chordal_forward(&d, Complex64::new(1.0, 0.0), 1.0);
        assert!((r.values.last().unwrap() - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-4);
        let s = chordal_forward(&d, Complex64::new(0.0, 1.3), 1.0);
        assert!((s.swallow_time.unwrap() - 1.69 / 4.0).abs() < 1e-3);
        let far = Complex64::new(600.0, 800.0);
        let g = chordal_forward(&d, far, 1.0);
        assert!((g.values.last().unwrap() - far).norm() < 1e-2);
        let tip = chordal_trace_point(&constant(LoewnerMode::Chordal, 1e-4, 10_000, 0.0), 10_000);
        assert!((tip - Complex64::new(0.0, 2.0)).norm() / 2.0 < 1e-3);
    }

    #[test]
    fn chordal_matches_rk4_for_smooth_driving() {
        let n = 2000;
        let dt = 1.0 / n as f64;
        let d = Driver::new(LoewnerMode::Chordal, dt, (0..=n).map(|k| libm::sin(3.0 * k as f64 * dt)).collect());
        let z = Complex64::new(0.4, 1.1);
        let ours = *chordal_forward(&d, z, 1.0).values.last().unwrap();
        let oracle = rk4(|t, g| 2.0 / (g - libm::sin(3.0 * t)), z, 1.0, 20_000);
        assert!((ours - oracle).norm() < 2e-3, "{ours} {oracle}");
    }

    #[test]
    fn trace_inverts_forward_map() {
        let d = sle_driver(2.0, LoewnerMode::Chordal, 1e-3, 0.5, 3).unwrap();
        let tr = chordal_trace(&d);
        assert_eq!(tr.points[0], Complex64::new(d.w[0], 0.0));
        assert!(tr.points.iter().skip(1).all(|p| p.im > 0.0));
        // Pushing an earlier tip forward lands on the real line once it has been swallowed into the boundary.
        let k = 200;
        let back = chordal_forward(&d, tr.points[k], d.time(k));
        let end = *back.values.last().unwrap();
        assert!((end - d.w[k]).norm() < 1e-6 || back.swallow_time.is_some());
        // Capacity is the parameterization: reversing the driving gives the same capacity.
        let rev = d.reversed();
        let far = Complex64::new(0.0, 1e3);
        let a = chordal_forward(&d, far, 0.5).values.last().unwrap() - far;
        let b = chordal_forward(&rev, far, 0.5).values.last().unwrap() - far;
        assert!(((a * far).re - (b * far).re).abs() / 2.0 < 1e-3);
        assert!(((a * far).re / 2.0 - 0.5).abs() < 1e-2);
    }

    #[test]
    fn zipper_recovers_driving() {
        let d = sle_driver(3.0, LoewnerMode::Chordal, 1e-3, 0.3, 11).unwrap();
        let tr = chordal_trace(&d);
        let (times, w) = zipper_driver(&tr.points).unwrap();
        for k in [10, 100, 300] {
            assert!((times[k] - d.time(k)).abs() < 1e-9, "{} {}", times[k], d.time(k));
            assert!((w[k] - d.w[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn radial_closed_forms() {
        let d = constant(LoewnerMode::Radial, 1e-3, 1000, 0.0);
        assert_eq!(radial_forward(&d, Complex64::new(0.0, 0.0), 1.0).values.last().unwrap().norm(), 0.0);
        assert_eq!(radial_forward(&d, Complex64::new(1.0, 0.0), 1.0).swallow_time, Some(0.0));
        let tip = radial_trace_point(&d, 1000);
        let exact = 2.0 * libm::exp(1.0) - 1.0 - 2.0 * libm::sqrt(libm::exp(2.0) - libm::exp(1.0));
        assert!((tip - Complex64::new(exact, 0.0)).norm() < 1e-9);
        let s = radial_forward(&d, Complex64::new(0.5, 0.0), 1.0).swallow_time.unwrap();
        assert!((s - libm::log(2.25 / 0.5 / 4.0)).abs() < 1e-9);
        let tr = radial_trace(&d);
        assert!(tr.points.iter().all(|p| p.im.abs() < 1e-9 && p.re > 0.0 && p.re <= 1.0));
    }

    #[test]
    fn radial_matches_rk4_and_derivative() {
        let n = 2000;
        let dt = 1.0 / n as f64;
        let d = Driver::new(LoewnerMode::Radial, dt, (0..=n).map(|k| 2.0 * libm::sin(2.0 * k as f64 * dt)).collect());
        let z = Complex64::new(0.1, -0.3);
        let r = radial_forward(&d, z, 1.0);
        let psi = |t: f64, g: Complex64| {
            let w = Complex64::from_polar(1.0, 2.0 * libm::sin(2.0 * t));
            -g * (g + w) / (g - w)
        };
        let oracle = rk4(psi, z, 1.0, 20_000);
        assert!((r.values.last().unwrap() - oracle).norm() < 2e-3);
        let h = 1e-6;
        let zh = rk4(psi, z + h, 1.0, 20_000);
        let fd = libm::log(((zh - oracle) / h).norm());
        assert!((r.log_abs_derivative.last().unwrap() - fd).abs() < 5e-3);
        let sle = sle_driver(6.0, LoewnerMode::Radial, 1e-3, 1.0, 4).unwrap();
        let near_zero = radial_forward(&sle, Complex64::new(1e-4, 0.0), 1.0);
        assert!((near_zero.log_abs_derivative.last().unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn radial_trace_symmetries() {
        let d = sle_driver(3.0, LoewnerMode::Radial, 2e-3, 0.4, 5).unwrap();
        let tr = radial_trace(&d);
        assert_eq!(tr.points[0], d.radial_point(0));
        assert!(tr.points.iter().all(|p| p.norm() <= 1.0 + 1e-6));
        let phi = 0.7;
        let rotated = Driver::new(LoewnerMode::Radial, d.dt, d.w.iter().map(|w| w + phi).collect());
        let tr2 = radial_trace(&rotated);
        let rot = Complex64::from_polar(1.0, phi);
        assert!(tr.points.iter().zip(&tr2.points).all(|(a, b)| (a * rot - b).norm() < 1e-6));
        let c = radial_trace(&constant(LoewnerMode::Radial, 1e-2, 50, 1.0));
        let dir = Complex64::from_polar(1.0, 1.0);
        assert!(c.points.iter().all(|p| (p / dir).im.abs() < 1e-9));
    }

    #[test]
    fn sle_driver_variance() {
        let ends: Vec<f64> = (0..4000).map(|i| *sle_driver(2.5, LoewnerMode::Chordal, 1e-2, 1.0, i).unwrap().w.last().unwrap()).collect();
        let v = variance(&ends);
        assert!((v - 2.5).abs() < 3.0 * 2.5 * libm::sqrt(2.0 / 4000.0));
        assert!(sle_driver(0.0, LoewnerMode::Chordal, 1e-2, 1.0, 1).unwrap().w.iter().all(|&w| w == 0.0));
        let r = sle_driver(6.0, LoewnerMode::Radial, 1e-2, 1.0, 1).unwrap();
        assert!((0..=r.num_steps()).all(|k| (r.radial_point(k).norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn delta_values_and_admissibility() {
        assert!((delta_of(6.0, 0.0) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(delta_of(4.0, -2.0), 1.0);
        assert_eq!(delta_of(8.0, 2.0), 2.0);
        let base = KrConfig { kappa: 4.0, rho: -2.0, mode: LoewnerMode::Chordal, variant: KrVariant::Exact, x0: 0.0, dt: 1e-3, t_end: 0.1, seed: 1 };
        assert!(sle_kr_driver(&base).is_err());
        let eps = KrConfig { variant: KrVariant::Eps { epsilon: 0.01, beta: 0.5, mu: 0.0 }, ..base };
        assert!(sle_kr_driver(&eps).is_err());
        let sym = KrConfig { variant: KrVariant::Eps { epsilon: 0.01, beta: 0.0, mu: 0.3 }, ..base };
        assert!(sle_kr_driver(&sym).is_ok());
        assert!(sle_kr_driver(&KrConfig { kappa: 2.0, rho: -5.0, ..base }).is_err());
    }

    #[test]
    fn exact_variant_is_bessel_coupling() {
        let cfg = KrConfig { kappa: 6.0, rho: 0.0, mode: LoewnerMode::Chordal, variant: KrVariant::Exact, x0: 0.0, dt: 1e-3, t_end: 1.0, seed: 7 };
        let d = sle_kr_driver(&cfg).unwrap();
        let mut rng = rng_from_seed(7);
        let noise: Vec<f64> = (0..1000).map(|_| libm::sqrt(1e-3) * normal(&mut rng)).collect();
        let bp = bessel_path_from_noise(&BesselParams::new(5.0 / 3.0, 0.0).unwrap(), 1e-3, noise);
        let o = d.o.as_ref().unwrap();
        let sk = libm::sqrt(6.0);
        for k in (0..=1000).step_by(50) {
            assert!((o[k] + 2.0 / sk * bp.y[k]).abs() < 1e-9);
            assert!((d.w[k] - o[k] - sk * bp.x.values[k]).abs() < 1e-9);
        }
        assert!(d.w.iter().zip(o).all(|(w, o)| o <= w));
    }

    #[test]
    fn eps_jump_ratio_and_ordering() {
        let (w2, o2) = jump_coefficients(2.0, -4.0);
        assert_eq!(o2 / w2, 0.5);
        let cfg = KrConfig {
            kappa: 3.0,
            rho: -2.5,
            mode: LoewnerMode::Chordal,
            variant: KrVariant::Eps { epsilon: 0.05, beta: 1.0, mu: 0.0 },
            x0: 0.0,
            dt: 1e-4,
            t_end: 1.0,
            seed: 2,
        };
        let d = sle_kr_driver(&cfg).unwrap();
        assert!(!d.jump_events.is_empty());
        assert!(d.jump_events.iter().all(|j| (j.o_jump / j.w_jump - 0.8).abs() < 1e-12));
        let above = KrConfig { kappa: 6.0, rho: 0.0, variant: KrVariant::Eps { epsilon: 0.05, beta: 1.0, mu: 0.0 }, ..cfg };
        let d = sle_kr_driver(&above).unwrap();
        assert!(d.jump_events.iter().all(|j| j.w_jump == 0.0 && j.o_jump < 0.0));
        let o = d.o.as_ref().unwrap();
        assert!(d.w.iter().zip(o).all(|(w, o)| o <= w));
    }

    #[test]
    fn eps_driver_converges_to_exact() {
        // rho = 0: W is sqrt(kappa) B in both variants and only O differs. The restarted
        // distance stays above the reflected one and the gap shrinks between restarts, so the
        // O gap never exceeds sqrt(kappa) eps.
        let base = KrConfig { kappa: 6.0, rho: 0.0, mode: LoewnerMode::Chordal, variant: KrVariant::Exact, x0: 0.0, dt: 1e-5, t_end: 1.0, seed: 0 };
        let eps = [0.1, 0.05, 0.025];
        let mut sup = [0.0; 3];
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let noise: Vec<f64> = (0..100_000).map(|_| libm::sqrt(1e-5) * normal(&mut rng)).collect();
            let exact = sle_kr_driver_from_noise(&KrConfig { seed, ..base }, &noise).unwrap();
            for (i, e) in eps.iter().enumerate() {
                let cfg = KrConfig { seed, variant: KrVariant::Eps { epsilon: *e, beta: 1.0, mu: 0.0 }, ..base };
                let d = sle_kr_driver_from_noise(&cfg, &noise).unwrap();
                assert!(d.w.iter().zip(&exact.w).all(|(a, b)| (a - b).abs() < 1e-9));
                let gap = d.o.unwrap().iter().zip(exact.o.as_ref().unwrap()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(gap <= libm::sqrt(6.0) * e * (1.0 + 1e-6), "{gap}");
                sup[i] += gap / 20.0;
            }
        }
        assert!(sup[0] > sup[1] && sup[1] > sup[2], "{sup:?}");
    }

    #[test]
    fn radial_angle_drift_regression() {
        // Between collisions the angle difference moves with drift (kappa - 4)/2 cot(theta/2).
        let cfg = KrConfig { kappa: 6.0, rho: 0.0, mode: LoewnerMode::Radial, variant: KrVariant::Exact, x0: 1.0, dt: 1e-4, t_end: 2.0, seed: 3 };
        let (mut resid, mut n) = (Vec::new(), 0);
        for seed in 0..20 {
            let d = sle_kr_driver(&KrConfig { seed, ..cfg }).unwrap();
            let th = d.hat_o.unwrap();
            for k in 0..th.len() - 1 {
                let u = th[k] - TAU * libm::round(th[k] / TAU);
                if u.abs() > 0.5 && u.abs() < TAU - 0.5 {
                    let drift = 1.0 / libm::tan(th[k] / 2.0);
                    resid.push((th[k + 1] - th[k]) / cfg.dt - drift);
                    n += 1;
                }
            }
        }
        assert!(n > 1000);
        assert!(mean(&resid).abs() < 3.0 * std_error(&resid), "{} {}", mean(&resid), std_error(&resid));
    }

    #[test]
    fn radial_eps_keeps_unit_modulus_and_reflects() {
        let cfg = KrConfig {
            kappa: 6.0,
            rho: 0.0,
            mode: LoewnerMode::Radial,
            variant: KrVariant::Eps { epsilon: 0.01, beta: 1.0, mu: 0.0 },
            x0: 0.0,
            dt: 1e-4,
            t_end: 2.0,
            seed: 9,
        };
        let d = sle_kr_driver(&cfg).unwrap();
        let th = d.hat_o.as_ref().unwrap();
        assert!(th.iter().all(|&t| (-1e-9..=TAU + 1e-9).contains(&t)));
        assert!((0..=d.num_steps()).all(|k| (d.radial_point(k).norm() - 1.0).abs() < 1e-15));
    }
}
