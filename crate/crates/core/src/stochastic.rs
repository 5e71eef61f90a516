//! Sampled paths of Brownian motion, Bessel processes and their
//! epsilon-jumping and skew variants, and Levy skew stable laws.
//!
//! Bessel paths use a splitting scheme per step: the Brownian increment is
//! applied first, then the drift flow `dX = (delta - 1) / (2X) dt` is solved
//! exactly, which gives `X' = sqrt((X + dB)^2 + (delta - 1) dt)`. The squared
//! process then has exactly the right mean increment `delta dt` for
//! `delta >= 1`, and no division by `X` ever happens.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::rng::{normal, rng_from_seed, skew_sign, stream_seed, uniform, SimRng};
use crate::stats::truncated_pareto_mle;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StochasticError {
    #[error("step size and horizon must be positive (dt = {dt}, T = {t_end})")]
    InvalidGrid { dt: f64, t_end: f64 },
    #[error("Bessel dimension must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("starting value must be non-negative, got {0}")]
    InvalidStart(f64),
    #[error("the principal-value companion is undefined for delta = 1")]
    DegenerateDelta,
    #[error("jump size epsilon must be positive")]
    InvalidEpsilon,
    #[error("skew must lie in [-1, 1], got {0}")]
    InvalidSkew(f64),
    #[error("unsupported skew Bessel combination (delta = {delta}, beta = {beta}, mu = {mu})")]
    InvalidSkewCombo { delta: f64, beta: f64, mu: f64 },
    #[error("invalid stable parameters (alpha = {alpha}, beta = {beta}, b = {b})")]
    InvalidStable { alpha: f64, beta: f64, b: f64 },
}

fn steps_for(dt: f64, t_end: f64) -> Result<usize, StochasticError> {
    if dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite() {
        Ok(libm::round(t_end / dt).max(1.0) as usize)
    } else {
        Err(StochasticError::InvalidGrid { dt, t_end })
    }
}

fn gaussian_increments(n: usize, dt: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let s = libm::sqrt(dt);
    (0..n).map(|_| s * normal(&mut rng)).collect()
}

/// A jump of an epsilon-approximation: the value after step `index` was reset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEvent {
    pub index: usize,
    pub size: f64,
}

/// Values on the grid `0, dt, 2dt, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Brownian increments that drove the path, one per step.
    pub driver_noise: Option<Vec<f64>>,
    pub jump_events: Option<Vec<JumpEvent>>,
}

impl SampledPath {
    pub fn num_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

fn cumulative(noise: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(noise.len() + 1);
    b.push(0.0);
    let mut acc = 0.0;
    for &d in noise {
        acc += d;
        b.push(acc);
    }
    b
}

pub fn brownian_path(dt: f64, t_end: f64, seed: u64) -> Result<SampledPath, StochasticError> {
    let n = steps_for(dt, t_end)?;
    let noise = gaussian_increments(n, dt, seed);
    Ok(SampledPath { dt, values: cumulative(&noise), driver_noise: Some(noise), jump_events: None })
}

/// Dimension, start and optional approximation/skew parameters of a Bessel process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselParams {
    pub delta: f64,
    pub x0: f64,
    pub epsilon: Option<f64>,
    pub beta: f64,
    pub mu: f64,
}

impl BesselParams {
    pub fn new(delta: f64, x0: f64) -> Result<Self, StochasticError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(StochasticError::InvalidDelta(delta));
        }
        if !(x0 >= 0.0 && x0.is_finite()) {
            return Err(StochasticError::InvalidStart(x0));
        }
        Ok(BesselParams { delta, x0, epsilon: None, beta: 1.0, mu: 0.0 })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self, StochasticError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(StochasticError::InvalidEpsilon);
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    pub fn with_skew(mut self, beta: f64, mu: f64) -> Result<Self, StochasticError> {
        if !(-1.0..=1.0).contains(&beta) {
            return Err(StochasticError::InvalidSkew(beta));
        }
        self.beta = beta;
        self.mu = mu;
        Ok(self)
    }
}

/// One splitting step; returns the new value and whether zero was reached during the step.
#[inline]
pub fn bessel_step(x: f64, db: f64, delta: f64, dt: f64) -> (f64, bool) {
    let y = x + db;
    let arg = y * y + (delta - 1.0) * dt;
    (libm::sqrt(arg.max(0.0)), y <= 0.0 || arg <= 0.0)
}

/// A Bessel path with its driving Brownian motion and companion process.
#[derive(Clone, Debug, PartialEq)]
pub struct BesselPath {
    pub x: SampledPath,
    pub b: Vec<f64>,
    /// `(2 / (delta - 1)) (X - X0 - B)` for `delta != 1`, `2 (X - X0 - B)` for `delta = 1`.
    pub y: Vec<f64>,
    /// Grid indices `k` such that zero was reached during the step ending at `k`.
    pub zero_hits: Vec<usize>,
}

impl BesselPath {
    /// Completed moves from zero up to level `eps` (the start counts as a zero if `X0 = 0`).
    pub fn upcrossings(&self, eps: f64) -> usize {
        let v = &self.x.values;
        let mut hits = self.zero_hits.iter().peekable();
        let mut at_zero = v[0] <= 0.0;
        let mut count = 0;
        for (k, &val) in v.iter().enumerate().skip(1) {
            while hits.peek().is_some_and(|&&h| h <= k) {
                hits.next();
                at_zero = true;
            }
            if at_zero && val >= eps && !self.zero_hits.binary_search(&k).is_ok() {
                count += 1;
                at_zero = false;
            }
        }
        count
    }
}

pub fn bessel_path(p: &BesselParams, dt: f64, t_end: f64, seed: u64) -> Result<BesselPath, StochasticError> {
    let n = steps_for(dt, t_end)?;
    Ok(bessel_path_from_noise(p, dt, gaussian_increments(n, dt, seed)))
}

/// Deterministic Bessel path driven by the given increments.
pub fn bessel_path_from_noise(p: &BesselParams, dt: f64, noise: Vec<f64>) -> BesselPath {
    let mut values = Vec::with_capacity(noise.len() + 1);
    let mut zero_hits = Vec::new();
    let mut x = p.x0;
    values.push(x);
    for (k, &db) in noise.iter().enumerate() {
        let (nx, hit) = bessel_step(x, db, p.delta, dt);
        if hit {
            zero_hits.push(k + 1);
        }
        x = nx;
        values.push(x);
    }
    let b = cumulative(&noise);
    let coef = if p.delta == 1.0 { 2.0 } else { 2.0 / (p.delta - 1.0) };
    let y = values.iter().zip(&b).map(|(xv, bv)| coef * (xv - p.x0 - bv)).collect();
    BesselPath { x: SampledPath { dt, values, driver_noise: Some(noise), jump_events: None }, b, y, zero_hits }
}

/// The algebraic principal value `(2 / (delta - 1)) (X - X0 - B)`.
pub fn principal_value(x: &[f64], b: &[f64], x0: f64, delta: f64) -> Result<Vec<f64>, StochasticError> {
    if delta == 1.0 {
        return Err(StochasticError::DegenerateDelta);
    }
    let c = 2.0 / (delta - 1.0);
    Ok(x.iter().zip(b).map(|(xv, bv)| c * (xv - x0 - bv)).collect())
}

/// Exact sample of `Z_{t+h}` given `Z_t = z0` for the squared Bessel process.
pub fn besq_exact_step(delta: f64, z0: f64, h: f64, seed: u64) -> f64 {
    besq_exact_step_with(delta, z0, h, &mut rng_from_seed(seed))
}

pub fn besq_exact_step_with(delta: f64, z0: f64, h: f64, rng: &mut SimRng) -> f64 {
    let lambda = z0 / (2.0 * h);
    let k = if lambda > 0.0 { Poisson::new(lambda).expect("positive rate").sample(rng) } else { 0.0 };
    let shape = 0.5 * delta + k;
    2.0 * h * Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// An epsilon-jumping Bessel path: restarted at `epsilon` whenever it reaches zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsBesselPath {
    pub x: SampledPath,
    pub b: Vec<f64>,
    /// `J^eps` on the grid: epsilon times the number of jumps so far.
    pub j: Vec<f64>,
    pub sum_sq_jumps: f64,
}

impl EpsBesselPath {
    pub fn jump_count(&self) -> usize {
        self.x.jump_events.as_ref().map_or(0, Vec::len)
    }
}

pub fn eps_bessel_path(p: &BesselParams, dt: f64, t_end: f64, seed: u64) -> Result<EpsBesselPath, StochasticError> {
    let n = steps_for(dt, t_end)?;
    eps_bessel_path_from_noise(p, dt, gaussian_increments(n, dt, seed))
}

pub fn eps_bessel_path_from_noise(p: &BesselParams, dt: f64, noise: Vec<f64>) -> Result<EpsBesselPath, StochasticError> {
    let eps = p.epsilon.ok_or(StochasticError::InvalidEpsilon)?;
    let mut values = Vec::with_capacity(noise.len() + 1);
    let mut j = Vec::with_capacity(noise.len() + 1);
    let mut jumps = Vec::new();
    let mut jacc = 0.0;
    let mut x = p.x0;
    if x <= 0.0 {
        x = eps;
        jacc = eps;
        jumps.push(JumpEvent { index: 0, size: eps });
    }
    values.push(x);
    j.push(jacc);
    for (k, &db) in noise.iter().enumerate() {
        let (nx, hit) = bessel_step(x, db, p.delta, dt);
        x = if hit {
            jacc += eps;
            jumps.push(JumpEvent { index: k + 1, size: eps });
            eps
        } else {
            nx
        };
        values.push(x);
        j.push(jacc);
    }
    let sum_sq_jumps = jumps.len() as f64 * eps * eps;
    let b = cumulative(&noise);
    Ok(EpsBesselPath {
        x: SampledPath { dt, values, driver_noise: Some(noise), jump_events: Some(jumps) },
        b,
        j,
        sum_sq_jumps,
    })
}

/// A skew Bessel path: `|X|` is an epsilon-jumping Bessel process and each
/// excursion (delimited by the restarts) carries an independent sign.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewBesselPath {
    /// Signed values; jump events carry signed sizes.
    pub x: SampledPath,
    pub b: Vec<f64>,
    /// Companion `Y`, the epsilon-approximation of the principal value of `1/X`.
    pub y: Vec<f64>,
    /// Unsigned jump total `J`.
    pub j: Vec<f64>,
    /// Sign of each excursion, in order; the first belongs to the initial segment.
    pub signs: Vec<f64>,
}

fn check_skew_combo(p: &BesselParams) -> Result<(), StochasticError> {
    let d = p.delta;
    let ok = ((d > 0.0 && d < 1.0) || (d > 1.0 && d < 2.0)) && p.mu == 0.0 || (d == 1.0 && p.beta == 0.0);
    if ok {
        Ok(())
    } else {
        Err(StochasticError::InvalidSkewCombo { delta: d, beta: p.beta, mu: p.mu })
    }
}

pub fn skew_bessel_path(p: &BesselParams, dt: f64, t_end: f64, seed: u64) -> Result<SkewBesselPath, StochasticError> {
    check_skew_combo(p)?;
    let n = steps_for(dt, t_end)?;
    let noise = gaussian_increments(n, dt, seed);
    let eps = p.epsilon.unwrap_or(libm::sqrt(dt));
    // Signs come from a separate stream so that the noise alone fixes |X|.
    let mut coin = rng_from_seed(stream_seed(seed, 1));
    let delta = p.delta;
    let pv_coef = if delta == 1.0 { 0.0 } else { 2.0 / (delta - 1.0) };
    let jump_coef = if delta == 1.0 { 1.0 } else { pv_coef };

    let mut values = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    let mut j = Vec::with_capacity(n + 1);
    let mut jumps = Vec::new();
    let mut signs = Vec::new();
    let mut a = p.x0;
    let mut s = 1.0;
    let (mut yacc, mut jacc) = (0.0, 0.0);
    if a <= 0.0 {
        s = skew_sign(&mut coin, p.beta);
        a = eps;
        jacc += eps;
        yacc += jump_coef * s * eps + p.mu * eps;
        jumps.push(JumpEvent { index: 0, size: s * eps });
    }
    signs.push(s);
    values.push(s * a);
    y.push(yacc);
    j.push(jacc);
    for (k, &db) in noise.iter().enumerate() {
        let (na, hit) = bessel_step(a, db, delta, dt);
        if delta == 1.0 {
            yacc += s * dt / a.max(1e-300);
        }
        if hit {
            yacc += pv_coef * s * (-(a + db));
            s = skew_sign(&mut coin, p.beta);
            signs.push(s);
            a = eps;
            jacc += eps;
            yacc += jump_coef * s * eps + p.mu * eps;
            jumps.push(JumpEvent { index: k + 1, size: s * eps });
        } else {
            yacc += pv_coef * s * (na - a - db);
            a = na;
        }
        values.push(s * a);
        y.push(yacc);
        j.push(jacc);
    }
    Ok(SkewBesselPath {
        x: SampledPath { dt, values, driver_noise: Some(noise.clone()), jump_events: Some(jumps) },
        b: cumulative(&noise),
        y,
        j,
        signs,
    })
}

/// Parameters of a Levy skew stable law; `S_1` has characteristic function
/// `exp(i lambda mu - |c lambda|^alpha (1 - i beta sign(lambda) Phi))` with `c^alpha = b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub b: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, mu: f64, b: f64) -> Result<Self, StochasticError> {
        if alpha > 0.0 && alpha <= 2.0 && (-1.0..=1.0).contains(&beta) && b > 0.0 && mu.is_finite() {
            Ok(StableParams { alpha, beta, mu, b })
        } else {
            Err(StochasticError::InvalidStable { alpha, beta, b })
        }
    }

    pub fn scale(&self) -> f64 {
        libm::pow(self.b, 1.0 / self.alpha)
    }

    pub fn is_strictly_stable(&self) -> bool {
        if self.alpha == 1.0 {
            self.beta == 0.0
        } else {
            self.mu == 0.0
        }
    }

    /// Supported on the positive reals.
    pub fn is_positive(&self) -> bool {
        self.mu >= 0.0 && self.beta == 1.0 && self.alpha < 1.0
    }
}

pub fn stable_char_fn(s: &StableParams, lambda: f64) -> Complex64 {
    if lambda == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let c = s.scale();
    let phi = if s.alpha == 1.0 { -(2.0 / PI) * libm::log(lambda.abs()) } else { libm::tan(PI * s.alpha / 2.0) };
    let mag = libm::pow((c * lambda).abs(), s.alpha);
    let expo = Complex64::new(-mag, lambda * s.mu + mag * s.beta * lambda.signum() * phi);
    expo.exp()
}

/// One Chambers-Mallows-Stuck draw.
pub fn stable_draw(s: &StableParams, rng: &mut SimRng) -> f64 {
    let v = PI * (uniform(rng) - 0.5);
    let w: f64 = Exp1.sample(rng);
    let (a, beta) = (s.alpha, s.beta);
    let c = s.scale();
    if a == 1.0 {
        let h = PI / 2.0 + beta * v;
        let x = (2.0 / PI) * (h * libm::tan(v) - beta * libm::log((PI / 2.0) * w * libm::cos(v) / h));
        c * x + (2.0 / PI) * beta * c * libm::log(c) + s.mu
    } else {
        let t = beta * libm::tan(PI * a / 2.0);
        let shift = libm::atan(t) / a;
        let scale = libm::pow(1.0 + t * t, 1.0 / (2.0 * a));
        let x = scale * libm::sin(a * (v + shift)) / libm::pow(libm::cos(v), 1.0 / a)
            * libm::pow(libm::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
        c * x + s.mu
    }
}

pub fn stable_sample(s: &StableParams, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| stable_draw(s, &mut rng)).collect()
}

/// Density of the Levy measure at `eta != 0`: `c alpha / Gamma(1 - alpha) |eta|^{-alpha-1}`
/// weighted by `(1 + beta)/2` on the positive side and `(1 - beta)/2` on the negative side.
pub fn levy_density(s: &StableParams, eta: f64) -> f64 {
    let side = if eta > 0.0 { 0.5 * (1.0 + s.beta) } else { 0.5 * (1.0 - s.beta) };
    s.scale() * s.alpha / libm::tgamma(1.0 - s.alpha) * libm::pow(eta.abs(), -s.alpha - 1.0) * side
}

/// Empirical characteristic function at `lambda`.
pub fn empirical_char_fn(samples: &[f64], lambda: f64) -> Complex64 {
    let n = samples.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in samples {
        let (s, c) = libm::sincos(lambda * x);
        re += c;
        im += s;
    }
    Complex64::new(re / n, im / n)
}

/// Settings for [`inverse_local_time_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseLocalTimeConfig {
    pub delta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub paths: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseLocalTimeReport {
    /// Index `1 - delta/2` of the inverse local time.
    pub alpha: f64,
    /// Complete excursions away from the zero threshold, over all paths.
    pub excursions: usize,
    /// Tail exponent of excursion lengths in the fitting window.
    pub tail_exponent: f64,
    pub tail_samples: usize,
    /// The same estimator applied to stable samples of index `alpha`.
    pub stable_tail_exponent: f64,
    /// Fitted amplitude `b` of the excursion-length tail, `#{len > lo} lo^alpha` per unit time.
    pub fitted_scale: f64,
    /// Fraction of paths started at 1 that reach zero before `t_end`.
    pub hit_fraction_from_one: f64,
    /// Fraction of grid times (paths started at 0) spent below the threshold `sqrt(dt)`.
    pub occupation_fraction: f64,
}

/// Compares the zero set of discretized Bessel paths with the stable subordinator of index `1 - delta/2`.
pub fn inverse_local_time_check(cfg: &InverseLocalTimeConfig) -> Result<InverseLocalTimeReport, StochasticError> {
    if !(cfg.delta > 0.0 && cfg.delta < 2.0) {
        return Err(StochasticError::InvalidDelta(cfg.delta));
    }
    let n = steps_for(cfg.dt, cfg.t_end)?;
    let alpha = 1.0 - cfg.delta / 2.0;
    let threshold = libm::sqrt(cfg.dt);
    let (lo, hi) = (100.0 * cfg.dt, cfg.t_end / 100.0);
    let mut lengths = Vec::new();
    let mut below = 0usize;
    let mut hits_from_one = 0usize;
    for i in 0..cfg.paths {
        let mut rng = rng_from_seed(stream_seed(cfg.seed, i as u64));
        let sd = libm::sqrt(cfg.dt);
        let mut x = 0.0;
        let mut start: Option<usize> = None;
        for k in 1..=n {
            let (nx, hit) = bessel_step(x, sd * normal(&mut rng), cfg.delta, cfg.dt);
            x = nx;
            let low = hit || x < threshold;
            if low {
                below += 1;
                if let Some(s) = start.take() {
                    lengths.push((k - s) as f64 * cfg.dt);
                }
            } else if start.is_none() {
                start = Some(k);
            }
        }
        let mut x = 1.0;
        for _ in 0..n {
            let (nx, hit) = bessel_step(x, sd * normal(&mut rng), cfg.delta, cfg.dt);
            if hit {
                hits_from_one += 1;
                break;
            }
            x = nx;
        }
    }
    let (tail_exponent, tail_samples) = truncated_pareto_mle(&lengths, lo, hi).unwrap_or((f64::NAN, 0));
    let stable = StableParams::new(alpha, 1.0, 0.0, 1.0)?;
    let mut oracle = stable_sample(&stable, 20_000, stream_seed(cfg.seed, u64::MAX));
    oracle.sort_by(|a, b| a.total_cmp(b));
    let q = oracle[oracle.len() * 9 / 10];
    let stable_tail_exponent = truncated_pareto_mle(&oracle, q, f64::INFINITY).map_or(f64::NAN, |r| r.0);
    let total_time = cfg.paths as f64 * cfg.t_end;
    let above_lo = lengths.iter().filter(|&&l| l > lo).count() as f64;
    Ok(InverseLocalTimeReport {
        alpha,
        excursions: lengths.len(),
        tail_exponent,
        tail_samples,
        stable_tail_exponent,
        fitted_scale: above_lo * libm::pow(lo, alpha) / total_time,
        hit_fraction_from_one: hits_from_one as f64 / cfg.paths as f64,
        occupation_fraction: below as f64 / (cfg.paths * n) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::stats::{ks_p_value, ks_statistic, ks_two_sample, ks_two_sample_p_value, mean, normal_cdf, std_error, variance};

    fn batch<T>(count: usize, seed: u64, f: impl Fn(u64) -> T) -> Vec<T> {
        (0..count).map(|i| f(stream_seed(seed, i as u64))).collect()
    }

    #[test]
    fn brownian_moments_and_determinism() {
        let ends = batch(10_000, 1, |s| brownian_path(0.01, 1.0, s).unwrap().last());
        assert!(mean(&ends).abs() < 3.0 * std_error(&ends));
        let v = variance(&ends);
        assert!((v - 1.0).abs() < 3.0 * libm::sqrt(2.0 / 10_000.0));
        assert_eq!(brownian_path(0.01, 1.0, 5).unwrap(), brownian_path(0.01, 1.0, 5).unwrap());
        assert!(brownian_path(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn bessel_one_is_reflected_brownian_motion() {
        let p = BesselParams::new(1.0, 0.0).unwrap();
        let ends = batch(10_000, 2, |s| bessel_path(&p, 1e-3, 1.0, s).unwrap().x.last());
        let d = ks_statistic(&ends, |x| 2.0 * normal_cdf(x) - 1.0);
        assert!(ks_p_value(d, 10_000.0) > 0.01, "d = {d}");
    }

    #[test]
    fn besq_mean_increment() {
        for delta in [1.0, 5.0 / 3.0, 2.0, 3.0] {
            let p = BesselParams::new(delta, 0.0).unwrap();
            let z = batch(10_000, 3, |s| libm::pow(bessel_path(&p, 1e-3, 1.0, s).unwrap().x.last(), 2.0));
            assert!((mean(&z) - delta).abs() < 3.0 * std_error(&z), "delta {delta}: {}", mean(&z));
        }
    }

    #[test]
    fn marginal_matches_exact_transition() {
        let p = BesselParams::new(1.5, 0.0).unwrap();
        let euler = batch(5_000, 4, |s| libm::pow(bessel_path(&p, 1e-3, 1.0, s).unwrap().x.last(), 2.0));
        let exact = batch(5_000, 5, |s| besq_exact_step(1.5, 0.0, 1.0, s));
        let d = ks_two_sample(&euler, &exact);
        assert!(ks_two_sample_p_value(d, 5_000, 5_000) > 0.01, "d = {d}");
    }

    #[test]
    fn small_delta_bias_shrinks_under_refinement() {
        let p = BesselParams::new(0.5, 0.0).unwrap();
        let bias = |dt: f64| {
            let z = batch(4_000, 4, |s| libm::pow(bessel_path(&p, dt, 1.0, s).unwrap().x.last(), 2.0));
            mean(&z) - 0.5
        };
        let (coarse, fine) = (bias(1e-2), bias(1e-4));
        assert!(coarse > fine && fine < 0.06, "{coarse} {fine}");
    }

    #[test]
    fn exact_step_against_chi_square() {
        let z = batch(10_000, 6, |s| besq_exact_step(3.0, 0.0, 0.5, s) / 0.5);
        let brute = batch(10_000, 7, |s| {
            let mut r = rng_from_seed(s);
            (0..3).map(|_| libm::pow(normal(&mut r), 2.0)).sum::<f64>()
        });
        let d = ks_two_sample(&z, &brute);
        assert!(ks_two_sample_p_value(d, 10_000, 10_000) > 0.01);
        let m = batch(10_000, 8, |s| besq_exact_step(1.5, 2.0, 0.3, s));
        assert!((mean(&m) - (2.0 + 1.5 * 0.3)).abs() < 3.0 * std_error(&m));
        let near = batch(1000, 9, |s| besq_exact_step(2.0, 1.0, 1e-6, s));
        assert!(near.iter().all(|z| (z - 1.0).abs() < 0.02));
    }

    #[test]
    fn brownian_scaling() {
        let p = BesselParams::new(5.0 / 3.0, 0.0).unwrap();
        let a = batch(4_000, 10, |s| bessel_path(&p, 1e-3, 1.0, s).unwrap().x.last());
        let b = batch(4_000, 11, |s| bessel_path(&p, 4e-3, 4.0, s).unwrap().x.last() / 2.0);
        assert!(ks_two_sample_p_value(ks_two_sample(&a, &b), 4_000, 4_000) > 0.01);
        let q = BesselParams::new(0.5, 0.0).unwrap();
        let (ya, yb): (Vec<f64>, Vec<f64>) = (
            batch(3_000, 12, |s| *bessel_path(&q, 1e-3, 1.0, s).unwrap().y.last().unwrap()),
            batch(3_000, 13, |s| *bessel_path(&q, 4e-3, 4.0, s).unwrap().y.last().unwrap() / 2.0),
        );
        assert!(ks_two_sample_p_value(ks_two_sample(&ya, &yb), 3_000, 3_000) > 0.01);
    }

    #[test]
    fn replay_and_principal_value() {
        let p = BesselParams::new(0.7, 0.3).unwrap();
        let path = bessel_path(&p, 1e-3, 0.5, 21).unwrap();
        let replay = bessel_path_from_noise(&p, 1e-3, path.x.driver_noise.clone().unwrap());
        assert_eq!(path, replay);
        let pv = principal_value(&path.x.values, &path.b, 0.3, 0.7).unwrap();
        assert_eq!(pv, path.y);
        assert_eq!(principal_value(&path.x.values, &path.b, 0.3, 1.0), Err(StochasticError::DegenerateDelta));
        let e = BesselParams::new(3.0, 0.0).unwrap().with_epsilon(0.1).unwrap();
        let ep = eps_bessel_path(&e, 1e-3, 0.5, 3).unwrap();
        let again = eps_bessel_path_from_noise(&e, 1e-3, ep.x.driver_noise.clone().unwrap()).unwrap();
        assert_eq!(ep, again);
    }

    #[test]
    fn eps_jumps_start_and_count() {
        let p = BesselParams::new(0.5, 0.0).unwrap().with_epsilon(0.05).unwrap();
        let path = eps_bessel_path(&p, 1e-4, 1.0, 2).unwrap();
        let jumps = path.x.jump_events.as_ref().unwrap();
        assert_eq!(jumps[0].index, 0);
        assert_eq!(path.x.values[0], 0.05);
        assert!(jumps.windows(2).all(|w| w[0].index < w[1].index));
        assert!((path.j.last().unwrap() - 0.05 * jumps.len() as f64).abs() < 1e-9);
        assert!(path.x.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn eps_local_time_at_delta_one() {
        // For delta = 1 the jump total tracks X - B (half the local time at zero).
        let p = BesselParams::new(1.0, 0.0).unwrap().with_epsilon(0.01).unwrap();
        let j = batch(1_000, 14, |s| *eps_bessel_path(&p, 1e-6, 1.0, s).unwrap().j.last().unwrap());
        let target = libm::sqrt(2.0 / PI);
        assert!((mean(&j) - target).abs() < 3.0 * std_error(&j) + 0.03, "{} vs {target}", mean(&j));
    }

    #[test]
    fn upcrossings_count_returns() {
        let path = BesselPath {
            x: SampledPath { dt: 1.0, values: vec![0.0, 0.5, 1.2, 0.3, 0.0, 1.5, 2.0], driver_noise: None, jump_events: None },
            b: vec![0.0; 7],
            y: vec![0.0; 7],
            zero_hits: vec![4],
        };
        assert_eq!(path.upcrossings(1.0), 2);
        assert_eq!(path.upcrossings(3.0), 0);
    }

    #[test]
    fn skew_combinations_and_signs() {
        let bad = BesselParams::new(1.0, 0.0).unwrap().with_skew(0.5, 0.0).unwrap();
        assert!(matches!(skew_bessel_path(&bad, 1e-3, 1.0, 1), Err(StochasticError::InvalidSkewCombo { .. })));
        let bad = BesselParams::new(0.5, 0.0).unwrap().with_skew(0.0, 1.0).unwrap();
        assert!(skew_bessel_path(&bad, 1e-3, 1.0, 1).is_err());

        let up = BesselParams::new(0.5, 0.0).unwrap().with_skew(1.0, 0.0).unwrap();
        let path = skew_bessel_path(&up, 1e-4, 1.0, 3).unwrap();
        assert!(path.signs.iter().all(|&s| s == 1.0));
        assert!(path.x.jump_events.as_ref().unwrap().iter().all(|j| j.size > 0.0));
        let down = BesselParams::new(0.5, 0.0).unwrap().with_skew(-1.0, 0.0).unwrap();
        let mirror = skew_bessel_path(&down, 1e-4, 1.0, 3).unwrap();
        assert!(path.x.values.iter().zip(&mirror.x.values).all(|(a, b)| *a == -*b));

        let sym = BesselParams::new(1.0, 0.0).unwrap().with_skew(0.0, 0.0).unwrap();
        let signs: Vec<f64> = (0..40).flat_map(|s| skew_bessel_path(&sym, 1e-4, 1.0, s).unwrap().signs).collect();
        let plus = signs.iter().filter(|&&s| s > 0.0).count() as f64 / signs.len() as f64;
        assert!((plus - 0.5).abs() < 3.0 * libm::sqrt(0.25 / signs.len() as f64));
    }

    #[test]
    fn skew_companion_matches_identity_when_one_sided() {
        let p = BesselParams::new(1.5, 0.2).unwrap().with_skew(1.0, 0.0).unwrap().with_epsilon(0.01).unwrap();
        let path = skew_bessel_path(&p, 1e-4, 1.0, 8).unwrap();
        for k in (0..path.y.len()).step_by(997) {
            let id = 4.0 * (path.x.values[k] - 0.2 - path.b[k]);
            assert!((path.y[k] - id).abs() < 1e-9);
        }
    }

    #[test]
    fn stable_special_cases() {
        let g = StableParams::new(2.0, 0.3, 0.0, 1.0).unwrap();
        let xs = stable_sample(&g, 20_000, 1);
        let d = ks_statistic(&xs, |x| normal_cdf(x / libm::sqrt(2.0)));
        assert!(ks_p_value(d, 20_000.0) > 0.01);
        let cauchy = StableParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let xs = stable_sample(&cauchy, 20_000, 2);
        let mut r = rng_from_seed(3);
        let ratio: Vec<f64> = (0..20_000).map(|_| normal(&mut r) / normal(&mut r)).collect();
        assert!(ks_two_sample_p_value(ks_two_sample(&xs, &ratio), 20_000, 20_000) > 0.01);
        let levy = StableParams::new(0.5, 1.0, 0.0, 1.0).unwrap();
        assert!(levy.is_positive());
        assert!(stable_sample(&levy, 20_000, 4).iter().all(|&x| x > 0.0));
        assert!(StableParams::new(2.5, 0.0, 0.0, 1.0).is_err());
        assert!(cauchy.is_strictly_stable() && !StableParams::new(1.0, 0.5, 0.0, 1.0).unwrap().is_strictly_stable());
    }

    #[test]
    fn char_fn_values_and_fit() {
        let s = StableParams::new(1.5, 0.7, 0.0, 2.0).unwrap();
        assert_eq!(stable_char_fn(&s, 0.0), Complex64::new(1.0, 0.0));
        let g = StableParams::new(2.0, 0.0, 0.0, 1.5).unwrap();
        let v = stable_char_fn(&g, 0.8);
        let c = g.scale();
        assert!((v.re - libm::exp(-c * c * 0.64)).abs() < 1e-12 && v.im.abs() < 1e-12);
        let xs = stable_sample(&s, 100_000, 5);
        let worst = (-20..=20)
            .map(|k| {
                let l = 0.25 * k as f64;
                (empirical_char_fn(&xs, l) - stable_char_fn(&s, l)).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "{worst}");
        assert!(levy_density(&StableParams::new(0.5, 1.0, 0.0, 1.0).unwrap(), 2.0) > 0.0);
    }

    #[test]
    fn inverse_local_time_tail() {
        let cfg = InverseLocalTimeConfig { delta: 1.0, dt: 1e-5, t_end: 1.0, paths: 100, seed: 1 };
        let r = inverse_local_time_check(&cfg).unwrap();
        assert!((r.tail_exponent - 0.5).abs() < 0.1, "{r:?}");
        assert!((r.stable_tail_exponent - 0.5).abs() < 0.1, "{r:?}");
        assert!(r.occupation_fraction < 3.0 * libm::sqrt(cfg.dt), "{r:?}");
    }
}
