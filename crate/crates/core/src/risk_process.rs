//! Discounted surplus paths of the bidimensional perturbed risk model.
//!
//! The simulator works with `V_i(t) = exp(-r t) U_i(t)`. Discounting by a
//! positive factor leaves every ruin event unchanged, and it turns the
//! diffusion part into `sigma_i * int_0^t exp(-r s) dB_i(s)`, a Gaussian
//! process with independent increments whose law over any interval is known
//! exactly. Only crossings strictly between evaluation instants are left to
//! the detector.

use rand::RngCore;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::heavy_tails::ClaimDistribution;
use crate::rng::open_unit;

/// Premium income process of each line.
#[derive(Debug, Clone, PartialEq)]
pub enum PremiumMode {
    /// `C_i(t) = c_i t`.
    Linear,
    /// `C_i(t) = c_i t` plus compound Poisson premium lumps arriving at
    /// `rate_i` with sizes drawn from `jump_i`.
    CompoundPoisson { rate1: f64, jump1: ClaimDistribution, rate2: f64, jump2: ClaimDistribution },
}

/// Full description of the bidimensional surplus process and its numerics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub u1: f64,
    pub u2: f64,
    /// Constant force of interest.
    pub r: f64,
    /// Correlation of the two Brownian motions.
    pub rho: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Both lines share the claim arrival process of intensity `lambda1`.
    pub common_shock: bool,
    pub c1: f64,
    pub c2: f64,
    pub premium: PremiumMode,
    pub dist1: ClaimDistribution,
    pub dist2: ClaimDistribution,
    /// Horizon `T`.
    pub horizon: f64,
    /// Regular grid step `h`.
    pub step: f64,
    /// Brownian-bridge crossing correction between evaluation instants.
    pub bridge: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let pareto = ClaimDistribution::Pareto { alpha: 1.5, xm: 1.0 };
        ModelConfig {
            u1: 10.0,
            u2: 10.0,
            r: 0.0,
            rho: -0.5,
            sigma1: 0.2,
            sigma2: 0.2,
            lambda1: 1.0,
            lambda2: 1.0,
            common_shock: true,
            c1: 3.3,
            c2: 3.3,
            premium: PremiumMode::Linear,
            dist1: pareto,
            dist2: pareto,
            horizon: 1.0,
            step: 1e-3,
            bridge: true,
        }
    }
}

fn check(ok: bool, name: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::param(name, reason()))
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let pos = |v: f64| v.is_finite() && v > 0.0;
        check(nonneg(self.u1), "u1", || format!("must be >= 0, got {}", self.u1))?;
        check(nonneg(self.u2), "u2", || format!("must be >= 0, got {}", self.u2))?;
        check(nonneg(self.r), "r", || format!("must be >= 0, got {}", self.r))?;
        check((-1.0..=1.0).contains(&self.rho), "rho", || format!("must lie in [-1, 1], got {}", self.rho))?;
        check(nonneg(self.sigma1), "sigma1", || format!("must be >= 0, got {}", self.sigma1))?;
        check(nonneg(self.sigma2), "sigma2", || format!("must be >= 0, got {}", self.sigma2))?;
        check(pos(self.lambda1), "lambda1", || format!("must be > 0, got {}", self.lambda1))?;
        check(pos(self.lambda2), "lambda2", || format!("must be > 0, got {}", self.lambda2))?;
        check(nonneg(self.c1), "c1", || format!("must be >= 0, got {}", self.c1))?;
        check(nonneg(self.c2), "c2", || format!("must be >= 0, got {}", self.c2))?;
        check(pos(self.horizon), "T", || format!("must be > 0, got {}", self.horizon))?;
        check(pos(self.step) && self.step <= self.horizon, "h", || {
            format!("must lie in (0, T = {}], got {}", self.horizon, self.step)
        })?;
        if let PremiumMode::CompoundPoisson { rate1, rate2, .. } = self.premium {
            check(nonneg(rate1), "premium.rate1", || format!("must be >= 0, got {rate1}"))?;
            check(nonneg(rate2), "premium.rate2", || format!("must be >= 0, got {rate2}"))?;
        }
        Ok(())
    }

    /// Claim intensity of line 2 as seen by that line alone.
    pub fn lambda2_effective(&self) -> f64 {
        if self.common_shock {
            self.lambda1
        } else {
            self.lambda2
        }
    }

    /// Model warnings that do not prevent simulation.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.r == 0.0 {
            let lambdas = [self.lambda1, self.lambda2_effective()];
            let premium_rates = self.premium_rates();
            for (i, dist) in [self.dist1, self.dist2].iter().enumerate() {
                if let Some(mean) = dist.mean() {
                    let outflow = lambdas[i] * mean;
                    if premium_rates[i] <= outflow {
                        out.push(format!(
                            "safety loading violated for line {}: premium rate {} <= claim outflow {}",
                            i + 1,
                            premium_rates[i],
                            outflow
                        ));
                    }
                }
            }
        }
        out
    }

    /// Expected premium income per unit time of each line.
    pub fn premium_rates(&self) -> [f64; 2] {
        match &self.premium {
            PremiumMode::Linear => [self.c1, self.c2],
            PremiumMode::CompoundPoisson { rate1, jump1, rate2, jump2 } => [
                self.c1 + rate1 * jump1.mean().unwrap_or(f64::INFINITY),
                self.c2 + rate2 * jump2.mean().unwrap_or(f64::INFINITY),
            ],
        }
    }

    /// Variance factor of the diffusion of `V_1 + V_2` relative to a single
    /// standard discounted Brownian motion.
    pub fn sum_variance_factor(&self) -> f64 {
        (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2 + 2.0 * self.rho * self.sigma1 * self.sigma2).max(0.0)
    }
}

/// Poisson arrival times on `(0, horizon)`, sorted.
///
/// Draws the count from `Poisson(lambda * horizon)` and then that many iid
/// uniform times, which is the conditional law of the arrival epochs given
/// the count.
pub fn draw_arrivals<R: RngCore + ?Sized>(lambda: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::new();
    draw_arrivals_into(lambda, horizon, rng, &mut out);
    out
}

fn draw_arrivals_into<R: RngCore + ?Sized>(lambda: f64, horizon: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let mean = lambda * horizon;
    if !(mean > 0.0) {
        return;
    }
    let n = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    out.extend((0..n).map(|_| horizon * open_unit(rng)));
    out.sort_unstable_by(f64::total_cmp);
}

/// `Var(int_s^t exp(-r l) dB(l))`.
pub fn discounted_diffusion_cov(r: f64, s: f64, t: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("must be >= 0, got {r}")));
    }
    if !(s >= 0.0 && s < t) {
        return Err(Error::param("s", format!("need 0 <= s < t, got s = {s}, t = {t}")));
    }
    Ok(interval_variance(r, s, t))
}

#[inline]
fn interval_variance(r: f64, s: f64, t: f64) -> f64 {
    if r == 0.0 {
        t - s
    } else if t.is_infinite() {
        (-2.0 * r * s).exp() / (2.0 * r)
    } else {
        (-2.0 * r * s).exp() * -(-2.0 * r * (t - s)).exp_m1() / (2.0 * r)
    }
}

/// `int_s^t exp(-r l) dl`, the discounted premium income per unit rate.
#[inline]
fn discounted_drift(r: f64, s: f64, t: f64) -> f64 {
    if r == 0.0 {
        t - s
    } else {
        (-r * s).exp() * -(-r * (t - s)).exp_m1() / r
    }
}

/// Jointly Gaussian increments of the two discounted Brownian integrals over
/// `[s, t]`, correlated with coefficient `rho`.
pub fn joint_diffusion_increment<R: RngCore + ?Sized>(
    r: f64,
    rho: f64,
    s: f64,
    t: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::param("rho", format!("must lie in [-1, 1], got {rho}")));
    }
    let v = discounted_diffusion_cov(r, s, t)?;
    let (z1, z2) = normal_pair(rng);
    Ok(correlate(v.sqrt(), rho, (1.0 - rho * rho).sqrt(), z1, z2))
}

#[inline]
fn normal_pair<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    (z1, z2)
}

#[inline]
fn correlate(sd: f64, rho: f64, rho_c: f64, z1: f64, z2: f64) -> (f64, f64) {
    (sd * z1, sd * (rho * z1 + rho_c * z2))
}

pub mod event {
    //! Bit flags marking what happens at an evaluation instant.
    pub const GRID: u8 = 1;
    pub const CLAIM1: u8 = 1 << 1;
    pub const CLAIM2: u8 = 1 << 2;
    pub const PREMIUM1: u8 = 1 << 3;
    pub const PREMIUM2: u8 = 1 << 4;
    pub const HORIZON: u8 = 1 << 5;
    pub const JUMP: u8 = CLAIM1 | CLAIM2 | PREMIUM1 | PREMIUM2;
}

/// State of the discounted process at one evaluation instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    /// `exp(-r t)`.
    pub disc: f64,
    /// Left limits `V_i(t-)`.
    pub v1_pre: f64,
    pub v2_pre: f64,
    /// Values after any jump at `t`.
    pub v1: f64,
    pub v2: f64,
    /// Cumulative diffusion contributions `sigma_i * int_0^t exp(-r s) dB_i(s)`.
    pub d1: f64,
    pub d2: f64,
    /// [`event`] flags.
    pub events: u8,
}

impl PathPoint {
    pub fn is_claim(&self, line: usize) -> bool {
        let flag = if line == 1 { event::CLAIM1 } else { event::CLAIM2 };
        self.events & flag != 0
    }
}

/// Parameters a detector needs to reason about the gaps between instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub r: f64,
    pub rho: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
}

/// One simulated path of `(V_1, V_2)` on its merged evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedPath {
    pub params: PathParams,
    /// `points[0]` is time 0; the last point is the horizon.
    pub points: Vec<PathPoint>,
}

impl DiscountedPath {
    fn empty(params: PathParams) -> Self {
        DiscountedPath { params, points: Vec::new() }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }

    /// Diffusion variance of a standard discounted Brownian motion between
    /// points `k - 1` and `k`.
    #[inline]
    pub fn interval_variance(&self, k: usize) -> f64 {
        let (a, b) = (&self.points[k - 1], &self.points[k]);
        if self.params.r == 0.0 {
            b.t - a.t
        } else {
            // exp(-2rs) - exp(-2rt) through the stored discount factors.
            (a.disc - b.disc) * (a.disc + b.disc) / (2.0 * self.params.r)
        }
    }

    /// Inserts the midpoint of every interval, sampling the diffusion at the
    /// new instants from its exact Gaussian bridge law. All existing
    /// instants keep their values, so the refined path is the same
    /// realisation observed on a finer grid.
    pub fn refine<R: RngCore + ?Sized>(&self, rng: &mut R) -> DiscountedPath {
        let PathParams { r, rho, sigma1, sigma2, c1, c2, .. } = self.params;
        let rho_c = (1.0 - rho * rho).sqrt();
        let mut out = Vec::with_capacity(2 * self.points.len());
        out.push(self.points[0]);
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let tm = 0.5 * (a.t + b.t);
            let va = interval_variance(r, a.t, tm);
            let vb = interval_variance(r, tm, b.t);
            let weight = va / (va + vb);
            let cond_sd = (va * vb / (va + vb)).sqrt();
            let (z1, z2) = normal_pair(rng);
            let (e1, e2) = correlate(cond_sd, rho, rho_c, z1, z2);
            let d1 = a.d1 + weight * (b.d1 - a.d1) + sigma1 * e1;
            let d2 = a.d2 + weight * (b.d2 - a.d2) + sigma2 * e2;
            let drift = discounted_drift(r, a.t, tm);
            let v1 = a.v1 + c1 * drift + (d1 - a.d1);
            let v2 = a.v2 + c2 * drift + (d2 - a.d2);
            out.push(PathPoint {
                t: tm,
                disc: (-r * tm).exp(),
                v1_pre: v1,
                v2_pre: v2,
                v1,
                v2,
                d1,
                d2,
                events: event::GRID,
            });
            out.push(b);
        }
        DiscountedPath { params: self.params, points: out }
    }
}

#[derive(Debug, Clone, Copy)]
struct Jump {
    t: f64,
    flag: u8,
    /// Undiscounted size, signed: claims negative, premiums positive.
    amount: f64,
}

/// Reusable simulator for one configuration. Holds scratch buffers so
/// repeated paths do not allocate.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    config: ModelConfig,
    params: PathParams,
    grid_len: usize,
    rho_c: f64,
    jumps: Vec<Jump>,
    scratch: Vec<f64>,
}

impl PathSimulator {
    pub fn new(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        // Grid points after 0: k*h for k*h < T, then T itself. A point within
        // 1e-9 h of T is merged with T.
        let ratio = config.horizon / config.step;
        let grid_len = ((ratio - 1e-9).ceil() as usize).max(1);
        Ok(PathSimulator {
            params: PathParams {
                r: config.r,
                rho: config.rho,
                sigma1: config.sigma1,
                sigma2: config.sigma2,
                c1: config.c1,
                c2: config.c2,
                horizon: config.horizon,
            },
            config: config.clone(),
            grid_len,
            rho_c: (1.0 - config.rho * config.rho).sqrt(),
            jumps: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn new_path(&self) -> DiscountedPath {
        DiscountedPath::empty(self.params)
    }

    #[inline]
    fn grid_time(&self, k: usize) -> f64 {
        if k >= self.grid_len {
            self.config.horizon
        } else {
            self.config.step * k as f64
        }
    }

    fn collect_jumps<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        let cfg = &self.config;
        self.jumps.clear();
        let horizon = cfg.horizon;

        draw_arrivals_into(cfg.lambda1, horizon, rng, &mut self.scratch);
        if cfg.common_shock {
            for &t in &self.scratch {
                let x1 = cfg.dist1.sample(rng);
                let x2 = cfg.dist2.sample(rng);
                self.jumps.push(Jump { t, flag: event::CLAIM1, amount: -x1 });
                self.jumps.push(Jump { t, flag: event::CLAIM2, amount: -x2 });
            }
        } else {
            for &t in &self.scratch {
                let x1 = cfg.dist1.sample(rng);
                self.jumps.push(Jump { t, flag: event::CLAIM1, amount: -x1 });
            }
            draw_arrivals_into(cfg.lambda2, horizon, rng, &mut self.scratch);
            for &t in &self.scratch {
                let x2 = cfg.dist2.sample(rng);
                self.jumps.push(Jump { t, flag: event::CLAIM2, amount: -x2 });
            }
        }
        if let PremiumMode::CompoundPoisson { rate1, jump1, rate2, jump2 } = cfg.premium {
            draw_arrivals_into(rate1, horizon, rng, &mut self.scratch);
            for &t in &self.scratch {
                let y = jump1.sample(rng);
                self.jumps.push(Jump { t, flag: event::PREMIUM1, amount: y });
            }
            draw_arrivals_into(rate2, horizon, rng, &mut self.scratch);
            for &t in &self.scratch {
                let y = jump2.sample(rng);
                self.jumps.push(Jump { t, flag: event::PREMIUM2, amount: y });
            }
        }
        // Stable sort keeps the per-line order of simultaneous jumps.
        self.jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
    }

    /// Simulates one path into `path`, reusing its allocation.
    pub fn simulate_into<R: RngCore + ?Sized>(&mut self, rng: &mut R, path: &mut DiscountedPath) {
        self.collect_jumps(rng);
        self.simulate_from_jumps(rng, path);
    }

    /// Steps the process over the merged grid given the jumps already
    /// collected; consumes two normals per interval.
    fn simulate_from_jumps<R: RngCore + ?Sized>(&self, rng: &mut R, path: &mut DiscountedPath) {
        let cfg = &self.config;
        let (r, rho, rho_c) = (cfg.r, cfg.rho, self.rho_c);
        let (s1, s2, c1, c2) = (cfg.sigma1, cfg.sigma2, cfg.c1, cfg.c2);

        path.params = self.params;
        let pts = &mut path.points;
        pts.clear();
        pts.reserve(self.grid_len + self.jumps.len() + 2);
        pts.push(PathPoint {
            t: 0.0,
            disc: 1.0,
            v1_pre: cfg.u1,
            v2_pre: cfg.u2,
            v1: cfg.u1,
            v2: cfg.u2,
            d1: 0.0,
            d2: 0.0,
            events: 0,
        });

        let mut prev = pts[0];
        let mut k = 1usize;
        let mut j = 0usize;
        let n_grid = self.grid_len.max(1);
        loop {
            let tg = if k <= n_grid { self.grid_time(k) } else { f64::INFINITY };
            let tj = self.jumps.get(j).map_or(f64::INFINITY, |jp| jp.t);
            let t = tg.min(tj);
            if !t.is_finite() {
                break;
            }
            let mut events = 0u8;
            if tg == t {
                events |= event::GRID;
                if k >= n_grid {
                    events |= event::HORIZON;
                }
                k += 1;
            }

            let disc = if r == 0.0 { 1.0 } else { (-r * t).exp() };
            let (var, drift) = if r == 0.0 {
                (t - prev.t, t - prev.t)
            } else {
                ((prev.disc - disc) * (prev.disc + disc) / (2.0 * r), (prev.disc - disc) / r)
            };
            let (z1, z2) = normal_pair(rng);
            let (e1, e2) = correlate(var.sqrt(), rho, rho_c, z1, z2);
            let d1 = prev.d1 + s1 * e1;
            let d2 = prev.d2 + s2 * e2;
            let v1_pre = prev.v1 + c1 * drift + s1 * e1;
            let v2_pre = prev.v2 + c2 * drift + s2 * e2;
            let (mut v1, mut v2) = (v1_pre, v2_pre);
            while j < self.jumps.len() && self.jumps[j].t == t {
                let jp = self.jumps[j];
                events |= jp.flag;
                match jp.flag {
                    event::CLAIM1 | event::PREMIUM1 => v1 += jp.amount * disc,
                    _ => v2 += jp.amount * disc,
                }
                j += 1;
            }
            let p = PathPoint { t, disc, v1_pre, v2_pre, v1, v2, d1, d2, events };
            pts.push(p);
            prev = p;
        }
    }

    /// Simulates one path into a fresh allocation.
    pub fn simulate<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> DiscountedPath {
        let mut path = self.new_path();
        self.simulate_into(rng, &mut path);
        path
    }
}

/// Simulates one discounted path of `config`.
pub fn simulate_path<R: RngCore + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<DiscountedPath> {
    Ok(PathSimulator::new(config)?.simulate(rng))
}
