//! Batched Monte Carlo estimation of the ruin probabilities.
//!
//! Paths are grouped in fixed-size batches; batch `b` always draws from
//! stream `(seed, b)`. Batch results are integer counts merged in batch
//! order, so an estimate depends only on `(config, n_paths, seed,
//! batch_size)`, never on the number of workers or on scheduling.

use std::fmt;
use std::ops::AddAssign;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::asymptotics::{self, AsymptoticResult};
use crate::error::{Error, Result};
use crate::risk_process::{discounted_diffusion_cov, joint_diffusion_increment, ModelConfig, PathSimulator};
use crate::rng::{stream, StreamRng};
use crate::ruin_detect::detect;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_BATCH_SIZE: u64 = 1 << 14;

/// A proportion with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: u64,
    pub hits: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        assert!(n >= 1 && hits <= n, "invalid counts {hits}/{n}");
        let (ci_lo, ci_hi) = wilson_interval(hits, n, Z95);
        Estimate { p_hat: hits as f64 / n as f64, ci_lo, ci_hi, n, hits }
    }

    /// Binomial standard error at `p_hat`.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n as f64).sqrt()
    }
}

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // The closed form is exact at the boundaries; pin them against rounding.
    let lo = if hits == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if hits == n { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuinType {
    Max,
    Min,
    Sum,
    And,
    Comp1,
    Comp2,
}

impl RuinType {
    pub const ALL: [RuinType; 6] =
        [RuinType::Max, RuinType::Min, RuinType::Sum, RuinType::And, RuinType::Comp1, RuinType::Comp2];

    pub fn as_str(self) -> &'static str {
        match self {
            RuinType::Max => "max",
            RuinType::Min => "min",
            RuinType::Sum => "sum",
            RuinType::And => "and",
            RuinType::Comp1 => "comp1",
            RuinType::Comp2 => "comp2",
        }
    }
}

impl fmt::Display for RuinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw event counts over a set of paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuinCounts {
    pub n: u64,
    pub max: u64,
    pub min: u64,
    pub sum: u64,
    pub and: u64,
    pub comp1: u64,
    pub comp2: u64,
}

impl RuinCounts {
    pub fn get(&self, kind: RuinType) -> u64 {
        match kind {
            RuinType::Max => self.max,
            RuinType::Min => self.min,
            RuinType::Sum => self.sum,
            RuinType::And => self.and,
            RuinType::Comp1 => self.comp1,
            RuinType::Comp2 => self.comp2,
        }
    }

    /// `min + and = comp1 + comp2`, `max <= and <= min`, `sum <= min`.
    pub fn identities_hold(&self) -> bool {
        self.min + self.and == self.comp1 + self.comp2
            && self.max <= self.and
            && self.and <= self.min
            && self.sum <= self.min
    }
}

impl AddAssign for RuinCounts {
    fn add_assign(&mut self, o: Self) {
        self.n += o.n;
        self.max += o.max;
        self.min += o.min;
        self.sum += o.sum;
        self.and += o.and;
        self.comp1 += o.comp1;
        self.comp2 += o.comp2;
    }
}

/// One estimate per ruin type, all from the same paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSet {
    pub max: Estimate,
    pub min: Estimate,
    pub sum: Estimate,
    pub and: Estimate,
    pub comp1: Estimate,
    pub comp2: Estimate,
    pub counts: RuinCounts,
}

impl EstimateSet {
    pub fn from_counts(counts: RuinCounts) -> Self {
        let e = |k| Estimate::from_counts(k, counts.n);
        EstimateSet {
            max: e(counts.max),
            min: e(counts.min),
            sum: e(counts.sum),
            and: e(counts.and),
            comp1: e(counts.comp1),
            comp2: e(counts.comp2),
            counts,
        }
    }

    pub fn get(&self, kind: RuinType) -> &Estimate {
        match kind {
            RuinType::Max => &self.max,
            RuinType::Min => &self.min,
            RuinType::Sum => &self.sum,
            RuinType::And => &self.and,
            RuinType::Comp1 => &self.comp1,
            RuinType::Comp2 => &self.comp2,
        }
    }
}

/// Run-size and parallelism settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub n_paths: u64,
    pub seed: u64,
    pub workers: usize,
    pub batch_size: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { n_paths: 100_000, seed: 0, workers: default_workers(), batch_size: DEFAULT_BATCH_SIZE }
    }
}

impl McOptions {
    pub fn new(n_paths: u64, seed: u64, workers: usize) -> Self {
        McOptions { n_paths, seed, workers, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `job(b, size)` for every batch on `workers` threads and returns the
/// results in batch order.
fn run_batches<T, F>(n: u64, batch_size: u64, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    let batches = n.div_ceil(batch_size);
    let size_of = |b: u64| batch_size.min(n - b * batch_size);
    if workers <= 1 || batches == 1 {
        return (0..batches).map(|b| job(b, size_of(b))).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..batches).into_par_iter().map(|b| job(b, size_of(b))).collect())
}

fn simulate_batch(config: &ModelConfig, seed: u64, batch: u64, size: u64) -> Result<RuinCounts> {
    let mut sim = PathSimulator::new(config)?;
    let mut path = sim.new_path();
    let mut rng = stream(seed, batch);
    let mut c = RuinCounts { n: size, ..Default::default() };
    for _ in 0..size {
        sim.simulate_into(&mut rng, &mut path);
        let out = detect(&path, config.bridge, &mut rng);
        c.max += out.ruin_max() as u64;
        c.min += out.ruin_min() as u64;
        c.sum += out.ruin_sum() as u64;
        c.and += out.ruin_and() as u64;
        c.comp1 += out.ruin1() as u64;
        c.comp2 += out.ruin2() as u64;
    }
    Ok(c)
}

/// Estimates all ruin probabilities of `config` from `opts.n_paths` paths.
pub fn estimate_ruin_with(config: &ModelConfig, opts: &McOptions) -> Result<EstimateSet> {
    config.validate()?;
    opts.validate()?;
    let parts =
        run_batches(opts.n_paths, opts.batch_size, opts.workers, |b, size| simulate_batch(config, opts.seed, b, size))?;
    let mut total = RuinCounts::default();
    for part in parts {
        total += part;
    }
    Ok(EstimateSet::from_counts(total))
}

/// Estimates all ruin probabilities with the default batch size.
pub fn estimate_ruin(config: &ModelConfig, n_paths: u64, seed: u64, workers: usize) -> Result<EstimateSet> {
    estimate_ruin_with(config, &McOptions::new(n_paths, seed, workers))
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub u1: f64,
    pub u2: f64,
    pub ruin_type: RuinType,
    pub estimate: Estimate,
    pub asym: AsymptoticResult,
}

impl StudyRow {
    /// `p_hat / asym`, when the approximation is positive.
    pub fn ratio(&self) -> Option<f64> {
        (self.asym.value > 0.0).then(|| self.estimate.p_hat / self.asym.value)
    }
}

/// The approximation matching `kind` at capital `(u1, u2)`.
pub fn asymptotic_for(config: &ModelConfig, kind: RuinType, u1: f64, u2: f64) -> Result<AsymptoticResult> {
    let mut res = match kind {
        RuinType::Max => asymptotics::psi_max_asym(config, u1, u2),
        RuinType::Min => asymptotics::psi_min_asym(config, u1, u2),
        RuinType::Sum => asymptotics::psi_sum_asym(config, u1, u2),
        RuinType::And => asymptotics::psi_and_upper(config, u1, u2),
        RuinType::Comp1 => asymptotics::psi_line_asym(config, 1, u1),
        RuinType::Comp2 => asymptotics::psi_line_asym(config, 2, u2),
    }?;
    res.u1 = u1;
    res.u2 = u2;
    Ok(res)
}

/// Estimates every ruin type at each capital pair of `u_grid` and pairs it
/// with its approximation. Each grid point reuses the same seed.
pub fn convergence_study(config: &ModelConfig, u_grid: &[(f64, f64)], opts: &McOptions) -> Result<Vec<StudyRow>> {
    if u_grid.is_empty() {
        return Err(Error::param("u_grid", "must not be empty"));
    }
    for w in u_grid.windows(2) {
        let ((a1, a2), (b1, b2)) = (w[0], w[1]);
        if !(b1 >= a1 && b2 >= a2 && (b1 > a1 || b2 > a2)) {
            return Err(Error::param("u_grid", format!("must be increasing, got {:?} then {:?}", w[0], w[1])));
        }
    }
    let mut rows = Vec::with_capacity(u_grid.len() * RuinType::ALL.len());
    for &(u1, u2) in u_grid {
        let cfg = ModelConfig { u1, u2, ..config.clone() };
        let est = estimate_ruin_with(&cfg, opts)?;
        for kind in RuinType::ALL {
            rows.push(StudyRow {
                u1,
                u2,
                ruin_type: kind,
                estimate: *est.get(kind),
                asym: asymptotic_for(&cfg, kind, u1, u2)?,
            });
        }
    }
    Ok(rows)
}

/// Extreme functional examined by [`dependence_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    /// `sup B_i > x_i`.
    Sup,
    /// `inf B_i < -x_i`.
    Inf,
    /// As `Sup` for `int_0^s exp(-r l) dB_i(l)`.
    DiscountedSup,
    /// As `Inf` for the discounted integrals.
    DiscountedInf,
}

impl ProbeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeMode::Sup => "sup",
            ProbeMode::Inf => "inf",
            ProbeMode::DiscountedSup => "discounted_sup",
            ProbeMode::DiscountedInf => "discounted_inf",
        }
    }

    fn discounted(self) -> bool {
        matches!(self, ProbeMode::DiscountedSup | ProbeMode::DiscountedInf)
    }
}

/// Inputs of [`dependence_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub rho: f64,
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub n: u64,
    pub seed: u64,
    pub mode: ProbeMode,
    pub r: f64,
    /// Grid steps on `[0, t]`.
    pub steps: usize,
    pub workers: usize,
}

impl ProbeSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(rho: f64, t: f64, x1: f64, x2: f64, n: u64, seed: u64, mode: ProbeMode, r: f64) -> Self {
        ProbeSpec { rho, t, x1, x2, n, seed, mode, r, steps: 10_000, workers: default_workers() }
    }
}

/// Joint and marginal exceedance frequencies of a correlated pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceRecord {
    pub joint: Estimate,
    pub marg1: Estimate,
    pub marg2: Estimate,
}

impl DependenceRecord {
    /// `joint - marg1 * marg2`.
    pub fn excess(&self) -> f64 {
        self.joint.p_hat - self.marg1.p_hat * self.marg2.p_hat
    }

    /// Delta-method standard error of [`Self::excess`], accounting for the
    /// three proportions coming from the same paths.
    pub fn excess_std_error(&self) -> f64 {
        let (pj, p1, p2) = (self.joint.p_hat, self.marg1.p_hat, self.marg2.p_hat);
        let var = pj * (1.0 - pj) + p2 * p2 * p1 * (1.0 - p1) + p1 * p1 * p2 * (1.0 - p2)
            - 2.0 * p2 * pj * (1.0 - p1)
            - 2.0 * p1 * pj * (1.0 - p2)
            + 2.0 * p1 * p2 * (pj - p1 * p2);
        (var.max(0.0) / self.joint.n as f64).sqrt()
    }
}

/// Estimates `P(E1, E2)`, `P(E1)` and `P(E2)` where `E_i` is the event that
/// the running extreme of the i-th (discounted) Brownian component passes
/// level `x_i` (above for sup modes, below `-x_i` for inf modes) by time `t`.
/// The pair is simulated exactly on a grid of `steps` points.
pub fn dependence_probe(spec: &ProbeSpec) -> Result<DependenceRecord> {
    if !(spec.x1 > 0.0 && spec.x2 > 0.0) {
        return Err(Error::param("x", format!("levels must be > 0, got {} and {}", spec.x1, spec.x2)));
    }
    if spec.n == 0 || spec.steps == 0 {
        return Err(Error::param("n", "path count and steps must be >= 1"));
    }
    if !(spec.t > 0.0) {
        return Err(Error::param("t", format!("must be > 0, got {}", spec.t)));
    }
    if !(-1.0..=1.0).contains(&spec.rho) {
        return Err(Error::param("rho", format!("must lie in [-1, 1], got {}", spec.rho)));
    }
    if spec.mode.discounted() && !(spec.r > 0.0) {
        return Err(Error::param("r", format!("discounted modes need r > 0, got {}", spec.r)));
    }
    let r = if spec.mode.discounted() { spec.r } else { 0.0 };
    let dt = spec.t / spec.steps as f64;
    let sds: Vec<f64> = (0..spec.steps)
        .map(|k| {
            let s = dt * k as f64;
            let e = if k + 1 == spec.steps { spec.t } else { dt * (k + 1) as f64 };
            discounted_diffusion_cov(r, s, e).map(f64::sqrt)
        })
        .collect::<Result<_>>()?;
    let sign = match spec.mode {
        ProbeMode::Sup | ProbeMode::DiscountedSup => 1.0,
        ProbeMode::Inf | ProbeMode::DiscountedInf => -1.0,
    };
    let rho = spec.rho;
    let rho_c = (1.0 - rho * rho).sqrt();

    let parts = run_batches(spec.n, DEFAULT_BATCH_SIZE / 16, spec.workers, |b, size| {
        let mut rng = stream(spec.seed, b);
        let mut counts = [0u64; 3];
        for _ in 0..size {
            let (mut w1, mut w2) = (0.0f64, 0.0f64);
            let (mut hit1, mut hit2) = (false, false);
            for &sd in &sds {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                w1 += sd * z1;
                w2 += sd * (rho * z1 + rho_c * z2);
                hit1 |= sign * w1 > spec.x1;
                hit2 |= sign * w2 > spec.x2;
                if hit1 && hit2 {
                    break;
                }
            }
            counts[0] += (hit1 && hit2) as u64;
            counts[1] += hit1 as u64;
            counts[2] += hit2 as u64;
        }
        Ok(counts)
    })?;
    let mut total = [0u64; 3];
    for p in parts {
        for i in 0..3 {
            total[i] += p[i];
        }
    }
    Ok(DependenceRecord {
        joint: Estimate::from_counts(total[0], spec.n),
        marg1: Estimate::from_counts(total[1], spec.n),
        marg2: Estimate::from_counts(total[2], spec.n),
    })
}

/// Sample versus theoretical variance of `sigma1 D1(t) + sigma2 D2(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumReduction {
    pub sample_var: f64,
    pub theory_var: f64,
    /// `(sample_var - theory_var) / (theory_var sqrt(2 / (n - 1)))`, the
    /// standardised deviation under the chi-square law of a Gaussian sample
    /// variance. Zero when both variances vanish.
    pub z_score: f64,
}

/// Checks that the aggregate diffusion `sigma1 D1 + sigma2 D2` behaves as a
/// single discounted Brownian integral with volatility
/// `sqrt(sigma1^2 + sigma2^2 + 2 rho sigma1 sigma2)`.
pub fn sum_reduction_probe(
    sigma1: f64,
    sigma2: f64,
    rho: f64,
    r: f64,
    t: f64,
    n: u64,
    seed: u64,
) -> Result<SumReduction> {
    if n < 2 {
        return Err(Error::param("n", "need at least 2 draws"));
    }
    let v = discounted_diffusion_cov(r, 0.0, t)?;
    let theory_var = (sigma1 * sigma1 + sigma2 * sigma2 + 2.0 * rho * sigma1 * sigma2).max(0.0) * v;
    let mut rng: StreamRng = stream(seed, 0);
    // Welford running mean / sum of squared deviations.
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for k in 1..=n {
        let (d1, d2) = joint_diffusion_increment(r, rho, 0.0, t, &mut rng)?;
        let x = sigma1 * d1 + sigma2 * d2;
        let delta = x - mean;
        mean += delta / k as f64;
        m2 += delta * (x - mean);
    }
    let sample_var = m2 / (n - 1) as f64;
    let z_score = if theory_var > 0.0 {
        (sample_var - theory_var) / (theory_var * (2.0 / (n - 1) as f64).sqrt())
    } else if sample_var == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(SumReduction { sample_var, theory_var, z_score })
}
