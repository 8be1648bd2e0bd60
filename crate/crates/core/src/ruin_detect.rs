//! Ruin events of a simulated path.
//!
//! Component ruin and sum ruin are checked at every evaluation instant
//! (left limits and post-jump values) and, with the bridge correction on, on
//! every gap between instants through the Brownian-bridge minimum law.
//! Simultaneous ruin of both lines is checked at evaluation instants only.
//!
//! Each examined gap consumes a single uniform `U`, shared by the three
//! crossing tests (line 1, line 2, sum). With that coupling a sum crossing
//! always comes with a crossing of at least one line in the same gap, since
//! the sum's bridge crossing probability never exceeds the larger of the two
//! line probabilities (Cauchy-Schwarz on the endpoint distances). So
//! `sum => min` holds on every path, as it does for the continuous process.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::risk_process::DiscountedPath;
use crate::rng::open_unit;

/// Probability that a Brownian bridge of total variance `v` between heights
/// `a` and `b` dips below zero.
pub fn bridge_crossing_prob(a: f64, b: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::param("v", format!("bridge variance must be > 0, got {v}")));
    }
    Ok(crossing_prob(a, b, v))
}

#[inline]
fn crossing_prob(a: f64, b: f64, v: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        1.0
    } else {
        (-2.0 * a * b / v).exp()
    }
}

/// First-passage times of the ruin events on one path. `None` means no ruin
/// within the horizon.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RuinOutcome {
    /// Line 1 below zero.
    pub t1: Option<f64>,
    /// Line 2 below zero.
    pub t2: Option<f64>,
    /// Both lines below zero at the same instant.
    pub t_max: Option<f64>,
    /// `V_1 + V_2` below zero.
    pub t_sum: Option<f64>,
}

impl RuinOutcome {
    pub fn ruin1(&self) -> bool {
        self.t1.is_some()
    }

    pub fn ruin2(&self) -> bool {
        self.t2.is_some()
    }

    pub fn ruin_max(&self) -> bool {
        self.t_max.is_some()
    }

    pub fn ruin_sum(&self) -> bool {
        self.t_sum.is_some()
    }

    pub fn ruin_min(&self) -> bool {
        self.ruin1() || self.ruin2()
    }

    pub fn ruin_and(&self) -> bool {
        self.ruin1() && self.ruin2()
    }

    pub fn t_min(&self) -> Option<f64> {
        match (self.t1, self.t2) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn t_and(&self) -> Option<f64> {
        Some(self.t1?.max(self.t2?))
    }

    fn settled(&self) -> bool {
        self.t1.is_some() && self.t2.is_some() && self.t_max.is_some() && self.t_sum.is_some()
    }
}

/// Scans `path` for the four ruin events.
///
/// A crossing found by the bridge test is dated at the left end of its gap.
pub fn detect<R: RngCore + ?Sized>(path: &DiscountedPath, bridge: bool, rng: &mut R) -> RuinOutcome {
    let pts = &path.points;
    let params = &path.params;
    let var1 = params.sigma1 * params.sigma1;
    let var2 = params.sigma2 * params.sigma2;
    let var_sum = (var1 + var2 + 2.0 * params.rho * params.sigma1 * params.sigma2).max(0.0);

    let mut out = RuinOutcome::default();
    let Some(first) = pts.first() else {
        return out;
    };
    check_state(&mut out, first.t, first.v1, first.v2);

    for k in 1..pts.len() {
        if out.settled() {
            break;
        }
        let (a, b) = (&pts[k - 1], &pts[k]);

        if bridge && (out.t1.is_none() || out.t2.is_none() || out.t_sum.is_none()) {
            let v = path.interval_variance(k);
            let u = open_unit(rng);
            if v > 0.0 {
                if out.t1.is_none() && var1 > 0.0 && u < crossing_prob(a.v1, b.v1_pre, var1 * v) {
                    out.t1 = Some(a.t);
                }
                if out.t2.is_none() && var2 > 0.0 && u < crossing_prob(a.v2, b.v2_pre, var2 * v) {
                    out.t2 = Some(a.t);
                }
                if out.t_sum.is_none()
                    && var_sum > 0.0
                    && u < crossing_prob(a.v1 + a.v2, b.v1_pre + b.v2_pre, var_sum * v)
                {
                    out.t_sum = Some(a.t);
                }
            }
        }

        check_state(&mut out, b.t, b.v1_pre, b.v2_pre);
        check_state(&mut out, b.t, b.v1, b.v2);
    }
    out
}

#[inline]
fn check_state(out: &mut RuinOutcome, t: f64, v1: f64, v2: f64) {
    let (neg1, neg2) = (v1 < 0.0, v2 < 0.0);
    if neg1 && out.t1.is_none() {
        out.t1 = Some(t);
    }
    if neg2 && out.t2.is_none() {
        out.t2 = Some(t);
    }
    if neg1 && neg2 && out.t_max.is_none() {
        out.t_max = Some(t);
    }
    if v1 + v2 < 0.0 && out.t_sum.is_none() {
        out.t_sum = Some(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heavy_tails::ClaimDistribution;
    use crate::risk_process::{ModelConfig, PathSimulator};
    use crate::rng::stream;

    #[test]
    fn crossing_prob_examples() {
        assert_eq!(bridge_crossing_prob(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(bridge_crossing_prob(1.0, -0.5, 1.0).unwrap(), 1.0);
        let p = bridge_crossing_prob(1.0, 1.0, 1.0).unwrap();
        assert!((p - (-2.0f64).exp()).abs() < 1e-16);
        assert!((p - 0.135_335).abs() < 1e-6);
        assert!(bridge_crossing_prob(1.0, 1.0, 0.0).is_err());
        assert!(bridge_crossing_prob(1.0, 1.0, -1.0).is_err());
    }

    fn quiet_claims() -> ClaimDistribution {
        ClaimDistribution::Pareto { alpha: 1.0, xm: 1e-300 }
    }

    #[test]
    fn far_from_zero_never_ruins() {
        let cfg = ModelConfig {
            u1: 1e9,
            u2: 1e9,
            dist1: quiet_claims(),
            dist2: quiet_claims(),
            step: 0.01,
            ..Default::default()
        };
        let mut sim = PathSimulator::new(&cfg).unwrap();
        let mut rng = stream(1, 0);
        for _ in 0..200 {
            let path = sim.simulate(&mut rng);
            let out = detect(&path, true, &mut rng);
            assert_eq!(out, RuinOutcome::default());
        }
    }

    #[test]
    fn zero_start_without_drift_is_certain_ruin() {
        let cfg = ModelConfig {
            u1: 0.0,
            c1: 0.0,
            sigma1: 0.5,
            lambda1: 1e-300,
            lambda2: 1e-300,
            step: 0.1,
            ..Default::default()
        };
        let mut sim = PathSimulator::new(&cfg).unwrap();
        let mut rng = stream(2, 0);
        for _ in 0..200 {
            let path = sim.simulate(&mut rng);
            let out = detect(&path, true, &mut rng);
            assert_eq!(out.t1, Some(0.0));
            assert!(out.ruin_min());
        }
    }

    #[test]
    fn simultaneous_jump_ruin() {
        // Every claim is at least 1e6 and the capital is small: the first
        // common arrival ruins both lines at once.
        let huge = ClaimDistribution::Pareto { alpha: 3.0, xm: 1e6 };
        let cfg = ModelConfig {
            u1: 1.0,
            u2: 1.0,
            sigma1: 0.0,
            sigma2: 0.0,
            lambda1: 3.0,
            dist1: huge,
            dist2: huge,
            step: 0.01,
            ..Default::default()
        };
        let mut sim = PathSimulator::new(&cfg).unwrap();
        let mut rng = stream(3, 0);
        let mut seen = 0;
        for _ in 0..200 {
            let path = sim.simulate(&mut rng);
            let tau = path.points.iter().find(|p| p.is_claim(1)).map(|p| p.t);
            let out = detect(&path, true, &mut rng);
            match tau {
                Some(tau) => {
                    seen += 1;
                    assert_eq!(out.t_max, Some(tau));
                    assert_eq!(out.t1, Some(tau));
                    assert_eq!(out.t2, Some(tau));
                    assert_eq!(out.t_sum, Some(tau));
                }
                None => assert_eq!(out, RuinOutcome::default()),
            }
        }
        assert!(seen > 100);
    }

    fn stress_config(rho: f64, r: f64, common: bool) -> ModelConfig {
        ModelConfig {
            u1: 1.5,
            u2: 2.0,
            r,
            rho,
            sigma1: 0.8,
            sigma2: 0.6,
            lambda1: 2.0,
            lambda2: 1.5,
            common_shock: common,
            c1: 1.0,
            c2: 0.5,
            step: 0.02,
            ..Default::default()
        }
    }

    #[test]
    fn structural_invariants_hold_pathwise() {
        for (i, (rho, r, common)) in
            [(-0.9, 0.0, true), (0.0, 0.05, false), (0.7, 0.05, true), (-1.0, 0.0, false)].into_iter().enumerate()
        {
            let cfg = stress_config(rho, r, common);
            let mut sim = PathSimulator::new(&cfg).unwrap();
            let mut rng = stream(40, i as u64);
            for _ in 0..5000 {
                let path = sim.simulate(&mut rng);
                let out = detect(&path, true, &mut rng);
                assert_eq!(out.ruin_min(), out.ruin1() || out.ruin2());
                assert_eq!(out.ruin_and(), out.ruin1() && out.ruin2());
                let lhs = out.ruin_min() as u8 + out.ruin_and() as u8;
                let rhs = out.ruin1() as u8 + out.ruin2() as u8;
                assert_eq!(lhs, rhs);
                if out.ruin_max() {
                    assert!(out.ruin_and());
                    assert!(out.t_max.unwrap() >= out.t_and().unwrap());
                }
                if out.ruin_sum() {
                    assert!(out.ruin_min(), "sum ruin without line ruin: {out:?}");
                    assert!(out.t_sum.unwrap() >= out.t_min().unwrap());
                }
                for t in [out.t1, out.t2, out.t_max, out.t_sum].into_iter().flatten() {
                    assert!((0.0..=cfg.horizon).contains(&t));
                }
            }
        }
    }

    #[test]
    fn bridge_flags_dominate_grid_flags() {
        let cfg = stress_config(-0.5, 0.05, true);
        let mut sim = PathSimulator::new(&cfg).unwrap();
        let mut rng = stream(41, 0);
        let mut strictly_more = 0;
        for _ in 0..5000 {
            let path = sim.simulate(&mut rng);
            let off = detect(&path, false, &mut rng);
            let on = detect(&path, true, &mut rng);
            for (a, b) in [
                (off.ruin1(), on.ruin1()),
                (off.ruin2(), on.ruin2()),
                (off.ruin_sum(), on.ruin_sum()),
                (off.ruin_max(), on.ruin_max()),
            ] {
                assert!(!a || b);
            }
            strictly_more += (on.ruin_min() && !off.ruin_min()) as u32;
        }
        assert!(strictly_more > 0);
    }

    #[test]
    fn refined_grid_flags_dominate() {
        let cfg = stress_config(-0.3, 0.05, false);
        let mut sim = PathSimulator::new(&cfg).unwrap();
        let mut rng = stream(42, 0);
        for _ in 0..3000 {
            let path = sim.simulate(&mut rng);
            let fine = path.refine(&mut rng);
            let coarse = detect(&path, false, &mut rng);
            let refined = detect(&fine, false, &mut rng);
            for (a, b) in [
                (coarse.t1, refined.t1),
                (coarse.t2, refined.t2),
                (coarse.t_sum, refined.t_sum),
                (coarse.t_max, refined.t_max),
            ] {
                if let Some(ta) = a {
                    assert!(b.unwrap() <= ta);
                }
            }
        }
    }

    /// Brute-force oracle: Brownian bridges from 1 to 1 with unit variance,
    /// sampled forward on 10^4 steps and checked for a dip below zero.
    ///
    /// Discrete monitoring misses crossings between steps and biases the
    /// frequency low by a term proportional to `sqrt(dt)`, about 3 standard
    /// errors here. The same paths monitored every 4th step carry twice that
    /// bias, so `2 p(dt) - p(4 dt)` removes it.
    #[test]
    fn crossing_prob_matches_fine_grid_bridges() {
        use rand_distr::{Distribution, StandardNormal};
        let steps = 10_000usize;
        let n = 100_000usize;
        let dt = 1.0 / steps as f64;
        let mut rng = stream(43, 0);
        let (mut fine, mut coarse, mut sum_y2) = (0usize, 0usize, 0.0f64);
        for _ in 0..n {
            let mut b = 1.0f64;
            let (mut hit_f, mut hit_c) = (false, false);
            for i in 0..steps - 1 {
                let rem = 1.0 - i as f64 * dt;
                let z: f64 = StandardNormal.sample(&mut rng);
                b += (1.0 - b) * dt / rem + (dt * (rem - dt) / rem).sqrt() * z;
                if b < 0.0 {
                    hit_f = true;
                    if (i + 1) % 4 == 0 {
                        hit_c = true;
                        break;
                    }
                }
            }
            fine += hit_f as usize;
            coarse += hit_c as usize;
            let y = 2.0 * hit_f as u8 as f64 - hit_c as u8 as f64;
            sum_y2 += y * y;
        }
        let nf = n as f64;
        let p_fine = fine as f64 / nf;
        let p_ext = (2.0 * fine as f64 - coarse as f64) / nf;
        let se = ((sum_y2 / nf - p_ext * p_ext) / (nf - 1.0)).sqrt();
        let p = bridge_crossing_prob(1.0, 1.0, 1.0).unwrap();
        assert!(p_fine < p, "discrete monitoring cannot see more crossings: {p_fine} vs {p}");
        assert!((p_ext - p).abs() < 3.0 * se, "extrapolated {p_ext} vs {p} (se {se})");
    }
}
