//! Parametric claim-size laws.
//!
//! All laws are sampled by inversion: one uniform in, one claim out. That
//! keeps stream accounting exact, so a path is a pure function of its seed.

use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::normal;
use crate::rng::open_unit;

/// Tail class of a claim law. Purely declarative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassTag {
    Subexponential,
    Erv,
    Light,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::Subexponential => "subexponential",
            ClassTag::Erv => "erv",
            ClassTag::Light => "light",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClaimDistribution {
    /// `P(X > x) = (xm / x)^alpha` for `x >= xm`.
    Pareto { alpha: f64, xm: f64 },
    /// `P(X > x) = exp(-(x / scale)^shape)`, `shape` in (0, 1).
    Weibull { shape: f64, scale: f64 },
    /// `ln X ~ N(mu, sigma^2)`.
    Lognormal { mu: f64, sigma: f64 },
    /// Light-tailed contrast case.
    Exponential { rate: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

impl ClaimDistribution {
    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("xm", xm)?;
        Ok(ClaimDistribution::Pareto { alpha, xm })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape < 1.0) {
            return Err(Error::param(
                "shape",
                format!("Weibull shape must lie in (0, 1) for a heavy tail, got {shape}"),
            ));
        }
        positive("scale", scale)?;
        Ok(ClaimDistribution::Weibull { shape, scale })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::param("mu", format!("must be finite, got {mu}")));
        }
        positive("sigma", sigma)?;
        Ok(ClaimDistribution::Lognormal { mu, sigma })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(ClaimDistribution::Exponential { rate })
    }

    /// Builds a law from its kind name and positional parameters, as written
    /// in config files: `pareto [alpha, xm]`, `weibull [shape, scale]`,
    /// `lognormal [mu, sigma]`, `exponential [rate]`.
    pub fn from_kind(kind: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::param("params", format!("{kind} takes {n} parameter(s), got {}", params.len())))
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "pareto" => {
                want(2)?;
                Self::pareto(params[0], params[1])
            }
            "weibull" => {
                want(2)?;
                Self::weibull(params[0], params[1])
            }
            "lognormal" => {
                want(2)?;
                Self::lognormal(params[0], params[1])
            }
            "exponential" => {
                want(1)?;
                Self::exponential(params[0])
            }
            other => Err(Error::param(
                "kind",
                format!("unknown distribution `{other}` (pareto, weibull, lognormal, exponential)"),
            )),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ClaimDistribution::Pareto { .. } => "pareto",
            ClaimDistribution::Weibull { .. } => "weibull",
            ClaimDistribution::Lognormal { .. } => "lognormal",
            ClaimDistribution::Exponential { .. } => "exponential",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            ClaimDistribution::Pareto { alpha, xm } => vec![alpha, xm],
            ClaimDistribution::Weibull { shape, scale } => vec![shape, scale],
            ClaimDistribution::Lognormal { mu, sigma } => vec![mu, sigma],
            ClaimDistribution::Exponential { rate } => vec![rate],
        }
    }

    pub fn class_tag(&self) -> ClassTag {
        match self {
            ClaimDistribution::Exponential { .. } => ClassTag::Light,
            _ => ClassTag::Subexponential,
        }
    }

    /// Left end of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            ClaimDistribution::Pareto { xm, .. } => xm,
            _ => 0.0,
        }
    }

    /// Mean, or `None` when it is infinite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            ClaimDistribution::Pareto { alpha, xm } => (alpha > 1.0).then(|| alpha * xm / (alpha - 1.0)),
            ClaimDistribution::Weibull { shape, scale } => Some(scale * libm::tgamma(1.0 + 1.0 / shape)),
            ClaimDistribution::Lognormal { mu, sigma } => Some((mu + 0.5 * sigma * sigma).exp()),
            ClaimDistribution::Exponential { rate } => Some(1.0 / rate),
        }
    }

    /// Survival function `P(X > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            ClaimDistribution::Pareto { alpha, xm } => {
                if x <= xm {
                    1.0
                } else {
                    (xm / x).powf(alpha)
                }
            }
            ClaimDistribution::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
            ClaimDistribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    normal::sf((x.ln() - mu) / sigma)
                }
            }
            ClaimDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
        }
    }

    /// CDF `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    /// Inverse CDF on the open unit interval.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", format!("quantile level must lie in (0, 1), got {p}")));
        }
        Ok(self.quantile_unchecked(p))
    }

    #[inline]
    fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            ClaimDistribution::Pareto { alpha, xm } => xm * (-(-p).ln_1p() / alpha).exp(),
            ClaimDistribution::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            ClaimDistribution::Lognormal { mu, sigma } => (mu + sigma * normal::inv_cdf(p)).exp(),
            ClaimDistribution::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// One draw by inversion; consumes exactly one 64-bit word.
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(open_unit(rng))
    }
}

impl fmt::Display for ClaimDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| format!("{p}")).collect();
        write!(f, "{}({})", self.kind_name(), params.join(", "))
    }
}

/// Tail of `xi * X1 + (1 - xi) * X2` with `P(xi = 1) = lambda1 / (lambda1 + lambda2)`:
/// the claim-size law seen by the pooled arrival stream of two independent
/// Poisson processes.
pub fn mixture_tail(
    dist1: &ClaimDistribution,
    dist2: &ClaimDistribution,
    lambda1: f64,
    lambda2: f64,
    x: f64,
) -> Result<f64> {
    positive("lambda1", lambda1)?;
    positive("lambda2", lambda2)?;
    let w1 = lambda1 / (lambda1 + lambda2);
    let w2 = lambda2 / (lambda1 + lambda2);
    Ok(w1 * dist1.tail(x) + w2 * dist2.tail(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn tail_examples() {
        let p1 = ClaimDistribution::pareto(1.0, 1.0).unwrap();
        assert_eq!(p1.tail(2.0), 0.5);
        let p2 = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        assert_eq!(p2.tail(0.5), 1.0);
        let w = ClaimDistribution::weibull(0.5, 1.0).unwrap();
        assert!(close(w.tail(4.0), (-2.0f64).exp(), 1e-15));
        assert!(close(w.tail(4.0), 0.135_335, 1e-5));
    }

    #[test]
    fn quantile_examples() {
        let p1 = ClaimDistribution::pareto(1.0, 1.0).unwrap();
        assert!(close(p1.quantile(0.5).unwrap(), 2.0, 1e-15));
        let e = ClaimDistribution::exponential(1.0).unwrap();
        assert!(close(e.quantile(1.0 - (-1.0f64).exp()).unwrap(), 1.0, 1e-15));
        let ln = ClaimDistribution::lognormal(0.0, 1.0).unwrap();
        assert_eq!(ln.quantile(0.5).unwrap(), 1.0);
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        let p = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(p.quantile(bad).is_err(), "p = {bad}");
        }
    }

    #[test]
    fn constructor_validation() {
        assert!(ClaimDistribution::pareto(0.0, 1.0).is_err());
        assert!(ClaimDistribution::weibull(1.0, 1.0).is_err());
        assert!(ClaimDistribution::weibull(0.5, -1.0).is_err());
        assert!(ClaimDistribution::lognormal(f64::NAN, 1.0).is_err());
        assert!(ClaimDistribution::exponential(0.0).is_err());
        assert!(ClaimDistribution::from_kind("gamma", &[1.0]).is_err());
        assert!(ClaimDistribution::from_kind("pareto", &[1.0]).is_err());
        assert_eq!(
            ClaimDistribution::from_kind("Pareto", &[1.5, 2.0]).unwrap(),
            ClaimDistribution::Pareto { alpha: 1.5, xm: 2.0 }
        );
    }

    #[test]
    fn class_tags() {
        assert_eq!(ClaimDistribution::pareto(1.5, 1.0).unwrap().class_tag(), ClassTag::Subexponential);
        assert_eq!(ClaimDistribution::weibull(0.5, 1.0).unwrap().class_tag(), ClassTag::Subexponential);
        assert_eq!(ClaimDistribution::lognormal(0.0, 1.0).unwrap().class_tag(), ClassTag::Subexponential);
        assert_eq!(ClaimDistribution::exponential(1.0).unwrap().class_tag(), ClassTag::Light);
    }

    #[test]
    fn quantile_inverts_tail_on_support() {
        let dists = [
            ClaimDistribution::pareto(1.5, 1.0).unwrap(),
            ClaimDistribution::weibull(0.5, 2.0).unwrap(),
            ClaimDistribution::lognormal(0.3, 0.8).unwrap(),
            ClaimDistribution::exponential(0.7).unwrap(),
        ];
        for d in dists {
            for i in 1..50 {
                let p = i as f64 / 50.0;
                let x = d.quantile(p).unwrap();
                let back = d.quantile(1.0 - d.tail(x)).unwrap();
                assert!(close(back, x, 1e-12), "{d}: x={x} back={back}");
            }
        }
    }

    #[test]
    fn inverse_consistency_grid() {
        let dists = [
            ClaimDistribution::pareto(2.5, 3.0).unwrap(),
            ClaimDistribution::weibull(0.3, 1.0).unwrap(),
            ClaimDistribution::lognormal(-1.0, 2.0).unwrap(),
            ClaimDistribution::exponential(4.0).unwrap(),
        ];
        for d in dists {
            for i in 0..=998 {
                let p = 0.001 + i as f64 * 0.001;
                let q = d.quantile(p).unwrap();
                assert!((d.tail(q) - (1.0 - p)).abs() <= 1e-10, "{d} p={p}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = ClaimDistribution::lognormal(0.0, 1.0).unwrap();
        let a = d.sample(&mut stream(11, 0));
        let b = d.sample(&mut stream(11, 0));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pareto_sample_mean() {
        // alpha = 2 has infinite variance; the standard error is estimated
        // from the sample itself, as the acceptance tolerance prescribes.
        let d = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        let mut rng = stream(2024, 0);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = d.sample(&mut rng);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn weibull_empirical_tail() {
        let d = ClaimDistribution::weibull(0.5, 1.0).unwrap();
        let mut rng = stream(99, 1);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) > 4.0).count();
        let p = (-2.0f64).exp();
        let p_hat = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p_hat - p).abs() < 3.0 * se, "p_hat {p_hat}");
    }

    /// Kolmogorov-Smirnov distance of 10^5 draws against the closed-form CDF,
    /// compared with the asymptotic 1% critical value 1.6276 / sqrt(n).
    #[test]
    fn ks_distance_below_critical_value() {
        let n = 100_000;
        let crit = 1.627_6 / (n as f64).sqrt();
        let dists = [
            ClaimDistribution::pareto(1.5, 1.0).unwrap(),
            ClaimDistribution::weibull(0.5, 1.0).unwrap(),
            ClaimDistribution::lognormal(0.0, 1.0).unwrap(),
            ClaimDistribution::exponential(2.0).unwrap(),
        ];
        for (k, d) in dists.iter().enumerate() {
            let mut rng = stream(5, k as u64);
            let mut xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            xs.sort_by(f64::total_cmp);
            let mut dmax: f64 = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let f = d.cdf(x);
                dmax = dmax.max((i as f64 + 1.0) / n as f64 - f).max(f - i as f64 / n as f64);
            }
            assert!(dmax < crit, "{d}: D = {dmax} >= {crit}");
        }
    }

    #[test]
    fn mixture_examples() {
        // Two Pareto laws with tails 0.2 and 0.1 at the same point.
        let a = ClaimDistribution::pareto(1.0, 0.2).unwrap();
        let b = ClaimDistribution::pareto(1.0, 0.1).unwrap();
        let m = mixture_tail(&a, &b, 1.0, 1.0, 1.0).unwrap();
        assert!(close(m, 0.15, 1e-15));

        let m = mixture_tail(&a, &b, 1.0, 1e-12, 1.0).unwrap();
        assert!(close(m, 0.2, 1e-11));

        // tail1(800) = 320 / 800 = 0.4, tail2(800) = exp(-800) underflows to 0.
        let c = ClaimDistribution::pareto(1.0, 320.0).unwrap();
        let light = ClaimDistribution::exponential(1.0).unwrap();
        assert_eq!(light.tail(800.0), 0.0);
        let m = mixture_tail(&c, &light, 1.0, 3.0, 800.0).unwrap();
        assert!(close(m, 0.1, 1e-15));

        assert!(mixture_tail(&a, &b, 0.0, 1.0, 1.0).is_err());
        assert!(mixture_tail(&a, &b, 1.0, -1.0, 1.0).is_err());
    }

    fn any_dist() -> impl Strategy<Value = ClaimDistribution> {
        prop_oneof![
            (0.2f64..5.0, 0.1f64..10.0).prop_map(|(a, m)| ClaimDistribution::pareto(a, m).unwrap()),
            (0.1f64..0.99, 0.1f64..10.0).prop_map(|(k, s)| ClaimDistribution::weibull(k, s).unwrap()),
            (-2.0f64..2.0, 0.1f64..3.0).prop_map(|(m, s)| ClaimDistribution::lognormal(m, s).unwrap()),
            (0.05f64..5.0).prop_map(|r| ClaimDistribution::exponential(r).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn tail_is_monotone_probability(d in any_dist(), x1 in -5.0f64..200.0, dx in 0.0f64..200.0) {
            let (t1, t2) = (d.tail(x1), d.tail(x1 + dx));
            prop_assert!((0.0..=1.0).contains(&t1));
            prop_assert!((0.0..=1.0).contains(&t2));
            prop_assert!(t1 >= t2);
            if x1 < d.support_min() {
                prop_assert_eq!(t1, 1.0);
            }
        }

        #[test]
        fn mixture_is_between_components(
            a in any_dist(), b in any_dist(),
            l1 in 0.01f64..10.0, l2 in 0.01f64..10.0, x in 0.0f64..50.0,
        ) {
            let m = mixture_tail(&a, &b, l1, l2, x).unwrap();
            let (ta, tb) = (a.tail(x), b.tail(x));
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(m >= ta.min(tb) - 1e-15 && m <= ta.max(tb) + 1e-15);
        }
    }
}
