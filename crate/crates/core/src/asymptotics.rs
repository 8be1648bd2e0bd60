//! Large-capital approximations of the finite-time ruin probabilities.
//!
//! Four model families are covered, indexed by whether the two lines share
//! one claim arrival process (`common_shock`) and whether interest is
//! earned (`r > 0`). With interest, every formula is built from the tail
//! integral
//!
//! ```text
//! I(u) = int_u^{u e^{rT}} F(y) / y dy,      F = claim survival function,
//! ```
//!
//! and as `r -> 0` each formula reduces to its `r = 0` counterpart through
//! `I(u) ~ r T F(u)`.

use std::fmt;

use log::warn;

use crate::error::{Error, Result};
use crate::heavy_tails::{ClaimDistribution, ClassTag};
use crate::quadrature::{self, DEFAULT_MAX_DEPTH, DEFAULT_REL_TOL};
use crate::risk_process::ModelConfig;

/// Which formula produced an [`AsymptoticResult`].
///
/// `T31..T34` are the four model families (common shock without / with
/// interest, independent arrivals without / with interest); `L43_uni` and
/// `L44_uni` are the single-line approximations without / with interest.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    T31a_max,
    T31a_min,
    T31b_sum,
    T32a_max,
    T32a_min,
    T32b_sum,
    T33a_max,
    T33a_min,
    T33b_sum,
    T34a_max,
    T34a_min,
    T34b_sum,
    L43_uni,
    L44_uni,
    and_upper,
}

impl CaseId {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::T31a_max => "T31a_max",
            CaseId::T31a_min => "T31a_min",
            CaseId::T31b_sum => "T31b_sum",
            CaseId::T32a_max => "T32a_max",
            CaseId::T32a_min => "T32a_min",
            CaseId::T32b_sum => "T32b_sum",
            CaseId::T33a_max => "T33a_max",
            CaseId::T33a_min => "T33a_min",
            CaseId::T33b_sum => "T33b_sum",
            CaseId::T34a_max => "T34a_max",
            CaseId::T34a_min => "T34a_min",
            CaseId::T34b_sum => "T34b_sum",
            CaseId::L43_uni => "L43_uni",
            CaseId::L44_uni => "L44_uni",
            CaseId::and_upper => "and_upper",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An evaluated approximation together with the inputs it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticResult {
    pub value: f64,
    pub case_id: CaseId,
    pub u1: f64,
    pub u2: f64,
    /// Hypotheses of the approximation that the inputs violate.
    pub warnings: Vec<String>,
}

impl AsymptoticResult {
    /// Approximations are not probabilities; values above one mean the
    /// capital is far too small for the asymptotic regime.
    pub fn warn_gt_one(&self) -> bool {
        self.value > 1.0
    }
}

/// `int_u^{u e^{rT}} F(y) / y dy` for the survival function of `dist`.
///
/// Evaluated as `r T int_0^1 F(u e^{rTz}) dz` by adaptive Simpson; Pareto
/// laws with `u >= xm` use the closed form.
pub fn tail_integral(dist: &ClaimDistribution, u: f64, r: f64, horizon: f64) -> Result<f64> {
    if let ClaimDistribution::Pareto { alpha, xm } = *dist {
        if u >= xm {
            check_tail_integral_args(u, r, horizon)?;
            return Ok(pareto_tail_integral(alpha, xm, u, r, horizon));
        }
    }
    tail_integral_quadrature(dist, u, r, horizon)
}

fn check_tail_integral_args(u: f64, r: f64, horizon: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("tail integral needs r > 0, got {r}")));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::param("u", format!("must be > 0, got {u}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::param("T", format!("must be >= 0, got {horizon}")));
    }
    Ok(())
}

/// `(xm^a / a) (u^-a - (u e^{rT})^-a)` written to stay accurate for small `rT`.
fn pareto_tail_integral(alpha: f64, xm: f64, u: f64, r: f64, horizon: f64) -> f64 {
    (xm / u).powf(alpha) * -(-alpha * r * horizon).exp_m1() / alpha
}

/// Tail integral by quadrature only, whatever the law. Splits the range at
/// the left end of the support, where the integrand has a kink.
pub fn tail_integral_quadrature(dist: &ClaimDistribution, u: f64, r: f64, horizon: f64) -> Result<f64> {
    check_tail_integral_args(u, r, horizon)?;
    let rt = r * horizon;
    if rt == 0.0 {
        return Ok(0.0);
    }
    let f = |z: f64| dist.tail(u * (rt * z).exp());
    let kink = dist.support_min();
    let z_kink = if kink > u { (kink / u).ln() / rt } else { 0.0 };
    let value = if z_kink > 0.0 && z_kink < 1.0 {
        quadrature::integrate(f, 0.0, z_kink, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH)?
            + quadrature::integrate(f, z_kink, 1.0, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH)?
    } else {
        quadrature::integrate(f, 0.0, 1.0, DEFAULT_REL_TOL, DEFAULT_MAX_DEPTH)?
    };
    Ok(rt * value)
}

fn class_warnings(dists: &[&ClaimDistribution]) -> Vec<String> {
    dists
        .iter()
        .filter(|d| d.class_tag() == ClassTag::Light)
        .map(|d| format!("claim law {d} is light-tailed; the approximation assumes subexponential claims"))
        .collect()
}

fn rho_warning(model: &ModelConfig) -> Option<String> {
    (!(model.rho > -1.0 && model.rho <= 0.0))
        .then(|| format!("rho = {} lies outside (-1, 0], where the two-line approximations are established", model.rho))
}

fn finish(value: f64, case_id: CaseId, u1: f64, u2: f64, mut warnings: Vec<String>) -> AsymptoticResult {
    if value > 1.0 {
        warnings.push(format!("{case_id} evaluates to {value} > 1; capital is outside the asymptotic regime"));
    }
    for w in &warnings {
        warn!("{w}");
    }
    AsymptoticResult { value, case_id, u1, u2, warnings }
}

fn check_capital(name: &str, u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {u}")))
    }
}

/// Single-line approximation: `lambda T F(u)` without interest,
/// `(lambda / r) I(u)` with interest.
pub fn psi_uni_asym(lambda: f64, dist: &ClaimDistribution, u: f64, r: f64, horizon: f64) -> Result<AsymptoticResult> {
    check_capital("u", u)?;
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("must be >= 0, got {r}")));
    }
    let (value, case) = if r == 0.0 {
        (lambda * horizon * dist.tail(u), CaseId::L43_uni)
    } else {
        (lambda / r * tail_integral(dist, u, r, horizon)?, CaseId::L44_uni)
    };
    Ok(finish(value, case, u, 0.0, class_warnings(&[dist])))
}

/// Simultaneous ruin of both lines.
pub fn psi_max_asym(model: &ModelConfig, u1: f64, u2: f64) -> Result<AsymptoticResult> {
    check_capital("u1", u1)?;
    check_capital("u2", u2)?;
    let (r, t) = (model.r, model.horizon);
    let (d1, d2) = (&model.dist1, &model.dist2);
    let (value, case) = match (model.common_shock, r == 0.0) {
        (true, true) => {
            let lt = model.lambda1 * t;
            (lt * (1.0 + lt) * d1.tail(u1) * d2.tail(u2), CaseId::T31a_max)
        }
        (true, false) => {
            let l = model.lambda1;
            let i1 = tail_integral(d1, u1, r, t)?;
            let i2 = tail_integral(d2, u2, r, t)?;
            (l * (l + 1.0 / t) / (r * r) * i1 * i2, CaseId::T32a_max)
        }
        (false, true) => (model.lambda1 * model.lambda2 * t * t * d1.tail(u1) * d2.tail(u2), CaseId::T33a_max),
        (false, false) => {
            let i1 = tail_integral(d1, u1, r, t)?;
            let i2 = tail_integral(d2, u2, r, t)?;
            (model.lambda1 * model.lambda2 / (r * r) * i1 * i2, CaseId::T34a_max)
        }
    };
    let mut warnings: Vec<String> = rho_warning(model).into_iter().collect();
    warnings.extend(class_warnings(&[d1, d2]));
    Ok(finish(value, case, u1, u2, warnings))
}

/// Ruin of at least one line.
pub fn psi_min_asym(model: &ModelConfig, u1: f64, u2: f64) -> Result<AsymptoticResult> {
    check_capital("u1", u1)?;
    check_capital("u2", u2)?;
    let (r, t) = (model.r, model.horizon);
    let (d1, d2) = (&model.dist1, &model.dist2);
    let (value, case) = match (model.common_shock, r == 0.0) {
        (true, true) => (model.lambda1 * t * (d1.tail(u1) + d2.tail(u2)), CaseId::T31a_min),
        (true, false) => {
            let i1 = tail_integral(d1, u1, r, t)?;
            let i2 = tail_integral(d2, u2, r, t)?;
            (model.lambda1 / r * (i1 + i2), CaseId::T32a_min)
        }
        (false, true) => (t * (model.lambda1 * d1.tail(u1) + model.lambda2 * d2.tail(u2)), CaseId::T33a_min),
        (false, false) => {
            let i1 = tail_integral(d1, u1, r, t)?;
            let i2 = tail_integral(d2, u2, r, t)?;
            ((model.lambda1 * i1 + model.lambda2 * i2) / r, CaseId::T34a_min)
        }
    };
    let mut warnings: Vec<String> = rho_warning(model).into_iter().collect();
    warnings.extend(class_warnings(&[d1, d2]));
    Ok(finish(value, case, u1, u2, warnings))
}

/// Ruin of the aggregate `V_1 + V_2`, evaluated at `s = u1 + u2`.
///
/// Under a common shock with interest the convolution tail is replaced by
/// the sum of the marginal tails, which is valid when both tails are
/// proportional to a common subexponential tail.
pub fn psi_sum_asym(model: &ModelConfig, u1: f64, u2: f64) -> Result<AsymptoticResult> {
    let s = u1 + u2;
    check_capital("u1 + u2", s)?;
    let (r, t) = (model.r, model.horizon);
    let (d1, d2) = (&model.dist1, &model.dist2);
    let (value, case) = match (model.common_shock, r == 0.0) {
        (true, true) => (model.lambda1 * t * (d1.tail(s) + d2.tail(s)), CaseId::T31b_sum),
        (true, false) => {
            let i1 = tail_integral(d1, s, r, t)?;
            let i2 = tail_integral(d2, s, r, t)?;
            (model.lambda1 / r * (i1 + i2), CaseId::T32b_sum)
        }
        (false, true) => (t * (model.lambda1 * d1.tail(s) + model.lambda2 * d2.tail(s)), CaseId::T33b_sum),
        (false, false) => {
            let i1 = tail_integral(d1, s, r, t)?;
            let i2 = tail_integral(d2, s, r, t)?;
            ((model.lambda1 * i1 + model.lambda2 * i2) / r, CaseId::T34b_sum)
        }
    };
    let mut warnings: Vec<String> = rho_warning(model).into_iter().collect();
    warnings.extend(class_warnings(&[d1, d2]));
    Ok(finish(value, case, u1, u2, warnings))
}

/// Order bound for the non-simultaneous ruin of both lines.
///
/// No exact approximation of `psi_and` is available; this returns the
/// simultaneous-ruin approximation, which bounds it to first order, under
/// its own case label. Together with `psi_min + psi_and = psi_1 + psi_2`
/// that is all the information there is.
pub fn psi_and_upper(model: &ModelConfig, u1: f64, u2: f64) -> Result<AsymptoticResult> {
    let mut res = psi_max_asym(model, u1, u2)?;
    res.case_id = CaseId::and_upper;
    Ok(res)
}

/// Single-line approximation for line `line` (1 or 2) of `model`.
pub fn psi_line_asym(model: &ModelConfig, line: usize, u: f64) -> Result<AsymptoticResult> {
    let (lambda, dist) = match line {
        1 => (model.lambda1, &model.dist1),
        2 => (model.lambda2_effective(), &model.dist2),
        _ => return Err(Error::param("line", format!("must be 1 or 2, got {line}"))),
    };
    psi_uni_asym(lambda, dist, u, model.r, model.horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Pareto with `xm = 1` whose tail at `u` equals `p`.
    fn pareto_with_tail(alpha: f64, u: f64, p: f64) -> ClaimDistribution {
        // (xm / u)^alpha = p  =>  xm = u p^(1/alpha)
        ClaimDistribution::pareto(alpha, u * p.powf(1.0 / alpha)).unwrap()
    }

    /// Composite Simpson on `F(y) / y` over `[a, b]` in log space, 20000
    /// panels: an oracle that shares nothing with the adaptive code path.
    fn oracle_tail_integral(dist: &ClaimDistribution, u: f64, r: f64, t: f64) -> f64 {
        let n = 20_000;
        let (la, lb) = (u.ln(), u.ln() + r * t);
        let h = (lb - la) / n as f64;
        let g = |x: f64| dist.tail(x.exp());
        let mut acc = g(la) + g(lb);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(la + h * i as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn pareto_example_value() {
        let d = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        let closed = tail_integral(&d, 10.0, 0.05, 1.0).unwrap();
        let literal = 0.5 * (1e-2 - (10.0 * 0.05f64.exp()).powi(-2));
        assert!(rel(closed, literal) < 1e-13);
        assert!(rel(closed, 4.7582e-4) < 1e-4, "{closed}");
        let quad = tail_integral_quadrature(&d, 10.0, 0.05, 1.0).unwrap();
        assert!(rel(quad, closed) < 1e-10);
        assert!(rel(oracle_tail_integral(&d, 10.0, 0.05, 1.0), closed) < 1e-12);
    }

    #[test]
    fn empty_range_is_zero() {
        let d = ClaimDistribution::weibull(0.5, 1.0).unwrap();
        assert_eq!(tail_integral(&d, 3.0, 0.1, 0.0).unwrap(), 0.0);
        let p = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        assert_eq!(tail_integral(&p, 3.0, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tail_integral_rejects_zero_rate() {
        let d = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        assert!(tail_integral(&d, 3.0, 0.0, 1.0).is_err());
        assert!(tail_integral(&d, 0.0, 0.1, 1.0).is_err());
        let w = ClaimDistribution::weibull(0.5, 1.0).unwrap();
        assert!(tail_integral(&w, 3.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn tail_integral_monotone_bounds() {
        let dists = [
            ClaimDistribution::pareto(1.5, 2.0).unwrap(),
            ClaimDistribution::weibull(0.4, 1.0).unwrap(),
            ClaimDistribution::lognormal(0.5, 1.2).unwrap(),
            ClaimDistribution::exponential(0.3).unwrap(),
        ];
        for d in dists {
            for &(u, r, t) in &[(0.5, 0.1, 2.0), (5.0, 0.05, 1.0), (40.0, 0.5, 3.0)] {
                let v = tail_integral(&d, u, r, t).unwrap();
                let hi = d.tail(u) * r * t;
                let lo = d.tail(u * (r * t).exp()) * r * t;
                assert!(v <= hi * (1.0 + 1e-12) && v >= lo * (1.0 - 1e-12), "{d} u={u}");
            }
        }
    }

    #[test]
    fn tail_integral_matches_oracle_for_other_laws() {
        let dists = [
            ClaimDistribution::pareto(1.5, 2.0).unwrap(), // u < xm: kinked integrand
            ClaimDistribution::weibull(0.4, 1.0).unwrap(),
            ClaimDistribution::lognormal(0.5, 1.2).unwrap(),
            ClaimDistribution::exponential(0.3).unwrap(),
        ];
        for d in dists {
            for &(u, r, t) in &[(1.0, 0.2, 2.0), (5.0, 0.05, 1.0), (25.0, 0.5, 3.0)] {
                let v = tail_integral(&d, u, r, t).unwrap();
                let o = oracle_tail_integral(&d, u, r, t);
                let tol = if matches!(d, ClaimDistribution::Pareto { .. }) { 1e-7 } else { 1e-10 };
                assert!(rel(v, o) < tol, "{d} u={u} r={r} T={t}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn uni_examples() {
        let d = pareto_with_tail(2.0, 10.0, 0.01);
        let res = psi_uni_asym(1.0, &d, 10.0, 0.0, 2.0).unwrap();
        assert_eq!(res.case_id, CaseId::L43_uni);
        assert!(rel(res.value, 0.02) < 1e-12);

        let p = ClaimDistribution::pareto(2.0, 1.0).unwrap();
        let res = psi_uni_asym(0.5, &p, 10.0, 0.05, 1.0).unwrap();
        assert_eq!(res.case_id, CaseId::L44_uni);
        let oracle = 0.5 / 0.05 * oracle_tail_integral(&p, 10.0, 0.05, 1.0);
        assert!(rel(res.value, oracle) < 1e-10);
        assert!(rel(res.value, 4.7582e-3) < 1e-4);
    }

    #[test]
    fn uni_small_rate_continuity() {
        let dists = [
            ClaimDistribution::pareto(1.5, 1.0).unwrap(),
            ClaimDistribution::weibull(0.5, 1.0).unwrap(),
            ClaimDistribution::lognormal(0.0, 1.0).unwrap(),
        ];
        for d in dists {
            let at_zero = psi_uni_asym(1.3, &d, 7.0, 0.0, 2.0).unwrap().value;
            let near = psi_uni_asym(1.3, &d, 7.0, 1e-6, 2.0).unwrap().value;
            assert!(rel(near, at_zero) < 1e-3, "{d}");
        }
    }

    fn model(common: bool, r: f64, d1: ClaimDistribution, d2: ClaimDistribution) -> ModelConfig {
        ModelConfig { common_shock: common, r, dist1: d1, dist2: d2, ..Default::default() }
    }

    #[test]
    fn max_examples() {
        let d = pareto_with_tail(1.5, 10.0, 0.1);
        let m = ModelConfig { lambda1: 1.0, horizon: 1.0, ..model(true, 0.0, d, d) };
        let res = psi_max_asym(&m, 10.0, 10.0).unwrap();
        assert_eq!(res.case_id, CaseId::T31a_max);
        assert!(rel(res.value, 0.02) < 1e-12);

        let m = ModelConfig { lambda1: 2.0, lambda2: 3.0, horizon: 1.0, ..model(false, 0.0, d, d) };
        let res = psi_max_asym(&m, 10.0, 10.0).unwrap();
        assert_eq!(res.case_id, CaseId::T33a_max);
        assert!(rel(res.value, 0.06) < 1e-12);

        let (d1, d2) = (ClaimDistribution::pareto(1.5, 1.0).unwrap(), ClaimDistribution::lognormal(0.0, 1.0).unwrap());
        let m = ModelConfig { lambda1: 2.0, lambda2: 3.0, horizon: 1.5, ..model(false, 0.04, d1, d2) };
        let res = psi_max_asym(&m, 12.0, 9.0).unwrap();
        assert_eq!(res.case_id, CaseId::T34a_max);
        let i1 = oracle_tail_integral(&d1, 12.0, 0.04, 1.5);
        let i2 = oracle_tail_integral(&d2, 9.0, 0.04, 1.5);
        assert!(rel(res.value, 6.0 / (0.04 * 0.04) * i1 * i2) < 1e-9);

        let m = ModelConfig { lambda1: 2.0, horizon: 1.5, ..model(true, 0.04, d1, d2) };
        let res = psi_max_asym(&m, 12.0, 9.0).unwrap();
        assert_eq!(res.case_id, CaseId::T32a_max);
        let expected = 2.0 * (2.0 + 1.0 / 1.5) / (0.04 * 0.04) * i1 * i2;
        assert!(rel(res.value, expected) < 1e-9);
    }

    #[test]
    fn min_examples() {
        let d1 = pareto_with_tail(1.5, 10.0, 0.01);
        let d2 = pareto_with_tail(1.5, 10.0, 0.02);
        let m = ModelConfig { lambda1: 1.0, horizon: 1.0, ..model(true, 0.0, d1, d2) };
        let res = psi_min_asym(&m, 10.0, 10.0).unwrap();
        assert_eq!(res.case_id, CaseId::T31a_min);
        assert!(rel(res.value, 0.03) < 1e-12);

        let m = ModelConfig { lambda1: 2.0, lambda2: 1.0, horizon: 0.5, ..model(false, 0.0, d1, d2) };
        let res = psi_min_asym(&m, 10.0, 10.0).unwrap();
        assert_eq!(res.case_id, CaseId::T33a_min);
        assert!(rel(res.value, 0.02) < 1e-12);

        let (a, b) = (ClaimDistribution::weibull(0.5, 1.0).unwrap(), ClaimDistribution::pareto(2.5, 1.0).unwrap());
        let m = ModelConfig { lambda1: 0.7, lambda2: 1.9, horizon: 2.0, ..model(false, 0.1, a, b) };
        let res = psi_min_asym(&m, 6.0, 8.0).unwrap();
        assert_eq!(res.case_id, CaseId::T34a_min);
        let expected =
            (0.7 * oracle_tail_integral(&a, 6.0, 0.1, 2.0) + 1.9 * oracle_tail_integral(&b, 8.0, 0.1, 2.0)) / 0.1;
        assert!(rel(res.value, expected) < 1e-9);

        let m = ModelConfig { lambda1: 0.7, horizon: 2.0, ..model(true, 0.1, a, b) };
        let res = psi_min_asym(&m, 6.0, 8.0).unwrap();
        assert_eq!(res.case_id, CaseId::T32a_min);
        let expected = 0.7 * (oracle_tail_integral(&a, 6.0, 0.1, 2.0) + oracle_tail_integral(&b, 8.0, 0.1, 2.0)) / 0.1;
        assert!(rel(res.value, expected) < 1e-9);
    }

    #[test]
    fn sum_examples() {
        let s = 20.0;
        let d = pareto_with_tail(1.5, s, 0.05);
        let m = ModelConfig { lambda1: 1.0, horizon: 1.0, ..model(true, 0.0, d, d) };
        let res = psi_sum_asym(&m, 12.0, 8.0).unwrap();
        assert_eq!(res.case_id, CaseId::T31b_sum);
        assert!(rel(res.value, 0.1) < 1e-12);

        let (d1, d2) = (pareto_with_tail(1.5, s, 0.03), pareto_with_tail(1.5, s, 0.01));
        let m = ModelConfig { lambda1: 1.0, lambda2: 2.0, horizon: 1.0, ..model(false, 0.0, d1, d2) };
        let res = psi_sum_asym(&m, 12.0, 8.0).unwrap();
        assert_eq!(res.case_id, CaseId::T33b_sum);
        assert!(rel(res.value, 0.05) < 1e-12);
    }

    /// The common-shock sum formula with interest, written as
    /// `lambda T int_0^1 (F1 + F2)(s e^{rTz}) dz` and integrated directly in
    /// `z`, agrees with the tail-integral form.
    #[test]
    fn sum_common_shock_direct_form() {
        let (d1, d2) = (ClaimDistribution::pareto(1.5, 1.0).unwrap(), ClaimDistribution::pareto(1.5, 2.0).unwrap());
        let (lambda, r, t, s) = (1.4, 0.08, 2.0, 15.0);
        let m = ModelConfig { lambda1: lambda, horizon: t, ..model(true, r, d1, d2) };
        let res = psi_sum_asym(&m, 9.0, 6.0).unwrap();
        assert_eq!(res.case_id, CaseId::T32b_sum);
        let n = 20_000;
        let h = 1.0 / n as f64;
        let g = |z: f64| d1.tail(s * (r * t * z).exp()) + d2.tail(s * (r * t * z).exp());
        let mut acc = g(0.0) + g(1.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(h * i as f64);
        }
        let direct = lambda * t * acc * h / 3.0;
        assert!(rel(res.value, direct) < 1e-12, "{} vs {direct}", res.value);
    }

    #[test]
    fn independent_sum_with_equal_rates_matches_common_shock_form() {
        let (d1, d2) = (ClaimDistribution::lognormal(0.2, 1.0).unwrap(), ClaimDistribution::weibull(0.5, 2.0).unwrap());
        for r in [0.01, 0.1, 0.7] {
            let common = ModelConfig { lambda1: 1.7, horizon: 1.3, ..model(true, r, d1, d2) };
            let indep = ModelConfig { lambda2: 1.7, common_shock: false, ..common.clone() };
            let a = psi_sum_asym(&common, 5.0, 7.0).unwrap().value;
            let b = psi_sum_asym(&indep, 5.0, 7.0).unwrap().value;
            assert!(rel(a, b) < 1e-10);
        }
    }

    #[test]
    fn and_upper_is_max() {
        let d = ClaimDistribution::pareto(1.5, 1.0).unwrap();
        for (common, r) in [(true, 0.0), (true, 0.05), (false, 0.0), (false, 0.05)] {
            let m = model(common, r, d, d);
            let a = psi_and_upper(&m, 8.0, 11.0).unwrap();
            let b = psi_max_asym(&m, 8.0, 11.0).unwrap();
            assert_eq!(a.case_id, CaseId::and_upper);
            assert_eq!(a.value, b.value);
            assert!(a.value >= 0.0);
        }
    }

    #[test]
    fn small_rate_continuity_all_families() {
        let d1 = ClaimDistribution::pareto(1.5, 1.0).unwrap();
        let d2 = ClaimDistribution::weibull(0.5, 1.0).unwrap();
        for common in [true, false] {
            let m0 = ModelConfig { lambda1: 1.2, lambda2: 0.8, horizon: 1.5, ..model(common, 0.0, d1, d2) };
            let m1 = ModelConfig { r: 1e-6, ..m0.clone() };
            for f in [psi_max_asym, psi_min_asym, psi_sum_asym] {
                let a = f(&m0, 9.0, 13.0).unwrap().value;
                let b = f(&m1, 9.0, 13.0).unwrap().value;
                assert!(rel(b, a) < 1e-3, "common={common}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hypothesis_warnings() {
        let d = ClaimDistribution::pareto(1.5, 1.0).unwrap();
        let m = ModelConfig { rho: 0.5, ..model(true, 0.0, d, d) };
        assert!(!psi_max_asym(&m, 10.0, 10.0).unwrap().warnings.is_empty());
        let m = ModelConfig { rho: -0.5, ..model(true, 0.0, d, d) };
        assert!(psi_max_asym(&m, 10.0, 10.0).unwrap().warnings.is_empty());
        let e = ClaimDistribution::exponential(1.0).unwrap();
        let m = model(true, 0.0, e, e);
        assert!(!psi_min_asym(&m, 10.0, 10.0).unwrap().warnings.is_empty());
        // Tiny capital: value above one is returned as is, flagged.
        let m = ModelConfig { lambda1: 5.0, horizon: 3.0, ..model(true, 0.0, d, d) };
        let res = psi_min_asym(&m, 0.5, 0.5).unwrap();
        assert!(res.value > 1.0 && res.warn_gt_one());
    }

    #[test]
    fn max_below_min_when_tails_are_small() {
        let d = ClaimDistribution::pareto(1.5, 1.0).unwrap();
        for common in [true, false] {
            for r in [0.0, 0.05] {
                let m = model(common, r, d, d);
                for u1 in [5.0, 10.0, 50.0] {
                    for u2 in [5.0, 20.0, 100.0] {
                        assert!(d.tail(u1) <= 0.1 && d.tail(u2) <= 0.1);
                        let max = psi_max_asym(&m, u1, u2).unwrap().value;
                        let min = psi_min_asym(&m, u1, u2).unwrap().value;
                        assert!(max <= min);
                    }
                }
            }
        }
    }
}
