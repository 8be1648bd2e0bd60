//! Self-check suite run by `biruin verify`.

use std::fmt;

use crate::asymptotics::{tail_integral, tail_integral_quadrature};
use crate::config::RunConfig;
use crate::error::Result;
use crate::heavy_tails::ClaimDistribution;
use crate::mc_engine::{dependence_probe, estimate_ruin_with, sum_reduction_probe, McOptions, ProbeMode, ProbeSpec};
use crate::quadrature::composite_simpson;
use crate::risk_process::PathSimulator;
use crate::rng::stream;
use crate::ruin_detect::detect;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Runs every check on `config`. Numerical failures abort with an error;
/// statistical or structural violations are reported as failed checks.
pub fn run_suite(config: &RunConfig) -> Result<Vec<Check>> {
    let model = &config.model;
    let vs = &config.verify;
    let mut out = Vec::new();

    let opts = McOptions { n_paths: vs.n_paths, ..config.mc.clone() };
    let est = estimate_ruin_with(model, &opts)?;
    let c = est.counts;
    out.push(check(
        "pathwise_identities",
        c.identities_hold(),
        format!(
            "n={} max={} and={} min={} sum={} comp1={} comp2={}",
            c.n, c.max, c.and, c.min, c.sum, c.comp1, c.comp2
        ),
    ));

    let n_bridge = vs.n_paths.min(10_000);
    let mut sim = PathSimulator::new(model)?;
    let mut path = sim.new_path();
    let mut rng = stream(config.mc.seed, u64::MAX);
    let mut violations = 0u64;
    for _ in 0..n_bridge {
        sim.simulate_into(&mut rng, &mut path);
        let off = detect(&path, false, &mut rng);
        let on = detect(&path, true, &mut rng);
        let pairs = [
            (off.ruin1(), on.ruin1()),
            (off.ruin2(), on.ruin2()),
            (off.ruin_min(), on.ruin_min()),
            (off.ruin_max(), on.ruin_max()),
            (off.ruin_sum(), on.ruin_sum()),
            (off.ruin_and(), on.ruin_and()),
        ];
        violations += pairs.iter().any(|&(a, b)| a && !b) as u64;
    }
    out.push(check(
        "bridge_dominance",
        violations == 0,
        format!("{violations} of {n_bridge} paths flagged without bridge but not with it"),
    ));

    let r_disc = if model.r > 0.0 { model.r } else { 0.5 };
    for mode in [ProbeMode::Sup, ProbeMode::Inf, ProbeMode::DiscountedSup, ProbeMode::DiscountedInf] {
        let spec = ProbeSpec {
            steps: vs.probe_steps,
            workers: config.mc.workers,
            ..ProbeSpec::new(model.rho, 1.0, 1.0, 1.0, vs.probe_n, config.mc.seed, mode, r_disc)
        };
        let rec = dependence_probe(&spec)?;
        let (excess, se) = (rec.excess(), rec.joint.std_error());
        let passed = if model.rho > 0.0 {
            excess >= -3.0 * se
        } else if model.rho < 0.0 {
            excess <= 3.0 * se
        } else {
            excess.abs() <= 3.0 * se
        };
        out.push(check(
            &format!("dependence_{}", mode.as_str()),
            passed,
            format!(
                "rho={} joint={:.6} product={:.6} se={:.2e}",
                model.rho,
                rec.joint.p_hat,
                rec.marg1.p_hat * rec.marg2.p_hat,
                se
            ),
        ));
    }

    let sr = sum_reduction_probe(
        model.sigma1,
        model.sigma2,
        model.rho,
        model.r,
        model.horizon,
        vs.n_paths.max(2),
        config.mc.seed,
    )?;
    out.push(check(
        "sum_reduction",
        sr.z_score.abs() < 3.0,
        format!("sample_var={:.6e} theory_var={:.6e} z={:.3}", sr.sample_var, sr.theory_var, sr.z_score),
    ));

    let mut worst = 0.0f64;
    for alpha in [0.5, 1.5, 3.0] {
        let d = ClaimDistribution::pareto(alpha, 1.0)?;
        for u in [1.0, 10.0, 1000.0] {
            let closed = tail_integral(&d, u, 0.05, 2.0)?;
            let quad = tail_integral_quadrature(&d, u, 0.05, 2.0)?;
            worst = worst.max(((closed - quad) / closed).abs());
        }
    }
    out.push(check("quadrature_pareto_closed_form", worst <= 1e-10, format!("max relative gap {worst:.3e}")));

    let r = if model.r > 0.0 { model.r } else { 0.05 };
    let mut worst = 0.0f64;
    for (d, u) in [(&model.dist1, model.u1), (&model.dist2, model.u2)] {
        let u = u.max(1e-3);
        let quad = tail_integral_quadrature(d, u, r, model.horizon)?;
        let rt = r * model.horizon;
        let simpson = rt * composite_simpson(&|z: f64| d.tail(u * (rt * z).exp()), 0.0, 1.0, 20_000);
        if quad > 0.0 {
            worst = worst.max(((quad - simpson) / quad).abs());
        }
    }
    out.push(check("quadrature_model_tails", worst <= 1e-6, format!("max relative gap {worst:.3e}")));

    Ok(out)
}
