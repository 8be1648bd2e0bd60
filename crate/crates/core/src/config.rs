//! Flat-key TOML configuration.
//!
//! Documents are flattened to dotted keys (`model.u1`, `claims.dist1.kind`,
//! ...), so nested tables and dotted keys are interchangeable. Every key must
//! be known; `--set key=value` overrides are applied on top of the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use toml::Value;

use crate::error::{Error, Result};
use crate::heavy_tails::ClaimDistribution;
use crate::mc_engine::{default_workers, McOptions, DEFAULT_BATCH_SIZE};
use crate::risk_process::{ModelConfig, PremiumMode};

/// Environment variable overriding `mc.workers`.
pub const WORKERS_ENV: &str = "BIRUIN_WORKERS";

const REQUIRED: &[&str] = &[
    "model.u1",
    "model.u2",
    "model.r",
    "model.rho",
    "model.sigma1",
    "model.sigma2",
    "model.lambda1",
    "model.lambda2",
    "claims.dist1.kind",
    "claims.dist1.params",
    "claims.dist2.kind",
    "claims.dist2.params",
    "sim.T",
];

const OPTIONAL: &[&str] = &[
    "model.common_shock",
    "model.c1",
    "model.c2",
    "premium.mode",
    "premium.rate1",
    "premium.rate2",
    "premium.jump1.kind",
    "premium.jump1.params",
    "premium.jump2.kind",
    "premium.jump2.params",
    "sim.h",
    "sim.bridge",
    "mc.n_paths",
    "mc.seed",
    "mc.workers",
    "mc.batch_size",
    "study.u1",
    "study.u2",
    "verify.n_paths",
    "verify.probe_n",
    "verify.probe_steps",
];

/// Sizes used by the `verify` command.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub n_paths: u64,
    pub probe_n: u64,
    pub probe_steps: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { n_paths: 20_000, probe_n: 20_000, probe_steps: 500 }
    }
}

/// Everything a run needs: the model plus Monte Carlo, study and verify
/// settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub mc: McOptions,
    pub study_grid: Vec<(f64, f64)>,
    pub verify: VerifySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        let study_grid = default_study_grid(&model);
        RunConfig { model, mc: McOptions::default(), study_grid, verify: VerifySettings::default() }
    }
}

fn default_study_grid(model: &ModelConfig) -> Vec<(f64, f64)> {
    [1.0, 2.0, 4.0, 8.0].iter().map(|k| (k * model.u1, k * model.u2)).collect()
}

fn is_known(key: &str) -> bool {
    REQUIRED.contains(&key) || OPTIONAL.contains(&key)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Splits `key=value` and parses the value as a TOML value, falling back to
/// a bare string.
pub fn parse_override(spec: &str) -> Result<(String, Value)> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| Error::config(spec, "override must have the form key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

struct Keys(BTreeMap<String, Value>);

impl Keys {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<Value> {
        self.take(key).ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn f64_of(key: &str, v: Value) -> Result<f64> {
        match v {
            Value::Float(x) => Ok(x),
            Value::Integer(i) => Ok(i as f64),
            other => Err(Error::config(key, format!("expected a number, got {other}"))),
        }
    }

    fn f64_req(&mut self, key: &str) -> Result<f64> {
        let v = self.required(key)?;
        Self::f64_of(key, v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take(key).map_or(Ok(default), |v| Self::f64_of(key, v))
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if i >= 0 => Ok(i as u64),
            Some(other) => Err(Error::config(key, format!("expected a non-negative integer, got {other}"))),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(other) => Err(Error::config(key, format!("expected true or false, got {other}"))),
        }
    }

    fn str_of(key: &str, v: Value) -> Result<String> {
        match v {
            Value::String(s) => Ok(s),
            other => Err(Error::config(key, format!("expected a string, got {other}"))),
        }
    }

    fn list_of(key: &str, v: Value) -> Result<Vec<f64>> {
        match v {
            Value::Array(items) => items.into_iter().map(|x| Self::f64_of(key, x)).collect(),
            other => Err(Error::config(key, format!("expected a list of numbers, got {other}"))),
        }
    }

    fn dist(&mut self, base: &str, required: bool) -> Result<Option<ClaimDistribution>> {
        let (kk, pk) = (format!("{base}.kind"), format!("{base}.params"));
        let (kind, params) = if required {
            (Some(self.required(&kk)?), Some(self.required(&pk)?))
        } else {
            (self.take(&kk), self.take(&pk))
        };
        match (kind, params) {
            (None, None) => Ok(None),
            (Some(k), Some(p)) => {
                let kind = Self::str_of(&kk, k)?;
                let params = Self::list_of(&pk, p)?;
                ClaimDistribution::from_kind(&kind, &params).map(Some).map_err(|e| Error::config(base, reason_of(e)))
            }
            (None, Some(_)) => Err(Error::config(kk, "missing required key")),
            (Some(_), None) => Err(Error::config(pk, "missing required key")),
        }
    }
}

fn reason_of(e: Error) -> String {
    match e {
        Error::InvalidParameter { name, reason } => format!("{name}: {reason}"),
        other => other.to_string(),
    }
}

/// Maps a model parameter name onto its config key.
fn model_key(name: &str) -> String {
    match name {
        "T" => "sim.T".into(),
        "h" => "sim.h".into(),
        n if n.starts_with("premium.") => n.into(),
        n => format!("model.{n}"),
    }
}

/// Parses a TOML document plus overrides into a validated [`RunConfig`].
///
/// Does not consult the environment; see [`apply_env`].
pub fn parse_config(text: &str, overrides: &[(String, Value)]) -> Result<RunConfig> {
    let table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);
    for (k, v) in overrides {
        flat.insert(k.clone(), v.clone());
    }
    if let Some(bad) = flat.keys().find(|k| !is_known(k)) {
        return Err(Error::config(bad.clone(), "unknown key"));
    }
    let mut keys = Keys(flat);

    let horizon = keys.f64_req("sim.T")?;
    let premium = match keys.take("premium.mode").map(|v| Keys::str_of("premium.mode", v)).transpose()? {
        None => PremiumMode::Linear,
        Some(m) if m == "linear" => PremiumMode::Linear,
        Some(m) if m == "compound_poisson" => {
            let jump1 = keys
                .dist("premium.jump1", false)?
                .ok_or_else(|| Error::config("premium.jump1.kind", "required when premium.mode = compound_poisson"))?;
            let jump2 = keys
                .dist("premium.jump2", false)?
                .ok_or_else(|| Error::config("premium.jump2.kind", "required when premium.mode = compound_poisson"))?;
            PremiumMode::CompoundPoisson {
                rate1: keys.f64_or("premium.rate1", 0.0)?,
                jump1,
                rate2: keys.f64_or("premium.rate2", 0.0)?,
                jump2,
            }
        }
        Some(m) => return Err(Error::config("premium.mode", format!("must be linear or compound_poisson, got {m:?}"))),
    };
    if matches!(premium, PremiumMode::Linear) {
        for k in ["premium.rate1", "premium.rate2", "premium.jump1.kind", "premium.jump2.kind"] {
            if keys.0.contains_key(k) {
                return Err(Error::config(k, "only valid with premium.mode = compound_poisson"));
            }
        }
    }

    let model = ModelConfig {
        u1: keys.f64_req("model.u1")?,
        u2: keys.f64_req("model.u2")?,
        r: keys.f64_req("model.r")?,
        rho: keys.f64_req("model.rho")?,
        sigma1: keys.f64_req("model.sigma1")?,
        sigma2: keys.f64_req("model.sigma2")?,
        lambda1: keys.f64_req("model.lambda1")?,
        lambda2: keys.f64_req("model.lambda2")?,
        common_shock: keys.bool_or("model.common_shock", false)?,
        c1: keys.f64_or("model.c1", 0.0)?,
        c2: keys.f64_or("model.c2", 0.0)?,
        premium,
        dist1: keys.dist("claims.dist1", true)?.expect("required"),
        dist2: keys.dist("claims.dist2", true)?.expect("required"),
        horizon,
        step: keys.f64_or("sim.h", horizon / 1000.0)?,
        bridge: keys.bool_or("sim.bridge", true)?,
    };
    model.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::config(model_key(&name), reason),
        other => other,
    })?;

    let workers = keys.u64_or("mc.workers", default_workers() as u64)?;
    let mc = McOptions {
        n_paths: keys.u64_or("mc.n_paths", 100_000)?,
        seed: keys.u64_or("mc.seed", 0)?,
        workers: workers as usize,
        batch_size: keys.u64_or("mc.batch_size", DEFAULT_BATCH_SIZE)?,
    };
    for (k, v) in [("mc.n_paths", mc.n_paths), ("mc.workers", workers), ("mc.batch_size", mc.batch_size)] {
        if v == 0 {
            return Err(Error::config(k, "must be >= 1"));
        }
    }

    let su1 = keys.take("study.u1").map(|v| Keys::list_of("study.u1", v)).transpose()?;
    let su2 = keys.take("study.u2").map(|v| Keys::list_of("study.u2", v)).transpose()?;
    let study_grid = match (su1, su2) {
        (None, None) => default_study_grid(&model),
        (Some(a), None) => a.iter().map(|&x| (x, x)).collect(),
        (None, Some(_)) => return Err(Error::config("study.u1", "missing while study.u2 is set")),
        (Some(a), Some(b)) => {
            if a.len() != b.len() {
                return Err(Error::config("study.u2", format!("has {} entries but study.u1 has {}", b.len(), a.len())));
            }
            a.into_iter().zip(b).collect()
        }
    };
    if study_grid.is_empty() {
        return Err(Error::config("study.u1", "must not be empty"));
    }
    for w in study_grid.windows(2) {
        if !(w[1].0 >= w[0].0 && w[1].1 >= w[0].1 && w[1] != w[0]) {
            return Err(Error::config("study.u1", "capital grid must be increasing"));
        }
    }

    let dv = VerifySettings::default();
    let verify = VerifySettings {
        n_paths: keys.u64_or("verify.n_paths", dv.n_paths)?.max(1),
        probe_n: keys.u64_or("verify.probe_n", dv.probe_n)?.max(1),
        probe_steps: keys.u64_or("verify.probe_steps", dv.probe_steps as u64)?.max(1) as usize,
    };

    debug_assert!(keys.0.is_empty(), "unconsumed keys {:?}", keys.0.keys());
    Ok(RunConfig { model, mc, study_grid, verify })
}

/// Applies `BIRUIN_WORKERS` unless `mc.workers` was given as an override.
pub fn apply_env(config: &mut RunConfig, overrides: &[(String, Value)]) -> Result<()> {
    if overrides.iter().any(|(k, _)| k == "mc.workers") {
        return Ok(());
    }
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::config(WORKERS_ENV, format!("must be a positive integer, got {raw:?}")))?;
        config.mc.workers = n;
    }
    Ok(())
}

fn dist_lines(out: &mut String, base: &str, d: &ClaimDistribution) {
    let params: Vec<String> = d.params().iter().map(|p| fmt_num(*p)).collect();
    let _ = writeln!(out, "{base}.kind = \"{}\"", d.kind_name());
    let _ = writeln!(out, "{base}.params = [{}]", params.join(", "));
}

fn fmt_num(x: f64) -> String {
    // Debug formatting round-trips and always keeps a decimal point.
    format!("{x:?}")
}

impl RunConfig {
    /// The fully resolved configuration as flat TOML, one key per line.
    pub fn to_flat_toml(&self) -> String {
        let m = &self.model;
        let mut s = String::new();
        for (k, v) in [
            ("model.u1", m.u1),
            ("model.u2", m.u2),
            ("model.r", m.r),
            ("model.rho", m.rho),
            ("model.sigma1", m.sigma1),
            ("model.sigma2", m.sigma2),
            ("model.lambda1", m.lambda1),
            ("model.lambda2", m.lambda2),
        ] {
            let _ = writeln!(s, "{k} = {}", fmt_num(v));
        }
        let _ = writeln!(s, "model.common_shock = {}", m.common_shock);
        let _ = writeln!(s, "model.c1 = {}", fmt_num(m.c1));
        let _ = writeln!(s, "model.c2 = {}", fmt_num(m.c2));
        dist_lines(&mut s, "claims.dist1", &m.dist1);
        dist_lines(&mut s, "claims.dist2", &m.dist2);
        match &m.premium {
            PremiumMode::Linear => {
                let _ = writeln!(s, "premium.mode = \"linear\"");
            }
            PremiumMode::CompoundPoisson { rate1, jump1, rate2, jump2 } => {
                let _ = writeln!(s, "premium.mode = \"compound_poisson\"");
                let _ = writeln!(s, "premium.rate1 = {}", fmt_num(*rate1));
                let _ = writeln!(s, "premium.rate2 = {}", fmt_num(*rate2));
                dist_lines(&mut s, "premium.jump1", jump1);
                dist_lines(&mut s, "premium.jump2", jump2);
            }
        }
        let _ = writeln!(s, "sim.T = {}", fmt_num(m.horizon));
        let _ = writeln!(s, "sim.h = {}", fmt_num(m.step));
        let _ = writeln!(s, "sim.bridge = {}", m.bridge);
        let _ = writeln!(s, "mc.n_paths = {}", self.mc.n_paths);
        let _ = writeln!(s, "mc.seed = {}", self.mc.seed);
        let _ = writeln!(s, "mc.workers = {}", self.mc.workers);
        let _ = writeln!(s, "mc.batch_size = {}", self.mc.batch_size);
        let u1: Vec<String> = self.study_grid.iter().map(|g| fmt_num(g.0)).collect();
        let u2: Vec<String> = self.study_grid.iter().map(|g| fmt_num(g.1)).collect();
        let _ = writeln!(s, "study.u1 = [{}]", u1.join(", "));
        let _ = writeln!(s, "study.u2 = [{}]", u2.join(", "));
        let _ = writeln!(s, "verify.n_paths = {}", self.verify.n_paths);
        let _ = writeln!(s, "verify.probe_n = {}", self.verify.probe_n);
        let _ = writeln!(s, "verify.probe_steps = {}", self.verify.probe_steps);
        s
    }
}

/// The configuration shipped as `configs/default.toml`.
pub const DEFAULT_TOML: &str = include_str!("../../../configs/default.toml");
