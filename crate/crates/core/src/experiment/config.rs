use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::gasket::{SubsetSpec, MAX_SCAN_GENERATION};
use crate::tip::TipExperiment;

/// Experiment families accepted in `kind`.
pub const KINDS: [&str; 4] = ["barrier", "gasket", "fbm-tip", "curve"];

/// One run, read from a TOML file. Every field has a default so a file only
/// needs the values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    #[serde(serialize_with = "ser_seed", deserialize_with = "de_seed")]
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub parallelism: usize,
    pub output: PathBuf,
    pub barrier: BarrierParams,
    pub gasket: GasketParams,
    pub fbm_tip: TipParams,
    pub curve: CurveParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: "gasket".into(),
            seed: 1,
            parallelism: 0,
            output: PathBuf::from("hitlab-out"),
            barrier: BarrierParams::default(),
            gasket: GasketParams::default(),
            fbm_tip: TipParams::default(),
            curve: CurveParams::default(),
        }
    }
}

// TOML integers are signed; seeds at or above 2^63 are written as strings.
fn ser_seed<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(*seed) {
        Ok(v) => s.serialize_i64(v),
        Err(_) => s.serialize_str(&seed.to_string()),
    }
}

fn de_seed<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("seed must be non-negative")),
        Raw::Text(t) => t.parse().map_err(|_| serde::de::Error::custom("seed must be a 64-bit unsigned integer")),
    }
}

/// Frozen-barrier hitting-time profile, plus an optional LIL separation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierParams {
    pub c: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub step: f64,
    /// Brownian paths run against the frozen barrier.
    pub replicates: usize,
    /// Paths per class for the LIL separation; 0 skips it.
    pub lil_paths: usize,
    pub lil_largest_scale: f64,
    pub lil_smallest_scale: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            sigma: 1.0,
            horizon: 10.0,
            step: 1e-3,
            replicates: 10_000,
            lil_paths: 0,
            lil_largest_scale: 1e-2,
            lil_smallest_scale: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasketParams {
    pub n_max: u32,
    pub subsets: Vec<SubsetSpec>,
    /// Generation drawn in the heat map; defaults to `min(n_max, 6)`.
    pub heat_map_generation: Option<u32>,
}

impl Default for GasketParams {
    fn default() -> Self {
        Self {
            n_max: 5,
            subsets: vec![SubsetSpec::BottomSide, SubsetSpec::AllBoundary],
            heat_map_generation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TipParams {
    pub hurst: Vec<f64>,
    /// Tip sizes; empty means `count` halvings from `largest_epsilon`.
    pub epsilons: Vec<f64>,
    pub largest_epsilon: f64,
    pub epsilon_count: usize,
    pub horizon: f64,
    pub steps: usize,
    pub replicates: usize,
}

impl Default for TipParams {
    fn default() -> Self {
        Self {
            hurst: vec![0.5],
            epsilons: Vec::new(),
            largest_epsilon: 0.4,
            epsilon_count: 5,
            horizon: 50.0,
            steps: 1 << 12,
            replicates: 5_000,
        }
    }
}

impl TipParams {
    pub fn resolved_epsilons(&self) -> Vec<f64> {
        if self.epsilons.is_empty() {
            TipExperiment::geometric_epsilons(self.largest_epsilon, self.epsilon_count)
        } else {
            self.epsilons.clone()
        }
    }

    pub fn template(&self) -> TipExperiment {
        TipExperiment {
            hurst: self.hurst.first().copied().unwrap_or(0.5),
            epsilons: self.resolved_epsilons(),
            horizon: self.horizon,
            steps: self.steps,
            replicates: self.replicates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainShape {
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    Brownian,
    Ray,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveParams {
    /// Unit disk (256-gon) or unit square centred at the origin.
    pub domain: DomainShape,
    /// CSV of `x,y` boundary vertices; overrides `domain`.
    pub domain_file: Option<PathBuf>,
    pub curve: CurveSource,
    /// CSV of `x,y` curve vertices rooted at the first row; overrides `curve`.
    pub curve_file: Option<PathBuf>,
    pub curve_steps: usize,
    pub curve_horizon: f64,
    pub root: [f64; 2],
    pub angle_samples: usize,
    pub d_max: u32,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self {
            domain: DomainShape::Disk,
            domain_file: None,
            curve: CurveSource::Brownian,
            curve_file: None,
            curve_steps: 1 << 14,
            curve_horizon: 16.0,
            root: [0.5, 0.0],
            angle_samples: 20_000,
            d_max: 12,
        }
    }
}

/// One schema violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Everything wrong with a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn fields(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.field.as_str()).collect()
    }
}

struct Checker(Vec<FieldError>);

impl Checker {
    fn check(&mut self, ok: bool, field: &str, message: impl fmt::Display) {
        if !ok {
            self.0.push(FieldError {
                field: field.into(),
                message: message.to_string(),
            });
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML; syntax and type errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        toml::from_str(text).map_err(|e| {
            ConfigErrors(vec![FieldError {
                field: "<parse>".into(),
                message: e.to_string().trim_end().to_string(),
            }])
        })
    }

    /// Parses and validates.
    pub fn load(text: &str) -> Result<Self, ConfigErrors> {
        let cfg = Self::from_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are TOML-representable")
    }

    /// Checks every field relevant to `kind` and reports all violations.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut c = Checker(Vec::new());
        c.check(
            KINDS.contains(&self.kind.as_str()),
            "kind",
            format!("unknown kind {:?}; valid kinds are {}", self.kind, KINDS.join(", ")),
        );
        match self.kind.as_str() {
            "barrier" => self.check_barrier(&mut c),
            "gasket" => self.check_gasket(&mut c),
            "fbm-tip" => self.check_tip(&mut c),
            "curve" => self.check_curve(&mut c),
            _ => {}
        }
        if c.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(c.0))
        }
    }

    fn check_barrier(&self, c: &mut Checker) {
        let b = &self.barrier;
        c.check(b.c > 0.0 && b.c.is_finite(), "barrier.c", format!("must be > 0, got {}", b.c));
        c.check(
            b.sigma >= 0.0 && b.sigma.is_finite(),
            "barrier.sigma",
            format!("must be >= 0, got {}", b.sigma),
        );
        c.check(
            b.horizon > 0.0 && b.horizon.is_finite(),
            "barrier.horizon",
            format!("must be > 0, got {}", b.horizon),
        );
        c.check(
            b.step > 0.0 && b.step < b.horizon,
            "barrier.step",
            format!("must satisfy 0 < step < horizon ({}), got {}", b.horizon, b.step),
        );
        c.check(
            b.horizon / b.step <= 1e8,
            "barrier.step",
            format!("horizon / step must be at most 1e8, got {:e}", b.horizon / b.step),
        );
        c.check(b.replicates >= 1, "barrier.replicates", "must be at least 1");
        if b.lil_paths > 0 {
            c.check(
                b.sigma > 0.0,
                "barrier.sigma",
                "must be > 0 when lil_paths > 0 (the mixture needs alpha != 0)",
            );
            c.check(
                b.lil_largest_scale > 0.0 && b.lil_largest_scale < crate::barrier::LIL_MAX_SCALE,
                "barrier.lil_largest_scale",
                format!("must lie in (0, 1/e), got {}", b.lil_largest_scale),
            );
            c.check(
                b.lil_smallest_scale > 0.0 && b.lil_smallest_scale < b.lil_largest_scale,
                "barrier.lil_smallest_scale",
                format!("must lie in (0, lil_largest_scale), got {}", b.lil_smallest_scale),
            );
        }
    }

    fn check_gasket(&self, c: &mut Checker) {
        let g = &self.gasket;
        c.check(
            (1..=MAX_SCAN_GENERATION).contains(&g.n_max),
            "gasket.n_max",
            format!("must be in 1..={MAX_SCAN_GENERATION}, got {}", g.n_max),
        );
        c.check(!g.subsets.is_empty(), "gasket.subsets", "must list at least one subset");
        for (i, s) in g.subsets.iter().enumerate() {
            if let SubsetSpec::RandomK { k, draws } = s {
                c.check(*k >= 1, &format!("gasket.subsets[{i}].k"), "must be at least 1");
                c.check(*draws >= 1, &format!("gasket.subsets[{i}].draws"), "must be at least 1");
            }
        }
        if let Some(h) = g.heat_map_generation {
            c.check(
                (1..=MAX_SCAN_GENERATION).contains(&h),
                "gasket.heat_map_generation",
                format!("must be in 1..={MAX_SCAN_GENERATION}, got {h}"),
            );
        }
    }

    fn check_tip(&self, c: &mut Checker) {
        let t = &self.fbm_tip;
        c.check(!t.hurst.is_empty(), "fbm_tip.hurst", "must list at least one value");
        for (i, h) in t.hurst.iter().enumerate() {
            c.check(*h > 0.0 && *h < 1.0, &format!("fbm_tip.hurst[{i}]"), format!("must lie in (0, 1), got {h}"));
        }
        let eps = t.resolved_epsilons();
        c.check(
            eps.len() >= 3,
            if t.epsilons.is_empty() { "fbm_tip.epsilon_count" } else { "fbm_tip.epsilons" },
            "need at least 3 tip sizes for the exponent fit",
        );
        c.check(
            eps.iter().all(|&e| e > 0.0) && eps.windows(2).all(|w| w[1] < w[0]),
            if t.epsilons.is_empty() { "fbm_tip.largest_epsilon" } else { "fbm_tip.epsilons" },
            "tip sizes must be positive and strictly decreasing",
        );
        c.check(
            t.horizon > 0.0 && t.horizon.is_finite(),
            "fbm_tip.horizon",
            format!("must be > 0, got {}", t.horizon),
        );
        c.check(
            t.steps.is_power_of_two() && t.steps >= 2,
            "fbm_tip.steps",
            format!("must be a power of two >= 2, got {}", t.steps),
        );
        c.check(
            t.replicates >= 1000,
            "fbm_tip.replicates",
            format!("must be at least 1000, got {}", t.replicates),
        );
    }

    fn check_curve(&self, c: &mut Checker) {
        let k = &self.curve;
        c.check(k.angle_samples >= 1, "curve.angle_samples", "must be at least 1");
        c.check(
            (1..=crate::curve::MAX_DEPTH).contains(&k.d_max),
            "curve.d_max",
            format!("must be in 1..={}, got {}", crate::curve::MAX_DEPTH, k.d_max),
        );
        c.check(
            k.root.iter().all(|v| v.is_finite()),
            "curve.root",
            "coordinates must be finite",
        );
        if k.curve_file.is_none() && k.curve == CurveSource::Brownian {
            c.check(k.curve_steps >= 1, "curve.curve_steps", "must be at least 1");
            c.check(
                k.curve_horizon > 0.0 && k.curve_horizon.is_finite(),
                "curve.curve_horizon",
                format!("must be > 0, got {}", k.curve_horizon),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_kind() {
        for kind in KINDS {
            let cfg = ExperimentConfig {
                kind: kind.into(),
                ..Default::default()
            };
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig {
            kind: "curve".into(),
            seed: u64::MAX,
            ..Default::default()
        };
        cfg.gasket.subsets.push(SubsetSpec::RandomK { k: 4, draws: 3 });
        cfg.fbm_tip.epsilons = vec![0.3, 0.1, 0.01];
        cfg.curve.domain_file = Some("d.csv".into());
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_gasket() {
        let cfg = ExperimentConfig::load("kind = \"gasket\"\n[gasket]\nn_max = 3\n").unwrap();
        assert_eq!(cfg.gasket.n_max, 3);
    }

    #[test]
    fn negative_sigma_is_named() {
        let err = ExperimentConfig::load("kind = \"barrier\"\n[barrier]\nsigma = -1.0\n").unwrap_err();
        assert_eq!(err.fields(), ["barrier.sigma"]);
        assert!(err.to_string().contains(">= 0"));
    }

    #[test]
    fn unknown_kind_lists_kinds() {
        let err = ExperimentConfig::load("kind = \"sphere\"\n").unwrap_err();
        let text = err.to_string();
        for k in KINDS {
            assert!(text.contains(k), "{text}");
        }
    }

    #[test]
    fn all_errors_reported() {
        let err = ExperimentConfig::load(
            "kind = \"barrier\"\n[barrier]\nc = 0.0\nstep = 20.0\nhorizon = 10.0\nreplicates = 0\n",
        )
        .unwrap_err();
        assert_eq!(err.fields(), ["barrier.c", "barrier.step", "barrier.replicates"]);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = ExperimentConfig::load("kind = \"gasket\"\n[gasket]\nn_max = \"three\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::load("kind = \"gasket\"\ncolour = 1\n").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }
}
