//! Config-driven runs: one TOML file in, CSV tables, SVG charts and a JSON
//! report out.
//!
//! Findings in the report are functions of the config alone, so repeated runs
//! produce identical metrics at any parallelism. Only `wall_clock_seconds`
//! varies.

mod config;
mod plots;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{
    BarrierParams, ConfigErrors, CurveParams, CurveSource, DomainShape, ExperimentConfig, FieldError, GasketParams,
    TipParams, KINDS,
};
pub use plots::replot;

use crate::barrier::{conditional_tau_profile, lil_separation, BarrierConfig};
use crate::curve::{boundary_measure, entropy_dimension, Domain, PlanarPath};
use crate::error::Error;
use crate::gasket::{build_gasket, conjecture_scan, expected_side_size, expected_vertex_count, hitting_distribution};
use crate::geometry::Point;
use crate::paths::{sample_bm, TimeGrid};
use crate::rng::{with_parallelism, RngStream};
use crate::tip::hurst_sweep;

/// Version of the report layout below.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest generation drawn in the heat map unless asked otherwise.
const DEFAULT_HEAT_MAP_GENERATION: u32 = 6;

/// Depth of the hitting-time histogram.
const TAU_HISTOGRAM_DEPTH: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    InsufficientData,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub status: RunStatus,
    pub findings: Value,
    /// Files written into the output directory, excluding `report.json`.
    pub files: Vec<String>,
    pub error: Option<String>,
}

impl RunReport {
    /// Process exit code: 0 ok, 2 runtime error, 3 insufficient data.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Ok => 0,
            RunStatus::Error => 2,
            RunStatus::InsufficientData => 3,
        }
    }

    /// Canonical JSON of the findings alone.
    pub fn metrics_json(&self) -> String {
        serde_json::to_string(&self.findings).expect("findings serialise")
    }
}

/// Exit code for a config that fails to parse or validate.
pub const CONFIG_ERROR_EXIT: i32 = 1;

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> crate::Result<()> {
        fs::write(self.dir.join(name), bytes).map_err(|e| io_error(&self.dir.join(name), e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> crate::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| io_error(&self.dir.join(name), e))?;
        self.write(name, buf)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

struct Outcome {
    findings: Value,
    insufficient: bool,
}

/// Validates, runs and writes all artifacts plus `report.json` into
/// `config.output`. Runtime failures are recorded in the returned report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, ConfigErrors> {
    config.validate()?;
    let start = Instant::now();
    let mut out = Outputs {
        dir: config.output.clone(),
        files: Vec::new(),
    };
    let result = fs::create_dir_all(&out.dir)
        .map_err(|e| io_error(&out.dir, e))
        .and_then(|_| with_parallelism(config.parallelism, || dispatch(config, &mut out)));
    let (status, findings, error) = match result {
        Ok(o) if o.insufficient => (RunStatus::InsufficientData, o.findings, None),
        Ok(o) => (RunStatus::Ok, o.findings, None),
        Err(e) => (RunStatus::Error, Value::Null, Some(e.to_string())),
    };
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        status,
        findings,
        files: out.files,
        error,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    if let Err(e) = fs::write(config.output.join("report.json"), json) {
        report.status = RunStatus::Error;
        let msg = io_error(&config.output.join("report.json"), e).to_string();
        report.error = Some(match report.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
    Ok(report)
}

fn dispatch(cfg: &ExperimentConfig, out: &mut Outputs) -> crate::Result<Outcome> {
    let rng = RngStream::new(cfg.seed, 0);
    match cfg.kind.as_str() {
        "barrier" => run_barrier(&cfg.barrier, &rng, out),
        "gasket" => run_gasket(&cfg.gasket, &rng, out),
        "fbm-tip" => run_tip(&cfg.fbm_tip, &rng, out),
        "curve" => run_curve(&cfg.curve, &rng, out),
        other => unreachable!("validated kind {other}"),
    }
}

fn run_barrier(p: &BarrierParams, rng: &RngStream, out: &mut Outputs) -> crate::Result<Outcome> {
    let cfg = BarrierConfig {
        c: p.c,
        sigma: p.sigma,
        horizon: p.horizon,
        step: p.step,
    };
    cfg.validate_allow_flat()?;
    let grid = Arc::new(TimeGrid::with_step(p.horizon, p.step)?);
    let w = sample_bm(&grid, &mut rng.derive("barrier-w").rng())?;
    let profile = conditional_tau_profile(&w, &cfg, p.replicates, &rng.derive("barrier-b"))?;

    out.write_with("barrier_w.csv", |b| w.write_csv(b))?;
    out.write_with("tau_entropy.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["depth", "entropy"])?;
        for (d, h) in profile.depths.iter().zip(&profile.entropies) {
            w.write_record([d.to_string(), h.to_string()])?;
        }
        w.flush()
    })?;
    let hist = profile.counts_at(TAU_HISTOGRAM_DEPTH);
    let width = profile.horizon / hist.len() as f64;
    out.write_with("tau_histogram.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["t_lo", "t_hi", "count"])?;
        for (k, c) in hist.iter().enumerate() {
            w.write_record([(k as f64 * width).to_string(), ((k + 1) as f64 * width).to_string(), c.to_string()])?;
        }
        w.flush()
    })?;
    let depths: Vec<f64> = profile.depths.iter().map(|&d| f64::from(d)).collect();
    out.write("tau_entropy.svg", plots::entropy_vs_depth("hitting-time entropy", &depths, &profile.entropies))?;
    out.write("tau_histogram.svg", plots::tau_histogram(&hist, profile.horizon))?;

    let lil = if p.lil_paths > 0 {
        let sep = lil_separation(
            cfg.alpha(),
            p.lil_largest_scale,
            p.lil_smallest_scale,
            p.lil_paths,
            &rng.derive("barrier-lil"),
        )?;
        serde_json::to_value(sep).expect("serialisable")
    } else {
        Value::Null
    };

    Ok(Outcome {
        insufficient: profile.insufficient,
        findings: json!({
            "c_tilde": cfg.c_tilde(),
            "alpha": cfg.alpha(),
            "threshold": cfg.threshold(),
            "replicates": profile.replicates,
            "hits": profile.hits,
            "hit_fraction": profile.hits as f64 / profile.replicates as f64,
            "horizon": profile.horizon,
            "depths": profile.depths,
            "entropies": profile.entropies,
            "entropy_slope": profile.slope,
            "insufficient_data": profile.insufficient,
            "lil_separation": lil,
        }),
    })
}

fn run_gasket(p: &GasketParams, rng: &RngStream, out: &mut Outputs) -> crate::Result<Outcome> {
    let scan = conjecture_scan(p.n_max, &p.subsets, &rng.derive("gasket"))?;
    out.write_with("scan.csv", |b| scan.write_csv(b))?;

    let mut structure = Vec::new();
    for n in 1..=p.n_max {
        let g = build_gasket(n)?;
        let law = hitting_distribution(&g, g.top(), g.bottom_side())?;
        let mirrored = law
            .targets
            .iter()
            .zip(&law.probs)
            .all(|(&v, &pv)| {
                let m = g.mirror(v);
                law.targets.iter().position(|&t| t == m).is_some_and(|i| (law.probs[i] - pv).abs() < 1e-10)
            });
        structure.push(json!({
            "n": n,
            "vertices": g.vertex_count(),
            "vertices_expected": expected_vertex_count(n),
            "side_size": g.bottom_side().len(),
            "side_size_expected": expected_side_size(n),
            "mirror_symmetric": mirrored,
            "max_residual": law.max_residual,
        }));
    }

    let h = p.heat_map_generation.unwrap_or(p.n_max.min(DEFAULT_HEAT_MAP_GENERATION));
    let g = build_gasket(h)?;
    let law = hitting_distribution(&g, g.top(), g.bottom_side())?;
    let mut mass = vec![None; g.vertex_count()];
    for (&v, &pv) in law.targets.iter().zip(&law.probs) {
        mass[v] = Some(pv);
    }
    out.write_with("harmonic.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["id", "x", "y", "role", "mass"])?;
        for (v, c) in g.coords().iter().enumerate() {
            let m = mass[v].map(|m| m.to_string()).unwrap_or_default();
            w.write_record([v.to_string(), c[0].to_string(), c[1].to_string(), g.role(v).as_str().into(), m])?;
        }
        w.flush()
    })?;
    out.write_with("gasket_edges.csv", |b| g.write_edges_csv(b))?;
    let (ns, hs): (Vec<f64>, Vec<f64>) = scan
        .rows
        .iter()
        .filter(|r| r.subset == "bottom_side")
        .map(|r| (f64::from(r.n), r.entropy_bits))
        .unzip();
    out.write("gasket_entropy.svg", plots::gasket_entropy(&ns, &hs))?;
    out.write("gasket_heat_map.svg", plots::gasket_heat_map(g.coords(), &g.edges(), &mass))?;

    let violations: Vec<Value> = scan
        .violations()
        .iter()
        .map(|r| json!({"n": r.n, "subset": r.subset, "entropy_bits": r.entropy_bits}))
        .collect();
    Ok(Outcome {
        insufficient: false,
        findings: json!({
            "rows": scan.rows,
            "structure": structure,
            "bound_violations": violations,
            "bottom_side_is_max": scan.bottom_side_is_max(),
            "heat_map_generation": h,
        }),
    })
}

fn run_tip(p: &TipParams, rng: &RngStream, out: &mut Outputs) -> crate::Result<Outcome> {
    let template = p.template();
    let sweep = hurst_sweep(&p.hurst, &template, &rng.derive("fbm-tip"))?;
    out.write_with("tip_points.csv", |b| sweep.write_points_csv(b))?;
    out.write_with("tip_exponents.csv", |b| sweep.write_exponents_csv(b))?;
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for e in &sweep.estimates {
        series.insert(
            format!("H = {}", e.hurst),
            e.points.iter().map(|q| (q.epsilon, q.p_hat)).collect(),
        );
    }
    out.write("tip_loglog.svg", plots::tip_loglog(&series))?;
    let estimates: Vec<Value> = sweep
        .estimates
        .iter()
        .map(|e| {
            json!({
                "hurst": e.hurst,
                "exponent": e.fit.map(|f| f.slope),
                "half_width": e.fit.map(|f| f.half_width),
                "total_hits": e.total_hits,
                "hit_fraction": e.hit_fraction,
                "insufficient_data": e.insufficient,
                "points": e.points,
            })
        })
        .collect();
    Ok(Outcome {
        insufficient: sweep.estimates.iter().any(|e| e.insufficient),
        findings: json!({
            "horizon": template.horizon,
            "steps": template.steps,
            "replicates": template.replicates,
            "epsilons": template.epsilons,
            "estimates": estimates,
            "monotone_epsilon": sweep.monotone_epsilon,
            "p_increases_as_hurst_decreases": sweep.monotone_in_hurst,
            "comparison": sweep.comparison,
        }),
    })
}

fn read_file(path: &Path) -> crate::Result<fs::File> {
    fs::File::open(path).map_err(|e| io_error(path, e))
}

fn run_curve(p: &CurveParams, rng: &RngStream, out: &mut Outputs) -> crate::Result<Outcome> {
    let dom = match &p.domain_file {
        Some(f) => Domain::from_csv(read_file(f)?)?,
        None => match p.domain {
            DomainShape::Disk => Domain::disk(Point::default(), 1.0, 256)?,
            DomainShape::Square => Domain::rectangle(Point::new(-0.5, -0.5), Point::new(0.5, 0.5))?,
        },
    };
    let curve = match &p.curve_file {
        Some(f) => PlanarPath::from_csv(read_file(f)?)?,
        None => match p.curve {
            CurveSource::Brownian => PlanarPath::brownian(p.curve_steps, p.curve_horizon, &rng.derive("curve-path"))?,
            CurveSource::Ray => PlanarPath::ray(0.0, 2.0 * dom.perimeter()),
        },
    };
    let root = Point::new(p.root[0], p.root[1]);
    let measure = boundary_measure(&curve, &dom, root, p.angle_samples, &rng.derive("curve-angles"), p.d_max)?;
    out.write_with("measure.csv", |b| measure.write_csv(b))?;
    let entropies: Vec<f64> = (1..=p.d_max).map(|d| measure.entropy_at(d)).collect();
    let depths: Vec<f64> = (1..=p.d_max).map(f64::from).collect();
    out.write_with("curve_entropy.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["depth", "entropy"])?;
        for (d, h) in depths.iter().zip(&entropies) {
            w.write_record([d.to_string(), h.to_string()])?;
        }
        w.flush()
    })?;
    out.write("curve_entropy.svg", plots::entropy_vs_depth("boundary-measure entropy", &depths, &entropies))?;

    let (dimension, insufficient) = match entropy_dimension(&measure, &rng.derive("curve-bootstrap")) {
        Ok(d) => (serde_json::to_value(d).expect("serialisable"), false),
        Err(Error::InsufficientData(msg)) => (json!({ "withheld": msg }), true),
        Err(e) => return Err(e),
    };
    Ok(Outcome {
        insufficient,
        findings: json!({
            "samples": measure.samples,
            "hits": measure.hits(),
            "hit_fraction": measure.hit_fraction(),
            "warning": measure.warning,
            "entropies": entropies,
            "dimension": dimension,
        }),
    })
}
