//! Config-driven scenarios behind the command line: parsing, dispatch and reports.
//!
//! ```toml
//! dimension = 1
//! grid = 128
//! [hamiltonian]
//! kind = "radial_bump"
//! A = 2.5
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capacity::{capacity_energy_audit_with, DomainSpec};
use crate::error::{Error, Result};
use crate::flow::{
    integrate_contact_trajectory, integrate_symplectic, reeb_shift, write_trajectory_csv, ContactPathSpec, Schedule,
    DEFAULT_STEP,
};
use crate::geometry::{CylinderPoint, EuclideanPoint};
use crate::hamiltonian::spec::HamiltonianSpec;
use crate::hamiltonian::{
    admissibility_check_with, compute_b0_auto, default_resolution, regular_zero_report, Hamiltonian,
    DEFAULT_SAFETY_MARGIN, NEWTON_TOL,
};
use crate::norms::{
    floor_lower_bound_audit_with, norm_report_with, selector_lower_bound_audit_with, Gated, LengthOptions,
    NormReport,
};
use crate::orbits::{hessian_period_certificate, loop_parseval_check, sample_loop};
use crate::translated::{
    brute_force_translated_points_with, spectrum_autonomous_with, translation_selector_inverse_with,
    translation_selector_with, ScanOptions,
};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Flow,
    Spectrum,
    Norms,
    HessianCheck,
    PeriodicScan,
    Parseval,
    CapacityAudit,
    GeodesicAudit,
    Sweep,
}

impl Operation {
    pub const ALL: [Operation; 9] = [
        Operation::Flow,
        Operation::Spectrum,
        Operation::Norms,
        Operation::HessianCheck,
        Operation::PeriodicScan,
        Operation::Parseval,
        Operation::CapacityAudit,
        Operation::GeodesicAudit,
        Operation::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Flow => "flow",
            Operation::Spectrum => "spectrum",
            Operation::Norms => "norms",
            Operation::HessianCheck => "hessian-check",
            Operation::PeriodicScan => "periodic-scan",
            Operation::Parseval => "parseval",
            Operation::CapacityAudit => "capacity-audit",
            Operation::GeodesicAudit => "geodesic-audit",
            Operation::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub random_points: usize,
    #[serde(default)]
    pub z0: f64,
    pub schedule: Option<Schedule>,
    /// Keep every k-th integrator step in CSV trajectories.
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default)]
    pub brute_force: bool,
    pub brute_force_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicParams {
    pub period_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParsevalParams {
    pub loops: Option<usize>,
    pub degree: Option<usize>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    pub domain: DomainSpec,
    pub domain_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicParams {
    #[serde(default)]
    pub schedules: Vec<Schedule>,
    pub time_nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    #[serde(default)]
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub csv: bool,
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub operation: Option<Operation>,
    #[serde(default = "one_usize")]
    pub dimension: usize,
    pub hamiltonian: Option<HamiltonianSpec>,
    pub grid: Option<usize>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    #[serde(default = "one_f64")]
    pub time: f64,
    #[serde(default)]
    pub seed: u64,
    pub flow: Option<FlowParams>,
    pub spectrum: Option<SpectrumParams>,
    pub periodic: Option<PeriodicParams>,
    pub parseval: Option<ParsevalParams>,
    pub capacity: Option<CapacityParams>,
    pub geodesic: Option<GeodesicParams>,
    pub sweep: Option<SweepParams>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        self.grid = o.grid.or(self.grid);
        self.step = o.step.or(self.step);
        self.tol = o.tol.or(self.tol);
        if o.out.is_some() {
            self.output.dir = o.out.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dimension == 0 {
            return bad("dimension must be at least 1".into());
        }
        for (name, v) in [("step", self.step), ("tol", self.tol)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(g) = self.grid {
            if g < 16 {
                return bad(format!("grid must be at least 16, got {g}"));
            }
        }
        if !self.time.is_finite() {
            return bad("time must be finite".into());
        }
        Ok(())
    }

    fn grid(&self) -> usize {
        self.grid.unwrap_or_else(|| default_resolution(self.dimension))
    }

    fn step(&self) -> f64 {
        self.step.unwrap_or(DEFAULT_STEP)
    }

    fn hamiltonian(&self) -> Result<Hamiltonian> {
        match &self.hamiltonian {
            Some(spec) => spec.build(self.dimension, self.grid()),
            None => Err(Error::Config("this operation needs a [hamiltonian] table".into())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub operation: &'static str,
    pub result: Value,
}

pub struct Outcome {
    pub report: Report,
    pub csv: Vec<(String, String)>,
}

/// Runs `op` (or the config's own operation) and returns the report and CSV bodies.
pub fn run_scenario(config: &ScenarioConfig, op: Option<Operation>) -> Result<Outcome> {
    config.validate()?;
    let op = match (op, config.operation) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("config is for '{}' but '{}' was requested", b.name(), a.name())))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Config("no operation given".into())),
    };
    let mut csv = vec![];
    let result = match op {
        Operation::Flow => run_flow(config, &mut csv)?,
        Operation::Spectrum => run_spectrum(config)?,
        Operation::Norms => {
            let h = config.hamiltonian()?;
            serde_json::to_value(norm_report_with(&h, config.grid())?)?
        }
        Operation::HessianCheck => run_hessian_check(config)?,
        Operation::PeriodicScan => {
            let h = config.hamiltonian()?;
            let samples = config.periodic.as_ref().and_then(|p| p.period_samples).unwrap_or(256);
            let cert = hessian_period_certificate(&h, config.grid(), samples)?;
            if config.output.csv {
                let mut w = csv::Writer::from_writer(vec![]);
                w.write_record(["seed", "period", "closure_residual"])?;
                for o in &cert.scan.orbits {
                    let seed: Vec<String> = o.seed.coords().iter().map(|v| v.to_string()).collect();
                    w.write_record([seed.join(" "), o.period.to_string(), o.closure_residual.to_string()])?;
                }
                csv.push(("orbits.csv".into(), csv_string(w)?));
            }
            serde_json::to_value(cert)?
        }
        Operation::Parseval => run_parseval(config)?,
        Operation::CapacityAudit => {
            let h = config.hamiltonian()?;
            let p = config
                .capacity
                .as_ref()
                .ok_or_else(|| Error::Config("capacity-audit needs a [capacity] table".into()))?;
            let audit = capacity_energy_audit_with(&h, &p.domain, config.grid(), p.domain_grid.unwrap_or(48))?;
            serde_json::to_value(audit)?
        }
        Operation::GeodesicAudit => run_geodesic(config)?,
        Operation::Sweep => {
            let amps = config.sweep.as_ref().map(|s| s.amplitudes.clone()).unwrap_or_default();
            let rows = bump_norm_sweep(&amps, config.dimension, config.grid());
            csv.push(("sweep.csv".into(), sweep_csv(&rows)?));
            json!({ "rows": rows })
        }
    };
    Ok(Outcome { report: Report { schema_version: SCHEMA_VERSION, operation: op.name(), result }, csv })
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json` and any CSV files into the output directory.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&outcome.report)?;
    text.push('\n');
    fs::write(&path, text)?;
    for (name, body) in &outcome.csv {
        fs::write(dir.join(name), body)?;
    }
    Ok(path)
}

fn run_flow(config: &ScenarioConfig, csv: &mut Vec<(String, String)>) -> Result<Value> {
    let h = config.hamiltonian()?;
    let params = config.flow.clone().unwrap_or_default();
    let mut spec = match params.schedule {
        Some(s) => ContactPathSpec::scheduled(h.clone(), s),
        None => ContactPathSpec::autonomous(h.clone()),
    };
    spec.integrator.step = config.step();
    spec.horizon = config.time;
    spec.validate()?;
    let mut points = params.points.clone();
    if params.random_points > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bx = h.support_box();
        for _ in 0..params.random_points {
            let p = match (bx.lo(), bx.hi()) {
                (Some(lo), Some(hi)) => lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect(),
                _ => (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            points.push(p);
        }
    }
    if points.is_empty() {
        return Err(Error::Config("flow needs points or random_points".into()));
    }
    let every = params.record_every.unwrap_or(10);
    let mut out = vec![];
    for (k, p) in points.iter().enumerate() {
        let base = EuclideanPoint::new(p.clone())?;
        if base.coords().len() != h.dim() {
            return Err(Error::Config(format!("point {k} has dimension {}, expected {}", p.len(), h.dim())));
        }
        let q0 = CylinderPoint::new(base.clone(), params.z0);
        let traj = integrate_contact_trajectory(&spec, &q0, config.time, every)?;
        let last = traj.states.last().expect("trajectory has its end point");
        let (shift, symplectic) = if params.schedule.is_none() {
            (
                Some(reeb_shift(&h, &base, config.time, config.step())?),
                Some(integrate_symplectic(&h, &base, config.time, config.step())?),
            )
        } else {
            (None, None)
        };
        out.push(json!({
            "initial": p,
            "z0": params.z0,
            "final": last.base.coords(),
            "reeb_lift": last.reeb_lift,
            "conformal": last.conformal,
            "reeb_shift": shift,
            "lift_error": shift.map(|f| (last.reeb_lift - params.z0 - f).abs()),
            "energy_drift": traj.energy_drift,
            "step_halving_gap": symplectic.as_ref().map(|s| s.step_halving_gap),
        }));
        if config.output.csv {
            let mut buf = vec![];
            let h0 = params.schedule.is_none().then(|| (&h, h.value(p)));
            write_trajectory_csv(&traj, h0, &mut buf)?;
            csv.push((format!("trajectory_{k}.csv"), String::from_utf8(buf).expect("utf-8")));
        }
    }
    Ok(json!({ "time": config.time, "step": config.step(), "trajectories": out }))
}

fn run_spectrum(config: &ScenarioConfig) -> Result<Value> {
    let h = config.hamiltonian()?;
    let grid = config.grid();
    let tol = config.tol.unwrap_or(NEWTON_TOL);
    let s = spectrum_autonomous_with(&h, config.time, grid, tol)?;
    let unit = (0.0..=1.0).contains(&config.time);
    let c = if unit { Some(translation_selector_with(&h, config.time, grid)?) } else { None };
    let c_inv = if unit { Some(translation_selector_inverse_with(&h, config.time, grid)?) } else { None };
    let params = config.spectrum.clone().unwrap_or_default();
    let brute = if params.brute_force {
        let opts = ScanOptions {
            grid_resolution: params.brute_force_grid.unwrap_or(64),
            tol: config.tol.unwrap_or(1e-9),
            step: config.step(),
            ..ScanOptions::for_dim(h.n())
        };
        let r = brute_force_translated_points_with(&h, config.time, &opts)?;
        let values = r.translations(1e-9);
        let agrees = values.iter().all(|v| s.values.iter().any(|w| (v - w).abs() < 1e-4))
            && s.values.iter().all(|w| values.iter().any(|v| (v - w).abs() < 1e-4));
        Some(json!({ "translations": values, "agrees": agrees, "report": r }))
    } else {
        None
    };
    Ok(json!({
        "time": config.time,
        "values": s.values,
        "selector": c,
        "selector_inverse": c_inv,
        "spectrum": s,
        "brute_force": brute,
    }))
}

fn run_hessian_check(config: &ScenarioConfig) -> Result<Value> {
    let h = config.hamiltonian()?;
    let grid = config.grid();
    let adm = admissibility_check_with(&h, grid, DEFAULT_SAFETY_MARGIN)?;
    let rz = regular_zero_report(&h, grid)?;
    let b0 = match &config.hamiltonian {
        Some(HamiltonianSpec::RadialBump { a, .. }) => Some(compute_b0_auto(*a, config.dimension, grid)?),
        _ => None,
    };
    Ok(json!({ "admissibility": adm, "regular_zero": rz, "b0": b0 }))
}

fn random_trig_loop(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> Vec<Vec<(f64, f64)>> {
    (0..dim)
        .map(|_| (0..=degree).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

/// `gamma_c(t) = sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)` per coordinate.
pub fn eval_trig_loop(coeffs: &[Vec<(f64, f64)>], t: f64) -> Vec<f64> {
    coeffs
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = std::f64::consts::TAU * k as f64 * t;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        })
        .collect()
}

fn run_parseval(config: &ScenarioConfig) -> Result<Value> {
    let p = config.parseval.clone().unwrap_or_default();
    let (count, degree, samples) = (p.loops.unwrap_or(100), p.degree.unwrap_or(8), p.samples.unwrap_or(512));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = vec![];
    for _ in 0..count {
        let coeffs = random_trig_loop(&mut rng, 2 * config.dimension, degree);
        let mut pts = sample_loop(|t| eval_trig_loop(&coeffs, t), samples);
        // exact closure: the last sample is the first one
        pts[samples] = pts[0].clone();
        checks.push(loop_parseval_check(&pts)?);
    }
    if let Some(bad) = checks.iter().find(|c| !c.ok) {
        return Err(Error::Integrity(format!("Parseval bound violated: lhs {} > rhs/2pi {}", bad.lhs, bad.rhs / std::f64::consts::TAU)));
    }
    let min_gap = checks.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
    Ok(json!({ "loops": count, "degree": degree, "samples": samples, "all_ok": true, "min_gap": min_gap, "checks": checks }))
}

fn default_schedules() -> Vec<Schedule> {
    vec![
        Schedule::Identity,
        Schedule::Power { p: 2.0 },
        Schedule::Power { p: 3.5 },
        Schedule::BackAndForth { beta: 0.7, freq: 2 },
        Schedule::BackAndForth { beta: 2.5, freq: 1 },
        Schedule::BackAndForth { beta: -3.0, freq: 3 },
    ]
}

fn run_geodesic(config: &ScenarioConfig) -> Result<Value> {
    let h = config.hamiltonian()?;
    let grid = config.grid();
    let params = config.geodesic.clone().unwrap_or_default();
    let schedules = if params.schedules.is_empty() { default_schedules() } else { params.schedules.clone() };
    let c = translation_selector_with(&h, 1.0, grid)?;
    let c_inv = translation_selector_inverse_with(&h, 1.0, grid)?;
    let mut opts = LengthOptions::new(grid);
    if let Some(n) = params.time_nodes {
        opts.time_nodes = n;
    }
    let mut rows = vec![];
    for s in schedules {
        let path = ContactPathSpec::scheduled(h.clone(), s);
        let audit = selector_lower_bound_audit_with(&path, c, c_inv, &opts)?;
        // the equality chain holds along monotone representatives only
        if audit.equality != s.is_monotone() && (c != 0.0 || c_inv != 0.0) {
            return Err(Error::Integrity(format!(
                "schedule {s:?}: equality = {} but monotone = {}",
                audit.equality,
                s.is_monotone()
            )));
        }
        rows.push(json!({ "schedule": s, "monotone": s.is_monotone(), "total_variation": s.total_variation(), "audit": audit }));
    }
    let floor = floor_lower_bound_audit_with(&h, grid)?;
    Ok(json!({ "c": c, "c_inverse": c_inv, "paths": rows, "floor": floor }))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B0")]
    pub b0: Option<f64>,
    pub nu_s: Option<f64>,
    pub nu_fpr: Option<u64>,
    pub nu_d: Option<u64>,
    pub nu_osc: Option<u64>,
    pub shelukhin_length: Option<f64>,
    pub spectrum_ok: Option<bool>,
    pub flags: String,
    pub error: Option<String>,
}

fn sweep_row(a: f64, n: usize, grid: usize) -> Result<SweepRow> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("amplitude must be positive, got {a}")));
    }
    let b0 = compute_b0_auto(a, n, grid)?.b0;
    let h = Hamiltonian::radial_bump(n, crate::hamiltonian::BumpParams::new(b0, a)?)?;
    let r: NormReport = norm_report_with(&h, grid)?;
    let length = selector_free_length(&h, grid)?;
    let s = spectrum_autonomous_with(&h, 1.0, grid, NEWTON_TOL)?;
    let spectrum_ok = s.values.len() == 2 && s.values[0] == 0.0 && (s.values[1] - a).abs() < 1e-9;
    let hy = r.hypotheses;
    let mut flags = vec![];
    if hy.admissible {
        flags.push("admissible");
    }
    if hy.regular_zero {
        flags.push("regular_zero");
    }
    flags.push(match hy.sign_definite {
        crate::norms::SignClass::Nonneg => "nonneg",
        crate::norms::SignClass::Nonpos => "nonpos",
        crate::norms::SignClass::Mixed => "mixed",
    });
    let uval = |g: &Gated<u64>| g.value();
    Ok(SweepRow {
        a,
        b0: Some(b0),
        nu_s: r.shelukhin_norm.value(),
        nu_fpr: uval(&r.fpr_norm),
        nu_d: uval(&r.discriminant_norm),
        nu_osc: uval(&r.oscillation_norm),
        shelukhin_length: Some(length),
        spectrum_ok: Some(spectrum_ok),
        flags: flags.join(";"),
        error: None,
    })
}

fn selector_free_length(h: &Hamiltonian, grid: usize) -> Result<f64> {
    Ok(crate::norms::path_integrals(&ContactPathSpec::autonomous(h.clone()), &LengthOptions::new(grid))?.length)
}

/// One row per amplitude: `B0(A)`, the certified norms, the time-quadrature
/// Shelukhin length and the spectrum check. Failures are recorded per row.
pub fn bump_norm_sweep(amplitudes: &[f64], n: usize, grid: usize) -> Vec<SweepRow> {
    amplitudes
        .iter()
        .map(|&a| {
            sweep_row(a, n, grid).unwrap_or_else(|e| SweepRow {
                a,
                b0: None,
                nu_s: None,
                nu_fpr: None,
                nu_d: None,
                nu_osc: None,
                shelukhin_length: None,
                spectrum_ok: None,
                flags: String::new(),
                error: Some(e.to_string()),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["A", "B0", "nu_S", "nu_FPR", "nu_d", "nu_osc", "L_S", "flags", "error"])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.a.to_string(),
            opt(r.b0.map(|v| v.to_string())),
            opt(r.nu_s.map(|v| v.to_string())),
            opt(r.nu_fpr.map(|v| v.to_string())),
            opt(r.nu_d.map(|v| v.to_string())),
            opt(r.nu_osc.map(|v| v.to_string())),
            opt(r.shelukhin_length.map(|v| v.to_string())),
            r.flags.clone(),
            opt(r.error.clone()),
        ])?;
    }
    csv_string(w)
}
