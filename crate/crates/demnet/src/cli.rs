//! Configuration-driven benchmark runner: selects a problem, method,
//! network, and schedule; trains; and writes `summary.json`,
//! `field.csv`, and `loss_history.csv` into an output directory.
//!
//! The binary in `src/bin/demnet.rs` is a thin argument parser over
//! [`run`], [`sweep`], and [`benchmark_registry`].

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bvp::{HistoryEntry, Schedule};
use crate::geometry::Sampling;
use crate::network::Activation;
use crate::validation::ErrorReport;

/// Bumped whenever the summary layout changes.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Environment variable capping worker threads for sweeps.
pub const THREADS_ENV: &str = "DEMNET_THREADS";

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Benchmark name; see [`benchmark_registry`].
    pub problem: String,
    /// "dem" (energy minimization) or "dcm" (collocation); defaults to
    /// the benchmark's canonical method.
    pub method: Option<String>,
    pub seed: u64,
    /// Output directory for artifacts; no artifacts if unset.
    pub out: Option<String>,
    pub network: NetworkCfg,
    pub schedule: ScheduleCfg,
    pub geometry: GeometryCfg,
    pub material: MaterialCfg,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkCfg {
    /// Hidden layer widths, e.g. [30, 30, 30].
    pub hidden: Option<Vec<usize>>,
    /// "tanh", "relu", "relu_sq", "sin_half_pi", "linear".
    pub activation: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleCfg {
    pub adam_steps: Option<usize>,
    pub adam_lr: Option<f64>,
    pub lbfgs_steps: Option<usize>,
    pub lbfgs_memory: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryCfg {
    /// Structured interior counts per axis (midpoint cells).
    pub interior: Option<Vec<usize>>,
    /// Unstructured interior point count (where supported).
    pub interior_random: Option<usize>,
    /// Points per boundary piece.
    pub n_boundary: Option<usize>,
    /// Use the full-size published point sets for the 3D problems.
    pub paper_scale: bool,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialCfg {
    pub e: Option<f64>,
    pub nu: Option<f64>,
    /// Winkler foundation modulus (plate benchmarks).
    pub k_w: Option<f64>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig, CliError> {
        toml::from_str(s).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn from_toml_file(path: &Path) -> Result<RunConfig, CliError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }
}

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CliError {
    /// "config" | "training" | "io"
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError { kind: "config".into(), message: message.into() }
    }
    pub fn training(message: impl Into<String>) -> CliError {
        CliError { kind: "training".into(), message: message.into() }
    }
    pub fn io(message: impl Into<String>) -> CliError {
        CliError { kind: "io".into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind.as_str() {
            "config" => 2,
            "training" => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BenchInfo {
    pub name: &'static str,
    pub family: &'static str,
    pub methods: &'static [&'static str],
    pub default_method: &'static str,
    /// What the benchmark models.
    pub reference: &'static str,
    /// What the errors are measured against.
    pub oracle: &'static str,
}

pub fn benchmark_registry() -> &'static [BenchInfo] {
    const DEM: &[&str] = &["dem"];
    const DCM: &[&str] = &["dcm"];
    const BOTH: &[&str] = &["dem", "dcm"];
    &[
        BenchInfo { name: "thick_cylinder", family: "elasticity", methods: DEM, default_method: "dem", reference: "thick-walled cylinder under internal pressure (plane stress quarter model)", oracle: "closed form" },
        BenchInfo { name: "plate_hole", family: "elasticity", methods: DEM, default_method: "dem", reference: "quarter plate with a circular hole under uniaxial tension", oracle: "closed form (infinite-plate)" },
        BenchInfo { name: "hollow_sphere", family: "elasticity", methods: DEM, default_method: "dem", reference: "hollow sphere under internal pressure (octant model)", oracle: "closed form" },
        BenchInfo { name: "cube_hole", family: "elasticity", methods: DEM, default_method: "dem", reference: "cube with a spherical cavity under uniaxial tension", oracle: "closed form (infinite-medium approximation)" },
        BenchInfo { name: "wave_1d", family: "dynamics", methods: DCM, default_method: "dcm", reference: "1D wave equation, end pulse on a space-time domain", oracle: "finite-difference reference" },
        BenchInfo { name: "twisted_cuboid", family: "hyperelasticity", methods: DEM, default_method: "dem", reference: "neo-Hookean cuboid clamped at one end and twisted 60 degrees at the other", oracle: "pinned reference norms" },
        BenchInfo { name: "phasefield_1d", family: "phasefield", methods: BOTH, default_method: "dem", reference: "1D phase-field crack profile on a bar", oracle: "closed form exp(-|x-a|/l0)" },
        BenchInfo { name: "sent", family: "phasefield", methods: DEM, default_method: "dem", reference: "single-edge-notched plate under tension with history-driven crack field", oracle: "property-based (transverse crack profile)" },
        BenchInfo { name: "piezo_mechanical", family: "piezo", methods: DEM, default_method: "dem", reference: "piezoelectric cantilever with a tip load", oracle: "property-based" },
        BenchInfo { name: "piezo_electrical", family: "piezo", methods: DEM, default_method: "dem", reference: "piezoelectric cantilever driven by an electrode voltage", oracle: "property-based" },
        BenchInfo { name: "winkler_ss_square", family: "plate", methods: BOTH, default_method: "dcm", reference: "simply supported square plate on an elastic foundation, uniform load", oracle: "double series" },
        BenchInfo { name: "clamped_circle", family: "plate", methods: BOTH, default_method: "dcm", reference: "clamped circular plate, uniform load", oracle: "closed form" },
        BenchInfo { name: "sinusoidal_ss_square", family: "plate", methods: BOTH, default_method: "dem", reference: "simply supported square plate, sinusoidal load", oracle: "closed form" },
        BenchInfo { name: "annular_ss_free", family: "plate", methods: BOTH, default_method: "dem", reference: "annular plate, simply supported outside and free inside, uniform load", oracle: "closed form" },
    ]
}

pub fn registry_entry(name: &str) -> Option<&'static BenchInfo> {
    benchmark_registry().iter().find(|b| b.name == name)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub problem: String,
    pub method: String,
    pub seed: u64,
    pub loss: f64,
    pub wall_secs: f64,
    /// (component, relative L2 error) pairs against the oracle.
    pub rel_l2: Vec<(String, f64)>,
    pub energy_rel_error: Option<f64>,
    /// Named scalar results (probe deflections, tip values, norms).
    pub probes: Vec<(String, f64)>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub field_header: String,
    pub field_rows: Vec<Vec<f64>>,
    pub history: Vec<HistoryEntry>,
}

fn parse_method(cfg: &RunConfig, info: &BenchInfo) -> Result<&'static str, CliError> {
    match cfg.method.as_deref() {
        None => Ok(info.default_method),
        Some(m) => info
            .methods
            .iter()
            .find(|&&x| x == m)
            .copied()
            .ok_or_else(|| {
                CliError::config(format!(
                    "method `{m}` not supported by `{}` (supported: {:?})",
                    info.name, info.methods
                ))
            }),
    }
}

fn parse_activation(cfg: &RunConfig) -> Result<Option<Activation>, CliError> {
    match cfg.network.activation.as_deref() {
        None => Ok(None),
        Some(s) => s
            .parse::<Activation>()
            .map(Some)
            .map_err(CliError::config),
    }
}

/// Per-benchmark training schedule defaults, overridden by the config.
pub fn effective_schedule(cfg: &RunConfig, method: &str) -> Schedule {
    let base = match (cfg.problem.as_str(), method) {
        ("thick_cylinder" | "plate_hole", _) => Schedule {
            adam_steps: 300, adam_lr: 2e-3, lbfgs_steps: 150, lbfgs_memory: 40,
            ..Default::default()
        },
        ("hollow_sphere", _) => Schedule {
            adam_steps: 200, adam_lr: 2e-3, lbfgs_steps: 50, lbfgs_memory: 40,
            ..Default::default()
        },
        ("cube_hole", _) => Schedule {
            adam_steps: 300, adam_lr: 2e-3, lbfgs_steps: 100, lbfgs_memory: 40,
            ..Default::default()
        },
        ("wave_1d", _) => Schedule {
            adam_steps: 500, adam_lr: 2e-3, lbfgs_steps: 400, lbfgs_memory: 40,
            ..Default::default()
        },
        ("twisted_cuboid", _) => Schedule {
            adam_steps: 0, lbfgs_steps: 50, lbfgs_init_step: 0.5, lbfgs_memory: 20,
            ..Default::default()
        },
        ("phasefield_1d", _) => Schedule {
            adam_steps: 300, adam_lr: 2e-3, lbfgs_steps: 200, lbfgs_memory: 40,
            ..Default::default()
        },
        ("sent", _) => Schedule {
            adam_steps: 200, adam_lr: 2e-3, lbfgs_steps: 150, lbfgs_memory: 40,
            ..Default::default()
        },
        ("piezo_mechanical" | "piezo_electrical", _) => Schedule {
            adam_steps: 300, adam_lr: 2e-3, lbfgs_steps: 150, lbfgs_memory: 40,
            ..Default::default()
        },
        (_, "dcm") => Schedule {
            adam_steps: 300, adam_lr: 2e-3, lbfgs_steps: 300, lbfgs_memory: 40,
            ..Default::default()
        },
        _ => Schedule {
            adam_steps: 200, adam_lr: 2e-3, lbfgs_steps: 150, lbfgs_memory: 40,
            ..Default::default()
        },
    };
    Schedule {
        adam_steps: cfg.schedule.adam_steps.unwrap_or(base.adam_steps),
        adam_lr: cfg.schedule.adam_lr.unwrap_or(base.adam_lr),
        lbfgs_steps: cfg.schedule.lbfgs_steps.unwrap_or(base.lbfgs_steps),
        lbfgs_memory: cfg.schedule.lbfgs_memory.unwrap_or(base.lbfgs_memory),
        ..base
    }
}

fn interior_sampling(cfg: &RunConfig) -> Option<Sampling> {
    if let Some(n) = cfg.geometry.interior_random {
        return Some(Sampling::Random { n, seed: cfg.seed + 9000 });
    }
    cfg.geometry.interior.as_ref().map(|c| Sampling::cells(c))
}

/// Runs one benchmark to completion and collects its artifacts in
/// memory; writes nothing.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let info = registry_entry(&cfg.problem).ok_or_else(|| {
        CliError::config(format!(
            "unknown problem `{}`; see `list-benchmarks`",
            cfg.problem
        ))
    })?;
    let method = parse_method(cfg, info)?;
    let schedule = effective_schedule(cfg, method);
    let t0 = Instant::now();
    let mut out = match info.family {
        "elasticity" => run_elastic(cfg, &schedule)?,
        "dynamics" => run_wave(cfg, &schedule)?,
        "hyperelasticity" => run_cuboid(cfg, &schedule)?,
        "phasefield" => {
            if cfg.problem == "sent" {
                run_sent(cfg, &schedule)?
            } else {
                run_pf1d(cfg, method, &schedule)?
            }
        }
        "piezo" => run_piezo(cfg, &schedule)?,
        "plate" => run_plate(cfg, method, &schedule)?,
        other => return Err(CliError::config(format!("unhandled family `{other}`"))),
    };
    out.summary.schema_version = SUMMARY_SCHEMA_VERSION;
    out.summary.problem = cfg.problem.clone();
    out.summary.method = method.into();
    out.summary.seed = cfg.seed;
    out.summary.wall_secs = t0.elapsed().as_secs_f64();
    Ok(out)
}

fn blank_summary() -> RunSummary {
    RunSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        problem: String::new(),
        method: String::new(),
        seed: 0,
        loss: f64::NAN,
        wall_secs: 0.0,
        rel_l2: Vec::new(),
        energy_rel_error: None,
        probes: Vec::new(),
    }
}

fn merge_report(summary: &mut RunSummary, report: &ErrorReport) {
    summary.rel_l2 = report.rel_l2.clone();
    summary.energy_rel_error = report.energy_rel_error;
    summary
        .probes
        .extend(report.probes.iter().cloned());
}

fn train_err(e: crate::bvp::TrainError) -> CliError {
    CliError::training(e.to_string())
}

fn run_elastic(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::elasticity::*;
    let mut ecfg = ElasticConfig {
        seed: cfg.seed,
        paper_scale: cfg.geometry.paper_scale,
        interior: interior_sampling(cfg),
        n_bound: cfg.geometry.n_boundary,
        ..Default::default()
    };
    if cfg.network.hidden.is_some() || cfg.network.activation.is_some() || cfg.material.e.is_some()
    {
        return Err(CliError::config(
            "the elasticity benchmarks fix their network and material; override geometry and schedule only",
        ));
    }
    ecfg.seed = cfg.seed;
    // The 3D pressure problems train on resampled quadrature (see
    // `train_elastic_resampled`); a short quasi-Newton polish on the
    // fixed grid follows. The 2D problems are fine on fixed grids.
    let (b, outcome) = if matches!(cfg.problem.as_str(), "hollow_sphere" | "cube_hole") {
        let seg = 25;
        let segments = schedule.adam_steps.div_ceil(seg);
        let (mut b, mut outcome) =
            train_elastic_resampled(&cfg.problem, &ecfg, segments, seg, schedule.adam_lr)
                .map_err(CliError::training)?;
        if schedule.lbfgs_steps > 0 {
            let polish = Schedule { adam_steps: 0, ..*schedule };
            let o2 = b.train(&polish).map_err(train_err)?;
            let offset = segments * seg;
            outcome.history.extend(o2.history.into_iter().map(|mut h| {
                h.iter += offset;
                h
            }));
            outcome.loss = o2.loss;
            outcome.lbfgs_status = o2.lbfgs_status;
        }
        (b, outcome)
    } else {
        let mut b = build_elastic_benchmark(&cfg.problem, &ecfg).map_err(CliError::config)?;
        let outcome = b.train(schedule).map_err(train_err)?;
        (b, outcome)
    };
    let report = b.evaluate();
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    merge_report(&mut summary, &report);

    let pts = b.pred.points.clone();
    let field = b.predict(&pts);
    let mut rows = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let mut row = vec![p[0], p[1], p[2]];
        for k in 0..3 {
            row.push(field.u.get(k).map_or(0.0, |c| c[i]));
        }
        row.push(field.psi[i]);
        let o = (b.oracle)(*p);
        row.extend([o.u[0], o.u[1], o.u[2], o.psi]);
        rows.push(row);
    }
    Ok(RunOutput {
        summary,
        field_header: "x,y,z,u,v,w,psi,u_ref,v_ref,w_ref,psi_ref".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_wave(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::dynamics::*;
    let mut wcfg = WaveConfig { seed: cfg.seed, ..Default::default() };
    if cfg.geometry.paper_scale {
        wcfg = WaveConfig { seed: cfg.seed, ..WaveConfig::paper_scale() };
    }
    if let Some(c) = &cfg.geometry.interior {
        let c = if c.len() == 1 { [c[0], c[0]] } else { [c[0], c[1]] };
        wcfg.n_int = c;
    }
    if let Some(nb) = cfg.geometry.n_boundary {
        wcfg.n_bnd = nb;
        wcfg.n_init = nb;
    }
    let mut b = build_wave_benchmark(&wcfg);
    let outcome = b.problem.train(schedule).map_err(train_err)?;
    let reference = default_wave_reference(&wcfg);
    let report = b.evaluate(&reference);
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    merge_report(&mut summary, &report);

    let n = 50;
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 + 0.5) / n as f64 * wcfg.l;
            let t = (j as f64 + 0.5) / n as f64 * wcfg.t_final;
            pts.push([x, t, 0.0]);
        }
    }
    let (u, v) = b.predict(&pts);
    let rows = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                p[0],
                p[1],
                u[i],
                v[i],
                reference.eval_u(p[0], p[1]),
                reference.eval_v(p[0], p[1]),
            ]
        })
        .collect();
    Ok(RunOutput {
        summary,
        field_header: "x,t,u,v,u_ref,v_ref".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_cuboid(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::hyper::*;
    let mut hcfg = HyperConfig { seed: cfg.seed, ..Default::default() };
    if let Some(c) = &cfg.geometry.interior {
        hcfg.n = c[0];
    }
    let mut b = build_hyper_benchmark(&hcfg);
    let outcome = b.train(schedule).map_err(train_err)?;
    let (l2, h1) = b.norms();
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    summary.probes = vec![("u_l2_norm".into(), l2), ("u_h1_seminorm".into(), h1)];

    let pts = b.interior.points.clone();
    let disp = b.predict_displacement(&pts);
    let rows = pts
        .iter()
        .zip(&disp)
        .map(|(p, u)| vec![p[0], p[1], p[2], u[0], u[1], u[2]])
        .collect();
    Ok(RunOutput {
        summary,
        field_header: "x,y,z,u,v,w".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_pf1d(cfg: &RunConfig, method: &str, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::phasefield::*;
    let m = if method == "dem" { PfMethod::Dem } else { PfMethod::Dcm };
    let mut pcfg = Bar1dConfig { seed: cfg.seed, ..Default::default() };
    if let Some(h) = &cfg.network.hidden {
        pcfg.hidden = h.clone();
    }
    if let Some(c) = &cfg.geometry.interior {
        pcfg.n_points = c[0];
    }
    let mut b = build_1d_problem(m, &pcfg);
    let outcome = b.train(schedule).map_err(train_err)?;
    let rel = b.evaluate(10001);
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    summary.rel_l2 = vec![("phi".into(), rel)];

    let xs: Vec<f64> = (0..=1000).map(|i| i as f64 * BAR_LEN_1D / 1000.0).collect();
    let phi = b.predict(&xs);
    let l0 = FractureMaterial::bar_1d().l0;
    let rows = xs
        .iter()
        .zip(&phi)
        .map(|(&x, &p)| vec![x, p, phi_oracle_1d(x, CRACK_POS_1D, l0)])
        .collect();
    Ok(RunOutput {
        summary,
        field_header: "x,phi,phi_ref".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_sent(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::phasefield::*;
    let scfg = SentConfig { seed: cfg.seed, ..SentConfig::desk() };
    let mut s = build_sent_problem(&scfg);
    let outcome = s.train(schedule).map_err(train_err)?;
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    let ys: Vec<f64> = (0..=80).map(|i| i as f64 / 80.0).collect();
    let l0 = FractureMaterial::sent().l0;
    for x in [0.1, 0.3] {
        let prof = s.phi_profile(x, &ys);
        let exact: Vec<f64> = ys.iter().map(|&y| phi_oracle_1d(y, 0.5, l0)).collect();
        summary.rel_l2.push((
            format!("phi_profile_x{x}"),
            crate::validation::relative_l2(&prof, &exact),
        ));
    }
    let crack: Vec<[f64; 3]> = (0..=25).map(|i| [i as f64 * 0.02, 0.5, 0.0]).collect();
    let min_phi = s.phi_at(&crack).into_iter().fold(f64::INFINITY, f64::min);
    summary.probes = vec![("min_phi_on_crack".into(), min_phi), ("total_v".into(), s.total_v())];

    let mut rows = Vec::new();
    for i in 0..40 {
        for j in 0..40 {
            let p = [(i as f64 + 0.5) / 40.0, (j as f64 + 0.5) / 40.0, 0.0];
            let phi = s.phi_at(&[p])[0];
            let u = s.displacement_at(&[p])[0];
            rows.push(vec![p[0], p[1], phi, u[0], u[1]]);
        }
    }
    Ok(RunOutput {
        summary,
        field_header: "x,y,phi,u,v".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_piezo(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::piezo::*;
    let mat = PiezoMaterial::pzt_like();
    let mut pcfg = PiezoConfig { seed: cfg.seed, ..PiezoConfig::desk() };
    if let Some(h) = &cfg.network.hidden {
        pcfg.hidden = h.clone();
    }
    let case = if cfg.problem == "piezo_mechanical" {
        LoadCase::Mechanical
    } else {
        LoadCase::Electrical
    };
    let mut b = build_cantilever(case, &mat, &pcfg);
    let outcome = b.train(schedule).map_err(train_err)?;
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    summary.probes =
        vec![("tip_deflection".into(), b.tip_deflection()), ("top_potential".into(), b.top_potential())];

    let mut rows = Vec::new();
    for i in 0..40 {
        for j in 0..8 {
            let p = [
                (i as f64 + 0.5) / 40.0 * pcfg.length,
                (j as f64 + 0.5) / 8.0 * pcfg.height,
                0.0,
            ];
            let f = b.predict(&[p])[0];
            rows.push(vec![p[0], p[1], f[0], f[1], f[2]]);
        }
    }
    Ok(RunOutput {
        summary,
        field_header: "x,y,u,v,theta".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

fn run_plate(cfg: &RunConfig, method: &str, schedule: &Schedule) -> Result<RunOutput, CliError> {
    use crate::plate::*;
    let bench = PlateBench::parse(&cfg.problem)
        .ok_or_else(|| CliError::config(format!("unknown plate benchmark `{}`", cfg.problem)))?;
    let m = if method == "dem" { PlateMethod::Dem } else { PlateMethod::Dcm };
    let mut pcfg = PlateConfig { seed: cfg.seed, ..Default::default() };
    if let Some(h) = &cfg.network.hidden {
        pcfg.hidden = h.clone();
    }
    if let Some(a) = parse_activation(cfg)? {
        pcfg.activation = a;
    }
    if let Some(c) = &cfg.geometry.interior {
        pcfg.interior = Some(Sampling::cells(c));
    }
    if let Some(n) = cfg.geometry.interior_random {
        pcfg.interior = Some(Sampling::Random { n, seed: cfg.seed + 500 });
    }
    if let Some(nb) = cfg.geometry.n_boundary {
        pcfg.n_boundary = nb;
    }
    let mut mat = bench.material();
    if let Some(k) = cfg.material.k_w {
        mat.k_w = k;
    }
    if let Some(nu) = cfg.material.nu {
        mat.nu = nu;
    }
    let mut b = build_plate(bench, m, &mat, &pcfg);
    let outcome = b.train(schedule).map_err(train_err)?;
    let rep = b.evaluate();
    let mut summary = blank_summary();
    summary.loss = outcome.loss;
    summary.rel_l2 = vec![("w".into(), rep.rel_l2)];
    summary.probes = vec![
        ("probe_deflection".into(), rep.probe_pred),
        ("probe_deflection_ref".into(), rep.probe_exact),
        ("probe_rel_err".into(), rep.probe_rel_err),
    ];

    let pts = b.eval_points();
    let pred = b.predict(&pts);
    let rows = pts
        .iter()
        .zip(&pred)
        .map(|(p, &w)| vec![p[0], p[1], w, b.oracle_at(*p)])
        .collect();
    Ok(RunOutput {
        summary,
        field_header: "x,y,w,w_ref".into(),
        field_rows: rows,
        history: outcome.history,
    })
}

// ---------------------------------------------------------------------------
// artifacts
// ---------------------------------------------------------------------------

pub fn write_artifacts(dir: &Path, out: &RunOutput) -> Result<(), CliError> {
    use std::io::Write;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let io_err = |e: std::io::Error| CliError::io(e.to_string());

    let json = serde_json::to_string_pretty(&out.summary).unwrap();
    std::fs::write(dir.join("summary.json"), json + "\n").map_err(io_err)?;

    let mut f = std::fs::File::create(dir.join("field.csv")).map_err(io_err)?;
    writeln!(f, "{}", out.field_header).map_err(io_err)?;
    for row in &out.field_rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(f, "{}", line.join(",")).map_err(io_err)?;
    }

    let mut f = std::fs::File::create(dir.join("loss_history.csv")).map_err(io_err)?;
    writeln!(f, "phase,iter,loss,grad_inf").map_err(io_err)?;
    for h in &out.history {
        writeln!(f, "{},{},{},{}", h.phase.name(), h.iter, h.loss, h.grad_inf).map_err(io_err)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub seed: u64,
    pub rel_l2: f64,
    pub probe: f64,
    pub wall_secs: f64,
}

fn apply_axis(cfg: &mut RunConfig, axis: &str, value: &str) -> Result<(), CliError> {
    match axis {
        "layers" => {
            let n: usize = value
                .parse()
                .map_err(|_| CliError::config(format!("layers value `{value}` is not a count")))?;
            let width = cfg.network.hidden.as_ref().and_then(|h| h.first().copied()).unwrap_or(30);
            cfg.network.hidden = Some(vec![width; n]);
        }
        "neurons" => {
            let n: usize = value
                .parse()
                .map_err(|_| CliError::config(format!("neurons value `{value}` is not a count")))?;
            let depth = cfg.network.hidden.as_ref().map(|h| h.len()).unwrap_or(3);
            cfg.network.hidden = Some(vec![n; depth]);
        }
        "points" => {
            let n: usize = value
                .parse()
                .map_err(|_| CliError::config(format!("points value `{value}` is not a count")))?;
            cfg.geometry.interior = Some(vec![n]);
        }
        "activation" => {
            cfg.network.activation = Some(value.to_string());
        }
        other => {
            return Err(CliError::config(format!(
                "unknown sweep axis `{other}` (layers, neurons, points, activation)"
            )))
        }
    }
    Ok(())
}

/// Worker thread budget: `DEMNET_THREADS`, default 1. Each run is
/// internally single-threaded and deterministic; the budget only
/// controls how many sweep cells run concurrently.
pub fn thread_budget() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// One run per (value, seed) pair; the per-cell output directories (if
/// `out` is set) are `<out>/<axis>_<value>_seed<seed>`.
pub fn sweep(
    base: &RunConfig,
    axis: &str,
    values: &[String],
    seeds: &[u64],
) -> Result<Vec<SweepRow>, CliError> {
    let mut cells = Vec::new();
    for value in values {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.seed = seed;
            apply_axis(&mut cfg, axis, value)?;
            if let Some(out) = &base.out {
                cfg.out = Some(format!("{out}/{axis}_{value}_seed{seed}"));
            }
            cells.push((value.clone(), seed, cfg));
        }
    }
    let budget = thread_budget();
    let mut rows = vec![None; cells.len()];
    for chunk_start in (0..cells.len()).step_by(budget) {
        let chunk_end = (chunk_start + budget).min(cells.len());
        let results: Vec<Result<SweepRow, CliError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = cells[chunk_start..chunk_end]
                .iter()
                .map(|(value, seed, cfg)| {
                    let axis = axis.to_string();
                    scope.spawn(move || -> Result<SweepRow, CliError> {
                        let out = run(cfg)?;
                        if let Some(dir) = &cfg.out {
                            write_artifacts(Path::new(dir), &out)?;
                        }
                        Ok(SweepRow {
                            axis,
                            value: value.clone(),
                            seed: *seed,
                            rel_l2: out.summary.rel_l2.first().map_or(f64::NAN, |r| r.1),
                            probe: out.summary.probes.first().map_or(f64::NAN, |p| p.1),
                            wall_secs: out.summary.wall_secs,
                        })
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        });
        for (i, r) in results.into_iter().enumerate() {
            rows[chunk_start + i] = Some(r?);
        }
    }
    Ok(rows.into_iter().map(Option::unwrap).collect())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    use std::io::Write;
    let io_err = |e: std::io::Error| CliError::io(e.to_string());
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    writeln!(f, "axis,value,seed,rel_l2,probe,wall_secs").map_err(io_err)?;
    for r in rows {
        writeln!(f, "{},{},{},{},{},{}", r.axis, r.value, r.seed, r.rel_l2, r.probe, r.wall_secs)
            .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_fourteen_run_targets() {
        let reg = benchmark_registry();
        assert_eq!(reg.len(), 14);
        let mut names: Vec<_> = reg.iter().map(|b| b.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 14, "duplicate names");
        for b in reg {
            assert!(b.methods.contains(&b.default_method));
            assert!(!b.reference.is_empty() && !b.oracle.is_empty());
        }
    }

    #[test]
    fn registry_serializes_to_json() {
        let s = serde_json::to_string(benchmark_registry()).unwrap();
        assert!(s.contains("thick_cylinder"));
        assert!(s.contains("annular_ss_free"));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = RunConfig::from_toml_str("problem = \"wave_1d\"\nbogus = 3\n").unwrap_err();
        assert_eq!(err.kind, "config");
        assert!(err.message.contains("bogus"), "{}", err.message);
        let err =
            RunConfig::from_toml_str("problem = \"wave_1d\"\n[network]\nwidth = 3\n").unwrap_err();
        assert!(err.message.contains("width"), "{}", err.message);
    }

    #[test]
    fn config_parses_full_schema() {
        let cfg = RunConfig::from_toml_str(
            r#"
problem = "winkler_ss_square"
method = "dcm"
seed = 3
out = "out/w"
[network]
hidden = [20, 20]
activation = "tanh"
[schedule]
adam_steps = 10
adam_lr = 1e-3
lbfgs_steps = 5
lbfgs_memory = 10
[geometry]
interior = [31, 31]
n_boundary = 40
[material]
k_w = 100.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.problem, "winkler_ss_square");
        assert_eq!(cfg.network.hidden.as_deref(), Some(&[20, 20][..]));
        let sched = effective_schedule(&cfg, "dcm");
        assert_eq!(sched.adam_steps, 10);
        assert_eq!(sched.lbfgs_steps, 5);
        assert_eq!(sched.lbfgs_memory, 10);
    }

    #[test]
    fn unknown_problem_and_bad_method_are_config_errors() {
        let cfg = RunConfig { problem: "nonsense".into(), ..Default::default() };
        assert_eq!(run(&cfg).unwrap_err().kind, "config");
        let cfg = RunConfig {
            problem: "thick_cylinder".into(),
            method: Some("dcm".into()),
            ..Default::default()
        };
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.kind, "config");
        assert!(err.message.contains("dcm"), "{}", err.message);
    }

    #[test]
    fn zero_schedule_run_is_deterministic_and_writes_artifacts() {
        let mut cfg = RunConfig {
            problem: "phasefield_1d".into(),
            method: Some("dem".into()),
            seed: 1,
            ..Default::default()
        };
        cfg.schedule.adam_steps = Some(0);
        cfg.schedule.lbfgs_steps = Some(0);
        cfg.geometry.interior = Some(vec![200]);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.field_rows, b.field_rows, "untrained field must be deterministic");
        assert!(a.history.is_empty());

        let dir = std::env::temp_dir().join("demnet_cli_test_artifacts");
        let _ = std::fs::remove_dir_all(&dir);
        write_artifacts(&dir, &a).unwrap();
        let summary = std::fs::read_to_string(dir.join("summary.json")).unwrap();
        assert!(summary.contains("\"schema_version\": 1"));
        assert!(summary.contains("phasefield_1d"));
        let field = std::fs::read_to_string(dir.join("field.csv")).unwrap();
        assert!(field.starts_with("x,phi,phi_ref\n"));
        let hist = std::fs::read_to_string(dir.join("loss_history.csv")).unwrap();
        assert_eq!(hist.trim(), "phase,iter,loss,grad_inf");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sweep_single_value_matches_run() {
        let mut cfg = RunConfig {
            problem: "phasefield_1d".into(),
            method: Some("dcm".into()),
            seed: 2,
            ..Default::default()
        };
        cfg.schedule.adam_steps = Some(0);
        cfg.schedule.lbfgs_steps = Some(0);
        cfg.geometry.interior = Some(vec![100]);
        let rows = sweep(&cfg, "neurons", &["12".into()], &[2]).unwrap();
        assert_eq!(rows.len(), 1);
        let mut direct = cfg.clone();
        direct.network.hidden = Some(vec![12, 12, 12]);
        let out = run(&direct).unwrap();
        assert_eq!(rows[0].rel_l2, out.summary.rel_l2[0].1);
    }

    #[test]
    fn sweep_axis_overrides() {
        let mut cfg = RunConfig::default();
        apply_axis(&mut cfg, "layers", "4").unwrap();
        assert_eq!(cfg.network.hidden.as_deref(), Some(&[30, 30, 30, 30][..]));
        apply_axis(&mut cfg, "neurons", "10").unwrap();
        assert_eq!(cfg.network.hidden.as_deref(), Some(&[10, 10, 10, 10][..]));
        apply_axis(&mut cfg, "activation", "sin_half_pi").unwrap();
        assert_eq!(cfg.network.activation.as_deref(), Some("sin_half_pi"));
        apply_axis(&mut cfg, "points", "25").unwrap();
        assert_eq!(cfg.geometry.interior.as_deref(), Some(&[25][..]));
        assert!(apply_axis(&mut cfg, "banana", "1").is_err());
    }
}
