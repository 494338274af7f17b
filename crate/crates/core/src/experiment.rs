//! Configured, reproducible experiment runs with JSON reports, CSV plot data
//! and a checksummed manifest.
//!
//! A config is a JSON object; every leaf can be overridden with a dotted path
//! (`t_schedule=[0.1,0.05]`, `space.samples=512`). Only `space` is required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::embed::{
    bilipschitz_report, choose_truncation, embedding, smoothable_set, DistortionReport, Normalization, Truncation,
};
use crate::error::{invalid, Result};
use crate::harmonic::{
    eigenmap, harmonic_flow, takahashi_check, trace_csv, FlowOptions, SphereMap, TakahashiOptions,
};
use crate::ks::ks_compare;
use crate::maps::{normalized_energy, upper_gradient_estimate, validate_schedule, AnalyticMap, PointMap};
use crate::space::{build_from_mesh, build_model_space, Mesh, ModelKind, SpectralSpace, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    Embed,
    EmbedDistortion,
    Bilipschitz,
    Energy,
    KsCompare,
    HarmonicFlow,
    Takahashi,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Embed => "embed",
            ExperimentKind::EmbedDistortion => "embed-distortion",
            ExperimentKind::Bilipschitz => "bilipschitz",
            ExperimentKind::Energy => "energy",
            ExperimentKind::KsCompare => "ks-compare",
            ExperimentKind::HarmonicFlow => "harmonic-flow",
            ExperimentKind::Takahashi => "takahashi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshSpec {
    Icosphere {
        level: usize,
        #[serde(default)]
        relaxed: bool,
    },
    Torus {
        nx: usize,
        ny: usize,
        a: f64,
        b: f64,
    },
    /// OFF or OBJ file, relative to the config file.
    File { path: PathBuf },
}

/// Exactly one of `model`, `mesh` or `document`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSpec>,
    /// A saved [`crate::space::SpaceDocument`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl SpaceSpec {
    fn build(&self, field: &str, base: &Path) -> Result<SpectralSpace> {
        let given = [self.model.is_some(), self.mesh.is_some(), self.document.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(invalid(field, "give exactly one of `model`, `mesh` or `document`"));
        }
        let cutoff = || {
            self.cutoff
                .ok_or_else(|| invalid(&format!("{field}.cutoff"), "required for model and mesh spaces"))
        };
        if let Some(kind) = &self.model {
            let samples = self
                .samples
                .ok_or_else(|| invalid(&format!("{field}.samples"), "required for model spaces"))?;
            return build_model_space(kind.clone(), samples, cutoff()?);
        }
        if let Some(mesh) = &self.mesh {
            let mesh = match mesh {
                MeshSpec::Icosphere { level, relaxed: false } => Mesh::icosphere(*level),
                MeshSpec::Icosphere { level, relaxed: true } => Mesh::relaxed_icosphere(*level),
                MeshSpec::Torus { nx, ny, a, b } => Mesh::flat_torus(*nx, *ny, *a, *b)?,
                MeshSpec::File { path } => Mesh::read(base.join(path))?,
            };
            return build_from_mesh(mesh, cutoff()?);
        }
        let path = self.document.as_ref().expect("checked above");
        SpectralSpace::load_json(base.join(path))
    }
}

/// Sphere-valued map for `flow` and `takahashi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereMapSpec {
    /// Ambient positions of a space lying on a unit sphere.
    Position,
    CirclePower { degree: i32 },
    Eigenmap {
        lambda: f64,
        k: usize,
        #[serde(default = "default_eigenmap_threshold")]
        threshold: f64,
    },
}

fn default_eigenmap_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothableSpec {
    pub epsilon: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_flow_tol")]
    pub tol: f64,
    /// Amplitude of seeded tangent noise added to the initial map.
    #[serde(default)]
    pub noise: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self {
            eta: None,
            max_steps: default_max_steps(),
            tol: default_flow_tol(),
            noise: 0.0,
        }
    }
}

fn default_max_steps() -> usize {
    5000
}

fn default_flow_tol() -> f64 {
    1e-6
}

/// Overrides for the Takahashi tolerances; unset fields keep the defaults of
/// [`TakahashiOptions::for_space`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TakahashiSpec {
    #[serde(default)]
    pub eigen_tol: Option<f64>,
    #[serde(default)]
    pub isometry_tol: Option<f64>,
    #[serde(default)]
    pub density_tol: Option<f64>,
    #[serde(default)]
    pub target_samples: Option<usize>,
    #[serde(default)]
    pub target_cutoff: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub space: SpaceSpec,
    /// Target of `energy` and `ks`; defaults to the source space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SpaceSpec>,
    #[serde(default = "default_map")]
    pub map: AnalyticMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_map: Option<SphereMapSpec>,
    #[serde(default = "default_t_schedule")]
    pub t_schedule: Vec<f64>,
    #[serde(default = "default_r_schedule")]
    pub r_schedule: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    /// Finite `L^p` exponents reported next to `L^∞`.
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothable: Option<SmoothableSpec>,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub takahashi: TakahashiSpec,
}

fn default_map() -> AnalyticMap {
    AnalyticMap::Identity
}

fn default_t_schedule() -> Vec<f64> {
    vec![0.04, 0.02, 0.01]
}

fn default_r_schedule() -> Vec<f64> {
    vec![0.4, 0.3, 0.2]
}

fn default_delta() -> f64 {
    1e-8
}

fn default_normalization() -> Normalization {
    Normalization::A
}

fn default_exponents() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_tolerance() -> f64 {
    0.05
}

fn default_pairs() -> usize {
    2000
}

fn default_rho() -> f64 {
    0.1
}

/// Set the leaf at a dotted `path` to `raw`, parsed as JSON when possible and
/// kept as a string otherwise. Missing intermediate objects are created.
pub fn apply_override(config: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = config;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        if key.is_empty() {
            return Err(invalid(path, "empty path segment"));
        }
        let Value::Object(map) = node else {
            return Err(invalid(path, format!("`{key}` is not inside an object")));
        };
        if parts.peek().is_none() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parse `text` after applying `key=value` overrides.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for o in overrides {
            let (path, raw) = o
                .split_once('=')
                .ok_or_else(|| invalid("--set", format!("expected key=value, got `{o}`")))?;
            apply_override(&mut value, path.trim(), raw.trim())?;
        }
        let config: Self = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        validate_schedule("t_schedule", &self.t_schedule)?;
        validate_schedule("r_schedule", &self.r_schedule)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        positive("delta", self.delta)?;
        positive("tolerance", self.tolerance)?;
        positive("rho", self.rho)?;
        positive("flow.tol", self.flow.tol)?;
        if self.pairs == 0 {
            return Err(invalid("pairs", "must be positive"));
        }
        if self.exponents.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return Err(invalid("exponents", "finite exponents must be at least 1"));
        }
        if !(self.flow.noise >= 0.0 && self.flow.noise.is_finite()) {
            return Err(invalid("flow.noise", "must be non-negative"));
        }
        if let Some(s) = &self.smoothable {
            positive("smoothable.epsilon", s.epsilon)?;
            positive("smoothable.tau", s.tau)?;
        }
        Ok(())
    }
}

/// Outcome of a run that produced its artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// 0 on pass, 2 on a failed verdict.
    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    experiment: &'a str,
    seed: u64,
    verdict: Verdict,
    result: T,
}

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    space_schema: u32,
    experiment: &'a str,
    seed: u64,
    verdict: Verdict,
    config: &'a ExperimentConfig,
    files: Vec<ManifestFile>,
}

struct Artifacts {
    kind: ExperimentKind,
    seed: u64,
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn new(kind: ExperimentKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            files: BTreeMap::new(),
        }
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    fn report(&mut self, verdict: Verdict, result: impl Serialize) -> Result<Verdict> {
        let envelope = Envelope {
            experiment: self.kind.name(),
            seed: self.seed,
            verdict,
            result,
        };
        self.json("report.json", &envelope)?;
        Ok(verdict)
    }

    fn text(&mut self, name: &str, text: String) {
        self.files.insert(name.to_string(), text.into_bytes());
    }
}

/// Run `kind` under `config`, writing artifacts and `manifest.json` into `out`.
/// Relative paths in the config resolve against `base`.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig, base: &Path, out: &Path) -> Result<Verdict> {
    if let Some(k) = config.experiment {
        if k != kind {
            return Err(invalid(
                "experiment",
                format!("config names `{}` but `{}` was requested", k.name(), kind.name()),
            ));
        }
    }
    config.validate()?;
    let mut art = Artifacts::new(kind, config.seed);
    let source = config.space.build("space", base)?;
    let verdict = match kind {
        ExperimentKind::Spectrum => spectrum(&source, &mut art)?,
        ExperimentKind::Embed => embed(&source, config, &mut art)?,
        ExperimentKind::EmbedDistortion => distortion(&source, config, &mut art)?,
        ExperimentKind::Bilipschitz => bilip(&source, config, &mut art)?,
        ExperimentKind::Energy | ExperimentKind::KsCompare => {
            let target = match &config.target {
                Some(spec) => Some(spec.build("target", base)?),
                None => None,
            };
            let target = target.as_ref().unwrap_or(&source);
            let f = PointMap::analytic(&source, target, config.map.clone())?;
            if kind == ExperimentKind::Energy {
                energy(&f, config, &mut art)?
            } else {
                ks(&f, config, &mut art)?
            }
        }
        ExperimentKind::HarmonicFlow => flow(&source, config, &mut art)?,
        ExperimentKind::Takahashi => takahashi(&source, config, &mut art)?,
    };

    std::fs::create_dir_all(out)?;
    let mut files = Vec::with_capacity(art.files.len());
    for (name, bytes) in &art.files {
        std::fs::write(out.join(name), bytes)?;
        files.push(ManifestFile {
            name: name.clone(),
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        space_schema: SCHEMA_VERSION,
        experiment: kind.name(),
        seed: config.seed,
        verdict,
        config,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(out.join("manifest.json"), bytes)?;
    Ok(verdict)
}

#[derive(Serialize)]
struct Cluster {
    start: usize,
    end: usize,
    eigenvalue: f64,
}

#[derive(Serialize)]
struct SpectrumResult<'a> {
    space_id: &'a str,
    intrinsic_dim: usize,
    samples: usize,
    cutoff: usize,
    total_measure: f64,
    diameter_bound: f64,
    spacing: f64,
    eigenvalues: &'a [f64],
    clusters: Vec<Cluster>,
    orthonormality_residual: f64,
    solver_iterations: usize,
    solver_residual: f64,
}

fn spectrum(space: &SpectralSpace, art: &mut Artifacts) -> Result<Verdict> {
    let (solver_iterations, solver_residual) = space.solver_diagnostics();
    let mut csv = String::from("index,eigenvalue\n");
    for (i, l) in space.eigenvalues().iter().enumerate() {
        writeln!(csv, "{i},{l}").expect("string write");
    }
    art.text("eigenvalues.csv", csv);
    art.json("space.json", &space.to_document())?;
    let clusters = space
        .clusters()
        .into_iter()
        .map(|r| Cluster {
            start: r.start,
            end: r.end,
            eigenvalue: space.eigenvalues()[r.start],
        })
        .collect();
    art.report(
        Verdict::Pass,
        SpectrumResult {
            space_id: space.id(),
            intrinsic_dim: space.intrinsic_dim(),
            samples: space.sample_count(),
            cutoff: space.cutoff(),
            total_measure: space.total_measure(),
            diameter_bound: space.diameter_bound(),
            spacing: space.spacing(),
            eigenvalues: space.eigenvalues(),
            clusters,
            orthonormality_residual: space.orthonormality_residual(),
            solver_iterations,
            solver_residual,
        },
    )
}

#[derive(Serialize)]
struct TruncationRow {
    t: f64,
    #[serde(flatten)]
    truncation: Truncation,
}

fn embed(space: &SpectralSpace, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let rows = config
        .t_schedule
        .iter()
        .map(|&t| choose_truncation(space, t, config.delta).map(|truncation| TruncationRow { t, truncation }))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("t,l,tail,beyond_cutoff\n");
    for r in &rows {
        writeln!(csv, "{},{},{},{}", r.t, r.truncation.l, r.truncation.tail, r.truncation.beyond_cutoff)
            .expect("string write");
    }
    art.text("truncation.csv", csv);

    // coordinates at the finest scale
    let finest = rows.last().expect("validated schedule");
    let l = finest.truncation.l;
    let coords = embedding(space, finest.t, l)?;
    let mut csv = String::from("sample");
    for i in 1..=l {
        write!(csv, ",x{i}").expect("string write");
    }
    csv.push('\n');
    for (p, row) in coords.chunks(l).enumerate() {
        write!(csv, "{p}").expect("string write");
        for v in row {
            write!(csv, ",{v}").expect("string write");
        }
        csv.push('\n');
    }
    art.text("embedding.csv", csv);
    art.report(Verdict::Pass, rows)
}

fn exponent_label(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("l{}", p as i64)
    } else {
        format!("l{p}")
    }
}

fn distortion(space: &SpectralSpace, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let mut reports = Vec::with_capacity(config.t_schedule.len());
    for &t in &config.t_schedule {
        let mut r = DistortionReport::compute(space, t, config.delta, config.normalization, &config.exponents, false)?;
        if let Some(s) = &config.smoothable {
            r.smoothable_fraction = Some(smoothable_set(space, s.epsilon, t, s.tau, None)?.fraction);
        }
        reports.push(r);
    }
    let mut csv = String::from("t,l");
    for &p in &config.exponents {
        write!(csv, ",{}", exponent_label(p)).expect("string write");
    }
    csv.push_str(",linf");
    if config.smoothable.is_some() {
        csv.push_str(",smoothable_fraction");
    }
    csv.push('\n');
    for r in &reports {
        write!(csv, "{},{}", r.t, r.l).expect("string write");
        for &p in &config.exponents {
            write!(csv, ",{}", r.norm(p).expect("requested exponent")).expect("string write");
        }
        write!(csv, ",{}", r.linf).expect("string write");
        if let Some(f) = r.smoothable_fraction {
            write!(csv, ",{f}").expect("string write");
        }
        csv.push('\n');
    }
    art.text("distortion.csv", csv);
    art.report(Verdict::Pass, reports)
}

fn bilip(space: &SpectralSpace, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let mut reports = Vec::with_capacity(config.t_schedule.len());
    let mut csv = String::from("t,l,local_min,local_max,global_min,global_max,injectivity_proxy\n");
    for &t in &config.t_schedule {
        let l = choose_truncation(space, t, config.delta)?.l;
        let r = bilipschitz_report(space, t, l, config.rho, config.pairs, config.seed)?;
        let proxy = r.injectivity_proxy.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            t, l, r.local.min.ratio, r.local.max.ratio, r.global.min.ratio, r.global.max.ratio, proxy
        )
        .expect("string write");
        reports.push(r);
    }
    art.text("bilip.csv", csv);
    art.report(Verdict::Pass, reports)
}

#[derive(Serialize)]
struct EnergyResult {
    source_id: String,
    target_id: String,
    map: AnalyticMap,
    energy: crate::maps::NormalizedEnergy,
    /// Range of the upper-gradient estimate at the smallest t.
    upper_gradient: (f64, f64),
    /// Range of the exact Lipschitz field.
    lipschitz: Option<(f64, f64)>,
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
}

fn energy(f: &PointMap, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let e = normalized_energy(f, &config.t_schedule, config.delta)?;
    art.text("energy.csv", e.csv());
    let finest = e.entries.last().expect("validated schedule");
    let g = upper_gradient_estimate(f, finest.t, finest.l)?;
    let verdict = Verdict::from_bool(e.bounded_on_schedule);
    art.report(
        verdict,
        EnergyResult {
            source_id: f.source().id().to_string(),
            target_id: f.target().id().to_string(),
            map: config.map.clone(),
            upper_gradient: range(&g.field),
            lipschitz: g.lipschitz.as_deref().map(range),
            energy: e,
        },
    )
}

fn ks(f: &PointMap, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let r = ks_compare(f, &config.t_schedule, &config.r_schedule, config.delta, config.tolerance, false)?;
    art.text("ks.csv", r.csv());
    art.text("energy.csv", r.energy.csv());
    let verdict = Verdict::from_bool(r.pass);
    art.report(verdict, r)
}

fn sphere_map<'a>(space: &'a SpectralSpace, config: &ExperimentConfig) -> Result<SphereMap<'a>> {
    let spec = config.sphere_map.clone().unwrap_or(match space.model_kind() {
        Some(ModelKind::Circle { .. }) => SphereMapSpec::CirclePower { degree: 1 },
        _ => SphereMapSpec::Position,
    });
    let f = match spec {
        SphereMapSpec::Position => SphereMap::position(space)?,
        SphereMapSpec::CirclePower { degree } => SphereMap::circle_power(space, degree)?,
        SphereMapSpec::Eigenmap { lambda, k, threshold } => eigenmap(space, lambda, k, threshold)?.map,
    };
    if config.flow.noise == 0.0 {
        return Ok(f);
    }
    // seeded tangent noise
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k1 = f.k() + 1;
    let mut values = f.values().to_vec();
    for row in values.chunks_mut(k1) {
        let xi: Vec<f64> = (0..k1).map(|_| StandardNormal.sample(&mut rng)).collect();
        let radial: f64 = xi.iter().zip(row.iter()).map(|(a, b)| a * b).sum();
        for (v, x) in row.iter_mut().zip(&xi) {
            *v += config.flow.noise * (x - radial * *v);
        }
    }
    SphereMap::new(space, f.k(), values)
}

#[derive(Serialize)]
struct FlowResultSummary {
    source_id: String,
    k: usize,
    steps: usize,
    converged: bool,
    initial_energy: f64,
    final_energy: f64,
    final_residual: f64,
    initial_eta: f64,
    final_eta: f64,
}

fn flow(space: &SpectralSpace, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let f0 = sphere_map(space, config)?;
    let out = harmonic_flow(
        &f0,
        FlowOptions {
            eta: config.flow.eta,
            max_steps: config.flow.max_steps,
            tol: config.flow.tol,
        },
    )?;
    art.text("trace.csv", trace_csv(&out.trace));
    art.json("map.json", &out.map.document())?;
    let first = out.trace.first().expect("initial entry");
    let last = out.trace.last().expect("initial entry");
    art.report(
        Verdict::from_bool(out.converged),
        FlowResultSummary {
            source_id: space.id().to_string(),
            k: out.map.k(),
            steps: last.step,
            converged: out.converged,
            initial_energy: first.energy,
            final_energy: last.energy,
            final_residual: last.residual,
            initial_eta: first.eta,
            final_eta: last.eta,
        },
    )
}

fn takahashi(space: &SpectralSpace, config: &ExperimentConfig, art: &mut Artifacts) -> Result<Verdict> {
    let f = sphere_map(space, config)?;
    let mut options = TakahashiOptions::for_space(space);
    let t = &config.takahashi;
    options.eigen_tol = t.eigen_tol.unwrap_or(options.eigen_tol);
    options.isometry_tol = t.isometry_tol.unwrap_or(options.isometry_tol);
    options.density_tol = t.density_tol.unwrap_or(options.density_tol);
    options.target_samples = t.target_samples.unwrap_or(options.target_samples);
    options.target_cutoff = t.target_cutoff.unwrap_or(options.target_cutoff);
    options.delta = config.delta;
    options.rho = config.rho;
    options.pairs = config.pairs;
    options.seed = config.seed;
    let report = takahashi_check(&f, &config.t_schedule, &options)?;
    art.json("map.json", &f.document())?;
    art.report(Verdict::from_bool(report.pass), report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = r#"{"space": {"model": {"kind": "circle", "radius": 1.0}, "samples": 64, "cutoff": 30}}"#;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse(CIRCLE, &[]).unwrap();
        assert_eq!(c.t_schedule, vec![0.04, 0.02, 0.01]);
        let c = ExperimentConfig::parse(CIRCLE, &["t_schedule=[0.1,0.05]".into(), "space.samples=128".into()]).unwrap();
        assert_eq!(c.t_schedule, vec![0.1, 0.05]);
        assert_eq!(c.space.samples, Some(128));
        let c = ExperimentConfig::parse(CIRCLE, &["normalization=b".into()]).unwrap();
        assert_eq!(c.normalization, Normalization::B);
    }

    #[test]
    fn invalid_fields_are_named() {
        let e = ExperimentConfig::parse(CIRCLE, &["t_schedule=[0.02,-0.01]".into()]).unwrap_err();
        assert!(e.to_string().contains("t_schedule"));
        let e = ExperimentConfig::parse(CIRCLE, &["r_schedule=[0.1,0.2]".into()]).unwrap_err();
        assert!(e.to_string().contains("r_schedule"));
        let e = ExperimentConfig::parse(CIRCLE, &["bogus=1".into()]).unwrap_err();
        assert!(e.to_string().contains("bogus"));
    }

    #[test]
    fn space_spec_needs_one_source() {
        let c = ExperimentConfig::parse(r#"{"space": {"samples": 64, "cutoff": 10}}"#, &[]).unwrap();
        let e = c.space.build("space", Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("space"));
    }

    #[test]
    fn override_paths() {
        let mut v = serde_json::json!({"a": {"b": 1}});
        apply_override(&mut v, "a.c.d", "true").unwrap();
        apply_override(&mut v, "name", "circle").unwrap();
        assert_eq!(v, serde_json::json!({"a": {"b": 1, "c": {"d": true}}, "name": "circle"}));
        assert!(apply_override(&mut v, "a.b.x", "1").is_err());
    }
}
