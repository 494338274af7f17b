//! Maps into round spheres: energy, Euler-Lagrange residual, projected
//! harmonic-map flow, eigenmaps and the Takahashi check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{choose_truncation, DimensionConstants};
use crate::error::{invalid, Error, Result};
use crate::maps::{t_energy, validate_schedule, PointMap};
use crate::space::{build_model_space, weighted_sum, ModelKind, SpectralSpace};

/// A map into the unit sphere `S^k ⊂ R^{k+1}`, one unit row per source sample.
#[derive(Debug, Clone)]
pub struct SphereMap<'a> {
    source: &'a SpectralSpace,
    k: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereMapDocument {
    pub source_id: String,
    pub k: usize,
    /// Row-major `P x (k+1)`.
    pub values: Vec<f64>,
}

impl<'a> SphereMap<'a> {
    /// Rows of `values` (row-major `P x (k+1)`) are renormalized to unit length.
    pub fn new(source: &'a SpectralSpace, k: usize, mut values: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "sphere dimension must be at least 1"));
        }
        if values.len() != source.sample_count() * (k + 1) {
            return Err(invalid("values", format!("expected {} x {} entries", source.sample_count(), k + 1)));
        }
        for (p, row) in values.chunks_mut(k + 1).enumerate() {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(invalid("values", format!("row {p} cannot be normalized")));
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(Self { source, k, values })
    }

    /// Ambient position map of a space whose samples lie on a sphere
    /// (meshed spheres, the circle and the round sphere).
    pub fn position(source: &'a SpectralSpace) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..source.sample_count()).map(|p| source.position(p)).collect();
        let k = rows[0].len() - 1;
        if k == 0 {
            return Err(Error::Unsupported("the interval does not sit on a sphere".into()));
        }
        Self::new(source, k, rows.concat())
    }

    /// `θ ↦ (cos dθ, sin dθ)` on a circle source.
    pub fn circle_power(source: &'a SpectralSpace, degree: i32) -> Result<Self> {
        let Some(ModelKind::Circle { .. }) = source.model_kind() else {
            return Err(Error::Unsupported("circle_power needs a circle source".into()));
        };
        let values = (0..source.sample_count())
            .flat_map(|p| {
                let th = degree as f64 * source.coords(p).expect("model")[0];
                [th.cos(), th.sin()]
            })
            .collect();
        Self::new(source, 1, values)
    }

    pub fn source(&self) -> &'a SpectralSpace {
        self.source
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * (self.k + 1)..(p + 1) * (self.k + 1)]
    }

    /// Coordinate function `f_i` at every sample.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.values.chunks(self.k + 1).map(|r| r[i]).collect()
    }

    pub fn document(&self) -> SphereMapDocument {
        SphereMapDocument {
            source_id: self.source.id().to_string(),
            k: self.k,
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereEnergy {
    pub total: f64,
    pub density: Vec<f64>,
}

/// `e(f) = Σ_i |∇f_i|²` and `½ Σ_p μ_p e(f)(x_p)`.
pub fn sphere_energy(f: &SphereMap) -> SphereEnergy {
    let s = f.source();
    let mut density = vec![0.0; s.sample_count()];
    for i in 0..=f.k() {
        for (d, e) in density.iter_mut().zip(s.dirichlet_density(&f.coordinate(i))) {
            *d += e;
        }
    }
    let total = 0.5 * density.iter().zip(s.mass()).map(|(d, m)| d * m).sum::<f64>();
    SphereEnergy { total, density }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// Row-major `P x (k+1)` vectors `Δ_h f + e(f) f`.
    pub field: Vec<f64>,
    /// `(Σ_p μ_p |r_p|²)^{1/2}`
    pub norm: f64,
}

pub fn el_residual(f: &SphereMap) -> ElResidual {
    let s = f.source();
    let k1 = f.k() + 1;
    let density = sphere_energy(f).density;
    let mut field = vec![0.0; s.sample_count() * k1];
    for i in 0..k1 {
        let lap = s.laplacian(&f.coordinate(i));
        for (p, l) in lap.iter().enumerate() {
            field[p * k1 + i] = l + density[p] * f.values[p * k1 + i];
        }
    }
    let norm = field
        .chunks(k1)
        .zip(s.mass())
        .map(|(r, m)| m * r.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    ElResidual { field, norm }
}

/// Upper estimate of the largest eigenvalue of the operator driving the flow:
/// the top stored eigenvalue on model spaces, a Gershgorin bound on meshes.
pub fn flow_spectral_bound(space: &SpectralSpace) -> f64 {
    match space.mesh_ops() {
        None => space.eigenvalues()[space.cutoff()],
        Some(ops) => (0..space.sample_count())
            .map(|i| ops.stiffness.row(i).map(|(_, v)| v.abs()).sum::<f64>() / ops.mass[i])
            .fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Initial step; defaults to `0.9 / λ_max`.
    pub eta: Option<f64>,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            eta: None,
            max_steps: 5000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowStep {
    pub step: usize,
    pub energy: f64,
    pub residual: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct FlowResult<'a> {
    pub map: SphereMap<'a>,
    /// Step 0 is the initial map.
    pub trace: Vec<FlowStep>,
    pub converged: bool,
}

/// `step,energy,residual,eta` rows.
pub fn trace_csv(trace: &[FlowStep]) -> String {
    let mut out = String::from("step,energy,residual,eta\n");
    for s in trace {
        out.push_str(&format!("{},{},{},{}\n", s.step, s.energy, s.residual, s.eta));
    }
    out
}

/// Projected gradient flow `f ← (f + η Δ_h f) / |f + η Δ_h f|`, halving `η`
/// whenever the energy would increase.
///
/// A step is accepted on the sign of `−½ Σ_i Σ_p μ_p (g_i − f_i)(Δg_i + Δf_i)`,
/// the exact energy change, which stays accurate long after the totals agree
/// to the last bit. Trace energies are the initial energy plus these changes,
/// so they never increase.
pub fn harmonic_flow<'a>(f0: &SphereMap<'a>, options: FlowOptions) -> Result<FlowResult<'a>> {
    let s = f0.source();
    let bound = flow_spectral_bound(s);
    let eta0 = options.eta.unwrap_or(0.9 / bound);
    if !(eta0 > 0.0 && eta0 < 2.0 / bound) {
        return Err(invalid("eta", format!("must lie in (0, {}), got {eta0}", 2.0 / bound)));
    }
    if !(options.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let k1 = f0.k() + 1;
    let mass = s.mass();
    let mut f = f0.clone();
    let mut laps: Vec<Vec<f64>> = (0..k1).map(|i| s.laplacian(&f.coordinate(i))).collect();
    let mut energy = sphere_energy(&f).total;
    let mut residual = el_residual(&f).norm;
    let mut eta = eta0;
    let mut trace = vec![FlowStep {
        step: 0,
        energy,
        residual,
        eta,
    }];
    let mut step = 0;
    while residual >= options.tol && step < options.max_steps {
        loop {
            let mut v = f.values.clone();
            for (i, lap) in laps.iter().enumerate() {
                for (p, l) in lap.iter().enumerate() {
                    v[p * k1 + i] += eta * l;
                }
            }
            if let Ok(candidate) = SphereMap::new(s, f.k(), v) {
                let cand_laps: Vec<Vec<f64>> = (0..k1).map(|i| s.laplacian(&candidate.coordinate(i))).collect();
                let mut change = 0.0;
                for i in 0..k1 {
                    for p in 0..s.sample_count() {
                        let d = candidate.values[p * k1 + i] - f.values[p * k1 + i];
                        change -= 0.5 * mass[p] * d * (cand_laps[i][p] + laps[i][p]);
                    }
                }
                if change <= 0.0 {
                    f = candidate;
                    laps = cand_laps;
                    energy += change;
                    break;
                }
            }
            eta *= 0.5;
            if eta < eta0 * 1e-12 {
                return Err(Error::StepCollapse { steps: step, eta });
            }
        }
        step += 1;
        residual = el_residual(&f).norm;
        trace.push(FlowStep {
            step,
            energy,
            residual,
            eta,
        });
    }
    Ok(FlowResult {
        map: f,
        converged: residual < options.tol,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct Eigenmap<'a> {
    pub map: SphereMap<'a>,
    pub eigenvalue: f64,
    /// `c` with `c² · mean(Σ φ_i²) = 1`.
    pub scale: f64,
    /// `max_p |c² Σ_i φ_i(x_p)² − 1|` before any renormalization.
    pub deviation: f64,
}

/// `f = c (φ_1, …, φ_{k+1})` from the first `k + 1` members of the cluster of
/// `lambda`; fails when `Σ (c φ_i)²` deviates from 1 by more than `threshold`.
pub fn eigenmap<'a>(space: &'a SpectralSpace, lambda: f64, k: usize, threshold: f64) -> Result<Eigenmap<'a>> {
    let cluster = space.cluster_of(lambda)?;
    if cluster.len() < k + 1 {
        return Err(Error::Eigenmap(format!(
            "cluster at {lambda} has {} functions, {} needed",
            cluster.len(),
            k + 1
        )));
    }
    let ids: Vec<usize> = cluster.take(k + 1).collect();
    let scale = (space.total_measure() / (k + 1) as f64).sqrt();
    let n = space.sample_count();
    let mut values = vec![0.0; n * (k + 1)];
    let mut deviation: f64 = 0.0;
    for p in 0..n {
        let mut sq = 0.0;
        for (c, &i) in ids.iter().enumerate() {
            let v = scale * space.eigenfunction(i)[p];
            values[p * (k + 1) + c] = v;
            sq += v * v;
        }
        deviation = deviation.max((sq - 1.0).abs());
    }
    if deviation > threshold {
        return Err(Error::Eigenmap(format!(
            "Σφ² is not constant: deviation {deviation:e} exceeds {threshold:e}"
        )));
    }
    Ok(Eigenmap {
        map: SphereMap::new(space, k, values)?,
        eigenvalue: space.eigenvalues()[ids[0]],
        scale,
        deviation,
    })
}

/// Thresholds and target resolution for [`takahashi_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakahashiOptions {
    /// Relative eigen-equation residual allowed per coordinate.
    pub eigen_tol: f64,
    /// Maximum HS distance between the normalized pull-back and the metric.
    pub isometry_tol: f64,
    /// Relative deviation of the energy density from `n`.
    pub density_tol: f64,
    pub delta: f64,
    pub target_samples: usize,
    pub target_cutoff: usize,
    pub rho: f64,
    pub pairs: usize,
    pub seed: u64,
}

impl TakahashiOptions {
    /// Tight tolerances on model spaces, mesh-level ones otherwise.
    pub fn for_space(space: &SpectralSpace) -> Self {
        let model = space.model_kind().is_some();
        Self {
            eigen_tol: if model { 1e-8 } else { 0.05 },
            isometry_tol: 0.05,
            density_tol: if model { 1e-8 } else { 0.05 },
            delta: 1e-8,
            target_samples: 0,
            target_cutoff: 0,
            rho: 0.1,
            pairs: 2000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TakahashiReport {
    pub n: usize,
    pub k: usize,
    /// Per coordinate `‖Δf_i + n f_i‖ / ‖f_i‖`.
    pub eigen_residuals: Vec<f64>,
    pub eigen_residual: f64,
    /// Rayleigh-quotient eigenvalue `Σ_i ‖∇f_i‖² / Σ_i ‖f_i‖²`.
    pub fitted_eigenvalue: f64,
    /// Relative residual against the fitted eigenvalue.
    pub fitted_residual: f64,
    pub t: f64,
    pub l: usize,
    /// `max_p |g_X − c_N t^{(N+2)/2} f*g_{S^k,t}|_HS` at the smallest t.
    pub isometry_error: f64,
    pub density_min: f64,
    pub density_max: f64,
    pub density_error: f64,
    pub violated: Vec<String>,
    pub pass: bool,
    /// Small eigen residual and density ≈ n imply the isometry clause.
    pub converse_consistent: bool,
    /// Min and max of `d_{S^k}(f(p), f(q)) / d_X(p, q)` over seeded local pairs.
    pub local_bilipschitz: (f64, f64),
}

fn norm_mu(u: &[f64], mass: &[f64]) -> f64 {
    weighted_sum(u, u, mass).sqrt()
}

/// Minimal isometric immersion versus eigenmap with eigenvalue `n`.
pub fn takahashi_check(f: &SphereMap, t_schedule: &[f64], options: &TakahashiOptions) -> Result<TakahashiReport> {
    validate_schedule("t_schedule", t_schedule)?;
    let s = f.source();
    let n = s.intrinsic_dim();
    let k = f.k();
    let mass = s.mass();

    let mut eigen_residuals = Vec::with_capacity(k + 1);
    let (mut num, mut den) = (0.0, 0.0);
    let coords: Vec<Vec<f64>> = (0..=k).map(|i| f.coordinate(i)).collect();
    let laps: Vec<Vec<f64>> = coords.iter().map(|c| s.laplacian(c)).collect();
    for (c, lap) in coords.iter().zip(&laps) {
        let r: Vec<f64> = lap.iter().zip(c).map(|(l, v)| l + n as f64 * v).collect();
        let size = norm_mu(c, mass);
        eigen_residuals.push(if size > 0.0 { norm_mu(&r, mass) / size } else { 0.0 });
        num -= weighted_sum(lap, c, mass);
        den += weighted_sum(c, c, mass);
    }
    let fitted_eigenvalue = num / den;
    let fitted_sq: f64 = coords
        .iter()
        .zip(&laps)
        .map(|(c, lap)| {
            let r: Vec<f64> = lap.iter().zip(c).map(|(l, v)| l + fitted_eigenvalue * v).collect();
            weighted_sum(&r, &r, mass)
        })
        .sum();
    let fitted_residual = (fitted_sq / den).sqrt();
    let eigen_residual = eigen_residuals.iter().copied().fold(0.0, f64::max);

    // pull-back through the heat-kernel embedding of S^k
    let (kind, default_samples, default_cutoff) = match k {
        1 => (ModelKind::circle(), 256, 80),
        2 => (ModelKind::RoundSphere, 1800, 624),
        _ => return Err(Error::Unsupported(format!("isometry check into S^{k}"))),
    };
    let samples = if options.target_samples > 0 { options.target_samples } else { default_samples };
    let cutoff = if options.target_cutoff > 0 { options.target_cutoff } else { default_cutoff };
    let target = build_model_space(kind.clone(), samples, cutoff)?;
    let image: Vec<Vec<f64>> = (0..s.sample_count()).map(|p| kind.coords_from_ambient(f.row(p))).collect();
    let g = PointMap::sampled(s, &target, image)?;
    let t = *t_schedule.last().expect("validated");
    let trunc = choose_truncation(&target, t, options.delta)?;
    let mut pull = t_energy(&g, t, trunc.l)?.pullback.expect("tensor");
    pull.scale(DimensionConstants::new(k).scale_a(t));
    let isometry_error = (0..s.sample_count())
        .map(|p| pull.identity_distance(p, 1.0))
        .fold(0.0, f64::max);

    let density = sphere_energy(f).density;
    let density_min = density.iter().copied().fold(f64::INFINITY, f64::min);
    let density_max = density.iter().copied().fold(0.0, f64::max);
    let density_error = density
        .iter()
        .map(|d| (d - n as f64).abs() / n as f64)
        .fold(0.0, f64::max);

    let eigen_ok = eigen_residual <= options.eigen_tol;
    let isometry_ok = isometry_error <= options.isometry_tol;
    let density_ok = density_error <= options.density_tol;
    let mut violated = Vec::new();
    if !eigen_ok {
        violated.push("eigen".to_string());
    }
    if !isometry_ok {
        violated.push("isometry".to_string());
    }
    if !density_ok {
        violated.push("density".to_string());
    }
    Ok(TakahashiReport {
        n,
        k,
        eigen_residuals,
        eigen_residual,
        fitted_eigenvalue,
        fitted_residual,
        t,
        l: trunc.l,
        isometry_error,
        density_min,
        density_max,
        density_error,
        pass: violated.is_empty(),
        violated,
        converse_consistent: !(eigen_ok && density_ok) || isometry_ok,
        local_bilipschitz: local_ratios(f, options.rho, options.pairs, options.seed)?,
    })
}

fn local_ratios(f: &SphereMap, rho: f64, pairs: usize, seed: u64) -> Result<(f64, f64)> {
    let s = f.source();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut found = 0;
    let mut attempts = 0;
    while found < pairs && attempts < 20 * pairs {
        attempts += 1;
        let p = rng.random_range(0..s.sample_count());
        let ball = s.ball_query(p, rho)?;
        if ball.ids.len() < 2 {
            continue;
        }
        let q = ball.ids[rng.random_range(0..ball.ids.len())];
        if q == p {
            continue;
        }
        let dot: f64 = f.row(p).iter().zip(f.row(q)).map(|(a, b)| a * b).sum();
        let ratio = dot.clamp(-1.0, 1.0).acos() / s.distance(p, q);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        found += 1;
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rows_are_normalized() {
        let s = build_model_space(ModelKind::circle(), 32, 4).unwrap();
        let f = SphereMap::new(&s, 1, vec![3.0, 4.0].repeat(32)).unwrap();
        assert_eq!(f.row(5), &[0.6, 0.8]);
        assert!(SphereMap::new(&s, 1, vec![0.0; 64]).is_err());
    }

    #[test]
    fn circle_identity_energy_and_residual() {
        let s = build_model_space(ModelKind::circle(), 64, 20).unwrap();
        for d in 1..=3 {
            let f = SphereMap::circle_power(&s, d).unwrap();
            let e = sphere_energy(&f);
            assert!((e.total - PI * (d * d) as f64).abs() < 1e-10);
            assert!(e.density.iter().all(|x| (x - (d * d) as f64).abs() < 1e-10));
            assert!(el_residual(&f).norm < 1e-10);
        }
    }

    #[test]
    fn exact_identity_is_a_fixed_point() {
        let s = build_model_space(ModelKind::circle(), 33, 32).unwrap();
        let f = SphereMap::circle_power(&s, 1).unwrap();
        let out = harmonic_flow(&f, FlowOptions::default()).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert!(out.converged);
    }

    #[test]
    fn eigenmaps_on_circle() {
        let s = build_model_space(ModelKind::circle(), 64, 10).unwrap();
        let e = eigenmap(&s, 1.0, 1, 1e-10).unwrap();
        assert!(e.deviation < 1e-12);
        for p in 0..64 {
            let th = s.coords(p).unwrap()[0];
            assert!((e.map.row(p)[0] - th.cos()).abs() < 1e-12);
            assert!((e.map.row(p)[1] - th.sin()).abs() < 1e-12);
        }
        let e4 = eigenmap(&s, 4.0, 1, 1e-10).unwrap();
        assert!(e4.deviation < 1e-12);
        assert!(eigenmap(&s, 1.0, 2, 1e-10).is_err());
    }
}
