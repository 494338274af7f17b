//! Maps between spectral spaces and the energy apparatus built on the target's
//! heat-kernel embedding: λ-energy densities, t-energies, normalized energies,
//! pull-back tensors and the upper-gradient diagnostic.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{choose_truncation, DimensionConstants};
use crate::error::{invalid, Error, Result};
use crate::space::{ModelKind, SpectralSpace};
use crate::tensor::{bound_norm, hs_norm, packed_len, tensor_norms, SymTensorField};

/// Closed-form maps between model spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AnalyticMap {
    /// Same parameter point; source and target must be the same model.
    Identity,
    /// `θ ↦ degree·θ` between circles.
    CircleCover { degree: i32 },
    /// Every point goes to `point` (target parameters).
    Constant { point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Analytic { map: AnalyticMap },
    /// Target sample index per source sample.
    Vertex { assignment: Vec<usize> },
    /// Target parameter coordinates per source sample (model targets only).
    Sampled { coords: Vec<Vec<f64>> },
}

/// Serializable description of a [`PointMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMapDocument {
    pub source_id: String,
    pub target_id: String,
    #[serde(flatten)]
    pub kind: MapKind,
}

#[derive(Debug, Clone)]
enum Images {
    Coords(Vec<Vec<f64>>),
    Samples(Vec<usize>),
}

/// A map `f: X → Y` between two spectral spaces.
#[derive(Debug, Clone)]
pub struct PointMap<'a> {
    source: &'a SpectralSpace,
    target: &'a SpectralSpace,
    kind: MapKind,
    images: Images,
}

/// Number of probe points for the Jacobian consistency check.
const JACOBIAN_PROBES: usize = 32;

impl<'a> PointMap<'a> {
    /// Closed-form map; its Jacobian is checked against central differences
    /// of the point map at 32 probe samples.
    pub fn analytic(source: &'a SpectralSpace, target: &'a SpectralSpace, map: AnalyticMap) -> Result<Self> {
        let (Some(sk), Some(tk)) = (source.model_kind(), target.model_kind()) else {
            return Err(Error::Unsupported("analytic maps need model source and target".into()));
        };
        match &map {
            AnalyticMap::Identity => {
                if sk != tk {
                    return Err(invalid("map", "identity needs the same model on both sides"));
                }
            }
            AnalyticMap::CircleCover { degree } => {
                if !matches!(sk, ModelKind::Circle { .. }) || !matches!(tk, ModelKind::Circle { .. }) {
                    return Err(invalid("map", "circle_cover maps a circle to a circle"));
                }
                if *degree == 0 {
                    return Err(invalid("degree", "use a constant map for degree 0"));
                }
            }
            AnalyticMap::Constant { point } => {
                if point.len() != tk.intrinsic_dim() {
                    return Err(invalid("point", "wrong number of target parameters"));
                }
            }
        }
        let images = (0..source.sample_count())
            .map(|p| analytic_image(&map, source.coords(p).expect("model sample")))
            .collect();
        let f = Self {
            source,
            target,
            kind: MapKind::Analytic { map },
            images: Images::Coords(images),
        };
        f.check_jacobian()?;
        Ok(f)
    }

    pub fn vertex(source: &'a SpectralSpace, target: &'a SpectralSpace, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != source.sample_count() {
            return Err(invalid("assignment", "needs one target sample per source sample"));
        }
        if let Some(bad) = assignment.iter().find(|&&a| a >= target.sample_count()) {
            return Err(invalid("assignment", format!("target sample {bad} does not exist")));
        }
        Ok(Self {
            source,
            target,
            kind: MapKind::Vertex {
                assignment: assignment.clone(),
            },
            images: Images::Samples(assignment),
        })
    }

    pub fn sampled(source: &'a SpectralSpace, target: &'a SpectralSpace, coords: Vec<Vec<f64>>) -> Result<Self> {
        let Some(tk) = target.model_kind() else {
            return Err(Error::Unsupported("sampled maps need a model target".into()));
        };
        if coords.len() != source.sample_count() || coords.iter().any(|c| c.len() != tk.intrinsic_dim()) {
            return Err(invalid("coords", "needs one target parameter point per source sample"));
        }
        Ok(Self {
            source,
            target,
            kind: MapKind::Sampled { coords: coords.clone() },
            images: Images::Coords(coords),
        })
    }

    pub fn source(&self) -> &'a SpectralSpace {
        self.source
    }

    pub fn target(&self) -> &'a SpectralSpace {
        self.target
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn document(&self) -> PointMapDocument {
        PointMapDocument {
            source_id: self.source.id().to_string(),
            target_id: self.target.id().to_string(),
            kind: self.kind.clone(),
        }
    }

    /// `d_Y(f(x_p), f(x_q))`.
    pub fn target_distance(&self, p: usize, q: usize) -> f64 {
        match &self.images {
            Images::Coords(c) => self
                .target
                .point_distance(&c[p], &c[q])
                .expect("coordinate images live on model targets"),
            Images::Samples(a) => self.target.distance(a[p], a[q]),
        }
    }

    /// `μ_Y(B_r(f(x_p)))`.
    pub fn target_ball_measure(&self, p: usize, r: f64) -> Result<f64> {
        match &self.images {
            Images::Coords(c) => self.target.ball_at(&c[p], r).map(|b| b.measure),
            Images::Samples(a) => self.target.ball_query(a[p], r).map(|b| b.measure),
        }
    }

    /// Jacobian in orthonormal frames, row-major `n x m`, for analytic maps.
    pub fn jacobian(&self, _p: usize) -> Option<Vec<f64>> {
        let MapKind::Analytic { map } = &self.kind else {
            return None;
        };
        let m = self.source.intrinsic_dim();
        let n = self.target.intrinsic_dim();
        Some(match map {
            AnalyticMap::Identity => {
                let mut j = vec![0.0; n * m];
                (0..m).for_each(|a| j[a * m + a] = 1.0);
                j
            }
            AnalyticMap::CircleCover { degree } => {
                let (Some(ModelKind::Circle { radius: rs }), Some(ModelKind::Circle { radius: rt })) =
                    (self.source.model_kind(), self.target.model_kind())
                else {
                    unreachable!()
                };
                vec![*degree as f64 * rt / rs]
            }
            AnalyticMap::Constant { .. } => vec![0.0; n * m],
        })
    }

    /// Pointwise Lipschitz constant `|J|_op` of an analytic map.
    pub fn lipschitz_field(&self) -> Option<Vec<f64>> {
        let m = self.source.intrinsic_dim();
        let n = self.target.intrinsic_dim();
        (0..self.source.sample_count())
            .map(|p| {
                let j = self.jacobian(p)?;
                let mut jtj = vec![0.0; packed_len(m)];
                let mut k = 0;
                for a in 0..m {
                    for b in a..m {
                        jtj[k] = (0..n).map(|r| j[r * m + a] * j[r * m + b]).sum();
                        k += 1;
                    }
                }
                Some(bound_norm(m, &jtj).sqrt())
            })
            .collect()
    }

    fn check_jacobian(&self) -> Result<()> {
        let (MapKind::Analytic { map }, Some(sk), Some(tk)) =
            (&self.kind, self.source.model_kind(), self.target.model_kind())
        else {
            return Ok(());
        };
        let m = sk.intrinsic_dim();
        let n = tk.intrinsic_dim();
        let h = 1e-5 * sk.diameter();
        let count = self.source.sample_count();
        for probe in 0..JACOBIAN_PROBES.min(count) {
            let p = probe * count / JACOBIAN_PROBES.min(count);
            let x = self.source.coords(p).expect("model sample");
            let y0 = analytic_image(map, x);
            let j = self.jacobian(p).expect("analytic");
            for a in 0..m {
                let yp = analytic_image(map, &sk.offset(x, a, h));
                let ym = analytic_image(map, &sk.offset(x, a, -h));
                let dp = tk.displacement(&y0, &yp);
                let dm = tk.displacement(&y0, &ym);
                for b in 0..n {
                    let fd = (dp[b] - dm[b]) / (2.0 * h);
                    let exact = j[b * m + a];
                    if (fd - exact).abs() > 1e-5 * (1.0 + exact.abs()) {
                        return Err(invalid(
                            "map",
                            format!("Jacobian entry ({b},{a}) at sample {p} is {exact}, finite differences give {fd}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `φ_j^Y ∘ f` and its gradient on the source (`P x m`).
    pub fn compose_eigenfunction(&self, j: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if j > self.target.cutoff() {
            return Err(invalid("j", format!("target cutoff is {}", self.target.cutoff())));
        }
        let p_count = self.source.sample_count();
        let m = self.source.intrinsic_dim();
        let mut values = vec![0.0; p_count];
        let mut grads = vec![0.0; p_count * m];
        self.for_each_composed(j, |jj, vals, g| {
            if jj == j {
                values.copy_from_slice(vals);
                grads.copy_from_slice(g);
            }
        })?;
        Ok((values, grads))
    }

    /// Calls `visit(j, values, gradients)` for `j = 0..=l` in order.
    fn for_each_composed(&self, l: usize, mut visit: impl FnMut(usize, &[f64], &[f64])) -> Result<()> {
        let p_count = self.source.sample_count();
        let m = self.source.intrinsic_dim();
        let n = self.target.intrinsic_dim();
        match (&self.kind, &self.images) {
            (MapKind::Analytic { .. }, Images::Coords(c)) => {
                // values and chain-rule gradients, evaluated per sample
                let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..p_count)
                    .into_par_iter()
                    .map(|p| {
                        let (v, g) = self.target.eval_basis(&c[p]).expect("model target");
                        let jac = self.jacobian(p).expect("analytic");
                        let mut out = vec![0.0; (l + 1) * m];
                        for jj in 0..=l {
                            for a in 0..m {
                                out[jj * m + a] = (0..n).map(|b| jac[b * m + a] * g[jj * n + b]).sum();
                            }
                        }
                        (v[..=l].to_vec(), out)
                    })
                    .collect();
                let mut vals = vec![0.0; p_count];
                let mut grads = vec![0.0; p_count * m];
                for jj in 0..=l {
                    for (p, (v, g)) in rows.iter().enumerate() {
                        vals[p] = v[jj];
                        grads[p * m..(p + 1) * m].copy_from_slice(&g[jj * m..(jj + 1) * m]);
                    }
                    visit(jj, &vals, &grads);
                }
            }
            _ => {
                let table = self.composed_values(l)?;
                for jj in 0..=l {
                    let vals: Vec<f64> = (0..p_count).map(|p| table[p * (l + 1) + jj]).collect();
                    let grads = self.source.discrete_gradient(&vals);
                    visit(jj, &vals, &grads);
                }
            }
        }
        Ok(())
    }

    /// Row-major `P x (l+1)` table of `φ_j^Y(f(x_p))`.
    fn composed_values(&self, l: usize) -> Result<Vec<f64>> {
        let p_count = self.source.sample_count();
        match &self.images {
            Images::Samples(a) => {
                let mut out = vec![0.0; p_count * (l + 1)];
                for jj in 0..=l {
                    let f = self.target.eigenfunction(jj);
                    for p in 0..p_count {
                        out[p * (l + 1) + jj] = f[a[p]];
                    }
                }
                Ok(out)
            }
            Images::Coords(c) => {
                let rows: Vec<Vec<f64>> = c
                    .par_iter()
                    .map(|x| self.target.eval_basis(x).map(|(v, _)| v[..=l].to_vec()))
                    .collect::<Result<_>>()?;
                Ok(rows.concat())
            }
        }
    }

    /// `Σ_j w_j d(φ_j∘f) ⊗ d(φ_j∘f)` and, accumulated separately,
    /// `Σ_j w_j |∇(φ_j∘f)|²`, for `j = 0..weights.len()`.
    pub(crate) fn weighted_pullback(&self, weights: &[f64]) -> Result<(SymTensorField, Vec<f64>)> {
        let l = weights.len() - 1;
        if l > self.target.cutoff() {
            return Err(invalid("l", format!("target cutoff is {}", self.target.cutoff())));
        }
        let p_count = self.source.sample_count();
        let m = self.source.intrinsic_dim();
        let mut tensor = SymTensorField::zeros(self.source.id(), m, p_count);
        let mut density = vec![0.0; p_count];
        if let (MapKind::Analytic { .. }, Images::Coords(c)) = (&self.kind, &self.images) {
            // stream per sample: the composed gradients are never stored
            let n = self.target.intrinsic_dim();
            let k = packed_len(m);
            let rows: Vec<(Vec<f64>, f64)> = (0..p_count)
                .into_par_iter()
                .map(|p| {
                    let (_, g) = self.target.eval_basis(&c[p]).expect("model target");
                    let jac = self.jacobian(p).expect("analytic");
                    let mut local = SymTensorField::zeros("", m, 1);
                    let mut d = 0.0;
                    let mut v = vec![0.0; m];
                    for (jj, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        for (a, va) in v.iter_mut().enumerate() {
                            *va = (0..n).map(|b| jac[b * m + a] * g[jj * n + b]).sum();
                        }
                        local.add_outer(0, w, &v);
                        d += w * v.iter().map(|x| x * x).sum::<f64>();
                    }
                    (local.packed(0).to_vec(), d)
                })
                .collect();
            for (p, (packed, d)) in rows.into_iter().enumerate() {
                tensor.packed_mut(p)[..k].copy_from_slice(&packed);
                density[p] = d;
            }
            return Ok((tensor, density));
        }
        self.for_each_composed(l, |jj, _, grads| {
            let w = weights[jj];
            if w == 0.0 {
                return;
            }
            for p in 0..p_count {
                let g = &grads[p * m..(p + 1) * m];
                tensor.add_outer(p, w, g);
                density[p] += w * g.iter().map(|x| x * x).sum::<f64>();
            }
        })?;
        Ok((tensor, density))
    }
}

fn analytic_image(map: &AnalyticMap, x: &[f64]) -> Vec<f64> {
    match map {
        AnalyticMap::Identity => x.to_vec(),
        AnalyticMap::CircleCover { degree } => vec![(*degree as f64 * x[0]).rem_euclid(2.0 * PI)],
        AnalyticMap::Constant { point } => point.clone(),
    }
}

/// `e_Y^λ(f) = Σ_{i ∈ cluster(λ)} |∇(φ_i^Y ∘ f)|²`.
pub fn lambda_energy_density(f: &PointMap, lambda: f64) -> Result<Vec<f64>> {
    let cluster = f.target().cluster_of(lambda)?;
    if cluster.end - 1 > f.target().cutoff() {
        return Err(Error::NotInSpectrum(lambda));
    }
    let mut weights = vec![0.0; cluster.end];
    weights[cluster].iter_mut().for_each(|w| *w = 1.0);
    Ok(f.weighted_pullback(&weights)?.1)
}

/// Energy of a map at a fixed time or under a named normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub source_id: String,
    pub target_id: String,
    pub total: f64,
    pub density: Vec<f64>,
    pub normalization: String,
    pub l: usize,
    pub t: Option<f64>,
    /// Largest relative gap between `tr f*g_{Y,t}` and the density.
    pub trace_deviation: f64,
    /// Whether `|f*g_{Y,t}|_HS ≤ density` held at every sample.
    pub density_bound_holds: bool,
    #[serde(skip)]
    pub pullback: Option<SymTensorField>,
}

/// t-energy `½ Σ_p μ_p Σ_{j≤l} e^{−2λ_j t} |∇(φ_j∘f)|²` with its pull-back tensor.
pub fn t_energy(f: &PointMap, t: f64, l: usize) -> Result<EnergyReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    let weights: Vec<f64> = f.target().eigenvalues()[..=l.min(f.target().cutoff())]
        .iter()
        .enumerate()
        .map(|(j, lam)| if j == 0 { 0.0 } else { (-2.0 * lam * t).exp() })
        .collect();
    if l > f.target().cutoff() || l == 0 {
        return Err(invalid("l", format!("must lie in [1, {}]", f.target().cutoff())));
    }
    let (tensor, density) = f.weighted_pullback(&weights)?;
    let m = tensor.dim();
    let mut trace_deviation: f64 = 0.0;
    let mut density_bound_holds = true;
    for (p, d) in density.iter().enumerate() {
        let tr = tensor.trace(p);
        trace_deviation = trace_deviation.max((tr - d).abs() / d.abs().max(f64::MIN_POSITIVE));
        if hs_norm(m, tensor.packed(p)) > d * (1.0 + 1e-12) {
            density_bound_holds = false;
        }
    }
    if trace_deviation > 1e-10 {
        return Err(Error::Unsupported(format!(
            "pull-back trace deviates from the energy density by {trace_deviation:e}"
        )));
    }
    let total = 0.5 * weighted(&density, f.source().mass());
    Ok(EnergyReport {
        source_id: f.source().id().to_string(),
        target_id: f.target().id().to_string(),
        total,
        density,
        normalization: "t".into(),
        l,
        t: Some(t),
        trace_deviation,
        density_bound_holds,
        pullback: Some(tensor),
    })
}

fn weighted(values: &[f64], mass: &[f64]) -> f64 {
    values.iter().zip(mass).map(|(v, m)| v * m).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEntry {
    pub t: f64,
    pub l: usize,
    pub tail: f64,
    pub energy: f64,
    /// `c_N t^{(N+2)/2} E_t`
    pub a: f64,
    /// `½ Σ μ_p c̃_N t μ_Y(B_√t(f(x_p))) e_{Y,t}(f)(x_p)`
    pub b: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEnergy {
    pub entries: Vec<NormalizedEntry>,
    pub extrapolated_a: f64,
    pub extrapolated_b: f64,
    /// Each B value is at most 10% above the previous one along the schedule.
    pub bounded_on_schedule: bool,
}

impl NormalizedEnergy {
    /// `t,a,b` rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("t,normalized_energy_a,normalized_energy_b\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.t, e.a, e.b));
        }
        out
    }
}

/// Linear-in-t extrapolation to `t = 0` through the two smallest usable times.
fn extrapolate_linear(points: &[(f64, f64)]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    match pts.as_slice() {
        [] => f64::NAN,
        [(_, v)] => *v,
        [(t1, v1), (t2, v2), ..] => v1 - t1 * (v2 - v1) / (t2 - t1),
    }
}

/// Both normalizations of the t-energy across a strictly decreasing schedule,
/// with `l` from [`choose_truncation`] on the target at tolerance `delta`.
pub fn normalized_energy(f: &PointMap, t_schedule: &[f64], delta: f64) -> Result<NormalizedEnergy> {
    validate_schedule("t_schedule", t_schedule)?;
    let target = f.target();
    let k = DimensionConstants::new(target.intrinsic_dim());
    let mut entries = Vec::with_capacity(t_schedule.len());
    for &t in t_schedule {
        let trunc = choose_truncation(target, t, delta)?;
        let report = t_energy(f, t, trunc.l)?;
        let r = t.sqrt();
        let under_resolved = r < 2.0 * target.spacing();
        let b = if under_resolved {
            f64::NAN
        } else {
            let balls: Vec<f64> = (0..f.source().sample_count())
                .into_par_iter()
                .map(|p| f.target_ball_measure(p, r))
                .collect::<Result<_>>()?;
            0.5 * report
                .density
                .iter()
                .zip(&balls)
                .zip(f.source().mass())
                .map(|((e, mu), m)| m * k.c_tilde * t * mu * e)
                .sum::<f64>()
        };
        entries.push(NormalizedEntry {
            t,
            l: trunc.l,
            tail: trunc.tail,
            energy: report.total,
            a: k.scale_a(t) * report.total,
            b,
            under_resolved,
        });
    }
    let usable: Vec<&NormalizedEntry> = entries.iter().filter(|e| !e.under_resolved).collect();
    let extrapolated_a = extrapolate_linear(&usable.iter().map(|e| (e.t, e.a)).collect::<Vec<_>>());
    let extrapolated_b = extrapolate_linear(&usable.iter().map(|e| (e.t, e.b)).collect::<Vec<_>>());
    let bounded_on_schedule = usable.windows(2).all(|w| w[1].b <= 1.1 * w[0].b);
    Ok(NormalizedEnergy {
        entries,
        extrapolated_a,
        extrapolated_b,
        bounded_on_schedule,
    })
}

pub(crate) fn validate_schedule(name: &str, schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(invalid(name, "must not be empty"));
    }
    if schedule.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid(name, "entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(name, "must be strictly decreasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperGradient {
    /// `(|c_N t^{(N+2)/2} f*g_{Y,t}|_B)^{1/2}` per sample.
    pub field: Vec<f64>,
    /// `|J|_op` for analytic maps.
    pub lipschitz: Option<Vec<f64>>,
}

pub fn upper_gradient_estimate(f: &PointMap, t: f64, l: usize) -> Result<UpperGradient> {
    let report = t_energy(f, t, l)?;
    let mut tensor = report.pullback.expect("t_energy returns the tensor");
    tensor.scale(DimensionConstants::new(f.target().intrinsic_dim()).scale_a(t));
    let norms = tensor_norms(&tensor);
    Ok(UpperGradient {
        field: norms.bound.iter().map(|b| b.sqrt()).collect(),
        lipschitz: f.lipschitz_field(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_model_space;

    fn circle(p: usize, l: usize) -> SpectralSpace {
        build_model_space(ModelKind::circle(), p, l).unwrap()
    }

    #[test]
    fn identity_chain_rule_matches_stored_gradient() {
        let s = circle(128, 10);
        let f = PointMap::analytic(&s, &s, AnalyticMap::Identity).unwrap();
        let (v, g) = f.compose_eigenfunction(1).unwrap();
        for p in 0..128 {
            assert!((v[p] - s.eigenfunction(1)[p]).abs() < 1e-12);
            assert!((g[p] - s.eigengradient(1, p)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_two_composition() {
        let s = circle(128, 10);
        let f = PointMap::analytic(&s, &s, AnalyticMap::CircleCover { degree: 2 }).unwrap();
        let (v, g) = f.compose_eigenfunction(1).unwrap();
        for p in 0..128 {
            let th = s.coords(p).unwrap()[0];
            assert!((v[p] - (2.0 * th).cos() / PI.sqrt()).abs() < 1e-12);
            assert!((g[p].abs() - 2.0 * (2.0 * th).sin().abs() / PI.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_map_is_flat() {
        let s = circle(64, 10);
        let f = PointMap::analytic(&s, &s, AnalyticMap::Constant { point: vec![1.0] }).unwrap();
        let (_, g) = f.compose_eigenfunction(3).unwrap();
        assert!(g.iter().all(|x| *x == 0.0));
        assert_eq!(t_energy(&f, 0.02, 10).unwrap().total, 0.0);
        assert!(lambda_energy_density(&f, 4.0).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn lambda_density_on_circle() {
        let s = circle(64, 10);
        let f = PointMap::analytic(&s, &s, AnalyticMap::Identity).unwrap();
        for k in 1..=3 {
            let d = lambda_energy_density(&f, (k * k) as f64).unwrap();
            assert!(d.iter().all(|x| (x - (k * k) as f64 / PI).abs() < 1e-12));
        }
        assert!(matches!(lambda_energy_density(&f, 2.0), Err(Error::NotInSpectrum(_))));
    }

    #[test]
    fn schedule_validation() {
        assert!(validate_schedule("t_schedule", &[0.04, 0.02]).is_ok());
        assert!(validate_schedule("t_schedule", &[0.02, 0.04]).is_err());
        assert!(validate_schedule("t_schedule", &[0.02, -0.01]).is_err());
    }

    #[test]
    fn vertex_identity_matches_analytic_to_second_order() {
        let s = circle(512, 20);
        let fa = PointMap::analytic(&s, &s, AnalyticMap::Identity).unwrap();
        let fv = PointMap::vertex(&s, &s, (0..512).collect()).unwrap();
        let ea = t_energy(&fa, 0.05, 20).unwrap();
        let ev = t_energy(&fv, 0.05, 20).unwrap();
        assert!((ea.total - ev.total).abs() / ea.total < 1e-3);
    }
}
