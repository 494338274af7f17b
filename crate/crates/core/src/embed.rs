//! Heat kernel, normalized truncated heat-kernel embedding, pull-back metric,
//! distortion fields, smoothable points and bi-Lipschitz profiling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::SpectralSpace;
use crate::tensor::SymTensorField;

/// `c_N = 4(8π)^{N/2}`, `ω_N` the volume of the unit N-ball and `c̃_N = c_N/ω_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConstants {
    pub n: usize,
    pub c: f64,
    pub omega: f64,
    pub c_tilde: f64,
}

impl DimensionConstants {
    pub fn new(n: usize) -> Self {
        let c = 4.0 * (8.0 * PI).powf(n as f64 / 2.0);
        let omega = PI.powf(n as f64 / 2.0) / gamma_half_integer(n + 2);
        Self {
            n,
            c,
            omega,
            c_tilde: c / omega,
        }
    }

    /// `c_N t^{(N+2)/2}`, the scale turning `g_t` into an approximate metric.
    pub fn scale_a(&self, t: f64) -> f64 {
        self.c * t.powf((self.n as f64 + 2.0) / 2.0)
    }
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half_integer(k: usize) -> f64 {
    let mut g = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
    while x < k as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("must be positive, got {t}")))
    }
}

fn check_l(space: &SpectralSpace, l: usize) -> Result<()> {
    if l >= 1 && l <= space.cutoff() {
        Ok(())
    } else {
        Err(invalid("l", format!("must lie in [1, {}], got {l}", space.cutoff())))
    }
}

/// Truncated spectral heat kernel `Σ_{i≤L} e^{−λ_i t} φ_i(x_p) φ_i(x_q)`.
pub fn heat_kernel(space: &SpectralSpace, p: usize, q: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(space
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, lam)| {
            let f = space.eigenfunction(i);
            (-lam * t).exp() * f[p] * f[q]
        })
        .sum())
}

/// `Φ̃_t^l(x_p)`: components `c_N^{1/2} t^{(N+2)/4} e^{−λ_i t} φ_i(x_p)`, `i = 1..=l`.
pub fn embedding_coords(space: &SpectralSpace, p: usize, t: f64, l: usize) -> Result<Vec<f64>> {
    check_t(t)?;
    check_l(space, l)?;
    let scale = DimensionConstants::new(space.intrinsic_dim()).scale_a(t).sqrt();
    Ok((1..=l)
        .map(|i| scale * (-space.eigenvalues()[i] * t).exp() * space.eigenfunction(i)[p])
        .collect())
}

/// Embedding coordinates of every sample, row-major `P x l`.
pub fn embedding(space: &SpectralSpace, t: f64, l: usize) -> Result<Vec<f64>> {
    check_t(t)?;
    check_l(space, l)?;
    let scale = DimensionConstants::new(space.intrinsic_dim()).scale_a(t).sqrt();
    let n = space.sample_count();
    let mut out = vec![0.0; n * l];
    for i in 1..=l {
        let w = scale * (-space.eigenvalues()[i] * t).exp();
        for (p, f) in space.eigenfunction(i).iter().enumerate() {
            out[p * l + i - 1] = w * f;
        }
    }
    Ok(out)
}

/// Result of [`choose_truncation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub l: usize,
    /// Normalized tail beyond `l`, including the extrapolated part above the cutoff.
    pub tail: f64,
    /// Extrapolated contribution of the eigenpairs above the stored cutoff.
    pub beyond_cutoff: f64,
}

/// Normalized tail terms `c_N t^{(N+2)/2} e^{−2λ_i t} max_p |∇φ_i|²` for `i = 1..=L`
/// (index 0 holds 0).
fn tail_terms(space: &SpectralSpace, t: f64) -> Vec<f64> {
    let scale = DimensionConstants::new(space.intrinsic_dim()).scale_a(t);
    let n = space.sample_count();
    (0..=space.cutoff())
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let gmax = (0..n)
                .map(|p| space.eigengradient(i, p).iter().map(|g| g * g).sum::<f64>())
                .fold(0.0, f64::max);
            scale * (-2.0 * space.eigenvalues()[i] * t).exp() * gmax
        })
        .collect()
}

/// Geometric extrapolation of the tail above the cutoff, with the ratio fitted
/// over the last quarter of the stored terms.
fn extrapolated_tail(terms: &[f64]) -> f64 {
    let last = terms.len() - 1;
    let span = (last / 4).max(1).min(last - 1).max(1);
    let (a, b) = (terms[last], terms[last - span]);
    if a == 0.0 {
        return 0.0;
    }
    if b == 0.0 {
        return f64::INFINITY;
    }
    let ratio = (a / b).powf(1.0 / span as f64);
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        a * ratio / (1.0 - ratio)
    }
}

/// Smallest `l` whose normalized gradient tail is below `delta`, extended to
/// the end of its eigenvalue cluster.
pub fn choose_truncation(space: &SpectralSpace, t: f64, delta: f64) -> Result<Truncation> {
    check_t(t)?;
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    let terms = tail_terms(space, t);
    let beyond = extrapolated_tail(&terms);
    let cutoff = space.cutoff();
    // suffix sums from the top so the small terms are added first
    let mut tail = beyond;
    let mut tails = vec![0.0; cutoff + 1];
    for l in (1..=cutoff).rev() {
        tails[l] = tail;
        tail += terms[l];
    }
    // extend to the end of the multiplicity cluster so that g_t stays
    // independent of the basis chosen inside it
    let round_up = |l: usize| {
        let clusters = space.clusters();
        clusters.iter().find(|c| c.contains(&l)).map_or(l, |c| c.end - 1)
    };
    match (1..=cutoff).find(|&l| tails[l] < delta).map(round_up) {
        Some(l) => Ok(Truncation {
            l,
            tail: tails[l],
            beyond_cutoff: beyond,
        }),
        None => Err(Error::TruncationUnreachable {
            tail: tails[cutoff],
            delta,
            cutoff,
        }),
    }
}

/// `g_t = Σ_{i=1}^{l} e^{−2λ_i t} ∇φ_i ∇φ_iᵀ` at every sample.
pub fn pullback_metric(space: &SpectralSpace, t: f64, l: usize) -> Result<SymTensorField> {
    check_t(t)?;
    check_l(space, l)?;
    let m = space.intrinsic_dim();
    let mut g = SymTensorField::zeros(space.id(), m, space.sample_count());
    for i in 1..=l {
        let w = (-2.0 * space.eigenvalues()[i] * t).exp();
        if w == 0.0 {
            continue;
        }
        for p in 0..space.sample_count() {
            g.add_outer(p, w, space.eigengradient(i, p));
        }
    }
    Ok(g)
}

/// How `g_t` is rescaled before comparison with the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `c_N t^{(N+2)/2}`
    A,
    /// `c̃_N t μ(B_√t(x))`
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionField {
    pub normalization: Normalization,
    pub t: f64,
    pub l: usize,
    pub values: Vec<f64>,
    /// Set when `√t` is below twice the sample spacing and normalization B
    /// fell back to `ω_N t^{N/2}` for the ball measure.
    pub under_resolved: bool,
}

/// Per-sample `|g_X − s(x) g_t|_HS`.
pub fn distortion_field(
    space: &SpectralSpace,
    t: f64,
    l: usize,
    normalization: Normalization,
) -> Result<DistortionField> {
    let g = pullback_metric(space, t, l)?;
    let k = DimensionConstants::new(space.intrinsic_dim());
    let r = t.sqrt();
    let under_resolved = normalization == Normalization::B && r < 2.0 * space.spacing();
    let scales: Vec<f64> = match normalization {
        Normalization::A => vec![k.scale_a(t); space.sample_count()],
        Normalization::B if under_resolved => {
            vec![k.c_tilde * t * k.omega * t.powf(k.n as f64 / 2.0); space.sample_count()]
        }
        Normalization::B => (0..space.sample_count())
            .into_par_iter()
            .map(|p| space.ball_query(p, r).map(|b| k.c_tilde * t * b.measure))
            .collect::<Result<_>>()?,
    };
    let values = scales
        .iter()
        .enumerate()
        .map(|(p, s)| g.identity_distance(p, *s))
        .collect();
    Ok(DistortionField {
        normalization,
        t,
        l,
        values,
        under_resolved,
    })
}

/// Mass-weighted `L^p` norm of a sample field; `p = ∞` gives the maximum.
pub fn distortion_norm(values: &[f64], p: f64, space: &SpectralSpace) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("exponent must be in [1, ∞], got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    let s: f64 = values
        .iter()
        .zip(space.mass())
        .map(|(v, m)| m * v.abs().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// Geometric grid of `count` radii from `max(2·spacing, τ/64)` to `τ`.
pub fn default_radius_grid(space: &SpectralSpace, tau: f64, count: usize) -> Vec<f64> {
    let lo = (2.0 * space.spacing()).max(tau / 64.0).min(tau);
    if count == 1 {
        return vec![tau];
    }
    let ratio = (tau / lo).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| if i + 1 == count { tau } else { lo * ratio.powi(i as i32) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothableSet {
    pub mask: Vec<bool>,
    /// Mass fraction of marked samples.
    pub fraction: f64,
    pub radii: Vec<f64>,
    pub skipped_radii: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Samples where every ball average of the normalization-A distortion, over
/// the radius grid, stays at most `epsilon`. All stored eigenpairs are used.
pub fn smoothable_set(
    space: &SpectralSpace,
    epsilon: f64,
    t: f64,
    tau: f64,
    radius_grid: Option<&[f64]>,
) -> Result<SmoothableSet> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    let radii = match radius_grid {
        Some(r) => {
            validate_radius_grid(r, tau)?;
            r.to_vec()
        }
        None => default_radius_grid(space, tau, 8),
    };
    let mut warnings = Vec::new();
    let (used, skipped): (Vec<f64>, Vec<f64>) = radii.iter().partition(|&&r| r >= space.spacing());
    for r in &skipped {
        warnings.push(format!("radius {r} is below the sample spacing {} and was skipped", space.spacing()));
    }
    if used.is_empty() {
        return Err(Error::UnderResolved {
            radius: tau,
            spacing: space.spacing(),
        });
    }
    let field = distortion_field(space, t, space.cutoff(), Normalization::A)?.values;
    let mass = space.mass();
    let mask: Vec<bool> = (0..space.sample_count())
        .into_par_iter()
        .map(|p| {
            used.iter().all(|&r| {
                let ball = space.ball_query(p, r).expect("positive radius");
                let avg: f64 = ball
                    .ids
                    .iter()
                    .zip(&ball.masses)
                    .map(|(q, m)| m * field[*q])
                    .sum::<f64>()
                    / ball.measure;
                avg <= epsilon
            })
        })
        .collect();
    let marked: f64 = mask.iter().zip(mass).filter(|(k, _)| **k).map(|(_, m)| m).sum();
    let total: f64 = mass.iter().sum();
    Ok(SmoothableSet {
        mask,
        fraction: marked / total,
        radii: used,
        skipped_radii: skipped,
        warnings,
    })
}

fn validate_radius_grid(r: &[f64], tau: f64) -> Result<()> {
    if r.len() < 4 {
        return Err(invalid("radius_grid", "needs at least 4 radii"));
    }
    if r.iter().any(|&x| !(x > 0.0 && x <= tau * (1.0 + 1e-12))) {
        return Err(invalid("radius_grid", "radii must lie in (0, tau]"));
    }
    let ratio = r[1] / r[0];
    if !(ratio > 1.0) || r.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6) {
        return Err(invalid("radius_grid", "radii must be increasing with a constant ratio"));
    }
    Ok(())
}

/// One sampled pair and its Lipschitz ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub p: usize,
    pub q: usize,
    pub distance: f64,
    pub embedded: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub pairs: usize,
    pub min: PairWitness,
    pub max: PairWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilipschitzReport {
    pub t: f64,
    pub l: usize,
    pub rho: f64,
    pub seed: u64,
    pub local: RatioSummary,
    pub global: RatioSummary,
    /// Minimum embedded distance over global pairs at distance ≥ 0.5.
    pub injectivity_proxy: Option<f64>,
    /// Pairs dropped because they coincide.
    pub skipped: usize,
}

fn summarize(pairs: &[PairWitness]) -> Option<RatioSummary> {
    let first = *pairs.first()?;
    let (mut min, mut max) = (first, first);
    for w in pairs {
        if w.ratio < min.ratio {
            min = *w;
        }
        if w.ratio > max.ratio {
            max = *w;
        }
    }
    Some(RatioSummary {
        pairs: pairs.len(),
        min,
        max,
    })
}

/// Lipschitz ratios `‖Φ̃(p) − Φ̃(q)‖ / d(p, q)` over `pairs` seeded local pairs
/// (`q` uniform in `B_ρ(p)`) and as many unrestricted pairs.
pub fn bilipschitz_report(
    space: &SpectralSpace,
    t: f64,
    l: usize,
    rho: f64,
    pairs: usize,
    seed: u64,
) -> Result<BilipschitzReport> {
    if !(rho > 0.0) {
        return Err(invalid("rho", "must be positive"));
    }
    if pairs == 0 {
        return Err(invalid("pairs", "must be positive"));
    }
    let phi = embedding(space, t, l)?;
    let n = space.sample_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut local_idx = Vec::with_capacity(pairs);
    let mut attempts = 0usize;
    while local_idx.len() < pairs {
        attempts += 1;
        if attempts > 100 * pairs {
            return Err(Error::UnderResolved {
                radius: rho,
                spacing: space.spacing(),
            });
        }
        let p = rng.random_range(0..n);
        let ball = space.ball_query(p, rho)?;
        if ball.ids.len() < 2 {
            continue;
        }
        let k = rng.random_range(0..ball.ids.len() - 1);
        let pos = ball.ids.iter().position(|&q| q == p).expect("ball contains its center");
        let q = ball.ids[if k >= pos { k + 1 } else { k }];
        local_idx.push((p, q));
    }
    let global_idx: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
        .collect();

    let witness = |&(p, q): &(usize, usize)| -> Option<PairWitness> {
        let d = space.distance(p, q);
        if d <= 0.0 {
            return None;
        }
        let e = phi[p * l..(p + 1) * l]
            .iter()
            .zip(&phi[q * l..(q + 1) * l])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Some(PairWitness {
            p,
            q,
            distance: d,
            embedded: e,
            ratio: e / d,
        })
    };
    let local: Vec<Option<PairWitness>> = local_idx.par_iter().map(witness).collect();
    let global: Vec<Option<PairWitness>> = global_idx.par_iter().map(witness).collect();
    let skipped = local.iter().chain(&global).filter(|w| w.is_none()).count();
    let local: Vec<PairWitness> = local.into_iter().flatten().collect();
    let global: Vec<PairWitness> = global.into_iter().flatten().collect();
    let injectivity_proxy = global
        .iter()
        .filter(|w| w.distance >= 0.5)
        .map(|w| w.embedded)
        .reduce(f64::min);
    let empty = || invalid("pairs", "every sampled pair coincided");
    Ok(BilipschitzReport {
        t,
        l,
        rho,
        seed,
        local: summarize(&local).ok_or_else(empty)?,
        global: summarize(&global).ok_or_else(empty)?,
        injectivity_proxy,
        skipped,
    })
}

/// Norms of one distortion field, with optional bi-Lipschitz and smoothable data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub space_id: String,
    pub t: f64,
    pub l: usize,
    pub truncation_tail: f64,
    pub normalization: Normalization,
    pub under_resolved: bool,
    /// `(p, ‖field‖_{L^p})`, with `p = ∞` serialized as `null`.
    pub norms: Vec<(Option<f64>, f64)>,
    pub linf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothable_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bilipschitz: Option<BilipschitzReport>,
}

impl DistortionReport {
    /// Truncate at `delta`, build the field and collect the requested norms.
    pub fn compute(
        space: &SpectralSpace,
        t: f64,
        delta: f64,
        normalization: Normalization,
        exponents: &[f64],
        keep_field: bool,
    ) -> Result<Self> {
        let trunc = choose_truncation(space, t, delta)?;
        let field = distortion_field(space, t, trunc.l, normalization)?;
        let norms = exponents
            .iter()
            .map(|&p| {
                distortion_norm(&field.values, p, space).map(|v| (p.is_finite().then_some(p), v))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            space_id: space.id().to_string(),
            t,
            l: trunc.l,
            truncation_tail: trunc.tail,
            normalization,
            under_resolved: field.under_resolved,
            norms,
            linf: distortion_norm(&field.values, f64::INFINITY, space)?,
            field: keep_field.then_some(field.values),
            smoothable_fraction: None,
            bilipschitz: None,
        })
    }

    /// The stored norm for exponent `p`, if requested.
    pub fn norm(&self, p: f64) -> Option<f64> {
        if p.is_infinite() {
            return Some(self.linf);
        }
        self.norms.iter().find(|(q, _)| *q == Some(p)).map(|(_, v)| *v)
    }
}

/// Two-column `t,norm` CSV over a schedule of reports.
pub fn schedule_csv(reports: &[DistortionReport], p: f64) -> String {
    let mut out = String::from("t,norm\n");
    for r in reports {
        if let Some(v) = r.norm(p) {
            out.push_str(&format!("{},{}\n", r.t, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_model_space, ModelKind};

    #[test]
    fn constants() {
        let k1 = DimensionConstants::new(1);
        assert!((k1.c - 4.0 * (8.0 * PI).sqrt()).abs() < 1e-12);
        assert!((k1.c - 20.053026197).abs() < 1e-8);
        assert!((k1.omega - 2.0).abs() < 1e-15);
        assert!((DimensionConstants::new(2).omega - PI).abs() < 1e-15);
        assert!((DimensionConstants::new(3).omega - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn heat_kernel_large_time() {
        let s = build_model_space(ModelKind::circle(), 64, 20).unwrap();
        for (p, q) in [(0, 0), (3, 40), (10, 63)] {
            assert!((heat_kernel(&s, p, q, 50.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-10);
        }
        assert!(heat_kernel(&s, 0, 0, 0.0).is_err());
    }

    #[test]
    fn interval_metric_vanishes_at_endpoint() {
        let s = build_model_space(ModelKind::interval(), 129, 60).unwrap();
        let g = pullback_metric(&s, 0.03, 60).unwrap();
        assert_eq!(g.get(0, 0, 0), 0.0);
        let d = distortion_field(&s, 0.03, 60, Normalization::A).unwrap();
        assert_eq!(d.values[0], 1.0);
    }

    #[test]
    fn underflow_gives_exact_zero() {
        let s = build_model_space(ModelKind::circle(), 64, 30).unwrap();
        let c = embedding_coords(&s, 5, 5000.0, 30).unwrap();
        assert!(c.iter().all(|x| x.is_finite()));
        assert_eq!(c[29], 0.0);
    }

    #[test]
    fn huge_delta_gives_first_cluster() {
        let s = build_model_space(ModelKind::interval(), 65, 20).unwrap();
        assert_eq!(choose_truncation(&s, 0.05, 1e9).unwrap().l, 1);
        let s = build_model_space(ModelKind::circle(), 64, 20).unwrap();
        assert_eq!(choose_truncation(&s, 0.05, 1e9).unwrap().l, 2);
    }

    #[test]
    fn norms_of_constant_field() {
        let s = build_model_space(ModelKind::circle(), 64, 4).unwrap();
        let ones = vec![1.0; 64];
        assert!((distortion_norm(&ones, 1.0, &s).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(distortion_norm(&ones, f64::INFINITY, &s).unwrap(), 1.0);
        assert!(distortion_norm(&ones, 0.5, &s).is_err());
    }

    #[test]
    fn radius_grid_validation() {
        let s = build_model_space(ModelKind::circle(), 256, 4).unwrap();
        let g = default_radius_grid(&s, 1.0, 8);
        assert_eq!(g.len(), 8);
        assert!(validate_radius_grid(&g, 1.0).is_ok());
        assert!(validate_radius_grid(&[0.1, 0.2, 0.3, 0.4], 1.0).is_err());
        assert!(validate_radius_grid(&[0.1, 0.2, 0.4], 1.0).is_err());
    }
}
