//! Korevaar-Schoen energies at scale r and their comparison with the
//! normalized t-energy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{choose_truncation, DimensionConstants};
use crate::error::{Error, Result};
use crate::maps::{normalized_energy, t_energy, validate_schedule, NormalizedEnergy, PointMap};

/// `ks_r(f)(x_p)² = μ(B_r(x_p))⁻¹ Σ_{q ∈ B_r(x_p)} μ_q d_Y(f(x_p), f(x_q))² / r²`.
pub fn ks_density(f: &PointMap, r: f64) -> Result<Vec<f64>> {
    let source = f.source();
    if !(r >= 2.0 * source.spacing()) {
        return Err(Error::UnderResolved {
            radius: r,
            spacing: source.spacing(),
        });
    }
    (0..source.sample_count())
        .into_par_iter()
        .map(|p| {
            let ball = source.ball_query(p, r)?;
            let s: f64 = ball
                .ids
                .iter()
                .zip(&ball.masses)
                .map(|(&q, m)| {
                    let d = f.target_distance(p, q);
                    m * d * d
                })
                .sum();
            Ok(s / (ball.measure * r * r))
        })
        .collect()
}

/// `Σ_p μ_p ks_r(f)(x_p)²`.
pub fn ks_energy(f: &PointMap, r: f64) -> Result<f64> {
    let d = ks_density(f, r)?;
    Ok(d.iter().zip(f.source().mass()).map(|(v, m)| v * m).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub r: f64,
    pub energy: f64,
    /// `(extrapolated A-normalized energy) / energy`
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub source_dim: usize,
    pub entries: Vec<KsEntry>,
    /// Value at the smallest radius.
    pub ks_energy: f64,
    /// Least-squares line in r evaluated at r = 0.
    pub ks_extrapolated: f64,
    pub energy: NormalizedEnergy,
    pub ratio: f64,
    pub expected_ratio: f64,
    pub tolerance: f64,
    pub ratio_pass: bool,
    /// `Σ μ |(n+2) ks_r² − ê_t| / Σ μ |ê_t|` at the smallest r and t, where
    /// `ê_t` is the A-normalized t-energy density.
    pub density_gap: f64,
    pub pass: bool,
}

impl KsReport {
    /// `r,ks_energy,ratio` rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("r,ks_energy,ratio\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.r, e.energy, e.ratio));
        }
        out
    }
}

fn fit_line_at_zero(points: &[(f64, f64)]) -> f64 {
    if points.len() == 1 {
        return points[0].1;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    my - sxy / sxx * mx
}

/// Compare the extrapolated normalized t-energy with the extrapolated
/// Korevaar-Schoen energy; the expected ratio is `(n+2)/2` with `n` the
/// source dimension.
pub fn ks_compare(
    f: &PointMap,
    t_schedule: &[f64],
    r_schedule: &[f64],
    delta: f64,
    tolerance: f64,
    keep_densities: bool,
) -> Result<KsReport> {
    validate_schedule("t_schedule", t_schedule)?;
    validate_schedule("r_schedule", r_schedule)?;
    let n = f.source().intrinsic_dim();
    let energy = normalized_energy(f, t_schedule, delta)?;
    let mass = f.source().mass();

    let mut densities = Vec::with_capacity(r_schedule.len());
    for &r in r_schedule {
        densities.push(ks_density(f, r)?);
    }
    let energies: Vec<f64> = densities
        .iter()
        .map(|d| d.iter().zip(mass).map(|(v, m)| v * m).sum())
        .collect();
    let ks_extrapolated = fit_line_at_zero(
        &r_schedule.iter().copied().zip(energies.iter().copied()).collect::<Vec<_>>(),
    );
    let expected_ratio = (n as f64 + 2.0) / 2.0;
    let ratio = energy.extrapolated_a / ks_extrapolated;

    // matched finest scales
    let t_min = *t_schedule.last().expect("validated");
    let target = f.target();
    let trunc = choose_truncation(target, t_min, delta)?;
    let scale = DimensionConstants::new(target.intrinsic_dim()).scale_a(t_min);
    let t_density = t_energy(f, t_min, trunc.l)?.density;
    let finest = densities.last().expect("validated");
    let (mut num, mut den) = (0.0, 0.0);
    for ((k2, e), m) in finest.iter().zip(&t_density).zip(mass) {
        let e = scale * e;
        num += m * ((n as f64 + 2.0) * k2 - e).abs();
        den += m * e.abs();
    }
    let density_gap = if den > 0.0 { num / den } else { 0.0 };
    let ratio_pass = (ratio / expected_ratio - 1.0).abs() <= tolerance;

    let entries = r_schedule
        .iter()
        .zip(energies.iter())
        .zip(densities)
        .map(|((&r, &e), d)| KsEntry {
            r,
            energy: e,
            ratio: energy.extrapolated_a / e,
            density: keep_densities.then_some(d),
        })
        .collect();
    Ok(KsReport {
        source_dim: n,
        entries,
        ks_energy: *energies.last().expect("validated"),
        ks_extrapolated,
        ratio,
        expected_ratio,
        tolerance,
        ratio_pass,
        pass: ratio_pass && density_gap < tolerance,
        density_gap,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::AnalyticMap;
    use crate::space::{build_model_space, ModelKind};
    use std::f64::consts::PI;

    #[test]
    fn identity_density_on_circle() {
        let s = build_model_space(ModelKind::circle(), 1024, 4).unwrap();
        let f = PointMap::analytic(&s, &s, AnalyticMap::Identity).unwrap();
        let d = ks_density(&f, 0.2).unwrap();
        assert!(d.iter().all(|v| (3.0 * v - 1.0).abs() < 0.02));
        let fine = build_model_space(ModelKind::circle(), 4096, 4).unwrap();
        let f = PointMap::analytic(&fine, &fine, AnalyticMap::Identity).unwrap();
        let e = ks_energy(&f, 0.1).unwrap();
        assert!((e / (2.0 * PI / 3.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let s = build_model_space(ModelKind::circle(), 256, 4).unwrap();
        let f = PointMap::analytic(&s, &s, AnalyticMap::Constant { point: vec![0.3] }).unwrap();
        assert_eq!(ks_energy(&f, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn under_resolved_radius_is_rejected() {
        let s = build_model_space(ModelKind::circle(), 64, 4).unwrap();
        let f = PointMap::analytic(&s, &s, AnalyticMap::Identity).unwrap();
        assert!(matches!(ks_density(&f, 0.1), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn line_fit() {
        assert!((fit_line_at_zero(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]) - 1.0).abs() < 1e-12);
    }
}
