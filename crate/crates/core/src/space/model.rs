//! Closed-form model spaces: the unit-speed circle, the Neumann interval, the
//! flat torus and the round unit sphere.
//!
//! Samples sit on quadrature grids for which the tabulated eigenfunctions are
//! exactly orthonormal: uniform nodes on the circle and torus, trapezoidal
//! nodes on the interval (discrete cosine orthogonality) and a Gauss-Legendre
//! by uniform-azimuth product rule on the sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Highest spherical-harmonic degree tabulated for the round sphere.
pub const MAX_SPHERE_DEGREE: usize = 24;

/// Closed-form model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Circle of the given radius; parameter θ ∈ [0, 2π).
    Circle { radius: f64 },
    /// Interval [0, length] with Neumann boundary; parameter x.
    Interval { length: f64 },
    /// Flat torus [0, a) × [0, b); parameters (u, v).
    FlatTorus { a: f64, b: f64 },
    /// Unit sphere S²; parameters (polar θ, azimuth φ).
    RoundSphere,
}

impl ModelKind {
    pub fn circle() -> Self {
        ModelKind::Circle { radius: 1.0 }
    }

    /// The interval [0, π].
    pub fn interval() -> Self {
        ModelKind::Interval { length: PI }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            ModelKind::Circle { .. } | ModelKind::Interval { .. } => 1,
            ModelKind::FlatTorus { .. } | ModelKind::RoundSphere => 2,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        match *self {
            ModelKind::Circle { radius } => positive("radius", radius),
            ModelKind::Interval { length } => positive("length", length),
            ModelKind::FlatTorus { a, b } => {
                positive("a", a)?;
                positive("b", b)
            }
            ModelKind::RoundSphere => Ok(()),
        }
    }

    pub fn total_measure(&self) -> f64 {
        match *self {
            ModelKind::Circle { radius } => 2.0 * PI * radius,
            ModelKind::Interval { length } => length,
            ModelKind::FlatTorus { a, b } => a * b,
            ModelKind::RoundSphere => 4.0 * PI,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            ModelKind::Circle { radius } => PI * radius,
            ModelKind::Interval { length } => length,
            ModelKind::FlatTorus { a, b } => 0.5 * (a * a + b * b).sqrt(),
            ModelKind::RoundSphere => PI,
        }
    }

    /// Geodesic distance between two parameter points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            ModelKind::Circle { radius } => radius * wrap_angle(x[0] - y[0]).abs(),
            ModelKind::Interval { .. } => (x[0] - y[0]).abs(),
            ModelKind::FlatTorus { a, b } => {
                let du = min_image(x[0] - y[0], a);
                let dv = min_image(x[1] - y[1], b);
                (du * du + dv * dv).sqrt()
            }
            ModelKind::RoundSphere => {
                let p = sphere_point(x[0], x[1]);
                let q = sphere_point(y[0], y[1]);
                let c = cross(p, q);
                let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                s.atan2(dot(p, q))
            }
        }
    }

    /// Ambient embedding of a parameter point.
    pub fn ambient(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            ModelKind::Circle { radius } => vec![radius * x[0].cos(), radius * x[0].sin()],
            ModelKind::Interval { .. } => vec![x[0]],
            ModelKind::FlatTorus { .. } => vec![x[0], x[1]],
            ModelKind::RoundSphere => sphere_point(x[0], x[1]).to_vec(),
        }
    }

    /// Parameters of an ambient point (inverse of [`ambient`](Self::ambient) after projection).
    pub fn coords_from_ambient(&self, p: &[f64]) -> Vec<f64> {
        match *self {
            ModelKind::Circle { .. } => vec![p[1].atan2(p[0]).rem_euclid(2.0 * PI)],
            ModelKind::Interval { length } => vec![p[0].clamp(0.0, length)],
            ModelKind::FlatTorus { a, b } => vec![p[0].rem_euclid(a), p[1].rem_euclid(b)],
            ModelKind::RoundSphere => {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                vec![(p[2] / r).clamp(-1.0, 1.0).acos(), p[1].atan2(p[0]).rem_euclid(2.0 * PI)]
            }
        }
    }

    /// Orthonormal tangent frame at a parameter point, as ambient vectors
    /// (row-major `m x ambient_dim`).
    pub fn frame(&self, x: &[f64]) -> Vec<f64> {
        match *self {
            ModelKind::Circle { .. } => vec![-x[0].sin(), x[0].cos()],
            ModelKind::Interval { .. } => vec![1.0],
            ModelKind::FlatTorus { .. } => vec![1.0, 0.0, 0.0, 1.0],
            ModelKind::RoundSphere => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                vec![ct * cp, ct * sp, -st, -sp, cp, 0.0]
            }
        }
    }

    /// Frame components of the displacement from `x` to `y`, first-order
    /// accurate for nearby points.
    pub(crate) fn displacement(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match *self {
            ModelKind::Circle { radius } => vec![radius * wrap_angle(y[0] - x[0])],
            ModelKind::Interval { .. } => vec![y[0] - x[0]],
            ModelKind::FlatTorus { a, b } => {
                vec![min_image(y[0] - x[0], a), min_image(y[1] - x[1], b)]
            }
            ModelKind::RoundSphere => {
                let p = sphere_point(x[0], x[1]);
                let q = sphere_point(y[0], y[1]);
                let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let f = self.frame(x);
                vec![
                    d[0] * f[0] + d[1] * f[1] + d[2] * f[2],
                    d[0] * f[3] + d[1] * f[4] + d[2] * f[5],
                ]
            }
        }
    }

    /// Move from `x` by `step` along frame direction `a`, in parameter space.
    pub(crate) fn offset(&self, x: &[f64], a: usize, step: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        match *self {
            ModelKind::Circle { radius } => y[0] += step / radius,
            ModelKind::Interval { .. } | ModelKind::FlatTorus { .. } => y[a] += step,
            ModelKind::RoundSphere => {
                if a == 0 {
                    y[0] += step;
                } else {
                    y[1] += step / x[0].sin();
                }
            }
        }
        y
    }
}

pub(crate) fn wrap_angle(d: f64) -> f64 {
    let t = d.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

pub(crate) fn min_image(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

fn sphere_point(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// One closed-form eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BasisFn {
    Constant,
    Circle { k: u32, sine: bool },
    Interval { k: u32 },
    Torus { j: i32, k: i32, sine: bool },
    Sphere { l: u32, m: i32 },
}

/// Sampling grid of a model space.
#[derive(Debug, Clone)]
pub(crate) enum Grid {
    Circle { n: usize },
    Interval { n: usize },
    Torus { n: usize },
    Sphere { thetas: Vec<f64>, weights: Vec<f64>, nphi: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct ModelSpace {
    pub kind: ModelKind,
    pub grid: Grid,
    pub basis: Vec<BasisFn>,
}

impl ModelSpace {
    /// Lay out samples and choose the first `cutoff + 1` eigenfunctions.
    pub fn new(kind: ModelKind, samples: usize, cutoff: usize) -> Result<Self> {
        kind.validate()?;
        if samples < 16 {
            return Err(invalid("samples", format!("need at least 16, got {samples}")));
        }
        if cutoff < 1 {
            return Err(invalid("cutoff", "must be at least 1"));
        }
        let count = cutoff + 1;
        let (grid, basis) = match kind {
            ModelKind::Circle { .. } => {
                let mut basis = vec![BasisFn::Constant];
                let mut k = 1;
                while basis.len() < count {
                    basis.push(BasisFn::Circle { k, sine: false });
                    if basis.len() < count {
                        basis.push(BasisFn::Circle { k, sine: true });
                    }
                    k += 1;
                }
                let kmax = (k - 1) as usize;
                if 2 * kmax >= samples {
                    return Err(invalid(
                        "samples",
                        format!("{samples} circle samples cannot resolve frequency {kmax}"),
                    ));
                }
                (Grid::Circle { n: samples }, basis)
            }
            ModelKind::Interval { .. } => {
                if cutoff >= samples - 1 {
                    return Err(invalid(
                        "cutoff",
                        format!("interval cutoff {cutoff} needs more than {samples} samples"),
                    ));
                }
                let mut basis = vec![BasisFn::Constant];
                basis.extend((1..count as u32).map(|k| BasisFn::Interval { k }));
                (Grid::Interval { n: samples }, basis)
            }
            ModelKind::FlatTorus { a, b } => {
                let n = (samples as f64).sqrt().round() as usize;
                let basis = torus_basis(a, b, count);
                let reach = basis
                    .iter()
                    .map(|f| match f {
                        BasisFn::Torus { j, k, .. } => j.unsigned_abs().max(k.unsigned_abs()),
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(0) as usize;
                if 2 * reach >= n {
                    return Err(invalid(
                        "samples",
                        format!("{n}x{n} torus grid cannot resolve frequency {reach}"),
                    ));
                }
                (Grid::Torus { n }, basis)
            }
            ModelKind::RoundSphere => {
                let mut basis = Vec::with_capacity(count);
                'outer: for l in 0..=MAX_SPHERE_DEGREE as u32 {
                    for m in -(l as i32)..=(l as i32) {
                        if basis.len() == count {
                            break 'outer;
                        }
                        basis.push(if l == 0 {
                            BasisFn::Constant
                        } else {
                            BasisFn::Sphere { l, m }
                        });
                    }
                }
                if basis.len() < count {
                    return Err(invalid(
                        "cutoff",
                        format!(
                            "round sphere harmonics are tabulated up to degree {MAX_SPHERE_DEGREE} ({} functions)",
                            (MAX_SPHERE_DEGREE + 1).pow(2)
                        ),
                    ));
                }
                let lmax = match basis.last() {
                    Some(BasisFn::Sphere { l, .. }) => *l as usize,
                    _ => 0,
                };
                let ntheta = ((samples / 2) as f64).sqrt().floor() as usize;
                if ntheta < lmax + 1 {
                    return Err(invalid(
                        "samples",
                        format!("sphere degree {lmax} needs at least {} samples", 2 * (lmax + 1).pow(2)),
                    ));
                }
                let (nodes, weights) = gauss_legendre(ntheta);
                // descending z gives ascending polar angle
                let thetas: Vec<f64> = nodes.iter().rev().map(|z| z.acos()).collect();
                let weights: Vec<f64> = weights.into_iter().rev().collect();
                (
                    Grid::Sphere {
                        thetas,
                        weights,
                        nphi: 2 * ntheta,
                    },
                    basis,
                )
            }
        };
        Ok(Self { kind, grid, basis })
    }

    pub fn sample_count(&self) -> usize {
        match &self.grid {
            Grid::Circle { n } | Grid::Interval { n } => *n,
            Grid::Torus { n } => n * n,
            Grid::Sphere { thetas, nphi, .. } => thetas.len() * nphi,
        }
    }

    /// Parameter coordinates and quadrature weight of sample `p`.
    pub fn sample(&self, p: usize) -> (Vec<f64>, f64) {
        match (&self.grid, &self.kind) {
            (Grid::Circle { n }, ModelKind::Circle { radius }) => {
                let h = 2.0 * PI / *n as f64;
                (vec![h * p as f64], h * radius)
            }
            (Grid::Interval { n }, ModelKind::Interval { length }) => {
                let h = length / (*n - 1) as f64;
                let w = if p == 0 || p == n - 1 { h / 2.0 } else { h };
                (vec![h * p as f64], w)
            }
            (Grid::Torus { n }, ModelKind::FlatTorus { a, b }) => {
                let (i, j) = (p / n, p % n);
                let (hu, hv) = (a / *n as f64, b / *n as f64);
                (vec![hu * i as f64, hv * j as f64], hu * hv)
            }
            (Grid::Sphere { thetas, weights, nphi }, ModelKind::RoundSphere) => {
                let (i, j) = (p / nphi, p % nphi);
                let hphi = 2.0 * PI / *nphi as f64;
                (vec![thetas[i], hphi * j as f64], weights[i] * hphi)
            }
            _ => unreachable!("grid and kind always agree"),
        }
    }

    /// Largest nearest-neighbour gap of the grid.
    pub fn spacing(&self) -> f64 {
        match (&self.grid, &self.kind) {
            (Grid::Circle { n }, ModelKind::Circle { radius }) => 2.0 * PI * radius / *n as f64,
            (Grid::Interval { n }, ModelKind::Interval { length }) => length / (*n - 1) as f64,
            (Grid::Torus { n }, ModelKind::FlatTorus { a, b }) => a.max(*b) / *n as f64,
            (Grid::Sphere { thetas, nphi, .. }, _) => {
                let mut gap = thetas[0].max(PI - thetas[thetas.len() - 1]);
                for w in thetas.windows(2) {
                    gap = gap.max(w[1] - w[0]);
                }
                gap.max(2.0 * PI / *nphi as f64)
            }
            _ => unreachable!(),
        }
    }

    pub fn eigenvalue(&self, f: BasisFn) -> f64 {
        match (f, &self.kind) {
            (BasisFn::Constant, _) => 0.0,
            (BasisFn::Circle { k, .. }, ModelKind::Circle { radius }) => (k as f64 / radius).powi(2),
            (BasisFn::Interval { k }, ModelKind::Interval { length }) => (k as f64 * PI / length).powi(2),
            (BasisFn::Torus { j, k, .. }, ModelKind::FlatTorus { a, b }) => torus_lambda(*a, *b, j, k),
            (BasisFn::Sphere { l, .. }, _) => (l * (l + 1)) as f64,
            _ => unreachable!(),
        }
    }

    /// Values and frame gradients of every basis function at parameter `x`.
    /// `grads` is row-major `basis.len() x m`.
    pub fn eval_all(&self, x: &[f64], values: &mut [f64], grads: &mut [f64]) {
        let m = self.kind.intrinsic_dim();
        if let ModelKind::RoundSphere = self.kind {
            let lmax = self
                .basis
                .iter()
                .map(|f| match f {
                    BasisFn::Sphere { l, .. } => *l as usize,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            let table = LegendreTable::new(lmax, x[0]);
            for (i, f) in self.basis.iter().enumerate() {
                let (v, g) = sphere_eval(&table, *f, x);
                values[i] = v;
                grads[i * m..i * m + 2].copy_from_slice(&g);
            }
            return;
        }
        for (i, f) in self.basis.iter().enumerate() {
            let (v, g) = self.eval(*f, x);
            values[i] = v;
            grads[i * m..(i + 1) * m].copy_from_slice(&g[..m]);
        }
    }

    fn eval(&self, f: BasisFn, x: &[f64]) -> (f64, [f64; 2]) {
        match (f, &self.kind) {
            (BasisFn::Constant, kind) => ((1.0 / kind.total_measure()).sqrt(), [0.0; 2]),
            (BasisFn::Circle { k, sine }, ModelKind::Circle { radius }) => {
                let norm = 1.0 / (PI * radius).sqrt();
                let kf = k as f64;
                let (s, c) = (kf * x[0]).sin_cos();
                if sine {
                    (norm * s, [norm * kf / radius * c, 0.0])
                } else {
                    (norm * c, [-norm * kf / radius * s, 0.0])
                }
            }
            (BasisFn::Interval { k }, ModelKind::Interval { length }) => {
                let norm = (2.0 / length).sqrt();
                let w = k as f64 * PI / length;
                let (s, c) = (w * x[0]).sin_cos();
                (norm * c, [-norm * w * s, 0.0])
            }
            (BasisFn::Torus { j, k, sine }, ModelKind::FlatTorus { a, b }) => {
                let norm = (2.0 / (a * b)).sqrt();
                let wu = 2.0 * PI * j as f64 / a;
                let wv = 2.0 * PI * k as f64 / b;
                let (s, c) = (wu * x[0] + wv * x[1]).sin_cos();
                if sine {
                    (norm * s, [norm * c * wu, norm * c * wv])
                } else {
                    (norm * c, [-norm * s * wu, -norm * s * wv])
                }
            }
            _ => unreachable!("basis function does not belong to this space"),
        }
    }
}

fn torus_lambda(a: f64, b: f64, j: i32, k: i32) -> f64 {
    (2.0 * PI * j as f64 / a).powi(2) + (2.0 * PI * k as f64 / b).powi(2)
}

fn torus_basis(a: f64, b: f64, count: usize) -> Vec<BasisFn> {
    let mut reach = 1i32;
    loop {
        // half-lattice: j > 0, or j == 0 and k > 0
        let mut modes: Vec<(f64, i32, i32)> = Vec::new();
        for j in 0..=reach {
            for k in -reach..=reach {
                if j == 0 && k <= 0 {
                    continue;
                }
                modes.push((torus_lambda(a, b, j, k), j, k));
            }
        }
        modes.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let needed = (count.saturating_sub(1) + 1) / 2;
        let boundary = (2.0 * PI * (reach + 1) as f64 / a.max(b)).powi(2);
        if modes.len() >= needed && modes[needed.max(1) - 1].0 < boundary {
            let mut basis = vec![BasisFn::Constant];
            for (_, j, k) in modes {
                for sine in [false, true] {
                    if basis.len() < count {
                        basis.push(BasisFn::Torus { j, k, sine });
                    }
                }
            }
            return basis;
        }
        reach *= 2;
    }
}

/// Fully normalized associated Legendre functions `P̄_l^m(cos θ)` with
/// `∫ |Y_lm|² = 1` on S², and their θ-derivatives.
struct LegendreTable {
    lmax: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
}

impl LegendreTable {
    fn idx(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    fn new(lmax: usize, theta: f64) -> Self {
        let n = (lmax + 1) * (lmax + 2) / 2;
        let mut p = vec![0.0; n];
        let (st, ct) = theta.sin_cos();
        p[0] = (1.0 / (4.0 * PI)).sqrt();
        for m in 1..=lmax {
            let mf = m as f64;
            p[Self::idx(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st * p[Self::idx(m - 1, m - 1)];
        }
        for m in 0..lmax {
            p[Self::idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * ct * p[Self::idx(m, m)];
        }
        for m in 0..=lmax {
            for l in (m + 2)..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                p[Self::idx(l, m)] = a * (ct * p[Self::idx(l - 1, m)] - b * p[Self::idx(l - 2, m)]);
            }
        }
        let mut dp = vec![0.0; n];
        for l in 1..=lmax {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                let lower = if m < l { p[Self::idx(l - 1, m)] } else { 0.0 };
                let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
                dp[Self::idx(l, m)] = (lf * ct * p[Self::idx(l, m)] - c * lower) / st;
            }
        }
        Self { lmax, p, dp }
    }
}

fn sphere_eval(table: &LegendreTable, f: BasisFn, x: &[f64]) -> (f64, [f64; 2]) {
    match f {
        BasisFn::Constant => ((1.0 / (4.0 * PI)).sqrt(), [0.0; 2]),
        BasisFn::Sphere { l, m } => {
            let l = l as usize;
            debug_assert!(l <= table.lmax);
            let am = m.unsigned_abs() as usize;
            let i = LegendreTable::idx(l, am);
            let (pv, dpv) = (table.p[i], table.dp[i]);
            let st = x[0].sin();
            if m == 0 {
                return (pv, [dpv, 0.0]);
            }
            let s2 = std::f64::consts::SQRT_2;
            let mf = am as f64;
            let (s, c) = (mf * x[1]).sin_cos();
            if m > 0 {
                (s2 * pv * c, [s2 * dpv * c, -s2 * pv * mf * s / st])
            } else {
                (s2 * pv * s, [s2 * dpv * s, s2 * pv * mf * c / st])
            }
        }
        _ => unreachable!(),
    }
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ z^12 = 2/13, exact for degree ≤ 13
        let i: f64 = x.iter().zip(&w).map(|(z, w)| w * z.powi(12)).sum();
        assert!((i - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn angle_wrapping() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((min_image(0.9, 1.0) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn sphere_distance_is_great_circle() {
        let k = ModelKind::RoundSphere;
        let d = k.distance(&[PI / 2.0, 0.0], &[PI / 2.0, PI / 2.0]);
        assert!((d - PI / 2.0).abs() < 1e-14);
        assert!(k.distance(&[0.3, 1.0], &[0.3, 1.0]).abs() < 1e-15);
    }

    #[test]
    fn torus_basis_is_sorted() {
        let b = torus_basis(2.0 * PI, 2.0 * PI, 30);
        let lam: Vec<f64> = b
            .iter()
            .map(|f| match f {
                BasisFn::Torus { j, k, .. } => torus_lambda(2.0 * PI, 2.0 * PI, *j, *k),
                _ => 0.0,
            })
            .collect();
        assert!(lam.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(&lam[1..5], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(&lam[5..9], &[2.0, 2.0, 2.0, 2.0]);
    }
}
