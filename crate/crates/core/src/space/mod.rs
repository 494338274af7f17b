//! Spectral representations of metric-measure spaces.
//!
//! A [`SpectralSpace`] stores samples with quadrature masses, the lowest
//! `L + 1` Laplace eigenpairs (values and frame gradients at every sample) and
//! a geodesic distance oracle. Model spaces use closed-form eigenpairs;
//! meshes go through the P1 finite-element pencil.

mod io;
pub mod mesh;
pub mod model;

use std::ops::Range;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::solve_spectrum;
use mesh::MeshOperators;
use model::{Grid, ModelSpace};

pub use io::{SpaceDocument, SpaceSource, SCHEMA_VERSION};
pub use mesh::Mesh;
pub use model::{ModelKind, MAX_SPHERE_DEGREE};

/// Discrete L²-orthonormality tolerance.
pub const TOL_ORTH: f64 = 1e-8;
/// Triangle-inequality slack for analytic distances.
pub const TOL_DIST: f64 = 1e-12;

#[derive(Debug)]
pub(crate) enum Backend {
    Model(ModelSpace),
    Mesh {
        mesh: Mesh,
        ops: MeshOperators,
        rows: Vec<OnceLock<Vec<f64>>>,
    },
}

/// A discretized metric-measure space with its truncated spectrum.
#[derive(Debug)]
pub struct SpectralSpace {
    id: String,
    dim: usize,
    backend: Backend,
    mass: Vec<f64>,
    coords: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    /// `phi[i * P + p] = φ_i(x_p)`
    phi: Vec<f64>,
    /// `grad[(i * P + p) * m + a]`
    grad: Vec<f64>,
    spacing: f64,
    diameter: f64,
    total_measure: f64,
    solver_iterations: usize,
    solver_residual: f64,
}

/// Samples inside an open geodesic ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub ids: Vec<usize>,
    pub masses: Vec<f64>,
    pub distances: Vec<f64>,
    pub measure: f64,
}

/// Closed-form model space with `samples` grid points and cutoff `cutoff`
/// (eigenpairs `0..=cutoff`).
pub fn build_model_space(kind: ModelKind, samples: usize, cutoff: usize) -> Result<SpectralSpace> {
    let model = ModelSpace::new(kind.clone(), samples, cutoff)?;
    let p_count = model.sample_count();
    let m = kind.intrinsic_dim();
    let count = model.basis.len();
    let eigenvalues: Vec<f64> = model.basis.iter().map(|f| model.eigenvalue(*f)).collect();

    let per_sample: Vec<(Vec<f64>, f64, Vec<f64>, Vec<f64>)> = (0..p_count)
        .into_par_iter()
        .map(|p| {
            let (x, w) = model.sample(p);
            let mut values = vec![0.0; count];
            let mut grads = vec![0.0; count * m];
            model.eval_all(&x, &mut values, &mut grads);
            (x, w, values, grads)
        })
        .collect();

    let mut phi = vec![0.0; count * p_count];
    let mut grad = vec![0.0; count * p_count * m];
    let mut mass = Vec::with_capacity(p_count);
    let mut coords = Vec::with_capacity(p_count);
    for (p, (x, w, values, grads)) in per_sample.into_iter().enumerate() {
        for i in 0..count {
            phi[i * p_count + p] = values[i];
            let dst = (i * p_count + p) * m;
            grad[dst..dst + m].copy_from_slice(&grads[i * m..(i + 1) * m]);
        }
        mass.push(w);
        coords.push(x);
    }

    let id = match &kind {
        ModelKind::Circle { .. } => "circle",
        ModelKind::Interval { .. } => "interval",
        ModelKind::FlatTorus { .. } => "flat_torus",
        ModelKind::RoundSphere => "round_sphere",
    };
    Ok(SpectralSpace {
        id: format!("{id}-P{p_count}-L{cutoff}"),
        dim: m,
        spacing: model.spacing(),
        diameter: kind.diameter(),
        total_measure: kind.total_measure(),
        backend: Backend::Model(model),
        mass,
        coords,
        eigenvalues,
        phi,
        grad,
        solver_iterations: 0,
        solver_residual: 0.0,
    })
}

/// Cotangent-Laplacian spectrum of a triangle mesh, eigenpairs `0..=cutoff`.
pub fn build_from_mesh(mesh: Mesh, cutoff: usize) -> Result<SpectralSpace> {
    mesh.validate()?;
    let n = mesh.vertex_count();
    if cutoff < 1 || cutoff >= n {
        return Err(invalid("cutoff", format!("must lie in [1, {}), got {cutoff}", n)));
    }
    let ops = MeshOperators::assemble(&mesh);
    let spectrum = solve_spectrum(&ops.stiffness, &ops.mass, cutoff + 1)?;
    let mut eigenvalues = spectrum.eigenvalues;
    eigenvalues[0] = eigenvalues[0].max(0.0);
    let count = cutoff + 1;
    let mut phi = vec![0.0; count * n];
    let mut grad = vec![0.0; count * n * 2];
    for i in 0..count {
        let col: Vec<f64> = spectrum.eigenvectors.column(i).iter().copied().collect();
        let g = ops.vertex_gradients(&mesh, &col);
        phi[i * n..(i + 1) * n].copy_from_slice(&col);
        for (p, gp) in g.iter().enumerate() {
            let dst = (i * n + p) * 2;
            grad[dst..dst + 2].copy_from_slice(gp);
        }
    }
    Ok(SpectralSpace::from_mesh_parts(
        mesh,
        ops,
        format!("mesh-V{n}-L{cutoff}"),
        eigenvalues,
        phi,
        grad,
        spectrum.iterations,
        spectrum.max_residual,
    ))
}

impl SpectralSpace {
    #[allow(clippy::too_many_arguments)]
    fn from_mesh_parts(
        mesh: Mesh,
        ops: MeshOperators,
        id: String,
        eigenvalues: Vec<f64>,
        phi: Vec<f64>,
        grad: Vec<f64>,
        solver_iterations: usize,
        solver_residual: f64,
    ) -> Self {
        let n = mesh.vertex_count();
        let far = ops.dijkstra(0, f64::INFINITY).into_iter().fold(0.0, f64::max);
        let rows = (0..n).map(|_| OnceLock::new()).collect();
        Self {
            id,
            dim: 2,
            mass: ops.mass.clone(),
            total_measure: ops.mass.iter().sum(),
            spacing: ops.max_edge,
            diameter: 2.0 * far,
            coords: Vec::new(),
            eigenvalues,
            phi,
            grad,
            backend: Backend::Mesh { mesh, ops, rows },
            solver_iterations,
            solver_residual,
        }
    }

    /// Replace the identifier used in reports and exports.
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.dim
    }

    pub fn sample_count(&self) -> usize {
        self.mass.len()
    }

    /// Index of the highest stored eigenpair.
    pub fn cutoff(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Values of `φ_i` at every sample.
    pub fn eigenfunction(&self, i: usize) -> &[f64] {
        let n = self.sample_count();
        &self.phi[i * n..(i + 1) * n]
    }

    /// Frame gradient of `φ_i` at sample `p`.
    pub fn eigengradient(&self, i: usize, p: usize) -> &[f64] {
        let start = (i * self.sample_count() + p) * self.dim;
        &self.grad[start..start + self.dim]
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn diameter_bound(&self) -> f64 {
        self.diameter
    }

    /// Largest gap between neighbouring samples.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Solver iterations and final relative residual (zero for model spaces).
    pub fn solver_diagnostics(&self) -> (usize, f64) {
        (self.solver_iterations, self.solver_residual)
    }

    pub fn model_kind(&self) -> Option<&ModelKind> {
        match &self.backend {
            Backend::Model(m) => Some(&m.kind),
            Backend::Mesh { .. } => None,
        }
    }

    pub fn mesh(&self) -> Option<&Mesh> {
        match &self.backend {
            Backend::Mesh { mesh, .. } => Some(mesh),
            Backend::Model(_) => None,
        }
    }

    /// Parameter coordinates of sample `p` on a model space.
    pub fn coords(&self, p: usize) -> Option<&[f64]> {
        self.coords.get(p).map(Vec::as_slice)
    }

    /// Ambient position of sample `p` (mesh vertex or model embedding).
    pub fn position(&self, p: usize) -> Vec<f64> {
        match &self.backend {
            Backend::Model(m) => m.kind.ambient(&self.coords[p]),
            Backend::Mesh { mesh, .. } => mesh.vertices[p].to_vec(),
        }
    }

    /// Tangent frame of sample `p` as row-major `m x ambient` vectors.
    pub fn frame(&self, p: usize) -> Vec<f64> {
        match &self.backend {
            Backend::Model(m) => m.kind.frame(&self.coords[p]),
            Backend::Mesh { ops, .. } => {
                let [e1, e2] = ops.frames[p];
                e1.iter().chain(e2.iter()).copied().collect()
            }
        }
    }

    /// Geodesic distance between samples.
    pub fn distance(&self, p: usize, q: usize) -> f64 {
        match &self.backend {
            Backend::Model(m) => m.kind.distance(&self.coords[p], &self.coords[q]),
            Backend::Mesh { ops, rows, .. } => {
                let (a, b) = (p.min(q), p.max(q));
                rows[a].get_or_init(|| ops.dijkstra(a, f64::INFINITY))[b]
            }
        }
    }

    /// Geodesic distance between parameter points of a model space.
    pub fn point_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.backend {
            Backend::Model(m) => Ok(m.kind.distance(x, y)),
            Backend::Mesh { .. } => Err(Error::Unsupported("point distances on meshes".into())),
        }
    }

    /// Samples `q` with `d(p, q) < r`.
    pub fn ball_query(&self, p: usize, r: f64) -> Result<Ball> {
        if !(r > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {r}")));
        }
        match &self.backend {
            Backend::Model(_) => self.ball_at(&self.coords[p].clone(), r),
            Backend::Mesh { ops, .. } => {
                let d = ops.dijkstra(p, r);
                let ids: Vec<usize> = (0..d.len()).filter(|&q| d[q] < r).collect();
                Ok(self.collect_ball(ids, |q| d[q]))
            }
        }
    }

    /// Samples within distance `r` of an arbitrary parameter point of a model space.
    pub fn ball_at(&self, x: &[f64], r: f64) -> Result<Ball> {
        let Backend::Model(model) = &self.backend else {
            return Err(Error::Unsupported("balls around off-sample points on meshes".into()));
        };
        let kind = &model.kind;
        let candidates = model_window(model, x, r);
        let ids: Vec<usize> = candidates
            .into_iter()
            .filter(|&q| kind.distance(x, &self.coords[q]) < r)
            .collect();
        Ok(self.collect_ball(ids, |q| kind.distance(x, &self.coords[q])))
    }

    fn collect_ball(&self, ids: Vec<usize>, dist: impl Fn(usize) -> f64) -> Ball {
        let masses: Vec<f64> = ids.iter().map(|&q| self.mass[q]).collect();
        let distances = ids.iter().map(|&q| dist(q)).collect();
        let measure = masses.iter().sum();
        Ball {
            ids,
            masses,
            distances,
            measure,
        }
    }

    /// Index ranges of eigenvalue clusters, grouped with tolerance
    /// `max(1e-8, 1e-6·λ)` against the first member.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            let lead = self.eigenvalues[start];
            if i == self.eigenvalues.len() || self.eigenvalues[i] - lead > cluster_tol(lead) {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// The cluster whose representative matches `lambda`.
    pub fn cluster_of(&self, lambda: f64) -> Result<Range<usize>> {
        self.clusters()
            .into_iter()
            .find(|c| (self.eigenvalues[c.start] - lambda).abs() <= cluster_tol(lambda.abs()))
            .ok_or(Error::NotInSpectrum(lambda))
    }

    /// `max |Σ_p μ_p φ_i φ_j − δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let count = self.eigenvalues.len();
        (0..count)
            .into_par_iter()
            .map(|i| {
                let fi = self.eigenfunction(i);
                (i..count)
                    .map(|j| {
                        let g = weighted_sum(fi, self.eigenfunction(j), &self.mass);
                        (g - if i == j { 1.0 } else { 0.0 }).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Coefficients `c_i = Σ_p μ_p u_p φ_i(x_p)` for `i ≤ cutoff`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        (0..self.eigenvalues.len())
            .map(|i| weighted_sum(u, self.eigenfunction(i), &self.mass))
            .collect()
    }

    /// Gradient operator used for sphere-valued maps: spectral synthesis on
    /// model spaces (exact for band-limited data), face averaging on meshes.
    /// Row-major `P x m`.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Model(_) => {
                let c = self.project(u);
                let n = self.sample_count();
                let m = self.dim;
                let mut out = vec![0.0; n * m];
                for (i, ci) in c.iter().enumerate() {
                    let g = &self.grad[i * n * m..(i + 1) * n * m];
                    for (o, gi) in out.iter_mut().zip(g) {
                        *o += ci * gi;
                    }
                }
                out
            }
            Backend::Mesh { .. } => self.discrete_gradient(u),
        }
    }

    /// Laplacian with the sign `Δφ + λφ = 0` on eigenpairs.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Model(_) => {
                let c = self.project(u);
                let n = self.sample_count();
                let mut out = vec![0.0; n];
                for (i, ci) in c.iter().enumerate() {
                    let s = -self.eigenvalues[i] * ci;
                    for (o, f) in out.iter_mut().zip(self.eigenfunction(i)) {
                        *o += s * f;
                    }
                }
                out
            }
            Backend::Mesh { ops, .. } => {
                let su = ops.stiffness.mul_vec(u);
                su.iter().zip(&ops.mass).map(|(s, m)| -s / m).collect()
            }
        }
    }

    /// Pointwise `|∇u|²`. On meshes the mass-weighted sum equals `uᵀSu` exactly.
    pub fn dirichlet_density(&self, u: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Model(_) => self
                .gradient(u)
                .chunks(self.dim)
                .map(|g| g.iter().map(|x| x * x).sum())
                .collect(),
            Backend::Mesh { mesh, ops, .. } => ops.dirichlet_density(mesh, u),
        }
    }

    /// Local finite-difference gradient of sampled values (centered
    /// differences on model grids, face averaging on meshes). Row-major `P x m`.
    pub fn discrete_gradient(&self, u: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Mesh { mesh, ops, .. } => ops.vertex_gradients(mesh, u).into_iter().flatten().collect(),
            Backend::Model(model) => grid_gradient(model, u),
        }
    }

    /// Values and frame gradients (`(L+1) x m`) of every stored eigenfunction
    /// at an arbitrary parameter point of a model space.
    pub fn eval_basis(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let Backend::Model(model) = &self.backend else {
            return Err(Error::Unsupported("off-sample evaluation on meshes".into()));
        };
        let count = self.eigenvalues.len();
        let mut values = vec![0.0; count];
        let mut grads = vec![0.0; count * self.dim];
        model.eval_all(x, &mut values, &mut grads);
        Ok((values, grads))
    }

    pub(crate) fn mesh_ops(&self) -> Option<&MeshOperators> {
        match &self.backend {
            Backend::Mesh { ops, .. } => Some(ops),
            Backend::Model(_) => None,
        }
    }
}

pub(crate) fn cluster_tol(lambda: f64) -> f64 {
    (1e-6 * lambda).max(1e-8)
}

pub fn weighted_sum(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), m)| x * y * m).sum()
}

/// Candidate sample ids (sorted, unique) covering the ball of radius `r` at `x`.
fn model_window(model: &ModelSpace, x: &[f64], r: f64) -> Vec<usize> {
    use std::f64::consts::PI;
    let periodic = |center: f64, reach: f64, h: f64, n: usize| -> Vec<usize> {
        let lo = ((center - reach) / h).floor() as i64 - 1;
        let hi = ((center + reach) / h).ceil() as i64 + 1;
        if hi - lo + 1 >= n as i64 {
            return (0..n).collect();
        }
        let mut v: Vec<usize> = (lo..=hi).map(|j| j.rem_euclid(n as i64) as usize).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    match (&model.grid, &model.kind) {
        (Grid::Circle { n }, ModelKind::Circle { radius }) => {
            periodic(x[0], r / radius, 2.0 * PI / *n as f64, *n)
        }
        (Grid::Interval { n }, ModelKind::Interval { length }) => {
            let h = length / (*n - 1) as f64;
            let lo = (((x[0] - r) / h).floor() - 1.0).max(0.0) as usize;
            let hi = ((((x[0] + r) / h).ceil() + 1.0).max(0.0) as usize).min(n - 1);
            (lo..=hi).collect()
        }
        (Grid::Torus { n }, ModelKind::FlatTorus { a, b }) => {
            let iu = periodic(x[0], r, a / *n as f64, *n);
            let iv = periodic(x[1], r, b / *n as f64, *n);
            let mut out = Vec::with_capacity(iu.len() * iv.len());
            for i in &iu {
                for j in &iv {
                    out.push(i * n + j);
                }
            }
            out
        }
        (Grid::Sphere { thetas, nphi, .. }, _) => {
            let mut out = Vec::new();
            for (i, th) in thetas.iter().enumerate() {
                if (th - x[0]).abs() < r {
                    out.extend(i * nphi..(i + 1) * nphi);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

fn grid_gradient(model: &ModelSpace, u: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    match (&model.grid, &model.kind) {
        (Grid::Circle { n }, ModelKind::Circle { radius }) => {
            let h = 2.0 * PI * radius / *n as f64;
            (0..*n)
                .map(|p| (u[(p + 1) % n] - u[(p + n - 1) % n]) / (2.0 * h))
                .collect()
        }
        (Grid::Interval { n }, ModelKind::Interval { length }) => {
            let n = *n;
            let h = length / (n - 1) as f64;
            (0..n)
                .map(|p| {
                    if p == 0 {
                        (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                    } else if p == n - 1 {
                        (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
                    } else {
                        (u[p + 1] - u[p - 1]) / (2.0 * h)
                    }
                })
                .collect()
        }
        (Grid::Torus { n }, ModelKind::FlatTorus { a, b }) => {
            let n = *n;
            let (hu, hv) = (a / n as f64, b / n as f64);
            let mut out = Vec::with_capacity(2 * n * n);
            for i in 0..n {
                for j in 0..n {
                    let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
                    let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
                    out.push((u[ip * n + j] - u[im * n + j]) / (2.0 * hu));
                    out.push((u[i * n + jp] - u[i * n + jm]) / (2.0 * hv));
                }
            }
            out
        }
        (Grid::Sphere { thetas, nphi, .. }, _) => {
            let nt = thetas.len();
            let nphi = *nphi;
            let half = nphi / 2;
            let hphi = 2.0 * PI / nphi as f64;
            let mut out = Vec::with_capacity(2 * nt * nphi);
            for i in 0..nt {
                for j in 0..nphi {
                    // neighbours along the meridian; across a pole the ring
                    // continues on the opposite meridian
                    let (tm, um) = if i == 0 {
                        (-thetas[0], u[(j + half) % nphi])
                    } else {
                        (thetas[i - 1], u[(i - 1) * nphi + j])
                    };
                    let (tp, up) = if i == nt - 1 {
                        (2.0 * PI - thetas[i], u[i * nphi + (j + half) % nphi])
                    } else {
                        (thetas[i + 1], u[(i + 1) * nphi + j])
                    };
                    let u0 = u[i * nphi + j];
                    let (h1, h2) = (thetas[i] - tm, tp - thetas[i]);
                    let dtheta = -h2 / (h1 * (h1 + h2)) * um + (h2 - h1) / (h1 * h2) * u0
                        + h1 / (h2 * (h1 + h2)) * up;
                    let dphi = (u[i * nphi + (j + 1) % nphi] - u[i * nphi + (j + nphi - 1) % nphi])
                        / (2.0 * hphi * thetas[i].sin());
                    out.push(dtheta);
                    out.push(dphi);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_spectrum_and_orthonormality() {
        let s = build_model_space(ModelKind::circle(), 256, 41).unwrap();
        let expected: Vec<f64> = (0..=41).map(|i| (((i + 1) / 2) as f64).powi(2)).collect();
        assert_eq!(s.eigenvalues(), expected.as_slice());
        assert!(s.orthonormality_residual() < 1e-10);
        assert!((s.mass().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn interval_eigenfunction_at_endpoint() {
        let s = build_model_space(ModelKind::interval(), 257, 40).unwrap();
        assert!((s.eigenfunction(3)[0] - (2.0 / PI).sqrt()).abs() < 1e-14);
        assert_eq!(s.eigengradient(3, 0)[0].abs(), 0.0);
        assert!(s.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn sphere_spectrum_degree_three() {
        let s = build_model_space(ModelKind::RoundSphere, 200, 15).unwrap();
        let mut expected = vec![0.0];
        for l in 1..=3u32 {
            expected.extend(std::iter::repeat((l * (l + 1)) as f64).take(2 * l as usize + 1));
        }
        assert_eq!(s.eigenvalues(), expected.as_slice());
        assert!(s.orthonormality_residual() < 1e-10);
        let clusters = s.clusters();
        assert_eq!(clusters, vec![0..1, 1..4, 4..9, 9..16]);
    }

    #[test]
    fn torus_orthonormality() {
        let s = build_model_space(ModelKind::FlatTorus { a: 2.0 * PI, b: 2.0 * PI }, 1024, 40).unwrap();
        assert!(s.orthonormality_residual() < 1e-10);
        assert_eq!(s.eigenvalues()[1], 1.0);
    }

    #[test]
    fn ball_queries() {
        let s = build_model_space(ModelKind::circle(), 256, 10).unwrap();
        let all = s.ball_query(0, PI + 0.1).unwrap();
        assert_eq!(all.ids.len(), 256);
        let b = s.ball_query(17, 0.1).unwrap();
        assert!((b.measure - 0.2).abs() < 2.0 * 2.0 * PI / 256.0);
        assert!(b.ids.contains(&17));
        let brute: Vec<usize> = (0..256).filter(|&q| s.distance(17, q) < 0.1).collect();
        assert_eq!(b.ids, brute);

        let iv = build_model_space(ModelKind::interval(), 257, 10).unwrap();
        let b = iv.ball_query(0, 0.5).unwrap();
        assert!((b.measure - 0.5).abs() < PI / 256.0);
    }

    #[test]
    fn spectral_laplacian_of_eigenfunction() {
        let s = build_model_space(ModelKind::RoundSphere, 512, 15).unwrap();
        let f = s.eigenfunction(6).to_vec();
        let lap = s.laplacian(&f);
        for (l, v) in lap.iter().zip(&f) {
            assert!((l + 6.0 * v).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_grid_gradient_is_second_order() {
        let s = build_model_space(ModelKind::RoundSphere, 2 * 40 * 40, 3).unwrap();
        let f = s.eigenfunction(2).to_vec();
        let g = s.discrete_gradient(&f);
        let mut err: f64 = 0.0;
        for p in 0..s.sample_count() {
            let exact = s.eigengradient(2, p);
            err = err.max((g[2 * p] - exact[0]).abs()).max((g[2 * p + 1] - exact[1]).abs());
        }
        assert!(err < 2e-2, "{err}");
    }

    #[test]
    fn icosphere_low_spectrum() {
        let s = build_from_mesh(Mesh::icosphere(3), 8).unwrap();
        for i in 1..=3 {
            assert!((s.eigenvalues()[i] / 2.0 - 1.0).abs() < 0.02);
        }
        for i in 4..=8 {
            assert!((s.eigenvalues()[i] / 6.0 - 1.0).abs() < 0.05);
        }
        assert!(s.orthonormality_residual() < 1e-8);
        assert!((s.distance(3, 40) - s.distance(40, 3)).abs() == 0.0);
    }
}
