//! Sparse matrices and the generalized symmetric eigensolver `S v = λ M v`
//! with a positive diagonal `M`.
//!
//! Small problems are reduced to a dense symmetric eigenproblem. Larger ones
//! run shift-invert block subspace iteration on top of an envelope Cholesky
//! factorization in reverse Cuthill-McKee order, with Rayleigh-Ritz on the
//! original pencil so the reported pairs do not inherit the conditioning of
//! the shifted operator.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative backward-error tolerance on eigenpair residuals.
pub const TOL_EIG: f64 = 1e-9;

/// Problems up to this size use the dense path.
const DENSE_LIMIT: usize = 400;
const MAX_SUBSPACE_ITERATIONS: usize = 600;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square `n x n` matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "square matrix required");
        let n = a.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] += v;
            }
        }
        a
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                dev = dev.max((v - self.get(j, i)).abs());
            }
        }
        dev
    }
}

/// Reverse Cuthill-McKee ordering of the sparsity graph. `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|e| e.0).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    while order.len() < n {
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let start = pseudo_peripheral(&adj, seed);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut current = seed;
    let mut best_ecc = 0;
    for _ in 0..4 {
        let (far, ecc) = bfs_farthest(adj, current);
        if ecc <= best_ecc {
            break;
        }
        best_ecc = ecc;
        current = far;
    }
    current
}

fn bfs_farthest(adj: &[Vec<usize>], start: usize) -> (usize, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([start]);
    level[start] = 0;
    let mut far = (start, 0);
    while let Some(v) = queue.pop_front() {
        let l = level[v];
        if l > far.1 || (l == far.1 && adj[v].len() < adj[far.0].len()) {
            far = (v, l);
        }
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = l + 1;
                queue.push_back(w);
            }
        }
    }
    far
}

/// Envelope (skyline) Cholesky factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> = (0..n)
            .map(|i| {
                a.row(perm[i])
                    .map(|(j, _)| inv[j])
                    .filter(|&j| j <= i)
                    .min()
                    .unwrap_or(i)
            })
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offsets[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jj = inv[j];
                if jj <= i {
                    data[offsets[i] + jj - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[offsets[i] + j - fi];
                let ri = &data[offsets[i] + k0 - fi..offsets[i] + j - fi];
                let rj = &data[offsets[j] + k0 - fj..offsets[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    let djj = data[offsets[j + 1] - 1];
                    data[offsets[i] + j - fi] = s / djj;
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    data[offsets[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self {
            perm,
            first,
            offsets,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Lowest eigenpairs of a generalized symmetric pencil.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Columns are `M`-orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    pub iterations: usize,
    /// Largest `||S v - λ M v|| / (||S||_inf ||v||)` over returned pairs.
    pub max_residual: f64,
}

/// Lowest `k` eigenpairs of `S v = λ M v` for symmetric positive semidefinite
/// `S` and positive diagonal `M`.
pub fn solve_spectrum(stiffness: &CsrMatrix, mass: &[f64], k: usize) -> Result<Spectrum> {
    let n = stiffness.dim();
    if mass.len() != n {
        return Err(crate::error::invalid(
            "mass",
            format!("length {} does not match matrix dimension {n}", mass.len()),
        ));
    }
    if k == 0 || k > n {
        return Err(crate::error::invalid("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    if let Some(p) = mass.iter().position(|&m| !(m > 0.0)) {
        return Err(crate::error::invalid("mass", format!("entry {p} is not positive")));
    }
    let scale = stiffness.norm_inf().max(f64::MIN_POSITIVE);
    let asym = stiffness.asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::Asymmetric { deviation: asym });
    }
    let mut spectrum = if n <= DENSE_LIMIT {
        dense_pencil(stiffness, mass, k)
    } else {
        subspace_iteration(stiffness, mass, k)?
    };
    spectrum.max_residual = max_residual(stiffness, mass, &spectrum, scale);
    if spectrum.max_residual > TOL_EIG {
        return Err(Error::EigenNoConvergence {
            iterations: spectrum.iterations,
            max_residual: spectrum.max_residual,
        });
    }
    Ok(spectrum)
}

fn max_residual(s: &CsrMatrix, mass: &[f64], sp: &Spectrum, scale: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (c, &lambda) in sp.eigenvalues.iter().enumerate() {
        let v: Vec<f64> = sp.eigenvectors.column(c).iter().copied().collect();
        let sv = s.mul_vec(&v);
        let r: f64 = sv
            .iter()
            .zip(&v)
            .zip(mass)
            .map(|((a, x), m)| (a - lambda * m * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(r / (scale * vn));
    }
    worst
}

fn dense_pencil(s: &CsrMatrix, mass: &[f64], k: usize) -> Spectrum {
    let n = s.dim();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = s.to_dense();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    // exact symmetry for the dense solver
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut vectors = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[idx]);
        for i in 0..n {
            vectors[(i, c)] = eig.eigenvectors[(i, idx)] * inv_sqrt[i];
        }
    }
    let mut sp = Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
        iterations: 1,
        max_residual: 0.0,
    };
    fix_signs(&mut sp.eigenvectors);
    sp
}

fn m_dot(a: &[f64], b: &[f64], mass: &[f64]) -> f64 {
    a.iter().zip(b).zip(mass).map(|((x, y), m)| x * y * m).sum()
}

/// Twice-repeated modified Gram-Schmidt in the `M` inner product. Columns that
/// collapse are replaced by fresh random directions.
fn m_orthonormalize(cols: &mut [Vec<f64>], mass: &[f64], rng: &mut ChaCha8Rng) {
    for c in 0..cols.len() {
        for attempt in 0..3 {
            for _ in 0..2 {
                for prev in 0..c {
                    let (head, tail) = cols.split_at_mut(c);
                    let d = m_dot(&tail[0], &head[prev], mass);
                    for (x, y) in tail[0].iter_mut().zip(&head[prev]) {
                        *x -= d * y;
                    }
                }
            }
            let nrm = m_dot(&cols[c], &cols[c], mass).sqrt();
            if nrm > 1e-300 && nrm.is_finite() {
                cols[c].iter_mut().for_each(|x| *x /= nrm);
                break;
            }
            if attempt < 2 {
                cols[c].iter_mut().for_each(|x| *x = rng.random::<f64>() - 0.5);
            }
        }
    }
}

fn subspace_iteration(s: &CsrMatrix, mass: &[f64], k: usize) -> Result<Spectrum> {
    let n = s.dim();
    let block = (2 * k).max(k + 8).min(n);
    let ratio_max = (0..n)
        .map(|i| s.get(i, i) / mass[i])
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let sigma = 1e-6 * ratio_max;
    let mut shifted = Vec::with_capacity(s.nnz() + n);
    for i in 0..n {
        for (j, v) in s.row(i) {
            shifted.push((i, j, v));
        }
        shifted.push((i, i, sigma * mass[i]));
    }
    let chol = EnvelopeCholesky::factor(&CsrMatrix::from_triplets(n, &shifted))?;
    let scale = s.norm_inf().max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    m_orthonormalize(&mut basis, mass, &mut rng);

    let mut last = None;
    for iter in 1..=MAX_SUBSPACE_ITERATIONS {
        let mut next: Vec<Vec<f64>> = basis
            .iter()
            .map(|x| {
                let mx: Vec<f64> = x.iter().zip(mass).map(|(a, m)| a * m).collect();
                chol.solve(&mx)
            })
            .collect();
        m_orthonormalize(&mut next, mass, &mut rng);

        // Rayleigh-Ritz on the original pencil
        let sq: Vec<Vec<f64>> = next.iter().map(|q| s.mul_vec(q)).collect();
        let mut proj = DMatrix::zeros(block, block);
        for a in 0..block {
            for b in a..block {
                let v: f64 = next[a].iter().zip(&sq[b]).map(|(x, y)| x * y).sum();
                proj[(a, b)] = v;
                proj[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let mut ritz = Vec::with_capacity(block);
        let mut ritz_s = Vec::with_capacity(block);
        for &idx in &order {
            let w = eig.eigenvectors.column(idx);
            let mut v = vec![0.0; n];
            let mut sv = vec![0.0; n];
            for a in 0..block {
                let c = w[a];
                for i in 0..n {
                    v[i] += c * next[a][i];
                    sv[i] += c * sq[a][i];
                }
            }
            ritz.push(v);
            ritz_s.push(sv);
        }
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

        let mut worst: f64 = 0.0;
        for c in 0..k {
            let r: f64 = ritz_s[c]
                .iter()
                .zip(&ritz[c])
                .zip(mass)
                .map(|((a, x), m)| (a - values[c] * m * x).powi(2))
                .sum::<f64>()
                .sqrt();
            let vn = ritz[c].iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(r / (scale * vn));
        }
        basis = ritz;
        last = Some((values, worst));
        // stop a little below the acceptance threshold
        if worst < 0.1 * TOL_EIG {
            let (values, worst) = last.unwrap();
            let mut vectors = DMatrix::zeros(n, k);
            for c in 0..k {
                for i in 0..n {
                    vectors[(i, c)] = basis[c][i];
                }
            }
            fix_signs(&mut vectors);
            return Ok(Spectrum {
                eigenvalues: values[..k].to_vec(),
                eigenvectors: vectors,
                iterations: iter,
                max_residual: worst,
            });
        }
    }
    Err(Error::EigenNoConvergence {
        iterations: MAX_SUBSPACE_ITERATIONS,
        max_residual: last.map_or(f64::INFINITY, |l| l.1),
    })
}

/// Deterministic sign: the largest-magnitude entry of each column is positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for c in 0..v.ncols() {
        let mut best = 0;
        for i in 0..v.nrows() {
            if v[(i, c)].abs() > v[(best, c)].abs() + 1e-12 {
                best = i;
            }
        }
        if v[(best, c)] < 0.0 {
            v.column_mut(c).iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// `x^T M y` for a diagonal `M`.
pub fn weighted_dot(x: &[f64], y: &[f64], mass: &[f64]) -> f64 {
    m_dot(x, y, mass)
}
