//! Symmetric 2-tensor fields in per-sample orthonormal frames.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

/// One symmetric `m x m` matrix per sample, stored as the packed upper
/// triangle (row by row), so symmetry is exact by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField {
    pub space_id: String,
    dim: usize,
    data: Vec<f64>,
}

pub(crate) fn packed_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn packed_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // rows before i hold m, m-1, ..., m-i+1 entries
    i * m - i * i.saturating_sub(1) / 2 + (j - i)
}

impl SymTensorField {
    pub fn zeros(space_id: impl Into<String>, dim: usize, samples: usize) -> Self {
        Self {
            space_id: space_id.into(),
            dim,
            data: vec![0.0; samples * packed_len(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / packed_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn packed(&self, p: usize) -> &[f64] {
        let k = packed_len(self.dim);
        &self.data[p * k..(p + 1) * k]
    }

    pub(crate) fn packed_mut(&mut self, p: usize) -> &mut [f64] {
        let k = packed_len(self.dim);
        &mut self.data[p * k..(p + 1) * k]
    }

    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        self.packed(p)[packed_index(self.dim, i, j)]
    }

    /// Full row-major matrix at sample `p`.
    pub fn matrix(&self, p: usize) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.get(p, i, j);
            }
        }
        out
    }

    /// `T_p += w · v vᵀ`
    pub fn add_outer(&mut self, p: usize, w: f64, v: &[f64]) {
        let m = self.dim;
        let slot = self.packed_mut(p);
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                slot[k] += w * v[i] * v[j];
                k += 1;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `⟨T, g_X⟩ = tr T` in an orthonormal frame.
    pub fn trace(&self, p: usize) -> f64 {
        (0..self.dim).map(|i| self.get(p, i, i)).sum()
    }

    /// Per-sample `|I − s·T|_HS`.
    pub fn identity_distance(&self, p: usize, s: f64) -> f64 {
        let m = self.dim;
        let mut acc = 0.0;
        for i in 0..m {
            for j in i..m {
                let d = if i == j { 1.0 } else { 0.0 } - s * self.get(p, i, j);
                acc += if i == j { d * d } else { 2.0 * d * d };
            }
        }
        acc.sqrt()
    }
}

/// Frobenius norm of a packed symmetric matrix.
pub fn hs_norm(m: usize, packed: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            let v = packed[k];
            acc += if i == j { v * v } else { 2.0 * v * v };
            k += 1;
        }
    }
    acc.sqrt()
}

/// Largest absolute eigenvalue of a packed symmetric matrix.
pub fn bound_norm(m: usize, packed: &[f64]) -> f64 {
    match m {
        0 => 0.0,
        1 => packed[0].abs(),
        2 => {
            let (a, b, c) = (packed[0], packed[1], packed[2]);
            let mean = 0.5 * (a + c);
            let half = 0.5 * (a - c);
            mean.abs() + half.hypot(b)
        }
        3 => {
            let t = Matrix3::new(
                packed[0], packed[1], packed[2], packed[1], packed[3], packed[4], packed[2], packed[4], packed[5],
            );
            t.symmetric_eigenvalues().iter().fold(0.0, |acc: f64, e| acc.max(e.abs()))
        }
        _ => {
            let mut t = DMatrix::zeros(m, m);
            let mut k = 0;
            for i in 0..m {
                for j in i..m {
                    t[(i, j)] = packed[k];
                    t[(j, i)] = packed[k];
                    k += 1;
                }
            }
            t.symmetric_eigenvalues().iter().fold(0.0, |acc: f64, e| acc.max(e.abs()))
        }
    }
}

/// Per-sample Hilbert-Schmidt and bound norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorNorms {
    pub hs: Vec<f64>,
    pub bound: Vec<f64>,
}

/// Both norms of every sample of `t`. The bound norm is clamped into
/// `[|T|_HS/√m, |T|_HS]`, which only absorbs last-bit rounding of the
/// closed-form eigenvalues.
pub fn tensor_norms(t: &SymTensorField) -> TensorNorms {
    let m = t.dim();
    let sqrt_m = (m as f64).sqrt();
    let (hs, bound) = (0..t.len())
        .map(|p| {
            let hs = hs_norm(m, t.packed(p));
            let b = bound_norm(m, t.packed(p));
            debug_assert!(b <= hs * (1.0 + 1e-12) && hs <= sqrt_m * b * (1.0 + 1e-12) + 1e-300);
            (hs, b.min(hs).max(hs / sqrt_m))
        })
        .unzip();
    TensorNorms { hs, bound }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(m: usize, packed: &[f64]) -> SymTensorField {
        let mut f = SymTensorField::zeros("t", m, 1);
        f.packed_mut(0).copy_from_slice(packed);
        f
    }

    #[test]
    fn examples() {
        let n = tensor_norms(&field(2, &[3.0, 0.0, 0.0]));
        assert_eq!((n.hs[0], n.bound[0]), (3.0, 3.0));
        let n = tensor_norms(&field(2, &[1.0, 0.0, 1.0]));
        assert_eq!((n.hs[0], n.bound[0]), (2f64.sqrt(), 1.0));
    }

    #[test]
    fn packed_layout() {
        let f = field(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(f.matrix(0), vec![1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        assert_eq!(f.trace(0), 11.0);
    }

    #[test]
    fn outer_products_accumulate() {
        let mut f = SymTensorField::zeros("t", 2, 2);
        f.add_outer(1, 2.0, &[1.0, 3.0]);
        assert_eq!(f.matrix(1), vec![2.0, 6.0, 6.0, 18.0]);
        assert_eq!(f.matrix(0), vec![0.0; 4]);
        assert!((f.identity_distance(0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }
}
