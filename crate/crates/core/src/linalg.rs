//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Symmetric matrix stored as its packed upper triangle, so symmetry holds
/// by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    /// Reads the upper triangle of `m`; the lower triangle is ignored.
    pub fn from_upper(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut s = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                s.set(i, j, m[(i, j)]);
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // row r starts after r full rows of decreasing length
        r * self.dim - r * (r + 1) / 2 + c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.upper[s] = v;
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            upper: self.upper.iter().map(|v| v * c).collect(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }
}

/// A matrix-valued function at a point together with its first partials:
/// `partials[l] = ∂M/∂x^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJet {
    pub value: DMatrix<f64>,
    pub partials: Vec<DMatrix<f64>>,
}

impl MatrixJet {
    pub fn transpose(&self) -> MatrixJet {
        MatrixJet {
            value: self.value.transpose(),
            partials: self.partials.iter().map(|p| p.transpose()).collect(),
        }
    }

    /// Product rule.
    pub fn mul(&self, rhs: &MatrixJet) -> MatrixJet {
        MatrixJet {
            value: &self.value * &rhs.value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(a, b)| a * &rhs.value + &self.value * b)
                .collect(),
        }
    }

    /// `∂(M⁻¹) = −M⁻¹ (∂M) M⁻¹`, given the already computed inverse.
    pub fn inverse_with(&self, inv: &DMatrix<f64>) -> MatrixJet {
        MatrixJet {
            value: inv.clone(),
            partials: self.partials.iter().map(|p| -(inv * p * inv)).collect(),
        }
    }

    pub fn scale_columns(&self, weights: &[f64]) -> MatrixJet {
        let apply = |m: &DMatrix<f64>| {
            let mut out = m.clone();
            for (k, w) in weights.iter().enumerate() {
                out.column_mut(k).scale_mut(*w);
            }
            out
        };
        MatrixJet {
            value: apply(&self.value),
            partials: self.partials.iter().map(apply).collect(),
        }
    }
}

/// Largest absolute entry, used to scale matrix-identity tolerances.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Numerical rank from singular values: values at or below
/// `rel_tol · σ_max` count as zero.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}
