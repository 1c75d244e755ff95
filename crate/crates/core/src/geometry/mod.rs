//! Local geometry of a frame-described sub-Riemannian chart.
//!
//! A [`ManifoldSpec`] declares a full frame `X_1..X_d` of vector fields whose
//! first `m` members span the horizontal distribution and are orthonormal;
//! the rest span the chosen vertical complement. Everything else (cometric,
//! extension metric, `g^V`, projections, operator coefficients) is derived
//! pointwise from frame components and their exact partials.

mod brackets;
mod operators;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

pub use brackets::{bracket, bracket_word, hormander_rank, HormanderRank, Word};
pub use operators::{
    beta_matrix, christoffel_raised, div_grad_h, div_grad_h_density, div_grad_riemannian,
    equality_residual, extension_metric, g_vertical, hamiltonian, horizontal_projection,
    lv_coefficients, sum_of_squares, x_delta, Christoffel, DensityJet, DriftField,
    EqualityReport,
};

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2, Scalar};
use crate::linalg::{MatrixJet, SymMatrix};

/// Tolerances shared by the geometry checks.
pub mod tol {
    /// Matrix identities, scaled by the largest absolute entry.
    pub const MATRIX: f64 = 1e-10;
    /// Relative singular-value / eigenvalue cutoff for rank decisions.
    pub const RANK: f64 = 1e-10;
    /// Principal-symbol match required of a sub-Laplacian.
    pub const PRINCIPAL: f64 = 1e-9;
}

/// Symbolic description of a chart with its frame, densities and sample
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    pub coordinates: Vec<String>,
    pub horizontal_rank: usize,
    /// `frame[k][i]` is component `i` of the vector field `X_k`.
    pub frame: Vec<Vec<Expr>>,
    /// Squared length given to the vertical frame fields by the extension
    /// metric.
    pub vertical_scaling: f64,
    pub volume_densities: BTreeMap<String, Expr>,
    pub modular_inverse: Option<Expr>,
    pub identity_point: Option<Vec<f64>>,
    pub sample_points: Vec<Vec<f64>>,
    pub domain_notes: String,
}

impl ManifoldSpec {
    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    /// Checks shapes and the per-sample-point invariants: invertible frame
    /// and positive densities.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension();
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if d == 0 {
            return invalid("dimension must be positive".into());
        }
        if self.horizontal_rank == 0 || self.horizontal_rank > d {
            return invalid(format!(
                "horizontal_rank {} must lie in 1..={d}",
                self.horizontal_rank
            ));
        }
        if self.frame.len() != d || self.frame.iter().any(|c| c.len() != d) {
            return invalid(format!("full_frame must be {d} columns of {d} components"));
        }
        if !(self.vertical_scaling > 0.0 && self.vertical_scaling.is_finite()) {
            return invalid("vertical_scaling must be a positive number".into());
        }
        if let Some(id) = &self.identity_point {
            if id.len() != d {
                return invalid(format!("identity_point must have {d} entries"));
            }
        }
        for (n, p) in self.sample_points.iter().enumerate() {
            if p.len() != d {
                return invalid(format!("sample_points[{n}] must have {d} entries"));
            }
        }
        for p in &self.sample_points {
            PointFrame::at(self, p)?;
            for (name, tau) in &self.volume_densities {
                DensityJet::from_expr(name, tau, p)?;
            }
        }
        Ok(())
    }

    /// Same chart with a different vertical scaling λ.
    pub fn with_vertical_scaling(&self, lambda: f64) -> ManifoldSpec {
        ManifoldSpec {
            vertical_scaling: lambda,
            ..self.clone()
        }
    }

    /// Replaces the horizontal fields by `X'_i = Σ_j rotation[i][j] X_j`.
    pub fn rotate_horizontal(&self, rotation: &DMatrix<f64>) -> ManifoldSpec {
        use crate::expr::BinOp;
        let m = self.horizontal_rank;
        let d = self.dimension();
        let mut out = self.clone();
        for i in 0..m {
            out.frame[i] = (0..d)
                .map(|comp| {
                    (0..m)
                        .map(|j| {
                            Expr::binary(
                                BinOp::Mul,
                                Expr::Const(rotation[(i, j)]),
                                self.frame[j][comp].clone(),
                            )
                        })
                        .reduce(|a, b| Expr::binary(BinOp::Add, a, b))
                        .expect("m >= 1")
                })
                .collect();
        }
        out
    }

    /// Components of field `k` evaluated over any scalar type.
    pub fn column_at<S: Scalar>(&self, k: usize, x: &[S]) -> Result<Vec<S>> {
        self.frame[k]
            .iter()
            .map(|e| e.eval(x).map_err(Error::from))
            .collect()
    }

    /// Frame matrix columns `cols` with first partials.
    pub fn frame_jet(&self, x: &[f64], cols: std::ops::Range<usize>) -> Result<MatrixJet> {
        let d = self.dimension();
        let w = cols.len();
        let mut value = DMatrix::zeros(d, w);
        let mut partials = vec![DMatrix::zeros(d, w); d];
        for (c, k) in cols.enumerate() {
            for i in 0..d {
                let j = self.frame[k][i].eval_jet1(x)?;
                value[(i, c)] = j.value;
                for (l, p) in partials.iter_mut().enumerate() {
                    p[(i, c)] = j.grad[l];
                }
            }
        }
        Ok(MatrixJet { value, partials })
    }

    /// The reference point for Lie-algebra data: the identity if declared,
    /// else the first sample point.
    pub fn reference_point(&self) -> Option<&[f64]> {
        self.identity_point
            .as_deref()
            .or(self.sample_points.first().map(|v| v.as_slice()))
    }
}

/// The frame and its dual at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    pub point: Vec<f64>,
    /// `F[i][k]` = component `i` of `X_k`, with first partials.
    pub frame: MatrixJet,
    /// Rows are the dual coframe `χ^i`.
    pub inverse: DMatrix<f64>,
    pub det: f64,
}

impl PointFrame {
    pub fn at(spec: &ManifoldSpec, x: &[f64]) -> Result<PointFrame> {
        let d = spec.dimension();
        let frame = spec.frame_jet(x, 0..d)?;
        let det = frame.value.determinant();
        let singular = || Error::SingularFrame { point: x.to_vec() };
        let scale = crate::linalg::max_abs(&frame.value);
        if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(d as i32) {
            return Err(singular());
        }
        let inverse = frame.value.clone().try_inverse().ok_or_else(singular)?;
        Ok(PointFrame {
            point: x.to_vec(),
            frame,
            inverse,
            det,
        })
    }

    /// Coordinates of a tangent vector in the frame basis: `χ^i(v)`.
    pub fn frame_components(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.inverse * v
    }

    pub fn column(&self, k: usize) -> DVector<f64> {
        self.frame.value.column(k).into_owned()
    }
}

/// Local coefficients of a second-order operator
/// `Σ second_ij ∂_i∂_j + Σ first_k ∂_k + zeroth`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefField {
    pub second: SymMatrix,
    pub first: DVector<f64>,
    pub zeroth: f64,
}

impl CoefField {
    pub fn scaled(&self, c: f64) -> CoefField {
        CoefField {
            second: self.second.scaled(c),
            first: &self.first * c,
            zeroth: self.zeroth * c,
        }
    }

    /// Applies the operator to a function given its 2-jet at the point.
    pub fn apply(&self, f: &Jet2) -> f64 {
        let d = self.first.len();
        let mut acc = self.zeroth * f.value;
        for i in 0..d {
            acc += self.first[i] * f.grad[i];
            for j in 0..d {
                acc += self.second.get(i, j) * f.hess(i, j);
            }
        }
        acc
    }

    /// Largest absolute coefficient difference.
    pub fn max_diff(&self, other: &CoefField) -> f64 {
        let s = (&self.second.to_matrix() - &other.second.to_matrix()).amax();
        let f = (&self.first - &other.first).amax();
        s.max(f).max((self.zeroth - other.zeroth).abs())
    }

    pub fn second_matrix(&self) -> DMatrix<f64> {
        self.second.to_matrix()
    }
}

/// Everything the operators need at one point, computed once.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub frame: PointFrame,
    /// Cometric `B = F_H F_Hᵀ`.
    pub beta: MatrixJet,
    /// Extension metric `G = F⁻ᵀ D F⁻¹`.
    pub metric: MatrixJet,
    /// `G⁻¹ = F D⁻¹ Fᵀ`.
    pub metric_inverse: MatrixJet,
    pub horizontal_rank: usize,
}

impl LocalGeometry {
    pub fn at(spec: &ManifoldSpec, x: &[f64]) -> Result<LocalGeometry> {
        let frame = PointFrame::at(spec, x)?;
        let d = spec.dimension();
        let m = spec.horizontal_rank;
        let lambda = spec.vertical_scaling;
        let weights: Vec<f64> = (0..d).map(|k| if k < m { 1.0 } else { lambda }).collect();
        let inv_weights: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
        let mut mask = vec![0.0; d];
        mask[..m].fill(1.0);

        let f = &frame.frame;
        let ft = f.transpose();
        let beta = f.scale_columns(&mask).mul(&ft);
        let finv = f.inverse_with(&frame.inverse);
        let metric = finv.transpose().scale_columns(&weights).mul(&finv);
        let metric_inverse = f.scale_columns(&inv_weights).mul(&ft);
        Ok(LocalGeometry {
            frame,
            beta,
            metric,
            metric_inverse,
            horizontal_rank: m,
        })
    }

    pub fn dim(&self) -> usize {
        self.beta.value.nrows()
    }

    pub fn g_vertical(&self) -> DMatrix<f64> {
        let g = &self.metric.value;
        g * &self.beta.value * g
    }

    /// `P = B·G`, projection onto the horizontal space along the vertical.
    pub fn projection(&self) -> DMatrix<f64> {
        &self.beta.value * &self.metric.value
    }

    /// `Q = G·B`.
    pub fn coprojection(&self) -> DMatrix<f64> {
        &self.metric.value * &self.beta.value
    }
}
