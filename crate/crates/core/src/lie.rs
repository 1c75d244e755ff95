//! Lie-group data for a left-invariant frame: structure constants,
//! `Tr(ad X_k)`, and the sub-Laplacians of the left and right Haar measures.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{
    self, bracket, div_grad_h_density, sum_of_squares, CoefField, DensityJet, ManifoldSpec,
    PointFrame,
};

/// Vanishing threshold for traces and frame components.
pub const ZERO_TOL: f64 = 1e-10;

/// `c^k_{ij}` with `[X_i, X_j] = Σ_k c^k_{ij} X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    values: Vec<f64>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[(k * self.dim + i) * self.dim + j]
    }

    /// `Tr(ad X_i) = Σ_k c^k_{ik}`.
    pub fn trace_ad(&self) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| (0..self.dim).map(|k| self.get(k, i, k)).sum())
    }

    /// Largest entry of `Σ_cyc Σ_l c^m_{il} c^l_{jk}` over all `i, j, k, m`.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let term = |a: usize, b: usize, c: usize| -> f64 {
                            (0..d).map(|l| self.get(m, a, l) * self.get(l, b, c)).sum()
                        };
                        worst = worst.max((term(i, j, k) + term(j, k, i) + term(k, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_diff(&self, other: &StructureConstants) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Nested as `[k][i][j]`.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        (0..d)
            .map(|k| (0..d).map(|i| (0..d).map(|j| self.get(k, i, j)).collect()).collect())
            .collect()
    }
}

/// `c^k_{ij} = χ^k([X_i, X_j])` at `x`.
pub fn structure_constants(spec: &ManifoldSpec, x: &[f64]) -> Result<StructureConstants> {
    let d = spec.dimension();
    let frame = PointFrame::at(spec, x)?;
    let mut values = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let c = frame.frame_components(&bracket(spec, i, j, x)?);
            for k in 0..d {
                values[(k * d + i) * d + j] = c[k];
            }
        }
    }
    Ok(StructureConstants { dim: d, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieData {
    pub identity_point: Vec<f64>,
    pub structure_constants: StructureConstants,
    pub trace_ad: DVector<f64>,
    pub modular_inverse: Option<Expr>,
}

impl LieData {
    /// Computes the data at the reference point.
    pub fn compute(spec: &ManifoldSpec) -> Result<LieData> {
        let reference = spec
            .reference_point()
            .ok_or_else(|| Error::MissingInput("an identity_point or a sample point".into()))?
            .to_vec();
        let sc = structure_constants(spec, &reference)?;
        Ok(LieData {
            trace_ad: sc.trace_ad(),
            structure_constants: sc,
            identity_point: reference,
            modular_inverse: spec.modular_inverse.clone(),
        })
    }

    pub fn modular_inverse(&self) -> Result<&Expr> {
        self.modular_inverse
            .as_ref()
            .ok_or_else(|| Error::MissingInput("modular_inverse".into()))
    }
}

/// The left Haar density `1 / |det F|`.
pub fn haar_density_left(spec: &ManifoldSpec, x: &[f64]) -> Result<f64> {
    Ok(1.0 / PointFrame::at(spec, x)?.det.abs())
}

/// The right Haar density `𝔪_i / |det F|`.
pub fn haar_density_right(spec: &ManifoldSpec, lie: &LieData, x: &[f64]) -> Result<f64> {
    let mi = DensityJet::from_expr("modular_inverse", lie.modular_inverse()?, x)?;
    Ok(mi.value * haar_density_left(spec, x)?)
}

/// Result of the left-invariance spot check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceCheck {
    pub points: Vec<Vec<f64>>,
    /// Largest deviation of the structure constants from the reference.
    pub max_deviation: f64,
}

impl InvarianceCheck {
    pub fn passed(&self, tol: f64) -> bool {
        !self.points.is_empty() && self.max_deviation <= tol
    }
}

/// Recomputes the structure constants at `count` seeded points near the
/// reference; constancy is what left-invariance of the frame implies.
/// Points where the chart breaks down are skipped.
pub fn left_invariance_check(
    spec: &ManifoldSpec,
    lie: &LieData,
    count: usize,
    seed: u64,
) -> InvarianceCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut max_deviation: f64 = 0.0;
    let mut attempts = 0;
    while points.len() < count && attempts < 50 * count.max(1) {
        attempts += 1;
        let p: Vec<f64> = lie
            .identity_point
            .iter()
            .map(|v| v + rng.random_range(-0.5..0.5))
            .collect();
        if let Ok(sc) = structure_constants(spec, &p) {
            max_deviation = max_deviation.max(sc.max_diff(&lie.structure_constants));
            points.push(p);
        }
    }
    InvarianceCheck {
        points,
        max_deviation,
    }
}

/// A Haar sub-Laplacian at a point, computed along two independent paths.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarOperator {
    /// Via traces of the adjoint representation.
    pub coef: CoefField,
    /// Via `div_grad_h` with the Haar density.
    pub density_path: CoefField,
    /// `χ^k(X_Δ)` for `k ≤ m`; `None` if `X_Δ` is not horizontal.
    pub frame_first: Option<Vec<f64>>,
}

impl HaarOperator {
    pub fn discrepancy(&self) -> f64 {
        self.coef.max_diff(&self.density_path)
    }
}

fn with_drift(spec: &ManifoldSpec, x: &[f64], weights: &[f64]) -> Result<(CoefField, PointFrame)> {
    let frame = PointFrame::at(spec, x)?;
    let mut coef = sum_of_squares(spec, x)?;
    for (k, w) in weights.iter().enumerate() {
        coef.first += frame.column(k) * *w;
    }
    Ok((coef, frame))
}

fn finish(spec: &ManifoldSpec, x: &[f64], coef: CoefField, density: &DensityJet) -> Result<HaarOperator> {
    let beta = geometry::beta_matrix(spec, x)?;
    let density_path = div_grad_h_density(&beta, density);
    let frame_first = geometry::x_delta(&coef, spec, x)?.horizontal_frame(spec.horizontal_rank);
    Ok(HaarOperator {
        coef,
        density_path,
        frame_first,
    })
}

/// `div^{μ_L} grad_H = Σ X_k² − Σ_{k≤m} Tr(ad X_k) X_k`.
pub fn haar_left_operator(spec: &ManifoldSpec, lie: &LieData, x: &[f64]) -> Result<HaarOperator> {
    let m = spec.horizontal_rank;
    let weights: Vec<f64> = (0..m).map(|k| -lie.trace_ad[k]).collect();
    let (coef, frame) = with_drift(spec, x, &weights)?;
    finish(spec, x, coef, &DensityJet::inverse_frame_volume(&frame))
}

/// The coefficients `𝔪 X_k(𝔪_i) − Tr(ad X_k)` of `X_{Δ^R}` at `x`.
pub fn right_drift_weights(spec: &ManifoldSpec, lie: &LieData, x: &[f64]) -> Result<Vec<f64>> {
    let mi = DensityJet::from_expr("modular_inverse", lie.modular_inverse()?, x)?;
    let frame = PointFrame::at(spec, x)?;
    // 𝔪 X_k(𝔪_i) = X_k(log 𝔪_i)
    let grad = DVector::from_column_slice(&mi.log_grad);
    Ok((0..spec.horizontal_rank)
        .map(|k| frame.column(k).dot(&grad) - lie.trace_ad[k])
        .collect())
}

/// `div^{μ_R} grad_H = Σ X_k² + Σ_{k≤m} [𝔪 X_k(𝔪_i) − Tr(ad X_k)] X_k`.
pub fn haar_right_operator(spec: &ManifoldSpec, lie: &LieData, x: &[f64]) -> Result<HaarOperator> {
    let weights = right_drift_weights(spec, lie, x)?;
    let (coef, frame) = with_drift(spec, x, &weights)?;
    let mi = DensityJet::from_expr("modular_inverse", lie.modular_inverse()?, x)?;
    finish(spec, x, coef, &DensityJet::inverse_frame_volume(&frame).times(&mi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularityReport {
    /// Frame components of `X_{Δ^L}`: `−Tr(ad X_k)` for `k ≤ m`.
    pub x_delta_left: Vec<f64>,
    /// Frame components of `X_{Δ^R}` at the reference point, when `𝔪_i` is known.
    pub x_delta_right: Option<Vec<f64>>,
    pub trace_ad: Vec<f64>,
    /// Every `Tr(ad X_i)` vanishes, `i ≤ d`.
    pub unimodular: bool,
    /// Only the horizontal traces vanish, i.e. `X_{Δ^L} = 0`.
    pub horizontal_traces_vanish: bool,
    /// `X_{Δ^R} = 0` at every sample point while `X_{Δ^L} ≠ 0`.
    pub right_vanishes_left_does_not: bool,
}

pub fn unimodularity_report(spec: &ManifoldSpec, lie: &LieData) -> Result<UnimodularityReport> {
    let m = spec.horizontal_rank;
    let vanishes = |v: &[f64]| v.iter().all(|c| c.abs() <= ZERO_TOL);
    let trace_ad: Vec<f64> = lie.trace_ad.iter().cloned().collect();
    let x_delta_left: Vec<f64> = trace_ad[..m].iter().map(|t| -t).collect();
    let (x_delta_right, right_everywhere_zero) = match &lie.modular_inverse {
        None => (None, false),
        Some(_) => {
            let at_ref = right_drift_weights(spec, lie, &lie.identity_point)?;
            let mut zero = vanishes(&at_ref);
            for p in &spec.sample_points {
                zero &= vanishes(&right_drift_weights(spec, lie, p)?);
            }
            (Some(at_ref), zero)
        }
    };
    Ok(UnimodularityReport {
        unimodular: vanishes(&trace_ad),
        horizontal_traces_vanish: vanishes(&x_delta_left),
        right_vanishes_left_does_not: right_everywhere_zero && !vanishes(&x_delta_left),
        x_delta_left,
        x_delta_right,
        trace_ad,
    })
}

/// Largest disagreement between the trace path and the density path for
/// the left Haar operator over the sample points.
pub fn haar_path_discrepancy(spec: &ManifoldSpec, lie: &LieData) -> Result<f64> {
    spec.sample_points.iter().try_fold(0.0f64, |acc, p| {
        Ok(acc.max(haar_left_operator(spec, lie, p)?.discrepancy()))
    })
}
