use nalgebra::{DMatrix, DVector};

use super::{tol, CoefField, LocalGeometry, ManifoldSpec, PointFrame};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{MatrixJet, SymMatrix};

/// The cometric with first partials. Needs only the horizontal columns, so
/// it is defined even where the full frame degenerates.
pub fn beta_matrix(spec: &ManifoldSpec, x: &[f64]) -> Result<MatrixJet> {
    let fh = spec.frame_jet(x, 0..spec.horizontal_rank)?;
    Ok(fh.mul(&fh.transpose()))
}

pub fn extension_metric(spec: &ManifoldSpec, x: &[f64]) -> Result<MatrixJet> {
    Ok(LocalGeometry::at(spec, x)?.metric)
}

pub fn g_vertical(spec: &ManifoldSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(LocalGeometry::at(spec, x)?.g_vertical())
}

/// `(P, Q) = (B·G, G·B)`.
pub fn horizontal_projection(
    spec: &ManifoldSpec,
    x: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let geo = LocalGeometry::at(spec, x)?;
    Ok((geo.projection(), geo.coprojection()))
}

/// Raised Christoffel symbols `Γ^{ijk}` built from a symmetric matrix
/// field and its partials.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    values: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dim + j) * self.dim + k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_ij Γ^{ijk} w_ij` for each `k`.
    pub fn contract(&self, w: &DMatrix<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc += self.get(i, j, k) * w[(i, j)];
                }
            }
            acc
        })
    }
}

/// `Γ^{ijk} = −½ Σ_l [B^{il} ∂_l B^{jk} + B^{jl} ∂_l B^{ik} − B^{kl} ∂_l B^{ij}]`.
pub fn christoffel_raised(b: &MatrixJet) -> Christoffel {
    let d = b.value.nrows();
    let bv = &b.value;
    let mut values = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    let dl = &b.partials[l];
                    acc += bv[(i, l)] * dl[(j, k)] + bv[(j, l)] * dl[(i, k)]
                        - bv[(k, l)] * dl[(i, j)];
                }
                values[(i * d + j) * d + k] = -0.5 * acc;
            }
        }
    }
    Christoffel { dim: d, values }
}

fn from_beta(b: &DMatrix<f64>, first: DVector<f64>) -> CoefField {
    CoefField {
        second: SymMatrix::from_upper(b),
        first,
        zeroth: 0.0,
    }
}

fn sos_first(frame: &PointFrame, m: usize) -> DVector<f64> {
    let f = &frame.frame;
    let d = f.value.nrows();
    DVector::from_fn(d, |i, _| {
        let mut acc = 0.0;
        for k in 0..m {
            for j in 0..d {
                acc += f.value[(j, k)] * f.partials[j][(i, k)];
            }
        }
        acc
    })
}

/// `Σ_{k≤m} X_k²` in coordinates.
pub fn sum_of_squares(spec: &ManifoldSpec, x: &[f64]) -> Result<CoefField> {
    let geo = LocalGeometry::at(spec, x)?;
    Ok(sum_of_squares_at(&geo))
}

pub(crate) fn sum_of_squares_at(geo: &LocalGeometry) -> CoefField {
    from_beta(&geo.beta.value, sos_first(&geo.frame, geo.horizontal_rank))
}

/// The canonical operator `L^V` from its local Christoffel formula.
pub fn lv_coefficients(spec: &ManifoldSpec, x: &[f64]) -> Result<CoefField> {
    Ok(lv_at(&LocalGeometry::at(spec, x)?))
}

pub(crate) fn lv_at(geo: &LocalGeometry) -> CoefField {
    let m = geo.horizontal_rank as f64;
    let gamma = christoffel_raised(&geo.beta);
    let first = -gamma.contract(&geo.g_vertical()) / m;
    from_beta(&(&geo.beta.value / m), first)
}

/// A volume density `τ` at a point: its value and `∂ log τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityJet {
    pub value: f64,
    pub log_grad: Vec<f64>,
}

impl DensityJet {
    pub fn from_expr(name: &str, tau: &Expr, x: &[f64]) -> Result<DensityJet> {
        let j = tau.eval_jet1(x)?;
        if j.value <= 0.0 || j.value.is_nan() {
            return Err(Error::NonPositiveDensity {
                name: name.to_string(),
                point: x.to_vec(),
                value: j.value,
            });
        }
        Ok(DensityJet {
            value: j.value,
            log_grad: j.grad.iter().map(|g| g / j.value).collect(),
        })
    }

    /// `τ = 1 / |det F|`, the density that makes the frame volume-preserving.
    pub fn inverse_frame_volume(frame: &PointFrame) -> DensityJet {
        let d = frame.inverse.nrows();
        // ∂ log|det F| = tr(F⁻¹ ∂F)
        let log_grad = (0..d)
            .map(|l| -(&frame.inverse * &frame.frame.partials[l]).trace())
            .collect();
        DensityJet {
            value: 1.0 / frame.det.abs(),
            log_grad,
        }
    }

    pub fn times(&self, other: &DensityJet) -> DensityJet {
        DensityJet {
            value: self.value * other.value,
            log_grad: self
                .log_grad
                .iter()
                .zip(&other.log_grad)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// `div^ω grad_H` for `ω = τ dx¹∧…∧dx^d`.
pub fn div_grad_h(spec: &ManifoldSpec, tau: &Expr, x: &[f64]) -> Result<CoefField> {
    let density = DensityJet::from_expr("tau", tau, x)?;
    let b = beta_matrix(spec, x)?;
    Ok(div_grad_h_density(&b, &density))
}

/// `first_j = Σ_i [B^{ij} ∂_i log τ + ∂_i B^{ij}]`.
pub fn div_grad_h_density(b: &MatrixJet, density: &DensityJet) -> CoefField {
    let d = b.value.nrows();
    let first = DVector::from_fn(d, |j, _| {
        (0..d)
            .map(|i| b.value[(i, j)] * density.log_grad[i] + b.partials[i][(i, j)])
            .sum()
    });
    from_beta(&b.value, first)
}

/// `div^g grad_H` for the Riemannian volume of the extension metric, via the
/// contraction `Σ_ij g_ij ∂_l g^{ij}`.
pub fn div_grad_riemannian(spec: &ManifoldSpec, x: &[f64]) -> Result<CoefField> {
    let geo = LocalGeometry::at(spec, x)?;
    let d = geo.dim();
    let b = &geo.beta;
    let g = &geo.metric.value;
    let half_log_det: Vec<f64> = (0..d)
        .map(|l| {
            let dginv = &geo.metric_inverse.partials[l];
            -0.5 * g.component_mul(dginv).sum()
        })
        .collect();
    let first = DVector::from_fn(d, |k, _| {
        (0..d)
            .map(|l| b.partials[l][(l, k)] + b.value[(l, k)] * half_log_det[l])
            .sum()
    });
    Ok(from_beta(&b.value, first))
}

/// Comparison of `m·L^V` with `div^ω grad_H` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport {
    /// First-order coefficients of `m·L^V`, in projection form.
    pub lhs: DVector<f64>,
    /// First-order coefficients of `div^ω grad_H`.
    pub rhs: DVector<f64>,
    /// `rhs − lhs`; zero exactly when the two operators coincide.
    pub residual: DVector<f64>,
    /// `−½ Σ_{ijl} g^V_ij ∂_l B^{ij} − Σ_l ∂_l log τ` (summed over `l`).
    pub volume_clause_summed: f64,
    /// The same clause per coordinate `l`.
    pub volume_clause: DVector<f64>,
    /// `Σ_{jl} P_{lj} ∂_l B^{jk} − Σ_l ∂_l B^{lk}` per `k`.
    pub projection_clause: DVector<f64>,
}

impl EqualityReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.amax()
    }

    pub fn volume_clause_holds(&self, tol: f64) -> bool {
        self.volume_clause.amax() <= tol
    }

    pub fn projection_clause_holds(&self, tol: f64) -> bool {
        self.projection_clause.amax() <= tol
    }
}

pub fn equality_residual(spec: &ManifoldSpec, tau: &Expr, x: &[f64]) -> Result<EqualityReport> {
    let density = DensityJet::from_expr("tau", tau, x)?;
    let geo = LocalGeometry::at(spec, x)?;
    Ok(equality_at(&geo, &density))
}

pub(crate) fn equality_at(geo: &LocalGeometry, density: &DensityJet) -> EqualityReport {
    let d = geo.dim();
    let b = &geo.beta;
    let gv = geo.g_vertical();
    let p = geo.projection();
    // −½ Σ_ij g^V_ij ∂_l B^{ij}, per l
    let trace_term: Vec<f64> = (0..d)
        .map(|l| -0.5 * gv.component_mul(&b.partials[l]).sum())
        .collect();
    let proj_term = DVector::from_fn(d, |k, _| {
        let mut acc = 0.0;
        for l in 0..d {
            for j in 0..d {
                acc += p[(l, j)] * b.partials[l][(j, k)];
            }
        }
        acc
    });
    let div_term = DVector::from_fn(d, |k, _| (0..d).map(|l| b.partials[l][(l, k)]).sum());
    let lhs = DVector::from_fn(d, |k, _| {
        (0..d).map(|l| b.value[(l, k)] * trace_term[l]).sum::<f64>() + proj_term[k]
    });
    let rhs = DVector::from_fn(d, |k, _| {
        (0..d).map(|l| b.value[(l, k)] * density.log_grad[l]).sum::<f64>() + div_term[k]
    });
    let volume_clause = DVector::from_fn(d, |l, _| trace_term[l] - density.log_grad[l]);
    EqualityReport {
        residual: &rhs - &lhs,
        lhs,
        rhs,
        volume_clause_summed: volume_clause.sum(),
        volume_clause,
        projection_clause: proj_term - div_term,
    }
}

/// The first-order part `X_Δ` left over once `Σ X_k²` is removed.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    pub coords: DVector<f64>,
    /// `χ^i(X_Δ)` for the full frame.
    pub frame: DVector<f64>,
}

impl DriftField {
    /// Horizontal frame components when the vertical ones vanish, relative
    /// to the size of the field.
    pub fn horizontal_frame(&self, m: usize) -> Option<Vec<f64>> {
        let scale = self.frame.amax().max(1.0);
        let vertical = self.frame.rows(m, self.frame.len() - m).amax();
        (vertical <= tol::PRINCIPAL * scale).then(|| self.frame.rows(0, m).iter().cloned().collect())
    }
}

pub fn x_delta(delta: &CoefField, spec: &ManifoldSpec, x: &[f64]) -> Result<DriftField> {
    let geo = LocalGeometry::at(spec, x)?;
    x_delta_at(delta, &geo)
}

pub(crate) fn x_delta_at(delta: &CoefField, geo: &LocalGeometry) -> Result<DriftField> {
    let b = &geo.beta.value;
    let mismatch = (&delta.second_matrix() - b).amax();
    if mismatch > tol::PRINCIPAL * crate::linalg::max_abs(b).max(1.0) {
        return Err(Error::NotSubLaplacian { mismatch });
    }
    let coords = &delta.first - sos_first(&geo.frame, geo.horizontal_rank);
    let frame = geo.frame.frame_components(&coords);
    Ok(DriftField { coords, frame })
}

/// `H(x, p) = ½ pᵀ B(x) p`.
pub fn hamiltonian(spec: &ManifoldSpec, x: &[f64], p: &[f64]) -> Result<f64> {
    let fh = spec.frame_jet(x, 0..spec.horizontal_rank)?;
    let pv = DVector::from_column_slice(p);
    // pᵀ F_H F_Hᵀ p = |F_Hᵀ p|²
    Ok(0.5 * (fh.value.transpose() * pv).norm_squared())
}
