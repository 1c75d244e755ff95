//! Built-in charts with pinned expected values.
//!
//! Each entry is authored as a [`SpecFile`] (so the catalog doubles as
//! format documentation) and carries goldens computed from hand-derived
//! closed forms, never from the library itself.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::expr;
use crate::geometry::{self, ManifoldSpec, PointFrame};
use crate::specfile::SpecFile;

/// Where an expected value comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// A closed-form expression derived by hand for this chart.
    ClosedForm(&'static str),
    /// An independent hand computation (symbolic product, direct expansion).
    Oracle(&'static str),
    /// Holds for structural reasons, e.g. all derivatives vanish.
    Identity(&'static str),
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::ClosedForm(_) => "closed-form",
            Source::Oracle(_) => "oracle",
            Source::Identity(_) => "identity",
        }
    }

    pub fn note(&self) -> &'static str {
        match self {
            Source::ClosedForm(s) | Source::Oracle(s) | Source::Identity(s) => s,
        }
    }
}

/// A quantity the library computes at a point.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Beta,
    ExtensionMetric,
    GVertical,
    Projection,
    SumOfSquaresFirst,
    LvFirst,
    LvSecond,
    /// First-order part of `div^ω grad_H` for the density expression.
    DivGradFirst(String),
    EqualityResidual(String),
    /// `1 / |det F|`.
    InverseFrameVolume,
}

impl Quantity {
    fn label(&self) -> String {
        match self {
            Quantity::Beta => "beta".into(),
            Quantity::ExtensionMetric => "extension_metric".into(),
            Quantity::GVertical => "g_vertical".into(),
            Quantity::Projection => "projection".into(),
            Quantity::SumOfSquaresFirst => "sos.first".into(),
            Quantity::LvFirst => "lv.first".into(),
            Quantity::LvSecond => "lv.second".into(),
            Quantity::DivGradFirst(t) => format!("div_grad_h(tau={t}).first"),
            Quantity::EqualityResidual(t) => format!("equality_residual(tau={t})"),
            Quantity::InverseFrameVolume => "inverse_frame_volume".into(),
        }
    }

    pub fn evaluate(&self, spec: &ManifoldSpec, x: &[f64]) -> Result<Value> {
        let tau = |src: &str| expr::parse(src, &spec.coordinates).expect("golden density parses");
        Ok(match self {
            Quantity::Beta => Value::Matrix(geometry::beta_matrix(spec, x)?.value),
            Quantity::ExtensionMetric => Value::Matrix(geometry::extension_metric(spec, x)?.value),
            Quantity::GVertical => Value::Matrix(geometry::g_vertical(spec, x)?),
            Quantity::Projection => Value::Matrix(geometry::horizontal_projection(spec, x)?.0),
            Quantity::SumOfSquaresFirst => Value::Vector(geometry::sum_of_squares(spec, x)?.first),
            Quantity::LvFirst => Value::Vector(geometry::lv_coefficients(spec, x)?.first),
            Quantity::LvSecond => Value::Matrix(geometry::lv_coefficients(spec, x)?.second_matrix()),
            Quantity::DivGradFirst(t) => Value::Vector(geometry::div_grad_h(spec, &tau(t), x)?.first),
            Quantity::EqualityResidual(t) => {
                Value::Vector(geometry::equality_residual(spec, &tau(t), x)?.residual)
            }
            Quantity::InverseFrameVolume => Value::Scalar(1.0 / PointFrame::at(spec, x)?.det.abs()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Value {
    /// Largest entrywise difference; infinite on a shape mismatch.
    pub fn distance(&self, other: &Value) -> f64 {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => (a - b).abs(),
            (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => (a - b).amax(),
            (Value::Matrix(a), Value::Matrix(b)) if a.shape() == b.shape() => (a - b).amax(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Golden {
    pub quantity: Quantity,
    pub point: Vec<f64>,
    pub expected: Value,
    pub tol: f64,
    pub source: Source,
}

impl Golden {
    pub fn name(&self) -> String {
        format!("{} at {:?}", self.quantity.label(), self.point)
    }

    /// Absolute deviation of the library's value from the expected one.
    pub fn deviation(&self, spec: &ManifoldSpec) -> Result<f64> {
        Ok(self.quantity.evaluate(spec, &self.point)?.distance(&self.expected))
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub file: SpecFile,
    pub spec: ManifoldSpec,
    pub golden: Vec<Golden>,
    /// Per-coordinate box strictly inside the chart, for random sampling.
    pub domain_box: Vec<(f64, f64)>,
}

pub const NAMES: [&str; 5] = ["heisenberg", "su2", "affine", "heisenberg-rotated", "euclidean3"];

pub fn load_catalog() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| entry(n).expect("catalog names are built in")).collect()
}

type GoldenFn = fn(&[f64]) -> Vec<Golden>;

pub fn entry(name: &str) -> Option<CatalogEntry> {
    let (file, domain_box, golden): (SpecFile, Vec<(f64, f64)>, GoldenFn) = match name {
        "heisenberg" => (heisenberg_file(), vec![(-3.0, 3.0); 3], heisenberg_golden),
        "su2" => (su2_file(), vec![(0.3, PI - 0.3), (-PI, PI), (-PI, PI)], su2_golden),
        "affine" => (affine_file(), vec![(0.3, 3.0), (-2.0, 2.0), (-2.0, 2.0)], affine_golden),
        "heisenberg-rotated" => (rotated_file(), vec![(-3.0, 3.0); 3], rotated_golden),
        "euclidean3" => (euclidean_file(), vec![(-2.0, 2.0); 3], euclidean_golden),
        _ => return None,
    };
    let spec = file.to_spec().expect("built-in specs are valid");
    let golden = spec.sample_points.iter().flat_map(|p| golden(p)).collect();
    Some(CatalogEntry {
        file,
        spec,
        golden,
        domain_box,
    })
}

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn densities(pairs: &[(&str, &str)]) -> std::collections::BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn xyz() -> Vec<String> {
    vec!["x".into(), "y".into(), "z".into()]
}

fn heisenberg_points() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0, 0.0],
        vec![2.0, -1.0, 0.0],
        vec![1.0, 2.0, 3.0],
        vec![-1.5, 0.5, -2.0],
        vec![0.25, -0.75, 1.0],
        vec![-2.0, -2.0, 0.5],
        vec![3.0, 0.0, -1.0],
        vec![0.0, 1.5, 2.5],
        vec![-0.5, 2.5, -3.0],
        vec![1.25, 1.25, 0.0],
    ]
}

fn heisenberg_file() -> SpecFile {
    SpecFile {
        name: "heisenberg".into(),
        dimension: 3,
        horizontal_rank: 2,
        coordinates: xyz(),
        full_frame: strings(&[&["1", "0", "-y/2"], &["0", "1", "x/2"], &["0", "0", "1"]]),
        vertical_scaling: None,
        volume_densities: densities(&[("left_haar", "1"), ("right_haar", "1")]),
        modular_inverse: Some("1".into()),
        identity_point: Some(vec![0.0; 3]),
        sample_points: heisenberg_points(),
        domain_notes: "global chart of exponential coordinates; no restrictions".into(),
    }
}

fn su2_file() -> SpecFile {
    SpecFile {
        name: "su2".into(),
        dimension: 3,
        horizontal_rank: 2,
        coordinates: vec!["theta".into(), "phi".into(), "psi".into()],
        full_frame: strings(&[
            &["cos(psi)", "sin(psi)/sin(theta)", "-cos(theta)*sin(psi)/sin(theta)"],
            &["-sin(psi)", "cos(psi)/sin(theta)", "-cos(theta)*cos(psi)/sin(theta)"],
            &["0", "0", "1"],
        ]),
        vertical_scaling: None,
        volume_densities: densities(&[("left_haar", "sin(theta)"), ("right_haar", "sin(theta)")]),
        modular_inverse: Some("1".into()),
        identity_point: None,
        sample_points: vec![
            vec![PI / 6.0, 0.3, 0.7],
            vec![PI / 4.0, -1.1, 2.0],
            vec![PI / 3.0, 0.0, -0.4],
            vec![PI / 2.0, 2.5, 1.2],
        ],
        domain_notes: "Euler-angle chart, valid for 0 < theta < pi; the group identity is not in the chart, so the first sample point serves as reference".into(),
    }
}

fn affine_file() -> SpecFile {
    SpecFile {
        name: "affine".into(),
        dimension: 3,
        horizontal_rank: 2,
        coordinates: xyz(),
        full_frame: strings(&[&["x", "0", "0"], &["0", "x", "1"], &["0", "x", "0"]]),
        vertical_scaling: None,
        volume_densities: densities(&[("left_haar", "x^-2"), ("right_haar", "x^-1")]),
        modular_inverse: Some("x".into()),
        identity_point: Some(vec![1.0, 0.0, 0.0]),
        sample_points: vec![vec![0.5, 0.0, 0.0], vec![1.0, 0.5, -1.0], vec![2.0, -1.0, 0.5]],
        domain_notes: "requires x > 0".into(),
    }
}

fn rotated_file() -> SpecFile {
    SpecFile {
        name: "heisenberg-rotated".into(),
        dimension: 3,
        horizontal_rank: 2,
        coordinates: xyz(),
        full_frame: strings(&[
            &["cos(z)", "-sin(z)", "-(x*sin(z) + y*cos(z))/2"],
            &["sin(z)", "cos(z)", "(x*cos(z) - y*sin(z))/2"],
            &["0", "0", "1"],
        ]),
        vertical_scaling: None,
        volume_densities: densities(&[("lebesgue", "1")]),
        modular_inverse: None,
        identity_point: None,
        sample_points: heisenberg_points(),
        domain_notes: "Heisenberg frame rotated by the angle z; orthonormal but not left-invariant".into(),
    }
}

fn euclidean_file() -> SpecFile {
    SpecFile {
        name: "euclidean3".into(),
        dimension: 3,
        horizontal_rank: 3,
        coordinates: xyz(),
        full_frame: strings(&[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]]),
        vertical_scaling: None,
        volume_densities: densities(&[("left_haar", "1"), ("right_haar", "1")]),
        modular_inverse: Some("1".into()),
        identity_point: Some(vec![0.0; 3]),
        sample_points: vec![vec![0.0, 0.0, 0.0], vec![1.0, -2.0, 0.5], vec![-0.3, 0.7, 1.9]],
        domain_notes: "Riemannian: the horizontal bundle is the whole tangent bundle".into(),
    }
}

fn mat(rows: [[f64; 3]; 3]) -> Value {
    Value::Matrix(DMatrix::from_fn(3, 3, |i, j| rows[i][j]))
}

fn vec3(v: [f64; 3]) -> Value {
    Value::Vector(DVector::from_column_slice(&v))
}

fn g(quantity: Quantity, p: &[f64], expected: Value, tol: f64, source: Source) -> Golden {
    Golden {
        quantity,
        point: p.to_vec(),
        expected,
        tol,
        source,
    }
}

const ZERO: [f64; 3] = [0.0; 3];

fn heisenberg_beta(x: f64, y: f64) -> Value {
    mat([
        [1.0, 0.0, -y / 2.0],
        [0.0, 1.0, x / 2.0],
        [-y / 2.0, x / 2.0, (x * x + y * y) / 4.0],
    ])
}

fn heisenberg_golden(p: &[f64]) -> Vec<Golden> {
    let (x, y) = (p[0], p[1]);
    let cf = Source::ClosedForm;
    vec![
        g(Quantity::Beta, p, heisenberg_beta(x, y), 1e-14, cf("B = F_H F_Hᵀ for X = ∂x − y/2 ∂z, Y = ∂y + x/2 ∂z")),
        g(
            Quantity::ExtensionMetric,
            p,
            mat([
                [1.0 + y * y / 4.0, -x * y / 4.0, y / 2.0],
                [-x * y / 4.0, 1.0 + x * x / 4.0, -x / 2.0],
                [y / 2.0, -x / 2.0, 1.0],
            ]),
            1e-13,
            cf("G = F⁻ᵀ F⁻¹ with the dual coframe dx, dy, dz + y/2 dx − x/2 dy"),
        ),
        g(Quantity::GVertical, p, mat([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]), 1e-12, cf("G B G")),
        g(
            Quantity::Projection,
            p,
            mat([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-y / 2.0, x / 2.0, 0.0]]),
            1e-13,
            cf("P = B G"),
        ),
        g(Quantity::SumOfSquaresFirst, p, vec3(ZERO), 1e-14, Source::Oracle("X² + Y² expanded: no first-order terms")),
        g(Quantity::LvFirst, p, vec3(ZERO), 1e-13, Source::Oracle("L^V = ½(X² + Y²)")),
        g(Quantity::DivGradFirst("1".into()), p, vec3(ZERO), 1e-14, Source::Oracle("∂_i B^{ij} = 0 for the Heisenberg cometric")),
        g(Quantity::EqualityResidual("1".into()), p, vec3(ZERO), 1e-13, Source::Oracle("Lebesgue measure is Haar and matches L^V")),
        g(Quantity::InverseFrameVolume, p, Value::Scalar(1.0), 1e-14, cf("det F = 1")),
    ]
}

fn su2_golden(p: &[f64]) -> Vec<Golden> {
    let t = p[0];
    let (s, c) = (t.sin(), t.cos());
    let cot = c / s;
    let cf = Source::ClosedForm;
    vec![
        g(
            Quantity::Beta,
            p,
            mat([[1.0, 0.0, 0.0], [0.0, 1.0 / (s * s), -c / (s * s)], [0.0, -c / (s * s), c * c / (s * s)]]),
            1e-12,
            cf("B = F_H F_Hᵀ, independent of phi and psi"),
        ),
        g(
            Quantity::ExtensionMetric,
            p,
            mat([[1.0, 0.0, 0.0], [0.0, 1.0, c], [0.0, c, 1.0]]),
            1e-12,
            cf("G = F⁻ᵀ F⁻¹ at λ = 1"),
        ),
        g(Quantity::GVertical, p, mat([[1.0, 0.0, 0.0], [0.0, s * s, 0.0], [0.0, 0.0, 0.0]]), 1e-12, cf("G B G")),
        g(Quantity::Projection, p, mat([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -c, 0.0]]), 1e-12, cf("P = B G")),
        g(Quantity::SumOfSquaresFirst, p, vec3([cot, 0.0, 0.0]), 1e-12, Source::Oracle("X² + Y² = ∂θ² + … + cot θ ∂θ")),
        g(Quantity::LvFirst, p, vec3([cot / 2.0, 0.0, 0.0]), 1e-12, cf("½ cot θ ∂θ")),
        g(
            Quantity::DivGradFirst("sin(theta)".into()),
            p,
            vec3([cot, 0.0, 0.0]),
            1e-12,
            Source::Oracle("B¹¹ ∂θ log sin θ = cot θ; the other columns cancel"),
        ),
        g(
            Quantity::EqualityResidual("sin(theta)".into()),
            p,
            vec3(ZERO),
            1e-12,
            Source::Oracle("m L^V = div grad_H for the Haar density sin θ"),
        ),
        g(Quantity::InverseFrameVolume, p, Value::Scalar(s.abs()), 1e-13, cf("det F = 1/sin θ")),
    ]
}

fn affine_golden(p: &[f64]) -> Vec<Golden> {
    let x = p[0];
    let cf = Source::ClosedForm;
    let or = Source::Oracle;
    vec![
        g(Quantity::Beta, p, mat([[x * x, 0.0, 0.0], [0.0, x * x, x], [0.0, x, 1.0]]), 1e-13, cf("B = F_H F_Hᵀ for X = x∂x, Y = x∂y + ∂z")),
        g(
            Quantity::ExtensionMetric,
            p,
            mat([[1.0 / (x * x), 0.0, 0.0], [0.0, 1.0 / (x * x), -1.0 / x], [0.0, -1.0 / x, 2.0]]),
            1e-12,
            cf("G = F⁻ᵀ F⁻¹ with Z = x∂y"),
        ),
        g(
            Quantity::GVertical,
            p,
            mat([[1.0 / (x * x), 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
            1e-12,
            or("direct product G B G; the (3,3) entry is +1, as positive semi-definiteness requires"),
        ),
        g(Quantity::Projection, p, mat([[1.0, 0.0, 0.0], [0.0, 0.0, x], [0.0, 0.0, 1.0]]), 1e-12, cf("P = B G")),
        g(Quantity::SumOfSquaresFirst, p, vec3([x, 0.0, 0.0]), 1e-13, or("X² = x²∂x² + x∂x, Y² has no first-order part")),
        g(Quantity::LvFirst, p, vec3([x / 2.0, 0.0, 0.0]), 1e-12, or("L^V = ½(X² + Y²)")),
        g(Quantity::DivGradFirst("x^-1".into()), p, vec3([x, 0.0, 0.0]), 1e-13, or("x²·(−1/x) + 2x")),
        g(Quantity::DivGradFirst("x^-2".into()), p, vec3(ZERO), 1e-13, or("x²·(−2/x) + 2x")),
        g(
            Quantity::EqualityResidual("x^-2".into()),
            p,
            vec3([-x, 0.0, 0.0]),
            1e-12,
            or("B¹¹·(−2/x + 1/x) against the certified right-Haar density"),
        ),
        g(Quantity::EqualityResidual("x^-1".into()), p, vec3(ZERO), 1e-12, or("m L^V = div grad_H for x⁻¹")),
        g(Quantity::InverseFrameVolume, p, Value::Scalar(1.0 / (x * x)), 1e-12, cf("det F = −x²")),
    ]
}

fn rotated_golden(p: &[f64]) -> Vec<Golden> {
    let (x, y) = (p[0], p[1]);
    vec![
        g(Quantity::Beta, p, heisenberg_beta(x, y), 1e-13, Source::Identity("a pointwise rotation leaves F_H F_Hᵀ unchanged")),
        g(
            Quantity::SumOfSquaresFirst,
            p,
            vec3([x / 2.0, y / 2.0, 0.0]),
            1e-13,
            Source::Oracle("(X′)² + (Y′)² = X² + Y² + ½x∂x + ½y∂y"),
        ),
    ]
}

fn euclidean_golden(p: &[f64]) -> Vec<Golden> {
    let id = mat([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let third = mat([[1.0 / 3.0, 0.0, 0.0], [0.0, 1.0 / 3.0, 0.0], [0.0, 0.0, 1.0 / 3.0]]);
    let flat = Source::Identity("constant cometric: every derivative vanishes");
    vec![
        g(Quantity::Beta, p, id.clone(), 0.0, flat.clone()),
        g(Quantity::GVertical, p, id, 1e-15, flat.clone()),
        g(Quantity::LvSecond, p, third, 1e-15, Source::Identity("L^V is the Laplacian scaled by 1/m when H = TM")),
        g(Quantity::LvFirst, p, vec3(ZERO), 0.0, flat.clone()),
        g(Quantity::SumOfSquaresFirst, p, vec3(ZERO), 0.0, flat),
    ]
}
