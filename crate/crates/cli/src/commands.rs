//! One function per subcommand. Each returns a serializable report or a
//! [`Failure`] carrying the process exit code.

use rayon::prelude::*;
use serde::Serialize;

use subriem::catalog;
use subriem::expr::{self, Expr};
use subriem::flow::{self, PhaseState, SphereRule, SphereSampler, Stencil};
use subriem::geometry::{self, CoefField, ManifoldSpec};
use subriem::lie::{self, LieData};
use subriem::specfile::SpecFile;
use subriem::Error;

use crate::output::{rows, vector};

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_MISSING: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// A report to print even though the command failed.
    pub report: Option<String>,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
            report: None,
        }
    }

    /// Exit code for a library error raised while computing at a point.
    pub fn from_error(e: Error) -> Failure {
        let code = match &e {
            Error::Parse { .. } | Error::InvalidSpec(_) | Error::InvalidArgument(_) => EXIT_SPEC,
            Error::MissingInput(_) => EXIT_MISSING,
            _ => EXIT_DOMAIN,
        };
        Failure::new(code, e.to_string())
    }

    fn at_point(e: Error, x: &[f64]) -> Failure {
        let mut f = Failure::from_error(e);
        f.message = format!("at point {x:?}: {}", f.message);
        f
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Loads `builtin:<name>` from the catalog or a JSON spec file from disk.
pub fn load_spec(source: &str) -> Outcome<ManifoldSpec> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return catalog::entry(name).map(|e| e.spec).ok_or_else(|| {
            Failure::new(
                EXIT_SPEC,
                format!("no built-in spec `{name}`; available: {}", catalog::NAMES.join(", ")),
            )
        });
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| Failure::new(EXIT_SPEC, format!("cannot read {source}: {e}")))?;
    let spec = SpecFile::from_json(&text)
        .and_then(|f| f.to_spec())
        .map_err(|e| Failure::new(EXIT_SPEC, format!("{source}: {e}")))?;
    Ok(spec)
}

pub fn parse_point(csv: &str, d: usize) -> Outcome<Vec<f64>> {
    let values = csv
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| Failure::new(EXIT_SPEC, format!("bad coordinate list `{csv}`: {e}")))?;
    if values.len() != d || values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::new(
            EXIT_SPEC,
            format!("`{csv}` must list {d} finite numbers"),
        ));
    }
    Ok(values)
}

/// `--point` values if given, otherwise every entry of `sample_points`.
fn points(spec: &ManifoldSpec, overrides: &[String]) -> Outcome<Vec<Vec<f64>>> {
    if overrides.is_empty() {
        if spec.sample_points.is_empty() {
            return Err(Failure::new(EXIT_MISSING, "spec has no sample points; pass --point"));
        }
        return Ok(spec.sample_points.clone());
    }
    overrides.iter().map(|s| parse_point(s, spec.dimension())).collect()
}

fn parse_expr(spec: &ManifoldSpec, flag: &str, src: &str) -> Outcome<Expr> {
    expr::parse(src, &spec.coordinates)
        .map_err(|e| Failure::new(EXIT_SPEC, format!("{flag}: {e}")))
}

/// Evaluates `f` at each point in parallel, keeping input order; the first
/// failure in that order wins.
fn per_point<T: Send>(
    pts: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T, Error> + Sync,
) -> Outcome<Vec<T>> {
    pts.par_iter()
        .map(|p| f(p).map_err(|e| Failure::at_point(e, p)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Operator {
    Sos,
    Lv,
    Divgrad,
    DivgradRiem,
    HaarLeft,
    HaarRight,
}

impl Operator {
    fn name(self) -> &'static str {
        match self {
            Operator::Sos => "sos",
            Operator::Lv => "lv",
            Operator::Divgrad => "divgrad",
            Operator::DivgradRiem => "divgrad-riem",
            Operator::HaarLeft => "haar-left",
            Operator::HaarRight => "haar-right",
        }
    }
}

#[derive(Serialize)]
pub struct CoefPoint {
    point: Vec<f64>,
    second: Vec<Vec<f64>>,
    first: Vec<f64>,
    zeroth: f64,
    /// Horizontal frame components of the first-order field, for the
    /// operator normalized to principal symbol `B`.
    frame_first: Option<Vec<f64>>,
}

#[derive(Serialize)]
pub struct CoeffsReport {
    command: &'static str,
    spec: String,
    operator: &'static str,
    tau: Option<String>,
    points: Vec<CoefPoint>,
}

pub fn coeffs(source: &str, op: Operator, tau: Option<&str>, overrides: &[String]) -> Outcome<CoeffsReport> {
    let spec = load_spec(source)?;
    let pts = points(&spec, overrides)?;
    let tau_expr = match (op, tau) {
        (Operator::Divgrad, None) => return Err(Failure::new(EXIT_MISSING, "divgrad requires --tau")),
        (_, Some(t)) => Some(parse_expr(&spec, "--tau", t)?),
        (_, None) => None,
    };
    let lie_data = match op {
        Operator::HaarLeft | Operator::HaarRight => {
            let data = LieData::compute(&spec).map_err(Failure::from_error)?;
            if op == Operator::HaarRight {
                data.modular_inverse().map_err(|_| {
                    Failure::new(EXIT_MISSING, "haar-right requires a modular_inverse entry")
                })?;
            }
            Some(data)
        }
        _ => None,
    };
    let m = spec.horizontal_rank as f64;
    let results = per_point(&pts, |x| {
        let (coef, normalization) = match op {
            Operator::Sos => (geometry::sum_of_squares(&spec, x)?, 1.0),
            Operator::Lv => (geometry::lv_coefficients(&spec, x)?, m),
            Operator::Divgrad => (geometry::div_grad_h(&spec, tau_expr.as_ref().expect("checked"), x)?, 1.0),
            Operator::DivgradRiem => (geometry::div_grad_riemannian(&spec, x)?, 1.0),
            Operator::HaarLeft => (lie::haar_left_operator(&spec, lie_data.as_ref().expect("computed"), x)?.coef, 1.0),
            Operator::HaarRight => (lie::haar_right_operator(&spec, lie_data.as_ref().expect("computed"), x)?.coef, 1.0),
        };
        let frame_first = match geometry::x_delta(&coef.scaled(normalization), &spec, x) {
            Ok(xd) => xd.horizontal_frame(spec.horizontal_rank),
            Err(Error::NotSubLaplacian { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(coef_point(x, &coef, frame_first))
    })?;
    Ok(CoeffsReport {
        command: "coeffs",
        spec: spec.name.clone(),
        operator: op.name(),
        tau: tau.map(str::to_string),
        points: results,
    })
}

fn coef_point(x: &[f64], c: &CoefField, frame_first: Option<Vec<f64>>) -> CoefPoint {
    CoefPoint {
        point: x.to_vec(),
        second: rows(&c.second_matrix()),
        first: vector(&c.first),
        zeroth: c.zeroth,
        frame_first,
    }
}

#[derive(Serialize)]
pub struct CheckPoint {
    point: Vec<f64>,
    residual: Vec<f64>,
    max_residual: f64,
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    volume_clause_summed: f64,
    volume_clause: Vec<f64>,
    projection_clause: Vec<f64>,
    volume_clause_holds: bool,
    projection_clause_holds: bool,
}

#[derive(Serialize)]
pub struct CheckReport {
    command: &'static str,
    spec: String,
    tau: String,
    tol: f64,
    points: Vec<CheckPoint>,
    max_residual: f64,
    pass: bool,
}

pub fn check(source: &str, tau: Option<&str>, tolerance: f64, overrides: &[String]) -> Outcome<CheckReport> {
    let spec = load_spec(source)?;
    let tau = tau.ok_or_else(|| Failure::new(EXIT_MISSING, "check requires --tau"))?;
    let tau_expr = parse_expr(&spec, "--tau", tau)?;
    let pts = points(&spec, overrides)?;
    let results = per_point(&pts, |x| {
        let r = geometry::equality_residual(&spec, &tau_expr, x)?;
        Ok(CheckPoint {
            point: x.to_vec(),
            max_residual: r.max_residual(),
            residual: vector(&r.residual),
            lhs: vector(&r.lhs),
            rhs: vector(&r.rhs),
            volume_clause_summed: r.volume_clause_summed,
            volume_clause: vector(&r.volume_clause),
            projection_clause: vector(&r.projection_clause),
            volume_clause_holds: r.volume_clause_holds(tolerance),
            projection_clause_holds: r.projection_clause_holds(tolerance),
        })
    })?;
    let max_residual = results.iter().fold(0.0f64, |a, p| a.max(p.max_residual));
    Ok(CheckReport {
        command: "check",
        spec: spec.name.clone(),
        tau: tau.to_string(),
        tol: tolerance,
        points: results,
        max_residual,
        pass: max_residual <= tolerance,
    })
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.pass
    }
}

#[derive(Serialize)]
pub struct FlowSample {
    step: usize,
    t: f64,
    x: Vec<f64>,
    p: Vec<f64>,
    hamiltonian: f64,
}

#[derive(Serialize)]
pub struct FlowReport {
    command: &'static str,
    spec: String,
    t: f64,
    steps: usize,
    trajectory: Vec<FlowSample>,
    final_x: Vec<f64>,
    final_p: Vec<f64>,
    h_initial: f64,
    h_final: f64,
    max_drift: f64,
}

pub fn flow_cmd(
    source: &str,
    x: Option<&str>,
    p: Option<&str>,
    t: f64,
    steps: usize,
    every: Option<usize>,
) -> Outcome<FlowReport> {
    let spec = load_spec(source)?;
    let d = spec.dimension();
    let x = parse_point(x.ok_or_else(|| Failure::new(EXIT_MISSING, "flow requires --x"))?, d)?;
    let p = parse_point(p.ok_or_else(|| Failure::new(EXIT_MISSING, "flow requires --p"))?, d)?;
    if steps == 0 {
        return Err(Failure::new(EXIT_SPEC, "--steps must be at least 1"));
    }
    let every = every.unwrap_or((steps / 10).max(1)).max(1);
    let s0 = PhaseState::new(x, p);
    let h0 = geometry::hamiltonian(&spec, &s0.x, &s0.p).map_err(|e| Failure::at_point(e, &s0.x))?;
    let dt = t / steps as f64;
    let mut trajectory = Vec::new();
    let mut max_drift = 0.0f64;
    let mut h_last = h0;
    let mut h_error = None;
    let end = flow::integrate(&spec, &s0, t, steps, |k, s| {
        match geometry::hamiltonian(&spec, &s.x, &s.p) {
            Ok(h) => {
                max_drift = max_drift.max((h - h0).abs());
                h_last = h;
                if k % every == 0 || k == steps {
                    trajectory.push(FlowSample {
                        step: k,
                        t: k as f64 * dt,
                        x: s.x.clone(),
                        p: s.p.clone(),
                        hamiltonian: h,
                    });
                }
            }
            Err(e) => {
                h_error.get_or_insert(Error::FlowDomainExit {
                    step: k,
                    source: Box::new(e),
                });
            }
        }
    })
    .map_err(Failure::from_error)?;
    if let Some(e) = h_error {
        return Err(Failure::from_error(e));
    }
    Ok(FlowReport {
        command: "flow",
        spec: spec.name.clone(),
        t,
        steps,
        trajectory,
        final_x: end.x,
        final_p: end.p,
        h_initial: h0,
        h_final: h_last,
        max_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RuleArg {
    ExactCircle,
    Antithetic,
}

pub struct LvdefArgs<'a> {
    pub f: Option<&'a str>,
    pub points: &'a [String],
    pub samples: usize,
    pub h: f64,
    pub steps: usize,
    pub seed: u64,
    pub rule: Option<RuleArg>,
    pub richardson: bool,
}

#[derive(Serialize)]
pub struct LvdefPoint {
    point: Vec<f64>,
    estimate: f64,
    local_value: f64,
    abs_error: f64,
}

#[derive(Serialize)]
pub struct LvdefReport {
    command: &'static str,
    spec: String,
    f: String,
    rule: &'static str,
    samples: usize,
    h: f64,
    steps: usize,
    seed: u64,
    richardson: bool,
    points: Vec<LvdefPoint>,
}

pub fn lvdef(source: &str, args: &LvdefArgs) -> Outcome<LvdefReport> {
    let spec = load_spec(source)?;
    let f_src = args.f.ok_or_else(|| Failure::new(EXIT_MISSING, "lvdef requires --f"))?;
    let f = parse_expr(&spec, "--f", f_src)?;
    let pts = points(&spec, args.points)?;
    let m = spec.horizontal_rank;
    let rule = match args.rule {
        Some(RuleArg::ExactCircle) => SphereRule::ExactCircle,
        Some(RuleArg::Antithetic) => SphereRule::AntitheticUniform,
        None if m <= 2 => SphereRule::ExactCircle,
        None => SphereRule::AntitheticUniform,
    };
    let sampler = SphereSampler {
        m,
        rule,
        count: args.samples,
        seed: args.seed,
    };
    sampler.points().map_err(Failure::from_error)?;
    let stencil = if args.richardson {
        Stencil::Richardson
    } else {
        Stencil::Central
    };
    let results = per_point(&pts, |x| {
        let est = flow::lv_definitional(&spec, x, &f, &sampler, args.h, args.steps, stencil)?;
        let local = geometry::lv_coefficients(&spec, x)?.apply(&f.eval_jet2(x)?);
        Ok(LvdefPoint {
            point: x.to_vec(),
            estimate: est.estimate,
            local_value: local,
            abs_error: (est.estimate - local).abs(),
        })
    })?;
    Ok(LvdefReport {
        command: "lvdef",
        spec: spec.name.clone(),
        f: f_src.to_string(),
        rule: match rule {
            SphereRule::ExactCircle => "exact-circle",
            SphereRule::AntitheticUniform => "antithetic",
        },
        samples: args.samples,
        h: args.h,
        steps: args.steps,
        seed: args.seed,
        richardson: args.richardson,
        points: results,
    })
}

#[derive(Serialize)]
pub struct InvarianceReport {
    points_checked: usize,
    max_deviation: f64,
    passed: bool,
}

#[derive(Serialize)]
pub struct LieReport {
    command: &'static str,
    spec: String,
    reference_point: Vec<f64>,
    /// `[k][i][j]` = `c^k_{ij}`.
    structure_constants: Vec<Vec<Vec<f64>>>,
    trace_ad: Vec<f64>,
    unimodular: bool,
    horizontal_traces_vanish: bool,
    x_delta_left_frame: Vec<f64>,
    x_delta_right_frame: Option<Vec<f64>>,
    right_vanishes_left_does_not: bool,
    haar_path_max_discrepancy: f64,
    left_invariance: InvarianceReport,
}

/// Seed of the left-invariance spot check, fixed so output is reproducible.
const INVARIANCE_SEED: u64 = 0x5eed;

pub fn lie_cmd(source: &str) -> Outcome<LieReport> {
    let spec = load_spec(source)?;
    let data = LieData::compute(&spec).map_err(Failure::from_error)?;
    let report = lie::unimodularity_report(&spec, &data).map_err(Failure::from_error)?;
    let discrepancy = lie::haar_path_discrepancy(&spec, &data).map_err(Failure::from_error)?;
    let inv = lie::left_invariance_check(&spec, &data, 5, INVARIANCE_SEED);
    Ok(LieReport {
        command: "lie",
        spec: spec.name.clone(),
        reference_point: data.identity_point.clone(),
        structure_constants: data.structure_constants.to_nested(),
        trace_ad: report.trace_ad,
        unimodular: report.unimodular,
        horizontal_traces_vanish: report.horizontal_traces_vanish,
        x_delta_left_frame: report.x_delta_left,
        x_delta_right_frame: report.x_delta_right,
        right_vanishes_left_does_not: report.right_vanishes_left_does_not,
        haar_path_max_discrepancy: discrepancy,
        left_invariance: InvarianceReport {
            points_checked: inv.points.len(),
            passed: inv.passed(1e-8),
            max_deviation: inv.max_deviation,
        },
    })
}

/// The built-in spec files, optionally a single one.
pub fn catalog_cmd(name: Option<&str>) -> Outcome<Vec<SpecFile>> {
    match name {
        None => Ok(catalog::load_catalog().into_iter().map(|e| e.file).collect()),
        Some(n) => catalog::entry(n)
            .map(|e| vec![e.file])
            .ok_or_else(|| Failure::new(EXIT_SPEC, format!("no built-in spec `{n}`"))),
    }
}

/// Tolerance applied by `check` when none is given.
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;
