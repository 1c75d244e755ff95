//! Hamilton-Jacobi flow of `H(x, p) = ½ pᵀ B(x) p` and the definitional
//! sphere average of `L^V`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{LocalGeometry, ManifoldSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> PhaseState {
        PhaseState { x, p }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }

    fn axpy(&self, a: f64, v: &PhaseState) -> PhaseState {
        let comb = |s: &[f64], t: &[f64]| s.iter().zip(t).map(|(s, t)| s + a * t).collect();
        PhaseState {
            x: comb(&self.x, &v.x),
            p: comb(&self.p, &v.p),
        }
    }
}

/// `ẋ = B p`, `ṗ_i = −½ pᵀ (∂_i B) p`.
pub fn hj_rhs(spec: &ManifoldSpec, s: &PhaseState) -> Result<PhaseState> {
    let fh = spec.frame_jet(&s.x, 0..spec.horizontal_rank)?;
    let p = DVector::from_column_slice(&s.p);
    // w = F_Hᵀ p, so H = ½|w|² and ∂_i H = w · (∂_i F_H)ᵀ p
    let w = fh.value.transpose() * &p;
    let xdot = &fh.value * &w;
    let pdot = fh
        .partials
        .iter()
        .map(|d| -w.dot(&(d.transpose() * &p)))
        .collect();
    Ok(PhaseState {
        x: xdot.iter().cloned().collect(),
        p: pdot,
    })
}

/// Classical RK4 with `steps` equal steps, calling `observe(k, state)` after
/// step `k` (and once with `k = 0` for the initial state).
pub fn integrate(
    spec: &ManifoldSpec,
    s0: &PhaseState,
    t: f64,
    steps: usize,
    mut observe: impl FnMut(usize, &PhaseState),
) -> Result<PhaseState> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !s0.is_finite() {
        return Err(Error::NonFiniteState { step: 0 });
    }
    let dt = t / steps as f64;
    let mut s = s0.clone();
    observe(0, &s);
    for step in 1..=steps {
        let exit = |e: Error| Error::FlowDomainExit {
            step,
            source: Box::new(e),
        };
        let k1 = hj_rhs(spec, &s).map_err(exit)?;
        let k2 = hj_rhs(spec, &s.axpy(dt / 2.0, &k1)).map_err(exit)?;
        let k3 = hj_rhs(spec, &s.axpy(dt / 2.0, &k2)).map_err(exit)?;
        let k4 = hj_rhs(spec, &s.axpy(dt, &k3)).map_err(exit)?;
        s = s
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);
        if !s.is_finite() {
            return Err(Error::NonFiniteState { step });
        }
        observe(step, &s);
    }
    Ok(s)
}

pub fn flow(spec: &ManifoldSpec, s0: &PhaseState, t: f64, steps: usize) -> Result<PhaseState> {
    integrate(spec, s0, t, steps, |_, _| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereRule {
    /// Equally spaced angles on the circle (`m = 2`), or `±1` when `m = 1`.
    ExactCircle,
    /// Seeded uniform directions, each emitted together with its negative.
    AntitheticUniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSampler {
    pub m: usize,
    pub rule: SphereRule,
    pub count: usize,
    pub seed: u64,
}

impl SphereSampler {
    pub fn exact_circle(m: usize, count: usize) -> SphereSampler {
        SphereSampler {
            m,
            rule: SphereRule::ExactCircle,
            count,
            seed: 0,
        }
    }

    pub fn antithetic(m: usize, count: usize, seed: u64) -> SphereSampler {
        SphereSampler {
            m,
            rule: SphereRule::AntitheticUniform,
            count,
            seed,
        }
    }

    /// The sample directions, equally weighted.
    pub fn points(&self) -> Result<Vec<DVector<f64>>> {
        if self.m == 0 || self.count == 0 {
            return Err(Error::InvalidArgument("sphere sampler needs m ≥ 1 and count ≥ 1".into()));
        }
        match self.rule {
            SphereRule::ExactCircle => match self.m {
                1 => Ok(vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)]),
                2 => Ok((0..self.count)
                    .map(|k| {
                        let a = std::f64::consts::TAU * k as f64 / self.count as f64;
                        DVector::from_vec(vec![a.cos(), a.sin()])
                    })
                    .collect()),
                m => Err(Error::InvalidArgument(format!(
                    "the exact-circle rule needs m ≤ 2, got m = {m}"
                ))),
            },
            SphereRule::AntitheticUniform => {
                if !self.count.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(
                        "antithetic sampling needs an even count".into(),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut out = Vec::with_capacity(self.count);
                while out.len() < self.count {
                    let g = DVector::<f64>::from_fn(self.m, |_, _| StandardNormal.sample(&mut rng));
                    let n = g.norm();
                    if n < 1e-12 {
                        continue;
                    }
                    let u: DVector<f64> = g / n;
                    out.push(-&u);
                    out.push(u);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(Φ_h) − 2f(x) + f(Φ_{−h})) / h²`.
    Central,
    /// `(4 D(h/2) − D(h)) / 3` on the central difference `D`.
    Richardson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LvEstimate {
    pub estimate: f64,
    /// Second difference for each sampled direction, in sampler order.
    pub samples: Vec<f64>,
}

/// The initial covector `g^V(X)` for the horizontal vector `X = Σ u^k X_k`.
pub fn horizontal_covector(geo: &LocalGeometry, u: &DVector<f64>) -> DVector<f64> {
    let m = geo.horizontal_rank;
    let fh = geo.frame.frame.value.columns(0, m);
    geo.g_vertical() * (fh * u)
}

fn second_difference(
    spec: &ManifoldSpec,
    x: &[f64],
    f: &Expr,
    fx: f64,
    p: &DVector<f64>,
    h: f64,
    steps: usize,
) -> Result<f64> {
    let leg = |sign: f64| -> Result<f64> {
        let s0 = PhaseState::new(x.to_vec(), p.iter().map(|v| sign * v).collect());
        let end = flow(spec, &s0, h, steps)?;
        Ok(f.value(&end.x)?)
    };
    // summing the legs first makes the result exactly even in p
    Ok((leg(1.0)? + leg(-1.0)? - 2.0 * fx) / (h * h))
}

/// Sample-wise estimate for one direction `u`.
pub fn lv_sample(
    spec: &ManifoldSpec,
    geo: &LocalGeometry,
    f: &Expr,
    u: &DVector<f64>,
    h: f64,
    steps: usize,
    stencil: Stencil,
) -> Result<f64> {
    let x = &geo.frame.point;
    let fx = f.value(x)?;
    let p = horizontal_covector(geo, u);
    let d = |h| second_difference(spec, x, f, fx, &p, h, steps);
    match stencil {
        Stencil::Central => d(h),
        Stencil::Richardson => Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0),
    }
}

/// `L^V f(x)` as the average over the unit sphere of `H_x` of
/// `d²/dt² f(Φ_t(x, g^V X))` at `t = 0`.
pub fn lv_definitional(
    spec: &ManifoldSpec,
    x: &[f64],
    f: &Expr,
    sampler: &SphereSampler,
    h: f64,
    steps: usize,
    stencil: Stencil,
) -> Result<LvEstimate> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    if sampler.m != spec.horizontal_rank {
        return Err(Error::InvalidArgument(format!(
            "sampler dimension {} does not match horizontal rank {}",
            sampler.m, spec.horizontal_rank
        )));
    }
    let geo = LocalGeometry::at(spec, x)?;
    let samples = sampler
        .points()?
        .iter()
        .map(|u| lv_sample(spec, &geo, f, u, h, steps, stencil))
        .collect::<Result<Vec<f64>>>()?;
    let estimate = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(LvEstimate { estimate, samples })
}
