//! Lawson (integrating-factor) Runge–Kutta schemes and an IMEX Euler
//! fallback. The stiff linear part is advanced exactly per Fourier mode, so
//! the damping `1/ε` never restricts the step; the step is only capped by an
//! advective CFL bound.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    boussinesq_nonlinear, check_eps, ipm_nonlinear, ipm_velocity, riesz1_symbol, BoussinesqState,
    IpmState, LinearCoupling, ModePropagator,
};
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    LawsonRk2,
    LawsonRk4,
    ImexEuler,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::LawsonRk2 => 2,
            Scheme::LawsonRk4 => 4,
            Scheme::ImexEuler => 1,
        }
    }
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            cfl_safety: default_cfl(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_safety = {} outside (0, 1]",
                self.cfl_safety
            )));
        }
        Ok(())
    }
}

/// Which evolution equation a [`Stepper`] advances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    /// Damped Boussinesq in the original variables.
    Boussinesq { eps: f64 },
    /// Damped Boussinesq in the diffusive scaling `τ = εt`, `Ω̃ = Ω/ε`.
    ScaledBoussinesq { eps: f64 },
    Ipm,
}

impl Model {
    fn coupling(&self) -> Option<LinearCoupling> {
        match *self {
            Model::Boussinesq { eps } => Some(LinearCoupling::boussinesq(eps)),
            Model::ScaledBoussinesq { eps } => Some(LinearCoupling::scaled(eps)),
            Model::Ipm => None,
        }
    }
}

/// A state the steppers can advance: a list of spectral components plus time.
pub trait SteppedState: Clone {
    fn components(&self) -> Vec<SpectralField>;
    fn rebuild(&self, components: Vec<SpectralField>, t: f64) -> Self;
    fn time(&self) -> f64;
    /// Largest transport speed on the grid.
    fn max_velocity(&self) -> f64;
}

fn speed(v1: &SpectralField, v2: &SpectralField) -> f64 {
    let a = v1.to_physical();
    let b = v2.to_physical();
    let mut m = 0.0f64;
    Zip::from(&a).and(&b).for_each(|&x, &y| m = m.max(x.hypot(y)));
    m
}

impl SteppedState for BoussinesqState {
    fn components(&self) -> Vec<SpectralField> {
        vec![self.b.clone(), self.omega.clone()]
    }

    fn rebuild(&self, components: Vec<SpectralField>, t: f64) -> Self {
        let mut it = components.into_iter();
        Self {
            b: it.next().expect("buoyancy component"),
            omega: it.next().expect("vorticity component"),
            eps: self.eps,
            t,
        }
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn max_velocity(&self) -> f64 {
        let (v1, v2) = self.omega.perp_grad_stream();
        speed(&v1, &v2)
    }
}

impl SteppedState for IpmState {
    fn components(&self) -> Vec<SpectralField> {
        vec![self.rho.clone()]
    }

    fn rebuild(&self, components: Vec<SpectralField>, t: f64) -> Self {
        Self {
            rho: components.into_iter().next().expect("density component"),
            t,
        }
    }

    fn time(&self) -> f64 {
        self.t
    }

    fn max_velocity(&self) -> f64 {
        let (v1, v2) = ipm_velocity(&self.rho);
        speed(&v1, &v2)
    }
}

/// Per-mode linear operator: a 2×2 matrix field or a real scalar multiplier.
#[derive(Clone, Debug)]
enum ModeOp {
    Pair(ModePropagator),
    Scalar(Array2<f64>),
}

impl ModeOp {
    fn apply(&self, u: &[SpectralField]) -> Vec<SpectralField> {
        match self {
            ModeOp::Pair(p) => {
                let (b, w) = p.apply(&u[0], &u[1]);
                vec![b, w]
            }
            ModeOp::Scalar(m) => u
                .iter()
                .map(|f| {
                    let mut g = f.clone();
                    Zip::from(g.coeffs_mut()).and(m).for_each(|c, &k| *c *= k);
                    g
                })
                .collect(),
        }
    }
}

fn scalar_op(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> ModeOp {
    ModeOp::Scalar(Array2::from_shape_fn(grid.shape(), |(i, j)| {
        f(riesz1_symbol(grid, i, j).1)
    }))
}

const CACHE_LEN: usize = 8;

/// Time stepper for one model and scheme. Linear propagators are cached per
/// step size.
#[derive(Debug)]
pub struct Stepper {
    grid: Arc<Grid>,
    model: Model,
    cfg: SchemeConfig,
    nonlinear: bool,
    cache: Vec<(u64, ModeOp)>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, model: Model, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        match model {
            Model::Boussinesq { eps } | Model::ScaledBoussinesq { eps } => check_eps(eps)?,
            Model::Ipm => {}
        }
        Ok(Self {
            grid: grid.clone(),
            model,
            cfg,
            nonlinear: true,
            cache: Vec::new(),
        })
    }

    /// Drops the nonlinear terms (linear test mode).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    fn flow(&mut self, h: f64) -> &ModeOp {
        let key = h.to_bits();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return &self.cache[pos].1;
        }
        let op = match self.model.coupling() {
            Some(c) => ModeOp::Pair(ModePropagator::exact(&self.grid, c, h)),
            None => scalar_op(&self.grid, |a| (-h * a).exp()),
        };
        if self.cache.len() == CACHE_LEN {
            self.cache.remove(0);
        }
        self.cache.push((key, op));
        &self.cache.last().expect("just pushed").1
    }

    fn implicit(&self, h: f64) -> ModeOp {
        match self.model.coupling() {
            Some(c) => ModeOp::Pair(ModePropagator::from_fn(&self.grid, |s, a| {
                c.implicit_mode(s, a, h)
            })),
            None => scalar_op(&self.grid, |a| 1.0 / (1.0 + h * a)),
        }
    }

    fn nonlinear_terms(&self, u: &[SpectralField]) -> Vec<SpectralField> {
        if !self.nonlinear {
            return u.iter().map(|f| SpectralField::zeros(f.grid())).collect();
        }
        match self.model {
            Model::Ipm => vec![ipm_nonlinear(&u[0])],
            _ => {
                let (nb, nw) = boussinesq_nonlinear(&u[0], &u[1]);
                vec![nb, nw]
            }
        }
    }

    /// One step of size `h` on raw components.
    pub fn advance(&mut self, u: &[SpectralField], h: f64) -> Vec<SpectralField> {
        match self.cfg.scheme {
            Scheme::LawsonRk2 => {
                let k1 = self.nonlinear_terms(u);
                let star = self.flow(h).apply(&axpy_all(u, h, &k1));
                let k2 = self.nonlinear_terms(&star);
                let base = self.flow(h).apply(&axpy_all(u, 0.5 * h, &k1));
                axpy_all(&base, 0.5 * h, &k2)
            }
            Scheme::LawsonRk4 => {
                let k1 = self.nonlinear_terms(u);
                let b = self.flow(0.5 * h).apply(&axpy_all(u, 0.5 * h, &k1));
                let k2 = self.nonlinear_terms(&b);
                let half_a = self.flow(0.5 * h).apply(u);
                let c = axpy_all(&half_a, 0.5 * h, &k2);
                let k3 = self.nonlinear_terms(&c);
                let full_a = self.flow(h).apply(u);
                let d = axpy_all(&full_a, h, &self.flow(0.5 * h).apply(&k3));
                let k4 = self.nonlinear_terms(&d);
                let k23 = axpy_all(&k2, 1.0, &k3);
                let mid = self.flow(0.5 * h).apply(&k23);
                let pk1 = self.flow(h).apply(&k1);
                let mut out = axpy_all(&full_a, h / 6.0, &pk1);
                out = axpy_all(&out, h / 3.0, &mid);
                axpy_all(&out, h / 6.0, &k4)
            }
            Scheme::ImexEuler => {
                let k1 = self.nonlinear_terms(u);
                self.implicit(h).apply(&axpy_all(u, h, &k1))
            }
        }
    }

    /// Step size actually used from a state: `dt` capped by the CFL bound.
    pub fn step_size<S: SteppedState>(&self, s: &S) -> f64 {
        if !self.nonlinear {
            return self.cfg.dt;
        }
        let v = s.max_velocity();
        if v > 0.0 {
            let h = self.grid.dx().min(self.grid.dy());
            self.cfg.dt.min(self.cfg.cfl_safety * h / v)
        } else {
            self.cfg.dt
        }
    }

    /// Advances `s` by exactly `h`, failing on non-finite output.
    pub fn step_by<S: SteppedState>(&mut self, s: &S, h: f64) -> Result<S> {
        let out = self.advance(&s.components(), h);
        let t = s.time() + h;
        if let Some(bad) = out.iter().position(|f| !f.is_finite()) {
            return Err(Error::NonFinite {
                t,
                what: format!("component {bad} after a step of size {h}"),
            });
        }
        Ok(s.rebuild(out, t))
    }

    /// Integrates from `s0` to `cfg.t_end`, calling every observer on the
    /// initial state, every `stride` steps, and on the final state.
    pub fn integrate<S: SteppedState>(
        &mut self,
        s0: &S,
        stride: usize,
        observers: &mut [&mut dyn FnMut(&S) -> Result<()>],
    ) -> Result<(S, Trajectory)> {
        let stride = stride.max(1);
        let t_end = self.cfg.t_end;
        let mut traj = Trajectory {
            times: Vec::new(),
            stride,
            steps: 0,
        };
        let mut s = s0.clone();
        notify(observers, &s)?;
        traj.times.push(s.time());
        let tol = 1e-12 * t_end.abs().max(1.0);
        let mut sampled = true;
        while t_end - s.time() > tol {
            let remaining = t_end - s.time();
            let h = self.step_size(&s);
            let last = remaining <= h * (1.0 + 1e-9);
            let h = if last { remaining } else { h };
            s = self.step_by(&s, h)?;
            if last {
                s = s.rebuild(s.components(), t_end);
            }
            traj.steps += 1;
            sampled = traj.steps % stride == 0;
            if sampled {
                notify(observers, &s)?;
                traj.times.push(s.time());
            }
        }
        if !sampled {
            notify(observers, &s)?;
            traj.times.push(s.time());
        }
        Ok((s, traj))
    }
}

fn notify<S>(observers: &mut [&mut dyn FnMut(&S) -> Result<()>], s: &S) -> Result<()> {
    observers.iter_mut().try_for_each(|o| o(s))
}

fn axpy_all(u: &[SpectralField], a: f64, x: &[SpectralField]) -> Vec<SpectralField> {
    u.iter().zip(x).map(|(f, g)| f.axpy(a, g)).collect()
}

/// Sample times of an integration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub stride: usize,
    /// Number of steps taken.
    pub steps: usize,
}

/// One step of the original Boussinesq system with step `cfg.dt`.
pub fn step(s: &BoussinesqState, cfg: &SchemeConfig) -> Result<BoussinesqState> {
    Stepper::new(s.grid(), Model::Boussinesq { eps: s.eps }, *cfg)?.step_by(s, cfg.dt)
}

/// One step of the diffusively scaled system; the state holds `(b̃, Ω̃)`.
pub fn step_scaled(s: &BoussinesqState, cfg: &SchemeConfig) -> Result<BoussinesqState> {
    Stepper::new(s.grid(), Model::ScaledBoussinesq { eps: s.eps }, *cfg)?.step_by(s, cfg.dt)
}

/// One IPM step with step `cfg.dt`.
pub fn step_ipm(s: &IpmState, cfg: &SchemeConfig) -> Result<IpmState> {
    Stepper::new(s.rho.grid(), Model::Ipm, *cfg)?.step_by(s, cfg.dt)
}

/// Integrates the original Boussinesq system to `cfg.t_end`, sampling every step.
pub fn integrate(
    s0: &BoussinesqState,
    cfg: &SchemeConfig,
    observers: &mut [&mut dyn FnMut(&BoussinesqState) -> Result<()>],
) -> Result<(BoussinesqState, Trajectory)> {
    Stepper::new(s0.grid(), Model::Boussinesq { eps: s0.eps }, *cfg)?.integrate(s0, 1, observers)
}
