//! Running energy functionals `M_r`, `M`, `X`, `Y`, vertical-velocity sup
//! norms, Darcy residual history and the two-solution stability experiment.
//!
//! Norms of a tuple or of an intersection space are sums of the component
//! norms. `L^p_T(B)` means `(∫₀ᵀ ‖f(t)‖_B^p dt)^{1/p}`, accumulated with the
//! trapezoid rule on the sampling times.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{z_variable, BoussinesqState, IpmState, DARCY_HIGH, DARCY_LOW};
use crate::error::{Error, Result};
use crate::lp::{BesovIndex, BlockEnergies, DyadicDecomposition};
use crate::spectral::{sup_norm, Grid, SpectralField};
use crate::timestepper::{Model, SchemeConfig, Stepper};

/// Regularity indices of the functionals: `M = M_{1−τ} + M_s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub s: f64,
    pub tau: f64,
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self { s: 3.25, tau: 0.25 }
    }
}

impl FunctionalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0 && self.s >= 3.0 + self.tau) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tau < 1 and s >= 3 + tau, got s = {}, tau = {}",
                self.s, self.tau
            )));
        }
        Ok(())
    }

    pub fn low(&self) -> f64 {
        1.0 - self.tau
    }
}

/// `‖(b, Ω)‖_{Ḣ^{1−τ} ∩ Ḣ^s}`, the smallness quantity of the initial data.
pub fn data_norm(b: &SpectralField, omega: &SpectralField, p: &FunctionalParams) -> f64 {
    [b, omega]
        .iter()
        .map(|f| f.sobolev_norm_unchecked(p.low()) + f.sobolev_norm_unchecked(p.s))
        .sum()
}

/// Running sup, `∫v dt` and `∫v² dt` of one scalar time series.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningIntegral {
    last: Option<(f64, f64)>,
    sup: f64,
    l1: f64,
    l2sq: f64,
}

impl RunningIntegral {
    /// Adds the sample `v` at time `t`; times must increase.
    pub fn push(&mut self, t: f64, v: f64) {
        if let Some((t0, v0)) = self.last {
            let h = t - t0;
            self.l1 += 0.5 * h * (v0 + v);
            self.l2sq += 0.5 * h * (v0 * v0 + v * v);
            self.sup = self.sup.max(v);
        } else {
            self.sup = v;
        }
        self.last = Some((t, v));
    }

    pub fn is_fed(&self) -> bool {
        self.last.is_some()
    }

    pub fn current(&self) -> f64 {
        self.last.map_or(0.0, |(_, v)| v)
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// `‖v‖_{L¹_T}`.
    pub fn l1(&self) -> f64 {
        self.l1
    }

    /// `‖v‖_{L²_T}`.
    pub fn l2(&self) -> f64 {
        self.l2sq.sqrt()
    }
}

/// `‖(b, Ω, z)‖_{Ḣ^r}` pieces of `M_r` at one regularity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct SobolevChannels {
    triple: RunningIntegral,
    r1b: RunningIntegral,
    omega: RunningIntegral,
    z: RunningIntegral,
}

impl SobolevChannels {
    fn push(&mut self, t: f64, r: f64, b: &SpectralField, omega: &SpectralField, z: &SpectralField) -> [f64; 3] {
        let nb = b.sobolev_norm_unchecked(r);
        let nw = omega.sobolev_norm_unchecked(r);
        let nz = z.sobolev_norm_unchecked(r);
        self.triple.push(t, nb + nw + nz);
        self.r1b.push(t, b.riesz1().sobolev_norm_unchecked(r));
        self.omega.push(t, nw);
        self.z.push(t, nz);
        [nb, nw, nz]
    }

    fn value(&self, eps: f64) -> f64 {
        let se = eps.sqrt();
        self.triple.sup() + se * self.r1b.l2() + (self.omega.l2() + self.z.l2()) / se
    }
}

const B_HALF: BesovIndex = BesovIndex::new(0.5, 0.5);
const B_THREE_HALF: BesovIndex = BesovIndex::new(1.5, 0.5);

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct BesovChannels {
    sup_triple: RunningIntegral,
    b_l1: RunningIntegral,
    b_l2: RunningIntegral,
    z_pair: RunningIntegral,
    omega_l1: RunningIntegral,
    omega_l2: RunningIntegral,
}

/// Vertical velocity `u₂ = R₁Ω` sup norms on the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct U2Norms {
    pub sup: f64,
    pub grad: f64,
    pub lambda: f64,
}

/// `sup|u₂|`, `sup|∇u₂|`, `sup|Λu₂|` over the collocation points.
pub fn u2_sup_norms(state: &BoussinesqState) -> U2Norms {
    let u2 = state.omega.riesz1();
    let gx = u2.ddx().to_physical();
    let gy = u2.ddy().to_physical();
    let grad = gx
        .iter()
        .zip(gy.iter())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    U2Norms {
        sup: sup_norm(&u2.to_physical()),
        grad,
        lambda: sup_norm(&u2.lambda_pow(1.0).to_physical()),
    }
}

/// One row of the diagnostics time series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub h_b_low: f64,
    pub h_omega_low: f64,
    pub h_z_low: f64,
    pub h_b_high: f64,
    pub h_omega_high: f64,
    pub h_z_high: f64,
    pub besov_b: f64,
    pub besov_z: f64,
    pub besov_omega: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub darcy_residual: f64,
    pub sup_u2: f64,
    pub sup_grad_u2: f64,
    pub sup_lambda_u2: f64,
}

/// Accumulates every time-integrated term of `M_r`, `X` and `Y` along a run
/// of the Boussinesq system in the original variables.
#[derive(Clone, Debug)]
pub struct FunctionalAccumulator {
    eps: f64,
    params: FunctionalParams,
    decomp: Arc<DyadicDecomposition>,
    low: SobolevChannels,
    high: SobolevChannels,
    u2: RunningIntegral,
    grad_u2: RunningIntegral,
    lambda_u2: RunningIntegral,
    besov: BesovChannels,
    darcy: RunningIntegral,
    darcy_sobolev: RunningIntegral,
    t: Option<f64>,
}

impl FunctionalAccumulator {
    pub fn new(grid: &Arc<Grid>, eps: f64, params: FunctionalParams) -> Self {
        Self::with_decomposition(Arc::new(DyadicDecomposition::new(grid)), eps, params)
    }

    pub fn with_decomposition(decomp: Arc<DyadicDecomposition>, eps: f64, params: FunctionalParams) -> Self {
        Self {
            eps,
            params,
            decomp,
            low: SobolevChannels::default(),
            high: SobolevChannels::default(),
            u2: RunningIntegral::default(),
            grad_u2: RunningIntegral::default(),
            lambda_u2: RunningIntegral::default(),
            besov: BesovChannels::default(),
            darcy: RunningIntegral::default(),
            darcy_sobolev: RunningIntegral::default(),
            t: None,
        }
    }

    pub fn params(&self) -> &FunctionalParams {
        &self.params
    }

    /// Records a sample; sampling times must strictly increase.
    pub fn feed(&mut self, s: &BoussinesqState) -> Result<DiagnosticsRow> {
        if let Some(t0) = self.t {
            if !(s.t > t0) {
                return Err(Error::InvalidParameter(format!(
                    "sample time {} does not advance past {t0}",
                    s.t
                )));
            }
        }
        let t = s.t;
        let z = z_variable(s);
        let lo = self.low.push(t, self.params.low(), &s.b, &s.omega, &z);
        let hi = self.high.push(t, self.params.s, &s.b, &s.omega, &z);

        let u = u2_sup_norms(s);
        self.u2.push(t, u.sup);
        self.grad_u2.push(t, u.grad);
        self.lambda_u2.push(t, u.lambda);

        let eb = self.decomp.block_energies(&s.b);
        let ez = self.decomp.block_energies(&z);
        let ew = self.decomp.block_energies(&s.omega);
        let pair = |e: &BlockEnergies| e.aniso_pair(B_HALF, B_THREE_HALF);
        let (pb, pz, pw) = (pair(&eb), pair(&ez), pair(&ew));
        let bc = &mut self.besov;
        bc.sup_triple.push(t, pb + pz + pw);
        bc.b_l1
            .push(t, eb.aniso_pair(BesovIndex::new(-1.5, 2.5), BesovIndex::new(-0.5, 2.5)));
        bc.b_l2
            .push(t, eb.aniso_pair(BesovIndex::new(-0.5, 1.5), BesovIndex::new(0.5, 1.5)));
        bc.z_pair.push(t, pz);
        bc.omega_l1
            .push(t, ew.aniso_pair(BesovIndex::new(0.5, 1.5), BesovIndex::new(-0.5, 1.5)));
        bc.omega_l2.push(t, pw);

        // Ω̃ − R₁b̃ = z/ε in the original variables.
        let dr = ez.aniso_pair(DARCY_HIGH, DARCY_LOW) / self.eps;
        self.darcy.push(t, dr);
        self.darcy_sobolev
            .push(t, (z.sobolev_norm_unchecked(1.0) + z.sobolev_norm_unchecked(2.0)) / self.eps);
        self.t = Some(t);

        Ok(DiagnosticsRow {
            t,
            h_b_low: lo[0],
            h_omega_low: lo[1],
            h_z_low: lo[2],
            h_b_high: hi[0],
            h_omega_high: hi[1],
            h_z_high: hi[2],
            besov_b: pb,
            besov_z: pz,
            besov_omega: pw,
            m: self.eval_m().expect("fed"),
            x: self.eval_x().expect("fed"),
            y: self.eval_y().expect("fed"),
            darcy_residual: dr,
            sup_u2: u.sup,
            sup_grad_u2: u.grad,
            sup_lambda_u2: u.lambda,
        })
    }

    fn fed(&self) -> Result<()> {
        if self.t.is_some() {
            Ok(())
        } else {
            Err(Error::Unfed("no sample recorded yet".into()))
        }
    }

    /// Time of the last sample.
    pub fn time(&self) -> Result<f64> {
        self.t.ok_or_else(|| Error::Unfed("no sample recorded yet".into()))
    }

    /// `M_r(T)` for `r = 1 − τ` or `r = s`.
    pub fn eval_m_r(&self, r: f64) -> Result<f64> {
        self.fed()?;
        if r == self.params.low() {
            Ok(self.low.value(self.eps))
        } else if r == self.params.s {
            Ok(self.high.value(self.eps))
        } else {
            Err(Error::InvalidParameter(format!(
                "M_r is tracked for r = {} and r = {} only, not {r}",
                self.params.low(),
                self.params.s
            )))
        }
    }

    /// `M = M_{1−τ} + M_s`.
    pub fn eval_m(&self) -> Result<f64> {
        self.fed()?;
        Ok(self.low.value(self.eps) + self.high.value(self.eps))
    }

    /// `X = M + ‖∇u₂‖_{L¹_T(L^∞)} + ‖Λu₂‖_{L¹_T(L^∞)}`.
    pub fn eval_x(&self) -> Result<f64> {
        Ok(self.eval_m()? + self.grad_u2.l1() + self.lambda_u2.l1())
    }

    pub fn eval_y(&self) -> Result<f64> {
        self.fed()?;
        let e = self.eps;
        let se = e.sqrt();
        let c = &self.besov;
        Ok(c.sup_triple.sup()
            + e * c.b_l1.l1()
            + se * c.b_l2.l2()
            + c.z_pair.l1() / e
            + c.z_pair.l2() / se
            + c.omega_l1.l1()
            + c.omega_l2.l2())
    }

    /// `∫₀ᵀ sup|u₂| dt`.
    pub fn u2_l1(&self) -> Result<f64> {
        self.fed()?;
        Ok(self.u2.l1())
    }

    /// `‖Ω̃ − R₁b̃‖_{L¹(B^{3/2,1/2} ∩ B^{1/2,1/2})}` in original time.
    pub fn darcy_l1(&self) -> Result<f64> {
        self.fed()?;
        Ok(self.darcy.l1())
    }

    /// Same residual measured in `Ḣ¹ ∩ Ḣ²`.
    pub fn darcy_sobolev_l1(&self) -> Result<f64> {
        self.fed()?;
        Ok(self.darcy_sobolev.l1())
    }
}

/// Writes diagnostics rows as CSV with a header line.
pub fn write_csv<W: Write>(out: W, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Separation history of two IPM solutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `‖ρ₁ − ρ₂‖_{Ḣ^s}` at each sample.
    pub w_norm: Vec<f64>,
    pub delta: f64,
    /// `max_t ‖w(t)‖ / ‖w(0)‖`; 0 when the data coincide.
    pub amplification: f64,
}

impl StabilityReport {
    pub fn max_separation(&self) -> f64 {
        self.w_norm.iter().cloned().fold(0.0, f64::max)
    }
}

/// Co-evolves two IPM solutions with identical step sizes and records
/// `‖ρ₁ − ρ₂‖_{Ḣ^s}` after every step.
pub fn stability_run(
    rho1_0: &SpectralField,
    rho2_0: &SpectralField,
    cfg: &SchemeConfig,
    s: f64,
) -> Result<StabilityReport> {
    if rho1_0.grid() != rho2_0.grid() && **rho1_0.grid() != **rho2_0.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = rho1_0.grid().clone();
    let mut st = Stepper::new(&grid, Model::Ipm, *cfg)?;
    let mut a = IpmState::new(rho1_0.clone());
    let mut b = IpmState::new(rho2_0.clone());
    let sep = |a: &IpmState, b: &IpmState| (&a.rho - &b.rho).sobolev_norm(s);
    let delta = sep(&a, &b)?;
    let mut times = vec![0.0];
    let mut w_norm = vec![delta];
    let tol = 1e-12 * cfg.t_end.max(1.0);
    while cfg.t_end - a.t > tol {
        let h = st.step_size(&a).min(st.step_size(&b)).min(cfg.t_end - a.t);
        a = st.step_by(&a, h)?;
        b = st.step_by(&b, h)?;
        times.push(a.t);
        w_norm.push(sep(&a, &b)?);
    }
    let amplification = if delta > 0.0 {
        w_norm.iter().cloned().fold(0.0, f64::max) / delta
    } else {
        0.0
    };
    Ok(StabilityReport {
        times,
        w_norm,
        delta,
        amplification,
    })
}
