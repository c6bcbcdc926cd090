//! Right-hand sides of the IPM equation and of the damped Boussinesq system
//! in the symmetrized unknowns `(b, Ω)`, plus the exact per-mode propagators
//! of their linear parts.
//!
//! Linear terms are applied in Fourier space; quadratic transport terms are
//! formed on the grid and truncated by the 2/3 rule. The transport velocity
//! generated by `Ω` is `v = (R₂Ω, −R₁Ω)` and the vertical velocity used by the
//! diagnostics is `u₂ = R₁Ω`.

use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::lp::{BesovIndex, DyadicDecomposition};
use crate::spectral::{Grid, MultiplierSymbol, SpectralField, C64};

/// Relative distance to `4ε²ξ₁²/|ξ|² = 1` below which the Jordan-block
/// form of the propagator is used.
pub const JORDAN_TOL: f64 = 1e-12;

/// Buoyancy perturbation and rescaled vorticity `Ω = Λ⁻¹ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoussinesqState {
    pub b: SpectralField,
    pub omega: SpectralField,
    pub eps: f64,
    pub t: f64,
}

impl BoussinesqState {
    pub fn new(b: SpectralField, omega: SpectralField, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if **b.grid() != **omega.grid() {
            return Err(Error::GridMismatch);
        }
        if !omega.is_zero_mean() {
            return Err(Error::NonzeroMean {
                order: -1.0,
                mean: omega.mean(),
            });
        }
        Ok(Self {
            b,
            omega,
            eps,
            t: 0.0,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.b.grid()
    }
}

/// Density perturbation around the stratified profile.
#[derive(Clone, Debug, PartialEq)]
pub struct IpmState {
    pub rho: SpectralField,
    pub t: f64,
}

impl IpmState {
    pub fn new(rho: SpectralField) -> Self {
        Self { rho, t: 0.0 }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(eps))
    }
}

/// `dealias(v₁ ∂ₓf + v₂ ∂_y f)` with products taken on the grid. The mean is
/// dropped: for divergence-free `v` the term is a divergence.
pub fn transport(v1: &SpectralField, v2: &SpectralField, f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let a1 = v1.to_physical();
    let a2 = v2.to_physical();
    let fx = f.ddx().to_physical();
    let fy = f.ddy().to_physical();
    let mut prod = Array2::<f64>::zeros(grid.shape());
    Zip::from(&mut prod)
        .and(&a1)
        .and(&fx)
        .and(&a2)
        .and(&fy)
        .for_each(|p, &u, &gx, &w, &gy| *p = u * gx + w * gy);
    let mut out = SpectralField::from_physical(&prod, grid)
        .expect("product lives on the field's own grid")
        .dealias();
    out.coeffs_mut()[[0, 0]] = C64::new(0.0, 0.0);
    out
}

/// IPM velocity `(R₂R₁ρ, −R₁²ρ)`.
pub fn ipm_velocity(rho: &SpectralField) -> (SpectralField, SpectralField) {
    let r1 = rho.riesz1();
    (r1.riesz2(), -&r1.riesz1())
}

/// Nonlinear part of the IPM equation.
pub fn ipm_nonlinear(rho: &SpectralField) -> SpectralField {
    let (v1, v2) = ipm_velocity(rho);
    transport(&v1, &v2, rho)
}

/// `∂ₜρ = R₁²ρ + (R₂R₁ρ, −R₁²ρ)·∇ρ`.
pub fn ipm_rhs(s: &IpmState) -> SpectralField {
    &s.rho.riesz1().riesz1() + &ipm_nonlinear(&s.rho)
}

/// Nonlinear parts `(v·∇b, Λ⁻¹(v·∇ΛΩ))` shared by the original and scaled systems.
pub fn boussinesq_nonlinear(b: &SpectralField, omega: &SpectralField) -> (SpectralField, SpectralField) {
    let (v1, v2) = omega.perp_grad_stream();
    let nb = transport(&v1, &v2, b);
    let nw = transport(&v1, &v2, &omega.lambda_pow(1.0)).lambda_pow(-1.0);
    (nb, nw)
}

/// Time derivatives `(∂ₜb, ∂ₜΩ)` of the damped Boussinesq system.
pub fn boussinesq_rhs(s: &BoussinesqState) -> (SpectralField, SpectralField) {
    let (nb, nw) = boussinesq_nonlinear(&s.b, &s.omega);
    let db = &s.omega.riesz1() + &nb;
    let dw = s
        .b
        .riesz1()
        .axpy(-1.0 / s.eps, &s.omega)
        .axpy(1.0, &nw);
    (db, dw)
}

/// Time derivatives in the diffusive scaling `τ = εt`, `Ω̃ = Ω/ε`; the state
/// carries `(b̃, Ω̃)`.
pub fn scaled_boussinesq_rhs(s: &BoussinesqState) -> (SpectralField, SpectralField) {
    let (nb, nw) = boussinesq_nonlinear(&s.b, &s.omega);
    let db = &s.omega.riesz1() + &nb;
    let inv_eps2 = 1.0 / (s.eps * s.eps);
    let dw = (&s.b.riesz1() - &s.omega).scale(inv_eps2).axpy(1.0, &nw);
    (db, dw)
}

/// Effective unknown `z = Ω − εR₁b`.
pub fn z_variable(s: &BoussinesqState) -> SpectralField {
    s.omega.axpy(-s.eps, &s.b.riesz1())
}

/// Forcings `(h, g)` of the `(b, z)` system:
/// `h = v·∇b`, `g = −εR₁h + Λ⁻¹(v·∇ΛΩ)`.
pub fn z_system_forcings(s: &BoussinesqState) -> (SpectralField, SpectralField) {
    let (h, nw) = boussinesq_nonlinear(&s.b, &s.omega);
    let g = nw.axpy(-s.eps, &h.riesz1());
    (h, g)
}

/// Decay rates `(λ₋, λ₊)` of the linear Boussinesq operator at `ξ`,
/// `λ± = (1 ± √(1 − 4ε²ξ₁²/|ξ|²)) / (2ε)`.
pub fn eigen_decay_rates(eps: f64, k1: f64, k2: f64) -> (f64, f64) {
    let a = if k1 == 0.0 { 0.0 } else { k1 * k1 / (k1 * k1 + k2 * k2) };
    let root = (1.0 - 4.0 * eps * eps * a).max(0.0).sqrt();
    ((1.0 - root) / (2.0 * eps), (1.0 + root) / (2.0 * eps))
}

/// Coefficients of the per-mode linear system
/// `∂ₜ(b, Ω) = [[0, σ], [γσ, −κ]] (b, Ω)` with `σ = iξ₁/|ξ|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCoupling {
    pub gamma: f64,
    pub kappa: f64,
}

impl LinearCoupling {
    /// Original variables: `γ = 1`, `κ = 1/ε`.
    pub fn boussinesq(eps: f64) -> Self {
        Self {
            gamma: 1.0,
            kappa: 1.0 / eps,
        }
    }

    /// Diffusive scaling: `γ = κ = 1/ε²`.
    pub fn scaled(eps: f64) -> Self {
        let k = 1.0 / (eps * eps);
        Self { gamma: k, kappa: k }
    }

    /// `exp(t A)` for `A = [[0, σ], [γσ, −κ]]`, `σ² = −a`, as `[m00, m01, m10, m11]`.
    ///
    /// With `Δ² = κ²/4 − γa ≥ 0` and eigenvalues `−κ/2 ± Δ`,
    /// `exp(tA) = e₋ I' + S A'` where `e₋ = e^{−(κ/2+Δ)t}` and
    /// `S = (e^{(Δ−κ/2)t} − e₋)/(2Δ)`; the diagonal entries are arranged so that
    /// no difference of nearly equal exponentials is formed.
    pub fn exp_mode(&self, sigma: C64, a: f64, t: f64) -> [C64; 4] {
        let half = 0.5 * self.kappa;
        let ga = self.gamma * a;
        let disc = half * half - ga;
        let (delta, s) = if (disc / (half * half)).abs() < JORDAN_TOL {
            (0.0, t * (-half * t).exp())
        } else {
            let delta = disc.max(0.0).sqrt();
            // slow rate `κ/2 − Δ` written without cancellation; both factors
            // decay, so large `t` underflows cleanly instead of giving 0·∞
            let slow = ga / (half + delta);
            let ep = (-slow * t).exp();
            (delta, -ep * (-2.0 * delta * t).exp_m1() / (2.0 * delta))
        };
        let em = (-(half + delta) * t).exp();
        let m00 = em + (half + delta) * s;
        let m11 = em - ga / (half + delta) * s;
        [
            C64::new(m00, 0.0),
            sigma * s,
            sigma * (self.gamma * s),
            C64::new(m11, 0.0),
        ]
    }

    /// `(I − hA)⁻¹` per mode, for the implicit Euler stage.
    pub fn implicit_mode(&self, sigma: C64, a: f64, h: f64) -> [C64; 4] {
        let det = 1.0 + h * self.kappa + h * h * self.gamma * a;
        [
            C64::new((1.0 + h * self.kappa) / det, 0.0),
            sigma * (h / det),
            sigma * (h * self.gamma / det),
            C64::new(1.0 / det, 0.0),
        ]
    }
}

/// `σ = iξ₁/|ξ|` and `a = ξ₁²/|ξ|²` at grid index `(i, j)`; both vanish at
/// the origin and on the Nyquist row/column.
pub fn riesz1_symbol(grid: &Grid, i: usize, j: usize) -> (C64, f64) {
    let k = grid.kmag()[[i, j]];
    if k == 0.0 || grid.is_nyquist(i, j) {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let r = grid.kx()[i] / k;
    (C64::new(0.0, r), r * r)
}

/// Per-mode 2×2 matrices acting on `(b̂, Ω̂)`.
#[derive(Clone, Debug)]
pub struct ModePropagator {
    grid: Arc<Grid>,
    mats: Array2<[C64; 4]>,
}

impl ModePropagator {
    pub fn from_fn<F: Fn(C64, f64) -> [C64; 4]>(grid: &Arc<Grid>, f: F) -> Self {
        let mats = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            let (sigma, a) = riesz1_symbol(grid, i, j);
            f(sigma, a)
        });
        Self {
            grid: grid.clone(),
            mats,
        }
    }

    /// Exact linear flow over `dt` for the given coupling.
    pub fn exact(grid: &Arc<Grid>, coupling: LinearCoupling, dt: f64) -> Self {
        Self::from_fn(grid, |sigma, a| coupling.exp_mode(sigma, a, dt))
    }

    pub fn matrix(&self, i: usize, j: usize) -> [C64; 4] {
        self.mats[[i, j]]
    }

    /// Matrix at mode `(p, q)`.
    pub fn mode_matrix(&self, p: i64, q: i64) -> [C64; 4] {
        let i = p.rem_euclid(self.grid.nx() as i64) as usize;
        let j = q.rem_euclid(self.grid.ny() as i64) as usize;
        self.mats[[i, j]]
    }

    pub fn apply(&self, b: &SpectralField, omega: &SpectralField) -> (SpectralField, SpectralField) {
        let mut nb = b.clone();
        let mut nw = omega.clone();
        Zip::from(nb.coeffs_mut())
            .and(nw.coeffs_mut())
            .and(&self.mats)
            .for_each(|x, y, m| {
                let (u, w) = (*x, *y);
                *x = m[0] * u + m[1] * w;
                *y = m[2] * u + m[3] * w;
            });
        (nb, nw)
    }
}

/// Exact propagator of the linear part of the Boussinesq system over `dt`.
pub fn mode_propagator(grid: &Arc<Grid>, eps: f64, dt: f64) -> Result<ModePropagator> {
    check_eps(eps)?;
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be >= 0")));
    }
    Ok(ModePropagator::exact(grid, LinearCoupling::boussinesq(eps), dt))
}

/// Linear IPM flow `e^{dt R₁²}`, symbol `e^{−dt ξ₁²/|ξ|²}`; the mean is kept.
pub fn ipm_semigroup(dt: f64) -> MultiplierSymbol {
    MultiplierSymbol::new(move |k1, k2| {
        let a = k1 * k1 / (k1 * k1 + k2 * k2);
        C64::new((-dt * a).exp(), 0.0)
    })
    .with_zero_mode(C64::new(1.0, 0.0))
}

/// Distance to the Darcy manifold `Ω̃ = R₁b̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarcyResidual {
    /// `‖Ω̃ − R₁b̃‖_{B^{3/2,1/2}} + ‖Ω̃ − R₁b̃‖_{B^{1/2,1/2}}`.
    pub besov: f64,
    /// `‖Ω̃ − R₁b̃‖_{Ḣ^1} + ‖Ω̃ − R₁b̃‖_{Ḣ^2}`.
    pub sobolev: f64,
}

pub const DARCY_HIGH: BesovIndex = BesovIndex::new(1.5, 0.5);
pub const DARCY_LOW: BesovIndex = BesovIndex::new(0.5, 0.5);

/// Darcy residual of a state given in scaled variables.
pub fn darcy_residual(s: &BoussinesqState, d: &DyadicDecomposition) -> DarcyResidual {
    darcy_residual_of(&(&s.omega - &s.b.riesz1()), d)
}

/// Residual norms of an already formed mismatch field.
pub fn darcy_residual_of(r: &SpectralField, d: &DyadicDecomposition) -> DarcyResidual {
    let e = d.block_energies(r);
    DarcyResidual {
        besov: e.aniso_pair(DARCY_HIGH, DARCY_LOW),
        sobolev: r.sobolev_norm_unchecked(1.0) + r.sobolev_norm_unchecked(2.0),
    }
}
