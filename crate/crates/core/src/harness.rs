//! Experiment orchestration: configuration, initial data, single runs,
//! relaxation sweeps, the inequality-verification suite and a self-test.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    csv_err, data_norm, write_csv, DiagnosticsRow, FunctionalAccumulator, FunctionalParams,
    RunningIntegral,
};
use crate::dynamics::{
    boussinesq_rhs, darcy_residual, ipm_rhs, mode_propagator, scaled_boussinesq_rhs,
    BoussinesqState, IpmState,
};
use crate::error::{Error, Result};
use crate::lp::{
    single_mode, verify_bernstein, verify_besov_inclusion, verify_embedding_sobolev,
    verify_interpolation, verify_lip_embedding, BernsteinCase, DyadicDecomposition, LipCase,
    VerifierReport,
};
use crate::spectral::{make_grid, mode_number, read_snapshot, sup_norm, write_snapshot, Grid, MultiplierSymbol, SpectralField, C64};
use crate::timestepper::{Model, Scheme, SchemeConfig, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "two_pi")]
    pub lx: f64,
    #[serde(default = "two_pi")]
    pub ly: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            lx: two_pi(),
            ly: two_pi(),
        }
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        make_grid(self.nx, self.ny, self.lx, self.ly)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(64)
    }
}

/// How the second unknown is initialised from `b₀`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaInit {
    #[default]
    Zero,
    /// `Ω₀ = R₁b₀`.
    Riesz,
    /// An independent random field (random_band recipes only).
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    /// Periodized Gaussian `A exp(−(x−c₁)²/w₁² − (y−c₂)²/w₂²)`, mean removed.
    GaussianBump {
        amplitude: f64,
        widths: [f64; 2],
        center: [f64; 2],
        #[serde(default)]
        omega: OmegaInit,
        /// Rescale so that `‖(b₀, Ω₀)‖_{Ḣ^{1−τ}∩Ḣ^s}` equals this value.
        #[serde(default)]
        target_norm: Option<f64>,
    },
    /// Random phases and amplitudes on the shell `k_min ≤ |ξ| ≤ k_max`, then
    /// rescaled to `‖(b₀, Ω₀)‖_{Ḣ^{1−τ}∩Ḣ^s} = target_norm`.
    RandomBand {
        seed: u64,
        shell: [f64; 2],
        target_norm: f64,
        #[serde(default)]
        omega: OmegaInit,
    },
    /// Grid snapshots written by [`write_snapshot`].
    File {
        b: PathBuf,
        #[serde(default)]
        omega: Option<PathBuf>,
    },
}

impl Default for Recipe {
    fn default() -> Self {
        Recipe::GaussianBump {
            amplitude: 1.0,
            widths: [0.8, 0.8],
            center: [PI, PI],
            omega: OmegaInit::Zero,
            target_norm: None,
        }
    }
}

/// Initial data for the relaxation sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// `Ω̃₀ = R₁b₀`: on the Darcy manifold, no initial layer.
    #[default]
    WellPrepared,
    /// Original-variable data `(b₀, Ω₀ = R₁b₀)` held fixed as ε varies,
    /// i.e. `Ω̃₀ = R₁b₀/ε`, which starts off the manifold.
    Unscaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxParams {
    #[serde(default)]
    pub preparation: Preparation,
    #[serde(default = "default_tau_prime")]
    pub tau_prime: f64,
    #[serde(default = "default_s_prime")]
    pub s_prime: f64,
}

fn default_tau_prime() -> f64 {
    0.5
}

fn default_s_prime() -> f64 {
    1.0
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self {
            preparation: Preparation::WellPrepared,
            tau_prime: default_tau_prime(),
            s_prime: default_s_prime(),
        }
    }
}

fn default_eps_list() -> Vec<f64> {
    vec![0.1]
}

fn default_scheme() -> SchemeConfig {
    SchemeConfig::new(Scheme::LawsonRk2, 0.01, 1.0)
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    1
}

fn default_delta0() -> f64 {
    1e-2
}

/// A complete experiment description, stored as TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub initial: Recipe,
    #[serde(default)]
    pub functionals: FunctionalParams,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default)]
    pub relax: RelaxParams,
    /// Drop the nonlinear terms.
    #[serde(default)]
    pub linear: bool,
    /// Write final-state snapshots next to the CSV.
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            eps_list: default_eps_list(),
            scheme: default_scheme(),
            initial: Recipe::default(),
            functionals: FunctionalParams::default(),
            output_dir: default_out(),
            stride: default_stride(),
            delta0: default_delta0(),
            relax: RelaxParams::default(),
            linear: false,
            snapshots: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.functionals.validate()?;
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        for &e in &self.eps_list {
            crate::dynamics::check_eps(e)?;
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::Config("delta0 must be positive".into()));
        }
        Ok(())
    }
}

/// Initial buoyancy (or density) and vorticity.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialFields {
    pub b: SpectralField,
    pub omega: SpectralField,
}

fn zero_mean(mut f: SpectralField) -> SpectralField {
    f.coeffs_mut()[[0, 0]] = C64::new(0.0, 0.0);
    f
}

/// Random field with coefficients uniform in the unit disc on the shell
/// `k_min ≤ |ξ| ≤ k_max`, restricted to the dealiased band.
pub fn random_band_field(grid: &Arc<Grid>, rng: &mut impl Rng, shell: [f64; 2]) -> SpectralField {
    let mut modes = Vec::new();
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let (p, q) = (mode_number(i, grid.nx()), mode_number(j, grid.ny()));
            // upper half plane only; from_modes adds the conjugates
            if !(p > 0 || (p == 0 && q > 0)) || !grid.is_resolved(i, j) {
                continue;
            }
            let k = grid.kmag()[[i, j]];
            if k < shell[0] || k > shell[1] {
                continue;
            }
            let (r, th): (f64, f64) = (rng.gen(), rng.gen());
            modes.push((p, q, C64::from_polar(r.sqrt(), 2.0 * PI * th)));
        }
    }
    SpectralField::from_modes(grid, &modes)
}

fn gaussian(grid: &Arc<Grid>, amplitude: f64, widths: [f64; 2], center: [f64; 2]) -> Result<SpectralField> {
    if !(widths[0] > 0.0 && widths[1] > 0.0) {
        return Err(Error::InvalidParameter("bump widths must be positive".into()));
    }
    let (lx, ly) = (grid.lx(), grid.ly());
    let a = grid.sample(|x, y| {
        let mut v = 0.0;
        for m in -2..=2 {
            for n in -2..=2 {
                let dx = (x - center[0] + m as f64 * lx) / widths[0];
                let dy = (y - center[1] + n as f64 * ly) / widths[1];
                v += (-(dx * dx) - dy * dy).exp();
            }
        }
        amplitude * v
    });
    SpectralField::from_physical(&a, grid)
}

fn rescale(f: InitialFields, target: f64, params: &FunctionalParams) -> Result<InitialFields> {
    let n = data_norm(&f.b, &f.omega, params);
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target norm {target} unreachable: the generated data vanish"
        )));
    }
    let k = target / n;
    Ok(InitialFields {
        b: f.b.scale(k),
        omega: f.omega.scale(k),
    })
}

/// Builds zero-mean, dealiased initial data from a recipe; norms refer to
/// `‖(b₀, Ω₀)‖_{Ḣ^{1−τ}∩Ḣ^s}`.
pub fn make_initial_data(recipe: &Recipe, grid: &Arc<Grid>, params: &FunctionalParams) -> Result<InitialFields> {
    let omega_from = |b: &SpectralField, init: OmegaInit| -> Result<SpectralField> {
        match init {
            OmegaInit::Zero => Ok(SpectralField::zeros(grid)),
            OmegaInit::Riesz => Ok(b.riesz1()),
            OmegaInit::Independent => Err(Error::Config(
                "omega = \"independent\" is only available for random_band".into(),
            )),
        }
    };
    match recipe {
        Recipe::GaussianBump {
            amplitude,
            widths,
            center,
            omega,
            target_norm,
        } => {
            let b = zero_mean(gaussian(grid, *amplitude, *widths, *center)?.dealias());
            let w = omega_from(&b, *omega)?;
            let f = InitialFields { b, omega: w };
            match target_norm {
                Some(t) if *amplitude != 0.0 => rescale(f, *t, params),
                _ => Ok(f),
            }
        }
        Recipe::RandomBand {
            seed,
            shell,
            target_norm,
            omega,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let b = zero_mean(random_band_field(grid, &mut rng, *shell));
            let w = match omega {
                OmegaInit::Independent => zero_mean(random_band_field(grid, &mut rng, *shell)),
                other => omega_from(&b, *other)?,
            };
            rescale(InitialFields { b, omega: w }, *target_norm, params)
        }
        Recipe::File { b, omega } => {
            let load = |p: &Path| -> Result<SpectralField> {
                let f = read_snapshot(p)?;
                let g = f.grid();
                if **g != **grid {
                    return Err(Error::GridMismatch);
                }
                Ok(zero_mean(SpectralField::from_coeffs(grid, f.coeffs().clone())?.dealias()))
            };
            let b = load(b)?;
            let w = match omega {
                Some(p) => load(p)?,
                None => SpectralField::zeros(grid),
            };
            Ok(InitialFields { b, omega: w })
        }
    }
}

/// Which system a single run integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Boussinesq,
    Ipm,
}

/// Summary of a single run, also written as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: RunKind,
    pub eps: Option<f64>,
    pub steps: usize,
    pub samples: usize,
    pub t_end: f64,
    /// `‖(b₀, Ω₀)‖_{Ḣ^{1−τ}∩Ḣ^s}`.
    pub data_norm: f64,
    pub small_data: bool,
    pub m0: Option<f64>,
    pub x_final: Option<f64>,
    pub y_final: Option<f64>,
    /// `X(T) ≤ 10 M(0)`.
    pub validated_regime: Option<bool>,
    pub u2_l1: Option<f64>,
    pub max_mean_drift: f64,
    pub csv: PathBuf,
}

/// One row of the IPM diagnostics CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpmRow {
    pub t: f64,
    pub rho_l2: f64,
    pub rho_low: f64,
    pub rho_high: f64,
    pub sup_rho: f64,
    pub mean: f64,
}

/// Runs one Boussinesq (first ε of the list) or IPM integration and writes
/// `diagnostics.csv`, `summary.json` and optional snapshots to the output
/// directory.
pub fn run_single(cfg: &ExperimentConfig, kind: RunKind) -> Result<RunSummary> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let data = make_initial_data(&cfg.initial, &grid, &cfg.functionals)?;
    let dnorm = data_norm(&data.b, &data.omega, &cfg.functionals);
    fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("diagnostics.csv");
    let p = cfg.functionals;

    let summary = match kind {
        RunKind::Boussinesq => {
            let eps = cfg.eps_list[0];
            let s0 = BoussinesqState::new(data.b, data.omega, eps)?;
            let mean0 = s0.b.mean();
            let mut st = Stepper::new(&grid, Model::Boussinesq { eps }, cfg.scheme)?;
            if cfg.linear {
                st = st.linear_only();
            }
            let mut acc = FunctionalAccumulator::new(&grid, eps, p);
            let mut rows: Vec<DiagnosticsRow> = Vec::new();
            let mut drift = 0.0f64;
            let mut obs = |s: &BoussinesqState| {
                drift = drift.max((s.b.mean() - mean0).abs());
                rows.push(acc.feed(s)?);
                Ok(())
            };
            let (end, traj) = st.integrate(&s0, cfg.stride, &mut [&mut obs])?;
            write_csv(fs::File::create(&csv_path)?, &rows)?;
            if cfg.snapshots {
                write_snapshot(&cfg.output_dir.join("b_final.bin"), &end.b)?;
                write_snapshot(&cfg.output_dir.join("omega_final.bin"), &end.omega)?;
            }
            let m0 = rows[0].m;
            let x = acc.eval_x()?;
            RunSummary {
                kind,
                eps: Some(eps),
                steps: traj.steps,
                samples: traj.times.len(),
                t_end: end.t,
                data_norm: dnorm,
                small_data: dnorm <= cfg.delta0,
                m0: Some(m0),
                x_final: Some(x),
                y_final: Some(acc.eval_y()?),
                validated_regime: Some(x <= 10.0 * m0),
                u2_l1: Some(acc.u2_l1()?),
                max_mean_drift: drift,
                csv: csv_path.clone(),
            }
        }
        RunKind::Ipm => {
            let s0 = IpmState::new(data.b);
            let mean0 = s0.rho.mean();
            let mut st = Stepper::new(&grid, Model::Ipm, cfg.scheme)?;
            if cfg.linear {
                st = st.linear_only();
            }
            let mut rows = Vec::new();
            let mut drift = 0.0f64;
            let mut obs = |s: &IpmState| {
                let mean = s.rho.mean();
                drift = drift.max((mean - mean0).abs());
                rows.push(IpmRow {
                    t: s.t,
                    rho_l2: s.rho.sobolev_norm_unchecked(0.0),
                    rho_low: s.rho.sobolev_norm_unchecked(p.low()),
                    rho_high: s.rho.sobolev_norm_unchecked(p.s),
                    sup_rho: sup_norm(&s.rho.to_physical()),
                    mean,
                });
                Ok(())
            };
            let (end, traj) = st.integrate(&s0, cfg.stride, &mut [&mut obs])?;
            let mut w = csv::Writer::from_writer(fs::File::create(&csv_path)?);
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush()?;
            if cfg.snapshots {
                write_snapshot(&cfg.output_dir.join("rho_final.bin"), &end.rho)?;
            }
            RunSummary {
                kind,
                eps: None,
                steps: traj.steps,
                samples: traj.times.len(),
                t_end: end.t,
                data_norm: dnorm,
                small_data: dnorm <= cfg.delta0,
                m0: None,
                x_final: None,
                y_final: None,
                validated_regime: None,
                u2_l1: None,
                max_mean_drift: drift,
                csv: csv_path.clone(),
            }
        }
    };
    fs::write(
        cfg.output_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Orders between consecutive entries, `log(y_i/y_{i+1}) / log(x_i/x_{i+1})`.
pub fn pairwise_orders(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(a, b)| (b[0] / b[1]).ln() / (a[0] / a[1]).ln())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxOrders {
    pub err_low: f64,
    pub err_high: f64,
    pub darcy_l1t: f64,
}

/// Outcome of a relaxation sweep; per-ε vectors follow `eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxReport {
    pub eps: Vec<f64>,
    /// `‖b̃ᵉ(T) − ρ(T)‖_{Ḣ^{1−τ'}}`.
    pub err_low: Vec<f64>,
    /// `‖b̃ᵉ(T) − ρ(T)‖_{Ḣ^{s−s'}}`.
    pub err_high: Vec<f64>,
    /// `∫₀ᵀ ‖Ω̃ − R₁b̃‖_{B^{3/2,1/2}∩B^{1/2,1/2}} dτ`.
    pub darcy_l1t: Vec<f64>,
    /// Same residual in `Ḣ¹ ∩ Ḣ²`.
    pub darcy_sobolev_l1t: Vec<f64>,
    /// Least-squares log-log slopes over all ε.
    pub order: RelaxOrders,
    pub pairwise_order: Vec<RelaxOrders>,
    pub preparation: Preparation,
    pub t_end: f64,
    /// `‖(b₀, Ω_in)‖_{Ḣ^{1−τ}∩Ḣ^s}` with `Ω_in = R₁b₀`.
    pub m0: f64,
}

impl RelaxReport {
    /// Nonincreasing relaxation error and Darcy residual as ε decreases.
    pub fn monotone(&self) -> bool {
        let dec = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
        dec(&self.err_low) && dec(&self.darcy_l1t)
    }
}

const LAYER_FRACTION: f64 = 0.05;
const LAYER_GROWTH: f64 = 1.25;

struct ScaledRun {
    b: SpectralField,
    darcy: f64,
    darcy_sobolev: f64,
}

fn scaled_run(
    grid: &Arc<Grid>,
    b0: &SpectralField,
    eps: f64,
    prep: Preparation,
    scheme: SchemeConfig,
    d: &DyadicDecomposition,
) -> Result<ScaledRun> {
    let w0 = match prep {
        Preparation::WellPrepared => b0.riesz1(),
        Preparation::Unscaled => b0.riesz1().scale(1.0 / eps),
    };
    let s0 = BoussinesqState::new(b0.clone(), w0, eps)?;
    let mut st = Stepper::new(grid, Model::ScaledBoussinesq { eps }, scheme)?;
    let mut besov = RunningIntegral::default();
    let mut sob = RunningIntegral::default();
    let mut record = |s: &BoussinesqState| {
        let r = darcy_residual(s, d);
        besov.push(s.t, r.besov);
        sob.push(s.t, r.sobolev);
    };
    // Steps grow geometrically from a fraction of the relaxation time ε² so
    // that the residual quadrature resolves a possible initial layer.
    let mut s = s0;
    record(&s);
    let mut ramp = LAYER_FRACTION * eps * eps;
    let tol = 1e-12 * scheme.t_end.max(1.0);
    while scheme.t_end - s.t > tol {
        let h = st.step_size(&s).min(ramp).min(scheme.t_end - s.t);
        s = st.step_by(&s, h)?;
        record(&s);
        ramp *= LAYER_GROWTH;
    }
    Ok(ScaledRun {
        b: s.b,
        darcy: besov.l1(),
        darcy_sobolev: sob.l1(),
    })
}

/// Co-runs the scaled Boussinesq system for every ε and the IPM reference
/// from the same `b₀`, all with the same scheme and `t_end`.
pub fn relax_sweep(cfg: &ExperimentConfig) -> Result<RelaxReport> {
    cfg.validate()?;
    if cfg.eps_list.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a relaxation sweep needs at least 3 eps values, got {}",
            cfg.eps_list.len()
        )));
    }
    let grid = cfg.grid.build()?;
    let b0 = make_initial_data(&cfg.initial, &grid, &cfg.functionals)?.b;
    let d = DyadicDecomposition::new(&grid);
    let prep = cfg.relax.preparation;

    let (rho, runs) = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .eps_list
            .iter()
            .map(|&eps| {
                let (grid, b0, d) = (&grid, &b0, &d);
                scope.spawn(move || scaled_run(grid, b0, eps, prep, cfg.scheme, d))
            })
            .collect();
        let rho = Stepper::new(&grid, Model::Ipm, cfg.scheme)
            .and_then(|mut st| st.integrate(&IpmState::new(b0.clone()), 1, &mut []))
            .map(|(s, _)| s.rho);
        let runs: Vec<Result<ScaledRun>> = handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect();
        (rho, runs)
    });
    let rho = rho?;
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let low = 1.0 - cfg.relax.tau_prime;
    let high = cfg.functionals.s - cfg.relax.s_prime;
    let mut err_low = Vec::new();
    let mut err_high = Vec::new();
    for r in &runs {
        let e = &r.b - &rho;
        err_low.push(e.sobolev_norm_unchecked(low));
        err_high.push(e.sobolev_norm_unchecked(high));
    }
    let darcy: Vec<f64> = runs.iter().map(|r| r.darcy).collect();
    let eps = cfg.eps_list.clone();
    let pl = pairwise_orders(&eps, &err_low);
    let ph = pairwise_orders(&eps, &err_high);
    let pd = pairwise_orders(&eps, &darcy);
    let pairwise_order = (0..pl.len())
        .map(|i| RelaxOrders {
            err_low: pl[i],
            err_high: ph[i],
            darcy_l1t: pd[i],
        })
        .collect();
    Ok(RelaxReport {
        order: RelaxOrders {
            err_low: fitted_order(&eps, &err_low),
            err_high: fitted_order(&eps, &err_high),
            darcy_l1t: fitted_order(&eps, &darcy),
        },
        pairwise_order,
        darcy_sobolev_l1t: runs.iter().map(|r| r.darcy_sobolev).collect(),
        eps,
        err_low,
        err_high,
        darcy_l1t: darcy,
        preparation: prep,
        t_end: cfg.scheme.t_end,
        m0: data_norm(&b0, &b0.riesz1(), &cfg.functionals),
    })
}

/// Settings of the inequality-verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub grid: usize,
    /// Family sizes: fields are band-limited to `|ξ₁|, |ξ₂| ≤ 2^k`.
    pub family: Vec<i32>,
    pub seeds: u64,
    /// Added to every field seed.
    #[serde(default)]
    pub seed_offset: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            grid: 128,
            family: vec![2, 3, 4, 5],
            seeds: 3,
            seed_offset: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case: String,
    /// Largest ratio per family size.
    pub max_ratio: Vec<f64>,
    /// Largest ratio quotient between consecutive family sizes.
    pub growth: f64,
    pub bound: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: Vec<i32>,
    /// Largest deviation from 1 of `Σ φ`, for the isotropic, horizontal and
    /// vertical partitions.
    pub partition_defect: [f64; 3],
    pub cases: Vec<CaseSummary>,
    pub reports: Vec<VerifierReport>,
    pub passed: bool,
}

pub const GROWTH_LIMIT: f64 = 10.0;
pub const PARTITION_TOL: f64 = 1e-12;
pub const INTERPOLATION_TOL: f64 = 1e-10;

/// Keeps the modes with `inside(ξ₁, ξ₂)`.
fn restrict(f: &SpectralField, inside: impl Fn(f64, f64) -> bool) -> SpectralField {
    let g = f.grid().clone();
    f.map_modes(|i, j, c| if inside(g.kx()[i], g.ky()[j]) { c } else { C64::new(0.0, 0.0) })
}

/// Runs every verifier of the anisotropic toolbox over seeded random fields
/// of growing bandwidth.
pub fn verify_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let grid = make_grid(cfg.grid, cfg.grid, two_pi(), two_pi())?;
    let d = DyadicDecomposition::new(&grid);
    let mut reports = Vec::new();
    // case name -> per-family max ratio
    let mut table: Vec<(String, Option<f64>, Vec<f64>)> = Vec::new();
    let mut note = |r: VerifierReport, fam: usize, table: &mut Vec<(String, Option<f64>, Vec<f64>)>| {
        let pos = match table.iter().position(|(c, _, _)| *c == r.case) {
            Some(p) => p,
            None => {
                table.push((r.case.clone(), r.bound, vec![0.0; cfg.family.len()]));
                table.len() - 1
            }
        };
        let slot = &mut table[pos].2[fam];
        *slot = slot.max(r.ratio);
        reports.push(r);
    };
    for (fi, &k) in cfg.family.iter().enumerate() {
        let kmax = (k as f64).exp2();
        for seed in cfg.seed_offset..cfg.seed_offset + cfg.seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + k as u64);
            let raw = random_band_field(&grid, &mut rng, [0.5, 2.0 * kmax]);
            let f = restrict(&raw, |k1, k2| k1 != 0.0 && k1.abs() <= kmax && k2.abs() <= kmax);
            let id = format!("k{k}_seed{seed}");

            for case in [
                BernsteinCase::BallX { q: k, s: 1.0 },
                BernsteinCase::BallY { k, s: 1.0 },
            ] {
                note(verify_bernstein(&f, case)?.with_id(&id), fi, &mut table);
            }
            let ax = restrict(&f, |k1, _| k1.abs() >= 0.5 * kmax && k1.abs() <= 2.0 * kmax);
            note(verify_bernstein(&ax, BernsteinCase::AnnulusX { q: k, s: 1.0 })?.with_id(&id), fi, &mut table);
            let ay = restrict(&f, |_, k2| k2.abs() >= 0.5 * kmax && k2.abs() <= 2.0 * kmax);
            note(verify_bernstein(&ay, BernsteinCase::AnnulusY { k, s: 1.0 })?.with_id(&id), fi, &mut table);

            for (s1, s2) in [(0.5, 0.5), (1.5, 0.5)] {
                for r in verify_embedding_sobolev(&f, s1, s2, 0.75, 3.25, &d)? {
                    let case = format!("{}_{s1}_{s2}", r.case);
                    note(VerifierReport { case, ..r }.with_id(&id), fi, &mut table);
                }
            }
            for which in LipCase::ALL {
                note(verify_lip_embedding(&f, which, &d)?.with_id(&id), fi, &mut table);
            }
            note(verify_besov_inclusion(&f, 0.5, 1.5, 1.0, &d)?.with_id(&id), fi, &mut table);
            note(verify_interpolation(&f, 0.75, 3.25, 0.5)?.with_id(&id), fi, &mut table);
        }
    }
    let partition_defect = d.partition_defect();
    let mut passed = partition_defect.iter().all(|&v| v < PARTITION_TOL);
    let cases = table
        .into_iter()
        .map(|(case, bound, max_ratio)| {
            let growth = max_ratio
                .windows(2)
                .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 1.0 })
                .fold(0.0, f64::max);
            let within = match (case.as_str(), bound) {
                ("interpolation", _) => max_ratio.iter().all(|&r| r <= 1.0 + INTERPOLATION_TOL),
                (_, Some(b)) => max_ratio.iter().all(|&r| r <= b * (1.0 + 1e-12)),
                _ => true,
            };
            let ok = growth < GROWTH_LIMIT && within && max_ratio.iter().all(|r| r.is_finite());
            passed &= ok;
            CaseSummary {
                case,
                max_ratio,
                growth,
                bound,
                passed: ok,
            }
        })
        .collect();
    Ok(VerifyReport {
        family: cfg.family.clone(),
        partition_defect,
        cases,
        reports,
        passed,
    })
}

/// Test hooks for [`selftest`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Replace the `R₁` symbol by a slightly wrong one.
    pub corrupt_multiplier: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SelftestCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Zero-pads a field to a grid with twice the resolution; coefficients are
/// resolution independent under the `1/(nx·ny)` forward normalization.
fn pad2(f: &SpectralField, big: &Arc<Grid>) -> SpectralField {
    let g = f.grid();
    let mut out = SpectralField::zeros(big);
    for ((i, j), c) in f.coeffs().indexed_iter() {
        if g.is_nyquist(i, j) {
            continue;
        }
        let p = mode_number(i, g.nx()).rem_euclid(big.nx() as i64) as usize;
        let q = mode_number(j, g.ny()).rem_euclid(big.ny() as i64) as usize;
        out.coeffs_mut()[[p, q]] = *c;
    }
    out
}

fn truncate2(f: &SpectralField, small: &Arc<Grid>) -> SpectralField {
    let g = f.grid();
    let mut out = SpectralField::zeros(small);
    for i in 0..small.nx() {
        for j in 0..small.ny() {
            let p = mode_number(i, small.nx()).rem_euclid(g.nx() as i64) as usize;
            let q = mode_number(j, small.ny()).rem_euclid(g.ny() as i64) as usize;
            out.coeffs_mut()[[i, j]] = f.coeffs()[[p, q]];
        }
    }
    out.dealias()
}

/// Runs the cheap examples of every module plus propagator and
/// oracle spot checks.
pub fn selftest(opts: SelftestOptions) -> SelftestReport {
    let mut checks = Vec::new();
    let mut check = |name: &str, r: Result<(bool, String)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        checks.push(SelftestCheck {
            name: name.into(),
            passed,
            detail,
        });
    };
    let grid = match make_grid(128, 128, two_pi(), two_pi()) {
        Ok(g) => g,
        Err(e) => {
            check("grid", Err(e));
            return SelftestReport { checks };
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = zero_mean(random_band_field(&grid, &mut rng, [1.0, 40.0]));

    let r1 = if opts.corrupt_multiplier {
        MultiplierSymbol::new(|k1, k2| C64::new(0.0, 1.01 * k1 / k1.hypot(k2)))
    } else {
        MultiplierSymbol::riesz1()
    };
    check("riesz_identity", (|| {
        let sum = &f.apply_multiplier(&r1).apply_multiplier(&r1)
            + &f.riesz2().riesz2();
        let defect = (&sum + &f).max_coeff() / f.max_coeff();
        Ok((defect < 1e-12, format!("max |(R1^2 + R2^2 + I) f| = {defect:.2e}")))
    })());
    check("lambda_composition", (|| {
        let a = f.lambda_pow(0.7).lambda_pow(1.8);
        let b = f.lambda_pow(2.5);
        let e = a.max_diff(&b) / b.max_coeff();
        Ok((e < 1e-12, format!("relative defect {e:.2e}")))
    })());
    check("parseval", (|| {
        let phys = crate::spectral::physical_l2(&f.to_physical(), &grid);
        let spectral = f.sobolev_norm(0.0)?;
        let e = (phys - spectral).abs() / spectral;
        Ok((e < 1e-10, format!("relative defect {e:.2e}")))
    })());
    check("cos_x_normalization", (|| {
        let c = SpectralField::from_physical(&grid.sample(|x, _| x.cos()), &grid)?;
        let e = (c.mode(1, 0) - C64::new(0.5, 0.0)).norm();
        Ok((e < 1e-14, format!("coefficient at (1, 0) off by {e:.2e}")))
    })());
    check("propagator_exactness", (|| {
        // compare with many small RK4 steps of the mode ODE
        let mut worst = 0.0f64;
        for eps in [0.5, 0.05] {
            let dt = 0.3;
            let p = mode_propagator(&grid, eps, dt)?;
            for (pp, qq) in [(1, 1), (3, -1), (0, 2)] {
                let m = p.mode_matrix(pp, qq);
                let (k1, k2) = (pp as f64, qq as f64);
                let sig = C64::new(0.0, k1 / k1.hypot(k2));
                let rhs = |u: [C64; 2]| [sig * u[1], sig * u[0] - u[1] / eps];
                for col in 0..2 {
                    let mut u = [C64::new(0.0, 0.0); 2];
                    u[col] = C64::new(1.0, 0.0);
                    let n = 4000;
                    let h = dt / n as f64;
                    for _ in 0..n {
                        let a = rhs(u);
                        let b = rhs([u[0] + a[0] * (h / 2.0), u[1] + a[1] * (h / 2.0)]);
                        let c = rhs([u[0] + b[0] * (h / 2.0), u[1] + b[1] * (h / 2.0)]);
                        let d = rhs([u[0] + c[0] * h, u[1] + c[1] * h]);
                        for r in 0..2 {
                            u[r] += (a[r] + b[r] * 2.0 + c[r] * 2.0 + d[r]) * (h / 6.0);
                        }
                    }
                    worst = worst.max((m[col] - u[0]).norm()).max((m[2 + col] - u[1]).norm());
                }
            }
        }
        Ok((worst < 1e-10, format!("max entry deviation {worst:.2e}")))
    })());
    check("ipm_semigroup", (|| {
        let cx = single_mode(&grid, 1, 0);
        let cy = single_mode(&grid, 0, 1);
        let cfg = SchemeConfig::new(Scheme::LawsonRk4, 0.1, 1.0);
        let mut st = Stepper::new(&grid, Model::Ipm, cfg)?.linear_only();
        let a = st.integrate(&IpmState::new(cx.clone()), 1, &mut [])?.0.rho;
        let b = st.integrate(&IpmState::new(cy.clone()), 1, &mut [])?.0.rho;
        let e = a.max_diff(&cx.scale((-1.0f64).exp())) + b.max_diff(&cy);
        Ok((e < 1e-12, format!("deviation {e:.2e}")))
    })());
    check("rhs_single_modes", (|| {
        let cx = single_mode(&grid, 1, 0);
        let cy = single_mode(&grid, 0, 1);
        let e1 = (&ipm_rhs(&IpmState::new(cx.clone())) + &cx).max_coeff();
        let e2 = ipm_rhs(&IpmState::new(cy.clone())).max_coeff();
        let s = BoussinesqState::new(SpectralField::zeros(&grid), cx.clone(), 0.5)?;
        let (db, dw) = boussinesq_rhs(&s);
        let e3 = db.max_diff(&cx.riesz1()) + (&dw + &cx.scale(2.0)).max_coeff();
        let e = e1 + e2 + e3;
        Ok((e < 1e-14, format!("deviation {e:.2e}")))
    })());
    check("oracle_padded_products", (|| {
        // evaluate the nonlinear terms with exact 2x zero padding
        let small = make_grid(32, 32, two_pi(), two_pi())?;
        let big = make_grid(64, 64, two_pi(), two_pi())?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = zero_mean(random_band_field(&small, &mut rng, [1.0, 10.0]));
        let w = zero_mean(random_band_field(&small, &mut rng, [1.0, 10.0]));
        let s = BoussinesqState::new(b.clone(), w.clone(), 0.2)?;
        let sb = BoussinesqState::new(pad2(&b, &big), pad2(&w, &big), 0.2)?;
        let (db, dw) = scaled_boussinesq_rhs(&s);
        let (ob, ow) = scaled_boussinesq_rhs(&sb);
        let e = db.max_diff(&truncate2(&ob, &small)) / db.max_coeff()
            + dw.max_diff(&truncate2(&ow, &small)) / dw.max_coeff();
        let ri = ipm_rhs(&IpmState::new(b.clone()));
        let ro = truncate2(&ipm_rhs(&IpmState::new(pad2(&b, &big))), &small);
        let e = e + ri.max_diff(&ro) / ri.max_coeff();
        Ok((e < 1e-9, format!("relative deviation {e:.2e}")))
    })());
    check("partition_of_unity", (|| {
        let d = DyadicDecomposition::new(&grid);
        let p = d.partition_defect();
        let m = p.iter().cloned().fold(0.0, f64::max);
        Ok((m < PARTITION_TOL, format!("max deviation {m:.2e}")))
    })());
    check("interpolation", (|| {
        let r = verify_interpolation(&f, 0.75, 3.25, 0.3)?;
        Ok((r.ratio <= 1.0 + INTERPOLATION_TOL, format!("ratio {:.12}", r.ratio)))
    })());
    check("initial_data", (|| {
        let p = FunctionalParams::default();
        let recipe = Recipe::RandomBand {
            seed: 3,
            shell: [1.0, 6.0],
            target_norm: 1e-2,
            omega: OmegaInit::Independent,
        };
        let a = make_initial_data(&recipe, &grid, &p)?;
        let b = make_initial_data(&recipe, &grid, &p)?;
        let n = data_norm(&a.b, &a.omega, &p);
        let zero = make_initial_data(
            &Recipe::GaussianBump {
                amplitude: 0.0,
                widths: [0.5, 0.5],
                center: [1.0, 1.0],
                omega: OmegaInit::Riesz,
                target_norm: Some(1.0),
            },
            &grid,
            &p,
        )?;
        let ok = a == b
            && ((n - 1e-2) / 1e-2).abs() < 1e-12
            && a.b.is_zero_mean()
            && zero.b.max_coeff() == 0.0;
        Ok((ok, format!("achieved norm {n:.15e}")))
    })());
    check("zero_length_run", (|| {
        let s0 = BoussinesqState::new(f.clone(), SpectralField::zeros(&grid), 0.1)?;
        let cfg = SchemeConfig::new(Scheme::LawsonRk2, 0.1, 0.0);
        let (_, traj) = Stepper::new(&grid, Model::Boussinesq { eps: 0.1 }, cfg)?.integrate(&s0, 1, &mut [])?;
        Ok((traj.times == [0.0], format!("{} samples", traj.times.len())))
    })());
    check("config_round_trip", (|| {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&c.to_toml()?)?;
        Ok((back == c, String::new()))
    })());
    SelftestReport { checks }
}
