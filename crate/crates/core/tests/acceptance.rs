//! Acceptance suite. Prints one line per sub-check and one verdict line per
//! criterion, and exits nonzero if any criterion fails.
//!
//! Run a subset with `cargo test -p ipm-core --test acceptance -- 2 5`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ipm_core::diagnostics::{
    data_norm, stability_run, FunctionalAccumulator, FunctionalParams,
};
use ipm_core::dynamics::{
    boussinesq_rhs, ipm_rhs, ipm_semigroup, mode_propagator, scaled_boussinesq_rhs,
    BoussinesqState, IpmState, LinearCoupling,
};
use ipm_core::harness::{
    make_initial_data, random_band_field, relax_sweep, run_single, verify_suite, ExperimentConfig,
    GridSpec, OmegaInit, Preparation, Recipe, RunKind, VerifyConfig,
};
use ipm_core::spectral::physical_l2;
use ipm_core::timestepper::{Model, Scheme, SchemeConfig, Stepper};
use ipm_core::{make_grid, Grid, MultiplierSymbol, SpectralField, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const RIESZ_TOL: f64 = 1e-12;
const COMPOSITION_TOL: f64 = 1e-12;
const PARSEVAL_TOL: f64 = 1e-10;
const SPECTRAL_BUDGET: Duration = Duration::from_secs(5);
// criterion 2
const PROPAGATOR_TOL: f64 = 1e-10;
const SEMIGROUP_TOL: f64 = 1e-12;
/// Oracle RK4 step bound `|λ| h`.
const ORACLE_LAMBDA_H: f64 = 2e-3;
// criterion 3
const ORACLE_REL_TOL: f64 = 1e-9;
const ORACLE_STATES: u64 = 10;
// criterion 4
const RELAX_ERR_MIN_ORDER: f64 = 0.9;
const DARCY_ORDER_RANGE: (f64, f64) = (0.9, 1.3);
const RELAX_BUDGET: Duration = Duration::from_secs(600);
// criterion 5
const X_DOUBLING_MAX: f64 = 1.05;
const U2_GROWTH_MAX: f64 = 0.05;
// criterion 6
const PARTITION_TOL: f64 = 1e-12;
const INTERPOLATION_TOL: f64 = 1e-10;
const GROWTH_MAX: f64 = 10.0;
const VERIFY_BUDGET: Duration = Duration::from_secs(120);
// criterion 7
const UNIQUENESS_TOL: f64 = 1e-10;
const HALVING_TOL: f64 = 0.2;
// criterion 8
const MEAN_DRIFT_TOL: f64 = 1e-10;

struct Criterion {
    id: u32,
    name: &'static str,
    ok: bool,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self { id, name, ok: true }
    }

    fn check(&mut self, what: &str, ok: bool, detail: String) {
        self.ok &= ok;
        line(&format!(
            "  [{}] {what}: {detail} ... {}",
            self.id,
            if ok { "ok" } else { "FAILED" }
        ));
    }

    fn info(&self, what: &str, detail: String) {
        line(&format!("  [{}] (info) {what}: {detail}", self.id));
    }

    fn finish(self) -> bool {
        line(&format!(
            "criterion {} {}: {}",
            self.id,
            self.name,
            if self.ok { "PASS" } else { "FAIL" }
        ));
        self.ok
    }
}

fn line(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}");
    let _ = out.flush();
}

fn square(n: usize) -> Arc<Grid> {
    make_grid(n, n, 2.0 * PI, 2.0 * PI).unwrap()
}

fn zero_mean(mut f: SpectralField) -> SpectralField {
    f.coeffs_mut()[[0, 0]] = C64::new(0.0, 0.0);
    f
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.max_diff(b) / b.max_coeff().max(a.max_coeff())
}

fn criterion_1() -> bool {
    let mut c = Criterion::new(1, "spectral exactness");
    let start = Instant::now();
    let g = square(128);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut riesz = 0.0f64;
    let mut comp = 0.0f64;
    let mut pars = 0.0f64;
    for _ in 0..5 {
        let f = zero_mean(random_band_field(&g, &mut rng, [1.0, 42.0]));
        let sum = &f.riesz1().riesz1() + &f.riesz2().riesz2();
        riesz = riesz.max((&sum + &f).max_coeff() / f.max_coeff());

        let r12 = MultiplierSymbol::riesz1().compose(&MultiplierSymbol::riesz2());
        comp = comp
            .max(rel(&f.apply_multiplier(&r12), &f.riesz1().riesz2()))
            .max(rel(&f.riesz1().riesz2(), &f.riesz2().riesz1()))
            .max(rel(&f.lambda_pow(0.6).lambda_pow(-1.35), &f.lambda_pow(-0.75)))
            .max(rel(
                &f.apply_multiplier(&MultiplierSymbol::lambda_pow(1.0).compose(&MultiplierSymbol::riesz1())),
                &f.ddx(),
            ));

        let phys = physical_l2(&f.to_physical(), &g);
        let spectral = f.sobolev_norm(0.0).unwrap();
        pars = pars.max((phys - spectral).abs() / spectral);
    }
    c.check("R1^2 + R2^2 = -Id (128^2, 5 fields)", riesz < RIESZ_TOL, format!("{riesz:.2e} < {RIESZ_TOL:e}"));
    c.check("multiplier composition", comp < COMPOSITION_TOL, format!("{comp:.2e} < {COMPOSITION_TOL:e}"));
    c.check("Parseval", pars < PARSEVAL_TOL, format!("{pars:.2e} < {PARSEVAL_TOL:e}"));
    let el = start.elapsed();
    c.check("runtime", el < SPECTRAL_BUDGET, format!("{el:.2?} < {SPECTRAL_BUDGET:?}"));
    c.finish()
}

/// Classical RK4 on `u' = A u` for the 2×2 mode matrix, steps with `|λ|h ≤ ORACLE_LAMBDA_H`.
fn rk4_mode(gamma: f64, kappa: f64, sigma: C64, t: f64) -> [C64; 4] {
    let lam = kappa.max(1.0);
    let n = (lam * t / ORACLE_LAMBDA_H).ceil() as usize;
    let h = t / n as f64;
    let f = |u: [C64; 2]| [sigma * u[1], sigma * gamma * u[0] - u[1] * kappa];
    let mut out = [C64::new(0.0, 0.0); 4];
    for col in 0..2 {
        let mut u = [C64::new(0.0, 0.0); 2];
        u[col] = C64::new(1.0, 0.0);
        for _ in 0..n {
            let k1 = f(u);
            let k2 = f([u[0] + k1[0] * (h / 2.0), u[1] + k1[1] * (h / 2.0)]);
            let k3 = f([u[0] + k2[0] * (h / 2.0), u[1] + k2[1] * (h / 2.0)]);
            let k4 = f([u[0] + k3[0] * h, u[1] + k3[1] * h]);
            for r in 0..2 {
                u[r] += (k1[r] + k2[r] * 2.0 + k3[r] * 2.0 + k4[r]) * (h / 6.0);
            }
        }
        out[col] = u[0];
        out[2 + col] = u[1];
    }
    out
}

fn max_entry_diff(a: &[C64; 4], b: &[C64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_2() -> bool {
    let mut c = Criterion::new(2, "linear propagator");
    let g = square(32);
    let dt = 0.4;
    for eps in [0.5, 0.05, 0.005] {
        let p = mode_propagator(&g, eps, dt).unwrap();
        let mut worst = 0.0f64;
        for (pp, qq) in [(1, 0), (1, 1), (3, -2), (0, 5), (7, 1), (1, 9), (-4, 4)] {
            let (k1, k2) = (pp as f64, qq as f64);
            let sigma = C64::new(0.0, k1 / k1.hypot(k2));
            let oracle = rk4_mode(1.0, 1.0 / eps, sigma, dt);
            worst = worst.max(max_entry_diff(&p.mode_matrix(pp, qq), &oracle));
        }
        c.check(&format!("eps = {eps}: max per-mode deviation"), worst < PROPAGATOR_TOL, format!("{worst:.2e} < {PROPAGATOR_TOL:e}"));
    }
    // ε = 1/2 and ξ₂ = 0 sit exactly on 4ε²ξ₁² = |ξ|²; also probe just inside
    // and just outside the Jordan-branch threshold.
    let coupling = LinearCoupling::boussinesq(0.5);
    let mut worst = 0.0f64;
    for a in [1.0f64, 1.0 - 5e-13, 1.0 - 2e-12, 1.0 - 1e-9] {
        let sigma = C64::new(0.0, a.sqrt());
        let oracle = rk4_mode(1.0, 2.0, sigma, dt);
        worst = worst.max(max_entry_diff(&coupling.exp_mode(sigma, a, dt), &oracle));
    }
    c.check("near-degenerate modes |1 - 4eps^2 a| <= 1e-9", worst < PROPAGATOR_TOL, format!("{worst:.2e} < {PROPAGATOR_TOL:e}"));
    let scaled = LinearCoupling::scaled(0.05);
    let mut worst = 0.0f64;
    for (k1, k2) in [(1.0f64, 0.0f64), (1.0, 3.0)] {
        let a = k1 * k1 / (k1 * k1 + k2 * k2);
        let sigma = C64::new(0.0, k1 / k1.hypot(k2));
        let oracle = rk4_mode(400.0, 400.0, sigma, 0.05);
        worst = worst.max(max_entry_diff(&scaled.exp_mode(sigma, a, 0.05), &oracle));
    }
    c.check("scaled system, eps = 0.05", worst < PROPAGATOR_TOL, format!("{worst:.2e} < {PROPAGATOR_TOL:e}"));

    let cx = SpectralField::from_physical(&g.sample(|x, _| x.cos()), &g).unwrap();
    let cy = SpectralField::from_physical(&g.sample(|_, y| y.cos()), &g).unwrap();
    let mut dev = 0.0f64;
    for t in [0.5f64, 1.0, 3.0] {
        let ex = SpectralField::from_physical(&g.sample(|x, _| (-t).exp() * x.cos()), &g).unwrap();
        dev = dev
            .max(cx.apply_multiplier(&ipm_semigroup(t)).max_diff(&ex))
            .max(cy.apply_multiplier(&ipm_semigroup(t)).max_diff(&cy));
    }
    c.check("IPM semigroup: e^-t cos x and invariant cos y", dev < SEMIGROUP_TOL, format!("{dev:.2e} < {SEMIGROUP_TOL:e}"));
    c.finish()
}

/// Independent evaluation of the right-hand sides: symbols computed from
/// wavenumbers directly, fields summed mode by mode on a doubled grid,
/// products formed pointwise and projected back by a direct DFT.
mod oracle {
    use super::*;

    pub const BAND: i64 = 10;
    pub const N: usize = 64;

    pub type Modes = Vec<(i64, i64, C64)>;

    pub fn random_modes(rng: &mut ChaCha8Rng) -> Modes {
        let mut m = Vec::new();
        for p in -BAND..=BAND {
            for q in -BAND..=BAND {
                if p > 0 || (p == 0 && q > 0) {
                    let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m.push((p, q, c / (1.0 + (p * p + q * q) as f64)));
                }
            }
        }
        m
    }

    /// Full (both half planes) coefficient list of a real field.
    pub fn full(m: &Modes) -> Modes {
        let mut out = Vec::new();
        for &(p, q, c) in m {
            out.push((p, q, c * 0.5));
            out.push((-p, -q, c.conj() * 0.5));
        }
        out
    }

    pub fn map(m: &Modes, f: impl Fn(f64, f64) -> C64) -> Modes {
        m.iter().map(|&(p, q, c)| (p, q, c * f(p as f64, q as f64))).collect()
    }

    fn kmag(k1: f64, k2: f64) -> f64 {
        (k1 * k1 + k2 * k2).sqrt()
    }

    pub fn r1(k1: f64, k2: f64) -> C64 {
        C64::new(0.0, k1 / kmag(k1, k2))
    }

    pub fn r2(k1: f64, k2: f64) -> C64 {
        C64::new(0.0, k2 / kmag(k1, k2))
    }

    pub fn lam(k1: f64, k2: f64) -> C64 {
        C64::new(kmag(k1, k2), 0.0)
    }

    pub fn inv_lam(k1: f64, k2: f64) -> C64 {
        let k = kmag(k1, k2);
        if k == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(1.0 / k, 0.0)
        }
    }

    pub fn dx(k1: f64, _: f64) -> C64 {
        C64::new(0.0, k1)
    }

    pub fn dy(_: f64, k2: f64) -> C64 {
        C64::new(0.0, k2)
    }

    fn cis_table() -> Vec<C64> {
        (0..N).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / N as f64)).collect()
    }

    pub fn synth(m: &Modes) -> Vec<f64> {
        let tab = cis_table();
        let mut out = vec![0.0; N * N];
        for ix in 0..N {
            for iy in 0..N {
                let mut s = C64::new(0.0, 0.0);
                for &(p, q, c) in m {
                    let k = ((p * ix as i64 + q * iy as i64).rem_euclid(N as i64)) as usize;
                    s += c * tab[k];
                }
                out[ix * N + iy] = s.re;
            }
        }
        out
    }

    /// Coefficients of a grid function for `|p|, |q| ≤ BAND`.
    pub fn analyse(v: &[f64]) -> Modes {
        let tab = cis_table();
        let mut out = Vec::new();
        for p in -BAND..=BAND {
            for q in -BAND..=BAND {
                let mut s = C64::new(0.0, 0.0);
                for ix in 0..N {
                    for iy in 0..N {
                        let k = ((p * ix as i64 + q * iy as i64).rem_euclid(N as i64)) as usize;
                        s += tab[k].conj() * v[ix * N + iy];
                    }
                }
                out.push((p, q, s / (N * N) as f64));
            }
        }
        out
    }

    /// `v₁ ∂ₓf + v₂ ∂_y f` projected on the band, zero mean.
    pub fn transport(v1: &Modes, v2: &Modes, f: &Modes) -> Modes {
        let a = synth(v1);
        let b = synth(&map(f, dx));
        let c = synth(v2);
        let d = synth(&map(f, dy));
        let prod: Vec<f64> = (0..N * N).map(|i| a[i] * b[i] + c[i] * d[i]).collect();
        analyse(&prod)
            .into_iter()
            .map(|(p, q, c)| (p, q, if p == 0 && q == 0 { C64::new(0.0, 0.0) } else { c }))
            .collect()
    }

    pub fn add(a: &Modes, b: &Modes, s: f64) -> Modes {
        // both in band order
        a.iter().zip(b).map(|(&(p, q, x), &(_, _, y))| (p, q, x + y * s)).collect()
    }

    /// Coefficients of a full mode list laid out in band order.
    pub fn banded(m: &Modes) -> Modes {
        let mut out = Vec::new();
        for p in -BAND..=BAND {
            for q in -BAND..=BAND {
                let c = m
                    .iter()
                    .filter(|&&(a, b, _)| a == p && b == q)
                    .map(|&(_, _, c)| c)
                    .sum();
                out.push((p, q, c));
            }
        }
        out
    }

    /// Relative deviation of a library field from band-ordered oracle coefficients.
    pub fn deviation(f: &SpectralField, m: &Modes) -> f64 {
        let scale = m.iter().map(|&(_, _, c)| c.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for &(p, q, c) in m {
            worst = worst.max((f.mode(p, q) - c).norm());
        }
        // everything outside the band must vanish
        let g = f.grid();
        for ((i, j), c) in f.coeffs().indexed_iter() {
            let p = ipm_core::spectral::mode_number(i, g.nx());
            let q = ipm_core::spectral::mode_number(j, g.ny());
            if p.abs() > BAND || q.abs() > BAND {
                worst = worst.max(c.norm());
            }
        }
        worst / scale
    }
}

fn criterion_3() -> bool {
    use oracle::*;
    let mut c = Criterion::new(3, "oracle equivalence");
    let g = square(32);
    let eps = 0.1;
    let (mut d_ipm, mut d_b, mut d_s) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..ORACLE_STATES {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let bm = random_modes(&mut rng);
        let wm = random_modes(&mut rng);
        let b = SpectralField::from_modes(&g, &bm);
        let w = SpectralField::from_modes(&g, &wm);
        let (bf, wf) = (full(&bm), full(&wm));
        let wb = banded(&wf);

        // IPM: R₁²ρ + (R₂R₁ρ, −R₁²ρ)·∇ρ
        let v1 = map(&map(&bf, r1), r2);
        let v2 = map(&map(&map(&bf, r1), r1), |_, _| C64::new(-1.0, 0.0));
        let lin = banded(&map(&map(&bf, r1), r1));
        let want = add(&lin, &transport(&v1, &v2, &bf), 1.0);
        d_ipm = d_ipm.max(deviation(&ipm_rhs(&IpmState::new(b.clone())), &want));

        // Boussinesq: v = (R₂Ω, −R₁Ω)
        let v1 = map(&wf, r2);
        let v2 = map(&map(&wf, r1), |_, _| C64::new(-1.0, 0.0));
        let nb = transport(&v1, &v2, &bf);
        let lw = map(&wf, lam);
        let nw_full: oracle::Modes = transport(&v1, &v2, &lw)
            .into_iter()
            .map(|(p, q, c)| (p, q, c * inv_lam(p as f64, q as f64)))
            .collect();
        let r1w = banded(&map(&wf, r1));
        let r1b = banded(&map(&bf, r1));
        let want_b = add(&r1w, &nb, 1.0);
        let want_w = add(&add(&r1b, &wb, -1.0 / eps), &nw_full, 1.0);
        let s = BoussinesqState::new(b.clone(), w.clone(), eps).unwrap();
        let (db, dw) = boussinesq_rhs(&s);
        d_b = d_b.max(deviation(&db, &want_b)).max(deviation(&dw, &want_w));

        let want_ws = add(&add(&r1b, &wb, -1.0).iter().map(|&(p, q, c)| (p, q, c / (eps * eps))).collect(), &nw_full, 1.0);
        let (sb, sw) = scaled_boussinesq_rhs(&s);
        d_s = d_s.max(deviation(&sb, &want_b)).max(deviation(&sw, &want_ws));
    }
    c.check("ipm_rhs vs doubled-grid oracle (10 states)", d_ipm < ORACLE_REL_TOL, format!("{d_ipm:.2e} < {ORACLE_REL_TOL:e}"));
    c.check("boussinesq_rhs vs oracle (10 states)", d_b < ORACLE_REL_TOL, format!("{d_b:.2e} < {ORACLE_REL_TOL:e}"));
    c.check("scaled_boussinesq_rhs vs oracle (10 states)", d_s < ORACLE_REL_TOL, format!("{d_s:.2e} < {ORACLE_REL_TOL:e}"));
    c.finish()
}

fn relax_config(n: usize, prep: Preparation) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        grid: GridSpec::square(n),
        eps_list: vec![0.1, 0.05, 0.025, 0.0125],
        initial: Recipe::GaussianBump {
            amplitude: 1.0,
            widths: [0.8, 0.8],
            center: [PI, PI],
            omega: OmegaInit::Zero,
            target_norm: None,
        },
        ..ExperimentConfig::default()
    };
    cfg.scheme = SchemeConfig::new(Scheme::LawsonRk4, 0.0025, 1.0);
    cfg.relax.preparation = prep;
    cfg
}

fn criterion_4() -> bool {
    let mut c = Criterion::new(4, "relaxation limit");
    let start = Instant::now();
    let r = relax_sweep(&relax_config(256, Preparation::WellPrepared)).unwrap();
    let el = start.elapsed();
    c.info("eps", format!("{:?}", r.eps));
    c.info("||b~ - rho||_{H^(1-tau')}", fmt_list(&r.err_low));
    c.info("||b~ - rho||_{H^(s-s')}", fmt_list(&r.err_high));
    c.info("int ||Omega~ - R1 b~||_{B}", fmt_list(&r.darcy_l1t));
    c.check(
        "fitted order of ||b~ - rho||_{H^(1-tau')}",
        r.order.err_low >= RELAX_ERR_MIN_ORDER,
        format!("{:.3} >= {RELAX_ERR_MIN_ORDER}", r.order.err_low),
    );
    let within = r.eps.iter().zip(&r.darcy_l1t).all(|(e, d)| *d <= e * r.m0);
    c.check(
        "Darcy residual <= eps M(0)",
        within,
        format!("max ratio residual/eps = {:.3e}, M(0) = {:.3e}", r.eps.iter().zip(&r.darcy_l1t).map(|(e, d)| d / e).fold(0.0, f64::max), r.m0),
    );
    let (lo, hi) = DARCY_ORDER_RANGE;
    c.check(
        "fitted order of the Darcy residual",
        (lo..=hi).contains(&r.order.darcy_l1t),
        format!("{:.3} in [{lo}, {hi}]", r.order.darcy_l1t),
    );
    c.check("runtime", el < RELAX_BUDGET, format!("{el:.1?} < {RELAX_BUDGET:?}"));

    // Same sweep with the original-variable data (b₀, R₁b₀) held fixed,
    // which starts off the Darcy manifold; reported, not asserted.
    let u = relax_sweep(&relax_config(128, Preparation::Unscaled)).unwrap();
    c.info(
        "unscaled data (128^2): fitted orders",
        format!(
            "error {:.3}, Darcy residual {:.3}",
            u.order.err_low, u.order.darcy_l1t
        ),
    );
    c.finish()
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn criterion_5() -> bool {
    let mut c = Criterion::new(5, "small-data global boundedness");
    let g = square(64);
    let p = FunctionalParams { s: 3.25, tau: 0.25 };
    let eps = 0.5;
    let recipe = Recipe::GaussianBump {
        amplitude: 1.0,
        widths: [0.6, 3.0],
        center: [3.0, 3.0],
        omega: OmegaInit::Zero,
        target_norm: Some(1e-2),
    };
    let d = make_initial_data(&recipe, &g, &p).unwrap();
    let m0 = data_norm(&d.b, &d.omega, &p);
    c.info("M(0) = ||(b0, Omega0)||_{H^0.75 ∩ H^3.25}", format!("{m0:.6e}"));
    let s0 = BoussinesqState::new(d.b, d.omega, eps).unwrap();
    let cfg = SchemeConfig::new(Scheme::LawsonRk2, 0.05, 20.0);
    let mut st = Stepper::new(&g, Model::Boussinesq { eps }, cfg).unwrap();
    let mut acc = FunctionalAccumulator::new(&g, eps, p);
    let mut at = Vec::new();
    let mut obs = |s: &BoussinesqState| {
        let row = acc.feed(s)?;
        if [5.0, 10.0, 20.0].iter().any(|t| (s.t - t).abs() < 1e-9) {
            at.push((s.t, row.x, acc.u2_l1()?));
        }
        Ok(())
    };
    st.integrate(&s0, 1, &mut [&mut obs]).unwrap();
    for (t, x, u) in &at {
        c.info(&format!("T = {t}"), format!("X = {x:.6e}, int sup|u2| = {u:.6e}"));
    }
    let (x10, x20) = (at[1].1, at[2].1);
    let (u10, u20) = (at[1].2, at[2].2);
    c.check("X(20)/X(10)", x20 / x10 <= X_DOUBLING_MAX, format!("{:.5} <= {X_DOUBLING_MAX}", x20 / x10));
    let growth = u20 / u10 - 1.0;
    c.check("int_0^T sup|u2| growth from T = 10 to 20", growth < U2_GROWTH_MAX, format!("{growth:.4} < {U2_GROWTH_MAX}"));
    c.info("X(20)/M(0)", format!("{:.4}", x20 / m0));
    c.finish()
}

fn criterion_6() -> bool {
    let mut c = Criterion::new(6, "inequality verifiers");
    let start = Instant::now();
    let r = verify_suite(&VerifyConfig::default()).unwrap();
    let el = start.elapsed();
    let pd = r.partition_defect.iter().cloned().fold(0.0, f64::max);
    c.check("partition of unity", pd < PARTITION_TOL, format!("{pd:.2e} < {PARTITION_TOL:e}"));
    for case in &r.cases {
        let max = case.max_ratio.iter().cloned().fold(0.0, f64::max);
        if case.case == "interpolation" {
            c.check("interpolation log-convexity", max <= 1.0 + INTERPOLATION_TOL, format!("max ratio {max:.12} <= 1 + {INTERPOLATION_TOL:e}"));
        } else {
            c.check(
                &case.case,
                case.growth < GROWTH_MAX,
                format!("ratios {} growth {:.3} < {GROWTH_MAX}", fmt_list(&case.max_ratio), case.growth),
            );
        }
    }
    c.check("runtime", el < VERIFY_BUDGET, format!("{el:.1?} < {VERIFY_BUDGET:?}"));
    c.finish()
}

fn criterion_7() -> bool {
    let mut c = Criterion::new(7, "uniqueness and stability");
    let g = square(64);
    let p = FunctionalParams::default();
    let rho0 = make_initial_data(
        &Recipe::RandomBand {
            seed: 5,
            shell: [1.0, 6.0],
            target_norm: 1e-2,
            omega: OmegaInit::Zero,
        },
        &g,
        &p,
    )
    .unwrap()
    .b;
    let n0 = rho0.sobolev_norm(0.0).unwrap();
    let cfg = SchemeConfig::new(Scheme::LawsonRk2, 0.02, 5.0);
    let same = stability_run(&rho0, &rho0, &cfg, 0.0).unwrap();
    let m = same.max_separation();
    c.check("identical data: max ||w|| / ||rho0|| on [0, 5]", m <= UNIQUENESS_TOL * n0, format!("{:.2e} <= {UNIQUENESS_TOL:e}", m / n0));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dir = zero_mean(random_band_field(&g, &mut rng, [1.0, 6.0]));
    let dir = dir.scale(n0 / dir.sobolev_norm(0.0).unwrap());
    let mut maxes = Vec::new();
    for delta in [1e-2, 5e-3, 2.5e-3] {
        let rep = stability_run(&rho0, &rho0.axpy(delta, &dir), &cfg, 0.0).unwrap();
        maxes.push(rep.max_separation());
        c.info(&format!("delta = {delta}"), format!("max ||w|| = {:.6e}, amplification {:.4}", rep.max_separation(), rep.amplification));
    }
    for w in maxes.windows(2) {
        let ratio = w[1] / w[0];
        c.check("halving delta halves max ||w||", (ratio / 0.5 - 1.0).abs() <= HALVING_TOL, format!("ratio {ratio:.4}, |ratio/0.5 - 1| <= {HALVING_TOL}"));
    }
    c.finish()
}

fn criterion_8() -> bool {
    let mut c = Criterion::new(8, "mean conservation and determinism");
    let g = square(32);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut b = random_band_field(&g, &mut rng, [1.0, 8.0]).scale(0.3);
    b.coeffs_mut()[[0, 0]] = C64::new(0.7, 0.0);
    let w = zero_mean(random_band_field(&g, &mut rng, [1.0, 8.0]).scale(0.3));
    let cfg = SchemeConfig::new(Scheme::LawsonRk4, 0.02, 4.0);
    let mut worst = 0.0f64;
    for model in [
        Model::Boussinesq { eps: 0.2 },
        Model::ScaledBoussinesq { eps: 0.05 },
    ] {
        let eps = match model {
            Model::Boussinesq { eps } | Model::ScaledBoussinesq { eps } => eps,
            Model::Ipm => unreachable!(),
        };
        let s0 = BoussinesqState::new(b.clone(), w.clone(), eps).unwrap();
        let mut drift = 0.0f64;
        let mut obs = |s: &BoussinesqState| {
            drift = drift.max((s.b.mean() - 0.7).abs());
            Ok(())
        };
        Stepper::new(&g, model, cfg).unwrap().integrate(&s0, 1, &mut [&mut obs]).unwrap();
        worst = worst.max(drift);
    }
    let mut drift = 0.0f64;
    let mut obs = |s: &IpmState| {
        drift = drift.max((s.rho.mean() - 0.7).abs());
        Ok(())
    };
    Stepper::new(&g, Model::Ipm, cfg).unwrap().integrate(&IpmState::new(b.clone()), 1, &mut [&mut obs]).unwrap();
    worst = worst.max(drift);
    c.check("mean drift of b and rho (mean 0.7)", worst < MEAN_DRIFT_TOL, format!("{worst:.2e} < {MEAN_DRIFT_TOL:e}"));

    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut drift = 0.0f64;
    for kind in [RunKind::Boussinesq, RunKind::Ipm] {
        let mut cfg = ExperimentConfig {
            grid: GridSpec::square(32),
            eps_list: vec![0.1],
            ..ExperimentConfig::default()
        };
        cfg.scheme = SchemeConfig::new(Scheme::LawsonRk2, 0.02, 1.0);
        cfg.output_dir = dir.path().join("a");
        let first = run_single(&cfg, kind).unwrap();
        let bytes_a = std::fs::read(&first.csv).unwrap();
        cfg.output_dir = dir.path().join("b");
        let second = run_single(&cfg, kind).unwrap();
        let bytes_b = std::fs::read(&second.csv).unwrap();
        same &= bytes_a == bytes_b;
        drift = drift.max(first.max_mean_drift);
    }
    c.check("run_single drift (both systems)", drift < MEAN_DRIFT_TOL, format!("{drift:.2e} < {MEAN_DRIFT_TOL:e}"));
    c.check("repeated runs give identical CSV bytes", same, String::new());
    let r1 = relax_sweep(&relax_config(32, Preparation::WellPrepared)).unwrap();
    let r2 = relax_sweep(&relax_config(32, Preparation::WellPrepared)).unwrap();
    c.check("repeated relaxation sweeps identical", r1 == r2, String::new());
    c.finish()
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let all: [(u32, fn() -> bool); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = Vec::new();
    for (id, run) in all {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        if !run() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        line("acceptance: all selected criteria PASS");
    } else {
        line(&format!("acceptance: FAILED criteria {failed:?}"));
        std::process::exit(1);
    }
}
