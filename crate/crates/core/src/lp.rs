//! Dyadic Littlewood–Paley blocks in `|ξ|`, `ξ₁` and `ξ₂`, the homogeneous
//! `B^{s₁,s₂}_{2,1}` / `B^s_{2,1}` norms built on them, and numerical checks
//! of the embedding and Bernstein inequalities these norms satisfy.
//!
//! The block generator is `φ(t) = χ(t/2) − χ(t)` with `χ = 1` on `|t| ≤ 1/2`
//! and `χ = 0` on `|t| ≥ 1`. Since the sum over `j` telescopes, the masks
//! `φ(2^{-j}|ξ|)` add up to one on every nonzero wavenumber. Horizontal
//! blocks see only `|ξ₁|`, so modes on the line `ξ₁ = 0` belong to no
//! horizontal block and are invisible to the anisotropic norms.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{sup_norm, Grid, SpectralField, C64};

/// Transition profile of the cutoff `χ` on `1/2 ≤ |t| ≤ 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mollifier {
    /// Quintic smoothstep `6x⁵ − 15x⁴ + 10x³` (C²).
    #[default]
    Smoothstep,
    /// `e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})` (C^∞).
    Exponential,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DyadicGenerator {
    pub mollifier: Mollifier,
}

impl DyadicGenerator {
    pub fn new(mollifier: Mollifier) -> Self {
        Self { mollifier }
    }

    fn step(&self, x: f64) -> f64 {
        match self.mollifier {
            Mollifier::Smoothstep => x * x * x * (x * (6.0 * x - 15.0) + 10.0),
            Mollifier::Exponential => {
                let a = (-1.0 / x).exp();
                let b = (-1.0 / (1.0 - x)).exp();
                a / (a + b)
            }
        }
    }

    /// Low-pass cutoff `χ`.
    pub fn chi(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= 0.5 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - self.step(2.0 * t - 1.0)
        }
    }

    /// Annular bump `φ(t) = χ(t/2) − χ(t)`, supported in `1/2 ≤ |t| ≤ 2`.
    pub fn phi(&self, t: f64) -> f64 {
        self.chi(0.5 * t) - self.chi(t)
    }
}

/// Per-mode membership in (at most two consecutive) blocks along one variable.
#[derive(Clone, Debug)]
struct BlockAxis {
    min: i32,
    max: i32,
    /// `(block, weight)` pairs per mode, row-major; weight 0 marks an empty slot.
    members: Vec<[(i32, f64); 2]>,
}

impl BlockAxis {
    fn build(gen: &DyadicGenerator, values: impl Iterator<Item = f64>) -> Self {
        let mut members = Vec::new();
        let (mut min, mut max) = (i32::MAX, i32::MIN);
        for t in values {
            let mut slot = [(0, 0.0); 2];
            if t > 0.0 {
                let base = t.log2().floor() as i32;
                let mut n = 0;
                for j in base - 1..=base + 2 {
                    let w = gen.phi(t * 2f64.powi(-j));
                    if w > 0.0 {
                        assert!(n < 2, "a frequency met more than two dyadic blocks");
                        slot[n] = (j, w);
                        n += 1;
                        min = min.min(j);
                        max = max.max(j);
                    }
                }
            }
            members.push(slot);
        }
        if min > max {
            min = 0;
            max = -1;
        }
        Self { min, max, members }
    }

    fn weight(&self, idx: usize, j: i32) -> f64 {
        self.members[idx]
            .iter()
            .find(|(b, w)| *b == j && *w > 0.0)
            .map_or(0.0, |(_, w)| *w)
    }

    fn len(&self) -> usize {
        (self.max - self.min + 1).max(0) as usize
    }
}

/// Precomputed isotropic, horizontal and vertical dyadic masks for a grid.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: Arc<Grid>,
    generator: DyadicGenerator,
    iso: BlockAxis,
    horiz: BlockAxis,
    vert: BlockAxis,
}

/// Exponents `(s₁, s₂)` of the anisotropic norm `B^{s₁,s₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s1: f64,
    pub s2: f64,
}

impl BesovIndex {
    pub const fn new(s1: f64, s2: f64) -> Self {
        Self { s1, s2 }
    }
}

impl DyadicDecomposition {
    pub fn new(grid: &Arc<Grid>) -> Self {
        Self::with_generator(grid, DyadicGenerator::default())
    }

    pub fn with_generator(grid: &Arc<Grid>, generator: DyadicGenerator) -> Self {
        let (nx, ny) = grid.shape();
        let kx = grid.kx();
        let ky = grid.ky();
        let kmag = grid.kmag();
        let modes = || (0..nx).flat_map(move |i| (0..ny).map(move |j| (i, j)));
        let iso = BlockAxis::build(&generator, modes().map(|(i, j)| kmag[[i, j]]));
        let horiz = BlockAxis::build(&generator, modes().map(|(i, _)| kx[i].abs()));
        let vert = BlockAxis::build(&generator, modes().map(|(_, j)| ky[j].abs()));
        Self {
            grid: grid.clone(),
            generator,
            iso,
            horiz,
            vert,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn generator(&self) -> DyadicGenerator {
        self.generator
    }

    /// Active isotropic block indices `j`.
    pub fn iso_range(&self) -> std::ops::RangeInclusive<i32> {
        self.iso.min..=self.iso.max
    }

    /// Active horizontal block indices `q`.
    pub fn horiz_range(&self) -> std::ops::RangeInclusive<i32> {
        self.horiz.min..=self.horiz.max
    }

    /// Active vertical block indices `k`.
    pub fn vert_range(&self) -> std::ops::RangeInclusive<i32> {
        self.vert.min..=self.vert.max
    }

    fn mask_array(&self, axis: &BlockAxis, j: i32) -> Array2<f64> {
        let ny = self.grid.ny();
        Array2::from_shape_fn(self.grid.shape(), |(i, jj)| axis.weight(i * ny + jj, j))
    }

    /// `φ(2^{-j}|ξ|)` on the grid.
    pub fn iso_mask(&self, j: i32) -> Array2<f64> {
        self.mask_array(&self.iso, j)
    }

    /// `φ(2^{-q}ξ₁)` on the grid.
    pub fn horiz_mask(&self, q: i32) -> Array2<f64> {
        self.mask_array(&self.horiz, q)
    }

    /// `φ(2^{-k}ξ₂)` on the grid.
    pub fn vert_mask(&self, k: i32) -> Array2<f64> {
        self.mask_array(&self.vert, k)
    }

    fn apply_axis(&self, f: &SpectralField, axis: &BlockAxis, j: i32) -> SpectralField {
        assert_eq!(**f.grid(), *self.grid, "decomposition built for another grid");
        let ny = self.grid.ny();
        f.map_modes(|i, jj, c| c * axis.weight(i * ny + jj, j))
    }

    /// `Δ_j f`; indices outside the active range give the zero field.
    pub fn iso_block(&self, f: &SpectralField, j: i32) -> SpectralField {
        self.apply_axis(f, &self.iso, j)
    }

    /// `Δ_q^h f`.
    pub fn h_block(&self, f: &SpectralField, q: i32) -> SpectralField {
        self.apply_axis(f, &self.horiz, q)
    }

    /// `Δ_k^v f`.
    pub fn v_block(&self, f: &SpectralField, k: i32) -> SpectralField {
        self.apply_axis(f, &self.vert, k)
    }

    /// Largest deviation of `Σ_j mask_j` from 1 on nonzero wavenumbers, for
    /// the isotropic, horizontal (off `ξ₁ = 0`) and vertical (off `ξ₂ = 0`) families.
    pub fn partition_defect(&self) -> [f64; 3] {
        let (nx, ny) = self.grid.shape();
        let mut worst = [0.0f64; 3];
        for i in 0..nx {
            for j in 0..ny {
                let idx = i * ny + j;
                let sums = [&self.iso, &self.horiz, &self.vert]
                    .map(|a| a.members[idx].iter().map(|(_, w)| w).sum::<f64>());
                let active = [
                    i != 0 || j != 0,
                    self.grid.kx()[i] != 0.0,
                    self.grid.ky()[j] != 0.0,
                ];
                for n in 0..3 {
                    if active[n] {
                        worst[n] = worst[n].max((sums[n] - 1.0).abs());
                    }
                }
            }
        }
        worst
    }

    /// Squared `L²` norms of every `Δ_j Δ_q^h f` and every `Δ_j f`, from which
    /// any number of Besov norms of `f` can be read off.
    pub fn block_energies(&self, f: &SpectralField) -> BlockEnergies {
        assert_eq!(**f.grid(), *self.grid, "decomposition built for another grid");
        let nj = self.iso.len();
        let nq = self.horiz.len();
        let mut aniso = vec![0.0; nj * nq];
        let mut iso = vec![0.0; nj];
        let ny = self.grid.ny();
        for ((i, jj), c) in f.coeffs().indexed_iter() {
            let e = c.norm_sqr();
            if e == 0.0 {
                continue;
            }
            let idx = i * ny + jj;
            for &(j, wj) in &self.iso.members[idx] {
                if wj == 0.0 {
                    continue;
                }
                let jo = (j - self.iso.min) as usize;
                iso[jo] += wj * wj * e;
                for &(q, wq) in &self.horiz.members[idx] {
                    if wq == 0.0 {
                        continue;
                    }
                    let qo = (q - self.horiz.min) as usize;
                    aniso[jo * nq + qo] += wj * wj * wq * wq * e;
                }
            }
        }
        let area = self.grid.area();
        aniso.iter_mut().for_each(|v| *v *= area);
        iso.iter_mut().for_each(|v| *v *= area);
        BlockEnergies {
            jmin: self.iso.min,
            qmin: self.horiz.min,
            nq,
            aniso,
            iso,
        }
    }

    /// `Σ_{j,q} 2^{j s₁} 2^{q s₂} ‖Δ_j Δ_q^h f‖_{L²}`.
    pub fn besov_norm_aniso(&self, f: &SpectralField, idx: BesovIndex) -> f64 {
        self.block_energies(f).aniso(idx)
    }

    /// `Σ_j 2^{j s} ‖Δ_j f‖_{L²}`.
    pub fn besov_norm_iso(&self, f: &SpectralField, s: f64) -> f64 {
        self.block_energies(f).iso(s)
    }
}

/// Block energies of one field; see [`DyadicDecomposition::block_energies`].
#[derive(Clone, Debug)]
pub struct BlockEnergies {
    jmin: i32,
    qmin: i32,
    nq: usize,
    aniso: Vec<f64>,
    iso: Vec<f64>,
}

impl BlockEnergies {
    pub fn aniso(&self, idx: BesovIndex) -> f64 {
        let mut sum = 0.0;
        for (n, e) in self.aniso.iter().enumerate() {
            if *e > 0.0 {
                let j = self.jmin + (n / self.nq) as i32;
                let q = self.qmin + (n % self.nq) as i32;
                sum += (j as f64 * idx.s1 + q as f64 * idx.s2).exp2() * e.sqrt();
            }
        }
        sum
    }

    pub fn iso(&self, s: f64) -> f64 {
        self.iso
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0.0)
            .map(|(n, e)| ((self.jmin + n as i32) as f64 * s).exp2() * e.sqrt())
            .sum()
    }

    /// `‖·‖_{B^{a} ∩ B^{b}}`, the sum of two anisotropic norms.
    pub fn aniso_pair(&self, a: BesovIndex, b: BesovIndex) -> f64 {
        self.aniso(a) + self.aniso(b)
    }
}

/// Outcome of one inequality check `lhs ≲ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub field_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl VerifierReport {
    fn new(case: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        // both sides vanish together on fields the inequality does not see
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            case: case.into(),
            lhs,
            rhs,
            ratio,
            field_id: String::new(),
            bound: None,
        }
    }

    fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.field_id = id.into();
        self
    }
}

/// The four `L²` cases of the anisotropic Bernstein inequality. `s ≥ 0` is the
/// derivative order, applied as the multiplier `|ξ₁|^s` (resp. `|ξ₂|^s`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BernsteinCase {
    /// `supp â ⊂ {|ξ₁| ≤ 2^q}`: `‖∂ₓ^s a‖ ≤ 2^{qs} ‖a‖`.
    BallX { q: i32, s: f64 },
    /// `supp â ⊂ {|ξ₂| ≤ 2^k}`: `‖∂_y^s a‖ ≤ 2^{ks} ‖a‖`.
    BallY { k: i32, s: f64 },
    /// `supp â ⊂ {2^{q-1} ≤ |ξ₁| ≤ 2^{q+1}}`: `‖a‖ ≲ 2^{-qs} ‖∂ₓ^s a‖`.
    AnnulusX { q: i32, s: f64 },
    /// `supp â ⊂ {2^{k-1} ≤ |ξ₂| ≤ 2^{k+1}}`: `‖a‖ ≲ 2^{-ks} ‖∂_y^s a‖`.
    AnnulusY { k: i32, s: f64 },
}

impl BernsteinCase {
    fn name(&self) -> &'static str {
        match self {
            Self::BallX { .. } => "bernstein_ball_x",
            Self::BallY { .. } => "bernstein_ball_y",
            Self::AnnulusX { .. } => "bernstein_annulus_x",
            Self::AnnulusY { .. } => "bernstein_annulus_y",
        }
    }
}

const SUPPORT_TOL: f64 = 1e-13;

/// Checks that every mode carrying weight satisfies `inside(ξ₁, ξ₂)`.
fn check_support<F: Fn(f64, f64) -> bool>(f: &SpectralField, inside: F) -> Result<()> {
    let g = f.grid();
    let cut = SUPPORT_TOL * f.max_coeff();
    for ((i, j), c) in f.coeffs().indexed_iter() {
        if c.norm() > cut && !inside(g.kx()[i], g.ky()[j]) {
            return Err(Error::Hypothesis(format!(
                "mode ({}, {}) lies outside the required frequency support",
                g.kx()[i],
                g.ky()[j]
            )));
        }
    }
    Ok(())
}

fn abs_pow(f: &SpectralField, horizontal: bool, s: f64) -> SpectralField {
    let g = f.grid().clone();
    f.map_modes(|i, j, c| {
        let k = if horizontal { g.kx()[i] } else { g.ky()[j] }.abs();
        if s == 0.0 {
            c
        } else {
            c * k.powf(s)
        }
    })
}

fn l2(f: &SpectralField) -> f64 {
    f.sobolev_norm_unchecked(0.0)
}

pub fn verify_bernstein(f: &SpectralField, case: BernsteinCase) -> Result<VerifierReport> {
    const EPS: f64 = 1e-12;
    let report = match case {
        BernsteinCase::BallX { q, s } | BernsteinCase::BallY { k: q, s } => {
            let horizontal = matches!(case, BernsteinCase::BallX { .. });
            if s < 0.0 {
                return Err(Error::Hypothesis(format!("derivative order {s} < 0")));
            }
            let r = (q as f64).exp2();
            check_support(f, |k1, k2| {
                (if horizontal { k1 } else { k2 }).abs() <= r * (1.0 + EPS)
            })?;
            let lhs = l2(&abs_pow(f, horizontal, s));
            let rhs = (q as f64 * s).exp2() * l2(f);
            VerifierReport::new(case.name(), lhs, rhs).with_bound(1.0)
        }
        BernsteinCase::AnnulusX { q, s } | BernsteinCase::AnnulusY { k: q, s } => {
            let horizontal = matches!(case, BernsteinCase::AnnulusX { .. });
            if s < 0.0 {
                return Err(Error::Hypothesis(format!("derivative order {s} < 0")));
            }
            let r = (q as f64).exp2();
            check_support(f, |k1, k2| {
                let t = (if horizontal { k1 } else { k2 }).abs();
                t >= 0.5 * r * (1.0 - EPS) && t <= 2.0 * r * (1.0 + EPS)
            })?;
            let lhs = l2(f);
            let rhs = (-(q as f64) * s).exp2() * l2(&abs_pow(f, horizontal, s));
            VerifierReport::new(case.name(), lhs, rhs).with_bound(s.exp2())
        }
    };
    Ok(report)
}

/// The two inequalities `‖a‖_{B^{s₁,s₂}} ≲ ‖a‖_{B^{s₁+s₂}} ≲ ‖a‖_{Ḣ^{τ₁}} + ‖a‖_{Ḣ^{τ₂}}`,
/// valid for `τ₁ < s₁ + s₂ < τ₂` and `s₂ > 0`.
pub fn verify_embedding_sobolev(
    f: &SpectralField,
    s1: f64,
    s2: f64,
    tau1: f64,
    tau2: f64,
    d: &DyadicDecomposition,
) -> Result<[VerifierReport; 2]> {
    let total = s1 + s2;
    if !(tau1 < total && total < tau2) {
        return Err(Error::Hypothesis(format!(
            "need tau1 < s1 + s2 < tau2, got {tau1} < {total} < {tau2}"
        )));
    }
    if s2 <= 0.0 {
        return Err(Error::Hypothesis(format!("need s2 > 0, got {s2}")));
    }
    let e = d.block_energies(f);
    let aniso = e.aniso(BesovIndex::new(s1, s2));
    let iso = e.iso(total);
    let sob = f.sobolev_norm(tau1)? + f.sobolev_norm(tau2)?;
    Ok([
        VerifierReport::new("embedding_aniso_in_iso", aniso, iso),
        VerifierReport::new("embedding_iso_in_sobolev", iso, sob),
    ])
}

/// The six `L^∞` bounds of the Lipschitz embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipCase {
    /// `‖a‖_∞ ≲ ‖a‖_{B^{1/2,1/2}}`
    Sup,
    /// `‖∇a‖_∞ ≲ ‖a‖_{B^{3/2,1/2}}`
    Grad,
    /// `‖Λa‖_∞ ≲ ‖a‖_{B^{3/2,1/2}}`
    Lambda,
    /// `‖∇R₁a‖_∞ ≲ ‖a‖_{B^{1/2,3/2}}`
    GradR1,
    /// `‖ΛR₁a‖_∞ ≲ ‖a‖_{B^{1/2,3/2}}`
    LambdaR1,
    /// `‖∇R₁²a‖_∞ ≲ ‖a‖_{B^{-1/2,5/2}}`
    GradR1Sq,
}

impl LipCase {
    pub const ALL: [LipCase; 6] = [
        Self::Sup,
        Self::Grad,
        Self::Lambda,
        Self::GradR1,
        Self::LambdaR1,
        Self::GradR1Sq,
    ];

    pub fn index(&self) -> BesovIndex {
        match self {
            Self::Sup => BesovIndex::new(0.5, 0.5),
            Self::Grad | Self::Lambda => BesovIndex::new(1.5, 0.5),
            Self::GradR1 | Self::LambdaR1 => BesovIndex::new(0.5, 1.5),
            Self::GradR1Sq => BesovIndex::new(-0.5, 2.5),
        }
    }

    fn uses_riesz(&self) -> bool {
        matches!(self, Self::GradR1 | Self::LambdaR1 | Self::GradR1Sq)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sup => "lip_sup",
            Self::Grad => "lip_grad",
            Self::Lambda => "lip_lambda",
            Self::GradR1 => "lip_grad_r1",
            Self::LambdaR1 => "lip_lambda_r1",
            Self::GradR1Sq => "lip_grad_r1sq",
        }
    }
}

/// Largest pointwise Euclidean norm of `∇g`.
pub fn sup_grad(g: &SpectralField) -> f64 {
    let gx = g.ddx().to_physical();
    let gy = g.ddy().to_physical();
    gx.iter()
        .zip(gy.iter())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
}

/// True when some mode on the line `ξ₁ = 0` carries weight.
pub fn has_vertical_line_content(f: &SpectralField) -> bool {
    let cut = SUPPORT_TOL * f.max_coeff();
    let ny = f.grid().ny();
    (0..ny).any(|j| f.coeffs()[[0, j]].norm() > cut)
}

pub fn verify_lip_embedding(
    f: &SpectralField,
    which: LipCase,
    d: &DyadicDecomposition,
) -> Result<VerifierReport> {
    if !f.is_zero_mean() {
        return Err(Error::Hypothesis("Lipschitz embeddings need a zero-mean field".into()));
    }
    if !which.uses_riesz() && has_vertical_line_content(f) {
        return Err(Error::Hypothesis(
            "field has content on the line xi1 = 0, which anisotropic norms do not see".into(),
        ));
    }
    let lhs = match which {
        LipCase::Sup => sup_norm(&f.to_physical()),
        LipCase::Grad => sup_grad(f),
        LipCase::Lambda => sup_norm(&f.lambda_pow(1.0).to_physical()),
        LipCase::GradR1 => sup_grad(&f.riesz1()),
        LipCase::LambdaR1 => sup_norm(&f.riesz1().lambda_pow(1.0).to_physical()),
        LipCase::GradR1Sq => sup_grad(&f.riesz1().riesz1()),
    };
    let rhs = d.besov_norm_aniso(f, which.index());
    Ok(VerifierReport::new(which.name(), lhs, rhs))
}

/// `‖f‖_{B^{s₁,s₂}} ≤ C ‖f‖_{B^{s₁+s,s₂−s}}` for `s > 0`. Horizontal blocks
/// only meet isotropic ones with `q ≤ j + 1`, so `C ≤ 2^s`.
pub fn verify_besov_inclusion(
    f: &SpectralField,
    s1: f64,
    s2: f64,
    s: f64,
    d: &DyadicDecomposition,
) -> Result<VerifierReport> {
    if s <= 0.0 {
        return Err(Error::Hypothesis(format!("inclusion needs s > 0, got {s}")));
    }
    let e = d.block_energies(f);
    let lhs = e.aniso(BesovIndex::new(s1, s2));
    let rhs = e.aniso(BesovIndex::new(s1 + s, s2 - s));
    Ok(VerifierReport::new("besov_inclusion", lhs, rhs).with_bound(s.exp2()))
}

/// Log-convexity `‖f‖_{Ḣ^s} ≤ ‖f‖_{Ḣ^{s₀}}^θ ‖f‖_{Ḣ^{s₁}}^{1−θ}` with
/// `s = θ s₀ + (1 − θ) s₁`; the ratio never exceeds 1 in exact arithmetic.
pub fn verify_interpolation(
    f: &SpectralField,
    s0: f64,
    s1: f64,
    theta: f64,
) -> Result<VerifierReport> {
    if !(0.0..=1.0).contains(&theta) || s0 > s1 {
        return Err(Error::Hypothesis(format!(
            "need s0 <= s1 and theta in [0, 1], got s0 = {s0}, s1 = {s1}, theta = {theta}"
        )));
    }
    let s = theta * s0 + (1.0 - theta) * s1;
    let lhs = f.sobolev_norm(s)?;
    let rhs = f.sobolev_norm(s0)?.powf(theta) * f.sobolev_norm(s1)?.powf(1.0 - theta);
    Ok(VerifierReport::new("interpolation", lhs, rhs).with_bound(1.0))
}

/// A field supported on the single wavenumber pair `±(p, q)`.
pub fn single_mode(grid: &Arc<Grid>, p: i64, q: i64) -> SpectralField {
    SpectralField::from_modes(grid, &[(p, q, C64::new(1.0, 0.0))])
}
