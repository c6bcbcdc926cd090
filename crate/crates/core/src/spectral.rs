//! Periodic grids, Fourier transforms and Fourier multipliers.
//!
//! Fields are stored by their Fourier coefficients on an `nx × ny` grid in
//! standard FFT ordering. The forward transform is normalized by `1/(nx ny)`,
//! so `cos(x)` on a `2π` box has coefficient `1/2` at `ξ = (±1, 0)` and the
//! inverse transform is a plain sum over modes.
//!
//! Homogeneous symbols (`Λ^s` for `s != 0`, the Riesz transforms) send the
//! zero mode to zero. Every multiplier also discards the Nyquist row and
//! column, where an odd symbol cannot be applied while keeping the field real.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const SNAPSHOT_MAGIC: &[u8; 5] = b"STRF1";

/// A mean coefficient below this fraction of the field's coefficient norm
/// counts as zero for the negative-order operators.
const ZERO_MEAN_REL_TOL: f64 = 1e-12;

/// Rectangular periodic box with its wavenumber tables and FFT plans.
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
    kmag: Array2<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

/// Builds a grid of `nx × ny` modes on the box `[0, lx) × [0, ly)`.
pub fn make_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Arc<Grid>> {
    Grid::new(nx, ny, lx, ly).map(Arc::new)
}

/// Signed mode number of FFT index `i` on an axis of length `n`.
#[inline]
pub fn mode_number(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx % 2 != 0 || ny % 2 != 0 || nx < 8 || ny < 8 {
            return Err(Error::GridSize { nx, ny });
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::BoxLength { lx, ly });
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let kx: Vec<f64> = (0..nx)
            .map(|i| two_pi * mode_number(i, nx) as f64 / lx)
            .collect();
        let ky: Vec<f64> = (0..ny)
            .map(|j| two_pi * mode_number(j, ny) as f64 / ly)
            .collect();
        let kmag = Array2::from_shape_fn((nx, ny), |(i, j)| kx[i].hypot(ky[j]));
        let mut planner = FftPlanner::new();
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            kx,
            ky,
            kmag,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Horizontal wavenumbers `ξ₁` in FFT order.
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    /// Vertical wavenumbers `ξ₂` in FFT order.
    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn kmag(&self) -> &Array2<f64> {
        &self.kmag
    }

    /// Area of the box; the factor between `Σ|c|²` and the `L²` norm squared.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// True on the Nyquist row or column.
    #[inline]
    pub fn is_nyquist(&self, i: usize, j: usize) -> bool {
        i == self.nx / 2 || j == self.ny / 2
    }

    /// True for modes kept by the 2/3 rule (`3|p| < nx` and `3|q| < ny`).
    #[inline]
    pub fn is_resolved(&self, i: usize, j: usize) -> bool {
        3 * mode_number(i, self.nx).unsigned_abs() < self.nx as u64
            && 3 * mode_number(j, self.ny).unsigned_abs() < self.ny as u64
    }

    /// FFT index of the mode `-ξ`.
    #[inline]
    pub fn conjugate_index(&self, i: usize, j: usize) -> (usize, usize) {
        ((self.nx - i) % self.nx, (self.ny - j) % self.ny)
    }

    /// Samples `f(x, y)` at the collocation points `(i lx/nx, j ly/ny)`.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Array2<f64> {
        let (dx, dy) = (self.dx(), self.dy());
        Array2::from_shape_fn((self.nx, self.ny), |(i, j)| f(i as f64 * dx, j as f64 * dy))
    }

    fn fft2(&self, data: &mut Array2<C64>, inverse: bool) {
        let (nx, ny) = (self.nx, self.ny);
        let (along_y, along_x) = if inverse {
            (&self.inv_y, &self.inv_x)
        } else {
            (&self.fwd_y, &self.fwd_x)
        };
        {
            let rows = data
                .as_slice_mut()
                .expect("spectral arrays are kept in standard layout");
            along_y.process(rows);
        }
        let mut columns = vec![C64::new(0.0, 0.0); nx * ny];
        for ((i, j), v) in data.indexed_iter() {
            columns[j * nx + i] = *v;
        }
        along_x.process(&mut columns);
        for ((i, j), v) in data.indexed_iter_mut() {
            *v = columns[j * nx + i];
        }
    }
}

/// A Fourier multiplier `ξ ↦ m(ξ)` with an explicit value at `ξ = 0`.
#[derive(Clone)]
pub struct MultiplierSymbol {
    eval: Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>,
    zero_mode: C64,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("zero_mode", &self.zero_mode)
            .finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    /// Symbol with value 0 at the origin.
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            zero_mode: C64::new(0.0, 0.0),
        }
    }

    pub fn with_zero_mode(mut self, value: C64) -> Self {
        self.zero_mode = value;
        self
    }

    pub fn zero_mode(&self) -> C64 {
        self.zero_mode
    }

    /// Value at `(ξ₁, ξ₂)`; the origin returns the zero-mode convention.
    pub fn eval(&self, k1: f64, k2: f64) -> C64 {
        if k1 == 0.0 && k2 == 0.0 {
            self.zero_mode
        } else {
            (self.eval)(k1, k2)
        }
    }

    /// `R₁ = Λ⁻¹∂ₓ`, symbol `iξ₁/|ξ|`.
    pub fn riesz1() -> Self {
        Self::new(|k1, k2| C64::new(0.0, k1 / k1.hypot(k2)))
    }

    /// `R₂ = Λ⁻¹∂_y`, symbol `iξ₂/|ξ|`.
    pub fn riesz2() -> Self {
        Self::new(|k1, k2| C64::new(0.0, k2 / k1.hypot(k2)))
    }

    /// `Λ^s`, symbol `|ξ|^s`; `Λ⁰` is the identity including the mean.
    pub fn lambda_pow(s: f64) -> Self {
        let m = Self::new(move |k1, k2| C64::new(k1.hypot(k2).powf(s), 0.0));
        if s == 0.0 {
            m.with_zero_mode(C64::new(1.0, 0.0))
        } else {
            m
        }
    }

    pub fn ddx() -> Self {
        Self::new(|k1, _| C64::new(0.0, k1))
    }

    pub fn ddy() -> Self {
        Self::new(|_, k2| C64::new(0.0, k2))
    }

    /// Pointwise product of two symbols.
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self {
            eval: Arc::new(move |k1, k2| a(k1, k2) * b(k1, k2)),
            zero_mode: self.zero_mode * other.zero_mode,
        }
    }
}

/// Fourier coefficients of a real field on a [`Grid`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Array2<C64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: Array2::zeros(grid.shape()),
        }
    }

    /// Wraps a coefficient array; the caller is responsible for Hermitian symmetry.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Array2<C64>) -> Result<Self> {
        if coeffs.dim() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                found: coeffs.dim(),
            });
        }
        let coeffs = if coeffs.is_standard_layout() {
            coeffs
        } else {
            coeffs.as_standard_layout().into_owned()
        };
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Builds the field `Σ c e^{i ξ·x}` from a list of `(p, q, c)` modes,
    /// adding the conjugate partner of each so the result is real.
    pub fn from_modes(grid: &Arc<Grid>, modes: &[(i64, i64, C64)]) -> Self {
        let mut f = Self::zeros(grid);
        let (nx, ny) = (grid.nx as i64, grid.ny as i64);
        for &(p, q, c) in modes {
            let i = p.rem_euclid(nx) as usize;
            let j = q.rem_euclid(ny) as usize;
            let (ci, cj) = grid.conjugate_index(i, j);
            if (ci, cj) == (i, j) {
                f.coeffs[[i, j]] += C64::new(c.re, 0.0);
            } else {
                f.coeffs[[i, j]] += c * 0.5;
                f.coeffs[[ci, cj]] += c.conj() * 0.5;
            }
        }
        f
    }

    pub fn from_physical(a: &Array2<f64>, grid: &Arc<Grid>) -> Result<Self> {
        if a.dim() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                found: a.dim(),
            });
        }
        let mut data = a.mapv(|v| C64::new(v, 0.0));
        if !data.is_standard_layout() {
            data = data.as_standard_layout().into_owned();
        }
        grid.fft2(&mut data, false);
        let norm = 1.0 / (grid.nx * grid.ny) as f64;
        data.mapv_inplace(|c| c * norm);
        Ok(Self {
            grid: grid.clone(),
            coeffs: data,
        })
    }

    /// Samples the field at the collocation points.
    pub fn to_physical(&self) -> Array2<f64> {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, true);
        data.mapv(|c| c.re)
    }

    /// Largest imaginary part left by the inverse transform, relative to the
    /// largest sample magnitude; zero for an exactly Hermitian field.
    pub fn imaginary_residue(&self) -> f64 {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, true);
        let re = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
        let im = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        if re == 0.0 {
            im
        } else {
            im / re
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<C64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<C64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<C64> {
        self.coeffs
    }

    /// Coefficient of mode `(p, q)`.
    pub fn mode(&self, p: i64, q: i64) -> C64 {
        let i = p.rem_euclid(self.grid.nx as i64) as usize;
        let j = q.rem_euclid(self.grid.ny as i64) as usize;
        self.coeffs[[i, j]]
    }

    /// Spatial mean, i.e. the zero-mode coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }

    /// `(Σ |c|²)^{1/2}` over all modes.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero_mean(&self) -> bool {
        let m = self.coeffs[[0, 0]].norm();
        m == 0.0 || m <= ZERO_MEAN_REL_TOL * self.coeff_norm()
    }

    /// Largest violation of `c(-ξ) = conj(c(ξ))`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for ((i, j), c) in self.coeffs.indexed_iter() {
            let (ci, cj) = self.grid.conjugate_index(i, j);
            worst = worst.max((c - self.coeffs[[ci, cj]].conj()).norm());
        }
        worst / scale
    }

    /// Maximum absolute deviation between two fields' coefficients.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.check_grid(other);
        Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(0.0f64, |m, a, b| m.max((a - b).norm()))
    }

    fn check_grid(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid,
            "fields live on different grids"
        );
    }

    /// Applies `ξ ↦ m(ξ)` mode by mode, with the zero mode and Nyquist
    /// conventions described at module level.
    pub fn apply_multiplier(&self, m: &MultiplierSymbol) -> Self {
        let g = &self.grid;
        self.map_modes(|i, j, c| {
            if g.is_nyquist(i, j) {
                C64::new(0.0, 0.0)
            } else {
                m.eval(g.kx[i], g.ky[j]) * c
            }
        })
    }

    /// Mode-wise map `c ↦ f(i, j, c)`.
    pub fn map_modes<F: Fn(usize, usize, C64) -> C64>(&self, f: F) -> Self {
        let mut coeffs = self.coeffs.clone();
        for ((i, j), c) in coeffs.indexed_iter_mut() {
            *c = f(i, j, *c);
        }
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Applies a real multiplier table given as a function of `(ξ₁, ξ₂, |ξ|)`;
    /// zero and Nyquist modes are sent to zero.
    fn homogeneous<F: Fn(f64, f64, f64) -> C64>(&self, f: F) -> Self {
        let g = &self.grid;
        self.map_modes(|i, j, c| {
            if (i == 0 && j == 0) || g.is_nyquist(i, j) {
                C64::new(0.0, 0.0)
            } else {
                f(g.kx[i], g.ky[j], g.kmag[[i, j]]) * c
            }
        })
    }

    pub fn riesz1(&self) -> Self {
        self.homogeneous(|k1, _, k| C64::new(0.0, k1 / k))
    }

    pub fn riesz2(&self) -> Self {
        self.homogeneous(|_, k2, k| C64::new(0.0, k2 / k))
    }

    /// `Λ^s`; for `s != 0` the mean is dropped.
    pub fn lambda_pow(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        if s == 1.0 {
            return self.homogeneous(|_, _, k| C64::new(k, 0.0));
        }
        if s == -1.0 {
            return self.homogeneous(|_, _, k| C64::new(1.0 / k, 0.0));
        }
        self.homogeneous(|_, _, k| C64::new(k.powf(s), 0.0))
    }

    pub fn ddx(&self) -> Self {
        self.homogeneous(|k1, _, _| C64::new(0.0, k1))
    }

    pub fn ddy(&self) -> Self {
        self.homogeneous(|_, k2, _| C64::new(0.0, k2))
    }

    /// Transport velocity `v = (R₂Ω, −R₁Ω)` generated by `Ω`.
    pub fn perp_grad_stream(&self) -> (Self, Self) {
        (self.riesz2(), -&self.riesz1())
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&self) -> Self {
        let g = &self.grid;
        self.map_modes(|i, j, c| {
            if g.is_resolved(i, j) {
                c
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Homogeneous Sobolev norm `‖Λ^s f‖_{L²}` by Parseval on the box.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        if s < 0.0 && !self.is_zero_mean() {
            return Err(Error::NonzeroMean {
                order: s,
                mean: self.coeffs[[0, 0]].norm(),
            });
        }
        Ok(self.sobolev_norm_unchecked(s))
    }

    /// Same as [`sobolev_norm`](Self::sobolev_norm) but silently drops the
    /// mean for `s < 0`.
    pub fn sobolev_norm_unchecked(&self, s: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for ((i, j), c) in self.coeffs.indexed_iter() {
            let k = g.kmag[[i, j]];
            let w = if k == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else if s == 0.0 {
                1.0
            } else {
                k.powf(2.0 * s)
            };
            acc += w * c.norm_sqr();
        }
        (g.area() * acc).sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.mapv(|c| c * a),
        }
    }

    /// `self + a·x`.
    pub fn axpy(&self, a: f64, x: &Self) -> Self {
        self.check_grid(x);
        let mut coeffs = self.coeffs.clone();
        Zip::from(&mut coeffs).and(&x.coeffs).for_each(|c, &v| *c += v * a);
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scale(a)
    }
}

/// Physical-space `L²` norm by the rectangle rule on the collocation points.
pub fn physical_l2(a: &Array2<f64>, grid: &Grid) -> f64 {
    (a.iter().map(|v| v * v).sum::<f64>() * grid.dx() * grid.dy()).sqrt()
}

/// Largest absolute sample value.
pub fn sup_norm(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Writes a physical snapshot: `STRF1`, `nx`, `ny` (u64), `lx`, `ly` (f64),
/// then the samples row-major, all little-endian.
pub fn write_snapshot(path: &Path, field: &SpectralField) -> Result<()> {
    let g = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(g.nx as u64).to_le_bytes())?;
    w.write_all(&(g.ny as u64).to_le_bytes())?;
    w.write_all(&g.lx.to_le_bytes())?;
    w.write_all(&g.ly.to_le_bytes())?;
    for v in field.to_physical().iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`] back into a field.
pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let nx = u64::from_le_bytes(next(&mut r)?) as usize;
    let ny = u64::from_le_bytes(next(&mut r)?) as usize;
    let lx = f64::from_le_bytes(next(&mut r)?);
    let ly = f64::from_le_bytes(next(&mut r)?);
    let grid = make_grid(nx, ny, lx, ly)?;
    let mut samples = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        samples.push(f64::from_le_bytes(next(&mut r)?));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Snapshot(format!("{} trailing bytes", rest.len())));
    }
    let a = Array2::from_shape_vec((nx, ny), samples)
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    SpectralField::from_physical(&a, &grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn box2pi(n: usize) -> Arc<Grid> {
        make_grid(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn integer_modes_on_2pi_box() {
        let g = box2pi(8);
        let mut kx = g.kx().to_vec();
        kx.sort_by(f64::total_cmp);
        let expect: Vec<f64> = (-4..4).map(|p| p as f64).collect();
        for (a, b) in kx.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        assert_eq!(g.kx().iter().filter(|&&k| k == 0.0).count(), 1);
    }

    #[test]
    fn spacing_follows_box_length() {
        let g = make_grid(16, 8, 4.0 * PI, 2.0 * PI).unwrap();
        assert_abs_diff_eq!(g.kx()[1] - g.kx()[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(g.ky()[1] - g.ky()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_grid(7, 8, 1.0, 1.0), Err(Error::GridSize { .. })));
        assert!(matches!(make_grid(6, 8, 1.0, 1.0), Err(Error::GridSize { .. })));
        assert!(matches!(make_grid(8, 8, 0.0, 1.0), Err(Error::BoxLength { .. })));
    }

    #[test]
    fn cos_x_normalization() {
        let g = box2pi(16);
        let f = SpectralField::from_physical(&g.sample(|x, _| x.cos()), &g).unwrap();
        assert_abs_diff_eq!(f.mode(1, 0).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.mode(-1, 0).re, 0.5, epsilon = 1e-14);
        let rest: f64 = f
            .coeffs()
            .indexed_iter()
            .filter(|((i, j), _)| !((*i == 1 || *i == 15) && *j == 0))
            .map(|(_, c)| c.norm())
            .sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn zero_array_gives_zero_field() {
        let g = box2pi(8);
        let f = SpectralField::from_physical(&Array2::zeros((8, 8)), &g).unwrap();
        assert_eq!(f.coeff_norm(), 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = box2pi(8);
        let err = SpectralField::from_physical(&Array2::zeros((8, 10)), &g).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }

    #[test]
    fn riesz_on_cos_x() {
        let g = box2pi(16);
        let f = SpectralField::from_physical(&g.sample(|x, _| x.cos()), &g).unwrap();
        let r1 = f.riesz1().to_physical();
        let expect = g.sample(|x, _| -x.sin());
        assert!((&r1 - &expect).iter().all(|d| d.abs() < 1e-14));
        assert!(f.riesz2().coeff_norm() < 1e-15);
        // the generic symbol route agrees with the table route
        let r1m = f.apply_multiplier(&MultiplierSymbol::riesz1());
        assert!(r1m.max_diff(&f.riesz1()) < 1e-15);
    }

    #[test]
    fn lambda_pow_on_diagonal_mode() {
        let g = box2pi(16);
        let f = SpectralField::from_physical(&g.sample(|x, y| (x + y).cos()), &g).unwrap();
        for s in [-1.5, 0.5, 1.0, 2.25] {
            let out = f.apply_multiplier(&MultiplierSymbol::lambda_pow(s));
            let expect = f.scale(2f64.powf(s / 2.0));
            assert!(out.max_diff(&expect) < 1e-14, "s = {s}");
        }
    }

    #[test]
    fn stream_velocity_examples() {
        let g = box2pi(16);
        let om = SpectralField::from_physical(&g.sample(|x, _| x.cos()), &g).unwrap();
        let (v1, v2) = om.perp_grad_stream();
        assert!(v1.coeff_norm() < 1e-15);
        let expect = g.sample(|x, _| x.sin());
        assert!((&v2.to_physical() - &expect).iter().all(|d| d.abs() < 1e-14));
        let u2 = om.riesz1().to_physical();
        assert!((&u2 + &expect).iter().all(|d| d.abs() < 1e-14));

        // Ω = cos(y): R₂ has symbol iξ₂/|ξ|, so v₁ = R₂cos(y) = −sin(y), v₂ = 0
        let om = SpectralField::from_physical(&g.sample(|_, y| y.cos()), &g).unwrap();
        let (v1, v2) = om.perp_grad_stream();
        let expect = g.sample(|_, y| -y.sin());
        assert!((&v1.to_physical() - &expect).iter().all(|d| d.abs() < 1e-14));
        assert!(v2.coeff_norm() < 1e-15);

        let (v1, v2) = SpectralField::zeros(&g).perp_grad_stream();
        assert_eq!(v1.coeff_norm() + v2.coeff_norm(), 0.0);
    }

    #[test]
    fn dealias_cutoff() {
        let g = box2pi(16);
        let f = SpectralField::from_modes(
            &g,
            &[(7, 0, C64::new(1.0, 0.0)), (1, 1, C64::new(0.3, 0.2))],
        );
        let d = f.dealias();
        assert_eq!(d.mode(7, 0), C64::new(0.0, 0.0));
        assert_eq!(d.mode(1, 1), f.mode(1, 1));
        assert_eq!(d.dealias(), d);
    }

    #[test]
    fn sobolev_examples() {
        let g = box2pi(16);
        let cx = SpectralField::from_physical(&g.sample(|x, _| x.cos()), &g).unwrap();
        assert_abs_diff_eq!(cx.sobolev_norm(0.0).unwrap(), PI * 2f64.sqrt(), epsilon = 1e-12);
        let cxy = SpectralField::from_physical(&g.sample(|x, y| (x + y).cos()), &g).unwrap();
        assert_abs_diff_eq!(
            cxy.sobolev_norm(1.0).unwrap(),
            2f64.sqrt() * cxy.sobolev_norm(0.0).unwrap(),
            epsilon = 1e-12
        );
        let c = SpectralField::from_physical(&g.sample(|_, _| 3.0), &g).unwrap();
        assert_eq!(c.sobolev_norm(1.0).unwrap(), 0.0);
        assert!(matches!(c.sobolev_norm(-0.5), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn snapshot_round_trip() {
        let g = make_grid(16, 8, 3.0, 2.0).unwrap();
        let f = SpectralField::from_physical(&g.sample(|x, y| (x * 2.0).sin() + y * 0.1), &g)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.strf");
        write_snapshot(&path, &f).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"STRF1");
        assert_eq!(bytes.len(), 5 + 32 + 8 * 16 * 8);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[21..29].try_into().unwrap()), 3.0);
        let back = read_snapshot(&path).unwrap();
        assert!(back.max_diff(&f) < 1e-14);
    }
}
