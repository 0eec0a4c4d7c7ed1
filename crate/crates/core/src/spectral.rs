//! Fourier machinery on the periodic box `[0, 2π)³`.
//!
//! Real fields are stored point-wise with `x` varying fastest. Their spectra
//! use the half-complex layout of a real-to-complex transform: `kx` runs over
//! `0..=n/2`, `ky` and `kz` over the full index range, and the missing
//! negative `kx` half is implied by conjugate symmetry. The forward
//! transform divides by `n³`, so the `k = 0` coefficient is the field mean
//! and Parseval reads `Σ|f̂_k|² = mean(|f|²)`.
//!
//! Derivative multipliers at the Nyquist index `|k_i| = n/2` are zero so that
//! derivatives of real fields stay real. The Leray projector is built from
//! the same multipliers, which makes `divergence ∘ leray_project` vanish to
//! round-off.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tolerances;

struct GridInner {
    n: usize,
    cutoff: usize,
    wavenumbers: Vec<i64>,
    deriv: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Cubic periodic grid with `n` points per dimension on a box of side 2π.
///
/// Cheap to clone; the transform plans are shared.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.0.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        let half = (n / 2) as i64;
        let wavenumbers: Vec<i64> = (0..n as i64)
            .map(|i| if i <= half { i } else { i - n as i64 })
            .collect();
        let deriv = wavenumbers
            .iter()
            .map(|&k| if k.abs() == half { 0.0 } else { k as f64 })
            .collect();
        let mut planner = FftPlanner::<f64>::new();
        let mut real_planner = RealFftPlanner::<f64>::new();
        Ok(Grid(Arc::new(GridInner {
            n,
            cutoff: n / 3,
            wavenumbers,
            deriv,
            r2c: real_planner.plan_fft_forward(n),
            c2r: real_planner.plan_fft_inverse(n),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })))
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.0.n
    }

    /// Number of grid points, `n³`.
    pub fn len(&self) -> usize {
        self.0.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of stored `kx` indices, `n/2 + 1`.
    pub fn half(&self) -> usize {
        self.0.n / 2 + 1
    }

    /// Number of stored spectral coefficients.
    pub fn spectral_len(&self) -> usize {
        self.half() * self.0.n * self.0.n
    }

    /// Side of the box.
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    /// Box volume `(2π)³`.
    pub fn volume(&self) -> f64 {
        self.length().powi(3)
    }

    /// Grid spacing `2π/n`.
    pub fn spacing(&self) -> f64 {
        self.length() / self.0.n as f64
    }

    /// Integer frequencies per dimension in transform order:
    /// `0, 1, …, n/2, −n/2+1, …, −1`.
    pub fn wavenumbers(&self) -> &[i64] {
        &self.0.wavenumbers
    }

    /// Largest retained `|k_i|` under the 2/3 rule, `floor(n/3)`.
    pub fn dealias_cutoff(&self) -> usize {
        self.0.cutoff
    }

    /// True iff every `|k_i| ≤ floor(n/3)`.
    pub fn dealias_mask(&self, k: [i64; 3]) -> bool {
        let c = self.0.cutoff as i64;
        k.iter().all(|ki| ki.abs() <= c)
    }

    /// Flat point index, `x` fastest.
    pub fn point_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let n = self.0.n;
        ix + n * (iy + n * iz)
    }

    /// Physical coordinates of a flat point index.
    pub fn coordinates(&self, index: usize) -> [f64; 3] {
        let n = self.0.n;
        let h = self.spacing();
        [
            (index % n) as f64 * h,
            ((index / n) % n) as f64 * h,
            (index / (n * n)) as f64 * h,
        ]
    }

    /// Flat spectral index of a stored mode.
    pub fn mode_index(&self, ikx: usize, iky: usize, ikz: usize) -> usize {
        ikx + self.half() * (iky + self.0.n * ikz)
    }

    /// Integer wavevector of a flat spectral index.
    pub fn mode_wavevector(&self, index: usize) -> [i64; 3] {
        let h = self.half();
        let n = self.0.n;
        [
            (index % h) as i64,
            self.0.wavenumbers[(index / h) % n],
            self.0.wavenumbers[index / (h * n)],
        ]
    }

    /// Derivative wavevector of a flat spectral index (Nyquist entries zero).
    pub(crate) fn deriv_wavevector(&self, index: usize) -> [f64; 3] {
        let h = self.half();
        let n = self.0.n;
        [
            self.0.deriv[index % h],
            self.0.deriv[(index / h) % n],
            self.0.deriv[index / (h * n)],
        ]
    }

    /// Multiplicity of a stored mode in full-spectrum sums: modes with
    /// `0 < kx < n/2` stand for themselves and their conjugate partner.
    pub(crate) fn mode_weight(&self, index: usize) -> f64 {
        let kx = index % self.half();
        if kx == 0 || kx == self.0.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.n(), other.n()))
        }
    }

    /// Unnormalized-then-scaled forward transform of raw point values.
    pub(crate) fn forward_raw(&self, values: &[f64]) -> Vec<Complex64> {
        let g = &*self.0;
        let n = g.n;
        let h = self.half();
        let mut out = vec![Complex64::new(0.0, 0.0); h * n * n];
        let mut line = vec![0.0; n];
        let mut scratch = g.r2c.make_scratch_vec();
        for row in 0..n * n {
            line.copy_from_slice(&values[row * n..(row + 1) * n]);
            g.r2c
                .process_with_scratch(&mut line, &mut out[row * h..(row + 1) * h], &mut scratch)
                .expect("buffer sizes fixed by the grid");
        }
        self.complex_pass(&mut out, &g.fwd);
        let scale = 1.0 / (n * n * n) as f64;
        for c in out.iter_mut() {
            *c *= scale;
        }
        out
    }
    /// Inverse of [`Grid::forward_raw`].
    pub(crate) fn inverse_raw(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let g = &*self.0;
        let n = g.n;
        let h = self.half();
        let mut work = coeffs.to_vec();
        self.complex_pass(&mut work, &g.inv);
        let mut values = vec![0.0; n * n * n];
        let mut scratch = g.c2r.make_scratch_vec();
        for row in 0..n * n {
            let spec = &mut work[row * h..(row + 1) * h];
            spec[0].im = 0.0;
            spec[h - 1].im = 0.0;
            g.c2r
                .process_with_scratch(spec, &mut values[row * n..(row + 1) * n], &mut scratch)
                .expect("buffer sizes fixed by the grid");
        }
        values
    }
    /// Complex transforms along y then z of a half-complex array.
    fn complex_pass(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.0.n;
        let h = self.half();
        let mut batch = vec![Complex64::new(0.0, 0.0); h * n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for iz in 0..n {
            let plane = &mut data[iz * h * n..(iz + 1) * h * n];
            for iy in 0..n {
                for kx in 0..h {
                    batch[kx * n + iy] = plane[kx + h * iy];
                }
            }
            fft.process_with_scratch(&mut batch, &mut scratch);
            for iy in 0..n {
                for kx in 0..h {
                    plane[kx + h * iy] = batch[kx * n + iy];
                }
            }
        }
        for iy in 0..n {
            for iz in 0..n {
                for kx in 0..h {
                    batch[kx * n + iz] = data[kx + h * (iy + n * iz)];
                }
            }
            fft.process_with_scratch(&mut batch, &mut scratch);
            for iz in 0..n {
                for kx in 0..h {
                    data[kx + h * (iy + n * iz)] = batch[kx * n + iz];
                }
            }
        }
    }
}

/// Spectral coefficients of a real field in half-complex layout.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Grid) -> Self {
        Spectrum {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    pub(crate) fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.spectral_len());
        Spectrum {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of an arbitrary integer wavevector in the retained range.
    /// Negative `kx` are served through conjugate symmetry.
    pub fn coefficient(&self, k: [i64; 3]) -> Complex64 {
        let n = self.grid.n() as i64;
        let wrap = |k: i64| k.rem_euclid(n) as usize;
        if k[0] >= 0 && k[0] <= n / 2 {
            self.coeffs[self.grid.mode_index(k[0] as usize, wrap(k[1]), wrap(k[2]))]
        } else {
            self.coeffs[self.grid.mode_index(wrap(-k[0]), wrap(-k[1]), wrap(-k[2]))].conj()
        }
    }

    /// Full-spectrum `Σ_k |f̂_k|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.mode_weight(i) * c.norm_sqr())
            .sum()
    }

    /// Full-spectrum sum `Σ_k m(k) |f̂_k|²` for a multiplier of the integer
    /// wavevector.
    pub fn weighted_energy(&self, multiplier: impl Fn([i64; 3]) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.grid.mode_weight(i) * multiplier(self.grid.mode_wavevector(i)) * c.norm_sqr()
            })
            .sum()
    }

    /// Spectral derivative along `axis` (0 = x).
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.deriv_wavevector(i)[axis];
            *c = Complex64::new(-k * c.im, k * c.re);
        }
        out
    }

    /// Mixed derivative `∂^α` for a multi-index.
    pub fn mixed_derivative(&self, alpha: [u32; 3]) -> Spectrum {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.deriv_wavevector(i);
            let mut m = Complex64::new(1.0, 0.0);
            for axis in 0..3 {
                for _ in 0..alpha[axis] {
                    m *= Complex64::new(0.0, k[axis]);
                }
            }
            *c *= m;
        }
        out
    }

    /// Zeroes every mode with some `|k_i| > floor(n/3)`.
    pub fn dealias_in_place(&mut self) {
        let grid = self.grid.clone();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !grid.dealias_mask(grid.mode_wavevector(i)) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn to_field(&self) -> ScalarField {
        inverse_transform(self)
    }

    pub fn axpy(&mut self, a: f64, other: &Spectrum) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
    }
}

/// Real scalar field sampled on the grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples a function of the physical coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y, z] = grid.coordinates(i);
                f(x, y, z)
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Spectrum without the finiteness check of [`forward_transform`].
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_coeffs(&self.grid, self.grid.forward_raw(&self.values))
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    /// Point-wise product.
    pub fn product(&self, other: &ScalarField) -> ScalarField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        ScalarField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Three scalar components on a shared grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        components[0].grid.check_same(&components[1].grid)?;
        components[0].grid.check_same(&components[2].grid)?;
        Ok(VectorField { components })
    }

    pub(crate) fn from_parts(components: [ScalarField; 3]) -> Self {
        VectorField { components }
    }

    pub fn zeros(grid: &Grid) -> Self {
        VectorField::from_parts([
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        ])
    }

    pub fn constant(grid: &Grid, c: [f64; 3]) -> Self {
        VectorField::from_parts(c.map(|ci| ScalarField::constant(grid, ci)))
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        VectorField::from_parts([
            ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[0]),
            ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[1]),
            ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[2]),
        ])
    }

    pub fn from_spectra(spectra: &[Spectrum; 3]) -> Self {
        VectorField::from_parts([
            spectra[0].to_field(),
            spectra[1].to_field(),
            spectra[2].to_field(),
        ])
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.components[i]
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub fn spectra(&self) -> [Spectrum; 3] {
        [
            self.components[0].spectrum(),
            self.components[1].spectrum(),
            self.components[2].spectrum(),
        ]
    }

    pub fn mean(&self) -> [f64; 3] {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }

    pub fn scale(&mut self, a: f64) {
        self.components.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            c.axpy(a, o);
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub(crate) fn check_same_grid(&self, other: &VectorField) -> Result<()> {
        self.grid().check_same(other.grid())
    }
}

/// Forward transform, normalized so that the zero mode is the field mean.
pub fn forward_transform(f: &ScalarField) -> Result<Spectrum> {
    if !f.is_finite() {
        return Err(Error::NonFinite("forward transform input".into()));
    }
    Ok(f.spectrum())
}

pub fn inverse_transform(s: &Spectrum) -> ScalarField {
    ScalarField {
        grid: s.grid.clone(),
        values: s.grid.inverse_raw(&s.coeffs),
    }
}

/// Returns the dealiased copy of a spectrum.
pub fn dealias(s: &Spectrum) -> Spectrum {
    let mut out = s.clone();
    out.dealias_in_place();
    out
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    VectorField::from_parts([
        s.derivative(0).to_field(),
        s.derivative(1).to_field(),
        s.derivative(2).to_field(),
    ])
}

/// Spectrum of the divergence of a vector given by its component spectra.
pub(crate) fn divergence_spectrum(spectra: &[Spectrum; 3]) -> Spectrum {
    let grid = spectra[0].grid.clone();
    let mut out = Spectrum::zeros(&grid);
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let k = grid.deriv_wavevector(i);
        let s = spectra[0].coeffs[i] * k[0] + spectra[1].coeffs[i] * k[1] + spectra[2].coeffs[i] * k[2];
        *c = Complex64::new(-s.im, s.re);
    }
    out
}

pub fn divergence(v: &VectorField) -> ScalarField {
    divergence_spectrum(&v.spectra()).to_field()
}

pub(crate) fn curl_spectra(spectra: &[Spectrum; 3]) -> [Spectrum; 3] {
    let grid = spectra[0].grid.clone();
    let mut out = [
        Spectrum::zeros(&grid),
        Spectrum::zeros(&grid),
        Spectrum::zeros(&grid),
    ];
    let i_unit = Complex64::new(0.0, 1.0);
    for i in 0..grid.spectral_len() {
        let k = grid.deriv_wavevector(i);
        let a = [spectra[0].coeffs[i], spectra[1].coeffs[i], spectra[2].coeffs[i]];
        out[0].coeffs[i] = i_unit * (a[2] * k[1] - a[1] * k[2]);
        out[1].coeffs[i] = i_unit * (a[0] * k[2] - a[2] * k[0]);
        out[2].coeffs[i] = i_unit * (a[1] * k[0] - a[0] * k[1]);
    }
    out
}

pub fn curl(v: &VectorField) -> VectorField {
    VectorField::from_spectra(&curl_spectra(&v.spectra()))
}

/// In-place Leray projection of component spectra; the zero mode and modes
/// whose derivative wavevector vanishes pass through.
pub(crate) fn leray_project_spectra(spectra: &mut [Spectrum; 3]) {
    let grid = spectra[0].grid.clone();
    for i in 0..grid.spectral_len() {
        let k = grid.deriv_wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let dot = (spectra[0].coeffs[i] * k[0] + spectra[1].coeffs[i] * k[1] + spectra[2].coeffs[i] * k[2]) / k2;
        for (axis, s) in spectra.iter_mut().enumerate() {
            s.coeffs[i] -= dot * k[axis];
        }
    }
}

pub fn leray_project(v: &VectorField) -> VectorField {
    let mut spectra = v.spectra();
    leray_project_spectra(&mut spectra);
    VectorField::from_spectra(&spectra)
}

/// Spectral Laplacian with the full `−|k|²` multiplier.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut s = f.spectrum();
    let grid = s.grid.clone();
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        let k = grid.mode_wavevector(i);
        *c *= -((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64);
    }
    s.to_field()
}

pub(crate) fn solve_poisson_spectrum(g: &Spectrum) -> Spectrum {
    let grid = g.grid.clone();
    let mut out = g.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let k = grid.mode_wavevector(i);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= k2;
        }
    }
    out
}

/// Mean-zero solution `p` of `−Δp = g`.
pub fn solve_poisson(g: &ScalarField) -> Result<ScalarField> {
    let s = forward_transform(g)?;
    let mean = s.coeffs[0].re;
    if mean.abs() >= tolerances::POISSON_MEAN {
        return Err(Error::NonZeroMean(mean));
    }
    Ok(solve_poisson_spectrum(&s).to_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, values).unwrap()
    }

    fn random_vector(grid: &Grid, seed: u64) -> VectorField {
        VectorField::from_parts([
            random_field(grid, seed),
            random_field(grid, seed + 1),
            random_field(grid, seed + 2),
        ])
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(Grid::new(7), Err(Error::InvalidGrid(7))));
        assert!(matches!(Grid::new(6), Err(Error::InvalidGrid(6))));
        assert!(matches!(Grid::new(9), Err(Error::InvalidGrid(9))));
        let g = Grid::new(8).unwrap();
        assert_eq!(g.wavenumbers(), &[0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.dealias_cutoff(), 2);
    }

    #[test]
    fn dealias_mask_is_symmetric() {
        let g = Grid::new(16).unwrap();
        for &a in g.wavenumbers() {
            for &b in g.wavenumbers() {
                for &c in g.wavenumbers() {
                    assert_eq!(g.dealias_mask([a, b, c]), g.dealias_mask([-a, -b, -c]));
                }
            }
        }
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = Grid::new(8).unwrap();
        let s = forward_transform(&ScalarField::zeros(&g)).unwrap();
        assert!(s.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn sine_has_two_modes_of_half_modulus() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(&g, |x, _, _| x.sin());
        let s = forward_transform(&f).unwrap();
        for (i, c) in s.coeffs().iter().enumerate() {
            let k = g.mode_wavevector(i);
            if k == [1, 0, 0] {
                assert!((c.norm() - 0.5).abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14, "mode {k:?} = {c}");
            }
        }
        assert!((s.coefficient([-1, 0, 0]).norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_input() {
        let g = Grid::new(8).unwrap();
        let mut f = ScalarField::zeros(&g);
        f.values_mut()[3] = f64::NAN;
        assert!(matches!(forward_transform(&f), Err(Error::NonFinite(_))));
    }

    #[test]
    fn round_trip_and_parseval_all_sizes() {
        for n in [8, 16, 32, 64] {
            let g = Grid::new(n).unwrap();
            let f = random_field(&g, n as u64);
            let s = forward_transform(&f).unwrap();
            let back = inverse_transform(&s);
            let norm = f.max_abs();
            assert!(max_diff(&f, &back) / norm < tolerances::ROUND_TRIP);
            let mean_sq = f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
            assert!((s.energy() - mean_sq).abs() / mean_sq < 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_and_sine() {
        let g = Grid::new(16).unwrap();
        let grad = gradient(&ScalarField::constant(&g, 3.5));
        assert!(grad.components().iter().all(|c| c.max_abs() < 1e-14));
        let grad = gradient(&ScalarField::from_fn(&g, |x, _, _| x.sin()));
        let expected = ScalarField::from_fn(&g, |x, _, _| x.cos());
        assert!(max_diff(grad.component(0), &expected) < tolerances::SPECTRAL_EXACT);
        assert!(grad.component(1).max_abs() < tolerances::SPECTRAL_EXACT);
        assert!(grad.component(2).max_abs() < tolerances::SPECTRAL_EXACT);
    }

    #[test]
    fn divergence_examples() {
        let g = Grid::new(16).unwrap();
        let shear = VectorField::from_fn(&g, |_, y, _| [y.sin(), 0.0, 0.0]);
        assert!(divergence(&shear).max_abs() < tolerances::SPECTRAL_EXACT);
        let grad = gradient(&ScalarField::from_fn(&g, |x, _, _| x.sin()));
        let expected = ScalarField::from_fn(&g, |x, _, _| -x.sin());
        assert!(max_diff(&divergence(&grad), &expected) < tolerances::SPECTRAL_EXACT);
    }

    #[test]
    fn curl_examples() {
        let g = Grid::new(16).unwrap();
        let v = VectorField::from_fn(&g, |x, _, _| [0.0, 0.0, x.sin()]);
        let w = curl(&v);
        let expected = ScalarField::from_fn(&g, |x, _, _| -x.cos());
        assert!(w.component(0).max_abs() < tolerances::SPECTRAL_EXACT);
        assert!(max_diff(w.component(1), &expected) < tolerances::SPECTRAL_EXACT);
        assert!(w.component(2).max_abs() < tolerances::SPECTRAL_EXACT);
    }

    #[test]
    fn leray_projection_properties() {
        let g = Grid::new(16).unwrap();
        let grad = gradient(&ScalarField::from_fn(&g, |x, _, _| x.sin()));
        let p = leray_project(&grad);
        assert!(p.components().iter().all(|c| c.max_abs() < tolerances::SPECTRAL_EXACT));

        let v = random_vector(&g, 11);
        let pv = leray_project(&v);
        assert!(divergence(&pv).max_abs() < tolerances::SPECTRAL_EXACT);
        let ppv = leray_project(&pv);
        for i in 0..3 {
            assert!(max_diff(pv.component(i), ppv.component(i)) < tolerances::SPECTRAL_EXACT);
        }
        // mean passes through
        let m = v.mean();
        let pm = pv.mean();
        for i in 0..3 {
            assert!((m[i] - pm[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn poisson_examples() {
        let g = Grid::new(16).unwrap();
        let p = solve_poisson(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(p.max_abs(), 0.0);
        let sine = ScalarField::from_fn(&g, |x, _, _| x.sin());
        let p = solve_poisson(&sine).unwrap();
        assert!(max_diff(&p, &sine) < tolerances::SPECTRAL_EXACT);

        let mut r = random_field(&g, 5);
        let mean = r.mean();
        r.values_mut().iter_mut().for_each(|v| *v -= mean);
        let p = solve_poisson(&r).unwrap();
        let mut residual = laplacian(&p);
        residual.scale(-1.0);
        assert!(max_diff(&residual, &r) < tolerances::SPECTRAL_SOLVE);
        assert!(p.mean().abs() < 1e-14);

        let shifted = ScalarField::constant(&g, 0.5);
        assert!(matches!(solve_poisson(&shifted), Err(Error::NonZeroMean(_))));
    }

    #[test]
    fn dealias_examples() {
        let g = Grid::new(16).unwrap();
        let band = ScalarField::from_fn(&g, |x, y, z| (5.0 * x).sin() * (3.0 * y).cos() + z.cos());
        let s = band.spectrum();
        let d = dealias(&s);
        for (a, b) in s.coeffs().iter().zip(d.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
        let nyquist = ScalarField::from_fn(&g, |x, _, _| (8.0 * x).cos());
        assert!(dealias(&nyquist.spectrum()).energy() == 0.0);
        let r = random_field(&g, 9).spectrum();
        assert!(dealias(&r).energy() <= r.energy());
    }
}
