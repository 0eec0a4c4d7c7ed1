//! Dynamical state, initial data and the norms used by the monitors.

use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, Grid, ScalarField, Spectrum, VectorField};
use crate::tolerances;

/// The deformation gradient stored as its three columns `F_k = F e_k`.
#[derive(Clone, Debug)]
pub struct DeformationGradient {
    columns: [VectorField; 3],
}

impl DeformationGradient {
    pub fn new(columns: [VectorField; 3]) -> Result<Self> {
        columns[0].check_same_grid(&columns[1])?;
        columns[0].check_same_grid(&columns[2])?;
        Ok(DeformationGradient { columns })
    }

    pub fn identity(grid: &Grid) -> Self {
        DeformationGradient {
            columns: [
                VectorField::constant(grid, [1.0, 0.0, 0.0]),
                VectorField::constant(grid, [0.0, 1.0, 0.0]),
                VectorField::constant(grid, [0.0, 0.0, 1.0]),
            ],
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        DeformationGradient {
            columns: [
                VectorField::zeros(grid),
                VectorField::zeros(grid),
                VectorField::zeros(grid),
            ],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.columns[0].grid()
    }

    pub fn columns(&self) -> &[VectorField; 3] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &VectorField {
        &self.columns[k]
    }

    pub fn column_mut(&mut self, k: usize) -> &mut VectorField {
        &mut self.columns[k]
    }

    pub fn axpy(&mut self, a: f64, other: &DeformationGradient) {
        for (c, o) in self.columns.iter_mut().zip(&other.columns) {
            c.axpy(a, o);
        }
    }
}

/// Time plus velocity and deformation gradient.
#[derive(Clone, Debug)]
pub struct State {
    pub time: f64,
    pub u: VectorField,
    pub f: DeformationGradient,
}

impl State {
    pub fn new(time: f64, u: VectorField, f: DeformationGradient) -> Result<Self> {
        u.check_same_grid(f.column(0))?;
        Ok(State { time, u, f })
    }

    /// `u = 0`, `F = I`.
    pub fn equilibrium(grid: &Grid) -> Self {
        State {
            time: 0.0,
            u: VectorField::zeros(grid),
            f: DeformationGradient::identity(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.f.columns().iter().all(VectorField::is_finite)
    }

    /// Name of the first field holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<String> {
        if !self.u.is_finite() {
            return Some("u".into());
        }
        (0..3)
            .find(|&k| !self.f.column(k).is_finite())
            .map(|k| format!("F_{}", k + 1))
    }

    pub fn sup_div_u(&self) -> f64 {
        spectral::divergence(&self.u).max_abs()
    }

    /// Largest divergence sup-norm over the three columns.
    pub fn sup_div_f(&self) -> f64 {
        self.f
            .columns()
            .iter()
            .map(|c| spectral::divergence(c).max_abs())
            .fold(0.0, f64::max)
    }

    /// `½(‖u‖² + Σ_k ‖F_k‖²)`.
    pub fn energy(&self) -> f64 {
        let mut e = l2_norm(&self.u).powi(2);
        for c in self.f.columns() {
            e += l2_norm(c).powi(2);
        }
        0.5 * e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    TaylorGreen,
    AbcFlow,
    RandomBandLimited,
    FromCheckpoint,
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "taylor_green" => Ok(InitialKind::TaylorGreen),
            "abc_flow" => Ok(InitialKind::AbcFlow),
            "random_band_limited" => Ok(InitialKind::RandomBandLimited),
            "from_checkpoint" => Ok(InitialKind::FromCheckpoint),
            other => Err(format!("unknown initial kind `{other}`")),
        }
    }
}

impl InitialKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialKind::TaylorGreen => "taylor_green",
            InitialKind::AbcFlow => "abc_flow",
            InitialKind::RandomBandLimited => "random_band_limited",
            InitialKind::FromCheckpoint => "from_checkpoint",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub f_perturbation_amplitude: f64,
    pub spectrum_exponent: f64,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl InitialCondition {
    pub fn new(kind: InitialKind) -> Self {
        InitialCondition {
            kind,
            amplitude: 1.0,
            f_perturbation_amplitude: 0.0,
            spectrum_exponent: -2.0,
            seed: 0,
            path: None,
        }
    }

    pub fn taylor_green() -> Self {
        Self::new(InitialKind::TaylorGreen)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_f_perturbation(mut self, amplitude: f64) -> Self {
        self.f_perturbation_amplitude = amplitude;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_spectrum_exponent(mut self, exponent: f64) -> Self {
        self.spectrum_exponent = exponent;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be a finite nonnegative number, got {}",
                self.amplitude
            )));
        }
        if !(self.f_perturbation_amplitude >= 0.0) || !self.f_perturbation_amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "f_perturbation_amplitude must be a finite nonnegative number, got {}",
                self.f_perturbation_amplitude
            )));
        }
        if !self.spectrum_exponent.is_finite() {
            return Err(Error::InvalidArgument("spectrum_exponent must be finite".into()));
        }
        if self.kind == InitialKind::FromCheckpoint && self.path.is_none() {
            return Err(Error::InvalidArgument("from_checkpoint requires a path".into()));
        }
        Ok(())
    }
}

/// Largest `|k_i|` of random initial data: half the retained band, so the
/// initial spectrum sits below the resolution monitor's tail region.
pub fn initial_band(grid: &Grid) -> usize {
    (grid.dealias_cutoff() / 2).max(1)
}

/// Taylor–Green velocity `(sin x cos y cos z, −cos x sin y cos z, 0)`.
pub fn taylor_green(grid: &Grid) -> VectorField {
    VectorField::from_fn(grid, |x, y, z| {
        [
            x.sin() * y.cos() * z.cos(),
            -x.cos() * y.sin() * z.cos(),
            0.0,
        ]
    })
}

/// ABC flow with `A = B = C = 1`.
pub fn abc_flow(grid: &Grid) -> VectorField {
    VectorField::from_fn(grid, |x, y, z| {
        [
            z.sin() + y.cos(),
            x.sin() + z.cos(),
            y.sin() + x.cos(),
        ]
    })
}

fn random_spectrum(grid: &Grid, exponent: f64, band: usize, rng: &mut ChaCha8Rng) -> Spectrum {
    let mut s = Spectrum::zeros(grid);
    let band = band as i64;
    for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
        let k = grid.mode_wavevector(i);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        if k == [0, 0, 0] || k.iter().any(|ki| ki.abs() > band) {
            continue;
        }
        let kmag = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        *c = Complex64::new(re, im) * kmag.powf(exponent);
    }
    // round trip through physical space enforces conjugate symmetry
    let mut s = s.to_field().spectrum();
    for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
        let k = grid.mode_wavevector(i);
        if k == [0, 0, 0] || k.iter().any(|ki| ki.abs() > band) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    s
}

fn rms(v: &VectorField) -> f64 {
    let grid = v.grid();
    let sum: f64 = (0..grid.len())
        .map(|i| {
            v.components()
                .iter()
                .map(|c| c.values()[i].powi(2))
                .sum::<f64>()
        })
        .sum();
    (sum / grid.len() as f64).sqrt()
}

/// Random mean-zero divergence-free field with Gaussian mode amplitudes
/// `|k|^exponent` on `|k_i| ≤ band`, normalized to unit rms magnitude.
pub fn random_solenoidal(grid: &Grid, exponent: f64, band: usize, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectra = [
        random_spectrum(grid, exponent, band, &mut rng),
        random_spectrum(grid, exponent, band, &mut rng),
        random_spectrum(grid, exponent, band, &mut rng),
    ];
    spectral::leray_project_spectra(&mut spectra);
    let mut v = VectorField::from_spectra(&spectra);
    let r = rms(&v);
    if r > 0.0 {
        v.scale(1.0 / r);
    }
    v
}

/// Random mean-zero scalar with unit rms, same spectral recipe as
/// [`random_solenoidal`].
pub fn random_scalar(grid: &Grid, exponent: f64, band: usize, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = random_spectrum(grid, exponent, band, &mut rng).to_field();
    let r = (f.values().iter().map(|v| v * v).sum::<f64>() / grid.len() as f64).sqrt();
    if r > 0.0 {
        f.scale(1.0 / r);
    }
    f
}

/// Builds the initial state: the named flow scaled and Leray-projected, and
/// `F = I` plus a projected random perturbation per column.
pub fn make_initial(ic: &InitialCondition, grid: &Grid) -> Result<State> {
    ic.validate()?;
    if ic.kind == InitialKind::FromCheckpoint {
        let path = ic.path.as_ref().expect("validated");
        let state = crate::io::read_checkpoint(path)?;
        if state.grid() != grid {
            return Err(Error::GridMismatch(grid.n(), state.grid().n()));
        }
        return Ok(state);
    }
    let mut u = match ic.kind {
        InitialKind::TaylorGreen => taylor_green(grid),
        InitialKind::AbcFlow => abc_flow(grid),
        InitialKind::RandomBandLimited => {
            random_solenoidal(grid, ic.spectrum_exponent, initial_band(grid), ic.seed)
        }
        InitialKind::FromCheckpoint => unreachable!(),
    };
    u.scale(ic.amplitude);
    let u = spectral::leray_project(&u);

    let mut f = DeformationGradient::identity(grid);
    if ic.f_perturbation_amplitude > 0.0 {
        for k in 0..3 {
            let seed = ic.seed.wrapping_add(0x9E37_79B9).wrapping_add(k as u64);
            let p = random_solenoidal(grid, ic.spectrum_exponent, initial_band(grid), seed);
            f.column_mut(k).axpy(ic.f_perturbation_amplitude, &p);
        }
    }
    State::new(0.0, u, f)
}

/// Continuum `L²` norm by the (spectrally exact) trapezoidal rule.
pub fn l2_norm(v: &VectorField) -> f64 {
    let grid = v.grid();
    let sum: f64 = v
        .components()
        .iter()
        .map(|c| c.values().iter().map(|x| x * x).sum::<f64>())
        .sum();
    (sum / grid.len() as f64 * grid.volume()).sqrt()
}

/// Grid maximum of the Euclidean magnitude. Understates the continuum
/// supremum between nodes.
pub fn sup_norm(v: &VectorField) -> f64 {
    let [a, b, c] = v.components();
    a.values()
        .iter()
        .zip(b.values())
        .zip(c.values())
        .fold(0.0f64, |m, ((x, y), z)| m.max(x * x + y * y + z * z))
        .sqrt()
}

/// Inhomogeneous Sobolev norm with multiplier `(1 + |k|²)^s`.
pub fn sobolev_norm(v: &VectorField, s: u32) -> Result<f64> {
    if s > tolerances::MAX_SOBOLEV_INDEX {
        return Err(Error::InvalidArgument(format!(
            "sobolev index {s} exceeds {}",
            tolerances::MAX_SOBOLEV_INDEX
        )));
    }
    let volume = v.grid().volume();
    let total: f64 = v
        .spectra()
        .iter()
        .map(|sp| {
            sp.weighted_energy(|k| (1.0 + (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).powi(s as i32))
        })
        .sum();
    Ok((total * volume).sqrt())
}

/// Jacobian `J[a][b] = ∂_b v_a`.
#[derive(Clone, Debug)]
pub struct GradientTensor {
    entries: [[ScalarField; 3]; 3],
}

impl GradientTensor {
    pub fn of(v: &VectorField) -> Self {
        let spectra = v.spectra();
        Self::from_spectra(&spectra)
    }

    pub(crate) fn from_spectra(spectra: &[Spectrum; 3]) -> Self {
        let row = |s: &Spectrum| {
            [
                s.derivative(0).to_field(),
                s.derivative(1).to_field(),
                s.derivative(2).to_field(),
            ]
        };
        GradientTensor {
            entries: [row(&spectra[0]), row(&spectra[1]), row(&spectra[2])],
        }
    }

    /// `∂_col v_row`.
    pub fn entry(&self, row: usize, col: usize) -> &ScalarField {
        &self.entries[row][col]
    }

    /// The 3×3 matrix at one grid point.
    pub fn at(&self, index: usize) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.entries[a][b].values()[index];
            }
        }
        m
    }

    /// Grid maximum of the point-wise Frobenius norm.
    pub fn sup_norm(&self) -> f64 {
        let len = self.entries[0][0].values().len();
        (0..len)
            .map(|i| {
                self.entries
                    .iter()
                    .flatten()
                    .map(|e| e.values()[i].powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
            .sqrt()
    }
}

/// Point-wise `det F` with `F_k` as columns.
pub fn determinant_field(f: &DeformationGradient) -> ScalarField {
    let grid = f.grid();
    let c = f.columns();
    let values = (0..grid.len())
        .map(|i| {
            let m = |row: usize, col: usize| c[col].component(row).values()[i];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        })
        .collect();
    ScalarField::from_values(grid, values).expect("length matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn taylor_green_initial_state() {
        let g = grid(16);
        let s = make_initial(&InitialCondition::taylor_green(), &g).unwrap();
        let exact = taylor_green(&g);
        for i in 0..3 {
            let d = s.u.component(i).sub(exact.component(i)).max_abs();
            assert!(d < 1e-14);
        }
        assert!(s.sup_div_u() < tolerances::INITIAL_DIVERGENCE);
        assert!(s.sup_div_f() < tolerances::INITIAL_DIVERGENCE);
    }

    #[test]
    fn unperturbed_f_is_identity_with_unit_determinant() {
        let g = grid(8);
        for kind in [
            InitialKind::TaylorGreen,
            InitialKind::AbcFlow,
            InitialKind::RandomBandLimited,
        ] {
            let s = make_initial(&InitialCondition::new(kind), &g).unwrap();
            for k in 0..3 {
                for a in 0..3 {
                    let expected = if a == k { 1.0 } else { 0.0 };
                    assert!(s.f.column(k).component(a).values().iter().all(|&v| v == expected));
                }
            }
            let det = determinant_field(&s.f);
            assert!(det.values().iter().all(|&d| d == 1.0));
        }
    }

    #[test]
    fn random_generation_is_deterministic() {
        let g = grid(16);
        let ic = InitialCondition::new(InitialKind::RandomBandLimited)
            .with_seed(42)
            .with_f_perturbation(0.3);
        let a = make_initial(&ic, &g).unwrap();
        let b = make_initial(&ic, &g).unwrap();
        for i in 0..3 {
            assert_eq!(a.u.component(i).values(), b.u.component(i).values());
            for k in 0..3 {
                assert_eq!(
                    a.f.column(k).component(i).values(),
                    b.f.column(k).component(i).values()
                );
            }
        }
        assert!(a.sup_div_u() < tolerances::INITIAL_DIVERGENCE);
        assert!(a.sup_div_f() < tolerances::INITIAL_DIVERGENCE);
        let c = make_initial(&ic.clone().with_seed(43), &g).unwrap();
        assert_ne!(a.u.component(0).values(), c.u.component(0).values());
    }

    #[test]
    fn rejects_negative_amplitude_and_missing_path() {
        let g = grid(8);
        let ic = InitialCondition::taylor_green().with_amplitude(-1.0);
        assert!(make_initial(&ic, &g).is_err());
        let ic = InitialCondition::new(InitialKind::FromCheckpoint);
        assert!(make_initial(&ic, &g).is_err());
        let mut ic = InitialCondition::new(InitialKind::FromCheckpoint);
        ic.path = Some("/nonexistent/state.ivbk".into());
        assert!(matches!(make_initial(&ic, &g), Err(Error::Io { .. })));
        assert!("vortex_sheet".parse::<InitialKind>().is_err());
    }

    #[test]
    fn l2_norm_examples() {
        let g = grid(16);
        assert_eq!(l2_norm(&VectorField::zeros(&g)), 0.0);
        let tg = l2_norm(&taylor_green(&g));
        assert!((tg - (2.0 * PI.powi(3)).sqrt()).abs() < 1e-12);
        assert!((tg - 7.8748).abs() < 1e-4);
        let s = VectorField::from_fn(&g, |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!((l2_norm(&s) - (4.0 * PI.powi(3)).sqrt()).abs() < 1e-12);
        assert!((l2_norm(&s) - 11.1366).abs() < 1e-4);
    }

    #[test]
    fn sup_norm_examples() {
        let g = grid(8);
        assert_eq!(sup_norm(&VectorField::zeros(&g)), 0.0);
        let s = VectorField::from_fn(&g, |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!((sup_norm(&s) - 1.0).abs() < 1e-15);
        let w = spectral::curl(&taylor_green(&grid(16)));
        assert!((sup_norm(&w) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid(16);
        let v = random_solenoidal(&g, -2.0, 4, 3);
        let h0 = sobolev_norm(&v, 0).unwrap();
        assert!((h0 - l2_norm(&v)).abs() / h0 < 1e-12);
        let s = VectorField::from_fn(&g, |x, _, _| [x.sin(), 0.0, 0.0]);
        let h3 = sobolev_norm(&s, 3).unwrap();
        assert!((h3 - (32.0 * PI.powi(3)).sqrt()).abs() < 1e-11);
        assert!((h3 - 31.50).abs() < 5e-3);
        let h2 = sobolev_norm(&v, 2).unwrap();
        let h3 = sobolev_norm(&v, 3).unwrap();
        assert!(h3 >= h2 && h2 >= h0);
        assert!(sobolev_norm(&v, 7).is_err());
    }

    #[test]
    fn determinant_multilinear() {
        let g = grid(8);
        let mut f = DeformationGradient::identity(&g);
        f.column_mut(1).scale(2.0);
        assert!(determinant_field(&f).values().iter().all(|&d| d == 2.0));
    }

    #[test]
    fn gradient_tensor_layout() {
        let g = grid(16);
        let v = VectorField::from_fn(&g, |x, y, _| [y.sin(), x.sin(), 0.0]);
        let j = GradientTensor::of(&v);
        let expected = ScalarField::from_fn(&g, |_, y, _| y.cos());
        assert!(j.entry(0, 1).sub(&expected).max_abs() < 1e-12);
        assert!(j.entry(0, 0).max_abs() < 1e-12);
        assert!((j.sup_norm() - 2f64.sqrt()).abs() < 1e-12);
    }
}
