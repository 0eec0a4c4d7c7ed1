//! Right-hand sides of the reduced system
//!
//! ```text
//! ∂t u   + (u·∇)u   = −∇p + Σ_k (F_k·∇)F_k,   ∇·u = 0
//! ∂t F_k + (u·∇)F_k = (F_k·∇)u
//! ```
//!
//! with pressure eliminated by Leray projection, plus classical RK4 stepping.
//! Quadratic terms are formed point-wise from spectral derivatives and then
//! truncated by the 2/3 rule; for states inside the retained band this is an
//! exact Galerkin truncation.

use crate::error::{Error, Result};
use crate::fields::{DeformationGradient, GradientTensor, State};
use crate::spectral::{self, Grid, ScalarField, Spectrum, VectorField};
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    FixedDt,
    Cfl,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepControl {
    pub mode: StepMode,
    pub dt: f64,
    pub cfl_number: f64,
    pub t_end: f64,
    pub max_steps: u64,
}

impl StepControl {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        StepControl {
            mode: StepMode::FixedDt,
            dt,
            cfl_number: 0.5,
            t_end,
            max_steps: u64::MAX,
        }
    }

    pub fn cfl(cfl_number: f64, t_end: f64) -> Self {
        StepControl {
            mode: StepMode::Cfl,
            dt: 0.0,
            cfl_number,
            t_end,
            max_steps: u64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        match self.mode {
            StepMode::FixedDt if !(self.dt > 0.0) || !self.dt.is_finite() => Err(Error::InvalidArgument(
                format!("dt must be positive in fixed mode, got {}", self.dt),
            )),
            StepMode::Cfl if !(self.cfl_number > 0.0 && self.cfl_number <= 1.0) => Err(
                Error::InvalidArgument(format!("cfl_number must lie in (0, 1], got {}", self.cfl_number)),
            ),
            _ => Ok(()),
        }
    }
}

/// Time derivative of a [`State`].
#[derive(Clone, Debug)]
pub struct StateDerivative {
    pub du: VectorField,
    pub df: DeformationGradient,
}

/// Adds `sign · (a·∇)b` point-wise, with `jb` the Jacobian of `b`.
fn accumulate_advection(out: &mut [ScalarField; 3], sign: f64, a: &VectorField, jb: &GradientTensor) {
    let [a0, a1, a2] = a.components();
    let (a0, a1, a2) = (a0.values(), a1.values(), a2.values());
    for (row, target) in out.iter_mut().enumerate() {
        let (d0, d1, d2) = (
            jb.entry(row, 0).values(),
            jb.entry(row, 1).values(),
            jb.entry(row, 2).values(),
        );
        for (i, t) in target.values_mut().iter_mut().enumerate() {
            *t += sign * (a0[i] * d0[i] + a1[i] * d1[i] + a2[i] * d2[i]);
        }
    }
}

fn dealiased_spectra(parts: &[ScalarField; 3]) -> [Spectrum; 3] {
    let mut s = [parts[0].spectrum(), parts[1].spectrum(), parts[2].spectrum()];
    s.iter_mut().for_each(Spectrum::dealias_in_place);
    s
}

fn zeros3(grid: &Grid) -> [ScalarField; 3] {
    [
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    ]
}

/// Jacobians of `u` and of every column of `F`.
pub(crate) struct StateGradients {
    pub ju: GradientTensor,
    pub jf: [GradientTensor; 3],
}

impl StateGradients {
    pub fn of(state: &State) -> Self {
        StateGradients {
            ju: GradientTensor::of(&state.u),
            jf: [
                GradientTensor::of(state.f.column(0)),
                GradientTensor::of(state.f.column(1)),
                GradientTensor::of(state.f.column(2)),
            ],
        }
    }
}

/// Dealiased spectra of `−(u·∇)u + Σ_k (F_k·∇)F_k` before projection.
fn momentum_forcing(state: &State, grads: &StateGradients) -> [Spectrum; 3] {
    let mut acc = zeros3(state.grid());
    accumulate_advection(&mut acc, -1.0, &state.u, &grads.ju);
    for k in 0..3 {
        accumulate_advection(&mut acc, 1.0, state.f.column(k), &grads.jf[k]);
    }
    dealiased_spectra(&acc)
}

/// Dealiased spectra of `−(u·∇)F_k + (F_k·∇)u`.
fn column_forcing(state: &State, grads: &StateGradients, k: usize) -> [Spectrum; 3] {
    let mut acc = zeros3(state.grid());
    accumulate_advection(&mut acc, -1.0, &state.u, &grads.jf[k]);
    accumulate_advection(&mut acc, 1.0, state.f.column(k), &grads.ju);
    dealiased_spectra(&acc)
}

fn finite_or(v: VectorField, what: &str) -> Result<VectorField> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// Projected momentum right-hand side `P[−(u·∇)u + Σ_k (F_k·∇)F_k]`.
pub fn rhs_velocity(state: &State) -> Result<VectorField> {
    let grads = StateGradients::of(state);
    let mut s = momentum_forcing(state, &grads);
    spectral::leray_project_spectra(&mut s);
    finite_or(VectorField::from_spectra(&s), "velocity right-hand side")
}

/// Unprojected momentum forcing in physical space.
pub fn rhs_velocity_unprojected(state: &State) -> Result<VectorField> {
    let grads = StateGradients::of(state);
    let s = momentum_forcing(state, &grads);
    finite_or(VectorField::from_spectra(&s), "velocity forcing")
}

/// `−(u·∇)F_k + (F_k·∇)u` for a zero-based column index.
pub fn rhs_deformation_column(state: &State, k: usize) -> Result<VectorField> {
    if k >= 3 {
        return Err(Error::InvalidArgument(format!("column index {k} out of range")));
    }
    let grads = StateGradients::of(state);
    let s = column_forcing(state, &grads, k);
    finite_or(VectorField::from_spectra(&s), &format!("F_{} right-hand side", k + 1))
}

/// Full time derivative, sharing one set of gradients between all terms.
pub fn rhs(state: &State) -> Result<StateDerivative> {
    let grads = StateGradients::of(state);
    let mut su = momentum_forcing(state, &grads);
    spectral::leray_project_spectra(&mut su);
    let du = finite_or(VectorField::from_spectra(&su), "u")?;
    let mut cols = Vec::with_capacity(3);
    for k in 0..3 {
        let s = column_forcing(state, &grads, k);
        cols.push(finite_or(VectorField::from_spectra(&s), &format!("F_{}", k + 1))?);
    }
    let cols: [VectorField; 3] = cols.try_into().expect("three columns");
    Ok(StateDerivative {
        du,
        df: DeformationGradient::new(cols)?,
    })
}

/// Incompressible Euler right-hand side `−P[(u·∇)u]`, assembled through the
/// public operators only.
pub fn euler_rhs(u: &VectorField) -> VectorField {
    let grid = u.grid();
    let mut parts = zeros3(grid);
    for (a, part) in parts.iter_mut().enumerate() {
        let g = spectral::gradient(u.component(a));
        for b in 0..3 {
            part.axpy(-1.0, &u.component(b).product(g.component(b)));
        }
    }
    let mut spectra = parts.map(|p| spectral::dealias(&p.spectrum()));
    spectral::leray_project_spectra(&mut spectra);
    VectorField::from_spectra(&spectra)
}

/// Mean-zero pressure with `−Δp = ∇·[(u·∇)u − Σ_k (F_k·∇)F_k]`.
pub fn recover_pressure(state: &State) -> Result<ScalarField> {
    let grads = StateGradients::of(state);
    let mut forcing = momentum_forcing(state, &grads);
    forcing.iter_mut().for_each(|s| {
        s.coeffs_mut().iter_mut().for_each(|c| *c = -*c);
    });
    let div = spectral::divergence_spectrum(&forcing);
    let p = spectral::solve_poisson_spectrum(&div).to_field();
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::NonFinite("pressure".into()))
    }
}

fn offset(state: &State, dt: f64, d: &StateDerivative) -> State {
    let mut s = state.clone();
    s.u.axpy(dt, &d.du);
    s.f.axpy(dt, &d.df);
    s
}

/// One classical RK4 step. The velocity is re-projected after the final
/// combination; the columns of `F` are not.
pub fn step_rk4(state: &State, dt: f64) -> Result<State> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let k1 = rhs(state)?;
    let k2 = rhs(&offset(state, 0.5 * dt, &k1))?;
    let k3 = rhs(&offset(state, 0.5 * dt, &k2))?;
    let k4 = rhs(&offset(state, dt, &k3))?;
    let mut next = state.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        next.u.axpy(w * dt / 6.0, &k.du);
        next.f.axpy(w * dt / 6.0, &k.df);
    }
    next.u = spectral::leray_project(&next.u);
    next.time = state.time + dt;
    if let Some(name) = next.first_non_finite() {
        return Err(Error::NonFinite(name));
    }
    Ok(next)
}

/// Step size for the next step; lands exactly on `t_end`.
pub fn choose_dt(state: &State, ctl: &StepControl, grid: &Grid) -> f64 {
    let dt = match ctl.mode {
        StepMode::FixedDt => ctl.dt,
        StepMode::Cfl => {
            let speed = crate::fields::sup_norm(&state.u)
                + state
                    .f
                    .columns()
                    .iter()
                    .map(crate::fields::sup_norm)
                    .sum::<f64>();
            ctl.cfl_number * grid.spacing() / (speed + tolerances::CFL_FLOOR)
        }
    };
    let remaining = ctl.t_end - state.time;
    if dt >= remaining {
        remaining.max(0.0)
    } else {
        dt
    }
}

/// Fraction of fluctuation energy (all modes but `k = 0`, over `u` and every
/// `F_k`) sitting in the top third of the retained band, i.e. modes with
/// `max_i |k_i| > 2/3 · floor(n/3)`.
pub fn tail_energy_fraction(state: &State) -> f64 {
    let grid = state.grid();
    let threshold = 2.0 * grid.dealias_cutoff() as f64 / 3.0;
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut visit = |v: &VectorField| {
        for s in v.spectra() {
            total += s.weighted_energy(|k| if k == [0, 0, 0] { 0.0 } else { 1.0 });
            tail += s.weighted_energy(|k| {
                if k.iter().map(|ki| ki.abs()).max().unwrap_or(0) as f64 > threshold {
                    1.0
                } else {
                    0.0
                }
            });
        }
    };
    visit(&state.u);
    for c in state.f.columns() {
        visit(c);
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}
