//! Curl dynamics of the velocity and deformation columns.
//!
//! With `w = ∇×u` and `r_k = ∇×F_k`,
//!
//! ```text
//! ∂t w   + (u·∇)w   = Σ_k (F_k·∇)r_k − S,   S   = a(∇u,∇u) − Σ_k a(∇F_k,∇F_k)
//! ∂t r_k + (u·∇)r_k = (F_k·∇)w − T_k,       T_k = a(∇u,∇F_k) − a(∇F_k,∇u)
//! ```
//!
//! where `a(X,Y) = Σ_i (Xᵗe_i) × (Y e_i)` and `∇v` is the Jacobian
//! `(∇v)_{ab} = ∂_b v_a`. This module also hosts the commutator
//! `∂^α(fg) − f ∂^α g` and the survey of its Moser-type bound.

use crate::dynamics::{self, StateGradients};
use crate::error::{Error, Result};
use crate::fields::{self, GradientTensor, State};
use crate::spectral::{self, Grid, ScalarField, Spectrum, VectorField};
use crate::tolerances;

pub type Matrix3 = [[f64; 3]; 3];

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `a(X, Y) = Σ_i (Xᵗ e_i) × (Y e_i)`: row `i` of `X` crossed with column
/// `i` of `Y`.
pub fn bilinear_a(x: &Matrix3, y: &Matrix3) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let row = x[i];
        let col = [y[0][i], y[1][i], y[2][i]];
        let c = cross(row, col);
        for (o, ci) in out.iter_mut().zip(c) {
            *o += ci;
        }
    }
    out
}

/// Adds `sign · a(X, Y)` point-wise into `out`.
fn accumulate_a(out: &mut [ScalarField; 3], sign: f64, x: &GradientTensor, y: &GradientTensor) {
    let len = out[0].values().len();
    let xs: Vec<&[f64]> = (0..9).map(|e| x.entry(e / 3, e % 3).values()).collect();
    let ys: Vec<&[f64]> = (0..9).map(|e| y.entry(e / 3, e % 3).values()).collect();
    let mut acc = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        let mut s = [0.0; 3];
        for i in 0..3 {
            let row = [xs[3 * i][p], xs[3 * i + 1][p], xs[3 * i + 2][p]];
            let col = [ys[i][p], ys[3 + i][p], ys[6 + i][p]];
            let c = cross(row, col);
            s[0] += c[0];
            s[1] += c[1];
            s[2] += c[2];
        }
        for l in 0..3 {
            acc[l][p] = s[l];
        }
    }
    for (o, a) in out.iter_mut().zip(acc.iter()) {
        for (v, d) in o.values_mut().iter_mut().zip(a) {
            *v += sign * d;
        }
    }
}

/// Point-wise `a(∇u, ∇v)` without dealiasing.
pub fn bilinear_a_field(x: &GradientTensor, y: &GradientTensor) -> VectorField {
    let grid = x.entry(0, 0).grid().clone();
    let mut out = zeros3(&grid);
    accumulate_a(&mut out, 1.0, x, y);
    VectorField::new(out).expect("shared grid")
}

fn zeros3(grid: &Grid) -> [ScalarField; 3] {
    [
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
    ]
}

fn accumulate_advection(out: &mut [ScalarField; 3], sign: f64, a: &VectorField, jb: &GradientTensor) {
    for (row, target) in out.iter_mut().enumerate() {
        for b in 0..3 {
            let av = a.component(b).values();
            let dv = jb.entry(row, b).values();
            for ((t, x), y) in target.values_mut().iter_mut().zip(av).zip(dv) {
                *t += sign * x * y;
            }
        }
    }
}

fn dealiased(parts: [ScalarField; 3]) -> VectorField {
    let spectra = parts.map(|p| {
        let mut s = p.spectrum();
        s.dealias_in_place();
        s
    });
    VectorField::from_spectra(&spectra)
}

/// `‖∇×[(u·∇)v] − a(∇u,∇v) − (u·∇)(∇×v)‖_{L²}` with dealiased products.
pub fn curl_advection_identity_residual(u: &VectorField, v: &VectorField) -> Result<f64> {
    u.check_same_grid(v)?;
    let grid = u.grid();
    let ju = GradientTensor::of(u);
    let jv = GradientTensor::of(v);
    let curl_v = spectral::curl(v);
    let jcurl = GradientTensor::of(&curl_v);

    let mut adv = zeros3(grid);
    accumulate_advection(&mut adv, 1.0, u, &jv);
    let lhs = spectral::curl(&dealiased(adv));

    let mut rhs = zeros3(grid);
    accumulate_a(&mut rhs, 1.0, &ju, &jv);
    accumulate_advection(&mut rhs, 1.0, u, &jcurl);
    let rhs = dealiased(rhs);
    Ok(fields::l2_norm(&lhs.sub(&rhs)))
}

/// Vorticity `w` and column curls `r_k`.
#[derive(Clone, Debug)]
pub struct CurlState {
    pub time: f64,
    pub w: VectorField,
    pub r: [VectorField; 3],
}

impl CurlState {
    pub fn from_state(state: &State) -> Self {
        CurlState {
            time: state.time,
            w: spectral::curl(&state.u),
            r: [
                spectral::curl(state.f.column(0)),
                spectral::curl(state.f.column(1)),
                spectral::curl(state.f.column(2)),
            ],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.r.iter().all(VectorField::is_finite)
    }

    pub fn first_non_finite(&self) -> Option<String> {
        if !self.w.is_finite() {
            return Some("w".into());
        }
        (0..3)
            .find(|&k| !self.r[k].is_finite())
            .map(|k| format!("r_{}", k + 1))
    }

    pub fn sup_div(&self) -> f64 {
        std::iter::once(&self.w)
            .chain(self.r.iter())
            .map(|v| spectral::divergence(v).max_abs())
            .fold(0.0, f64::max)
    }

    fn offset(&self, h: f64, d: &CurlDerivative) -> CurlState {
        let mut out = self.clone();
        out.w.axpy(h, &d.dw);
        for k in 0..3 {
            out.r[k].axpy(h, &d.dr[k]);
        }
        out
    }
}

/// Sources of the curl system.
#[derive(Clone, Debug)]
pub struct CurlSources {
    pub s: VectorField,
    pub t: [VectorField; 3],
}

fn source_parts(grads: &StateGradients) -> ([ScalarField; 3], [[ScalarField; 3]; 3]) {
    let grid = grads.ju.entry(0, 0).grid().clone();
    let mut s = zeros3(&grid);
    accumulate_a(&mut s, 1.0, &grads.ju, &grads.ju);
    for k in 0..3 {
        accumulate_a(&mut s, -1.0, &grads.jf[k], &grads.jf[k]);
    }
    let t = [0, 1, 2].map(|k| {
        let mut t = zeros3(&grid);
        accumulate_a(&mut t, 1.0, &grads.ju, &grads.jf[k]);
        accumulate_a(&mut t, -1.0, &grads.jf[k], &grads.ju);
        t
    });
    (s, t)
}

/// `S` and `T_k` assembled point-wise and dealiased.
pub fn curl_sources(state: &State) -> CurlSources {
    let grads = StateGradients::of(state);
    let (s, t) = source_parts(&grads);
    CurlSources {
        s: dealiased(s),
        t: t.map(dealiased),
    }
}

/// Time derivative of a [`CurlState`].
#[derive(Clone, Debug)]
pub struct CurlDerivative {
    pub dw: VectorField,
    pub dr: [VectorField; 3],
}

/// `dw = −(u·∇)w + Σ_k (F_k·∇)r_k − S`, `dr_k = −(u·∇)r_k + (F_k·∇)w − T_k`.
pub fn rhs_curl(state: &State, cs: &CurlState) -> Result<CurlDerivative> {
    state.u.check_same_grid(&cs.w)?;
    let sources = source_parts(&StateGradients::of(state));
    rhs_curl_with(state, sources, cs)
}

fn rhs_curl_with(
    state: &State,
    (mut s, t): ([ScalarField; 3], [[ScalarField; 3]; 3]),
    cs: &CurlState,
) -> Result<CurlDerivative> {
    let jw = GradientTensor::of(&cs.w);
    let jr = [
        GradientTensor::of(&cs.r[0]),
        GradientTensor::of(&cs.r[1]),
        GradientTensor::of(&cs.r[2]),
    ];

    // s currently holds +S; flip it so the accumulators build −S + …
    s.iter_mut().for_each(|c| c.scale(-1.0));
    accumulate_advection(&mut s, -1.0, &state.u, &jw);
    for k in 0..3 {
        accumulate_advection(&mut s, 1.0, state.f.column(k), &jr[k]);
    }
    let dw = dealiased(s);

    let mut dr = Vec::with_capacity(3);
    for (k, mut tk) in t.into_iter().enumerate() {
        tk.iter_mut().for_each(|c| c.scale(-1.0));
        accumulate_advection(&mut tk, -1.0, &state.u, &jr[k]);
        accumulate_advection(&mut tk, 1.0, state.f.column(k), &jw);
        dr.push(dealiased(tk));
    }
    let out = CurlDerivative {
        dw,
        dr: dr.try_into().expect("three columns"),
    };
    if !out.dw.is_finite() || !out.dr.iter().all(VectorField::is_finite) {
        return Err(Error::NonFinite("curl right-hand side".into()));
    }
    Ok(out)
}

/// `‖∇×u − w‖ + Σ_k ‖∇×F_k − r_k‖` in `L²`.
pub fn curl_consistency_error(state: &State, cs: &CurlState) -> f64 {
    let mut e = fields::l2_norm(&spectral::curl(&state.u).sub(&cs.w));
    for k in 0..3 {
        e += fields::l2_norm(&spectral::curl(state.f.column(k)).sub(&cs.r[k]));
    }
    e
}

/// One RK4 step of size `h` for the curl system, driven by the primal
/// trajectory sampled at the start, midpoint and end of the step.
pub fn step_curl_rk4(cs: &CurlState, h: f64, start: &State, mid: &State, end: &State) -> Result<CurlState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    start.u.check_same_grid(&cs.w)?;
    let mid_sources = source_parts(&StateGradients::of(mid));
    let k1 = rhs_curl(start, cs)?;
    let k2 = rhs_curl_with(mid, mid_sources.clone(), &cs.offset(0.5 * h, &k1))?;
    let k3 = rhs_curl_with(mid, mid_sources, &cs.offset(0.5 * h, &k2))?;
    let k4 = rhs_curl(end, &cs.offset(h, &k3))?;
    let mut next = cs.clone();
    for (weight, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        next.w.axpy(weight * h / 6.0, &k.dw);
        for c in 0..3 {
            next.r[c].axpy(weight * h / 6.0, &k.dr[c]);
        }
    }
    next.time = cs.time + h;
    if let Some(name) = next.first_non_finite() {
        return Err(Error::NonFinite(name));
    }
    Ok(next)
}

/// Primal state and curl state advanced together. Each call to
/// [`CoEvolution::advance`] takes two primal RK4 steps of `dt` and one curl
/// step of `2·dt` through the three primal states.
#[derive(Clone, Debug)]
pub struct CoEvolution {
    pub state: State,
    pub curl: CurlState,
}

impl CoEvolution {
    pub fn new(state: State) -> Self {
        let curl = CurlState::from_state(&state);
        CoEvolution { state, curl }
    }

    /// Returns the intermediate primal state at `t + dt`.
    pub fn advance(&mut self, dt: f64) -> Result<State> {
        let mid = dynamics::step_rk4(&self.state, dt)?;
        let end = dynamics::step_rk4(&mid, dt)?;
        self.curl = step_curl_rk4(&self.curl, 2.0 * dt, &self.state, &mid, &end)?;
        self.state = end;
        Ok(mid)
    }

    pub fn consistency_error(&self) -> f64 {
        curl_consistency_error(&self.state, &self.curl)
    }
}

/// Multi-index `α = (α_x, α_y, α_z)`.
pub type MultiIndex = [u32; 3];

/// All multi-indices with `|α| ≤ order`, in graded order.
pub fn multi_indices(order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for total in 0..=order {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

fn product_spectrum(f: &ScalarField, g: &ScalarField) -> Spectrum {
    let mut s = f.product(g).spectrum();
    s.dealias_in_place();
    s
}

/// `∂^α(fg) − f ∂^α g` with dealiased products.
pub fn commutator(f: &ScalarField, g: &ScalarField, alpha: MultiIndex) -> Result<ScalarField> {
    let order: u32 = alpha.iter().sum();
    if order > tolerances::MAX_COMMUTATOR_ORDER {
        return Err(Error::InvalidArgument(format!(
            "multi-index order {order} exceeds {}",
            tolerances::MAX_COMMUTATOR_ORDER
        )));
    }
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(f.grid().n(), g.grid().n()));
    }
    let fg = product_spectrum(f, g).mixed_derivative(alpha);
    let dg = if order == 0 {
        g.clone()
    } else {
        g.spectrum().mixed_derivative(alpha).to_field()
    };
    let mut out = fg;
    out.axpy(-1.0, &product_spectrum(f, &dg));
    Ok(out.to_field())
}

/// Scalar `H^s` norm, multiplier `(1 + |k|²)^s`.
pub fn scalar_sobolev_norm(f: &ScalarField, s: u32) -> f64 {
    let e = f
        .spectrum()
        .weighted_energy(|k| (1.0 + (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).powi(s as i32));
    (e * f.grid().volume()).sqrt()
}

fn scalar_l2(f: &ScalarField) -> f64 {
    let g = f.grid();
    (f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64 * g.volume()).sqrt()
}

/// Ratios `‖∂^α(fg) − f∂^α g‖ / (|f|_{H³}|g|_∞ + |∇f|_∞|g|_{H²})` for every
/// `|α| ≤ 3`, in [`multi_indices`] order.
pub fn moser_ratios(f: &ScalarField, g: &ScalarField) -> Result<Vec<f64>> {
    let bound = scalar_sobolev_norm(f, 3) * g.max_abs()
        + fields::sup_norm(&spectral::gradient(f)) * scalar_sobolev_norm(g, 2);
    multi_indices(tolerances::MAX_COMMUTATOR_ORDER)
        .into_iter()
        .map(|alpha| {
            let c = commutator(f, g, alpha)?;
            Ok(if bound > 0.0 { scalar_l2(&c) / bound } else { 0.0 })
        })
        .collect()
}

/// Summary of an ensemble of inequality ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct SurveyReport {
    pub kind: String,
    pub n: usize,
    pub ensemble: usize,
    pub seed: u64,
    pub samples: usize,
    pub max: f64,
    pub mean: f64,
    /// Equal-width bins on `[0, max]`.
    pub histogram: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 10;

impl SurveyReport {
    pub fn from_ratios(kind: &str, n: usize, ensemble: usize, seed: u64, ratios: &[f64]) -> Self {
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let mean = if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        let mut histogram = vec![0; HISTOGRAM_BINS];
        for &r in ratios {
            let bin = if max > 0.0 {
                ((r / max) * HISTOGRAM_BINS as f64) as usize
            } else {
                0
            };
            histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
        }
        SurveyReport {
            kind: kind.into(),
            n,
            ensemble,
            seed,
            samples: ratios.len(),
            max,
            mean,
            histogram,
        }
    }

    /// Key-value text, one `key = value` per line.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("survey = {}\n", self.kind));
        s.push_str(&format!("n = {}\n", self.n));
        s.push_str(&format!("ensemble = {}\n", self.ensemble));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("samples = {}\n", self.samples));
        s.push_str(&format!("max_ratio = {:.17e}\n", self.max));
        s.push_str(&format!("mean_ratio = {:.17e}\n", self.mean));
        for (i, c) in self.histogram.iter().enumerate() {
            let lo = self.max * i as f64 / HISTOGRAM_BINS as f64;
            let hi = self.max * (i + 1) as f64 / HISTOGRAM_BINS as f64;
            s.push_str(&format!("histogram.{i} = [{lo:.6e}, {hi:.6e}) {c}\n"));
        }
        s
    }
}

/// Band of the random scalars used by the commutator survey, `n/6`.
pub fn survey_band(grid: &Grid) -> usize {
    (grid.n() / 6).max(1)
}

/// Random band-limited pairs `(f, g)` with spectrum exponent −2; all ratios
/// over every `|α| ≤ 3`.
pub fn moser_ratio_survey(ensemble: usize, seed: u64, grid: &Grid) -> Result<SurveyReport> {
    if ensemble == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    let band = survey_band(grid);
    let mut ratios = Vec::with_capacity(ensemble * 20);
    for member in 0..ensemble as u64 {
        let base = seed.wrapping_mul(1_000_003).wrapping_add(2 * member);
        let f = fields::random_scalar(grid, -2.0, band, base);
        let g = fields::random_scalar(grid, -2.0, band, base + 1);
        ratios.extend(moser_ratios(&f, &g)?);
    }
    Ok(SurveyReport::from_ratios("commutator", grid.n(), ensemble, seed, &ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_initial, random_solenoidal, InitialCondition};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn bilinear_examples() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(bilinear_a(&id, &id), [0.0; 3]);
        assert_eq!(bilinear_a(&[[0.0; 3]; 3], &id), [0.0; 3]);
        let mut x = [[0.0; 3]; 3];
        x[0][1] = 1.0;
        assert_eq!(bilinear_a(&x, &id), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn multi_index_enumeration() {
        let all = multi_indices(3);
        assert_eq!(all.len(), 20);
        assert_eq!(all[0], [0, 0, 0]);
        assert!(all.iter().all(|a| a.iter().sum::<u32>() <= 3));
    }

    #[test]
    fn commutator_examples() {
        let g = grid(16);
        let f = fields::random_scalar(&g, -2.0, 2, 1);
        let h = fields::random_scalar(&g, -2.0, 2, 2);
        assert_eq!(commutator(&f, &h, [0, 0, 0]).unwrap().max_abs(), 0.0);
        let c = ScalarField::constant(&g, 2.5);
        for alpha in multi_indices(3) {
            assert!(commutator(&c, &h, alpha).unwrap().max_abs() < 1e-11);
        }
        // product rule: ∂x(fg) − f∂x g = g ∂x f
        let comm = commutator(&f, &h, [1, 0, 0]).unwrap();
        let expected = h.product(spectral::gradient(&f).component(0));
        assert!(comm.sub(&expected).max_abs() < 1e-10);
        assert!(commutator(&f, &h, [2, 1, 1]).is_err());
    }

    #[test]
    fn identity_residual_vanishes_for_zero_inputs() {
        let g = grid(16);
        let v = random_solenoidal(&g, -2.0, 2, 4);
        let zero = VectorField::zeros(&g);
        assert_eq!(curl_advection_identity_residual(&zero, &v).unwrap(), 0.0);
        assert_eq!(curl_advection_identity_residual(&v, &zero).unwrap(), 0.0);
    }

    #[test]
    fn taylor_green_identity_residual() {
        let g = grid(32);
        let u = fields::taylor_green(&g);
        assert!(curl_advection_identity_residual(&u, &u).unwrap() < tolerances::CURL_IDENTITY);
    }

    #[test]
    fn sources_of_simple_states() {
        let g = grid(16);
        let src = curl_sources(&State::equilibrium(&g));
        assert_eq!(fields::sup_norm(&src.s), 0.0);
        for t in &src.t {
            assert_eq!(fields::sup_norm(t), 0.0);
        }

        let mut s = State::equilibrium(&g);
        s.u = random_solenoidal(&g, -2.0, 2, 8);
        let src = curl_sources(&s);
        let ju = GradientTensor::of(&s.u);
        let expected = bilinear_a_field(&ju, &ju);
        let expected = dealiased(expected.into_components());
        assert!(fields::sup_norm(&src.s.sub(&expected)) < 1e-13);
        for t in &src.t {
            assert!(fields::sup_norm(t) < 1e-13);
        }
    }

    #[test]
    fn rhs_curl_commutes_with_evolution() {
        let g = grid(16);
        let s = make_initial(
            &InitialCondition::taylor_green().with_f_perturbation(0.2).with_seed(3),
            &g,
        )
        .unwrap();
        let cs = CurlState::from_state(&s);
        let d = rhs_curl(&s, &cs).unwrap();
        let dw = spectral::curl(&dynamics::rhs_velocity(&s).unwrap());
        assert!(fields::l2_norm(&d.dw.sub(&dw)) < tolerances::CURL_RHS);
        for k in 0..3 {
            let dr = spectral::curl(&dynamics::rhs_deformation_column(&s, k).unwrap());
            assert!(fields::l2_norm(&d.dr[k].sub(&dr)) < tolerances::CURL_RHS);
        }

        let eq = State::equilibrium(&g);
        let d = rhs_curl(&eq, &CurlState::from_state(&eq)).unwrap();
        assert_eq!(fields::sup_norm(&d.dw), 0.0);
    }

    #[test]
    fn consistency_zero_at_initialization() {
        let g = grid(16);
        let s = make_initial(
            &InitialCondition::taylor_green().with_f_perturbation(0.2).with_seed(3),
            &g,
        )
        .unwrap();
        let cs = CurlState::from_state(&s);
        assert!(curl_consistency_error(&s, &cs) < 1e-14);
        assert!(cs.sup_div() < 1e-10);
    }

    #[test]
    fn survey_report_histogram_counts() {
        let r = SurveyReport::from_ratios("x", 8, 2, 0, &[0.0, 0.5, 1.0, 0.99]);
        assert_eq!(r.histogram.iter().sum::<usize>(), 4);
        assert_eq!(r.histogram[9], 2);
        assert_eq!(r.max, 1.0);
        let text = r.to_key_value();
        assert!(text.contains("max_ratio = 1.00000000000000000e0"));
        assert!(moser_ratio_survey(0, 1, &grid(8)).is_err());
    }

    #[test]
    fn constant_f_gives_zero_ratios() {
        let g = grid(16);
        let f = ScalarField::constant(&g, 1.7);
        let h = fields::random_scalar(&g, -2.0, 2, 5);
        let ratios = moser_ratios(&f, &h).unwrap();
        assert!(ratios.iter().all(|&r| r < 1e-12));
    }
}
