//! Run-time diagnostics: the curl time integral `M(t)`, the Gronwall
//! quantity `y(t)`, Kato's gradient inequality and the two exponential
//! growth bounds (`H^s` energy and curl `L²`).
//!
//! The universal constants of those inequalities have no known numerical
//! value; every check here reports the constant the data implies instead of
//! assuming one.

use std::f64::consts::E;

use crate::curl_system::SurveyReport;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::fields::{self, sobolev_norm, sup_norm, GradientTensor, State};
use crate::spectral::{self, Grid, VectorField};
use crate::tolerances;

/// Sup-norms of the Jacobians of `u` and of each `F_k`. Not part of the CSV
/// schema; present on records produced in-process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientSupNorms {
    pub u: f64,
    pub f: [f64; 3],
}

impl GradientSupNorms {
    pub fn total(&self) -> f64 {
        self.u + self.f.iter().sum::<f64>()
    }
}

/// One output-time row of monitored quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub sup_div_u: f64,
    pub sup_div_f: f64,
    pub sup_w: f64,
    pub sup_r: [f64; 3],
    pub l2_w: f64,
    pub l2_r: [f64; 3],
    pub h3_u: f64,
    pub h3_f: [f64; 3],
    pub bkm_m: f64,
    pub gronwall_y: f64,
    pub kato_lhs: f64,
    pub kato_bracket: f64,
    pub det_min: f64,
    pub det_max: f64,
    pub tail_energy_fraction: f64,
    pub gradients: Option<GradientSupNorms>,
}

impl DiagnosticsRecord {
    /// `sup|w| + Σ_k sup|r_k|`.
    pub fn bkm_integrand(&self) -> f64 {
        self.sup_w + self.sup_r.iter().sum::<f64>()
    }

    pub fn h3_f_sum(&self) -> f64 {
        self.h3_f.iter().sum()
    }

    /// Values in CSV column order.
    pub fn csv_values(&self) -> [f64; 23] {
        [
            self.time,
            self.energy,
            self.sup_div_u,
            self.sup_div_f,
            self.sup_w,
            self.sup_r[0],
            self.sup_r[1],
            self.sup_r[2],
            self.l2_w,
            self.l2_r[0],
            self.l2_r[1],
            self.l2_r[2],
            self.h3_u,
            self.h3_f[0],
            self.h3_f[1],
            self.h3_f[2],
            self.bkm_m,
            self.gronwall_y,
            self.kato_lhs,
            self.kato_bracket,
            self.det_min,
            self.det_max,
            self.tail_energy_fraction,
        ]
    }

    pub fn from_csv_values(v: &[f64; 23]) -> Self {
        DiagnosticsRecord {
            time: v[0],
            energy: v[1],
            sup_div_u: v[2],
            sup_div_f: v[3],
            sup_w: v[4],
            sup_r: [v[5], v[6], v[7]],
            l2_w: v[8],
            l2_r: [v[9], v[10], v[11]],
            h3_u: v[12],
            h3_f: [v[13], v[14], v[15]],
            bkm_m: v[16],
            gronwall_y: v[17],
            kato_lhs: v[18],
            kato_bracket: v[19],
            det_min: v[20],
            det_max: v[21],
            tail_energy_fraction: v[22],
            gradients: None,
        }
    }
}

/// Trapezoidal update of `M`.
pub fn bkm_accumulate(prev_m: f64, prev_integrand: f64, cur_integrand: f64, dt: f64) -> Result<f64> {
    for v in [prev_integrand, cur_integrand] {
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativeIntegrand(v));
        }
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    Ok(prev_m + dt * (prev_integrand + cur_integrand) / 2.0)
}

/// `y = ln(|u|_{H³} + e) + ln(Σ_k |F_k|_{H³} + e)`.
pub fn gronwall_y(h3_u: f64, h3_f_sum: f64) -> f64 {
    (h3_u + E).ln() + (h3_f_sum + E).ln()
}

/// `ln⁺ x = max(ln x, 0)`.
pub fn ln_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KatoCheck {
    pub lhs: f64,
    pub bracket: f64,
    pub ratio: f64,
}

/// `sup|∇v|` against `1 + (1 + ln⁺|v|_{H³}) sup|∇×v| + ‖∇×v‖_{L²}`.
pub fn kato_check(v: &VectorField) -> Result<KatoCheck> {
    let div = spectral::divergence(v).max_abs();
    if div >= tolerances::KATO_DIVERGENCE {
        return Err(Error::NotDivergenceFree(div));
    }
    kato_terms(v)
}

/// The two sides of the Kato inequality without the divergence gate.
fn kato_terms(v: &VectorField) -> Result<KatoCheck> {
    let lhs = GradientTensor::of(v).sup_norm();
    let w = spectral::curl(v);
    let h3 = sobolev_norm(v, 3)?;
    let bracket = 1.0 + (1.0 + ln_plus(h3)) * sup_norm(&w) + fields::l2_norm(&w);
    Ok(KatoCheck {
        lhs,
        bracket,
        ratio: lhs / bracket,
    })
}

/// Kato ratios of random divergence-free fields (unit rms, spectrum
/// exponent −2, full retained band).
pub fn kato_survey(ensemble: usize, seed: u64, grid: &Grid) -> Result<SurveyReport> {
    if ensemble == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    let mut ratios = Vec::with_capacity(ensemble);
    for member in 0..ensemble as u64 {
        let v = fields::random_solenoidal(
            grid,
            -2.0,
            grid.dealias_cutoff(),
            seed.wrapping_mul(1_000_003).wrapping_add(member),
        );
        ratios.push(kato_check(&v)?.ratio);
    }
    Ok(SurveyReport::from_ratios("kato", grid.n(), ensemble, seed, &ratios))
}

/// Outcome of an exponential growth-bound check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub lhs0: f64,
    pub exponent_integral: f64,
    pub implied_c: f64,
}

impl BoundCheck {
    fn new(lhs: f64, lhs0: f64, exponent_integral: f64) -> Self {
        let growth = if lhs0 > 0.0 && lhs > 0.0 { (lhs / lhs0).ln() } else { 0.0 };
        let implied_c = if growth > 0.0 && exponent_integral > 0.0 {
            growth / exponent_integral
        } else {
            0.0
        };
        BoundCheck {
            lhs,
            lhs0,
            exponent_integral,
            implied_c,
        }
    }

    /// `lhs ≤ lhs₀ · exp(factor · c · integral)`.
    pub fn holds_with(&self, c: f64, factor: f64) -> bool {
        self.lhs <= self.lhs0 * (factor * c * self.exponent_integral).exp()
    }
}

fn trapezoid(history: &[DiagnosticsRecord], until: f64, integrand: impl Fn(&DiagnosticsRecord) -> Result<f64>) -> Result<f64> {
    let mut total = 0.0;
    for pair in history.windows(2) {
        if pair[1].time > until {
            break;
        }
        let dt = pair[1].time - pair[0].time;
        total += dt * (integrand(&pair[0])? + integrand(&pair[1])?) / 2.0;
    }
    Ok(total)
}

fn gradient_integrand(r: &DiagnosticsRecord) -> Result<f64> {
    r.gradients
        .map(|g| g.total())
        .ok_or_else(|| Error::InvalidArgument(format!("record at t = {} lacks gradient norms", r.time)))
}

/// `|u|²_{H^s} + Σ|F_k|²_{H^s}` against its initial value and
/// `∫ sup|∇u| + Σ sup|∇F_k|` over the history up to `record.time`.
pub fn energy_bound_check(
    record: &DiagnosticsRecord,
    history: &[DiagnosticsRecord],
    initial: &DiagnosticsRecord,
) -> Result<BoundCheck> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let sq = |r: &DiagnosticsRecord| r.h3_u.powi(2) + r.h3_f.iter().map(|h| h * h).sum::<f64>();
    let integral = trapezoid(history, record.time, gradient_integrand)?;
    Ok(BoundCheck::new(sq(record), sq(initial), integral))
}

/// `‖w‖² + Σ‖r_k‖²` against its initial value and the curl time integral.
pub fn curl_l2_bound_check(
    record: &DiagnosticsRecord,
    history: &[DiagnosticsRecord],
    initial: &DiagnosticsRecord,
) -> Result<BoundCheck> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let sq = |r: &DiagnosticsRecord| r.l2_w.powi(2) + r.l2_r.iter().map(|h| h * h).sum::<f64>();
    let integral = trapezoid(history, record.time, |r| Ok(r.bkm_integrand()))?;
    Ok(BoundCheck::new(sq(record), sq(initial), integral))
}

/// All diagnostics of one state. `prev` supplies the running `M`.
pub fn compute_record(state: &State, prev: Option<&DiagnosticsRecord>, sobolev_s: u32) -> Result<DiagnosticsRecord> {
    let w = spectral::curl(&state.u);
    let r = [0, 1, 2].map(|k| spectral::curl(state.f.column(k)));
    let sup_w = sup_norm(&w);
    let sup_r = [sup_norm(&r[0]), sup_norm(&r[1]), sup_norm(&r[2])];
    let h3_u = sobolev_norm(&state.u, sobolev_s)?;
    let h3_f = [
        sobolev_norm(state.f.column(0), sobolev_s)?,
        sobolev_norm(state.f.column(1), sobolev_s)?,
        sobolev_norm(state.f.column(2), sobolev_s)?,
    ];
    let integrand = sup_w + sup_r.iter().sum::<f64>();
    let bkm_m = match prev {
        None => 0.0,
        Some(p) => bkm_accumulate(p.bkm_m, p.bkm_integrand(), integrand, state.time - p.time)?,
    };
    let kato = kato_terms(&state.u)?;
    let det = fields::determinant_field(&state.f);
    let (det_min, det_max) = det
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let gradients = GradientSupNorms {
        u: kato.lhs,
        f: [0, 1, 2].map(|k| GradientTensor::of(state.f.column(k)).sup_norm()),
    };
    Ok(DiagnosticsRecord {
        time: state.time,
        energy: state.energy(),
        sup_div_u: state.sup_div_u(),
        sup_div_f: state.sup_div_f(),
        sup_w,
        sup_r,
        l2_w: fields::l2_norm(&w),
        l2_r: [
            fields::l2_norm(&r[0]),
            fields::l2_norm(&r[1]),
            fields::l2_norm(&r[2]),
        ],
        h3_u,
        h3_f,
        bkm_m,
        gronwall_y: gronwall_y(h3_u, h3_f.iter().sum()),
        kato_lhs: kato.lhs,
        kato_bracket: kato.bracket,
        det_min,
        det_max,
        tail_energy_fraction: dynamics::tail_energy_fraction(state),
        gradients: Some(gradients),
    })
}
