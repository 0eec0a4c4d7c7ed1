//! The invariant suite behind the `check` subcommand and the acceptance
//! tests. Each criterion returns a [`CriterionOutcome`]; the heavy
//! trajectory is computed once by [`Trajectory::compute`] and shared.

use std::fmt;

use crate::curl_system::{self, CoEvolution};
use crate::dynamics;
use crate::error::Result;
use crate::fields::{self, InitialCondition, State};
use crate::io;
use crate::monitor::{self, DiagnosticsRecord};
use crate::spectral::{self, Grid, ScalarField, VectorField};
use crate::tolerances;

pub const REFERENCE_N: usize = 32;
pub const REFERENCE_DT: f64 = 1e-3;
pub const REFERENCE_T_END: f64 = 1.0;
pub const REFERENCE_F_PERTURBATION: f64 = 0.1;
pub const REFERENCE_SEED: u64 = 1;
/// Records every 10 steps, i.e. a cadence of 1e-2 at the reference dt.
pub const REFERENCE_RECORD_EVERY: u64 = 10;
/// The curl system is co-evolved up to this time.
pub const CONSISTENCY_TIME: f64 = 0.5;

pub const ENERGY_DRIFT_TOL: f64 = 1e-6;
pub const DIV_F_TOL: f64 = 1e-8;
pub const CURL_IDENTITY_PAIRS: usize = 100;
pub const CONSISTENCY_TOL: f64 = 1e-6;
pub const ORDER_RATIO: f64 = 16.0;
pub const ORDER_RATIO_SPREAD: f64 = 0.2;
/// Step sizes for the co-evolution order study, each run to [`CONSISTENCY_TIME`].
pub const CONSISTENCY_ORDER_DTS: [f64; 3] = [0.025, 0.0125, 0.00625];
pub const RK4_ORDER_DTS: [f64; 3] = [0.04, 0.02, 0.01];
pub const RK4_ORDER_T_END: f64 = 0.4;
pub const SURVEY_STABILITY: f64 = 0.1;
pub const KATO_ENSEMBLE: usize = 200;
pub const MOSER_ENSEMBLE: usize = 100;
pub const SCALING_INVARIANCE_TOL: f64 = 1e-12;
pub const QUADRATURE_REFINEMENT: u64 = 10;
pub const QUADRATURE_TOL: f64 = 1e-4;
pub const BOUND_REFINEMENT_TOL: f64 = 0.05;
pub const BOUND_SAFETY_FACTOR: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u32, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn within_ratio(r: f64) -> bool {
    (r / ORDER_RATIO - 1.0).abs() <= ORDER_RATIO_SPREAD
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn reference_initial(grid: &Grid) -> Result<State> {
    let ic = InitialCondition::taylor_green()
        .with_f_perturbation(REFERENCE_F_PERTURBATION)
        .with_seed(REFERENCE_SEED);
    fields::make_initial(&ic, grid)
}

/// A fixed-dt run with per-step invariant tracking and records at a fixed
/// step cadence.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub initial: State,
    pub last: State,
    pub records: Vec<DiagnosticsRecord>,
    pub max_energy_drift: f64,
    pub max_div_u: f64,
    pub max_div_f: f64,
    /// Trapezoid of the curl integrand sampled at every step.
    pub step_quadrature_m: f64,
    /// Co-evolution difference when the curl system stopped, if it ran.
    pub consistency: Option<(f64, f64)>,
    /// Largest Kato ratio over `u` and every `F_k` at the records.
    pub max_kato_ratio: f64,
}

impl Trajectory {
    /// `steps` RK4 steps of `dt`; the first `2·coevolve_pairs` of them are
    /// taken as co-evolved pairs.
    pub fn compute(initial: State, dt: f64, steps: u64, record_every: u64, coevolve_pairs: u64) -> Result<Self> {
        let mut t = Trajectory {
            dt,
            initial: initial.clone(),
            last: initial.clone(),
            records: Vec::new(),
            max_energy_drift: 0.0,
            max_div_u: 0.0,
            max_div_f: 0.0,
            step_quadrature_m: 0.0,
            consistency: None,
            max_kato_ratio: 0.0,
        };
        let e0 = initial.energy();
        let mut prev_integrand = integrand(&initial);
        t.observe(&initial, 0, record_every, e0)?;

        let mut co = CoEvolution::new(initial);
        let mut step = 0;
        while step < steps {
            let visited = if step + 1 < steps && step < 2 * coevolve_pairs {
                let mid = co.advance(dt)?;
                if step + 2 == 2 * coevolve_pairs {
                    t.consistency = Some((co.state.time, co.consistency_error()));
                }
                vec![mid, co.state.clone()]
            } else {
                co.state = dynamics::step_rk4(&co.state, dt)?;
                vec![co.state.clone()]
            };
            for s in visited {
                step += 1;
                let cur = integrand(&s);
                t.step_quadrature_m = monitor::bkm_accumulate(t.step_quadrature_m, prev_integrand, cur, dt)?;
                prev_integrand = cur;
                t.observe(&s, step, record_every, e0)?;
            }
        }
        t.last = co.state;
        Ok(t)
    }

    fn observe(&mut self, s: &State, step: u64, record_every: u64, e0: f64) -> Result<()> {
        self.max_energy_drift = self.max_energy_drift.max((s.energy() - e0).abs() / e0);
        self.max_div_u = self.max_div_u.max(s.sup_div_u());
        self.max_div_f = self.max_div_f.max(s.sup_div_f());
        if step % record_every == 0 {
            let rec = monitor::compute_record(s, self.records.last(), 3)?;
            self.max_kato_ratio = self.max_kato_ratio.max(rec.kato_lhs / rec.kato_bracket);
            for k in 0..3 {
                let c = monitor::kato_check(s.f.column(k))?;
                self.max_kato_ratio = self.max_kato_ratio.max(c.ratio);
            }
            self.records.push(rec);
        }
        Ok(())
    }

    /// The shared reference run: Taylor–Green velocity, perturbed identity
    /// deformation, n = 32, dt = 1e-3 over [0, 1], curl system co-evolved
    /// to t = 0.5.
    pub fn reference() -> Result<Self> {
        let grid = Grid::new(REFERENCE_N)?;
        let steps = (REFERENCE_T_END / REFERENCE_DT).round() as u64;
        let pairs = (CONSISTENCY_TIME / (2.0 * REFERENCE_DT)).round() as u64;
        Self::compute(reference_initial(&grid)?, REFERENCE_DT, steps, REFERENCE_RECORD_EVERY, pairs)
    }

    /// The record closest to `time`.
    pub fn record_at(&self, time: f64) -> &DiagnosticsRecord {
        self.records
            .iter()
            .min_by(|a, b| (a.time - time).abs().total_cmp(&(b.time - time).abs()))
            .expect("at least the initial record")
    }
}

fn integrand(s: &State) -> f64 {
    let mut total = fields::sup_norm(&spectral::curl(&s.u));
    for k in 0..3 {
        total += fields::sup_norm(&spectral::curl(s.f.column(k)));
    }
    total
}

fn sup_diff(a: &VectorField, b: &VectorField) -> f64 {
    fields::sup_norm(&a.sub(b))
}

fn scalar_sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).max_abs()
}

/// Criterion 1: derivatives, curl, divergence and Leray projection of
/// closed-form trigonometric fields.
pub fn spectral_correctness(n: usize) -> Result<CriterionOutcome> {
    let g = Grid::new(n)?;
    let phi = ScalarField::from_fn(&g, |x, y, z| x.sin() * (2.0 * y).cos() * (3.0 * z).sin());
    let grad_exact = VectorField::from_fn(&g, |x, y, z| {
        [
            x.cos() * (2.0 * y).cos() * (3.0 * z).sin(),
            -2.0 * x.sin() * (2.0 * y).sin() * (3.0 * z).sin(),
            3.0 * x.sin() * (2.0 * y).cos() * (3.0 * z).cos(),
        ]
    });
    let e_grad = sup_diff(&spectral::gradient(&phi), &grad_exact);

    let v = VectorField::from_fn(&g, |x, y, z| {
        [
            (2.0 * y).sin() * z.cos(),
            (3.0 * z).sin() * x.cos(),
            x.sin() * (2.0 * y).cos(),
        ]
    });
    let curl_exact = VectorField::from_fn(&g, |x, y, z| {
        [
            -2.0 * x.sin() * (2.0 * y).sin() - 3.0 * (3.0 * z).cos() * x.cos(),
            -(2.0 * y).sin() * z.sin() - x.cos() * (2.0 * y).cos(),
            -(3.0 * z).sin() * x.sin() - 2.0 * (2.0 * y).cos() * z.cos(),
        ]
    });
    let e_curl = sup_diff(&spectral::curl(&v), &curl_exact);

    let w = VectorField::from_fn(&g, |x, y, z| [x.sin() * y.cos(), (2.0 * y).cos() * z.sin(), (3.0 * z).sin()]);
    let div_exact = ScalarField::from_fn(&g, |x, y, z| {
        x.cos() * y.cos() - 2.0 * (2.0 * y).sin() * z.sin() + 3.0 * (3.0 * z).cos()
    });
    let e_div = scalar_sup_diff(&spectral::divergence(&w), &div_exact);

    let e_kill = fields::sup_norm(&spectral::leray_project(&grad_exact));
    let e_fix = sup_diff(&spectral::leray_project(&v), &v);

    let worst = e_grad.max(e_curl).max(e_div).max(e_kill).max(e_fix);
    Ok(outcome(
        1,
        "spectral correctness",
        worst < tolerances::SPECTRAL_EXACT,
        format!(
            "n={n} grad {e_grad:.2e}, curl {e_curl:.2e}, div {e_div:.2e}, P(grad) {e_kill:.2e}, P(v)-v {e_fix:.2e} (tol {:.0e})",
            tolerances::SPECTRAL_EXACT
        ),
    ))
}

/// Criterion 2.
pub fn energy_conservation(t: &Trajectory) -> CriterionOutcome {
    outcome(
        2,
        "energy conservation",
        t.max_energy_drift <= ENERGY_DRIFT_TOL,
        format!("max relative drift {:.3e} (tol {ENERGY_DRIFT_TOL:.0e})", t.max_energy_drift),
    )
}

/// Criterion 3.
pub fn divergence_propagation(t: &Trajectory) -> CriterionOutcome {
    outcome(
        3,
        "divergence propagation",
        t.max_div_f < DIV_F_TOL,
        format!(
            "max sup|div F_k| {:.3e}, max sup|div u| {:.3e} (tol {DIV_F_TOL:.0e})",
            t.max_div_f, t.max_div_u
        ),
    )
}

/// Criterion 4: seeded random divergence-free pairs in the initial band.
pub fn curl_advection_identity(n: usize, pairs: usize, seed: u64) -> Result<CriterionOutcome> {
    let g = Grid::new(n)?;
    let band = fields::initial_band(&g);
    let mut worst: f64 = 0.0;
    for i in 0..pairs as u64 {
        let base = seed.wrapping_mul(7919).wrapping_add(2 * i);
        let u = fields::random_solenoidal(&g, -2.0, band, base);
        let v = fields::random_solenoidal(&g, -2.0, band, base + 1);
        worst = worst.max(curl_system::curl_advection_identity_residual(&u, &v)?);
    }
    Ok(outcome(
        4,
        "curl-advection identity",
        worst < tolerances::CURL_IDENTITY,
        format!(
            "{pairs} pairs at n={n}, max residual {worst:.3e} (tol {:.0e})",
            tolerances::CURL_IDENTITY
        ),
    ))
}

/// Co-evolution difference at [`CONSISTENCY_TIME`] for each step size.
pub fn consistency_errors(initial: &State, dts: &[f64]) -> Result<Vec<f64>> {
    dts.iter()
        .map(|&dt| {
            let pairs = (CONSISTENCY_TIME / (2.0 * dt)).round() as u64;
            let mut co = CoEvolution::new(initial.clone());
            for _ in 0..pairs {
                co.advance(dt)?;
            }
            Ok(co.consistency_error())
        })
        .collect()
}

/// Criterion 5.
pub fn formulation_consistency(t: &Trajectory) -> Result<CriterionOutcome> {
    let (time, err) = t.consistency.unwrap_or((t.initial.time, f64::INFINITY));
    let errs = consistency_errors(&t.initial, &CONSISTENCY_ORDER_DTS)?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let passed = err < CONSISTENCY_TOL && ratios.iter().all(|&r| within_ratio(r));
    Ok(outcome(
        5,
        "formulation consistency",
        passed,
        format!(
            "L2 difference {err:.3e} at t={time:.3} with dt={} (tol {CONSISTENCY_TOL:.0e}); dt {:?} -> [{}], ratios {} (target {ORDER_RATIO} +/- {:.0}%)",
            t.dt,
            CONSISTENCY_ORDER_DTS,
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", "),
            format_ratios(&ratios),
            ORDER_RATIO_SPREAD * 100.0
        ),
    ))
}

fn format_ratios(r: &[f64]) -> String {
    r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn state_distance(a: &State, b: &State) -> f64 {
    let mut d = fields::l2_norm(&a.u.sub(&b.u)).powi(2);
    for k in 0..3 {
        d += fields::l2_norm(&a.f.column(k).sub(b.f.column(k))).powi(2);
    }
    d.sqrt()
}

/// Criterion 6: `‖X_h − X_{h/2}‖ / ‖X_{h/2} − X_{h/4}‖` at `t_end`.
pub fn rk4_order(n: usize) -> Result<CriterionOutcome> {
    let g = Grid::new(n)?;
    let initial = reference_initial(&g)?;
    let finals = RK4_ORDER_DTS
        .iter()
        .map(|&dt| {
            let steps = (RK4_ORDER_T_END / dt).round() as u64;
            let mut s = initial.clone();
            for _ in 0..steps {
                s = dynamics::step_rk4(&s, dt)?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let d1 = state_distance(&finals[0], &finals[1]);
    let d2 = state_distance(&finals[1], &finals[2]);
    let ratio = d1 / d2;
    Ok(outcome(
        6,
        "RK4 order",
        within_ratio(ratio),
        format!(
            "n={n}, t={RK4_ORDER_T_END}, dt {:?}: Richardson ratio {ratio:.3} (target {ORDER_RATIO} +/- {:.0}%)",
            RK4_ORDER_DTS,
            ORDER_RATIO_SPREAD * 100.0
        ),
    ))
}

/// Criterion 7. `dynamic_max` is the largest Kato ratio seen along
/// dynamical runs.
pub fn kato_survey_criterion(n: usize, seed: u64, dynamic_max: f64) -> Result<CriterionOutcome> {
    let g = Grid::new(n)?;
    let base = monitor::kato_survey(KATO_ENSEMBLE, seed, &g)?;
    let doubled = monitor::kato_survey(2 * KATO_ENSEMBLE, seed, &g)?;
    let change = relative_change(base.max, doubled.max);
    let c_fit = doubled.max;
    let passed = c_fit.is_finite() && c_fit > 0.0 && change < SURVEY_STABILITY && dynamic_max <= c_fit;
    Ok(outcome(
        7,
        "Kato inequality survey",
        passed,
        format!(
            "max ratio {:.4} ({} fields) vs {:.4} ({} fields), change {:.2}% (tol {:.0}%); fitted C {c_fit:.4}, dynamical max {dynamic_max:.4}",
            base.max,
            base.ensemble,
            doubled.max,
            doubled.ensemble,
            change * 100.0,
            SURVEY_STABILITY * 100.0
        ),
    ))
}

/// Criterion 8: ensemble doubling and exact invariance under `f → 10f`.
pub fn moser_survey_criterion(n: usize, seed: u64) -> Result<CriterionOutcome> {
    let g = Grid::new(n)?;
    let base = curl_system::moser_ratio_survey(MOSER_ENSEMBLE, seed, &g)?;
    let doubled = curl_system::moser_ratio_survey(2 * MOSER_ENSEMBLE, seed, &g)?;
    let change = relative_change(base.max, doubled.max);

    let band = curl_system::survey_band(&g);
    let mut worst_scaling: f64 = 0.0;
    for member in 0..10u64 {
        let f = fields::random_scalar(&g, -2.0, band, seed.wrapping_add(7 * member + 3));
        let h = fields::random_scalar(&g, -2.0, band, seed.wrapping_add(7 * member + 4));
        let mut f10 = f.clone();
        f10.scale(10.0);
        let a = curl_system::moser_ratios(&f, &h)?;
        let b = curl_system::moser_ratios(&f10, &h)?;
        for (x, y) in a.iter().zip(&b) {
            worst_scaling = worst_scaling.max((x - y).abs() / x.abs().max(f64::MIN_POSITIVE));
        }
    }
    let passed = doubled.max.is_finite()
        && doubled.max > 0.0
        && change < SURVEY_STABILITY
        && worst_scaling < SCALING_INVARIANCE_TOL;
    Ok(outcome(
        8,
        "Moser commutator survey",
        passed,
        format!(
            "max ratio {:.4} ({} pairs) vs {:.4} ({} pairs), change {:.2}% (tol {:.0}%); f->10f relative change {worst_scaling:.2e} (tol {SCALING_INVARIANCE_TOL:.0e})",
            base.max,
            base.ensemble,
            doubled.max,
            doubled.ensemble,
            change * 100.0,
            SURVEY_STABILITY * 100.0
        ),
    ))
}

fn monotone_m(records: &[DiagnosticsRecord]) -> bool {
    records.windows(2).all(|p| p[1].bkm_m >= p[0].bkm_m)
}

/// Criterion 9: monotone `M` on every given run; record-cadence `M(1)`
/// against the every-step quadrature of the reference run.
pub fn bkm_accumulator(reference: &Trajectory, others: &[&Trajectory]) -> CriterionOutcome {
    let monotone = monotone_m(&reference.records) && others.iter().all(|t| monotone_m(&t.records));
    let coarse = reference.records.last().map_or(0.0, |r| r.bkm_m);
    let fine = reference.step_quadrature_m;
    let rel = relative_change(coarse, fine);
    outcome(
        9,
        "BKM accumulator",
        monotone && rel < QUADRATURE_TOL && coarse > 0.0,
        format!(
            "M nondecreasing on {} run(s): {monotone}; M(1) = {coarse:.10} at record cadence vs {fine:.10} at {QUADRATURE_REFINEMENT}x finer, relative {rel:.2e} (tol {QUADRATURE_TOL:.0e})",
            1 + others.len()
        ),
    )
}

/// Largest implied constants `(energy, curl)` along a run.
fn max_implied(t: &Trajectory) -> Result<(f64, f64)> {
    let first = &t.records[0];
    let mut e: f64 = 0.0;
    let mut c: f64 = 0.0;
    for r in &t.records {
        e = e.max(monitor::energy_bound_check(r, &t.records, first)?.implied_c);
        c = c.max(monitor::curl_l2_bound_check(r, &t.records, first)?.implied_c);
    }
    Ok((e, c))
}

/// Criterion 10. `coarse` is the same run at twice the step with the same
/// record times. Constants are fitted on `coarse` and the bounds asserted
/// along `fine`.
pub fn bound_monitors(fine: &Trajectory, coarse: &Trajectory) -> Result<CriterionOutcome> {
    let at = |t: &Trajectory| -> Result<(f64, f64)> {
        let r = t.record_at(CONSISTENCY_TIME);
        let first = &t.records[0];
        Ok((
            monitor::energy_bound_check(r, &t.records, first)?.implied_c,
            monitor::curl_l2_bound_check(r, &t.records, first)?.implied_c,
        ))
    };
    let (ef, cf) = at(fine)?;
    let (ec, cc) = at(coarse)?;
    let (de, dc) = (relative_change(ef, ec), relative_change(cf, cc));
    let (fit_e, fit_c) = max_implied(coarse)?;

    let first = &fine.records[0];
    let mut violations = 0;
    for r in &fine.records {
        if !monitor::energy_bound_check(r, &fine.records, first)?.holds_with(fit_e, BOUND_SAFETY_FACTOR) {
            violations += 1;
        }
        if !monitor::curl_l2_bound_check(r, &fine.records, first)?.holds_with(fit_c, BOUND_SAFETY_FACTOR) {
            violations += 1;
        }
    }
    let finite = [ef, cf, ec, cc].iter().all(|x| x.is_finite() && *x > 0.0);
    Ok(outcome(
        10,
        "bound monitors",
        finite && de < BOUND_REFINEMENT_TOL && dc < BOUND_REFINEMENT_TOL && violations == 0,
        format!(
            "implied C at t={CONSISTENCY_TIME}: energy {ef:.5} (dt {}) vs {ec:.5} (dt {}), change {:.2}%; curl {cf:.5} vs {cc:.5}, change {:.2}% (tol {:.0}%); fitted C energy {fit_e:.5}, curl {fit_c:.5}; violations of the factor-{BOUND_SAFETY_FACTOR} bound: {violations}",
            fine.dt,
            coarse.dt,
            de * 100.0,
            dc * 100.0,
            BOUND_REFINEMENT_TOL * 100.0
        ),
    ))
}

/// Checkpoint write/read of `state` through `path`, compared bit for bit.
pub fn checkpoint_round_trip(state: &State, path: &std::path::Path) -> Result<bool> {
    io::write_checkpoint(state, path)?;
    let back = io::read_checkpoint(path)?;
    let same = |a: &VectorField, b: &VectorField| {
        a.components()
            .iter()
            .zip(b.components())
            .all(|(x, y)| x.values().iter().zip(y.values()).all(|(p, q)| p.to_bits() == q.to_bits()))
    };
    Ok(back.time.to_bits() == state.time.to_bits()
        && same(&back.u, &state.u)
        && (0..3).all(|k| same(back.f.column(k), state.f.column(k))))
}

/// Criteria 1–5, 8 and 9 on the built-in cases.
pub fn run_check_suite(mut report: impl FnMut(&CriterionOutcome)) -> Result<Vec<CriterionOutcome>> {
    let mut out = Vec::new();
    let mut push = |o: CriterionOutcome, out: &mut Vec<CriterionOutcome>| {
        report(&o);
        out.push(o);
    };
    push(spectral_correctness(REFERENCE_N)?, &mut out);
    push(curl_advection_identity(REFERENCE_N, CURL_IDENTITY_PAIRS, REFERENCE_SEED)?, &mut out);
    push(moser_survey_criterion(REFERENCE_N, REFERENCE_SEED)?, &mut out);
    let reference = Trajectory::reference()?;
    push(energy_conservation(&reference), &mut out);
    push(divergence_propagation(&reference), &mut out);
    push(formulation_consistency(&reference)?, &mut out);
    push(bkm_accumulator(&reference, &[]), &mut out);
    out.sort_by_key(|o| o.id);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_criterion_passes_at_small_n() {
        let o = spectral_correctness(16).unwrap();
        assert!(o.passed, "{o}");
        assert!(o.to_string().starts_with("PASS [ 1]"));
    }

    #[test]
    fn short_trajectory_bookkeeping() {
        let g = Grid::new(8).unwrap();
        let s = reference_initial(&g).unwrap();
        let t = Trajectory::compute(s, 0.01, 7, 2, 2).unwrap();
        let times: Vec<f64> = t.records.iter().map(|r| r.time).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.06).abs() < 1e-14);
        assert!((t.last.time - 0.07).abs() < 1e-14);
        let (ct, err) = t.consistency.unwrap();
        assert!((ct - 0.04).abs() < 1e-14);
        assert!(err.is_finite());
        assert!(t.step_quadrature_m > 0.0);
        assert!(monotone_m(&t.records));
    }

    #[test]
    fn ratio_window() {
        assert!(within_ratio(16.0) && within_ratio(12.8) && within_ratio(19.2));
        assert!(!within_ratio(12.7) && !within_ratio(19.3));
    }

    #[test]
    fn round_trip_helper() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(8).unwrap();
        let s = reference_initial(&g).unwrap();
        assert!(checkpoint_round_trip(&s, &dir.path().join("c.ivbk")).unwrap());
    }
}
