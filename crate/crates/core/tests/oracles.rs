//! Independent oracles: finite differences, closed forms and physical
//! conservation along short runs.

use oldroyd_bkm::dynamics::{self, step_rk4};
use oldroyd_bkm::fields::{self, InitialCondition, InitialKind};
use oldroyd_bkm::spectral::{self, Grid, ScalarField};

fn smooth(x: f64, y: f64, z: f64) -> f64 {
    (x.sin() + 0.5 * (2.0 * y).cos()).exp() * (z + x).cos()
}

/// Fourth-order central difference along `axis`.
fn fd4(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid();
    let n = g.n();
    let h = g.spacing();
    let v = f.values();
    let at = |mut i: [usize; 3], d: isize| {
        i[axis] = ((i[axis] as isize + d).rem_euclid(n as isize)) as usize;
        v[i[0] + n * (i[1] + n * i[2])]
    };
    let mut out = ScalarField::zeros(g);
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                let i = [ix, iy, iz];
                out.values_mut()[ix + n * (iy + n * iz)] =
                    (-at(i, 2) + 8.0 * at(i, 1) - 8.0 * at(i, -1) + at(i, -2)) / (12.0 * h);
            }
        }
    }
    out
}

#[test]
fn spectral_gradient_agrees_with_fourth_order_differences() {
    let mut errors = Vec::new();
    for n in [16, 32, 64] {
        let g = Grid::new(n).unwrap();
        let f = ScalarField::from_fn(&g, smooth);
        let grad = spectral::gradient(&f);
        let mut worst: f64 = 0.0;
        for axis in 0..3 {
            worst = worst.max(fd4(&f, axis).sub(grad.component(axis)).max_abs());
        }
        errors.push(worst);
    }
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order > 3.5, "observed order {order:.2} from {errors:?}");
    }
}

#[test]
fn abc_flow_is_a_steady_euler_solution() {
    let g = Grid::new(16).unwrap();
    let u = fields::abc_flow(&g);
    let rhs = dynamics::euler_rhs(&u);
    assert!(fields::sup_norm(&rhs) < 1e-12);
    let ic = InitialCondition::new(InitialKind::AbcFlow);
    let s = fields::make_initial(&ic, &g).unwrap();
    let d = dynamics::rhs(&s).unwrap();
    // with F the identity the columns see ∂_k u, which is not zero
    assert!(fields::sup_norm(&d.du) < 1e-12);
    assert!(fields::sup_norm(d.df.column(0)) > 0.1);
}

#[test]
fn short_run_conserves_energy_and_mean() {
    let g = Grid::new(16).unwrap();
    let ic = InitialCondition::new(InitialKind::RandomBandLimited)
        .with_seed(11)
        .with_f_perturbation(0.2);
    let mut s = fields::make_initial(&ic, &g).unwrap();
    let e0 = s.energy();
    let means0: Vec<[f64; 3]> = (0..3).map(|k| s.f.column(k).mean()).collect();
    for _ in 0..20 {
        s = step_rk4(&s, 5e-3).unwrap();
    }
    assert!((s.energy() - e0).abs() / e0 < 1e-8);
    for k in 0..3 {
        let m = s.f.column(k).mean();
        for c in 0..3 {
            assert!((m[c] - means0[k][c]).abs() < 1e-12);
        }
    }
    assert!(s.sup_div_f() < 1e-10 && s.sup_div_u() < 1e-10);
}

#[test]
fn determinant_stays_near_one_for_small_perturbations() {
    let g = Grid::new(16).unwrap();
    let ic = InitialCondition::taylor_green().with_f_perturbation(1e-3).with_seed(5);
    let mut s = fields::make_initial(&ic, &g).unwrap();
    for _ in 0..10 {
        s = step_rk4(&s, 1e-2).unwrap();
    }
    let det = fields::determinant_field(&s.f);
    let spread = det.values().iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
    assert!(spread < 0.5, "det spread {spread}");
}
