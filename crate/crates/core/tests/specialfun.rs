mod common;

use common::{curl, divergence, maxwell_residual, rel};
use nalgebra::Vector3;
use nfem::specialfun::legendre::normalization;
use nfem::specialfun::{
    assoc_legendre, riccati, sph_bessel_table, sph_hankel1, vswf_eval, AngularTable, Family,
    RadialKind, VswfTable,
};
use num_complex::Complex64;

const ARGS: [f64; 9] = [1e-3, 0.05, 0.3, 0.75, 1.0606601718, 2.5, 7.0, 19.3, 60.0];

#[test]
fn wronskian_holds_for_every_table() {
    for &t in &ARGS {
        let tab = sph_bessel_table(40, t).unwrap();
        for n in 0..=40 {
            let w = tab.j_values[n] * tab.y_derivs[n] - tab.j_derivs[n] * tab.y_values[n];
            let expect = 1.0 / (t * t);
            if !w.is_finite() {
                // y_n overflow is reported, never silently returned
                panic!("non-finite Wronskian at n = {n}, t = {t}");
            }
            assert!(
                ((w - expect) / expect).abs() <= 1e-10,
                "n = {n}, t = {t}: {w} vs {expect}"
            );
        }
    }
}

#[test]
fn three_term_recurrence_residual() {
    for &t in &ARGS[1..] {
        let tab = sph_bessel_table(30, t).unwrap();
        for f in [&tab.j_values, &tab.y_values] {
            for n in 1..30 {
                let lhs = f[n - 1] + f[n + 1] - (2 * n + 1) as f64 * f[n] / t;
                let scale = f[n - 1].abs().max(f[n].abs()).max(f[n + 1].abs());
                assert!(lhs.abs() <= 1e-10 * scale, "n = {n}, t = {t}");
            }
        }
    }
}

#[test]
fn closed_forms_and_limits() {
    let tab = sph_bessel_table(0, 1.0).unwrap();
    assert!((tab.j_values[0] - 1f64.sin()).abs() < 1e-15);
    let small = sph_bessel_table(3, 1e-8).unwrap();
    assert!((small.j_values[0] - 1.0).abs() < 1e-15);
    assert!(small.j_values[1..].iter().all(|v| v.abs() < 1e-8));

    let (h, _) = sph_hankel1(1, 2.0).unwrap();
    let i = Complex64::i();
    assert!(rel(h[0], -i * (i * 2.0).exp() / 2.0) < 1e-14);
    let (h, _) = sph_hankel1(1, 3.0).unwrap();
    assert!(rel(h[1], -(i * 3.0).exp() * (3.0 + i) / 9.0) < 1e-14);

    let (h, dh) = sph_hankel1(4, 1.7).unwrap();
    let im = (h[4] * dh[4].conj() * 1.7 * 1.7).im;
    assert!((im + 1.0).abs() < 1e-12, "{im}");

    let r = riccati(0, 1.3, RadialKind::Regular).unwrap();
    assert!((r[0].0.re - 1.3f64.sin()).abs() < 1e-15 && (r[0].1.re - 1.3f64.cos()).abs() < 1e-15);
    let r = riccati(0, 0.9, RadialKind::Outgoing).unwrap();
    assert!(rel(r[0].0, -i * (i * 0.9).exp()) < 1e-14);
    let r = riccati(2, 2.5, RadialKind::Regular).unwrap();
    assert!((r[2].0.re - 2.5 * sph_bessel_table(2, 2.5).unwrap().j_values[2]).abs() < 1e-15);
}

/// `j_n(t) = t^n sum_k (-t^2/2)^k / (k! (2n+2k+1)!!)`.
fn j_series(n: usize, t: f64) -> f64 {
    let mut dfact = 1.0;
    for i in (1..=(2 * n + 1)).step_by(2) {
        dfact *= i as f64;
    }
    let mut term = t.powi(n as i32) / dfact;
    let mut sum = term;
    for k in 1..60 {
        term *= -(t * t / 2.0) / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[test]
fn power_series_oracle() {
    let tab = sph_bessel_table(10, 2.0).unwrap();
    assert!((tab.j_values[5] - j_series(5, 2.0)).abs() <= 1e-12 * j_series(5, 2.0).abs());
    for n in 0..=10 {
        let s = j_series(n, 2.0);
        assert!((tab.j_values[n] - s).abs() <= 1e-12 * s.abs(), "n = {n}");
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P_n^m` from the explicit polynomial coefficients of `P_n`, differentiated
/// term by term; independent of any recurrence.
fn legendre_oracle(n: usize, m: usize, x: f64) -> f64 {
    let mut deriv = 0.0;
    for k in 0..=n / 2 {
        let power = n - 2 * k;
        if power < m {
            continue;
        }
        let coeff = if k % 2 == 0 { 1.0 } else { -1.0 } * binom(n, k) * binom(2 * n - 2 * k, n);
        let falling = (0..m).fold(1.0, |acc, i| acc * (power - i) as f64);
        deriv += coeff * falling * x.powi((power - m) as i32);
    }
    let cs = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    cs * (1.0 - x * x).powf(m as f64 / 2.0) * deriv / 2f64.powi(n as i32)
}

#[test]
fn legendre_matches_independent_oracle() {
    assert!((assoc_legendre(1, 0, 0.3).unwrap().0 - 0.3).abs() < 1e-15);
    assert!((assoc_legendre(2, 0, 0.5).unwrap().0 + 0.125).abs() < 1e-15);
    let p32 = assoc_legendre(3, 2, 0.4).unwrap().0;
    assert!((p32 - legendre_oracle(3, 2, 0.4)).abs() <= 1e-12 * p32.abs());

    let xs: Vec<f64> = (0..100)
        .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 100.0)
        .collect();
    for n in 0..=12 {
        for m in 0..=n {
            let oracle: Vec<f64> = xs.iter().map(|&x| legendre_oracle(n, m, x)).collect();
            let scale = oracle.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (x, o) in xs.iter().zip(&oracle) {
                let p = assoc_legendre(n, m, *x).unwrap().0;
                assert!((p - o).abs() <= 1e-11 * scale, "n = {n}, m = {m}, x = {x}");
            }
        }
    }
}

#[test]
fn theta_derivative_matches_finite_difference() {
    for (n, m) in [(3, 0), (4, 1), (6, 3), (9, 9)] {
        for theta in [0.3f64, 1.1, 2.4] {
            let h = 1e-5;
            let fd = (assoc_legendre(n, m, (theta + h).cos()).unwrap().0
                - assoc_legendre(n, m, (theta - h).cos()).unwrap().0)
                / (2.0 * h);
            let d = assoc_legendre(n, m, theta.cos()).unwrap().1;
            assert!(
                (d - fd).abs() <= 1e-7 * d.abs().max(1.0),
                "({n},{m}) at {theta}"
            );
        }
    }
}

#[test]
fn angular_table_is_normalized_legendre() {
    let theta = 0.7f64;
    let tab = AngularTable::new(8, theta);
    for n in 0..=8 {
        for m in 0..=n {
            let (p, _) = assoc_legendre(n, m, theta.cos()).unwrap();
            let (pb, _, _) = tab.get(n, m as i64);
            assert!((pb - normalization(n, m) * p).abs() <= 1e-13 * pb.abs().max(1e-3));
        }
    }
}

fn field(
    family: Family,
    kind: RadialKind,
    n: usize,
    m: i64,
    k: f64,
) -> impl Fn(&nfem::geometry::Point) -> nfem::geometry::CVector {
    move |x| vswf_eval(family, kind, n, m, k, x).unwrap().field
}

#[test]
fn te_fields_are_tangential() {
    let x = Vector3::new(0.3, -0.5, 0.7);
    for kind in [RadialKind::Regular, RadialKind::Outgoing] {
        for n in 1..=6 {
            for m in -(n as i64)..=(n as i64) {
                let v = vswf_eval(Family::Te, kind, n, m, 0.9, &x).unwrap().field;
                let radial: Complex64 = (0..3).map(|a| v[a] * x[a]).sum::<Complex64>() / x.norm();
                assert!(radial.norm() <= 1e-14 * v.norm().max(1e-300));
            }
        }
    }
}

#[test]
fn divergence_free_by_finite_differences() {
    let x = Vector3::new(0.4, 0.9, -0.6);
    for family in [Family::Te, Family::Tm] {
        for kind in [RadialKind::Regular, RadialKind::Outgoing] {
            let f = field(family, kind, 2, 1, 0.75);
            let div = divergence(&f, &x, 1e-4);
            let scale = f(&x).norm() * 0.75;
            assert!(
                div.norm() <= 1e-5 * scale,
                "{family:?} {kind:?}: {}",
                div.norm() / scale
            );
        }
    }
}

#[test]
fn curl_of_n_is_k_m() {
    let x = Vector3::new(-0.5, 0.8, 1.1);
    for kind in [RadialKind::Regular, RadialKind::Outgoing] {
        let c = curl(&field(Family::Tm, kind, 1, 0, 1.0), &x, 1e-4);
        let m = vswf_eval(Family::Te, kind, 1, 0, 1.0, &x).unwrap().field;
        assert!((c - m).norm() <= 1e-5 * m.norm(), "{kind:?}");
        let c = curl(&field(Family::Te, kind, 3, -2, 1.0), &x, 1e-4);
        let n = vswf_eval(Family::Tm, kind, 3, -2, 1.0, &x).unwrap().field;
        assert!((c - n).norm() <= 1e-5 * n.norm(), "{kind:?}");
    }
}

#[test]
fn vector_helmholtz_residual() {
    let k = 1.3;
    let points = [
        Vector3::new(0.5, 0.0, 0.1),
        Vector3::new(0.3, -1.1, 0.7),
        Vector3::new(-2.0, 1.5, 1.0),
        Vector3::new(0.0, 0.4, -2.9),
    ];
    for x in points {
        for kind in [RadialKind::Regular, RadialKind::Outgoing] {
            for family in [Family::Te, Family::Tm] {
                for n in [1, 2, 5, 10] {
                    for m in [-(n as i64), 0, 1] {
                        let f = field(family, kind, n, m, k);
                        if f(&x).norm() < 1e-8 {
                            continue;
                        }
                        let r = maxwell_residual(&f, &x, k, 4e-4);
                        assert!(
                            r <= 1e-4,
                            "{family:?} {kind:?} n={n} m={m} |x|={}: {r:e}",
                            x.norm()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn conjugation_symmetry() {
    let x = Vector3::new(0.2, 0.9, -0.4);
    let tab = VswfTable::new(6, 0.8, &x, RadialKind::Regular).unwrap();
    for family in [Family::Te, Family::Tm] {
        for n in 1..=6 {
            for m in 1..=(n as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = tab.get(family, n, -m);
                let rhs = tab.get(family, n, m).map(|c| c.conj() * sign);
                assert!((lhs - rhs).norm() <= 1e-14 * rhs.norm().max(1e-300));
            }
        }
    }
}

#[test]
fn invalid_arguments() {
    let x = Vector3::new(0.1, 0.2, 0.3);
    assert!(vswf_eval(Family::Te, RadialKind::Regular, 2, 3, 1.0, &x).is_err());
    assert!(vswf_eval(
        Family::Te,
        RadialKind::Outgoing,
        2,
        1,
        1.0,
        &Vector3::zeros()
    )
    .is_err());
    assert!(vswf_eval(
        Family::Tm,
        RadialKind::Regular,
        1,
        0,
        1.0,
        &Vector3::zeros()
    )
    .is_ok());
    assert!(sph_bessel_table(3, 0.0).is_err());
    assert!(sph_bessel_table(201, 1.0).is_err());
    assert!(assoc_legendre(2, 3, 0.0).is_err());
    assert!(assoc_legendre(2, 1, 1.5).is_err());
}
