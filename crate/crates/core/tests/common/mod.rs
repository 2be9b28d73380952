#![allow(dead_code)]

use nalgebra::Vector3;
use nfem::forward::{LayeredCavityConfig, LayeredMedium, Shell};
use nfem::geometry::{CVector, Point};
use nfem::green::Wavenumber;
use num_complex::Complex64;

pub fn wavenumber(k: f64) -> Wavenumber {
    Wavenumber::new(k).unwrap()
}

/// Cavity of radius 1.5 with one shell (A = 1, N = 2) out to 2.5.
pub fn ball_medium(k: f64) -> LayeredMedium {
    LayeredMedium::new(1.5, vec![Shell::new(2.5, 1.0, 2.0)], wavenumber(k)).unwrap()
}

pub fn ball_config(k: f64) -> LayeredCavityConfig {
    let m = ball_medium(k);
    let n = m.resolved_order(1.0);
    m.with_order(n).unwrap()
}

pub fn vacuum_config(k: f64) -> LayeredCavityConfig {
    let m = LayeredMedium::new(1.5, vec![Shell::new(2.5, 1.0, 1.0)], wavenumber(k)).unwrap();
    let n = m.resolved_order(1.0);
    m.with_order(n).unwrap()
}

pub fn polarization() -> Point {
    Vector3::new(1.0, -1.0, 1.0) / 3f64.sqrt()
}

fn unit(a: usize) -> Point {
    let mut e = Vector3::zeros();
    e[a] = 1.0;
    e
}

/// Central-difference partial derivative of a vector field along axis `a`.
pub fn partial<F: Fn(&Point) -> CVector>(f: &F, x: &Point, a: usize, h: f64) -> CVector {
    let e = unit(a) * h;
    (f(&(x + e)) - f(&(x - e))) / Complex64::new(2.0 * h, 0.0)
}

pub fn divergence<F: Fn(&Point) -> CVector>(f: &F, x: &Point, h: f64) -> Complex64 {
    (0..3).map(|a| partial(f, x, a, h)[a]).sum()
}

pub fn curl<F: Fn(&Point) -> CVector>(f: &F, x: &Point, h: f64) -> CVector {
    let d: Vec<CVector> = (0..3).map(|a| partial(f, x, a, h)).collect();
    Vector3::new(d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0])
}

/// Second-order stencil for `curl curl F = grad div F - laplacian F`.
pub fn curl_curl<F: Fn(&Point) -> CVector>(f: &F, x: &Point, h: f64) -> CVector {
    let f0 = f(x);
    let mut lap = CVector::zeros();
    for a in 0..3 {
        let e = unit(a) * h;
        lap += (f(&(x + e)) + f(&(x - e)) - f0 * Complex64::new(2.0, 0.0))
            / Complex64::new(h * h, 0.0);
    }
    let mut grad_div = CVector::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let d2 = if a == b {
                let e = unit(a) * h;
                (f(&(x + e))[a] + f(&(x - e))[a] - f0[a] * 2.0) / (h * h)
            } else {
                let ea = unit(a) * h;
                let eb = unit(b) * h;
                (f(&(x + ea + eb))[b] - f(&(x + ea - eb))[b] - f(&(x - ea + eb))[b]
                    + f(&(x - ea - eb))[b])
                    / (4.0 * h * h)
            };
            grad_div[a] += d2;
        }
    }
    grad_div - lap
}

/// `|curl curl F - k^2 F| / |F|` at `x`, with one Richardson step on the stencil.
pub fn maxwell_residual<F: Fn(&Point) -> CVector>(f: &F, x: &Point, k: f64, h: f64) -> f64 {
    let v = f(x);
    let cc = (curl_curl(f, x, h / 2.0) * Complex64::new(4.0, 0.0) - curl_curl(f, x, h))
        / Complex64::new(3.0, 0.0);
    (cc - v * Complex64::new(k * k, 0.0)).norm() / v.norm()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Deterministic pseudo-random unit vectors (golden-angle spiral).
pub fn spiral_points(count: usize, radius: f64) -> Vec<Point> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            Vector3::new(r * t.cos(), r * t.sin(), z) * radius
        })
        .collect()
}
