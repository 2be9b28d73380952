use nalgebra::{DMatrix, Vector3};
use nfem::green::{green_tensor, Wavenumber};
use nfem::lsm::{percentile, spectral_state};
use nfem::measurement::format::{decode, encode};
use nfem::measurement::{NearFieldMatrix, NoiseSpec, SphereGrid};
use nfem::specialfun::sph_bessel_table;
use num_complex::Complex64;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vector3<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wronskian(t in 0.05..50.0f64, n in 0usize..=30) {
        let tab = sph_bessel_table(30, t).unwrap();
        let w = tab.j_values[n] * tab.y_derivs[n] - tab.j_derivs[n] * tab.y_values[n];
        let expect = 1.0 / (t * t);
        prop_assert!(((w - expect) / expect).abs() <= 1e-10, "{} vs {}", w, expect);
    }

    #[test]
    fn green_tensor_is_symmetric_and_reciprocal(x in point(), y in point(), k in 0.2..2.0f64) {
        prop_assume!((x - y).norm() > 0.05);
        let k = Wavenumber::new(k).unwrap();
        let gxy = green_tensor(&x, &y, k).unwrap();
        let gyx = green_tensor(&y, &x, k).unwrap();
        let scale = gxy.norm();
        prop_assert!((gxy - gxy.transpose()).norm() <= 1e-12 * scale);
        prop_assert!((gxy - gyx).norm() <= 1e-12 * scale);
    }

    #[test]
    fn nfem1_round_trip(
        n_theta in 2usize..5,
        n_phi in 4usize..9,
        k in 0.1..3.0f64,
        noise in prop::option::of((0.0..0.1f64, any::<u64>())),
        seed in any::<u64>(),
    ) {
        let grid = SphereGrid::new(n_theta, n_phi, 0.9).unwrap();
        let n = 2 * grid.len();
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let entries = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        let noise = noise.map(|(h, s)| NoiseSpec::new(h, s).unwrap());
        let m = NearFieldMatrix::new(Wavenumber::new(k).unwrap(), grid, entries, noise).unwrap();
        let bytes = encode(&m);
        prop_assert_eq!(&decode(&bytes).unwrap(), &m);
        let mut bad = bytes.clone();
        let i = (seed as usize) % bad.len();
        bad[i] ^= 1 << (seed % 8);
        prop_assert!(decode(&bad).is_err());
    }

    #[test]
    fn tikhonov_residual_grows_and_norm_shrinks_with_alpha(
        sigma in prop::collection::vec(1e-6..1.0f64, 1..20),
        beta_re in prop::collection::vec(-1.0..1.0f64, 20),
        a in -12.0..0.0f64,
        step in 0.01..3.0f64,
    ) {
        let mut sigma = sigma;
        sigma.sort_by(|x, y| y.total_cmp(x));
        let beta: Vec<Complex64> = sigma.iter().zip(&beta_re).map(|(_, &b)| Complex64::new(b, 0.5 * b)).collect();
        let lo = spectral_state(&sigma, &beta, 10f64.powf(a));
        let hi = spectral_state(&sigma, &beta, 10f64.powf(a + step));
        prop_assert!(hi.residual >= lo.residual * (1.0 - 1e-12));
        prop_assert!(hi.g_norm <= lo.g_norm * (1.0 + 1e-12));
    }

    #[test]
    fn percentile_is_bounded_and_monotone(values in prop::collection::vec(-10.0..10.0f64, 1..50), p in 0.0..100.0f64) {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let v = percentile(&values, p).unwrap();
        prop_assert!(v >= lo && v <= hi);
        prop_assert!(percentile(&values, (p + 5.0).min(100.0)).unwrap() >= v);
    }
}
