mod common;

use common::quad;
use num_complex::Complex;
use rand::Rng;
use stark_weierstrass::{Error, Weierstrass, Weierstrass32};

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Contexts with three real roots, one real root, and a folded `g3 < 0`.
fn contexts() -> Vec<Weierstrass> {
    [(4.0, 1.0), (1.0, 1.0), (4.0, -1.0), (1.0, -1.0)].iter().map(|&(a, b)| Weierstrass::new(a, b).unwrap()).collect()
}

/// Lemniscatic half-period `∫₁^∞ dt/√(4t³ − 4t)`; `t = 1/v²`, `v = sin φ`
/// turn it into `∫₀^{π/2} dφ/√(1 + sin²φ)`.
fn lemniscatic_half_period() -> f64 {
    quad(|p: f64| 1.0 / (1.0 + p.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
}

/// Square-lattice sum for `g2 = 4, g3 = 0` with the `w⁻⁴` Eisenstein term
/// `G4 = g2/60` restored analytically; the truncated tail is then `O(R⁻⁶)`.
fn lattice_sum_wp(z: C, w: f64, g2: f64) -> C {
    let n = 40;
    let mut acc = z.powi(-2) + z * z * (3.0 * g2 / 60.0);
    for m in -n..=n {
        for k in -n..=n {
            if m == 0 && k == 0 {
                continue;
            }
            let l = c(2.0 * w * m as f64, 2.0 * w * k as f64);
            acc += (z - l).powi(-2) - l.powi(-2) - z * 2.0 / l.powi(3) - z * z * 3.0 / l.powi(4);
        }
    }
    acc
}

#[test]
fn lemniscatic_case() {
    let ctx = Weierstrass::new(4.0, 0.0).unwrap();
    let e = ctx.roots();
    for (r, want) in e.iter().zip([1.0, 0.0, -1.0]) {
        assert!((r - want).norm() < 1e-15);
    }
    let w = lemniscatic_half_period();
    assert!((w - 1.311_028_777_146_059_9).abs() < 1e-14);
    assert!((ctx.omega_r() - w).abs() < 1e-13);
    // ω_R ∝ g2^(−1/4): g2 = 1 gives K(1/√2)
    let unit = Weierstrass::new(1.0, 0.0).unwrap();
    assert!((unit.omega_r() - 1.854_074_677_301_372).abs() < 1e-13);
    assert!((ctx.wp(c(ctx.omega_r(), 0.0)).unwrap() - 1.0).norm() < 1e-13);
    let oracle = lattice_sum_wp(c(0.5, 0.0), w, 4.0);
    let got = ctx.wp(c(0.5, 0.0)).unwrap();
    assert!((got - oracle).norm() < 1e-10 * oracle.norm(), "{got} vs {oracle}");
    let z = c(0.4, 0.7);
    assert!((ctx.wp(z).unwrap() - lattice_sum_wp(z, w, 4.0)).norm() < 1e-10 * ctx.wp(z).unwrap().norm());
}

#[test]
fn sign_of_g3_reflects_roots() {
    let a = Weierstrass::new(1.0, 1.0).unwrap();
    let b = Weierstrass::new(1.0, -1.0).unwrap();
    let mut ra: Vec<C> = a.roots().to_vec();
    let mut rb: Vec<C> = b.roots().iter().map(|r| -r).collect();
    let key = |x: &C| (x.re, x.im);
    ra.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    rb.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x - y).norm() < 1e-14);
    }
}

#[test]
fn symmetry_and_derivatives() {
    let mut rng = common::rng(7);
    for ctx in contexts() {
        for _ in 0..30 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0));
            let p = ctx.wp(z).unwrap();
            assert!((ctx.wp(-z).unwrap() - p).norm() < 1e-12 * p.norm().max(1.0));
            let dp = ctx.wp_prime(z).unwrap();
            assert!((ctx.wp_prime(-z).unwrap() + dp).norm() < 1e-11 * dp.norm().max(1.0));
            assert!((ctx.zeta(-z).unwrap() + ctx.zeta(z).unwrap()).norm() < 1e-12 * ctx.zeta(z).unwrap().norm().max(1.0));
            let h = 1e-6 * z.norm();
            let fd = (ctx.wp(z + h).unwrap() - ctx.wp(z - h).unwrap()) / (2.0 * h);
            assert!((fd - dp).norm() <= 1e-6 * dp.norm().max(1.0));
            let fdz = (ctx.zeta(z + h).unwrap() - ctx.zeta(z - h).unwrap()) / (2.0 * h);
            assert!((fdz + p).norm() <= 1e-6 * p.norm().max(1.0));
            let ls = |x: C| ctx.sigma(x).unwrap().ln();
            let fds = (ls(z + h) - ls(z - h)) / (2.0 * h);
            let zt = ctx.zeta(z).unwrap();
            assert!((fds - zt).norm() <= 1e-6 * zt.norm().max(1.0));
        }
        assert!(ctx.wp_prime(c(ctx.omega_r(), 0.0)).unwrap().norm() < 1e-9);
    }
}

#[test]
fn sigma_normalisation_and_quasi_periodicity() {
    for ctx in contexts() {
        assert_eq!(ctx.sigma(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let z = c(1e-5, 2e-6);
        assert!((ctx.sigma(z).unwrap() / z - 1.0).norm() < 1e-9);
        let (wr, wc) = (c(ctx.omega_r(), 0.0), ctx.omega_c());
        let (er, ec) = (c(ctx.eta_r(), 0.0), ctx.eta_c());
        for z in [c(0.3, 0.2), c(-0.7, 0.05), c(0.1, -0.4)] {
            let s = ctx.sigma(z).unwrap();
            // (M, N) = (1, 0), (0, 1), (1, 1): factor (−1)^{M+N+MN} exp(2(Mη_R + Nη_C)(z + Mω_R + Nω_C))
            for (m, n) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
                let shift = (wr * m + wc * n) * 2.0;
                let eta = er * m + ec * n;
                let sign = if (m + n + m * n) as i32 % 2 == 0 { 1.0 } else { -1.0 };
                let want = s * sign * (eta * 2.0 * (z + shift * 0.5)).exp();
                let got = ctx.sigma(z + shift).unwrap();
                assert!((got - want).norm() < 1e-9 * want.norm(), "{m},{n}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn inverse_candidates() {
    let mut rng = common::rng(8);
    for ctx in contexts() {
        let er = ctx.e_r();
        let zs = ctx.wp_inverse(c(er, 0.0)).unwrap();
        for z in zs {
            assert!((ctx.wp(z).unwrap() - er).norm() < 1e-10 * er.abs().max(1.0));
        }
        for _ in 0..100 {
            let w = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let zs = ctx.wp_inverse(w).unwrap();
            for z in zs {
                assert!((ctx.wp(z).unwrap() - w).norm() < 1e-9 * w.norm().max(1.0));
            }
            // v₁ + v₂ lies on the lattice
            let (red, _, _) = ctx.reduce(zs[0] + zs[1]);
            assert!(red.norm() < 1e-8);
        }
    }
}

#[test]
fn log_sigma_across_period_boundaries() {
    for ctx in contexts() {
        let two_r = 2.0 * ctx.omega_r();
        let shift = ctx.omega_c() * 0.6 + 0.1;
        for n in -3..=3 {
            let x = n as f64 * two_r;
            let lo = ctx.log_sigma_continuous(x - 1e-9, shift).unwrap();
            let hi = ctx.log_sigma_continuous(x + 1e-9, shift).unwrap();
            assert!((hi - lo).norm() < 1e-6, "jump {} at N = {n}", (hi - lo).norm());
        }
        let l0 = ctx.log_sigma_continuous(0.0, shift).unwrap();
        assert!(l0.im > -std::f64::consts::PI && l0.im <= std::f64::consts::PI);
        assert!((l0.exp() - ctx.sigma(shift).unwrap()).norm() < 1e-12 * l0.exp().norm());
        assert!(matches!(ctx.log_sigma_continuous(0.0, ctx.omega_c() * 2.5), Err(Error::OutsideStrip { .. })));
    }
}

#[test]
fn evaluation_errors() {
    let ctx = Weierstrass::new(4.0, 1.0).unwrap();
    assert!(matches!(ctx.wp(c(2.0 * ctx.omega_r(), 0.0)), Err(Error::PoleProximity { .. })));
    assert!(matches!(Weierstrass::new(f64::NAN, 1.0), Err(Error::NonFinite(_))));
    assert!(matches!(Weierstrass::new(3.0, 1.0), Err(Error::DegenerateLattice { .. })));
}

#[test]
fn single_precision_alias() {
    let ctx = Weierstrass32::new(1.0, 0.0).unwrap();
    assert!((ctx.omega_r() - 1.854_074_7).abs() < 1e-5);
}
