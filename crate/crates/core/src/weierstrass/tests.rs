use super::*;

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

const CASES: [(f64, f64); 8] = [
    (4.0, 1.0),
    (1.0, 1.0),
    (-2.0, 0.5),
    (4.0, -1.0),
    (1.0, -1.0),
    (3.0, 0.0),
    (-3.0, 0.0),
    (0.37, -0.081),
];

/// Independent oracle: Laurent series at a small argument, carried out to `z`
/// by repeated duplication.
struct Laurent {
    g2: f64,
    coeffs: Vec<f64>,
    radius: f64,
}

impl Laurent {
    /// `lattice_min` is the distance from 0 to the nearest other lattice point.
    fn new(g2: f64, g3: f64, lattice_min: f64) -> Self {
        let n = 80;
        let mut cfs = vec![0.0; n + 1];
        cfs[2] = g2 / 20.0;
        cfs[3] = g3 / 28.0;
        for k in 4..=n {
            let s: f64 = (2..=k - 2).map(|m| cfs[m] * cfs[k - m]).sum();
            cfs[k] = 3.0 / (((2 * k + 1) * (k - 3)) as f64) * s;
        }
        Self { g2, coeffs: cfs, radius: 0.3 * lattice_min }
    }

    /// (℘, ℘′, ℘″, ζ, σ) near the origin.
    fn small(&self, z: C) -> (C, C, C, C, C) {
        let mut p = z.powi(-2);
        let mut dp = -z.powi(-3) * 2.0;
        let mut zeta = z.inv();
        for (k, ck) in self.coeffs.iter().enumerate().skip(2) {
            let e = 2 * k as i32 - 2;
            p += z.powi(e) * *ck;
            dp += z.powi(e - 1) * (*ck * e as f64);
            zeta -= z.powi(e + 1) * (*ck / (e + 1) as f64);
        }
        let ddp = p * p * 6.0 - self.g2 / 2.0;
        // σ = exp(∫(ζ − 1/z)) z
        let mut ls = c(0.0, 0.0);
        for (k, ck) in self.coeffs.iter().enumerate().skip(2) {
            let e = 2 * k as i32;
            ls -= z.powi(e) * (*ck / ((e - 1) * e) as f64);
        }
        (p, dp, ddp, zeta, z * ls.exp())
    }

    fn eval(&self, z: C) -> (C, C, C, C, C) {
        let mut j = 0;
        let mut zz = z;
        while zz.norm() > self.radius {
            zz /= 2.0;
            j += 1;
        }
        let (mut p, mut dp, mut ddp, mut zeta, mut sigma) = self.small(zz);
        for _ in 0..j {
            let np = -p * 2.0 + (ddp * ddp) / (dp * dp * 4.0);
            let nzeta = zeta * 2.0 + ddp / (dp * 2.0);
            let nsigma = -dp * sigma.powi(4);
            let ndp = dp_dup(p, dp, ddp);
            p = np;
            dp = ndp;
            ddp = p * p * 6.0 - self.g2 / 2.0;
            zeta = nzeta;
            sigma = nsigma;
        }
        (p, dp, ddp, zeta, sigma)
    }

}

/// d/dz of ℘(2z) expressed through ℘, ℘′, ℘″ at z, divided by 2.
fn dp_dup(p: C, dp: C, ddp: C) -> C {
    // ℘(2z) = −2℘ + ℘″²/(4℘′²); ℘‴ = 12℘℘′
    let dddp = p * dp * 12.0;
    let d = -dp * 2.0 + (ddp * dddp * 2.0 * dp * dp - ddp * ddp * dp * ddp * 2.0) / (dp.powi(4) * 4.0);
    d / 2.0
}

fn lattice_min(ctx: &WeierstrassContext<f64>) -> f64 {
    let (r, w) = (c(2.0 * ctx.omega_r(), 0.0), ctx.omega_c() * 2.0);
    [r, w, w - r, w + r].iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min)
}

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

#[test]
fn matches_laurent_duplication_oracle() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        let oracle = Laurent::new(g2, g3, lattice_min(&ctx));
        let w = ctx.omega_r();
        for z in [c(0.3 * w, 0.1), c(0.9 * w, -0.2), ctx.omega_c() * 0.7 + 0.2, c(0.05, 0.01), c(1.3 * w, 0.15)] {
            let (p, dp, _, zeta, sigma) = oracle.eval(z);
            assert!(close(ctx.wp(z).unwrap(), p, 1e-10), "wp {g2} {g3} {z}: {} vs {p}", ctx.wp(z).unwrap());
            assert!(close(ctx.wp_prime(z).unwrap(), dp, 1e-9), "wp' {g2} {g3} {z}");
            assert!(close(ctx.zeta(z).unwrap(), zeta, 1e-10), "zeta {g2} {g3} {z}");
            assert!(close(ctx.sigma(z).unwrap(), sigma, 1e-9), "sigma {g2} {g3} {z}");
        }
    }
}

#[test]
fn half_periods_hit_roots() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        let e = ctx.roots();
        // roots satisfy the cubic and sum to zero
        for r in e {
            assert!((r * r * r * 4.0 - r * g2 - g3).norm() < 1e-12);
        }
        assert!((e[0] + e[1] + e[2]).norm() < 1e-12);
        for (k, hp) in ctx.half_periods().iter().enumerate() {
            assert!(close(ctx.wp(*hp).unwrap(), e[k], 1e-11));
            assert!(ctx.wp_prime(*hp).unwrap().norm() < 1e-9);
        }
        assert_eq!(ctx.e_r(), e[0].re);
        assert!(e[0].im == 0.0);
        assert!(close(ctx.wp(c(ctx.omega_r(), 0.0)).unwrap(), e[0], 1e-12));
    }
}

#[test]
fn differential_equation_and_periodicity() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        let two_r = c(2.0 * ctx.omega_r(), 0.0);
        let two_c = ctx.omega_c() * 2.0;
        for z in [c(0.21, 0.37), c(-1.4, 0.9), c(3.3, -2.2), c(0.7, 0.0)] {
            let (p, dp) = ctx.wp_and_prime(z).unwrap();
            assert!(close(dp * dp, p * p * p * 4.0 - p * g2 - g3, 1e-10));
            for shift in [two_r, two_c, two_r * 3.0 - two_c * 2.0] {
                assert!(close(ctx.wp(z + shift).unwrap(), p, 1e-10));
            }
            // ζ′ = −℘ by central difference
            let h = 1e-5;
            let dz = (ctx.zeta(z + h).unwrap() - ctx.zeta(z - h).unwrap()) / (2.0 * h);
            assert!(close(dz, -p, 1e-7));
            let dpn = (ctx.wp(z + h).unwrap() - ctx.wp(z - h).unwrap()) / (2.0 * h);
            assert!(close(dpn, dp, 1e-7));
        }
    }
}

#[test]
fn quasi_periods_and_legendre() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        let oracle = Laurent::new(g2, g3, lattice_min(&ctx));
        let wr = c(ctx.omega_r(), 0.0);
        assert!(close(c(ctx.eta_r(), 0.0), oracle.eval(wr).3, 1e-10));
        assert!(close(ctx.eta_c(), oracle.eval(ctx.omega_c()).3, 1e-10));
        let lhs = ctx.eta_c() * ctx.omega_r() - ctx.omega_c() * ctx.eta_r();
        assert!(close(lhs, c(0.0, -std::f64::consts::FRAC_PI_2), 1e-13));
        let z = c(0.31, 0.17);
        let dz = ctx.zeta(z + wr * 2.0).unwrap() - ctx.zeta(z).unwrap();
        assert!(close(dz, c(2.0 * ctx.eta_r(), 0.0), 1e-11));
    }
}

#[test]
fn lattice_shape() {
    let pos = WeierstrassContext::<f64>::new(4.0, 1.0).unwrap();
    assert_eq!(pos.discriminant_sign(), DiscriminantSign::Positive);
    assert_eq!(pos.omega_c().re, 0.0);
    assert_eq!(pos.omega().im, 0.0);
    assert!(pos.nome().re > 0.0 && pos.nome().im.abs() < 1e-15);
    let neg = WeierstrassContext::<f64>::new(1.0, 1.0).unwrap();
    assert_eq!(neg.discriminant_sign(), DiscriminantSign::Negative);
    assert!((neg.omega_c().re - neg.omega_r() / 2.0).abs() < 1e-15);
    assert!(close(neg.omega(), neg.omega_c().conj(), 1e-15));
    assert!(WeierstrassContext::<f64>::new(3.0, 1.0).is_err());
    assert!(WeierstrassContext::<f64>::new(0.0, 0.0).is_err());
    assert!(matches!(
        WeierstrassContext::<f64>::new(3.0, 1.0 + 1e-17),
        Err(Error::DegenerateLattice { .. })
    ));
}

#[test]
fn negative_g3_is_folded_consistently() {
    for (g2, g3) in [(4.0, 1.0), (1.0, 1.0), (-2.0, 0.5)] {
        let a = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        let b = WeierstrassContext::<f64>::new(g2, -g3).unwrap();
        assert!(b.g3_was_negative());
        let i = c(0.0, 1.0);
        for z in [c(0.2, 0.1), c(0.7, -0.3)] {
            // ℘(z; g2, −g3) = −℘(iz; g2, g3)
            assert!(close(b.wp(z).unwrap(), -a.wp(i * z).unwrap(), 1e-11));
        }
    }
}

#[test]
fn homogeneity() {
    // ℘(λz; λ⁻⁴g2, λ⁻⁶g3) = λ⁻²℘(z; g2, g3)
    let lam: f64 = 1.7;
    let a = WeierstrassContext::<f64>::new(4.0, 1.0).unwrap();
    let b = WeierstrassContext::<f64>::new(4.0 * lam.powi(-4), lam.powi(-6)).unwrap();
    let z = c(0.33, 0.21);
    assert!(close(b.wp(z * lam).unwrap(), a.wp(z).unwrap() / (lam * lam), 1e-12));
    assert!((b.omega_r() - lam * a.omega_r()).abs() < 1e-13);
}

#[test]
fn pole_is_reported() {
    let ctx = WeierstrassContext::<f64>::new(4.0, 1.0).unwrap();
    assert!(matches!(ctx.wp(c(0.0, 0.0)), Err(Error::PoleProximity { .. })));
    let lat = c(2.0 * ctx.omega_r(), 0.0);
    assert!(matches!(ctx.zeta(lat), Err(Error::PoleProximity { .. })));
    assert_eq!(ctx.sigma(lat).unwrap().norm() < 1e-12, true);
}

#[test]
fn inverse_round_trip() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        for w in [c(0.3, 0.4), c(-2.0, 0.0), c(5.0, 0.0), c(0.0, -3.0), c(1e6, 0.0), ctx.roots()[1]] {
            let zs = ctx.wp_inverse(w).unwrap();
            for z in zs {
                let v = ctx.wp(z).unwrap();
                assert!((v - w).norm() <= 1e-9 * w.norm().max(1.0), "{g2} {g3} {w} -> {z}: {v}");
            }
            let (s, _, _) = ctx.reduce(zs[0] + zs[1]);
            assert!(s.norm() < 1e-8);
        }
    }
}

#[test]
fn log_sigma_is_continuous_and_consistent() {
    for (g2, g3) in CASES {
        let ctx = WeierstrassContext::<f64>::new(g2, g3).unwrap();
        for beta in [0.3, -0.45, 0.0, 0.8] {
            let shift = ctx.omega_c() * (2.0 * beta) + 0.123;
            let mut prev = ctx.log_sigma_continuous(-7.0 * ctx.omega_r(), shift).unwrap();
            let n = 2000;
            for k in 1..=n {
                let x = -7.0 * ctx.omega_r() + 14.0 * ctx.omega_r() * k as f64 / n as f64;
                if beta == 0.0 && (((x + 0.123) / (2.0 * ctx.omega_r())).round() * 2.0 * ctx.omega_r() - x - 0.123).abs() < 0.05 {
                    // zeros of σ on the real axis
                    prev = ctx.log_sigma_continuous(x, shift).unwrap();
                    continue;
                }
                let l = ctx.log_sigma_continuous(x, shift).unwrap();
                assert!((l.im - prev.im).abs() < 0.5, "jump at {x} for {g2},{g3},{beta}");
                let s = ctx.sigma(shift + x).unwrap();
                assert!(close(l.exp(), s, 1e-9 * (1.0 + s.norm())));
                prev = l;
            }
        }
        assert!(matches!(
            ctx.log_sigma_continuous(0.0, ctx.omega_c() * 2.0),
            Err(Error::OutsideStrip { .. })
        ));
    }
}

#[test]
fn single_precision_kernel() {
    let ctx = WeierstrassContext::<f32>::new(4.0, 1.0).unwrap();
    let ctx64 = WeierstrassContext::<f64>::new(4.0, 1.0).unwrap();
    let z = Complex::new(0.4f32, 0.3);
    let a = ctx.wp(z).unwrap();
    let b = ctx64.wp(c(0.4, 0.3)).unwrap();
    assert!((a.re as f64 - b.re).abs() < 1e-4 * b.norm());
    assert!((ctx.omega_r() as f64 - ctx64.omega_r()).abs() < 1e-5);
}
