#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stark_weierstrass::analysis::escape_field;
use stark_weierstrass::stark::{CartesianState, PropagationContext, StarkModel};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Off-axis state near a circular Kepler orbit of radius ~1, with a random
/// inclination and a modest radial/vertical velocity component.
pub fn random_state(rng: &mut ChaCha8Rng) -> CartesianState {
    loop {
        let r: f64 = rng.gen_range(0.8..1.2);
        let th = rng.gen_range(0.35..std::f64::consts::PI - 0.35);
        let ph = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        let er = [st * cp, st * sp, ct];
        let e_th = [ct * cp, ct * sp, -st];
        let e_ph = [-sp, cp, 0.0];
        let vc = (1.0 / r).sqrt() * rng.gen_range(0.75..1.1);
        let tilt = rng.gen_range(-0.9..0.9_f64);
        let vr = rng.gen_range(-0.15..0.15) * vc;
        let v: [f64; 3] = std::array::from_fn(|i| vc * (tilt.cos() * e_ph[i] + tilt.sin() * e_th[i]) + vr * er[i]);
        let s = CartesianState::new(er.map(|x| x * r), v);
        if s.angular_momentum_z().abs() > 0.1 {
            return s;
        }
    }
}

/// Random bound configuration with `ε ∈ [1e-3, 0.2 ε_escape]`.
pub fn random_bound_case(rng: &mut ChaCha8Rng) -> (CartesianState, StarkModel, f64) {
    loop {
        let s = random_state(rng);
        let esc = escape_field(&s, 1.0, 1.0).unwrap().unwrap_or(1.0);
        let hi = 0.2 * esc;
        if hi <= 2e-3 {
            continue;
        }
        let eps = (rng.gen_range(1e-3f64.ln()..hi.ln())).exp();
        let m = StarkModel::new(1.0, eps).unwrap();
        match PropagationContext::build(&s, &m) {
            Ok(ctx) if ctx.is_bound() => return (s, m, esc),
            _ => continue,
        }
    }
}

/// A handful of fixed bound configurations covering weak and strong fields.
pub fn fixed_bound_cases() -> Vec<(CartesianState, StarkModel)> {
    vec![
        (CartesianState::new([1.0, 0.1, 0.2], [0.05, 1.0, 0.1]), StarkModel::new(1.0, 0.01).unwrap()),
        (CartesianState::new([0.7, -0.4, -0.5], [0.3, 0.8, 0.2]), StarkModel::new(1.0, 0.05).unwrap()),
        (CartesianState::new([0.9, 0.3, 0.4], [-0.2, 0.9, -0.3]), StarkModel::new(1.0, 1e-3).unwrap()),
        (CartesianState::new([1.0, 0.0, -0.3], [0.0, 0.85, 0.0]), StarkModel::new(1.0, 0.1).unwrap()),
    ]
}

pub fn rel_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for j in 0..7 {
        let fs = f(c - h * GK_X[j]) + f(c + h * GK_X[j]);
        k += GK_WK[j] * fs;
        if j % 2 == 1 {
            g += GK_WG[j / 2] * fs;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol.max(1e-15 * v.abs()) || depth > 30 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}
