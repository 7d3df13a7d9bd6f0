//! Two-body propagation through the eccentric anomaly; the `ε → 0` reference.

use crate::error::{Error, Result};
use crate::stark::CartesianState;

/// Propagates an elliptic two-body state by `t` using Lagrange's `f, g`
/// coefficients in the eccentric-anomaly increment.
pub fn propagate_kepler(s: &CartesianState, mu: f64, t: f64) -> Result<CartesianState> {
    let r0 = s.radius();
    let v2 = s.v.iter().map(|v| v * v).sum::<f64>();
    let inv_a = 2.0 / r0 - v2 / mu;
    if inv_a <= 0.0 {
        return Err(Error::NotBound);
    }
    let a = 1.0 / inv_a;
    let sa = a.sqrt();
    let sigma0 = (s.r[0] * s.v[0] + s.r[1] * s.v[1] + s.r[2] * s.v[2]) / mu.sqrt();
    let n = (mu / (a * a * a)).sqrt();
    let ec = 1.0 - r0 / a;
    let es = sigma0 / sa;
    let m = n * t;
    let kepler = |de: f64| de + es * (1.0 - de.cos()) - ec * de.sin() - m;
    let mut de = m;
    for _ in 0..100 {
        let fp = 1.0 + es * de.sin() - ec * de.cos();
        let step = kepler(de) / fp;
        de -= step;
        if step.abs() <= 1e-15 * de.abs().max(1.0) {
            break;
        }
    }
    if kepler(de).abs() > 1e-12 * m.abs().max(1.0) {
        return Err(Error::NoConvergence("Kepler equation"));
    }
    let (sn, cs) = de.sin_cos();
    let r = a + (r0 - a) * cs + sigma0 * sa * sn;
    let f = 1.0 - a / r0 * (1.0 - cs);
    let g = t - (a * a * a / mu).sqrt() * (de - sn);
    let fd = -(mu * a).sqrt() / (r * r0) * sn;
    let gd = 1.0 - a / r * (1.0 - cs);
    let comb = |x: [f64; 3], y: [f64; 3], p: f64, q: f64| [p * x[0] + q * y[0], p * x[1] + q * y[1], p * x[2] + q * y[2]];
    Ok(CartesianState { r: comb(s.r, s.v, f, g), v: comb(s.r, s.v, fd, gd) })
}
