//! Carlson's symmetric elliptic integral of the first kind for complex
//! arguments, by the duplication theorem.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `R_F(x, y, z) = ½ ∫₀^∞ dt / √((t+x)(t+y)(t+z))`.
///
/// Principal square roots are used throughout; at most one argument may be
/// zero. Arguments sitting exactly on the negative real axis are taken as the
/// limit from the upper half plane.
pub fn rf<T: Real>(x: Complex<T>, y: Complex<T>, z: Complex<T>) -> Result<Complex<T>> {
    let zero = T::zero();
    let nz = [x, y, z].iter().filter(|v| v.norm() == zero).count();
    if nz > 1 {
        return Err(Error::NoConvergence("rf: more than one zero argument"));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    // the truncated Taylor tail below is O(tol⁶)
    let errtol = T::c(0.0025).max(T::epsilon().powf(T::c(1.0 / 6.0)));
    let three = T::ci(3);
    let quarter = T::c(0.25);
    for _ in 0..200 {
        let mean = (x + y + z) / three;
        let mn = mean.norm();
        let dx = (mean - x) / mean;
        let dy = (mean - y) / mean;
        let dz = (mean - z) / mean;
        let dev = dx.norm().max(dy.norm()).max(dz.norm());
        if dev < errtol || !mn.is_finite() {
            if !mn.is_finite() {
                break;
            }
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let one = Complex::new(T::one(), zero);
            let s = one - e2 * T::c(0.1) + e3 / T::ci(14) + e2 * e2 / T::ci(24)
                - e2 * e3 * T::c(3.0 / 44.0);
            return Ok(s / mean.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = (x + lambda) * quarter;
        y = (y + lambda) * quarter;
        z = (z + lambda) * quarter;
    }
    Err(Error::NoConvergence("rf duplication"))
}
