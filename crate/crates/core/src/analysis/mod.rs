//! Qualitative dynamics: boundness, asymptotic azimuth, periods, equilibria
//! and the search for (quasi-)periodic orbits.

mod search;

pub use search::{
    decode, find_periodic, find_quasi_periodic, periodic_residual, quasi_periodic_residual, search, Closure,
    OrbitMetrics, SearchBox, SearchConfig, SearchResult, SearchTarget, PENALTY,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stark::{
    cartesian_to_parabolic, is_stationary, motion_constants, Branch, CartesianState, Coordinate, CubicPoly,
    PropagationContext, StarkModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundness {
    Bound,
    Unbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundnessReport {
    pub kind: Boundness,
    pub e_r: f64,
    /// `f_ξ″(ξ0²/2)/24`.
    pub threshold: f64,
    /// `e_R − threshold`; positive iff bound.
    pub margin: f64,
}

/// Bound iff `e_R > f_ξ″(ξ0²/2)/24`, where `℘_ξ(ω_R) = e_R`.
pub fn classify_boundness(ctx: &PropagationContext) -> Result<BoundnessReport> {
    let b = ctx.elliptic(Coordinate::Xi).ok_or(Error::Degenerate("xi"))?;
    let e_r = b.wp.e_r();
    let threshold = b.boundness_threshold();
    let margin = e_r - threshold;
    let kind = if margin > 0.0 { Boundness::Bound } else { Boundness::Unbound };
    Ok(BoundnessReport { kind, e_r, threshold, margin })
}

/// Limit of `φ` as the escaping orbit runs off to infinity: `φ` at the first
/// pole of `ξ²` after `τ = 0`.
///
/// `ξ` and `t` diverge there but `∫dτ/ξ²` does not, so the closed form is
/// evaluated at the pole abscissa directly.
pub fn asymptotic_azimuth(ctx: &PropagationContext) -> Result<f64> {
    if classify_boundness(ctx)?.kind == Boundness::Bound {
        return Err(Error::NotUnbound);
    }
    let (_, pole) = ctx.escape_poles().ok_or(Error::NotUnbound)?;
    ctx.phi(pole)
}

/// Real periods of `ξ²(τ)` and `η²(τ)` in fictitious time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodPair {
    pub t_xi: f64,
    pub t_eta: f64,
}

pub fn real_periods(ctx: &PropagationContext) -> Result<PeriodPair> {
    if !ctx.is_bound() {
        return Err(Error::NotBound);
    }
    let period = |b: &Branch| match b {
        Branch::Elliptic(e) => Ok(2.0 * e.wp.omega_r()),
        Branch::Stationary(_) => Err(Error::Degenerate(b.coordinate().name())),
    };
    Ok(PeriodPair { t_xi: period(&ctx.xi)?, t_eta: period(&ctx.eta)? })
}

/// Height at which gravity balances the field on the `z` axis.
pub fn stationary_equilibrium(model: &StarkModel) -> Result<f64> {
    model.validate()?;
    Ok((model.mu / model.eps).sqrt())
}

/// Initial state of the circular orbit of height `z` about the field axis,
/// placed in the `xz` half-plane `x > 0` and moving towards `+y`.
///
/// Vertical balance gives `r³ = μz/ε`; the centripetal condition gives
/// `v = x√(ε/z)`.
pub fn displaced_circular_conditions(z: f64, model: &StarkModel) -> Result<CartesianState> {
    let limit = stationary_equilibrium(model)?;
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    if z >= limit {
        return Err(Error::BeyondEquilibriumLimit { z, limit });
    }
    if z <= 0.0 {
        return Err(Error::InvalidState("displaced circular orbits need z > 0"));
    }
    let x2 = (z * model.mu / model.eps).powf(2.0 / 3.0) - z * z;
    if x2 <= 0.0 {
        return Err(Error::BeyondEquilibriumLimit { z, limit });
    }
    let x = x2.sqrt();
    Ok(CartesianState::new([x, 0.0, z], [0.0, x * (model.eps / z).sqrt(), 0.0]))
}

/// Boundness margin without building a context.
///
/// `e_R` is the largest real root of the characteristic cubic, and the real
/// roots of `f_ξ` map onto those roots, so no lattice is needed. This also
/// stays well defined at the separatrix, where the lattice degenerates.
pub fn boundness_margin(state: &CartesianState, model: &StarkModel) -> Result<f64> {
    model.validate()?;
    let ps = cartesian_to_parabolic(state)?;
    let c = motion_constants(&ps, model)?;
    let poly = CubicPoly::for_coordinate(Coordinate::Xi, &c, model);
    let s0 = 0.5 * ps.xi * ps.xi;
    if is_stationary(&poly, s0) {
        return Err(Error::Degenerate("xi"));
    }
    let e_r = poly
        .real_roots()
        .iter()
        .map(|&s| poly.a1 * s + 0.5 * poly.a2)
        .fold(f64::NEG_INFINITY, f64::max);
    if !e_r.is_finite() {
        return Err(Error::NoConvergence("characteristic cubic (real root)"));
    }
    Ok(e_r - poly.deriv2(s0) / 24.0)
}

/// Critical field strength for `state`: the smallest `ε` in `(0, eps_max]`
/// at which the boundness margin turns non-positive, or `None` if the orbit
/// stays bound throughout.
pub fn escape_field(state: &CartesianState, mu: f64, eps_max: f64) -> Result<Option<f64>> {
    let margin = |eps: f64| boundness_margin(state, &StarkModel::new(mu, eps)?);
    // geometric scan from a tiny field upwards, then bisection
    let n = 200;
    let lo0 = eps_max * 1e-8;
    let mut prev = lo0;
    if margin(prev)? <= 0.0 {
        return Ok(Some(prev));
    }
    for k in 1..=n {
        let eps = lo0 * (eps_max / lo0).powf(k as f64 / n as f64);
        if margin(eps)? <= 0.0 {
            let (mut lo, mut hi) = (prev, eps);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if margin(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            return Ok(Some(hi));
        }
        prev = eps;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_equilibrium_values() {
        assert_eq!(stationary_equilibrium(&StarkModel::new(1.0, 1.0).unwrap()).unwrap(), 1.0);
        assert_eq!(stationary_equilibrium(&StarkModel::new(4.0, 1.0).unwrap()).unwrap(), 2.0);
        let m = StarkModel::new(1.0, 0.3).unwrap();
        let z = stationary_equilibrium(&m).unwrap();
        assert!((-m.mu / (z * z) + m.eps).abs() < 1e-15);
    }

    #[test]
    fn displaced_circular_balances_forces() {
        let m = StarkModel::new(1.0, 0.05).unwrap();
        let s = displaced_circular_conditions(0.5, &m).unwrap();
        let a = m.acceleration(s.r);
        // net force is purely centripetal
        assert!(a[2].abs() < 1e-15);
        let v2 = s.v[1] * s.v[1];
        assert!((a[0] + v2 / s.r[0]).abs() < 1e-14);
    }

    #[test]
    fn displaced_circular_limits() {
        let m = StarkModel::new(1.0, 0.25).unwrap();
        assert!(matches!(displaced_circular_conditions(2.0, &m), Err(Error::BeyondEquilibriumLimit { .. })));
        assert!(matches!(displaced_circular_conditions(3.0, &m), Err(Error::BeyondEquilibriumLimit { .. })));
        let s = displaced_circular_conditions(2.0 - 1e-9, &m).unwrap();
        assert!(s.r[0] < 1e-3);
    }
}
