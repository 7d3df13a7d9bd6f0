//! The separated radial polynomials `f(s) = 4a₁s³ + 6a₂s² + 4a₃s + a₄` with
//! `s = ξ²/2` (or `η²/2`), for which `(ds/dτ)² = f(s)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Cubic;

use super::model::{MotionConstants, StarkModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Xi,
    Eta,
}

impl Coordinate {
    pub fn name(self) -> &'static str {
        match self {
            Coordinate::Xi => "xi",
            Coordinate::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicPoly {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl CubicPoly {
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Self {
        Self { a1, a2, a3, a4 }
    }

    pub fn for_coordinate(which: Coordinate, c: &MotionConstants, model: &StarkModel) -> Self {
        let pp = -c.p_phi * c.p_phi;
        let a2 = 4.0 * c.h / 3.0;
        match which {
            Coordinate::Xi => Self::new(2.0 * model.eps, a2, c.alpha1, pp),
            Coordinate::Eta => Self::new(-2.0 * model.eps, a2, c.alpha2, pp),
        }
    }

    pub fn cubic(&self) -> Cubic<f64> {
        Cubic::new(4.0 * self.a1, 6.0 * self.a2, 4.0 * self.a3, self.a4)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.cubic().eval(s)
    }
    pub fn deriv(&self, s: f64) -> f64 {
        self.cubic().deriv(s)
    }
    pub fn deriv2(&self, s: f64) -> f64 {
        self.cubic().deriv2(s)
    }
    pub fn deriv3(&self) -> f64 {
        24.0 * self.a1
    }
    /// Magnitude against which residuals of [`Self::eval`] are judged.
    pub fn scale(&self, s: f64) -> f64 {
        self.cubic().scale(s)
    }

    pub fn g2(&self) -> f64 {
        -4.0 * self.a1 * self.a3 + 3.0 * self.a2 * self.a2
    }

    pub fn g3(&self) -> f64 {
        2.0 * self.a1 * self.a2 * self.a3 - self.a2 * self.a2 * self.a2 - self.a1 * self.a1 * self.a4
    }

    pub fn real_roots(&self) -> Vec<f64> {
        self.cubic().real_roots()
    }
}

/// Smallest root reachable from `s0`: the lower end of the lobe or arm of
/// `f ≥ 0` that contains `s0`.
///
/// `s0` may sit a rounding error outside the region `f ≥ 0` when the motion
/// starts at a turning point; roots within a relative `1e-9` of `s0` are
/// accepted.
pub fn reachable_root(poly: &CubicPoly, s0: f64) -> Result<f64> {
    let tol = 1e-9 * s0.abs().max(f64::MIN_POSITIVE);
    poly.real_roots()
        .into_iter()
        .filter(|&r| r > 0.0 && r <= s0 + tol && poly.deriv(r) > 0.0)
        .fold(None, |best: Option<f64>, r| Some(best.map_or(r, |b| b.max(r))))
        .ok_or(Error::NoReachableRoot(if poly.a1 > 0.0 { "xi" } else { "eta" }))
}
