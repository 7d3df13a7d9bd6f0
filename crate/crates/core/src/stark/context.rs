//! Propagation context: everything needed to evaluate one trajectory at
//! arbitrary fictitious or real time.

use serde::Serialize;

use crate::error::{Error, Result};

use super::branch::{Branch, BranchSummary, EllipticBranch};
use super::cubic::{Coordinate, CubicPoly};
use super::model::{
    cartesian_to_parabolic, motion_constants, parabolic_to_cartesian, CartesianState, MotionConstants,
    ParabolicState, StarkModel,
};

const TAU_REL_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 200;

/// Immutable, fully-populated solution of one initial-value problem.
#[derive(Debug, Clone)]
pub struct PropagationContext {
    pub model: StarkModel,
    pub initial: CartesianState,
    pub initial_parabolic: ParabolicState,
    pub constants: MotionConstants,
    pub xi: Branch,
    pub eta: Branch,
}

/// Full state at one fictitious time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub tau: f64,
    pub parabolic: ParabolicState,
    pub cartesian: CartesianState,
}

impl PropagationContext {
    pub fn build(state0: &CartesianState, model: &StarkModel) -> Result<Self> {
        model.validate()?;
        let ps = cartesian_to_parabolic(state0)?;
        if ps.p_phi == 0.0 {
            return Err(Error::OutOfScopeBidimensional);
        }
        let constants = motion_constants(&ps, model)?;
        let xi_poly = CubicPoly::for_coordinate(Coordinate::Xi, &constants, model);
        let eta_poly = CubicPoly::for_coordinate(Coordinate::Eta, &constants, model);
        let s_xi = 0.5 * ps.xi * ps.xi;
        let s_eta = 0.5 * ps.eta * ps.eta;
        let xi = Branch::build(Coordinate::Xi, xi_poly, s_xi, ps.xi * ps.p_xi)?;
        let eta = Branch::build(Coordinate::Eta, eta_poly, s_eta, ps.eta * ps.p_eta)?;
        Ok(Self { model: *model, initial: *state0, initial_parabolic: ps, constants, xi, eta })
    }

    /// Either coordinate sits at a double root of its polynomial.
    pub fn is_degenerate(&self) -> bool {
        self.xi.is_stationary() || self.eta.is_stationary()
    }

    pub fn branch(&self, which: Coordinate) -> &Branch {
        match which {
            Coordinate::Xi => &self.xi,
            Coordinate::Eta => &self.eta,
        }
    }

    pub fn elliptic(&self, which: Coordinate) -> Option<&EllipticBranch> {
        match self.branch(which) {
            Branch::Elliptic(b) => Some(b),
            Branch::Stationary(_) => None,
        }
    }

    /// ξ²(τ); `+∞` at the escape pole.
    pub fn xi_squared(&self, tau: f64) -> Result<f64> {
        Ok(2.0 * self.xi.s(tau)?.s)
    }

    pub fn eta_squared(&self, tau: f64) -> Result<f64> {
        Ok(2.0 * self.eta.s(tau)?.s)
    }

    /// ξ²(τ) from the general inversion formula anchored at the initial
    /// point instead of a root.
    pub fn xi_squared_general(&self, tau: f64) -> Result<f64> {
        match &self.xi {
            Branch::Elliptic(b) => Ok(2.0 * b.s_general(tau)?),
            Branch::Stationary(b) => Ok(2.0 * b.s),
        }
    }

    pub fn eta_squared_general(&self, tau: f64) -> Result<f64> {
        match &self.eta {
            Branch::Elliptic(b) => Ok(2.0 * b.s_general(tau)?),
            Branch::Stationary(b) => Ok(2.0 * b.s),
        }
    }

    pub fn phi(&self, tau: f64) -> Result<f64> {
        let i = self.xi.inverse_square_integral(tau)? + self.eta.inverse_square_integral(tau)?;
        Ok(self.initial_parabolic.phi + self.constants.p_phi * i)
    }

    /// Real time as a function of fictitious time.
    pub fn time_of(&self, tau: f64) -> Result<f64> {
        Ok(self.xi.square_integral(tau)? + self.eta.square_integral(tau)?)
    }

    /// `dt/dτ = ξ² + η²`.
    pub fn dt_dtau(&self, tau: f64) -> Result<f64> {
        Ok(2.0 * (self.xi.s(tau)?.s + self.eta.s(tau)?.s))
    }

    /// Bound iff `e_R > f_ξ″(ξ0²/2)/24`.
    pub fn is_bound(&self) -> bool {
        match &self.xi {
            Branch::Elliptic(b) => b.wp.e_r() > b.boundness_threshold(),
            Branch::Stationary(_) => true,
        }
    }

    /// Fictitious times `(τ₋, τ₊)` of the escape poles bracketing `τ = 0`,
    /// or `None` for bound motion.
    pub fn escape_poles(&self) -> Option<(f64, f64)> {
        if self.is_bound() {
            return None;
        }
        let b = self.elliptic(Coordinate::Xi)?;
        let period = 2.0 * b.wp.omega_r();
        // s has its pole where τ − τ_r + ω_r hits the lattice, i.e. at τ_r + ω_R
        let guess = b.tau_r + b.wp.omega_r();
        let mut p = guess - period * (guess / period).floor();
        if p <= 0.0 {
            p += period;
        }
        Some((p - period, p))
    }

    /// State at fictitious time `τ` (real time included).
    pub fn sample_at_tau(&self, tau: f64) -> Result<Sample> {
        let t = self.time_of(tau)?;
        let parabolic = self.parabolic_at(tau)?;
        Ok(Sample { t, tau, parabolic, cartesian: parabolic_to_cartesian(&parabolic) })
    }

    pub fn parabolic_at(&self, tau: f64) -> Result<ParabolicState> {
        let sx = self.xi.s(tau)?;
        let se = self.eta.s(tau)?;
        if !sx.s.is_finite() || !se.s.is_finite() {
            return Err(Error::EscapedBeforeT { t: f64::INFINITY });
        }
        let xi = (2.0 * sx.s.max(0.0)).sqrt();
        let eta = (2.0 * se.s.max(0.0)).sqrt();
        Ok(ParabolicState {
            xi,
            eta,
            phi: self.phi(tau)?,
            // ds/dτ = ξ dξ/dτ = ξ p_ξ
            p_xi: sx.ds / xi,
            p_eta: se.ds / eta,
            p_phi: self.constants.p_phi,
        })
    }

    /// Inverts the time equation: the `τ` with `time_of(τ) = t`.
    ///
    /// The bracket `[0, τ_hint]` is grown geometrically until it straddles
    /// `t` (or, for escaping orbits, squeezed against the escape pole), then
    /// Newton steps with `dt/dτ = ξ² + η²` are clipped to the bracket with a
    /// bisection fallback.
    pub fn tau_of(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let dir = t.signum();
        let limit = self.escape_poles().map(|(lo, hi)| if dir > 0.0 { hi } else { lo });
        let rate0 = self.dt_dtau(0.0)?;
        let mut a = 0.0;
        let mut b = t / rate0;
        if let Some(lim) = limit {
            if (b - lim) * dir >= 0.0 {
                b = 0.5 * lim;
            }
        }
        let mut fb;
        let mut steps = 0;
        loop {
            fb = self.time_of_or_inf(b, dir)? - t;
            if fb * dir >= 0.0 {
                break;
            }
            a = b;
            b = match limit {
                None => 2.0 * b,
                Some(lim) if (2.0 * b - lim) * dir < 0.0 => 2.0 * b,
                Some(lim) => {
                    // t diverges at the pole: halve the remaining gap
                    let gap = lim - b;
                    if gap.abs() <= 1e-13 * lim.abs().max(1.0) {
                        return Err(Error::EscapedBeforeT { t });
                    }
                    b + 0.5 * gap
                }
            };
            steps += 1;
            if steps > 2000 {
                return Err(Error::NoConvergence("time equation bracket"));
            }
        }
        if fb.is_infinite() {
            // t lies beyond what double precision resolves before the pole
            return Err(Error::EscapedBeforeT { t });
        }
        let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
        let mut x = if fb == 0.0 { b } else { 0.5 * (lo + hi) };
        let tol_t = 1e-10 * t.abs().max(1.0);
        for _ in 0..MAX_NEWTON {
            let fx = self.time_of_or_inf(x, dir)? - t;
            if fx.abs() <= 0.01 * tol_t {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.dt_dtau(x)?;
            let mut next = x - fx / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= TAU_REL_TOL * x.abs().max(1e-300) || hi - lo <= TAU_REL_TOL * x.abs() {
                let fn_ = self.time_of_or_inf(next, dir)? - t;
                if fn_.abs() <= tol_t {
                    return Ok(next);
                }
                return Err(Error::NoConvergence("time equation inversion"));
            }
            x = next;
        }
        Err(Error::NoConvergence("time equation inversion"))
    }

    fn time_of_or_inf(&self, tau: f64, dir: f64) -> Result<f64> {
        let v = self.time_of(tau)?;
        Ok(if v.is_finite() { v } else { dir * f64::INFINITY })
    }

    /// Cartesian state at real time `t`.
    pub fn propagate(&self, t: f64) -> Result<CartesianState> {
        Ok(self.sample_at_time(t)?.cartesian)
    }

    pub fn sample_at_time(&self, t: f64) -> Result<Sample> {
        let tau = self.tau_of(t)?;
        let mut s = self.sample_at_tau(tau)?;
        s.t = t;
        Ok(s)
    }

    /// First real time at which an escaping orbit reaches `radius`, or
    /// `None` if the orbit is bound.
    pub fn escape_time(&self, radius: f64) -> Result<Option<f64>> {
        let Some((_, pole)) = self.escape_poles() else {
            return Ok(None);
        };
        let r_at = |tau: f64| -> Result<f64> {
            Ok(self.xi.s(tau)?.s + self.eta.s(tau)?.s)
        };
        if r_at(0.0)? >= radius {
            return Ok(Some(0.0));
        }
        // r → ∞ at the pole; find the last crossing of `radius` before it
        let mut hi = pole;
        let mut gap = 0.5 * pole;
        let mut lo;
        loop {
            lo = pole - gap;
            if lo <= 0.0 {
                lo = 0.0;
                break;
            }
            if r_at(lo)? < radius {
                break;
            }
            hi = lo;
            gap *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if r_at(mid)? < radius {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        Ok(Some(self.time_of(hi)?))
    }

    pub fn summary(&self) -> ContextSummary {
        ContextSummary {
            model: self.model,
            constants: self.constants,
            degenerate: self.is_degenerate(),
            bound: self.is_bound(),
            xi: self.xi.summary(),
            eta: self.eta.summary(),
        }
    }
}

/// JSON digest of a propagation context.
#[derive(Debug, Clone, Serialize)]
pub struct ContextSummary {
    pub model: StarkModel,
    pub constants: MotionConstants,
    pub degenerate: bool,
    pub bound: bool,
    pub xi: BranchSummary,
    pub eta: BranchSummary,
}

/// Builds the context for `state0` and evaluates the state at time `t`.
pub fn propagate(state0: &CartesianState, model: &StarkModel, t: f64) -> Result<CartesianState> {
    PropagationContext::build(state0, model)?.propagate(t)
}
