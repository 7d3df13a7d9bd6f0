//! Numerical ground truth: direct integration of the equations of motion,
//! independent of the elliptic-function machinery.

mod dopri;
pub mod kepler;

pub use dopri::{integrate, integrate_fixed, IntegratorConfig};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stark::{CartesianState, MotionConstants, ParabolicState, StarkModel};

/// `|r|` below this fraction of the initial radius aborts the run.
pub const COLLISION_FLOOR: f64 = 1e-9;

/// Cartesian states at the requested times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CartesianState>,
}

fn cartesian_rhs(model: StarkModel) -> impl Fn(f64, &[f64; 6]) -> [f64; 6] {
    move |_, y| {
        let a = model.acceleration([y[0], y[1], y[2]]);
        [y[3], y[4], y[5], a[0], a[1], a[2]]
    }
}

/// The only singularity of the Cartesian system is the centre, so a step-size
/// collapse there is a collision even if double-precision time cannot resolve
/// the approach all the way down to the floor.
fn underflow_as_collision(e: Error, r: f64, floor: f64) -> Error {
    match e {
        Error::StepUnderflow => Error::CollisionApproach { r, floor },
        e => e,
    }
}

/// Aborts when the chord of an accepted step passes within `floor` of the
/// origin; a coarse step can otherwise jump straight across the singularity.
fn collision_guard(floor: f64, r0: [f64; 3]) -> impl FnMut(f64, &[f64; 6]) -> Result<bool> {
    let mut prev = r0;
    move |_, y| {
        let p = [y[0], y[1], y[2]];
        let d = [p[0] - prev[0], p[1] - prev[1], p[2] - prev[2]];
        let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let lam = if dd > 0.0 { (-(prev[0] * d[0] + prev[1] * d[1] + prev[2] * d[2]) / dd).clamp(0.0, 1.0) } else { 0.0 };
        let c = [prev[0] + lam * d[0], prev[1] + lam * d[1], prev[2] + lam * d[2]];
        let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        prev = p;
        if r < floor {
            Err(Error::CollisionApproach { r, floor })
        } else {
            Ok(false)
        }
    }
}

/// Integrates `r̈ = −μr/|r|³ + εẑ` and samples it at `times` (monotone,
/// starting anywhere on the side of `t = 0` being integrated towards).
pub fn integrate_cartesian_at(
    state0: &CartesianState,
    model: &StarkModel,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    model.validate()?;
    state0.validate()?;
    let floor = COLLISION_FLOOR * state0.radius();
    let mut guard = collision_guard(floor, state0.r);
    let mut last_r = state0.radius();
    let ys = integrate(cartesian_rhs(*model), 0.0, state0.to_array(), times, cfg, |t, y| {
        last_r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        guard(t, y)
    })
    .map_err(|e| underflow_as_collision(e, last_r, floor))?;
    Ok(Trajectory { times: times.to_vec(), states: ys.iter().map(|y| CartesianState::from_slice(y)).collect() })
}

/// Integrates to `t_end` and returns `samples` equally spaced states
/// including both endpoints.
pub fn integrate_cartesian(
    state0: &CartesianState,
    model: &StarkModel,
    t_end: f64,
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if samples < 2 || t_end == 0.0 || !t_end.is_finite() {
        return Err(Error::InvalidConfig("need samples >= 2 and finite non-zero t_end"));
    }
    let times: Vec<f64> = (0..samples).map(|k| t_end * k as f64 / (samples - 1) as f64).collect();
    integrate_cartesian_at(state0, model, &times, cfg)
}

/// Outcome of an escape watch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeWatch {
    pub escaped: bool,
    /// Time at which the watch ended (escape detection or `t_max`).
    pub t: f64,
    pub max_radius: f64,
}

/// Integrates until `|r| > radius` or `t = t_max`.
pub fn watch_escape(
    state0: &CartesianState,
    model: &StarkModel,
    radius: f64,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<EscapeWatch> {
    model.validate()?;
    state0.validate()?;
    let floor = COLLISION_FLOOR * state0.radius();
    let mut guard = collision_guard(floor, state0.r);
    let mut watch = EscapeWatch { escaped: false, t: t_max, max_radius: state0.radius() };
    let mut last_r = state0.radius();
    let mut cfg = *cfg;
    cfg.dense_output = true;
    integrate(cartesian_rhs(*model), 0.0, state0.to_array(), &[t_max], &cfg, |t, y| {
        guard(t, y)?;
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        last_r = r;
        watch.max_radius = watch.max_radius.max(r);
        if r > radius {
            watch.escaped = true;
            watch.t = t;
            return Ok(true);
        }
        Ok(false)
    })
    .map_err(|e| underflow_as_collision(e, last_r, floor))?;
    Ok(watch)
}

/// One sample of the fictitious-time integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FictitiousSample {
    pub tau: f64,
    pub xi_squared: f64,
    pub eta_squared: f64,
    pub phi: f64,
    pub t: f64,
    pub p_xi: f64,
    pub p_eta: f64,
}

/// Integrates the separated Hamilton equations in fictitious time:
///
/// `ξ′ = p_ξ`, `p_ξ′ = 2εξ³ + 2hξ + p_φ²/ξ³` (and the mirror for `η` with
/// `−ε`), `φ′ = p_φ(1/ξ² + 1/η²)`, `t′ = ξ² + η²`.
///
/// Working with `(ξ, p_ξ)` rather than `ξ′ = ±√…` keeps turning points
/// regular.
pub fn integrate_parabolic_fictitious(
    ps0: &ParabolicState,
    constants: &MotionConstants,
    model: &StarkModel,
    taus: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<FictitiousSample>> {
    model.validate()?;
    if ps0.p_phi == 0.0 {
        return Err(Error::OutOfScopeBidimensional);
    }
    let (h, eps, pp2) = (constants.h, model.eps, ps0.p_phi * ps0.p_phi);
    let p_phi = ps0.p_phi;
    let rhs = move |_: f64, y: &[f64; 6]| {
        let [xi, eta, p_xi, p_eta, _, _] = *y;
        let (x2, e2) = (xi * xi, eta * eta);
        [
            p_xi,
            p_eta,
            2.0 * eps * x2 * xi + 2.0 * h * xi + pp2 / (x2 * xi),
            -2.0 * eps * e2 * eta + 2.0 * h * eta + pp2 / (e2 * eta),
            p_phi * (1.0 / x2 + 1.0 / e2),
            x2 + e2,
        ]
    };
    let y0 = [ps0.xi, ps0.eta, ps0.p_xi, ps0.p_eta, ps0.phi, 0.0];
    let ys = integrate(rhs, 0.0, y0, taus, cfg, |_, y| {
        if y.iter().all(|v| v.is_finite()) {
            Ok(false)
        } else {
            Err(Error::NonFinite("fictitious-time integration"))
        }
    })?;
    Ok(taus
        .iter()
        .zip(ys)
        .map(|(&tau, y)| FictitiousSample {
            tau,
            xi_squared: y[0] * y[0],
            eta_squared: y[1] * y[1],
            phi: y[4],
            t: y[5],
            p_xi: y[2],
            p_eta: y[3],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stark::{cartesian_to_parabolic, motion_constants};

    fn model(eps: f64) -> StarkModel {
        StarkModel { mu: 1.0, eps }
    }

    #[test]
    fn circular_kepler_orbit_closes() {
        // ε = 0 is outside the model's domain; the integrator itself does not care
        let m = StarkModel { mu: 1.0, eps: 0.0 };
        let s = CartesianState::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let tp = 2.0 * std::f64::consts::PI;
        let rhs = cartesian_rhs(m);
        let cfg = IntegratorConfig::with_tol(1e-12, 1e-14);
        let y = integrate(rhs, 0.0, s.to_array(), &[tp], &cfg, |_, _| Ok(false)).unwrap()[0];
        for (a, b) in y.iter().zip(s.to_array()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn conservation_over_ten_periods() {
        let m = model(0.01);
        let s = CartesianState::new([1.0, 0.1, 0.2], [0.05, 1.0, 0.1]);
        let rel_tol = 1e-11;
        let cfg = IntegratorConfig::with_tol(rel_tol, 1e-13);
        let tr = integrate_cartesian(&s, &m, 10.0 * 2.0 * std::f64::consts::PI, 200, &cfg).unwrap();
        let (h0, l0) = (m.energy(&s), s.angular_momentum_z());
        for st in &tr.states {
            assert!((m.energy(st) - h0).abs() <= 10.0 * rel_tol * h0.abs());
            assert!((st.angular_momentum_z() - l0).abs() <= 10.0 * rel_tol * l0.abs());
        }
    }

    #[test]
    fn collision_is_reported() {
        // fall along the field axis passes exactly through the centre
        let m = model(1e-3);
        let s = CartesianState::new([0.0, 0.0, 1.0], [0.0, 0.0, -0.01]);
        let cfg = IntegratorConfig::with_tol(1e-10, 1e-14);
        let err = integrate_cartesian(&s, &m, 10.0, 3, &cfg).unwrap_err();
        assert!(matches!(err, Error::CollisionApproach { .. }), "{err:?}");
    }

    #[test]
    fn fictitious_time_is_monotone_and_conserves_separation() {
        let m = model(0.02);
        let s = CartesianState::new([1.0, 0.1, 0.2], [0.05, 1.0, 0.1]);
        let ps = cartesian_to_parabolic(&s).unwrap();
        let c = motion_constants(&ps, &m).unwrap();
        let taus: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
        let out = integrate_parabolic_fictitious(&ps, &c, &m, &taus, &IntegratorConfig::default()).unwrap();
        for w in out.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        for smp in &out {
            // α₁ reconstructed from the sample is constant
            let x2 = smp.xi_squared;
            let a1 = -0.5 * m.eps * x2 * x2 - c.h * x2 + 0.5 * smp.p_xi * smp.p_xi + 0.5 * c.p_phi * c.p_phi / x2;
            assert!((a1 - c.alpha1).abs() < 1e-10);
        }
    }

    #[test]
    fn escape_watch_detects_runaway() {
        let m = model(0.5);
        let s = CartesianState::new([1.0, 0.0, 0.5], [0.0, 1.2, 0.5]);
        let w = watch_escape(&s, &m, 1e3, 1e4, &IntegratorConfig::with_tol(1e-9, 1e-12)).unwrap();
        assert!(w.escaped);
    }
}
