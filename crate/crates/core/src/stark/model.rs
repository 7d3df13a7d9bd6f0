//! Physical model, state types and the Cartesian ↔ parabolic transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kepler field `μ` plus a constant acceleration `ε` along `+z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkModel {
    pub mu: f64,
    pub eps: f64,
}

impl StarkModel {
    pub fn new(mu: f64, eps: f64) -> Result<Self> {
        let m = Self { mu, eps };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_finite() && self.eps.is_finite() && self.mu > 0.0 && self.eps > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidModel)
        }
    }

    /// Acceleration at `r`.
    pub fn acceleration(&self, r: [f64; 3]) -> [f64; 3] {
        let d = norm(r);
        let k = -self.mu / (d * d * d);
        [k * r[0], k * r[1], k * r[2] + self.eps]
    }

    /// Energy `v²/2 − μ/r − εz`.
    pub fn energy(&self, s: &CartesianState) -> f64 {
        0.5 * dot(s.v, s.v) - self.mu / norm(s.r) - self.eps * s.r[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub r: [f64; 3],
    pub v: [f64; 3],
}

impl CartesianState {
    pub fn new(r: [f64; 3], v: [f64; 3]) -> Self {
        Self { r, v }
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self { r: [x[0], x[1], x[2]], v: [x[3], x[4], x[5]] }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.r[0], self.r[1], self.r[2], self.v[0], self.v[1], self.v[2]]
    }

    pub fn radius(&self) -> f64 {
        norm(self.r)
    }

    /// `z` component of the angular momentum.
    pub fn angular_momentum_z(&self) -> f64 {
        self.r[0] * self.v[1] - self.r[1] * self.v[0]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        if self.radius() == 0.0 {
            return Err(Error::InvalidState("position at the origin"));
        }
        Ok(())
    }

    /// Rotation about the z axis by `theta`.
    pub fn rotated_z(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let rot = |a: [f64; 3]| [c * a[0] - s * a[1], s * a[0] + c * a[1], a[2]];
        Self { r: rot(self.r), v: rot(self.v) }
    }
}

/// Parabolic coordinates `ξ = √(r+z)`, `η = √(r−z)`, azimuth `φ`, and the
/// canonical momenta conjugate to them in fictitious time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicState {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
    pub p_xi: f64,
    pub p_eta: f64,
    pub p_phi: f64,
}

impl ParabolicState {
    pub fn from_cartesian(s: &CartesianState) -> Result<Self> {
        cartesian_to_parabolic(s)
    }

    pub fn to_cartesian(&self) -> CartesianState {
        parabolic_to_cartesian(self)
    }
}

/// `ρ = ξη` and `z = (ξ² − η²)/2` are inverted without cancellation: the larger
/// of `ξ², η²` is `r + |z|` and the other follows from `ξ²η² = ρ²`.
pub fn cartesian_to_parabolic(s: &CartesianState) -> Result<ParabolicState> {
    s.validate()?;
    let [x, y, z] = s.r;
    let [vx, vy, vz] = s.v;
    let rho2 = x * x + y * y;
    if rho2 == 0.0 {
        return Err(Error::OnPolarAxis);
    }
    let rho = rho2.sqrt();
    let r = s.radius();
    let (xi2, eta2) = if z >= 0.0 {
        let a = r + z;
        (a, rho2 / a)
    } else {
        let b = r - z;
        (rho2 / b, b)
    };
    let xi = xi2.sqrt();
    let eta = eta2.sqrt();
    let rho_dot = (x * vx + y * vy) / rho;
    // ρ̇ = ξ̇η + ξη̇, ż = ξξ̇ − ηη̇, and p = (ξ² + η²)·(ξ̇, η̇)
    let p_xi = eta * rho_dot + xi * vz;
    let p_eta = xi * rho_dot - eta * vz;
    let p_phi = x * vy - y * vx;
    Ok(ParabolicState { xi, eta, phi: y.atan2(x), p_xi, p_eta, p_phi })
}

pub fn parabolic_to_cartesian(p: &ParabolicState) -> CartesianState {
    let (xi, eta) = (p.xi, p.eta);
    let rho = xi * eta;
    let sum = xi * xi + eta * eta;
    let xi_dot = p.p_xi / sum;
    let eta_dot = p.p_eta / sum;
    let rho_dot = xi_dot * eta + xi * eta_dot;
    let z_dot = xi * xi_dot - eta * eta_dot;
    let phi_dot = p.p_phi / (rho * rho);
    let (sp, cp) = p.phi.sin_cos();
    CartesianState {
        r: [rho * cp, rho * sp, 0.5 * (xi - eta) * (xi + eta)],
        v: [
            rho_dot * cp - rho * phi_dot * sp,
            rho_dot * sp + rho * phi_dot * cp,
            z_dot,
        ],
    }
}

/// Energy and the two separation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionConstants {
    pub h: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p_phi: f64,
}

impl MotionConstants {
    /// `α₁ + α₂ − 2μ`, zero up to rounding.
    pub fn separation_defect(&self, model: &StarkModel) -> f64 {
        self.alpha1 + self.alpha2 - 2.0 * model.mu
    }
}

/// Energy in parabolic variables.
pub fn hamiltonian(ps: &ParabolicState, model: &StarkModel) -> f64 {
    let (xi2, eta2) = (ps.xi * ps.xi, ps.eta * ps.eta);
    let sum = xi2 + eta2;
    0.5 * (ps.p_xi * ps.p_xi + ps.p_eta * ps.p_eta) / sum + 0.5 * ps.p_phi * ps.p_phi / (xi2 * eta2)
        - 2.0 * model.mu / sum
        - 0.5 * model.eps * (ps.xi - ps.eta) * (ps.xi + ps.eta)
}

pub fn motion_constants(ps: &ParabolicState, model: &StarkModel) -> Result<MotionConstants> {
    let h = hamiltonian(ps, model);
    let (xi2, eta2) = (ps.xi * ps.xi, ps.eta * ps.eta);
    let pp = ps.p_phi * ps.p_phi;
    let alpha1 = -0.5 * model.eps * xi2 * xi2 - h * xi2 + 0.5 * ps.p_xi * ps.p_xi + 0.5 * pp / xi2;
    let alpha2 = 0.5 * model.eps * eta2 * eta2 - h * eta2 + 0.5 * ps.p_eta * ps.p_eta + 0.5 * pp / eta2;
    let c = MotionConstants { h, alpha1, alpha2, p_phi: ps.p_phi };
    if ![h, alpha1, alpha2].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("motion constants"));
    }
    // the sum is an identity; a gross defect means corrupted input
    let scale = alpha1.abs() + alpha2.abs() + 2.0 * model.mu;
    if c.separation_defect(model).abs() > 1e-8 * scale {
        return Err(Error::Inconsistent(format!(
            "alpha1 + alpha2 - 2 mu = {:e}",
            c.separation_defect(model)
        )));
    }
    Ok(c)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
