//! Closed-form solution for one separated coordinate.
//!
//! With `s = ξ²/2` and a reachable root `s_r` attained at fictitious time
//! `τ_r`,
//!
//! ```text
//! s(τ) = s_r + (f′(s_r)/4) / (℘(τ − τ_r) − e_r),       e_r = f″(s_r)/24
//! ```
//!
//! `e_r` is a root of the characteristic cubic, so the addition theorem at
//! the matching half-period `ω_r` moves the pole of the quotient away from
//! `τ = τ_r`:
//!
//! ```text
//! s(τ) = s_r + (f′(s_r)/4) (℘(τ − τ_r + ω_r) − e_r) / (3e_r² − g2/4)
//! ```
//!
//! which is the form evaluated here. The integrals `∫dτ/ξ²` and `∫ξ²dτ` that
//! feed the azimuth and the time equation are expressed through σ and ζ.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weierstrass::{DiscriminantSign, WeierstrassContext};

use super::cubic::{reachable_root, Coordinate, CubicPoly};

type C = Complex<f64>;
type Wp = WeierstrassContext<f64>;

/// Tolerance on the imaginary part of assembled real quantities,
/// relative to the magnitude of the terms being combined.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// A coordinate that either oscillates/escapes (elliptic) or sits at a double
/// root of its polynomial (stationary).
#[derive(Debug, Clone)]
pub enum Branch {
    Elliptic(Box<EllipticBranch>),
    Stationary(StationaryBranch),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationaryBranch {
    pub coordinate: Coordinate,
    pub poly: CubicPoly,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct EllipticBranch {
    pub coordinate: Coordinate,
    pub poly: CubicPoly,
    /// Initial `s0 = ξ0²/2` and sign of the initial momentum.
    pub s0: f64,
    pub p_sign: f64,
    pub s_r: f64,
    /// `f′(s_r)`.
    pub fp_r: f64,
    /// `f″(s_r)/24`, a root of the characteristic cubic.
    pub e_r: f64,
    /// Half-period with `℘(ω_r) = e_r`.
    pub omega_r_match: C,
    /// `3e_r² − g2/4`.
    pub p_res: f64,
    /// Fictitious time at which `s = s_r`.
    pub tau_r: f64,
    pub wp: Wp,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `℘(u) = −δ/γ`, the complex offset at which `s` would vanish.
    pub u: C,
    k_phi: C,
    zeta_u: C,
    log0: C,
    t_coeff: f64,
    zeta0: C,
}

/// Value of `s` and `ds/dτ`; `s` is `+∞` at a pole (escape).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SValue {
    pub s: f64,
    pub ds: f64,
}

impl Branch {
    pub fn build(coordinate: Coordinate, poly: CubicPoly, s0: f64, ds0: f64) -> Result<Self> {
        if is_stationary(&poly, s0) {
            return Ok(Branch::Stationary(StationaryBranch { coordinate, poly, s: s0 }));
        }
        Ok(Branch::Elliptic(Box::new(EllipticBranch::build(coordinate, poly, s0, ds0)?)))
    }

    pub fn coordinate(&self) -> Coordinate {
        match self {
            Branch::Elliptic(b) => b.coordinate,
            Branch::Stationary(b) => b.coordinate,
        }
    }

    pub fn poly(&self) -> &CubicPoly {
        match self {
            Branch::Elliptic(b) => &b.poly,
            Branch::Stationary(b) => &b.poly,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, Branch::Stationary(_))
    }

    pub fn s(&self, tau: f64) -> Result<SValue> {
        match self {
            Branch::Elliptic(b) => b.s(tau),
            Branch::Stationary(b) => Ok(SValue { s: b.s, ds: 0.0 }),
        }
    }

    /// `∫₀^τ dτ′ / (2 s(τ′))`.
    pub fn inverse_square_integral(&self, tau: f64) -> Result<f64> {
        match self {
            Branch::Elliptic(b) => b.inverse_square_integral(tau),
            Branch::Stationary(b) => Ok(tau / (2.0 * b.s)),
        }
    }

    /// `∫₀^τ 2 s(τ′) dτ′`.
    pub fn square_integral(&self, tau: f64) -> Result<f64> {
        match self {
            Branch::Elliptic(b) => b.square_integral(tau),
            Branch::Stationary(b) => Ok(2.0 * b.s * tau),
        }
    }

    pub fn summary(&self) -> BranchSummary {
        match self {
            Branch::Elliptic(b) => b.summary(),
            Branch::Stationary(b) => BranchSummary {
                kind: "stationary",
                coordinate: b.coordinate,
                s0: b.s,
                s_r: b.s,
                tau_r: 0.0,
                g2: b.poly.g2(),
                g3: b.poly.g3(),
                discriminant_sign: None,
                roots: None,
                e_r: None,
                omega_r: None,
                omega_c: None,
                real_period: None,
            },
        }
    }
}

/// `f(s0) = f′(s0) = 0` within rounding: the coordinate is frozen.
pub fn is_stationary(poly: &CubicPoly, s0: f64) -> bool {
    let a = s0.abs();
    let dscale = 12.0 * poly.a1.abs() * a * a + 12.0 * poly.a2.abs() * a + 4.0 * poly.a3.abs();
    poly.eval(s0).abs() <= 1e-12 * poly.scale(s0) && poly.deriv(s0).abs() <= 1e-9 * dscale
}

impl EllipticBranch {
    pub fn build(coordinate: Coordinate, poly: CubicPoly, s0: f64, ds0: f64) -> Result<Self> {
        let name = coordinate.name();
        let s_r = reachable_root(&poly, s0)?;
        let fp_r = poly.deriv(s_r);
        if !(fp_r > 0.0) {
            return Err(Error::Degenerate(name));
        }
        // e_i = f″(s_i)/24 = a₁s_i + a₂/2 maps the roots of f onto those of the
        // characteristic cubic; the s-domain roots are far better separated
        // than the e-domain ones when a₁ is small.
        let e_hint: Vec<f64> = poly.real_roots().iter().map(|&s| poly.a1 * s + 0.5 * poly.a2).collect();
        let wp = Wp::with_real_roots(poly.g2(), poly.g3(), &e_hint).map_err(|e| match e {
            Error::DegenerateLattice { .. } => Error::Degenerate(name),
            other => other,
        })?;
        let e_r = poly.a1 * s_r + 0.5 * poly.a2;
        let (g2, g3) = (wp.g2(), wp.g3());
        let resid = 4.0 * e_r * e_r * e_r - g2 * e_r - g3;
        let rscale = 4.0 * e_r.abs().powi(3) + (g2 * e_r).abs() + g3.abs();
        if resid.abs() > 1e-9 * rscale.max(f64::MIN_POSITIVE) {
            return Err(Error::Inconsistent(format!(
                "f''(s_r)/24 misses the characteristic cubic of {name} by {resid:e}"
            )));
        }
        let (idx, dist) = wp.nearest_root(C::new(e_r, 0.0));
        let escale = wp.roots().iter().fold(0.0f64, |m, e| m.max(e.norm()));
        if dist > 1e-6 * escale {
            return Err(Error::Inconsistent(format!("no lattice root matches e_r for {name}")));
        }
        let omega_r_match = wp.half_periods()[idx];
        let p_res = 3.0 * e_r * e_r - g2 / 4.0;

        let mut b = Self {
            coordinate,
            poly,
            s0,
            p_sign: if ds0 > 0.0 { 1.0 } else if ds0 < 0.0 { -1.0 } else { 0.0 },
            s_r,
            fp_r,
            e_r,
            omega_r_match,
            p_res,
            tau_r: 0.0,
            wp,
            beta: -e_r,
            gamma: 4.0 * s_r,
            delta: 0.0,
            u: C::new(0.0, 0.0),
            k_phi: C::new(0.0, 0.0),
            zeta_u: C::new(0.0, 0.0),
            log0: C::new(0.0, 0.0),
            t_coeff: 0.0,
            zeta0: C::new(0.0, 0.0),
        };
        b.tau_r = b.pericentre_time(ds0)?;

        // azimuth constants
        b.delta = fp_r + b.gamma * b.beta;
        let us = b.wp.wp_inverse(C::new(-b.delta / b.gamma, 0.0))?;
        b.u = if us[0].im >= us[1].im { us[0] } else { us[1] };
        let wpp_u = b.wp.wp_prime(b.u)?;
        b.k_phi = C::new(fp_r, 0.0) / (wpp_u * (b.gamma * b.gamma));
        b.zeta_u = b.wp.zeta(b.u)?;
        let shift_p = b.u - b.tau_r;
        let shift_m = -b.u - b.tau_r;
        b.log0 = b.wp.log_sigma_continuous(0.0, shift_p)? - b.wp.log_sigma_continuous(0.0, shift_m)?;

        // time-equation constants
        b.t_coeff = -0.5 * fp_r / p_res;
        b.zeta0 = b.wp.zeta(C::new(-b.tau_r, 0.0) - omega_r_match)?;
        Ok(b)
    }

    /// `s` and `ds/dτ` for a trial pericentre time.
    fn s_with(&self, tau: f64, tau_r: f64) -> Result<SValue> {
        let z = C::new(tau - tau_r, 0.0) + self.omega_r_match;
        match self.wp.wp_and_prime(z) {
            Ok((p, dp)) => {
                let k = 0.25 * self.fp_r / self.p_res;
                Ok(SValue { s: self.s_r + k * (p.re - self.e_r), ds: k * dp.re })
            }
            Err(Error::PoleProximity { .. }) => Ok(SValue { s: f64::INFINITY, ds: f64::INFINITY }),
            Err(e) => Err(e),
        }
    }

    pub fn s(&self, tau: f64) -> Result<SValue> {
        self.s_with(tau, self.tau_r)
    }

    /// Fictitious time of passage through `s_r`.
    ///
    /// The elliptic integral from `s0` to `s_r` is brought to Weierstrass
    /// normal form by the Tschirnhaus shift `s = c S + d`, `c = a₁^{-1/3}`,
    /// `d = −a₂/(2a₁)`, which gives `f = 4S³ − h₂S − h₃` and
    /// `τ_r = ±c (℘_h⁻¹(S₀) − ℘_h⁻¹(S_r))`. Every sign and preimage
    /// combination is tried; the real candidate that reproduces `s0` with the
    /// initial direction of motion wins. The direct inversion
    /// `℘(τ_r) = e_r + f′(s_r)/(4(s0 − s_r))` is the fallback.
    pub fn pericentre_time(&self, ds0: f64) -> Result<f64> {
        let s0 = self.s0.max(self.s_r);
        if s0 - self.s_r <= 1e-13 * s0 {
            return Ok(0.0);
        }
        let primary = self.tschirnhaus_candidates(s0).unwrap_or_default();
        if let Some(t) = self.select_pericentre(&primary, s0, ds0)? {
            return Ok(t);
        }
        let mut direct = Vec::with_capacity(4);
        if let Ok(zs) = self.wp.wp_inverse(C::new(self.e_r + self.fp_r / (4.0 * (s0 - self.s_r)), 0.0)) {
            for z in zs {
                direct.push(z);
                direct.push(-z);
            }
        }
        self.select_pericentre(&direct, s0, ds0)?
            .ok_or(Error::BranchSelectionFailure(self.coordinate.name()))
    }

    fn select_pericentre(&self, candidates: &[C], s0: f64, ds0: f64) -> Result<Option<f64>> {
        let dscale = self.poly.scale(s0).sqrt();
        let moving = ds0.abs() > 1e-7 * dscale;
        // rounding floor of s = s_r + k(℘ − e_r): tiny a₁ makes k large
        let escale = self.wp.roots().iter().fold(0.0f64, |m, e| m.max(e.norm()));
        let floor = 64.0 * f64::EPSILON * (0.25 * self.fp_r / self.p_res).abs() * escale;
        let tol = (1e-8 * s0).max(floor);
        let mut best: Option<(f64, f64)> = None;
        for &z in candidates {
            // Near a turning point the preimage is ill-conditioned in the
            // imaginary direction while ℘ is flat there, so only the real part
            // is kept; the reproduction test below rejects genuinely complex
            // candidates.
            let (z0, _, _) = self.wp.reduce(z);
            let tau_r = self.polish_pericentre(z0.re, s0, ds0)?;
            let v = self.s_with(0.0, tau_r)?;
            let err = (v.s - s0).abs();
            if err > tol {
                continue;
            }
            if moving && v.ds.signum() != ds0.signum() {
                continue;
            }
            if best.is_none_or(|(e, _)| err < e) {
                best = Some((err, tau_r));
            }
        }
        Ok(best.map(|(_, t)| t))
    }

    fn tschirnhaus_candidates(&self, s0: f64) -> Result<Vec<C>> {
        let f = &self.poly;
        let c = (1.0 / f.a1).cbrt();
        let d = -f.a2 / (2.0 * f.a1);
        let h2 = -c * f.deriv(d);
        let h3 = -f.eval(d);
        let hctx = Wp::new(h2, h3)?;
        let v0 = hctx.wp_inverse(C::new((s0 - d) / c, 0.0))?;
        let vr = hctx.wp_inverse(C::new((self.s_r - d) / c, 0.0))?[0];
        let mut out = Vec::with_capacity(8);
        for v in v0 {
            for sgn in [1.0, -1.0] {
                out.push((v - vr) * (c * sgn));
                out.push((v + vr) * (c * sgn));
            }
        }
        Ok(out)
    }

    /// Gauss–Newton refinement of `τ_r` on the pair `s(0) = s0`,
    /// `ds/dτ(0) = ds0`. Near a turning point the first equation is flat in
    /// `τ_r` and the second carries the information (`s″ = f′(s)/2`), so
    /// fitting both stays well conditioned everywhere on the orbit.
    fn polish_pericentre(&self, mut tau_r: f64, s0: f64, ds0: f64) -> Result<f64> {
        let w = self.wp.omega_r() / std::f64::consts::PI;
        for _ in 0..4 {
            let v = self.s_with(0.0, tau_r)?;
            if !v.s.is_finite() {
                break;
            }
            // both residuals move by −(their τ-derivative) per unit of τ_r
            let (j1, j2) = (-v.ds, -w * 0.5 * self.poly.deriv(v.s));
            let (r1, r2) = (v.s - s0, w * (v.ds - ds0));
            let den = j1 * j1 + j2 * j2;
            if den == 0.0 {
                break;
            }
            let step = -(r1 * j1 + r2 * j2) / den;
            if !(step.abs() < 1e-3 * self.wp.omega_r()) {
                break;
            }
            tau_r += step;
            if step.abs() <= 1e-15 * self.wp.omega_r() {
                break;
            }
        }
        Ok(tau_r)
    }

    /// `∫₀^τ dτ′/ξ²`.
    pub fn inverse_square_integral(&self, tau: f64) -> Result<f64> {
        let lp = self.wp.log_sigma_continuous(tau, self.u - self.tau_r)?;
        let lm = self.wp.log_sigma_continuous(tau, -self.u - self.tau_r)?;
        let bracket = lp - lm - self.log0 - self.zeta_u * (2.0 * tau);
        let val = (C::new(tau / self.gamma, 0.0) + self.k_phi * bracket) * 2.0;
        let scale = 1.0 + (self.k_phi * bracket).norm() + (tau / self.gamma).abs();
        check_real("phi", val, scale)
    }

    /// `∫₀^τ ξ² dτ′`.
    pub fn square_integral(&self, tau: f64) -> Result<f64> {
        let z = C::new(tau - self.tau_r, 0.0) - self.omega_r_match;
        let zeta = match self.wp.zeta(z) {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let bracket = zeta - self.zeta0 + tau * self.e_r;
        let val = bracket * self.t_coeff + 2.0 * self.s_r * tau;
        let scale = 1.0 + (bracket * self.t_coeff).norm() + (2.0 * self.s_r * tau).abs();
        check_real("time", val, scale)
    }

    /// General inversion formula started at `s0` itself (no root needed):
    /// `2s = 2s0 + [f′(s0)(℘−t0)/2 + f(s0)f‴/24 ∓ √f(s0) ℘′] / (℘ − t0)²`,
    /// `t0 = f″(s0)/24`, with the sign set by the initial momentum.
    pub fn s_general(&self, tau: f64) -> Result<f64> {
        let f = &self.poly;
        let s0 = self.s0;
        let (p, dp) = match self.wp.wp_and_prime(C::new(tau, 0.0)) {
            Ok(v) => (v.0.re, v.1.re),
            Err(Error::PoleProximity { .. }) => return Ok(s0),
            Err(e) => return Err(e),
        };
        let t0 = f.deriv2(s0) / 24.0;
        let fs = f.eval(s0).max(0.0);
        let den = p - t0;
        let num = 0.5 * f.deriv(s0) * den + fs * f.deriv3() / 24.0 - self.p_sign * fs.sqrt() * dp;
        Ok(s0 + 0.5 * num / (den * den))
    }

    /// Threshold `f″(s0)/24` of the boundness criterion.
    pub fn boundness_threshold(&self) -> f64 {
        self.poly.deriv2(self.s0) / 24.0
    }

    pub fn summary(&self) -> BranchSummary {
        let wp = &self.wp;
        BranchSummary {
            kind: "elliptic",
            coordinate: self.coordinate,
            s0: self.s0,
            s_r: self.s_r,
            tau_r: self.tau_r,
            g2: wp.g2(),
            g3: wp.g3(),
            discriminant_sign: Some(wp.discriminant_sign()),
            roots: Some(wp.roots().map(|e| [e.re, e.im])),
            e_r: Some(self.e_r),
            omega_r: Some(wp.omega_r()),
            omega_c: Some([wp.omega_c().re, wp.omega_c().im]),
            real_period: Some(2.0 * wp.omega_r()),
        }
    }
}

fn check_real(quantity: &'static str, v: C, scale: f64) -> Result<f64> {
    if !v.re.is_finite() {
        return Err(Error::NonFinite(quantity));
    }
    if v.im.abs() > IMAG_RESIDUE_TOL * scale {
        return Err(Error::ImaginaryResidue { quantity, residue: v.im });
    }
    Ok(v.re)
}

/// Serializable digest of one coordinate's solution.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    pub kind: &'static str,
    pub coordinate: Coordinate,
    pub s0: f64,
    pub s_r: f64,
    pub tau_r: f64,
    pub g2: f64,
    pub g3: f64,
    pub discriminant_sign: Option<DiscriminantSign>,
    pub roots: Option<[[f64; 2]; 3]>,
    pub e_r: Option<f64>,
    pub omega_r: Option<f64>,
    pub omega_c: Option<[f64; 2]>,
    pub real_period: Option<f64>,
}
