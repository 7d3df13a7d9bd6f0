//! Weierstrass ℘, ℘′, ℘⁻¹, ζ and σ for real invariants.
//!
//! A [`WeierstrassContext`] is built once per pair of invariants `(g2, g3)`.
//! Construction finds the roots of `4t³ − g2 t − g3`, the real and complex
//! half-periods `(ω_R, ω_C)` from complete elliptic integrals in Carlson form,
//! the quasi-period `η_R = ζ(ω_R)` and the nome `q = exp(iπ ω_C/ω_R)`.
//!
//! All evaluations use the q-series expansion of `log σ` in the
//! `(ω_R, ω_C)` basis and its derivatives:
//!
//! ```text
//! log σ(z) = log(2ω_R/π) + η_R z²/(2ω_R) + log sin v + Σ_r q^{2r} (2 sin rv)² / (r (1 − q^{2r}))
//! v = π z / (2ω_R)
//! ```
//!
//! so ζ, ℘ and ℘′ are the first three derivatives of one expansion, and the
//! branch-continuous logarithm used for the azimuth needs no separate
//! machinery. Arguments are reduced modulo the lattice before the series is
//! summed, which keeps the geometric ratio at or below `|q|`.
//!
//! Invariants with `g3 < 0` are folded onto `(g2, −g3)` through
//! `℘(z; g2, g3) = −℘(iz; g2, −g3)`; the roots change sign and the lattice is
//! rotated by −π/2, after which the evaluation basis is renormalised so that
//! every public quantity refers to the original invariants.

mod carlson;

pub use carlson::rf;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Cubic;
use crate::scalar::Real;

/// Relative size below which the modular discriminant is treated as zero.
const DEGENERATE_DISCRIMINANT: f64 = 1e-14;
/// Relative `Δ` below which a single hinted real root overrides the sign.
const HINT_DISCRIMINANT: f64 = 1e-8;
/// Distance to the nearest lattice point, in units of `ω_R`, below which
/// ℘, ℘′ and ζ refuse to evaluate.
pub const POLE_THRESHOLD: f64 = 1e-12;
/// Relative truncation threshold for the q-series.
pub const SERIES_TOL: f64 = 1e-18;
const MAX_SERIES_TERMS: usize = 20_000;
/// Minimum distance of `|β|` from 1 accepted by
/// [`WeierstrassContext::log_sigma_continuous`].
pub const STRIP_MARGIN: f64 = 1e-3;

/// Sign of the modular discriminant `Δ = g2³ − 27 g3²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiscriminantSign {
    /// Three real roots, rectangular lattice.
    Positive,
    /// One real root and a conjugate pair, rhombic lattice.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants<T> {
    pub g2: T,
    pub g3: T,
    pub discriminant: T,
}

impl<T: Real> Invariants<T> {
    pub fn new(g2: T, g3: T) -> Result<Self> {
        if !g2.is_finite() || !g3.is_finite() {
            return Err(Error::NonFinite("invariants"));
        }
        let discriminant = g2 * g2 * g2 - T::ci(27) * g3 * g3;
        Ok(Self { g2, g3, discriminant })
    }

    fn scale(&self) -> T {
        (self.g2 * self.g2 * self.g2).abs() + T::ci(27) * self.g3 * self.g3
    }

    pub fn sign(&self) -> Option<DiscriminantSign> {
        let scale = self.scale();
        let tol = T::c(DEGENERATE_DISCRIMINANT).max(T::c(64.0) * T::epsilon());
        if scale == T::zero() || self.discriminant.abs() <= tol * scale {
            None
        } else if self.discriminant > T::zero() {
            Some(DiscriminantSign::Positive)
        } else {
            Some(DiscriminantSign::Negative)
        }
    }
}

/// Evaluation environment for one family `℘(z; g2, g3)`. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct WeierstrassContext<T: Real> {
    invariants: Invariants<T>,
    sign: DiscriminantSign,
    /// `roots[0] = e_R`; the other two by descending real, then imaginary part.
    roots: [Complex<T>; 3],
    /// `℘(half_periods[i]) = roots[i]`.
    half_periods: [Complex<T>; 3],
    omega: Complex<T>,
    omega_prime: Complex<T>,
    omega_r: T,
    omega_c: Complex<T>,
    eta_r: T,
    eta_c: Complex<T>,
    nome: Complex<T>,
    q2: Complex<T>,
    g3_was_negative: bool,
}

/// Lambert-type sums of the q-expansion at one reduced argument.
struct Sums<T> {
    zeta: Complex<T>,
    wp: Complex<T>,
    wpp: Complex<T>,
    log: Complex<T>,
}

impl<T: Real> WeierstrassContext<T> {
    /// Builds the context for real invariants `(g2, g3)`.
    pub fn new(g2: T, g3: T) -> Result<Self> {
        Self::build(g2, g3, None)
    }

    /// Like [`Self::new`], but takes the real roots of `4t³ − g2 t − g3`
    /// from the caller (three when `Δ > 0`, one when `Δ < 0`).
    ///
    /// When the invariants come out of a cancelling computation while the
    /// roots are known through a better-conditioned route, this keeps the
    /// root separations — and everything that depends on them — accurate.
    /// Hints of the wrong count for the discriminant sign are ignored.
    pub fn with_real_roots(g2: T, g3: T, roots: &[T]) -> Result<Self> {
        Self::build(g2, g3, Some(roots))
    }

    fn build(g2: T, g3: T, hint: Option<&[T]>) -> Result<Self> {
        let invariants = Invariants::new(g2, g3)?;
        // distinct caller-supplied roots settle the sign even where Δ is
        // below the cancellation floor of its own evaluation
        let hinted = hint.and_then(|h| match h.len() {
            3 if h.iter().all(|e| e.is_finite()) => {
                let mut v = h.to_vec();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let spread = (v[2] - v[0]).abs();
                let gap = (v[1] - v[0]).min(v[2] - v[1]);
                (gap > T::c(64.0) * T::epsilon() * spread).then_some(DiscriminantSign::Positive)
            }
            // a near-double root may be resolved as a single real root while
            // Δ still rounds positive; the hint's count wins in that band
            1 if h[0].is_finite() && invariants.discriminant < T::c(HINT_DISCRIMINANT) * invariants.scale() => {
                Some(DiscriminantSign::Negative)
            }
            _ => None,
        });
        let sign = hinted.or_else(|| invariants.sign()).ok_or(Error::DegenerateLattice {
            g2: g2.to_f64_lossy(),
            g3: g3.to_f64_lossy(),
        })?;
        let g3_was_negative = g3 < T::zero();
        let g3n = g3.abs();

        // canonical machinery for g3 >= 0: roots and the real/imaginary
        // primitive half-lengths
        let hint: Option<Vec<T>> = hint.map(|h| {
            let mut v: Vec<T> = h.iter().map(|&e| if g3_was_negative { -e } else { e }).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        });
        let (croots, c_real, c_imag) = canonical_half_periods(g2, g3n, sign, hint.as_deref())?;
        let (roots_raw, omega_r, omega_i) = if g3_was_negative {
            // ℘(z; g2, g3) = −℘(iz; g2, −g3): roots flip sign, lattice rotates by −π/2
            (croots.map(|e| -e), c_imag, c_real)
        } else {
            (croots, c_real, c_imag)
        };

        let two = T::ci(2);
        let omega_c = match sign {
            DiscriminantSign::Positive => Complex::new(T::zero(), omega_i),
            DiscriminantSign::Negative => Complex::new(omega_r / two, omega_i / two),
        };
        let (omega, omega_prime) = match sign {
            DiscriminantSign::Positive => (Complex::new(omega_r, T::zero()), omega_c),
            DiscriminantSign::Negative => (Complex::new(omega_r, T::zero()) - omega_c, omega_c),
        };

        let tau = omega_c / omega_r;
        let pi = T::PI();
        let i = Complex::<T>::i();
        let nome = (i * tau * pi).exp();
        let q2 = nome * nome;

        let mut ctx = Self {
            invariants,
            sign,
            roots: roots_raw,
            half_periods: [Complex::new(omega_r, T::zero()); 3],
            omega,
            omega_prime,
            omega_r,
            omega_c,
            eta_r: T::zero(),
            eta_c: Complex::new(T::zero(), T::zero()),
            nome,
            q2,
            g3_was_negative,
        };
        ctx.eta_r = ctx.compute_eta_r()?;
        // Legendre: η_R ω_C − η_C ω_R = iπ/2
        ctx.eta_c = (omega_c * ctx.eta_r - i * (pi / two)) / omega_r;

        // pair every root with the half-period at which ℘ attains it
        let candidates = [
            Complex::new(omega_r, T::zero()),
            omega_c,
            match sign {
                DiscriminantSign::Positive => omega_c + omega_r,
                DiscriminantSign::Negative => omega_c - omega_r,
            },
        ];
        let mut vals = [Complex::new(T::zero(), T::zero()); 3];
        for (k, hp) in candidates.iter().enumerate() {
            vals[k] = ctx.wp(*hp)?;
        }
        let mut paired: Vec<(Complex<T>, Complex<T>)> = Vec::with_capacity(3);
        let mut used = [false; 3];
        for (k, hp) in candidates.iter().enumerate() {
            let (best, _) = roots_raw
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, e)| (j, (*e - vals[k]).norm()))
                .fold((usize::MAX, T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc });
            used[best] = true;
            paired.push((roots_raw[best], *hp));
        }
        let mut rest = [paired[1], paired[2]];
        rest.sort_by(|a, b| {
            b.0.re
                .partial_cmp(&a.0.re)
                .unwrap()
                .then(b.0.im.partial_cmp(&a.0.im).unwrap())
        });
        ctx.roots = [paired[0].0, rest[0].0, rest[1].0];
        ctx.half_periods = [paired[0].1, rest[0].1, rest[1].1];

        let scale = ctx.roots.iter().fold(T::one(), |m, e| m.max(e.norm()));
        let tol = T::c(1e-8).max(T::c(1e3) * T::epsilon());
        for k in 0..3 {
            let v = ctx.wp(ctx.half_periods[k])?;
            if (v - ctx.roots[k]).norm() > tol * scale {
                return Err(Error::NoConvergence("half-period/root pairing"));
            }
        }
        Ok(ctx)
    }

    pub fn invariants(&self) -> Invariants<T> {
        self.invariants
    }
    pub fn g2(&self) -> T {
        self.invariants.g2
    }
    pub fn g3(&self) -> T {
        self.invariants.g3
    }
    pub fn discriminant_sign(&self) -> DiscriminantSign {
        self.sign
    }
    /// Roots of `4t³ − g2 t − g3`; index 0 is `e_R`.
    pub fn roots(&self) -> [Complex<T>; 3] {
        self.roots
    }
    /// Half-periods matching [`Self::roots`] entry by entry.
    pub fn half_periods(&self) -> [Complex<T>; 3] {
        self.half_periods
    }
    /// The root attained at the real half-period.
    pub fn e_r(&self) -> T {
        self.roots[0].re
    }
    pub fn omega_r(&self) -> T {
        self.omega_r
    }
    pub fn omega_c(&self) -> Complex<T> {
        self.omega_c
    }
    /// Fundamental half-period `ω` in the Abramowitz–Stegun normalisation.
    pub fn omega(&self) -> Complex<T> {
        self.omega
    }
    /// Fundamental half-period `ω′` in the Abramowitz–Stegun normalisation.
    pub fn omega_prime(&self) -> Complex<T> {
        self.omega_prime
    }
    /// `ζ(ω_R)`.
    pub fn eta_r(&self) -> T {
        self.eta_r
    }
    /// `ζ(ω_C)`.
    pub fn eta_c(&self) -> Complex<T> {
        self.eta_c
    }
    pub fn nome(&self) -> Complex<T> {
        self.nome
    }
    pub fn g3_was_negative(&self) -> bool {
        self.g3_was_negative
    }

    /// Index of the root closest to `e` together with the distance.
    pub fn nearest_root(&self, e: Complex<T>) -> (usize, T) {
        let mut best = (0, T::infinity());
        for (k, r) in self.roots.iter().enumerate() {
            let d = (*r - e).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    /// Lattice coordinates `(a, b)` with `z = 2a ω_R + 2b ω_C`.
    pub fn lattice_coords(&self, z: Complex<T>) -> (T, T) {
        let two = T::ci(2);
        let b = z.im / (two * self.omega_c.im);
        let a = (z.re - b * two * self.omega_c.re) / (two * self.omega_r);
        (a, b)
    }

    /// `z = z0 + 2m ω_R + 2n ω_C` with `z0` in the centred period parallelogram.
    pub fn reduce(&self, z: Complex<T>) -> (Complex<T>, i64, i64) {
        let (a, b) = self.lattice_coords(z);
        let m = a.round();
        let n = b.round();
        let two = T::ci(2);
        let z0 = z - self.omega_c * (two * n) - Complex::new(two * m * self.omega_r, T::zero());
        (
            z0,
            m.to_i64().unwrap_or(0),
            n.to_i64().unwrap_or(0),
        )
    }

    fn check_pole(&self, z0: Complex<T>) -> Result<()> {
        if z0.norm() < T::c(POLE_THRESHOLD) * self.omega_r {
            return Err(Error::PoleProximity {
                re: z0.re.to_f64_lossy(),
                im: z0.im.to_f64_lossy(),
            });
        }
        Ok(())
    }

    fn compute_eta_r(&self) -> Result<T> {
        // Vanishing constant term of the Laurent expansion of ℘ at 0:
        // η_R ω_R = π²/12 (1 − 24 Σ r Q^r / (1 − Q^r))
        let one = Complex::new(T::one(), T::zero());
        let mut qr = one;
        let mut acc = Complex::new(T::zero(), T::zero());
        let tol = T::c(SERIES_TOL);
        for r in 1..=MAX_SERIES_TERMS {
            qr = qr * self.q2;
            let term = qr * T::ci(r as i64) / (one - qr);
            acc = acc + term;
            if term.norm() <= tol * (acc.norm() + T::one() / T::ci(24)) {
                let pi = T::PI();
                let val = (one - acc * T::ci(24)) * (pi * pi / (T::ci(12) * self.omega_r));
                return Ok(val.re);
            }
        }
        Err(Error::SeriesNoConverge { terms: MAX_SERIES_TERMS })
    }

    /// Sums the four Lambert series at `v = π z / (2ω_R)`. Valid while
    /// `|Im z| < 2 Im ω_C`.
    fn sums(&self, z: Complex<T>, scale: T) -> Result<Sums<T>> {
        let i = Complex::<T>::i();
        let v = z * (T::PI() / (T::ci(2) * self.omega_r));
        let w = (i * v * T::ci(2)).exp();
        let a = self.q2 * w;
        let b = self.q2 / w;
        if a.norm() >= T::one() || b.norm() >= T::one() {
            let beta = (z.im / (T::ci(2) * self.omega_c.im)).to_f64_lossy();
            return Err(Error::OutsideStrip { beta });
        }
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let (mut ar, mut br, mut qr) = (one, one, one);
        let mut s = Sums { zeta: zero, wp: zero, wpp: zero, log: zero };
        let tol = T::c(SERIES_TOL);
        for r in 1..=MAX_SERIES_TERMS {
            ar = ar * a;
            br = br * b;
            qr = qr * self.q2;
            let rr = T::ci(r as i64);
            let den = one - qr;
            let diff = (ar - br) / den;
            let sum = (ar + br) / den;
            s.zeta = s.zeta + diff;
            s.wp = s.wp + sum * rr;
            s.wpp = s.wpp + diff * (rr * rr);
            s.log = s.log + (qr * T::ci(2) - ar - br) / (den * rr);
            let mag = ar.norm().max(br.norm()).max(qr.norm());
            if mag * rr * rr <= tol * (s.wpp.norm() + s.wp.norm() + scale) {
                return Ok(s);
            }
        }
        Err(Error::SeriesNoConverge { terms: MAX_SERIES_TERMS })
    }

    /// `(cot v, csc² v)` from `w = e^{2iv}`, overflow-free for large `|Im v|`.
    fn cot_csc2(v: Complex<T>) -> (Complex<T>, Complex<T>) {
        let i = Complex::<T>::i();
        let one = Complex::new(T::one(), T::zero());
        let w = (i * v * T::ci(2)).exp();
        let (x, s) = if w.norm() <= T::one() { (w, -T::one()) } else { (one / w, T::one()) };
        let cot = i * (one + x) / (one - x) * s;
        let csc2 = -(x * T::ci(4)) / ((one - x) * (one - x));
        (cot, csc2)
    }

    fn core(&self, z0: Complex<T>) -> Result<(Complex<T>, Complex<T>, Complex<T>)> {
        let k = T::PI() / (T::ci(2) * self.omega_r);
        let v = z0 * k;
        let (cot, csc2) = Self::cot_csc2(v);
        let scale = csc2.norm() + cot.norm() + T::one();
        let s = self.sums(z0, scale)?;
        let i = Complex::<T>::i();
        let zeta = z0 * (self.eta_r / self.omega_r) + (cot - i * s.zeta * T::ci(2)) * k;
        let wp = (csc2 - s.wp * T::ci(4)) * (k * k) - Complex::new(self.eta_r / self.omega_r, T::zero());
        let wpp = (csc2 * cot * T::ci(-2) - i * s.wpp * T::ci(8)) * (k * k * k);
        Ok((wp, wpp, zeta))
    }

    /// ℘(z).
    pub fn wp(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.wp_and_prime(z)?.0)
    }

    /// ℘′(z).
    pub fn wp_prime(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.wp_and_prime(z)?.1)
    }

    /// `(℘(z), ℘′(z))` from a single series pass.
    pub fn wp_and_prime(&self, z: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let (z0, _, _) = self.reduce(z);
        self.check_pole(z0)?;
        let (wp, wpp, _) = self.core(z0)?;
        Ok((wp, wpp))
    }

    /// ζ(z), quasi-periodic with `ζ(z + 2ω_R) = ζ(z) + 2η_R`.
    pub fn zeta(&self, z: Complex<T>) -> Result<Complex<T>> {
        let (z0, m, n) = self.reduce(z);
        self.check_pole(z0)?;
        let (_, _, zeta0) = self.core(z0)?;
        let two = T::ci(2);
        Ok(zeta0
            + Complex::new(two * T::ci(m) * self.eta_r, T::zero())
            + self.eta_c * (two * T::ci(n)))
    }

    /// The q-series for `Log σ(z)` evaluated directly, without lattice
    /// reduction. Requires `|Im z| < 2 Im ω_C`; the branch is the one that is
    /// continuous for `Re z ∈ [0, 2ω_R)`.
    pub fn log_sigma_series(&self, z: Complex<T>) -> Result<Complex<T>> {
        let k = T::PI() / (T::ci(2) * self.omega_r);
        let v = z * k;
        let lead = (T::ci(2) * self.omega_r / T::PI()).ln();
        let sin_v = v.sin();
        if sin_v.norm() == T::zero() {
            return Err(Error::PoleProximity {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
            });
        }
        let log_sin = sin_v.ln();
        let scale = log_sin.norm() + lead.abs() + T::one();
        let s = self.sums(z, scale)?;
        Ok(Complex::new(lead, T::zero())
            + z * z * (self.eta_r / (T::ci(2) * self.omega_r))
            + log_sin
            + s.log)
    }

    /// σ(z), entire and odd with `σ(z) ~ z` at the origin.
    pub fn sigma(&self, z: Complex<T>) -> Result<Complex<T>> {
        if z.norm() == T::zero() {
            return Ok(z);
        }
        let (z0, m, n) = self.reduce(z);
        if z0.norm() == T::zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let ls = self.log_sigma_series(z0)?;
        let two = T::ci(2);
        let (mf, nf) = (T::ci(m), T::ci(n));
        let shift = Complex::new(mf * self.omega_r, T::zero()) + self.omega_c * nf;
        let eta = Complex::new(two * mf * self.eta_r, T::zero()) + self.eta_c * (two * nf);
        let total = ls + (z0 + shift) * eta;
        if total.re > T::max_value().ln() {
            return Err(Error::Overflow);
        }
        let odd = (m + n + m * n).rem_euclid(2) == 1;
        let val = total.exp();
        Ok(if odd { -val } else { val })
    }

    /// Branch-continuous `log σ(x + shift)` as a function of real `x`.
    ///
    /// The shift must decompose as `2α ω_R + 2β ω_C` with `|β| < 1`. The
    /// argument is split as `x + shift = x* + 2N ω_R + i y` with
    /// `x* ∈ [0, 2ω_R)`; the series is summed at `x* + iy` and the
    /// quasi-periodicity correction `2N η_R (x* + iy + N ω_R) ∓ iNπ` is added,
    /// with the sign of `iNπ` following the sign of `y`.
    pub fn log_sigma_continuous(&self, x: T, shift: Complex<T>) -> Result<Complex<T>> {
        let two = T::ci(2);
        let beta = shift.im / (two * self.omega_c.im);
        if beta.abs() >= T::one() - T::c(STRIP_MARGIN) {
            return Err(Error::OutsideStrip { beta: beta.to_f64_lossy() });
        }
        let w = shift + x;
        let period = two * self.omega_r;
        let nf = (w.re / period).floor();
        let xs = w.re - nf * period;
        let base = Complex::new(xs, w.im);
        let series = self.log_sigma_series(base)?;
        let orient = if w.im >= T::zero() { T::one() } else { -T::one() };
        let corr = (base + nf * self.omega_r) * (two * nf * self.eta_r)
            - Complex::new(T::zero(), orient * nf * T::PI());
        Ok(series + corr)
    }

    /// Both preimages of `w` under ℘ in the centred period parallelogram.
    /// The two values sum to a lattice point.
    pub fn wp_inverse(&self, w: Complex<T>) -> Result<[Complex<T>; 2]> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::NonFinite("wp_inverse argument"));
        }
        let tol = T::c(1e-10).max(T::c(1e3) * T::epsilon());
        let wscale = T::one().max(w.norm());
        let arg = |e: Complex<T>| {
            let d = w - e;
            if d.im == T::zero() {
                Complex::new(d.re, T::zero())
            } else {
                d
            }
        };
        let mut candidates: Vec<Complex<T>> = Vec::new();
        if let Ok(z) = rf(arg(self.roots[0]), arg(self.roots[1]), arg(self.roots[2])) {
            candidates.push(z);
        }
        for z in candidates {
            if let Some(z) = self.polish_inverse(z, w, tol * wscale) {
                return Ok(self.inverse_pair(z));
            }
        }
        // coarse scan of the parallelogram, then Newton from the best node
        let grid = 24;
        let mut best: Option<(T, Complex<T>)> = None;
        for ia in 0..grid {
            for ib in 0..grid {
                let a = (T::ci(ia) + T::c(0.5)) / T::ci(grid) - T::c(0.5);
                let b = (T::ci(ib) + T::c(0.5)) / T::ci(grid) - T::c(0.5);
                let z = Complex::new(T::ci(2) * a * self.omega_r, T::zero()) + self.omega_c * (T::ci(2) * b);
                if let Ok(v) = self.wp(z) {
                    let d = (v - w).norm();
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, z));
                    }
                }
            }
        }
        if let Some((_, z)) = best {
            if let Some(z) = self.polish_inverse(z, w, tol * wscale) {
                return Ok(self.inverse_pair(z));
            }
        }
        Err(Error::NoConvergence("wp_inverse"))
    }

    fn polish_inverse(&self, mut z: Complex<T>, w: Complex<T>, tol: T) -> Option<Complex<T>> {
        for _ in 0..80 {
            let (p, dp) = match self.wp_and_prime(z) {
                Ok(v) => v,
                // |w| beyond the pole threshold: the raw integral is already exact
                Err(Error::PoleProximity { .. }) => return Some(z),
                Err(_) => return None,
            };
            let r = p - w;
            if r.norm() <= T::c(4.0) * T::epsilon() * T::one().max(w.norm()) {
                return Some(z);
            }
            if dp.norm() == T::zero() {
                break;
            }
            let step = r / dp;
            z = z - step;
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
            if step.norm() <= T::epsilon() * z.norm().max(self.omega_r) {
                break;
            }
        }
        match self.wp(z) {
            Ok(p) if (p - w).norm() <= tol => Some(z),
            Err(Error::PoleProximity { .. }) => Some(z),
            _ => None,
        }
    }

    fn inverse_pair(&self, z: Complex<T>) -> [Complex<T>; 2] {
        [self.reduce(z).0, self.reduce(-z).0]
    }
}

/// Roots and primitive real/imaginary half-lengths for `g3 >= 0`.
///
/// Δ > 0: `ω_R = R_F(0, e1−e2, e1−e3)`, `ω_I = R_F(0, e1−e3, e2−e3)`.
/// Δ < 0: with real root `e_R` and pair `e_c, ē_c`,
/// `ω_R = R_F(0, e_R − e_c, e_R − ē_c)` and `ω_I` is the real half-period of
/// the folded invariants, `R_F(0, e_c − e_R, ē_c − e_R)`.
fn canonical_half_periods<T: Real>(
    g2: T,
    g3: T,
    sign: DiscriminantSign,
    hint: Option<&[T]>,
) -> Result<([Complex<T>; 3], T, T)> {
    let expected = match sign {
        DiscriminantSign::Positive => 3,
        DiscriminantSign::Negative => 1,
    };
    let real = match hint {
        Some(h) if h.len() == expected && h.iter().all(|e| e.is_finite()) => h.to_vec(),
        _ => Cubic::new(T::ci(4), T::zero(), -g2, -g3).real_roots(),
    };
    let zero = Complex::new(T::zero(), T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    match sign {
        DiscriminantSign::Positive => {
            if real.len() != 3 {
                return Err(Error::NoConvergence("characteristic cubic (three real roots)"));
            }
            let (e3, e2, e1) = (real[0], real[1], real[2]);
            let wr = rf(zero, re(e1 - e2), re(e1 - e3))?.re;
            let wi = rf(zero, re(e1 - e3), re(e2 - e3))?.re;
            Ok(([re(e1), re(e2), re(e3)], wr, wi))
        }
        DiscriminantSign::Negative => {
            let er = *real
                .iter()
                .max_by(|a, b| a.partial_cmp(b).unwrap())
                .ok_or(Error::NoConvergence("characteristic cubic (real root)"))?;
            // 4(t − e_R)(t² + e_R t + e_R² − g2/4)
            let im = ((T::ci(3) * er * er - g2).max(T::zero())).sqrt() / T::ci(2);
            let ec = Complex::new(-er / T::ci(2), im);
            let wr = rf(zero, re(er) - ec, re(er) - ec.conj())?.re;
            let wi = rf(zero, ec - re(er), ec.conj() - re(er))?.re;
            Ok(([re(er), ec, ec.conj()], wr, wi))
        }
    }
}

#[cfg(test)]
mod tests;
