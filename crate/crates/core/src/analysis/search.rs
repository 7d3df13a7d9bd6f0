//! Search for commensurable `(ξ, η)` periods and closed orbits.
//!
//! Convention: target `(n, m)` asks for `ω_{R,ξ}/ω_{R,η} = m/n`, i.e. `n`
//! periods of `ξ` span the same fictitious time as `m` periods of `η`:
//! `T = 2nω_{R,ξ} = 2mω_{R,η}`. A periodic target `(n, m, p)` additionally
//! asks that `p(φ(T) − φ(0)) ≡ 0 (mod 2π)` with the advance itself not a
//! multiple of `2π/q` for any `q < p`, so the orbit closes after exactly `p`
//! quasi-periods.
//!
//! Search space: `[z, ρ, k, ε]` decodes to the state `r = (ρ, 0, z)`,
//! `v = (0, k√(μ/|r|), 0)` under the field `ε`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stark::{CartesianState, Coordinate, PropagationContext, StarkModel};

/// Residual reported for parameters that decode to no valid bound orbit.
pub const PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    /// Bounds on `[z, ρ, k, ε]`.
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl Default for SearchBox {
    fn default() -> Self {
        Self { lower: [-0.6, 0.6, 0.6, 1e-3], upper: [0.6, 1.4, 1.25, 0.25] }
    }
}

impl SearchBox {
    pub fn validate(&self) -> Result<()> {
        let ok = (0..4).all(|i| self.lower[i].is_finite() && self.upper[i].is_finite() && self.lower[i] < self.upper[i]);
        if !ok || self.lower[1] <= 0.0 || self.lower[2] <= 0.0 || self.lower[3] <= 0.0 {
            return Err(Error::InvalidConfig("search box needs finite ordered bounds with rho, k, eps > 0"));
        }
        Ok(())
    }

    fn contains(&self, p: &[f64; 4]) -> bool {
        (0..4).all(|i| p[i] >= self.lower[i] && p[i] <= self.upper[i])
    }

    fn clamp(&self, p: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| p[i].clamp(self.lower[i], self.upper[i]))
    }

    fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub mu: f64,
    /// Random seeds drawn from the box.
    pub samples: usize,
    /// Best seeds refined locally.
    pub starts: usize,
    /// Nelder–Mead iterations per start.
    pub max_iter: usize,
    /// Acceptance threshold on the returned residual.
    pub threshold: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { seed: 1, mu: 1.0, samples: 2000, starts: 6, max_iter: 400, threshold: 1e-18 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchTarget {
    QuasiPeriodic { n: u32, m: u32 },
    Periodic { n: u32, m: u32, p: u32 },
}

impl SearchTarget {
    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.pair();
        if n == 0 || m == 0 {
            return Err(Error::InvalidTarget("n and m must be positive"));
        }
        if gcd(n, m) != 1 {
            return Err(Error::InvalidTarget("n and m must be coprime"));
        }
        if let SearchTarget::Periodic { p: 0, .. } = self {
            return Err(Error::InvalidTarget("p must be positive"));
        }
        Ok(())
    }

    pub fn pair(&self) -> (u32, u32) {
        match *self {
            SearchTarget::QuasiPeriodic { n, m } | SearchTarget::Periodic { n, m, .. } => (n, m),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn decode(p: &[f64; 4], mu: f64) -> Result<(CartesianState, StarkModel)> {
    let [z, rho, k, eps] = *p;
    let model = StarkModel::new(mu, eps)?;
    if !(rho > 0.0 && k > 0.0) || !z.is_finite() {
        return Err(Error::InvalidState("search vector needs rho > 0, k > 0"));
    }
    let r = (rho * rho + z * z).sqrt();
    Ok((CartesianState::new([rho, 0.0, z], [0.0, k * (mu / r).sqrt(), 0.0]), model))
}

/// Periods and azimuth advance of one candidate orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitMetrics {
    pub omega_xi: f64,
    pub omega_eta: f64,
    /// `ω_{R,ξ}/ω_{R,η}`.
    pub ratio: f64,
    /// `|ratio − m/n|`.
    pub ratio_residual: f64,
    /// `nω_{R,ξ} − mω_{R,η}`.
    pub commensurability: f64,
    /// Quasi-period `T = 2nω_{R,ξ}` in fictitious time.
    pub quasi_period: f64,
    /// `φ(T) − φ(0)`.
    pub delta_phi: f64,
}

impl OrbitMetrics {
    pub fn of(ctx: &PropagationContext, n: u32, m: u32) -> Result<Self> {
        if !ctx.is_bound() {
            return Err(Error::NotBound);
        }
        let omega = |c| {
            ctx.elliptic(c).map(|b| b.wp.omega_r()).ok_or(Error::Degenerate(c.name()))
        };
        let (wx, we) = (omega(Coordinate::Xi)?, omega(Coordinate::Eta)?);
        let (nf, mf) = (n as f64, m as f64);
        let quasi_period = 2.0 * nf * wx;
        let delta_phi = ctx.phi(quasi_period)? - ctx.phi(0.0)?;
        Ok(Self {
            omega_xi: wx,
            omega_eta: we,
            ratio: wx / we,
            ratio_residual: (wx / we - mf / nf).abs(),
            commensurability: nf * wx - mf * we,
            quasi_period,
            delta_phi,
        })
    }
}

/// Distance of `Δφ` from the nearest `2πj/p` with `gcd(j, p) = 1`.
fn azimuth_mismatch(delta_phi: f64, p: u32) -> f64 {
    let p = p as i64;
    let x = delta_phi * p as f64 / TAU;
    let k0 = x.round() as i64;
    let coprime = |j: i64| p == 1 || gcd(j.rem_euclid(p) as u32, p as u32) == 1;
    let j = (0..=p)
        .flat_map(|d| [k0 - d, k0 + d])
        .filter(|&j| coprime(j))
        .min_by(|a, b| (x - *a as f64).abs().total_cmp(&(x - *b as f64).abs()))
        .unwrap_or(k0);
    (x - j as f64) * TAU / p as f64
}

/// Residual components: commensurability, and for periodic targets the
/// azimuth mismatch.
fn components(p: &[f64; 4], mu: f64, target: &SearchTarget) -> Result<(Vec<f64>, OrbitMetrics)> {
    let (n, m) = target.pair();
    let (s, model) = decode(p, mu)?;
    let ctx = PropagationContext::build(&s, &model)?;
    let met = OrbitMetrics::of(&ctx, n, m)?;
    let mut r = vec![met.commensurability];
    if let SearchTarget::Periodic { p: k, .. } = target {
        r.push(azimuth_mismatch(met.delta_phi, *k));
    }
    Ok((r, met))
}

fn objective(p: &[f64; 4], mu: f64, target: &SearchTarget) -> f64 {
    match components(p, mu, target) {
        Ok((r, _)) => r.iter().map(|x| x * x).sum::<f64>().min(PENALTY),
        Err(_) => PENALTY,
    }
}

/// `(nω_{R,ξ} − mω_{R,η})²`, or [`PENALTY`] when the parameters do not
/// decode to a bound, non-degenerate orbit.
pub fn quasi_periodic_residual(params: &[f64; 4], mu: f64, n: u32, m: u32) -> f64 {
    objective(params, mu, &SearchTarget::QuasiPeriodic { n, m })
}

/// Quasi-periodic residual plus the squared distance of `φ(T) − φ(0)` from
/// the nearest admissible `2πj/p`.
pub fn periodic_residual(params: &[f64; 4], mu: f64, n: u32, m: u32, p: u32) -> f64 {
    objective(params, mu, &SearchTarget::Periodic { n, m, p })
}

/// How well the orbit returns to its initial state after `p` quasi-periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closure {
    /// Fictitious and real time of one full period.
    pub tau_period: f64,
    pub t_period: f64,
    pub position_rel: f64,
    pub velocity_rel: f64,
}

impl Closure {
    pub fn relative(&self) -> f64 {
        self.position_rel.max(self.velocity_rel)
    }

    pub fn of(ctx: &PropagationContext, tau_period: f64) -> Result<Self> {
        let smp = ctx.sample_at_tau(tau_period)?;
        let (a, b) = (ctx.initial, smp.cartesian);
        let dist = |x: [f64; 3], y: [f64; 3]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        let len = |x: [f64; 3]| dist(x, [0.0; 3]);
        Ok(Self {
            tau_period,
            t_period: smp.t,
            position_rel: dist(a.r, b.r) / len(a.r),
            velocity_rel: dist(a.v, b.v) / len(a.v),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub state: CartesianState,
    pub model: StarkModel,
    /// Decision vector `[z, ρ, k, ε]`.
    pub params: [f64; 4],
    pub residual: f64,
    pub target: SearchTarget,
    pub iterations: usize,
    pub evaluations: usize,
    pub metrics: OrbitMetrics,
    /// Present for periodic targets.
    pub closure: Option<Closure>,
}

impl SearchResult {
    /// Rebuilds the result for `params` from scratch.
    pub fn evaluate(params: [f64; 4], mu: f64, target: SearchTarget) -> Result<Self> {
        let (r, metrics) = components(&params, mu, &target)?;
        let (state, model) = decode(&params, mu)?;
        let closure = match target {
            SearchTarget::Periodic { p, .. } => {
                let ctx = PropagationContext::build(&state, &model)?;
                Some(Closure::of(&ctx, p as f64 * metrics.quasi_period)?)
            }
            SearchTarget::QuasiPeriodic { .. } => None,
        };
        Ok(Self {
            state,
            model,
            params,
            residual: r.iter().map(|x| x * x).sum(),
            target,
            iterations: 0,
            evaluations: 0,
            metrics,
            closure,
        })
    }
}

pub fn find_quasi_periodic(n: u32, m: u32, bx: &SearchBox, cfg: &SearchConfig) -> Result<SearchResult> {
    search(SearchTarget::QuasiPeriodic { n, m }, bx, cfg)
}

pub fn find_periodic(n: u32, m: u32, p: u32, bx: &SearchBox, cfg: &SearchConfig) -> Result<SearchResult> {
    search(SearchTarget::Periodic { n, m, p }, bx, cfg)
}

/// Seeded sampling, Nelder–Mead on the best seeds, then a minimum-norm
/// Gauss–Newton polish of the residual vector.
pub fn search(target: SearchTarget, bx: &SearchBox, cfg: &SearchConfig) -> Result<SearchResult> {
    target.validate()?;
    bx.validate()?;
    if cfg.samples == 0 || cfg.starts == 0 || !(cfg.threshold > 0.0) {
        return Err(Error::InvalidConfig("search needs samples, starts > 0 and a positive threshold"));
    }
    let mu = cfg.mu;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<[f64; 4]> = (0..cfg.samples)
        .map(|_| std::array::from_fn(|i| bx.lower[i] + rng.gen::<f64>() * bx.width(i)))
        .collect();
    let mut scored: Vec<(f64, [f64; 4])> = seeds.par_iter().map(|p| (objective(p, mu, &target), *p)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut evaluations = cfg.samples;

    let mut best: Option<(f64, [f64; 4], usize)> = None;
    for &(f0, p0) in scored.iter().take(cfg.starts) {
        if f0 >= PENALTY {
            break;
        }
        let f = |p: &[f64; 4]| if bx.contains(p) { objective(p, mu, &target) } else { PENALTY };
        let (p1, _, it, ev) = nelder_mead(f, p0, bx, cfg.max_iter, cfg.threshold * 1e-6);
        evaluations += ev;
        let (p2, f2, it2, ev2) = gauss_newton(p1, bx, mu, &target);
        evaluations += ev2;
        if best.is_none_or(|(fb, _, _)| f2 < fb) {
            best = Some((f2, p2, it + it2));
        }
        if f2 <= cfg.threshold {
            break;
        }
    }
    let (fb, pb, iterations) = best.ok_or(Error::SearchFailed { residual: PENALTY, threshold: cfg.threshold })?;
    if !(fb <= cfg.threshold) {
        return Err(Error::SearchFailed { residual: fb, threshold: cfg.threshold });
    }
    let mut res = SearchResult::evaluate(pb, mu, target)?;
    res.iterations = iterations;
    res.evaluations = evaluations;
    Ok(res)
}

/// Nelder–Mead with standard coefficients; the initial simplex spans 5% of
/// the box. Returns `(point, value, iterations, evaluations)`.
fn nelder_mead<F>(f: F, x0: [f64; 4], bx: &SearchBox, max_iter: usize, ftol: f64) -> ([f64; 4], f64, usize, usize)
where
    F: Fn(&[f64; 4]) -> f64,
{
    const N: usize = 4;
    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, f(&x0)));
    for i in 0..N {
        let mut x = x0;
        let h = 0.05 * bx.width(i);
        x[i] = if x[i] + h <= bx.upper[i] { x[i] + h } else { x[i] - h };
        simplex.push((x, f(&x)));
    }
    let mut evals = N + 1;
    let comb = |a: &[f64; 4], b: &[f64; 4], t: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    let mut it = 0;
    while it < max_iter {
        it += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= ftol || (simplex[N].1 - simplex[0].1).abs() <= 1e-15 * simplex[0].1.abs() {
            break;
        }
        let centroid: [f64; 4] = std::array::from_fn(|i| simplex[..N].iter().map(|v| v.0[i]).sum::<f64>() / N as f64);
        let worst = simplex[N];
        let xr = comb(&centroid, &worst.0, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = comb(&centroid, &worst.0, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = comb(&centroid, &xr, 0.5);
                (x, f(&x))
            } else {
                let x = comb(&centroid, &worst.0, 0.5);
                (x, f(&x))
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                simplex[N] = (xc, fc);
            } else {
                let x0 = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = comb(&x0, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
                evals += N;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, simplex[0].1, it, evals)
}

/// Minimum-norm Gauss–Newton on the residual vector with a forward-difference
/// Jacobian and step halving.
fn gauss_newton(x0: [f64; 4], bx: &SearchBox, mu: f64, target: &SearchTarget) -> ([f64; 4], f64, usize, usize) {
    let eval = |p: &[f64; 4]| components(p, mu, target).ok().map(|(r, _)| r);
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut x = x0;
    let Some(mut r) = eval(&x) else {
        return (x0, PENALTY, 0, 1);
    };
    let mut evals = 1;
    let mut it = 0;
    for _ in 0..30 {
        it += 1;
        let k = r.len();
        // Jacobian columns scaled by the box width
        let mut jac = vec![[0.0; 4]; k];
        let mut ok = true;
        for i in 0..4 {
            let h = 1e-7 * bx.width(i);
            let mut xp = x;
            xp[i] += if xp[i] + h <= bx.upper[i] { h } else { -h };
            let dx = xp[i] - x[i];
            match eval(&xp) {
                Some(rp) => {
                    for j in 0..k {
                        jac[j][i] = (rp[j] - r[j]) / dx * bx.width(i);
                    }
                }
                None => ok = false,
            }
            evals += 1;
        }
        if !ok {
            break;
        }
        // δ = −Jᵀ (J Jᵀ)⁻¹ r, in box-scaled units
        let mut jjt = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in 0..k {
                jjt[a][b] = (0..4).map(|i| jac[a][i] * jac[b][i]).sum();
            }
        }
        let y = match k {
            1 if jjt[0][0] > 0.0 => vec![r[0] / jjt[0][0]],
            2 => {
                let det = jjt[0][0] * jjt[1][1] - jjt[0][1] * jjt[1][0];
                if det == 0.0 {
                    break;
                }
                vec![
                    (jjt[1][1] * r[0] - jjt[0][1] * r[1]) / det,
                    (-jjt[1][0] * r[0] + jjt[0][0] * r[1]) / det,
                ]
            }
            _ => break,
        };
        let step: [f64; 4] = std::array::from_fn(|i| -(0..k).map(|a| jac[a][i] * y[a]).sum::<f64>() * bx.width(i));
        let f0 = norm2(&r);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let xn = bx.clamp(std::array::from_fn(|i| x[i] + t * step[i]));
            evals += 1;
            if let Some(rn) = eval(&xn) {
                if norm2(&rn) < f0 {
                    x = xn;
                    r = rn;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved || norm2(&r) == 0.0 {
            break;
        }
    }
    (x, norm2(&r), it, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_mismatch_skips_shorter_periods() {
        let step = TAU / 7.0;
        assert!(azimuth_mismatch(12.0 * step, 7).abs() < 1e-14);
        assert!((azimuth_mismatch(2.0 * step + 0.01, 7) - 0.01).abs() < 1e-14);
        // 14/7 closes after one quasi-period; the nearest admissible is 13/7 or 15/7
        assert!((azimuth_mismatch(14.0 * step, 7).abs() - step).abs() < 1e-12);
        assert!((azimuth_mismatch(0.3, 1) - 0.3).abs() < 1e-14);
        assert!((azimuth_mismatch(TAU / 4.0, 4)).abs() < 1e-14);
        assert!((azimuth_mismatch(std::f64::consts::PI, 4).abs() - TAU / 4.0).abs() < 1e-12);
    }

    #[test]
    fn targets_are_validated() {
        assert!(SearchTarget::QuasiPeriodic { n: 2, m: 4 }.validate().is_err());
        assert!(SearchTarget::QuasiPeriodic { n: 0, m: 1 }.validate().is_err());
        assert!(SearchTarget::Periodic { n: 1, m: 2, p: 0 }.validate().is_err());
        assert!(SearchTarget::Periodic { n: 1, m: 2, p: 7 }.validate().is_ok());
    }

    #[test]
    fn invalid_decodes_are_penalised() {
        assert_eq!(quasi_periodic_residual(&[0.0, 1.0, 1.0, -0.1], 1.0, 5, 6), PENALTY);
        assert_eq!(quasi_periodic_residual(&[0.0, -1.0, 1.0, 0.1], 1.0, 5, 6), PENALTY);
        // unbound: fast and strongly pushed
        assert_eq!(quasi_periodic_residual(&[-0.6, 1.0, 1.3, 0.25], 1.0, 5, 6), PENALTY);
    }

    #[test]
    fn residual_relabeling_symmetry() {
        // (n, m) on (ω_ξ, ω_η) equals (m, n) on (ω_η, ω_ξ): same magnitude
        let p = [0.2, 1.0, 0.9, 0.05];
        let (s, model) = decode(&p, 1.0).unwrap();
        let ctx = PropagationContext::build(&s, &model).unwrap();
        let a = OrbitMetrics::of(&ctx, 5, 6).unwrap();
        let swapped = 6.0 * a.omega_eta - 5.0 * a.omega_xi;
        assert!((a.commensurability + swapped).abs() < 1e-15);
    }
}
