//! Dormand–Prince 5(4) with PI step-size control and Hairer's continuous
//! extension.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Interpolate onto requested output times instead of stepping to them.
    pub dense_output: bool,
    /// Initial step; estimated when `None`.
    pub initial_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, max_steps: 5_000_000, dense_output: true, initial_step: None }
    }
}

impl IntegratorConfig {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x <= 1e-3;
        if !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Error::InvalidConfig("tolerances must lie in (0, 1e-3]"));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive"));
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
pub(crate) const D1: f64 = -12715105075.0 / 11282082432.0;
pub(crate) const D3: f64 = 87487479700.0 / 32700410799.0;
pub(crate) const D4: f64 = -10690763975.0 / 1880347072.0;
pub(crate) const D5: f64 = 701980252875.0 / 199316789632.0;
pub(crate) const D6: f64 = -1453857185.0 / 822651844.0;
pub(crate) const D7: f64 = 69997945.0 / 29380423.0;

/// One step's stages and its continuous extension.
struct Step<const N: usize> {
    y_new: [f64; N],
    k7: [f64; N],
    err: f64,
    rcont: [[f64; N]; 5],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, cfg: &IntegratorConfig) -> Step<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);
    // max-norm: stricter than RMS, keeps invariant drift within the tolerance
    let mut err: f64 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        err = f64::max(err, (e / sk).abs());
    }
    let mut rcont = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        rcont[0][i] = y[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - h * k7[i] - bspl;
        rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step { y_new, k7, err, rcont }
}

fn dense<const N: usize>(rcont: &[[f64; N]; 5], theta: f64) -> [f64; N] {
    let t1 = 1.0 - theta;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = rcont[0][i]
            + theta * (rcont[1][i] + t1 * (rcont[2][i] + theta * (rcont[3][i] + t1 * rcont[4][i])));
    }
    out
}

/// Hairer's starting-step heuristic.
fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], dir: f64, cfg: &IntegratorConfig) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sk = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs();
    let rms = |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| v(i) * v(i)).sum::<f64>() / N as f64).sqrt();
    let d0 = rms(&|i| y[i] / sk(i));
    let d1 = rms(&|i| k1[i] / sk(i));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, dir * h0, &[(1.0, k1)]);
    let k2 = f(t + dir * h0, &y1);
    let d2 = rms(&|i| (k2[i] - k1[i]) / sk(i)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

/// Integrates `y′ = f(t, y)` from `t0`, reporting the state at every time in
/// `t_out` (monotone in the direction of integration).
///
/// `stop` is called after every accepted step with the new `(t, y)`; it may
/// abort with an error (collision guard) or return `true` to end the run
/// early, in which case the outputs collected so far are returned.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_out: &[f64],
    cfg: &IntegratorConfig,
    mut stop: S,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> Result<bool>,
{
    cfg.validate()?;
    let mut out = Vec::with_capacity(t_out.len());
    let Some(&t_end) = t_out.last() else {
        return Ok(out);
    };
    let mut idx = 0;
    while idx < t_out.len() && t_out[idx] == t0 {
        out.push(y0);
        idx += 1;
    }
    if idx == t_out.len() {
        return Ok(out);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = cfg.initial_step.unwrap_or_else(|| initial_step(&mut f, t, &y, &k1, dir, cfg)).abs();
    let hmax = (t_end - t0).abs();
    let mut facold: f64 = 1e-4;
    let mut reject = false;
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    for _ in 0..cfg.max_steps {
        h = h.min(hmax);
        let mut last = false;
        let target = if cfg.dense_output { t_end } else { t_out[idx] };
        if (t + dir * h - target) * dir >= 0.0 {
            h = (target - t).abs();
            last = true;
        }
        if h <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow);
        }
        let st = step(&mut f, t, &y, &k1, dir * h, cfg);
        if !st.err.is_finite() {
            h *= 0.1;
            reject = true;
            continue;
        }
        let fac11 = st.err.powf(expo1);
        if st.err <= 1.0 {
            let fac = (fac11 / facold.powf(beta) / safe).clamp(0.1, 5.0);
            facold = st.err.max(1e-4);
            let t_new = if last { target } else { t + dir * h };
            // outputs inside (t, t_new]
            while idx < t_out.len() && (t_out[idx] - t_new) * dir <= 0.0 {
                let v = if t_out[idx] == t_new {
                    st.y_new
                } else {
                    dense(&st.rcont, (t_out[idx] - t) / (dir * h))
                };
                out.push(v);
                idx += 1;
            }
            t = t_new;
            y = st.y_new;
            k1 = st.k7;
            if idx == t_out.len() {
                return Ok(out);
            }
            if stop(t, &y)? {
                return Ok(out);
            }
            let mut hnew = h / fac;
            if reject {
                hnew = hnew.min(h);
            }
            reject = false;
            h = hnew;
        } else {
            h /= (fac11 / safe).min(5.0);
            reject = true;
        }
    }
    Err(Error::StepLimitExceeded(cfg.max_steps))
}

/// Classical fixed-step integration with the fifth-order solution, `n` steps.
pub fn integrate_fixed<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t_end: f64, n: usize) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let cfg = IntegratorConfig::default();
    let h = (t_end - t0) / n as f64;
    let mut y = y0;
    let mut k1 = f(t0, &y);
    for k in 0..n {
        let st = step(&mut f, t0 + k as f64 * h, &y, &k1, h, &cfg);
        y = st.y_new;
        k1 = st.k7;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        // row sums equal the nodes; weights sum to one; error weights to zero
        let rows = [
            (C2, A21),
            (C3, A31 + A32),
            (C4, A41 + A42 + A43),
            (C5, A51 + A52 + A53 + A54),
            (1.0, A61 + A62 + A63 + A64 + A65),
            (1.0, A71 + A73 + A74 + A75 + A76),
        ];
        for (c, s) in rows {
            assert!((c - s).abs() < 1e-15);
        }
        assert!((E1 + E3 + E4 + E5 + E6 + E7).abs() < 1e-16);
        // the dense-output correction has no constant component
        assert!((D1 + D3 + D4 + D5 + D6 + D7).abs() < 1e-14);
    }

    #[test]
    fn dense_output_is_fourth_order_between_steps() {
        // y′ = y; compare interpolants against exp at many interior points
        let ts: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let cfg = IntegratorConfig::with_tol(1e-11, 1e-13);
        let ys = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &ts, &cfg, |_, _| Ok(false)).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() <= 1e-9 * t.exp(), "t={t}");
        }
    }

    #[test]
    fn dense_output_matches_step_endpoints() {
        let rc = [[1.0], [0.5], [0.25], [-0.1], [0.3]];
        assert_eq!(dense(&rc, 0.0), [1.0]);
        assert!((dense(&rc, 1.0)[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn fixed_step_order_is_five() {
        // harmonic oscillator over one period
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let tp = 2.0 * std::f64::consts::PI;
        let err = |n| {
            let y = integrate_fixed(f, 0.0, [1.0, 0.0], tp, n);
            ((y[0] - 1.0).powi(2) + y[1].powi(2)).sqrt()
        };
        let (e1, e2) = (err(40), err(80));
        let order = (e1 / e2).log2();
        assert!(order > 4.8, "observed order {order}");
    }

    #[test]
    fn backward_integration() {
        let ts = [0.0, -0.5, -1.0];
        let cfg = IntegratorConfig::with_tol(1e-12, 1e-14);
        let ys = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &ts, &cfg, |_, _| Ok(false)).unwrap();
        assert!((ys[2][0] - (-1.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig::with_tol(0.1, 1e-12);
        assert!(integrate(|_, y: &[f64; 1]| *y, 0.0, [1.0], &[1.0], &cfg, |_, _| Ok(false)).is_err());
    }
}
