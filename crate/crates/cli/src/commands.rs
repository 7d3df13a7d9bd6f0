use serde_json::{json, Value};
use stark_weierstrass::analysis::{
    asymptotic_azimuth, classify_boundness, displaced_circular_conditions, real_periods, search,
    stationary_equilibrium, Boundness, SearchConfig, SearchTarget,
};
use stark_weierstrass::oracle::{integrate_cartesian_at, IntegratorConfig};
use stark_weierstrass::stark::{Coordinate, PropagationContext, Sample, StarkModel};
use stark_weierstrass::Error;

use crate::args::{ClassifyArgs, EquilibriumArgs, Format, Grid, PropagateArgs, SearchArgs, VerifyArgs};
use crate::error::CliError;
use crate::output::{emit, emit_json, fmt17, to_value};

pub const CSV_HEADER: &str = "t,tau,x,y,z,vx,vy,vz,xi,eta,phi";

fn grid(end: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    if end == 0.0 || !end.is_finite() {
        return Err(CliError::Usage("--t-end must be finite and non-zero".into()));
    }
    Ok((0..samples).map(|k| end * k as f64 / (samples - 1) as f64).collect())
}

fn row(s: &Sample) -> [f64; 11] {
    let (c, p) = (s.cartesian, s.parabolic);
    [s.t, s.tau, c.r[0], c.r[1], c.r[2], c.v[0], c.v[1], c.v[2], p.xi, p.eta, p.phi]
}

/// Boundness, periods and constants shared by `propagate` and `classify`.
fn describe(ctx: &PropagationContext) -> Result<Value, CliError> {
    let mut v = json!({
        "model": to_value(&ctx.model),
        "constants": to_value(&ctx.constants),
        "degenerate": ctx.is_degenerate(),
    });
    match classify_boundness(ctx) {
        Ok(r) => {
            v["kind"] = to_value(&r.kind);
            v["margin"] = json!(r.margin);
            v["e_r"] = json!(r.e_r);
            v["threshold"] = json!(r.threshold);
            if r.kind == Boundness::Unbound {
                v["asymptotic_azimuth_rad"] = json!(asymptotic_azimuth(ctx)?);
            }
        }
        // a stationary ξ never grows
        Err(Error::Degenerate(_)) => v["kind"] = to_value(&Boundness::Bound),
        Err(e) => return Err(e.into()),
    }
    if let Ok(p) = real_periods(ctx) {
        v["periods_tau"] = to_value(&p);
    }
    Ok(v)
}

pub fn propagate(a: &PropagateArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let state = a.state.state();
    let xs = grid(a.t_end, a.samples)?;
    let ctx = PropagationContext::build(&state, &model)?;
    let poles = ctx.escape_poles();
    let mut rows = Vec::with_capacity(xs.len());
    let mut escaped = None;
    for &x in &xs {
        if x == 0.0 {
            // the input itself, not its round trip through parabolic coordinates
            let p = ctx.initial_parabolic;
            rows.push(row(&Sample { t: 0.0, tau: 0.0, parabolic: p, cartesian: state }));
            continue;
        }
        let sample = match a.grid {
            Grid::T => ctx.tau_of(x).and_then(|tau| ctx.sample_at_tau(tau)),
            Grid::Tau => match poles {
                Some((lo, hi)) if x <= lo || x >= hi => Err(Error::EscapedBeforeT { t: f64::INFINITY }),
                _ => ctx.sample_at_tau(x),
            },
        };
        match sample {
            Ok(s) => rows.push(row(&s)),
            Err(Error::EscapedBeforeT { .. }) => {
                escaped = Some(x);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    match a.format {
        Format::Csv => {
            let mut text = String::from(CSV_HEADER);
            text.push('\n');
            for r in &rows {
                text.push_str(&r.map(fmt17).join(","));
                text.push('\n');
            }
            emit(&text, a.out.as_deref())?;
        }
        Format::Json => {
            let mut meta = describe(&ctx)?;
            meta["state0"] = to_value(&state);
            meta["grid"] = json!({
                "kind": match a.grid { Grid::T => "t", Grid::Tau => "tau" },
                "end": a.t_end,
                "samples": a.samples,
            });
            meta["escaped"] = json!(escaped.is_some());
            let names: Vec<&str> = CSV_HEADER.split(',').collect();
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(names.iter().zip(r).map(|(k, x)| (k.to_string(), json!(x))).collect()))
                .collect();
            emit_json(json!({ "meta": meta, "rows": rows }), a.out.as_deref())?;
        }
    }
    match escaped {
        Some(at) => Err(CliError::Escaped {
            grid: match a.grid {
                Grid::T => "t",
                Grid::Tau => "tau",
            },
            at,
            rows: rows.len(),
        }),
        None => Ok(()),
    }
}

pub fn classify(a: &ClassifyArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let state = a.state.state();
    let ctx = PropagationContext::build(&state, &model)?;
    let mut v = describe(&ctx)?;
    v["state0"] = to_value(&state);
    emit_json(v, a.out.as_deref())
}

pub fn run_search(a: &SearchArgs) -> Result<(), CliError> {
    let target = match a.p {
        Some(p) => SearchTarget::Periodic { n: a.n, m: a.m, p },
        None => SearchTarget::QuasiPeriodic { n: a.n, m: a.m },
    };
    let cfg = SearchConfig {
        seed: a.seed,
        mu: a.mu,
        samples: a.budget,
        starts: a.starts,
        max_iter: a.max_iter,
        threshold: a.tol,
    };
    let bx = a.search_box();
    let r = search(target, &bx, &cfg)?;
    let mut v = to_value(&r);
    v["config"] = to_value(&cfg);
    v["box"] = to_value(&bx);
    emit_json(v, a.out.as_deref())
}

struct ErrorSeries {
    name: &'static str,
    values: Vec<f64>,
}

impl ErrorSeries {
    fn summary(&self) -> Value {
        let mut s = self.values.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) };
        json!({ "max": s[n - 1], "median": median })
    }
}

fn norm(a: [f64; 3]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) / norm(b).max(f64::MIN_POSITIVE)
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let state = a.state.state();
    let times = grid(a.t_end, a.samples)?;
    if !(a.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let analytic_model = match a.inject_fault {
        Some(f) => StarkModel::new(model.mu, model.eps * (1.0 + f))?,
        None => model,
    };
    let ctx = PropagationContext::build(&state, &analytic_model)?;
    let mut analytic = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        match ctx.propagate(t) {
            Ok(s) => analytic.push(s),
            Err(Error::EscapedBeforeT { .. }) => return Err(CliError::Escaped { grid: "t", at: t, rows: k }),
            Err(e) => return Err(e.into()),
        }
    }
    let oracle = integrate_cartesian_at(&state, &model, &times, &IntegratorConfig::with_tol(1e-12, 1e-14))?;

    let mut series = vec![
        ErrorSeries { name: "position", values: vec![] },
        ErrorSeries { name: "velocity", values: vec![] },
    ];
    for (i, name) in ["x", "y", "z", "vx", "vy", "vz"].into_iter().enumerate() {
        let values = analytic
            .iter()
            .zip(&oracle.states)
            .map(|(p, q)| (p.to_array()[i] - q.to_array()[i]).abs())
            .collect();
        series.push(ErrorSeries { name, values });
    }
    for (p, q) in analytic.iter().zip(&oracle.states) {
        series[0].values.push(rel(p.r, q.r));
        series[1].values.push(rel(p.v, q.v));
    }
    let max = series[..2].iter().flat_map(|s| s.values.iter().copied()).fold(0.0, f64::max);
    let pass = max <= a.tol;
    let report = json!({
        "pass": pass,
        "tol": a.tol,
        "model": to_value(&model),
        "state0": to_value(&state),
        "times": times,
        "summary": series.iter().map(|s| (s.name.to_string(), s.summary())).collect::<serde_json::Map<_, _>>(),
        "errors": series.iter().map(|s| (s.name.to_string(), json!(s.values))).collect::<serde_json::Map<_, _>>(),
    });
    emit_json(report, a.out.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(CliError::ToleranceExceeded { max, tol: a.tol })
    }
}

pub fn equilibrium(a: &EquilibriumArgs) -> Result<(), CliError> {
    let model = a.model.model()?;
    let z_star = stationary_equilibrium(&model)?;
    let mut v = json!({
        "model": to_value(&model),
        "z_star": z_star,
        "stationary": {
            "r": [0.0, 0.0, z_star],
            "v": [0.0, 0.0, 0.0],
            "net_acceleration": model.acceleration([0.0, 0.0, z_star]),
        },
    });
    if let Some(z) = a.z {
        let s = displaced_circular_conditions(z, &model)?;
        let ctx = PropagationContext::build(&s, &model)?;
        let mut residuals = serde_json::Map::new();
        for c in [Coordinate::Xi, Coordinate::Eta] {
            let b = ctx.branch(c);
            let s0 = b.s(0.0)?.s;
            residuals.insert(c.name().into(), json!({ "f": b.poly().eval(s0), "df": b.poly().deriv(s0) }));
        }
        v["displaced_circular"] = json!({
            "z": z,
            "state": to_value(&s),
            "revolution_period": std::f64::consts::TAU * s.r[0] / s.v[1],
            "double_root_residuals": residuals,
        });
    }
    emit_json(v, a.out.as_deref())
}
