use super::{relative_error, select_params, ORACLE_TOL};
use crate::error::{CliError, CliResult};
use crate::output::{Row, Sink, Value};
use crate::settings::Settings;
use noisy_momentum::amplification::{class_extremes, lyapunov_oracle, ClassExtremes};
use noisy_momentum::geometry::{class_rate, settling_time, RateOutcome, Witness};
use noisy_momentum::quadratic::{NoiseModel, ProblemClass, Spectrum};

pub const RATE_SCHEMA: &str = "momentum-rate/v1";
pub const AMPLIFY_SCHEMA: &str = "momentum-amplify/v1";

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

const RATE_COLUMNS: &[&str] = &[
    "algorithm", "m", "L", "kappa", "alpha", "beta", "gamma", "status", "rho", "t_s", "b_m", "a_m", "radius_m",
    "m_in_delta", "m_in_delta_rho", "b_L", "a_L", "radius_L", "L_in_delta", "L_in_delta_rho",
];

fn push_witness(row: &mut Row, suffix: &str, w: &Witness) {
    row.push(format!("b_{suffix}"), w.point.b);
    row.push(format!("a_{suffix}"), w.point.a);
    row.push(format!("radius_{suffix}"), w.radius);
    row.push(format!("{suffix}_in_delta"), w.in_delta);
    row.push(format!("{suffix}_in_delta_rho"), w.in_delta_rho);
}

pub fn rate(s: &Settings) -> CliResult<()> {
    let (m, l) = s.interval()?;
    let sel = select_params(s, m, l, s.noise.unwrap_or(NoiseModel::Iterate))?;
    let outcome = class_rate(&sel.params, &ProblemClass::new(m, l, 1)?);
    let (status, witnesses) = match &outcome {
        RateOutcome::Converges(c) => ("ok", c.witnesses),
        RateOutcome::Unstable { witnesses, .. } => ("unstable", *witnesses),
    };
    let rho = outcome.rho();
    let ts = if rho < 1.0 { settling_time(rho) } else { f64::INFINITY };
    let p = &sel.params;
    let mut row = Row::new()
        .set("algorithm", sel.label)
        .set("m", m)
        .set("L", l)
        .set("kappa", l / m)
        .set("alpha", p.alpha)
        .set("beta", p.beta)
        .set("gamma", p.gamma)
        .set("status", status)
        .set("rho", rho)
        .set("t_s", ts);
    push_witness(&mut row, "m", &witnesses[0]);
    push_witness(&mut row, "L", &witnesses[1]);
    let mut sink = Sink::open(s.out.as_deref(), s.format, RATE_SCHEMA, columns(RATE_COLUMNS))?;
    sink.write(&row)?;
    sink.finish()?;
    match outcome {
        RateOutcome::Converges(_) => Ok(()),
        RateOutcome::Unstable { rho, .. } => Err(CliError::Unstable(format!("spectral radius {rho} on [{m}, {l}]"))),
    }
}

const AMPLIFY_COLUMNS: &[&str] = &[
    "algorithm", "noise", "sigma", "m", "L", "kappa", "n", "alpha", "beta", "gamma", "rho", "t_s", "jhat_m", "jhat_L",
    "jhat_max", "jhat_min", "jhat_min_argument", "j_max", "j_min", "j_max_lyapunov", "j_min_lyapunov",
    "j_max_closed_form", "j_min_closed_form", "oracle_error",
];

/// Spectra attaining the class extremes: `m`, `L`, and `n - 2` copies of the extremal free eigenvalue.
pub fn extremal_spectra(e: &ClassExtremes, class: &ProblemClass) -> CliResult<(Spectrum, Spectrum)> {
    let worst_endpoint = if e.jhat_m >= e.jhat_l { class.m } else { class.l };
    if class.n == 1 {
        let s = Spectrum::new(vec![worst_endpoint])?;
        return Ok((s.clone(), s));
    }
    let build = |free: f64| {
        let mut eig = vec![class.m, class.l];
        eig.extend(std::iter::repeat_n(free, class.n - 2));
        Spectrum::new(eig)
    };
    Ok((build(worst_endpoint)?, build(e.jhat_min_argument)?))
}

pub fn amplify(s: &Settings) -> CliResult<()> {
    let (m, l) = s.interval()?;
    let n = s.dim()?;
    let model = s.noise.unwrap_or(NoiseModel::Iterate);
    let sel = select_params(s, m, l, model)?;
    let class = ProblemClass::new(m, l, n)?;
    let cert = class_rate(&sel.params, &class).into_result()?;
    let e = class_extremes(&sel.params, &class)?;
    let (worst, best) = extremal_spectra(&e, &class)?;
    let lyap = (lyapunov_oracle(&sel.params, &worst)?, lyapunov_oracle(&sel.params, &best)?);
    let closed = sel.point.as_ref().and_then(|p| p.closed_forms).map(|c| (c.class_max(n), c.class_min(n)));
    let error = relative_error(e.j_max, lyap.0).max(relative_error(e.j_min, lyap.1));
    let p = &sel.params;
    let row = Row::new()
        .set("algorithm", sel.label)
        .set("noise", model.as_str())
        .set("sigma", p.noise.sigma)
        .set("m", m)
        .set("L", l)
        .set("kappa", class.kappa())
        .set("n", n)
        .set("alpha", p.alpha)
        .set("beta", p.beta)
        .set("gamma", p.gamma)
        .set("rho", cert.rho)
        .set("t_s", cert.settling_time)
        .set("jhat_m", e.jhat_m)
        .set("jhat_L", e.jhat_l)
        .set("jhat_max", e.jhat_max)
        .set("jhat_min", e.jhat_min)
        .set("jhat_min_argument", e.jhat_min_argument)
        .set("j_max", e.j_max)
        .set("j_min", e.j_min)
        .set("j_max_lyapunov", lyap.0)
        .set("j_min_lyapunov", lyap.1)
        .set("j_max_closed_form", Value::opt(closed.map(|c| c.0)))
        .set("j_min_closed_form", Value::opt(closed.map(|c| c.1)))
        .set("oracle_error", error);
    let mut sink = Sink::open(s.out.as_deref(), s.format, AMPLIFY_SCHEMA, columns(AMPLIFY_COLUMNS))?;
    sink.write(&row)?;
    sink.finish()?;
    if error > ORACLE_TOL {
        return Err(CliError::OracleMismatch(format!(
            "modal formula and Lyapunov route differ by {error:e} (J_max {} vs {})",
            e.j_max, lyap.0
        )));
    }
    Ok(())
}
