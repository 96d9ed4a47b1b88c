use super::{relative_error, ORACLE_TOL};
use crate::args::ContinuousArgs;
use crate::commands::sweep::signed_slack;
use crate::error::{invalid, CliError, CliResult};
use crate::output::{Row, Sink, Value};
use crate::settings::Settings;
use noisy_momentum::amplification::{BoundCheck, BoundId};
use noisy_momentum::continuous::{
    ct_class_extremes, ct_lyapunov_oracle, ct_numerical_extremes, ct_rate, ct_verify_bounds, CTParams, CtVariant, FlowKind,
};
use noisy_momentum::quadratic::{ProblemClass, Spectrum};

pub const CONTINUOUS_SCHEMA: &str = "momentum-continuous/v1";

const COLUMNS: &[&str] = &[
    "flow", "kappa", "m", "L", "n", "sigma", "theta", "gamma", "alpha", "status", "note", "rho", "t_s", "j_max",
    "j_min", "j_max_closed_form", "j_min_closed_form", "j_max_lyapunov", "ct-jmax-ts-lower", "ct-jmax-ts-lower_slack",
    "ct-jmin-ts-lower", "ct-jmin-ts-lower_slack",
];

struct Flow {
    label: &'static str,
    kind: FlowKind,
    variant: Option<CtVariant>,
}

#[derive(Default)]
struct Outcome {
    rho: f64,
    j_max: f64,
    j_min: f64,
    closed: Option<(f64, f64)>,
    lyapunov: f64,
    checks: Vec<BoundCheck>,
}

fn evaluate(flow: &Flow, params: &CTParams, class: &ProblemClass) -> noisy_momentum::Result<Outcome> {
    let rho = ct_rate(params, flow.kind, class.m, class.l)?;
    let (j_max, j_min) = ct_numerical_extremes(params, flow.kind, class)?;
    let s2 = params.sigma * params.sigma;
    let closed = flow
        .variant
        .map(|v| ct_class_extremes(v, class.kappa(), class.n).map(|(a, b)| (s2 * a, s2 * b)))
        .transpose()?;
    // Every modal value decreases in lambda, so the worst spectrum puts n - 1 modes at m.
    let worst = Spectrum::two_point(class.m, class.l, class.n.saturating_sub(1).max(1), usize::from(class.n > 1))?;
    let lyapunov = match flow.kind {
        FlowKind::Agd if flow.variant.is_none() => f64::NAN,
        _ => ct_lyapunov_oracle(params, flow.kind, &worst)?,
    };
    let checks = match flow.kind {
        FlowKind::Agd => ct_verify_bounds(params, class)?,
        FlowKind::Gfd => Vec::new(),
    };
    Ok(Outcome { rho, j_max, j_min, closed, lyapunov, checks })
}

pub fn continuous(s: &Settings, args: &ContinuousArgs) -> CliResult<()> {
    let custom = s.beta.is_some() || s.gamma.is_some();
    if s.alpha.is_some() {
        return Err(invalid("the flow uses alpha = 1/L; give --beta and --gamma only"));
    }
    let flows: Vec<Flow> = if custom {
        vec![Flow { label: "agd", kind: FlowKind::Agd, variant: None }]
    } else {
        s.flows(&args.flow)?.into_iter().map(|v| Flow { label: v.as_str(), kind: v.kind(), variant: Some(v) }).collect()
    };
    let mut sink = Sink::open(s.out.as_deref(), s.format, CONTINUOUS_SCHEMA, COLUMNS.iter().map(|c| c.to_string()).collect())?;
    let mut violated = Vec::new();
    let mut mismatch = None;
    for (m, l) in s.intervals()? {
        for n in s.dims(&[1])? {
            let class = ProblemClass::new(m, l, n)?;
            for flow in &flows {
                let params = match flow.variant {
                    Some(v) => v.params(class.kappa(), l),
                    None => CTParams::normalized(s.beta.unwrap_or(0.0), s.gamma.unwrap_or(0.0), l),
                }
                .and_then(|p| CTParams::new(p.theta, p.gamma, p.alpha, s.sigma));
                let (params, outcome) = match params.and_then(|p| evaluate(flow, &p, &class).map(|o| (p, o))) {
                    Ok((p, o)) => (Some(p), Ok(o)),
                    Err(e) => (None, Err(e)),
                };
                let (status, note, o) = match outcome {
                    Ok(o) => ("ok", String::new(), o),
                    Err(noisy_momentum::Error::Unstable(msg)) if custom => return Err(CliError::Unstable(msg)),
                    Err(e) => ("infeasible", e.to_string(), Outcome { rho: f64::NAN, ..Outcome::default() }),
                };
                let ok = status == "ok";
                if ok {
                    if let Some((a, b)) = o.closed {
                        let err = relative_error(a, o.j_max).max(relative_error(b, o.j_min)).max(relative_error(a, o.lyapunov));
                        if err > ORACLE_TOL {
                            mismatch = Some(format!("{} kappa {} n {n}: closed form off by {err:e}", flow.label, class.kappa()));
                        }
                    }
                }
                for c in o.checks.iter().filter(|c| !c.satisfied) {
                    violated.push(c.bound_id.to_string());
                }
                let num = |x: f64| if ok { Value::Num(x) } else { Value::Empty };
                let check = |id: BoundId| o.checks.iter().find(|c| c.bound_id == id);
                let mut row = Row::new()
                    .set("flow", flow.label)
                    .set("kappa", class.kappa())
                    .set("m", m)
                    .set("L", l)
                    .set("n", n)
                    .set("sigma", s.sigma)
                    .set("theta", Value::opt(params.map(|p| p.theta)))
                    .set("gamma", Value::opt(params.map(|p| p.gamma)))
                    .set("alpha", Value::opt(params.map(|p| p.alpha)))
                    .set("status", status)
                    .set("note", note)
                    .set("rho", num(o.rho))
                    .set("t_s", num(1.0 / o.rho))
                    .set("j_max", num(o.j_max))
                    .set("j_min", num(o.j_min))
                    .set("j_max_closed_form", Value::opt(o.closed.map(|c| c.0)))
                    .set("j_min_closed_form", Value::opt(o.closed.map(|c| c.1)))
                    .set("j_max_lyapunov", if ok && o.lyapunov.is_finite() { Value::Num(o.lyapunov) } else { Value::Empty });
                for id in [BoundId::CtJmaxTsLower, BoundId::CtJminTsLower] {
                    row.push(id.as_str(), Value::opt(check(id).map(|c| c.rhs)));
                    row.push(format!("{id}_slack"), Value::opt(check(id).map(signed_slack)));
                }
                sink.write(&row)?;
            }
        }
    }
    sink.finish()?;
    if !violated.is_empty() {
        violated.dedup();
        return Err(CliError::BoundViolation(violated));
    }
    match mismatch {
        Some(msg) => Err(CliError::OracleMismatch(msg)),
        None => Ok(()),
    }
}
