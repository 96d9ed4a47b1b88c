use super::select_params;
use crate::error::{invalid, CliError, CliResult};
use crate::grid::{GridSpec, Spacing};
use crate::output::{Row, Sink, Value};
use crate::settings::{Algorithm, Settings};
use noisy_momentum::amplification::{general_bounds, BoundCheck, BoundContext, BoundId, BoundKind};
use noisy_momentum::families::{tradeoff_curve, CurveRow, Family, PointStatus};
use noisy_momentum::quadratic::{Noise, NoiseModel, ProblemClass};

pub const SWEEP_SCHEMA: &str = "momentum-sweep/v1";
const DEFAULT_POINTS: usize = 50;

/// Discrete-time bounds, in the order their columns appear.
pub fn discrete_bounds() -> impl Iterator<Item = BoundId> {
    BoundId::ALL.iter().copied().filter(|id| !id.as_str().starts_with("ct-"))
}

/// `rhs - lhs` for upper bounds and `lhs - rhs` for lower bounds; negative means violated.
pub fn signed_slack(c: &BoundCheck) -> f64 {
    match c.kind {
        BoundKind::Upper => c.rhs - c.lhs,
        BoundKind::Lower => c.lhs - c.rhs,
    }
}

fn sweep_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "family", "noise", "sigma", "kappa", "m", "L", "n", "t_s", "status", "note", "c", "rho", "alpha", "beta",
        "gamma", "j_max", "j_min",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for id in discrete_bounds() {
        cols.push(id.as_str().to_string());
        cols.push(format!("{id}_slack"));
    }
    cols.push("violations".into());
    cols
}

/// Settling times covering the feasible range of `family`.
pub fn default_grid(family: Family, kappa: f64, points: usize) -> GridSpec {
    let (lo, hi) = family.settling_range(kappa);
    if hi.is_finite() {
        GridSpec { min: lo, max: hi, points, spacing: Spacing::Linear }
    } else {
        GridSpec { min: lo, max: (10.0 * kappa).max(2.0 * lo), points, spacing: Spacing::Log }
    }
}

struct SweepRecord {
    family: &'static str,
    noise: Noise,
    class: ProblemClass,
    row: CurveRow,
}

fn to_row(r: &SweepRecord) -> Row {
    let (status, note) = match &r.row.status {
        PointStatus::Ok => ("ok", String::new()),
        PointStatus::Infeasible(msg) => ("infeasible", msg.clone()),
    };
    let point = r.row.point.as_ref();
    let mut row = Row::new()
        .set("family", r.family)
        .set("noise", r.noise.model.as_str())
        .set("sigma", r.noise.sigma)
        .set("kappa", r.class.kappa())
        .set("m", r.class.m)
        .set("L", r.class.l)
        .set("n", r.class.n)
        .set("t_s", r.row.t_s)
        .set("status", status)
        .set("note", note)
        .set("c", Value::opt(point.map(|p| p.c)))
        .set("rho", Value::opt(point.map(|p| p.rho)))
        .set("alpha", Value::opt(point.map(|p| p.params.alpha)))
        .set("beta", Value::opt(point.map(|p| p.params.beta)))
        .set("gamma", Value::opt(point.map(|p| p.params.gamma)))
        .set("j_max", Value::opt(r.row.j_max))
        .set("j_min", Value::opt(r.row.j_min));
    for id in discrete_bounds() {
        let check = r.row.checks.iter().find(|c| c.bound_id == id);
        row.push(id.as_str(), Value::opt(check.map(|c| c.rhs)));
        row.push(format!("{id}_slack"), Value::opt(check.map(signed_slack)));
    }
    row.set("violations", r.row.violations().count())
}

/// A single row for parameters that are not swept over settling time.
fn fixed_row(s: &Settings, class: &ProblemClass, model: NoiseModel) -> CliResult<(&'static str, CurveRow)> {
    let sel = select_params(s, class.m, class.l, model)?;
    let row = match BoundContext::new(&sel.params, class) {
        Ok(ctx) => CurveRow {
            t_s: ctx.ts(),
            status: PointStatus::Ok,
            point: None,
            j_max: Some(ctx.extremes.j_max),
            j_min: Some(ctx.extremes.j_min),
            checks: general_bounds(&ctx, &sel.params),
        },
        Err(e) => CurveRow {
            t_s: f64::INFINITY,
            status: PointStatus::Infeasible(e.to_string()),
            point: None,
            j_max: None,
            j_min: None,
            checks: Vec::new(),
        },
    };
    Ok((sel.label, row))
}

pub fn sweep(s: &Settings) -> CliResult<()> {
    let intervals = s.intervals()?;
    let dims = s.dims(&[1])?;
    if s.target.is_some() {
        return Err(invalid("sweep takes a settling-time grid, not --ts or --rho"));
    }
    let mut records = Vec::new();
    for &(m, l) in &intervals {
        for &n in &dims {
            let class = ProblemClass::new(m, l, n)?;
            for model in s.noise_models() {
                let noise = Noise::new(model, s.sigma)?;
                match (s.algorithm, s.alpha) {
                    (Some(Algorithm::Family(family)), None) => {
                        let grid = s.grid.unwrap_or_else(|| default_grid(family, class.kappa(), DEFAULT_POINTS));
                        for row in tradeoff_curve(family, &class, noise, &grid.values()) {
                            records.push(SweepRecord { family: family.as_str(), noise, class, row });
                        }
                    }
                    _ => {
                        let (family, row) = fixed_row(s, &class, model)?;
                        records.push(SweepRecord { family, noise, class, row });
                    }
                }
            }
        }
    }
    let mut sink = Sink::open(s.out.as_deref(), s.format, SWEEP_SCHEMA, sweep_columns())?;
    let mut violated: Vec<String> = Vec::new();
    for r in &records {
        sink.write(&to_row(r))?;
        for c in r.row.violations() {
            let name = c.bound_id.to_string();
            if !violated.contains(&name) {
                violated.push(name);
            }
        }
    }
    sink.finish()?;
    if violated.is_empty() {
        Ok(())
    } else {
        Err(CliError::BoundViolation(violated))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_start_at_the_feasible_edge() {
        let g = default_grid(Family::NaLike, 100.0, 5);
        assert_eq!((g.min, g.max), Family::NaLike.settling_range(100.0));
        let g = default_grid(Family::HbLike, 100.0, 5);
        assert_eq!(g.min, 5.5);
        assert_eq!(g.max, 1000.0);
        assert_eq!(g.spacing, Spacing::Log);
    }

    #[test]
    fn columns_are_unique() {
        let cols = sweep_columns();
        let mut sorted = cols.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), cols.len());
    }
}
