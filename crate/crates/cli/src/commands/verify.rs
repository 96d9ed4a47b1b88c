use super::{relative_error, ORACLE_TOL};
use crate::args::VerifyArgs;
use crate::commands::sweep::default_grid;
use crate::error::{invalid, CliError, CliResult};
use crate::output::{Row, Sink};
use crate::settings::{Scope, Settings};
use noisy_momentum::amplification::{
    general_bounds, lyapunov_oracle, total_amplification, BoundCheck, BoundContext, BoundId, BoundKind,
};
use noisy_momentum::continuous::{
    ct_class_extremes, ct_lyapunov_oracle, ct_numerical_extremes, ct_optimal, ct_rate, ct_total_amplification,
    ct_verify_bounds, CTParams, CtVariant, FlowKind,
};
use noisy_momentum::families::{tradeoff_curve, Family};
use noisy_momentum::geometry::{class_rate, optimal_params, Method};
use noisy_momentum::quadratic::{AlgoParams, Noise, NoiseModel, ProblemClass, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const VERIFY_SCHEMA: &str = "momentum-verify/v1";
const DEFAULT_KAPPAS: &[f64] = &[10.0, 100.0, 1000.0];
const DEFAULT_DIMS: &[usize] = &[1, 10, 100];
const DEFAULT_POINTS: usize = 24;
const DEFAULT_DRAWS: usize = 1000;
/// Points per axis of the continuous-time `(beta, gamma)` sweep.
const CT_SWEEP_POINTS: usize = 41;

const COLUMNS: &[&str] = &["scope", "check", "kind", "evaluations", "failures", "worst", "status"];

/// Running summary of one bound or oracle.
#[derive(Debug, Clone)]
struct Tally {
    scope: Scope,
    name: String,
    kind: &'static str,
    evaluations: usize,
    failures: usize,
    /// Bounds: largest `lhs/rhs` (upper) or `rhs/lhs` (lower). Oracles: largest relative error,
    /// except the rate check, which reports the largest rate over `1/sqrt(kappa)`.
    worst: f64,
}

impl Tally {
    fn new(scope: Scope, name: impl Into<String>, kind: &'static str) -> Self {
        Tally { scope, name: name.into(), kind, evaluations: 0, failures: 0, worst: 0.0 }
    }

    fn row(&self) -> Row {
        Row::new()
            .set("scope", self.scope.as_str())
            .set("check", self.name.as_str())
            .set("kind", self.kind)
            .set("evaluations", self.evaluations)
            .set("failures", self.failures)
            .set("worst", self.worst)
            .set("status", if self.failures == 0 { "pass" } else { "fail" })
    }
}

struct Ledger {
    bounds: Vec<Tally>,
    oracles: Vec<Tally>,
    fault: Option<BoundId>,
}

impl Ledger {
    fn record(&mut self, scope: Scope, check: &BoundCheck) {
        let check = if self.fault == Some(check.bound_id) { check.flipped() } else { *check };
        let name = check.bound_id.as_str();
        let idx = match self.bounds.iter().position(|t| t.name == name) {
            Some(i) => i,
            None => {
                self.bounds.push(Tally::new(scope, name, "bound"));
                self.bounds.len() - 1
            }
        };
        let t = &mut self.bounds[idx];
        t.evaluations += 1;
        t.failures += usize::from(!check.satisfied);
        let ratio = match check.kind {
            BoundKind::Upper => check.lhs / check.rhs,
            BoundKind::Lower => check.rhs / check.lhs,
        };
        if ratio.is_finite() {
            t.worst = t.worst.max(ratio);
        }
    }

    fn oracle(&mut self, mut tally: Tally) {
        if tally.evaluations == 0 {
            tally.failures = 1;
        }
        self.oracles.push(tally);
    }
}

fn random_stable(rng: &mut ChaCha8Rng, class: &ProblemClass, noise: Noise) -> AlgoParams {
    loop {
        let params = AlgoParams::with_noise(
            rng.gen_range(0.0..4.0 / class.l),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..2.0),
            noise,
        );
        let Ok(params) = params else { continue };
        if class_rate(&params, class).rho() < 0.99 {
            return params;
        }
    }
}

fn random_spectrum(rng: &mut ChaCha8Rng, m: f64, l: f64) -> Spectrum {
    let n = rng.gen_range(1..=8usize);
    let mut eig = vec![m];
    if n > 1 {
        eig.push(l);
    }
    eig.extend((2..n).map(|_| rng.gen_range(m..=l)));
    Spectrum::new(eig).expect("eigenvalues are positive")
}

fn random_interval(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m = rng.gen_range(0.01..1.0);
    (m, m * 10f64.powf(rng.gen_range(0.0..3.0)))
}

/// Closed-form modal sums against the discrete Lyapunov equation on random stable configurations.
fn discrete_oracle(draws: usize, seed: u64) -> CliResult<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Scope::Discrete, "oracle-lyapunov-discrete", "oracle");
    for _ in 0..draws {
        let (m, l) = random_interval(&mut rng);
        let model = if rng.gen_bool(0.5) { NoiseModel::Iterate } else { NoiseModel::Gradient };
        let noise = Noise::new(model, rng.gen_range(0.1..3.0))?;
        let params = random_stable(&mut rng, &ProblemClass::new(m, l, 1)?, noise);
        let spectrum = random_spectrum(&mut rng, m, l);
        let err = relative_error(total_amplification(&params, &spectrum)?.total, lyapunov_oracle(&params, &spectrum)?);
        t.evaluations += 1;
        t.failures += usize::from(err > ORACLE_TOL);
        t.worst = t.worst.max(err);
    }
    Ok(t)
}

/// Closed-form flow sums against the continuous Lyapunov equation on random stable configurations.
fn continuous_oracle(draws: usize, seed: u64) -> CliResult<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Scope::Continuous, "oracle-lyapunov-continuous", "oracle");
    while t.evaluations < draws {
        let params = CTParams::new(
            rng.gen_range(-1.0..3.0),
            rng.gen_range(-1.0..5.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..3.0),
        )?;
        let (m, l) = random_interval(&mut rng);
        let spectrum = random_spectrum(&mut rng, m, l);
        let kind = if rng.gen_bool(0.5) { FlowKind::Agd } else { FlowKind::Gfd };
        let (Ok(closed), Ok(oracle)) =
            (ct_total_amplification(&params, kind, &spectrum), ct_lyapunov_oracle(&params, kind, &spectrum))
        else {
            continue;
        };
        let err = relative_error(closed, oracle);
        t.evaluations += 1;
        t.failures += usize::from(err > ORACLE_TOL);
        t.worst = t.worst.max(err);
    }
    Ok(t)
}

fn discrete_bounds(s: &Settings, ledger: &mut Ledger, kappas: &[f64], dims: &[usize]) -> CliResult<usize> {
    let mut infeasible = 0;
    for &kappa in kappas {
        for &n in dims {
            let class = ProblemClass::from_kappa(kappa, n)?;
            for model in s.noise_models() {
                let noise = Noise::new(model, s.sigma)?;
                for method in Method::ALL {
                    let (params, _) = optimal_params(method, class.m, class.l)?;
                    let params = params.replace_noise(noise);
                    let ctx = BoundContext::new(&params, &class)?;
                    for c in general_bounds(&ctx, &params) {
                        ledger.record(Scope::Discrete, &c);
                    }
                }
                for family in Family::ALL {
                    let points = s.grid.map_or(DEFAULT_POINTS, |g| g.points);
                    let grid = s.grid.unwrap_or_else(|| default_grid(family, kappa, points));
                    for row in tradeoff_curve(family, &class, noise, &grid.values()) {
                        if row.point.is_none() {
                            infeasible += 1;
                        }
                        for c in &row.checks {
                            ledger.record(Scope::Discrete, c);
                        }
                    }
                }
            }
        }
    }
    Ok(infeasible)
}

fn linspace(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

fn continuous_bounds(s: &Settings, ledger: &mut Ledger, kappas: &[f64], dims: &[usize]) -> CliResult<Tally> {
    let mut extremes = Tally::new(Scope::Continuous, "oracle-ct-class-extremes", "oracle");
    let mut rate = Tally::new(Scope::Continuous, "ct-optimal-rate", "oracle");
    let points = s.grid.map_or(CT_SWEEP_POINTS, |g| g.points.max(2));
    for &kappa in kappas {
        let limit = ct_optimal(kappa, 1.0)?.rho;
        for &n in dims {
            let class = ProblemClass::new(1.0 / kappa, 1.0, n)?;
            for variant in CtVariant::ALL {
                let Ok(params) = variant.params(kappa, 1.0) else { continue };
                let closed = ct_class_extremes(variant, kappa, n)?;
                let numeric = ct_numerical_extremes(&params, variant.kind(), &class)?;
                let err = relative_error(closed.0, numeric.0).max(relative_error(closed.1, numeric.1));
                extremes.evaluations += 1;
                extremes.failures += usize::from(err > ORACLE_TOL);
                extremes.worst = extremes.worst.max(err);
            }
            let grid: Vec<(f64, f64)> = linspace(-1.0, 1.0, points)
                .flat_map(|beta| linspace(-0.5, 3.0 * kappa.sqrt(), points).map(move |gamma| (beta, gamma)))
                .collect();
            let results: Vec<_> = grid
                .par_iter()
                .filter_map(|&(beta, gamma)| {
                    let params = CTParams::normalized(beta, gamma, 1.0).and_then(|p| CTParams::new(p.theta, p.gamma, p.alpha, s.sigma)).ok()?;
                    let rho = ct_rate(&params, FlowKind::Agd, class.m, class.l).ok()?;
                    Some((rho, ct_verify_bounds(&params, &class)))
                })
                .collect();
            for (rho, checks) in results {
                let ratio = rho / limit;
                rate.evaluations += 1;
                rate.failures += usize::from(ratio > 1.0 + 1e-12);
                rate.worst = rate.worst.max(ratio);
                for c in checks? {
                    ledger.record(Scope::Continuous, &c);
                }
            }
        }
    }
    ledger.oracle(rate);
    Ok(extremes)
}

pub fn verify(s: &Settings, args: &VerifyArgs) -> CliResult<()> {
    let scope = s.scope(args.scope)?;
    let draws = args.draws.or(s.file.draws).unwrap_or(DEFAULT_DRAWS);
    let seed = s.seed.unwrap_or(0);
    let kappas = if s.kappas.is_empty() { DEFAULT_KAPPAS.to_vec() } else { s.kappas.clone() };
    if let Some(bad) = kappas.iter().find(|k| !(**k > 1.0 && k.is_finite())) {
        return Err(invalid(format!("verification needs kappa > 1, got {bad}")));
    }
    let dims = s.dims(DEFAULT_DIMS)?;
    let mut ledger = Ledger { bounds: Vec::new(), oracles: Vec::new(), fault: args.inject_fault };
    if scope.discrete() {
        let infeasible = discrete_bounds(s, &mut ledger, &kappas, &dims)?;
        if infeasible > 0 {
            eprintln!("verify: skipped {infeasible} infeasible grid points");
        }
        ledger.oracle(discrete_oracle(draws, seed)?);
    }
    if scope.continuous() {
        let extremes = continuous_bounds(s, &mut ledger, &kappas, &dims)?;
        ledger.oracle(extremes);
        ledger.oracle(continuous_oracle(draws, seed.wrapping_add(1))?);
    }
    if let Some(id) = args.inject_fault {
        if !ledger.bounds.iter().any(|t| t.name == id.as_str()) {
            return Err(invalid(format!("bound {id} is not evaluated in scope {}", scope.as_str())));
        }
    }
    let mut sink = Sink::open(s.out.as_deref(), s.format, VERIFY_SCHEMA, COLUMNS.iter().map(|c| c.to_string()).collect())?;
    for t in ledger.bounds.iter().chain(&ledger.oracles) {
        sink.write(&t.row())?;
    }
    sink.finish()?;
    let failed = |list: &[Tally]| list.iter().filter(|t| t.failures > 0).map(|t| t.name.clone()).collect::<Vec<_>>();
    let bounds = failed(&ledger.bounds);
    if !bounds.is_empty() {
        return Err(CliError::BoundViolation(bounds));
    }
    let oracles = failed(&ledger.oracles);
    if !oracles.is_empty() {
        return Err(CliError::OracleMismatch(oracles.join(", ")));
    }
    Ok(())
}
