//! Acceptance criteria. Each criterion prints one PASS/FAIL line; any failure exits nonzero.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use noisy_momentum::amplification::{
    class_extremes, lyapunov_oracle, total_amplification, verify_bounds, BoundId,
};
use noisy_momentum::continuous::{
    ct_class_extremes, ct_lyapunov_oracle, ct_numerical_extremes, ct_optimal, ct_rate, ct_total_amplification,
    ct_verify_bounds, CTParams, CtVariant, FlowKind,
};
use noisy_momentum::families::{
    direct_jhat, hb_like, hb_like_direct_params, na_like, tradeoff_curve, Family, FamilyPoint,
    PointStatus, RateTarget,
};
use noisy_momentum::geometry::{class_rate, convergence_rate, optimal_params, parameter_distances, Method};
use noisy_momentum::quadratic::{AlgoParams, Noise, ProblemClass, Spectrum};
use noisy_momentum::simulation::{simulate, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Random parameters that are stable on `[m, L]` with class rate below `max_rate`.
fn random_stable(rng: &mut ChaCha8Rng, m: f64, l: f64, max_rate: f64) -> AlgoParams {
    let class = ProblemClass::new(m, l, 1).unwrap();
    loop {
        let params = AlgoParams::new(rng.gen_range(0.0..4.0 / l), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..2.0));
        let Ok(params) = params else { continue };
        if class_rate(&params, &class).rho() < max_rate {
            return params;
        }
    }
}

fn random_spectrum(rng: &mut ChaCha8Rng, m: f64, l: f64, max_n: usize) -> Spectrum {
    let n = rng.gen_range(1..=max_n);
    let mut eig = vec![m];
    if n > 1 {
        eig.push(l);
    }
    eig.extend((2..n).map(|_| rng.gen_range(m..=l)));
    Spectrum::new(eig).unwrap()
}

fn random_noise(rng: &mut ChaCha8Rng) -> Noise {
    let sigma = rng.gen_range(0.1..3.0);
    if rng.gen_bool(0.5) {
        Noise::iterate(sigma).unwrap()
    } else {
        Noise::gradient(sigma).unwrap()
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let draws = 2000;
    for _ in 0..draws {
        let kappa = 10f64.powf(rng.gen_range(0.0..3.0));
        let m = rng.gen_range(0.1..2.0);
        let params = random_stable(&mut rng, m, m * kappa, 0.999).replace_noise(random_noise(&mut rng));
        let spectrum = random_spectrum(&mut rng, m, m * kappa, 8);
        let closed = total_amplification(&params, &spectrum).map_err(|e| e.to_string())?.total;
        let oracle = lyapunov_oracle(&params, &spectrum).map_err(|e| e.to_string())?;
        worst = worst.max(rel(closed, oracle));
    }
    ensure(worst <= 1e-10, || format!("worst relative difference {worst:e}"))?;
    Ok(format!("{draws} draws, worst relative difference {worst:.2e}"))
}

fn table_rates() -> Outcome {
    let mut worst: f64 = 0.0;
    for kappa in [4.0f64, 9.0, 100.0] {
        let root = kappa.sqrt();
        let expected = [
            (Method::Gd, (kappa - 1.0) / (kappa + 1.0)),
            (Method::Hb, (root - 1.0) / (root + 1.0)),
            (Method::Na, 1.0 - 2.0 / (3.0 * kappa + 1.0).sqrt()),
        ];
        for (method, rho) in expected {
            let (params, cert) = optimal_params(method, 1.0, kappa).map_err(|e| e.to_string())?;
            let spectrum = Spectrum::uniform(1.0, kappa, 50).unwrap();
            let measured = convergence_rate(&params, &spectrum).rho();
            for value in [cert.rho, measured] {
                let err = (value - rho).abs();
                worst = worst.max(err);
                ensure(err <= 1e-12, || format!("{method:?} at kappa {kappa}: {value} vs {rho}"))?;
            }
        }
    }
    Ok(format!("9 methods x kappa, worst absolute error {worst:.2e}"))
}

fn cubic_tightness() -> Outcome {
    let find = |method: Method, kappa: f64| -> Result<_, String> {
        let params = optimal_params(method, 1.0, kappa).map_err(|e| e.to_string())?.0;
        let class = ProblemClass::new(1.0, kappa, 10).unwrap();
        verify_bounds(&params, &class)
            .map_err(|e| e.to_string())?
            .into_iter()
            .find(|c| c.bound_id == BoundId::JmaxCubicUpper)
            .ok_or_else(|| "cubic bound missing".to_string())
    };
    let mut notes = Vec::new();
    for kappa in [4.0, 100.0] {
        let check = find(Method::Hb, kappa)?;
        let slack = check.relative_slack();
        ensure(check.satisfied && slack <= 1e-9, || format!("heavy-ball kappa {kappa}: relative slack {slack:e}"))?;
        notes.push(format!("hb kappa {kappa} slack {slack:.1e}"));
    }
    let kappa: f64 = 100.0;
    let ratio = find(Method::Gd, kappa)?.ratio();
    ensure((kappa * kappa / 10.0..=10.0 * kappa * kappa).contains(&ratio), || format!("gradient ratio {ratio}"))?;
    notes.push(format!("gd kappa 100 ratio {ratio:.1} = {:.3} kappa^2", ratio / (kappa * kappa)));
    Ok(notes.join(", "))
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

fn lin_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn feasible_grid(family: Family, kappa: f64) -> Vec<f64> {
    let (lo, hi) = family.settling_range(kappa);
    match family {
        Family::NaLike => lin_grid(lo, hi, 20),
        _ => log_grid(lo, 10.0 * hi.min(kappa), 20),
    }
}

fn bound_suite() -> Outcome {
    let mut cases = Vec::new();
    for kappa in [10.0, 100.0, 1000.0] {
        for n in [1, 10, 100] {
            for noise in [Noise::iterate(1.0).unwrap(), Noise::gradient(1.0).unwrap()] {
                for family in [Family::HbLike, Family::NaLike] {
                    cases.push((kappa, n, noise, family));
                }
            }
        }
    }
    let results: Vec<Result<(usize, usize), String>> = cases
        .par_iter()
        .map(|&(kappa, n, noise, family)| {
            let class = ProblemClass::new(1.0, kappa, n).unwrap();
            let rows = tradeoff_curve(family, &class, noise, &feasible_grid(family, kappa));
            let mut count = 0;
            for row in &rows {
                if let PointStatus::Infeasible(why) = &row.status {
                    return Err(format!("{family} kappa {kappa} T_s {}: infeasible ({why})", row.t_s));
                }
                if let Some(bad) = row.violations().next() {
                    return Err(format!(
                        "{family} kappa {kappa} n {n} {:?} T_s {}: {} violated ({} vs {})",
                        noise.model, row.t_s, bad.bound_id, bad.lhs, bad.rhs
                    ));
                }
                count += row.checks.len();
            }
            Ok((rows.len(), count))
        })
        .collect();
    let (mut points, mut checks) = (0, 0);
    for r in results {
        let (p, c) = r?;
        points += p;
        checks += c;
    }
    Ok(format!("{checks} checks over {points} grid points, none violated"))
}

fn fundamental_bound() -> Outcome {
    let mut notes = Vec::new();
    for (seed, kappa) in [(5u64, 4.0f64), (6, 100.0)] {
        let class = ProblemClass::new(1.0, kappa, 1).unwrap();
        let floor = (kappa.sqrt() + 1.0) / 2.0 - 1e-9;
        let hb = optimal_params(Method::Hb, 1.0, kappa).unwrap().0;
        let stats: Vec<(usize, f64)> = (0..100u64)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + chunk);
                let mut certified = 0;
                let mut best = f64::INFINITY;
                for i in 0..1000 {
                    // Half the draws are perturbations of the heavy-ball optimum.
                    let params = if i % 2 == 0 {
                        AlgoParams::new(
                            rng.gen_range(0.0..4.0 / kappa),
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-2.0..2.0),
                        )
                    } else {
                        let s = 10f64.powf(rng.gen_range(-8.0..-1.0));
                        AlgoParams::new(
                            hb.alpha * (1.0 + s * rng.gen_range(-1.0..1.0)),
                            hb.beta + s * rng.gen_range(-1.0..1.0),
                            s * rng.gen_range(-1.0..1.0),
                        )
                    };
                    let Ok(params) = params else { continue };
                    if let Some(cert) = class_rate(&params, &class).certificate() {
                        certified += 1;
                        best = best.min(cert.settling_time);
                    }
                }
                (certified, best)
            })
            .collect();
        let certified: usize = stats.iter().map(|s| s.0).sum();
        let best = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        ensure(best >= floor, || format!("kappa {kappa}: certificate with T_s = {best} below {floor}"))?;
        notes.push(format!("kappa {kappa}: {certified} certified of 100000, best T_s {best:.9} >= {floor:.9}"));
    }
    Ok(notes.join("; "))
}

/// Relative error allowance for evaluating the modal value at `lambda` from rounded
/// parameters: one rounding of `alpha`, `beta`, `gamma` shifts each distance by about
/// `eps (2 + 2|beta| + (1 + 2|gamma|) alpha lambda)`.
fn rounding_allowance(params: &AlgoParams, lambda: f64) -> f64 {
    let t = parameter_distances(params, lambda);
    let scale = 2.0 + 2.0 * params.beta.abs() + (1.0 + 2.0 * params.gamma.abs()) * params.alpha * lambda;
    4.0 * f64::EPSILON * scale / t.d.min(t.h).min(t.l)
}

fn family_exactness() -> Outcome {
    #[derive(Default)]
    struct Tally {
        strict: f64,
        strict_count: usize,
        // Largest error divided by its rounding allowance.
        conditioned: f64,
        conditioned_count: usize,
    }
    let mut worst_params: f64 = 0.0;
    let mut tally = Tally::default();
    let mut compare = |point: &FamilyPoint| -> Result<(), String> {
        let cf = point.closed_forms.ok_or("missing closed forms")?;
        let direct = |lambda: f64| direct_jhat(point, lambda).map_err(|e| e.to_string());
        let ext = class_extremes(&point.params, &point.class(10).unwrap()).map_err(|e| e.to_string())?;
        let allow = |lambda: f64| rounding_allowance(&point.params, lambda);
        let ends = allow(point.m).max(allow(point.l));
        let pairs = [
            (cf.jhat_m, direct(point.m)?, allow(point.m)),
            (cf.jhat_l, direct(point.l)?, allow(point.l)),
            (cf.jhat_min, direct(cf.jhat_min_argument)?, allow(cf.jhat_min_argument)),
            (cf.jhat_max, ext.jhat_max, ends),
            (cf.class_max(10), ext.j_max, ends),
        ];
        for (closed, evaluated, allowance) in pairs {
            let err = rel(closed, evaluated);
            if allowance <= 1e-12 {
                tally.strict = tally.strict.max(err);
                tally.strict_count += 1;
            } else {
                tally.conditioned = tally.conditioned.max(err / allowance);
                tally.conditioned_count += 1;
            }
        }
        Ok(())
    };
    for kappa in log_grid(1.5, 1e4, 25) {
        for noise in [Noise::iterate(1.0).unwrap(), Noise::gradient(0.7).unwrap()] {
            let (hb_lo, _) = Family::HbLike.settling_range(kappa);
            for ts in log_grid(hb_lo, 20.0 * kappa, 25) {
                let point = hb_like(RateTarget::SettlingTime(ts), 1.0, kappa, noise).map_err(|e| e.to_string())?;
                let direct = hb_like_direct_params(point.rho, 1.0, kappa, noise).map_err(|e| e.to_string())?;
                worst_params = worst_params
                    .max(rel(point.params.alpha, direct.alpha))
                    .max((point.params.beta - direct.beta).abs());
                compare(&point)?;
            }
            let (na_lo, na_hi) = Family::NaLike.settling_range(kappa);
            for ts in lin_grid(na_lo, na_hi, 25) {
                compare(&na_like(RateTarget::SettlingTime(ts), 1.0, kappa, noise).map_err(|e| e.to_string())?)?;
            }
        }
    }
    ensure(worst_params <= 1e-12, || format!("parameter routes differ by {worst_params:e}"))?;
    ensure(tally.strict <= 1e-12, || format!("well-conditioned closed forms differ by {:e}", tally.strict))?;
    ensure(tally.conditioned <= 1.0, || format!("closed forms exceed the rounding allowance by {}x", tally.conditioned))?;
    Ok(format!(
        "parameter routes agree to {worst_params:.1e}; {} well-conditioned comparisons agree to {:.1e}; {} ill-conditioned ones use at most {:.2} of their rounding allowance",
        tally.strict_count, tally.strict, tally.conditioned_count, tally.conditioned
    ))
}

fn scaling_regimes() -> Outcome {
    let (kappa, n) = (100.0f64, 10usize);
    let nf = n as f64;
    let class = ProblemClass::new(1.0, kappa, n).unwrap();
    let crossover = (kappa + 1.0) / 2.0;
    let mut grid = log_grid(Family::HbLike.settling_range(kappa).0, 100.0 * kappa, 60);
    grid.push(crossover);
    let rows = tradeoff_curve(Family::HbLike, &class, Noise::iterate(1.0).unwrap(), &grid);
    let (mut early, mut late) = (0, 0);
    let (mut lo_ratio, mut hi_ratio) = (f64::INFINITY, 0.0f64);
    for row in &rows {
        let j_max = row.j_max.ok_or_else(|| format!("T_s {} infeasible", row.t_s))?;
        let ts = row.t_s;
        let tol = 1e-9;
        if ts <= crossover * (1.0 + 1e-12) {
            let (lo, hi) = (nf * kappa * (kappa + 1.0) / 64.0, nf * kappa * (kappa + 1.0) / 2.0);
            let v = j_max * ts;
            ensure(v >= lo * (1.0 - tol) && v <= hi * (1.0 + tol), || format!("T_s {ts}: J_max T_s = {v} outside [{lo}, {hi}]"))?;
            lo_ratio = lo_ratio.min(v / (nf * kappa * (kappa + 1.0)));
            early += 1;
        }
        if ts >= crossover * (1.0 - 1e-12) {
            let v = j_max / ts;
            ensure(v >= nf / 8.0 * (1.0 - tol) && v <= nf * (1.0 + tol), || format!("T_s {ts}: J_max / T_s = {v} outside [n/8, n]"))?;
            hi_ratio = hi_ratio.max(v / nf);
            late += 1;
        }
    }
    Ok(format!(
        "{early} points below the crossover (smallest J_max T_s/(n kappa (kappa+1)) = {lo_ratio:.4}), {late} above (largest J_max/(n T_s) = {hi_ratio:.4})"
    ))
}

fn continuous_time() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let params = CTParams::new(
            rng.gen_range(-1.0..3.0),
            rng.gen_range(-1.0..5.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..3.0),
        )
        .unwrap();
        let m = rng.gen_range(0.01..1.0);
        let l = m * rng.gen_range(1.0..100.0);
        let spectrum = random_spectrum(&mut rng, m, l, 8);
        let kind = if rng.gen_bool(0.5) { FlowKind::Agd } else { FlowKind::Gfd };
        let (Ok(closed), Ok(oracle)) =
            (ct_total_amplification(&params, kind, &spectrum), ct_lyapunov_oracle(&params, kind, &spectrum))
        else {
            continue;
        };
        worst = worst.max(rel(closed, oracle));
        checked += 1;
    }
    ensure(worst <= 1e-10, || format!("Lyapunov mismatch {worst:e}"))?;

    for kappa in [4.0f64, 16.0] {
        let root = kappa.sqrt();
        for n in [2usize, 3] {
            let nf = n as f64;
            let expected = [
                (CtVariant::Gfd, ((nf - 1.0) * kappa + 1.0) / 2.0, (kappa + nf - 1.0) / 2.0),
                (CtVariant::HeavyBall, ((nf - 1.0) * kappa * root + root) / 4.0, (kappa * root + (nf - 1.0) * root) / 4.0),
                (CtVariant::Nesterov, ((nf - 1.0) * kappa * root + 2.0) / 4.0, (kappa * root + 2.0 * (nf - 1.0)) / 4.0),
            ];
            for (variant, jmax, jmin) in expected {
                let closed = ct_class_extremes(variant, kappa, n).map_err(|e| e.to_string())?;
                ensure(closed == (jmax, jmin), || format!("{variant} kappa {kappa} n {n}: {closed:?} vs ({jmax}, {jmin})"))?;
                let params = variant.params(kappa, 1.0).map_err(|e| e.to_string())?;
                let class = ProblemClass::new(1.0 / kappa, 1.0, n).unwrap();
                let worst_case = Spectrum::two_point(1.0 / kappa, 1.0, n - 1, 1).unwrap();
                let best_case = Spectrum::two_point(1.0 / kappa, 1.0, 1, n - 1).unwrap();
                let numeric = ct_numerical_extremes(&params, variant.kind(), &class).map_err(|e| e.to_string())?;
                let sums = (
                    ct_total_amplification(&params, variant.kind(), &worst_case).map_err(|e| e.to_string())?,
                    ct_total_amplification(&params, variant.kind(), &best_case).map_err(|e| e.to_string())?,
                );
                for (got, want) in [(numeric.0, jmax), (sums.0, jmax), (numeric.1, jmin), (sums.1, jmin)] {
                    ensure(rel(got, want) <= 1e-12, || format!("{variant} kappa {kappa} n {n}: {got} vs {want}"))?;
                }
            }
        }
    }

    let mut swept = 0;
    let mut fastest: f64 = 0.0;
    for kappa in [2.0f64, 4.0, 16.0, 100.0] {
        let class = ProblemClass::new(1.0 / kappa, 1.0, 5).unwrap();
        let limit = ct_optimal(kappa, 1.0).unwrap().rho;
        for beta in lin_grid(-1.0, 1.0, 101) {
            for gamma in lin_grid(-0.5, 3.0 * kappa.sqrt(), 101) {
                let params = CTParams::normalized(beta, gamma, 1.0).unwrap();
                let Ok(rho) = ct_rate(&params, FlowKind::Agd, class.m, class.l) else { continue };
                fastest = fastest.max(rho / limit);
                ensure(rho <= limit * (1.0 + 1e-12), || format!("kappa {kappa}: rate {rho} above {limit}"))?;
                let checks = ct_verify_bounds(&params, &class).map_err(|e| e.to_string())?;
                if let Some(bad) = checks.iter().find(|c| !c.satisfied) {
                    return Err(format!("kappa {kappa} beta {beta} gamma {gamma}: {} violated", bad.bound_id));
                }
                swept += 1;
            }
        }
    }
    Ok(format!(
        "{checked} Lyapunov comparisons to {worst:.1e}; closed-form extremes exact; {swept} stable sweep points satisfy both bounds; best rate / (1/sqrt(kappa)) = {fastest:.12}"
    ))
}

fn monte_carlo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lines = Vec::new();
    let mut within = 0;
    let configs = 20;
    for i in 0..configs {
        let kappa = 10f64.powf(rng.gen_range(0.0..1.5));
        let m = rng.gen_range(0.5..2.0);
        let params = random_stable(&mut rng, m, m * kappa, 0.9).replace_noise(random_noise(&mut rng));
        let spectrum = random_spectrum(&mut rng, m, m * kappa, 4);
        let analytic = total_amplification(&params, &spectrum).map_err(|e| e.to_string())?.total;
        let config = SimConfig { steps: 1_000_000, trials: 8, seed: 100 + i, ..SimConfig::default() };
        let result = simulate(&params, &spectrum, &config).map_err(|e| e.to_string())?;
        let z = result.z_score(analytic);
        if z.abs() <= 3.0 {
            within += 1;
        }
        lines.push(format!("{z:+.2}"));
    }
    let summary = format!("{within}/{configs} within 3 standard errors (z: {})", lines.join(" "));
    ensure(within >= 18, || summary.clone())?;
    Ok(summary)
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "oracle equivalence", limit: Some(Duration::from_secs(5)), run: oracle_equivalence },
        Criterion { id: 2, name: "optimal rates table", limit: None, run: table_rates },
        Criterion { id: 3, name: "cubic upper bound tightness", limit: None, run: cubic_tightness },
        Criterion { id: 4, name: "bound suite", limit: Some(Duration::from_secs(60)), run: bound_suite },
        Criterion { id: 5, name: "fundamental settling bound", limit: None, run: fundamental_bound },
        Criterion { id: 6, name: "family exactness", limit: None, run: family_exactness },
        Criterion { id: 7, name: "scaling regimes", limit: None, run: scaling_regimes },
        Criterion { id: 8, name: "continuous time", limit: None, run: continuous_time },
        Criterion { id: 9, name: "monte carlo consistency", limit: Some(Duration::from_secs(120)), run: monte_carlo },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(detail), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!("runtime {elapsed:.2?} over the {limit:?} limit ({detail})"));
            }
        }
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {status} {} [{:.2?}]: {detail}", c.id, c.name, elapsed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
