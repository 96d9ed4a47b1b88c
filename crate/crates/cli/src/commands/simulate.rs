use super::select_params;
use crate::args::SimulateArgs;
use crate::error::{invalid, CliResult};
use crate::output::{Row, Sink};
use crate::settings::Settings;
use noisy_momentum::amplification::total_amplification;
use noisy_momentum::quadratic::{NoiseModel, Spectrum};
use noisy_momentum::simulation::{simulate as run_simulation, SimConfig, DEFAULT_STEPS, DEFAULT_TRIALS};

pub const SIMULATE_SCHEMA: &str = "momentum-simulate/v1";

const COLUMNS: &[&str] = &[
    "algorithm", "noise", "sigma", "m", "L", "kappa", "n", "alpha", "beta", "gamma", "steps", "trials", "burn_in",
    "seed", "j_estimate", "j_standard_error", "j_analytic", "z_score",
];

/// `(estimate - analytic)/se`, with an exact match counted as zero even when `se` vanishes.
pub fn z_score(estimate: f64, analytic: f64, se: f64) -> f64 {
    if estimate == analytic {
        0.0
    } else {
        (estimate - analytic) / se
    }
}

pub fn simulate(s: &Settings, args: &SimulateArgs) -> CliResult<()> {
    let sim = s.file.sim.clone().unwrap_or_default();
    let config = SimConfig {
        steps: args.steps.or(sim.steps).unwrap_or(DEFAULT_STEPS),
        trials: args.trials.or(sim.trials).unwrap_or(DEFAULT_TRIALS),
        burn_in: args.burn_in.or(sim.burn_in),
        seed: s.seed.or(sim.seed).unwrap_or(0),
        ..SimConfig::default()
    };
    let eigenvalues = if args.eigenvalues.is_empty() { s.file.eigenvalues.clone().unwrap_or_default() } else { args.eigenvalues.clone() };
    let spectra = if eigenvalues.is_empty() {
        let mut out = Vec::new();
        for (m, l) in s.intervals()? {
            for n in s.dims(&[1])? {
                out.push(Spectrum::uniform(m, l, n)?);
            }
        }
        out
    } else {
        if !s.kappas.is_empty() || !s.ns.is_empty() {
            return Err(invalid("explicit eigenvalues replace --kappa and --n"));
        }
        vec![Spectrum::new(eigenvalues)?]
    };
    let model = s.noise.unwrap_or(NoiseModel::Iterate);
    let mut rows = Vec::new();
    for spectrum in &spectra {
        let sel = select_params(s, spectrum.m(), spectrum.l(), model)?;
        config.validate(spectrum.n())?;
        let analytic = total_amplification(&sel.params, spectrum)?.total;
        let result = run_simulation(&sel.params, spectrum, &config)?;
        let p = &sel.params;
        rows.push(
            Row::new()
                .set("algorithm", sel.label)
                .set("noise", model.as_str())
                .set("sigma", p.noise.sigma)
                .set("m", spectrum.m())
                .set("L", spectrum.l())
                .set("kappa", spectrum.kappa())
                .set("n", spectrum.n())
                .set("alpha", p.alpha)
                .set("beta", p.beta)
                .set("gamma", p.gamma)
                .set("steps", config.steps)
                .set("trials", config.trials)
                .set("burn_in", result.burn_in)
                .set("seed", config.seed)
                .set("j_estimate", result.j_estimate)
                .set("j_standard_error", result.j_standard_error)
                .set("j_analytic", analytic)
                .set("z_score", z_score(result.j_estimate, analytic, result.j_standard_error)),
        );
    }
    let mut sink = Sink::open(s.out.as_deref(), s.format, SIMULATE_SCHEMA, COLUMNS.iter().map(|c| c.to_string()).collect())?;
    for row in &rows {
        sink.write(row)?;
    }
    sink.finish()
}
