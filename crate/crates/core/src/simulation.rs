//! Monte Carlo estimation of the steady-state variance and empirical settling time.
//!
//! The iteration is run mode by mode. Mode `i` of trial `k` draws its noise from
//! ChaCha8 stream `(k << 32) | i` of the configured seed, so every
//! `(trial, mode, step)` triple sees the same normal draw whatever the
//! scheduling or the set of modes simulated together.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, unstable, Error, Result};
use crate::geometry::{convergence_rate, settling_time};
use crate::quadratic::{modal_coefficients, AlgoParams, ModalPoint, Spectrum};

pub const DEFAULT_STEPS: usize = 1_000_000;
pub const DEFAULT_TRIALS: usize = 8;
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub steps: usize,
    /// Discarded leading steps; `None` uses `ceil(10 T_s)`.
    pub burn_in: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Modal state `(x_i[0], x_i[1])` per mode, flattened; `None` starts at the optimum.
    pub initial_state: Option<Vec<f64>>,
    pub divergence_cap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: DEFAULT_STEPS,
            burn_in: None,
            trials: DEFAULT_TRIALS,
            seed: 0,
            initial_state: None,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.steps == 0 || self.trials == 0 {
            return Err(domain("steps and trials must be positive"));
        }
        if let Some(burn) = self.burn_in {
            if burn >= self.steps {
                return Err(domain(format!("burn-in {burn} must be below the step count {}", self.steps)));
            }
        }
        if let Some(init) = &self.initial_state {
            if init.len() != 2 * n {
                return Err(domain(format!("initial state has length {}, expected {}", init.len(), 2 * n)));
            }
        }
        if !(self.divergence_cap > 0.0) {
            return Err(domain("divergence cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub j_estimate: f64,
    /// Standard error of the mean across trials; NaN for a single trial.
    pub j_standard_error: f64,
    /// Per-mode time averages, averaged across trials, in spectrum order.
    pub per_mode_estimates: Vec<f64>,
    pub empirical_rate: Option<f64>,
    pub burn_in: usize,
}

impl SimResult {
    /// `(estimate - reference)/standard_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.j_estimate - reference) / self.j_standard_error
    }
}

fn noise_stream(seed: u64, trial: usize, mode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 32) | mode as u64);
    rng
}

/// Time average of `x_i[t]^2` over `t in [burn_in, steps)` for one mode and trial.
pub fn simulate_mode(
    p: &ModalPoint,
    sigma_w: f64,
    initial: [f64; 2],
    steps: usize,
    burn_in: usize,
    cap: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let (a, b) = (p.a, p.b);
    let [mut x0, mut x1] = initial;
    let mut acc = 0.0;
    for t in 0..steps {
        if t >= burn_in {
            acc += x0 * x0;
        }
        let w: f64 = StandardNormal.sample(rng);
        let next = sigma_w.mul_add(w, -a * x0 - b * x1);
        x0 = x1;
        x1 = next;
        if !(x1.abs() <= cap) {
            return Err(unstable(format!("modal state exceeded {cap} at step {t}")));
        }
    }
    Ok(acc / (steps - burn_in) as f64)
}

fn resolve_burn_in(params: &AlgoParams, spectrum: &Spectrum, config: &SimConfig) -> Result<usize> {
    if let Some(burn) = config.burn_in {
        return Ok(burn);
    }
    let rho = convergence_rate(params, spectrum).rho();
    let burn = if rho < 1.0 { (10.0 * settling_time(rho)).ceil() as usize } else { 0 };
    Ok(burn.min(config.steps - 1))
}

/// Estimates the steady-state variance of the noisy iteration on `spectrum`.
pub fn simulate(params: &AlgoParams, spectrum: &Spectrum, config: &SimConfig) -> Result<SimResult> {
    let n = spectrum.n();
    config.validate(n)?;
    let burn_in = resolve_burn_in(params, spectrum, config)?;
    let modes = spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| modal_coefficients(params, lambda))
        .collect::<Result<Vec<_>>>()?;
    let sigma_w = params.sigma_w();
    let initial = |mode: usize| {
        config.initial_state.as_ref().map_or([0.0, 0.0], |s| [s[2 * mode], s[2 * mode + 1]])
    };
    let averages = (0..config.trials * n)
        .into_par_iter()
        .map(|job| {
            let (trial, mode) = (job / n, job % n);
            let mut rng = noise_stream(config.seed, trial, mode);
            simulate_mode(&modes[mode], sigma_w, initial(mode), config.steps, burn_in, config.divergence_cap, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;

    let totals: Vec<f64> = averages.chunks(n).map(|c| c.iter().sum()).collect();
    let trials = config.trials as f64;
    let mean = totals.iter().sum::<f64>() / trials;
    let standard_error = if config.trials > 1 {
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1.0);
        (var / trials).sqrt()
    } else {
        f64::NAN
    };
    let per_mode_estimates =
        (0..n).map(|mode| averages.iter().skip(mode).step_by(n).sum::<f64>() / trials).collect();
    Ok(SimResult { j_estimate: mean, j_standard_error: standard_error, per_mode_estimates, empirical_rate: None, burn_in })
}

/// First step `t` with `||psi[t]|| <= epsilon ||psi[0]||` in a noise-free run.
///
/// Noise in `params` is ignored. The start defaults to all ones in modal coordinates.
pub fn empirical_settling(params: &AlgoParams, spectrum: &Spectrum, epsilon: f64, config: &SimConfig) -> Result<usize> {
    config.validate(spectrum.n())?;
    if !(epsilon > 0.0) {
        return Err(domain(format!("accuracy must be positive, got {epsilon}")));
    }
    let modes = spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| modal_coefficients(params, lambda))
        .collect::<Result<Vec<_>>>()?;
    let mut state: Vec<[f64; 2]> = match &config.initial_state {
        Some(s) => s.chunks(2).map(|c| [c[0], c[1]]).collect(),
        None => vec![[1.0, 1.0]; modes.len()],
    };
    let norm2 = |s: &[[f64; 2]]| s.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>();
    let start = norm2(&state);
    if start == 0.0 {
        return Err(domain("initial state must be nonzero"));
    }
    let threshold = epsilon * epsilon * start;
    for t in 0..=config.steps {
        let current = norm2(&state);
        if current <= threshold {
            return Ok(t);
        }
        if !(current.sqrt() <= config.divergence_cap) {
            return Err(unstable(format!("state norm exceeded {} at step {t}", config.divergence_cap)));
        }
        for (v, p) in state.iter_mut().zip(&modes) {
            *v = [v[1], -p.a * v[0] - p.b * v[1]];
        }
    }
    Err(Error::Timeout { steps: config.steps })
}

/// Rate implied by reaching accuracy `epsilon` after `steps` iterations.
pub fn rate_from_settling(steps: usize, epsilon: f64) -> Option<f64> {
    (steps > 0).then(|| epsilon.powf(1.0 / steps as f64))
}
