mod analysis;
mod continuous;
mod simulate;
mod sweep;
mod verify;

pub use analysis::{amplify, rate};
pub use continuous::continuous;
pub use simulate::simulate;
pub use sweep::sweep;
pub use verify::verify;

use crate::error::{invalid, CliResult};
use crate::settings::{Algorithm, Settings};
use noisy_momentum::families::{family_point, FamilyPoint};
use noisy_momentum::geometry::optimal_params;
use noisy_momentum::quadratic::{AlgoParams, Noise, NoiseModel};

/// Relative tolerance for agreement between independent routes.
pub const ORACLE_TOL: f64 = 1e-10;

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Parameters selected by the settings, with a label for output.
pub struct Selected {
    pub label: &'static str,
    pub params: AlgoParams,
    pub point: Option<FamilyPoint>,
}

pub fn select_params(s: &Settings, m: f64, l: f64, model: NoiseModel) -> CliResult<Selected> {
    let noise = Noise::new(model, s.sigma)?;
    if let Some(alpha) = s.alpha {
        if s.algorithm.is_some() {
            return Err(invalid("give either --alpha/--beta/--gamma or --family, not both"));
        }
        let params = AlgoParams::with_noise(alpha, s.beta.unwrap_or(0.0), s.gamma.unwrap_or(0.0), noise)?;
        return Ok(Selected { label: "custom", params, point: None });
    }
    if s.beta.is_some() || s.gamma.is_some() {
        return Err(invalid("explicit parameters need --alpha"));
    }
    match s.algorithm {
        None => Err(invalid("give --family or explicit parameters with --alpha")),
        Some(Algorithm::Optimal(method)) => {
            if s.target.is_some() {
                return Err(invalid("rate-optimal methods take no --ts or --rho"));
            }
            let (params, _) = optimal_params(method, m, l)?;
            Ok(Selected { label: Algorithm::Optimal(method).as_str(), params: params.replace_noise(noise), point: None })
        }
        Some(Algorithm::Family(family)) => {
            let target = s.target.ok_or_else(|| invalid(format!("{family} needs --ts or --rho")))?;
            let point = family_point(family, target, m, l, noise)?;
            Ok(Selected { label: family.as_str(), params: point.params, point: Some(point) })
        }
    }
}
