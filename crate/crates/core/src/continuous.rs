//! Gradient flow and accelerated gradient flow driven by white noise.
//!
//! The accelerated flow `x'' + theta x' + alpha grad f(x + gamma x') = sigma w` is written per mode as
//! `psi' = [[0, 1], [-a, -b]] psi + [0, sigma]' w` with `a = alpha lambda`,
//! `b = theta + gamma alpha lambda`; the gradient flow is the scalar system `x' = -a x + sigma w`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::amplification::{combine_class_extremes, minimize_convex, BoundCheck, BoundId};
use crate::error::{domain, unstable, Error, Result};
use crate::geometry::DISCRIMINANT_TOL;
use crate::quadratic::{ModalPoint, ProblemClass, Spectrum};

/// Parameters of the accelerated flow. `theta = 1 - beta` is the damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CTParams {
    pub theta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub sigma: f64,
}

impl CTParams {
    pub fn new(theta: f64, gamma: f64, alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain(format!("stepsize must be positive, got {alpha}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(domain(format!("noise magnitude must be nonnegative, got {sigma}")));
        }
        if !theta.is_finite() || !gamma.is_finite() {
            return Err(domain("damping and gamma must be finite"));
        }
        Ok(CTParams { theta, gamma, alpha, sigma })
    }

    /// `alpha = 1/L`, `sigma = 1`, with `theta = 1 - beta`.
    pub fn normalized(beta: f64, gamma: f64, l: f64) -> Result<Self> {
        CTParams::new(1.0 - beta, gamma, 1.0 / l, 1.0)
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.theta
    }
}

/// First-order (gradient flow) or second-order (accelerated) dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    Gfd,
    Agd,
}

/// `a = alpha lambda`, `b = theta + gamma alpha lambda`.
pub fn ct_coefficients(params: &CTParams, lambda: f64) -> Result<ModalPoint> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("eigenvalue must be positive, got {lambda}")));
    }
    let a = params.alpha * lambda;
    Ok(ModalPoint { b: params.gamma.mul_add(a, params.theta), a, lambda: Some(lambda) })
}

/// Hurwitz test `a > 0, b > 0`, or with a rate the exponential test `a >= rho (b - rho)`, `b >= 2 rho`.
pub fn ct_stability(p: &ModalPoint, rho: Option<f64>) -> bool {
    match rho {
        None => p.a > 0.0 && p.b > 0.0,
        Some(rho) => p.b >= 2.0 * rho && p.a >= rho * (p.b - rho),
    }
}

/// Vertices `(2 rho, rho^2)`, `(2 rho, 1)`, `(rho + 1/rho, 1)` of the exponential-stability triangle under `a <= 1`.
pub fn ct_triangle(rho: f64) -> Result<[ModalPoint; 3]> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(domain(format!("rate must lie in (0, 1], got {rho}")));
    }
    Ok([
        ModalPoint::new(2.0 * rho, rho * rho),
        ModalPoint::new(2.0 * rho, 1.0),
        ModalPoint::new(rho + 1.0 / rho, 1.0),
    ])
}

/// Decay rate `-max Re s` over the roots of `s^2 + b s + a` (or `a` for the gradient flow).
pub fn ct_decay_rate(p: &ModalPoint, kind: FlowKind) -> f64 {
    match kind {
        FlowKind::Gfd => p.a,
        FlowKind::Agd => {
            let disc = p.b.mul_add(p.b, -4.0 * p.a);
            if disc > DISCRIMINANT_TOL * p.b.mul_add(p.b, 4.0 * p.a.abs()) {
                0.5 * (p.b - disc.sqrt())
            } else {
                0.5 * p.b
            }
        }
    }
}

/// Exponential rate over every eigenvalue in `[m, L]`.
///
/// The exponential-stability region is an intersection of half-planes, so the
/// segment traced by `[m, L]` meets the rate test exactly when both endpoints do.
pub fn ct_rate(params: &CTParams, kind: FlowKind, m: f64, l: f64) -> Result<f64> {
    ProblemClass::new(m, l, 1)?;
    let rate = ct_decay_rate(&ct_coefficients(params, m)?, kind).min(ct_decay_rate(&ct_coefficients(params, l)?, kind));
    if rate > 0.0 {
        Ok(rate)
    } else {
        Err(unstable(format!("flow is not Hurwitz on [{m}, {l}] (rate {rate})")))
    }
}

/// Modal variance `sigma^2/(2a)` for the gradient flow and `sigma^2/(2ab)` for the accelerated flow.
pub fn ct_modal_amplification(p: &ModalPoint, kind: FlowKind, sigma: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    match kind {
        FlowKind::Gfd if p.a > 0.0 => Ok(s2 / (2.0 * p.a)),
        FlowKind::Agd if ct_stability(p, None) => Ok(s2 / (2.0 * p.a * p.b)),
        _ => Err(unstable(format!("mode (b, a) = ({}, {}) is not Hurwitz", p.b, p.a))),
    }
}

/// Total variance summed over the spectrum.
pub fn ct_total_amplification(params: &CTParams, kind: FlowKind, spectrum: &Spectrum) -> Result<f64> {
    spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| ct_modal_amplification(&ct_coefficients(params, lambda)?, kind, params.sigma))
        .sum()
}

/// Steady-state variance of one mode from `A P + P A' = -B B'`.
pub fn ct_modal_lyapunov(p: &ModalPoint, kind: FlowKind, sigma: f64) -> Result<f64> {
    let s2 = sigma * sigma;
    match kind {
        FlowKind::Gfd => {
            if p.a <= 0.0 {
                return Err(unstable(format!("scalar mode with a = {} is not Hurwitz", p.a)));
            }
            // -a P - P a = -sigma^2
            Ok(s2 / (p.a + p.a))
        }
        FlowKind::Agd => {
            if !ct_stability(p, None) {
                return Err(unstable(format!("mode (b, a) = ({}, {}) is not Hurwitz", p.b, p.a)));
            }
            let (a, b) = (p.a, p.b);
            // Unknowns (p11, p12, p22).
            #[rustfmt::skip]
            let lhs = Matrix3::new(
                0.0, 2.0, 0.0,
                -a, -b, 1.0,
                0.0, -2.0 * a, -2.0 * b,
            );
            let rhs = Vector3::new(0.0, 0.0, -s2);
            let solution = lhs
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Numerical(format!("singular Lyapunov system at (b, a) = ({b}, {a})")))?;
            Ok(solution[0])
        }
    }
}

/// Total variance from per-mode continuous Lyapunov solves.
pub fn ct_lyapunov_oracle(params: &CTParams, kind: FlowKind, spectrum: &Spectrum) -> Result<f64> {
    spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| ct_modal_lyapunov(&ct_coefficients(params, lambda)?, kind, params.sigma))
        .sum()
}

/// Optimal exponential rate `1/sqrt(kappa)` of the accelerated flow with `alpha = 1/L`, `sigma = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtOptimal {
    pub kappa: f64,
    pub l: f64,
    pub rho: f64,
}

impl CtOptimal {
    /// `beta = 1 + (v - 2)/sqrt(kappa)`, `gamma = v sqrt(kappa)` for `v in [0, 1]`.
    pub fn params_for(&self, v: f64) -> Result<CTParams> {
        if !(0.0..=1.0).contains(&v) {
            return Err(domain(format!("family parameter must lie in [0, 1], got {v}")));
        }
        let root = self.kappa.sqrt();
        CTParams::normalized(1.0 + (v - 2.0) / root, v * root, self.l)
    }

    pub fn heavy_ball(&self) -> CTParams {
        self.params_for(0.0).expect("v = 0 is admissible")
    }

    /// Requires `kappa >= 4`.
    pub fn nesterov(&self) -> Result<CTParams> {
        if self.kappa < 4.0 {
            return Err(domain(format!("the Nesterov instance requires kappa >= 4, got {}", self.kappa)));
        }
        self.params_for(nesterov_v(self.kappa))
    }
}

fn nesterov_v(kappa: f64) -> f64 {
    (kappa.sqrt() - 2.0) / (kappa - 1.0)
}

/// Optimal rate and parameter family for `[m, L] = [1/kappa, 1]` scaled to `L = l`.
pub fn ct_optimal(kappa: f64, l: f64) -> Result<CtOptimal> {
    ProblemClass::new(l / kappa, l, 1)?;
    Ok(CtOptimal { kappa, l, rho: 1.0 / kappa.sqrt() })
}

/// The three flows whose class extremes have closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CtVariant {
    Gfd,
    HeavyBall,
    Nesterov,
}

impl CtVariant {
    pub const ALL: [CtVariant; 3] = [CtVariant::Gfd, CtVariant::HeavyBall, CtVariant::Nesterov];

    pub fn as_str(self) -> &'static str {
        match self {
            CtVariant::Gfd => "gfd",
            CtVariant::HeavyBall => "agd-hb",
            CtVariant::Nesterov => "agd-na",
        }
    }

    pub fn kind(self) -> FlowKind {
        match self {
            CtVariant::Gfd => FlowKind::Gfd,
            _ => FlowKind::Agd,
        }
    }

    /// Parameters at the optimal rate with `alpha = 1/L`, `sigma = 1`.
    pub fn params(self, kappa: f64, l: f64) -> Result<CTParams> {
        let opt = ct_optimal(kappa, l)?;
        match self {
            CtVariant::Gfd => CTParams::normalized(1.0, 0.0, l),
            CtVariant::HeavyBall => Ok(opt.heavy_ball()),
            CtVariant::Nesterov => opt.nesterov(),
        }
    }
}

impl std::fmt::Display for CtVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CtVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CtVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown flow `{s}`"))
    }
}

/// Closed-form `(J_max, J_min)` at the optimal parameters (`alpha = 1/L`, `sigma = 1`).
pub fn ct_class_extremes(variant: CtVariant, kappa: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    ProblemClass::from_kappa(kappa, n)?;
    let root = kappa.sqrt();
    let (jhat_m, jhat_l) = match variant {
        CtVariant::Gfd => (kappa / 2.0, 0.5),
        CtVariant::HeavyBall => (kappa * root / 4.0, root / 4.0),
        CtVariant::Nesterov => {
            if kappa < 4.0 {
                return Err(domain(format!("the Nesterov instance requires kappa >= 4, got {kappa}")));
            }
            (kappa * root / 4.0, 0.5)
        }
    };
    // Each modal value decreases in lambda, so the endpoints are the extremes.
    Ok(combine_class_extremes(jhat_m, jhat_l, jhat_m, jhat_l, n))
}

/// Numerical class extremes for arbitrary parameters.
///
/// `1/(a b)` with `a`, `b` affine in `lambda` is convex wherever positive, so the interior minimum is a golden-section search.
pub fn ct_numerical_extremes(params: &CTParams, kind: FlowKind, class: &ProblemClass) -> Result<(f64, f64)> {
    ct_rate(params, kind, class.m, class.l)?;
    let jhat = |lambda: f64| ct_modal_amplification(&ct_coefficients(params, lambda)?, kind, params.sigma);
    let (jm, jl) = (jhat(class.m)?, jhat(class.l)?);
    let (_, jmin) = if class.l > class.m {
        minimize_convex(class.m, class.l, |lambda| jhat(lambda).unwrap_or(f64::INFINITY))
    } else {
        (class.m, jm)
    };
    Ok(combine_class_extremes(jm, jl, jm.max(jl), jmin, class.n))
}

/// Lower bounds on `J_max T_s` and `J_min T_s` for the accelerated flow, `T_s = 1/rho`.
///
/// Requires the normalization `alpha = 1/L`; the bounds scale with `sigma^2`.
pub fn ct_verify_bounds(params: &CTParams, class: &ProblemClass) -> Result<Vec<BoundCheck>> {
    if (params.alpha * class.l - 1.0).abs() > 1e-12 {
        return Err(domain(format!("bounds assume alpha = 1/L, got alpha L = {}", params.alpha * class.l)));
    }
    let rho = ct_rate(params, FlowKind::Agd, class.m, class.l)?;
    let (j_max, j_min) = ct_numerical_extremes(params, FlowKind::Agd, class)?;
    let (kappa, nf, ts) = (class.kappa(), class.n as f64, 1.0 / rho);
    let s2 = params.sigma * params.sigma;
    let tail = 1.0 / (2.0 * (1.0 + rho * rho));
    Ok(vec![
        BoundCheck::lower(BoundId::CtJmaxTsLower, j_max * ts, s2 * ((nf - 1.0) * kappa * kappa / 4.0 + tail)),
        BoundCheck::lower(BoundId::CtJminTsLower, j_min * ts, s2 * (kappa * kappa / 4.0 + (nf - 1.0) * tail)),
    ])
}

/// `(theta/c, c gamma, alpha/c^2, sigma/(c sqrt c))`: the flow observed on the time scale `c t`.
pub fn time_dilation(params: &CTParams, c: f64) -> Result<CTParams> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("dilation factor must be positive, got {c}")));
    }
    CTParams::new(params.theta / c, c * params.gamma, params.alpha / (c * c), params.sigma / (c * c.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficient_examples() {
        let hb = ct_optimal(4.0, 4.0).unwrap().heavy_ball();
        assert_eq!((hb.theta, hb.gamma), (1.0, 0.0));
        let p = ct_coefficients(&hb, 1.0).unwrap();
        assert_eq!((p.b, p.a), (1.0, 0.25));
        let flat = CTParams::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(!ct_stability(&ct_coefficients(&flat, 1.0).unwrap(), None));
    }

    #[test]
    fn stability_examples() {
        assert!(ct_stability(&ModalPoint::new(1.0, 1.0), None));
        let rho = 0.4;
        let [x, y, z] = ct_triangle(rho).unwrap();
        for v in [x, y, z] {
            assert!(ct_stability(&v, Some(rho)));
        }
        assert!(!ct_stability(&ModalPoint::new(rho + 1.0 / rho + 1e-9, 1.0), Some(rho)));
        let [x, y, z] = ct_triangle(1.0).unwrap();
        assert_eq!(x, y);
        assert_eq!(y, z);
    }

    #[test]
    fn amplification_examples() {
        assert_eq!(ct_modal_amplification(&ModalPoint::new(0.0, 1.0), FlowKind::Gfd, 1.0).unwrap(), 0.5);
        let p = ModalPoint::new(1.0, 0.25);
        assert_relative_eq!(ct_modal_amplification(&p, FlowKind::Agd, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(ct_modal_lyapunov(&p, FlowKind::Agd, 1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            ct_modal_lyapunov(&ModalPoint::new(1.0, 1.0), FlowKind::Agd, 1.0).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        assert!(ct_modal_amplification(&ModalPoint::new(-1.0, 1.0), FlowKind::Agd, 1.0).is_err());
        assert!(ct_modal_lyapunov(&ModalPoint::new(-1.0, 1.0), FlowKind::Agd, 1.0).is_err());

        let rho: f64 = 0.3;
        let [_, _, z] = ct_triangle(rho).unwrap();
        let at_z = ct_modal_amplification(&z, FlowKind::Agd, 1.0).unwrap();
        assert_relative_eq!(at_z, 1.0 / (2.0 * rho + 2.0 / rho), max_relative = 1e-15);
        // Smallest over the triangle: sample its interior.
        let [x, y, _] = ct_triangle(rho).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
            if s + t > 1.0 {
                (s, t) = (1.0 - s, 1.0 - t);
            }
            let p = ModalPoint::new(
                x.b + s * (y.b - x.b) + t * (z.b - x.b),
                x.a + s * (y.a - x.a) + t * (z.a - x.a),
            );
            assert!(ct_modal_amplification(&p, FlowKind::Agd, 1.0).unwrap() >= at_z * (1.0 - 1e-12));
        }
    }

    #[test]
    fn optimal_parameters() {
        let opt = ct_optimal(4.0, 1.0).unwrap();
        assert_eq!(opt.rho, 0.5);
        let hb = opt.heavy_ball();
        assert_eq!((hb.beta(), hb.gamma), (0.0, 0.0));
        assert_eq!(opt.nesterov().unwrap(), hb);
        assert!(ct_optimal(3.0, 1.0).unwrap().nesterov().is_err());
        for kappa in [4.0, 9.0, 100.0, 1e4] {
            let opt = ct_optimal(kappa, 2.0).unwrap();
            for v in [0.0, 0.3, nesterov_v(kappa), 1.0] {
                let p = opt.params_for(v).unwrap();
                assert_relative_eq!(ct_rate(&p, FlowKind::Agd, 2.0 / kappa, 2.0).unwrap(), opt.rho, max_relative = 1e-12);
            }
        }
        let flat = ct_optimal(1.0, 1.0).unwrap();
        assert_eq!(flat.rho, 1.0);
        let p = ct_coefficients(&flat.heavy_ball(), 1.0).unwrap();
        assert_eq!((p.b, p.a), (2.0, 1.0));
    }

    #[test]
    fn class_extreme_examples() {
        assert_eq!(ct_class_extremes(CtVariant::Gfd, 4.0, 3).unwrap().0, 4.5);
        assert_eq!(ct_class_extremes(CtVariant::HeavyBall, 4.0, 3).unwrap().0, 4.5);
        assert_eq!(ct_class_extremes(CtVariant::Nesterov, 4.0, 2).unwrap().1, 2.5);
        assert!(ct_class_extremes(CtVariant::Nesterov, 2.0, 2).is_err());
    }

    #[test]
    fn class_extremes_match_numerical_search() {
        for kappa in [4.0, 16.0, 250.0] {
            for n in [1, 2, 3, 10] {
                for variant in CtVariant::ALL {
                    let params = variant.params(kappa, 1.0).unwrap();
                    let class = ProblemClass::new(1.0 / kappa, 1.0, n).unwrap();
                    let (jmax, jmin) = ct_numerical_extremes(&params, variant.kind(), &class).unwrap();
                    let (cmax, cmin) = ct_class_extremes(variant, kappa, n).unwrap();
                    assert_relative_eq!(jmax, cmax, max_relative = 1e-12);
                    assert_relative_eq!(jmin, cmin, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn random_spectra_stay_within_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for variant in CtVariant::ALL {
            let (kappa, n) = (16.0, 5);
            let params = variant.params(kappa, 1.0).unwrap();
            let (jmax, jmin) = ct_class_extremes(variant, kappa, n).unwrap();
            for _ in 0..500 {
                let mut eig = vec![1.0 / kappa, 1.0];
                eig.extend((0..n - 2).map(|_| rng.gen_range(1.0 / kappa..1.0)));
                let j = ct_total_amplification(&params, variant.kind(), &Spectrum::new(eig).unwrap()).unwrap();
                assert!(j <= jmax * (1.0 + 1e-12) && j >= jmin * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn bounds_at_optimal_heavy_ball() {
        for kappa in [4.0, 100.0] {
            for n in [1, 2, 5] {
                let class = ProblemClass::new(1.0 / kappa, 1.0, n).unwrap();
                let checks = ct_verify_bounds(&CtVariant::HeavyBall.params(kappa, 1.0).unwrap(), &class).unwrap();
                assert!(checks.iter().all(|c| c.satisfied), "{checks:?}");
                if n == 1 {
                    assert_relative_eq!(checks[1].lhs, checks[1].rhs, max_relative = 1e-12);
                }
            }
        }
        let class = ProblemClass::new(0.25, 1.0, 2).unwrap();
        assert!(ct_verify_bounds(&CTParams::new(1.0, 0.0, 0.5, 1.0).unwrap(), &class).is_err());
    }

    #[test]
    fn random_parameters_respect_rate_limit_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for kappa in [2.0, 10.0, 100.0] {
            let class = ProblemClass::new(1.0 / kappa, 1.0, 4).unwrap();
            let mut stable = 0;
            for _ in 0..5000 {
                let beta = rng.gen_range(-1.0..1.0);
                let gamma = rng.gen_range(-1.0..(3.0 * f64::sqrt(kappa)));
                let params = CTParams::normalized(beta, gamma, 1.0).unwrap();
                let Ok(rho) = ct_rate(&params, FlowKind::Agd, class.m, class.l) else { continue };
                stable += 1;
                assert!(rho <= 1.0 / f64::sqrt(kappa) * (1.0 + 1e-12));
                assert!(ct_verify_bounds(&params, &class).unwrap().iter().all(|c| c.satisfied));
            }
            assert!(stable > 1000);
        }
    }

    #[test]
    fn dilation() {
        let p = CTParams::new(0.7, 1.3, 0.5, 2.0).unwrap();
        assert_eq!(time_dilation(&p, 1.0).unwrap(), p);
        let q = CTParams::new(0.7, 1.3, 4.0, 1.0).unwrap();
        assert_relative_eq!(time_dilation(&q, 2.0).unwrap().alpha, 1.0, max_relative = 1e-15);
        for c in [0.5, 2.0, 3.7] {
            let d = time_dilation(&p, c).unwrap();
            let (r, rd) = (
                ct_rate(&p, FlowKind::Agd, 0.1, 1.0).unwrap(),
                ct_rate(&d, FlowKind::Agd, 0.1, 1.0).unwrap(),
            );
            assert_relative_eq!(rd, r / c, max_relative = 1e-12);
        }
        assert!(time_dilation(&p, 0.0).is_err());
    }

    #[test]
    fn lyapunov_oracle_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
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
            let spectrum = Spectrum::uniform(m, m * rng.gen_range(1.0..100.0), rng.gen_range(1..6)).unwrap();
            for kind in [FlowKind::Gfd, FlowKind::Agd] {
                let (Ok(closed), Ok(oracle)) = (
                    ct_total_amplification(&params, kind, &spectrum),
                    ct_lyapunov_oracle(&params, kind, &spectrum),
                ) else {
                    continue;
                };
                assert_relative_eq!(closed, oracle, max_relative = 1e-10);
                checked += 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn stability_matches_root_real_parts(b in -3.0f64..3.0, a in -3.0f64..3.0, rho in 0.01f64..1.5) {
            let p = ModalPoint::new(b, a);
            let disc = b * b - 4.0 * a;
            let max_re = if disc >= 0.0 { 0.5 * (-b + disc.sqrt()) } else { -0.5 * b };
            prop_assert_eq!(ct_stability(&p, None), max_re < 0.0);
            let margin = (max_re + rho).abs();
            if margin > 1e-9 {
                prop_assert_eq!(ct_stability(&p, Some(rho)), max_re <= -rho);
            }
        }
    }
}
