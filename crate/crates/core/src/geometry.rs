//! Stability triangles in the `(b, a)` plane, spectral radii and convergence rates.
//!
//! A mode with coefficients `(b, a)` is stable iff the roots of `z^2 + b z + a`
//! lie in the open unit disk, i.e. iff `(b, a)` lies in the open triangle with
//! vertices `(-2, 1)`, `(2, 1)`, `(0, -1)`. Its roots have modulus at most `rho`
//! iff it lies in the closed triangle with vertices `(-2 rho, rho^2)`,
//! `(2 rho, rho^2)`, `(0, -rho^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadratic::{modal_coefficients, AlgoParams, ModalPoint, ProblemClass, Spectrum};

/// Discriminants smaller than this fraction of `b^2 + 4|a|` are treated as zero,
/// so that designed double roots are not inflated by rounding in `(b, a)`.
pub const DISCRIMINANT_TOL: f64 = 1e-14;

/// Absolute slack used when recording the triangle witnesses of a certificate.
pub const WITNESS_TOL: f64 = 1e-12;

/// Signed horizontal distances from `(b, a)` to the three edges of the stability triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriple {
    pub d: f64,
    pub h: f64,
    pub l: f64,
}

impl DistanceTriple {
    pub fn all_positive(&self) -> bool {
        self.d > 0.0 && self.h > 0.0 && self.l > 0.0
    }
}

/// `d = a + b + 1`, `h = 1 - a`, `l = a - b + 1`.
pub fn distances(p: &ModalPoint) -> DistanceTriple {
    DistanceTriple { d: p.a + p.b + 1.0, h: 1.0 - p.a, l: p.a - p.b + 1.0 }
}

/// Distances of the mode at `lambda` formed from the parameters:
/// `d = alpha lambda`, `h = 1 - beta + gamma alpha lambda`, `l = 2 (1 + beta) - (1 + 2 gamma) alpha lambda`.
/// Avoids the cancellation of `a + b + 1` near the stability boundary.
pub fn parameter_distances(params: &AlgoParams, lambda: f64) -> DistanceTriple {
    let step = params.alpha * lambda;
    DistanceTriple {
        d: step,
        h: params.gamma.mul_add(step, 1.0 - params.beta),
        l: (-(1.0 + 2.0 * params.gamma)).mul_add(step, 2.0 * (1.0 + params.beta)),
    }
}

/// Membership in the open stability triangle: `|b| - 1 < a < 1`.
pub fn in_delta(p: &ModalPoint) -> bool {
    p.b.abs() - 1.0 < p.a && p.a < 1.0
}

/// Open-triangle membership shrunk by `eps` on every edge.
pub fn in_delta_tol(p: &ModalPoint, eps: f64) -> bool {
    p.b.abs() - 1.0 + eps < p.a && p.a < 1.0 - eps
}

/// Membership in the closed triangle `rho (|b| - rho) <= a <= rho^2`.
pub fn in_delta_rho(p: &ModalPoint, rho: f64) -> Result<bool> {
    in_delta_rho_tol(p, rho, 0.0)
}

/// Closed-triangle membership widened by `eps` on every edge.
pub fn in_delta_rho_tol(p: &ModalPoint, rho: f64, eps: f64) -> Result<bool> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain(format!("rate must lie in (0, 1), got {rho}")));
    }
    Ok(rho * (p.b.abs() - rho) - eps <= p.a && p.a <= rho * rho + eps)
}

/// Vertices of a triangle in the `(b, a)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub x: ModalPoint,
    pub y: ModalPoint,
    pub z: ModalPoint,
}

impl Triangle {
    /// The stability triangle.
    pub fn stability() -> Self {
        Triangle::rate(1.0)
    }

    /// The triangle of points whose spectral radius is at most `rho`.
    pub fn rate(rho: f64) -> Self {
        Triangle {
            x: ModalPoint::new(-2.0 * rho, rho * rho),
            y: ModalPoint::new(2.0 * rho, rho * rho),
            z: ModalPoint::new(0.0, -rho * rho),
        }
    }
}

/// The points `(2 rho/3, -rho^2/3)` and `(-2 rho/3, -rho^2/3)` on the lower edges of
/// the rate triangle. The optimal Nesterov parameters place `L` on the first.
pub fn nesterov_edge_points(rho: f64) -> (ModalPoint, ModalPoint) {
    (
        ModalPoint::new(2.0 * rho / 3.0, -rho * rho / 3.0),
        ModalPoint::new(-2.0 * rho / 3.0, -rho * rho / 3.0),
    )
}

/// Nature of the two roots of `z^2 + b z + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenRegime {
    RealDistinct,
    Repeated,
    ComplexPair,
}

fn snapped_discriminant(p: &ModalPoint) -> f64 {
    let disc = p.b.mul_add(p.b, -4.0 * p.a);
    if disc.abs() <= DISCRIMINANT_TOL * (p.b * p.b + 4.0 * p.a.abs()) {
        0.0
    } else {
        disc
    }
}

pub fn eigen_regime(p: &ModalPoint) -> EigenRegime {
    let disc = snapped_discriminant(p);
    if disc > 0.0 {
        EigenRegime::RealDistinct
    } else if disc == 0.0 {
        EigenRegime::Repeated
    } else {
        EigenRegime::ComplexPair
    }
}

/// Largest root modulus of `z^2 + b z + a`, from the quadratic formula.
pub fn modal_spectral_radius(p: &ModalPoint) -> f64 {
    let disc = snapped_discriminant(p);
    if disc >= 0.0 {
        0.5 * (p.b.abs() + disc.sqrt())
    } else {
        p.a.sqrt()
    }
}

pub fn settling_time(rho: f64) -> f64 {
    1.0 / (1.0 - rho)
}

pub fn rate_from_settling_time(ts: f64) -> Result<f64> {
    if !(ts >= 1.0 && ts.is_finite()) {
        return Err(domain(format!("settling time must be finite and at least 1, got {ts}")));
    }
    Ok(1.0 - 1.0 / ts)
}

/// One endpoint of the spectrum together with its triangle memberships.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: ModalPoint,
    pub radius: f64,
    pub in_delta: bool,
    pub in_delta_rho: bool,
}

/// Proof that a parameter triple converges linearly with rate `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub rho: f64,
    pub settling_time: f64,
    /// Witnesses at `lambda = m` and `lambda = L`, in that order.
    pub witnesses: [Witness; 2],
}

/// Outcome of a rate computation. Instability is an ordinary result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateOutcome {
    Converges(RateCertificate),
    Unstable { rho: f64, witnesses: [Witness; 2] },
}

impl RateOutcome {
    pub fn rho(&self) -> f64 {
        match self {
            RateOutcome::Converges(c) => c.rho,
            RateOutcome::Unstable { rho, .. } => *rho,
        }
    }

    pub fn certificate(&self) -> Option<&RateCertificate> {
        match self {
            RateOutcome::Converges(c) => Some(c),
            RateOutcome::Unstable { .. } => None,
        }
    }

    pub fn into_result(self) -> Result<RateCertificate> {
        match self {
            RateOutcome::Converges(c) => Ok(c),
            RateOutcome::Unstable { rho, .. } => Err(crate::error::unstable(format!(
                "spectral radius {rho} is not below 1"
            ))),
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, RateOutcome::Converges(_))
    }
}

fn within_rate(p: &ModalPoint, rho: f64) -> bool {
    if rho <= 0.0 {
        p.b.abs() <= WITNESS_TOL && p.a.abs() <= WITNESS_TOL
    } else if rho < 1.0 {
        in_delta_rho_tol(p, rho, WITNESS_TOL).unwrap_or(false)
    } else {
        false
    }
}

/// Rate over every spectrum in `[m, l]`; only the two endpoints matter.
pub fn rate_over_interval(params: &AlgoParams, m: f64, l: f64) -> Result<RateOutcome> {
    let class = ProblemClass::new(m, l, 1)?;
    Ok(class_rate(params, &class))
}

/// Worst-case rate over the problem class.
pub fn class_rate(params: &AlgoParams, class: &ProblemClass) -> RateOutcome {
    let endpoint = |lambda: f64| {
        let point = modal_coefficients(params, lambda).expect("class eigenvalues are positive");
        (point, modal_spectral_radius(&point))
    };
    let (pm, rm) = endpoint(class.m);
    let (pl, rl) = endpoint(class.l);
    let rho = rm.max(rl);
    debug_assert!(
        !(rho < 1.0) || grid_rate(params, class.m, class.l, 64) <= rho + 1e-9,
        "interior eigenvalue beats endpoint rate"
    );
    let witness = |point: ModalPoint, radius: f64| Witness {
        point,
        radius,
        in_delta: in_delta(&point),
        in_delta_rho: within_rate(&point, rho),
    };
    let witnesses = [witness(pm, rm), witness(pl, rl)];
    if rho < 1.0 {
        RateOutcome::Converges(RateCertificate { rho, settling_time: settling_time(rho), witnesses })
    } else {
        RateOutcome::Unstable { rho, witnesses }
    }
}

/// Worst-case rate for the given spectrum. Interior eigenvalues never matter.
pub fn convergence_rate(params: &AlgoParams, spectrum: &Spectrum) -> RateOutcome {
    class_rate(params, &spectrum.class())
}

/// Maximum spectral radius over `points` evenly spaced eigenvalues in `[m, l]`.
pub fn grid_rate(params: &AlgoParams, m: f64, l: f64, points: usize) -> f64 {
    let points = points.max(2);
    (0..points)
        .map(|i| m + (l - m) * i as f64 / (points - 1) as f64)
        .filter_map(|lambda| modal_coefficients(params, lambda).ok())
        .map(|p| modal_spectral_radius(&p))
        .fold(0.0, f64::max)
}

/// Gradient descent, heavy-ball and Nesterov's method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Gd,
    Hb,
    Na,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gd, Method::Hb, Method::Na];

    /// Best achievable rate for condition number `kappa`.
    pub fn optimal_rate(self, kappa: f64) -> f64 {
        match self {
            Method::Gd => (kappa - 1.0) / (kappa + 1.0),
            Method::Hb => (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0),
            Method::Na => 1.0 - 2.0 / (3.0 * kappa + 1.0).sqrt(),
        }
    }

    /// Largest condition number for which the method can reach rate `rho`.
    pub fn max_condition_number(self, rho: f64) -> f64 {
        match self {
            Method::Gd => (1.0 + rho) / (1.0 - rho),
            Method::Hb => (1.0 + rho).powi(2) / (1.0 - rho).powi(2),
            Method::Na => (1.0 + rho) * (3.0 - rho) / (3.0 * (1.0 - rho).powi(2)),
        }
    }
}

/// Rate-optimal parameters of each method with unit iterate noise.
pub fn optimal_params(method: Method, m: f64, l: f64) -> Result<(AlgoParams, RateCertificate)> {
    let class = ProblemClass::new(m, l, 1)?;
    let kappa = class.kappa();
    let params = match method {
        Method::Gd => AlgoParams::new(2.0 / (l + m), 0.0, 0.0)?,
        Method::Hb => {
            let beta = (1.0 - 2.0 / (kappa.sqrt() + 1.0)).powi(2);
            AlgoParams::new(4.0 / (l.sqrt() + m.sqrt()).powi(2), beta, 0.0)?
        }
        Method::Na => {
            let beta = 1.0 - 4.0 / ((3.0 * kappa + 1.0).sqrt() + 2.0);
            AlgoParams::new(4.0 / (3.0 * l + m), beta, beta)?
        }
    };
    let cert = class_rate(&params, &class).into_result()?;
    Ok((params, cert))
}

/// Lower bound `(sqrt(kappa) + 1)/2` on the settling time of any two-step method.
pub fn fundamental_settling_bound(kappa: f64) -> Result<f64> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(domain(format!("condition number must be finite and at least 1, got {kappa}")));
    }
    Ok(0.5 * (kappa.sqrt() + 1.0))
}
