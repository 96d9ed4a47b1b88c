//! Steady-state variance of the error under white-noise forcing.
//!
//! Each mode with coefficients `(b, a)` inside the stability triangle
//! contributes `J(b, a) = sigma_w^2 (d + l) / (2 d h l)` to the total noise
//! amplification, where `(d, h, l)` are its distances to the triangle edges.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{unstable, Error, Result};
use crate::geometry::{class_rate, distances, in_delta, modal_spectral_radius, parameter_distances, RateCertificate};
use crate::quadratic::{modal_coefficients, AlgoParams, ModalPoint, NoiseModel, ProblemClass, Spectrum};

/// Relative tolerance applied when deciding whether a bound holds.
pub const BOUND_REL_TOL: f64 = 1e-9;

/// Relative width of the bracket returned by the one-dimensional minimizer.
pub const MINIMIZER_REL_TOL: f64 = 1e-12;

/// Modal contribution `sigma_w^2 (d + l) / (2 d h l)`.
pub fn modal_amplification(p: &ModalPoint, sigma_w: f64) -> Result<f64> {
    if !in_delta(p) {
        return Err(unstable(format!("mode (b, a) = ({}, {}) lies outside the stability triangle", p.b, p.a)));
    }
    let t = distances(p);
    Ok(sigma_w * sigma_w * (t.d + t.l) / (2.0 * t.d * t.h * t.l))
}

/// Modal contribution of eigenvalue `lambda` under `params`, with distances taken from the parameters.
pub fn modal_amplification_at(params: &AlgoParams, lambda: f64) -> Result<f64> {
    let p = modal_coefficients(params, lambda)?;
    let t = parameter_distances(params, lambda);
    if !t.all_positive() {
        return Err(unstable(format!("mode (b, a) = ({}, {}) lies outside the stability triangle", p.b, p.a)));
    }
    let sigma_w = params.sigma_w();
    Ok(sigma_w * sigma_w * (t.d + t.l) / (2.0 * t.d * t.h * t.l))
}

/// Extreme values of the modal contribution over `[m, L]` and the resulting class extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassExtremes {
    pub jhat_m: f64,
    pub jhat_l: f64,
    pub jhat_max: f64,
    pub jhat_min: f64,
    pub jhat_min_argument: f64,
    /// Largest total amplification over the class.
    pub j_max: f64,
    /// Smallest total amplification over the class.
    pub j_min: f64,
}

/// Combines endpoint and interior extremes into class extremes.
///
/// For `n >= 2` every admissible spectrum contains `m` and `L` and `n - 2` free
/// eigenvalues. A one-dimensional class cannot contain both extremes; there the
/// single eigenvalue is taken at the worse endpoint for both values.
pub fn combine_class_extremes(jhat_m: f64, jhat_l: f64, jhat_max: f64, jhat_min: f64, n: usize) -> (f64, f64) {
    if n == 1 {
        let worst = jhat_m.max(jhat_l);
        return (worst, worst);
    }
    let free = (n - 2) as f64;
    (jhat_m + jhat_l + free * jhat_max, jhat_m + jhat_l + free * jhat_min)
}

/// Golden-section search for the minimum of a convex function on `[lo, hi]`.
pub fn minimize_convex(lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= MINIMIZER_REL_TOL * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    [(lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("nonempty candidate list")
}

/// Modal and class extremes for `params` over the problem class.
pub fn class_extremes(params: &AlgoParams, class: &ProblemClass) -> Result<ClassExtremes> {
    class_rate(params, class).into_result()?;
    let jhat = |lambda: f64| modal_amplification_at(params, lambda);
    let jhat_m = jhat(class.m)?;
    let jhat_l = jhat(class.l)?;
    let (jhat_min_argument, jhat_min) = if class.l > class.m {
        // Stability at the endpoints implies stability on the whole segment.
        minimize_convex(class.m, class.l, |lambda| jhat(lambda).unwrap_or(f64::INFINITY))
    } else {
        (class.m, jhat_m)
    };
    let jhat_max = jhat_m.max(jhat_l);
    let (j_max, j_min) = combine_class_extremes(jhat_m, jhat_l, jhat_max, jhat_min, class.n);
    Ok(ClassExtremes { jhat_m, jhat_l, jhat_max, jhat_min, jhat_min_argument, j_max, j_min })
}

/// Per-mode contributions for a concrete spectrum plus class extremes for its `(m, L, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    /// Pairs `(lambda, J(lambda))`.
    pub per_mode: Vec<(f64, f64)>,
    pub total: f64,
    pub jhat_max: f64,
    pub jhat_min: f64,
    pub jhat_min_argument: f64,
    pub class_max: f64,
    pub class_min: f64,
}

pub fn total_amplification(params: &AlgoParams, spectrum: &Spectrum) -> Result<AmplificationReport> {
    let extremes = class_extremes(params, &spectrum.class())?;
    let per_mode = spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| modal_amplification_at(params, lambda).map(|j| (lambda, j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AmplificationReport {
        total: per_mode.iter().map(|(_, j)| j).sum(),
        per_mode,
        jhat_max: extremes.jhat_max,
        jhat_min: extremes.jhat_min,
        jhat_min_argument: extremes.jhat_min_argument,
        class_max: extremes.j_max,
        class_min: extremes.j_min,
    })
}

/// Steady-state variance of one mode from the discrete Lyapunov equation
/// `P = A P A' + B B'` with `A = [[0, 1], [-a, -b]]`, `B = [0, sigma_w]'`.
pub fn modal_lyapunov(p: &ModalPoint, sigma_w: f64) -> Result<f64> {
    if modal_spectral_radius(p) >= 1.0 {
        return Err(unstable(format!("mode (b, a) = ({}, {}) has spectral radius >= 1", p.b, p.a)));
    }
    let (a, b) = (p.a, p.b);
    // Unknowns (p11, p12, p22) of the symmetric solution.
    #[rustfmt::skip]
    let lhs = Matrix3::new(
        1.0, 0.0, -1.0,
        0.0, 1.0 + a, b,
        -a * a, -2.0 * a * b, 1.0 - b * b,
    );
    let rhs = Vector3::new(0.0, 0.0, sigma_w * sigma_w);
    let lu = lhs.lu();
    let singular = || Error::Unstable(format!("singular Lyapunov system at (b, a) = ({b}, {a})"));
    let mut x = lu.solve(&rhs).ok_or_else(singular)?;
    // Near the stability boundary the system is ill-conditioned; refine with a compensated residual.
    for _ in 0..2 {
        let delta = lu.solve(&lyapunov_residual(a, b, sigma_w, &x)).ok_or_else(singular)?;
        x += delta;
    }
    Ok(x[0])
}

/// Error-free `x + y = s + e`.
fn two_sum(x: f64, y: f64) -> (f64, f64) {
    let s = x + y;
    let z = s - x;
    (s, (x - (s - z)) + (y - z))
}

/// Error-free `x y = p + e`.
fn two_prod(x: f64, y: f64) -> (f64, f64) {
    let p = x * y;
    (p, x.mul_add(y, -p))
}

/// Sum of products accumulated in double-double precision.
fn compensated_dot(terms: &[(f64, f64, f64)]) -> f64 {
    let (mut hi, mut lo) = (0.0, 0.0);
    for &(x, y, z) in terms {
        // x y z with x y split exactly, then each half times z.
        let (p, e) = two_prod(x, y);
        let (q, f) = two_prod(p, z);
        let (s, g) = two_sum(hi, q);
        hi = s;
        lo += g + f + e * z;
    }
    hi + lo
}

/// `rhs - M x` for the modal Lyapunov system.
fn lyapunov_residual(a: f64, b: f64, sigma_w: f64, x: &Vector3<f64>) -> Vector3<f64> {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    Vector3::new(
        compensated_dot(&[(-1.0, 1.0, x1), (1.0, 1.0, x3)]),
        compensated_dot(&[(-1.0, 1.0, x2), (-1.0, a, x2), (-1.0, b, x3)]),
        compensated_dot(&[
            (sigma_w, sigma_w, 1.0),
            (a, a, x1),
            (2.0 * a, b, x2),
            (-1.0, 1.0, x3),
            (b, b, x3),
        ]),
    )
}

/// Total steady-state variance from per-mode Lyapunov solves.
pub fn lyapunov_oracle(params: &AlgoParams, spectrum: &Spectrum) -> Result<f64> {
    let sigma_w = params.sigma_w();
    spectrum
        .eigenvalues()
        .iter()
        .map(|&lambda| modal_lyapunov(&modal_coefficients(params, lambda)?, sigma_w))
        .sum()
}

/// Direction of an inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `lhs <= rhs`.
    Upper,
    /// `lhs >= rhs`.
    Lower,
}

macro_rules! bound_ids {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Identifiers of every checked inequality.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum BoundId { $($variant),+ }

        impl BoundId {
            pub const ALL: &'static [BoundId] = &[$(BoundId::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $(BoundId::$variant => $name),+ }
            }
        }

        impl std::str::FromStr for BoundId {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s {
                    $($name => Ok(BoundId::$variant),)+
                    other => Err(format!("unknown bound id `{other}`")),
                }
            }
        }
    };
}

bound_ids! {
    JmaxCubicUpper => "jmax-cubic-upper",
    JmaxCubicUpperGradient => "jmax-cubic-upper-gradient",
    StepsizeRate => "stepsize-rate",
    JmaxTsLower => "jmax-ts-lower",
    JminTsLower => "jmin-ts-lower",
    JmaxTsLowerSharp => "jmax-ts-lower-sharp",
    JminTsLowerSharp => "jmin-ts-lower-sharp",
    JmaxTsLowerGradient => "jmax-ts-lower-gradient",
    JminTsLowerGradient => "jmin-ts-lower-gradient",
    JmaxLinearLower => "jmax-linear-lower",
    JminLinearLower => "jmin-linear-lower",
    JhatMaxLower => "jhat-max-lower",
    JhatMinLower => "jhat-min-lower",
    HbLikeJmaxTsUpper => "hb-like-jmax-ts-upper",
    HbLikeJminTsUpper => "hb-like-jmin-ts-upper",
    HbLikeJmaxTsUpperGradient => "hb-like-jmax-ts-upper-gradient",
    HbLikeJminTsUpperGradient => "hb-like-jmin-ts-upper-gradient",
    HbLikeJmaxLinearUpper => "hb-like-jmax-linear-upper",
    HbLikeJminLinearUpper => "hb-like-jmin-linear-upper",
    NaLikeJmaxTsLower => "na-like-jmax-ts-lower",
    NaLikeJmaxTsUpper => "na-like-jmax-ts-upper",
    NaLikeJminTsLower => "na-like-jmin-ts-lower",
    NaLikeJminTsUpper => "na-like-jmin-ts-upper",
    CtJmaxTsLower => "ct-jmax-ts-lower",
    CtJminTsLower => "ct-jmin-ts-lower",
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of evaluating one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound_id: BoundId,
    pub kind: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub slack: f64,
}

impl BoundCheck {
    pub fn new(bound_id: BoundId, kind: BoundKind, lhs: f64, rhs: f64) -> Self {
        let margin = BOUND_REL_TOL * rhs.abs().max(lhs.abs());
        let satisfied = match kind {
            BoundKind::Upper => lhs <= rhs + margin,
            BoundKind::Lower => lhs >= rhs - margin,
        };
        BoundCheck { bound_id, kind, lhs, rhs, satisfied, slack: (lhs - rhs).abs() }
    }

    pub fn upper(bound_id: BoundId, lhs: f64, rhs: f64) -> Self {
        BoundCheck::new(bound_id, BoundKind::Upper, lhs, rhs)
    }

    pub fn lower(bound_id: BoundId, lhs: f64, rhs: f64) -> Self {
        BoundCheck::new(bound_id, BoundKind::Lower, lhs, rhs)
    }

    /// Slack relative to the bound value.
    pub fn relative_slack(&self) -> f64 {
        self.slack / self.rhs.abs()
    }

    /// `rhs / lhs`: how loose an upper bound is (or how tight a lower bound is).
    pub fn ratio(&self) -> f64 {
        self.rhs / self.lhs
    }

    /// The same values checked against the reversed inequality.
    pub fn flipped(&self) -> Self {
        let kind = match self.kind {
            BoundKind::Upper => BoundKind::Lower,
            BoundKind::Lower => BoundKind::Upper,
        };
        BoundCheck::new(self.bound_id, kind, self.lhs, self.rhs)
    }
}

/// Quantities shared by all bound evaluations for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundContext {
    pub class: ProblemClass,
    pub certificate: RateCertificate,
    pub extremes: ClassExtremes,
    pub sigma_w: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub noise: NoiseModel,
}

impl BoundContext {
    pub fn new(params: &AlgoParams, class: &ProblemClass) -> Result<Self> {
        let certificate = class_rate(params, class).into_result()?;
        let extremes = class_extremes(params, class)?;
        Ok(BoundContext {
            class: *class,
            certificate,
            extremes,
            sigma_w: params.sigma_w(),
            sigma: params.noise.sigma,
            alpha: params.alpha,
            noise: params.noise.model,
        })
    }

    pub fn rho(&self) -> f64 {
        self.certificate.rho
    }

    pub fn ts(&self) -> f64 {
        self.certificate.settling_time
    }

    pub fn kappa(&self) -> f64 {
        self.class.kappa()
    }

    pub fn n(&self) -> f64 {
        self.class.n as f64
    }
}

/// `alpha L <= (1 + rho)^2`.
pub fn stepsize_rate_bound(params: &AlgoParams, rho: f64, l: f64) -> BoundCheck {
    BoundCheck::upper(BoundId::StepsizeRate, params.alpha * l, (1.0 + rho).powi(2))
}

/// Every general bound that applies to `params` on the class.
pub fn verify_bounds(params: &AlgoParams, class: &ProblemClass) -> Result<Vec<BoundCheck>> {
    let ctx = BoundContext::new(params, class)?;
    Ok(general_bounds(&ctx, params))
}

/// General bounds evaluated on a prepared context.
pub fn general_bounds(ctx: &BoundContext, params: &AlgoParams) -> Vec<BoundCheck> {
    let (rho, ts, kappa, n) = (ctx.rho(), ctx.ts(), ctx.kappa(), ctx.n());
    let sw2 = ctx.sigma_w * ctx.sigma_w;
    let e = &ctx.extremes;
    let sqrt_kappa_term = 0.5 * (kappa.sqrt() + 1.0);
    let sharp = kappa * kappa / (2.0 * (1.0 + rho).powi(5));
    let mut checks = vec![
        BoundCheck::upper(
            BoundId::JmaxCubicUpper,
            e.j_max,
            sw2 * (1.0 + rho * rho) / (1.0 + rho).powi(3) * n * ts.powi(3),
        ),
        stepsize_rate_bound(params, rho, ctx.class.l),
        BoundCheck::lower(
            BoundId::JmaxTsLower,
            e.j_max * ts,
            sw2 * ((n - 1.0) * kappa * kappa / 64.0 + sqrt_kappa_term),
        ),
        BoundCheck::lower(
            BoundId::JminTsLower,
            e.j_min * ts,
            sw2 * (kappa * kappa / 64.0 + (n - 1.0) * sqrt_kappa_term),
        ),
        BoundCheck::lower(BoundId::JmaxTsLowerSharp, e.j_max * ts, sw2 * ((n - 1.0) * sharp + sqrt_kappa_term)),
        BoundCheck::lower(BoundId::JminTsLowerSharp, e.j_min * ts, sw2 * (sharp + (n - 1.0) * sqrt_kappa_term)),
        BoundCheck::lower(
            BoundId::JmaxLinearLower,
            e.j_max,
            sw2 * ((n - 1.0) * ts / (2.0 * (1.0 + rho).powi(2)) + 1.0),
        ),
        BoundCheck::lower(
            BoundId::JminLinearLower,
            e.j_min,
            sw2 * (ts / (2.0 * (1.0 + rho).powi(2)) + (n - 1.0)),
        ),
        BoundCheck::lower(BoundId::JhatMaxLower, e.jhat_max, sw2 * ts / (2.0 * (1.0 + rho).powi(2))),
        BoundCheck::lower(BoundId::JhatMinLower, e.jhat_min, sw2),
    ];
    if ctx.noise == NoiseModel::Gradient {
        let s2l2 = ctx.sigma * ctx.sigma / (ctx.class.l * ctx.class.l);
        let interior = (kappa * kappa / ts.powi(3)).max(0.25);
        checks.push(BoundCheck::upper(
            BoundId::JmaxCubicUpperGradient,
            e.j_max,
            s2l2 * (1.0 + rho) * (1.0 + rho * rho) * n * ts.powi(3),
        ));
        checks.push(BoundCheck::lower(
            BoundId::JmaxTsLowerGradient,
            e.j_max * ts,
            s2l2 * ((n - 1.0) * kappa * kappa / 4.0 + interior),
        ));
        checks.push(BoundCheck::lower(
            BoundId::JminTsLowerGradient,
            e.j_min * ts,
            s2l2 * (kappa * kappa / 4.0 + (n - 1.0) * interior),
        ));
    }
    checks
}
