//! One-parameter families that trade convergence rate for noise amplification.
//!
//! Each family is indexed by the target rate `rho` (equivalently the settling
//! time `T_s = 1/(1 - rho)`) and places the endpoints of the modal segment on
//! the boundary of the rate triangle so that the target rate is met exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplification::{
    combine_class_extremes, general_bounds, modal_amplification_at, BoundCheck, BoundContext, BoundId,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{class_rate, fundamental_settling_bound, rate_from_settling_time, settling_time};
use crate::quadratic::{AlgoParams, ModalPoint, Noise, NoiseModel, ProblemClass};

/// Tolerance used at the ends of feasible ranges.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `gamma = 0`, `beta = c rho^2`, `c in [-1, 1]`; from gradient descent (`c = 0`) to heavy-ball (`c = 1`).
    HbLike,
    /// `gamma = beta`, `c in [0, 1/2]`; from gradient descent (`c = 0`) to Nesterov (`c = 1/2`).
    NaLike,
    /// Gradient descent with stepsize `(1 + c rho)/L`.
    GdReduced,
    /// Heavy-ball with `alpha = (1 - rho)^2/m`, `beta = rho^2`.
    HbReduced,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::HbLike, Family::NaLike, Family::GdReduced, Family::HbReduced];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::HbLike => "hb-like",
            Family::NaLike => "na-like",
            Family::GdReduced => "gd-reduced",
            Family::HbReduced => "hb-reduced",
        }
    }

    /// Closed range of settling times the family can realize for condition number `kappa`.
    pub fn settling_range(self, kappa: f64) -> (f64, f64) {
        let hb = 0.5 * (kappa.sqrt() + 1.0);
        match self {
            Family::HbLike | Family::HbReduced => (hb, f64::INFINITY),
            Family::NaLike => (0.5 * (3.0 * kappa + 1.0).sqrt(), 0.5 * (kappa + 1.0)),
            Family::GdReduced => (0.5 * (kappa + 1.0), f64::INFINITY),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Requested speed, as a rate or as a settling time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateTarget {
    Rate(f64),
    SettlingTime(f64),
}

impl RateTarget {
    pub fn rho(self) -> Result<f64> {
        let rho = match self {
            RateTarget::Rate(rho) => rho,
            RateTarget::SettlingTime(ts) => rate_from_settling_time(ts)?,
        };
        if !(0.0..1.0).contains(&rho) {
            return Err(domain(format!("rate must lie in [0, 1), got {rho}")));
        }
        Ok(rho)
    }
}

/// Closed-form modal values of a family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    pub jhat_m: f64,
    pub jhat_l: f64,
    pub jhat_max: f64,
    pub jhat_min: f64,
    /// Eigenvalue where the smallest modal value is attained.
    pub jhat_min_argument: f64,
}

impl ClosedForms {
    pub fn class_max(&self, n: usize) -> f64 {
        combine_class_extremes(self.jhat_m, self.jhat_l, self.jhat_max, self.jhat_min, n).0
    }

    pub fn class_min(&self, n: usize) -> f64 {
        combine_class_extremes(self.jhat_m, self.jhat_l, self.jhat_max, self.jhat_min, n).1
    }
}

/// A member of one of the families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub family: Family,
    pub c: f64,
    pub rho: f64,
    pub m: f64,
    pub l: f64,
    pub params: AlgoParams,
    pub closed_forms: Option<ClosedForms>,
    pub diagnostics: Vec<String>,
}

impl FamilyPoint {
    pub fn settling_time(&self) -> f64 {
        settling_time(self.rho)
    }

    pub fn kappa(&self) -> f64 {
        self.l / self.m
    }

    pub fn class(&self, n: usize) -> Result<ProblemClass> {
        ProblemClass::new(self.m, self.l, n)
    }
}

fn check_interval(m: f64, l: f64) -> Result<f64> {
    Ok(ProblemClass::new(m, l, 1)?.kappa())
}

fn open_rate(rho: f64) -> Result<f64> {
    if rho > 0.0 && rho < 1.0 {
        Ok(rho)
    } else {
        Err(domain(format!("family rates must lie in (0, 1), got {rho}")))
    }
}

/// Heavy-ball-like member with rate `rho`.
pub fn hb_like(target: RateTarget, m: f64, l: f64, noise: Noise) -> Result<FamilyPoint> {
    let kappa = check_interval(m, l)?;
    let rho = open_rate(target.rho()?)?;
    let ts = settling_time(rho);
    let lower = fundamental_settling_bound(kappa)?;
    if ts < lower * (1.0 - FEASIBILITY_TOL) {
        return Err(domain(format!("settling time {ts} is below the achievable minimum {lower}")));
    }
    let q = (1.0 + rho) / (1.0 - rho);
    let c = ((kappa - q) / (rho * (kappa + q))).clamp(-1.0, 1.0);
    let params = AlgoParams::with_noise((1.0 + rho) * (1.0 + c * rho) / l, c * rho * rho, 0.0, noise)?;
    let sw2 = params.sigma_w().powi(2);
    let (cr, cr2) = (c * rho, c * rho * rho);
    let jhat_end = sw2 * (kappa + 1.0) / (2.0 * (1.0 - cr2) * (1.0 + rho) * (1.0 + cr));
    let jhat_mid = sw2 / ((1.0 + cr2) * (1.0 - cr2));
    Ok(FamilyPoint {
        family: Family::HbLike,
        c,
        rho,
        m,
        l,
        params,
        closed_forms: Some(ClosedForms {
            jhat_m: jhat_end,
            jhat_l: jhat_end,
            jhat_max: jhat_end,
            jhat_min: jhat_mid,
            jhat_min_argument: 0.5 * (m + l),
        }),
        diagnostics: Vec::new(),
    })
}

/// The heavy-ball-like triple written directly in terms of `rho`:
/// `beta = rho (kappa - q)/(kappa + q)`, `alpha = (1 + rho)(1 + beta/rho)/L`, `q = (1 + rho)/(1 - rho)`.
pub fn hb_like_direct_params(rho: f64, m: f64, l: f64, noise: Noise) -> Result<AlgoParams> {
    let kappa = check_interval(m, l)?;
    let rho = open_rate(rho)?;
    let q = (1.0 + rho) / (1.0 - rho);
    let beta = rho * (kappa - q) / (kappa + q);
    AlgoParams::with_noise((1.0 + rho) * (1.0 + beta / rho) / l, beta, 0.0, noise)
}

/// Coefficient functions describing the heavy-ball-like amplification in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbLikeProducts {
    pub q_c: f64,
    pub q_neg_c: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub p6: f64,
    pub j_max_ts: f64,
    pub j_min_ts: f64,
    pub j_max: f64,
    pub j_min: f64,
    /// `(name, value, low, high, within)` for every coefficient whose range applies to this `c`.
    pub ranges: Vec<(String, f64, f64, f64, bool)>,
}

impl HbLikeProducts {
    pub fn ranges_hold(&self) -> bool {
        self.ranges.iter().all(|r| r.4)
    }
}

/// Products `J_max T_s`, `J_min T_s` from the coefficient functions `p1..p6`.
///
/// The expressions assume `n >= 2`; for `n = 1` both values equal the endpoint contribution.
pub fn hb_like_products(point: &FamilyPoint, n: usize) -> Result<HbLikeProducts> {
    if point.family != Family::HbLike {
        return Err(domain(format!("expected a heavy-ball-like point, got {}", point.family)));
    }
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    let (c, rho, l) = (point.c, point.rho, point.l);
    let (kappa, ts, nf) = (point.kappa(), point.settling_time(), n as f64);
    let q = |c: f64| (1.0 - c * rho) / (1.0 - c * rho * rho);
    let (q_c, q_neg_c) = (q(c), q(-c));
    let p1 = q_c / (2.0 * (1.0 + rho).powi(2) * (1.0 + c * rho).powi(2));
    let p2 = q_c / ((1.0 + rho) * (1.0 + c * rho * rho) * (1.0 + c * rho));
    let p3 = q_c / (2.0 * l * l);
    let p4 = q_c * q_neg_c * (1.0 + rho) / (l * l);
    let abs_c = c.abs();
    let p5 = 1.0 / (2.0 * (1.0 + abs_c * rho) * (1.0 + abs_c * rho * rho));
    let p6 = 2.0 * (1.0 + rho) * p5 * q_neg_c;

    let sw2 = point.params.sigma_w().powi(2);
    let sigma2 = point.params.noise.sigma.powi(2);
    let (mut j_max_ts, mut j_min_ts) = match point.params.noise.model {
        NoiseModel::Iterate => (
            sw2 * p1 * nf * kappa * (kappa + 1.0),
            sw2 * kappa * (2.0 * p1 * (kappa + 1.0) + (nf - 2.0) * p2),
        ),
        NoiseModel::Gradient => (
            sigma2 * p3 * nf * kappa * (kappa + 1.0),
            sigma2 * kappa * (2.0 * p3 * (kappa + 1.0) + (nf - 2.0) * p4),
        ),
    };
    if c <= 0.0 {
        // Linear-in-T_s form; algebraically identical where both apply.
        let (jm, jn) = (
            sw2 * p5 * nf * (1.0 + 1.0 / kappa) * ts,
            sw2 * (2.0 * p5 * (1.0 + 1.0 / kappa) + p6 * (nf - 2.0) / kappa) * ts,
        );
        j_max_ts = jm * ts;
        j_min_ts = jn * ts;
    }
    if n == 1 {
        j_min_ts = j_max_ts;
    }

    let mut ranges = Vec::new();
    let mut range = |name: &str, value: f64, lo: f64, hi: f64| {
        let slack = 1e-12 * hi.abs();
        ranges.push((name.to_string(), value, lo, hi, value >= lo - slack && value <= hi + slack));
    };
    if c >= 0.0 {
        range("p1", p1, 1.0 / 64.0, 0.5);
        range("p2", p2, 1.0 / 16.0, 1.0);
    }
    range("p3", p3, 0.25 / (l * l), 1.0 / (l * l));
    range("p4", p4, 0.25 / (l * l), 4.0 / (l * l));
    if c <= 0.0 {
        range("p5", p5, 0.125, 0.5);
        range("p6", p6, 0.125, 2.0);
    }
    Ok(HbLikeProducts {
        q_c,
        q_neg_c,
        p1,
        p2,
        p3,
        p4,
        p5,
        p6,
        j_max_ts,
        j_min_ts,
        j_max: j_max_ts / ts,
        j_min: j_min_ts / ts,
        ranges,
    })
}

/// Roots of `A c^2 + B c + C = 0` via the cancellation-free formula.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

/// Nesterov-like member with rate `rho`.
pub fn na_like(target: RateTarget, m: f64, l: f64, noise: Noise) -> Result<FamilyPoint> {
    let kappa = check_interval(m, l)?;
    let rho = open_rate(target.rho()?)?;
    let ts = settling_time(rho);
    let (lo, hi) = Family::NaLike.settling_range(kappa);
    if ts < lo * (1.0 - FEASIBILITY_TOL) || ts > hi * (1.0 + FEASIBILITY_TOL) {
        return Err(domain(format!("settling time {ts} outside the feasible range [{lo}, {hi}]")));
    }
    let qa = (1.0 - rho * rho) * (1.0 - kappa);
    let qb = rho * ((1.0 + rho) - kappa * (1.0 - rho));
    let mut qc = kappa * (1.0 - rho) - (1.0 + rho);
    // Cancellation at the gradient end leaves rounding noise that would turn the double root at 0 complex.
    if qc.abs() <= 1e-12 * (kappa * (1.0 - rho) + (1.0 + rho)) {
        qc = 0.0;
    }
    let roots = quadratic_roots(qa, qb, qc);
    let mut inside: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|c| *c >= -FEASIBILITY_TOL && *c <= 0.5 + FEASIBILITY_TOL)
        .collect();
    inside.sort_by(f64::total_cmp);
    let mut diagnostics = Vec::new();
    let c = match inside.as_slice() {
        [] => {
            return Err(Error::Numerical(format!(
                "no root in [0, 1/2] for kappa = {kappa}, rho = {rho}: coefficients ({qa}, {qb}, {qc}), roots {roots:?}"
            )))
        }
        [only] => *only,
        [first, rest @ ..] => {
            diagnostics.push(format!("multiple admissible roots {inside:?}; using {first} (others {rest:?})"));
            *first
        }
    }
    .clamp(0.0, 0.5);
    let alpha = (1.0 + rho) * (1.0 + c - c * rho) / (l * (1.0 + c));
    let beta = c * rho * rho / ((alpha * l - 1.0) * (1.0 + c));
    let params = AlgoParams::with_noise(alpha, beta, beta, noise)?;

    let sw2 = params.sigma_w().powi(2);
    let r = (1.0 + c) * (1.0 - c + c * rho) / ((1.0 - c) * (1.0 + c - c * rho));
    let jhat_m = sw2 * (1.0 - c).powi(2) * (r * kappa + 1.0)
        / (2.0 * (1.0 - c - c * rho * rho) * (1.0 + rho) * (1.0 - c + c * rho));
    let jhat_l = sw2 * (1.0 + c).powi(2) * (1.0 + c - c * rho * rho)
        / ((1.0 - rho * rho) * (1.0 + c - c * rho) * (1.0 + c + c * rho) * (1.0 + c + c * rho * rho));
    Ok(FamilyPoint {
        family: Family::NaLike,
        c,
        rho,
        m,
        l,
        params,
        closed_forms: Some(ClosedForms {
            jhat_m,
            jhat_l,
            jhat_max: jhat_m,
            jhat_min: sw2,
            jhat_min_argument: 1.0 / alpha,
        }),
        diagnostics,
    })
}

/// `(1 + c)(1 - c + c rho)/((1 - c)(1 + c - c rho))`, the ratio `l(m)/d(L)` of a Nesterov-like point.
pub fn na_like_ratio(point: &FamilyPoint) -> f64 {
    let (c, rho) = (point.c, point.rho);
    (1.0 + c) * (1.0 - c + c * rho) / ((1.0 - c) * (1.0 + c - c * rho))
}

/// Gradient descent with stepsize `(1 + c rho)/L`, rate `rho = (kappa - 1)/(kappa + c)`.
pub fn gd_reduced(c: f64, m: f64, l: f64, noise: Noise) -> Result<FamilyPoint> {
    let kappa = check_interval(m, l)?;
    if !(c > -1.0 && c <= 1.0) {
        return Err(domain(format!("stepsize parameter must lie in (-1, 1], got {c}")));
    }
    let rho = (kappa - 1.0) / (kappa + c);
    let alpha = (1.0 + c * rho) / l;
    let params = AlgoParams::with_noise(alpha, 0.0, 0.0, noise)?;
    let sw2 = params.sigma_w().powi(2);
    let jhat_m = sw2 / (1.0 - rho * rho);
    let jhat_l = sw2 / (1.0 - c * c * rho * rho);
    let (jhat_min_argument, jhat_min) = if c <= 0.0 { (l, jhat_l) } else { (1.0 / alpha, sw2) };
    Ok(FamilyPoint {
        family: Family::GdReduced,
        c,
        rho,
        m,
        l,
        params,
        closed_forms: Some(ClosedForms { jhat_m, jhat_l, jhat_max: jhat_m, jhat_min, jhat_min_argument }),
        diagnostics: Vec::new(),
    })
}

/// Stepsize parameter of the reduced gradient method reaching settling time `ts`.
pub fn gd_reduced_parameter(ts: f64, kappa: f64) -> f64 {
    (kappa - ts) / (ts - 1.0)
}

/// Heavy-ball with `alpha = (1 - rho)^2/m`, `beta = rho^2`, `gamma = 0`.
pub fn hb_reduced(target: RateTarget, m: f64, l: f64, noise: Noise) -> Result<FamilyPoint> {
    let kappa = check_interval(m, l)?;
    let rho = open_rate(target.rho()?)?;
    let least = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
    if rho < least - FEASIBILITY_TOL {
        return Err(domain(format!("rate {rho} is below the heavy-ball optimum {least}")));
    }
    let alpha = (1.0 - rho).powi(2) / m;
    let params = AlgoParams::with_noise(alpha, rho * rho, 0.0, noise)?;
    let sw2 = params.sigma_w().powi(2);
    let r2 = rho * rho;
    let jhat_m = sw2 * (1.0 + r2) / ((1.0 - rho).powi(3) * (1.0 + rho).powi(3));
    let d_l = alpha * l;
    let l_l = 2.0 * (1.0 + r2) - d_l;
    let jhat_l = sw2 * (1.0 + r2) / (d_l * (1.0 - r2) * l_l);
    // The segment runs along a = rho^2 from b = -2 rho to b(L); the midline b = 0 is the minimizer.
    let b_l = d_l - 1.0 - r2;
    let (jhat_min_argument, jhat_min) =
        if b_l >= 0.0 { ((1.0 + r2) / alpha, sw2 / ((1.0 + r2) * (1.0 - r2))) } else { (l, jhat_l) };
    // c in b(L) = 2 c rho places L on the top edge.
    let c = b_l / (2.0 * rho);
    Ok(FamilyPoint {
        family: Family::HbReduced,
        c,
        rho,
        m,
        l,
        params,
        closed_forms: Some(ClosedForms { jhat_m, jhat_l, jhat_max: jhat_m, jhat_min, jhat_min_argument }),
        diagnostics: Vec::new(),
    })
}

/// `sigma^2 n kappa^2 (1 - rho^4)/(L^2 (1 + rho)^4)`: `n` copies of the contribution at `m`
/// under gradient noise. The class maximum equals it only at the heavy-ball optimum and is
/// below it otherwise, since the eigenvalue at `L` contributes less.
pub fn hb_reduced_gradient_reference(point: &FamilyPoint, n: usize) -> f64 {
    let (rho, kappa, l) = (point.rho, point.kappa(), point.l);
    point.params.noise.sigma.powi(2) * n as f64 * kappa * kappa * (1.0 - rho.powi(4))
        / (l * l * (1.0 + rho).powi(4))
}

/// Builds the family member with the requested rate.
pub fn family_point(family: Family, target: RateTarget, m: f64, l: f64, noise: Noise) -> Result<FamilyPoint> {
    match family {
        Family::HbLike => hb_like(target, m, l, noise),
        Family::NaLike => na_like(target, m, l, noise),
        Family::HbReduced => hb_reduced(target, m, l, noise),
        Family::GdReduced => {
            let kappa = check_interval(m, l)?;
            let ts = settling_time(target.rho()?);
            let (lo, _) = Family::GdReduced.settling_range(kappa);
            if ts < lo * (1.0 - FEASIBILITY_TOL) {
                return Err(domain(format!("settling time {ts} is below the gradient optimum {lo}")));
            }
            gd_reduced(gd_reduced_parameter(ts, kappa).min(1.0), m, l, noise)
        }
    }
}

/// General bounds plus the family-specific upper and lower bounds that apply to `point`.
pub fn family_bounds(point: &FamilyPoint, n: usize) -> Result<Vec<BoundCheck>> {
    let class = point.class(n)?;
    let ctx = BoundContext::new(&point.params, &class)?;
    let mut checks = general_bounds(&ctx, &point.params);
    let (kappa, ts, nf) = (ctx.kappa(), ctx.ts(), ctx.n());
    let sw2 = ctx.sigma_w * ctx.sigma_w;
    let (j_max, j_min) = (ctx.extremes.j_max, ctx.extremes.j_min);
    let gd_ts = 0.5 * (kappa + 1.0);
    match point.family {
        Family::HbLike => {
            if ts <= gd_ts * (1.0 + FEASIBILITY_TOL) {
                checks.push(BoundCheck::upper(BoundId::HbLikeJmaxTsUpper, j_max * ts, sw2 * nf * kappa * (kappa + 1.0) / 2.0));
                checks.push(BoundCheck::upper(BoundId::HbLikeJminTsUpper, j_min * ts, sw2 * kappa * (kappa + nf - 1.0)));
            }
            if ts >= gd_ts * (1.0 - FEASIBILITY_TOL) {
                checks.push(BoundCheck::upper(BoundId::HbLikeJmaxLinearUpper, j_max, sw2 * nf * ts));
                checks.push(BoundCheck::upper(
                    BoundId::HbLikeJminLinearUpper,
                    j_min,
                    2.0 * sw2 * (1.0 + (nf - 2.0) / kappa) * ts,
                ));
            }
            if ctx.noise == NoiseModel::Gradient {
                let s2l2 = ctx.sigma * ctx.sigma / (class.l * class.l);
                checks.push(BoundCheck::upper(
                    BoundId::HbLikeJmaxTsUpperGradient,
                    j_max * ts,
                    s2l2 * nf * kappa * (kappa + 1.0),
                ));
                checks.push(BoundCheck::upper(
                    BoundId::HbLikeJminTsUpperGradient,
                    j_min * ts,
                    2.0 * s2l2 * kappa * (kappa + 4.0 * nf - 7.0),
                ));
            }
        }
        Family::NaLike => {
            let root = (3.0 * kappa + 1.0).sqrt() / 2.0;
            let quad = kappa * (kappa + 1.0) / 32.0;
            let top = 6.0 * kappa * (3.0 * kappa + 1.0);
            checks.push(BoundCheck::lower(BoundId::NaLikeJmaxTsLower, j_max * ts, sw2 * ((nf - 1.0) * quad + root)));
            checks.push(BoundCheck::upper(BoundId::NaLikeJmaxTsUpper, j_max * ts, sw2 * nf * top));
            checks.push(BoundCheck::lower(BoundId::NaLikeJminTsLower, j_min * ts, sw2 * (quad + (nf - 1.0) * root)));
            checks.push(BoundCheck::upper(
                BoundId::NaLikeJminTsUpper,
                j_min * ts,
                sw2 * (top + (nf - 1.0) * (kappa + 1.0) / 2.0),
            ));
        }
        Family::GdReduced | Family::HbReduced => {}
    }
    Ok(checks)
}

/// Status of one grid point of a tradeoff curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PointStatus {
    Ok,
    Infeasible(String),
}

/// One row of a tradeoff curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t_s: f64,
    pub status: PointStatus,
    pub point: Option<FamilyPoint>,
    pub j_max: Option<f64>,
    pub j_min: Option<f64>,
    pub checks: Vec<BoundCheck>,
}

impl CurveRow {
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}

fn curve_row(family: Family, class: &ProblemClass, noise: Noise, ts: f64) -> CurveRow {
    let infeasible = |msg: String| CurveRow {
        t_s: ts,
        status: PointStatus::Infeasible(msg),
        point: None,
        j_max: None,
        j_min: None,
        checks: Vec::new(),
    };
    let point = match family_point(family, RateTarget::SettlingTime(ts), class.m, class.l, noise) {
        Ok(p) => p,
        Err(e) => return infeasible(e.to_string()),
    };
    let outcome = BoundContext::new(&point.params, class)
        .and_then(|ctx| family_bounds(&point, class.n).map(|checks| (ctx, checks)));
    match outcome {
        Ok((ctx, checks)) => CurveRow {
            t_s: ts,
            status: PointStatus::Ok,
            j_max: Some(ctx.extremes.j_max),
            j_min: Some(ctx.extremes.j_min),
            point: Some(point),
            checks,
        },
        Err(e) => infeasible(e.to_string()),
    }
}

/// Family-achieved class extremes and bound checks at every settling time of the grid.
/// Infeasible grid points are kept and marked.
pub fn tradeoff_curve(family: Family, class: &ProblemClass, noise: Noise, ts_grid: &[f64]) -> Vec<CurveRow> {
    ts_grid.par_iter().map(|&ts| curve_row(family, class, noise, ts)).collect()
}

/// Confirms that `point` attains exactly its nominal rate.
pub fn certified_rate_error(point: &FamilyPoint) -> Result<f64> {
    let class = point.class(1)?;
    let cert = class_rate(&point.params, &class).into_result()?;
    Ok((cert.rho - point.rho).abs())
}

/// Endpoint coordinates `(b(m), a(m))` and `(b(L), a(L))` of the modal segment.
pub fn endpoints(point: &FamilyPoint) -> Result<(ModalPoint, ModalPoint)> {
    Ok((point.params.modal_point(point.m)?, point.params.modal_point(point.l)?))
}

/// Modal value at `lambda` evaluated directly from the distances.
pub fn direct_jhat(point: &FamilyPoint, lambda: f64) -> Result<f64> {
    modal_amplification_at(&point.params, lambda)
}
