//! Quadratic problems, algorithm parameters and per-eigenvalue coefficients.
//!
//! The iteration under study is
//!
//! ```text
//! x[t+2] = x[t+1] + beta (x[t+1] - x[t]) - alpha grad f(x[t+1] + gamma (x[t+1] - x[t])) + sigma_w w[t]
//! ```
//!
//! on `f(x) = x'Qx/2 - q'x`. After diagonalizing `Q` every eigenvalue `lambda`
//! yields an independent second-order recursion with characteristic
//! polynomial `z^2 + b z + a`.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Where the additive noise enters the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Noise added to the iterate: `sigma_w = sigma`.
    Iterate,
    /// Noise added to the gradient: `sigma_w = alpha * sigma`.
    Gradient,
}

impl NoiseModel {
    pub const ALL: [NoiseModel; 2] = [NoiseModel::Iterate, NoiseModel::Gradient];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::Iterate => "iterate",
            NoiseModel::Gradient => "gradient",
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "iterate" => Ok(NoiseModel::Iterate),
            "gradient" => Ok(NoiseModel::Gradient),
            other => Err(format!("unknown noise model `{other}` (expected iterate or gradient)")),
        }
    }
}

/// Noise model together with the base magnitude `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub model: NoiseModel,
    pub sigma: f64,
}

impl Noise {
    pub fn new(model: NoiseModel, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(domain(format!("noise magnitude must be finite and nonnegative, got {sigma}")));
        }
        Ok(Noise { model, sigma })
    }

    pub fn iterate(sigma: f64) -> Result<Self> {
        Noise::new(NoiseModel::Iterate, sigma)
    }

    pub fn gradient(sigma: f64) -> Result<Self> {
        Noise::new(NoiseModel::Gradient, sigma)
    }
}

impl Default for Noise {
    fn default() -> Self {
        Noise { model: NoiseModel::Iterate, sigma: 1.0 }
    }
}

/// Constant parameters `(alpha, beta, gamma)` of the two-step method plus its noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub noise: Noise,
}

impl AlgoParams {
    /// Parameters with unit iterate noise.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        AlgoParams::with_noise(alpha, beta, gamma, Noise::default())
    }

    pub fn with_noise(alpha: f64, beta: f64, gamma: f64, noise: Noise) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain(format!("stepsize must be positive and finite, got {alpha}")));
        }
        if !beta.is_finite() || !gamma.is_finite() {
            return Err(domain("momentum parameters must be finite"));
        }
        Noise::new(noise.model, noise.sigma)?;
        Ok(AlgoParams { alpha, beta, gamma, noise })
    }

    /// Gradient descent with stepsize `alpha`.
    pub fn gradient_descent(alpha: f64) -> Result<Self> {
        AlgoParams::new(alpha, 0.0, 0.0)
    }

    /// Same `(alpha, beta, gamma)` with a different noise description.
    pub fn replace_noise(self, noise: Noise) -> Self {
        AlgoParams { noise, ..self }
    }

    pub fn sigma_w(&self) -> f64 {
        effective_noise_magnitude(self)
    }

    pub fn modal_point(&self, lambda: f64) -> Result<ModalPoint> {
        modal_coefficients(self, lambda)
    }
}

/// Noise magnitude that actually drives the recursion.
pub fn effective_noise_magnitude(params: &AlgoParams) -> f64 {
    match params.noise.model {
        NoiseModel::Iterate => params.noise.sigma,
        NoiseModel::Gradient => params.alpha * params.noise.sigma,
    }
}

/// Hessian eigenvalues, sorted ascending. Repeated values are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(domain("spectrum must contain at least one eigenvalue"));
        }
        if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(domain(format!("eigenvalues must be positive and finite, got {bad}")));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Spectrum { eigenvalues })
    }

    /// `n` eigenvalues evenly spaced on `[m, l]` (all equal to `m` when `n == 1`).
    pub fn uniform(m: f64, l: f64, n: usize) -> Result<Self> {
        ProblemClass::new(m, l, n)?;
        let values = match n {
            1 => vec![m],
            _ => (0..n).map(|i| m + (l - m) * i as f64 / (n - 1) as f64).collect(),
        };
        Spectrum::new(values)
    }

    /// `count_m` copies of `m` followed by `count_l` copies of `l`.
    pub fn two_point(m: f64, l: f64, count_m: usize, count_l: usize) -> Result<Self> {
        let mut values = vec![m; count_m];
        values.extend(std::iter::repeat_n(l, count_l));
        Spectrum::new(values)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn m(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn l(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn kappa(&self) -> f64 {
        self.l() / self.m()
    }

    pub fn class(&self) -> ProblemClass {
        ProblemClass { m: self.m(), l: self.l(), n: self.n() }
    }
}

/// All quadratics of dimension `n` whose Hessian spectrum lies in `[m, l]`
/// and contains both `m` and `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemClass {
    pub m: f64,
    pub l: f64,
    pub n: usize,
}

impl ProblemClass {
    pub fn new(m: f64, l: f64, n: usize) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && l.is_finite()) {
            return Err(domain(format!("need 0 < m and finite L, got m = {m}, L = {l}")));
        }
        if l < m {
            return Err(domain(format!("need m <= L, got m = {m}, L = {l}")));
        }
        if n == 0 {
            return Err(domain("dimension must be positive"));
        }
        Ok(ProblemClass { m, l, n })
    }

    /// Class with `m = 1` and `L = kappa`.
    pub fn from_kappa(kappa: f64, n: usize) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(domain(format!("condition number must be at least 1, got {kappa}")));
        }
        ProblemClass::new(1.0, kappa, n)
    }

    pub fn kappa(&self) -> f64 {
        self.l / self.m
    }
}

/// `f(x) = x'Qx/2 - q'x` with diagonal `Q` given by its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    spectrum: Spectrum,
    linear_term: DVector<f64>,
}

impl QuadraticProblem {
    pub fn new(spectrum: Spectrum) -> Self {
        let n = spectrum.n();
        QuadraticProblem { spectrum, linear_term: DVector::zeros(n) }
    }

    pub fn with_linear_term(spectrum: Spectrum, q: Vec<f64>) -> Result<Self> {
        if q.len() != spectrum.n() {
            return Err(domain(format!("linear term has length {}, expected {}", q.len(), spectrum.n())));
        }
        Ok(QuadraticProblem { spectrum, linear_term: DVector::from_vec(q) })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn linear_term(&self) -> &DVector<f64> {
        &self.linear_term
    }

    pub fn hessian(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(self.spectrum.eigenvalues()))
    }

    /// Solution of `Q x = q`.
    pub fn minimizer(&self) -> DVector<f64> {
        self.linear_term
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(q, l)| q / l)
            .collect::<Vec<_>>()
            .into()
    }
}

/// Coordinates `(b, a)` of `z^2 + b z + a` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalPoint {
    pub b: f64,
    pub a: f64,
    pub lambda: Option<f64>,
}

impl ModalPoint {
    pub fn new(b: f64, a: f64) -> Self {
        ModalPoint { b, a, lambda: None }
    }

    /// Companion block `[[0, 1], [-a, -b]]`.
    pub fn companion(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, -self.a, -self.b)
    }
}

/// `a = beta - gamma alpha lambda`, `b = (1 + gamma) alpha lambda - (1 + beta)`.
pub fn modal_coefficients(params: &AlgoParams, lambda: f64) -> Result<ModalPoint> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!("eigenvalue must be positive and finite, got {lambda}")));
    }
    let al = params.alpha * lambda;
    Ok(ModalPoint {
        b: (1.0 + params.gamma) * al - (1.0 + params.beta),
        a: params.beta - params.gamma * al,
        lambda: Some(lambda),
    })
}

/// State-space matrices of the full `2n`-dimensional iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

/// Builds `A = [[0, I], [-beta I + gamma alpha Q, (1 + beta) I - (1 + gamma) alpha Q]]`,
/// `B = [0; sigma_w I]` and `C = [I 0]` for state `[x[t] - x*; x[t+1] - x*]`.
pub fn build_system_matrices(params: &AlgoParams, problem: &QuadraticProblem) -> SystemMatrices {
    let n = problem.spectrum().n();
    let q = problem.hessian();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&eye);
    a.view_mut((n, 0), (n, n))
        .copy_from(&(&eye * -params.beta + &q * (params.gamma * params.alpha)));
    a.view_mut((n, n), (n, n))
        .copy_from(&(&eye * (1.0 + params.beta) - &q * ((1.0 + params.gamma) * params.alpha)));
    let mut b = DMatrix::<f64>::zeros(2 * n, n);
    b.view_mut((n, 0), (n, n)).copy_from(&(&eye * params.sigma_w()));
    let mut c = DMatrix::<f64>::zeros(n, 2 * n);
    c.view_mut((0, 0), (n, n)).copy_from(&eye);
    SystemMatrices { a, b, c }
}
