//! Rank-weight kernels `K: [0,1] -> R+` with `∫K = 1`.
//!
//! A kernel is stored as a truncated power series `Σ a_m x^m`. The three
//! built-ins additionally carry a closed form, which is what [`KernelSpec::eval`]
//! uses; the series is kept alongside for the constant `A = Σ |a_m| 8^m`.

use std::f64::consts::E;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for the exponential example kernel.
pub const DEFAULT_TRUNCATION: usize = 20;

const NORMALIZATION_TOL: f64 = 1e-10;
const NONNEGATIVITY_TOL: f64 = 1e-12;
const NONNEGATIVITY_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `K ≡ 1`.
    Uniform,
    /// `K(x) = 2x`.
    Linear,
    /// `K(x) = (e^{1-x} - 1) / (e - 2)`.
    PaperExample,
    /// User-supplied coefficients, evaluated as a polynomial.
    Series,
}

impl KernelForm {
    pub fn name(self) -> &'static str {
        match self {
            KernelForm::Uniform => "uniform",
            KernelForm::Linear => "linear",
            KernelForm::PaperExample => "paper_example",
            KernelForm::Series => "series",
        }
    }
}

impl fmt::Display for KernelForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    form: KernelForm,
    coefficients: Vec<f64>,
}

/// Coefficients of the Taylor expansion of `(e^{1-x} - 1)/(e - 2)` up to `x^order`.
pub fn series_of_example_kernel(order: usize) -> Vec<f64> {
    let scale = 1.0 / (E - 2.0);
    let mut coefficients = Vec::with_capacity(order + 1);
    coefficients.push((E - 1.0) * scale);
    let mut inv_factorial = 1.0;
    for r in 1..=order {
        inv_factorial /= r as f64;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        coefficients.push(E * sign * inv_factorial * scale);
    }
    coefficients
}

impl KernelSpec {
    pub fn uniform() -> Self {
        KernelSpec {
            form: KernelForm::Uniform,
            coefficients: vec![1.0],
        }
    }

    pub fn linear() -> Self {
        KernelSpec {
            form: KernelForm::Linear,
            coefficients: vec![0.0, 2.0],
        }
    }

    pub fn paper_example(order: usize) -> Self {
        KernelSpec {
            form: KernelForm::PaperExample,
            coefficients: series_of_example_kernel(order),
        }
    }

    /// A validated polynomial kernel.
    pub fn series(coefficients: Vec<f64>) -> Result<Self> {
        let spec = KernelSpec {
            form: KernelForm::Series,
            coefficients,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Resolve a kernel by its configuration name.
    pub fn from_name(
        name: &str,
        coefficients: Option<Vec<f64>>,
        truncation: Option<usize>,
    ) -> Result<Self> {
        let spec = match name {
            "uniform" => KernelSpec::uniform(),
            "linear" => KernelSpec::linear(),
            "paper_example" => KernelSpec::paper_example(truncation.unwrap_or(DEFAULT_TRUNCATION)),
            "series" => {
                let mut coefficients = coefficients.ok_or_else(|| {
                    Error::InvalidKernel("kernel `series` needs `coefficients`".into())
                })?;
                if let Some(m) = truncation {
                    coefficients.truncate(m + 1);
                }
                return KernelSpec::series(coefficients);
            }
            other => {
                return Err(Error::InvalidKernel(format!(
                    "unknown kernel name `{other}`"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn truncation_order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Checks normalization, finiteness of `A`, and pointwise nonnegativity.
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidKernel("no coefficients".into()));
        }
        if self.coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidKernel("non-finite coefficient".into()));
        }
        let residual = self.normalization_residual();
        if residual > NORMALIZATION_TOL {
            return Err(Error::InvalidKernel(format!(
                "normalization residual {residual:e} exceeds {NORMALIZATION_TOL:e}"
            )));
        }
        let a = self.compute_a();
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "constant A = {a} is not finite and positive"
            )));
        }
        for k in 0..=NONNEGATIVITY_GRID {
            let x = k as f64 / NONNEGATIVITY_GRID as f64;
            let value = self.value(x);
            if value < -NONNEGATIVITY_TOL {
                return Err(Error::InvalidKernel(format!(
                    "K({x}) = {value} is negative"
                )));
            }
        }
        Ok(())
    }

    /// `K(x)` for `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("kernel argument {x} outside [0, 1]")));
        }
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        match self.form {
            KernelForm::Uniform => 1.0,
            KernelForm::Linear => 2.0 * x,
            KernelForm::PaperExample => ((1.0 - x).exp() - 1.0) / (E - 2.0),
            KernelForm::Series => self.eval_series(x),
        }
    }

    /// Horner evaluation of the stored series, ignoring any closed form.
    pub fn eval_series(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * x + a)
    }

    /// `∫_0^x K(m) dm`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self.form {
            KernelForm::Uniform => x,
            KernelForm::Linear => x * x,
            KernelForm::PaperExample => (E - (1.0 - x).exp() - x) / (E - 2.0),
            KernelForm::Series => {
                self.coefficients
                    .iter()
                    .enumerate()
                    .rev()
                    .fold(0.0, |acc, (m, &a)| acc * x + a / (m + 1) as f64)
                    * x
            }
        }
    }

    /// `|Σ_m a_m/(m+1) - 1|` over the stored coefficients.
    pub fn normalization_residual(&self) -> f64 {
        let integral: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(m, a)| a / (m + 1) as f64)
            .sum();
        (integral - 1.0).abs()
    }

    /// `A = Σ |a_m| 8^m`; `+inf` on overflow.
    pub fn compute_a(&self) -> f64 {
        let mut power = 1.0;
        let mut total = 0.0;
        for a in &self.coefficients {
            total += a.abs() * power;
            power *= 8.0;
        }
        if !total.is_finite() {
            log::warn!("kernel constant A overflowed; Theorem-1 style bounds will be vacuous");
            return f64::INFINITY;
        }
        total
    }

    /// `Σ_{s=1}^{N-1} K(s/(N-1))`, the rank-weight denominator.
    pub fn rank_sum(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::Domain(format!("need N >= 2 particles, got {n}")));
        }
        let m = (n - 1) as f64;
        Ok((1..n).map(|s| self.value(s as f64 / m)).sum())
    }

    /// Riemann-sum error `e_K(N) = 1 - (1/(N-1)) Σ_{s=1}^{N-1} K(s/(N-1))`.
    pub fn riemann_error(&self, n: usize) -> Result<f64> {
        Ok(1.0 - self.rank_sum(n)? / (n - 1) as f64)
    }

    /// `α_N = 1 / ((N-1)(1 - e_K(N)))`.
    pub fn alpha_n(&self, n: usize) -> Result<f64> {
        let gap = 1.0 - self.riemann_error(n)?;
        if gap <= 0.0 {
            return Err(Error::DegenerateNormalizer(gap));
        }
        Ok(1.0 / ((n - 1) as f64 * gap))
    }
}
