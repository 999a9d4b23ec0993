//! Poincaré-constant lower bounds from Rayleigh quotients `Var f / E|∇f|²`,
//! and the sup-norm functionals `Var f / ‖∇f‖²_∞`.

mod dictionary;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::moments::{se_of_batch_means, summarize, SUB_BATCHES};

pub use dictionary::{builtin_dictionary, check_gradient, DictionaryOptions, GradientCheck};

/// Fewest draws accepted by [`rayleigh_quotient`].
pub const MIN_DRAWS: usize = 1000;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type SingularFn = Arc<dyn Fn(&[f64], f64) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    Linear,
    Quadratic,
    Radial,
    Other,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Quadratic => "quadratic",
            Self::Radial => "radial",
            Self::Other => "other",
        })
    }
}

/// Scalar function with gradient and an analytic bound on `sup |∇f|`.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub class: FunctionClass,
    /// `Some(i)` for the coordinate function `x ↦ x_i`.
    pub coordinate: Option<usize>,
    value: ValueFn,
    gradient: GradFn,
    /// `∞` when unbounded.
    pub grad_sup_norm: f64,
    /// False when the gradient involves a finite-difference gauge gradient.
    pub exact_gradient: bool,
    singular: Option<SingularFn>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("grad_sup_norm", &self.grad_sup_norm)
            .finish()
    }
}

impl TestFunction {
    pub fn new<V, G>(name: impl Into<String>, class: FunctionClass, value: V, gradient: G, grad_sup_norm: f64) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            class,
            coordinate: None,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            grad_sup_norm,
            exact_gradient: true,
            singular: None,
        }
    }

    /// Points within `tol` of the returned set are skipped by gradient checks.
    pub fn with_singular_set<S>(mut self, s: S) -> Self
    where
        S: Fn(&[f64], f64) -> bool + Send + Sync + 'static,
    {
        self.singular = Some(Arc::new(s));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    pub fn near_singular(&self, x: &[f64], tol: f64) -> bool {
        self.singular.as_ref().is_some_and(|s| s(x, tol))
    }

    /// `x ↦ x_i`.
    pub fn coordinate(i: usize) -> Self {
        let mut f = Self::new(
            format!("x{}", i + 1),
            FunctionClass::Linear,
            move |x| x[i],
            move |_, g| {
                g.iter_mut().for_each(|v| *v = 0.0);
                g[i] = 1.0;
            },
            1.0,
        );
        f.coordinate = Some(i);
        f
    }

    /// `x ↦ ⟨θ, x⟩`.
    pub fn linear(name: impl Into<String>, theta: Vec<f64>) -> Self {
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t = theta.clone();
        Self::new(
            name,
            FunctionClass::Linear,
            move |x| x.iter().zip(&theta).map(|(a, b)| a * b).sum(),
            move |_, g| g.copy_from_slice(&t),
            norm,
        )
    }

    /// `x ↦ x_i x_j`.
    pub fn product(i: usize, j: usize) -> Self {
        Self::new(
            format!("x{}*x{}", i + 1, j + 1),
            FunctionClass::Quadratic,
            move |x| x[i] * x[j],
            move |x, g| {
                g.iter_mut().for_each(|v| *v = 0.0);
                g[i] += x[j];
                g[j] += x[i];
            },
            f64::INFINITY,
        )
    }

    /// `x ↦ |x|² − c`.
    pub fn centered_norm_sq(c: f64) -> Self {
        Self::new(
            "|x|^2-E|x|^2",
            FunctionClass::Quadratic,
            move |x| x.iter().map(|v| v * v).sum::<f64>() - c,
            |x, g| g.iter_mut().zip(x).for_each(|(g, v)| *g = 2.0 * v),
            f64::INFINITY,
        )
    }

    /// `x ↦ sin(π x_i / (2a))`, the first odd Neumann eigenfunction of `[−a, a]`.
    pub fn sine_coordinate(i: usize, a: f64) -> Self {
        let k = std::f64::consts::FRAC_PI_2 / a;
        Self::new(
            format!("sin(pi*x{}/{})", i + 1, 2.0 * a),
            FunctionClass::Other,
            move |x| (k * x[i]).sin(),
            move |x, g| {
                g.iter_mut().for_each(|v| *v = 0.0);
                g[i] = k * (k * x[i]).cos();
            },
            k,
        )
    }

    /// `x ↦ f(x/λ)`.
    pub fn precompose_scaling(&self, lambda: f64) -> Self {
        let inner = self.clone();
        let grad_inner = self.clone();
        let scaled = |x: &[f64], lambda: f64| x.iter().map(|v| v / lambda).collect::<Vec<_>>();
        let mut f = Self::new(
            format!("{}(x/{lambda})", self.name),
            self.class,
            move |x| inner.value(&scaled(x, lambda)),
            move |x, g| {
                grad_inner.gradient(&scaled(x, lambda), g);
                g.iter_mut().for_each(|v| *v /= lambda);
            },
            self.grad_sup_norm / lambda,
        );
        f.exact_gradient = self.exact_gradient;
        f
    }
}

/// Ratio estimate with its batch-means standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    pub name: String,
    pub class: FunctionClass,
    pub value: f64,
    pub se: f64,
    pub variance: f64,
    pub mean_grad_sq: f64,
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}

/// `Var̂ f / Ê|∇f|²` with standard error from 32 sub-batches.
pub fn rayleigh_quotient(f: &TestFunction, batch: &SampleBatch) -> Result<Quotient> {
    let count = batch.count();
    if count < MIN_DRAWS {
        return Err(Error::TooFewSamples { need: MIN_DRAWS, got: count });
    }
    let mut vals = Vec::with_capacity(count);
    let mut grads = Vec::with_capacity(count);
    let mut g = vec![0.0; batch.dim()];
    for x in batch.rows() {
        vals.push(f.value(x));
        f.gradient(x, &mut g);
        grads.push(g.iter().map(|v| v * v).sum::<f64>());
    }
    let mean_grad_sq = grads.iter().sum::<f64>() / count as f64;
    if !(mean_grad_sq > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let var = variance(&vals);
    let size = count / SUB_BATCHES;
    let sub: Vec<f64> = (0..SUB_BATCHES)
        .map(|b| {
            let r = b * size..(b + 1) * size;
            let gm = grads[r.clone()].iter().sum::<f64>() / size as f64;
            variance(&vals[r]) / gm
        })
        .collect();
    Ok(Quotient {
        name: f.name.clone(),
        class: f.class,
        value: var / mean_grad_sq,
        se: se_of_batch_means(&sub),
        variance: var,
        mean_grad_sq,
    })
}

/// Comparison quantities computed from the same batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBounds {
    /// `Σ Var(X_i)`.
    pub sum_var: f64,
    /// `√Var(|X|²)`.
    pub bobkov_sqrt: f64,
    /// `E|X − EX|²`.
    pub dim_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareEstimate {
    pub dim: usize,
    pub count: usize,
    pub lower_bound: f64,
    pub se: f64,
    pub argmax_function: String,
    pub argmax_class: FunctionClass,
    /// `lower_bound · n / E|X − EX|²`.
    pub kls_ratio: f64,
    pub kls_se: f64,
    pub comparison_bounds: ComparisonBounds,
    pub quotients: Vec<Quotient>,
}

/// Best Rayleigh quotient over a dictionary that contains every coordinate function.
pub fn poincare_lower_bound(dictionary: &[TestFunction], batch: &SampleBatch) -> Result<PoincareEstimate> {
    let n = batch.dim();
    if let Some(i) = (0..n).find(|i| !dictionary.iter().any(|f| f.coordinate == Some(*i))) {
        return Err(Error::MissingCoordinate(i));
    }
    let quotients = dictionary
        .iter()
        .map(|f| rayleigh_quotient(f, batch))
        .collect::<Result<Vec<_>>>()?;
    let best = quotients
        .iter()
        .fold(&quotients[0], |b, q| if q.value > b.value { q } else { b })
        .clone();
    let summary = summarize(batch)?;
    let trace = summary.trace();
    Ok(PoincareEstimate {
        dim: n,
        count: batch.count(),
        lower_bound: best.value,
        se: best.se,
        argmax_function: best.name.clone(),
        argmax_class: best.class,
        kls_ratio: best.value * n as f64 / trace,
        kls_se: best.se * n as f64 / trace,
        comparison_bounds: ComparisonBounds {
            sum_var: trace,
            bobkov_sqrt: summary.var_norm_sq.sqrt(),
            dim_bound: trace,
        },
        quotients,
    })
}

/// `Var̂ f / ‖∇f‖²_∞`.
pub fn supnorm_quotient(f: &TestFunction, batch: &SampleBatch) -> Result<f64> {
    if !f.grad_sup_norm.is_finite() {
        return Err(Error::UnboundedGradient(f.name.clone()));
    }
    let vals: Vec<f64> = batch.rows().map(|x| f.value(x)).collect();
    let var = variance(&vals);
    if var == 0.0 {
        return Ok(0.0);
    }
    Ok(var / (f.grad_sup_norm * f.grad_sup_norm))
}

/// `Var̂ f(X₀, S) · N / ((n₀ + k²) · Ê|X|² · ‖∇f‖²_∞)`: the empirical constant
/// in the variance bound for functions of the radial coordinates.
pub fn radial_variance_functional(nu: &SampleBatch, x: &SampleBatch, n0: usize, f: &TestFunction) -> Result<f64> {
    let k = nu.dim() - n0;
    let q = supnorm_quotient(f, nu)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let big_n = x.dim() as f64;
    let second: f64 = x.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / x.count() as f64;
    Ok(q * big_n / ((n0 + k * k) as f64 * second))
}
