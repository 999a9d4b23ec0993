//! Log-concave non-increasing radial profiles `ρ` and their normalization
//! against a body, giving the probability density `ρ(|x|_B)` on `ℝⁿ`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::quadrature::radial_log_moment;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProfileFamily {
    UniformCutoff { cutoff: f64 },
    Exponential { beta: f64 },
    Gaussian { sigma: f64 },
    PowerExp { p: f64, beta: f64 },
    Custom,
}

#[derive(Clone)]
enum Kind {
    Uniform { cutoff: f64 },
    Exponential { beta: f64 },
    Gaussian { sigma: f64 },
    PowerExp { p: f64, beta: f64 },
    Custom {
        log_rho: ScalarFn,
        rho_prime: Option<ScalarFn>,
        cutoff: f64,
        terminal_atom: bool,
    },
}

/// Radial profile `ρ : ℝ⁺ → ℝ⁺`, unnormalized.
#[derive(Clone)]
pub struct RadialProfile {
    kind: Kind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialProfile({:?})", self.family())
    }
}

impl RadialProfile {
    /// `ρ = 1` on `[0, cutoff]`; the law of `S` is a point mass at `cutoff`.
    pub fn uniform_cutoff(cutoff: f64) -> Result<Self> {
        positive("cutoff", cutoff)?;
        Ok(Self { kind: Kind::Uniform { cutoff } })
    }

    /// `ρ(s) = e^{−βs}`.
    pub fn exponential(beta: f64) -> Result<Self> {
        positive("beta", beta)?;
        Ok(Self { kind: Kind::Exponential { beta } })
    }

    /// `ρ(s) = e^{−s²/(2σ²)}`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self { kind: Kind::Gaussian { sigma } })
    }

    /// `ρ(s) = e^{−β sᵖ}`; log-concave only for `p ≥ 1`.
    pub fn power_exp(p: f64, beta: f64) -> Result<Self> {
        positive("p", p)?;
        positive("beta", beta)?;
        Ok(Self { kind: Kind::PowerExp { p, beta } })
    }

    /// Caller-supplied profile. `rho_prime` is required by the law of `S`.
    pub fn custom(
        log_rho: ScalarFn,
        rho_prime: Option<ScalarFn>,
        cutoff: f64,
        terminal_atom: bool,
    ) -> Result<Self> {
        positive("cutoff", cutoff)?;
        if terminal_atom && cutoff.is_infinite() {
            return Err(Error::InvalidParameter("terminal atom needs a finite cutoff".into()));
        }
        Ok(Self {
            kind: Kind::Custom { log_rho, rho_prime, cutoff, terminal_atom },
        })
    }

    pub fn family(&self) -> ProfileFamily {
        match self.kind {
            Kind::Uniform { cutoff } => ProfileFamily::UniformCutoff { cutoff },
            Kind::Exponential { beta } => ProfileFamily::Exponential { beta },
            Kind::Gaussian { sigma } => ProfileFamily::Gaussian { sigma },
            Kind::PowerExp { p, beta } => ProfileFamily::PowerExp { p, beta },
            Kind::Custom { .. } => ProfileFamily::Custom,
        }
    }

    /// Supremum of the support.
    pub fn cutoff(&self) -> f64 {
        match self.kind {
            Kind::Uniform { cutoff } | Kind::Custom { cutoff, .. } => cutoff,
            _ => f64::INFINITY,
        }
    }

    /// Whether `ρ` jumps to zero at the cutoff.
    pub fn has_terminal_atom(&self) -> bool {
        match self.kind {
            Kind::Uniform { .. } => true,
            Kind::Custom { terminal_atom, .. } => terminal_atom,
            _ => false,
        }
    }

    pub fn log_rho(&self, s: f64) -> f64 {
        if s < 0.0 {
            return f64::NEG_INFINITY;
        }
        match &self.kind {
            Kind::Uniform { cutoff } => {
                if s <= *cutoff {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Kind::Exponential { beta } => -beta * s,
            Kind::Gaussian { sigma } => -0.5 * (s / sigma).powi(2),
            Kind::PowerExp { p, beta } => -beta * s.powf(*p),
            Kind::Custom { log_rho, cutoff, .. } => {
                if s <= *cutoff {
                    log_rho(s)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.log_rho(s).exp()
    }

    /// `ρ′(s)` where defined; `None` for custom profiles without a derivative.
    /// For uniform cutoffs this is the a.e. derivative `0`; the jump is carried
    /// by [`Self::has_terminal_atom`].
    pub fn rho_prime(&self, s: f64) -> Option<f64> {
        let r = self.rho(s);
        match &self.kind {
            Kind::Uniform { .. } => Some(0.0),
            Kind::Exponential { beta } => Some(-beta * r),
            Kind::Gaussian { sigma } => Some(-s / (sigma * sigma) * r),
            Kind::PowerExp { p, beta } => Some(-beta * p * s.powf(p - 1.0) * r),
            Kind::Custom { rho_prime, cutoff, .. } => rho_prime
                .as_ref()
                .map(|d| if s <= *cutoff { d(s) } else { 0.0 }),
        }
    }

    /// Natural length scale, used to size numerical test windows.
    pub fn scale(&self) -> f64 {
        match self.kind {
            Kind::Uniform { cutoff } => cutoff,
            Kind::Exponential { beta } => 1.0 / beta,
            Kind::Gaussian { sigma } => sigma,
            Kind::PowerExp { p, beta } => beta.powf(-1.0 / p),
            Kind::Custom { cutoff, .. } => {
                if cutoff.is_finite() {
                    cutoff
                } else {
                    1.0
                }
            }
        }
    }

    /// `ln ∫₀^∞ r^{n−1} ρ(r) dr`; closed form for catalog families.
    pub fn log_radial_integral(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        Ok(match &self.kind {
            Kind::Uniform { cutoff } => nf * cutoff.ln() - nf.ln(),
            Kind::Exponential { beta } => ln_gamma(nf) - nf * beta.ln(),
            Kind::Gaussian { sigma } => (0.5 * nf - 1.0) * 2f64.ln() + nf * sigma.ln() + ln_gamma(0.5 * nf),
            Kind::PowerExp { p, beta } => ln_gamma(nf / p) - p.ln() - nf / p * beta.ln(),
            Kind::Custom { .. } => radial_log_moment(n, |r| self.log_rho(r), self.cutoff(), 1e-12)?,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

/// Body and profile with the constant making `e^{c}·ρ(|x|_B)` a probability density.
#[derive(Debug, Clone)]
pub struct NormalizedPair {
    pub body: ConvexBody,
    pub profile: RadialProfile,
    pub log_norm_const: f64,
}

impl NormalizedPair {
    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// Normalized log density at `x`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_norm_const + self.profile.log_rho(self.body.gauge(x)?))
    }
}

/// Scale `ρ` so that `n·Vol(B)·∫₀^∞ r^{n−1}ρ(r)dr = 1`.
pub fn normalize(body: &ConvexBody, profile: &RadialProfile) -> Result<NormalizedPair> {
    let n = body.dim();
    let log_radial = profile.log_radial_integral(n)?;
    if !log_radial.is_finite() {
        return Err(Error::DivergentIntegral { n });
    }
    Ok(NormalizedPair {
        body: body.clone(),
        profile: profile.clone(),
        log_norm_const: -((n as f64).ln() + body.log_volume() + log_radial),
    })
}

/// Total mass `n·Vol(B)·e^{c}·∫ r^{n−1}ρ` by numerical quadrature, bypassing
/// the closed forms used by [`normalize`].
pub fn total_mass_by_quadrature(pair: &NormalizedPair) -> Result<f64> {
    let n = pair.dim();
    let log_int = radial_log_moment(n, |r| pair.profile.log_rho(r), pair.profile.cutoff(), 1e-13)?;
    Ok(((n as f64).ln() + pair.body.log_volume() + pair.log_norm_const + log_int).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    LogConcavity,
    Monotonicity,
    Derivative,
    MissingDerivative,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileViolation {
    pub kind: ViolationKind,
    /// The offending points: `(a, b, midpoint)` for log-concavity, `(a, b)`
    /// for monotonicity, `(s,)` for derivative mismatches.
    pub points: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub log_concave: bool,
    pub monotone: bool,
    /// `None` when no derivative cross-check applies (catalog families).
    pub derivative_consistent: Option<bool>,
    pub first_violation: Option<ProfileViolation>,
}

impl ProfileReport {
    pub fn passed(&self) -> bool {
        self.log_concave && self.monotone && self.derivative_consistent != Some(false)
    }
}

const VALIDATION_TRIALS: usize = 1000;
const DERIVATIVE_POINTS: usize = 100;

/// Midpoint log-concavity, monotonicity and (for custom profiles) a
/// finite-difference check of the supplied derivative.
pub fn validate_profile(profile: &RadialProfile) -> ProfileReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd_c0ffee);
    let cutoff = profile.cutoff();
    let scale = profile.scale();
    let hi = if cutoff.is_finite() { cutoff } else { 20.0 * scale };
    let mut violation: Option<ProfileViolation> = None;
    let record = |v: ProfileViolation, violation: &mut Option<ProfileViolation>| {
        if violation.is_none() {
            *violation = Some(v);
        }
    };

    let mut log_concave = true;
    for _ in 0..VALIDATION_TRIALS {
        let a = rng.random_range(0.0..hi);
        let b = rng.random_range(0.0..hi);
        let m = 0.5 * (a + b);
        let (la, lb, lm) = (profile.log_rho(a), profile.log_rho(b), profile.log_rho(m));
        if !(la.is_finite() && lb.is_finite()) {
            continue;
        }
        let chord = 0.5 * (la + lb);
        if !(lm >= chord - 1e-9 * chord.abs().max(1.0)) {
            log_concave = false;
            record(
                ProfileViolation {
                    kind: ViolationKind::LogConcavity,
                    points: vec![a, b, m],
                    detail: format!("log ρ(mid) = {lm} below chord {chord}"),
                },
                &mut violation,
            );
            break;
        }
    }

    let mut monotone = true;
    for _ in 0..VALIDATION_TRIALS {
        let u = rng.random_range(0.0..hi);
        let v = rng.random_range(0.0..hi);
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let (la, lb) = (profile.log_rho(a), profile.log_rho(b));
        if la == f64::NEG_INFINITY {
            continue;
        }
        if lb > la + 1e-12 * la.abs().max(1.0) {
            monotone = false;
            record(
                ProfileViolation {
                    kind: ViolationKind::Monotonicity,
                    points: vec![a, b],
                    detail: format!("log ρ increases from {la} to {lb}"),
                },
                &mut violation,
            );
            break;
        }
    }

    let derivative_consistent = match &profile.kind {
        Kind::Custom { rho_prime: None, .. } => {
            record(
                ProfileViolation {
                    kind: ViolationKind::MissingDerivative,
                    points: vec![],
                    detail: "custom profiles must supply ρ′".into(),
                },
                &mut violation,
            );
            Some(false)
        }
        Kind::Custom { rho_prime: Some(_), .. } => {
            let h = 1e-6 * scale;
            let mut ok = true;
            for _ in 0..DERIVATIVE_POINTS {
                let s = rng.random_range(2.0 * h..hi - 2.0 * h);
                let fd = (profile.rho(s + h) - profile.rho(s - h)) / (2.0 * h);
                let d = profile.rho_prime(s).unwrap_or(f64::NAN);
                let tol = 1e-4 * d.abs().max(profile.rho(s) / scale);
                if !((fd - d).abs() <= tol) {
                    ok = false;
                    record(
                        ProfileViolation {
                            kind: ViolationKind::Derivative,
                            points: vec![s],
                            detail: format!("ρ′ = {d} but finite difference gives {fd}"),
                        },
                        &mut violation,
                    );
                    break;
                }
            }
            Some(ok)
        }
        _ => None,
    };

    ProfileReport {
        log_concave,
        monotone,
        derivative_consistent,
        first_violation: violation,
    }
}
