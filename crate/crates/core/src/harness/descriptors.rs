//! Body and profile descriptors: JSON objects and CLI short forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dilate, make_hypercube, make_lp_ball, make_revolution, make_simplex, ConvexBody, RadiusProfile, RevolutionBody};
use crate::profiles::RadialProfile;

/// Exponent of an ℓᵖ ball; `"inf"` in JSON for the cube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(InfName),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfName {
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Named(_) => f64::INFINITY,
        }
    }
}

/// Radius function from the built-in catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum RadiusSpec {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    Semicircle { radius: f64 },
    TruncatedParabola { height: f64, curvature: f64 },
}

impl RadiusSpec {
    pub fn build(self) -> RadiusProfile {
        match self {
            Self::Constant { value } => RadiusProfile::Constant { value },
            Self::Linear { intercept, slope } => RadiusProfile::Linear { intercept, slope },
            Self::Semicircle { radius } => RadiusProfile::Semicircle { radius },
            Self::TruncatedParabola { height, curvature } => RadiusProfile::TruncatedParabola { height, curvature },
        }
    }
}

fn default_one() -> f64 {
    1.0
}

/// Body descriptor. `n` is optional; when absent the experiment's `dims` apply.
/// For revolution bodies `n` is the total dimension `1 + dim(base)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum BodySpec {
    Lp {
        p: Exponent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default = "default_one")]
        lambda: f64,
    },
    Hypercube {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default = "default_one")]
        lambda: f64,
    },
    Simplex {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    /// Cone over a Euclidean ball, with `t` centred at the barycenter.
    Cone {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    /// `[−1, 1]` times a Euclidean ball.
    Cylinder {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    /// General body of revolution over a Euclidean ball.
    Revolution {
        radius: RadiusSpec,
        t_lo: f64,
        t_hi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

/// A body built from a descriptor at a given dimension.
#[derive(Debug, Clone)]
pub enum BuiltBody {
    /// Carries a B-symmetric family of measures.
    Gauge(ConvexBody),
    /// Uniform measure on a body of revolution.
    Revolution(RevolutionBody),
}

impl BuiltBody {
    pub fn dim(&self) -> usize {
        match self {
            Self::Gauge(b) => b.dim(),
            Self::Revolution(k) => k.total_dim(),
        }
    }
}

impl BodySpec {
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Self::Lp { n, .. }
            | Self::Hypercube { n, .. }
            | Self::Simplex { n }
            | Self::Cone { n }
            | Self::Cylinder { n }
            | Self::Revolution { n, .. } => *n,
        }
    }

    pub fn is_revolution(&self) -> bool {
        matches!(self, Self::Cone { .. } | Self::Cylinder { .. } | Self::Revolution { .. })
    }

    /// Dimensions to run: the descriptor's own `n`, else `dims`.
    pub fn dims(&self, dims: &[usize]) -> Vec<usize> {
        match self.fixed_dim() {
            Some(n) => vec![n],
            None => dims.to_vec(),
        }
    }

    pub fn build(&self, n: usize) -> Result<BuiltBody> {
        let scaled = |b: ConvexBody, lambda: f64| dilate(&b, lambda).map(BuiltBody::Gauge);
        match *self {
            Self::Lp { p, lambda, .. } => scaled(make_lp_ball(n, p.value())?, lambda),
            Self::Hypercube { lambda, .. } => scaled(make_hypercube(n)?, lambda),
            Self::Simplex { .. } => Ok(BuiltBody::Gauge(make_simplex(n)?)),
            Self::Cone { .. } => {
                let nb = base_dim(n)?;
                // barycenter of t is 1/(nb+2) for R(t) = 1 − t on [0, 1]
                let shift = 1.0 / (nb as f64 + 2.0);
                revolution(nb, -shift, 1.0 - shift, RadiusSpec::Linear { intercept: 1.0 - shift, slope: -1.0 })
            }
            Self::Cylinder { .. } => revolution(base_dim(n)?, -1.0, 1.0, RadiusSpec::Constant { value: 1.0 }),
            Self::Revolution { radius, t_lo, t_hi, .. } => revolution(base_dim(n)?, t_lo, t_hi, radius),
        }
    }
}

fn base_dim(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Descriptor(format!("body of revolution needs total dimension ≥ 2, got {n}")));
    }
    Ok(n - 1)
}

fn revolution(nb: usize, lo: f64, hi: f64, radius: RadiusSpec) -> Result<BuiltBody> {
    Ok(BuiltBody::Revolution(make_revolution(lo, hi, radius.build(), make_lp_ball(nb, 2.0)?)?))
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lam = |l: f64| if l == 1.0 { String::new() } else { format!(":{l}") };
        match self {
            Self::Lp { p, lambda, .. } => match p {
                Exponent::Named(_) => write!(f, "lp:inf{}", lam(*lambda)),
                Exponent::Finite(p) => write!(f, "lp:{p}{}", lam(*lambda)),
            },
            Self::Hypercube { lambda, .. } => write!(f, "cube{}", lam(*lambda)),
            Self::Simplex { .. } => f.write_str("simplex"),
            Self::Cone { .. } => f.write_str("cone"),
            Self::Cylinder { .. } => f.write_str("cylinder"),
            Self::Revolution { radius, t_lo, t_hi, .. } => {
                let r = match radius {
                    RadiusSpec::Constant { value } => format!("constant({value})"),
                    RadiusSpec::Linear { intercept, slope } => format!("linear({intercept},{slope})"),
                    RadiusSpec::Semicircle { radius } => format!("semicircle({radius})"),
                    RadiusSpec::TruncatedParabola { height, curvature } => {
                        format!("truncated-parabola({height},{curvature})")
                    }
                };
                write!(f, "revolution:{r}:[{t_lo},{t_hi}]")
            }
        }
    }
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Descriptor(format!("bad {what} `{s}`")))
}

/// Parse `lp:<p>[:<λ>]`, `cube[:<λ>]`, `simplex`, `cone`, `cylinder`, `ball`.
pub fn parse_body(s: &str) -> Result<BodySpec> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::Descriptor(e.to_string()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let lambda = |i: usize| parts.get(i).map_or(Ok(1.0), |v| num(v, "dilation"));
    let spec = match parts[0] {
        "lp" => {
            let p = parts.get(1).ok_or_else(|| Error::Descriptor("lp needs an exponent: lp:<p>".into()))?;
            let p = if *p == "inf" { Exponent::Named(InfName::Inf) } else { Exponent::Finite(num(p, "exponent")?) };
            if parts.len() > 3 {
                return Err(Error::Descriptor(format!("too many fields in `{s}`")));
            }
            BodySpec::Lp { p, n: None, lambda: lambda(2)? }
        }
        "ball" => BodySpec::Lp { p: Exponent::Finite(2.0), n: None, lambda: lambda(1)? },
        "cube" => BodySpec::Hypercube { n: None, lambda: lambda(1)? },
        "simplex" if parts.len() == 1 => BodySpec::Simplex { n: None },
        "cone" if parts.len() == 1 => BodySpec::Cone { n: None },
        "cylinder" if parts.len() == 1 => BodySpec::Cylinder { n: None },
        _ => return Err(Error::Descriptor(format!("unknown body `{s}`"))),
    };
    Ok(spec)
}

/// Profile descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Uniform {
        #[serde(default = "default_one")]
        cutoff: f64,
    },
    Exponential {
        #[serde(default = "default_one")]
        beta: f64,
    },
    Gaussian {
        #[serde(default = "default_one")]
        sigma: f64,
    },
    PowerExp {
        p: f64,
        #[serde(default = "default_one")]
        beta: f64,
    },
}

impl ProfileSpec {
    pub fn build(self) -> Result<RadialProfile> {
        match self {
            Self::Uniform { cutoff } => RadialProfile::uniform_cutoff(cutoff),
            Self::Exponential { beta } => RadialProfile::exponential(beta),
            Self::Gaussian { sigma } => RadialProfile::gaussian(sigma),
            Self::PowerExp { p, beta } => {
                if p < 1.0 {
                    return Err(Error::Descriptor(format!("power-exp with p = {p} < 1 is not log-concave")));
                }
                RadialProfile::power_exp(p, beta)
            }
        }
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, Self::Uniform { .. })
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { cutoff } => write!(f, "uniform:{cutoff}"),
            Self::Exponential { beta } => write!(f, "exp:{beta}"),
            Self::Gaussian { sigma } => write!(f, "gauss:{sigma}"),
            Self::PowerExp { p, beta } => write!(f, "powexp:{p}:{beta}"),
        }
    }
}

/// Parse `uniform[:c]`, `exp[:β]`, `gauss[:σ]`, `powexp:<p>[:β]`.
pub fn parse_profile(s: &str) -> Result<ProfileSpec> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::Descriptor(e.to_string()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let arg = |i: usize, what: &str| parts.get(i).map_or(Ok(1.0), |v| num(v, what));
    let max_fields = if parts[0] == "powexp" { 3 } else { 2 };
    if parts.len() > max_fields {
        return Err(Error::Descriptor(format!("too many fields in `{s}`")));
    }
    Ok(match parts[0] {
        "uniform" => ProfileSpec::Uniform { cutoff: arg(1, "cutoff")? },
        "exp" | "exponential" => ProfileSpec::Exponential { beta: arg(1, "beta")? },
        "gauss" | "gaussian" => ProfileSpec::Gaussian { sigma: arg(1, "sigma")? },
        "powexp" => {
            let p = parts.get(1).ok_or_else(|| Error::Descriptor("powexp needs p: powexp:<p>".into()))?;
            ProfileSpec::PowerExp { p: num(p, "p")?, beta: arg(2, "beta")? }
        }
        _ => return Err(Error::Descriptor(format!("unknown profile `{s}`"))),
    })
}

/// One line per body family, for `list-bodies`.
pub const BODY_CATALOG: &[(&str, &str)] = &[
    ("lp:<p>[:<lambda>]", "unit l^p ball (p >= 1, p = inf for the cube), optionally dilated"),
    ("ball[:<lambda>]", "Euclidean ball"),
    ("cube[:<lambda>]", "hypercube [-1,1]^n"),
    ("simplex", "regular simplex with barycenter at 0 and circumradius 1"),
    ("cone", "cone of revolution over a Euclidean ball, t centred at its barycenter"),
    ("cylinder", "[-1,1] times a Euclidean ball"),
    ("{\"family\":\"revolution\",...}", "revolution body with radius constant|linear|semicircle|truncated-parabola"),
];

pub const PROFILE_CATALOG: &[(&str, &str)] = &[
    ("uniform[:<c>]", "rho = 1 on [0,c]; law of S is the point mass at c"),
    ("exp[:<beta>]", "rho = exp(-beta s)"),
    ("gauss[:<sigma>]", "rho = exp(-s^2 / (2 sigma^2))"),
    ("powexp:<p>[:<beta>]", "rho = exp(-beta s^p), p >= 1"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert_eq!(parse_body("lp:2:2").unwrap(), BodySpec::Lp { p: Exponent::Finite(2.0), n: None, lambda: 2.0 });
        assert_eq!(parse_body("lp:inf").unwrap().to_string(), "lp:inf");
        assert_eq!(parse_body("cube").unwrap(), BodySpec::Hypercube { n: None, lambda: 1.0 });
        assert!(parse_body("lp").is_err());
        assert!(parse_body("torus").is_err());
        assert_eq!(parse_profile("exp:1").unwrap(), ProfileSpec::Exponential { beta: 1.0 });
        assert_eq!(parse_profile("powexp:2:0.5").unwrap(), ProfileSpec::PowerExp { p: 2.0, beta: 0.5 });
        assert!(parse_profile("exp:x").is_err());
    }

    #[test]
    fn json_forms() {
        let b: BodySpec = serde_json::from_str(r#"{"family": "lp", "n": 4, "p": 1.5}"#).unwrap();
        assert_eq!(b.fixed_dim(), Some(4));
        let built = b.build(4).unwrap();
        assert_eq!(built.dim(), 4);
        let cube: BodySpec = serde_json::from_str(r#"{"family": "lp", "p": "inf"}"#).unwrap();
        assert!(matches!(cube.build(3).unwrap(), BuiltBody::Gauge(b) if (b.log_volume() - 8f64.ln()).abs() < 1e-12));
        let rev: BodySpec = serde_json::from_str(
            r#"{"family": "revolution", "radius": {"profile": "semicircle", "radius": 1.0}, "t_lo": -1, "t_hi": 1}"#,
        )
        .unwrap();
        assert!(matches!(rev.build(3).unwrap(), BuiltBody::Revolution(_)));
        let p: ProfileSpec = serde_json::from_str(r#"{"family": "exponential", "beta": 1.0}"#).unwrap();
        assert_eq!(p, ProfileSpec::Exponential { beta: 1.0 });
        assert!(parse_profile(r#"{"family": "power-exp", "p": 0.5}"#).unwrap().build().is_err());
    }

    #[test]
    fn cone_is_centred() {
        let BuiltBody::Revolution(k) = BodySpec::Cone { n: None }.build(3).unwrap() else { panic!() };
        assert!(k.origin_is_interior());
        assert!((k.volume() - std::f64::consts::PI / 3.0).abs() < 1e-9);
    }
}
