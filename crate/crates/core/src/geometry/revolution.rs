use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bisect_gauge, ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, log_density_peak};
use crate::scalar::Real;

const CONCAVITY_TRIALS: usize = 1000;
const CONCAVITY_TOL: f64 = 1e-9;
const VOLUME_REL_TOL: f64 = 1e-10;

/// Cross-section radius `t ↦ R(t)` of a body of revolution.
#[derive(Clone)]
pub enum RadiusProfile<F: Real = f64> {
    Constant { value: F },
    /// `a + b·t`
    Linear { intercept: F, slope: F },
    /// `√(r² − t²)`
    Semicircle { radius: F },
    /// `h − c·t²`, truncated to the interval of the body.
    TruncatedParabola { height: F, curvature: F },
    Custom(Arc<dyn Fn(F) -> F + Send + Sync>),
}

impl<F: Real> fmt::Debug for RadiusProfile<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "Constant({value})"),
            Self::Linear { intercept, slope } => write!(f, "Linear({intercept} + {slope}·t)"),
            Self::Semicircle { radius } => write!(f, "Semicircle({radius})"),
            Self::TruncatedParabola { height, curvature } => {
                write!(f, "TruncatedParabola({height} − {curvature}·t²)")
            }
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl<F: Real> RadiusProfile<F> {
    pub fn eval(&self, t: F) -> F {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { intercept, slope } => *intercept + *slope * t,
            Self::Semicircle { radius } => (*radius * *radius - t * t).max(F::zero()).sqrt(),
            Self::TruncatedParabola { height, curvature } => *height - *curvature * t * t,
            Self::Custom(f) => f(t),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Linear { .. } => "linear",
            Self::Semicircle { .. } => "semicircle",
            Self::TruncatedParabola { .. } => "truncated-parabola",
            Self::Custom(_) => "custom",
        }
    }
}

/// `K = {(t, x) ∈ I × ℝⁿ : |x|_B ≤ R(t)}` with `R` concave on the bounded interval `I`.
#[derive(Clone)]
pub struct RevolutionBody<F: Real = f64> {
    t_lo: F,
    t_hi: F,
    profile: RadiusProfile<F>,
    base: ConvexBody<F>,
    log_volume: f64,
    inner_radius: F,
    bounding_radius: F,
}

impl<F: Real> fmt::Debug for RevolutionBody<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RevolutionBody")
            .field("interval", &(self.t_lo, self.t_hi))
            .field("profile", &self.profile)
            .field("base", &self.base)
            .field("log_volume", &self.log_volume)
            .finish()
    }
}

pub fn make_revolution<F: Real>(
    t_lo: F,
    t_hi: F,
    profile: RadiusProfile<F>,
    base: ConvexBody<F>,
) -> Result<RevolutionBody<F>> {
    if !(t_lo < t_hi) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::InvalidParameter(format!("interval [{t_lo}, {t_hi}] is not bounded and proper")));
    }
    let (lo, hi) = (t_lo.as_f64(), t_hi.as_f64());
    let radius = |t: f64| profile.eval(F::of(t)).as_f64();

    for t in [lo, hi] {
        if radius(t) < -1e-12 {
            return Err(Error::NegativeRadius { t, value: radius(t) });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_c0c0);
    for _ in 0..CONCAVITY_TRIALS {
        let a = rng.random_range(lo..=hi);
        let b = rng.random_range(lo..=hi);
        let (ra, rb) = (radius(a), radius(b));
        for (t, r) in [(a, ra), (b, rb)] {
            if r < -1e-12 {
                return Err(Error::NegativeRadius { t, value: r });
            }
        }
        let mid = 0.5 * (a + b);
        let chord = 0.5 * (ra + rb);
        let value = radius(mid);
        if value < chord - CONCAVITY_TOL * chord.abs().max(1.0) {
            return Err(Error::NotConcave { mid, value, chord });
        }
    }

    let n = base.dim() as i32;
    let integral = adaptive_simpson(|t| radius(t).max(0.0).powi(n), lo, hi, VOLUME_REL_TOL);
    if !(integral > 0.0) {
        return Err(Error::InvalidParameter("body of revolution has zero volume".into()));
    }
    let log_volume = base.log_volume() + integral.ln();

    let (_, r_max) = log_density_peak(&radius, lo, hi);
    let r_max = F::of(r_max * (1.0 + 1e-9));
    let t_max = t_lo.abs().max(t_hi.abs());
    let bounding_radius = (t_max * t_max + (base.bounding_radius() * r_max).powi(2)).sqrt();

    // Conservative radius of a Euclidean ball around 0 inside K: for r₀ within
    // I, the ball of radius min(r₀, r_B·min R(±r₀)) fits in the cylinder over
    // [−r₀, r₀] since R is concave. Best r₀ on a grid.
    let inner_radius = if t_lo < F::zero() && t_hi > F::zero() {
        let reach = (-t_lo).min(t_hi);
        (1..=256)
            .map(|i| {
                let r0 = reach * F::of(i as f64 / 256.0);
                let edge = profile.eval(-r0).min(profile.eval(r0)).max(F::zero());
                r0.min(base.inner_radius() * edge)
            })
            .fold(F::zero(), |a, b| a.max(b))
    } else {
        F::zero()
    };

    Ok(RevolutionBody {
        t_lo,
        t_hi,
        profile,
        base,
        log_volume,
        inner_radius,
        bounding_radius,
    })
}

impl<F: Real> RevolutionBody<F> {
    pub fn interval(&self) -> (F, F) {
        (self.t_lo, self.t_hi)
    }

    pub fn profile(&self) -> &RadiusProfile<F> {
        &self.profile
    }

    pub fn radius(&self, t: F) -> F {
        self.profile.eval(t)
    }

    pub fn base(&self) -> &ConvexBody<F> {
        &self.base
    }

    /// `1 + dim(B)`.
    pub fn total_dim(&self) -> usize {
        1 + self.base.dim()
    }

    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    pub fn origin_is_interior(&self) -> bool {
        self.inner_radius > F::zero()
    }

    pub fn contains(&self, y: &[F]) -> bool {
        let t = y[0];
        t >= self.t_lo && t <= self.t_hi && self.base.gauge_unchecked(&y[1..]) <= self.profile.eval(t)
    }

    /// Gauge of `K`, by bisection on the membership test.
    pub fn gauge(&self, y: &[F]) -> Result<F> {
        if y.len() != self.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.total_dim(), got: y.len() });
        }
        if !self.origin_is_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok(bisect_gauge(y, self.inner_radius, self.bounding_radius, |z| self.contains(z)))
    }

    /// View as a [`ConvexBody`]; requires the origin in the interior.
    pub fn to_body(&self) -> Result<ConvexBody<F>> {
        if !self.origin_is_interior() {
            return Err(Error::OriginNotInterior);
        }
        let symmetric = self.base.is_symmetric() && {
            let (lo, hi) = (self.t_lo.as_f64(), self.t_hi.as_f64());
            (lo + hi).abs() < 1e-12
                && (0..=16).all(|i| {
                    let t = F::of(hi * i as f64 / 16.0);
                    (self.radius(t) - self.radius(-t)).abs() <= F::of(1e-12)
                })
        };
        Ok(ConvexBody {
            dim: self.total_dim(),
            shape: Shape::Revolution(Arc::new(self.clone())),
            log_volume: self.log_volume,
            bounding_radius: self.bounding_radius,
            inner_radius: self.inner_radius,
            symmetric,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_lp_ball;
    use std::f64::consts::PI;

    fn disc() -> ConvexBody {
        make_lp_ball(2, 2.0).unwrap()
    }

    #[test]
    fn cylinder_volume() {
        let k = make_revolution(-1.0, 1.0, RadiusProfile::Constant { value: 1.0 }, disc()).unwrap();
        assert!((k.volume() - 2.0 * PI).abs() < 1e-10);
        assert_eq!(k.total_dim(), 3);
    }

    #[test]
    fn cone_volume() {
        let k = make_revolution(
            0.0,
            1.0,
            RadiusProfile::Linear { intercept: 1.0, slope: -1.0 },
            disc(),
        )
        .unwrap();
        assert!((k.volume() - PI / 3.0).abs() < 1e-10 * PI);
        assert!(!k.origin_is_interior());
        assert!(matches!(k.gauge(&[0.1, 0.0, 0.0]), Err(Error::OriginNotInterior)));
    }

    #[test]
    fn semicircle_is_the_ball() {
        let k = make_revolution(-1.0, 1.0, RadiusProfile::Semicircle { radius: 1.0 }, disc()).unwrap();
        assert!((k.volume() - 4.0 / 3.0 * PI).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let euclid = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g = k.gauge(&y).unwrap();
            assert!((g - euclid).abs() <= 1e-9 * euclid, "{g} vs {euclid}");
        }
    }

    #[test]
    fn rejects_convex_and_negative_profiles() {
        let convex = RadiusProfile::Custom(Arc::new(|t: f64| 1.0 + t * t));
        assert!(matches!(
            make_revolution(-1.0, 1.0, convex, disc()),
            Err(Error::NotConcave { .. })
        ));
        let negative = RadiusProfile::Linear { intercept: 0.5, slope: -1.0 };
        assert!(matches!(
            make_revolution(0.0, 1.0, negative, disc()),
            Err(Error::NegativeRadius { .. })
        ));
        assert!(make_revolution(1.0, 1.0, RadiusProfile::Constant { value: 1.0 }, disc()).is_err());
    }

    #[test]
    fn membership_and_body_view() {
        let k = make_revolution(
            -0.5,
            1.0,
            RadiusProfile::TruncatedParabola { height: 1.0, curvature: 0.5 },
            disc(),
        )
        .unwrap();
        assert!(k.contains(&[0.9, 0.2, 0.0]));
        assert!(!k.contains(&[1.1, 0.0, 0.0]));
        assert!(!k.contains(&[0.9, 0.7, 0.0]));
        let body = k.to_body().unwrap();
        assert_eq!(body.dim(), 3);
        let y = [0.3, 0.2, -0.1];
        let g = body.gauge(&y).unwrap();
        let on_boundary: Vec<f64> = y.iter().map(|v| v / g).collect();
        assert!(k.contains(&on_boundary.iter().map(|v| v * (1.0 - 1e-9)).collect::<Vec<_>>()));
        assert!(!k.contains(&on_boundary.iter().map(|v| v * (1.0 + 1e-9)).collect::<Vec<_>>()));
    }
}
