//! Convex bodies described by their gauge (Minkowski functional).
//!
//! A body `B` with `0` in its interior is identified with the function
//! `|x|_B = inf{λ > 0 : x/λ ∈ B}`. Closed forms are used for every catalog
//! family; bodies known only through a membership predicate fall back to
//! bisection on the ray through `x`.

mod revolution;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use revolution::{make_revolution, RadiusProfile, RevolutionBody};

/// Membership predicate for bodies without a closed-form gauge.
pub type Membership<F> = Arc<dyn Fn(&[F]) -> bool + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    LpBall { p: f64 },
    Hypercube,
    Simplex,
    Product,
    Revolution,
    Dilated,
    Generic,
}

/// How a gauge gradient was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    Exact,
    FiniteDifference,
}

#[derive(Clone)]
enum Shape<F: Real> {
    Lp { p: F },
    Cube,
    /// Unit-norm vertices of a regular simplex centred at its barycenter.
    Simplex { vertices: Vec<Vec<F>> },
    Product { factors: Vec<ConvexBody<F>> },
    Dilated { inner: Box<ConvexBody<F>>, lambda: F },
    Revolution(Arc<RevolutionBody<F>>),
    Generic { membership: Membership<F> },
}

/// A convex body in `ℝⁿ` containing the origin in its interior.
///
/// Immutable after construction; cloning is cheap apart from simplex vertex
/// tables.
#[derive(Clone)]
pub struct ConvexBody<F: Real = f64> {
    dim: usize,
    shape: Shape<F>,
    log_volume: f64,
    bounding_radius: F,
    inner_radius: F,
    symmetric: bool,
}

impl<F: Real> fmt::Debug for ConvexBody<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexBody")
            .field("dim", &self.dim)
            .field("family", &self.family())
            .field("log_volume", &self.log_volume)
            .field("bounding_radius", &self.bounding_radius)
            .field("inner_radius", &self.inner_radius)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// Unit `ℓᵖ` ball in `ℝⁿ`. `p = ∞` yields the hypercube `[−1, 1]ⁿ`.
pub fn make_lp_ball<F: Real>(n: usize, p: f64) -> Result<ConvexBody<F>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} < 1 does not give a convex body")));
    }
    if p.is_infinite() {
        return make_hypercube(n);
    }
    let nf = n as f64;
    let log_volume = nf * (2f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + nf / p);
    // Extreme Euclidean norms on the unit ℓᵖ sphere: axes and diagonals.
    let diag = nf.powf(0.5 - 1.0 / p);
    let (inner, outer) = if p >= 2.0 { (1.0, diag) } else { (diag, 1.0) };
    Ok(ConvexBody {
        dim: n,
        shape: Shape::Lp { p: F::of(p) },
        log_volume,
        bounding_radius: F::of(outer),
        inner_radius: F::of(inner),
        symmetric: true,
    })
}

pub fn make_hypercube<F: Real>(n: usize) -> Result<ConvexBody<F>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(ConvexBody {
        dim: n,
        shape: Shape::Cube,
        log_volume: n as f64 * 2f64.ln(),
        bounding_radius: F::of((n as f64).sqrt()),
        inner_radius: F::one(),
        symmetric: true,
    })
}

/// Regular simplex in `ℝⁿ` with circumradius 1 and barycenter at the origin.
pub fn make_simplex<F: Real>(n: usize) -> Result<ConvexBody<F>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    // Standard basis of ℝⁿ⁺¹ expressed in the Helmert basis of the hyperplane Σx = 0.
    let vertices: Vec<Vec<F>> = (0..=n)
        .map(|i| {
            let mut v: Vec<f64> = (1..=n)
                .map(|k| {
                    let norm = ((k * (k + 1)) as f64).sqrt();
                    if i < k {
                        1.0 / norm
                    } else if i == k {
                        -(k as f64) / norm
                    } else {
                        0.0
                    }
                })
                .collect();
            let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c /= len);
            v.into_iter().map(F::of).collect()
        })
        .collect();
    let nf = n as f64;
    let log_edge = 0.5 * (2.0 * (nf + 1.0) / nf).ln();
    let log_volume = nf * log_edge - ln_gamma(nf + 1.0) + 0.5 * ((nf + 1.0).ln() - nf * 2f64.ln());
    Ok(ConvexBody {
        dim: n,
        shape: Shape::Simplex { vertices },
        log_volume,
        bounding_radius: F::one(),
        inner_radius: F::one() / F::of(nf),
        symmetric: n == 1,
    })
}

/// Cartesian product `B₁ × … × B_k`; its gauge is the maximum of the factor gauges.
pub fn make_product<F: Real>(factors: Vec<ConvexBody<F>>) -> Result<ConvexBody<F>> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one factor".into()));
    }
    let dim = factors.iter().map(|b| b.dim).sum();
    let log_volume = factors.iter().map(|b| b.log_volume).sum();
    let bounding_radius = factors
        .iter()
        .fold(F::zero(), |acc, b| acc + b.bounding_radius * b.bounding_radius)
        .sqrt();
    let inner_radius = factors
        .iter()
        .map(|b| b.inner_radius)
        .fold(F::infinity(), F::min);
    let symmetric = factors.iter().all(|b| b.symmetric);
    Ok(ConvexBody {
        dim,
        shape: Shape::Product { factors },
        log_volume,
        bounding_radius,
        inner_radius,
        symmetric,
    })
}

/// Body known only through a membership oracle.
pub fn make_generic<F: Real>(
    dim: usize,
    membership: Membership<F>,
    inner_radius: F,
    bounding_radius: F,
    log_volume: f64,
    symmetric: bool,
) -> Result<ConvexBody<F>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(inner_radius > F::zero()) || inner_radius > bounding_radius {
        return Err(Error::OriginNotInterior);
    }
    Ok(ConvexBody {
        dim,
        shape: Shape::Generic { membership },
        log_volume,
        bounding_radius,
        inner_radius,
        symmetric,
    })
}

/// `λ·B`.
pub fn dilate<F: Real>(body: &ConvexBody<F>, lambda: F) -> Result<ConvexBody<F>> {
    if !(lambda > F::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("dilation factor {lambda} must be positive")));
    }
    if lambda == F::one() {
        return Ok(body.clone());
    }
    let (inner, total) = match &body.shape {
        Shape::Dilated { inner, lambda: l } => (inner.clone(), *l * lambda),
        _ => (Box::new(body.clone()), lambda),
    };
    Ok(ConvexBody {
        dim: body.dim,
        log_volume: inner.log_volume + body.dim as f64 * total.as_f64().ln(),
        bounding_radius: inner.bounding_radius * total,
        inner_radius: inner.inner_radius * total,
        symmetric: body.symmetric,
        shape: Shape::Dilated { inner, lambda: total },
    })
}

impl<F: Real> ConvexBody<F> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    pub fn bounding_radius(&self) -> F {
        self.bounding_radius
    }

    pub fn inner_radius(&self) -> F {
        self.inner_radius
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn family(&self) -> Family {
        match &self.shape {
            Shape::Lp { p } => Family::LpBall { p: p.as_f64() },
            Shape::Cube => Family::Hypercube,
            Shape::Simplex { .. } => Family::Simplex,
            Shape::Product { .. } => Family::Product,
            Shape::Dilated { .. } => Family::Dilated,
            Shape::Revolution(_) => Family::Revolution,
            Shape::Generic { .. } => Family::Generic,
        }
    }

    /// Product factors, for bodies built by [`make_product`].
    pub fn factors(&self) -> Option<&[ConvexBody<F>]> {
        match &self.shape {
            Shape::Product { factors } => Some(factors),
            _ => None,
        }
    }

    /// `(inner body, λ)` for dilated bodies.
    pub fn dilation(&self) -> Option<(&ConvexBody<F>, F)> {
        match &self.shape {
            Shape::Dilated { inner, lambda } => Some((inner, *lambda)),
            _ => None,
        }
    }

    pub fn revolution(&self) -> Option<&RevolutionBody<F>> {
        match &self.shape {
            Shape::Revolution(r) => Some(r),
            _ => None,
        }
    }

    /// Unit vertices, for simplices.
    pub fn simplex_vertices(&self) -> Option<&[Vec<F>]> {
        match &self.shape {
            Shape::Simplex { vertices } => Some(vertices),
            _ => None,
        }
    }

    /// `|x|_B`.
    pub fn gauge(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self.gauge_unchecked(x))
    }

    /// `|x|_B` without the dimension check; `x.len()` must equal `dim()`.
    pub fn gauge_unchecked(&self, x: &[F]) -> F {
        match &self.shape {
            Shape::Lp { p } => lp_norm(x, *p),
            Shape::Cube => x.iter().fold(F::zero(), |m, v| m.max(v.abs())),
            Shape::Simplex { vertices } => simplex_gauge(vertices, x),
            Shape::Product { factors } => {
                let mut offset = 0;
                let mut g = F::zero();
                for b in factors {
                    g = g.max(b.gauge_unchecked(&x[offset..offset + b.dim]));
                    offset += b.dim;
                }
                g
            }
            Shape::Dilated { inner, lambda } => inner.gauge_unchecked(x) / *lambda,
            Shape::Revolution(rev) => {
                bisect_gauge(x, self.inner_radius, self.bounding_radius, |y| rev.contains(y))
            }
            Shape::Generic { membership } => {
                bisect_gauge(x, self.inner_radius, self.bounding_radius, |y| membership(y))
            }
        }
    }

    pub fn contains(&self, x: &[F]) -> bool {
        match &self.shape {
            Shape::Generic { membership } => membership(x),
            Shape::Revolution(rev) => rev.contains(x),
            _ => self.gauge_unchecked(x) <= F::one(),
        }
    }

    /// Gradient of the gauge at `x` (a subgradient on the singular set).
    pub fn gauge_gradient(&self, x: &[F], out: &mut [F]) -> GradientKind {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Lp { p } => {
                let g = lp_norm(x, *p);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = if g == F::zero() || v == F::zero() {
                        F::zero()
                    } else if *p == F::one() {
                        v.signum()
                    } else {
                        v.signum() * (v.abs() / g).powf(*p - F::one())
                    };
                }
                GradientKind::Exact
            }
            Shape::Cube => {
                out.iter_mut().for_each(|o| *o = F::zero());
                if let Some((i, v)) = argmax_abs(x) {
                    if v != F::zero() {
                        out[i] = v.signum();
                    }
                }
                GradientKind::Exact
            }
            Shape::Simplex { vertices } => {
                let (i, _) = simplex_argmax(vertices, x);
                let n = F::of(self.dim as f64);
                for (o, &v) in out.iter_mut().zip(&vertices[i]) {
                    *o = -n * v;
                }
                GradientKind::Exact
            }
            Shape::Product { factors } => {
                out.iter_mut().for_each(|o| *o = F::zero());
                let mut offset = 0;
                let mut best = (F::neg_infinity(), 0, 0);
                for (k, b) in factors.iter().enumerate() {
                    let g = b.gauge_unchecked(&x[offset..offset + b.dim]);
                    if g > best.0 {
                        best = (g, k, offset);
                    }
                    offset += b.dim;
                }
                let (_, k, offset) = best;
                let b = &factors[k];
                b.gauge_gradient(&x[offset..offset + b.dim], &mut out[offset..offset + b.dim])
            }
            Shape::Dilated { inner, lambda } => {
                let scaled: Vec<F> = x.iter().map(|&v| v / *lambda).collect();
                let kind = inner.gauge_gradient(&scaled, out);
                out.iter_mut().for_each(|o| *o = *o / *lambda);
                kind
            }
            Shape::Revolution(_) | Shape::Generic { .. } => {
                let scale = x.iter().fold(F::one(), |m, v| m.max(v.abs()));
                let h = F::of(1e-6) * scale;
                let mut y = x.to_vec();
                for i in 0..self.dim {
                    let orig = y[i];
                    y[i] = orig + h;
                    let up = self.gauge_unchecked(&y);
                    y[i] = orig - h;
                    let down = self.gauge_unchecked(&y);
                    y[i] = orig;
                    out[i] = (up - down) / (h + h);
                }
                GradientKind::FiniteDifference
            }
        }
    }

    /// Whether `x` lies within `tol` of the set where the gauge is not
    /// continuously differentiable (coordinate hyperplanes for `p < 2`, ridges
    /// of polytopes, ties between product factors, the origin).
    pub fn near_singular(&self, x: &[F], tol: F) -> bool {
        if x.iter().all(|v| v.abs() <= tol) {
            return true;
        }
        match &self.shape {
            Shape::Lp { p } => *p < F::of(2.0) && x.iter().any(|v| v.abs() <= tol),
            Shape::Cube => {
                let mut a: Vec<F> = x.iter().map(|v| v.abs()).collect();
                a.sort_by(|u, v| v.partial_cmp(u).unwrap());
                a.len() > 1 && a[0] - a[1] <= tol
            }
            Shape::Simplex { vertices } => {
                let mut vals: Vec<F> = vertices.iter().map(|v| -dot(v, x)).collect();
                vals.sort_by(|u, v| v.partial_cmp(u).unwrap());
                vals[0] - vals[1] <= tol
            }
            Shape::Product { factors } => {
                let mut offset = 0;
                let mut gs = Vec::with_capacity(factors.len());
                for b in factors {
                    let part = &x[offset..offset + b.dim];
                    if b.near_singular(part, tol) {
                        return true;
                    }
                    gs.push(b.gauge_unchecked(part));
                    offset += b.dim;
                }
                gs.sort_by(|u, v| v.partial_cmp(u).unwrap());
                gs.len() > 1 && gs[0] - gs[1] <= tol
            }
            Shape::Dilated { inner, lambda } => {
                let scaled: Vec<F> = x.iter().map(|&v| v / *lambda).collect();
                inner.near_singular(&scaled, tol / *lambda)
            }
            Shape::Revolution(_) | Shape::Generic { .. } => false,
        }
    }
}

fn lp_norm<F: Real>(x: &[F], p: F) -> F {
    if p == F::one() {
        return x.iter().fold(F::zero(), |s, v| s + v.abs());
    }
    if p == F::of(2.0) {
        return x.iter().fold(F::zero(), |s, v| s + *v * *v).sqrt();
    }
    let m = x.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    if m == F::zero() {
        return F::zero();
    }
    let s = x.iter().fold(F::zero(), |s, v| s + (v.abs() / m).powf(p));
    m * s.powf(F::one() / p)
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |s, (u, v)| s + *u * *v)
}

fn argmax_abs<F: Real>(x: &[F]) -> Option<(usize, F)> {
    x.iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, F)>, (i, v)| match best {
            Some((_, b)) if b.abs() >= v.abs() => best,
            _ => Some((i, v)),
        })
}

fn simplex_argmax<F: Real>(vertices: &[Vec<F>], x: &[F]) -> (usize, F) {
    vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (i, -dot(v, x)))
        .fold((0, F::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b })
}

// Facet opposite vertex vᵢ is {⟨x, −vᵢ⟩ = 1/n} for a unit-circumradius simplex.
fn simplex_gauge<F: Real>(vertices: &[Vec<F>], x: &[F]) -> F {
    let n = F::of(x.len() as f64);
    (simplex_argmax(vertices, x).1 * n).max(F::zero())
}

/// Bisection for `inf{λ : x/λ ∈ B}` over `[|x|/R, |x|/r]`.
pub(crate) fn bisect_gauge<F: Real, M: Fn(&[F]) -> bool>(x: &[F], inner: F, outer: F, member: M) -> F {
    let norm = x.iter().fold(F::zero(), |s, v| s + *v * *v).sqrt();
    if norm == F::zero() {
        return F::zero();
    }
    let mut lo = norm / outer;
    let mut hi = norm / inner;
    let tol = F::refine_tol();
    let mut y = vec![F::zero(); x.len()];
    let inside = |lambda: F, y: &mut Vec<F>| {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *xi / lambda;
        }
        member(y)
    };
    // Guard against a conservative inner radius that is not conservative enough.
    let mut guard = 0;
    while !inside(hi, &mut y) && guard < 64 {
        lo = hi;
        hi = hi + hi;
        guard += 1;
    }
    while hi - lo > tol * hi {
        let mid = F::of(0.5) * (lo + hi);
        if inside(mid, &mut y) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    F::of(0.5) * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn gauge_examples() {
        let l2: ConvexBody = make_lp_ball(2, 2.0).unwrap();
        assert!(close(l2.gauge(&[3.0, 4.0]).unwrap(), 5.0, 1e-15));
        let cube: ConvexBody = make_hypercube(2).unwrap();
        assert_eq!(cube.gauge(&[0.5, -0.25]).unwrap(), 0.5);
        let d = dilate(&l2, 2.0).unwrap();
        assert!(close(d.gauge(&[3.0, 4.0]).unwrap(), 2.5, 1e-15));
        assert_eq!(l2.gauge(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            l2.gauge(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn lp_volumes() {
        let b: ConvexBody = make_lp_ball(2, 2.0).unwrap();
        assert!(close(b.log_volume(), std::f64::consts::PI.ln(), 1e-14));
        for p in [1.0, 1.5, 2.0, 7.0] {
            let b: ConvexBody = make_lp_ball(1, p).unwrap();
            assert!(close(b.log_volume(), 2f64.ln(), 1e-14), "p={p}");
        }
        let cube: ConvexBody = make_lp_ball(3, f64::INFINITY).unwrap();
        assert_eq!(cube.family(), Family::Hypercube);
        assert!(close(cube.log_volume(), 8f64.ln(), 1e-15));
        let l1: ConvexBody = make_lp_ball(3, 1.0).unwrap();
        assert!(close(l1.volume(), 8.0 / 6.0, 1e-14));
        assert!(make_lp_ball::<f64>(2, 0.5).is_err());
    }

    #[test]
    fn simplex_vertices_on_boundary() {
        for n in 1..=6 {
            let s: ConvexBody = make_simplex(n).unwrap();
            let verts = s.simplex_vertices().unwrap().to_vec();
            assert_eq!(verts.len(), n + 1);
            for v in &verts {
                assert!(close(s.gauge(v).unwrap(), 1.0, 1e-12), "n={n}");
            }
            let bary: Vec<f64> = (0..n)
                .map(|k| verts.iter().map(|v| v[k]).sum::<f64>())
                .collect();
            assert!(bary.iter().all(|c| c.abs() < 1e-12));
        }
        let s: ConvexBody = make_simplex(1).unwrap();
        assert!(close(s.volume(), 2.0, 1e-14));
        let tri: ConvexBody = make_simplex(2).unwrap();
        assert!(close(tri.volume(), 3.0 * 3f64.sqrt() / 4.0, 1e-14));
    }

    #[test]
    fn dilate_examples() {
        let l2: ConvexBody = make_lp_ball(2, 2.0).unwrap();
        let same = dilate(&l2, 1.0).unwrap();
        assert_eq!(same.log_volume(), l2.log_volume());
        assert_eq!(same.family(), l2.family());
        let d = dilate(&l2, 2.0).unwrap();
        assert!(close(d.log_volume(), (4.0 * std::f64::consts::PI).ln(), 1e-14));
        let cube: ConvexBody = make_hypercube(3).unwrap();
        let half = dilate(&cube, 0.5).unwrap();
        assert!(close(half.bounding_radius(), cube.bounding_radius() / 2.0, 1e-15));
        assert!(dilate(&cube, 0.0).is_err());
        assert!(dilate(&cube, -1.0).is_err());
    }

    #[test]
    fn generic_bisection_matches_closed_form() {
        let ball = make_generic::<f64>(
            3,
            Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() <= 1.0),
            1.0,
            1.0,
            (4.0 / 3.0 * std::f64::consts::PI).ln(),
            true,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let exact = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(close(ball.gauge(&x).unwrap(), exact, 1e-11));
        }
    }

    #[test]
    fn f32_bodies_work() {
        let b: ConvexBody<f32> = make_lp_ball(2, 2.0).unwrap();
        assert!((b.gauge(&[3.0f32, 4.0]).unwrap() - 5.0).abs() < 1e-6);
        let s: ConvexBody<f32> = make_simplex(3).unwrap();
        let v = s.simplex_vertices().unwrap()[0].clone();
        assert!((s.gauge(&v).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let bodies: Vec<ConvexBody> = vec![
            make_lp_ball(4, 1.0).unwrap(),
            make_lp_ball(4, 1.5).unwrap(),
            make_lp_ball(4, 2.0).unwrap(),
            make_lp_ball(4, 5.0).unwrap(),
            make_hypercube(4).unwrap(),
            make_simplex(4).unwrap(),
            make_product(vec![make_lp_ball(2, 2.0).unwrap(), make_simplex(2).unwrap()]).unwrap(),
            dilate(&make_lp_ball(4, 3.0).unwrap(), 1.7).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for b in &bodies {
            let mut checked = 0;
            while checked < 100 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                if b.near_singular(&x, 1e-4) {
                    continue;
                }
                let mut g = vec![0.0; 4];
                assert_eq!(b.gauge_gradient(&x, &mut g), GradientKind::Exact);
                for i in 0..4 {
                    let h = 1e-6;
                    let mut y = x.clone();
                    y[i] += h;
                    let up = b.gauge(&y).unwrap();
                    y[i] -= 2.0 * h;
                    let down = b.gauge(&y).unwrap();
                    let fd = (up - down) / (2.0 * h);
                    assert!((fd - g[i]).abs() <= 1e-4 * g[i].abs().max(1.0), "{:?} {fd} {}", b.family(), g[i]);
                }
                checked += 1;
            }
        }
    }
}
