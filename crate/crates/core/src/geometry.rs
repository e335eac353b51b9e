//! Lorentz-model kernel for hyperbolic space.
//!
//! Points live on the upper sheet of the two-sheeted hyperboloid
//! `{x in R^{n+1} : <x,x>_L = -1, x0 > 0}` where
//! `<x,y>_L = -x0*y0 + sum_{i>=1} xi*yi` is the Lorentzian scalar product.
//! The Poincaré ball is used only for export, analysis, and as an independent
//! oracle in tests; all optimization stays in Lorentz coordinates, which are
//! better behaved numerically near the boundary (Nickel & Kiela 2018).
//!
//! Two API levels coexist here:
//!
//! * validated value types ([`LorentzPoint`], [`TangentVector`],
//!   [`PoincarePoint`]) for everything contract-facing, and
//! * slice-level primitives ([`ldot`], [`renormalize_in_place`],
//!   [`tangent_project_in_place`], [`exp_map_in_place`]) for the trainer's
//!   hot loop, which composes them on raw ambient buffers.

use rand::Rng;
use thiserror::Error;

use crate::guards;

/// Maximum tolerated drift of `<x,x>_L` from -1 after renormalization.
pub const MANIFOLD_TOL: f64 = 1e-9;

/// Tangent vectors with `<v,v>_L` below this are rejected as non-spacelike.
pub const SPACELIKE_TOL: f64 = 1e-9;

/// Below this Lorentz norm the exponential map degenerates to `x + v`.
pub const EXP_MAP_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point is off the hyperboloid: <x,x>_L = {lorentz_sq} (tolerance {MANIFOLD_TOL})")]
    OffManifold { lorentz_sq: f64 },
    #[error("point is on the lower sheet or degenerate: x0 = {time}")]
    LowerSheet { time: f64 },
    #[error("point outside the open unit ball: |x| = {norm}")]
    OutsideBall { norm: f64 },
    #[error("vector is not tangent at its base point: <x,v>_L = {base_dot}")]
    NotTangent { base_dot: f64 },
    #[error("tangent vector is not spacelike: <v,v>_L = {lorentz_sq}")]
    NonSpacelike { lorentz_sq: f64 },
    #[error("non-finite coordinate encountered")]
    NonFinite,
    #[error("ambient vector needs at least 2 coordinates, got {len}")]
    TooShort { len: usize },
}

/// Lorentzian scalar product `-x0*y0 + sum_{i>=1} xi*yi`.
///
/// Panics if the slices differ in length; dimension mismatches are
/// programming errors, not data errors.
#[inline]
pub fn ldot(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(
        x.len(),
        y.len(),
        "lorentz scalar product needs equal lengths ({} vs {})",
        x.len(),
        y.len()
    );
    let mut acc = -x[0] * y[0];
    for i in 1..x.len() {
        acc += x[i] * y[i];
    }
    acc
}

/// Squared Euclidean norm of the spatial part `x' = (x1..xn)`.
#[inline]
pub fn spatial_norm_sq(x: &[f64]) -> f64 {
    x[1..].iter().map(|c| c * c).sum()
}

/// Recomputes `x0 = sqrt(1 + |x'|^2)`, pulling the point back onto the sheet.
///
/// Idempotent, and a no-op (to ~1 ulp) for points already on the manifold.
#[inline]
pub fn renormalize_in_place(x: &mut [f64]) {
    x[0] = (1.0 + spatial_norm_sq(x)).sqrt();
}

/// `g_l^{-1}` applied to a Euclidean gradient: negate the time coordinate.
#[inline]
pub fn metric_inverse_in_place(grad: &mut [f64]) {
    grad[0] = -grad[0];
}

/// Copying variant of [`metric_inverse_in_place`]. Involutive.
pub fn metric_inverse_grad(grad: &[f64]) -> Vec<f64> {
    let mut out = grad.to_vec();
    metric_inverse_in_place(&mut out);
    out
}

/// Projects ambient `u` onto the tangent space at `x`: `u + <x,u>_L * x`.
pub fn tangent_project_in_place(x: &[f64], u: &mut [f64]) {
    let d = ldot(x, u);
    for i in 0..u.len() {
        u[i] += d * x[i];
    }
}

/// Moves `x` along the geodesic with initial velocity `v` (tangent at `x`):
/// `cosh(|v|_L) x + sinh(|v|_L) v/|v|_L`, then renormalizes.
///
/// For `|v|_L` below [`EXP_MAP_EPS`] falls back to renormalizing `x + v`.
pub fn exp_map_in_place(x: &mut [f64], v: &[f64]) -> Result<(), GeometryError> {
    let vv = ldot(v, v);
    if !vv.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if vv < -SPACELIKE_TOL {
        return Err(GeometryError::NonSpacelike { lorentz_sq: vv });
    }
    let r = vv.max(0.0).sqrt();
    if r < EXP_MAP_EPS {
        for i in 0..x.len() {
            x[i] += v[i];
        }
    } else {
        let (ch, sh) = (r.cosh(), r.sinh());
        for i in 0..x.len() {
            x[i] = ch * x[i] + sh * v[i] / r;
        }
    }
    renormalize_in_place(x);
    Ok(())
}

/// A point on the upper hyperboloid sheet, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzPoint(Vec<f64>);

impl LorentzPoint {
    /// The apex `(1, 0, ..., 0)` of the sheet for spatial dimension `n`.
    pub fn origin(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[0] = 1.0;
        LorentzPoint(coords)
    }

    /// Validates ambient coordinates: finite, `<x,x>_L = -1` within
    /// [`MANIFOLD_TOL`], and on the upper sheet.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::TooShort { len: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let sq = ldot(&coords, &coords);
        if (sq + 1.0).abs() > MANIFOLD_TOL {
            return Err(GeometryError::OffManifold { lorentz_sq: sq });
        }
        if coords[0] < 1.0 - MANIFOLD_TOL {
            return Err(GeometryError::LowerSheet { time: coords[0] });
        }
        Ok(LorentzPoint(coords))
    }

    /// Lifts a spatial vector onto the sheet via `x0 = sqrt(1 + |x'|^2)`.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push(0.0);
        coords.extend_from_slice(spatial);
        renormalize_in_place(&mut coords);
        LorentzPoint(coords)
    }

    /// The full ambient coordinate vector `(x0, x1..xn)`.
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn spatial_norm(&self) -> f64 {
        spatial_norm_sq(&self.0).sqrt()
    }

    /// Spatial dimension `n` (the ambient vector has `n + 1` entries).
    pub fn spatial_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// A tangent vector at a base point, `<base, v>_L = 0` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: LorentzPoint,
    coords: Vec<f64>,
}

impl TangentVector {
    /// Validates that `coords` is Lorentz-orthogonal to `base`.
    pub fn new(base: LorentzPoint, coords: Vec<f64>) -> Result<Self, GeometryError> {
        let d = ldot(base.coords(), &coords);
        if d.abs() > MANIFOLD_TOL {
            return Err(GeometryError::NotTangent { base_dot: d });
        }
        Ok(TangentVector { base, coords })
    }

    pub fn base(&self) -> &LorentzPoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `|v|_L = sqrt(<v,v>_L)`; tangent vectors on the sheet are spacelike.
    pub fn lorentz_norm(&self) -> f64 {
        ldot(&self.coords, &self.coords).max(0.0).sqrt()
    }
}

/// A point in the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint(Vec<f64>);

impl PoincarePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm >= 1.0 {
            return Err(GeometryError::OutsideBall { norm });
        }
        Ok(PoincarePoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Geodesic distance on the hyperboloid: `acosh(-<x,y>_L)`.
pub fn ldist(x: &LorentzPoint, y: &LorentzPoint) -> f64 {
    guards::guarded_acosh(-ldot(x.coords(), y.coords()))
}

/// Diffeomorphism onto the Poincaré ball: `p(x) = x' / (x0 + 1)`.
pub fn to_poincare(x: &LorentzPoint) -> PoincarePoint {
    let denom = x.time() + 1.0;
    PoincarePoint(x.spatial().iter().map(|c| c / denom).collect())
}

/// Inverse of [`to_poincare`]: `p^{-1}(y) = (1 + |y|^2, 2y) / (1 - |y|^2)`.
pub fn from_poincare(p: &PoincarePoint) -> LorentzPoint {
    let norm_sq: f64 = p.coords().iter().map(|c| c * c).sum();
    let denom = 1.0 - norm_sq;
    let mut coords = Vec::with_capacity(p.coords().len() + 1);
    coords.push((1.0 + norm_sq) / denom);
    coords.extend(p.coords().iter().map(|c| 2.0 * c / denom));
    renormalize_in_place(&mut coords);
    LorentzPoint(coords)
}

/// Poincaré-ball distance `acosh(1 + 2 |u-v|^2 / ((1-|u|^2)(1-|v|^2)))`.
pub fn poincare_dist(u: &PoincarePoint, v: &PoincarePoint) -> f64 {
    let diff_sq: f64 = u
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let u_sq: f64 = u.coords().iter().map(|c| c * c).sum();
    let v_sq: f64 = v.coords().iter().map(|c| c * c).sum();
    guards::guarded_acosh(1.0 + 2.0 * diff_sq / ((1.0 - u_sq) * (1.0 - v_sq)))
}

/// Projects an ambient vector onto the tangent space at `x`.
pub fn tangent_project(x: &LorentzPoint, ambient: &[f64]) -> TangentVector {
    let mut coords = ambient.to_vec();
    tangent_project_in_place(x.coords(), &mut coords);
    TangentVector {
        base: x.clone(),
        coords,
    }
}

/// Exponential map at the tangent vector's base point.
pub fn exp_map(v: &TangentVector) -> Result<LorentzPoint, GeometryError> {
    let mut coords = v.base().coords().to_vec();
    exp_map_in_place(&mut coords, v.coords())?;
    Ok(LorentzPoint(coords))
}

/// Samples an on-manifold point whose spatial norm is log-uniform in
/// `[min_spatial, max_spatial]`. Used by tests and benchmarks.
pub fn sample_point<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    min_spatial: f64,
    max_spatial: f64,
) -> LorentzPoint {
    assert!(n >= 1 && min_spatial > 0.0 && max_spatial >= min_spatial);
    // Box-Muller keeps us off a separate normal-distribution dependency.
    let mut dir = vec![0.0f64; n];
    let mut norm_sq = 0.0;
    while norm_sq < 1e-300 {
        for d in dir.iter_mut() {
            let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            *d = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        norm_sq = dir.iter().map(|c| c * c).sum();
    }
    let target = (rng.random_range(min_spatial.ln()..=max_spatial.ln())).exp();
    let scale = target / norm_sq.sqrt();
    let spatial: Vec<f64> = dir.iter().map(|c| c * scale).collect();
    LorentzPoint::from_spatial(&spatial)
}
