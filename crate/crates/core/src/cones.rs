//! Entailment cones on the Lorentz model.
//!
//! Every embedded term `v` owns a cone `C_v` opening away from the origin;
//! points inside `C_v` are the terms it subsumes. The cone half-aperture
//! shrinks as `v` moves outward, so general terms (near the origin) subsume
//! more than specific ones. The construction is Ganea et al.'s (2018)
//! Poincaré-ball cone transported to the hyperboloid, where optimization is
//! numerically friendlier:
//!
//! * half-aperture  `alpha(v) = asin(2K / |v'|)`,
//! * exterior angle `phi(u,v) = acos((u0 + v0 <u,v>_L) /
//!   (|v'| sqrt(<u,v>_L^2 - 1)))`, the angle at `v` between the ray from the
//!   origin through `v` and the geodesic toward `u`,
//! * energy `E(u,v) = max(0, phi(u,v) - alpha(v))`, zero exactly when `u`
//!   lies inside `C_v`, and otherwise the angle of the smallest rotation
//!   bringing `u` into the cone.
//!
//! `alpha` follows from `asin(K(1-|p|^2)/|p|)` in the ball under
//! `p(x) = x'/(x0+1)`; `phi` from the hyperbolic law of cosines on the
//! triangle (origin, v, u). Both are checked against ball-model oracles in
//! the test suites.
//!
//! Apertures are undefined inside the radius `|v'| < eps_radius` (`2K` by
//! default); the trainer projects points outward after every step so that
//! energies stay well defined.
//!
//! Functions taking `&[f64]` evaluate the formulas on raw ambient
//! coordinates, off-manifold inputs included. The gradient path needs this:
//! Euclidean gradients are taken in the ambient space and only then pulled
//! back to the manifold, and finite-difference checks perturb coordinates
//! freely. None of the formulas below may therefore use the manifold
//! identity `|v'|^2 = v0^2 - 1` as a shortcut.

use thiserror::Error;

use crate::geometry::{ldot, spatial_norm_sq, LorentzPoint};
use crate::guards;

/// `<u,v>_L^2 - 1` at or below this is treated as coincident points: the
/// exterior angle carries no usable information once the pair is closer than
/// about 1e-7 in geodesic distance.
pub const COINCIDENT_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum ConeError {
    #[error("aperture constant must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("eps_radius {eps_radius} below the admissible minimum 2K = {min}")]
    EpsRadiusTooSmall { eps_radius: f64, min: f64 },
    #[error("cone undefined: |v'| = {norm} is inside eps_radius {eps_radius}")]
    InsideEpsRadius { norm: f64, eps_radius: f64 },
    #[error("exterior angle undefined for coincident points")]
    CoincidentPoints,
    #[error("exterior angle undefined at the origin (|v'| = 0)")]
    ZeroSpatialNorm,
}

/// Cone aperture constant `K` and the radius below which cones are undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    k: f64,
    eps_radius: f64,
}

impl ConeParams {
    pub const DEFAULT_K: f64 = 0.1;

    /// `eps_radius` defaults to `2K`, the norm where the aperture reaches
    /// its maximum `pi/2`.
    pub fn new(k: f64) -> Result<Self, ConeError> {
        if !(k > 0.0) {
            return Err(ConeError::NonPositiveK(k));
        }
        Ok(ConeParams {
            k,
            eps_radius: 2.0 * k,
        })
    }

    pub fn with_eps_radius(k: f64, eps_radius: f64) -> Result<Self, ConeError> {
        if !(k > 0.0) {
            return Err(ConeError::NonPositiveK(k));
        }
        if eps_radius < 2.0 * k - 1e-12 {
            return Err(ConeError::EpsRadiusTooSmall {
                eps_radius,
                min: 2.0 * k,
            });
        }
        Ok(ConeParams { k, eps_radius })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eps_radius(&self) -> f64 {
        self.eps_radius
    }
}

impl Default for ConeParams {
    fn default() -> Self {
        ConeParams::new(Self::DEFAULT_K).expect("default K is positive")
    }
}

/// Angle pair and the resulting energy for one ordered term pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEnergy {
    /// Exterior angle `phi(u, v)` in radians.
    pub phi: f64,
    /// Cone half-aperture `alpha(v)` in radians.
    pub alpha: f64,
    /// `max(0, phi - alpha)`.
    pub energy: f64,
}

/// Half-aperture of the cone at `v` on ambient coordinates.
pub fn half_aperture_ambient(v: &[f64], params: &ConeParams) -> Result<f64, ConeError> {
    let norm = spatial_norm_sq(v).sqrt();
    if norm < params.eps_radius * (1.0 - 1e-12) {
        return Err(ConeError::InsideEpsRadius {
            norm,
            eps_radius: params.eps_radius,
        });
    }
    Ok(guards::guarded_asin(2.0 * params.k / norm))
}

/// Exterior angle `phi(u, v)` on ambient coordinates.
pub fn exterior_angle_ambient(u: &[f64], v: &[f64]) -> Result<f64, ConeError> {
    let m_sq = spatial_norm_sq(v);
    if m_sq == 0.0 {
        return Err(ConeError::ZeroSpatialNorm);
    }
    let beta = ldot(u, v);
    let q_sq = beta * beta - 1.0;
    if q_sq <= COINCIDENT_TOL {
        return Err(ConeError::CoincidentPoints);
    }
    let cos_phi = (u[0] + v[0] * beta) / (m_sq.sqrt() * q_sq.sqrt());
    Ok(guards::guarded_acos(cos_phi))
}

/// Energy `E(u, v) = max(0, phi(u,v) - alpha(v))` on ambient coordinates.
pub fn energy_ambient(u: &[f64], v: &[f64], params: &ConeParams) -> Result<PairEnergy, ConeError> {
    let alpha = half_aperture_ambient(v, params)?;
    let phi = exterior_angle_ambient(u, v)?;
    Ok(PairEnergy {
        phi,
        alpha,
        energy: (phi - alpha).max(0.0),
    })
}

/// Margin loss for one pair: `E(u,v)` for positives,
/// `max(0, margin - E(u,v))` for negatives.
pub fn pair_loss_ambient(
    u: &[f64],
    v: &[f64],
    positive: bool,
    margin: f64,
    params: &ConeParams,
) -> Result<f64, ConeError> {
    debug_assert!(margin > 0.0, "margin must be positive");
    let e = energy_ambient(u, v, params)?;
    Ok(if positive {
        e.energy
    } else {
        (margin - e.energy).max(0.0)
    })
}

pub fn half_aperture(v: &LorentzPoint, params: &ConeParams) -> Result<f64, ConeError> {
    half_aperture_ambient(v.coords(), params)
}

pub fn exterior_angle(u: &LorentzPoint, v: &LorentzPoint) -> Result<f64, ConeError> {
    exterior_angle_ambient(u.coords(), v.coords())
}

pub fn energy(
    u: &LorentzPoint,
    v: &LorentzPoint,
    params: &ConeParams,
) -> Result<PairEnergy, ConeError> {
    energy_ambient(u.coords(), v.coords(), params)
}

pub fn pair_loss(
    u: &LorentzPoint,
    v: &LorentzPoint,
    positive: bool,
    margin: f64,
    params: &ConeParams,
) -> Result<f64, ConeError> {
    pair_loss_ambient(u.coords(), v.coords(), positive, margin, params)
}

/// Loss value plus its Euclidean gradient w.r.t. the ambient coordinates of
/// both endpoints. The trainer turns these into Riemannian gradients.
#[derive(Debug, Clone)]
pub struct PairLossGrad {
    pub loss: f64,
    pub energy: PairEnergy,
    pub grad_u: Vec<f64>,
    pub grad_v: Vec<f64>,
}

/// Analytic gradient of [`pair_loss_ambient`].
///
/// Subgradient conventions: 0 at both hinge kinks (`phi = alpha` and
/// `E = margin`), and 0 on the flat side of any clamped `asin`/`acos`.
pub fn pair_loss_grad(
    u: &[f64],
    v: &[f64],
    positive: bool,
    margin: f64,
    params: &ConeParams,
) -> Result<PairLossGrad, ConeError> {
    debug_assert!(margin > 0.0, "margin must be positive");
    let dim = u.len();
    let m_sq = spatial_norm_sq(v);
    let m = m_sq.sqrt();
    if m < params.eps_radius * (1.0 - 1e-12) {
        return Err(ConeError::InsideEpsRadius {
            norm: m,
            eps_radius: params.eps_radius,
        });
    }
    let beta = ldot(u, v);
    let q_sq = beta * beta - 1.0;
    if q_sq <= COINCIDENT_TOL {
        return Err(ConeError::CoincidentPoints);
    }
    let q = q_sq.sqrt();

    let num = u[0] + v[0] * beta;
    let den = m * q;
    let cos_phi = num / den;
    let phi = guards::guarded_acos(cos_phi);

    let sin_arg = 2.0 * params.k / m;
    let alpha = guards::guarded_asin(sin_arg);

    let energy = (phi - alpha).max(0.0);
    let loss = if positive {
        energy
    } else {
        (margin - energy).max(0.0)
    };

    let mut grad_u = vec![0.0; dim];
    let mut grad_v = vec![0.0; dim];

    // dE contributes only off both hinges; the clamp flats contribute zero.
    let scale = if positive {
        if energy > 0.0 {
            1.0
        } else {
            0.0
        }
    } else if margin - energy > 0.0 && energy > 0.0 {
        -1.0
    } else {
        0.0
    };

    if scale != 0.0 {
        // phi = acos(num / (m q)) with beta = <u,v>_L, q = sqrt(beta^2 - 1).
        let dphi_dc = if cos_phi.abs() < 1.0 {
            -1.0 / guards::guarded_denom_sqrt(1.0 - cos_phi * cos_phi)
        } else {
            0.0 // acos was clamped; treat the flat as zero slope
        };
        if dphi_dc != 0.0 {
            let inv_den_sq = 1.0 / (den * den);
            let b_over_q = beta / q;
            // d(beta)/du = (-v0, v'), d(beta)/dv = (-u0, u').
            for i in 0..dim {
                let dbeta_du = if i == 0 { -v[0] } else { v[i] };
                let dnum_du = if i == 0 { 1.0 + v[0] * dbeta_du } else { v[0] * dbeta_du };
                let dden_du = m * b_over_q * dbeta_du;
                let dc = (dnum_du * den - num * dden_du) * inv_den_sq;
                grad_u[i] = scale * dphi_dc * dc;

                let dbeta_dv = if i == 0 { -u[0] } else { u[i] };
                let dnum_dv = if i == 0 {
                    beta + v[0] * dbeta_dv
                } else {
                    v[0] * dbeta_dv
                };
                let dden_dv = if i == 0 {
                    m * b_over_q * dbeta_dv
                } else {
                    (v[i] / m) * q + m * b_over_q * dbeta_dv
                };
                let dc = (dnum_dv * den - num * dden_dv) * inv_den_sq;
                grad_v[i] = scale * dphi_dc * dc;
            }
        }

        // alpha = asin(2K/m) depends on the spatial part of v only.
        if sin_arg < 1.0 {
            let dalpha_base =
                -2.0 * params.k / (m_sq * m * guards::guarded_denom_sqrt(1.0 - sin_arg * sin_arg));
            for i in 1..dim {
                grad_v[i] -= scale * dalpha_base * v[i];
            }
        }
    }

    Ok(PairLossGrad {
        loss,
        energy: PairEnergy { phi, alpha, energy },
        grad_u,
        grad_v,
    })
}
