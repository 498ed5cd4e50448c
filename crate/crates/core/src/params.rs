//! Model parameters and non-dimensionalisation.
//!
//! The geometry is always two uniform measures of density `density` on
//! hyperfaces `[0, ell]^(n-1)` a unit apart in the transport direction
//! `x_n`. Arbitrary separations and densities are reduced to this case by
//! [`nondimensionalize`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which per-length cost is in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Model {
    /// Travelling costs `1 + eps/m` per length on the network (mass flux `m`)
    /// and `a > 1` per length off it; per-length edge cost `min{a m, m + eps}`.
    #[serde(rename = "up")]
    UrbanPlanning { a: f64 },
    /// Per-length edge cost `m^(1-eps)`; mass cannot leave the network.
    #[serde(rename = "bt")]
    BranchedTransport,
}

impl Model {
    pub fn is_urban_planning(&self) -> bool {
        matches!(self, Model::UrbanPlanning { .. })
    }

    /// Off-network cost `a`; `None` for branched transport.
    pub fn a(&self) -> Option<f64> {
        match self {
            Model::UrbanPlanning { a } => Some(*a),
            Model::BranchedTransport => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Model::UrbanPlanning { .. } => "up",
            Model::BranchedTransport => "bt",
        }
    }
}

/// Validated problem parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    /// Ramification parameter; smaller values favour finer networks.
    pub epsilon: f64,
    /// Ambient dimension, at least 2.
    pub n: usize,
    /// Side length of the boundary hyperfaces.
    pub ell: f64,
    /// Uniform boundary density.
    pub density: f64,
}

impl ModelParams {
    pub fn new(model: Model, epsilon: f64, n: usize, ell: f64, density: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if let Model::UrbanPlanning { a } = model {
            if !(a > 1.0) || !a.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "urban planning requires a > 1, got {a}"
                )));
            }
        }
        if let Model::BranchedTransport = model {
            if epsilon > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "branched transport requires 0 < epsilon <= 1, got {epsilon}"
                )));
            }
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= 2, got {n}"
            )));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "side length must be positive, got {ell}"
            )));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "density must be positive, got {density}"
            )));
        }
        Ok(ModelParams {
            model,
            epsilon,
            n,
            ell,
            density,
        })
    }

    /// Urban planning parameters with unit density.
    pub fn urban_planning(epsilon: f64, a: f64, n: usize, ell: f64) -> Result<Self> {
        Self::new(Model::UrbanPlanning { a }, epsilon, n, ell, 1.0)
    }

    /// Branched transport parameters with unit density.
    pub fn branched_transport(epsilon: f64, n: usize, ell: f64) -> Result<Self> {
        Self::new(Model::BranchedTransport, epsilon, n, ell, 1.0)
    }

    /// Total boundary mass `density * ell^(n-1)`.
    pub fn boundary_mass(&self) -> f64 {
        self.density * self.ell.powi(self.n as i32 - 1)
    }
}

/// Rescale a problem with measure separation `length_scale` and boundary
/// density `params.density` to the unit problem (separation 1, density 1).
///
/// Returns the normalised parameters together with the energy scale factor:
/// the original energy of any pattern equals `scale` times the energy of the
/// rescaled pattern under the returned parameters.
pub fn nondimensionalize(params: &ModelParams, length_scale: f64) -> Result<(ModelParams, f64)> {
    if !(length_scale > 0.0) || !length_scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "length scale must be positive, got {length_scale}"
        )));
    }
    let l = length_scale;
    let m = params.density;
    let n1 = params.n as i32 - 1;
    // Mass fluxes scale by m * L^(n-1), lengths by L.
    let mass_scale = m * l.powi(n1);
    let (epsilon, scale) = match params.model {
        Model::UrbanPlanning { .. } => (params.epsilon / mass_scale, l.powi(params.n as i32) * m),
        Model::BranchedTransport => (params.epsilon, mass_scale.powf(1.0 - params.epsilon) * l),
    };
    let scaled = ModelParams::new(params.model, epsilon, params.n, params.ell / l, 1.0)?;
    Ok((scaled, scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::urban_planning(0.0, 2.0, 2, 1.0).is_err());
        assert!(ModelParams::urban_planning(0.1, 1.0, 2, 1.0).is_err());
        assert!(ModelParams::urban_planning(0.1, 2.0, 1, 1.0).is_err());
        assert!(ModelParams::branched_transport(1.5, 2, 1.0).is_err());
        assert!(ModelParams::branched_transport(1.0, 2, 1.0).is_ok());
    }

    #[test]
    fn identity_scaling() {
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let (q, scale) = nondimensionalize(&p, 1.0).unwrap();
        assert_eq!(scale, 1.0);
        assert_eq!(q.epsilon, 0.1);
        assert_eq!(q.ell, 1.0);
    }

    #[test]
    fn up_scaling_halves_epsilon_in_2d() {
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let (q, scale) = nondimensionalize(&p, 2.0).unwrap();
        assert!((q.epsilon - 0.05).abs() < 1e-15);
        assert!((scale - 4.0).abs() < 1e-15);
    }

    #[test]
    fn bt_scale_factor_2d() {
        let p = ModelParams::branched_transport(0.1, 2, 1.0).unwrap();
        let (q, scale) = nondimensionalize(&p, 2.0).unwrap();
        assert_eq!(q.epsilon, 0.1);
        // (L^(n-1) * density)^(1-eps) * L = 2^0.9 * 2
        assert!((scale - 2f64.powf(0.9) * 2.0).abs() < 1e-12);
        assert!((scale - 3.7321319661472296).abs() < 1e-10);
    }
}
