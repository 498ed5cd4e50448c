//! Boundary measure descriptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A source or sink measure: either a uniform density on a hyperface square
/// at a given height, or a finite list of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasureSpec {
    UniformHyperface {
        /// Side length of the face square `[0, side]^(n-1)`.
        side: f64,
        /// Coordinate of the face in the transport direction `x_n`.
        height: f64,
        density: f64,
    },
    Atoms(Vec<(Vec<f64>, f64)>),
}

impl MeasureSpec {
    pub fn uniform_hyperface(side: f64, height: f64, density: f64) -> Result<Self> {
        if !(side > 0.0) || !(density > 0.0) {
            return Err(Error::InvalidParameter(
                "hyperface needs positive side and density".into(),
            ));
        }
        Ok(MeasureSpec::UniformHyperface {
            side,
            height,
            density,
        })
    }

    pub fn atoms(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("atom list is empty".into()));
        }
        let dim = atoms[0].0.len();
        for (pos, mass) in &atoms {
            if pos.len() != dim {
                return Err(Error::DimensionMismatch(
                    "atom positions differ in dimension".into(),
                ));
            }
            if !(*mass > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom masses must be strictly positive, got {mass}"
                )));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i].0 == atoms[j].0 {
                    return Err(Error::InvalidParameter(format!(
                        "atom positions must be distinct (atoms {i} and {j} coincide)"
                    )));
                }
            }
        }
        Ok(MeasureSpec::Atoms(atoms))
    }

    /// Total mass; hyperfaces need the ambient dimension to resolve the face area.
    pub fn total_mass(&self, n: usize) -> f64 {
        match self {
            MeasureSpec::UniformHyperface { side, density, .. } => {
                density * side.powi(n as i32 - 1)
            }
            MeasureSpec::Atoms(atoms) => atoms.iter().map(|(_, m)| m).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_validation() {
        assert!(MeasureSpec::atoms(vec![]).is_err());
        assert!(MeasureSpec::atoms(vec![(vec![0.0, 0.0], 0.0)]).is_err());
        assert!(MeasureSpec::atoms(vec![(vec![0.0, 0.0], 0.1), (vec![0.0, 0.0], 0.2)]).is_err());
        let m = MeasureSpec::atoms(vec![(vec![0.0, 0.0], 0.1), (vec![1.0, 0.0], 0.2)]).unwrap();
        assert!((m.total_mass(2) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn face_mass() {
        let f = MeasureSpec::uniform_hyperface(0.5, 0.0, 2.0).unwrap();
        assert!((f.total_mass(3) - 0.5).abs() < 1e-15);
    }
}
