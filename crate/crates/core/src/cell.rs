//! Unit cells: the elementary branching cell and the Wasserstein spreading
//! cell, with their closed-form energies.

use serde::{Deserialize, Serialize};

use crate::cost::{bt_edge_cost, up_edge_cost};
use crate::error::{Error, Result};
use crate::params::{Model, ModelParams};
use crate::quad::adaptive_unit_cube;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    /// Splits one pipe of flux `2^(n-1) f` into `2^(n-1)` child pipes of flux
    /// `f` over a `w x h` box.
    Elementary,
    /// Spreads an atom of mass `2^(n-1) f` uniformly onto the opposing face of
    /// its box. Terminal, urban planning only.
    Wasserstein,
}

/// A unit cell. `base` is the centre of the bottom face of the bounding box
/// `base + [-w/2, w/2]^(n-1) x [0, h]`; for an elementary or spreading cell
/// built in the transport direction the apex sits at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub base: Vec<f64>,
    pub width: f64,
    pub height: f64,
    pub flux: f64,
    pub kind: CellKind,
}

impl CellSpec {
    pub fn new(base: Vec<f64>, width: f64, height: f64, flux: f64, kind: CellKind) -> Result<Self> {
        if base.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "cell base must live in dimension >= 2, got {}",
                base.len()
            )));
        }
        if !(width >= 0.0) || !(height >= 0.0) {
            return Err(Error::InvalidParameter(
                "cell width and height must be non-negative".into(),
            ));
        }
        if !(flux > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cell flux must be strictly positive, got {flux}"
            )));
        }
        Ok(CellSpec {
            base,
            width,
            height,
            flux,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Branch length `sqrt((n-1) w^2 / 16 + h^2)`; positive unless the cell is
    /// fully degenerate (`w = h = 0`).
    pub fn tube_length(&self) -> f64 {
        let n1 = (self.dim() - 1) as f64;
        (n1 * self.width * self.width / 16.0 + self.height * self.height).sqrt()
    }

    /// Total mass through the apex, `2^(n-1) * flux`.
    pub fn total_mass(&self) -> f64 {
        (1u64 << (self.dim() - 1)) as f64 * self.flux
    }
}

/// Closed-form energy of an elementary cell:
/// `2^(n-1) min{a f, f + eps} l` (urban planning) or `2^(n-1) f^(1-eps) l`
/// (branched transport), with `l` the branch length.
pub fn elementary_cell_energy(cell: &CellSpec, params: &ModelParams) -> Result<f64> {
    if cell.kind != CellKind::Elementary {
        return Err(Error::CellKind {
            expected: "elementary",
        });
    }
    if cell.dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "cell dimension {} vs parameter dimension {}",
            cell.dim(),
            params.n
        )));
    }
    let branches = (1u64 << (params.n - 1)) as f64;
    let l = cell.tube_length();
    let per_branch = match params.model {
        Model::UrbanPlanning { a } => up_edge_cost(cell.flux, params.epsilon, a),
        Model::BranchedTransport => bt_edge_cost(cell.flux, params.epsilon),
    };
    Ok(branches * per_branch * l)
}

/// Energy of a Wasserstein cell, as (exact value, closed-form upper bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WassersteinEnergy {
    pub exact: f64,
    pub bound: f64,
}

/// Urban planning energy of a Wasserstein cell.
///
/// The bound is `min{a f, f + eps} w` for `n = 2, h = 0` and
/// `2^(n-1) a f sqrt((n-1) w^2 / 4 + h^2)` otherwise. The exact value
/// integrates the cost density along the fibers: in the flat 2D case the
/// spread carries positive flux and the pieces are evaluated in closed form;
/// in the general case every point off the apex carries zero flux, so the
/// cost is `a f` times the fiber-length integral, done by quadrature
/// (`quadrature_tol` is absolute on the returned energy).
pub fn wasserstein_cell_energy(
    cell: &CellSpec,
    params: &ModelParams,
    quadrature_tol: f64,
) -> Result<WassersteinEnergy> {
    if cell.kind != CellKind::Wasserstein {
        return Err(Error::CellKind {
            expected: "wasserstein",
        });
    }
    let a = match params.model {
        Model::UrbanPlanning { a } => a,
        Model::BranchedTransport => {
            return Err(Error::ModelMismatch(
                "branched transport mass cannot leave the network; Wasserstein cells are urban planning only".into(),
            ))
        }
    };
    if cell.dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "cell dimension {} vs parameter dimension {}",
            cell.dim(),
            params.n
        )));
    }
    if !(quadrature_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let n = params.n;
    let (w, h, f) = (cell.width, cell.height, cell.flux);
    let eps = params.epsilon;

    if n == 2 && h == 0.0 {
        let bound = up_edge_cost(f, eps, a) * w;
        let exact = flat_spread_exact_2d(w, f, eps, a);
        return Ok(WassersteinEnergy { exact, bound });
    }

    let n1 = n - 1;
    let bound = (1u64 << n1) as f64 * a * f * (n1 as f64 * w * w / 4.0 + h * h).sqrt();
    if w == 0.0 && h == 0.0 {
        return Ok(WassersteinEnergy { exact: 0.0, bound });
    }
    // a f int_{[-1,1]^(n-1)} sqrt(w^2 |p|^2 / 4 + h^2) dp, folded to [0,1]^(n-1).
    let integrand = |p: &[f64]| {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        (w * w * r2 / 4.0 + h * h).sqrt()
    };
    let inner_tol = quadrature_tol / (a * f * (1u64 << n1) as f64);
    let unit = adaptive_unit_cube(&integrand, n1, inner_tol);
    let exact = a * f * (1u64 << n1) as f64 * unit;
    Ok(WassersteinEnergy { exact, bound })
}

/// Exact urban planning cost of the flat 2D spread: the mass profile along
/// the face is `m(s) = f (1 - s / (w/2))` at distance `s` from the apex, and
/// the cost density `min{a m, m + eps}` integrates in closed form on the two
/// linear pieces split at `m = eps / (a - 1)`.
pub(crate) fn flat_spread_exact_2d(w: f64, f: f64, eps: f64, a: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let half = 0.5 * w;
    // s* where a m(s) = m(s) + eps; on-network piece is [0, s*].
    let s_star = if f * (a - 1.0) > eps {
        half * (1.0 - eps / ((a - 1.0) * f))
    } else {
        0.0
    };
    let int_m = |s0: f64, s1: f64| f * ((s1 - s0) - (s1 * s1 - s0 * s0) / w);
    let on = int_m(0.0, s_star) + eps * s_star;
    let off = a * int_m(s_star, half);
    2.0 * (on + off)
}
