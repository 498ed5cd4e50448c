//! A numerical laboratory for near-optimal hierarchical transport networks.
//!
//! Two transport models live here: urban planning (per-length cost
//! `min{a m, m + eps}` on mass flux `m`) and branched transport (cost
//! `m^(1-eps)`). Both favour merging flows into trees, and for uniform
//! boundary data on opposing hyperfaces the minimum energy exceeds the flat
//! transport cost by an excess that scales in `eps`. The crate builds the
//! near-optimal dyadic branching constructions for every dimension and
//! parameter regime, evaluates their energies exactly, instantiates them as
//! explicit flux graphs, computes lower-bound certificates, and sweeps
//! parameter grids to verify the scaling exponents numerically.
//!
//! Module map:
//! - [`params`], [`cost`], [`measure`], [`cell`], [`network`], [`report`]:
//!   domain types, the two cost densities, unit cells, and flux graphs.
//! - [`construction`]: layer schedules, analytic excess energy,
//!   instantiation, scaling envelopes.
//! - [`bounds`]: the Wasserstein atom bound and the entropy-constrained
//!   convex program with its closed-form dual.
//! - [`oracle`]: independent brute-force and quadrature cross-checks.
//! - [`sweep`], [`render`], [`verify`]: parameter sweeps with scaling fits,
//!   SVG output, and the acceptance suites.
//!
//! ```
//! use ramify_core::{excess_energy, plan, regime_envelope, ModelParams};
//!
//! let params = ModelParams::urban_planning(1e-4, 2.0, 2, 1.0)?;
//! let schedule = plan(&params, None)?;
//! let report = excess_energy(&schedule);
//! let ratio = report.excess / regime_envelope(&params);
//! assert!(report.excess > 0.0 && ratio > 0.1 && ratio < 100.0);
//! # Ok::<(), ramify_core::Error>(())
//! ```

// `!(x > 0.0)` is used throughout as the validation idiom: unlike `x <= 0.0`
// it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cell;
pub mod construction;
pub mod cost;
pub mod error;
pub mod measure;
pub mod network;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod render;
pub mod report;
pub mod sweep;
pub mod verify;

pub use cell::{
    elementary_cell_energy, wasserstein_cell_energy, CellKind, CellSpec, WassersteinEnergy,
};
pub use construction::{
    excess_energy, instantiate, plan, regime_envelope, ConstructionPlan, Instantiation, Regime,
    DEFAULT_CELL_BUDGET,
};
pub use cost::{bt_cost_rate, up_cost_rate};
pub use error::{Error, Result};
pub use measure::MeasureSpec;
pub use network::{
    cell_network, extract_network, network_energy, series, union, DiffuseRole, FluxNetwork, NodeId,
};
pub use params::{nondimensionalize, Model, ModelParams};
pub use report::{EnergyReport, LayerRow};
