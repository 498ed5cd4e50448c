//! Energy accounting.

use serde::Serialize;

/// Per-layer share of a construction's energy. Counts refer to one half of
/// the mirrored construction; energies include both halves.
#[derive(Debug, Clone, Serialize)]
pub struct LayerRow {
    /// Layer index, 1-based; the Wasserstein boundary layer is `K + 1`.
    pub k: u32,
    /// Number of cells in the layer, `N_k^(n-1)` (one half).
    pub cells: u128,
    /// Energy of a single cell.
    pub cell_energy: f64,
    /// Total energy of the layer over both halves.
    pub energy: f64,
    /// Energy above the vertical-transport reference, both halves.
    pub excess: f64,
}

/// Energy report: total, the reference `E* = density * ell^(n-1)` (the
/// epsilon-to-zero optimum), and the excess above it.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub total: f64,
    pub reference: f64,
    pub excess: f64,
    /// Per-layer breakdown; empty for energies summed over a raw network.
    pub per_layer: Vec<LayerRow>,
    /// Closed-form energy of the infinite branched-transport refinement tail
    /// (already contained in `total`).
    pub tail: Option<f64>,
}

impl EnergyReport {
    pub fn from_total(total: f64, reference: f64) -> Self {
        EnergyReport {
            total,
            reference,
            excess: total - reference,
            per_layer: Vec::new(),
            tail: None,
        }
    }
}
