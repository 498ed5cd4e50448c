//! Near-optimal hierarchical layer schedules, their analytic excess energy,
//! explicit instantiation as flux networks, and the scaling envelopes.
//!
//! A schedule stacks layers of identical elementary cells whose width halves
//! from layer to layer towards the boundary; urban planning discharges the
//! finest pipes through a layer of Wasserstein cells, branched transport
//! refines through an infinite in-plane tail summed in closed form. The
//! construction is mirrored about `x_n = 1/2`.

use serde::{Deserialize, Serialize};

use crate::cell::{elementary_cell_energy, wasserstein_cell_energy, CellKind, CellSpec};
use crate::error::{Error, Result};
use crate::network::{DiffuseRole, FluxNetwork, NodeId};
use crate::params::{Model, ModelParams};
use crate::report::{EnergyReport, LayerRow};

/// Default cap on the number of instantiated cells.
pub const DEFAULT_CELL_BUDGET: u64 = 10_000_000;

/// The construction regimes, one per dimension/parameter branch of the
/// scaling analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "up2d")]
    Up2d,
    #[serde(rename = "up3d-small-a")]
    Up3dSmallA,
    #[serde(rename = "up3d-large-a")]
    Up3dLargeA,
    #[serde(rename = "upnd-small-a")]
    UpNdSmallA,
    #[serde(rename = "upnd-large-a")]
    UpNdLargeA,
    #[serde(rename = "bt")]
    Bt,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Up2d => "up2d",
            Regime::Up3dSmallA => "up3d-small-a",
            Regime::Up3dLargeA => "up3d-large-a",
            Regime::UpNdSmallA => "upnd-small-a",
            Regime::UpNdLargeA => "upnd-large-a",
            Regime::Bt => "bt",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "up2d" => Some(Regime::Up2d),
            "up3d-small-a" => Some(Regime::Up3dSmallA),
            "up3d-large-a" => Some(Regime::Up3dLargeA),
            "upnd-small-a" => Some(Regime::UpNdSmallA),
            "upnd-large-a" => Some(Regime::UpNdLargeA),
            "bt" => Some(Regime::Bt),
            _ => None,
        }
    }
}

/// One layer of the schedule: `N_k^(n-1)` elementary cells of width `w_k`,
/// per-branch flux `f_k = (w_k/2)^(n-1)`, height `h_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    pub k: u32,
    pub width: f64,
    pub per_axis: u64,
    pub flux: f64,
    pub height: f64,
}

/// The boundary layer of Wasserstein cells (urban planning only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryLayer {
    pub width: f64,
    pub per_axis: u64,
    pub flux: f64,
    pub height: f64,
}

/// A fully determined construction: exponents, coarsest width, the height
/// prefactor, and the derived layer sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub params: ModelParams,
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Coarsest cell width `w_1 = c_tilde * eps^(-beta/alpha) a^(-gamma/alpha) (a-1)^(-delta/alpha)`.
    pub w1: f64,
    /// Integrality fudge in (1/2, 1] making `ell` a multiple of `w1`.
    pub c_tilde: f64,
    /// Height prefactor from the closure `2 (sum h_k + H) = 1`.
    pub c: f64,
    /// Number of branching layers `K`.
    pub k: u32,
    /// Layers with positive height before in-plane branching starts
    /// (3D large-a regime only).
    pub k_s: Option<u32>,
    /// Height `H` of the Wasserstein boundary layer.
    pub h_boundary: f64,
    pub layers: Vec<Layer>,
    /// Wasserstein boundary layer; `None` for branched transport.
    pub boundary: Option<BoundaryLayer>,
}

impl ConstructionPlan {
    /// Base height of layer `k` (1-based) in the upper half.
    pub fn layer_base_height(&self, k: u32) -> f64 {
        0.5 + self
            .layers
            .iter()
            .take(k as usize - 1)
            .map(|l| l.height)
            .sum::<f64>()
    }

    /// `2 (sum h_k + H)`, which the schedule closes to 1.
    pub fn height_closure(&self) -> f64 {
        2.0 * (self.layers.iter().map(|l| l.height).sum::<f64>() + self.h_boundary)
    }

    /// Geometric ratio of consecutive branched-transport tail terms,
    /// `2^(eps (n-1) - 1)`.
    fn tail_ratio(&self) -> f64 {
        let n1 = (self.params.n - 1) as f64;
        2f64.powf(self.params.epsilon * n1 - 1.0)
    }

    /// Energy of the in-plane tail layer of width `w` (one half), `N^(n-1)`
    /// flat cells of `2^(n-1)` branches each.
    fn tail_layer_energy(&self, width: f64) -> f64 {
        let n1 = (self.params.n - 1) as i32;
        let ell = self.params.ell;
        // N^(n-1) * 2^(n-1) (w/2)^((n-1)(1-eps)) * sqrt(n-1)/4 * w
        let cells = (ell / width).powi(n1);
        let flux = (width / 2.0).powi(n1);
        let per_cell = 2f64.powi(n1)
            * flux.powf(1.0 - self.params.epsilon)
            * ((n1 as f64).sqrt() / 4.0)
            * width;
        cells * per_cell
    }

    /// Closed-form energy of the infinite branched-transport tail strictly
    /// below layer `K + skip + 1`, both halves.
    pub fn tail_energy_after(&self, skip: u32) -> f64 {
        if self.regime != Regime::Bt {
            return 0.0;
        }
        let w_last = self.layers.last().expect("BT plan has layers").width;
        let first_width = w_last / 2f64.powi(skip as i32 + 1);
        let r = self.tail_ratio();
        2.0 * self.tail_layer_energy(first_width) / (1.0 - r)
    }
}

fn admissibility(regime: Regime, p: &ModelParams) -> Result<()> {
    let eps = p.epsilon;
    let ell = p.ell;
    let n = p.n as i32;
    let fail = |condition: String| Err(Error::Admissibility { condition });
    match regime {
        Regime::Up2d => {
            let bound = 1f64.min(ell.powi(3));
            if eps >= bound {
                return fail(format!(
                    "2D requires eps < min{{1, ell^3}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
        Regime::Up3dSmallA => {
            let a = p.model.a().unwrap_or(f64::NAN);
            if a > 2.0 {
                return fail(format!("3D small-a requires a <= 2, got a = {a}"));
            }
            let bound = (a * a * (a - 1.0) * (a - 1.0) / 64.0).min(ell.powi(4));
            if eps > bound {
                return fail(format!(
                    "3D small-a requires eps <= min{{a^2 (a-1)^2 / 64, ell^4}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
        Regime::Up3dLargeA => {
            let bound = 1f64.min(ell.powi(4));
            if eps > bound {
                return fail(format!(
                    "3D large-a requires eps <= min{{1, ell^4}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
        Regime::UpNdSmallA => {
            let a = p.model.a().unwrap_or(f64::NAN);
            if a > 2.0 {
                return fail(format!("nD small-a requires a <= 2, got a = {a}"));
            }
            let nn = n as f64;
            let t2 = (a * (a - 1.0)).sqrt().powi(n + 1) / 2f64.sqrt().powi(n * n - 1);
            let t3 =
                ((a - 1.0).powi(n + 1) / ((2.0 * (nn - 1.0)).powi(n - 1) * a.powi(n - 3))).sqrt();
            let bound = 1f64.min(t2).min(t3).min(ell.powi(n + 1));
            if eps > bound {
                return fail(format!(
                    "nD small-a requires eps <= min{{1, sqrt(a(a-1))^(n+1)/sqrt(2)^(n^2-1), sqrt((a-1)^(n+1)/((2(n-1))^(n-1) a^(n-3))), ell^(n+1)}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
        Regime::UpNdLargeA => {
            let a = p.model.a().unwrap_or(f64::NAN);
            if a < 2.0 {
                return fail(format!("nD large-a requires a >= 2, got a = {a}"));
            }
            let bound = 1f64.min(ell.powi(n + 1));
            if eps > bound {
                return fail(format!(
                    "nD large-a requires eps <= min{{1, ell^(n+1)}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
        Regime::Bt => {
            let n1 = (p.n - 1) as f64;
            let bound = (1.0 / (2.0 * n1)).min(ell.powi(2));
            if eps >= bound {
                return fail(format!(
                    "branched transport requires eps < min{{1/(2(n-1)), ell^2}} = {bound:e}, got eps = {eps:e}"
                ));
            }
        }
    }
    Ok(())
}

fn select_regime(p: &ModelParams, hint: Option<Regime>) -> Result<Regime> {
    if let Some(regime) = hint {
        let want_up = regime != Regime::Bt;
        if want_up != p.model.is_urban_planning() {
            return Err(Error::ModelMismatch(format!(
                "regime {} does not match model {}",
                regime.tag(),
                p.model.tag()
            )));
        }
        admissibility(regime, p)?;
        return Ok(regime);
    }
    match p.model {
        Model::BranchedTransport => {
            admissibility(Regime::Bt, p)?;
            Ok(Regime::Bt)
        }
        Model::UrbanPlanning { a } => match p.n {
            2 => {
                admissibility(Regime::Up2d, p)?;
                Ok(Regime::Up2d)
            }
            3 => {
                // the small-a construction is preferred wherever it applies
                if a <= 2.0 && admissibility(Regime::Up3dSmallA, p).is_ok() {
                    Ok(Regime::Up3dSmallA)
                } else {
                    admissibility(Regime::Up3dLargeA, p)?;
                    Ok(Regime::Up3dLargeA)
                }
            }
            _ => {
                if a <= 2.0 && admissibility(Regime::UpNdSmallA, p).is_ok() {
                    Ok(Regime::UpNdSmallA)
                } else if a >= 2.0 {
                    admissibility(Regime::UpNdLargeA, p)?;
                    Ok(Regime::UpNdLargeA)
                } else {
                    // a < 2 but outside the small-a eps range: no construction covers it
                    admissibility(Regime::UpNdSmallA, p)?;
                    unreachable!("admissibility above must fail");
                }
            }
        },
    }
}

/// Build the fully determined schedule for `params`. The regime is selected
/// from `(n, a, eps)` per the admissibility conditions unless `regime_hint` is
/// given; admissibility violations name the failed condition.
pub fn plan(params: &ModelParams, regime_hint: Option<Regime>) -> Result<ConstructionPlan> {
    if params.density != 1.0 {
        return Err(Error::InvalidParameter(
            "construction schedules assume unit boundary density; normalise with nondimensionalize first"
                .into(),
        ));
    }
    let regime = select_regime(params, regime_hint)?;
    let n = params.n;
    let n1 = n as i32 - 1;
    let eps = params.epsilon;
    let a = params.model.a().unwrap_or(f64::NAN);
    let ell = params.ell;

    let (alpha, beta, gamma, delta) = match regime {
        Regime::Up2d => (1.5, -0.5, 0.0, 0.0),
        Regime::Up3dSmallA | Regime::Up3dLargeA => (2.0, -0.5, 0.0, 0.0),
        Regime::UpNdSmallA => ((n as f64 + 1.0) / 2.0, -0.5, 0.0, 0.0),
        Regime::UpNdLargeA => ((n as f64 + 1.0) / 2.0, -0.5, 0.25, 0.25),
        Regime::Bt => (2.0, -1.0, 0.0, 0.0),
    };

    // Target coarsest width; c_tilde in (1/2, 1] realises integrality of ell/w1.
    let target = eps.powf(-beta / alpha)
        * if gamma != 0.0 {
            a.powf(-gamma / alpha)
        } else {
            1.0
        }
        * if delta != 0.0 {
            (a - 1.0).powf(-delta / alpha)
        } else {
            1.0
        };
    let n_coarse = (ell / target).ceil().max(1.0);
    if n_coarse > 2f64.powi(40) {
        return Err(Error::Infeasible(format!(
            "coarsest layer needs {n_coarse} cells per axis"
        )));
    }
    let n_coarse = n_coarse as u64;
    let w1 = ell / n_coarse as f64;
    let c_tilde = w1 / target;
    if !(c_tilde > 0.5 - 1e-9 && c_tilde <= 1.0 + 1e-9) {
        return Err(Error::Infeasible(format!(
            "integrality fudge c_tilde = {c_tilde} fell outside (1/2, 1]"
        )));
    }

    let k: i64 = match regime {
        Regime::Up2d => (2.0 + (w1 * eps.powf(beta / (alpha - 1.0))).log2()).floor() as i64,
        Regime::Up3dSmallA => ((a * (a - 1.0)).sqrt() / eps.powf(0.25)).log2().floor() as i64,
        Regime::Up3dLargeA => {
            let k_s = (4.0 * eps.powf(-0.25)).log2().floor() as i64;
            k_s + a.sqrt().log2().floor() as i64
        }
        Regime::UpNdSmallA => ((a * (a - 1.0)).powf(1.0 / n1 as f64)
            * eps.powf(-2.0 / (n * n - 1) as f64))
        .log2()
        .floor() as i64,
        Regime::UpNdLargeA => (2.0
            * c_tilde
            * (n1 as f64).sqrt()
            * (a * (a - 1.0)).powf(1.0 / ((n * n - 1) as f64))
            * eps.powf(-2.0 / (n * n - 1) as f64))
        .log2()
        .floor() as i64,
        Regime::Bt => {
            1 + (2.0 * c_tilde * eps.powf(beta / (alpha * (alpha - 1.0))))
                .log2()
                .floor() as i64
        }
    };
    if k < 1 {
        return Err(Error::Infeasible(format!("layer count K = {k} < 1")));
    }
    let k = k as u32;

    let k_s: Option<u32> = match regime {
        Regime::Up3dLargeA => {
            let ks = (4.0 * eps.powf(-0.25)).log2().floor() as i64;
            if ks < 1 {
                return Err(Error::Infeasible(format!(
                    "straight layer count K_S = {ks} < 1"
                )));
            }
            Some((ks as u32).min(k))
        }
        _ => None,
    };

    // Width of the boundary layer, w_(K+1) = w1 / 2^K.
    let w_boundary = w1 / 2f64.powi(k as i32);
    let h_boundary = match regime {
        Regime::Up2d | Regime::Up3dLargeA | Regime::Bt => 0.0,
        Regime::Up3dSmallA | Regime::UpNdSmallA | Regime::UpNdLargeA => {
            (n1 as f64 * a / (32.0 * (a - 1.0))).sqrt() * w_boundary
        }
    };
    if h_boundary > 0.25 {
        return Err(Error::Infeasible(format!(
            "Wasserstein layer height H = {h_boundary} exceeds 1/4"
        )));
    }

    // Height prefactor from the closure 2 (sum h_k + H) = 1; only layers up to
    // K_S carry height in the 3D large-a regime.
    let k_height = k_s.unwrap_or(k);
    let c = (1.0 - 2.0 * h_boundary) / (2.0 * c_tilde.powf(alpha)) * (1.0 - 2f64.powf(-alpha))
        / (1.0 - 2f64.powf(-(k_height as f64) * alpha));

    let mut layers = Vec::with_capacity(k as usize);
    let mut width = w1;
    let mut per_axis = n_coarse;
    for idx in 1..=k {
        let height = if idx <= k_height {
            c * width.powf(alpha)
                * eps.powf(beta)
                * if gamma != 0.0 { a.powf(gamma) } else { 1.0 }
                * if delta != 0.0 {
                    (a - 1.0).powf(delta)
                } else {
                    1.0
                }
        } else {
            0.0
        };
        layers.push(Layer {
            k: idx,
            width,
            per_axis,
            flux: (width / 2.0).powi(n1),
            height,
        });
        width /= 2.0;
        per_axis = per_axis
            .checked_mul(2)
            .ok_or_else(|| Error::Infeasible("cells per axis overflow".into()))?;
    }

    let boundary = match regime {
        Regime::Bt => None,
        _ => Some(BoundaryLayer {
            width: w_boundary,
            per_axis,
            flux: (w_boundary / 2.0).powi(n1),
            height: h_boundary,
        }),
    };

    let plan = ConstructionPlan {
        params: params.clone(),
        regime,
        alpha,
        beta,
        gamma,
        delta,
        w1,
        c_tilde,
        c,
        k,
        k_s,
        h_boundary,
        layers,
        boundary,
    };
    debug_assert!((plan.height_closure() - 1.0).abs() < 1e-11);
    Ok(plan)
}

/// Analytic excess energy of a plan: exact closed-form layer sums, the
/// Wasserstein boundary term for urban planning, or the geometric tail for
/// branched transport. Never instantiates cells.
pub fn excess_energy(plan: &ConstructionPlan) -> EnergyReport {
    let p = &plan.params;
    let n1 = p.n as i32 - 1;
    let reference = p.density * p.ell.powi(n1);
    let mut per_layer = Vec::with_capacity(plan.layers.len() + 1);
    let mut total = 0.0;

    for layer in &plan.layers {
        let cell = CellSpec::new(
            vec![0.0; p.n],
            layer.width,
            layer.height,
            layer.flux,
            CellKind::Elementary,
        )
        .expect("layer cell is valid");
        let cell_energy = elementary_cell_energy(&cell, p).expect("elementary layer energy");
        let cells = (layer.per_axis as u128).pow(n1 as u32);
        let cell_reference = layer.width.powi(n1) * layer.height;
        let energy = 2.0 * cells as f64 * cell_energy;
        let excess = 2.0 * cells as f64 * (cell_energy - cell_reference);
        per_layer.push(LayerRow {
            k: layer.k,
            cells,
            cell_energy,
            energy,
            excess,
        });
        total += energy;
    }

    if let Some(boundary) = &plan.boundary {
        let cell = CellSpec::new(
            vec![0.0; p.n],
            boundary.width,
            boundary.height,
            boundary.flux,
            CellKind::Wasserstein,
        )
        .expect("boundary cell is valid");
        let tol = crate::network::wasserstein_tol(&cell, p);
        let we = wasserstein_cell_energy(&cell, p, tol).expect("boundary layer energy");
        let cells = (boundary.per_axis as u128).pow(n1 as u32);
        let cell_reference = boundary.width.powi(n1) * boundary.height;
        let energy = 2.0 * cells as f64 * we.exact;
        let excess = 2.0 * cells as f64 * (we.exact - cell_reference);
        per_layer.push(LayerRow {
            k: plan.k + 1,
            cells,
            cell_energy: we.exact,
            energy,
            excess,
        });
        total += energy;
    }

    let tail = match plan.regime {
        Regime::Bt => {
            let t = plan.tail_energy_after(0);
            total += t;
            Some(t)
        }
        _ => None,
    };

    EnergyReport {
        total,
        reference,
        excess: total - reference,
        per_layer,
        tail,
    }
}

/// The scaling envelope `min{a - 1, f(eps, a)}` for urban planning, or
/// `eps |log eps|` for branched transport (natural logarithm).
pub fn regime_envelope(params: &ModelParams) -> f64 {
    let eps = params.epsilon;
    match params.model {
        Model::BranchedTransport => eps * eps.ln().abs(),
        Model::UrbanPlanning { a } => {
            let n = params.n;
            let f = match n {
                2 => eps.powf(2.0 / 3.0),
                3 => eps.sqrt() * (a.sqrt() + ((a - 1.0) / eps.sqrt()).ln().abs()),
                _ => {
                    a.sqrt()
                        * (a - 1.0).sqrt().powf((n as f64 - 3.0) / (n as f64 - 1.0))
                        * eps.powf(1.0 / (n as f64 - 1.0))
                }
            };
            (a - 1.0).min(f)
        }
    }
}

/// An instantiated plan: the explicit mirrored network and, for branched
/// transport, the closed-form energy of the tail that was not built.
#[derive(Debug)]
pub struct Instantiation {
    pub network: FluxNetwork,
    /// Energy of the untruncated refinement tail (both halves); zero for
    /// urban planning plans.
    pub truncated_tail: f64,
}

/// Multi-index grid of node positions `((i + 1/2) w, ..., z)`, lexicographic.
fn add_grid(net: &mut FluxNetwork, per_axis: u64, width: f64, z: f64, n: usize) -> Vec<NodeId> {
    let m = n - 1;
    let count = (per_axis as u128).pow(m as u32) as usize;
    let mut ids = Vec::with_capacity(count);
    let mut pos = vec![0.0; n];
    pos[m] = z;
    for linear in 0..count {
        let mut rest = linear as u64;
        // lexicographic multi-index: the last axis varies fastest
        for axis in (0..m).rev() {
            let i = rest % per_axis;
            rest /= per_axis;
            pos[axis] = (i as f64 + 0.5) * width;
        }
        ids.push(net.add_node(&pos));
    }
    ids
}

/// Connect a parent grid to its refinement: cell `i` feeds the `2^(n-1)`
/// children at multi-indices `2i + b`.
fn connect_layers(
    net: &mut FluxNetwork,
    parents: &[NodeId],
    children: &[NodeId],
    per_axis: u64,
    flux: f64,
    n: usize,
    upward: bool,
) {
    let m = n - 1;
    let child_axis = per_axis * 2;
    for (linear, &parent) in parents.iter().enumerate() {
        let mut multi = vec![0u64; m];
        let mut rest = linear as u64;
        for axis in (0..m).rev() {
            multi[axis] = rest % per_axis;
            rest /= per_axis;
        }
        for code in 0..(1u64 << m) {
            let mut child_linear: u64 = 0;
            for (axis, &i) in multi.iter().enumerate() {
                let b = code >> (m - 1 - axis) & 1;
                child_linear = child_linear * child_axis + (2 * i + b);
            }
            let child = children[child_linear as usize];
            if upward {
                net.add_pipe(parent, child, flux);
            } else {
                net.add_pipe(child, parent, flux);
            }
        }
    }
}

/// Build the explicit mirrored network of a plan.
///
/// All scheduled layers are built; `max_tail_layers` controls how many
/// in-plane refinement layers of the branched-transport tail are added
/// beyond them (the remainder is reported as `truncated_tail`). Fails if the
/// total cell count exceeds `cell_budget`.
pub fn instantiate(
    plan: &ConstructionPlan,
    max_tail_layers: u32,
    cell_budget: u64,
) -> Result<Instantiation> {
    let p = &plan.params;
    let n = p.n;
    let m = n - 1;

    let mut cells_needed: u128 = 0;
    for layer in &plan.layers {
        cells_needed += 2 * (layer.per_axis as u128).pow(m as u32);
    }
    if let Some(b) = &plan.boundary {
        cells_needed += 2 * (b.per_axis as u128).pow(m as u32);
    }
    if plan.regime == Regime::Bt {
        let last = plan.layers.last().expect("BT plan has layers");
        for j in 1..=max_tail_layers {
            cells_needed += 2 * ((last.per_axis as u128) << j).pow(m as u32);
        }
    }
    if cells_needed > cell_budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: cells_needed,
            budget: cell_budget,
        });
    }

    let mut net = FluxNetwork::new(n);
    let trunk = add_grid(
        &mut net,
        plan.layers[0].per_axis,
        plan.layers[0].width,
        0.5,
        n,
    );

    // Upper half: coarse at the centre, refining towards x_n = 1.
    for half in [true, false] {
        // `half`: true builds upward (spread side), false the mirror image.
        let mut prev = trunk.clone();
        let mut z = 0.5;
        for layer in &plan.layers {
            let z_next = if half {
                z + layer.height
            } else {
                z - layer.height
            };
            let children = add_grid(&mut net, layer.per_axis * 2, layer.width / 2.0, z_next, n);
            connect_layers(
                &mut net,
                &prev,
                &children,
                layer.per_axis,
                layer.flux,
                n,
                half,
            );
            prev = children;
            z = z_next;
        }

        if let Some(boundary) = &plan.boundary {
            let role = if half {
                DiffuseRole::Spread
            } else {
                DiffuseRole::Gather
            };
            for &node in &prev {
                let node_pos = net.position(node).to_vec();
                let mut base = node_pos;
                if !half {
                    base[m] -= boundary.height;
                }
                let cell = CellSpec::new(
                    base,
                    boundary.width,
                    boundary.height,
                    boundary.flux,
                    CellKind::Wasserstein,
                )?;
                net.add_diffuse(node, cell, role);
            }
        } else {
            // Branched transport: instantiate part of the in-plane tail, then
            // terminate with boundary marks carrying the incoming flux.
            let last = plan.layers.last().expect("BT plan has layers");
            let mut per_axis = last.per_axis * 2;
            let mut width = last.width / 2.0;
            let mut flux = last.flux;
            for _ in 0..max_tail_layers {
                let children = add_grid(&mut net, per_axis * 2, width / 2.0, z, n);
                let tail_flux = (width / 2.0).powi(m as i32);
                connect_layers(&mut net, &prev, &children, per_axis, tail_flux, n, half);
                prev = children;
                per_axis *= 2;
                width /= 2.0;
                flux = tail_flux;
            }
            for &node in &prev {
                if half {
                    net.mark_sink(node, flux);
                } else {
                    net.mark_source(node, flux);
                }
            }
        }
    }

    let truncated_tail = plan.tail_energy_after(max_tail_layers);
    Ok(Instantiation {
        network: net,
        truncated_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::network_energy;

    #[test]
    fn plan_up2d_example() {
        let p = ModelParams::urban_planning(1e-6, 2.0, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        assert_eq!(plan.regime, Regime::Up2d);
        assert!((plan.w1 - 0.01).abs() < 1e-15);
        assert!((plan.c_tilde - 1.0).abs() < 1e-12);
        assert_eq!(plan.k, 15);
        assert!((plan.height_closure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plan_up3d_small_a_example() {
        let p = ModelParams::urban_planning(1e-6, 1.5, 3, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        assert_eq!(plan.regime, Regime::Up3dSmallA);
        assert!((plan.w1 - 1.0 / 32.0).abs() < 1e-15);
        assert!((plan.c_tilde - 0.98821).abs() < 1e-4);
        assert_eq!(plan.k, 4);
        assert!(plan.h_boundary > 0.0 && plan.h_boundary <= 0.25);
    }

    #[test]
    fn plan_bt_example() {
        let p = ModelParams::branched_transport(1e-4, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        assert_eq!(plan.regime, Regime::Bt);
        assert!((plan.w1 - 0.01).abs() < 1e-15);
        assert_eq!(plan.k, 8);
        let w_k = plan.layers.last().unwrap().width;
        assert!((w_k - 7.8125e-5).abs() < 1e-18);
        assert!(w_k >= plan.params.epsilon / 2.0 && w_k < plan.params.epsilon);
        assert!((plan.height_closure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_eps_names_condition() {
        let p = ModelParams::urban_planning(2.0, 2.0, 2, 1.0).unwrap();
        let err = plan(&p, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("min{1, ell^3}"), "message was: {msg}");
    }

    #[test]
    fn dyadic_widths_and_counts() {
        let p = ModelParams::urban_planning(1e-5, 1.8, 3, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        for pair in plan.layers.windows(2) {
            assert_eq!(pair[1].width, pair[0].width / 2.0);
            assert_eq!(pair[1].per_axis, pair[0].per_axis * 2);
        }
        for layer in &plan.layers {
            let prod = layer.per_axis as f64 * layer.width;
            assert!((prod - plan.params.ell).abs() <= 1e-15 * plan.params.ell);
        }
    }

    #[test]
    fn c_stays_in_stated_range() {
        for (eps, a, n) in [
            (1e-4, 1.5, 2),
            (1e-5, 2.0, 3),
            (1e-4, 3.0, 3),
            (1e-4, 1.5, 4),
        ] {
            let p = ModelParams::urban_planning(eps, a, n, 1.0).unwrap();
            let plan = plan(&p, None).unwrap();
            let lo = (1.0 - 2f64.powf(-plan.alpha)) / 4.0;
            let hi = 2f64.powf(plan.alpha - 1.0);
            assert!(
                plan.c >= lo - 1e-12 && plan.c <= hi + 1e-12,
                "c = {} for {:?}",
                plan.c,
                plan.regime
            );
        }
    }

    #[test]
    fn envelope_examples() {
        let p2 = ModelParams::urban_planning(1e-6, 2.0, 2, 1.0).unwrap();
        assert!((regime_envelope(&p2) - 1e-4).abs() < 1e-17);
        let p3 = ModelParams::urban_planning(1e-6, 2.0, 3, 1.0).unwrap();
        assert!((regime_envelope(&p3) - 8.3219688e-3).abs() < 1e-9);
        let pb = ModelParams::branched_transport(1e-4, 2, 1.0).unwrap();
        assert!((regime_envelope(&pb) - 9.210340371976184e-4).abs() < 1e-15);
    }

    #[test]
    fn dual_path_small_2d() {
        let p = ModelParams::urban_planning(1e-2, 2.0, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        let analytic = excess_energy(&plan);
        let inst = instantiate(&plan, 0, DEFAULT_CELL_BUDGET).unwrap();
        inst.network.validate().unwrap();
        let graph = network_energy(&inst.network, &p).unwrap();
        assert!((graph.total - analytic.total).abs() <= 1e-9 * analytic.total);
        assert!((graph.reference - analytic.reference).abs() <= 1e-12);
    }

    #[test]
    fn dual_path_bt_with_truncation() {
        let p = ModelParams::branched_transport(1e-2, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        let analytic = excess_energy(&plan);
        for tail_layers in [0u32, 2, 4] {
            let inst = instantiate(&plan, tail_layers, DEFAULT_CELL_BUDGET).unwrap();
            inst.network.validate().unwrap();
            let graph = network_energy(&inst.network, &p).unwrap();
            let rebuilt = graph.total + inst.truncated_tail;
            assert!(
                (rebuilt - analytic.total).abs() <= 1e-9 * analytic.total,
                "tail_layers={tail_layers}: {rebuilt} vs {}",
                analytic.total
            );
        }
    }

    #[test]
    fn mirrored_boundaries() {
        let p = ModelParams::branched_transport(1e-2, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        let inst = instantiate(&plan, 1, DEFAULT_CELL_BUDGET).unwrap();
        let net = &inst.network;
        let mut sink_xs: Vec<f64> = net
            .sinks
            .iter()
            .map(|(id, _)| net.position(*id)[0])
            .collect();
        let mut source_xs: Vec<f64> = net
            .sources
            .iter()
            .map(|(id, _)| net.position(*id)[0])
            .collect();
        sink_xs.sort_by(f64::total_cmp);
        source_xs.sort_by(f64::total_cmp);
        assert_eq!(sink_xs, source_xs);
        for (id, _) in &net.sinks {
            assert!((net.height(*id) - 1.0).abs() < 1e-12);
        }
        for (id, _) in &net.sources {
            assert!(net.height(*id).abs() < 1e-12);
        }
    }

    #[test]
    fn bt_single_layer_plan_sums_by_hand() {
        // geometry chosen so the schedule collapses to K = 1; the excess is
        // then one layer term plus the geometric tail, summable by hand
        let p = ModelParams::branched_transport(0.45, 2, 0.71).unwrap();
        let plan = plan(&p, None).unwrap();
        assert_eq!(plan.k, 1);
        let layer = &plan.layers[0];
        let cell_energy = 2.0
            * layer.flux.powf(1.0 - p.epsilon)
            * (layer.width * layer.width / 16.0 + layer.height * layer.height).sqrt();
        let layer_excess = 2.0 * layer.per_axis as f64 * (cell_energy - layer.width * layer.height);
        let tail_first = {
            let w = layer.width / 2.0;
            (p.ell / w) * 2.0 * (w / 2.0).powf(1.0 - p.epsilon) * (1.0 / 4.0) * w
        };
        let r = 2f64.powf(p.epsilon - 1.0);
        let tail = 2.0 * tail_first / (1.0 - r);
        let rep = excess_energy(&plan);
        assert!((rep.tail.unwrap() - tail).abs() <= 1e-14 * tail);
        assert!((rep.excess - (layer_excess + tail)).abs() <= 1e-12 * rep.excess.abs());
    }

    #[test]
    fn budget_is_enforced() {
        let p = ModelParams::urban_planning(1e-4, 2.0, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        assert!(matches!(
            instantiate(&plan, 0, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
