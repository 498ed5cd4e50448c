//! Independent desk-scale oracles: exact Wasserstein-1 against a line
//! segment by monotone coupling, brute-force branched transport over all
//! tree topologies, and per-fiber quadrature re-deriving the cell energies.

use serde::Serialize;

use crate::cell::{CellKind, CellSpec};
use crate::cost::{bt_cost_rate, up_cost_rate};
use crate::error::{Error, Result};
use crate::measure::MeasureSpec;
use crate::params::{Model, ModelParams};
use crate::quad::{adaptive_simpson, adaptive_unit_cube};

/// Fixed-point tolerance of the weighted Fermat iteration.
pub const FERMAT_TOL: f64 = 1e-10;
/// Iteration cap per descent.
pub const FERMAT_MAX_ITER: usize = 10_000;
/// Regularisation added to distances so coincident points stay finite.
const FERMAT_REG: f64 = 1e-14;

/// A single source feeding at most a handful of sinks.
#[derive(Debug, Clone, Serialize)]
pub struct SmallInstance {
    pub source: (Vec<f64>, f64),
    pub sinks: Vec<(Vec<f64>, f64)>,
    /// Branched transport exponent, `0 <= eps < 1`.
    pub epsilon: f64,
}

impl SmallInstance {
    pub fn new(source: (Vec<f64>, f64), sinks: Vec<(Vec<f64>, f64)>, epsilon: f64) -> Result<Self> {
        if sinks.is_empty() {
            return Err(Error::InvalidParameter("need at least one sink".into()));
        }
        let dim = source.0.len();
        if dim < 2 || sinks.iter().any(|(p, _)| p.len() != dim) {
            return Err(Error::DimensionMismatch(
                "instance positions disagree".into(),
            ));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= eps < 1, got {epsilon}"
            )));
        }
        let total: f64 = sinks.iter().map(|(_, m)| m).sum();
        if (total - source.1).abs() > 1e-12 * source.1.max(total) {
            return Err(Error::MassMismatch(format!(
                "sink masses sum to {total:e}, source carries {:e}",
                source.1
            )));
        }
        Ok(SmallInstance {
            source,
            sinks,
            epsilon,
        })
    }
}

// ---------------------------------------------------------------------------
// Exact W1: uniform segment vs atoms on a parallel line (n = 2)
// ---------------------------------------------------------------------------

/// Exact Wasserstein-1 distance between a uniform segment and a line of
/// atoms at vertical offset `t`, minimised over the horizontal placement of
/// the segment.
///
/// The coupling is monotone (quantile blocks), optimal because the cost
/// `sqrt(dx^2 + t^2)` is convex in the horizontal displacement; each block
/// integrates in closed form via
/// `int sqrt(x^2+t^2) dx = x/2 sqrt(x^2+t^2) + t^2/2 asinh(x/t)`.
/// Minimising over the placement makes the value a lower bound over every
/// admissible density-capped measure, which is what the atom-bound
/// dominance check needs.
pub fn w1_segment_to_atoms_exact(segment: &MeasureSpec, atoms: &MeasureSpec) -> Result<f64> {
    let MeasureSpec::UniformHyperface {
        side,
        height,
        density,
    } = *segment
    else {
        return Err(Error::InvalidParameter(
            "segment must be a uniform hyperface".into(),
        ));
    };
    let MeasureSpec::Atoms(atom_list) = atoms else {
        return Err(Error::InvalidParameter(
            "atoms must be an atom measure".into(),
        ));
    };
    if atom_list.iter().any(|(p, _)| p.len() != 2) {
        return Err(Error::DimensionMismatch(
            "the exact oracle is 2D only".into(),
        ));
    }
    let line = atom_list[0].0[1];
    if atom_list.iter().any(|(p, _)| (p[1] - line).abs() > 1e-12) {
        return Err(Error::InvalidParameter(
            "atoms must sit on one horizontal line".into(),
        ));
    }
    let seg_mass = density * side;
    let atom_mass: f64 = atom_list.iter().map(|(_, m)| m).sum();
    if (seg_mass - atom_mass).abs() > 1e-12 * seg_mass.max(atom_mass) {
        return Err(Error::MassMismatch(format!(
            "segment mass {seg_mass:e} vs atom mass {atom_mass:e}"
        )));
    }
    let t = (line - height).abs();

    let mut sorted: Vec<(f64, f64)> = atom_list.iter().map(|(p, m)| (p[0], *m)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Quantile block boundaries relative to the segment start.
    let mut offsets = Vec::with_capacity(sorted.len() + 1);
    offsets.push(0.0);
    let mut acc = 0.0;
    for (_, m) in &sorted {
        acc += m / density;
        offsets.push(acc);
    }

    let cost = |start: f64| -> f64 {
        let mut total = 0.0;
        for (i, (x, _)) in sorted.iter().enumerate() {
            let lo = start + offsets[i] - x;
            let hi = start + offsets[i + 1] - x;
            total += density * (sqrt_antiderivative(hi, t) - sqrt_antiderivative(lo, t));
        }
        total
    };

    // Convex in the placement: golden-section to machine precision.
    let mut lo = sorted.first().unwrap().0 - side - t - 1.0;
    let mut hi = sorted.last().unwrap().0 + t + 1.0;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = cost(x1);
    let mut f2 = cost(x2);
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    Ok(cost(0.5 * (lo + hi)))
}

/// Antiderivative of `sqrt(x^2 + t^2)`.
fn sqrt_antiderivative(x: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.5 * x * x.abs();
    }
    0.5 * x * (x * x + t * t).sqrt() + 0.5 * t * t * (x / t).asinh()
}

/// Monotone-coupling cost for a fixed segment placement; exposed for the
/// discretised assignment cross-check.
pub fn w1_monotone_at(
    sorted_atoms: &[(f64, f64)],
    density: f64,
    t: f64,
    segment_start: f64,
) -> f64 {
    let mut total = 0.0;
    let mut acc = segment_start;
    for (x, m) in sorted_atoms {
        let width = m / density;
        total +=
            density * (sqrt_antiderivative(acc + width - x, t) - sqrt_antiderivative(acc - x, t));
        acc += width;
    }
    total
}

// ---------------------------------------------------------------------------
// Brute-force branched transport on <= 4 sinks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Topo {
    Leaf(usize),
    Node(Box<Topo>, Box<Topo>),
}

impl Topo {
    fn code(&self) -> String {
        match self {
            Topo::Leaf(i) => i.to_string(),
            Topo::Node(l, r) => format!("({},{})", l.code(), r.code()),
        }
    }
}

/// All full binary topologies over the given sink indices; subsets are split
/// with the smallest index pinned to the left branch so each unordered tree
/// appears once (1, 1, 3, 15 topologies for 1..=4 sinks).
fn enumerate_topologies(indices: &[usize]) -> Vec<Topo> {
    if indices.len() == 1 {
        return vec![Topo::Leaf(indices[0])];
    }
    let first = indices[0];
    let rest = &indices[1..];
    let mut out = Vec::new();
    // Every non-empty proper subset of `rest` can join `first` on the left.
    for mask in 0..(1u32 << rest.len()) {
        let mut left = vec![first];
        let mut right = Vec::new();
        for (j, &idx) in rest.iter().enumerate() {
            if mask >> j & 1 == 1 {
                left.push(idx);
            } else {
                right.push(idx);
            }
        }
        if right.is_empty() {
            continue;
        }
        for l in enumerate_topologies(&left) {
            for r in enumerate_topologies(&right) {
                out.push(Topo::Node(Box::new(l.clone()), Box::new(r.clone())));
            }
        }
    }
    out
}

/// Result of the brute-force search: minimal energy, the winning topology
/// code, and the optimised branch-point positions.
#[derive(Debug, Clone, Serialize)]
pub struct BruteForceResult {
    pub energy: f64,
    pub topology: String,
    pub branch_points: Vec<Vec<f64>>,
    /// First-order optimality certificate: the largest normalised residual
    /// `|sum_j w_j u_j| / sum_j w_j` of the weighted unit vectors pulling at
    /// any interior branch point. Points collapsed onto a neighbour satisfy
    /// a subgradient condition instead and are skipped.
    pub stationarity: f64,
}

struct TopoLayout {
    /// For each internal node: (left child, right child, parent); children
    /// and parent are either internal indices or terminal references.
    nodes: Vec<(Ref, Ref, Ref)>,
    /// Subtree mass below each internal node.
    mass: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ref {
    Source,
    Sink(usize),
    Internal(usize),
}

fn layout(topo: &Topo, sinks: &[(Vec<f64>, f64)]) -> TopoLayout {
    let mut nodes = Vec::new();
    let mut mass = Vec::new();
    fn build(
        topo: &Topo,
        sinks: &[(Vec<f64>, f64)],
        nodes: &mut Vec<(Ref, Ref, Ref)>,
        mass: &mut Vec<f64>,
    ) -> (Ref, f64) {
        match topo {
            Topo::Leaf(i) => (Ref::Sink(*i), sinks[*i].1),
            Topo::Node(l, r) => {
                let (lr, lm) = build(l, sinks, nodes, mass);
                let (rr, rm) = build(r, sinks, nodes, mass);
                let idx = nodes.len();
                nodes.push((lr, rr, Ref::Source)); // parent fixed up below
                mass.push(lm + rm);
                if let Ref::Internal(i) = lr {
                    nodes[i].2 = Ref::Internal(idx);
                }
                if let Ref::Internal(i) = rr {
                    nodes[i].2 = Ref::Internal(idx);
                }
                (Ref::Internal(idx), lm + rm)
            }
        }
    }
    let (root, _) = build(topo, sinks, &mut nodes, &mut mass);
    if let Ref::Internal(i) = root {
        nodes[i].2 = Ref::Source;
    }
    TopoLayout { nodes, mass }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn point_of<'a>(inst: &'a SmallInstance, pos: &'a [Vec<f64>], r: &Ref) -> &'a [f64] {
    match r {
        Ref::Source => &inst.source.0,
        Ref::Sink(i) => &inst.sinks[*i].0,
        Ref::Internal(i) => &pos[*i],
    }
}

fn tree_energy(inst: &SmallInstance, lay: &TopoLayout, pos: &[Vec<f64>], root: usize) -> f64 {
    let w = |m: f64| m.powf(1.0 - inst.epsilon);
    let mut energy = w(inst.source.1) * dist(&inst.source.0, &pos[root]);
    for (i, (l, r, _)) in lay.nodes.iter().enumerate() {
        for child in [l, r] {
            let m = match child {
                Ref::Sink(j) => inst.sinks[*j].1,
                Ref::Internal(j) => lay.mass[*j],
                Ref::Source => unreachable!("source is never a child"),
            };
            energy += w(m) * dist(&pos[i], point_of(inst, pos, child));
        }
    }
    energy
}

fn descend(inst: &SmallInstance, lay: &TopoLayout, pos: &mut [Vec<f64>], scale: f64) {
    let dim = inst.source.0.len();
    let n_internal = lay.nodes.len();
    let w = |m: f64| m.powf(1.0 - inst.epsilon);
    for _ in 0..FERMAT_MAX_ITER {
        let mut max_move = 0.0f64;
        for i in 0..n_internal {
            let (l, r, parent) = &lay.nodes[i];
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            let neighbors: [(&Ref, f64); 3] = [
                (
                    l,
                    match l {
                        Ref::Sink(j) => inst.sinks[*j].1,
                        Ref::Internal(j) => lay.mass[*j],
                        Ref::Source => unreachable!(),
                    },
                ),
                (
                    r,
                    match r {
                        Ref::Sink(j) => inst.sinks[*j].1,
                        Ref::Internal(j) => lay.mass[*j],
                        Ref::Source => unreachable!(),
                    },
                ),
                (parent, lay.mass[i]),
            ];
            for (nref, m) in neighbors {
                let p: &[f64] = match nref {
                    Ref::Source => &inst.source.0,
                    Ref::Sink(j) => &inst.sinks[*j].0,
                    Ref::Internal(j) => &pos[*j],
                };
                let d = dist(&pos[i], p) + FERMAT_REG;
                let coeff = w(m) / d;
                for (acc, x) in num.iter_mut().zip(p) {
                    *acc += coeff * x;
                }
                den += coeff;
            }
            let mut moved = 0.0f64;
            for (axis, acc) in num.iter().enumerate() {
                let new = acc / den;
                moved = moved.max((new - pos[i][axis]).abs());
                pos[i][axis] = new;
            }
            max_move = max_move.max(moved);
        }
        if max_move < FERMAT_TOL * scale {
            break;
        }
    }
}

/// Enumerate all full binary tree topologies over the sinks, optimise the
/// branch points of each by weighted Fermat fixed-point iteration, and
/// return the best tree. Ties break on the lexicographic topology code.
pub fn bt_bruteforce(inst: &SmallInstance) -> Result<BruteForceResult> {
    if inst.sinks.len() > 4 {
        return Err(Error::Unsupported(format!(
            "topology enumeration capped at 4 sinks, got {}",
            inst.sinks.len()
        )));
    }
    let dim = inst.source.0.len();
    let scale = {
        let mut lo = inst.source.0.clone();
        let mut hi = inst.source.0.clone();
        for (p, _) in &inst.sinks {
            for axis in 0..dim {
                lo[axis] = lo[axis].min(p[axis]);
                hi[axis] = hi[axis].max(p[axis]);
            }
        }
        1.0 + dist(&lo, &hi)
    };

    if inst.sinks.len() == 1 {
        // a single straight pipe, nothing to optimise
        let energy =
            inst.source.1.powf(1.0 - inst.epsilon) * dist(&inst.source.0, &inst.sinks[0].0);
        return Ok(BruteForceResult {
            energy,
            topology: "0".into(),
            branch_points: Vec::new(),
            stationarity: 0.0,
        });
    }

    let indices: Vec<usize> = (0..inst.sinks.len()).collect();
    let mut best: Option<BruteForceResult> = None;
    for topo in enumerate_topologies(&indices) {
        let lay = layout(&topo, &inst.sinks);
        let root = lay.nodes.len() - 1;

        // Two starts: everything collapsed on the source, and the mass
        // centroid; keep whichever descends lower.
        let centroid: Vec<f64> = {
            let mut acc = inst
                .source
                .0
                .iter()
                .map(|x| x * inst.source.1)
                .collect::<Vec<_>>();
            for (p, m) in &inst.sinks {
                for (a, x) in acc.iter_mut().zip(p) {
                    *a += m * x;
                }
            }
            acc.into_iter().map(|x| x / (2.0 * inst.source.1)).collect()
        };
        let mut candidates: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
        for start in [inst.source.0.clone(), centroid] {
            let mut pos: Vec<Vec<f64>> = vec![start.clone(); lay.nodes.len()];
            descend(inst, &lay, &mut pos, scale);
            // Snap branch points that nearly collapsed onto a neighbor; the
            // energy is evaluated on the snapped geometry if it helps.
            let mut energy = tree_energy(inst, &lay, &pos, root);
            let mut snapped = pos.clone();
            let mut snapped_any = false;
            for (i, p) in pos.iter().enumerate() {
                for neighbor in neighbor_points(inst, &lay, &pos, i) {
                    if dist(p, &neighbor) < 1e-7 * scale {
                        snapped[i] = neighbor.clone();
                        snapped_any = true;
                        break;
                    }
                }
            }
            if snapped_any {
                let e2 = tree_energy(inst, &lay, &snapped, root);
                if e2 < energy {
                    energy = e2;
                    pos = snapped;
                }
            }
            candidates.push((energy, pos));
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (energy, pos) = candidates.into_iter().next().expect("two starts");

        let stationarity = stationarity_residual(inst, &lay, &pos, scale);
        let result = BruteForceResult {
            energy,
            topology: topo.code(),
            branch_points: pos,
            stationarity,
        };
        best = Some(match best {
            None => result,
            Some(b) => {
                if result.energy < b.energy
                    || (result.energy == b.energy && result.topology < b.topology)
                {
                    result
                } else {
                    b
                }
            }
        });
    }
    Ok(best.expect("at least one topology"))
}

/// Largest normalised gradient residual over the interior branch points:
/// at a weighted Fermat point the pulls `w_j (x_j - p)/|x_j - p|` cancel.
/// Branch points within `1e-5 * scale` of a neighbour sit at a non-smooth
/// collapsed optimum and are skipped.
fn stationarity_residual(
    inst: &SmallInstance,
    lay: &TopoLayout,
    pos: &[Vec<f64>],
    scale: f64,
) -> f64 {
    let dim = inst.source.0.len();
    let w = |m: f64| m.powf(1.0 - inst.epsilon);
    let mut worst = 0.0f64;
    for (i, (l, r, parent)) in lay.nodes.iter().enumerate() {
        let masses = [
            match l {
                Ref::Sink(j) => inst.sinks[*j].1,
                Ref::Internal(j) => lay.mass[*j],
                Ref::Source => unreachable!(),
            },
            match r {
                Ref::Sink(j) => inst.sinks[*j].1,
                Ref::Internal(j) => lay.mass[*j],
                Ref::Source => unreachable!(),
            },
            lay.mass[i],
        ];
        let mut pull = vec![0.0; dim];
        let mut weight_sum = 0.0;
        let mut collapsed = false;
        for (nref, m) in [l, r, parent].into_iter().zip(masses) {
            let p = point_of(inst, pos, nref);
            let d = dist(&pos[i], p);
            if d < 1e-5 * scale {
                collapsed = true;
                break;
            }
            let coeff = w(m) / d;
            for (acc, (x, y)) in pull.iter_mut().zip(p.iter().zip(&pos[i])) {
                *acc += coeff * (x - y);
            }
            weight_sum += w(m);
        }
        if !collapsed {
            let norm = pull.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(norm / weight_sum);
        }
    }
    worst
}

fn neighbor_points(
    inst: &SmallInstance,
    lay: &TopoLayout,
    pos: &[Vec<f64>],
    i: usize,
) -> Vec<Vec<f64>> {
    let (l, r, parent) = &lay.nodes[i];
    [l, r, parent]
        .into_iter()
        .map(|r| match r {
            Ref::Source => inst.source.0.clone(),
            Ref::Sink(j) => inst.sinks[*j].0.clone(),
            Ref::Internal(j) => pos[*j].clone(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Cell energy by per-fiber quadrature
// ---------------------------------------------------------------------------

/// Re-derive a cell energy by integrating the cost density along each fiber
/// with flux-per-fiber bookkeeping, instead of using the closed forms.
/// Elementary cells carry constant flux `f` on each of the `2^(n-1)`
/// branches; flat 2D Wasserstein spreads carry the linear profile; all other
/// Wasserstein cells move mass at the off-network rate.
pub fn cell_energy_quadrature(cell: &CellSpec, params: &ModelParams, tol: f64) -> Result<f64> {
    if cell.dim() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "cell dimension {} vs parameter dimension {}",
            cell.dim(),
            params.n
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let n1 = params.n - 1;
    let eps = params.epsilon;
    match cell.kind {
        CellKind::Elementary => {
            let speed = cell.tube_length();
            if speed == 0.0 {
                return Ok(0.0);
            }
            let branches = 1u64 << n1;
            let per_tol = tol / branches as f64;
            let mut total = 0.0;
            for _ in 0..branches {
                let rate = |_t: f64| match params.model {
                    Model::UrbanPlanning { a } => up_cost_rate(cell.flux, eps, a) * cell.flux,
                    Model::BranchedTransport => bt_cost_rate(cell.flux, eps) * cell.flux,
                };
                total += adaptive_simpson(&|t| rate(t) * speed, 0.0, 1.0, per_tol);
            }
            Ok(total)
        }
        CellKind::Wasserstein => {
            let Model::UrbanPlanning { a } = params.model else {
                return Err(Error::ModelMismatch(
                    "Wasserstein cells are urban planning only".into(),
                ));
            };
            if params.n == 2 && cell.height == 0.0 {
                // Flux profile m(s) = f (1 - s/(w/2)) along the face.
                let half = cell.width / 2.0;
                if half == 0.0 {
                    return Ok(0.0);
                }
                let f = cell.flux;
                let integrand = |s: f64| {
                    let m = f * (1.0 - s / half);
                    up_cost_rate(m.max(0.0), eps, a) * m.max(0.0)
                };
                return Ok(2.0 * adaptive_simpson(&integrand, 0.0, half, tol / 2.0));
            }
            if cell.width == 0.0 && cell.height == 0.0 {
                return Ok(0.0);
            }
            let (w, h, f) = (cell.width, cell.height, cell.flux);
            let integrand = |p: &[f64]| {
                let r2: f64 = p.iter().map(|x| x * x).sum();
                (w * w * r2 / 4.0 + h * h).sqrt()
            };
            let scale = a * f * (1u64 << n1) as f64;
            let unit = adaptive_unit_cube(&integrand, n1, tol / scale);
            Ok(scale * unit)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{elementary_cell_energy, wasserstein_cell_energy};

    #[test]
    fn topology_counts() {
        for (k, expect) in [(1usize, 1usize), (2, 1), (3, 3), (4, 15)] {
            let indices: Vec<usize> = (0..k).collect();
            assert_eq!(enumerate_topologies(&indices).len(), expect);
        }
    }

    #[test]
    fn w1_worked_example() {
        let seg = MeasureSpec::uniform_hyperface(0.2, 0.0, 1.0).unwrap();
        let atoms = MeasureSpec::atoms(vec![(vec![0.0, 0.5], 0.2)]).unwrap();
        let w1 = w1_segment_to_atoms_exact(&seg, &atoms).unwrap();
        // best placement centres the preimage [-0.1, 0.1] under the atom
        let expect = 0.1 * 0.26f64.sqrt() + 0.25 * (0.2f64).asinh();
        assert!((w1 - expect).abs() < 1e-10);
        assert!((w1 - 0.1006628).abs() < 1e-7);
    }

    #[test]
    fn w1_zero_offset() {
        let seg = MeasureSpec::uniform_hyperface(0.2, 0.0, 1.0).unwrap();
        let atoms = MeasureSpec::atoms(vec![(vec![0.3, 0.0], 0.2)]).unwrap();
        let w1 = w1_segment_to_atoms_exact(&seg, &atoms).unwrap();
        assert!((w1 - 0.01).abs() < 1e-10);
    }

    #[test]
    fn w1_two_symmetric_atoms() {
        let seg = MeasureSpec::uniform_hyperface(0.4, 0.0, 1.0).unwrap();
        let atoms =
            MeasureSpec::atoms(vec![(vec![-0.5, 0.25], 0.2), (vec![0.5, 0.25], 0.2)]).unwrap();
        let w1 = w1_segment_to_atoms_exact(&seg, &atoms).unwrap();
        // the centred placement splits into two single-atom blocks [-0.2,0]
        // and [0,0.2] whose integrals add
        let t = 0.25;
        let block =
            |a: f64, b: f64, x: f64| sqrt_antiderivative(b - x, t) - sqrt_antiderivative(a - x, t);
        let expect = block(-0.2, 0.0, -0.5) + block(0.0, 0.2, 0.5);
        assert!((w1 - expect).abs() < 1e-9);
    }

    #[test]
    fn w1_mass_mismatch_rejected() {
        let seg = MeasureSpec::uniform_hyperface(0.3, 0.0, 1.0).unwrap();
        let atoms = MeasureSpec::atoms(vec![(vec![0.0, 0.5], 0.2)]).unwrap();
        assert!(w1_segment_to_atoms_exact(&seg, &atoms).is_err());
    }

    #[test]
    fn monotone_matches_discrete_assignment() {
        // 10 equal-mass segment samples vs 10 atom replicas: the monotone
        // coupling cost equals the optimal assignment found by bitmask DP.
        let atoms = [(-0.15f64, 0.2f64), (0.32, 0.3)];
        let density = 1.0;
        let t = 0.4;
        let start = -0.2;
        let total_mass: f64 = atoms.iter().map(|(_, m)| m).sum();
        let k = 10usize;
        let unit = total_mass / k as f64;
        // sample points: segment block midpoints and atom replicas
        let mut seg_points = Vec::new();
        for i in 0..k {
            seg_points.push(start + (i as f64 + 0.5) * unit / density);
        }
        let mut atom_points = Vec::new();
        for (x, m) in atoms {
            for _ in 0..((m / unit).round() as usize) {
                atom_points.push(x);
            }
        }
        assert_eq!(atom_points.len(), k);
        let cost = |i: usize, j: usize| {
            let dx: f64 = seg_points[i] - atom_points[j];
            (dx * dx + t * t).sqrt()
        };
        // assignment DP over subsets of atoms
        let full = 1usize << k;
        let mut dp = vec![f64::INFINITY; full];
        dp[0] = 0.0;
        for mask in 0..full {
            let i = (mask as u32).count_ones() as usize;
            if i >= k || dp[mask].is_infinite() {
                continue;
            }
            for j in 0..k {
                if mask >> j & 1 == 0 {
                    let next = mask | (1 << j);
                    let v = dp[mask] + cost(i, j);
                    if v < dp[next] {
                        dp[next] = v;
                    }
                }
            }
        }
        let assignment = unit * dp[full - 1];
        // monotone coupling on the same discretisation
        let monotone: f64 = (0..k).map(|i| unit * cost(i, i)).sum();
        assert!((assignment - monotone).abs() < 1e-12);
        // and the discretisation approximates the exact integral
        let exact = w1_monotone_at(&atoms, density, t, start);
        assert!((monotone - exact).abs() < 1e-3);
    }

    #[test]
    fn bruteforce_straight_at_eps0() {
        let inst = SmallInstance::new(
            (vec![0.0, 0.0], 1.0),
            vec![(vec![-0.25, 1.0], 0.5), (vec![0.25, 1.0], 0.5)],
            0.0,
        )
        .unwrap();
        let res = bt_bruteforce(&inst).unwrap();
        let straight = 2.0 * 0.5 * (0.0625f64 + 1.0).sqrt();
        assert!((straight - 1.0307764064044151).abs() < 1e-15);
        assert!(
            (res.energy - straight).abs() < 1e-9,
            "energy {}",
            res.energy
        );
    }

    #[test]
    fn bruteforce_v_beats_direct_at_half() {
        let inst = SmallInstance::new(
            (vec![0.0, 0.0], 1.0),
            vec![(vec![-0.25, 1.0], 0.5), (vec![0.25, 1.0], 0.5)],
            0.5,
        )
        .unwrap();
        let res = bt_bruteforce(&inst).unwrap();
        // closed form: branch point at (0, 0.75), cost 0.75 + sqrt(2)*sqrt(0.125)
        assert!((res.energy - 1.25).abs() < 1e-9, "energy {}", res.energy);
        let direct = 2.0 * 0.5f64.powf(0.5) * 1.0625f64.sqrt();
        assert!(res.energy < direct);
        let bp = &res.branch_points[0];
        assert!(bp[0].abs() < 1e-6 && (bp[1] - 0.75).abs() < 1e-6);
        // interior optimum, so the pulls must cancel
        assert!(res.stationarity < 1e-8, "stationarity {}", res.stationarity);
    }

    #[test]
    fn bruteforce_single_sink() {
        let inst =
            SmallInstance::new((vec![0.0, 0.0], 0.7), vec![(vec![0.3, 0.4], 0.7)], 0.35).unwrap();
        let res = bt_bruteforce(&inst).unwrap();
        assert!((res.energy - 0.7f64.powf(0.65) * 0.5).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_rejects_many_sinks() {
        let sinks: Vec<_> = (0..5).map(|i| (vec![i as f64, 1.0], 0.2)).collect();
        let inst = SmallInstance::new((vec![0.0, 0.0], 1.0), sinks, 0.5).unwrap();
        assert!(bt_bruteforce(&inst).is_err());
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let p_up = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let p_bt = ModelParams::branched_transport(0.1, 2, 1.0).unwrap();
        let cell = CellSpec::new(vec![0.0, 0.0], 1.0, 1.0, 0.5, CellKind::Elementary).unwrap();
        for p in [&p_up, &p_bt] {
            let closed = elementary_cell_energy(&cell, p).unwrap();
            let quad = cell_energy_quadrature(&cell, p, 1e-12).unwrap();
            assert!((closed - quad).abs() <= 1e-10 * closed);
        }
        // flat 2D Wasserstein spread, the 0.34 example
        let wcell = CellSpec::new(vec![0.0, 0.0], 1.0, 0.0, 0.5, CellKind::Wasserstein).unwrap();
        let quad = cell_energy_quadrature(&wcell, &p_up, 1e-12).unwrap();
        assert!((quad - 0.34).abs() < 1e-10);
        let closed = wasserstein_cell_energy(&wcell, &p_up, 1e-12).unwrap().exact;
        assert!((quad - closed).abs() < 1e-10);
    }

    #[test]
    fn degenerate_cell_has_zero_energy() {
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let cell = CellSpec::new(vec![0.0, 0.0], 0.0, 0.0, 0.5, CellKind::Elementary).unwrap();
        assert_eq!(cell_energy_quadrature(&cell, &p, 1e-12).unwrap(), 0.0);
    }
}
