//! Computable lower-bound certificates: the Wasserstein atom bound with the
//! explicit proof constants, and the entropy-constrained convex program with
//! its closed-form dual.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on the primal feasibility constraints.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Volume of the unit ball in `R^k` (`omega_1 = 2`, `omega_2 = pi`, then the
/// two-step recurrence `omega_k = 2 pi / k * omega_(k-2)`).
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / k as f64 * unit_ball_volume(k - 2),
    }
}

/// Transporting a discrete measure of `atom_count` atoms and total mass
/// `atom_total_mass` across a gap of `separation` onto a density-capped
/// absolutely continuous measure.
#[derive(Debug, Clone, Serialize)]
pub struct AtomBoundInstance {
    pub density_cap: f64,
    pub atom_total_mass: f64,
    pub atom_count: usize,
    pub separation: f64,
    pub dimension: usize,
    /// Radius of a single disk if the continuous side were `atom_count`
    /// equal disks at full density.
    pub radius: f64,
}

impl AtomBoundInstance {
    pub fn new(
        density_cap: f64,
        atom_total_mass: f64,
        atom_count: usize,
        separation: f64,
        dimension: usize,
    ) -> Result<Self> {
        if !(density_cap > 0.0) || !(atom_total_mass > 0.0) {
            return Err(Error::InvalidParameter(
                "masses and densities must be positive".into(),
            ));
        }
        if atom_count < 1 {
            return Err(Error::InvalidParameter("need at least one atom".into()));
        }
        if !(separation >= 0.0) {
            return Err(Error::InvalidParameter(
                "separation must be non-negative".into(),
            ));
        }
        if dimension < 2 {
            return Err(Error::InvalidParameter("dimension must be >= 2".into()));
        }
        let m = dimension - 1;
        let radius = (atom_total_mass / (density_cap * atom_count as f64 * unit_ball_volume(m)))
            .powf(1.0 / m as f64);
        Ok(AtomBoundInstance {
            density_cap,
            atom_total_mass,
            atom_count,
            separation,
            dimension,
            radius,
        })
    }
}

/// Lower bound `t |nu| + C(n) |nu| min{R^2/t, R}` on the Wasserstein-1
/// distance, with the branch constants from the proof:
/// `(n-1) / (sqrt(5) (2n+2))` when `R <= 2t` (the `R^2/t` branch) and
/// `(1 + (n-2) 2^(n-1)) / (2^n sqrt(2) n)` when `R > 2t` (the `R` branch).
/// `t = 0` takes the `R` branch.
pub fn w1_atom_lower_bound(inst: &AtomBoundInstance) -> f64 {
    let n = inst.dimension as f64;
    let t = inst.separation;
    let r = inst.radius;
    let mass = inst.atom_total_mass;
    let excess = if t > 0.0 && r <= 2.0 * t {
        let c = (n - 1.0) / (5f64.sqrt() * (2.0 * n + 2.0));
        c * mass * r * r / t
    } else {
        let c = (1.0 + (n - 2.0) * 2f64.powi(inst.dimension as i32 - 1))
            / (2f64.powi(inst.dimension as i32) * 2f64.sqrt() * n);
        c * mass * r
    };
    t * mass + excess
}

/// The entropy-constrained moment program: minimise `int c^((n+1)/(n-1)) dN`
/// over non-negative measures `N` on `(0, m]` with `int c dN = m` and
/// `int -c log c dN <= D`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexProgramInstance {
    /// Total transported mass, in `(0, 1]`.
    pub total_mass: f64,
    /// Entropy budget `D > 0`.
    pub entropy_budget: f64,
    pub dimension: usize,
    /// Optional primal candidate: atoms `(c, weight)` of the measure `N`.
    pub atoms: Option<Vec<(f64, f64)>>,
}

impl ConvexProgramInstance {
    pub fn new(
        total_mass: f64,
        entropy_budget: f64,
        dimension: usize,
        atoms: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        if !(total_mass > 0.0 && total_mass <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "total mass must lie in (0, 1], got {total_mass}"
            )));
        }
        if !(entropy_budget > 0.0) {
            return Err(Error::InvalidParameter(
                "entropy budget must be positive".into(),
            ));
        }
        if dimension < 2 {
            return Err(Error::InvalidParameter("dimension must be >= 2".into()));
        }
        if let Some(atoms) = &atoms {
            for (c, w) in atoms {
                if !(*c > 0.0 && *c <= total_mass) || !(*w >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "atom (c = {c}, weight = {w}) outside (0, m] x [0, inf)"
                    )));
                }
            }
        }
        Ok(ConvexProgramInstance {
            total_mass,
            entropy_budget,
            dimension,
            atoms,
        })
    }
}

/// Dual bound and the optimal dual pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualBound {
    /// `m exp(-2D / ((n-1) m))`.
    pub value: f64,
    pub lambda: f64,
    pub kappa: f64,
}

/// Closed-form dual of the convex program: the affine-in-`c log c` test
/// function touching `c^(2/(n-1))` tangentially.
pub fn convex_program_dual(inst: &ConvexProgramInstance) -> DualBound {
    let m = inst.total_mass;
    let d = inst.entropy_budget;
    let n1 = (inst.dimension - 1) as f64;
    let z = 2.0 * d / (m * n1);
    let e = (-z).exp();
    DualBound {
        value: m * e,
        lambda: e * (z + 1.0),
        kappa: -2.0 / n1 * e,
    }
}

/// Primal objective of a candidate measure together with its feasibility
/// (mass to `FEASIBILITY_TOL` relative-ish absolute, entropy within budget).
pub fn convex_program_primal(inst: &ConvexProgramInstance) -> Result<(f64, bool)> {
    let atoms = inst
        .atoms
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("primal evaluation needs atoms".into()))?;
    let exponent = (inst.dimension as f64 + 1.0) / (inst.dimension as f64 - 1.0);
    let value: f64 = atoms.iter().map(|(c, w)| w * c.powf(exponent)).sum();
    let mass: f64 = atoms.iter().map(|(c, w)| w * c).sum();
    let entropy: f64 = atoms.iter().map(|(c, w)| w * (-c * c.ln())).sum();
    let feasible = (mass - inst.total_mass).abs() <= FEASIBILITY_TOL
        && entropy <= inst.entropy_budget + FEASIBILITY_TOL;
    Ok((value, feasible))
}

/// The single atom `N = (m / c*) delta_{c*}` with `c* = exp(-D/m)`, which
/// meets both constraints with equality and attains the dual bound.
pub fn touching_atom(total_mass: f64, entropy_budget: f64) -> Vec<(f64, f64)> {
    let c_star = (-entropy_budget / total_mass).exp();
    vec![(c_star, total_mass / c_star)]
}

/// Result of scanning random feasible primal measures against the dual bound.
#[derive(Debug, Clone, Serialize)]
pub struct DualGapReport {
    pub dual: f64,
    pub evaluated: usize,
    pub infeasible_skipped: usize,
    /// Smallest primal-minus-dual gap seen; `None` when the grid was empty
    /// ("no samples").
    pub min_gap: Option<f64>,
    pub min_primal: Option<f64>,
}

/// Evaluate every feasible atom set in `grid` and report the minimum gap to
/// the dual bound.
pub fn dual_gap_scan(
    total_mass: f64,
    entropy_budget: f64,
    dimension: usize,
    grid: &[Vec<(f64, f64)>],
) -> Result<DualGapReport> {
    let base = ConvexProgramInstance::new(total_mass, entropy_budget, dimension, None)?;
    let dual = convex_program_dual(&base).value;
    let mut evaluated = 0;
    let mut infeasible = 0;
    let mut min_gap: Option<f64> = None;
    let mut min_primal: Option<f64> = None;
    for atoms in grid {
        let inst =
            ConvexProgramInstance::new(total_mass, entropy_budget, dimension, Some(atoms.clone()))?;
        let (value, feasible) = convex_program_primal(&inst)?;
        if !feasible {
            infeasible += 1;
            continue;
        }
        evaluated += 1;
        let gap = value - dual;
        min_gap = Some(min_gap.map_or(gap, |g| g.min(gap)));
        min_primal = Some(min_primal.map_or(value, |v| v.min(value)));
    }
    Ok(DualGapReport {
        dual,
        evaluated,
        infeasible_skipped: infeasible,
        min_gap,
        min_primal,
    })
}

/// Rejection-sample `count` feasible atom sets (`atoms_per` atoms each) for
/// the program `(m, D)`: weights are scaled to meet the mass constraint
/// exactly, samples violating the entropy budget are rejected.
pub fn sample_feasible_grid(
    total_mass: f64,
    entropy_budget: f64,
    count: usize,
    atoms_per: usize,
    seed: u64,
) -> Vec<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Vec::with_capacity(count);
    let mut guard = 0usize;
    while grid.len() < count && guard < count * 1000 {
        guard += 1;
        let mut atoms: Vec<(f64, f64)> = (0..atoms_per)
            .map(|_| {
                let c: f64 = rng.gen_range(1e-6..=1.0) * total_mass;
                let w: f64 = rng.gen_range(0.01..1.0);
                (c, w)
            })
            .collect();
        let mass: f64 = atoms.iter().map(|(c, w)| c * w).sum();
        let scale = total_mass / mass;
        for atom in &mut atoms {
            atom.1 *= scale;
        }
        let entropy: f64 = atoms.iter().map(|(c, w)| w * (-c * c.ln())).sum();
        if entropy <= entropy_budget {
            grid.push(atoms);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn atom_bound_worked_example() {
        let inst = AtomBoundInstance::new(1.0, 0.2, 1, 0.5, 2).unwrap();
        assert!((inst.radius - 0.1).abs() < 1e-15);
        let bound = w1_atom_lower_bound(&inst);
        // 0.1 + (1/(6 sqrt 5)) * 0.2 * 0.02
        let expect = 0.1 + 0.2 * 0.02 / (6.0 * 5f64.sqrt());
        assert!((bound - expect).abs() < 1e-15);
        assert!((bound - 0.1002981).abs() < 1e-7);
    }

    #[test]
    fn atom_bound_spread_limit() {
        // Splitting the mass over ever more atoms sends the excess to zero.
        let mut prev = f64::INFINITY;
        for count in [1usize, 10, 100, 10_000] {
            let inst = AtomBoundInstance::new(1.0, 0.2, count, 0.5, 2).unwrap();
            let b = w1_atom_lower_bound(&inst);
            assert!(b < prev);
            prev = b;
        }
        let inst = AtomBoundInstance::new(1.0, 0.2, 100_000_000, 0.5, 2).unwrap();
        assert!((w1_atom_lower_bound(&inst) - 0.1).abs() < 1e-8);
    }

    #[test]
    fn atom_bound_zero_separation_uses_r_branch() {
        let inst = AtomBoundInstance::new(1.0, 0.2, 1, 0.0, 2).unwrap();
        let bound = w1_atom_lower_bound(&inst);
        let c = 1.0 / (8.0 * 2f64.sqrt());
        assert!((bound - c * 0.2 * inst.radius).abs() < 1e-15);
        assert!((c - 0.0883883).abs() < 1e-7);
    }

    #[test]
    fn dual_examples() {
        let i1 = ConvexProgramInstance::new(1.0, 1.0, 3, None).unwrap();
        assert!((convex_program_dual(&i1).value - (-1f64).exp()).abs() < 1e-15);
        let i2 = ConvexProgramInstance::new(0.5, 0.5, 2, None).unwrap();
        assert!((convex_program_dual(&i2).value - 0.5 * (-2f64).exp()).abs() < 1e-15);
        assert!((convex_program_dual(&i2).value - 0.0676676).abs() < 1e-7);
        // D -> 0 forces the bound up to m.
        let i3 = ConvexProgramInstance::new(0.7, 1e-12, 3, None).unwrap();
        assert!((convex_program_dual(&i3).value - 0.7).abs() < 1e-11);
    }

    #[test]
    fn touching_atom_attains_dual() {
        let atoms = touching_atom(1.0, 1.0);
        let inst = ConvexProgramInstance::new(1.0, 1.0, 3, Some(atoms)).unwrap();
        let (value, feasible) = convex_program_primal(&inst).unwrap();
        assert!(feasible);
        let dual = convex_program_dual(&inst).value;
        assert!((value - dual).abs() <= 1e-9);
    }

    #[test]
    fn single_full_mass_atom() {
        let m: f64 = 0.8;
        let d = -m * m.ln() + 0.1;
        let inst = ConvexProgramInstance::new(m, d, 4, Some(vec![(m, 1.0)])).unwrap();
        let (value, feasible) = convex_program_primal(&inst).unwrap();
        assert!(feasible);
        assert!((value - m.powf(5.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn infeasible_entropy_detected() {
        // mass constraint met but entropy budget far too small
        let atoms = vec![(0.01f64, 100.0)];
        let inst = ConvexProgramInstance::new(1.0, 1e-3, 3, Some(atoms)).unwrap();
        let (_, feasible) = convex_program_primal(&inst).unwrap();
        assert!(!feasible);
    }

    #[test]
    fn gap_scan_empty_grid() {
        let rep = dual_gap_scan(1.0, 1.0, 3, &[]).unwrap();
        assert_eq!(rep.evaluated, 0);
        assert!(rep.min_gap.is_none());
    }

    #[test]
    fn gap_scan_nonnegative() {
        let grid = sample_feasible_grid(1.0, 1.0, 100, 3, 7);
        assert!(!grid.is_empty());
        let rep = dual_gap_scan(1.0, 1.0, 3, &grid).unwrap();
        assert!(rep.min_gap.unwrap() >= -1e-12);
    }
}
