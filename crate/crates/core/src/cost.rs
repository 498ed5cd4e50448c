//! The two per-length cost densities on mass flux.

/// Urban planning cost per unit mass and length: `min{1 + eps/m, a}` for
/// `m > 0`, and `a` for `m = 0` (mass off the network pays the street rate).
pub fn up_cost_rate(mass: f64, epsilon: f64, a: f64) -> f64 {
    debug_assert!(mass >= 0.0 && epsilon > 0.0 && a > 1.0);
    if mass > 0.0 {
        (1.0 + epsilon / mass).min(a)
    } else {
        a
    }
}

/// Branched transport cost per unit mass and length: `m^(-eps)` for `m > 0`.
/// Zero flux returns the infinity sentinel; off-network mass is infeasible.
pub fn bt_cost_rate(mass: f64, epsilon: f64) -> f64 {
    debug_assert!(mass >= 0.0 && epsilon > 0.0 && epsilon <= 1.0);
    if mass > 0.0 {
        mass.powf(-epsilon)
    } else {
        f64::INFINITY
    }
}

/// Urban planning cost of a unit length of pipe with flux `mass`:
/// `min{a m, m + eps}`.
pub fn up_edge_cost(mass: f64, epsilon: f64, a: f64) -> f64 {
    (a * mass).min(mass + epsilon)
}

/// Branched transport cost of a unit length of pipe with flux `mass`:
/// `m^(1-eps)`.
pub fn bt_edge_cost(mass: f64, epsilon: f64) -> f64 {
    mass.powf(1.0 - epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn up_rate_examples() {
        assert!((up_cost_rate(0.5, 0.1, 2.0) - 1.2).abs() < 1e-15);
        assert_eq!(up_cost_rate(0.0, 0.1, 2.0), 2.0);
        assert_eq!(up_cost_rate(0.01, 0.1, 2.0), 2.0); // 1 + 10 clamps to a
    }

    #[test]
    fn bt_rate_examples() {
        assert_eq!(bt_cost_rate(1.0, 0.3), 1.0);
        assert!((bt_cost_rate(0.5, 0.1) - 0.5f64.powf(-0.1)).abs() < 1e-15);
        assert!((bt_cost_rate(0.5, 0.1) - 1.0717734625362931).abs() < 1e-12);
        assert!(bt_cost_rate(0.0, 0.1).is_infinite());
    }

    #[test]
    fn up_rate_nonincreasing_bt_rate_decreasing() {
        let mut prev_up = f64::INFINITY;
        let mut prev_bt = f64::INFINITY;
        for i in 1..2000 {
            let m = i as f64 * 1e-3;
            let up = up_cost_rate(m, 0.07, 3.0);
            let bt = bt_cost_rate(m, 0.4);
            assert!(up <= prev_up + 1e-15);
            assert!(bt < prev_bt);
            prev_up = up;
            prev_bt = bt;
        }
    }

    #[test]
    fn cost_density_consistency() {
        // min{a m, m + eps} agrees with m * rate(m) for m > 0.
        for i in 1..500 {
            let m = i as f64 * 4e-3;
            let lhs = up_edge_cost(m, 0.13, 2.5);
            let rhs = m * up_cost_rate(m, 0.13, 2.5);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }
    }
}
