//! Adaptive Simpson quadrature in one dimension and nested over boxes.
//!
//! Used by the Wasserstein cell energies and by the oracle that re-derives
//! the closed-form cell costs.

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`. The integrands here are piecewise smooth, which the bisection
/// handles without special casing.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, mid - a);
    let right = simpson(fm, frm, fb, b - mid);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Simpson with a fixed even number of steps. Kept around for the
/// step-halving convergence checks.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, steps: usize) -> f64 {
    assert!(steps >= 2 && steps.is_multiple_of(2));
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let x = a + h * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Nested adaptive Simpson over the box `[0, 1]^dims`.
pub fn adaptive_unit_cube<F: Fn(&[f64]) -> f64>(f: &F, dims: usize, tol: f64) -> f64 {
    assert!(dims >= 1);
    let point = std::cell::RefCell::new(vec![0.0; dims]);
    cube_rec(f, &point, dims, tol)
}

fn cube_rec<F: Fn(&[f64]) -> f64>(
    f: &F,
    point: &std::cell::RefCell<Vec<f64>>,
    level: usize,
    tol: f64,
) -> f64 {
    let g = |x: f64| {
        point.borrow_mut()[level - 1] = x;
        if level == 1 {
            f(&point.borrow())
        } else {
            // Inner integrals run tighter so the nesting error stays below `tol`.
            cube_rec(f, point, level - 1, tol * 0.3)
        }
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact for cubics.
        let v = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn integrates_sqrt_kink() {
        let v = adaptive_simpson(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10);
        assert!((v - 4.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn cube_matches_product() {
        // int over [0,1]^2 of x*y = 1/4
        let v = adaptive_unit_cube(&|p: &[f64]| p[0] * p[1], 2, 1e-12);
        assert!((v - 0.25).abs() < 1e-10);
        // int over [0,1]^3 of (x+y+z) = 3/2
        let v3 = adaptive_unit_cube(&|p: &[f64]| p.iter().sum::<f64>(), 3, 1e-11);
        assert!((v3 - 1.5).abs() < 1e-9);
    }
}
