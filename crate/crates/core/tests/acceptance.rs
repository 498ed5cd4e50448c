//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test -p ramify-core --test acceptance -- --nocapture`.

use ramify_core::verify::{self, Check};

fn assert_check(index: usize, c: Check) {
    let verdict = if c.passed { "PASS" } else { "FAIL" };
    println!("criterion {index:2} [{verdict}] {} — {}", c.name, c.detail);
    assert!(
        c.passed,
        "criterion {index} ({}) failed: {}",
        c.name, c.detail
    );
}

#[test]
fn criterion_01_cell_identities() {
    assert_check(1, verify::criterion_cell_identities());
}

#[test]
fn criterion_02_dual_path_equality() {
    assert_check(2, verify::criterion_dual_path());
}

#[test]
fn criterion_03_up2d_scaling() {
    assert_check(3, verify::criterion_up2d_scaling());
}

#[test]
fn criterion_04_upnd_scaling() {
    assert_check(4, verify::criterion_upnd_scaling());
}

#[test]
fn criterion_05_up3d_log_refinement() {
    assert_check(5, verify::criterion_up3d_scaling());
}

#[test]
fn criterion_06_bt_scaling_band() {
    assert_check(6, verify::criterion_bt_scaling());
}

#[test]
fn criterion_07_weak_duality() {
    assert_check(7, verify::criterion_weak_duality());
}

#[test]
fn criterion_08_w1_bound_dominance() {
    assert_check(8, verify::criterion_w1_dominance());
}

#[test]
fn criterion_09_conservation_and_closure() {
    assert_check(9, verify::criterion_conservation());
}

#[test]
fn criterion_10_oracle_dominance() {
    assert_check(10, verify::criterion_oracle_dominance());
}
