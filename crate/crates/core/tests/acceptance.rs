//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line. Budgets can be raised through CSURG_INSTANCES / CSURG_DEPTH /
//! CSURG_TB_FLOOR; defaults are the pinned minimums.

use contact_surgery::verification::{self, Budgets, CriterionReport};

fn gate(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

fn budgets() -> Budgets {
    Budgets::from_env()
}

#[test]
fn criterion_01_exact_values() {
    gate(verification::criterion_1_exact_values());
}

#[test]
fn criterion_02_lens_detour() {
    gate(verification::criterion_2_lens_detour());
}

#[test]
fn criterion_03_move_invariance() {
    gate(verification::criterion_3_move_invariance(budgets()));
}

#[test]
fn criterion_04_gamma_nullity() {
    gate(verification::criterion_4_gamma_nullity(budgets()));
}

#[test]
fn criterion_05_sublink_count() {
    gate(verification::criterion_5_sublink_count(budgets()));
}

#[test]
fn criterion_06_ladder() {
    gate(verification::criterion_6_ladder());
}

#[test]
fn criterion_07_link_theorem() {
    gate(verification::criterion_7_link_theorem(budgets()));
}

#[test]
fn criterion_08_detour_bound() {
    gate(verification::criterion_8_detour_bound(budgets()));
}

#[test]
fn criterion_09_ot_distance() {
    gate(verification::criterion_9_ot_distance());
}

#[test]
fn criterion_10_oracles() {
    gate(verification::criterion_10_oracles());
}
