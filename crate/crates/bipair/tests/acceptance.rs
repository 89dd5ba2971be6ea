//! Acceptance suite: every shipped claim as one pass/fail criterion with its
//! tolerance pinned in code. Criteria are serialized through a mutex so the
//! per-criterion runtime budgets are measured on an uncontended machine.

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use num_complex::Complex64 as C64;

use bipair::cg;
use bipair::fock::ProductLattice;
use bipair::states::{make_bipair_coupled, padded_tail_cutoff, pde_residual};
use bipair::verify::{
    self, algebra_suite_max_residual, cg_sweep, fano_grid, liouvillian_contracts,
    mandel_discrepancy, mandel_q_grid, overlap_ratio_spread, state_grid, stats_grid,
    steady_suite, StateGridSummary,
};

fn serialize() -> MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    GATE.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

fn report(number: u32, pass: bool, summary: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("{status} criterion {number:02}: {summary}");
}

/// The state grid shared by criteria 5 and 6.
fn shared_state_grid() -> &'static StateGridSummary {
    static GRID: OnceLock<StateGridSummary> = OnceLock::new();
    GRID.get_or_init(|| {
        let zetas = [C64::new(0.5, 0.0), C64::new(1.5, 0.5), C64::new(3.0, 0.0)];
        state_grid(&zetas, 2, 2, 1e-12).expect("state grid construction")
    })
}

#[test]
fn criterion_01_mandel_q_sign() {
    let _gate = serialize();
    let t0 = Instant::now();
    let grid = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];
    let values = mandel_q_grid(&grid, 1e-12).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let all_negative = values.iter().all(|&q| q < 0.0);
    let pass = all_negative && elapsed < 10.0;
    let detail: Vec<String> = grid
        .iter()
        .zip(&values)
        .map(|(z, q)| format!("Q({z}) = {q:+.3e}"))
        .collect();
    report(
        1,
        pass,
        &format!(
            "moment-based Mandel Q < 0 on the |zeta| grid ({:.1} s): {}",
            elapsed,
            detail.join(", ")
        ),
    );
    if !all_negative {
        println!(
            "      the single-mode Q changes sign at |zeta| = 1.466 (|zeta|^2 = 2.149), \
             confirmed independently by the closed form and by the state moments;"
        );
        println!(
            "      the claimed negativity below |zeta| = 2 does not hold beyond the crossing, \
             so the two largest grid points are positive."
        );
    }
    assert!(pass, "Mandel-Q sign criterion failed: {detail:?}");
}

#[test]
fn criterion_02_closed_form_statistics() {
    let _gate = serialize();
    let t0 = Instant::now();
    let s = stats_grid(&[0.25, 0.5, 1.0, 2.0, 3.0, 4.0], 1e-14).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = s.max_marginal_abs_dev <= 1e-12
        && s.max_pk_abs_dev <= 1e-12
        && s.max_mean_n1_rel_dev <= 1e-10
        && s.max_mean_k_rel_dev <= 1e-10
        && elapsed < 30.0;
    report(
        2,
        pass,
        &format!(
            "closed-form statistics ({elapsed:.1} s): distributions {:.2e}/{:.2e} abs, \
             means {:.2e}/{:.2e} rel",
            s.max_marginal_abs_dev, s.max_pk_abs_dev, s.max_mean_n1_rel_dev, s.max_mean_k_rel_dev
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_sub_poissonian_pair_count() {
    let _gate = serialize();
    let grid: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
    let fanos = fano_grid(&grid, 1e-12).unwrap();
    let worst = fanos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = worst < 1.0;
    report(
        3,
        pass,
        &format!("pair-count Fano factor < 1 on |zeta| in (0, 5]: worst {worst:.6}"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_cg_oracle_equivalence() {
    let _gate = serialize();
    let t0 = Instant::now();
    let s = cg_sweep(3, 3, 6).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = s.max_formula_oracle_dev <= 1e-9
        && s.max_row_norm_dev.max(s.max_gram_dev) <= 1e-10
        && s.max_uniform_case_dev <= 1e-12
        && elapsed < 60.0;
    report(
        4,
        pass,
        &format!(
            "coefficient sweep ({elapsed:.1} s): |formula - oracle| {:.2e}, \
             orthonormality {:.2e}, uniform case {:.2e}",
            s.max_formula_oracle_dev,
            s.max_row_norm_dev.max(s.max_gram_dev),
            s.max_uniform_case_dev
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_eigenstate_and_casimir_residuals() {
    let _gate = serialize();
    let s = shared_state_grid();
    let pass = s.max_eigen_residual <= 1e-8 && s.max_casimir_residual <= 1e-8;
    report(
        5,
        pass,
        &format!(
            "eigenvalue residual {:.2e}, Casimir residual {:.2e} over {} states",
            s.max_eigen_residual, s.max_casimir_residual, s.states_checked
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_construction_equivalence() {
    let _gate = serialize();
    let s = shared_state_grid();
    let pass = s.min_fidelity >= 1.0 - 1e-10;
    report(
        6,
        pass,
        &format!("coupled/direct fidelity >= 1 - 1e-10: worst 1 - {:.2e}", 1.0 - s.min_fidelity),
    );
    assert!(pass);
}

#[test]
fn criterion_07_resolution_of_identity() {
    let _gate = serialize();
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for q in 0..=5u32 {
        for n in 0..=10u32 {
            let r = bipair::states::completeness_diagonal(q, n, 1e-9).unwrap();
            worst = worst.max((r.value - 1.0).abs());
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && elapsed < 30.0;
    report(
        7,
        pass,
        &format!("identity-resolution diagonals ({elapsed:.1} s): worst |value - 1| = {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_overlap_kernel() {
    let _gate = serialize();
    let samples = verify::overlap_sample_points(10);
    let mut spread = 0.0f64;
    for (zeta, q1, q2, n) in [
        (C64::new(0.8, 0.5), 1u32, 0u32, 1u32),
        (C64::new(1.2, 0.0), 0, 0, 0),
        (C64::new(0.5, -0.3), 2, 1, 2),
    ] {
        let q = cg::coupled_charge(q1, q2, n);
        let kmax = padded_tail_cutoff(zeta.norm(), q, 1e-13) as u32;
        let state = make_bipair_coupled(zeta, q1, q2, n, kmax).unwrap();
        spread = spread.max(overlap_ratio_spread(&state, &samples).unwrap());
    }
    // first differential equation at h = 1e-4 plus the O(h^2) convergence
    // check in a truncation-dominated regime
    let res = pde_residual(C64::new(1.0, 0.0), 0, 0, 0, &samples, 1e-4).unwrap();
    let conv = pde_residual(
        C64::new(2.0, 1.0),
        1,
        0,
        2,
        &[(C64::new(1.0, 0.1), C64::new(0.8, -0.2))],
        1e-3,
    )
    .unwrap();
    let order_ok = conv.first_h_ratio > 2.5 && conv.first_h_ratio < 6.5;
    let pass = spread <= 1e-8 && res.first_max_rel <= 1e-6 && order_ok;
    report(
        8,
        pass,
        &format!(
            "overlap ratio spread {spread:.2e}, eigenvalue-equation residual {:.2e}, \
             h-halving ratio {:.2}",
            res.first_max_rel, conv.first_h_ratio
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_dissipative_steady_state() {
    let _gate = serialize();
    let t0 = Instant::now();
    let s = steady_suite(1.0, 0.3, 12, 2).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = s.dark_residual_evolve.max(s.dark_residual_nullspace) <= 1e-8
        && s.trace_dev <= 1e-12
        && s.decomposition_residual <= 1e-7
        && s.method_difference <= 1e-6
        && elapsed < 300.0;
    report(
        9,
        pass,
        &format!(
            "steady state ({elapsed:.0} s, {} steps): dark residual {:.2e}, trace dev {:.2e}, \
             decomposition {:.2e}, method diff {:.2e}",
            s.evolve_steps,
            s.dark_residual_evolve.max(s.dark_residual_nullspace),
            s.trace_dev,
            s.decomposition_residual,
            s.method_difference
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_generator_form_equivalence() {
    let _gate = serialize();
    let s = liouvillian_contracts(11, 50, 1.0, 0.3, 4).unwrap();
    let pass = s.max_form_deviation <= 1e-12;
    report(
        10,
        pass,
        &format!(
            "unshifted vs shifted generator on 50 random Hermitian matrices: {:.2e} relative",
            s.max_form_deviation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_algebra_suite() {
    let _gate = serialize();
    let worst = algebra_suite_max_residual(11, 100).unwrap();
    let pass = worst <= 1e-10;
    report(
        11,
        pass,
        &format!("commutator invariants on 100 seeded random interior states: {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_12_mandel_discrepancy_report() {
    let _gate = serialize();
    let grid = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0];
    let disc = mandel_discrepancy(&grid, 1e-13).unwrap();
    // the criterion passes by the report existing; the value is informational
    report(
        12,
        true,
        &format!("closed-form vs moment-based Mandel Q discrepancy report: max {disc:.3e}"),
    );
    assert!(disc.is_finite());
}

/// The Liouvillian never couples distinct charge sectors: structural, since
/// parameters, states, and operators all live on one fixed-charge lattice.
/// Asserted here as a compile-and-run fact alongside the numbered criteria.
#[test]
fn charge_sector_closure_is_structural() {
    let _gate = serialize();
    let lat = ProductLattice::new(1, 2, 3, 3);
    assert_eq!(lat.q1(), 1);
    assert_eq!(lat.q2(), 2);
    let params = bipair::dynamics::MasterEqParams::new(1.0, 0.1, lat).unwrap();
    assert_eq!(params.lattice().q1(), 1);
    assert_eq!(params.lattice().q2(), 2);
}
