use bipair::cg::{formula_block, lowest_weight_oracle, validate_block};
use bipair::fock::ProductLattice;

// Clebsch-Gordan coefficients of D^{q1} x D^{q2} -> D^{q}: the closed form
// against the brute-force lowest-weight construction

fn main() {
    const Q1: u32 = 1;
    const Q2: u32 = 2;
    const N: u32 = 1; // coupled charge q = q1 + q2 + 2n + 1 = 6
    const KMAX: u32 = 4;

    let cut = (N + KMAX + 2) as usize;
    let lattice = ProductLattice::new(Q1, Q2, cut, cut);
    let oracle = lowest_weight_oracle(Q1, Q2, N, KMAX, &lattice).unwrap();
    let formula = formula_block(Q1, Q2, N, KMAX).unwrap();
    let report = validate_block(&formula, &oracle).unwrap();

    println!(
        "block (q1, q2, n) = ({Q1}, {Q2}, {N}), coupled charge q = {}",
        formula.coupled_charge()
    );
    println!(
        "max |formula - oracle| = {:.3e} (sign {})",
        report.max_abs_deviation,
        if report.aligned_sign < 0.0 { "flipped" } else { "unflipped" }
    );
    println!("row norms deviate from 1 by at most {:.3e}", formula.row_norm_deviation());
    println!();
    println!("{:>3} {:>3} {:>3} {:>14} {:>14}", "k", "n1", "n2", "formula", "oracle");
    for k in 0..=KMAX {
        for n1 in 0..=N + k {
            let n2 = N + k - n1;
            println!(
                "{k:>3} {n1:>3} {n2:>3} {:>14.9} {:>14.9}",
                report.aligned_sign * formula.coefficient(k, n1),
                oracle.coefficient(k, n1)
            );
        }
    }
}
