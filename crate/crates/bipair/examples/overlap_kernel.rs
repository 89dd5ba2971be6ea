use bipair::cg::coupled_charge;
use bipair::states::{
    make_bipair_coupled, overlap_f, overlap_lattice, padded_tail_cutoff, pde_residual,
};
use bipair::verify::overlap_sample_points;
use num_complex::Complex64 as C64;

// the analytic overlap of a bi-pair state with products of bare pair
// coherent states, cross-checked against the lattice amplitudes and against
// its two defining differential equations

fn main() {
    const Q1: u32 = 1;
    const Q2: u32 = 0;
    const N: u32 = 1;
    let zeta = C64::new(0.8, 0.5);

    let q = coupled_charge(Q1, Q2, N);
    let kmax = padded_tail_cutoff(zeta.norm(), q, 1e-13) as u32;
    let state = make_bipair_coupled(zeta, Q1, Q2, N, kmax).unwrap();

    println!("overlap kernel for zeta = {zeta}, (q1, q2, n) = ({Q1}, {Q2}, {N})");
    println!();
    println!("lattice overlap / analytic kernel across sample points:");
    let samples = overlap_sample_points(10);
    let mut reference = C64::new(0.0, 0.0);
    for (i, &(u, v)) in samples.iter().enumerate() {
        let f = overlap_f(u, v, zeta, Q1, Q2, N).unwrap();
        let lat = overlap_lattice(state.state(), u, v);
        let ratio = lat / f;
        if i == 0 {
            reference = ratio;
        }
        println!(
            "  ({:+.2}{:+.2}i, {:+.2}{:+.2}i): ratio = {:.12} {:+.3e}i  (drift {:.2e})",
            u.re,
            u.im,
            v.re,
            v.im,
            ratio.re,
            ratio.im,
            (ratio - reference).norm() / reference.norm()
        );
    }
    println!();

    // residuals of the eigenvalue and Casimir differential equations,
    // measured by central finite differences
    let res = pde_residual(zeta, Q1, Q2, N, &samples, 1e-4).unwrap();
    println!("eigenvalue equation residual : {:.3e}", res.first_max_rel);
    println!("casimir equation residual    : {:.3e}", res.second_max_rel);
    let res_coarse = pde_residual(zeta, Q1, Q2, N, &samples, 1e-3).unwrap();
    println!(
        "halving h scales the residual by {:.2} (central differences are O(h^2))",
        res_coarse.first_h_ratio
    );
}
