use bipair::fock::apply_pair_lowering;
use bipair::specfun::bessel_i_real;
use bipair::states::{make_pair_coherent, padded_tail_cutoff, Normalization};
use num_complex::Complex64 as C64;

// construct a two-mode pair coherent state and verify its defining relations

fn main() {
    const Q: u32 = 2; // photon-number difference between the two modes
    let zeta = C64::new(0.8, 0.3);

    let cutoff = padded_tail_cutoff(zeta.norm(), Q, 1e-12);
    let state = make_pair_coherent(zeta, Q, cutoff, Normalization::Normalized).unwrap();

    println!("pair coherent state: zeta = {zeta}, q = {Q}, cutoff = {cutoff}");
    println!("norm              : {:.15}", state.norm());
    println!("eigen residual    : {:.3e}   (ab|psi> = zeta|psi>)", state.eigen_residual());

    // the bare series has squared norm |zeta|^{-q} I_q(2|zeta|)
    let bare = make_pair_coherent(zeta, Q, cutoff, Normalization::Unnormalized).unwrap();
    let analytic = zeta.norm().powi(-(Q as i32)) * bessel_i_real(Q, 2.0 * zeta.norm()).unwrap();
    println!(
        "bare norm^2       : {:.12} vs analytic {:.12}",
        bare.norm() * bare.norm(),
        analytic
    );

    // the lowering operator shifts the series down by exactly zeta
    let lowered = apply_pair_lowering(state.amplitudes());
    println!("first amplitudes  :");
    for n in 0..5.min(cutoff) {
        println!(
            "  n = {n}: c_n = {:+.6e} {:+.6e}i   (K^- c)_n / c_n = {:.6}",
            state.amplitudes().coeffs()[n].re,
            state.amplitudes().coeffs()[n].im,
            (lowered.coeffs()[n] / state.amplitudes().coeffs()[n]).norm()
        );
    }
}
