use bipair::dynamics::{
    dark_decomposition_residual, dark_overlap, dark_subspace, shifted_jump_apply, DensityMatrix,
    MasterEqParams, SteadyMethod, SteadyOptions, steady_state,
};
use bipair::fock::ProductLattice;

// two-photon absorption competing with four-wave mixing: the steady state of
// the master equation is a pure bi-pair coherent state with eigenvalue
// lambda = -2iG/K

fn main() {
    const KAPPA: f64 = 1.0;
    const G: f64 = 0.1;
    const CUT: usize = 8;

    let lattice = ProductLattice::new(0, 0, CUT, CUT);
    let params = MasterEqParams::new(KAPPA, G, lattice).unwrap();
    let rho0 = DensityMatrix::vacuum_projector(lattice);
    println!(
        "kappa = {KAPPA}, g = {G}, lattice {CUT}x{CUT}, lambda = {}",
        params.dark_eigenvalue()
    );

    let opts = SteadyOptions::default();
    let by_evolve = steady_state(&params, &rho0, SteadyMethod::Evolve, &opts).unwrap();
    println!(
        "evolve   : {} steps, ||L(rho)||_F = {:.3e}",
        by_evolve.iterations, by_evolve.residual
    );
    let by_null = steady_state(&params, &rho0, SteadyMethod::Nullspace, &opts).unwrap();
    println!(
        "nullspace: Krylov dim {}, ||L(rho)||_F = {:.3e}, reachable kernel dim {:?}",
        by_null.iterations, by_null.residual, by_null.kernel_dim
    );
    let diff = (by_evolve.rho.mat() - by_null.rho.mat())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    println!("method difference (Frobenius): {diff:.3e}");
    println!();

    let rho = &by_evolve.rho;
    println!("trace  = {:.15}", rho.trace().re);
    println!("purity = {:.12}   (pure steady state)", rho.purity());
    println!(
        "dark-state residual ||(O - lambda) rho||_F = {:.3e}",
        shifted_jump_apply(rho, &params).frobenius_norm()
    );

    let family = dark_subspace(&params, params.dark_eigenvalue(), 2).unwrap();
    println!(
        "dark-subspace decomposition residual = {:.3e}",
        dark_decomposition_residual(rho, &family)
    );
    for (n, phi) in family.iter().enumerate() {
        println!(
            "  population on the n = {n} dark state: {:.12}",
            dark_overlap(rho, std::slice::from_ref(phi))
        );
    }
}
