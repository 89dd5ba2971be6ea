use bipair::states::completeness_diagonal;

// resolution of identity over a charge sector: the weighted coherent-state
// integral with measure I_q(2|zeta|) K_q(2|zeta|) reproduces the identity;
// each diagonal element reduces to a radial integral that must equal 1

fn main() {
    println!("diagonal elements of the sector measure (exact value 1):");
    println!("{:>3} {:>3} {:>22} {:>12}", "q", "n", "quadrature", "error est");
    for q in [0u32, 1, 3, 5] {
        for n in [0u32, 2, 5, 10] {
            let r = completeness_diagonal(q, n, 1e-9).unwrap();
            println!(
                "{q:>3} {n:>3} {:>22.15} {:>12.2e}",
                r.value, r.error_estimate
            );
        }
    }
    println!();
    println!("off-diagonal elements vanish identically: the angular integral");
    println!("of e^(i theta (n - m)) is zero for n != m.");
}
