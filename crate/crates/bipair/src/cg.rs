//! Clebsch-Gordan coefficients for the Kronecker product of two positive
//! discrete series representations of SU(1,1).
//!
//! The product `D^{q1} x D^{q2}` decomposes into coupled representations
//! `D^q` with `q = q1 + q2 + 2n + 1`, one per coupling index `n >= 0`. The
//! coefficients are provided by two independent routes:
//!
//! - [`cg_coefficient`]: a closed form evaluated in log-factorial space with
//!   compensated summation,
//! - [`lowest_weight_oracle`]: a brute-force construction that finds the
//!   kernel of the restricted lowering operator by singular-value
//!   decomposition and ladders it up with `K^+`.
//!
//! [`validate_block`] cross-checks the two against each other up to one
//! global sign per block.
//!
//! The closed form implemented here is
//!
//! ```text
//! C(k, n1) = (-1)^n a0 sqrt(n! (n+q2)! q1!)
//!            * sqrt(q! / (k! (k+q)!)) * k!
//!            * sqrt(n1! (n1+q1)! n2! (n2+q2)!)
//!            * sum_j (-1)^j / [ (n1-j)! (k-n1+j)! j! (q1+j)! (n-j)! (n+q2-j)! ]
//! a0       = sqrt( (q1+q2+n)! (q1+n)! / ( (q1+q2+2n)! q1! ) )
//! ```
//!
//! with `n2 = n + k - n1` and the sum over all integers `j` keeping every
//! factorial argument nonnegative. Equivalently, substituting `m = n - j`,
//! the sum reads
//! `sum_m (-1)^(n-m) / [ m! (q2+m)! (n-m)! (n+q1-m)! (n1-n+m)! (n2-m)! ]`.
//! The `a0 * sqrt(...)` prefactor normalizes each row to a unit vector; it is
//! fixed by the lowest-weight recurrence together with the `K^+` ladder norm
//! `(K^+)^k |q;0> = sqrt(k! (k+q)! / q!) |q;k>`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    apply_total_lowering, apply_total_raising, norm, FourModeState, ProductLattice,
};
use crate::specfun::{log_factorial, Accum};

/// Singular values below this fraction of the largest are treated as zero
/// when extracting the lowest-weight kernel.
const KERNEL_SV_THRESHOLD: f64 = 1e-10;

/// Coupled charge `q = q1 + q2 + 2n + 1`.
pub fn coupled_charge(q1: u32, q2: u32, n: u32) -> u32 {
    q1 + q2 + 2 * n + 1
}

/// The Clebsch-Gordan coefficients for one coupled representation
/// (fixed `q1`, `q2`, `n`), as rows indexed by the ladder level `k`.
/// `table[k][n1]` couples `|n1+q1, n1>|n2+q2, n2>` with `n2 = n + k - n1`.
#[derive(Clone, Debug)]
pub struct CGBlock {
    pub q1: u32,
    pub q2: u32,
    pub n: u32,
    pub kmax: u32,
    pub table: Vec<Vec<f64>>,
}

impl CGBlock {
    pub fn coupled_charge(&self) -> u32 {
        coupled_charge(self.q1, self.q2, self.n)
    }

    /// Coefficient at ladder level `k` and first-factor index `n1`.
    pub fn coefficient(&self, k: u32, n1: u32) -> f64 {
        self.table[k as usize][n1 as usize]
    }

    /// Worst deviation of any row norm from 1.
    pub fn row_norm_deviation(&self) -> f64 {
        self.table
            .iter()
            .map(|row| {
                let mut acc = Accum::default();
                for c in row {
                    acc.add(c * c);
                }
                (acc.value().sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Closed-form coefficient; see the module docs for the formula.
///
/// Requires `n1 <= n + k` so that `n2 = n + k - n1 >= 0`. The sum index runs
/// over exactly those integers keeping every factorial argument nonnegative;
/// an empty range yields 0.
pub fn cg_coefficient(q1: u32, q2: u32, n: u32, k: u32, n1: u32) -> Result<f64> {
    if n1 > n + k {
        return Err(Error::IndexMismatch(format!(
            "n1 = {n1} exceeds n + k = {}; n2 would be negative",
            n + k
        )));
    }
    let (q1s, q2s, ns, ks, n1s) =
        (q1 as usize, q2 as usize, n as usize, k as usize, n1 as usize);
    let n2s = ns + ks - n1s;
    let q = coupled_charge(q1, q2, n) as usize;

    let lf = log_factorial;
    let log_pref = 0.5
        * (lf(q1s + q2s + ns) + lf(q1s + ns) - lf(q1s + q2s + 2 * ns) - lf(q1s)
            + lf(ns)
            + lf(ns + q2s)
            + lf(q1s)
            + lf(q)
            - lf(ks)
            - lf(ks + q)
            + lf(n1s)
            + lf(n1s + q1s)
            + lf(n2s)
            + lf(n2s + q2s))
        + lf(ks);

    let j_lo = n1s.saturating_sub(ks);
    let j_hi = ns.min(n1s);
    if j_lo > j_hi {
        return Ok(0.0);
    }
    // scale the alternating sum by the largest term magnitude
    let log_terms: Vec<f64> = (j_lo..=j_hi)
        .map(|j| {
            -(lf(n1s - j) + lf(ks + j - n1s) + lf(j) + lf(q1s + j) + lf(ns - j) + lf(ns + q2s - j))
        })
        .collect();
    let log_max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = Accum::default();
    for (j, lt) in (j_lo..=j_hi).zip(&log_terms) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * (lt - log_max).exp());
    }
    let block_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(block_sign * acc.value() * (log_pref + log_max).exp())
}

/// Assemble the closed-form block for `k = 0..=kmax`.
pub fn formula_block(q1: u32, q2: u32, n: u32, kmax: u32) -> Result<CGBlock> {
    let mut table = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let row: Result<Vec<f64>> =
            (0..=n + k).map(|n1| cg_coefficient(q1, q2, n, k, n1)).collect();
        table.push(row?);
    }
    Ok(CGBlock { q1, q2, n, kmax, table })
}

/// Brute-force oracle: restrict `K^-` to the `K^z` eigenspace
/// `{n1 + n2 = n}`, extract its kernel by SVD (expected dimension exactly 1),
/// fix the sign so the `(n1, n2) = (n, 0)` component is positive, then apply
/// `K^+` repeatedly with renormalization to generate the rows `k = 0..=kmax`.
pub fn lowest_weight_oracle(
    q1: u32,
    q2: u32,
    n: u32,
    kmax: u32,
    lattice: &ProductLattice,
) -> Result<CGBlock> {
    if lattice.q1() != q1 || lattice.q2() != q2 {
        return Err(Error::LatticeMismatch(format!(
            "lattice charges ({}, {}) do not match ({q1}, {q2})",
            lattice.q1(),
            lattice.q2()
        )));
    }
    let need = (n + kmax + 1) as usize;
    if lattice.n1_cut() < need || lattice.n2_cut() < need {
        return Err(Error::LatticeMismatch(format!(
            "lattice cutoffs ({}, {}) below n + kmax + 1 = {need}",
            lattice.n1_cut(),
            lattice.n2_cut()
        )));
    }

    let ns = n as usize;
    let dim_in = ns + 1;
    // lowest-weight vector within the anti-diagonal n1 + n2 = n
    let kernel: Vec<f64> = if ns == 0 {
        vec![1.0]
    } else {
        // K^- restricted to the eigenspace, as an (n+1) x (n+1) real matrix
        // (the image space has dimension n; the last row stays zero so the
        // SVD carries the full set of right singular vectors)
        let mut a = DMatrix::<f64>::zeros(dim_in, dim_in);
        for n1 in 0..dim_in {
            let basis_vec = FourModeState::unit(*lattice, n1, ns - n1);
            let image = apply_total_lowering(&basis_vec);
            for m1 in 0..ns {
                let m2 = ns - 1 - m1;
                a[(m1, n1)] = image.get(m1, m2).re;
            }
        }
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let mut kernel_rows: Vec<usize> = (0..dim_in)
            .filter(|&i| svd.singular_values[i] <= KERNEL_SV_THRESHOLD * sigma_max)
            .collect();
        if kernel_rows.len() != 1 {
            return Err(Error::KernelDimension {
                routine: "lowest_weight_oracle",
                expected: 1,
                found: kernel_rows.len(),
            });
        }
        let row = kernel_rows.pop().expect("one kernel row");
        v_t.row(row).iter().cloned().collect()
    };

    let mut row0 = FourModeState::zero(*lattice);
    for (n1, &c) in kernel.iter().enumerate() {
        row0.amp_mut()[lattice.index(n1, ns - n1)] = C64::new(c, 0.0);
    }
    let nrm = norm(&row0);
    let mut row0 = row0.scale(C64::new(1.0 / nrm, 0.0));
    if row0.get(ns, 0).re < 0.0 {
        row0 = row0.scale(C64::new(-1.0, 0.0));
    }
    // construction property: the k = 0 row must be annihilated by K^-
    let residual = norm(&apply_total_lowering(&row0));
    if residual > 1e-12 {
        return Err(Error::KernelDimension {
            routine: "lowest_weight_oracle",
            expected: 1,
            found: 0,
        });
    }

    let mut table = Vec::with_capacity(kmax as usize + 1);
    let mut current = row0;
    for k in 0..=kmax {
        let d = ns + k as usize;
        let row: Vec<f64> = (0..=d).map(|n1| current.get(n1, d - n1).re).collect();
        table.push(row);
        if k < kmax {
            let raised = apply_total_raising(&current);
            let nrm = norm(&raised);
            current = raised.scale(C64::new(1.0 / nrm, 0.0));
        }
    }
    Ok(CGBlock { q1, q2, n, kmax, table })
}

/// Outcome of comparing a closed-form block against the oracle.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub q1: u32,
    pub q2: u32,
    pub n: u32,
    pub kmax: u32,
    /// Global sign applied to the formula block for best agreement.
    pub aligned_sign: f64,
    /// Max |formula - oracle| after the sign alignment.
    pub max_abs_deviation: f64,
    pub pass: bool,
}

impl ValidationReport {
    pub const PASS_THRESHOLD: f64 = 1e-9;
}

/// Align `formula` to `oracle` by at most one global sign and report the
/// maximum absolute deviation. Phase conventions may differ per block but
/// never per row, so a single sign must reconcile the two.
pub fn validate_block(formula: &CGBlock, oracle: &CGBlock) -> Result<ValidationReport> {
    if (formula.q1, formula.q2, formula.n, formula.kmax)
        != (oracle.q1, oracle.q2, oracle.n, oracle.kmax)
    {
        return Err(Error::IndexMismatch(
            "validation requires blocks with identical (q1, q2, n, kmax)".into(),
        ));
    }
    // pick the sign from the largest-magnitude oracle entry
    let mut best = (0usize, 0usize, 0.0f64);
    for (k, row) in oracle.table.iter().enumerate() {
        for (n1, &c) in row.iter().enumerate() {
            if c.abs() > best.2 {
                best = (k, n1, c.abs());
            }
        }
    }
    let (bk, bn1, _) = best;
    let sign = if formula.table[bk][bn1] * oracle.table[bk][bn1] < 0.0 {
        -1.0
    } else {
        1.0
    };
    let mut max_dev = 0.0f64;
    for (fr, or) in formula.table.iter().zip(&oracle.table) {
        for (f, o) in fr.iter().zip(or) {
            max_dev = max_dev.max((sign * f - o).abs());
        }
    }
    Ok(ValidationReport {
        q1: formula.q1,
        q2: formula.q2,
        n: formula.n,
        kmax: formula.kmax,
        aligned_sign: sign,
        max_abs_deviation: max_dev,
        pass: max_dev <= ValidationReport::PASS_THRESHOLD,
    })
}

/// Gram-matrix deviation from the identity for the rows of all blocks
/// `n = 0..=total` evaluated on the anti-diagonal `n1 + n2 = total`. Those
/// rows should form an orthonormal basis of the `(total+1)`-dimensional
/// `K^z` eigenspace.
pub fn completeness_gram_deviation(blocks: &[CGBlock], total: u32) -> Result<f64> {
    let mut rows: Vec<&Vec<f64>> = Vec::with_capacity(total as usize + 1);
    for n in 0..=total {
        let block = blocks
            .iter()
            .find(|b| b.n == n)
            .ok_or_else(|| Error::IndexMismatch(format!("missing block n = {n}")))?;
        let k = total - n;
        if k > block.kmax {
            return Err(Error::IndexMismatch(format!(
                "block n = {n} has kmax = {} < required k = {k}",
                block.kmax
            )));
        }
        rows.push(&block.table[k as usize]);
    }
    let mut max_dev = 0.0f64;
    for (i, ri) in rows.iter().enumerate() {
        for (j, rj) in rows.iter().enumerate() {
            let mut acc = Accum::default();
            // rows live on the same anti-diagonal but have different lengths
            // (block n has no support below n1 = 0); align by n1 index
            let len = ri.len().max(rj.len());
            for n1 in 0..len {
                let a = ri.get(n1).copied().unwrap_or(0.0);
                let b = rj.get(n1).copied().unwrap_or(0.0);
                acc.add(a * b);
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((acc.value() - expected).abs());
        }
    }
    Ok(max_dev)
}
