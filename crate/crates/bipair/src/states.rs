//! Pair coherent states, bi-pair coherent states by two independent
//! constructions, the analytic overlap kernel on the pair-coherent-state
//! basis, and the resolution of identity over a charge sector.
//!
//! A pair coherent state of charge `q` is the eigenstate of `ab` within the
//! sector `|n+q, n>`; its four-mode generalization carries a coupling index
//! `n` selecting the coupled representation `D^q`, `q = q1 + q2 + 2n + 1`.
//! The coupled construction assembles the state from brute-force
//! Clebsch-Gordan rows, the direct construction from the closed form; the two
//! must agree to working precision, which is the crate's main cross-check of
//! the coefficient algebra.

use num_complex::Complex64 as C64;

use crate::cg::{self, CGBlock};
use crate::error::{Error, Result};
use crate::fock::{
    apply_casimir, apply_pair_lowering, apply_total_lowering, inner, norm, FourModeState,
    PairAmplitudes, ProductLattice, SectorBasis,
};
use crate::quad::adaptive_gk;
use crate::specfun::{bessel_i_scaled, bessel_k, log_factorial, AccumC};

/// Whether an amplitude vector carries the analytic normalization constant or
/// the bare series coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Normalized,
    Unnormalized,
}

/// Which route assembled a bi-pair state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Coupled-basis series over brute-force Clebsch-Gordan rows.
    Coupled,
    /// Number-basis double sum from the closed-form coefficients.
    Direct,
}

/// `|zeta|^{-q} I_q(2|zeta|)`, the squared norm of the bare pair series,
/// evaluated through the entire scaled Bessel function so that `zeta = 0`
/// needs no special casing.
pub fn pair_norm_sqr(zeta_abs: f64, q: u32) -> Result<f64> {
    let g = bessel_i_scaled(q, C64::new(4.0 * zeta_abs * zeta_abs, 0.0))?;
    Ok(2f64.powi(q as i32) * g.re)
}

/// Smallest `N` such that the neglected tail mass
/// `sum_{n > N} |zeta|^{2n} / (n! (n+q)!)` falls below `tol` times the kept
/// mass. Terms are summed directly; once the term ratio drops below 1/2 the
/// tail is bounded by the geometric series.
pub fn tail_cutoff(zeta_abs: f64, q: u32, tol: f64) -> usize {
    assert!(tol > 0.0, "tail tolerance must be positive");
    if zeta_abs == 0.0 {
        return 0;
    }
    let z2 = zeta_abs * zeta_abs;
    let mut term = 1.0f64;
    let mut kept = term;
    let mut n = 0usize;
    loop {
        let next = term * z2 / (((n + 1) * (n + 1 + q as usize)) as f64);
        let ratio = next / term;
        if ratio < 0.5 {
            let tail_bound = next / (1.0 - ratio);
            if tail_bound < tol * kept {
                return n;
            }
        }
        term = next;
        kept += term;
        n += 1;
    }
}

/// [`tail_cutoff`] plus enough padding that the truncated edge term carries
/// less than 1e-30 of the total mass. The padding pushes the truncation
/// residual of the eigenvalue relation far below the declared tail tolerance.
pub fn padded_tail_cutoff(zeta_abs: f64, q: u32, tol: f64) -> usize {
    let base = tail_cutoff(zeta_abs, q, tol);
    if zeta_abs == 0.0 {
        return base;
    }
    let z2 = zeta_abs * zeta_abs;
    let mut term = 1.0f64;
    let mut total = term;
    let mut n = 0usize;
    // rough total mass for the relative edge-term target
    while n < base + 200 {
        let next = term * z2 / (((n + 1) * (n + 1 + q as usize)) as f64);
        total += next;
        if n >= base && next / total < 1e-30 {
            return n + 1;
        }
        term = next;
        n += 1;
    }
    n
}

/// A pair coherent state over a truncated sector basis.
#[derive(Clone, Debug)]
pub struct PairCoherentState {
    zeta: C64,
    normalization: Normalization,
    amplitudes: PairAmplitudes,
}

impl PairCoherentState {
    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn q(&self) -> u32 {
        self.amplitudes.basis().q()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn amplitudes(&self) -> &PairAmplitudes {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `||ab psi - zeta psi|| / ||psi||`.
    pub fn eigen_residual(&self) -> f64 {
        let lowered = apply_pair_lowering(&self.amplitudes);
        let scaled = self.amplitudes.scale(self.zeta);
        let diff: f64 = lowered
            .coeffs()
            .iter()
            .zip(scaled.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        diff.sqrt() / self.amplitudes.norm()
    }
}

/// Build a pair coherent state with coefficients
/// `zeta^n / sqrt(n! (n+q)!)` for `0 <= n <= cutoff`; the normalized variant
/// carries the prefactor `[|zeta|^{-q} I_q(2|zeta|)]^{-1/2}`.
pub fn make_pair_coherent(
    zeta: C64,
    q: u32,
    cutoff: usize,
    normalization: Normalization,
) -> Result<PairCoherentState> {
    let basis = SectorBasis::new(q, cutoff);
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
    let prefactor = match normalization {
        Normalization::Normalized => {
            let n2 = pair_norm_sqr(zeta.norm(), q)?;
            C64::new(1.0 / n2.sqrt(), 0.0)
        }
        Normalization::Unnormalized => C64::new(1.0, 0.0),
    };
    if zeta == C64::new(0.0, 0.0) {
        coeffs[0] = prefactor * (-0.5 * log_factorial(q as usize)).exp();
    } else {
        let ln_abs = zeta.norm().ln();
        let arg = zeta.arg();
        for (n, c) in coeffs.iter_mut().enumerate() {
            let ln_mag = n as f64 * ln_abs
                - 0.5 * (log_factorial(n) + log_factorial(n + q as usize));
            *c = prefactor * C64::from_polar(ln_mag.exp(), n as f64 * arg);
        }
    }
    Ok(PairCoherentState {
        zeta,
        normalization,
        amplitudes: PairAmplitudes::new(basis, coeffs)?,
    })
}

/// A bi-pair coherent state: unit-norm eigenstate of `K^- = ab + cd` within
/// the coupled representation selected by `n`.
#[derive(Clone, Debug)]
pub struct BiPairCoherentState {
    zeta: C64,
    q1: u32,
    q2: u32,
    n: u32,
    kmax: u32,
    construction: Construction,
    state: FourModeState,
    /// Norm of the bare series assembly before normalization.
    assembled_norm: f64,
    /// Analytic candidate `[|zeta|^{-q} I_q(2|zeta|)]^{1/2}` for the same.
    analytic_norm: f64,
}

impl BiPairCoherentState {
    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn q1(&self) -> u32 {
        self.q1
    }

    pub fn q2(&self) -> u32 {
        self.q2
    }

    pub fn coupling_n(&self) -> u32 {
        self.n
    }

    /// Coupled charge `q = q1 + q2 + 2n + 1`.
    pub fn q(&self) -> u32 {
        cg::coupled_charge(self.q1, self.q2, self.n)
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn state(&self) -> &FourModeState {
        &self.state
    }

    pub fn assembled_norm(&self) -> f64 {
        self.assembled_norm
    }

    pub fn analytic_norm(&self) -> f64 {
        self.analytic_norm
    }

    /// Relative deviation between the assembled and analytic norms.
    pub fn norm_check_rel_dev(&self) -> f64 {
        (self.assembled_norm - self.analytic_norm).abs() / self.analytic_norm
    }

    /// `||K^- psi - zeta psi|| / ||psi||`.
    pub fn eigen_residual(&self) -> f64 {
        let lowered = apply_total_lowering(&self.state);
        let diff = lowered
            .sub(&self.state.scale(self.zeta))
            .expect("same lattice");
        norm(&diff) / norm(&self.state)
    }

    /// `||C psi - (1 - q^2)/4 psi|| / ||psi||` for the total Casimir.
    pub fn casimir_residual(&self) -> f64 {
        let q = self.q() as f64;
        let eig = 0.25 * (1.0 - q * q);
        let c = apply_casimir(&self.state);
        let diff = c
            .sub(&self.state.scale(C64::new(eig, 0.0)))
            .expect("same lattice");
        norm(&diff) / norm(&self.state)
    }
}

/// Shared assembly: `sum_k zeta^k / sqrt(k! (k+q)!) x (CG row k)` over the
/// lattice, followed by normalization and the phase convention that the
/// coupled `k = 0` component is positive real.
fn assemble_from_block(
    zeta: C64,
    block: &CGBlock,
    construction: Construction,
) -> Result<BiPairCoherentState> {
    let (q1, q2, n, kmax) = (block.q1, block.q2, block.n, block.kmax);
    let q = block.coupled_charge();
    let cut = (n + kmax + 1) as usize;
    let lattice = ProductLattice::new(q1, q2, cut, cut);
    let mut state = FourModeState::zero(lattice);

    let ln_abs = if zeta.norm() == 0.0 { 0.0 } else { zeta.norm().ln() };
    let arg = zeta.arg();
    for k in 0..=kmax {
        if zeta.norm() == 0.0 && k > 0 {
            break;
        }
        let ln_mag = k as f64 * ln_abs
            - 0.5 * (log_factorial(k as usize) + log_factorial((k + q) as usize));
        let coeff = C64::from_polar(ln_mag.exp(), k as f64 * arg);
        let d = (n + k) as usize;
        for n1 in 0..=d {
            let idx = lattice.index(n1, d - n1);
            state.amp_mut()[idx] += coeff * block.coefficient(k, n1 as u32);
        }
    }

    let assembled_norm = norm(&state);
    let analytic_norm = pair_norm_sqr(zeta.norm(), q)?.sqrt();
    let mut state = state.scale(C64::new(1.0 / assembled_norm, 0.0));
    // phase convention: the k = 0 coupled component is positive real; its
    // phase equals the phase of the (n1, n2) = (n, 0) amplitude because the
    // lowest-weight row has a positive component there
    let pivot = state.get(n as usize, 0);
    if pivot.norm() > 0.0 {
        state = state.scale(pivot.conj() / pivot.norm());
    }
    Ok(BiPairCoherentState {
        zeta,
        q1,
        q2,
        n,
        kmax,
        construction,
        state,
        assembled_norm,
        analytic_norm,
    })
}

/// Coupled-basis construction from the brute-force lowest-weight rows.
pub fn make_bipair_coupled(
    zeta: C64,
    q1: u32,
    q2: u32,
    n: u32,
    kmax: u32,
) -> Result<BiPairCoherentState> {
    let cut = (n + kmax + 1) as usize;
    let lattice = ProductLattice::new(q1, q2, cut, cut);
    let block = cg::lowest_weight_oracle(q1, q2, n, kmax, &lattice)?;
    assemble_from_block(zeta, &block, Construction::Coupled)
}

/// Direct number-basis construction from the closed-form coefficients.
pub fn make_bipair_direct(
    zeta: C64,
    q1: u32,
    q2: u32,
    n: u32,
    kmax: u32,
) -> Result<BiPairCoherentState> {
    let block = cg::formula_block(q1, q2, n, kmax)?;
    assemble_from_block(zeta, &block, Construction::Direct)
}

/// `|<coupled|direct>|` for two states on the same lattice.
pub fn construction_fidelity(a: &BiPairCoherentState, b: &BiPairCoherentState) -> Result<f64> {
    Ok(inner(&a.state, &b.state)?.norm())
}

/// The homogeneous-polynomial form of `(u+v)^n P_n^(q2,q1)((u-v)/(u+v))`:
///
/// ```text
/// (-1)^n (n+q1)! (n+q2)! sum_j (-1)^j u^j v^(n-j)
///                              / [ j! (q1+j)! (n-j)! (n+q2-j)! ]
/// ```
///
/// entire in `(u, v)`, removing the spurious singularity at `u + v = 0`.
pub fn jacobi_homogeneous(n: u32, q1: u32, q2: u32, u: C64, v: C64) -> C64 {
    let (ns, q1s, q2s) = (n as usize, q1 as usize, q2 as usize);
    let lf = log_factorial;
    let mut acc = AccumC::default();
    for j in 0..=ns {
        let ln_mag = lf(ns + q1s) + lf(ns + q2s)
            - lf(j)
            - lf(q1s + j)
            - lf(ns - j)
            - lf(ns + q2s - j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(u.powu(j as u32) * v.powu((ns - j) as u32) * (sign * ln_mag.exp()));
    }
    let block_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    acc.value() * block_sign
}

/// The analytic overlap of a bi-pair state with a product of bare pair
/// coherent states, as a function of the conjugated labels
/// `u = zeta1*, v = zeta2*`:
///
/// `f(u, v) = 2^q g_q(4 zeta (u+v)) (u+v)^n P_n^(q2,q1)((u-v)/(u+v))`
///
/// up to one overall constant. The Bessel-power combination is evaluated via
/// the entire function `g_q`, and the polynomial factor via
/// [`jacobi_homogeneous`], so the result is single-valued and entire.
pub fn overlap_f(
    zeta1_conj: C64,
    zeta2_conj: C64,
    zeta: C64,
    q1: u32,
    q2: u32,
    n: u32,
) -> Result<C64> {
    let q = cg::coupled_charge(q1, q2, n);
    let s = zeta1_conj + zeta2_conj;
    let g = bessel_i_scaled(q, zeta * s * 4.0)?;
    let poly = jacobi_homogeneous(n, q1, q2, zeta1_conj, zeta2_conj);
    Ok(g * poly * 2f64.powi(q as i32))
}

/// Overlap of a four-mode state with the product of bare pair coherent-state
/// bras, `sum amp(n1, n2) u^n1 v^n2 / sqrt(n1!(n1+q1)! n2!(n2+q2)!)`; the
/// lattice-side counterpart of [`overlap_f`].
pub fn overlap_lattice(state: &FourModeState, u: C64, v: C64) -> C64 {
    let lat = state.lattice();
    let (q1s, q2s) = (lat.q1() as usize, lat.q2() as usize);
    let mut acc = AccumC::default();
    for (n1, n2) in lat.sites() {
        let a = state.get(n1, n2);
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        let ln_mag = -0.5
            * (log_factorial(n1)
                + log_factorial(n1 + q1s)
                + log_factorial(n2)
                + log_factorial(n2 + q2s));
        acc.add(a * u.powu(n1 as u32) * v.powu(n2 as u32) * ln_mag.exp());
    }
    acc.value()
}

/// Residuals of the two defining differential equations of the overlap
/// kernel, measured by central finite differences.
#[derive(Clone, Copy, Debug)]
pub struct PdeResiduals {
    /// Max relative residual of the eigenvalue equation
    /// `[(q1+1) + u d/du] df/du + [(q2+1) + v d/dv] df/dv = zeta f`.
    pub first_max_rel: f64,
    /// Max relative residual of the Casimir equation
    /// `u v (f_uu - 2 f_uv + f_vv) + [(q1+1)v - (q2+1)u](f_u - f_v)
    ///  = -n (n + q1 + q2 + 1) f`.
    pub second_max_rel: f64,
    /// Ratio of the first-equation residual at step `h` to the one at `h/2`;
    /// near 4 for the expected O(h^2) convergence.
    pub first_h_ratio: f64,
}

/// Evaluate both differential equations on [`overlap_f`] at the given sample
/// points by central differences with step `h` (and `h/2` for the Richardson
/// consistency check).
pub fn pde_residual(
    zeta: C64,
    q1: u32,
    q2: u32,
    n: u32,
    sample_points: &[(C64, C64)],
    h: f64,
) -> Result<PdeResiduals> {
    if !(1e-5..=1e-3).contains(&h) {
        return Err(Error::Domain {
            routine: "pde_residual",
            message: format!("step h = {h} outside [1e-5, 1e-3]"),
        });
    }
    let res_at = |h: f64| -> Result<(f64, f64)> {
        let f = |u: C64, v: C64| overlap_f(u, v, zeta, q1, q2, n);
        let mut first_max = 0.0f64;
        let mut second_max = 0.0f64;
        for &(u, v) in sample_points {
            let hu = C64::new(h, 0.0);
            let f00 = f(u, v)?;
            let fpu = f(u + hu, v)?;
            let fmu = f(u - hu, v)?;
            let fpv = f(u, v + hu)?;
            let fmv = f(u, v - hu)?;
            let fu = (fpu - fmu) / (2.0 * h);
            let fv = (fpv - fmv) / (2.0 * h);
            let fuu = (fpu - f00 * 2.0 + fmu) / (h * h);
            let fvv = (fpv - f00 * 2.0 + fmv) / (h * h);
            let fuv = (f(u + hu, v + hu)? - f(u + hu, v - hu)? - f(u - hu, v + hu)?
                + f(u - hu, v - hu)?)
                / (4.0 * h * h);

            let q1f = q1 as f64;
            let q2f = q2 as f64;
            let lhs1 = fu * (q1f + 1.0) + u * fuu + fv * (q2f + 1.0) + v * fvv;
            let rhs1 = zeta * f00;
            let denom1 = rhs1.norm().max(f00.norm()).max(1e-300);
            first_max = first_max.max((lhs1 - rhs1).norm() / denom1);

            let nf = n as f64;
            let lhs2 = u * v * (fuu - fuv * 2.0 + fvv)
                + (v * (q1f + 1.0) - u * (q2f + 1.0)) * (fu - fv);
            let rhs2 = f00 * (-nf * (nf + q1f + q2f + 1.0));
            let denom2 = rhs2.norm().max(f00.norm()).max(1e-300);
            second_max = second_max.max((lhs2 - rhs2).norm() / denom2);
        }
        Ok((first_max, second_max))
    };
    let (r1_h, r2_h) = res_at(h)?;
    let (r1_h2, r2_h2) = res_at(0.5 * h)?;
    let ratio = if r1_h2 > 0.0 { r1_h / r1_h2 } else { f64::INFINITY };
    // residuals at the cancellation floor no longer scale as O(h^2); flag
    // only a gross disagreement of the two-step estimates
    if r1_h2 > 0.0 && !(0.1..=40.0).contains(&ratio) {
        return Err(Error::StepUnreliable { h, ratio });
    }
    Ok(PdeResiduals {
        first_max_rel: r1_h.min(r1_h2),
        second_max_rel: r2_h.min(r2_h2),
        first_h_ratio: ratio,
    })
}

/// Result of a resolution-of-identity diagonal element.
#[derive(Clone, Copy, Debug)]
pub struct CompletenessResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// Diagonal matrix element `<n| M |n>` of the sector measure
/// `M = int d^2zeta (2/pi) I_q(2|zeta|) K_q(2|zeta|) |zeta,q><zeta,q|`,
/// reduced analytically over the angle to the radial integral
/// `4 / (n! (n+q)!) int_0^inf r^(2n+q+1) K_q(2r) dr`; the exact value is 1.
///
/// Off-diagonal elements vanish identically: the angular integral of
/// `e^(i theta (n - m))` is zero for `n != m`.
pub fn completeness_diagonal(q: u32, n: u32, rel_tol: f64) -> Result<CompletenessResult> {
    let p = 2.0 * n as f64 + q as f64 + 1.0;
    let log_integrand = |r: f64| -> f64 {
        match bessel_k(q, 2.0 * r) {
            Ok(k) => p * r.ln() + k.ln(),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    // peak of r^p K_q(2r) sits near r* = p/2 (asymptotically K ~ e^{-2r})
    let r_star = (0.5 * p).max(1e-3);
    let l_star = log_integrand(r_star);
    // march outward until the integrand is negligible relative to the peak
    let mut r_hi = r_star;
    while log_integrand(r_hi) > l_star - 45.0 && 2.0 * r_hi < crate::specfun::BESSEL_K_MAX_X - 2.0
    {
        r_hi *= 1.25;
    }
    let r_lo = 1e-6f64;
    let integrand = |r: f64| {
        // scaled by the peak magnitude to keep the quadrature well ranged
        (log_integrand(r) - l_star).exp()
    };
    let left = adaptive_gk(&integrand, r_lo, r_star, rel_tol, 1e-280, 55)?;
    let right = adaptive_gk(&integrand, r_star, r_hi, rel_tol, 1e-280, 55)?;
    let log_pref = (4.0f64).ln() + l_star
        - log_factorial(n as usize)
        - log_factorial((n + q) as usize);
    let scale = log_pref.exp();
    Ok(CompletenessResult {
        value: (left.value + right.value) * scale,
        error_estimate: (left.error_estimate + right.error_estimate) * scale,
    })
}
