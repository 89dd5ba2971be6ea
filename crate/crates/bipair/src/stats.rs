//! Photon statistics of bi-pair coherent states: single-mode marginals,
//! Mandel Q, the pair-count distribution over lattice anti-diagonals, and the
//! closed forms available in the equal-charge special case
//! `q1 = q2 = 0, n = 0` (coupled charge `q = 1`).
//!
//! Moments are always computed from distributions rather than operator
//! shortcuts, so one code path serves every charge and coupling index. The
//! closed-form Mandel Q is evaluated verbatim and reported side by side with
//! the moment-based value; the two agree analytically, and the discrepancy
//! report exists to demonstrate that numerically.

use crate::error::{Error, Result};
use crate::specfun::{bessel_i_real, log_factorial, Accum};
use crate::states::BiPairCoherentState;

/// Which photon-count variable a distribution describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountLabel {
    /// Pair count in the first factor (`n1`, mode-a pairs).
    ModeA,
    /// Total pair count `n1 + n2` (lattice anti-diagonal index).
    PairCount,
}

/// A discrete photon-count distribution.
#[derive(Clone, Debug)]
pub struct PhotonDistribution {
    probabilities: Vec<f64>,
    label: CountLabel,
}

impl PhotonDistribution {
    pub fn new(probabilities: Vec<f64>, label: CountLabel) -> Self {
        PhotonDistribution { probabilities, label }
    }

    pub fn label(&self) -> CountLabel {
        self.label
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn sum(&self) -> f64 {
        let mut acc = Accum::default();
        for &p in &self.probabilities {
            acc.add(p);
        }
        acc.value()
    }

    pub fn mean(&self) -> f64 {
        let mut acc = Accum::default();
        for (k, &p) in self.probabilities.iter().enumerate() {
            acc.add(k as f64 * p);
        }
        acc.value()
    }

    pub fn second_moment(&self) -> f64 {
        let mut acc = Accum::default();
        for (k, &p) in self.probabilities.iter().enumerate() {
            acc.add((k as f64) * (k as f64) * p);
        }
        acc.value()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// Smallest entry (for positivity checks) and |sum - 1|.
    pub fn sanity(&self) -> (f64, f64) {
        let min = self.probabilities.iter().cloned().fold(f64::INFINITY, f64::min);
        (min, (self.sum() - 1.0).abs())
    }
}

/// Marginal distribution of the first-factor index:
/// `P[n1] = sum_n2 |amp(n1, n2)|^2`.
pub fn marginal_n1(state: &BiPairCoherentState) -> PhotonDistribution {
    let lat = state.state().lattice();
    let mut probs = vec![0.0f64; lat.n1_cut() + 1];
    let mut accs: Vec<Accum> = vec![Accum::default(); lat.n1_cut() + 1];
    for (n1, n2) in lat.sites() {
        accs[n1].add(state.state().get(n1, n2).norm_sqr());
    }
    for (p, acc) in probs.iter_mut().zip(&accs) {
        *p = acc.value();
    }
    PhotonDistribution::new(probs, CountLabel::ModeA)
}

/// Distribution of the total pair count `k = n1 + n2` (anti-diagonal sums).
/// For `q1 = q2 = 0, n = 0` the anti-diagonal index is exactly the coupled
/// ladder level.
pub fn joint_pk(state: &BiPairCoherentState) -> PhotonDistribution {
    let lat = state.state().lattice();
    let kmax = lat.n1_cut() + lat.n2_cut();
    let mut accs: Vec<Accum> = vec![Accum::default(); kmax + 1];
    for (n1, n2) in lat.sites() {
        accs[n1 + n2].add(state.state().get(n1, n2).norm_sqr());
    }
    let probs = accs.iter().map(Accum::value).collect();
    PhotonDistribution::new(probs, CountLabel::PairCount)
}

/// Closed-form single-mode probability for `q1 = q2 = 0, n = 0`:
/// `P[n1] = N1^2 |zeta|^(2 n1) sum_n2 |zeta|^(2 n2) / ((n1 + n2 + 1)!)^2`
/// with `N1^2 = |zeta| / I_1(2 |zeta|)`.
pub fn single_mode_closed(zeta_abs: f64, n1: usize) -> Result<f64> {
    let norm_sqr = if zeta_abs == 0.0 {
        1.0
    } else {
        zeta_abs / bessel_i_real(1, 2.0 * zeta_abs)?
    };
    let z2 = zeta_abs * zeta_abs;
    let mut acc = Accum::default();
    let mut term = (-2.0 * log_factorial(n1 + 1)).exp();
    acc.add(term);
    let mut n2 = 0usize;
    loop {
        term *= z2 / (((n1 + n2 + 2) * (n1 + n2 + 2)) as f64);
        acc.add(term);
        n2 += 1;
        if term <= 1e-22 * acc.value() || n2 > 10_000 {
            break;
        }
    }
    Ok(norm_sqr * z2.powi(n1 as i32) * acc.value())
}

/// Closed-form mean of the first-factor count for `q1 = q2 = 0, n = 0`:
/// `<n1> = |zeta| I_2(2|zeta|) / (2 I_1(2|zeta|))`.
pub fn mean_n1_closed(zeta_abs: f64) -> Result<f64> {
    if zeta_abs == 0.0 {
        return Ok(0.0);
    }
    Ok(zeta_abs * bessel_i_real(2, 2.0 * zeta_abs)? / (2.0 * bessel_i_real(1, 2.0 * zeta_abs)?))
}

/// Closed-form mean of the total pair count for `q1 = q2 = 0, n = 0`:
/// `<k> = |zeta| I_2(2|zeta|) / I_1(2|zeta|)`.
pub fn mean_pk_closed(zeta_abs: f64) -> Result<f64> {
    Ok(2.0 * mean_n1_closed(zeta_abs)?)
}

/// Closed-form pair-count probability for `q1 = q2 = 0, n = 0`:
/// `P[k] = N1^2 |zeta|^(2k) / (k! (k+1)!)`.
pub fn joint_pk_closed(zeta_abs: f64, k: usize) -> Result<f64> {
    let norm_sqr = if zeta_abs == 0.0 {
        1.0
    } else {
        zeta_abs / bessel_i_real(1, 2.0 * zeta_abs)?
    };
    let ln_term = if zeta_abs == 0.0 && k == 0 {
        0.0
    } else if zeta_abs == 0.0 {
        return Ok(0.0);
    } else {
        2.0 * k as f64 * zeta_abs.ln() - log_factorial(k) - log_factorial(k + 1)
    };
    Ok(norm_sqr * ln_term.exp())
}

/// Mandel Q of a distribution: `(<n^2> - <n>^2 - <n>) / <n>`.
/// Undefined (domain error) for zero mean.
pub fn mandel_q_of(dist: &PhotonDistribution) -> Result<f64> {
    let mean = dist.mean();
    if mean <= 0.0 {
        return Err(Error::Domain {
            routine: "mandel_q",
            message: "undefined for zero mean".into(),
        });
    }
    Ok((dist.second_moment() - mean * mean - mean) / mean)
}

/// Moment-based Mandel Q of a state's marginal.
pub fn mandel_q_numeric(state: &BiPairCoherentState, mode: CountLabel) -> Result<f64> {
    let dist = match mode {
        CountLabel::ModeA => marginal_n1(state),
        CountLabel::PairCount => joint_pk(state),
    };
    mandel_q_of(&dist)
}

/// The closed-form Mandel Q for `q1 = q2 = 0, n = 0`, evaluated verbatim:
/// `Q = 2|zeta| I_3(2|zeta|) / (3 I_2(2|zeta|)) - |zeta| I_2(2|zeta|) / (2 I_1(2|zeta|))`.
pub fn mandel_q_closed(zeta_abs: f64) -> Result<f64> {
    if zeta_abs <= 0.0 {
        return Err(Error::Domain {
            routine: "mandel_q_closed",
            message: "undefined at zeta = 0".into(),
        });
    }
    let x = 2.0 * zeta_abs;
    let i1 = bessel_i_real(1, x)?;
    let i2 = bessel_i_real(2, x)?;
    let i3 = bessel_i_real(3, x)?;
    Ok(2.0 * zeta_abs * i3 / (3.0 * i2) - zeta_abs * i2 / (2.0 * i1))
}

/// Fano factor `variance / mean`; domain error for zero mean.
pub fn fano(dist: &PhotonDistribution) -> Result<f64> {
    let mean = dist.mean();
    if mean <= 0.0 {
        return Err(Error::Domain {
            routine: "fano",
            message: "undefined for zero mean".into(),
        });
    }
    Ok(dist.variance() / mean)
}

/// Poisson distribution with the given mean, renormalized over `0..=kmax`.
pub fn poisson_reference(mean: f64, kmax: usize) -> Result<PhotonDistribution> {
    if mean <= 0.0 {
        return Err(Error::Domain {
            routine: "poisson_reference",
            message: "mean must be positive".into(),
        });
    }
    let probs: Vec<f64> = (0..=kmax)
        .map(|k| (k as f64 * mean.ln() - mean - log_factorial(k)).exp())
        .collect();
    let total: f64 = probs.iter().sum();
    Ok(PhotonDistribution::new(
        probs.into_iter().map(|p| p / total).collect(),
        CountLabel::PairCount,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use crate::states::{make_bipair_coupled, padded_tail_cutoff};
    use num_complex::Complex64 as C64;

    fn paper_case(zeta_abs: f64, tol: f64) -> BiPairCoherentState {
        let kmax = padded_tail_cutoff(zeta_abs, 1, tol) as u32;
        make_bipair_coupled(C64::new(zeta_abs, 0.0), 0, 0, 0, kmax).unwrap()
    }

    #[test]
    fn zero_argument_marginal_is_vacuum() {
        let s = make_bipair_coupled(C64::new(0.0, 0.0), 0, 0, 0, 2).unwrap();
        let p = marginal_n1(&s);
        assert_relative_eq!(p.probabilities()[0], 1.0, max_relative = 1e-12);
        let pk = joint_pk(&s);
        assert_relative_eq!(pk.probabilities()[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn marginal_matches_closed_form() {
        let s = paper_case(1.0, 1e-14);
        let p = marginal_n1(&s);
        for n1 in 0..p.len().min(12) {
            let closed = single_mode_closed(1.0, n1).unwrap();
            assert_abs_diff_eq!(p.probabilities()[n1], closed, epsilon = 1e-12);
        }
        let (min, sum_dev) = p.sanity();
        assert!(min >= 0.0);
        assert!(sum_dev <= 1e-10);
    }

    #[test]
    fn symmetric_case_marginals_agree() {
        // q1 = q2 and even n: the two factor marginals coincide
        let s = make_bipair_coupled(C64::new(1.2, 0.4), 1, 1, 2, 14).unwrap();
        let lat = s.state().lattice();
        let p1 = marginal_n1(&s);
        let mut p2 = vec![0.0f64; lat.n2_cut() + 1];
        for (n1, n2) in lat.sites() {
            p2[n2] += s.state().get(n1, n2).norm_sqr();
        }
        for (a, b) in p1.probabilities().iter().zip(&p2) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn mean_n1_closed_values() {
        assert_eq!(mean_n1_closed(0.0).unwrap(), 0.0);
        let i1 = bessel_i_real(1, 2.0).unwrap();
        let i2 = bessel_i_real(2, 2.0).unwrap();
        assert_relative_eq!(mean_n1_closed(1.0).unwrap(), i2 / (2.0 * i1), max_relative = 1e-13);
    }

    #[test]
    fn state_mean_matches_closed_form() {
        for &zeta_abs in &[0.5, 1.0, 2.0, 4.0] {
            let s = paper_case(zeta_abs, 1e-14);
            let p = marginal_n1(&s);
            assert_relative_eq!(
                p.mean(),
                mean_n1_closed(zeta_abs).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn mandel_q_synthetic_cases() {
        // Poisson input: Q = 0 up to truncation renormalization
        let poisson = poisson_reference(3.0, 60).unwrap();
        assert_abs_diff_eq!(mandel_q_of(&poisson).unwrap(), 0.0, epsilon = 1e-10);
        // single occupied level: Q = -1
        let mut probs = vec![0.0; 8];
        probs[3] = 1.0;
        let fock = PhotonDistribution::new(probs, CountLabel::ModeA);
        assert_relative_eq!(mandel_q_of(&fock).unwrap(), -1.0, max_relative = 1e-14);
    }

    #[test]
    fn mandel_q_negative_for_moderate_zeta() {
        let s = paper_case(1.0, 1e-13);
        let q = mandel_q_numeric(&s, CountLabel::ModeA).unwrap();
        assert!(q < 0.0, "Q = {q}");
    }

    #[test]
    fn mandel_q_undefined_at_zero() {
        let s = make_bipair_coupled(C64::new(0.0, 0.0), 0, 0, 0, 2).unwrap();
        assert!(mandel_q_numeric(&s, CountLabel::ModeA).is_err());
        assert!(mandel_q_closed(0.0).is_err());
    }

    #[test]
    fn mandel_q_closed_matches_numeric() {
        // the closed form and the moment route agree analytically; their
        // numerical discrepancy is at rounding level
        for &zeta_abs in &[0.5, 1.0, 1.5, 2.0, 3.0] {
            let s = paper_case(zeta_abs, 1e-14);
            let q_num = mandel_q_numeric(&s, CountLabel::ModeA).unwrap();
            let q_closed = mandel_q_closed(zeta_abs).unwrap();
            assert_abs_diff_eq!(q_num, q_closed, epsilon = 1e-10);
        }
    }

    #[test]
    fn joint_pk_matches_closed_form() {
        let s = paper_case(1.0, 1e-14);
        let pk = joint_pk(&s);
        for k in 0..pk.len().min(14) {
            let closed = joint_pk_closed(1.0, k).unwrap();
            assert_abs_diff_eq!(pk.probabilities()[k], closed, epsilon = 1e-12);
        }
        assert_relative_eq!(pk.mean(), mean_pk_closed(1.0).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn fano_reference_cases() {
        let poisson = poisson_reference(4.0, 80).unwrap();
        assert_abs_diff_eq!(fano(&poisson).unwrap(), 1.0, epsilon = 1e-10);
        let mut probs = vec![0.0; 6];
        probs[3] = 1.0;
        let point = PhotonDistribution::new(probs, CountLabel::PairCount);
        assert_abs_diff_eq!(fano(&point).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pair_count_is_sub_poissonian() {
        let s = paper_case(2.0, 1e-14);
        let pk = joint_pk(&s);
        let f = fano(&pk).unwrap();
        assert!(f < 1.0, "Fano = {f}");
    }

    #[test]
    fn distribution_stable_under_cutoff_increase() {
        let a = paper_case(1.5, 1e-12);
        let b = {
            let kmax = padded_tail_cutoff(1.5, 1, 1e-12) as u32 + 6;
            make_bipair_coupled(C64::new(1.5, 0.0), 0, 0, 0, kmax).unwrap()
        };
        let pa = joint_pk(&a);
        let pb = joint_pk(&b);
        for k in 0..pa.len().min(pb.len()) {
            assert_abs_diff_eq!(
                pa.probabilities()[k],
                pb.probabilities()[k],
                epsilon = 1e-12
            );
        }
    }
}
