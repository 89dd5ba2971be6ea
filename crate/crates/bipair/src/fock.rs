//! Truncated charge-sector bases and the action of the SU(1,1) generators.
//!
//! A two-mode sector with charge `q` is spanned by `|n+q, n>` for
//! `0 <= n <= N`; the four-mode product space is the tensor product of two
//! such sectors. Generators are applied matrix-free as index maps. Raising
//! out of the truncated lattice discards amplitude, so algebraic identities
//! hold exactly only on interior-supported vectors.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A charge-`q` two-mode subspace truncated at sector index `cutoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    q: u32,
    cutoff: usize,
}

impl SectorBasis {
    pub fn new(q: u32, cutoff: usize) -> Self {
        SectorBasis { q, cutoff }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// Matrix element of the pair lowering operator:
/// `ab |n+q, n> = sqrt(n (n+q)) |n-1+q, n-1>`.
#[inline]
pub fn lowering_element(q: u32, n: usize) -> f64 {
    ((n as f64) * (n as f64 + q as f64)).sqrt()
}

/// An amplitude vector over a [`SectorBasis`]; `coeffs[n]` multiplies `|n+q, n>`.
#[derive(Clone, Debug)]
pub struct PairAmplitudes {
    basis: SectorBasis,
    coeffs: Vec<C64>,
}

impl PairAmplitudes {
    pub fn new(basis: SectorBasis, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(Error::LatticeMismatch(format!(
                "coefficient length {} != basis dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        Ok(PairAmplitudes { basis, coeffs })
    }

    pub fn zero(basis: SectorBasis) -> Self {
        PairAmplitudes {
            basis,
            coeffs: vec![C64::new(0.0, 0.0); basis.dim()],
        }
    }

    /// Unit vector on sector index `n`.
    pub fn unit(basis: SectorBasis, n: usize) -> Self {
        let mut v = Self::zero(basis);
        v.coeffs[n] = C64::new(1.0, 0.0);
        v
    }

    pub fn basis(&self) -> SectorBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::LatticeMismatch("pair amplitude bases differ".into()));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, factor: C64) -> Self {
        PairAmplitudes {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}

/// `K^- = ab`: `out[n] = sqrt((n+1)(n+1+q)) in[n+1]`, `out[N] = 0`.
pub fn apply_pair_lowering(state: &PairAmplitudes) -> PairAmplitudes {
    let q = state.basis.q();
    let mut out = PairAmplitudes::zero(state.basis);
    for n in 0..state.basis.cutoff() {
        out.coeffs[n] = lowering_element(q, n + 1) * state.coeffs[n + 1];
    }
    out
}

/// `K^+ = a†b†`: `out[n] = sqrt(n(n+q)) in[n-1]`; amplitude raised past the
/// cutoff is discarded.
pub fn apply_pair_raising(state: &PairAmplitudes) -> PairAmplitudes {
    let q = state.basis.q();
    let mut out = PairAmplitudes::zero(state.basis);
    for n in 1..=state.basis.cutoff() {
        out.coeffs[n] = lowering_element(q, n) * state.coeffs[n - 1];
    }
    out
}

/// `K^z = (a†a + b†b + 1)/2`: diagonal with eigenvalue `n + (q+1)/2`.
pub fn apply_pair_kz(state: &PairAmplitudes) -> PairAmplitudes {
    let q = state.basis.q() as f64;
    let mut out = state.clone();
    for (n, c) in out.coeffs.iter_mut().enumerate() {
        *c *= n as f64 + 0.5 * (q + 1.0);
    }
    out
}

/// The four-mode `(n1, n2)` index lattice for fixed charges `(q1, q2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductLattice {
    q1: u32,
    q2: u32,
    n1_cut: usize,
    n2_cut: usize,
}

impl ProductLattice {
    pub fn new(q1: u32, q2: u32, n1_cut: usize, n2_cut: usize) -> Self {
        ProductLattice { q1, q2, n1_cut, n2_cut }
    }

    pub fn q1(&self) -> u32 {
        self.q1
    }

    pub fn q2(&self) -> u32 {
        self.q2
    }

    pub fn n1_cut(&self) -> usize {
        self.n1_cut
    }

    pub fn n2_cut(&self) -> usize {
        self.n2_cut
    }

    pub fn dim(&self) -> usize {
        (self.n1_cut + 1) * (self.n2_cut + 1)
    }

    /// Flat index of site `(n1, n2)`, row-major in `n1`.
    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 <= self.n1_cut && n2 <= self.n2_cut);
        n1 * (self.n2_cut + 1) + n2
    }

    #[inline]
    pub fn site(&self, idx: usize) -> (usize, usize) {
        (idx / (self.n2_cut + 1), idx % (self.n2_cut + 1))
    }

    pub fn sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n2_dim = self.n2_cut + 1;
        (0..self.dim()).map(move |i| (i / n2_dim, i % n2_dim))
    }
}

/// An amplitude field over a [`ProductLattice`].
#[derive(Clone, Debug)]
pub struct FourModeState {
    lattice: ProductLattice,
    amp: Vec<C64>,
}

impl FourModeState {
    pub fn new(lattice: ProductLattice, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != lattice.dim() {
            return Err(Error::LatticeMismatch(format!(
                "amplitude length {} != lattice dimension {}",
                amp.len(),
                lattice.dim()
            )));
        }
        Ok(FourModeState { lattice, amp })
    }

    pub fn zero(lattice: ProductLattice) -> Self {
        FourModeState {
            lattice,
            amp: vec![C64::new(0.0, 0.0); lattice.dim()],
        }
    }

    pub fn unit(lattice: ProductLattice, n1: usize, n2: usize) -> Self {
        let mut s = Self::zero(lattice);
        s.amp[lattice.index(n1, n2)] = C64::new(1.0, 0.0);
        s
    }

    pub fn lattice(&self) -> ProductLattice {
        self.lattice
    }

    pub fn amp(&self) -> &[C64] {
        &self.amp
    }

    pub fn amp_mut(&mut self) -> &mut [C64] {
        &mut self.amp
    }

    pub fn get(&self, n1: usize, n2: usize) -> C64 {
        self.amp[self.lattice.index(n1, n2)]
    }

    pub fn scale(&self, factor: C64) -> Self {
        FourModeState {
            lattice: self.lattice,
            amp: self.amp.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch("four-mode lattices differ".into()));
        }
        Ok(FourModeState {
            lattice: self.lattice,
            amp: self
                .amp
                .iter()
                .zip(&other.amp)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }
}

/// Sesquilinear inner product, conjugate-linear in the first argument.
pub fn inner(u: &FourModeState, v: &FourModeState) -> Result<C64> {
    if u.lattice != v.lattice {
        return Err(Error::LatticeMismatch("four-mode lattices differ".into()));
    }
    Ok(u.amp
        .iter()
        .zip(&v.amp)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

pub fn norm(v: &FourModeState) -> f64 {
    v.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `K^- = ab + cd`: sum of the factor-wise lowering actions.
pub fn apply_total_lowering(state: &FourModeState) -> FourModeState {
    let lat = state.lattice;
    let mut out = FourModeState::zero(lat);
    for (n1, n2) in lat.sites() {
        let mut acc = C64::new(0.0, 0.0);
        if n1 + 1 <= lat.n1_cut {
            acc += lowering_element(lat.q1, n1 + 1) * state.amp[lat.index(n1 + 1, n2)];
        }
        if n2 + 1 <= lat.n2_cut {
            acc += lowering_element(lat.q2, n2 + 1) * state.amp[lat.index(n1, n2 + 1)];
        }
        out.amp[lat.index(n1, n2)] = acc;
    }
    out
}

/// `K^+ = a†b† + c†d†`; amplitude raised past either cutoff is discarded.
pub fn apply_total_raising(state: &FourModeState) -> FourModeState {
    let lat = state.lattice;
    let mut out = FourModeState::zero(lat);
    for (n1, n2) in lat.sites() {
        let mut acc = C64::new(0.0, 0.0);
        if n1 >= 1 {
            acc += lowering_element(lat.q1, n1) * state.amp[lat.index(n1 - 1, n2)];
        }
        if n2 >= 1 {
            acc += lowering_element(lat.q2, n2) * state.amp[lat.index(n1, n2 - 1)];
        }
        out.amp[lat.index(n1, n2)] = acc;
    }
    out
}

/// `K^z` eigenvalue on lattice site `(n1, n2)`.
#[inline]
pub fn total_kz_eigenvalue(lat: &ProductLattice, n1: usize, n2: usize) -> f64 {
    n1 as f64 + n2 as f64 + 0.5 * (lat.q1 as f64 + lat.q2 as f64 + 2.0)
}

/// `K^z = (a†a + b†b + c†c + d†d + 2)/2`: diagonal.
pub fn apply_total_kz(state: &FourModeState) -> FourModeState {
    let lat = state.lattice;
    let mut out = state.clone();
    for (n1, n2) in lat.sites() {
        out.amp[lat.index(n1, n2)] *= total_kz_eigenvalue(&lat, n1, n2);
    }
    out
}

/// Factor-1 lowering only (`ab`), for factor-Casimir checks.
pub fn apply_factor1_lowering(state: &FourModeState) -> FourModeState {
    let lat = state.lattice;
    let mut out = FourModeState::zero(lat);
    for (n1, n2) in lat.sites() {
        if n1 + 1 <= lat.n1_cut {
            out.amp[lat.index(n1, n2)] =
                lowering_element(lat.q1, n1 + 1) * state.amp[lat.index(n1 + 1, n2)];
        }
    }
    out
}

/// Factor-2 lowering only (`cd`).
pub fn apply_factor2_lowering(state: &FourModeState) -> FourModeState {
    let lat = state.lattice;
    let mut out = FourModeState::zero(lat);
    for (n1, n2) in lat.sites() {
        if n2 + 1 <= lat.n2_cut {
            out.amp[lat.index(n1, n2)] =
                lowering_element(lat.q2, n2 + 1) * state.amp[lat.index(n1, n2 + 1)];
        }
    }
    out
}

/// Total Casimir `C = (K^+ K^- + K^- K^+)/2 - (K^z)^2`, applied through the
/// truncated generator actions. Exact on amplitudes whose raised image stays
/// inside the lattice.
pub fn apply_casimir(state: &FourModeState) -> FourModeState {
    let plus_minus = apply_total_raising(&apply_total_lowering(state));
    let minus_plus = apply_total_lowering(&apply_total_raising(state));
    let kz2 = apply_total_kz(&apply_total_kz(state));
    let mut out = FourModeState::zero(state.lattice);
    for i in 0..out.amp.len() {
        out.amp[i] = 0.5 * (plus_minus.amp[i] + minus_plus.amp[i]) - kz2.amp[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pair(basis: SectorBasis, rng: &mut ChaCha8Rng) -> PairAmplitudes {
        let coeffs = (0..basis.dim())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        PairAmplitudes::new(basis, coeffs).unwrap()
    }

    /// Random state supported strictly inside the lattice band
    /// `lo <= n1, n2 <= hi`.
    fn random_interior(lat: ProductLattice, lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> FourModeState {
        let mut s = FourModeState::zero(lat);
        for (n1, n2) in lat.sites() {
            if (lo..=hi).contains(&n1) && (lo..=hi).contains(&n2) {
                s.amp_mut()[lat.index(n1, n2)] =
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        s
    }

    #[test]
    fn lowering_annihilates_lowest_weight() {
        let basis = SectorBasis::new(2, 6);
        let e0 = PairAmplitudes::unit(basis, 0);
        let out = apply_pair_lowering(&e0);
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn lowering_unit_elements() {
        // ab on |5,2> (q = 3, n = 2) gives sqrt(2*5) |4,1>
        let basis = SectorBasis::new(3, 6);
        let e2 = PairAmplitudes::unit(basis, 2);
        let out = apply_pair_lowering(&e2);
        assert_relative_eq!(out.coeffs()[1].re, 10f64.sqrt(), max_relative = 1e-15);
        // q = 0: ab on e1 maps to e0 with element 1
        let basis0 = SectorBasis::new(0, 4);
        let e1 = PairAmplitudes::unit(basis0, 1);
        let out = apply_pair_lowering(&e1);
        assert_relative_eq!(out.coeffs()[0].re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn raising_unit_elements() {
        let basis0 = SectorBasis::new(0, 4);
        let out = apply_pair_raising(&PairAmplitudes::unit(basis0, 0));
        assert_relative_eq!(out.coeffs()[1].re, 1.0, max_relative = 1e-15);
        // a†b† on |2,0> (q = 2): sqrt(3)*sqrt(1) |3,1>
        let basis2 = SectorBasis::new(2, 4);
        let out = apply_pair_raising(&PairAmplitudes::unit(basis2, 0));
        assert_relative_eq!(out.coeffs()[1].re, 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn raising_truncation_discards() {
        let basis = SectorBasis::new(1, 3);
        let top = PairAmplitudes::unit(basis, 3);
        let out = apply_pair_raising(&top);
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn kz_eigenvalues() {
        let b0 = SectorBasis::new(0, 3);
        let out = apply_pair_kz(&PairAmplitudes::unit(b0, 0));
        assert_relative_eq!(out.coeffs()[0].re, 0.5, max_relative = 1e-15);
        let b1 = SectorBasis::new(1, 3);
        let out = apply_pair_kz(&PairAmplitudes::unit(b1, 0));
        assert_relative_eq!(out.coeffs()[0].re, 1.0, max_relative = 1e-15);
        // (a†a + b†b + 1)/2 on |5,3> = (5+3+1)/2
        let b2 = SectorBasis::new(2, 5);
        let out = apply_pair_kz(&PairAmplitudes::unit(b2, 3));
        assert_relative_eq!(out.coeffs()[3].re, 4.5, max_relative = 1e-15);
    }

    #[test]
    fn pair_adjointness() {
        // <u, K+ v> = <K- u, v> for v supported below the cutoff
        let basis = SectorBasis::new(2, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut u = random_pair(basis, &mut rng);
            let mut v = random_pair(basis, &mut rng);
            // keep the raised image inside the basis
            u.coeffs_mut()[12] = C64::new(0.0, 0.0);
            v.coeffs_mut()[12] = C64::new(0.0, 0.0);
            let lhs = u.inner(&apply_pair_raising(&v)).unwrap();
            let rhs = apply_pair_lowering(&u).inner(&v).unwrap();
            assert_relative_eq!(lhs.re, rhs.re, max_relative = 1e-12, epsilon = 1e-13);
            assert_relative_eq!(lhs.im, rhs.im, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn total_lowering_examples() {
        let lat = ProductLattice::new(0, 0, 3, 3);
        let s = FourModeState::unit(lat, 0, 0);
        assert_eq!(norm(&apply_total_lowering(&s)), 0.0);
        let s = FourModeState::unit(lat, 1, 0);
        let out = apply_total_lowering(&s);
        assert_relative_eq!(out.get(0, 0).re, 1.0, max_relative = 1e-15);
        // q1 = 1, q2 = 2 from site (1,1): sqrt(1*2) at (0,1) + sqrt(1*3) at (1,0)
        let lat = ProductLattice::new(1, 2, 3, 3);
        let s = FourModeState::unit(lat, 1, 1);
        let out = apply_total_lowering(&s);
        assert_relative_eq!(out.get(0, 1).re, 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(out.get(1, 0).re, 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn total_kz_and_raising_examples() {
        let lat = ProductLattice::new(0, 0, 3, 3);
        assert_relative_eq!(total_kz_eigenvalue(&lat, 0, 0), 1.0);
        let lat10 = ProductLattice::new(1, 0, 4, 4);
        assert_relative_eq!(total_kz_eigenvalue(&lat10, 2, 3), 6.5);
        let s = FourModeState::unit(lat, 0, 0);
        let out = apply_total_raising(&s);
        assert_relative_eq!(out.get(1, 0).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(out.get(0, 1).re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn inner_product_basics() {
        let lat = ProductLattice::new(0, 0, 2, 2);
        let e00 = FourModeState::unit(lat, 0, 0);
        let e10 = FourModeState::unit(lat, 1, 0);
        assert_eq!(inner(&e00, &e00).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(inner(&e00, &e10).unwrap(), C64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_interior(lat, 0, 2, &mut rng);
        let alpha = C64::new(-0.7, 1.3);
        assert_relative_eq!(norm(&v.scale(alpha)), alpha.norm() * norm(&v), max_relative = 1e-14);
    }

    #[test]
    fn lattice_mismatch_is_rejected() {
        let a = FourModeState::zero(ProductLattice::new(0, 0, 2, 2));
        let b = FourModeState::zero(ProductLattice::new(0, 0, 3, 2));
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn su11_commutators_on_interior_states() {
        // [K+, K-] = -2 K^z and [K^z, K±] = ±K± on states kept away from the
        // truncation edge, for each factor and for the totals
        let lat = ProductLattice::new(1, 2, 10, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let v = random_interior(lat, 1, 8, &mut rng);
            let nv = norm(&v);

            let pm = apply_total_raising(&apply_total_lowering(&v));
            let mp = apply_total_lowering(&apply_total_raising(&v));
            let comm = pm.sub(&mp).unwrap();
            let expect = apply_total_kz(&v).scale(C64::new(-2.0, 0.0));
            assert!(norm(&comm.sub(&expect).unwrap()) <= 1e-10 * nv);

            let zp = apply_total_kz(&apply_total_raising(&v));
            let pz = apply_total_raising(&apply_total_kz(&v));
            let comm = zp.sub(&pz).unwrap();
            assert!(norm(&comm.sub(&apply_total_raising(&v)).unwrap()) <= 1e-10 * nv);

            let zm = apply_total_kz(&apply_total_lowering(&v));
            let mz = apply_total_lowering(&apply_total_kz(&v));
            let comm = zm.sub(&mz).unwrap();
            let expect = apply_total_lowering(&v).scale(C64::new(-1.0, 0.0));
            assert!(norm(&comm.sub(&expect).unwrap()) <= 1e-10 * nv);
        }
    }

    #[test]
    fn casimir_commutes_with_lowering_on_interior() {
        let lat = ProductLattice::new(0, 1, 12, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let v = random_interior(lat, 2, 9, &mut rng);
            let cl = apply_casimir(&apply_total_lowering(&v));
            let lc = apply_total_lowering(&apply_casimir(&v));
            assert!(norm(&cl.sub(&lc).unwrap()) <= 1e-10 * norm(&v));
        }
    }

    #[test]
    fn casimir_vacuum_eigenvalue() {
        // on (0,0) with q1 = q2 = 0 the coupled charge is q = 1, eigenvalue 0
        let lat = ProductLattice::new(0, 0, 4, 4);
        let s = FourModeState::unit(lat, 0, 0);
        let c = apply_casimir(&s);
        assert_abs_diff_eq!(norm(&c), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn total_lowering_splits_into_factors() {
        let lat = ProductLattice::new(2, 1, 6, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let v = random_interior(lat, 0, 6, &mut rng);
        let total = apply_total_lowering(&v);
        let split = apply_factor1_lowering(&v)
            .add(&apply_factor2_lowering(&v))
            .unwrap();
        assert!(norm(&total.sub(&split).unwrap()) <= 1e-15 * norm(&v));
    }

    #[test]
    fn kz_adjoint_pair_on_interior() {
        // <u, K+ v> = <K- u, v>; K^z is diagonal real
        let lat = ProductLattice::new(2, 0, 8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_interior(lat, 0, 6, &mut rng);
        let v = random_interior(lat, 0, 6, &mut rng);
        let lhs = inner(&u, &apply_total_raising(&v)).unwrap();
        let rhs = inner(&apply_total_lowering(&u), &v).unwrap();
        assert_relative_eq!(lhs.re, rhs.re, max_relative = 1e-12, epsilon = 1e-13);
        assert_relative_eq!(lhs.im, rhs.im, max_relative = 1e-12, epsilon = 1e-13);
        let kzv = apply_total_kz(&v);
        let d = inner(&v, &kzv).unwrap();
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-12);
    }
}
