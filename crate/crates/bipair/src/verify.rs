//! Cross-module invariant suites.
//!
//! Each function here measures one family of invariants and returns the
//! worst deviation found, so the same primitives back both the `verify`
//! subcommand (thresholds applied in [`run_all`]) and the acceptance tests
//! (thresholds pinned by the test suite).

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cg;
use crate::dynamics::{
    self, dark_decomposition_residual, dark_subspace, liouvillian, liouvillian_shifted,
    shifted_jump_apply, DensityMatrix, MasterEqParams, SteadyMethod, SteadyOptions,
};
use crate::error::Result;
use crate::fock::{
    apply_casimir, apply_total_kz, apply_total_lowering, apply_total_raising, norm,
    FourModeState, ProductLattice,
};
use crate::specfun::{bessel_i, bessel_i_real, bessel_i_scaled, bessel_k, jacobi_p};
use crate::states::{
    self, construction_fidelity, make_bipair_coupled, make_bipair_direct, overlap_f,
    overlap_lattice, padded_tail_cutoff, pde_residual, BiPairCoherentState,
};
use crate::stats::{
    fano, joint_pk, joint_pk_closed, mandel_q_closed, mandel_q_numeric, marginal_n1,
    mean_n1_closed, mean_pk_closed, single_mode_closed, CountLabel,
};

/// One named invariant check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn against(name: &'static str, measured: f64, threshold: f64, detail: String) -> Self {
        CheckResult {
            name,
            pass: measured <= threshold,
            measured,
            threshold,
            detail,
        }
    }
}

/// Full verification report.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Configuration for [`run_all`].
#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tail_tol: f64,
    /// Lattice cutoff for the dissipative steady-state checks.
    pub steady_cutoff: usize,
    pub kappa: f64,
    pub g: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            tail_tol: 1e-12,
            steady_cutoff: 8,
            kappa: 1.0,
            g: 0.2,
        }
    }
}

/// Worst absolute deviation (scaled by `x`) of the Wronskian identity
/// `I_nu(x) K_{nu+1}(x) + I_{nu+1}(x) K_nu(x) = 1/x`.
pub fn wronskian_max_deviation(orders: &[u32], xs: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &nu in orders {
        for &x in xs {
            let lhs = bessel_i_real(nu, x)? * bessel_k(nu + 1, x)?
                + bessel_i_real(nu + 1, x)? * bessel_k(nu, x)?;
            worst = worst.max((lhs - 1.0 / x).abs() * x);
        }
    }
    Ok(worst)
}

/// Worst relative deviation of `I_{nu-1}(x) - I_{nu+1}(x) = (2 nu / x) I_nu(x)`.
pub fn bessel_recurrence_max_deviation(orders: &[u32], xs: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &nu in orders {
        if nu == 0 {
            continue;
        }
        for &x in xs {
            let lhs = bessel_i_real(nu - 1, x)? - bessel_i_real(nu + 1, x)?;
            let rhs = 2.0 * nu as f64 / x * bessel_i_real(nu, x)?;
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
        }
    }
    Ok(worst)
}

/// Worst relative deviation of `g_nu(w) w^(nu/2) = I_nu(sqrt(w))` on real `w`.
pub fn scaled_bessel_max_deviation(orders: &[u32], ws: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &nu in orders {
        for &w in ws {
            let g = bessel_i_scaled(nu, C64::new(w, 0.0))?;
            let i = bessel_i(nu, C64::new(w.sqrt(), 0.0))?;
            let lhs = g.re * w.powf(nu as f64 / 2.0);
            worst = worst.max((lhs - i.re).abs() / i.re.abs().max(1e-300));
        }
    }
    Ok(worst)
}

/// Worst relative deviation of the Jacobi reflection
/// `P_n^(a,b)(-x) = (-1)^n P_n^(b,a)(x)` over a sample grid.
pub fn jacobi_reflection_max_deviation() -> f64 {
    let mut worst = 0.0f64;
    for n in 0..8u32 {
        for (a, b) in [(0u32, 0u32), (1, 2), (3, 1), (2, 2)] {
            for &xr in &[-0.75, -0.2, 0.3, 0.9, 2.5] {
                let x = C64::new(xr, 0.35);
                let lhs = jacobi_p(n, a, b, -x);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = jacobi_p(n, b, a, x) * sign;
                let scale = rhs.norm().max(1.0);
                worst = worst.max((lhs - rhs).norm() / scale);
            }
        }
    }
    worst
}

fn random_interior(
    lat: ProductLattice,
    lo: usize,
    hi: usize,
    rng: &mut ChaCha8Rng,
) -> FourModeState {
    let mut s = FourModeState::zero(lat);
    for (n1, n2) in lat.sites() {
        if (lo..=hi).contains(&n1) && (lo..=hi).contains(&n2) {
            s.amp_mut()[lat.index(n1, n2)] =
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    s
}

/// Worst relative residual of the SU(1,1) commutators
/// `[K+, K-] = -2 K^z`, `[K^z, K±] = ±K±`, plus Casimir commutation with the
/// lowering generator, on interior-supported random states.
pub fn algebra_suite_max_residual(seed: u64, trials: usize) -> Result<f64> {
    let lat = ProductLattice::new(1, 2, 12, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v = random_interior(lat, 1, 9, &mut rng);
        let nv = norm(&v);

        let pm = apply_total_raising(&apply_total_lowering(&v));
        let mp = apply_total_lowering(&apply_total_raising(&v));
        let comm = pm.sub(&mp)?;
        let expect = apply_total_kz(&v).scale(C64::new(-2.0, 0.0));
        worst = worst.max(norm(&comm.sub(&expect)?) / nv);

        let zp = apply_total_kz(&apply_total_raising(&v));
        let pz = apply_total_raising(&apply_total_kz(&v));
        worst = worst.max(norm(&zp.sub(&pz)?.sub(&apply_total_raising(&v))?) / nv);

        let zm = apply_total_kz(&apply_total_lowering(&v));
        let mz = apply_total_lowering(&apply_total_kz(&v));
        let expect = apply_total_lowering(&v).scale(C64::new(-1.0, 0.0));
        worst = worst.max(norm(&zm.sub(&mz)?.sub(&expect)?) / nv);

        let cl = apply_casimir(&apply_total_lowering(&v));
        let lc = apply_total_lowering(&apply_casimir(&v));
        worst = worst.max(norm(&cl.sub(&lc)?) / nv);
    }
    Ok(worst)
}

/// Summary of the coefficient sweep: closed form against the brute-force
/// construction, row orthonormality, the ladder recurrence, and the
/// equal-charge special case.
#[derive(Clone, Copy, Debug, Default)]
pub struct CgSweepSummary {
    pub max_formula_oracle_dev: f64,
    pub max_row_norm_dev: f64,
    pub max_gram_dev: f64,
    pub max_recurrence_residual: f64,
    pub max_uniform_case_dev: f64,
}

pub fn cg_sweep(q_max: u32, n_max: u32, k_max: u32) -> Result<CgSweepSummary> {
    let mut s = CgSweepSummary::default();
    for q1 in 0..=q_max {
        for q2 in 0..=q_max {
            let mut blocks = Vec::new();
            for n in 0..=n_max {
                let cut = (n + k_max + 2) as usize;
                let lat = ProductLattice::new(q1, q2, cut, cut);
                let oracle = cg::lowest_weight_oracle(q1, q2, n, k_max, &lat)?;
                let formula = cg::formula_block(q1, q2, n, k_max)?;
                let report = cg::validate_block(&formula, &oracle)?;
                s.max_formula_oracle_dev = s.max_formula_oracle_dev.max(report.max_abs_deviation);
                s.max_row_norm_dev = s
                    .max_row_norm_dev
                    .max(formula.row_norm_deviation())
                    .max(oracle.row_norm_deviation());
                s.max_recurrence_residual = s
                    .max_recurrence_residual
                    .max(ladder_recurrence_residual(&oracle, &lat)?);
                blocks.push(formula);
            }
            let total = n_max;
            s.max_gram_dev = s
                .max_gram_dev
                .max(cg::completeness_gram_deviation(&blocks, total)?);
        }
    }
    for k in 0..=k_max {
        for n1 in 0..=k {
            let c = cg::cg_coefficient(0, 0, 0, k, n1)?;
            s.max_uniform_case_dev = s
                .max_uniform_case_dev
                .max((c - 1.0 / ((k + 1) as f64).sqrt()).abs());
        }
    }
    Ok(s)
}

/// `K^-` applied to oracle row `k` must equal `sqrt(k (k+q))` times row
/// `k-1`; returns the worst relative residual over the block.
fn ladder_recurrence_residual(block: &cg::CGBlock, lat: &ProductLattice) -> Result<f64> {
    let q = block.coupled_charge() as f64;
    let n = block.n as usize;
    let mut worst = 0.0f64;
    for k in 1..=block.kmax {
        let d = n + k as usize;
        let mut upper = FourModeState::zero(*lat);
        for n1 in 0..=d {
            upper.amp_mut()[lat.index(n1, d - n1)] =
                C64::new(block.coefficient(k, n1 as u32), 0.0);
        }
        let lowered = apply_total_lowering(&upper);
        let mut expect = FourModeState::zero(*lat);
        for n1 in 0..d {
            expect.amp_mut()[lat.index(n1, d - 1 - n1)] =
                C64::new(block.coefficient(k - 1, n1 as u32), 0.0);
        }
        let coeff = ((k as f64) * (k as f64 + q)).sqrt();
        let resid = norm(&lowered.sub(&expect.scale(C64::new(coeff, 0.0)))?) / coeff;
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// Worst-case residuals over a grid of constructed states.
#[derive(Clone, Copy, Debug, Default)]
pub struct StateGridSummary {
    pub max_eigen_residual: f64,
    pub max_casimir_residual: f64,
    pub min_fidelity: f64,
    pub max_norm_dev: f64,
    pub states_checked: usize,
}

/// Build coupled and direct states for every `(zeta, q1, q2, n)` combination
/// and measure eigenvalue residual, Casimir residual, cross-construction
/// fidelity, and the analytic-norm consistency of the coupled assembly.
pub fn state_grid(zetas: &[C64], q_max: u32, n_max: u32, tail_tol: f64) -> Result<StateGridSummary> {
    let mut s = StateGridSummary {
        min_fidelity: 1.0,
        ..StateGridSummary::default()
    };
    for &zeta in zetas {
        for q1 in 0..=q_max {
            for q2 in 0..=q_max {
                for n in 0..=n_max {
                    let q = cg::coupled_charge(q1, q2, n);
                    let kmax = padded_tail_cutoff(zeta.norm(), q, tail_tol) as u32;
                    let coupled = make_bipair_coupled(zeta, q1, q2, n, kmax)?;
                    let direct = make_bipair_direct(zeta, q1, q2, n, kmax)?;
                    s.max_eigen_residual = s
                        .max_eigen_residual
                        .max(coupled.eigen_residual())
                        .max(direct.eigen_residual());
                    s.max_casimir_residual = s
                        .max_casimir_residual
                        .max(coupled.casimir_residual())
                        .max(direct.casimir_residual());
                    s.min_fidelity = s.min_fidelity.min(construction_fidelity(&coupled, &direct)?);
                    s.max_norm_dev = s.max_norm_dev.max(coupled.norm_check_rel_dev());
                    s.states_checked += 1;
                }
            }
        }
    }
    Ok(s)
}

/// Relative spread of the lattice-overlap / analytic-overlap ratio across
/// sample points; zero means the two agree up to one global constant.
pub fn overlap_ratio_spread(
    state: &BiPairCoherentState,
    samples: &[(C64, C64)],
) -> Result<f64> {
    let mut ratios = Vec::with_capacity(samples.len());
    for &(u, v) in samples {
        let lhs = overlap_lattice(state.state(), u, v);
        let rhs = overlap_f(u, v, state.zeta(), state.q1(), state.q2(), state.coupling_n())?;
        ratios.push(lhs / rhs);
    }
    let reference = ratios[0];
    let mut spread = 0.0f64;
    for r in &ratios[1..] {
        spread = spread.max((r - reference).norm() / reference.norm());
    }
    Ok(spread)
}

/// Deterministic sample points away from `zeta1* + zeta2* = 0`.
pub fn overlap_sample_points(count: usize) -> Vec<(C64, C64)> {
    (0..count)
        .map(|i| {
            let t = i as f64 / count as f64;
            let u = C64::new(0.3 + 0.6 * t, 0.4 - 0.5 * t);
            let v = C64::new(0.5 - 0.3 * t, -0.2 + 0.6 * t);
            (u, v)
        })
        .collect()
}

/// Worst deviations between state-derived and closed-form statistics in the
/// equal-charge case (`q1 = q2 = 0`, `n = 0`).
#[derive(Clone, Copy, Debug, Default)]
pub struct StatsGridSummary {
    pub max_marginal_abs_dev: f64,
    pub max_pk_abs_dev: f64,
    pub max_mean_n1_rel_dev: f64,
    pub max_mean_k_rel_dev: f64,
    pub max_dist_sum_dev: f64,
    pub min_probability: f64,
}

pub fn stats_grid(zeta_grid: &[f64], tail_tol: f64) -> Result<StatsGridSummary> {
    let mut s = StatsGridSummary {
        min_probability: f64::INFINITY,
        ..StatsGridSummary::default()
    };
    for &zeta_abs in zeta_grid {
        let kmax = padded_tail_cutoff(zeta_abs, 1, tail_tol) as u32;
        let state = make_bipair_coupled(C64::new(zeta_abs, 0.0), 0, 0, 0, kmax)?;
        let p1 = marginal_n1(&state);
        for (n1, &p) in p1.probabilities().iter().enumerate() {
            let closed = single_mode_closed(zeta_abs, n1)?;
            s.max_marginal_abs_dev = s.max_marginal_abs_dev.max((p - closed).abs());
        }
        let pk = joint_pk(&state);
        for (k, &p) in pk.probabilities().iter().enumerate() {
            let closed = joint_pk_closed(zeta_abs, k)?;
            s.max_pk_abs_dev = s.max_pk_abs_dev.max((p - closed).abs());
        }
        let mean_closed = mean_n1_closed(zeta_abs)?;
        if mean_closed > 0.0 {
            s.max_mean_n1_rel_dev = s
                .max_mean_n1_rel_dev
                .max((p1.mean() - mean_closed).abs() / mean_closed);
        }
        let mean_k_closed = mean_pk_closed(zeta_abs)?;
        if mean_k_closed > 0.0 {
            s.max_mean_k_rel_dev = s
                .max_mean_k_rel_dev
                .max((pk.mean() - mean_k_closed).abs() / mean_k_closed);
        }
        for dist in [&p1, &pk] {
            let (min_p, sum_dev) = dist.sanity();
            s.min_probability = s.min_probability.min(min_p);
            s.max_dist_sum_dev = s.max_dist_sum_dev.max(sum_dev);
        }
    }
    Ok(s)
}

/// Moment-based Mandel Q on a grid (for the negativity claim).
pub fn mandel_q_grid(zeta_grid: &[f64], tail_tol: f64) -> Result<Vec<f64>> {
    zeta_grid
        .iter()
        .map(|&zeta_abs| {
            let kmax = padded_tail_cutoff(zeta_abs, 1, tail_tol) as u32;
            let state = make_bipair_coupled(C64::new(zeta_abs, 0.0), 0, 0, 0, kmax)?;
            mandel_q_numeric(&state, CountLabel::ModeA)
        })
        .collect()
}

/// Fano factors of the pair-count distribution on a grid.
pub fn fano_grid(zeta_grid: &[f64], tail_tol: f64) -> Result<Vec<f64>> {
    zeta_grid
        .iter()
        .map(|&zeta_abs| {
            let kmax = padded_tail_cutoff(zeta_abs, 1, tail_tol) as u32;
            let state = make_bipair_coupled(C64::new(zeta_abs, 0.0), 0, 0, 0, kmax)?;
            fano(&joint_pk(&state))
        })
        .collect()
}

/// Max |closed-form Q - moment-based Q| over the grid: the discrepancy
/// report for the verbatim closed form.
pub fn mandel_discrepancy(zeta_grid: &[f64], tail_tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for &zeta_abs in zeta_grid {
        let kmax = padded_tail_cutoff(zeta_abs, 1, tail_tol) as u32;
        let state = make_bipair_coupled(C64::new(zeta_abs, 0.0), 0, 0, 0, kmax)?;
        let q_num = mandel_q_numeric(&state, CountLabel::ModeA)?;
        let q_closed = mandel_q_closed(zeta_abs)?;
        worst = worst.max((q_closed - q_num).abs());
    }
    Ok(worst)
}

/// Max deviations of the Liouvillian contracts on random Hermitian inputs:
/// trace annihilation, hermiticity preservation, and agreement of the
/// shifted Lindblad form with the unshifted form.
#[derive(Clone, Copy, Debug, Default)]
pub struct LiouvillianContractSummary {
    pub max_trace: f64,
    pub max_antihermitian: f64,
    pub max_form_deviation: f64,
}

pub fn liouvillian_contracts(
    seed: u64,
    trials: usize,
    kappa: f64,
    g: f64,
    cutoff: usize,
) -> Result<LiouvillianContractSummary> {
    let lat = ProductLattice::new(0, 0, cutoff, cutoff);
    let params = MasterEqParams::new(kappa, g, lat)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = lat.dim();
    let mut s = LiouvillianContractSummary::default();
    for _ in 0..trials {
        let mut m = nalgebra::DMatrix::<C64>::zeros(d, d);
        for c in 0..d {
            for r in 0..d {
                m[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut rho = DensityMatrix::new(lat, herm)?;
        rho.hermitize();
        let scale = rho.frobenius_norm();
        let a = liouvillian(&rho, &params)?;
        let b = liouvillian_shifted(&rho, &params)?;
        s.max_trace = s.max_trace.max(a.trace().norm() / scale);
        s.max_antihermitian = s.max_antihermitian.max(a.hermiticity_deviation() / scale);
        let diff = (a.mat() - b.mat()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        s.max_form_deviation = s.max_form_deviation.max(diff / a.frobenius_norm().max(scale));
    }
    Ok(s)
}

/// Outcome of the dissipative steady-state suite.
#[derive(Clone, Copy, Debug, Default)]
pub struct SteadySummary {
    pub dark_residual_evolve: f64,
    pub dark_residual_nullspace: f64,
    pub trace_dev: f64,
    pub method_difference: f64,
    pub decomposition_residual: f64,
    pub lyapunov_violation: f64,
    pub edge_population: f64,
    pub purity: f64,
    pub kernel_dim: usize,
    pub evolve_steps: usize,
}

/// Run both steady-state routes from the vacuum projector and collect every
/// contract the dark-state physics imposes.
pub fn steady_suite(kappa: f64, g: f64, cutoff: usize, nmax_dark: u32) -> Result<SteadySummary> {
    let lat = ProductLattice::new(0, 0, cutoff, cutoff);
    let params = MasterEqParams::new(kappa, g, lat)?;
    let rho0 = DensityMatrix::vacuum_projector(lat);
    let opts = SteadyOptions::default();

    let by_evolve = dynamics::steady_state(&params, &rho0, SteadyMethod::Evolve, &opts)?;
    let rho_evolve = by_evolve.rho;
    let evolve_steps = by_evolve.iterations;

    // the logged Liouvillian norms must be non-increasing within solver noise
    let mut lyapunov_violation = 0.0f64;
    for w in by_evolve.residual_log.windows(2) {
        lyapunov_violation = lyapunov_violation.max(w[1].1 - w[0].1);
    }

    let by_null = dynamics::steady_state(&params, &rho0, SteadyMethod::Nullspace, &opts)?;

    let method_difference = (rho_evolve.mat() - by_null.rho.mat())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();

    let family = dark_subspace(&params, params.dark_eigenvalue(), nmax_dark)?;
    Ok(SteadySummary {
        dark_residual_evolve: shifted_jump_apply(&rho_evolve, &params).frobenius_norm(),
        dark_residual_nullspace: shifted_jump_apply(&by_null.rho, &params).frobenius_norm(),
        trace_dev: (rho_evolve.trace().re - 1.0).abs(),
        method_difference,
        decomposition_residual: dark_decomposition_residual(&rho_evolve, &family),
        lyapunov_violation,
        edge_population: rho_evolve.edge_population(),
        purity: rho_evolve.purity(),
        kernel_dim: by_null.kernel_dim.unwrap_or(0),
        evolve_steps,
    })
}

/// Run every module's invariant suite with the given configuration.
pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let xs = [0.5, 1.0, 2.0, 5.0, 10.0];
    let orders = [0u32, 1, 2, 3];

    checks.push(CheckResult::against(
        "specfun/bessel_wronskian",
        wronskian_max_deviation(&orders, &xs)?,
        1e-10,
        "x |I K' + I' K - 1/x| over the order/argument grid".into(),
    ));
    checks.push(CheckResult::against(
        "specfun/bessel_recurrence",
        bessel_recurrence_max_deviation(&orders, &xs)?,
        1e-10,
        "three-term recurrence, relative".into(),
    ));
    checks.push(CheckResult::against(
        "specfun/scaled_bessel_consistency",
        scaled_bessel_max_deviation(&[0, 1, 2, 3, 4], &[0.25, 1.0, 4.0, 25.0, 100.0])?,
        1e-12,
        "g_nu(w) w^(nu/2) vs I_nu(sqrt(w)), relative".into(),
    ));
    checks.push(CheckResult::against(
        "specfun/jacobi_reflection",
        jacobi_reflection_max_deviation(),
        1e-12,
        "P_n^(a,b)(-x) = (-1)^n P_n^(b,a)(x), relative".into(),
    ));

    checks.push(CheckResult::against(
        "fock/su11_algebra",
        algebra_suite_max_residual(cfg.seed, 100)?,
        1e-10,
        "commutators and Casimir commutation on interior states, 100 seeded trials".into(),
    ));

    let cg_summary = cg_sweep(3, 3, 6)?;
    checks.push(CheckResult::against(
        "cg/formula_vs_oracle",
        cg_summary.max_formula_oracle_dev,
        1e-9,
        "closed form vs lowest-weight construction, q1,q2 <= 3, n <= 3, k <= 6".into(),
    ));
    checks.push(CheckResult::against(
        "cg/row_orthonormality",
        cg_summary.max_row_norm_dev.max(cg_summary.max_gram_dev),
        1e-10,
        "row norms and cross-block Gram matrices".into(),
    ));
    checks.push(CheckResult::against(
        "cg/ladder_recurrence",
        cg_summary.max_recurrence_residual,
        1e-10,
        "K^- on row k vs sqrt(k(k+q)) row k-1, relative".into(),
    ));
    checks.push(CheckResult::against(
        "cg/uniform_special_case",
        cg_summary.max_uniform_case_dev,
        1e-12,
        "q1 = q2 = 0, n = 0 rows equal 1/sqrt(k+1)".into(),
    ));

    let zetas = [C64::new(0.5, 0.0), C64::new(1.5, 0.5), C64::new(3.0, 0.0)];
    let grid = state_grid(&zetas, 2, 2, cfg.tail_tol)?;
    checks.push(CheckResult::against(
        "states/eigen_residual",
        grid.max_eigen_residual,
        1e-8,
        format!("lowering eigenvalue residual over {} states", grid.states_checked),
    ));
    checks.push(CheckResult::against(
        "states/casimir_residual",
        grid.max_casimir_residual,
        1e-8,
        "total Casimir eigenvalue residual over the same grid".into(),
    ));
    checks.push(CheckResult::against(
        "states/construction_equivalence",
        1.0 - grid.min_fidelity,
        1e-10,
        "1 - |<coupled|direct>|".into(),
    ));
    checks.push(CheckResult::against(
        "states/norm_consistency",
        grid.max_norm_dev,
        1e-8,
        "assembled vs analytic normalization, relative".into(),
    ));

    let samples = overlap_sample_points(10);
    let mut overlap_spread = 0.0f64;
    for (zeta, q1, q2, n) in [
        (C64::new(0.8, 0.5), 1u32, 0u32, 1u32),
        (C64::new(1.2, 0.0), 0, 0, 0),
        (C64::new(0.5, -0.3), 2, 1, 2),
    ] {
        let q = cg::coupled_charge(q1, q2, n);
        let kmax = padded_tail_cutoff(zeta.norm(), q, 1e-13) as u32;
        let state = make_bipair_coupled(zeta, q1, q2, n, kmax)?;
        overlap_spread = overlap_spread.max(overlap_ratio_spread(&state, &samples)?);
    }
    checks.push(CheckResult::against(
        "states/overlap_ratio_constancy",
        overlap_spread,
        1e-8,
        "lattice overlap / analytic kernel constant across 10 samples, 3 cases".into(),
    ));

    let pde_samples = [
        (C64::new(0.5, 0.2), C64::new(0.3, -0.1)),
        (C64::new(-0.4, 0.3), C64::new(0.8, 0.2)),
        (C64::new(0.2, -0.6), C64::new(0.5, 0.5)),
    ];
    let pde = pde_residual(C64::new(1.0, 0.0), 0, 0, 0, &pde_samples, 1e-4)?;
    checks.push(CheckResult::against(
        "states/pde_first_residual",
        pde.first_max_rel,
        1e-6,
        "eigenvalue differential equation, central differences".into(),
    ));
    let pde_conv = pde_residual(
        C64::new(2.0, 1.0),
        1,
        0,
        2,
        &[(C64::new(1.0, 0.1), C64::new(0.8, -0.2))],
        1e-3,
    )?;
    checks.push(CheckResult::against(
        "states/pde_order_h2",
        (pde_conv.first_h_ratio - 4.0).abs(),
        2.5,
        format!("halving h scales the residual by {:.2} (expect ~4)", pde_conv.first_h_ratio),
    ));

    let mut completeness_worst = 0.0f64;
    for q in 0..=5u32 {
        for n in 0..=10u32 {
            let r = states::completeness_diagonal(q, n, 1e-9)?;
            completeness_worst = completeness_worst.max((r.value - 1.0).abs());
        }
    }
    checks.push(CheckResult::against(
        "states/completeness_diagonal",
        completeness_worst,
        1e-6,
        "identity-resolution diagonal elements, q <= 5, n <= 10".into(),
    ));

    let stats = stats_grid(&[0.25, 0.5, 1.0, 2.0, 3.0, 4.0], 1e-14)?;
    checks.push(CheckResult::against(
        "stats/closed_form_distributions",
        stats.max_marginal_abs_dev.max(stats.max_pk_abs_dev),
        1e-12,
        "state-derived vs closed-form distributions, absolute per entry".into(),
    ));
    checks.push(CheckResult::against(
        "stats/closed_form_means",
        stats.max_mean_n1_rel_dev.max(stats.max_mean_k_rel_dev),
        1e-10,
        "state-derived vs closed-form means, relative".into(),
    ));
    checks.push(CheckResult::against(
        "stats/distribution_sanity",
        stats.max_dist_sum_dev.max((-stats.min_probability).max(0.0)),
        1e-10,
        "probabilities in [0,1], sums equal 1".into(),
    ));

    // the single-mode Q is negative only up to |zeta| ~ 1.466 (crossing at
    // |zeta|^2 ~ 2.149), as both the moment route and the closed form agree;
    // gate the sub-range where the sign is robust and report the rest
    let q_values = mandel_q_grid(&[0.25, 0.5, 0.75, 1.0, 1.25], cfg.tail_tol)?;
    let worst_q = q_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    checks.push(CheckResult::against(
        "stats/mandel_q_negative_small_zeta",
        worst_q,
        -f64::MIN_POSITIVE,
        "moment-based Q < 0 for |zeta| in {0.25..1.25}".into(),
    ));
    let q_large = mandel_q_grid(&[1.5, 1.75], cfg.tail_tol)?;
    checks.push(CheckResult {
        name: "stats/mandel_q_sign_change",
        pass: true,
        measured: q_large[1],
        threshold: f64::INFINITY,
        detail: format!(
            "informational: Q(1.5) = {:+.4e}, Q(1.75) = {:+.4e}; the sign flips near \
             |zeta| = 1.466, earlier than the claimed |zeta| = 2",
            q_large[0], q_large[1]
        ),
    });

    let fanos = fano_grid(
        &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
        cfg.tail_tol,
    )?;
    let worst_fano = fanos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    checks.push(CheckResult::against(
        "stats/sub_poissonian_fano",
        worst_fano,
        1.0 - 1e-12,
        "Fano factor of the pair-count distribution < 1".into(),
    ));

    let disc = mandel_discrepancy(&[0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], cfg.tail_tol)?;
    checks.push(CheckResult {
        name: "stats/mandel_closed_form_discrepancy",
        pass: true,
        measured: disc,
        threshold: f64::INFINITY,
        detail: "informational: max |closed-form Q - moment Q| over the scan range".into(),
    });

    let contracts = liouvillian_contracts(cfg.seed, 50, cfg.kappa, cfg.g, 4)?;
    checks.push(CheckResult::against(
        "dynamics/trace_preservation",
        contracts.max_trace,
        1e-12,
        "trace of the generator image, 50 random Hermitian inputs".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/hermiticity_preservation",
        contracts.max_antihermitian,
        1e-12,
        "anti-Hermitian component of the generator image".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/shifted_form_equivalence",
        contracts.max_form_deviation,
        1e-12,
        "unshifted vs shifted Lindblad form, relative".into(),
    ));

    let steady = steady_suite(cfg.kappa, cfg.g, cfg.steady_cutoff, 2)?;
    checks.push(CheckResult::against(
        "dynamics/steady_dark_condition",
        steady.dark_residual_evolve.max(steady.dark_residual_nullspace),
        1e-8,
        format!(
            "||(O - lambda) rho_ss||_F from both methods ({} evolve steps)",
            steady.evolve_steps
        ),
    ));
    checks.push(CheckResult::against(
        "dynamics/steady_method_agreement",
        steady.method_difference,
        1e-6,
        "Frobenius difference between evolve and nullspace steady states".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/steady_trace",
        steady.trace_dev,
        1e-12,
        "steady-state trace deviation from 1".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/dark_decomposition",
        steady.decomposition_residual,
        1e-7,
        "||rho - P rho P||_F on the dark family".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/lyapunov_monotonic",
        steady.lyapunov_violation,
        1e-10,
        "increase of ||L(rho)||_F between logged checkpoints".into(),
    ));
    checks.push(CheckResult::against(
        "dynamics/cutoff_adequacy",
        steady.edge_population,
        1e-10,
        "steady-state population on the outermost lattice shell".into(),
    ));

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_verification_passes() {
        let cfg = VerifyConfig::default();
        let report = run_all(&cfg).unwrap();
        for c in &report.checks {
            assert!(
                c.pass,
                "{} failed: measured {:.3e} vs threshold {:.3e} ({})",
                c.name, c.measured, c.threshold, c.detail
            );
        }
    }
}
