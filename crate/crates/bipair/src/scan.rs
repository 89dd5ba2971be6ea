//! Scan drivers behind the CLI subcommands: each produces a CSV document
//! with the full configuration echoed in its header comments.

use num_complex::Complex64 as C64;

use crate::cg;
use crate::dynamics::{
    dark_decomposition_residual, dark_overlap, dark_subspace, shifted_jump_apply, DensityMatrix,
    Liouvillian, MasterEqParams, SteadyMethod, SteadyOptions,
};
use crate::error::{Error, Result};
use crate::fock::ProductLattice;
use crate::output::{fmt_f64, CsvDocument};
use crate::states::{
    make_bipair_coupled, overlap_f, overlap_lattice, padded_tail_cutoff, pde_residual,
};
use crate::stats::{
    joint_pk, mandel_q_closed, mandel_q_of, marginal_n1, mean_n1_closed, poisson_reference,
};
use crate::verify::{self, VerifyConfig};

/// Common scan parameters (echoed into every output header).
#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    pub q1: u32,
    pub q2: u32,
    pub n: u32,
    pub tail_tol: f64,
    pub seed: u64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub steps: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            q1: 0,
            q2: 0,
            n: 0,
            tail_tol: 1e-12,
            seed: 7,
            zeta_min: 0.25,
            zeta_max: 1.75,
            steps: 7,
        }
    }
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.tail_tol <= 0.0 {
            return Err(Error::Domain {
                routine: "scan",
                message: format!("tail_tol = {} must be positive", self.tail_tol),
            });
        }
        if self.steps < 1 {
            return Err(Error::Domain {
                routine: "scan",
                message: "grid needs at least one step".into(),
            });
        }
        if self.zeta_max < self.zeta_min {
            return Err(Error::Domain {
                routine: "scan",
                message: "zeta_max below zeta_min".into(),
            });
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.zeta_min];
        }
        let h = (self.zeta_max - self.zeta_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.zeta_min + h * i as f64).collect()
    }

    fn echo_into(&self, doc: &mut CsvDocument) {
        doc.comment(&format!(
            "q1 = {}, q2 = {}, n = {}, tail_tol = {:e}, seed = {}",
            self.q1, self.q2, self.n, self.tail_tol, self.seed
        ));
    }

    fn echo_grid_into(&self, doc: &mut CsvDocument) {
        doc.comment(&format!(
            "zeta grid: [{}, {}] in {} steps",
            self.zeta_min, self.zeta_max, self.steps
        ));
    }

    fn is_special_case(&self) -> bool {
        self.q1 == 0 && self.q2 == 0 && self.n == 0
    }
}

/// Mandel-Q scan over `|zeta|`: moment-based and closed-form Q side by side,
/// together with the mode-a mean from both routes.
pub fn qscan(config: &ScanConfig) -> Result<CsvDocument> {
    config.validate()?;
    let mut doc = CsvDocument::new();
    doc.comment("qscan: Mandel Q and mode-a mean vs |zeta|");
    config.echo_into(&mut doc);
    config.echo_grid_into(&mut doc);
    if !config.is_special_case() {
        doc.comment("closed-form columns apply to q1 = q2 = 0, n = 0 only; emitted as NaN here");
    }
    doc.header(&[
        "zeta_abs",
        "q_numeric",
        "q_closed",
        "n1_mean_numeric",
        "n1_mean_closed",
        "cutoff_used",
    ]);
    let q = cg::coupled_charge(config.q1, config.q2, config.n);
    for zeta_abs in config.grid() {
        let kmax = padded_tail_cutoff(zeta_abs, q, config.tail_tol) as u32;
        let state =
            make_bipair_coupled(C64::new(zeta_abs, 0.0), config.q1, config.q2, config.n, kmax)?;
        let dist = marginal_n1(&state);
        let (min_p, sum_dev) = dist.sanity();
        if min_p < -1e-12 || sum_dev > 1e-10 {
            return Err(Error::Validation(format!(
                "marginal failed sanity at |zeta| = {zeta_abs}: min {min_p:e}, sum dev {sum_dev:e}"
            )));
        }
        let q_numeric = mandel_q_of(&dist)?;
        let mean_numeric = dist.mean();
        let (q_closed, mean_closed) = if config.is_special_case() {
            (mandel_q_closed(zeta_abs)?, mean_n1_closed(zeta_abs)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        doc.row(&[
            fmt_f64(zeta_abs),
            fmt_f64(q_numeric),
            fmt_f64(q_closed),
            fmt_f64(mean_numeric),
            fmt_f64(mean_closed),
            kmax.to_string(),
        ]);
    }
    Ok(doc)
}

/// Pair-count distribution at one `|zeta|` with the equal-mean Poissonian.
pub fn pk_scan(config: &ScanConfig, zeta_abs: f64) -> Result<CsvDocument> {
    config.validate()?;
    let mut doc = CsvDocument::new();
    doc.comment("pk: pair-count distribution against the equal-mean Poissonian");
    config.echo_into(&mut doc);
    doc.comment(&format!("zeta_abs = {zeta_abs}"));
    doc.header(&["k", "p_k", "poisson_ref"]);
    let q = cg::coupled_charge(config.q1, config.q2, config.n);
    let kmax = padded_tail_cutoff(zeta_abs, q, config.tail_tol) as u32;
    let state = make_bipair_coupled(C64::new(zeta_abs, 0.0), config.q1, config.q2, config.n, kmax)?;
    let dist = joint_pk(&state);
    let (min_p, sum_dev) = dist.sanity();
    if min_p < -1e-12 || sum_dev > 1e-10 {
        return Err(Error::Validation(format!(
            "distribution failed sanity: min {min_p:e}, sum dev {sum_dev:e}"
        )));
    }
    let mean = dist.mean();
    let poisson = poisson_reference(mean, dist.len() - 1)?;
    for (k, (&p, &pr)) in dist
        .probabilities()
        .iter()
        .zip(poisson.probabilities())
        .enumerate()
    {
        doc.row(&[k.to_string(), fmt_f64(p), fmt_f64(pr)]);
    }
    Ok(doc)
}

/// Coefficient table dump: closed form next to the lowest-weight oracle.
pub fn cg_table(config: &ScanConfig, kmax: u32) -> Result<CsvDocument> {
    config.validate()?;
    let mut doc = CsvDocument::new();
    doc.comment("cg: closed-form coefficients against the lowest-weight construction");
    config.echo_into(&mut doc);
    doc.header(&[
        "q1",
        "q2",
        "n",
        "k",
        "n1",
        "n2",
        "coefficient_formula",
        "coefficient_oracle",
        "abs_diff",
    ]);
    let cut = (config.n + kmax + 2) as usize;
    let lattice = ProductLattice::new(config.q1, config.q2, cut, cut);
    let oracle = cg::lowest_weight_oracle(config.q1, config.q2, config.n, kmax, &lattice)?;
    let formula = cg::formula_block(config.q1, config.q2, config.n, kmax)?;
    let report = cg::validate_block(&formula, &oracle)?;
    doc.comment(&format!(
        "block max |formula - oracle| = {:e} after sign alignment ({})",
        report.max_abs_deviation,
        if report.aligned_sign < 0.0 { "flipped" } else { "unflipped" }
    ));
    for k in 0..=kmax {
        for n1 in 0..=config.n + k {
            let n2 = config.n + k - n1;
            let f = report.aligned_sign * formula.coefficient(k, n1);
            let o = oracle.coefficient(k, n1);
            doc.row(&[
                config.q1.to_string(),
                config.q2.to_string(),
                config.n.to_string(),
                k.to_string(),
                n1.to_string(),
                n2.to_string(),
                fmt_f64(f),
                fmt_f64(o),
                fmt_f64((f - o).abs()),
            ]);
        }
    }
    Ok(doc)
}

/// Steady-state run configuration.
#[derive(Clone, Copy, Debug)]
pub struct SteadyConfig {
    pub kappa: f64,
    pub g: f64,
    pub q1: u32,
    pub q2: u32,
    pub n1_cut: usize,
    pub n2_cut: usize,
    pub dt: Option<f64>,
    pub max_steps: usize,
    pub method: SteadyMethod,
    pub log_every: usize,
    pub dark_nmax: u32,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig {
            kappa: 1.0,
            g: 0.3,
            q1: 0,
            q2: 0,
            n1_cut: 12,
            n2_cut: 12,
            dt: None,
            max_steps: 400_000,
            method: SteadyMethod::Evolve,
            log_every: 2000,
            dark_nmax: 2,
        }
    }
}

/// Outcome of a steady-state run: the trajectory (or probe log) CSV plus a
/// plain-text summary of the dark-subspace decomposition.
pub struct SteadyOutcome {
    pub doc: CsvDocument,
    pub summary: String,
}

/// Integrate (or solve) to the steady state, log diagnostics, and decompose
/// the result over the dark family.
pub fn steady_run(config: &SteadyConfig) -> Result<SteadyOutcome> {
    let lattice = ProductLattice::new(config.q1, config.q2, config.n1_cut, config.n2_cut);
    let params = MasterEqParams::new(config.kappa, config.g, lattice)?;
    let rho0 = DensityMatrix::vacuum_projector(lattice);
    let family = dark_subspace(&params, params.dark_eigenvalue(), config.dark_nmax)?;

    let mut doc = CsvDocument::new();
    doc.comment("steady: master-equation trajectory diagnostics");
    doc.comment(&format!(
        "kappa = {}, g = {}, q1 = {}, q2 = {}, cutoffs = {}x{}, method = {:?}",
        config.kappa, config.g, config.q1, config.q2, config.n1_cut, config.n2_cut, config.method
    ));
    doc.comment(&format!(
        "dark eigenvalue lambda = {}, dark family n <= {}",
        params.dark_eigenvalue(),
        config.dark_nmax
    ));
    doc.header(&["t", "trace", "purity", "liouvillian_norm", "dark_overlap"]);

    let opts = SteadyOptions {
        dt: config.dt,
        max_steps: config.max_steps,
        ..SteadyOptions::default()
    };
    let rho = match config.method {
        SteadyMethod::Evolve => {
            let dt = config.dt.unwrap_or_else(|| 0.98 * params.max_stable_dt());
            // trajectory logging pass, stopping on the residual target
            let mut rho = rho0.clone();
            let mut op = Liouvillian::new(params);
            let mut steps = 0usize;
            let mut residual = op.residual_norm(&rho);
            let log_point = |doc: &mut CsvDocument,
                             rho: &DensityMatrix,
                             t: f64,
                             lnorm: f64,
                             family: &[crate::fock::FourModeState]| {
                doc.row(&[
                    fmt_f64(t),
                    fmt_f64(rho.trace().re),
                    fmt_f64(rho.purity()),
                    fmt_f64(lnorm),
                    fmt_f64(dark_overlap(rho, family)),
                ]);
            };
            log_point(&mut doc, &rho, 0.0, residual, &family);
            while steps < config.max_steps && residual >= opts.residual_tol {
                let chunk = config.log_every.min(config.max_steps - steps);
                rho = crate::dynamics::evolve(&rho, &params, dt, chunk)?;
                steps += chunk;
                residual = op.residual_norm(&rho);
                log_point(&mut doc, &rho, steps as f64 * dt, residual, &family);
            }
            if residual >= opts.residual_tol {
                return Err(Error::NonConvergence {
                    routine: "steady_run (evolve)",
                    budget: config.max_steps,
                    residual,
                });
            }
            rho
        }
        SteadyMethod::Nullspace => {
            let ss = crate::dynamics::steady_state(&params, &rho0, SteadyMethod::Nullspace, &opts)?;
            for &(m, r) in &ss.residual_log {
                doc.row(&[
                    fmt_f64(m as f64),
                    fmt_f64(ss.rho.trace().re),
                    fmt_f64(ss.rho.purity()),
                    fmt_f64(r),
                    fmt_f64(dark_overlap(&ss.rho, &family)),
                ]);
            }
            if let Some(k) = ss.kernel_dim {
                doc.comment(&format!("reachable kernel dimension = {k}"));
            }
            ss.rho
        }
    };

    let dark_residual = shifted_jump_apply(&rho, &params).frobenius_norm();
    let decomposition = dark_decomposition_residual(&rho, &family);
    let mut summary = String::new();
    summary.push_str(&format!(
        "steady state reached: trace = {:.15}, purity = {:.12}, min eigenvalue = {:+.3e}\n",
        rho.trace().re,
        rho.purity(),
        rho.min_eigenvalue()
    ));
    summary.push_str(&format!(
        "dark-state residual ||(O - lambda) rho||_F = {dark_residual:.3e}\n"
    ));
    summary.push_str(&format!(
        "dark-subspace decomposition residual = {decomposition:.3e}\n"
    ));
    summary.push_str(&format!(
        "edge-shell population = {:.3e} (cutoff adequacy)\n",
        rho.edge_population()
    ));
    summary.push_str("dark family populations:\n");
    for (n, phi) in family.iter().enumerate() {
        let pop = dark_overlap(&rho, std::slice::from_ref(phi));
        summary.push_str(&format!("  n = {n}: {pop:.12}\n"));
    }
    Ok(SteadyOutcome { doc, summary })
}

/// Overlap-kernel samples: the analytic kernel against the lattice overlap,
/// and the finite-difference residuals of its defining equations.
pub fn overlap_scan(config: &ScanConfig, zeta: C64, samples: usize) -> Result<CsvDocument> {
    config.validate()?;
    let mut doc = CsvDocument::new();
    doc.comment("overlap: analytic kernel vs lattice overlap on sample points");
    config.echo_into(&mut doc);
    doc.comment(&format!("zeta = {} + {}i, samples = {samples}", zeta.re, zeta.im));
    let q = cg::coupled_charge(config.q1, config.q2, config.n);
    let kmax = padded_tail_cutoff(zeta.norm(), q, config.tail_tol) as u32;
    let state = make_bipair_coupled(zeta, config.q1, config.q2, config.n, kmax)?;
    let points = verify::overlap_sample_points(samples);
    let pde = pde_residual(zeta, config.q1, config.q2, config.n, &points, 1e-4)?;
    doc.comment(&format!(
        "pde residuals: eigenvalue equation {:.3e}, casimir equation {:.3e}, h-ratio {:.2}",
        pde.first_max_rel, pde.second_max_rel, pde.first_h_ratio
    ));
    doc.header(&[
        "zeta1c_re",
        "zeta1c_im",
        "zeta2c_re",
        "zeta2c_im",
        "f_re",
        "f_im",
        "lattice_re",
        "lattice_im",
        "ratio_re",
        "ratio_im",
    ]);
    for &(u, v) in &points {
        let f = overlap_f(u, v, zeta, config.q1, config.q2, config.n)?;
        let lat = overlap_lattice(state.state(), u, v);
        let ratio = lat / f;
        doc.row(&[
            fmt_f64(u.re),
            fmt_f64(u.im),
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(f.re),
            fmt_f64(f.im),
            fmt_f64(lat.re),
            fmt_f64(lat.im),
            fmt_f64(ratio.re),
            fmt_f64(ratio.im),
        ]);
    }
    Ok(doc)
}

/// Render the verification report as an aligned text table.
pub fn verify_report_table(cfg: &VerifyConfig) -> Result<(String, bool)> {
    let report = verify::run_all(cfg)?;
    let mut out = String::new();
    out.push_str(&format!(
        "invariant verification (seed = {}, tail_tol = {:e}, steady cutoff = {})\n",
        cfg.seed, cfg.tail_tol, cfg.steady_cutoff
    ));
    let name_width = report
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(10);
    for c in &report.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let threshold = if c.threshold.is_infinite() {
            "  (report)".to_string()
        } else {
            format!("<= {:9.3e}", c.threshold)
        };
        out.push_str(&format!(
            "{status}  {:<name_width$}  {:12.5e} {}  {}\n",
            c.name, c.measured, threshold, c.detail
        ));
    }
    let pass = report.all_pass();
    out.push_str(if pass {
        "all invariants hold\n"
    } else {
        "INVARIANT FAILURES PRESENT\n"
    });
    Ok((out, pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qscan_produces_expected_grid() {
        let config = ScanConfig {
            steps: 4,
            zeta_min: 0.5,
            zeta_max: 1.25,
            ..ScanConfig::default()
        };
        let doc = qscan(&config).unwrap();
        let text = doc.render();
        let data_lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data_lines.len(), 5); // header + 4 rows
        assert!(data_lines[0].starts_with("zeta_abs,"));
        // closed and numeric Q agree in the special case
        for line in &data_lines[1..] {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert!((fields[1] - fields[2]).abs() < 1e-9);
            assert!((fields[3] - fields[4]).abs() < 1e-9);
        }
    }

    #[test]
    fn qscan_deterministic() {
        let config = ScanConfig::default();
        let a = qscan(&config).unwrap().render();
        let b = qscan(&config).unwrap().render();
        assert_eq!(a, b);
    }

    #[test]
    fn pk_scan_sums_to_one() {
        let config = ScanConfig::default();
        let doc = pk_scan(&config, 2.0).unwrap();
        let text = doc.render();
        let mut sum = 0.0;
        let mut poisson_sum = 0.0;
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('k')) {
            let fields: Vec<&str> = line.split(',').collect();
            sum += fields[1].parse::<f64>().unwrap();
            poisson_sum += fields[2].parse::<f64>().unwrap();
        }
        assert!((sum - 1.0).abs() < 1e-10, "sum {sum}");
        assert!((poisson_sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cg_table_special_case_columns() {
        let config = ScanConfig::default();
        let doc = cg_table(&config, 3).unwrap();
        for line in doc.render().lines().filter(|l| !l.starts_with('#') && !l.starts_with('q')) {
            let fields: Vec<&str> = line.split(',').collect();
            let k: f64 = fields[3].parse().unwrap();
            let formula: f64 = fields[6].parse().unwrap();
            assert!((formula - 1.0 / (k + 1.0).sqrt()).abs() < 1e-12);
            let diff: f64 = fields[8].parse().unwrap();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn steady_run_small_case() {
        let config = SteadyConfig {
            g: 0.1,
            n1_cut: 6,
            n2_cut: 6,
            dark_nmax: 1,
            log_every: 5000,
            ..SteadyConfig::default()
        };
        let outcome = steady_run(&config).unwrap();
        assert!(outcome.summary.contains("dark-state residual"));
        let text = outcome.doc.render();
        let last = text.lines().last().unwrap();
        let fields: Vec<f64> = last.split(',').map(|f| f.parse().unwrap()).collect();
        // trace stays 1, dark overlap converges to 1
        assert!((fields[1] - 1.0).abs() < 1e-10);
        assert!((fields[4] - 1.0).abs() < 1e-6, "dark overlap {}", fields[4]);
    }

    #[test]
    fn overlap_scan_ratio_constant() {
        let config = ScanConfig {
            q1: 1,
            q2: 0,
            n: 1,
            ..ScanConfig::default()
        };
        let doc = overlap_scan(&config, C64::new(0.8, 0.5), 10).unwrap();
        let text = doc.render();
        let mut ratios = Vec::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("zeta1c")) {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            ratios.push(C64::new(fields[8], fields[9]));
        }
        assert!(ratios.len() >= 10);
        for r in &ratios[1..] {
            assert!((r - ratios[0]).norm() / ratios[0].norm() < 1e-8);
        }
    }
}
