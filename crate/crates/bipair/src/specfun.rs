//! Scalar special functions used throughout the crate: log-factorials,
//! modified Bessel functions of integer order (real and complex argument),
//! and Jacobi polynomials.
//!
//! All series are accumulated with compensated (Neumaier) summation so that
//! the alternating and factorial-ratio sums built on top of these primitives
//! do not inherit avoidable rounding noise.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest `n` served from the precomputed table; larger arguments fall back
/// to a Stirling expansion (accurate to well below 1e-16 relative there).
const TABLE_CAPACITY: usize = 8192;

/// Magnitude guard for the `I_nu` power series. Beyond this the series is
/// still convergent but intermediate terms approach the f64 overflow range.
pub const BESSEL_I_MAX_ABS: f64 = 200.0;

/// `bessel_i_scaled` evaluates `g_nu(w) = w^{-nu/2} I_nu(sqrt(w))`; the guard
/// corresponds to `|sqrt(w)| <= BESSEL_I_MAX_ABS`.
pub const BESSEL_I_SCALED_MAX_ABS: f64 = BESSEL_I_MAX_ABS * BESSEL_I_MAX_ABS;

/// Validated argument range for `bessel_k`. The cosh-integral quadrature holds
/// uniformly here; both ends are exercised by the identity-resolution measure
/// (small x near the origin of the radial integral, large x in its tail).
pub const BESSEL_K_MIN_X: f64 = 1e-6;
pub const BESSEL_K_MAX_X: f64 = 150.0;

/// Series termination: stop once a term falls below this fraction of the
/// accumulated partial sum.
const SERIES_EPS: f64 = 1e-18;

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex series (independent real/imag parts).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct AccumC {
    re: Accum,
    im: Accum,
}

impl AccumC {
    pub(crate) fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub(crate) fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Table of `ln(n!)` for `0 <= n <= capacity`, built once by compensated
/// accumulation of `ln k`.
pub struct LogFactorialTable {
    values: Vec<f64>,
}

impl LogFactorialTable {
    pub fn new(capacity: usize) -> Self {
        let mut values = Vec::with_capacity(capacity + 1);
        let mut acc = Accum::default();
        values.push(0.0);
        for k in 1..=capacity {
            acc.add((k as f64).ln());
            values.push(acc.value());
        }
        LogFactorialTable { values }
    }

    pub fn capacity(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> f64 {
        if n < self.values.len() {
            self.values[n]
        } else {
            stirling_log_factorial(n)
        }
    }
}

fn global_table() -> &'static LogFactorialTable {
    static TABLE: OnceLock<LogFactorialTable> = OnceLock::new();
    TABLE.get_or_init(|| LogFactorialTable::new(TABLE_CAPACITY))
}

/// Stirling series for `ln(n!)`; used only past the table capacity where its
/// truncation error is far below 1e-16 relative.
fn stirling_log_factorial(n: usize) -> f64 {
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `ln(n!)`, exact at n = 0, 1 and accurate to ~1e-15 relative elsewhere.
pub fn log_factorial(n: usize) -> f64 {
    global_table().get(n)
}

/// Modified Bessel function of the first kind `I_nu(z)` for integer order,
/// by its power series
/// `I_nu(z) = sum_m (z/2)^(2m+nu) / (m! (m+nu)!)`.
///
/// The series converges for all `z`; the guard on `|z|` keeps intermediate
/// terms well inside f64 range.
pub fn bessel_i(nu: u32, z: C64) -> Result<C64> {
    if z.norm() > BESSEL_I_MAX_ABS {
        return Err(Error::Domain {
            routine: "bessel_i",
            message: format!("|z| = {:.3} exceeds validated range {}", z.norm(), BESSEL_I_MAX_ABS),
        });
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(if nu == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    }
    let half = z * 0.5;
    // first term (z/2)^nu / nu!, assembled in log space to stay in range
    let ln_mag = (nu as f64) * half.norm().ln() - log_factorial(nu as usize);
    let phase = (nu as f64) * half.arg();
    let mut term = C64::from_polar(ln_mag.exp(), phase);
    let ratio_base = half * half;
    let mut acc = AccumC::default();
    acc.add(term);
    for m in 0..2000usize {
        term *= ratio_base / (((m + 1) * (m + 1 + nu as usize)) as f64);
        acc.add(term);
        if term.norm() <= SERIES_EPS * acc.value().norm() {
            return Ok(acc.value());
        }
    }
    Err(Error::NonConvergence {
        routine: "bessel_i",
        budget: 2000,
        residual: term.norm(),
    })
}

/// Convenience wrapper for real argument.
pub fn bessel_i_real(nu: u32, x: f64) -> Result<f64> {
    bessel_i(nu, C64::new(x, 0.0)).map(|v| v.re)
}

/// The entire function `g_nu(w) = w^(-nu/2) I_nu(sqrt(w))`, evaluated as the
/// single-valued series
/// `g_nu(w) = sum_m (w/4)^m / (2^nu m! (m+nu)!)`.
///
/// Combining the inverse half-integer power with `I_nu` of a square root
/// removes every branch cut: `g_nu` is entire in `w`, and
/// `g_nu(w) * w^(nu/2) = I_nu(sqrt(w))` on the principal branch.
pub fn bessel_i_scaled(nu: u32, w: C64) -> Result<C64> {
    if w.norm() > BESSEL_I_SCALED_MAX_ABS {
        return Err(Error::Domain {
            routine: "bessel_i_scaled",
            message: format!(
                "|w| = {:.3} exceeds validated range {}",
                w.norm(),
                BESSEL_I_SCALED_MAX_ABS
            ),
        });
    }
    // first term 1 / (2^nu nu!)
    let ln_t0 = -(nu as f64) * std::f64::consts::LN_2 - log_factorial(nu as usize);
    let mut term = C64::new(ln_t0.exp(), 0.0);
    let quarter = w * 0.25;
    let mut acc = AccumC::default();
    acc.add(term);
    for m in 0..2000usize {
        term *= quarter / (((m + 1) * (m + 1 + nu as usize)) as f64);
        acc.add(term);
        if term.norm() <= SERIES_EPS * acc.value().norm() {
            return Ok(acc.value());
        }
    }
    Err(Error::NonConvergence {
        routine: "bessel_i_scaled",
        budget: 2000,
        residual: term.norm(),
    })
}

/// Modified Bessel function of the second kind `K_nu(x)` for integer order
/// and real `x > 0`, via the integral representation
/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`
/// evaluated by adaptive Gauss-Kronrod quadrature, truncated where the
/// integrand drops below 1e-18 of its peak.
pub fn bessel_k(nu: u32, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain {
            routine: "bessel_k",
            message: format!("x = {x} must be positive"),
        });
    }
    if !(BESSEL_K_MIN_X..=BESSEL_K_MAX_X).contains(&x) {
        return Err(Error::Domain {
            routine: "bessel_k",
            message: format!("x = {x} outside validated range [{BESSEL_K_MIN_X}, {BESSEL_K_MAX_X}]"),
        });
    }
    let nu_f = nu as f64;
    // log of the integrand, used to find the truncation point
    let log_f = |t: f64| -> f64 {
        let c = if nu_f * t > 30.0 {
            nu_f * t - std::f64::consts::LN_2
        } else {
            (nu_f * t).cosh().ln()
        };
        -x * t.cosh() + c
    };
    let mut peak_log = log_f(0.0);
    let mut t_hi = 0.0;
    loop {
        t_hi += 0.5;
        let l = log_f(t_hi);
        if l > peak_log {
            peak_log = l;
        }
        if l < peak_log - 45.0 || t_hi > 60.0 {
            break;
        }
    }
    let integrand = |t: f64| (-x * t.cosh()).exp() * (nu_f * t).cosh();
    let quad = crate::quad::adaptive_gk(&integrand, 0.0, t_hi, 1e-13, 1e-300, 60)?;
    Ok(quad.value)
}

/// Jacobi polynomial `P_n^(alpha,beta)(x)` for nonnegative integer parameters,
/// by the standard three-term recurrence. Exact in degree; the recurrence is
/// numerically benign for the moderate orders used here.
pub fn jacobi_p(n: u32, alpha: u32, beta: u32, x: C64) -> C64 {
    let a = alpha as f64;
    let b = beta as f64;
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut p_prev = C64::new(1.0, 0.0);
    let mut p = (x - 1.0) * (0.5 * (a + b + 2.0)) + (a + 1.0);
    for k in 2..=n {
        let k = k as f64;
        let c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0);
        let c2 = 2.0 * k + a + b - 1.0;
        let c3 = (2.0 * k + a + b) * (2.0 * k + a + b - 2.0);
        let c4 = a * a - b * b;
        let c5 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b);
        let p_next = ((x * c3 + c4) * c2 * p - p_prev * c5) / c1;
        p_prev = p;
        p = p_next;
    }
    p
}
