//! Exponential-of-semicircle spreading window: tolerance-driven parameter
//! selection, numerically computed Fourier transform, and the deconvolution
//! factor table.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Smallest supported kernel width.
pub const MIN_WIDTH: usize = 3;
/// Largest supported kernel width.
pub const MAX_WIDTH: usize = 13;

/// ES window parameters for one transform plan.
///
/// `width` is the stencil width in grid points, `beta` the kernel shape
/// parameter, `sigma` the grid oversampling factor (fixed at 2 here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub width: usize,
    pub beta: f64,
    pub sigma: f64,
    pub tolerance: f64,
    pub dim: usize,
}

/// Evaluate the ES kernel `e^{beta(sqrt(1-x^2)-1)}` on |x| <= 1, zero outside.
#[inline]
pub fn es_eval(x: f64, beta: f64) -> f64 {
    if x.abs() > 1.0 {
        0.0
    } else {
        (beta * ((1.0 - x * x).max(0.0).sqrt() - 1.0)).exp()
    }
}

/// Pick kernel width and shape for a requested tolerance.
///
/// Width follows `w = ceil(log10(1/eps)) + 1` clamped to `[3, 13]`, with
/// `beta = 2.30 w` at `sigma = 2`. The mapping is validated against the
/// direct-transform oracle rather than assumed.
pub fn select_params(eps: f64, dim: usize) -> Result<WindowSpec> {
    if !(1e-12..=1e-1).contains(&eps) {
        return Err(Error::ToleranceRange(eps));
    }
    // Guard against log10 landing epsilon above an integer for powers of ten.
    let digits = ((1.0 / eps).log10() - 1e-9).ceil();
    let width = ((digits as usize) + 1).clamp(MIN_WIDTH, MAX_WIDTH);
    Ok(WindowSpec {
        width,
        beta: 2.30 * width as f64,
        sigma: 2.0,
        tolerance: eps,
        dim,
    })
}

/// 64-node Gauss-Legendre rule on [-1, 1], computed once by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre_64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 64usize;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-based initial guess for the i-th root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                // Legendre P_n and its derivative at x.
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Fourier transform of the window on its reference support:
/// `phi_hat(k) = integral_{-1}^{1} phi(x) cos(kx) dx`.
///
/// The substitution `x = sin(theta)` removes the square-root endpoint
/// behaviour, so the fixed 64-node Gauss-Legendre rule reaches machine
/// precision for every supported `beta` and the frequencies used by the
/// deconvolution table (|k| <= pi*w/4).
pub fn phi_hat(spec: &WindowSpec, k: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_64();
    let beta = spec.beta;
    let mut acc = 0.0;
    for (&t, &w) in nodes.iter().zip(weights) {
        let theta = t * PI / 2.0;
        let (s, c) = theta.sin_cos();
        acc += w * (beta * (c - 1.0)).exp() * (k * s).cos() * c;
    }
    acc * PI / 2.0
}

/// Per-axis deconvolution factors `d(n) = 2 / (w * phi_hat(pi n w / M))`.
///
/// The same axis table serves all axes (cubic domain, uniform N). Factors are
/// fixed so that spread -> FFT -> truncate -> deconvolve reproduces the direct
/// nonuniform transform with the unnormalized FFT convention; no separate
/// 1/M^d scaling is needed in the pipeline.
#[derive(Debug, Clone)]
pub struct DeconvTable {
    pub modes_n: usize,
    pub dim: usize,
    /// Length-N array indexed by `n + N/2` for mode `n in [-N/2, N/2)`.
    pub axis: Vec<f64>,
}

impl DeconvTable {
    /// 3D (or d-D) factor as a product of per-axis entries.
    #[inline]
    pub fn factor(&self, modes: [i64; 3]) -> f64 {
        let half = (self.modes_n / 2) as i64;
        let mut f = 1.0;
        for &m in modes.iter().take(self.dim) {
            f *= self.axis[(m + half) as usize];
        }
        f
    }
}

/// Build the deconvolution table for `N` retained modes on an `M = sigma N`
/// fine grid over a domain of length `domain_l`.
pub fn build_deconv_table(
    spec: &WindowSpec,
    modes_n: usize,
    fine_m: usize,
    _domain_l: f64,
) -> Result<DeconvTable> {
    if fine_m != (spec.sigma * modes_n as f64).round() as usize || modes_n % 2 != 0 {
        return Err(Error::GridMismatch(format!(
            "need even N and M = sigma*N, got N={modes_n}, M={fine_m}"
        )));
    }
    let w = spec.width as f64;
    let floor = 1e-14 * phi_hat(spec, 0.0);
    let half = (modes_n / 2) as i64;
    let mut axis = Vec::with_capacity(modes_n);
    for n in -half..half {
        let kappa = PI * n as f64 * w / fine_m as f64;
        let ph = phi_hat(spec, kappa);
        if ph <= floor {
            return Err(Error::PhiHatUnderflow { kappa });
        }
        axis.push(2.0 / (w * ph));
    }
    Ok(DeconvTable {
        modes_n,
        dim: spec.dim,
        axis,
    })
}
