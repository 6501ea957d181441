//! Adaptive quadrature of the stopped-time integral for the joint pmf.
//!
//! Each start case contributes `∫_0^∞ P(X_I^{r_I}(t)=i) P(X_O^{r_O}(t)=j) e^{-t} dt`.
//! The integrand's logarithm
//!
//! `g(t) = log_pref - β∞·t + k_I·ln(1-e^{-c_I t}) + k_O·ln(1-e^{-c_O t})`
//!
//! (`k` = jump counts, `β∞ = c_I(δ_I+r_I) + c_O(δ_O+r_O) + 1`) is strictly
//! concave: the linear part is trivially concave and each `ln(1-e^{-ct})` has
//! second derivative `-c²e^{ct}/(e^{ct}-1)² < 0`. So the integrand is unimodal;
//! we locate the mode by bisecting the decreasing derivative, scale by the peak
//! value, and run adaptive Simpson on `[0, mode]` plus geometrically growing
//! segments to the right until the concavity tail bound
//! `∫_T^∞ e^{g-g_max} ≤ e^{g(T)-g_max}/(-g'(T))` drops below 1e-16 of the
//! running integral.

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams, RateConstants};

use super::ln_gamma;

/// `ln(1 - e^{-x})` for `x > 0`; `-inf` at `x = 0`.
fn ln_one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// Log-integrand of one start case, with degree-independent evaluation cost.
struct LogIntegrand {
    log_pref: f64,
    decay: f64,
    k_in: f64,
    c_in: f64,
    k_out: f64,
    c_out: f64,
}

impl LogIntegrand {
    #[allow(clippy::too_many_arguments)]
    fn new(r_in: u32, i: u32, c_in: f64, d_in: f64, r_out: u32, j: u32, c_out: f64, d_out: f64) -> Self {
        let log_pref_axis = |r: u32, n: u32, d: f64| {
            if n == r {
                0.0
            } else {
                ln_gamma(d + n as f64) - ln_gamma(d + r as f64) - ln_gamma((n - r) as f64 + 1.0)
            }
        };
        LogIntegrand {
            log_pref: log_pref_axis(r_in, i, d_in) + log_pref_axis(r_out, j, d_out),
            decay: c_in * (d_in + r_in as f64) + c_out * (d_out + r_out as f64) + 1.0,
            k_in: (i - r_in) as f64,
            c_in,
            k_out: (j - r_out) as f64,
            c_out,
        }
    }

    fn g(&self, t: f64) -> f64 {
        let mut v = self.log_pref - self.decay * t;
        if self.k_in > 0.0 {
            v += self.k_in * ln_one_minus_exp_neg(self.c_in * t);
        }
        if self.k_out > 0.0 {
            v += self.k_out * ln_one_minus_exp_neg(self.c_out * t);
        }
        v
    }

    /// `g'`; strictly decreasing, `+inf` at `0+` when a jump term is present.
    fn gp(&self, t: f64) -> f64 {
        let mut v = -self.decay;
        if self.k_in > 0.0 {
            v += self.k_in * self.c_in / (self.c_in * t).exp_m1();
        }
        if self.k_out > 0.0 {
            v += self.k_out * self.c_out / (self.c_out * t).exp_m1();
        }
        v
    }

    fn mode(&self) -> f64 {
        let mut hi = 1.0;
        while self.gp(hi) > 0.0 && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.gp(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Scaled integral `∫_0^∞ e^{g(t) - peak} dt` to absolute accuracy `eps`.
    fn integrate_scaled(&self, mode: f64, peak: f64, eps: f64) -> Result<f64> {
        let f = |t: f64| (self.g(t) - peak).exp();
        let mut total = 0.0;
        if mode > 0.0 {
            total += adaptive_simpson(&f, 0.0, mode, eps)?;
        }
        let mut t_lo = mode;
        let mut width = mode.max(1.0 / self.decay).max(1e-3);
        for _ in 0..200 {
            let t_hi = t_lo + width;
            total += adaptive_simpson(&f, t_lo, t_hi, eps)?;
            let slope = -self.gp(t_hi); // positive right of the mode
            let tail_bound = (self.g(t_hi) - peak).exp() / slope.max(1e-300);
            if tail_bound < 1e-16 * total.max(1e-300) {
                return Ok(total);
            }
            t_lo = t_hi;
            width *= 2.0;
        }
        Err(Error::NoConvergence {
            requested: eps,
            achieved: f64::INFINITY,
        })
    }

    /// `∫_0^∞ e^{g(t)} dt` with error below `tol` relative to the result.
    fn integral(&self, tol: f64) -> Result<f64> {
        if self.k_in == 0.0 && self.k_out == 0.0 {
            // Pure exponential: exact.
            return Ok(self.log_pref.exp() / self.decay);
        }
        let mode = self.mode();
        let peak = self.g(mode);
        // First pass to learn the magnitude, second pass at the tolerance the
        // magnitude implies. The scaled integrand peaks at 1, so the scaled
        // integral is of order the peak width and the rough pass is reliable.
        let rough = self.integrate_scaled(mode, peak, 1e-4)?;
        let eps = 0.5 * tol * rough.max(f64::MIN_POSITIVE);
        let scaled = if eps >= 1e-4 {
            rough
        } else {
            self.integrate_scaled(mode, peak, eps)?
        };
        Ok(peak.exp() * scaled)
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || (b - a) <= 1e-15 * (a.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NoConvergence {
            requested: eps,
            achieved: delta.abs() / 15.0,
        });
    }
    let half = 0.5 * eps;
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

pub(crate) fn joint(
    i: u32,
    j: u32,
    rc: &RateConstants,
    params: &ModelParams,
    tol: f64,
) -> Result<f64> {
    params.expect_kind(ModelKind::Dpa, "joint_quadrature")?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            detail: "relative quadrature tolerance must lie in (0, 1)",
        });
    }
    let (c_in, c_out) = rc.dpa()?;
    let (d_in, d_out) = (params.delta_in(), params.delta_out());
    let node = params.alpha() + params.gamma();
    let starts = [
        (params.alpha() / node, 0u32, 1u32),
        (params.gamma() / node, 1u32, 0u32),
    ];
    let mut total = 0.0;
    for (weight, r_in, r_out) in starts {
        if i < r_in || j < r_out {
            continue; // this start's marginal is zero at every t
        }
        let term = LogIntegrand::new(r_in, i, c_in, d_in, r_out, j, c_out, d_out);
        total += weight * term.integral(tol)?;
    }
    Ok(total)
}
