//! Closed-form evaluation of the limiting degree laws.
//!
//! For DPA, the law of one degree axis of a uniformly chosen node is the law
//! of a linear pure birth process (rate `lambda_k = (delta + k) * c`) started
//! at the axis' start value and stopped at an independent Exp(1) time. This
//! module provides:
//!
//! * the fixed-time marginal (`marginal_at_t`) and the stopped marginal in its
//!   numerically robust product form (`marginal_stopped`),
//! * the joint pmf by two independent routes — an exact alternating double sum
//!   (`joint_closedform`, exact rational arithmetic) and adaptive quadrature of
//!   the stopped-time integral (`joint_quadrature`),
//! * the marginal / fixed-other-coordinate / bivariate tail exponents and the
//!   argmax classification of the bivariate exponent over ray shapes `j ~ s·i^r`,
//! * the undirected-PA limiting pmf and the Yule transition pmf.
//!
//! See `ERRATA.md` at the repository root for the formula variants that are
//! sometimes printed incorrectly and the first-principles checks pinning the
//! forms used here.

mod closed_form;
mod quadrature;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams, RateConstants};

/// Degree axis selector for the marginal laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    In,
    Out,
}

/// `(rate slope, delta)` for the chosen axis; DPA only.
fn axis_constants(axis: Axis, rc: &RateConstants, params: &ModelParams) -> Result<(f64, f64)> {
    params.expect_kind(ModelKind::Dpa, "axis marginal")?;
    let (c_in, c_out) = rc.dpa()?;
    Ok(match axis {
        Axis::In => (c_in, params.delta_in()),
        Axis::Out => (c_out, params.delta_out()),
    })
}

/// Falling factorial `a_k = a(a-1)...(a-k+1)` for real `a`.
///
/// Running product up to `k = 64`; beyond that a log-gamma ratio when every
/// factor is positive, and a log-magnitude accumulation with sign tracking
/// otherwise (exact zero when a factor vanishes).
pub fn falling_factorial(a: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k <= 64 {
        let mut acc = 1.0;
        for m in 0..k {
            acc *= a - m as f64;
        }
        return acc;
    }
    let lowest = a - (k - 1) as f64;
    if lowest > 0.0 {
        // a_k = Γ(a+1) / Γ(a-k+1), all factors positive.
        (ln_gamma(a + 1.0) - ln_gamma(lowest)).exp()
    } else {
        let mut log_abs = 0.0;
        let mut negatives = 0u32;
        for m in 0..k {
            let f = a - m as f64;
            if f == 0.0 {
                return 0.0;
            }
            if f < 0.0 {
                negatives += 1;
            }
            log_abs += f.abs().ln();
        }
        let sign = if negatives % 2 == 0 { 1.0 } else { -1.0 };
        sign * log_abs.exp()
    }
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Natural log of the fixed-time marginal; `-inf` encodes probability zero.
///
/// `log P(X^r(t) = i) = ln[ (δ+i-1)_{i-r} / (i-r)! ] - c(δ+r)t + (i-r)·ln(1-e^{-ct})`.
/// Kept in log space so the quadrature path can handle degrees in the millions.
pub(crate) fn log_marginal_at_t(r: u32, i: u32, t: f64, c: f64, delta: f64) -> f64 {
    if i < r {
        return f64::NEG_INFINITY;
    }
    let jumps = (i - r) as f64;
    let mut lp = -c * (delta + r as f64) * t;
    if jumps > 0.0 {
        // (δ+i-1)_{i-r} = Γ(δ+i)/Γ(δ+r): all factors positive since δ > 0.
        lp += ln_gamma(delta + i as f64) - ln_gamma(delta + r as f64) - ln_gamma(jumps + 1.0);
        let log1me = (-(-c * t).exp_m1()).ln(); // ln(1 - e^{-ct})
        if log1me == f64::NEG_INFINITY {
            return f64::NEG_INFINITY; // t = 0 with at least one jump required
        }
        lp += jumps * log1me;
    }
    lp
}

/// Fixed-time marginal `P(X^r(t) = i)` of the birth process on `axis`.
///
/// Evaluates `(δ+i-1)_{i-r}/(i-r)! · e^{-c(δ+r)t} (1-e^{-ct})^{i-r}`; returns 0
/// for `i < r`.
pub fn marginal_at_t(
    r: u32,
    i: u32,
    t: f64,
    axis: Axis,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<f64> {
    let (c, delta) = axis_constants(axis, rc, params)?;
    if i < r {
        return Ok(0.0);
    }
    let jumps = i - r;
    if jumps <= 64 {
        // Direct evaluation is slightly sharper than exp(log …) at small sizes.
        let pref = falling_factorial(delta + i as f64 - 1.0, jumps) / factorial(jumps);
        let base = -(-c * t).exp_m1(); // 1 - e^{-ct}
        Ok(pref * (-c * (delta + r as f64) * t).exp() * base.powi(jumps as i32))
    } else {
        Ok(log_marginal_at_t(r, i, t, c, delta).exp())
    }
}

fn factorial(k: u32) -> f64 {
    let mut acc = 1.0;
    for m in 2..=k {
        acc *= m as f64;
    }
    acc
}

/// Stopped marginal `P(X^r(T) = i)`, `T ~ Exp(1)`, in product form:
/// `∏_{k=r}^{i-1} λ_k/(λ_k+1) · 1/(λ_i+1)` with `λ_k = (δ+k)c`.
///
/// This is the form the pure-birth recursion yields directly and the one that
/// is numerically robust for large `i`; see [`marginal_stopped_ratio_form`]
/// for the algebraically reduced ratio variant.
pub fn marginal_stopped(
    r: u32,
    i: u32,
    axis: Axis,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<f64> {
    let (c, delta) = axis_constants(axis, rc, params)?;
    if i < r {
        return Ok(0.0);
    }
    let lambda = |k: u32| (delta + k as f64) * c;
    let mut acc = 1.0;
    for k in r..i {
        let l = lambda(k);
        acc *= l / (l + 1.0);
    }
    Ok(acc / (lambda(i) + 1.0))
}

/// All stopped-marginal values `P(X^r(T) = i)` for `i = 0..=max_i`, computed
/// incrementally in O(max_i) via `P(i+1) = P(i) · λ_i / (λ_{i+1} + 1)`.
pub fn marginal_stopped_vec(
    r: u32,
    max_i: u32,
    axis: Axis,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    let (c, delta) = axis_constants(axis, rc, params)?;
    let lambda = |k: u32| (delta + k as f64) * c;
    let mut out = vec![0.0; max_i as usize + 1];
    if r > max_i {
        return Ok(out);
    }
    let mut p = 1.0 / (lambda(r) + 1.0);
    out[r as usize] = p;
    for i in r..max_i {
        p *= lambda(i) / (lambda(i + 1) + 1.0);
        out[i as usize + 1] = p;
    }
    Ok(out)
}

/// Reduced ratio form of the stopped marginal,
/// `(1/c) · (δ+i-1)_{i-r} / (δ+1/c+i)_{i-r+1}`,
/// evaluated as a product of factor ratios so it neither overflows nor loses
/// the leading `1/c` factor (which a commonly printed variant drops; the
/// product form gives 1/3 for δ=1, c=2, i=r=0 where that variant gives 2/3).
pub fn marginal_stopped_ratio_form(
    r: u32,
    i: u32,
    axis: Axis,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<f64> {
    let (c, delta) = axis_constants(axis, rc, params)?;
    if i < r {
        return Ok(0.0);
    }
    let shift = 1.0 / c;
    let mut acc = 1.0;
    for k in r..i {
        acc *= (delta + k as f64) / (delta + shift + k as f64);
    }
    Ok(acc / (c * (delta + shift + i as f64)))
}

/// Default degree-sum threshold below which `joint_closedform` uses exact
/// rational arithmetic.
pub const DEFAULT_RATIONAL_THRESHOLD: u32 = 60;

/// Joint limiting pmf `p_ij` by the alternating double sum derived from the
/// stopped-time integral:
///
/// `p_ij = wα·T₁(i,j) + wγ·T₂(i,j)` with `wα = α/(α+γ)`, `wγ = γ/(α+γ)`,
/// where T₁ (start `(0,1)`) carries denominators
/// `c_I(δ_I+k) + c_O(δ_O+1+ℓ) + 1` and T₂ (start `(1,0)`) symmetrically
/// `c_I(δ_I+1+k) + c_O(δ_O+ℓ) + 1` — the `+1` start shifts belong inside the
/// denominators (see ERRATA.md).
///
/// For `i+j` up to [`DEFAULT_RATIONAL_THRESHOLD`] the sums run in exact
/// rational arithmetic over the decimal rationalization of the parameters;
/// beyond that a compensated log-space sum is attempted and
/// [`Error::NumericallyUnstable`] is returned when its estimated relative
/// error exceeds 1e-6 (the absorbing-walk computation is the production path
/// for large degrees).
pub fn joint_closedform(i: u32, j: u32, rc: &RateConstants, params: &ModelParams) -> Result<f64> {
    closed_form::joint(i, j, rc, params, DEFAULT_RATIONAL_THRESHOLD)
}

/// Exact closed-form values for the whole triangle `i + j ≤ max_sum` at once,
/// as ragged rows `result[i][j]`.
///
/// Equivalent to calling [`joint_closedform`] pairwise inside the exact
/// regime, but evaluated by one shared finite-difference pass per start
/// branch, which reuses the common-denominator table across all pairs. For a
/// full triangle this is orders of magnitude faster than pairwise calls.
/// Cost still grows cubically in `max_sum` with big-integer operands, so keep
/// `max_sum` in the same range where the exact path is the right tool
/// (roughly [`DEFAULT_RATIONAL_THRESHOLD`]).
pub fn joint_closedform_triangle(
    max_sum: u32,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<Vec<Vec<f64>>> {
    closed_form::joint_triangle(max_sum, rc, params)
}

/// [`joint_closedform`] with an explicit rational-arithmetic threshold.
pub fn joint_closedform_with_threshold(
    i: u32,
    j: u32,
    rc: &RateConstants,
    params: &ModelParams,
    rational_threshold: u32,
) -> Result<f64> {
    closed_form::joint(i, j, rc, params, rational_threshold)
}

/// Joint limiting pmf `p_ij` by adaptive quadrature of
/// `wα ∫ P(X_I^0(t)=i) P(X_O^1(t)=j) e^{-t} dt + wγ ∫ P(X_I^1(t)=i) P(X_O^0(t)=j) e^{-t} dt`.
///
/// The integrand is evaluated in log space (degrees may be huge), split at its
/// mode, and integrated by adaptive Simpson subdivision until the estimated
/// error is below `tol` relative to the integral; the upper limit is extended
/// until the concavity tail bound drops below 1e-16 of the running integral.
pub fn joint_quadrature(
    i: u32,
    j: u32,
    rc: &RateConstants,
    params: &ModelParams,
    tol: f64,
) -> Result<f64> {
    quadrature::joint(i, j, rc, params, tol)
}

/// Marginal pmf tail exponents `(1 + 1/c_in, 1 + 1/c_out)`.
pub fn marginal_tail_exponents(rc: &RateConstants) -> Result<(f64, f64)> {
    let (c_in, c_out) = rc.dpa()?;
    Ok((1.0 + 1.0 / c_in, 1.0 + 1.0 / c_out))
}

/// Cross tail exponents for one coordinate fixed:
/// `x_in = 1 + 1/c_in + c_out·δ_out/c_in` (large `i` at fixed `j`) and
/// `x_out = 1 + 1/c_out + c_in·δ_in/c_out` (large `j` at fixed `i`).
pub fn fixed_other_tail_exponents(rc: &RateConstants, params: &ModelParams) -> Result<(f64, f64)> {
    params.expect_kind(ModelKind::Dpa, "fixed_other_tail_exponents")?;
    let (c_in, c_out) = rc.dpa()?;
    Ok((
        1.0 + 1.0 / c_in + c_out * params.delta_out() / c_in,
        1.0 + 1.0 / c_out + c_in * params.delta_in() / c_out,
    ))
}

/// Exponent of `n` in `p_{n, ⌊s·n^r⌋}` along the ray `j ~ s·i^r` (independent
/// of `s`): the master form is
/// `δ_in - 1 + r(δ_out - 1) - (c_in·δ_in + c_out·δ_out + 1)·max(1/c_in, r/c_out)`,
/// evaluated via the case split at `r = c_out/c_in`. The second branch's
/// constant is `r/c_out`, not `1/c_out` — the latter breaks continuity at the
/// split point (see ERRATA.md).
pub fn bivariate_tail_exponent(r: f64, rc: &RateConstants, params: &ModelParams) -> Result<f64> {
    params.expect_kind(ModelKind::Dpa, "bivariate_tail_exponent")?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            detail: "ray exponent must be nonnegative",
        });
    }
    let (c_in, c_out) = rc.dpa()?;
    let (d_in, d_out) = (params.delta_in(), params.delta_out());
    let split = c_out / c_in;
    Ok(if r <= split {
        -(1.0 + d_out * (split - r) + r + 1.0 / c_in)
    } else {
        -(1.0 + d_in * (r * c_in / c_out - 1.0) + r + r / c_out)
    })
}

/// Classification of `argmax_r` of the bivariate tail exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailArgmax {
    /// `δ_out < 1`: the exponent is maximal at `r = 0`.
    Zero,
    /// `δ_out > 1`: maximal at `r = c_out/c_in` (the payload).
    CrossRatio(f64),
    /// `δ_out = 1`: flat maximum on the whole interval `[0, c_out/c_in]`.
    Interval { hi: f64 },
}

impl std::fmt::Display for TailArgmax {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailArgmax::Zero => write!(f, "r* = 0"),
            TailArgmax::CrossRatio(v) => write!(f, "r* = c_O/c_I = {v}"),
            TailArgmax::Interval { hi } => write!(f, "interval [0, c_O/c_I] = [0, {hi}]"),
        }
    }
}

/// Where `bivariate_tail_exponent` attains its maximum over `r ≥ 0`.
///
/// The exponent is piecewise affine in `r` with slope `δ_out - 1` left of the
/// split and a strictly negative slope right of it, so the classification
/// depends only on how `δ_out` compares to 1.
pub fn argmax_r(rc: &RateConstants, params: &ModelParams) -> Result<TailArgmax> {
    params.expect_kind(ModelKind::Dpa, "argmax_r")?;
    let (c_in, c_out) = rc.dpa()?;
    let split = c_out / c_in;
    let d_out = params.delta_out();
    Ok(if d_out < 1.0 {
        TailArgmax::Zero
    } else if d_out > 1.0 {
        TailArgmax::CrossRatio(split)
    } else {
        TailArgmax::Interval { hi: split }
    })
}

/// Limiting degree pmf of undirected preferential attachment with `m` edges
/// per node: `2m(m+1) / (i(i+1)(i+2))` for `i ≥ m`, zero below `m`.
pub fn undirected_pa_pmf(m: u32, i: u32) -> f64 {
    if i < m || m == 0 {
        return 0.0;
    }
    let (m, i) = (m as f64, i as f64);
    2.0 * m * (m + 1.0) / (i * (i + 1.0) * (i + 2.0))
}

/// Yule (linear pure birth, rate `k/2`) transition pmf:
/// `P(Z(t) = k | Z(0) = m) = C(k-1, m-1) e^{-mt/2} (1 - e^{-t/2})^{k-m}`.
///
/// A sometimes-printed variant writes the binomial as `C(m-1, k-1)`, which
/// vanishes for every `k > m`; the standard form above is used (it matches the
/// forward equations and reduces to the geometric law at `m = 1`).
pub fn yule_pmf(m: u32, k: u32, t: f64) -> f64 {
    if m == 0 || k < m || t < 0.0 {
        return 0.0;
    }
    if k == m {
        return (-(m as f64) * t / 2.0).exp();
    }
    let log_binom =
        ln_gamma(k as f64) - ln_gamma(m as f64) - ln_gamma((k - m) as f64 + 1.0);
    let log1me = (-(-t / 2.0).exp_m1()).ln(); // ln(1 - e^{-t/2})
    (log_binom - m as f64 * t / 2.0 + (k - m) as f64 * log1me).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rate_constants, ModelParams};

    fn standard() -> (ModelParams, RateConstants) {
        let p = ModelParams::dpa(0.3, 0.4, 1.0, 1.0).unwrap();
        let rc = rate_constants(&p).unwrap();
        (p, rc)
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5.0, 0), 1.0);
        assert_eq!(falling_factorial(5.0, 3), 60.0);
        assert_eq!(falling_factorial(2.5, 2), 3.75);
        // recurrence a_k = a * (a-1)_{k-1}
        for &a in &[-3.7, 0.4, 2.0, 9.9] {
            for k in 1..20u32 {
                let lhs = falling_factorial(a, k);
                let rhs = a * falling_factorial(a - 1.0, k - 1);
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0),
                    "a={a} k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn falling_factorial_large_k_consistent_with_gamma_ratio() {
        // positive-factor branch
        let v = falling_factorial(100.5, 80);
        let direct: f64 = (0..80).map(|m| 100.5 - m as f64).product();
        assert!((v - direct).abs() <= 1e-10 * direct.abs());
        // sign-tracking branch: factors cross zero at non-integer a
        let v = falling_factorial(10.5, 70);
        let direct: f64 = (0..70).map(|m| 10.5 - m as f64).product();
        assert!((v - direct).abs() <= 1e-9 * direct.abs(), "{v} vs {direct}");
    }

    #[test]
    fn marginal_at_t_frozen_value() {
        // r=0, delta=1, c=1, i=1, t=ln 2 → e^{-ln2}(1-e^{-ln2}) = 0.25. No DPA
        // parameters give c=1 (c<1 always), so pin it through the internal
        // log-space form, which is what the quadrature path consumes.
        let v = log_marginal_at_t(0, 1, std::f64::consts::LN_2, 1.0, 1.0).exp();
        assert!((v - 0.25).abs() < 1e-14);
        assert_eq!(log_marginal_at_t(0, 3, 0.0, 1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn marginal_at_t_boundaries() {
        let (p, rc) = standard();
        // i = r: survival probability e^{-c(δ+r)t}.
        for &(r, t) in &[(0u32, 0.7), (1u32, 2.3)] {
            let v = marginal_at_t(r, r, t, Axis::In, &rc, &p).unwrap();
            let expect = (-0.4375 * (1.0 + r as f64) * t).exp();
            assert!((v - expect).abs() < 1e-15);
        }
        // t = 0: point mass at r.
        assert_eq!(marginal_at_t(0, 0, 0.0, Axis::In, &rc, &p).unwrap(), 1.0);
        assert_eq!(marginal_at_t(0, 3, 0.0, Axis::In, &rc, &p).unwrap(), 0.0);
        // i < r.
        assert_eq!(marginal_at_t(1, 0, 1.0, Axis::In, &rc, &p).unwrap(), 0.0);
    }

    #[test]
    fn marginal_at_t_sums_to_one_over_i() {
        let (p, rc) = standard();
        for &t in &[0.3, 1.0, 4.0] {
            for r in 0..=1u32 {
                let total: f64 = (0..400)
                    .map(|i| marginal_at_t(r, i, t, Axis::In, &rc, &p).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-10, "t={t} r={r}: {total}");
            }
        }
    }

    #[test]
    fn marginal_stopped_frozen_values() {
        // δ=1, c=1: P(i) = 1/((i+1)(i+2)). No DPA params give c=1, so drive the
        // product form through a synthetic rate check plus the library API at
        // the standard parameters.
        let (p, rc) = standard();
        // i = r = 0: 1/(λ_0+1) with λ_0 = 0.4375.
        let v = marginal_stopped(0, 0, Axis::In, &rc, &p).unwrap();
        assert!((v - 1.0 / 1.4375).abs() < 1e-15);
        // vec form matches the scalar form.
        let vec = marginal_stopped_vec(0, 200, Axis::In, &rc, &p).unwrap();
        for i in (0..=200).step_by(17) {
            let direct = marginal_stopped(0, i, Axis::In, &rc, &p).unwrap();
            assert!((vec[i as usize] - direct).abs() <= 1e-15 * direct.max(1e-300));
        }
    }

    #[test]
    fn marginal_stopped_ratio_form_matches_product_form() {
        let (p, rc) = standard();
        for r in 0..=1u32 {
            for i in [r, r + 1, 5, 40, 173, 500] {
                let prod = marginal_stopped(r, i, Axis::In, &rc, &p).unwrap();
                let ratio = marginal_stopped_ratio_form(r, i, Axis::In, &rc, &p).unwrap();
                assert!(
                    (prod - ratio).abs() <= 1e-12 * prod,
                    "r={r} i={i}: {prod} vs {ratio}"
                );
            }
        }
    }

    #[test]
    fn ratio_form_keeps_the_leading_rate_factor() {
        // δ=1, c=2, i=r=0: first principles give 1/(λ_0+1) = 1/(δc+1) = 1/3;
        // the variant without the leading 1/c factor would give 2/3. The rate
        // c=2 cannot arise from admissible model parameters (c < 1 always),
        // so evaluate the reduced expression exactly as the function does.
        let c: f64 = 2.0;
        let delta: f64 = 1.0;
        let first_principles = 1.0 / (delta * c + 1.0);
        let ratio_form = 1.0 / (c * (delta + 1.0 / c));
        let dropped_factor_variant = 1.0 / (delta + 1.0 / c);
        assert!((ratio_form - first_principles).abs() < 1e-15);
        assert!((ratio_form - 1.0 / 3.0).abs() < 1e-15);
        assert!((dropped_factor_variant - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tail_exponent_values() {
        let (p, rc) = standard();
        let (ein, eout) = marginal_tail_exponents(&rc).unwrap();
        assert!((ein - (1.0 + 16.0 / 7.0)).abs() < 1e-12);
        assert_eq!(ein, eout);
        assert!(ein > 2.0);

        let (x_in, x_out) = fixed_other_tail_exponents(&rc, &p).unwrap();
        assert!((x_in - 30.0 / 7.0).abs() < 1e-12); // 1 + 16/7 + 1
        assert_eq!(x_in, x_out);

        // delta → 0 degenerates the cross exponent to the marginal exponent.
        let p2 = ModelParams::dpa(0.3, 0.4, 1e-9, 1e-9).unwrap();
        let rc2 = rate_constants(&p2).unwrap();
        let (e2, _) = marginal_tail_exponents(&rc2).unwrap();
        let (x2, _) = fixed_other_tail_exponents(&rc2, &p2).unwrap();
        assert!((x2 - e2).abs() < 1e-6);
    }

    #[test]
    fn bivariate_exponent_examples_and_continuity() {
        let (p, rc) = standard();
        // symmetric params, r = 1: −(1 + 0 + 1 + 1/0.4375) = −30/7.
        let v = bivariate_tail_exponent(1.0, &rc, &p).unwrap();
        assert!((v + 30.0 / 7.0).abs() < 1e-12);
        // r = 0 equals δ_in − 1 − (c_in δ_in + c_out δ_out + 1)/c_in and also −x_in.
        let v0 = bivariate_tail_exponent(0.0, &rc, &p).unwrap();
        let master = 1.0 - 1.0 - (0.4375 + 0.4375 + 1.0) / 0.4375;
        assert!((v0 - master).abs() < 1e-12);
        let (x_in, _) = fixed_other_tail_exponents(&rc, &p).unwrap();
        assert!((v0 + x_in).abs() < 1e-12);
    }

    #[test]
    fn bivariate_exponent_matches_master_form_on_random_params() {
        // Branch split vs the single max() expression, 100 deterministic sets.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let alpha = 0.05 + 0.4 * next();
            let gamma = 0.05 + 0.4 * next();
            let beta = 1.0 - alpha - gamma;
            let d_in = 0.1 + 3.0 * next();
            let d_out = 0.1 + 3.0 * next();
            let p = ModelParams::dpa(alpha, beta, d_in, d_out).unwrap();
            let rc = rate_constants(&p).unwrap();
            let (c_in, c_out) = rc.dpa().unwrap();
            let split = c_out / c_in;
            for &r in &[0.0, 0.3, 0.7 * split, split, 1.3 * split, 3.0] {
                let branch = bivariate_tail_exponent(r, &rc, &p).unwrap();
                let master = d_in - 1.0 + r * (d_out - 1.0)
                    - (c_in * d_in + c_out * d_out + 1.0) * (1.0 / c_in).max(r / c_out);
                assert!(
                    (branch - master).abs() < 1e-12,
                    "r={r}: branch {branch} vs master {master}"
                );
            }
            // continuity across the split point
            let left = bivariate_tail_exponent(split * (1.0 - 1e-12), &rc, &p).unwrap();
            let right = bivariate_tail_exponent(split * (1.0 + 1e-12), &rc, &p).unwrap();
            assert!((left - right).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_classification() {
        let mk = |d_out: f64| {
            let p = ModelParams::dpa(0.2, 0.5, 1.5, d_out).unwrap();
            let rc = rate_constants(&p).unwrap();
            (p, rc)
        };
        let (p, rc) = mk(0.5);
        assert_eq!(argmax_r(&rc, &p).unwrap(), TailArgmax::Zero);
        let (p, rc) = mk(2.0);
        let (c_in, c_out) = rc.dpa().unwrap();
        assert_eq!(
            argmax_r(&rc, &p).unwrap(),
            TailArgmax::CrossRatio(c_out / c_in)
        );
        let (p, rc) = mk(1.0);
        let (c_in, c_out) = rc.dpa().unwrap();
        assert_eq!(
            argmax_r(&rc, &p).unwrap(),
            TailArgmax::Interval { hi: c_out / c_in }
        );
    }

    #[test]
    fn undirected_pa_values() {
        assert_eq!(undirected_pa_pmf(2, 2), 0.5);
        assert_eq!(undirected_pa_pmf(2, 1), 0.0);
        // m=1 telescoping sum: Σ 4/(i(i+1)(i+2)) = 1.
        let total: f64 = (1..200_000).map(|i| undirected_pa_pmf(1, i)).sum();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn undirected_pa_equals_absorption_product() {
        // ∏_{k=m}^{i-1} λ_k/(λ_k+1) · 1/(λ_i+1) with λ_k = k/2.
        for m in 1..=5u32 {
            for i in m..=200 {
                let lam = |k: u32| k as f64 / 2.0;
                let mut acc = 1.0;
                for k in m..i {
                    acc *= lam(k) / (lam(k) + 1.0);
                }
                acc /= lam(i) + 1.0;
                let direct = undirected_pa_pmf(m, i);
                assert!(
                    (acc - direct).abs() <= 1e-12 * direct,
                    "m={m} i={i}: {acc} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn yule_examples() {
        let t = 1.7;
        assert!((yule_pmf(1, 1, t) - (-t / 2.0).exp()).abs() < 1e-15);
        // m=1 is geometric with success probability p = e^{-t/2}.
        let p = (-t / 2.0f64).exp();
        for k in 1..40u32 {
            let expect = p * (1.0 - p).powi(k as i32 - 1);
            assert!((yule_pmf(1, k, t) - expect).abs() < 1e-13);
        }
        // survival at m=2: e^{-t}.
        assert!((yule_pmf(2, 2, t) - (-t).exp()).abs() < 1e-15);
        // sums to 1 over k at fixed t.
        for m in 1..=4u32 {
            let total: f64 = (m..m + 4000).map(|k| yule_pmf(m, k, t)).sum();
            assert!((total - 1.0).abs() < 1e-10, "m={m}: {total}");
        }
        assert_eq!(yule_pmf(3, 2, t), 0.0);
    }
}
