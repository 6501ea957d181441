//! Exact evaluation of the alternating double sum for the joint pmf.
//!
//! The double sums suffer catastrophic cancellation in floating point once
//! `i + j` grows past a few dozen (terms alternate in sign and are many orders
//! of magnitude larger than the result). Below a degree-sum threshold the sums
//! are therefore evaluated in exact rational arithmetic over the decimal
//! rationalization of the parameters: every denominator `A + kP + ℓQ` is put
//! over one common integer denominator, the term reciprocals are summed as a
//! single big integer over their lcm, and only the final reduced rational is
//! rounded to `f64`. Parameters with short decimal representations (the usual
//! case) keep all intermediate integers small.
//!
//! Above the threshold a compensated log-space summation is attempted; it
//! reports [`Error::NumericallyUnstable`] with its error estimate when the
//! cancellation exceeds what the requested accuracy allows.

use num::bigint::BigInt;
use num::integer::lcm;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams, RateConstants};

use super::ln_gamma;

/// Exact rational value of a finite `f64` from its shortest decimal
/// representation (the one `Display` prints, which round-trips).
///
/// `0.3` becomes exactly 3/10 rather than the nearest binary fraction, so
/// parameters entered as short decimals stay small in rational arithmetic.
pub(crate) fn decimal_rational(x: f64) -> BigRational {
    debug_assert!(x.is_finite());
    let s = format!("{x}");
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.as_str()),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    let mut numer: BigInt = int_part.parse().expect("integer part of decimal form");
    let mut denom = BigInt::one();
    for ch in frac_part.chars() {
        numer = numer * 10 + (ch as u8 - b'0');
        denom *= 10;
    }
    BigRational::new(BigInt::from(sign) * numer, denom)
}

/// Row `n` of Pascal's triangle, `C(n, 0..=n)`, exact.
fn binomial_row(n: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

fn factorial_big(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for m in 2..=n {
        acc *= m;
    }
    acc
}

/// `∏_{v=lo}^{hi-1} (base + v)`; 1 when the range is empty.
fn rising_product(base: &BigRational, lo: u32, hi: u32) -> BigRational {
    let mut acc = BigRational::one();
    for v in lo..hi {
        acc *= base + BigRational::from(BigInt::from(v));
    }
    acc
}

/// `Σ_{k=0}^{i_top} Σ_{ℓ=0}^{j_top} (-1)^{k+ℓ} C(i_top,k) C(j_top,ℓ) / (a + k·p + ℓ·q)`
/// in exact arithmetic. All denominators are positive for our inputs.
///
/// The result is deliberately left unreduced (`new_raw`): numerator and
/// denominator run to tens of kilobits here, and the gcd a reducing
/// constructor would take is quadratic in that size — by far the dominant
/// cost. Callers only multiply by small reduced rationals and convert to
/// `f64`, neither of which needs the reduced form.
fn alternating_sum(
    i_top: u32,
    j_top: u32,
    a: &BigRational,
    p: &BigRational,
    q: &BigRational,
) -> BigRational {
    // Put a, p, q over one integer denominator d, so each term denominator is
    // the integer n_{kℓ} = a_int + k·p_int + ℓ·q_int over d.
    let d = lcm(
        lcm(a.denom().clone(), p.denom().clone()),
        q.denom().clone(),
    );
    let a_int = a.numer() * (&d / a.denom());
    let p_int = p.numer() * (&d / p.denom());
    let q_int = q.numer() * (&d / q.denom());

    let mut denoms = Vec::with_capacity((i_top as usize + 1) * (j_top as usize + 1));
    let mut common = BigInt::one();
    for k in 0..=i_top {
        let base = &a_int + &p_int * k;
        for l in 0..=j_top {
            let n = &base + &q_int * l;
            debug_assert!(n.is_positive());
            common = lcm(common, n.clone());
            denoms.push(n);
        }
    }

    let rows = (binomial_row(i_top), binomial_row(j_top));
    let mut numer_sum = BigInt::zero();
    let mut idx = 0;
    for k in 0..=i_top as usize {
        for l in 0..=j_top as usize {
            let term = &rows.0[k] * &rows.1[l] * (&common / &denoms[idx]);
            if (k + l) % 2 == 0 {
                numer_sum += term;
            } else {
                numer_sum -= term;
            }
            idx += 1;
        }
    }
    // Σ 1/(n/d) over lcm: d · Σ (common/n) / common.
    BigRational::new_raw(d * numer_sum, common)
}

/// Exact rational parameter bundle for the double sums.
struct RationalRates {
    weight_alpha: BigRational,
    weight_gamma: BigRational,
    c_in: BigRational,
    c_out: BigRational,
    d_in: BigRational,
    d_out: BigRational,
}

impl RationalRates {
    fn from_params(params: &ModelParams) -> Self {
        let alpha = decimal_rational(params.alpha());
        let beta = decimal_rational(params.beta());
        let d_in = decimal_rational(params.delta_in());
        let d_out = decimal_rational(params.delta_out());
        let one = BigRational::one();
        let gamma = &one - &alpha - &beta;
        let node = &alpha + &gamma;
        let c_in = (&alpha + &beta) / (&one + &d_in * &node);
        let c_out = (&gamma + &beta) / (&one + &d_out * &node);
        RationalRates {
            weight_alpha: &alpha / &node,
            weight_gamma: &gamma / &node,
            c_in,
            c_out,
            d_in,
            d_out,
        }
    }
}

fn branch_to_f64(branch: BigRational) -> Result<f64> {
    branch
        .to_f64()
        .filter(|v| v.is_finite())
        .ok_or(Error::NumericallyUnstable {
            estimate: f64::INFINITY,
        })
}

fn rational_joint(i: u32, j: u32, params: &ModelParams) -> Result<f64> {
    let r = RationalRates::from_params(params);
    let one = BigRational::one();
    // The two start branches are rounded to f64 separately and then added:
    // both are positive, so nothing cancels, and summing them exactly would
    // force their huge unreduced denominators onto a common one.
    let mut total = 0.0;

    // Start (0,1): in-axis counts from 0, out-axis from 1; zero when j = 0.
    if j >= 1 {
        let pref = rising_product(&r.d_in, 0, i) / BigRational::from(factorial_big(i))
            * rising_product(&r.d_out, 1, j)
            / BigRational::from(factorial_big(j - 1));
        let a = &r.c_in * &r.d_in + &r.c_out * (&r.d_out + &one) + &one;
        let branch = &r.weight_alpha * pref * alternating_sum(i, j - 1, &a, &r.c_in, &r.c_out);
        total += branch_to_f64(branch)?;
    }
    // Start (1,0): symmetric; zero when i = 0.
    if i >= 1 {
        let pref = rising_product(&r.d_in, 1, i) / BigRational::from(factorial_big(i - 1))
            * rising_product(&r.d_out, 0, j)
            / BigRational::from(factorial_big(j));
        let a = &r.c_in * (&r.d_in + &one) + &r.c_out * &r.d_out + &one;
        let branch = &r.weight_gamma * pref * alternating_sum(i - 1, j, &a, &r.c_in, &r.c_out);
        total += branch_to_f64(branch)?;
    }

    Ok(total)
}

/// All closed-form values on the triangle `i + j ≤ max_sum`, as ragged rows
/// `result[i][j]`, by one shared finite-difference pass per start branch.
///
/// Writing `W(k,ℓ) = L / m(k,ℓ)` for the integerized term denominators
/// `m(k,ℓ)` and their lcm `L`, the alternating double sum for a pair is
/// exactly the iterated forward difference `(Δ_k^i Δ_ℓ^j W)(0,0)`. One
/// difference table therefore serves every pair at once: O(max_sum³) big
/// subtractions in place of O(max_sum⁴) multiply-divides for pairwise calls,
/// and no per-pair lcm rebuilds.
fn rational_triangle(max_sum: u32, params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    let size = max_sum as usize + 1;
    let mut out: Vec<Vec<f64>> = (0..size).map(|i| vec![0.0; size - i]).collect();
    if max_sum == 0 {
        return Ok(out); // only (0,0), which carries no mass
    }
    let r = RationalRates::from_params(params);
    let one = BigRational::one();
    let s_top = max_sum - 1;

    let d_in = params.delta_in();
    let d_out = params.delta_out();
    let node = params.alpha() + params.gamma();

    // Degree prefactors as running products: rising(δ, 0, n)/n! and
    // rising(δ, 1, n)/(n-1)!.
    let mut from_zero_in = vec![1.0f64; size];
    let mut from_zero_out = vec![1.0f64; size];
    let mut from_one_in = vec![1.0f64; size];
    let mut from_one_out = vec![1.0f64; size];
    for v in 1..size {
        let x = v as f64;
        from_zero_in[v] = from_zero_in[v - 1] * (d_in + x - 1.0) / x;
        from_zero_out[v] = from_zero_out[v - 1] * (d_out + x - 1.0) / x;
        if v >= 2 {
            from_one_in[v] = from_one_in[v - 1] * (d_in + x - 1.0) / (x - 1.0);
            from_one_out[v] = from_one_out[v - 1] * (d_out + x - 1.0) / (x - 1.0);
        }
    }

    let a_first = &r.c_in * &r.d_in + &r.c_out * (&r.d_out + &one) + &one;
    let weight = params.alpha() / node;
    difference_pass(s_top, &a_first, &r.c_in, &r.c_out, |it, jt, value| {
        // T for start (0,1) at pair (i, j) = (it, jt + 1).
        let (i, j) = (it as usize, jt as usize + 1);
        out[i][j] += weight * from_zero_in[i] * from_one_out[j] * value;
    })?;

    let a_second = &r.c_in * (&r.d_in + &one) + &r.c_out * &r.d_out + &one;
    let weight = params.gamma() / node;
    difference_pass(s_top, &a_second, &r.c_in, &r.c_out, |it, jt, value| {
        // T for start (1,0) at pair (i, j) = (it + 1, jt).
        let (i, j) = (it as usize + 1, jt as usize);
        out[i][j] += weight * from_one_in[i] * from_zero_out[j] * value;
    })?;

    Ok(out)
}

/// Tabulates `W(k,ℓ) = L / (a + k·p + ℓ·q)` over `k + ℓ ≤ s_top` (integerized
/// over the parameters' common denominator `d`) and streams the exact values
/// `d·(Δ_k^{it} Δ_ℓ^{jt} W)(0,0) / L` to `visit` for every `it + jt ≤ s_top`.
fn difference_pass(
    s_top: u32,
    a: &BigRational,
    p: &BigRational,
    q: &BigRational,
    mut visit: impl FnMut(u32, u32, f64),
) -> Result<()> {
    let d = lcm(
        lcm(a.denom().clone(), p.denom().clone()),
        q.denom().clone(),
    );
    let a_int = a.numer() * (&d / a.denom());
    let p_int = p.numer() * (&d / p.denom());
    let q_int = q.numer() * (&d / q.denom());

    let mut denoms: Vec<Vec<BigInt>> = Vec::with_capacity(s_top as usize + 1);
    let mut common = BigInt::one();
    for k in 0..=s_top {
        let base = &a_int + &p_int * k;
        let mut row = Vec::with_capacity((s_top - k) as usize + 1);
        for l in 0..=(s_top - k) {
            let m = &base + &q_int * l;
            debug_assert!(m.is_positive());
            common = lcm(common, m.clone());
            row.push(m);
        }
        denoms.push(row);
    }
    let mut table: Vec<Vec<BigInt>> = denoms
        .into_iter()
        .map(|row| row.into_iter().map(|m| &common / m).collect())
        .collect();

    for jt in 0..=s_top {
        if jt > 0 {
            // One in-place Δ_ℓ sweep over the still-needed part of the table.
            let keep = (s_top - jt) as usize;
            for (k, row) in table.iter_mut().enumerate().take(keep + 1) {
                for l in 0..=keep - k {
                    let (left, right) = row.split_at_mut(l + 1);
                    left[l] -= &right[0];
                }
            }
        }
        // Column ℓ = 0 now holds Δ_ℓ^{jt} W(·, 0); difference it in k, reading
        // off the top entry after each pass.
        let mut column: Vec<BigInt> = (0..=(s_top - jt) as usize)
            .map(|k| table[k][0].clone())
            .collect();
        for it in 0..=(s_top - jt) {
            let exact = BigRational::new_raw(&d * &column[0], common.clone());
            let value = exact
                .to_f64()
                .filter(|v| v.is_finite())
                .ok_or(Error::NumericallyUnstable {
                    estimate: f64::INFINITY,
                })?;
            visit(it, jt, value);
            for k in 0..column.len() - 1 {
                let (left, right) = column.split_at_mut(k + 1);
                left[k] -= &right[0];
            }
            column.pop();
        }
    }
    Ok(())
}

/// One double-sum term in compensated log-space arithmetic.
///
/// Returns `(value, abs_sum)` where `abs_sum` is the same sum with every term
/// taken positive — the cancellation denominator for the error estimate.
fn logspace_term(
    i_top: u32,
    j_top: u32,
    log_pref: f64,
    a: f64,
    p: f64,
    q: f64,
) -> (f64, f64) {
    let log_binom_i = log_binomial_row(i_top);
    let log_binom_j = log_binomial_row(j_top);
    // Scale by the largest log-term to keep exp() in range.
    let mut max_log = f64::NEG_INFINITY;
    for (k, lbi) in log_binom_i.iter().enumerate() {
        for (l, lbj) in log_binom_j.iter().enumerate() {
            let lt = lbi + lbj - (a + k as f64 * p + l as f64 * q).ln();
            if lt > max_log {
                max_log = lt;
            }
        }
    }
    let mut sum = Neumaier::default();
    let mut abs_sum = Neumaier::default();
    for (k, lbi) in log_binom_i.iter().enumerate() {
        for (l, lbj) in log_binom_j.iter().enumerate() {
            let lt = lbi + lbj - (a + k as f64 * p + l as f64 * q).ln();
            let term = (lt - max_log).exp();
            abs_sum.add(term);
            if (k + l) % 2 == 0 {
                sum.add(term);
            } else {
                sum.add(-term);
            }
        }
    }
    let scale = log_pref + max_log;
    let signed = sum.total();
    let value = if signed == 0.0 {
        0.0
    } else {
        signed.signum() * (scale + signed.abs().ln()).exp()
    };
    let abs = (scale + abs_sum.total().max(f64::MIN_POSITIVE).ln()).exp();
    (value, abs)
}

fn log_binomial_row(n: u32) -> Vec<f64> {
    let lg_n1 = ln_gamma(n as f64 + 1.0);
    (0..=n)
        .map(|k| lg_n1 - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
        .collect()
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn logspace_joint(
    i: u32,
    j: u32,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<f64> {
    let (c_in, c_out) = rc.dpa()?;
    let (d_in, d_out) = (params.delta_in(), params.delta_out());
    let node = params.alpha() + params.gamma();
    let mut value = 0.0;
    let mut abs = 0.0;

    if j >= 1 {
        let log_pref = ln_gamma(d_in + i as f64) - ln_gamma(d_in) - ln_gamma(i as f64 + 1.0)
            + ln_gamma(d_out + j as f64)
            - ln_gamma(d_out + 1.0)
            - ln_gamma(j as f64);
        let a = c_in * d_in + c_out * (d_out + 1.0) + 1.0;
        let (v, s) = logspace_term(i, j - 1, log_pref, a, c_in, c_out);
        let w = params.alpha() / node;
        value += w * v;
        abs += w * s;
    }
    if i >= 1 {
        let log_pref = ln_gamma(d_in + i as f64) - ln_gamma(d_in + 1.0) - ln_gamma(i as f64)
            + ln_gamma(d_out + j as f64)
            - ln_gamma(d_out)
            - ln_gamma(j as f64 + 1.0);
        let a = c_in * (d_in + 1.0) + c_out * d_out + 1.0;
        let (v, s) = logspace_term(i - 1, j, log_pref, a, c_in, c_out);
        let w = params.gamma() / node;
        value += w * v;
        abs += w * s;
    }

    let estimate = if value != 0.0 {
        f64::EPSILON * abs / value.abs()
    } else {
        f64::INFINITY
    };
    if !value.is_finite() || estimate > 1e-6 {
        return Err(Error::NumericallyUnstable { estimate });
    }
    Ok(value)
}

pub(crate) fn joint(
    i: u32,
    j: u32,
    rc: &RateConstants,
    params: &ModelParams,
    rational_threshold: u32,
) -> Result<f64> {
    params.expect_kind(ModelKind::Dpa, "joint_closedform")?;
    rc.dpa()?;
    if i == 0 && j == 0 {
        // Every node starts with total degree 1, so (0,0) carries no mass.
        return Ok(0.0);
    }
    if i as u64 + j as u64 <= rational_threshold as u64 {
        rational_joint(i, j, params)
    } else {
        logspace_joint(i, j, rc, params)
    }
}

pub(crate) fn joint_triangle(
    max_sum: u32,
    rc: &RateConstants,
    params: &ModelParams,
) -> Result<Vec<Vec<f64>>> {
    params.expect_kind(ModelKind::Dpa, "joint_closedform_triangle")?;
    rc.dpa()?;
    rational_triangle(max_sum, params)
}
