//! Cross-validation of the analytic formulas and the absorbing-walk DP
//! against independent numerical oracles: Runge-Kutta integration of the
//! birth-chain master equations, direct numerical averaging over the
//! exponential stopping time, explicit path enumeration on the lattice,
//! and randomized property checks.

use proptest::prelude::*;

use dpa_core::{
    dp_absorption, gdpa_rates, joint_closedform, joint_quadrature, lambda_in, lambda_out,
    marginal_at_t, marginal_stopped, marginal_stopped_vec, marginal_tail_exponents,
    rate_constants, start_distribution, Axis, LatticeWalkSpec, ModelKind, ModelParams,
    RateConstants, yule_pmf,
};

fn standard() -> (ModelParams, RateConstants) {
    let p = ModelParams::dpa(0.3, 0.4, 1.0, 1.0).unwrap();
    let rc = rate_constants(&p).unwrap();
    (p, rc)
}

/// Fourth-order Runge-Kutta integration of the forward (master) equations of
/// a pure birth chain with rates `rate(k)`:
/// `dP_k/dt = rate(k-1)·P_{k-1} - rate(k)·P_k`, started from `P_r(0) = 1`.
/// Entries with `k < max_k` have no truncation error because probability in a
/// birth chain only flows upward.
fn rk4_birth_forward<F: Fn(u32) -> f64>(
    rate: F,
    r: u32,
    max_k: u32,
    t: f64,
    steps: usize,
) -> Vec<f64> {
    let n = (max_k + 1) as usize;
    let deriv = |p: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; n];
        for k in (r as usize)..n {
            let inflow = if k > r as usize {
                rate(k as u32 - 1) * p[k - 1]
            } else {
                0.0
            };
            d[k] = inflow - rate(k as u32) * p[k];
        }
        d
    };
    let mut p = vec![0.0; n];
    p[r as usize] = 1.0;
    let h = t / steps as f64;
    let mut scratch = vec![0.0; n];
    for _ in 0..steps {
        let k1 = deriv(&p);
        for k in 0..n {
            scratch[k] = p[k] + 0.5 * h * k1[k];
        }
        let k2 = deriv(&scratch);
        for k in 0..n {
            scratch[k] = p[k] + 0.5 * h * k2[k];
        }
        let k3 = deriv(&scratch);
        for k in 0..n {
            scratch[k] = p[k] + h * k3[k];
        }
        let k4 = deriv(&scratch);
        for k in 0..n {
            p[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }
    p
}

#[test]
fn fixed_time_marginal_matches_master_equation_integration() {
    let (params, rc) = standard();
    let (c_in, _) = rc.dpa().unwrap();
    let delta = params.delta_in();
    for r in [0u32, 1] {
        let t = 0.8;
        let oracle = rk4_birth_forward(|k| (f64::from(k) + delta) * c_in, r, 40, t, 800);
        for i in r..=30 {
            let got = marginal_at_t(r, i, t, Axis::In, &rc, &params).unwrap();
            assert!(
                (got - oracle[i as usize]).abs() < 1e-9,
                "r={r} i={i}: {got} vs {}",
                oracle[i as usize]
            );
        }
    }
}

#[test]
fn asymmetric_out_axis_matches_master_equation_integration() {
    let params = ModelParams::dpa(0.2, 0.5, 0.6, 1.4).unwrap();
    let rc = rate_constants(&params).unwrap();
    let (_, c_out) = rc.dpa().unwrap();
    let delta = params.delta_out();
    let t = 1.7;
    let oracle = rk4_birth_forward(|k| (f64::from(k) + delta) * c_out, 1, 45, t, 1700);
    for j in 1..=30 {
        let got = marginal_at_t(1, j, t, Axis::Out, &rc, &params).unwrap();
        assert!(
            (got - oracle[j as usize]).abs() < 1e-9,
            "j={j}: {got} vs {}",
            oracle[j as usize]
        );
    }
}

#[test]
fn yule_law_matches_master_equation_integration() {
    // The undirected model's degree process jumps at rate k/2 from degree m.
    for m in [1u32, 2, 3] {
        let t = 1.3;
        let oracle = rk4_birth_forward(|k| f64::from(k) / 2.0, m, 40, t, 1300);
        for k in m..=30 {
            let got = yule_pmf(m, k, t);
            assert!(
                (got - oracle[k as usize]).abs() < 1e-9,
                "m={m} k={k}: {got} vs {}",
                oracle[k as usize]
            );
        }
    }
}

#[test]
fn stopped_marginal_is_the_exponential_average_of_the_fixed_time_law() {
    // marginal_stopped(i) = ∫_0^∞ e^{-t} P_i(t) dt. The integrand is smooth
    // in t and bounded by e^{-t}, so composite Simpson on [0, 45] (tail
    // < e^{-45}) converges at its nominal fourth order.
    let (params, rc) = standard();
    let upper = 45.0;
    let panels = 16384usize;
    for r in [0u32, 1] {
        for i in [r, r + 1, r + 2, r + 5, r + 10] {
            let f = |t: f64| {
                if t == 0.0 {
                    // point mass at the start state
                    return if i == r { 1.0 } else { 0.0 };
                }
                (-t).exp() * marginal_at_t(r, i, t, Axis::In, &rc, &params).unwrap()
            };
            let h = upper / panels as f64;
            let mut acc = f(0.0) + f(upper);
            for k in 1..panels {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(k as f64 * h);
            }
            let integral = acc * h / 3.0;
            let stopped = marginal_stopped(r, i, Axis::In, &rc, &params).unwrap();
            assert!(
                (integral - stopped).abs() < 1e-8,
                "r={r} i={i}: {integral} vs {stopped}"
            );
        }
    }
}

#[test]
fn quadrature_row_sums_converge_to_the_stopped_mixture() {
    let (params, rc) = standard();
    let w_alpha = params.alpha() / (params.alpha() + params.gamma());
    let w_gamma = 1.0 - w_alpha;
    for i in [0u32, 1, 2] {
        let mixture = w_alpha * marginal_stopped(0, i, Axis::In, &rc, &params).unwrap()
            + w_gamma * marginal_stopped(1, i, Axis::In, &rc, &params).unwrap();
        let row: f64 = (0..=300u32)
            .map(|j| joint_quadrature(i, j, &rc, &params, 1e-10).unwrap())
            .sum();
        assert!((row - mixture).abs() < 1e-6, "i={i}: {row} vs {mixture}");
    }
}

#[test]
fn deep_tail_halving_ratio_approaches_the_predicted_exponent() {
    let (params, rc) = standard();
    let (exponent, _) = marginal_tail_exponents(&rc).unwrap();
    let pmf = marginal_stopped_vec(0, 1 << 14, Axis::In, &rc, &params).unwrap();
    let expected = exponent * std::f64::consts::LN_2;
    for e in [10u32, 11, 12, 13] {
        let i = 1usize << e;
        let ratio = (pmf[i] / pmf[2 * i]).ln();
        assert!(
            (ratio - expected).abs() < 0.02 * expected,
            "i=2^{e}: {ratio} vs {expected}"
        );
    }
}

/// Absorption probability at `target` by explicit first-step recursion over
/// monotone lattice paths — no grid, no wavefront, rates recomputed at every
/// visit. Exponential in the target degree, so keep targets small.
fn path_enumeration_absorption(params: &ModelParams, target: (u32, u32)) -> f64 {
    let rc = rate_constants(params).unwrap();
    let rates = |k: u32, l: u32| -> (f64, f64, f64) {
        match params.kind() {
            ModelKind::Gdpa => gdpa_rates(k, l, &rc, params).unwrap(),
            _ => (
                lambda_in(k, &rc, params).unwrap(),
                lambda_out(l, &rc, params).unwrap(),
                0.0,
            ),
        }
    };
    fn visit(
        cur: (u32, u32),
        target: (u32, u32),
        rates: &dyn Fn(u32, u32) -> (f64, f64, f64),
    ) -> f64 {
        let (r_in, r_out, r_diag) = rates(cur.0, cur.1);
        let sigma = r_in + r_out + r_diag + 1.0;
        if cur == target {
            return 1.0 / sigma;
        }
        let mut total = 0.0;
        if cur.0 < target.0 {
            total += r_in / sigma * visit((cur.0 + 1, cur.1), target, rates);
        }
        if cur.1 < target.1 {
            total += r_out / sigma * visit((cur.0, cur.1 + 1), target, rates);
        }
        if cur.0 < target.0 && cur.1 < target.1 {
            total += r_diag / sigma * visit((cur.0 + 1, cur.1 + 1), target, rates);
        }
        total
    }
    start_distribution(params)
        .entries
        .iter()
        .filter(|&&((a, b), _)| a <= target.0 && b <= target.1)
        .map(|&((a, b), w)| w * visit((a, b), target, &rates))
        .sum()
}

#[test]
fn dp_agrees_with_explicit_path_enumeration() {
    let cases = [
        ModelParams::dpa(0.3, 0.4, 1.0, 1.0).unwrap(),
        ModelParams::dpa(0.2, 0.5, 0.6, 1.4).unwrap(),
        ModelParams::gdpa(0.3, 0.4, 1.0, 1.0, 0.2, 0.1, 0.5).unwrap(),
        ModelParams::gdpa(0.25, 0.3, 0.0, 2.0, 1.5, 0.7, 0.9).unwrap(),
    ];
    for params in cases {
        let spec = LatticeWalkSpec::new(params, 8, 8).unwrap();
        let pmf = dp_absorption(&spec).unwrap();
        for i in 0..=4u32 {
            for j in 0..=4u32 {
                let oracle = path_enumeration_absorption(&params, (i, j));
                let got = pmf.get(i, j);
                assert!(
                    (got - oracle).abs() < 1e-12,
                    "{:?} ({i},{j}): {got} vs {oracle}",
                    params.kind()
                );
            }
        }
    }
}

// --- randomized property checks on a 3-decimal parameter grid ---

fn dpa_strategy() -> impl Strategy<Value = ModelParams> {
    (5u32..=900, 0u32..=990, 50u32..=5000, 50u32..=5000)
        .prop_filter("alpha + beta must leave room for gamma", |&(a, b, _, _)| {
            a + b <= 995
        })
        .prop_map(|(a, b, di, dn)| {
            ModelParams::dpa(
                f64::from(a) / 1000.0,
                f64::from(b) / 1000.0,
                f64::from(di) / 1000.0,
                f64::from(dn) / 1000.0,
            )
            .expect("filtered to valid region")
        })
}

fn gdpa_strategy() -> impl Strategy<Value = ModelParams> {
    (
        (5u32..=900, 0u32..=990, 50u32..=5000, 50u32..=5000),
        (0u32..=2000, 0u32..=2000, 0u32..=1000),
    )
        .prop_filter("alpha + beta must leave room for gamma", |&((a, b, _, _), _)| {
            a + b <= 995
        })
        .prop_map(|((a, b, di, dn), (c, d, rho))| {
            ModelParams::gdpa(
                f64::from(a) / 1000.0,
                f64::from(b) / 1000.0,
                f64::from(di) / 1000.0,
                f64::from(dn) / 1000.0,
                f64::from(c) / 1000.0,
                f64::from(d) / 1000.0,
                f64::from(rho) / 1000.0,
            )
            .expect("filtered to valid region")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rate_constants_stay_inside_the_unit_interval(params in dpa_strategy()) {
        let rc = rate_constants(&params).unwrap();
        let (c_in, c_out) = rc.dpa().unwrap();
        prop_assert!(c_in > 0.0 && c_in < 1.0, "c_in = {c_in}");
        prop_assert!(c_out > 0.0 && c_out < 1.0, "c_out = {c_out}");
    }

    #[test]
    fn birth_rates_are_affine_and_increasing(params in dpa_strategy()) {
        let rc = rate_constants(&params).unwrap();
        let l0 = lambda_in(0, &rc, &params).unwrap();
        let l1 = lambda_in(1, &rc, &params).unwrap();
        let l9 = lambda_in(9, &rc, &params).unwrap();
        let slope = l1 - l0;
        prop_assert!(slope > 0.0);
        prop_assert!((l9 - (l0 + 9.0 * slope)).abs() < 1e-12);
        let m0 = lambda_out(0, &rc, &params).unwrap();
        let m1 = lambda_out(1, &rc, &params).unwrap();
        prop_assert!(m1 > m0);
    }

    #[test]
    fn start_masses_sum_to_one(params in gdpa_strategy()) {
        let start = start_distribution(&params);
        prop_assert!((start.total() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn closed_form_is_symmetric_under_axis_swap(
        params in dpa_strategy(),
        i in 0u32..=6,
        j in 0u32..=6,
    ) {
        //

        // Swapping (alpha, delta_in, i) with (gamma, delta_out, j) maps the
        // model onto itself with the two degree axes exchanged.
        let rc = rate_constants(&params).unwrap();
        let swapped = ModelParams::dpa(
            params.gamma(),
            params.beta(),
            params.delta_out(),
            params.delta_in(),
        )
        .unwrap();
        let rc_swapped = rate_constants(&swapped).unwrap();
        let p_ij = joint_closedform(i, j, &rc, &params).unwrap();
        let p_ji = joint_closedform(j, i, &rc_swapped, &swapped).unwrap();
        prop_assert!(p_ij >= 0.0);
        prop_assert!((p_ij - p_ji).abs() <= 1e-12 * p_ij.abs().max(1e-30), "{p_ij} vs {p_ji}");
    }

    #[test]
    fn dp_conserves_mass_for_random_parameters(
        params in gdpa_strategy(),
        max_in in 4u32..=32,
        max_out in 4u32..=32,
    ) {
        let spec = LatticeWalkSpec::new(params, max_in, max_out).unwrap();
        let pmf = dp_absorption(&spec).unwrap();
        let total = pmf.total_mass() + pmf.leaked_mass();
        prop_assert!((total - 1.0).abs() < 1e-12, "total = {total}");
    }

    #[test]
    fn quadrature_matches_the_exact_sum_on_random_parameters(
        params in dpa_strategy(),
        i in 0u32..=5,
        j in 0u32..=5,
    ) {
        let rc = rate_constants(&params).unwrap();
        let exact = joint_closedform(i, j, &rc, &params).unwrap();
        let quad = joint_quadrature(i, j, &rc, &params, 1e-11).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-8, "({i},{j}): {exact} vs {quad}");
    }
}
