use keyrot_core::advmodel::{advantage_bound, guessing_from_distinguishing, raw_bound};
use keyrot_core::exactmath::{log2_rational, max_q_quadratic};
use keyrot_core::planner::{compute_q_star, improvement_bits_with_precision};
use keyrot_core::{EcbcDenominator, FixedDecimal, Mode, Natural, Rational, SecurityParams};
use proptest::prelude::*;

fn rat(n: u64, d: u64) -> Rational {
    Rational::new(n.into(), d.into()).unwrap()
}

fn arb_rational() -> impl Strategy<Value = Rational> {
    (0u64..1_000_000, 1u64..1_000_000).prop_map(|(n, d)| rat(n, d))
}

fn arb_positive_rational() -> impl Strategy<Value = Rational> {
    (1u64..1_000_000, 1u64..1_000_000).prop_map(|(n, d)| rat(n, d))
}

fn arb_mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Ctr), Just(Mode::Cbc), Just(Mode::EcbcMac)]
}

fn arb_denominator() -> impl Strategy<Value = EcbcDenominator> {
    prop_oneof![Just(EcbcDenominator::TwoN), Just(EcbcDenominator::PaperCompatN)]
}

/// Small-domain parameters with eps_max = m / 2^t.
fn arb_small_params() -> impl Strategy<Value = SecurityParams> {
    (8u32..=32, 1u64..=16, arb_denominator(), 1u64..8, 1i64..24)
        .prop_flat_map(|(lambda, l, d, m, t)| (Just((lambda, l, d, m, t)), 1u32..=lambda))
        .prop_filter_map("eps must be below 1", |((lambda, l, d, m, t), s)| {
            let eps = Rational::from(m) * Rational::pow2(-t);
            SecurityParams::new(lambda, s, Natural::from(l), eps).ok().map(|p| p.with_ecbc_denominator(d))
        })
}

fn scan(a: &Rational, b: &Rational, c: &Rational) -> u64 {
    let mut q = 0u64;
    loop {
        let n = Rational::from(q + 1);
        if a * &(&n * &n) + &(b * &n) > *c {
            return q;
        }
        q += 1;
    }
}

fn scan_q_star(mode: Mode, params: &SecurityParams) -> Natural {
    let mut q = Natural::zero();
    while advantage_bound(mode, params, &(&q + 1u64)).value() <= params.eps_max() {
        q = &q + 1u64;
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn quadratic_solver_matches_linear_scan(
        an in 0u64..500, ae in 0i64..16, bn in 0u64..500, be in 0i64..16, target in 0u64..2000, u in 0u64..1000,
    ) {
        let a = Rational::from(an) * Rational::pow2(-ae);
        let b = Rational::from(bn) * Rational::pow2(-be);
        prop_assume!(!(a.is_zero() && b.is_zero()));
        let f = |q: u64| {
            let n = Rational::from(q);
            &a * &(&n * &n) + &(&b * &n)
        };
        let lo = f(target);
        let c = &lo + &(&f(target + 1).checked_sub(&lo).unwrap() * &rat(u, 1000));
        let solved = max_q_quadratic(&a, &b, &c).unwrap();
        prop_assert_eq!(&solved, &Natural::from(scan(&a, &b, &c)));
        prop_assert_eq!(solved, Natural::from(target));
    }

    #[test]
    fn q_star_is_maximal(mode in arb_mode(), params in arb_small_params()) {
        match compute_q_star(mode, &params, &Natural::one()) {
            Ok(plan) => {
                let eps = params.eps_max();
                prop_assert!(advantage_bound(mode, &params, &plan.q_star).value() <= eps);
                prop_assert!(advantage_bound(mode, &params, &(&plan.q_star + 1u64)).value() > eps);
                let at = advantage_bound(mode, &params, &plan.q_star);
                prop_assert_eq!(&plan.eps_at_q_star, at.value());
            }
            Err(_) => prop_assert!(advantage_bound(mode, &params, &Natural::one()).value() > params.eps_max()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn q_star_matches_scan_for_tight_targets(mode in arb_mode(), lambda in 8u32..=24, l in 1u64..=8, q0 in 1u64..600) {
        let base = SecurityParams::new(lambda, lambda, Natural::from(l), rat(1, 2)).unwrap();
        let eps = raw_bound(mode, &base, &Rational::from(q0));
        prop_assume!(eps < Rational::one());
        let params = base.with_eps_max(eps).unwrap();
        let plan = compute_q_star(mode, &params, &Natural::one()).unwrap();
        prop_assert_eq!(plan.q_star.clone(), scan_q_star(mode, &params));
        prop_assert_eq!(plan.q_star, Natural::from(q0));
    }

    #[test]
    fn log2_is_additive(x in arb_positive_rational(), y in arb_positive_rational(), p in 4u32..14) {
        let lhs = log2_rational(&(&x * &y), p).unwrap();
        let rhs = &log2_rational(&x, p).unwrap() + &log2_rational(&y, p).unwrap();
        let tol = FixedDecimal::from_rational(&(Rational::from(2u64) * Rational::new(1u64.into(), Natural::from(10u64).pow(p)).unwrap()), p);
        prop_assert!((&lhs - &rhs).abs() <= tol, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn log2_of_powers_of_two_is_exact(e in -300i64..300) {
        let v = log2_rational(&Rational::pow2(e), 9).unwrap();
        prop_assert_eq!(v.to_string(), format!("{e}.000000000"));
    }

    #[test]
    fn rational_field_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn rational_text_round_trips(a in arb_rational()) {
        let back: Rational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), a);
    }

    #[test]
    fn natural_text_round_trips(hi in any::<u64>(), lo in any::<u64>()) {
        let n = Natural::from(hi) * Natural::pow2(64) + Natural::from(lo);
        prop_assert_eq!(n.to_string().parse::<Natural>().unwrap(), n.clone());
        prop_assert_eq!(Natural::from_hex(&n.to_hex()).unwrap(), n.clone());
        prop_assert_eq!(serde_json::from_str::<Natural>(&serde_json::to_string(&n).unwrap()).unwrap(), n);
    }

    #[test]
    fn fixed_decimal_rounds_to_nearest(n in 0u64..10_000_000, d in 1u64..10_000, p in 0u32..6) {
        let x = rat(n, d);
        let fx = FixedDecimal::from_rational(&x, p);
        let (back, neg) = fx.to_rational();
        prop_assert!(!neg);
        // |x - round(x)| <= 1/2 ulp.
        let half_ulp = Rational::new(1u64.into(), Natural::from(10u64).pow(p) * 2u64).unwrap();
        prop_assert!(back.abs_diff(&x).0 <= half_ulp);
    }

    #[test]
    fn bound_grows_with_q(mode in arb_mode(), params in arb_small_params(), q in 0u64..100_000) {
        let a = raw_bound(mode, &params, &Rational::from(q));
        let b = raw_bound(mode, &params, &Rational::from(q + 1));
        prop_assert!(a < b);
    }

    #[test]
    fn cbc_bound_exceeds_ctr_for_multiblock_files(params in arb_small_params(), q in 1u64..100_000) {
        prop_assume!(params.blocks_per_file() >= &Natural::from(2u64));
        let q = Rational::from(q);
        prop_assert!(raw_bound(Mode::Cbc, &params, &q) > raw_bound(Mode::Ctr, &params, &q));
    }

    #[test]
    fn guessing_is_half_of_distinguishing(n in 0u64..=1000, m in 0u64..=1000) {
        prop_assume!(n + m <= 1000);
        let g = |x: u64| guessing_from_distinguishing(&rat(x, 1000)).unwrap().into_value();
        prop_assert_eq!(g(n + m), &g(n) + &g(m));
        prop_assert_eq!(g(n) * Rational::from(2u64), rat(n, 1000));
    }

    #[test]
    fn q_star_responds_monotonically(mode in arb_mode(), params in arb_small_params(), ds in 1u32..4, dl in 1u64..4) {
        let q = |p: &SecurityParams| compute_q_star(mode, p, &Natural::one()).map(|r| r.q_star).unwrap_or_else(|_| Natural::zero());
        let base = q(&params);
        let stronger = params.clone().with_s_min(params.s_min() * &Natural::pow2(ds as u64)).unwrap();
        prop_assert!(q(&stronger) >= base);
        let longer = params.clone().with_blocks_per_file(params.blocks_per_file() + dl).unwrap();
        prop_assert!(q(&longer) <= base);
    }

    #[test]
    fn rotation_gain_is_strictly_bracketed(
        mode in arb_mode(), lambda in 16u32..=128, s_frac in 0.5f64..=1.0, l in 1u64..=512, t_frac in 0.05f64..0.95,
        k in 2u64..=64, d in arb_denominator(),
    ) {
        let s_bits = ((lambda as f64) * s_frac) as u32;
        let t = (((lambda as f64) * t_frac) as i64).max(1);
        let params = SecurityParams::new(lambda, s_bits.max(1), Natural::from(l), Rational::pow2(-t)).unwrap()
            .with_ecbc_denominator(d);
        let Ok(plan) = compute_q_star(mode, &params, &Natural::one()) else { return Ok(()) };
        let k = Natural::from(k);
        prop_assume!(plan.q_star >= k);
        let r = improvement_bits_with_precision(mode, &params, &plan.q_star, &k, 12).unwrap();
        prop_assert!(r.strictly_bracketed());
        prop_assert!(r.lower_bound_bits <= r.delta_bits && r.delta_bits <= r.upper_bound_bits);
        let gap = (&r.closed_form_bits - &r.direct_difference_bits).abs();
        prop_assert!(gap <= FixedDecimal::from_rational(&rat(2, 1_000_000_000_000), 12));
    }
}
