//! Regression checks for the SM4 worked example.

use keyrot_core::advmodel::advantage_bound;
use keyrot_core::planner::{compute_q_star, improvement_bits};
use keyrot_core::reference::{reported, Sm4Example};
use keyrot_core::{EcbcDenominator, FixedDecimal, Mode, Natural, PlanError, Rational};

use crate::units::parse_decimal;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub observed: String,
    pub expected: String,
}

fn exact(s: &str) -> Rational {
    parse_decimal(s).expect("reported constants are decimals")
}

fn within(observed: &Rational, expected: &Rational, tol: &Rational) -> bool {
    &observed.abs_diff(expected).0 <= tol
}

const DELTA_PRECISION: u32 = 9;

fn delta_check(
    name: &'static str,
    mode: Mode,
    ex: &Sm4Example,
    denominator: EcbcDenominator,
    q_star: &Natural,
    expected: &str,
) -> Result<Check, PlanError> {
    let params = ex.params().with_ecbc_denominator(denominator);
    let imp = improvement_bits(mode, &params, q_star, &Natural::from(2u64))?;
    let tol = FixedDecimal::from_rational(&exact("0.0001"), DELTA_PRECISION);
    let want = FixedDecimal::from_rational(&exact(expected), DELTA_PRECISION);
    Ok(Check {
        name,
        passed: (&imp.delta_bits - &want).abs() <= tol,
        observed: imp.delta_bits.to_string(),
        expected: format!("{expected} +/- 0.0001"),
    })
}

fn volume_check(name: &'static str, observed: Rational, expected: &str, unit: &str, tol: &Rational) -> Check {
    Check {
        name,
        passed: within(&observed, &exact(expected), tol),
        observed: format!("{} {unit}", FixedDecimal::from_rational(&observed, 3)),
        expected: format!("{expected} {unit} +/- 0.5 MB"),
    }
}

/// Runs every check. Parameter errors (for example an infeasible override)
/// are returned rather than reported as failed checks.
pub fn run_checks(ex: &Sm4Example) -> Result<Vec<Check>, PlanError> {
    let size = ex.file_size_bytes();
    let two_n = ex.params();
    let compat = two_n.clone().with_ecbc_denominator(EcbcDenominator::PaperCompatN);

    let ctr = compute_q_star(Mode::Ctr, &two_n, &size)?;
    let cbc = compute_q_star(Mode::Cbc, &two_n, &size)?;
    let ecbc_n = compute_q_star(Mode::EcbcMac, &compat, &size)?;
    let ecbc_2n = compute_q_star(Mode::EcbcMac, &two_n, &size)?;

    let mut checks = Vec::new();
    for (name, plan, want) in [
        ("ctr q_star", &ctr, reported::CTR_Q_STAR),
        ("cbc q_star", &cbc, reported::CBC_Q_STAR),
    ] {
        checks.push(Check {
            name,
            passed: plan.q_star == Natural::from(want),
            observed: plan.q_star.to_string(),
            expected: want.to_string(),
        });
    }

    // Within 0.05% of the reported value: |q - 174700| * 2000 <= 174700.
    let reported_ecbc = Natural::from(reported::ECBC_Q_STAR);
    let gap = Rational::from(ecbc_n.q_star.clone()).abs_diff(&Rational::from(reported_ecbc.clone())).0;
    checks.push(Check {
        name: "ecbc-mac q_star (n denominator)",
        passed: gap * Rational::from(2000u64) <= Rational::from(reported_ecbc),
        observed: ecbc_n.q_star.to_string(),
        expected: format!("{} +/- 0.05%", reported::ECBC_Q_STAR),
    });

    let eps = two_n.eps_max();
    let next = &ecbc_2n.q_star + 1u64;
    let maximal = advantage_bound(Mode::EcbcMac, &two_n, &ecbc_2n.q_star).value() <= eps
        && advantage_bound(Mode::EcbcMac, &two_n, &next).value() > eps;
    checks.push(Check {
        name: "ecbc-mac q_star (2n denominator) is maximal",
        passed: maximal,
        observed: ecbc_2n.q_star.to_string(),
        expected: "bound(q) <= eps_max < bound(q + 1)".into(),
    });

    checks.push(delta_check("ctr delta k=2", Mode::Ctr, ex, EcbcDenominator::TwoN, &ctr.q_star, reported::CTR_DELTA_K2)?);
    checks.push(delta_check("cbc delta k=2", Mode::Cbc, ex, EcbcDenominator::TwoN, &cbc.q_star, reported::CBC_DELTA_K2)?);
    checks.push(delta_check(
        "ecbc-mac delta k=2 (n denominator)",
        Mode::EcbcMac,
        ex,
        EcbcDenominator::PaperCompatN,
        &ecbc_n.q_star,
        reported::ECBC_DELTA_K2,
    )?);

    let half_mb = exact("0.5");
    checks.push(volume_check("ctr volume (KB)", ctr.data_volume().kib(), reported::CTR_VOLUME_KB, "KB", &exact("512")));
    checks.push(volume_check("ctr volume (MB)", ctr.data_volume().mib(), reported::CTR_VOLUME_MB, "MB", &half_mb));
    checks.push(volume_check("cbc volume (MB)", cbc.data_volume().mib(), reported::CBC_VOLUME_MB, "MB", &half_mb));
    checks.push(volume_check(
        "ecbc-mac volume (MB)",
        ecbc_n.data_volume().mib(),
        reported::ECBC_VOLUME_MB,
        "MB",
        &half_mb,
    ));
    Ok(checks)
}
