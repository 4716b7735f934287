use std::str::FromStr;

use keyrot_core::{Natural, Rational};

/// Parses an unsigned decimal such as `1.5` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational, String> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if (int.is_empty() && frac.is_empty()) || !ok(int) || !ok(frac) {
        return Err(format!("'{s}' is not a decimal number"));
    }
    let digits = format!("{int}{frac}");
    let numer = Natural::from_str(&digits).map_err(|e| e.to_string())?;
    let denom = Natural::from(10u64).pow(frac.len() as u32);
    Rational::new(numer, denom).map_err(|e| e.to_string())
}

/// Sizes like `1536`, `1536B`, `1.5KB`, `2MB`. Units are 1024-based and
/// case-insensitive; the result must be a whole number of bytes.
pub fn parse_file_size(s: &str) -> Result<Natural, String> {
    let t = s.trim();
    let split = t.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let shift = match unit.trim().to_ascii_uppercase().as_str() {
        "" | "B" => 0,
        "K" | "KB" | "KIB" => 10,
        "M" | "MB" | "MIB" => 20,
        "G" | "GB" | "GIB" => 30,
        other => return Err(format!("unknown size unit '{other}' (use B, KB, MB or GB)")),
    };
    let bytes = parse_decimal(num.trim())? * Rational::pow2(shift);
    if bytes.denom() != Natural::one() {
        return Err(format!("'{s}' is not a whole number of bytes"));
    }
    Ok(bytes.numer())
}

/// Parses `p/q`, an integer, or a decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    if t.contains('/') {
        Rational::from_str(t).map_err(|e| format!("'{s}': {e}"))
    } else {
        parse_decimal(t)
    }
}

/// Comma-separated positive integers; an empty string is an empty list.
pub fn parse_k_list(s: &str) -> Result<Vec<Natural>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| Natural::from_str(p).map_err(|_| format!("'{p}' is not a non-negative integer")))
        .collect()
}
