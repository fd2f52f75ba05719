use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use ptwell_core::Rational;

/// Fractional digits accepted for an exact decimal; beyond this the rational
/// shape parameters can overflow `i128`.
const MAX_EXACT_DIGITS: usize = 12;

/// A coupling as typed on the command line: `0.25`, `-1/3`, `2e-3`.
/// Plain decimals and fractions also carry an exact rational value.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingArg {
    pub text: String,
    pub value: f64,
    pub exact: Option<Rational>,
}

impl fmt::Display for CouplingArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_fraction(s: &str) -> Option<Rational> {
    let (p, q) = s.split_once('/')?;
    let p: i128 = p.trim().parse().ok()?;
    let q: i128 = q.trim().parse().ok()?;
    (q != 0).then(|| Rational::new(p, q))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > MAX_EXACT_DIGITS
    {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let denom = 10_i128.checked_pow(frac.len() as u32)?;
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl FromStr for CouplingArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim().to_string();
        if let Some(r) = parse_fraction(&text) {
            return Ok(Self {
                value: to_f64(&r),
                text,
                exact: Some(r),
            });
        }
        let value: f64 = text
            .parse()
            .map_err(|_| format!("'{text}' is neither a number nor a fraction p/q"))?;
        if !value.is_finite() {
            return Err(format!("coupling must be finite, got '{text}'"));
        }
        Ok(Self {
            exact: parse_decimal(&text),
            value,
            text,
        })
    }
}

impl CouplingArg {
    /// The rational value, if its numerator and denominator are small enough
    /// for the exact commutator to stay within `i128`.
    pub fn exact_small(&self) -> Option<Rational> {
        self.exact
            .filter(|r| r.denom().abs() <= 1_000_000 && r.numer().abs() <= 1_000_000_000)
    }

    pub fn is_pole(&self) -> bool {
        match &self.exact {
            Some(r) => *r + Rational::one() == Rational::zero(),
            None => self.value == -1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let c: CouplingArg = "0.3".parse().unwrap();
        assert_eq!(c.exact, Some(Rational::new(3, 10)));
        assert_eq!(c.value, 0.3);
        let c: CouplingArg = "-.5".parse().unwrap();
        assert_eq!(c.exact, Some(Rational::new(-1, 2)));
        let c: CouplingArg = "2".parse().unwrap();
        assert_eq!(c.exact, Some(Rational::from_integer(2)));
    }

    #[test]
    fn fractions() {
        let c: CouplingArg = "-1/3".parse().unwrap();
        assert_eq!(c.exact, Some(Rational::new(-1, 3)));
        assert!((c.value + 1.0 / 3.0).abs() < 1e-16);
        assert!("1/0".parse::<CouplingArg>().is_err());
    }

    #[test]
    fn scientific_has_no_exact_form() {
        let c: CouplingArg = "1e-3".parse().unwrap();
        assert_eq!(c.value, 1e-3);
        assert_eq!(c.exact, None);
        let long: CouplingArg = "0.1234567890123".parse().unwrap();
        assert_eq!(long.exact, None);
    }

    #[test]
    fn rejects_garbage() {
        assert!("abc".parse::<CouplingArg>().is_err());
        assert!("inf".parse::<CouplingArg>().is_err());
        assert!("NaN".parse::<CouplingArg>().is_err());
    }

    #[test]
    fn pole_detection() {
        assert!("-1".parse::<CouplingArg>().unwrap().is_pole());
        assert!("-2/2".parse::<CouplingArg>().unwrap().is_pole());
        assert!(!"1".parse::<CouplingArg>().unwrap().is_pole());
    }
}
