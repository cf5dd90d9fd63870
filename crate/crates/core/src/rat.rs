//! Small helpers for exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `p` for integers, `p/q` otherwise.
pub fn format_rat(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p`, `-p`, `p/q`.
pub fn parse_rat(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("not a rational number: {s:?}");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn exact_int_root(n: &BigInt, r: u32) -> Option<BigInt> {
    let x = n.nth_root(r);
    (x.pow(r) == *n).then_some(x)
}

/// The real `r`-th root of `c` if it is rational (positive root for even `r`).
pub fn rational_root(c: &BigRational, r: u32) -> Option<BigRational> {
    if c.is_negative() {
        if r % 2 == 0 {
            return None;
        }
        return rational_root(&-c, r).map(|x| -x);
    }
    let p = exact_int_root(c.numer(), r)?;
    let q = exact_int_root(c.denom(), r)?;
    Some(BigRational::new(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        let c = BigRational::new(8.into(), 27.into());
        assert_eq!(rational_root(&c, 3), Some(BigRational::new(2.into(), 3.into())));
        assert_eq!(rational_root(&-c.clone(), 3), Some(BigRational::new((-2).into(), 3.into())));
        assert_eq!(rational_root(&BigRational::from_integer(2.into()), 2), None);
        assert_eq!(rational_root(&BigRational::from_integer((-4).into()), 2), None);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(format_rat(&parse_rat("-6/4").unwrap()), "-3/2");
        assert_eq!(format_rat(&parse_rat("5").unwrap()), "5");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
