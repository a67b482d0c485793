//! Exponent bookkeeping: force scaling to energy scaling, and energy scaling to the order
//! of the displacement hierarchy.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// Scalar types exponents can be given in. Exact types make the bracket boundaries exact;
/// floating types snap `2 / (beta - 2)` to an integer within `1e-9` (relative) first.
pub trait Exponent: Copy + PartialOrd + Num + ToPrimitive + Debug + Display {
    fn from_usize(n: usize) -> Self;

    /// `ceil(self)` as an integer, `None` if not finite or too large.
    fn ceil_index(self) -> Option<usize>;
}

impl Exponent for f64 {
    fn from_usize(n: usize) -> Self {
        n as f64
    }

    fn ceil_index(self) -> Option<usize> {
        if !self.is_finite() || self > 1e15 {
            return None;
        }
        let r = self.round();
        let c = if (self - r).abs() <= 1e-9 * self.abs().max(1.0) { r } else { self.ceil() };
        Some(c.max(0.0) as usize)
    }
}

impl Exponent for Ratio<i64> {
    fn from_usize(n: usize) -> Self {
        Ratio::from_integer(n as i64)
    }

    fn ceil_index(self) -> Option<usize> {
        self.ceil().to_integer().try_into().ok()
    }
}

/// `beta = alpha` for `alpha <= 2`, `beta = 2 alpha - 2` beyond.
pub fn alpha_to_beta<B: Exponent>(alpha: B) -> Result<B> {
    let two = B::from_usize(2);
    if alpha < B::zero() {
        return Err(Error::NegativeAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(if alpha <= two { alpha } else { two * alpha - two })
}

/// `beta_i = 2 + 2 / (i - 1)`; `None` (infinity) for `i = 1`.
pub fn hierarchy_exponent<B: Exponent>(i: usize) -> Option<B> {
    let two = B::from_usize(2);
    (i > 1).then(|| two + two / B::from_usize(i - 1))
}

/// Hierarchy order `N` with `beta` in `[beta_{N+1}, beta_N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HierarchyBracket<B> {
    pub n: usize,
    /// `beta_{N+1}`.
    pub lower: B,
    /// `beta_N`; `None` stands for infinity.
    pub upper: Option<B>,
}

/// Smallest `N` with `beta >= 2 + 2/N`, i.e. `N = ceil(2 / (beta - 2))`.
pub fn order_for_scaling<B: Exponent>(beta: B) -> Result<HierarchyBracket<B>> {
    let two = B::from_usize(2);
    let out = || Error::OutOfRegime(beta.to_f64().unwrap_or(f64::NAN));
    if !(beta > two) {
        return Err(out());
    }
    let n = (two / (beta - two)).ceil_index().ok_or_else(out)?.max(1);
    Ok(HierarchyBracket {
        n,
        lower: hierarchy_exponent(n + 1).ok_or_else(out)?,
        upper: hierarchy_exponent(n),
    })
}

/// Parses `"8/3"`, `"3"` or `"2.5"` into an exact rational.
pub fn parse_exponent(s: &str) -> Result<Ratio<i64>> {
    let bad = || Error::Config(format!("cannot parse exponent {s:?}"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    if let Ok(i) = s.parse::<i64>() {
        return Ok(Ratio::from_integer(i));
    }
    let (int, frac) = s.split_once('.').ok_or_else(bad)?;
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let neg = int.trim_start().starts_with('-');
    let ip: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
    let fp: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = ip.abs() * den + fp;
    Ok(Ratio::new(if neg { -num } else { num }, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn hierarchy_orders() {
        for (beta, n) in [(r(4, 1), 1), (r(3, 1), 2), (r(8, 3), 3), (r(5, 2), 4)] {
            assert_eq!(order_for_scaling(beta).unwrap().n, n);
        }
        for (beta, n) in [(4.0, 1), (3.0, 2), (8.0 / 3.0, 3), (2.5, 4)] {
            assert_eq!(order_for_scaling(beta).unwrap().n, n);
        }
        let b = order_for_scaling(r(5, 2)).unwrap();
        assert_eq!((b.lower, b.upper), (r(5, 2), Some(r(8, 3))));
        let b = order_for_scaling(4.0).unwrap();
        assert_eq!((b.lower, b.upper), (4.0, None));
        assert_eq!(order_for_scaling(7.5).unwrap().n, 1);
        assert_eq!(order_for_scaling(3.5).unwrap().n, 2);
        assert!(matches!(order_for_scaling(2.0), Err(Error::OutOfRegime(_))));
        assert!(matches!(order_for_scaling(r(3, 2)), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn step_function_is_left_continuous() {
        // just above a boundary the order jumps back to the next bracket
        assert_eq!(order_for_scaling(r(3, 1) + r(1, 1_000_000)).unwrap().n, 2);
        assert_eq!(order_for_scaling(r(3, 1) - r(1, 1_000_000)).unwrap().n, 3);
        assert!(order_for_scaling(2.0 + 1e-6).unwrap().n >= 1_000_000);
    }

    #[test]
    fn force_scaling() {
        for (a, b) in [(1, 1), (2, 2), (3, 4), (0, 0)] {
            assert_eq!(alpha_to_beta(r(a, 1)).unwrap(), r(b, 1));
            assert_eq!(alpha_to_beta(a as f64).unwrap(), b as f64);
        }
        assert!(matches!(alpha_to_beta(-0.5), Err(Error::NegativeAlpha(_))));
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(parse_exponent("8/3").unwrap(), r(8, 3));
        assert_eq!(parse_exponent(" 4 ").unwrap(), r(4, 1));
        assert_eq!(parse_exponent("2.5").unwrap(), r(5, 2));
        assert_eq!(parse_exponent("-0.25").unwrap(), r(-1, 4));
        assert!(parse_exponent("x").is_err());
        assert!(parse_exponent("1/0").is_err());
    }
}
