//! Hölder exponents, `ℓp` norms and norming functionals.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute tolerance used by comparisons throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on reciprocals when deciding whether two exponents coincide.
const EXPONENT_EQ_TOL: f64 = 1e-12;

/// A Hölder exponent `p ∈ [1, ∞]`.
///
/// `∞` is its own variant so that norm code never raises a float to an
/// infinite power. In serialized form it is the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);
    pub const INFINITY: Exponent = Exponent::Infinity;

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(Error::Domain("exponent is NaN".into()));
        }
        if p == f64::INFINITY {
            return Ok(Exponent::Infinity);
        }
        if p < 1.0 {
            return Err(Error::Domain(format!("exponent {p} is below 1")));
        }
        Ok(Exponent::Finite(p))
    }

    /// Builds the exponent whose reciprocal is `a ∈ [0, 1]`.
    pub fn from_reciprocal(a: f64) -> Result<Self> {
        if !(-EXPONENT_EQ_TOL..=1.0 + EXPONENT_EQ_TOL).contains(&a) {
            return Err(Error::Domain(format!("reciprocal exponent {a} outside [0, 1]")));
        }
        if a <= 0.0 {
            Ok(Exponent::Infinity)
        } else if a >= 1.0 {
            Ok(Exponent::ONE)
        } else {
            Ok(Exponent::Finite(1.0 / a))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// The value as a float; `∞` maps to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn is_one(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 1.0)
    }

    pub fn is_endpoint(self) -> bool {
        self.is_one() || self.is_infinite()
    }

    /// The conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn dual(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(snap_rational(p / (p - 1.0))),
        }
    }

    pub fn approx_eq(self, other: Exponent) -> bool {
        (self.reciprocal() - other.reciprocal()).abs() <= EXPONENT_EQ_TOL
    }

    /// Replaces the endpoints `1` and `∞` by `1 + eps` and `1/eps`.
    pub fn perturbed(self, eps: f64) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0 / eps),
            Exponent::Finite(p) if p == 1.0 => Exponent::Finite(1.0 + eps),
            other => other,
        }
    }
}

/// Rounds `x` to `num/den` (den ≤ 64) when it is within a few ulps of it,
/// so that conjugates of simple fractions such as 3/2 and 4/3 come out exact.
fn snap_rational(x: f64) -> f64 {
    for den in 1..=64u32 {
        let d = den as f64;
        let cand = (x * d).round() / d;
        if (x - cand).abs() <= 8.0 * f64::EPSILON * x {
            return cand;
        }
    }
    x
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Exponent::Infinity),
            _ => {}
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
            return Exponent::new(num / den);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
        Exponent::new(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExponentVisitor;

        impl Visitor<'_> for ExponentVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Exponent::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                Exponent::new(v as f64).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Exponent::new(v as f64).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExponentVisitor)
    }
}

/// `‖x‖_p`; `max |x_i|` when `p = ∞`.
pub fn lp_norm(x: &[f64], p: Exponent) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Dimension("norm of an empty vector".into()));
    }
    Ok(norm(x, p))
}

/// Unchecked variant of [`lp_norm`]; the empty vector has norm 0.
pub(crate) fn norm(x: &[f64], p: Exponent) -> f64 {
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) => {
            if max == 0.0 {
                return 0.0;
            }
            // scaling by the max keeps large p from overflowing
            let s: f64 = if p == 2.0 {
                x.iter().map(|v| (v / max) * (v / max)).sum()
            } else {
                x.iter().map(|v| (v.abs() / max).powf(p)).sum()
            };
            max * s.powf(1.0 / p)
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The norming functional of `x` in `ℓ_{p'}`: `⟨y, x⟩ = ‖x‖_p`, `‖y‖_{p'} = 1`.
///
/// At `p = ∞` the first maximizing coordinate is selected; at `p = 1` the
/// sign vector is returned.
pub fn duality_map(x: &[f64], p: Exponent) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Dimension("duality map of an empty vector".into()));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateInput("duality map of the zero vector".into()));
    }
    Ok(duality_map_unchecked(x, p))
}

/// Writes the norming functional of a (possibly zero) vector; zero maps to zero.
pub(crate) fn duality_map_unchecked(x: &[f64], p: Exponent) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    match p {
        Exponent::Infinity => {
            let mut best = 0.0;
            let mut arg = None;
            for (i, v) in x.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    arg = Some(i);
                }
            }
            if let Some(i) = arg {
                y[i] = x[i].signum();
            }
        }
        Exponent::Finite(q) if q == 1.0 => {
            for (yi, xi) in y.iter_mut().zip(x) {
                if *xi != 0.0 {
                    *yi = xi.signum();
                }
            }
        }
        Exponent::Finite(q) => {
            let nrm = norm(x, p);
            if nrm > 0.0 {
                for (yi, xi) in y.iter_mut().zip(x) {
                    if *xi != 0.0 {
                        *yi = xi.signum() * (xi.abs() / nrm).powf(q - 1.0);
                    }
                }
            }
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn norm_examples() {
        assert_eq!(lp_norm(&[3.0, 4.0], Exponent::TWO).unwrap(), 5.0);
        assert_eq!(lp_norm(&[1.0, -2.0, 0.0], Exponent::INFINITY).unwrap(), 2.0);
        for n in 1..6 {
            let ones = vec![1.0; n];
            for p in [1.0, 1.5, 2.0, 3.0, 7.25] {
                let v = lp_norm(&ones, Exponent::new(p).unwrap()).unwrap();
                assert!(close(v, (n as f64).powf(1.0 / p), 1e-12));
            }
        }
    }

    #[test]
    fn empty_vector_is_a_dimension_error() {
        assert!(matches!(lp_norm(&[], Exponent::TWO), Err(Error::Dimension(_))));
        assert!(matches!(duality_map(&[], Exponent::TWO), Err(Error::Dimension(_))));
    }

    #[test]
    fn dual_exponents() {
        assert_eq!(Exponent::TWO.dual(), Exponent::TWO);
        assert_eq!(Exponent::new(4.0 / 3.0).unwrap().dual(), Exponent::Finite(4.0));
        assert_eq!(Exponent::ONE.dual(), Exponent::INFINITY);
        assert_eq!(Exponent::INFINITY.dual(), Exponent::ONE);
        assert_eq!(Exponent::Finite(1.5).dual(), Exponent::Finite(3.0));
        assert_eq!(Exponent::Finite(3.0).dual().dual(), Exponent::Finite(3.0));
        for p in [1.01, 1.2, 1.7, 2.5, 9.0, 123.4] {
            let e = Exponent::new(p).unwrap();
            assert!(close(e.dual().dual().value(), p, 1e-12 * p));
            assert!(close(e.reciprocal() + e.dual().reciprocal(), 1.0, 1e-15));
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert_eq!("4/3".parse::<Exponent>().unwrap(), Exponent::Finite(4.0 / 3.0));
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
    }

    #[test]
    fn infinity_serializes_as_tag() {
        let s = serde_json::to_string(&vec![Exponent::INFINITY, Exponent::Finite(1.5)]).unwrap();
        assert_eq!(s, r#"["inf",1.5]"#);
        let back: Vec<Exponent> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Exponent::INFINITY, Exponent::Finite(1.5)]);
        let int: Exponent = serde_json::from_str("2").unwrap();
        assert_eq!(int, Exponent::TWO);
    }

    #[test]
    fn duality_map_examples() {
        let y = duality_map(&[3.0, 4.0], Exponent::TWO).unwrap();
        assert!(close(y[0], 0.6, 1e-15) && close(y[1], 0.8, 1e-15));
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let y = duality_map(&[1.0, 0.0], Exponent::new(p).unwrap()).unwrap();
            assert_eq!(y, vec![1.0, 0.0]);
        }
        // x = (1,1), p = 4: y_i = 2^{-3/4}, pairing 2^{1/4} = ||x||_4
        let p4 = Exponent::Finite(4.0);
        let y = duality_map(&[1.0, 1.0], p4).unwrap();
        let expect = 2f64.powf(-0.75);
        assert!(close(y[0], expect, 1e-15) && close(y[1], expect, 1e-15));
        assert!(close(dot(&y, &[1.0, 1.0]), 2f64.powf(0.25), 1e-14));
        assert!(close(lp_norm(&y, p4.dual()).unwrap(), 1.0, 1e-14));
    }

    #[test]
    fn duality_map_rejects_zero() {
        assert!(matches!(
            duality_map(&[0.0, 0.0], Exponent::TWO),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn endpoint_duality_selection() {
        let y = duality_map(&[1.0, -3.0, 3.0], Exponent::INFINITY).unwrap();
        assert_eq!(y, vec![0.0, -1.0, 0.0]);
        let y = duality_map(&[1.0, -3.0, 0.0], Exponent::ONE).unwrap();
        assert_eq!(y, vec![1.0, -1.0, 0.0]);
    }
}
