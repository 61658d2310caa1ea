//! Scalar types used by the exact and floating-point engines.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type ComplexRational = Complex<Rational>;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn crat(re: Rational, im: Rational) -> ComplexRational {
    Complex::new(re, im)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn to_c64(x: &ComplexRational) -> Complex64 {
    Complex64::new(to_f64(&x.re), to_f64(&x.im))
}

/// Exact square root of a non-negative rational, when it is rational.
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Field of amplitudes carried by Fock vectors and moment sums.
///
/// Implemented for exact rationals, exact complex rationals, `f64` and
/// `Complex64`. Real fields reject complex inputs with a nonzero imaginary part.
pub trait Amplitude:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(x: &Rational) -> Self;
    fn from_complex(x: &ComplexRational) -> Result<Self>;
    fn conj(&self) -> Self;
    fn to_complex64(&self) -> Complex64;
}

fn require_real(x: &ComplexRational) -> Result<()> {
    if x.im.is_zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!(
            "complex value {}+{}i used in a real-valued engine",
            x.re, x.im
        )))
    }
}

impl Amplitude for Rational {
    fn from_rational(x: &Rational) -> Self {
        x.clone()
    }
    fn from_complex(x: &ComplexRational) -> Result<Self> {
        require_real(x)?;
        Ok(x.re.clone())
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(to_f64(self), 0.0)
    }
}

impl Amplitude for ComplexRational {
    fn from_rational(x: &Rational) -> Self {
        Complex::new(x.clone(), Rational::zero())
    }
    fn from_complex(x: &ComplexRational) -> Result<Self> {
        Ok(x.clone())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_complex64(&self) -> Complex64 {
        to_c64(self)
    }
}

impl Amplitude for f64 {
    fn from_rational(x: &Rational) -> Self {
        to_f64(x)
    }
    fn from_complex(x: &ComplexRational) -> Result<Self> {
        require_real(x)?;
        Ok(to_f64(&x.re))
    }
    fn conj(&self) -> Self {
        *self
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Amplitude for Complex64 {
    fn from_rational(x: &Rational) -> Self {
        Complex64::new(to_f64(x), 0.0)
    }
    fn from_complex(x: &ComplexRational) -> Result<Self> {
        Ok(to_c64(x))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

/// JSON form of an exact rational: `{"num": .., "den": ..}`.
///
/// Numerator and denominator are emitted as integers when they fit in `i64`
/// and as decimal strings otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: serde_json::Value,
    pub den: serde_json::Value,
}

fn bigint_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(x.to_string()),
    }
}

fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::Parse(format!(
                    "floating-point value {n} where an exact integer is required"
                )))
            }
        }
        serde_json::Value::String(s) => s
            .trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer {s:?}: {e}"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

impl From<&Rational> for RationalRepr {
    fn from(x: &Rational) -> Self {
        RationalRepr {
            num: bigint_json(x.numer()),
            den: bigint_json(x.denom()),
        }
    }
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        let num = bigint_from_json(&self.num)?;
        let den = bigint_from_json(&self.den)?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational::new(num, den))
    }
}

pub fn rational_to_json(x: &Rational) -> serde_json::Value {
    serde_json::to_value(RationalRepr::from(x)).expect("rational serializes")
}

/// Parses `{"num":..,"den":..}`, a bare JSON integer, or a string `"a/b"`.
/// Floats are rejected: every exact-mode field must be rational.
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Object(_) => {
            let repr: RationalRepr = serde_json::from_value(v.clone())
                .map_err(|e| Error::Parse(format!("bad rational object: {e}")))?;
            repr.to_rational()
        }
        serde_json::Value::Number(_) => Ok(Rational::from_integer(bigint_from_json(v)?)),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = |e: String| Error::Parse(format!("bad rational {s:?}: {e}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let d: BigInt = d.trim().parse().map_err(|e| bad(format!("{e}")))?;
            if d.is_zero() {
                return Err(bad("zero denominator".into()));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            s.parse().map_err(|e| bad(format!("{e}")))?,
        )),
    }
}

pub fn complex_to_json(x: &ComplexRational) -> serde_json::Value {
    serde_json::json!({ "re": rational_to_json(&x.re), "im": rational_to_json(&x.im) })
}

/// Parses `{"re": r, "im": r}` or any plain rational form (imaginary part zero).
pub fn complex_from_json(v: &serde_json::Value) -> Result<ComplexRational> {
    if let serde_json::Value::Object(map) = v {
        if map.contains_key("re") || map.contains_key("im") {
            let part = |k: &str| {
                map.get(k)
                    .map(rational_from_json)
                    .unwrap_or_else(|| Ok(Rational::zero()))
            };
            return Ok(Complex::new(part("re")?, part("im")?));
        }
    }
    Ok(Complex::new(rational_from_json(v)?, Rational::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sqrt_of_squares_only() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&int(0)), Some(int(0)));
        assert_eq!(exact_sqrt(&int(2)), None);
        assert_eq!(exact_sqrt(&int(-4)), None);
    }

    #[test]
    fn rational_json_forms() {
        let v = serde_json::json!({"num": 6, "den": 4});
        assert_eq!(rational_from_json(&v).unwrap(), rat(3, 2));
        assert_eq!(rational_from_json(&serde_json::json!(5)).unwrap(), int(5));
        assert_eq!(
            rational_from_json(&serde_json::json!("-1/3")).unwrap(),
            rat(-1, 3)
        );
        assert!(rational_from_json(&serde_json::json!(0.5)).is_err());
        assert!(rational_from_json(&serde_json::json!({"num": 1, "den": 0})).is_err());
        let back = rational_to_json(&rat(-7, 3));
        assert_eq!(rational_from_json(&back).unwrap(), rat(-7, 3));
    }

    #[test]
    fn complex_json_forms() {
        let v = serde_json::json!({"re": 1, "im": {"num": -1, "den": 2}});
        assert_eq!(complex_from_json(&v).unwrap(), crat(int(1), rat(-1, 2)));
        assert_eq!(
            complex_from_json(&serde_json::json!(3)).unwrap(),
            crat(int(3), int(0))
        );
    }

    #[test]
    fn real_fields_reject_imaginary_parts() {
        let z = crat(int(1), int(1));
        assert!(<Rational as Amplitude>::from_complex(&z).is_err());
        assert!(<f64 as Amplitude>::from_complex(&z).is_err());
        assert_eq!(
            <ComplexRational as Amplitude>::from_complex(&z)
                .unwrap()
                .conj(),
            crat(int(1), int(-1))
        );
    }
}
