//! Scalar arithmetic in two modes: exact rationals and fixed-precision big floats.
//!
//! Every value carries its mode. Combining an exact value with a real one is a
//! programming error: the `std::ops` impls panic, the `try_*` methods return
//! [`NumericError::ModeMismatch`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as IntSign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of significant decimal digits in big-float mode.
pub const DEFAULT_DIGITS: u32 = 50;

/// Environment variable overriding [`DEFAULT_DIGITS`].
pub const PRECISION_ENV: &str = "KRYLOV_PRECISION";

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("mode mismatch: cannot combine {left} with {right}")]
    ModeMismatch { left: Mode, right: Mode },
    #[error("{op} has no exact rational value for argument {arg}")]
    NotExact { op: &'static str, arg: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    NegativeSqrt(String),
    #[error("invalid number literal '{0}'")]
    Parse(String),
    #[error("precision must be at least 1 digit, got {0}")]
    InvalidPrecision(i64),
}

/// Arithmetic mode shared by all values in one computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[serde(rename = "bigreal")]
    BigReal {
        digits: u32,
    },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::BigReal { digits } => write!(f, "bigreal({digits} digits)"),
        }
    }
}

/// Precision from [`PRECISION_ENV`] if set and valid, otherwise [`DEFAULT_DIGITS`].
pub fn default_digits() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&d| d > 0)
        .unwrap_or(DEFAULT_DIGITS)
}

impl Mode {
    pub fn bigreal(digits: u32) -> Result<Mode, NumericError> {
        if digits == 0 {
            return Err(NumericError::InvalidPrecision(0));
        }
        Ok(Mode::BigReal { digits })
    }

    /// Big-float mode at [`default_digits`].
    pub fn default_bigreal() -> Mode {
        Mode::BigReal {
            digits: default_digits(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact)
    }

    pub fn digits(&self) -> Option<u32> {
        match self {
            Mode::Exact => None,
            Mode::BigReal { digits } => Some(*digits),
        }
    }

    pub fn zero(&self) -> Scalar {
        self.int(0)
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn int(&self, v: i64) -> Scalar {
        self.rational(&BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(&self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        self.rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(&self, r: &BigRational) -> Scalar {
        match self {
            Mode::Exact => Scalar::Exact(r.clone()),
            Mode::BigReal { digits } => Scalar::Real(Real::from_rational(r, *digits)),
        }
    }

    /// Parses `"p/q"`, an integer, or a decimal literal (optionally with exponent).
    pub fn parse(&self, s: &str) -> Result<Scalar, NumericError> {
        Ok(self.rational(&parse_rational(s)?))
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance::for_mode(*self)
    }

    /// `10^exp` in this mode.
    pub fn pow10(&self, exp: i32) -> Scalar {
        self.int(10).powi(exp)
    }
}

/// Parses a rational literal exactly: `"3"`, `"-1/4"`, `"0.125"`, `"1.5e-3"`.
pub fn parse_rational(s: &str) -> Result<BigRational, NumericError> {
    let t = s.trim();
    let bad = || NumericError::Parse(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

fn bits_for(digits: u32) -> usize {
    // log2(10) ~ 3.3219; one extra word of guard bits
    let b = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
    b.div_ceil(64) * 64
}

/// Big float tagged with its decimal precision.
#[derive(Clone, Debug)]
pub struct Real {
    value: BigFloat,
    digits: u32,
}

impl Real {
    fn new(value: BigFloat, digits: u32) -> Real {
        Real { value, digits }
    }

    fn bits(&self) -> usize {
        bits_for(self.digits)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn from_bigint(i: &BigInt, digits: u32) -> Real {
        let p = bits_for(digits);
        if i.is_zero() {
            return Real::new(BigFloat::from_word(0, p), digits);
        }
        let (sign, words) = i.to_u64_digits();
        let s = if sign == IntSign::Minus { Sign::Neg } else { Sign::Pos };
        let mut v = BigFloat::from_words(&words, s, (words.len() * 64) as i32);
        v.set_precision(p.max(words.len() * 64), RM)
            .expect("precision within limits");
        let one = BigFloat::from_word(1, p);
        Real::new(v.mul(&one, p, RM), digits)
    }

    pub fn from_rational(r: &BigRational, digits: u32) -> Real {
        let p = bits_for(digits);
        let n = Real::from_bigint(r.numer(), digits);
        if r.denom().is_one() {
            return n;
        }
        let d = Real::from_bigint(r.denom(), digits);
        Real::new(n.value.div(&d.value, p, RM), digits)
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }

    fn decimal_digits(&self) -> Option<(bool, Vec<u8>, i64)> {
        if self.value.is_zero() {
            return None;
        }
        let (s, m, e) = with_consts(|cc| self.value.convert_to_radix(Radix::Dec, RM, cc))
            .expect("finite value converts to decimal");
        Some((s == Sign::Neg, m, e as i64))
    }

    /// Rounds to `sig` significant decimal digits; returns sign, digits, and
    /// the exponent `e` such that the value is `0.d1d2... * 10^e`.
    fn rounded_digits(&self, sig: usize) -> Option<(bool, Vec<u8>, i64)> {
        let (neg, mut m, mut e) = self.decimal_digits()?;
        let lead = m.iter().take_while(|&&d| d == 0).count();
        m.drain(..lead);
        e -= lead as i64;
        if m.is_empty() {
            return None;
        }
        if m.len() > sig {
            let round_up = m[sig] >= 5;
            m.truncate(sig);
            if round_up {
                let mut i = sig;
                loop {
                    if i == 0 {
                        m.insert(0, 1);
                        m.pop();
                        e += 1;
                        break;
                    }
                    i -= 1;
                    if m[i] == 9 {
                        m[i] = 0;
                    } else {
                        m[i] += 1;
                        break;
                    }
                }
            }
        }
        while m.len() > 1 && *m.last().unwrap() == 0 {
            m.pop();
        }
        Some((neg, m, e))
    }

    pub fn to_f64(&self) -> f64 {
        match self.rounded_digits(20) {
            None => 0.0,
            Some((neg, m, e)) => {
                let s: String = m.iter().map(|d| char::from(b'0' + d)).collect();
                let v: f64 = format!("0.{s}e{e}").parse().unwrap_or(f64::NAN);
                if neg {
                    -v
                } else {
                    v
                }
            }
        }
    }

    fn format_sig(&self, sig: usize) -> String {
        let Some((neg, m, e)) = self.rounded_digits(sig) else {
            return "0".to_string();
        };
        let digits: String = m.iter().map(|d| char::from(b'0' + d)).collect();
        let sign = if neg { "-" } else { "" };
        // value = 0.digits * 10^e
        if (-5..=21).contains(&e) {
            if e <= 0 {
                format!("{sign}0.{}{digits}", "0".repeat((-e) as usize))
            } else if (e as usize) >= digits.len() {
                format!("{sign}{digits}{}", "0".repeat(e as usize - digits.len()))
            } else {
                let (a, b) = digits.split_at(e as usize);
                format!("{sign}{a}.{b}")
            }
        } else {
            let (a, b) = digits.split_at(1);
            let exp = e - 1;
            if b.is_empty() {
                format!("{sign}{a}e{exp}")
            } else {
                format!("{sign}{a}.{b}e{exp}")
            }
        }
    }
}

/// A number in either exact or big-float mode.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Real(Real),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Real(r) => Mode::BigReal { digits: r.digits },
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Real(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Real(r) => r.to_f64(),
        }
    }

    /// Converts into `mode`. Exact to big-float always succeeds; the reverse is an error.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar, NumericError> {
        match (self, mode) {
            (Scalar::Exact(r), m) => Ok(m.rational(r)),
            (Scalar::Real(r), Mode::BigReal { digits }) => {
                if digits == r.digits {
                    Ok(self.clone())
                } else {
                    let p = bits_for(digits);
                    let mut v = r.value.clone();
                    v.set_precision(p, RM).expect("precision within limits");
                    Ok(Scalar::Real(Real::new(v, digits)))
                }
            }
            (Scalar::Real(_), Mode::Exact) => Err(NumericError::ModeMismatch {
                left: self.mode(),
                right: Mode::Exact,
            }),
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Real(r) => r.value.is_zero(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Real(r) => {
                if r.value.is_zero() {
                    0
                } else if r.value.is_positive() {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Real(r) => Scalar::Real(Real::new(r.value.abs(), r.digits)),
        }
    }

    fn mismatch(&self, other: &Scalar) -> NumericError {
        NumericError::ModeMismatch {
            left: self.mode(),
            right: other.mode(),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar, NumericError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a + b)),
            (Scalar::Real(a), Scalar::Real(b)) => {
                let d = a.digits.max(b.digits);
                Ok(Scalar::Real(Real::new(a.value.add(&b.value, bits_for(d), RM), d)))
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar, NumericError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a - b)),
            (Scalar::Real(a), Scalar::Real(b)) => {
                let d = a.digits.max(b.digits);
                Ok(Scalar::Real(Real::new(a.value.sub(&b.value, bits_for(d), RM), d)))
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar, NumericError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a * b)),
            (Scalar::Real(a), Scalar::Real(b)) => {
                let d = a.digits.max(b.digits);
                Ok(Scalar::Real(Real::new(a.value.mul(&b.value, bits_for(d), RM), d)))
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar, NumericError> {
        if other.is_exact_zero() {
            return Err(NumericError::DivisionByZero);
        }
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a / b)),
            (Scalar::Real(a), Scalar::Real(b)) => {
                let d = a.digits.max(b.digits);
                Ok(Scalar::Real(Real::new(a.value.div(&b.value, bits_for(d), RM), d)))
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn recip(&self) -> Result<Scalar, NumericError> {
        self.mode().one().try_div(self)
    }

    /// Integer power; negative exponents invert. `0^0 = 1`.
    pub fn powi(&self, n: i32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(num_traits::pow(r.clone(), n.unsigned_abs() as usize)).inverted_if(n < 0),
            Scalar::Real(r) => {
                let v = r.value.powi(n.unsigned_abs() as usize, r.bits(), RM);
                Scalar::Real(Real::new(v, r.digits)).inverted_if(n < 0)
            }
        }
    }

    fn inverted_if(self, invert: bool) -> Scalar {
        if invert {
            self.recip().expect("negative power of zero")
        } else {
            self
        }
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    /// Square root. Exact mode succeeds only on perfect squares of rationals.
    pub fn sqrt(&self) -> Result<Scalar, NumericError> {
        if self.is_negative() {
            return Err(NumericError::NegativeSqrt(self.to_string()));
        }
        match self {
            Scalar::Exact(r) => {
                let n = exact_isqrt(r.numer());
                let d = exact_isqrt(r.denom());
                match (n, d) {
                    (Some(n), Some(d)) => Ok(Scalar::Exact(BigRational::new(n, d))),
                    _ => Err(NumericError::NotExact {
                        op: "sqrt",
                        arg: self.to_string(),
                    }),
                }
            }
            Scalar::Real(r) => Ok(Scalar::Real(Real::new(r.value.sqrt(r.bits(), RM), r.digits))),
        }
    }

    fn transcendental(
        &self,
        op: &'static str,
        trivial: impl FnOnce(&BigRational) -> Option<BigRational>,
        f: impl FnOnce(&BigFloat, usize, &mut Consts) -> BigFloat,
    ) -> Result<Scalar, NumericError> {
        match self {
            Scalar::Exact(r) => trivial(r).map(Scalar::Exact).ok_or(NumericError::NotExact {
                op,
                arg: self.to_string(),
            }),
            Scalar::Real(r) => {
                let v = with_consts(|cc| f(&r.value, r.bits(), cc));
                Ok(Scalar::Real(Real::new(v, r.digits)))
            }
        }
    }

    pub fn exp(&self) -> Result<Scalar, NumericError> {
        self.transcendental(
            "exp",
            |r| r.is_zero().then(BigRational::one),
            |v, p, cc| v.exp(p, RM, cc),
        )
    }

    pub fn ln(&self) -> Result<Scalar, NumericError> {
        if !self.is_positive() {
            return Err(NumericError::NotExact {
                op: "ln",
                arg: self.to_string(),
            });
        }
        self.transcendental("ln", |r| r.is_one().then(BigRational::zero), |v, p, cc| v.ln(p, RM, cc))
    }

    pub fn sin(&self) -> Result<Scalar, NumericError> {
        self.transcendental(
            "sin",
            |r| r.is_zero().then(BigRational::zero),
            |v, p, cc| v.sin(p, RM, cc),
        )
    }

    pub fn cos(&self) -> Result<Scalar, NumericError> {
        self.transcendental(
            "cos",
            |r| r.is_zero().then(BigRational::one),
            |v, p, cc| v.cos(p, RM, cc),
        )
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Rendering at `sig` significant digits (exact values stay `p/q`).
    pub fn to_string_sig(&self, sig: usize) -> String {
        match self {
            Scalar::Exact(r) => format_rational(r),
            Scalar::Real(r) => r.format_sig(sig.max(1)),
        }
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Real(r) => f.write_str(&r.format_sig(r.digits as usize)),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    /// `None` across modes.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            (Scalar::Real(a), Scalar::Real(b)) => a.value.cmp(&b.value).map(|c| c.cmp(&0)),
            _ => None,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Real(r) => Scalar::Real(Real::new(BigFloat::neg(&r.value), r.digits)),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Sum of scalars in `mode`; zero for an empty iterator.
pub fn sum<'a>(mode: Mode, it: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
    it.into_iter().fold(mode.zero(), |acc, x| acc + x)
}

/// Comparison thresholds. Both are exactly zero in exact mode.
#[derive(Clone, Debug)]
pub struct Tolerance {
    pub zero_eps: Scalar,
    pub rel_eps: Scalar,
}

impl Tolerance {
    /// `10^(-digits+10)` for both thresholds in big-float mode.
    pub fn for_mode(mode: Mode) -> Tolerance {
        match mode {
            Mode::Exact => Tolerance {
                zero_eps: mode.zero(),
                rel_eps: mode.zero(),
            },
            Mode::BigReal { digits } => {
                let eps = mode.pow10(-(digits as i32) + 10);
                Tolerance {
                    zero_eps: eps.clone(),
                    rel_eps: eps,
                }
            }
        }
    }

    pub fn with_zero_eps(mut self, eps: Scalar) -> Tolerance {
        self.zero_eps = eps;
        self
    }

    pub fn is_zero(&self, x: &Scalar) -> bool {
        if self.zero_eps.is_exact_zero() {
            x.is_exact_zero()
        } else {
            x.abs() <= self.zero_eps
        }
    }

    /// `|a-b| <= zero_eps + rel_eps * max(|a|,|b|)`; equality in exact mode.
    pub fn approx_eq(&self, a: &Scalar, b: &Scalar) -> bool {
        let diff = (a - b).abs();
        if self.zero_eps.is_exact_zero() && self.rel_eps.is_exact_zero() {
            return diff.is_exact_zero();
        }
        diff <= &self.zero_eps + &self.rel_eps * a.abs().max(&b.abs())
    }
}

/// Complex number over [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Scalar,
    pub im: Scalar,
}

impl Complex {
    pub fn new(re: Scalar, im: Scalar) -> Complex {
        Complex { re, im }
    }

    pub fn real(re: Scalar) -> Complex {
        let im = re.mode().zero();
        Complex { re, im }
    }

    pub fn zero(mode: Mode) -> Complex {
        Complex::real(mode.zero())
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Scalar) -> Result<Complex, NumericError> {
        Ok(Complex::new(theta.cos()?, theta.sin()?))
    }

    /// `i^k` for integer `k`.
    pub fn i_pow(mode: Mode, k: i64) -> Complex {
        let (re, im) = match k.rem_euclid(4) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        Complex::new(mode.int(re), mode.int(im))
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn add(&self, o: &Complex) -> Complex {
        Complex::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        Complex::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        Complex::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    pub fn scale(&self, s: &Scalar) -> Complex {
        Complex::new(&self.re * s, &self.im * s)
    }

    pub fn div(&self, o: &Complex) -> Result<Complex, NumericError> {
        let den = o.norm_sqr();
        let num = self.mul(&o.conj());
        Ok(Complex::new(num.re.try_div(&den)?, num.im.try_div(&den)?))
    }

    pub fn norm_sqr(&self) -> Scalar {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> Result<Scalar, NumericError> {
        self.norm_sqr().sqrt()
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Mode::Exact.ratio(n, d)
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(
            parse_rational("-1.5e-3").unwrap(),
            BigRational::new((-3).into(), 2000.into())
        );
        assert_eq!(parse_rational("2e2").unwrap(), BigRational::from_integer(200.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn exact_arithmetic() {
        assert_eq!(r(1, 3) + r(1, 6), r(1, 2));
        assert_eq!(r(1, 2).powi(-3), r(8, 1));
        assert_eq!(r(9, 4).sqrt().unwrap(), r(3, 2));
        assert!(matches!(r(2, 1).sqrt(), Err(NumericError::NotExact { .. })));
        assert_eq!(r(1, 2).to_string(), "1/2");
        assert_eq!(r(-4, 2).to_string(), "-2");
    }

    #[test]
    fn exp_minus_one_matches_series() {
        let m = Mode::bigreal(50).unwrap();
        let got = m.int(-1).exp().unwrap();
        // Taylor series of e^{-1} in exact rationals, truncated far beyond 50 digits
        let mut term = BigRational::one();
        let mut acc = BigRational::one();
        for k in 1..80 {
            term = -term / BigRational::from_integer(BigInt::from(k));
            acc += &term;
        }
        let oracle = m.rational(&acc);
        assert!((got - oracle).abs() < m.pow10(-48));
    }

    #[test]
    fn transcendental_exact_only_for_trivial_arguments() {
        assert_eq!(Mode::Exact.zero().exp().unwrap(), r(1, 1));
        assert_eq!(Mode::Exact.one().ln().unwrap(), r(0, 1));
        assert!(r(1, 2).exp().is_err());
        assert!(r(1, 2).sin().is_err());
    }

    #[test]
    fn tolerance_is_zero() {
        let m = Mode::bigreal(50).unwrap();
        let tol = m.tolerance();
        assert!(tol.is_zero(&m.pow10(-45)));
        assert!(!tol.is_zero(&m.pow10(-30)));
        let exact = Mode::Exact.tolerance();
        assert!(exact.is_zero(&r(0, 1)));
        assert!(!exact.is_zero(&r(1, 1_000_000_000)));
    }

    #[test]
    #[should_panic(expected = "mode mismatch")]
    fn mixing_modes_panics() {
        let _ = r(1, 2) + Mode::bigreal(30).unwrap().one();
    }

    #[test]
    fn try_ops_report_mismatch() {
        let e = r(1, 2).try_mul(&Mode::bigreal(30).unwrap().one()).unwrap_err();
        assert!(matches!(e, NumericError::ModeMismatch { .. }));
    }

    #[test]
    fn formatting_rounds_to_digits() {
        let m = Mode::bigreal(10).unwrap();
        assert_eq!(m.ratio(1, 3).to_string(), "0.3333333333");
        assert_eq!(m.ratio(2, 3).to_string(), "0.6666666667");
        assert_eq!(m.ratio(1, 2).to_string(), "0.5");
        assert_eq!(m.int(-12).to_string(), "-12");
        assert_eq!(m.pow10(-30).to_string(), "1e-30");
        assert_eq!(m.ratio(-123, 100_000_000).to_string(), "-0.00000123");
        assert_eq!(m.zero().to_string(), "0");
        let big = m.int(10).powi(25) * m.ratio(3, 2);
        assert_eq!(big.to_string(), "1.5e25");
    }

    #[test]
    fn big_integer_conversion_is_exact() {
        let m = Mode::bigreal(60).unwrap();
        let n = BigInt::from_str("123456789012345678901234567890123456789").unwrap();
        let x = m.rational(&BigRational::from_integer(n));
        assert_eq!(x.to_string(), "1.23456789012345678901234567890123456789e38");
    }

    #[test]
    fn precision_env_default() {
        assert!(default_digits() > 0);
    }

    #[test]
    fn complex_ops() {
        let m = Mode::Exact;
        let i = Complex::i_pow(m, 1);
        assert_eq!(i.mul(&i), Complex::real(m.int(-1)));
        assert_eq!(Complex::i_pow(m, -1), Complex::new(m.zero(), m.int(-1)));
        let z = Complex::new(r(3, 1), r(4, 1));
        assert_eq!(z.abs().unwrap(), r(5, 1));
        assert_eq!(z.div(&z).unwrap(), Complex::real(m.one()));
    }

    fn small_rational() -> impl Strategy<Value = Scalar> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_rational(), b in small_rational(), c in small_rational()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            if !b.is_exact_zero() {
                prop_assert_eq!((&a / &b) * &b, a.clone());
            }
        }

        #[test]
        fn real_mode_tracks_exact(a in small_rational(), b in small_rational()) {
            let m = Mode::bigreal(40).unwrap();
            let tol = m.tolerance();
            let ar = a.to_mode(m).unwrap();
            let br = b.to_mode(m).unwrap();
            prop_assert!(tol.approx_eq(&(&ar * &br), &(&a * &b).to_mode(m).unwrap()));
            prop_assert!(tol.approx_eq(&(&ar - &br), &(&a - &b).to_mode(m).unwrap()));
            if !b.is_exact_zero() {
                prop_assert!(tol.approx_eq(&(&ar / &br), &(&a / &b).to_mode(m).unwrap()));
            }
        }

        #[test]
        fn sqrt_of_square(n in 0i64..10_000, d in 1i64..1000) {
            let x = r(n, d);
            prop_assert_eq!(x.square().sqrt().unwrap(), x);
        }
    }
}
