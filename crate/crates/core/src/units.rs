//! Fixed-point quantities used throughout the simulator.
//!
//! Currency is held in nano-units (`i128`) so that pool reserves, agent
//! balances and the mint/burn ledger add up exactly. Physiological levels,
//! recipe costs and labor time use milli-units (`i64`).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Nano-units per currency unit.
pub const MONEY_SCALE: i128 = 1_000_000_000;

/// An exact amount of currency.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(i128);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_nanos(nanos: i128) -> Self {
        Money(nanos)
    }

    pub const fn nanos(self) -> i128 {
        self.0
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units as i128 * MONEY_SCALE)
    }

    /// Rounds to the nearest nano-unit.
    pub fn from_f64(value: f64) -> Self {
        Money((value * MONEY_SCALE as f64).round() as i128)
    }

    pub fn to_f64(self) -> f64 {
        let whole = self.0 / MONEY_SCALE;
        let frac = self.0 % MONEY_SCALE;
        whole as f64 + frac as f64 / MONEY_SCALE as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    /// Parses the exact decimal form written by `Display`.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || frac.len() > 9 || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let whole: i128 = whole.parse().ok()?;
        let mut frac_nanos: i128 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        for _ in frac.len()..9 {
            frac_nanos *= 10;
        }
        let nanos = whole.checked_mul(MONEY_SCALE)?.checked_add(frac_nanos)?;
        Some(Money(if negative { -nanos } else { nanos }))
    }
}

/// Always nine fractional digits; the output round-trips through
/// [`Money::parse_decimal`].
impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = MONEY_SCALE as u128;
        write!(f, "{sign}{}.{:09}", abs / scale, abs % scale)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

/// Milli-units per level unit.
pub const LEVEL_SCALE: i64 = 1000;

/// A non-currency quantity with three decimal places: satiety, energy,
/// health, per-unit recipe costs and labor time in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Level(i64);

impl Level {
    pub const ZERO: Level = Level(0);

    pub const fn from_millis(millis: i64) -> Self {
        Level(millis)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub const fn from_units(units: i64) -> Self {
        Level(units * LEVEL_SCALE)
    }

    pub fn from_f64(value: f64) -> Self {
        Level((value * LEVEL_SCALE as f64).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / LEVEL_SCALE as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn clamp_to(self, lo: Level, hi: Level) -> Level {
        Level(self.0.clamp(lo.0, hi.0))
    }

    /// Whole multiples of `per_unit` that fit in `self`; `None` when
    /// `per_unit` is zero.
    pub fn whole_units(self, per_unit: Level) -> Option<u64> {
        if per_unit.0 <= 0 {
            return None;
        }
        Some((self.0.max(0) / per_unit.0) as u64)
    }

    pub fn times(self, n: u64) -> Level {
        Level(self.0 * n as i64)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:03}", abs / LEVEL_SCALE as u64, abs % LEVEL_SCALE as u64)
    }
}

impl Add for Level {
    type Output = Level;
    fn add(self, rhs: Level) -> Level {
        Level(self.0 + rhs.0)
    }
}

impl Sub for Level {
    type Output = Level;
    fn sub(self, rhs: Level) -> Level {
        Level(self.0 - rhs.0)
    }
}

impl AddAssign for Level {
    fn add_assign(&mut self, rhs: Level) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Level {
    fn sub_assign(&mut self, rhs: Level) {
        self.0 -= rhs.0;
    }
}

impl Neg for Level {
    type Output = Level;
    fn neg(self) -> Level {
        Level(-self.0)
    }
}

impl Mul<f64> for Level {
    type Output = Level;
    fn mul(self, rhs: f64) -> Level {
        Level((self.0 as f64 * rhs).round() as i64)
    }
}
