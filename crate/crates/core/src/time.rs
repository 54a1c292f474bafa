//! Fixed-point simulation time.
//!
//! Every instant and duration in the toolkit is a whole number of
//! microseconds. Path weights are sums of window-start differences and
//! transmission times, and the local detector compares reception times for
//! exact equality, so floating point is only used at the file boundary.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const MICROS_PER_SEC: i64 = 1_000_000;

/// An instant or a duration, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    pub const MAX: Time = Time(i64::MAX);

    pub const fn from_micros(us: i64) -> Self {
        Time(us)
    }

    pub const fn from_secs(s: i64) -> Self {
        Time(s * MICROS_PER_SEC)
    }

    /// Rounds to the nearest microsecond. Returns `None` for non-finite or
    /// out-of-range input.
    pub fn from_secs_f64(s: f64) -> Option<Self> {
        if !s.is_finite() {
            return None;
        }
        let us = (s * MICROS_PER_SEC as f64).round();
        if us.abs() > 9.0e15 {
            return None;
        }
        Some(Time(us as i64))
    }

    pub const fn as_micros(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC as f64
    }

    pub fn is_whole_second(self) -> bool {
        self.0 % MICROS_PER_SEC == 0
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        self.0 += rhs.0;
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl Mul<i64> for Time {
    type Output = Time;
    fn mul(self, rhs: i64) -> Time {
        Time(self.0 * rhs)
    }
}

impl std::iter::Sum for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::ZERO, Add::add)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / MICROS_PER_SEC as u64;
        let frac = abs % MICROS_PER_SEC as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_whole_second() {
            serializer.serialize_i64(self.0 / MICROS_PER_SEC)
        } else {
            serializer.serialize_f64(self.as_secs_f64())
        }
    }
}

struct SecondsVisitor;

impl<'de> Visitor<'de> for SecondsVisitor {
    type Value = Time;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a time in decimal seconds")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Time, E> {
        v.checked_mul(MICROS_PER_SEC)
            .map(Time)
            .ok_or_else(|| E::custom("time out of range"))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Time, E> {
        i64::try_from(v)
            .map_err(|_| E::custom("time out of range"))
            .and_then(|v| self.visit_i64(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Time, E> {
        Time::from_secs_f64(v).ok_or_else(|| E::custom("time must be a finite number of seconds"))
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Time, D::Error> {
        deserializer.deserialize_any(SecondsVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_trims_fraction() {
        assert_eq!(Time::from_secs(25).to_string(), "25");
        assert_eq!(Time::from_micros(1_500_000).to_string(), "1.5");
        assert_eq!(Time::from_micros(-250).to_string(), "-0.00025");
    }

    #[test]
    fn serde_uses_seconds() {
        let t: Time = serde_json::from_str("12.345678").unwrap();
        assert_eq!(t.as_micros(), 12_345_678);
        assert_eq!(serde_json::to_string(&t).unwrap(), "12.345678");
        assert_eq!(serde_json::to_string(&Time::from_secs(5)).unwrap(), "5");
        assert!(serde_json::from_str::<Time>("\"5\"").is_err());
    }
}
