use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A value that is either finite or the symbol `−∞`.
///
/// `ein(g)` takes the value `−∞` when every admissible `k < 0` works; this is
/// kept symbolic rather than encoded as `f64::NEG_INFINITY`. Serialises as the
/// string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    NegInfinity,
    Finite(T),
}

impl<T> Extended<T> {
    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, Extended::NegInfinity)
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::NegInfinity => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::NegInfinity => Extended::NegInfinity,
        }
    }
}

impl<T: PartialOrd> PartialOrd for Extended<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::NegInfinity, Extended::NegInfinity) => Some(Ordering::Equal),
            (Extended::NegInfinity, Extended::Finite(_)) => Some(Ordering::Less),
            (Extended::Finite(_), Extended::NegInfinity) => Some(Ordering::Greater),
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl Extended<f64> {
    /// Strict comparison `self < x` for a finite `x`.
    pub fn lt_f64(&self, x: f64) -> bool {
        match self {
            Extended::NegInfinity => true,
            Extended::Finite(v) => *v < x,
        }
    }

    /// Maps `f64::NEG_INFINITY` to the symbol.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            Extended::NegInfinity
        } else {
            Extended::Finite(x)
        }
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInfinity => f.write_str("-inf"),
            Extended::Finite(v) => v.fmt(f),
        }
    }
}

impl<T: Serialize> Serialize for Extended<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::NegInfinity => serializer.serialize_str("-inf"),
            Extended::Finite(v) => v.serialize(serializer),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_neg_infinity_first() {
        assert!(Extended::NegInfinity < Extended::Finite(-1e300));
        assert!(Extended::Finite(-3.0) < Extended::Finite(2.0));
        assert!(Extended::<f64>::NegInfinity.lt_f64(-1e300));
    }

    #[test]
    fn displays_symbol() {
        assert_eq!(Extended::<f64>::NegInfinity.to_string(), "-inf");
        assert_eq!(Extended::Finite(2.5).to_string(), "2.5");
    }
}
