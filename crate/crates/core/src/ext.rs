//! Extended reals: a finite `f64` or a dedicated `+inf` marker.
//!
//! Distances to empty sets and moduli over regions with no infeasible points
//! are genuinely infinite.  Keeping the marker out of the `f64` domain means
//! arithmetic never silently propagates an IEEE infinity into a report; the
//! serialized form is always the literal string `inf`.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Finite value, or `None` for `+inf`.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Minimum under the usual order where `+inf` dominates everything.
    pub fn min(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::PosInf, o) => o,
            (s, ExtReal::PosInf) => s,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.min(b)),
        }
    }

    /// Total order treating `+inf` as the top element.
    pub fn cmp_ext(self, other: ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => Ordering::Equal,
            (ExtReal::PosInf, _) => Ordering::Greater,
            (_, ExtReal::PosInf) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::Finite(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_serializes_as_inf() {
        assert_eq!(ExtReal::PosInf.to_string(), "inf");
        assert_eq!(ExtReal::Finite(0.5).to_string(), "0.5");
    }

    #[test]
    fn min_prefers_finite() {
        assert_eq!(ExtReal::PosInf.min(ExtReal::Finite(2.0)), ExtReal::Finite(2.0));
        assert_eq!(ExtReal::Finite(1.0).min(ExtReal::Finite(2.0)), ExtReal::Finite(1.0));
        assert_eq!(ExtReal::PosInf.min(ExtReal::PosInf), ExtReal::PosInf);
    }
}
