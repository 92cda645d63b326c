//! A scheme chosen at run time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{SchemeTag, SystemParams};
use crate::scheme::Scheme;
use crate::scheme_a::SchemeA;
use crate::scheme_b::{BRegime, QueryMode, SchemeB};
use crate::scheme_k2::SchemeK2;

/// What the user asked for. `Auto` picks A when `r = 1` and B otherwise;
/// `B` picks the regime from `(r, s)`, preferring high rate when `r = s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    A,
    B,
    BHigh,
    BLow,
    K2,
    Auto,
}

impl std::str::FromStr for SchemeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => SchemeChoice::A,
            "b" => SchemeChoice::B,
            "b-high" => SchemeChoice::BHigh,
            "b-low" => SchemeChoice::BLow,
            "k2" => SchemeChoice::K2,
            "auto" => SchemeChoice::Auto,
            other => return Err(Error::InvalidParams(format!("unknown scheme {other:?}"))),
        })
    }
}

#[derive(Clone, Debug)]
pub enum AnyScheme {
    A(SchemeA),
    B(SchemeB),
    K2(SchemeK2),
}

/// Runs `$body` with `$s` bound to the concrete scheme.
macro_rules! dispatch {
    ($inst:expr, $s:ident => $body:expr) => {
        match $inst {
            $crate::instance::AnyScheme::A($s) => $body,
            $crate::instance::AnyScheme::B($s) => $body,
            $crate::instance::AnyScheme::K2($s) => $body,
        }
    };
}
pub(crate) use dispatch;

impl AnyScheme {
    pub fn build(n: usize, t: usize, k: usize, q: u32, choice: SchemeChoice) -> Result<Self> {
        let tag = match choice {
            SchemeChoice::A => SchemeTag::A,
            SchemeChoice::K2 => SchemeTag::K2,
            SchemeChoice::B | SchemeChoice::BHigh | SchemeChoice::BLow => SchemeTag::B,
            SchemeChoice::Auto => {
                let probe = SystemParams::derive(n, t, k, q, SchemeTag::A)?;
                if probe.r == 1 {
                    SchemeTag::A
                } else {
                    SchemeTag::B
                }
            }
        };
        let params = SystemParams::derive(n, t, k, q, tag)?;
        Ok(match (tag, choice) {
            (SchemeTag::A, _) => AnyScheme::A(SchemeA::with_vandermonde(params)?),
            (SchemeTag::K2, _) => AnyScheme::K2(SchemeK2::with_vandermonde(params)?),
            (SchemeTag::B, SchemeChoice::BHigh | SchemeChoice::BLow) => {
                let regime = if choice == SchemeChoice::BHigh { BRegime::High } else { BRegime::Low };
                let code = crate::mds::MdsCode::build_vandermonde(t, n, &params.field())?;
                AnyScheme::B(SchemeB::with_regime(params, code, regime)?)
            }
            (SchemeTag::B, _) => AnyScheme::B(SchemeB::with_vandermonde(params)?),
        })
    }

    /// Switches a Construction-B instance to un-clamped queries.
    pub fn with_query_mode(self, mode: QueryMode) -> Self {
        match self {
            AnyScheme::B(b) => AnyScheme::B(b.with_mode(mode)),
            other => other,
        }
    }

    pub fn params(&self) -> &SystemParams {
        dispatch!(self, s => s.params())
    }

    pub fn name(&self) -> String {
        dispatch!(self, s => s.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_choice() {
        assert_eq!(AnyScheme::build(3, 2, 3, 256, SchemeChoice::Auto).unwrap().name(), "a");
        assert_eq!(AnyScheme::build(5, 3, 4, 256, SchemeChoice::Auto).unwrap().name(), "b-high");
        assert_eq!(AnyScheme::build(5, 2, 4, 256, SchemeChoice::Auto).unwrap().name(), "b-low");
        assert_eq!(AnyScheme::build(4, 2, 3, 256, SchemeChoice::Auto).unwrap().name(), "a");
        assert_eq!(AnyScheme::build(3, 2, 2, 256, SchemeChoice::K2).unwrap().name(), "k2");
    }

    #[test]
    fn explicit_regimes() {
        assert_eq!(AnyScheme::build(6, 3, 2, 256, SchemeChoice::BLow).unwrap().name(), "b-low");
        assert_eq!(AnyScheme::build(6, 3, 2, 256, SchemeChoice::BHigh).unwrap().name(), "b-high");
        assert!(AnyScheme::build(5, 3, 2, 256, SchemeChoice::BLow).is_err());
        assert!("c".parse::<SchemeChoice>().is_err());
    }
}
