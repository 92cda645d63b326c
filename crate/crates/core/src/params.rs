//! System parameters shared by every scheme.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, DEFAULT_ORDER};

/// Which retrieval construction a parameter set is sized for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    /// Key-indexed queries with pseudo symbols.
    A,
    /// Clamped queries; product code in the high-rate regime.
    B,
    /// Two messages, message size `t`, randomized database partition.
    K2,
}

impl std::fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchemeTag::A => "a",
            SchemeTag::B => "b",
            SchemeTag::K2 => "k2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `t > n - t`
    HighRate,
    /// `t < n - t`
    LowRate,
    /// `t = n - t`
    Both,
}

/// Validated `(n, t, k, q)` together with the derived quantities.
///
/// `n - t = p * r` and `t = p * s` with `p = gcd(n, t)`, so `r` and `s` are
/// coprime. Each message has `l = m * t` symbols split into `m` sub-messages
/// of `t` symbols each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub q: u32,
    pub p: usize,
    pub r: usize,
    pub s: usize,
    pub m: usize,
    pub l: usize,
    pub scheme: SchemeTag,
}

/// `lcm(n - t, t)`: the message size of the key-indexed constructions.
pub fn min_message_size(n: usize, t: usize) -> usize {
    assert!(0 < t && t < n, "min_message_size requires 0 < t < n");
    (n - t).lcm(&t)
}

impl SystemParams {
    pub fn derive(n: usize, t: usize, k: usize, q: u32, scheme: SchemeTag) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParams("t must be positive".into()));
        }
        if t >= n {
            return Err(Error::InvalidParams(format!("t = {t} must be smaller than n = {n}")));
        }
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if (q as usize) < n {
            return Err(Error::InvalidParams(format!("field order q = {q} is below n = {n}")));
        }
        if !Field::is_supported(q) {
            return Err(Error::InvalidParams(format!("field order q = {q} is not supported")));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidParams(format!("n = {n} exceeds the wire format limit")));
        }
        let p = n.gcd(&t);
        let r = (n - t) / p;
        let s = t / p;
        let (m, l) = match scheme {
            SchemeTag::A | SchemeTag::B => (r, r * t),
            SchemeTag::K2 => {
                if k != 2 {
                    return Err(Error::InvalidParams(format!("the k2 scheme needs k = 2, got {k}")));
                }
                if 2 * t < n {
                    return Err(Error::InvalidParams(format!(
                        "the k2 scheme needs 2t >= n, got t = {t}, n = {n}"
                    )));
                }
                (1, t)
            }
        };
        Ok(SystemParams { n, t, k, q, p, r, s, m, l, scheme })
    }

    /// Same as [`SystemParams::derive`] over the default field GF(256).
    pub fn new(n: usize, t: usize, k: usize, scheme: SchemeTag) -> Result<Self> {
        Self::derive(n, t, k, DEFAULT_ORDER, scheme)
    }

    pub fn regime(&self) -> Regime {
        use std::cmp::Ordering::*;
        match self.s.cmp(&self.r) {
            Greater => Regime::HighRate,
            Less => Regime::LowRate,
            Equal => Regime::Both,
        }
    }

    /// `r + s = n / p`, the modulus of the key alphabet.
    pub fn modulus(&self) -> usize {
        self.r + self.s
    }

    pub fn field(&self) -> Field {
        Field::new(self.q).expect("validated in derive")
    }
}
