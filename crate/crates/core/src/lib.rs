//! Private information retrieval from MDS-coded databases with minimum
//! message size.
//!
//! Messages are stored across `n` databases with an `(n, t)` MDS code, so
//! any `t` databases recover everything. A user retrieves one of `k`
//! messages without any single database learning which, at the capacity
//! rate `(1 + t/n + ... + (t/n)^(k-1))^-1`, using messages of only
//! `lcm(n - t, t)` symbols.
//!
//! - [`scheme_a`]: key-indexed queries with pseudo symbols.
//! - [`scheme_b`]: clamped queries with lower upload cost, in a high-rate
//!   (product code) and a low-rate variant.
//! - [`scheme_k2`]: `k = 2` with message size `t`.
//! - [`analysis`]: exact verification of rate, privacy and structure.
//! - [`cluster`]: client/database simulation in-process or over TCP.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod field;
pub mod instance;
pub mod matrix;
pub mod mds;
pub mod params;
pub mod scheme;
pub mod scheme_a;
pub mod scheme_b;
pub mod scheme_k2;
pub mod wire;

pub use error::{Error, Result};
pub use field::{Field, Symbol};
pub use matrix::Matrix;
pub use mds::{encode_storage, MdsCode, MessageSet, Shard};
pub use params::{min_message_size, Regime, SchemeTag, SystemParams};
pub use scheme::key::RandomKey;
pub use scheme::{AnswerTerm, DecodingSets, Scheme};
pub use scheme_a::SchemeA;
pub use scheme_b::{BRegime, QueryMode, SchemeB};
pub use scheme_k2::SchemeK2;
pub use instance::{AnyScheme, SchemeChoice};


