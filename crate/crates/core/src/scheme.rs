//! The interface shared by every retrieval scheme.
//!
//! A scheme fixes how the user turns a requested index plus private
//! randomness into one query per database, how a database answers a query
//! from its shard, and how the user reconstructs the message from the
//! answers. The analysis and cluster modules are generic over it.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::mds::{MdsCode, Shard};
use crate::params::SystemParams;

/// One term of a symbolic answer: symbol `index` of message `message` at the
/// answering database. What `index` refers to depends on the scheme (a
/// sub-message code symbol `V^{k,m}_n`, or a column-code symbol).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnswerTerm {
    pub message: usize,
    pub index: usize,
}

/// One intermediate answer position: `None` when it is constantly zero and
/// therefore not sent, otherwise the sum of the listed terms.
pub type SymbolicComponent = Option<Vec<AnswerTerm>>;

pub trait Scheme: Send + Sync {
    /// Private randomness held by the user (a key, or a partition).
    type Randomness: Clone + Debug + Serialize;
    /// What a single database receives.
    type Query: Clone + Debug + PartialEq + Eq + Hash + Ord + Serialize;

    fn params(&self) -> &SystemParams;

    /// The base `(n, t)` storage code.
    fn code(&self) -> &MdsCode;

    /// Short label for reports.
    fn name(&self) -> String;

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Randomness;

    /// The full randomness space with exact probabilities summing to one.
    fn enumerate_randomness(&self) -> Result<Vec<(Self::Randomness, BigRational)>>;

    fn queries(&self, k_star: usize, randomness: &Self::Randomness) -> Result<Vec<Self::Query>>;

    /// Number of symbols the answer to `query` carries at database `db`.
    fn answer_length(&self, db: usize, query: &Self::Query) -> usize;

    fn answer(&self, shard: &Shard, query: &Self::Query) -> Result<Vec<Symbol>>;

    fn reconstruct(
        &self,
        k_star: usize,
        randomness: &Self::Randomness,
        answers: &[Vec<Symbol>],
    ) -> Result<Vec<Symbol>>;

    fn encode_query(&self, query: &Self::Query) -> Vec<u8>;

    fn decode_query(&self, db: usize, bytes: &[u8]) -> Result<Self::Query>;
}

/// Uniform probability `1 / count`.
pub(crate) fn uniform(count: usize) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(count))
}

pub(crate) fn check_k_star(params: &SystemParams, k_star: usize) -> Result<()> {
    if k_star >= params.k {
        return Err(Error::IndexOutOfRange { index: k_star, bound: params.k });
    }
    Ok(())
}

pub(crate) fn check_answer_count(params: &SystemParams, answers: &[Vec<Symbol>]) -> Result<()> {
    if answers.len() != params.n {
        return Err(Error::MalformedTranscript(format!(
            "{} answers for {} databases",
            answers.len(),
            params.n
        )));
    }
    Ok(())
}

/// Checks one answer against the length its query implies.
pub(crate) fn check_answer_len(db: usize, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::MalformedTranscript(format!(
            "database {db} sent {got} symbols, query implies {expected}"
        )));
    }
    Ok(())
}

/// Decodes with exactly `t` points, as the decoding sets guarantee.
pub(crate) fn decode_exact(code: &MdsCode, what: &str, points: &[(usize, Symbol)]) -> Result<Vec<Symbol>> {
    if points.len() != code.dimension() {
        return Err(Error::MalformedTranscript(format!(
            "{what} has {} members, expected {}",
            points.len(),
            code.dimension()
        )));
    }
    code.decode_any_t(points)
}

/// Interference and usable database sets of the cancellation decoder.
///
/// `interference[i]` holds the databases whose component `i` carries no
/// contribution of the requested message; `usable[m]` holds the databases
/// that expose a code symbol of requested sub-message `m` after cancellation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodingSets {
    pub interference: Vec<Vec<usize>>,
    pub usable: Vec<Vec<usize>>,
}

impl DecodingSets {
    /// Builds the sets from the requested message's row of each expanded
    /// query: `row(db, i)` is `>= r` for interference-only positions and
    /// otherwise names the sub-message exposed there.
    pub(crate) fn from_rows(params: &SystemParams, row: impl Fn(usize, usize) -> usize) -> Self {
        let mut interference = vec![Vec::new(); params.s];
        let mut usable = vec![Vec::new(); params.r];
        for db in 0..params.n {
            for (i, set) in interference.iter_mut().enumerate() {
                let m = row(db, i);
                if m >= params.r {
                    set.push(db);
                } else if !usable[m].contains(&db) {
                    usable[m].push(db);
                }
            }
        }
        DecodingSets { interference, usable }
    }

    pub fn all_sizes_equal(&self, t: usize) -> bool {
        self.interference.iter().chain(&self.usable).all(|s| s.len() == t)
    }
}

/// Interference cancellation shared by the key-indexed decoders.
///
/// `intermediate[db][i]` is component `i` of database `db`'s intermediate
/// answer (zero where nothing was sent). For each `i` the interference
/// vector is decoded from the interference set and subtracted everywhere
/// else, exposing `W^{k*,m} . g_db`; each requested sub-message is then
/// decoded from the databases that exposed it.
pub(crate) fn cancel_interference(
    params: &SystemParams,
    code: &MdsCode,
    intermediate: &[Vec<Symbol>],
    row: impl Fn(usize, usize) -> usize,
) -> Result<Vec<Symbol>> {
    let f = code.field();
    let sets = DecodingSets::from_rows(params, &row);
    let mut exposed: Vec<Vec<(usize, Symbol)>> = vec![Vec::new(); params.r];
    for (i, members) in sets.interference.iter().enumerate() {
        let points: Vec<_> = members.iter().map(|&db| (db, intermediate[db][i])).collect();
        let interference = decode_exact(code, &format!("interference set {i}"), &points)?;
        for db in 0..params.n {
            let m = row(db, i);
            if m < params.r {
                let value = f.sub(intermediate[db][i], code.encode_at(&interference, db));
                exposed[m].push((db, value));
            }
        }
    }
    let mut out = Vec::with_capacity(params.l);
    for (m, points) in exposed.iter().enumerate() {
        out.extend(decode_exact(code, &format!("usable set {m}"), points)?);
    }
    Ok(out)
}

/// Random keys shared by the key-indexed constructions: length-`k` vectors
/// over `0..modulus` whose entries sum to `0 mod modulus`.
pub mod key {
    use super::*;

    #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
    #[serde(transparent)]
    pub struct RandomKey(pub Vec<usize>);

    impl RandomKey {
        pub fn new(entries: Vec<usize>, modulus: usize) -> Result<Self> {
            if entries.iter().any(|&e| e >= modulus) || entries.iter().sum::<usize>() % modulus != 0 {
                return Err(Error::InvalidParams(format!(
                    "{entries:?} is not a key modulo {modulus}"
                )));
            }
            Ok(RandomKey(entries))
        }

        pub fn entries(&self) -> &[usize] {
            &self.0
        }
    }

    /// Uniform key: the first `k - 1` entries are independent and uniform,
    /// the last one completes the sum to zero.
    pub fn sample<R: RngCore + ?Sized>(params: &SystemParams, rng: &mut R) -> RandomKey {
        use rand::Rng;
        let modulus = params.modulus();
        let mut entries: Vec<usize> = (0..params.k - 1).map(|_| rng.random_range(0..modulus)).collect();
        let partial: usize = entries.iter().sum();
        entries.push((modulus - partial % modulus) % modulus);
        RandomKey(entries)
    }

    /// `modulus^(k-1)`, saturating.
    pub fn space_size(params: &SystemParams) -> u128 {
        (params.modulus() as u128).saturating_pow((params.k - 1) as u32)
    }

    /// Every key in lexicographic order of the free entries.
    pub fn enumerate(params: &SystemParams, cap: u128) -> Result<Vec<RandomKey>> {
        let size = space_size(params);
        if size > cap {
            return Err(Error::EnumerationTooLarge { size, cap });
        }
        let modulus = params.modulus();
        let free = params.k - 1;
        let mut out = Vec::with_capacity(size as usize);
        let mut digits = vec![0usize; free];
        loop {
            let partial: usize = digits.iter().sum();
            let mut entries = digits.clone();
            entries.push((modulus - partial % modulus) % modulus);
            out.push(RandomKey(entries));
            let Some(pos) = (0..free).rev().find(|&i| digits[i] + 1 < modulus) else {
                break;
            };
            digits[pos] += 1;
            for d in digits.iter_mut().skip(pos + 1) {
                *d = 0;
            }
        }
        Ok(out)
    }

    /// The un-clamped query: the key with entry `k_star` shifted by `db`.
    pub fn shifted(key: &RandomKey, k_star: usize, db: usize, modulus: usize) -> Vec<usize> {
        let mut q = key.0.clone();
        q[k_star] = (q[k_star] + db) % modulus;
        q
    }

    /// Query entries as one byte each.
    pub fn encode_entries(entries: &[usize]) -> Vec<u8> {
        entries.iter().map(|&e| e as u8).collect()
    }

    pub fn decode_entries(bytes: &[u8], k: usize, alphabet: usize) -> Result<Vec<usize>> {
        if bytes.len() != k {
            return Err(Error::MalformedFrame(format!("query has {} entries, expected {k}", bytes.len())));
        }
        if let Some(&b) = bytes.iter().find(|&&b| b as usize >= alphabet) {
            return Err(Error::MalformedFrame(format!("query entry {b} outside 0..{alphabet}")));
        }
        Ok(bytes.iter().map(|&b| b as usize).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::key::*;
    use super::*;
    use crate::params::SchemeTag;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn key_space_323() {
        let p = SystemParams::new(3, 2, 3, SchemeTag::A).unwrap();
        let keys = enumerate(&p, u128::MAX).unwrap();
        assert_eq!(keys.len(), 9);
        assert_eq!(space_size(&p), 9);
        for k in &keys {
            assert_eq!(k.0.iter().sum::<usize>() % 3, 0);
        }
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 9);
    }

    #[test]
    fn single_message_key() {
        let p = SystemParams::new(3, 2, 1, SchemeTag::A).unwrap();
        assert_eq!(enumerate(&p, 10).unwrap(), vec![RandomKey(vec![0])]);
        assert_eq!(sample(&p, &mut ChaCha8Rng::seed_from_u64(0)), RandomKey(vec![0]));
    }

    #[test]
    fn example_key_is_valid() {
        assert!(RandomKey::new(vec![3, 4, 1, 2], 5).is_ok());
        assert!(RandomKey::new(vec![4, 1, 2], 5).is_err());
    }

    #[test]
    fn sampled_keys_are_members() {
        let p = SystemParams::new(7, 3, 4, SchemeTag::A).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let k = sample(&p, &mut rng);
            assert!(RandomKey::new(k.0, p.modulus()).is_ok());
        }
    }

    #[test]
    fn enumeration_cap() {
        let p = SystemParams::new(7, 3, 4, SchemeTag::A).unwrap();
        assert_eq!(enumerate(&p, 100).unwrap_err(), Error::EnumerationTooLarge { size: 343, cap: 100 });
    }
}
