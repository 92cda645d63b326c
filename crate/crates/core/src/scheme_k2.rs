//! Two-message scheme for `2t >= n` with message size `t`.
//!
//! With probability `t/n` the user runs the *sum* strategy: `n - t`
//! databases return the sum of both coded symbols, `2t - n` return both
//! symbols and `n - t` return the other message's symbol. Otherwise it runs
//! the *direct* strategy: `t` databases return the requested symbol and the
//! rest return nothing. Every database sees the same query distribution for
//! either request.
//!
//! A `SendNothing` query travels as an empty payload. Privacy here covers
//! the query each database sees; whether an observer of answer lengths
//! across databases learns anything is outside that model.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::mds::{MdsCode, Shard};
use crate::params::{SchemeTag, SystemParams};
use crate::scheme::{check_answer_count, check_answer_len, check_k_star, decode_exact, Scheme};
use crate::scheme_a::ENUMERATION_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Sum,
    Direct,
}

/// Group labels. The sum strategy uses `SumOnly`, `Both` and `Other`; the
/// direct strategy uses `Requested` and `Idle`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    SumOnly,
    Both,
    Other,
    Requested,
    Idle,
}

/// The user's randomness: a strategy and one group label per database.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionK2 {
    pub strategy: Strategy,
    pub groups: Vec<Group>,
}

impl PartitionK2 {
    pub fn members(&self, group: Group) -> Vec<usize> {
        self.groups.iter().enumerate().filter(|(_, &g)| g == group).map(|(db, _)| db).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryK2 {
    SendSum,
    SendBoth,
    SendOnly(usize),
    SendNothing,
}

#[derive(Clone, Debug)]
pub struct SchemeK2 {
    params: SystemParams,
    code: MdsCode,
}

fn group_sizes(params: &SystemParams, strategy: Strategy) -> Vec<(Group, usize)> {
    let (n, t) = (params.n, params.t);
    match strategy {
        Strategy::Sum => vec![(Group::SumOnly, n - t), (Group::Both, 2 * t - n), (Group::Other, n - t)],
        Strategy::Direct => vec![(Group::Requested, t), (Group::Idle, n - t)],
    }
}

/// Every labelling of `n` databases with the given group sizes, in
/// lexicographic order of the label vector.
fn labellings(n: usize, sizes: &[(Group, usize)], out: &mut Vec<Vec<Group>>, cap: u128) -> Result<()> {
    fn go(
        sizes: &[(Group, usize)],
        left: &mut Vec<usize>,
        current: &mut Vec<Group>,
        n: usize,
        out: &mut Vec<Vec<Group>>,
    ) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for (idx, &(g, _)) in sizes.iter().enumerate() {
            if left[idx] > 0 {
                left[idx] -= 1;
                current.push(g);
                go(sizes, left, current, n, out);
                current.pop();
                left[idx] += 1;
            }
        }
    }
    let count = multinomial(sizes.iter().map(|&(_, c)| c));
    if count > cap {
        return Err(Error::EnumerationTooLarge { size: count, cap });
    }
    let mut left: Vec<usize> = sizes.iter().map(|&(_, c)| c).collect();
    go(sizes, &mut left, &mut Vec::with_capacity(n), n, out);
    Ok(())
}

fn multinomial(parts: impl Iterator<Item = usize>) -> u128 {
    let mut total = 0u128;
    let mut acc = 1u128;
    for c in parts {
        for i in 1..=c as u128 {
            total += 1;
            acc = acc.saturating_mul(total) / i;
        }
    }
    acc
}

impl SchemeK2 {
    pub fn new(params: SystemParams, code: MdsCode) -> Result<Self> {
        if params.scheme != SchemeTag::K2 {
            return Err(Error::InvalidParams(format!("{} parameters used for scheme k2", params.scheme)));
        }
        if code.dimension() != params.t || code.length() != params.n {
            return Err(Error::DimensionMismatch("storage code does not match (n, t)".into()));
        }
        Ok(SchemeK2 { params, code })
    }

    pub fn with_vandermonde(params: SystemParams) -> Result<Self> {
        let code = MdsCode::build_vandermonde(params.t, params.n, &params.field())?;
        SchemeK2::new(params, code)
    }

    /// Probability of the sum strategy, `t/n`.
    pub fn sum_probability(&self) -> BigRational {
        BigRational::new(BigInt::from(self.params.t), BigInt::from(self.params.n))
    }

    pub fn sample_partition<R: RngCore + ?Sized>(&self, rng: &mut R) -> PartitionK2 {
        let strategy = if rng.random_range(0..self.params.n) < self.params.t { Strategy::Sum } else { Strategy::Direct };
        let mut order: Vec<usize> = (0..self.params.n).collect();
        order.shuffle(rng);
        let mut groups = vec![Group::Idle; self.params.n];
        let mut it = order.into_iter();
        for (g, count) in group_sizes(&self.params, strategy) {
            for db in it.by_ref().take(count) {
                groups[db] = g;
            }
        }
        PartitionK2 { strategy, groups }
    }

    fn check_partition(&self, partition: &PartitionK2) -> Result<()> {
        if partition.groups.len() != self.params.n {
            return Err(Error::DimensionMismatch(format!(
                "partition covers {} databases, expected {}",
                partition.groups.len(),
                self.params.n
            )));
        }
        for (g, count) in group_sizes(&self.params, partition.strategy) {
            if partition.members(g).len() != count {
                return Err(Error::InvalidParams(format!("group {g:?} must hold {count} databases")));
            }
        }
        Ok(())
    }

    pub fn gen_queries(&self, k_star: usize, partition: &PartitionK2) -> Result<Vec<QueryK2>> {
        check_k_star(&self.params, k_star)?;
        self.check_partition(partition)?;
        Ok(partition
            .groups
            .iter()
            .map(|g| match g {
                Group::SumOnly => QueryK2::SendSum,
                Group::Both => QueryK2::SendBoth,
                Group::Other => QueryK2::SendOnly(1 - k_star),
                Group::Requested => QueryK2::SendOnly(k_star),
                Group::Idle => QueryK2::SendNothing,
            })
            .collect())
    }

    /// `t (n + t) / n`, the same for both requests.
    pub fn expected_download(&self) -> BigRational {
        let (n, t) = (self.params.n as i64, self.params.t as i64);
        BigRational::new(BigInt::from(t * (n + t)), BigInt::from(n))
    }
}

impl Scheme for SchemeK2 {
    type Randomness = PartitionK2;
    type Query = QueryK2;

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn code(&self) -> &MdsCode {
        &self.code
    }

    fn name(&self) -> String {
        "k2".into()
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> PartitionK2 {
        self.sample_partition(rng)
    }

    fn enumerate_randomness(&self) -> Result<Vec<(PartitionK2, BigRational)>> {
        let mut out = Vec::new();
        let p_sum = self.sum_probability();
        for (strategy, p) in [(Strategy::Sum, p_sum.clone()), (Strategy::Direct, BigRational::from_integer(1.into()) - p_sum)] {
            let mut all = Vec::new();
            labellings(self.params.n, &group_sizes(&self.params, strategy), &mut all, ENUMERATION_CAP)?;
            let w = p / BigInt::from(all.len());
            out.extend(all.into_iter().map(|groups| (PartitionK2 { strategy, groups }, w.clone())));
        }
        Ok(out)
    }

    fn queries(&self, k_star: usize, partition: &PartitionK2) -> Result<Vec<QueryK2>> {
        self.gen_queries(k_star, partition)
    }

    fn answer_length(&self, _db: usize, query: &QueryK2) -> usize {
        match query {
            QueryK2::SendSum | QueryK2::SendOnly(_) => 1,
            QueryK2::SendBoth => 2,
            QueryK2::SendNothing => 0,
        }
    }

    fn answer(&self, shard: &Shard, query: &QueryK2) -> Result<Vec<Symbol>> {
        if shard.k != 2 || shard.m != 1 {
            return Err(Error::DimensionMismatch("k2 shards hold one symbol per message".into()));
        }
        let f = self.code.field();
        Ok(match *query {
            QueryK2::SendSum => vec![f.add(shard.cell(0, 0), shard.cell(1, 0))],
            QueryK2::SendBoth => vec![shard.cell(0, 0), shard.cell(1, 0)],
            QueryK2::SendOnly(k) if k < 2 => vec![shard.cell(k, 0)],
            QueryK2::SendOnly(k) => return Err(Error::IndexOutOfRange { index: k, bound: 2 }),
            QueryK2::SendNothing => Vec::new(),
        })
    }

    fn reconstruct(&self, k_star: usize, partition: &PartitionK2, answers: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        let queries = self.gen_queries(k_star, partition)?;
        check_answer_count(&self.params, answers)?;
        for (db, (q, a)) in queries.iter().zip(answers).enumerate() {
            check_answer_len(db, a.len(), self.answer_length(db, q))?;
        }
        match partition.strategy {
            Strategy::Direct => {
                let points: Vec<_> = partition.members(Group::Requested).iter().map(|&db| (db, answers[db][0])).collect();
                decode_exact(&self.code, "requested group", &points)
            }
            Strategy::Sum => {
                let f = self.code.field();
                let other = 1 - k_star;
                let both = partition.members(Group::Both);
                let mut points: Vec<_> = both.iter().map(|&db| (db, answers[db][other])).collect();
                points.extend(partition.members(Group::Other).iter().map(|&db| (db, answers[db][0])));
                let w_other = decode_exact(&self.code, "side information", &points)?;
                let mut points: Vec<_> = both.iter().map(|&db| (db, answers[db][k_star])).collect();
                points.extend(
                    partition
                        .members(Group::SumOnly)
                        .iter()
                        .map(|&db| (db, f.sub(answers[db][0], self.code.encode_at(&w_other, db)))),
                );
                decode_exact(&self.code, "requested message", &points)
            }
        }
    }

    /// One tag byte: 0 sum, 1 both, 2 + k for a single message. Sending
    /// nothing is the empty payload.
    fn encode_query(&self, query: &QueryK2) -> Vec<u8> {
        match *query {
            QueryK2::SendSum => vec![0],
            QueryK2::SendBoth => vec![1],
            QueryK2::SendOnly(k) => vec![2 + k as u8],
            QueryK2::SendNothing => Vec::new(),
        }
    }

    fn decode_query(&self, _db: usize, bytes: &[u8]) -> Result<QueryK2> {
        match bytes {
            [] => Ok(QueryK2::SendNothing),
            [0] => Ok(QueryK2::SendSum),
            [1] => Ok(QueryK2::SendBoth),
            [b @ (2 | 3)] => Ok(QueryK2::SendOnly((*b - 2) as usize)),
            _ => Err(Error::MalformedFrame(format!("bad k2 query payload {bytes:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::{encode_storage, MessageSet};
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn scheme(n: usize, t: usize) -> SchemeK2 {
        SchemeK2::with_vandermonde(SystemParams::new(n, t, 2, SchemeTag::K2).unwrap()).unwrap()
    }

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn enumeration_weights_sum_to_one() {
        for (n, t) in [(3, 2), (4, 2), (5, 3), (5, 4)] {
            let s = scheme(n, t);
            let all = s.enumerate_randomness().unwrap();
            let total: BigRational = all.iter().map(|(_, w)| w.clone()).sum();
            assert!(total.is_one());
        }
        // (3,2): 3!/(1!1!1!) sum partitions and C(3,2) direct ones.
        assert_eq!(scheme(3, 2).enumerate_randomness().unwrap().len(), 9);
    }

    #[test]
    fn expected_download_and_rate() {
        let s = scheme(3, 2);
        let all = s.enumerate_randomness().unwrap();
        for k_star in 0..2 {
            let e: BigRational = all
                .iter()
                .map(|(p, w)| {
                    let qs = s.queries(k_star, p).unwrap();
                    let d: usize = qs.iter().enumerate().map(|(db, q)| s.answer_length(db, q)).sum();
                    w * BigInt::from(d)
                })
                .sum();
            assert_eq!(e, ratio(10, 3));
            assert_eq!(e, s.expected_download());
            assert_eq!(BigRational::from_integer(2.into()) / e, ratio(3, 5));
        }
    }

    #[test]
    fn per_database_distribution_is_independent_of_request() {
        for (n, t) in [(3, 2), (4, 2), (5, 3)] {
            let s = scheme(n, t);
            let all = s.enumerate_randomness().unwrap();
            for db in 0..n {
                let dist = |k_star: usize| {
                    let mut m: BTreeMap<QueryK2, BigRational> = BTreeMap::new();
                    for (p, w) in &all {
                        let q = s.queries(k_star, p).unwrap()[db];
                        *m.entry(q).or_insert_with(BigRational::zero) += w;
                    }
                    m
                };
                assert_eq!(dist(0), dist(1));
            }
        }
    }

    #[test]
    fn exhaustive_recovery() {
        for (n, t) in [(3, 2), (4, 2), (5, 3), (6, 5)] {
            let s = scheme(n, t);
            let msgs = MessageSet::random(*s.params(), &mut ChaCha8Rng::seed_from_u64(n as u64));
            let shards = encode_storage(s.code(), &msgs).unwrap();
            for (p, _) in s.enumerate_randomness().unwrap() {
                for k_star in 0..2 {
                    let ans: Vec<_> = s
                        .queries(k_star, &p)
                        .unwrap()
                        .iter()
                        .zip(&shards)
                        .map(|(q, sh)| s.answer(sh, q).unwrap())
                        .collect();
                    assert_eq!(s.reconstruct(k_star, &p, &ans).unwrap(), msgs.message(k_star));
                }
            }
        }
    }

    #[test]
    fn sampled_partitions_are_valid_and_mix() {
        let s = scheme(5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut sums = 0;
        for _ in 0..2000 {
            let p = s.sample(&mut rng);
            s.check_partition(&p).unwrap();
            sums += usize::from(p.strategy == Strategy::Sum);
        }
        assert!((1000..1400).contains(&sums), "{sums}");
    }

    #[test]
    fn wire_round_trip() {
        let s = scheme(3, 2);
        for q in [QueryK2::SendSum, QueryK2::SendBoth, QueryK2::SendOnly(0), QueryK2::SendOnly(1), QueryK2::SendNothing] {
            assert_eq!(s.decode_query(0, &s.encode_query(&q)).unwrap(), q);
        }
        assert!(s.decode_query(0, &[4]).is_err());
        assert!(s.decode_query(0, &[0, 0]).is_err());
    }

    #[test]
    fn rejects_bad_partitions_and_params() {
        let s = scheme(3, 2);
        let bad = PartitionK2 { strategy: Strategy::Direct, groups: vec![Group::Requested; 3] };
        assert!(s.queries(0, &bad).is_err());
        assert!(s.queries(2, &s.sample(&mut ChaCha8Rng::seed_from_u64(0))).is_err());
        let a = SystemParams::new(3, 2, 2, SchemeTag::A).unwrap();
        assert!(SchemeK2::with_vandermonde(a).is_err());
    }

    #[test]
    fn multinomial_counts() {
        assert_eq!(multinomial([1, 1, 1].into_iter()), 6);
        assert_eq!(multinomial([2, 1].into_iter()), 3);
        assert_eq!(multinomial([2, 0, 2].into_iter()), 6);
    }
}
