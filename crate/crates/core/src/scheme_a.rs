//! Construction-A.
//!
//! The user draws a key `F` uniformly from the length-`k` vectors over
//! `0..r+s` summing to zero modulo `r+s`, and sends database `n` the key
//! with the requested entry shifted by `n`. The database expands the query
//! into a `k x s` grid `grid(k, i) = (q_k + i) mod (r+s)` and answers, for
//! every column, the sum of `V^{k, grid(k,i)}_n` over all messages, where
//! sub-message indices `>= r` refer to all-zero pseudo symbols. Columns that
//! only touch pseudo symbols are not sent.

use num_rational::BigRational;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::mds::{MdsCode, Shard};
use crate::params::{SchemeTag, SystemParams};
use crate::scheme::key::{self, RandomKey};
use crate::scheme::{
    cancel_interference, check_answer_count, check_answer_len, check_k_star, uniform, AnswerTerm,
    DecodingSets, Scheme, SymbolicComponent,
};

/// Largest key space [`Scheme::enumerate_randomness`] will materialize.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueryA {
    pub db_index: usize,
    pub entries: Vec<usize>,
}

/// The `k x s` grid a database derives from its query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandedQueryA {
    pub grid: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerA {
    pub symbols: Vec<Symbol>,
    pub kept_columns: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SchemeA {
    params: SystemParams,
    code: MdsCode,
}

impl SchemeA {
    pub fn new(params: SystemParams, code: MdsCode) -> Result<Self> {
        if params.scheme != SchemeTag::A && params.scheme != SchemeTag::B {
            return Err(Error::InvalidParams(format!("{} parameters used for scheme a", params.scheme)));
        }
        if code.dimension() != params.t || code.length() != params.n {
            return Err(Error::DimensionMismatch("storage code does not match (n, t)".into()));
        }
        Ok(SchemeA { params, code })
    }

    /// Uses the Vandermonde storage code over the parameter field.
    pub fn with_vandermonde(params: SystemParams) -> Result<Self> {
        let code = MdsCode::build_vandermonde(params.t, params.n, &params.field())?;
        SchemeA::new(params, code)
    }

    pub fn sample_key<R: RngCore + ?Sized>(&self, rng: &mut R) -> RandomKey {
        key::sample(&self.params, rng)
    }

    pub fn gen_query(&self, k_star: usize, key: &RandomKey, db: usize) -> Result<QueryA> {
        check_k_star(&self.params, k_star)?;
        if db >= self.params.n {
            return Err(Error::IndexOutOfRange { index: db, bound: self.params.n });
        }
        Ok(QueryA { db_index: db, entries: key::shifted(key, k_star, db, self.params.modulus()) })
    }

    pub fn expand_query(&self, q: &QueryA) -> ExpandedQueryA {
        let modulus = self.params.modulus();
        let grid = q
            .entries
            .iter()
            .map(|&e| (0..self.params.s).map(|i| (e + i) % modulus).collect())
            .collect();
        ExpandedQueryA { grid }
    }

    /// Columns with at least one entry below `r`, ascending.
    pub fn kept_columns(&self, q: &QueryA) -> Vec<usize> {
        let modulus = self.params.modulus();
        (0..self.params.s)
            .filter(|&i| q.entries.iter().any(|&e| (e + i) % modulus < self.params.r))
            .collect()
    }

    /// Which stored symbols each intermediate answer position adds up.
    /// `AnswerTerm::index` is the sub-message index `m` of `V^{k,m}_n`.
    pub fn symbolic_answer(&self, q: &QueryA) -> Vec<SymbolicComponent> {
        let grid = self.expand_query(q).grid;
        (0..self.params.s)
            .map(|i| {
                let terms: Vec<AnswerTerm> = grid
                    .iter()
                    .enumerate()
                    .filter(|(_, row)| row[i] < self.params.r)
                    .map(|(k, row)| AnswerTerm { message: k, index: row[i] })
                    .collect();
                (!terms.is_empty()).then_some(terms)
            })
            .collect()
    }

    pub fn gen_answer(&self, shard: &Shard, q: &QueryA) -> Result<AnswerA> {
        if shard.db_index != q.db_index {
            return Err(Error::DimensionMismatch(format!(
                "query for database {} given shard {}",
                q.db_index, shard.db_index
            )));
        }
        if q.entries.len() != self.params.k || shard.k != self.params.k || shard.m != self.params.m {
            return Err(Error::DimensionMismatch("query or shard shape does not match params".into()));
        }
        let f = self.code.field();
        let modulus = self.params.modulus();
        let kept_columns = self.kept_columns(q);
        let symbols = kept_columns
            .iter()
            .map(|&i| {
                q.entries.iter().enumerate().fold(Symbol::ZERO, |acc, (k, &e)| {
                    f.add(acc, shard.cell(k, (e + i) % modulus))
                })
            })
            .collect();
        Ok(AnswerA { symbols, kept_columns })
    }

    pub fn decoding_sets(&self, k_star: usize, key: &RandomKey) -> Result<DecodingSets> {
        check_k_star(&self.params, k_star)?;
        let modulus = self.params.modulus();
        let base = key.entries()[k_star];
        Ok(DecodingSets::from_rows(&self.params, |db, i| (base + db + i) % modulus))
    }

    /// `n (k - 1) log2(n / gcd(n, t))`.
    pub fn upload_cost_bits(params: &SystemParams) -> f64 {
        (params.n * (params.k - 1)) as f64 * ((params.n / params.p) as f64).log2()
    }

    /// Number of distinct queries database `db` can receive: `(r+s)^(k-1)`.
    pub fn query_space_size(&self) -> u128 {
        key::space_size(&self.params)
    }

    /// Rank of a query within the set of queries its database can receive,
    /// for a compact `ceil(log2 |Q_n|)`-bit encoding. The last entry is
    /// implied by the sum constraint.
    pub fn query_index(&self, q: &QueryA) -> u128 {
        let modulus = self.params.modulus() as u128;
        q.entries[..self.params.k - 1].iter().fold(0u128, |acc, &e| acc * modulus + e as u128)
    }

    pub fn query_from_index(&self, db: usize, mut index: u128) -> QueryA {
        let modulus = self.params.modulus();
        let free = self.params.k - 1;
        let mut entries = vec![0usize; self.params.k];
        for slot in entries[..free].iter_mut().rev() {
            *slot = (index % modulus as u128) as usize;
            index /= modulus as u128;
        }
        let partial: usize = entries[..free].iter().sum();
        entries[free] = (db % modulus + modulus - partial % modulus) % modulus;
        QueryA { db_index: db, entries }
    }
}

impl Scheme for SchemeA {
    type Randomness = RandomKey;
    type Query = QueryA;

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn code(&self) -> &MdsCode {
        &self.code
    }

    fn name(&self) -> String {
        "a".into()
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> RandomKey {
        self.sample_key(rng)
    }

    fn enumerate_randomness(&self) -> Result<Vec<(RandomKey, BigRational)>> {
        let keys = key::enumerate(&self.params, ENUMERATION_CAP)?;
        let p = uniform(keys.len());
        Ok(keys.into_iter().map(|k| (k, p.clone())).collect())
    }

    fn queries(&self, k_star: usize, key: &RandomKey) -> Result<Vec<QueryA>> {
        (0..self.params.n).map(|db| self.gen_query(k_star, key, db)).collect()
    }

    fn answer_length(&self, _db: usize, query: &QueryA) -> usize {
        self.kept_columns(query).len()
    }

    fn answer(&self, shard: &Shard, query: &QueryA) -> Result<Vec<Symbol>> {
        Ok(self.gen_answer(shard, query)?.symbols)
    }

    fn reconstruct(&self, k_star: usize, key: &RandomKey, answers: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        check_k_star(&self.params, k_star)?;
        check_answer_count(&self.params, answers)?;
        let mut intermediate = Vec::with_capacity(self.params.n);
        for (db, answer) in answers.iter().enumerate() {
            let q = self.gen_query(k_star, key, db)?;
            let kept = self.kept_columns(&q);
            check_answer_len(db, answer.len(), kept.len())?;
            let mut full = vec![Symbol::ZERO; self.params.s];
            for (&i, &v) in kept.iter().zip(answer) {
                full[i] = v;
            }
            intermediate.push(full);
        }
        let modulus = self.params.modulus();
        let base = key.entries()[k_star];
        cancel_interference(&self.params, &self.code, &intermediate, |db, i| (base + db + i) % modulus)
    }

    fn encode_query(&self, query: &QueryA) -> Vec<u8> {
        key::encode_entries(&query.entries)
    }

    fn decode_query(&self, db: usize, bytes: &[u8]) -> Result<QueryA> {
        let entries = key::decode_entries(bytes, self.params.k, self.params.modulus())?;
        Ok(QueryA { db_index: db, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::{encode_storage, MessageSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(n: usize, t: usize, k: usize) -> SchemeA {
        SchemeA::with_vandermonde(SystemParams::new(n, t, k, SchemeTag::A).unwrap()).unwrap()
    }

    fn q(db: usize, entries: &[usize]) -> QueryA {
        QueryA { db_index: db, entries: entries.to_vec() }
    }

    fn terms(list: &[(usize, usize)]) -> SymbolicComponent {
        Some(list.iter().map(|&(k, m)| AnswerTerm { message: k, index: m }).collect())
    }

    #[test]
    fn queries_for_walkthrough_key() {
        let a = scheme(3, 2, 3);
        let key = RandomKey::new(vec![0, 1, 2], 3).unwrap();
        let qs = a.queries(1, &key).unwrap();
        let entries: Vec<_> = qs.iter().map(|q| q.entries.clone()).collect();
        assert_eq!(entries, vec![vec![0, 1, 2], vec![0, 2, 2], vec![0, 0, 2]]);
    }

    #[test]
    fn query_at_database_zero_is_key() {
        let a = scheme(5, 3, 4);
        let key = RandomKey::new(vec![3, 4, 1, 2], 5).unwrap();
        for k_star in 0..4 {
            assert_eq!(a.gen_query(k_star, &key, 0).unwrap().entries, key.0);
        }
        assert!(matches!(a.gen_query(4, &key, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(a.gen_query(0, &key, 5), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn query_sum_is_database_index() {
        let a = scheme(5, 3, 4);
        for key in key::enumerate(a.params(), u128::MAX).unwrap() {
            for k_star in 0..4 {
                for db in 0..5 {
                    let q = a.gen_query(k_star, &key, db).unwrap();
                    assert_eq!(q.entries.iter().sum::<usize>() % 5, db % 5);
                }
            }
        }
    }

    #[test]
    fn expand_examples() {
        let a = scheme(3, 2, 3);
        assert_eq!(a.expand_query(&q(0, &[0, 0, 0])).grid, vec![vec![0, 1]; 3]);
        assert_eq!(a.expand_query(&q(2, &[0, 0, 2])).grid, vec![vec![0, 1], vec![0, 1], vec![2, 0]]);
        let single = scheme(4, 2, 3);
        assert_eq!(single.params().s, 1);
        assert_eq!(single.expand_query(&q(0, &[1, 0, 1])).grid, vec![vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn symbolic_answers_table_rows() {
        let a = scheme(3, 2, 3);
        assert_eq!(a.symbolic_answer(&q(0, &[0, 0, 0])), vec![terms(&[(0, 0), (1, 0), (2, 0)]), None]);
        assert_eq!(a.symbolic_answer(&q(2, &[0, 0, 2])), vec![terms(&[(0, 0), (1, 0)]), terms(&[(2, 0)])]);
        assert_eq!(a.answer_length(0, &q(0, &[0, 0, 0])), 1);
        assert_eq!(a.answer_length(0, &q(0, &[2, 2, 2])), 1);
    }

    #[test]
    fn answer_values_match_symbolic_structure() {
        let a = scheme(3, 2, 3);
        let params = *a.params();
        let msgs = MessageSet::random(params, &mut ChaCha8Rng::seed_from_u64(3));
        let shards = encode_storage(a.code(), &msgs).unwrap();
        let f = params.field();
        let ans = a.gen_answer(&shards[2], &q(2, &[0, 0, 2])).unwrap();
        assert_eq!(ans.kept_columns, vec![0, 1]);
        assert_eq!(ans.symbols, vec![f.add(shards[2].cell(0, 0), shards[2].cell(1, 0)), shards[2].cell(2, 0)]);
    }

    #[test]
    fn zero_messages_give_zero_answers() {
        let a = scheme(5, 3, 4);
        let shards = encode_storage(a.code(), &MessageSet::zeros(*a.params())).unwrap();
        let key = RandomKey::new(vec![3, 4, 1, 2], 5).unwrap();
        let answers: Vec<_> = a
            .queries(2, &key)
            .unwrap()
            .iter()
            .map(|q| a.answer(&shards[q.db_index], q).unwrap())
            .collect();
        for (db, ans) in answers.iter().enumerate() {
            assert!(ans.iter().all(|s| s.is_zero()));
            assert_eq!(ans.len(), a.answer_length(db, &a.gen_query(2, &key, db).unwrap()));
        }
        assert_eq!(a.reconstruct(2, &key, &answers).unwrap(), vec![Symbol::ZERO; 6]);
    }

    #[test]
    fn walkthrough_recovers_requested_message() {
        let a = scheme(3, 2, 3);
        let params = *a.params();
        let msgs = MessageSet::random(params, &mut ChaCha8Rng::seed_from_u64(8));
        let shards = encode_storage(a.code(), &msgs).unwrap();
        let key = RandomKey::new(vec![0, 1, 2], 3).unwrap();
        let answers: Vec<_> = a
            .queries(1, &key)
            .unwrap()
            .iter()
            .map(|q| a.answer(&shards[q.db_index], q).unwrap())
            .collect();
        assert_eq!(answers.iter().map(Vec::len).sum::<usize>(), 6);
        // Database 0 sends V^0_0 alone, database 1 sends V^0_1 alone; the MDS
        // property then yields V^0_2.
        assert_eq!(answers[0][0], shards[0].cell(0, 0));
        assert_eq!(answers[1][0], shards[1].cell(0, 0));
        let w0 = a.code().decode_any_t(&[(0, answers[0][0]), (1, answers[1][0])]).unwrap();
        assert_eq!(a.code().encode_at(&w0, 2), shards[2].cell(0, 0));
        assert_eq!(a.reconstruct(1, &key, &answers).unwrap(), msgs.message(1));
    }

    #[test]
    fn exhaustive_recovery_323() {
        let a = scheme(3, 2, 3);
        let params = *a.params();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let msgs = MessageSet::random(params, &mut rng);
        let shards = encode_storage(a.code(), &msgs).unwrap();
        let keys = key::enumerate(&params, u128::MAX).unwrap();
        assert_eq!(keys.len(), 9);
        for key in &keys {
            for k_star in 0..3 {
                let answers: Vec<_> = a
                    .queries(k_star, key)
                    .unwrap()
                    .iter()
                    .map(|q| a.answer(&shards[q.db_index], q).unwrap())
                    .collect();
                assert_eq!(a.reconstruct(k_star, key, &answers).unwrap(), msgs.message(k_star));
            }
        }
    }

    #[test]
    fn reconstruct_rejects_wrong_lengths() {
        let a = scheme(3, 2, 3);
        let key = RandomKey::new(vec![0, 1, 2], 3).unwrap();
        let answers = vec![vec![Symbol::ZERO; 1]; 3];
        assert!(matches!(a.reconstruct(1, &key, &answers), Err(Error::MalformedTranscript(_))));
        assert!(matches!(a.reconstruct(1, &key, &answers[..2]), Err(Error::MalformedTranscript(_))));
    }

    #[test]
    fn decoding_sets_323_walkthrough() {
        let a = scheme(3, 2, 3);
        let key = RandomKey::new(vec![0, 1, 2], 3).unwrap();
        let sets = a.decoding_sets(1, &key).unwrap();
        assert!(sets.all_sizes_equal(2));
        assert_eq!(sets.usable, vec![vec![1, 2]]);
    }

    #[test]
    fn upload_cost_formula() {
        let p = SystemParams::new(3, 2, 3, SchemeTag::A).unwrap();
        let bits = SchemeA::upload_cost_bits(&p);
        assert!((bits - 6.0 * 3f64.log2()).abs() < 1e-12);
        assert!((bits - 9.509775004326938).abs() < 1e-9);
    }

    #[test]
    fn compact_query_index_roundtrip() {
        let a = scheme(5, 3, 4);
        for key in key::enumerate(a.params(), u128::MAX).unwrap() {
            for db in 0..5 {
                let q = a.gen_query(1, &key, db).unwrap();
                let idx = a.query_index(&q);
                assert!(idx < a.query_space_size());
                assert_eq!(a.query_from_index(db, idx), q);
            }
        }
    }

    #[test]
    fn wire_query_roundtrip_and_rejects() {
        let a = scheme(3, 2, 3);
        let query = q(1, &[0, 2, 2]);
        assert_eq!(a.decode_query(1, &a.encode_query(&query)).unwrap(), query);
        assert!(a.decode_query(1, &[0, 1]).is_err());
        assert!(a.decode_query(1, &[0, 1, 3]).is_err());
    }
}
