//! Construction-B.
//!
//! Same key and storage as [`crate::scheme_a`], but the shifted key is
//! clamped before it is sent, which shrinks the query alphabet:
//!
//! - High rate (`s >= r`): entries are clamped at `s`. Each database encodes
//!   every `V^k_n` with an `(s, r)` column code and answer position `i` adds
//!   column-code symbol `i` of message `k` whenever the pattern matrix has a
//!   one at `(i, q_k)`. Together with the base code this forms a product code.
//! - Low rate (`s <= r`): entries are clamped at `r`, and a database either
//!   sends all `s` positions or nothing.
//!
//! The un-clamped ("auxiliary") queries produce identical answers and are
//! available through [`QueryMode::Auxiliary`].

use num_rational::BigRational;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::mds::{MdsCode, Shard};
use crate::params::{Regime, SchemeTag, SystemParams};
use crate::scheme::key::{self, RandomKey};
use crate::scheme::{
    cancel_interference, check_answer_count, check_answer_len, check_k_star, decode_exact, uniform,
    AnswerTerm, DecodingSets, Scheme, SymbolicComponent,
};
use crate::scheme_a::ENUMERATION_CAP;

/// Which of the two strategies a [`SchemeB`] instance runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BRegime {
    High,
    Low,
}

/// Whether queries go out clamped or as the raw shifted key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    #[default]
    Compressed,
    Auxiliary,
}

/// The `s x (s+1)` binary pattern matrix and its `s x (s+r)` extension.
///
/// Row 0 starts with `r` ones; row `i` is row 0's first `s` entries cyclically
/// shifted right by `i`. The last column of `P` and the `r - 1` appended
/// columns of the extension are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternMatrix {
    pub p_mat: Vec<Vec<u8>>,
    pub p_bar: Vec<Vec<u8>>,
}

impl PatternMatrix {
    pub fn build(params: &SystemParams) -> Result<Self> {
        let (r, s) = (params.r, params.s);
        if s < r {
            return Err(Error::WrongRegime { expected: "high-rate" });
        }
        let p_mat: Vec<Vec<u8>> = (0..s)
            .map(|i| {
                let mut row: Vec<u8> = (0..s).map(|j| u8::from((j + s - i) % s < r)).collect();
                row.push(0);
                row
            })
            .collect();
        let p_bar = p_mat
            .iter()
            .map(|row| {
                let mut ext = row.clone();
                ext.resize(s + r, 0);
                ext
            })
            .collect();
        Ok(PatternMatrix { p_mat, p_bar })
    }

    /// `P(i, j)` for `j <= s`; the extension is consulted for larger `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.p_bar[i][j] == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueryB {
    pub db_index: usize,
    pub entries: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerB {
    pub symbols: Vec<Symbol>,
    pub kept_positions: Vec<usize>,
}

/// Decoding sets of the high-rate decoder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodingSetsHigh {
    /// Databases whose position `i` holds interference only.
    pub interference: Vec<Vec<usize>>,
    /// Positions at which database `n` exposes a requested column-code symbol.
    pub exposed: Vec<Vec<usize>>,
    /// Databases exposing at least `r` column-code symbols.
    pub usable: Vec<usize>,
}

/// Upload cost bound for one regime, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UploadBound {
    /// `n (k-1) log2(s + r)`: sending the un-clamped key.
    pub key_bits: f64,
    /// `n k log2(s + 1)` (high) or `n k log2(r + 1)` (low): sending clamped entries.
    pub clamped_bits: f64,
    pub bits: f64,
    pub clamped_wins: bool,
}

#[derive(Clone, Debug)]
pub struct SchemeB {
    params: SystemParams,
    code: MdsCode,
    column_code: Option<MdsCode>,
    pattern: Option<PatternMatrix>,
    regime: BRegime,
    mode: QueryMode,
}

impl SchemeB {
    /// Picks the high-rate strategy when `s >= r`, the low-rate one otherwise.
    pub fn new(params: SystemParams, code: MdsCode) -> Result<Self> {
        let regime = match params.regime() {
            Regime::HighRate | Regime::Both => BRegime::High,
            Regime::LowRate => BRegime::Low,
        };
        SchemeB::with_regime(params, code, regime)
    }

    pub fn with_vandermonde(params: SystemParams) -> Result<Self> {
        let code = MdsCode::build_vandermonde(params.t, params.n, &params.field())?;
        SchemeB::new(params, code)
    }

    pub fn with_regime(params: SystemParams, code: MdsCode, regime: BRegime) -> Result<Self> {
        if params.scheme != SchemeTag::B && params.scheme != SchemeTag::A {
            return Err(Error::InvalidParams(format!("{} parameters used for scheme b", params.scheme)));
        }
        if code.dimension() != params.t || code.length() != params.n {
            return Err(Error::DimensionMismatch("storage code does not match (n, t)".into()));
        }
        let (column_code, pattern) = match regime {
            BRegime::High => {
                let pattern = PatternMatrix::build(&params)?;
                let column_code = MdsCode::build_vandermonde(params.r, params.s, code.field())?;
                (Some(column_code), Some(pattern))
            }
            BRegime::Low => {
                if params.r < params.s {
                    return Err(Error::WrongRegime { expected: "low-rate" });
                }
                (None, None)
            }
        };
        Ok(SchemeB { params, code, column_code, pattern, regime, mode: QueryMode::Compressed })
    }

    pub fn with_mode(mut self, mode: QueryMode) -> Self {
        self.mode = mode;
        self
    }

    /// Replaces the `(s, r)` column code (high rate only).
    pub fn with_column_code(mut self, column_code: MdsCode) -> Result<Self> {
        if self.regime != BRegime::High {
            return Err(Error::WrongRegime { expected: "high-rate" });
        }
        if column_code.dimension() != self.params.r || column_code.length() != self.params.s {
            return Err(Error::DimensionMismatch("column code must be (s, r)".into()));
        }
        self.column_code = Some(column_code);
        Ok(self)
    }

    pub fn regime(&self) -> BRegime {
        self.regime
    }

    pub fn mode(&self) -> QueryMode {
        self.mode
    }

    pub fn pattern(&self) -> Option<&PatternMatrix> {
        self.pattern.as_ref()
    }

    pub fn column_code(&self) -> Option<&MdsCode> {
        self.column_code.as_ref()
    }

    /// Largest entry plus one that a query may carry.
    pub fn alphabet(&self) -> usize {
        match (self.mode, self.regime) {
            (QueryMode::Auxiliary, _) => self.params.modulus(),
            (QueryMode::Compressed, BRegime::High) => self.params.s + 1,
            (QueryMode::Compressed, BRegime::Low) => self.params.r + 1,
        }
    }

    fn clamp(&self) -> usize {
        match self.regime {
            BRegime::High => self.params.s,
            BRegime::Low => self.params.r,
        }
    }

    /// The shifted key before clamping.
    pub fn auxiliary_query(&self, k_star: usize, key: &RandomKey, db: usize) -> Result<Vec<usize>> {
        check_k_star(&self.params, k_star)?;
        if db >= self.params.n {
            return Err(Error::IndexOutOfRange { index: db, bound: self.params.n });
        }
        Ok(key::shifted(key, k_star, db, self.params.modulus()))
    }

    pub fn gen_query(&self, k_star: usize, key: &RandomKey, db: usize) -> Result<QueryB> {
        let aux = self.auxiliary_query(k_star, key, db)?;
        let entries = match self.mode {
            QueryMode::Auxiliary => aux,
            QueryMode::Compressed => aux.into_iter().map(|e| e.min(self.clamp())).collect(),
        };
        Ok(QueryB { db_index: db, entries })
    }

    /// Query entries clamped as the regime requires; clamping is idempotent,
    /// so this also accepts already compressed queries.
    fn clamped(&self, q: &QueryB) -> Vec<usize> {
        q.entries.iter().map(|&e| e.min(self.clamp())).collect()
    }

    /// Low-rate `k x s` grid: `r` where the entry is `r`, otherwise
    /// `(entry + i) mod r`.
    pub fn expand_low(&self, q: &QueryB) -> Result<Vec<Vec<usize>>> {
        if self.regime != BRegime::Low {
            return Err(Error::WrongRegime { expected: "low-rate" });
        }
        let r = self.params.r;
        Ok(self
            .clamped(q)
            .iter()
            .map(|&e| (0..self.params.s).map(|i| if e == r { r } else { (e + i) % r }).collect())
            .collect())
    }

    pub fn kept_positions(&self, q: &QueryB) -> Vec<usize> {
        let c = self.clamped(q);
        match self.regime {
            BRegime::High => {
                let p = self.pattern.as_ref().expect("high regime has a pattern");
                (0..self.params.s).filter(|&i| c.iter().any(|&e| p.get(i, e))).collect()
            }
            BRegime::Low => {
                if c.iter().any(|&e| e < self.params.r) {
                    (0..self.params.s).collect()
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// High rate: `AnswerTerm::index` is the column-code position `i` of
    /// `~V^{k,i}_n`. Low rate: it is the sub-message index of `V^{k,m}_n`.
    pub fn symbolic_answer(&self, q: &QueryB) -> Vec<SymbolicComponent> {
        let c = self.clamped(q);
        let kept = self.kept_positions(q);
        (0..self.params.s)
            .map(|i| {
                if !kept.contains(&i) {
                    return None;
                }
                let terms = match self.regime {
                    BRegime::High => {
                        let p = self.pattern.as_ref().expect("pattern");
                        c.iter()
                            .enumerate()
                            .filter(|(_, &e)| p.get(i, e))
                            .map(|(k, _)| AnswerTerm { message: k, index: i })
                            .collect()
                    }
                    BRegime::Low => {
                        let grid = self.expand_low(q).expect("low regime");
                        grid.iter()
                            .enumerate()
                            .filter(|(_, row)| row[i] < self.params.r)
                            .map(|(k, row)| AnswerTerm { message: k, index: row[i] })
                            .collect()
                    }
                };
                Some(terms)
            })
            .collect()
    }

    fn check_inputs(&self, shard: &Shard, q: &QueryB) -> Result<()> {
        if shard.db_index != q.db_index {
            return Err(Error::DimensionMismatch(format!(
                "query for database {} given shard {}",
                q.db_index, shard.db_index
            )));
        }
        if q.entries.len() != self.params.k || shard.k != self.params.k || shard.m != self.params.m {
            return Err(Error::DimensionMismatch("query or shard shape does not match params".into()));
        }
        if q.entries.iter().any(|&e| e >= self.params.modulus()) {
            return Err(Error::DimensionMismatch("query entry outside the key alphabet".into()));
        }
        Ok(())
    }

    pub fn gen_answer_high(&self, shard: &Shard, q: &QueryB) -> Result<AnswerB> {
        if self.regime != BRegime::High {
            return Err(Error::WrongRegime { expected: "high-rate" });
        }
        self.check_inputs(shard, q)?;
        let f = self.code.field();
        let p = self.pattern.as_ref().expect("pattern");
        let cc = self.column_code.as_ref().expect("column code");
        let c = self.clamped(q);
        let intermediate: Vec<Vec<Symbol>> =
            (0..self.params.k).map(|k| cc.encode(shard.coded_message(k))).collect::<Result<_>>()?;
        let kept_positions = self.kept_positions(q);
        let symbols = kept_positions
            .iter()
            .map(|&i| {
                c.iter()
                    .enumerate()
                    .filter(|(_, &e)| p.get(i, e))
                    .fold(Symbol::ZERO, |acc, (k, _)| f.add(acc, intermediate[k][i]))
            })
            .collect();
        Ok(AnswerB { symbols, kept_positions })
    }

    pub fn gen_answer_low(&self, shard: &Shard, q: &QueryB) -> Result<AnswerB> {
        self.check_inputs(shard, q)?;
        let grid = self.expand_low(q)?;
        let f = self.code.field();
        let kept_positions = self.kept_positions(q);
        let symbols = kept_positions
            .iter()
            .map(|&i| {
                grid.iter().enumerate().fold(Symbol::ZERO, |acc, (k, row)| f.add(acc, shard.cell(k, row[i])))
            })
            .collect();
        Ok(AnswerB { symbols, kept_positions })
    }

    pub fn gen_answer(&self, shard: &Shard, q: &QueryB) -> Result<AnswerB> {
        match self.regime {
            BRegime::High => self.gen_answer_high(shard, q),
            BRegime::Low => self.gen_answer_low(shard, q),
        }
    }

    /// Clamped entry of the requested message at every database.
    fn requested_entries(&self, k_star: usize, key: &RandomKey) -> Result<Vec<usize>> {
        (0..self.params.n)
            .map(|db| Ok(self.auxiliary_query(k_star, key, db)?[k_star].min(self.clamp())))
            .collect()
    }

    pub fn decoding_sets_high(&self, k_star: usize, key: &RandomKey) -> Result<DecodingSetsHigh> {
        let p = self.pattern.as_ref().ok_or(Error::WrongRegime { expected: "high-rate" })?;
        let req = self.requested_entries(k_star, key)?;
        let interference =
            (0..self.params.s).map(|i| (0..self.params.n).filter(|&db| !p.get(i, req[db])).collect()).collect();
        let exposed: Vec<Vec<usize>> =
            req.iter().map(|&e| (0..self.params.s).filter(|&i| p.get(i, e)).collect()).collect();
        let usable = (0..self.params.n).filter(|&db| exposed[db].len() >= self.params.r).collect();
        Ok(DecodingSetsHigh { interference, exposed, usable })
    }

    pub fn decoding_sets_low(&self, k_star: usize, key: &RandomKey) -> Result<DecodingSets> {
        if self.regime != BRegime::Low {
            return Err(Error::WrongRegime { expected: "low-rate" });
        }
        let req = self.requested_entries(k_star, key)?;
        let r = self.params.r;
        Ok(DecodingSets::from_rows(&self.params, |db, i| if req[db] == r { r } else { (req[db] + i) % r }))
    }

    fn intermediate(&self, k_star: usize, key: &RandomKey, answers: &[Vec<Symbol>]) -> Result<Vec<Vec<Symbol>>> {
        check_k_star(&self.params, k_star)?;
        check_answer_count(&self.params, answers)?;
        let mut out = Vec::with_capacity(self.params.n);
        for (db, answer) in answers.iter().enumerate() {
            let q = self.gen_query(k_star, key, db)?;
            let kept = self.kept_positions(&q);
            check_answer_len(db, answer.len(), kept.len())?;
            let mut full = vec![Symbol::ZERO; self.params.s];
            for (&i, &v) in kept.iter().zip(answer) {
                full[i] = v;
            }
            out.push(full);
        }
        Ok(out)
    }

    pub fn reconstruct_high(&self, k_star: usize, key: &RandomKey, answers: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        let sets = self.decoding_sets_high(k_star, key)?;
        let intermediate = self.intermediate(k_star, key, answers)?;
        let f = self.code.field();
        let cc = self.column_code.as_ref().expect("column code");
        let (n, s, r, t) = (self.params.n, self.params.s, self.params.r, self.params.t);

        // Requested column-code symbols ~V^{k*,i}_db, once interference is removed.
        let mut exposed = vec![vec![None; s]; n];
        for (i, members) in sets.interference.iter().enumerate() {
            let points: Vec<_> = members.iter().map(|&db| (db, intermediate[db][i])).collect();
            let interference = decode_exact(&self.code, &format!("interference set {i}"), &points)?;
            for db in (0..n).filter(|db| !members.contains(db)) {
                exposed[db][i] = Some(f.sub(intermediate[db][i], self.code.encode_at(&interference, db)));
            }
        }
        if sets.usable.len() != t {
            return Err(Error::MalformedTranscript(format!(
                "{} databases expose the requested message, expected {t}",
                sets.usable.len()
            )));
        }
        // Column decoding: V^{k*}_db (length r) at every usable database.
        let mut columns = Vec::with_capacity(t);
        for &db in &sets.usable {
            let points: Vec<_> = sets.exposed[db]
                .iter()
                .map(|&i| (i, exposed[db][i].expect("exposed position")))
                .collect();
            if points.len() != r {
                return Err(Error::MalformedTranscript(format!(
                    "database {db} exposes {} column symbols, expected {r}",
                    points.len()
                )));
            }
            columns.push((db, decode_exact(cc, &format!("column at database {db}"), &points)?));
        }
        // Row decoding: W^{k*,m} from its T code symbols.
        let mut out = Vec::with_capacity(self.params.l);
        for m in 0..r {
            let points: Vec<_> = columns.iter().map(|(db, v)| (*db, v[m])).collect();
            out.extend(decode_exact(&self.code, &format!("row {m}"), &points)?);
        }
        Ok(out)
    }

    pub fn reconstruct_low(&self, k_star: usize, key: &RandomKey, answers: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        if self.regime != BRegime::Low {
            return Err(Error::WrongRegime { expected: "low-rate" });
        }
        let intermediate = self.intermediate(k_star, key, answers)?;
        let req = self.requested_entries(k_star, key)?;
        let r = self.params.r;
        cancel_interference(&self.params, &self.code, &intermediate, |db, i| {
            if req[db] == r {
                r
            } else {
                (req[db] + i) % r
            }
        })
    }

    /// The regime's upload cost bound and which branch attains it.
    pub fn upload_cost_bits(params: &SystemParams, regime: BRegime) -> UploadBound {
        let (n, k) = (params.n as f64, params.k as f64);
        let key_bits = n * (k - 1.0) * ((params.s + params.r) as f64).log2();
        let clamp = match regime {
            BRegime::High => params.s,
            BRegime::Low => params.r,
        };
        let clamped_bits = n * k * ((clamp + 1) as f64).log2();
        UploadBound { key_bits, clamped_bits, bits: key_bits.min(clamped_bits), clamped_wins: clamped_bits < key_bits }
    }
}

impl Scheme for SchemeB {
    type Randomness = RandomKey;
    type Query = QueryB;

    fn params(&self) -> &SystemParams {
        &self.params
    }

    fn code(&self) -> &MdsCode {
        &self.code
    }

    fn name(&self) -> String {
        let regime = match self.regime {
            BRegime::High => "high",
            BRegime::Low => "low",
        };
        match self.mode {
            QueryMode::Compressed => format!("b-{regime}"),
            QueryMode::Auxiliary => format!("b-{regime}-aux"),
        }
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> RandomKey {
        key::sample(&self.params, rng)
    }

    fn enumerate_randomness(&self) -> Result<Vec<(RandomKey, BigRational)>> {
        let keys = key::enumerate(&self.params, ENUMERATION_CAP)?;
        let p = uniform(keys.len());
        Ok(keys.into_iter().map(|k| (k, p.clone())).collect())
    }

    fn queries(&self, k_star: usize, key: &RandomKey) -> Result<Vec<QueryB>> {
        (0..self.params.n).map(|db| self.gen_query(k_star, key, db)).collect()
    }

    fn answer_length(&self, _db: usize, query: &QueryB) -> usize {
        self.kept_positions(query).len()
    }

    fn answer(&self, shard: &Shard, query: &QueryB) -> Result<Vec<Symbol>> {
        Ok(self.gen_answer(shard, query)?.symbols)
    }

    fn reconstruct(&self, k_star: usize, key: &RandomKey, answers: &[Vec<Symbol>]) -> Result<Vec<Symbol>> {
        match self.regime {
            BRegime::High => self.reconstruct_high(k_star, key, answers),
            BRegime::Low => self.reconstruct_low(k_star, key, answers),
        }
    }

    fn encode_query(&self, query: &QueryB) -> Vec<u8> {
        key::encode_entries(&query.entries)
    }

    fn decode_query(&self, db: usize, bytes: &[u8]) -> Result<QueryB> {
        let entries = key::decode_entries(bytes, self.params.k, self.alphabet())?;
        Ok(QueryB { db_index: db, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mds::{encode_storage, MessageSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(n: usize, t: usize, k: usize) -> SchemeB {
        SchemeB::with_vandermonde(SystemParams::new(n, t, k, SchemeTag::B).unwrap()).unwrap()
    }

    fn example_key() -> RandomKey {
        RandomKey::new(vec![3, 4, 1, 2], 5).unwrap()
    }

    fn answers(b: &SchemeB, msgs: &MessageSet, k_star: usize, key: &RandomKey) -> Vec<Vec<Symbol>> {
        let shards = encode_storage(b.code(), msgs).unwrap();
        b.queries(k_star, key).unwrap().iter().map(|q| b.answer(&shards[q.db_index], q).unwrap()).collect()
    }

    fn t(k: usize, i: usize) -> AnswerTerm {
        AnswerTerm { message: k, index: i }
    }

    #[test]
    fn pattern_for_5_3() {
        let b = scheme(5, 3, 4);
        let p = b.pattern().unwrap();
        assert_eq!(p.p_mat, vec![vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![1, 0, 1, 0]]);
        assert_eq!(p.p_bar, vec![vec![1, 1, 0, 0, 0], vec![0, 1, 1, 0, 0], vec![1, 0, 1, 0, 0]]);
    }

    #[test]
    fn pattern_r_equals_s() {
        let b = scheme(4, 2, 2);
        assert_eq!(b.pattern().unwrap().p_mat, vec![vec![1, 0]]);
    }

    #[test]
    fn pattern_weights() {
        for (n, t) in [(5, 3), (7, 4), (7, 5), (8, 5), (9, 6), (11, 7), (4, 2)] {
            let params = SystemParams::new(n, t, 2, SchemeTag::B).unwrap();
            let p = PatternMatrix::build(&params).unwrap();
            let (r, s) = (params.r, params.s);
            for row in &p.p_bar {
                assert_eq!(row.iter().filter(|&&x| x == 1).count(), r);
                assert!(row[s..].iter().all(|&x| x == 0));
            }
            for j in 0..s {
                assert_eq!(p.p_bar.iter().filter(|row| row[j] == 1).count(), r);
            }
        }
        let low = SystemParams::new(5, 2, 2, SchemeTag::B).unwrap();
        assert_eq!(PatternMatrix::build(&low), Err(Error::WrongRegime { expected: "high-rate" }));
    }

    #[test]
    fn compressed_queries_5_3_4() {
        let b = scheme(5, 3, 4);
        let qs = b.queries(0, &example_key()).unwrap();
        let rows: Vec<Vec<usize>> = (0..4).map(|k| qs.iter().map(|q| q.entries[k]).collect()).collect();
        assert_eq!(rows, vec![vec![3, 3, 0, 1, 2], vec![3; 5], vec![1; 5], vec![2; 5]]);
        let aux: Vec<Vec<usize>> = (0..5).map(|db| b.auxiliary_query(0, &example_key(), db).unwrap()).collect();
        assert_eq!(aux.iter().map(|q| q[0]).collect::<Vec<_>>(), vec![3, 4, 0, 1, 2]);
        assert!(aux.iter().all(|q| q[1] == 4));
    }

    #[test]
    fn clamp_inactive_and_active() {
        let b = scheme(5, 3, 4);
        let key = RandomKey::new(vec![0, 1, 2, 2], 5).unwrap();
        assert_eq!(b.gen_query(3, &key, 0).unwrap().entries, key.0);
        let key = RandomKey::new(vec![4, 1, 0, 0], 5).unwrap();
        assert_eq!(b.gen_query(1, &key, 0).unwrap().entries[0], 3);
    }

    #[test]
    fn high_rate_answer_structure() {
        let b = scheme(5, 3, 4);
        let qs = b.queries(0, &example_key()).unwrap();
        // A, B, C, D = messages 0..3; index = column-code position.
        assert_eq!(
            b.symbolic_answer(&qs[0]),
            vec![Some(vec![t(2, 0)]), Some(vec![t(2, 1), t(3, 1)]), Some(vec![t(3, 2)])]
        );
        assert_eq!(b.symbolic_answer(&qs[2])[0], Some(vec![t(0, 0), t(2, 0)]));
        assert_eq!(b.symbolic_answer(&qs[3])[1], Some(vec![t(0, 1), t(2, 1), t(3, 1)]));
        assert_eq!(b.symbolic_answer(&qs[4])[2], Some(vec![t(0, 2), t(3, 2)]));
    }

    #[test]
    fn high_rate_exposed_positions() {
        let b = scheme(5, 3, 4);
        let sets = b.decoding_sets_high(0, &example_key()).unwrap();
        assert_eq!(sets.exposed, vec![vec![], vec![], vec![0, 2], vec![0, 1], vec![1, 2]]);
        assert_eq!(sets.usable, vec![2, 3, 4]);
        assert!(sets.interference.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn high_rate_recovers_example() {
        let b = scheme(5, 3, 4);
        let msgs = MessageSet::random(*b.params(), &mut ChaCha8Rng::seed_from_u64(21));
        let ans = answers(&b, &msgs, 0, &example_key());
        assert_eq!(ans.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 3, 3, 3]);
        assert_eq!(b.reconstruct(0, &example_key(), &ans).unwrap(), msgs.message(0));
    }

    #[test]
    fn high_rate_answer_values() {
        let b = scheme(5, 3, 4);
        let params = *b.params();
        let msgs = MessageSet::random(params, &mut ChaCha8Rng::seed_from_u64(22));
        let shards = encode_storage(b.code(), &msgs).unwrap();
        let cc = b.column_code().unwrap();
        let f = params.field();
        let tilde = |db: usize, k: usize| cc.encode(shards[db].coded_message(k)).unwrap();
        let q = b.gen_query(0, &example_key(), 0).unwrap();
        let a = b.gen_answer_high(&shards[0], &q).unwrap();
        assert_eq!(a.symbols, vec![tilde(0, 2)[0], f.add(tilde(0, 2)[1], tilde(0, 3)[1]), tilde(0, 3)[2]]);
    }

    #[test]
    fn low_rate_queries_and_grid() {
        let b = scheme(5, 2, 4);
        assert_eq!(b.regime(), BRegime::Low);
        let qs = b.queries(0, &example_key()).unwrap();
        let rows: Vec<Vec<usize>> = (0..4).map(|k| qs.iter().map(|q| q.entries[k]).collect()).collect();
        assert_eq!(rows, vec![vec![3, 3, 0, 1, 2], vec![3; 5], vec![1; 5], vec![2; 5]]);
        let grids: Vec<_> = qs.iter().map(|q| b.expand_low(q).unwrap()).collect();
        let expected = [
            vec![vec![3, 3], vec![3, 3], vec![1, 2], vec![2, 0]],
            vec![vec![3, 3], vec![3, 3], vec![1, 2], vec![2, 0]],
            vec![vec![0, 1], vec![3, 3], vec![1, 2], vec![2, 0]],
            vec![vec![1, 2], vec![3, 3], vec![1, 2], vec![2, 0]],
            vec![vec![2, 0], vec![3, 3], vec![1, 2], vec![2, 0]],
        ];
        assert_eq!(grids, expected);
    }

    #[test]
    fn low_rate_answer_structure() {
        let b = scheme(5, 2, 4);
        let qs = b.queries(0, &example_key()).unwrap();
        assert_eq!(
            b.symbolic_answer(&qs[0]),
            vec![Some(vec![t(2, 1), t(3, 2)]), Some(vec![t(2, 2), t(3, 0)])]
        );
        assert_eq!(
            b.symbolic_answer(&qs[4]),
            vec![Some(vec![t(0, 2), t(2, 1), t(3, 2)]), Some(vec![t(0, 0), t(2, 2), t(3, 0)])]
        );
    }

    #[test]
    fn low_rate_all_or_nothing() {
        let b = scheme(5, 2, 3);
        let q = QueryB { db_index: 0, entries: vec![3, 3, 3] };
        assert_eq!(b.answer_length(0, &q), 0);
        assert_eq!(b.symbolic_answer(&q), vec![None, None]);
        let q = QueryB { db_index: 0, entries: vec![3, 0, 3] };
        assert_eq!(b.answer_length(0, &q), 2);
    }

    #[test]
    fn low_rate_recovers_example() {
        let b = scheme(5, 2, 4);
        let msgs = MessageSet::random(*b.params(), &mut ChaCha8Rng::seed_from_u64(23));
        let ans = answers(&b, &msgs, 0, &example_key());
        assert_eq!(b.reconstruct(0, &example_key(), &ans).unwrap(), msgs.message(0));
        let sets = b.decoding_sets_low(0, &example_key()).unwrap();
        assert_eq!(sets.interference, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(sets.usable, vec![vec![2, 4], vec![2, 3], vec![3, 4]]);
    }

    #[test]
    fn exhaustive_recovery_both_regimes() {
        for (n, t) in [(5, 3), (5, 2)] {
            let b = scheme(n, t, 4);
            let params = *b.params();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 10 + t as u64);
            let msgs = MessageSet::random(params, &mut rng);
            let keys = key::enumerate(&params, u128::MAX).unwrap();
            assert_eq!(keys.len(), 125);
            for key in &keys {
                for k_star in 0..4 {
                    let ans = answers(&b, &msgs, k_star, key);
                    assert_eq!(b.reconstruct(k_star, key, &ans).unwrap(), msgs.message(k_star));
                }
            }
        }
    }

    #[test]
    fn zero_messages() {
        for (n, t) in [(5, 3), (5, 2)] {
            let b = scheme(n, t, 4);
            let msgs = MessageSet::zeros(*b.params());
            let ans = answers(&b, &msgs, 1, &example_key());
            assert!(ans.iter().flatten().all(|s| s.is_zero()));
            assert_eq!(b.reconstruct(1, &example_key(), &ans).unwrap(), vec![Symbol::ZERO; 6]);
        }
    }

    #[test]
    fn auxiliary_mode_gives_identical_answers() {
        for (n, t) in [(5, 3), (5, 2), (4, 2), (7, 4), (7, 2)] {
            let params = SystemParams::new(n, t, 3, SchemeTag::B).unwrap();
            let compressed = SchemeB::with_vandermonde(params).unwrap();
            let aux = compressed.clone().with_mode(QueryMode::Auxiliary);
            let msgs = MessageSet::random(params, &mut ChaCha8Rng::seed_from_u64(n as u64));
            for key in key::enumerate(&params, u128::MAX).unwrap() {
                for k_star in 0..3 {
                    let a = answers(&compressed, &msgs, k_star, &key);
                    let b = answers(&aux, &msgs, k_star, &key);
                    assert_eq!(a, b);
                    assert_eq!(aux.reconstruct(k_star, &key, &b).unwrap(), msgs.message(k_star));
                }
            }
        }
    }

    #[test]
    fn both_regime_runs_either_strategy() {
        let params = SystemParams::new(4, 2, 3, SchemeTag::B).unwrap();
        let code = MdsCode::build_vandermonde(2, 4, &params.field()).unwrap();
        let msgs = MessageSet::random(params, &mut ChaCha8Rng::seed_from_u64(4));
        for regime in [BRegime::High, BRegime::Low] {
            let b = SchemeB::with_regime(params, code.clone(), regime).unwrap();
            for key in key::enumerate(&params, u128::MAX).unwrap() {
                let ans = answers(&b, &msgs, 2, &key);
                assert_eq!(b.reconstruct(2, &key, &ans).unwrap(), msgs.message(2));
            }
        }
    }

    #[test]
    fn wrong_regime_errors() {
        let high = scheme(5, 3, 2);
        let q = QueryB { db_index: 0, entries: vec![0, 0] };
        assert!(matches!(high.expand_low(&q), Err(Error::WrongRegime { .. })));
        let params = SystemParams::new(5, 3, 2, SchemeTag::B).unwrap();
        let code = MdsCode::build_vandermonde(3, 5, &params.field()).unwrap();
        assert!(matches!(SchemeB::with_regime(params, code, BRegime::Low), Err(Error::WrongRegime { .. })));
        let low = scheme(5, 2, 2);
        let shards = encode_storage(low.code(), &MessageSet::zeros(*low.params())).unwrap();
        assert!(matches!(low.gen_answer_high(&shards[0], &q), Err(Error::WrongRegime { .. })));
    }

    #[test]
    fn upload_bounds() {
        let high = SchemeB::upload_cost_bits(&SystemParams::new(5, 3, 4, SchemeTag::B).unwrap(), BRegime::High);
        assert!((high.key_bits - 15.0 * 5f64.log2()).abs() < 1e-9);
        assert!((high.clamped_bits - 40.0).abs() < 1e-9);
        assert!((high.bits - 34.82892142331044).abs() < 1e-9);
        assert!(!high.clamped_wins);
        let low = SchemeB::upload_cost_bits(&SystemParams::new(5, 2, 4, SchemeTag::B).unwrap(), BRegime::Low);
        assert!((low.bits - 15.0 * 5f64.log2()).abs() < 1e-9);
        assert!((low.clamped_bits - 40.0).abs() < 1e-9);
        // r = 1: the key branch is the Construction-A cost.
        for (n, t) in [(3, 2), (4, 3), (7, 6)] {
            let p = SystemParams::new(n, t, 5, SchemeTag::B).unwrap();
            let bound = SchemeB::upload_cost_bits(&p, BRegime::High);
            assert!((bound.key_bits - crate::scheme_a::SchemeA::upload_cost_bits(&p)).abs() < 1e-9);
        }
        // Large k with r > 1 favours the clamped branch.
        let p = SystemParams::new(5, 3, 40, SchemeTag::B).unwrap();
        assert!(SchemeB::upload_cost_bits(&p, BRegime::High).clamped_wins);
    }

    #[test]
    fn wire_alphabet() {
        let b = scheme(5, 3, 4);
        assert!(b.decode_query(0, &[3, 3, 1, 2]).is_ok());
        assert!(b.decode_query(0, &[4, 3, 1, 2]).is_err());
        let aux = b.with_mode(QueryMode::Auxiliary);
        assert!(aux.decode_query(0, &[4, 3, 1, 2]).is_ok());
    }
}
