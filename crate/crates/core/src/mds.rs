//! MDS codes, message sets and per-database storage.
//!
//! Every sub-message `W^{k,m}` (a length-`t` row vector) is encoded by the
//! base `(n, t)` code independently, so database `n` stores
//! `V^{k,m}_n = W^{k,m} . g_n` where `g_n` is column `n` of the generator.
//! Messages are never mixed in storage.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::params::SystemParams;

/// Largest code length for which [`MdsCode::verify_mds`] enumerates minors.
pub const VERIFY_MDS_CAP: usize = 20;

/// A linear `(n, t)` code given by its `t x n` generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdsCode {
    t: usize,
    n: usize,
    generator: Matrix,
}

impl MdsCode {
    /// Vandermonde generator: column `j` is `(1, a_j, a_j^2, ..., a_j^(t-1))`.
    ///
    /// The evaluation points are the elements with representations `1..=n`.
    /// When `n` equals the field order there are only `n - 1` nonzero
    /// elements, so the points become `0..n` instead; distinct points are
    /// all that the MDS property needs.
    pub fn build_vandermonde(t: usize, n: usize, field: &Field) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::DimensionMismatch(format!("({n}, {t}) is not a valid code shape")));
        }
        let order = field.order() as usize;
        if order < n {
            return Err(Error::FieldTooSmall { order: field.order(), length: n });
        }
        let offset = if n < order { 1 } else { 0 };
        let mut g = Matrix::zeros(field, t, n);
        for j in 0..n {
            let alpha = Symbol::from_raw((j + offset) as u16);
            let mut power = Symbol::ONE;
            for i in 0..t {
                g.set(i, j, power);
                power = field.mul(power, alpha);
            }
        }
        Ok(MdsCode { t, n, generator: g })
    }

    /// Wraps an arbitrary generator. The MDS property is not checked here;
    /// see [`MdsCode::verify_mds`].
    pub fn from_generator(generator: Matrix) -> Self {
        MdsCode { t: generator.rows(), n: generator.cols(), generator }
    }

    /// The equivalent systematic code `G_{:,0..t}^{-1} G`, whose first `t`
    /// coordinates are the message itself.
    pub fn systematic(&self) -> Result<Self> {
        let head: Vec<usize> = (0..self.t).collect();
        let inv = self.generator.select_columns(&head).inverse()?;
        Ok(MdsCode::from_generator(inv.mul(&self.generator)?))
    }

    pub fn dimension(&self) -> usize {
        self.t
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        self.generator.field()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Generator column `idx`.
    pub fn column(&self, idx: usize) -> Vec<Symbol> {
        self.generator.column(idx)
    }

    /// Coordinate `idx` of the codeword of `w`.
    pub fn encode_at(&self, w: &[Symbol], idx: usize) -> Symbol {
        debug_assert_eq!(w.len(), self.t);
        let f = self.field();
        (0..self.t).fold(Symbol::ZERO, |acc, i| f.add(acc, f.mul(w[i], self.generator.get(i, idx))))
    }

    pub fn encode(&self, w: &[Symbol]) -> Result<Vec<Symbol>> {
        self.generator.vec_mul(w)
    }

    /// Recovers the message `w` from codeword coordinates.
    ///
    /// Points are sorted by index and the first `t` distinct ones are used
    /// for the solve. Any further points must agree with the result.
    pub fn decode_any_t(&self, points: &[(usize, Symbol)]) -> Result<Vec<Symbol>> {
        let mut sorted = points.to_vec();
        sorted.sort_by_key(|&(i, _)| i);
        let mut basis: Vec<(usize, Symbol)> = Vec::with_capacity(self.t);
        for &(idx, value) in &sorted {
            if idx >= self.n {
                return Err(Error::IndexOutOfRange { index: idx, bound: self.n });
            }
            match basis.last() {
                Some(&(last, v)) if last == idx => {
                    if v != value {
                        return Err(Error::InconsistentPoints);
                    }
                }
                _ if basis.len() < self.t => basis.push((idx, value)),
                _ => {}
            }
        }
        if basis.len() < self.t {
            return Err(Error::InsufficientPoints { needed: self.t, got: basis.len() });
        }
        let cols: Vec<usize> = basis.iter().map(|&(i, _)| i).collect();
        let y: Vec<Symbol> = basis.iter().map(|&(_, v)| v).collect();
        let system = self.generator.select_columns(&cols).transpose();
        let w = system.solve(&y)?;
        for &(idx, value) in &sorted {
            if self.encode_at(&w, idx) != value {
                return Err(Error::InconsistentPoints);
            }
        }
        Ok(w)
    }

    /// Checks that every `t x t` column minor is invertible.
    pub fn verify_mds(&self) -> Result<bool> {
        if self.n > VERIFY_MDS_CAP {
            return Err(Error::TooLarge { cap: VERIFY_MDS_CAP, got: self.n });
        }
        let mut ok = true;
        for_each_subset(self.n, self.t, |cols| {
            if ok && self.generator.select_columns(cols).rank() < self.t {
                ok = false;
            }
        });
        Ok(ok)
    }
}

/// Calls `f` on every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The `k` messages, `l` symbols each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageSet {
    params: SystemParams,
    symbols: Vec<Vec<Symbol>>,
}

impl MessageSet {
    pub fn new(params: SystemParams, symbols: Vec<Vec<Symbol>>) -> Result<Self> {
        if symbols.len() != params.k || symbols.iter().any(|m| m.len() != params.l) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} messages of {} symbols",
                params.k, params.l
            )));
        }
        let field = params.field();
        if let Some(bad) = symbols.iter().flatten().find(|s| !field.contains(**s)) {
            return Err(Error::InvalidSymbol { value: bad.value().into(), order: field.order() });
        }
        Ok(MessageSet { params, symbols })
    }

    pub fn zeros(params: SystemParams) -> Self {
        MessageSet { params, symbols: vec![vec![Symbol::ZERO; params.l]; params.k] }
    }

    pub fn random<R: Rng + ?Sized>(params: SystemParams, rng: &mut R) -> Self {
        let field = params.field();
        let symbols = (0..params.k).map(|_| field.random_vec(rng, params.l)).collect();
        MessageSet { params, symbols }
    }

    /// Message-major flattening: coordinate `k * l + j` is symbol `j` of message `k`.
    pub fn from_flat(params: SystemParams, flat: &[Symbol]) -> Result<Self> {
        if flat.len() != params.k * params.l {
            return Err(Error::DimensionMismatch(format!(
                "{} symbols for {} messages of {}",
                flat.len(),
                params.k,
                params.l
            )));
        }
        MessageSet::new(params, flat.chunks(params.l).map(<[Symbol]>::to_vec).collect())
    }

    pub fn flatten(&self) -> Vec<Symbol> {
        self.symbols.concat()
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn message(&self, k: usize) -> &[Symbol] {
        &self.symbols[k]
    }

    /// `W^{k,m}`; pseudo sub-messages (`m >= m_count`) are all-zero.
    pub fn sub_message(&self, k: usize, m: usize) -> Vec<Symbol> {
        let t = self.params.t;
        if m < self.params.m {
            self.symbols[k][m * t..(m + 1) * t].to_vec()
        } else {
            vec![Symbol::ZERO; t]
        }
    }

    /// Message `k` as an `m x t` matrix whose rows are the sub-messages.
    pub fn message_matrix(&self, k: usize) -> Matrix {
        let f = self.params.field();
        Matrix::from_vec(&f, self.params.m, self.params.t, self.symbols[k].clone())
            .expect("shape fixed by params")
    }
}

/// Content stored at one database: `V^{k,m}_n` for every message and sub-message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub db_index: usize,
    pub k: usize,
    pub m: usize,
    cells: Vec<Symbol>,
}

impl Shard {
    pub fn new(db_index: usize, k: usize, m: usize, cells: Vec<Symbol>) -> Result<Self> {
        if cells.len() != k * m {
            return Err(Error::DimensionMismatch(format!("{} cells for a {k}x{m} shard", cells.len())));
        }
        Ok(Shard { db_index, k, m, cells })
    }

    /// `V^{k,m}_n`, zero for pseudo indices `m >= self.m`.
    #[inline]
    pub fn cell(&self, k: usize, m: usize) -> Symbol {
        if m < self.m {
            self.cells[k * self.m + m]
        } else {
            Symbol::ZERO
        }
    }

    /// The length-`m` vector `V^k_n`.
    pub fn coded_message(&self, k: usize) -> &[Symbol] {
        &self.cells[k * self.m..(k + 1) * self.m]
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    /// Raw dump: `db_index`, `k`, `m` as big-endian u32, then one big-endian
    /// u16 per cell.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 2 * self.cells.len());
        for v in [self.db_index, self.k, self.m] {
            out.extend_from_slice(&(v as u32).to_be_bytes());
        }
        for c in &self.cells {
            out.extend_from_slice(&c.value().to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || !(bytes.len() - 12).is_multiple_of(2) {
            return Err(Error::DimensionMismatch("truncated shard dump".into()));
        }
        let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        let cells = bytes[12..]
            .chunks_exact(2)
            .map(|c| Symbol::from_raw(u16::from_be_bytes([c[0], c[1]])))
            .collect();
        Shard::new(word(0), word(1), word(2), cells)
    }
}

/// Encodes the shard held by database `db`.
pub fn encode_shard(code: &MdsCode, msgs: &MessageSet, db: usize) -> Result<Shard> {
    let params = msgs.params();
    if code.dimension() != params.t || code.length() != params.n {
        return Err(Error::DimensionMismatch(format!(
            "({}, {}) code for n = {}, t = {}",
            code.length(),
            code.dimension(),
            params.n,
            params.t
        )));
    }
    if db >= params.n {
        return Err(Error::IndexOutOfRange { index: db, bound: params.n });
    }
    let mut cells = Vec::with_capacity(params.k * params.m);
    for k in 0..params.k {
        for m in 0..params.m {
            cells.push(code.encode_at(&msgs.sub_message(k, m), db));
        }
    }
    Shard::new(db, params.k, params.m, cells)
}

/// Encodes all `n` shards.
pub fn encode_storage(code: &MdsCode, msgs: &MessageSet) -> Result<Vec<Shard>> {
    (0..msgs.params().n).map(|db| encode_shard(code, msgs, db)).collect()
}

/// Recovers every message from any `t` shards.
pub fn decode_storage(code: &MdsCode, shards: &[&Shard], params: SystemParams) -> Result<MessageSet> {
    let mut symbols = vec![Vec::with_capacity(params.l); params.k];
    for (k, msg) in symbols.iter_mut().enumerate() {
        for m in 0..params.m {
            let points: Vec<_> = shards.iter().map(|s| (s.db_index, s.cell(k, m))).collect();
            msg.extend(code.decode_any_t(&points)?);
        }
    }
    MessageSet::new(params, symbols)
}
