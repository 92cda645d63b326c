//! Exact verification of capacity, privacy, decoding-set sizes, upload cost
//! and the structural properties P0/P1 of the implemented schemes.
//!
//! Everything except the upload-cost reports uses exact rational or
//! finite-field arithmetic over full enumerations of the user's randomness.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{dispatch, AnyScheme};
use crate::matrix::Matrix;
use crate::mds::{encode_storage, MessageSet};
use crate::params::{min_message_size, SchemeTag, SystemParams};
use crate::scheme::{key, Scheme};
use crate::scheme_a::SchemeA;
use crate::scheme_b::{BRegime, QueryMode, SchemeB};
use crate::scheme_k2::{Group, SchemeK2, Strategy};

/// Tolerance for the logarithmic upload-cost comparisons.
pub const UPLOAD_TOLERANCE: f64 = 1e-9;

/// Renders a rational as `num/den`, denominators included even when 1.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `(1 + t/n + ... + (t/n)^(k-1))^-1`.
pub fn capacity(n: usize, t: usize, k: usize) -> Result<BigRational> {
    if t == 0 || t >= n || k == 0 {
        return Err(Error::InvalidParams(format!("capacity needs 0 < t < n and k >= 1, got ({n}, {t}, {k})")));
    }
    let x = ratio(t, n);
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for _ in 0..k {
        sum += &term;
        term *= &x;
    }
    Ok(sum.recip())
}

/// `s n (1 - (t/n)^k)`, the download of the key-indexed constructions.
pub fn predicted_download(params: &SystemParams) -> BigRational {
    if params.scheme == SchemeTag::K2 {
        return ratio(params.t * (params.n + params.t), params.n);
    }
    let x = ratio(params.t, params.n);
    let mut pow = BigRational::one();
    for _ in 0..params.k {
        pow *= &x;
    }
    BigRational::from_integer(BigInt::from(params.s * params.n)) * (BigRational::one() - pow)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub params: SystemParams,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub enumeration_size: u64,
    pub ms: f64,
}

impl VerificationReport {
    fn exact(claim: String, params: &SystemParams, expected: String, observed: String, size: usize) -> Self {
        let pass = expected == observed;
        VerificationReport { claim, params: *params, expected, observed, pass, enumeration_size: size as u64, ms: 0.0 }
    }

    fn timed(mut self, start: Instant, timing: bool) -> Self {
        self.ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        self
    }
}

/// Exact expected download for every requested message.
#[derive(Clone, Debug, PartialEq)]
pub struct DownloadProfile {
    pub per_request: Vec<BigRational>,
    pub enumeration_size: usize,
}

impl DownloadProfile {
    /// The common value, if the expectation does not depend on the request.
    pub fn mean(&self) -> Option<&BigRational> {
        let first = self.per_request.first()?;
        self.per_request.iter().all(|x| x == first).then_some(first)
    }
}

pub fn expected_download<S: Scheme>(scheme: &S) -> Result<DownloadProfile> {
    let all = scheme.enumerate_randomness()?;
    let mut per_request = Vec::with_capacity(scheme.params().k);
    for k_star in 0..scheme.params().k {
        let mut total = BigRational::zero();
        for (rand, w) in &all {
            let qs = scheme.queries(k_star, rand)?;
            let d: usize = qs.iter().enumerate().map(|(db, q)| scheme.answer_length(db, q)).sum();
            total += w * BigInt::from(d);
        }
        per_request.push(total);
    }
    Ok(DownloadProfile { per_request, enumeration_size: all.len() })
}

/// Number of databases whose query distribution differs between requests,
/// and the number of (randomness, request) pairs enumerated.
pub fn privacy_violations<S: Scheme>(scheme: &S) -> Result<(usize, usize)> {
    let all = scheme.enumerate_randomness()?;
    let (n, k) = (scheme.params().n, scheme.params().k);
    let mut dists: Vec<Vec<BTreeMap<S::Query, BigRational>>> = vec![vec![BTreeMap::new(); k]; n];
    for k_star in 0..k {
        for (rand, w) in &all {
            for (db, q) in scheme.queries(k_star, rand)?.into_iter().enumerate() {
                *dists[db][k_star].entry(q).or_insert_with(BigRational::zero) += w;
            }
        }
    }
    let violations = dists.iter().filter(|per_k| per_k.iter().any(|d| d != &per_k[0])).count();
    Ok((violations, all.len() * k))
}

pub fn verify_privacy<S: Scheme>(scheme: &S, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let (violations, size) = privacy_violations(scheme)?;
    Ok(VerificationReport::exact(
        format!("{}:privacy", scheme.name()),
        scheme.params(),
        "0".into(),
        violations.to_string(),
        size,
    )
    .timed(start, timing))
}

pub fn verify_rate<S: Scheme>(scheme: &S, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let p = scheme.params();
    let profile = expected_download(scheme)?;
    let observed = match profile.mean() {
        Some(e) => format_rational(&(ratio(p.l, 1) / e)),
        None => "request-dependent".into(),
    };
    Ok(VerificationReport::exact(
        format!("{}:rate", scheme.name()),
        p,
        format_rational(&capacity(p.n, p.t, p.k)?),
        observed,
        profile.enumeration_size * p.k,
    )
    .timed(start, timing))
}

pub fn verify_expected_download<S: Scheme>(scheme: &S, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let p = scheme.params();
    let profile = expected_download(scheme)?;
    let observed = match profile.mean() {
        Some(e) => format_rational(e),
        None => profile.per_request.iter().map(format_rational).collect::<Vec<_>>().join(","),
    };
    Ok(VerificationReport::exact(
        format!("{}:expected_download", scheme.name()),
        p,
        format_rational(&predicted_download(p)),
        observed,
        profile.enumeration_size * p.k,
    )
    .timed(start, timing))
}

/// Decoding-set size violations over every (request, key) pair.
pub fn decoding_set_violations_a(a: &SchemeA) -> Result<(usize, usize)> {
    let p = a.params();
    let keys = key::enumerate(p, crate::scheme_a::ENUMERATION_CAP)?;
    let mut bad = 0;
    for k_star in 0..p.k {
        for key in &keys {
            bad += usize::from(!a.decoding_sets(k_star, key)?.all_sizes_equal(p.t));
        }
    }
    Ok((bad, keys.len() * p.k))
}

/// High rate: `|T~_i| = t`, `|N| = t` and `|S_n| = r` for `n` in `N`. Low
/// rate: `|T_i| = |N_m| = t` and every `T_i` is the same set.
pub fn decoding_set_violations_b(b: &SchemeB) -> Result<(usize, usize)> {
    let p = b.params();
    let keys = key::enumerate(p, crate::scheme_a::ENUMERATION_CAP)?;
    let mut bad = 0;
    for k_star in 0..p.k {
        for key in &keys {
            let ok = match b.regime() {
                BRegime::High => {
                    let sets = b.decoding_sets_high(k_star, key)?;
                    sets.interference.iter().all(|s| s.len() == p.t)
                        && sets.usable.len() == p.t
                        && sets.usable.iter().all(|&db| sets.exposed[db].len() == p.r)
                }
                BRegime::Low => {
                    let sets = b.decoding_sets_low(k_star, key)?;
                    sets.all_sizes_equal(p.t) && sets.interference.iter().all(|s| s == &sets.interference[0])
                }
            };
            bad += usize::from(!ok);
        }
    }
    Ok((bad, keys.len() * p.k))
}

/// The side-information and requested-message decoders each see exactly `t`
/// code symbols.
pub fn decoding_set_violations_k2(s: &SchemeK2) -> Result<(usize, usize)> {
    let t = s.params().t;
    let all = s.enumerate_randomness()?;
    let bad = all
        .iter()
        .filter(|(p, _)| match p.strategy {
            Strategy::Sum => {
                let both = p.members(Group::Both).len();
                both + p.members(Group::Other).len() != t || both + p.members(Group::SumOnly).len() != t
            }
            Strategy::Direct => p.members(Group::Requested).len() != t,
        })
        .count();
    Ok((bad, all.len()))
}

pub fn verify_decoding_sets(inst: &AnyScheme, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let (bad, size) = match inst {
        AnyScheme::A(a) => decoding_set_violations_a(a)?,
        AnyScheme::B(b) => decoding_set_violations_b(b)?,
        AnyScheme::K2(s) => decoding_set_violations_k2(s)?,
    };
    Ok(VerificationReport::exact(
        format!("{}:decoding_sets", inst.name()),
        inst.params(),
        "0".into(),
        bad.to_string(),
        size,
    )
    .timed(start, timing))
}

/// The `answer_length x (l k)` matrix mapping the flattened messages to the
/// answer of database `db`, found by probing with unit messages.
pub fn extract_coefficients<S: Scheme>(scheme: &S, query: &S::Query, db: usize) -> Result<Matrix> {
    let queries = vec![(db, query.clone())];
    Ok(extract_all(scheme, &queries)?.pop().expect("one matrix"))
}

/// Coefficient matrices for several `(db, query)` pairs at once.
pub fn extract_all<S: Scheme>(scheme: &S, queries: &[(usize, S::Query)]) -> Result<Vec<Matrix>> {
    let p = *scheme.params();
    let f = p.field();
    let width = p.l * p.k;
    let mut columns: Vec<Vec<Vec<_>>> =
        queries.iter().map(|(db, q)| vec![Vec::with_capacity(width); scheme.answer_length(*db, q)]).collect();
    let mut flat = vec![crate::Symbol::ZERO; width];
    for j in 0..width {
        flat[j] = crate::Symbol::ONE;
        let shards = encode_storage(scheme.code(), &MessageSet::from_flat(p, &flat)?)?;
        flat[j] = crate::Symbol::ZERO;
        for ((db, q), rows) in queries.iter().zip(columns.iter_mut()) {
            for (row, v) in rows.iter_mut().zip(scheme.answer(&shards[*db], q)?) {
                row.push(v);
            }
        }
    }
    columns
        .into_iter()
        .map(|rows| if rows.is_empty() { Ok(Matrix::zeros(&f, 0, width)) } else { Matrix::from_rows(&f, &rows) })
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    crate::mds::for_each_subset(n, k, |s| out.push(s.to_vec()));
    out
}

/// Message subsets `J` to condition on: all of them for `k <= 4`, otherwise
/// those of size at most two plus the full set. With `containing`, only sets
/// holding that message.
pub fn j_sweep(k: usize, containing: Option<usize>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = if k <= 4 {
        (0..1usize << k).map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect()).collect()
    } else {
        let mut v = vec![Vec::new()];
        v.extend((0..k).map(|i| vec![i]));
        v.extend(subsets(k, 2));
        v.push((0..k).collect());
        v
    };
    if let Some(m) = containing {
        out.retain(|j| j.contains(&m));
    }
    out
}

fn restrict(m: &Matrix, params: &SystemParams, j: &[usize]) -> Matrix {
    let cols: Vec<usize> =
        (0..params.k).filter(|k| !j.contains(k)).flat_map(|k| k * params.l..(k + 1) * params.l).collect();
    m.select_columns(&cols)
}

fn stack(field: &crate::Field, parts: &[&Matrix], cols: usize) -> Result<Matrix> {
    parts.iter().try_fold(Matrix::zeros(field, 0, cols), |acc, m| acc.vstack(m))
}

/// Number of `t`-subsets whose answers, with the messages in `J` removed,
/// fail rank additivity.
pub fn p0_violations(coeffs: &[Matrix], params: &SystemParams, j: &[usize]) -> Result<usize> {
    let f = params.field();
    let restricted: Vec<Matrix> = coeffs.iter().map(|m| restrict(m, params, j)).collect();
    let cols = params.l * (params.k - j.len());
    let ranks: Vec<usize> = restricted.iter().map(Matrix::rank).collect();
    let mut bad = 0;
    for subset in subsets(params.n, params.t) {
        let parts: Vec<&Matrix> = subset.iter().map(|&db| &restricted[db]).collect();
        let joint = stack(&f, &parts, cols)?.rank();
        bad += usize::from(joint != subset.iter().map(|&db| ranks[db]).sum::<usize>());
    }
    Ok(bad)
}

/// Number of (`t`-subset, outside database) pairs where the outside answer,
/// with the messages in `J` removed, is not determined by the subset's.
pub fn p1_violations(coeffs: &[Matrix], params: &SystemParams, j: &[usize]) -> Result<usize> {
    let f = params.field();
    let restricted: Vec<Matrix> = coeffs.iter().map(|m| restrict(m, params, j)).collect();
    let cols = params.l * (params.k - j.len());
    let mut bad = 0;
    for subset in subsets(params.n, params.t) {
        let parts: Vec<&Matrix> = subset.iter().map(|&db| &restricted[db]).collect();
        let span = stack(&f, &parts, cols)?;
        for other in (0..params.n).filter(|db| !subset.contains(db)) {
            bad += usize::from(!span.row_space_contains(&restricted[other])?);
        }
    }
    Ok(bad)
}

/// Realizations for the structural checks: every (request, randomness) pair
/// when there are at most `samples` of them, otherwise `samples` draws.
pub fn structural_realizations<S: Scheme>(
    scheme: &S,
    samples: usize,
    seed: u64,
) -> Result<Vec<(usize, S::Randomness)>> {
    let k = scheme.params().k;
    match scheme.enumerate_randomness() {
        Ok(all) if all.len() * k <= samples => {
            Ok((0..k).flat_map(|k_star| all.iter().map(move |(r, _)| (k_star, r.clone()))).collect())
        }
        Ok(_) | Err(Error::EnumerationTooLarge { .. }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..samples).map(|_| (rng.random_range(0..k), scheme.sample(&mut rng))).collect())
        }
        Err(e) => Err(e),
    }
}

/// P0 and P1 violation counts over the given realizations and the full
/// `J` sweeps.
pub fn structural_violations<S: Scheme>(
    scheme: &S,
    realizations: &[(usize, S::Randomness)],
) -> Result<(usize, usize)> {
    let p = *scheme.params();
    let (mut p0, mut p1) = (0, 0);
    let all_j = j_sweep(p.k, None);
    for (k_star, rand) in realizations {
        let queries: Vec<_> = scheme.queries(*k_star, rand)?.into_iter().enumerate().collect();
        let coeffs = extract_all(scheme, &queries)?;
        for j in &all_j {
            if j.len() < p.k {
                p0 += p0_violations(&coeffs, &p, j)?;
            }
            if j.contains(k_star) {
                p1 += p1_violations(&coeffs, &p, j)?;
            }
        }
    }
    Ok((p0, p1))
}

pub fn verify_p0_p1<S: Scheme>(
    scheme: &S,
    samples: usize,
    seed: u64,
    timing: bool,
) -> Result<[VerificationReport; 2]> {
    let start = Instant::now();
    let realizations = structural_realizations(scheme, samples, seed)?;
    let (p0, p1) = structural_violations(scheme, &realizations)?;
    let p = scheme.params();
    let n = realizations.len();
    Ok([
        VerificationReport::exact(format!("{}:p0", scheme.name()), p, "0".into(), p0.to_string(), n)
            .timed(start, timing),
        VerificationReport::exact(format!("{}:p1", scheme.name()), p, "0".into(), p1.to_string(), n)
            .timed(start, timing),
    ])
}

/// Retrieves one random message in-process and reports its length.
pub fn verify_message_size<S: Scheme>(scheme: &S, seed: u64, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let p = *scheme.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let msgs = MessageSet::random(p, &mut rng);
    let shards = encode_storage(scheme.code(), &msgs)?;
    let k_star = rng.random_range(0..p.k);
    let rand = scheme.sample(&mut rng);
    let answers = scheme
        .queries(k_star, &rand)?
        .iter()
        .enumerate()
        .map(|(db, q)| scheme.answer(&shards[db], q))
        .collect::<Result<Vec<_>>>()?;
    let out = scheme.reconstruct(k_star, &rand, &answers)?;
    let observed = if out == msgs.message(k_star) { out.len().to_string() } else { "mismatch".into() };
    let expected = match p.scheme {
        SchemeTag::K2 => p.t,
        _ => min_message_size(p.n, p.t),
    };
    Ok(VerificationReport::exact(format!("{}:message_size", scheme.name()), &p, expected.to_string(), observed, 1)
        .timed(start, timing))
}

fn entropy_bits(dist: &BTreeMap<impl Ord, BigRational>) -> f64 {
    dist.values()
        .map(|w| w.to_f64().unwrap_or(0.0))
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.log2())
        .sum()
}

fn approx(claim: String, params: &SystemParams, expected: f64, observed: f64, size: usize) -> VerificationReport {
    VerificationReport {
        claim,
        params: *params,
        expected: format!("{expected:.9}"),
        observed: format!("{observed:.9}"),
        pass: (expected - observed).abs() < UPLOAD_TOLERANCE,
        enumeration_size: size as u64,
        ms: 0.0,
    }
}

/// Summary of what the user uploads under Construction-A.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UploadProfileA {
    /// `sum_n H(Q_n)` from the enumerated query distribution.
    pub entropy_bits: f64,
    /// `n (k - 1) log2(r + s)`.
    pub predicted_bits: f64,
    /// `sum_n ceil(log2 |supp Q_n|)`: the compact index encoding.
    pub compact_bits: u64,
    /// Query payload bytes on the wire (one byte per entry).
    pub wire_bytes: u64,
    pub enumeration_size: usize,
}

pub fn upload_profile_a(a: &SchemeA) -> Result<UploadProfileA> {
    let p = a.params();
    let all = a.enumerate_randomness()?;
    let mut dists = vec![BTreeMap::new(); p.n];
    let mut wire_bytes = 0u64;
    for (i, (key, w)) in all.iter().enumerate() {
        for (db, q) in a.queries(0, key)?.into_iter().enumerate() {
            if i == 0 {
                wire_bytes += a.encode_query(&q).len() as u64;
            }
            *dists[db].entry(a.query_index(&q)).or_insert_with(BigRational::zero) += w;
        }
    }
    let compact_bits = dists.iter().map(|d| (d.len() as u64).next_power_of_two().trailing_zeros() as u64).sum();
    Ok(UploadProfileA {
        entropy_bits: dists.iter().map(entropy_bits).sum(),
        predicted_bits: SchemeA::upload_cost_bits(p),
        compact_bits,
        wire_bytes,
        enumeration_size: all.len(),
    })
}

pub fn verify_upload_a(a: &SchemeA, timing: bool) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    let p = a.params();
    let u = upload_profile_a(a)?;
    let claim = |c: &str| format!("{}:{c}", a.name());
    let per_db_space = key::space_size(p);
    let expected_compact = p.n as u64 * (per_db_space as u64).next_power_of_two().trailing_zeros() as u64;
    let mut compact = VerificationReport::exact(
        claim("upload_compact_bits"),
        p,
        expected_compact.to_string(),
        u.compact_bits.to_string(),
        u.enumeration_size,
    );
    compact.pass &= u.entropy_bits <= u.compact_bits as f64 + UPLOAD_TOLERANCE && u.compact_bits <= 8 * u.wire_bytes;
    Ok(vec![
        approx(claim("upload_entropy_bits"), p, u.predicted_bits, u.entropy_bits, u.enumeration_size)
            .timed(start, timing),
        compact.timed(start, timing),
        VerificationReport::exact(
            claim("upload_wire_bytes"),
            p,
            (p.n * p.k).to_string(),
            u.wire_bytes.to_string(),
            1,
        )
        .timed(start, timing),
    ])
}

/// Observed upload bound for Construction-B: the smaller of the auxiliary
/// query entropy support `sum_n log2 |supp Q~_n|` and `n k log2` of the
/// number of distinct clamped entry values seen.
pub fn observed_upload_bound_b(b: &SchemeB) -> Result<(f64, usize)> {
    let p = b.params();
    let keys = key::enumerate(p, crate::scheme_a::ENUMERATION_CAP)?;
    let mut aux_support: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); p.n];
    let mut values = BTreeSet::new();
    let compressed = b.clone().with_mode(QueryMode::Compressed);
    for k_star in 0..p.k {
        for key in &keys {
            for db in 0..p.n {
                aux_support[db].insert(b.auxiliary_query(k_star, key, db)?);
                values.extend(compressed.gen_query(k_star, key, db)?.entries);
            }
        }
    }
    let key_bits: f64 = aux_support.iter().map(|s| (s.len() as f64).log2()).sum();
    let clamped_bits = (p.n * p.k) as f64 * (values.len() as f64).log2();
    Ok((key_bits.min(clamped_bits), keys.len() * p.k))
}

pub fn verify_upload_b(b: &SchemeB, timing: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let p = b.params();
    let (observed, size) = observed_upload_bound_b(b)?;
    let expected = SchemeB::upload_cost_bits(p, b.regime()).bits;
    Ok(approx(format!("{}:upload_bound_bits", b.name()), p, expected, observed, size).timed(start, timing))
}

/// Knobs for [`verify_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Realizations for the P0/P1 checks when exhaustive checking is larger.
    pub structural_samples: usize,
    pub seed: u64,
    pub timing: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { structural_samples: 200, seed: 0, timing: true }
    }
}

/// Every report applicable to the instance.
pub fn verify_suite(inst: &AnyScheme, opts: SuiteOptions) -> Result<Vec<VerificationReport>> {
    let t = opts.timing;
    let mut out = Vec::new();
    dispatch!(inst, s => {
        out.push(verify_rate(s, t)?);
        out.push(verify_expected_download(s, t)?);
        out.push(verify_privacy(s, t)?);
    });
    out.push(verify_decoding_sets(inst, t)?);
    dispatch!(inst, s => {
        out.extend(verify_p0_p1(s, opts.structural_samples, opts.seed, t)?);
        out.push(verify_message_size(s, opts.seed, t)?);
    });
    match inst {
        AnyScheme::A(a) => out.extend(verify_upload_a(a, t)?),
        AnyScheme::B(b) => out.push(verify_upload_b(b, t)?),
        AnyScheme::K2(_) => {}
    }
    Ok(out)
}

/// `lcm(n - t, t)` for the key-indexed schemes, `t` for the k2 scheme.
pub fn expected_message_size(params: &SystemParams) -> usize {
    match params.scheme {
        SchemeTag::K2 => params.t,
        _ => (params.n - params.t).lcm(&params.t),
    }
}
