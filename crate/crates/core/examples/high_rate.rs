//! Clamped queries in the high-rate regime, `n = 5, t = 3, k = 4`.
//!
//! Prints the pattern matrix, one set of queries with their answers, the
//! decoding sets, and checks the reconstruction.
//!
//! cargo run --example high_rate

use mds_pir::scheme::key;
use mds_pir::{encode_storage, MessageSet, RandomKey, Scheme, SchemeB, SchemeTag, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(5, 3, 4, SchemeTag::B)?;
    let b = SchemeB::with_vandermonde(params)?;
    println!("{} with r = {}, s = {}, message length {}", b.name(), params.r, params.s, params.l);

    let pattern = b.pattern().expect("high-rate scheme has a pattern");
    println!("pattern matrix:");
    for i in 0..params.s {
        let row: Vec<_> = (0..params.s + params.r).map(|j| if pattern.get(i, j) { '1' } else { '0' }).collect();
        println!("  {}", row.iter().collect::<String>());
    }

    let key = RandomKey::new(vec![3, 4, 1, 2], params.modulus())?;
    let k_star = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let msgs = MessageSet::random(params, &mut rng);
    let shards = encode_storage(b.code(), &msgs)?;
    let mut answers = Vec::new();
    for (db, shard) in shards.iter().enumerate() {
        let q = b.gen_query(k_star, &key, db)?;
        let ans = b.gen_answer(shard, &q)?;
        println!("db{} query {:?} aux {:?} -> rows {:?}", db + 1, q.entries, b.auxiliary_query(k_star, &key, db)?, ans.kept_positions);
        answers.push(ans.symbols);
    }
    let sets = b.decoding_sets_high(k_star, &key)?;
    println!("interference sets {:?}", sets.interference);
    println!("usable databases {:?}", sets.usable);

    let got = b.reconstruct(k_star, &key, &answers)?;
    println!("reconstructed message A: {}", got == msgs.message(k_star));
    println!("key space {} keys", key::space_size(&params));
    Ok(())
}
