//! The two-message scheme with message size `t`: sample a few partitions,
//! show who is asked for what, and check the expected download.
//!
//! cargo run --example two_messages

use mds_pir::analysis::{expected_download, format_rational};
use mds_pir::{encode_storage, MessageSet, Scheme, SchemeK2, SchemeTag, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(5, 3, 2, SchemeTag::K2)?;
    let k2 = SchemeK2::with_vandermonde(params)?;
    println!("(n, t) = ({}, {}), message length {}", params.n, params.t, params.l);
    println!("sum strategy probability {}", format_rational(&k2.sum_probability()));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let msgs = MessageSet::random(params, &mut rng);
    let shards = encode_storage(k2.code(), &msgs)?;
    for k_star in [0, 1, 0] {
        let part = k2.sample_partition(&mut rng);
        let queries = k2.gen_queries(k_star, &part)?;
        let answers = queries.iter().zip(&shards).map(|(q, sh)| k2.answer(sh, q)).collect::<Result<Vec<_>, _>>()?;
        let got = k2.reconstruct(k_star, &part, &answers)?;
        let downloaded: usize = answers.iter().map(Vec::len).sum();
        println!("want {k_star}: {:?} {:?} -> {downloaded} symbols, correct {}", part.strategy, queries, got == msgs.message(k_star));
    }

    let profile = expected_download(&k2)?;
    println!(
        "expected download {} over {} partitions, closed form {}",
        format_rational(profile.mean().expect("symmetric")),
        profile.enumeration_size,
        format_rational(&k2.expected_download())
    );
    Ok(())
}
