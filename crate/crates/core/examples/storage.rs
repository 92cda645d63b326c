//! Encode a message set across databases and recover it from any `t` shards.
//!
//! cargo run --example storage

use mds_pir::mds::{decode_storage, for_each_subset};
use mds_pir::{encode_storage, MdsCode, MessageSet, SchemeTag, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(5, 3, 4, SchemeTag::B)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let msgs = MessageSet::random(params, &mut rng);
    let code = MdsCode::build_vandermonde(params.t, params.n, &params.field())?;
    println!("(n, t, k) = ({}, {}, {}), message length {} over GF({})", params.n, params.t, params.k, params.l, params.q);
    println!("code is MDS: {}", code.verify_mds()?);

    let shards = encode_storage(&code, &msgs)?;
    for s in &shards {
        println!("db{}: {} symbols, {} bytes serialized", s.db_index, s.cells().len(), s.to_bytes().len());
    }

    let mut recovered = 0;
    let mut err = None;
    for_each_subset(params.n, params.t, |dbs| {
        let picked: Vec<_> = dbs.iter().map(|&d| &shards[d]).collect();
        match decode_storage(&code, &picked, params) {
            Ok(m) if m == msgs => recovered += 1,
            Ok(_) => err = Some(format!("subset {dbs:?} decoded to the wrong messages")),
            Err(e) => err = Some(e.to_string()),
        }
    });
    if let Some(e) = err {
        eprintln!("{e}");
        std::process::exit(1);
    }
    println!("recovered all messages from each of {recovered} subsets of {} databases", params.t);
    Ok(())
}
