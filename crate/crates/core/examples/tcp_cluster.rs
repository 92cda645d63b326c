//! Databases served over local TCP sockets. Retrieves every message a few
//! times, prints one transcript, and shows how a node treats a bad frame.
//!
//! cargo run --example tcp_cluster

use mds_pir::cluster::{exchange, Cluster, TransportMode};
use mds_pir::wire::WireFrame;
use mds_pir::{MessageSet, SchemeB, SchemeTag, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(5, 3, 4, SchemeTag::B)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let msgs = MessageSet::random(params, &mut rng);
    let cluster = Cluster::new(SchemeB::with_vandermonde(params)?, msgs, TransportMode::Wire)?;
    let endpoints = cluster.endpoints();
    println!("nodes listening on {endpoints:?}");

    let (mut up, mut down) = (0, 0);
    for round in 0..5 {
        for k_star in 0..params.k {
            let t = cluster.retrieve(k_star, &mut rng)?;
            up += t.uploaded_bytes;
            down += t.downloaded_symbols;
            if round == 0 && k_star == 0 {
                println!("{}", serde_json::to_string_pretty(&t).expect("serializes"));
            }
        }
    }
    let count = 5 * params.k as u64;
    println!("{count} retrievals, {up} query bytes, {down} symbols downloaded, {} message symbols", count * params.l as u64);

    let reply = WireFrame::decode(&exchange(endpoints[0], b"not a frame")?)?;
    println!("garbage in, error frame out: {:?}", reply.error_parts());
    Ok(())
}
