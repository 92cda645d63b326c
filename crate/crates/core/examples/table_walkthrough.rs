//! Every query of the smallest key-indexed example, `n = 3, t = 2, k = 3`,
//! with the symbols each database returns.
//!
//! cargo run --example table_walkthrough

use mds_pir::scheme::key;
use mds_pir::{SchemeA, SchemeTag, SystemParams};

fn letter(k: usize) -> char {
    (b'A' + k as u8) as char
}

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(3, 2, 3, SchemeTag::A)?;
    let a = SchemeA::with_vandermonde(params)?;
    println!("r = {}, s = {}, message length {}", params.r, params.s, params.l);
    println!("{:<10} {:<12} components", "request", "query");
    let k_star = 0;
    for key in key::enumerate(&params, 1_000)? {
        for db in 0..params.n {
            let q = a.gen_query(k_star, &key, db)?;
            let parts: Vec<String> = a
                .symbolic_answer(&q)
                .into_iter()
                .flatten()
                .map(|terms| {
                    terms.iter().map(|t| format!("{}{}", letter(t.message), t.index + 1)).collect::<Vec<_>>().join("+")
                })
                .collect();
            let shown = if parts.is_empty() { "-".to_string() } else { parts.join(", ") };
            println!("{:<10} db{} {:<8} {shown}", format!("{}", letter(k_star)), db + 1, format!("{:?}", q.entries));
        }
    }
    let total: usize = key::enumerate(&params, 1_000)?
        .iter()
        .map(|key| (0..params.n).map(|db| a.kept_columns(&a.gen_query(k_star, key, db).unwrap()).len()).sum::<usize>())
        .sum();
    println!("mean download {total}/{} symbols for {} message symbols", key::space_size(&params), params.l);
    Ok(())
}
