//! Clamped queries in the low-rate regime, `n = 5, t = 2, k = 4`, compared
//! with the key-indexed construction on the same parameters.
//!
//! cargo run --example low_rate

use mds_pir::analysis::{expected_download, format_rational};
use mds_pir::{BRegime, SchemeA, SchemeB, SchemeTag, SystemParams};

fn main() -> mds_pir::Result<()> {
    let params = SystemParams::new(5, 2, 4, SchemeTag::B)?;
    let b = SchemeB::with_vandermonde(params)?;
    let a = SchemeA::with_vandermonde(params)?;
    assert_eq!(b.regime(), BRegime::Low);
    println!("r = {}, s = {}, message length {}", params.r, params.s, params.l);

    let db = expected_download(&b)?;
    let da = expected_download(&a)?;
    println!("expected download, clamped:     {}", format_rational(db.mean().expect("symmetric")));
    println!("expected download, key-indexed: {}", format_rational(da.mean().expect("symmetric")));

    let ub = SchemeB::upload_cost_bits(&params, BRegime::Low);
    println!("upload bound, clamped:     {:.6} bits", ub.bits);
    println!("upload bound, key-indexed: {:.6} bits", SchemeA::upload_cost_bits(&params));
    Ok(())
}
