//! Exact verification of rate, privacy, decoding sets and structure for a
//! few parameter sets. Pass `n t k` to check another point.
//!
//! cargo run --example verify_claims -- 6 4 3

use mds_pir::analysis::{verify_suite, SuiteOptions};
use mds_pir::{AnyScheme, SchemeChoice};

fn main() -> mds_pir::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let points = match args[..] {
        [n, t, k] => vec![(n, t, k, SchemeChoice::Auto)],
        _ => vec![
            (3, 2, 3, SchemeChoice::A),
            (5, 3, 4, SchemeChoice::B),
            (5, 2, 4, SchemeChoice::B),
            (4, 3, 2, SchemeChoice::K2),
        ],
    };
    let opts = SuiteOptions { structural_samples: 20, ..SuiteOptions::default() };
    let mut failed = 0;
    for (n, t, k, choice) in points {
        let inst = AnyScheme::build(n, t, k, 256, choice)?;
        println!("{} at (n, t, k) = ({n}, {t}, {k})", inst.name());
        for r in verify_suite(&inst, opts)? {
            failed += usize::from(!r.pass);
            println!(
                "  {} {:<28} expected {:<14} observed {:<14} ({} cases, {:.1} ms)",
                if r.pass { "ok  " } else { "FAIL" },
                r.claim,
                r.expected,
                r.observed,
                r.enumeration_size,
                r.ms
            );
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
    Ok(())
}
