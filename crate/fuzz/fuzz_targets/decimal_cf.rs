#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_lab::diophantine::{continued_fraction_decimal, convergents};

fuzz_target!(|data: &[u8]| {
    if data.is_empty() {
        return;
    }
    let depth = (data[0] as usize % 64) + 1;
    let Ok(text) = std::str::from_utf8(&data[1..]) else { return };
    if let Ok(cf) = continued_fraction_decimal(text, depth) {
        // Quotients past the integer part are positive by construction.
        assert!(cf.quotients().iter().skip(1).all(|&a| a >= 1));
        if let Ok(conv) = convergents(&cf, cf.depth()) {
            for r in &conv {
                assert!(r.q >= 1);
                // Dirichlet with double-precision slack for huge inputs.
                let noise = 2e-15 * cf.value().abs().max(1.0);
                assert!(r.err <= 1.0 / (r.q as f64 * r.q as f64) + noise);
            }
        }
    }
});
