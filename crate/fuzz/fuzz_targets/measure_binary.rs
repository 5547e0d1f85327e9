#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_lab::measures::DiscreteMeasure;

fuzz_target!(|data: &[u8]| {
    if let Ok(measure) = DiscreteMeasure::from_binary(data) {
        let bytes = measure.to_binary();
        let again = DiscreteMeasure::from_binary(&bytes).expect("round trip");
        assert_eq!(measure, again);
    }
});
