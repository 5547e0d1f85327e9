#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_lab::measures::DiscreteMeasure;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(measure) = DiscreteMeasure::from_json(text) {
        // Anything accepted must satisfy the measure invariants and
        // round-trip through its own serialization.
        let total: f64 = measure.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        for p in &measure.points {
            assert!(p.coords().iter().all(|c| (0.0..1.0).contains(c)));
        }
        let again = DiscreteMeasure::from_json(&measure.to_json()).expect("round trip");
        assert_eq!(measure, again);
    }
});
