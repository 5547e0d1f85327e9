#![no_main]

use libfuzzer_sys::fuzz_target;
use mather_lab::linres::fourier::FourierSeries;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(series) = FourierSeries::from_json(text) {
        let again = FourierSeries::from_json(&series.to_json()).expect("round trip");
        assert_eq!(series, again);
        if series.dim() <= 3 && series.band() <= 16 {
            let x = vec![0.37; series.dim()];
            assert!(series.eval(&x).is_finite());
        }
    }
});
