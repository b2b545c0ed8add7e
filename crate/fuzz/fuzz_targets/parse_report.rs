#![no_main]

use libfuzzer_sys::fuzz_target;

use ctxprob::io::from_json_str;
use ctxprob::report::{AnalysisReport, DensityDemoReport, RecoveryReport};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = from_json_str::<AnalysisReport>(text);
        let _ = from_json_str::<RecoveryReport>(text);
        let _ = from_json_str::<DensityDemoReport>(text);
    }
});
