//! Context files must never panic the parser, and anything that parses
//! must survive validation and classification.
//!
//! ```bash
//! cargo +nightly fuzz run parse_context
//! ```

#![no_main]

use libfuzzer_sys::fuzz_target;

use ctxprob::io::{context_to_json, parse_context};
use ctxprob::report::analyze;
use ctxprob::Tolerances;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(ctx) = parse_context(text) else {
        return;
    };
    let report = analyze(&ctx, data, &Tolerances::default());
    if let Ok(report) = report {
        assert!(report.check_invariants().is_empty());
    }
    let again = parse_context(&context_to_json(&ctx)).expect("emitted context parses");
    assert_eq!(again.label, ctx.label);
});
