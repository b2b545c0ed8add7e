#![no_main]

use libfuzzer_sys::fuzz_target;

use ctxprob::frequency::estimate_frequencies;
use ctxprob::io::{parse_sequence_csv, write_sequence_csv};
use ctxprob::Observable;

fuzz_target!(|data: &[u8]| {
    let observable = Observable::new("b", "b1", "b2");
    if let Ok(seq) = parse_sequence_csv(data, &observable) {
        let f = estimate_frequencies(&seq);
        assert_eq!(f[0] + f[1], 1.0);

        // whatever parses must round-trip through the writer
        let mut buf = Vec::new();
        write_sequence_csv(&seq, &mut buf).unwrap();
        assert_eq!(parse_sequence_csv(buf.as_slice(), &observable).unwrap(), seq);
    }
});
