#![no_main]
use libfuzzer_sys::fuzz_target;
use tkt_core::trace::{parse_corpus, write_corpus};
use tkt_core::{normalize, validate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(traces) = parse_corpus(text) else { return };
    // canonical text reparses to the same corpus
    assert_eq!(parse_corpus(&write_corpus(&traces)).unwrap(), traces);
    for t in &traces {
        let _ = validate(t);
        let n = normalize(t);
        assert_eq!(normalize(&n), n);
    }
});
