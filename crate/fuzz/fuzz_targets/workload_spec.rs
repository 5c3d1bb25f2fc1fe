#![no_main]
use libfuzzer_sys::fuzz_target;
use tkt_core::eval::{generate_corpus, WorkloadSpec};
use tkt_core::validate;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = WorkloadSpec::from_toml(text) else { return };
    // bounded work: generation may still be exponential in nesting depth
    if spec.operations.iter().any(|o| o.repetition.max > 4 || o.children.len() > 4) || spec.operations.len() > 6 {
        return;
    }
    for t in generate_corpus(&spec, 2).unwrap() {
        assert!(validate(&t).is_empty());
    }
});
