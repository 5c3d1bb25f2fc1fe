#![no_main]
use libfuzzer_sys::fuzz_target;
use tkt_core::automaton::{parse_model, to_dot, write_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = parse_model(text) else { return };
    assert_eq!(parse_model(&write_model(&model)).unwrap(), model);
    let _ = to_dot(&model);
});
