#![no_main]
use libfuzzer_sys::fuzz_target;
use tkt_core::eval::{inject_anomaly, AnomalySpec};
use tkt_core::trace::parse_trace;
use tkt_core::validate;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = AnomalySpec::from_toml(text) else { return };
    let trace = parse_trace("B f 0\nB g 1\nE g 4\nB h 4\nE h 9\nE f 12").unwrap();
    if let Ok(t) = inject_anomaly(&trace, &spec) {
        assert!(validate(&t).is_empty());
        assert_eq!(t.len(), trace.len());
    }
});
