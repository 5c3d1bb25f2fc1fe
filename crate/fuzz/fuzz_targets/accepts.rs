#![no_main]
use libfuzzer_sys::fuzz_target;
use tkt_core::automaton::parse_model;
use tkt_core::trace::parse_corpus;
use tkt_core::accepts_events;

// input: a model, a line holding `---`, then a trace corpus
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Some((model, traces)) = text.split_once("\n---\n") else { return };
    let (Ok(model), Ok(traces)) = (parse_model(model), parse_corpus(traces)) else { return };
    for t in &traces {
        for check_absolute in [true, false] {
            let r = accepts_events(&model, t.events(), check_absolute).unwrap();
            assert_eq!(r.accepted, r.failure.is_none());
            if r.accepted {
                assert_eq!(r.witness.len(), t.len());
            }
        }
    }
});
