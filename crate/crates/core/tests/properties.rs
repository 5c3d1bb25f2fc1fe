mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tkt_core::automaton::{parse_model, write_model};
use tkt_core::eval::{generate_corpus, inject_anomaly, AnomalySpec};
use tkt_core::trace::write_corpus;
use tkt_core::{
    accepts, accepts_events, apply_policy, mine_stages, normalize, parse_corpus, validate, EventType, Fixed, MinerConfig,
    PolicyConfig, TimedEvent, TimedTrace,
};

/// Well-nested traces over three labels with arbitrary gaps.
fn trace_strategy() -> impl Strategy<Value = TimedTrace> {
    (0u64..1_000_000, prop::collection::vec((any::<bool>(), 0usize..3, 0u64..50), 1..30)).prop_map(|(start, steps)| {
        let labels = ["f", "g", "h"];
        let mut now = start;
        let mut open = Vec::new();
        let mut events = Vec::new();
        for (begin, l, gap) in steps {
            now += gap;
            if begin || open.is_empty() {
                open.push(labels[l]);
                events.push(TimedEvent::begin(labels[l], now));
            } else {
                events.push(TimedEvent::end(open.pop().unwrap(), now));
            }
        }
        while let Some(l) = open.pop() {
            events.push(TimedEvent::end(l, now));
        }
        TimedTrace::well_formed(events).unwrap()
    })
}

fn corpus(seed: u64) -> Vec<TimedTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = common::random_workload(&mut rng);
    generate_corpus(&spec, 12).unwrap()
}

fn stamps(t: &TimedTrace) -> Vec<u64> {
    t.events().iter().map(|e| e.timestamp).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent_and_keeps_differences(t in trace_strategy()) {
        let n = normalize(&t);
        prop_assert_eq!(n.events()[0].timestamp, 0);
        prop_assert_eq!(&normalize(&n), &n);
        let diffs = |s: Vec<u64>| s.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
        prop_assert_eq!(diffs(stamps(&t)), diffs(stamps(&n)));
        prop_assert!(validate(&n).is_empty());
    }

    #[test]
    fn corpus_text_roundtrip(ts in prop::collection::vec(trace_strategy(), 1..5)) {
        prop_assert_eq!(parse_corpus(&write_corpus(&ts)).unwrap(), ts);
    }

    #[test]
    fn generated_traces_are_well_formed(seed in any::<u64>()) {
        for t in corpus(seed) {
            prop_assert!(validate(&t).is_empty());
            prop_assert_eq!(t.events()[0].timestamp, 0);
            prop_assert_eq!(t.events()[0].operation.as_str(), "op0");
        }
    }

    #[test]
    fn overload_preserves_shape_and_stretches_time(seed in any::<u64>(), factor in 1.01f64..5.0) {
        for t in corpus(seed) {
            let o = inject_anomaly(&t, &AnomalySpec::Overload { factor }).unwrap();
            prop_assert!(validate(&o).is_empty());
            prop_assert_eq!(o.len(), t.len());
            for (a, b) in t.events().iter().zip(o.events()) {
                prop_assert_eq!((&a.operation, a.event_type), (&b.operation, b.event_type));
                prop_assert!(b.timestamp >= a.timestamp);
            }
        }
    }

    #[test]
    fn mined_models_roundtrip_through_text(seed in any::<u64>(), absolute in any::<bool>()) {
        let stages = mine_stages(&corpus(seed), &MinerConfig { k: 2, absolute_clock: absolute }).unwrap();
        for cfg in [PolicyConfig::from_id("M3").unwrap(), PolicyConfig::from_id("G2").unwrap()] {
            let m = apply_policy(&stages.refined, &cfg).unwrap();
            prop_assert_eq!(&parse_model(&write_model(&m)).unwrap(), &m);
        }
        prop_assert_eq!(&parse_model(&write_model(&stages.refined)).unwrap(), &stages.refined);
    }

    #[test]
    fn wider_guards_and_ignored_absolute_clock_accept_more(seed in any::<u64>(), scale in 0.5f64..3.0) {
        let traces = corpus(seed);
        let stages = mine_stages(&traces, &MinerConfig { k: 2, absolute_clock: true }).unwrap();
        let models: Vec<_> = ["M1", "M5", "M9", "M13", "M15"]
            .iter()
            .map(|id| apply_policy(&stages.refined, &PolicyConfig::from_id(id).unwrap()).unwrap())
            .collect();
        for t in &traces {
            let probe: Vec<TimedEvent> = t
                .events()
                .iter()
                .map(|e| TimedEvent { timestamp: (e.timestamp as f64 * scale).round() as u64, ..e.clone() })
                .collect();
            let mut prev = false;
            for m in &models {
                let strict = accepts_events(m, &probe, true).unwrap().accepted;
                let lax = accepts_events(m, &probe, false).unwrap().accepted;
                prop_assert!(!strict || lax);
                prop_assert!(!prev || strict, "acceptance lost when widening");
                prev = strict;
            }
        }
    }

    #[test]
    fn refined_model_has_no_more_clocks(seed in any::<u64>()) {
        let stages = mine_stages(&corpus(seed), &MinerConfig::default()).unwrap();
        prop_assert!(stages.refined.clocks().len() <= stages.merged.clocks().len());
        prop_assert!(stages.merged.num_states() <= stages.initial.num_states());
        for t in stages.refined.transitions() {
            if t.event_type == EventType::End {
                prop_assert!(t.resets.is_empty());
            }
        }
    }

    #[test]
    fn minmax_interval_formula(values in prop::collection::vec(0u64..100_000, 2..20), eps in 0u64..=1_000_000) {
        let e = Fixed::from_micros(eps);
        let samples = tkt_core::policy::ClockSamples { clock: tkt_core::ClockId::relative(1), values: values.clone() };
        let g = tkt_core::generate_guard(&samples, &PolicyConfig::min_max(e, true).unwrap()).unwrap().unwrap();
        let (min, max) = (*values.iter().min().unwrap() as u128, *values.iter().max().unwrap() as u128);
        let tkt_core::GuardForm::Interval { lo, hi } = g.form else { unreachable!() };
        prop_assert_eq!(lo.micros() as u128, min * (1_000_000 - eps as u128));
        prop_assert_eq!(hi.micros() as u128, max * (1_000_000 + eps as u128));
    }
}

#[test]
fn training_traces_accepted_without_absolute_guards() {
    let traces = corpus(99);
    let stages = mine_stages(&traces, &MinerConfig { k: 3, absolute_clock: false }).unwrap();
    let m = apply_policy(&stages.refined, &PolicyConfig::from_id("G4").unwrap()).unwrap();
    assert!(traces.iter().all(|t| accepts(&m, t, true).unwrap().accepted));
}
