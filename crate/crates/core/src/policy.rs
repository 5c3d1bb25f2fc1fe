//! Guard generation: turning per-clock equality observations into intervals.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::automaton::{AutomatonError, ClockId, Guard, GuardForm, TimedAutomaton};
use crate::fixed::{Fixed, SCALE};

/// Confidence levels supported by the γ-confidence policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Confidence {
    P95,
    P99,
}

impl Confidence {
    /// Two-sided standard normal quantile.
    pub fn z(self) -> f64 {
        match self {
            Confidence::P95 => 1.959964,
            Confidence::P99 => 2.575829,
        }
    }

    pub fn gamma(self) -> &'static str {
        match self {
            Confidence::P95 => "0.95",
            Confidence::P99 => "0.99",
        }
    }

    pub fn from_gamma(s: &str) -> Option<Self> {
        match s {
            "0.95" => Some(Confidence::P95),
            "0.99" => Some(Confidence::P99),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    /// `[(1-ε)·min, (1+ε)·max]`
    MinMax { epsilon: Fixed },
    /// Normal-theory interval holding probability γ, widened to cover min/max.
    Gamma(Confidence),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolicyConfig {
    pub policy: Policy,
    pub absolute_guards: bool,
    pub config_id: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("epsilon {0} is outside [0, 1]")]
    Epsilon(Fixed),
    #[error("unknown configuration id `{0}` (expected M1..M16 or G1..G4)")]
    UnknownId(String),
    #[error("no samples for clock {0}")]
    NoSamples(ClockId),
    #[error("clock {clock} value {value} exceeds the representable guard range")]
    OutOfRange { clock: ClockId, value: u64 },
    #[error("transition {0} already carries interval guards")]
    AlreadyGeneralized(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Largest sample whose generated bounds are representable; both policies
/// keep the upper bound below 4·max.
pub const MAX_SAMPLE: u64 = u64::MAX / SCALE / 4;

const EPSILONS: [u64; 8] = [50_000, 100_000, 150_000, 200_000, 250_000, 500_000, 750_000, 1_000_000];

impl PolicyConfig {
    pub fn min_max(epsilon: Fixed, absolute_guards: bool) -> Result<Self, PolicyError> {
        if epsilon > Fixed::ONE {
            return Err(PolicyError::Epsilon(epsilon));
        }
        Ok(PolicyConfig { policy: Policy::MinMax { epsilon }, absolute_guards, config_id: None })
    }

    pub fn gamma(confidence: Confidence, absolute_guards: bool) -> Self {
        PolicyConfig { policy: Policy::Gamma(confidence), absolute_guards, config_id: None }
    }

    /// Looks up one of the twenty standard configurations.
    ///
    /// `M1`..`M16` pair ε ∈ {0.05, 0.10, 0.15, 0.20, 0.25, 0.50, 0.75, 1.00}
    /// with and without absolute guards (odd ids use them); `G1`/`G2` use
    /// γ = 0.95, `G3`/`G4` γ = 0.99, again odd ids with absolute guards.
    pub fn from_id(id: &str) -> Result<Self, PolicyError> {
        let unknown = || PolicyError::UnknownId(id.to_owned());
        let (kind, num) = id.split_at(id.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?);
        if num.starts_with('0') {
            return Err(unknown());
        }
        let n: usize = num.parse().map_err(|_| unknown())?;
        let absolute = n % 2 == 1;
        let mut cfg = match kind {
            "M" if (1..=16).contains(&n) => Self::min_max(Fixed::from_micros(EPSILONS[(n - 1) / 2]), absolute)?,
            "G" if (1..=4).contains(&n) => {
                Self::gamma(if n <= 2 { Confidence::P95 } else { Confidence::P99 }, absolute)
            }
            _ => return Err(unknown()),
        };
        cfg.config_id = Some(id.to_owned());
        Ok(cfg)
    }

    /// M1..M16 followed by G1..G4.
    pub fn table() -> Vec<PolicyConfig> {
        (1..=16)
            .map(|i| format!("M{i}"))
            .chain((1..=4).map(|i| format!("G{i}")))
            .map(|id| Self::from_id(&id).expect("table ids are valid"))
            .collect()
    }

    /// The configuration id, or a description of the explicit parameters.
    pub fn label(&self) -> String {
        self.config_id.clone().unwrap_or_else(|| self.to_string())
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let abs = if self.absolute_guards { "abs" } else { "noabs" };
        match self.policy {
            Policy::MinMax { epsilon } => write!(f, "minmax-{epsilon}-{abs}"),
            Policy::Gamma(c) => write!(f, "gamma-{}-{abs}", c.gamma()),
        }
    }
}

/// Equality observations of one clock on one transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockSamples {
    pub clock: ClockId,
    pub values: Vec<u64>,
}

/// Interval for one clock, or `None` when only one value was observed.
pub fn generate_guard(samples: &ClockSamples, config: &PolicyConfig) -> Result<Option<Guard>, PolicyError> {
    let values = &samples.values;
    let (Some(&min), Some(&max)) = (values.iter().min(), values.iter().max()) else {
        return Err(PolicyError::NoSamples(samples.clock));
    };
    if values.len() == 1 {
        return Ok(None);
    }
    if max > MAX_SAMPLE {
        return Err(PolicyError::OutOfRange { clock: samples.clock, value: max });
    }
    let (lo, hi) = match config.policy {
        Policy::MinMax { epsilon } => {
            let lower = Fixed::ONE.checked_sub(epsilon).ok_or(PolicyError::Epsilon(epsilon))?;
            (lower.mul_int(min), Fixed::ONE.saturating_add(epsilon).mul_int(max))
        }
        Policy::Gamma(conf) => {
            let n = values.len() as f64;
            let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
            let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let half = conf.z() * var.sqrt();
            let lo = Fixed::floor_f64(mean - half).min(Fixed::from_int(min));
            let hi = Fixed::ceil_f64(mean + half).max(Fixed::from_int(max));
            (lo, hi)
        }
    };
    Ok(Some(Guard::interval(samples.clock, lo, hi)))
}

/// Replaces every transition's equality observations by generated intervals.
/// With `absolute_guards` off, observations of the absolute clock are dropped.
pub fn apply_policy(automaton: &TimedAutomaton, config: &PolicyConfig) -> Result<TimedAutomaton, PolicyError> {
    let (n, initial, clocks, alphabet, mut transitions) = automaton.clone().into_parts();
    for (i, tr) in transitions.iter_mut().enumerate() {
        let mut by_clock: BTreeMap<ClockId, Vec<u64>> = BTreeMap::new();
        for g in &tr.guards {
            match g.form {
                GuardForm::Equality(v) => by_clock.entry(g.clock).or_default().push(v),
                GuardForm::Interval { .. } => return Err(PolicyError::AlreadyGeneralized(i)),
            }
        }
        let mut guards = Vec::new();
        for (clock, values) in by_clock {
            if clock.is_absolute() && !config.absolute_guards {
                continue;
            }
            if let Some(g) = generate_guard(&ClockSamples { clock, values }, config)? {
                guards.push(g);
            }
        }
        tr.guards = guards;
    }
    Ok(TimedAutomaton::new(n, initial, clocks, alphabet, transitions)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(values: &[u64]) -> ClockSamples {
        ClockSamples { clock: ClockId::relative(6), values: values.to_vec() }
    }

    fn bounds(g: Option<Guard>) -> (String, String) {
        match g.unwrap().form {
            GuardForm::Interval { lo, hi } => (lo.to_string(), hi.to_string()),
            GuardForm::Equality(_) => panic!("expected interval"),
        }
    }

    fn eps(e: &str) -> PolicyConfig {
        PolicyConfig::min_max(e.parse().unwrap(), true).unwrap()
    }

    #[test]
    fn minmax_zero_is_sample_range() {
        let g = generate_guard(&ClockSamples { clock: ClockId::ABSOLUTE, values: vec![30, 23] }, &eps("0")).unwrap();
        assert_eq!(bounds(g), ("23".into(), "30".into()));
    }

    #[test]
    fn minmax_half() {
        assert_eq!(bounds(generate_guard(&samples(&[7, 11]), &eps("0.5")).unwrap()), ("3.5".into(), "16.5".into()));
    }

    #[test]
    fn singleton_yields_nothing() {
        for cfg in [eps("0.05"), PolicyConfig::gamma(Confidence::P99, true)] {
            assert_eq!(generate_guard(&samples(&[42]), &cfg).unwrap(), None);
        }
        assert_eq!(generate_guard(&samples(&[]), &eps("0")), Err(PolicyError::NoSamples(ClockId::relative(6))));
        assert!(matches!(generate_guard(&samples(&[1, u64::MAX / 1000]), &eps("0")), Err(PolicyError::OutOfRange { .. })));
    }

    #[test]
    fn gamma_two_samples() {
        // mean 10, s = sqrt(8); 10 -/+ 1.959964 * 2.8284271247461903 = 4.4563846.. / 15.5436153..
        let g = generate_guard(&samples(&[8, 12]), &PolicyConfig::gamma(Confidence::P95, true)).unwrap();
        assert_eq!(bounds(g), ("4.456384".into(), "15.543616".into()));
    }

    #[test]
    fn gamma_zero_variance() {
        let g = generate_guard(&samples(&[10, 10, 10]), &PolicyConfig::gamma(Confidence::P95, true)).unwrap();
        assert_eq!(bounds(g), ("10".into(), "10".into()));
    }

    #[test]
    fn gamma_widens_to_extremes_and_clamps() {
        // one outlier: the normal interval would go negative on the left
        let g = generate_guard(&samples(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 100]), &PolicyConfig::gamma(Confidence::P95, true)).unwrap();
        let GuardForm::Interval { lo, hi } = g.unwrap().form else { unreachable!() };
        assert_eq!(lo, Fixed::ZERO);
        assert!(hi >= Fixed::from_int(100));
    }

    #[test]
    fn table_one_mapping() {
        let t = PolicyConfig::table();
        assert_eq!(t.len(), 20);
        assert_eq!(t[0].policy, Policy::MinMax { epsilon: Fixed::from_micros(50_000) });
        assert!(t[0].absolute_guards);
        assert!(!t[1].absolute_guards);
        assert_eq!(t[15].policy, Policy::MinMax { epsilon: Fixed::ONE });
        assert_eq!(t[15].config_id.as_deref(), Some("M16"));
        assert_eq!(PolicyConfig::from_id("M11").unwrap().policy, Policy::MinMax { epsilon: Fixed::from_micros(500_000) });
        assert_eq!(PolicyConfig::from_id("G2").unwrap(), PolicyConfig { config_id: Some("G2".into()), ..PolicyConfig::gamma(Confidence::P95, false) });
        assert_eq!(PolicyConfig::from_id("G3").unwrap().policy, Policy::Gamma(Confidence::P99));
        for bad in ["M0", "M17", "G5", "X1", "M", "M01", "", "m1"] {
            assert!(PolicyConfig::from_id(bad).is_err(), "{bad}");
        }
        assert!(PolicyConfig::min_max(Fixed::from_micros(1_000_001), true).is_err());
    }
}
