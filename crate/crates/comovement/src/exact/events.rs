//! A small family of path events with exact rational probabilities.
//!
//! Used to calibrate the Monte Carlo engine against the enumeration oracle:
//! an event is sampled, its exact probability computed by enumeration, and
//! the empirical frequency of the same predicate compared against it.

use crate::decompose::decompose;
use crate::path::JointPath;
use crate::sign::Sign;
use rand::Rng;
use serde::Serialize;

/// One event on a fixed-horizon joint path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EventSpec {
    /// Final first-walk value at least `level`.
    FinalWalkAtLeast { level: i64 },
    /// Exactly `count` common movements over the horizon.
    FinalClockEquals { count: usize },
    /// The `n`-th common movement happens by step `by` and carries `sign`.
    CommonHitSign { n: usize, by: usize, sign: Sign },
    /// The `m`-th counter movement happens by step `by` and carries `sign`.
    CounterHitSign { m: usize, by: usize, sign: Sign },
    /// The first steps follow the given common/counter pattern.
    StatePrefix { pattern: Vec<bool> },
}

impl EventSpec {
    pub fn eval(&self, path: &JointPath) -> bool {
        match self {
            EventSpec::FinalWalkAtLeast { level } => {
                path.b_values().last().copied().unwrap_or(0) >= *level
            }
            EventSpec::FinalClockEquals { count } => {
                path.pairs().iter().filter(|p| p.is_common()).count() == *count
            }
            EventSpec::CommonHitSign { n, by, sign } => {
                match decompose(path).hits.alpha.get(n - 1).copied().flatten() {
                    Some(step) => step <= *by && path.pair(step).xi == *sign,
                    None => false,
                }
            }
            EventSpec::CounterHitSign { m, by, sign } => {
                match decompose(path).hits.beta.get(m - 1).copied().flatten() {
                    Some(step) => step <= *by && path.pair(step).xi == *sign,
                    None => false,
                }
            }
            EventSpec::StatePrefix { pattern } => {
                pattern.len() <= path.len()
                    && pattern
                        .iter()
                        .enumerate()
                        .all(|(i, &bit)| path.pair(i + 1).is_common() == bit)
            }
        }
    }

    /// Draws one event with parameters sensible for the horizon. The mix
    /// keeps probabilities away from 0 and 1 so the binomial error bars are
    /// informative.
    pub fn sample<R: Rng + ?Sized>(horizon: usize, rng: &mut R) -> EventSpec {
        let sign = if rng.random::<bool>() {
            Sign::Plus
        } else {
            Sign::Minus
        };
        match rng.random_range(0..5u8) {
            0 => EventSpec::FinalWalkAtLeast {
                level: rng.random_range(-2..=2),
            },
            1 => EventSpec::FinalClockEquals {
                count: rng.random_range(horizon / 4..=(3 * horizon) / 4),
            },
            2 => {
                let n = rng.random_range(1..=2usize);
                EventSpec::CommonHitSign {
                    n,
                    by: rng.random_range(n + 1..=horizon),
                    sign,
                }
            }
            3 => {
                let m = rng.random_range(1..=2usize);
                EventSpec::CounterHitSign {
                    m,
                    by: rng.random_range(m + 1..=horizon),
                    sign,
                }
            }
            _ => {
                let len = rng.random_range(1..=3usize);
                let pattern = (0..len).map(|_| rng.random::<bool>()).collect();
                EventSpec::StatePrefix { pattern }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            EventSpec::FinalWalkAtLeast { level } => format!("B_N >= {level}"),
            EventSpec::FinalClockEquals { count } => format!("T_N = {count}"),
            EventSpec::CommonHitSign { n, by, sign } => {
                format!("alpha_{n} <= {by} with sign {sign}")
            }
            EventSpec::CounterHitSign { m, by, sign } => {
                format!("beta_{m} <= {by} with sign {sign}")
            }
            EventSpec::StatePrefix { pattern } => {
                let bits: Vec<u8> = pattern.iter().map(|&b| b as u8).collect();
                format!("state prefix {bits:?}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_event_prob;
    use crate::model::ModelSpec;
    use crate::rational::rat;
    use crate::rng::{substream, StreamKind};

    #[test]
    fn sampled_events_evaluate_and_have_sane_probabilities() {
        let model = ModelSpec::constant(rat(1, 4));
        let mut rng = substream(404, StreamKind::Path, 0);
        let events: Vec<EventSpec> = (0..20).map(|_| EventSpec::sample(8, &mut rng)).collect();
        let batch = crate::exact::exact_event_probs(&model, 8, &events).unwrap();
        for (event, p) in events.iter().zip(&batch) {
            assert!(*p >= rat(0, 1) && *p <= rat(1, 1), "{}: {p}", event.label());
        }
        // The batch matches individual enumeration on a spot check.
        let single = exact_event_prob(&model, 8, |path| events[0].eval(path)).unwrap();
        assert_eq!(single, batch[0]);
    }

    #[test]
    fn state_prefix_probability_uniform_model() {
        let model = ModelSpec::constant(rat(1, 4));
        let event = EventSpec::StatePrefix {
            pattern: vec![true, false],
        };
        let p = exact_event_prob(&model, 3, |path| event.eval(path)).unwrap();
        assert_eq!(p, rat(1, 4));
    }

    #[test]
    fn common_hit_event_matches_frozen_value() {
        // Same event as the frozen oracle example: first common move within
        // two steps, sign up, under the uniform model.
        let model = ModelSpec::constant(rat(1, 4));
        let event = EventSpec::CommonHitSign {
            n: 1,
            by: 2,
            sign: Sign::Plus,
        };
        let p = exact_event_prob(&model, 2, |path| event.eval(path)).unwrap();
        assert_eq!(p, rat(3, 8));
    }
}
