//! Joint-increment models for the pair of correlated walks.
//!
//! A model fixes, for every realized history, the conditional probability
//! `theta` that both walks step up together. With marginal up-probability
//! `p` this single parameter pins the whole step law:
//!
//! ```text
//! P(+1, +1) = theta          P(+1, -1) = p - theta
//! P(-1, +1) = p - theta      P(-1, -1) = 1 - 2p + theta
//! ```
//!
//! All four masses are probabilities exactly when
//! `max(0, 2p - 1) <= theta <= p`; validation enforces that range over every
//! reachable history.

use crate::gaussian::{gaussian_theta, sample_gaussian_pair};
use crate::history::History;
use crate::path::JointPath;
use crate::rational::{self, rat_half, rat_one, rat_zero, to_f64, Rational, RationalRepr};
use crate::rng::{substream, StreamKind};
use crate::sign::SignPair;
use num::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    ThetaOutOfRange(#[from] Box<ThetaRangeError>),
    #[error("correlation must lie in [-1, 1], got {rho}")]
    InvalidRho { rho: f64 },
    #[error("marginal up-probability must lie strictly inside (0, 1), got {p}")]
    InvalidMarginal { p: Rational },
    #[error("sign-adversarial model must actually depend on the last sign (after_up == after_down == {value})")]
    NotSignDependent { value: Rational },
    #[error("{kind} model does not carry exact rational probabilities")]
    ExactnessRequired { kind: &'static str },
    #[error("simulation needs at least one step")]
    ZeroLength,
}

/// A conditional probability that escaped its valid range, together with
/// the history that produced it.
#[derive(Debug, Error)]
#[error("theta = {theta} outside [{lo}, {hi}] for {kind} model after history {history:?}")]
pub struct ThetaRangeError {
    pub kind: &'static str,
    pub theta: Rational,
    pub lo: Rational,
    pub hi: Rational,
    pub history: Vec<SignPair>,
}

/// A dependence model for the joint increments.
///
/// The `Constant`, `QHistory`, `SignAdversarial` and `Biased` kinds carry
/// exact rational parameters and can feed the exhaustive oracle; `Gaussian`
/// is float-only and is exercised by Monte Carlo instead.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    /// Constant `theta`, fair marginals.
    Constant { theta: Rational },
    /// `theta` for step `n` is `base`, plus `bump` when step `n - 1` was a
    /// common movement. Depends on the past only through the common/counter
    /// states, so the state process carries all the dependence.
    QHistory { base: Rational, bump: Rational },
    /// `theta` for step `n` is `first` at `n = 1`, then `after_up` or
    /// `after_down` according to the last first-walk sign. Ships as the
    /// negative control: the sign dependence breaks the factorization that
    /// state-adapted models satisfy.
    SignAdversarial {
        first: Rational,
        after_up: Rational,
        after_down: Rational,
    },
    /// Constant `theta` with its own marginal up-probability `p`.
    Biased { p: Rational, theta: Rational },
    /// Increment signs of correlated Gaussian steps; `theta` is the orthant
    /// probability of the correlation.
    Gaussian { rho: f64 },
}

/// Probe depth for exhaustive validation of exact kinds.
pub const VALIDATE_PROBE_DEPTH: usize = 10;
/// Number of sampled histories probed past the exhaustive depth.
pub const VALIDATE_RANDOM_PROBES: usize = 10_000;
const VALIDATE_RANDOM_DEPTH: usize = 64;
const VALIDATE_SEED: u64 = 0x5eed_0001;

impl ModelSpec {
    pub fn constant(theta: Rational) -> ModelSpec {
        ModelSpec::Constant { theta }
    }

    pub fn q_history(base: Rational, bump: Rational) -> ModelSpec {
        ModelSpec::QHistory { base, bump }
    }

    pub fn sign_adversarial(
        first: Rational,
        after_up: Rational,
        after_down: Rational,
    ) -> ModelSpec {
        ModelSpec::SignAdversarial {
            first,
            after_up,
            after_down,
        }
    }

    pub fn biased(p: Rational, theta: Rational) -> ModelSpec {
        ModelSpec::Biased { p, theta }
    }

    pub fn gaussian(rho: f64) -> ModelSpec {
        ModelSpec::Gaussian { rho }
    }

    /// The state-adapted model shipped for the positive-control checks:
    /// `theta_1 = 1/4`, then `1/4 + 1/8` after a common movement.
    pub fn q_history_default() -> ModelSpec {
        ModelSpec::q_history(rational::rat(1, 4), rational::rat(1, 8))
    }

    /// The sign-dependent model shipped as negative control:
    /// `theta_1 = 1/4`, then `2/5` after an up move and `1/10` after a down
    /// move of the first walk.
    pub fn sign_adversarial_default() -> ModelSpec {
        ModelSpec::sign_adversarial(
            rational::rat(1, 4),
            rational::rat(2, 5),
            rational::rat(1, 10),
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Constant { .. } => "constant-theta",
            ModelSpec::QHistory { .. } => "q-history-theta",
            ModelSpec::SignAdversarial { .. } => "sign-adversarial-theta",
            ModelSpec::Biased { .. } => "biased",
            ModelSpec::Gaussian { .. } => "gaussian",
        }
    }

    /// Whether every conditional probability is an exact rational.
    pub fn is_exact(&self) -> bool {
        !matches!(self, ModelSpec::Gaussian { .. })
    }

    /// Whether `theta` depends on the past only through the common/counter
    /// states (which makes the sign blocks independent of the state process).
    pub fn is_state_adapted(&self) -> bool {
        matches!(
            self,
            ModelSpec::Constant { .. } | ModelSpec::QHistory { .. } | ModelSpec::Gaussian { .. }
        )
    }

    /// Marginal per-step up-probability of each walk.
    pub fn marginal_p(&self) -> Rational {
        match self {
            ModelSpec::Biased { p, .. } => p.clone(),
            _ => rat_half(),
        }
    }

    /// Valid range `[max(0, 2p - 1), p]` for `theta` under this model's `p`.
    pub fn theta_range(&self) -> (Rational, Rational) {
        let p = self.marginal_p();
        let lo = (rational::rat(2, 1) * &p - rat_one()).max(rat_zero());
        (lo, p)
    }

    /// Conditional both-up probability for the step after `history`, as an
    /// exact rational. `None` for the float-only Gaussian kind.
    pub fn theta_exact(&self, history: &History) -> Option<Rational> {
        match self {
            ModelSpec::Constant { theta } => Some(theta.clone()),
            ModelSpec::QHistory { base, bump } => Some(match history.last_common() {
                Some(true) => base + bump,
                _ => base.clone(),
            }),
            ModelSpec::SignAdversarial {
                first,
                after_up,
                after_down,
            } => Some(match history.last_xi() {
                None => first.clone(),
                Some(s) if s.is_up() => after_up.clone(),
                Some(_) => after_down.clone(),
            }),
            ModelSpec::Biased { theta, .. } => Some(theta.clone()),
            ModelSpec::Gaussian { .. } => None,
        }
    }

    /// Conditional both-up probability as a float (defined for every kind).
    pub fn theta_f64(&self, history: &History) -> f64 {
        match self {
            ModelSpec::Gaussian { rho } => gaussian_theta(*rho).expect("validated correlation"),
            _ => to_f64(&self.theta_exact(history).expect("exact kind")),
        }
    }

    /// Exact step law after `history`. Fails for non-exact kinds or a
    /// `theta` outside its valid range.
    pub fn step_distribution_exact(
        &self,
        history: &History,
    ) -> Result<StepPmf<Rational>, ModelError> {
        if !self.is_exact() {
            return Err(ModelError::ExactnessRequired {
                kind: self.kind_name(),
            });
        }
        let theta = self.theta_exact(history).expect("exact kind");
        let (lo, hi) = self.theta_range();
        if theta < lo || theta > hi {
            return Err(Box::new(ThetaRangeError {
                kind: self.kind_name(),
                theta,
                lo,
                hi,
                history: history.steps().to_vec(),
            })
            .into());
        }
        Ok(StepPmf::from_theta_p(theta, self.marginal_p()))
    }

    /// Step law after `history` in floating point (defined for every kind).
    pub fn step_distribution(&self, history: &History) -> Result<StepPmf<f64>, ModelError> {
        match self {
            ModelSpec::Gaussian { rho } => {
                let theta = gaussian_theta(*rho)?;
                Ok(StepPmf::from_theta_p(theta, 0.5))
            }
            _ => {
                let exact = self.step_distribution_exact(history)?;
                Ok(StepPmf {
                    probs: exact.probs.map(|r| to_f64(&r)),
                })
            }
        }
    }

    /// Parameter-level consistency checks plus a probe of `theta` over
    /// reachable histories: exhaustive to depth [`VALIDATE_PROBE_DEPTH`] for
    /// exact kinds, then [`VALIDATE_RANDOM_PROBES`] sampled histories of
    /// depth up to 64.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.validate_with(VALIDATE_PROBE_DEPTH, VALIDATE_RANDOM_PROBES)
    }

    /// [`ModelSpec::validate`] with explicit probe sizes.
    pub fn validate_with(
        &self,
        probe_depth: usize,
        random_probes: usize,
    ) -> Result<(), ModelError> {
        self.check_params()?;
        if !self.is_exact() {
            // Gaussian: theta is constant and already range-checked via rho.
            return Ok(());
        }
        let mut history = History::empty();
        self.probe_exhaustive(&mut history, probe_depth)?;
        self.probe_random(random_probes)?;
        Ok(())
    }

    /// O(1) checks on the declared parameters.
    pub fn check_params(&self) -> Result<(), ModelError> {
        let (lo, hi) = self.theta_range();
        let check = |theta: &Rational| -> Result<(), ModelError> {
            if *theta < lo || *theta > hi {
                return Err(Box::new(ThetaRangeError {
                    kind: self.kind_name(),
                    theta: theta.clone(),
                    lo: lo.clone(),
                    hi: hi.clone(),
                    history: Vec::new(),
                })
                .into());
            }
            Ok(())
        };
        match self {
            ModelSpec::Constant { theta } => check(theta),
            ModelSpec::QHistory { base, bump } => {
                check(base)?;
                check(&(base + bump))
            }
            ModelSpec::SignAdversarial {
                first,
                after_up,
                after_down,
            } => {
                check(first)?;
                check(after_up)?;
                check(after_down)?;
                if after_up == after_down {
                    return Err(ModelError::NotSignDependent {
                        value: after_up.clone(),
                    });
                }
                Ok(())
            }
            ModelSpec::Biased { p, theta } => {
                if *p <= rat_zero() || *p >= rat_one() {
                    return Err(ModelError::InvalidMarginal { p: p.clone() });
                }
                check(theta)
            }
            ModelSpec::Gaussian { rho } => {
                if !(-1.0..=1.0).contains(rho) {
                    return Err(ModelError::InvalidRho { rho: *rho });
                }
                Ok(())
            }
        }
    }

    fn probe_exhaustive(&self, history: &mut History, depth_left: usize) -> Result<(), ModelError> {
        let (lo, hi) = self.theta_range();
        let p = self.marginal_p();
        let both_down_zero_at = rational::rat(2, 1) * &p - rat_one();
        self.probe_node(history, depth_left, &lo, &hi, &p, &both_down_zero_at)
    }

    fn probe_node(
        &self,
        history: &mut History,
        depth_left: usize,
        lo: &Rational,
        hi: &Rational,
        p: &Rational,
        both_down_zero_at: &Rational,
    ) -> Result<(), ModelError> {
        let theta = self.theta_exact(history).expect("exact kind");
        if theta < *lo || theta > *hi {
            return Err(Box::new(ThetaRangeError {
                kind: self.kind_name(),
                theta,
                lo: lo.clone(),
                hi: hi.clone(),
                history: history.steps().to_vec(),
            })
            .into());
        }
        if depth_left == 0 {
            return Ok(());
        }
        // Branch reachability without materializing the pmf: theta is the
        // BOTH_UP mass, p - theta the counter masses, 1 - 2p + theta the
        // BOTH_DOWN mass.
        for pair in SignPair::ALL {
            let unreachable = match pair {
                SignPair::BOTH_UP => theta.is_zero(),
                SignPair::UP_DOWN | SignPair::DOWN_UP => theta == *p,
                SignPair::BOTH_DOWN => theta == *both_down_zero_at,
            };
            if unreachable {
                continue;
            }
            history.push(pair);
            self.probe_node(history, depth_left - 1, lo, hi, p, both_down_zero_at)?;
            history.pop();
        }
        Ok(())
    }

    fn probe_random(&self, probes: usize) -> Result<(), ModelError> {
        let mut rng = substream(VALIDATE_SEED, StreamKind::Path, 0);
        let mut probed = 0usize;
        while probed < probes {
            let mut history = History::empty();
            for _ in 0..VALIDATE_RANDOM_DEPTH {
                let pmf = self.step_distribution_exact(&history)?;
                probed += 1;
                let u: f64 = rng.random();
                history.push(pmf.sample_by_cdf(u, to_f64));
                if probed >= probes {
                    break;
                }
            }
        }
        Ok(())
    }

    /// One joint increment after `history`, distributed per
    /// [`ModelSpec::step_distribution`]. Deterministic in the rng state.
    pub fn sample_step<R: Rng + ?Sized>(
        &self,
        history: &History,
        rng: &mut R,
    ) -> Result<SignPair, ModelError> {
        match self {
            ModelSpec::Gaussian { rho } => {
                if !(-1.0..=1.0).contains(rho) {
                    return Err(ModelError::InvalidRho { rho: *rho });
                }
                Ok(sample_gaussian_pair(*rho, rng))
            }
            _ => {
                let pmf = self.step_distribution(history)?;
                let u: f64 = rng.random();
                Ok(pmf.sample_by_cdf(u, |p| *p))
            }
        }
    }

    /// Simulates a length-`n` path from the stream `(seed, Path, 0)`.
    /// Bit-reproducible for fixed `(model, n, seed)`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<JointPath, ModelError> {
        self.simulate_path(n, seed, 0)
    }

    /// Simulates path number `index` of a replicated experiment; each index
    /// draws from its own sub-stream, so replications may run in any order
    /// or in parallel without changing results.
    pub fn simulate_path(
        &self,
        n: usize,
        root_seed: u64,
        index: u64,
    ) -> Result<JointPath, ModelError> {
        let mut rng = substream(root_seed, StreamKind::Path, index);
        self.simulate_with_rng(n, &mut rng)
    }

    pub fn simulate_with_rng<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<JointPath, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroLength);
        }
        self.check_params()?;
        let tables = StepTables::compile(self)?;
        let mut pairs = Vec::with_capacity(n);
        let mut prev = None;
        for _ in 0..n {
            let pair = tables.draw(prev, rng);
            pairs.push(pair);
            prev = Some(pair);
        }
        Ok(JointPath::from_pairs(pairs).expect("n >= 1"))
    }
}

/// Per-step cumulative tables compiled once per simulated path.
///
/// Every shipped kind conditions on at most the previous step, so the hot
/// loop can index a handful of precomputed cdf rows instead of re-deriving
/// the pmf per step. The rows are the running sums [`StepPmf::sample_by_cdf`]
/// would produce, so the draws match [`ModelSpec::sample_step`] bit for bit.
enum StepTables {
    Fixed([f64; 4]),
    ByLastState {
        first: [f64; 4],
        after_common: [f64; 4],
        after_counter: [f64; 4],
    },
    ByLastSign {
        first: [f64; 4],
        after_up: [f64; 4],
        after_down: [f64; 4],
    },
    Gaussian {
        rho: f64,
    },
}

impl StepTables {
    fn compile(model: &ModelSpec) -> Result<StepTables, ModelError> {
        let cdf = |history: History| -> Result<[f64; 4], ModelError> {
            let pmf = model.step_distribution(&history)?;
            let mut acc = 0.0;
            let mut out = [0.0; 4];
            for (pair, p) in pmf.iter() {
                acc += p;
                out[pair.index()] = acc;
            }
            Ok(out)
        };
        let single = |pair: SignPair| History::from_steps(vec![pair]);
        Ok(match model {
            ModelSpec::Constant { .. } | ModelSpec::Biased { .. } => {
                StepTables::Fixed(cdf(History::empty())?)
            }
            ModelSpec::QHistory { .. } => StepTables::ByLastState {
                first: cdf(History::empty())?,
                after_common: cdf(single(SignPair::BOTH_UP))?,
                after_counter: cdf(single(SignPair::UP_DOWN))?,
            },
            ModelSpec::SignAdversarial { .. } => StepTables::ByLastSign {
                first: cdf(History::empty())?,
                after_up: cdf(single(SignPair::BOTH_UP))?,
                after_down: cdf(single(SignPair::BOTH_DOWN))?,
            },
            ModelSpec::Gaussian { rho } => StepTables::Gaussian { rho: *rho },
        })
    }

    fn draw<R: Rng + ?Sized>(&self, prev: Option<SignPair>, rng: &mut R) -> SignPair {
        let row = match self {
            StepTables::Fixed(row) => row,
            StepTables::ByLastState {
                first,
                after_common,
                after_counter,
            } => match prev {
                None => first,
                Some(p) if p.is_common() => after_common,
                Some(_) => after_counter,
            },
            StepTables::ByLastSign {
                first,
                after_up,
                after_down,
            } => match prev {
                None => first,
                Some(p) if p.xi.is_up() => after_up,
                Some(_) => after_down,
            },
            StepTables::Gaussian { rho } => return sample_gaussian_pair(*rho, rng),
        };
        let u: f64 = rng.random();
        for pair in SignPair::ALL {
            if u < row[pair.index()] {
                return pair;
            }
        }
        SignPair::BOTH_DOWN
    }
}

/// Probability mass function over the four joint increments, indexed in
/// [`SignPair::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPmf<T> {
    probs: [T; 4],
}

impl<T> StepPmf<T> {
    pub fn prob(&self, pair: SignPair) -> &T {
        &self.probs[pair.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (SignPair, &T)> {
        SignPair::ALL.iter().copied().zip(self.probs.iter())
    }

    /// Inverse-cdf draw from a uniform `u` in `[0, 1)`; zero-mass cells are
    /// never selected.
    fn sample_by_cdf(&self, u: f64, as_f64: impl Fn(&T) -> f64) -> SignPair {
        let mut acc = 0.0;
        for (pair, p) in self.iter() {
            acc += as_f64(p);
            if u < acc {
                return pair;
            }
        }
        SignPair::BOTH_DOWN
    }
}

impl<T> StepPmf<T>
where
    T: Clone + num::One + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    /// Builds the four-cell law `{theta, p - theta, p - theta, 1 - 2p + theta}`.
    pub fn from_theta_p(theta: T, p: T) -> StepPmf<T> {
        let counter = p.clone() - theta.clone();
        let both_down = (T::one() - p) - counter.clone();
        StepPmf {
            probs: [theta, counter.clone(), counter, both_down],
        }
    }
}

impl StepPmf<Rational> {
    pub fn total(&self) -> Rational {
        self.probs.iter().sum()
    }
}

impl StepPmf<f64> {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

// --- serde wire form -------------------------------------------------------
//
// {"kind": "constant-theta", "theta": {"num": 1, "den": 4}}
// {"kind": "q-history-theta", "theta": {...}, "params": {"bump": {...}}}
// {"kind": "sign-adversarial-theta", "theta": {...},
//  "params": {"after_up": {...}, "after_down": {...}}}
// {"kind": "biased", "theta": {...}, "p": {...}}
// {"kind": "gaussian", "rho": 0.5}

#[derive(Serialize, Deserialize)]
struct ModelSpecRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<RationalRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<RationalRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<ParamsRepr>,
}

#[derive(Serialize, Deserialize, Default)]
struct ParamsRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    bump: Option<RationalRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    after_up: Option<RationalRepr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    after_down: Option<RationalRepr>,
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            ModelSpec::Constant { theta } => ModelSpecRepr {
                kind: self.kind_name().into(),
                theta: Some(theta.into()),
                p: None,
                rho: None,
                params: None,
            },
            ModelSpec::QHistory { base, bump } => ModelSpecRepr {
                kind: self.kind_name().into(),
                theta: Some(base.into()),
                p: None,
                rho: None,
                params: Some(ParamsRepr {
                    bump: Some(bump.into()),
                    ..Default::default()
                }),
            },
            ModelSpec::SignAdversarial {
                first,
                after_up,
                after_down,
            } => ModelSpecRepr {
                kind: self.kind_name().into(),
                theta: Some(first.into()),
                p: None,
                rho: None,
                params: Some(ParamsRepr {
                    after_up: Some(after_up.into()),
                    after_down: Some(after_down.into()),
                    ..Default::default()
                }),
            },
            ModelSpec::Biased { p, theta } => ModelSpecRepr {
                kind: self.kind_name().into(),
                theta: Some(theta.into()),
                p: Some(p.into()),
                rho: None,
                params: None,
            },
            ModelSpec::Gaussian { rho } => ModelSpecRepr {
                kind: self.kind_name().into(),
                theta: None,
                p: None,
                rho: Some(*rho),
                params: None,
            },
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<ModelSpec, D::Error> {
        use serde::de::Error;
        let repr = ModelSpecRepr::deserialize(de)?;
        let kind = repr.kind.clone();
        let rational = |field: Option<&RationalRepr>, name: &str| -> Result<Rational, D::Error> {
            let r =
                field.ok_or_else(|| D::Error::custom(format!("{kind} model requires {name}")))?;
            Rational::try_from(r).map_err(D::Error::custom)
        };
        let params = repr.params.as_ref();
        let model = match repr.kind.as_str() {
            "constant-theta" => ModelSpec::Constant {
                theta: rational(repr.theta.as_ref(), "theta")?,
            },
            "q-history-theta" => ModelSpec::QHistory {
                base: rational(repr.theta.as_ref(), "theta")?,
                bump: rational(params.and_then(|p| p.bump.as_ref()), "params.bump")?,
            },
            "sign-adversarial-theta" => ModelSpec::SignAdversarial {
                first: rational(repr.theta.as_ref(), "theta")?,
                after_up: rational(params.and_then(|p| p.after_up.as_ref()), "params.after_up")?,
                after_down: rational(
                    params.and_then(|p| p.after_down.as_ref()),
                    "params.after_down",
                )?,
            },
            "biased" => ModelSpec::Biased {
                p: rational(repr.p.as_ref(), "p")?,
                theta: rational(repr.theta.as_ref(), "theta")?,
            },
            "gaussian" => ModelSpec::Gaussian {
                rho: repr
                    .rho
                    .ok_or_else(|| D::Error::custom("gaussian model requires rho"))?,
            },
            other => return Err(D::Error::custom(format!("unknown model kind {other:?}"))),
        };
        model.check_params().map_err(D::Error::custom)?;
        Ok(model)
    }
}
