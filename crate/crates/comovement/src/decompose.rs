//! Splitting a joint path into its common and counter movements.
//!
//! Each step of the pair is classified as a common movement (both walks move
//! the same way) or a counter movement. Counting common moves gives the
//! random clock `T`; the first step index at which the clock reaches `n` is
//! the hitting time `alpha_n`, and its counter-move twin is `beta_m`. Summing
//! the first-walk signs at those hitting times builds the component walks
//! `X` and `Y`, and the original pair is recovered exactly as
//!
//! ```text
//! B_n = X[T_n] + Y[S_n],    W_n = X[T_n] - Y[S_n]
//! ```
//!
//! with `X[0] = Y[0] = 0`. A hitting time that does not occur within the
//! horizon is kept as an explicit `None` rather than silently extrapolated;
//! callers that need the infinite-horizon objects supply a [`Completion`]
//! whose fair draws stand in for the missing increments.
//!
//! All sequences are 1-based in the external data model (serialized output
//! and the table layout); in-memory vectors are 0-based with entry `i`
//! holding the value for step `i + 1`.

use crate::path::JointPath;
use crate::rng::{substream, StreamKind};
use crate::sign::{Sign, SignPair};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("hitting times were computed for a length-{hits} path, got length {path}")]
    HitsMismatch { hits: usize, path: usize },
    #[error("clock must be nondecreasing with unit increments, offending step {step}")]
    BadClock { step: usize },
    #[error("{walk} walk is missing entry {index} needed by the clock")]
    MissingEntry { walk: &'static str, index: usize },
}

/// Classifies one joint increment: `true` for a common movement.
pub fn classify_step(pair: SignPair) -> bool {
    pair.is_common()
}

/// Common- and counter-move counts per step: `t[n-1]` common and `s[n-1]`
/// counter movements among the first `n` steps. `t[n-1] + s[n-1] == n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub t: Vec<usize>,
    pub s: Vec<usize>,
}

/// Prefix sums of the classification bits.
pub fn run_counters(q: &[bool]) -> Counters {
    let mut t = Vec::with_capacity(q.len());
    let mut common = 0usize;
    for (i, &bit) in q.iter().enumerate() {
        common += bit as usize;
        t.push(common);
        debug_assert!(t[i] + (i + 1 - t[i]) == i + 1);
    }
    let s = t.iter().enumerate().map(|(i, &tn)| i + 1 - tn).collect();
    Counters { t, s }
}

/// First step indices reaching each count, `None` when the count is not hit
/// within the horizon. `alpha[n-1]` is the step of the `n`-th common move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HittingTimes {
    pub alpha: Vec<Option<usize>>,
    pub beta: Vec<Option<usize>>,
}

/// Inverts the counters: `alpha[n-1] = min {k : t[k-1] = n}`, and likewise
/// `beta` from the counter-move count. Both vectors span the horizon length.
pub fn hitting_times(counters: &Counters) -> HittingTimes {
    let horizon = counters.t.len();
    let mut alpha = vec![None; horizon];
    let mut beta = vec![None; horizon];
    let mut common = 0usize;
    for (idx, &tn) in counters.t.iter().enumerate() {
        if tn > common {
            alpha[tn - 1] = Some(idx + 1);
            common = tn;
        }
    }
    let mut counter = 0usize;
    for (idx, &sn) in counters.s.iter().enumerate() {
        if sn > counter {
            beta[sn - 1] = Some(idx + 1);
            counter = sn;
        }
    }
    HittingTimes { alpha, beta }
}

/// Two dedicated fair-sign streams completing unreached hitting times, one
/// for the common side and one for the counter side. Derive with
/// [`Completion::from_seed`] so the draws are independent of the path stream
/// and of every other path's completion.
pub struct Completion {
    zeta: ChaCha8Rng,
    psi: ChaCha8Rng,
}

impl Completion {
    /// Streams `(seed, CompletionZeta, index)` and `(seed, CompletionPsi,
    /// index)`; `index` is the replication number, never reused across paths.
    pub fn from_seed(root_seed: u64, index: u64) -> Completion {
        Completion {
            zeta: substream(root_seed, StreamKind::CompletionZeta, index),
            psi: substream(root_seed, StreamKind::CompletionPsi, index),
        }
    }

    fn draw_zeta(&mut self) -> Sign {
        fair_sign(&mut self.zeta)
    }

    fn draw_psi(&mut self) -> Sign {
        fair_sign(&mut self.psi)
    }
}

fn fair_sign<R: Rng>(rng: &mut R) -> Sign {
    if rng.random::<bool>() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// The full decomposition of one joint path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Common-movement flags per step.
    pub q: Vec<bool>,
    pub counters: Counters,
    pub hits: HittingTimes,
    /// Common-move walk values `X_1, X_2, ...`; the first
    /// `x_from_path` entries come from realized hitting times, the rest (if
    /// any) from completion draws.
    pub x: Vec<i64>,
    /// Counter-move walk values, same convention as `x`.
    pub y: Vec<i64>,
    pub x_from_path: usize,
    pub y_from_path: usize,
    pub completion_used: bool,
}

/// Sums first-walk signs over the reached hitting times; with a completion,
/// extends both walks to `target_len` using fair draws for the unreached
/// tail.
pub fn extract_walks(
    path: &JointPath,
    hits: &HittingTimes,
    completion: Option<(&mut Completion, usize)>,
) -> Result<(Vec<i64>, Vec<i64>), DecomposeError> {
    if hits.alpha.len() != path.len() {
        return Err(DecomposeError::HitsMismatch {
            hits: hits.alpha.len(),
            path: path.len(),
        });
    }
    let sums = |times: &[Option<usize>]| -> Vec<i64> {
        let mut acc = 0i64;
        times
            .iter()
            .map_while(|t| {
                t.map(|step| {
                    acc += path.pair(step).xi.as_i64();
                    acc
                })
            })
            .collect()
    };
    let mut x = sums(&hits.alpha);
    let mut y = sums(&hits.beta);
    if let Some((completion, target_len)) = completion {
        let mut acc = x.last().copied().unwrap_or(0);
        while x.len() < target_len {
            acc += completion.draw_zeta().as_i64();
            x.push(acc);
        }
        let mut acc = y.last().copied().unwrap_or(0);
        while y.len() < target_len {
            acc += completion.draw_psi().as_i64();
            y.push(acc);
        }
    }
    Ok((x, y))
}

/// Decomposes a path, leaving unreached hitting times unfilled.
pub fn decompose(path: &JointPath) -> Decomposition {
    decompose_inner(path, None).expect("hits match the path by construction")
}

/// Decomposes a path and completes both component walks to the horizon
/// length with fair draws from the dedicated streams.
pub fn decompose_completed(path: &JointPath, completion: &mut Completion) -> Decomposition {
    decompose_inner(path, Some((completion, path.len())))
        .expect("hits match the path by construction")
}

fn decompose_inner(
    path: &JointPath,
    completion: Option<(&mut Completion, usize)>,
) -> Result<Decomposition, DecomposeError> {
    let q: Vec<bool> = path.pairs().iter().map(|&p| classify_step(p)).collect();
    let counters = run_counters(&q);
    let hits = hitting_times(&counters);
    let x_from_path = *counters.t.last().unwrap_or(&0);
    let y_from_path = *counters.s.last().unwrap_or(&0);
    let completion_used = completion.is_some();
    let (x, y) = extract_walks(path, &hits, completion)?;
    Ok(Decomposition {
        q,
        counters,
        hits,
        x,
        y,
        x_from_path,
        y_from_path,
        completion_used,
    })
}

/// Rebuilds the walk values from the component walks and the clock:
/// `B_n = X[T_n] + Y[n - T_n]`, `W_n = X[T_n] - Y[n - T_n]`, with the
/// convention `X[0] = Y[0] = 0`.
pub fn reconstruct(
    x: &[i64],
    y: &[i64],
    t: &[usize],
) -> Result<(Vec<i64>, Vec<i64>), DecomposeError> {
    let mut b = Vec::with_capacity(t.len());
    let mut w = Vec::with_capacity(t.len());
    let mut prev_t = 0usize;
    for (idx, &tn) in t.iter().enumerate() {
        let step = idx + 1;
        if tn < prev_t || tn > prev_t + 1 || tn > step {
            return Err(DecomposeError::BadClock { step });
        }
        prev_t = tn;
        let sn = step - tn;
        let x_val = if tn == 0 {
            0
        } else {
            *x.get(tn - 1).ok_or(DecomposeError::MissingEntry {
                walk: "common",
                index: tn,
            })?
        };
        let y_val = if sn == 0 {
            0
        } else {
            *y.get(sn - 1).ok_or(DecomposeError::MissingEntry {
                walk: "counter",
                index: sn,
            })?
        };
        b.push(x_val + y_val);
        w.push(x_val - y_val);
    }
    Ok((b, w))
}

impl Decomposition {
    /// Horizon length of the decomposed path.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// [`reconstruct`] applied to this decomposition's own pieces.
    pub fn reconstructed(&self) -> Result<(Vec<i64>, Vec<i64>), DecomposeError> {
        reconstruct(&self.x, &self.y, &self.counters.t)
    }

    /// Renders the decomposition as a CSV table with one row per step and
    /// columns `n,B,W,T,S,alpha,beta,X,Y`; cells whose value is not
    /// determined by the path within the horizon are left blank.
    pub fn to_csv(&self, path: &JointPath) -> String {
        let b = path.b_values();
        let w = path.w_values();
        let mut out = String::from("n,B,W,T,S,alpha,beta,X,Y\n");
        let opt = |v: Option<&i64>| v.map(|x| x.to_string()).unwrap_or_default();
        for idx in 0..self.len() {
            let alpha = self.hits.alpha[idx]
                .map(|v| v.to_string())
                .unwrap_or_default();
            let beta = self.hits.beta[idx]
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                idx + 1,
                b[idx],
                w[idx],
                self.counters.t[idx],
                self.counters.s[idx],
                alpha,
                beta,
                opt(self.x.get(idx)),
                opt(self.y.get(idx)),
            ));
        }
        out
    }
}

/// The built-in ten-step example pair used by the guide, the CLI
/// (`decompose --from-table1`) and the golden tests.
pub fn table1() -> JointPath {
    let b = [1, 0, -1, -2, -1, 0, -1, 0, 1, 2];
    let w = [-1, 0, 1, 0, -1, -2, -1, -2, -1, 0];
    JointPath::from_values(&b, &w).expect("valid fixture")
}
