//! Exact identity checks over the enumerated path law.
//!
//! Each check verifies, with rational arithmetic, a finite-horizon identity
//! that the asymptotic theory implies step by step: the flip of the sign at
//! the latest constrained step leaves the joint mass unchanged. The checks
//! either pass with the aggregated equality in hand, or fail carrying a
//! witness event and the two unequal masses.

use super::{enumerate_paths, OracleError};
use crate::decompose::decompose;
use crate::model::ModelSpec;
use crate::rational::{rat, rat_zero, Rational};
use crate::sign::Sign;
use num::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

/// Outcome of one exact check. `pass` holds exactly when `lhs == rhs`; on a
/// pass they are the aggregated identity sides (equal by construction), on a
/// failure the first violated sub-equality, detailed in `witness`.
#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub claim: String,
    #[serde(with = "crate::rational::as_repr")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::as_repr")]
    pub rhs: Rational,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// A concrete event exhibiting a failed equality.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Common/counter pattern of the witness event, when the event is
    /// pattern-shaped (factorization checks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_pattern: Option<Vec<u8>>,
    pub detail: String,
    #[serde(with = "crate::rational::as_repr")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::as_repr")]
    pub rhs: Rational,
}

impl ExactReport {
    fn passed(claim: String, lhs: Rational, rhs: Rational) -> ExactReport {
        debug_assert_eq!(lhs, rhs);
        ExactReport {
            claim,
            lhs,
            rhs,
            pass: true,
            witness: None,
        }
    }

    fn failed(claim: String, witness: Witness) -> ExactReport {
        ExactReport {
            claim,
            lhs: witness.lhs.clone(),
            rhs: witness.rhs.clone(),
            pass: false,
            witness: Some(witness),
        }
    }
}

fn sign_slot(sign: Sign) -> usize {
    if sign.is_up() {
        0
    } else {
        1
    }
}

fn check_indices(indices: &[usize], horizon: usize, name: &str) -> Result<(), OracleError> {
    let increasing = indices.windows(2).all(|w| w[0] < w[1]);
    if indices.iter().any(|&i| i == 0 || i > horizon) || !increasing {
        return Err(OracleError::BadIndices {
            detail: format!("{name} = {indices:?} with horizon {horizon}"),
        });
    }
    Ok(())
}

fn require_fair_marginals(model: &ModelSpec) -> Result<(), OracleError> {
    if model.marginal_p() != rat(1, 2) {
        return Err(OracleError::FairMarginalsRequired {
            kind: model.kind_name(),
        });
    }
    Ok(())
}

/// Verifies that conditioning on where the `n`-th common (resp. counter)
/// movement happens leaves its sign fair: for every step `h <= horizon` the
/// up and down masses agree exactly, and hence the aggregated masses do.
/// Holds for every valid fair-marginal model, no extra condition needed.
pub fn check_sign_symmetry(
    model: &ModelSpec,
    horizon: usize,
    n: usize,
) -> Result<ExactReport, OracleError> {
    check_indices(&[n], horizon, "n")?;
    require_fair_marginals(model)?;
    let claim = format!("sign-symmetry[{} N={horizon} n={n}]", model.kind_name());
    let zero_row = || vec![[rat_zero(), rat_zero()]; horizon + 1];
    let mut alpha_mass = zero_row();
    let mut beta_mass = zero_row();
    for wp in enumerate_paths(model, horizon)? {
        if wp.prob.is_zero() {
            continue;
        }
        let d = decompose(&wp.path);
        if let Some(h) = d.hits.alpha[n - 1] {
            alpha_mass[h][sign_slot(wp.path.pair(h).xi)] += wp.prob.clone();
        }
        if let Some(h) = d.hits.beta[n - 1] {
            beta_mass[h][sign_slot(wp.path.pair(h).xi)] += wp.prob.clone();
        }
    }
    for (side, mass) in [("common", &alpha_mass), ("counter", &beta_mass)] {
        for (h, cells) in mass.iter().enumerate().skip(n) {
            if cells[0] != cells[1] {
                return Ok(ExactReport::failed(
                    claim,
                    Witness {
                        q_pattern: None,
                        detail: format!("{side}-move sign masses differ at step {h}"),
                        lhs: cells[0].clone(),
                        rhs: cells[1].clone(),
                    },
                ));
            }
        }
    }
    let up: Rational = alpha_mass.iter().map(|c| c[0].clone()).sum();
    let down: Rational = alpha_mass.iter().map(|c| c[1].clone()).sum();
    let half_total = (up.clone() + down) / rat(2, 1);
    Ok(ExactReport::passed(claim, up, half_total))
}

/// Sign vectors over the requested hitting times, encoded with bit `i` set
/// when entry `i` is an up move; common-move entries first.
fn sign_key(path: &crate::path::JointPath, steps: &[usize]) -> usize {
    steps.iter().enumerate().fold(0usize, |key, (i, &h)| {
        key | (usize::from(path.pair(h).xi.is_up()) << i)
    })
}

/// Verifies the halving recursion: on the event that the last constrained
/// hitting time is the latest of them all and lands within the horizon,
/// flipping its sign does not move the joint mass, so marginalizing it
/// exactly halves the probability. Checked for every assignment of the
/// remaining signs, on both the common side (`alpha` latest) and the counter
/// side (`beta` latest).
pub fn check_halving_recursion(
    model: &ModelSpec,
    horizon: usize,
    n_indices: &[usize],
    m_indices: &[usize],
) -> Result<ExactReport, OracleError> {
    check_indices(n_indices, horizon, "n_indices")?;
    check_indices(m_indices, horizon, "m_indices")?;
    require_fair_marginals(model)?;
    let (k, l) = (n_indices.len(), m_indices.len());
    if k + l == 0 {
        return Err(OracleError::BadIndices {
            detail: "no indices requested".into(),
        });
    }
    let claim = format!(
        "halving[{} N={horizon} n={n_indices:?} m={m_indices:?}]",
        model.kind_name()
    );
    let cells = 1usize << (k + l);
    let mut alpha_latest_mass = vec![rat_zero(); cells];
    let mut beta_latest_mass = vec![rat_zero(); cells];
    for wp in enumerate_paths(model, horizon)? {
        if wp.prob.is_zero() {
            continue;
        }
        let d = decompose(&wp.path);
        let alpha_steps: Vec<Option<usize>> =
            n_indices.iter().map(|&n| d.hits.alpha[n - 1]).collect();
        let beta_steps: Vec<Option<usize>> =
            m_indices.iter().map(|&m| d.hits.beta[m - 1]).collect();
        let all_reached = |steps: &[Option<usize>]| steps.iter().all(Option::is_some);
        if !all_reached(&alpha_steps) || !all_reached(&beta_steps) {
            continue;
        }
        let steps: Vec<usize> = alpha_steps
            .iter()
            .chain(beta_steps.iter())
            .map(|s| s.unwrap())
            .collect();
        let key = sign_key(&wp.path, &steps);
        let last_alpha = alpha_steps.last().map(|s| s.unwrap());
        let last_beta = beta_steps.last().map(|s| s.unwrap());
        match (last_alpha, last_beta) {
            (Some(a), Some(b)) if a > b => alpha_latest_mass[key] += wp.prob,
            (Some(a), Some(b)) if b > a => beta_latest_mass[key] += wp.prob,
            (Some(_), None) => alpha_latest_mass[key] += wp.prob,
            (None, Some(_)) => beta_latest_mass[key] += wp.prob,
            _ => unreachable!("a common and a counter move cannot share a step"),
        }
    }
    // Flip equality for the last alpha sign (bit k - 1) on the alpha-latest
    // event, and for the last beta sign (bit k + l - 1) on the beta-latest
    // event.
    let verify = |mass: &[Rational], flip_bit: usize, side: &str| -> Option<Witness> {
        for key in 0..cells {
            if key & (1 << flip_bit) != 0 {
                continue;
            }
            let flipped = key | (1 << flip_bit);
            if mass[key] != mass[flipped] {
                return Some(Witness {
                        q_pattern: None,
                        detail: format!(
                            "flip of the latest {side}-move sign moves the mass (sign cell {key:#b} vs {flipped:#b})"
                        ),
                        lhs: mass[key].clone(),
                        rhs: mass[flipped].clone(),
                    });
            }
        }
        None
    };
    if k > 0 {
        if let Some(w) = verify(&alpha_latest_mass, k - 1, "common") {
            return Ok(ExactReport::failed(claim, w));
        }
    }
    if l > 0 {
        if let Some(w) = verify(&beta_latest_mass, k + l - 1, "counter") {
            return Ok(ExactReport::failed(claim, w));
        }
    }
    // Aggregated representative: all-up signs against half the mass with the
    // latest constrained sign marginalized.
    let (mass, flip_bit) = if k > 0 {
        (&alpha_latest_mass, k - 1)
    } else {
        (&beta_latest_mass, k + l - 1)
    };
    let all_up = cells - 1;
    let lhs = mass[all_up].clone();
    let rhs = (mass[all_up].clone() + mass[all_up ^ (1 << flip_bit)].clone()) / rat(2, 1);
    Ok(ExactReport::passed(claim, lhs, rhs))
}

/// Verifies the factorization that state-adapted models satisfy: jointly with
/// any full common/counter pattern that reaches all requested hitting times,
/// every sign assignment carries exactly `2^-(k+l)` of the pattern's mass.
/// Models whose `theta` peeks at past signs break this, and the report then
/// carries the offending pattern and masses.
pub fn check_c1_factorization(
    model: &ModelSpec,
    horizon: usize,
    n_indices: &[usize],
    m_indices: &[usize],
) -> Result<ExactReport, OracleError> {
    check_indices(n_indices, horizon, "n_indices")?;
    check_indices(m_indices, horizon, "m_indices")?;
    require_fair_marginals(model)?;
    let (k, l) = (n_indices.len(), m_indices.len());
    if k + l == 0 {
        return Err(OracleError::BadIndices {
            detail: "no indices requested".into(),
        });
    }
    let claim = format!(
        "factorization[{} N={horizon} n={n_indices:?} m={m_indices:?}]",
        model.kind_name()
    );
    let cells = 1usize << (k + l);
    // pattern key -> (pattern mass, sign-cell masses, hit steps reached?)
    let mut by_pattern: BTreeMap<usize, (Rational, Vec<Rational>, bool)> = BTreeMap::new();
    for wp in enumerate_paths(model, horizon)? {
        if wp.prob.is_zero() {
            continue;
        }
        let d = decompose(&wp.path);
        let pattern_key =
            d.q.iter()
                .enumerate()
                .fold(0usize, |key, (i, &bit)| key | (usize::from(bit) << i));
        let entry = by_pattern
            .entry(pattern_key)
            .or_insert_with(|| (rat_zero(), vec![rat_zero(); cells], false));
        entry.0 += wp.prob.clone();
        let steps: Option<Vec<usize>> = n_indices
            .iter()
            .map(|&n| d.hits.alpha[n - 1])
            .chain(m_indices.iter().map(|&m| d.hits.beta[m - 1]))
            .collect();
        if let Some(steps) = steps {
            entry.1[sign_key(&wp.path, &steps)] += wp.prob;
            entry.2 = true;
        }
    }
    let scale = rat(1, 1 << (k + l));
    let mut lhs_total = rat_zero();
    let mut rhs_total = rat_zero();
    for (pattern_key, (pattern_mass, sign_mass, reached)) in &by_pattern {
        if !reached {
            continue;
        }
        let target = pattern_mass * &scale;
        for (cell, mass) in sign_mass.iter().enumerate() {
            if *mass != target {
                let pattern_bits: Vec<u8> = (0..horizon)
                    .map(|i| ((pattern_key >> i) & 1) as u8)
                    .collect();
                return Ok(ExactReport::failed(
                    claim,
                    Witness {
                        q_pattern: Some(pattern_bits.clone()),
                        detail: format!(
                            "sign cell {cell:#b} under pattern {pattern_bits:?} carries {mass} instead of {target}"
                        ),
                        lhs: mass.clone(),
                        rhs: target.clone(),
                    },
                ));
            }
        }
        lhs_total += sign_mass[cells - 1].clone();
        rhs_total += target;
    }
    Ok(ExactReport::passed(claim, lhs_total, rhs_total))
}

/// Runs the factorization check at growing horizons and returns the first
/// failing report, i.e. the minimal-horizon witness. `None` when every
/// horizon up to `max_horizon` factorizes.
pub fn minimal_factorization_witness(
    model: &ModelSpec,
    max_horizon: usize,
    n_indices: &[usize],
    m_indices: &[usize],
) -> Result<Option<(usize, ExactReport)>, OracleError> {
    let needed = n_indices
        .iter()
        .chain(m_indices)
        .copied()
        .max()
        .unwrap_or(1);
    for horizon in needed..=max_horizon {
        let report = check_c1_factorization(model, horizon, n_indices, m_indices)?;
        if !report.pass {
            return Ok(Some((horizon, report)));
        }
    }
    Ok(None)
}

/// Verifies the biased-marginal identity: per step `h`, the surplus of up
/// over down mass for the `n`-th common movement landing at `h` is exactly
/// `(2p - 1) * P(T_{h-1} = n - 1)`, hence the aggregated form
///
/// ```text
/// P(common sign up, hit <= N) =
///     (P(hit <= N) + (2p - 1) * sum_h P(T_{h-1} = n - 1)) / 2
/// ```
///
/// and the counter-move signs stay exactly fair. At `p = 1/2` this reduces
/// to the plain sign symmetry.
pub fn check_biased_formula(
    model: &ModelSpec,
    horizon: usize,
    n: usize,
) -> Result<ExactReport, OracleError> {
    check_indices(&[n], horizon, "n")?;
    let claim = format!("biased-formula[{} N={horizon} n={n}]", model.kind_name());
    let p = model.marginal_p();
    let drift = rat(2, 1) * p - rat(1, 1);
    let mut alpha_mass = vec![[rat_zero(), rat_zero()]; horizon + 1];
    let mut beta_mass = vec![[rat_zero(), rat_zero()]; horizon + 1];
    let mut clock_mass = vec![rat_zero(); horizon + 1];
    for wp in enumerate_paths(model, horizon)? {
        if wp.prob.is_zero() {
            continue;
        }
        let d = decompose(&wp.path);
        if let Some(h) = d.hits.alpha[n - 1] {
            alpha_mass[h][sign_slot(wp.path.pair(h).xi)] += wp.prob.clone();
        }
        if let Some(h) = d.hits.beta[n - 1] {
            beta_mass[h][sign_slot(wp.path.pair(h).xi)] += wp.prob.clone();
        }
        // P(T_{h-1} = n - 1) per step h; T_0 = 0.
        for (h, slot) in clock_mass.iter_mut().enumerate().skip(n) {
            let t_before = if h == 1 { 0 } else { d.counters.t[h - 2] };
            if t_before == n - 1 {
                *slot += wp.prob.clone();
            }
        }
    }
    for h in n..=horizon {
        let surplus = alpha_mass[h][0].clone() - alpha_mass[h][1].clone();
        let expected = drift.clone() * clock_mass[h].clone();
        if surplus != expected {
            return Ok(ExactReport::failed(
                claim,
                Witness {
                    q_pattern: None,
                    detail: format!("common-move sign surplus at step {h}"),
                    lhs: surplus,
                    rhs: expected,
                },
            ));
        }
        if beta_mass[h][0] != beta_mass[h][1] {
            return Ok(ExactReport::failed(
                claim,
                Witness {
                    q_pattern: None,
                    detail: format!("counter-move sign masses differ at step {h}"),
                    lhs: beta_mass[h][0].clone(),
                    rhs: beta_mass[h][1].clone(),
                },
            ));
        }
    }
    let up: Rational = alpha_mass.iter().map(|c| c[0].clone()).sum();
    let down: Rational = alpha_mass.iter().map(|c| c[1].clone()).sum();
    let clock_sum: Rational = clock_mass.iter().skip(n).cloned().sum();
    let rhs = (up.clone() + down + drift * clock_sum) / rat(2, 1);
    Ok(ExactReport::passed(claim, up, rhs))
}
