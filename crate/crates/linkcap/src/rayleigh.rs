//! Temporal Rayleigh fading: closed-form per-link success probabilities
//! under a transmission-probability vector, exponential bounds on them,
//! expected weighted throughput, a coordinate-ascent probability
//! optimizer, and the sparsification rounding that turns a probability
//! vector into a feasible set.
//!
//! Throughout this module the threshold is folded into affectance:
//! `â_j(i) = β·a_j(i)`, so feasibility reads `â_S(i) ≤ 1`. Every formula
//! below is written in that normalization.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GainTable, LinkId};
use crate::oracle::{brute_force_opt, BRUTE_FORCE_MAX};
use crate::par::run_trials;
use crate::rng::{domain, substream};
use crate::sched::robust_partition;

/// Per-link transmission probabilities, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(v) = p.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
            return Err(Error::Invalid(format!(
                "transmission probabilities must lie in [0, 1], got {v}"
            )));
        }
        Ok(ProbVector(p))
    }

    pub fn ones(n: usize) -> Self {
        ProbVector(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        ProbVector(vec![0.0; n])
    }

    /// 0/1 vector with ones exactly on `set`.
    pub fn indicator(n: usize, set: &[LinkId]) -> Self {
        let mut p = vec![0.0; n];
        for &i in set {
            p[i] = 1.0;
        }
        ProbVector(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// ---- closed forms -----------------------------------------------------------

/// Probability that link `i` succeeds in one slot: `i` transmits, and its
/// exponentially faded signal beats `β` times the faded interference of
/// the other transmitters. Independence makes this a product:
/// `Q(i) = p_i · Π_{j≠i} (1 − p_j + p_j/(1 + β·a_j(i)))`.
pub fn success_prob(gains: &GainTable, p: &ProbVector, i: LinkId, beta: f64) -> f64 {
    let p = p.as_slice();
    assert_eq!(p.len(), gains.n(), "probability vector length mismatch");
    let mut q = p[i];
    for (j, &pj) in p.iter().enumerate() {
        if j != i {
            q *= 1.0 - pj + pj / (1.0 + beta * gains.affectance(j, i));
        }
    }
    q
}

/// Expected folded affectance on link `i`:
/// `Â(i) = Σ_{j≠i} p_j · β·a_j(i)`.
pub fn expected_affectance(gains: &GainTable, p: &ProbVector, i: LinkId, beta: f64) -> f64 {
    let p = p.as_slice();
    assert_eq!(p.len(), gains.n(), "probability vector length mismatch");
    p.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &pj)| pj * beta * gains.affectance(j, i))
        .sum()
}

/// Exponential bounds on the success probability:
/// `(p_i·e^{−Â(i)}, p_i·e^{−Â(i)/2})`.
///
/// The lower bound holds unconditionally (each product factor
/// `1 − p·â/(1+â)` is at least `e^{−p·â}`). The upper bound is valid when
/// every pairwise folded affectance on `i` is at most 1; a single huge
/// interferer can push the true probability above it.
pub fn qbnd(gains: &GainTable, p: &ProbVector, i: LinkId, beta: f64) -> (f64, f64) {
    let a = expected_affectance(gains, p, i, beta);
    let pi = p.as_slice()[i];
    (pi * (-a).exp(), pi * (-a / 2.0).exp())
}

/// Expected weighted number of successes, `Σ_i w_i·Q(i)`.
pub fn expected_weight(gains: &GainTable, weights: &[f64], p: &ProbVector, beta: f64) -> f64 {
    assert_eq!(weights.len(), gains.n(), "weight vector length mismatch");
    (0..gains.n())
        .map(|i| weights[i] * success_prob(gains, p, i, beta))
        .sum()
}

// ---- probability optimization ------------------------------------------------

/// Heuristic maximizer of the expected weight over probability vectors.
///
/// The objective is affine in each coordinate, so a cyclic pass sets every
/// `p_i` to its better endpoint (ties toward 1) until a full pass changes
/// nothing (capped at 200 passes). Three starts are polished and the best
/// result returned: all ones, the indicator of an exhaustive-search
/// optimum (skipped beyond desk scale), and the indicator of the largest
/// bin of a robustness partition at the measured affectance bound.
pub fn optimize_probs(gains: &GainTable, weights: &[f64], beta: f64) -> ProbVector {
    let n = gains.n();
    assert_eq!(weights.len(), n, "weight vector length mismatch");
    if n == 0 {
        return ProbVector(Vec::new());
    }

    let mut starts = vec![ProbVector::ones(n)];
    if n <= BRUTE_FORCE_MAX {
        if let Ok(best) = brute_force_opt(gains, beta, Some(weights)) {
            starts.push(ProbVector::indicator(n, &best.set));
        }
    }
    let all: Vec<LinkId> = (0..n).collect();
    let max_a = all
        .iter()
        .map(|&j| gains.set_affectance(&all, j))
        .fold(0.0, f64::max);
    if max_a > 0.0 {
        if let Ok(part) = robust_partition(gains, &all, beta, 1.0 / max_a) {
            if let Some(bin) = part.bins.iter().max_by_key(|b| b.len()) {
                starts.push(ProbVector::indicator(n, bin));
            }
        }
    }

    let mut best: Option<(f64, ProbVector)> = None;
    for mut p in starts {
        for _pass in 0..200 {
            let mut changed = false;
            for i in 0..n {
                let old = p.0[i];
                p.0[i] = 0.0;
                let w0 = expected_weight(gains, weights, &p, beta);
                p.0[i] = 1.0;
                let w1 = expected_weight(gains, weights, &p, beta);
                let new = if w1 >= w0 { 1.0 } else { 0.0 };
                p.0[i] = new;
                changed |= new != old;
            }
            if !changed {
                break;
            }
        }
        let w = expected_weight(gains, weights, &p, beta);
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, p));
        }
    }
    best.expect("at least one start").1
}

// ---- sparsification ------------------------------------------------------------

/// The rounding constant `k = 4·ln(11/2) ≈ 6.819`.
pub fn sparsify_k() -> f64 {
    4.0 * (11.0f64 / 2.0).ln()
}

/// Rounds a probability vector to a feasible set: restrict to links whose
/// expected folded affectance is at most `k`, flip a `q_i/(2k)` coin for
/// each (in id order; excluded links consume no draws), and keep the
/// sampled links whose folded affectance within the sample is at most 1.
/// The output therefore always passes the feasibility check at `β`.
pub fn sparsify(
    gains: &GainTable,
    q: &ProbVector,
    beta: f64,
    rng: &mut impl Rng,
) -> Vec<LinkId> {
    let k = sparsify_k();
    let qs = q.as_slice();
    assert_eq!(qs.len(), gains.n(), "probability vector length mismatch");
    let x: Vec<LinkId> = (0..gains.n())
        .filter(|&i| expected_affectance(gains, q, i, beta) <= k)
        .filter(|&i| rng.random::<f64>() < qs[i] / (2.0 * k))
        .collect();
    x.iter()
        .copied()
        .filter(|&i| beta * gains.set_affectance(&x, i) <= 1.0)
        .collect()
}

// ---- Monte Carlo -----------------------------------------------------------------

/// Per-link success frequencies and their standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub freq: Vec<f64>,
    pub se: Vec<f64>,
    pub trials: u64,
}

const MC_BATCH: u64 = 256;

/// Monte Carlo check of the fading model. Each trial samples the
/// transmitting set from `p`, draws an independent unit-exponential fade
/// for every active signal and every active interference pair, and scores
/// strict SIR successes. Trials are grouped into fixed-size batches, one
/// RNG substream per batch, so parallel and sequential runs count the
/// exact same integers.
pub fn mc_fading(
    gains: &GainTable,
    p: &ProbVector,
    beta: f64,
    trials: u64,
    seed: u64,
) -> McEstimate {
    let n = gains.n();
    assert_eq!(p.len(), n, "probability vector length mismatch");
    let batches = trials.div_ceil(MC_BATCH);
    let counts = run_trials(batches as usize, |b| {
        let b = b as u64;
        let mut rng = substream(seed, domain::FADING, b);
        let batch_trials = MC_BATCH.min(trials - b * MC_BATCH);
        let mut counts = vec![0u64; n];
        let mut tx: Vec<LinkId> = Vec::with_capacity(n);
        let mut faded_signal = vec![0.0f64; n];
        for _ in 0..batch_trials {
            // Coins for every link, in id order, regardless of p.
            tx.clear();
            for (i, &pi) in p.as_slice().iter().enumerate() {
                if rng.random::<f64>() < pi {
                    tx.push(i);
                }
            }
            for &i in &tx {
                let fade: f64 = rng.sample(Exp1);
                faded_signal[i] = fade * gains.signal(i);
            }
            // Victim-outer, interferer-inner, both in id order.
            for &i in &tx {
                let mut interference = 0.0;
                for &j in &tx {
                    if j != i {
                        let fade: f64 = rng.sample(Exp1);
                        interference += fade * gains.interference(j, i);
                    }
                }
                if faded_signal[i] > beta * interference {
                    counts[i] += 1;
                }
            }
        }
        counts
    });

    let mut total = vec![0u64; n];
    for batch in counts {
        for (t, c) in total.iter_mut().zip(batch) {
            *t += c;
        }
    }
    let freq: Vec<f64> = total.iter().map(|&c| c as f64 / trials as f64).collect();
    let se = freq
        .iter()
        .map(|&f| (f * (1.0 - f) / trials as f64).sqrt())
        .collect();
    McEstimate {
        freq,
        se,
        trials,
    }
}

// ---- report -----------------------------------------------------------------------

/// Everything the experiment layer exports about one probability vector.
#[derive(Clone, Debug, Serialize)]
pub struct FadingReport {
    /// The transmission probabilities the report was computed for.
    pub q: Vec<f64>,
    /// Closed-form success probability per link.
    pub success: Vec<f64>,
    /// Unconditional exponential lower bound per link.
    pub lower: Vec<f64>,
    /// Exponential upper bound per link (valid in the `â ≤ 1` regime).
    pub upper: Vec<f64>,
    /// Expected folded affectance per link.
    pub affectance: Vec<f64>,
    /// Expected weighted number of successes.
    pub expected_weight: f64,
}

pub fn fading_report(
    gains: &GainTable,
    weights: &[f64],
    p: &ProbVector,
    beta: f64,
) -> FadingReport {
    let n = gains.n();
    let mut report = FadingReport {
        q: p.as_slice().to_vec(),
        success: Vec::with_capacity(n),
        lower: Vec::with_capacity(n),
        upper: Vec::with_capacity(n),
        affectance: Vec::with_capacity(n),
        expected_weight: expected_weight(gains, weights, p, beta),
    };
    for i in 0..n {
        let (lo, hi) = qbnd(gains, p, i, beta);
        report.success.push(success_prob(gains, p, i, beta));
        report.lower.push(lo);
        report.upper.push(hi);
        report.affectance.push(expected_affectance(gains, p, i, beta));
    }
    report
}
