//! Trial-loop driver: rayon when the `parallel` feature is on, a plain
//! sequential loop otherwise.
//!
//! Both variants have identical semantics: `f` is called once per index in
//! `0..trials` and results come back in index order. Callers derive any
//! randomness from the index (see [`crate::rng::substream`]), so the two
//! variants — and any thread count — produce byte-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..trials`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Map `f` over `0..trials`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    run_trials_seq(trials, f)
}

/// Sequential reference loop; same contract as [`run_trials`]. Kept
/// unconditionally so benches can compare the two under one build.
pub fn run_trials_seq<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..trials).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, substream};
    use rand::Rng;

    #[test]
    fn parallel_and_sequential_agree_exactly() {
        let draw = |t: usize| -> f64 { substream(9, domain::FADING, t as u64).random() };
        let par = run_trials(1000, draw);
        let seq = run_trials_seq(1000, draw);
        assert_eq!(par, seq);
    }

    #[test]
    fn results_stay_in_index_order() {
        assert_eq!(run_trials(5, |t| t * t), vec![0, 1, 4, 9, 16]);
    }
}
