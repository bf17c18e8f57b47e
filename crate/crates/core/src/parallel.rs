//! Trial execution over a worker pool.
//!
//! Work is keyed by trial index and results come back in index order, so
//! output never depends on the number of workers.

use rayon::prelude::*;

/// Runs `f` inside a pool of `workers` threads (0 means one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Evaluates `f(i)` for `i` in `start..end`, in index order.
pub fn map_trials<T: Send>(start: u64, end: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (start..end).into_par_iter().map(f).collect()
}

/// Sums per-trial integer vectors of length `len`. Integer addition keeps the
/// result independent of scheduling.
pub fn sum_trials(
    start: u64,
    end: u64,
    len: usize,
    f: impl Fn(u64, &mut [u64]) + Sync + Send,
) -> Vec<u64> {
    (start..end)
        .into_par_iter()
        .fold(
            || vec![0u64; len],
            |mut acc, i| {
                f(i, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_worker_independence() {
        let f = |i: u64| i.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        let one = with_workers(1, || map_trials(0, 1000, f));
        let four = with_workers(4, || map_trials(0, 1000, f));
        assert_eq!(one, four);
        assert_eq!(one[17], f(17));
    }

    #[test]
    fn sums_match_serial() {
        let got = with_workers(3, || {
            sum_trials(0, 500, 3, |i, acc| {
                acc[(i % 3) as usize] += i;
            })
        });
        let mut want = vec![0u64; 3];
        for i in 0..500 {
            want[(i % 3) as usize] += i;
        }
        assert_eq!(got, want);
    }
}
