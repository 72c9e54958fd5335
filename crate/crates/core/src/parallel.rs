//! Sample-parallel loops whose results do not depend on the worker count.
//!
//! Samples are grouped into fixed-size chunks; each chunk is folded
//! sequentially and chunk results are merged pairwise in index order.

use rayon::prelude::*;

use crate::Result;

pub const CHUNK: u64 = 64;

/// Run `f` on a dedicated pool of `threads` workers (`0` = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn chunk_ranges(count: u64) -> Vec<(u64, u64)> {
    (0..count.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(count)))
        .collect()
}

/// Fold `fold(acc, i)` over `i in 0..count` and combine with `merge`.
pub fn map_reduce<A, I, F, M>(count: u64, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let partials: Vec<Result<A>> = chunk_ranges(count)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = init();
            for i in lo..hi {
                fold(&mut acc, i)?;
            }
            Ok(acc)
        })
        .collect();
    let mut level = Vec::with_capacity(partials.len());
    for p in partials {
        level.push(p?);
    }
    if level.is_empty() {
        return Ok(init());
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                merge(&mut a, b);
            }
            next.push(a);
        }
        level = next;
    }
    Ok(level.pop().unwrap())
}

/// `f(i)` for `i in 0..count`, in index order; the first error by index wins.
pub fn map_collect<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..count).into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Pairwise sum in a fixed tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 16 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn reduction_is_thread_count_independent() {
        let run = |threads| {
            with_threads(threads, || {
                map_reduce(
                    1000,
                    || 0.0f64,
                    |acc, i| {
                        *acc += (i as f64).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
                        Ok(())
                    },
                    |a, b| *a += b,
                )
                .unwrap()
            })
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(3).to_bits());
        assert_eq!(one.to_bits(), run(8).to_bits());
    }

    #[test]
    fn first_error_by_index() {
        let r: Result<Vec<u64>> = map_collect(300, |i| {
            if i == 150 || i == 250 {
                Err(Error::BlowUp {
                    step: i,
                    sample: Some(i),
                })
            } else {
                Ok(i)
            }
        });
        assert!(matches!(r, Err(Error::BlowUp { step: 150, .. })));
    }

    #[test]
    fn empty_reduce_is_init() {
        let v = map_reduce(0, || 5u32, |_, _| Ok(()), |a, b| *a += b).unwrap();
        assert_eq!(v, 5);
    }

    #[test]
    fn pairwise_matches_plain_sum_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
