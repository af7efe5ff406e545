//! Execution policy for the data-parallel kernels.
//!
//! Every kernel that fans out work takes an [`Exec`]. With the `parallel`
//! feature disabled, [`Exec::Parallel`] silently runs on the calling thread.
//!
//! Reductions are split into fixed-size chunks whose partial results are
//! combined in chunk order, so both policies produce bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of tensor entries folded into one partial accumulator.
pub(crate) const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this policy actually fans out in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Folds `items` chunk by chunk into dense accumulators of length `len`,
/// then sums the partials in chunk order.
pub(crate) fn chunked_accumulate<T, F>(exec: Exec, items: &[T], len: usize, f: F) -> Vec<f64>
where
    T: Sync,
    F: Fn(&T, &mut [f64]) + Sync + Send,
{
    let fold = |chunk: &[T]| {
        let mut acc = vec![0.0; len];
        for item in chunk {
            f(item, &mut acc);
        }
        acc
    };

    let partials: Vec<Vec<f64>> = {
        #[cfg(feature = "parallel")]
        {
            if exec.is_parallel() {
                items.par_chunks(CHUNK).map(fold).collect()
            } else {
                items.chunks(CHUNK).map(fold).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = exec;
            items.chunks(CHUNK).map(fold).collect()
        }
    };

    let mut out = vec![0.0; len];
    for partial in &partials {
        for (o, p) in out.iter_mut().zip(partial) {
            *o += p;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_bitwise() {
        let items: Vec<f64> = (0..20_000).map(|i| (i as f64).sin() * 1e-3).collect();
        let run = |exec| {
            chunked_accumulate(exec, &items, 7, |v, acc: &mut [f64]| {
                let slot = (v.to_bits() % 7) as usize;
                acc[slot] += v;
            })
        };
        let seq = run(Exec::Sequential);
        let par = run(Exec::Parallel);
        assert_eq!(
            seq.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            par.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn map_keeps_order() {
        let items: Vec<usize> = (0..1000).collect();
        let out = map_ordered(Exec::Parallel, &items, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 2 * i));
    }
}
