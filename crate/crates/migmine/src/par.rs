//! Data-parallel map helper with a sequential fallback.
//!
//! Per-commit analysis and per-level support counting are embarrassingly
//! parallel; output order always matches input order, so results are
//! identical whichever path runs. The `parallel` cargo feature gates the
//! rayon dependency; the boolean lets callers (and the benchmarks) choose
//! at runtime.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn maybe_par_map<I, T, F>(parallel: bool, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().map(&f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order_both_ways() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = maybe_par_map(false, &items, |&x| x * x);
        let par = maybe_par_map(true, &items, |&x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
