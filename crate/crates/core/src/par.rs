//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool; without it the same closures run sequentially.
//! Both paths reduce in a fixed order so results are identical.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `Parallel` when the feature is compiled in, otherwise `Sequential`.
    pub fn available() -> Exec {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Map `f` over `0..n` and collect in index order.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Fold `0..n` in chunks with `fold`, then combine chunk results with
/// `reduce`. `reduce` must be associative; chunk boundaries are fixed so
/// the sequential and parallel paths see the same partial results.
pub fn fold_range<A, F, R>(exec: Exec, n: u64, chunk: u64, identity: A, fold: F, reduce: R) -> A
where
    A: Send + Sync + Clone,
    F: Fn(A, u64) -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let run = |c: u64| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).fold(identity.clone(), &fold)
    };
    let partials = map_range(exec, chunks as usize, |c| run(c as u64));
    partials.into_iter().fold(identity.clone(), &reduce)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let seq = fold_range(Exec::Sequential, 10_000, 97, 0u64, |a, i| a + i * i, |a, b| a + b);
        let par = fold_range(Exec::Parallel, 10_000, 97, 0u64, |a, i| a + i * i, |a, b| a + b);
        assert_eq!(seq, par);
        assert_eq!(map_range(Exec::Parallel, 5, |i| i * 2), vec![0, 2, 4, 6, 8]);
    }
}
