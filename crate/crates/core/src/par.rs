//! Data-parallel helpers. With the `parallel` feature (default) work is spread
//! over the rayon pool; without it, or under [`Execution::Sequential`], the
//! same closures run in order on the calling thread. Results are always
//! returned in input order, so both paths produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn available(self) -> bool {
        matches!(self, Execution::Sequential) || cfg!(feature = "parallel")
    }
}

pub fn map_range<T, F>(len: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}

pub fn map<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(items.len(), exec, |k| f(&items[k]))
}

/// Parallel map that stops at the first error (by input order).
pub fn try_map<S, T, E, F>(items: &[S], f: F) -> Result<Vec<T>, E>
where
    S: Sync,
    T: Send,
    E: Send,
    F: Fn(&S) -> Result<T, E> + Sync + Send,
{
    map(items, Execution::default(), f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let seq = map_range(1000, Execution::Sequential, |k| k * k);
        let par = map_range(1000, Execution::Parallel, |k| k * k);
        assert_eq!(seq, par);
    }
}
