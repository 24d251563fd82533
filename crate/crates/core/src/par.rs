//! Parallel map helper for the data-parallel inner loops (grid cells,
//! vertex candidates, oracle pairs).
//!
//! Callers pass a [`Parallelism`] hint; results always come back in input
//! order, so sequential and parallel runs are bit-identical. Without the
//! `parallel` feature everything degrades to a plain loop.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Use a thread pool; `None` means one thread per core.
    Threads(Option<usize>),
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Threads(None)
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    /// Interprets a `--jobs N` style hint: 1 is sequential.
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => Parallelism::Sequential,
            Some(n) => Parallelism::Threads(Some(n)),
            None => Parallelism::default(),
        }
    }
}

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, par: Parallelism, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match par {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        Parallelism::Threads(None) => items.into_par_iter().map(f).collect(),
        Parallelism::Threads(Some(n)) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool construction");
            pool.install(|| items.into_par_iter().map(f).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, _par: Parallelism, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let squares = |par| map_collect((0..100u64).collect(), par, |v| v * v);
        let seq = squares(Parallelism::Sequential);
        assert_eq!(seq, squares(Parallelism::Threads(None)));
        assert_eq!(seq, squares(Parallelism::Threads(Some(2))));
        assert_eq!(seq[7], 49);
    }
}
