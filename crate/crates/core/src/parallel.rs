//! Execution strategy for embarrassingly parallel loops.
//!
//! Both strategies return results in input order, so outputs are identical.

/// How per-item work inside the solvers is scheduled. The default is the
/// data-parallel path when it is compiled in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[cfg_attr(not(feature = "rayon"), default)]
    Sequential,
    #[cfg(feature = "rayon")]
    #[default]
    Rayon,
}

impl Parallelism {
    /// `items.map(f)` collected in order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Parallelism::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "rayon")]
            Parallelism::Rayon => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Fallible map; the first error in input order is returned.
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}
