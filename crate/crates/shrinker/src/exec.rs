//! Switch between the data-parallel core and the sequential fallback.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items (template batches, per-predicate passes, audited
/// rules) are executed. `Parallel` is only available with the `parallel`
/// feature; it is the default when the feature is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

pub(crate) fn map_collect<T, U>(
    mode: ExecMode,
    items: Vec<T>,
    f: impl Fn(T) -> U + Send + Sync,
) -> Vec<U>
where
    T: Send,
    U: Send,
{
    match mode {
        ExecMode::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => items.into_par_iter().map(f).collect(),
    }
}
