//! Executable verification procedures for the measurement rules.

pub mod born;
pub mod collapse;
pub mod overlap;
pub mod postulate_a;
pub mod postulate_b;
mod report;

pub use report::CheckReport;

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
