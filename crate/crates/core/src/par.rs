//! Order-preserving parallel map over index ranges.

use std::thread;

use crate::error::Result;

/// Maps `f` over `0..n` on scoped threads; results keep index order.
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let workers = thread::available_parallelism().map_or(1, |w| w.get()).min(n.max(1));
    let chunk = n.div_ceil(workers.max(1)).max(1);
    let f = &f;
    let parts: Vec<Vec<Result<T>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|lo| s.spawn(move || (lo..(lo + chunk).min(n)).map(f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    parts.into_iter().flatten().collect()
}
