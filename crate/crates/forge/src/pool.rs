//! Worker-pool cap and a deterministic scoped parallel map.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

static THREAD_CAP: AtomicUsize = AtomicUsize::new(0);

/// Caps the number of worker threads used by parallel sections.
pub fn set_threads(n: usize) {
    THREAD_CAP.store(n.max(1), Ordering::Relaxed);
}

/// Current worker cap: the explicit setting, else `SLATE_FORGE_THREADS`,
/// else the available parallelism (at most 8).
pub fn threads() -> usize {
    let set = THREAD_CAP.load(Ordering::Relaxed);
    if set > 0 {
        return set;
    }
    if let Ok(v) = std::env::var("SLATE_FORGE_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get().min(8))
        .unwrap_or(1)
}

/// Applies `f` to every index in `0..items`, fanning out across at most
/// `states.len()` workers. Each worker owns one state slot (scratch
/// buffers live there), items are chunked contiguously, and results come
/// back in index order, so the output is identical for any worker count.
pub fn parallel_map_with<S: Send, T: Send>(
    items: usize,
    states: &mut [S],
    f: impl Fn(usize, &mut S) -> T + Sync,
) -> Vec<T> {
    assert!(!states.is_empty());
    let workers = states.len().min(items).max(1);
    if workers <= 1 || items <= 1 {
        let state = &mut states[0];
        return (0..items).map(|i| f(i, state)).collect();
    }
    let chunk = items.div_ceil(workers);
    let mut partials: Vec<Vec<T>> = Vec::with_capacity(workers);
    let results: Mutex<Vec<(usize, Vec<T>)>> = Mutex::new(Vec::with_capacity(workers));
    std::thread::scope(|scope| {
        for (w, state) in states.iter_mut().take(workers).enumerate() {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(items);
            let f = &f;
            let results = &results;
            scope.spawn(move || {
                let mut out = Vec::with_capacity(hi.saturating_sub(lo));
                for i in lo..hi {
                    out.push(f(i, state));
                }
                results.lock().unwrap().push((w, out));
            });
        }
    });
    let mut collected = results.into_inner().unwrap();
    collected.sort_by_key(|(w, _)| *w);
    for (_, part) in collected {
        partials.push(part);
    }
    partials.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let mut states = vec![(), (), ()];
        let out = parallel_map_with(10, &mut states, |i, _| i * i);
        assert_eq!(out, (0..10).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn single_worker_inline() {
        let mut states = vec![0u32];
        let out = parallel_map_with(4, &mut states, |i, s| {
            *s += 1;
            i
        });
        assert_eq!(out, vec![0, 1, 2, 3]);
        assert_eq!(states[0], 4);
    }

    #[test]
    fn result_independent_of_worker_count() {
        let compute = |i: usize, _: &mut ()| (i as f64 * 0.37).sin();
        let mut one = vec![()];
        let mut four = vec![(), (), (), ()];
        let a = parallel_map_with(23, &mut one, compute);
        let b = parallel_map_with(23, &mut four, compute);
        assert_eq!(a, b);
    }
}
