//! Order-preserving parallel map. With the `parallel` feature and more than
//! one worker the closure runs on a dedicated rayon pool; otherwise items are
//! processed in order on the calling thread. Output order always matches
//! input order, so results do not depend on the worker count.

/// Maps `f` over `items`, returning results in input order.
pub fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && items.len() > 1 {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => return items.iter().map(f).collect(),
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Fallible variant of [`map_ordered`]; returns the first error in input order.
pub fn try_map_ordered<T, R, E, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map_ordered(items, workers, f).into_iter().collect()
}

/// True when the crate was built with rayon support.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_worker_count() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_ordered(&items, 1, |x| x * x);
        for w in [2, 3, 8] {
            assert_eq!(map_ordered(&items, w, |x| x * x), seq);
        }
        assert!(map_ordered(&Vec::<u64>::new(), 4, |x| *x).is_empty());
    }

    #[test]
    fn first_error_in_input_order_wins() {
        let items: Vec<i32> = (0..100).collect();
        let r: Result<Vec<i32>, i32> =
            try_map_ordered(&items, 4, |&x| if x % 30 == 29 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(29));
    }
}
