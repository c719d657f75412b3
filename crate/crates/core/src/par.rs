//! Data-parallel helpers with a sequential fallback.
//!
//! Every caller passes `parallel`; with the `parallel` feature off the flag is
//! ignored and both paths run sequentially, so results never depend on it.

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// First `Some` in item order, so the answer matches the sequential scan.
pub fn find_first<T, R, F>(items: &[T], parallel: bool, f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().find_map_first(f);
    }
    let _ = parallel;
    items.iter().find_map(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        assert_eq!(map(&xs, true, |x| x * x), map(&xs, false, |x| x * x));
        let hit = |x: &u64| (x % 97 == 96).then_some(*x);
        assert_eq!(find_first(&xs, true, hit), Some(96));
        assert_eq!(find_first(&xs, false, hit), Some(96));
    }
}
