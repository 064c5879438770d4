//! Order-preserving batch maps that run on rayon when the `parallel`
//! feature is enabled and fall back to plain iteration otherwise. All
//! callers treat the batch index as the unit of determinism, so both
//! backends produce identical output.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(inputs: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    inputs.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(inputs: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    inputs.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn try_map_ordered<T, U, F>(inputs: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    inputs.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_ordered<T, U, F>(inputs: Vec<T>, f: F) -> Result<Vec<U>>
where
    F: Fn(T) -> Result<U>,
{
    inputs.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let out = map_ordered((0..1000).collect(), |i: u64| i * i);
        assert_eq!(out, (0..1000).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn errors_propagate() {
        let out = try_map_ordered((0..100).collect(), |i: i64| {
            if i % 7 == 3 {
                Err(crate::error::CoreError::Invalid(format!("bad {i}")))
            } else {
                Ok(i)
            }
        });
        assert!(out.is_err());
    }
}
