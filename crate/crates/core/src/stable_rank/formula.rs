use crate::error::{Error, Result};

/// Stable rank of `M_{n×m}(A)` given `sr(A)`: `⌈(sr(A) + m - 1) / n⌉`.
pub fn sr_formula(sr_a: u64, n: u64, m: u64) -> Result<u64> {
    if sr_a == 0 || n == 0 || m == 0 {
        return Err(Error::Domain("sr_formula needs positive arguments".into()));
    }
    Ok((sr_a + m - 1).div_ceil(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(sr_formula(1, 1, 1).unwrap(), 1);
        assert_eq!(sr_formula(2, 3, 5).unwrap(), 2);
        assert_eq!(sr_formula(1, 1, 2).unwrap(), 2);
        assert_eq!(sr_formula(1, 2, 3).unwrap(), 2);
        assert!(sr_formula(0, 1, 1).is_err());
    }

    #[test]
    fn square_case_matches_matrix_algebra_formula() {
        // sr(M_n(A)) = ⌈(sr(A) - 1) / n⌉ + 1, with the ceiling found by search.
        for s in 1..=20u64 {
            for n in 1..=20u64 {
                let classical = (0..).find(|q| q * n >= s - 1).unwrap() + 1;
                assert_eq!(sr_formula(s, n, n).unwrap(), classical, "s={s} n={n}");
            }
        }
    }
}
