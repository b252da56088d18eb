//! The frequency band used by the Born-rule observer and by the tail sums.
//!
//! An outcome count `m` out of `n` lies inside the band iff
//! `|m/n - p| < ε`. The tail sums take exactly the complement, so boundary
//! counts with `|m/n - p| = ε` belong to the tails. The comparison carries
//! a small absolute slack so that boundary points which are exact in
//! rational arithmetic are classified the same way after rounding.

/// Absolute slack applied to `|m/n - p|` versus `ε`.
pub const BOUNDARY_SLACK: f64 = 1e-12;

pub fn in_band(m: u64, n: u64, p: f64, epsilon: f64) -> bool {
    debug_assert!(n > 0);
    let deviation = (m as f64 / n as f64 - p).abs();
    deviation < epsilon - BOUNDARY_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_counts_fall_in_the_tail() {
        // 0.4 * 10 and 0.6 * 10 are integers; both are tail points.
        assert!(!in_band(4, 10, 0.5, 0.1));
        assert!(!in_band(6, 10, 0.5, 0.1));
        assert!(in_band(5, 10, 0.5, 0.1));
        // p - ε = 0.25 with n = 100
        assert!(!in_band(25, 100, 0.3, 0.05));
        assert!(in_band(26, 100, 0.3, 0.05));
        assert!(!in_band(35, 100, 0.3, 0.05));
    }

    #[test]
    fn degenerate_probabilities() {
        assert!(in_band(10, 10, 1.0, 0.01));
        assert!(!in_band(9, 10, 1.0, 0.1));
        assert!(in_band(0, 7, 0.0, 0.1));
    }
}
