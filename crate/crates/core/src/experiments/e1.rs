use serde::{Deserialize, Serialize};

/// Natural logarithms of three bounds on the event that the rigid kernel
/// has more than `n^eps` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E1Bound {
    /// `ln prod_{i < m} ell (ell i)^ell 4^ell`, `m = floor(n^eps / ell)`,
    /// with `(ell * 0)^ell` read as 1: the count of possible build-up
    /// sequences.
    pub log_seq_count: f64,
    /// `ln n^(eps n^eps)`.
    pub log_simplified: f64,
    /// `ln n^((eps - zeta) n^eps)`, the expected number of such sequences.
    pub log_expected: f64,
}

pub fn e1_bound(n: f64, eps: f64, ell_star: usize, zeta: f64) -> E1Bound {
    let ell = ell_star as f64;
    let size = n.powf(eps);
    let steps = (size / ell).floor() as u64;
    let per_step = ell.ln() + 2.0 * ell * 2f64.ln();
    let mut log_seq_count = 0.0;
    for i in 0..steps {
        log_seq_count += per_step;
        if i > 0 {
            log_seq_count += ell * (ell * i as f64).ln();
        }
    }
    let log_n = n.ln();
    E1Bound {
        log_seq_count,
        log_simplified: eps * size * log_n,
        log_expected: (eps - zeta) * size * log_n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_product() {
        // 10^4^0.1 = 2.51 < 3
        let b = e1_bound(1e4, 0.1, 3, 0.05);
        assert_eq!(b.log_seq_count, 0.0);
        assert!(b.log_simplified > 0.0);
    }

    #[test]
    fn expected_is_negative_below_zeta() {
        for n in [2.0, 10.0, 1e6] {
            assert!(e1_bound(n, 0.01, 3, 0.05).log_expected < 0.0);
        }
    }

    #[test]
    fn two_steps() {
        // n^eps = 8, ell = 4: m = 2, factors 4 * 4^4 and 4 * 4^4 * 4^4
        let b = e1_bound(64.0, 0.5, 4, 0.05);
        let exact = (4.0f64 * 256.0).ln() + (4.0f64 * 256.0 * 256.0).ln();
        assert!((b.log_seq_count - exact).abs() < 1e-12);
    }
}
