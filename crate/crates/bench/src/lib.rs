//! Shared fixtures for the benchmarks.

use fbl_core::linalg::{random_cvec, CVec};
use fbl_core::{corpus, FellBundle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bundles of increasing size.
pub const SCALING: [&str; 4] = ["z2_swap_action", "e3_partial", "i2_action", "i3_action"];

/// Bundles with an E*-unitary base and vanishing zero fiber, where the reduced kernel is defined.
pub const HYPOTHESES: [&str; 3] = ["z2_swap_action", "e3_partial", "i2_action"];

pub fn bundle(name: &str) -> FellBundle {
    corpus::bundle_by_name(name).unwrap_or_else(|| panic!("unknown bundle {name}"))
}

/// Seeded coordinates of a section of `b`.
pub fn section(b: &FellBundle, seed: u64) -> CVec {
    random_cvec(&mut ChaCha8Rng::seed_from_u64(seed), b.total_dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        for name in SCALING {
            let b = bundle(name);
            assert_eq!(section(&b, 1), section(&b, 1));
            assert_eq!(section(&b, 1).len(), b.total_dim());
        }
        for name in HYPOTHESES {
            let b = bundle(name);
            assert!(b.base().is_e_star_unitary() && b.zero_fiber_is_zero());
        }
    }
}
