//! Nonce-profile classification.
//!
//! Different mining software generated the nonce field differently: some
//! counted up from zero, some drew uniformly, some stuck to a narrow
//! arbitrary band. The high byte of the winning nonces separates these
//! styles well enough to veto implausible merges.

use crate::chain::Chain;
use alloc::vec::Vec;
use hashbrown::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonceClass {
    /// Mass anchored at the bottom of the range (counting from zero).
    Counter,
    /// Spread across the full range.
    Uniform,
    /// Confined to a band that does not start near zero.
    Restricted { lo: u8, hi: u8 },
}

/// Classifies a non-empty set of nonces by its high-byte histogram.
pub fn classify_nonces(nonces: &[u32]) -> NonceClass {
    assert!(!nonces.is_empty(), "classify_nonces needs data");
    let mut lo = u8::MAX;
    let mut hi = 0u8;
    for &n in nonces {
        let top = (n >> 24) as u8;
        lo = lo.min(top);
        hi = hi.max(top);
    }
    let span = hi - lo;
    if span >= 96 {
        NonceClass::Uniform
    } else if lo <= 8 {
        NonceClass::Counter
    } else {
        NonceClass::Restricted { lo, hi }
    }
}

/// Whether two block sets could plausibly come from the same mining setup:
/// same nonce class, and for restricted ranges the bands must intersect.
pub fn nonce_profile_compatible(nonces_a: &[u32], nonces_b: &[u32]) -> bool {
    match (classify_nonces(nonces_a), classify_nonces(nonces_b)) {
        (NonceClass::Counter, NonceClass::Counter) => true,
        (NonceClass::Uniform, NonceClass::Uniform) => true,
        (NonceClass::Restricted { lo: a0, hi: a1 }, NonceClass::Restricted { lo: b0, hi: b1 }) => {
            a0 <= b1 && b0 <= a1
        }
        _ => false,
    }
}

/// Nonces of the blocks mined by a set of heights.
pub fn nonces_for_heights(chain: &Chain, heights: &HashSet<u64>) -> Vec<u32> {
    chain
        .blocks()
        .iter()
        .filter(|b| heights.contains(&b.height))
        .map(|b| b.nonce)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, ConsolidationPolicy, MinerSpec, NonceProfile, SynthOptions};
    use alloc::vec;

    #[test]
    fn classifies_the_three_styles() {
        let counter: Vec<u32> = (0..50).map(|i| i * 1000).collect();
        assert_eq!(classify_nonces(&counter), NonceClass::Counter);

        let uniform: Vec<u32> = (0..50).map(|i| i * 85_000_000).collect();
        assert_eq!(classify_nonces(&uniform), NonceClass::Uniform);

        let restricted: Vec<u32> = (0..50).map(|i| 0x4000_0000 + i * 100_000).collect();
        assert!(matches!(
            classify_nonces(&restricted),
            NonceClass::Restricted { .. }
        ));
    }

    #[test]
    fn counter_vs_uniform_incompatible() {
        let counter: Vec<u32> = (0..50).map(|i| i * 1000).collect();
        let uniform: Vec<u32> = (0..50).map(|i| i * 85_000_000).collect();
        assert!(!nonce_profile_compatible(&counter, &uniform));
        assert!(nonce_profile_compatible(&uniform, &uniform));
        assert!(nonce_profile_compatible(&counter, &counter));
    }

    #[test]
    fn restricted_ranges_need_intersection() {
        // Bands over top bytes 0x30-0x49, 0x40-0x59 (overlap), 0x90-0xa9.
        let band_a: Vec<u32> = (0..50u32).map(|i| 0x3000_0000 + i * 0x80_0000).collect();
        let band_b: Vec<u32> = (0..50u32).map(|i| 0x4000_0000 + i * 0x80_0000).collect();
        let band_c: Vec<u32> = (0..50u32).map(|i| 0x9000_0000 + i * 0x80_0000).collect();
        assert!(nonce_profile_compatible(&band_a, &band_b));
        assert!(!nonce_profile_compatible(&band_a, &band_c));
    }

    #[test]
    fn same_miner_split_halves_compatible() {
        for profile in [
            NonceProfile::Counter,
            NonceProfile::Uniform,
            NonceProfile::RestrictedRange {
                lo: 0x5000_0000,
                hi: 0x5fff_ffff,
            },
        ] {
            let miners = vec![MinerSpec {
                nonce_profile: profile,
                consolidation: ConsolidationPolicy::Never,
                ..MinerSpec::default_client(1, 1.0)
            }];
            let (chain, _) = generate(&miners, 400, 23, &SynthOptions::default()).unwrap();
            let nonces: Vec<u32> = chain.blocks().iter().map(|b| b.nonce).collect();
            let (first, second) = nonces.split_at(nonces.len() / 2);
            assert!(
                nonce_profile_compatible(first, second),
                "{profile:?} halves should be compatible"
            );
        }
    }
}
