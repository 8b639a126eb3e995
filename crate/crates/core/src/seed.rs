//! Deterministic seed derivation so composed randomized stages stay
//! reproducible and independent.

/// One round of SplitMix64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `tag`-th child of a stage seeded with `seed`.
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag.wrapping_add(0x6A09_E667_F3BC_C909)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_differ() {
        let a = child_seed(7, 0);
        let b = child_seed(7, 1);
        let c = child_seed(8, 0);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, child_seed(7, 0));
    }
}
