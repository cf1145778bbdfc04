//! Splittable seed derivation: every random stream in a run descends from
//! one user seed through [`derive`], so results depend only on
//! `(seed, purpose, index)` and not on scheduling.

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for the `index`-th consumer of kind `purpose`.
pub fn derive(seed: u64, purpose: &str, index: u64) -> u64 {
    let tag = purpose
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3));
    mix(mix(seed ^ tag).wrapping_add(index))
}
