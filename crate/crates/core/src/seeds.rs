/// splitmix64 finalizer.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a seed for job `(major, minor)` of a run seeded with `base`.
pub fn derive_seed(base: u64, major: usize, minor: usize) -> u64 {
    mix(mix(mix(base) ^ major as u64) ^ minor as u64)
}
