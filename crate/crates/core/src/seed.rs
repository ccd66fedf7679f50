//! Deterministic splitting of a single run seed into per-component seeds.

/// One step of the SplitMix64 generator.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for a named component (and an index within
/// it, e.g. a worker id) from the run seed.
pub fn derive(seed: u64, component: &str, index: u64) -> u64 {
    let mut h = splitmix64(seed);
    for b in component.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}
