//! Deterministic derivation of per-stream RNG seeds.
//!
//! Training draws many independent random streams (one per workload slot, one
//! per candidate parameter vector). Each stream seeds its own RNG from a value
//! derived here, so results do not depend on evaluation order or thread count.

/// splitmix64 finalizer; full-period 64-bit mixing.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a base seed together with an ordered list of stream coordinates
/// (e.g. `[stream_tag, iteration, slot]`) into a single 64-bit seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(base);
    for &part in parts {
        acc = splitmix64(acc ^ splitmix64(part));
    }
    acc
}

/// Stream tag for per-iteration workload batch slots.
pub const STREAM_WORKLOAD: u64 = 0x01;
/// Stream tag for per-candidate parameter sampling.
pub const STREAM_CANDIDATE: u64 = 0x02;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_deterministic() {
        assert_eq!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 2, 3]));
    }

    #[test]
    fn derive_separates_streams() {
        let a = derive_seed(7, &[STREAM_WORKLOAD, 0, 0]);
        let b = derive_seed(7, &[STREAM_CANDIDATE, 0, 0]);
        let c = derive_seed(8, &[STREAM_WORKLOAD, 0, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derive_is_order_sensitive() {
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
    }
}
