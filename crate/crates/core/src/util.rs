/// Products with more factors than this are accumulated as a sum of logs.
pub(crate) const LOG_SPACE_THRESHOLD: usize = 8;

/// Product of non-negative factors, switching to log space for long products
/// so that intermediate values do not underflow.
pub(crate) fn product(factors: &[f64]) -> f64 {
    if factors.len() > LOG_SPACE_THRESHOLD {
        if factors.iter().any(|&f| f <= 0.0) {
            return 0.0;
        }
        factors.iter().map(|f| f.ln()).sum::<f64>().exp()
    } else {
        factors.iter().product()
    }
}

pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// 64-bit FNV-1a. Used to derive stable RNG stream keys from string ids.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
