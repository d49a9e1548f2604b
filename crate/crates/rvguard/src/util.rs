//! Small shared helpers: stable hashing, float formatting, quantiles.

/// FNV-1a over a sequence of byte strings, with a 0-byte separator between
/// parts so `["ab","c"]` and `["a","bc"]` hash differently.
pub(crate) fn fnv1a_hex<I, S>(parts: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for part in parts {
        for &byte in part.as_ref() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(PRIME);
        }
        hash ^= 0xff;
        hash = hash.wrapping_mul(PRIME);
    }
    format!("{hash:016x}")
}

/// Canonical float formatting for CSV payloads: scientific notation with 17
/// significant digits, enough for exact `f64` round-trips.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Percentile with linear interpolation between order statistics.
///
/// `p` is in `[0, 100]`; `values` need not be sorted. The rank is
/// `p/100 * (len - 1)`, so `p = 100` returns the maximum and `p = 0` the
/// minimum.
pub(crate) fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite percentile input"));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = rank - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Population mean and variance in one pass.
pub(crate) fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_separator_distinguishes_partitions() {
        assert_ne!(fnv1a_hex(["ab", "c"]), fnv1a_hex(["a", "bc"]));
        assert_eq!(fnv1a_hex(["ab", "c"]), fnv1a_hex(["ab", "c"]));
    }

    #[test]
    fn fmt_round_trips_exactly() {
        for &x in &[0.1, 2.0 / 3.0, 1e-300, 123456789.12345679, -0.0, 1.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert_eq!(percentile(&v, 50.0), 2.0);
        assert_eq!(percentile(&v, 95.0), 3.8);
    }

    #[test]
    fn mean_var_is_population_variance() {
        let (m, v) = mean_var(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.0);
        assert_eq!(v, 2.0);
    }
}
