//! Order statistics shared by the solver and the detector.

/// Median of `values`, reordering them in place. The median of an even-length
/// sequence is the mean of the two central order statistics. Returns `None`
/// for an empty slice.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        return Some(upper);
    }
    let below = lower
        .iter()
        .copied()
        .max_by(f64::total_cmp)
        .expect("even length >= 2");
    Some(0.5 * (below + upper))
}

pub fn median(values: &[f64]) -> Option<f64> {
    median_in_place(&mut values.to_vec())
}

/// Median and median absolute deviation about it.
pub fn median_and_mad(values: &[f64]) -> Option<(f64, f64)> {
    let mut buf = values.to_vec();
    let med = median_in_place(&mut buf)?;
    buf.iter_mut().for_each(|v| *v = (*v - med).abs());
    let mad = median_in_place(&mut buf)?;
    Some((med, mad))
}
