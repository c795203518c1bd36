//! Least-squares projection onto monotone sequences (pool adjacent violators).

/// Non-decreasing least-squares fit to `ys` with unit weights.
pub fn isotonic_increasing(ys: &[f64]) -> Vec<f64> {
    // blocks of (sum, count); adjacent blocks are merged while their means
    // decrease
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Non-increasing least-squares fit.
pub fn isotonic_decreasing(ys: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
    isotonic_increasing(&neg).into_iter().map(|y| -y).collect()
}

/// Largest amount by which consecutive entries decrease.
pub fn max_decrease(ys: &[f64]) -> f64 {
    ys.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

/// Largest amount by which consecutive entries increase.
pub fn max_increase(ys: &[f64]) -> f64 {
    ys.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}
