use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    /// True when `candidate` makes `incumbent` redundant for every window
    /// that contains both (candidate starts earlier).
    #[inline]
    fn dominates(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Extremum::Min => candidate <= incumbent,
            Extremum::Max => candidate >= incumbent,
        }
    }
}

/// Forward-looking sliding extremum: `out[t]` is the min or max of
/// `series[t..=min(t + width, n - 1)]`.
///
/// Sweeps right to left with a monotonic deque of indices, so every sample is
/// pushed and popped at most once. The returned values are copies of input
/// samples, never recomputed.
pub fn windowed_extremum(series: &[f64], width: usize, mode: Extremum) -> Vec<f64> {
    let n = series.len();
    let mut out = vec![0.0; n];
    // Front holds the largest index still inside the window and the current
    // extremum; indices decrease toward the back.
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(width.saturating_add(1).min(n));
    for t in (0..n).rev() {
        while let Some(&back) = deque.back() {
            if mode.dominates(series[t], series[back]) {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(t);
        let last = t.saturating_add(width);
        while let Some(&front) = deque.front() {
            if front > last {
                deque.pop_front();
            } else {
                break;
            }
        }
        out[t] = series[*deque.front().expect("deque holds at least t")];
    }
    out
}
