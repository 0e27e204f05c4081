//! Bracketing bisection shared by every solver in the crate.

/// Root of `f` on `[lo, hi]` by bisection, assuming `f(lo)` and `f(hi)`
/// have opposite signs (either orientation). Stops once the bracket is
/// narrower than `x_tol` or can no longer be split in `f64`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn decreasing_orientation() {
        let r = bisect(|x| 0.25 - x, 0.0, 1.0, 1e-15);
        assert!((r - 0.25).abs() < 1e-14);
    }
}
