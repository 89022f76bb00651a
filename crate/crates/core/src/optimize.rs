//! Derivative-free scalar minimization.

/// Result of [`golden_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 - 1) / 2

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. Assumes `f` is unimodal on
/// the interval; the returned point is the best one evaluated, including both
/// endpoints, so a monotone `f` yields the corresponding endpoint.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    assert!(lo < hi && tol > 0.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    let (mut x, mut value) = if fc <= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        if (end - x).abs() <= 2.0 * tol {
            let fe = f(end);
            evaluations += 1;
            if fe <= value {
                x = end;
                value = fe;
            }
        }
    }
    Minimum { x, value, evaluations }
}
