//! Scalar searches: golden-section minimization and bisection.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket is narrower than `xtol` (or after `max_iter` steps).
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > xtol && iterations < max_iter {
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
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // the midpoint can lose to an interior probe on a flat bracket
    let (x, value) = [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best });
    Minimum { x, value, iterations }
}

/// Coarse scan over `points` equally spaced nodes, then golden-section on the
/// cell pair around the best node. Tolerates mild non-unimodality.
pub fn scan_then_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize, xtol: f64) -> Minimum {
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for k in 0..points {
        let v = f(lo + step * k as f64);
        if v < best_val {
            best_val = v;
            best = k;
        }
    }
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    let m = golden_section(&mut f, a, b, xtol, 500);
    if m.value <= best_val {
        m
    } else {
        Minimum { x: lo + step * best as f64, value: best_val, iterations: m.iterations }
    }
}

/// Bisection for the root of a nondecreasing `g` on `[lo, hi]`, `g(lo) <= 0 <= g(hi)`.
/// Returns the midpoint once the bracket width drops to `xtol` or stops shrinking.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut g: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || b - a <= xtol {
            break;
        }
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10, 500);
        assert!((m.x - 1.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_endpoint_minimum() {
        let m = golden_section(|x| x, 0.0, 1.0, 1e-12, 500);
        assert!(m.x < 1e-11);
    }

    #[test]
    fn scan_escapes_local_minimum() {
        // two wells, the deeper one at x = 3
        let f = |x: f64| ((x - 1.0).powi(2) - 0.5).min((x - 3.0).powi(2) - 1.0);
        let m = scan_then_golden(f, 0.0, 4.0, 41, 1e-10);
        assert!((m.x - 3.0).abs() < 1e-6);
    }

    #[test]
    fn bisection_root() {
        let r = bisect_increasing(|x| x * x * x - 2.0, 0.0, 2.0, 0.0, 200);
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }
}
