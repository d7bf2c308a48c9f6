//! Scalar search primitives: golden-section maximization and boundary bisection.

/// Relative tolerance on scalar variables.
pub(crate) const REL_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn width_ok(a: f64, b: f64) -> bool {
    (b - a).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Maximizes a unimodal `f` on `[a, b]`; returns `(argmax, max)`.
///
/// Endpoints are compared against the interior optimum, so monotone
/// functions report their boundary maximum exactly.
pub(crate) fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if width_ok(lo, hi) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Given `ok(good) == true` and `ok(bad) == false`, narrows the bracket and
/// returns a point on the `good` side of the boundary.
pub(crate) fn bisect_boundary<F: FnMut(f64) -> bool>(mut ok: F, mut good: f64, mut bad: f64) -> f64 {
    for _ in 0..200 {
        if width_ok(good, bad) {
            break;
        }
        let mid = 0.5 * (good + bad);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn golden_section_finds_interior_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0);
        assert_relative_eq!(x, 0.3, max_relative = 1e-6);
        assert_relative_eq!(fx, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn golden_section_handles_monotone_functions() {
        assert_eq!(golden_section_max(|x| x, 1.0, 5.0), (5.0, 5.0));
        assert_eq!(golden_section_max(|x| -x, 1.0, 5.0), (1.0, -1.0));
        assert_eq!(golden_section_max(|x| x, 2.0, 2.0).0, 2.0);
    }

    #[test]
    fn bisection_stays_on_good_side() {
        let root = 2f64.sqrt();
        let lo = bisect_boundary(|x| x * x <= 2.0, 0.0, 2.0);
        assert!(lo * lo <= 2.0);
        assert_relative_eq!(lo, root, max_relative = 1e-8);
        let hi = bisect_boundary(|x| x * x >= 2.0, 2.0, 0.0);
        assert!(hi * hi >= 2.0);
        assert_relative_eq!(hi, root, max_relative = 1e-8);
    }
}
