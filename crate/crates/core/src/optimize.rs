//! Bounded one-dimensional search: Brent's golden-section/parabolic minimizer,
//! Brent root finding, bisection, and a scan-then-refine maximizer for payoffs
//! that may have more than one local peak.

use crate::scalar::Scalar;

/// Argument tolerance for scalar maximization.
pub const XTOL: f64 = 1e-10;
/// Iteration cap for scalar maximization.
pub const MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
}

/// Minimizes `f` on `[lo, hi]` by Brent's method (golden-section steps with
/// parabolic interpolation), stopping when the bracket is within `xtol`.
pub fn brent_minimize<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    xtol: T,
    max_iter: usize,
) -> Extremum<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let golden = half * (T::lit(3.0) - T::lit(5.0).sqrt());
    let sqrt_eps = T::epsilon().sqrt();

    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut e = T::zero();
    let mut step = T::zero();
    let mut iterations = 0;

    while iterations < max_iter {
        let mid = half * (a + b);
        let tol1 = sqrt_eps * x.abs() + xtol / T::lit(3.0);
        let tol2 = two * tol1;
        if (x - mid).abs() <= tol2 - half * (b - a) {
            break;
        }
        iterations += 1;

        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (half * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = step;
                step = p / q;
                let u = x + step;
                if u - a < tol2 || b - u < tol2 {
                    step = if mid >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= mid { a - x } else { b - x };
            step = golden * e;
        }

        let u = if step.abs() >= tol1 {
            x + step
        } else if step > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Extremum {
        x,
        value: fx,
        iterations,
    }
}

/// Bisection for a root of `g` on `[lo, hi]` where `g(lo)` and `g(hi)` have
/// opposite signs (or one is zero). Runs until the bracket stops shrinking.
pub fn bisect<T: Scalar, G: FnMut(T) -> T>(mut g: G, mut lo: T, mut hi: T, max_iter: usize) -> T {
    let mut g_lo = g(lo);
    if g_lo == T::zero() {
        return lo;
    }
    let g_hi = g(hi);
    if g_hi == T::zero() {
        return hi;
    }
    for _ in 0..max_iter {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == T::zero() {
            return mid;
        }
        if (g_mid > T::zero()) == (g_lo > T::zero()) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * T::lit(0.5)
}

/// Brent's root finder (bisection, secant and inverse quadratic steps) for
/// `g` on a sign-changing bracket `[lo, hi]`. Stops when the bracket is
/// narrower than `xtol` plus a few ulps of the iterate.
pub fn brent_root<T: Scalar, G: FnMut(T) -> T>(mut g: G, lo: T, hi: T, xtol: T, max_iter: usize) -> T {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == T::zero() {
        return a;
    }
    if fb == T::zero() {
        return b;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * m * s, T::one() - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (two * m * q * (q - r) - (b - a) * (r - T::one())),
                    (q - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else if m > T::zero() { b + tol } else { b - tol };
        fb = g(b);
    }
    b
}

/// Grid for locating the global peak: uniform points on `[lo, hi]` plus a
/// geometric cluster just above `lo` so narrow peaks near the boundary are seen.
pub fn scan_grid<T: Scalar>(lo: T, hi: T, uniform: usize, near_lo: usize) -> Vec<T> {
    let width = hi - lo;
    let mut grid: Vec<T> = (0..=uniform)
        .map(|i| lo + width * T::from_count(i) / T::from_count(uniform))
        .collect();
    let first = width / T::from_count(uniform);
    for j in 1..=near_lo {
        let frac = T::lit(10.0).powf(-T::lit(6.0) * T::from_count(j) / T::from_count(near_lo));
        grid.push(lo + first * frac);
    }
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    grid.dedup();
    grid
}

/// Maximizes `f` on `[lo, hi]`: scans a grid, refines around the best grid
/// point with Brent, and, when `slope` is supplied and changes sign around the
/// refined point, polishes the argument by bisection on the analytic slope.
pub fn maximize_bounded<T, F, S>(f: F, slope: Option<S>, lo: T, hi: T) -> Extremum<T>
where
    T: Scalar,
    F: Fn(T) -> T,
    S: Fn(T) -> T,
{
    if !(hi > lo) {
        return Extremum {
            x: lo,
            value: f(lo),
            iterations: 0,
        };
    }
    let grid = scan_grid(lo, hi, 48, 16);
    let values: Vec<T> = grid.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for i in 1..grid.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(grid.len() - 1)];
    let mut out = Extremum {
        x: grid[best],
        value: values[best],
        iterations: 0,
    };
    if right > left {
        let refined = brent_minimize(|x| -f(x), left, right, T::lit(XTOL), MAX_ITER);
        if -refined.value >= out.value {
            out = Extremum {
                x: refined.x,
                value: -refined.value,
                iterations: refined.iterations,
            };
        }
        if let Some(g) = slope {
            if g(left) > T::zero() && g(right) < T::zero() {
                let x = bisect(&g, left, right, 200);
                let value = f(x);
                // near the peak f is flat to rounding; the slope root is sharper
                let slack = T::lit(8.0) * T::epsilon() * out.value.abs().max(T::one());
                if value >= out.value - slack {
                    out = Extremum {
                        x,
                        value,
                        iterations: out.iterations,
                    };
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_parabola_minimum() {
        let r = brent_minimize(|x: f64| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10, 400);
        assert!((r.x - 0.3).abs() < 1e-8);
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!(r.iterations < 60);
    }

    #[test]
    fn brent_on_boundary_minimum() {
        let r = brent_minimize(|x: f64| x, 1.0, 2.0, 1e-10, 400);
        assert!(r.x - 1.0 < 1e-7);
    }

    #[test]
    fn brent_root_matches_closed_form() {
        let r = brent_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-15, 200);
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        let r = brent_root(|x: f64| (x - 0.3).signum(), 0.0, 1.0, 1e-14, 200);
        assert!((r - 0.3).abs() < 1e-13);
    }

    #[test]
    fn bisection_converges_to_machine_precision() {
        let root = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 200);
        assert!((root - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn maximizer_prefers_global_peak() {
        // Local peak at 1 (value 1) and global peak at 8 (value 2).
        let f = |x: f64| (-(x - 1.0).powi(2)).exp() + 2.0 * (-(x - 8.0).powi(2)).exp();
        let r = maximize_bounded(f, None::<fn(f64) -> f64>, 0.0, 10.0);
        assert!((r.x - 8.0).abs() < 1e-6);
    }

    #[test]
    fn maximizer_polishes_with_slope() {
        let f = |x: f64| x.ln_1p() - 0.25 * x;
        let g = |x: f64| 1.0 / (1.0 + x) - 0.25;
        let r = maximize_bounded(f, Some(g), 0.0, 40.0);
        assert!((r.x - 3.0).abs() < 1e-13);
    }

    #[test]
    fn scan_grid_is_sorted_and_bounded() {
        let g = scan_grid(0.0f64, 2.0, 8, 4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(g.len(), 9 + 4);
    }
}
