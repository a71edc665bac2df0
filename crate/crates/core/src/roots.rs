//! Bracketed scalar root finding and bounded 1-D maximization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once |f(x)| falls below this.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than this.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            f_tol: 1e-14,
            x_tol: 1e-14,
            max_iter: 200,
        }
    }
}

/// Hybrid bisection/secant root search on `[lo, hi]`.
///
/// A secant step is taken when it lands strictly inside the current bracket
/// and the previous step shrank the bracket by at least half; otherwise the
/// interval is bisected. The bracket is preserved at every step.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: fa.abs().min(fb.abs()),
        });
    }
    let mut last_width = b - a;
    for _ in 0..opts.max_iter {
        let width = b - a;
        let secant = b - fb * (b - a) / (fb - fa);
        let use_secant = secant > a && secant < b && width <= 0.5 * last_width;
        let x = if use_secant { secant } else { 0.5 * (a + b) };
        last_width = width;
        let fx = f(x)?;
        if fx.abs() <= opts.f_tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if b - a <= opts.x_tol {
            return Ok(if fa.abs() <= fb.abs() { a } else { b });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: fa.abs().min(fb.abs()),
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x_best, f_best)` over every point evaluated, endpoints included.
pub fn golden_maximize<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = (a, f(a));
    let fb_end = f(b);
    if fb_end > best.1 {
        best = (b, fb_end);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if fc > best.1 {
            best = (c, fc);
        }
        if fd > best.1 {
            best = (d, fd);
        }
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc >= fd {
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
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, RootOptions::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn reversed_bracket_and_exact_endpoint() {
        let r = bracketed_root(|x| Ok(x - 1.0), 1.0, 0.0, RootOptions::default()).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn rejects_unbracketed() {
        let e = bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, RootOptions::default());
        assert!(matches!(e, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn propagates_evaluation_errors() {
        let e = bracketed_root(|_| Err(Error::NoPeak), 0.0, 1.0, RootOptions::default());
        assert_eq!(e, Err(Error::NoPeak));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_maximize(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10, 200);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx <= 0.0 && fx > -1e-15);
    }

    #[test]
    fn golden_keeps_boundary_maximum() {
        let (x, _) = golden_maximize(|x| x, 0.0, 2.0, 1e-10, 200);
        assert_eq!(x, 2.0);
    }
}
