//! Bracketing root finders and a golden-section maximizer.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Final bracket containing the root.
    pub bracket: (f64, f64),
}

/// Brent's method on `[a, b]`; `f(a)` and `f(b)` must differ in sign
/// (or one of them vanish).
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, iterations: 0, bracket: (a, a) });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, iterations: 0, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for it in 1..=max_iter {
        if fb.signum() == fc.signum() {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let bracket = if b < c { (b, c) } else { (c, b) };
            return Ok(Root { x: b, fx: fb, iterations: it, bracket });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Root(format!("Brent did not converge in {max_iter} iterations")))
}

/// Bisection for the point where `f` changes sign from positive to
/// nonpositive. Requires `f(lo) > 0 >= f(hi)`.
pub fn bisect_sign<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut it = 0;
    while hi - lo > xtol && it < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    let x = 0.5 * (lo + hi);
    Ok(Root { x, fx: f(x)?, iterations: it, bracket: (lo, hi) })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut it = 0;
    while b - a > xtol && it < max_iter {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        }
        it += 1;
    }
    let (x, fx) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Root { x, fx, iterations: it, bracket: (a, b) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_cubic() {
        let r = brent(|x| Ok(x * x * x - 2.0 * x - 5.0), 2.0, 3.0, 1e-14, 100).unwrap();
        assert!((r.x - 2.094_551_481_542_326_5).abs() < 1e-13);
        assert!(r.bracket.0 <= r.x && r.x <= r.bracket.1);
    }

    #[test]
    fn brent_rejects_missing_sign_change() {
        assert!(matches!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50), Err(Error::Root(_))));
    }

    #[test]
    fn brent_propagates_errors() {
        let r = brent(|_| Err(Error::Root("boom".into())), 0.0, 1.0, 1e-12, 50);
        assert!(r.is_err());
    }

    #[test]
    fn bisect_finds_sign_change() {
        let r = bisect_sign(|x| Ok(0.3 - x), 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r.x - 0.3).abs() < 1e-13);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let r = golden_max(|x| Ok(-(x - 0.37) * (x - 0.37)), 0.0, 2.0, 1e-10, 500).unwrap();
        assert!((r.x - 0.37).abs() < 1e-7);
    }
}
