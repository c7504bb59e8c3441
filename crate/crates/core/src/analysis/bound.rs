//! The competitive bound `min((c-1)/(c ln c), h(c))` and its ingredients.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

const LAMBERT_MAX_ITER: usize = 64;
const LAMBERT_RESIDUAL_TOL: f64 = 1e-12;

/// Principal branch of the Lambert W function: the `y >= -1` with
/// `y * e^y = x`. Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch_point = -(-1f64).exp();
    if x.is_nan() || x < branch_point {
        return Err(Error::Domain(format!("lambert_w0 undefined for x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x > 0.0 {
        x.ln_1p()
    } else {
        // series around the branch point
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    };
    for _ in 0..LAMBERT_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if f == 0.0 || wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    let residual = w * w.exp() - x;
    if residual.abs() > LAMBERT_RESIDUAL_TOL * x.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "lambert_w0({x}) did not converge (residual {residual:e})"
        )));
    }
    Ok(w)
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || c <= 1.0 + 1e-9 {
        return Err(Error::Domain(format!(
            "c = {c} must be a finite number > 1"
        )));
    }
    Ok(())
}

/// `beta = c ln c / (c - 1) - 1`.
pub fn beta_of_c(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(c * c.ln() / (c - 1.0) - 1.0)
}

/// `h(c) = 1 - W(beta e^beta / c) / beta`.
pub fn h_of_c(c: f64) -> Result<f64> {
    let beta = beta_of_c(c)?;
    Ok(1.0 - lambert_w0(beta * beta.exp() / c)? / beta)
}

/// `(c - 1) / (c ln c)`, the other branch of the bound.
pub fn ratio_branch(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((c - 1.0) / (c * c.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Ratio,
    H,
}

/// Both branches of the bound at one `c` and which one is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub c: f64,
    pub ratio_branch: f64,
    pub h_branch: f64,
    pub bound: f64,
    pub active: Branch,
    /// Set when `c < e`, where the guarantee is not proven.
    pub outside_guarantee: bool,
}

/// The proven competitive ratio of the interval algorithm with base `c >= e`.
pub fn bound_of_c(c: f64) -> Result<BoundValue> {
    if !(c >= E) {
        return Err(Error::Domain(format!("bound requires c >= e, got {c}")));
    }
    bound_of_c_unchecked(c)
}

/// Like [`bound_of_c`] but accepts any `c > 1`; values below `e` carry
/// `outside_guarantee`.
pub fn bound_of_c_unchecked(c: f64) -> Result<BoundValue> {
    let ratio = ratio_branch(c)?;
    let h = h_of_c(c)?;
    let (bound, active) = if ratio <= h {
        (ratio, Branch::Ratio)
    } else {
        (h, Branch::H)
    };
    Ok(BoundValue {
        c,
        ratio_branch: ratio,
        h_branch: h,
        bound,
        active,
        outside_guarantee: c < E,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CStar {
    pub c: f64,
    pub bound: f64,
}

/// Maximizes the bound over `[lo, hi]`.
///
/// Golden-section search narrows the bracket to `tol`; the maximizer is
/// the crossing of the decreasing ratio branch and the increasing `h`
/// branch, which a final bisection then pins down.
pub fn find_cstar(lo: f64, hi: f64, tol: f64) -> Result<CStar> {
    if !(lo >= E && lo < hi && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "search range must satisfy e <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let gap = |c: f64| -> Result<f64> { Ok(ratio_branch(c)? - h_of_c(c)?) };
    if gap(lo)? <= 0.0 || gap(hi)? >= 0.0 {
        return Err(Error::NoMaximumInRange { lo, hi });
    }
    let bound = |c: f64| -> Result<f64> { Ok(bound_of_c(c)?.bound) };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (bound(x1)?, bound(x2)?);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = bound(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = bound(x1)?;
        }
    }
    // the crossing must sit inside the final bracket; fall back to the
    // whole range if rounding pushed it out
    if !(gap(a)? > 0.0 && gap(b)? < 0.0) {
        a = lo;
        b = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if gap(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let c = if bound(a)? >= bound(b)? { a } else { b };
    Ok(CStar {
        c,
        bound: bound(c)?,
    })
}

/// Both sides of the `u0` inequality, in the rewritten form
/// `alpha (beta u0 + c) <= c - u0 + u0 ln u0`.
pub fn ratio_all1_sides(c: f64, alpha: f64, u0: f64) -> Result<(f64, f64)> {
    let beta = beta_of_c(c)?;
    Ok((alpha * (beta * u0 + c), c - u0 + u0 * u0.ln()))
}

/// Certifies `alpha (u0 c/(c-1) + (c-u0)/ln c) <= (c - u0 + u0 ln u0)/ln c`
/// with `alpha = h(c)` on a uniform grid of `u0` over `[1, c]` (endpoints
/// included). Returns the largest `LHS - RHS`.
pub fn verify_ratio_all1(c: f64, grid: usize) -> Result<f64> {
    if !(c >= E) {
        return Err(Error::Domain(format!(
            "certification requires c >= e, got {c}"
        )));
    }
    if grid < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    let alpha = h_of_c(c)?;
    let ln_c = c.ln();
    let step = (c - 1.0) / (grid - 1) as f64;
    Ok(par::max_range(grid, 0, |i| {
        let u = if i + 1 == grid {
            c
        } else {
            1.0 + step * i as f64
        };
        let lhs = alpha * (u * c / (c - 1.0) + (c - u) / ln_c);
        let rhs = (c - u + u * u.ln()) / ln_c;
        lhs - rhs
    }))
}

/// Checks that `f(t) = c t + (c - c^t)/ln c` is maximized at `t = 1`
/// (where it equals `c`) on a uniform grid over `[0, 1]`. Returns
/// `max_t f(t) - c`.
pub fn verify_ft_claim(c: f64, grid: usize) -> Result<f64> {
    if !(c >= E) {
        return Err(Error::Domain(format!(
            "certification requires c >= e, got {c}"
        )));
    }
    if grid < 2 {
        return Err(Error::Domain("grid needs at least 2 points".into()));
    }
    let ln_c = c.ln();
    Ok(par::max_range(grid, 0, |i| {
        let t = if i + 1 == grid {
            1.0
        } else {
            i as f64 / (grid - 1) as f64
        };
        c * t + (c - c.powf(t)) / ln_c - c
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent reference: plain Newton on y e^y = x from a crude start.
    fn newton_w(x: f64) -> f64 {
        let mut y = if x > 1.0 { x.ln() } else { 0.5 };
        for _ in 0..200 {
            let f = y * y.exp() - x;
            y -= f / ((y + 1.0) * y.exp());
        }
        y
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(2.0 * E * E).unwrap() - 2.0).abs() < 1e-14);
        // omega constant
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(-(-1f64).exp()).unwrap() + 1.0).abs() < 1e-7);
        assert!((lambert_w0(-0.2).unwrap() - newton_w(-0.2)).abs() < 1e-13);
        assert!(matches!(lambert_w0(-0.5), Err(Error::Domain(_))));
        for &x in &[1e-8, 0.3, 7.0, 1e3, 1e10, 1e200] {
            assert!((lambert_w0(x).unwrap() - newton_w(x)).abs() <= 1e-12 * newton_w(x).abs());
        }
    }

    #[test]
    fn h_at_e_matches_frozen_value() {
        // y e^y = beta e^beta / e solved by an independent Newton iteration
        let beta = 1.0 / (E - 1.0);
        assert!((beta_of_c(E).unwrap() - beta).abs() < 1e-15);
        let oracle = 1.0 - newton_w(beta * beta.exp() / E) / beta;
        // frozen: 0.50611510610408215 (40-digit reference 0.5061151061040821471...)
        assert!((oracle - 0.506_115_106_104_082_1).abs() < 1e-13);
        assert!((h_of_c(E).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn h_near_one_is_a_domain_error() {
        assert!(matches!(h_of_c(1.0 + 1e-10), Err(Error::Domain(_))));
        assert!(matches!(h_of_c(0.5), Err(Error::Domain(_))));
        assert!(h_of_c(1.0 + 1e-6).is_ok());
    }

    #[test]
    fn bound_examples() {
        let at_e = bound_of_c(E).unwrap();
        assert!((at_e.ratio_branch - (E - 1.0) / E).abs() < 1e-15);
        assert_eq!(at_e.bound, at_e.ratio_branch.min(at_e.h_branch));
        assert_eq!(at_e.active, Branch::H);

        let b = bound_of_c(3.55829).unwrap();
        assert!(b.h_branch >= 0.5663);
        assert!((b.bound - 0.566_436_152_998_234_9).abs() < 1e-12);
        assert_eq!(b.active, Branch::Ratio);

        assert!(bound_of_c(1e12).unwrap().bound < 0.04);
        assert!(matches!(bound_of_c(2.0), Err(Error::Domain(_))));
        assert!(bound_of_c_unchecked(2.0).unwrap().outside_guarantee);
    }

    #[test]
    fn cstar_examples() {
        let s = find_cstar(E, 6.0, 1e-6).unwrap();
        assert!((s.c - 3.55829).abs() <= 5e-3);
        // reference crossing of the two branches
        assert!((s.c - 3.558_289_905_482_219).abs() < 1e-9);
        assert!(s.bound >= bound_of_c(3.55829).unwrap().bound - 1e-9);
        assert!(matches!(
            find_cstar(5.0, 6.0, 1e-6),
            Err(Error::NoMaximumInRange { .. })
        ));
        assert!(matches!(find_cstar(2.0, 6.0, 1e-6), Err(Error::Domain(_))));
        assert!(matches!(find_cstar(E, 6.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ratio_all1_endpoints() {
        let c = 3.55829;
        let alpha = h_of_c(c).unwrap();
        let beta = beta_of_c(c).unwrap();
        let (lhs, rhs) = ratio_all1_sides(c, alpha, 1.0).unwrap();
        assert!((lhs - alpha * (beta + c)).abs() < 1e-12);
        assert!((rhs - (c - 1.0)).abs() < 1e-12);
        assert!(lhs <= rhs);
        let (lhs, rhs) = ratio_all1_sides(c, alpha, c).unwrap();
        assert!((rhs - c * c.ln()).abs() < 1e-12);
        assert!(lhs <= rhs);
        // the original form is the rewritten one divided by ln c
        for &u in &[1.0, 1.7, 2.9, c] {
            let (l, r) = ratio_all1_sides(c, alpha, u).unwrap();
            let orig_l = alpha * (u * c / (c - 1.0) + (c - u) / c.ln());
            let orig_r = (c - u + u * u.ln()) / c.ln();
            assert!((l / c.ln() - orig_l).abs() < 1e-12);
            assert!((r / c.ln() - orig_r).abs() < 1e-12);
        }
    }

    #[test]
    fn certifications_hold() {
        let v = verify_ratio_all1(3.55829, 10_000).unwrap();
        assert!(v <= 1e-9, "violation {v}");
        // the minimum of RHS/LHS is attained, so the worst grid point is tight
        assert!(v > -1e-3);
        assert!(verify_ft_claim(3.55829, 1000).unwrap() <= 1e-9);
        assert_eq!(verify_ft_claim(E, 2).unwrap(), 0.0);
        // below e the guarantee is not claimed
        assert!(verify_ratio_all1(2.0, 100).is_err());
    }
}
