//! Shared numerical machinery: adaptive Simpson quadrature, sign-change
//! bisection, small real-matrix helpers and the Fibonacci sphere.

use crate::scalar::Scalar;

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub converged: bool,
}

fn simpson<T: Scalar>(fa: T, fm: T, fb: T, h: T) -> T {
    (fa + T::lit(4.0) * fm + fb) * h / T::lit(6.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Scalar>(
    f: &mut impl FnMut(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
    budget: &mut usize,
) -> (T, T, bool) {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let h = m - a;
    let left = simpson(fa, flm, fm, h);
    let right = simpson(fm, frm, fb, h);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol {
        return (
            left + right + delta / T::lit(15.0),
            delta.abs() / T::lit(15.0),
            true,
        );
    }
    if depth == 0 || *budget < 2 {
        return (left + right, delta.abs(), false);
    }
    *budget -= 2;
    let half_tol = tol * T::lit(0.5);
    let (lv, le, lc) = simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1, budget);
    let (rv, re, rc) = simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1, budget);
    (lv + rv, le + re, lc && rc)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// Non-finite samples are treated as zero so that isolated singular points
/// do not poison the sum. Refinement stops at `max_depth` or after roughly
/// `max_evals` integrand evaluations (integrands singular at a window
/// closure would otherwise subdivide without bound); `converged` reports
/// whether the tolerance was met everywhere within those limits.
pub fn adaptive_simpson<T: Scalar>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    tol: T,
    max_depth: usize,
    max_evals: usize,
) -> QuadResult<T> {
    if b <= a {
        return QuadResult {
            value: T::zero(),
            error_estimate: T::zero(),
            converged: true,
        };
    }
    let mut g = move |t: T| {
        let v = f(t);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    let fa = g(a);
    let m = (a + b) * T::lit(0.5);
    let fm = g(m);
    let fb = g(b);
    let whole = simpson(fa, fm, fb, b - a);
    let mut budget = max_evals / 2;
    let (value, error_estimate, converged) =
        simpson_rec(&mut g, a, b, fa, fm, fb, whole, tol, max_depth, &mut budget);
    QuadResult {
        value,
        error_estimate,
        converged,
    }
}

/// Refines a bracketed sign change of `f` to within `tol` in the abscissa.
///
/// `positive_left` states the sign of `f` on the left edge; non-finite
/// midpoint values count as "not positive" so windows around isolated
/// singular points resolve to their closure.
pub fn bisect_sign_change<T: Scalar>(
    mut f: impl FnMut(T) -> T,
    mut a: T,
    mut b: T,
    positive_left: bool,
    tol: T,
) -> T {
    while b - a > tol {
        let m = (a + b) * T::lit(0.5);
        if m <= a || m >= b {
            break;
        }
        let v = f(m);
        let positive = v.is_finite() && v > T::zero();
        if positive == positive_left {
            a = m;
        } else {
            b = m;
        }
    }
    (a + b) * T::lit(0.5)
}

/// Determinant of a 3x3 real matrix.
pub fn det3<T: Scalar>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss-Jordan inverse of a 4x4 real matrix; `None` when the pivot falls
/// below `pivot_floor`.
pub fn inverse4<T: Scalar>(m: &[[T; 4]; 4], pivot_floor: T) -> Option<[[T; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[T::zero(); 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for col in 0..4 {
        let mut piv = col;
        for r in (col + 1)..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < pivot_floor {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor == T::zero() {
                continue;
            }
            for j in 0..4 {
                a[r][j] -= factor * a[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    Some(inv)
}

pub fn mat4_mul<T: Scalar>(a: &[[T; 4]; 4], b: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    let mut out = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Deterministic quasi-uniform unit vectors (golden-angle spiral).
pub fn fibonacci_sphere<T: Scalar>(n: usize) -> Vec<[T; 3]> {
    let golden = T::lit(std::f64::consts::PI * (3.0 - 5.0_f64.sqrt()));
    (0..n)
        .map(|i| {
            let zi = T::one() - T::lit(2.0) * (T::of_usize(i) + T::lit(0.5)) / T::of_usize(n);
            let r = (T::one() - zi * zi).max(T::zero()).sqrt();
            let th = golden * T::of_usize(i);
            [r * th.cos(), r * th.sin(), zi]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_polynomial_exact() {
        let q = adaptive_simpson(|t: f64| t * t * t - 2.0 * t, 0.0, 2.0, 1e-12, 30, 100_000);
        assert!(q.converged);
        assert_relative_eq!(q.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_sin() {
        let q = adaptive_simpson(
            |t: f64| t.sin(),
            0.0,
            std::f64::consts::PI,
            1e-10,
            30,
            100_000,
        );
        assert!(q.converged);
        assert_relative_eq!(q.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect_sign_change(|t: f64| t.sin(), 3.0, 3.3, true, 1e-12);
        assert_relative_eq!(r, std::f64::consts::PI, epsilon = 1e-10);
    }

    #[test]
    fn inverse4_round_trip() {
        let m = [
            [1.0, 0.2, 0.0, -0.4],
            [0.0, 0.9, 0.1, 0.0],
            [0.3, 0.0, 0.8, 0.2],
            [0.0, -0.1, 0.0, 0.7],
        ];
        let inv = inverse4(&m, 1e-12).unwrap();
        let prod = mat4_mul(&m, &inv);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod[i][j], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_points_are_unit() {
        for p in fibonacci_sphere::<f64>(64) {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert_relative_eq!(n, 1.0, epsilon = 1e-12);
        }
    }
}
