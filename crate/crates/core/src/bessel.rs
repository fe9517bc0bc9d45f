//! Integer-order Bessel functions of the first kind and their positive zeros.
//!
//! Values come from Miller's backward recurrence normalised by
//! `J_0 + 2 (J_2 + J_4 + ...) = 1`, which is stable for every order and
//! argument used by the disk eigenbasis (arguments up to a few hundred).

/// Returns `[J_0(x), ..., J_max_order(x)]`.
pub fn bessel_j_all(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (max_order as f64).max(ax);
    let mut start = (top + 24.0 + (48.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = (2.0 * k as f64 / ax) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if k - 1 <= max_order {
            out[k - 1] = j_cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (m, v) in out.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_m(x)`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    bessel_j_all(m, x)[m]
}

/// `(J_m(x), J_m'(x))` using `J_m' = J_{m-1} - (m/x) J_m` and `J_0' = -J_1`.
pub fn bessel_j_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let all = bessel_j_all(m + 1, x);
    let value = all[m];
    let deriv = if m == 0 {
        -all[1]
    } else {
        0.5 * (all[m - 1] - all[m + 1])
    };
    (value, deriv)
}

const SCAN_STEP: f64 = 0.2;

fn refine_zero(m: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = bessel_j(m, lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = bessel_j_with_derivative(m, x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// The `k`-th positive zero `j_{m,k}` of `J_m` (`k >= 1`).
pub fn bessel_zero(m: usize, k: usize) -> f64 {
    assert!(k >= 1, "zero index starts at 1");
    let mut found = 0;
    let mut a = (m as f64).max(SCAN_STEP);
    let mut fa = bessel_j(m, a);
    loop {
        let b = a + SCAN_STEP;
        let fb = bessel_j(m, b);
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            found += 1;
            if found == k {
                return if fb == 0.0 { b } else { refine_zero(m, a, b) };
            }
        }
        a = b;
        fa = fb;
    }
}

/// All zeros `j_{m,k} <= limit` for every order `m`, as `zeros[m] = [j_{m,1}, j_{m,2}, ...]`.
///
/// Orders whose first zero exceeds `limit` are omitted from the tail of the list.
pub fn bessel_zeros_below(limit: f64) -> Vec<Vec<f64>> {
    if limit <= 0.0 {
        return Vec::new();
    }
    // j_{m,1} > m, so orders above `limit` never contribute.
    let max_order = limit.ceil() as usize;
    let n_steps = ((limit + 2.0 * SCAN_STEP) / SCAN_STEP).ceil() as usize;
    let mut zeros: Vec<Vec<f64>> = vec![Vec::new(); max_order + 1];
    let mut prev = bessel_j_all(max_order, SCAN_STEP);
    for step in 2..=n_steps {
        let x = step as f64 * SCAN_STEP;
        let cur = bessel_j_all(max_order, x);
        for m in 0..=max_order {
            if (m as f64) > x {
                continue;
            }
            let a = x - SCAN_STEP;
            let hit = if cur[m] == 0.0 {
                Some(x)
            } else if (prev[m] < 0.0) != (cur[m] < 0.0) && prev[m] != 0.0 {
                Some(refine_zero(m, a, x))
            } else {
                None
            };
            if let Some(z) = hit {
                if z <= limit {
                    zeros[m].push(z);
                }
            }
        }
        prev = cur;
    }
    while zeros.last().is_some_and(|z| z.is_empty()) {
        zeros.pop();
    }
    zeros
}
