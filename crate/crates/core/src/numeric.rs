//! Small numerical kernels shared across modules.

/// Pairwise (cascade) summation in a fixed order, so results do not depend on
/// how the caller chunked the data.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `log Σ exp(xs)`; `-inf` for an empty slice or all `-inf` entries.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let shifted: Vec<f64> = xs.iter().map(|&x| (x - m).exp()).collect();
    m + pairwise_sum(&shifted).ln()
}

/// `log Σ exp(a_i + b_i)` without materialising the sum vector twice.
pub fn logsumexp_with(a: &[f64], b: impl Fn(usize) -> f64) -> f64 {
    let v: Vec<f64> = a.iter().enumerate().map(|(i, &x)| x + b(i)).collect();
    logsumexp(&v)
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` have
/// opposite signs (or one is zero). Runs until the bracket stops shrinking.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(flo.signum() != fhi.signum(), "bisect: root not bracketed");
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Σ_{k ≥ n} 1/k²` for integer `n ≥ 1` (the trigamma function at `n`),
/// via upward recurrence and the asymptotic series.
pub fn inverse_square_tail(n: u64) -> f64 {
    assert!(n >= 1);
    let mut x = n as f64;
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // ψ'(x) ~ 1/x + 1/(2x²) + Σ B_2k / x^{2k+1}
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv * inv2
            * (1.0 / 6.0
                + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0)))));
    acc + series
}

/// Inclusive arithmetic grid `start, start+step, …, stop` (last point snapped).
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0);
    let n = ((stop - start) / step + 1e-9).floor() as i64;
    let mut v: Vec<f64> = (0..=n.max(0)).map(|i| start + i as f64 * step).collect();
    if let Some(last) = v.last_mut() {
        if (*last - stop).abs() < 1e-9 * step.max(1.0) {
            *last = stop;
        }
    }
    v
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
