//! Bessel functions of the first kind for integer order.

/// `J_0(x) ..= J_nmax(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut above = 0.0; // J_{k+1}
    let mut here = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / ax * here - above;
        above = here;
        here = below;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = here;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * here;
        }
        if here.abs() > 1e250 {
            here *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += here;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_orders(m, x)[m];
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}
