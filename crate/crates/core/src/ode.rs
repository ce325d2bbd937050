//! Fixed-step classical Runge-Kutta for small autonomous systems.

/// One RK4 step of `y' = rhs(y)`. `h` may be negative.
pub(crate) fn rk4_step<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let shift = |base: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *base;
        for i in 0..N {
            out[i] = base[i] + s * k[i];
        }
        out
    };
    let k1 = rhs(y);
    let k2 = rhs(&shift(y, &k1, 0.5 * h));
    let k3 = rhs(&shift(y, &k2, 0.5 * h));
    let k4 = rhs(&shift(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}
