//! Classical fourth-order Runge-Kutta stepping for small first-order systems.

/// One RK4 step of `y' = f(t, y)` for a two-component system.
#[inline]
pub fn rk4_step2<F>(f: &F, t: f64, y: [f64; 2], h: f64) -> [f64; 2]
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates over `steps` equal steps from `t0` to `t1` (which may be
/// smaller than `t0`) and returns every intermediate state.
pub fn rk4_path<F>(f: &F, t0: f64, t1: f64, y0: [f64; 2], steps: usize) -> Vec<[f64; 2]>
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let h = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..steps {
        y = rk4_step2(f, t0 + i as f64 * h, y, h);
        out.push(y);
    }
    out
}

/// Scalar RK4 step for `y' = f(t, y)`.
#[inline]
pub fn rk4_step1<F>(f: &F, t: f64, y: f64, h: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_fourth_order() {
        let f = |_t: f64, y: [f64; 2]| [y[1], -y[0]];
        let err = |n: usize| {
            let p = rk4_path(&f, 0.0, 1.0, [0.0, 1.0], n);
            (p[n][0] - 1f64.sin()).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
