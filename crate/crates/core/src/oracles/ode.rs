//! Fixed-step classical Runge-Kutta integration sampled on an output grid.

/// Integrates `dy/dt = rhs(t, y)` from `times[0]` with state `y0`, taking
/// equal RK4 substeps no longer than `max_step` between consecutive output
/// times. Returns the state at every output time (the first is `y0`).
/// `post_step` runs after every substep and may project the state.
pub fn rk4_on_grid<F, P>(mut rhs: F, y0: &[f64], times: &[f64], max_step: f64, mut post_step: P) -> Vec<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(times.len());
    out.push(y.clone());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / max_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let t = w[0] + s as f64 * h;
            rhs(t, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            post_step(&mut y);
        }
        out.push(y.clone());
    }
    out
}
