//! Central finite-difference gradient estimation. Only evaluates the
//! supplied forward closure, so it is independent of any analytic
//! backward pass it is used to verify.

/// d f / d x[i] ≈ (f(x + h eᵢ) − f(x − h eᵢ)) / 2h for every coordinate.
pub fn finite_diff_grad<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    grad
}

/// Max relative error between an analytic gradient and its
/// finite-difference estimate, with an absolute floor to keep
/// near-zero entries from blowing up the ratio.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}
