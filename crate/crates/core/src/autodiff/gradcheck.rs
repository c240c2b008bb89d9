//! Central finite-difference utilities used by tests and acceptance checks.
//!
//! These evaluate the forward graph only, so they are independent of the
//! analytic backward implementations they are used to verify.

use ndarray::ArrayD;

use super::Tensor;

/// Central-difference gradient of `f` w.r.t. `inputs[which]`.
pub fn numeric_gradient(
    inputs: &[ArrayD<f64>],
    which: usize,
    eps: f64,
    f: impl Fn(&[Tensor]) -> Tensor,
) -> ArrayD<f64> {
    let eval = |arrays: &[ArrayD<f64>]| -> f64 {
        let tensors: Vec<Tensor> = arrays.iter().map(|a| Tensor::param(a.clone())).collect();
        f(&tensors).item()
    };
    let mut grad = ArrayD::zeros(inputs[which].raw_dim());
    let mut work: Vec<ArrayD<f64>> = inputs.to_vec();
    for idx in 0..inputs[which].len() {
        let base = inputs[which].as_slice().unwrap()[idx];
        work[which].as_slice_mut().unwrap()[idx] = base + eps;
        let plus = eval(&work);
        work[which].as_slice_mut().unwrap()[idx] = base - eps;
        let minus = eval(&work);
        work[which].as_slice_mut().unwrap()[idx] = base;
        grad.as_slice_mut().unwrap()[idx] = (plus - minus) / (2.0 * eps);
    }
    grad
}

/// Relative error between two gradients: `max|a-n| / max(1e-8, ||a||_inf, ||n||_inf)`.
pub fn relative_error(analytic: &ArrayD<f64>, numeric: &ArrayD<f64>) -> f64 {
    let mut max_diff = 0.0f64;
    let mut max_mag = 1e-8f64;
    for (a, n) in analytic.iter().zip(numeric.iter()) {
        max_diff = max_diff.max((a - n).abs());
        max_mag = max_mag.max(a.abs()).max(n.abs());
    }
    max_diff / max_mag
}

/// Assert analytic gradients of a scalar-valued graph against central finite
/// differences for every input.
pub fn check_gradients(
    inputs: &[ArrayD<f64>],
    f: impl Fn(&[Tensor]) -> Tensor,
    eps: f64,
    tol: f64,
) {
    let tensors: Vec<Tensor> = inputs.iter().map(|a| Tensor::param(a.clone())).collect();
    let loss = f(&tensors);
    let grads = loss.backward();
    for which in 0..inputs.len() {
        let analytic = grads
            .wrt(&tensors[which])
            .cloned()
            .unwrap_or_else(|| ArrayD::zeros(inputs[which].raw_dim()));
        let numeric = numeric_gradient(inputs, which, eps, &f);
        let err = relative_error(&analytic, &numeric);
        assert!(
            err < tol,
            "gradient check failed for input {which}: relative error {err:.3e} >= {tol:.3e}"
        );
    }
}
