//! Minimal neural-network kernel set: 1D convolution and its transpose,
//! max pooling, dense layers, activations, dropout, losses, and Adam.
//! Backprop is hand-wired per architecture; every differentiable op is
//! verified against central finite differences in the tests.

pub mod adam;
pub mod check;
pub mod io;
pub mod layers;
pub mod loss;
pub mod tensor;

pub use adam::{AdamHyper, AdamState};
pub use layers::{
    dropout_bwd, dropout_fwd, relu_bwd, relu_fwd, sigmoid_bwd, sigmoid_fwd, tanh_bwd, tanh_fwd,
    Conv1d, ConvTranspose1d, Dense, MaxPool1d,
};
pub use loss::{bce, softmax_xent};
pub use tensor::{Matrix, Tensor3};

#[cfg(test)]
mod tests {
    use super::check::{finite_diff_grad, max_rel_error};
    use super::*;
    use crate::rng::RandomStream;

    const FD_H: f64 = 1e-4;
    const FD_TOL: f64 = 1e-4;

    fn random_tensor(b: usize, l: usize, c: usize, stream: &mut RandomStream) -> Tensor3 {
        let mut t = Tensor3::zeros(b, l, c);
        stream.fill_normal(&mut t.data);
        t
    }

    /// Scalar probe: fixed random linear functional of the output.
    fn probe_coeffs(n: usize, stream: &mut RandomStream) -> Vec<f64> {
        (0..n).map(|_| stream.normal()).collect()
    }

    #[test]
    fn conv1d_output_length() {
        let mut s = RandomStream::new(1);
        let conv = Conv1d::new(10, 6, 3, 4, &mut s);
        assert_eq!(conv.out_len(400).unwrap(), 66);
        assert!(conv.out_len(5).is_err());
    }

    #[test]
    fn conv1d_identity_kernel() {
        let mut s = RandomStream::new(1);
        let mut conv = Conv1d::new(1, 1, 1, 1, &mut s);
        conv.w = vec![1.0];
        conv.b = vec![0.0];
        let x = random_tensor(2, 9, 1, &mut s);
        let y = conv.forward(&x).unwrap();
        assert_eq!(y.data, x.data);
    }

    #[test]
    fn conv1d_gradients_match_finite_differences() {
        let mut s = RandomStream::new(2);
        let mut conv = Conv1d::new(3, 2, 2, 3, &mut s);
        let x = random_tensor(2, 9, 2, &mut s);
        let y = conv.forward(&x).unwrap();
        let coeffs = probe_coeffs(y.data.len(), &mut s);
        let gy = Tensor3::from_vec(y.batch, y.len, y.channels, coeffs.clone()).unwrap();
        conv.zero_grads();
        let gx = conv.backward(&x, &gy).unwrap();

        let loss = |conv: &Conv1d, x: &Tensor3| -> f64 {
            let y = conv.forward(x).unwrap();
            y.data.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
        };
        // input gradient
        let num_gx = finite_diff_grad(
            |data| {
                let xt = Tensor3::from_vec(x.batch, x.len, x.channels, data.to_vec()).unwrap();
                loss(&conv, &xt)
            },
            &x.data,
            FD_H,
        );
        assert!(max_rel_error(&gx.data, &num_gx) < FD_TOL);
        // weight gradient
        let num_gw = finite_diff_grad(
            |w| {
                let mut c = conv.clone();
                c.w = w.to_vec();
                loss(&c, &x)
            },
            &conv.w,
            FD_H,
        );
        assert!(max_rel_error(&conv.gw, &num_gw) < FD_TOL);
        // bias gradient
        let num_gb = finite_diff_grad(
            |b| {
                let mut c = conv.clone();
                c.b = b.to_vec();
                loss(&c, &x)
            },
            &conv.b,
            FD_H,
        );
        assert!(max_rel_error(&conv.gb, &num_gb) < FD_TOL);
    }

    #[test]
    fn conv_transpose_output_length() {
        let mut s = RandomStream::new(3);
        let t = ConvTranspose1d::new(4, 2, 2, 3, &mut s);
        assert_eq!(t.out_len(100).unwrap(), 202);
    }

    #[test]
    fn conv_transpose_is_adjoint_of_conv() {
        let mut s = RandomStream::new(4);
        // conv: C_in=2 → C_out=3, k=3, s=2, L=9 → Lo=4 ((9-3) divisible by 2)
        let mut conv = Conv1d::new(3, 2, 2, 3, &mut s);
        conv.b = vec![0.0; 3];
        // transpose sharing the same weight buffer: 3 → 2
        let mut tconv = ConvTranspose1d::new(3, 2, 3, 2, &mut s);
        tconv.w = conv.w.clone();
        tconv.b = vec![0.0; 2];

        let x = random_tensor(2, 9, 2, &mut s);
        let y = random_tensor(2, 4, 3, &mut s);
        let cx = conv.forward(&x).unwrap();
        let ty = tconv.forward(&y).unwrap();
        assert_eq!(ty.len, 9);
        let lhs: f64 = cx.data.iter().zip(&y.data).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.data.iter().zip(&ty.data).map(|(a, b)| a * b).sum();
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
        assert!(rel < 1e-12, "adjoint identity violated: {rel}");
    }

    #[test]
    fn conv_transpose_gradients_match_finite_differences() {
        let mut s = RandomStream::new(5);
        let mut tconv = ConvTranspose1d::new(4, 2, 3, 2, &mut s);
        let x = random_tensor(2, 5, 3, &mut s);
        let y = tconv.forward(&x).unwrap();
        let coeffs = probe_coeffs(y.data.len(), &mut s);
        let gy = Tensor3::from_vec(y.batch, y.len, y.channels, coeffs.clone()).unwrap();
        tconv.zero_grads();
        let gx = tconv.backward(&x, &gy).unwrap();

        let loss = |t: &ConvTranspose1d, x: &Tensor3| -> f64 {
            let y = t.forward(x).unwrap();
            y.data.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
        };
        let num_gx = finite_diff_grad(
            |data| {
                let xt = Tensor3::from_vec(x.batch, x.len, x.channels, data.to_vec()).unwrap();
                loss(&tconv, &xt)
            },
            &x.data,
            FD_H,
        );
        assert!(max_rel_error(&gx.data, &num_gx) < FD_TOL);
        let num_gw = finite_diff_grad(
            |w| {
                let mut t = tconv.clone();
                t.w = w.to_vec();
                loss(&t, &x)
            },
            &tconv.w,
            FD_H,
        );
        assert!(max_rel_error(&tconv.gw, &num_gw) < FD_TOL);
        let num_gb = finite_diff_grad(
            |b| {
                let mut t = tconv.clone();
                t.b = b.to_vec();
                loss(&t, &x)
            },
            &tconv.b,
            FD_H,
        );
        assert!(max_rel_error(&tconv.gb, &num_gb) < FD_TOL);
    }

    #[test]
    fn maxpool_definition_and_tie_rule() {
        let pool = MaxPool1d { window: 2 };
        let x = Tensor3::from_vec(1, 4, 1, vec![1.0, 3.0, 2.0, 4.0]).unwrap();
        let (y, argmax) = pool.forward(&x).unwrap();
        assert_eq!(y.data, vec![3.0, 4.0]);
        // constant input: gradient to the first element of each window
        let xc = Tensor3::from_vec(1, 4, 1, vec![5.0; 4]).unwrap();
        let (yc, argc) = pool.forward(&xc).unwrap();
        assert_eq!(yc.data, vec![5.0, 5.0]);
        assert_eq!(argc, vec![0, 2]);
        let gy = Tensor3::from_vec(1, 2, 1, vec![1.0, 1.0]).unwrap();
        let gx = pool.backward(&gy, &argc, 4);
        assert_eq!(gx.data, vec![1.0, 0.0, 1.0, 0.0]);
        let _ = argmax;
    }

    #[test]
    fn maxpool_gradient_matches_finite_differences() {
        let mut s = RandomStream::new(6);
        let pool = MaxPool1d { window: 2 };
        // distinct values so the argmax is stable under the FD perturbation
        let mut x = random_tensor(2, 8, 3, &mut s);
        for (i, v) in x.data.iter_mut().enumerate() {
            *v += i as f64 * 0.01;
        }
        let (y, argmax) = pool.forward(&x).unwrap();
        let coeffs = probe_coeffs(y.data.len(), &mut s);
        let gy = Tensor3::from_vec(y.batch, y.len, y.channels, coeffs.clone()).unwrap();
        let gx = pool.backward(&gy, &argmax, x.len);
        let num_gx = finite_diff_grad(
            |data| {
                let xt = Tensor3::from_vec(x.batch, x.len, x.channels, data.to_vec()).unwrap();
                let (y, _) = pool.forward(&xt).unwrap();
                y.data.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
            },
            &x.data,
            FD_H,
        );
        assert!(max_rel_error(&gx.data, &num_gx) < FD_TOL);
    }

    #[test]
    fn dense_identity() {
        let dense = Dense::identity(4);
        let x = Matrix::from_vec(2, 4, (0..8).map(|i| i as f64).collect()).unwrap();
        let y = dense.forward(&x).unwrap();
        assert_eq!(y.data, x.data);
    }

    #[test]
    fn dense_gradients_match_finite_differences() {
        let mut s = RandomStream::new(7);
        let mut dense = Dense::new(5, 3, &mut s);
        let mut x = Matrix::zeros(4, 5);
        s.fill_normal(&mut x.data);
        let y = dense.forward(&x).unwrap();
        let coeffs = probe_coeffs(y.data.len(), &mut s);
        let gy = Matrix::from_vec(4, 3, coeffs.clone()).unwrap();
        dense.zero_grads();
        let gx = dense.backward(&x, &gy).unwrap();

        let loss = |d: &Dense, x: &Matrix| -> f64 {
            let y = d.forward(x).unwrap();
            y.data.iter().zip(&coeffs).map(|(a, b)| a * b).sum()
        };
        let num_gx = finite_diff_grad(
            |data| loss(&dense, &Matrix::from_vec(4, 5, data.to_vec()).unwrap()),
            &x.data,
            FD_H,
        );
        assert!(max_rel_error(&gx.data, &num_gx) < FD_TOL);
        let num_gw = finite_diff_grad(
            |w| {
                let mut d = dense.clone();
                d.w = w.to_vec();
                loss(&d, &x)
            },
            &dense.w,
            FD_H,
        );
        assert!(max_rel_error(&dense.gw, &num_gw) < FD_TOL);
        let num_gb = finite_diff_grad(
            |b| {
                let mut d = dense.clone();
                d.b = b.to_vec();
                loss(&d, &x)
            },
            &dense.b,
            FD_H,
        );
        assert!(max_rel_error(&dense.gb, &num_gb) < FD_TOL);
    }

    #[test]
    fn relu_definition() {
        assert_eq!(relu_fwd(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn activation_gradients_match_finite_differences() {
        let mut s = RandomStream::new(8);
        // offset away from relu's kink so FD is valid
        let x: Vec<f64> = (0..40)
            .map(|_| {
                let v = s.normal();
                if v.abs() < 0.05 {
                    v + 0.1
                } else {
                    v
                }
            })
            .collect();
        let coeffs = probe_coeffs(x.len(), &mut s);
        let dot = |a: &[f64]| -> f64 { a.iter().zip(&coeffs).map(|(p, q)| p * q).sum() };

        let g = relu_bwd(&x, &coeffs);
        let num = finite_diff_grad(|x| dot(&relu_fwd(x)), &x, FD_H);
        assert!(max_rel_error(&g, &num) < FD_TOL);

        let y = tanh_fwd(&x);
        let g = tanh_bwd(&y, &coeffs);
        let num = finite_diff_grad(|x| dot(&tanh_fwd(x)), &x, FD_H);
        assert!(max_rel_error(&g, &num) < FD_TOL);

        let y = sigmoid_fwd(&x);
        let g = sigmoid_bwd(&y, &coeffs);
        let num = finite_diff_grad(|x| dot(&sigmoid_fwd(x)), &x, FD_H);
        assert!(max_rel_error(&g, &num) < FD_TOL);
    }

    #[test]
    fn softmax_xent_gradient_matches_finite_differences() {
        let mut s = RandomStream::new(9);
        let mut logits = Matrix::zeros(3, 5);
        s.fill_normal(&mut logits.data);
        let labels = vec![2usize, 0, 4];
        let (_, grad, _) = softmax_xent(&logits, &labels).unwrap();
        let num = finite_diff_grad(
            |data| {
                let m = Matrix::from_vec(3, 5, data.to_vec()).unwrap();
                softmax_xent(&m, &labels).unwrap().0
            },
            &logits.data,
            FD_H,
        );
        assert!(max_rel_error(&grad.data, &num) < FD_TOL);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let preds = vec![0.3, 0.7, 0.51, 0.92];
        let targets = vec![1.0, 0.0, 1.0, 1.0];
        let (_, grad) = bce(&preds, &targets).unwrap();
        let num = finite_diff_grad(|p| bce(p, &targets).unwrap().0, &preds, 1e-6);
        assert!(max_rel_error(&grad, &num) < FD_TOL);
    }

    #[test]
    fn dropout_contracts() {
        let mut s = RandomStream::new(10);
        let x = vec![1.0; 16];
        // rate 0 → identity
        let (y, _) = dropout_fwd(&x, 0.0, &mut s, true).unwrap();
        assert_eq!(y, x);
        // inference mode → identity at any rate
        let (y, _) = dropout_fwd(&x, 0.9, &mut s, false).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn dropout_statistics() {
        let mut s = RandomStream::new(11);
        let n = 100_000;
        let x = vec![2.0; n];
        let (y, mask) = dropout_fwd(&x, 0.5, &mut s, true).unwrap();
        let survivors = mask.iter().filter(|&&m| m > 0.0).count() as f64 / n as f64;
        assert!((survivors - 0.5).abs() < 0.01, "survivor fraction {survivors}");
        let mean = y.iter().sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() / 2.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn dropout_backward_uses_mask() {
        let mut s = RandomStream::new(12);
        let x = vec![1.0; 8];
        let (_, mask) = dropout_fwd(&x, 0.5, &mut s, true).unwrap();
        let gy = vec![1.0; 8];
        let gx = dropout_bwd(&mask, &gy);
        assert_eq!(gx, mask);
    }
}
