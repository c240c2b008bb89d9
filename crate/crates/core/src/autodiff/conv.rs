//! Spatial operators: convolution, pooling, resampling, cropping, padding,
//! and group normalization. All operate on `[B, C, H, W]` tensors.

use ndarray::{Array2, Array4, ArrayD, ArrayView3, ArrayViewMut3, Axis, Ix2, Ix4};

use super::Tensor;

fn as4(v: &ArrayD<f64>) -> ndarray::ArrayView4<'_, f64> {
    v.view().into_dimensionality::<Ix4>().expect("expected a 4-d tensor")
}

/// Lower one image to column form: `[C*kh*kw, oh*ow]`.
fn im2col(input: ArrayView3<'_, f64>, kh: usize, kw: usize, stride: usize, pad: usize, oh: usize, ow: usize) -> Array2<f64> {
    let (c, h, w) = input.dim();
    let mut cols = Array2::<f64>::zeros((c * kh * kw, oh * ow));
    for ci in 0..c {
        for ky in 0..kh {
            for kx in 0..kw {
                let row = (ci * kh + ky) * kw + kx;
                let mut out_row = cols.row_mut(row);
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        out_row[oy * ow + ox] = input[(ci, iy as usize, ix as usize)];
                    }
                }
            }
        }
    }
    cols
}

/// Accumulate column-form gradients back into image form.
fn col2im_add(cols: &Array2<f64>, mut out: ArrayViewMut3<'_, f64>, kh: usize, kw: usize, stride: usize, pad: usize, oh: usize, ow: usize) {
    let (c, h, w) = out.dim();
    for ci in 0..c {
        for ky in 0..kh {
            for kx in 0..kw {
                let row = (ci * kh + ky) * kw + kx;
                let col_row = cols.row(row);
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        out[(ci, iy as usize, ix as usize)] += col_row[oy * ow + ox];
                    }
                }
            }
        }
    }
}

impl Tensor {
    /// 2-d convolution, `input [B,C,H,W]` with `weight [O,C,kh,kw]`.
    pub fn conv2d(&self, weight: &Tensor, stride: usize, pad: usize) -> Tensor {
        let input = as4(self.value());
        let wv = weight.value();
        assert_eq!(wv.ndim(), 4, "conv weight must be 4-d");
        let (b, c, h, w) = input.dim();
        let (o, wc, kh, kw) = (wv.shape()[0], wv.shape()[1], wv.shape()[2], wv.shape()[3]);
        assert_eq!(c, wc, "conv channel mismatch: input {c}, weight {wc}");
        let oh = (h + 2 * pad - kh) / stride + 1;
        let ow = (w + 2 * pad - kw) / stride + 1;
        let wmat = wv
            .view()
            .into_shape_with_order((o, wc * kh * kw))
            .unwrap()
            .to_owned();
        let mut out = Array4::<f64>::zeros((b, o, oh, ow));
        for bi in 0..b {
            let cols = im2col(input.index_axis(Axis(0), bi), kh, kw, stride, pad, oh, ow);
            let prod = wmat.dot(&cols); // [O, oh*ow]
            out.index_axis_mut(Axis(0), bi)
                .assign(&prod.into_shape_with_order((o, oh, ow)).unwrap());
        }
        let in_value = self.value().clone();
        let w_value = wv.clone();
        Tensor::from_op(
            out.into_dyn(),
            vec![self.clone(), weight.clone()],
            Box::new(move |g| {
                let g4 = as4(g);
                let input = as4(&in_value);
                let wmat = w_value
                    .view()
                    .into_shape_with_order((o, c * kh * kw))
                    .unwrap()
                    .to_owned();
                let mut dinput = ArrayD::<f64>::zeros(in_value.raw_dim());
                let mut dw_mat = Array2::<f64>::zeros((o, c * kh * kw));
                {
                    let mut dinput4 = dinput.view_mut().into_dimensionality::<Ix4>().unwrap();
                    for bi in 0..b {
                        let cols = im2col(input.index_axis(Axis(0), bi), kh, kw, stride, pad, oh, ow);
                        let gmat = g4
                            .index_axis(Axis(0), bi)
                            .into_shape_with_order((o, oh * ow))
                            .unwrap()
                            .to_owned();
                        dw_mat += &gmat.dot(&cols.t());
                        let dcols = wmat.t().dot(&gmat);
                        col2im_add(&dcols, dinput4.index_axis_mut(Axis(0), bi), kh, kw, stride, pad, oh, ow);
                    }
                }
                let dw = dw_mat.into_shape_with_order((o, c, kh, kw)).unwrap().into_dyn();
                vec![Some(dinput), Some(dw)]
            }),
        )
    }

    /// Average pooling with a square window and matching stride.
    pub fn avg_pool2d(&self, k: usize) -> Tensor {
        let input = as4(self.value());
        let (b, c, h, w) = input.dim();
        assert!(h % k == 0 && w % k == 0, "pool size must divide spatial dims");
        let (oh, ow) = (h / k, w / k);
        let mut out = Array4::<f64>::zeros((b, c, oh, ow));
        let norm = 1.0 / (k * k) as f64;
        for bi in 0..b {
            for ci in 0..c {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = 0.0;
                        for dy in 0..k {
                            for dx in 0..k {
                                acc += input[(bi, ci, oy * k + dy, ox * k + dx)];
                            }
                        }
                        out[(bi, ci, oy, ox)] = acc * norm;
                    }
                }
            }
        }
        let in_shape = self.value().raw_dim();
        Tensor::from_op(
            out.into_dyn(),
            vec![self.clone()],
            Box::new(move |g| {
                let g4 = as4(g);
                let mut dinput = ArrayD::<f64>::zeros(in_shape.clone());
                {
                    let mut d4 = dinput.view_mut().into_dimensionality::<Ix4>().unwrap();
                    for bi in 0..b {
                        for ci in 0..c {
                            for oy in 0..oh {
                                for ox in 0..ow {
                                    let gv = g4[(bi, ci, oy, ox)] * norm;
                                    for dy in 0..k {
                                        for dx in 0..k {
                                            d4[(bi, ci, oy * k + dy, ox * k + dx)] += gv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                vec![Some(dinput)]
            }),
        )
    }

    /// Nearest-neighbour upsampling by an integer factor.
    pub fn upsample_nearest2d(&self, factor: usize) -> Tensor {
        let input = as4(self.value());
        let (b, c, h, w) = input.dim();
        let (oh, ow) = (h * factor, w * factor);
        let mut out = Array4::<f64>::zeros((b, c, oh, ow));
        for bi in 0..b {
            for ci in 0..c {
                for oy in 0..oh {
                    for ox in 0..ow {
                        out[(bi, ci, oy, ox)] = input[(bi, ci, oy / factor, ox / factor)];
                    }
                }
            }
        }
        let in_shape = self.value().raw_dim();
        Tensor::from_op(
            out.into_dyn(),
            vec![self.clone()],
            Box::new(move |g| {
                let g4 = as4(g);
                let mut dinput = ArrayD::<f64>::zeros(in_shape.clone());
                {
                    let mut d4 = dinput.view_mut().into_dimensionality::<Ix4>().unwrap();
                    for bi in 0..b {
                        for ci in 0..c {
                            for oy in 0..oh {
                                for ox in 0..ow {
                                    d4[(bi, ci, oy / factor, ox / factor)] += g4[(bi, ci, oy, ox)];
                                }
                            }
                        }
                    }
                }
                vec![Some(dinput)]
            }),
        )
    }

    /// Bilinear resampling to `(oh, ow)` with half-pixel centers. The
    /// interpolation weights of each output pixel sum to one, so constants are
    /// preserved up to rounding.
    pub fn resize_bilinear(&self, oh: usize, ow: usize) -> Tensor {
        let input = as4(self.value());
        let (b, c, h, w) = input.dim();
        let taps = |out_len: usize, in_len: usize| -> Vec<(usize, usize, f64)> {
            (0..out_len)
                .map(|i| {
                    let src = (i as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5;
                    let src = src.clamp(0.0, (in_len - 1) as f64);
                    let lo = src.floor() as usize;
                    let hi = (lo + 1).min(in_len - 1);
                    (lo, hi, src - lo as f64)
                })
                .collect()
        };
        let ys = taps(oh, h);
        let xs = taps(ow, w);
        let mut out = Array4::<f64>::zeros((b, c, oh, ow));
        for bi in 0..b {
            for ci in 0..c {
                for (oy, &(y0, y1, fy)) in ys.iter().enumerate() {
                    for (ox, &(x0, x1, fx)) in xs.iter().enumerate() {
                        let v00 = input[(bi, ci, y0, x0)];
                        let v01 = input[(bi, ci, y0, x1)];
                        let v10 = input[(bi, ci, y1, x0)];
                        let v11 = input[(bi, ci, y1, x1)];
                        out[(bi, ci, oy, ox)] =
                            (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
                    }
                }
            }
        }
        let in_shape = self.value().raw_dim();
        Tensor::from_op(
            out.into_dyn(),
            vec![self.clone()],
            Box::new(move |g| {
                let g4 = as4(g);
                let mut dinput = ArrayD::<f64>::zeros(in_shape.clone());
                {
                    let mut d4 = dinput.view_mut().into_dimensionality::<Ix4>().unwrap();
                    for bi in 0..b {
                        for ci in 0..c {
                            for (oy, &(y0, y1, fy)) in ys.iter().enumerate() {
                                for (ox, &(x0, x1, fx)) in xs.iter().enumerate() {
                                    let gv = g4[(bi, ci, oy, ox)];
                                    d4[(bi, ci, y0, x0)] += gv * (1.0 - fy) * (1.0 - fx);
                                    d4[(bi, ci, y0, x1)] += gv * (1.0 - fy) * fx;
                                    d4[(bi, ci, y1, x0)] += gv * fy * (1.0 - fx);
                                    d4[(bi, ci, y1, x1)] += gv * fy * fx;
                                }
                            }
                        }
                    }
                }
                vec![Some(dinput)]
            }),
        )
    }

    /// Crop the last two axes to a window.
    pub fn crop_last2(&self, y0: usize, x0: usize, h: usize, w: usize) -> Tensor {
        let nd = self.value().ndim();
        assert!(nd >= 2);
        let (ay, ax) = (nd - 2, nd - 1);
        assert!(y0 + h <= self.shape()[ay] && x0 + w <= self.shape()[ax], "crop out of bounds");
        let value = self
            .value()
            .slice_axis(Axis(ay), ndarray::Slice::from(y0 as isize..(y0 + h) as isize))
            .slice_axis(Axis(ax), ndarray::Slice::from(x0 as isize..(x0 + w) as isize))
            .to_owned();
        let in_shape = self.value().raw_dim();
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let mut dinput = ArrayD::<f64>::zeros(in_shape.clone());
                dinput
                    .slice_axis_mut(Axis(ay), ndarray::Slice::from(y0 as isize..(y0 + h) as isize))
                    .slice_axis_mut(Axis(ax), ndarray::Slice::from(x0 as isize..(x0 + w) as isize))
                    .assign(g);
                vec![Some(dinput)]
            }),
        )
    }

    /// Zero-pad the last axis on the right to `new_len`.
    pub fn pad_right(&self, new_len: usize) -> Tensor {
        let nd = self.value().ndim();
        let ax = nd - 1;
        let old = self.shape()[ax];
        assert!(new_len >= old, "pad_right cannot shrink");
        let mut shape = self.shape().to_vec();
        shape[ax] = new_len;
        let mut value = ArrayD::<f64>::zeros(ndarray::IxDyn(&shape));
        value
            .slice_axis_mut(Axis(ax), ndarray::Slice::from(0..old as isize))
            .assign(self.value());
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let dg = g
                    .slice_axis(Axis(ax), ndarray::Slice::from(0..old as isize))
                    .to_owned();
                vec![Some(dg)]
            }),
        )
    }

    /// Group normalization over `[B,C,H,W]` with per-channel scale and shift.
    pub fn group_norm(&self, groups: usize, gamma: &Tensor, beta: &Tensor, eps: f64) -> Tensor {
        let input = as4(self.value());
        let (b, c, h, w) = input.dim();
        assert!(c % groups == 0, "channels {c} not divisible by groups {groups}");
        let cg = c / groups;
        let n = (cg * h * w) as f64;
        let gv = gamma.value().clone();
        let bv = beta.value().clone();
        assert_eq!(gv.len(), c);
        assert_eq!(bv.len(), c);

        let mut xhat = Array4::<f64>::zeros((b, c, h, w));
        let mut inv_std = Array2::<f64>::zeros((b, groups));
        for bi in 0..b {
            for gi in 0..groups {
                let mut mean = 0.0;
                for ci in gi * cg..(gi + 1) * cg {
                    for y in 0..h {
                        for x in 0..w {
                            mean += input[(bi, ci, y, x)];
                        }
                    }
                }
                mean /= n;
                let mut var = 0.0;
                for ci in gi * cg..(gi + 1) * cg {
                    for y in 0..h {
                        for x in 0..w {
                            let d = input[(bi, ci, y, x)] - mean;
                            var += d * d;
                        }
                    }
                }
                var /= n;
                let istd = 1.0 / (var + eps).sqrt();
                inv_std[(bi, gi)] = istd;
                for ci in gi * cg..(gi + 1) * cg {
                    for y in 0..h {
                        for x in 0..w {
                            xhat[(bi, ci, y, x)] = (input[(bi, ci, y, x)] - mean) * istd;
                        }
                    }
                }
            }
        }
        let mut out = Array4::<f64>::zeros((b, c, h, w));
        let gv1 = gv.as_slice().unwrap().to_vec();
        let bv1 = bv.as_slice().unwrap().to_vec();
        for bi in 0..b {
            for ci in 0..c {
                for y in 0..h {
                    for x in 0..w {
                        out[(bi, ci, y, x)] = gv1[ci] * xhat[(bi, ci, y, x)] + bv1[ci];
                    }
                }
            }
        }
        let xhat_c = xhat.clone();
        let gamma_shape = gamma.value().raw_dim();
        let beta_shape = beta.value().raw_dim();
        Tensor::from_op(
            out.into_dyn(),
            vec![self.clone(), gamma.clone(), beta.clone()],
            Box::new(move |g| {
                let g4 = as4(g);
                let mut dgamma = ArrayD::<f64>::zeros(gamma_shape.clone());
                let mut dbeta = ArrayD::<f64>::zeros(beta_shape.clone());
                {
                    let dgs = dgamma.as_slice_mut().unwrap();
                    let dbs = dbeta.as_slice_mut().unwrap();
                    for bi in 0..b {
                        for ci in 0..c {
                            for y in 0..h {
                                for x in 0..w {
                                    let gval = g4[(bi, ci, y, x)];
                                    dgs[ci] += gval * xhat_c[(bi, ci, y, x)];
                                    dbs[ci] += gval;
                                }
                            }
                        }
                    }
                }
                let mut dx = Array4::<f64>::zeros((b, c, h, w));
                for bi in 0..b {
                    for gi in 0..groups {
                        // dxhat = g * gamma; dx via the standard normalization backward.
                        let mut mean_dxhat = 0.0;
                        let mut mean_dxhat_xhat = 0.0;
                        for ci in gi * cg..(gi + 1) * cg {
                            for y in 0..h {
                                for x in 0..w {
                                    let dxh = g4[(bi, ci, y, x)] * gv1[ci];
                                    mean_dxhat += dxh;
                                    mean_dxhat_xhat += dxh * xhat_c[(bi, ci, y, x)];
                                }
                            }
                        }
                        mean_dxhat /= n;
                        mean_dxhat_xhat /= n;
                        let istd = inv_std[(bi, gi)];
                        for ci in gi * cg..(gi + 1) * cg {
                            for y in 0..h {
                                for x in 0..w {
                                    let dxh = g4[(bi, ci, y, x)] * gv1[ci];
                                    dx[(bi, ci, y, x)] = istd
                                        * (dxh - mean_dxhat - xhat_c[(bi, ci, y, x)] * mean_dxhat_xhat);
                                }
                            }
                        }
                    }
                }
                vec![Some(dx.into_dyn()), Some(dgamma), Some(dbeta)]
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::super::gradcheck::check_gradients;
    use super::*;
    use ndarray::IxDyn;
    use rand::Rng;

    fn randn(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = crate::rng::seeded_rng(seed, crate::rng::StreamDomain::Init, 1);
        ArrayD::from_shape_fn(IxDyn(shape), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn conv2d_matches_direct_convolution() {
        // 1x1 input channel, 3x3 kernel, identity-style check against a loop.
        let x = randn(&[1, 2, 5, 5], 21);
        let w = randn(&[3, 2, 3, 3], 22);
        let xt = Tensor::constant(x.clone());
        let wt = Tensor::constant(w.clone());
        let out = xt.conv2d(&wt, 1, 1);
        let o = out.value();
        for oc in 0..3 {
            for oy in 0..5usize {
                for ox in 0..5usize {
                    let mut acc = 0.0;
                    for ic in 0..2 {
                        for ky in 0..3usize {
                            for kx in 0..3usize {
                                let iy = oy as isize + ky as isize - 1;
                                let ix = ox as isize + kx as isize - 1;
                                if iy < 0 || iy >= 5 || ix < 0 || ix >= 5 {
                                    continue;
                                }
                                acc += x[[0, ic, iy as usize, ix as usize]] * w[[oc, ic, ky, kx]];
                            }
                        }
                    }
                    assert!((o[[0, oc, oy, ox]] - acc).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conv2d_backward_matches_fd() {
        let x = randn(&[2, 2, 4, 4], 23);
        let w = randn(&[3, 2, 3, 3], 24);
        check_gradients(&[x, w], |t| t[0].conv2d(&t[1], 1, 1).square().sum_all(), 1e-5, 1e-7);
        let x = randn(&[1, 2, 6, 6], 25);
        let w = randn(&[4, 2, 3, 3], 26);
        check_gradients(&[x, w], |t| t[0].conv2d(&t[1], 2, 1).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn pool_and_upsample_backward_match_fd() {
        let x = randn(&[1, 3, 4, 4], 27);
        check_gradients(&[x.clone()], |t| t[0].avg_pool2d(2).square().sum_all(), 1e-5, 1e-7);
        check_gradients(&[x], |t| t[0].upsample_nearest2d(2).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn bilinear_preserves_constants_and_matches_fd() {
        let c = ArrayD::from_elem(IxDyn(&[1, 1, 3, 3]), 0.7);
        let t = Tensor::constant(c);
        let up = t.resize_bilinear(7, 5);
        for v in up.value().iter() {
            assert!((v - 0.7).abs() < 1e-12);
        }
        let x = randn(&[1, 2, 4, 5], 28);
        check_gradients(&[x], |t| t[0].resize_bilinear(6, 9).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn crop_pad_backward_match_fd() {
        let x = randn(&[2, 3, 6, 6], 29);
        check_gradients(&[x.clone()], |t| t[0].crop_last2(1, 2, 3, 4).square().sum_all(), 1e-5, 1e-7);
        check_gradients(&[x], |t| t[0].pad_right(9).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn group_norm_backward_matches_fd() {
        let x = randn(&[2, 4, 3, 3], 30);
        let gamma = randn(&[4], 31);
        let beta = randn(&[4], 32);
        check_gradients(
            &[x, gamma, beta],
            |t| t[0].group_norm(2, &t[1], &t[2], 1e-5).square().sum_all(),
            1e-5,
            1e-6,
        );
    }
}
