//! Minimal reverse-mode automatic differentiation over `ndarray` (f64).
//!
//! Graphs are built per forward pass and dropped afterwards. Everything runs
//! single-threaded over f64, so identical inputs produce bit-identical values
//! and gradients, and analytic gradients can be checked against central finite
//! differences tightly.

mod conv;
pub mod gradcheck;

pub use conv::*;

use std::cell::Cell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use ndarray::{ArrayD, Axis, IxDyn};

thread_local! {
    static NEXT_ID: Cell<u64> = const { Cell::new(0) };
}

fn fresh_id() -> u64 {
    NEXT_ID.with(|c| {
        let id = c.get();
        c.set(id + 1);
        id
    })
}

type BackwardFn = Box<dyn Fn(&ArrayD<f64>) -> Vec<Option<ArrayD<f64>>>>;

struct Node {
    id: u64,
    value: ArrayD<f64>,
    parents: Vec<Tensor>,
    backward: Option<BackwardFn>,
    requires_grad: bool,
}

/// A value in the computation graph.
#[derive(Clone)]
pub struct Tensor(Rc<Node>);

/// Gradients of a scalar with respect to graph nodes, keyed by node identity.
pub struct Gradients {
    map: HashMap<u64, ArrayD<f64>>,
}

impl Gradients {
    pub fn wrt(&self, t: &Tensor) -> Option<&ArrayD<f64>> {
        self.map.get(&t.0.id)
    }
}

impl Tensor {
    /// A graph input that does not require gradients.
    pub fn constant(value: ArrayD<f64>) -> Tensor {
        Tensor(Rc::new(Node {
            id: fresh_id(),
            value,
            parents: Vec::new(),
            backward: None,
            requires_grad: false,
        }))
    }

    /// A trainable leaf: gradients are accumulated for it during backward.
    pub fn param(value: ArrayD<f64>) -> Tensor {
        Tensor(Rc::new(Node {
            id: fresh_id(),
            value,
            parents: Vec::new(),
            backward: None,
            requires_grad: true,
        }))
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor::constant(ArrayD::from_elem(IxDyn(&[]), v))
    }

    pub(crate) fn from_op(value: ArrayD<f64>, parents: Vec<Tensor>, backward: BackwardFn) -> Tensor {
        let requires_grad = parents.iter().any(|p| p.0.requires_grad);
        if !requires_grad {
            return Tensor::constant(value);
        }
        Tensor(Rc::new(Node { id: fresh_id(), value, parents, backward: Some(backward), requires_grad }))
    }

    pub fn value(&self) -> &ArrayD<f64> {
        &self.0.value
    }

    pub fn shape(&self) -> &[usize] {
        self.0.value.shape()
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad
    }

    /// Scalar extraction; panics unless the tensor holds exactly one element.
    pub fn item(&self) -> f64 {
        assert_eq!(self.0.value.len(), 1, "item() on non-scalar tensor");
        *self.0.value.iter().next().unwrap()
    }

    /// Reverse-mode sweep from a scalar output.
    pub fn backward(&self) -> Gradients {
        assert_eq!(self.0.value.len(), 1, "backward() requires a scalar loss");
        let order = self.topo_order();
        let mut map: HashMap<u64, ArrayD<f64>> = HashMap::new();
        map.insert(self.0.id, ArrayD::from_elem(self.0.value.raw_dim(), 1.0));
        for node in order.iter().rev() {
            let Some(grad) = map.get(&node.0.id).cloned() else { continue };
            let Some(backward) = node.0.backward.as_ref() else { continue };
            let parent_grads = backward(&grad);
            assert_eq!(parent_grads.len(), node.0.parents.len());
            for (parent, pg) in node.0.parents.iter().zip(parent_grads) {
                let Some(pg) = pg else { continue };
                if !parent.0.requires_grad {
                    continue;
                }
                assert_eq!(
                    pg.shape(),
                    parent.shape(),
                    "gradient shape mismatch flowing into node {}",
                    parent.0.id
                );
                match map.get_mut(&parent.0.id) {
                    Some(acc) => *acc += &pg,
                    None => {
                        map.insert(parent.0.id, pg);
                    }
                }
            }
        }
        Gradients { map }
    }

    fn topo_order(&self) -> Vec<Tensor> {
        let mut order = Vec::new();
        let mut visited: HashSet<u64> = HashSet::new();
        // Iterative DFS; second stack entry marks the post-visit emit.
        let mut stack: Vec<(Tensor, bool)> = vec![(self.clone(), false)];
        while let Some((node, emit)) = stack.pop() {
            if emit {
                order.push(node);
                continue;
            }
            if !visited.insert(node.0.id) {
                continue;
            }
            stack.push((node.clone(), true));
            for parent in &node.0.parents {
                if parent.0.requires_grad && !visited.contains(&parent.0.id) {
                    stack.push((parent.clone(), false));
                }
            }
        }
        order
    }
}

/// Sum `grad` down to `shape` (inverse of broadcasting).
fn reduce_to_shape(grad: &ArrayD<f64>, shape: &[usize]) -> ArrayD<f64> {
    let mut g = grad.clone();
    while g.ndim() > shape.len() {
        g = g.sum_axis(Axis(0));
    }
    for ax in 0..shape.len() {
        if shape[ax] == 1 && g.shape()[ax] != 1 {
            g = g.sum_axis(Axis(ax)).insert_axis(Axis(ax));
        }
    }
    g
}

fn broadcast_to(value: &ArrayD<f64>, shape: &[usize]) -> ArrayD<f64> {
    value
        .broadcast(IxDyn(shape))
        .unwrap_or_else(|| panic!("cannot broadcast {:?} to {:?}", value.shape(), shape))
        .to_owned()
}

impl Tensor {
    /// Elementwise addition with numpy-style broadcasting of `rhs`.
    pub fn add(&self, rhs: &Tensor) -> Tensor {
        let value = if self.shape() == rhs.shape() {
            &self.0.value + &rhs.0.value
        } else {
            &self.0.value + &broadcast_to(rhs.value(), self.shape())
        };
        let lshape = self.shape().to_vec();
        let rshape = rhs.shape().to_vec();
        Tensor::from_op(
            value,
            vec![self.clone(), rhs.clone()],
            Box::new(move |g| {
                vec![Some(reduce_to_shape(g, &lshape)), Some(reduce_to_shape(g, &rshape))]
            }),
        )
    }

    pub fn sub(&self, rhs: &Tensor) -> Tensor {
        self.add(&rhs.neg())
    }

    /// Elementwise product with broadcasting of `rhs`.
    pub fn mul(&self, rhs: &Tensor) -> Tensor {
        let rb = broadcast_to(rhs.value(), self.shape());
        let value = &self.0.value * &rb;
        let lv = self.0.value.clone();
        let lshape = self.shape().to_vec();
        let rshape = rhs.shape().to_vec();
        Tensor::from_op(
            value,
            vec![self.clone(), rhs.clone()],
            Box::new(move |g| {
                let dl = g * &rb;
                let dr = g * &lv;
                vec![Some(reduce_to_shape(&dl, &lshape)), Some(reduce_to_shape(&dr, &rshape))]
            }),
        )
    }

    pub fn neg(&self) -> Tensor {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let value = &self.0.value * c;
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| vec![Some(g * c)]),
        )
    }

    pub fn add_scalar(&self, c: f64) -> Tensor {
        let value = &self.0.value + c;
        Tensor::from_op(value, vec![self.clone()], Box::new(move |g| vec![Some(g.clone())]))
    }

    pub fn square(&self) -> Tensor {
        let v = self.0.value.clone();
        let value = &v * &v;
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| vec![Some(g * &(&v * 2.0))]),
        )
    }

    pub fn relu(&self) -> Tensor {
        let value = self.0.value.mapv(|x| x.max(0.0));
        let v = self.0.value.clone();
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let mask = v.mapv(|x| if x > 0.0 { 1.0 } else { 0.0 });
                vec![Some(g * &mask)]
            }),
        )
    }

    pub fn sigmoid(&self) -> Tensor {
        let y = self.0.value.mapv(|x| 1.0 / (1.0 + (-x).exp()));
        let yc = y.clone();
        Tensor::from_op(
            y,
            vec![self.clone()],
            Box::new(move |g| vec![Some(g * &(&yc * &yc.mapv(|v| 1.0 - v)))]),
        )
    }

    pub fn silu(&self) -> Tensor {
        let x = self.0.value.clone();
        let y = x.mapv(|v| v / (1.0 + (-v).exp()));
        Tensor::from_op(
            y,
            vec![self.clone()],
            Box::new(move |g| {
                let d = x.mapv(|v| {
                    let s = 1.0 / (1.0 + (-v).exp());
                    s * (1.0 + v * (1.0 - s))
                });
                vec![Some(g * &d)]
            }),
        )
    }

    pub fn tanh(&self) -> Tensor {
        let y = self.0.value.mapv(f64::tanh);
        let yc = y.clone();
        Tensor::from_op(
            y,
            vec![self.clone()],
            Box::new(move |g| vec![Some(g * &yc.mapv(|v| 1.0 - v * v))]),
        )
    }

    pub fn exp(&self) -> Tensor {
        let y = self.0.value.mapv(f64::exp);
        let yc = y.clone();
        Tensor::from_op(y, vec![self.clone()], Box::new(move |g| vec![Some(g * &yc)]))
    }

    pub fn sum_all(&self) -> Tensor {
        let value = ArrayD::from_elem(IxDyn(&[]), self.0.value.sum());
        let shape = self.shape().to_vec();
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let gv = *g.iter().next().unwrap();
                vec![Some(ArrayD::from_elem(IxDyn(&shape), gv))]
            }),
        )
    }

    pub fn mean_all(&self) -> Tensor {
        let n = self.0.value.len() as f64;
        self.sum_all().scale(1.0 / n)
    }

    /// Mean over one axis (the axis is removed).
    pub fn mean_axis(&self, axis: usize) -> Tensor {
        let n = self.shape()[axis] as f64;
        let value = self.0.value.mean_axis(Axis(axis)).expect("non-empty axis");
        let shape = self.shape().to_vec();
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let expanded = g.clone().insert_axis(Axis(axis));
                let spread = broadcast_to(&expanded, &shape) / n;
                vec![Some(spread)]
            }),
        )
    }

    /// Softmax over the last axis.
    pub fn softmax_last(&self) -> Tensor {
        let mut y = self.0.value.clone();
        let last = y.ndim() - 1;
        for mut lane in y.lanes_mut(Axis(last)) {
            let max = lane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in lane.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in lane.iter_mut() {
                *v /= sum;
            }
        }
        let yc = y.clone();
        Tensor::from_op(
            y,
            vec![self.clone()],
            Box::new(move |g| {
                // dx = y * (g - sum(g * y))
                let mut out = g * &yc;
                let last = out.ndim() - 1;
                for (mut out_lane, y_lane) in out.lanes_mut(Axis(last)).into_iter().zip(yc.lanes(Axis(last))) {
                    let dot: f64 = out_lane.iter().sum();
                    for (o, yv) in out_lane.iter_mut().zip(y_lane.iter()) {
                        *o -= dot * yv;
                    }
                }
                vec![Some(out)]
            }),
        )
    }

    /// Log-softmax over the last axis.
    pub fn log_softmax_last(&self) -> Tensor {
        let mut y = self.0.value.clone();
        let last = y.ndim() - 1;
        for mut lane in y.lanes_mut(Axis(last)) {
            let max = lane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + lane.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for v in lane.iter_mut() {
                *v -= lse;
            }
        }
        let yc = y.clone();
        Tensor::from_op(
            y,
            vec![self.clone()],
            Box::new(move |g| {
                // dx = g - softmax(x) * sum(g)
                let mut out = g.clone();
                let last = out.ndim() - 1;
                for (mut out_lane, y_lane) in out.lanes_mut(Axis(last)).into_iter().zip(yc.lanes(Axis(last))) {
                    let gsum: f64 = out_lane.iter().sum();
                    for (o, yv) in out_lane.iter_mut().zip(y_lane.iter()) {
                        *o -= gsum * yv.exp();
                    }
                }
                vec![Some(out)]
            }),
        )
    }

    pub fn reshape(&self, shape: &[usize]) -> Tensor {
        let orig = self.shape().to_vec();
        let value = self
            .0
            .value
            .clone()
            .into_shape_with_order(IxDyn(shape))
            .unwrap_or_else(|_| panic!("cannot reshape {:?} to {:?}", orig, shape));
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                vec![Some(g.clone().into_shape_with_order(IxDyn(&orig)).unwrap())]
            }),
        )
    }

    /// Swap two axes.
    pub fn swap_axes(&self, a: usize, b: usize) -> Tensor {
        let mut value = self.0.value.clone();
        value.swap_axes(a, b);
        let value = value.as_standard_layout().to_owned();
        Tensor::from_op(
            value,
            vec![self.clone()],
            Box::new(move |g| {
                let mut gg = g.clone();
                gg.swap_axes(a, b);
                vec![Some(gg.as_standard_layout().to_owned())]
            }),
        )
    }

    /// Concatenate along `axis`.
    pub fn concat(axis: usize, parts: &[Tensor]) -> Tensor {
        assert!(!parts.is_empty());
        let views: Vec<_> = parts.iter().map(|p| p.0.value.view()).collect();
        let value = ndarray::concatenate(Axis(axis), &views).expect("concat shapes");
        let sizes: Vec<usize> = parts.iter().map(|p| p.shape()[axis]).collect();
        Tensor::from_op(
            value,
            parts.to_vec(),
            Box::new(move |g| {
                let mut out = Vec::with_capacity(sizes.len());
                let mut offset = 0;
                for &len in &sizes {
                    let slice = g
                        .slice_axis(Axis(axis), ndarray::Slice::from(offset..offset + len as isize))
                        .to_owned();
                    out.push(Some(slice));
                    offset += len as isize;
                }
                out
            }),
        )
    }

    /// Matrix product. Supports `[n,k]x[k,m]`, `[B,n,k]x[k,m]` and
    /// `[B,n,k]x[B,k,m]`.
    pub fn matmul(&self, rhs: &Tensor) -> Tensor {
        use ndarray::Ix2;
        let a = &self.0.value;
        let b = &rhs.0.value;
        let value: ArrayD<f64> = match (a.ndim(), b.ndim()) {
            (2, 2) => {
                let av = a.view().into_dimensionality::<Ix2>().unwrap();
                let bv = b.view().into_dimensionality::<Ix2>().unwrap();
                av.dot(&bv).into_dyn()
            }
            (3, 2) => {
                let bv = b.view().into_dimensionality::<Ix2>().unwrap();
                let (bs, n, _k) = (a.shape()[0], a.shape()[1], a.shape()[2]);
                let m = bv.ncols();
                let mut out = ndarray::Array3::<f64>::zeros((bs, n, m));
                for i in 0..bs {
                    let ai = a.index_axis(Axis(0), i);
                    let av = ai.into_dimensionality::<Ix2>().unwrap();
                    out.index_axis_mut(Axis(0), i).assign(&av.dot(&bv));
                }
                out.into_dyn()
            }
            (3, 3) => {
                let (bs, n, _k) = (a.shape()[0], a.shape()[1], a.shape()[2]);
                let m = b.shape()[2];
                assert_eq!(b.shape()[0], bs, "batched matmul batch mismatch");
                let mut out = ndarray::Array3::<f64>::zeros((bs, n, m));
                for i in 0..bs {
                    let av = a.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                    let bv = b.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                    out.index_axis_mut(Axis(0), i).assign(&av.dot(&bv));
                }
                out.into_dyn()
            }
            (na, nb) => panic!("unsupported matmul ranks {na}x{nb}"),
        };
        let av = a.clone();
        let bv = b.clone();
        Tensor::from_op(
            value,
            vec![self.clone(), rhs.clone()],
            Box::new(move |g| {
                use ndarray::Ix2;
                match (av.ndim(), bv.ndim()) {
                    (2, 2) => {
                        let a2 = av.view().into_dimensionality::<Ix2>().unwrap();
                        let b2 = bv.view().into_dimensionality::<Ix2>().unwrap();
                        let g2 = g.view().into_dimensionality::<Ix2>().unwrap();
                        let da = g2.dot(&b2.t()).into_dyn();
                        let db = a2.t().dot(&g2).into_dyn();
                        vec![Some(da), Some(db)]
                    }
                    (3, 2) => {
                        let b2 = bv.view().into_dimensionality::<Ix2>().unwrap();
                        let bs = av.shape()[0];
                        let mut da = ArrayD::<f64>::zeros(av.raw_dim());
                        let mut db = ArrayD::<f64>::zeros(bv.raw_dim());
                        let mut db2 = db.view_mut().into_dimensionality::<Ix2>().unwrap();
                        for i in 0..bs {
                            let a2 = av.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                            let g2 = g.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                            da.index_axis_mut(Axis(0), i).assign(&g2.dot(&b2.t()));
                            db2 += &a2.t().dot(&g2);
                        }
                        vec![Some(da), Some(db)]
                    }
                    (3, 3) => {
                        let bs = av.shape()[0];
                        let mut da = ArrayD::<f64>::zeros(av.raw_dim());
                        let mut db = ArrayD::<f64>::zeros(bv.raw_dim());
                        for i in 0..bs {
                            let a2 = av.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                            let b2 = bv.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                            let g2 = g.index_axis(Axis(0), i).into_dimensionality::<Ix2>().unwrap();
                            da.index_axis_mut(Axis(0), i).assign(&g2.dot(&b2.t()));
                            db.index_axis_mut(Axis(0), i).assign(&a2.t().dot(&g2));
                        }
                        vec![Some(da), Some(db)]
                    }
                    _ => unreachable!(),
                }
            }),
        )
    }

    /// Row lookup: `table[V,D]` gathered at `ids`, returning `[len(ids), D]`.
    pub fn embedding(table: &Tensor, ids: &[usize]) -> Tensor {
        let tv = table.value();
        assert_eq!(tv.ndim(), 2, "embedding table must be 2-d");
        let d = tv.shape()[1];
        let mut out = ndarray::Array2::<f64>::zeros((ids.len(), d));
        for (row, &id) in ids.iter().enumerate() {
            out.row_mut(row).assign(&tv.index_axis(Axis(0), id));
        }
        let ids = ids.to_vec();
        let table_shape = tv.raw_dim();
        Tensor::from_op(
            out.into_dyn(),
            vec![table.clone()],
            Box::new(move |g| {
                let mut dt = ArrayD::<f64>::zeros(table_shape.clone());
                let g2 = g.view().into_dimensionality::<ndarray::Ix2>().unwrap();
                for (row, &id) in ids.iter().enumerate() {
                    let mut lane = dt.index_axis_mut(Axis(0), id);
                    lane += &g2.row(row);
                }
                vec![Some(dt)]
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::gradcheck::check_gradients;
    use super::*;
    use ndarray::{ArrayD, IxDyn};
    use rand::Rng;

    fn randn(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = crate::rng::seeded_rng(seed, crate::rng::StreamDomain::Init, 0);
        ArrayD::from_shape_fn(IxDyn(shape), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn add_mul_backward_matches_fd() {
        let a = randn(&[3, 4], 1);
        let b = randn(&[3, 4], 2);
        check_gradients(
            &[a, b],
            |xs| {
                let t = xs[0].mul(&xs[1]).add(&xs[0]);
                t.square().sum_all()
            },
            1e-5,
            1e-7,
        );
    }

    #[test]
    fn broadcast_add_backward_matches_fd() {
        let a = randn(&[2, 3, 4], 3);
        let b = randn(&[1, 1, 4], 4);
        check_gradients(&[a, b], |xs| xs[0].add(&xs[1]).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn activations_backward_match_fd() {
        let a = randn(&[5, 5], 5);
        check_gradients(&[a.clone()], |xs| xs[0].silu().sum_all(), 1e-5, 1e-7);
        check_gradients(&[a.clone()], |xs| xs[0].sigmoid().square().sum_all(), 1e-5, 1e-7);
        check_gradients(&[a.clone()], |xs| xs[0].tanh().square().sum_all(), 1e-5, 1e-7);
        check_gradients(&[a], |xs| xs[0].relu().square().sum_all(), 1e-4, 1e-6);
    }

    #[test]
    fn softmax_backward_matches_fd() {
        let a = randn(&[3, 6], 6);
        check_gradients(&[a.clone()], |xs| xs[0].softmax_last().square().sum_all(), 1e-5, 1e-7);
        check_gradients(&[a], |xs| xs[0].log_softmax_last().square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn matmul_backward_matches_fd() {
        let a = randn(&[4, 3], 7);
        let b = randn(&[3, 5], 8);
        check_gradients(&[a, b], |xs| xs[0].matmul(&xs[1]).square().sum_all(), 1e-5, 1e-7);
        let a3 = randn(&[2, 4, 3], 9);
        let b3 = randn(&[2, 3, 5], 10);
        check_gradients(&[a3.clone(), b3], |xs| xs[0].matmul(&xs[1]).square().sum_all(), 1e-5, 1e-7);
        let b2 = randn(&[3, 5], 11);
        check_gradients(&[a3, b2], |xs| xs[0].matmul(&xs[1]).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn reshape_swap_concat_backward_match_fd() {
        let a = randn(&[2, 6], 12);
        let b = randn(&[2, 6], 13);
        check_gradients(
            &[a, b],
            |xs| {
                let a = xs[0].reshape(&[2, 2, 3]).swap_axes(1, 2);
                let b = xs[1].reshape(&[2, 3, 2]);
                Tensor::concat(2, &[a, b]).square().sum_all()
            },
            1e-5,
            1e-7,
        );
    }

    #[test]
    fn embedding_backward_matches_fd() {
        let table = randn(&[7, 4], 14);
        check_gradients(
            &[table],
            |xs| Tensor::embedding(&xs[0], &[1, 3, 3, 0]).square().sum_all(),
            1e-5,
            1e-7,
        );
    }

    #[test]
    fn mean_axis_backward_matches_fd() {
        let a = randn(&[3, 4, 5], 15);
        check_gradients(&[a], |xs| xs[0].mean_axis(1).square().sum_all(), 1e-5, 1e-7);
    }

    #[test]
    fn gradient_accumulates_across_reuse() {
        let a = Tensor::param(ArrayD::from_elem(IxDyn(&[2]), 3.0));
        let y = a.add(&a).sum_all(); // y = 2*sum(a)
        let grads = y.backward();
        let ga = grads.wrt(&a).unwrap();
        assert!(ga.iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn constants_do_not_collect_gradients() {
        let a = Tensor::constant(ArrayD::from_elem(IxDyn(&[2]), 1.0));
        let b = Tensor::param(ArrayD::from_elem(IxDyn(&[2]), 2.0));
        let y = a.mul(&b).sum_all();
        let grads = y.backward();
        assert!(grads.wrt(&a).is_none());
        assert!(grads.wrt(&b).is_some());
    }
}
