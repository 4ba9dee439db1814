use std::collections::HashMap;

use super::{log_sum_exp, sigmoid, softmax, ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Param,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    Concat(Var, Var),
    StackRows(Vec<Var>),
    GatherRow(Var, usize),
    Softmax(Var),
    CrossEntropy(Var, usize),
    Sum(Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
}

/// Records a computation so that gradients can be pulled back through it.
///
/// Every operation appends one node. [`Tape::backward`] walks the nodes in
/// exact reverse recording order. Parameters are copied onto the tape once
/// per tape, so repeated use of a weight inside one forward pass refers to a
/// single node and its gradient is summed there.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
}

/// Gradients of one backward pass, indexed by tape node.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient with respect to a leaf or parameter node. `None` means the
    /// node does not influence the loss.
    pub fn wrt(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }
}

/// Logical `m×k · k×n` dimensions of a matmul, plus the output shape.
fn matmul_dims(a: &[usize], b: &[usize]) -> Option<(usize, usize, usize, Vec<usize>)> {
    match (a, b) {
        (&[m, k], &[k2, n]) if k == k2 => Some((m, k, n, vec![m, n])),
        (&[k], &[k2, n]) if k == k2 => Some((1, k, n, vec![n])),
        (&[m, k], &[k2]) if k == k2 => Some((m, k, 1, vec![m])),
        _ => None,
    }
}

fn mm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    if n == 1 {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&a[i * k..(i + 1) * k], b);
        }
        return out;
    }
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            let brow = &b[p * n..(p + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor {
        shape: t.shape.clone(),
        data: t.data.iter().map(|&v| f(v)).collect(),
    }
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor {
        shape: a.shape.clone(),
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Records an input that is not a parameter.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Brings a parameter onto the tape; later calls with the same id
    /// return the same node.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(&var) = self.params.get(&id) {
            return var;
        }
        let var = self.push(store.value(id).clone(), Op::Param);
        self.params.insert(id, var);
        var
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (&self.value(a).shape, &self.value(b).shape);
        if sa != sb {
            return Err(Error::Dimension {
                op,
                left: sa.clone(),
                right: sb.clone(),
            });
        }
        Ok(())
    }

    /// Matrix product. A rank-1 left operand is a row vector and a rank-1
    /// right operand is a column vector; the result drops that axis.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        let (m, k, n, shape) =
            matmul_dims(&va.shape, &vb.shape).ok_or_else(|| Error::Dimension {
                op: "matmul",
                left: va.shape.clone(),
                right: vb.shape.clone(),
            })?;
        let data = mm(&va.data, &vb.data, m, k, n);
        Ok(self.push(Tensor { shape, data }, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let v = zip_map(self.value(a), self.value(b), |x, y| x + y);
        Ok(self.push(v, Op::Add(a, b)))
    }

    /// Adds a row vector to every row of a matrix (or to a vector of the
    /// same length). This is the only broadcasting the tape supports.
    pub fn add_row(&mut self, matrix: Var, row: Var) -> Result<Var> {
        let (vm, vr) = (self.value(matrix), self.value(row));
        if vr.rank() != 1 || vm.rank() == 0 || vm.cols() != vr.len() {
            return Err(Error::Dimension {
                op: "add_row",
                left: vm.shape.clone(),
                right: vr.shape.clone(),
            });
        }
        let cols = vr.len();
        let mut out = vm.clone();
        for chunk in out.data.chunks_mut(cols) {
            for (o, r) in chunk.iter_mut().zip(&vr.data) {
                *o += r;
            }
        }
        Ok(self.push(out, Op::AddRow(matrix, row)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let v = zip_map(self.value(a), self.value(b), |x, y| x - y);
        Ok(self.push(v, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let v = zip_map(self.value(a), self.value(b), |x, y| x * y);
        Ok(self.push(v, Op::Mul(a, b)))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = map(self.value(a), f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = map(self.value(a), sigmoid);
        self.push(v, Op::Sigmoid(a))
    }

    /// Concatenates two vectors.
    pub fn concat(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.rank() != 1 || vb.rank() != 1 {
            return Err(Error::Dimension {
                op: "concat",
                left: va.shape.clone(),
                right: vb.shape.clone(),
            });
        }
        let mut data = Vec::with_capacity(va.len() + vb.len());
        data.extend_from_slice(&va.data);
        data.extend_from_slice(&vb.data);
        let v = Tensor {
            shape: vec![data.len()],
            data,
        };
        Ok(self.push(v, Op::Concat(a, b)))
    }

    /// Stacks equally long vectors into the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        let first = rows.first().ok_or_else(|| Error::Dimension {
            op: "stack_rows",
            left: vec![],
            right: vec![],
        })?;
        let cols = self.value(*first).len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &r in rows {
            let v = self.value(r);
            if v.rank() != 1 || v.len() != cols {
                return Err(Error::Dimension {
                    op: "stack_rows",
                    left: vec![cols],
                    right: v.shape.clone(),
                });
            }
            data.extend_from_slice(&v.data);
        }
        let v = Tensor {
            shape: vec![rows.len(), cols],
            data,
        };
        Ok(self.push(v, Op::StackRows(rows.to_vec())))
    }

    /// Row `index` of a matrix, as a vector (embedding lookup).
    pub fn gather_row(&mut self, matrix: Var, index: usize) -> Result<Var> {
        let vm = self.value(matrix);
        if vm.rank() != 2 {
            return Err(Error::Dimension {
                op: "gather_row",
                left: vm.shape.clone(),
                right: vec![],
            });
        }
        if index >= vm.rows() {
            return Err(Error::Index {
                what: "matrix rows",
                index,
                size: vm.rows(),
            });
        }
        let v = Tensor {
            shape: vec![vm.cols()],
            data: vm.row(index).to_vec(),
        };
        Ok(self.push(v, Op::GatherRow(matrix, index)))
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let va = self.value(a);
        if va.rank() != 1 {
            return Err(Error::Dimension {
                op: "softmax",
                left: va.shape.clone(),
                right: vec![],
            });
        }
        let v = Tensor {
            shape: va.shape.clone(),
            data: softmax(&va.data),
        };
        Ok(self.push(v, Op::Softmax(a)))
    }

    /// `-log softmax(logits)[target]` as a scalar.
    pub fn cross_entropy(&mut self, logits: Var, target: usize) -> Result<Var> {
        let vl = self.value(logits);
        if vl.rank() != 1 {
            return Err(Error::Dimension {
                op: "cross_entropy",
                left: vl.shape.clone(),
                right: vec![],
            });
        }
        if target >= vl.len() {
            return Err(Error::Index {
                what: "logits",
                index: target,
                size: vl.len(),
            });
        }
        let loss = log_sum_exp(&vl.data) - vl.data[target];
        // Rounding can dip a hair below zero; NaN must pass through.
        let loss = if loss < 0.0 { 0.0 } else { loss };
        Ok(self.push(Tensor::scalar(loss), Op::CrossEntropy(logits, target)))
    }

    /// Sum of all entries, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data.iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    /// Pulls the gradient of the scalar `loss` back through the tape.
    ///
    /// Gradients of parameter nodes are added to the matching entries of
    /// `store`; call [`ParamStore::reset_gradients`] first for a fresh step.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Result<Gradients> {
        let grads = self.backward_detached(loss)?;
        for (&id, &var) in &self.params {
            if let Some(g) = &grads.grads[var.0] {
                store.accumulate_grad(id, g);
            }
        }
        Ok(grads)
    }

    /// Like [`Tape::backward`] but leaves parameter gradients untouched.
    pub fn backward_detached(&self, loss: Var) -> Result<Gradients> {
        let lv = self
            .nodes
            .get(loss.0)
            .ok_or_else(|| Error::Contract(format!("loss node {} is not on this tape", loss.0)))?;
        if !lv.value.is_scalar() {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                lv.value.shape
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::filled(&lv.value.shape, 1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            let g = match node.op {
                Op::Leaf | Op::Param => continue,
                _ => match grads[idx].take() {
                    Some(g) => g,
                    None => continue,
                },
            };
            self.pull_back(node, &g, &mut grads);
        }
        Ok(Gradients { grads })
    }

    fn pull_back(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let out = &node.value;
        match &node.op {
            Op::Leaf | Op::Param => {}
            Op::MatMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let (m, k, n, _) = matmul_dims(&va.shape, &vb.shape).expect("checked in forward");
                // dA = G · Bᵀ
                let ga = self.grad_slot(grads, *a);
                for i in 0..m {
                    let grow = &g.data[i * n..(i + 1) * n];
                    for p in 0..k {
                        ga.data[i * k + p] += dot(grow, &vb.data[p * n..(p + 1) * n]);
                    }
                }
                // dB = Aᵀ · G
                let gb = self.grad_slot(grads, *b);
                for i in 0..m {
                    let grow = &g.data[i * n..(i + 1) * n];
                    for p in 0..k {
                        let aip = va.data[i * k + p];
                        let brow = &mut gb.data[p * n..(p + 1) * n];
                        for (d, gv) in brow.iter_mut().zip(grow) {
                            *d += aip * gv;
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                self.grad_slot(grads, *a).add_assign(g);
                self.grad_slot(grads, *b).add_assign(g);
            }
            Op::AddRow(m, r) => {
                self.grad_slot(grads, *m).add_assign(g);
                let gr = self.grad_slot(grads, *r);
                let cols = gr.len();
                for chunk in g.data.chunks(cols) {
                    for (d, gv) in gr.data.iter_mut().zip(chunk) {
                        *d += gv;
                    }
                }
            }
            Op::Sub(a, b) => {
                self.grad_slot(grads, *a).add_assign(g);
                let gb = self.grad_slot(grads, *b);
                for (d, gv) in gb.data.iter_mut().zip(&g.data) {
                    *d -= gv;
                }
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let ga = self.grad_slot(grads, *a);
                for ((d, gv), y) in ga.data.iter_mut().zip(&g.data).zip(&vb.data) {
                    *d += gv * y;
                }
                let gb = self.grad_slot(grads, *b);
                for ((d, gv), x) in gb.data.iter_mut().zip(&g.data).zip(&va.data) {
                    *d += gv * x;
                }
            }
            Op::Tanh(a) => {
                let ga = self.grad_slot(grads, *a);
                for ((d, gv), y) in ga.data.iter_mut().zip(&g.data).zip(&out.data) {
                    *d += gv * (1.0 - y * y);
                }
            }
            Op::Sigmoid(a) => {
                let ga = self.grad_slot(grads, *a);
                for ((d, gv), y) in ga.data.iter_mut().zip(&g.data).zip(&out.data) {
                    *d += gv * y * (1.0 - y);
                }
            }
            Op::Concat(a, b) => {
                let split = self.value(*a).len();
                let ga = self.grad_slot(grads, *a);
                for (d, gv) in ga.data.iter_mut().zip(&g.data[..split]) {
                    *d += gv;
                }
                let gb = self.grad_slot(grads, *b);
                for (d, gv) in gb.data.iter_mut().zip(&g.data[split..]) {
                    *d += gv;
                }
            }
            Op::StackRows(rows) => {
                for (i, r) in rows.iter().enumerate() {
                    let gr = self.grad_slot(grads, *r);
                    for (d, gv) in gr.data.iter_mut().zip(g.row(i)) {
                        *d += gv;
                    }
                }
            }
            Op::GatherRow(m, index) => {
                let gm = self.grad_slot(grads, *m);
                let cols = gm.cols();
                for (d, gv) in gm.data[index * cols..(index + 1) * cols]
                    .iter_mut()
                    .zip(&g.data)
                {
                    *d += gv;
                }
            }
            Op::Softmax(a) => {
                let gy = dot(&g.data, &out.data);
                let ga = self.grad_slot(grads, *a);
                for ((d, gv), y) in ga.data.iter_mut().zip(&g.data).zip(&out.data) {
                    *d += y * (gv - gy);
                }
            }
            Op::CrossEntropy(logits, target) => {
                let upstream = g.data[0];
                let probs = softmax(&self.value(*logits).data);
                let gl = self.grad_slot(grads, *logits);
                for (i, (d, p)) in gl.data.iter_mut().zip(probs).enumerate() {
                    let indicator = if i == *target { 1.0 } else { 0.0 };
                    *d += upstream * (p - indicator);
                }
            }
            Op::Sum(a) => {
                let upstream = g.data[0];
                let ga = self.grad_slot(grads, *a);
                for d in ga.data.iter_mut() {
                    *d += upstream;
                }
            }
        }
    }

    fn grad_slot<'g>(&self, grads: &'g mut [Option<Tensor>], var: Var) -> &'g mut Tensor {
        grads[var.0].get_or_insert_with(|| Tensor::zeros(&self.nodes[var.0].value.shape))
    }
}
