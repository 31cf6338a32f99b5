//! Scalar reverse-mode differentiation.
//!
//! A [`Tape`] is an append-only list of nodes. Each node stores its value,
//! an operation tag and the local partial derivatives with respect to at
//! most two parents; parents always precede children, so a single reverse
//! sweep over the list accumulates adjoints. One tape per evaluation; there
//! is no global state.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    AddConst,
    SubConst,
    MulConst,
    DivConst,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Sigmoid,
    Max,
    Min,
    Clamp,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    op: Op,
    value: f64,
    arity: u8,
    parents: [usize; 2],
    partials: [f64; 2],
}

#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("len", &self.len()).finish()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records an independent variable.
    pub fn input(&self, value: f64) -> Var<'_> {
        self.push(Op::Input, value, &[])
    }

    pub fn inputs(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.input(v)).collect()
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(Op::Const, value, &[])
    }

    /// Operation tag of node `index`.
    pub fn op(&self, index: usize) -> Op {
        self.nodes.borrow()[index].op
    }

    /// Forward value of node `index`.
    pub fn value(&self, index: usize) -> f64 {
        self.nodes.borrow()[index].value
    }

    fn push(&self, op: Op, value: f64, parents: &[(usize, f64)]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.len();
        let mut node = Node {
            op,
            value,
            arity: parents.len() as u8,
            parents: [0; 2],
            partials: [0.0; 2],
        };
        for (slot, &(p, d)) in parents.iter().enumerate() {
            debug_assert!(p < index);
            node.parents[slot] = p;
            node.partials[slot] = d;
        }
        nodes.push(node);
        Var {
            tape: self,
            index,
            value,
        }
    }

    /// Reverse sweep from `output`; returns the adjoint of every node.
    pub fn backward(&self, output: Var<'_>) -> Adjoints {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        adj[output.index] = 1.0;
        for i in (0..=output.index).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            for slot in 0..node.arity as usize {
                adj[node.parents[slot]] += a * node.partials[slot];
            }
        }
        Adjoints(adj)
    }
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Adjoints(Vec<f64>);

impl Adjoints {
    pub fn wrt(&self, var: Var<'_>) -> f64 {
        self.0.get(var.index).copied().unwrap_or(0.0)
    }

    pub fn gradient(&self, vars: &[Var<'_>]) -> Gradient {
        Gradient(vars.iter().map(|&v| self.wrt(v)).collect())
    }
}

/// Derivatives of a scalar with respect to a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient(pub Vec<f64>);

impl Gradient {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }
}

/// A value recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: usize,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var#{}({})", self.index, self.value)
    }
}

impl<'t> Var<'t> {
    pub fn index(self) -> usize {
        self.index
    }

    fn unary(self, op: Op, value: f64, d: f64) -> Self {
        self.tape.push(op, value, &[(self.index, d)])
    }

    fn binary(self, other: Self, op: Op, value: f64, da: f64, db: f64) -> Self {
        debug_assert!(std::ptr::eq(self.tape, other.tape), "vars from different tapes");
        self.tape
            .push(op, value, &[(self.index, da), (other.index, db)])
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, Op::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, Op::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.unary(Op::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, c: f64) -> Self {
        self.unary(Op::AddConst, self.value + c, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, c: f64) -> Self {
        self.unary(Op::SubConst, self.value - c, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, c: f64) -> Self {
        self.unary(Op::MulConst, self.value * c, c)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, c: f64) -> Self {
        self.unary(Op::DivConst, self.value / c, 1.0 / c)
    }
}

impl Scalar for Var<'_> {
    fn value(self) -> f64 {
        self.value
    }

    fn constant_like(self, c: f64) -> Self {
        self.tape.constant(c)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.unary(Op::Exp, e, e)
    }

    fn ln(self) -> Self {
        self.unary(Op::Ln, self.value.ln(), 1.0 / self.value)
    }

    fn sin(self) -> Self {
        self.unary(Op::Sin, self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.unary(Op::Cos, self.value.cos(), -self.value.sin())
    }

    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.unary(Op::Sqrt, s, 0.5 / s)
    }

    fn abs(self) -> Self {
        let d = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.unary(Op::Abs, self.value.abs(), d)
    }

    fn sigmoid(self) -> Self {
        let s = scalar::sigmoid(self.value);
        self.unary(Op::Sigmoid, s, s * (1.0 - s))
    }

    fn max(self, other: Self) -> Self {
        if self.value >= other.value {
            self.binary(other, Op::Max, self.value, 1.0, 0.0)
        } else {
            self.binary(other, Op::Max, other.value, 0.0, 1.0)
        }
    }

    fn min(self, other: Self) -> Self {
        if self.value <= other.value {
            self.binary(other, Op::Min, self.value, 1.0, 0.0)
        } else {
            self.binary(other, Op::Min, other.value, 0.0, 1.0)
        }
    }

    fn clamp_abs(self, bound: f64) -> Self {
        let v = self.value.clamp(-bound, bound);
        let d = if self.value.abs() > bound { 0.0 } else { 1.0 };
        self.unary(Op::Clamp, v, d)
    }
}

/// Central differences `(f(x + εe_j) − f(x − εe_j)) / 2ε` for every coordinate.
pub fn finite_difference<F>(mut f: F, x: &[f64], eps: f64) -> crate::Result<Gradient>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(crate::Error::InvalidConfig(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + eps;
        let plus = f(&probe);
        probe[j] = x[j] - eps;
        let minus = f(&probe);
        probe[j] = x[j];
        if !(plus.is_finite() && minus.is_finite()) {
            return Err(crate::Error::NonFinite(format!(
                "function value at coordinate {j}"
            )));
        }
        out.push((plus - minus) / (2.0 * eps));
    }
    Ok(Gradient(out))
}
