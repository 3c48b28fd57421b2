//! Scalar reverse-mode differentiation on an append-only tape.
//!
//! Every node produces one scalar. Besides the elementwise operations there
//! are two n-ary nodes, [`Tape::dot`] and [`Tape::affine`], whose operands are
//! contiguous [`Block`]s of earlier nodes; a dense layer is one `affine` node
//! per output unit.
//!
//! ```
//! use torusym_core::autodiff::Tape;
//!
//! let mut tape = Tape::new();
//! let x = tape.leaf(3.0);
//! let y = tape.mul(x, x);
//! let grads = tape.backward(y).unwrap();
//! assert_eq!(grads.wrt(x), 6.0);
//! ```

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg;

static NEXT_SERIAL: AtomicU64 = AtomicU64::new(1);

fn fresh_serial() -> u64 {
    NEXT_SERIAL.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Leaf,
    Const,
    Copy(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    Offset(u32),
    Square(u32),
    Sqrt(u32),
    Sin(u32),
    Cos(u32),
    /// `atan2(y, x)`
    Atan2(u32, u32),
    Relu(u32),
    Softplus(u32),
    Sum {
        start: u32,
        len: u32,
    },
    Dot {
        a: u32,
        b: u32,
        len: u32,
    },
    Affine {
        w: u32,
        x: u32,
        len: u32,
        bias: u32,
    },
}

/// Handle to a tape node together with its primal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Var {
    id: u32,
    serial: u64,
    value: f64,
}

impl Var {
    pub fn id(&self) -> usize {
        self.id as usize
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// A run of consecutive node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    start: u32,
    len: u32,
}

impl Block {
    pub fn start(&self) -> usize {
        self.start as usize
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn from_raw(start: u32, len: u32) -> Block {
        Block { start, len }
    }

    /// Sub-range `[offset, offset + len)` of this block.
    pub fn sub(&self, offset: usize, len: usize) -> Block {
        assert!(offset + len <= self.len as usize, "sub-block out of range");
        Block {
            start: self.start + offset as u32,
            len: len as u32,
        }
    }
}

/// Append-only record of a computation.
#[derive(Debug)]
pub struct Tape {
    serial: u64,
    ops: Vec<Op>,
    vals: Vec<f64>,
    adj: Vec<f64>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            serial: fresh_serial(),
            ops: Vec::new(),
            vals: Vec::new(),
            adj: Vec::new(),
        }
    }

    /// Drops all nodes, keeping allocations. Vars from before the call
    /// become invalid.
    pub fn clear(&mut self) {
        self.serial = fresh_serial();
        self.ops.clear();
        self.vals.clear();
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    #[inline]
    fn push(&mut self, op: Op, value: f64) -> Var {
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.vals.push(value);
        Var {
            id,
            serial: self.serial,
            value,
        }
    }

    #[inline]
    fn check(&self, v: Var) {
        debug_assert_eq!(v.serial, self.serial, "var from another tape");
    }

    /// Node `i` of a block.
    pub fn at(&self, block: Block, i: usize) -> Var {
        assert!(i < block.len(), "block index out of range");
        let id = block.start + i as u32;
        Var {
            id,
            serial: self.serial,
            value: self.vals[id as usize],
        }
    }

    pub fn values(&self, block: Block) -> &[f64] {
        &self.vals[block.start()..block.start() + block.len()]
    }

    pub fn leaf(&mut self, value: f64) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn constant(&mut self, value: f64) -> Var {
        self.push(Op::Const, value)
    }

    pub fn leaves(&mut self, values: &[f64]) -> Block {
        let start = self.ops.len() as u32;
        for &v in values {
            self.push(Op::Leaf, v);
        }
        Block {
            start,
            len: values.len() as u32,
        }
    }

    pub fn constants(&mut self, values: &[f64]) -> Block {
        let start = self.ops.len() as u32;
        for &v in values {
            self.push(Op::Const, v);
        }
        Block {
            start,
            len: values.len() as u32,
        }
    }

    /// Copies arbitrary vars into a fresh contiguous block.
    pub fn gather(&mut self, vars: &[Var]) -> Block {
        let start = self.ops.len() as u32;
        for &v in vars {
            self.check(v);
            self.push(Op::Copy(v.id), v.value);
        }
        Block {
            start,
            len: vars.len() as u32,
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.check(a);
        self.check(b);
        self.push(Op::Add(a.id, b.id), a.value + b.value)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.check(a);
        self.check(b);
        self.push(Op::Sub(a.id, b.id), a.value - b.value)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.check(a);
        self.check(b);
        self.push(Op::Mul(a.id, b.id), a.value * b.value)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check(a);
        self.check(b);
        if b.value == 0.0 {
            return Err(Error::Numeric("division by zero".into()));
        }
        Ok(self.push(Op::Div(a.id, b.id), a.value / b.value))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Neg(a.id), -a.value)
    }

    /// `c · a` for a constant `c`.
    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.check(a);
        self.push(Op::Scale(a.id, c), c * a.value)
    }

    /// `a + c` for a constant `c`.
    pub fn offset(&mut self, a: Var, c: f64) -> Var {
        self.check(a);
        self.push(Op::Offset(a.id), a.value + c)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Square(a.id), a.value * a.value)
    }

    pub fn sqrt(&mut self, a: Var) -> Result<Var> {
        self.check(a);
        if a.value < 0.0 || a.value.is_nan() {
            return Err(Error::Numeric(format!("sqrt of {}", a.value)));
        }
        Ok(self.push(Op::Sqrt(a.id), a.value.sqrt()))
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Sin(a.id), a.value.sin())
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Cos(a.id), a.value.cos())
    }

    /// `atan2(y, x)`; undefined at the origin.
    pub fn atan2(&mut self, y: Var, x: Var) -> Result<Var> {
        self.check(y);
        self.check(x);
        if y.value == 0.0 && x.value == 0.0 {
            return Err(Error::Numeric("atan2(0, 0) is undefined".into()));
        }
        Ok(self.push(Op::Atan2(y.id, x.id), y.value.atan2(x.value)))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Relu(a.id), a.value.max(0.0))
    }

    /// `ln(1 + e^a)`.
    pub fn softplus(&mut self, a: Var) -> Var {
        self.check(a);
        self.push(Op::Softplus(a.id), softplus(a.value))
    }

    pub fn sum(&mut self, block: Block) -> Var {
        let value = self.values(block).iter().sum();
        self.push(
            Op::Sum {
                start: block.start,
                len: block.len,
            },
            value,
        )
    }

    /// Sum of a list of vars, left to right.
    pub fn sum_vars(&mut self, vars: &[Var]) -> Var {
        match vars.split_first() {
            None => self.constant(0.0),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &v| self.add(acc, v)),
        }
    }

    pub fn dot(&mut self, a: Block, b: Block) -> Var {
        assert_eq!(a.len, b.len, "dot operands differ in length");
        let value = linalg::dot(self.values(a), self.values(b));
        self.push(
            Op::Dot {
                a: a.start,
                b: b.start,
                len: a.len,
            },
            value,
        )
    }

    /// `⟨w, x⟩ + bias`.
    pub fn affine(&mut self, w: Block, x: Block, bias: Var) -> Var {
        assert_eq!(w.len, x.len, "affine operands differ in length");
        self.check(bias);
        let value = linalg::dot(self.values(w), self.values(x)) + bias.value;
        self.push(
            Op::Affine {
                w: w.start,
                x: x.start,
                len: w.len,
                bias: bias.id,
            },
            value,
        )
    }

    /// Reverse sweep from a scalar `loss`, returning adjoints of every node.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients<'_>> {
        if loss.serial != self.serial || loss.id as usize >= self.ops.len() {
            return Err(Error::State(
                "backward called on a var that is not on the current tape".into(),
            ));
        }
        let n = loss.id as usize + 1;
        self.adj.clear();
        self.adj.resize(self.ops.len(), 0.0);
        self.adj[loss.id as usize] = 1.0;
        let vals = &self.vals;
        let adj = &mut self.adj;
        for i in (0..n).rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Leaf | Op::Const => {}
                Op::Copy(a) | Op::Offset(a) => adj[a as usize] += g,
                Op::Add(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (vals[a as usize], vals[b as usize]);
                    adj[a as usize] += g * vb;
                    adj[b as usize] += g * va;
                }
                Op::Div(a, b) => {
                    let vb = vals[b as usize];
                    adj[a as usize] += g / vb;
                    adj[b as usize] -= g * vals[i] / vb;
                }
                Op::Neg(a) => adj[a as usize] -= g,
                Op::Scale(a, c) => adj[a as usize] += g * c,
                Op::Square(a) => adj[a as usize] += 2.0 * g * vals[a as usize],
                Op::Sqrt(a) => adj[a as usize] += 0.5 * g / vals[i],
                Op::Sin(a) => adj[a as usize] += g * vals[a as usize].cos(),
                Op::Cos(a) => adj[a as usize] -= g * vals[a as usize].sin(),
                Op::Atan2(y, x) => {
                    let (vy, vx) = (vals[y as usize], vals[x as usize]);
                    let denom = vx * vx + vy * vy;
                    adj[y as usize] += g * vx / denom;
                    adj[x as usize] -= g * vy / denom;
                }
                Op::Relu(a) => {
                    if vals[a as usize] > 0.0 {
                        adj[a as usize] += g;
                    }
                }
                Op::Softplus(a) => adj[a as usize] += g * sigmoid(vals[a as usize]),
                Op::Sum { start, len } => {
                    for v in &mut adj[start as usize..(start + len) as usize] {
                        *v += g;
                    }
                }
                Op::Dot { a, b, len } => dot_backward(vals, adj, a, b, len, g),
                Op::Affine { w, x, len, bias } => {
                    dot_backward(vals, adj, w, x, len, g);
                    adj[bias as usize] += g;
                }
            }
        }
        Ok(Gradients { adj: &self.adj })
    }
}

fn dot_backward(vals: &[f64], adj: &mut [f64], a: u32, b: u32, len: u32, g: f64) {
    let (a, b, len) = (a as usize, b as usize, len as usize);
    if a + len <= b || b + len <= a {
        // Disjoint ranges: split so both updates vectorize.
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (left, right) = adj.split_at_mut(hi);
        let adj_lo = &mut left[lo..lo + len];
        let adj_hi = &mut right[..len];
        let (v_lo, v_hi) = (&vals[lo..lo + len], &vals[hi..hi + len]);
        linalg::axpy(g, v_hi, adj_lo);
        linalg::axpy(g, v_lo, adj_hi);
    } else {
        for j in 0..len {
            let (va, vb) = (vals[a + j], vals[b + j]);
            adj[a + j] += g * vb;
            adj[b + j] += g * va;
        }
    }
}

/// Numerically stable `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Adjoints from one backward sweep.
#[derive(Debug)]
pub struct Gradients<'a> {
    adj: &'a [f64],
}

impl Gradients<'_> {
    pub fn wrt(&self, v: Var) -> f64 {
        self.adj[v.id as usize]
    }

    pub fn block(&self, b: Block) -> &[f64] {
        &self.adj[b.start()..b.start() + b.len()]
    }
}
