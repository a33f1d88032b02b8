//! Boolean formulas over `x1 … xn`, their evaluation, and exhaustive
//! solution counting.
//!
//! Basis ordering: `x1` is the most significant bit of an assignment index,
//! so index `0b110` with `n = 3` means `x1 = 1, x2 = 1, x3 = 0`. Tree paths
//! are numbered from 1, left to right, with the 0-branch on the left, which
//! makes path `p` the assignment with index `p - 1`.

mod gen;
mod parse;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gen::{contradiction, planted, random_cnf, tautology};
pub use parse::{parse_dimacs, parse_expr, ParseError};

/// Variables are packed into a `u64` assignment index.
pub const MAX_VARIABLES: usize = 63;

/// Default bound on `n` for routines that walk all `2^n` assignments.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// 1-based variable index.
    Var(u32),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(i: u32) -> Self {
        Expr::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Expr, b: Expr) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    /// Number of connective nodes (NOT included).
    pub fn connectives(&self) -> usize {
        match self {
            Expr::Var(_) => 0,
            Expr::Not(e) => 1 + e.connectives(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                1 + a.connectives() + b.connectives()
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Expr::Var(_) => 1,
            Expr::Not(e) => e.leaves(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => a.leaves() + b.leaves(),
        }
    }

    pub fn max_var(&self) -> u32 {
        match self {
            Expr::Var(i) => *i,
            Expr::Not(e) => e.max_var(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn min_var(&self) -> u32 {
        match self {
            Expr::Var(i) => *i,
            Expr::Not(e) => e.min_var(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => a.min_var().min(b.min_var()),
        }
    }

    fn eval_with(&self, value_of: &impl Fn(u32) -> bool) -> bool {
        match self {
            Expr::Var(i) => value_of(*i),
            Expr::Not(e) => !e.eval_with(value_of),
            Expr::And(a, b) => a.eval_with(value_of) && b.eval_with(value_of),
            Expr::Or(a, b) => a.eval_with(value_of) || b.eval_with(value_of),
            Expr::Implies(a, b) => !a.eval_with(value_of) || b.eval_with(value_of),
            Expr::Iff(a, b) => a.eval_with(value_of) == b.eval_with(value_of),
        }
    }

    fn compile(&self, num_vars: usize, out: &mut Vec<Op>) {
        match self {
            Expr::Var(i) => out.push(Op::Load((num_vars - *i as usize) as u32)),
            Expr::Not(e) => {
                e.compile(num_vars, out);
                out.push(Op::Not);
            }
            Expr::And(a, b) => Self::compile_binary(a, b, Op::And, num_vars, out),
            Expr::Or(a, b) => Self::compile_binary(a, b, Op::Or, num_vars, out),
            Expr::Implies(a, b) => Self::compile_binary(a, b, Op::Implies, num_vars, out),
            Expr::Iff(a, b) => Self::compile_binary(a, b, Op::Iff, num_vars, out),
        }
    }

    fn compile_binary(a: &Expr, b: &Expr, op: Op, num_vars: usize, out: &mut Vec<Op>) {
        a.compile(num_vars, out);
        b.compile(num_vars, out);
        out.push(op);
    }
}

/// Fully parenthesized infix, accepted back by [`parse_expr`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Not(e) => write!(f, "!{e}"),
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
            Expr::Implies(a, b) => write!(f, "({a} -> {b})"),
            Expr::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// Postfix instruction for bit-sliced evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    /// Push the variable stored at this bit position of the index.
    Load(u32),
    Not,
    And,
    Or,
    Implies,
    Iff,
}

/// Bit `j` of `LANE_PATTERN[p]` is bit `p` of `j`, for the low six index bits.
const LANE_PATTERN: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Debug, Clone)]
pub struct Formula {
    num_vars: usize,
    root: Expr,
    source: Option<String>,
    program: Vec<Op>,
    stack_depth: usize,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.root == other.root
    }
}

impl Formula {
    /// Builds a formula over `num_vars` variables; every leaf must lie in
    /// `1..=num_vars`.
    pub fn new(num_vars: usize, root: Expr) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidArgument("a formula needs at least one variable".into()));
        }
        if num_vars > MAX_VARIABLES {
            return Err(Error::CapExceeded { what: "variables", value: num_vars as u64, cap: MAX_VARIABLES as u64 });
        }
        if root.min_var() == 0 || root.max_var() as usize > num_vars {
            return Err(Error::InvalidArgument(format!("variable indices must lie in [1, {num_vars}]")));
        }
        let mut program = Vec::with_capacity(root.leaves() + root.connectives());
        root.compile(num_vars, &mut program);
        let stack_depth = max_stack_depth(&program);
        Ok(Self { num_vars, root, source: None, program, stack_depth })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// `m`, the number of connective nodes in the tree.
    pub fn connectives(&self) -> usize {
        self.root.connectives()
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// `2^n`.
    pub fn space_size(&self) -> u64 {
        1u64 << self.num_vars
    }

    /// Instructions executed by one evaluation: one per leaf plus one per
    /// connective.
    pub fn evaluation_cost(&self) -> usize {
        self.program.len()
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        if assignment.len() != self.num_vars {
            return Err(Error::AssignmentLength { expected: self.num_vars, actual: assignment.len() });
        }
        Ok(self.root.eval_with(&|i| assignment.bits[i as usize - 1]))
    }

    /// `φ(index)` under the canonical ordering. `index` must be below `2^n`.
    pub fn eval_index(&self, index: u64) -> bool {
        debug_assert!(index < self.space_size());
        let n = self.num_vars;
        self.root.eval_with(&|i| (index >> (n - i as usize)) & 1 == 1)
    }

    /// Evaluates the 64 consecutive indices starting at `base` (a multiple
    /// of 64) in one pass; bit `j` of the result is `φ(base + j)`. Indices
    /// past `2^n` come back as garbage and must be masked by the caller.
    fn eval_block(&self, base: u64, stack: &mut Vec<u64>) -> u64 {
        debug_assert_eq!(base % 64, 0);
        stack.clear();
        for op in &self.program {
            match *op {
                Op::Load(bit) => stack.push(if bit < 6 {
                    LANE_PATTERN[bit as usize]
                } else if (base >> bit) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }),
                Op::Not => {
                    let a = stack.pop().expect("well-formed program");
                    stack.push(!a);
                }
                binary => {
                    let b = stack.pop().expect("well-formed program");
                    let a = stack.pop().expect("well-formed program");
                    stack.push(match binary {
                        Op::And => a & b,
                        Op::Or => a | b,
                        Op::Implies => !a | b,
                        Op::Iff => !(a ^ b),
                        Op::Load(_) | Op::Not => unreachable!(),
                    });
                }
            }
        }
        stack.pop().expect("well-formed program")
    }

    fn check_range(&self, lo: u64, hi: u64) -> Result<()> {
        if lo > hi || hi >= self.space_size() {
            return Err(Error::InvalidRange { lo, hi, num_vars: self.num_vars });
        }
        Ok(())
    }

    /// Number of satisfying assignments in `[lo, hi]` by exhaustive
    /// evaluation.
    pub fn count_solutions(&self, lo: u64, hi: u64) -> Result<RangeStats> {
        self.check_range(lo, hi)?;
        const CHUNK: u64 = 1 << 16;
        let first_block = lo / 64;
        let last_block = hi / 64;
        let count_blocks = |from: u64, to: u64| -> u64 {
            let mut stack = Vec::with_capacity(self.stack_depth);
            let mut total = 0u64;
            for block in from..=to {
                let base = block * 64;
                let mut mask = u64::MAX;
                if base < lo {
                    mask &= u64::MAX << (lo - base);
                }
                if base + 63 > hi {
                    mask &= u64::MAX >> (base + 63 - hi);
                }
                total += (self.eval_block(base, &mut stack) & mask).count_ones() as u64;
            }
            total
        };
        let blocks = last_block - first_block + 1;
        let solutions = if blocks * 64 <= CHUNK {
            count_blocks(first_block, last_block)
        } else {
            let per_chunk = CHUNK / 64;
            let chunks = blocks.div_ceil(per_chunk);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let from = first_block + c * per_chunk;
                    let to = (from + per_chunk - 1).min(last_block);
                    count_blocks(from, to)
                })
                .sum()
        };
        Ok(RangeStats { lo, hi, solutions })
    }

    /// Calls `visit` on every satisfying index in `[lo, hi]`, ascending.
    pub(crate) fn for_each_solution_in(&self, lo: u64, hi: u64, mut visit: impl FnMut(u64)) -> Result<()> {
        self.check_range(lo, hi)?;
        let mut stack = Vec::with_capacity(self.stack_depth);
        for block in lo / 64..=hi / 64 {
            let base = block * 64;
            let mut bits = self.eval_block(base, &mut stack);
            if base < lo {
                bits &= u64::MAX << (lo - base);
            }
            if base + 63 > hi {
                bits &= u64::MAX >> (base + 63 - hi);
            }
            while bits != 0 {
                visit(base + bits.trailing_zeros() as u64);
                bits &= bits - 1;
            }
        }
        Ok(())
    }

    /// Sorted 1-based satisfying path numbers. Refuses `n` above
    /// [`DEFAULT_EXHAUSTIVE_CAP`].
    pub fn enumerate_paths(&self) -> Result<Vec<u64>> {
        self.enumerate_paths_capped(DEFAULT_EXHAUSTIVE_CAP)
    }

    pub fn enumerate_paths_capped(&self, cap: usize) -> Result<Vec<u64>> {
        Ok(self.solution_indices_capped(cap)?.into_iter().map(|i| i + 1).collect())
    }

    /// Sorted 0-based satisfying assignment indices.
    pub fn solution_indices_capped(&self, cap: usize) -> Result<Vec<u64>> {
        if self.num_vars > cap {
            return Err(Error::CapExceeded { what: "variables", value: self.num_vars as u64, cap: cap as u64 });
        }
        let size = self.space_size();
        let mut stack = Vec::with_capacity(self.stack_depth);
        let mut out = Vec::new();
        for block in 0..size.div_ceil(64) {
            let base = block * 64;
            let mut bits = self.eval_block(base, &mut stack);
            if size - base < 64 {
                bits &= (1u64 << (size - base)) - 1;
            }
            while bits != 0 {
                let j = bits.trailing_zeros() as u64;
                out.push(base + j);
                bits &= bits - 1;
            }
        }
        Ok(out)
    }
}

fn max_stack_depth(program: &[Op]) -> usize {
    let mut depth = 0usize;
    let mut max = 0usize;
    for op in program {
        match op {
            Op::Load(_) => depth += 1,
            Op::Not => {}
            _ => depth -= 1,
        }
        max = max.max(depth);
    }
    max
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// A point of `{0,1}^n`, `bits[0]` being `x1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_VARIABLES {
            return Err(Error::InvalidArgument(format!(
                "assignments need 1..={MAX_VARIABLES} bits, got {}",
                bits.len()
            )));
        }
        Ok(Self { bits })
    }

    pub fn from_index(num_vars: usize, index: u64) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_VARIABLES || index >> num_vars != 0 {
            return Err(Error::InvalidArgument(format!("index {index} does not fit in {num_vars} bits")));
        }
        let bits = (0..num_vars).map(|k| (index >> (num_vars - 1 - k)) & 1 == 1).collect();
        Ok(Self { bits })
    }

    /// Parses a bit string such as `"110"` (`x1` first).
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(bits)
    }

    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Assignment::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Solution count `k` over an inclusive index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeStats {
    pub lo: u64,
    pub hi: u64,
    pub solutions: u64,
}

impl RangeStats {
    pub fn width(&self) -> u64 {
        self.hi - self.lo + 1
    }
}
