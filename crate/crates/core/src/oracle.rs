//! Range-restricted entangling oracles
//! `O_[lo,hi] |x⟩|a⟩ = |x⟩|a ⊕ f(x)⟩` with `f(x) = φ(x)` inside the range
//! and `0` outside it.
//!
//! Oracles act as amplitude permutations on the state vector; a matrix is
//! only built on request for small registers.

use crate::error::{Error, Result};
use crate::formula::{Formula, DEFAULT_EXHAUSTIVE_CAP};
use crate::linalg::{c64, CMatrix, MAX_DENSE_DIM};
use crate::qsim::{PureState, RegisterLayout};

#[derive(Debug, Clone, Copy)]
pub struct RangeOracle<'f> {
    formula: &'f Formula,
    lo: u64,
    hi: u64,
    layout: RegisterLayout,
}

impl<'f> RangeOracle<'f> {
    pub fn new(formula: &'f Formula, lo: u64, hi: u64, layout: RegisterLayout) -> Result<Self> {
        if layout.query_qubits() != formula.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} query qubits", formula.num_vars()),
                actual: layout.query_qubits().to_string(),
            });
        }
        if lo > hi || hi >= formula.space_size() {
            return Err(Error::InvalidRange { lo, hi, num_vars: formula.num_vars() });
        }
        Ok(Self { formula, lo, hi, layout })
    }

    /// The unrestricted oracle over `[0, 2^n - 1]`.
    pub fn full(formula: &'f Formula, layout: RegisterLayout) -> Result<Self> {
        Self::new(formula, 0, formula.space_size() - 1, layout)
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn formula(&self) -> &'f Formula {
        self.formula
    }

    /// `f_[lo,hi](x)`.
    pub fn marks(&self, x: u64) -> bool {
        (self.lo..=self.hi).contains(&x) && self.formula.eval_index(x)
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let mut out = state.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    /// Flips the last answer qubit on every marked query value. One pass
    /// over the marked block of amplitudes.
    pub fn apply_in_place(&self, state: &mut PureState) -> Result<()> {
        if state.layout() != self.layout {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.layout),
                actual: format!("{:?}", state.layout()),
            });
        }
        let layout = self.layout;
        let answer_dim = layout.answer_dim() as u64;
        let amps = state.amplitudes_mut();
        self.formula.for_each_solution_in(self.lo, self.hi, |x| {
            for a in (0..answer_dim).step_by(2) {
                amps.swap_rows(layout.index(x, a), layout.index(x, a | 1));
            }
        })
    }

    /// Image of every basis index under the oracle.
    pub fn permutation(&self) -> Vec<usize> {
        let layout = self.layout;
        let mut perm: Vec<usize> = (0..layout.dim()).collect();
        self.formula
            .for_each_solution_in(self.lo, self.hi, |x| {
                for a in 0..layout.answer_dim() as u64 {
                    perm[layout.index(x, a)] = layout.index(x, a ^ 1);
                }
            })
            .expect("range validated at construction");
        perm
    }

    /// The oracle as a dense `D × D` permutation matrix (column `j` holds
    /// the image of `|j⟩`).
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let dim = self.layout.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::CapExceeded {
                what: "dense matrix dimension",
                value: dim as u64,
                cap: MAX_DENSE_DIM as u64,
            });
        }
        let perm = self.permutation();
        let mut m = CMatrix::zeros(dim, dim);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = c64(1.0, 0.0);
        }
        Ok(m)
    }

    /// Whether the induced basis map is a permutation equal to its own
    /// inverse, hence a unitary involution.
    pub fn unitary_check(&self) -> Result<bool> {
        let n = self.formula.num_vars();
        if n > DEFAULT_EXHAUSTIVE_CAP {
            return Err(Error::CapExceeded { what: "variables", value: n as u64, cap: DEFAULT_EXHAUSTIVE_CAP as u64 });
        }
        Ok(is_self_inverse_permutation(&self.permutation()))
    }
}

/// True iff `perm` is a bijection on `0..len` with `perm[perm[i]] == i`.
pub fn is_self_inverse_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    perm.iter().enumerate().all(|(i, &p)| perm[p] == i)
}

/// `O_[lo,hi]` applied to the uniform superposition over the query register.
pub fn post_oracle_state(formula: &Formula, lo: u64, hi: u64, layout: RegisterLayout) -> Result<PureState> {
    let oracle = RangeOracle::new(formula, lo, hi, layout)?;
    let mut state = PureState::uniform_superposition(layout);
    oracle.apply_in_place(&mut state)?;
    Ok(state)
}
