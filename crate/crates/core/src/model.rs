//! Problem instances: factor states, product states, low-rank operators and
//! the block layout tying them together.
//!
//! An occupation vector `n` always denotes the normalized state
//! `Π_i (a†_i)^{n_i} / √(n_i!) |vac⟩`. For fermions the creation operators
//! are written in ascending mode index, which fixes every sign downstream.
//! Product states concatenate blocks in order, so global mode indices are
//! block-major and a product of block-local ascending strings is again
//! ascending.

use std::collections::BTreeMap;
use std::ops::Range;

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{BlockSpec, InstanceFile};

/// Largest rank accepted at validation.
pub const MAX_RANK: usize = 6;

pub type Occupation = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Statistics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boson" | "bosonic" => Ok(Statistics::Boson),
            "fermion" | "fermionic" => Ok(Statistics::Fermion),
            other => Err(format!("unknown statistics `{other}` (expected boson|fermion)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("Pauli violation in {field}: fermionic occupation {occupation:?} has an entry > 1")]
    PauliViolation {
        field: String,
        occupation: Vec<i64>,
    },
    #[error("negative occupation in {field}: {occupation:?}")]
    NegativeOccupation {
        field: String,
        occupation: Vec<i64>,
    },
    #[error("non-finite scalar in {field}")]
    NonFinite { field: String },
    #[error("rank {k} exceeds the supported cap {max}")]
    RankCapExceeded { k: usize, max: usize },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("{field} must not be empty")]
    Empty { field: String },
    #[error("duplicate occupation {occupation:?} in {field}")]
    DuplicateOccupation {
        field: String,
        occupation: Vec<u32>,
    },
    #[error("{field}: row {row} has {found} entries, expected {expected}")]
    RaggedMatrix {
        field: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("factors mix bosonic and fermionic statistics")]
    StatisticsMismatch,
    #[error("bra and ket block layouts differ at block {block}")]
    LayoutMismatch { block: usize },
}

/// A finite state on `d` modes: finitely many occupation vectors with nonzero
/// amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorState {
    d: usize,
    statistics: Statistics,
    terms: BTreeMap<Occupation, Complex64>,
}

impl FactorState {
    /// Builds a validated state. Zero amplitudes are dropped; a repeated
    /// occupation vector is an error.
    pub fn new<I>(d: usize, statistics: Statistics, terms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        if d == 0 {
            return Err(ModelError::Empty {
                field: "d".into(),
            });
        }
        let mut map = BTreeMap::new();
        for (occ, amp) in terms {
            let signed: Vec<i64> = occ.iter().map(|&x| x as i64).collect();
            check_occupation("terms", &signed, d, statistics)?;
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(ModelError::NonFinite {
                    field: "terms.amp".into(),
                });
            }
            if map.contains_key(&occ) {
                return Err(ModelError::DuplicateOccupation {
                    field: "terms".into(),
                    occupation: occ,
                });
            }
            if amp != Complex64::new(0.0, 0.0) {
                map.insert(occ, amp);
            }
        }
        Ok(FactorState {
            d,
            statistics,
            terms: map,
        })
    }

    /// Callers guarantee valid occupations and finite amplitudes.
    pub(crate) fn from_map(
        d: usize,
        statistics: Statistics,
        mut terms: BTreeMap<Occupation, Complex64>,
    ) -> Self {
        terms.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        FactorState {
            d,
            statistics,
            terms,
        }
    }

    pub fn vacuum(d: usize, statistics: Statistics) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; d], Complex64::new(1.0, 0.0));
        FactorState {
            d,
            statistics,
            terms,
        }
    }

    /// One particle in a single mode, `a†|vac⟩`.
    pub fn single_particle(statistics: Statistics) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], Complex64::new(1.0, 0.0));
        FactorState {
            d: 1,
            statistics,
            terms,
        }
    }

    pub fn zero(d: usize, statistics: Statistics) -> Self {
        FactorState {
            d,
            statistics,
            terms: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn terms(&self) -> &BTreeMap<Occupation, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, occ: &[u32]) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total occupation among the terms (the inferred particle bound).
    pub fn max_particles(&self) -> u32 {
        self.terms
            .keys()
            .map(|occ| occ.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// `Some(n)` when every term carries exactly `n` particles.
    pub fn particle_number(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|occ| occ.iter().sum::<u32>());
        let first = it.next()?;
        it.all(|n| n == first).then_some(first)
    }

    pub fn norm_sq(&self) -> f64 {
        state_norm_sq(self)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FactorState) -> Complex64 {
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (occ, a) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    /// Splits the state into its even- and odd-particle-number parts.
    pub fn parity_parts(&self) -> (FactorState, FactorState) {
        let mut even = BTreeMap::new();
        let mut odd = BTreeMap::new();
        for (occ, a) in &self.terms {
            if occ.iter().sum::<u32>() % 2 == 0 {
                even.insert(occ.clone(), *a);
            } else {
                odd.insert(occ.clone(), *a);
            }
        }
        (
            FactorState::from_map(self.d, self.statistics, even),
            FactorState::from_map(self.d, self.statistics, odd),
        )
    }

    pub fn scale(&self, c: Complex64) -> FactorState {
        let terms = self
            .terms
            .iter()
            .map(|(occ, a)| (occ.clone(), a * c))
            .collect();
        FactorState::from_map(self.d, self.statistics, terms)
    }
}

/// `Σ |amplitude|²` over the stored terms. The engine never renormalizes.
pub fn state_norm_sq(state: &FactorState) -> f64 {
    state.terms.values().map(|a| a.norm_sqr()).sum()
}

fn check_occupation(
    field: &str,
    occ: &[i64],
    d: usize,
    statistics: Statistics,
) -> Result<(), ModelError> {
    if occ.len() != d {
        return Err(ModelError::DimensionMismatch {
            field: field.to_string(),
            expected: d,
            found: occ.len(),
        });
    }
    if occ.iter().any(|&x| x < 0) {
        return Err(ModelError::NegativeOccupation {
            field: field.to_string(),
            occupation: occ.to_vec(),
        });
    }
    if statistics == Statistics::Fermion && occ.iter().any(|&x| x > 1) {
        return Err(ModelError::PauliViolation {
            field: field.to_string(),
            occupation: occ.to_vec(),
        });
    }
    if occ.iter().any(|&x| x > u32::MAX as i64) {
        return Err(ModelError::NonFinite {
            field: field.to_string(),
        });
    }
    Ok(())
}

/// Ordered product `Ψ_1 ⊗ … ⊗ Ψ_N`; block `μ` owns a contiguous range of
/// global modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<FactorState>,
    statistics: Statistics,
    offsets: Vec<usize>,
}

impl ProductState {
    pub fn new(factors: Vec<FactorState>) -> Result<Self, ModelError> {
        let statistics = factors
            .first()
            .ok_or(ModelError::Empty {
                field: "blocks".into(),
            })?
            .statistics();
        if factors.iter().any(|f| f.statistics() != statistics) {
            return Err(ModelError::StatisticsMismatch);
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for f in &factors {
            acc += f.d();
            offsets.push(acc);
        }
        Ok(ProductState {
            factors,
            statistics,
            offsets,
        })
    }

    pub fn factors(&self) -> &[FactorState] {
        &self.factors
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn n_blocks(&self) -> usize {
        self.factors.len()
    }

    /// Total mode count `M = Σ d_μ`.
    pub fn mode_count(&self) -> usize {
        *self.offsets.last().expect("offsets start with 0")
    }

    /// Total particle bound `D = Σ n_max^{(μ)}`.
    pub fn particle_bound(&self) -> usize {
        self.factors.iter().map(|f| f.max_particles() as usize).sum()
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn same_layout(&self, other: &ProductState) -> Result<(), ModelError> {
        if self.statistics != other.statistics {
            return Err(ModelError::StatisticsMismatch);
        }
        if self.n_blocks() != other.n_blocks() {
            return Err(ModelError::DimensionMismatch {
                field: "ket_blocks".into(),
                expected: self.n_blocks(),
                found: other.n_blocks(),
            });
        }
        for (mu, (a, b)) in self.factors.iter().zip(&other.factors).enumerate() {
            if a.d() != b.d() {
                return Err(ModelError::LayoutMismatch { block: mu });
            }
        }
        Ok(())
    }
}

/// `A = u v` with `u` of shape `M × k` and `v` of shape `k × M`. Only the
/// oracles ever form `A` densely.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankOperator {
    u: Array2<Complex64>,
    v: Array2<Complex64>,
}

impl LowRankOperator {
    pub fn new(u: Array2<Complex64>, v: Array2<Complex64>) -> Result<Self, ModelError> {
        let k = u.ncols();
        if k == 0 {
            return Err(ModelError::ZeroRank);
        }
        if k > MAX_RANK {
            return Err(ModelError::RankCapExceeded { k, max: MAX_RANK });
        }
        if v.nrows() != k {
            return Err(ModelError::DimensionMismatch {
                field: "v rows".into(),
                expected: k,
                found: v.nrows(),
            });
        }
        if v.ncols() != u.nrows() {
            return Err(ModelError::DimensionMismatch {
                field: "v columns".into(),
                expected: u.nrows(),
                found: v.ncols(),
            });
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ModelError::NonFinite { field: "u".into() });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ModelError::NonFinite { field: "v".into() });
        }
        Ok(LowRankOperator { u, v })
    }

    pub fn zero(modes: usize, k: usize) -> Result<Self, ModelError> {
        Self::new(Array2::zeros((modes, k)), Array2::zeros((k, modes)))
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &Array2<Complex64> {
        &self.u
    }

    pub fn v(&self) -> &Array2<Complex64> {
        &self.v
    }

    /// The operator for `A†`, factored as `(v†, u†)`.
    pub fn adjoint(&self) -> LowRankOperator {
        LowRankOperator {
            u: self.v.t().mapv(|z| z.conj()),
            v: self.u.t().mapv(|z| z.conj()),
        }
    }

    /// Dense `A = u v`. Reserved for oracles and tests.
    pub fn dense(&self) -> Array2<Complex64> {
        self.u.dot(&self.v)
    }

    pub fn block_slice(&self, layout: &ProductState) -> Result<BlockSlices, ModelError> {
        if layout.mode_count() != self.modes() {
            return Err(ModelError::DimensionMismatch {
                field: "u rows".into(),
                expected: layout.mode_count(),
                found: self.modes(),
            });
        }
        let slices = (0..layout.n_blocks())
            .map(|mu| {
                let r = layout.block_range(mu);
                BlockSlice {
                    u: self.u.slice(s![r.clone(), ..]).to_owned(),
                    v: self.v.slice(s![.., r]).to_owned(),
                }
            })
            .collect();
        Ok(BlockSlices { slices })
    }
}

/// Rows of `u` and columns of `v` restricted to one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSlice {
    /// `d_μ × k`
    pub u: Array2<Complex64>,
    /// `k × d_μ`
    pub v: Array2<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSlices {
    pub slices: Vec<BlockSlice>,
}

impl BlockSlices {
    /// Concatenates the slices back into `(u, v)`.
    pub fn reassemble(&self) -> (Array2<Complex64>, Array2<Complex64>) {
        let us: Vec<_> = self.slices.iter().map(|s| s.u.view()).collect();
        let vs: Vec<_> = self.slices.iter().map(|s| s.v.view()).collect();
        (
            ndarray::concatenate(ndarray::Axis(0), &us).expect("slices share k"),
            ndarray::concatenate(ndarray::Axis(1), &vs).expect("slices share k"),
        )
    }
}

/// A validated instance. `bra` and `ket` share a layout; they are equal
/// unless the input supplied distinct ket blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub bra: ProductState,
    pub ket: ProductState,
    pub op: LowRankOperator,
}

impl Instance {
    pub fn bra_is_ket(&self) -> bool {
        self.bra == self.ket
    }
}

/// Checks every invariant of a parsed instance file and builds the
/// validated objects.
pub fn validate_instance(raw: &InstanceFile) -> Result<Instance, ModelError> {
    let statistics = raw.statistics;
    if raw.k == 0 {
        return Err(ModelError::ZeroRank);
    }
    if raw.k > MAX_RANK {
        return Err(ModelError::RankCapExceeded {
            k: raw.k,
            max: MAX_RANK,
        });
    }
    let bra = validate_blocks("blocks", &raw.blocks, statistics)?;
    let ket = match &raw.ket_blocks {
        Some(blocks) => {
            let ket = validate_blocks("ket_blocks", blocks, statistics)?;
            bra.same_layout(&ket)?;
            ket
        }
        None => bra.clone(),
    };
    let m = bra.mode_count();
    let u = complex_matrix("u", &raw.u, m, raw.k)?;
    let v = complex_matrix("v", &raw.v, raw.k, m)?;
    let op = LowRankOperator::new(u, v)?;
    Ok(Instance { bra, ket, op })
}

fn validate_blocks(
    field: &str,
    blocks: &[BlockSpec],
    statistics: Statistics,
) -> Result<ProductState, ModelError> {
    if blocks.is_empty() {
        return Err(ModelError::Empty {
            field: field.to_string(),
        });
    }
    let mut factors = Vec::with_capacity(blocks.len());
    for (mu, block) in blocks.iter().enumerate() {
        if block.d == 0 {
            return Err(ModelError::Empty {
                field: format!("{field}[{mu}].d"),
            });
        }
        let mut map = BTreeMap::new();
        for (t, term) in block.terms.iter().enumerate() {
            let tf = format!("{field}[{mu}].terms[{t}]");
            check_occupation(&format!("{tf}.occ"), &term.occ, block.d, statistics)?;
            let amp = Complex64::new(term.amp[0], term.amp[1]);
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(ModelError::NonFinite {
                    field: format!("{tf}.amp"),
                });
            }
            let occ: Occupation = term.occ.iter().map(|&x| x as u32).collect();
            if map.insert(occ.clone(), amp).is_some() {
                return Err(ModelError::DuplicateOccupation {
                    field: format!("{field}[{mu}].terms"),
                    occupation: occ,
                });
            }
        }
        factors.push(FactorState::from_map(block.d, statistics, map));
    }
    ProductState::new(factors)
}

fn complex_matrix(
    field: &str,
    rows: &[Vec<[f64; 2]>],
    nrows: usize,
    ncols: usize,
) -> Result<Array2<Complex64>, ModelError> {
    if rows.len() != nrows {
        return Err(ModelError::DimensionMismatch {
            field: format!("{field} rows"),
            expected: nrows,
            found: rows.len(),
        });
    }
    let mut out = Array2::zeros((nrows, ncols));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(ModelError::RaggedMatrix {
                field: field.to_string(),
                row: i,
                expected: ncols,
                found: row.len(),
            });
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(ModelError::NonFinite {
                    field: format!("{field}[{i}][{j}]"),
                });
            }
            out[(i, j)] = Complex64::new(z[0], z[1]);
        }
    }
    Ok(out)
}
