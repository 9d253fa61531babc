//! Truncated Fock spaces and the multiplicative extension applied straight
//! from its definition: every creation operator `a†_j` in a basis state's
//! creation string is replaced by `Σ_i U_{ij} a†_i`.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::model::{Occupation, ProductState, Statistics};
use crate::oracle::OracleError;

/// All occupation vectors on `modes` modes with at most `particle_cap`
/// particles, ordered by total particle number and then lexicographically.
#[derive(Clone, Debug)]
pub struct FockBasis {
    statistics: Statistics,
    modes: usize,
    particle_cap: u32,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl FockBasis {
    pub fn new(statistics: Statistics, modes: usize, particle_cap: u32) -> Self {
        let mut states = Vec::new();
        for p in 0..=particle_cap {
            let mut cur = vec![0u32; modes];
            fill(&mut cur, 0, p, statistics, &mut states);
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        FockBasis {
            statistics,
            modes,
            particle_cap,
            states,
            index,
        }
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particle_cap(&self) -> u32 {
        self.particle_cap
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// `a†_mode` (or `a_mode`) on basis state `i`: target index and factor.
    fn ladder(&self, i: usize, mode: usize, raise: bool) -> Option<(usize, f64)> {
        let occ = &self.states[i];
        let n = occ[mode];
        let mut next = occ.clone();
        let factor = match self.statistics {
            Statistics::Boson => {
                if raise {
                    next[mode] += 1;
                    ((n + 1) as f64).sqrt()
                } else {
                    if n == 0 {
                        return None;
                    }
                    next[mode] -= 1;
                    (n as f64).sqrt()
                }
            }
            Statistics::Fermion => {
                if (raise && n == 1) || (!raise && n == 0) {
                    return None;
                }
                next[mode] = if raise { 1 } else { 0 };
                let before: u32 = occ[..mode].iter().sum();
                if before.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        self.index_of(&next).map(|j| (j, factor))
    }

    pub fn create(&self, v: &[Complex64], mode: usize) -> Vec<Complex64> {
        self.apply_ladder(v, mode, true)
    }

    pub fn annihilate(&self, v: &[Complex64], mode: usize) -> Vec<Complex64> {
        self.apply_ladder(v, mode, false)
    }

    fn apply_ladder(&self, v: &[Complex64], mode: usize, raise: bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (i, a) in v.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if let Some((j, f)) = self.ladder(i, mode, raise) {
                out[j] += a * f;
            }
        }
        out
    }

    /// Sparse matrix of `a_mode`: `(column, row, factor)` triples.
    pub(crate) fn annihilator_entries(&self, mode: usize) -> Vec<(usize, usize, f64)> {
        (0..self.len())
            .filter_map(|i| self.ladder(i, mode, false).map(|(j, f)| (i, j, f)))
            .collect()
    }

    pub(crate) fn creator_entries(&self, mode: usize) -> Vec<(usize, usize, f64)> {
        (0..self.len())
            .filter_map(|i| self.ladder(i, mode, true).map(|(j, f)| (i, j, f)))
            .collect()
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, rem: u32, statistics: Statistics, out: &mut Vec<Occupation>) {
    if pos == cur.len() {
        if rem == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let top = match statistics {
        Statistics::Boson => rem,
        Statistics::Fermion => rem.min(1),
    };
    // Lexicographic order within a particle-number sector.
    for v in 0..=top {
        cur[pos] = v;
        fill(cur, pos + 1, rem - v, statistics, out);
    }
    cur[pos] = 0;
}

/// Dense amplitudes over a [`FockBasis`].
#[derive(Clone, Debug)]
pub struct FockVector<'a> {
    basis: &'a FockBasis,
    amps: Vec<Complex64>,
}

impl<'a> FockVector<'a> {
    pub fn zeros(basis: &'a FockBasis) -> Self {
        FockVector {
            basis,
            amps: vec![Complex64::new(0.0, 0.0); basis.len()],
        }
    }

    pub fn basis_state(basis: &'a FockBasis, i: usize) -> Self {
        let mut v = Self::zeros(basis);
        v.amps[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn basis(&self) -> &'a FockBasis {
        self.basis
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector<'_>) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Embeds a product state, concatenating block occupations. The global
    /// creation string is the block strings in block order, which is
    /// ascending in global mode index, so no reordering sign arises.
    pub fn from_product(basis: &'a FockBasis, state: &ProductState) -> Result<Self, OracleError> {
        if state.mode_count() != basis.modes() || state.statistics() != basis.statistics() {
            return Err(OracleError::BasisMismatch);
        }
        let mut partial: Vec<(Occupation, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
        for f in state.factors() {
            let mut next = Vec::with_capacity(partial.len() * f.terms().len());
            for (occ, amp) in &partial {
                for (bocc, bamp) in f.terms() {
                    let mut o = occ.clone();
                    o.extend_from_slice(bocc);
                    next.push((o, amp * bamp));
                }
            }
            partial = next;
        }
        let mut v = Self::zeros(basis);
        for (occ, amp) in partial {
            let i = basis
                .index_of(&occ)
                .ok_or(OracleError::ParticleCapExceeded {
                    particles: occ.iter().sum(),
                    cap: basis.particle_cap(),
                })?;
            v.amps[i] += amp;
        }
        Ok(v)
    }
}

/// `P(U) ψ` on a truncated basis. `U` is `M × M`.
pub fn apply_multiplicative_extension<'a>(
    u: &Array2<Complex64>,
    psi: &FockVector<'a>,
) -> Result<FockVector<'a>, OracleError> {
    let basis = psi.basis();
    let m = basis.modes();
    if u.nrows() != m || u.ncols() != m {
        return Err(OracleError::DimensionMismatch {
            expected: m,
            found: u.nrows().max(u.ncols()),
        });
    }
    if basis.particle_cap() > super::MAX_PARTICLES {
        return Err(OracleError::ParticleCapExceeded {
            particles: basis.particle_cap(),
            cap: super::MAX_PARTICLES,
        });
    }
    let vacuum = basis.index_of(&vec![0; m]).expect("vacuum is in every basis");
    let mut out = FockVector::zeros(basis);
    for (i, amp) in psi.amps().iter().enumerate() {
        if *amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let occ = basis.state(i);
        let mut string = Vec::new();
        let mut norm = 1.0;
        for (mode, &n) in occ.iter().enumerate() {
            for r in 1..=n {
                string.push(mode);
                norm *= r as f64;
            }
        }
        let mut cur = FockVector::basis_state(basis, vacuum).amps;
        for &j in string.iter().rev() {
            let mut next = vec![Complex64::new(0.0, 0.0); basis.len()];
            for i2 in 0..m {
                let c = u[(i2, j)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (slot, x) in next.iter_mut().zip(basis.create(&cur, i2)) {
                    *slot += c * x;
                }
            }
            cur = next;
        }
        let scale = amp / norm.sqrt();
        for (slot, x) in out.amps.iter_mut().zip(cur) {
            *slot += scale * x;
        }
    }
    Ok(out)
}

/// The matrix of `P(U)` on `basis`, built column by column.
pub fn multiplicative_extension_matrix(
    u: &Array2<Complex64>,
    basis: &FockBasis,
) -> Result<Array2<Complex64>, OracleError> {
    let b = basis.len();
    let mut out = Array2::zeros((b, b));
    for col in 0..b {
        let img = apply_multiplicative_extension(u, &FockVector::basis_state(basis, col))?;
        for (row, a) in img.amps().iter().enumerate() {
            out[(row, col)] = *a;
        }
    }
    Ok(out)
}
