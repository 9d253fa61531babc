//! Per-block auxiliary polynomials.
//!
//! For block `μ` with bra factor `Φ_μ`, ket factor `Ψ_μ` and slices
//! `u_μ` (`d × k`), `v_μ` (`k × d`), write `X_α = Σ_i u_{iα} a†_i` and
//! `Y_α = Σ_j v_{αj} a_j`. The factor is
//!
//! ```text
//! f_μ = ⟨Φ_μ| exp(Σ_α X_α z_α) exp(Σ_α z*_α Y_α) |Ψ_μ⟩
//! ```
//!
//! and the matrix element of `P(1+uv)` between the product states is the
//! Gaussian average of `Π_μ f_μ`.
//!
//! Bosonic coefficients are `⟨Φ| Π X_α^{m_α}/m_α! Π Y_α^{n_α}/n_α! |Ψ⟩`,
//! evaluated as the inner product of two lowered states: the ket lowered by
//! the `Y` string and the bra lowered by the adjoint `X†` string.
//!
//! Fermionic coefficients come from the same inner products for subsets
//! `S` (the `z` generators) and `T` (the `z*` generators). Grassmann
//! generators anticommute with the fermionic ladder operators; pulling them
//! to the left of the bra, then sorting them into the interleaved
//! generator order, gives the sign
//!
//! ```text
//! (-1)^{s(s+1)/2 + t(t-1)/2 + st + b(s+t) + #{α∈S, β∈T : α > β}}
//! ```
//!
//! where `b` is the particle-number parity of the bra component. A bra
//! with components of both parities therefore yields two elements: the
//! plain factor (`b` summed out) and a twisted one (odd-bra part negated),
//! which the engine needs to move odd Grassmann content past earlier
//! blocks.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;

use crate::grassmann::{z_bit, zbar_bit, GrassmannElement};
use crate::model::{BlockSlice, FactorState, Occupation, Statistics};
use crate::poly::{Bidegree, BidegreePoly, MonomialIndex};
use crate::OpCounter;

#[derive(Clone, Debug)]
pub enum FactorBody {
    Boson(BidegreePoly),
    Fermion(FermionFactor),
}

#[derive(Clone, Debug)]
pub struct FermionFactor {
    /// The factor itself.
    pub value: GrassmannElement,
    /// The factor with the odd-parity part of the bra negated; `None` when
    /// the bra has no odd component (then it equals `value`).
    pub twisted: Option<GrassmannElement>,
}

#[derive(Clone, Debug)]
pub struct FactorPolynomial {
    /// Largest particle number on either side; bounds each degree group.
    pub degree_bound: u32,
    pub body: FactorBody,
}

impl FactorPolynomial {
    pub fn as_boson(&self) -> Option<&BidegreePoly> {
        match &self.body {
            FactorBody::Boson(p) => Some(p),
            FactorBody::Fermion(_) => None,
        }
    }

    pub fn as_fermion(&self) -> Option<&FermionFactor> {
        match &self.body {
            FactorBody::Fermion(f) => Some(f),
            FactorBody::Boson(_) => None,
        }
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `a_j` (or `a†_j` when `raise`) on an occupation vector in the normalized
/// basis. Returns the new occupation and the amplitude factor, or `None`
/// when the result vanishes.
fn ladder(occ: &[u32], j: usize, raise: bool, statistics: Statistics) -> Option<(Occupation, f64)> {
    let nj = occ[j];
    let mut out = occ.to_vec();
    match statistics {
        Statistics::Boson => {
            if raise {
                out[j] += 1;
                Some((out, ((nj + 1) as f64).sqrt()))
            } else if nj == 0 {
                None
            } else {
                out[j] -= 1;
                Some((out, (nj as f64).sqrt()))
            }
        }
        Statistics::Fermion => {
            if raise == (nj == 1) {
                return None;
            }
            out[j] = if raise { 1 } else { 0 };
            let before: u32 = occ[..j].iter().sum();
            Some((out, if before.is_multiple_of(2) { 1.0 } else { -1.0 }))
        }
    }
}

/// `Σ_j c_j a_j |state⟩` (or with `a†_j`).
fn apply_linear(
    state: &FactorState,
    coeffs: &[Complex64],
    raise: bool,
    counter: &mut OpCounter,
) -> FactorState {
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    let mut ops = 0;
    for (occ, amp) in state.terms() {
        for (j, c) in coeffs.iter().enumerate() {
            if *c == zero() {
                continue;
            }
            if let Some((next, factor)) = ladder(occ, j, raise, state.statistics()) {
                *out.entry(next).or_insert_with(zero) += amp * c * factor;
                ops += 1;
            }
        }
    }
    counter.add(ops);
    FactorState::from_map(state.d(), state.statistics(), out)
}

fn column(m: &Array2<Complex64>, alpha: usize) -> Vec<Complex64> {
    m.column(alpha).to_vec()
}

fn row(m: &Array2<Complex64>, alpha: usize) -> Vec<Complex64> {
    m.row(alpha).to_vec()
}

/// `Π_α (v̂_α)^{n_α} / n_α! |state⟩` with `v̂_α = Σ_j v_{αj} a_j`.
///
/// For fermions the string is `v̂_{β_1} ⋯ v̂_{β_t}` over the `β` with
/// `n_β = 1`, ascending from left to right and applied right to left; any
/// `n_β > 1` gives the zero state.
pub fn apply_lowering_string(state: &FactorState, v: &Array2<Complex64>, n: &[u32]) -> FactorState {
    apply_string(state, n, |alpha| row(v, alpha), false)
}

/// `Π_α (û†_α)^{m_α} / m_α! |state⟩` with `û†_α = Σ_i u_{iα} a†_i`. Same
/// ordering rules as [`apply_lowering_string`].
pub fn apply_raising_string(state: &FactorState, u: &Array2<Complex64>, m: &[u32]) -> FactorState {
    apply_string(state, m, |alpha| column(u, alpha), true)
}

fn apply_string(
    state: &FactorState,
    exps: &[u32],
    coeffs_of: impl Fn(usize) -> Vec<Complex64>,
    raise: bool,
) -> FactorState {
    let mut counter = OpCounter::default();
    let mut cur = state.clone();
    match state.statistics() {
        Statistics::Boson => {
            for (alpha, &e) in exps.iter().enumerate() {
                let c = coeffs_of(alpha);
                for step in 1..=e {
                    cur = apply_linear(&cur, &c, raise, &mut counter)
                        .scale(Complex64::new(1.0 / step as f64, 0.0));
                }
            }
        }
        Statistics::Fermion => {
            if exps.iter().any(|&e| e > 1) {
                return FactorState::zero(state.d(), state.statistics());
            }
            for alpha in (0..exps.len()).rev() {
                if exps[alpha] == 1 {
                    cur = apply_linear(&cur, &coeffs_of(alpha), raise, &mut counter);
                }
            }
        }
    }
    cur
}

/// Builds `f_μ` for one block. `bra` and `ket` must have the same `d` and
/// statistics; `slice.u` is `d × k`, `slice.v` is `k × d`.
pub fn build_factor(
    bra: &FactorState,
    ket: &FactorState,
    slice: &BlockSlice,
    counter: &mut OpCounter,
) -> FactorPolynomial {
    assert_eq!(bra.d(), ket.d(), "bra and ket blocks differ in size");
    assert_eq!(bra.statistics(), ket.statistics());
    match ket.statistics() {
        Statistics::Boson => build_boson(bra, ket, slice, counter),
        Statistics::Fermion => build_fermion(bra, ket, slice, counter),
    }
}

fn build_boson(
    bra: &FactorState,
    ket: &FactorState,
    slice: &BlockSlice,
    counter: &mut OpCounter,
) -> FactorPolynomial {
    let k = slice.v.nrows();
    let nk = ket.max_particles();
    let nb = bra.max_particles();
    let cap = nk.max(nb);
    // X†_α = Σ_i conj(u_{iα}) a_i lowers the bra.
    let udag: Vec<Vec<Complex64>> = (0..k)
        .map(|a| slice.u.column(a).iter().map(|z| z.conj()).collect())
        .collect();
    let vrows: Vec<Vec<Complex64>> = (0..k).map(|a| row(&slice.v, a)).collect();

    let lowered = |state: &FactorState, ops: &[Vec<Complex64>], bound: u32, counter: &mut OpCounter| {
        let index = MonomialIndex::new(k, bound);
        let mut states: Vec<FactorState> = Vec::with_capacity(index.len());
        for r in 0..index.len() {
            let m = index.monomial(r);
            match m.iter().position(|&x| x > 0) {
                None => states.push(state.clone()),
                Some(alpha) => {
                    let mut prev = m.to_vec();
                    prev[alpha] -= 1;
                    let src = &states[index.rank(&prev).expect("smaller index")];
                    let next = if src.is_zero() {
                        src.clone()
                    } else {
                        apply_linear(src, &ops[alpha], false, counter)
                            .scale(Complex64::new(1.0 / m[alpha] as f64, 0.0))
                    };
                    states.push(next);
                }
            }
        }
        (index, states)
    };

    let (kidx, kets) = lowered(ket, &vrows, nk, counter);
    let (bidx, bras) = lowered(bra, &udag, nb, counter);

    let mut f = BidegreePoly::zero(k, cap);
    let mut ops = 0;
    for (i, r) in bras.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        for (j, l) in kets.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let c = r.inner(l);
            ops += r.terms().len().min(l.terms().len()) as u64;
            if c != zero() {
                f.add_term(
                    &Bidegree::new(bidx.monomial(i).to_vec(), kidx.monomial(j).to_vec()),
                    c,
                )
                .expect("degrees bounded by particle numbers");
            }
        }
    }
    counter.add(ops);
    FactorPolynomial {
        degree_bound: cap,
        body: FactorBody::Boson(f),
    }
}

fn build_fermion(
    bra: &FactorState,
    ket: &FactorState,
    slice: &BlockSlice,
    counter: &mut OpCounter,
) -> FactorPolynomial {
    let k = slice.v.nrows();
    let subsets = 1usize << k;
    let udag: Vec<Vec<Complex64>> = (0..k)
        .map(|a| slice.u.column(a).iter().map(|z| z.conj()).collect())
        .collect();
    let vrows: Vec<Vec<Complex64>> = (0..k).map(|a| row(&slice.v, a)).collect();

    // L_T = Y_{min T} L_{T \ min T}: the ascending Y string applied right to left.
    let mut kets: Vec<FactorState> = Vec::with_capacity(subsets);
    for t in 0..subsets {
        if t == 0 {
            kets.push(ket.clone());
            continue;
        }
        let beta = t.trailing_zeros() as usize;
        let src = &kets[t & (t - 1)];
        kets.push(if src.is_zero() {
            src.clone()
        } else {
            apply_linear(src, &vrows[beta], false, counter)
        });
    }

    // R_S = X†_{max S} R_{S \ max S}, so that ⟨R_S| = ⟨Φ| X_{α_1} ⋯ X_{α_s}.
    let lower_bra = |state: &FactorState, counter: &mut OpCounter| {
        let mut out: Vec<FactorState> = Vec::with_capacity(subsets);
        for s in 0..subsets {
            if s == 0 {
                out.push(state.clone());
                continue;
            }
            let alpha = usize::BITS as usize - 1 - s.leading_zeros() as usize;
            let src = &out[s & !(1 << alpha)];
            out.push(if src.is_zero() {
                src.clone()
            } else {
                apply_linear(src, &udag[alpha], false, counter)
            });
        }
        out
    };

    let (bra_even, bra_odd) = bra.parity_parts();
    let mut value = GrassmannElement::zero(k);
    let mut twisted = (!bra_odd.is_zero()).then(|| GrassmannElement::zero(k));
    let mut ops = 0;
    for (parity, part) in [(0u32, &bra_even), (1u32, &bra_odd)] {
        if part.is_zero() {
            continue;
        }
        let bras = lower_bra(part, counter);
        for (s, r) in bras.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            for (t, l) in kets.iter().enumerate() {
                if l.is_zero() {
                    continue;
                }
                let amp = r.inner(l);
                ops += r.terms().len().min(l.terms().len()) as u64;
                if amp == zero() {
                    continue;
                }
                let (mask, sign) = fermion_mask_and_sign(s as u32, t as u32, parity);
                let c = amp * sign;
                value.add_to(mask, c);
                if let Some(tw) = twisted.as_mut() {
                    tw.add_to(mask, if parity == 1 { -c } else { c });
                }
            }
        }
    }
    counter.add(ops);
    FactorPolynomial {
        degree_bound: bra.max_particles().max(ket.max_particles()),
        body: FactorBody::Fermion(FermionFactor { value, twisted }),
    }
}

/// Grassmann mask and sign for the coefficient with `z` subset `s`, `z*`
/// subset `t` (bit `α` set means `α` present) and bra parity `b`.
pub(crate) fn fermion_mask_and_sign(s: u32, t: u32, b: u32) -> (u32, f64) {
    let ns = s.count_ones();
    let nt = t.count_ones();
    let mut mask = 0;
    let mut inversions = 0;
    for alpha in 0..32 {
        if s >> alpha & 1 == 1 {
            mask |= z_bit(alpha as usize);
            // β ∈ T with β < α
            inversions += (t & ((1u32 << alpha) - 1)).count_ones();
        }
        if t >> alpha & 1 == 1 {
            mask |= zbar_bit(alpha as usize);
        }
    }
    let exponent = ns * (ns + 1) / 2 + nt * (nt.max(1) - 1) / 2 + ns * nt + b * (ns + nt) + inversions;
    (mask, if exponent.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// `1 + (Σ_α u_α z_α)(Σ_β v_β z*_β)` for a block holding one boson in one
/// mode; `u` is the block's row of `u`, `v` its column of `v`.
pub fn build_factor_single_boson(u: &[Complex64], v: &[Complex64]) -> FactorPolynomial {
    let k = u.len();
    assert_eq!(k, v.len());
    let mut f = BidegreePoly::one(k, 1);
    for (alpha, ua) in u.iter().enumerate() {
        for (beta, vb) in v.iter().enumerate() {
            let mut b = Bidegree::constant(k);
            b.z[alpha] = 1;
            b.zbar[beta] = 1;
            f.add_term(&b, ua * vb).expect("degree one");
        }
    }
    FactorPolynomial {
        degree_bound: 1,
        body: FactorBody::Boson(f),
    }
}

/// `true` for the one-mode, one-particle, unit-amplitude state.
pub fn is_single_particle(state: &FactorState) -> bool {
    state.d() == 1
        && state.terms().len() == 1
        && state.amplitude(&[1]) == Complex64::new(1.0, 0.0)
}
