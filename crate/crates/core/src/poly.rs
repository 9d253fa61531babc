//! Polynomials in commuting variables `z_1..z_k` and `z*_1..z*_k` with a cap
//! on the total degree of each group, and their complex Gaussian average
//! `S(z^m z*^n) = δ_{m,n} Π_α m_α!`.
//!
//! Two storage layouts share one interface. The dense layout is a
//! `K × K` table, `K` being the number of multi-indices with total degree
//! `≤ cap`, ranked lexicographically; row index ranks the `z` exponents and
//! column index the `z*` exponents. It is used whenever the table has at
//! most [`DENSE_TABLE_LIMIT`] slots; beyond that a sparse ordered map holds
//! only the nonzero coefficients.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

use crate::OpCounter;

/// Largest dense table, in coefficient slots.
pub const DENSE_TABLE_LIMIT: u128 = 1 << 25;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("product degree ({z}, {zbar}) exceeds the degree cap {cap}")]
    CapOverflow { z: u32, zbar: u32, cap: u32 },
    #[error("variable-pair count mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("exponent vector has length {found}, expected {expected}")]
    ExponentLength { expected: usize, found: usize },
}

/// Exponents of one monomial `z^m z*^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bidegree {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

impl Bidegree {
    pub fn new(z: Vec<u32>, zbar: Vec<u32>) -> Self {
        Bidegree { z, zbar }
    }

    pub fn constant(k: usize) -> Self {
        Bidegree {
            z: vec![0; k],
            zbar: vec![0; k],
        }
    }

    pub fn degrees(&self) -> (u32, u32) {
        (self.z.iter().sum(), self.zbar.iter().sum())
    }
}

/// Storage layout selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Auto,
    Dense,
    Sparse,
}

/// Lexicographically ranked multi-indices `m ∈ ℕ^k` with `|m| ≤ cap`.
#[derive(Debug)]
pub struct MonomialIndex {
    k: usize,
    cap: u32,
    /// `monomials[i*k..(i+1)*k]` is the multi-index of rank `i`.
    monomials: Vec<u32>,
    /// `binom[n][r] = C(n, r)` for `n ≤ cap + k + 1`, `r ≤ k + 1`.
    binom: Vec<Vec<usize>>,
}

impl MonomialIndex {
    pub fn new(k: usize, cap: u32) -> Self {
        let nmax = cap as usize + k + 2;
        let mut binom = vec![vec![0usize; k + 2]; nmax + 1];
        for row in binom.iter_mut() {
            row[0] = 1;
        }
        for n in 1..=nmax {
            for r in 1..=(k + 1) {
                binom[n][r] = binom[n - 1][r - 1] + binom[n - 1][r];
            }
        }
        let count = binom[cap as usize + k][k];
        let mut monomials = Vec::with_capacity(count * k);
        let mut cur = vec![0u32; k];
        enumerate_lex(&mut cur, 0, cap, &mut monomials);
        debug_assert_eq!(monomials.len(), count * k);
        MonomialIndex {
            k,
            cap,
            monomials,
            binom,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len().checked_div(self.k).unwrap_or(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn monomial(&self, rank: usize) -> &[u32] {
        &self.monomials[rank * self.k..(rank + 1) * self.k]
    }

    /// Rank of `m`, or `None` when `|m|` exceeds the cap.
    pub fn rank(&self, m: &[u32]) -> Option<usize> {
        let total: u32 = m.iter().sum();
        if total > self.cap {
            return None;
        }
        let mut rank = 0usize;
        let mut rem = self.cap as usize;
        for (alpha, &ma) in m.iter().enumerate() {
            let r = self.k - alpha - 1;
            let ma = ma as usize;
            // Σ_{v<ma} C(rem - v + r, r) by the hockey-stick identity.
            rank += self.binom[rem + r + 1][r + 1] - self.binom[rem - ma + r + 1][r + 1];
            rem -= ma;
        }
        Some(rank)
    }

    /// Map `rank(m) ↦ rank(m - a)`, with `NONE` where `m - a` has a
    /// negative entry.
    fn shift_down(&self, a: &[u32]) -> Vec<u32> {
        let mut out = vec![NONE; self.len()];
        let mut buf = vec![0u32; self.k];
        for (i, slot) in out.iter_mut().enumerate() {
            let m = self.monomial(i);
            if m.iter().zip(a).all(|(x, y)| x >= y) {
                for ((b, x), y) in buf.iter_mut().zip(m).zip(a) {
                    *b = x - y;
                }
                *slot = self.rank(&buf).expect("lowered index stays in range") as u32;
            }
        }
        out
    }
}

fn enumerate_lex(cur: &mut Vec<u32>, pos: usize, rem: u32, out: &mut Vec<u32>) {
    if pos == cur.len() {
        out.extend_from_slice(cur);
        return;
    }
    for v in 0..=rem {
        cur[pos] = v;
        enumerate_lex(cur, pos + 1, rem - v, out);
    }
    cur[pos] = 0;
}

/// Number of dense slots for `(k, cap)`: `C(cap + k, k)²`, saturating.
pub fn dense_table_size(k: usize, cap: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c.saturating_mul(cap as u128 + i) / i;
    }
    c.saturating_mul(c)
}

#[derive(Clone, Debug)]
enum Storage {
    Dense {
        index: Arc<MonomialIndex>,
        coeffs: Vec<Complex64>,
    },
    Sparse(BTreeMap<Bidegree, Complex64>),
}

/// A polynomial in `z_1..z_k, z*_1..z*_k` with `|m| ≤ cap` and `|n| ≤ cap`.
#[derive(Clone, Debug)]
pub struct BidegreePoly {
    k: usize,
    cap: u32,
    storage: Storage,
    /// Upper bound on the `(|m|, |n|)` degrees of the nonzero support.
    deg_bound: (u32, u32),
}

impl BidegreePoly {
    pub fn zero(k: usize, cap: u32) -> Self {
        Self::zero_with_layout(k, cap, Layout::Auto)
    }

    pub fn zero_with_layout(k: usize, cap: u32, layout: Layout) -> Self {
        let dense = match layout {
            Layout::Dense => true,
            Layout::Sparse => false,
            Layout::Auto => dense_table_size(k, cap) <= DENSE_TABLE_LIMIT,
        };
        let storage = if dense {
            let index = Arc::new(MonomialIndex::new(k, cap));
            let n = index.len();
            Storage::Dense {
                index,
                coeffs: vec![Complex64::new(0.0, 0.0); n * n],
            }
        } else {
            Storage::Sparse(BTreeMap::new())
        };
        BidegreePoly {
            k,
            cap,
            storage,
            deg_bound: (0, 0),
        }
    }

    /// The constant polynomial `1`.
    pub fn one(k: usize, cap: u32) -> Self {
        Self::one_with_layout(k, cap, Layout::Auto)
    }

    pub fn one_with_layout(k: usize, cap: u32, layout: Layout) -> Self {
        let mut p = Self::zero_with_layout(k, cap, layout);
        p.add_term(&Bidegree::constant(k), Complex64::new(1.0, 0.0))
            .expect("constant fits any cap");
        p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    /// Slots held in memory: the full table when dense, nonzeros otherwise.
    pub fn stored_count(&self) -> usize {
        match &self.storage {
            Storage::Dense { coeffs, .. } => coeffs.len(),
            Storage::Sparse(map) => map.len(),
        }
    }

    fn check_exponents(&self, b: &Bidegree) -> Result<(), PolyError> {
        for v in [&b.z, &b.zbar] {
            if v.len() != self.k {
                return Err(PolyError::ExponentLength {
                    expected: self.k,
                    found: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Adds `c · z^m z*^n`.
    pub fn add_term(&mut self, b: &Bidegree, c: Complex64) -> Result<(), PolyError> {
        self.check_exponents(b)?;
        let (dz, dzb) = b.degrees();
        if dz > self.cap || dzb > self.cap {
            return Err(PolyError::CapOverflow {
                z: dz,
                zbar: dzb,
                cap: self.cap,
            });
        }
        if c == Complex64::new(0.0, 0.0) {
            return Ok(());
        }
        match &mut self.storage {
            Storage::Dense { index, coeffs } => {
                let n = index.len();
                let i = index.rank(&b.z).expect("degree checked");
                let j = index.rank(&b.zbar).expect("degree checked");
                coeffs[i * n + j] += c;
            }
            Storage::Sparse(map) => {
                let e = map.entry(b.clone()).or_insert(Complex64::new(0.0, 0.0));
                *e += c;
                if *e == Complex64::new(0.0, 0.0) {
                    map.remove(b);
                }
            }
        }
        self.deg_bound = (self.deg_bound.0.max(dz), self.deg_bound.1.max(dzb));
        Ok(())
    }

    pub fn from_terms<I>(k: usize, cap: u32, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Bidegree, Complex64)>,
    {
        let mut p = Self::zero(k, cap);
        for (b, c) in terms {
            p.add_term(&b, c)?;
        }
        Ok(p)
    }

    pub fn coeff(&self, b: &Bidegree) -> Complex64 {
        match &self.storage {
            Storage::Dense { index, coeffs } => {
                match (index.rank(&b.z), index.rank(&b.zbar)) {
                    (Some(i), Some(j)) => coeffs[i * index.len() + j],
                    _ => Complex64::new(0.0, 0.0),
                }
            }
            Storage::Sparse(map) => map.get(b).copied().unwrap_or_default(),
        }
    }

    /// Nonzero terms in lexicographic `(m, n)` order.
    pub fn terms(&self) -> Vec<(Bidegree, Complex64)> {
        match &self.storage {
            Storage::Dense { index, coeffs } => {
                let n = index.len();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let c = coeffs[i * n + j];
                        if c != Complex64::new(0.0, 0.0) {
                            out.push((
                                Bidegree::new(index.monomial(i).to_vec(), index.monomial(j).to_vec()),
                                c,
                            ));
                        }
                    }
                }
                out
            }
            Storage::Sparse(map) => map.iter().map(|(b, c)| (b.clone(), *c)).collect(),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        match &self.storage {
            Storage::Dense { coeffs, .. } => {
                coeffs.iter().filter(|c| **c != Complex64::new(0.0, 0.0)).count()
            }
            Storage::Sparse(map) => map.len(),
        }
    }

    /// Exact `(max |m|, max |n|)` over nonzero coefficients.
    pub fn max_degrees(&self) -> (u32, u32) {
        match &self.storage {
            Storage::Dense { index, coeffs } => {
                let n = index.len();
                let mut dz = 0;
                let mut dzb = 0;
                for i in 0..n {
                    let mi: u32 = index.monomial(i).iter().sum();
                    for j in 0..n {
                        if coeffs[i * n + j] != Complex64::new(0.0, 0.0) {
                            dz = dz.max(mi);
                            dzb = dzb.max(index.monomial(j).iter().sum());
                        }
                    }
                }
                (dz, dzb)
            }
            Storage::Sparse(map) => map.keys().fold((0, 0), |(a, b), k| {
                let (x, y) = k.degrees();
                (a.max(x), b.max(y))
            }),
        }
    }

    /// Same coefficients under a new cap (and the layout that cap implies).
    pub fn recapped(&self, cap: u32) -> Result<Self, PolyError> {
        let mut p = Self::zero(self.k, cap);
        for (b, c) in self.terms() {
            p.add_term(&b, c)?;
        }
        Ok(p)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense { coeffs, .. } => coeffs.iter_mut().for_each(|c| *c *= s),
            Storage::Sparse(map) => {
                map.values_mut().for_each(|c| *c *= s);
                map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        if self.k != other.k {
            return Err(PolyError::RankMismatch {
                left: self.k,
                right: other.k,
            });
        }
        let mut out = self.recapped(self.cap.max(other.cap))?;
        for (b, c) in other.terms() {
            out.add_term(&b, c)?;
        }
        Ok(out)
    }

    /// Swaps the `z` and `z*` exponents and conjugates every coefficient.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.k, self.cap);
        for (b, c) in self.terms() {
            out.add_term(&Bidegree::new(b.zbar, b.z), c.conj())
                .expect("same cap");
        }
        out
    }

    /// `self · other` under the larger of the two caps.
    pub fn multiply(&self, other: &Self, counter: &mut OpCounter) -> Result<Self, PolyError> {
        let mut out = if other.cap > self.cap {
            self.recapped(other.cap)?
        } else {
            self.clone()
        };
        out.mul_assign(other, counter)?;
        Ok(out)
    }

    /// `self ← self · other`, keeping `self`'s cap. Every coefficient
    /// multiply-add is charged to `counter`.
    pub fn mul_assign(&mut self, other: &Self, counter: &mut OpCounter) -> Result<(), PolyError> {
        if self.k != other.k {
            return Err(PolyError::RankMismatch {
                left: self.k,
                right: other.k,
            });
        }
        let (qz, qzb) = other.max_degrees();
        let (pz, pzb) = self.deg_bound;
        if pz + qz > self.cap || pzb + qzb > self.cap {
            let (pz, pzb) = self.max_degrees();
            self.deg_bound = (pz, pzb);
            if pz + qz > self.cap || pzb + qzb > self.cap {
                return Err(PolyError::CapOverflow {
                    z: pz + qz,
                    zbar: pzb + qzb,
                    cap: self.cap,
                });
            }
        }
        let q_terms = other.terms();
        let cap = self.cap;
        match &mut self.storage {
            Storage::Dense { index, coeffs } => {
                dense_mul_in_place(index, coeffs, &q_terms, counter);
            }
            Storage::Sparse(map) => {
                let mut out: BTreeMap<Bidegree, Complex64> = BTreeMap::new();
                let mut ops = 0u64;
                for (a, ca) in map.iter() {
                    for (b, cb) in &q_terms {
                        let key = Bidegree::new(
                            a.z.iter().zip(&b.z).map(|(x, y)| x + y).collect(),
                            a.zbar.iter().zip(&b.zbar).map(|(x, y)| x + y).collect(),
                        );
                        debug_assert!(key.degrees().0 <= cap && key.degrees().1 <= cap);
                        *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
                        ops += 1;
                    }
                }
                out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
                *map = out;
                counter.add(ops);
            }
        }
        self.deg_bound = ((pz + qz).min(cap), (pzb + qzb).min(cap));
        Ok(())
    }

    /// `S(p) = Σ_m coeff(m, m) · Π_α m_α!`.
    pub fn gaussian_average(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match &self.storage {
            Storage::Dense { index, coeffs } => {
                let n = index.len();
                for i in 0..n {
                    let c = coeffs[i * n + i];
                    if c != Complex64::new(0.0, 0.0) {
                        acc += factorial_weighted(c, index.monomial(i));
                    }
                }
            }
            Storage::Sparse(map) => {
                for (b, c) in map {
                    if b.z == b.zbar {
                        acc += factorial_weighted(*c, &b.z);
                    }
                }
            }
        }
        acc
    }
}

/// Sums over the destination table in descending rank order. Lexicographic
/// rank is monotone under componentwise `≤`, so every source slot a
/// destination reads has not yet been overwritten.
fn dense_mul_in_place(
    index: &MonomialIndex,
    coeffs: &mut [Complex64],
    q_terms: &[(Bidegree, Complex64)],
    counter: &mut OpCounter,
) {
    let n = index.len();
    let mut maps: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let mut map_of = |e: &[u32]| -> usize {
        if let Some(pos) = maps.iter().position(|(key, _)| key == e) {
            pos
        } else {
            maps.push((e.to_vec(), index.shift_down(e)));
            maps.len() - 1
        }
    };
    let terms: Vec<(usize, usize, Complex64)> = q_terms
        .iter()
        .map(|(b, c)| (map_of(&b.z), map_of(&b.zbar), *c))
        .collect();

    let mut ops = 0u64;
    let mut active: Vec<(usize, &[u32], Complex64)> = Vec::with_capacity(terms.len());
    for i in (0..n).rev() {
        active.clear();
        for &(rm, cm, c) in &terms {
            let src = maps[rm].1[i];
            if src != NONE {
                active.push((src as usize * n, maps[cm].1.as_slice(), c));
            }
        }
        let row = i * n;
        for j in (0..n).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(src_row, cmap, c) in &active {
                let sc = cmap[j];
                if sc != NONE {
                    acc += c * coeffs[src_row + sc as usize];
                    ops += 1;
                }
            }
            coeffs[row + j] = acc;
        }
    }
    counter.add(ops);
}

/// `m!` as `f64`; infinite above 170.
pub fn factorial(m: u32) -> f64 {
    static TABLE: OnceLock<[f64; 171]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [1.0f64; 171];
        for i in 1..171 {
            t[i] = t[i - 1] * i as f64;
        }
        t
    });
    table.get(m as usize).copied().unwrap_or(f64::INFINITY)
}

/// `c · Π_α m_α!`, multiplying in stages so that a tiny coefficient paired
/// with an exponent above 170 still yields a finite product when the true
/// value is representable.
fn factorial_weighted(c: Complex64, m: &[u32]) -> Complex64 {
    let mut out = c;
    for &ma in m {
        if ma <= 170 {
            out *= factorial(ma);
        } else {
            out *= factorial(170);
            for j in 171..=ma {
                out *= j as f64;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn zzbar(k: usize, cap: u32, alpha: usize, beta: usize, coef: f64) -> BidegreePoly {
        let mut b = Bidegree::constant(k);
        b.z[alpha] = 1;
        b.zbar[beta] = 1;
        let mut p = BidegreePoly::one(k, cap);
        p.add_term(&b, c(coef)).unwrap();
        p
    }

    #[test]
    fn index_ranks_are_lexicographic_and_bijective() {
        for k in 1..=4 {
            for cap in 0..=5 {
                let idx = MonomialIndex::new(k, cap);
                for r in 0..idx.len() {
                    assert_eq!(idx.rank(idx.monomial(r)), Some(r));
                    if r > 0 {
                        assert!(idx.monomial(r - 1) < idx.monomial(r));
                    }
                }
                assert_eq!((idx.len() as u128).pow(2), dense_table_size(k, cap));
            }
        }
    }

    #[test]
    fn one_has_single_constant_term() {
        let p = BidegreePoly::one(1, 3);
        assert_eq!(p.terms(), vec![(Bidegree::constant(1), c(1.0))]);
        assert_eq!(p.gaussian_average(), c(1.0));
    }

    #[test]
    fn binomial_square() {
        let f = zzbar(1, 2, 0, 0, 1.0);
        let mut counter = OpCounter::default();
        let sq = f.multiply(&f, &mut counter).unwrap();
        assert_eq!(sq.coeff(&Bidegree::constant(1)), c(1.0));
        assert_eq!(sq.coeff(&Bidegree::new(vec![1], vec![1])), c(2.0));
        assert_eq!(sq.coeff(&Bidegree::new(vec![2], vec![2])), c(1.0));
        assert_eq!(sq.nonzero_count(), 3);
        assert!(counter.count() > 0);
    }

    #[test]
    fn product_of_rank_one_factors_sums_linear_coefficient() {
        let uv = [0.5, -1.25, 2.0];
        let mut p = BidegreePoly::one(1, 3);
        let mut counter = OpCounter::default();
        for w in uv {
            p.mul_assign(&zzbar(1, 1, 0, 0, w), &mut counter).unwrap();
        }
        let lin = p.coeff(&Bidegree::new(vec![1], vec![1]));
        assert!((lin - c(uv.iter().sum())).norm() < 1e-15);
    }

    #[test]
    fn moments_match_factorials() {
        let mut b = Bidegree::constant(1);
        b.z[0] = 1;
        b.zbar[0] = 1;
        let p = BidegreePoly::from_terms(1, 3, [(b, c(1.0))]).unwrap();
        assert_eq!(p.gaussian_average(), c(1.0));
        let p = BidegreePoly::from_terms(1, 3, [(Bidegree::new(vec![2], vec![2]), c(1.0))]).unwrap();
        assert_eq!(p.gaussian_average(), c(2.0));
        let p = BidegreePoly::from_terms(2, 3, [(Bidegree::new(vec![1, 0], vec![0, 1]), c(1.0))])
            .unwrap();
        assert_eq!(p.gaussian_average(), c(0.0));
        let p = zzbar(1, 1, 0, 0, 3.0).scale(c(1.0)).add(&BidegreePoly::one(1, 1).scale(c(4.0))).unwrap();
        assert_eq!(p.gaussian_average(), c(8.0));
    }

    #[test]
    fn cap_overflow_is_an_error() {
        let f = zzbar(1, 1, 0, 0, 1.0);
        let mut p = f.clone();
        let mut counter = OpCounter::default();
        assert!(matches!(
            p.mul_assign(&f, &mut counter),
            Err(PolyError::CapOverflow { .. })
        ));
        assert!(matches!(
            BidegreePoly::one(1, 1).add_term(&Bidegree::new(vec![2], vec![0]), c(1.0)),
            Err(PolyError::CapOverflow { .. })
        ));
    }

    #[test]
    fn rank_mismatch_rejected() {
        let mut counter = OpCounter::default();
        assert!(matches!(
            BidegreePoly::one(1, 2).multiply(&BidegreePoly::one(2, 2), &mut counter),
            Err(PolyError::RankMismatch { .. })
        ));
    }

    #[test]
    fn dense_and_sparse_agree() {
        let mut d = BidegreePoly::one_with_layout(2, 4, Layout::Dense);
        let mut s = BidegreePoly::one_with_layout(2, 4, Layout::Sparse);
        let mut cd = OpCounter::default();
        let mut cs = OpCounter::default();
        for (a, b, w) in [(0, 1, 0.5), (1, 1, -2.0), (0, 0, 1.5), (1, 0, 0.25)] {
            let f = zzbar(2, 1, a, b, w);
            d.mul_assign(&f, &mut cd).unwrap();
            s.mul_assign(&f, &mut cs).unwrap();
        }
        assert!(!s.is_dense() && d.is_dense());
        let dt = d.terms();
        let st = s.terms();
        assert_eq!(dt.len(), st.len());
        for ((b1, c1), (b2, c2)) in dt.iter().zip(&st) {
            assert_eq!(b1, b2);
            assert!((c1 - c2).norm() < 1e-13);
        }
        assert!((d.gaussian_average() - s.gaussian_average()).norm() < 1e-12);
    }

    #[test]
    fn large_degree_weights_stay_finite() {
        let p = BidegreePoly::from_terms(
            1,
            200,
            [(Bidegree::new(vec![200], vec![200]), c(1e-300))],
        )
        .unwrap();
        let s = p.gaussian_average();
        assert!(s.re.is_finite());
        // 200! ≈ 7.886578673647905e374
        assert!((s.re / 7.886578673647905e74 - 1.0).abs() < 1e-12);
    }
}
