//! The full computation: build every block factor, fold them into a running
//! product in block order, take the Gaussian average. Also the two
//! specialised routes, the permanent of `1 + uv` through single-boson
//! factors and the determinant through the `k × k` matrix `1 + vu`.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::factor::{build_factor, build_factor_single_boson, FactorBody};
use crate::grassmann::GrassmannElement;
use crate::model::{LowRankOperator, ModelError, ProductState, Statistics};
use crate::poly::{BidegreePoly, PolyError};
use crate::OpCounter;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("polynomial arithmetic failed: {0}")]
    Poly(#[from] PolyError),
    #[error("the Sylvester route needs fermionic blocks with one particle in one mode")]
    SylvesterNotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Engine,
    SingleBoson,
    Sylvester,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComputationReport {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    /// Multiply-adds in the product stage.
    pub op_count: u64,
    /// Work spent building the block factors, reported separately.
    pub factor_op_count: u64,
    pub peak_coefficient_count: usize,
    pub wall_time: f64,
    pub n_blocks: usize,
    pub k: usize,
    pub statistics: Statistics,
    pub degree_cap: usize,
    pub method: Method,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// `⟨bra| P(1 + uv) |ket⟩`.
pub fn expectation(
    bra: &ProductState,
    ket: &ProductState,
    op: &LowRankOperator,
) -> Result<ComputationReport, EngineError> {
    let start = Instant::now();
    bra.same_layout(ket)?;
    let slices = op.block_slice(ket)?;
    let k = op.k();
    let statistics = ket.statistics();
    let degree_cap = bra.particle_bound().max(ket.particle_bound());
    let mut product_ops = OpCounter::default();
    let mut factor_ops = OpCounter::default();

    let (value, peak) = match statistics {
        Statistics::Boson => {
            let mut running = BidegreePoly::one(k, degree_cap as u32);
            let mut peak = running.stored_count();
            for (mu, slice) in slices.slices.iter().enumerate() {
                let f = build_factor(&bra.factors()[mu], &ket.factors()[mu], slice, &mut factor_ops);
                let FactorBody::Boson(p) = f.body else {
                    unreachable!("bosonic block built a Grassmann factor")
                };
                running.mul_assign(&p, &mut product_ops)?;
                peak = peak.max(running.stored_count());
            }
            (running.gaussian_average(), peak)
        }
        Statistics::Fermion => {
            let mut running = GrassmannElement::one(k);
            for (mu, slice) in slices.slices.iter().enumerate() {
                let f = build_factor(&bra.factors()[mu], &ket.factors()[mu], slice, &mut factor_ops);
                let FactorBody::Fermion(g) = f.body else {
                    unreachable!("fermionic block built a commuting factor")
                };
                running = fold_fermion(&running, &g.value, g.twisted.as_ref(), &mut product_ops);
            }
            (running.berezin_average(), 1usize << (2 * k))
        }
    };

    Ok(ComputationReport {
        value,
        op_count: product_ops.count(),
        factor_op_count: factor_ops.count(),
        peak_coefficient_count: peak,
        wall_time: start.elapsed().as_secs_f64(),
        n_blocks: ket.n_blocks(),
        k,
        statistics,
        degree_cap,
        method: Method::Engine,
    })
}

/// `R ← R_even · f + R_odd · f̃`. Odd Grassmann content accumulated from
/// earlier blocks changes sign when it passes an odd bra component, which
/// is what the twisted factor `f̃` accounts for.
fn fold_fermion(
    running: &GrassmannElement,
    value: &GrassmannElement,
    twisted: Option<&GrassmannElement>,
    counter: &mut OpCounter,
) -> GrassmannElement {
    match twisted {
        Some(tw) if running.has_odd_part() => running
            .even_part()
            .multiply(value, counter)
            .add(&running.odd_part().multiply(tw, counter)),
        _ => running.multiply(value, counter),
    }
}

/// `Per(1 + uv)` for `u` of shape `N × k` and `v` of shape `k × N`, as the
/// bosonic matrix element between single-boson product states, using the
/// closed-form factor `1 + (u_μ·z)(v_μ·z*)` for every block.
pub fn permanent_rank_shifted(
    u: &Array2<Complex64>,
    v: &Array2<Complex64>,
) -> Result<ComputationReport, EngineError> {
    let start = Instant::now();
    let op = LowRankOperator::new(u.clone(), v.clone())?;
    let n = op.modes();
    let k = op.k();
    let mut running = BidegreePoly::one(k, n as u32);
    let mut peak = running.stored_count();
    let mut counter = OpCounter::default();
    for mu in 0..n {
        let row: Vec<Complex64> = u.row(mu).to_vec();
        let col: Vec<Complex64> = v.column(mu).to_vec();
        let f = build_factor_single_boson(&row, &col);
        let FactorBody::Boson(p) = f.body else {
            unreachable!()
        };
        running.mul_assign(&p, &mut counter)?;
        peak = peak.max(running.stored_count());
    }
    Ok(ComputationReport {
        value: running.gaussian_average(),
        op_count: counter.count(),
        factor_op_count: (n * k * k) as u64,
        peak_coefficient_count: peak,
        wall_time: start.elapsed().as_secs_f64(),
        n_blocks: n,
        k,
        statistics: Statistics::Boson,
        degree_cap: n,
        method: Method::SingleBoson,
    })
}

/// `det(1 + uv)` evaluated as `det(1_k + vu)`.
pub fn determinant_fast(u: &Array2<Complex64>, v: &Array2<Complex64>) -> Complex64 {
    let mut counter = OpCounter::default();
    small_identity_plus_product_det(u, v, &mut counter)
}

fn small_identity_plus_product_det(
    u: &Array2<Complex64>,
    v: &Array2<Complex64>,
    counter: &mut OpCounter,
) -> Complex64 {
    let k = v.nrows();
    let n = v.ncols();
    assert_eq!(u.nrows(), n, "u must be N × k");
    assert_eq!(u.ncols(), k, "u must be N × k");
    let mut w = Array2::<Complex64>::eye(k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += v[(a, j)] * u[(j, b)];
            }
            w[(a, b)] += acc;
        }
    }
    counter.add((k * k * n) as u64);
    eliminate_det(w, counter)
}

/// Gaussian elimination with row pivoting on a small matrix.
fn eliminate_det(mut w: Array2<Complex64>, counter: &mut OpCounter) -> Complex64 {
    let k = w.nrows();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| w[(a, col)].norm().total_cmp(&w[(b, col)].norm()))
            .expect("non-empty range");
        if w[(pivot, col)] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..k {
                w.swap((pivot, c), (col, c));
            }
            det = -det;
        }
        let p = w[(col, col)];
        det *= p;
        for r in col + 1..k {
            let factor = w[(r, col)] / p;
            for c in col..k {
                let t = w[(col, c)];
                w[(r, c)] -= factor * t;
            }
            counter.add((k - col) as u64);
        }
    }
    det
}

/// Whether every block on both sides is a single mode holding one fermion.
pub fn sylvester_applicable(bra: &ProductState, ket: &ProductState) -> bool {
    let single = |s: &ProductState| {
        s.statistics() == Statistics::Fermion
            && s.factors()
                .iter()
                .all(|f| f.d() == 1 && f.terms().len() == 1 && f.terms().contains_key(&vec![1]))
    };
    single(bra) && single(ket)
}

/// The fermionic matrix element between one-fermion-per-block states as
/// `Π_μ conj(b_μ) c_μ · det(1_k + vu)`.
pub fn expectation_sylvester(
    bra: &ProductState,
    ket: &ProductState,
    op: &LowRankOperator,
) -> Result<ComputationReport, EngineError> {
    let start = Instant::now();
    bra.same_layout(ket)?;
    if !sylvester_applicable(bra, ket) {
        return Err(EngineError::SylvesterNotApplicable);
    }
    if op.modes() != ket.mode_count() {
        return Err(ModelError::DimensionMismatch {
            field: "u rows".into(),
            expected: ket.mode_count(),
            found: op.modes(),
        }
        .into());
    }
    let mut counter = OpCounter::default();
    let overlap: Complex64 = bra
        .factors()
        .iter()
        .zip(ket.factors())
        .map(|(b, c)| b.amplitude(&[1]).conj() * c.amplitude(&[1]))
        .product();
    let det = small_identity_plus_product_det(op.u(), op.v(), &mut counter);
    Ok(ComputationReport {
        value: overlap * det,
        op_count: counter.count(),
        factor_op_count: ket.n_blocks() as u64,
        peak_coefficient_count: op.k() * op.k(),
        wall_time: start.elapsed().as_secs_f64(),
        n_blocks: ket.n_blocks(),
        k: op.k(),
        statistics: Statistics::Fermion,
        degree_cap: ket.particle_bound(),
        method: Method::Sylvester,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FactorState;
    use ndarray::array;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn singles(n: usize, stat: Statistics) -> ProductState {
        ProductState::new(vec![FactorState::single_particle(stat); n]).unwrap()
    }

    #[test]
    fn one_by_one_permanent() {
        let s = singles(1, Statistics::Boson);
        let op = LowRankOperator::new(array![[c(2.0)]], array![[c(3.0)]]).unwrap();
        let r = expectation(&s, &s, &op).unwrap();
        assert!((r.value - c(7.0)).norm() < 1e-14);
        let r = permanent_rank_shifted(op.u(), op.v()).unwrap();
        assert!((r.value - c(7.0)).norm() < 1e-14);
    }

    #[test]
    fn two_by_two_permanent_and_determinant() {
        let u = array![[c(1.0)], [c(1.0)]];
        let v = array![[c(1.0), c(1.0)]];
        let r = permanent_rank_shifted(&u, &v).unwrap();
        assert!((r.value - c(5.0)).norm() < 1e-14);
        assert!((determinant_fast(&u, &v) - c(3.0)).norm() < 1e-14);
        let s = singles(2, Statistics::Fermion);
        let op = LowRankOperator::new(u, v).unwrap();
        let r = expectation(&s, &s, &op).unwrap();
        assert!((r.value - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_operator_gives_norm_product() {
        let f = FactorState::new(
            2,
            Statistics::Boson,
            [(vec![1, 0], c(0.6)), (vec![0, 2], Complex64::new(0.0, 0.8))],
        )
        .unwrap();
        let s = ProductState::new(vec![f.clone(), f]).unwrap();
        let op = LowRankOperator::zero(4, 1).unwrap();
        let r = expectation(&s, &s, &op).unwrap();
        assert!((r.value - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn scalar_sylvester() {
        let u = array![[c(0.5)], [c(-2.0)], [c(1.5)]];
        let v = array![[c(2.0), c(1.0), c(-1.0)]];
        let expected = c(1.0 + 0.5 * 2.0 - 2.0 - 1.5);
        assert!((determinant_fast(&u, &v) - expected).norm() < 1e-14);
    }

    #[test]
    fn sylvester_route_requires_single_fermions() {
        let s = singles(2, Statistics::Boson);
        let op = LowRankOperator::zero(2, 1).unwrap();
        assert!(matches!(
            expectation_sylvester(&s, &s, &op),
            Err(EngineError::SylvesterNotApplicable)
        ));
    }

    #[test]
    fn rank_cap_from_permanent_route() {
        let u = Array2::<Complex64>::zeros((3, 7));
        let v = Array2::<Complex64>::zeros((7, 3));
        assert!(matches!(
            permanent_rank_shifted(&u, &v),
            Err(EngineError::Model(ModelError::RankCapExceeded { .. }))
        ));
    }
}
