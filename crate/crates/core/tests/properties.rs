use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

use finrank::factor::{
    apply_lowering_string, apply_raising_string, build_factor, build_factor_single_boson,
};
use finrank::generate::{generate_instance, GenConfig};
use finrank::grassmann::GrassmannElement;
use finrank::model::{FactorState, LowRankOperator, ProductState, Statistics};
use finrank::oracle::{FockBasis, FockVector};
use finrank::poly::{Bidegree, BidegreePoly};
use finrank::verify::{compare, ORACLE_TOLERANCE};
use finrank::{expectation, OpCounter};

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Random k = 2 polynomial with `|m|, |n| ≤ 2`.
fn small_poly() -> impl Strategy<Value = Vec<(Bidegree, Complex64)>> {
    prop::collection::vec(((0u32..=2, 0u32..=2, 0u32..=2, 0u32..=2), cplx()), 0..6).prop_map(|ts| {
        ts.into_iter()
            .filter(|((a, b, c, d), _)| a + b <= 2 && c + d <= 2)
            .map(|((a, b, c, d), x)| (Bidegree::new(vec![a, b], vec![c, d]), x))
            .collect()
    })
}

fn poly(terms: &[(Bidegree, Complex64)], cap: u32) -> BidegreePoly {
    BidegreePoly::from_terms(2, cap, terms.iter().cloned()).unwrap()
}

fn assert_poly_close(a: &BidegreePoly, b: &BidegreePoly, tol: f64) {
    for (bd, x) in a.terms() {
        assert!((x - b.coeff(&bd)).norm() <= tol, "{bd:?}: {x} vs {}", b.coeff(&bd));
    }
    for (bd, x) in b.terms() {
        assert!((x - a.coeff(&bd)).norm() <= tol, "{bd:?}: {x} vs {}", a.coeff(&bd));
    }
}

fn grassmann(k: usize) -> impl Strategy<Value = GrassmannElement> {
    prop::collection::vec(cplx(), 1 << (2 * k)).prop_map(move |cs| {
        let mut e = GrassmannElement::zero(k);
        for (mask, c) in cs.into_iter().enumerate() {
            e.set(mask as u32, c);
        }
        e
    })
}

fn homogeneous(k: usize, degree: u32) -> impl Strategy<Value = GrassmannElement> {
    grassmann(k).prop_map(move |e| {
        let mut h = GrassmannElement::zero(k);
        for mask in 0..(1u32 << (2 * k)) {
            if mask.count_ones() == degree {
                h.set(mask, e.coeff(mask));
            }
        }
        h
    })
}

fn grassmann_close(a: &GrassmannElement, b: &GrassmannElement) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_product_commutes(p in small_poly(), q in small_poly()) {
        let (p, q) = (poly(&p, 4), poly(&q, 4));
        let mut c = OpCounter::default();
        assert_poly_close(&p.multiply(&q, &mut c).unwrap(), &q.multiply(&p, &mut c).unwrap(), 1e-12);
    }

    #[test]
    fn poly_product_associates(p in small_poly(), q in small_poly(), r in small_poly()) {
        let (p, q, r) = (poly(&p, 6), poly(&q, 6), poly(&r, 6));
        let mut c = OpCounter::default();
        let left = p.multiply(&q, &mut c).unwrap().multiply(&r, &mut c).unwrap();
        let right = p.multiply(&q.multiply(&r, &mut c).unwrap(), &mut c).unwrap();
        assert_poly_close(&left, &right, 1e-12);
    }

    #[test]
    fn one_is_identity(p in small_poly()) {
        let p = poly(&p, 4);
        let mut c = OpCounter::default();
        assert_poly_close(&BidegreePoly::one(2, 4).multiply(&p, &mut c).unwrap(), &p, 0.0);
    }

    #[test]
    fn gaussian_average_is_linear(p in small_poly(), q in small_poly(), a in cplx(), b in cplx()) {
        let (p, q) = (poly(&p, 4), poly(&q, 4));
        let lhs = p.scale(a).add(&q.scale(b)).unwrap().gaussian_average();
        let rhs = a * p.gaussian_average() + b * q.gaussian_average();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn gaussian_average_factorizes(p in small_poly(), q in small_poly()) {
        // Keep p in the first pair only and q in the second.
        let first: Vec<_> = p.into_iter().filter(|(b, _)| b.z[1] == 0 && b.zbar[1] == 0).collect();
        let second: Vec<_> = q.into_iter().filter(|(b, _)| b.z[0] == 0 && b.zbar[0] == 0).collect();
        let (p, q) = (poly(&first, 4), poly(&second, 4));
        let mut c = OpCounter::default();
        let joint = p.multiply(&q, &mut c).unwrap().gaussian_average();
        prop_assert!((joint - p.gaussian_average() * q.gaussian_average()).norm() < 1e-12);
    }

    #[test]
    fn grassmann_product_associates(a in grassmann(2), b in grassmann(2), c in grassmann(2)) {
        let mut n = OpCounter::default();
        let left = a.multiply(&b, &mut n).multiply(&c, &mut n);
        let right = a.multiply(&b.multiply(&c, &mut n), &mut n);
        prop_assert!(grassmann_close(&left, &right));
    }

    #[test]
    fn grassmann_graded_commutativity(
        (dp, p) in (0u32..=4).prop_flat_map(|d| (Just(d), homogeneous(2, d))),
        (dq, q) in (0u32..=4).prop_flat_map(|d| (Just(d), homogeneous(2, d))),
    ) {
        let mut n = OpCounter::default();
        let pq = p.multiply(&q, &mut n);
        let sign = if (dp * dq) % 2 == 0 { 1.0 } else { -1.0 };
        let qp = q.multiply(&p, &mut n).scale(Complex64::new(sign, 0.0));
        prop_assert!(grassmann_close(&pq, &qp));
    }

    #[test]
    fn even_products_stay_even(a in grassmann(2), b in grassmann(2)) {
        let mut n = OpCounter::default();
        let p = a.even_part().multiply(&b.even_part(), &mut n);
        prop_assert!(!p.has_odd_part());
    }
}

fn instance(stat: Statistics, seed: u64, number_conserving: bool) -> finrank::Instance {
    let d = 1 + (seed % 2) as usize;
    let cfg = GenConfig {
        blocks: 2 + (seed % 3) as usize,
        d,
        k: 1 + (seed / 3 % 2) as usize,
        statistics: stat,
        n_max: if stat == Statistics::Fermion { d as u32 } else { 2 },
        number_conserving,
        distinct_ket: seed % 4 == 1,
        vary_dims: true,
        ..GenConfig::default()
    };
    generate_instance(&cfg, seed).unwrap().validate().unwrap()
}

#[test]
fn decomposition_independence() {
    // uv = (uG)(G⁻¹v) for any invertible G; the matrix element depends on A only.
    for stat in [Statistics::Boson, Statistics::Fermion] {
        for seed in 0..40 {
            let inst = instance(stat, seed, false);
            let k = inst.op.k();
            let g = Array2::from_shape_fn((k, k), |(i, j)| {
                Complex64::new(if i == j { 2.0 } else { 0.3 }, 0.1 * (i + 2 * j) as f64)
            });
            let g_inv = invert(&g);
            let op2 = LowRankOperator::new(inst.op.u().dot(&g), g_inv.dot(inst.op.v())).unwrap();
            let a = expectation(&inst.bra, &inst.ket, &inst.op).unwrap().value;
            let b = expectation(&inst.bra, &inst.ket, &op2).unwrap().value;
            let (rel, ok, _) = compare(b, a, ORACLE_TOLERANCE);
            assert!(ok, "{stat} seed {seed}: rel {rel:e}");
        }
    }
}

fn invert(g: &Array2<Complex64>) -> Array2<Complex64> {
    match g.nrows() {
        1 => Array2::from_elem((1, 1), Complex64::new(1.0, 0.0) / g[(0, 0)]),
        2 => {
            let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
            ndarray::array![[g[(1, 1)] / det, -g[(0, 1)] / det], [-g[(1, 0)] / det, g[(0, 0)] / det]]
        }
        _ => unreachable!(),
    }
}

/// Reverses block order, moving the rows of `u` and columns of `v` along.
fn reversed(inst: &finrank::Instance) -> (ProductState, ProductState, LowRankOperator) {
    let rev = |s: &ProductState| ProductState::new(s.factors().iter().rev().cloned().collect()).unwrap();
    let order: Vec<usize> = (0..inst.ket.n_blocks())
        .rev()
        .flat_map(|mu| inst.ket.block_range(mu))
        .collect();
    let u = Array2::from_shape_fn((order.len(), inst.op.k()), |(i, a)| inst.op.u()[(order[i], a)]);
    let v = Array2::from_shape_fn((inst.op.k(), order.len()), |(a, j)| inst.op.v()[(a, order[j])]);
    (rev(&inst.bra), rev(&inst.ket), LowRankOperator::new(u, v).unwrap())
}

#[test]
fn block_order_is_irrelevant_for_even_factors() {
    for stat in [Statistics::Boson, Statistics::Fermion] {
        for seed in 0..40 {
            let inst = instance(stat, seed, true);
            let (bra, ket, op) = reversed(&inst);
            let a = expectation(&inst.bra, &inst.ket, &inst.op).unwrap().value;
            let b = expectation(&bra, &ket, &op).unwrap().value;
            let (rel, ok, _) = compare(b, a, ORACLE_TOLERANCE);
            assert!(ok, "{stat} seed {seed}: rel {rel:e}");
        }
    }
}

#[test]
fn conjugation_symmetry() {
    for stat in [Statistics::Boson, Statistics::Fermion] {
        for seed in 0..40 {
            let mut inst = instance(stat, seed, false);
            inst.ket = inst.bra.clone();
            let a = expectation(&inst.bra, &inst.ket, &inst.op).unwrap().value;
            let b = expectation(&inst.bra, &inst.ket, &inst.op.adjoint()).unwrap().value;
            let (rel, ok, _) = compare(b.conj(), a, ORACLE_TOLERANCE);
            assert!(ok, "{stat} seed {seed}: rel {rel:e}");
        }
    }
}

fn random_factor(stat: Statistics, d: usize, seed: u64) -> FactorState {
    let cfg = GenConfig {
        d,
        statistics: stat,
        n_max: if stat == Statistics::Fermion { d as u32 } else { 2 },
        ..GenConfig::default()
    };
    let inst = generate_instance(&cfg, seed).unwrap().validate().unwrap();
    inst.bra.factors()[0].clone()
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let t = (seed as f64 + 1.0) * (1.3 + i as f64) * (0.7 + j as f64);
        Complex64::new(t.sin(), (1.7 * t).cos())
    })
}

fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|x| x.conj())
}

#[test]
fn raising_is_adjoint_of_lowering() {
    // ⟨φ| Π v̂^n/n! |ψ⟩ = ⟨(Π v̂^n/n!)† φ|ψ⟩; the adjoint string has reversed
    // operator order, which costs (−1)^{s(s−1)/2} for s distinct fermionic
    // operators.
    for stat in [Statistics::Boson, Statistics::Fermion] {
        for seed in 0..30 {
            let d = 2;
            let phi = random_factor(stat, d, seed);
            let psi = random_factor(stat, d, seed + 1000);
            let v = random_matrix(2, d, seed);
            let u = adjoint(&v);
            let max = if stat == Statistics::Fermion { 1 } else { 2 };
            for n0 in 0..=max {
                for n1 in 0..=max {
                    let n = [n0, n1];
                    let lhs = phi.inner(&apply_lowering_string(&psi, &v, &n));
                    let s = n0 + n1;
                    let sign = if stat == Statistics::Fermion && (s * (s.max(1) - 1) / 2) % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    let rhs = apply_raising_string(&phi, &u, &n).inner(&psi) * sign;
                    assert!((lhs - rhs).norm() < 1e-12, "{stat} seed {seed} n {n:?}: {lhs} vs {rhs}");
                }
            }
        }
    }
}

#[test]
fn bosonic_factor_coefficients_match_fock_matrix_elements() {
    // Coefficient of z^m z*^n equals ⟨bra| Π X^m/m! Π Y^n/n! |ket⟩ with
    // X_α = Σ u_iα a†_i and Y_α = Σ v_αj a_j, evaluated on a dense Fock basis.
    for seed in 0..20u64 {
        let d = 2;
        let k = 2;
        let bra = random_factor(Statistics::Boson, d, seed);
        let ket = random_factor(Statistics::Boson, d, seed + 500);
        let u = random_matrix(d, k, seed);
        let v = random_matrix(k, d, seed + 7);
        let layout = ProductState::new(vec![ket.clone()]).unwrap();
        let op = LowRankOperator::new(u.clone(), v.clone()).unwrap();
        let slice = op.block_slice(&layout).unwrap().slices.remove(0);
        let mut c = OpCounter::default();
        let f = build_factor(&bra, &ket, &slice, &mut c);
        let p = f.as_boson().unwrap();

        let basis = FockBasis::new(Statistics::Boson, d, 4);
        let embed = |s: &FactorState| {
            FockVector::from_product(&basis, &ProductState::new(vec![s.clone()]).unwrap()).unwrap()
        };
        let bra_v = embed(&bra);
        let ket_v = embed(&ket);
        let apply = |vec: &[Complex64], alpha: usize, raise: bool| -> Vec<Complex64> {
            let mut out = vec![Complex64::new(0.0, 0.0); basis.len()];
            for j in 0..d {
                let (coef, img) = if raise {
                    (u[(j, alpha)], basis.create(vec, j))
                } else {
                    (v[(alpha, j)], basis.annihilate(vec, j))
                };
                for (o, x) in out.iter_mut().zip(img) {
                    *o += coef * x;
                }
            }
            out
        };
        for m in 0..=2u32 {
            for m2 in 0..=(2 - m) {
                for n in 0..=2u32 {
                    for n2 in 0..=(2 - n) {
                        let mut w = ket_v.amps().to_vec();
                        let mut norm = 1.0;
                        for (alpha, count) in [(1, n2), (0, n)] {
                            for r in 1..=count {
                                w = apply(&w, alpha, false);
                                norm *= r as f64;
                            }
                        }
                        for (alpha, count) in [(1, m2), (0, m)] {
                            for r in 1..=count {
                                w = apply(&w, alpha, true);
                                norm *= r as f64;
                            }
                        }
                        let expected: Complex64 = bra_v
                            .amps()
                            .iter()
                            .zip(&w)
                            .map(|(a, b)| a.conj() * b)
                            .sum::<Complex64>()
                            / norm;
                        let got = p.coeff(&Bidegree::new(vec![m, m2], vec![n, n2]));
                        assert!(
                            (got - expected).norm() < 1e-12,
                            "seed {seed} m=({m},{m2}) n=({n},{n2}): {got} vs {expected}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn single_boson_factor_matches_general_builder() {
    for seed in 0..100u64 {
        let k = 1 + (seed % 3) as usize;
        let u = random_matrix(1, k, seed);
        let v = random_matrix(k, 1, seed + 3);
        let state = FactorState::single_particle(Statistics::Boson);
        let layout = ProductState::new(vec![state.clone()]).unwrap();
        let op = LowRankOperator::new(u.clone(), v.clone()).unwrap();
        let slice = op.block_slice(&layout).unwrap().slices.remove(0);
        let mut c = OpCounter::default();
        let general = build_factor(&state, &state, &slice, &mut c);
        let fast = build_factor_single_boson(&u.row(0).to_vec(), &v.column(0).to_vec());
        assert_poly_close(general.as_boson().unwrap(), fast.as_boson().unwrap(), 1e-12);
    }
}
