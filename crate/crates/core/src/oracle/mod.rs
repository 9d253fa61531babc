//! Brute-force references. Everything here is exponential in the particle
//! number and shares no code with the polynomial machinery of the engine.

mod dense;
mod fock;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::model::{ProductState, Statistics};

pub use dense::{dense_determinant, ryser_permanent, MAX_PERMANENT_SIZE};
pub use fock::{apply_multiplicative_extension, multiplicative_extension_matrix, FockBasis, FockVector};

/// Particle cap of [`brute_force_expectation`].
pub const MAX_PARTICLES: u32 = 6;
/// Mode cap of [`brute_force_expectation`].
pub const MAX_MODES: usize = 8;
/// Caps of [`normal_ordered_expansion_check`].
pub const NORMAL_ORDER_MAX_MODES: usize = 6;
pub const NORMAL_ORDER_MAX_PARTICLES: u32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{particles} particles exceed the oracle cap {cap}")]
    ParticleCapExceeded { particles: u32, cap: u32 },
    #[error("{modes} modes exceed the oracle cap {cap}")]
    ModeCapExceeded { modes: usize, cap: usize },
    #[error("matrix size {size} exceeds the cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state does not live in the given basis")]
    BasisMismatch,
}

/// `⟨bra| P(1 + A) |ket⟩` by embedding both product states in the full
/// truncated Fock space and applying `P(1 + A)` by definition.
pub fn brute_force_expectation(
    bra: &ProductState,
    ket: &ProductState,
    a: &Array2<Complex64>,
) -> Result<Complex64, OracleError> {
    let m = ket.mode_count();
    if bra.mode_count() != m {
        return Err(OracleError::DimensionMismatch {
            expected: m,
            found: bra.mode_count(),
        });
    }
    if a.nrows() != m || a.ncols() != m {
        return Err(OracleError::DimensionMismatch {
            expected: m,
            found: a.nrows(),
        });
    }
    if m > MAX_MODES {
        return Err(OracleError::ModeCapExceeded {
            modes: m,
            cap: MAX_MODES,
        });
    }
    let particles = bra.particle_bound().max(ket.particle_bound()) as u32;
    if particles > MAX_PARTICLES {
        return Err(OracleError::ParticleCapExceeded {
            particles,
            cap: MAX_PARTICLES,
        });
    }
    let basis = FockBasis::new(ket.statistics(), m, particles);
    let ket_v = FockVector::from_product(&basis, ket)?;
    let bra_v = FockVector::from_product(&basis, bra)?;
    let u = Array2::<Complex64>::eye(m) + a;
    let image = apply_multiplicative_extension(&u, &ket_v)?;
    Ok(bra_v.inner(&image))
}

/// Largest entry of `Σ_r (1/r!) :(a†Aa)^r: − P(1 + A)` on the basis with
/// at most `particle_cap` particles.
///
/// The normal-ordered powers obey `:(a†Aa)^r: = Σ_{ij} A_{ij} a†_i
/// :(a†Aa)^{r-1}: a_j` for both statistics, and vanish on states with
/// fewer than `r` particles, so the series stops at `r = particle_cap`.
pub fn normal_ordered_expansion_check(
    a: &Array2<Complex64>,
    particle_cap: u32,
    statistics: Statistics,
) -> Result<f64, OracleError> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(OracleError::DimensionMismatch {
            expected: m,
            found: a.ncols(),
        });
    }
    if m > NORMAL_ORDER_MAX_MODES {
        return Err(OracleError::ModeCapExceeded {
            modes: m,
            cap: NORMAL_ORDER_MAX_MODES,
        });
    }
    if particle_cap > NORMAL_ORDER_MAX_PARTICLES {
        return Err(OracleError::ParticleCapExceeded {
            particles: particle_cap,
            cap: NORMAL_ORDER_MAX_PARTICLES,
        });
    }
    let basis = FockBasis::new(statistics, m, particle_cap);
    let b = basis.len();
    let annihilators: Vec<_> = (0..m).map(|j| basis.annihilator_entries(j)).collect();
    let creators: Vec<_> = (0..m).map(|i| basis.creator_entries(i)).collect();

    let mut term = Array2::<Complex64>::eye(b);
    let mut series = term.clone();
    let mut inv_fact = 1.0;
    for r in 1..=particle_cap {
        let mut next = Array2::<Complex64>::zeros((b, b));
        for i in 0..m {
            // S_i = Σ_j A_ij · T a_j
            let mut s_i = Array2::<Complex64>::zeros((b, b));
            for j in 0..m {
                let aij = a[(i, j)];
                if aij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for &(col, target, f) in &annihilators[j] {
                    let w = aij * f;
                    for row in 0..b {
                        s_i[(row, col)] += w * term[(row, target)];
                    }
                }
            }
            // next += a†_i S_i
            for &(src, dst, f) in &creators[i] {
                for col in 0..b {
                    let x = s_i[(src, col)];
                    next[(dst, col)] += x * f;
                }
            }
        }
        term = next;
        inv_fact /= r as f64;
        series = series + &term * Complex64::new(inv_fact, 0.0);
    }

    let u = Array2::<Complex64>::eye(m) + a;
    let direct = multiplicative_extension_matrix(&u, &basis)?;
    Ok((&series - &direct)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FactorState;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_operator_gives_overlap() {
        let f = FactorState::new(
            2,
            Statistics::Fermion,
            [(vec![1, 0], c(0.6, 0.0)), (vec![0, 1], c(0.0, 0.8))],
        )
        .unwrap();
        let s = ProductState::new(vec![f.clone(), f]).unwrap();
        let a = Array2::<Complex64>::zeros((4, 4));
        let v = brute_force_expectation(&s, &s, &a).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn normal_order_residual_vanishes_for_zero_operator() {
        let a = Array2::<Complex64>::zeros((2, 2));
        assert!(normal_ordered_expansion_check(&a, 3, Statistics::Boson).unwrap() < 1e-14);
    }

    #[test]
    fn normal_order_matches_definition() {
        let a = array![[c(0.3, -0.2), c(1.1, 0.4)], [c(-0.7, 0.5), c(0.2, 0.9)]];
        for stat in [Statistics::Boson, Statistics::Fermion] {
            let r = normal_ordered_expansion_check(&a, 3, stat).unwrap();
            assert!(r <= 1e-12, "{stat}: residual {r}");
        }
    }

    #[test]
    fn caps_are_enforced() {
        let a = Array2::<Complex64>::zeros((7, 7));
        assert!(matches!(
            normal_ordered_expansion_check(&a, 2, Statistics::Boson),
            Err(OracleError::ModeCapExceeded { .. })
        ));
        let s = ProductState::new(vec![
            FactorState::new(1, Statistics::Boson, [(vec![4], c(1.0, 0.0))]).unwrap();
            2
        ])
        .unwrap();
        let a = Array2::<Complex64>::zeros((2, 2));
        assert!(matches!(
            brute_force_expectation(&s, &s, &a),
            Err(OracleError::ParticleCapExceeded { .. })
        ));
    }
}
