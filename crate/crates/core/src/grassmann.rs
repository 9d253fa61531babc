//! The Grassmann algebra on `2k` generators with the Berezin Gaussian
//! average.
//!
//! Generators are interleaved, `g_0 = z_1, g_1 = z*_1, g_2 = z_2, …`, so bit
//! `2α` of a mask marks `z_{α+1}` and bit `2α+1` marks `z*_{α+1}`. A mask
//! stands for its generators multiplied in ascending bit order. With this
//! ordering every complete pair `z_α z*_α` is contiguous and the average
//! takes the value `+1` on every product of complete pairs.

use num_complex::Complex64;

use crate::OpCounter;

const EVEN_BITS: u32 = 0x5555_5555;

#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannElement {
    k: usize,
    coeffs: Vec<Complex64>,
}

/// Bit index of `z_α` (0-based `α`).
pub fn z_bit(alpha: usize) -> u32 {
    1 << (2 * alpha)
}

/// Bit index of `z*_α` (0-based `α`).
pub fn zbar_bit(alpha: usize) -> u32 {
    1 << (2 * alpha + 1)
}

/// `(-1)^{#{(i ∈ a, j ∈ b) : i > j}}`, the sign of writing the generators of
/// `a` followed by those of `b` in ascending order.
pub fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GrassmannElement {
    pub fn zero(k: usize) -> Self {
        assert!(k <= 15, "at most 30 generators fit a mask");
        GrassmannElement {
            k,
            coeffs: vec![Complex64::new(0.0, 0.0); 1 << (2 * k)],
        }
    }

    pub fn one(k: usize) -> Self {
        let mut e = Self::zero(k);
        e.coeffs[0] = Complex64::new(1.0, 0.0);
        e
    }

    /// `c · (product of the generators in `mask`, ascending)`.
    pub fn monomial(k: usize, mask: u32, c: Complex64) -> Self {
        let mut e = Self::zero(k);
        e.coeffs[mask as usize] = c;
        e
    }

    /// A single generator; `index` counts in the interleaved order.
    pub fn generator(k: usize, index: usize) -> Self {
        Self::monomial(k, 1 << index, Complex64::new(1.0, 0.0))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coeff(&self, mask: u32) -> Complex64 {
        self.coeffs[mask as usize]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn set(&mut self, mask: u32, c: Complex64) {
        self.coeffs[mask as usize] = c;
    }

    pub fn add_to(&mut self, mask: u32, c: Complex64) {
        self.coeffs[mask as usize] += c;
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|c| **c != Complex64::new(0.0, 0.0))
            .count()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k);
        GrassmannElement {
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        GrassmannElement {
            k: self.k,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Keeps the monomials of even degree.
    pub fn even_part(&self) -> Self {
        self.filter(|mask| mask.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|mask| mask.count_ones() % 2 == 1)
    }

    /// The grading automorphism: negates odd monomials.
    pub fn parity_flip(&self) -> Self {
        GrassmannElement {
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| if m.count_ones() % 2 == 1 { -c } else { *c })
                .collect(),
        }
    }

    pub fn has_odd_part(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .any(|(m, c)| m.count_ones() % 2 == 1 && *c != Complex64::new(0.0, 0.0))
    }

    fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        GrassmannElement {
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| if keep(m as u32) { *c } else { Complex64::new(0.0, 0.0) })
                .collect(),
        }
    }

    /// Grassmann product. Overlapping masks vanish; disjoint ones pick up
    /// the merge sign. One operation is charged per surviving pair of
    /// nonzero coefficients.
    pub fn multiply(&self, other: &Self, counter: &mut OpCounter) -> Self {
        assert_eq!(self.k, other.k, "Grassmann elements over different k");
        let mut out = Self::zero(self.k);
        let rhs: Vec<(u32, Complex64)> = other
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(m, c)| (m as u32, *c))
            .collect();
        let mut ops = 0u64;
        for (a, ca) in self.coeffs.iter().enumerate() {
            if *ca == Complex64::new(0.0, 0.0) {
                continue;
            }
            let a = a as u32;
            for &(b, cb) in &rhs {
                if a & b != 0 {
                    continue;
                }
                out.coeffs[(a | b) as usize] += ca * cb * merge_sign(a, b);
                ops += 1;
            }
        }
        counter.add(ops);
        out
    }

    /// Berezin Gaussian average: sum of the coefficients of masks made of
    /// complete `(z_α, z*_α)` pairs; everything else integrates to zero.
    pub fn berezin_average(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| {
                let m = *m as u32;
                m & EVEN_BITS == (m >> 1) & EVEN_BITS
            })
            .map(|(_, c)| *c)
            .sum()
    }
}
