//! Seeded random instances. The same configuration and seed always give
//! the same file, byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{BlockSpec, InstanceFile, TermSpec};
use crate::model::{Statistics, MAX_RANK};

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub blocks: usize,
    pub d: usize,
    pub k: usize,
    pub statistics: Statistics,
    /// Per-factor particle bound.
    pub n_max: u32,
    /// Every factor is one particle in one mode (requires `d = 1`).
    pub single_particle: bool,
    /// Draw an independent ket instead of reusing the bra.
    pub distinct_ket: bool,
    /// Draw each block's mode count uniformly from `1..=d`.
    pub vary_dims: bool,
    /// Every factor holds exactly its particle bound.
    pub number_conserving: bool,
    /// Bound on the particle count summed over blocks, if any.
    pub total_particle_cap: Option<u32>,
    /// Multiplies every entry of `u` and `v`.
    pub scale: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            blocks: 1,
            d: 1,
            k: 1,
            statistics: Statistics::Boson,
            n_max: 1,
            single_particle: false,
            distinct_ket: false,
            vary_dims: false,
            number_conserving: false,
            total_particle_cap: None,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("fermionic factors on {d} mode(s) cannot hold {n_max} particles")]
    Pauli { d: usize, n_max: u32 },
    #[error("rank {k} outside 1..={max}")]
    Rank { k: usize, max: usize },
    #[error("{field} must be positive")]
    Empty { field: &'static str },
    #[error("single-particle factors need d = 1, got d = {d}")]
    SingleParticleDims { d: usize },
    #[error("scale must be finite")]
    Scale,
}

pub fn generate_instance(cfg: &GenConfig, seed: u64) -> Result<InstanceFile, GenError> {
    if cfg.blocks == 0 {
        return Err(GenError::Empty { field: "N" });
    }
    if cfg.d == 0 {
        return Err(GenError::Empty { field: "d" });
    }
    if cfg.k == 0 || cfg.k > MAX_RANK {
        return Err(GenError::Rank {
            k: cfg.k,
            max: MAX_RANK,
        });
    }
    if !cfg.scale.is_finite() {
        return Err(GenError::Scale);
    }
    if cfg.single_particle && cfg.d != 1 {
        return Err(GenError::SingleParticleDims { d: cfg.d });
    }
    let per_block = if cfg.single_particle { 1 } else { cfg.n_max };
    if cfg.statistics == Statistics::Fermion && per_block as usize > cfg.d {
        return Err(GenError::Pauli {
            d: cfg.d,
            n_max: per_block,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..cfg.blocks)
        .map(|_| {
            if cfg.vary_dims && !cfg.single_particle {
                rng.gen_range(1..=cfg.d)
            } else {
                cfg.d
            }
        })
        .collect();
    let blocks = random_blocks(cfg, &dims, &mut rng);
    let ket_blocks = cfg
        .distinct_ket
        .then(|| random_blocks(cfg, &dims, &mut rng));
    let m: usize = dims.iter().sum();
    let entry = |rng: &mut ChaCha8Rng| {
        [
            cfg.scale * rng.gen_range(-1.0..=1.0),
            cfg.scale * rng.gen_range(-1.0..=1.0),
        ]
    };
    let u = (0..m)
        .map(|_| (0..cfg.k).map(|_| entry(&mut rng)).collect())
        .collect();
    let v = (0..cfg.k)
        .map(|_| (0..m).map(|_| entry(&mut rng)).collect())
        .collect();
    Ok(InstanceFile {
        statistics: cfg.statistics,
        k: cfg.k,
        blocks,
        u,
        v,
        ket_blocks,
    })
}

fn random_blocks(cfg: &GenConfig, dims: &[usize], rng: &mut ChaCha8Rng) -> Vec<BlockSpec> {
    let mut budget = cfg.total_particle_cap.unwrap_or(u32::MAX);
    dims.iter()
        .map(|&d| {
            if cfg.single_particle {
                return BlockSpec {
                    d: 1,
                    terms: vec![TermSpec {
                        occ: vec![1],
                        amp: [1.0, 0.0],
                    }],
                };
            }
            let mut cap = cfg.n_max.min(budget);
            if cfg.statistics == Statistics::Fermion {
                cap = cap.min(d as u32);
            }
            let block = random_block(cfg, d, cap, rng);
            let used = block
                .terms
                .iter()
                .map(|t| t.occ.iter().sum::<i64>() as u32)
                .max()
                .unwrap_or(0);
            budget -= used;
            block
        })
        .collect()
}

fn random_block(cfg: &GenConfig, d: usize, cap: u32, rng: &mut ChaCha8Rng) -> BlockSpec {
    let fermion = cfg.statistics == Statistics::Fermion;
    let mut occs = Vec::new();
    let mut cur = vec![0i64; d];
    occupations(&mut cur, 0, cap as i64, fermion, &mut occs);
    if cfg.number_conserving {
        occs.retain(|o| o.iter().sum::<i64>() == cap as i64);
    }
    let mut chosen: Vec<Vec<i64>> = occs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if chosen.is_empty() {
        chosen.push(occs[rng.gen_range(0..occs.len())].clone());
    }
    let amps: Vec<[f64; 2]> = chosen
        .iter()
        .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
        .collect();
    let norm = amps
        .iter()
        .map(|a| a[0] * a[0] + a[1] * a[1])
        .sum::<f64>()
        .sqrt();
    let norm = if norm > 0.0 { norm } else { 1.0 };
    BlockSpec {
        d,
        terms: chosen
            .into_iter()
            .zip(amps)
            .map(|(occ, a)| TermSpec {
                occ,
                amp: [a[0] / norm, a[1] / norm],
            })
            .collect(),
    }
}

fn occupations(cur: &mut Vec<i64>, pos: usize, rem: i64, fermion: bool, out: &mut Vec<Vec<i64>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    let top = if fermion { rem.min(1) } else { rem };
    for v in 0..=top {
        cur[pos] = v;
        occupations(cur, pos + 1, rem - v, fermion, out);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let cfg = GenConfig {
            blocks: 3,
            d: 2,
            k: 2,
            n_max: 2,
            distinct_ket: true,
            ..GenConfig::default()
        };
        let a = generate_instance(&cfg, 9).unwrap().to_json();
        let b = generate_instance(&cfg, 9).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate_instance(&cfg, 10).unwrap().to_json());
    }

    #[test]
    fn single_particle_family() {
        let cfg = GenConfig {
            blocks: 3,
            single_particle: true,
            ..GenConfig::default()
        };
        let inst = generate_instance(&cfg, 1).unwrap().validate().unwrap();
        assert_eq!(inst.bra.n_blocks(), 3);
        assert!(inst.bra.factors().iter().all(crate::factor::is_single_particle));
    }

    #[test]
    fn fermion_pauli_rejected() {
        let cfg = GenConfig {
            statistics: Statistics::Fermion,
            n_max: 2,
            d: 1,
            ..GenConfig::default()
        };
        assert!(matches!(
            generate_instance(&cfg, 1),
            Err(GenError::Pauli { .. })
        ));
    }

    #[test]
    fn total_particle_cap_respected() {
        let cfg = GenConfig {
            blocks: 4,
            d: 2,
            k: 2,
            n_max: 2,
            number_conserving: true,
            total_particle_cap: Some(5),
            ..GenConfig::default()
        };
        for seed in 0..20 {
            let inst = generate_instance(&cfg, seed).unwrap().validate().unwrap();
            assert!(inst.bra.particle_bound() <= 5);
        }
    }

    #[test]
    fn factors_are_normalized() {
        let cfg = GenConfig {
            blocks: 2,
            d: 2,
            n_max: 2,
            statistics: Statistics::Fermion,
            ..GenConfig::default()
        };
        let inst = generate_instance(&cfg, 4).unwrap().validate().unwrap();
        for f in inst.bra.factors() {
            assert!((f.norm_sq() - 1.0).abs() < 1e-12);
        }
    }
}
