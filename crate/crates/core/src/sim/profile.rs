use rayon::prelude::*;

use super::placement::scaled;
use super::{stream_rng, SimError, PROFILE};
use crate::bounds::SystemConfig;
use crate::gf::PrimeField;
use crate::linalg::{sum_space, Matrix, Subspace};
use crate::rational::{int, Rational};

/// Measured ranks of the intersection and the union of the first s of K
/// random γB-dimensional subspaces of F_p^B, per trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalRankProfile {
    pub block: usize,
    /// `intersection[s][trial]`, s ∈ [0:K]
    pub intersection: Vec<Vec<usize>>,
    /// `union[s][trial]`, s ∈ [0:K]
    pub union: Vec<Vec<usize>>,
}

fn mean(xs: &[usize], block: usize) -> f64 {
    xs.iter().sum::<usize>() as f64 / (xs.len() * block) as f64
}

fn hit_rate(xs: &[usize], block: usize, expected: &Rational) -> f64 {
    let hits = xs
        .iter()
        .filter(|&&x| int(x as i64) == expected * int(block as i64))
        .count();
    hits as f64 / xs.len() as f64
}

impl EmpiricalRankProfile {
    pub fn trials(&self) -> usize {
        self.intersection.first().map_or(0, Vec::len)
    }

    /// Mean of rank(∩)/B over trials.
    pub fn mean_tau(&self, s: usize) -> f64 {
        mean(&self.intersection[s], self.block)
    }

    /// Mean of rank(∪)/B over trials.
    pub fn mean_rho(&self, s: usize) -> f64 {
        mean(&self.union[s], self.block)
    }

    /// Fraction of trials whose intersection rank is exactly `expected`·B.
    pub fn tau_hit_rate(&self, s: usize, expected: &Rational) -> f64 {
        hit_rate(&self.intersection[s], self.block, expected)
    }

    pub fn rho_hit_rate(&self, s: usize, expected: &Rational) -> f64 {
        hit_rate(&self.union[s], self.block, expected)
    }
}

pub fn empirical_rank_profile(
    cfg: &SystemConfig,
    block: usize,
    trials: usize,
    seed: u64,
    field: PrimeField,
) -> Result<EmpiricalRankProfile, SimError> {
    if block < 20 || trials < 30 {
        return Err(SimError::InvalidArgument(format!(
            "need B >= 20 and at least 30 trials, got B={block}, trials={trials}"
        )));
    }
    let k = cfg.users();
    let cached = scaled(cfg.gamma(), block, "gamma")?;
    let per_trial: Vec<(Vec<usize>, Vec<usize>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, PROFILE, t as u64, 0);
            let mut dual = Subspace::zero(field, block);
            let mut union = Subspace::zero(field, block);
            let mut inter_dims = vec![block];
            let mut union_dims = vec![0];
            for _ in 0..k {
                let u = Subspace::column_span(&Matrix::random(field, block, cached, &mut rng));
                dual = sum_space(&dual, &u.annihilator()).expect("same ambient space");
                union = sum_space(&union, &u).expect("same ambient space");
                inter_dims.push(block - dual.dim());
                union_dims.push(union.dim());
            }
            (inter_dims, union_dims)
        })
        .collect();
    let transpose = |pick: fn(&(Vec<usize>, Vec<usize>)) -> &Vec<usize>| {
        (0..=k)
            .map(|s| per_trial.iter().map(|t| pick(t)[s]).collect())
            .collect()
    };
    Ok(EmpiricalRankProfile {
        block,
        intersection: transpose(|t| &t.0),
        union: transpose(|t| &t.1),
    })
}
