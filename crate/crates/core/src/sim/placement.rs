use num_traits::ToPrimitive;

use super::{stream_rng, SimError, MAX_USERS, PLACEMENT};
use crate::bounds::SystemConfig;
use crate::gf::PrimeField;
use crate::linalg::{Matrix, Subspace};
use crate::rational::{int, Rational};

/// How cache matrices relate across files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheSharing {
    /// An independent E_{k,n} for every user and file.
    #[default]
    PerFile,
    /// One E_k per user, reused for every file. Needed for mixed demands:
    /// with independent per-file caches a user holds no common directions
    /// of Σ_n d_{k,n} F_n.
    Shared,
}

/// Random linear placement: user k stores E_{k,n}^T F_n for every file n,
/// with E_{k,n} a uniformly random B x γB matrix of full column rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachePlacement {
    cfg: SystemConfig,
    block: usize,
    seed: u64,
    field: PrimeField,
    sharing: CacheSharing,
    matrices: Vec<Matrix>,
    spaces: Vec<Subspace>,
    annihilators: Vec<Subspace>,
}

impl CachePlacement {
    pub fn cfg(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Symbols per file, B.
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn sharing(&self) -> CacheSharing {
        self.sharing
    }

    /// Cached symbols per file, γB.
    pub fn cached_dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.cols())
    }

    fn idx(&self, user: usize, file: usize) -> usize {
        user * self.cfg.files() + file
    }

    /// E_{k,n}, of shape B x γB.
    pub fn matrix(&self, user: usize, file: usize) -> &Matrix {
        &self.matrices[self.idx(user, file)]
    }

    /// ⟨E_{k,n}⟩ ⊆ F_p^B.
    pub fn space(&self, user: usize, file: usize) -> &Subspace {
        &self.spaces[self.idx(user, file)]
    }

    pub fn annihilator(&self, user: usize, file: usize) -> &Subspace {
        &self.annihilators[self.idx(user, file)]
    }
}

/// Scale a normalized dimension to an integer row count at block length B.
pub(crate) fn scaled(x: &Rational, block: usize, what: &str) -> Result<usize, SimError> {
    let v = x * int(block as i64);
    if !v.is_integer() {
        return Err(SimError::InvalidArgument(format!(
            "{what} = {x} is not a multiple of 1/{block}"
        )));
    }
    v.to_integer()
        .to_usize()
        .ok_or_else(|| SimError::InvalidArgument(format!("{what} = {x} is negative")))
}

/// Draw every E_{k,n} from its own seeded stream, redrawing rank-deficient
/// draws from the same stream.
pub fn place(
    cfg: &SystemConfig,
    block: usize,
    seed: u64,
    field: PrimeField,
) -> Result<CachePlacement, SimError> {
    place_with(cfg, block, seed, field, CacheSharing::PerFile)
}

pub fn place_with(
    cfg: &SystemConfig,
    block: usize,
    seed: u64,
    field: PrimeField,
    sharing: CacheSharing,
) -> Result<CachePlacement, SimError> {
    if block == 0 {
        return Err(SimError::InvalidArgument("block length must be positive".into()));
    }
    if cfg.users() > MAX_USERS {
        return Err(SimError::InvalidArgument(format!(
            "at most {MAX_USERS} users are supported"
        )));
    }
    let cached = scaled(cfg.gamma(), block, "gamma")?;
    let mut matrices: Vec<Matrix> = Vec::with_capacity(cfg.users() * cfg.files());
    let mut spaces: Vec<Subspace> = Vec::with_capacity(matrices.capacity());
    let mut annihilators: Vec<Subspace> = Vec::with_capacity(matrices.capacity());
    for k in 0..cfg.users() {
        for n in 0..cfg.files() {
            if sharing == CacheSharing::Shared && n > 0 {
                let first = k * cfg.files();
                matrices.push(matrices[first].clone());
                spaces.push(spaces[first].clone());
                annihilators.push(annihilators[first].clone());
                continue;
            }
            let mut rng = stream_rng(seed, PLACEMENT, k as u64, n as u64);
            let (e, space) = loop {
                let e = Matrix::random(field, block, cached, &mut rng);
                let space = Subspace::column_span(&e);
                if space.dim() == cached {
                    break (e, space);
                }
            };
            annihilators.push(space.annihilator());
            spaces.push(space);
            matrices.push(e);
        }
    }
    Ok(CachePlacement {
        cfg: cfg.clone(),
        block,
        seed,
        field,
        sharing,
        matrices,
        spaces,
        annihilators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn cfg(g: Rational) -> SystemConfig {
        SystemConfig::new(3, 2, g).unwrap()
    }

    #[test]
    fn no_memory_means_empty_caches() {
        let pl = place(&cfg(int(0)), 12, 1, PrimeField::default()).unwrap();
        assert_eq!(pl.cached_dim(), 0);
        assert_eq!(pl.space(2, 1).dim(), 0);
        assert_eq!(pl.matrix(0, 0).rows(), 12);
    }

    #[test]
    fn full_memory_spans_everything() {
        let pl = place(&cfg(int(1)), 12, 1, PrimeField::default()).unwrap();
        assert_eq!(pl.space(1, 1), &Subspace::full(PrimeField::default(), 12));
    }

    #[test]
    fn same_seed_same_placement() {
        let f = PrimeField::default();
        let a = place(&cfg(frac(1, 3)), 12, 9, f).unwrap();
        let b = place(&cfg(frac(1, 3)), 12, 9, f).unwrap();
        let c = place(&cfg(frac(1, 3)), 12, 10, f).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.matrix(0, 0), c.matrix(0, 0));
    }

    #[test]
    fn caches_have_full_column_rank_even_in_tiny_fields() {
        let f = PrimeField::new(2).unwrap();
        let pl = place(&cfg(frac(1, 2)), 8, 3, f).unwrap();
        for k in 0..3 {
            for n in 0..2 {
                assert_eq!(pl.space(k, n).dim(), 4);
            }
        }
    }

    #[test]
    fn shared_caches_repeat_across_files() {
        let c = cfg(frac(1, 2));
        let pl = place_with(&c, 12, 4, PrimeField::default(), CacheSharing::Shared).unwrap();
        assert_eq!(pl.matrix(2, 0), pl.matrix(2, 1));
        assert_ne!(pl.matrix(1, 0), pl.matrix(2, 0));
        let per_file = place(&c, 12, 4, PrimeField::default()).unwrap();
        assert_eq!(per_file.matrix(2, 0), pl.matrix(2, 0));
    }

    #[test]
    fn rejects_fractional_cache_size() {
        assert!(place(&cfg(frac(1, 3)), 10, 0, PrimeField::default()).is_err());
    }
}
