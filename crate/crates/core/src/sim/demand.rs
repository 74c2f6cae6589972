use super::{stream_rng, DEMAND};
use crate::bounds::SystemConfig;
use crate::gf::PrimeField;
use crate::linalg::{Matrix, Subspace};

/// How the demand matrix is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DemandMode {
    /// User k asks for file min(k, N) (1-based).
    #[default]
    Canonical,
    /// Uniformly random scalar linear functions of rank min(K, N).
    Random,
}

/// Demand matrix D (row k holds user k's coefficients) and a leader set
/// whose rows span the row space of D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMatrix {
    d: Matrix,
    leaders: Vec<usize>,
}

impl DemandMatrix {
    /// Leaders are chosen greedily: the earliest rows that raise the rank.
    pub fn new(d: Matrix) -> Self {
        let mut leaders = Vec::new();
        let mut span = Subspace::zero(d.field(), d.cols());
        for (k, row) in d.iter_rows().enumerate() {
            if !span.contains(row) {
                leaders.push(k);
                span = Subspace::row_span(&d.select_rows(&leaders));
            }
        }
        Self { d, leaders }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn coefficient(&self, user: usize, file: usize) -> u64 {
        self.d.get(user, file)
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn leader_mask(&self) -> u32 {
        self.leaders.iter().fold(0, |m, &k| m | 1 << k)
    }

    pub fn rank(&self) -> usize {
        self.leaders.len()
    }
}

pub fn worst_case_demand(
    cfg: &SystemConfig,
    mode: DemandMode,
    seed: u64,
    field: PrimeField,
) -> DemandMatrix {
    let (k, n) = (cfg.users(), cfg.files());
    match mode {
        DemandMode::Canonical => {
            let d = Matrix::from_fn(field, k, n, |i, j| u64::from(j == i.min(n - 1)));
            DemandMatrix::new(d)
        }
        DemandMode::Random => {
            let mut rng = stream_rng(seed, DEMAND, 0, 0);
            loop {
                let dm = DemandMatrix::new(Matrix::random(field, k, n, &mut rng));
                if dm.rank() == cfg.r() {
                    return dm;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;
    use crate::rational::frac;

    fn cfg(k: usize, n: usize) -> SystemConfig {
        SystemConfig::new(k, n, frac(1, 2)).unwrap()
    }

    #[test]
    fn canonical_square_is_identity() {
        let f = PrimeField::default();
        let d = worst_case_demand(&cfg(3, 3), DemandMode::Canonical, 0, f);
        assert_eq!(d.matrix(), &Matrix::identity(f, 3));
        assert_eq!(d.leaders(), &[0, 1, 2]);
    }

    #[test]
    fn canonical_with_more_users_than_files() {
        let f = PrimeField::default();
        let d = worst_case_demand(&cfg(6, 3), DemandMode::Canonical, 0, f);
        for k in 0..6 {
            let want: Vec<u64> = (0..3).map(|j| u64::from(j == k.min(2))).collect();
            assert_eq!(d.matrix().row(k), &want[..]);
        }
        assert_eq!(d.leaders(), &[0, 1, 2]);
        assert_eq!(d.rank(), 3);
    }

    #[test]
    fn random_demands_have_full_rank() {
        let f = PrimeField::default();
        for seed in 0..50 {
            let d = worst_case_demand(&cfg(3, 3), DemandMode::Random, seed, f);
            assert_eq!(rank(d.matrix()), 3);
            let lead = d.matrix().select_rows(d.leaders());
            assert_eq!(rank(&lead), 3);
        }
        let wide = worst_case_demand(&cfg(5, 2), DemandMode::Random, 4, f);
        assert_eq!(wide.rank(), 2);
    }
}
