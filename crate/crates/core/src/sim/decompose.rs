use rand::Rng;

use super::placement::scaled;
use super::{stream_rng, subsets_of_size, SimError, DECOMPOSITION};
use crate::linalg::{complement_from, intersect_all_dual, sum_space, LinalgError, Matrix, Subspace};
use crate::lp::LpSolution;
use crate::sim::{CacheSharing, CachePlacement};

// spare random candidates drawn beyond the requested count
const EXTRA_CANDIDATES: usize = 4;

/// Per file n and user subset S, the basis V_{S,n}: λ_{|S|}B vectors inside
/// the intersection of the caches of S (any vectors for S = ∅), jointly
/// independent across all S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceDecomposition {
    users: usize,
    block: usize,
    // blocks[n][mask]
    blocks: Vec<Vec<Matrix>>,
}

impl SubspaceDecomposition {
    pub fn block_length(&self) -> usize {
        self.block
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.blocks.len()
    }

    /// V_{S,n} with S given as a bit mask over users.
    pub fn basis(&self, file: usize, subset: u32) -> &Matrix {
        &self.blocks[file][subset as usize]
    }

    /// All chosen vectors for one file, stacked.
    pub fn all_rows(&self, file: usize) -> Matrix {
        let parts: Vec<&Matrix> = self.blocks[file].iter().collect();
        let field = self.blocks[file][0].field();
        Matrix::vstack(field, self.block, &parts).expect("blocks share the ambient space")
    }
}

/// Random vectors of `space`: uniform combinations of its basis.
fn random_members<R: Rng>(space: &Subspace, count: usize, rng: &mut R) -> Matrix {
    let coeffs = Matrix::random(space.field(), count, space.dim(), rng);
    coeffs.mul(space.basis()).expect("shapes agree")
}

/// Walk subsets from the largest down, taking each V_{S,n} as random vectors
/// of E_{S,n} independent of everything chosen so far for file n; V_{∅,n}
/// comes last from the whole space. The generated order of each block is
/// kept, so truncation takes its leading rows.
pub fn decompose(pl: &CachePlacement, sol: &LpSolution) -> Result<SubspaceDecomposition, SimError> {
    let cfg = pl.cfg();
    let k = cfg.users();
    let b = pl.block();
    let f = pl.field();
    if sol.lambda.len() != k + 1 || sol.eta.len() != k + 1 {
        return Err(SimError::InvalidArgument(format!(
            "solution has {} entries, expected {}",
            sol.lambda.len(),
            k + 1
        )));
    }
    if let Err(e) = sol.check(cfg) {
        return Err(SimError::InvalidArgument(format!("infeasible solution: {e}")));
    }
    let sizes: Vec<usize> = sol
        .lambda
        .iter()
        .enumerate()
        .map(|(s, l)| scaled(l, b, &format!("lambda_{s}")))
        .collect::<Result<_, _>>()?;
    for (s, e) in sol.eta.iter().enumerate() {
        scaled(e, b, &format!("eta_{s}"))?;
    }

    let mut blocks: Vec<Vec<Matrix>> = Vec::with_capacity(cfg.files());
    for n in 0..cfg.files() {
        if pl.sharing() == CacheSharing::Shared && n > 0 {
            // identical caches, so one common decomposition serves every file
            blocks.push(blocks[0].clone());
            continue;
        }
        let mut per_mask = vec![Matrix::zeros(f, 0, b); 1 << k];
        let mut chosen = Subspace::zero(f, b);
        for s in (0..=k).rev() {
            let want = sizes[s];
            if want == 0 {
                continue;
            }
            for mask in subsets_of_size(k, s) {
                let mut rng = stream_rng(pl.seed(), DECOMPOSITION, n as u64, u64::from(mask));
                let region = if mask == 0 {
                    Subspace::full(f, b)
                } else {
                    let dual: Vec<&Subspace> = super::members(mask)
                        .into_iter()
                        .map(|u| pl.annihilator(u, n))
                        .collect();
                    intersect_all_dual(&dual, f, b)
                };
                if region.dim() < want {
                    return Err(SimError::NonGenericPlacement(LinalgError::InsufficientDimension {
                        want,
                        available: region.dim(),
                    }));
                }
                let candidates = random_members(&region, want + EXTRA_CANDIDATES, &mut rng);
                let v = complement_from(&candidates, &chosen, want)
                    .map_err(SimError::NonGenericPlacement)?;
                chosen = sum_space(&chosen, &Subspace::row_span(&v))?;
                per_mask[mask as usize] = v;
            }
        }
        blocks.push(per_mask);
    }
    Ok(SubspaceDecomposition {
        users: k,
        block: b,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::SystemConfig;
    use crate::gf::PrimeField;
    use crate::linalg::rank;
    use crate::lp::{feasible_solution_table1, solve};
    use crate::rational::{frac, int, Rational};
    use crate::sim::{members, place};

    fn setup(k: usize, n: usize, g: Rational, b: usize, seed: u64) -> (CachePlacement, SystemConfig) {
        let cfg = SystemConfig::new(k, n, g).unwrap();
        (place(&cfg, b, seed, PrimeField::default()).unwrap(), cfg)
    }

    fn check_structure(pl: &CachePlacement, sol: &LpSolution, dec: &SubspaceDecomposition) {
        let k = pl.cfg().users();
        let b = pl.block();
        for n in 0..pl.cfg().files() {
            let mut total = 0;
            for mask in 0u32..(1 << k) {
                let v = dec.basis(n, mask);
                let s = mask.count_ones() as usize;
                let want = &sol.lambda[s] * int(b as i64);
                assert_eq!(Rational::from_integer(v.rows().into()), want);
                total += v.rows();
                for u in members(mask) {
                    assert!(pl.space(u, n).contains_all(v), "V not inside cache of user {u}");
                }
            }
            assert_eq!(rank(&dec.all_rows(n)), total, "blocks not jointly independent");
        }
    }

    #[test]
    fn lower_middle_example() {
        let (pl, cfg) = setup(3, 3, frac(2, 5), 30, 5);
        let sol = feasible_solution_table1(&cfg).unwrap();
        let dec = decompose(&pl, &sol).unwrap();
        check_structure(&pl, &sol, &dec);
        for u in 0..3 {
            assert_eq!(dec.basis(0, 1 << u).rows(), 10);
        }
    }

    #[test]
    fn no_memory_gives_only_uncached_block() {
        let (pl, cfg) = setup(3, 3, int(0), 24, 1);
        let sol = solve(&cfg).unwrap();
        let dec = decompose(&pl, &sol).unwrap();
        assert_eq!(dec.basis(1, 0).rows(), 24);
        assert_eq!(rank(dec.basis(1, 0)), 24);
        check_structure(&pl, &sol, &dec);
    }

    #[test]
    fn triple_intersection_block() {
        // λ_3 = λ_2 = 1/4 at γ = 3/4
        let (pl, cfg) = setup(3, 3, frac(3, 4), 24, 2);
        let z = int(0);
        let q = frac(1, 4);
        let sol = LpSolution {
            lambda: vec![z.clone(), z.clone(), q.clone(), q.clone()],
            eta: vec![z.clone(), z.clone(), q.clone(), z.clone()],
            objective: q.clone(),
        };
        sol.check(&cfg).unwrap();
        let dec = decompose(&pl, &sol).unwrap();
        assert_eq!(dec.basis(2, 0b111).rows(), 6);
        check_structure(&pl, &sol, &dec);
    }

    #[test]
    fn deterministic_and_valid_for_lp_vertices() {
        for (k, n, g) in [(4, 4, frac(1, 3)), (6, 3, frac(2, 3)), (3, 3, frac(1, 2))] {
            let cfg = SystemConfig::new(k, n, g).unwrap();
            let sol = solve(&cfg).unwrap();
            let b = crate::sim::block_length(&cfg, &sol, 24);
            let pl = place(&cfg, b, 11, PrimeField::default()).unwrap();
            let dec = decompose(&pl, &sol).unwrap();
            check_structure(&pl, &sol, &dec);
            assert_eq!(dec, decompose(&pl, &sol).unwrap());
        }
    }

    #[test]
    fn rejects_infeasible_or_misscaled_solutions() {
        let (pl, cfg) = setup(3, 3, frac(1, 2), 6, 0);
        // η_1 = 1/4 is not a whole number of rows at B = 6
        let sol = crate::lp::feasible_solution_for_row(&cfg, crate::bounds::Table1Row::LowerMiddle);
        assert!(matches!(decompose(&pl, &sol), Err(SimError::InvalidArgument(_))));
        let mut bad = solve(&cfg).unwrap();
        bad.eta[0] += int(1);
        assert!(matches!(decompose(&pl, &bad), Err(SimError::InvalidArgument(_))));
    }

    #[test]
    fn insufficient_room_is_non_generic() {
        // a tiny field makes caches overlap far more than generic
        let cfg = SystemConfig::new(2, 1, frac(1, 2)).unwrap();
        let f = PrimeField::new(2).unwrap();
        let (z, h) = (int(0), frac(1, 2));
        // each user's whole cache must be a separate block
        let sol = LpSolution {
            lambda: vec![z.clone(), h.clone(), z.clone()],
            eta: vec![z.clone(), h.clone(), z.clone()],
            objective: h.clone(),
        };
        sol.check(&cfg).unwrap();
        let mut saw = false;
        for seed in 0..200 {
            let pl = place(&cfg, 4, seed, f).unwrap();
            match decompose(&pl, &sol) {
                Ok(dec) => check_structure(&pl, &sol, &dec),
                Err(SimError::NonGenericPlacement(_)) => saw = true,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(saw);
    }
}
