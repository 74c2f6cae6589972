use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{
    decompose, deliver, deliver_all, place_with, verify_decoding, CacheSharing, verify_leader_omission,
    worst_case_demand, DemandMode, SimError,
};
use crate::bounds::SystemConfig;
use crate::gf::PrimeField;
use crate::lp::LpSolution;
use crate::rational::{denominator_lcm, Rational};

/// Fresh placements tried after a non-generic draw.
pub const MAX_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSettings {
    pub b_min: usize,
    pub demand: DemandMode,
    pub sharing: CacheSharing,
    pub field: PrimeField,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            b_min: 24,
            demand: DemandMode::Canonical,
            sharing: CacheSharing::PerFile,
            field: PrimeField::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub seed: u64,
    pub block: usize,
    pub load: Rational,
    pub total_symbols: usize,
    pub decoded: Vec<bool>,
    /// Placements drawn, including the successful one.
    pub attempts: usize,
    /// Leader omission could not be justified, so every message was sent.
    pub omission_fallback: bool,
}

impl TrialOutcome {
    pub fn all_decoded(&self) -> bool {
        self.decoded.iter().all(|&ok| ok)
    }

    pub fn decoded_count(&self) -> usize {
        self.decoded.iter().filter(|&&ok| ok).count()
    }
}

/// Smallest multiple of lcm(denominators of γ, λ, η) that is at least `b_min`.
pub fn block_length(cfg: &SystemConfig, sol: &LpSolution, b_min: usize) -> usize {
    let all = std::iter::once(cfg.gamma())
        .chain(sol.lambda.iter())
        .chain(sol.eta.iter());
    let unit = denominator_lcm(all);
    let min = BigInt::from(b_min.max(1));
    let mut mult = (&min + &unit - 1u32) / &unit;
    if mult.is_zero() {
        mult = BigInt::from(1);
    }
    (mult * unit).to_usize().expect("block length fits in usize")
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed ^ (attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

/// One end-to-end run: place, decompose, deliver, and check every user.
/// The solution is first tightened to λ = η.
pub fn run_trial(
    cfg: &SystemConfig,
    sol: &LpSolution,
    settings: &TrialSettings,
    seed: u64,
) -> Result<TrialOutcome, SimError> {
    let sol = sol.tightened();
    let block = block_length(cfg, &sol, settings.b_min);
    for attempt in 0..=MAX_RETRIES {
        let s = attempt_seed(seed, attempt);
        let pl = place_with(cfg, block, s, settings.field, settings.sharing)?;
        let dec = match decompose(&pl, &sol) {
            Ok(dec) => dec,
            Err(SimError::NonGenericPlacement(_)) => continue,
            Err(e) => return Err(e),
        };
        let d = worst_case_demand(cfg, settings.demand, s, settings.field);
        let full = deliver_all(&pl, &dec, &sol, &d);
        let mut tr = deliver(&pl, &dec, &sol, &d);
        let omission_fallback = !verify_leader_omission(&tr, &full);
        if omission_fallback {
            tr = full;
        }
        let decoded = verify_decoding(&pl, &tr, &d);
        return Ok(TrialOutcome {
            seed,
            block,
            load: tr.load(),
            total_symbols: tr.total_symbols(),
            decoded,
            attempts: attempt + 1,
            omission_fallback,
        });
    }
    Err(SimError::RetriesExhausted(MAX_RETRIES + 1))
}
