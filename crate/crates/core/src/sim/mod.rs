//! Constructive check of the achievable load: random linear placement over
//! F_p, subspace decomposition driven by an LP solution, signed multicast
//! delivery with leader omission, and per-user decoding by rank checks.

mod decompose;
mod delivery;
mod demand;
mod placement;
mod profile;
mod trial;

pub use decompose::{decompose, SubspaceDecomposition};
pub use delivery::{
    deliver, deliver_all, verify_decoding, verify_decoding_naive, verify_leader_omission,
    DeliveryTranscript, Message,
};
pub use demand::{worst_case_demand, DemandMatrix, DemandMode};
pub use placement::{place, place_with, CachePlacement, CacheSharing};
pub use profile::{empirical_rank_profile, EmpiricalRankProfile};
pub use trial::{block_length, run_trial, TrialOutcome, TrialSettings, MAX_RETRIES};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("placement is not generic enough for the requested decomposition ({0})")]
    NonGenericPlacement(LinalgError),
    #[error("no generic placement found after {0} attempts")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// RNG stream domains
const PLACEMENT: u64 = 1;
const DECOMPOSITION: u64 = 2;
const DEMAND: u64 = 3;
const PROFILE: u64 = 4;

/// Independent ChaCha stream for one (domain, a, b) slot under `seed`.
fn stream_rng(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 56) | ((a & 0x0fff_ffff) << 28) | (b & 0x0fff_ffff));
    rng
}

/// Users in a subset mask, ascending.
pub fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Subset masks of size `s` over `k` users, in increasing numeric order.
pub fn subsets_of_size(k: usize, s: usize) -> impl Iterator<Item = u32> {
    (0u32..(1u32 << k)).filter(move |m| m.count_ones() as usize == s)
}

/// Largest user count the subset bookkeeping supports.
pub const MAX_USERS: usize = 16;
