//! Memory–load tradeoffs for decentralized coded caching with random linear
//! placement: closed-form bounds, an exact LP for the achievable load, and a
//! finite-field simulator that builds and decodes the delivery.

pub mod bounds;
pub mod gf;
pub mod linalg;
pub mod lp;
pub mod rational;
pub mod sim;
