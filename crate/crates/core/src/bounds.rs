//! Closed-form memory–load curves: the two converse bounds, the piecewise
//! closed forms of the 1-LinP load, the centralized YMA points, decentralized
//! uncoded placement and MDS-precoded placement.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{binom, frac, int, max_q, min_q, pos, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("no MDS rate in (0, 1] balances the decoding equation")]
    NoFeasibleTheta,
    #[error("MDS rate {0} admits no (s', eta') solution")]
    InfeasibleTheta(f64),
}

/// K active users, N files, memory ratio γ = M/N.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemConfig {
    users: usize,
    files: usize,
    gamma: Rational,
}

impl SystemConfig {
    pub fn new(users: usize, files: usize, gamma: Rational) -> Result<Self, BoundsError> {
        if users == 0 || files == 0 {
            return Err(BoundsError::InvalidConfig(format!(
                "need K >= 1 and N >= 1, got K={users}, N={files}"
            )));
        }
        if gamma < Rational::zero() || gamma > Rational::one() {
            return Err(BoundsError::InvalidConfig(format!("gamma {gamma} outside [0, 1]")));
        }
        Ok(Self { users, files, gamma })
    }

    /// Same users and files at another memory ratio.
    pub fn with_gamma(&self, gamma: Rational) -> Result<Self, BoundsError> {
        Self::new(self.users, self.files, gamma)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    /// r = min(K, N)
    pub fn r(&self) -> usize {
        self.users.min(self.files)
    }

    fn k(&self) -> i64 {
        self.users as i64
    }

    fn ri(&self) -> i64 {
        self.r() as i64
    }

    /// Normalized generic rank of the intersection of s cache subspaces.
    pub fn tau(&self, s: usize) -> Rational {
        pos(Rational::one() - int(s as i64) * (Rational::one() - &self.gamma))
    }

    /// Normalized generic rank of the union of s cache subspaces.
    pub fn rho(&self, s: usize) -> Rational {
        min_q(int(s as i64) * &self.gamma, Rational::one())
    }

    /// Fraction of a file cached by exactly a given s-subset under uncoded
    /// decentralized placement.
    pub fn beta(&self, s: usize) -> Rational {
        let g = &self.gamma;
        let ng = Rational::one() - g;
        g.pow(s as i32) * ng.pow((self.users - s) as i32)
    }

    /// Multicast message count weight c(t) = C(K, t+1) - C(K-r, t+1).
    pub fn multicast_weight(&self, t: usize) -> i64 {
        let t = t as i64;
        binom(self.k(), t + 1) - binom(self.k() - self.ri(), t + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub tau: Vec<Rational>,
    pub rho: Vec<Rational>,
    pub beta: Vec<Rational>,
}

pub fn rank_profile(cfg: &SystemConfig) -> RankProfile {
    let range = 0..=cfg.users();
    RankProfile {
        tau: range.clone().map(|s| cfg.tau(s)).collect(),
        rho: range.clone().map(|s| cfg.rho(s)).collect(),
        beta: range.map(|s| cfg.beta(s)).collect(),
    }
}

/// Δ1 = Σ_{t=1}^{r} [1 - tγ]^+
pub fn converse_delta1(cfg: &SystemConfig) -> Rational {
    (1..=cfg.r())
        .map(|t| pos(Rational::one() - int(t as i64) * cfg.gamma()))
        .sum()
}

/// Δ2, defined for K >= 3 and N >= 2.
pub fn converse_delta2(cfg: &SystemConfig) -> Result<Rational, BoundsError> {
    if cfg.users() < 3 || cfg.files() < 2 {
        return Err(BoundsError::PreconditionViolation(format!(
            "delta2 needs K >= 3 and N >= 2, got K={}, N={}",
            cfg.users(),
            cfg.files()
        )));
    }
    let k = cfg.users();
    let g = cfg.gamma();
    let one_minus = Rational::one() - g;
    let km1 = int(k as i64 - 1);

    let mut v = int(cfg.ri()) * &one_minus;
    v -= (cfg.tau(k - 1) - cfg.tau(k)) / &km1;
    for j in 3..=cfg.r() {
        v -= cfg.rho(j) - g;
    }
    let tail: Rational = (3..=k)
        .map(|j| min_q(g + cfg.tau(j - 2), one_minus.clone()))
        .sum();
    v -= tail / km1;
    Ok(v)
}

/// max(Δ1, Δ2) with Δ2 included only where it is defined.
pub fn converse(cfg: &SystemConfig) -> Rational {
    let d1 = converse_delta1(cfg);
    match converse_delta2(cfg) {
        Ok(d2) => max_q(d1, d2),
        Err(_) => d1,
    }
}

/// Memory regimes with a closed-form 1-LinP load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table1Row {
    /// γ ∈ [0, 1/K]
    SmallMemory,
    /// γ ∈ [1/K, 1/2]
    LowerMiddle,
    /// γ = t/(t+1), t ∈ [1:K-3]
    Corner(usize),
    /// γ ∈ [(K-2)/(K-1), (K-1)/K]
    UpperMiddle,
    /// γ ∈ [(K-1)/K, 1]
    LargeMemory,
}

impl Table1Row {
    /// Whether the converse max(Δ1, Δ2) is known to meet the load here.
    pub fn meets_converse(&self, users: usize) -> bool {
        match self {
            Table1Row::SmallMemory | Table1Row::UpperMiddle | Table1Row::LargeMemory => true,
            Table1Row::LowerMiddle => users <= 3,
            Table1Row::Corner(_) => false,
        }
    }
}

/// Every closed-form row whose range contains γ (ranges share endpoints).
pub fn table1_rows(cfg: &SystemConfig) -> Vec<Table1Row> {
    let k = cfg.k();
    let g = cfg.gamma();
    let mut rows = Vec::new();
    if k < 2 || cfg.files() < 2 {
        return rows;
    }
    if *g <= frac(1, k) {
        rows.push(Table1Row::SmallMemory);
    }
    if frac(1, k) <= *g && *g <= frac(1, 2) {
        rows.push(Table1Row::LowerMiddle);
    }
    for t in 1..=(k - 3) {
        if *g == frac(t, t + 1) {
            rows.push(Table1Row::Corner(t as usize));
        }
    }
    if frac(k - 2, k - 1) <= *g && *g <= frac(k - 1, k) {
        rows.push(Table1Row::UpperMiddle);
    }
    if frac(k - 1, k) <= *g {
        rows.push(Table1Row::LargeMemory);
    }
    rows
}

pub fn table1_row_load(cfg: &SystemConfig, row: Table1Row) -> Rational {
    let k = cfg.k();
    let r = cfg.ri();
    let g = cfg.gamma();
    let one_minus = Rational::one() - g;
    match row {
        Table1Row::SmallMemory => int(r) - g * int(r * (r + 1)) / int(2),
        Table1Row::LowerMiddle => one_minus * int(r * (2 * k - r - 1)) / int(2 * k - 2),
        Table1Row::Corner(t) => {
            let c = cfg.multicast_weight(t);
            let t = t as i64;
            frac(c, (t + 1) * binom(k - 1, t))
        }
        Table1Row::UpperMiddle => int(2) - g * int(2 * k - 1) / int(k - 1),
        Table1Row::LargeMemory => one_minus,
    }
}

/// Closed-form 1-LinP load when γ falls in one of the tabulated regimes.
pub fn table1_load(cfg: &SystemConfig) -> Option<Rational> {
    table1_rows(cfg)
        .first()
        .map(|&row| table1_row_load(cfg, row))
}

/// Δ^(U) = (1-γ)/γ · (1 - (1-γ)^r), and r at γ = 0.
pub fn uncoded_load(cfg: &SystemConfig) -> Rational {
    let g = cfg.gamma();
    if g.is_zero() {
        return int(cfg.ri());
    }
    let one_minus = Rational::one() - g;
    &one_minus / g * (Rational::one() - one_minus.pow(cfg.r() as i32))
}

/// A value in a tradeoff series.
#[derive(Debug, Clone, PartialEq)]
pub enum Load {
    Exact(Rational),
    Real(f64),
}

impl Load {
    pub fn as_f64(&self) -> f64 {
        match self {
            Load::Exact(q) => to_f64(q),
            Load::Real(x) => *x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    scheme: String,
    points: Vec<(Rational, Load)>,
}

impl TradeoffCurve {
    /// Checks that γ is strictly increasing and every load lies in
    /// [0, min(N, K)].
    pub fn new(
        scheme: impl Into<String>,
        points: Vec<(Rational, Load)>,
        max_load: usize,
    ) -> Result<Self, BoundsError> {
        let scheme = scheme.into();
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(BoundsError::InvalidConfig(format!(
                    "{scheme}: gamma values not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        let cap = max_load as f64 + 1e-9;
        for (g, l) in &points {
            let v = l.as_f64();
            if !(-1e-9..=cap).contains(&v) {
                return Err(BoundsError::InvalidConfig(format!(
                    "{scheme}: load {v} at gamma {g} outside [0, {max_load}]"
                )));
            }
        }
        Ok(Self { scheme, points })
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn points(&self) -> &[(Rational, Load)] {
        &self.points
    }
}

/// The K+1 centralized corner points (t/K, (C(K,t+1) - C(K-r,t+1)) / C(K,t)).
pub fn yma_points(cfg: &SystemConfig) -> Vec<(Rational, Rational)> {
    let k = cfg.k();
    (0..=cfg.users())
        .map(|t| {
            let load = frac(cfg.multicast_weight(t), binom(k, t as i64));
            (frac(t as i64, k), load)
        })
        .collect()
}

fn lower_hull(points: &[(Rational, Rational)]) -> Vec<(Rational, Rational)> {
    let mut hull: Vec<(Rational, Rational)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // drop b if it is on or above the chord a -> p
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            if cross <= Rational::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull
}

/// Lower convex envelope of the YMA corner points.
pub fn yma_curve(cfg: &SystemConfig) -> TradeoffCurve {
    let hull = lower_hull(&yma_points(cfg));
    let points = hull.into_iter().map(|(g, l)| (g, Load::Exact(l))).collect();
    TradeoffCurve::new("yma", points, cfg.r()).expect("YMA corner points are well formed")
}

/// Value of the YMA envelope at the configured γ.
pub fn yma_envelope_at(cfg: &SystemConfig) -> Rational {
    let hull = lower_hull(&yma_points(cfg));
    let g = cfg.gamma();
    for w in hull.windows(2) {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        if x0 <= g && g <= x1 {
            return y0 + (y1 - y0) * (g - x0) / (x1 - x0);
        }
    }
    hull.last().map(|p| p.1.clone()).unwrap_or_else(Rational::zero)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdsOptimum {
    pub theta: f64,
    pub load: f64,
}

/// Number of grid cells for the MDS rate search.
pub const MDS_GRID: usize = 10_000;

/// Load of the MDS-precoded decentralized scheme at a fixed rate θ.
pub fn mds_load_at(cfg: &SystemConfig, theta: f64) -> Result<f64, BoundsError> {
    let k = cfg.users();
    let g = to_f64(cfg.gamma());
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(BoundsError::InfeasibleTheta(theta));
    }
    let gp = g * theta;
    let need = 1.0 - g;
    let beta = |s: usize| gp.powi(s as i32) * (1.0 - gp).powi((k - s) as i32) / theta;

    let mut received = 0.0;
    let mut load = 0.0;
    for s in (0..k).rev() {
        let weight = binom(k as i64 - 1, s as i64) as f64;
        let avail = weight * beta(s);
        let c = cfg.multicast_weight(s) as f64;
        if received + avail >= need - 1e-15 {
            // partial block at s' = s; written without β'_s so tiny θ stays stable
            let rest = (need - received).max(0.0);
            return Ok(load + rest * c / weight);
        }
        received += avail;
        load += c * beta(s);
    }
    Err(BoundsError::InfeasibleTheta(theta))
}

/// Minimize the MDS load over θ ∈ (0, 1]: a uniform grid followed by a
/// ternary refinement around the best cell. The objective is not convex in
/// θ, so the grid does the real work.
pub fn mds_load(cfg: &SystemConfig) -> Result<MdsOptimum, BoundsError> {
    if cfg.gamma().is_zero() {
        return Err(BoundsError::PreconditionViolation("MDS load needs gamma > 0".into()));
    }
    let eval = |t: f64| mds_load_at(cfg, t).ok();
    let mut best: Option<(usize, f64)> = None;
    for i in 1..=MDS_GRID {
        let t = i as f64 / MDS_GRID as f64;
        if let Some(v) = eval(t) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (i, grid_load) = best.ok_or(BoundsError::NoFeasibleTheta)?;
    let step = 1.0 / MDS_GRID as f64;
    let mut lo = (i as f64 - 1.0) * step;
    let mut hi = ((i as f64 + 1.0) * step).min(1.0);
    let mut best = MdsOptimum {
        theta: i as f64 * step,
        load: grid_load,
    };
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        match (eval(m1), eval(m2)) {
            (Some(a), Some(b)) => {
                if a <= b {
                    hi = m2;
                } else {
                    lo = m1;
                }
                for (t, v) in [(m1, a), (m2, b)] {
                    if v < best.load {
                        best = MdsOptimum { theta: t, load: v };
                    }
                }
            }
            _ => break,
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, n: usize, g: Rational) -> SystemConfig {
        SystemConfig::new(k, n, g).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(0, 3, frac(1, 2)).is_err());
        assert!(SystemConfig::new(3, 0, frac(1, 2)).is_err());
        assert!(SystemConfig::new(3, 3, frac(3, 2)).is_err());
        assert!(SystemConfig::new(3, 3, frac(-1, 2)).is_err());
        assert_eq!(cfg(6, 3, frac(1, 2)).r(), 3);
    }

    #[test]
    fn delta1_examples() {
        assert_eq!(converse_delta1(&cfg(3, 3, int(0))), int(3));
        // [1 - 1/2] + [1 - 1] + [1 - 3/2]^+
        assert_eq!(converse_delta1(&cfg(3, 3, frac(1, 2))), frac(1, 2));
        assert_eq!(converse_delta1(&cfg(5, 4, int(1))), int(0));
    }

    #[test]
    fn delta2_examples() {
        assert_eq!(converse_delta2(&cfg(3, 3, frac(2, 5))).unwrap(), frac(9, 10));
        let k5 = cfg(5, 5, frac(3, 4));
        assert_eq!(converse_delta2(&k5).unwrap(), frac(5, 16));
        // must equal 2 - γ(2K-1)/(K-1)
        assert_eq!(frac(5, 16), int(2) - frac(3, 4) * frac(9, 4));
        assert!(matches!(
            converse_delta2(&cfg(3, 1, frac(1, 2))),
            Err(BoundsError::PreconditionViolation(_))
        ));
        assert!(converse_delta2(&cfg(2, 3, frac(1, 2))).is_err());
    }

    #[test]
    fn delta2_with_two_files_uses_empty_rho_sum() {
        // r = 2 so the ρ sum is empty; frozen from an independent evaluation
        assert_eq!(converse_delta2(&cfg(5, 2, frac(3, 4))).unwrap(), frac(5, 16));
        assert_eq!(converse_delta2(&cfg(3, 2, frac(2, 5))).unwrap(), frac(9, 10));
    }

    #[test]
    fn table1_examples() {
        assert_eq!(table1_load(&cfg(3, 3, frac(1, 3))), Some(int(1)));
        assert_eq!(table1_load(&cfg(3, 3, frac(1, 2))), Some(frac(3, 4)));
        assert_eq!(table1_load(&cfg(4, 2, int(1))), Some(int(0)));
        assert_eq!(table1_load(&cfg(6, 3, frac(1, 2))), Some(frac(6, 5)));
        assert_eq!(table1_load(&cfg(6, 3, frac(2, 3))), Some(frac(19, 30)));
        assert_eq!(table1_load(&cfg(6, 6, frac(3, 4))), Some(frac(3, 8)));
        // between rows: absent
        assert_eq!(table1_load(&cfg(6, 6, frac(3, 5))), None);
        assert_eq!(table1_load(&cfg(1, 3, frac(1, 2))), None);
    }

    #[test]
    fn overlapping_rows_agree() {
        for k in 2..=8 {
            for n in 2..=8 {
                for i in 0..=120 {
                    let c = cfg(k, n, frac(i, 120));
                    let loads: Vec<Rational> =
                        table1_rows(&c).into_iter().map(|r| table1_row_load(&c, r)).collect();
                    assert!(loads.windows(2).all(|w| w[0] == w[1]), "K={k} N={n} {i}/120");
                }
            }
        }
    }

    #[test]
    fn uncoded_examples() {
        assert_eq!(uncoded_load(&cfg(3, 3, int(0))), int(3));
        assert_eq!(uncoded_load(&cfg(3, 3, frac(1, 2))), frac(7, 8));
        assert_eq!(uncoded_load(&cfg(3, 3, int(1))), int(0));
        let near_zero = uncoded_load(&cfg(4, 3, frac(1, 1_000_000)));
        assert!((to_f64(&near_zero) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn yma_points_examples() {
        let pts = yma_points(&cfg(3, 3, int(0)));
        assert_eq!(pts[0], (int(0), int(3)));
        assert_eq!(pts[1], (frac(1, 3), int(1)));
        assert_eq!(pts[3], (int(1), int(0)));
        let k6 = yma_points(&cfg(6, 3, int(0)));
        assert_eq!(k6[0], (int(0), int(3)));
    }

    #[test]
    fn yma_envelope_is_convex_and_decreasing() {
        for k in 1..=8 {
            for n in 1..=8 {
                let c = cfg(k, n, int(0));
                let curve = yma_curve(&c);
                let pts: Vec<(Rational, Rational)> = curve
                    .points()
                    .iter()
                    .map(|(g, l)| match l {
                        Load::Exact(q) => (g.clone(), q.clone()),
                        Load::Real(_) => unreachable!(),
                    })
                    .collect();
                for w in pts.windows(2) {
                    assert!(w[1].1 <= w[0].1);
                }
                for w in pts.windows(3) {
                    let s1 = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                    let s2 = (&w[2].1 - &w[1].1) / (&w[2].0 - &w[1].0);
                    assert!(s1 < s2, "K={k} N={n}");
                }
            }
        }
    }

    #[test]
    fn rank_profile_examples() {
        let p = rank_profile(&cfg(3, 3, frac(3, 5)));
        assert_eq!(p.tau[2], frac(1, 5));
        assert_eq!(p.tau[0], int(1));
        assert_eq!(p.rho[0], int(0));
        let q = rank_profile(&cfg(3, 3, frac(1, 4)));
        assert_eq!(q.beta[2], frac(3, 64));
        assert_eq!(rank_profile(&cfg(3, 3, frac(2, 5))).tau[3], int(0));
    }

    #[test]
    fn rank_profile_monotonicity() {
        for i in 0..=20 {
            let p = rank_profile(&cfg(6, 6, frac(i, 20)));
            assert!(p.tau.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.rho.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn tradeoff_curve_validation() {
        let bad_order = vec![(frac(1, 2), Load::Exact(int(1))), (frac(1, 3), Load::Exact(int(1)))];
        assert!(TradeoffCurve::new("x", bad_order, 3).is_err());
        let too_big = vec![(frac(1, 2), Load::Real(3.5))];
        assert!(TradeoffCurve::new("x", too_big, 3).is_err());
    }

    #[test]
    fn mds_needs_positive_memory() {
        assert!(mds_load(&cfg(3, 3, int(0))).is_err());
        assert!(mds_load_at(&cfg(3, 3, frac(1, 2)), 0.0).is_err());
        assert!(mds_load_at(&cfg(3, 3, frac(1, 2)), 1.5).is_err());
    }

    #[test]
    fn mds_at_full_rate_is_uncoded() {
        // θ = 1 is plain decentralized placement
        for (k, n) in [(3, 3), (6, 3), (4, 6)] {
            for i in 1..10 {
                let c = cfg(k, n, frac(i, 10));
                let v = mds_load_at(&c, 1.0).unwrap();
                assert!((v - to_f64(&uncoded_load(&c))).abs() < 1e-9, "K={k} N={n} {i}/10");
            }
        }
    }

    #[test]
    fn mds_full_memory_is_free() {
        let m = mds_load(&cfg(4, 4, int(1))).unwrap();
        assert!(m.load.abs() < 1e-12);
    }
}
