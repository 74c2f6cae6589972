use cachecalc_core::bounds::SystemConfig;
use cachecalc_core::gf::PrimeField;
use cachecalc_core::lp::{self, LpSolution};
use cachecalc_core::rational::{binom, frac, int, Rational};
use cachecalc_core::sim::*;
use proptest::prelude::*;

struct Run {
    pl: CachePlacement,
    sol: LpSolution,
    d: DemandMatrix,
    sent: DeliveryTranscript,
    full: DeliveryTranscript,
}

fn run(k: usize, n: usize, g: Rational, seed: u64) -> Run {
    let cfg = SystemConfig::new(k, n, g).unwrap();
    let sol = lp::solve(&cfg).unwrap().tightened();
    let b = block_length(&cfg, &sol, 24);
    let f = PrimeField::default();
    let pl = place(&cfg, b, seed, f).unwrap();
    let dec = decompose(&pl, &sol).unwrap();
    let d = worst_case_demand(&cfg, DemandMode::Canonical, seed, f);
    let sent = deliver(&pl, &dec, &sol, &d);
    let full = deliver_all(&pl, &dec, &sol, &d);
    Run {
        pl,
        sol,
        d,
        sent,
        full,
    }
}

#[test]
fn three_user_loads() {
    assert_eq!(run(3, 3, frac(1, 2), 1).sent.load(), frac(3, 4));
    assert_eq!(run(3, 3, frac(1, 3), 1).sent.load(), int(1));
    assert_eq!(run(3, 3, int(0), 1).sent.load(), int(3));
}

#[test]
fn full_memory_needs_no_transmission() {
    let r = run(3, 3, int(1), 2);
    assert_eq!(r.sent.total_symbols(), 0);
    assert!(r.sent.messages.iter().all(|m| m.rows.rows() == 0));
    assert_eq!(verify_decoding(&r.pl, &r.sent, &r.d), vec![true; 3]);
}

#[test]
fn no_memory_sends_every_uncached_block() {
    let r = run(4, 2, int(0), 3);
    assert_eq!(r.sent.load(), int(2));
    for m in &r.sent.messages {
        let expect = if m.subset.count_ones() == 1 { r.pl.block() } else { 0 };
        assert_eq!(m.rows.rows(), expect);
    }
    assert!(verify_decoding(&r.pl, &r.sent, &r.d).into_iter().all(|ok| ok));
}

#[test]
fn every_user_decodes() {
    for (k, n) in [(2, 2), (3, 3), (4, 2), (5, 3)] {
        for i in 0..=6 {
            let r = run(k, n, frac(i, 6), 10 + i as u64);
            assert!(
                verify_decoding(&r.pl, &r.sent, &r.d).into_iter().all(|ok| ok),
                "K={k} N={n} gamma={i}/6"
            );
            assert_eq!(r.sent.load(), r.sol.objective);
        }
    }
}

#[test]
fn quotient_check_agrees_with_explicit_generators() {
    for (k, n, g) in [(3, 3, frac(1, 2)), (4, 2, frac(1, 4)), (3, 2, frac(2, 3))] {
        let r = run(k, n, g, 5);
        assert_eq!(
            verify_decoding(&r.pl, &r.sent, &r.d),
            verify_decoding_naive(&r.pl, &r.sent, &r.d)
        );
        for i in 0..r.sent.messages.len() {
            let cut = r.sent.without(i);
            assert_eq!(
                verify_decoding(&r.pl, &cut, &r.d),
                verify_decoding_naive(&r.pl, &cut, &r.d)
            );
        }
    }
}

#[test]
fn dropping_any_nonempty_message_breaks_decoding() {
    for seed in 0..3 {
        let r = run(3, 3, frac(1, 2), seed);
        for (i, m) in r.sent.messages.iter().enumerate() {
            if m.rows.rows() == 0 {
                continue;
            }
            let ok = verify_decoding(&r.pl, &r.sent.without(i), &r.d);
            for u in m.users() {
                assert!(!ok[u], "user {u} still decodes without X_{:?}", m.users());
            }
        }
    }
}

#[test]
fn omitted_messages_are_recoverable() {
    // small memory keeps unicast blocks, so users 4..6 lose real messages
    let r = run(6, 3, frac(1, 12), 4);
    let omitted: Vec<&Message> = r
        .full
        .messages
        .iter()
        .filter(|m| r.sent.find(m.subset).is_none())
        .collect();
    assert!(omitted.iter().any(|m| m.subset.count_ones() == 1 && m.rows.rows() > 0));
    assert!(verify_leader_omission(&r.sent, &r.full));
    assert!(verify_decoding(&r.pl, &r.sent, &r.d).into_iter().all(|ok| ok));
}

#[test]
fn distinct_demands_omit_nothing() {
    let r = run(3, 4, frac(1, 3), 4);
    assert_eq!(r.sent, r.full);
    assert!(verify_leader_omission(&r.sent, &r.full));
}

#[test]
fn omission_check_has_power() {
    let r = run(6, 3, frac(1, 12), 4);
    // pretend a leader-intersecting message was never sent
    let idx = r
        .sent
        .messages
        .iter()
        .position(|m| m.rows.rows() > 0)
        .unwrap();
    assert!(!verify_leader_omission(&r.sent.without(idx), &r.full));
}

#[test]
fn message_counts_follow_leader_formula() {
    for (k, n) in [(6, 3), (4, 4), (5, 2)] {
        let r = run(k, n, frac(1, 2), 0);
        let l = r.d.leaders().len() as i64;
        for s in 1..=k {
            let count = r
                .sent
                .messages
                .iter()
                .filter(|m| m.subset.count_ones() as usize == s)
                .count() as i64;
            assert_eq!(count, binom(k as i64, s as i64) - binom(k as i64 - l, s as i64));
        }
    }
}

#[test]
fn symbol_conservation_per_user() {
    for (k, n, g) in [(4, 4, frac(1, 3)), (6, 3, frac(2, 3)), (3, 3, frac(1, 6))] {
        let r = run(k, n, g, 6);
        let b = r.pl.block();
        for u in 0..k {
            let useful: usize = r
                .full
                .messages
                .iter()
                .filter(|m| m.subset >> u & 1 == 1)
                .map(|m| m.rows.rows())
                .sum();
            assert_eq!(r.pl.cached_dim() + useful, b);
        }
    }
}

#[test]
fn transcripts_are_deterministic() {
    let a = run(4, 3, frac(1, 3), 77);
    let b = run(4, 3, frac(1, 3), 77);
    assert_eq!(a.pl, b.pl);
    assert_eq!(a.sent, b.sent);
    let c = run(4, 3, frac(1, 3), 78);
    assert_ne!(a.sent, c.sent);
}

#[test]
fn mixed_demands_need_shared_caches() {
    let cfg = SystemConfig::new(3, 3, frac(1, 3)).unwrap();
    let sol = lp::solve(&cfg).unwrap();
    let mut settings = TrialSettings {
        demand: DemandMode::Random,
        ..TrialSettings::default()
    };
    let per_file = run_trial(&cfg, &sol, &settings, 1).unwrap();
    assert_eq!(per_file.decoded_count(), 0);
    settings.sharing = CacheSharing::Shared;
    let shared = run_trial(&cfg, &sol, &settings, 1).unwrap();
    assert!(shared.all_decoded());
    assert_eq!(shared.load, sol.objective);
}

#[test]
fn random_demands_with_repeated_rows_use_leader_omission() {
    let cfg = SystemConfig::new(5, 2, frac(1, 5)).unwrap();
    let sol = lp::solve(&cfg).unwrap();
    let settings = TrialSettings {
        demand: DemandMode::Random,
        sharing: CacheSharing::Shared,
        ..TrialSettings::default()
    };
    for seed in 0..4 {
        let o = run_trial(&cfg, &sol, &settings, seed).unwrap();
        assert!(o.all_decoded());
        assert!(!o.omission_fallback);
        assert_eq!(o.load, sol.objective);
    }
}

#[test]
fn block_length_is_a_scaled_common_denominator() {
    let cfg = SystemConfig::new(4, 4, frac(1, 3)).unwrap();
    let sol = lp::solve(&cfg).unwrap().tightened();
    let b = block_length(&cfg, &sol, 24);
    assert_eq!(b, 27);
    assert_eq!(block_length(&cfg, &sol, 1), 9);
    assert_eq!(block_length(&cfg, &sol, 28), 36);
}

#[test]
fn empirical_profile_matches_generic_ranks() {
    let cfg = SystemConfig::new(4, 1, frac(2, 5)).unwrap();
    let p = empirical_rank_profile(&cfg, 40, 30, 3, PrimeField::default()).unwrap();
    for s in 0..=4 {
        assert!(p.tau_hit_rate(s, &cfg.tau(s)) >= 0.95, "tau_{s}");
        assert!(p.rho_hit_rate(s, &cfg.rho(s)) >= 0.95, "rho_{s}");
    }
    assert!((p.mean_tau(1) - 0.4).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn trials_realize_the_lp_load(k in 2usize..=5, n in 1usize..=5, i in 0i64..=12, seed in any::<u64>()) {
        let cfg = SystemConfig::new(k, n, frac(i, 12)).unwrap();
        let sol = lp::solve(&cfg).unwrap();
        let o = run_trial(&cfg, &sol, &TrialSettings::default(), seed).unwrap();
        prop_assert!(o.all_decoded());
        prop_assert!(!o.omission_fallback);
        prop_assert_eq!(o.load, sol.objective);
    }
}
