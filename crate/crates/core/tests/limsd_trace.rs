use rplsim::defense::limsd::LiMsd;
use rplsim::defense::{DaoVerdict, DefenseConfig, DefenseMode};
use rplsim::rpl::address::{GlobalPrefix, LinkLocal};

fn cfg(beta: u32, node_max: usize) -> DefenseConfig {
    DefenseConfig { mode: DefenseMode::LiMsd, beta, activate_at: 0.0, node_max, ..DefenseConfig::default() }
}

/// Hand-executed counter: forward while the count is below beta, blacklist
/// once it reaches beta, discard from the blacklist afterwards.
fn oracle(beta: u32, calls: usize) -> Vec<DaoVerdict> {
    let mut count = 0;
    let mut listed = false;
    (0..calls)
        .map(|_| {
            if listed {
                DaoVerdict::Discard
            } else if count < beta {
                count += 1;
                DaoVerdict::Forward
            } else {
                listed = true;
                DaoVerdict::BlacklistAndDiscard
            }
        })
        .collect()
}

#[test]
fn single_child_trace_matches_oracle() {
    let mut d = LiMsd::new(&cfg(10, 32));
    let child = LinkLocal::of(5);
    let got: Vec<_> = (0..40).map(|i| d.on_dao(i as f64, child, GlobalPrefix::of(5)).verdict).collect();
    assert_eq!(got, oracle(10, 40));
    assert_eq!(got.iter().filter(|v| **v == DaoVerdict::Forward).count(), 10);
    assert_eq!(got[10], DaoVerdict::BlacklistAndDiscard);
}

#[test]
fn blacklisted_sender_skips_neighbor_scan() {
    let mut d = LiMsd::new(&cfg(10, 32));
    for n in 1..=6 {
        d.on_dao(0.0, LinkLocal::of(n), GlobalPrefix::of(n));
    }
    let child = LinkLocal::of(9);
    for i in 0..11 {
        d.on_dao(1.0 + i as f64, child, GlobalPrefix::of(9));
    }
    for i in 0..20 {
        let dec = d.on_dao(20.0 + i as f64, child, GlobalPrefix::of(9));
        assert_eq!(dec.verdict, DaoVerdict::Discard);
        assert_eq!(dec.comparisons, d.n_blacklist());
        assert_eq!(dec.blacklist_comparisons, dec.comparisons);
    }
}

#[test]
fn relayed_prefix_is_never_counted() {
    let mut d = LiMsd::new(&cfg(3, 32));
    let b = LinkLocal::of(2);
    for i in 0..100 {
        let v = d.on_dao(i as f64, b, GlobalPrefix::of(3)).verdict;
        assert_eq!(v, DaoVerdict::ForwardUncounted);
    }
    assert_eq!(d.n_blacklist(), 0);
    assert_eq!(d.neighbors()[0].dao_count, 0);
}

#[test]
fn work_bound_holds_for_every_table_size() {
    let node_max = DefenseConfig::default().node_max;
    for t_child in 1..=node_max {
        let mut d = LiMsd::new(&cfg(2, node_max));
        for n in 1..=t_child {
            let dec = d.on_dao(0.0, LinkLocal::of(n), GlobalPrefix::of(n));
            assert!(dec.comparisons <= dec.bound);
        }
        assert_eq!(d.t_child(), t_child);
        // blacklist every third child
        for n in (1..=t_child).step_by(3) {
            for _ in 0..3 {
                d.on_dao(1.0, LinkLocal::of(n), GlobalPrefix::of(n));
            }
        }
        for n in 1..=t_child + 2 {
            let bound = d.n_blacklist() + d.t_child();
            let dec = d.on_dao(2.0, LinkLocal::of(n), GlobalPrefix::of(n));
            assert_eq!(dec.bound, bound);
            assert!(dec.comparisons <= bound, "t_child {t_child}, sender {n}: {} > {bound}", dec.comparisons);
        }
    }
}

#[test]
fn activation_and_reinit() {
    let c = DefenseConfig { activate_at: 120.0, reinit_period: 100.0, ..cfg(1, 32) };
    let mut d = LiMsd::new(&c);
    let s = LinkLocal::of(4);
    for t in 0..50 {
        assert_eq!(d.on_dao(t as f64, s, GlobalPrefix::of(4)).verdict, DaoVerdict::Forward);
    }
    assert_eq!(d.init_calls, 1);
    assert_eq!(d.neighbors()[0].dao_count, 50);
    // tables were reset at 100 s, so one more DAO is allowed
    assert_eq!(d.on_dao(110.0, s, GlobalPrefix::of(4)).verdict, DaoVerdict::Forward);
    assert_eq!(d.init_calls, 2);
    assert_eq!(d.on_dao(120.0, s, GlobalPrefix::of(4)).verdict, DaoVerdict::BlacklistAndDiscard);
    assert_eq!(d.on_dao(199.0, s, GlobalPrefix::of(4)).verdict, DaoVerdict::Discard);
    assert_eq!(d.on_dao(210.0, s, GlobalPrefix::of(4)).verdict, DaoVerdict::Forward);
    assert_eq!(d.init_calls, 3);
}
