//! One test per acceptance criterion. Each prints a PASS/FAIL line to the
//! real stdout, so the lines show even when test output is captured.

use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use rplsim::defense::limsd::LiMsd;
use rplsim::defense::{DaoVerdict, DefenseConfig, DefenseMode};
use rplsim::expctl::matrix::{cells, run_one, Cell, RunRecord};
use rplsim::expctl::output::{lookup, summarize, write_runs, SummaryRow};
use rplsim::expctl::scenario::{Scenario, Variant};
use rplsim::metrics::{self, RunMetrics};
use rplsim::rpl::address::{GlobalPrefix, LinkLocal};
use rplsim::rpl::message::MessageClass;
use rplsim::testkit;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{verdict}] criterion {id:>2}: {name}: {detail}");
    let _ = out.flush();
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

struct Matrix {
    scenario: Scenario,
    records: Vec<RunRecord>,
    metrics: Vec<RunMetrics>,
    rows: Vec<SummaryRow>,
    elapsed: Duration,
}

impl Matrix {
    fn run(file: &str) -> Matrix {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(file);
        let scenario = Scenario::load(&path).expect("scenario file");
        let t = Instant::now();
        let jobs: Vec<(Cell, usize)> =
            cells(&scenario).into_iter().flat_map(|c| (0..scenario.replications).map(move |r| (c, r))).collect();
        let done: Vec<(RunRecord, RunMetrics)> = jobs
            .par_iter()
            .map(|(c, r)| {
                let (rec, m, _) = run_one(&scenario, c, *r, false).expect("run");
                (rec, m)
            })
            .collect();
        let elapsed = t.elapsed();
        let (records, metrics): (Vec<_>, Vec<_>) = done.into_iter().unzip();
        let rows = summarize(&records);
        Matrix { scenario, records, metrics, rows, elapsed }
    }

    fn mean(&self, variant: Variant, interval: Option<f64>, metric: &str) -> f64 {
        let mobile = self.scenario.mobility_modes[0];
        let cell = Cell { variant, mobile, replay_interval: interval };
        lookup(&self.rows, &cell, metric).map_or(f64::NAN, |s| s.mean)
    }

    fn intervals(&self) -> Vec<f64> {
        let mut v = self.scenario.replay_intervals.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

fn static_matrix() -> &'static Matrix {
    static M: OnceLock<Matrix> = OnceLock::new();
    M.get_or_init(|| Matrix::run("static.conf"))
}

fn mobile_matrix() -> &'static Matrix {
    static M: OnceLock<Matrix> = OnceLock::new();
    M.get_or_init(|| Matrix::run("mobile.conf"))
}

fn fmt_series(m: &Matrix, v: Variant, metric: &str) -> String {
    m.intervals().iter().map(|&r| format!("{r}s={:.4}", m.mean(v, Some(r), metric))).collect::<Vec<_>>().join(" ")
}

#[test]
fn c01_algorithm_exact_blacklisting() {
    let t = Instant::now();
    let cfg = DefenseConfig { mode: DefenseMode::LiMsd, beta: 10, activate_at: 0.0, ..DefenseConfig::default() };
    let mut d = LiMsd::new(&cfg);
    for n in 1..=4 {
        d.on_dao(0.0, LinkLocal::of(n), GlobalPrefix::of(n));
    }
    let child = LinkLocal::of(7);
    let mut verdicts = Vec::new();
    let mut scan_ok = true;
    for i in 0..50 {
        let dec = d.on_dao(1.0 + i as f64, child, GlobalPrefix::of(7));
        if i > 10 {
            scan_ok &= dec.comparisons == d.n_blacklist() && dec.blacklist_comparisons == dec.comparisons;
        }
        verdicts.push(dec.verdict);
    }
    let forwarded = verdicts.iter().take_while(|v| **v == DaoVerdict::Forward).count();
    let ok = forwarded == 10
        && verdicts[10] == DaoVerdict::BlacklistAndDiscard
        && verdicts[11..].iter().all(|v| *v == DaoVerdict::Discard)
        && scan_ok
        && t.elapsed() < Duration::from_secs(1);
    report(
        1,
        "algorithm-exact blacklisting",
        ok,
        format!("forwarded {forwarded}, 11th {:?}, post-blacklist scans = blacklist length: {scan_ok}", verdicts[10]),
    );
}

#[test]
fn c02_victim_node_differential() {
    let t = Instant::now();
    let li = testkit::run(testkit::flooded_chain(3, DefenseMode::LiMsd, 1.0, 90.0, 1800.0)).unwrap();
    let sec = testkit::run(testkit::flooded_chain(3, DefenseMode::SecRpl, 1.0, 90.0, 1800.0)).unwrap();
    let (bl, bs) = (testkit::blocked(&li), testkit::blocked(&sec));
    let b_by_a = sec.metrics.block_events.iter().any(|e| e.parent == 1 && e.target == 2);
    let ok = bl == vec![3] && bs.contains(&2) && b_by_a && t.elapsed() < Duration::from_secs(5);
    report(
        2,
        "victim node differential",
        ok,
        format!("Li-MSD blocked {bl:?} (C = 3), SecRPL blocked {bs:?}, B blocked by A: {b_by_a}"),
    );
}

#[test]
fn c03_amplification_law() {
    let mut induced = Vec::new();
    for d in 2..=6 {
        let base = testkit::run(testkit::chain(d, 1)).unwrap();
        let mut cfg = testkit::chain(d, 1);
        cfg.attackers = vec![d];
        cfg.attack.attack_start = 100.0;
        cfg.attack.replay_interval = 1.0e6;
        let one = testkit::run(cfg).unwrap();
        assert_eq!(one.metrics.total_replays(), 1);
        induced.push((d, one.metrics.total_aggregated() - base.metrics.total_aggregated()));
    }
    let ok = induced.iter().all(|&(d, n)| n == (d - 1) as u64);
    report(3, "amplification law", ok, format!("(depth, induced) {induced:?}"));
}

#[test]
fn c04_attack_impact_ordering() {
    let m = static_matrix();
    let rpl = m.mean(Variant::Rpl, None, "pdr");
    let ua: Vec<f64> = m.intervals().iter().map(|&r| m.mean(Variant::UnderAttack, Some(r), "pdr")).collect();
    let drop = rpl - ua[0];
    let monotone = ua.windows(2).all(|w| w[1] >= w[0]);
    let budget = m.elapsed < Duration::from_secs(600);
    let ok = drop > 0.10 && monotone && budget;
    report(
        4,
        "attack impact ordering",
        ok,
        format!(
            "RPL {rpl:.4}, under attack {} (drop at 1s {:.1} pp), matrix {:.1}s",
            fmt_series(m, Variant::UnderAttack, "pdr"),
            drop * 100.0,
            m.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c05_mitigation_band() {
    let m = static_matrix();
    let rpl = m.mean(Variant::Rpl, None, "pdr");
    let mut ok = true;
    for r in m.intervals() {
        let li = m.mean(Variant::LiMsd, Some(r), "pdr");
        let sec = m.mean(Variant::SecRpl, Some(r), "pdr");
        ok &= li >= 0.95 && rpl - li <= 0.03 && li >= sec;
    }
    report(
        5,
        "mitigation band",
        ok,
        format!(
            "RPL {rpl:.4}, Li-MSD {}, SecRPL {}",
            fmt_series(m, Variant::LiMsd, "pdr"),
            fmt_series(m, Variant::SecRpl, "pdr")
        ),
    );
}

#[test]
fn c06_delay_ordering() {
    let m = static_matrix();
    let ok = m.intervals().iter().all(|&r| {
        let li = m.mean(Variant::LiMsd, Some(r), "ae2ed");
        li < m.mean(Variant::UnderAttack, Some(r), "ae2ed") && (0.1..=1.0).contains(&li)
    });
    report(
        6,
        "delay ordering",
        ok,
        format!(
            "Li-MSD {}, under attack {}",
            fmt_series(m, Variant::LiMsd, "ae2ed"),
            fmt_series(m, Variant::UnderAttack, "ae2ed")
        ),
    );
}

#[test]
fn c07_power_ordering() {
    let m = static_matrix();
    let rpl = m.mean(Variant::Rpl, None, "apc");
    let ok = m.intervals().iter().all(|&r| {
        let li = m.mean(Variant::LiMsd, Some(r), "apc");
        m.mean(Variant::UnderAttack, Some(r), "apc") > li && li >= rpl
    });
    report(
        7,
        "power ordering",
        ok,
        format!(
            "under attack {}, Li-MSD {}, RPL {rpl:.4} mW",
            fmt_series(m, Variant::UnderAttack, "apc"),
            fmt_series(m, Variant::LiMsd, "apc")
        ),
    );
}

#[test]
fn c08_false_positive_rate() {
    let (s, mo) = (static_matrix(), mobile_matrix());
    let static_zero = s.intervals().iter().all(|&r| s.mean(Variant::LiMsd, Some(r), "fpr") == 0.0);
    let dominated = [s, mo].iter().all(|m| {
        m.intervals()
            .iter()
            .all(|&r| m.mean(Variant::LiMsd, Some(r), "fpr") <= m.mean(Variant::SecRpl, Some(r), "fpr"))
    });
    report(
        8,
        "false positive rate",
        static_zero && dominated,
        format!(
            "static Li-MSD {} SecRPL {}; mobile Li-MSD {} SecRPL {}",
            fmt_series(s, Variant::LiMsd, "fpr"),
            fmt_series(s, Variant::SecRpl, "fpr"),
            fmt_series(mo, Variant::LiMsd, "fpr"),
            fmt_series(mo, Variant::SecRpl, "fpr")
        ),
    );
}

#[test]
fn c09_mobile_direction() {
    let m = mobile_matrix();
    let ok = m
        .intervals()
        .iter()
        .all(|&r| m.mean(Variant::LiMsd, Some(r), "pdr") > m.mean(Variant::UnderAttack, Some(r), "pdr"));
    report(
        9,
        "mobile direction",
        ok,
        format!(
            "Li-MSD {}, under attack {}",
            fmt_series(m, Variant::LiMsd, "pdr"),
            fmt_series(m, Variant::UnderAttack, "pdr")
        ),
    );
}

#[test]
fn c10_work_bound() {
    let node_max = DefenseConfig::default().node_max;
    let mut sweep_ok = true;
    for t_child in 1..=node_max {
        let cfg = DefenseConfig { mode: DefenseMode::LiMsd, beta: 3, activate_at: 0.0, ..DefenseConfig::default() };
        let mut d = LiMsd::new(&cfg);
        for round in 0..5 {
            for n in 1..=t_child {
                let own = (n + round) % 2 == 0;
                let prefix = if own { GlobalPrefix::of(n) } else { GlobalPrefix::of(n + 500) };
                let bound = d.n_blacklist() + d.t_child();
                let dec = d.on_dao(round as f64, LinkLocal::of(n), prefix);
                sweep_ok &= dec.comparisons <= bound && dec.bound == bound;
            }
        }
    }
    let runs: Vec<&RunMetrics> = static_matrix().metrics.iter().chain(mobile_matrix().metrics.iter()).collect();
    let invocations: u64 = runs.iter().map(|m| m.defense.invocations).sum();
    let violations: u64 = runs.iter().map(|m| m.defense.bound_violations).sum();
    report(
        10,
        "work bound",
        sweep_ok && violations == 0 && invocations > 0,
        format!("sweep 1..={node_max} ok: {sweep_ok}; {violations} violations in {invocations} matrix invocations"),
    );
}

#[test]
fn c11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut checked = Vec::new();
    for m in [static_matrix(), mobile_matrix()] {
        for (i, rec) in m.records.iter().enumerate().step_by(17) {
            let again = run_one(&m.scenario, &rec.cell, rec.replication, false).unwrap().0;
            let a = dir.path().join(format!("a{i}.csv"));
            let b = dir.path().join(format!("b{i}.csv"));
            write_runs(&a, std::slice::from_ref(rec)).unwrap();
            write_runs(&b, &[again]).unwrap();
            same &= std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
            checked.push(format!("{}#{}", rec.cell, rec.replication));
        }
    }
    report(11, "determinism", same, format!("{} re-runs byte-identical: {}", checked.len(), checked.join(" ")));
}

#[test]
fn c12_conservation() {
    let runs: Vec<&RunMetrics> = static_matrix().metrics.iter().chain(mobile_matrix().metrics.iter()).collect();
    let mut pdr_plr = true;
    let mut energy = true;
    let mut tallies = true;
    for m in &runs {
        if let (Some(p), Some(l)) = (metrics::pdr(m), metrics::plr(m)) {
            pdr_plr &= (p + l - 1.0).abs() <= f64::EPSILON;
        }
        for e in &m.energy {
            energy &= e.tx_s + e.rx_s + e.cpu_s <= m.duration && (e.total() - m.duration).abs() < 1e-9;
        }
        tallies &= MessageClass::ALL.iter().all(|c| m.tallies[c.index()].balanced());
    }
    report(
        12,
        "conservation",
        pdr_plr && energy && tallies,
        format!("{} runs: PDR+PLR=1 {pdr_plr}, energy partition {energy}, sent=delivered+dropped {tallies}", runs.len()),
    );
}
