//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. `ACCEPTANCE_ONLY=3,9` restricts the run.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use interlace::analytics::{
    candidate_probability, candidate_probability_naive, estimate_backup_size, estimate_search_path_bound,
    expected_online,
};
use interlace::churn::{ChurnKind, ChurnModel};
use interlace::engine::{run_all, run_topology, RunMetrics, SimConfig, TopologyRun};
use interlace::overlay::{ideal_search_oracle, LookupTable, NameId, NodeAddr, NodeIdentity, PiggybackEntry};
use interlace::predictors::{solve_stationary, Dbg, PredictorKind, StateWindow};
use interlace::runner::{emit_reports, run_experiments, ReportFormat, RunSpec};
use interlace::stabilizers::{interlaced_backup_update, update_score, BackupEntry, BackupTable, StabilizerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let online = expected_online(1024, 0.82);
    let bound = estimate_search_path_bound(184);
    let b = estimate_backup_size(1024, 0.82, 8.0);
    let elapsed = start.elapsed();
    let b_ok = matches!(b, Ok(v) if v.abs_diff(40) <= 2);
    let pass = (online - 184.32).abs() < 1e-9 && bound == 8 && b_ok && elapsed < Duration::from_secs(1);
    verdict(
        pass,
        format!("expected_online={online:.2} (184.32) bound={bound} (8) backup_size={b:?} (40±2) in {elapsed:.2?} (<1s)"),
    )
}

/// Monte-Carlo estimate of the candidate probability: a uniform triple of
/// a current node, a target at or beyond it and an entry, counting entries
/// strictly between the two.
fn candidate_probability_mc(n: u64, samples: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = rng.random_range(0..=n);
        let t = rng.random_range(x..=n);
        let y = rng.random_range(1..=n);
        if x < y && y < t {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let n = 10_000;
    let p = candidate_probability(n);
    let naive = candidate_probability_naive(n);
    let mc = candidate_probability_mc(n, 4_000_000, SEED);
    let elapsed = start.elapsed();
    let pass = (p - 0.25).abs() <= 0.01
        && (p - naive).abs() < 1e-9
        && (p - mc).abs() <= 0.005
        && elapsed < Duration::from_secs(10);
    verdict(
        pass,
        format!("p(1e4)={p:.5} (0.25±0.01) monte-carlo={mc:.5} (±0.005) in {elapsed:.2?} (<10s)"),
    )
}

/// Per-topology runs of the prediction-error benchmark at desk scale.
fn predictor_runs() -> (Vec<RunMetrics>, Duration) {
    let start = Instant::now();
    let config = SimConfig {
        capacity: 256,
        slots: 168,
        topologies: 20,
        seed: SEED,
        stabilizer: StabilizerKind::None,
        predictor: PredictorKind::SwDbg,
        shadow_predictors: PredictorKind::ALL.to_vec(),
        ..SimConfig::default()
    };
    let runs = (0..config.topologies)
        .map(|t| run_topology(&config, t).expect("valid config"))
        .collect();
    (runs, start.elapsed())
}

fn mean_error(run: &RunMetrics, kind: PredictorKind) -> f64 {
    run.predictor_errors.iter().find(|e| e.predictor == kind).unwrap().mean_error
}

fn criterion_3(runs: &[RunMetrics], elapsed: Duration) -> Verdict {
    let order = [
        PredictorKind::SwDbg,
        PredictorKind::Dbg(4),
        PredictorKind::Dbg(3),
        PredictorKind::Dbg(2),
        PredictorKind::Dbg(1),
        PredictorKind::Lifetime,
        PredictorKind::Ludp,
    ];
    let means: Vec<f64> = order
        .iter()
        .map(|&k| runs.iter().map(|r| mean_error(r, k)).sum::<f64>() / runs.len() as f64)
        .collect();
    let margins: Vec<f64> = order
        .windows(2)
        .map(|w| runs.iter().map(|r| mean_error(r, w[1]) - mean_error(r, w[0])).sum::<f64>() / runs.len() as f64)
        .collect();
    let pass = margins.iter().all(|&m| m > 0.005);
    let table: Vec<String> = order.iter().zip(&means).map(|(k, m)| format!("{k}={m:.4}")).collect();
    let margins: Vec<String> = margins.iter().map(|m| format!("{m:+.4}")).collect();
    verdict(
        pass,
        format!(
            "{} margins [{}] (each >0.005) in {elapsed:.1?}",
            table.join(" "),
            margins.join(" ")
        ),
    )
}

fn criterion_9(runs: &[RunMetrics]) -> Verdict {
    let (sum, n) = runs.iter().fold((0.0, 0u64), |(s, n), r| {
        (s + r.totals.sum_right_state_size, n + r.totals.right_state_samples)
    });
    let mean = sum / n as f64;
    verdict((2.0..=6.0).contains(&mean), format!("mean right DBG state size {mean:.3} (in [2, 6])"))
}

fn success_config(stabilizer: StabilizerKind, backup_size: usize) -> SimConfig {
    SimConfig {
        capacity: 256,
        slots: 96,
        topologies: 10,
        search_cap: Some(500),
        seed: SEED,
        stabilizer,
        backup_size,
        ..SimConfig::default()
    }
}

struct SuccessGrid {
    /// (stabilizer, b, metrics)
    cells: Vec<(StabilizerKind, usize, RunMetrics)>,
    elapsed: Duration,
}

impl SuccessGrid {
    fn run() -> Self {
        let start = Instant::now();
        let mut cells = Vec::new();
        for stabilizer in [StabilizerKind::Interlaced, StabilizerKind::Kademlia, StabilizerKind::Dks] {
            for b in [10, 20, 40] {
                let m = run_all(&success_config(stabilizer, b)).expect("valid config");
                cells.push((stabilizer, b, m));
            }
        }
        SuccessGrid {
            cells,
            elapsed: start.elapsed(),
        }
    }

    fn success(&self, stabilizer: StabilizerKind, b: usize) -> f64 {
        self.cells
            .iter()
            .find(|(s, bb, _)| *s == stabilizer && *bb == b)
            .map(|(_, _, m)| m.avg_success_ratio)
            .unwrap()
    }
}

fn criterion_4(grid: &SuccessGrid) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for b in [10, 20, 40] {
        let i = grid.success(StabilizerKind::Interlaced, b);
        let k = grid.success(StabilizerKind::Kademlia, b);
        let d = grid.success(StabilizerKind::Dks, b);
        pass &= i > k && i > d;
        parts.push(format!("b={b}: interlaced={i:.4} kademlia={k:.4} dks={d:.4}"));
    }
    verdict(pass, format!("{} in {:.1?}", parts.join("; "), grid.elapsed))
}

fn criterion_5(grid: &SuccessGrid) -> Verdict {
    let s = |b| grid.success(StabilizerKind::Interlaced, b);
    let low = s(20) - s(10);
    let high = s(40) - s(20);
    verdict(low > high, format!("gain 10->20 {low:+.4} vs 20->40 {high:+.4} (first must be larger)"))
}

fn criterion_6() -> Verdict {
    let m = run_all(&success_config(StabilizerKind::Interlaced, 50)).expect("valid config");
    let per_level = m.avg_backup_neighbors_per_level;
    let msgs = m.avg_resolve_messages;
    let pass = (2.0..=5.0).contains(&per_level) && (1.0..=3.0).contains(&msgs);
    verdict(
        pass,
        format!(
            "backup neighbors per level {per_level:.3} (in [2, 5]), messages per resolve {msgs:.3} (in [1, 3]) over {} invocations",
            m.totals.resolve_invocations
        ),
    )
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let n = 1024;
    let config = SimConfig {
        capacity: n,
        slots: 1,
        topologies: 1,
        search_cap: Some(0),
        seed: SEED,
        churn: ChurnModel {
            kind: ChurnKind::Uniform { q: 0.0 },
            ..ChurnModel::default()
        },
        ..SimConfig::default()
    };
    let mut run = TopologyRun::new(&config, 0).expect("valid config");
    run.run_slot(0);
    let online = run.online_nodes();
    let ids = run.online_sorted_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut ok, mut hops) = (0u32, 0u64);
    let searches = 10_000;
    for _ in 0..searches {
        let from = online[rng.random_range(0..online.len())];
        let target = ids[rng.random_range(0..ids.len())];
        let out = run.run_search(from, target);
        let expected = ideal_search_oracle(&ids, target).expect("online nodes exist");
        if out.success && run.topology().node(out.result).num_id == expected && out.resolve_invocations == 0 {
            ok += 1;
        }
        hops += u64::from(out.hops);
    }
    let mean_hops = hops as f64 / f64::from(searches);
    let limit = 2.0 * (n as f64).log2();
    let elapsed = start.elapsed();
    let pass = ok == searches && online.len() == n && mean_hops <= limit && elapsed < Duration::from_secs(30);
    verdict(
        pass,
        format!(
            "{ok}/{searches} searches succeed and match the oracle, mean hops {mean_hops:.2} (<= {limit}) in {elapsed:.2?} (<30s)"
        ),
    )
}

fn identity(num_id: u64, name: u32, levels: usize) -> NodeIdentity {
    NodeIdentity {
        num_id,
        name_id: NameId::new(name, levels as u8),
        address: NodeAddr(num_id as u32),
        coords: (0.0, 0.0),
    }
}

fn entry(num_id: u64, name: u32, sop: f64, levels: usize) -> PiggybackEntry {
    PiggybackEntry {
        address: NodeAddr(num_id as u32),
        num_id,
        name_id: NameId::new(name, levels as u8),
        sop,
    }
}

fn walk_frequencies(p: &[Vec<f64>], steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut counts = vec![0usize; p.len()];
    let mut s = 0;
    for _ in 0..steps {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = p.len() - 1;
        for (j, &w) in p[s].iter().enumerate() {
            acc += w;
            if u < acc {
                next = j;
                break;
            }
        }
        s = next;
        counts[s] += 1;
    }
    counts.into_iter().map(|c| c as f64 / steps as f64).collect()
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failed = Vec::new();

    // DBG transition probabilities stay normalized.
    let normalized = (0..200).all(|_| {
        let mut dbg = Dbg::new(rng.random_range(1..=6));
        for _ in 0..rng.random_range(0..400) {
            dbg.update(rng.random_bool(0.6));
        }
        dbg.probabilities_normalized(1e-12)
    });
    if !normalized {
        failed.push("normalization");
    }

    // Stationary solve against a long walk.
    let k = 5;
    let p: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let row: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|x| x / sum).collect()
        })
        .collect();
    let pi = solve_stationary(&p).expect("positive chain is ergodic");
    let freq = walk_frequencies(&p, 1_000_000, &mut rng);
    if pi.iter().zip(&freq).any(|(a, b)| (a - b).abs() > 1e-2) {
        failed.push("stationary-walk");
    }

    // Enlarge then shrink gives back the transition probabilities.
    let round_trip = (0..200).all(|_| {
        let mut dbg = Dbg::new(rng.random_range(1..=5));
        for _ in 0..rng.random_range(0..300) {
            dbg.update(rng.random_bool(0.5));
        }
        let back = dbg.enlarge(8).unwrap().shrink().unwrap();
        (0..dbg.state_count()).all(|s| match (dbg.transition_probability(s, 1), back.transition_probability(s, 1)) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            (a, b) => a == b,
        })
    });
    if !round_trip {
        failed.push("enlarge-shrink");
    }

    // Backup table size bound under a long mixed workload.
    let levels = 8;
    let owner = identity(5000, 0b1010_1010, levels);
    let lookup = LookupTable::empty(levels);
    let mut table = BackupTable::new(levels, 37);
    let mut bounded = true;
    for _ in 0..10_000 {
        let id = rng.random_range(0..10_000u64);
        if id == owner.num_id {
            continue;
        }
        if rng.random_bool(0.1) {
            table.remove(id);
        } else {
            let e = entry(id, rng.random_range(0..256), rng.random(), levels);
            interlaced_backup_update(&mut table, &owner, &lookup, &[e]);
        }
        bounded &= table.len() <= 37;
    }
    if !bounded {
        failed.push("table-bound");
    }

    // Eviction removes the lowest-ranked entry of a full sort.
    let argmin = (0..200).all(|_| {
        let b = rng.random_range(1..=50);
        let owner = identity(1 << 20, rng.random_range(0..256), levels);
        let mut table = BackupTable::new(levels, b);
        let mut used = HashSet::from([owner.num_id]);
        let mut fresh = |rng: &mut ChaCha8Rng| loop {
            let id = rng.random_range(0..1u64 << 21);
            if used.insert(id) {
                return entry(id, rng.random_range(0..256), rng.random(), levels);
            }
        };
        while table.len() < b {
            let e = fresh(&mut rng);
            interlaced_backup_update(&mut table, &owner, &lookup, &[e]);
        }
        let mut all: Vec<BackupEntry> = table.entries().copied().collect();
        all.sort_by(|a, b| {
            let sa = update_score(&owner, a.num_id, a.name_id, a.sop);
            let sb = update_score(&owner, b.num_id, b.name_id, b.sop);
            sb.total_cmp(&sa)
                .then(owner.num_id.abs_diff(a.num_id).cmp(&owner.num_id.abs_diff(b.num_id)))
                .then(a.name_id.cmp(&b.name_id))
        });
        let worst = all.last().unwrap().num_id;
        let newcomer = fresh(&mut rng);
        interlaced_backup_update(&mut table, &owner, &lookup, &[newcomer]);
        table.len() == b && !table.contains(worst) && table.contains(newcomer.num_id)
    });
    if !argmin {
        failed.push("eviction-argmin");
    }

    // Identical seed, identical report bytes.
    let bytes = |dir: &std::path::Path| {
        let mut spec = RunSpec::new(SimConfig {
            capacity: 128,
            slots: 12,
            topologies: 2,
            search_cap: Some(100),
            seed: SEED,
            ..SimConfig::default()
        });
        spec.backup_sizes = vec![10, 40];
        let reports = run_experiments(&spec).unwrap();
        emit_reports(&reports, &[ReportFormat::Csv, ReportFormat::Json], dir).unwrap();
        (
            std::fs::read(dir.join("results.csv")).unwrap(),
            std::fs::read(dir.join("results.json")).unwrap(),
        )
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if bytes(a.path()) != bytes(b.path()) {
        failed.push("determinism");
    }

    // SW-DBG output range and window shape.
    let window_ok = (0..100).all(|_| {
        let mut w = StateWindow::default();
        let bias = rng.random_range(0.05..0.95);
        (0..rng.random_range(1..400)).all(|_| {
            let sop = w.update(rng.random_bool(bias));
            let (l, c, r) = w.sizes();
            (0.0..=1.0).contains(&sop) && c == l + 1 && r == c + 1 && l >= 1
        })
    });
    if !window_ok {
        failed.push("swdbg-window");
    }

    if failed.is_empty() {
        verdict(
            true,
            "normalization, stationary-walk, enlarge-shrink, table-bound, eviction-argmin, determinism, swdbg-window",
        )
    } else {
        verdict(false, format!("failed: {}", failed.join(", ")))
    }
}

fn main() {
    let only: Option<HashSet<u8>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let want = |c: u8| only.as_ref().is_none_or(|set| set.contains(&c));
    let mut results: Vec<(u8, Verdict)> = Vec::new();
    let mut report = |id: u8, v: Verdict| {
        println!("criterion {id}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, v));
    };

    if want(1) {
        report(1, criterion_1());
    }
    if want(2) {
        report(2, criterion_2());
    }
    if want(3) || want(9) {
        let (runs, elapsed) = predictor_runs();
        if want(3) {
            report(3, criterion_3(&runs, elapsed));
        }
        if want(9) {
            report(9, criterion_9(&runs));
        }
    }
    if want(4) || want(5) {
        let grid = SuccessGrid::run();
        if want(4) {
            report(4, criterion_4(&grid));
        }
        if want(5) {
            report(5, criterion_5(&grid));
        }
    }
    if want(6) {
        report(6, criterion_6());
    }
    if want(7) {
        report(7, criterion_7());
    }
    if want(8) {
        report(8, criterion_8());
    }

    results.sort_by_key(|(id, _)| *id);
    let failed: Vec<String> = results
        .iter()
        .filter(|(_, v)| !v.pass)
        .map(|(id, _)| id.to_string())
        .collect();
    println!(
        "acceptance: {}/{} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (failing: {})", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
