//! Mode dispatch and the replica worker pool.
//!
//! Replicas are numbered in sorted `(n, seed_index)` order; replica
//! `ordinal` always uses the stream seed `replica_seed(master_seed, ordinal)`
//! regardless of worker count or completion order, so outputs are
//! byte-stable under parallelism.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use latewalk_core::estimators::{
    disc_count, late_set, late_threshold, pair_count, sample_late_point,
};
use latewalk_core::excursions::{excursion_target, CrossingMachine, LedgerBuilder, RadiiSchedule};
use latewalk_core::oracle;
use latewalk_core::theory::{self, ExponentKind};
use latewalk_core::walk::{
    aux_stream, replica_seed, run_to_cover, run_to_time, FirstHitField, Point, WalkConfig,
};

use crate::config::{ExperimentConfig, Mode};
use crate::format;
use crate::ledger_json::LedgerDto;
use crate::manifest::{sha256_file, sha256_hex, OutputEntry, ReplicaEntry, RunManifest};
use crate::report::{self, StatRow};
use crate::CliError;

/// The pair-forcing budget used for the illustrative ledgers written by
/// simulate mode.
const LEDGER_A: f64 = 1.0;

pub fn run(config: &ExperimentConfig) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(&config.out)?;
    let mut manifest = RunManifest::new(config.clone());
    let outcome = match config.mode {
        Mode::Theory => run_theory(config, &mut manifest),
        Mode::Oracle => run_oracle(config, &mut manifest),
        Mode::Simulate | Mode::Sweep => run_replicas(config, &mut manifest),
        Mode::Analyze => run_analyze(config, &mut manifest),
    };
    // The (possibly partial) manifest is written even when replicas failed.
    let manifest_json = serde_json::to_string_pretty(&manifest).map_err(CliError::runtime)?;
    std::fs::write(config.out.join("manifest.json"), manifest_json)?;
    outcome.map(|()| manifest)
}

fn record_output(manifest: &mut RunManifest, path: &Path) -> Result<(), CliError> {
    manifest.outputs.push(OutputEntry {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    });
    Ok(())
}

fn run_theory(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let table = config.out.join("theory_table.csv");
    report::write_theory_csv(&table, &config.alpha, &config.beta)?;
    record_output(manifest, &table)?;
    let plot_dir = config.out.join("plots");
    std::fs::create_dir_all(&plot_dir)?;
    for path in report::write_theory_plots(&plot_dir, &config.alpha)? {
        record_output(manifest, &path)?;
    }
    Ok(())
}

/// Work item: one `(n, seed_index)` replica.
#[derive(Clone, Copy)]
struct Replica {
    ordinal: u64,
    n: u32,
    seed_index: u32,
}

struct ReplicaOutcome {
    entry: ReplicaEntry,
    rows: Vec<StatRow>,
    ledger_json: Option<(String, String)>,
}

fn replica_list(config: &ExperimentConfig) -> Vec<Replica> {
    let mut ns = config.n.clone();
    ns.sort_unstable();
    let mut out = Vec::new();
    let mut ordinal = 0u64;
    for n in ns {
        for seed_index in 0..config.seeds {
            out.push(Replica {
                ordinal,
                n,
                seed_index,
            });
            ordinal += 1;
        }
    }
    out
}

fn run_pool<T: Send, F>(items: usize, workers: usize, job: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
{
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..items).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(items.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items {
                    break;
                }
                let value = job(i);
                results.lock().unwrap()[i] = Some(value);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|v| v.expect("worker pool left a gap"))
        .collect()
}

fn run_replicas(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let fields_dir = config.out.join("fields");
    std::fs::create_dir_all(&fields_dir)?;
    if config.mode == Mode::Simulate {
        std::fs::create_dir_all(config.out.join("ledgers"))?;
    }
    let replicas = replica_list(config);
    let outcomes = run_pool(replicas.len(), config.workers, |i| {
        run_one_replica(config, &fields_dir, replicas[i])
    });

    let mut rows = Vec::new();
    for outcome in outcomes {
        manifest.replicas.push(outcome.entry);
        rows.extend(outcome.rows);
        if let Some((name, json)) = outcome.ledger_json {
            let path = config.out.join("ledgers").join(name);
            std::fs::write(&path, json)?;
            record_output(manifest, &path)?;
        }
    }

    let csv_path = config.out.join("stats.csv");
    report::write_stat_csv(&csv_path, &rows)?;
    record_output(manifest, &csv_path)?;

    if config.mode == Mode::Sweep {
        write_sweep_reports(config, manifest, &rows)?;
    }
    if manifest.any_replica_failed() {
        return Err(CliError::Runtime(
            "one or more replicas failed; see manifest".into(),
        ));
    }
    Ok(())
}

fn run_one_replica(
    config: &ExperimentConfig,
    fields_dir: &Path,
    replica: Replica,
) -> ReplicaOutcome {
    let seed = replica_seed(config.master_seed, replica.ordinal);
    let mut entry = ReplicaEntry {
        ordinal: replica.ordinal,
        n: replica.n,
        seed_index: replica.seed_index,
        seed,
        field_path: None,
        sha256: None,
        walk_length: None,
        covered: None,
        error: None,
    };
    match simulate_field(config, replica, seed) {
        Ok((field, ledger_json)) => {
            let rows = statistic_rows(config, replica, &field);
            let name = format!("field_n{}_s{}.lprw", replica.n, replica.seed_index);
            let path = fields_dir.join(&name);
            let bytes = format::encode_field(&field);
            match std::fs::write(&path, &bytes) {
                Ok(()) => {
                    entry.field_path = Some(format!("fields/{name}"));
                    entry.sha256 = Some(sha256_hex(&bytes));
                    entry.walk_length = Some(field.walk_length);
                    entry.covered = Some(field.covered);
                    ReplicaOutcome {
                        entry,
                        rows,
                        ledger_json,
                    }
                }
                Err(e) => {
                    entry.error = Some(e.to_string());
                    ReplicaOutcome {
                        entry,
                        rows: Vec::new(),
                        ledger_json: None,
                    }
                }
            }
        }
        Err(e) => {
            entry.error = Some(e.to_string());
            ReplicaOutcome {
                entry,
                rows: Vec::new(),
                ledger_json: None,
            }
        }
    }
}

/// Simulate mode runs to cover (with an excursion ledger watching); sweep
/// mode runs to the largest requested late threshold.
fn simulate_field(
    config: &ExperimentConfig,
    replica: Replica,
    seed: u64,
) -> Result<(FirstHitField, Option<(String, String)>), CliError> {
    let cfg = WalkConfig::new(replica.n, seed);
    match config.mode {
        Mode::Simulate => {
            match ledger_builder(config, replica.n) {
                Some((mut builder, radii)) => {
                    let field =
                        run_to_cover(&cfg, &mut [&mut builder]).map_err(CliError::runtime)?;
                    let dto = LedgerDto::from_ledger(&builder.finish(), radii);
                    let json = serde_json::to_string_pretty(&dto).map_err(CliError::runtime)?;
                    let name = format!("ledger_n{}_s{}.json", replica.n, replica.seed_index);
                    Ok((field, Some((name, json))))
                }
                None => {
                    let field = run_to_cover(&cfg, &mut []).map_err(CliError::runtime)?;
                    Ok((field, None))
                }
            }
        }
        Mode::Sweep => {
            let mut horizon = 0u64;
            for &alpha in &config.alpha {
                horizon = horizon.max(late_threshold(alpha, replica.n).map_err(CliError::runtime)?);
            }
            let field = run_to_time(&cfg, horizon, &mut []).map_err(CliError::runtime)?;
            Ok((field, None))
        }
        _ => unreachable!("replica runs happen only for simulate/sweep"),
    }
}

/// Geometric schedule from the config, as many levels as fit within `n/2`;
/// level 1 gets a minimal target, level `l ≥ 2` the standard `3a l² ln l`.
/// Returns the builder together with the schedule radii for the report.
fn ledger_builder(config: &ExperimentConfig, n: u32) -> Option<(LedgerBuilder, Vec<f64>)> {
    let mut levels = 0usize;
    let mut r = config.schedule_r0 * config.schedule_base;
    while r <= n as f64 / 2.0 {
        levels += 1;
        r *= config.schedule_base;
    }
    if levels == 0 {
        return None;
    }
    let schedule =
        RadiiSchedule::geometric(config.schedule_r0, config.schedule_base, levels).ok()?;
    let radii: Vec<f64> = (0..=levels).map(|k| schedule.radius(k)).collect();
    let center = Point { x: n / 2, y: n / 2 };
    let machine = CrossingMachine::new(n, center, &schedule).ok()?;
    let targets: Vec<f64> = (1..=levels)
        .map(|l| {
            if l < 2 {
                1.0
            } else {
                excursion_target(LEDGER_A, l as u32).unwrap_or(1.0)
            }
        })
        .collect();
    let builder = LedgerBuilder::new(machine, &targets).ok()?;
    Some((builder, radii))
}

fn statistic_rows(
    config: &ExperimentConfig,
    replica: Replica,
    field: &FirstHitField,
) -> Vec<StatRow> {
    let mut rows = Vec::new();
    let n = replica.n;
    if config.mode == Mode::Simulate {
        if let Some(cover) = field.cover_time() {
            let nl = n as f64 * (n as f64).ln();
            rows.push(StatRow {
                n,
                seed_index: replica.seed_index,
                alpha: None,
                beta: None,
                statistic: "cover_time",
                value: cover as f64,
            });
            rows.push(StatRow {
                n,
                seed_index: replica.seed_index,
                alpha: None,
                beta: None,
                statistic: "cover_ratio",
                value: cover as f64 / (nl * nl),
            });
        }
        return rows;
    }

    for (alpha_idx, &alpha) in config.alpha.iter().enumerate() {
        let set = match late_set(field, alpha) {
            Ok(set) => set,
            // A field shorter than this threshold cannot be scored at this
            // alpha; skip deterministically (analyze mode on foreign fields).
            Err(_) => continue,
        };
        rows.push(StatRow {
            n,
            seed_index: replica.seed_index,
            alpha: Some(alpha),
            beta: None,
            statistic: "late_count",
            value: set.len() as f64,
        });
        let fixed_center = Point { x: n / 2, y: n / 2 };
        for &beta in &config.beta {
            let radius = (n as f64).powf(beta);
            let fixed = disc_count(&set, fixed_center, radius).unwrap_or(0);
            let late_centered =
                match sample_late_point(&set, &mut aux_stream(field.seed, 1 + alpha_idx as u64)) {
                    Some(y) => disc_count(&set, y, radius).unwrap_or(0),
                    None => 0,
                };
            let pairs = pair_count(&set, radius).unwrap_or(0);
            for (statistic, value) in [
                ("fixed_disc_count", fixed as f64),
                ("late_disc_count", late_centered as f64),
                ("pair_count", pairs as f64),
            ] {
                rows.push(StatRow {
                    n,
                    seed_index: replica.seed_index,
                    alpha: Some(alpha),
                    beta: Some(beta),
                    statistic,
                    value,
                });
            }
        }
    }
    rows
}

fn write_sweep_reports(
    config: &ExperimentConfig,
    manifest: &mut RunManifest,
    rows: &[StatRow],
) -> Result<(), CliError> {
    let fits = report::summarize_fits(rows);
    let summary = report::SweepSummary { fits };
    let summary_path = config.out.join("summary.json");
    report::write_summary_json(&summary_path, &summary)?;
    record_output(manifest, &summary_path)?;

    let plot_dir = config.out.join("plots");
    std::fs::create_dir_all(&plot_dir)?;
    for &alpha in &config.alpha {
        for (stat, kind) in [
            ("fixed_disc_count", ExponentKind::FixedDisc),
            ("late_disc_count", ExponentKind::LateDisc),
            ("pair_count", ExponentKind::PairTypical),
        ] {
            let mut predicted = Vec::with_capacity(512);
            for i in 1..=512 {
                let beta = i as f64 / 513.0;
                let p = theory::predicted_exponent(kind, alpha.min(1.0 - 1e-12), Some(beta))
                    .map_err(CliError::runtime)?;
                predicted.push((beta, p.value));
            }
            let pred_path = plot_dir.join(format!("{stat}_pred_a{alpha:.3}.dat"));
            report::write_plot_series(&pred_path, &predicted)?;
            record_output(manifest, &pred_path)?;

            let empirical: Vec<(f64, f64)> = summary
                .fits
                .iter()
                .filter(|f| f.statistic == stat && f.alpha == alpha && f.slope.is_some())
                .filter_map(|f| f.beta.map(|b| (b, f.slope.unwrap())))
                .collect();
            let emp_path = plot_dir.join(format!("{stat}_emp_a{alpha:.3}.dat"));
            report::write_plot_series(&emp_path, &empirical)?;
            record_output(manifest, &emp_path)?;
        }
    }
    Ok(())
}

fn run_analyze(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let source = std::fs::read_to_string(config.out.join("manifest.json")).map_err(|e| {
        CliError::Runtime(format!(
            "analyze requires a manifest.json in {:?}: {e}",
            config.out
        ))
    })?;
    let source: RunManifest = serde_json::from_str(&source).map_err(CliError::runtime)?;

    let mut rows = Vec::new();
    for entry in &source.replicas {
        let Some(ref rel) = entry.field_path else {
            continue;
        };
        let path = config.out.join(rel);
        if let Some(expected) = &entry.sha256 {
            let actual = sha256_file(&path)?;
            if &actual != expected {
                return Err(CliError::Runtime(format!(
                    "digest mismatch for {rel}: manifest {expected}, file {actual}"
                )));
            }
        }
        let field = format::read_field(&path).map_err(CliError::runtime)?;
        let replica = Replica {
            ordinal: entry.ordinal,
            n: entry.n,
            seed_index: entry.seed_index,
        };
        let mut cfg = config.clone();
        cfg.mode = Mode::Sweep; // score late-set statistics from the fields
        rows.extend(statistic_rows(&cfg, replica, &field));
        manifest.replicas.push(entry.clone());
    }
    let csv_path = config.out.join("analyze_stats.csv");
    report::write_stat_csv(&csv_path, &rows)?;
    record_output(manifest, &csv_path)?;

    let fits = report::summarize_fits(&rows);
    let summary = report::SweepSummary { fits };
    let summary_path = config.out.join("analyze_summary.json");
    report::write_summary_json(&summary_path, &summary)?;
    record_output(manifest, &summary_path)?;
    Ok(())
}

fn run_oracle(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), CliError> {
    let mut text = String::from("domain,params,quantity,exact,predicted,error\n");
    let row = |text: &mut String,
               domain: &str,
               params: &str,
               quantity: &str,
               exact: f64,
               predicted: f64| {
        text.push_str(&format!(
            "{domain},{params},{quantity},{},{},{}\n",
            report::fmt_value(exact),
            report::fmt_value(predicted),
            report::fmt_value((exact - predicted).abs())
        ));
    };

    for n in [16u32, 32, 64] {
        let hit = oracle::origin_hit_probability(n).map_err(CliError::runtime)?;
        let green = oracle::disc_green(n).map_err(CliError::runtime)?;
        let ln_n = (n as f64).ln();
        for frac in [8u32, 4, 2] {
            let x = (n / frac) as i32;
            let predicted = ((n as f64) / (x as f64)).ln() / ln_n;
            row(
                &mut text,
                "disc",
                &format!("n={n};x={x}"),
                "hit_prob",
                hit.at((x, 0)),
                predicted,
            );
            let predicted_g = (2.0 / std::f64::consts::PI) * ((n as f64) / (x as f64)).ln();
            row(
                &mut text,
                "disc",
                &format!("n={n};x={x}"),
                "green",
                green.at((x, 0)),
                predicted_g,
            );
        }
    }

    for n in [5u32, 10, 20] {
        let exit = oracle::disc_exit_time(n).map_err(CliError::runtime)?;
        let exact = exit.at((0, 0));
        row(
            &mut text,
            "disc",
            &format!("n={n};x=0"),
            "exit_time_vs_lower",
            exact,
            (n as f64) * (n as f64),
        );
    }

    let annulus = oracle::annulus_inner_hit_probability(8.0, 64.0).map_err(CliError::runtime)?;
    for x in [16i32, 32, 48] {
        let predicted = (64.0 / x as f64).ln() / (64.0f64 / 8.0).ln();
        row(
            &mut text,
            "annulus",
            &format!("r=8;R=64;x={x}"),
            "inner_prob",
            annulus.at((x, 0)),
            predicted,
        );
    }

    let exc = oracle::expected_excursion_time(64, 4.0, 10.0).map_err(CliError::runtime)?;
    let predicted = (2.0 / std::f64::consts::PI) * 64.0 * 64.0 * (10.0f64 / 4.0).ln();
    row(
        &mut text,
        "torus",
        "K=64;r=4;R=10",
        "excursion_time_min",
        exc.min,
        predicted,
    );
    row(
        &mut text,
        "torus",
        "K=64;r=4;R=10",
        "excursion_time_max",
        exc.max,
        predicted,
    );

    let kac = oracle::hitting_time_moments(4, (0, 0), (2, 2), 4).map_err(CliError::runtime)?;
    for (idx, &m) in kac.moments.iter().enumerate() {
        let j = idx + 1;
        let bound = (1..=j).product::<usize>() as f64 * kac.moments[0] * kac.norm.powi(idx as i32);
        row(
            &mut text,
            "torus",
            &format!("K=4;order={j}"),
            "hitting_moment_vs_bound",
            m,
            bound,
        );
    }

    let path = config.out.join("oracle_table.csv");
    std::fs::write(&path, text)?;
    record_output(manifest, &path)?;
    Ok(())
}
