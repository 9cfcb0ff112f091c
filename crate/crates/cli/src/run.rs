use std::io::Write;
use std::time::Instant;

use rskyline_core::datagen::{generate, write_csv, GenSpec};
use rskyline_core::greedy::{joint_influence_score, kgcs, CandidateProfile};
use rskyline_core::kmac::{basic_kmac, batch_kmac, bb_kmac, KmacOutcome, SingleEngine};
use rskyline_core::skyline::{oracle_reverse_skyline, InfluenceSet, ProgressSample};
use rskyline_core::{brs, rsl};
use tempfile::NamedTempFile;

use crate::args::{Axis, Engine, GenArgs, KmacArgs, KmacParams, QueryArgs, SweepArgs, WorkloadArgs};
use crate::error::CliError;
use crate::report::{progress_path, write_table, Row, Table, COLUMNS, SCHEMA_LINE};
use crate::workload::Workload;

/// Tables produced by one command.
#[derive(Debug, Default)]
pub struct Output {
    pub report: Table,
    pub progress: Option<Table>,
}

impl Output {
    pub fn write(&self, args: &WorkloadArgs) -> Result<(), CliError> {
        write_table(args.out.as_deref(), &self.report)?;
        if let (Some(out), Some(progress)) = (&args.out, &self.progress) {
            write_table(Some(&progress_path(out)), progress)?;
        }
        Ok(())
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let points = generate(&GenSpec {
        distribution: args.dist.into(),
        n: args.n,
        dim: args.d as usize,
        seed: args.seed,
    })?;
    let emit = |out: &mut dyn Write| -> Result<(), CliError> {
        writeln!(out, "{SCHEMA_LINE}")?;
        write_csv(out, &points)?;
        Ok(())
    };
    match &args.out {
        None => emit(&mut std::io::stdout().lock()),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => std::path::PathBuf::from("."),
            };
            let mut tmp = NamedTempFile::new_in(dir)?;
            emit(tmp.as_file_mut())?;
            tmp.persist(path).map_err(|e| CliError::Runtime(e.error.into()))?;
            Ok(())
        }
    }
}

fn oracle_sets(w: &Workload) -> Vec<InfluenceSet> {
    w.candidates
        .iter()
        .map(|q| oracle_reverse_skyline(q, &w.products, &w.customers))
        .collect()
}

pub fn query(args: &QueryArgs) -> Result<Output, CliError> {
    if !args.engine.is_single() {
        return Err(CliError::Usage(format!(
            "query runs brs or rsl, not {}",
            args.engine.name()
        )));
    }
    let w = Workload::build(&args.workload)?;
    let oracle = args.workload.verify.then(|| oracle_sets(&w));
    let engine = args.engine.name();
    let mut report = Table::report();
    let mut progress = Table::new(&["engine", "total_io", "results_emitted"]);
    let mut total = Row {
        scope: "total",
        engine,
        status: "exact",
        ..Row::default()
    };
    let mut all_verified = true;
    let (mut io_before, mut emitted_before) = (0, 0);
    let start_all = Instant::now();
    for (i, q) in w.candidates.iter().enumerate() {
        let start = Instant::now();
        let (set, stats) = match args.engine {
            Engine::Brs => brs(q, &w.product_tree, &w.customer_tree, None)?,
            _ => rsl(q, &w.product_tree, &w.customer_tree, None)?,
        };
        let wall_ms = ms(start);
        let verified = oracle.as_ref().map(|o| o[i] == set);
        all_verified &= verified.unwrap_or(true);
        let samples: Vec<ProgressSample> = stats
            .progress
            .iter()
            .map(|s| ProgressSample {
                total_io: io_before + s.total_io,
                results_emitted: emitted_before + s.results_emitted,
            })
            .collect();
        progress.extend_progress(&[engine.to_string()], &samples);
        io_before += stats.total_io();
        emitted_before += stats.emitted;
        total.reads_product += stats.io.reads_product;
        total.reads_customer += stats.io.reads_customer;
        total.dominance_checks += stats.dominance_checks;
        report.push(
            Row {
                scope: "candidate",
                engine,
                candidate: Some(q.id),
                influence: Some(set.len()),
                status: "exact",
                reads_product: stats.io.reads_product,
                reads_customer: stats.io.reads_customer,
                dominance_checks: stats.dominance_checks,
                verified,
                wall_ms,
                ..Row::default()
            }
            .cells(),
        );
    }
    total.influence = Some(emitted_before as usize);
    total.verified = oracle.as_ref().map(|_| all_verified);
    total.wall_ms = ms(start_all);
    if !w.candidates.is_empty() {
        report.push(total.cells());
    }
    Ok(Output {
        report,
        progress: Some(progress),
    })
}

pub fn evaluate(
    w: &Workload,
    engine: Engine,
    params: &KmacParams,
) -> Result<KmacOutcome, CliError> {
    let n = w.candidates.len();
    if params.k == 0 || params.k > n {
        return Err(CliError::Usage(format!(
            "k = {} must be between 1 and the number of candidates ({n})",
            params.k
        )));
    }
    let (tp, tc) = (&w.product_tree, &w.customer_tree);
    let out = match engine {
        Engine::BasicBrs => basic_kmac(&w.candidates, tp, tc, params.k, SingleEngine::Brs)?,
        Engine::BasicRsl => basic_kmac(&w.candidates, tp, tc, params.k, SingleEngine::Rsl)?,
        Engine::Batch => batch_kmac(&w.candidates, tp, tc, params.k, params.batch_size as usize)?,
        Engine::Bb => bb_kmac(&w.candidates, tp, tc, params.k)?,
        Engine::Brs | Engine::Rsl => {
            return Err(CliError::Usage(format!(
                "{} is a single-query engine; use basic-{0}, batch or bb",
                engine.name()
            )))
        }
    };
    eprintln!(
        "{}: selection stage took {:.3} ms",
        engine.name(),
        out.selection_time.as_secs_f64() * 1000.0
    );
    Ok(out)
}

/// Candidate rows plus the selection row for one evaluator run.
fn kmac_rows(
    w: &Workload,
    engine: Engine,
    params: &KmacParams,
    out: &KmacOutcome,
    oracle: Option<&[InfluenceSet]>,
    wall_ms: f64,
) -> (Vec<Row>, Row) {
    let name = engine.name();
    let batch_size = (engine == Engine::Batch).then_some(params.batch_size as usize);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for (i, r) in out.candidates.iter().enumerate() {
        let verified = oracle.map(|o| {
            if r.discarded {
                r.influence.is_subset(&o[i])
            } else {
                r.influence == o[i]
            }
        });
        all_ok &= verified.unwrap_or(true);
        rows.push(Row {
            scope: "candidate",
            engine: name,
            k: Some(params.k),
            batch_size,
            candidate: Some(r.id),
            influence: Some(r.influence.len()),
            status: if r.discarded { "discarded" } else { "exact" },
            reads_product: r.stats.io.reads_product,
            reads_customer: r.stats.io.reads_customer,
            dominance_checks: r.stats.dominance_checks,
            verified,
            ..Row::default()
        });
    }
    let selection_ok = oracle.map(|o| {
        let profiles: Vec<CandidateProfile> = w
            .candidates
            .iter()
            .zip(o)
            .map(|(q, s)| CandidateProfile {
                id: q.id,
                influence: s.clone(),
            })
            .collect();
        let chosen: Vec<&InfluenceSet> = out
            .selection
            .chosen
            .iter()
            .filter_map(|id| profiles.iter().find(|p| p.id == *id).map(|p| &p.influence))
            .collect();
        joint_influence_score(chosen) == out.selection.joint_score
            && kgcs(&profiles, params.k).is_ok_and(|g| g.joint_score == out.selection.joint_score)
    });
    let summary = Row {
        scope: "selection",
        engine: name,
        k: Some(params.k),
        batch_size,
        status: "selected",
        reads_product: out.io.reads_product,
        reads_customer: out.io.reads_customer,
        dominance_checks: out.dominance_checks,
        verified: selection_ok.map(|s| s && all_ok),
        joint_score: Some(out.selection.joint_score),
        chosen: Some(out.selection.chosen.clone()),
        wall_ms,
        ..Row::default()
    };
    (rows, summary)
}

pub fn kmac(args: &KmacArgs) -> Result<Output, CliError> {
    let w = Workload::build(&args.workload)?;
    let start = Instant::now();
    let out = evaluate(&w, args.engine, &args.params)?;
    let wall_ms = ms(start);
    let oracle = args.workload.verify.then(|| oracle_sets(&w));
    let (rows, summary) = kmac_rows(&w, args.engine, &args.params, &out, oracle.as_deref(), wall_ms);
    let mut report = Table::report();
    for r in rows {
        report.push(r.cells());
    }
    report.push(summary.cells());
    let mut progress = Table::new(&["engine", "total_io", "results_emitted"]);
    progress.extend_progress(&[args.engine.name().to_string()], &out.progress);
    Ok(Output {
        report,
        progress: Some(progress),
    })
}

pub fn sweep(args: &SweepArgs) -> Result<Output, CliError> {
    if let Some(e) = args.engine.iter().find(|e| e.is_single()) {
        return Err(CliError::Usage(format!(
            "sweep runs k-MAC evaluators, not {}",
            e.name()
        )));
    }
    let mut header = vec!["axis", "value"];
    header.extend(COLUMNS);
    let mut report = Table::new(&header);
    let mut shared: Option<Workload> = None;
    for &value in &args.values {
        let mut wargs = args.workload.clone();
        let mut params = args.params.clone();
        match args.axis {
            Axis::Products => wargs.products = value.to_string(),
            Axis::Customers => wargs.customers = value.to_string(),
            Axis::Candidates => wargs.candidates = value.to_string(),
            Axis::D => {
                wargs.d = u8::try_from(value)
                    .ok()
                    .filter(|d| (2..=8).contains(d))
                    .ok_or_else(|| CliError::Usage(format!("d = {value} outside 2..=8")))?
            }
            Axis::K => params.k = value as usize,
            Axis::BatchSize => {
                params.batch_size = u32::try_from(value)
                    .ok()
                    .filter(|b| (1..=1000).contains(b))
                    .ok_or_else(|| CliError::Usage(format!("batch size {value} outside 1..=1000")))?
            }
        }
        // k and batch size do not change the data.
        let reuse = matches!(args.axis, Axis::K | Axis::BatchSize);
        let fresh;
        let w = if reuse {
            if shared.is_none() {
                shared = Some(Workload::build(&wargs)?);
            }
            shared.as_ref().expect("built above")
        } else {
            fresh = Workload::build(&wargs)?;
            &fresh
        };
        let oracle = wargs.verify.then(|| oracle_sets(w));
        for &engine in &args.engine {
            let start = Instant::now();
            let out = evaluate(w, engine, &params)?;
            let wall_ms = ms(start);
            let (_, summary) = kmac_rows(w, engine, &params, &out, oracle.as_deref(), wall_ms);
            let mut row = vec![args.axis.name().to_string(), value.to_string()];
            row.extend(summary.cells());
            report.push(row);
        }
    }
    Ok(Output {
        report,
        progress: None,
    })
}
