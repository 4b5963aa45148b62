use std::io::Write as _;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use magic_core::classify::{Trigg, ORDER4_TOTAL};
use magic_core::constraints::{build_system, parse_cell_name};
use magic_core::enumerate::{enumerate_shard, Shard};
use magic_core::Square;
use magic_squares::format::{
    read_catalog, read_classification, render_catalog, render_classification,
    render_classification_kv, render_group, write_atomic,
};
use magic_squares::pipeline::{
    census_records, classify_catalog, order4_findings, parallel_group, render_discrepancies,
    run_pipeline, squares_of, verify_file, Analysis, Artifacts,
};
use magic_squares::report::emit_report;
use magic_squares::shards::{enumerate_parallel, long_run};

#[derive(Parser)]
#[command(
    name = "magic",
    version,
    about = "Enumerate and classify normal magic squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a catalog of every square of an order, or of one shard.
    Enumerate {
        #[arg(long)]
        order: usize,
        /// Cell to fix, by letter (`a`) or row-major index.
        #[arg(long, requires = "shard_value")]
        shard_cell: Option<String>,
        #[arg(long, requires = "shard_cell")]
        shard_value: Option<u8>,
        /// Stop after this many squares.
        #[arg(long)]
        limit: Option<u64>,
        /// Catalog file; stdout when omitted. With --long-run, the
        /// checkpoint directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Count every square with resumable per-shard checkpoints.
        #[arg(long)]
        long_run: bool,
    },
    /// Label a complete order-4 catalog. Also writes a `.kv` sidecar.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the symmetry group of one class.
    Group {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_trigg)]
        trigg: Trigg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Peel every class into orbits and write the report plus a
    /// discrepancy file next to it.
    Generators {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline into a directory.
    Report {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        long_run: bool,
    },
    /// Re-check a catalog, classification or group file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
}

#[derive(Subcommand)]
enum Analyze {
    /// Print the free cells and dependency formulas.
    Basis {
        #[arg(long)]
        order: usize,
    },
}

fn parse_trigg(s: &str) -> Result<Trigg, String> {
    Trigg::from_letter(s).ok_or_else(|| format!("expected A, B, C or D, got `{s}`"))
}

fn parse_cell(s: &str, order: usize) -> anyhow::Result<usize> {
    let cell = match s.parse::<usize>() {
        Ok(i) => i,
        Err(_) => parse_cell_name(s).with_context(|| format!("unknown cell `{s}`"))?,
    };
    if cell >= order * order {
        bail!("cell `{s}` is outside an order-{order} grid");
    }
    Ok(cell)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_atomic(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn long_run_dir(out: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    out.context("--long-run needs --out DIR for its checkpoints")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Enumerate {
            order,
            shard_cell,
            shard_value,
            limit,
            out,
            long_run: long,
        } => {
            if long {
                let dir = long_run_dir(out)?;
                let run = long_run(order, &dir, 2)?;
                eprintln!("# shards={} resumed={}", run.shards.len(), run.resumed());
                println!("{}", run.total());
                return Ok(());
            }
            if order >= 5 && limit.is_none() {
                bail!("order {order} is a long-run job: pass --long-run, or --limit for a sample");
            }
            let shard = match (shard_cell, shard_value) {
                (Some(c), Some(v)) => Some(Shard::single(parse_cell(&c, order)?, v)),
                _ => None,
            };
            let squares = match (&shard, limit) {
                (None, None) => enumerate_parallel(order)?,
                _ => {
                    let shard = shard.unwrap_or_default();
                    let mut squares = Vec::new();
                    enumerate_shard(order, &shard, &mut |cells: &[u8]| {
                        squares.push(Square::new(order, cells.to_vec()).expect("valid"));
                        if limit.is_some_and(|l| squares.len() as u64 >= l) {
                            ControlFlow::Break(())
                        } else {
                            ControlFlow::Continue(())
                        }
                    })?;
                    squares
                }
            };
            emit(out.as_deref(), &render_catalog(order, &squares))?;
            eprintln!("# count={}", squares.len());
        }
        Command::Classify { input, out } => {
            let catalog = read_catalog(&input)?;
            if catalog.order != 4 {
                bail!(
                    "classification is defined for order 4, found order {}",
                    catalog.order
                );
            }
            let records = classify_catalog(&catalog.squares)?;
            write_atomic(&out, &render_classification(&records))?;
            write_atomic(
                &out.with_extension("kv"),
                &render_classification_kv(&records),
            )?;
            eprintln!("# records={}", records.len());
        }
        Command::Group { input, trigg, out } => {
            let records = read_classification(&input)?;
            let group = parallel_group(&squares_of(&records, trigg))
                .with_context(|| format!("class {trigg}"))?;
            let text = render_group(Some(trigg), 4, group.members(), group.pair_view().len());
            emit(out.as_deref(), &text)?;
            eprintln!("# group_order={}", group.order());
        }
        Command::Generators { input, out } => {
            let mut records = read_classification(&input)?;
            if records.len() != ORDER4_TOTAL {
                bail!("expected {ORDER4_TOTAL} records, found {}", records.len());
            }
            let census = census_records(&mut records)?;
            let findings = order4_findings(&records, &census)?;
            let artifacts = Artifacts {
                order: 4,
                catalog: records.iter().map(|r| r.square.clone()).collect(),
                analysis: Analysis::Order4 {
                    records,
                    census,
                    findings,
                },
            };
            write_atomic(&out, &emit_report(&artifacts))?;
            write_atomic(
                &out.with_extension("json"),
                &render_discrepancies(4, artifacts.findings()),
            )?;
            eprintln!(
                "# generators={} discrepancies={}",
                artifacts.generators(),
                artifacts.findings().len()
            );
        }
        Command::Report {
            order,
            out,
            long_run: long,
        } => {
            if order >= 5 {
                if !long {
                    bail!("order {order} needs --long-run");
                }
                let run = long_run(order, &out.join("shards"), 2)?;
                let free = build_system(order)?.free_cells().len();
                let text = format!(
                    "# format=1\n# kind=summary\norder={order}\nfree_cells={free}\nshards={}\nsquares={}\n",
                    run.shards.len(),
                    run.total()
                );
                write_atomic(&out.join("summary.txt"), &text)?;
                print!("{text}");
                return Ok(());
            }
            let summary = run_pipeline(order, &out)?;
            print!("{}", summary.text);
        }
        Command::Verify { input } => {
            println!("{}", verify_file(&input)?);
        }
        Command::Analyze {
            what: Analyze::Basis { order },
        } => {
            print!("{}", build_system(order)?.describe());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
