//! Parallel and resumable sharded enumeration.
//!
//! Shards fix values on the leading trial cells of the search plan. Each
//! worker owns its shard's search state and buffers its output; buffers are
//! concatenated in prefix order, so parallel and serial runs produce the same
//! catalog byte for byte.

use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use magic_core::constraints::cell_name;
use magic_core::enumerate::{enumerate_with_plan, SearchPlan, Shard};
use magic_core::Square;
use rayon::prelude::*;

use crate::format::{write_atomic, FORMAT_HEADER};
use crate::{Error, Result};

/// Every shard fixing the first `depth` trial cells, in ascending prefix
/// order. Prefixes with repeated values are skipped.
pub fn prefix_shards(plan: &SearchPlan, depth: usize) -> Vec<Shard> {
    let cells: Vec<usize> = plan.trial_order().into_iter().take(depth).collect();
    let top = (plan.order() * plan.order()) as u8;
    let mut shards = vec![Shard::default()];
    for &cell in &cells {
        shards = shards
            .into_iter()
            .flat_map(|s| {
                (1..=top)
                    .filter(|v| !s.prefix.iter().any(|&(_, u)| u == *v))
                    .map(|v| {
                        let mut next = s.clone();
                        next.prefix.push((cell, v));
                        next
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    shards
}

pub fn collect_shard(plan: &SearchPlan, shard: &Shard) -> Result<Vec<Square>> {
    let n = plan.order();
    let mut out = Vec::new();
    enumerate_with_plan(plan, shard, &mut |cells: &[u8]| {
        out.push(Square::new(n, cells.to_vec()).expect("search emits valid squares"));
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_shard(plan: &SearchPlan, shard: &Shard) -> Result<u64> {
    Ok(enumerate_with_plan(plan, shard, &mut |_: &[u8]| {
        ControlFlow::Continue(())
    })?)
}

/// Full enumeration split over the first trial cell and run on the rayon
/// pool. Output order equals the serial search order.
pub fn enumerate_parallel(order: usize) -> Result<Vec<Square>> {
    let plan = SearchPlan::for_order(order)?;
    let parts = prefix_shards(&plan, 1)
        .par_iter()
        .map(|s| collect_shard(&plan, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Same shards as [`enumerate_parallel`], run one after another.
pub fn enumerate_sharded_serial(order: usize) -> Result<Vec<Square>> {
    let plan = SearchPlan::for_order(order)?;
    let mut out = Vec::new();
    for s in prefix_shards(&plan, 1) {
        out.extend(collect_shard(&plan, &s)?);
    }
    Ok(out)
}

pub fn shard_label(shard: &Shard) -> String {
    shard
        .prefix
        .iter()
        .map(|&(c, v)| format!("{}{v}", cell_name(c)))
        .collect::<Vec<_>>()
        .join("-")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardCount {
    pub label: String,
    pub count: u64,
    /// Read back from a checkpoint instead of recomputed.
    pub resumed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongRun {
    pub order: usize,
    pub shards: Vec<ShardCount>,
}

impl LongRun {
    pub fn total(&self) -> u64 {
        self.shards.iter().map(|s| s.count).sum()
    }

    pub fn resumed(&self) -> usize {
        self.shards.iter().filter(|s| s.resumed).count()
    }
}

fn checkpoint_path(dir: &Path, shard: &Shard) -> PathBuf {
    dir.join(format!("shard-{}.count", shard_label(shard)))
}

fn read_checkpoint(path: &Path) -> Option<u64> {
    let text = fs::read_to_string(path).ok()?;
    if text.lines().next() != Some(FORMAT_HEADER) {
        return None;
    }
    text.lines()
        .find_map(|l| l.strip_prefix("count=")?.parse().ok())
}

/// Counts every square of `order` shard by shard, writing one checkpoint per
/// finished shard into `dir`. Shards whose checkpoint already exists are not
/// rerun, so an interrupted job resumes where it stopped.
pub fn long_run(order: usize, dir: &Path, depth: usize) -> Result<LongRun> {
    let plan = SearchPlan::for_order(order)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let shards = prefix_shards(&plan, depth);
    let counts = shards
        .par_iter()
        .map(|shard| {
            let path = checkpoint_path(dir, shard);
            let label = shard_label(shard);
            if let Some(count) = read_checkpoint(&path) {
                return Ok(ShardCount {
                    label,
                    count,
                    resumed: true,
                });
            }
            let count = count_shard(&plan, shard)?;
            write_atomic(
                &path,
                &format!("{FORMAT_HEADER}\n# kind=shard-count order={order}\nshard={label}\ncount={count}\n"),
            )?;
            Ok(ShardCount {
                label,
                count,
                resumed: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let run = LongRun {
        order,
        shards: counts,
    };
    write_atomic(
        &dir.join("total.count"),
        &format!(
            "{FORMAT_HEADER}\n# kind=total-count order={order}\nshards={}\ncount={}\n",
            run.shards.len(),
            run.total()
        ),
    )?;
    Ok(run)
}
