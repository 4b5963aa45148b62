//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILING` print FAIL but do not fail the run;
//! the process exits nonzero if any other criterion fails or a listed one
//! starts passing.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use magic_core::classify::{basis_of, Classifier, FastClassifier, Trigg};
use magic_core::constraints::{build_system, dependent_cells_order4};
use magic_core::enumerate::{self, enumerate_shard, SearchPlan, Shard};
use magic_core::generators::{decompose, verify_partition, Selection};
use magic_core::group::symmetry_group;
use magic_core::{Square, Transformation};
use magic_squares::format::render_catalog;
use magic_squares::pipeline::{analyze, pandiagonal_check, render_discrepancies, Analysis};
use magic_squares::shards::{enumerate_parallel, enumerate_sharded_serial};

const ORDER3_LIMIT: Duration = Duration::from_secs(1);
const ORDER4_LIMIT: Duration = Duration::from_secs(10);
const ORDER5_SAMPLE: usize = 10_000;
const ORDER5_SHARDS: u8 = 25;

/// Criteria whose reference targets disagree with exact computation.
const KNOWN_FAILING: &[u32] = &[3, 6];

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Line sums computed here rather than through the library.
fn magic_by_hand(cells: &[u8], n: usize) -> bool {
    let mu = (n * (n * n + 1) / 2) as u32;
    let at = |r: usize, c: usize| u32::from(cells[r * n + c]);
    let distinct: BTreeSet<u8> = cells.iter().copied().collect();
    cells.len() == n * n
        && distinct.len() == n * n
        && cells.iter().all(|&v| v >= 1 && usize::from(v) <= n * n)
        && (0..n).all(|r| (0..n).map(|c| at(r, c)).sum::<u32>() == mu)
        && (0..n).all(|c| (0..n).map(|r| at(r, c)).sum::<u32>() == mu)
        && (0..n).map(|i| at(i, i)).sum::<u32>() == mu
        && (0..n).map(|i| at(i, n - 1 - i)).sum::<u32>() == mu
}

fn durer() -> Square {
    Square::from_rows([
        [16, 3, 2, 13],
        [5, 10, 11, 8],
        [9, 6, 7, 12],
        [4, 15, 14, 1],
    ])
    .unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let found = enumerate::collect(3).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let mut perm: Vec<u8> = (1..=9).collect();
    let mut brute = BTreeSet::new();
    loop {
        if magic_by_hand(&perm, 3) {
            brute.insert(perm.clone());
        }
        // next lexicographic permutation
        let Some(i) = (0..8).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..9).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    let found_set: BTreeSet<Vec<u8>> = found.iter().map(|s| s.cells().to_vec()).collect();
    ensure(
        found.len() == 8 && found_set == brute && elapsed < ORDER3_LIMIT,
        format!(
            "{} squares, brute force {}, {:?} (limit {:?})",
            found.len(),
            brute.len(),
            elapsed,
            ORDER3_LIMIT
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let all = enumerate::collect(4).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let magic = all.iter().filter(|s| magic_by_hand(s.cells(), 4)).count();
    let distinct: BTreeSet<&Square> = all.iter().collect();
    ensure(
        all.len() == 7040
            && magic == all.len()
            && distinct.len() == all.len()
            && elapsed < ORDER4_LIMIT,
        format!(
            "{} squares, {} pass the re-check, {} distinct, {:?} single-threaded (limit {:?})",
            all.len(),
            magic,
            distinct.len(),
            elapsed,
            ORDER4_LIMIT
        ),
    )
}

fn criterion_3() -> Outcome {
    let four = build_system(4)
        .map_err(|e| e.to_string())?
        .free_cells()
        .len();
    let five = build_system(5)
        .map_err(|e| e.to_string())?
        .free_cells()
        .len();
    ensure(
        four == 7 && five == 13,
        format!("order 4: {four} free cells (want 7); order 5: {five} free cells (want 13)"),
    )
}

fn criterion_4() -> Outcome {
    let closed = dependent_cells_order4([16, 3, 2, 5, 10, 11, 9]);
    let system = build_system(4).map_err(|e| e.to_string())?;
    let mut grid = [0i64; 16];
    for (&cell, v) in system.free_cells().iter().zip([16, 3, 2, 5, 10, 11, 9]) {
        grid[cell] = v;
    }
    system
        .complete(&mut grid)
        .ok_or("elimination left a fraction")?;
    let printed: Vec<i64> = durer().cells().iter().map(|&v| i64::from(v)).collect();
    ensure(
        closed.as_slice() == printed && grid.as_slice() == printed,
        format!("closed form {closed:?}, elimination {grid:?}"),
    )
}

fn criterion_5(all: &[Square]) -> Outcome {
    let classifier = Classifier::from_catalog(all).map_err(|e| e.to_string())?;
    let mut by_class: BTreeMap<_, usize> = BTreeMap::new();
    let mut by_trigg: BTreeMap<Trigg, usize> = BTreeMap::new();
    for s in all {
        let label = classifier.classify(s).map_err(|e| e.to_string())?;
        *by_class.entry(label.dudeney).or_default() += 1;
        *by_trigg.entry(label.trigg).or_default() += 1;
    }
    let mut pops: Vec<usize> = by_class.values().copied().collect();
    pops.sort_unstable();
    let mut want = vec![384, 384, 384, 768, 768, 2432, 448, 448, 448, 448, 64, 64];
    want.sort_unstable();
    let trigg: Vec<usize> = Trigg::ALL.iter().map(|t| by_trigg[t]).collect();
    ensure(
        by_class.len() == 12 && pops == want && trigg == [1152, 3968, 1792, 128],
        format!(
            "{} classes, populations {pops:?}, A/B/C/D {trigg:?}",
            by_class.len()
        ),
    )
}

fn criterion_6(records: &[magic_squares::format::CatalogRecord]) -> Outcome {
    let (pandiagonal, union) = pandiagonal_check(records);
    ensure(
        pandiagonal == union,
        format!(
            "{} squares have all 6 broken diagonals magic; the three 384-classes hold {}; overlap {}",
            pandiagonal.len(),
            union.len(),
            pandiagonal.intersection(&union).count()
        ),
    )
}

fn criterion_7() -> Outcome {
    let all = enumerate::collect(3).map_err(|e| e.to_string())?;
    let group = symmetry_group(&all).map_err(|e| e.to_string())?;
    let axioms = group.verify_axioms().is_ok();
    let p = decompose("order 3", &all, &group, Selection::Ascending).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = p.orbits.iter().map(|o| o.size()).collect();
    ensure(
        sizes == [8] && axioms && verify_partition(&p, &all, &group).passed(),
        format!(
            "orbit sizes {sizes:?}, group order {}, axioms hold: {axioms}",
            group.order()
        ),
    )
}

fn criterion_8(artifacts: &magic_squares::pipeline::Artifacts) -> Outcome {
    let Analysis::Order4 { census, .. } = &artifacts.analysis else {
        return Err("not an order-4 analysis".into());
    };
    let checks = artifacts.verify().map_err(|e| e.to_string())?;
    let partitions_ok = checks.iter().all(|(_, v, same)| v.passed() && *same);
    let mismatched = census.discrepancies();
    let json = render_discrepancies(4, artifacts.findings());
    let parsed: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let listed = parsed["discrepancies"]
        .as_array()
        .map(|d| {
            d.iter()
                .filter(|f| {
                    f["subject"]
                        .as_str()
                        .is_some_and(|s| s.starts_with("orbit histogram") || s == "generator total")
                })
                .count()
        })
        .unwrap_or(0);
    let histograms: Vec<String> = census
        .classes
        .iter()
        .map(|c| {
            format!(
                "{}={}",
                c.trigg,
                magic_squares::pipeline::histogram_text(&c.partition.histogram())
            )
        })
        .collect();
    ensure(
        partitions_ok && listed == mismatched.len(),
        format!(
            "partitions verified: {partitions_ok}; {} generators; {}; {} target mismatches reported",
            census.total_generators(),
            histograms.join(" "),
            listed
        ),
    )
}

fn criterion_9(all: &[Square]) -> Outcome {
    let mut total = 0u64;
    let mut union = BTreeSet::new();
    for value in 1..=16 {
        enumerate_shard(4, &Shard::single(0, value), &mut |cells: &[u8]| {
            total += 1;
            union.insert(cells.to_vec());
            ControlFlow::Continue(())
        })
        .map_err(|e| e.to_string())?;
    }
    let whole: BTreeSet<Vec<u8>> = all.iter().map(|s| s.cells().to_vec()).collect();
    let parallel = render_catalog(4, &enumerate_parallel(4).map_err(|e| e.to_string())?);
    let serial = render_catalog(4, &enumerate_sharded_serial(4).map_err(|e| e.to_string())?);
    let plain = render_catalog(4, all);
    ensure(
        total == 7040 && union == whole && parallel == serial && serial == plain,
        format!(
            "shards sum to {total}, union {} of {}, parallel == serial: {}",
            union.len(),
            whole.len(),
            parallel == serial && serial == plain
        ),
    )
}

fn criterion_10() -> Outcome {
    let system = build_system(5).map_err(|e| e.to_string())?;
    let plan = SearchPlan::for_order(5).map_err(|e| e.to_string())?;
    let cell = plan.trial_order()[0];
    let per_shard = ORDER5_SAMPLE / usize::from(ORDER5_SHARDS);
    let mut sample = Vec::with_capacity(ORDER5_SAMPLE);
    for value in 1..=ORDER5_SHARDS {
        let before = sample.len();
        enumerate_shard(5, &Shard::single(cell, value), &mut |cells: &[u8]| {
            sample.push(cells.to_vec());
            if sample.len() - before == per_shard {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .map_err(|e| e.to_string())?;
    }
    let magic = sample.iter().filter(|c| magic_by_hand(c, 5)).count();
    let round_trips = sample
        .iter()
        .filter(|cells| {
            let mut grid = vec![0i64; 25];
            for &f in system.free_cells() {
                grid[f] = i64::from(cells[f]);
            }
            system.complete(&mut grid).is_some()
                && grid
                    .iter()
                    .zip(cells.iter())
                    .all(|(&g, &c)| g == i64::from(c))
        })
        .count();
    ensure(
        sample.len() == ORDER5_SAMPLE && magic == sample.len() && round_trips == sample.len(),
        format!(
            "{} sampled from {ORDER5_SHARDS} shards, {magic} magic, {round_trips} rebuilt from {} free cells",
            sample.len(),
            system.free_cells().len()
        ),
    )
}

fn criterion_11(all: &[Square]) -> Outcome {
    let a_squares: Vec<Square> = {
        let classifier = Classifier::from_catalog(all).map_err(|e| e.to_string())?;
        all.iter()
            .filter(|s| {
                classifier
                    .classify(s)
                    .map(|l| l.trigg == Trigg::A)
                    .unwrap_or(false)
            })
            .cloned()
            .collect()
    };
    let group = symmetry_group(&a_squares).map_err(|e| e.to_string())?;
    let d = durer();
    let associative = group.members().iter().all(|t1| {
        group
            .members()
            .iter()
            .all(|t2| t1.compose(t2).apply(&d).ok() == t2.apply(&d).and_then(|x| t1.apply(&x)).ok())
    });

    let row_swap = Transformation::new(vec![1, 0, 2, 3], vec![0, 1, 2, 3], false).unwrap();
    let antisymmetric = all
        .iter()
        .all(|s| row_swap.apply(s).map(|t| t.determinant()).ok() == Some(-s.determinant()));

    let identity = all.iter().all(|s| {
        let (t1, t2) = s.trace_sums();
        s.broken_diagonal_sums().iter().sum::<u64>() + t1 + t2 == 2 * 136
    });

    let syms = Transformation::grid_symmetries(4);
    let invariant = all.iter().all(|s| {
        let sig = magic_core::classify::signature(s).ok();
        syms.iter().all(|t| {
            t.apply(s)
                .ok()
                .and_then(|x| magic_core::classify::signature(&x).ok())
                == sig
        })
    });

    let full = Classifier::from_catalog(all).map_err(|e| e.to_string())?;
    let fast = FastClassifier::train(full.clone(), all).map_err(|e| e.to_string())?;
    let agree = all
        .iter()
        .all(|s| fast.classify_basis(basis_of(s)).ok().map(|(l, _)| l) == full.classify(s).ok());

    ensure(
        associative && antisymmetric && identity && invariant && agree,
        format!(
            "associativity {associative}, row-swap antisymmetry {antisymmetric}, \
             broken-diagonal identity {identity}, signature invariance {invariant}, \
             fast == full on {} squares {agree}",
            all.len()
        ),
    )
}

fn main() -> ExitCode {
    let all = enumerate::collect(4).expect("order-4 catalog");
    let artifacts = analyze(4).expect("order-4 pipeline");
    let Analysis::Order4 { records, .. } = &artifacts.analysis else {
        unreachable!("order 4 gives an order-4 analysis")
    };

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "order-3 enumeration", criterion_1()),
        (2, "order-4 enumeration", criterion_2()),
        (3, "free-cell basis", criterion_3()),
        (4, "Durer round trip", criterion_4()),
        (5, "signature classes", criterion_5(&all)),
        (6, "pandiagonal characterization", criterion_6(records)),
        (7, "order-3 orbit decomposition", criterion_7()),
        (8, "generator census", criterion_8(&artifacts)),
        (9, "shard completeness", criterion_9(&all)),
        (10, "order-5 sample", criterion_10()),
        (11, "property suites", criterion_11(&all)),
    ];

    let mut unexpected = 0;
    for (id, name, outcome) in &results {
        let known = KNOWN_FAILING.contains(id);
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let note = if known { " [known]" } else { "" };
        println!("{status} {id:>2} {name}: {detail}{note}");
        if outcome.is_ok() == known {
            unexpected += 1;
        }
    }
    let passed = results.iter().filter(|r| r.2.is_ok()).count();
    println!(
        "{passed}/{} criteria pass, {unexpected} unexpected",
        results.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
