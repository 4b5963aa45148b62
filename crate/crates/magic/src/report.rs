//! Human-readable report and generator listing.

use std::fmt::Write as _;

use magic_core::classify::Trigg;
use magic_core::generators::expected_histogram;

use crate::format::FORMAT_HEADER;
use crate::pipeline::{histogram_text, Analysis, Artifacts};

/// Generators one per line, grouped by subject, sorted by canonical text.
pub fn render_generators(artifacts: &Artifacts) -> String {
    let mut out = format!(
        "{FORMAT_HEADER}\n# kind=generators order={}\n# count={}\n",
        artifacts.order,
        artifacts.generators()
    );
    match &artifacts.analysis {
        Analysis::Single { partition, .. } => {
            for g in partition.generators() {
                let _ = writeln!(out, "{g}");
            }
        }
        Analysis::Order4 { census, .. } => {
            for c in &census.classes {
                for (name, size, gens) in c.sub_splits() {
                    let _ = writeln!(out, "# {name} orbit_size={size} count={}", gens.len());
                    for g in gens {
                        let _ = writeln!(out, "{g}");
                    }
                }
            }
        }
    }
    out
}

pub fn emit_report(artifacts: &Artifacts) -> String {
    let mut out = String::new();
    let n = artifacts.order;
    let _ = writeln!(out, "Order-{n} magic squares\n");
    let _ = writeln!(out, "squares: {}", artifacts.catalog.len());

    match &artifacts.analysis {
        Analysis::Single { group, partition } => {
            let _ = writeln!(out, "group order: {}", group.order());
            let _ = writeln!(out, "pair view order: {}", group.pair_view().len());
            let _ = writeln!(out, "orbits: {}", histogram_text(&partition.histogram()));
            let _ = writeln!(out, "generators: {}", partition.orbits.len());
            for g in partition.generators() {
                let _ = writeln!(out, "  {g}");
            }
        }
        Analysis::Order4 { census, .. } => {
            let pops: Vec<String> = Trigg::ALL
                .iter()
                .map(|&t| census.class(t).map_or(0, |c| c.population()).to_string())
                .collect();
            let total: usize = census.classes.iter().map(|c| c.population()).sum();
            let _ = writeln!(out, "totals: {} = {total}", pops.join("+"));
            let _ = writeln!(out, "generators: {}", census.total_generators());

            for c in &census.classes {
                let _ = writeln!(out, "\n== Type {} ==", c.trigg);
                let _ = writeln!(out, "population: {}", c.population());
                let _ = writeln!(out, "group order: {}", c.group.order());
                let _ = writeln!(out, "pair view order: {}", c.pair_view_order);
                let _ = writeln!(
                    out,
                    "histogram: {}",
                    histogram_text(&c.partition.histogram())
                );
                let _ = writeln!(
                    out,
                    "expected histogram: {}",
                    histogram_text(&expected_histogram(c.trigg))
                );
                let _ = writeln!(out, "generators: {}", c.partition.orbits.len());
                for (name, size, gens) in c.sub_splits() {
                    let _ = writeln!(out, "{name}: {} orbits of size {size}", gens.len());
                    for g in gens {
                        let _ = writeln!(out, "  {g}");
                    }
                }
            }
        }
    }

    let findings = artifacts.findings();
    let _ = writeln!(out, "\n== Discrepancies ({}) ==", findings.len());
    for f in findings {
        let _ = writeln!(
            out,
            "{}: expected {}, computed {}",
            f.subject, f.expected, f.computed
        );
    }
    out
}
