//! Backtracking enumeration of normal magic squares over a free-cell basis.
//!
//! The search assigns free cells one at a time, trying available values in
//! ascending order. As soon as every free cell a dependent cell relies on is
//! assigned, that dependent is computed, checked for range and distinctness,
//! and its value is removed from the available pool. A failed check
//! withdraws the current trial.
//!
//! The trial order is derived from the constraint system: at each step pick
//! the unassigned free cell that completes the most dependents, ties going
//! to the earliest cell in reading order. For order 4 this is
//! `a b c e i f g`, forcing `d` after `c` and `m`, `p` after `i`.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::constraints::{build_system, ConstraintSystem, Dependency};
use crate::{Error, Result};

/// Largest number of cells the search state holds (order 5).
const MAX_CELLS: usize = 25;

/// Receives each square as its row-major cells. Returning `Break` stops the
/// search early.
pub trait Sink {
    fn accept(&mut self, cells: &[u8]) -> ControlFlow<()>;
}

impl<F: FnMut(&[u8]) -> ControlFlow<()>> Sink for F {
    fn accept(&mut self, cells: &[u8]) -> ControlFlow<()> {
        self(cells)
    }
}

#[derive(Clone, Debug)]
struct Step {
    cell: usize,
    forced: Vec<Dependency>,
}

/// A fixed trial order over the free cells, with the dependents each
/// assignment completes.
#[derive(Clone, Debug)]
pub struct SearchPlan {
    order: usize,
    constant: Vec<Dependency>,
    steps: Vec<Step>,
}

impl SearchPlan {
    pub fn for_order(n: usize) -> Result<SearchPlan> {
        if !(3..=5).contains(&n) {
            return Err(Error::UnsupportedOrder {
                order: n,
                reason: "enumeration covers orders 3 to 5",
            });
        }
        Ok(SearchPlan::from_system(&build_system(n)?))
    }

    pub fn from_system(system: &ConstraintSystem) -> SearchPlan {
        let deps = system.dependencies();
        let (constant, mut pending): (Vec<_>, Vec<_>) =
            deps.iter().cloned().partition(|d| d.form.terms.is_empty());
        let mut remaining: Vec<usize> = system.free_cells().to_vec();
        let mut assigned: Vec<usize> = Vec::new();
        let mut steps = Vec::new();

        let completes = |assigned: &[usize], d: &Dependency| {
            d.form.terms.iter().all(|(c, _)| assigned.contains(c))
        };

        while !remaining.is_empty() {
            let mut best = 0;
            let mut best_gain = 0;
            for (i, &cell) in remaining.iter().enumerate() {
                let mut trial = assigned.clone();
                trial.push(cell);
                let gain = pending.iter().filter(|d| completes(&trial, d)).count();
                if gain > best_gain {
                    best = i;
                    best_gain = gain;
                }
            }
            let cell = remaining.remove(best);
            assigned.push(cell);
            let (now, later): (Vec<_>, Vec<_>) =
                pending.into_iter().partition(|d| completes(&assigned, d));
            pending = later;
            steps.push(Step { cell, forced: now });
        }
        debug_assert!(pending.is_empty());

        SearchPlan {
            order: system.order(),
            constant,
            steps,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Free cells in the order they are tried.
    pub fn trial_order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.cell).collect()
    }

    /// Dependent cells computed right after the `step`-th trial cell.
    pub fn forced_after(&self, step: usize) -> Vec<usize> {
        self.steps[step].forced.iter().map(|d| d.cell).collect()
    }
}

/// Restricts a search to the subtree where some free cells carry fixed
/// values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Shard {
    pub prefix: Vec<(usize, u8)>,
}

impl Shard {
    pub fn single(cell: usize, value: u8) -> Shard {
        Shard {
            prefix: alloc::vec![(cell, value)],
        }
    }

    fn validate(&self, plan: &SearchPlan) -> Result<[u8; MAX_CELLS]> {
        let top = plan.order * plan.order;
        let free = plan.trial_order();
        let mut fixed = [0u8; MAX_CELLS];
        let mut values_seen = 0u32;
        for &(cell, value) in &self.prefix {
            if !free.contains(&cell) {
                return Err(Error::InvalidShard(alloc::format!(
                    "cell {cell} is not a free cell of the order-{} basis",
                    plan.order
                )));
            }
            if value == 0 || value as usize > top {
                return Err(Error::InvalidShard(alloc::format!(
                    "value {value} is outside 1..={top}"
                )));
            }
            if fixed[cell] != 0 {
                return Err(Error::InvalidShard(alloc::format!(
                    "cell {cell} is fixed twice"
                )));
            }
            if values_seen & (1 << value) != 0 {
                return Err(Error::InvalidShard(alloc::format!(
                    "value {value} is fixed twice"
                )));
            }
            values_seen |= 1 << value;
            fixed[cell] = value;
        }
        Ok(fixed)
    }
}

/// Assigned cells and the pool of values already taken.
#[derive(Clone, Debug)]
pub struct SearchState {
    top: i64,
    grid: [i64; MAX_CELLS],
    used: u32,
}

impl SearchState {
    fn new(order: usize) -> SearchState {
        SearchState {
            top: (order * order) as i64,
            grid: [0; MAX_CELLS],
            used: 0,
        }
    }

    pub fn is_used(&self, value: i64) -> bool {
        self.used & (1 << value) != 0
    }

    fn take(&mut self, cell: usize, value: i64) {
        self.grid[cell] = value;
        self.used |= 1 << value;
    }

    fn release(&mut self, value: i64) {
        self.used &= !(1 << value);
    }

    /// Computes and takes each forced cell; on failure releases whatever was
    /// taken and returns `false`.
    fn force(&mut self, forced: &[Dependency]) -> bool {
        for (i, dep) in forced.iter().enumerate() {
            let ok = match dep.form.eval(&self.grid) {
                Some(v) if (1..=self.top).contains(&v) && !self.is_used(v) => {
                    self.take(dep.cell, v);
                    true
                }
                _ => false,
            };
            if !ok {
                self.unforce(&forced[..i]);
                return false;
            }
        }
        true
    }

    fn unforce(&mut self, forced: &[Dependency]) {
        for dep in forced {
            self.release(self.grid[dep.cell]);
        }
    }
}

struct Search<'a, S: Sink> {
    plan: &'a SearchPlan,
    fixed: [u8; MAX_CELLS],
    state: SearchState,
    out: [u8; MAX_CELLS],
    emitted: u64,
    sink: &'a mut S,
}

impl<S: Sink> Search<'_, S> {
    fn descend(&mut self, depth: usize) -> ControlFlow<()> {
        let Some(step) = self.plan.steps.get(depth) else {
            let cells = self.plan.order * self.plan.order;
            for (o, &v) in self.out[..cells].iter_mut().zip(&self.state.grid) {
                *o = v as u8;
            }
            self.emitted += 1;
            return self.sink.accept(&self.out[..cells]);
        };
        let (lo, hi) = match self.fixed[step.cell] {
            0 => (1, self.state.top),
            v => (v as i64, v as i64),
        };
        for value in lo..=hi {
            if self.state.is_used(value) {
                continue;
            }
            self.state.take(step.cell, value);
            if self.state.force(&step.forced) {
                let flow = self.descend(depth + 1);
                self.state.unforce(&step.forced);
                self.state.release(value);
                flow?;
            } else {
                self.state.release(value);
            }
        }
        ControlFlow::Continue(())
    }
}

/// Runs the search under `shard`, returning how many squares reached the sink.
pub fn enumerate_with_plan<S: Sink>(plan: &SearchPlan, shard: &Shard, sink: &mut S) -> Result<u64> {
    let fixed = shard.validate(plan)?;
    let mut search = Search {
        plan,
        fixed,
        state: SearchState::new(plan.order),
        out: [0; MAX_CELLS],
        emitted: 0,
        sink,
    };
    if search.state.force(&plan.constant) {
        let _ = search.descend(0);
    }
    Ok(search.emitted)
}

/// Streams every normal magic square of order `n` (3 to 5) to `sink`.
pub fn enumerate<S: Sink>(n: usize, sink: &mut S) -> Result<u64> {
    enumerate_shard(n, &Shard::default(), sink)
}

pub fn enumerate_shard<S: Sink>(n: usize, shard: &Shard, sink: &mut S) -> Result<u64> {
    enumerate_with_plan(&SearchPlan::for_order(n)?, shard, sink)
}

pub fn count(n: usize) -> Result<u64> {
    enumerate(n, &mut |_: &[u8]| ControlFlow::Continue(()))
}

/// Collects the squares of one order into memory, in search order.
pub fn collect(n: usize) -> Result<Vec<crate::Square>> {
    let mut out = Vec::new();
    enumerate(n, &mut |cells: &[u8]| {
        out.push(crate::Square::from_cells_unchecked(n, cells.to_vec()));
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Square;
    use alloc::collections::BTreeSet;

    /// Every arrangement of 1..=9, kept when all eight lines sum to 15.
    fn brute_force_order3() -> BTreeSet<Vec<u8>> {
        let perms = crate::perm::all_permutations(9);
        perms
            .into_iter()
            .map(|p| p.iter().map(|&x| x + 1).collect::<Vec<u8>>())
            .filter(|cells| Square::new(3, cells.clone()).unwrap().is_normal_magic())
            .collect()
    }

    #[test]
    fn order4_trial_order() {
        let plan = SearchPlan::for_order(4).unwrap();
        assert_eq!(plan.trial_order(), [0, 1, 2, 4, 8, 5, 6]);
        assert_eq!(plan.forced_after(0), [] as [usize; 0]);
        assert_eq!(plan.forced_after(2), [3]);
        assert_eq!(plan.forced_after(4), [12, 15]);
        // k has no g term
        assert_eq!(plan.forced_after(5), [10]);
        assert_eq!(plan.forced_after(6), [7, 9, 11, 13, 14]);
    }

    #[test]
    fn order3_matches_brute_force() {
        let mut found = BTreeSet::new();
        let n = enumerate(3, &mut |c: &[u8]| {
            found.insert(c.to_vec());
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(n, 8);
        assert_eq!(found, brute_force_order3());
    }

    #[test]
    fn order4_count() {
        assert_eq!(count(4).unwrap(), 7040);
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(count(2), Err(Error::UnsupportedOrder { .. })));
        assert!(matches!(count(6), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn early_stop() {
        let mut seen = 0;
        let n = enumerate(4, &mut |_: &[u8]| {
            seen += 1;
            if seen == 10 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(n, 10);
    }

    #[test]
    fn invalid_shards() {
        let bad =
            |shard: Shard| enumerate_shard(4, &shard, &mut |_: &[u8]| ControlFlow::Continue(()));
        assert!(matches!(
            bad(Shard::single(3, 1)),
            Err(Error::InvalidShard(_))
        ));
        assert!(matches!(
            bad(Shard::single(0, 0)),
            Err(Error::InvalidShard(_))
        ));
        assert!(matches!(
            bad(Shard::single(0, 17)),
            Err(Error::InvalidShard(_))
        ));
        let twice = Shard {
            prefix: alloc::vec![(0, 5), (1, 5)],
        };
        assert!(matches!(bad(twice), Err(Error::InvalidShard(_))));
    }

    #[test]
    fn first_squares_ascend() {
        let all = collect(4).unwrap();
        assert_eq!(all.len(), 7040);
        // trial cells a, b, c, e, i, f, g ascend in search order
        let key = |s: &Square| [0, 1, 2, 4, 8, 5, 6].map(|i| s.cells()[i]);
        assert!(all.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    }
}
