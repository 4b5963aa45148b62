//! Squares, their line measurements, and the row/column/transpose action.
//!
//! Cells are stored row-major and indexed from 0, so cell `(r, c)` of an
//! order-`n` square lives at `r * n + c`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::perm;
use crate::{Error, Result};

/// Largest order whose values still fit a `u8` cell.
pub const MAX_ORDER: usize = 15;

/// `n(n²+1)/2`, the common line sum of a normal magic square of order `n`.
pub const fn magic_constant(n: usize) -> u64 {
    let n = n as u64;
    n * (n * n + 1) / 2
}

/// An order-`n` grid holding each of `1..=n²` exactly once.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Square {
    order: usize,
    cells: Vec<u8>,
}

impl Square {
    pub fn new(order: usize, cells: Vec<u8>) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                reason: "square orders run from 1 to 15",
            });
        }
        let values: Vec<i64> = cells.iter().map(|&v| v as i64).collect();
        check_permutation_of_range(order, &values)?;
        Ok(Square { order, cells })
    }

    /// Builds a square from arbitrary integers, rejecting anything out of
    /// `1..=n²` or repeated.
    pub fn from_values(order: usize, values: &[i64]) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                reason: "square orders run from 1 to 15",
            });
        }
        check_permutation_of_range(order, values)?;
        Ok(Square {
            order,
            cells: values.iter().map(|&v| v as u8).collect(),
        })
    }

    pub fn from_rows<const N: usize>(rows: [[u8; N]; N]) -> Result<Self> {
        Square::new(N, rows.iter().flatten().copied().collect())
    }

    pub(crate) fn from_cells_unchecked(order: usize, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), order * order);
        Square { order, cells }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.order + col]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.cells
            .chunks(self.order)
            .map(|row| row.iter().map(|&v| v as u64).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.order)
            .map(|c| (0..self.order).map(|r| self.get(r, c) as u64).sum())
            .collect()
    }

    /// Main diagonal and anti-diagonal sums.
    pub fn trace_sums(&self) -> (u64, u64) {
        let n = self.order;
        let main = (0..n).map(|i| self.get(i, i) as u64).sum();
        let minor = (0..n).map(|i| self.get(i, n - 1 - i) as u64).sum();
        (main, minor)
    }

    /// True iff every row, column and both main diagonals sum to the magic
    /// constant. Range and distinctness are guaranteed by construction.
    pub fn is_normal_magic(&self) -> bool {
        let mu = magic_constant(self.order);
        let (main, minor) = self.trace_sums();
        main == mu
            && minor == mu
            && self.row_sums().iter().all(|&s| s == mu)
            && self.col_sums().iter().all(|&s| s == mu)
    }

    /// Sums of the `2(n-1)` wraparound diagonals that are not main traces.
    ///
    /// The first `n-1` entries are the down-right diagonals
    /// `{(i, (i+k) mod n)}` for `k = 1..n`; the remaining `n-1` are the
    /// down-left diagonals `{(i, (n-1+k-i) mod n)}` for the same `k`, i.e.
    /// the anti-diagonal shifted `k` columns to the right.
    pub fn broken_diagonal_sums(&self) -> Vec<u64> {
        let n = self.order;
        let down_right = (1..n).map(move |k| (0..n).map(|i| self.get(i, (i + k) % n) as u64).sum());
        let down_left = (1..n).map(move |k| {
            (0..n)
                .map(|i| self.get(i, (2 * n - 1 + k - i) % n) as u64)
                .sum()
        });
        down_right.chain(down_left).collect()
    }

    /// Number of broken diagonals summing to the magic constant.
    pub fn magic_broken_diagonals(&self) -> usize {
        let mu = magic_constant(self.order);
        self.broken_diagonal_sums()
            .into_iter()
            .filter(|&s| s == mu)
            .count()
    }

    /// For each `v` in `1..=n²/2`, the cell indices holding `v` and `n²+1-v`,
    /// smaller index first.
    pub fn complement_pairs(&self) -> Result<Vec<(u8, u8)>> {
        if !self.order.is_multiple_of(2) {
            return Err(Error::UnsupportedOrder {
                order: self.order,
                reason: "complement pairs need an even order",
            });
        }
        let positions = self.positions();
        let top = self.cells.len();
        Ok((1..=top / 2)
            .map(|v| {
                let p = positions[v];
                let q = positions[top + 1 - v];
                (p.min(q), p.max(q))
            })
            .collect())
    }

    /// `positions()[v]` is the cell index holding value `v` (index 0 unused).
    pub fn positions(&self) -> Vec<u8> {
        let mut pos = alloc::vec![0u8; self.cells.len() + 1];
        for (i, &v) in self.cells.iter().enumerate() {
            pos[v as usize] = i as u8;
        }
        pos
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> i128 {
        let n = self.order;
        let mut m: Vec<i128> = self.cells.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n.saturating_sub(1) {
            if m[k * n + k] == 0 {
                let Some(swap) = (k + 1..n).find(|&r| m[r * n + k] != 0) else {
                    return 0;
                };
                for c in 0..n {
                    m.swap(k * n + c, swap * n + c);
                }
                sign = -sign;
            }
            let pivot = m[k * n + k];
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i * n + j] = (m[i * n + j] * pivot - m[i * n + k] * m[k * n + j]) / prev;
                }
            }
            prev = pivot;
        }
        sign * m[n * n - 1]
    }

    pub fn transpose(&self) -> Square {
        let n = self.order;
        let cells = (0..n * n).map(|i| self.get(i % n, i / n)).collect();
        Square::from_cells_unchecked(n, cells)
    }

    /// Canonical text encoding: cell values row-major, single-space separated.
    pub fn to_text(&self) -> String {
        use core::fmt::Write;
        let mut s = String::with_capacity(self.cells.len() * 3);
        write!(s, "{self}").expect("writing to a String");
        s
    }

    /// Orders squares by their canonical text encoding (byte order), which is
    /// not the numeric order `Ord` uses.
    pub fn text_cmp(&self, other: &Square) -> Ordering {
        self.to_text().cmp(&other.to_text())
    }
}

fn check_permutation_of_range(order: usize, values: &[i64]) -> Result<()> {
    let len = order * order;
    if values.len() != len {
        return Err(Error::CellCount {
            expected: len,
            found: values.len(),
        });
    }
    let mut seen = alloc::vec![false; len + 1];
    for (index, &value) in values.iter().enumerate() {
        if value < 1 || value > len as i64 {
            return Err(Error::ValueOutOfRange {
                index,
                value,
                max: len,
            });
        }
        if core::mem::replace(&mut seen[value as usize], true) {
            return Err(Error::DuplicateValue { index, value });
        }
    }
    Ok(())
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Square({self})")
    }
}

/// A row permutation, a column permutation and an optional transpose.
///
/// Applying it transposes first (if flagged), then sends source row `i` to
/// row `row_perm[i]` and source column `j` to column `col_perm[j]`. In matrix
/// terms that is `P A Q` or `P Aᵀ Q` for permutation matrices `P`, `Q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Transformation {
    transposed: bool,
    row_perm: Vec<u8>,
    col_perm: Vec<u8>,
}

impl Transformation {
    pub fn new(row_perm: Vec<u8>, col_perm: Vec<u8>, transposed: bool) -> Result<Self> {
        if row_perm.len() != col_perm.len() {
            return Err(Error::OrderMismatch {
                expected: row_perm.len(),
                found: col_perm.len(),
            });
        }
        for p in [&row_perm, &col_perm] {
            if !perm::is_permutation(p) {
                return Err(Error::InvalidPermutation { len: p.len() });
            }
        }
        Ok(Transformation {
            transposed,
            row_perm,
            col_perm,
        })
    }

    pub fn identity(order: usize) -> Self {
        let id: Vec<u8> = (0..order as u8).collect();
        Transformation {
            transposed: false,
            row_perm: id.clone(),
            col_perm: id,
        }
    }

    pub fn order(&self) -> usize {
        self.row_perm.len()
    }

    pub fn row_perm(&self) -> &[u8] {
        &self.row_perm
    }

    pub fn col_perm(&self) -> &[u8] {
        &self.col_perm
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn is_identity(&self) -> bool {
        *self == Transformation::identity(self.order())
    }

    pub fn apply(&self, square: &Square) -> Result<Square> {
        if square.order() != self.order() {
            return Err(Error::OrderMismatch {
                expected: self.order(),
                found: square.order(),
            });
        }
        Ok(self.apply_unchecked(square))
    }

    pub(crate) fn apply_unchecked(&self, square: &Square) -> Square {
        let n = self.order();
        let mut cells = alloc::vec![0u8; n * n];
        for r in 0..n {
            for c in 0..n {
                let v = if self.transposed {
                    square.get(c, r)
                } else {
                    square.get(r, c)
                };
                cells[self.row_perm[r] as usize * n + self.col_perm[c] as usize] = v;
            }
        }
        Square::from_cells_unchecked(n, cells)
    }

    /// The transformation that applies `inner` first and then `self`.
    pub fn compose(&self, inner: &Transformation) -> Transformation {
        if self.transposed {
            Transformation {
                transposed: !inner.transposed,
                row_perm: perm::compose(&self.row_perm, &inner.col_perm),
                col_perm: perm::compose(&self.col_perm, &inner.row_perm),
            }
        } else {
            Transformation {
                transposed: inner.transposed,
                row_perm: perm::compose(&self.row_perm, &inner.row_perm),
                col_perm: perm::compose(&self.col_perm, &inner.col_perm),
            }
        }
    }

    pub fn inverse(&self) -> Transformation {
        let rows = perm::invert(&self.row_perm);
        let cols = perm::invert(&self.col_perm);
        if self.transposed {
            Transformation {
                transposed: true,
                row_perm: cols,
                col_perm: rows,
            }
        } else {
            Transformation {
                transposed: false,
                row_perm: rows,
                col_perm: cols,
            }
        }
    }

    /// The eight rotations and reflections of the grid, identity first.
    ///
    /// Each is a triple whose permutations are the identity or the reversal.
    pub fn grid_symmetries(order: usize) -> Vec<Transformation> {
        let id: Vec<u8> = (0..order as u8).collect();
        let rev: Vec<u8> = id.iter().rev().copied().collect();
        let mut out = Vec::with_capacity(8);
        for transposed in [false, true] {
            for rows in [&id, &rev] {
                for cols in [&id, &rev] {
                    out.push(Transformation {
                        transposed,
                        row_perm: rows.clone(),
                        col_perm: cols.clone(),
                    });
                }
            }
        }
        out
    }

    /// Quarter turn clockwise.
    pub fn rotation(order: usize) -> Transformation {
        let id: Vec<u8> = (0..order as u8).collect();
        let rev: Vec<u8> = id.iter().rev().copied().collect();
        Transformation {
            transposed: true,
            row_perm: id,
            col_perm: rev,
        }
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("rows=")?;
        for p in &self.row_perm {
            write!(f, "{p}")?;
        }
        f.write_str(" cols=")?;
        for p in &self.col_perm {
            write!(f, "{p}")?;
        }
        write!(f, " transposed={}", u8::from(self.transposed))
    }
}
