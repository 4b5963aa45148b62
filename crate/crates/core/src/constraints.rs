//! The linear magic-sum system and its free-cell basis.
//!
//! An order-`n` square obeys `2n + 2` linear equations (rows, columns, both
//! traces), all with right-hand side `μ = n(n²+1)/2`. Exact elimination over
//! the rationals yields the rank, the free cells and, for every other cell,
//! an affine expression over the free cells.
//!
//! Pivots are chosen scanning cells in reverse reading order, so the earliest
//! cells stay free. For order 4 this leaves `a b c e f g i` free.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::square::magic_constant;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ratio {
    num: i64,
    den: i64,
}

impl Ratio {
    const ZERO: Ratio = Ratio { num: 0, den: 1 };

    fn new(num: i64, den: i64) -> Ratio {
        debug_assert!(den != 0);
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ratio {
            num: s * num / g,
            den: s * den / g,
        }
    }

    fn int(v: i64) -> Ratio {
        Ratio { num: v, den: 1 }
    }

    fn is_zero(self) -> bool {
        self.num == 0
    }

    fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }

    fn mul(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.num, self.den * o.den)
    }

    fn div(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den, self.den * o.num)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// `(constant + Σ coeff·cell) / denominator` with integer parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub constant: i64,
    /// `(free cell index, coefficient)`, ascending by cell, zeros omitted.
    pub terms: Vec<(usize, i64)>,
    pub denominator: i64,
}

impl AffineForm {
    /// Evaluates against a full grid; `None` when the result is not an integer.
    pub fn eval(&self, grid: &[i64]) -> Option<i64> {
        let total = self
            .terms
            .iter()
            .fold(self.constant, |acc, &(cell, k)| acc + k * grid[cell]);
        (total % self.denominator == 0).then(|| total / self.denominator)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dependency {
    pub cell: usize,
    pub form: AffineForm,
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    order: usize,
    magic: i64,
    equations: Vec<Vec<i64>>,
    rank: usize,
    free_cells: Vec<usize>,
    dependencies: Vec<Dependency>,
}

/// Coefficient rows of the `2n+2` magic-sum equations: rows, columns, main
/// trace, minor trace.
pub fn magic_equations(n: usize) -> Vec<Vec<i64>> {
    let cells = n * n;
    let mut eqs = Vec::with_capacity(2 * n + 2);
    let line = |pick: &dyn Fn(usize) -> usize| {
        let mut row = alloc::vec![0i64; cells];
        for i in 0..n {
            row[pick(i)] = 1;
        }
        row
    };
    for r in 0..n {
        eqs.push(line(&|i| r * n + i));
    }
    for c in 0..n {
        eqs.push(line(&|i| i * n + c));
    }
    eqs.push(line(&|i| i * n + i));
    eqs.push(line(&|i| i * n + (n - 1 - i)));
    eqs
}

pub fn build_system(n: usize) -> Result<ConstraintSystem> {
    if n < 3 {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "the constraint system needs order 3 or more",
        });
    }
    let cells = n * n;
    let magic = magic_constant(n) as i64;
    let equations = magic_equations(n);

    // augmented rows: coefficients followed by the right-hand side
    let mut m: Vec<Vec<Ratio>> = equations
        .iter()
        .map(|eq| {
            eq.iter()
                .map(|&k| Ratio::int(k))
                .chain(core::iter::once(Ratio::int(magic)))
                .collect()
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, cell)
    let mut next_row = 0;
    for col in (0..cells).rev() {
        if next_row == m.len() {
            break;
        }
        let Some(found) = (next_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, found);
        let p = m[next_row][col];
        for x in m[next_row].iter_mut() {
            *x = x.div(p);
        }
        let pivot_row = m[next_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != next_row && !row[col].is_zero() {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = x.sub(f.mul(y));
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }

    let rank = pivots.len();
    let dependent: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free_cells: Vec<usize> = (0..cells).filter(|c| !dependent.contains(c)).collect();

    let mut dependencies: Vec<Dependency> = pivots
        .iter()
        .map(|&(row, cell)| {
            // x_cell = rhs - Σ_free coeff·x_free
            let rhs = m[row][cells];
            let coeffs: Vec<(usize, Ratio)> = free_cells
                .iter()
                .map(|&f| (f, Ratio::ZERO.sub(m[row][f])))
                .filter(|(_, k)| !k.is_zero())
                .collect();
            let den = coeffs.iter().fold(rhs.den, |acc, (_, k)| lcm(acc, k.den));
            Dependency {
                cell,
                form: AffineForm {
                    constant: rhs.num * (den / rhs.den),
                    terms: coeffs
                        .iter()
                        .map(|&(f, k)| (f, k.num * (den / k.den)))
                        .collect(),
                    denominator: den,
                },
            }
        })
        .collect();
    dependencies.sort_by_key(|d| d.cell);

    Ok(ConstraintSystem {
        order: n,
        magic,
        equations,
        rank,
        free_cells,
        dependencies,
    })
}

impl ConstraintSystem {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn magic(&self) -> i64 {
        self.magic
    }

    pub fn equations(&self) -> &[Vec<i64>] {
        &self.equations
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn free_cells(&self) -> &[usize] {
        &self.free_cells
    }

    pub fn dependencies(&self) -> &[Dependency] {
        &self.dependencies
    }

    /// Fills every dependent cell from the free cells already present in
    /// `grid`. Returns `None` if some dependent value is not an integer.
    pub fn complete(&self, grid: &mut [i64]) -> Option<()> {
        for dep in &self.dependencies {
            grid[dep.cell] = dep.form.eval(grid)?;
        }
        Some(())
    }

    /// True iff `grid` satisfies every equation exactly.
    pub fn satisfied_by(&self, grid: &[i64]) -> bool {
        self.equations
            .iter()
            .all(|eq| eq.iter().zip(grid).map(|(&k, &v)| k * v).sum::<i64>() == self.magic)
    }

    /// Stable text description: rank, free cells and one line per dependent
    /// cell, e.g. `d = 34 - a - b - c`.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = self.free_cells.iter().map(|&c| cell_name(c)).collect();
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "magic constant {}", self.magic);
        let _ = writeln!(out, "equations {}", self.equations.len());
        let _ = writeln!(out, "rank {}", self.rank);
        let _ = writeln!(
            out,
            "free cells {} [{}]",
            self.free_cells.len(),
            names.join(" ")
        );
        for dep in &self.dependencies {
            let _ = writeln!(out, "{} = {}", cell_name(dep.cell), dep.form);
        }
        out
    }
}

/// Letter name of a cell in reading order (`a` = 0), or `x<index>` past `z`.
pub fn cell_name(index: usize) -> String {
    if index < 26 {
        String::from((b'a' + index as u8) as char)
    } else {
        alloc::format!("x{index}")
    }
}

/// Parses a letter name (`a`..`z`) or a plain index.
pub fn parse_cell_name(name: &str) -> Option<usize> {
    let name = name.trim();
    let bytes = name.as_bytes();
    if bytes.len() == 1 && bytes[0].is_ascii_lowercase() {
        return Some((bytes[0] - b'a') as usize);
    }
    name.parse().ok()
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        let mut first = true;
        let mut push = |body: &mut String, k: i64, name: Option<&str>| {
            let sign = if k < 0 { "-" } else { "+" };
            if first {
                if k < 0 {
                    body.push('-');
                }
            } else {
                let _ = write!(body, " {sign} ");
            }
            first = false;
            match name {
                Some(n) if k.abs() == 1 => body.push_str(n),
                Some(n) => {
                    let _ = write!(body, "{}{n}", k.abs());
                }
                None => {
                    let _ = write!(body, "{}", k.abs());
                }
            }
        };
        let lead_constant = self.constant > 0;
        if lead_constant {
            push(&mut body, self.constant, None);
        }
        for &(cell, k) in &self.terms {
            push(&mut body, k, Some(&cell_name(cell)));
        }
        if !lead_constant && (self.constant != 0 || self.terms.is_empty()) {
            push(&mut body, self.constant, None);
        }
        if self.denominator == 1 {
            f.write_str(&body)
        } else {
            write!(f, "({body}) / {}", self.denominator)
        }
    }
}

/// The order-4 dependents in closed form, from the basis `(a, b, c, e, f, g, i)`.
///
/// The result always satisfies the ten line equations; range and
/// distinctness are checked separately by [`validate_grid`].
pub fn dependent_cells_order4(basis: [i64; 7]) -> [i64; 16] {
    let [a, b, c, e, f, g, i] = basis;
    let d = 34 - a - b - c;
    let h = 34 - e - f - g;
    let j = 2 * a + b + c + e - g + i - 34;
    let k = 68 - 2 * a - b - c - e - f - i;
    let l = f + g - i;
    let m = 34 - a - e - i;
    let n = 68 - 2 * a - 2 * b - c - e - f + g - i;
    let o = 2 * a + b + e + f - g + i - 34;
    let p = a + b + c + e + i - 34;
    [a, b, c, d, e, f, g, h, i, j, k, l, m, n, o, p]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridVerdict {
    Valid,
    OutOfRange { index: usize, value: i64 },
    Duplicate { index: usize, value: i64 },
}

impl GridVerdict {
    pub fn is_valid(self) -> bool {
        self == GridVerdict::Valid
    }
}

/// Checks that an order-`n` grid holds distinct values from `1..=n²`,
/// reporting the first offending cell in reading order.
pub fn validate_grid(order: usize, grid: &[i64]) -> GridVerdict {
    let top = (order * order) as i64;
    let mut seen = alloc::vec![false; top as usize + 1];
    for (index, &value) in grid.iter().enumerate() {
        if !(1..=top).contains(&value) {
            return GridVerdict::OutOfRange { index, value };
        }
        if core::mem::replace(&mut seen[value as usize], true) {
            return GridVerdict::Duplicate { index, value };
        }
    }
    GridVerdict::Valid
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Rank over the rationals by plain forward elimination in reading order,
    /// independent of the pivot rule used by `build_system`.
    fn rank_oracle(eqs: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<Ratio>> = eqs
            .iter()
            .map(|r| r.iter().map(|&k| Ratio::int(k)).collect())
            .collect();
        let mut rank = 0;
        for col in 0..m[0].len() {
            let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for r in rank + 1..m.len() {
                let f = m[r][col].div(m[rank][col]);
                for c in 0..m[0].len() {
                    m[r][c] = m[r][c].sub(f.mul(m[rank][c]));
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn order_four_basis() {
        let sys = build_system(4).unwrap();
        assert_eq!(sys.equations().len(), 10);
        assert_eq!(sys.rank(), 9);
        assert_eq!(sys.free_cells(), [0, 1, 2, 4, 5, 6, 8]);
        assert_eq!(rank_oracle(sys.equations()), 9);
    }

    #[test]
    fn order_three_and_five() {
        let s3 = build_system(3).unwrap();
        assert_eq!(s3.equations().len(), 8);
        assert_eq!(rank_oracle(s3.equations()), 7);
        assert_eq!(s3.rank(), 7);
        assert_eq!(s3.free_cells().len(), 2);

        let s5 = build_system(5).unwrap();
        assert_eq!(s5.equations().len(), 12);
        // one row/column dependency plus one more among the traces
        assert_eq!(rank_oracle(s5.equations()), 11);
        assert_eq!(s5.rank(), 11);
        assert_eq!(s5.free_cells().len(), 14);
        assert!(matches!(
            build_system(2),
            Err(Error::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn eliminated_dependencies_match_closed_forms() {
        let sys = build_system(4).unwrap();
        let text = sys.describe();
        for line in [
            "d = 34 - a - b - c",
            "h = 34 - e - f - g",
            "j = 2a + b + c + e - g + i - 34",
            "k = 68 - 2a - b - c - e - f - i",
            "l = f + g - i",
            "m = 34 - a - e - i",
            "n = 68 - 2a - 2b - c - e - f + g - i",
            "o = 2a + b + e + f - g + i - 34",
            "p = a + b + c + e + i - 34",
        ] {
            assert!(text.lines().any(|l| l == line), "missing {line}\n{text}");
        }
    }

    #[test]
    fn durer_from_basis() {
        let grid = dependent_cells_order4([16, 3, 2, 5, 10, 11, 9]);
        assert_eq!(
            grid,
            [16, 3, 2, 13, 5, 10, 11, 8, 9, 6, 7, 12, 4, 15, 14, 1]
        );
        assert!(validate_grid(4, &grid).is_valid());
    }

    #[test]
    fn collision_in_first_row() {
        let grid = dependent_cells_order4([1, 3, 15, 2, 4, 5, 6]);
        assert_eq!(grid[3], 15);
        assert_eq!(
            validate_grid(4, &grid),
            GridVerdict::Duplicate {
                index: 3,
                value: 15
            }
        );
    }

    #[test]
    fn closed_forms_always_satisfy_lines() {
        let sys = build_system(4).unwrap();
        for basis in [[0, 0, 0, 0, 0, 0, 0], [100, -7, 3, 40, 2, -9, 11]] {
            let grid = dependent_cells_order4(basis);
            assert!(sys.satisfied_by(&grid));
        }
    }

    #[test]
    fn grid_validation() {
        let mut g: Vec<i64> = (1..=16).collect();
        assert!(validate_grid(4, &g).is_valid());
        g[5] = 0;
        assert_eq!(
            validate_grid(4, &g),
            GridVerdict::OutOfRange { index: 5, value: 0 }
        );
        g[5] = 17;
        assert_eq!(
            validate_grid(4, &g),
            GridVerdict::OutOfRange {
                index: 5,
                value: 17
            }
        );
        g[5] = 1;
        assert_eq!(
            validate_grid(4, &g),
            GridVerdict::Duplicate { index: 5, value: 1 }
        );
    }

    #[test]
    fn cell_names() {
        assert_eq!(cell_name(0), "a");
        assert_eq!(cell_name(15), "p");
        assert_eq!(parse_cell_name("i"), Some(8));
        assert_eq!(parse_cell_name("12"), Some(12));
        assert_eq!(parse_cell_name("?"), None);
    }

    #[test]
    fn fractional_form_display() {
        let form = AffineForm {
            constant: -3,
            terms: vec![(0, 1), (2, -2)],
            denominator: 2,
        };
        assert_eq!(alloc::format!("{form}"), "(a - 2c - 3) / 2");
        assert_eq!(form.eval(&[5, 0, 1]), Some(0));
        assert_eq!(form.eval(&[4, 0, 1]), None);
    }
}
