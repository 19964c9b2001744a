//! Dense phase-1 simplex for small equality-constrained feasibility problems.
//!
//! Decides whether `A x = b, x >= 0` has a solution by minimizing the sum of
//! one artificial variable per row. Pivoting follows Bland's rule (smallest
//! eligible index for both the entering and the leaving variable), so the
//! method terminates without cycling.

/// Result of a phase-1 solve.
#[derive(Clone, Debug, PartialEq)]
pub enum Phase1 {
    /// A basic feasible point.
    Feasible(Vec<f64>),
    /// Optimal phase-1 objective, the minimal total constraint violation.
    Infeasible { residual: f64 },
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1), last column is the right-hand side
    cells: Vec<f64>,
    // reduced costs, length cols + 1 (last entry is minus the objective)
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..width {
            self.cells[pr * width + c] /= p;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                for c in 0..width {
                    let v = self.cells[pr * width + c];
                    self.cells[r * width + c] -= f * v;
                }
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for c in 0..width {
                self.cost[c] -= f * self.cells[pr * width + c];
            }
        }
        self.basis[pr] = pc;
    }
}

/// Phase-1 feasibility of `A x = b, x >= 0`.
///
/// `a` is row-major with `b.len()` rows. A phase-1 optimum of at most `tol`
/// counts as feasible; the returned point is clamped to be nonnegative.
pub fn phase_one(a: &[Vec<f64>], b: &[f64], tol: f64) -> Phase1 {
    let rows = b.len();
    assert_eq!(a.len(), rows, "row count mismatch");
    let n = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");

    let cols = n + rows;
    let width = cols + 1;
    let mut cells = vec![0.0; rows * width];
    for (r, (row, &rhs)) in a.iter().zip(b).enumerate() {
        // keep the right-hand side nonnegative so the artificial basis is feasible
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for (c, v) in row.iter().enumerate() {
            cells[r * width + c] = sign * v;
        }
        cells[r * width + n + r] = 1.0;
        cells[r * width + cols] = sign * rhs;
    }
    // minimize the sum of artificials: price out the artificial basis
    let mut cost = vec![0.0; width];
    for r in 0..rows {
        for c in 0..n {
            cost[c] -= cells[r * width + c];
        }
        cost[cols] -= cells[r * width + cols];
    }
    let mut t = Tableau {
        rows,
        cols,
        cells,
        cost,
        basis: (n..cols).collect(),
    };

    let eps = 1e-12;
    let max_pivots = 50 * (rows + cols).max(1);
    for _ in 0..max_pivots {
        let Some(enter) = (0..cols).find(|&c| t.cost[c] < -eps) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let coef = t.at(r, enter);
            if coef <= eps {
                continue;
            }
            let ratio = t.rhs(r) / coef;
            leave = match leave {
                None => Some((r, ratio)),
                Some((lr, lratio)) => {
                    if ratio < lratio - eps
                        || (ratio <= lratio + eps && t.basis[r] < t.basis[lr])
                    {
                        Some((r, ratio))
                    } else {
                        Some((lr, lratio))
                    }
                }
            };
        }
        match leave {
            Some((r, _)) => t.pivot(r, enter),
            // the phase-1 objective is bounded below by zero
            None => break,
        }
    }

    let residual = -t.cost[cols];
    if residual > tol {
        return Phase1::Infeasible { residual };
    }
    let mut x = vec![0.0; n];
    for (r, &var) in t.basis.iter().enumerate() {
        if var < n {
            x[var] = t.rhs(r).max(0.0);
        }
    }
    Phase1::Feasible(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible_system() {
        // x + y = 1, x - y = 0
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        match phase_one(&a, &[1.0, 0.0], 1e-9) {
            Phase1::Feasible(x) => {
                assert!((x[0] - 0.5).abs() < 1e-12);
                assert!((x[1] - 0.5).abs() < 1e-12);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn nonnegativity_makes_it_infeasible() {
        // x + y = 1, x = 2 forces y = -1
        let a = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        match phase_one(&a, &[1.0, 2.0], 1e-9) {
            Phase1::Infeasible { residual } => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // -x - y = -1 (twice), y = 0.25
        let a = vec![vec![-1.0, -1.0], vec![-1.0, -1.0], vec![0.0, 1.0]];
        match phase_one(&a, &[-1.0, -1.0, 0.25], 1e-9) {
            Phase1::Feasible(x) => {
                assert!((x[0] - 0.75).abs() < 1e-12);
                assert!((x[1] - 0.25).abs() < 1e-12);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_zero_rhs() {
        let a = vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0], vec![1.0, 1.0, 1.0]];
        match phase_one(&a, &[0.0, 0.0, 3.0], 1e-9) {
            Phase1::Feasible(x) => {
                for v in x {
                    assert!((v - 1.0).abs() < 1e-12);
                }
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }
}
