//! Dense exact-rational simplex: maximize c.x subject to Ax <= / = b, x >= 0.
//!
//! Two-phase with Dantzig pricing and a Bland fallback for anti-cycling.
//! Everything runs over BigRational, so solutions are exact; desk-scale
//! models stay small after the callers' presolve.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_u(n: u64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

/// max objective . x  s.t. rows, x >= 0.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub n_vars: usize,
    pub objective: Vec<(usize, Rat)>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, rel: Rel, rhs: Rat) {
        self.rows.push(LpRow { coeffs, rel, rhs });
    }

    /// Largest violation of any constraint (and of nonnegativity) by `x`.
    pub fn residual(&self, x: &[Rat]) -> Rat {
        let mut worst = Rat::zero();
        for xi in x {
            if xi.is_negative() {
                worst = worst.max(-xi.clone());
            }
        }
        for row in &self.rows {
            let mut lhs = Rat::zero();
            for (i, c) in &row.coeffs {
                lhs += c * &x[*i];
            }
            let gap = match row.rel {
                Rel::Le => lhs - &row.rhs,
                Rel::Eq => (lhs - &row.rhs).abs(),
            };
            if gap > worst {
                worst = gap;
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        let mut v = Rat::zero();
        for (i, c) in &self.objective {
            v += c * &x[*i];
        }
        v
    }
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("variable index {0} out of range")]
    BadIndex(usize),
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub values: Vec<Rat>,
    pub objective: Rat,
}

struct Tableau {
    // rows x cols, col layout: [vars..., rhs]
    a: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.a[row][col].clone();
        debug_assert!(!pivot.is_zero());
        for v in self.a[row].iter_mut() {
            *v /= &pivot;
        }
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            if self.a[r][col].is_zero() {
                continue;
            }
            let factor = self.a[r][col].clone();
            for c in 0..self.n_cols {
                let delta = &factor * &self.a[row][c];
                self.a[r][c] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Minimize the objective stored in `obj` (reduced costs), pricing only
    /// columns below `price_limit`. Returns Err(Unbounded) when an entering
    /// column has no positive entries.
    fn run(&mut self, obj: &mut [Rat], price_limit: usize) -> Result<(), LpError> {
        let mut iterations = 0usize;
        let bland_after = 64 + 8 * self.n_cols;
        loop {
            iterations += 1;
            let use_bland = iterations > bland_after;
            // entering: most negative reduced cost (Dantzig) or first (Bland)
            let mut enter: Option<usize> = None;
            for c in 0..price_limit {
                if obj[c].is_negative() {
                    match enter {
                        None => enter = Some(c),
                        Some(e) => {
                            if !use_bland && obj[c] < obj[e] {
                                enter = Some(c);
                            }
                        }
                    }
                    if use_bland {
                        break;
                    }
                }
            }
            let enter = match enter {
                Some(e) => e,
                None => return Ok(()),
            };
            // leaving: min ratio, ties by smallest basis index (Bland-safe)
            let rhs_col = self.n_cols - 1;
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.a.len() {
                if self.a[r][enter].is_positive() {
                    let ratio = &self.a[r][rhs_col] / &self.a[r][enter];
                    let better = match &leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (leave, _) = leave.ok_or(LpError::Unbounded)?;
            self.pivot(leave, enter);
            // update reduced costs
            if !obj[enter].is_zero() {
                let factor = obj[enter].clone();
                for (c, o) in obj.iter_mut().enumerate().take(self.n_cols) {
                    let delta = &factor * &self.a[leave][c];
                    *o -= delta;
                }
            }
        }
    }
}

/// Solve the LP exactly. Deterministic for a fixed model.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    for (i, _) in &lp.objective {
        if *i >= lp.n_vars {
            return Err(LpError::BadIndex(*i));
        }
    }
    let m = lp.rows.len();
    // columns: structural vars, slacks (per Le row), artificials (all rows), rhs
    let n_slack = lp.rows.iter().filter(|r| r.rel == Rel::Le).count();
    let n_total = lp.n_vars + n_slack + m;
    let n_cols = n_total + 1;
    let mut a = vec![vec![Rat::zero(); n_cols]; m];
    let mut basis = vec![0usize; m];
    let mut slack_idx = lp.n_vars;
    let mut needs_artificial = Vec::with_capacity(m);
    for (r, row) in lp.rows.iter().enumerate() {
        for (i, c) in &row.coeffs {
            if *i >= lp.n_vars {
                return Err(LpError::BadIndex(*i));
            }
            a[r][*i] += c.clone();
        }
        let mut rhs = row.rhs.clone();
        let mut negate = false;
        if rhs.is_negative() {
            negate = true;
            rhs = -rhs;
            for c in a[r].iter_mut() {
                *c = -c.clone();
            }
        }
        a[r][n_total] = rhs;
        match row.rel {
            Rel::Le if !negate => {
                a[r][slack_idx] = Rat::one();
                basis[r] = slack_idx;
                needs_artificial.push(false);
                slack_idx += 1;
            }
            Rel::Le => {
                // negated Le becomes >=; add surplus and an artificial
                a[r][slack_idx] = -Rat::one();
                slack_idx += 1;
                needs_artificial.push(true);
            }
            Rel::Eq => needs_artificial.push(true),
        }
    }
    let art_base = lp.n_vars + n_slack;
    let mut any_artificial = false;
    for r in 0..m {
        if needs_artificial[r] {
            a[r][art_base + r] = Rat::one();
            basis[r] = art_base + r;
            any_artificial = true;
        }
    }
    let mut t = Tableau { a, basis, n_cols };

    if any_artificial {
        // phase 1: minimize sum of artificials
        let mut obj = vec![Rat::zero(); n_cols];
        for (r, &needs) in needs_artificial.iter().enumerate() {
            if needs {
                // reduced costs: subtract the artificial's row
                for (c, o) in obj.iter_mut().enumerate().take(n_cols) {
                    let delta = t.a[r][c].clone();
                    *o -= delta;
                }
            }
        }
        for r in 0..m {
            if needs_artificial[r] {
                obj[art_base + r] = Rat::zero();
            }
        }
        let price_all = n_cols - 1;
        t.run(&mut obj, price_all)?;
        let phase1 = -obj[n_cols - 1].clone();
        if !phase1.is_zero() {
            return Err(LpError::Infeasible);
        }
        // drive leftover artificials out of the basis where possible
        for r in 0..m {
            if t.basis[r] >= art_base {
                let found = (0..art_base).find(|&c| !t.a[r][c].is_zero());
                if let Some(c) = found {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2: minimize -objective
    let mut obj = vec![Rat::zero(); n_cols];
    for (i, c) in &lp.objective {
        obj[*i] = -c.clone();
    }
    // normalize reduced costs against the current basis
    for r in 0..m {
        let b = t.basis[r];
        if !obj[b].is_zero() {
            let factor = obj[b].clone();
            for (c, o) in obj.iter_mut().enumerate().take(n_cols) {
                let delta = &factor * &t.a[r][c];
                *o -= delta;
            }
        }
    }
    // artificial columns are excluded from phase-2 pricing entirely
    t.run(&mut obj, art_base)?;

    let mut values = vec![Rat::zero(); lp.n_vars];
    for r in 0..m {
        if t.basis[r] < lp.n_vars {
            values[t.basis[r]] = t.a[r][n_cols - 1].clone();
        }
    }
    let objective = lp.objective_value(&values);
    debug_assert!(
        lp.residual(&values).is_zero(),
        "simplex produced an infeasible point"
    );
    Ok(LpSolution { values, objective })
}

/// Render in a plain LP text interchange layout for external cross-checking.
pub fn dump_lp(lp: &LinearProgram, names: &dyn Fn(usize) -> String) -> String {
    let mut out = String::new();
    out.push_str("max ");
    let term = |i: &usize, c: &Rat| format!("{} {}", c, names(*i));
    let mut first = true;
    for (i, c) in &lp.objective {
        if !first {
            out.push_str(" + ");
        }
        out.push_str(&term(i, c));
        first = false;
    }
    out.push('\n');
    out.push_str("subject to\n");
    for (idx, row) in lp.rows.iter().enumerate() {
        out.push_str(&format!("  r{idx}: "));
        let mut first = true;
        for (i, c) in &row.coeffs {
            if !first {
                out.push_str(" + ");
            }
            out.push_str(&term(i, c));
            first = false;
        }
        if first {
            out.push('0');
        }
        out.push_str(match row.rel {
            Rel::Le => " <= ",
            Rel::Eq => " = ",
        });
        out.push_str(&format!("{}\n", row.rhs));
    }
    out.push_str("bounds\n");
    for i in 0..lp.n_vars {
        out.push_str(&format!("  {} >= 0\n", names(i)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_max() {
        // max x + y, x + y <= 3, x <= 2, y <= 2
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![(0, rat(1)), (1, rat(1))];
        lp.add_row(vec![(0, rat(1)), (1, rat(1))], Rel::Le, rat(3));
        lp.add_row(vec![(0, rat(1))], Rel::Le, rat(2));
        lp.add_row(vec![(1, rat(1))], Rel::Le, rat(2));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, rat(3));
    }

    #[test]
    fn equality_rows() {
        // max x, x + y = 2, x <= 1.5 (as 3/2)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![(0, rat(1))];
        lp.add_row(vec![(0, rat(1)), (1, rat(1))], Rel::Eq, rat(2));
        lp.add_row(vec![(0, rat(2))], Rel::Le, rat(3));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, rat(3) / rat(2));
        assert_eq!(s.values[1], rat(1) / rat(2));
    }

    #[test]
    fn infeasible() {
        // x = 2 and x <= 1
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![(0, rat(1))];
        lp.add_row(vec![(0, rat(1))], Rel::Eq, rat(2));
        lp.add_row(vec![(0, rat(1))], Rel::Le, rat(1));
        assert_eq!(solve(&lp).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![(0, rat(1))];
        lp.add_row(vec![(1, rat(1))], Rel::Le, rat(1));
        assert_eq!(solve(&lp).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_cycling_guard() {
        // classic Beale-like degenerate instance; must terminate
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![
            (0, rat(3) / rat(4)),
            (1, rat(-150)),
            (2, rat(1) / rat(50)),
            (3, rat(-6)),
        ];
        lp.add_row(
            vec![
                (0, rat(1) / rat(4)),
                (1, rat(-60)),
                (2, rat(-1) / rat(25)),
                (3, rat(9)),
            ],
            Rel::Le,
            rat(0),
        );
        lp.add_row(
            vec![
                (0, rat(1) / rat(2)),
                (1, rat(-90)),
                (2, rat(-1) / rat(50)),
                (3, rat(3)),
            ],
            Rel::Le,
            rat(0),
        );
        lp.add_row(vec![(2, rat(1))], Rel::Le, rat(1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.objective, rat(1) / rat(20));
    }
}
