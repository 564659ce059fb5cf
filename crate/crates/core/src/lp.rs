//! Dense two-phase simplex for small linear programs in standard form
//!
//! ```text
//! minimise  c·x   subject to  A x = b,  x ≥ 0
//! ```
//!
//! Every problem the toolkit poses (cone membership, eigenvalue peeling,
//! distinguishing tests, operational norms) has a few dozen variables at
//! most, so a dense tableau with Bland's anti-cycling rule is plenty.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// A linear program in standard form.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    /// Phase one could not drive the artificial variables below tolerance.
    Infeasible { infeasibility: f64 },
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, *value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `vars` non-negative variables with zero objective.
    pub fn new(vars: usize) -> Self {
        Self {
            rows: Vec::new(),
            rhs: Vec::new(),
            cost: vec![0.0; vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.cost.len()
    }

    /// Adds the equality `row · x = rhs`.
    pub fn equality(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        assert_eq!(row.len(), self.vars(), "constraint width");
        self.rows.push(row);
        self.rhs.push(rhs);
        self
    }

    pub fn minimise(&mut self, cost: Vec<f64>) -> &mut Self {
        assert_eq!(cost.len(), self.vars(), "objective width");
        self.cost = cost;
        self
    }

    pub fn maximise(&mut self, gain: Vec<f64>) -> &mut Self {
        self.minimise(gain.into_iter().map(|g| -g).collect())
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.cost)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    live: Vec<bool>,
    scale: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.vars();
        let width = n + m + 1;
        let mut cells = vec![0.0; m * width];
        let mut scale: f64 = 1.0;
        for (i, (row, &b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in row.iter().enumerate() {
                cells[i * width + j] = sign * a;
            }
            cells[i * width + n + i] = 1.0;
            cells[i * width + width - 1] = sign * b;
            scale = scale.max(b.abs());
        }
        Self {
            m,
            n,
            width,
            cells,
            basis: (n..n + m).collect(),
            live: vec![true; m],
            scale,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        for i in 0..self.m {
            if i == r || !self.live[i] {
                continue;
            }
            let f = self.at(i, c);
            if f != 0.0 {
                for j in 0..w {
                    let v = self.cells[r * w + j];
                    if v != 0.0 {
                        self.cells[i * w + j] -= f * v;
                    }
                }
                self.cells[i * w + c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64], columns: usize) -> Vec<f64> {
        let mut r: Vec<f64> = cost[..columns].to_vec();
        for i in 0..self.m {
            if !self.live[i] {
                continue;
            }
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, rj) in r.iter_mut().enumerate() {
                    *rj -= cb * self.at(i, j);
                }
            }
        }
        r
    }

    /// Runs simplex iterations on the first `columns` columns. Returns false
    /// on unboundedness.
    fn iterate(&mut self, cost: &[f64], columns: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let reduced = self.reduced_costs(cost, columns);
            let Some(enter) = (0..columns).find(|&j| reduced[j] < -COST_EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if !self.live[i] {
                    continue;
                }
                let a = self.at(i, enter);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
        true
    }

    fn run(mut self, cost: &[f64]) -> LpOutcome {
        let (n, m) = (self.n, self.m);
        let mut phase_one = vec![0.0; n + m];
        for c in phase_one.iter_mut().skip(n) {
            *c = 1.0;
        }
        self.iterate(&phase_one, n + m);
        let infeasibility: f64 = (0..m)
            .filter(|&i| self.basis[i] >= n)
            .map(|i| self.rhs(i).max(0.0))
            .sum();
        if infeasibility > 1e-9 * self.scale {
            return LpOutcome::Infeasible { infeasibility };
        }
        // Drive remaining artificials out of the basis or retire their rows.
        for i in 0..m {
            if self.basis[i] < n {
                continue;
            }
            match (0..n).find(|&j| self.at(i, j).abs() > 1e-9) {
                Some(j) => self.pivot(i, j),
                None => self.live[i] = false,
            }
        }
        let mut full_cost = cost.to_vec();
        full_cost.extend(std::iter::repeat_n(0.0, m));
        if !self.iterate(&full_cost, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; n];
        for i in 0..m {
            if self.live[i] && self.basis[i] < n {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        let value = x.iter().zip(cost).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}
