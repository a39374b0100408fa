//! Dense two-phase tableau simplex with Bland's rule.

use super::{LinearProgram, LpError, LpSolution, LpStatus, Sense, SimplexOptions};

/// Column roles of the standard form.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    width: usize,
    /// `(m + 1) × width`, row-major; the last row holds reduced costs and the
    /// last column the right-hand side (objective row: `-z`).
    data: Vec<f64>,
    basis: Vec<usize>,
    roles: Vec<Role>,
    pivots: usize,
}

impl Tableau {
    fn cols(&self) -> usize {
        self.width - 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        self.at(self.m, j)
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, e);
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            row.iter_mut().for_each(|v| *v *= inv);
            row[e] = 1.0;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let factor = row[e];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
                row[e] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[r] = e;
        self.pivots += 1;
    }

    /// Loads `costs` into the objective row, priced out against the basis.
    fn price(&mut self, costs: &[f64]) {
        let w = self.width;
        let m = self.m;
        let mut obj = vec![0.0; w];
        obj[..costs.len()].copy_from_slice(costs);
        for i in 0..m {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(&self.data[i * w..(i + 1) * w]) {
                    *o -= cb * v;
                }
            }
        }
        self.data[m * w..].copy_from_slice(&obj);
    }

    /// Runs primal simplex iterations with Bland's rule. Returns `false` if
    /// the objective is unbounded along some entering column.
    fn optimize(&mut self, allow: impl Fn(usize) -> bool, opts: &SimplexOptions) -> Result<bool, LpError> {
        loop {
            let Some(e) = (0..self.cols()).find(|&j| allow(j) && self.reduced_cost(j) > opts.tol_opt) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, e);
                if a > opts.tol_pivot {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                            if (!tie && ratio < br) || (tie && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            if self.pivots >= opts.max_pivots {
                return Err(LpError::PivotLimit(opts.max_pivots));
            }
            self.pivot(r, e);
            // Keep the basic solution non-negative against round-off.
            let rhs_col = self.width - 1;
            for i in 0..self.m {
                let v = &mut self.data[i * self.width + rhs_col];
                if *v < 0.0 && *v > -opts.tol_feas {
                    *v = 0.0;
                }
            }
        }
    }
}

struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
    /// `-1` if the row was negated to make its right-hand side non-negative.
    sign: f64,
}

pub(super) fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let lower = lp.lower_bounds();
    let n_user = lp.constraints().len();

    // Shift x = l + x' so every structural variable is simply x' >= 0, and
    // turn finite upper bounds into explicit rows.
    let mut rows: Vec<Row> = Vec::with_capacity(n_user + n);
    for c in lp.constraints() {
        let shift: f64 = c.coeffs.iter().zip(lower).map(|(a, l)| a * l).sum();
        rows.push(Row {
            coeffs: c.coeffs.clone(),
            sense: c.sense,
            rhs: c.rhs - shift,
            sign: 1.0,
        });
    }
    let mut upper_rows = Vec::new();
    for (j, u) in lp.upper_bounds().iter().enumerate() {
        if let Some(u) = u {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            upper_rows.push(j);
            rows.push(Row {
                coeffs,
                sense: Sense::Le,
                rhs: u - lower[j],
                sign: 1.0,
            });
        }
    }
    for row in &mut rows {
        if row.rhs < 0.0 {
            row.coeffs.iter_mut().for_each(|v| *v = -*v);
            row.rhs = -row.rhs;
            row.sense = row.sense.flipped();
            row.sign = -1.0;
        }
    }

    let m = rows.len();
    let n_ge = rows.iter().filter(|r| r.sense == Sense::Ge).count();
    let cols = n + m + n_ge;
    let width = cols + 1;
    let mut roles = vec![Role::Structural; cols];
    let mut data = vec![0.0; (m + 1) * width];
    let mut basis = vec![0; m];
    let mut identity = vec![0; m];
    let mut next_art = n + m;
    for (i, row) in rows.iter().enumerate() {
        let base = i * width;
        data[base..base + n].copy_from_slice(&row.coeffs);
        data[base + width - 1] = row.rhs;
        let logical = n + i;
        match row.sense {
            Sense::Le => {
                data[base + logical] = 1.0;
                roles[logical] = Role::Slack;
                identity[i] = logical;
            }
            Sense::Eq => {
                data[base + logical] = 1.0;
                roles[logical] = Role::Artificial;
                identity[i] = logical;
            }
            Sense::Ge => {
                data[base + logical] = -1.0;
                roles[logical] = Role::Slack;
                data[base + next_art] = 1.0;
                roles[next_art] = Role::Artificial;
                identity[i] = next_art;
                next_art += 1;
            }
        }
        basis[i] = identity[i];
    }
    let mut tab = Tableau {
        m,
        width,
        data,
        basis,
        roles,
        pivots: 0,
    };

    let scale = 1.0 + rows.iter().map(|r| r.rhs).fold(0.0, f64::max);
    let has_artificials = tab.roles.contains(&Role::Artificial);
    let mut infeasibility = 0.0;
    if has_artificials {
        let phase_one: Vec<f64> = tab
            .roles
            .iter()
            .map(|&r| if r == Role::Artificial { -1.0 } else { 0.0 })
            .collect();
        tab.price(&phase_one);
        tab.optimize(|_| true, opts)?;
        infeasibility = (0..m)
            .filter(|&i| tab.roles[tab.basis[i]] == Role::Artificial)
            .map(|i| tab.rhs(i).max(0.0))
            .sum();
        if infeasibility > opts.tol_feas * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: None,
                objective_value: f64::NEG_INFINITY,
                dual_values: Vec::new(),
                bound_duals: Vec::new(),
                reduced_costs: Vec::new(),
                basis: sorted(&tab.basis),
                infeasibility,
                pivots: tab.pivots,
            });
        }
        // Drive zero-valued artificials out of the basis; rows where that is
        // impossible are redundant and keep their artificial at zero.
        for i in 0..m {
            if tab.roles[tab.basis[i]] != Role::Artificial {
                continue;
            }
            let rhs_idx = i * width + width - 1;
            tab.data[rhs_idx] = 0.0;
            if let Some(j) = (0..tab.cols()).find(|&j| tab.roles[j] != Role::Artificial && tab.at(i, j).abs() > opts.tol_pivot) {
                tab.pivot(i, j);
            }
        }
    }

    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(lp.objective());
    tab.price(&costs);
    let roles = tab.roles.clone();
    let bounded = tab.optimize(|j| roles[j] != Role::Artificial, opts)?;
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: None,
            objective_value: f64::INFINITY,
            dual_values: Vec::new(),
            bound_duals: Vec::new(),
            reduced_costs: Vec::new(),
            basis: sorted(&tab.basis),
            infeasibility,
            pivots: tab.pivots,
        });
    }

    let mut x = lower.to_vec();
    for i in 0..m {
        let j = tab.basis[i];
        if j < n {
            x[j] += tab.rhs(i).max(0.0);
        }
    }
    let duals: Vec<f64> = (0..m)
        .map(|i| rows[i].sign * -tab.reduced_cost(identity[i]))
        .map(clean_zero)
        .collect();
    let mut bound_duals = vec![0.0; n];
    for (r, &j) in upper_rows.iter().enumerate() {
        bound_duals[j] = duals[n_user + r];
    }
    let reduced_costs = (0..n).map(|j| clean_zero(tab.reduced_cost(j))).collect();
    let objective_value = lp.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective_value,
        dual_values: duals[..n_user].to_vec(),
        bound_duals,
        reduced_costs,
        basis: sorted(&tab.basis),
        infeasibility,
        pivots: tab.pivots,
    })
}

fn sorted(basis: &[usize]) -> Vec<usize> {
    let mut b = basis.to_vec();
    b.sort_unstable();
    b
}

// -0.0 would otherwise leak into reports.
fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}
