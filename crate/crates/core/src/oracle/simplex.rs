//! Dense two-phase tableau simplex for the small anchored linear programs
//! solved by the verification oracle. Independent of the greedy fill used
//! by the production solver.

const EPS: f64 = 1e-9;

/// Row sense of one constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Sense {
    Le,
    Ge,
    Eq,
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64> },
    Infeasible,
}

/// Maximizes `c . x` subject to `rows[i] . x (sense) rhs[i]` and `x >= 0`.
pub(crate) fn maximize(
    c: &[f64],
    rows: &[Vec<f64>],
    senses: &[Sense],
    rhs: &[f64],
) -> LpOutcome {
    let n = c.len();
    let m = rows.len();
    assert_eq!(senses.len(), m);
    assert_eq!(rhs.len(), m);

    // Normalize rows so every right-hand side is non-negative.
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b = rhs.to_vec();
    let mut sense = senses.to_vec();
    for i in 0..m {
        if b[i] < 0.0 {
            for v in &mut a[i] {
                *v = -*v;
            }
            b[i] = -b[i];
            sense[i] = match sense[i] {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let n_slack = sense.iter().filter(|s| !matches!(s, Sense::Eq)).count();
    let n_art = sense.iter().filter(|s| !matches!(s, Sense::Le)).count();
    let cols = n + n_slack + n_art;
    let mut tableau = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![usize::MAX; m];

    let mut slack_at = n;
    let mut art_at = n + n_slack;
    let mut artificial_cols = Vec::new();
    for i in 0..m {
        tableau[i][..n].copy_from_slice(&a[i]);
        tableau[i][cols] = b[i];
        match sense[i] {
            Sense::Le => {
                tableau[i][slack_at] = 1.0;
                basis[i] = slack_at;
                slack_at += 1;
            }
            Sense::Ge => {
                tableau[i][slack_at] = -1.0;
                slack_at += 1;
                tableau[i][art_at] = 1.0;
                basis[i] = art_at;
                artificial_cols.push(art_at);
                art_at += 1;
            }
            Sense::Eq => {
                tableau[i][art_at] = 1.0;
                basis[i] = art_at;
                artificial_cols.push(art_at);
                art_at += 1;
            }
        }
    }

    // Phase 1: maximize minus the artificial sum; the row carries reduced
    // costs `z_j - c_j` with `c = -1` on artificial columns, priced out
    // over the starting basis.
    if !artificial_cols.is_empty() {
        let mut obj = vec![0.0; cols + 1];
        for &col in &artificial_cols {
            obj[col] = 1.0;
        }
        for i in 0..m {
            if artificial_cols.contains(&basis[i]) {
                for j in 0..=cols {
                    obj[j] -= tableau[i][j];
                }
            }
        }
        run_simplex(&mut tableau, &mut obj, &mut basis, cols);
        if obj[cols] < -EPS {
            return LpOutcome::Infeasible;
        }
        // Pivot any artificial still sitting in the basis out of it.
        for i in 0..m {
            if artificial_cols.contains(&basis[i]) {
                if let Some(j) = (0..n + n_slack).find(|j| tableau[i][*j].abs() > EPS) {
                    pivot(&mut tableau, &mut obj, &mut basis, i, j, cols);
                }
            }
        }
        for &col in &artificial_cols {
            for row in tableau.iter_mut() {
                row[col] = 0.0;
            }
        }
    }

    // Phase 2: the real objective, priced out over the current basis.
    let mut obj = vec![0.0; cols + 1];
    obj[..n].copy_from_slice(c);
    for j in 0..n {
        obj[j] = -obj[j];
    }
    for i in 0..m {
        let coeff = if basis[i] < n { c[basis[i]] } else { 0.0 };
        if coeff != 0.0 {
            for j in 0..=cols {
                obj[j] += coeff * tableau[i][j];
            }
        }
    }
    run_simplex(&mut tableau, &mut obj, &mut basis, cols);

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = tableau[i][cols];
        }
    }
    LpOutcome::Optimal { x }
}

/// Runs primal simplex on a tableau whose objective row stores reduced
/// costs as `obj[j]`; an entering column has `obj[j] < -EPS`. Bland's rule
/// keeps it from cycling.
fn run_simplex(tableau: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize], cols: usize) {
    loop {
        let Some(enter) = (0..cols).find(|j| obj[*j] < -EPS) else {
            return;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (i, row) in tableau.iter().enumerate() {
            if row[enter] > EPS {
                let ratio = row[cols] / row[enter];
                if ratio < best_ratio - EPS
                    || (ratio < best_ratio + EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            // Unbounded direction; the callers' polytopes are bounded, so
            // this only happens on malformed input.
            return;
        };
        pivot(tableau, obj, basis, leave, enter, cols);
    }
}

fn pivot(
    tableau: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    row: usize,
    col: usize,
    cols: usize,
) {
    let factor = tableau[row][col];
    for v in tableau[row].iter_mut() {
        *v /= factor;
    }
    for i in 0..tableau.len() {
        if i != row && tableau[i][col].abs() > 0.0 {
            let scale = tableau[i][col];
            for j in 0..=cols {
                tableau[i][j] -= scale * tableau[row][j];
            }
        }
    }
    if obj[col].abs() > 0.0 {
        let scale = obj[col];
        for j in 0..=cols {
            obj[j] -= scale * tableau[row][j];
        }
    }
    basis[row] = col;
}
