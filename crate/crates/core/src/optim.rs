//! Derivative-free maximization with the Nelder-Mead simplex.

/// Options for one Nelder-Mead run.
#[derive(Debug, Clone)]
pub(crate) struct NmOptions {
    /// Maximum simplex iterations (reflect/expand/contract/shrink rounds).
    pub max_iters: usize,
    /// Initial step added to each coordinate to build the simplex.
    pub init_step: f64,
    /// Stop when the simplex value spread falls below this.
    pub ftol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            init_step: 0.25,
            ftol: 1e-12,
        }
    }
}

/// Trace entry: best point and value after one iteration.
#[derive(Debug, Clone)]
pub(crate) struct NmStep {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub trace: Vec<NmStep>,
}

/// Maximizes `f` from `x0`. The trace records the best vertex after every
/// iteration, so its values are non-decreasing.
pub(crate) fn maximize<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], opts: &NmOptions) -> NmResult {
    let n = x0.len();
    if n == 0 || opts.max_iters == 0 {
        let value = f(x0);
        return NmResult {
            x: x0.to_vec(),
            value,
            trace: vec![NmStep { x: x0.to_vec(), value }],
        };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let step = if x0[i].abs() > 1e-12 {
            opts.init_step * x0[i].abs()
        } else {
            opts.init_step
        };
        let mut x = x0.to_vec();
        x[i] += step;
        let mut v = f(&x);
        if !v.is_finite() {
            // Objectives with hard cliffs (zero-probability regions) can
            // swallow a vertex; step the other way instead.
            x[i] = x0[i] - step;
            v = f(&x);
        }
        simplex.push((x, v));
    }

    let mut trace = Vec::with_capacity(opts.max_iters);
    for _ in 0..opts.max_iters {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (best - worst).abs() <= opts.ftol * (1.0 + best.abs()) {
            trace.push(NmStep { x: simplex[0].0.clone(), value: best });
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = at(1.0);
        let v_reflected = f(&reflected);
        if v_reflected > simplex[0].1 {
            let expanded = at(2.0);
            let v_expanded = f(&expanded);
            simplex[n] = if v_expanded > v_reflected {
                (expanded, v_expanded)
            } else {
                (reflected, v_reflected)
            };
        } else if v_reflected > simplex[n - 1].1 {
            simplex[n] = (reflected, v_reflected);
        } else {
            let contracted = at(-0.5);
            let v_contracted = f(&contracted);
            if v_contracted > simplex[n].1 {
                simplex[n] = (contracted, v_contracted);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(a, b)| a + 0.5 * (b - a))
                        .collect();
                    let v = f(&x);
                    *vertex = (x, v);
                }
            }
        }

        let best = simplex
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        trace.push(NmStep { x: best.0.clone(), value: best.1 });
    }

    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let (x, value) = simplex.swap_remove(0);
    if trace.is_empty() {
        trace.push(NmStep { x: x.clone(), value });
    }
    NmResult { x, value, trace }
}
