//! Small dense helpers on `&[f64]` vectors.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Numerical rank of a set of vectors by modified Gram-Schmidt.
pub fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale <= tol {
            continue;
        }
        let mut w: Vec<f64> = v.iter().map(|x| x / scale).collect();
        for b in &basis {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm(&w);
        if n > tol {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis.len()
}

/// Orthonormal basis of the span of `vectors`.
pub fn span_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&w);
        if n > tol {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Non-negative least squares, `min ||A x - b||` subject to `x >= 0`, where
/// `A` is given column-wise. Lawson-Hanson active set method.
pub fn nnls(columns: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let n = columns.len();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let tol = 1e-13;
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (j, col) in columns.iter().enumerate() {
            if x[j] != 0.0 {
                r.iter_mut().zip(col).for_each(|(ri, a)| *ri -= a * x[j]);
            }
        }
        r
    };
    for _outer in 0..(3 * n + 10) {
        let r = residual(&x);
        let w: Vec<f64> = columns.iter().map(|c| dot(c, &r)).collect();
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let z = least_squares(columns, &idx, b);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = z[k];
                }
                break;
            }
            let mut step = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[i] - z[k];
                    if denom > 0.0 {
                        step = step.min(x[i] / denom);
                    } else {
                        step = 0.0;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += step * (z[k] - x[i]);
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if idx.iter().all(|&i| !passive[i]) {
                break;
            }
        }
    }
    let r = residual(&x);
    (x, norm(&r))
}

/// Unconstrained least squares on a column subset via normal equations with
/// Cholesky-free Gaussian elimination (subsets are tiny).
fn least_squares(columns: &[Vec<f64>], idx: &[usize], b: &[f64]) -> Vec<f64> {
    let k = idx.len();
    let mut m = vec![vec![0.0; k + 1]; k];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            m[r][c] = dot(&columns[i], &columns[j]);
        }
        m[r][k] = dot(&columns[i], b);
    }
    // ridge for rank-deficient subsets
    for (r, row) in m.iter_mut().enumerate() {
        row[r] += 1e-14;
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        if p.abs() < 1e-300 {
            continue;
        }
        for r in 0..k {
            if r != col {
                let f = m[r][col] / p;
                if f != 0.0 {
                    for c in col..=k {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    (0..k)
        .map(|r| if m[r][r].abs() < 1e-300 { 0.0 } else { m[r][k] / m[r][r] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_counts_independent_directions() {
        let v = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(rank(&v, 1e-12), 2);
        assert_eq!(rank(&[vec![0.0, 0.0]], 1e-12), 0);
    }

    #[test]
    fn nnls_inside_and_outside_cone() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (x, res) = nnls(&cols, &[0.5, 0.25]);
        assert!(res < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.25).abs() < 1e-12);
        let (_, res) = nnls(&cols, &[-1.0, 0.0]);
        assert!((res - 1.0).abs() < 1e-12);
    }
}
