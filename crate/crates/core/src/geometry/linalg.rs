//! Dense helpers for the small matrices (d <= ~8) the hull code needs.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(rows: &[Vec<f64>]) -> f64 {
    let k = rows.len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    det
}

/// Orthonormal basis of the span of `vectors`, built greedily from the
/// largest residual. Directions whose residual norm is at most `tol` are
/// treated as dependent.
pub(crate) fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut residuals: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let dim = vectors.first().map_or(0, Vec::len);
    while basis.len() < dim {
        let Some((best, best_norm)) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, norm(r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if best_norm <= tol {
            break;
        }
        let mut e: Vec<f64> = residuals[best].iter().map(|x| x / best_norm).collect();
        // second Gram-Schmidt pass against the existing basis
        for b in &basis {
            let c = dot(&e, b);
            for (x, y) in e.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = norm(&e);
        e.iter_mut().for_each(|x| *x /= n);
        for r in residuals.iter_mut() {
            let c = dot(r, &e);
            for (x, y) in r.iter_mut().zip(&e) {
                *x -= c * y;
            }
        }
        basis.push(e);
    }
    basis
}

/// Unit normal of the hyperplane through `k` points in `R^k`, via signed
/// cofactors of the edge matrix. Returns the unnormalised vector and its norm.
pub(crate) fn hyperplane_normal(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let k = points[0].len();
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let mut normal = Vec::with_capacity(k);
    for j in 0..k {
        let minor: Vec<Vec<f64>> = edges
            .iter()
            .map(|e| e.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal.push(sign * if minor.is_empty() { 1.0 } else { determinant(&minor) });
    }
    let len = norm(&normal);
    (normal, len)
}
