//! Distance from a point to the convex hull of a finite set, by Wolfe's
//! minimum-norm-point method.
//!
//! Only the decision `dist <= tol` is needed, so the iteration stops as soon
//! as either side has a certificate: a hull point within `tol` of the
//! target, or a separating direction along which every vertex is farther
//! than `tol`.

use super::linalg::dot;

const MAX_MAJOR: usize = 200;

/// `true` iff the distance from `y` to `conv(verts)` is at most `tol`.
pub(crate) fn within_distance(verts: &[Vec<f64>], y: &[f64], tol: f64) -> bool {
    let p: Vec<Vec<f64>> = verts
        .iter()
        .map(|v| v.iter().zip(y).map(|(a, b)| a - b).collect())
        .collect();
    let Some(start) = (0..p.len()).min_by(|&i, &j| dot(&p[i], &p[i]).total_cmp(&dot(&p[j], &p[j]))) else {
        return false;
    };
    let mut set = vec![start];
    let mut lambda = vec![1.0];
    let mut x = p[start].clone();

    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        if xx.sqrt() <= tol {
            return true;
        }
        let (j, pj) = (0..p.len())
            .map(|i| (i, dot(&p[i], &x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        // every hull point q has q·x >= pj, hence |q| >= pj / |x|
        if pj / xx.sqrt() > tol {
            return false;
        }
        if set.contains(&j) || xx - pj <= 1e-14 * xx {
            break;
        }
        set.push(j);
        lambda.push(0.0);
        loop {
            let Some(alpha) = affine_min_norm(&p, &set) else {
                break;
            };
            if alpha.iter().all(|&a| a > 0.0) {
                lambda = alpha;
                break;
            }
            let theta = lambda
                .iter()
                .zip(&alpha)
                .filter(|&(_, &a)| a <= 0.0)
                .map(|(&l, &a)| l / (l - a))
                .fold(1.0f64, f64::min);
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let keep: Vec<bool> = lambda.iter().map(|&l| l > 1e-15).collect();
            set = set.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
            lambda = lambda.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
            let s: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= s);
        }
        x = combine(&p, &set, &lambda);
    }
    dot(&x, &x).sqrt() <= tol
}

fn combine(p: &[Vec<f64>], set: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; p[0].len()];
    for (&i, &l) in set.iter().zip(lambda) {
        x.iter_mut().zip(&p[i]).for_each(|(a, b)| *a += l * b);
    }
    x
}

/// Affine weights of the minimum-norm point of `aff{p_i : i in set}`.
///
/// Least squares on the edge vectors by Gram-Schmidt with
/// reorthogonalization, followed by two steps of iterative refinement: on
/// thin sets the first solve leaves a residual of order `eps * cond`.
fn affine_min_norm(p: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let base = &p[set[0]];
    let m = set.len() - 1;
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r = vec![vec![0.0; m]; m];
    for c in 0..m {
        let mut v: Vec<f64> = p[set[c + 1]].iter().zip(base).map(|(a, b)| a - b).collect();
        let scale = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for (k, e) in q.iter().enumerate() {
                let h = dot(e, &v);
                r[k][c] += h;
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= h * b);
            }
        }
        let len = dot(&v, &v).sqrt();
        if !(len > 1e-13 * scale) {
            return None;
        }
        r[c][c] = len;
        q.push(v.into_iter().map(|a| a / len).collect());
    }
    // x = base + E beta; each pass solves R delta = -Q^T x for the residual x
    let mut beta = vec![0.0; m];
    let mut x = base.clone();
    let mut alpha = Vec::new();
    for _ in 0..3 {
        let rhs: Vec<f64> = q.iter().map(|e| -dot(e, &x)).collect();
        let mut delta = vec![0.0; m];
        for c in (0..m).rev() {
            let s: f64 = (c + 1..m).map(|k| r[c][k] * delta[k]).sum();
            delta[c] = (rhs[c] - s) / r[c][c];
        }
        beta.iter_mut().zip(&delta).for_each(|(b, d)| *b += d);
        alpha = Vec::with_capacity(m + 1);
        alpha.push(1.0 - beta.iter().sum::<f64>());
        alpha.extend(beta.iter().copied());
        x = combine(p, set, &alpha);
    }
    Some(alpha)
}
