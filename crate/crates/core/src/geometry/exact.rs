//! Exact orientation signs for hull construction.
//!
//! Every finite `f64` is `m * 2^e` with integer `m`, so rescaling all
//! inputs by a common power of two turns them into integers and the
//! determinant can be evaluated without rounding.

use num_bigint::{BigInt, Sign};

/// `(mantissa, exponent)` with `x == mantissa * 2^exponent`.
fn decompose(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1i64 << 52), exp - 1075) };
    (if neg { -m } else { m }, e)
}

/// Sign of `det[p_1 - p_0; ...; p_{k-1} - p_0; sum(q) - |q| p_0]`, where
/// `face = [p_0, ..., p_{k-1}]` are points of `R^k`.
///
/// With `q` a single point this is the side of the hyperplane through
/// `face` on which `q` lies; with several points it is the side of their
/// centroid.
pub(crate) fn orientation(face: &[&[f64]], q: &[&[f64]]) -> i8 {
    let k = face.len();
    debug_assert!(k >= 1 && face.iter().chain(q).all(|p| p.len() == k));
    let min_exp = face
        .iter()
        .chain(q)
        .flat_map(|p| p.iter())
        .filter(|x| **x != 0.0)
        .map(|&x| decompose(x).1)
        .min()
        .unwrap_or(0);
    let int = |x: f64| {
        let (m, e) = decompose(x);
        BigInt::from(m) << (e - min_exp) as usize
    };
    let base: Vec<BigInt> = face[0].iter().map(|&x| int(x)).collect();
    let mut rows: Vec<Vec<BigInt>> = face[1..]
        .iter()
        .map(|p| p.iter().zip(&base).map(|(&x, b)| int(x) - b).collect())
        .collect();
    let weight = BigInt::from(q.len());
    let mut last: Vec<BigInt> = base.iter().map(|b| -(b * &weight)).collect();
    for p in q {
        for (l, &x) in last.iter_mut().zip(p.iter()) {
            *l += int(x);
        }
    }
    rows.push(last);
    bareiss_sign(rows)
}

/// Sign of the determinant of a square integer matrix (fraction-free
/// elimination, so every division is exact).
fn bareiss_sign(mut a: Vec<Vec<BigInt>>) -> i8 {
    let n = a.len();
    let mut sign = 1i8;
    let mut prev = BigInt::from(1);
    for c in 0..n {
        if a[c][c].sign() == Sign::NoSign {
            match (c + 1..n).find(|&r| a[r][c].sign() != Sign::NoSign) {
                Some(r) => {
                    a.swap(c, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in c + 1..n {
            for j in c + 1..n {
                let v = (&a[i][j] * &a[c][c] - &a[i][c] * &a[c][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[c][c].clone();
    }
    match a[n - 1][n - 1].sign() {
        Sign::Plus => sign,
        Sign::Minus => -sign,
        Sign::NoSign => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_round_trips() {
        for x in [0.1, -3.5, 1e-310, 5e-324, 1e300, -0.0, 1.0] {
            let (m, e) = decompose(x);
            assert_eq!(m as f64 * 2f64.powi(e), x);
        }
    }

    #[test]
    fn planar_orientation() {
        let face: [&[f64]; 2] = [&[0.0, 0.0], &[1.0, 0.0]];
        assert_eq!(orientation(&face, &[&[0.5, 1.0]]), 1);
        assert_eq!(orientation(&face, &[&[0.5, -1.0]]), -1);
        assert_eq!(orientation(&face, &[&[7.0, 0.0]]), 0);
        // centroid of (0,1) and (0,-1) lies on the line
        assert_eq!(orientation(&face, &[&[0.0, 1.0], &[0.0, -1.0]]), 0);
    }

    #[test]
    fn detects_offsets_below_float_resolution() {
        // 0.1 + 0.2 rounds, so the three points are not exactly collinear
        let a = [0.1, 0.1];
        let b = [0.2, 0.2];
        let c = [0.1 + 0.2, 0.30000000000000004];
        assert_eq!(orientation(&[&a, &b], &[&c]), 0);
        let c2 = [0.1 + 0.2, 0.3];
        assert_ne!(orientation(&[&a, &b], &[&c2]), 0);
    }

    #[test]
    fn spatial_orientation_matches_float_when_well_separated() {
        let face: [&[f64]; 3] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]];
        assert_eq!(orientation(&face, &[&[0.2, 0.2, 3.0]]), 1);
        assert_eq!(orientation(&face, &[&[0.2, 0.2, -3.0]]), -1);
    }
}
