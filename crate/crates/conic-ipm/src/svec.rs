//! Packed storage for symmetric matrices.
//!
//! A symmetric `n × n` matrix is stored as its lower triangle in column-major
//! order with off-diagonal entries multiplied by `√2`, so that the Euclidean
//! inner product of two packed vectors equals the trace inner product of the
//! matrices they represent.

use faer::Mat;

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Length of the packed vector for a side-`n` matrix.
pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Packed index of entry `(i, j)`; the pair is reordered so that `i >= j`.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    debug_assert!(i < n);
    j * n - j * j.saturating_sub(1) / 2 + (i - j)
}

/// Inverse of [`svec_index`]: the `(i, j)` position (with `i >= j`) of a packed index.
pub fn svec_position(n: usize, k: usize) -> (usize, usize) {
    let mut offset = 0;
    for j in 0..n {
        let len = n - j;
        if k < offset + len {
            return (j + (k - offset), j);
        }
        offset += len;
    }
    panic!("packed index {k} out of range for side {n}");
}

/// Unpacks a vector into a dense symmetric matrix.
pub fn smat(v: &[f64], n: usize) -> Mat<f64> {
    debug_assert_eq!(v.len(), svec_dim(n));
    let mut m = Mat::<f64>::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        m[(j, j)] = v[k];
        k += 1;
        for i in (j + 1)..n {
            let val = v[k] / SQRT2;
            m[(i, j)] = val;
            m[(j, i)] = val;
            k += 1;
        }
    }
    m
}

/// Packs the lower triangle of a (symmetric) matrix into `out`.
pub fn svec_into(m: &Mat<f64>, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), svec_dim(n));
    let mut k = 0;
    for j in 0..n {
        out[k] = m[(j, j)];
        k += 1;
        for i in (j + 1)..n {
            out[k] = 0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2;
            k += 1;
        }
    }
}

pub fn svec(m: &Mat<f64>) -> Vec<f64> {
    let mut out = vec![0.0; svec_dim(m.nrows())];
    svec_into(m, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for n in 1..7 {
            let mut seen = vec![false; svec_dim(n)];
            for j in 0..n {
                for i in j..n {
                    let k = svec_index(n, i, j);
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(svec_position(n, k), (i, j));
                    assert_eq!(svec_index(n, j, i), k);
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn packing_preserves_inner_product() {
        let n = 4;
        let a = Mat::<f64>::from_fn(n, n, |i, j| (i + j) as f64 + 0.5 * (i * j) as f64);
        let b = Mat::<f64>::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let trace: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * b[(i, j)])
            .sum();
        let dot: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        assert!((trace - dot).abs() < 1e-12);
        let back = smat(&svec(&a), n);
        for i in 0..n {
            for j in 0..n {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }
}
