use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Svd};

/// Best rank-`r` approximation and the full list of singular values.
pub fn truncated_svd(y: &Matrix, r: usize) -> Result<(Matrix, Vec<f64>)> {
    let k = y.rows().min(y.cols());
    if r < 1 || r > k {
        return Err(Error::invalid(alloc::format!("rank {r} outside 1..={k}")));
    }
    let svd = Svd::new(y);
    Ok((svd.reconstruct(r), svd.s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn diagonal_truncation() {
        let (x, s) = truncated_svd(&Matrix::diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert_eq!(s, alloc::vec![3.0, 2.0, 1.0]);
        assert!(x.data().iter().zip(Matrix::diag(&[3.0, 2.0, 0.0]).data()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn residual_energy_is_the_tail() {
        let mut rng = rng_from(13);
        let y = Matrix::gaussian(&mut rng, 20, 15);
        let (x, s) = truncated_svd(&y, 3).unwrap();
        let resid: f64 = y.data().iter().zip(x.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        let tail: f64 = s[3..].iter().map(|v| v * v).sum();
        assert!((resid - tail).abs() <= 1e-9 * tail);
    }

    #[test]
    fn beats_random_rank3_competitors() {
        let mut rng = rng_from(14);
        let y = Matrix::gaussian(&mut rng, 20, 15);
        let (x, _) = truncated_svd(&y, 3).unwrap();
        let best = crate::vector::dist2(y.data(), x.data());
        for _ in 0..200 {
            let r = Matrix::gaussian(&mut rng, 3, 15);
            // least-squares fit of the column factor keeps competitors sensible
            let rt = r.transpose();
            let ls = crate::linalg::LeastSquares::new(&rt);
            let mut fitted = Matrix::zeros(20, 3);
            for i in 0..20 {
                let c = ls.solve(y.row(i));
                fitted.row_mut(i).copy_from_slice(&c);
            }
            let comp = fitted.matmul(&r);
            assert!(best <= crate::vector::dist2(y.data(), comp.data()) + 1e-12);
        }
    }
}
