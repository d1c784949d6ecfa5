use nalgebra::{DMatrix, DVector};

/// Relative pivot size below which a dense system is treated as singular.
const PIVOT_RATIO: f64 = 1e-14;

/// Solves `a x = b` by LU with partial pivoting after row and column
/// equilibration; `None` if (numerically) singular.
pub(crate) fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let row_scale: Vec<f64> = a
        .iter()
        .map(|row| {
            let m = row.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if m > 0.0 { 1.0 / m } else { 1.0 }
        })
        .collect();
    let col_scale: Vec<f64> = (0..n)
        .map(|j| {
            let m = (0..n).fold(0.0_f64, |acc, i| acc.max((a[i][j] * row_scale[i]).abs()));
            if m > 0.0 { 1.0 / m } else { 1.0 }
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j] * row_scale[i] * col_scale[j]);
    let rhs: Vec<f64> = b.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
    let lu = m.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    if max == 0.0 || diag.iter().any(|d| *d <= PIVOT_RATIO * max) {
        return None;
    }
    let z = lu.solve(&DVector::from_column_slice(&rhs))?;
    let x: Vec<f64> = z.iter().zip(&col_scale).map(|(v, s)| v * s).collect();
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn badly_scaled_but_regular() {
        let a = vec![vec![1e30, 1e15], vec![1e15, 0.0]];
        let x = solve_dense(&a, &[0.0, 1.0]).unwrap();
        assert!((x[0] - 1e-15).abs() < 1e-28);
        assert!((x[1] + 1e0).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&a, &[1.0, 2.0]).is_none());
    }
}
