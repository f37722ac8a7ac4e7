use nalgebra::DMatrix;

/// Solves `M X = R` by partial-pivot LU. Returns `None` when a pivot of `U`
/// is below `rel_tol` times the largest one.
pub(crate) fn lu_solve(m: DMatrix<f64>, rhs: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(DMatrix::zeros(0, rhs.ncols()));
    }
    let lu = m.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let min = diag.iter().fold(f64::INFINITY, |a, d| a.min(d.abs()));
    if max == 0.0 || min <= rel_tol * max.max(1.0) {
        return None;
    }
    lu.solve(rhs)
}

/// Indices of a maximal set of linearly independent rows of `[A | b]`'s
/// coefficient part, or `Err(())` if the system `A x = b` is inconsistent.
pub(crate) fn independent_rows(a: &[Vec<f64>], b: &[f64], tol: f64) -> Result<Vec<usize>, ()> {
    let m = a.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let n = a[0].len();
    let mut work: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let mut kept = Vec::new();
    // Process rows in order so the kept set is lexicographically first.
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (work row, column)
    for i in 0..m {
        for &(pr, pc) in &pivots {
            let f = work[i][pc] / work[pr][pc];
            if f != 0.0 {
                let pivot_row = work[pr].clone();
                for (w, p) in work[i].iter_mut().zip(&pivot_row) {
                    *w -= f * p;
                }
            }
        }
        let scale = a[i].iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let (col, val) = work[i][..n]
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (k, &x)| {
                if x.abs() > best.1 {
                    (k, x.abs())
                } else {
                    best
                }
            });
        if val > tol * scale {
            pivots.push((i, col));
            kept.push(i);
        } else if work[i][n].abs() > tol * scale.max(b[i].abs()).max(1.0) {
            return Err(());
        }
    }
    Ok(kept)
}
