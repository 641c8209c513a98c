//! Dense kernels on rate matrices.
//!
//! Principal minors of a Laplacian and stationary distributions are computed
//! by Grassmann–Taksar–Heyman style elimination. Every pivot and every updated
//! entry is a sum of non-negative terms, so results keep full relative
//! accuracy even when rates span hundreds of decades (e.g. Boltzmann factors
//! at low bath temperature). A partial-pivoting LU route is kept alongside for
//! cross-checks.

use nalgebra::{DMatrix, DVector};

use crate::network::Laplacian;

/// `det(L[S;S])` where `S` is the complement of `removed`.
///
/// Equals the total weight of spanning forests whose trees are all rooted in
/// `removed` (edges oriented towards the roots). Returns 1 when every vertex
/// is removed.
pub fn principal_minor(l: &Laplacian, removed: &[usize]) -> f64 {
    let n = l.dim();
    let mut kept = vec![true; n];
    for &r in removed {
        kept[r] = false;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    let m = keep.len();
    if m == 0 {
        return 1.0;
    }
    let mut pos = vec![usize::MAX; n];
    for (a, &i) in keep.iter().enumerate() {
        pos[i] = a;
    }

    // rates[j*m + i] = rate keep[j] -> keep[i]; slack[j] = rate keep[j] -> removed set
    let mut rates = vec![0.0; m * m];
    let mut slack = vec![0.0; m];
    for (a, &j) in keep.iter().enumerate() {
        for i in 0..n {
            if i == j {
                continue;
            }
            let r = l.rate(j, i);
            if kept[i] {
                rates[a * m + pos[i]] = r;
            } else {
                slack[a] += r;
            }
        }
    }
    eliminate(&mut rates, &mut slack, m)
}

fn eliminate(rates: &mut [f64], slack: &mut [f64], m: usize) -> f64 {
    let mut det = 1.0;
    for p in 0..m {
        let pivot = slack[p] + rates[p * m + p + 1..(p + 1) * m].iter().sum::<f64>();
        if pivot <= 0.0 {
            return 0.0;
        }
        det *= pivot;
        for j in p + 1..m {
            let into_p = rates[j * m + p];
            if into_p == 0.0 {
                continue;
            }
            let f = into_p / pivot;
            slack[j] += f * slack[p];
            for i in p + 1..m {
                if i != j {
                    rates[j * m + i] += f * rates[p * m + i];
                }
            }
        }
    }
    det
}

/// Stationary distribution of the chain with `rates[i][j]` = rate `i → j`.
///
/// Returns `Err(state)` when the reduction stalls (no exit from `state` into
/// the remaining states), which happens when the stationary distribution is
/// not unique.
pub fn gth_stationary(rates: &[Vec<f64>]) -> Result<Vec<f64>, usize> {
    let n = rates.len();
    let mut k: Vec<Vec<f64>> = rates.to_vec();
    for p in (1..n).rev() {
        let out: f64 = k[p][..p].iter().sum();
        if out <= 0.0 {
            return Err(p);
        }
        for i in 0..p {
            let f = k[i][p] / out;
            if f == 0.0 {
                continue;
            }
            for j in 0..p {
                if i != j {
                    let add = f * k[p][j];
                    k[i][j] += add;
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for p in 1..n {
        let inflow: f64 = (0..p).map(|i| pi[i] * k[i][p]).sum();
        let out: f64 = k[p][..p].iter().sum();
        pi[p] = inflow / out;
    }
    let total: f64 = pi.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(0);
    }
    for x in &mut pi {
        *x /= total;
    }
    Ok(pi)
}

fn to_dmatrix(l: &Laplacian) -> DMatrix<f64> {
    let n = l.dim();
    DMatrix::from_fn(n, n, |i, j| l.get(i, j))
}

/// Determinant by LU with partial pivoting.
pub fn lu_determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 1.0;
    }
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).lu().determinant()
}

/// `det(L[S;S])` by LU, for comparison with [`principal_minor`].
pub fn lu_principal_minor(l: &Laplacian, removed: &[usize]) -> f64 {
    let keep: Vec<usize> = (0..l.dim()).filter(|i| !removed.contains(i)).collect();
    let rows: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| l.get(i, j)).collect())
        .collect();
    lu_determinant(&rows)
}

/// Null vector of `L` normalized to unit sum: the last row of `L` is replaced
/// by the constraint `Σ p = 1` and the system solved by LU.
pub fn lu_nullspace(l: &Laplacian) -> Option<Vec<f64>> {
    let n = l.dim();
    let mut a = to_dmatrix(l);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b)?;
    Some(x.iter().copied().collect())
}
