//! Regularized least squares over "placed" columns: each column of the
//! design matrix is a dense segment at some offset, zero elsewhere.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative residual above which a solve is reported as failed.
pub const SOLVE_TOLERANCE: f64 = 1e-6;

/// A column that is `samples` at rows `[start, start + samples.len())` and
/// zero elsewhere. Rows past the observation end are ignored.
#[derive(Debug, Clone, Copy)]
pub struct Placed<'a> {
    pub start: usize,
    pub samples: &'a [Complex64],
}

impl Placed<'_> {
    fn end(&self) -> usize {
        self.start + self.samples.len()
    }
}

/// `Σ_t conj(a[t]) b[t]` over the rows both columns occupy.
fn inner(a: &Placed<'_>, b: &Placed<'_>, rows: usize) -> Complex64 {
    let lo = a.start.max(b.start);
    let hi = a.end().min(b.end()).min(rows);
    if lo >= hi {
        return Complex64::default();
    }
    let xa = &a.samples[lo - a.start..hi - a.start];
    let xb = &b.samples[lo - b.start..hi - b.start];
    xa.iter().zip(xb).map(|(p, q)| p.conj() * q).sum()
}

fn inner_obs(a: &Placed<'_>, y: &[Complex64]) -> Complex64 {
    let hi = a.end().min(y.len());
    if a.start >= hi {
        return Complex64::default();
    }
    a.samples[..hi - a.start]
        .iter()
        .zip(&y[a.start..hi])
        .map(|(p, q)| p.conj() * q)
        .sum()
}

/// In-place Cholesky `A = L Lᴴ` of a Hermitian matrix (row-major, `k × k`);
/// the lower triangle of `a` is overwritten with `L`.
fn cholesky(a: &mut [Complex64], k: usize) -> Result<()> {
    for j in 0..k {
        let mut d = a[j * k + j].re;
        for p in 0..j {
            d -= a[j * k + p].norm_sqr();
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::Solve(format!("matrix not positive definite at pivot {j}")));
        }
        let d = d.sqrt();
        a[j * k + j] = Complex64::new(d, 0.0);
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= a[i * k + p] * a[j * k + p].conj();
            }
            a[i * k + j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[Complex64], k: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut z = b.to_vec();
    for i in 0..k {
        let mut s = z[i];
        for p in 0..i {
            s -= l[i * k + p] * z[p];
        }
        z[i] = s / l[i * k + i].re;
    }
    for i in (0..k).rev() {
        let mut s = z[i];
        for p in i + 1..k {
            s -= l[p * k + i].conj() * z[p];
        }
        z[i] = s / l[i * k + i].re;
    }
    z
}

/// Solves `(XᴴX + reg I) h = Xᴴ y` for the placed columns `X`, and checks
/// the normal-equation residual against [`SOLVE_TOLERANCE`].
pub fn regularized_solve(
    columns: &[Placed<'_>],
    y: &[Complex64],
    reg: f64,
) -> Result<Vec<Complex64>> {
    let k = columns.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let rows = y.len();
    let mut gram = vec![Complex64::default(); k * k];
    for i in 0..k {
        for j in i..k {
            let g = inner(&columns[i], &columns[j], rows);
            gram[i * k + j] = g;
            gram[j * k + i] = g.conj();
        }
        gram[i * k + i] += reg;
    }
    let rhs: Vec<Complex64> = columns.iter().map(|c| inner_obs(c, y)).collect();

    let mut l = gram.clone();
    cholesky(&mut l, k)?;
    let h = cholesky_solve(&l, k, &rhs);

    let rhs_norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let res_norm = (0..k)
        .map(|i| {
            let ax: Complex64 = (0..k).map(|j| gram[i * k + j] * h[j]).sum();
            (ax - rhs[i]).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    if rhs_norm > 0.0 && res_norm > SOLVE_TOLERANCE * rhs_norm {
        return Err(Error::Solve(format!(
            "relative residual {:.3e} exceeds tolerance",
            res_norm / rhs_norm
        )));
    }
    Ok(h)
}
