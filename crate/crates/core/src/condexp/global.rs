//! Polynomial least squares on standardized features.
//!
//! The design matrix is never formed in full. Each chunk of rows is reduced
//! to its R factor (augmented with the response column), the stacked factors
//! are reduced again, and the small final system is solved with a
//! column-pivoted QR so that rank loss is detected and handled.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Columns with `|R_jj| <= RANK_TOL * |R_00|` after pivoting are dropped.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalFit {
    pub degree: usize,
    /// Per-coordinate shift and scale applied before the basis.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Monomial exponents, one entry per basis column.
    pub exponents: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// All exponent vectors of total degree `<= q` in `d` variables, graded.
pub fn monomials(d: usize, q: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=q as u32 {
        let mut cur = vec![0u32; d];
        push_compositions(&mut out, &mut cur, 0, total);
    }
    out
}

fn push_compositions(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, i: usize, left: u32) {
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[i] = v;
        push_compositions(out, cur, i + 1, left - v);
    }
}

fn basis_row(x: &[f64], mean: &[f64], scale: &[f64], degree: usize, exps: &[Vec<u32>], out: &mut [f64]) {
    let d = x.len();
    let mut powers = [[1.0f64; 16]; 8];
    let mut heap: Vec<Vec<f64>> = Vec::new();
    let small = d <= 8 && degree < 16;
    if !small {
        heap = vec![vec![1.0; degree + 1]; d];
    }
    for i in 0..d {
        let s = (x[i] - mean[i]) / scale[i];
        for k in 1..=degree {
            if small {
                powers[i][k] = powers[i][k - 1] * s;
            } else {
                heap[i][k] = heap[i][k - 1] * s;
            }
        }
    }
    for (o, e) in out.iter_mut().zip(exps) {
        let mut v = 1.0;
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                v *= if small { powers[i][k as usize] } else { heap[i][k as usize] };
            }
        }
        *o = v;
    }
}

impl GlobalFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut row = vec![0.0; self.exponents.len()];
        basis_row(x, &self.mean, &self.scale, self.degree, &self.exponents, &mut row);
        row.iter().zip(&self.coefficients).map(|(a, c)| a * c).sum()
    }
}

pub(super) struct GlobalDesign {
    degree: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    exps: Vec<Vec<u32>>,
}

impl GlobalDesign {
    pub(super) fn new(features: &[f64], d: usize, degree: usize) -> Result<Self> {
        let rows = features.len() / d;
        let exps = monomials(d, degree);
        if rows <= exps.len() {
            return Err(Error::Estimator {
                step: 0,
                detail: format!("{rows} rows for {} basis functions", exps.len()),
            });
        }
        let sums = par::map_chunks(rows, |r| {
            let mut s = vec![0.0; d];
            for p in r {
                for i in 0..d {
                    s[i] += features[p * d + i];
                }
            }
            s
        });
        let mean: Vec<f64> = (0..d)
            .map(|i| sums.iter().map(|s| s[i]).sum::<f64>() / rows as f64)
            .collect();
        let sq = par::map_chunks(rows, |r| {
            let mut s = vec![0.0; d];
            for p in r {
                for i in 0..d {
                    let c = features[p * d + i] - mean[i];
                    s[i] += c * c;
                }
            }
            s
        });
        let scale: Vec<f64> = (0..d)
            .map(|i| {
                let var = sq.iter().map(|s| s[i]).sum::<f64>() / rows as f64;
                let sd = var.sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(GlobalDesign {
            degree,
            mean,
            scale,
            exps,
        })
    }

    pub(super) fn fit(&self, features: &[f64], d: usize, responses: &[f64]) -> Result<GlobalFit> {
        let rows = responses.len();
        let m = self.exps.len();
        let partial_rs = par::map_chunks(rows, |r| {
            let mut a = DMatrix::<f64>::zeros(r.len(), m + 1);
            let mut row = vec![0.0; m];
            for (li, p) in r.enumerate() {
                basis_row(&features[p * d..(p + 1) * d], &self.mean, &self.scale, self.degree, &self.exps, &mut row);
                for j in 0..m {
                    a[(li, j)] = row[j];
                }
                a[(li, m)] = responses[p];
            }
            a.qr().r()
        });
        let total_rows: usize = partial_rs.iter().map(|r| r.nrows()).sum();
        let mut stacked = DMatrix::<f64>::zeros(total_rows, m + 1);
        let mut at = 0;
        for r in &partial_rs {
            stacked.view_mut((at, 0), (r.nrows(), m + 1)).copy_from(r);
            at += r.nrows();
        }
        let r_aug = stacked.qr().r();
        let r_a = r_aug.view((0, 0), (m, m)).into_owned();
        let rhs: DVector<f64> = r_aug.view((0, m), (m, 1)).column(0).into_owned();
        let (coefficients, rank) = solve_pivoted(r_a, rhs)?;
        Ok(GlobalFit {
            degree: self.degree,
            mean: self.mean.clone(),
            scale: self.scale.clone(),
            exponents: self.exps.clone(),
            coefficients,
            rank,
            rank_deficient: rank < m,
        })
    }
}

/// Least squares for a square upper-triangular system via column-pivoted QR,
/// restricted to the numerically identified columns. Returns coefficients in
/// the original column order and the detected rank.
fn solve_pivoted(a: DMatrix<f64>, b: DVector<f64>) -> Result<(Vec<f64>, usize)> {
    let m = a.ncols();
    let qr = a.col_piv_qr();
    let r = qr.r();
    let q = qr.q();
    let mut order = RowDVector::<f64>::from_iterator(m, (0..m).map(|j| j as f64));
    qr.p().permute_columns(&mut order);
    let lead = r[(0, 0)].abs();
    let rank = if lead == 0.0 {
        0
    } else {
        (0..m).take_while(|&j| r[(j, j)].abs() > RANK_TOL * lead).count()
    };
    let qtb = q.transpose() * b;
    let mut sub = vec![0.0; rank];
    for j in (0..rank).rev() {
        let mut acc = qtb[j];
        for k in j + 1..rank {
            acc -= r[(j, k)] * sub[k];
        }
        sub[j] = acc / r[(j, j)];
    }
    let mut coefs = vec![0.0; m];
    for (j, v) in sub.into_iter().enumerate() {
        coefs[order[j] as usize] = v;
    }
    if coefs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Estimator {
            step: 0,
            detail: "non-finite regression coefficients".into(),
        });
    }
    Ok((coefs, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condexp::{fit, EstimatorSpec, FittedRegression};

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(1, 3).len(), 4);
        assert_eq!(monomials(2, 2).len(), 6);
        assert_eq!(monomials(3, 3).len(), 20);
        assert_eq!(monomials(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn pivoted_solve_recovers_permuted_columns() {
        // columns with very different norms force a nontrivial pivot order
        let a = DMatrix::from_row_slice(3, 3, &[1e-3, 5.0, 0.2, 0.0, 3.0, 1.0, 0.0, 0.0, 40.0]);
        let x = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
        let b = &a * &x;
        let (got, rank) = solve_pivoted(a, b).unwrap();
        assert_eq!(rank, 3);
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn duplicated_feature_is_flagged() {
        // two identical coordinates make the degree-1 design rank 2 of 3
        let n = 400;
        let mut feats = Vec::with_capacity(2 * n);
        let mut resp = Vec::with_capacity(n);
        for i in 0..n {
            let v = (i as f64 * 0.37).sin();
            feats.extend_from_slice(&[v, v]);
            resp.push(1.0 + 2.0 * v);
        }
        let f = fit(&feats, 2, &resp, &EstimatorSpec::global(1)).unwrap();
        assert!(f.rank_deficient());
        if let FittedRegression::Global(g) = &f {
            assert_eq!(g.rank, 2);
        }
        for i in 0..n {
            let x = &feats[2 * i..2 * i + 2];
            assert!((f.predict(x) - resp[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_basis() {
        let n = 10_000;
        let feats: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 250.0 - 2.0).collect();
        let resp: Vec<f64> = feats.iter().map(|v| (3.0 * v).sin() + v.abs()).collect();
        let f = fit(&feats, 1, &resp, &EstimatorSpec::global(3)).unwrap();
        let FittedRegression::Global(g) = &f else { panic!() };
        let mut row = vec![0.0; 4];
        let mut dots = [0.0; 4];
        let mut norms = [0.0; 4];
        let mut rnorm = 0.0;
        for i in 0..n {
            basis_row(&feats[i..i + 1], &g.mean, &g.scale, 3, &g.exponents, &mut row);
            let res = resp[i] - f.predict(&feats[i..i + 1]);
            rnorm += res * res;
            for j in 0..4 {
                dots[j] += row[j] * res;
                norms[j] += row[j] * row[j];
            }
        }
        for j in 0..4 {
            assert!(dots[j].abs() <= 1e-6 * (norms[j] * rnorm).sqrt(), "column {j}");
        }
    }
}
