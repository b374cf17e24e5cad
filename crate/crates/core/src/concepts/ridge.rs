//! Ridge regression with an unpenalized intercept, generic over the scalar.

use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<S> {
    pub coef: Vec<S>,
    pub bias: S,
}

impl<S: Scalar> LinearFit<S> {
    pub fn predict(&self, x: &[S]) -> S {
        self.coef
            .iter()
            .zip(x)
            .fold(self.bias.clone(), |acc, (w, v)| acc + w.clone() * v.clone())
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return Err(Error::Concept("singular system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col].clone() / a[col][col].clone();
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k].clone();
                a[row][k] = a[row][k].clone() - f.clone() * v;
            }
            let v = b[col].clone();
            b[row] = b[row].clone() - f * v;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in (row + 1)..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

/// Minimizes Σ (y − w·x − b)² + λ‖w‖² over rows `xs`. Features and targets
/// are centered so the intercept is not penalized.
pub fn fit_ridge<S: Scalar>(xs: &[Vec<S>], ys: &[S], lambda: S) -> Result<LinearFit<S>> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Concept("ridge fit needs matching, non-empty rows".into()));
    }
    let n = S::of_count(xs.len());
    let d = xs[0].len();
    let mut mean = vec![S::zero(); d];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x) {
            *m = m.clone() + v.clone();
        }
    }
    for m in &mut mean {
        *m = m.clone() / n.clone();
    }
    let y_mean = ys.iter().fold(S::zero(), |a, y| a + y.clone()) / n;
    let mut gram = vec![vec![S::zero(); d]; d];
    let mut rhs = vec![S::zero(); d];
    for (x, y) in xs.iter().zip(ys) {
        let xc: Vec<S> = x.iter().zip(&mean).map(|(v, m)| v.clone() - m.clone()).collect();
        let yc = y.clone() - y_mean.clone();
        for i in 0..d {
            rhs[i] = rhs[i].clone() + xc[i].clone() * yc.clone();
            for j in 0..d {
                gram[i][j] = gram[i][j].clone() + xc[i].clone() * xc[j].clone();
            }
        }
    }
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] = row[i].clone() + lambda.clone();
    }
    let coef = solve(gram, rhs)?;
    let bias = coef
        .iter()
        .zip(&mean)
        .fold(y_mean, |acc, (w, m)| acc - w.clone() * m.clone());
    Ok(LinearFit { coef, bias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn one_dimensional_closed_form() {
        // x = [0, 2], y = [-1, 1]: centered x = [-1, 1], y = [-1, 1].
        // w = Σxy / (Σx² + λ) = 2 / 3, b = ȳ − w·x̄ = −2/3.
        let fit = fit_ridge(&[vec![q(0)], vec![q(2)]], &[q(-1), q(1)], q(1)).unwrap();
        assert_eq!(fit.coef, vec![Q::new(2, 3)]);
        assert_eq!(fit.bias, Q::new(-2, 3));
    }

    #[test]
    fn solves_exactly() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let x = solve(a, vec![q(3), q(5)]).unwrap();
        assert_eq!(x, vec![Q::new(4, 5), Q::new(7, 5)]);
    }

    #[test]
    fn singular_is_an_error() {
        assert!(solve(vec![vec![q(1), q(1)], vec![q(1), q(1)]], vec![q(1), q(1)]).is_err());
    }

    #[test]
    fn float_agrees_with_rational() {
        let xs = vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0], vec![-2.0, 1.5]];
        let ys = vec![1.0, -1.0, 1.0, -1.0];
        let f = fit_ridge(&xs, &ys, 1.0).unwrap();
        let xq: Vec<Vec<Q>> = xs.iter().map(|r| r.iter().map(|v| Q::from_f64_lossy(*v)).collect()).collect();
        let yq: Vec<Q> = ys.iter().map(|v| Q::from_f64_lossy(*v)).collect();
        let g = fit_ridge(&xq, &yq, q(1)).unwrap();
        for (a, b) in f.coef.iter().zip(&g.coef) {
            assert!((a - b.to_f64_lossy()).abs() < 1e-12);
        }
    }
}
