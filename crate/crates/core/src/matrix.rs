//! Polynomial matrices and fraction-free determinants, plus the small amount
//! of exact rational linear algebra used by sampling oracles.

use num_traits::{One, Zero};

use crate::poly::{Ctx, PolyError, Polynomial, Rational};

/// Row-major matrix of polynomials sharing one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self, PolyError> {
        if entries.len() != rows * cols {
            return Err(PolyError::ShapeMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(first) = entries.first() {
            for e in &entries[1..] {
                if e.ctx().names() != first.ctx().names() {
                    return Err(PolyError::ContextMismatch {
                        left: first.ctx().describe(),
                        right: e.ctx().describe(),
                    });
                }
            }
        }
        Ok(PolyMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(PolyError::ShapeMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Polynomial] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
        if self.cols != other.rows {
            return Err(PolyError::ShapeMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let ctx = self.ctx_or(other);
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Polynomial::zero(&ctx);
                for k in 0..self.cols {
                    acc = acc.checked_add(&self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        PolyMatrix::new(self.rows, other.cols, entries)
    }

    /// `M · Mᵀ`; symmetric, so only the upper triangle is multiplied out.
    pub fn gram(&self) -> PolyMatrix {
        let n = self.rows;
        let mut entries: Vec<Option<Polynomial>> = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let dot = dot(self.row(i), self.row(j));
                if i != j {
                    entries[j * n + i] = Some(dot.clone());
                }
                entries[i * n + j] = Some(dot);
            }
        }
        PolyMatrix {
            rows: n,
            cols: n,
            entries: entries.into_iter().map(Option::unwrap).collect(),
        }
    }

    fn ctx_or(&self, other: &PolyMatrix) -> Ctx {
        self.entries
            .first()
            .or_else(|| other.entries.first())
            .map(|p| p.ctx().clone())
            .expect("empty matrix has no context")
    }

    /// Exact determinant. Uses cofactor expansion below size 4 and Bareiss
    /// elimination otherwise; no rational-function intermediates are formed.
    pub fn determinant_fraction_free(&self) -> Result<Polynomial, PolyError> {
        if self.rows != self.cols {
            return Err(PolyError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows == 0 {
            return Err(PolyError::NotSquare { rows: 0, cols: 0 });
        }
        if self.rows < 4 {
            Ok(cofactor_det(&self.entries, self.rows))
        } else {
            bareiss_det(self.entries.clone(), self.rows)
        }
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Vec<Vec<Rational>>, PolyError> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|p| p.evaluate(point)).collect())
            .collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|p| p.eval_f64(point)).collect())
            .collect()
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> PolyMatrix {
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            for &j in cols {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix {
            rows: self.rows,
            cols: cols.len(),
            entries,
        }
    }
}

pub fn dot(a: &[Polynomial], b: &[Polynomial]) -> Polynomial {
    let ctx = a[0].ctx().clone();
    a.iter()
        .zip(b)
        .fold(Polynomial::zero(&ctx), |acc, (x, y)| &acc + &(x * y))
}

fn cofactor_det(m: &[Polynomial], n: usize) -> Polynomial {
    match n {
        1 => m[0].clone(),
        2 => &(&m[0] * &m[3]) - &(&m[1] * &m[2]),
        _ => {
            let ctx = m[0].ctx().clone();
            let mut acc = Polynomial::zero(&ctx);
            for j in 0..n {
                if m[j].is_zero() {
                    continue;
                }
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in 1..n {
                    for c in 0..n {
                        if c != j {
                            minor.push(m[r * n + c].clone());
                        }
                    }
                }
                let term = &m[j] * &cofactor_det(&minor, n - 1);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn bareiss_det(mut m: Vec<Polynomial>, n: usize) -> Result<Polynomial, PolyError> {
    let ctx = m[0].ctx().clone();
    let mut negate = false;
    let mut prev = Polynomial::one(&ctx);
    for k in 0..n - 1 {
        if m[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !m[i * n + k].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        m.swap(k * n + j, i * n + j);
                    }
                    negate = !negate;
                }
                None => return Ok(Polynomial::zero(&ctx)),
            }
        }
        let pivot = m[k * n + k].clone();
        for i in k + 1..n {
            let lead = m[i * n + k].clone();
            for j in k + 1..n {
                let num = &(&m[i * n + j] * &pivot) - &(&lead * &m[k * n + j]);
                m[i * n + j] = num.div_exact(&prev).ok_or(PolyError::InexactDivision)?;
            }
            m[i * n + k] = Polynomial::zero(&ctx);
        }
        prev = pivot;
    }
    let det = m[n * n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// Determinant of a rational matrix by Gaussian elimination over ℚ.
pub fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Rational::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &pivot;
            for j in k..n {
                let d = &f * &m[k][j];
                m[i][j] -= d;
            }
        }
    }
    det
}

/// Rank of a rational matrix.
pub fn rational_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let pivot = m[rank][c].clone();
        for i in rank + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &pivot;
            for j in c..cols {
                let d = &f * &m[rank][j];
                m[i][j] -= d;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, VarContext};

    #[test]
    fn mfx1_determinant() {
        let c = VarContext::new(&["x", "y", "z"]).unwrap();
        let v = |n: &str| Polynomial::var(&c, n).unwrap();
        let zero = Polynomial::zero(&c);
        let m = PolyMatrix::from_rows(vec![
            vec![v("y"), v("x"), zero.clone()],
            vec![v("z"), zero, v("x")],
            vec![v("x"), v("y"), v("z")],
        ])
        .unwrap();
        assert_eq!(
            m.determinant_fraction_free().unwrap().to_string(),
            "x^3 - x*y^2 - x*z^2"
        );
    }

    #[test]
    fn one_by_one_and_non_square() {
        let c = VarContext::new(&["x"]).unwrap();
        let p = &Polynomial::var(&c, "x").unwrap().pow(2) + &Polynomial::one(&c);
        let m = PolyMatrix::new(1, 1, vec![p.clone()]).unwrap();
        assert_eq!(m.determinant_fraction_free().unwrap(), p);
        let r = PolyMatrix::new(1, 2, vec![p.clone(), p]).unwrap();
        assert_eq!(
            r.determinant_fraction_free().unwrap_err(),
            PolyError::NotSquare { rows: 1, cols: 2 }
        );
    }

    #[test]
    fn bareiss_with_zero_pivot_matches_cofactor() {
        let c = VarContext::new(&["a", "b"]).unwrap();
        let a = Polynomial::var(&c, "a").unwrap();
        let b = Polynomial::var(&c, "b").unwrap();
        let z = Polynomial::zero(&c);
        let one = Polynomial::one(&c);
        let rows = vec![
            vec![z.clone(), a.clone(), one.clone(), b.clone()],
            vec![a.clone(), z.clone(), b.clone(), one.clone()],
            vec![one.clone(), b.clone(), &a * &b, z.clone()],
            vec![b.clone(), one.clone(), z.clone(), a.clone()],
        ];
        let m = PolyMatrix::from_rows(rows.clone()).unwrap();
        let bareiss = m.determinant_fraction_free().unwrap();
        let flat: Vec<Polynomial> = rows.into_iter().flatten().collect();
        assert_eq!(bareiss, cofactor_det(&flat, 4));
    }

    #[test]
    fn rational_rank_and_det() {
        let m = vec![
            vec![int(1), int(2), int(3)],
            vec![int(2), int(4), int(6)],
            vec![int(0), int(1), int(1)],
        ];
        assert_eq!(rational_rank(m.clone()), 2);
        assert_eq!(rational_det(m), int(0));
        assert_eq!(
            rational_det(vec![vec![int(0), int(1)], vec![int(1), int(0)]]),
            int(-1)
        );
    }

    #[test]
    fn combination_count() {
        assert_eq!(combinations(6, 4).len(), 15);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }
}
