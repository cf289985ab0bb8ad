//! Parity-graded matrices over a supercommutative ring, with the
//! superdeterminant and the supertranspose.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Parity, Scalar};
use crate::series::SuperSeries;

/// Operations a matrix entry must support. Entries are either exact scalars
/// or truncated series.
pub trait Entry: Clone + fmt::Display {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn inverse(&self) -> Result<Self>;
    fn is_null(&self) -> bool;
    fn same(&self, o: &Self) -> bool;
    fn grading(&self) -> Option<Parity>;
}

impl Entry for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn one_like(&self) -> Self {
        Scalar::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn inverse(&self) -> Result<Self> {
        self.invert()
    }
    fn is_null(&self) -> bool {
        self.is_zero()
    }
    fn same(&self, o: &Self) -> bool {
        self == o
    }
    fn grading(&self) -> Option<Parity> {
        self.parity()
    }
}

impl Entry for SuperSeries {
    fn zero_like(&self) -> Self {
        SuperSeries::zero(self.chart(), self.trunc())
    }
    fn one_like(&self) -> Self {
        SuperSeries::one(self.chart(), self.trunc())
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn inverse(&self) -> Result<Self> {
        self.invert()
    }
    fn is_null(&self) -> bool {
        self.is_zero()
    }
    fn same(&self, o: &Self) -> bool {
        self.eq_trunc(o)
    }
    fn grading(&self) -> Option<Parity> {
        self.parity()
    }
}

/// Matrix with graded rows and columns. Entry (i, j) is the coefficient of
/// basis vector i in the image of basis vector j.
#[derive(Clone, Debug)]
pub struct SuperMatrix<T> {
    pub rows: Vec<Parity>,
    pub cols: Vec<Parity>,
    pub e: Vec<Vec<T>>,
}

impl<T: Entry> SuperMatrix<T> {
    pub fn new(rows: Vec<Parity>, cols: Vec<Parity>, e: Vec<Vec<T>>) -> SuperMatrix<T> {
        assert_eq!(e.len(), rows.len());
        assert!(e.iter().all(|r| r.len() == cols.len()));
        SuperMatrix { rows, cols, e }
    }

    pub fn identity(par: &[Parity], proto: &T) -> SuperMatrix<T> {
        let n = par.len();
        let e = (0..n)
            .map(|i| (0..n).map(|j| if i == j { proto.one_like() } else { proto.zero_like() }).collect())
            .collect();
        SuperMatrix { rows: par.to_vec(), cols: par.to_vec(), e }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.e[i][j]
    }

    /// Parity preserving: each entry has parity row + column.
    pub fn is_even(&self) -> bool {
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                let x = &self.e[i][j];
                if x.is_null() {
                    continue;
                }
                if x.grading() != Some(r.add(*c)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul(&self, o: &SuperMatrix<T>) -> SuperMatrix<T> {
        assert_eq!(self.cols.len(), o.rows.len());
        let zero = self.e[0][0].zero_like();
        let e = (0..self.rows.len())
            .map(|i| {
                (0..o.cols.len())
                    .map(|j| {
                        let mut s = zero.clone();
                        for k in 0..self.cols.len() {
                            s = s.plus(&self.e[i][k].times(&o.e[k][j]));
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        SuperMatrix { rows: self.rows.clone(), cols: o.cols.clone(), e }
    }

    pub fn same(&self, o: &SuperMatrix<T>) -> bool {
        self.rows == o.rows
            && self.cols == o.cols
            && self.e.iter().zip(&o.e).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.same(y)))
    }

    /// st(M)_{ij} = (−1)^{(p_i + p_j) p_i} M_{ji}.
    pub fn supertranspose(&self) -> SuperMatrix<T> {
        let e = (0..self.cols.len())
            .map(|i| {
                (0..self.rows.len())
                    .map(|j| {
                        let pi = self.cols[i];
                        let pj = self.rows[j];
                        let x = self.e[j][i].clone();
                        if pi.add(pj).is_odd() && pi.is_odd() {
                            x.negate()
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        SuperMatrix { rows: self.cols.clone(), cols: self.rows.clone(), e }
    }

    /// Entries sign-flipped on the odd off-diagonal blocks.
    pub fn parity_conjugate(&self) -> SuperMatrix<T> {
        let mut out = self.clone();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                if r.add(*c).is_odd() {
                    out.e[i][j] = out.e[i][j].negate();
                }
            }
        }
        out
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<T>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.e[i][j].clone()).collect()).collect()
    }

    /// Berezinian det(K − L N⁻¹ M)·det(N)⁻¹ of an even square matrix.
    pub fn sdet(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::Invalid("sdet needs matching row and column gradings".into()));
        }
        let ev: Vec<usize> = (0..self.rows.len()).filter(|&i| !self.rows[i].is_odd()).collect();
        let od: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].is_odd()).collect();
        let proto = self.e[0][0].clone();
        let k = self.block(&ev, &ev);
        let l = self.block(&ev, &od);
        let m = self.block(&od, &ev);
        let n = self.block(&od, &od);
        let (ninv, ndet) = if od.is_empty() {
            (Vec::new(), proto.one_like())
        } else {
            let d = det(&n, &proto);
            let dinv = d.inverse().map_err(|_| Error::SingularOddBlock)?;
            let adj = adjugate(&n, &proto);
            let inv: Vec<Vec<T>> =
                adj.iter().map(|r| r.iter().map(|x| x.times(&dinv)).collect()).collect();
            (inv, d)
        };
        let mut schur = k.clone();
        if !od.is_empty() {
            let lninv = matmul(&l, &ninv, &proto);
            let corr = matmul(&lninv, &m, &proto);
            for i in 0..schur.len() {
                for j in 0..schur.len() {
                    schur[i][j] = schur[i][j].minus(&corr[i][j]);
                }
            }
        }
        let top = if ev.is_empty() { proto.one_like() } else { det(&schur, &proto) };
        Ok(top.times(&ndet.inverse().map_err(|_| Error::SingularOddBlock)?))
    }
}

fn matmul<T: Entry>(a: &[Vec<T>], b: &[Vec<T>], proto: &T) -> Vec<Vec<T>> {
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| {
                    let mut s = proto.zero_like();
                    for (k, x) in r.iter().enumerate() {
                        s = s.plus(&x.times(&b[k][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn minor<T: Entry>(a: &[Vec<T>], skip_r: usize, skip_c: usize) -> Vec<Vec<T>> {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_r)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != skip_c).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Cofactor expansion; entries are assumed even, hence commuting.
fn det<T: Entry>(a: &[Vec<T>], proto: &T) -> T {
    match a.len() {
        0 => proto.one_like(),
        1 => a[0][0].clone(),
        _ => {
            let mut s = proto.zero_like();
            for j in 0..a.len() {
                let t = a[0][j].times(&det(&minor(a, 0, j), proto));
                s = if j % 2 == 0 { s.plus(&t) } else { s.minus(&t) };
            }
            s
        }
    }
}

fn adjugate<T: Entry>(a: &[Vec<T>], proto: &T) -> Vec<Vec<T>> {
    let n = a.len();
    if n == 1 {
        return vec![vec![proto.one_like()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = det(&minor(a, j, i), proto);
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        c.negate()
                    }
                })
                .collect()
        })
        .collect()
}

impl<T: Entry> fmt::Display for SuperMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.e.iter().enumerate() {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", cells.join(", "))?;
            if i + 1 < self.e.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Parity::{Even, Odd};

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn identity_and_diagonal() {
        let id = SuperMatrix::identity(&[Even, Odd], &s(0));
        assert!(id.sdet().unwrap().is_one());
        let d = SuperMatrix::new(vec![Even, Odd], vec![Even, Odd], vec![vec![s(3), s(0)], vec![s(0), s(5)]]);
        assert_eq!(d.sdet().unwrap(), Scalar::frac(3, 5));
    }

    #[test]
    fn supertranspose_squares_to_parity_conjugation() {
        let a1 = Scalar::gen(1);
        let a2 = Scalar::gen(2);
        let m = SuperMatrix::new(
            vec![Even, Odd],
            vec![Even, Odd],
            vec![vec![s(2), a1.clone()], vec![a2.clone(), s(7)]],
        );
        let st = m.supertranspose();
        assert!(st.get(1, 0).same(&a1.neg()));
        assert!(st.get(0, 1).same(&a2));
        assert!(st.supertranspose().same(&m.parity_conjugate()));
    }

    #[test]
    fn singular_odd_block() {
        let m = SuperMatrix::new(vec![Even, Odd], vec![Even, Odd], vec![vec![s(1), s(0)], vec![s(0), s(0)]]);
        assert!(matches!(m.sdet(), Err(Error::SingularOddBlock)));
    }
}
