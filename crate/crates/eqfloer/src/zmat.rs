//! Exact integer linear algebra: Smith normal form over Z, integer solving,
//! and integer kernel bases. Entries are arbitrary-precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct MatZ {
    pub data: Vec<Vec<BigInt>>, // row-major
    pub nrows: usize,
    pub ncols: usize,
}

impl MatZ {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        MatZ {
            data: vec![vec![BigInt::zero(); ncols]; nrows],
            nrows,
            ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = MatZ::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        MatZ {
            data: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            nrows,
            ncols,
        }
    }

    pub fn mul(&self, other: &MatZ) -> MatZ {
        assert_eq!(self.ncols, other.nrows);
        let mut out = MatZ::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.ncols {
                    if other.data[k][j].is_zero() {
                        continue;
                    }
                    let p = &self.data[i][k] * &other.data[k][j];
                    out.data[i][j] += p;
                }
            }
        }
        out
    }

    pub fn apply_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut s = BigInt::zero();
                for j in 0..self.ncols {
                    if !self.data[i][j].is_zero() && !v[j].is_zero() {
                        s += &self.data[i][j] * &v[j];
                    }
                }
                s
            })
            .collect()
    }
}

/// Smith normal form: U * A * V = S with U, V unimodular and S diagonal with
/// s_1 | s_2 | ... Returns (u, s, v).
pub struct Snf {
    pub u: MatZ,
    pub s: MatZ,
    pub v: MatZ,
}

pub fn smith(a: &MatZ) -> Snf {
    let mut s = a.clone();
    let mut u = MatZ::identity(a.nrows);
    let mut v = MatZ::identity(a.ncols);
    let n = a.nrows.min(a.ncols);

    for t in 0..n {
        loop {
            // Find the nonzero entry of smallest magnitude in the remaining block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..s.nrows {
                for j in t..s.ncols {
                    if s.data[i][j].is_zero() {
                        continue;
                    }
                    match &best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) => {
                            if s.data[i][j].abs() < s.data[*bi][*bj].abs() {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                // Block is zero; done.
                return finish(u, s, v, t);
            };
            s.data.swap(t, pi);
            u.data.swap(t, pi);
            for row in s.data.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.data.iter_mut() {
                row.swap(t, pj);
            }

            // Reduce column t and row t by the pivot.
            let mut clean = true;
            for i in (t + 1)..s.nrows {
                if s.data[i][t].is_zero() {
                    continue;
                }
                let q = div_round(&s.data[i][t], &s.data[t][t]);
                if !q.is_zero() {
                    for j in 0..s.ncols {
                        let sub = &q * &s.data[t][j];
                        s.data[i][j] -= sub;
                    }
                    for j in 0..u.ncols {
                        let sub = &q * &u.data[t][j];
                        u.data[i][j] -= sub;
                    }
                }
                if !s.data[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..s.ncols {
                if s.data[t][j].is_zero() {
                    continue;
                }
                let q = div_round(&s.data[t][j], &s.data[t][t]);
                if !q.is_zero() {
                    for i in 0..s.nrows {
                        let sub = &q * &s.data[i][t];
                        s.data[i][j] -= sub;
                    }
                    for i in 0..v.nrows {
                        let sub = &q * &v.data[i][t];
                        v.data[i][j] -= sub;
                    }
                }
                if !s.data[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Row and column are clear beyond the pivot; enforce divisibility.
            let mut fixed = true;
            'scan: for i in (t + 1)..s.nrows {
                for j in (t + 1)..s.ncols {
                    if !(&s.data[i][j] % &s.data[t][t]).is_zero() {
                        // Add row i to row t and restart reduction.
                        for k in 0..s.ncols {
                            let add = s.data[i][k].clone();
                            s.data[t][k] += add;
                        }
                        for k in 0..u.ncols {
                            let add = u.data[i][k].clone();
                            u.data[t][k] += add;
                        }
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    finish(u, s, v, n)
}

fn finish(mut u: MatZ, mut s: MatZ, mut v: MatZ, _upto: usize) -> Snf {
    // Normalize signs of diagonal entries.
    let n = s.nrows.min(s.ncols);
    for t in 0..n {
        if s.data[t][t].is_negative() {
            for j in 0..s.ncols {
                let neg = -s.data[t][j].clone();
                s.data[t][j] = neg;
            }
            for j in 0..u.ncols {
                let neg = -u.data[t][j].clone();
                u.data[t][j] = neg;
            }
        }
    }
    let _ = &mut v;
    Snf { u, s, v }
}

/// Rounded division minimizing |a - q b|.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Solve A x = b over the integers. Returns one solution or None.
pub fn solve_integer(a: &MatZ, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let snf = smith(a);
    let ub = snf.u.apply_vec(b);
    let n = a.nrows.min(a.ncols);
    let mut y = vec![BigInt::zero(); a.ncols];
    for i in 0..a.nrows {
        let d = if i < n {
            snf.s.data[i][i].clone()
        } else {
            BigInt::zero()
        };
        if d.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ub[i].div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(snf.v.apply_vec(&y))
}

/// Basis of the integer kernel of A (as column vectors).
pub fn kernel_integer(a: &MatZ) -> Vec<Vec<BigInt>> {
    let snf = smith(a);
    let n = a.nrows.min(a.ncols);
    let mut out = Vec::new();
    for j in 0..a.ncols {
        let dj = if j < n {
            snf.s.data[j][j].clone()
        } else {
            BigInt::zero()
        };
        if dj.is_zero() {
            // Column j of V spans a kernel direction.
            out.push((0..a.ncols).map(|i| snf.v.data[i][j].clone()).collect());
        }
    }
    out
}

/// Solve A x = b over the rationals; returns true iff consistent.
pub fn solvable_rational(a: &MatZ, b: &[BigInt]) -> bool {
    // Fraction-free Gaussian elimination on the augmented matrix; consistent
    // iff no pivot appears in the augmented column.
    let mut m: Vec<Vec<BigInt>> = (0..a.nrows)
        .map(|i| {
            let mut row = a.data[i].clone();
            row.push(b[i].clone());
            row
        })
        .collect();
    let nrows = a.nrows;
    let ncols = a.ncols + 1;
    let mut rank_row = 0usize;
    for col in 0..a.ncols {
        let mut piv = None;
        for r in rank_row..nrows {
            if !m[r][col].is_zero() {
                piv = Some(r);
                break;
            }
        }
        let Some(p) = piv else { continue };
        m.swap(rank_row, p);
        for r in 0..nrows {
            if r == rank_row || m[r][col].is_zero() {
                continue;
            }
            let (pc, rc) = (m[rank_row][col].clone(), m[r][col].clone());
            for c in 0..ncols {
                let val = &m[r][c] * &pc - &m[rank_row][c] * &rc;
                m[r][c] = val;
            }
        }
        rank_row += 1;
        if rank_row == nrows {
            break;
        }
    }
    for row in &m {
        if row[..a.ncols].iter().all(|x| x.is_zero()) && !row[a.ncols].is_zero() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn to_big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_small() {
        let a = MatZ::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let snf = smith(&a);
        // Check U A V = S and divisibility chain.
        let lhs = snf.u.mul(&a).mul(&snf.v);
        assert_eq!(lhs.data, snf.s.data);
        let d: Vec<BigInt> = (0..3).map(|i| snf.s.data[i][i].clone()).collect();
        for i in 0..2 {
            if !d[i + 1].is_zero() {
                assert!((&d[i + 1] % &d[i]).is_zero());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn smith_certificates(rows in 1usize..5, cols in 1usize..5,
                              vals in prop::collection::vec(-6i64..=6, 25)) {
            let mut a = MatZ::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a.data[i][j] = BigInt::from(vals[i * cols + j]);
                }
            }
            let snf = smith(&a);
            let prod = snf.u.mul(&a).mul(&snf.v);
            prop_assert_eq!(&prod.data, &snf.s.data);
            // S diagonal
            for i in 0..rows {
                for j in 0..cols {
                    if i != j {
                        prop_assert!(snf.s.data[i][j].is_zero());
                    }
                }
            }
            // kernel members really are in the kernel
            for k in kernel_integer(&a) {
                let img = a.apply_vec(&k);
                prop_assert!(img.iter().all(|x| x.is_zero()));
            }
        }

        #[test]
        fn integer_solve_roundtrip(rows in 1usize..5, cols in 1usize..5,
                                   vals in prop::collection::vec(-5i64..=5, 25),
                                   x in prop::collection::vec(-4i64..=4, 5)) {
            let mut a = MatZ::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a.data[i][j] = BigInt::from(vals[i * cols + j]);
                }
            }
            let xv = to_big(&x[..cols]);
            let b = a.apply_vec(&xv);
            let sol = solve_integer(&a, &b).expect("consistent by construction");
            prop_assert_eq!(a.apply_vec(&sol), b);
        }
    }
}
