//! Spectral sequence pages of filtered complexes over F2, driving both the
//! theta-adic filtration (convergence to the equivariant module) and the
//! Alexander filtration induced by the second basepoint.

use crate::gf2::{kernel, BitVec, Echelon, Mat2};
use crate::theta::ThetaComplex;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Page dimensions by filtration level, plus the convergence point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsPages {
    /// pages[r-1] is page E_r: level -> F2 dimension.
    pub pages: Vec<BTreeMap<i64, usize>>,
    /// First r with E_r = E_{r+1} = ... (inside the computed range).
    pub convergence_page: usize,
}

impl SsPages {
    pub fn last(&self) -> &BTreeMap<i64, usize> {
        self.pages.last().unwrap()
    }

    pub fn total(&self, r: usize) -> usize {
        self.pages[r - 1].values().sum()
    }

    pub fn einf_total(&self) -> usize {
        self.last().values().sum()
    }
}

/// Subspace spanned by basis elements of level >= s.
fn level_subspace(n: usize, level: &[i64], s: i64) -> Echelon {
    let mut e = Echelon::new();
    for i in 0..n {
        if level[i] >= s {
            let mut v = BitVec::zeros(n);
            v.set(i, true);
            e.insert(v);
        }
    }
    e
}

/// Basis of {x : op(x) in w}.
fn preimage(n: usize, op: &Mat2, w: &Echelon) -> Echelon {
    let mut t = Mat2::zeros(n, n);
    for j in 0..n {
        let mut ej = BitVec::zeros(n);
        ej.set(j, true);
        let img = op.apply(&ej);
        let red = w.reduce(img);
        for i in red.ones() {
            t.set(i, j, true);
        }
    }
    Echelon::from_rows(kernel(&t))
}

/// Image of a subspace under op.
fn image_of(op: &Mat2, w: &Echelon) -> Echelon {
    let mut e = Echelon::new();
    for b in &w.basis {
        e.insert(op.apply(b));
    }
    e
}

/// Pages of a finite filtered complex over F2. `op` is the differential as
/// an operator matrix (column j is d of basis element j); `level` gives the
/// filtration degree of each basis element, with d non-decreasing.
pub fn pages_of_filtered(op: &Mat2, level: &[i64]) -> Result<SsPages> {
    let n = level.len();
    // Differential must respect the filtration.
    for c in 0..n {
        let mut ec = BitVec::zeros(n);
        ec.set(c, true);
        let img = op.apply(&ec);
        for r in img.ones() {
            if level[r] < level[c] {
                return Err(Error::InvalidDiagram(format!(
                    "differential drops filtration level: {} -> {}",
                    level[c], level[r]
                )));
            }
        }
    }
    let levels: BTreeSet<i64> = level.iter().copied().collect();
    if levels.is_empty() {
        return Ok(SsPages {
            pages: vec![BTreeMap::new()],
            convergence_page: 1,
        });
    }
    let lmin = *levels.iter().next().unwrap();
    let lmax = *levels.iter().last().unwrap();
    let span = (lmax - lmin) as usize + 1;
    let top = Echelon::from_rows((0..n).map(|i| {
        let mut v = BitVec::zeros(n);
        v.set(i, true);
        v
    }));
    let bottom = Echelon::new();
    let f = |s: i64| -> Echelon {
        if s <= lmin {
            top.clone()
        } else if s > lmax {
            bottom.clone()
        } else {
            level_subspace(n, level, s)
        }
    };

    // dim E_r^s = dim Z_r^s - dim(Z_{r-1}^{s+1} + d Z_{r-1}^{s-r+1})
    // with Z_r^s = F^s cap d^{-1}(F^{s+r}).
    let z = |r: i64, s: i64| -> Echelon {
        let fs = f(s);
        let pre = preimage(n, op, &f(s + r));
        fs.intersect(&pre, n)
    };
    let mut pages: Vec<BTreeMap<i64, usize>> = Vec::new();
    // Pages stabilize once r exceeds the level span; compute one beyond.
    let max_r = span + 1;
    for r in 1..=max_r {
        let mut page = BTreeMap::new();
        for &s in &levels {
            let zr = z(r as i64, s);
            let za = z(r as i64 - 1, s + 1);
            let lower = z(r as i64 - 1, s - r as i64 + 1);
            let dz = image_of(op, &lower);
            let denom = za.sum(&dz);
            let quot = zr.dim() - zr.intersect(&denom, n).dim();
            if quot > 0 {
                page.insert(s, quot);
            }
        }
        pages.push(page);
    }
    // Convergence: last stretch of equal pages.
    let mut conv = pages.len();
    for i in (1..pages.len()).rev() {
        if pages[i - 1] == pages[i] {
            conv = i;
        } else {
            break;
        }
    }
    Ok(SsPages {
        pages,
        convergence_page: conv,
    })
}

/// The truncated theta complex as an operator matrix with basis phi_i
/// theta^a, a < window, plus each element's theta-degree.
pub fn truncated_operator(t: &ThetaComplex, window: usize) -> (Mat2, Vec<i64>) {
    let n = t.rank;
    let big = n * window;
    let mut m = Mat2::zeros(big, big);
    for r in 0..n {
        for c in 0..n {
            let p = t.delta.at(r, c);
            if p.is_zero() {
                continue;
            }
            for a in 0..window {
                for b in 0..(window - a) {
                    if p.coeff(b) {
                        let row = r * window + (a + b);
                        let col = c * window + a;
                        let cur = m.get(row, col);
                        m.set(row, col, !cur);
                    }
                }
            }
        }
    }
    let level: Vec<i64> = (0..big).map(|i| (i % window) as i64).collect();
    (m, level)
}

/// Pages of the theta-adic filtration inside a bounded window. E_1 has one
/// column per theta power, each of dimension dim H(C; F2).
pub fn theta_ss_pages(t: &ThetaComplex, window: usize) -> Result<SsPages> {
    let (op, level) = truncated_operator(t, window);
    pages_of_filtered(&op, &level)
}

/// Pages of the Alexander filtration on the equivariant complex: levels come
/// from the generators, theta degrees are carried along unfiltered.
pub fn filtered_ss_pages(
    t: &ThetaComplex,
    alexander: &[i64],
    window: usize,
) -> Result<SsPages> {
    if alexander.len() != t.rank {
        return Err(Error::InvalidDiagram("filtration length mismatch".into()));
    }
    let (op, _) = truncated_operator(t, window);
    let level: Vec<i64> = (0..t.rank * window)
        .map(|i| alexander[i / window])
        .collect();
    pages_of_filtered(&op, &level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floer::{FloerComplex, Generator};
    use crate::theta::{build_theta_complex, homology_module};

    fn toy(n: usize, diff: &[(usize, usize)], perm: Vec<usize>) -> ThetaComplex {
        let mut m = Mat2::zeros(n, n);
        for &(i, j) in diff {
            m.set(i, j, true);
        }
        let c = FloerComplex {
            generators: (0..n).map(|i| Generator::new(vec![i as u32])).collect(),
            diff: m,
            action: Some(perm),
            filtration: None,
            components: vec![0; n],
        };
        build_theta_complex(&c).unwrap()
    }

    #[test]
    fn point_collapses_at_e1() {
        let t = toy(1, &[], vec![0]);
        let ss = theta_ss_pages(&t, 4).unwrap();
        assert_eq!(ss.convergence_page, 1);
        for (_, d) in ss.last() {
            assert_eq!(*d, 1);
        }
        assert_eq!(ss.total(1), 4, "one class per theta column");
    }

    #[test]
    fn swapped_pair_drops_at_e2() {
        let t = toy(2, &[], vec![1, 0]);
        let w = 4;
        let ss = theta_ss_pages(&t, w).unwrap();
        // E1: two per column.
        for (_, d) in &ss.pages[0] {
            assert_eq!(*d, 2);
        }
        assert_eq!(ss.total(1), 2 * w);
        // E2: module is F2[theta]/theta: one class in column 0 only, plus
        // the truncation artifact in the top column.
        let m = homology_module(&t).unwrap();
        let e2 = &ss.pages[1];
        assert_eq!(e2.get(&0), Some(&1));
        for c in 1..(w as i64 - 1) {
            assert_eq!(e2.get(&c), None, "column {}", c);
        }
        // E_inf totals match the truncated module arithmetic.
        assert_eq!(ss.einf_total(), m.truncated_homology_dim(w));
        // Interior columns match the graded dimensions of the module.
        for c in 0..(w - m.torsion.iter().max().copied().unwrap_or(0) - 1) {
            assert_eq!(
                ss.last().get(&(c as i64)).copied().unwrap_or(0),
                m.graded_dim(c),
                "column {}",
                c
            );
        }
    }

    #[test]
    fn trivial_action_collapse() {
        // d = 0, sigma = id on n generators: delta = 0: E1 = E_inf with n
        // per column.
        let t = toy(3, &[], vec![0, 1, 2]);
        let ss = theta_ss_pages(&t, 5).unwrap();
        assert_eq!(ss.convergence_page, 1);
        for (_, d) in ss.last() {
            assert_eq!(*d, 3);
        }
    }

    #[test]
    fn alexander_two_level_cancellation() {
        // Two generators at levels 1 and 0 with one level-dropping arrow in
        // the dual: d(x0) = x1 with A(x0) = 1, A(x1) = 0. On the dual the
        // differential raises the level. E1 keeps both; E2 kills the pair.
        let t = toy(2, &[(0, 1)], vec![0, 1]);
        let alex = vec![1, 0];
        let ss = filtered_ss_pages(&t, &alex, 3).unwrap();
        let e1_total = ss.total(1);
        assert!(e1_total >= 2, "both generators on E1");
        assert_eq!(ss.einf_total(), 0, "everything cancels");
    }

    #[test]
    fn trivial_filtration_matches_unfiltered() {
        let t = toy(2, &[], vec![1, 0]);
        let alex = vec![0, 0];
        let ss = filtered_ss_pages(&t, &alex, 4).unwrap();
        // One filtration level: collapse at E1 with the full truncated
        // homology dimension.
        let m = homology_module(&t).unwrap();
        assert_eq!(ss.einf_total(), m.truncated_homology_dim(4));
        assert_eq!(ss.convergence_page, 1);
    }
}
