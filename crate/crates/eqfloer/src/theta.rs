//! Equivariant algebra over F2[theta]: matrices, Smith normal form with
//! certified transformations, the equivariant cochain complex with
//! differential d* + theta(1 + sigma)*, and the classification of its
//! cohomology as a finitely generated module.

use crate::floer::FloerComplex;
use crate::gf2::Mat2;
use crate::poly::PolyF2;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    pub nrows: usize,
    pub ncols: usize,
    data: Vec<PolyF2>, // row-major
}

impl PolyMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        PolyMatrix {
            nrows,
            ncols,
            data: vec![PolyF2::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = PolyF2::one();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &PolyF2 {
        &self.data[r * self.ncols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut PolyF2 {
        &mut self.data[r * self.ncols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: PolyF2) {
        self.data[r * self.ncols + c] = p;
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = PolyMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.ncols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a * b;
                    let cur = out.at(i, j).clone();
                    out.set(i, j, &cur + &prod);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|p| p.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                (0..self.ncols).all(|j| {
                    if i == j {
                        self.at(i, j).is_one()
                    } else {
                        self.at(i, j).is_zero()
                    }
                })
            })
    }

    /// Reduction mod theta as an F2 matrix.
    pub fn mod_theta(&self) -> Mat2 {
        let mut m = Mat2::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                if self.at(i, j).coeff(0) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Apply to a column vector of polynomials.
    pub fn apply(&self, v: &[PolyF2]) -> Vec<PolyF2> {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut acc = PolyF2::zero();
                for j in 0..self.ncols {
                    if !self.at(i, j).is_zero() && !v[j].is_zero() {
                        acc += self.at(i, j) * &v[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Smith normal form over F2[theta] with transformation certificates:
/// u * m * v = s, with u, v unimodular (inverses tracked and verified).
pub struct SnfTheta {
    pub u: PolyMatrix,
    pub v: PolyMatrix,
    pub s: PolyMatrix,
    pub u_inv: PolyMatrix,
    pub v_inv: PolyMatrix,
}

impl SnfTheta {
    /// Diagonal invariant factors, zeros trimmed.
    pub fn invariant_factors(&self) -> Vec<PolyF2> {
        let n = self.s.nrows.min(self.s.ncols);
        (0..n)
            .map(|i| self.s.at(i, i).clone())
            .filter(|p| !p.is_zero())
            .collect()
    }

    pub fn verify(&self, m: &PolyMatrix) -> bool {
        let prod = self.u.mul(m).mul(&self.v);
        if prod != self.s {
            return false;
        }
        if !self.u.mul(&self.u_inv).is_identity() || !self.v.mul(&self.v_inv).is_identity() {
            return false;
        }
        for i in 0..self.s.nrows {
            for j in 0..self.s.ncols {
                if i != j && !self.s.at(i, j).is_zero() {
                    return false;
                }
            }
        }
        let f = self.invariant_factors();
        for w in f.windows(2) {
            if !w[0].divides(&w[1]) {
                return false;
            }
        }
        true
    }
}

pub fn snf_theta(m: &PolyMatrix) -> SnfTheta {
    let mut s = m.clone();
    let (nr, nc) = (s.nrows, s.ncols);
    let mut u = PolyMatrix::identity(nr);
    let mut u_inv = PolyMatrix::identity(nr);
    let mut v = PolyMatrix::identity(nc);
    let mut v_inv = PolyMatrix::identity(nc);

    fn swap_rows(s: &mut PolyMatrix, u: &mut PolyMatrix, u_inv: &mut PolyMatrix, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..s.ncols {
            let (x, y) = (s.at(a, c).clone(), s.at(b, c).clone());
            s.set(a, c, y);
            s.set(b, c, x);
        }
        for c in 0..u.ncols {
            let (x, y) = (u.at(a, c).clone(), u.at(b, c).clone());
            u.set(a, c, y);
            u.set(b, c, x);
        }
        for r in 0..u_inv.nrows {
            let (x, y) = (u_inv.at(r, a).clone(), u_inv.at(r, b).clone());
            u_inv.set(r, a, y);
            u_inv.set(r, b, x);
        }
    }
    fn swap_cols(s: &mut PolyMatrix, v: &mut PolyMatrix, v_inv: &mut PolyMatrix, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..s.nrows {
            let (x, y) = (s.at(r, a).clone(), s.at(r, b).clone());
            s.set(r, a, y);
            s.set(r, b, x);
        }
        for r in 0..v.nrows {
            let (x, y) = (v.at(r, a).clone(), v.at(r, b).clone());
            v.set(r, a, y);
            v.set(r, b, x);
        }
        for c in 0..v_inv.ncols {
            let (x, y) = (v_inv.at(a, c).clone(), v_inv.at(b, c).clone());
            v_inv.set(a, c, y);
            v_inv.set(b, c, x);
        }
    }
    // row a += q * row b; u_inv gets the inverse column operation.
    fn add_row(
        s: &mut PolyMatrix,
        u: &mut PolyMatrix,
        u_inv: &mut PolyMatrix,
        a: usize,
        b: usize,
        q: &PolyF2,
    ) {
        for c in 0..s.ncols {
            let add = q * s.at(b, c);
            let cur = s.at(a, c).clone();
            s.set(a, c, &cur + &add);
        }
        for c in 0..u.ncols {
            let add = q * u.at(b, c);
            let cur = u.at(a, c).clone();
            u.set(a, c, &cur + &add);
        }
        for r in 0..u_inv.nrows {
            let add = q * u_inv.at(r, a);
            let cur = u_inv.at(r, b).clone();
            u_inv.set(r, b, &cur + &add);
        }
    }
    // col a += q * col b; v_inv gets the inverse row operation.
    fn add_col(
        s: &mut PolyMatrix,
        v: &mut PolyMatrix,
        v_inv: &mut PolyMatrix,
        a: usize,
        b: usize,
        q: &PolyF2,
    ) {
        for r in 0..s.nrows {
            let add = q * s.at(r, b);
            let cur = s.at(r, a).clone();
            s.set(r, a, &cur + &add);
        }
        for r in 0..v.nrows {
            let add = q * v.at(r, b);
            let cur = v.at(r, a).clone();
            v.set(r, a, &cur + &add);
        }
        for c in 0..v_inv.ncols {
            let add = q * v_inv.at(a, c);
            let cur = v_inv.at(b, c).clone();
            v_inv.set(b, c, &cur + &add);
        }
    }

    let n = nr.min(nc);
    for t in 0..n {
        'pivot: loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for i in t..nr {
                for j in t..nc {
                    if let Some(deg) = s.at(i, j).degree() {
                        if best.map_or(true, |(_, _, d)| deg < d) {
                            best = Some((i, j, deg));
                        }
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                return SnfTheta { u, v, s, u_inv, v_inv };
            };
            swap_rows(&mut s, &mut u, &mut u_inv, t, pi);
            swap_cols(&mut s, &mut v, &mut v_inv, t, pj);
            let mut clean = true;
            for i in (t + 1)..nr {
                if s.at(i, t).is_zero() {
                    continue;
                }
                let (q, _r) = s.at(i, t).divrem(s.at(t, t));
                if !q.is_zero() {
                    add_row(&mut s, &mut u, &mut u_inv, i, t, &q);
                }
                if !s.at(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..nc {
                if s.at(t, j).is_zero() {
                    continue;
                }
                let (q, _r) = s.at(t, j).divrem(s.at(t, t));
                if !q.is_zero() {
                    add_col(&mut s, &mut v, &mut v_inv, j, t, &q);
                }
                if !s.at(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue 'pivot;
            }
            for i in (t + 1)..nr {
                for j in (t + 1)..nc {
                    if !s.at(t, t).divides(s.at(i, j)) {
                        add_row(&mut s, &mut u, &mut u_inv, t, i, &PolyF2::one());
                        continue 'pivot;
                    }
                }
            }
            break;
        }
    }
    SnfTheta { u, v, s, u_inv, v_inv }
}

/// Solve m * y = b over F2[theta]; None when inconsistent.
pub fn solve_theta(m: &PolyMatrix, snf: &SnfTheta, b: &[PolyF2]) -> Option<Vec<PolyF2>> {
    let ub = snf.u.apply(b);
    let n = m.nrows.min(m.ncols);
    let mut y = vec![PolyF2::zero(); m.ncols];
    for i in 0..m.nrows {
        let d = if i < n {
            snf.s.at(i, i).clone()
        } else {
            PolyF2::zero()
        };
        if d.is_zero() {
            if !ub[i].is_zero() {
                return None;
            }
        } else {
            let (q, r) = ub[i].divrem(&d);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(snf.v.apply(&y))
}

/// Free, finitely generated cochain complex over F2[theta] with differential
/// d* + theta (1 + sigma)*.
#[derive(Clone, Debug)]
pub struct ThetaComplex {
    pub rank: usize,
    pub delta: PolyMatrix,
    /// The dual of the underlying F2 differential.
    pub dstar: Mat2,
    /// (1 + sigma)* over F2.
    pub one_plus_sigma_star: Mat2,
}

/// Build the equivariant cochain complex from a Floer complex with an
/// involution: RHom over the group ring via the 2-periodic resolution.
pub fn build_theta_complex(c: &FloerComplex) -> Result<ThetaComplex> {
    let n = c.dim();
    let perm = c
        .action
        .as_ref()
        .ok_or_else(|| Error::BadInvolution("theta complex needs an action".into()))?;
    let mut delta = PolyMatrix::zeros(n, n);
    let mut dstar = Mat2::zeros(n, n);
    let mut ops = Mat2::zeros(n, n);
    for r in 0..n {
        for cidx in 0..n {
            let mut p = PolyF2::zero();
            if c.diff.get(r, cidx) {
                p.toggle(0);
                dstar.set(r, cidx, true);
            }
            let mut theta_part = false;
            if r == cidx {
                theta_part = !theta_part;
            }
            if perm[r] == cidx {
                theta_part = !theta_part;
            }
            if theta_part {
                p.toggle(1);
                ops.set(r, cidx, true);
            }
            delta.set(r, cidx, p);
        }
    }
    let t = ThetaComplex {
        rank: n,
        delta,
        dstar,
        one_plus_sigma_star: ops,
    };
    if !t.delta.mul(&t.delta).is_zero() {
        return Err(Error::internal("delta squared is nonzero"));
    }
    if t.delta.mod_theta() != t.dstar {
        return Err(Error::internal(
            "delta mod theta is not the dual differential",
        ));
    }
    Ok(t)
}

/// Classified finitely generated F2[theta]-module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgThetaModule {
    pub free_rank: usize,
    /// Exponents k of the torsion summands F2[theta]/(theta^k), sorted.
    pub torsion: Vec<usize>,
}

impl FgThetaModule {
    /// Dimension of column c of the associated graded by powers of theta.
    pub fn graded_dim(&self, c: usize) -> usize {
        self.free_rank + self.torsion.iter().filter(|&&k| k > c).count()
    }

    /// F2-homology dimension of the theta-truncated complex: the module
    /// tensored down plus its Tor term.
    pub fn truncated_homology_dim(&self, n_trunc: usize) -> usize {
        let free = self.free_rank * n_trunc;
        let tors: usize = self.torsion.iter().map(|&k| 2 * k.min(n_trunc)).sum();
        free + tors
    }
}

/// Cohomology of the theta complex as ker(delta)/im(delta), classified via
/// Smith normal form over the PID F2[theta].
pub fn homology_module(t: &ThetaComplex) -> Result<FgThetaModule> {
    let snf = snf_theta(&t.delta);
    if !snf.verify(&t.delta) {
        return Err(Error::internal("SNF certificate failed"));
    }
    let n = t.rank;
    let nonzero = snf.invariant_factors().len();
    // Kernel: spanned by the columns of V at the zero slots; the kernel
    // coordinates of x are the zero-slot entries of V^{-1} x.
    let zero_slots: Vec<usize> = (nonzero..n).collect();
    let k = zero_slots.len();
    let vinv_delta = snf.v_inv.mul(&t.delta);
    let mut y = PolyMatrix::zeros(k, n);
    for (a, &slot) in zero_slots.iter().enumerate() {
        for j in 0..n {
            y.set(a, j, vinv_delta.at(slot, j).clone());
        }
    }
    let ysnf = snf_theta(&y);
    if !ysnf.verify(&y) {
        return Err(Error::internal("SNF certificate failed on relations"));
    }
    let rels = ysnf.invariant_factors();
    let mut torsion = Vec::new();
    let mut nontrivial_rels = 0usize;
    for f in &rels {
        nontrivial_rels += 1;
        if f.is_one() {
            continue;
        }
        if !f.is_theta_power() {
            return Err(Error::NonThetaTorsion(format!("{}", f)));
        }
        torsion.push(f.theta_valuation().unwrap());
    }
    torsion.sort_unstable();
    Ok(FgThetaModule {
        free_rank: k - nontrivial_rels,
        torsion,
    })
}

/// Localization at theta: torsion dies, the free rank survives.
pub fn localize(m: &FgThetaModule) -> usize {
    m.free_rank
}

/// Whether the class of `cocycle` is nonzero in cohomology, i.e. not in the
/// image of delta. The input must be a cocycle.
pub fn class_is_nonzero(t: &ThetaComplex, snf: &SnfTheta, cocycle: &[PolyF2]) -> Result<bool> {
    let img = t.delta.apply(cocycle);
    if img.iter().any(|p| !p.is_zero()) {
        return Err(Error::internal("class test on a non-cocycle"));
    }
    Ok(solve_theta(&t.delta, snf, cocycle).is_none())
}

/// F2 dimension of the homology of the complex truncated at theta-degree N:
/// the independent oracle that checks `homology_module`.
pub fn truncated_homology_dim(t: &ThetaComplex, n_trunc: usize) -> usize {
    let n = t.rank;
    let big = n * n_trunc;
    let mut m = Mat2::zeros(big, big);
    for r in 0..n {
        for c in 0..n {
            let p = t.delta.at(r, c);
            if p.is_zero() {
                continue;
            }
            for a in 0..n_trunc {
                for b in 0..(n_trunc - a) {
                    if p.coeff(b) {
                        let row = r * n_trunc + (a + b);
                        let col = c * n_trunc + a;
                        let cur = m.get(row, col);
                        m.set(row, col, !cur);
                    }
                }
            }
        }
    }
    let rank = m.rank();
    big - 2 * rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floer::Generator;
    use proptest::prelude::*;

    fn toy_complex(n: usize, diff: &[(usize, usize)], perm: Vec<usize>) -> FloerComplex {
        let mut m = Mat2::zeros(n, n);
        for &(i, j) in diff {
            m.set(i, j, true);
        }
        FloerComplex {
            generators: (0..n).map(|i| Generator::new(vec![i as u32])).collect(),
            diff: m,
            action: Some(perm),
            filtration: None,
            components: vec![0; n],
        }
    }

    #[test]
    fn point_complex_is_free() {
        let c = toy_complex(1, &[], vec![0]);
        let t = build_theta_complex(&c).unwrap();
        let m = homology_module(&t).unwrap();
        assert_eq!(
            m,
            FgThetaModule {
                free_rank: 1,
                torsion: vec![]
            }
        );
        assert_eq!(localize(&m), 1);
        for n in 1..5 {
            assert_eq!(truncated_homology_dim(&t, n), m.truncated_homology_dim(n));
        }
    }

    #[test]
    fn swapped_pair_is_torsion() {
        // Two generators swapped by sigma, zero differential: a free orbit.
        // Its equivariant cohomology is F2 concentrated at theta-degree zero,
        // pure torsion of exponent one; the truncation oracle arbitrates.
        let c = toy_complex(2, &[], vec![1, 0]);
        let t = build_theta_complex(&c).unwrap();
        let m = homology_module(&t).unwrap();
        assert_eq!(
            m,
            FgThetaModule {
                free_rank: 0,
                torsion: vec![1]
            }
        );
        for n in 1..6 {
            assert_eq!(
                truncated_homology_dim(&t, n),
                m.truncated_homology_dim(n),
                "window {}",
                n
            );
        }
        assert_eq!(localize(&m), 0);
    }

    #[test]
    fn trivial_action_gives_free_module() {
        let c = toy_complex(3, &[], vec![0, 1, 2]);
        let t = build_theta_complex(&c).unwrap();
        assert!(t.delta.is_zero());
        let m = homology_module(&t).unwrap();
        assert_eq!(m.free_rank, 3);
        assert!(m.torsion.is_empty());
    }

    #[test]
    fn arrow_cancels() {
        let c = toy_complex(2, &[(0, 1)], vec![0, 1]);
        let t = build_theta_complex(&c).unwrap();
        let m = homology_module(&t).unwrap();
        assert_eq!(m.free_rank, 0);
        assert!(m.torsion.is_empty());
        for n in 1..5 {
            assert_eq!(truncated_homology_dim(&t, n), 0);
        }
    }

    #[test]
    fn mixed_complex_oracle() {
        // Sigma swaps 0,1 and fixes 2,3; zero differential.
        let c = toy_complex(4, &[], vec![1, 0, 2, 3]);
        let t = build_theta_complex(&c).unwrap();
        let m = homology_module(&t).unwrap();
        assert_eq!(m.free_rank, 2);
        assert_eq!(m.torsion, vec![1]);
        for n in 1..6 {
            assert_eq!(truncated_homology_dim(&t, n), m.truncated_homology_dim(n));
        }
    }

    #[test]
    fn snf_example_divisibility() {
        let mut m = PolyMatrix::zeros(2, 2);
        m.set(0, 0, PolyF2::theta_pow(1));
        m.set(1, 1, &PolyF2::theta_pow(2) + &PolyF2::theta_pow(1));
        let snf = snf_theta(&m);
        assert!(snf.verify(&m));
        let f = snf.invariant_factors();
        assert_eq!(f.len(), 2);
        assert!(f[0].divides(&f[1]));
    }

    #[test]
    fn class_membership() {
        // delta = [[theta, theta],[theta, theta]] (swapped pair): the class
        // of (1,1)^* is nonzero mod im but theta*(1,1) is a boundary... the
        // cocycle (1,1): delta(1,1) = (2theta...,) = 0. Its class generates
        // F2[theta]/theta: theta*(1,1) should be in the image.
        let c = toy_complex(2, &[], vec![1, 0]);
        let t = build_theta_complex(&c).unwrap();
        let snf = snf_theta(&t.delta);
        assert!(snf.verify(&t.delta));
        let one_one = vec![PolyF2::one(), PolyF2::one()];
        assert!(class_is_nonzero(&t, &snf, &one_one).unwrap());
        let theta_theta = vec![PolyF2::theta_pow(1), PolyF2::theta_pow(1)];
        assert!(!class_is_nonzero(&t, &snf, &theta_theta).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn snf_certificates_random(rows in 1usize..5, cols in 1usize..5,
                                   entries in prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 25)) {
            let mut m = PolyMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    let bits = &entries[i * cols + j];
                    let mut p = PolyF2::zero();
                    for (k, b) in bits.iter().enumerate() {
                        if *b {
                            p.toggle(k);
                        }
                    }
                    m.set(i, j, p);
                }
            }
            let snf = snf_theta(&m);
            prop_assert!(snf.verify(&m));
        }

        #[test]
        fn solve_theta_roundtrip(n in 1usize..4,
                                 entries in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 16),
                                 xs in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 4)) {
            let mut m = PolyMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let bits = &entries[i * n + j];
                    let mut p = PolyF2::zero();
                    for (k, b) in bits.iter().enumerate() {
                        if *b { p.toggle(k); }
                    }
                    m.set(i, j, p);
                }
            }
            let x: Vec<PolyF2> = (0..n).map(|i| {
                let mut p = PolyF2::zero();
                for (k, b) in xs[i].iter().enumerate() {
                    if *b { p.toggle(k); }
                }
                p
            }).collect();
            let b = m.apply(&x);
            let snf = snf_theta(&m);
            prop_assert!(snf.verify(&m));
            let y = solve_theta(&m, &snf, &b).expect("consistent");
            prop_assert_eq!(m.apply(&y), b);
        }
    }
}
