//! Dense linear algebra over GF(2) with bit-packed rows.

/// A row vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    pub words: Vec<u64>,
    pub len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_in(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn leading(&self) -> Option<usize> {
        for (i, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, w) in self.words.iter().enumerate() {
            let mut bits = *w;
            while bits != 0 {
                out.push(i * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "{}", s)
    }
}

/// A matrix over F2, stored as rows.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Mat2 {
    pub rows: Vec<BitVec>,
    pub cols: usize,
}

impl Mat2 {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat2 {
            rows: vec![BitVec::zeros(ncols); nrows],
            cols: ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat2::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v);
    }

    pub fn transpose(&self) -> Mat2 {
        let mut t = Mat2::zeros(self.cols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        assert_eq!(self.cols, other.nrows());
        let mut out = Mat2::zeros(self.nrows(), other.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                let dst = &mut out.rows[r];
                dst.xor_in(&other.rows[c]);
            }
        }
        out
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.nrows(), other.nrows());
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            out.rows[r].xor_in(row);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }

    /// Apply to a column vector (length = cols), returning length-nrows vector.
    pub fn apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = 0u64;
            for (a, b) in row.words.iter().zip(v.words.iter()) {
                acc ^= a & b;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        Echelon::from_rows(self.rows.iter().cloned()).basis.len()
    }
}

impl std::fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{:?}", row)?;
        }
        Ok(())
    }
}

/// Row-echelon basis of a subspace of F2^n, supporting membership tests,
/// sums and intersections. Basis rows have distinct leading columns.
#[derive(Clone, Default)]
pub struct Echelon {
    pub basis: Vec<BitVec>, // sorted by leading column
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { basis: Vec::new() }
    }

    pub fn from_rows(rows: impl IntoIterator<Item = BitVec>) -> Self {
        let mut e = Echelon::new();
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Reduce v against the basis; returns the residue.
    pub fn reduce(&self, mut v: BitVec) -> BitVec {
        for b in &self.basis {
            let lead = b.leading().unwrap();
            if v.get(lead) {
                v.xor_in(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    /// Insert v; returns true if it enlarged the span.
    pub fn insert(&mut self, v: BitVec) -> bool {
        let r = self.reduce(v);
        match r.leading() {
            None => false,
            Some(lead) => {
                let pos = self
                    .basis
                    .binary_search_by_key(&lead, |b| b.leading().unwrap())
                    .unwrap_err();
                self.basis.insert(pos, r);
                true
            }
        }
    }

    pub fn sum(&self, other: &Echelon) -> Echelon {
        let mut e = self.clone();
        for b in &other.basis {
            e.insert(b.clone());
        }
        e
    }

    /// Intersection via the kernel trick on stacked coordinates.
    pub fn intersect(&self, other: &Echelon, n: usize) -> Echelon {
        // Solve: x in span(A) and x in span(B). Write x = sum a_i A_i; require
        // reduce_B(x) = 0. Set up matrix over the a-coefficients.
        let rows: Vec<BitVec> = self.basis.clone();
        if rows.is_empty() || other.basis.is_empty() {
            return Echelon::new();
        }
        // For each combination coefficient vector c (len = rows.len()), the
        // combination sum c_i rows_i must reduce to zero against other.
        // Build matrix M: columns = residue coordinates, rows = generators.
        let mut gens: Vec<(BitVec, BitVec)> = Vec::new(); // (coeffs, vector)
        for (i, r) in rows.iter().enumerate() {
            let mut c = BitVec::zeros(rows.len());
            c.set(i, true);
            gens.push((c, r.clone()));
        }
        // Gaussian eliminate on the residues of the vectors against `other`;
        // combinations with zero residue span the intersection.
        let mut resid: Vec<(BitVec, BitVec)> = gens
            .into_iter()
            .map(|(c, v)| (c, other.reduce(v)))
            .collect();
        let mut out = Echelon::new();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (col, index in resid)
        for i in 0..resid.len() {
            loop {
                let lead = match resid[i].1.leading() {
                    None => break,
                    Some(l) => l,
                };
                if let Some(&(_, j)) = pivots.iter().find(|&&(c, _)| c == lead) {
                    let (rj, ri) = if j < i {
                        let (a, b) = resid.split_at_mut(i);
                        (&a[j], &mut b[0])
                    } else {
                        unreachable!()
                    };
                    let rj_c = rj.0.clone();
                    let rj_v = rj.1.clone();
                    ri.0.xor_in(&rj_c);
                    ri.1.xor_in(&rj_v);
                } else {
                    pivots.push((lead, i));
                    break;
                }
            }
            if resid[i].1.is_zero() {
                // Rebuild the actual vector from coefficients.
                let mut v = BitVec::zeros(n);
                for k in resid[i].0.ones() {
                    v.xor_in(&rows[k]);
                }
                out.insert(v);
            }
        }
        out
    }
}

/// Solve M x = b over F2 (M given by rows, x a column vector of length
/// M.cols). Returns one solution or None.
pub fn solve(m: &Mat2, b: &BitVec) -> Option<BitVec> {
    let nr = m.nrows();
    let nc = m.cols;
    // Augmented elimination.
    let mut rows: Vec<(BitVec, bool)> = (0..nr).map(|r| (m.rows[r].clone(), b.get(r))).collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nc];
    let mut next = 0usize;
    for c in 0..nc {
        let mut piv = None;
        for r in next..rows.len() {
            if rows[r].0.get(c) {
                piv = Some(r);
                break;
            }
        }
        let Some(p) = piv else { continue };
        rows.swap(next, p);
        let (head, tail) = rows.split_at_mut(next + 1);
        let prow = &head[next];
        for row in tail.iter_mut() {
            if row.0.get(c) {
                let pv = prow.0.clone();
                row.0.xor_in(&pv);
                row.1 ^= prow.1;
            }
        }
        pivot_of_col[c] = Some(next);
        next += 1;
    }
    // Check consistency.
    for r in &rows[next..] {
        if r.1 {
            return None;
        }
    }
    // Back-substitute.
    let mut x = BitVec::zeros(nc);
    for c in (0..nc).rev() {
        if let Some(r) = pivot_of_col[c] {
            let mut val = rows[r].1;
            for c2 in rows[r].0.ones() {
                if c2 > c {
                    val ^= x.get(c2);
                }
            }
            x.set(c, val);
        }
    }
    Some(x)
}

/// Basis of the kernel (right null space) of M.
pub fn kernel(m: &Mat2) -> Vec<BitVec> {
    let nc = m.cols;
    let mut rows: Vec<BitVec> = m.rows.clone();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut next = 0usize;
    for c in 0..nc {
        let mut piv = None;
        for r in next..rows.len() {
            if rows[r].get(c) {
                piv = Some(r);
                break;
            }
        }
        let Some(p) = piv else { continue };
        rows.swap(next, p);
        let (head, tail) = rows.split_at_mut(next + 1);
        let prow = head[next].clone();
        for row in tail.iter_mut() {
            if row.get(c) {
                row.xor_in(&prow);
            }
        }
        pivot_cols.push(c);
        next += 1;
    }
    // Reduce upwards for reduced echelon form.
    for i in (0..next).rev() {
        let c = pivot_cols[i];
        let prow = rows[i].clone();
        for j in 0..i {
            if rows[j].get(c) {
                rows[j].xor_in(&prow);
            }
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
    let mut out = Vec::new();
    for free in 0..nc {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = BitVec::zeros(nc);
        v.set(free, true);
        for (i, &pc) in pivot_cols.iter().enumerate() {
            if rows[i].get(free) {
                v.set(pc, true);
            }
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_mat(max_r: usize, max_c: usize) -> impl Strategy<Value = Mat2> {
        (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(any::<bool>(), c), r).prop_map(
                move |bits| {
                    let mut m = Mat2::zeros(r, c);
                    for (i, row) in bits.iter().enumerate() {
                        for (j, b) in row.iter().enumerate() {
                            m.set(i, j, *b);
                        }
                    }
                    m
                },
            )
        })
    }

    proptest! {
        #[test]
        fn kernel_is_kernel(m in arb_mat(8, 10)) {
            let ker = kernel(&m);
            for v in &ker {
                prop_assert!(m.apply(v).is_zero());
            }
            // rank-nullity
            prop_assert_eq!(ker.len() + m.rank(), m.cols);
        }

        #[test]
        fn solve_solves(m in arb_mat(8, 10), xs in prop::collection::vec(any::<bool>(), 10)) {
            let mut x = BitVec::zeros(m.cols);
            for (i, b) in xs.iter().take(m.cols).enumerate() {
                x.set(i, *b);
            }
            let b = m.apply(&x);
            let sol = solve(&m, &b).expect("consistent by construction");
            prop_assert_eq!(m.apply(&sol), b);
        }
    }

    #[test]
    fn echelon_intersection() {
        // span{e0+e1, e2} intersect span{e0+e1+e2} hmm: choose spaces with a
        // known intersection: A = span{e0, e1}, B = span{e1, e2}: meet = e1.
        let n = 3;
        let mut a = Echelon::new();
        let mut e0 = BitVec::zeros(n);
        e0.set(0, true);
        let mut e1 = BitVec::zeros(n);
        e1.set(1, true);
        let mut e2 = BitVec::zeros(n);
        e2.set(2, true);
        a.insert(e0.clone());
        a.insert(e1.clone());
        let mut b = Echelon::new();
        b.insert(e1.clone());
        b.insert(e2.clone());
        let meet = a.intersect(&b, n);
        assert_eq!(meet.dim(), 1);
        assert!(meet.contains(&e1));
    }
}
