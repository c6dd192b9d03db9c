//! Domains between Floer generators: the integer solution lattice of the
//! boundary condition, Maslov indices via point and Euler measures, periodic
//! domains, and weak admissibility.

use crate::cell::{CellDiagram, Dart, FId, Side, VId};
use crate::{ratlp, zmat, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A 2-chain of faces, usually connecting a generator x to a generator y.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Domain {
    pub coeffs: BTreeMap<FId, i64>,
}

impl Domain {
    pub fn mult(&self, f: FId) -> i64 {
        *self.coeffs.get(&f).unwrap_or(&0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == 0)
    }

    pub fn add(&self, other: &Domain) -> Domain {
        let mut out = self.clone();
        for (&f, &c) in &other.coeffs {
            *out.coeffs.entry(f).or_insert(0) += c;
        }
        out.coeffs.retain(|_, c| *c != 0);
        out
    }

    pub fn mult_of_mark(&self, d: &CellDiagram, mark: &str) -> Option<i64> {
        d.face_of_mark(mark).map(|f| self.mult(f))
    }
}

/// The linear system of the domain boundary condition on a pure diagram.
/// Rows: one per (vertex, side) pair, then one per pinned face (coefficient
/// forced to zero); columns: faces in sorted order.
struct DomainSystem {
    faces: Vec<FId>,
    mat: zmat::MatZ,
    vertex_rows: Vec<(VId, Side)>,
}

fn require_pure(d: &CellDiagram) -> Result<()> {
    if !d.is_pure() {
        return Err(Error::InvalidDiagram(
            "operation requires a pure alpha/beta diagram (merge arcs first)".into(),
        ));
    }
    Ok(())
}

fn build_system(d: &CellDiagram, pinned: &[FId]) -> DomainSystem {
    let faces: Vec<FId> = d.faces.keys().copied().collect();
    let fidx: HashMap<FId, usize> = faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let locs = d.dart_locations();
    let vertex_rows: Vec<(VId, Side)> = d
        .vertices
        .keys()
        .flat_map(|&v| [(v, Side::A), (v, Side::B)])
        .collect();
    let row_of: HashMap<(VId, Side), usize> = vertex_rows
        .iter()
        .enumerate()
        .map(|(i, &(v, s))| ((v, s), i))
        .collect();
    let mut mat = zmat::MatZ::zeros(vertex_rows.len() + pinned.len(), faces.len());
    for (&e, edge) in &d.edges {
        let Some(side) = edge.family.side() else { continue };
        let left = locs[&Dart::fwd(e)].0;
        let right = locs[&Dart::rev_of(e)].0;
        // jump(e) = c_left - c_right; contributes +jump at head, -jump at tail.
        for (v, sgn) in [(edge.head, 1i64), (edge.tail, -1i64)] {
            let row = row_of[&(v, side)];
            mat.data[row][fidx[&left]] += BigInt::from(sgn);
            mat.data[row][fidx[&right]] -= BigInt::from(sgn);
        }
    }
    for (k, &f) in pinned.iter().enumerate() {
        mat.data[vertex_rows.len() + k][fidx[&f]] = BigInt::from(1);
    }
    DomainSystem {
        faces,
        mat,
        vertex_rows,
    }
}

fn rhs_for(
    sys: &DomainSystem,
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
    pinned_count: usize,
) -> Vec<BigInt> {
    let mut b = vec![BigInt::zero(); sys.vertex_rows.len() + pinned_count];
    for (i, &(v, side)) in sys.vertex_rows.iter().enumerate() {
        let on_x = x.contains(&v) as i64;
        let on_y = y.contains(&v) as i64;
        b[i] = match side {
            Side::A => BigInt::from(on_y - on_x),
            Side::B => BigInt::from(on_x - on_y),
        };
    }
    b
}

/// The faces pinned to zero: every face carrying a mark in `avoid`.
fn pinned_faces(d: &CellDiagram, avoid: &BTreeSet<String>) -> Vec<FId> {
    let mut out: Vec<FId> = avoid.iter().filter_map(|m| d.face_of_mark(m)).collect();
    out.sort();
    out.dedup();
    out
}

/// A factored domain system: the Smith form of the boundary-condition matrix
/// is computed once, so each generator pair costs one substitution.
pub struct PreparedDomains {
    faces: Vec<FId>,
    vertex_rows: Vec<(VId, Side)>,
    pinned: usize,
    snf: zmat::Snf,
    nrows: usize,
    ncols: usize,
}

pub fn prepare_domains(d: &CellDiagram, avoid: &BTreeSet<String>) -> Result<PreparedDomains> {
    require_pure(d)?;
    let pins = pinned_faces(d, avoid);
    let sys = build_system(d, &pins);
    let snf = zmat::smith(&sys.mat);
    Ok(PreparedDomains {
        faces: sys.faces,
        vertex_rows: sys.vertex_rows,
        pinned: pins.len(),
        nrows: sys.mat.nrows,
        ncols: sys.mat.ncols,
        snf,
    })
}

impl PreparedDomains {
    /// Integer domain from x to y, or None.
    pub fn solve(&self, x: &BTreeSet<VId>, y: &BTreeSet<VId>) -> Result<Option<Domain>> {
        use num_traits::ToPrimitive;
        let mut b = vec![BigInt::zero(); self.nrows];
        for (i, &(v, side)) in self.vertex_rows.iter().enumerate() {
            let on_x = x.contains(&v) as i64;
            let on_y = y.contains(&v) as i64;
            b[i] = match side {
                Side::A => BigInt::from(on_y - on_x),
                Side::B => BigInt::from(on_x - on_y),
            };
        }
        let _ = self.pinned;
        // Solve via the prepared factorization.
        let ub = self.snf.u.apply_vec(&b);
        let n = self.nrows.min(self.ncols);
        let mut yv = vec![BigInt::zero(); self.ncols];
        for i in 0..self.nrows {
            let dgn = if i < n {
                self.snf.s.data[i][i].clone()
            } else {
                BigInt::zero()
            };
            if dgn.is_zero() {
                if !ub[i].is_zero() {
                    return Ok(None);
                }
            } else {
                use num_integer::Integer;
                let (q, r) = ub[i].div_rem(&dgn);
                if !r.is_zero() {
                    return Ok(None);
                }
                yv[i] = q;
            }
        }
        let sol = self.snf.v.apply_vec(&yv);
        let mut coeffs = BTreeMap::new();
        for (i, &f) in self.faces.iter().enumerate() {
            let c = sol[i]
                .to_i64()
                .ok_or_else(|| Error::internal("domain coefficient overflow"))?;
            if c != 0 {
                coeffs.insert(f, c);
            }
        }
        Ok(Some(Domain { coeffs }))
    }
}

/// Find an integer domain from x to y avoiding the marked faces, or None
/// when the rational system is infeasible.
pub fn find_domain(
    d: &CellDiagram,
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
    avoid: &BTreeSet<String>,
) -> Result<Option<Domain>> {
    require_pure(d)?;
    for v in x.union(y) {
        if !d.vertices.contains_key(v) {
            return Err(Error::BadGenerator(format!("vertex {} not in diagram", v)));
        }
    }
    let pins = pinned_faces(d, avoid);
    let sys = build_system(d, &pins);
    let b = rhs_for(&sys, x, y, pins.len());
    // Integer solvability is strictly stronger than rational solvability on
    // manifolds with torsion first homology; the connectivity classes are
    // the integral ones.
    let Some(sol) = zmat::solve_integer(&sys.mat, &b) else {
        return Ok(None);
    };
    let mut coeffs = BTreeMap::new();
    for (i, &f) in sys.faces.iter().enumerate() {
        let c = sol[i]
            .to_i64()
            .ok_or_else(|| Error::internal("domain coefficient overflow"))?;
        if c != 0 {
            coeffs.insert(f, c);
        }
    }
    Ok(Some(Domain { coeffs }))
}

/// True iff some integer domain connects x to y.
pub fn connecting_domain_exists(
    d: &CellDiagram,
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
    avoid: &BTreeSet<String>,
) -> Result<bool> {
    require_pure(d)?;
    let pins = pinned_faces(d, avoid);
    let sys = build_system(d, &pins);
    let b = rhs_for(&sys, x, y, pins.len());
    if !zmat::solvable_rational(&sys.mat, &b) {
        return Ok(false);
    }
    Ok(zmat::solve_integer(&sys.mat, &b).is_some())
}

/// Basis of the lattice of periodic domains with vanishing multiplicity at
/// every `avoid`-marked face.
pub fn periodic_domain_basis(d: &CellDiagram, avoid: &BTreeSet<String>) -> Result<Vec<Domain>> {
    require_pure(d)?;
    let pins = pinned_faces(d, avoid);
    let sys = build_system(d, &pins);
    let kernel = zmat::kernel_integer(&sys.mat);
    let mut out = Vec::new();
    for k in kernel {
        let mut coeffs = BTreeMap::new();
        for (i, &f) in sys.faces.iter().enumerate() {
            let c = k[i]
                .to_i64()
                .ok_or_else(|| Error::internal("periodic domain coefficient overflow"))?;
            if c != 0 {
                coeffs.insert(f, c);
            }
        }
        let dom = Domain { coeffs };
        if !dom.is_zero() {
            out.push(dom);
        }
    }
    Ok(out)
}

/// Weak admissibility: no nonzero nonnegative domain in the periodic lattice.
pub fn check_weak_admissibility(d: &CellDiagram, avoid: &BTreeSet<String>) -> Result<bool> {
    let basis = periodic_domain_basis(d, avoid)?;
    if basis.is_empty() {
        return Ok(true);
    }
    let faces: Vec<FId> = d.faces.keys().copied().collect();
    let cols: Vec<Vec<BigInt>> = basis
        .iter()
        .map(|dom| faces.iter().map(|&f| BigInt::from(dom.mult(f))).collect())
        .collect();
    Ok(!ratlp::has_nonneg_combination(&cols))
}

/// For each vertex, the faces owning its rotation sectors, in rotation order.
pub fn sector_faces(d: &CellDiagram) -> Result<BTreeMap<VId, Vec<FId>>> {
    let rotations = d.rotations()?;
    let locs = d.dart_locations();
    // The sector between rotation-consecutive out-darts r and succ(r) is the
    // corner entered along rev(r) and left along succ(r); it lies in the face
    // containing the dart succ(r).
    let mut out = BTreeMap::new();
    for (&v, rot) in &rotations {
        let mut sectors = Vec::with_capacity(rot.len());
        for i in 0..rot.len() {
            let nxt = rot[(i + 1) % rot.len()];
            sectors.push(locs[&nxt].0);
        }
        out.insert(v, sectors);
    }
    Ok(out)
}

/// Point measure: the average of the sector multiplicities at a vertex.
fn point_measure(dom: &Domain, sectors: &[FId]) -> BigRational {
    let sum: i64 = sectors.iter().map(|&f| dom.mult(f)).sum();
    BigRational::new(BigInt::from(sum), BigInt::from(sectors.len() as i64))
}

/// Maslov index mu(D) = n_x(D) + n_y(D) + e(D) with the combinatorial Euler
/// measure e(face) = 1 - corners/4 per unit multiplicity.
pub fn maslov_index(
    d: &CellDiagram,
    dom: &Domain,
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
) -> Result<i64> {
    require_pure(d)?;
    let sectors = sector_faces(d)?;
    let mut mu = BigRational::zero();
    for (&f, face) in &d.faces {
        let c = dom.mult(f);
        if c == 0 {
            continue;
        }
        mu += BigRational::new(
            BigInt::from(c) * BigInt::from(4 - face.walk.len() as i64),
            BigInt::from(4),
        );
    }
    for p in x.iter().chain(y.iter()) {
        let secs = sectors
            .get(p)
            .ok_or_else(|| Error::BadGenerator(format!("vertex {} missing", p)))?;
        if secs.len() != 4 {
            return Err(Error::InvalidDiagram(format!(
                "point measure needs a degree-4 crossing at {}",
                p
            )));
        }
        mu += point_measure(dom, secs);
    }
    if *mu.denom() != BigInt::from(1) {
        return Err(Error::internal(format!(
            "non-integral Maslov index {} (domain does not connect x to y)",
            mu
        )));
    }
    let _ = mu.numer().abs();
    mu.numer()
        .to_i64()
        .ok_or_else(|| Error::internal("Maslov index overflow"))
}

/// A periodic domain has full-curve boundary when the jump across every edge
/// of a given curve is one constant.
pub fn has_full_curve_boundary(d: &CellDiagram, dom: &Domain) -> bool {
    let locs = d.dart_locations();
    let mut per_curve: BTreeMap<u32, BTreeSet<i64>> = BTreeMap::new();
    for (&e, edge) in &d.edges {
        let left = locs[&Dart::fwd(e)].0;
        let right = locs[&Dart::rev_of(e)].0;
        let jump = dom.mult(left) - dom.mult(right);
        per_curve.entry(edge.curve).or_default().insert(jump);
    }
    per_curve.values().all(|jumps| jumps.len() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn set(vs: &[VId]) -> BTreeSet<VId> {
        vs.iter().copied().collect()
    }

    fn avoid_z() -> BTreeSet<String> {
        ["z".to_string()].into_iter().collect()
    }

    #[test]
    fn zero_domain_for_equal_generators() {
        let d = catalog::genus1_unknot();
        let x = set(&[0]);
        let dom = find_domain(&d, &x, &x, &avoid_z()).unwrap().unwrap();
        assert!(dom.is_zero());
        assert_eq!(maslov_index(&d, &dom, &x, &x).unwrap(), 0);
    }

    #[test]
    fn trefoil_bigon_maslov_one() {
        let d = catalog::genus1_trefoil();
        let x = set(&[0]);
        let y = set(&[1]);
        let mut bigon = Domain::default();
        bigon.coeffs.insert(0, 1); // face 0 = the z-marked bigon [(a1,+),(q,-)]
        assert_eq!(maslov_index(&d, &bigon, &x, &y).unwrap(), 1);
    }

    #[test]
    fn octagon_maslov() {
        // The empty octagon has e = 1 - 8/4 = -1; its corners visit each
        // vertex at some sectors. A sanity check that the measure is exact.
        let d = catalog::genus1_trefoil();
        let mut oct = Domain::default();
        oct.coeffs.insert(2, 1);
        // Octagon corners: every vertex appears; compute mu for x = y = all
        // three? Not a legal generator pair, but point measures still apply:
        // use x = {2}, y = {2}: mu = 2 * n_{v3} - 1, integral only if sector
        // count works out; just assert the call errors or returns an integer.
        let x = set(&[2]);
        let r = maslov_index(&d, &oct, &x, &x);
        match r {
            Ok(_) => {}
            Err(Error::Internal(_)) => {}
            Err(e) => panic!("unexpected error {:?}", e),
        }
    }

    #[test]
    fn find_domain_matches_bruteforce_on_trefoil() {
        let d = catalog::genus1_trefoil();
        let x = set(&[0]);
        let y = set(&[1]);
        let avoid = avoid_z();
        let dom = find_domain(&d, &x, &y, &avoid).unwrap();
        let faces: Vec<FId> = d.faces.keys().copied().collect();
        let zf = d.face_of_mark("z").unwrap();
        let pins = vec![zf];
        let sys = build_system(&d, &pins);
        let b = rhs_for(&sys, &x, &y, 1);
        let mut found = None;
        let nf = faces.len();
        let mut counter = vec![-3i64; nf];
        'outer: loop {
            let cand: Vec<BigInt> = counter.iter().map(|&c| BigInt::from(c)).collect();
            if sys.mat.apply_vec(&cand) == b {
                found = Some(counter.clone());
                break;
            }
            for i in 0..nf {
                counter[i] += 1;
                if counter[i] <= 3 {
                    continue 'outer;
                }
                counter[i] = -3;
            }
            break;
        }
        match (dom, found) {
            (Some(_), Some(_)) => {}
            (None, None) => {}
            (a, b) => panic!("solver and brute force disagree: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn unknot_periodic_empty_and_admissible() {
        let d = catalog::genus1_unknot();
        let basis = periodic_domain_basis(&d, &avoid_z()).unwrap();
        assert!(basis.is_empty());
        assert!(check_weak_admissibility(&d, &avoid_z()).unwrap());
    }

    #[test]
    fn periodic_domains_have_full_curve_boundary() {
        let d = catalog::genus1_trefoil();
        // Without pins the fundamental class spans the lattice.
        let basis = periodic_domain_basis(&d, &BTreeSet::new()).unwrap();
        assert_eq!(basis.len(), 1);
        for dom in &basis {
            assert!(has_full_curve_boundary(&d, dom));
            assert_eq!(dom.mult_of_mark(&d, "z"), dom.mult_of_mark(&d, "w"));
        }
        assert!(periodic_domain_basis(&d, &avoid_z()).unwrap().is_empty());
    }

    #[test]
    fn lens_diagram_admissible() {
        let d = catalog::torus_curve_diagram(1, 2, 0, None).unwrap();
        let basis = periodic_domain_basis(&d, &avoid_z()).unwrap();
        assert!(basis.is_empty());
        let full = periodic_domain_basis(&d, &BTreeSet::new()).unwrap();
        assert_eq!(full.len(), 1);
        assert!(has_full_curve_boundary(&d, &full[0]));
        assert!(check_weak_admissibility(&d, &avoid_z()).unwrap());
        // Without pinning any face, the fundamental class is a positive
        // periodic domain, so the unpinned check must fail.
        assert!(!check_weak_admissibility(&d, &BTreeSet::new()).unwrap());
    }
}
