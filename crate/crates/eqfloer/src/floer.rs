//! Floer generators, the combinatorial differential on nice diagrams, F2
//! homology, and the Alexander filtration.

use crate::cell::{CellDiagram, CId, Dart, FId, VId};
use crate::cover::Involution;
use crate::domain::{self, Domain};
use crate::gf2::Mat2;
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A complete matching: one crossing for every alpha and every beta curve.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    verts: Vec<VId>, // sorted
}

impl Generator {
    pub fn new(mut verts: Vec<VId>) -> Self {
        verts.sort_unstable();
        Generator { verts }
    }

    pub fn vertices(&self) -> &[VId] {
        &self.verts
    }

    pub fn vertex_set(&self) -> BTreeSet<VId> {
        self.verts.iter().copied().collect()
    }

    pub fn contains(&self, v: VId) -> bool {
        self.verts.binary_search(&v).is_ok()
    }

    /// Replace old vertices by new ones (for differentials and the action).
    pub fn swap(&self, remove: &[VId], add: &[VId]) -> Generator {
        let mut verts: Vec<VId> = self
            .verts
            .iter()
            .copied()
            .filter(|v| !remove.contains(v))
            .collect();
        verts.extend_from_slice(add);
        Generator::new(verts)
    }
}

/// All complete matchings of a pure diagram, in deterministic order.
pub fn enumerate_generators(d: &CellDiagram) -> Result<Vec<Generator>> {
    if !d.is_pure() {
        return Err(Error::InvalidDiagram(
            "generator enumeration requires a pure diagram".into(),
        ));
    }
    let alphas: Vec<CId> = d.curves_of_family(crate::cell::Family::Alpha).into_iter().collect();
    let betas: Vec<CId> = d.curves_of_family(crate::cell::Family::Beta).into_iter().collect();
    if alphas.len() != betas.len() {
        return Err(Error::BadGenerator(format!(
            "curve counts differ: {} alphas vs {} betas",
            alphas.len(),
            betas.len()
        )));
    }
    // Crossing census: vertex -> (alpha curve, beta curve).
    let mut on_alpha: BTreeMap<VId, CId> = BTreeMap::new();
    let mut on_beta: BTreeMap<VId, CId> = BTreeMap::new();
    for edge in d.edges.values() {
        for v in [edge.tail, edge.head] {
            match edge.family {
                crate::cell::Family::Alpha => {
                    on_alpha.insert(v, edge.curve);
                }
                crate::cell::Family::Beta => {
                    on_beta.insert(v, edge.curve);
                }
                _ => {}
            }
        }
    }
    let beta_index: HashMap<CId, usize> = betas.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    // Crossings per alpha curve, sorted.
    let per_alpha: Vec<Vec<(VId, usize)>> = alphas
        .iter()
        .map(|&a| {
            let mut vs: Vec<(VId, usize)> = on_alpha
                .iter()
                .filter(|(v, &c)| c == a && on_beta.contains_key(v))
                .map(|(&v, _)| (v, beta_index[&on_beta[&v]]))
                .collect();
            vs.sort_unstable();
            vs
        })
        .collect();
    let n = alphas.len();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current: Vec<VId> = Vec::with_capacity(n);
    fn backtrack(
        i: usize,
        n: usize,
        per_alpha: &[Vec<(VId, usize)>],
        used: &mut [bool],
        current: &mut Vec<VId>,
        out: &mut Vec<Generator>,
    ) {
        if i == n {
            out.push(Generator::new(current.clone()));
            return;
        }
        for &(v, b) in &per_alpha[i] {
            if !used[b] {
                used[b] = true;
                current.push(v);
                backtrack(i + 1, n, per_alpha, used, current, out);
                current.pop();
                used[b] = false;
            }
        }
    }
    backtrack(0, n, &per_alpha, &mut used, &mut current, &mut out);
    out.sort();
    Ok(out)
}

/// The permanent of the alpha-beta crossing-count matrix; equals the number
/// of generators. Exposed for cross-checks.
pub fn generator_count_permanent(d: &CellDiagram) -> Result<u64> {
    let alphas: Vec<CId> = d.curves_of_family(crate::cell::Family::Alpha).into_iter().collect();
    let betas: Vec<CId> = d.curves_of_family(crate::cell::Family::Beta).into_iter().collect();
    if alphas.len() != betas.len() {
        return Err(Error::BadGenerator("curve counts differ".into()));
    }
    let mut on_alpha: BTreeMap<VId, CId> = BTreeMap::new();
    let mut on_beta: BTreeMap<VId, CId> = BTreeMap::new();
    for edge in d.edges.values() {
        for v in [edge.tail, edge.head] {
            match edge.family {
                crate::cell::Family::Alpha => {
                    on_alpha.insert(v, edge.curve);
                }
                crate::cell::Family::Beta => {
                    on_beta.insert(v, edge.curve);
                }
                _ => {}
            }
        }
    }
    let n = alphas.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (&v, &a) in &on_alpha {
        if let Some(&b) = on_beta.get(&v) {
            let i = alphas.iter().position(|&c| c == a).unwrap();
            let j = betas.iter().position(|&c| c == b).unwrap();
            counts[i][j] += 1;
        }
    }
    // Ryser-free naive permanent over permutations (n is small here).
    fn perm(counts: &[Vec<u64>], used: &mut [bool], row: usize) -> u64 {
        let n = counts.len();
        if row == n {
            return 1;
        }
        let mut total = 0;
        for j in 0..n {
            if !used[j] && counts[row][j] != 0 {
                used[j] = true;
                total += counts[row][j] * perm(counts, used, row + 1);
                used[j] = false;
            }
        }
        total
    }
    let mut used = vec![false; n];
    Ok(perm(&counts, &mut used, 0))
}

/// The combinatorial differential of a nice diagram: an arrow x -> y for
/// every positive Maslov-index-one domain avoiding the marked faces. On a
/// nice diagram these are exactly the empty embedded bigons and squares
/// (which may span several elementary faces), so the count is the honest
/// holomorphic disk count. Row i of the result encodes d(x_i).
pub fn nice_differential(
    d: &CellDiagram,
    generators: &[Generator],
    avoid: &BTreeSet<String>,
) -> Result<Mat2> {
    let rep = d.check_niceness(avoid);
    if !rep.nice {
        return Err(Error::NotNice(rep.bad_faces));
    }
    let prepared = domain::prepare_domains(d, avoid)?;
    let lattice = domain::periodic_domain_basis(d, avoid)?;
    let n = generators.len();
    let sets: Vec<BTreeSet<VId>> = generators.iter().map(|g| g.vertex_set()).collect();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in 0..n {
                if i == j {
                    continue;
                }
                let Ok(Some(dom)) = prepared.solve(&sets[i], &sets[j]) else {
                    continue;
                };
                let count =
                    count_positive_index_one(d, &dom, &lattice, &sets[i], &sets[j]).unwrap_or(0);
                if count % 2 == 1 {
                    row.push(j);
                }
            }
            row
        })
        .collect();
    let mut m = Mat2::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row {
            m.set(i, j, true);
        }
    }
    // d^2 = 0, asserted rather than assumed.
    if !m.mul(&m).is_zero() {
        return Err(Error::internal("differential does not square to zero"));
    }
    Ok(m)
}

/// Number of positive index-one domains in the translate class of `dom`
/// under the periodic lattice. The lattice is trivial on rational homology
/// sphere covers; otherwise a bounded search covers the (finite, by weak
/// admissibility) positive cone, with a defect error if the bound is hit.
fn count_positive_index_one(
    d: &CellDiagram,
    dom: &Domain,
    lattice: &[Domain],
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
) -> Result<usize> {
    let is_counted = |cand: &Domain| -> Result<bool> {
        if cand.is_zero() || cand.coeffs.values().any(|&c| c < 0) {
            return Ok(false);
        }
        Ok(domain::maslov_index(d, cand, x, y)? == 1)
    };
    if lattice.is_empty() {
        return Ok(is_counted(dom)? as usize);
    }
    const BOUND: i64 = 6;
    let k = lattice.len();
    let mut count = 0usize;
    let mut lambda = vec![-BOUND; k];
    loop {
        let mut cand = dom.clone();
        for (i, p) in lattice.iter().enumerate() {
            for (&f, &c) in &p.coeffs {
                *cand.coeffs.entry(f).or_insert(0) += lambda[i] * c;
            }
        }
        cand.coeffs.retain(|_, c| *c != 0);
        if is_counted(&cand)? {
            if lambda.iter().any(|&l| l.abs() == BOUND) {
                return Err(Error::internal(
                    "positive domain found at the lattice search bound",
                ));
            }
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(count);
            }
            lambda[i] += 1;
            if lambda[i] <= BOUND {
                break;
            }
            lambda[i] = -BOUND;
            i += 1;
        }
    }
}

/// A Floer complex over F2 with optional involution and filtration.
#[derive(Clone, Debug)]
pub struct FloerComplex {
    pub generators: Vec<Generator>,
    /// Row i encodes d(x_i).
    pub diff: Mat2,
    pub action: Option<Vec<usize>>,
    pub filtration: Option<Vec<i64>>,
    pub components: Vec<usize>,
}

impl FloerComplex {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }
}

/// Build the complex of a nice diagram: differential avoiding `avoid`,
/// connectivity components, the sigma-action when an involution is given,
/// and the relative Alexander filtration when both marks are present.
pub fn build_complex(
    d: &CellDiagram,
    avoid: &BTreeSet<String>,
    involution: Option<&Involution>,
    filtration_marks: Option<(&str, &str)>,
) -> Result<FloerComplex> {
    let generators = enumerate_generators(d)?;
    if generators.is_empty() {
        return Err(Error::BadGenerator("diagram has no generators".into()));
    }
    let diff = nice_differential(d, &generators, avoid)?;

    // Connectivity: domains avoiding the distinguished basepoint.
    let dist_avoid: BTreeSet<String> = [d.distinguished.clone()].into_iter().collect();
    let n = generators.len();
    let mut comp: Vec<usize> = vec![usize::MAX; n];
    let mut next_comp = 0usize;
    for i in 0..n {
        if comp[i] != usize::MAX {
            continue;
        }
        let id = next_comp;
        next_comp += 1;
        comp[i] = id;
        let xi = generators[i].vertex_set();
        for (j, comp_j) in comp.iter_mut().enumerate().skip(i + 1) {
            if *comp_j != usize::MAX {
                continue;
            }
            let xj = generators[j].vertex_set();
            if domain::connecting_domain_exists(d, &xi, &xj, &dist_avoid)? {
                *comp_j = id;
            }
        }
    }

    // Differential stays within components.
    for i in 0..n {
        for j in diff.rows[i].ones() {
            if comp[i] != comp[j] {
                return Err(Error::internal(
                    "differential connects different components",
                ));
            }
        }
    }

    let action = match involution {
        None => None,
        Some(s) => {
            let gen_index: HashMap<&Generator, usize> =
                generators.iter().enumerate().map(|(i, g)| (g, i)).collect();
            let mut perm = Vec::with_capacity(n);
            for g in &generators {
                let img =
                    Generator::new(g.vertices().iter().map(|v| s.vertex_map[v]).collect());
                let j = *gen_index.get(&img).ok_or_else(|| {
                    Error::BadInvolution("sigma image is not a generator".into())
                })?;
                perm.push(j);
            }
            // sigma d = d sigma
            for i in 0..n {
                for j in 0..n {
                    if diff.get(i, j) != diff.get(perm[i], perm[j]) {
                        return Err(Error::BadInvolution(
                            "action does not commute with the differential".into(),
                        ));
                    }
                }
            }
            Some(perm)
        }
    };

    let filtration = match filtration_marks {
        None => None,
        Some((zm, wm)) => {
            if d.face_of_mark(zm).is_none() || d.face_of_mark(wm).is_none() {
                return Err(Error::InvalidDiagram(
                    "filtration needs both basepoint marks".into(),
                ));
            }
            Some(alexander_filtration(
                d, &generators, &comp, action.as_deref(), zm, wm,
            )?)
        }
    };

    Ok(FloerComplex {
        generators,
        diff,
        action,
        filtration,
        components: comp,
    })
}

/// Relative Alexander level of y against x: n_z(D) - n_w(D) over a
/// connecting domain, or None when no domain exists. Independent of the
/// domain choice whenever every periodic domain has equal z and w
/// multiplicities (checked).
pub fn relative_alexander(
    d: &CellDiagram,
    x: &BTreeSet<VId>,
    y: &BTreeSet<VId>,
    zm: &str,
    wm: &str,
) -> Result<Option<i64>> {
    let none: BTreeSet<String> = BTreeSet::new();
    for p in domain::periodic_domain_basis(d, &none)? {
        let nz = p.mult_of_mark(d, zm).unwrap_or(0);
        let nw = p.mult_of_mark(d, wm).unwrap_or(0);
        if nz != nw {
            return Err(Error::internal(
                "periodic domain separates the basepoints; relative level undefined",
            ));
        }
    }
    match domain::find_domain(d, x, y, &none)? {
        None => Ok(None),
        Some(dom) => {
            let nz = dom.mult_of_mark(d, zm).unwrap_or(0);
            let nw = dom.mult_of_mark(d, wm).unwrap_or(0);
            Ok(Some(nz - nw))
        }
    }
}

fn alexander_filtration(
    d: &CellDiagram,
    generators: &[Generator],
    components: &[usize],
    action: Option<&[usize]>,
    zm: &str,
    wm: &str,
) -> Result<Vec<i64>> {
    let n = generators.len();
    let n_comp = components.iter().copied().max().map_or(0, |m| m + 1);
    // Representative: first generator of each component.
    let mut rep = vec![usize::MAX; n_comp];
    for (i, &c) in components.iter().enumerate() {
        if rep[c] == usize::MAX {
            rep[c] = i;
        }
    }
    let mut level = vec![0i64; n];
    for i in 0..n {
        let r = rep[components[i]];
        if i == r {
            continue;
        }
        // A(x) - A(rep) = n_w(D) - n_z(D) for D from x to rep, so that the
        // differential (n_z = 0, n_w >= 0) never raises the level.
        let xs = generators[i].vertex_set();
        let rs = generators[r].vertex_set();
        let rel = relative_alexander(d, &xs, &rs, zm, wm)?
            .ok_or_else(|| Error::internal("component members must be connected"))?;
        level[i] = -rel;
    }
    // The action must preserve levels; re-pin sigma-paired components.
    if let Some(perm) = action {
        let mut shift = vec![0i64; n_comp];
        let mut seen = vec![false; n_comp];
        for c in 0..n_comp {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let r = rep[c];
            let c2 = components[perm[r]];
            if !seen[c2] {
                // align A(sigma rep) with A(rep) = 0
                shift[c2] = -level[perm[r]];
                seen[c2] = true;
            }
        }
        for i in 0..n {
            level[i] += shift[components[i]];
        }
        for i in 0..n {
            if level[perm[i]] != level[i] {
                return Err(Error::internal("action does not preserve the filtration"));
            }
        }
    }
    Ok(level)
}

/// Homology dimensions of a complex over F2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyDims {
    pub total: usize,
    pub per_component: BTreeMap<usize, usize>,
    /// Dimensions of the homology of the level-preserving part, per level
    /// (meaningful when the whole differential preserves levels).
    pub per_level: Option<BTreeMap<i64, usize>>,
}

pub fn homology_f2(c: &FloerComplex) -> HomologyDims {
    let n = c.dim();
    let rank = c.diff.rank();
    let total = n - 2 * rank;
    let n_comp = c.components.iter().copied().max().map_or(0, |m| m + 1);
    let mut per_component = BTreeMap::new();
    for comp in 0..n_comp {
        let idx: Vec<usize> = (0..n).filter(|&i| c.components[i] == comp).collect();
        let mut m = Mat2::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                if c.diff.get(i, j) {
                    m.set(a, b, true);
                }
            }
        }
        let r = m.rank();
        per_component.insert(comp, idx.len() - 2 * r);
    }
    let per_level = c.filtration.as_ref().map(|lev| {
        let levels: BTreeSet<i64> = lev.iter().copied().collect();
        let mut out = BTreeMap::new();
        for &l in &levels {
            let idx: Vec<usize> = (0..n).filter(|&i| lev[i] == l).collect();
            let mut m = Mat2::zeros(idx.len(), idx.len());
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    if c.diff.get(i, j) && lev[i] == lev[j] {
                        m.set(a, b, true);
                    }
                }
            }
            let r = m.rank();
            out.insert(l, idx.len() - 2 * r);
        }
        out
    });
    HomologyDims {
        total,
        per_component,
        per_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cover::{branched_double_cover, CoverMode};

    fn avoid(ms: &[&str]) -> BTreeSet<String> {
        ms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unknot_single_generator() {
        let d = catalog::genus1_unknot();
        let gens = enumerate_generators(&d).unwrap();
        assert_eq!(gens.len(), 1);
        assert_eq!(generator_count_permanent(&d).unwrap(), 1);
        let c = build_complex(&d, &avoid(&["z", "w"]), None, None).unwrap();
        assert!(c.diff.is_zero());
        assert_eq!(homology_f2(&c).total, 1);
    }

    #[test]
    fn trefoil_generators_and_nonniceness() {
        let d = catalog::genus1_trefoil();
        let gens = enumerate_generators(&d).unwrap();
        assert_eq!(gens.len(), 3);
        assert_eq!(generator_count_permanent(&d).unwrap(), 3);
        // The empty octagon makes the raw diagram non-nice; the pipeline
        // nicifies it first. Alexander data works already.
        assert!(matches!(
            build_complex(&d, &avoid(&["z", "w"]), None, None),
            Err(Error::NotNice(_))
        ));
        let a = gens[0].vertex_set();
        let b = gens[1].vertex_set();
        let r = relative_alexander(&d, &a, &b, "z", "w").unwrap().unwrap();
        assert_eq!(r.abs(), 1, "adjacent generators differ by one level");
    }

    #[test]
    fn trefoil_bridge_cover_homology_is_three() {
        // H_d of the two-bridge trefoil presents L(3,1): HF-hat rank 3.
        let d = catalog::pillowcase_bridge_diagram(3).unwrap();
        let names: Vec<String> = vec!["z".into(), "p1".into(), "p2".into(), "p4".into()];
        let inv = branched_double_cover(&d, &names, CoverMode::BridgeDouble).unwrap();
        let gens = enumerate_generators(&inv.diagram).unwrap();
        assert_eq!(gens.len(), 3);
        let c = build_complex(&inv.diagram, &avoid(&["z"]), Some(&inv.sigma), None).unwrap();
        assert_eq!(homology_f2(&c).total, 3);
        // One generator at the fixed branch crossing; the other two swapped.
        let perm = c.action.unwrap();
        let fixed = perm.iter().enumerate().filter(|(i, &j)| *i == j).count();
        assert_eq!(fixed, 1);
        for (i, &j) in perm.iter().enumerate() {
            assert_eq!(perm[j], i);
        }
    }

    #[test]
    fn relative_alexander_antisymmetry() {
        let d = catalog::genus1_trefoil();
        let gens = enumerate_generators(&d).unwrap();
        let a = gens[0].vertex_set();
        let b = gens[2].vertex_set();
        let ab = relative_alexander(&d, &a, &b, "z", "w").unwrap().unwrap();
        let ba = relative_alexander(&d, &b, &a, "z", "w").unwrap().unwrap();
        assert_eq!(ab, -ba);
        let aa = relative_alexander(&d, &a, &a, "z", "w").unwrap().unwrap();
        assert_eq!(aa, 0);
    }

    #[test]
    fn lens_space_homology() {
        // L(q,1) line diagram: q generators, zero differential, HF = q.
        for q in [2u32, 3, 5] {
            let d = catalog::torus_curve_diagram(1, q, 0, None).unwrap();
            let c = build_complex(&d, &avoid(&["z"]), None, None).unwrap();
            assert_eq!(c.dim(), q as usize);
            assert_eq!(homology_f2(&c).total, q as usize);
        }
    }
}
