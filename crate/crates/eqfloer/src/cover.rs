//! Branched double covers of cell diagrams with their deck involutions.
//!
//! The sheet structure is a crossing cochain t on edges ("crossing this edge
//! swaps sheets"): two copies of each face are glued across each edge straight
//! or swapped according to t. The constraints pin the class of the covering:
//! vertex link sums equal the branch indicator, and every alpha/beta curve
//! has trivial pushoff holonomy so that it lifts to a pair of circles.

use crate::cell::{BasepointLoc, CellDiagram, CId, Dart, EId, FId, Family, VId, VertexKind};
use crate::gf2::{self, BitVec, Mat2};
use crate::moves;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// The F2 sheet-swap labels on the edges of the covered diagram.
#[derive(Clone, Debug)]
pub struct SheetLabeling {
    pub t: BTreeMap<EId, bool>,
    /// Dimension of the solution kernel and of the face-flip gauge group;
    /// equal exactly when the covering class is unique.
    pub kernel_dim: usize,
    pub gauge_dim: usize,
}

impl SheetLabeling {
    pub fn swaps(&self, e: EId) -> bool {
        *self.t.get(&e).unwrap_or(&false)
    }

    /// Flip the labels across the boundary of a face (a gauge move).
    pub fn flip_face(&mut self, d: &CellDiagram, f: FId) {
        let mut count: BTreeMap<EId, usize> = BTreeMap::new();
        for dart in &d.faces[&f].walk {
            *count.entry(dart.edge).or_default() += 1;
        }
        for (e, c) in count {
            if c % 2 == 1 {
                let v = self.t.entry(e).or_insert(false);
                *v = !*v;
            }
        }
    }
}

/// Cone every listed face mark: the mark becomes a branch vertex joined to
/// each corner of its face by auxiliary edges, triangulating the face.
pub fn cone_branch_marks(d: &CellDiagram, marks: &[String]) -> Result<CellDiagram> {
    let mut out = d.clone();
    let mut seen_faces: BTreeMap<FId, String> = BTreeMap::new();
    for m in marks {
        let f = out
            .face_of_mark(m)
            .ok_or_else(|| Error::InvalidDiagram(format!("mark '{}' is not a face mark", m)))?;
        if let Some(other) = seen_faces.insert(f, m.clone()) {
            return Err(Error::InvalidDiagram(format!(
                "two branch marks '{}' and '{}' in one face",
                other, m
            )));
        }
    }
    for m in marks {
        let f = out.face_of_mark(m).unwrap();
        let face = out.faces[&f].clone();
        if face.marks.len() > 1 {
            return Err(Error::InvalidDiagram(format!(
                "face {} carries extra marks besides '{}'",
                f, m
            )));
        }
        let v = out.fresh_vertex(VertexKind::Branch);
        let k = face.walk.len();
        let spokes: Vec<EId> = (0..k)
            .map(|i| {
                let corner = out.dart_tail(face.walk[i]);
                let c = out.fresh_curve();
                out.fresh_edge(v, corner, Family::Aux, c)
            })
            .collect();
        out.faces.remove(&f);
        for i in 0..k {
            let j = (i + 1) % k;
            out.fresh_face(vec![
                Dart::fwd(spokes[i]),
                face.walk[i],
                Dart::rev_of(spokes[j]),
            ]);
        }
        out.basepoints.insert(m.clone(), BasepointLoc::Vertex(v));
    }
    Ok(out)
}

/// Solve the sheet-swap constraint system for a branched double cover over
/// the given branch vertices.
pub fn solve_branch_cocycle(d: &CellDiagram, branch: &BTreeSet<VId>) -> Result<SheetLabeling> {
    if branch.len() % 2 != 0 {
        return Err(Error::CoverInfeasible(format!(
            "odd branch set of size {}",
            branch.len()
        )));
    }
    let edges: Vec<EId> = d.edges.keys().copied().collect();
    let eidx: HashMap<EId, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let rotations = d.rotations()?;
    let mut rows: Vec<BitVec> = Vec::new();
    let mut rhs: Vec<bool> = Vec::new();

    // (A) vertex links: sum of incident t = branch indicator (loops cancel).
    for (&v, rot) in &rotations {
        let mut row = BitVec::zeros(edges.len());
        for dart in rot {
            let i = eidx[&dart.edge];
            row.set(i, !row.get(i));
        }
        rows.push(row);
        rhs.push(branch.contains(&v));
    }

    // (B) pushoff holonomy of each closed alpha/beta curve vanishes.
    for (c, curve_edges) in d.curve_edges() {
        let fam = d.edges[&curve_edges[0]].family;
        if !fam.is_closed_curve() {
            continue;
        }
        let passages = trace_closed_curve(d, c)?;
        let mut row = BitVec::zeros(edges.len());
        for (d_in, d_out) in &passages {
            let v = d.dart_tail(*d_out);
            let rot = &rotations[&v];
            let n = rot.len();
            let i_out = rot.iter().position(|x| x == d_out).unwrap();
            let i_back = rot.iter().position(|x| *x == d_in.rev()).unwrap();
            // Left side: out-darts strictly ccw-between d_out and rev(d_in).
            let mut k = (i_out + 1) % n;
            while k != i_back {
                let i = eidx[&rot[k].edge];
                row.set(i, !row.get(i));
                k = (k + 1) % n;
            }
        }
        rows.push(row);
        rhs.push(false);
    }

    let mat = Mat2 {
        rows: rows.clone(),
        cols: edges.len(),
    };
    let mut b = BitVec::zeros(rows.len());
    for (i, &v) in rhs.iter().enumerate() {
        if v {
            b.set(i, true);
        }
    }
    let sol = gf2::solve(&mat, &b).ok_or_else(|| {
        Error::CoverInfeasible("no sheet labeling satisfies the constraints".into())
    })?;
    let kernel = gf2::kernel(&mat);

    // Gauge group: face flips.
    let mut gauge = gf2::Echelon::new();
    for face in d.faces.values() {
        let mut row = BitVec::zeros(edges.len());
        let mut count: BTreeMap<EId, usize> = BTreeMap::new();
        for dart in &face.walk {
            *count.entry(dart.edge).or_default() += 1;
        }
        for (e, c) in count {
            if c % 2 == 1 {
                row.set(eidx[&e], true);
            }
        }
        gauge.insert(row);
    }
    for g in &gauge.basis {
        if !mat.apply(g).is_zero() {
            return Err(Error::internal(
                "face-flip gauge does not preserve the cocycle constraints",
            ));
        }
    }
    let kernel_dim = kernel.len();
    let gauge_dim = gauge.dim();
    if kernel_dim != gauge_dim {
        return Err(Error::CoverAmbiguous {
            kernel_dim,
            gauge_dim,
        });
    }
    let mut t = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        t.insert(e, sol.get(i));
    }
    Ok(SheetLabeling {
        t,
        kernel_dim,
        gauge_dim,
    })
}

/// The passages (incoming dart, outgoing dart) of a closed curve, vertex by
/// vertex around the cycle.
fn trace_closed_curve(d: &CellDiagram, c: CId) -> Result<Vec<(Dart, Dart)>> {
    let edges: Vec<EId> = d
        .edges
        .iter()
        .filter(|(_, e)| e.curve == c)
        .map(|(&e, _)| e)
        .collect();
    let mut at_vertex: BTreeMap<VId, Vec<Dart>> = BTreeMap::new();
    for &e in &edges {
        let ed = &d.edges[&e];
        at_vertex.entry(ed.tail).or_default().push(Dart::fwd(e));
        at_vertex.entry(ed.head).or_default().push(Dart::rev_of(e));
    }
    for (v, ds) in &at_vertex {
        if ds.len() != 2 {
            return Err(Error::InvalidDiagram(format!(
                "curve {} does not pass vertex {} exactly twice",
                c, v
            )));
        }
    }
    let mut passages = Vec::new();
    let start = Dart::fwd(edges[0]);
    let mut cur = start;
    loop {
        let v = d.dart_head(cur);
        let outs = &at_vertex[&v];
        let d_out = if outs[0] == cur.rev() { outs[1] } else { outs[0] };
        passages.push((cur, d_out));
        cur = d_out;
        if cur == start {
            break;
        }
        if passages.len() > edges.len() + 1 {
            return Err(Error::InvalidDiagram(format!("curve {} does not close", c)));
        }
    }
    Ok(passages)
}

/// Deck involution of a diagram, stored on darts (so orientation reversal is
/// representable), with derived vertex and face maps.
#[derive(Clone, Debug)]
pub struct Involution {
    pub dart_map: BTreeMap<Dart, Dart>,
    pub vertex_map: BTreeMap<VId, VId>,
    pub face_map: BTreeMap<FId, FId>,
}

impl Involution {
    pub fn edge_image(&self, e: EId) -> EId {
        self.dart_map[&Dart::fwd(e)].edge
    }

    pub fn fixed_vertices(&self) -> BTreeSet<VId> {
        self.vertex_map
            .iter()
            .filter(|(a, b)| a == b)
            .map(|(&a, _)| a)
            .collect()
    }
}

/// A branched double cover together with its involution and bookkeeping.
#[derive(Clone, Debug)]
pub struct InvolutiveDiagram {
    pub diagram: CellDiagram,
    pub sigma: Involution,
    /// The pointed base diagram actually covered (input with arcs merged
    /// away for bridge inputs, the input itself otherwise).
    pub base_pointed: CellDiagram,
    /// Face-level projection for marked faces of the cover.
    pub face_projection: BTreeMap<FId, FId>,
    pub branch_names: Vec<String>,
    /// Surviving lifts of each base vertex (1 for branch points, 2 for the
    /// rest; entries drop out when cleanup smooths the lift away).
    pub vertex_lifts: BTreeMap<VId, Vec<VId>>,
}

/// Extend a seed dart pair to a full automorphism using the walk structure:
/// sigma(next(d)) = next(sigma(d)) and sigma(rev(d)) = rev(sigma(d)).
pub fn reconstruct_involution(
    d: &CellDiagram,
    seed_from: Dart,
    seed_to: Dart,
) -> Result<Involution> {
    let locs = d.dart_locations();
    let next = |dart: Dart| -> Dart {
        let (f, i) = locs[&dart];
        let w = &d.faces[&f].walk;
        w[(i + 1) % w.len()]
    };
    let mut map: BTreeMap<Dart, Dart> = BTreeMap::new();
    let mut queue = vec![(seed_from, seed_to)];
    while let Some((a, b)) = queue.pop() {
        if let Some(&prev) = map.get(&a) {
            if prev != b {
                return Err(Error::BadInvolution(format!(
                    "inconsistent propagation at {:?}",
                    a
                )));
            }
            continue;
        }
        map.insert(a, b);
        queue.push((a.rev(), b.rev()));
        queue.push((next(a), next(b)));
    }
    if map.len() != 2 * d.edges.len() {
        return Err(Error::BadInvolution(format!(
            "propagation reached {} of {} darts",
            map.len(),
            2 * d.edges.len()
        )));
    }
    for (a, b) in &map {
        if map[b] != *a {
            return Err(Error::BadInvolution("map is not an involution".into()));
        }
    }
    let mut vertex_map = BTreeMap::new();
    for (&a, &b) in &map {
        vertex_map.insert(d.dart_tail(a), d.dart_tail(b));
    }
    let mut face_map = BTreeMap::new();
    for (&a, &b) in &map {
        face_map.insert(locs[&a].0, locs[&b].0);
    }
    Ok(Involution {
        dart_map: map,
        vertex_map,
        face_map,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverMode {
    /// Cover of a knot diagram over its basepoint marks; both marks survive
    /// as face marks upstairs (the B(H) construction).
    KnotDouble,
    /// Cover of an extended bridge diagram over all bridge points; arcs lift
    /// to curves except the two arcs through the distinguished basepoint.
    BridgeDouble,
}

/// Build the branched double cover of `d` over the named branch cells.
pub fn branched_double_cover(
    d: &CellDiagram,
    branch_names: &[String],
    mode: CoverMode,
) -> Result<InvolutiveDiagram> {
    d.require_valid().map_err(|e| match e {
        Error::Validation(v) => Error::InvalidDiagram(format!("cover input invalid: {:?}", v)),
        other => other,
    })?;
    if branch_names.len() % 2 != 0 {
        return Err(Error::CoverInfeasible(format!(
            "odd branch set of size {}",
            branch_names.len()
        )));
    }
    let face_marks: Vec<String> = branch_names
        .iter()
        .filter(|m| d.face_of_mark(m).is_some())
        .cloned()
        .collect();
    let coned = cone_branch_marks(d, &face_marks)?;
    let mut branch_vertices: BTreeSet<VId> = BTreeSet::new();
    for m in branch_names {
        let v = coned
            .vertex_of_mark(m)
            .ok_or_else(|| Error::InvalidDiagram(format!("branch name '{}' unresolved", m)))?;
        branch_vertices.insert(v);
    }
    for (&v, &k) in &coned.vertices {
        if k == VertexKind::Branch && !branch_vertices.contains(&v) {
            return Err(Error::InvalidDiagram(format!(
                "branch vertex {} is not in the branch set",
                v
            )));
        }
    }
    let labeling = solve_branch_cocycle(&coned, &branch_vertices)?;
    build_cover_from_labeling(d, &coned, &labeling, &branch_vertices, branch_names, mode)
}

/// Assemble the cover for a given labeling (exposed so tests can compare
/// gauge-equivalent labelings).
pub fn build_cover_from_labeling(
    base_input: &CellDiagram,
    coned: &CellDiagram,
    labeling: &SheetLabeling,
    branch_vertices: &BTreeSet<VId>,
    branch_names: &[String],
    mode: CoverMode,
) -> Result<InvolutiveDiagram> {
    // --- Raw cover -----------------------------------------------------
    let mut cover = CellDiagram::new();
    let mut edge_copy: BTreeMap<(EId, usize), EId> = BTreeMap::new();
    let mut sym_walks: Vec<((FId, usize), Vec<(EId, usize, bool)>)> = Vec::new();
    for (&f, face) in &coned.faces {
        for s in 0..2usize {
            let mut w = Vec::new();
            for dart in &face.walk {
                let copy = if dart.fwd {
                    s
                } else {
                    s ^ labeling.swaps(dart.edge) as usize
                };
                w.push((dart.edge, copy, dart.fwd));
            }
            sym_walks.push(((f, s), w));
        }
    }
    // Vertex classes: unify head(D_i) with tail(D_{i+1}).
    type EndKey = (EId, usize, u8);
    let mut uf: BTreeMap<EndKey, EndKey> = BTreeMap::new();
    let keys: Vec<EndKey> = coned
        .edges
        .keys()
        .flat_map(|&e| (0..2usize).flat_map(move |c| [(e, c, 0u8), (e, c, 1u8)]))
        .collect();
    for k in &keys {
        uf.insert(*k, *k);
    }
    fn find(uf: &mut BTreeMap<EndKey, EndKey>, k: EndKey) -> EndKey {
        let p = uf[&k];
        if p == k {
            k
        } else {
            let r = find(uf, p);
            uf.insert(k, r);
            r
        }
    }
    for (_, w) in &sym_walks {
        let n = w.len();
        for i in 0..n {
            let (e1, c1, f1) = w[i];
            let (e2, c2, f2) = w[(i + 1) % n];
            let head1 = (e1, c1, if f1 { 1u8 } else { 0u8 });
            let tail2 = (e2, c2, if f2 { 0u8 } else { 1u8 });
            let (r1, r2) = (find(&mut uf, head1), find(&mut uf, tail2));
            if r1 != r2 {
                uf.insert(r1, r2);
            }
        }
    }
    let mut class_vertex: BTreeMap<EndKey, VId> = BTreeMap::new();
    let mut class_base: BTreeMap<EndKey, VId> = BTreeMap::new();
    let mut base_lifts: BTreeMap<VId, BTreeSet<EndKey>> = BTreeMap::new();
    for k in keys.clone() {
        let r = find(&mut uf, k);
        let ed = &coned.edges[&k.0];
        let base_v = if k.2 == 0 { ed.tail } else { ed.head };
        if let Some(&prev) = class_base.get(&r) {
            if prev != base_v {
                return Err(Error::internal("cover vertex class mixes base vertices"));
            }
        } else {
            class_base.insert(r, base_v);
        }
        base_lifts.entry(base_v).or_default().insert(r);
    }
    for (&v, classes) in &base_lifts {
        let expected = if branch_vertices.contains(&v) { 1 } else { 2 };
        if classes.len() != expected {
            return Err(Error::CoverInfeasible(format!(
                "base vertex {} lifted to {} points (expected {})",
                v,
                classes.len(),
                expected
            )));
        }
    }
    let mut vertex_lifts: BTreeMap<VId, Vec<VId>> = BTreeMap::new();
    for (&r, &bv) in &class_base {
        let kind = coned.vertices[&bv];
        let id = cover.fresh_vertex(kind);
        class_vertex.insert(r, id);
        vertex_lifts.entry(bv).or_default().push(id);
    }
    for (&e, ed) in &coned.edges {
        for c in 0..2usize {
            let t = class_vertex[&find(&mut uf, (e, c, 0))];
            let h = class_vertex[&find(&mut uf, (e, c, 1))];
            let id = cover.fresh_edge(t, h, ed.family, 0);
            edge_copy.insert((e, c), id);
        }
    }
    for ((_f, _s), w) in &sym_walks {
        let walk: Vec<Dart> = w
            .iter()
            .map(|&(e, c, fwd)| Dart {
                edge: edge_copy[&(e, c)],
                fwd,
            })
            .collect();
        cover.fresh_face(walk);
    }
    assign_lifted_curves(&mut cover, coned, &edge_copy)?;
    for m in branch_names {
        let bv = coned.vertex_of_mark(m).unwrap();
        let class = *base_lifts[&bv].iter().next().unwrap();
        let cv = class_vertex[&class];
        cover.basepoints.insert(m.clone(), BasepointLoc::Vertex(cv));
    }
    cover.distinguished = base_input.distinguished.clone();
    cover.name = base_input.name.as_ref().map(|n| format!("{}~double", n));

    let raw_sigma: BTreeMap<EId, EId> = edge_copy
        .iter()
        .map(|(&(e, c), &id)| (id, edge_copy[&(e, 1 - c)]))
        .collect();

    // --- Post-processing -------------------------------------------------
    let mut dead: BTreeSet<EId> = BTreeSet::new();
    for (&(e, _c), &id) in &edge_copy {
        if coned.edges[&e].family == Family::Aux {
            dead.insert(id);
        }
    }
    if mode == CoverMode::BridgeDouble {
        let zname = &base_input.distinguished;
        let zv = coned.vertex_of_mark(zname).ok_or_else(|| {
            Error::InvalidDiagram("bridge cover needs a vertex basepoint".into())
        })?;
        let z_curves: BTreeSet<CId> = coned
            .edges
            .values()
            .filter(|x| x.family.is_arc() && (x.tail == zv || x.head == zv))
            .map(|x| x.curve)
            .collect();
        for (&e, ed) in &coned.edges {
            if ed.family.is_arc() && z_curves.contains(&ed.curve) {
                dead.insert(edge_copy[&(e, 0)]);
                dead.insert(edge_copy[&(e, 1)]);
            }
        }
    }
    let mut renames = moves::delete_edges(&mut cover, &dead)?;
    if mode == CoverMode::BridgeDouble {
        // The surviving bridge points are ordinary cells of the cover now;
        // only face marks (the relocated basepoint) stay named.
        let stale: Vec<String> = cover
            .basepoints
            .iter()
            .filter(|(name, loc)| {
                **name != cover.distinguished && matches!(loc, BasepointLoc::Vertex(_))
            })
            .map(|(n, _)| n.clone())
            .collect();
        for n in stale {
            cover.basepoints.remove(&n);
        }
        for ed in cover.edges.values_mut() {
            ed.family = match ed.family {
                Family::ArcA => Family::Alpha,
                Family::ArcB => Family::Beta,
                f => f,
            };
        }
        let vs: Vec<VId> = cover.vertices.keys().copied().collect();
        for v in vs {
            if cover.vertices.get(&v) != Some(&VertexKind::Branch) {
                continue;
            }
            let degree: usize = cover
                .edges
                .values()
                .map(|e| (e.tail == v) as usize + (e.head == v) as usize)
                .sum();
            match degree {
                4 => {
                    cover.vertices.insert(v, VertexKind::Crossing);
                }
                2 => {
                    // Only one arc survived through this branch point; it is
                    // a plain point of the lifted curve now.
                    let ends: Vec<EId> = cover
                        .edges
                        .iter()
                        .filter(|(_, ed)| ed.tail == v || ed.head == v)
                        .map(|(&e, _)| e)
                        .collect();
                    if ends.len() == 2 && ends[0] != ends[1] {
                        let merged = moves::smooth_vertex(&mut cover, v)?;
                        for tgt in renames.values_mut() {
                            if *tgt == ends[0] || *tgt == ends[1] {
                                *tgt = merged;
                            }
                        }
                        renames.insert(ends[0], merged);
                        renames.insert(ends[1], merged);
                    } else {
                        cover.vertices.insert(v, VertexKind::Auxiliary);
                    }
                }
                n => {
                    return Err(Error::internal(format!(
                        "lifted branch vertex {} has degree {}",
                        v, n
                    )));
                }
            }
        }
    }
    cover.sync_counters();
    cover.require_valid()?;

    // Seed the involution from any raw pair, transported through renames.
    let mut sigma = None;
    for (&a, &b) in &raw_sigma {
        let (Some(&a2), Some(&b2)) = (renames.get(&a), renames.get(&b)) else {
            continue;
        };
        if !cover.edges.contains_key(&a2) || !cover.edges.contains_key(&b2) {
            continue;
        }
        // Orientation through merges is not tracked; try both. A deck
        // transformation of a double cover fixes no dart, which rules out
        // spurious identity seeds when a sigma-pair merged into one edge.
        let free = |s: &Involution| s.dart_map.iter().all(|(x, y)| x != y);
        if a2 != b2 {
            if let Ok(s) = reconstruct_involution(&cover, Dart::fwd(a2), Dart::fwd(b2)) {
                if free(&s) {
                    sigma = Some(s);
                    break;
                }
            }
        }
        if let Ok(s) = reconstruct_involution(&cover, Dart::fwd(a2), Dart::rev_of(b2)) {
            if free(&s) {
                sigma = Some(s);
                break;
            }
        }
    }
    let sigma =
        sigma.ok_or_else(|| Error::internal("no surviving edge pair seeds the involution"))?;

    let base_pointed = match mode {
        CoverMode::KnotDouble => base_input.clone(),
        CoverMode::BridgeDouble => moves::merge_arc_faces(base_input)
            .unwrap_or_else(|_| base_input.clone()),
    };
    let face_projection = project_faces(&cover, &base_pointed);
    // Keep only lifts that survived the cleanup.
    for lifts in vertex_lifts.values_mut() {
        lifts.retain(|v| cover.vertices.contains_key(v));
    }
    vertex_lifts.retain(|_, lifts| !lifts.is_empty());

    Ok(InvolutiveDiagram {
        diagram: cover,
        sigma,
        base_pointed,
        face_projection,
        branch_names: branch_names.to_vec(),
        vertex_lifts,
    })
}

fn assign_lifted_curves(
    cover: &mut CellDiagram,
    coned: &CellDiagram,
    edge_copy: &BTreeMap<(EId, usize), EId>,
) -> Result<()> {
    let mut next_curve = 0u32;
    for (_base_curve, base_edges) in coned.curve_edges() {
        let lifted: Vec<EId> = base_edges
            .iter()
            .flat_map(|&e| [edge_copy[&(e, 0)], edge_copy[&(e, 1)]])
            .collect();
        let mut comp: BTreeMap<EId, usize> = BTreeMap::new();
        let mut by_vertex: BTreeMap<VId, Vec<EId>> = BTreeMap::new();
        for &e in &lifted {
            let ed = &cover.edges[&e];
            by_vertex.entry(ed.tail).or_default().push(e);
            by_vertex.entry(ed.head).or_default().push(e);
        }
        let mut n_comp = 0usize;
        for &e in &lifted {
            if comp.contains_key(&e) {
                continue;
            }
            let id = n_comp;
            n_comp += 1;
            let mut stack = vec![e];
            while let Some(x) = stack.pop() {
                if comp.contains_key(&x) {
                    continue;
                }
                comp.insert(x, id);
                let ed = &cover.edges[&x];
                for v in [ed.tail, ed.head] {
                    for &y in &by_vertex[&v] {
                        if !comp.contains_key(&y) {
                            stack.push(y);
                        }
                    }
                }
            }
        }
        let ids: Vec<u32> = (0..n_comp)
            .map(|_| {
                let id = next_curve;
                next_curve += 1;
                id
            })
            .collect();
        for &e in &lifted {
            cover.edges.get_mut(&e).unwrap().curve = ids[comp[&e]];
        }
    }
    cover.sync_counters();
    Ok(())
}

/// Face projection for marked faces: both diagrams carry the same basepoint
/// names, and pulled-back domains are only evaluated at marks.
fn project_faces(cover: &CellDiagram, base_pointed: &CellDiagram) -> BTreeMap<FId, FId> {
    let mut out = BTreeMap::new();
    for (name, loc) in &cover.basepoints {
        if let BasepointLoc::Face(f) = loc {
            if let Some(bf) = base_pointed.face_of_mark(name) {
                out.insert(*f, bf);
            }
        }
    }
    out
}

/// Report from `verify_involution`.
#[derive(Clone, Debug, Default)]
pub struct InvolutionReport {
    pub violations: Vec<String>,
}

impl InvolutionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check sigma^2 = id, family and kind preservation, the fixed-cell census,
/// and the Riemann-Hurwitz count against the covered base.
pub fn verify_involution(inv: &InvolutiveDiagram) -> InvolutionReport {
    let mut rep = InvolutionReport::default();
    let d = &inv.diagram;
    let s = &inv.sigma;
    for (a, b) in &s.dart_map {
        if s.dart_map.get(b) != Some(a) {
            rep.violations.push(format!("sigma^2 != id at dart {:?}", a));
        }
        let (ea, eb) = (&d.edges[&a.edge], &d.edges[&b.edge]);
        if ea.family != eb.family {
            rep.violations
                .push(format!("sigma changes family at edge {}", a.edge));
        }
        if a == b {
            rep.violations
                .push(format!("edge {} fixed pointwise", a.edge));
        }
    }
    for (v, w) in &s.vertex_map {
        if d.vertices.get(v) != d.vertices.get(w) {
            rep.violations
                .push(format!("sigma changes vertex kind at {}", v));
        }
    }
    for (&f, &g) in &s.face_map {
        if f == g {
            let has_mark = d.faces[&f]
                .marks
                .iter()
                .any(|m| inv.branch_names.contains(m));
            let touches_fixed = d.faces[&f]
                .walk
                .iter()
                .any(|dart| s.vertex_map[&d.dart_tail(*dart)] == d.dart_tail(*dart));
            if !has_mark && !touches_fixed {
                rep.violations
                    .push(format!("face {} fixed without a fixed point", f));
            }
        }
    }
    let chi_cover = d.euler_characteristic();
    let chi_base = inv.base_pointed.euler_characteristic();
    let branch = inv.branch_names.len() as i64;
    if chi_cover != 2 * chi_base - branch {
        rep.violations.push(format!(
            "Riemann-Hurwitz failed: chi_cover {} != 2*{} - {}",
            chi_cover, chi_base, branch
        ));
    }
    for (f, bf) in &inv.face_projection {
        let g = s.face_map[f];
        if let Some(bg) = inv.face_projection.get(&g) {
            if bg != bf {
                rep.violations
                    .push(format!("projection not sigma-invariant at face {}", f));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn one_bridge_sphere() -> CellDiagram {
        let mut d = CellDiagram::new();
        let p = d.fresh_vertex(VertexKind::Branch);
        let q = d.fresh_vertex(VertexKind::Branch);
        let ca = d.fresh_curve();
        let cb = d.fresh_curve();
        let a = d.fresh_edge(p, q, Family::ArcA, ca);
        let b = d.fresh_edge(p, q, Family::ArcB, cb);
        d.fresh_face(vec![Dart::fwd(a), Dart::rev_of(b)]);
        d.fresh_face(vec![Dart::fwd(b), Dart::rev_of(a)]);
        d.basepoints.insert("z".into(), BasepointLoc::Vertex(p));
        d.basepoints.insert("p1".into(), BasepointLoc::Vertex(q));
        d.distinguished = "z".into();
        d
    }

    #[test]
    fn two_point_sphere_cocycle() {
        let d = one_bridge_sphere();
        d.require_valid().unwrap();
        let branch: BTreeSet<VId> = [0, 1].into_iter().collect();
        let lab = solve_branch_cocycle(&d, &branch).unwrap();
        // Link sum at each vertex: t(a) + t(b) = 1.
        assert!(lab.swaps(0) != lab.swaps(1));
        assert_eq!(lab.kernel_dim, lab.gauge_dim);
    }

    #[test]
    fn exhaustive_cocycle_oracle_small() {
        // All labelings on the one-bridge sphere; the solver must pick one
        // of the valid set {t(a)+t(b)=1}.
        let d = one_bridge_sphere();
        let branch: BTreeSet<VId> = [0, 1].into_iter().collect();
        let mut good = Vec::new();
        for bits in 0..4u32 {
            let ta = bits & 1 == 1;
            let tb = bits & 2 == 2;
            if ta ^ tb {
                good.push((ta, tb));
            }
        }
        assert_eq!(good.len(), 2);
        let lab = solve_branch_cocycle(&d, &branch).unwrap();
        assert!(good.contains(&(lab.swaps(0), lab.swaps(1))));
    }

    #[test]
    fn odd_branch_rejected() {
        let d = catalog::genus1_unknot();
        let err = branched_double_cover(&d, &["z".into()], CoverMode::KnotDouble);
        assert!(matches!(err, Err(Error::CoverInfeasible(_))));
    }

    #[test]
    fn trefoil_knot_double_cover() {
        let d = catalog::genus1_trefoil();
        let inv =
            branched_double_cover(&d, &["z".into(), "w".into()], CoverMode::KnotDouble).unwrap();
        let rep = verify_involution(&inv);
        assert!(rep.ok(), "{:?}", rep.violations);
        let c = &inv.diagram;
        c.require_valid().unwrap();
        assert_eq!(c.euler_characteristic(), -2, "genus 2 cover");
        assert_eq!(c.vertices.len(), 6);
        assert_eq!(c.curves_of_family(Family::Alpha).len(), 2);
        assert_eq!(c.curves_of_family(Family::Beta).len(), 2);
        assert!(c.face_of_mark("z").is_some());
        assert!(c.face_of_mark("w").is_some());
    }

    #[test]
    fn bridge_cover_of_unknot_is_one_crossing_torus() {
        let d = catalog::pillowcase_bridge_diagram(1).unwrap();
        let names: Vec<String> = vec!["z".into(), "p1".into(), "p2".into(), "p4".into()];
        let inv = branched_double_cover(&d, &names, CoverMode::BridgeDouble).unwrap();
        let rep = verify_involution(&inv);
        assert!(rep.ok(), "{:?}", rep.violations);
        let c = &inv.diagram;
        assert_eq!(c.euler_characteristic(), 0, "torus");
        assert_eq!(c.curves_of_family(Family::Alpha).len(), 1);
        assert_eq!(c.curves_of_family(Family::Beta).len(), 1);
        assert_eq!(
            c.vertices
                .values()
                .filter(|k| **k == VertexKind::Crossing)
                .count(),
            1
        );
        assert!(c.face_of_mark("z").is_some());
    }

    #[test]
    fn bridge_cover_of_trefoil_is_lens_diagram() {
        let d = catalog::pillowcase_bridge_diagram(3).unwrap();
        let names: Vec<String> = vec!["z".into(), "p1".into(), "p2".into(), "p4".into()];
        let inv = branched_double_cover(&d, &names, CoverMode::BridgeDouble).unwrap();
        let rep = verify_involution(&inv);
        assert!(rep.ok(), "{:?}", rep.violations);
        let c = &inv.diagram;
        assert_eq!(c.euler_characteristic(), 0, "torus");
        assert_eq!(c.vertices.len(), 3, "three crossings for L(3,1)");
    }

    #[test]
    fn gauge_equivalent_labelings_give_isomorphic_covers() {
        let d = catalog::genus1_trefoil();
        let face_marks = vec!["z".to_string(), "w".to_string()];
        let coned = cone_branch_marks(&d, &face_marks).unwrap();
        let branch: BTreeSet<VId> = face_marks
            .iter()
            .map(|m| coned.vertex_of_mark(m).unwrap())
            .collect();
        let lab = solve_branch_cocycle(&coned, &branch).unwrap();
        let mut lab2 = lab.clone();
        let some_face = *coned.faces.keys().next().unwrap();
        lab2.flip_face(&coned, some_face);
        let names = vec!["z".to_string(), "w".to_string()];
        let c1 = build_cover_from_labeling(&d, &coned, &lab, &branch, &names, CoverMode::KnotDouble)
            .unwrap();
        let c2 =
            build_cover_from_labeling(&d, &coned, &lab2, &branch, &names, CoverMode::KnotDouble)
                .unwrap();
        assert!(c1.diagram.isomorphic(&c2.diagram));
    }

    #[test]
    fn cover_admissibility_lifts() {
        use std::collections::BTreeSet as S;
        let d = catalog::genus1_trefoil();
        let avoid: S<String> = ["z".to_string()].into_iter().collect();
        assert!(crate::domain::check_weak_admissibility(&d, &avoid).unwrap());
        let inv =
            branched_double_cover(&d, &["z".into(), "w".into()], CoverMode::KnotDouble).unwrap();
        assert!(crate::domain::check_weak_admissibility(&inv.diagram, &avoid).unwrap());
    }

    #[test]
    fn cone_rejects_shared_face() {
        let d = catalog::genus1_unknot();
        let err = cone_branch_marks(&d, &["z".into(), "w".into()]);
        assert!(matches!(err, Err(Error::InvalidDiagram(_))));
    }
}
