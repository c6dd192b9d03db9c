//! Combinatorial closed oriented surfaces with curve and arc systems.
//!
//! A diagram is a cell complex encoded by face boundary walks with the
//! "face on the left" convention: every directed edge occurrence appears in
//! exactly one face walk, and each edge is traversed once forwards and once
//! backwards across all walks. Vertex rotations, genus, and all topological
//! queries are derived from the walks; there is no geometric embedding.

use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

pub type VId = u32;
pub type EId = u32;
pub type FId = u32;
pub type CId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Crossing,
    Branch,
    Auxiliary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Alpha,
    Beta,
    ArcA,
    ArcB,
    Aux,
}

/// Which handlebody side a family belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Family {
    pub fn side(self) -> Option<Side> {
        match self {
            Family::Alpha | Family::ArcA => Some(Side::A),
            Family::Beta | Family::ArcB => Some(Side::B),
            Family::Aux => None,
        }
    }

    pub fn is_closed_curve(self) -> bool {
        matches!(self, Family::Alpha | Family::Beta)
    }

    pub fn is_arc(self) -> bool {
        matches!(self, Family::ArcA | Family::ArcB)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: VId,
    pub head: VId,
    pub family: Family,
    pub curve: CId,
}

/// A directed edge occurrence. `fwd` means traversal tail -> head.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dart {
    pub edge: EId,
    pub fwd: bool,
}

impl Dart {
    pub fn fwd(edge: EId) -> Self {
        Dart { edge, fwd: true }
    }
    pub fn rev_of(edge: EId) -> Self {
        Dart { edge, fwd: false }
    }
    pub fn rev(self) -> Self {
        Dart {
            edge: self.edge,
            fwd: !self.fwd,
        }
    }
}

impl std::fmt::Debug for Dart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.edge, if self.fwd { "+" } else { "-" })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Face {
    pub walk: Vec<Dart>,
    pub marks: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasepointLoc {
    Face(FId),
    Vertex(VId),
}

#[derive(Clone, Debug, Default)]
pub struct CellDiagram {
    pub vertices: BTreeMap<VId, VertexKind>,
    pub edges: BTreeMap<EId, Edge>,
    pub faces: BTreeMap<FId, Face>,
    pub basepoints: BTreeMap<String, BasepointLoc>,
    pub distinguished: String,
    pub name: Option<String>,
    next_v: u32,
    next_e: u32,
    next_f: u32,
    next_c: u32,
}

/// Outcome of `validate`: violations plus derived census data.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub genus: Option<u32>,
    /// walk length -> number of faces with that many corners
    pub face_census: BTreeMap<usize, usize>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl CellDiagram {
    pub fn new() -> Self {
        CellDiagram::default()
    }

    pub fn fresh_vertex(&mut self, kind: VertexKind) -> VId {
        let id = self.next_v;
        self.next_v += 1;
        self.vertices.insert(id, kind);
        id
    }

    pub fn fresh_curve(&mut self) -> CId {
        let id = self.next_c;
        self.next_c += 1;
        id
    }

    pub fn fresh_edge(&mut self, tail: VId, head: VId, family: Family, curve: CId) -> EId {
        let id = self.next_e;
        self.next_e += 1;
        self.edges.insert(
            id,
            Edge {
                tail,
                head,
                family,
                curve,
            },
        );
        id
    }

    pub fn fresh_face(&mut self, walk: Vec<Dart>) -> FId {
        let id = self.next_f;
        self.next_f += 1;
        self.faces.insert(
            id,
            Face {
                walk,
                marks: BTreeSet::new(),
            },
        );
        id
    }

    /// Reserve id counters after bulk insertion with explicit ids.
    pub fn sync_counters(&mut self) {
        self.next_v = self.vertices.keys().max().map_or(0, |m| m + 1);
        self.next_e = self.edges.keys().max().map_or(0, |m| m + 1);
        self.next_f = self.faces.keys().max().map_or(0, |m| m + 1);
        self.next_c = self.edges.values().map(|e| e.curve).max().map_or(0, |m| m + 1);
    }

    pub fn dart_tail(&self, d: Dart) -> VId {
        let e = &self.edges[&d.edge];
        if d.fwd {
            e.tail
        } else {
            e.head
        }
    }

    pub fn dart_head(&self, d: Dart) -> VId {
        self.dart_tail(d.rev())
    }

    /// Location of every dart: (face, position in that face's walk).
    pub fn dart_locations(&self) -> HashMap<Dart, (FId, usize)> {
        let mut out = HashMap::new();
        for (&f, face) in &self.faces {
            for (i, &d) in face.walk.iter().enumerate() {
                out.insert(d, (f, i));
            }
        }
        out
    }

    /// Out-darts at each vertex, unordered.
    pub fn vertex_out_darts(&self) -> BTreeMap<VId, Vec<Dart>> {
        let mut out: BTreeMap<VId, Vec<Dart>> = self.vertices.keys().map(|&v| (v, vec![])).collect();
        for (&e, edge) in &self.edges {
            out.get_mut(&edge.tail).map(|v| v.push(Dart::fwd(e)));
            out.get_mut(&edge.head).map(|v| v.push(Dart::rev_of(e)));
        }
        out
    }

    /// Rotation system derived from the walks: for each vertex, its out-darts
    /// in counterclockwise cyclic order (the orientation induced by the
    /// face-on-the-left convention). Returns an error when a vertex link is
    /// not a single cycle. Walk-successor order is clockwise, so the traced
    /// cycle is reversed before returning.
    pub fn rotations(&self) -> Result<BTreeMap<VId, Vec<Dart>>> {
        self.rotations_skipping(&[])
    }

    /// As `rotations`, but ignore the listed vertices entirely (used during
    /// surgery when new edges at those vertices are not yet in any walk).
    pub fn rotations_skipping(&self, skip: &[VId]) -> Result<BTreeMap<VId, Vec<Dart>>> {
        let mut succ: HashMap<Dart, Dart> = HashMap::new();
        for face in self.faces.values() {
            let n = face.walk.len();
            for i in 0..n {
                let d = face.walk[i];
                let nxt = face.walk[(i + 1) % n];
                // corner at head(d): incoming d, outgoing nxt
                succ.insert(d.rev(), nxt);
            }
        }
        let mut out = BTreeMap::new();
        for (v, darts) in self.vertex_out_darts() {
            if skip.contains(&v) {
                continue;
            }
            if darts.is_empty() {
                return Err(Error::InvalidDiagram(format!("isolated vertex {}", v)));
            }
            let start = *darts.iter().min().unwrap();
            let mut cyc = vec![start];
            let mut cur = start;
            loop {
                let nxt = *succ.get(&cur).ok_or_else(|| {
                    Error::InvalidDiagram(format!("dart {:?} has no successor at vertex {}", cur, v))
                })?;
                if self.dart_tail(nxt) != v {
                    return Err(Error::InvalidDiagram(format!(
                        "rotation at vertex {} leaves the vertex",
                        v
                    )));
                }
                if nxt == start {
                    break;
                }
                cyc.push(nxt);
                cur = nxt;
                if cyc.len() > darts.len() {
                    return Err(Error::InvalidDiagram(format!(
                        "rotation at vertex {} does not close",
                        v
                    )));
                }
            }
            if cyc.len() != darts.len() {
                return Err(Error::InvalidDiagram(format!(
                    "vertex {} link is not a single cycle",
                    v
                )));
            }
            cyc.reverse();
            out.insert(v, cyc);
        }
        Ok(out)
    }

    /// Edges of each curve id.
    pub fn curve_edges(&self) -> BTreeMap<CId, Vec<EId>> {
        let mut out: BTreeMap<CId, Vec<EId>> = BTreeMap::new();
        for (&e, edge) in &self.edges {
            out.entry(edge.curve).or_default().push(e);
        }
        out
    }

    pub fn curves_of_family(&self, fam: Family) -> BTreeSet<CId> {
        self.edges
            .values()
            .filter(|e| e.family == fam)
            .map(|e| e.curve)
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn genus(&self) -> Result<u32> {
        let chi = self.euler_characteristic();
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(Error::InvalidDiagram(format!(
                "Euler characteristic {} is not 2-2g",
                chi
            )));
        }
        Ok(((2 - chi) / 2) as u32)
    }

    pub fn face_of_mark(&self, name: &str) -> Option<FId> {
        match self.basepoints.get(name) {
            Some(BasepointLoc::Face(f)) => Some(*f),
            _ => None,
        }
    }

    pub fn vertex_of_mark(&self, name: &str) -> Option<VId> {
        match self.basepoints.get(name) {
            Some(BasepointLoc::Vertex(v)) => Some(*v),
            _ => None,
        }
    }

    /// Set or move a face mark, keeping `faces[].marks` in sync.
    pub fn place_face_mark(&mut self, name: &str, face: FId) {
        if let Some(BasepointLoc::Face(old)) = self.basepoints.get(name) {
            let old = *old;
            if let Some(f) = self.faces.get_mut(&old) {
                f.marks.remove(name);
            }
        }
        self.basepoints
            .insert(name.to_string(), BasepointLoc::Face(face));
        self.faces.get_mut(&face).unwrap().marks.insert(name.to_string());
    }

    pub fn remove_basepoint(&mut self, name: &str) {
        if let Some(BasepointLoc::Face(f)) = self.basepoints.get(name) {
            let f = *f;
            if let Some(face) = self.faces.get_mut(&f) {
                face.marks.remove(name);
            }
        }
        self.basepoints.remove(name);
    }

    /// True when every vertex is a crossing and every edge is alpha or beta:
    /// the form required by Floer-theoretic operations.
    pub fn is_pure(&self) -> bool {
        self.vertices.values().all(|k| *k == VertexKind::Crossing)
            && self
                .edges
                .values()
                .all(|e| e.family.is_closed_curve())
    }

    /// Connected components of the 1-skeleton + faces (via edge adjacency).
    fn connected(&self) -> bool {
        if self.faces.is_empty() {
            return false;
        }
        let mut seen: HashSet<FId> = HashSet::new();
        let locs = self.dart_locations();
        let start = *self.faces.keys().next().unwrap();
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            if !seen.insert(f) {
                continue;
            }
            for &d in &self.faces[&f].walk {
                if let Some(&(g, _)) = locs.get(&d.rev()) {
                    if !seen.contains(&g) {
                        stack.push(g);
                    }
                }
            }
        }
        seen.len() == self.faces.len()
    }

    /// Full invariant check. Returns a report; it never fails outright.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let viol = &mut rep.violations;

        // Referential integrity.
        for (e, edge) in &self.edges {
            if !self.vertices.contains_key(&edge.tail) || !self.vertices.contains_key(&edge.head) {
                viol.push(format!("edge {} references a missing vertex", e));
            }
        }
        for (f, face) in &self.faces {
            for d in &face.walk {
                if !self.edges.contains_key(&d.edge) {
                    viol.push(format!("face {} references missing edge {}", f, d.edge));
                }
            }
            if face.walk.is_empty() {
                viol.push(format!("face {} has an empty walk", f));
            }
        }
        if !viol.is_empty() {
            return rep;
        }

        // Dart coverage: each dart exactly once.
        let mut seen: HashMap<Dart, FId> = HashMap::new();
        for (&f, face) in &self.faces {
            for &d in &face.walk {
                if let Some(prev) = seen.insert(d, f) {
                    viol.push(format!(
                        "dart {:?} appears in faces {} and {} (edge used twice with {} direction)",
                        d,
                        prev,
                        f,
                        if d.fwd { "+" } else { "-" }
                    ));
                }
            }
        }
        for &e in self.edges.keys() {
            for fwd in [true, false] {
                if !seen.contains_key(&Dart { edge: e, fwd }) {
                    viol.push(format!(
                        "edge occurrence ({}, {}) missing from all face walks",
                        e,
                        if fwd { "+" } else { "-" }
                    ));
                }
            }
        }

        // Walk vertex-consistency.
        for (&f, face) in &self.faces {
            let n = face.walk.len();
            for i in 0..n {
                let d = face.walk[i];
                let nxt = face.walk[(i + 1) % n];
                if self.dart_head(d) != self.dart_tail(nxt) {
                    viol.push(format!("face {} walk breaks at position {}", f, i));
                }
            }
        }
        if !viol.is_empty() {
            return rep;
        }

        // Vertex links single cycles (surface condition).
        let rotations = match self.rotations() {
            Ok(r) => r,
            Err(e) => {
                viol.push(e.to_string());
                return rep;
            }
        };

        if !self.connected() {
            viol.push("diagram is not connected".into());
        }

        // Euler characteristic and genus.
        match self.genus() {
            Ok(g) => rep.genus = Some(g),
            Err(e) => viol.push(e.to_string()),
        }

        // Vertex kind rules.
        for (&v, &kind) in &self.vertices {
            let rot = &rotations[&v];
            let fams: Vec<Family> = rot
                .iter()
                .map(|d| self.edges[&d.edge].family)
                .collect();
            match kind {
                VertexKind::Crossing => {
                    let nonaux: Vec<Family> =
                        fams.iter().copied().filter(|f| *f != Family::Aux).collect();
                    if nonaux.len() != 4 {
                        viol.push(format!(
                            "crossing vertex {} has {} non-aux ends (want 4)",
                            v,
                            nonaux.len()
                        ));
                        continue;
                    }
                    let sides: Vec<Option<Side>> = rot
                        .iter()
                        .filter(|d| self.edges[&d.edge].family != Family::Aux)
                        .map(|d| self.edges[&d.edge].family.side())
                        .collect();
                    let alternates = sides[0] != sides[1]
                        && sides[1] != sides[2]
                        && sides[2] != sides[3]
                        && sides[0] == sides[2]
                        && sides[1] == sides[3];
                    if !alternates || sides.iter().any(|s| s.is_none()) {
                        viol.push(format!(
                            "crossing vertex {} families do not alternate A/B in rotation",
                            v
                        ));
                    }
                }
                VertexKind::Branch => {
                    let arc_a = fams.iter().filter(|f| **f == Family::ArcA).count();
                    let arc_b = fams.iter().filter(|f| **f == Family::ArcB).count();
                    let aux = fams.iter().filter(|f| **f == Family::Aux).count();
                    let coned = aux == fams.len();
                    let bridge = arc_a == 1 && arc_b == 1 && arc_a + arc_b == fams.len();
                    if !coned && !bridge {
                        viol.push(format!(
                            "branch vertex {} must carry exactly one A-arc and one B-arc end (or be a cone point)",
                            v
                        ));
                    }
                }
                VertexKind::Auxiliary => {
                    if fams.len() != 2
                        || fams[0] != fams[1]
                        || self.edges[&rot[0].edge].curve != self.edges[&rot[1].edge].curve
                    {
                        viol.push(format!(
                            "auxiliary vertex {} must be a degree-2 point of a single curve",
                            v
                        ));
                    }
                }
            }
        }

        // Curve structure per curve id.
        let curve_edges = self.curve_edges();
        for (&c, edges) in &curve_edges {
            let fams: BTreeSet<Family> = edges.iter().map(|e| self.edges[e].family).collect();
            if fams.len() != 1 {
                viol.push(format!("curve {} mixes families {:?}", c, fams));
                continue;
            }
            let fam = *fams.iter().next().unwrap();
            // End census: count ends per vertex.
            let mut ends: BTreeMap<VId, usize> = BTreeMap::new();
            for &e in edges {
                *ends.entry(self.edges[&e].tail).or_default() += 1;
                *ends.entry(self.edges[&e].head).or_default() += 1;
            }
            let odd: Vec<VId> = ends
                .iter()
                .filter(|(_, &c)| c % 2 == 1)
                .map(|(&v, _)| v)
                .collect();
            // Connectivity of the curve subgraph.
            let mut adj: BTreeMap<VId, Vec<VId>> = BTreeMap::new();
            for &e in edges {
                let ed = &self.edges[&e];
                adj.entry(ed.tail).or_default().push(ed.head);
                adj.entry(ed.head).or_default().push(ed.tail);
            }
            let first = self.edges[&edges[0]].tail;
            let mut vis: BTreeSet<VId> = BTreeSet::new();
            let mut stack = vec![first];
            while let Some(v) = stack.pop() {
                if !vis.insert(v) {
                    continue;
                }
                for &w in adj.get(&v).into_iter().flatten() {
                    if !vis.contains(&w) {
                        stack.push(w);
                    }
                }
            }
            let connected = vis.len() == adj.len();
            match fam {
                Family::Alpha | Family::Beta => {
                    if !odd.is_empty() || !connected {
                        viol.push(format!(
                            "curve {} ({:?}) is not a single closed cycle",
                            c, fam
                        ));
                    }
                    // No curve may pass through a branch vertex.
                    for (&v, _) in &ends {
                        if self.vertices[&v] == VertexKind::Branch {
                            viol.push(format!("curve {} passes through branch vertex {}", c, v));
                        }
                    }
                }
                Family::ArcA | Family::ArcB => {
                    if odd.len() != 2 || !connected {
                        viol.push(format!("arc {} ({:?}) is not a simple path", c, fam));
                        continue;
                    }
                    for &v in &odd {
                        if self.vertices[&v] != VertexKind::Branch {
                            viol.push(format!("arc {} endpoint {} is not a branch vertex", c, v));
                        }
                    }
                    if odd[0] == odd[1] {
                        viol.push(format!("arc {} endpoints coincide", c));
                    }
                    // Interior vertices must be crossings traversed straight.
                    for (&v, &cnt) in &ends {
                        if cnt == 2 && self.vertices[&v] == VertexKind::Branch {
                            viol.push(format!(
                                "arc {} passes through branch vertex {}",
                                c, v
                            ));
                        }
                    }
                }
                Family::Aux => {}
            }
        }

        // Disjointness within a side: distinct same-side curves may not share
        // a non-crossing vertex or any edge (edges carry one curve id, so only
        // vertices need checking).
        let mut side_at_vertex: BTreeMap<VId, BTreeMap<CId, Side>> = BTreeMap::new();
        for edge in self.edges.values() {
            if let Some(side) = edge.family.side() {
                for v in [edge.tail, edge.head] {
                    side_at_vertex
                        .entry(v)
                        .or_default()
                        .insert(edge.curve, side);
                }
            }
        }
        for (&v, curves) in &side_at_vertex {
            let a_curves = curves.values().filter(|s| **s == Side::A).count();
            let b_curves = curves.values().filter(|s| **s == Side::B).count();
            let is_crossing = self.vertices[&v] == VertexKind::Crossing;
            if !is_crossing && (a_curves > 1 || b_curves > 1) {
                viol.push(format!(
                    "same-side curves meet at non-crossing vertex {}",
                    v
                ));
            }
            if is_crossing && (a_curves > 1 || b_curves > 1) {
                viol.push(format!(
                    "two same-side curves cross at vertex {}",
                    v
                ));
            }
        }

        // Basepoints.
        if !self.basepoints.contains_key(&self.distinguished) {
            viol.push(format!(
                "distinguished basepoint '{}' is missing",
                self.distinguished
            ));
        }
        for (name, loc) in &self.basepoints {
            match loc {
                BasepointLoc::Face(f) => match self.faces.get(f) {
                    None => viol.push(format!("basepoint '{}' references missing face {}", name, f)),
                    Some(face) => {
                        if !face.marks.contains(name) {
                            viol.push(format!(
                                "basepoint '{}' not listed in marks of face {}",
                                name, f
                            ));
                        }
                    }
                },
                BasepointLoc::Vertex(v) => match self.vertices.get(v) {
                    None => viol.push(format!(
                        "basepoint '{}' references missing vertex {}",
                        name, v
                    )),
                    Some(k) => {
                        if *k != VertexKind::Branch {
                            viol.push(format!(
                                "basepoint '{}' sits on non-branch vertex {}",
                                name, v
                            ));
                        }
                    }
                },
            }
        }
        for (&f, face) in &self.faces {
            for m in &face.marks {
                if self.face_of_mark(m) != Some(f) {
                    viol.push(format!("face {} lists unregistered mark '{}'", f, m));
                }
            }
        }
        // Every branch vertex must be named, so that covers know the branch set.
        let named: BTreeSet<VId> = self
            .basepoints
            .values()
            .filter_map(|l| match l {
                BasepointLoc::Vertex(v) => Some(*v),
                _ => None,
            })
            .collect();
        for (&v, &k) in &self.vertices {
            if k == VertexKind::Branch && !named.contains(&v) {
                viol.push(format!("branch vertex {} carries no basepoint name", v));
            }
        }

        // Face census.
        for face in self.faces.values() {
            *rep.face_census.entry(face.walk.len()).or_default() += 1;
        }
        rep
    }

    pub fn require_valid(&self) -> Result<()> {
        let rep = self.validate();
        if rep.ok() {
            Ok(())
        } else {
            Err(Error::Validation(rep.violations))
        }
    }

    /// Niceness report: every face without an avoided mark must be a bigon or
    /// square. Requires a pure diagram for the corner count to be meaningful.
    pub fn check_niceness(&self, avoid: &BTreeSet<String>) -> NicenessReport {
        let mut bad = Vec::new();
        for (&f, face) in &self.faces {
            if face.marks.iter().any(|m| avoid.contains(m)) {
                continue;
            }
            let n = face.walk.len();
            if n != 2 && n != 4 {
                bad.push(f);
            }
        }
        let nice = bad.is_empty();
        // Very nice: the second basepoint's face is a bigon.
        let second: Vec<&String> = self
            .basepoints
            .iter()
            .filter(|(n, l)| matches!(l, BasepointLoc::Face(_)) && **n != self.distinguished)
            .map(|(n, _)| n)
            .collect();
        let very_nice = nice
            && !second.is_empty()
            && second.iter().all(|n| {
                self.face_of_mark(n)
                    .map(|f| self.faces[&f].walk.len() == 2)
                    .unwrap_or(false)
            });
        NicenessReport {
            nice,
            very_nice,
            bad_faces: bad,
        }
    }

    /// Canonical signature for isomorphism tests: breadth-first relabeling
    /// from the distinguished basepoint cell, minimized over the starting
    /// dart. Two diagrams are isomorphic as marked cell complexes iff their
    /// signatures agree.
    pub fn canonical_signature(&self) -> Vec<u8> {
        let locs = self.dart_locations();
        let start_faces: Vec<FId> = match self.basepoints.get(&self.distinguished) {
            Some(BasepointLoc::Face(f)) => vec![*f],
            Some(BasepointLoc::Vertex(v)) => {
                // All faces whose walk touches the vertex.
                let mut fs: Vec<FId> = self
                    .faces
                    .iter()
                    .filter(|(_, face)| face.walk.iter().any(|d| self.dart_tail(*d) == *v))
                    .map(|(&f, _)| f)
                    .collect();
                fs.sort();
                fs
            }
            None => self.faces.keys().copied().collect(),
        };
        let mut best: Option<Vec<u8>> = None;
        for &f0 in &start_faces {
            for start_pos in 0..self.faces[&f0].walk.len() {
                let sig = self.signature_from(f0, start_pos, &locs);
                if best.as_ref().map_or(true, |b| sig < *b) {
                    best = Some(sig);
                }
            }
        }
        best.unwrap_or_default()
    }

    fn signature_from(
        &self,
        f0: FId,
        start_pos: usize,
        locs: &HashMap<Dart, (FId, usize)>,
    ) -> Vec<u8> {
        use std::collections::VecDeque;
        let mut face_ids: HashMap<FId, u32> = HashMap::new();
        let mut edge_ids: HashMap<EId, u32> = HashMap::new();
        let mut edge_first_dir: HashMap<EId, bool> = HashMap::new();
        let mut vert_ids: HashMap<VId, u32> = HashMap::new();
        let mut curve_ids: HashMap<CId, u32> = HashMap::new();
        let mut entry: HashMap<FId, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        face_ids.insert(f0, 0);
        entry.insert(f0, start_pos);
        queue.push_back(f0);
        let mut order: Vec<FId> = Vec::new();
        while let Some(f) = queue.pop_front() {
            order.push(f);
            let walk = &self.faces[&f].walk;
            let n = walk.len();
            let e0 = entry[&f];
            for i in 0..n {
                let d = walk[(e0 + i) % n];
                let fresh_e = edge_ids.len() as u32;
                edge_ids.entry(d.edge).or_insert(fresh_e);
                edge_first_dir.entry(d.edge).or_insert(d.fwd);
                let v = self.dart_tail(d);
                let fresh_v = vert_ids.len() as u32;
                vert_ids.entry(v).or_insert(fresh_v);
                let c = self.edges[&d.edge].curve;
                let fresh_c = curve_ids.len() as u32;
                curve_ids.entry(c).or_insert(fresh_c);
                let (g, gpos) = locs[&d.rev()];
                if !face_ids.contains_key(&g) {
                    let fresh_f = face_ids.len() as u32;
                    face_ids.insert(g, fresh_f);
                    entry.insert(g, gpos);
                    queue.push_back(g);
                }
            }
        }
        // Serialize.
        let mut sig: Vec<u8> = Vec::new();
        let push32 = |sig: &mut Vec<u8>, x: u32| sig.extend_from_slice(&x.to_le_bytes());
        push32(&mut sig, order.len() as u32);
        for f in &order {
            let walk = &self.faces[f].walk;
            let n = walk.len();
            let e0 = entry[f];
            push32(&mut sig, n as u32);
            for i in 0..n {
                let d = walk[(e0 + i) % n];
                push32(&mut sig, edge_ids[&d.edge]);
                sig.push((d.fwd == edge_first_dir[&d.edge]) as u8);
                push32(&mut sig, vert_ids[&self.dart_tail(d)]);
                let ed = &self.edges[&d.edge];
                sig.push(match ed.family {
                    Family::Alpha => 0,
                    Family::Beta => 1,
                    Family::ArcA => 2,
                    Family::ArcB => 3,
                    Family::Aux => 4,
                });
                push32(&mut sig, curve_ids[&ed.curve]);
                sig.push(match self.vertices[&self.dart_tail(d)] {
                    VertexKind::Crossing => 0,
                    VertexKind::Branch => 1,
                    VertexKind::Auxiliary => 2,
                });
            }
            // marks sorted by name
            let face = &self.faces[f];
            push32(&mut sig, face.marks.len() as u32);
            for m in &face.marks {
                sig.extend_from_slice(m.as_bytes());
                sig.push(0);
            }
        }
        // Vertex basepoints.
        let mut vbp: Vec<(&String, u32)> = self
            .basepoints
            .iter()
            .filter_map(|(n, l)| match l {
                BasepointLoc::Vertex(v) => vert_ids.get(v).map(|id| (n, *id)),
                _ => None,
            })
            .collect();
        vbp.sort();
        push32(&mut sig, vbp.len() as u32);
        for (n, id) in vbp {
            sig.extend_from_slice(n.as_bytes());
            sig.push(0);
            push32(&mut sig, id);
        }
        sig.extend_from_slice(self.distinguished.as_bytes());
        sig
    }

    pub fn isomorphic(&self, other: &CellDiagram) -> bool {
        self.canonical_signature() == other.canonical_signature()
    }
}

#[derive(Clone, Debug)]
pub struct NicenessReport {
    pub nice: bool,
    pub very_nice: bool,
    pub bad_faces: Vec<FId>,
}
