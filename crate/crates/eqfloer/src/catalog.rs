//! Standard diagrams used by tests, the acceptance suite, and the shipped
//! corpus: small torus diagrams of knots, line diagrams of lens spaces, and
//! two-bridge diagrams on the pillowcase sphere.

use crate::cell::{BasepointLoc, CellDiagram, Dart, EId, Family, VId, VertexKind};
use crate::{Error, Result};

/// Assemble a diagram from vertices, edges and counterclockwise vertex
/// rotations, tracing face walks with the face-on-the-left convention: the
/// walk successor of dart `d` is the rotation-predecessor of `rev(d)` at the
/// head of `d`.
pub struct Assembler {
    pub diagram: CellDiagram,
    rotations: Vec<(VId, Vec<Dart>)>,
}

impl Assembler {
    pub fn new() -> Self {
        Assembler {
            diagram: CellDiagram::new(),
            rotations: Vec::new(),
        }
    }

    pub fn vertex(&mut self, kind: VertexKind) -> VId {
        self.diagram.fresh_vertex(kind)
    }

    pub fn curve(&mut self) -> u32 {
        self.diagram.fresh_curve()
    }

    pub fn edge(&mut self, tail: VId, head: VId, family: Family, curve: u32) -> EId {
        self.diagram.fresh_edge(tail, head, family, curve)
    }

    /// Declare the counterclockwise rotation (out-darts) at a vertex.
    pub fn rotation(&mut self, v: VId, ccw: Vec<Dart>) {
        self.rotations.push((v, ccw));
    }

    /// Trace faces and finish. `face_marks` maps mark names to one dart whose
    /// face should carry the mark; vertex basepoints are passed separately.
    pub fn finish(
        mut self,
        distinguished: &str,
        face_marks: &[(&str, Dart)],
        vertex_marks: &[(&str, VId)],
    ) -> Result<CellDiagram> {
        let mut rot_of: std::collections::HashMap<VId, Vec<Dart>> = Default::default();
        for (v, r) in &self.rotations {
            rot_of.insert(*v, r.clone());
        }
        // successor(d) = ccw-previous of rev(d) at head(d)
        let mut all_darts: Vec<Dart> = Vec::new();
        for &e in self.diagram.edges.keys() {
            all_darts.push(Dart::fwd(e));
            all_darts.push(Dart::rev_of(e));
        }
        let next = |d: Dart, dia: &CellDiagram| -> Result<Dart> {
            let v = dia.dart_head(d);
            let rot = rot_of
                .get(&v)
                .ok_or_else(|| Error::internal(format!("no rotation for vertex {}", v)))?;
            let r = d.rev();
            let pos = rot
                .iter()
                .position(|x| *x == r)
                .ok_or_else(|| Error::internal(format!("dart {:?} missing in rotation of {}", r, v)))?;
            Ok(rot[(pos + rot.len() - 1) % rot.len()])
        };
        let mut used: std::collections::HashSet<Dart> = Default::default();
        let mut dart_face: std::collections::HashMap<Dart, u32> = Default::default();
        for &d0 in &all_darts {
            if used.contains(&d0) {
                continue;
            }
            let mut walk = vec![d0];
            used.insert(d0);
            let mut cur = d0;
            loop {
                let nd = next(cur, &self.diagram)?;
                if nd == d0 {
                    break;
                }
                if used.contains(&nd) {
                    return Err(Error::internal("face trace collided"));
                }
                used.insert(nd);
                walk.push(nd);
                cur = nd;
            }
            let f = self.diagram.fresh_face(walk.clone());
            for d in walk {
                dart_face.insert(d, f);
            }
        }
        for (name, dart) in face_marks {
            let f = dart_face[dart];
            self.diagram.place_face_mark(name, f);
        }
        for (name, v) in vertex_marks {
            self.diagram
                .basepoints
                .insert(name.to_string(), BasepointLoc::Vertex(*v));
        }
        self.diagram.distinguished = distinguished.to_string();
        Ok(self.diagram)
    }
}

impl Default for Assembler {
    fn default() -> Self {
        Self::new()
    }
}

/// The one-crossing genus-1 diagram of the unknot: one alpha, one beta, a
/// single square face carrying both basepoints.
pub fn genus1_unknot() -> CellDiagram {
    let mut d = CellDiagram::new();
    let v = d.fresh_vertex(VertexKind::Crossing);
    let ca = d.fresh_curve();
    let cb = d.fresh_curve();
    let a = d.fresh_edge(v, v, Family::Alpha, ca);
    let b = d.fresh_edge(v, v, Family::Beta, cb);
    let f = d.fresh_face(vec![
        Dart::fwd(a),
        Dart::fwd(b),
        Dart::rev_of(a),
        Dart::rev_of(b),
    ]);
    d.place_face_mark("z", f);
    d.place_face_mark("w", f);
    d.distinguished = "z".into();
    d.name = Some("genus1-unknot".into());
    d
}

/// The reduced doubly-pointed genus-1 diagram of the trefoil: three
/// crossings, two marked bigons and an empty octagon.
pub fn genus1_trefoil() -> CellDiagram {
    let mut d = CellDiagram::new();
    let v1 = d.fresh_vertex(VertexKind::Crossing);
    let v2 = d.fresh_vertex(VertexKind::Crossing);
    let v3 = d.fresh_vertex(VertexKind::Crossing);
    let ca = d.fresh_curve();
    let cb = d.fresh_curve();
    let a1 = d.fresh_edge(v1, v2, Family::Alpha, ca);
    let a2 = d.fresh_edge(v2, v3, Family::Alpha, ca);
    let a3 = d.fresh_edge(v3, v1, Family::Alpha, ca);
    let q = d.fresh_edge(v1, v2, Family::Beta, cb);
    let p = d.fresh_edge(v2, v3, Family::Beta, cb);
    let r = d.fresh_edge(v3, v1, Family::Beta, cb);
    let fz = d.fresh_face(vec![Dart::fwd(a1), Dart::rev_of(q)]);
    let fw = d.fresh_face(vec![Dart::rev_of(a2), Dart::fwd(p)]);
    d.fresh_face(vec![
        Dart::fwd(a3),
        Dart::fwd(q),
        Dart::fwd(a2),
        Dart::fwd(r),
        Dart::rev_of(a3),
        Dart::rev_of(p),
        Dart::rev_of(a1),
        Dart::rev_of(r),
    ]);
    d.place_face_mark("z", fz);
    d.place_face_mark("w", fw);
    d.distinguished = "z".into();
    d.name = Some("genus1-trefoil".into());
    d
}

/// Line diagram on the torus: alpha the (1,0)-curve, beta the (p,q)-curve,
/// q >= 1, gcd(p, q) = 1. Presents the lens space L(q, p); all faces are
/// squares F_0..F_{q-1}. Basepoints z and w go into the requested faces.
pub fn torus_curve_diagram(p: i64, q: u32, z_face: u32, w_face: Option<u32>) -> Result<CellDiagram> {
    if q == 0 {
        return Err(Error::InvalidDiagram("q must be positive".into()));
    }
    let qi = q as i64;
    let shift = |j: i64, k: i64| -> usize { (((j + k) % qi + qi) % qi) as usize };
    if num_integer::gcd(p.rem_euclid(qi).max(0) + if qi == 1 { 1 } else { 0 }, qi) != 1
        && num_integer::gcd(p.rem_euclid(qi), qi) != 1
    {
        return Err(Error::InvalidDiagram("beta curve disconnected: gcd(p,q) != 1".into()));
    }
    let mut d = CellDiagram::new();
    let vs: Vec<VId> = (0..q).map(|_| d.fresh_vertex(VertexKind::Crossing)).collect();
    let ca = d.fresh_curve();
    let cb = d.fresh_curve();
    let as_: Vec<EId> = (0..q as i64)
        .map(|j| d.fresh_edge(vs[shift(j, 0)], vs[shift(j, 1)], Family::Alpha, ca))
        .collect();
    let bs: Vec<EId> = (0..q as i64)
        .map(|j| d.fresh_edge(vs[shift(j, 0)], vs[shift(j, p)], Family::Beta, cb))
        .collect();
    let mut faces = Vec::new();
    for j in 0..q as i64 {
        let f = d.fresh_face(vec![
            Dart::fwd(as_[shift(j, 0)]),
            Dart::fwd(bs[shift(j, 1)]),
            Dart::rev_of(as_[shift(j, p)]),
            Dart::rev_of(bs[shift(j, 0)]),
        ]);
        faces.push(f);
    }
    d.place_face_mark("z", faces[z_face as usize % q as usize]);
    if let Some(wf) = w_face {
        d.place_face_mark("w", faces[wf as usize % q as usize]);
    }
    d.distinguished = "z".into();
    d.name = Some(format!("torus-line-{}-{}", p, q));
    Ok(d)
}

/// Two-bridge diagram of b(q,1) on the pillowcase sphere (q odd): the image
/// of the flat torus line diagram with beta slope (1, q) under the
/// hyperelliptic involution. q = 1 gives the crossingless unknot diagram,
/// q = 3 the trefoil. Branch points: z = P3 (distinguished), p1, p2, p4.
pub fn pillowcase_bridge_diagram(q: u32) -> Result<CellDiagram> {
    if q % 2 == 0 {
        return Err(Error::InvalidDiagram("pillowcase slope q must be odd".into()));
    }
    let qi = q as i64;
    let mut asm = Assembler::new();
    // Branch vertices.
    let p1 = asm.vertex(VertexKind::Branch); // (0, 0)
    let p2 = asm.vertex(VertexKind::Branch); // (1/2, 0)
    let p3 = asm.vertex(VertexKind::Branch); // (0, 1/2)   = z
    let p4 = asm.vertex(VertexKind::Branch); // (1/2, 1/2)
    let half = (qi - 1) / 2;

    // Crossings along a2 (the y = 0 arc, folded parameter s in (0, 1/2)):
    // from b2 at s = k/q (k = 1..half), from bz at s = (j + 1/2)/q (j = 0..half-1).
    // Along az (y = 1/2): from b2 at (j + 1/2)/q, from bz at k/q.
    // Parameters coincide along the b-arcs, giving the identifications below.
    #[derive(Clone, Copy, PartialEq, PartialOrd)]
    struct S(i64, i64); // s = (2*num + odd) / (2q) encoded exactly: value = num/q + odd/(2q)
    let sval = |s: &S| (2 * s.0 + s.1) as f64; // ordering key (denominator fixed)

    // a2 crossing list: (s, from_b2?)
    let mut a2x: Vec<(S, bool)> = Vec::new();
    for k in 1..=half {
        a2x.push((S(k, 0), true));
    }
    for j in 0..half {
        a2x.push((S(j, 1), false));
    }
    a2x.sort_by(|a, b| sval(&a.0).partial_cmp(&sval(&b.0)).unwrap());
    let mut azx: Vec<(S, bool)> = Vec::new(); // (s, from_b2?)
    for j in 0..half {
        azx.push((S(j, 1), true));
    }
    for k in 1..=half {
        azx.push((S(k, 0), false));
    }
    azx.sort_by(|a, b| sval(&a.0).partial_cmp(&sval(&b.0)).unwrap());

    // Create crossing vertices, keyed by (arc, s).
    let mut a2v: Vec<(S, bool, VId)> = Vec::new();
    for (s, fb) in &a2x {
        let v = asm.vertex(VertexKind::Crossing);
        a2v.push((*s, *fb, v));
    }
    let mut azv: Vec<(S, bool, VId)> = Vec::new();
    for (s, fb) in &azx {
        let v = asm.vertex(VertexKind::Crossing);
        azv.push((*s, *fb, v));
    }

    // Edge chains. Arc a2: P1 .. P2; az: P3 .. P4; b2: P1 .. P4; bz: P3 .. P2.
    let ca2 = asm.curve();
    let caz = asm.curve();
    let cb2 = asm.curve();
    let cbz = asm.curve();
    let chain = |asm: &mut Assembler, pts: &[VId], fam: Family, c: u32| -> Vec<EId> {
        pts.windows(2)
            .map(|w| asm.edge(w[0], w[1], fam, c))
            .collect()
    };
    let a2_pts: Vec<VId> = std::iter::once(p1)
        .chain(a2v.iter().map(|t| t.2))
        .chain(std::iter::once(p2))
        .collect();
    let az_pts: Vec<VId> = std::iter::once(p3)
        .chain(azv.iter().map(|t| t.2))
        .chain(std::iter::once(p4))
        .collect();
    // b2 passes through: a2 crossings with from_b2, az crossings with from_b2,
    // ordered by s.
    let mut b2_mid: Vec<(S, VId)> = a2v
        .iter()
        .filter(|t| t.1)
        .map(|t| (t.0, t.2))
        .chain(azv.iter().filter(|t| t.1).map(|t| (t.0, t.2)))
        .collect();
    b2_mid.sort_by(|a, b| sval(&a.0).partial_cmp(&sval(&b.0)).unwrap());
    let b2_pts: Vec<VId> = std::iter::once(p1)
        .chain(b2_mid.iter().map(|t| t.1))
        .chain(std::iter::once(p4))
        .collect();
    let mut bz_mid: Vec<(S, VId)> = a2v
        .iter()
        .filter(|t| !t.1)
        .map(|t| (t.0, t.2))
        .chain(azv.iter().filter(|t| !t.1).map(|t| (t.0, t.2)))
        .collect();
    bz_mid.sort_by(|a, b| sval(&a.0).partial_cmp(&sval(&b.0)).unwrap());
    let bz_pts: Vec<VId> = std::iter::once(p3)
        .chain(bz_mid.iter().map(|t| t.1))
        .chain(std::iter::once(p2))
        .collect();

    let a2_e = chain(&mut asm, &a2_pts, Family::ArcA, ca2);
    let az_e = chain(&mut asm, &az_pts, Family::ArcA, caz);
    let b2_e = chain(&mut asm, &b2_pts, Family::ArcB, cb2);
    let bz_e = chain(&mut asm, &bz_pts, Family::ArcB, cbz);

    // Rotations. Every interior crossing looks identical in its chart: the
    // a-arc runs in the +x direction, the b-arc in the +(1,q) direction
    // (angle strictly between 0 and 180 degrees):
    //   CCW = [a-next, b-next, a-prev, b-prev].
    let dart_along = |edges: &[EId], pts: &[VId], v: VId, fwd_next: bool| -> Dart {
        // out-dart at v along the chain: next edge (fwd) or prev edge (rev)
        let i = pts.iter().position(|x| *x == v).unwrap();
        if fwd_next {
            Dart::fwd(edges[i])
        } else {
            Dart::rev_of(edges[i - 1])
        }
    };
    for (arc_pts, arc_es, b_from2) in [(&a2_pts, &a2_e, true), (&az_pts, &az_e, true)] {
        let _ = b_from2;
        let crossings: &Vec<(S, bool, VId)> = if std::ptr::eq(arc_pts, &a2_pts) { &a2v } else { &azv };
        for (_, from_b2, v) in crossings {
            let (b_pts, b_es) = if *from_b2 {
                (&b2_pts, &b2_e)
            } else {
                (&bz_pts, &bz_e)
            };
            let ccw = vec![
                dart_along(arc_es, arc_pts, *v, true),
                dart_along(b_es, b_pts, *v, true),
                dart_along(arc_es, arc_pts, *v, false),
                dart_along(b_es, b_pts, *v, false),
            ];
            asm.rotation(*v, ccw);
        }
    }
    // Branch rotations (degree 2).
    asm.rotation(p1, vec![Dart::fwd(a2_e[0]), Dart::fwd(b2_e[0])]);
    asm.rotation(
        p2,
        vec![
            Dart::rev_of(*a2_e.last().unwrap()),
            Dart::rev_of(*bz_e.last().unwrap()),
        ],
    );
    asm.rotation(p3, vec![Dart::fwd(az_e[0]), Dart::fwd(bz_e[0])]);
    asm.rotation(
        p4,
        vec![
            Dart::rev_of(*az_e.last().unwrap()),
            Dart::rev_of(*b2_e.last().unwrap()),
        ],
    );

    let mut d = asm.finish(
        "z",
        &[],
        &[("z", p3), ("p1", p1), ("p2", p2), ("p4", p4)],
    )?;
    d.name = Some(format!("pillowcase-bridge-{}", q));
    Ok(d)
}

/// A four-crossing two-bridge diagram of the unknot: the crossingless
/// diagram with two finger wiggles pushed into the long B-arc.
pub fn two_bridge_unknot_wiggly() -> Result<CellDiagram> {
    let mut asm = Assembler::new();
    let p1 = asm.vertex(VertexKind::Branch);
    let p2 = asm.vertex(VertexKind::Branch);
    let p3 = asm.vertex(VertexKind::Branch);
    let p4 = asm.vertex(VertexKind::Branch);
    let x1 = asm.vertex(VertexKind::Crossing); // on a2 near p4, b2 passes down
    let x2 = asm.vertex(VertexKind::Crossing); // on a2, b2 back up
    let x3 = asm.vertex(VertexKind::Crossing); // on a1, b2 down
    let x4 = asm.vertex(VertexKind::Crossing); // on a1, b2 up
    let ca1 = asm.curve();
    let ca2 = asm.curve();
    let cb1 = asm.curve();
    let cb2 = asm.curve();
    // a1: p1 - x4 - x3 - p2 along +x; a2: p3 - x2 - x1 - p4.
    let a1a = asm.edge(p1, x4, Family::ArcA, ca1);
    let a1b = asm.edge(x4, x3, Family::ArcA, ca1);
    let a1c = asm.edge(x3, p2, Family::ArcA, ca1);
    let a2a = asm.edge(p3, x2, Family::ArcA, ca2);
    let a2b = asm.edge(x2, x1, Family::ArcA, ca2);
    let a2c = asm.edge(x1, p4, Family::ArcA, ca2);
    // b1: p2 - p3 straight on the axis.
    let b1 = asm.edge(p2, p3, Family::ArcB, cb1);
    // b2: p4 up-left, down through x1, u-turn, up through x2, left above the
    // axis, down through x3, u-turn, up through x4, around the left end to p1.
    let b2a = asm.edge(p4, x1, Family::ArcB, cb2); // arrives from above (ray ~68 deg at x1)
    let b2b = asm.edge(x1, x2, Family::ArcB, cb2); // below axis u-turn
    let b2c = asm.edge(x2, x3, Family::ArcB, cb2); // above axis traverse
    let b2d = asm.edge(x3, x4, Family::ArcB, cb2); // below axis u-turn
    let b2e = asm.edge(x4, p1, Family::ArcB, cb2); // up and around to p1 from below-left

    // Rotations (CCW, +x to the right). At crossings on the axis the a-rays
    // are 0/180 degrees; b-ray angles follow the path geometry above.
    asm.rotation(x1, vec![
        Dart::fwd(a2c),          // 0: toward p4
        Dart::rev_of(b2a),       // ~68: back up toward p4's hook
        Dart::rev_of(a2b),       // 180: toward x2
        Dart::fwd(b2b),          // ~251: down into the u-turn
    ]);
    asm.rotation(x2, vec![
        Dart::fwd(a2b),          // 0: toward x1
        Dart::fwd(b2c),          // ~117: up-left above axis
        Dart::rev_of(a2a),       // 180: toward p3
        Dart::rev_of(b2b),       // ~289: down toward the u-turn
    ]);
    asm.rotation(x3, vec![
        Dart::fwd(a1c),          // 0: toward p2
        Dart::rev_of(b2c),       // ~63: back up-right
        Dart::rev_of(a1b),       // 180: toward x4
        Dart::fwd(b2d),          // ~251: down into u-turn
    ]);
    asm.rotation(x4, vec![
        Dart::fwd(a1b),          // 0: toward x3
        Dart::fwd(b2e),          // ~112: up-left, wrapping to p1
        Dart::rev_of(a1a),       // 180: toward p1
        Dart::rev_of(b2d),       // ~289: down toward u-turn
    ]);
    asm.rotation(p1, vec![Dart::fwd(a1a), Dart::rev_of(b2e)]); // b2 arrives from below-left (~243)
    asm.rotation(p2, vec![Dart::fwd(b1), Dart::rev_of(a1c)]);
    asm.rotation(p3, vec![Dart::fwd(a2a), Dart::rev_of(b1)]);
    asm.rotation(p4, vec![Dart::fwd(b2a), Dart::rev_of(a2c)]);

    let mut d = asm.finish("z", &[], &[("z", p1), ("p2", p2), ("p3", p3), ("p4", p4)])?;
    d.name = Some("two-bridge-unknot-wiggly".into());
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknot_valid() {
        let d = genus1_unknot();
        let rep = d.validate();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.genus, Some(1));
    }

    #[test]
    fn trefoil_valid() {
        let d = genus1_trefoil();
        let rep = d.validate();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.genus, Some(1));
        // census: two bigons and an octagon
        assert_eq!(rep.face_census.get(&2), Some(&2));
        assert_eq!(rep.face_census.get(&8), Some(&1));
    }

    #[test]
    fn torus_lines_valid() {
        for (p, q) in [(0i64, 1u32), (1, 1), (1, 3), (2, 3), (1, 5), (3, 5), (2, 7)] {
            let d = torus_curve_diagram(p, q, 0, Some(1)).unwrap();
            let rep = d.validate();
            assert!(rep.ok(), "({},{}) -> {:?}", p, q, rep.violations);
            assert_eq!(rep.genus, Some(1));
            assert_eq!(rep.face_census.get(&4), Some(&(q as usize)));
        }
    }

    #[test]
    fn pillowcase_valid() {
        for q in [1u32, 3, 5, 7] {
            let d = pillowcase_bridge_diagram(q).unwrap();
            let rep = d.validate();
            assert!(rep.ok(), "q={} -> {:?}", q, rep.violations);
            assert_eq!(rep.genus, Some(0), "q={}", q);
            // 4 branch + 2(q-1) crossings
            assert_eq!(d.vertices.len(), 4 + 2 * (q as usize - 1));
        }
    }

    #[test]
    fn wiggly_unknot_valid() {
        let d = two_bridge_unknot_wiggly().unwrap();
        let rep = d.validate();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(rep.genus, Some(0));
        assert_eq!(d.vertices.len(), 8);
    }
}
