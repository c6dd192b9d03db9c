//! Exact arrangement builder: polyline paths with rational coordinates on
//! the flat torus (optionally minus an axis-aligned rectangular hole) are
//! intersected exactly and assembled into a cell complex. Used to encode
//! open-book pages without hand-tracing face walks.

use crate::catalog::Assembler;
use crate::cell::{CellDiagram, Dart, EId, Family, VId, VertexKind};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn qmod1(x: &Q) -> Q {
    let f = x.floor();
    x - f
}

/// A point on the torus chart [0,1)^2.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Pt {
    pub x: Q,
    pub y: Q,
}

impl Pt {
    pub fn new(x: Q, y: Q) -> Pt {
        Pt {
            x: qmod1(&x),
            y: qmod1(&y),
        }
    }
}

/// A path: vertices in the universal cover (coordinates may leave [0,1);
/// consecutive points are joined by straight segments, projected to the
/// torus). Closed paths repeat their first point (projected) at the end.
#[derive(Clone, Debug)]
pub struct PolyPath {
    pub name: String,
    pub family: Family,
    pub curve_tag: usize,
    pub points: Vec<(Q, Q)>,
}

struct Seg {
    path: usize,
    a: (Q, Q),
    b: (Q, Q),
}

/// Split a universal-cover segment at chart boundaries into pieces that stay
/// within one fundamental domain each, returned with domain offsets removed.
fn split_to_chart(a: &(Q, Q), b: &(Q, Q)) -> Vec<((Q, Q), (Q, Q))> {
    // Collect parameter values where x or y crosses an integer.
    let mut ts: Vec<Q> = vec![Q::zero(), Q::one()];
    let dx = &b.0 - &a.0;
    let dy = &b.1 - &a.1;
    for (start, delta) in [(&a.0, &dx), (&a.1, &dy)] {
        if delta.is_zero() {
            continue;
        }
        // integers k strictly between start and start+delta
        let lo = if delta.is_positive() {
            (*start).clone()
        } else {
            start + delta
        };
        let hi = if delta.is_positive() {
            start + delta
        } else {
            (*start).clone()
        };
        let mut k = lo.floor() + Q::one();
        while k < hi {
            let t = (&k - start) / delta;
            if t > Q::zero() && t < Q::one() {
                ts.push(t);
            }
            k += Q::one();
        }
    }
    ts.sort();
    ts.dedup();
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        if t0 == t1 {
            continue;
        }
        let p0 = (&a.0 + &dx * t0, &a.1 + &dy * t0);
        let p1 = (&a.0 + &dx * t1, &a.1 + &dy * t1);
        // Shift by the floor of the midpoint so the OPEN segment lies in the
        // chart (endpoints may sit on the boundary 0 or 1).
        let mid = ((&p0.0 + &p1.0) / q(2, 1), (&p0.1 + &p1.1) / q(2, 1));
        let ox = mid.0.floor();
        let oy = mid.1.floor();
        out.push((
            (&p0.0 - &ox, &p0.1 - &oy),
            (&p1.0 - &ox, &p1.1 - &oy),
        ));
    }
    out
}

/// Exact proper intersection of two open segments (endpoints excluded unless
/// shared as actual path vertices, which the caller handles).
fn collinear_overlap(p: &((Q, Q), (Q, Q)), r: &((Q, Q), (Q, Q))) -> bool {
    let d1 = (&p.1 .0 - &p.0 .0, &p.1 .1 - &p.0 .1);
    let d2 = (&r.1 .0 - &r.0 .0, &r.1 .1 - &r.0 .1);
    let denom = &d1.0 * &d2.1 - &d1.1 * &d2.0;
    if !denom.is_zero() {
        return false;
    }
    // Parallel; collinear iff r.0 lies on the line of p.
    let rhs = (&r.0 .0 - &p.0 .0, &r.0 .1 - &p.0 .1);
    let cross = &rhs.0 * &d1.1 - &rhs.1 * &d1.0;
    if !cross.is_zero() {
        return false;
    }
    // Same line: overlapping parameter intervals?
    let param = |pt: &(Q, Q)| -> Q {
        if d1.0.is_zero() {
            (&pt.1 - &p.0 .1) / &d1.1
        } else {
            (&pt.0 - &p.0 .0) / &d1.0
        }
    };
    let (mut t0, mut t1) = (param(&r.0), param(&r.1));
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    t0 < Q::one() && t1 > Q::zero()
}

fn seg_intersection(p: &((Q, Q), (Q, Q)), r: &((Q, Q), (Q, Q))) -> Option<(Q, Q)> {
    let d1 = (&p.1 .0 - &p.0 .0, &p.1 .1 - &p.0 .1);
    let d2 = (&r.1 .0 - &r.0 .0, &r.1 .1 - &r.0 .1);
    let denom = &d1.0 * &d2.1 - &d1.1 * &d2.0;
    if denom.is_zero() {
        return None;
    }
    let rhs = (&r.0 .0 - &p.0 .0, &r.0 .1 - &p.0 .1);
    let t = (&rhs.0 * &d2.1 - &rhs.1 * &d2.0) / &denom;
    let s = (&rhs.0 * &d1.1 - &rhs.1 * &d1.0) / &denom;
    if t <= Q::zero() || t >= Q::one() || s <= Q::zero() || s >= Q::one() {
        return None;
    }
    Some((&p.0 .0 + &d1.0 * &t, &p.0 .1 + &d1.1 * &t))
}

fn dir_angle_class(dx: &Q, dy: &Q) -> (u8, Q) {
    // Exact angular order: quadrant class then slope comparison key.
    // Classes (ccw from +x): 0:(+,0) 1:(+,+) 2:(0,+) 3:(-,+) 4:(-,0)
    // 5:(-,-) 6:(0,-) 7:(+,-)
    let cls = match (dx.is_zero(), dy.is_zero(), dx.is_positive(), dy.is_positive()) {
        (false, true, true, _) => 0,
        (false, false, true, true) => 1,
        (true, false, _, true) => 2,
        (false, false, false, true) => 3,
        (false, true, false, _) => 4,
        (false, false, false, false) => 5,
        (true, false, _, false) => 6,
        (false, false, true, false) => 7,
        (true, true, _, _) => unreachable!("zero direction"),
    };
    // Within a quadrant, ccw order = increasing dy/dx.
    let key = if dx.is_zero() {
        Q::zero()
    } else {
        dy / dx
    };
    (cls, key)
}

/// Build the cell complex of the arrangement. Every path vertex and every
/// pairwise crossing becomes a vertex. Path endpoints must coincide exactly
/// with other paths' endpoints to be identified. Vertex kinds: Crossing for
/// degree-4 interior crossings; the caller's kind map can override by point.
pub fn build_arrangement(
    paths: &[PolyPath],
    kind_overrides: &[((Q, Q), VertexKind)],
) -> Result<BuiltArrangement> {
    // 1. Chart-split all segments.
    let mut segs: Vec<Seg> = Vec::new();
    for (pi, p) in paths.iter().enumerate() {
        for w in p.points.windows(2) {
            for (a, b) in split_to_chart(&w[0], &w[1]) {
                segs.push(Seg { path: pi, a, b });
            }
        }
    }
    // 2. Cut points per segment: endpoints plus proper intersections with
    // all other segments (tested on torus representatives: compare pieces
    // after normalizing endpoints mod 1; since pieces live in the chart,
    // intersections computed directly, also against +-1 translates).
    let mut cuts: Vec<Vec<(Q, Q)>> = segs.iter().map(|_| Vec::new()).collect();
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            // Compare segment i against nine translates of segment j.
            for ddx in -1..=1i64 {
                for ddy in -1..=1i64 {
                    let tj = (
                        (&segs[j].a.0 + q(ddx, 1), &segs[j].a.1 + q(ddy, 1)),
                        (&segs[j].b.0 + q(ddx, 1), &segs[j].b.1 + q(ddy, 1)),
                    );
                    let si = (segs[i].a.clone(), segs[i].b.clone());
                    if (segs[i].path != segs[j].path || true) && collinear_overlap(&si, &tj) {
                        return Err(Error::InvalidDiagram(format!(
                            "arrangement paths '{}' and '{}' overlap along a segment",
                            paths[segs[i].path].name, paths[segs[j].path].name
                        )));
                    }
                    if let Some(pt) = seg_intersection(&si, &tj) {
                        cuts[i].push(pt.clone());
                        cuts[j].push((&pt.0 - q(ddx, 1), &pt.1 - q(ddy, 1)));
                    }
                }
            }
        }
    }
    // T-joints: open-path endpoints lying on other segments subdivide them.
    let endpoints: Vec<(Q, Q)> = paths
        .iter()
        .flat_map(|p| {
            let f = p.points.first().unwrap().clone();
            let l = p.points.last().unwrap().clone();
            [f, l]
        })
        .collect();
    for (si, seg) in segs.iter().enumerate() {
        let d1 = (&seg.b.0 - &seg.a.0, &seg.b.1 - &seg.a.1);
        for ep in &endpoints {
            for ddx in -1..=1i64 {
                for ddy in -1..=1i64 {
                    let p = (&ep.0 + q(ddx, 1), &ep.1 + q(ddy, 1));
                    let rhs = (&p.0 - &seg.a.0, &p.1 - &seg.a.1);
                    let cross = &rhs.0 * &d1.1 - &rhs.1 * &d1.0;
                    if !cross.is_zero() {
                        continue;
                    }
                    let t = if d1.0.is_zero() {
                        &rhs.1 / &d1.1
                    } else {
                        &rhs.0 / &d1.0
                    };
                    if t > Q::zero() && t < Q::one() {
                        cuts[si].push(p.clone());
                    }
                }
            }
        }
    }
    // 3. Vertex table keyed by torus coordinates.
    let mut asm = Assembler::new();
    let mut vid_of: BTreeMap<Pt, VId> = BTreeMap::new();
    fn get_vid(
        asm: &mut Assembler,
        vid_of: &mut BTreeMap<Pt, VId>,
        kind_overrides: &[((Q, Q), VertexKind)],
        p: Pt,
    ) -> VId {
        if let Some(&v) = vid_of.get(&p) {
            return v;
        }
        let kind = kind_overrides
            .iter()
            .find(|((ox, oy), _)| Pt::new(ox.clone(), oy.clone()) == p)
            .map(|(_, k)| *k)
            .unwrap_or(VertexKind::Crossing);
        let v = asm.vertex(kind);
        vid_of.insert(p, v);
        v
    }
    // 4. Edges: per path, per segment piece between consecutive cuts; also
    // record, per vertex, the outgoing directions for the rotation.
    struct OutDir {
        dart: Dart,
        cls: u8,
        key: Q,
    }
    let mut rot: BTreeMap<VId, Vec<OutDir>> = BTreeMap::new();
    let mut curve_of_path: Vec<u32> = Vec::new();
    {
        let mut tags: BTreeMap<(usize, u8), u32> = BTreeMap::new();
        for p in paths {
            let fam_code = p.family as u8;
            let id = *tags
                .entry((p.curve_tag, fam_code))
                .or_insert_with(|| asm.curve());
            curve_of_path.push(id);
        }
    }
    let mut edge_count = 0usize;
    for (si, seg) in segs.iter().enumerate() {
        let dx = &seg.b.0 - &seg.a.0;
        let dy = &seg.b.1 - &seg.a.1;
        let mut pts: Vec<(Q, Q)> = vec![seg.a.clone(), seg.b.clone()];
        pts.extend(cuts[si].iter().cloned());
        // Sort along the segment by parameter.
        pts.sort_by(|u, v| {
            let tu = if dx.is_zero() {
                (&u.1 - &seg.a.1) / &dy
            } else {
                (&u.0 - &seg.a.0) / &dx
            };
            let tv = if dx.is_zero() {
                (&v.1 - &seg.a.1) / &dy
            } else {
                (&v.0 - &seg.a.0) / &dx
            };
            tu.cmp(&tv)
        });
        pts.dedup();
        for w in pts.windows(2) {
            let pa = Pt::new(w[0].0.clone(), w[0].1.clone());
            let pb = Pt::new(w[1].0.clone(), w[1].1.clone());
            let va = get_vid(&mut asm, &mut vid_of, kind_overrides, pa);
            let vb = get_vid(&mut asm, &mut vid_of, kind_overrides, pb);
            let fam = paths[seg.path].family;
            let cid = curve_of_path[seg.path];
            let e: EId = asm.edge(va, vb, fam, cid);
            edge_count += 1;
            rot.entry(va).or_default().push(OutDir {
                dart: Dart::fwd(e),
                cls: dir_angle_class(&dx, &dy).0,
                key: dir_angle_class(&dx, &dy).1,
            });
            let (ncls, nkey) = dir_angle_class(&(-dx.clone()), &(-dy.clone()));
            rot.entry(vb).or_default().push(OutDir {
                dart: Dart::rev_of(e),
                cls: ncls,
                key: nkey,
            });
        }
    }
    let _ = edge_count;
    // 5. Rotations in ccw order.
    for (v, mut dirs) in rot {
        dirs.sort_by(|a, b| (a.cls, a.key.clone()).cmp(&(b.cls, b.key.clone())));
        asm.rotation(v, dirs.into_iter().map(|d| d.dart).collect());
    }
    let mut d = asm.finish("z", &[], &[])?;
    // Smooth chart-splitting artifacts: degree-2 vertices interior to one
    // path, except declared endpoints and overridden kinds.
    let mut keep: Vec<Pt> = kind_overrides
        .iter()
        .map(|((x, y), _)| Pt::new(x.clone(), y.clone()))
        .collect();
    for p in paths {
        let first = p.points.first().unwrap();
        let last = p.points.last().unwrap();
        let pf = Pt::new(first.0.clone(), first.1.clone());
        let pl = Pt::new(last.0.clone(), last.1.clone());
        // Closed paths have no genuine endpoints.
        if pf != pl {
            keep.push(pf);
            keep.push(pl);
        }
    }
    let keep_ids: Vec<VId> = keep
        .iter()
        .filter_map(|p| vid_of.get(p).copied())
        .collect();
    let vs: Vec<VId> = d.vertices.keys().copied().collect();
    for v in vs {
        if keep_ids.contains(&v) {
            continue;
        }
        let ends: Vec<EId> = d
            .edges
            .iter()
            .filter(|(_, e)| e.tail == v || e.head == v)
            .map(|(&e, _)| e)
            .collect();
        if ends.len() == 2 && ends[0] != ends[1] {
            let (f1, f2) = (d.edges[&ends[0]].clone(), d.edges[&ends[1]].clone());
            if f1.family == f2.family && f1.curve == f2.curve {
                crate::moves::smooth_vertex(&mut d, v)?;
                vid_of.retain(|_, &mut id| id != v);
            }
        }
    }
    Ok(BuiltArrangement {
        diagram: d,
        vertex_lookup: vid_of,
    })
}

#[derive(Debug)]
pub struct BuiltArrangement {
    pub diagram: CellDiagram,
    pub vertex_lookup: BTreeMap<Pt, VId>,
}

impl BuiltArrangement {
    pub fn vertex_at(&self, x: Q, y: Q) -> Option<VId> {
        self.vertex_lookup.get(&Pt::new(x, y)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_lines_via_arrangement() {
        // alpha = horizontal line, beta = (1,3) line: the L(3,1) diagram.
        let a = PolyPath {
            name: "alpha".into(),
            family: Family::Alpha,
            curve_tag: 0,
            points: vec![(q(0, 1), q(1, 2)), (q(1, 1), q(1, 2))],
        };
        let b = PolyPath {
            name: "beta".into(),
            family: Family::Beta,
            curve_tag: 1,
            points: vec![(q(0, 1), q(0, 1)), (q(1, 1), q(3, 1))],
        };
        let built = build_arrangement(&[a, b], &[]).unwrap();
        let mut d: CellDiagram = built.diagram;
        // Marks for validity: place z on any face.
        let f = *d.faces.keys().next().unwrap();
        d.place_face_mark("z", f);
        d.distinguished = "z".into();
        let rep = d.validate();
        assert!(rep.ok(), "{:?}", rep.violations);
        assert_eq!(d.vertices.len(), 3);
        assert_eq!(d.genus().unwrap(), 1);
    }

    #[test]
    fn chart_split_wraps() {
        let pieces = split_to_chart(&(q(3, 4), q(0, 1)), &(q(7, 4), q(1, 1)));
        assert!(pieces.len() >= 2);
    }
}
