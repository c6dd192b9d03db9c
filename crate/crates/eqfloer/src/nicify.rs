//! Finger-move nicification: convert a diagram (optionally carrying a deck
//! involution, in which case every move is applied as a sigma-orbit) into a
//! nice diagram where every unmarked face is a bigon or a square.
//!
//! Strategy, following the classical finger-move algorithm: repeatedly take
//! a bad face at maximal distance from the marked faces, push the boundary
//! edge facing the nearest marked face through the bad face and onward,
//! stopping when the finger reaches a bigon, a marked face, or a face at
//! smaller distance. Each push strictly lowers the badness at the top
//! distance level; an absolute iteration cap converts a bug into a
//! diagnosable failure.

use crate::cell::{CellDiagram, Dart, EId, FId, VId};
use crate::cover::{reconstruct_involution, InvolutiveDiagram, Involution};
use crate::moves::{finger_step, FingerStep};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// One applied finger push, for the audit/replay log.
#[derive(Clone, Debug)]
pub struct FingerRecord {
    pub pushed: Dart,
    pub crossed: Dart,
    pub mirrored: bool,
}

/// Badness of a face: 0 for bigons and squares, corners/2 - 2 otherwise.
pub fn badness(d: &CellDiagram, f: FId) -> usize {
    let n = d.faces[&f].walk.len();
    if n <= 4 {
        0
    } else {
        n / 2 - 2
    }
}

/// Distance of every face from the marked faces, counting edge crossings.
fn face_distances(d: &CellDiagram, avoid: &BTreeSet<String>) -> Result<BTreeMap<FId, usize>> {
    let locs = d.dart_locations();
    let mut dist: BTreeMap<FId, usize> = BTreeMap::new();
    let mut queue: VecDeque<FId> = VecDeque::new();
    for (&f, face) in &d.faces {
        if face.marks.iter().any(|m| avoid.contains(m)) {
            dist.insert(f, 0);
            queue.push_back(f);
        }
    }
    if queue.is_empty() {
        return Err(Error::InvalidDiagram(
            "no marked face to measure distances from".into(),
        ));
    }
    while let Some(f) = queue.pop_front() {
        let df = dist[&f];
        for dart in d.faces[&f].walk.clone() {
            let g = locs[&dart.rev()].0;
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(g) {
                e.insert(df + 1);
                queue.push_back(g);
            }
        }
    }
    Ok(dist)
}

fn bad_faces(d: &CellDiagram, avoid: &BTreeSet<String>) -> Vec<FId> {
    d.faces
        .iter()
        .filter(|(_, face)| !face.marks.iter().any(|m| avoid.contains(m)))
        .filter(|(&f, _)| badness(d, f) > 0)
        .map(|(&f, _)| f)
        .collect()
}

struct Driver {
    d: CellDiagram,
    sigma: Option<Involution>,
    avoid: BTreeSet<String>,
    log: Vec<FingerRecord>,
    /// Faces created by the finger currently being pushed (collision guard).
    created: BTreeSet<FId>,
}

enum StepPlan {
    /// Cross this dart, then keep going.
    Continue(Dart),
    /// Cross this dart and stop (terminal face beyond).
    Final(Dart),
}

impl Driver {
    fn is_marked(&self, f: FId) -> bool {
        self.d.faces[&f]
            .marks
            .iter()
            .any(|m| self.avoid.contains(m))
    }

    /// Candidate exits from `face` for a finger of the pushed family: darts
    /// of the opposite family in the walk. `first` restricts to
    /// non-adjacent exits (so the bad face's badness strictly drops) and,
    /// for an invariant start, to the half of the walk before the mirrored
    /// entry.
    fn plan_exit(
        &self,
        face: FId,
        entry_pos: usize,
        pushed_family_side: crate::cell::Side,
        first: bool,
        half_limit: Option<usize>,
        dist: &BTreeMap<FId, usize>,
        start_dist: usize,
    ) -> Option<StepPlan> {
        let locs = self.d.dart_locations();
        let walk = &self.d.faces[&face].walk;
        let n = walk.len();
        let mut candidates: Vec<(usize, Dart)> = Vec::new();
        for (j, &dart) in walk.iter().enumerate() {
            if j == entry_pos {
                continue;
            }
            let fam = self.d.edges[&dart.edge].family;
            if fam.side() == Some(pushed_family_side) || fam.side().is_none() {
                continue;
            }
            if first {
                // Non-adjacent to the entry, so both split pieces keep at
                // least four corners.
                let delta = (j + n - entry_pos) % n;
                if delta == 1 || delta == n - 1 {
                    continue;
                }
                if let Some(lim) = half_limit {
                    // Walk positions strictly between entry and the mirrored
                    // entry keep the two chord pairs unlinked.
                    if delta >= (lim + n - entry_pos) % n {
                        continue;
                    }
                }
            }
            // Never cross a sigma-fixed edge: the mirrored finger would
            // collide with this one.
            if let Some(s) = &self.sigma {
                if s.dart_map[&dart].edge == dart.edge {
                    continue;
                }
            }
            candidates.push((j, dart));
        }
        // Rank: terminal exits first (marked face, bigon, smaller distance),
        // then unexplored faces by badness beyond, then edge id.
        let score = |dart: &Dart| -> (u8, usize, u32) {
            let far = locs[&dart.rev()].0;
            let terminal = self.is_marked(far)
                || self.d.faces[&far].walk.len() == 2
                || dist.get(&far).copied().unwrap_or(usize::MAX) < start_dist;
            let fresh = !self.created.contains(&far);
            let class = match (terminal, fresh) {
                (true, _) => 0u8,
                (false, true) => 1,
                (false, false) => 2,
            };
            (class, badness(&self.d, far), dart.edge)
        };
        candidates.sort_by_key(|(_, dart)| score(dart));
        let (_, best) = *candidates.first()?;
        let far = locs[&best.rev()].0;
        let terminal = self.is_marked(far)
            || self.d.faces[&far].walk.len() == 2
            || dist.get(&far).copied().unwrap_or(usize::MAX) < start_dist;
        if !terminal && self.created.contains(&far) {
            // Only self-created faces remain: the configuration needs a
            // handleslide, which this driver does not perform.
            return None;
        }
        Some(if terminal {
            StepPlan::Final(best)
        } else {
            StepPlan::Continue(best)
        })
    }

    /// Apply one step and, in equivariant mode, its mirror; then rebuild the
    /// involution. Returns our step outcome.
    fn apply_pair(&mut self, pushed: Dart, crossed: Dart) -> Result<FingerStep> {
        let mirror = match &self.sigma {
            None => None,
            Some(s) => {
                let mp = s.dart_map[&pushed];
                let mc = s.dart_map[&crossed];
                if mp == pushed && mc == crossed {
                    None // genuinely self-mirrored; single application
                } else {
                    // Disjointness of the two surgeries.
                    if mp.edge == pushed.edge || mc.edge == crossed.edge || mp.edge == crossed.edge
                        || mc.edge == pushed.edge
                    {
                        return Err(Error::IllegalMove(
                            "finger collides with its mirror (handleslide configuration)".into(),
                        ));
                    }
                    Some((mp, mc))
                }
            }
        };
        // Survivor seed for rebuilding sigma afterwards.
        let seed = match &self.sigma {
            None => None,
            Some(s) => {
                let touched: BTreeSet<EId> = [pushed.edge, crossed.edge]
                    .into_iter()
                    .chain(mirror.iter().flat_map(|(p, c)| [p.edge, c.edge]))
                    .collect();
                let found = s
                    .dart_map
                    .iter()
                    .find(|(a, b)| !touched.contains(&a.edge) && !touched.contains(&b.edge))
                    .map(|(&a, &b)| (a, b));
                Some(found.ok_or_else(|| {
                    Error::internal("no untouched edge to carry the involution")
                })?)
            }
        };

        // Marks on faces about to be split (the invariant-face case of the
        // equivariant algorithm): remembered so they can be re-anchored to
        // the sigma-invariant piece afterwards.
        let locs = self.d.dart_locations();
        let mut floating: Vec<String> = Vec::new();
        for dart in std::iter::once(&pushed).chain(mirror.iter().map(|(p, _)| p)) {
            if let Some(&(f, _)) = locs.get(dart) {
                floating.extend(self.d.faces[&f].marks.iter().cloned());
            }
        }

        let none: BTreeSet<String> = BTreeSet::new();
        let step = finger_step(&mut self.d, pushed, crossed, &none)?;
        self.log.push(FingerRecord {
            pushed,
            crossed,
            mirrored: false,
        });
        self.created.insert(step.tip_face);
        self.created.insert(step.left_face);
        self.created.insert(step.right_face);
        let mut pieces: Vec<FId> = vec![step.left_face, step.right_face, step.tip_face];
        if let Some((mp, mc)) = mirror {
            let mstep = finger_step(&mut self.d, mp, mc, &none)?;
            self.log.push(FingerRecord {
                pushed: mp,
                crossed: mc,
                mirrored: true,
            });
            self.created.insert(mstep.tip_face);
            self.created.insert(mstep.left_face);
            self.created.insert(mstep.right_face);
            pieces.extend([mstep.left_face, mstep.right_face, mstep.tip_face]);
        }
        if let Some((a, b)) = seed {
            let s = reconstruct_involution(&self.d, a, b)?;
            // Re-anchor floating marks: a mark on a split invariant face
            // belongs on the unique sigma-invariant piece (the one holding
            // the fixed branch point).
            for m in floating {
                let cur = self.d.face_of_mark(&m).ok_or_else(|| {
                    Error::internal("mark lost during finger split")
                })?;
                if s.face_map[&cur] == cur {
                    continue;
                }
                let target = pieces
                    .iter()
                    .copied()
                    .filter(|f| self.d.faces.contains_key(f))
                    .find(|&f| s.face_map[&f] == f)
                    .ok_or_else(|| {
                        Error::BadInvolution(
                            "no invariant piece to carry a branch mark".into(),
                        )
                    })?;
                self.d.place_face_mark(&m, target);
            }
            self.sigma = Some(s);
        }
        Ok(step)
    }

    /// Push one full finger from the bad face `start`, entering along
    /// `entry` (the dart of the boundary edge facing the nearest marked
    /// face). Returns true on success.
    fn push_finger(&mut self, start: FId, entry: Dart, dist: &BTreeMap<FId, usize>) -> Result<()> {
        self.created.clear();
        let start_dist = dist[&start];
        let side = self.d.edges[&entry.edge].family.side().ok_or_else(|| {
            Error::IllegalMove("finger must push a curve edge".into())
        })?;
        let walk = &self.d.faces[&start].walk;
        let entry_pos = walk
            .iter()
            .position(|x| *x == entry)
            .ok_or_else(|| Error::internal("entry dart not on bad face"))?;
        // Invariant start: restrict exits to the half before the mirrored
        // entry.
        let half = match &self.sigma {
            None => None,
            Some(s) => {
                let m = s.dart_map[&entry];
                walk.iter().position(|x| *x == m)
            }
        };
        let plan = self
            .plan_exit(start, entry_pos, side, true, half, dist, start_dist)
            .ok_or_else(|| {
                Error::IllegalMove(
                    "no legal finger exit from the bad face (handleslide configuration)".into(),
                )
            })?;
        let (mut crossed, mut done) = match plan {
            StepPlan::Final(c) => (c, true),
            StepPlan::Continue(c) => (c, false),
        };
        let mut tip = entry;
        let max_steps = 4 * self.d.faces.len() + 8;
        for _ in 0..max_steps {
            let step = self.apply_pair(tip, crossed)?;
            if done {
                return Ok(());
            }
            tip = step.tip_dart;
            let locs = self.d.dart_locations();
            let (g, gpos) = locs[&tip];
            let plan = self
                .plan_exit(g, gpos, side, false, None, dist, start_dist)
                .ok_or_else(|| {
                    Error::IllegalMove(
                        "finger trapped among its own faces (handleslide configuration)".into(),
                    )
                })?;
            match plan {
                StepPlan::Final(c) => {
                    crossed = c;
                    done = true;
                }
                StepPlan::Continue(c) => {
                    crossed = c;
                }
            }
        }
        Err(Error::internal("finger exceeded its step cap"))
    }

    fn run(&mut self) -> Result<()> {
        let initial_crossings = self.d.vertices.len();
        let initial_badness: usize = self
            .d
            .faces
            .keys()
            .map(|&f| badness(&self.d, f))
            .sum();
        let cap = 10 * (initial_crossings + initial_badness).pow(2) + 16;
        for _ in 0..cap {
            let bad = bad_faces(&self.d, &self.avoid);
            if bad.is_empty() {
                return Ok(());
            }
            let dist = face_distances(&self.d, &self.avoid)?;
            // Deepest bad face, smallest id.
            let mut ranked: Vec<(usize, FId)> = bad.iter().map(|&f| (dist[&f], f)).collect();
            ranked.sort_by_key(|&(df, f)| (std::cmp::Reverse(df), f));
            let (_, target) = ranked[0];
            // Entry: boundary dart whose far face is closest to the marks.
            let locs = self.d.dart_locations();
            let mut entries: Vec<(usize, u32, Dart)> = Vec::new();
            for &dart in &self.d.faces[&target].walk {
                let far = locs[&dart.rev()].0;
                if far == target {
                    continue;
                }
                if self.d.edges[&dart.edge].family.side().is_none() {
                    continue;
                }
                if let Some(s) = &self.sigma {
                    if s.dart_map[&dart].edge == dart.edge {
                        continue;
                    }
                }
                entries.push((dist[&far], dart.edge, dart));
            }
            entries.sort();
            let Some(&(far_dist, _, entry)) = entries.first() else {
                return Err(Error::IllegalMove(
                    "bad face has no usable boundary edge".into(),
                ));
            };
            if far_dist >= dist[&target] {
                // The chosen face is a local maximum but nothing strictly
                // closer lies across a pushable edge; still push toward the
                // smallest neighbor.
            }
            self.push_finger(target, entry, &dist)?;
        }
        let residual = bad_faces(&self.d, &self.avoid);
        Err(Error::NicifyCap { residual })
    }
}

/// Make a plain diagram nice. Returns the rewritten diagram and the move
/// log (replayable in order on the input).
pub fn make_nice(
    d: &CellDiagram,
    avoid: &BTreeSet<String>,
) -> Result<(CellDiagram, Vec<FingerRecord>)> {
    let mut driver = Driver {
        d: d.clone(),
        sigma: None,
        avoid: avoid.clone(),
        log: Vec::new(),
        created: BTreeSet::new(),
    };
    driver.run()?;
    driver.d.require_valid()?;
    Ok((driver.d, driver.log))
}

/// Equivariant nicification: every finger is applied together with its
/// sigma-mirror, and the involution is rebuilt and verified along the way.
pub fn make_nice_equivariant(
    inv: &InvolutiveDiagram,
    avoid: &BTreeSet<String>,
) -> Result<(InvolutiveDiagram, Vec<FingerRecord>)> {
    let mut driver = Driver {
        d: inv.diagram.clone(),
        sigma: Some(inv.sigma.clone()),
        avoid: avoid.clone(),
        log: Vec::new(),
        created: BTreeSet::new(),
    };
    driver.run()?;
    driver.d.require_valid()?;
    let sigma = driver.sigma.take().unwrap();
    let face_projection = recompute_projection(&driver.d, &inv.base_pointed);
    let out = InvolutiveDiagram {
        diagram: driver.d,
        sigma,
        base_pointed: inv.base_pointed.clone(),
        face_projection,
        branch_names: inv.branch_names.clone(),
        vertex_lifts: inv.vertex_lifts.clone(),
    };
    let rep = crate::cover::verify_involution(&out);
    if !rep.ok() {
        return Err(Error::BadInvolution(format!(
            "nicified cover involution broken: {:?}",
            rep.violations
        )));
    }
    Ok((out, driver.log))
}

fn recompute_projection(
    diagram: &CellDiagram,
    base_pointed: &CellDiagram,
) -> BTreeMap<FId, FId> {
    // Mark faces moved; reproject by name.
    let mut out = BTreeMap::new();
    for (name, loc) in &base_pointed.basepoints {
        if let crate::cell::BasepointLoc::Face(bf) = loc {
            if let Some(cf) = diagram.face_of_mark(name) {
                out.insert(cf, *bf);
            }
        }
    }
    out
}

/// One equivariant finger move as a standalone operation: push `pushed`
/// across the listed darts together with the mirrored move.
pub fn finger_move_equivariant(
    inv: &InvolutiveDiagram,
    pushed: Dart,
    crossed: &[Dart],
) -> Result<InvolutiveDiagram> {
    let mut driver = Driver {
        d: inv.diagram.clone(),
        sigma: Some(inv.sigma.clone()),
        avoid: BTreeSet::new(),
        log: Vec::new(),
        created: BTreeSet::new(),
    };
    let mut tip = pushed;
    for (k, &c) in crossed.iter().enumerate() {
        let step = driver.apply_pair(tip, c)?;
        if k + 1 < crossed.len() {
            tip = step.tip_dart;
        }
    }
    driver.d.require_valid()?;
    let sigma = driver.sigma.take().unwrap();
    let face_projection = recompute_projection(&driver.d, &inv.base_pointed);
    let out = InvolutiveDiagram {
        diagram: driver.d,
        sigma,
        base_pointed: inv.base_pointed.clone(),
        face_projection,
        branch_names: inv.branch_names.clone(),
        vertex_lifts: inv.vertex_lifts.clone(),
    };
    let rep = crate::cover::verify_involution(&out);
    if !rep.ok() {
        return Err(Error::BadInvolution(format!(
            "equivariant finger broke the involution: {:?}",
            rep.violations
        )));
    }
    Ok(out)
}

/// Crossing count, used by tests for the monotonicity property.
pub fn crossing_count(d: &CellDiagram) -> usize {
    d.vertices
        .values()
        .filter(|k| **k == crate::cell::VertexKind::Crossing)
        .count()
}

/// Replay a move log on a fresh copy of the input.
pub fn replay(
    d: &CellDiagram,
    log: &[FingerRecord],
) -> Result<CellDiagram> {
    let mut out = d.clone();
    let none: BTreeSet<String> = BTreeSet::new();
    for rec in log {
        finger_step(&mut out, rec.pushed, rec.crossed, &none)?;
    }
    Ok(out)
}

/// Helper for callers that need the map from dart to face.
pub fn face_of_dart(d: &CellDiagram, dart: Dart) -> Option<FId> {
    let locs: HashMap<Dart, (FId, usize)> = d.dart_locations();
    locs.get(&dart).map(|&(f, _)| f)
}

#[allow(dead_code)]
fn unused(_: VId) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cover::{branched_double_cover, CoverMode};

    fn avoid(ms: &[&str]) -> BTreeSet<String> {
        ms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn already_nice_is_untouched() {
        let d = catalog::torus_curve_diagram(1, 3, 0, None).unwrap();
        let (out, log) = make_nice(&d, &avoid(&["z"])).unwrap();
        assert!(log.is_empty());
        assert!(out.isomorphic(&d));
    }

    #[test]
    fn trefoil_downstairs_nicifies() {
        let d = catalog::genus1_trefoil();
        let before = crossing_count(&d);
        let (out, log) = make_nice(&d, &avoid(&["z", "w"])).unwrap();
        let rep = out.check_niceness(&avoid(&["z", "w"]));
        assert!(rep.nice, "bad faces: {:?}", rep.bad_faces);
        assert!(crossing_count(&out) >= before);
        assert!(!log.is_empty());
        // Replay reproduces the output.
        let replayed = replay(&d, &log).unwrap();
        assert!(replayed.isomorphic(&out));
        // HFK of the trefoil: 3, now computable.
        let c = crate::floer::build_complex(&out, &avoid(&["z", "w"]), None, Some(("z", "w")))
            .unwrap();
        let h = crate::floer::homology_f2(&c);
        assert_eq!(h.total, 3);
        let lv = h.per_level.unwrap();
        let nonzero: Vec<(i64, usize)> =
            lv.iter().filter(|(_, &d)| d > 0).map(|(&l, &d)| (l, d)).collect();
        assert_eq!(nonzero.len(), 3, "three Alexander levels: {:?}", nonzero);
        assert!(nonzero.iter().all(|&(_, d)| d == 1));
        // HF-hat(S^3) = 1 via the z-avoiding differential, which needs the
        // diagram nice with only z exempt.
        let (outz, _) = make_nice(&d, &avoid(&["z"])).unwrap();
        let cz = crate::floer::build_complex(&outz, &avoid(&["z"]), None, None).unwrap();
        assert_eq!(crate::floer::homology_f2(&cz).total, 1);
    }

    #[test]
    fn trefoil_cover_nicifies_equivariantly() {
        let d = catalog::genus1_trefoil();
        let inv =
            branched_double_cover(&d, &["z".into(), "w".into()], CoverMode::KnotDouble).unwrap();
        let (nice, log) = make_nice_equivariant(&inv, &avoid(&["z", "w"])).unwrap();
        let rep = nice.diagram.check_niceness(&avoid(&["z", "w"]));
        assert!(rep.nice, "bad faces: {:?}", rep.bad_faces);
        assert!(!log.is_empty());
        // B(H) of the trefoil: HFK-hat(Sigma(K), K)-style complex upstairs.
        let c = crate::floer::build_complex(
            &nice.diagram,
            &avoid(&["z", "w"]),
            Some(&nice.sigma),
            Some(("z", "w")),
        )
        .unwrap();
        assert!(crate::floer::homology_f2(&c).total >= 3);
    }

    #[test]
    fn unknot_cover_hfz2_mode() {
        // Separate z, w on the one-crossing diagram, then cover; make nice
        // avoiding z only, so the second branch face gets nicified by the
        // invariant-face double finger with the mark following the fixed
        // point.
        let mut d = catalog::genus1_unknot();
        let marks_left: BTreeSet<String> = ["z".to_string()].into_iter().collect();
        crate::moves::finger_move(&mut d, Dart::fwd(1), &[Dart::fwd(0)], &marks_left).unwrap();
        let inv =
            branched_double_cover(&d, &["z".into(), "w".into()], CoverMode::KnotDouble).unwrap();
        let (nice, _) = make_nice_equivariant(&inv, &avoid(&["z"])).unwrap();
        let rep = nice.diagram.check_niceness(&avoid(&["z"]));
        assert!(rep.nice, "bad: {:?}", rep.bad_faces);
        let c = crate::floer::build_complex(&nice.diagram, &avoid(&["z"]), Some(&nice.sigma), None)
            .unwrap();
        // HF-hat of S^3 via the cover: dimension 1.
        assert_eq!(crate::floer::homology_f2(&c).total, 1);
    }
}
