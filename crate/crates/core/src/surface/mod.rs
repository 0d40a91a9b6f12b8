//! Oriented surfaces with boundary built from polygonal faces glued along
//! sides, in a half-edge style representation.
//!
//! Every face lists its sides counterclockwise. A side is either glued to a
//! twin side (orientation reversing) or free; free sides carry the letter of
//! a target word they map to, so boundary components can be traced back to
//! the chain.

mod cover;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{kernel_mod_prime, IntMatrix};
use crate::scl::{Extremal, SclProblem};
use crate::words::CyclicWord;

pub use cover::CoverSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("malformed solution: {0}")]
    MalformedSolution(String),
    #[error("cover assignment does not sum to zero on a component")]
    UnbalancedAssignment,
    #[error("no positive-genus cyclic cover up to degree {0}")]
    SearchExhausted(u64),
    #[error("component has genus zero")]
    NoGenus,
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("invalid surface: {0}")]
    Invalid(String),
}

/// A loop the boundary maps to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub word: CyclicWord,
    pub text: String,
}

/// Letter `index` of target `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub target: usize,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceKind {
    Rectangle,
    Polygon,
    Annulus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub kind: FaceKind,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub face: usize,
    pub twin: Option<usize>,
    pub label: Option<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinatorialSurface {
    targets: Vec<Target>,
    faces: Vec<Face>,
    sides: Vec<Side>,
}

/// A boundary circle and how it wraps its target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryComponent {
    pub target: usize,
    pub degree: usize,
    /// Free sides in boundary order, starting from the smallest id.
    pub sides: Vec<usize>,
    pub component: usize,
}

/// Summary of one connected component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub faces: Vec<usize>,
    pub euler_characteristic: i64,
    pub boundary: usize,
    pub genus: i64,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl CombinatorialSurface {
    pub fn new(targets: Vec<Target>) -> Self {
        CombinatorialSurface { targets, faces: Vec::new(), sides: Vec::new() }
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn count_faces(&self, kind: FaceKind) -> usize {
        self.faces.iter().filter(|f| f.kind == kind).count()
    }

    /// Next side counterclockwise around the same face.
    pub fn next(&self, s: usize) -> usize {
        let f = &self.faces[self.sides[s].face];
        f.start + (s - f.start + 1) % f.len
    }

    pub fn twin(&self, s: usize) -> Option<usize> {
        self.sides[s].twin
    }

    fn push_face(&mut self, kind: FaceKind, labels: &[Option<Label>]) -> usize {
        let face = self.faces.len();
        let start = self.sides.len();
        self.faces.push(Face { kind, start, len: labels.len() });
        self.sides.extend(labels.iter().map(|&label| Side { face, twin: None, label }));
        face
    }

    fn set_twins(&mut self, a: usize, b: usize) -> Result<(), SurfaceError> {
        if a == b || self.sides[a].twin.is_some() || self.sides[b].twin.is_some() {
            return Err(SurfaceError::MalformedSolution(format!("side {a} or {b} already glued")));
        }
        self.sides[a].twin = Some(b);
        self.sides[b].twin = Some(a);
        Ok(())
    }

    /// Adds a rectangle whose free sides carry `p` and `q`; returns its two
    /// vertical sides `[after p, after q]`.
    pub fn add_rectangle(&mut self, p: Label, q: Label) -> [usize; 2] {
        let f = self.push_face(FaceKind::Rectangle, &[Some(p), None, Some(q), None]);
        let s = self.faces[f].start;
        [s + 1, s + 3]
    }

    /// Adds a polygon whose sides, in order, are glued to the given free
    /// unlabelled sides.
    pub fn add_polygon(&mut self, glued_to: &[usize]) -> Result<usize, SurfaceError> {
        if glued_to.len() < 2 {
            return Err(SurfaceError::MalformedSolution("polygon with fewer than two sides".into()));
        }
        let f = self.push_face(FaceKind::Polygon, &vec![None; glued_to.len()]);
        let start = self.faces[f].start;
        for (i, &v) in glued_to.iter().enumerate() {
            if self.sides[v].label.is_some() {
                return Err(SurfaceError::MalformedSolution(format!("polygon glued to letter side {v}")));
            }
            self.set_twins(start + i, v)?;
        }
        Ok(f)
    }

    /// Checks twin symmetry and that every free side is a labelled letter
    /// consistent with its successor on the boundary.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        for (s, side) in self.sides.iter().enumerate() {
            match side.twin {
                Some(t) if t >= self.sides.len() || self.sides[t].twin != Some(s) || t == s => {
                    return Err(SurfaceError::Invalid(format!("twin of side {s} is inconsistent")));
                }
                None if side.label.is_none() => {
                    return Err(SurfaceError::Invalid(format!("side {s} is free but unlabelled")));
                }
                _ => {}
            }
            if let Some(l) = side.label {
                if l.target >= self.targets.len() || l.index >= self.targets[l.target].word.len() {
                    return Err(SurfaceError::Invalid(format!("side {s} has an out-of-range label")));
                }
            }
        }
        for f in &self.faces {
            if f.len == 0 || f.start + f.len > self.sides.len() {
                return Err(SurfaceError::Invalid("face side range out of bounds".into()));
            }
        }
        for b in self.trace_boundary() {
            let word_len = self.targets[b.target].word.len();
            for (k, &s) in b.sides.iter().enumerate() {
                let l = self.sides[s].label.unwrap();
                let first = self.sides[b.sides[0]].label.unwrap();
                if l.target != b.target || l.index != (first.index + k) % word_len {
                    return Err(SurfaceError::Invalid(format!("boundary through side {s} does not read its target")));
                }
            }
            if b.sides.len() % word_len != 0 {
                return Err(SurfaceError::Invalid("boundary length is not a multiple of its word".into()));
            }
        }
        Ok(())
    }

    /// The free side following free side `b` along the boundary.
    pub fn boundary_next(&self, b: usize) -> usize {
        let mut n = self.next(b);
        while let Some(t) = self.sides[n].twin {
            n = self.next(t);
        }
        n
    }

    fn trace_boundary(&self) -> Vec<BoundaryComponent> {
        let comp = self.face_components();
        let mut seen = vec![false; self.sides.len()];
        let mut out = Vec::new();
        for s in 0..self.sides.len() {
            if seen[s] || self.sides[s].twin.is_some() {
                continue;
            }
            let mut sides = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                sides.push(x);
                x = self.boundary_next(x);
            }
            let target = self.sides[s].label.map_or(0, |l| l.target);
            let len = self.targets.get(target).map_or(1, |t| t.word.len());
            out.push(BoundaryComponent {
                target,
                degree: sides.len() / len,
                sides,
                component: comp[self.sides[s].face],
            });
        }
        out
    }

    pub fn boundary_components(&self) -> Vec<BoundaryComponent> {
        self.trace_boundary()
    }

    pub fn is_closed(&self) -> bool {
        self.sides.iter().all(|s| s.twin.is_some())
    }

    /// Component index of every face; components are numbered by their
    /// smallest face.
    pub fn face_components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.faces.len());
        for side in &self.sides {
            if let Some(t) = side.twin {
                uf.union(side.face, self.sides[t].face);
            }
        }
        let mut ids = BTreeMap::new();
        (0..self.faces.len())
            .map(|f| {
                let r = uf.find(f);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect()
    }

    pub fn num_components(&self) -> usize {
        self.face_components().iter().max().map_or(0, |m| m + 1)
    }

    /// Vertex class of every side's starting corner.
    pub fn vertex_of_corner(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.sides.len());
        for (h, side) in self.sides.iter().enumerate() {
            if let Some(t) = side.twin {
                uf.union(h, self.next(t));
                uf.union(self.next(h), t);
            }
        }
        let mut ids = BTreeMap::new();
        (0..self.sides.len())
            .map(|h| {
                let r = uf.find(h);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect()
    }

    fn cell_counts(&self) -> (Vec<i64>, Vec<i64>, Vec<i64>, usize) {
        let comp = self.face_components();
        let ncomp = comp.iter().max().map_or(0, |m| m + 1);
        let mut v = vec![0i64; ncomp];
        let mut e = vec![0i64; ncomp];
        let mut f = vec![0i64; ncomp];
        for (i, _) in self.faces.iter().enumerate() {
            f[comp[i]] += 1;
        }
        for (s, side) in self.sides.iter().enumerate() {
            match side.twin {
                Some(t) if t < s => {}
                _ => e[comp[side.face]] += 1,
            }
        }
        let corner = self.vertex_of_corner();
        let mut counted = vec![false; self.sides.len()];
        for (s, side) in self.sides.iter().enumerate() {
            if !counted[corner[s]] {
                counted[corner[s]] = true;
                v[comp[side.face]] += 1;
            }
        }
        (v, e, f, ncomp)
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let (v, e, f, _) = self.cell_counts();
        v.iter().sum::<i64>() - e.iter().sum::<i64>() + f.iter().sum::<i64>()
    }

    /// `Σ min(0, χ)` over components.
    pub fn chi_minus(&self) -> i64 {
        self.components().iter().map(|c| c.euler_characteristic.min(0)).sum()
    }

    pub fn components(&self) -> Vec<ComponentSummary> {
        let (v, e, f, ncomp) = self.cell_counts();
        let comp = self.face_components();
        let mut boundary = vec![0usize; ncomp];
        for b in self.trace_boundary() {
            boundary[b.component] += 1;
        }
        (0..ncomp)
            .map(|c| {
                let chi = v[c] - e[c] + f[c];
                ComponentSummary {
                    faces: (0..self.faces.len()).filter(|&i| comp[i] == c).collect(),
                    euler_characteristic: chi,
                    boundary: boundary[c],
                    genus: (2 - chi - boundary[c] as i64) / 2,
                }
            })
            .collect()
    }

    /// Genus of every component from `χ = 2 − 2g − b`.
    pub fn genera(&self) -> Vec<i64> {
        self.components().iter().map(|c| c.genus).collect()
    }

    /// `dim H₁(S; 𝔽_p)` from the cellular chain complex, for an odd prime `p`.
    pub fn first_betti_number(&self, p: i64) -> usize {
        let corner = self.vertex_of_corner();
        let nv = corner.iter().max().map_or(0, |m| m + 1);
        let mut edge_of = vec![0usize; self.sides.len()];
        let mut sign = vec![1i64; self.sides.len()];
        let mut ne = 0;
        for (s, side) in self.sides.iter().enumerate() {
            match side.twin {
                Some(t) if t < s => {
                    edge_of[s] = edge_of[t];
                    sign[s] = -1;
                }
                _ => {
                    edge_of[s] = ne;
                    ne += 1;
                }
            }
        }
        let mut d1 = IntMatrix::<i64>::zeros(nv, ne);
        for s in 0..self.sides.len() {
            if sign[s] == 1 {
                let (a, b) = (corner[s], corner[self.next(s)]);
                if a != b {
                    d1.set(b, edge_of[s], d1.get(b, edge_of[s]) + 1);
                    d1.set(a, edge_of[s], d1.get(a, edge_of[s]) - 1);
                }
            }
        }
        let mut d2 = IntMatrix::<i64>::zeros(ne, self.faces.len());
        for (s, side) in self.sides.iter().enumerate() {
            let e = edge_of[s];
            d2.set(e, side.face, d2.get(e, side.face) + sign[s]);
        }
        let (r1, _) = kernel_mod_prime(&d1, &p);
        let (r2, _) = kernel_mod_prime(&d2, &p);
        ne - r1 - r2
    }

    /// Disjoint union; targets of `other` are appended after ours.
    pub fn disjoint_union(&self, other: &CombinatorialSurface) -> CombinatorialSurface {
        let mut out = self.clone();
        let (nt, nf, ns) = (self.targets.len(), self.faces.len(), self.sides.len());
        out.targets.extend(other.targets.iter().cloned());
        out.faces.extend(other.faces.iter().map(|f| Face { kind: f.kind, start: f.start + ns, len: f.len }));
        out.sides.extend(other.sides.iter().map(|s| Side {
            face: s.face + nf,
            twin: s.twin.map(|t| t + ns),
            label: s.label.map(|l| Label { target: l.target + nt, index: l.index }),
        }));
        out
    }

    /// Disjoint union of surfaces that all carry the given targets.
    pub fn union_of(targets: Vec<Target>, parts: &[CombinatorialSurface]) -> Result<CombinatorialSurface, SurfaceError> {
        let mut out = CombinatorialSurface::new(targets);
        for part in parts {
            if part.targets != out.targets {
                return Err(SurfaceError::Invalid("parts carry different targets".into()));
            }
            let (nf, ns) = (out.faces.len(), out.sides.len());
            out.faces.extend(part.faces.iter().map(|f| Face { kind: f.kind, start: f.start + ns, len: f.len }));
            out.sides.extend(part.sides.iter().map(|s| Side { face: s.face + nf, twin: s.twin.map(|t| t + ns), label: s.label }));
        }
        Ok(out)
    }

    /// Every connected component as a surface of its own.
    pub fn split_components(&self) -> Vec<CombinatorialSurface> {
        let comp = self.face_components();
        let n = comp.iter().max().map_or(0, |m| m + 1);
        let mut faces = vec![Vec::new(); n];
        for (f, &c) in comp.iter().enumerate() {
            faces[c].push(f);
        }
        faces.iter().map(|fs| self.restrict(fs)).collect()
    }

    /// `k` disjoint copies.
    pub fn disjoint_copies(&self, k: usize) -> CombinatorialSurface {
        assert!(k >= 1, "at least one copy");
        cover::lift(self, &vec![0; self.sides.len()], k)
    }

    /// The faces of one connected component, renumbered; targets are kept.
    pub fn extract_component(&self, component: usize) -> CombinatorialSurface {
        let comp = self.face_components();
        let keep: Vec<usize> = (0..self.faces.len()).filter(|&f| comp[f] == component).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, faces: &[usize]) -> CombinatorialSurface {
        let mut new_side = vec![usize::MAX; self.sides.len()];
        let mut out = CombinatorialSurface::new(self.targets.clone());
        for (nf, &f) in faces.iter().enumerate() {
            let face = &self.faces[f];
            out.faces.push(Face { kind: face.kind, start: out.sides.len(), len: face.len });
            for s in face.start..face.start + face.len {
                new_side[s] = out.sides.len();
                out.sides.push(Side { face: nf, twin: self.sides[s].twin, label: self.sides[s].label });
            }
        }
        for side in &mut out.sides {
            side.twin = side.twin.map(|t| new_side[t]);
        }
        out
    }

    /// Glues two boundary circles through a new annulus face. The circles
    /// must be distinct; any target words and lengths are allowed.
    pub fn glue_boundaries(&mut self, first: &[usize], second: &[usize]) -> Result<(), SurfaceError> {
        if first.iter().chain(second).any(|&s| self.sides[s].twin.is_some()) {
            return Err(SurfaceError::Invalid("gluing along a side that is not free".into()));
        }
        let labels: Vec<Option<Label>> = vec![None; first.len() + second.len() + 2];
        let f = self.push_face(FaceKind::Annulus, &labels);
        let start = self.faces[f].start;
        let k1 = first.len();
        for (i, &h) in first.iter().rev().enumerate() {
            self.set_twins(start + i, h)?;
        }
        let x = start + k1;
        for (i, &h) in second.iter().rev().enumerate() {
            self.set_twins(x + 1 + i, h)?;
        }
        let y = x + 1 + second.len();
        self.set_twins(x, y)
    }

    /// Regular cyclic cover determined by `spec`.
    pub fn cyclic_cover(&self, spec: &CoverSpec) -> Result<CombinatorialSurface, SurfaceError> {
        cover::cyclic_cover(self, spec)
    }

    /// Degree-two cover in which every boundary circle has two preimages of
    /// its own degree. Every component must have positive genus.
    pub fn pairing_cover(&self) -> Result<CombinatorialSurface, SurfaceError> {
        cover::pairing_cover(self)
    }

    /// For a connected surface: `self` if it has positive genus, else the
    /// first connected positive-genus cyclic cover of degree at most 12.
    pub fn ensure_positive_genus(&self) -> Result<CombinatorialSurface, SurfaceError> {
        cover::ensure_positive_genus(self, cover::GENUS_SEARCH_BOUND)
    }

    pub fn export(&self) -> SurfaceExport {
        let boundary = self
            .boundary_components()
            .into_iter()
            .map(|b| ExportedBoundary {
                target: b.target,
                word: self.targets[b.target].text.clone(),
                degree: b.degree,
                component: b.component,
            })
            .collect();
        let components = self
            .components()
            .into_iter()
            .map(|c| ExportedComponent {
                genus: c.genus,
                euler_characteristic: c.euler_characteristic,
                boundary: c.boundary,
                faces: c.faces.len(),
            })
            .collect();
        SurfaceExport {
            surface: self.clone(),
            euler_characteristic: self.euler_characteristic(),
            boundary,
            components,
        }
    }
}

/// Surface plus derived data, as exported to JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceExport {
    pub surface: CombinatorialSurface,
    pub euler_characteristic: i64,
    pub boundary: Vec<ExportedBoundary>,
    pub components: Vec<ExportedComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedBoundary {
    pub target: usize,
    pub word: String,
    pub degree: usize,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedComponent {
    pub genus: i64,
    pub euler_characteristic: i64,
    pub boundary: usize,
    pub faces: usize,
}

impl SurfaceExport {
    /// Validates the embedded surface and checks the derived data against it.
    pub fn into_surface(self) -> Result<CombinatorialSurface, SurfaceError> {
        self.surface.validate()?;
        if self.surface.export() != self {
            return Err(SurfaceError::Invalid("derived data does not match the surface".into()));
        }
        Ok(self.surface)
    }
}

/// Targets for the terms of an encoding, rendered over its alphabet.
pub fn problem_targets(problem: &SclProblem) -> Vec<Target> {
    problem
        .terms()
        .iter()
        .map(|(w, _)| Target { word: w.clone(), text: w.render(problem.alphabet()) })
        .collect()
}

/// Builds the surface of an integral extremal solution: `x_r` copies of each
/// rectangle and one polygon per cycle copy, with polygon sides matched to
/// rectangle copies in increasing order.
pub fn assemble(problem: &SclProblem, extremal: &Extremal) -> Result<CombinatorialSurface, SurfaceError> {
    let count = |v: &BigInt| -> Result<usize, SurfaceError> {
        v.to_usize().ok_or_else(|| SurfaceError::MalformedSolution(format!("weight {v} is not a small nonnegative integer")))
    };
    if extremal.rectangles.len() != problem.rectangles().len() {
        return Err(SurfaceError::MalformedSolution("rectangle count mismatch".into()));
    }
    let mut s = CombinatorialSurface::new(problem_targets(problem));
    let label = |id: usize| {
        let p = problem.positions()[id];
        Label { target: p.word, index: p.index }
    };
    let mut verticals: Vec<Vec<usize>> = vec![Vec::new(); problem.num_nodes()];
    for (r, &(p, q)) in problem.rectangles().iter().enumerate() {
        for _ in 0..count(&extremal.rectangles[r])? {
            let [vp, vq] = s.add_rectangle(label(p), label(q));
            verticals[2 * r].push(vp);
            verticals[2 * r + 1].push(vq);
        }
    }
    let mut used = vec![0usize; problem.num_nodes()];
    for (cycle, t) in &extremal.polygons {
        for _ in 0..count(t)? {
            let mut sides = Vec::with_capacity(cycle.len());
            for &v in cycle {
                let Some(&side) = verticals.get(v).and_then(|vs| vs.get(used[v])) else {
                    return Err(SurfaceError::MalformedSolution(format!("turn node {v} used too often")));
                };
                used[v] += 1;
                sides.push(side);
            }
            s.add_polygon(&sides)?;
        }
    }
    if used.iter().zip(&verticals).any(|(u, v)| *u != v.len()) {
        return Err(SurfaceError::MalformedSolution("some vertical sides are unglued".into()));
    }
    s.validate()?;
    Ok(s)
}

/// Surface of a letter pairing: `partner` is a fixed-point-free involution
/// on letter slots pairing inverse letters, `next` the successor of each slot
/// in its copy of its word, and `labels` the letter each slot reads.
pub fn from_pairing(
    targets: Vec<Target>,
    labels: &[Label],
    next: &[usize],
    partner: &[usize],
) -> Result<CombinatorialSurface, SurfaceError> {
    let n = labels.len();
    let mut s = CombinatorialSurface::new(targets);
    let mut vertical = vec![usize::MAX; n];
    for a in 0..n {
        let b = partner[a];
        if b == a || partner[b] != a {
            return Err(SurfaceError::MalformedSolution("pairing is not a fixed-point-free involution".into()));
        }
        if a < b {
            let [va, vb] = s.add_rectangle(labels[a], labels[b]);
            vertical[a] = va;
            vertical[b] = vb;
        }
    }
    let mut seen = vec![false; n];
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let mut sides = Vec::new();
        let mut x = a;
        while !seen[x] {
            seen[x] = true;
            sides.push(vertical[x]);
            x = partner[next[x]];
        }
        s.add_polygon(&sides)?;
    }
    s.validate()?;
    Ok(s)
}

/// Total degree with which the boundary wraps each target.
pub fn boundary_degrees(s: &CombinatorialSurface) -> Vec<usize> {
    let mut out = vec![0; s.targets().len()];
    for b in s.boundary_components() {
        out[b.target] += b.degree;
    }
    out
}
