//! Builds a closed surface realizing the norm of a class in a graph of free
//! groups, or reports a Baumslag–Solitar subgroup that blocks the
//! construction.
//!
//! Extremal surfaces over the vertices are taken to a common degree by
//! disjoint copies. Edges are then processed by name: the boundary circles
//! over both ends of an edge are brought to a common degree `N` by cyclic
//! covers and glued in pairs through annuli. Every step multiplies all
//! components by the same factor, so the surface keeps representing a fixed
//! multiple of the class.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{End, EdgeEnd, GraphError, GraphOfGroups, H2Class};
use crate::scl::{build_encoding, solve_scl, SclError};
use crate::surface::{
    assemble, BoundaryComponent, CombinatorialSurface, CoverSpec, SurfaceError, SurfaceExport, Target,
};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlueError {
    #[error("class is not in the Mayer–Vietoris kernel")]
    NotInKernel,
    #[error("class is zero and the graph shows no Baumslag–Solitar subgroup")]
    ZeroClass,
    #[error(transparent)]
    Scl(#[from] SclError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl From<GraphError> for GlueError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NotInKernel => GlueError::NotInKernel,
            other => GlueError::Internal(other.to_string()),
        }
    }
}

/// `t·x^p·t⁻¹ = x^q` inside the graph of groups; `BS(±1, ±1)` contains `ℤ⊕ℤ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonHyperbolicWitness {
    pub p: i64,
    pub q: i64,
    pub edge: String,
    pub explanation: String,
}

impl NonHyperbolicWitness {
    pub fn is_zxz(&self) -> bool {
        self.p.abs() == 1 && self.q.abs() == 1
    }
}

impl fmt::Display for NonHyperbolicWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zxz() {
            write!(f, "Z+Z subgroup at edge {}: {}", self.edge, self.explanation)
        } else {
            write!(f, "BS({},{}) subgroup at edge {}: {}", self.p, self.q, self.edge, self.explanation)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSurfaceResult {
    pub surface: CombinatorialSurface,
    /// The surface represents `multiple · A`.
    pub multiple: BigInt,
    pub euler_characteristic: i64,
    pub chi_minus: i64,
    pub genera: Vec<i64>,
    pub norm: Rational,
    /// `−2χ⁻/n`.
    pub surface_norm: Rational,
    /// Signed total wrapping of the glued circles over each edge end.
    pub edge_wrapping: Vec<(EdgeEnd, BigInt)>,
    pub log: Vec<String>,
}

impl ClosedSurfaceResult {
    pub fn certificate_holds(&self) -> bool {
        self.surface_norm == self.norm
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GlueOutcome {
    Closed(Box<ClosedSurfaceResult>),
    Witness { witness: NonHyperbolicWitness, log: Vec<String> },
    NormZero { log: Vec<String> },
}

impl GlueOutcome {
    pub fn log(&self) -> &[String] {
        match self {
            GlueOutcome::Closed(r) => &r.log,
            GlueOutcome::Witness { log, .. } | GlueOutcome::NormZero { log } => log,
        }
    }
}

/// Self-edges whose attaching words are powers of one root (up to
/// conjugacy and inversion): `t·r^p·t⁻¹ = r^{±q}`.
pub fn witness_scan(g: &GraphOfGroups) -> Option<NonHyperbolicWitness> {
    for e in g.edges() {
        if e.from != e.to {
            continue;
        }
        let (rf, p) = e.cyclic_from.root();
        let (rt, q) = e.cyclic_to.root();
        let q = if rt == rf {
            q as i64
        } else if rt == rf.inverse() {
            -(q as i64)
        } else {
            continue;
        };
        let al = &g.vertices()[e.from].alphabet;
        let r = rf.render(al);
        return Some(NonHyperbolicWitness {
            p: p as i64,
            q,
            edge: e.name.clone(),
            explanation: format!("{n} {} {n}^-1 = {}", power(&r, p as i64), power(&r, q), n = e.name),
        });
    }
    None
}

fn power(x: &str, k: i64) -> String {
    match (k, x.chars().count()) {
        (1, _) => x.to_string(),
        (_, 1) => format!("{x}^{k}"),
        _ => format!("({x})^{k}"),
    }
}

struct VertexSurface {
    surface: CombinatorialSurface,
    ends: Vec<EdgeEnd>,
    degree: u64,
}

struct Builder<'a> {
    g: &'a GraphOfGroups,
    a: Vec<BigInt>,
    targets: Vec<Target>,
    target_end: Vec<EdgeEnd>,
    surface: CombinatorialSurface,
    multiple: u64,
    wrapping: Vec<(EdgeEnd, BigInt)>,
    log: Vec<String>,
}

fn internal(msg: impl Into<String>) -> GlueError {
    GlueError::Internal(msg.into())
}

fn lcm_all(values: impl Iterator<Item = u64>) -> u64 {
    values.fold(1, |acc, x| acc.lcm(&x))
}

fn vertex_surface(g: &GraphOfGroups, a: &[BigInt], v: usize) -> Result<Option<VertexSurface>, GlueError> {
    let terms = g.formal_boundary(a, v);
    if terms.is_empty() {
        return Ok(None);
    }
    let words: Vec<_> = terms.iter().map(|(_, w, c)| (w.clone(), c.clone())).collect();
    let problem = build_encoding(&g.vertices()[v].alphabet, &words)?;
    let result = solve_scl(&problem)?;
    let surface = assemble(&problem, &result.extremal)?;
    let degree = result.extremal.degree.to_u64().ok_or_else(|| internal("extremal degree too large"))?;
    let wraps = crate::surface::boundary_degrees(&surface);
    for ((_, _, c), got) in terms.iter().zip(wraps) {
        if BigInt::from(got) != c * BigInt::from(degree) {
            return Err(internal("extremal surface wraps its chain with the wrong degree"));
        }
    }
    let expected = -Rational::from_integer(BigInt::from(surface.chi_minus())) / Rational::from_integer(BigInt::from(2 * degree));
    if expected != result.value {
        return Err(internal("extremal surface does not attain the scl value"));
    }
    Ok(Some(VertexSurface { surface, ends: terms.iter().map(|t| t.0).collect(), degree }))
}

impl<'a> Builder<'a> {
    fn new(g: &'a GraphOfGroups, a: Vec<BigInt>) -> Result<Self, GlueError> {
        let pieces: Vec<Result<Option<VertexSurface>, GlueError>> =
            (0..g.vertices().len()).into_par_iter().map(|v| vertex_surface(g, &a, v)).collect();
        let mut log = Vec::new();
        let mut found = Vec::new();
        for (v, piece) in pieces.into_iter().enumerate() {
            if let Some(p) = piece? {
                log.push(format!(
                    "vertex {}: extremal surface of degree {}, chi = {}, {} boundary circle(s)",
                    g.vertices()[v].name,
                    p.degree,
                    p.surface.euler_characteristic(),
                    p.surface.boundary_components().len()
                ));
                found.push(p);
            }
        }
        let n = lcm_all(found.iter().map(|p| p.degree));
        log.push(format!("common degree n = {n}"));
        let mut targets = Vec::new();
        let mut target_end = Vec::new();
        let mut surface = CombinatorialSurface::new(Vec::new());
        for p in found {
            target_end.extend(p.ends.iter().copied());
            targets.extend(p.surface.targets().iter().cloned());
            surface = surface.disjoint_union(&p.surface.disjoint_copies((n / p.degree) as usize));
        }
        Ok(Builder { g, a, targets, target_end, surface, multiple: n, wrapping: Vec::new(), log })
    }

    fn end_of(&self, b: &BoundaryComponent) -> EdgeEnd {
        self.target_end[b.target]
    }

    fn on_edge(&self, b: &BoundaryComponent, e: usize) -> bool {
        self.end_of(b).edge == e
    }

    fn scale(&mut self, k: u64) -> Result<(), GlueError> {
        self.multiple = self.multiple.checked_mul(k).ok_or_else(|| internal("multiple overflows"))?;
        Ok(())
    }

    fn rebuild(&mut self, parts: &[CombinatorialSurface]) -> Result<(), GlueError> {
        self.surface = CombinatorialSurface::union_of(self.targets.clone(), parts)?;
        Ok(())
    }

    /// Hyperbolic components whose circles over `e` do not yet come in
    /// pairs of equal end and degree.
    fn unpaired(&self, part: &CombinatorialSurface, e: usize) -> bool {
        if part.euler_characteristic() >= 0 {
            return false;
        }
        let mut counts: BTreeMap<(EdgeEnd, usize), usize> = BTreeMap::new();
        for b in part.boundary_components().iter().filter(|b| self.on_edge(b, e)) {
            *counts.entry((self.end_of(b), b.degree)).or_default() += 1;
        }
        counts.values().any(|c| c % 2 == 1)
    }

    fn annulus_witness(&self, part: &CombinatorialSurface, e: usize) -> Option<NonHyperbolicWitness> {
        let bs = part.boundary_components();
        if part.euler_characteristic() != 0 || bs.len() != 2 || !bs.iter().all(|b| self.on_edge(b, e)) {
            return None;
        }
        let degree = |end: End| bs.iter().find(|b| self.end_of(b).end == end).map(|b| b.degree as i64);
        let (df, dt) = (degree(End::From)?, degree(End::To)?);
        let edge = &self.g.edges()[e];
        let al = &self.g.vertices()[edge.from].alphabet;
        let x = edge.cyclic_from.render(al);
        Some(NonHyperbolicWitness {
            p: dt,
            q: df,
            edge: edge.name.clone(),
            explanation: format!(
                "an annulus over the vertex joins both ends of {n}, so s {} s^-1 = {} for s = g{n} with g in the vertex group",
                power(&x, dt),
                power(&x, df),
                n = edge.name
            ),
        })
    }

    fn glue_edge(&mut self, e: usize) -> Result<Option<NonHyperbolicWitness>, GlueError> {
        let name = self.g.edges()[e].name.clone();
        let coeff = self.a[2 * e].abs();
        if coeff.is_zero() {
            self.log.push(format!("edge {name}: class vanishes, nothing to glue"));
            return Ok(None);
        }
        for part in self.surface.split_components() {
            if let Some(w) = self.annulus_witness(&part, e) {
                self.log.push(format!("edge {name}: {w}"));
                return Ok(Some(w));
            }
        }
        let degrees: Vec<usize> =
            self.surface.boundary_components().iter().filter(|b| self.on_edge(b, e)).map(|b| b.degree).collect();
        if degrees.windows(2).all(|w| w[0] == w[1]) {
            self.log.push(format!("edge {name}: all {} circle(s) have degree {}, no cover needed", degrees.len(), degrees[0]));
        } else {
            self.pair_circles(e, &name)?;
            self.equalize_degrees(e, &name)?;
        }
        self.glue_families(e, &name)?;
        Ok(None)
    }

    /// Makes every hyperbolic component's circles over `e` come in pairs,
    /// first passing to positive genus where needed.
    fn pair_circles(&mut self, e: usize, name: &str) -> Result<(), GlueError> {
        let parts = self.surface.split_components();
        let needy: Vec<bool> = parts.iter().map(|p| self.unpaired(p, e)).collect();
        if !needy.iter().any(|&x| x) {
            return Ok(());
        }
        let mut lifted = Vec::new();
        let mut degrees = Vec::new();
        for (p, &need) in parts.iter().zip(&needy) {
            if need && p.genera()[0] == 0 {
                let cover = p.ensure_positive_genus()?;
                let k = (cover.euler_characteristic() / p.euler_characteristic()) as u64;
                degrees.push(k);
                lifted.push(Some((cover, k)));
            } else {
                lifted.push(None);
            }
        }
        let k = lcm_all(degrees.into_iter());
        let mut parts = if k > 1 {
            self.log.push(format!("edge {name}: positive-genus covers, common degree {k}"));
            let mut out = Vec::new();
            for (p, l) in parts.iter().zip(lifted) {
                match l {
                    Some((cover, d)) => out.push(cover.disjoint_copies((k / d) as usize)),
                    None => out.push(p.disjoint_copies(k as usize)),
                }
            }
            self.rebuild(&out)?;
            self.scale(k)?;
            self.surface.split_components()
        } else {
            parts
        };
        for p in parts.iter_mut() {
            *p = if self.unpaired(p, e) { p.pairing_cover()? } else { p.disjoint_copies(2) };
        }
        self.log.push(format!("edge {name}: pairing double cover"));
        self.rebuild(&parts)?;
        self.scale(2)?;
        if self.surface.split_components().iter().any(|p| self.unpaired(p, e)) {
            return Err(internal("pairing cover left unpaired circles"));
        }
        Ok(())
    }

    /// Cyclic covers of degree `N = lcm` of the circle degrees over `e`, with
    /// values `±d` on paired circles, after which every such circle has
    /// degree exactly `N`.
    fn equalize_degrees(&mut self, e: usize, name: &str) -> Result<(), GlueError> {
        let parts = self.surface.split_components();
        let n = lcm_all(
            self.surface.boundary_components().iter().filter(|b| self.on_edge(b, e)).map(|b| b.degree as u64),
        );
        let modulus = n as i64;
        let mut out = Vec::new();
        let mut specs = Vec::new();
        for p in &parts {
            let bs = p.boundary_components();
            if !bs.iter().any(|b| self.on_edge(b, e)) {
                out.push(p.disjoint_copies(n as usize));
                continue;
            }
            let mut phi = vec![0i64; bs.len()];
            if p.euler_characteristic() == 0 {
                // annulus: one circle over e, the other absorbs the opposite value
                let i = bs.iter().position(|b| self.on_edge(b, e)).unwrap();
                let d = bs[i].degree as i64;
                phi[i] = d % modulus;
                phi[1 - i] = (modulus - d % modulus) % modulus;
            } else {
                let mut groups: BTreeMap<(EdgeEnd, usize), Vec<usize>> = BTreeMap::new();
                for (i, b) in bs.iter().enumerate().filter(|(_, b)| self.on_edge(b, e)) {
                    groups.entry((self.end_of(b), b.degree)).or_default().push(i);
                }
                for ((_, d), idx) in groups {
                    let d = d as i64;
                    for pair in idx.chunks(2) {
                        let [x, y] = pair else { return Err(internal("odd circle family")) };
                        phi[*x] = d % modulus;
                        phi[*y] = (modulus - d % modulus) % modulus;
                    }
                }
            }
            specs.push(format!("{phi:?}"));
            out.push(p.cyclic_cover(&CoverSpec { modulus: n, phi })?);
        }
        self.log.push(format!("edge {name}: cyclic covers mod N = {n}, values {}", specs.join(" ")));
        self.rebuild(&out)?;
        self.scale(n)?;
        Ok(())
    }

    fn glue_families(&mut self, e: usize, name: &str) -> Result<(), GlueError> {
        let bs = self.surface.boundary_components();
        let side = |end: End| -> Vec<&BoundaryComponent> {
            let mut v: Vec<&BoundaryComponent> =
                bs.iter().filter(|b| self.end_of(b) == EdgeEnd { edge: e, end }).collect();
            v.sort_by_key(|b| b.sides[0]);
            v
        };
        let (from, to) = (side(End::From), side(End::To));
        let expected = BigInt::from(self.multiple) * self.a[2 * e].abs();
        for (end, family) in [(End::From, &from), (End::To, &to)] {
            let total: usize = family.iter().map(|b| b.degree).sum();
            if BigInt::from(total) != expected {
                return Err(internal(format!("edge {name}: family wraps {total}, expected {expected}")));
            }
            let coord = EdgeEnd { edge: e, end }.coordinate();
            let signed = if self.a[coord].is_negative() { -BigInt::from(total) } else { BigInt::from(total) };
            self.wrapping.push((EdgeEnd { edge: e, end }, signed));
        }
        if from.len() != to.len() || from.iter().zip(&to).any(|(x, y)| x.degree != y.degree) {
            return Err(internal(format!("edge {name}: circle families cannot be matched")));
        }
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = from.iter().zip(&to).map(|(x, y)| (x.sides.clone(), y.sides.clone())).collect();
        self.log.push(format!("edge {name}: glued {} pair(s) of circles through annuli", pairs.len()));
        for (x, y) in pairs {
            self.surface.glue_boundaries(&x, &y)?;
        }
        Ok(())
    }
}

/// Runs the construction for a nonzero kernel class; for the zero class it
/// looks for a Baumslag–Solitar subgroup at a self-edge instead.
pub fn build_closed_surface(g: &GraphOfGroups, a: &H2Class) -> Result<GlueOutcome, GlueError> {
    if !g.in_kernel(a) {
        return Err(GlueError::NotInKernel);
    }
    if a.is_zero() {
        return match witness_scan(g) {
            Some(witness) => Ok(GlueOutcome::Witness { log: vec![format!("zero class; {witness}")], witness }),
            None => Err(GlueError::ZeroClass),
        };
    }
    let norm = g.gt_norm(a)?;
    let denominator = a.denominator();
    let mut b = Builder::new(g, a.integral())?;
    for e in 0..g.edges().len() {
        if let Some(witness) = b.glue_edge(e)? {
            return Ok(GlueOutcome::Witness { witness, log: b.log });
        }
    }
    if !b.surface.is_closed() {
        return Err(internal("glued surface still has boundary"));
    }
    b.surface.validate()?;
    if norm.is_zero() {
        b.log.push("norm is zero".into());
        return Ok(GlueOutcome::NormZero { log: b.log });
    }
    let multiple = BigInt::from(b.multiple) * denominator;
    let chi_minus = b.surface.chi_minus();
    let surface_norm = Rational::from_integer(BigInt::from(-2 * chi_minus)) / Rational::from_integer(multiple.clone());
    b.log.push(format!("closed surface: chi = {}, n = {multiple}, -2chi/n = {surface_norm}, norm = {norm}", b.surface.euler_characteristic()));
    Ok(GlueOutcome::Closed(Box::new(ClosedSurfaceResult {
        euler_characteristic: b.surface.euler_characteristic(),
        genera: b.surface.genera(),
        chi_minus,
        surface: b.surface,
        multiple,
        norm,
        surface_norm,
        edge_wrapping: b.wrapping,
        log: b.log,
    })))
}

/// Recomputes everything from the surface and the class: the recorded
/// Euler characteristic, closedness and `−2χ⁻/n = ‖A‖`.
pub fn certify(result: &ClosedSurfaceResult, g: &GraphOfGroups, a: &H2Class) -> bool {
    let s = &result.surface;
    if s.validate().is_err() || !s.is_closed() || s.euler_characteristic() != result.euler_characteristic {
        return false;
    }
    if s.chi_minus() != result.chi_minus || result.multiple <= BigInt::zero() {
        return false;
    }
    let Ok(norm) = g.gt_norm(a) else { return false };
    Rational::from_integer(BigInt::from(-2 * s.chi_minus())) / Rational::from_integer(result.multiple.clone()) == norm
}

/// Step-by-step account of the construction followed by its outcome.
pub fn glue_plan_report(g: &GraphOfGroups, a: &H2Class) -> Result<String, GlueError> {
    let outcome = build_closed_surface(g, a)?;
    let mut out = outcome.log().join("\n");
    out.push('\n');
    out.push_str(&summary(&outcome));
    out.push('\n');
    Ok(out)
}

/// One-line description of an outcome.
pub fn summary(outcome: &GlueOutcome) -> String {
    match outcome {
        GlueOutcome::Closed(r) => {
            let genera: Vec<String> = r.genera.iter().map(i64::to_string).collect();
            let genus = if genera.len() == 1 { format!("genus {}", genera[0]) } else { format!("genera {}", genera.join(",")) };
            let cert = if r.certificate_holds() { "certificate OK" } else { "certificate FAILED" };
            format!("closed surface: {genus}, n = {}, {cert}", r.multiple)
        }
        GlueOutcome::Witness { witness, .. } => format!("witness: {witness}"),
        GlueOutcome::NormZero { .. } => "norm zero: no hyperbolic surface represents this class".into(),
    }
}

/// JSON form of an outcome; rationals and big integers are strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueExport {
    pub outcome: String,
    pub multiple: Option<String>,
    pub genera: Vec<i64>,
    pub euler_characteristic: Option<i64>,
    pub norm: Option<String>,
    pub certificate: Option<CertificateExport>,
    pub witness: Option<NonHyperbolicWitness>,
    pub edge_wrapping: Vec<(String, String)>,
    pub surface: Option<SurfaceExport>,
    pub log: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateExport {
    pub surface_norm: String,
    pub norm: String,
    pub holds: bool,
}

impl GlueExport {
    pub fn new(g: &GraphOfGroups, outcome: &GlueOutcome) -> Self {
        let mut out = GlueExport {
            outcome: String::new(),
            multiple: None,
            genera: Vec::new(),
            euler_characteristic: None,
            norm: None,
            certificate: None,
            witness: None,
            edge_wrapping: Vec::new(),
            surface: None,
            log: outcome.log().to_vec(),
        };
        match outcome {
            GlueOutcome::Closed(r) => {
                out.outcome = "closed".into();
                out.multiple = Some(r.multiple.to_string());
                out.genera = r.genera.clone();
                out.euler_characteristic = Some(r.euler_characteristic);
                out.norm = Some(r.norm.to_string());
                out.certificate = Some(CertificateExport {
                    surface_norm: r.surface_norm.to_string(),
                    norm: r.norm.to_string(),
                    holds: r.certificate_holds(),
                });
                out.edge_wrapping = r.edge_wrapping.iter().map(|(e, n)| (g.end_name(*e), n.to_string())).collect();
                out.surface = Some(r.surface.export());
            }
            GlueOutcome::Witness { witness, .. } => {
                out.outcome = "witness".into();
                out.witness = Some(witness.clone());
            }
            GlueOutcome::NormZero { .. } => {
                out.outcome = "norm_zero".into();
                out.norm = Some("0".into());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;

    fn graph(text: &str) -> GraphOfGroups {
        GraphOfGroups::parse(text).unwrap()
    }

    fn closed(outcome: GlueOutcome) -> ClosedSurfaceResult {
        match outcome {
            GlueOutcome::Closed(r) => *r,
            other => panic!("expected a closed surface, got {other:?}"),
        }
    }

    const DOUBLE: &str = "vertex u gens=a,b\nvertex v gens=c,d\nedge e from=u to=v wfrom=abAB wto=cdCD\n";

    #[test]
    fn double_gives_genus_two() {
        let g = graph(DOUBLE);
        let a = g.h2_lattice()[0].clone();
        let r = closed(build_closed_surface(&g, &a).unwrap());
        assert_eq!(r.genera, vec![2]);
        assert_eq!(r.multiple, BigInt::one());
        assert_eq!(r.euler_characteristic, -2);
        assert!(r.certificate_holds());
        assert!(certify(&r, &g, &a));
        let mut bad = r.clone();
        bad.euler_characteristic = -4;
        assert!(!certify(&bad, &g, &a));
        assert_eq!(summary(&GlueOutcome::Closed(Box::new(r))), "closed surface: genus 2, n = 1, certificate OK");
    }

    #[test]
    fn witnesses() {
        let bs = graph("vertex u gens=a\nedge e from=u to=u wfrom=a wto=aa\n");
        assert!(bs.h2_lattice().is_empty());
        let GlueOutcome::Witness { witness, .. } = build_closed_surface(&bs, &H2Class::zero(2)).unwrap() else { panic!() };
        assert_eq!((witness.p, witness.q), (1, 2));
        assert!(!witness.is_zxz());

        let zz = graph("vertex u gens=a\nedge e from=u to=u wfrom=a wto=a\n");
        let a = zz.h2_lattice()[0].clone();
        let GlueOutcome::Witness { witness, .. } = build_closed_surface(&zz, &a).unwrap() else { panic!() };
        assert_eq!((witness.p, witness.q), (1, 1));
        assert!(witness.is_zxz());
    }

    #[test]
    fn rejects_non_kernel_classes() {
        let g = graph("vertex u gens=a,b\nedge e from=u to=u wfrom=a wto=b\n");
        assert!(g.h2_lattice().is_empty());
        assert_eq!(build_closed_surface(&g, &H2Class::from_i64(&[1, -1])).unwrap_err(), GlueError::NotInKernel);
        assert_eq!(build_closed_surface(&g, &H2Class::zero(2)).unwrap_err(), GlueError::ZeroClass);
    }

    #[test]
    fn uneven_degrees_need_covers() {
        // the extremal surface for (abAB)² has degree 3 and circles of degree 2 and 1
        let g = graph("vertex u gens=a,b\nvertex v gens=c,d\nedge e from=u to=v wfrom=abABabAB wto=cdCD\n");
        let a = g.h2_lattice()[0].clone();
        let r = closed(build_closed_surface(&g, &a).unwrap());
        assert_eq!(r.norm, Rational::from_integer(6.into()));
        assert!(r.certificate_holds(), "{:?}", r.log);
        assert!(certify(&r, &g, &a));
        assert!(r.log.iter().any(|l| l.contains("cyclic covers")));
        let n = r.multiple.clone();
        let total: Vec<BigInt> = r.edge_wrapping.iter().map(|(_, w)| w.clone()).collect();
        assert_eq!(total, vec![n.clone(), -n]);
    }

    #[test]
    fn parallel_edges() {
        let g = graph("vertex u gens=a,b\nvertex v gens=c,d\nedge e from=u to=v wfrom=abAB wto=cdCD\nedge f from=u to=v wfrom=abAB wto=cdCD\n");
        let basis = g.h2_lattice();
        for a in [basis[0].clone(), basis[1].clone(), basis[0].add(&basis[1])] {
            let r = closed(build_closed_surface(&g, &a).unwrap());
            assert!(r.certificate_holds(), "{:?}", r.log);
            assert!(certify(&r, &g, &a));
        }
    }

    #[test]
    fn chain_of_three_and_rational_classes() {
        let g = graph(crate::graph::tests::CHAIN3);
        let basis = g.h2_lattice();
        for (x, y) in [(1, 0), (1, 1), (1, -1), (2, 1)] {
            let a = basis[0].scale(&Rational::from_integer(x.into())).add(&basis[1].scale(&Rational::from_integer(y.into())));
            let r = closed(build_closed_surface(&g, &a).unwrap());
            assert!(r.certificate_holds(), "{x},{y}: {:?}", r.log);
        }
        let half = basis[0].scale(&Rational::new(1.into(), 2.into()));
        let r = closed(build_closed_surface(&g, &half).unwrap());
        assert_eq!(r.multiple, BigInt::from(2));
        assert!(certify(&r, &g, &half));
    }

    #[test]
    fn export_round_trip() {
        let g = graph(DOUBLE);
        let a = g.h2_lattice()[0].clone();
        let out = build_closed_surface(&g, &a).unwrap();
        let export = GlueExport::new(&g, &out);
        let text = serde_json::to_string(&export).unwrap();
        let back: GlueExport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, export);
        assert!(back.surface.unwrap().into_surface().is_ok());
        assert!(glue_plan_report(&g, &a).unwrap().ends_with("certificate OK\n"));
    }
}
