//! Finite cyclic covers via voltage assignments on glued sides.
//!
//! A voltage `ω(s) ∈ ℤ/N` on each glued side (with `ω(twin) = −ω(s)`) says
//! which sheet one lands on when crossing that side. The cover is unbranched
//! when the voltage around every interior vertex vanishes, and the monodromy
//! around a boundary circle is the voltage accumulated along it.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{CombinatorialSurface, Face, Side, SurfaceError};
use crate::exact::{kernel_mod_prime, solve_mod_n, IntMatrix};

pub(super) const GENUS_SEARCH_BOUND: u64 = 12;

/// Modulus `N` and a value in `ℤ/N` for every boundary component, in the
/// order of [`CombinatorialSurface::boundary_components`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub modulus: u64,
    pub phi: Vec<i64>,
}

/// Copy-major lift: face `f` of sheet `c` becomes face `c·F + f`.
pub(super) fn lift(s: &CombinatorialSurface, omega: &[i64], n: usize) -> CombinatorialSurface {
    let (nf, ns) = (s.faces.len(), s.sides.len());
    let mut out = CombinatorialSurface::new(s.targets.clone());
    for c in 0..n {
        out.faces.extend(s.faces.iter().map(|f| Face { kind: f.kind, start: f.start + c * ns, len: f.len }));
        for (i, side) in s.sides.iter().enumerate() {
            let twin = side.twin.map(|t| {
                let sheet = (c as i64 + omega[i]).rem_euclid(n as i64) as usize;
                sheet * ns + t
            });
            out.sides.push(Side { face: side.face + c * nf, twin, label: side.label });
        }
    }
    out
}

/// A closed loop recorded as the glued sides it crosses.
struct Loop {
    component: usize,
    crossings: Vec<usize>,
}

struct Gauge {
    /// Unknown index of each glued side's pair, or `None` on tree pairs.
    unknown: Vec<Option<usize>>,
    /// Unknowns belonging to each component.
    per_component: Vec<Vec<usize>>,
    /// Canonical side of each unknown.
    side_of: Vec<usize>,
}

fn gauge(s: &CombinatorialSurface, comp: &[usize]) -> Gauge {
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let mut visited = vec![false; s.faces.len()];
    let mut tree = vec![false; s.sides.len()];
    for root in 0..s.faces.len() {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(f) = queue.pop_front() {
            let face = &s.faces[f];
            for h in face.start..face.start + face.len {
                if let Some(t) = s.sides[h].twin {
                    let g = s.sides[t].face;
                    if !visited[g] {
                        visited[g] = true;
                        tree[h] = true;
                        tree[t] = true;
                        queue.push_back(g);
                    }
                }
            }
        }
    }
    let mut unknown = vec![None; s.sides.len()];
    let mut per_component = vec![Vec::new(); ncomp];
    let mut side_of = Vec::new();
    for (h, side) in s.sides.iter().enumerate() {
        if let Some(t) = side.twin {
            if h < t && !tree[h] {
                let k = side_of.len();
                side_of.push(h);
                unknown[h] = Some(k);
                unknown[t] = Some(k);
                per_component[comp[side.face]].push(k);
            }
        }
    }
    Gauge { unknown, per_component, side_of }
}

fn vertex_loops(s: &CombinatorialSurface, comp: &[usize]) -> Vec<Loop> {
    let corner = s.vertex_of_corner();
    let mut on_boundary = BTreeSet::new();
    for (h, side) in s.sides.iter().enumerate() {
        if side.twin.is_none() {
            on_boundary.insert(corner[h]);
            on_boundary.insert(corner[s.next(h)]);
        }
    }
    let mut done = BTreeSet::new();
    let mut loops = Vec::new();
    for h0 in 0..s.sides.len() {
        let v = corner[h0];
        if on_boundary.contains(&v) || !done.insert(v) {
            continue;
        }
        let mut crossings = Vec::new();
        let mut h = h0;
        loop {
            let t = s.sides[h].twin.expect("interior vertex has only glued sides");
            crossings.push(h);
            h = s.next(t);
            if h == h0 {
                break;
            }
        }
        loops.push(Loop { component: comp[s.sides[h0].face], crossings });
    }
    loops
}

fn boundary_loops(s: &CombinatorialSurface) -> Vec<Loop> {
    s.boundary_components()
        .into_iter()
        .map(|b| {
            let mut crossings = Vec::new();
            for &free in &b.sides {
                let mut n = s.next(free);
                while let Some(t) = s.sides[n].twin {
                    crossings.push(n);
                    n = s.next(t);
                }
            }
            Loop { component: b.component, crossings }
        })
        .collect()
}

fn loop_row(l: &Loop, g: &Gauge, cols: &[usize]) -> Vec<i64> {
    let mut row = vec![0i64; cols.len()];
    for &h in &l.crossings {
        if let Some(k) = g.unknown[h] {
            let col = cols.binary_search(&k).expect("crossing stays in its component");
            row[col] += if g.side_of[k] == h { 1 } else { -1 };
        }
    }
    row
}

fn apply(s: &CombinatorialSurface, g: &Gauge, cols: &[usize], values: &[i64], omega: &mut [i64]) {
    for (col, &k) in cols.iter().enumerate() {
        let h = g.side_of[k];
        let t = s.sides[h].twin.unwrap();
        omega[h] = values[col];
        omega[t] = -values[col];
    }
}

pub(super) fn cyclic_cover(s: &CombinatorialSurface, spec: &CoverSpec) -> Result<CombinatorialSurface, SurfaceError> {
    let n = spec.modulus;
    if n == 0 {
        return Err(SurfaceError::InvalidCover("modulus must be positive".into()));
    }
    let boundary = boundary_loops(s);
    if spec.phi.len() != boundary.len() {
        return Err(SurfaceError::InvalidCover(format!(
            "{} boundary values for {} boundary components",
            spec.phi.len(),
            boundary.len()
        )));
    }
    let comp = s.face_components();
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let modulus = n as i64;
    let mut sums = vec![0i64; ncomp];
    for (l, phi) in boundary.iter().zip(&spec.phi) {
        sums[l.component] = (sums[l.component] + phi).rem_euclid(modulus);
    }
    if sums.iter().any(|&x| x != 0) {
        return Err(SurfaceError::UnbalancedAssignment);
    }
    let g = gauge(s, &comp);
    let vertices = vertex_loops(s, &comp);
    let mut omega = vec![0i64; s.sides.len()];
    for (c, cols) in g.per_component.iter().enumerate() {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (l, phi) in boundary.iter().zip(&spec.phi).filter(|(l, _)| l.component == c) {
            rows.push(loop_row(l, &g, cols));
            rhs.push(BigInt::from(phi.rem_euclid(modulus)));
        }
        if rhs.iter().all(Zero::is_zero) {
            continue;
        }
        for l in vertices.iter().filter(|l| l.component == c) {
            rows.push(loop_row(l, &g, cols));
            rhs.push(BigInt::zero());
        }
        let m = IntMatrix::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect(),
            cols.len(),
        );
        let x = solve_mod_n(&m, &rhs, &BigInt::from(modulus))
            .ok_or_else(|| SurfaceError::InvalidCover("boundary values do not extend".into()))?;
        let values: Vec<i64> = x.iter().map(|v| v.to_i64().unwrap()).collect();
        apply(s, &g, cols, &values, &mut omega);
    }
    Ok(lift(s, &omega, n as usize))
}

pub(super) fn pairing_cover(s: &CombinatorialSurface) -> Result<CombinatorialSurface, SurfaceError> {
    let comp = s.face_components();
    let g = gauge(s, &comp);
    let mut loops = vertex_loops(s, &comp);
    loops.extend(boundary_loops(s));
    let mut omega = vec![0i64; s.sides.len()];
    for (c, cols) in g.per_component.iter().enumerate() {
        let rows: Vec<Vec<i64>> = loops.iter().filter(|l| l.component == c).map(|l| loop_row(l, &g, cols)).collect();
        let m = IntMatrix::from_rows(rows, cols.len());
        let (_, kernel) = kernel_mod_prime(&m, &2);
        let Some(v) = kernel.first() else {
            return Err(SurfaceError::NoGenus);
        };
        apply(s, &g, cols, v, &mut omega);
    }
    Ok(lift(s, &omega, 2))
}

pub(super) fn ensure_positive_genus(s: &CombinatorialSurface, bound: u64) -> Result<CombinatorialSurface, SurfaceError> {
    let comps = s.components();
    if comps.len() != 1 {
        return Err(SurfaceError::Invalid("positive-genus search needs a connected surface".into()));
    }
    let c = &comps[0];
    if c.genus >= 1 {
        return Ok(s.clone());
    }
    let b = c.boundary;
    if c.euler_characteristic >= 0 || b == 0 {
        return Err(SurfaceError::SearchExhausted(bound));
    }
    for n in 2..=bound {
        let mut phi = vec![0i64; b];
        // lexicographic over (ℤ/N)^b, first coordinate most significant
        while advance(&mut phi, n as i64) {
            if phi.iter().sum::<i64>() % n as i64 != 0 {
                continue;
            }
            // genus zero: H₁ is generated by the boundary circles, so the
            // cover is connected iff the values generate ℤ/N
            let gcd_all = phi.iter().fold(n as i64, |acc, &x| acc.gcd(&x));
            if gcd_all != 1 {
                continue;
            }
            let preimages: i64 = phi.iter().map(|&x| x.gcd(&(n as i64))).sum();
            let genus = (2 - n as i64 * c.euler_characteristic - preimages) / 2;
            if genus >= 1 {
                let cover = cyclic_cover(s, &CoverSpec { modulus: n, phi: phi.clone() })?;
                let got = cover.components();
                if got.len() != 1 || got[0].genus != genus {
                    return Err(SurfaceError::InvalidCover("cover disagrees with its predicted genus".into()));
                }
                return Ok(cover);
            }
        }
    }
    Err(SurfaceError::SearchExhausted(bound))
}

/// Base-`n` increment with the last coordinate least significant; false
/// after wrapping around to all zeros.
fn advance(phi: &mut [i64], n: i64) -> bool {
    for x in phi.iter_mut().rev() {
        *x += 1;
        if *x < n {
            return true;
        }
        *x = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::tests::surface_of;
    use super::*;

    fn pants() -> CombinatorialSurface {
        surface_of(&["ab", "B", "A"])
    }

    #[test]
    fn pants_is_a_pair_of_pants() {
        let p = pants();
        assert_eq!(p.euler_characteristic(), -1);
        assert_eq!(p.boundary_components().len(), 3);
        assert_eq!(p.genera(), vec![0]);
    }

    #[test]
    fn identity_and_trivial_covers() {
        let t = surface_of(&["abAB"]);
        assert_eq!(t.cyclic_cover(&CoverSpec { modulus: 1, phi: vec![0] }).unwrap(), t);
        let two = t.cyclic_cover(&CoverSpec { modulus: 2, phi: vec![0] }).unwrap();
        assert_eq!(two.num_components(), 2);
        assert_eq!(two.euler_characteristic(), -2);
    }

    #[test]
    fn pants_triple_cover() {
        let c = pants().cyclic_cover(&CoverSpec { modulus: 3, phi: vec![1, 1, 1] }).unwrap();
        c.validate().unwrap();
        assert_eq!(c.num_components(), 1);
        assert_eq!(c.euler_characteristic(), -3);
        assert_eq!(c.boundary_components().len(), 3);
        assert_eq!(c.genera(), vec![1]);
        assert!(c.boundary_components().iter().all(|b| b.degree == 3));
        assert_eq!(c.first_betti_number(1_000_003), 4);
    }

    #[test]
    fn unbalanced_is_rejected() {
        assert_eq!(
            pants().cyclic_cover(&CoverSpec { modulus: 3, phi: vec![1, 1, 0] }).unwrap_err(),
            SurfaceError::UnbalancedAssignment
        );
    }

    #[test]
    fn positive_genus_search() {
        let t = surface_of(&["abAB"]);
        assert_eq!(t.ensure_positive_genus().unwrap(), t);
        let c = pants().ensure_positive_genus().unwrap();
        assert_eq!(c.euler_characteristic(), -3);
        assert_eq!(c.genera(), vec![1]);
        let mut four = pants().disjoint_union(&pants());
        let b = four.boundary_components();
        four.glue_boundaries(&b[0].sides, &b[3].sides).unwrap();
        assert_eq!(four.genera(), vec![0]);
        assert_eq!(four.boundary_components().len(), 4);
        let c = four.ensure_positive_genus().unwrap();
        assert!(c.genera()[0] >= 1);
        assert!(c.euler_characteristic() >= 3 * four.euler_characteristic());
    }

    #[test]
    fn pairing_covers() {
        let t = surface_of(&["abAB"]);
        let c = t.pairing_cover().unwrap();
        assert_eq!(c.euler_characteristic(), -2);
        assert_eq!(c.num_components(), 1);
        let b = c.boundary_components();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|b| b.degree == 1));
        assert_eq!(c.genera(), vec![1]);
        let annulus = surface_of(&["a", "A"]);
        assert_eq!(annulus.pairing_cover().unwrap_err(), SurfaceError::NoGenus);
    }
}
