//! Exact unit ball of the norm restricted to a rank-two sublattice.
//!
//! The plane is cut into unimodular cones starting from six seed rays. A cone
//! spanned by `u, v` is linear iff `N(u+v) = N(u) + N(v)` (a convex function
//! meeting its chord at an interior point agrees with the chord), otherwise
//! it is split along `u + v`. Adjacent cones with equal functionals are merged;
//! the remaining breakpoints give the vertices `r / N(r)` of the ball, and
//! breakpoints with `N(r) = 0` are directions in which the ball is unbounded.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, GraphOfGroups, H2Class};
use crate::Rational;

pub const DEFAULT_DEPTH: usize = 64;

pub type Ray = (BigInt, BigInt);

/// A maximal cone on which the norm is linear: `N(x, y) = p·x + q·y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallCone {
    pub from: Ray,
    pub to: Ray,
    pub functional: (Rational, Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormBallFan {
    /// Maximal linear cones in counter-clockwise order starting at `(1, 0)`.
    pub cones: Vec<BallCone>,
    /// Vertices of the unit ball, counter-clockwise.
    pub vertices: Vec<(Rational, Rational)>,
    /// Rays along which the norm vanishes.
    pub lineality: Vec<Ray>,
    /// Every ray at which the norm was evaluated, with its value.
    pub evaluated: Vec<(Ray, Rational)>,
}

impl NormBallFan {
    pub fn is_bounded(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Evaluates the piecewise-linear norm at an arbitrary point.
    pub fn norm_at(&self, x: &Rational, y: &Rational) -> Rational {
        if x.is_zero() && y.is_zero() {
            return Rational::zero();
        }
        if self.cones.is_empty() {
            return Rational::zero();
        }
        self.cones
            .iter()
            .map(|c| &c.functional.0 * x + &c.functional.1 * y)
            .max()
            .unwrap()
    }
}

/// JSON form of a fan; every number is a decimal or `p/q` string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanExport {
    pub cones: Vec<ConeExport>,
    pub vertices: Vec<[String; 2]>,
    pub lineality: Vec<[String; 2]>,
    pub bounded: bool,
    pub evaluated: Vec<RayExport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeExport {
    pub from: [String; 2],
    pub to: [String; 2],
    pub functional: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayExport {
    pub ray: [String; 2],
    pub norm: String,
}

fn ray_strings(r: &Ray) -> [String; 2] {
    [r.0.to_string(), r.1.to_string()]
}

fn pair_strings(p: &(Rational, Rational)) -> [String; 2] {
    [p.0.to_string(), p.1.to_string()]
}

fn parse_ray(r: &[String; 2]) -> Result<Ray, GraphError> {
    let int = |s: &str| s.parse::<BigInt>().map_err(|e| GraphError::BadClass(format!("{s:?}: {e}")));
    Ok((int(&r[0])?, int(&r[1])?))
}

fn parse_pair(p: &[String; 2]) -> Result<(Rational, Rational), GraphError> {
    let q = |s: &str| crate::words::parse_rational(s).map_err(|e| GraphError::BadClass(e.to_string()));
    Ok((q(&p[0])?, q(&p[1])?))
}

impl NormBallFan {
    pub fn export(&self) -> FanExport {
        FanExport {
            cones: self
                .cones
                .iter()
                .map(|c| ConeExport { from: ray_strings(&c.from), to: ray_strings(&c.to), functional: pair_strings(&c.functional) })
                .collect(),
            vertices: self.vertices.iter().map(pair_strings).collect(),
            lineality: self.lineality.iter().map(ray_strings).collect(),
            bounded: self.is_bounded(),
            evaluated: self.evaluated.iter().map(|(r, n)| RayExport { ray: ray_strings(r), norm: n.to_string() }).collect(),
        }
    }
}

impl FanExport {
    pub fn into_fan(self) -> Result<NormBallFan, GraphError> {
        let cones = self
            .cones
            .iter()
            .map(|c| Ok(BallCone { from: parse_ray(&c.from)?, to: parse_ray(&c.to)?, functional: parse_pair(&c.functional)? }))
            .collect::<Result<Vec<_>, GraphError>>()?;
        let vertices = self.vertices.iter().map(parse_pair).collect::<Result<Vec<_>, _>>()?;
        let lineality = self.lineality.iter().map(parse_ray).collect::<Result<Vec<_>, _>>()?;
        let evaluated = self
            .evaluated
            .iter()
            .map(|r| Ok((parse_ray(&r.ray)?, crate::words::parse_rational(&r.norm).map_err(|e| GraphError::BadClass(e.to_string()))?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        if self.bounded != lineality.is_empty() {
            return Err(GraphError::BadClass("bounded flag disagrees with the lineality rays".into()));
        }
        Ok(NormBallFan { cones, vertices, lineality, evaluated })
    }
}

fn half(r: &Ray) -> u8 {
    // upper half-plane including the positive x-axis comes first
    if r.1.is_positive() || (r.1.is_zero() && r.0.is_positive()) {
        0
    } else {
        1
    }
}

fn cross(a: &Ray, b: &Ray) -> BigInt {
    &a.0 * &b.1 - &a.1 * &b.0
}

fn angle_cmp(a: &Ray, b: &Ray) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| BigInt::zero().cmp(&cross(a, b)))
}

fn ray(x: i64, y: i64) -> Ray {
    (BigInt::from(x), BigInt::from(y))
}

fn add(a: &Ray, b: &Ray) -> Ray {
    (&a.0 + &b.0, &a.1 + &b.1)
}

fn functional(u: &Ray, nu: &Rational, v: &Ray, nv: &Rational) -> (Rational, Rational) {
    let det = Rational::from_integer(cross(u, v));
    let (ux, uy) = (Rational::from_integer(u.0.clone()), Rational::from_integer(u.1.clone()));
    let (vx, vy) = (Rational::from_integer(v.0.clone()), Rational::from_integer(v.1.clone()));
    let p = (nu * &vy - nv * &uy) / &det;
    let q = (&ux * nv - &vx * nu) / &det;
    (p, q)
}

/// Computes the fan of an arbitrary norm given on integer points.
pub fn fan_of_norm<F>(norm: F, depth: usize) -> Result<NormBallFan, GraphError>
where
    F: Fn(&Ray) -> Result<Rational, GraphError> + Sync,
{
    let seeds = [ray(1, 0), ray(1, 1), ray(0, 1), ray(-1, 0), ray(-1, -1), ray(0, -1)];
    let mut memo: HashMap<Ray, Rational> = HashMap::new();
    let evaluate = |memo: &mut HashMap<Ray, Rational>, rays: Vec<Ray>| -> Result<(), GraphError> {
        let mut fresh: Vec<Ray> = rays.into_iter().filter(|r| !memo.contains_key(r)).collect();
        fresh.sort();
        fresh.dedup();
        let values: Result<Vec<Rational>, GraphError> = fresh.par_iter().map(&norm).collect();
        memo.extend(fresh.into_iter().zip(values?));
        Ok(())
    };
    evaluate(&mut memo, seeds.to_vec())?;
    let mut pending: Vec<(Ray, Ray, usize)> = (0..6).map(|i| (seeds[i].clone(), seeds[(i + 1) % 6].clone(), 0)).collect();
    let mut linear: Vec<(Ray, Ray)> = Vec::new();
    while !pending.is_empty() {
        evaluate(&mut memo, pending.iter().map(|(u, v, _)| add(u, v)).collect())?;
        let mut next = Vec::new();
        for (u, v, d) in pending {
            let w = add(&u, &v);
            if memo[&w] == &memo[&u] + &memo[&v] {
                linear.push((u, v));
            } else if d + 1 > depth {
                return Err(GraphError::DepthExceeded(depth));
            } else {
                next.push((u.clone(), w.clone(), d + 1));
                next.push((w, v, d + 1));
            }
        }
        pending = next;
    }
    linear.sort_by(|a, b| angle_cmp(&a.0, &b.0));

    let pieces: Vec<BallCone> = linear
        .into_iter()
        .map(|(u, v)| {
            let f = functional(&u, &memo[&u], &v, &memo[&v]);
            BallCone { from: u, to: v, functional: f }
        })
        .collect();
    let mut evaluated: Vec<(Ray, Rational)> = memo.into_iter().collect();
    evaluated.sort_by(|a, b| angle_cmp(&a.0, &b.0));
    let value_of = |r: &Ray| evaluated.iter().find(|(s, _)| s == r).map(|(_, v)| v.clone()).unwrap();

    let n = pieces.len();
    let breaks: Vec<usize> = (0..n).filter(|&i| pieces[(i + n - 1) % n].functional != pieces[i].functional).collect();
    if breaks.is_empty() {
        // globally linear and symmetric, hence zero
        return Ok(NormBallFan {
            cones: Vec::new(),
            vertices: Vec::new(),
            lineality: vec![ray(1, 0), ray(0, 1), ray(-1, 0), ray(0, -1)],
            evaluated,
        });
    }
    let mut cones = Vec::new();
    let mut vertices = Vec::new();
    let mut lineality = Vec::new();
    for (k, &i) in breaks.iter().enumerate() {
        let j = breaks[(k + 1) % breaks.len()];
        let last = (j + n - 1) % n;
        cones.push(BallCone { from: pieces[i].from.clone(), to: pieces[last].to.clone(), functional: pieces[i].functional.clone() });
        let r = &pieces[i].from;
        let nr = value_of(r);
        if nr.is_zero() {
            lineality.push(r.clone());
        } else {
            vertices.push((Rational::from_integer(r.0.clone()) / &nr, Rational::from_integer(r.1.clone()) / &nr));
        }
    }
    Ok(NormBallFan { cones, vertices, lineality, evaluated })
}

/// Unit ball of the norm on the span of `a1` and `a2`, in the coordinates of
/// that basis.
pub fn unit_ball_2d(g: &GraphOfGroups, a1: &H2Class, a2: &H2Class, depth: usize) -> Result<NormBallFan, GraphError> {
    if !g.in_kernel(a1) || !g.in_kernel(a2) {
        return Err(GraphError::NotInKernel);
    }
    let dim = g.dimension();
    let independent = (0..dim).any(|i| {
        (i + 1..dim).any(|j| !(&a1.coords[i] * &a2.coords[j] - &a1.coords[j] * &a2.coords[i]).is_zero())
    });
    if !independent {
        return Err(GraphError::IndependenceViolation);
    }
    fan_of_norm(
        |r| {
            let x = Rational::from_integer(r.0.clone());
            let y = Rational::from_integer(r.1.clone());
            g.gt_norm(&a1.scale(&x).add(&a2.scale(&y)))
        },
        depth,
    )
}
