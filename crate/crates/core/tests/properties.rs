use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sclkit::checks::random_chain;
use sclkit::exact::{
    determinant, hermite_normal_form, kernel_lattice_basis, solve_lp, Bound, IntMatrix, LinearProgram, LpStatus,
    Relation, Sense,
};
use sclkit::graph::{fan_of_norm, GraphOfGroups, H2Class, Ray, DEFAULT_DEPTH};
use sclkit::scl::{compute, scl, SclValue};
use sclkit::surface::{assemble, CombinatorialSurface, CoverSpec};
use sclkit::words::{cyclic_reduce, Alphabet, Chain, CyclicWord, Letter, Word};
use sclkit::Rational;

const DOUBLE: &str = include_str!("../../../graphs/double.gg");
const CHAIN3: &str = include_str!("../../../graphs/chain3.gg");

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn letters(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0u16..2, any::<bool>()), 0..max)
        .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
}

fn finite(v: SclValue) -> Rational {
    v.finite().cloned().expect("finite scl")
}

fn chain_from_seed(seed: u64) -> Chain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_chain(&mut rng, &Alphabet::parse("a,b").unwrap(), 4)
}

fn extremal(seed: u64) -> CombinatorialSurface {
    let comp = compute(&chain_from_seed(seed)).unwrap();
    assemble(&comp.problem, &comp.result.extremal).unwrap()
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..4, 1usize..5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-6i64..7, c), r))
}

fn to_matrix(rows: &[Vec<i64>]) -> IntMatrix<BigInt> {
    let cols = rows[0].len();
    IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(), cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_reduction_is_a_group_law(u in letters(8), v in letters(8)) {
        let (u, v) = (Word::from_letters(u), Word::from_letters(v));
        prop_assert_eq!(u.mul(&v).inverse(), v.inverse().mul(&u.inverse()));
        prop_assert!(u.mul(&u.inverse()).is_empty());
        prop_assert!(u.letters().windows(2).all(|p| p[0] != p[1].inv()));
    }

    #[test]
    fn cyclic_reduction_conjugates_back(w in letters(10)) {
        let w = Word::from_letters(w);
        prop_assume!(!w.is_empty());
        let (c, x) = cyclic_reduce(&w).unwrap();
        prop_assert_eq!(x.mul(&c.as_word()).mul(&x.inverse()), w);
    }

    #[test]
    fn cyclic_words_forget_rotation(w in letters(10), k in 0usize..10) {
        let w = Word::from_letters(w);
        prop_assume!(!w.is_empty());
        let (c, _) = cyclic_reduce(&w).unwrap();
        let l = c.letters();
        let shift = k % l.len();
        let rotated: Vec<Letter> = l[shift..].iter().chain(&l[..shift]).copied().collect();
        prop_assert_eq!(&CyclicWord::new(&rotated).unwrap(), &c);
        prop_assert_eq!(&c.inverse().inverse(), &c);
    }

    #[test]
    fn hermite_form_is_a_unimodular_transform(rows in small_matrix()) {
        let a = to_matrix(&rows);
        let (h, u) = hermite_normal_form(&a);
        prop_assert_eq!(u.mul(&a), h);
        prop_assert!(determinant(&u).abs().is_one());
    }

    #[test]
    fn kernel_basis_is_annihilated(rows in small_matrix()) {
        let a = to_matrix(&rows);
        let k = kernel_lattice_basis(&a);
        for i in 0..k.rows() {
            prop_assert!(a.mul_vec(k.row(i)).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn packing_lp_certificates_verify(
        c in prop::collection::vec(0i64..6, 3),
        a in prop::collection::vec(prop::collection::vec(1i64..5, 3), 1..4),
        b in prop::collection::vec(0i64..9, 3),
    ) {
        let mut p: LinearProgram<Rational> = LinearProgram::new(Sense::Maximize);
        for &ci in &c {
            p.add_variable(q(ci), Bound::NonNegative);
        }
        for (row, &bi) in a.iter().zip(&b) {
            p.add_constraint(row.iter().enumerate().map(|(j, &x)| (j, q(x))).collect(), Relation::Le, q(bi));
        }
        let s = solve_lp(&p);
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!(s.check_certificate(&p).is_ok());
        prop_assert_eq!(p.evaluate(&s.primal), s.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scl_is_homogeneous_and_inverse_invariant(seed in any::<u64>()) {
        let c = chain_from_seed(seed);
        let x = finite(scl(&c));
        prop_assert!(!x.is_negative());
        prop_assert_eq!(finite(scl(&c.scale(&q(2)))), &x * q(2));
        prop_assert_eq!(finite(scl(&c.inverse())), x);
    }

    #[test]
    fn covers_multiply_euler_characteristic(seed in any::<u64>(), n in 2i64..6, cover_seed in any::<u64>()) {
        let s = extremal(seed);
        let boundary = s.boundary_components();
        let mut rng = ChaCha8Rng::seed_from_u64(cover_seed);
        let mut phi: Vec<i64> = boundary.iter().map(|_| rng.gen_range(0..n)).collect();
        for c in 0..s.num_components() {
            let idx: Vec<usize> = (0..boundary.len()).filter(|&i| boundary[i].component == c).collect();
            if let Some((&last, rest)) = idx.split_last() {
                phi[last] = (-rest.iter().map(|&i| phi[i]).sum::<i64>()).rem_euclid(n);
            }
        }
        let cover = s.cyclic_cover(&CoverSpec { modulus: n as u64, phi }).unwrap();
        prop_assert!(cover.validate().is_ok());
        prop_assert_eq!(cover.euler_characteristic(), n * s.euler_characteristic());
    }

    #[test]
    fn pairing_cover_doubles_every_circle(seed in any::<u64>()) {
        let s = extremal(seed).split_components().swap_remove(0);
        // annuli only cover annuli
        prop_assume!(s.euler_characteristic() < 0);
        let s = s.ensure_positive_genus().unwrap();
        let cover = s.pairing_cover().unwrap();
        prop_assert_eq!(cover.euler_characteristic(), 2 * s.euler_characteristic());
        let mut base: Vec<(usize, usize)> = s.boundary_components().iter().map(|b| (b.target, b.degree)).collect();
        let mut lifted: Vec<(usize, usize)> = cover.boundary_components().iter().map(|b| (b.target, b.degree)).collect();
        base.extend(base.clone());
        base.sort();
        lifted.sort();
        prop_assert_eq!(lifted, base);
    }
}

fn chain3_class(g: &GraphOfGroups, x: i64, y: i64) -> H2Class {
    let basis = g.h2_lattice();
    basis[0].scale(&q(x)).add(&basis[1].scale(&q(y)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lattice_classes_balance_on_every_vertex(x in -4i64..5, y in -4i64..5) {
        let g = GraphOfGroups::parse(CHAIN3).unwrap();
        let a = chain3_class(&g, x, y);
        prop_assert!(g.in_kernel(&a));
        let coords: Vec<BigInt> = a.integral();
        prop_assert!(g.mv_matrix().mul_vec(&coords).iter().all(Zero::is_zero));
        for v in 0..g.vertices().len() {
            prop_assert!(g.boundary_chain(&a, v).unwrap().is_null_homologous());
        }
    }

    #[test]
    fn norm_is_homogeneous_and_symmetric(x in -3i64..4, y in -3i64..4, k in -3i64..4) {
        let g = GraphOfGroups::parse(CHAIN3).unwrap();
        let a = chain3_class(&g, x, y);
        let n = g.gt_norm(&a).unwrap();
        prop_assert_eq!(g.gt_norm(&a.scale(&q(k))).unwrap(), &n * q(k.abs()));
        let closed_form = q(2) * q(x.abs() + (x + y).abs() + y.abs());
        prop_assert_eq!(n, closed_form);
    }

    #[test]
    fn norm_is_subadditive(x in -3i64..4, y in -3i64..4, u in -3i64..4, v in -3i64..4) {
        let g = GraphOfGroups::parse(CHAIN3).unwrap();
        let (a, b) = (chain3_class(&g, x, y), chain3_class(&g, u, v));
        let sum = g.gt_norm(&a.add(&b)).unwrap();
        prop_assert!(sum <= g.gt_norm(&a).unwrap() + g.gt_norm(&b).unwrap());
    }

    #[test]
    fn double_norm_is_four_per_unit(k in -5i64..6) {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        let a = g.h2_lattice()[0].scale(&q(k));
        prop_assert_eq!(g.gt_norm(&a).unwrap(), q(4 * k.abs()));
    }

    #[test]
    fn fan_recovers_polygonal_norms(extra in prop::collection::vec((-3i64..4, -3i64..4), 0..4)) {
        let mut functionals = vec![(1, 1), (1, -1), (-1, 1), (-1, -1)];
        functionals.extend(extra);
        let eval = |r: &Ray| {
            functionals
                .iter()
                .map(|&(p, qq)| Rational::from_integer(&r.0 * p + &r.1 * qq))
                .max()
                .unwrap()
        };
        let fan = fan_of_norm(|r| Ok(eval(r)), DEFAULT_DEPTH).unwrap();
        prop_assert!(fan.is_bounded());
        for cone in &fan.cones {
            let sum = (&cone.from.0 + &cone.to.0, &cone.from.1 + &cone.to.1);
            prop_assert_eq!(eval(&sum), eval(&cone.from) + eval(&cone.to));
        }
        for (x, y) in &fan.vertices {
            prop_assert!(fan.norm_at(x, y).is_one());
        }
        for (px, py) in [(3, 7), (-5, 2), (4, -9), (-1, -6)] {
            prop_assert_eq!(fan.norm_at(&q(px), &q(py)), eval(&(BigInt::from(px), BigInt::from(py))));
        }
    }
}
