mod common;

use std::sync::Arc;

use common::*;
use convdeform::coalgebra::Coalgebra;
use convdeform::cohomology::Complex;
use convdeform::convolution::{conv_compose, takeuchi_invert, ConvMorphism, Filtration};
use convdeform::extension::{build_extension, graded_extension, split_extension};
use convdeform::format::{parse_spec, serialize_spec, AlgebraEntry, MorphismEntry, SpecFile};
use convdeform::scalar::Field;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hochschild_matches_oracle(seed in any::<u64>(), a in 1usize..=3) {
        let mut rng = rng(seed);
        let m0 = random_algebra(&mut rng, Field::prime(5).unwrap(), a);
        let h = Complex::hochschild(&m0).unwrap();
        let o = HochschildOracle::new(&m0);
        for n in 0..=2 {
            prop_assert_eq!(h.cohomology(n).unwrap().dim_h, o.dim_hh(n));
        }
    }

    #[test]
    fn differential_squares_to_zero(seed in any::<u64>(), a in 1usize..=2) {
        let mut rng = rng(seed);
        let c = Arc::new(Coalgebra::divided_power(Field::Rational, 2));
        let m0 = random_algebra(&mut rng, Field::Rational, a);
        let m = random_associative(&mut rng, &c, &m0);
        let x = nilpotent_comodule(&mut rng, &c, 2);
        let cx = Complex::new(m, x).unwrap();
        for n in 0..=1 {
            let dd = cx.differential_matrix(n + 1).unwrap().checked_mul(&cx.differential_matrix(n).unwrap()).unwrap();
            prop_assert!(dd.is_zero());
        }
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), a in 1usize..=3) {
        let mut rng = rng(seed);
        let c = Arc::new(Coalgebra::polynomial(Field::Rational, 2, 2));
        let f = random_invertible_morphism(&mut rng, &c, a);
        let g = takeuchi_invert(&f, &Filtration::from_grading(&c).unwrap()).unwrap();
        let id = ConvMorphism::identity(c.clone(), a, 1);
        prop_assert_eq!(conv_compose(&f, &g).unwrap(), id.clone());
        prop_assert_eq!(conv_compose(&g, &f).unwrap(), id);
    }

    #[test]
    fn split_inverts_build(n in 1usize..=3, vars in 1usize..=2) {
        let d = Coalgebra::polynomial(Field::Rational, vars, 3);
        let e = build_extension(graded_extension(&d, n).unwrap().cocycle()).unwrap();
        let (w, _) = split_extension(e.total(), e.base(), e.iota(), e.lambda()).unwrap();
        prop_assert_eq!(&w, e.cocycle());
    }

    #[test]
    fn spec_round_trip(seed in any::<u64>(), a in 1usize..=3) {
        let mut rng = rng(seed);
        let f = Field::prime(7).unwrap();
        let d = Arc::new(Coalgebra::divided_power(f, 2));
        let mut spec = SpecFile::new(f);
        spec.coalgebras.insert("D".into(), d.clone());
        let m0 = random_algebra(&mut rng, f, a);
        spec.algebras.insert("A".into(), AlgebraEntry { coalgebra: "D".into(), m: random_associative(&mut rng, &d, &m0), unit: None });
        spec.morphisms.insert("g".into(), MorphismEntry { coalgebra: "D".into(), f: random_gauge(&mut rng, &d, a) });
        prop_assert_eq!(parse_spec(&serialize_spec(&spec)).unwrap(), spec);
    }
}
