use freefactor_core::calculus::{
    compress_rule, explore, free_product_rule, fundamental_group_derivation, local_rewrites, normalize, parse,
    reduce_multiset, rewrites, standard_form, verify_certificate, verify_derivation, FactorExpr, FreeParam,
    TensorFactor,
};
use freefactor_core::scalar::{int, rat, Rational};
use num::{One, Zero};
use proptest::prelude::*;

fn param() -> impl Strategy<Value = Rational> {
    (1i64..40, 1i64..12).prop_map(|(a, d)| int(1) + rat(a, d))
}

fn gsq() -> impl Strategy<Value = Rational> {
    (1i64..30, 1i64..30).prop_map(|(n, d)| rat(n, d))
}

fn leaf() -> impl Strategy<Value = FactorExpr> {
    prop_oneof![
        Just(FactorExpr::C),
        Just(FactorExpr::Lz),
        Just(FactorExpr::Lz2),
        Just(FactorExpr::R),
        (1u64..5).prop_map(FactorExpr::M),
        param().prop_map(|r| FactorExpr::lf(r).unwrap()),
    ]
}

fn expr() -> impl Strategy<Value = FactorExpr> {
    leaf().prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(FactorExpr::FreeProduct),
            (inner.clone(), prop_oneof![(1u64..4).prop_map(TensorFactor::Matrix), Just(TensorFactor::Lz2)])
                .prop_map(|(e, t)| FactorExpr::tensor(e, t)),
            (inner, prop::sample::select(vec![rat(1, 4), rat(1, 2), rat(2, 3), int(1), rat(4, 9), int(3)]))
                .prop_map(|(e, g)| FactorExpr::compress(e, g)),
        ]
    })
}

/// Free dimension, computed independently of the rewrite rules: `C` counts
/// 0, `M_n` counts `1 − 1/n²`, the diffuse hyperfinite algebras count 1 and
/// amplification by `γ` acts on `d − 1` as division by `γ²`.
fn fdim(e: &FactorExpr) -> Option<Rational> {
    let one = Rational::one();
    Some(match e {
        FactorExpr::C => Rational::zero(),
        FactorExpr::Lz | FactorExpr::R => one,
        FactorExpr::Lz2 => rat(1, 2),
        FactorExpr::M(n) => one - rat(1, (*n * *n) as i64),
        FactorExpr::Lf(r) => r.finite()?.clone(),
        FactorExpr::FreeProduct(cs) => cs.iter().map(fdim).sum::<Option<Rational>>()?,
        FactorExpr::Tensor(x, TensorFactor::Matrix(n)) => &one + (fdim(x)? - &one) / int((*n * *n) as i64),
        FactorExpr::Tensor(x, TensorFactor::Lz2) => (one + fdim(x)?) / int(2),
        FactorExpr::Compress(x, g) => &one + (fdim(x)? - &one) / g,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn compression_composes(r in param(), g1 in gsq(), g2 in gsq()) {
        let r = FreeParam::new(r).unwrap();
        let twice = compress_rule(&compress_rule(&r, &g1).unwrap(), &g2).unwrap();
        prop_assert_eq!(twice, compress_rule(&r, &(&g1 * &g2)).unwrap());
        let back = compress_rule(&compress_rule(&r, &g1).unwrap(), &g1.recip()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn addition_is_associative_and_commutative(a in param(), b in param(), c in param()) {
        let (a, b, c) = (FreeParam::new(a).unwrap(), FreeParam::new(b).unwrap(), FreeParam::new(c).unwrap());
        prop_assert_eq!(free_product_rule(&a, &b), free_product_rule(&b, &a));
        prop_assert_eq!(
            free_product_rule(&free_product_rule(&a, &b), &c),
            free_product_rule(&a, &free_product_rule(&b, &c))
        );
        prop_assert_eq!(free_product_rule(&a, &FreeParam::Infinite), FreeParam::Infinite);
    }

    #[test]
    fn parenthesizations_agree(rs in prop::collection::vec(param(), 2..6), split in 1usize..5) {
        let leaves: Vec<FactorExpr> = rs.iter().map(|r| FactorExpr::lf(r.clone()).unwrap()).collect();
        let flat = normalize(&FactorExpr::FreeProduct(leaves.clone())).result;
        let k = split.min(leaves.len() - 1);
        let nested = FactorExpr::FreeProduct(vec![
            FactorExpr::product(leaves[..k].to_vec()),
            FactorExpr::product(leaves[k..].to_vec()),
        ]);
        let mut reversed = leaves.clone();
        reversed.reverse();
        let total: Rational = rs.iter().sum();
        prop_assert_eq!(&flat, &FactorExpr::lf(total).unwrap());
        prop_assert_eq!(&normalize(&nested).result, &flat);
        prop_assert_eq!(&normalize(&FactorExpr::FreeProduct(reversed)).result, &flat);
    }

    #[test]
    fn display_round_trips(e in expr()) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn every_rewrite_preserves_free_dimension(e in expr()) {
        let d = fdim(&e);
        for step in rewrites(&e) {
            prop_assert_eq!(fdim(&step.before), fdim(&step.after), "{:?}", step);
        }
        let n = normalize(&e);
        verify_derivation(&n.derivation).unwrap();
        prop_assert_eq!(fdim(&n.result), d.clone());
        if let (FactorExpr::Lf(FreeParam::Finite(r)), Some(d)) = (&n.result, d) {
            prop_assert_eq!(r, &d);
        }
    }

    #[test]
    fn normal_forms_are_stuck(e in expr()) {
        let n = normalize(&e);
        prop_assert!(rewrites(&n.result).is_empty());
        prop_assert!(local_rewrites(&n.result).is_empty());
    }

    #[test]
    fn standard_forms_reconstruct(r in param()) {
        let f = standard_form(&FreeParam::new(r.clone()).unwrap()).unwrap();
        prop_assert_eq!(f.r(), r);
        prop_assert!(f.digits_in_range());
        prop_assert!(f.tail_condition());
    }

    #[test]
    fn reducer_matches_standard_form(ts in prop::collection::vec((1u32..6, 1i64..64), 1..6)) {
        let traces: Vec<Rational> = ts
            .iter()
            .map(|&(bits, n)| {
                let den = 1i64 << bits;
                rat(n % den + 1, den)
            })
            .collect();
        let red = reduce_multiset(&traces).unwrap();
        let expected = int(1) + traces.iter().map(|t| t * t).sum::<Rational>();
        prop_assert_eq!(&red.r, &expected);
        prop_assert!(red.all_moves_preserve());
        prop_assert!(red.moves.iter().all(|m| m.sum_before == &expected - int(1)));
        prop_assert!(red.matches_standard_form);
        prop_assert_eq!(red.form.r(), expected);
    }

    #[test]
    fn dichotomy_certificates(r in param(), gap in param(), g in prop::sample::select(vec![
        rat(1, 4), rat(1, 2), rat(9, 4), int(4), rat(1, 9), rat(7, 3), rat(100, 1), rat(1, 50),
    ])) {
        let r_prime = &r + &gap - int(1);
        let c = fundamental_group_derivation(&FreeParam::new(r.clone()).unwrap(), &FreeParam::new(r_prime).unwrap(), &g)
            .unwrap();
        verify_certificate(&c).unwrap();
        prop_assert_eq!(&c.target.right, &(int(1) + (&r - int(1)) / &g));
    }
}

#[test]
fn small_expressions_are_confluent() {
    // every rewrite order of these reaches a single normal form
    let corpus = [
        "tensor(R, M2) * tensor(R, M2)",
        "tensor(R * R * LF(3), M2)",
        "R * R * R",
        "LZ * LZ * R",
        "R * tensor(R, LZ2)",
        "tensor(R, LZ2) * tensor(R, LZ2)",
        "tensor(LZ, M2) * tensor(LZ, M2)",
        "M2 * LF(2) * R",
        "compress(R * LZ, gsq=1/4) * LF(3/2)",
        "compress(tensor(LF(3), M2), gsq=4/9)",
        "(R * C) * (LZ * C)",
        "tensor(tensor(LF(2), M2), M3) * compress(LF(2), gsq=1/36)",
        "M2 * M2",
        "LZ2 * LZ2",
        "LZ2 * tensor(LZ, M3)",
    ];
    for text in corpus {
        let ex = explore(&parse(text).unwrap(), 50_000);
        assert!(ex.confluent(), "{text}: {:?}", ex.normal_forms);
    }
}

#[test]
fn distinct_parameters_never_meet() {
    let rs = [rat(3, 2), int(2), rat(7, 4), rat(5, 2), int(3)];
    for (i, a) in rs.iter().enumerate() {
        for b in &rs[i + 1..] {
            let x = normalize(&FactorExpr::compress(FactorExpr::lf(a.clone()).unwrap(), int(1))).result;
            let y = normalize(&FactorExpr::FreeProduct(vec![FactorExpr::lf(b.clone()).unwrap(), FactorExpr::C])).result;
            assert_ne!(x, y);
        }
    }
}
