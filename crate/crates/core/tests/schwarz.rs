use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sglab::families::{kind_for_index, FunctionPair, PairKind, WINDOW};
use sglab::metrics::cauchy_schwarz_property;
use sglab::quadrature::QuadratureSpec;

#[test]
fn modulus_inequality_over_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let spec = QuadratureSpec {
        intervals: 8192,
        ..Default::default()
    };
    for i in 0..300 {
        let kind = kind_for_index(i);
        let pair = FunctionPair::random(&mut rng, kind);
        let check = cauchy_schwarz_property(|u| pair.f(u), |u| pair.g(u), WINDOW, &spec).unwrap();
        assert!(check.ok, "{i}: {check:?}");
        if kind == PairKind::Identical {
            assert!((check.lhs - check.rhs).abs() <= 1e-12 * check.lhs.max(1.0));
        }
    }
}
