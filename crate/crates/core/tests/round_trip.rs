use num_rational::BigRational;
use proptest::prelude::*;
use sandwich_core::coupling::{build_optimal_coupling, JointCoupling, Relation};
use sandwich_core::enumeration::{exact_model_distribution, ExactModel, FiniteDistribution};
use sandwich_core::graph::{read_multigraph, read_pairing, write_multigraph, write_pairing};
use sandwich_core::models::{sample_pairing, PairingCondition, DEFAULT_REJECTION_CAP};
use sandwich_core::{Error, Multigraph, RngStream};

#[test]
fn empty_graph_header() {
    let text = write_multigraph(&Multigraph::empty(3));
    assert_eq!(text, "3 0\n");
    assert_eq!(read_multigraph(&text).unwrap(), Multigraph::empty(3));
}

#[test]
fn complete_four() {
    let k4 = Multigraph::complete(4);
    let text = write_multigraph(&k4);
    assert_eq!(text.lines().count(), 7);
    assert_eq!(read_multigraph(&text).unwrap(), k4);
}

#[test]
fn malformed_input_reports_line() {
    match read_multigraph("3 2\n1 2 1\n2 x 1\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(matches!(read_multigraph("3 1\n"), Err(Error::Parse { .. })));
    assert!(matches!(read_pairing("2 2\n1 1 2 1\n"), Err(Error::Parse { .. })));
}

#[test]
fn pairings_round_trip() {
    for i in 0..50 {
        let mut rng = RngStream::new(3, i);
        let p = sample_pairing(6 + 2 * (i as usize % 5), 3, PairingCondition::None, DEFAULT_REJECTION_CAP, &mut rng).unwrap();
        assert_eq!(read_pairing(&write_pairing(&p)).unwrap(), p);
    }
}

#[test]
fn distribution_and_coupling_round_trip() {
    let a = exact_model_distribution(ExactModel::LooplessPairing, 4, 2).unwrap();
    let b = exact_model_distribution(ExactModel::MatchingSuperpose, 4, 2).unwrap();
    let mut buf = Vec::new();
    a.write(&mut buf).unwrap();
    let back = FiniteDistribution::<BigRational>::read(&buf[..]).unwrap();
    assert_eq!(back.outcomes(), a.outcomes());
    assert_eq!(back.probs(), a.probs());

    let jc = build_optimal_coupling(&a, &b, &Relation::inequality(&a, &b).unwrap()).unwrap();
    let mut buf = Vec::new();
    jc.write(&mut buf).unwrap();
    let back = JointCoupling::read(&buf[..]).unwrap();
    assert_eq!(back.entries, jc.entries);
    assert_eq!(back.failure_mass, jc.failure_mass);
    assert_eq!((back.x_keys, back.y_keys), (jc.x_keys, jc.y_keys));
}

fn multigraph() -> impl Strategy<Value = Multigraph> {
    (1usize..12).prop_flat_map(|n| {
        proptest::collection::vec((1..=n as u32, 1..=n as u32, 1u32..4), 0..30)
            .prop_map(move |edges| Multigraph::from_edges(n, edges).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn multigraph_text_is_identity(g in multigraph()) {
        prop_assert_eq!(read_multigraph(&write_multigraph(&g)).unwrap(), g.clone());
        prop_assert_eq!(Multigraph::from_canonical_key(&g.canonical_key()).unwrap(), g);
    }
}
