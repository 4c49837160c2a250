use std::f64::consts::TAU;

use ornament_core::groups::catalog;
use ornament_core::*;
use proptest::prelude::*;

fn arb_point() -> impl Strategy<Value = Vec2> {
    (-200.0..200.0f64, -200.0..200.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn arb_isometry() -> impl Strategy<Value = Isometry2> {
    prop_oneof![
        arb_point().prop_map(Isometry2::translation),
        (arb_point(), 0.01..TAU - 0.01).prop_map(|(c, a)| Isometry2::rotation(c, a)),
        (arb_point(), 0.0..TAU).prop_map(|(p, phi)| Isometry2::reflection(Line::new(p, Vec2::new(phi.cos(), phi.sin())))),
        (arb_point(), 0.0..TAU, 0.5..80.0f64)
            .prop_map(|(p, phi, s)| Isometry2::glide(Line::new(p, Vec2::new(phi.cos(), phi.sin())), s)),
    ]
}

fn arb_group() -> impl Strategy<Value = GroupName> {
    (0..GroupName::ALL.len()).prop_map(|i| GroupName::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn composing_with_inverse_is_identity(g in arb_isometry(), p in arb_point()) {
        let id = g.compose(&g.inverse());
        prop_assert!(matches!(id.kind(), IsometryKind::Identity));
        prop_assert!(id.approx_eq(&Isometry2::identity(), 1e-9));
        prop_assert!(g.inverse().apply(g.apply(p)).dist(p) < 1e-9);
    }

    #[test]
    fn kind_survives_reconstruction(g in arb_isometry()) {
        let back = Isometry2::from_parts(*g.linear(), g.translation_part()).unwrap();
        prop_assert_eq!(back.kind().name(), g.kind().name());
        prop_assert!(back.approx_eq(&g, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generic_orbit_size_is_point_group_order(group in arb_group(), fx in 0.0..1.0f64, fy in 0.0..1.0f64) {
        let g = group.group();
        let lattice = g.default_lattice(50.0);
        let p = lattice.to_pattern(Vec2::new(fx, fy));
        let orbit = orbit(p, group, &lattice).unwrap();
        // points on a mirror or center have smaller orbits; skip them
        let min_gap = orbit
            .iter()
            .enumerate()
            .flat_map(|(i, a)| orbit[i + 1..].iter().map(move |b| lattice.periodic_distance(*a, *b)))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 1e-3);
        prop_assert_eq!(orbit.len(), g.point_group_order);
    }
}

#[test]
fn catalog_has_seventeen_groups_with_expected_orders() {
    let expected = [
        ("p1", 1, 1),
        ("pm", 1, 2),
        ("pg", 1, 2),
        ("cm", 1, 2),
        ("p2", 2, 2),
        ("pmm", 2, 4),
        ("pmg", 2, 4),
        ("pgg", 2, 4),
        ("cmm", 2, 4),
        ("p3", 3, 3),
        ("p3m1", 3, 6),
        ("p31m", 3, 6),
        ("p4", 4, 4),
        ("p4m", 4, 8),
        ("p4g", 4, 8),
        ("p6", 6, 6),
        ("p6m", 6, 12),
    ];
    let cat = catalog();
    assert_eq!(cat.len(), 17);
    for (g, (name, rot, pg)) in cat.iter().zip(expected) {
        assert_eq!(g.name.as_str(), name);
        assert_eq!(g.highest_rotation_order, rot, "{name}");
        assert_eq!(g.point_group_order, pg, "{name}");
        assert_eq!(g.ops.len(), pg, "{name}");
        assert_eq!(name.parse::<GroupName>().unwrap(), g.name);
    }
}

#[test]
fn coset_representatives_are_closed_under_composition() {
    for g in catalog() {
        for a in &g.ops {
            assert!(g.coset_index(&a.inverse()).is_some(), "{}: inverse missing", g.name);
            for b in &g.ops {
                assert!(g.coset_index(&a.compose(b)).is_some(), "{}: product missing", g.name);
            }
        }
    }
}

#[test]
fn generators_reach_every_coset() {
    for g in catalog() {
        let mut reached = vec![0usize];
        let mut i = 0;
        while i < reached.len() {
            let e = g.ops[reached[i]];
            for &gi in &g.generators {
                let k = g.coset_index(&g.ops[gi].compose(&e)).unwrap();
                if !reached.contains(&k) {
                    reached.push(k);
                }
            }
            i += 1;
        }
        assert_eq!(reached.len(), g.ops.len(), "{}", g.name);
    }
}

#[test]
fn generators_preserve_the_lattice_and_orbits() {
    for g in catalog() {
        let lattice = g.default_lattice(40.0);
        let gens = group_generators(g.name, &lattice).unwrap();
        let p = lattice.to_pattern(Vec2::new(0.137, 0.291));
        let orbit = orbit(p, g.name, &lattice).unwrap();
        for iso in &gens {
            for q in &orbit {
                let img = iso.apply(*q);
                assert!(orbit.iter().any(|o| lattice.periodic_distance(*o, img) < 1e-6), "{}", g.name);
            }
        }
    }
}

#[test]
fn incompatible_lattice_is_rejected() {
    let oblique = Lattice::new(Vec2::new(40.0, 0.0), Vec2::new(11.0, 31.0)).unwrap();
    for g in [GroupName::P3, GroupName::P4, GroupName::Pmm, GroupName::Cmm] {
        assert!(matches!(group_generators(g, &oblique), Err(Error::IncompatibleLattice { .. })));
    }
    assert!(group_generators(GroupName::P2, &oblique).is_ok());
}

#[test]
fn non_orthogonal_linear_part_is_an_error() {
    let shear = Mat2([[1.0, 0.5], [0.0, 1.0]]);
    assert!(matches!(Isometry2::from_parts(shear, Vec2::ZERO), Err(Error::NonOrthogonal(_))));
}
