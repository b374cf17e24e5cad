mod common;

use common::{as_map, fixture, random_command, random_table, Oracle, Table};
use grounded_dialog::frame::TaskFrame;
use grounded_dialog::grounding::{ground_parse, GroundingContext, GroundingDistribution};
use grounded_dialog::semparse::Lf;
use grounded_dialog::{ExactGrounding, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_brute_force_on_random_forms() {
    let (w, scope) = fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut nonempty = 0;
    for i in 0..50 {
        let table = random_table(&w, &mut rng);
        let text = random_command(&mut rng);
        let lf = Lf::parse(&text).unwrap();
        let ctx = GroundingContext::new(&w, &table).with_scope(&scope);
        let got: GroundingDistribution<f64> = ground_parse(&lf, &ctx).unwrap();
        let oracle = Oracle {
            world: &w,
            table: &table,
            objects: &scope,
        };
        let want = oracle.ground(&lf);
        let (g, o) = (as_map(&got.entries), as_map(&want));
        assert_eq!(g.keys().collect::<Vec<_>>(), o.keys().collect::<Vec<_>>(), "form {i}: {text}");
        for (k, p) in &g {
            assert!((p - o[k]).abs() < 1e-9, "form {i}: {text}: {k} {p} vs {}", o[k]);
        }
        if !got.is_empty() {
            nonempty += 1;
            assert!((got.total() - 1.0).abs() < 1e-9);
        }
    }
    assert!(nonempty >= 25, "too few satisfiable forms: {nonempty}");
}

#[test]
fn bobs_office_and_two_offices() {
    let (w, scope) = fixture();
    let table = Table::new();
    let ctx = GroundingContext::new(&w, &table).with_scope(&scope);
    let d: ExactGrounding =
        ground_parse(&Lf::parse("(walk (the (lambda x room (and (office x) (possesses bob x)))))").unwrap(), &ctx).unwrap();
    assert_eq!(d.entries, vec![(TaskFrame::walk("r1"), Rational::from_integer(1))]);
    let d: ExactGrounding = ground_parse(&Lf::parse("(walk (the (lambda x room (office x))))").unwrap(), &ctx).unwrap();
    assert_eq!(d.probability(&TaskFrame::walk("r1")), Rational::new(1, 2));
    assert_eq!(d.probability(&TaskFrame::walk("r2")), Rational::new(1, 2));
}

#[test]
fn can_confidences_pass_through_normalized() {
    let (w, scope) = fixture();
    // the shape of a trained "can" distribution over eight objects
    let raw = [0.32, 0.22, 0.2, 0.13, 0.07, 0.03, 0.03, 0.0];
    let mut table = Table::new();
    for (o, c) in scope.iter().zip(raw) {
        table.insert(("can".into(), o.clone()), c);
    }
    let ctx = GroundingContext::new(&w, &table).with_scope(&scope);
    let d: GroundingDistribution<f64> =
        ground_parse(&Lf::parse("(deliver (a (lambda x object (can x))) bob)").unwrap(), &ctx).unwrap();
    assert_eq!(d.len(), 7);
    for (o, c) in scope.iter().zip(raw) {
        assert!((d.probability(&TaskFrame::deliver(o, "bob")) - c).abs() < 1e-12);
    }
    assert!((d.total() - 1.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn raising_a_confidence_never_lowers_its_share(cs in prop::collection::vec(0.0f64..1.0, 8), i in 0usize..8, bump in 0.0f64..1.0) {
        let (w, scope) = fixture();
        let mut table = Table::new();
        for (o, c) in scope.iter().zip(&cs) {
            table.insert(("red".into(), o.clone()), *c);
        }
        let lf = Lf::parse("(deliver (the (lambda x object (red x))) alice)").unwrap();
        let before: GroundingDistribution<f64> = ground_parse(&lf, &GroundingContext::new(&w, &table).with_scope(&scope)).unwrap();
        let key = ("red".to_string(), scope[i].clone());
        let raised = (table[&key] + bump).min(1.0);
        table.insert(key, raised);
        let after: GroundingDistribution<f64> = ground_parse(&lf, &GroundingContext::new(&w, &table).with_scope(&scope)).unwrap();
        let f = TaskFrame::deliver(&scope[i], "alice");
        prop_assert!(after.probability(&f) + 1e-12 >= before.probability(&f));
        if !after.is_empty() {
            prop_assert!((after.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn map_filters_are_hard(seed in 0u64..200) {
        let (w, scope) = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = random_table(&w, &mut rng);
        let lf = Lf::parse("(relocate (a (lambda x object (red x))) (the (lambda y room (office y))) (the (lambda z room (kitchen z))))").unwrap();
        let d: GroundingDistribution<f64> = ground_parse(&lf, &GroundingContext::new(&w, &table).with_scope(&scope)).unwrap();
        for (f, p) in &d.entries {
            prop_assert!(*p > 0.0);
            prop_assert!(w.room_has_type(f.source.as_deref().unwrap(), "office"));
            prop_assert_eq!(f.goal.as_deref(), Some("r4"));
        }
    }
}
