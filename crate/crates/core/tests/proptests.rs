use borncoarse::actions::{classify, transporter};
use borncoarse::associated::orbit_pair_entourage;
use borncoarse::bornology::bornology_closure;
use borncoarse::coarse::{bornology_level, close_finite_base, entourage_membership, naive_closure, Entourage, Relation};
use borncoarse::instance::{parse_instance, serialize_instance, InstanceFile};
use borncoarse::oracle::{oracle_transporter, random_instance, Profile, Window};
use borncoarse::sets::{box_intersect, difference_box, self_difference_set, set_translate, End, GroundSpace, IntBox, Interval, SetDescriptor};
use borncoarse::{Budget, Truth};
use proptest::prelude::*;

fn end_lo() -> impl Strategy<Value = End> {
    prop_oneof![1 => Just(End::NegInf), 4 => (-6i64..=6).prop_map(End::Fin)]
}

fn end_hi() -> impl Strategy<Value = End> {
    prop_oneof![1 => Just(End::PosInf), 4 => (-6i64..=6).prop_map(End::Fin)]
}

fn interval() -> impl Strategy<Value = Interval> {
    (end_lo(), end_hi()).prop_filter_map("empty", |(lo, hi)| (lo <= hi).then(|| Interval::new(lo, hi)))
}

fn int_box(d: usize) -> impl Strategy<Value = IntBox> {
    prop::collection::vec(interval(), d).prop_map(IntBox::new)
}

fn two_boxes() -> impl Strategy<Value = (IntBox, IntBox)> {
    (1usize..=2).prop_flat_map(|d| (int_box(d), int_box(d)))
}

fn clip(b: &IntBox, r: i64) -> IntBox {
    box_intersect(b, &IntBox::cube(b.dim(), r)).unwrap()
}

fn window(d: usize, r: i64) -> Vec<Vec<i64>> {
    Window { radius: r }.points(d)
}

fn relation(n: usize) -> impl Strategy<Value = Relation> {
    prop::collection::vec((0..n, 0..n), 0..4).prop_map(move |p| Relation::from_pairs(n, &p).unwrap())
}

fn lattice_seed() -> impl Strategy<Value = (u64, Profile)> {
    (0u64..500, prop_oneof![Just(Profile::LatticeK1), Just(Profile::LatticeK2)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersection_is_pointwise((b1, b2) in two_boxes()) {
        let c = box_intersect(&b1, &b2).unwrap();
        for x in window(b1.dim(), 8) {
            prop_assert_eq!(c.contains(&x).unwrap(), b1.contains(&x).unwrap() && b2.contains(&x).unwrap());
        }
    }

    #[test]
    fn difference_box_matches_enumeration((t, s) in two_boxes()) {
        let d = difference_box(&t, &s).unwrap();
        let (tc, sc) = (clip(&t, 30), clip(&s, 30));
        let sp = sc.points().unwrap();
        for v in window(t.dim(), 10) {
            let hit = sp.iter().any(|x| {
                let y: Vec<i64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
                tc.contains(&y).unwrap()
            });
            prop_assert_eq!(d.contains(&v).unwrap(), hit, "v = {:?}", v);
        }
    }

    #[test]
    fn translate_round_trip(b in (1usize..=2).prop_flat_map(int_box), shift in prop::collection::vec(-5i64..=5, 2)) {
        let v = &shift[..b.dim()];
        let s = SetDescriptor::Box(b.clone());
        let back = set_translate(&set_translate(&s, v).unwrap(), &v.iter().map(|x| -x).collect::<Vec<_>>()).unwrap();
        for x in window(b.dim(), 9) {
            prop_assert_eq!(back.contains(&x).unwrap(), s.contains(&x).unwrap());
        }
    }

    #[test]
    fn self_difference_has_zero(b in (1usize..=2).prop_flat_map(int_box)) {
        let d = self_difference_set(&SetDescriptor::Box(b.clone())).unwrap();
        prop_assert!(d.contains(&vec![0; b.dim()]).unwrap());
    }

    #[test]
    fn closure_matches_naive(n in 1usize..=4, base in prop::collection::vec(relation(4), 1..4)) {
        let base: Vec<Relation> = base.iter().map(|r| {
            let pairs: Vec<(usize, usize)> = r.pairs().into_iter().filter(|&(x, y)| x < n && y < n).collect();
            Relation::from_pairs(n, &pairs).unwrap()
        }).collect();
        let g = GroundSpace::finite(n);
        let fast = close_finite_base(&g, &base).unwrap();
        prop_assert_eq!(&fast, &naive_closure(&g, &base).unwrap());
        prop_assert!(fast.axiom_failures().is_empty());
        prop_assert_eq!(&close_finite_base(&g, &fast.maximal).unwrap(), &fast);
    }

    #[test]
    fn covering_bases_give_power_set(n in 1usize..=6, extra in prop::collection::vec(0u64..64, 0..3)) {
        // every label is covered by some member
        let mut base: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        base.extend(extra.iter().map(|m| m & ((1 << n) - 1)));
        let family = bornology_closure(n, &base).unwrap();
        prop_assert_eq!(family.len(), 1usize << n);
    }

    #[test]
    fn metric_ball_zero_is_diagonal(x in prop::collection::vec(-9i64..=9, 2), y in prop::collection::vec(-9i64..=9, 2)) {
        let b = Budget::new(16, 4);
        prop_assert_eq!(
            entourage_membership(&Entourage::MetricBall(0), &x, &y, &b).unwrap(),
            entourage_membership(&Entourage::Diag, &x, &y, &b).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn instances_round_trip(seed in 0u64..1000, p in prop_oneof![Just(Profile::Finite), Just(Profile::LatticeK1), Just(Profile::LatticeK2)]) {
        let a = random_instance(seed, p).unwrap();
        prop_assert_eq!(&a, &random_instance(seed, p).unwrap());
        let f = InstanceFile { instance: a, candidates: Vec::new(), expect: None };
        let text = serialize_instance(&f);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn orbit_pairs_symmetric_and_invariant((seed, p) in lattice_seed(), level in 0u64..3) {
        let a = random_instance(seed, p).unwrap();
        let b = Budget::new(16, 4);
        let set = bornology_level(&a.bornology, a.dim(), level).unwrap();
        let e = orbit_pair_entourage(&a, &set).unwrap();
        let pts = window(a.dim(), if a.dim() == 1 { 5 } else { 2 });
        let k = a.group.rank().unwrap();
        let l = vec![1i64; k];
        for x in &pts {
            prop_assert_eq!(entourage_membership(&e, x, x, &b).unwrap(), Truth::Yes);
            for y in &pts {
                let xy = entourage_membership(&e, x, y, &b).unwrap();
                prop_assert_eq!(xy, entourage_membership(&e, y, x, &b).unwrap());
                let (lx, ly) = (a.act(&l, x).unwrap(), a.act(&l, y).unwrap());
                prop_assert_eq!(xy, entourage_membership(&e, &lx, &ly, &b).unwrap());
            }
        }
    }

    #[test]
    fn transporter_symmetry((seed, p) in lattice_seed(), i in 0u64..3, j in 0u64..3) {
        let a = random_instance(seed, p).unwrap();
        let bi = bornology_level(&a.bornology, a.dim(), i).unwrap();
        let bj = bornology_level(&a.bornology, a.dim(), j).unwrap();
        let t = transporter(&a, &bi, &bj).unwrap();
        let back = transporter(&a, &bj, &bi).unwrap();
        let k = a.group.rank().unwrap();
        for l in window(k, if k == 1 { 12 } else { 4 }) {
            let neg: Vec<i64> = l.iter().map(|v| -v).collect();
            prop_assert_eq!(t.contains(&l).unwrap(), back.contains(&neg).unwrap());
        }
        let identity = vec![0; k];
        prop_assert_eq!(t.contains(&identity).unwrap(), !box_intersect(&bi.boxes().unwrap()[0], &bj.boxes().unwrap()[0]).unwrap().is_empty());
    }

    #[test]
    fn oracle_window_monotone((seed, p) in lattice_seed(), gw in 2i64..6, xw in 2i64..6) {
        let a = random_instance(seed, p).unwrap();
        let b0 = bornology_level(&a.bornology, a.dim(), 1).unwrap();
        let small = oracle_transporter(&a, &b0, &b0, gw, xw).elements;
        let large = oracle_transporter(&a, &b0, &b0, gw + 2, xw + 3).elements;
        for l in &small {
            prop_assert!(large.contains(l), "{:?} lost", l);
        }
    }

    #[test]
    fn classification_implications((seed, p) in lattice_seed()) {
        let a = random_instance(seed, p).unwrap();
        let c = classify(&a, &Budget::new(16, 4)).unwrap();
        if c.b_proper.holds.is_yes() {
            prop_assert!(c.weakly_b_proper.holds.is_yes());
        }
        if c.weakly_b_proper.holds.is_yes() {
            prop_assert!(c.bounded_isotropy.holds.is_yes());
        }
    }
}
