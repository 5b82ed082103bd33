use std::cmp::Ordering;

use proptest::prelude::*;

use fractarith::certifier;
use fractarith::exactnum::{root_isolate, Poly, RatInterval, Rational};
use fractarith::exprfn::{Expr, Var};
use fractarith::ifs_core::{CylinderWord, HomogeneousIfs};
use fractarith::qexp::{self, Base, Decision, DigitSeq, QuasiGreedy, DEFAULT_BUDGET};
use fractarith::union::IntervalUnion;

const FUNCTIONS: &[&str] = &[
    "x*y",
    "x/y",
    "x^2+y^2",
    "x^2-y^2",
    "x^3 - 2*x*y + 1/3",
    "(x+1)/(y+2)",
    "x^(1/2)*y",
    "-x + 5*y",
    "(x*y)^(-2)",
];

fn rational(lo: i64, hi: i64, denom: i64) -> impl Strategy<Value = Rational> {
    (lo * denom..=hi * denom).prop_map(move |n| Rational::frac(n, denom))
}

/// A sub-interval of `[1/4, 2]`.
fn interval() -> impl Strategy<Value = RatInterval> {
    (25i64..=200, 0i64..=60).prop_map(|(a, w)| {
        let lo = Rational::frac(a, 100);
        let hi = Rational::frac((a + w).min(200), 100);
        RatInterval::new(lo, hi).unwrap()
    })
}

fn point_in(iv: &RatInterval, t: u32) -> Rational {
    iv.lo() + iv.width() * Rational::frac(t as i64, 1000)
}

fn ifs() -> impl Strategy<Value = HomogeneousIfs> {
    (2usize..=4, 1i64..=9).prop_flat_map(|(n, lambda_num)| {
        let lambda = Rational::frac(lambda_num, 10 * n as i64);
        proptest::collection::btree_set(0i64..=20, n).prop_map(move |ts| {
            let ts = ts.into_iter().map(|t| Rational::frac(t, 20)).collect();
            HomogeneousIfs::new(lambda.clone(), ts).unwrap()
        })
    })
}

fn digit_seq() -> impl Strategy<Value = DigitSeq> {
    (proptest::collection::vec(0u8..=1, 0..4), proptest::collection::vec(0u8..=1, 1..5))
        .prop_map(|(pre, per)| DigitSeq::new(pre, per).unwrap())
}

/// `Σ c_i x^i` term by term.
fn eval_by_powers(coeffs: &[i64], x: &Rational) -> Rational {
    coeffs.iter().enumerate().map(|(i, c)| Rational::from(*c) * x.pow(i as i64).unwrap()).sum()
}

/// Expression text from a small grammar.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (1i64..=9, 1i64..=4).prop_map(|(p, q)| if q == 1 { p.to_string() } else { format!("({p}/{q})") }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / {b})")),
            (inner.clone(), 2i64..=3).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = Rational::frac(n, d);
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
    }

    #[test]
    fn interval_ops_contain_pointwise_results(a in interval(), b in interval(), s in 0u32..=1000, t in 0u32..=1000) {
        let (x, y) = (point_in(&a, s), point_in(&b, t));
        prop_assert!(a.add(&b).contains(&(&x + &y)));
        prop_assert!(a.sub(&b).contains(&(&x - &y)));
        prop_assert!(a.mul(&b).contains(&(&x * &y)));
        prop_assert!(a.div(&b).unwrap().contains(&(&x / &y)));
        prop_assert!(a.powi(3).unwrap().contains(&x.pow(3).unwrap()));
    }

    #[test]
    fn enclosures_are_sound(
        k in 0..FUNCTIONS.len(),
        a in interval(),
        b in interval(),
        s in 0u32..=1000,
        t in 0u32..=1000,
    ) {
        let f: Expr = FUNCTIONS[k].parse().unwrap();
        let (x, y) = (point_in(&a, s), point_in(&b, t));
        let box_range = f.eval_interval(&a, &b).unwrap();
        let value = f.eval_point(&x, &y).unwrap();
        prop_assert!(box_range.intersect(&value).is_some(), "{} at ({}, {}): {} vs {}", FUNCTIONS[k], x, y, value, box_range);
        let approx = f.eval_f64(x.to_f64(), y.to_f64());
        let slack = 1e-9 * (1.0 + approx.abs());
        prop_assert!(box_range.lo().to_f64() - slack <= approx && approx <= box_range.hi().to_f64() + slack);
    }

    #[test]
    fn refinement_nests(k in 0..FUNCTIONS.len(), a in interval(), b in interval()) {
        let f: Expr = FUNCTIONS[k].parse().unwrap();
        let whole = f.eval_interval(&a, &b).unwrap();
        let (a1, a2) = a.bisect();
        let (b1, b2) = b.bisect();
        for (i, j) in [(&a1, &b1), (&a1, &b2), (&a2, &b1), (&a2, &b2)] {
            prop_assert!(f.eval_interval(i, j).unwrap().is_subset_of(&whole));
        }
    }

    #[test]
    fn difference_quotients_lie_in_gradient_enclosures(
        k in 0..6usize,
        x in rational(1, 2, 64),
        y in rational(1, 2, 64),
        h in 1i64..=16,
    ) {
        let f: Expr = FUNCTIONS[k].parse().unwrap();
        let h = Rational::frac(h, 256);
        let (x2, y2) = (&x + &h, &y + &h);
        let rect = (RatInterval::new(x.clone(), x2.clone()).unwrap(), RatInterval::new(y.clone(), y2.clone()).unwrap());
        let grad = f.grad_enclosure(&rect.0, &rect.1).unwrap();
        let point = |a: &Rational, b: &Rational| f.eval_point(a, b).unwrap().lo().clone();
        let qx = (point(&x2, &y) - point(&x, &y)) / &h;
        let qy = (point(&x, &y2) - point(&x, &y)) / &h;
        prop_assert!(grad.dx.contains(&qx), "{}: {} not in {}", FUNCTIONS[k], qx, grad.dx);
        prop_assert!(grad.dy.contains(&qy), "{}: {} not in {}", FUNCTIONS[k], qy, grad.dy);
    }

    #[test]
    fn expressions_print_and_parse_back(text in expr_text()) {
        let Ok(e) = text.parse::<Expr>() else { return Ok(()); };
        let printed = e.to_string();
        let again: Expr = printed.parse().unwrap();
        prop_assert_eq!(again.to_string(), printed);
        prop_assert_eq!(again.differentiate(Var::X).to_string(), e.differentiate(Var::X).to_string());
    }

    #[test]
    fn poly_sign_matches_power_sum(coeffs in proptest::collection::vec(-20i64..=20, 1..6), x in rational(-3, 3, 7)) {
        let p = Poly::from_ints(&coeffs);
        prop_assert_eq!(p.sign_at(&x), eval_by_powers(&coeffs, &x).signum());
    }

    #[test]
    fn algebraic_sign_matches_numeric_enclosure(
        coeffs in proptest::collection::vec(-6i64..=6, 2..5),
        lead in 1i64..=3,
        g in proptest::collection::vec(-6i64..=6, 1..4),
    ) {
        let mut coeffs = coeffs;
        coeffs.push(lead);
        let p = Poly::from_ints(&coeffs);
        let g = Poly::from_ints(&g);
        let window = RatInterval::new(Rational::from(-50), Rational::from(50)).unwrap();
        for root in root_isolate(&p, &window).unwrap() {
            let fine = root.refine(&Rational::frac(1, 1 << 40)).unwrap();
            let numeric = g.eval_interval(&fine);
            if let Some(s) = numeric.strict_sign() {
                prop_assert_eq!(root.sign_of(&g), s);
            } else if g.is_zero() {
                prop_assert_eq!(root.sign_of(&g), 0);
            }
        }
    }

    #[test]
    fn level_covers_shrink(k in ifs(), rank in 0usize..5) {
        let outer = k.level_cover(rank, 1 << 16).unwrap();
        let inner = k.level_cover(rank + 1, 1 << 16).unwrap();
        prop_assert!(inner.is_subset_of(&outer));
        prop_assert!(inner.total_length() <= outer.total_length());
    }

    #[test]
    fn children_sit_in_parents(k in ifs(), digits in proptest::collection::vec(1u32..=2, 0..6), d in 1u32..=2) {
        let w = CylinderWord::new(digits);
        let parent = k.basic_interval(&w).unwrap();
        let child = k.basic_interval(&w.child(d)).unwrap();
        prop_assert!(child.is_subset_of(&parent));
        prop_assert_eq!(child.width(), parent.width() * k.ratio());
    }

    #[test]
    fn union_normal_form(raw in proptest::collection::vec((0i64..=100, 0i64..=20), 0..12)) {
        let ivs: Vec<RatInterval> = raw
            .iter()
            .map(|(a, w)| RatInterval::new(Rational::frac(*a, 10), Rational::frac(a + w, 10)).unwrap())
            .collect();
        let u = IntervalUnion::from_intervals(ivs.clone());
        for iv in &ivs {
            prop_assert!(u.contains_interval(iv));
        }
        for pair in u.intervals().windows(2) {
            prop_assert!(pair[0].hi() < pair[1].lo());
        }
        prop_assert_eq!(IntervalUnion::from_intervals(u.intervals().to_vec()), u);
    }

    #[test]
    fn affine_margins_are_scale_free(
        alpha in 1i64..=5,
        beta in -5i64..=5,
        w1 in proptest::collection::vec(1u32..=2, 0..3),
        w2 in proptest::collection::vec(1u32..=2, 0..3),
        d1 in 1u32..=2,
        d2 in 1u32..=2,
    ) {
        prop_assume!(beta != 0);
        let c = HomogeneousIfs::cantor();
        let f: Expr = format!("{alpha}*x + ({beta})*y").parse().unwrap();
        let (w1, w2) = (CylinderWord::new(w1), CylinderWord::new(w2));
        let parent = certifier::certify_rectangle(&c, &c, &f, &w1, &w2);
        let child = certifier::certify_rectangle(&c, &c, &f, &w1.child(d1), &w2.child(d2));
        match (parent, child) {
            (Ok(p), Ok(ch)) => {
                prop_assert_eq!(&p.margins, &ch.margins);
                prop_assert_eq!(&p.transposed_margins, &ch.transposed_margins);
                prop_assert!(certifier::replay(&ch).valid);
            }
            (Err(_), Err(_)) => {}
            (p, ch) => prop_assert!(false, "parent {:?} child {:?}", p.is_ok(), ch.is_ok()),
        }
    }

    #[test]
    fn digit_seq_text_round_trip(s in digit_seq()) {
        prop_assert_eq!(s.to_string().parse::<DigitSeq>().unwrap(), s.clone());
        prop_assert_eq!(s.complement().complement(), s);
    }

    #[test]
    fn univoque_is_symmetric(s in digit_seq(), p in 151i64..=199) {
        let q = Base::rational(Rational::frac(p, 100)).unwrap();
        let mut eta = QuasiGreedy::new(&q, DEFAULT_BUDGET);
        let a = qexp::is_univoque_seq(&s, &mut eta);
        let b = qexp::is_univoque_seq(&s.complement(), &mut eta);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn eta_grows_with_q(p1 in 1010i64..=1990, p2 in 1010i64..=1990) {
        prop_assume!(p1 != p2);
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        let prefix = |p: i64| QuasiGreedy::new(&Base::rational(Rational::frac(p, 1000)).unwrap(), 48).prefix_text(48);
        prop_assert!(prefix(lo) <= prefix(hi));
    }

    #[test]
    fn kq_hull_and_gap_ratio(p in 1420i64..=1990) {
        let qr = Rational::frac(p, 1000);
        let k = qexp::kq_ifs(&Base::rational(qr.clone()).unwrap()).unwrap();
        let d = &qr * &qr - Rational::one();
        let hull = RatInterval::new(Rational::one() / &d, &qr / &d).unwrap();
        prop_assert_eq!(k.convex_hull(), hull.clone());
        let lambda = k.ratio().clone();
        prop_assert_eq!(k.kappa() / hull.width(), Rational::one() - Rational::from(2) * lambda);
    }

    #[test]
    fn kq_containment_flips_at_qstar(p in 17500i64..=19990) {
        let q = Base::rational(Rational::frac(p, 10_000)).unwrap();
        let expected = if q.cmp_qstar() == Ordering::Greater { Decision::Yes } else { Decision::No };
        prop_assert_eq!(qexp::verify_kq_in_uq(&q, DEFAULT_BUDGET).verdict, expected);
    }
}

#[test]
fn qstar_neighbours() {
    for (p, expected) in [(18019, Decision::No), (18020, Decision::Yes)] {
        let q = Base::rational(Rational::frac(p, 10_000)).unwrap();
        assert_eq!(qexp::verify_kq_in_uq(&q, DEFAULT_BUDGET).verdict, expected, "{p}");
    }
}
