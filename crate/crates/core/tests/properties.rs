use divgrad_core::checks::catalog;
use divgrad_core::solver::normalize;
use divgrad_core::textio::{format_vector, parse_vector};
use divgrad_core::{Field, LogParams};
use proptest::prelude::*;

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, n)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..10).prop_flat_map(|n| (field(n), field(n)))
}

fn log_params() -> impl Strategy<Value = LogParams> {
    (0.05f64..0.999, 1.001f64..3.0, any::<bool>())
        .prop_map(|(lo, hi, swap)| if swap { LogParams::new(hi, lo) } else { LogParams::new(lo, hi) }.unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn u_minus_v_is_opposite_gradient(idx in 0usize..1000, (p, q) in pair()) {
        let objectives = catalog();
        let obj = &objectives[idx % objectives.len()];
        let (p, q) = (Field::new(p).unwrap(), Field::new(q).unwrap());
        let d = obj.decompose(&p, &q).unwrap();
        for j in 0..q.len() {
            let mag = d.u[j].abs() + d.v[j].abs() + d.grad[j].abs();
            prop_assert!((d.u[j] - d.v[j] + d.grad[j]).abs() <= 1e-10 * mag.max(1e-300));
            prop_assert!(d.u[j] >= 0.0 && d.v[j] >= 0.0);
            if d.strict {
                prop_assert!(d.u[j] > 0.0 && d.v[j] > 0.0);
            }
        }
    }

    #[test]
    fn invariant_forms_ignore_model_scale(idx in 0usize..1000, (p, q) in pair(), lambda in 0.05f64..20.0) {
        let objectives: Vec<_> = catalog().into_iter().filter(|o| o.is_invariant()).collect();
        let obj = &objectives[idx % objectives.len()];
        let (p, q) = (Field::new(p).unwrap(), Field::new(q).unwrap());
        let d = obj.value(&p, &q).unwrap();
        let dl = obj.value(&p, &q.scaled(lambda).unwrap()).unwrap();
        prop_assert!((d - dl).abs() <= 1e-9 * (1.0 + d.abs()), "{d} vs {dl}");
    }

    #[test]
    fn deformed_log_is_increasing_and_vanishes_at_one(lp in log_params(), x in 0.01f64..100.0, y in 0.01f64..100.0) {
        prop_assert_eq!(lp.log(1.0).unwrap(), 0.0);
        prop_assert!(lp.dlog(x).unwrap() > 0.0);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assert!(lp.log(lo).unwrap() <= lp.log(hi).unwrap());
    }

    #[test]
    fn normalization_hits_target_and_keeps_ratios(x in field(12), target in 0.1f64..1e4) {
        let xn = normalize(&x, target);
        let s: f64 = xn.iter().sum();
        prop_assert!((s - target).abs() <= 1e-12 * target);
        for j in 1..x.len() {
            prop_assert!((xn[j] / xn[0] - x[j] / x[0]).abs() <= 1e-13 * (x[j] / x[0]));
        }
    }

    #[test]
    fn vector_text_round_trips_exactly(v in prop::collection::vec(-1e300f64..1e300, 1..20)) {
        prop_assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
    }
}
