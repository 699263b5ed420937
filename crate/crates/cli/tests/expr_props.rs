use proptest::prelude::*;
use weightlab_cli::expr::{parse_expr, ParseErrorKind, WeightExpr};

fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6f64..1e6, (1u32..50).prop_map(f64::from), (1u32..8).prop_map(|k| 1.0 / f64::from(k))]
}

fn expr() -> impl Strategy<Value = WeightExpr> {
    let leaf = prop_oneof![
        literal().prop_map(WeightExpr::Gevrey),
        literal().prop_map(WeightExpr::IdPow),
        "[a-z0-9_./-]{1,12}".prop_map(WeightExpr::Assoc),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightExpr::Lower(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightExpr::Upper(Box::new(a), Box::new(b))),
            (inner.clone(), literal()).prop_map(|(e, a)| WeightExpr::Pow(Box::new(e), a)),
            inner.prop_map(|e| WeightExpr::Inv(Box::new(e))),
        ]
    })
}

/// Inserts random whitespace around every delimiter.
fn spaced(text: &str, pads: &[usize]) -> String {
    let mut out = String::new();
    let mut k = 0;
    for c in text.chars() {
        if matches!(c, '(' | ')' | ',') {
            out.push_str(&" ".repeat(pads[k % pads.len()]));
            out.push(c);
            out.push_str(&"\t".repeat(pads[(k + 1) % pads.len()] % 2));
            k += 1;
        } else if c != ' ' {
            out.push(c);
        }
    }
    out
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn whitespace_is_insignificant(e in expr(), pads in prop::collection::vec(0usize..3, 1..6)) {
        prop_assert_eq!(parse_expr(&spaced(&e.to_string(), &pads)).unwrap(), e);
    }

    #[test]
    fn nonpositive_literals_point_at_the_literal(e in expr(), bad in prop_oneof![Just("0"), Just("-1"), Just("-0.5"), Just("0.0")]) {
        let text = format!("pow({e}, {bad})");
        let err = parse_expr(&text).unwrap_err();
        prop_assert_eq!(err.kind, ParseErrorKind::NonPositive);
        prop_assert_eq!(err.offset, text.len() - bad.len() - 1);
    }
}
