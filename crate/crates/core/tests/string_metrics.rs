use linkforge::names::{jaro, jaro_winkler, parse_name};
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    "[A-F]{0,12}"
}

proptest! {
    #[test]
    fn symmetric_and_bounded(a in word(), b in word()) {
        let ab = jaro_winkler(&a, &b);
        prop_assert_eq!(ab, jaro_winkler(&b, &a));
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn prefix_boost_never_lowers(a in word(), b in word()) {
        prop_assert!(jaro_winkler(&a, &b) >= jaro(&a, &b));
    }

    #[test]
    fn identical_nonempty_scores_one(a in "[A-Z]{1,15}") {
        prop_assert_eq!(jaro_winkler(&a, &a), 1.0);
    }

    #[test]
    fn unicode_input_stays_in_range(a in "\\PC{0,10}", b in "\\PC{0,10}") {
        let s = jaro_winkler(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn parsing_ignores_case(first in "[a-z]{2,8}", last in "[a-z]{2,10}") {
        let lower = parse_name(&format!("{first} {last}"));
        let upper = parse_name(&format!("{} {}", first.to_uppercase(), last.to_uppercase()));
        prop_assert_eq!(lower.ok(), upper.ok());
    }
}

#[test]
fn disjoint_strings_score_zero() {
    assert_eq!(jaro_winkler("ABC", "XYZ"), 0.0);
    assert_eq!(jaro_winkler("", "ABC"), 0.0);
}
