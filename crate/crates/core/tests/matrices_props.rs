mod common;

use common::hull::{benefit_rows, hull_is_sound, rating3, risk_rows, smallest_cover};
use eaa_core::matrices::{
    analyze, check_role_combinations, combine_justice, propose_summary, FlagRule, Level3, Matrices, Rating,
    RatingInterval, RiskRow,
};
use eaa_core::stakeholder::{Stakeholder, StakeholderRegistry};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn proposed_risk_summary_is_the_smallest_cover(rows in risk_rows()) {
        hull_is_sound(&rows).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn proposed_benefit_summary_is_the_smallest_cover(rows in benefit_rows()) {
        hull_is_sound(&rows).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn hull_grows_monotonically(rows in risk_rows(), extra in [rating3(), rating3(), rating3()]) {
        let ids: Vec<String> = (0..=rows.len()).map(|i| format!("r{i}")).collect();
        let pairs: Vec<(&str, &RiskRow)> = ids.iter().map(String::as_str).zip(&rows).collect();
        let before = propose_summary("group", &pairs).unwrap();
        let mut more = rows.clone();
        more.push(RiskRow::new("group", "extra", extra));
        let pairs: Vec<(&str, &RiskRow)> = ids.iter().map(String::as_str).zip(&more).collect();
        let after = propose_summary("group", &pairs).unwrap();
        for (b, a) in before.axes().into_iter().zip(after.axes()) {
            prop_assert_eq!(b.union(a), *a);
        }
    }

    #[test]
    fn row_order_does_not_matter(mut rows in risk_rows(), seed in any::<u64>()) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("r{i}")).collect();
        let pairs: Vec<(&str, &RiskRow)> = ids.iter().map(String::as_str).zip(&rows).collect();
        let first = propose_summary("group", &pairs).unwrap();
        let k = (seed as usize) % rows.len();
        rows.rotate_left(k);
        rows.reverse();
        let pairs: Vec<(&str, &RiskRow)> = ids.iter().map(String::as_str).zip(&rows).collect();
        prop_assert_eq!(propose_summary("group", &pairs).unwrap(), first);
    }

    #[test]
    fn rendering_round_trips(values in proptest::collection::vec(rating3(), 0..6)) {
        let interval = smallest_cover(&values);
        if !interval.is_empty() {
            prop_assert_eq!(RatingInterval::<Level3>::parse_rendered(&interval.render()).unwrap(), interval);
        }
    }

    /// R1 fires exactly when some risk row asserts something and no benefit
    /// row does; rows rated N/A on every axis assert nothing.
    #[test]
    fn r1_tracks_benefit_presence(risks in risk_rows(), benefits in benefit_rows()) {
        let registry = StakeholderRegistry::new(vec![Stakeholder::new("group", "Group")]).unwrap();
        let na = Rating::NotApplicable;
        let risk_present = risks.iter().any(|r| [r.likelihood, r.severity, r.confidence] != [na; 3]);
        let benefit_present = benefits.iter().any(|b| [b.likelihood, b.impact, b.confidence] != [na; 3]);
        let r1 = |m: &Matrices| analyze(&registry, m, &[]).flags.iter().any(|f| f.rule == FlagRule::OnlyRisk);
        let risky = Matrices { risks: risks.clone(), ..Matrices::default() };
        prop_assert_eq!(r1(&risky), risk_present);
        let both = Matrices { risks, benefits: benefits.clone(), ..Matrices::default() };
        prop_assert_eq!(r1(&both), risk_present && !benefit_present);
        let only_benefit = Matrices { benefits, ..Matrices::default() };
        prop_assert!(!r1(&only_benefit));
    }

    #[test]
    fn flag_evaluation_is_deterministic(risks in risk_rows(), benefits in benefit_rows()) {
        let b = propose_summary("group", &[("b", &benefits[0])]).unwrap();
        let r = propose_summary("group", &[("r", &risks[0])]).unwrap();
        let matrix = combine_justice(&[b], &[r], &[]);
        let config = Default::default();
        prop_assert_eq!(
            check_role_combinations(&matrix, &[], &config),
            check_role_combinations(&matrix.clone(), &[], &config)
        );
    }
}

#[test]
fn oracle_spot_checks() {
    use Level3::*;
    let cover = smallest_cover(&[Rating::Known(Low), Rating::Known(High)]);
    assert_eq!(cover, RatingInterval::range(Low, High).unwrap());
    let cover = smallest_cover(&[Rating::Uncertain, Rating::Known(Medium), Rating::NotApplicable]);
    assert_eq!(cover, RatingInterval::point(Medium).with_uncertain(true));
    assert!(smallest_cover(&[Rating::NotApplicable]).is_empty());
}
