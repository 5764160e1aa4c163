//! Random detailed rows and a brute-force oracle for their distilled summary.

use eaa_core::matrices::{
    check_summary, propose_summary, AssessedRow, BenefitRow, Level3, Rating, RatingInterval, RiskRow,
};
use proptest::prelude::*;

pub fn rating3() -> impl Strategy<Value = Rating<Level3>> {
    prop_oneof![
        3 => Just(Rating::Known(Level3::Low)),
        3 => Just(Rating::Known(Level3::Medium)),
        3 => Just(Rating::Known(Level3::High)),
        2 => Just(Rating::Uncertain),
        1 => Just(Rating::NotApplicable),
    ]
}

pub fn risk_rows() -> impl Strategy<Value = Vec<RiskRow>> {
    proptest::collection::vec(([rating3(), rating3(), rating3()], "[a-z ]{1,12}"), 1..12)
        .prop_map(|rows| rows.into_iter().map(|(r, kind)| RiskRow::new("group", &kind, r)).collect())
}

pub fn benefit_rows() -> impl Strategy<Value = Vec<BenefitRow>> {
    proptest::collection::vec(([rating3(), rating3(), rating3()], "[a-z ]{1,12}"), 1..12)
        .prop_map(|rows| rows.into_iter().map(|(r, kind)| BenefitRow::new("group", &kind, r)).collect())
}

/// Every interval the scale admits.
fn candidates() -> Vec<RatingInterval<Level3>> {
    let levels = [Level3::Low, Level3::Medium, Level3::High];
    let mut out = vec![RatingInterval::empty(), RatingInterval::uncertain_only()];
    for (i, lo) in levels.iter().enumerate() {
        for hi in &levels[i..] {
            let r = RatingInterval::range(*lo, *hi).unwrap();
            out.push(r);
            out.push(r.with_uncertain(true));
        }
    }
    out
}

fn size(r: &RatingInterval<Level3>) -> usize {
    let known = r.bounds().map_or(0, |(lo, hi)| hi as usize - lo as usize + 1);
    known + r.is_uncertain() as usize
}

/// The smallest interval containing every value, found by enumeration.
pub fn smallest_cover(values: &[Rating<Level3>]) -> RatingInterval<Level3> {
    let covering = |r: &RatingInterval<Level3>| {
        values.iter().all(|v| match v {
            Rating::Known(l) => r.bounds().is_some_and(|(lo, hi)| lo <= *l && *l <= hi),
            Rating::Uncertain => r.is_uncertain(),
            Rating::NotApplicable => true,
        })
    };
    let mut best: Vec<_> = candidates().into_iter().filter(covering).collect();
    best.sort_by_key(size);
    let min = size(&best[0]);
    assert_eq!(best.iter().filter(|r| size(r) == min).count(), 1, "cover is unique");
    best[0]
}

/// The proposed summary passes the coverage check and equals the oracle's
/// smallest cover on every axis.
pub fn hull_is_sound<R: AssessedRow>(rows: &[R]) -> Result<(), String> {
    let ids: Vec<String> = (0..rows.len()).map(|i| format!("group/r{i}")).collect();
    let pairs: Vec<(&str, &R)> = ids.iter().map(String::as_str).zip(rows).collect();
    let summary = propose_summary("group", &pairs).map_err(|e| e.to_string())?;
    let diags = check_summary(&pairs, &summary);
    if !diags.is_empty() {
        return Err(format!("proposed summary fails its own check: {diags:?}"));
    }
    for (axis, got) in summary.axes().into_iter().enumerate() {
        let values: Vec<_> = rows.iter().map(|r| r.axes()[axis]).collect();
        let want = smallest_cover(&values);
        if *got != want {
            return Err(format!("axis {axis}: proposed {got:?}, oracle {want:?}"));
        }
    }
    Ok(())
}
