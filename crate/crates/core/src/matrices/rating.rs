//! Ordinal scales, ratings with an explicit uncertain category, and rating intervals.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A totally ordered set of named levels.
pub trait OrdinalScale: Copy + Ord + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
    const LEVELS: &'static [Self];

    /// Sidecar token, e.g. `a_little`.
    fn token(self) -> &'static str;

    /// Display label, e.g. `A little`.
    fn label(self) -> &'static str;

    fn from_token(token: &str) -> Option<Self> {
        let t = token.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Self::LEVELS.iter().copied().find(|l| l.token() == t)
    }
}

/// Likelihood, impact, severity and confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level3 {
    Low,
    Medium,
    High,
}

impl OrdinalScale for Level3 {
    const NAME: &'static str = "low-medium-high";
    const LEVELS: &'static [Self] = &[Level3::Low, Level3::Medium, Level3::High];

    fn token(self) -> &'static str {
        match self {
            Level3::Low => "low",
            Level3::Medium => "medium",
            Level3::High => "high",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Level3::Low => "Low",
            Level3::Medium => "Medium",
            Level3::High => "High",
        }
    }
}

/// Degree of constraint on autonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level5 {
    No,
    Unlikely,
    ALittle,
    ALot,
    Yes,
}

impl OrdinalScale for Level5 {
    const NAME: &'static str = "no-to-yes";
    const LEVELS: &'static [Self] = &[
        Level5::No,
        Level5::Unlikely,
        Level5::ALittle,
        Level5::ALot,
        Level5::Yes,
    ];

    fn token(self) -> &'static str {
        match self {
            Level5::No => "no",
            Level5::Unlikely => "unlikely",
            Level5::ALittle => "a_little",
            Level5::ALot => "a_lot",
            Level5::Yes => "yes",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Level5::No => "No",
            Level5::Unlikely => "Unlikely",
            Level5::ALittle => "A little",
            Level5::ALot => "A lot",
            Level5::Yes => "Yes",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("`{value}` is not a valid {scale} rating")]
pub struct RatingParseError {
    pub value: String,
    pub scale: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rating<S> {
    Known(S),
    Uncertain,
    NotApplicable,
}

impl<S: OrdinalScale> Rating<S> {
    pub fn token(self) -> &'static str {
        match self {
            Rating::Known(l) => l.token(),
            Rating::Uncertain => "uncertain",
            Rating::NotApplicable => "n/a",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Rating::Known(l) => l.label(),
            Rating::Uncertain => "Uncertain",
            Rating::NotApplicable => "n/a",
        }
    }

    /// Case-insensitive; accepts `uncertain` and `n/a` besides the scale's levels.
    pub fn parse(value: &str) -> Result<Self, RatingParseError> {
        let v = value.trim().to_ascii_lowercase();
        match v.as_str() {
            "uncertain" => Ok(Rating::Uncertain),
            "n/a" | "na" => Ok(Rating::NotApplicable),
            _ => S::from_token(&v).map(Rating::Known).ok_or(RatingParseError {
                value: value.to_string(),
                scale: S::NAME,
            }),
        }
    }

    pub fn known(self) -> Option<S> {
        match self {
            Rating::Known(l) => Some(l),
            _ => None,
        }
    }
}

impl<S: OrdinalScale> fmt::Display for Rating<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl<S: OrdinalScale> Serialize for Rating<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        serializer.serialize_str(self.token())
    }
}

impl<'de, S: OrdinalScale> Deserialize<'de> for Rating<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rating::parse(&s).map_err(D::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("interval bounds out of order")]
    Inverted,
    #[error("`{0}` is not a rendered rating interval")]
    Unrecognized(String),
}

/// A hull of known levels, plus a flag recording whether `Uncertain` is also covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatingInterval<S> {
    known: Option<(S, S)>,
    uncertain: bool,
}

impl<S: OrdinalScale> RatingInterval<S> {
    pub fn empty() -> Self {
        Self {
            known: None,
            uncertain: false,
        }
    }

    pub fn point(level: S) -> Self {
        Self {
            known: Some((level, level)),
            uncertain: false,
        }
    }

    pub fn range(lo: S, hi: S) -> Result<Self, IntervalError> {
        if lo > hi {
            return Err(IntervalError::Inverted);
        }
        Ok(Self {
            known: Some((lo, hi)),
            uncertain: false,
        })
    }

    pub fn uncertain_only() -> Self {
        Self {
            known: None,
            uncertain: true,
        }
    }

    pub fn with_uncertain(mut self, uncertain: bool) -> Self {
        self.uncertain = uncertain;
        self
    }

    pub fn lo(&self) -> Option<S> {
        self.known.map(|k| k.0)
    }

    pub fn hi(&self) -> Option<S> {
        self.known.map(|k| k.1)
    }

    pub fn bounds(&self) -> Option<(S, S)> {
        self.known
    }

    pub fn is_uncertain(&self) -> bool {
        self.uncertain
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_none() && !self.uncertain
    }

    /// `NotApplicable` is always covered; it asserts nothing.
    pub fn covers(&self, rating: Rating<S>) -> bool {
        match rating {
            Rating::Known(l) => matches!(self.known, Some((lo, hi)) if lo <= l && l <= hi),
            Rating::Uncertain => self.uncertain,
            Rating::NotApplicable => true,
        }
    }

    pub fn include(&mut self, rating: Rating<S>) {
        match rating {
            Rating::Known(l) => {
                self.known = Some(match self.known {
                    Some((lo, hi)) => (lo.min(l), hi.max(l)),
                    None => (l, l),
                })
            }
            Rating::Uncertain => self.uncertain = true,
            Rating::NotApplicable => {}
        }
    }

    pub fn hull(ratings: impl IntoIterator<Item = Rating<S>>) -> Self {
        let mut out = Self::empty();
        for r in ratings {
            out.include(r);
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        if let Some((lo, hi)) = other.known {
            out.include(Rating::Known(lo));
            out.include(Rating::Known(hi));
        }
        out.uncertain |= other.uncertain;
        out
    }

    /// `Medium`, `Medium to high`, `Uncertain`, `Some uncertainty (high)`,
    /// `Some uncertainty (medium to high)`; `None` for the empty interval.
    pub fn render(&self) -> String {
        let known = self.known.map(|(lo, hi)| {
            if lo == hi {
                lo.label().to_string()
            } else {
                format!("{} to {}", lo.label(), hi.label().to_ascii_lowercase())
            }
        });
        match (known, self.uncertain) {
            (None, false) => "None".to_string(),
            (None, true) => "Uncertain".to_string(),
            (Some(k), false) => k,
            (Some(k), true) => format!("Some uncertainty ({})", k.to_ascii_lowercase()),
        }
    }

    /// Inverse of [`render`](Self::render), case-insensitive. Also accepts the
    /// `Uncertain to X` shorthand for a known part plus uncertainty.
    pub fn parse_rendered(text: &str) -> Result<Self, IntervalError> {
        let unrecognized = || IntervalError::Unrecognized(text.to_string());
        let t = text.trim().to_ascii_lowercase();
        let known_part = |s: &str| -> Result<Self, IntervalError> {
            let s = s.trim();
            match s.split_once(" to ") {
                Some((lo, hi)) => Self::range(
                    S::from_token(lo).ok_or_else(unrecognized)?,
                    S::from_token(hi).ok_or_else(unrecognized)?,
                ),
                None => Ok(Self::point(S::from_token(s).ok_or_else(unrecognized)?)),
            }
        };
        if t == "none" {
            return Ok(Self::empty());
        }
        if t == "uncertain" {
            return Ok(Self::uncertain_only());
        }
        if let Some(inner) = t
            .strip_prefix("some uncertainty (")
            .and_then(|r| r.strip_suffix(')'))
        {
            return Ok(known_part(inner)?.with_uncertain(true));
        }
        if let Some(rest) = t.strip_prefix("uncertain to ") {
            return Ok(known_part(rest)?.with_uncertain(true));
        }
        known_part(&t)
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr<S> {
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    lo: Option<S>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    hi: Option<S>,
    #[serde(default)]
    uncertain: bool,
}

struct LevelRepr<S>(S);

impl<S: OrdinalScale> Serialize for LevelRepr<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        serializer.serialize_str(self.0.token())
    }
}

impl<'de, S: OrdinalScale> Deserialize<'de> for LevelRepr<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        S::from_token(&s)
            .map(LevelRepr)
            .ok_or_else(|| D::Error::custom(format!("`{s}` is not a {} level", S::NAME)))
    }
}

impl<S: OrdinalScale> Serialize for RatingInterval<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        IntervalRepr {
            lo: self.lo().map(LevelRepr),
            hi: self.hi().map(LevelRepr),
            uncertain: self.uncertain,
        }
        .serialize(serializer)
    }
}

impl<'de, S: OrdinalScale> Deserialize<'de> for RatingInterval<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = IntervalRepr::<LevelRepr<S>>::deserialize(deserializer)?;
        let known = match (repr.lo, repr.hi) {
            (Some(lo), Some(hi)) => Some((lo.0, hi.0)),
            (None, None) => None,
            _ => return Err(D::Error::custom("interval needs both `lo` and `hi` or neither")),
        };
        if matches!(known, Some((lo, hi)) if lo > hi) {
            return Err(D::Error::custom(IntervalError::Inverted));
        }
        Ok(Self {
            known,
            uncertain: repr.uncertain,
        })
    }
}

impl Serialize for Level3 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for Level3 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Level3::from_token(&s).ok_or_else(|| serde::de::Error::custom(format!("`{s}` is not a level")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Level3::*;

    #[test]
    fn parse_is_case_insensitive() {
        assert_eq!(Rating::<Level3>::parse("HIGH"), Ok(Rating::Known(High)));
        assert_eq!(Rating::<Level3>::parse("Uncertain"), Ok(Rating::Uncertain));
        assert_eq!(Rating::<Level5>::parse("a_little"), Ok(Rating::Known(Level5::ALittle)));
        assert_eq!(Rating::<Level5>::parse("A lot"), Ok(Rating::Known(Level5::ALot)));
        assert_eq!(Rating::<Level5>::parse("N/A"), Ok(Rating::NotApplicable));
        assert!(Rating::<Level3>::parse("very high").is_err());
        assert!(Rating::<Level3>::parse("yes").is_err());
    }

    #[test]
    fn covers_definition() {
        let i = RatingInterval::range(Medium, High).unwrap().with_uncertain(true);
        assert!(i.covers(Rating::Known(Medium)));
        assert!(i.covers(Rating::Uncertain));
        assert!(!i.covers(Rating::Known(Low)));
        assert!(!RatingInterval::point(High).covers(Rating::Uncertain));
        assert!(!RatingInterval::<Level3>::uncertain_only().covers(Rating::Known(Low)));
    }

    #[test]
    fn hull_of_table_rows() {
        let h = RatingInterval::hull([Rating::Known(High), Rating::Uncertain]);
        assert_eq!(h.bounds(), Some((High, High)));
        assert!(h.is_uncertain());
        assert_eq!(h.render(), "Some uncertainty (high)");
    }

    #[test]
    fn rendering() {
        assert_eq!(RatingInterval::range(Medium, High).unwrap().render(), "Medium to high");
        assert_eq!(RatingInterval::point(Medium).render(), "Medium");
        assert_eq!(RatingInterval::<Level3>::uncertain_only().render(), "Uncertain");
        assert_eq!(
            RatingInterval::<Level3>::parse_rendered("Uncertain to medium").unwrap(),
            RatingInterval::point(Medium).with_uncertain(true)
        );
        assert_eq!(
            RatingInterval::<Level3>::parse_rendered("Low to medium").unwrap(),
            RatingInterval::range(Low, Medium).unwrap()
        );
        assert!(RatingInterval::<Level3>::parse_rendered("high to low").is_err());
        assert!(RatingInterval::<Level3>::parse_rendered("loads").is_err());
    }

    #[test]
    fn render_parse_bijection_on_every_interval() {
        let mut all = vec![RatingInterval::<Level3>::empty(), RatingInterval::uncertain_only()];
        for (i, lo) in Level3::LEVELS.iter().enumerate() {
            for hi in &Level3::LEVELS[i..] {
                let k = RatingInterval::range(*lo, *hi).unwrap();
                all.push(k);
                all.push(k.with_uncertain(true));
            }
        }
        let mut rendered: Vec<String> = all.iter().map(|i| i.render()).collect();
        for (i, r) in all.iter().zip(&rendered) {
            assert_eq!(RatingInterval::parse_rendered(r).as_ref(), Ok(i), "{r}");
        }
        rendered.sort();
        rendered.dedup();
        assert_eq!(rendered.len(), all.len());
    }

    #[test]
    fn serde_shape() {
        let i = RatingInterval::range(Low, Medium).unwrap().with_uncertain(true);
        let json = serde_json::to_string(&i).unwrap();
        assert_eq!(json, r#"{"lo":"low","hi":"medium","uncertain":true}"#);
        let back: RatingInterval<Level3> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);
        assert!(serde_json::from_str::<RatingInterval<Level3>>(r#"{"lo":"high","hi":"low"}"#).is_err());
        assert!(serde_json::from_str::<RatingInterval<Level3>>(r#"{"lo":"high"}"#).is_err());
    }
}
