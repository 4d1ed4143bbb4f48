//! Type-1 targets: numbers, ordinals, years, weekdays, months, clock times
//! and ranges.
//!
//! A recognized surface is parsed into a [`NumericValue`] that remembers how
//! it was written, so a perturbed value can be rendered back in the same
//! form ("Friday" → 5 → 4 → "Thursday", "two" → "three", "1,200" → "1,300").

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::TargetWord;

/// Exact value type used for all numeric targets.
pub type Rational = Ratio<i64>;

/// Draws allowed per requested distractor before giving up.
pub const RETRY_BOUND: usize = 32;

const WEEKDAYS: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

const UNITS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];

const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

const ORDINAL_UNITS: [&str; 20] = [
    "zeroth",
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
    "eleventh",
    "twelfth",
    "thirteenth",
    "fourteenth",
    "fifteenth",
    "sixteenth",
    "seventeenth",
    "eighteenth",
    "nineteenth",
];

const ORDINAL_TENS: [&str; 10] = [
    "",
    "",
    "twentieth",
    "thirtieth",
    "fortieth",
    "fiftieth",
    "sixtieth",
    "seventieth",
    "eightieth",
    "ninetieth",
];

/// Largest value rendered as words ("ninety-nine", "ninety-ninth").
const MAX_WORD_NUMBER: i64 = 99;
const MINUTES_PER_DAY: i64 = 24 * 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("value {value} is outside the renderable domain of {kind}")]
    Unrenderable { kind: NumericKind, value: String },
    #[error("strategy {0} is not valid for this value")]
    InvalidStrategy(String),
    #[error("no value satisfies {strategy} for {kind} {value}")]
    EmptyFeasibleSet {
        strategy: String,
        kind: NumericKind,
        value: String,
    },
    #[error("`{0}` is not a recognized number or time")]
    NotNumeric(String),
    #[error("requested {needed} distinct distractors but only {} were obtainable", found.len())]
    InsufficientCandidates { needed: usize, found: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericKind {
    Cardinal,
    Ordinal,
    Year,
    Weekday,
    Month,
    TimeOfDay,
    Range,
    WordCardinal,
    WordOrdinal,
}

impl NumericKind {
    fn is_cyclic(self) -> bool {
        matches!(self, NumericKind::Weekday | NumericKind::Month)
    }

    fn is_temporal(self) -> bool {
        matches!(
            self,
            NumericKind::Year | NumericKind::Weekday | NumericKind::Month | NumericKind::TimeOfDay
        )
    }

    /// Closed interval of values this kind can render.
    fn domain(self) -> (Rational, Option<Rational>) {
        let int = Rational::from_integer;
        match self {
            NumericKind::Cardinal => (int(0), None),
            NumericKind::Ordinal => (int(1), None),
            NumericKind::Year => (int(1000), Some(int(9999))),
            NumericKind::Weekday => (int(1), Some(int(7))),
            NumericKind::Month => (int(1), Some(int(12))),
            NumericKind::TimeOfDay => (int(0), Some(int(MINUTES_PER_DAY - 1))),
            NumericKind::WordCardinal => (int(0), Some(int(MAX_WORD_NUMBER))),
            NumericKind::WordOrdinal => (int(1), Some(int(MAX_WORD_NUMBER))),
            NumericKind::Range => (int(0), None),
        }
    }
}

impl fmt::Display for NumericKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            NumericKind::Cardinal => "cardinal",
            NumericKind::Ordinal => "ordinal",
            NumericKind::Year => "year",
            NumericKind::Weekday => "weekday",
            NumericKind::Month => "month",
            NumericKind::TimeOfDay => "time-of-day",
            NumericKind::Range => "range",
            NumericKind::WordCardinal => "word-cardinal",
            NumericKind::WordOrdinal => "word-ordinal",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LetterCase {
    Lower,
    Capitalized,
    Upper,
}

impl LetterCase {
    fn detect(word: &str) -> Option<Self> {
        let mut chars = word.chars();
        let first = chars.next()?;
        let rest: String = chars.collect();
        if word.chars().all(|c| !c.is_uppercase()) {
            Some(LetterCase::Lower)
        } else if word.chars().count() > 1 && word.chars().all(|c| !c.is_lowercase()) {
            Some(LetterCase::Upper)
        } else if first.is_uppercase() && rest.chars().all(|c| !c.is_uppercase()) {
            Some(LetterCase::Capitalized)
        } else {
            None
        }
    }

    fn apply(self, word: &str) -> String {
        match self {
            LetterCase::Lower => word.to_lowercase(),
            LetterCase::Upper => word.to_uppercase(),
            LetterCase::Capitalized => {
                let mut chars = word.chars();
                match chars.next() {
                    Some(c) => c.to_uppercase().chain(chars).collect(),
                    None => String::new(),
                }
            }
        }
    }
}

/// How a value was written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurfaceFormat {
    /// Plain digits, optionally with thousands separators and a fixed
    /// number of decimal places.
    Digits { decimals: u32, grouped: bool },
    /// Digits followed by the English ordinal suffix.
    DigitOrdinal,
    /// Spelled out: weekday and month names, word cardinals and ordinals.
    Words { case: LetterCase },
    /// `h:mm` or `hh:mm`; `padded_hour` keeps a leading zero.
    Clock { padded_hour: bool },
    Range {
        element: Box<SurfaceFormat>,
        element_kind: NumericKind,
        separator: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Magnitude {
    Point(Rational),
    Span(Rational, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NumericValue {
    pub magnitude: Magnitude,
    pub kind: NumericKind,
    /// Quantifier attached to the number, such as "percent".
    pub unit: Option<String>,
    pub format: SurfaceFormat,
}

impl NumericValue {
    /// Times, dates and ranges of them.
    pub fn is_temporal(&self) -> bool {
        match (&self.kind, &self.format) {
            (NumericKind::Range, SurfaceFormat::Range { element_kind, .. }) => {
                element_kind.is_temporal()
            }
            (kind, _) => kind.is_temporal(),
        }
    }

    /// The kind governing arithmetic: the element kind for ranges.
    fn element_kind(&self) -> NumericKind {
        match &self.format {
            SurfaceFormat::Range { element_kind, .. } => *element_kind,
            _ => self.kind,
        }
    }

    fn element_format(&self) -> &SurfaceFormat {
        match &self.format {
            SurfaceFormat::Range { element, .. } => element,
            f => f,
        }
    }

    /// The natural unit of change for this value.
    pub fn step(&self) -> Rational {
        match self.element_format() {
            SurfaceFormat::Digits { decimals, .. } => Rational::new(1, 10i64.pow(*decimals)),
            SurfaceFormat::Clock { .. } => Rational::from_integer(60),
            _ => Rational::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    UnitShift,
    LocalRandom,
    GlobalRandom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerturbStrategy {
    /// Move by `delta` steps; `delta` is one of −2, −1, +1, +2.
    UnitShift(i64),
    /// Uniform over the steps within `radius` of the value.
    LocalRandom(u32),
    /// Uniform over `[lo, hi]` on the value's step grid.
    GlobalRandom { lo: Rational, hi: Rational },
}

impl PerturbStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            PerturbStrategy::UnitShift(_) => StrategyKind::UnitShift,
            PerturbStrategy::LocalRandom(_) => StrategyKind::LocalRandom,
            PerturbStrategy::GlobalRandom { .. } => StrategyKind::GlobalRandom,
        }
    }
}

impl fmt::Display for PerturbStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbStrategy::UnitShift(d) => write!(f, "unit-shift({d:+})"),
            PerturbStrategy::LocalRandom(w) => write!(f, "local-random(w={w})"),
            PerturbStrategy::GlobalRandom { lo, hi } => write!(f, "global-random([{lo}, {hi}])"),
        }
    }
}

/// Knobs for type-1 generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericConfig {
    pub strategies: Vec<StrategyKind>,
    pub window_year: u32,
    pub window_cardinal: u32,
    /// Radius in hours for clock times.
    pub window_time_hours: u32,
    /// Radius for weekdays, months, ordinals and spelled-out numbers.
    pub window_other: u32,
    /// Global range for years; widened to contain the value when needed.
    pub year_domain: [i64; 2],
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            strategies: vec![
                StrategyKind::UnitShift,
                StrategyKind::LocalRandom,
                StrategyKind::GlobalRandom,
            ],
            window_year: 10,
            window_cardinal: 5,
            window_time_hours: 2,
            window_other: 2,
            year_domain: [1900, 2100],
        }
    }
}

impl NumericConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.strategies.is_empty() {
            return Err("numeric.strategies must not be empty".into());
        }
        for (name, w) in [
            ("numeric.window_year", self.window_year),
            ("numeric.window_cardinal", self.window_cardinal),
            ("numeric.window_time_hours", self.window_time_hours),
            ("numeric.window_other", self.window_other),
        ] {
            if w < 1 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        if self.year_domain[0] >= self.year_domain[1] {
            return Err("numeric.year_domain must be an increasing pair".into());
        }
        Ok(())
    }

    /// Local window radius, in steps, for a value.
    pub fn window_for(&self, value: &NumericValue) -> u32 {
        match value.element_kind() {
            NumericKind::Year => self.window_year,
            NumericKind::Cardinal => self.window_cardinal,
            NumericKind::TimeOfDay => self.window_time_hours,
            _ => self.window_other,
        }
    }

    /// Domain used by global random replacement.
    pub fn global_domain_for(&self, value: &NumericValue) -> (Rational, Rational) {
        let int = Rational::from_integer;
        let anchor = match value.magnitude {
            Magnitude::Point(x) => x,
            Magnitude::Span(_, hi) => hi,
        };
        let doubled = (anchor * 2).ceil().max(int(10));
        match value.element_kind() {
            NumericKind::Year => {
                let lo = int(self.year_domain[0]).min(anchor - 50);
                let hi = int(self.year_domain[1]).max(anchor + 50);
                (lo.max(int(1000)), hi.min(int(9999)))
            }
            NumericKind::Weekday => (int(1), int(7)),
            NumericKind::Month => (int(1), int(12)),
            NumericKind::TimeOfDay => (int(0), int(MINUTES_PER_DAY - 1)),
            NumericKind::WordCardinal => (int(0), int(20).max(anchor).min(int(MAX_WORD_NUMBER))),
            NumericKind::WordOrdinal => (int(1), int(20).max(anchor).min(int(MAX_WORD_NUMBER))),
            NumericKind::Ordinal => (int(1), doubled),
            NumericKind::Cardinal | NumericKind::Range => (int(0), doubled),
        }
    }
}

struct WordTables {
    cardinals: HashMap<String, i64>,
    ordinals: HashMap<String, i64>,
}

fn word_cardinal(n: i64) -> Option<String> {
    match n {
        0..=19 => Some(UNITS[n as usize].to_string()),
        20..=MAX_WORD_NUMBER if n % 10 == 0 => Some(TENS[(n / 10) as usize].to_string()),
        20..=MAX_WORD_NUMBER => Some(format!(
            "{}-{}",
            TENS[(n / 10) as usize],
            UNITS[(n % 10) as usize]
        )),
        _ => None,
    }
}

fn word_ordinal(n: i64) -> Option<String> {
    match n {
        1..=19 => Some(ORDINAL_UNITS[n as usize].to_string()),
        20..=MAX_WORD_NUMBER if n % 10 == 0 => Some(ORDINAL_TENS[(n / 10) as usize].to_string()),
        20..=MAX_WORD_NUMBER => Some(format!(
            "{}-{}",
            TENS[(n / 10) as usize],
            ORDINAL_UNITS[(n % 10) as usize]
        )),
        _ => None,
    }
}

fn word_tables() -> &'static WordTables {
    static TABLES: OnceLock<WordTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let cardinals = (0..=MAX_WORD_NUMBER)
            .filter_map(|n| word_cardinal(n).map(|w| (w, n)))
            .collect();
        let ordinals = (1..=MAX_WORD_NUMBER)
            .filter_map(|n| word_ordinal(n).map(|w| (w, n)))
            .collect();
        WordTables {
            cardinals,
            ordinals,
        }
    })
}

struct Patterns {
    clock: Regex,
    ordinal: Regex,
    year: Regex,
    cardinal: Regex,
    separator: Regex,
}

fn patterns() -> &'static Patterns {
    static PATTERNS: OnceLock<Patterns> = OnceLock::new();
    PATTERNS.get_or_init(|| Patterns {
        clock: Regex::new(r"^([0-9]{1,2}):([0-5][0-9])$").unwrap(),
        ordinal: Regex::new(r"^(0|[1-9][0-9]{0,14})(st|nd|rd|th)$").unwrap(),
        year: Regex::new(r"^[12][0-9]{3}$").unwrap(),
        cardinal: Regex::new(
            r"^(0|[1-9][0-9]{0,2}(?:,[0-9]{3}){1,4}|[1-9][0-9]{0,14})(?:\.([0-9]{1,6}))?$",
        )
        .unwrap(),
        separator: Regex::new(r"\s+to\s+|\s*[-–—]\s*").unwrap(),
    })
}

fn ordinal_suffix(n: i64) -> &'static str {
    match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

fn group_thousands(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn point(kind: NumericKind, value: Rational, format: SurfaceFormat) -> NumericValue {
    NumericValue {
        magnitude: Magnitude::Point(value),
        kind,
        unit: None,
        format,
    }
}

fn recognize_single(surface: &str) -> Option<NumericValue> {
    let p = patterns();
    let int = Rational::from_integer;

    if let Some(caps) = p.clock.captures(surface) {
        let hour_text = &caps[1];
        let hour: i64 = hour_text.parse().ok()?;
        let minute: i64 = caps[2].parse().ok()?;
        if hour > 23 {
            return None;
        }
        let padded_hour = hour_text.len() == 2 && hour_text.starts_with('0');
        if hour_text.len() == 2 && hour < 10 && !padded_hour {
            return None;
        }
        return Some(point(
            NumericKind::TimeOfDay,
            int(hour * 60 + minute),
            SurfaceFormat::Clock { padded_hour },
        ));
    }
    if let Some(caps) = p.ordinal.captures(surface) {
        let n: i64 = caps[1].parse().ok()?;
        if n == 0 || &caps[2] != ordinal_suffix(n) {
            return None;
        }
        return Some(point(
            NumericKind::Ordinal,
            int(n),
            SurfaceFormat::DigitOrdinal,
        ));
    }
    if p.year.is_match(surface) {
        let n: i64 = surface.parse().ok()?;
        return Some(point(
            NumericKind::Year,
            int(n),
            SurfaceFormat::Digits {
                decimals: 0,
                grouped: false,
            },
        ));
    }
    if let Some(caps) = p.cardinal.captures(surface) {
        let whole_text = &caps[1];
        let grouped = whole_text.contains(',');
        let whole: i64 = whole_text.replace(',', "").parse().ok()?;
        let (decimals, value) = match caps.get(2) {
            Some(frac) => {
                let d = frac.as_str().len() as u32;
                let scale = 10i64.pow(d);
                let f: i64 = frac.as_str().parse().ok()?;
                (
                    d,
                    Rational::new(whole.checked_mul(scale)?.checked_add(f)?, scale),
                )
            }
            None => (0, int(whole)),
        };
        return Some(point(
            NumericKind::Cardinal,
            value,
            SurfaceFormat::Digits { decimals, grouped },
        ));
    }

    let case = LetterCase::detect(surface)?;
    let lower = surface.to_lowercase();
    if case != LetterCase::Lower {
        if let Some(i) = WEEKDAYS.iter().position(|d| *d == lower) {
            return Some(point(
                NumericKind::Weekday,
                int(i as i64 + 1),
                SurfaceFormat::Words { case },
            ));
        }
        if let Some(i) = MONTHS.iter().position(|m| *m == lower) {
            return Some(point(
                NumericKind::Month,
                int(i as i64 + 1),
                SurfaceFormat::Words { case },
            ));
        }
    }
    let tables = word_tables();
    if let Some(&n) = tables.cardinals.get(&lower) {
        return Some(point(
            NumericKind::WordCardinal,
            int(n),
            SurfaceFormat::Words { case },
        ));
    }
    if let Some(&n) = tables.ordinals.get(&lower) {
        return Some(point(
            NumericKind::WordOrdinal,
            int(n),
            SurfaceFormat::Words { case },
        ));
    }
    None
}

fn recognize_range(surface: &str) -> Option<NumericValue> {
    for sep in patterns().separator.find_iter(surface) {
        let (left, right) = (&surface[..sep.start()], &surface[sep.end()..]);
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let (Some(mut lo), Some(mut hi)) = (recognize_single(left), recognize_single(right)) else {
            continue;
        };
        // "999 to 1000" spans the year pattern's edge; read both as cardinals.
        if matches!(
            (lo.kind, hi.kind),
            (NumericKind::Year, NumericKind::Cardinal) | (NumericKind::Cardinal, NumericKind::Year)
        ) {
            lo.kind = NumericKind::Cardinal;
            hi.kind = NumericKind::Cardinal;
        }
        if lo.kind != hi.kind || lo.format != hi.format {
            continue;
        }
        let (Magnitude::Point(a), Magnitude::Point(b)) = (lo.magnitude, hi.magnitude) else {
            continue;
        };
        if a > b {
            continue;
        }
        return Some(NumericValue {
            magnitude: Magnitude::Span(a, b),
            kind: NumericKind::Range,
            unit: None,
            format: SurfaceFormat::Range {
                element: Box::new(lo.format),
                element_kind: lo.kind,
                separator: sep.as_str().to_string(),
            },
        });
    }
    None
}

/// Parses a surface as a type-1 value; `None` means the surface is not
/// numeric.
pub fn recognize_numeric(surface: &str) -> Option<NumericValue> {
    if surface.is_empty() || surface.trim() != surface {
        return None;
    }
    recognize_single(surface).or_else(|| recognize_range(surface))
}

fn unrenderable(kind: NumericKind, value: Rational) -> NumericError {
    NumericError::Unrenderable {
        kind,
        value: value.to_string(),
    }
}

fn in_domain(kind: NumericKind, value: Rational) -> bool {
    let (lo, hi) = kind.domain();
    value >= lo && hi.is_none_or(|hi| value <= hi)
}

fn render_point(
    kind: NumericKind,
    format: &SurfaceFormat,
    value: Rational,
) -> Result<String, NumericError> {
    if !in_domain(kind, value) {
        return Err(unrenderable(kind, value));
    }
    let whole = || {
        if value.is_integer() {
            Ok(value.to_integer())
        } else {
            Err(unrenderable(kind, value))
        }
    };
    match (kind, format) {
        (
            NumericKind::Cardinal | NumericKind::Year,
            SurfaceFormat::Digits { decimals, grouped },
        ) => {
            let scale = 10i64.pow(*decimals);
            let scaled = value * scale;
            if !scaled.is_integer() {
                return Err(unrenderable(kind, value));
            }
            let scaled = scaled.to_integer();
            let int_part = (scaled / scale).to_string();
            let int_part = if *grouped {
                group_thousands(&int_part)
            } else {
                int_part
            };
            if *decimals == 0 {
                Ok(int_part)
            } else {
                Ok(format!(
                    "{int_part}.{:0width$}",
                    scaled % scale,
                    width = *decimals as usize
                ))
            }
        }
        (NumericKind::Ordinal, SurfaceFormat::DigitOrdinal) => {
            let n = whole()?;
            Ok(format!("{n}{}", ordinal_suffix(n)))
        }
        (NumericKind::TimeOfDay, SurfaceFormat::Clock { padded_hour }) => {
            let n = whole()?;
            let (h, m) = (n / 60, n % 60);
            if *padded_hour {
                Ok(format!("{h:02}:{m:02}"))
            } else {
                Ok(format!("{h}:{m:02}"))
            }
        }
        (NumericKind::Weekday, SurfaceFormat::Words { case }) => {
            Ok(case.apply(WEEKDAYS[(whole()? - 1) as usize]))
        }
        (NumericKind::Month, SurfaceFormat::Words { case }) => {
            Ok(case.apply(MONTHS[(whole()? - 1) as usize]))
        }
        (NumericKind::WordCardinal, SurfaceFormat::Words { case }) => word_cardinal(whole()?)
            .map(|w| case.apply(&w))
            .ok_or_else(|| unrenderable(kind, value)),
        (NumericKind::WordOrdinal, SurfaceFormat::Words { case }) => word_ordinal(whole()?)
            .map(|w| case.apply(&w))
            .ok_or_else(|| unrenderable(kind, value)),
        _ => Err(unrenderable(kind, value)),
    }
}

/// Renders a value in the surface format it was recognized from.
pub fn render(value: &NumericValue) -> Result<String, NumericError> {
    match (&value.magnitude, &value.format) {
        (Magnitude::Point(x), format) => render_point(value.kind, format, *x),
        (
            Magnitude::Span(a, b),
            SurfaceFormat::Range {
                element,
                element_kind,
                separator,
            },
        ) => {
            if a > b {
                return Err(unrenderable(NumericKind::Range, *a));
            }
            Ok(format!(
                "{}{separator}{}",
                render_point(*element_kind, element, *a)?,
                render_point(*element_kind, element, *b)?
            ))
        }
        (Magnitude::Span(a, _), _) => Err(unrenderable(value.kind, *a)),
    }
}

/// Offsets `i` (in steps) with `x + i·step ∈ [lo, hi]`, `i ≠ 0`, as an
/// inclusive integer interval.
fn step_bounds(
    x: Rational,
    step: Rational,
    lo: Rational,
    hi: Option<Rational>,
) -> (i64, Option<i64>) {
    let min = ((lo - x) / step).ceil().to_integer();
    let max = hi.map(|hi| ((hi - x) / step).floor().to_integer());
    (min, max)
}

/// Uniform draw from `[min, max] \ {0}`.
fn draw_offset<R: Rng + ?Sized>(min: i64, max: i64, rng: &mut R) -> Option<i64> {
    if min > max {
        return None;
    }
    let zero_inside = min <= 0 && 0 <= max;
    let count = (max - min + 1) - i64::from(zero_inside);
    if count <= 0 {
        return None;
    }
    let mut offset = min + rng.gen_range(0..count);
    if zero_inside && offset >= 0 {
        offset += 1;
    }
    Some(offset)
}

struct Endpoint {
    x: Rational,
    lo: Rational,
    hi: Option<Rational>,
}

fn perturb_scalar<R: Rng + ?Sized>(
    kind: NumericKind,
    step: Rational,
    end: &Endpoint,
    strategy: &PerturbStrategy,
    rng: &mut R,
) -> Option<Rational> {
    let x = end.x;
    match strategy {
        PerturbStrategy::UnitShift(delta) => {
            let shifted = if kind.is_cyclic() {
                let modulus = kind
                    .domain()
                    .1
                    .expect("cyclic kinds are bounded")
                    .to_integer();
                let base = x.to_integer() - 1;
                Rational::from_integer((base + delta).rem_euclid(modulus) + 1)
            } else {
                x + step * *delta
            };
            let inside = shifted >= end.lo && end.hi.is_none_or(|hi| shifted <= hi);
            (inside && shifted != x).then_some(shifted)
        }
        PerturbStrategy::LocalRandom(radius) => {
            let r = i64::from(*radius);
            let (min, max) = step_bounds(x, step, end.lo, end.hi);
            let (min, max) = (min.max(-r), max.map_or(r, |m| m.min(r)));
            draw_offset(min, max, rng).map(|i| x + step * i)
        }
        PerturbStrategy::GlobalRandom { lo, hi } => {
            let lo = (*lo).max(end.lo);
            let hi = end.hi.map_or(*hi, |h| h.min(*hi));
            let (min, max) = step_bounds(x, step, lo, Some(hi));
            draw_offset(min, max?, rng).map(|i| x + step * i)
        }
    }
}

/// Returns a value of the same kind, unit and format whose magnitude differs
/// from the input. Ranges move one endpoint, chosen by `rng`, and keep
/// `lower ≤ upper`.
pub fn perturb<R: Rng + ?Sized>(
    value: &NumericValue,
    strategy: &PerturbStrategy,
    rng: &mut R,
) -> Result<NumericValue, NumericError> {
    match strategy {
        PerturbStrategy::UnitShift(d) if ![-2, -1, 1, 2].contains(d) => {
            return Err(NumericError::InvalidStrategy(strategy.to_string()))
        }
        PerturbStrategy::LocalRandom(0) => {
            return Err(NumericError::InvalidStrategy(strategy.to_string()))
        }
        PerturbStrategy::GlobalRandom { lo, hi } if lo > hi => {
            return Err(NumericError::InvalidStrategy(strategy.to_string()))
        }
        _ => {}
    }
    let kind = value.element_kind();
    let step = value.step();
    let (dlo, dhi) = kind.domain();
    let infeasible = || NumericError::EmptyFeasibleSet {
        strategy: strategy.to_string(),
        kind: value.kind,
        value: render(value).unwrap_or_default(),
    };
    let magnitude = match value.magnitude {
        Magnitude::Point(x) => {
            let end = Endpoint {
                x,
                lo: dlo,
                hi: dhi,
            };
            Magnitude::Point(
                perturb_scalar(kind, step, &end, strategy, rng).ok_or_else(infeasible)?,
            )
        }
        Magnitude::Span(a, b) => {
            if rng.gen_bool(0.5) {
                let end = Endpoint {
                    x: a,
                    lo: dlo,
                    hi: Some(dhi.map_or(b, |h| h.min(b))),
                };
                let a2 = perturb_scalar(kind, step, &end, strategy, rng).ok_or_else(infeasible)?;
                Magnitude::Span(a2, b)
            } else {
                let end = Endpoint {
                    x: b,
                    lo: dlo.max(a),
                    hi: dhi,
                };
                let b2 = perturb_scalar(kind, step, &end, strategy, rng).ok_or_else(infeasible)?;
                Magnitude::Span(a, b2)
            }
        }
    };
    Ok(NumericValue {
        magnitude,
        ..value.clone()
    })
}

fn build_strategy<R: Rng + ?Sized>(
    kind: StrategyKind,
    value: &NumericValue,
    cfg: &NumericConfig,
    rng: &mut R,
) -> PerturbStrategy {
    match kind {
        StrategyKind::UnitShift => {
            PerturbStrategy::UnitShift(*[-2i64, -1, 1, 2].choose(rng).expect("non-empty"))
        }
        StrategyKind::LocalRandom => PerturbStrategy::LocalRandom(cfg.window_for(value)),
        StrategyKind::GlobalRandom => {
            let (lo, hi) = cfg.global_domain_for(value);
            PerturbStrategy::GlobalRandom { lo, hi }
        }
    }
}

/// One generated type-1 replacement and the strategy that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericReplacement {
    pub text: String,
    pub strategy: PerturbStrategy,
}

/// Draws up to `n` distinct replacements for `surface`, stopping after
/// [`RETRY_BOUND`]·`n` draws.
pub fn sample_numeric_replacements<R: Rng + ?Sized>(
    surface: &str,
    n: usize,
    cfg: &NumericConfig,
    rng: &mut R,
) -> Result<Vec<NumericReplacement>, NumericError> {
    let value =
        recognize_numeric(surface).ok_or_else(|| NumericError::NotNumeric(surface.to_string()))?;
    if cfg.strategies.is_empty() {
        return Err(NumericError::InvalidStrategy(
            "no strategies enabled".into(),
        ));
    }
    let mut out: Vec<NumericReplacement> = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < RETRY_BOUND * n {
        attempts += 1;
        let kind = *cfg.strategies.choose(rng).expect("non-empty");
        let strategy = build_strategy(kind, &value, cfg, rng);
        let Ok(next) = perturb(&value, &strategy, rng) else {
            continue;
        };
        let Ok(text) = render(&next) else {
            continue;
        };
        if text != surface && out.iter().all(|r| r.text != text) {
            out.push(NumericReplacement { text, strategy });
        }
    }
    Ok(out)
}

/// Exactly `n` pairwise-distinct renderings of perturbed values of the
/// target, none equal to the target's surface.
pub fn generate_numeric_distractors<R: Rng + ?Sized>(
    target: &TargetWord,
    n: usize,
    cfg: &NumericConfig,
    rng: &mut R,
) -> Result<Vec<String>, NumericError> {
    let found: Vec<String> = sample_numeric_replacements(&target.surface, n, cfg, rng)?
        .into_iter()
        .map(|r| r.text)
        .collect();
    if found.len() < n {
        return Err(NumericError::InsufficientCandidates { needed: n, found });
    }
    Ok(found)
}

/// Distance between two point values in steps of `a`; `None` for ranges.
pub fn step_distance(a: &NumericValue, b: &NumericValue) -> Option<i64> {
    match (a.magnitude, b.magnitude) {
        (Magnitude::Point(x), Magnitude::Point(y)) => ((y - x) / a.step()).abs().to_i64(),
        _ => None,
    }
}
