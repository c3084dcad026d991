//! Maven version ordering and version ranges.

use std::cmp::{Ordering, Reverse};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VersionSpecError {
    #[error("empty version specification")]
    Empty,
    #[error("unbalanced brackets in `{0}`")]
    Unbalanced(String),
    #[error("empty interval in `{0}`")]
    EmptyInterval(String),
    #[error("malformed interval `{0}`")]
    Malformed(String),
    #[error("interval `{0}` has lower bound above upper bound")]
    Inverted(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no available version matches `{spec}`")]
pub struct EmptyRangeError {
    pub spec: String,
}

/// One item of a parsed version. A `-` separator, and every switch between
/// digits and letters, opens a nested list.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    /// Decimal digits without leading zeros; empty for zero.
    Int(String),
    Str(String),
    List(Vec<Item>),
}

const RELEASE_RANK: u8 = 5;

/// Position of a qualifier in the fixed qualifier order; unknown
/// qualifiers sort after all known ones, alphabetically.
fn qualifier_rank(q: &str) -> (u8, &str) {
    match q {
        "alpha" => (0, ""),
        "beta" => (1, ""),
        "milestone" => (2, ""),
        "rc" => (3, ""),
        "snapshot" => (4, ""),
        "" => (RELEASE_RANK, ""),
        "sp" => (6, ""),
        other => (7, other),
    }
}

fn string_item(token: &str, followed_by_digit: bool) -> Item {
    let value = match token {
        "a" if followed_by_digit => "alpha",
        "b" if followed_by_digit => "beta",
        "m" if followed_by_digit => "milestone",
        "ga" | "final" | "release" => "",
        "cr" => "rc",
        other => other,
    };
    Item::Str(value.to_string())
}

fn parse_item(is_digit: bool, token: &str) -> Item {
    if is_digit {
        Item::Int(token.trim_start_matches('0').to_string())
    } else {
        string_item(token, false)
    }
}

impl Item {
    fn is_null(&self) -> bool {
        match self {
            Item::Int(d) => d.is_empty(),
            Item::Str(s) => qualifier_rank(s) == (RELEASE_RANK, ""),
            Item::List(items) => items.is_empty(),
        }
    }

    fn flatten_into<'a>(&'a self, out: &mut Vec<Token<'a>>) {
        match self {
            Item::Int(d) => out.push(Token::Int(d)),
            Item::Str(s) => out.push(Token::Str(s)),
            Item::List(items) => {
                for item in items {
                    if let Item::List(_) = item {
                        out.push(Token::Open);
                    }
                    item.flatten_into(out);
                }
            }
        }
    }
}

/// A parsed version read front to back; `Open` marks the start of a nested
/// list, which always runs to the end of its parent.
#[derive(Debug, Clone, Copy)]
enum Token<'a> {
    Int(&'a str),
    Str(&'a str),
    Open,
}

/// Decimal digits without leading zeros, ordered numerically.
#[derive(Debug, PartialEq, Eq)]
struct Num<'a>(&'a str);

impl Ord for Num<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(other.0))
    }
}

impl PartialOrd for Num<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Comparison key of one block: a run of zeros and the token after it.
/// Versions compare as their key sequences, padded with the release key.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key<'a> {
    /// A qualifier or a nested list, with its position relative to the
    /// release marker deciding first. Leading zeros do not count here.
    Qualifier { side: Ordering, nested: bool, rank: (u8, &'a str) },
    /// A positive number; fewer leading zeros rank higher.
    Number { zeros: Reverse<usize>, value: Num<'a> },
}

const RELEASE: Key<'static> = Key::Qualifier { side: Ordering::Equal, nested: false, rank: (RELEASE_RANK, "") };

fn next_block<'a>(tokens: &[Token<'a>], pos: usize) -> (Key<'a>, usize) {
    let zeros = tokens[pos.min(tokens.len())..].iter().take_while(|t| matches!(t, Token::Int(""))).count();
    let at = pos + zeros;
    match tokens.get(at) {
        None => (RELEASE, at.min(tokens.len())),
        Some(Token::Int(d)) => (Key::Number { zeros: Reverse(zeros), value: Num(d) }, at + 1),
        Some(Token::Str(s)) => {
            let rank = qualifier_rank(s);
            (Key::Qualifier { side: rank.cmp(&(RELEASE_RANK, "")), nested: false, rank }, at + 1)
        }
        Some(Token::Open) => {
            let side = match next_block(tokens, at + 1).0 {
                Key::Number { .. } => Ordering::Greater,
                Key::Qualifier { side, .. } => side,
            };
            (Key::Qualifier { side, nested: true, rank: (0, "") }, at + 1)
        }
    }
}

/// Drops trailing null items, looking through trailing nested lists.
fn normalize(items: &mut Vec<Item>) {
    let mut i = items.len();
    while i > 0 {
        i -= 1;
        if items[i].is_null() {
            items.remove(i);
        } else if !matches!(items[i], Item::List(_)) {
            break;
        }
    }
}

fn parse(version: &str) -> Item {
    let v = version.to_ascii_lowercase();
    let bytes = v.as_bytes();
    // innermost list last; each list ends up as the final item of its parent
    let mut stack: Vec<Vec<Item>> = vec![Vec::new()];
    let mut is_digit = false;
    let mut start = 0;
    for (i, &c) in bytes.iter().enumerate() {
        let top = stack.last_mut().expect("stack is never empty");
        match c {
            b'.' | b'-' => {
                top.push(if i == start { Item::Int(String::new()) } else { parse_item(is_digit, &v[start..i]) });
                start = i + 1;
                if c == b'-' {
                    stack.push(Vec::new());
                }
            }
            b'0'..=b'9' => {
                if !is_digit && i > start {
                    top.push(string_item(&v[start..i], true));
                    start = i;
                    stack.push(Vec::new());
                }
                is_digit = true;
            }
            _ => {
                if is_digit && i > start {
                    top.push(parse_item(true, &v[start..i]));
                    start = i;
                    stack.push(Vec::new());
                }
                is_digit = false;
            }
        }
    }
    if bytes.len() > start {
        // a trailing `.X` qualifier counts as `-X`
        if !is_digit && !stack.last().expect("stack is never empty").is_empty() {
            stack.push(Vec::new());
        }
        stack.last_mut().expect("stack is never empty").push(parse_item(is_digit, &v[start..]));
    }
    let mut child = stack.pop().expect("stack is never empty");
    normalize(&mut child);
    while let Some(mut parent) = stack.pop() {
        parent.push(Item::List(child));
        normalize(&mut parent);
        child = parent;
    }
    Item::List(child)
}

/// Total order over Maven version strings.
pub fn compare_versions(a: &str, b: &str) -> Ordering {
    let (left, right) = (parse(a), parse(b));
    let (mut l, mut r) = (Vec::new(), Vec::new());
    left.flatten_into(&mut l);
    right.flatten_into(&mut r);
    let (mut i, mut j) = (0, 0);
    while i < l.len() || j < r.len() {
        let (lk, ni) = next_block(&l, i);
        let (rk, nj) = next_block(&r, j);
        match lk.cmp(&rk) {
            Ordering::Equal => (i, j) = (ni, nj),
            other => return other,
        }
    }
    Ordering::Equal
}

/// Sorts ascending by [`compare_versions`] and drops equal duplicates.
pub fn sort_versions(versions: &mut Vec<String>) {
    versions.sort_by(|a, b| compare_versions(a, b).then_with(|| a.cmp(b)));
    versions.dedup_by(|a, b| compare_versions(a, b) == Ordering::Equal);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub version: String,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl Interval {
    pub fn contains(&self, version: &str) -> bool {
        let above = match &self.lower {
            None => true,
            Some(b) => match compare_versions(version, &b.version) {
                Ordering::Greater => true,
                Ordering::Equal => b.inclusive,
                Ordering::Less => false,
            },
        };
        let below = match &self.upper {
            None => true,
            Some(b) => match compare_versions(version, &b.version) {
                Ordering::Less => true,
                Ordering::Equal => b.inclusive,
                Ordering::Greater => false,
            },
        };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) if l == u && l.inclusive => write!(f, "[{}]", l.version),
            _ => {
                let open = match &self.lower {
                    Some(b) if b.inclusive => '[',
                    _ => '(',
                };
                let close = match &self.upper {
                    Some(b) if b.inclusive => ']',
                    _ => ')',
                };
                let lower = self.lower.as_ref().map_or("", |b| b.version.as_str());
                let upper = self.upper.as_ref().map_or("", |b| b.version.as_str());
                write!(f, "{open}{lower},{upper}{close}")
            }
        }
    }
}

/// A declared dependency version: a soft pin or a set of ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VersionSpec {
    SoftPin(String),
    Range(Vec<Interval>),
}

impl VersionSpec {
    pub fn is_range(&self) -> bool {
        matches!(self, VersionSpec::Range(_))
    }
}

impl fmt::Display for VersionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionSpec::SoftPin(v) => f.write_str(v),
            VersionSpec::Range(intervals) => {
                for (i, interval) in intervals.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{interval}")?;
                }
                Ok(())
            }
        }
    }
}

pub fn parse_version_spec(text: &str) -> Result<VersionSpec, VersionSpecError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(VersionSpecError::Empty);
    }
    if !text.contains(['[', ']', '(', ')', ',']) {
        return Ok(VersionSpec::SoftPin(text.to_string()));
    }

    let mut intervals = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        let open = rest.chars().next().ok_or_else(|| VersionSpecError::Malformed(text.into()))?;
        if open != '[' && open != '(' {
            return Err(VersionSpecError::Unbalanced(text.into()));
        }
        let close_at = rest
            .find([']', ')'])
            .ok_or_else(|| VersionSpecError::Unbalanced(text.into()))?;
        let body = &rest[1..close_at];
        if body.contains(['[', '(']) {
            return Err(VersionSpecError::Unbalanced(text.into()));
        }
        let close = rest[close_at..].chars().next().unwrap_or(']');
        intervals.push(parse_interval(text, open, body, close)?);
        rest = rest[close_at + 1..].trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest
            .strip_prefix(',')
            .ok_or_else(|| VersionSpecError::Malformed(text.into()))?;
    }
    Ok(VersionSpec::Range(intervals))
}

fn parse_interval(
    whole: &str,
    open: char,
    body: &str,
    close: char,
) -> Result<Interval, VersionSpecError> {
    let body = body.trim();
    if body.is_empty() {
        return Err(VersionSpecError::EmptyInterval(whole.into()));
    }
    match body.split_once(',') {
        None => {
            // `[1.0]` is the only single-version form.
            if open != '[' || close != ']' {
                return Err(VersionSpecError::Malformed(whole.into()));
            }
            let bound = Bound { version: body.to_string(), inclusive: true };
            Ok(Interval { lower: Some(bound.clone()), upper: Some(bound) })
        }
        Some((lo, hi)) => {
            let (lo, hi) = (lo.trim(), hi.trim());
            if hi.contains(',') {
                return Err(VersionSpecError::Malformed(whole.into()));
            }
            if lo.is_empty() && hi.is_empty() {
                return Err(VersionSpecError::EmptyInterval(whole.into()));
            }
            let lower = (!lo.is_empty()).then(|| Bound { version: lo.to_string(), inclusive: open == '[' });
            let upper = (!hi.is_empty()).then(|| Bound { version: hi.to_string(), inclusive: close == ']' });
            if let (Some(l), Some(u)) = (&lower, &upper) {
                let order = compare_versions(&l.version, &u.version);
                let degenerate = order == Ordering::Equal && !(l.inclusive && u.inclusive);
                if order == Ordering::Greater || degenerate {
                    return Err(VersionSpecError::Inverted(whole.into()));
                }
            }
            Ok(Interval { lower, upper })
        }
    }
}

/// Picks the concrete version for a spec. Soft pins pass through unchanged;
/// ranges select the highest available member.
pub fn resolve_range(spec: &VersionSpec, available: &[String]) -> Result<String, EmptyRangeError> {
    match spec {
        VersionSpec::SoftPin(v) => Ok(v.clone()),
        VersionSpec::Range(intervals) => available
            .iter()
            .filter(|v| intervals.iter().any(|i| i.contains(v)))
            .max_by(|a, b| compare_versions(a, b))
            .cloned()
            .ok_or_else(|| EmptyRangeError { spec: spec.to_string() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn numeric_and_qualifier_order() {
        assert_eq!(compare_versions("1.0", "1.1"), Ordering::Less);
        assert_eq!(compare_versions("1.0", "1.0.0"), Ordering::Equal);
        assert_eq!(compare_versions("1.0-SNAPSHOT", "1.0"), Ordering::Less);
        assert_eq!(compare_versions("1.10", "1.9"), Ordering::Greater);
        assert_eq!(compare_versions("1-sp", "1.1"), Ordering::Less);
    }

    #[test]
    fn soft_pin_and_ranges() {
        assert_eq!(parse_version_spec("2.13.2").unwrap(), VersionSpec::SoftPin("2.13.2".into()));
        let spec = parse_version_spec("[1.0,2.0)").unwrap();
        let VersionSpec::Range(intervals) = &spec else { panic!("expected range") };
        assert_eq!(intervals.len(), 1);
        assert!(intervals[0].lower.as_ref().unwrap().inclusive);
        assert!(!intervals[0].upper.as_ref().unwrap().inclusive);
        assert_eq!(spec.to_string(), "[1.0,2.0)");

        let points = parse_version_spec("[1.0],[2.0]").unwrap();
        let VersionSpec::Range(intervals) = &points else { panic!("expected range") };
        assert_eq!(intervals.len(), 2);
        assert_eq!(resolve_range(&points, &v(&["1.0", "1.5", "2.0"])).unwrap(), "2.0");

        let open = parse_version_spec("(,1.5]").unwrap();
        assert_eq!(resolve_range(&open, &v(&["1.0", "1.5", "2.0"])).unwrap(), "1.5");
    }

    #[test]
    fn malformed_specs() {
        assert_eq!(parse_version_spec(""), Err(VersionSpecError::Empty));
        assert!(matches!(parse_version_spec("[1.0,2.0"), Err(VersionSpecError::Unbalanced(_))));
        assert!(matches!(parse_version_spec("1.0,2.0]"), Err(VersionSpecError::Unbalanced(_))));
        assert!(matches!(parse_version_spec("[]"), Err(VersionSpecError::EmptyInterval(_))));
        assert!(matches!(parse_version_spec("[,]"), Err(VersionSpecError::EmptyInterval(_))));
        assert!(matches!(parse_version_spec("(1.0)"), Err(VersionSpecError::Malformed(_))));
        assert!(matches!(parse_version_spec("[2.0,1.0]"), Err(VersionSpecError::Inverted(_))));
        assert!(matches!(parse_version_spec("[1.0,2.0,3.0]"), Err(VersionSpecError::Malformed(_))));
    }

    #[test]
    fn range_resolution() {
        let spec = parse_version_spec("[1.0,2.0)").unwrap();
        // brute force: filter by interval membership then take the max
        let available = v(&["1.0", "1.5", "2.0"]);
        assert_eq!(resolve_range(&spec, &available).unwrap(), "1.5");
        assert!(resolve_range(&spec, &v(&["2.0", "3.0"])).is_err());
        let pin = VersionSpec::SoftPin("2.13.2".into());
        assert_eq!(resolve_range(&pin, &[]).unwrap(), "2.13.2");
    }

    #[test]
    fn sort_dedups_equivalent_spellings() {
        let mut list = v(&["2.0", "1.0", "1.5", "1.0.0"]);
        sort_versions(&mut list);
        assert_eq!(list, v(&["1.0", "1.5", "2.0"]));
    }

    #[test]
    fn orders_that_would_otherwise_cycle() {
        let mut v: Vec<String> = ["2-1", "2", "2.0.alpha1", "1.sp1", "1-alpha", "1"].map(String::from).to_vec();
        sort_versions(&mut v);
        assert_eq!(v, ["1-alpha", "1", "1.sp1", "2.0.alpha1", "2", "2-1"]);
        assert_eq!(compare_versions("5.0.0.RC1", "5.0.0"), Ordering::Less);
    }

    fn version_strategy() -> impl Strategy<Value = String> {
        let token = prop_oneof![
            "[0-9]{1,3}",
            Just("alpha".to_string()),
            Just("beta".to_string()),
            Just("rc".to_string()),
            Just("SNAPSHOT".to_string()),
            Just("sp".to_string()),
            Just("ga".to_string()),
            "[a-z]{1,4}",
            "(a|b|m|rc|RC|sp)[0-9]{1,2}",
            "[0-9](a|b|m|snapshot)[0-9]?",
            Just("0".to_string()),
            Just(String::new()),
        ];
        (proptest::collection::vec((token, prop_oneof![Just('.'), Just('-')]), 1..6)).prop_map(|parts| {
            let mut s = String::new();
            for (i, (tok, sep)) in parts.iter().enumerate() {
                if i > 0 {
                    s.push(*sep);
                }
                s.push_str(tok);
            }
            s
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn total_order(a in version_strategy(), b in version_strategy(), c in version_strategy()) {
            let ab = compare_versions(&a, &b);
            prop_assert_eq!(ab, compare_versions(&b, &a).reverse());
            prop_assert_eq!(compare_versions(&a, &a), Ordering::Equal);
            let bc = compare_versions(&b, &c);
            if ab != Ordering::Greater && bc != Ordering::Greater {
                prop_assert_ne!(compare_versions(&a, &c), Ordering::Greater);
            }
            if ab == Ordering::Equal && bc == Ordering::Equal {
                prop_assert_eq!(compare_versions(&a, &c), Ordering::Equal);
            }
        }
    }
}
