//! In-game GEQ scoring, acceptance ratings, the evaluation rubric and
//! mean ± sd reports.
//!
//! Component scores are the mean of the component's two items. Aggregates
//! use the population standard deviation (divisor N).

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ITEM_COUNT: usize = 14;

#[derive(Debug, Error)]
pub enum AssessmentError {
    #[error("respondent {respondent}: item {item} is missing")]
    MissingItem { respondent: String, item: usize },
    #[error("no responses for {component} under {condition}")]
    NoData {
        component: GeqComponent,
        condition: Condition,
    },
    #[error("respondent {respondent}: item {item} = {value} outside scale {min}..{max}")]
    OutOfScale {
        respondent: String,
        item: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid item map: {0}")]
    ItemMap(String),
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: u64,
        message: String,
    },
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeqComponent {
    Competence,
    Immersion,
    Flow,
    Tension,
    Challenge,
    NegativeAffect,
    PositiveAffect,
}

impl GeqComponent {
    pub const ALL: [GeqComponent; 7] = [
        GeqComponent::Competence,
        GeqComponent::Immersion,
        GeqComponent::Flow,
        GeqComponent::Tension,
        GeqComponent::Challenge,
        GeqComponent::NegativeAffect,
        GeqComponent::PositiveAffect,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GeqComponent::Competence => "Competence",
            GeqComponent::Immersion => "Immersion",
            GeqComponent::Flow => "Flow",
            GeqComponent::Tension => "Tension",
            GeqComponent::Challenge => "Challenge",
            GeqComponent::NegativeAffect => "Negative affect",
            GeqComponent::PositiveAffect => "Positive affect",
        }
    }
}

impl fmt::Display for GeqComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "PC")]
    Pc,
    MixedReality,
    ClassicalTherapy,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Pc, Condition::MixedReality, Condition::ClassicalTherapy];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Pc => "PC",
            Condition::MixedReality => "Mixed Reality",
            Condition::ClassicalTherapy => "Classical Therapy",
        }
    }

    /// Compact token used in ranking lines and CSV files.
    pub fn token(self) -> &'static str {
        match self {
            Condition::Pc => "PC",
            Condition::MixedReality => "MixedReality",
            Condition::ClassicalTherapy => "ClassicalTherapy",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Condition {
    type Err = AssessmentError;

    /// Accepts the token or the label, ignoring case, spaces, `_` and `-`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "pc" => Ok(Condition::Pc),
            "mixedreality" | "mr" | "mrs" => Ok(Condition::MixedReality),
            "classicaltherapy" | "classical" | "physicaltherapy" => Ok(Condition::ClassicalTherapy),
            _ => Err(AssessmentError::Invalid(format!("unknown condition `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Default for Scale {
    fn default() -> Self {
        Self { min: 0.0, max: 4.0 }
    }
}

impl Scale {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeqResponse {
    pub respondent: String,
    pub condition: Condition,
    /// Item scores in questionnaire order; `None` when left blank.
    pub items: [Option<f64>; ITEM_COUNT],
    #[serde(default)]
    pub scale: Scale,
}

impl GeqResponse {
    pub fn new(respondent: &str, condition: Condition, items: [f64; ITEM_COUNT]) -> Self {
        Self {
            respondent: respondent.to_owned(),
            condition,
            items: items.map(Some),
            scale: Scale::default(),
        }
    }

    pub fn validate(&self) -> Result<(), AssessmentError> {
        for (i, v) in self.items.iter().enumerate() {
            if let Some(v) = *v {
                if !self.scale.contains(v) {
                    return Err(AssessmentError::OutOfScale {
                        respondent: self.respondent.clone(),
                        item: i + 1,
                        value: v,
                        min: self.scale.min,
                        max: self.scale.max,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSpec {
    /// 1-based item number.
    pub item: usize,
    pub component: GeqComponent,
    pub text: String,
}

/// Which two items belong to each component.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemMap {
    items: Vec<ItemSpec>,
}

static STANDARD_ITEMS: LazyLock<ItemMap> = LazyLock::new(|| {
    ItemMap::from_json(include_str!("../data/igeq_items.json")).expect("shipped item map is valid")
});

impl ItemMap {
    pub fn standard() -> &'static ItemMap {
        &STANDARD_ITEMS
    }

    pub fn from_json(text: &str) -> Result<Self, AssessmentError> {
        let items: Vec<ItemSpec> =
            serde_json::from_str(text).map_err(|e| AssessmentError::ItemMap(e.to_string()))?;
        let mut seen = [false; ITEM_COUNT];
        for spec in &items {
            if !(1..=ITEM_COUNT).contains(&spec.item) || std::mem::replace(&mut seen[spec.item - 1], true) {
                return Err(AssessmentError::ItemMap(format!("bad or repeated item number {}", spec.item)));
            }
        }
        if items.len() != ITEM_COUNT {
            return Err(AssessmentError::ItemMap(format!("expected {ITEM_COUNT} items, got {}", items.len())));
        }
        for c in GeqComponent::ALL {
            let n = items.iter().filter(|s| s.component == c).count();
            if n != 2 {
                return Err(AssessmentError::ItemMap(format!("{c} has {n} items, expected 2")));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[ItemSpec] {
        &self.items
    }

    /// The component's item numbers, ascending.
    pub fn items_of(&self, c: GeqComponent) -> [usize; 2] {
        let mut it = self.items.iter().filter(|s| s.component == c).map(|s| s.item);
        let (a, b) = (it.next().unwrap(), it.next().unwrap());
        [a.min(b), a.max(b)]
    }

    pub fn score(&self, r: &GeqResponse, c: GeqComponent) -> Result<f64, AssessmentError> {
        let [a, b] = self.items_of(c).map(|item| {
            r.items[item - 1].ok_or_else(|| AssessmentError::MissingItem {
                respondent: r.respondent.clone(),
                item,
            })
        });
        Ok((a? + b?) / 2.0)
    }
}

/// Mean of the component's two items under the standard item map.
pub fn score_component(r: &GeqResponse, c: GeqComponent) -> Result<f64, AssessmentError> {
    ItemMap::standard().score(r, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub component: GeqComponent,
    pub condition: Condition,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl ComponentStats {
    pub fn display(&self) -> String {
        format_mean_sd(self.mean, self.sd)
    }
}

/// Mean and population standard deviation, or `None` for no data.
pub fn mean_sd(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    // Welford's update.
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    Some((mean, (m2.max(0.0) / xs.len() as f64).sqrt()))
}

pub fn aggregate(
    responses: &[GeqResponse],
    component: GeqComponent,
    condition: Condition,
) -> Result<ComponentStats, AssessmentError> {
    aggregate_with(ItemMap::standard(), responses, component, condition)
}

pub fn aggregate_with(
    map: &ItemMap,
    responses: &[GeqResponse],
    component: GeqComponent,
    condition: Condition,
) -> Result<ComponentStats, AssessmentError> {
    let scores = responses
        .iter()
        .filter(|r| r.condition == condition)
        .map(|r| map.score(r, component))
        .collect::<Result<Vec<_>, _>>()?;
    let (mean, sd) = mean_sd(&scores).ok_or(AssessmentError::NoData { component, condition })?;
    Ok(ComponentStats {
        component,
        condition,
        n: scores.len(),
        mean,
        sd,
    })
}

/// Every component for every condition that has responses, in table order.
pub fn aggregate_all(responses: &[GeqResponse]) -> Result<Vec<ComponentStats>, AssessmentError> {
    let mut out = Vec::new();
    for component in GeqComponent::ALL {
        for condition in Condition::ALL {
            match aggregate(responses, component, condition) {
                Ok(s) => out.push(s),
                Err(AssessmentError::NoData { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

pub fn format_mean_sd(mean: f64, sd: f64) -> String {
    // Avoid rendering tiny negatives as "-0.00".
    let fix = |x: f64| if x.abs() < 0.005 { 0.0 } else { x };
    format!("{:.2} ± {:.2}", fix(mean), fix(sd))
}

/// Utility, usability and likeability on a 1 to 5 scale, traded off
/// against cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceRating {
    pub utility: u8,
    pub usability: u8,
    pub likeability: u8,
    pub cost_note: String,
}

impl AcceptanceRating {
    pub fn new(utility: u8, usability: u8, likeability: u8, cost_note: &str) -> Result<Self, AssessmentError> {
        let r = Self {
            utility,
            usability,
            likeability,
            cost_note: cost_note.to_owned(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), AssessmentError> {
        for (name, v) in [
            ("utility", self.utility),
            ("usability", self.usability),
            ("likeability", self.likeability),
        ] {
            if !(1..=5).contains(&v) {
                return Err(AssessmentError::Invalid(format!("{name} = {v}, expected 1..=5")));
            }
        }
        Ok(())
    }
}

macro_rules! criterion {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }
    };
}

criterion!(YesNo { Yes => "yes", No => "no" });
criterion!(HabitChange { Negligible => "negligible", Moderate => "moderate", Important => "important" });
criterion!(Setup { Therapist => "therapist", Assistant => "assistant" });
criterion!(Location { Dedicated => "dedicated place", Anywhere => "anywhere" });
criterion!(EyeHandFocus { Same => "same place", Different => "different places" });
criterion!(Invasiveness { Convenient => "convenient", Invasive => "invasive" });
criterion!(UnitaryCost {
    Below1K => "less than 1 KE",
    From1To5K => "1-5 KE",
    From5To10K => "5-10 KE",
    Above10K => "more than 10 KE",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TherapistCriteria {
    pub intervention: YesNo,
    pub habit_change: HabitChange,
    pub setup: Setup,
    pub location: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientCriteria {
    pub eye_hand_focus: EyeHandFocus,
    pub invasiveness: Invasiveness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EconomicalCriteria {
    pub unitary_cost: UnitaryCost,
    pub extra_resources: YesNo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationRubric {
    pub therapist: TherapistCriteria,
    pub patient: PatientCriteria,
    pub economical: EconomicalCriteria,
}

impl EvaluationRubric {
    /// (group, criterion, value) rows in display order.
    pub fn rows(&self) -> Vec<(&'static str, &'static str, &'static str)> {
        let t = &self.therapist;
        let p = &self.patient;
        let e = &self.economical;
        vec![
            ("Therapist", "Therapist intervention", t.intervention.label()),
            ("Therapist", "Changes on therapist habits", t.habit_change.label()),
            ("Therapist", "System setup", t.setup.label()),
            ("Therapist", "Location", t.location.label()),
            ("Patient", "Eye-hand focus", p.eye_hand_focus.label()),
            ("Patient", "Invasiveness", p.invasiveness.label()),
            ("Economical", "Unitary cost", e.unitary_cost.label()),
            ("Economical", "Extra resources", e.extra_resources.label()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankingRole {
    #[serde(rename = "patient-role")]
    Patient,
    #[serde(rename = "therapist-role")]
    Therapist,
}

impl RankingRole {
    pub fn token(self) -> &'static str {
        match self {
            RankingRole::Patient => "patient-role",
            RankingRole::Therapist => "therapist-role",
        }
    }
}

/// Most preferred condition first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PreferenceRanking {
    pub respondent: String,
    pub role: RankingRole,
    pub order: [Condition; 3],
}

impl PreferenceRanking {
    pub fn new(respondent: &str, role: RankingRole, order: [Condition; 3]) -> Result<Self, AssessmentError> {
        if respondent.is_empty() || respondent.chars().any(|c| c.is_whitespace() || c == ':') {
            return Err(AssessmentError::Invalid(format!(
                "respondent id `{respondent}` must be non-empty without spaces or `:`"
            )));
        }
        if Condition::ALL.iter().any(|c| !order.contains(c)) {
            return Err(AssessmentError::Invalid(
                "a ranking must order each condition exactly once".into(),
            ));
        }
        Ok(Self {
            respondent: respondent.to_owned(),
            role,
            order,
        })
    }
}

/// `r1 patient-role: MixedReality > PC > ClassicalTherapy`
impl fmt::Display for PreferenceRanking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.order.map(Condition::token);
        write!(f, "{} {}: {a} > {b} > {c}", self.respondent, self.role.token())
    }
}

impl FromStr for PreferenceRanking {
    type Err = AssessmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AssessmentError::Invalid(format!("cannot parse ranking `{s}`"));
        let (who, order) = s.split_once(':').ok_or_else(bad)?;
        let mut who = who.split_whitespace();
        let (Some(respondent), Some(role), None) = (who.next(), who.next(), who.next()) else {
            return Err(bad());
        };
        let role = match role {
            "patient-role" => RankingRole::Patient,
            "therapist-role" => RankingRole::Therapist,
            _ => return Err(bad()),
        };
        let conds = order
            .split('>')
            .map(|c| c.trim().parse::<Condition>())
            .collect::<Result<Vec<_>, _>>()?;
        let order: [Condition; 3] = conds.try_into().map_err(|_| bad())?;
        Self::new(respondent, role, order)
    }
}

impl TryFrom<String> for PreferenceRanking {
    type Error = AssessmentError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PreferenceRanking> for String {
    fn from(r: PreferenceRanking) -> String {
        r.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionAcceptance {
    pub condition: Condition,
    #[serde(flatten)]
    pub rating: AcceptanceRating,
}

/// Everything a report can show. Every part is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Assessment {
    pub stats: Vec<ComponentStats>,
    pub rankings: Vec<PreferenceRanking>,
    pub acceptance: Vec<ConditionAcceptance>,
    pub rubric: Option<EvaluationRubric>,
}

impl Assessment {
    pub fn from_json(text: &str) -> Result<Self, AssessmentError> {
        let a: Assessment = serde_json::from_str(text).map_err(|e| AssessmentError::Parse {
            origin: "assessment".into(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        for s in &a.stats {
            if !(s.sd >= 0.0) {
                return Err(AssessmentError::Invalid(format!("{} / {}: sd must be >= 0", s.component, s.condition)));
            }
        }
        for c in &a.acceptance {
            c.rating.validate()?;
        }
        Ok(a)
    }
}

const COL0: usize = 18;
const COL: usize = 20;

/// Plain-text report: the component table, then rankings, acceptance and
/// rubric sections when present.
pub fn render_report(a: &Assessment) -> String {
    let mut out = String::new();
    out.push_str("GEQ component scores, mean ± sd\n");
    out.push_str("sd is the population standard deviation (divisor N)\n\n");

    let conditions: Vec<Condition> = Condition::ALL
        .into_iter()
        .filter(|c| a.stats.iter().any(|s| s.condition == *c))
        .collect();
    let cell = |c: GeqComponent, cond: Condition| {
        a.stats
            .iter()
            .find(|s| s.component == c && s.condition == cond)
            .map_or_else(|| "-".to_owned(), ComponentStats::display)
    };
    if conditions.is_empty() {
        out.push_str("(no questionnaire data)\n");
    } else {
        let mut line = format!("{:<COL0$}", "Component");
        for c in &conditions {
            line.push_str(&format!("{:<COL$}", c.label()));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        let mut line = format!("{:<COL0$}", "n");
        for c in &conditions {
            let n = a.stats.iter().filter(|s| s.condition == *c).map(|s| s.n).max().unwrap_or(0);
            line.push_str(&format!("{:<COL$}", n));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for comp in GeqComponent::ALL {
            if !a.stats.iter().any(|s| s.component == comp) {
                continue;
            }
            let mut line = format!("{:<COL0$}", comp.label());
            for c in &conditions {
                line.push_str(&format!("{:<COL$}", cell(comp, *c)));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }

    if !a.rankings.is_empty() {
        out.push_str("\nPreference rankings (most preferred first)\n");
        for r in &a.rankings {
            let [x, y, z] = r.order.map(Condition::label);
            out.push_str(&format!("{} ({}): 1) {x}  2) {y}  3) {z}\n", r.respondent, r.role.token()));
        }
    }

    if !a.acceptance.is_empty() {
        out.push_str("\nAcceptance (1-5)\n");
        out.push_str(&format!(
            "{:<COL0$}{:<10}{:<10}{:<12}{}\n",
            "Condition", "utility", "usability", "likeability", "cost"
        ));
        for c in &a.acceptance {
            let r = &c.rating;
            let line = format!(
                "{:<COL0$}{:<10}{:<10}{:<12}{}",
                c.condition.label(),
                r.utility,
                r.usability,
                r.likeability,
                r.cost_note
            );
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }

    if let Some(rubric) = &a.rubric {
        out.push_str("\nEvaluation rubric\n");
        let mut group = "";
        for (g, name, value) in rubric.rows() {
            if g != group {
                out.push_str(&format!("{g}\n"));
                group = g;
            }
            out.push_str(&format!("  {name}: {value}\n"));
        }
    }
    out
}

/// Machine-readable form of the same report.
pub fn report_json(a: &Assessment) -> serde_json::Value {
    let stats: Vec<_> = a
        .stats
        .iter()
        .map(|s| {
            serde_json::json!({
                "component": s.component,
                "condition": s.condition,
                "n": s.n,
                "mean": s.mean,
                "sd": s.sd,
                "display": s.display(),
            })
        })
        .collect();
    serde_json::json!({
        "sd": "population",
        "stats": stats,
        "rankings": a.rankings,
        "acceptance": a.acceptance,
        "rubric": a.rubric,
    })
}

/// Reads a response CSV with columns `respondent, condition, item_1 ..
/// item_14` and optional `scale_min, scale_max`. Blank item cells load as
/// missing.
pub fn read_responses<R: Read>(reader: R, origin: &str) -> Result<Vec<GeqResponse>, AssessmentError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, message: String| AssessmentError::Parse {
        origin: origin.to_owned(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| parse_err(1, format!("missing column `{name}`")));
    let respondent = need("respondent")?;
    let condition = need("condition")?;
    let items = (1..=ITEM_COUNT)
        .map(|i| need(&format!("item_{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let (smin, smax) = (col("scale_min"), col("scale_max"));

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize, name: &str| -> Result<Option<f64>, AssessmentError> {
            let s = field(i);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| parse_err(line, format!("{name}: `{s}` is not a number")))
        };
        let mut scale = Scale::default();
        if let Some(i) = smin {
            scale.min = num(i, "scale_min")?.unwrap_or(scale.min);
        }
        if let Some(i) = smax {
            scale.max = num(i, "scale_max")?.unwrap_or(scale.max);
        }
        if !(scale.min < scale.max) {
            return Err(parse_err(line, "scale_min must be below scale_max".into()));
        }
        let mut values = [None; ITEM_COUNT];
        for (k, &i) in items.iter().enumerate() {
            values[k] = num(i, &format!("item_{}", k + 1))?;
        }
        let r = GeqResponse {
            respondent: field(respondent).to_owned(),
            condition: field(condition).parse().map_err(|e: AssessmentError| parse_err(line, e.to_string()))?,
            items: values,
            scale,
        };
        r.validate().map_err(|e| parse_err(line, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

pub fn load_responses(path: &Path) -> Result<Vec<GeqResponse>, AssessmentError> {
    let f = std::fs::File::open(path)?;
    read_responses(f, &path.display().to_string())
}

/// One ranking per line; blank lines and `#` comments are skipped.
pub fn parse_rankings(text: &str) -> Result<Vec<PreferenceRanking>, AssessmentError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}
