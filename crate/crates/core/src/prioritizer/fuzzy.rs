//! Mamdani fuzzy prioritizer.
//!
//! Each variable has a Ruspini partition of triangles with shoulder terms at
//! both ends, so memberships sum to one everywhere in the domain. Rules fire
//! with the minimum of their antecedent memberships, outputs aggregate by
//! maximum, and the crisp value is the centroid over a uniform grid.
//!
//! The bundled rule base covers all 405 antecedent combinations. It is
//! generated from a weighted urgency score and stored as plain text:
//!
//! ```text
//! IF pos=low AND vel=fast AND ti=high AND lat=short AND pri=highest THEN out=highest
//! ```

use std::fmt::Write as _;

use super::{PriorityInputs, PrioritizerError, MAX_LATENESS, MAX_RADIAL_VELOCITY, MIN_LATENESS};

const BUILTIN_RULES: &str = include_str!("../../data/fuzzy_rules.txt");

pub const DEFAULT_RESOLUTION: usize = 201;

pub const VARIABLES: [&str; 5] = ["pos", "vel", "ti", "lat", "pri"];

pub const POSITION_TERMS: [&str; 3] = ["low", "medium", "high"];
pub const VELOCITY_TERMS: [&str; 3] = ["slow", "medium", "fast"];
pub const INVALIDITY_TERMS: [&str; 3] = ["low", "medium", "high"];
pub const LATENESS_TERMS: [&str; 3] = ["short", "medium", "long"];
pub const PRIORITY_TERMS: [&str; 5] = ["lowest", "low", "medium", "high", "highest"];
pub const OUTPUT_TERMS: [&str; 7] = ["lowest", "verylow", "low", "medium", "high", "veryhigh", "highest"];

/// Urgency weights of the generated rule base: position, velocity,
/// invalidity, lateness, priority.
pub const RULE_WEIGHTS: [f64; 5] = [0.10, 0.15, 0.15, 0.10, 0.50];

fn terms_of(var: usize) -> &'static [&'static str] {
    match var {
        0 => &POSITION_TERMS,
        1 => &VELOCITY_TERMS,
        2 => &INVALIDITY_TERMS,
        3 => &LATENESS_TERMS,
        _ => &PRIORITY_TERMS,
    }
}

/// Ruspini partition given by its ordered term peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    peaks: Vec<f64>,
}

impl Partition {
    pub fn new(peaks: Vec<f64>) -> Result<Self, PrioritizerError> {
        if peaks.len() < 2 {
            return Err(PrioritizerError::InvalidPartition("need at least two terms".into()));
        }
        if peaks.iter().any(|p| !p.is_finite()) || peaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PrioritizerError::InvalidPartition("peaks must be finite and strictly increasing".into()));
        }
        Ok(Self { peaks })
    }

    /// `n` terms with peaks spaced evenly over `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self, PrioritizerError> {
        if n < 2 {
            return Err(PrioritizerError::InvalidPartition("need at least two terms".into()));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::new((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    pub fn lo(&self) -> f64 {
        self.peaks[0]
    }

    pub fn hi(&self) -> f64 {
        self.peaks[self.peaks.len() - 1]
    }

    /// Membership of `x` in term `i`.
    pub fn membership(&self, i: usize, x: f64) -> f64 {
        let n = self.peaks.len();
        let c = self.peaks[i];
        if x <= c {
            if i == 0 {
                return 1.0;
            }
            let a = self.peaks[i - 1];
            ((x - a) / (c - a)).max(0.0)
        } else {
            if i == n - 1 {
                return 1.0;
            }
            let b = self.peaks[i + 1];
            ((b - x) / (b - c)).max(0.0)
        }
    }

    pub fn memberships(&self, x: f64) -> Vec<f64> {
        (0..self.peaks.len()).map(|i| self.membership(i, x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    /// Term index per input variable, in [`VARIABLES`] order.
    pub antecedent: [usize; 5],
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    pub rules: Vec<Rule>,
}

impl RuleBase {
    pub fn parse(text: &str) -> Result<Self, PrioritizerError> {
        let mut rules = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            rules.push(parse_rule(line).map_err(|reason| PrioritizerError::RuleSyntax { line: no + 1, reason })?);
        }
        Ok(Self { rules })
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_RULES).expect("bundled rule base parses")
    }

    /// Complete rule base from the weighted urgency score. Lower position,
    /// faster closing, higher invalidity, shorter lateness and higher
    /// priority all raise urgency.
    pub fn generate() -> Self {
        let mut rules = Vec::with_capacity(405);
        for pos in 0..3 {
            for vel in 0..3 {
                for ti in 0..3 {
                    for lat in 0..3 {
                        for pri in 0..5 {
                            let levels = [
                                (2 - pos) as f64 / 2.0,
                                vel as f64 / 2.0,
                                ti as f64 / 2.0,
                                (2 - lat) as f64 / 2.0,
                                pri as f64 / 4.0,
                            ];
                            let score: f64 = levels.iter().zip(RULE_WEIGHTS).map(|(l, w)| l * w).sum();
                            let output = (score * (OUTPUT_TERMS.len() - 1) as f64).round() as usize;
                            rules.push(Rule {
                                antecedent: [pos, vel, ti, lat, pri],
                                output,
                            });
                        }
                    }
                }
            }
        }
        Self { rules }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let mut parts = Vec::with_capacity(5);
            for (v, &t) in r.antecedent.iter().enumerate() {
                parts.push(format!("{}={}", VARIABLES[v], terms_of(v)[t]));
            }
            writeln!(out, "IF {} THEN out={}", parts.join(" AND "), OUTPUT_TERMS[r.output]).expect("write to string");
        }
        out
    }
}

fn parse_rule(line: &str) -> Result<Rule, String> {
    let body = line.strip_prefix("IF ").ok_or("missing IF")?;
    let (lhs, rhs) = body.split_once(" THEN ").ok_or("missing THEN")?;
    let mut antecedent = [usize::MAX; 5];
    for clause in lhs.split(" AND ") {
        let (var, term) = clause.trim().split_once('=').ok_or_else(|| format!("bad clause '{clause}'"))?;
        let v = VARIABLES
            .iter()
            .position(|&name| name == var)
            .ok_or_else(|| format!("unknown variable '{var}'"))?;
        if antecedent[v] != usize::MAX {
            return Err(format!("variable '{var}' repeated"));
        }
        antecedent[v] = terms_of(v)
            .iter()
            .position(|&t| t == term)
            .ok_or_else(|| format!("unknown term '{term}' for '{var}'"))?;
    }
    if let Some(v) = antecedent.iter().position(|&t| t == usize::MAX) {
        return Err(format!("variable '{}' missing", VARIABLES[v]));
    }
    let term = rhs.trim().strip_prefix("out=").ok_or("consequent must be out=<term>")?;
    let output = OUTPUT_TERMS
        .iter()
        .position(|&t| t == term)
        .ok_or_else(|| format!("unknown output term '{term}'"))?;
    Ok(Rule { antecedent, output })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPrioritizer {
    /// Input partitions in [`VARIABLES`] order.
    pub inputs: [Partition; 5],
    pub output: Partition,
    pub rules: RuleBase,
    pub resolution: usize,
}

impl FuzzyPrioritizer {
    pub fn new(inputs: [Partition; 5], output: Partition, rules: RuleBase, resolution: usize) -> Result<Self, PrioritizerError> {
        for (v, p) in inputs.iter().enumerate() {
            if p.len() != terms_of(v).len() {
                return Err(PrioritizerError::InvalidPartition(format!(
                    "'{}' needs {} terms, got {}",
                    VARIABLES[v],
                    terms_of(v).len(),
                    p.len()
                )));
            }
        }
        if output.len() != OUTPUT_TERMS.len() {
            return Err(PrioritizerError::InvalidPartition(format!("output needs {} terms", OUTPUT_TERMS.len())));
        }
        if resolution < 2 {
            return Err(PrioritizerError::InvalidPartition("resolution below 2".into()));
        }
        Ok(Self {
            inputs,
            output,
            rules,
            resolution,
        })
    }

    /// Uniform partitions over each variable's range and the bundled rules.
    pub fn standard() -> Self {
        let inputs = [
            Partition::uniform(0.0, 1.0, 3).expect("valid"),
            Partition::uniform(0.0, MAX_RADIAL_VELOCITY, 3).expect("valid"),
            Partition::uniform(0.0, 1.0, 3).expect("valid"),
            Partition::uniform(MIN_LATENESS, MAX_LATENESS, 3).expect("valid"),
            Partition::uniform(1.0, 5.0, 5).expect("valid"),
        ];
        let output = Partition::uniform(0.0, 1.0, 7).expect("valid");
        Self::new(inputs, output, RuleBase::builtin(), DEFAULT_RESOLUTION).expect("standard configuration is valid")
    }

    /// Strength with which each output term is activated.
    pub fn activations(&self, x: &PriorityInputs) -> Vec<f64> {
        let values = [
            x.position(),
            x.radial_velocity(),
            x.track_invalidity(),
            x.allowable_lateness(),
            f64::from(x.original_priority()),
        ];
        let degrees: Vec<Vec<f64>> = self.inputs.iter().zip(values).map(|(p, v)| p.memberships(v)).collect();
        let mut act = vec![0.0; self.output.len()];
        for r in &self.rules.rules {
            let fire = r
                .antecedent
                .iter()
                .enumerate()
                .map(|(v, &t)| degrees[v][t])
                .fold(1.0, f64::min);
            if fire > act[r.output] {
                act[r.output] = fire;
            }
        }
        act
    }

    /// Centroid of a clipped-and-aggregated output set.
    pub fn defuzzify(&self, activations: &[f64]) -> Result<f64, PrioritizerError> {
        let (lo, hi) = (self.output.lo(), self.output.hi());
        let step = (hi - lo) / (self.resolution - 1) as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..self.resolution {
            let y = lo + step * k as f64;
            let mu = activations
                .iter()
                .enumerate()
                .filter(|&(_, &a)| a > 0.0)
                .map(|(t, &a)| a.min(self.output.membership(t, y)))
                .fold(0.0, f64::max);
            num += y * mu;
            den += mu;
        }
        if den <= 0.0 {
            return Err(PrioritizerError::NoRuleFires);
        }
        Ok(num / den)
    }

    pub fn infer(&self, x: &PriorityInputs) -> Result<f64, PrioritizerError> {
        self.defuzzify(&self.activations(x))
    }
}
