//! Scenarios, the shipped corpus and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::attacker::{confidential, AttackerConfig};
use crate::cfa::{analyze, AnalysisOptions, AnalysisResult, SolveError, SolverOptions};
use crate::model::{all_names, CryptoPoint, Name, Process};
use crate::parser::{expand_with, parse, ExpandOptions, ParseError, Warning};

pub const SCHEMA_VERSION: u32 = 1;

/// A name with `*` wildcards; `*` stands for any index other than `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NamePattern {
    pub base: String,
    pub indices: Vec<Option<u32>>,
}

impl NamePattern {
    pub fn matches(&self, n: &Name) -> bool {
        n.base == self.base
            && n.indices.len() == self.indices.len()
            && n.indices.iter().zip(&self.indices).all(|(&i, p)| match p {
                Some(want) => i == *want,
                None => i != 0,
            })
    }
}

impl FromStr for NamePattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (base, rest) = match s.find('[') {
            Some(k) => (&s[..k], Some(&s[k..])),
            None => (s, None),
        };
        if base.is_empty() || !base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad name pattern `{s}`"));
        }
        let mut indices = Vec::new();
        if let Some(rest) = rest {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| format!("bad name pattern `{s}`"))?;
            for part in inner.split(',') {
                let part = part.trim();
                indices.push(if part == "*" {
                    None
                } else {
                    Some(part.parse().map_err(|_| format!("bad index `{part}` in `{s}`"))?)
                });
            }
        }
        Ok(NamePattern {
            base: base.to_string(),
            indices,
        })
    }
}

impl fmt::Display for NamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        if !self.indices.is_empty() {
            let parts: Vec<String> = self
                .indices
                .iter()
                .map(|i| i.map_or("*".to_string(), |v| v.to_string()))
                .collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

/// What a scenario is expected to report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expectation {
    pub psi_empty: Option<bool>,
    pub secrets_safe: Option<bool>,
    /// Pairs that must appear in ψ, as rendered points.
    pub psi_contains: Vec<(String, String)>,
    /// The exact ψ, as rendered points.
    pub psi_exact: Option<Vec<(String, String)>>,
    /// Values that must appear in ρ(z•), as rendered values.
    pub knows: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub file: String,
    pub source: String,
    /// Replaces declared index sets.
    pub index_sets: BTreeMap<String, BTreeSet<u32>>,
    pub attacker: bool,
    /// Keeps the attacker index `0` in index sets.
    pub legitimate_attacker: bool,
    pub rounds: u32,
    pub leaked: Vec<NamePattern>,
    pub secrets: Vec<NamePattern>,
    pub expect: Expectation,
    pub solver: SolverOptions,
}

impl Scenario {
    pub fn new(name: &str, file: &str, source: &str) -> Self {
        Scenario {
            name: name.to_string(),
            file: file.to_string(),
            source: source.to_string(),
            index_sets: BTreeMap::new(),
            attacker: true,
            legitimate_attacker: false,
            rounds: 1,
            leaked: Vec::new(),
            secrets: Vec::new(),
            expect: Expectation::default(),
            solver: SolverOptions::default(),
        }
    }

    /// The expanded process, with the warnings raised while parsing.
    pub fn process(&self) -> Result<(Process, Vec<Warning>), ScenarioError> {
        let model = parse(&self.source)?;
        let opts = ExpandOptions {
            overrides: self.index_sets.clone(),
            drop_attacker_index: !self.legitimate_attacker,
        };
        let p = expand_with(&model, &opts)?;
        if self.rounds == 2 {
            let names = all_names(&p);
            for r in [1, 2] {
                if !names.contains(&Name::indexed("ROUND", vec![r])) {
                    return Err(ScenarioError::Config(format!(
                        "two-round scenario without round indicator ROUND[{r}]"
                    )));
                }
            }
        } else if self.rounds != 1 {
            return Err(ScenarioError::Config(format!(
                "rounds must be 1 or 2, got {}",
                self.rounds
            )));
        }
        Ok((p, model.warnings))
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdicts {
    /// ψ is empty.
    pub authentic: bool,
    /// Per secret name.
    pub confidential: BTreeMap<String, bool>,
    pub expectations_met: bool,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Timings {
    pub parse: f64,
    pub solve: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub psi: Vec<[String; 2]>,
    pub attacker_knowledge: Vec<String>,
    pub kappa_size: usize,
    pub verdicts: Verdicts,
    pub rho_summary: BTreeMap<String, Vec<String>>,
    pub warnings: Vec<String>,
    pub timings_ms: Timings,
}

impl Report {
    /// JSON without timings, for comparing runs.
    pub fn fingerprint(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialise");
        v.as_object_mut().expect("object").remove("timings_ms");
        v.to_string()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "scenario {}", self.scenario).unwrap();
        for w in &self.warnings {
            writeln!(out, "  {w}").unwrap();
        }
        writeln!(out, "  |κ| = {}", self.kappa_size).unwrap();
        for (x, vs) in &self.rho_summary {
            for v in vs {
                writeln!(out, "  {v} ∈ ρ({x})").unwrap();
            }
        }
        if !self.attacker_knowledge.is_empty() {
            writeln!(out, "  ρ(z•) = {{{}}}", self.attacker_knowledge.join(", ")).unwrap();
        }
        let psi: Vec<String> = self.psi.iter().map(|[a, b]| format!("({a}, {b})")).collect();
        writeln!(out, "  ψ = {{{}}}", psi.join(", ")).unwrap();
        for (s, ok) in &self.verdicts.confidential {
            let word = if *ok { "confidential" } else { "NOT confidential" };
            writeln!(out, "  {s}: {word}").unwrap();
        }
        let auth = if self.verdicts.authentic { "holds" } else { "violated" };
        writeln!(out, "  authentication {auth}").unwrap();
        for m in &self.verdicts.mismatches {
            writeln!(out, "  MISMATCH {m}").unwrap();
        }
        writeln!(
            out,
            "  {:.1} ms (parse {:.1}, solve {:.1})",
            self.timings_ms.total, self.timings_ms.parse, self.timings_ms.solve
        )
        .unwrap();
        out
    }

    /// 0 when every expectation holds, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.expectations_met {
            0
        } else {
            2
        }
    }
}

fn matching(p: &Process, patterns: &[NamePattern]) -> BTreeSet<Name> {
    all_names(p)
        .into_iter()
        .filter(|n| patterns.iter().any(|pat| pat.matches(n)))
        .collect()
}

/// Analyses the scenario and returns the raw result with its report.
pub fn run_scenario_full(s: &Scenario) -> Result<(Process, AnalysisResult, Report), ScenarioError> {
    let start = Instant::now();
    let (p, warnings) = s.process()?;
    let parsed = start.elapsed();
    let attacker = s
        .attacker
        .then(|| AttackerConfig::for_process(&p).with_seeds(matching(&p, &s.leaked)));
    let opts = AnalysisOptions {
        attacker,
        solver: s.solver.clone(),
        ..Default::default()
    };
    let solve_start = Instant::now();
    let r = analyze(&p, &opts)?;
    let solved = solve_start.elapsed();

    let psi: Vec<[String; 2]> = r
        .psi
        .iter()
        .map(|(a, b)| [a.to_string(), b.to_string()])
        .collect();
    let attacker_knowledge = r.attacker.as_ref().map(|z| r.render_set(z)).unwrap_or_default();
    let confidential_map: BTreeMap<String, bool> = matching(&p, &s.secrets)
        .iter()
        .map(|n| (n.to_string(), confidential(&r, n)))
        .collect();

    let mut mismatches = Vec::new();
    let e = &s.expect;
    if let Some(want) = e.psi_empty {
        if want != r.psi.is_empty() {
            mismatches.push(format!("expected ψ empty = {want}, found {} pairs", r.psi.len()));
        }
    }
    if let Some(want) = e.secrets_safe {
        let safe = confidential_map.values().all(|&ok| ok);
        if want != safe {
            mismatches.push(format!("expected secrets confidential = {want}"));
        }
    }
    for (a, b) in &e.psi_contains {
        if !psi.iter().any(|[x, y]| x == a && y == b) {
            mismatches.push(format!("expected ({a}, {b}) in ψ"));
        }
    }
    if let Some(exact) = &e.psi_exact {
        let got: BTreeSet<(String, String)> =
            psi.iter().map(|[a, b]| (a.clone(), b.clone())).collect();
        let want: BTreeSet<(String, String)> = exact.iter().cloned().collect();
        if got != want {
            mismatches.push(format!("expected ψ = {want:?}"));
        }
    }
    for v in &e.knows {
        if !attacker_knowledge.contains(v) {
            mismatches.push(format!("expected {v} in ρ(z•)"));
        }
    }

    let report = Report {
        schema_version: SCHEMA_VERSION,
        scenario: s.name.clone(),
        psi,
        attacker_knowledge,
        kappa_size: r.kappa.len(),
        verdicts: Verdicts {
            authentic: r.psi.is_empty(),
            confidential: confidential_map,
            expectations_met: mismatches.is_empty(),
            mismatches,
        },
        rho_summary: r.rho_summary().into_iter().collect(),
        warnings: warnings.iter().map(|w| w.to_string()).collect(),
        timings_ms: Timings {
            parse: parsed.as_secs_f64() * 1e3,
            solve: solved.as_secs_f64() * 1e3,
            total: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    Ok((p, r, report))
}

pub fn run_scenario(s: &Scenario) -> Result<Report, ScenarioError> {
    run_scenario_full(s).map(|(_, _, report)| report)
}

pub fn pattern(s: &str) -> NamePattern {
    s.parse().expect("valid name pattern")
}

fn point_pair(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

macro_rules! corpus_file {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/", $name))
    };
}

pub const EXAMPLE2: &str = corpus_file!("example2.lysa");
pub const CASE1_BASE: &str = corpus_file!("case1-base.lysa");
pub const CASE1_FIXED: &str = corpus_file!("case1-fixed.lysa");
pub const CASE1_BASE_2R: &str = corpus_file!("case1-base-2r.lysa");
pub const CASE1_FIXED_2R: &str = corpus_file!("case1-fixed-2r.lysa");
pub const CASE2_BASE_2R: &str = corpus_file!("case2-base-2r.lysa");
pub const CASE2_FIXED_2R: &str = corpus_file!("case2-fixed-2r.lysa");
pub const CASE2_FIXED_2R_LITERAL: &str = corpus_file!("case2-fixed-2r-literal.lysa");

/// Frozen ψ of a scenario, stored as `{"psi": [[from, to], ...]}`.
fn golden(text: &str) -> Vec<(String, String)> {
    #[derive(serde::Deserialize)]
    struct Golden {
        psi: Vec<(String, String)>,
    }
    serde_json::from_str::<Golden>(text)
        .expect("golden files are valid")
        .psi
}

/// The shipped scenarios.
pub fn corpus() -> Vec<Scenario> {
    let mut out = Vec::new();

    let mut s = Scenario::new("example2", "example2.lysa", EXAMPLE2);
    s.secrets = vec![pattern("K")];
    s.expect = Expectation {
        psi_empty: Some(false),
        secrets_safe: Some(false),
        psi_contains: vec![point_pair("lA", "l•")],
        knows: vec!["KA".into(), "K".into(), "{K}:KA[at lA dest {lB}]".into()],
        ..Default::default()
    };
    out.push(s);

    let mut s = Scenario::new("example2-no-attacker", "example2.lysa", EXAMPLE2);
    s.attacker = false;
    s.expect.psi_empty = Some(true);
    out.push(s);

    for (name, src) in [("case1-base", CASE1_BASE), ("case1-fixed", CASE1_FIXED)] {
        for legit in [false, true] {
            let suffix = if legit { "-legit" } else { "" };
            let mut s = Scenario::new(&format!("{name}{suffix}"), &format!("{name}.lysa"), src);
            s.legitimate_attacker = legit;
            s.secrets = vec![pattern("MSG[*,*]")];
            s.expect.psi_empty = Some(true);
            s.expect.secrets_safe = Some(true);
            out.push(s);
        }
    }

    let two_round: [(&str, &str, &str, bool, [&str; 2]); 4] = [
        (
            "case1-base-2r",
            CASE1_BASE_2R,
            "LK[*,*,1]",
            true,
            [
                corpus_file!("golden/case1-base-2r.json"),
                corpus_file!("golden/case1-base-2r-legit.json"),
            ],
        ),
        ("case1-fixed-2r", CASE1_FIXED_2R, "LK[*,*,1]", false, ["", ""]),
        (
            "case2-base-2r",
            CASE2_BASE_2R,
            "MK[*,*,1]",
            true,
            [
                corpus_file!("golden/case2-base-2r.json"),
                corpus_file!("golden/case2-base-2r-legit.json"),
            ],
        ),
        ("case2-fixed-2r", CASE2_FIXED_2R, "MK[*,*,1]", false, ["", ""]),
    ];
    for (name, src, leak, flawed, goldens) in two_round {
        for (legit, gold) in [(false, goldens[0]), (true, goldens[1])] {
            let suffix = if legit { "-legit" } else { "" };
            let mut s = Scenario::new(&format!("{name}{suffix}"), &format!("{name}.lysa"), src);
            s.legitimate_attacker = legit;
            s.rounds = 2;
            s.leaked = vec![pattern(leak)];
            s.secrets = vec![pattern("MSG[*,*,2]")];
            s.expect.psi_empty = Some(!flawed);
            s.expect.secrets_safe = Some(!flawed);
            if flawed {
                s.expect.psi_exact = Some(golden(gold));
            }
            out.push(s);
        }
    }

    let mut s = Scenario::new(
        "case2-fixed-2r-literal",
        "case2-fixed-2r-literal.lysa",
        CASE2_FIXED_2R_LITERAL,
    );
    s.rounds = 2;
    s.leaked = vec![pattern("MK[*,*,1]")];
    s.secrets = vec![pattern("MSG[*,*,2]")];
    s.expect.psi_empty = Some(false);
    s.expect.secrets_safe = Some(true);
    s.expect.psi_exact = Some(golden(corpus_file!("golden/case2-fixed-2r-literal.json")));
    out.push(s);
    out
}

/// Points as they appear in reports.
pub fn render_pair(p: &(CryptoPoint, CryptoPoint)) -> (String, String) {
    (p.0.to_string(), p.1.to_string())
}
