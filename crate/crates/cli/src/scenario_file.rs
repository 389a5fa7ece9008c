//! Sectioned `key = value` scenario files.
//!
//! ```text
//! [mode]
//! a = 1
//! n = 1
//!
//! [mirror]
//! D = 5
//!
//! [detector]
//! id = D1
//! position = 3
//! insert = 1
//! ```
//!
//! Several pairs may share a line (`[mode] a=1 n=1`). `#` starts a comment.

use std::fmt::Write as _;
use std::str::FromStr;

use fpdce_core::{Instrument, InstrumentKind, ModeSpec, OutcomeModel, Scenario, TieRule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Semantic(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> ScenarioFileError {
    ScenarioFileError::Syntax {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SectionKind {
    Mode,
    Mirror,
    Detector,
    ElectronGun,
    Run,
}

impl SectionKind {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "mode" => SectionKind::Mode,
            "mirror" => SectionKind::Mirror,
            "detector" => SectionKind::Detector,
            "electron_gun" => SectionKind::ElectronGun,
            "run" => SectionKind::Run,
            _ => return None,
        })
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            SectionKind::Mode => &["a", "n", "c", "eta", "source_x"],
            SectionKind::Mirror => &["D", "source", "counts_as_detector"],
            SectionKind::Detector => &["id", "position", "insert", "remove", "efficiency"],
            SectionKind::ElectronGun => &["id", "position", "width", "shot", "efficiency"],
            SectionKind::Run => &["model", "trials", "seed", "tie_rule"],
        }
    }

    fn name(self) -> &'static str {
        match self {
            SectionKind::Mode => "mode",
            SectionKind::Mirror => "mirror",
            SectionKind::Detector => "detector",
            SectionKind::ElectronGun => "electron_gun",
            SectionKind::Run => "run",
        }
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    kind: SectionKind,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ScenarioFileError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| {
                syntax(
                    e.line,
                    format!("invalid value `{}` for `{key}`: {err}", e.value),
                )
            }),
        }
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ScenarioFileError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| {
            syntax(
                self.line,
                format!("[{}] section is missing `{key}`", self.kind.name()),
            )
        })
    }
}

fn tokenize(text: &str) -> Result<Vec<Section>, ScenarioFileError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        if rest.starts_with('[') {
            let close = rest
                .find(']')
                .ok_or_else(|| syntax(line, "unterminated section header"))?;
            let name = rest[1..close].trim();
            let kind = SectionKind::parse(name)
                .ok_or_else(|| syntax(line, format!("unknown section [{name}]")))?;
            sections.push(Section {
                kind,
                line,
                entries: Vec::new(),
            });
            rest = rest[close + 1..].trim();
        }
        if rest.is_empty() {
            continue;
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| syntax(line, "key outside of any section"))?;
        let joined = rest.split('=').map(str::trim).collect::<Vec<_>>().join("=");
        for token in joined.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| syntax(line, format!("expected `key = value`, got `{token}`")))?;
            if key.is_empty() || value.is_empty() || value.contains('=') {
                return Err(syntax(line, format!("malformed pair `{token}`")));
            }
            if !section.kind.keys().contains(&key) {
                return Err(syntax(
                    line,
                    format!("unknown key `{key}` in [{}]", section.kind.name()),
                ));
            }
            if section.get(key).is_some() {
                return Err(syntax(line, format!("duplicate key `{key}`")));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
    }
    Ok(sections)
}

fn parse_bool(section: &Section, key: &str) -> Result<Option<bool>, ScenarioFileError> {
    section.parse::<bool>(key)
}

/// Parse and validate a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioFileError> {
    let sections = tokenize(text)?;
    let single = |kind: SectionKind| -> Result<Option<&Section>, ScenarioFileError> {
        let mut found = sections.iter().filter(|s| s.kind == kind);
        let first = found.next();
        if let Some(dup) = found.next() {
            return Err(syntax(
                dup.line,
                format!("repeated [{}] section", kind.name()),
            ));
        }
        Ok(first)
    };

    let mode_sec = single(SectionKind::Mode)?;
    let (mut a, mut n, mut c) = (1.0, 1u32, 1.0);
    let (mut eta, mut source_x) = (0.0, 0.0);
    if let Some(s) = mode_sec {
        a = s.parse("a")?.unwrap_or(a);
        n = s.parse("n")?.unwrap_or(n);
        c = s.parse("c")?.unwrap_or(c);
        eta = s.parse("eta")?.unwrap_or(eta);
        source_x = s.parse("source_x")?.unwrap_or(source_x);
    }
    let mode = ModeSpec::new(a, n, c).map_err(|e| ScenarioFileError::Semantic(e.to_string()))?;
    let mut scenario = Scenario::new(mode);
    scenario.eta = eta;
    scenario.source_position = source_x;

    if let Some(s) = single(SectionKind::Mirror)? {
        scenario.mirror_distance = Some(s.required("D")?);
        if let Some(e) = s.get("source") {
            scenario.source_blocking = match e.value.as_str() {
                "blocking" => true,
                "transparent" => false,
                other => {
                    return Err(syntax(
                        e.line,
                        format!("`source` must be blocking or transparent, got `{other}`"),
                    ))
                }
            };
        }
        scenario.mirror_is_detector =
            parse_bool(s, "counts_as_detector")?.unwrap_or(scenario.mirror_is_detector);
    }

    let (mut detectors, mut guns) = (0, 0);
    for s in &sections {
        let inst = match s.kind {
            SectionKind::Detector => {
                detectors += 1;
                let id = s
                    .get("id")
                    .map_or_else(|| format!("D{detectors}"), |e| e.value.clone());
                let mut d = Instrument::detector(
                    id,
                    s.required("position")?,
                    s.parse("insert")?.unwrap_or(0.0),
                );
                d.removal_time = s.parse("remove")?;
                d
            }
            SectionKind::ElectronGun => {
                guns += 1;
                let id = s
                    .get("id")
                    .map_or_else(|| format!("EG{guns}"), |e| e.value.clone());
                Instrument::electron_gun(
                    id,
                    s.required("position")?,
                    s.required("width")?,
                    s.required("shot")?,
                )
            }
            _ => continue,
        };
        let efficiency = s.parse("efficiency")?.unwrap_or(inst.efficiency);
        scenario.instruments.push(inst.with_efficiency(efficiency));
    }

    if let Some(s) = single(SectionKind::Run)? {
        scenario.model = s.parse("model")?.unwrap_or(scenario.model);
        scenario.trials = s.parse("trials")?.unwrap_or(scenario.trials);
        scenario.seed = s.parse("seed")?.unwrap_or(scenario.seed);
        scenario.tie_rule = s.parse("tie_rule")?.unwrap_or(scenario.tie_rule);
    }

    scenario
        .validate()
        .map_err(|e| ScenarioFileError::Semantic(e.to_string()))?;
    Ok(scenario)
}

/// Canonical text form; `parse_scenario` reads it back to an equal value.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let m = &s.mode;
    let _ = writeln!(
        out,
        "[mode]\na = {:?}\nn = {}\nc = {:?}",
        m.a(),
        m.n(),
        m.c()
    );
    let _ = writeln!(out, "eta = {:?}\nsource_x = {:?}", s.eta, s.source_position);
    if let Some(d) = s.mirror_distance {
        let _ = writeln!(out, "\n[mirror]\nD = {d:?}");
        let source = if s.source_blocking {
            "blocking"
        } else {
            "transparent"
        };
        let _ = writeln!(
            out,
            "source = {source}\ncounts_as_detector = {}",
            s.mirror_is_detector
        );
    }
    for inst in &s.instruments {
        match inst.kind {
            InstrumentKind::PhotonDetector => {
                let _ = writeln!(
                    out,
                    "\n[detector]\nid = {}\nposition = {:?}",
                    inst.id, inst.position
                );
                let _ = writeln!(out, "insert = {:?}", inst.insertion_time);
                if let Some(r) = inst.removal_time {
                    let _ = writeln!(out, "remove = {r:?}");
                }
            }
            InstrumentKind::ElectronGun { width } => {
                let _ = writeln!(
                    out,
                    "\n[electron_gun]\nid = {}\nposition = {:?}",
                    inst.id, inst.position
                );
                let _ = writeln!(out, "width = {width:?}\nshot = {:?}", inst.insertion_time);
            }
        }
        let _ = writeln!(out, "efficiency = {:?}", inst.efficiency);
    }
    let _ = writeln!(
        out,
        "\n[run]\nmodel = {}\ntrials = {}\nseed = {}\ntie_rule = {}",
        s.model.name(),
        s.trials,
        s.seed,
        s.tie_rule.name()
    );
    out
}

/// Model override from the command line.
pub fn parse_model(text: &str) -> Result<OutcomeModel, ScenarioFileError> {
    text.parse()
        .map_err(|e: fpdce_core::Error| ScenarioFileError::Semantic(e.to_string()))
}

/// Tie rule override from the command line.
pub fn parse_tie_rule(text: &str) -> Result<TieRule, ScenarioFileError> {
    text.parse()
        .map_err(|e: fpdce_core::Error| ScenarioFileError::Semantic(e.to_string()))
}
