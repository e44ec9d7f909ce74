//! Configuration files.
//!
//! The format is a small TOML subset: `[section]` headers, `key = value`
//! lines, `#` comments, double-quoted strings, integers, floats and
//! booleans. Every problem in a file is reported, each with its line.
//!
//! ```toml
//! problem = "piston"
//! resolution = 4
//! t_final = 1.0
//!
//! [body]
//! mass = 1.0
//!
//! [scheme]
//! mode = "amp"
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::amp_stepper::{DampingModel, GhostInit, ProblemSpec, SimulationConfig, TimeControl};
use crate::error::{ConfigIssue, Error, Result};
use crate::fluid_solver::{PressureMethod, SchemeMode};
use crate::verification::{DiskParams, PistonParams};

/// Where results go. Paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub history: String,
    /// Added-damping tensor report, when wanted.
    pub tensor_report: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { history: "history.csv".into(), tensor_report: None }
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimulationConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Int(_) => "integer",
            Value::Float(_) => "float",
            Value::Bool(_) => "boolean",
        }
    }
}

struct Entry {
    value: Value,
    line: usize,
}

const SECTIONS: [&str; 7] = ["", "fluid", "body", "geometry", "scheme", "time", "output"];

fn issue(line: usize, key: &str, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue { line, key: key.to_string(), message: message.into() }
}

fn parse_value(raw: &str) -> std::result::Result<Value, String> {
    if let Some(body) = raw.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = body.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    other => return Err(format!("unsupported escape '\\{}'", other.unwrap_or(' '))),
                },
                '"' => {
                    return if chars.as_str().trim().is_empty() {
                        Ok(Value::Str(out))
                    } else {
                        Err("unexpected text after string".into())
                    };
                }
                c => out.push(c),
            }
        }
        return Err("unterminated string".into());
    }
    match raw {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    let digits = raw.replace('_', "");
    if let Ok(i) = digits.parse::<i64>() {
        return Ok(Value::Int(i));
    }
    match digits.as_str() {
        "inf" | "+inf" => return Ok(Value::Float(f64::INFINITY)),
        "-inf" => return Ok(Value::Float(f64::NEG_INFINITY)),
        _ => {}
    }
    if digits.chars().all(|c| c.is_ascii_digit() || "+-.eE".contains(c)) {
        if let Ok(x) = digits.parse::<f64>() {
            return Ok(Value::Float(x));
        }
    }
    Err(format!("cannot read value '{raw}'"))
}

/// Removes a trailing comment, leaving `#` inside strings alone.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_str && !escaped => {
                escaped = true;
                continue;
            }
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
        escaped = false;
    }
    line
}

fn tokenize(text: &str, issues: &mut Vec<ConfigIssue>) -> BTreeMap<String, Entry> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section = String::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let s = strip_comment(raw).trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                issues.push(issue(line, "", "malformed section header"));
                continue;
            };
            let name = name.trim();
            if !SECTIONS[1..].contains(&name) {
                issues.push(issue(line, name, "unknown section"));
            }
            section = name.to_string();
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            issues.push(issue(line, "", "expected 'key = value'"));
            continue;
        };
        let k = k.trim();
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            issues.push(issue(line, k, "invalid key"));
            continue;
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        match parse_value(v.trim()) {
            Ok(value) => {
                if let Some(prev) = map.get(&key) {
                    issues.push(issue(line, &key, format!("duplicate key (lines {} and {line})", prev.line)));
                } else {
                    map.insert(key, Entry { value, line });
                }
            }
            Err(msg) => issues.push(issue(line, &key, msg)),
        }
    }
    map
}

/// Typed access to the tokenized entries, collecting issues as it goes.
struct Reader {
    map: BTreeMap<String, Entry>,
    used: HashSet<String>,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.line)
    }

    fn get(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.map.get(key).map(|e| &e.value)
    }

    fn mismatch(&mut self, key: &str, want: &str) {
        let got = self.map[key].value.type_name();
        self.issues.push(issue(self.line(key), key, format!("expected {want}, found {got}")));
    }

    fn f64(&mut self, key: &str, default: f64) -> f64 {
        match self.get(key).cloned() {
            None => default,
            Some(Value::Float(x)) => x,
            Some(Value::Int(i)) => i as f64,
            Some(_) => {
                self.mismatch(key, "number");
                default
            }
        }
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        self.map.contains_key(key).then(|| self.f64(key, f64::NAN))
    }

    fn usize(&mut self, key: &str, default: usize) -> usize {
        match self.get(key).cloned() {
            None => default,
            Some(Value::Int(i)) if i >= 0 => i as usize,
            Some(Value::Int(_)) => {
                self.issues.push(issue(self.line(key), key, "must be non-negative"));
                default
            }
            Some(_) => {
                self.mismatch(key, "integer");
                default
            }
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        match self.get(key).cloned() {
            None => default,
            Some(Value::Bool(b)) => b,
            Some(_) => {
                self.mismatch(key, "boolean");
                default
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.get(key).cloned() {
            None => None,
            Some(Value::Str(s)) => Some(s),
            Some(_) => {
                self.mismatch(key, "string");
                None
            }
        }
    }

    /// Reads a string through `parse`, falling back to `default`.
    fn choice<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T>) -> T {
        match self.string(key) {
            None => default,
            Some(s) => match parse(&s) {
                Ok(v) => v,
                Err(e) => {
                    self.issues.push(issue(self.line(key), key, e.to_string()));
                    default
                }
            },
        }
    }

    fn require(&mut self, ok: bool, key: &str, message: &str) {
        if !ok {
            self.issues.push(issue(self.line(key), key, message));
        }
    }
}

fn parse_problem(s: &str) -> Result<&'static str> {
    match s {
        "piston" => Ok("piston"),
        "rotating_disk" | "disk" => Ok("rotating_disk"),
        _ => Err(Error::Parameter(format!("unknown problem '{s}' (expected piston or rotating_disk)"))),
    }
}

fn parse_ghost_init(s: &str) -> Result<GhostInit> {
    match s {
        "exact" => Ok(GhostInit::Exact),
        "closure" => Ok(GhostInit::Closure),
        _ => Err(Error::Parameter(format!("unknown ghost initialisation '{s}'"))),
    }
}

/// Parses a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut issues = Vec::new();
    let map = tokenize(text, &mut issues);
    let mut r = Reader { map, used: HashSet::new(), issues };

    let kind = match r.string("problem") {
        Some(s) => match parse_problem(&s) {
            Ok(k) => k,
            Err(e) => {
                r.issues.push(issue(r.line("problem"), "problem", e.to_string()));
                "piston"
            }
        },
        None => {
            if !r.map.contains_key("problem") {
                r.issues.push(issue(0, "problem", "missing required key"));
            }
            "piston"
        }
    };
    let resolution = r.usize("resolution", 1);
    r.require(resolution >= 1, "resolution", "must be at least 1");
    let t_final = r.f64("t_final", 1.0);
    r.require(t_final >= 0.0 && t_final.is_finite(), "t_final", "must be non-negative");
    let stretch = r.opt_f64("stretch");
    if let Some(s) = stretch {
        r.require(s.is_finite() && s >= 0.0, "stretch", "must be non-negative");
    }

    let rho = r.f64("fluid.rho", 1.0);
    r.require(rho > 0.0 && rho.is_finite(), "fluid.rho", "must be positive");
    let mu = r.f64("fluid.mu", 0.1);
    r.require(mu > 0.0 && mu.is_finite(), "fluid.mu", "must be positive");

    let problem = if kind == "piston" {
        let d = PistonParams::default();
        let p = PistonParams {
            rho,
            mu,
            body_mass: r.f64("body.mass", d.body_mass),
            amplitude: r.f64("body.amplitude", d.amplitude),
            body_width: r.f64("geometry.width", d.body_width),
            height: r.f64("geometry.height", d.height),
            length: r.f64("geometry.length", d.length),
        };
        r.require(p.body_mass >= 0.0 && p.body_mass.is_finite(), "body.mass", "must be non-negative");
        r.require(p.amplitude.is_finite(), "body.amplitude", "must be finite");
        for (k, v) in [("geometry.width", p.body_width), ("geometry.height", p.height), ("geometry.length", p.length)] {
            r.require(v > 0.0 && v.is_finite(), k, "must be positive");
        }
        ProblemSpec::Piston(p)
    } else {
        let d = DiskParams::default();
        let p = DiskParams {
            rho,
            mu,
            p0: r.f64("fluid.p0", d.p0),
            rho_b: r.f64("body.rho_b", d.rho_b),
            amplitude: r.f64("body.amplitude", d.amplitude),
            r1: r.f64("geometry.r1", d.r1),
            r2: r.f64("geometry.r2", d.r2),
        };
        r.require(p.rho_b >= 0.0 && p.rho_b.is_finite(), "body.rho_b", "must be non-negative");
        r.require(p.amplitude.is_finite(), "body.amplitude", "must be finite");
        r.require(p.r1 > 0.0, "geometry.r1", "must be positive");
        r.require(p.r2 > p.r1 && p.r2.is_finite(), "geometry.r2", "must exceed geometry.r1");
        ProblemSpec::Disk(p)
    };

    let mut sim = SimulationConfig::new(problem, resolution.max(1));
    sim.stretch = stretch;
    let s = &mut sim.scheme;
    s.mode = r.choice("scheme.mode", s.mode, SchemeMode::parse);
    s.alpha = r.f64("scheme.alpha", s.alpha);
    s.alpha_bar = r.f64("scheme.alpha_bar", s.alpha_bar);
    s.beta_d = r.f64("scheme.beta_d", s.beta_d);
    s.n_corrections = r.usize("scheme.corrections", s.n_corrections);
    s.velocity_correction = r.bool("scheme.velocity_correction", s.velocity_correction);
    s.tp_subiterations = r.usize("scheme.tp_subiterations", s.tp_subiterations);
    s.pressure_method = r.choice("scheme.pressure_method", s.pressure_method, PressureMethod::parse);
    let (alpha, alpha_bar, beta_d) = (s.alpha, s.alpha_bar, s.beta_d);
    r.require((0.0..=1.0).contains(&alpha), "scheme.alpha", "must lie in [0, 1]");
    r.require(alpha_bar > 0.0 && alpha_bar <= 1.0, "scheme.alpha_bar", "must lie in (0, 1]");
    r.require(beta_d >= 0.0 && beta_d.is_finite(), "scheme.beta_d", "must be non-negative");
    sim.damping = r.choice("scheme.damping", sim.damping, DampingModel::parse);
    sim.ghost_init = r.choice("scheme.ghost_init", sim.ghost_init, parse_ghost_init);
    sim.instability_factor = r.f64("scheme.instability_factor", sim.instability_factor);
    r.require(sim.instability_factor > 0.0, "scheme.instability_factor", "must be positive");
    sim.abort_on_instability = r.bool("scheme.abort_on_instability", sim.abort_on_instability);

    let adaptive = r.choice("time.policy", false, |p| match p {
        "fixed" => Ok(false),
        "cfl" => Ok(true),
        _ => Err(Error::Parameter(format!("unknown time-step policy '{p}' (expected fixed or cfl)"))),
    });
    let d = TimeControl::default();
    sim.time = TimeControl {
        dt: r.f64("time.dt", sim.time.dt),
        t_final,
        adaptive,
        cfl: r.f64("time.cfl", d.cfl),
        dt_max: r.f64("time.dt_max", d.dt_max),
    };
    r.require(sim.time.dt > 0.0 && sim.time.dt.is_finite(), "time.dt", "must be positive");
    r.require(sim.time.cfl > 0.0, "time.cfl", "must be positive");
    r.require(sim.time.dt_max > 0.0, "time.dt_max", "must be positive");

    let mut output = OutputConfig::default();
    if let Some(h) = r.string("output.history") {
        output.history = h;
    }
    output.tensor_report = r.string("output.tensor_report");
    sim.snapshot_every = r.usize("output.snapshot_every", 0);

    let mut unknown: Vec<ConfigIssue> = r
        .map
        .iter()
        .filter(|(k, _)| !r.used.contains(*k))
        .map(|(k, e)| issue(e.line, k, "unknown key"))
        .collect();
    r.issues.append(&mut unknown);

    if r.issues.is_empty() {
        let checked = match &sim.problem {
            ProblemSpec::Piston(p) => p.validate(),
            ProblemSpec::Disk(_) => Ok(()),
        }
        .and_then(|_| sim.validate());
        if let Err(e) = checked {
            r.issues.push(issue(0, "", e.to_string()));
        }
    }
    if r.issues.is_empty() {
        Ok(RunConfig { sim, output })
    } else {
        r.issues.sort_by_key(|i| i.line);
        Err(Error::Config(r.issues))
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Writes a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(cfg: &RunConfig) -> String {
    let sim = &cfg.sim;
    let mut s = String::new();
    let problem = match sim.problem {
        ProblemSpec::Piston(_) => "piston",
        ProblemSpec::Disk(_) => "rotating_disk",
    };
    let _ = writeln!(s, "problem = \"{problem}\"");
    let _ = writeln!(s, "resolution = {}", sim.resolution);
    let _ = writeln!(s, "t_final = {:?}", sim.time.t_final);
    if let Some(st) = sim.stretch {
        let _ = writeln!(s, "stretch = {st:?}");
    }
    match &sim.problem {
        ProblemSpec::Piston(p) => {
            let _ = write!(
                s,
                "\n[fluid]\nrho = {:?}\nmu = {:?}\n\n[body]\nmass = {:?}\namplitude = {:?}\n\n[geometry]\nwidth = {:?}\nheight = {:?}\nlength = {:?}\n",
                p.rho, p.mu, p.body_mass, p.amplitude, p.body_width, p.height, p.length
            );
        }
        ProblemSpec::Disk(p) => {
            let _ = write!(
                s,
                "\n[fluid]\nrho = {:?}\nmu = {:?}\np0 = {:?}\n\n[body]\nrho_b = {:?}\namplitude = {:?}\n\n[geometry]\nr1 = {:?}\nr2 = {:?}\n",
                p.rho, p.mu, p.p0, p.rho_b, p.amplitude, p.r1, p.r2
            );
        }
    }
    let sc = &sim.scheme;
    let ghost = match sim.ghost_init {
        GhostInit::Exact => "exact",
        GhostInit::Closure => "closure",
    };
    let _ = writeln!(s, "\n[scheme]");
    let _ = writeln!(s, "mode = \"{}\"", sc.mode.name());
    let _ = writeln!(s, "alpha = {:?}", sc.alpha);
    let _ = writeln!(s, "alpha_bar = {:?}", sc.alpha_bar);
    let _ = writeln!(s, "beta_d = {:?}", sc.beta_d);
    let _ = writeln!(s, "corrections = {}", sc.n_corrections);
    let _ = writeln!(s, "velocity_correction = {}", sc.velocity_correction);
    let _ = writeln!(s, "tp_subiterations = {}", sc.tp_subiterations);
    let _ = writeln!(s, "pressure_method = \"{}\"", sc.pressure_method.name());
    let _ = writeln!(s, "damping = \"{}\"", sim.damping.name());
    let _ = writeln!(s, "ghost_init = \"{ghost}\"");
    let _ = writeln!(s, "instability_factor = {:?}", sim.instability_factor);
    let _ = writeln!(s, "abort_on_instability = {}", sim.abort_on_instability);
    let t = &sim.time;
    let _ = writeln!(s, "\n[time]");
    let _ = writeln!(s, "policy = \"{}\"", if t.adaptive { "cfl" } else { "fixed" });
    let _ = writeln!(s, "dt = {:?}", t.dt);
    let _ = writeln!(s, "cfl = {:?}", t.cfl);
    let _ = writeln!(s, "dt_max = {:?}", t.dt_max);
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "history = {}", quote(&cfg.output.history));
    if let Some(tr) = &cfg.output.tensor_report {
        let _ = writeln!(s, "tensor_report = {}", quote(tr));
    }
    let _ = writeln!(s, "snapshot_every = {}", sim.snapshot_every);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues(text: &str) -> Vec<ConfigIssue> {
        match parse_config(text) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_piston_gets_defaults() {
        let c = parse_config("problem = \"piston\"\n").unwrap();
        assert_eq!(c.sim.scheme.beta_d, 1.0);
        assert_eq!((c.sim.scheme.alpha, c.sim.scheme.alpha_bar), (0.5, 0.5));
        assert_eq!(c.sim.scheme.n_corrections, 1);
        assert_eq!(c.sim.time.dt, 0.1);
    }

    #[test]
    fn negative_density_names_key() {
        let v = issues("problem = \"piston\"\n[fluid]\nrho = -1\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].key, "fluid.rho");
        assert_eq!(v[0].line, 3);
    }

    #[test]
    fn duplicate_lists_both_lines() {
        let v = issues("problem = \"piston\"\n[scheme]\nbeta_d = 1\n\nbeta_d = 2\n");
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("lines 3 and 5"), "{}", v[0]);
    }

    #[test]
    fn reports_all_issues() {
        let v = issues("problem = \"disk\"\nresolution = \"four\"\n[body]\nmass = 2\n[scheme]\nalpha = 3\nbogus = 1\n");
        let keys: Vec<&str> = v.iter().map(|i| i.key.as_str()).collect();
        assert_eq!(keys, ["resolution", "body.mass", "scheme.alpha", "scheme.bogus"]);
    }

    #[test]
    fn comments_and_strings() {
        let c = parse_config("problem = \"piston\" # trailing\n[output]\nhistory = \"a#b \\\"q\\\".csv\"\n").unwrap();
        assert_eq!(c.output.history, "a#b \"q\".csv");
    }

    #[test]
    fn render_round_trips() {
        let mut c = parse_config("problem = \"rotating_disk\"\nresolution = 3\nstretch = 2.5\n").unwrap();
        c.sim.time.dt = 0.1 + 0.2;
        c.output.tensor_report = Some("t.txt".into());
        assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
    }
}
