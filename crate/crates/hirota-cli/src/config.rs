//! Resolved configuration: flags layered over an optional key = value file.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use hirota::convergence::Protocol;
use hirota::systems::EquationId;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 20240607;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Identities,
    Bt,
    Lax,
    Simulate,
    Converge,
    DumpSystems,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Identities => "identities",
            Command::Bt => "bt",
            Command::Lax => "lax",
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::DumpSystems => "dump-systems",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    H,
    Dt,
}

/// A rational number read from a decimal or n/d literal, so that exact
/// checks can use the same spacing as float runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Rational, String> {
        let s = s.trim();
        let (num, den) = if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| format!("not a rational: {s}"))?;
            let d: i64 = d.trim().parse().map_err(|_| format!("not a rational: {s}"))?;
            (n, d)
        } else {
            let (neg, body) = s.strip_prefix('-').map(|b| (true, b)).unwrap_or((false, s));
            let (int, frac) = body.split_once('.').unwrap_or((body, ""));
            if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
                return Err(format!("not a decimal: {s}"));
            }
            if frac.len() > 12 {
                return Err(format!("too many decimals: {s}"));
            }
            let den = 10i64.pow(frac.len() as u32);
            let digits = format!("{int}{frac}");
            let n: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| format!("out of range: {s}"))? };
            (if neg { -n } else { n }, den)
        };
        if den == 0 {
            return Err("zero denominator".into());
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Ok(Rational { num: sign * num / g, den: sign * den / g })
    }
}

/// Which systems a command runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    All,
    One(EquationId),
}

impl Target {
    pub fn ids(self) -> Vec<EquationId> {
        match self {
            Target::All => EquationId::ALL.to_vec(),
            Target::One(id) => vec![id],
        }
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::All => s.serialize_str("all"),
            Target::One(id) => s.serialize_str(id.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    ExactTau,
    ZeroBackground,
}

/// Every key the configuration accepts, in output order.
pub const KEYS: &[&str] = &[
    "equation", "h", "k", "l", "dt", "sites", "t_end", "levels", "seed", "pairs", "points", "sweep", "boundary", "stride",
    "protocol", "tol", "expect_order", "output", "format",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub command: Command,
    pub equation: Target,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    pub seed: u64,
    pub pairs: usize,
    pub points: usize,
    pub sweep: Sweep,
    pub boundary: Boundary,
    pub stride: usize,
    pub protocol: Protocol,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect_order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: Format,
}

/// Offending key and what is wrong with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), message: message.into() }
}

/// Canonical key spelling: hyphens become underscores.
pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err(&format!("line {}", i + 1), "expected key = value"))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(err(&key, "unknown key"));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| err(key, format!("cannot parse {v:?}")))
}

fn positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = number(key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(err(key, "must be positive"));
    }
    Ok(x)
}

/// Build a configuration from merged key/value pairs.
pub fn resolve(command: Command, kv: &BTreeMap<String, String>) -> Result<Config, ConfigError> {
    let mut c = Config {
        command,
        equation: Target::All,
        h: None,
        k: None,
        l: None,
        dt: None,
        sites: None,
        t_end: None,
        levels: None,
        seed: DEFAULT_SEED,
        pairs: 100,
        points: 50,
        sweep: Sweep::H,
        boundary: Boundary::ExactTau,
        stride: 0,
        protocol: Protocol::SemidiscreteExact,
        tol: None,
        expect_order: None,
        output: None,
        format: Format::Json,
    };
    for (key, v) in kv {
        let key = key.as_str();
        match key {
            "equation" => {
                c.equation = if v.trim().eq_ignore_ascii_case("all") {
                    Target::All
                } else {
                    Target::One(v.parse().map_err(|_| err(key, format!("unknown equation {v:?}")))?)
                }
            }
            "h" => {
                let r: Rational = v.parse().map_err(|m: String| err(key, m))?;
                if r.num <= 0 {
                    return Err(err(key, "must be positive"));
                }
                c.h = Some(r);
            }
            "k" => {
                let k: f64 = number(key, v)?;
                if !(k.is_finite() && k >= 0.0) {
                    return Err(err(key, "must be non-negative"));
                }
                c.k = Some(k);
            }
            "l" => {
                let l: f64 = number(key, v)?;
                if !l.is_finite() {
                    return Err(err(key, "must be finite"));
                }
                c.l = Some(l);
            }
            "dt" => c.dt = Some(positive(key, v)?),
            "sites" => {
                let m: usize = number(key, v)?;
                if m < 4 {
                    return Err(err(key, "need at least 4 sites"));
                }
                c.sites = Some(m);
            }
            "t_end" => {
                let t: f64 = number(key, v)?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(err(key, "must be non-negative"));
                }
                c.t_end = Some(t);
            }
            "levels" => {
                let ls = v.split(',').map(|s| positive(key, s)).collect::<Result<Vec<_>, _>>()?;
                if ls.len() < 3 {
                    return Err(err(key, "need at least 3 levels"));
                }
                if ls.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(err(key, "levels must be strictly decreasing"));
                }
                c.levels = Some(ls);
            }
            "seed" => c.seed = number(key, v)?,
            "pairs" => {
                c.pairs = number(key, v)?;
                if c.pairs == 0 {
                    return Err(err(key, "must be positive"));
                }
            }
            "points" => {
                c.points = number(key, v)?;
                if c.points == 0 {
                    return Err(err(key, "must be positive"));
                }
            }
            "sweep" => {
                c.sweep = match v.trim() {
                    "h" => Sweep::H,
                    "dt" => Sweep::Dt,
                    _ => return Err(err(key, "expected h or dt")),
                }
            }
            "boundary" => {
                c.boundary = match v.trim() {
                    "exact-tau" => Boundary::ExactTau,
                    "zero-background" => Boundary::ZeroBackground,
                    _ => return Err(err(key, "expected exact-tau or zero-background")),
                }
            }
            "stride" => c.stride = number(key, v)?,
            "protocol" => {
                c.protocol = match v.trim() {
                    "semidiscrete-exact" => Protocol::SemidiscreteExact,
                    "continuum-self" => Protocol::ContinuumSelf,
                    "lattice-run" => Protocol::LatticeRun,
                    _ => return Err(err(key, "expected semidiscrete-exact, continuum-self or lattice-run")),
                }
            }
            "tol" => c.tol = Some(positive(key, v)?),
            "expect_order" => c.expect_order = Some(positive(key, v)?),
            "output" => c.output = Some(v.trim().to_string()),
            "format" => {
                c.format = match v.trim() {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(err(key, "expected json or csv")),
                }
            }
            _ => return Err(err(key, "unknown key")),
        }
    }
    Ok(c)
}

impl Config {
    /// The resolved configuration as `key = value` lines, readable back as a
    /// config file.
    pub fn to_file(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = format!("# command: {}\n", self.command.name());
        for key in KEYS {
            let Some(x) = v.get(*key) else { continue };
            let text = match (key, x) {
                (&"h", _) => self.h.map(|h| h.to_string()).unwrap_or_default(),
                (_, serde_json::Value::String(s)) => s.clone(),
                (_, serde_json::Value::Array(a)) => a.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
                (_, other) => other.to_string(),
            };
            out.push_str(&format!("{key} = {text}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn rationals() {
        assert_eq!("0.5".parse::<Rational>().unwrap(), Rational { num: 1, den: 2 });
        assert_eq!("2/6".parse::<Rational>().unwrap(), Rational { num: 1, den: 3 });
        assert_eq!("-1.25".parse::<Rational>().unwrap(), Rational { num: -5, den: 4 });
        assert_eq!("3".parse::<Rational>().unwrap(), Rational { num: 3, den: 1 });
        assert!("1e-3".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn verify_example() {
        let c = resolve(Command::Verify, &kv(&[("equation", "kdv"), ("h", "0.5")])).unwrap();
        assert_eq!(c.equation, Target::One(EquationId::KdV));
        assert_eq!(c.h, Some(Rational { num: 1, den: 2 }));
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn range_checks_name_the_key() {
        for (k, v) in [("h", "0"), ("dt", "-1"), ("sites", "3"), ("levels", "0.1,0.2,0.05"), ("format", "xml")] {
            let e = resolve(Command::Verify, &kv(&[(k, v)])).unwrap_err();
            assert_eq!(e.key, k);
        }
    }

    #[test]
    fn file_parsing() {
        let m = parse_file("# comment\nh = 0.5\nt-end = 2 # trailing\n\n").unwrap();
        assert_eq!(m, kv(&[("h", "0.5"), ("t_end", "2")]));
        assert_eq!(parse_file("bogus = 1").unwrap_err().key, "bogus");
        assert!(parse_file("h 0.5").is_err());
    }

    #[test]
    fn printed_config_reads_back() {
        let c = resolve(Command::Converge, &kv(&[("h", "1/3"), ("levels", "0.4,0.2,0.1"), ("equation", "sk")])).unwrap();
        let back = resolve(Command::Converge, &parse_file(&c.to_file()).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
