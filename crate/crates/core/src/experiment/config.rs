use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::assembly::{AssemblyOptions, ConvectiveScaling, Stabilization};
use crate::geom::Vec2;
use crate::mesh::{MeshFamily, DEFAULT_MESH_SEED};
use crate::problems::{CaseTag, Overrides};

/// A configuration problem, naming the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

impl ConfigError {
    /// The key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key, .. } | ConfigError::Duplicate { key, .. } | ConfigError::Invalid { key, .. } => {
                Some(key)
            }
            ConfigError::Missing(k) => Some(k),
        }
    }
}

/// Everything needed to run one convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub test: CaseTag,
    pub family: MeshFamily,
    /// Resolution parameters, strictly increasing.
    pub refinements: Vec<usize>,
    pub overrides: Overrides,
    pub options: AssemblyOptions,
    pub output: PathBuf,
    pub seed: u64,
    /// Record wall-clock times in the CSV. Off by default so that output is
    /// byte-reproducible.
    pub timings: bool,
    /// Write each assembled matrix in coordinate format.
    pub dump_matrix: bool,
}

pub const KEYS: [&str; 12] = [
    "test",
    "family",
    "refinements",
    "nu",
    "kappa",
    "beta",
    "stab",
    "c_nu",
    "output",
    "seed",
    "timings",
    "dump_matrix",
];

/// Default resolutions: seven levels per family, the finest staying below
/// 10⁵ unknowns.
pub fn default_refinements(family: MeshFamily) -> Vec<usize> {
    match family {
        MeshFamily::Voronoi => vec![128, 256, 512, 1024, 2048, 4096, 8192],
        MeshFamily::Hexagons => vec![6, 12, 24, 32, 48, 64, 96],
        _ => vec![8, 16, 24, 32, 48, 64, 96],
    }
}

impl RunConfig {
    pub fn new(test: CaseTag, family: MeshFamily) -> Self {
        RunConfig {
            test,
            family,
            refinements: default_refinements(family),
            overrides: Overrides::default(),
            options: AssemblyOptions::default(),
            output: PathBuf::from("out"),
            seed: DEFAULT_MESH_SEED,
            timings: false,
            dump_matrix: false,
        }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored;
    /// lists are comma separated.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(&str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.trim().to_string(),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
            if entries.iter().any(|(e, _)| *e == k) {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
            entries.push((k, v));
        }
        let get = |k: &str| entries.iter().find(|(e, _)| *e == k).map(|(_, v)| *v);

        let test = parse_value::<CaseTag>("test", get("test").ok_or(ConfigError::Missing("test"))?)?;
        let family = match get("family") {
            Some(v) => parse_value::<MeshFamily>("family", v)?,
            None => MeshFamily::Squares,
        };
        let mut cfg = RunConfig::new(test, family);
        for (k, v) in entries {
            match k {
                "refinements" => {
                    cfg.refinements = v
                        .split(',')
                        .map(|s| parse_value::<usize>(k, s))
                        .collect::<Result<_, _>>()?;
                }
                "nu" => cfg.overrides.nu = Some(positive(k, v)?),
                "kappa" => cfg.overrides.kappa = Some(positive(k, v)?),
                "beta" => {
                    let parts: Vec<f64> = v.split(',').map(|s| parse_value::<f64>(k, s)).collect::<Result<_, _>>()?;
                    if parts.len() != 2 || parts.iter().any(|x| !x.is_finite()) {
                        return Err(invalid(k, "expected two finite components `bx, by`"));
                    }
                    cfg.overrides.beta = Some(Vec2::new(parts[0], parts[1]));
                }
                "stab" => cfg.options.stabilization = parse_value::<Stabilization>(k, v)?,
                "c_nu" => cfg.options.convective = parse_value::<ConvectiveScaling>(k, v)?,
                "output" => cfg.output = PathBuf::from(v),
                "seed" => cfg.seed = parse_seed(v).ok_or_else(|| invalid(k, "expected an unsigned integer"))?,
                "timings" => cfg.timings = parse_bool(k, v)?,
                "dump_matrix" => cfg.dump_matrix = parse_bool(k, v)?,
                _ => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.refinements.is_empty() {
            return Err(invalid("refinements", "list is empty"));
        }
        if self.refinements.contains(&0) {
            return Err(invalid("refinements", "resolutions must be positive"));
        }
        if self.refinements.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("refinements", "list must be strictly increasing"));
        }
        for (key, value) in [("nu", self.overrides.nu), ("kappa", self.overrides.kappa)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(key, "must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    /// Writes the configuration back in the accepted text format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "test = {}", self.test)?;
        writeln!(f, "family = {}", self.family)?;
        let r: Vec<String> = self.refinements.iter().map(|n| n.to_string()).collect();
        writeln!(f, "refinements = {}", r.join(", "))?;
        if let Some(nu) = self.overrides.nu {
            writeln!(f, "nu = {nu:e}")?;
        }
        if let Some(k) = self.overrides.kappa {
            writeln!(f, "kappa = {k:e}")?;
        }
        if let Some(b) = self.overrides.beta {
            writeln!(f, "beta = {:e}, {:e}", b.x, b.y)?;
        }
        writeln!(f, "stab = {}", self.options.stabilization)?;
        writeln!(f, "c_nu = {}", self.options.convective)?;
        writeln!(f, "output = {}", self.output.display())?;
        writeln!(f, "seed = {:#x}", self.seed)?;
        writeln!(f, "timings = {}", self.timings)?;
        writeln!(f, "dump_matrix = {}", self.dump_matrix)
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| invalid(key, format!("`{}`: {e}", v.trim())))
}

fn positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = parse_value::<f64>(key, v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, format!("must be positive, got {x}")))
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(invalid(key, format!("expected a boolean, got `{v}`"))),
    }
}

pub(crate) fn parse_seed(v: &str) -> Option<u64> {
    let v = v.trim().replace('_', "");
    match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config() {
        let text = "\
# Test 3 sweep
test = test3
family = T4
refinements = 4, 8,16
nu = 0.5
kappa = 1e4   # strong reaction
beta = 1, -2
stab = scaled
c_nu = c_nu_off
output = results/t3
seed = 0xBEEF
timings = yes
dump_matrix = false
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.test, CaseTag::Test3);
        assert_eq!(c.family, MeshFamily::DistortedQuads);
        assert_eq!(c.refinements, vec![4, 8, 16]);
        assert_eq!(c.overrides.nu, Some(0.5));
        assert_eq!(c.overrides.kappa, Some(1e4));
        assert_eq!(c.overrides.beta, Some(Vec2::new(1.0, -2.0)));
        assert_eq!(c.options.stabilization, Stabilization::Scaled);
        assert_eq!(c.options.convective, ConvectiveScaling::Unit);
        assert_eq!(c.seed, 0xbeef);
        assert!(c.timings && !c.dump_matrix);
        assert_eq!(RunConfig::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn defaults() {
        let c = RunConfig::parse("test = patch").unwrap();
        assert_eq!(c.family, MeshFamily::Squares);
        assert_eq!(c.refinements, default_refinements(MeshFamily::Squares));
        for f in MeshFamily::ALL {
            let r = default_refinements(f);
            assert!((5..=7).contains(&r.len()));
            assert!(r.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(c.seed, DEFAULT_MESH_SEED);
        assert_eq!(c.options, AssemblyOptions::default());
        assert!(!c.timings);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("family = t2", "test"),
            ("test = test9", "test"),
            ("test = test1\nrefinements = 8, 4", "refinements"),
            ("test = test1\nrefinements = 8, 8", "refinements"),
            ("test = test1\nnu = -1", "nu"),
            ("test = test1\nkappa = 0", "kappa"),
            ("test = test1\nbeta = 1", "beta"),
            ("test = test1\nstab = fancy", "stab"),
            ("test = test1\nc_nu = maybe", "c_nu"),
            ("test = test1\nseed = abc", "seed"),
            ("test = test1\nwhatever = 3", "whatever"),
            ("test = test1\ntest = test2", "test"),
        ];
        for (text, key) in cases {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.key(), Some(key), "{text}: {e}");
            assert!(e.to_string().contains(key));
        }
        assert!(matches!(RunConfig::parse("test test1"), Err(ConfigError::Syntax { line: 1, .. })));
    }
}
