//! Strict INI-style run configuration.
//!
//! One flat key-value file with one section per command plus the shared
//! `[trap]` section. Unknown sections or keys are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use qtr_core::phys::ATOMIC_MASS_UNIT;
use qtr_core::TrapConfig;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KNOWN: &[(&str, &[&str])] = &[
    ("trap", &["n_ions", "omega_z_hz", "anisotropy", "ion_mass_u"]),
    ("modes", &["ratio_min", "ratio_max", "ratio_steps", "eigenvectors"]),
    ("potential", &["method", "grid_size", "with_wavefunctions"]),
    ("tunnel", &["grid_size", "resolution"]),
    ("walk", &["theta_ab", "initial_site", "t_max", "t_steps"]),
    ("interfere", &["theta_ab_list", "t_max", "t_steps"]),
    (
        "adiabat",
        &["ratio_start", "ratio_end", "duration_s", "samples"],
    ),
];

fn parse_sections(text: &str) -> Result<Sections, ConfigError> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError(format!("line {}: malformed section header", lineno + 1)))?
                .trim()
                .to_string();
            if out.contains_key(&name) {
                return err(format!("duplicate section [{name}]"));
            }
            out.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
        let section = current
            .as_ref()
            .ok_or_else(|| ConfigError(format!("line {}: key outside any section", lineno + 1)))?;
        let key = key.trim().to_string();
        let map = out.get_mut(section).unwrap();
        if map.contains_key(&key) {
            return err(format!("duplicate key '{key}' in section [{section}]"));
        }
        map.insert(key, value.trim().to_string());
    }
    for (section, keys) in &out {
        let known = KNOWN.iter().find(|(s, _)| s == section);
        match known {
            None => return err(format!("unknown section [{section}]")),
            Some((_, allowed)) => {
                for key in keys.keys() {
                    if !allowed.contains(&key.as_str()) {
                        return err(format!("unknown key '{key}' in section [{section}]"));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Angle in radians: a plain float or a pi fraction such as `pi`, `-pi/24`,
/// `2pi/3`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64, ConfigError> {
    let t = text.trim().to_lowercase();
    if let Some(idx) = t.find("pi") {
        let (pre, post) = (&t[..idx], &t[idx + 2..]);
        let coef = match pre.trim().trim_end_matches('*').trim() {
            "" => 1.0,
            "-" => -1.0,
            "+" => 1.0,
            num => num
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("bad angle '{text}'")))?,
        };
        let den = match post.trim() {
            "" => 1.0,
            frac => frac
                .strip_prefix('/')
                .ok_or_else(|| ConfigError(format!("bad angle '{text}'")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("bad angle '{text}'")))?,
        };
        if den == 0.0 {
            return err(format!("zero denominator in angle '{text}'"));
        }
        Ok(coef * PI / den)
    } else {
        t.parse::<f64>()
            .map_err(|_| ConfigError(format!("bad angle '{text}'")))
    }
}

struct Section<'a> {
    name: &'a str,
    map: &'a BTreeMap<String, String>,
}

impl Section<'_> {
    fn get(&self, key: &str) -> Result<&str, ConfigError> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| ConfigError(format!("missing key '{key}' in section [{}]", self.name)))
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.get(key)?;
        raw.parse::<f64>()
            .map_err(|_| ConfigError(format!("key '{key}': expected a number, got '{raw}'")))
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let raw = self.get(key)?;
        raw.parse::<usize>()
            .map_err(|_| ConfigError(format!("key '{key}': expected a non-negative integer, got '{raw}'")))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(_) => self.usize(key),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.map.get(key).map(|s| s.as_str()) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => err(format!("key '{key}': expected true or false, got '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModesConfig {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_steps: usize,
    pub eigenvectors: bool,
}

#[derive(Debug, Clone)]
pub struct PotentialConfig {
    pub method: String,
    pub grid_size: usize,
    pub with_wavefunctions: bool,
}

#[derive(Debug, Clone)]
pub struct TunnelConfig {
    pub grid_size: usize,
    pub resolution: usize,
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub theta_ab: f64,
    pub initial_site: usize,
    pub t_max: f64,
    pub t_steps: usize,
}

#[derive(Debug, Clone)]
pub struct InterfereConfig {
    pub theta_ab_list: Vec<f64>,
    pub t_max: f64,
    pub t_steps: usize,
}

#[derive(Debug, Clone)]
pub struct AdiabatConfig {
    pub ratio_start: f64,
    pub ratio_end: f64,
    pub duration_s: f64,
    pub samples: usize,
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trap: TrapConfig,
    pub modes: Option<ModesConfig>,
    pub potential: Option<PotentialConfig>,
    pub tunnel: Option<TunnelConfig>,
    pub walk: Option<WalkConfig>,
    pub interfere: Option<InterfereConfig>,
    pub adiabat: Option<AdiabatConfig>,
    /// SHA-256 of the raw config file, hex encoded.
    pub sha256: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        use sha2::{Digest, Sha256};
        let sections = parse_sections(text)?;
        let sec = |name: &'static str| -> Option<Section<'_>> {
            sections.get(name).map(|map| Section { name, map })
        };

        let trap_sec = sec("trap").ok_or_else(|| ConfigError("missing [trap] section".into()))?;
        let trap = TrapConfig::new(
            trap_sec.usize("n_ions")?,
            2.0 * PI * trap_sec.f64("omega_z_hz")?,
            trap_sec.f64("anisotropy")?,
            trap_sec.f64("ion_mass_u")? * ATOMIC_MASS_UNIT,
        )
        .map_err(|e| ConfigError(format!("[trap]: {e}")))?;

        let modes = sec("modes")
            .map(|s| {
                Ok::<_, ConfigError>(ModesConfig {
                    ratio_min: s.f64("ratio_min")?,
                    ratio_max: s.f64("ratio_max")?,
                    ratio_steps: s.usize("ratio_steps")?,
                    eigenvectors: s.bool_or("eigenvectors", false)?,
                })
            })
            .transpose()?;

        let potential = sec("potential")
            .map(|s| {
                Ok::<_, ConfigError>(PotentialConfig {
                    method: s
                        .map
                        .get("method")
                        .cloned()
                        .unwrap_or_else(|| "relaxed".to_string()),
                    grid_size: s.usize_or("grid_size", 256)?,
                    with_wavefunctions: s.bool_or("with_wavefunctions", false)?,
                })
            })
            .transpose()?;

        let tunnel = sec("tunnel")
            .map(|s| {
                Ok::<_, ConfigError>(TunnelConfig {
                    grid_size: s.usize_or("grid_size", 256)?,
                    resolution: s.usize_or("resolution", 1024)?,
                })
            })
            .transpose()?;

        let walk = sec("walk")
            .map(|s| {
                Ok::<_, ConfigError>(WalkConfig {
                    theta_ab: parse_angle(s.get("theta_ab")?)?,
                    initial_site: s.usize_or("initial_site", 1)?,
                    t_max: s.f64_or("t_max", 20.0)?,
                    t_steps: s.usize_or("t_steps", 400)?,
                })
            })
            .transpose()?;

        let interfere = sec("interfere")
            .map(|s| {
                let list = s
                    .get("theta_ab_list")?
                    .split(',')
                    .map(parse_angle)
                    .collect::<Result<Vec<_>, _>>()?;
                if list.is_empty() {
                    return err("theta_ab_list must not be empty");
                }
                Ok::<_, ConfigError>(InterfereConfig {
                    theta_ab_list: list,
                    t_max: s.f64_or("t_max", 5.0)?,
                    t_steps: s.usize_or("t_steps", 500)?,
                })
            })
            .transpose()?;

        let adiabat = sec("adiabat")
            .map(|s| {
                Ok::<_, ConfigError>(AdiabatConfig {
                    ratio_start: s.f64("ratio_start")?,
                    ratio_end: s.f64("ratio_end")?,
                    duration_s: s.f64("duration_s")?,
                    samples: s.usize_or("samples", 201)?,
                })
            })
            .transpose()?;

        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let sha256 = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();

        Ok(RunConfig {
            trap,
            modes,
            potential,
            tunnel,
            walk,
            interfere,
            adiabat,
            sha256,
        })
    }
}
