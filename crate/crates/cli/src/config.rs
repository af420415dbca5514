//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! The format is deliberately not a general markup: every key is known,
//! unknown keys and duplicates are hard errors, and every diagnostic
//! carries a line number.

use std::collections::HashMap;
use std::fmt;

use brinkfric_core::params::PhysicalParams;
use brinkfric_core::presets::{ForcingSpec, InitSpec};
use brinkfric_core::transient::StepConfig;

#[derive(Debug)]
pub enum CliError {
    Config { line: usize, msg: String },
    Core(brinkfric_core::Error),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { line, msg } => write!(f, "config error (line {line}): {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<brinkfric_core::Error> for CliError {
    fn from(e: brinkfric_core::Error) -> Self {
        CliError::Core(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn cfg_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        msg: msg.into(),
    }
}

/// Barrier specification on S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrictionCfg {
    Constant(f64),
    PerWall { bottom: f64, top: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCfg {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputCfg {
    pub dir: String,
    pub emit_svg: bool,
    pub csv_precision: usize,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridCfg,
    pub params: PhysicalParams,
    pub friction: FrictionCfg,
    pub forcing: ForcingSpec,
    pub init: InitSpec,
    pub stepping: StepConfig,
    pub output: OutputCfg,
    /// Raw text, fingerprinted into every certification row.
    pub raw: String,
}

const SECTIONS: &[&str] = &[
    "grid", "params", "friction", "forcing", "init", "stepping", "output",
];

struct Section {
    entries: HashMap<String, (String, usize)>,
    header_line: usize,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str, section: &str) -> Result<(String, usize), CliError> {
        self.take(key).ok_or_else(|| {
            cfg_err(
                self.header_line,
                format!("section [{section}] is missing required key `{key}`"),
            )
        })
    }

    fn finish(self, section: &str) -> Result<(), CliError> {
        if let Some((key, (_, line))) = self.entries.into_iter().next() {
            return Err(cfg_err(
                line,
                format!("unknown key `{key}` in section [{section}]"),
            ));
        }
        Ok(())
    }
}

fn parse_f64(raw: &(String, usize), key: &str) -> Result<f64, CliError> {
    raw.0
        .parse::<f64>()
        .map_err(|_| cfg_err(raw.1, format!("`{key}` expects a number, got `{}`", raw.0)))
}

fn parse_usize(raw: &(String, usize), key: &str) -> Result<usize, CliError> {
    raw.0
        .parse::<usize>()
        .map_err(|_| cfg_err(raw.1, format!("`{key}` expects a nonnegative integer, got `{}`", raw.0)))
}

fn parse_bool(raw: &(String, usize), key: &str) -> Result<bool, CliError> {
    match raw.0.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(cfg_err(
            raw.1,
            format!("`{key}` expects true or false, got `{other}`"),
        )),
    }
}

/// Parse and validate configuration text. Unknown sections, unknown
/// keys, duplicates and constraint violations are all hard errors.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut sections: HashMap<String, Section> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(cfg_err(line_no, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(cfg_err(line_no, format!("section [{name}] appears twice")));
            }
            sections.insert(
                name.clone(),
                Section {
                    entries: HashMap::new(),
                    header_line: line_no,
                },
            );
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(cfg_err(line_no, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(cfg_err(line_no, "empty key or value"));
        }
        let section_name = current
            .clone()
            .ok_or_else(|| cfg_err(line_no, "key outside of any [section]"))?;
        let section = sections.get_mut(&section_name).expect("section exists");
        if let Some((_, first_line)) = section.entries.get(&key) {
            return Err(cfg_err(
                line_no,
                format!("duplicate key `{key}` (first defined at line {first_line})"),
            ));
        }
        section.entries.insert(key, (value, line_no));
    }

    let mut need = |name: &str| -> Result<Section, CliError> {
        sections
            .remove(name)
            .ok_or_else(|| cfg_err(0, format!("missing required section [{name}]")))
    };

    // [grid]
    let mut s = need("grid")?;
    let nx = parse_usize(&s.require("nx", "grid")?, "nx")?;
    let ny = parse_usize(&s.require("ny", "grid")?, "ny")?;
    let lx = parse_f64(&s.require("lx", "grid")?, "lx")?;
    let ly = parse_f64(&s.require("ly", "grid")?, "ly")?;
    let grid_line = s.header_line;
    s.finish("grid")?;
    brinkfric_core::Grid2D::build(nx, ny, lx, ly)
        .map_err(|e| cfg_err(grid_line, e.to_string()))?;
    let grid = GridCfg { nx, ny, lx, ly };

    // [params]
    let mut s = need("params")?;
    let nu_raw = s.require("nu", "params")?;
    let a_raw = s.require("a", "params")?;
    let b_raw = s.require("b", "params")?;
    let alpha_raw = s.require("alpha", "params")?;
    let eps_raw = s.require("eps", "params")?;
    let params_line = s.header_line;
    s.finish("params")?;
    let params = PhysicalParams::new(
        parse_f64(&nu_raw, "nu")?,
        parse_f64(&a_raw, "a")?,
        parse_f64(&b_raw, "b")?,
        parse_f64(&alpha_raw, "alpha")?,
        parse_f64(&eps_raw, "eps")?,
    )
    .map_err(|e| cfg_err(params_line, e.to_string()))?;

    // [friction]
    let mut s = need("friction")?;
    let g = s.take("g");
    let gb = s.take("g_bottom");
    let gt = s.take("g_top");
    let fric_line = s.header_line;
    s.finish("friction")?;
    let friction = match (g, gb, gt) {
        (Some(g), None, None) => FrictionCfg::Constant(parse_f64(&g, "g")?),
        (None, Some(b), Some(t)) => FrictionCfg::PerWall {
            bottom: parse_f64(&b, "g_bottom")?,
            top: parse_f64(&t, "g_top")?,
        },
        (Some(_), _, _) => {
            return Err(cfg_err(
                fric_line,
                "give either `g` or the pair `g_bottom`/`g_top`, not both",
            ))
        }
        _ => {
            return Err(cfg_err(
                fric_line,
                "section [friction] needs `g` or both `g_bottom` and `g_top`",
            ))
        }
    };
    let gvals = match friction {
        FrictionCfg::Constant(g) => vec![g],
        FrictionCfg::PerWall { bottom, top } => vec![bottom, top],
    };
    if gvals.iter().any(|&g| !(g.is_finite() && g >= 0.0)) {
        return Err(cfg_err(fric_line, "barrier g must be finite and >= 0"));
    }

    // [forcing]
    let mut s = need("forcing")?;
    let preset = s.require("preset", "forcing")?;
    let forcing = match preset.0.as_str() {
        "zero" => ForcingSpec::Zero,
        "constant" => {
            let fx = parse_f64(&s.require("fx", "forcing")?, "fx")?;
            let fy = parse_f64(&s.require("fy", "forcing")?, "fy")?;
            ForcingSpec::Constant { fx, fy }
        }
        "decaying" => ForcingSpec::DecayingX {
            amplitude: parse_f64(&s.require("amplitude", "forcing")?, "amplitude")?,
        },
        "sine-y" => ForcingSpec::SineY {
            amplitude: parse_f64(&s.require("amplitude", "forcing")?, "amplitude")?,
        },
        other => {
            return Err(cfg_err(
                preset.1,
                format!("unknown forcing preset `{other}` (zero | constant | decaying | sine-y)"),
            ))
        }
    };
    s.finish("forcing")?;

    // [init]
    let mut s = need("init")?;
    let preset = s.require("preset", "init")?;
    let init = match preset.0.as_str() {
        "zero" => InitSpec::Zero,
        "taylor-vortex" => InitSpec::TaylorVortex {
            amplitude: parse_f64(&s.require("amplitude", "init")?, "amplitude")?,
        },
        "shear-profile" => InitSpec::ShearProfile {
            amplitude: parse_f64(&s.require("amplitude", "init")?, "amplitude")?,
        },
        other => {
            return Err(cfg_err(
                preset.1,
                format!("unknown init preset `{other}` (zero | taylor-vortex | shear-profile)"),
            ))
        }
    };
    s.finish("init")?;

    // [stepping]
    let mut s = need("stepping")?;
    let dt = parse_f64(&s.require("dt", "stepping")?, "dt")?;
    let t_end = parse_f64(&s.require("t_end", "stepping")?, "t_end")?;
    let defaults = StepConfig::default();
    let picard_tol = match s.take("picard_tol") {
        Some(v) => parse_f64(&v, "picard_tol")?,
        None => defaults.picard_tol,
    };
    let picard_max = match s.take("picard_max") {
        Some(v) => parse_usize(&v, "picard_max")?,
        None => defaults.picard_max,
    };
    let uzawa_tol = match s.take("uzawa_tol") {
        Some(v) => parse_f64(&v, "uzawa_tol")?,
        None => defaults.uzawa_tol,
    };
    let uzawa_max = match s.take("uzawa_max") {
        Some(v) => parse_usize(&v, "uzawa_max")?,
        None => defaults.uzawa_max,
    };
    let lag_mode = match s.take("lag_mode") {
        Some(v) => parse_bool(&v, "lag_mode")?,
        None => defaults.lag_mode,
    };
    let step_line = s.header_line;
    s.finish("stepping")?;
    let stepping = StepConfig {
        dt,
        t_end,
        picard_tol,
        picard_max,
        uzawa_tol,
        uzawa_max,
        lag_mode,
    };
    stepping
        .validate()
        .map_err(|e| cfg_err(step_line, e.to_string()))?;
    if t_end < dt {
        return Err(cfg_err(step_line, format!("t_end ({t_end}) must be >= dt ({dt})")));
    }

    // [output] (optional section)
    let output = match sections.remove("output") {
        Some(mut s) => {
            let dir = match s.take("dir") {
                Some(v) => v.0,
                None => "out".to_string(),
            };
            let emit_svg = match s.take("emit_svg") {
                Some(v) => parse_bool(&v, "emit_svg")?,
                None => false,
            };
            let csv_precision = match s.take("csv_precision") {
                Some(v) => {
                    let p = parse_usize(&v, "csv_precision")?;
                    if !(1..=17).contains(&p) {
                        return Err(cfg_err(v.1, "csv_precision must lie in 1..=17"));
                    }
                    p
                }
                None => 17,
            };
            s.finish("output")?;
            OutputCfg {
                dir,
                emit_svg,
                csv_precision,
            }
        }
        None => OutputCfg {
            dir: "out".to_string(),
            emit_svg: false,
            csv_precision: 17,
        },
    };

    if let Some(name) = sections.keys().next() {
        let line = sections[name].header_line;
        return Err(cfg_err(line, format!("section [{name}] is not allowed here")));
    }

    Ok(RunConfig {
        grid,
        params,
        friction,
        forcing,
        init,
        stepping,
        output,
        raw: text.to_string(),
    })
}
