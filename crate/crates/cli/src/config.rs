//! `key = value` run manifests.
//!
//! Required keys: `N`, `M`, `L`, `alpha`, `nu`, `t_end`. `M` and `L` take a
//! single value for every axis or a comma-separated list of `N` values.
//! Lines starting with `#` and blank lines are ignored; unknown and
//! repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cnqg_core::initial::{centered_bump, multi_bump, negative_bump, random_smooth};
use cnqg_core::{Grid, PhysicalField, Scheme, SolverConfig};

use crate::checkpoint;
use crate::error::{CliError, CliResult};
use crate::output::fmt17;

pub const REQUIRED_KEYS: [&str; 6] = ["N", "M", "L", "alpha", "nu", "t_end"];

pub const OPTIONAL_KEYS: [&str; 21] = [
    "eps",
    "nonlinear",
    "scheme",
    "dt_max",
    "cfl",
    "dealias",
    "record_every",
    "clip_negative",
    "tail_fraction",
    "gradient_factor",
    "initial",
    "amplitude",
    "width",
    "band",
    "seed",
    "checkpoint",
    "out",
    "checkpoint_every",
    "hs",
    "spectrum",
    "subsample",
];

/// Built-in initial data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Centered Gaussian, `width` is the standard deviation.
    GaussianBump,
    /// Three Gaussians of unequal heights, `width` is the base deviation.
    MultiBump,
    /// Compact nonpositive bump, `width` is the support radius.
    NegativeBump,
    /// Seeded band-limited field with maximum `amplitude`.
    RandomSmooth,
    /// `amplitude` everywhere.
    Constant,
    /// Field read from the checkpoint file given by `checkpoint`.
    Checkpoint,
}

impl FromStr for Shape {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "gaussian-bump" => Self::GaussianBump,
            "multi-bump" => Self::MultiBump,
            "negative-bump" => Self::NegativeBump,
            "random-smooth" => Self::RandomSmooth,
            "constant" => Self::Constant,
            "checkpoint" => Self::Checkpoint,
            other => return Err(CliError::config("initial", format!("unknown shape `{other}`"))),
        })
    }
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianBump => "gaussian-bump",
            Self::MultiBump => "multi-bump",
            Self::NegativeBump => "negative-bump",
            Self::RandomSmooth => "random-smooth",
            Self::Constant => "constant",
            Self::Checkpoint => "checkpoint",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub shape: Shape,
    pub amplitude: f64,
    /// Shape-specific length; `None` picks a default from the box size.
    pub width: Option<f64>,
    /// Highest retained wavenumber index of `random-smooth`.
    pub band: usize,
    /// Seed of `random-smooth`; recorded for every run.
    pub seed: u64,
    pub checkpoint: Option<PathBuf>,
}

/// A fully resolved run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub config: SolverConfig<f64>,
    pub initial: InitialSpec,
    pub out: PathBuf,
    /// Write a checkpoint every this many records; 0 writes only the final state.
    pub checkpoint_every: usize,
    pub hs_orders: Vec<f64>,
    pub spectrum: bool,
    /// Point stride for the double-sum quadratures.
    pub subsample: usize,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub scheme: Option<Scheme>,
}

fn parse_value<V: FromStr>(key: &str, raw: &str) -> CliResult<V> {
    raw.parse()
        .map_err(|_| CliError::config(key, format!("cannot parse `{raw}`")))
}

fn parse_list<V: FromStr + Clone>(key: &str, raw: &str, dim: usize) -> CliResult<Vec<V>> {
    let items = raw
        .split(',')
        .map(|s| parse_value::<V>(key, s.trim()))
        .collect::<CliResult<Vec<V>>>()?;
    match items.len() {
        1 => Ok(vec![items[0].clone(); dim]),
        n if n == dim => Ok(items),
        n => Err(CliError::config(key, format!("expected 1 or {dim} values, found {n}"))),
    }
}

fn parse_bool(key: &str, raw: &str) -> CliResult<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(key, format!("expected true or false, found `{raw}`"))),
    }
}

/// Splits the text into a key map, rejecting unknown or repeated keys.
fn key_values(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, found `{line}`"),
            ));
        };
        let key = key.trim();
        let value = value.split('#').next().unwrap_or("").trim();
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(CliError::config(key, "unknown key"));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::config(key, "key given more than once"));
        }
    }
    Ok(map)
}

/// Parses manifest text, applies `overrides` and validates the result.
pub fn parse_config_str(text: &str, overrides: &Overrides) -> CliResult<RunManifest> {
    let map = key_values(text)?;
    for key in REQUIRED_KEYS {
        if !map.contains_key(key) {
            return Err(CliError::config(key, "missing required key"));
        }
    }
    let get = |key: &str| map.get(key).map(String::as_str);

    let dim: usize = parse_value("N", &map["N"])?;
    if !(1..=3).contains(&dim) {
        return Err(CliError::config("N", format!("dimension {dim} must be 1, 2 or 3")));
    }
    let points: Vec<usize> = parse_list("M", &map["M"], dim)?;
    let lengths: Vec<f64> = parse_list("L", &map["L"], dim)?;
    let l_min = lengths.iter().copied().fold(f64::INFINITY, f64::min);

    let defaults = SolverConfig::<f64>::default();
    let mut config = SolverConfig {
        alpha: parse_value("alpha", &map["alpha"])?,
        nu: parse_value("nu", &map["nu"])?,
        t_end: parse_value("t_end", &map["t_end"])?,
        eps: get("eps").map(|v| parse_value("eps", v)).transpose()?.unwrap_or(defaults.eps),
        scheme: match get("scheme") {
            Some(v) => v.parse().map_err(|e: cnqg_core::Error| CliError::config("scheme", e.to_string()))?,
            None => defaults.scheme,
        },
        dt_max: get("dt_max").map(|v| parse_value("dt_max", v)).transpose()?.unwrap_or(defaults.dt_max),
        cfl: get("cfl").map(|v| parse_value("cfl", v)).transpose()?.unwrap_or(defaults.cfl),
        dealias_fraction: get("dealias")
            .map(|v| parse_value("dealias", v))
            .transpose()?
            .unwrap_or(defaults.dealias_fraction),
        record_every: get("record_every")
            .map(|v| parse_value("record_every", v))
            .transpose()?
            .unwrap_or(defaults.record_every),
        clip_negative: get("clip_negative")
            .map(|v| parse_bool("clip_negative", v))
            .transpose()?
            .unwrap_or(defaults.clip_negative),
        nonlinear: get("nonlinear")
            .map(|v| parse_bool("nonlinear", v))
            .transpose()?
            .unwrap_or(defaults.nonlinear),
        keep_fields: false,
        ..defaults
    };
    if let Some(v) = get("tail_fraction") {
        config.blowup.tail_fraction = parse_value("tail_fraction", v)?;
    }
    if let Some(v) = get("gradient_factor") {
        config.blowup.gradient_factor = parse_value("gradient_factor", v)?;
    }

    let initial = InitialSpec {
        shape: get("initial").map(str::parse).transpose()?.unwrap_or(Shape::GaussianBump),
        amplitude: get("amplitude").map(|v| parse_value("amplitude", v)).transpose()?.unwrap_or(1.0),
        width: get("width").map(|v| parse_value("width", v)).transpose()?,
        band: get("band").map(|v| parse_value("band", v)).transpose()?.unwrap_or(4),
        seed: get("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(0),
        checkpoint: get("checkpoint").map(PathBuf::from),
    };
    let hs_orders = match get("hs") {
        Some("") => Vec::new(),
        Some(v) => v
            .split(',')
            .map(|s| parse_value("hs", s.trim()))
            .collect::<CliResult<Vec<f64>>>()?,
        None => vec![0.5, 1.0],
    };

    let mut manifest = RunManifest {
        points,
        lengths,
        config,
        initial,
        out: get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        checkpoint_every: get("checkpoint_every")
            .map(|v| parse_value("checkpoint_every", v))
            .transpose()?
            .unwrap_or(0),
        hs_orders,
        spectrum: get("spectrum").map(|v| parse_bool("spectrum", v)).transpose()?.unwrap_or(false),
        subsample: get("subsample").map(|v| parse_value("subsample", v)).transpose()?.unwrap_or(1),
    };
    manifest.apply(overrides);
    manifest.validate(l_min)?;
    Ok(manifest)
}

/// Reads and parses a manifest file.
pub fn parse_config(path: &Path, overrides: &Overrides) -> CliResult<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text, overrides)
}

impl RunManifest {
    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.initial.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.nu {
            self.config.nu = v;
        }
        if let Some(v) = o.alpha {
            self.config.alpha = v;
        }
        if let Some(v) = o.eps {
            self.config.eps = v;
        }
        if let Some(v) = o.scheme {
            self.config.scheme = v;
        }
    }

    fn validate(&self, l_min: f64) -> CliResult<()> {
        Grid::<f64>::new(&self.points, &self.lengths).map_err(|e| CliError::config("M", e.to_string()))?;
        self.config.validate().map_err(|e| match e {
            cnqg_core::Error::InvalidParameter { name, reason, value } => {
                let key = match name {
                    "dealias_fraction" => "dealias",
                    other => other,
                };
                CliError::config(key, format!("{value}: {reason}"))
            }
            other => CliError::config("config", other.to_string()),
        })?;
        if !(self.config.blowup.tail_fraction > 0.0) {
            return Err(CliError::config("tail_fraction", "must be positive"));
        }
        if !(self.config.blowup.gradient_factor > 1.0) {
            return Err(CliError::config("gradient_factor", "must exceed 1"));
        }
        if let Some(w) = self.initial.width {
            if !(w > 0.0 && w <= l_min / 2.0) {
                return Err(CliError::config("width", format!("{w} must lie in (0, L_min/2]")));
            }
        }
        if self.initial.band == 0 {
            return Err(CliError::config("band", "must be >= 1"));
        }
        if self.initial.shape == Shape::Checkpoint && self.initial.checkpoint.is_none() {
            return Err(CliError::config("checkpoint", "required when initial = checkpoint"));
        }
        if self.subsample == 0 {
            return Err(CliError::config("subsample", "must be >= 1"));
        }
        if self.hs_orders.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(CliError::config("hs", "orders must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn grid(&self) -> CliResult<Grid<f64>> {
        Ok(Grid::new(&self.points, &self.lengths)?)
    }

    fn min_length(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Width actually used for the initial shape.
    pub fn resolved_width(&self) -> f64 {
        self.initial.width.unwrap_or_else(|| {
            let l = self.min_length();
            match self.initial.shape {
                Shape::MultiBump => l / 32.0,
                Shape::NegativeBump => 0.24 * l,
                _ => l / 16.0,
            }
        })
    }

    /// Builds `theta_0` on the manifest grid.
    pub fn initial_field(&self) -> CliResult<PhysicalField<f64>> {
        let grid = self.grid()?;
        let spec = &self.initial;
        let width = self.resolved_width();
        let field = match spec.shape {
            Shape::GaussianBump => centered_bump(&grid, spec.amplitude, width)?,
            Shape::MultiBump => multi_bump(&grid, spec.amplitude, width)?,
            Shape::NegativeBump => negative_bump(&grid, spec.amplitude, width)?,
            Shape::RandomSmooth => random_smooth(&grid, spec.seed, spec.band)?.map(|v| spec.amplitude * v),
            Shape::Constant => PhysicalField::constant(&grid, spec.amplitude),
            Shape::Checkpoint => {
                let path = spec.checkpoint.as_deref().unwrap_or(Path::new(""));
                let ck = checkpoint::read_file(path)?;
                if ck.points != self.points || ck.lengths != self.lengths {
                    return Err(CliError::config("checkpoint", "checkpoint grid differs from N, M, L"));
                }
                ck.field()?
            }
        };
        Ok(field)
    }

    /// Canonical manifest text; parsing it back reproduces `self`.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(",");
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "N = {}", self.dim());
        let _ = writeln!(
            s,
            "M = {}",
            self.points.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "L = {}", list(&self.lengths));
        let _ = writeln!(s, "alpha = {}", fmt17(c.alpha));
        let _ = writeln!(s, "nu = {}", fmt17(c.nu));
        let _ = writeln!(s, "eps = {}", fmt17(c.eps));
        let _ = writeln!(s, "t_end = {}", fmt17(c.t_end));
        let _ = writeln!(s, "scheme = {}", c.scheme);
        let _ = writeln!(s, "dt_max = {}", fmt17(c.dt_max));
        let _ = writeln!(s, "cfl = {}", fmt17(c.cfl));
        let _ = writeln!(s, "dealias = {}", fmt17(c.dealias_fraction));
        let _ = writeln!(s, "record_every = {}", c.record_every);
        let _ = writeln!(s, "clip_negative = {}", c.clip_negative);
        let _ = writeln!(s, "nonlinear = {}", c.nonlinear);
        let _ = writeln!(s, "tail_fraction = {}", fmt17(c.blowup.tail_fraction));
        let _ = writeln!(s, "gradient_factor = {}", fmt17(c.blowup.gradient_factor));
        let _ = writeln!(s, "initial = {}", self.initial.shape.name());
        let _ = writeln!(s, "amplitude = {}", fmt17(self.initial.amplitude));
        let _ = writeln!(s, "width = {}", fmt17(self.resolved_width()));
        let _ = writeln!(s, "band = {}", self.initial.band);
        let _ = writeln!(s, "seed = {}", self.initial.seed);
        if let Some(p) = &self.initial.checkpoint {
            let _ = writeln!(s, "checkpoint = {}", p.display());
        }
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "checkpoint_every = {}", self.checkpoint_every);
        let _ = writeln!(s, "hs = {}", list(&self.hs_orders));
        let _ = writeln!(s, "spectrum = {}", self.spectrum);
        let _ = writeln!(s, "subsample = {}", self.subsample);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "N=2\nM=128\nL=25.6\nalpha=1.5\nnu=0.05\nt_end=10\n";

    #[test]
    fn minimal_file_uses_defaults() {
        let m = parse_config_str(MINIMAL, &Overrides::default()).unwrap();
        assert_eq!(m.points, vec![128, 128]);
        assert_eq!(m.lengths, vec![25.6, 25.6]);
        assert_eq!(m.config.alpha, 1.5);
        assert_eq!(m.config.scheme, Scheme::IfEuler);
        assert_eq!(m.initial.shape, Shape::GaussianBump);
        assert_eq!(m.hs_orders, vec![0.5, 1.0]);
    }

    #[test]
    fn range_and_key_errors_name_the_key() {
        let bad = MINIMAL.replace("alpha=1.5", "alpha=2.5");
        match parse_config_str(&bad, &Overrides::default()) {
            Err(CliError::Config { key, .. }) => assert_eq!(key, "alpha"),
            other => panic!("{other:?}"),
        }
        let missing = MINIMAL.replace("nu=0.05\n", "");
        assert!(matches!(
            parse_config_str(&missing, &Overrides::default()),
            Err(CliError::Config { key, .. }) if key == "nu"
        ));
        let unknown = format!("{MINIMAL}viscosity = 2\n");
        assert!(matches!(
            parse_config_str(&unknown, &Overrides::default()),
            Err(CliError::Config { key, .. }) if key == "viscosity"
        ));
        let repeated = format!("{MINIMAL}nu = 0.1\n");
        assert!(parse_config_str(&repeated, &Overrides::default()).is_err());
    }

    #[test]
    fn flags_beat_file_values() {
        let o = Overrides {
            nu: Some(0.1),
            scheme: Some(Scheme::Etdrk2),
            ..Default::default()
        };
        let m = parse_config_str(MINIMAL, &o).unwrap();
        assert_eq!(m.config.nu, 0.1);
        assert_eq!(m.config.scheme, Scheme::Etdrk2);
    }

    #[test]
    fn per_axis_lists() {
        let text = "N=2\nM=32,16\nL=6,4 # box\nalpha=1\nnu=0.1\nt_end=1\n";
        let m = parse_config_str(text, &Overrides::default()).unwrap();
        assert_eq!(m.points, vec![32, 16]);
        assert_eq!(m.lengths, vec![6.0, 4.0]);
        let wrong = text.replace("M=32,16", "M=32,16,8");
        assert!(parse_config_str(&wrong, &Overrides::default()).is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = format!("{MINIMAL}initial = random-smooth\nseed = 42\nscheme = etdrk2\nhs = 0.25,2\n");
        let m = parse_config_str(&text, &Overrides::default()).unwrap();
        let again = parse_config_str(&m.to_text(), &Overrides::default()).unwrap();
        assert_eq!(again.initial.width, Some(m.resolved_width()));
        let mut expected = m.clone();
        expected.initial.width = Some(m.resolved_width());
        assert_eq!(again, expected);
    }
}
