use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use mirrorvac::fluctuation::{DetectorModel, LaserModel, ModeMatching};
use mirrorvac::OpticalNetworkParams;

/// Physical parameters shared by `eval` and `scan`. Every flag may also be
/// given as `name = value` in the `--config` file; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct PhysicsArgs {
    /// Wavelength; all lengths are in the same unit [default: 1]
    #[arg(long)]
    pub wavelength: Option<f64>,
    /// Beam splitter intensity transmittance, R = 1 - T [default: 0.5]
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Mirror intensity reflectance, Tm = 1 - Rm (matching=fixed) [default: 1]
    #[arg(long = "Rm")]
    pub rm: Option<f64>,
    /// Mode match of the returning vacuum mode (matching=fixed) [default: 1]
    #[arg(long)]
    pub mu: Option<f64>,
    /// Where mu and Rm come from
    #[arg(long, value_enum)]
    pub matching: Option<Matching>,
    /// Local oscillator amplitude |alpha| [default: 1]
    #[arg(long, conflicts_with = "alpha2")]
    pub alpha: Option<f64>,
    /// Local oscillator |alpha|^2
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Gaussian linewidth of the local oscillator (inverse length) [default: 0]
    #[arg(long)]
    pub dk: Option<f64>,
    /// Detector absorption coefficient (inverse length) [default: 10 k0]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Detector active depth [default: 1 wavelength]
    #[arg(long = "D")]
    pub depth: Option<f64>,
    /// Laser waist radius at the detector [default: 100]
    #[arg(long)]
    pub w0: Option<f64>,
    /// Vacuum waist radius at the mirror [default: 100]
    #[arg(long)]
    pub wm: Option<f64>,
    /// Mirror to detector distance [default: 0]
    #[arg(long)]
    pub z1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Matching {
    /// mu and Rm given explicitly
    Fixed,
    /// shared waist w0 at the detector: mu from the round-trip closed form, Rm = 1
    #[value(alias = "detector_waist")]
    DetectorWaist,
    /// vacuum waist wm at the mirror: mu = 1, Rm from the closed form
    #[value(alias = "mirror_waist")]
    MirrorWaist,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// `key = value` pairs from a config file, with their line numbers.
#[derive(Debug, Default)]
pub struct ConfigFile {
    path: String,
    entries: HashMap<String, (usize, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "wavelength",
    "T",
    "Rm",
    "mu",
    "matching",
    "alpha",
    "alpha2",
    "dk",
    "kappa",
    "D",
    "w0",
    "wm",
    "z1",
];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let mut entries = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("{path}:{}: expected `key = value`", n + 1)))?;
            let key = k.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!("{path}:{}: unknown key `{key}`", n + 1)));
            }
            if entries.insert(key.clone(), (n + 1, v.trim().to_string())).is_some() {
                return Err(ConfigError(format!(
                    "{path}:{}: `{key}` is given more than once",
                    n + 1
                )));
            }
        }
        Ok(Self {
            path: path.to_string(),
            entries,
        })
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("{}:{line}: `{key}`: expected a number, got `{v}`", self.path))),
        }
    }

    fn matching(&self) -> Result<Option<Matching>, ConfigError> {
        match self.entries.get("matching") {
            None => Ok(None),
            Some((line, v)) => Matching::from_str(&v.replace('_', "-"), false)
                .map(Some)
                .map_err(|_| ConfigError(format!("{}:{line}: `matching`: unknown value `{v}`", self.path))),
        }
    }
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavelength: f64,
    pub transmittance: f64,
    pub mirror_reflectance: f64,
    pub mu: f64,
    pub matching: Matching,
    pub alpha: f64,
    pub linewidth: f64,
    pub kappa: f64,
    pub depth: f64,
    pub w0: f64,
    pub wm: f64,
    pub z1: f64,
}

fn check(field: &str, value: f64, ok: bool, rule: &str) -> Result<f64, ConfigError> {
    if value.is_finite() && ok {
        Ok(value)
    } else {
        Err(ConfigError(format!("invalid value for `{field}`: {rule}, got {value}")))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    check(field, v, v > 0.0, "must be > 0")
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    check(field, v, v >= 0.0, "must be >= 0")
}

fn unit(field: &str, v: f64) -> Result<f64, ConfigError> {
    check(field, v, (0.0..=1.0).contains(&v), "must lie in [0, 1]")
}

impl RunConfig {
    pub fn resolve(args: &PhysicsArgs, file: &ConfigFile) -> Result<Self, ConfigError> {
        let pick = |flag: Option<f64>, key: &str| -> Result<Option<f64>, ConfigError> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.number(key),
            }
        };
        let wavelength = positive("wavelength", pick(args.wavelength, "wavelength")?.unwrap_or(1.0))?;
        let k0 = 2.0 * PI / wavelength;

        let alpha = match (args.alpha, args.alpha2) {
            (Some(a), _) => non_negative("alpha", a)?,
            (None, Some(a2)) => non_negative("alpha2", a2)?.sqrt(),
            (None, None) => match (file.number("alpha")?, file.number("alpha2")?) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError("config file sets both `alpha` and `alpha2`".into()));
                }
                (Some(a), None) => non_negative("alpha", a)?,
                (None, Some(a2)) => non_negative("alpha2", a2)?.sqrt(),
                (None, None) => 1.0,
            },
        };

        Ok(Self {
            wavelength,
            transmittance: unit("T", pick(args.t, "T")?.unwrap_or(0.5))?,
            mirror_reflectance: unit("Rm", pick(args.rm, "Rm")?.unwrap_or(1.0))?,
            mu: unit("mu", pick(args.mu, "mu")?.unwrap_or(1.0))?,
            matching: match args.matching {
                Some(m) => m,
                None => file.matching()?.unwrap_or(Matching::Fixed),
            },
            alpha,
            linewidth: non_negative("dk", pick(args.dk, "dk")?.unwrap_or(0.0))?,
            kappa: positive("kappa", pick(args.kappa, "kappa")?.unwrap_or(10.0 * k0))?,
            depth: non_negative("D", pick(args.depth, "D")?.unwrap_or(wavelength))?,
            w0: positive("w0", pick(args.w0, "w0")?.unwrap_or(100.0))?,
            wm: positive("wm", pick(args.wm, "wm")?.unwrap_or(100.0))?,
            z1: non_negative("z1", pick(args.z1, "z1")?.unwrap_or(0.0))?,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn laser(&self) -> LaserModel {
        LaserModel {
            amplitude: self.alpha,
            phase: 0.0,
            wavenumber: self.wavenumber(),
            linewidth: self.linewidth,
        }
    }

    pub fn detector(&self) -> DetectorModel {
        DetectorModel {
            absorption: self.kappa,
            depth: self.depth,
        }
    }

    pub fn mode_matching(&self) -> ModeMatching {
        match self.matching {
            Matching::Fixed => ModeMatching::Fixed,
            Matching::DetectorWaist => ModeMatching::DetectorWaist { w0: self.w0 },
            Matching::MirrorWaist => ModeMatching::MirrorWaist {
                w0: self.w0,
                wm: self.wm,
            },
        }
    }

    /// Network parameters at this config's `z1`, with the matching rule applied.
    pub fn network(&self) -> OpticalNetworkParams {
        self.network_at(self.z1)
    }

    pub fn network_at(&self, z1: f64) -> OpticalNetworkParams {
        let mut p = self.template();
        p.mirror_distance = z1;
        self.mode_matching().apply(&p, z1, self.wavelength)
    }

    pub fn template(&self) -> OpticalNetworkParams {
        let mut p = OpticalNetworkParams::lossless(self.transmittance, self.mirror_reflectance, self.mu, self.z1);
        p.wavenumber = self.wavenumber();
        p.amplitude = self.alpha;
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(&PhysicsArgs::default(), &ConfigFile::default()).unwrap();
        assert_eq!(c.wavelength, 1.0);
        assert_eq!(c.transmittance, 0.5);
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c.depth, 1.0);
        assert!((c.kappa - 20.0 * PI).abs() < 1e-12);
        assert_eq!(c.matching, Matching::Fixed);
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse("T = 0.2\nz1 = 3 # comment\nalpha2 = 4\n", "cfg").unwrap();
        let args = PhysicsArgs {
            t: Some(0.7),
            ..Default::default()
        };
        let c = RunConfig::resolve(&args, &file).unwrap();
        assert_eq!(c.transmittance, 0.7);
        assert_eq!(c.z1, 3.0);
        assert_eq!(c.alpha, 2.0);
    }

    #[test]
    fn errors_name_the_field() {
        let args = PhysicsArgs {
            t: Some(1.5),
            ..Default::default()
        };
        let e = RunConfig::resolve(&args, &ConfigFile::default()).unwrap_err();
        assert!(e.0.contains("`T`"), "{e}");

        let file = ConfigFile::parse("\nkappa = fast\n", "cfg").unwrap();
        let e = RunConfig::resolve(&PhysicsArgs::default(), &file).unwrap_err();
        assert_eq!(e.0, "cfg:2: `kappa`: expected a number, got `fast`");

        assert!(ConfigFile::parse("colour = red\n", "cfg")
            .unwrap_err()
            .0
            .contains("unknown key"));
        let file = ConfigFile::parse("matching = sideways\n", "cfg").unwrap();
        assert!(RunConfig::resolve(&PhysicsArgs::default(), &file).is_err());
    }
}
