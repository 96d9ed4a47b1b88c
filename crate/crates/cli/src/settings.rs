//! Configuration files and the merge of flags, environment and file values.

use crate::args::CommonArgs;
use crate::error::{invalid, CliResult};
use crate::grid::GridSpec;
use crate::output::Format;
use noisy_momentum::continuous::CtVariant;
use noisy_momentum::families::{Family, RateTarget};
use noisy_momentum::geometry::Method;
use noisy_momentum::quadratic::NoiseModel;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// A rate-optimal method or a parameterized family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Optimal(Method),
    Family(Family),
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Optimal(Method::Gd) => "gd",
            Algorithm::Optimal(Method::Hb) => "hb",
            Algorithm::Optimal(Method::Na) => "na",
            Algorithm::Family(f) => f.as_str(),
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gd" => Ok(Algorithm::Optimal(Method::Gd)),
            "hb" => Ok(Algorithm::Optimal(Method::Hb)),
            "na" => Ok(Algorithm::Optimal(Method::Na)),
            other => other
                .parse::<Family>()
                .map(Algorithm::Family)
                .map_err(|_| format!("unknown family `{other}` (expected gd, hb, na, hb-like, na-like, gd-reduced or hb-reduced)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    Discrete,
    Continuous,
    #[default]
    All,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Discrete => "discrete",
            Scope::Continuous => "continuous",
            Scope::All => "all",
        }
    }

    pub fn discrete(self) -> bool {
        self != Scope::Continuous
    }

    pub fn continuous(self) -> bool {
        self != Scope::Discrete
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discrete" => Ok(Scope::Discrete),
            "continuous" => Ok(Scope::Continuous),
            "all" => Ok(Scope::All),
            other => Err(format!("unknown scope `{other}` (expected discrete, continuous or all)")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub steps: Option<usize>,
    pub burn_in: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub kappa: Option<OneOrMany<f64>>,
    pub n: Option<OneOrMany<usize>>,
    pub m: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub noise_model: Option<NoiseModel>,
    pub sigma: Option<f64>,
    pub family: Option<String>,
    pub ts: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub ts_grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub scope: Option<String>,
    pub draws: Option<usize>,
    pub flow: Option<OneOrMany<String>>,
    pub eigenvalues: Option<Vec<f64>>,
    pub sim: Option<SimSection>,
    pub output: Option<OutputSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }
}

/// Merged settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub kappas: Vec<f64>,
    pub ns: Vec<usize>,
    pub m: Option<f64>,
    pub l: Option<f64>,
    /// `None` means "not specified"; sweeps and verification then cover both models.
    pub noise: Option<NoiseModel>,
    pub sigma: f64,
    pub algorithm: Option<Algorithm>,
    pub target: Option<RateTarget>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub file: ConfigFile,
}

fn parse_field<T: FromStr<Err = String>>(key: &str, value: Option<&String>) -> CliResult<Option<T>> {
    value.map(|s| s.parse::<T>().map_err(|e| invalid(format!("config key `{key}`: {e}")))).transpose()
}

impl Settings {
    pub fn resolve(args: &CommonArgs, command: &str) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Settings::merge(args, file, command)
    }

    pub fn merge(args: &CommonArgs, file: ConfigFile, command: &str) -> CliResult<Self> {
        if let Some(c) = &file.command {
            if c != command {
                return Err(invalid(format!("config is for `{c}`, not `{command}`")));
            }
        }
        if let Some(grid) = &file.ts_grid {
            grid.validate().map_err(|e| invalid(format!("config key `ts_grid`: {e}")))?;
        }
        let pick_vec = |flag: &Vec<f64>, cfg: &Option<OneOrMany<f64>>| {
            if flag.is_empty() { cfg.clone().map(OneOrMany::into_vec).unwrap_or_default() } else { flag.clone() }
        };
        let kappas = pick_vec(&args.kappa, &file.kappa);
        let ns = if args.n.is_empty() { file.n.clone().map(OneOrMany::into_vec).unwrap_or_default() } else { args.n.clone() };
        let algorithm = match args.family {
            Some(a) => Some(a),
            None => parse_field("family", file.family.as_ref())?,
        };
        let ts = args.ts.or(file.ts);
        let rho = args.rho.or(file.rho);
        let target = match (ts, rho) {
            (Some(_), Some(_)) => return Err(invalid("give either a settling time or a rate, not both")),
            (Some(ts), None) => Some(RateTarget::SettlingTime(ts)),
            (None, Some(rho)) => Some(RateTarget::Rate(rho)),
            (None, None) => None,
        };
        let sigma = args.sigma.or(file.sigma).unwrap_or(1.0);
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be finite and nonnegative, got {sigma}")));
        }
        let output = file.output.clone().unwrap_or_default();
        Ok(Settings {
            kappas,
            ns,
            m: args.m.or(file.m),
            l: args.l.or(file.l),
            noise: args.noise.or(file.noise_model),
            sigma,
            algorithm,
            target,
            alpha: args.alpha.or(file.alpha),
            beta: args.beta.or(file.beta),
            gamma: args.gamma.or(file.gamma),
            grid: args.grid.or(file.ts_grid),
            seed: args.seed.or(file.seed),
            out: args.out.clone().or(output.path),
            format: args.format.or(output.format).unwrap_or_default(),
            file,
        })
    }

    /// `(m, L)` for every requested condition number, or the explicit interval.
    pub fn intervals(&self) -> CliResult<Vec<(f64, f64)>> {
        let m = self.m.unwrap_or(1.0);
        if self.kappas.is_empty() {
            return match self.l {
                Some(l) => Ok(vec![(m, l)]),
                None => Err(invalid("give --kappa or --L")),
            };
        }
        self.kappas
            .iter()
            .map(|&kappa| {
                if !(kappa >= 1.0 && kappa.is_finite()) {
                    return Err(invalid(format!("kappa must be finite and at least 1, got {kappa}")));
                }
                let l = m * kappa;
                if let Some(given) = self.l {
                    if (given - l).abs() > 1e-12 * l {
                        return Err(invalid(format!("L = {given} disagrees with m * kappa = {l}")));
                    }
                }
                Ok((m, l))
            })
            .collect()
    }

    /// The single interval of commands that analyze one configuration.
    pub fn interval(&self) -> CliResult<(f64, f64)> {
        match self.intervals()?.as_slice() {
            [one] => Ok(*one),
            _ => Err(invalid("this command takes a single kappa")),
        }
    }

    pub fn dims(&self, default: &[usize]) -> CliResult<Vec<usize>> {
        let ns = if self.ns.is_empty() { default.to_vec() } else { self.ns.clone() };
        if ns.contains(&0) {
            return Err(invalid("dimension must be positive"));
        }
        Ok(ns)
    }

    pub fn dim(&self) -> CliResult<usize> {
        match self.dims(&[1])?.as_slice() {
            [one] => Ok(*one),
            _ => Err(invalid("this command takes a single n")),
        }
    }

    pub fn noise_models(&self) -> Vec<NoiseModel> {
        self.noise.map_or(NoiseModel::ALL.to_vec(), |m| vec![m])
    }

    pub fn scope(&self, flag: Option<Scope>) -> CliResult<Scope> {
        match flag {
            Some(s) => Ok(s),
            None => Ok(parse_field("scope", self.file.scope.as_ref())?.unwrap_or_default()),
        }
    }

    pub fn flows(&self, flag: &[CtVariant]) -> CliResult<Vec<CtVariant>> {
        if !flag.is_empty() {
            return Ok(flag.to_vec());
        }
        match &self.file.flow {
            Some(list) => list
                .clone()
                .into_vec()
                .iter()
                .map(|s| s.parse::<CtVariant>().map_err(|e| invalid(format!("config key `flow`: {e}"))))
                .collect(),
            None => Ok(CtVariant::ALL.to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = ConfigFile::parse("kappa = 4\nkapa = 5\n").unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
        let err = ConfigFile::parse("[ts_grid]\nmin = 1\nmax = 2\npoints = 3\nstep = 1\n").unwrap_err().to_string();
        assert!(err.contains("step"), "{err}");
        let err = ConfigFile::parse("[sim]\nsteps = 10\ntrails = 2\n").unwrap_err().to_string();
        assert!(err.contains("trails"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse(
            "command = \"sweep\"\nkappa = [4.0, 9.0]\nn = 3\nnoise_model = \"gradient\"\nfamily = \"hb-like\"\n\
             [ts_grid]\nmin = 2.0\nmax = 5.0\npoints = 4\nspacing = \"log\"\n[output]\nformat = \"jsonl\"\n",
        )
        .unwrap();
        let args = CommonArgs { kappa: vec![16.0], ..CommonArgs::default() };
        let s = Settings::merge(&args, file.clone(), "sweep").unwrap();
        assert_eq!(s.kappas, vec![16.0]);
        assert_eq!(s.ns, vec![3]);
        assert_eq!(s.noise, Some(NoiseModel::Gradient));
        assert_eq!(s.algorithm, Some(Algorithm::Family(Family::HbLike)));
        assert_eq!(s.format, Format::Jsonl);
        assert_eq!(s.grid.unwrap().points, 4);
        assert!(Settings::merge(&args, file, "rate").is_err());
    }

    #[test]
    fn intervals_from_kappa_or_bounds() {
        let args = CommonArgs { kappa: vec![4.0], m: Some(2.0), ..CommonArgs::default() };
        let s = Settings::merge(&args, ConfigFile::default(), "rate").unwrap();
        assert_eq!(s.interval().unwrap(), (2.0, 8.0));
        let args = CommonArgs { m: Some(1.0), l: Some(4.0), ..CommonArgs::default() };
        let s = Settings::merge(&args, ConfigFile::default(), "rate").unwrap();
        assert_eq!(s.interval().unwrap(), (1.0, 4.0));
        let s = Settings::merge(&CommonArgs::default(), ConfigFile::default(), "rate").unwrap();
        assert!(s.interval().is_err());
    }

    #[test]
    fn algorithm_names() {
        for name in ["gd", "hb", "na", "hb-like", "na-like", "gd-reduced", "hb-reduced"] {
            assert_eq!(name.parse::<Algorithm>().unwrap().as_str(), name);
        }
        assert!("hb_like".parse::<Algorithm>().is_err());
    }
}
