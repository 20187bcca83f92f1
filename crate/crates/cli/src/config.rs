//! Flags, config files and validation.
//!
//! A config file is flat `key = value` text whose keys are flag names without
//! the leading dashes (`p-min` and `p_min` both work). Its entries are spliced
//! in ahead of the command-line flags, and since every flag overrides earlier
//! occurrences of itself, explicit flags win.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Relativistic time-of-arrival amplitude at x2.
    Toa,
    /// Time-of-arrival amplitude with E = p²/2m.
    ToaNonrel,
    /// Smeared-delta orthogonality sweep.
    Ortho,
    /// Even-kernel two-route comparison on the full momentum line.
    AppendixDemo,
    /// Ordinary time evolution of the packet built from the momentum state.
    TepEvolve,
    /// Arrival density versus probability current at x2.
    Crosscheck,
    /// WKB tunneling probabilities over an energy sweep.
    Tunnel,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Toa => "toa",
            Command::ToaNonrel => "toa-nonrel",
            Command::Ortho => "ortho",
            Command::AppendixDemo => "appendix-demo",
            Command::TepEvolve => "tep-evolve",
            Command::Crosscheck => "crosscheck",
            Command::Tunnel => "tunnel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Rel,
    Nonrel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Pos,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Gaussian,
    Eigenstate,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    TimeBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckSel {
    Time,
    Position,
    EvenKernel,
    TimeUnrestricted,
    PositionUnrestricted,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Packet {
    /// Equal-weight Gaussians at ±p0.
    Mixed,
    /// A single Gaussian at +p0.
    Positive,
}

/// Raw command line; every setting is optional so file values can fill gaps.
#[derive(Debug, Parser)]
#[command(
    name = "toa",
    version,
    about = "Time-of-arrival, orthogonality and tunneling scenarios",
    args_override_self = true,
    allow_negative_numbers = true
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// key=value file with defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Momentum half-line: pos = [0, ∞), neg = (−∞, 0].
    #[arg(long, value_enum)]
    pub branch: Option<Sign>,
    #[arg(long, value_enum)]
    pub energy_sign: Option<Sign>,

    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub np: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub x1: Option<f64>,
    #[arg(long)]
    pub x2: Option<f64>,

    #[arg(long, value_enum)]
    pub state: Option<StateKind>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub sigma_p: Option<f64>,
    /// Three columns `p re im` for `--state file`.
    #[arg(long)]
    pub state_path: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub route: Option<Route>,

    #[arg(long, value_enum)]
    pub check: Option<CheckSel>,
    /// Width of the Gaussian test function.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    /// Comma-separated ascending cutoffs.
    #[arg(long)]
    pub cutoffs: Option<String>,
    /// Spectral nodes per half-line.
    #[arg(long)]
    pub resolution: Option<usize>,

    #[arg(long, value_enum)]
    pub packet: Option<Packet>,

    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    /// Final time for tep-evolve; defaults to t-max.
    #[arg(long)]
    pub t2: Option<f64>,

    /// rect:V0=..,left=..,width=.. | parab:V0=..,k=..,center=.. | file:PATH
    #[arg(long)]
    pub potential: Option<String>,
    /// Comma-separated energies.
    #[arg(long)]
    pub energies: Option<String>,
    #[arg(long)]
    pub e_min: Option<f64>,
    #[arg(long)]
    pub e_max: Option<f64>,
    #[arg(long)]
    pub ne: Option<usize>,
    /// Root-search bracket `lo,hi`.
    #[arg(long)]
    pub bracket: Option<String>,
}

/// Parses `args` (program name first), folding in `--config` if given.
pub fn parse_args<I, S>(args: I) -> Result<Cli, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(clap_error)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let from_file = config_tokens(&text, &path)?;
    // program, command, file entries, then the user's flags
    let mut merged = Vec::with_capacity(args.len() + from_file.len());
    merged.extend(args.iter().take(2).cloned());
    merged.extend(from_file);
    merged.extend(args.iter().skip(2).cloned());
    Cli::try_parse_from(&merged).map_err(clap_error)
}

fn clap_error(e: clap::Error) -> CliError {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

/// Turns `key = value` lines into `--key value` tokens.
pub fn config_tokens(text: &str, path: &Path) -> Result<Vec<String>, CliError> {
    let mut tokens = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                n + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if key == "config" || key == "command" {
            return Err(CliError::Usage(format!(
                "{}:{}: `{key}` cannot be set from a config file",
                path.display(),
                n + 1
            )));
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.trim().to_string());
    }
    Ok(tokens)
}

/// Barrier family parsed from `--potential`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialArg {
    Rect { v0: f64, left: f64, width: f64 },
    Parab { v0: f64, k: f64, center: f64 },
    File { path: PathBuf },
}

impl fmt::Display for PotentialArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialArg::Rect { v0, left, width } => write!(f, "rect:V0={v0},left={left},width={width}"),
            PotentialArg::Parab { v0, k, center } => write!(f, "parab:V0={v0},k={k},center={center}"),
            PotentialArg::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

pub fn parse_potential(text: &str) -> Result<PotentialArg, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("potential `{text}` needs a kind prefix (rect:, parab:, file:)")))?;
    if kind == "file" {
        if rest.is_empty() {
            return Err(CliError::Usage("file: potential needs a path".into()));
        }
        return Ok(PotentialArg::File { path: PathBuf::from(rest) });
    }
    let mut fields = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("potential field `{part}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("potential field `{part}` is not a number")))?;
        fields.insert(k.trim().to_string(), v);
    }
    let mut take = |key: &str| {
        fields
            .remove(key)
            .ok_or_else(|| CliError::Usage(format!("potential `{text}` is missing `{key}`")))
    };
    let parsed = match kind {
        "rect" => PotentialArg::Rect { v0: take("V0")?, left: take("left")?, width: take("width")? },
        "parab" => PotentialArg::Parab { v0: take("V0")?, k: take("k")?, center: take("center")? },
        other => return Err(CliError::Usage(format!("unknown potential kind `{other}`"))),
    };
    if let Some(extra) = fields.keys().next() {
        return Err(CliError::Usage(format!("unknown potential field `{extra}`")));
    }
    Ok(parsed)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

/// Validated settings for one run; also the config echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub command: Command,
    pub physics: Physics,
    pub grids: Grids,
    pub state: StateSpec,
    pub output: OutputSpec,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Physics {
    pub mass: f64,
    pub regime: RegimeArg,
    pub branch: Sign,
    pub energy_sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grids {
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpec {
    pub kind: StateKind,
    pub p0: f64,
    pub sigma_p: f64,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub format: Format,
    pub path: Option<PathBuf>,
}

/// Settings that only some commands read.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "for", rename_all = "kebab-case")]
pub enum Extra {
    None,
    Toa { route: Route },
    Ortho { check: CheckSel, width: f64, center: f64, cutoffs: Vec<f64>, resolution: usize },
    Appendix { packet: Packet },
    Tep { x_min: f64, x_max: f64, nx: usize, t2: f64 },
    Tunnel { potential: PotentialArg, energies: Vec<f64>, bracket: Option<(f64, f64)> },
}

/// Fills defaults and checks every invariant, with messages naming the flag.
pub fn resolve(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let usage = |msg: String| Err(CliError::Usage(msg));
    let command = cli.command;
    let regime = match command {
        Command::ToaNonrel => {
            if cli.regime == Some(RegimeArg::Rel) {
                return usage("toa-nonrel is nonrelativistic; drop --regime rel".into());
            }
            RegimeArg::Nonrel
        }
        _ => cli.regime.unwrap_or(RegimeArg::Rel),
    };
    let physics = Physics {
        mass: cli.mass.unwrap_or(1.0),
        regime,
        branch: cli.branch.unwrap_or(Sign::Pos),
        energy_sign: cli.energy_sign.unwrap_or(Sign::Pos),
    };
    if !(physics.mass >= 0.0 && physics.mass.is_finite()) {
        return usage(format!("--mass must be ≥ 0, got {}", physics.mass));
    }
    if physics.regime == RegimeArg::Nonrel && physics.mass == 0.0 {
        return usage("--mass must be positive in the nonrelativistic regime".into());
    }

    let default_p = match physics.branch {
        Sign::Pos => (1e-3, 12.0),
        Sign::Neg => (-12.0, -1e-3),
    };
    let grids = Grids {
        p_min: cli.p_min.unwrap_or(default_p.0),
        p_max: cli.p_max.unwrap_or(default_p.1),
        np: cli.np.unwrap_or(4096),
        t_min: cli.t_min.unwrap_or(0.0),
        t_max: cli.t_max.unwrap_or(10.0),
        nt: cli.nt.unwrap_or(2000),
        x1: cli.x1.unwrap_or(0.0),
        x2: cli.x2.unwrap_or(20.0),
    };
    if grids.np < 2 {
        return usage(format!("--np must be ≥ 2, got {}", grids.np));
    }
    if grids.nt < 2 {
        return usage(format!("--nt must be ≥ 2, got {}", grids.nt));
    }
    if !(grids.p_max > grids.p_min) {
        return usage(format!("--p-max ({}) must exceed --p-min ({})", grids.p_max, grids.p_min));
    }
    if !(grids.t_max > grids.t_min) {
        return usage(format!("--t-max ({}) must exceed --t-min ({})", grids.t_max, grids.t_min));
    }
    let uses_half_line = !matches!(command, Command::Ortho | Command::AppendixDemo | Command::Tunnel);
    if uses_half_line {
        match physics.branch {
            Sign::Pos if grids.p_min < 0.0 => {
                return usage(format!(
                    "--branch pos needs a non-negative momentum grid, but --p-min is {}",
                    grids.p_min
                ))
            }
            Sign::Neg if grids.p_max > 0.0 => {
                return usage(format!(
                    "--branch neg needs a non-positive momentum grid, but --p-max is {}",
                    grids.p_max
                ))
            }
            _ => {}
        }
    }

    let state = StateSpec {
        kind: cli.state.unwrap_or(StateKind::Gaussian),
        p0: cli.p0.unwrap_or(match physics.branch {
            Sign::Pos => 5.0,
            Sign::Neg => -5.0,
        }),
        sigma_p: cli.sigma_p.unwrap_or(0.25),
        path: cli.state_path.clone(),
    };
    if state.kind == StateKind::Gaussian && !(state.sigma_p > 0.0) {
        return usage(format!("--sigma-p must be positive, got {}", state.sigma_p));
    }
    if state.kind == StateKind::File && state.path.is_none() {
        return usage("--state file needs --state-path".into());
    }

    let extra = match command {
        Command::Toa => Extra::Toa { route: cli.route.unwrap_or(Route::Direct) },
        Command::Ortho => {
            let cutoffs = match &cli.cutoffs {
                Some(s) => parse_list(s, "--cutoffs")?,
                None => vec![5.0, 10.0, 20.0, 40.0],
            };
            Extra::Ortho {
                check: cli.check.unwrap_or(CheckSel::All),
                width: cli.width.unwrap_or(1.0),
                center: cli.center.unwrap_or(0.0),
                cutoffs,
                resolution: cli.resolution.unwrap_or(2048),
            }
        }
        Command::AppendixDemo => Extra::Appendix { packet: cli.packet.unwrap_or(Packet::Mixed) },
        Command::TepEvolve => {
            let tep = Extra::Tep {
                x_min: cli.x_min.unwrap_or(grids.x1 - 50.0),
                x_max: cli.x_max.unwrap_or(grids.x1 + 150.0),
                nx: cli.nx.unwrap_or(4096),
                t2: cli.t2.unwrap_or(grids.t_max),
            };
            if let Extra::Tep { x_min, x_max, nx, .. } = tep {
                if nx < 5 || !(x_max > x_min) {
                    return usage(format!("need --nx ≥ 5 and --x-max > --x-min, got {nx} on [{x_min}, {x_max}]"));
                }
            }
            tep
        }
        Command::Tunnel => {
            let potential = match &cli.potential {
                Some(s) => parse_potential(s)?,
                None => return usage("tunnel needs --potential".into()),
            };
            let energies = match (&cli.energies, cli.e_min, cli.e_max, cli.ne) {
                (Some(list), None, None, None) => parse_list(list, "--energies")?,
                (None, Some(lo), Some(hi), Some(n)) if n >= 2 && hi > lo => {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
                (None, Some(lo), _, Some(1)) => vec![lo],
                _ => {
                    return usage(
                        "tunnel needs either --energies or all of --e-min, --e-max, --ne (ne ≥ 2, e-max > e-min)".into(),
                    )
                }
            };
            let bracket = match &cli.bracket {
                Some(s) => match parse_list(s, "--bracket")?.as_slice() {
                    [lo, hi] if hi > lo => Some((*lo, *hi)),
                    _ => return usage(format!("--bracket must be `lo,hi` with hi > lo, got `{s}`")),
                },
                None => None,
            };
            Extra::Tunnel { potential, energies, bracket }
        }
        Command::ToaNonrel | Command::Crosscheck => Extra::None,
    };

    Ok(ScenarioConfig {
        command,
        physics,
        grids,
        state,
        output: OutputSpec { format: cli.format.unwrap_or(Format::Csv), path: cli.output.clone() },
        extra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ScenarioConfig, CliError> {
        let mut v = vec!["toa"];
        v.extend_from_slice(args);
        resolve(&parse_args(v)?)
    }

    #[test]
    fn reference_scenario_is_valid() {
        let c = parse(&[
            "toa", "--mass", "1", "--p0", "5", "--sigma-p", "0.25", "--x1", "0", "--x2", "20",
            "--t-min", "0", "--t-max", "10", "--nt", "2000", "--p-min", "1e-3", "--p-max", "12",
            "--np", "4096",
        ])
        .unwrap();
        assert_eq!(c.grids.np, 4096);
        assert_eq!(c.grids.x2, 20.0);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(matches!(parse(&["toa", "--np", "1"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["toa", "--branch", "neg", "--p-min", "1", "--p-max", "5"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["toa", "--sigma-p", "0"]), Err(CliError::Usage(_))));
        assert!(matches!(parse(&["toa", "--bogus", "1"]), Err(CliError::Usage(_))));
        assert!(parse(&["toa", "--branch", "neg", "--p-min", "-12", "--p-max", "-0.001", "--x2", "-20"]).is_ok());
    }

    #[test]
    fn negative_values_parse() {
        let c = parse(&["crosscheck", "--x1", "-5", "--x2", "15"]).unwrap();
        assert_eq!(c.grids.x1, -5.0);
    }

    #[test]
    fn potentials() {
        assert_eq!(
            parse_potential("rect:V0=2,left=0,width=1").unwrap(),
            PotentialArg::Rect { v0: 2.0, left: 0.0, width: 1.0 }
        );
        assert_eq!(
            parse_potential("parab:V0=2,k=1,center=0").unwrap(),
            PotentialArg::Parab { v0: 2.0, k: 1.0, center: 0.0 }
        );
        assert!(parse_potential("rect:V0=2,left=0").is_err());
        assert!(parse_potential("tri:V0=2").is_err());
        assert!(parse_potential("rect:V0=2,left=0,width=1,depth=3").is_err());
    }

    #[test]
    fn file_tokens() {
        let t = config_tokens("# scenario\np_min = 0.5\nnp=128 # inline\n", Path::new("x")).unwrap();
        assert_eq!(t, ["--p-min", "0.5", "--np", "128"]);
        assert!(config_tokens("np 128", Path::new("x")).is_err());
    }
}
