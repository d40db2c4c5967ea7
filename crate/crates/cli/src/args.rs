//! Command-line surface: subcommands, flags and list/grid value syntax.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use gkp_link::cavity::FormulaVariant;
use gkp_link::csum::Gate;
use gkp_link::{AmpMode, Combine, Lattice};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "gkp-link",
    version,
    about = "Rates, gate fidelities and Monte Carlo checks for GKP-qudit entanglement links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Link rate versus half-channel loss for each N, lattice, amplification and squeezing.
    #[command(args_override_self = true)]
    RateCurve(RateCurveArgs),
    /// Optimal low-loss ansatz and the asymptotic gap to the repeaterless bound.
    #[command(args_override_self = true)]
    Asymptote(AsymptoteArgs),
    /// Memory-to-GKP gate fidelity over cavity parameters.
    #[command(args_override_self = true)]
    CsumFidelity(CsumArgs),
    /// Monte Carlo swap statistics against the analytic shift model.
    #[command(args_override_self = true)]
    SwapMc(SwapMcArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::RateCurve(a) => &a.common,
            Command::Asymptote(a) => &a.common,
            Command::CsumFidelity(a) => &a.common,
            Command::SwapMc(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML file of flag values; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RateCurveArgs {
    /// Lattices: sq, hex or all.
    #[arg(long, default_value = "all")]
    pub lattice: List<Lattice>,
    /// Amplification: pre, cc or all.
    #[arg(long, default_value = "all")]
    pub amp: List<AmpMode>,
    #[arg(long, default_value = "sum")]
    pub combine: Combine,
    /// Memory qubits per register, e.g. `1-10` or `1,2,4`.
    #[arg(long, default_value = "1-10")]
    pub n: List<u32>,
    /// Half-channel loss in dB as `start:stop:step` or a list.
    #[arg(long, default_value = "0:3:0.01")]
    pub loss_db: Grid,
    /// Peak squeezing in dB; `inf` for ideal states.
    #[arg(long, default_value = "inf,10,5")]
    pub squeeze_db: List<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoteArgs {
    #[arg(long, default_value = "all")]
    pub lattice: List<Lattice>,
    #[arg(long, default_value = "pre")]
    pub amp: List<AmpMode>,
    /// Smallest ε = 1 − √η of the emitted curve.
    #[arg(long, default_value_t = 1e-6)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_max: f64,
    /// Log-spaced ε samples.
    #[arg(long, default_value_t = 31)]
    pub points: usize,
    /// Also evaluate the full rate at the nearest power-of-two dimension.
    #[arg(long)]
    pub full_rate: bool,
    /// Arm combination for the full rate.
    #[arg(long, default_value = "single")]
    pub combine: Combine,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CsumArgs {
    #[arg(long, default_value = "sq")]
    pub lattice: List<Lattice>,
    #[arg(long, default_value = "csum")]
    pub gate: Gate,
    #[arg(long, default_value = "1")]
    pub n: List<u32>,
    /// Cooperativity values; `inf` allowed.
    #[arg(long, default_value = "1,10,100,1000,inf")]
    pub cooperativity: List<f64>,
    /// Cavity efficiency κ_c/κ.
    #[arg(long, default_value = "0.9,0.95,0.99")]
    pub zeta: List<f64>,
    /// Cavity linewidth κ (rad/s).
    #[arg(long, default_value_t = 1e8)]
    pub kappa: f64,
    /// Atomic decay γ_m (rad/s).
    #[arg(long, default_value_t = 1e7)]
    pub gamma: f64,
    /// Carrier detuning from the cavity (rad/s).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_c: f64,
    /// Carrier detuning from the atom (rad/s).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_a: f64,
    /// Pulse duration τ (s).
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    /// `gaussian`, `flat-top` or a path to an `ω re,im` table.
    #[arg(long, default_value = "gaussian")]
    pub pulse: String,
    /// Frequency samples for built-in pulse shapes.
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    /// Reflectivity of the injection beamsplitters.
    #[arg(long, default_value_t = 0.9)]
    pub bs_zeta: f64,
    /// Add N(1 − bs_zeta) of displacement noise for beamsplitter transmission.
    #[arg(long)]
    pub bs_noise: bool,
    /// Peak squeezing of the GKP state (dB) used in the fidelity.
    #[arg(long, default_value_t = 10.0)]
    pub squeeze_db: f64,
    /// Reflection coefficient form: real or imaginary numerator.
    #[arg(long, default_value = "real")]
    pub variant: Variant,
    /// Safety factor for the pulse-length condition.
    #[arg(long, default_value_t = 10.0)]
    pub margin: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SwapMcArgs {
    #[arg(long, default_value = "sq")]
    pub lattice: List<Lattice>,
    #[arg(long, default_value = "2")]
    pub n: List<u32>,
    #[arg(long, default_value = "sum")]
    pub combine: Combine,
    /// Per-arm shift variances; overrides the squeezing/loss derivation.
    #[arg(long)]
    pub sigma2: Option<List<f64>>,
    #[arg(long, default_value = "10")]
    pub squeeze_db: List<f64>,
    #[arg(long, default_value = "0")]
    pub loss_db: Grid,
    #[arg(long, default_value = "pre")]
    pub amp: List<AmpMode>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write every raw outcome to this CSV file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant(pub FormulaVariant);

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(Variant(FormulaVariant::RealNumerator)),
            "imaginary" | "literal" => Ok(Variant(FormulaVariant::ImaginaryNumerator)),
            other => Err(format!(
                "unknown variant `{other}` (expected real or imaginary)"
            )),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            FormulaVariant::RealNumerator => "real",
            FormulaVariant::ImaginaryNumerator => "imaginary",
        })
    }
}

/// One comma-separated item, which may expand to several values.
pub trait ListItem: Sized {
    fn parse_item(s: &str) -> Result<Vec<Self>, String>;
}

impl ListItem for u32 {
    /// `a`, `a-b` or `a..b` (inclusive).
    fn parse_item(s: &str) -> Result<Vec<Self>, String> {
        let bad = |_| format!("`{s}` is not an integer or range");
        let range = s.split_once("..").or_else(|| s.split_once('-'));
        match range {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (
                    a.trim().parse().map_err(bad)?,
                    b.trim().parse().map_err(bad)?,
                );
                if a > b {
                    return Err(format!("empty range `{s}`"));
                }
                Ok((a..=b).collect())
            }
            None => Ok(vec![s.parse().map_err(bad)?]),
        }
    }
}

impl ListItem for f64 {
    fn parse_item(s: &str) -> Result<Vec<Self>, String> {
        let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if x.is_nan() {
            return Err("NaN is not allowed".into());
        }
        Ok(vec![x])
    }
}

impl ListItem for Lattice {
    fn parse_item(s: &str) -> Result<Vec<Self>, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Lattice::ALL.to_vec());
        }
        s.parse()
            .map(|l| vec![l])
            .map_err(|e: gkp_link::Error| e.to_string())
    }
}

impl ListItem for AmpMode {
    fn parse_item(s: &str) -> Result<Vec<Self>, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(AmpMode::ALL.to_vec());
        }
        s.parse()
            .map(|a| vec![a])
            .map_err(|e: gkp_link::Error| e.to_string())
    }
}

/// Comma-separated values, deduplicated in first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: ListItem + PartialEq> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out: Vec<T> = Vec::new();
        for item in s.split(',').map(str::trim) {
            if item.is_empty() {
                return Err(format!("empty item in list `{s}`"));
            }
            for v in T::parse_item(item)? {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        Ok(List(out))
    }
}

/// Real grid from `start:stop:step` (inclusive of `stop` within rounding) or a
/// comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() == 1 {
            return List::<f64>::from_str(s).map(|l| Grid(l.0));
        }
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got `{s}`"));
        }
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        };
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(start.is_finite() && stop.is_finite() && step.is_finite())
            || step <= 0.0
            || stop < start
        {
            return Err(format!(
                "invalid grid `{s}`: need finite start ≤ stop and step > 0"
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        if count > 10_000_000 {
            return Err(format!("grid `{s}` has too many points"));
        }
        // snap to 12 decimals so 0.1-style steps print cleanly
        let snap = |x: f64| (x * 1e12).round() / 1e12;
        Ok(Grid(
            (0..=count).map(|i| snap(start + i as f64 * step)).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lists() {
        assert_eq!("1-4".parse::<List<u32>>().unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!("1..3,7,2".parse::<List<u32>>().unwrap().0, vec![1, 2, 3, 7]);
        assert!("3-1".parse::<List<u32>>().is_err());
        assert!("x".parse::<List<u32>>().is_err());
        assert!("1,,2".parse::<List<u32>>().is_err());
    }

    #[test]
    fn float_lists_accept_inf() {
        let l: List<f64> = "inf,10,5".parse().unwrap();
        assert_eq!(l.0, vec![f64::INFINITY, 10.0, 5.0]);
        assert!("nan".parse::<List<f64>>().is_err());
    }

    #[test]
    fn grids() {
        let g: Grid = "0:3:0.01".parse().unwrap();
        assert_eq!(g.0.len(), 301);
        assert_eq!(g.0[30], 0.3);
        assert_eq!(*g.0.last().unwrap(), 3.0);
        assert_eq!("0.5".parse::<Grid>().unwrap().0, vec![0.5]);
        assert_eq!("0,1,2".parse::<Grid>().unwrap().0, vec![0.0, 1.0, 2.0]);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("1:0:0.1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn enum_lists() {
        assert_eq!(
            "all".parse::<List<Lattice>>().unwrap().0,
            Lattice::ALL.to_vec()
        );
        assert_eq!(
            "cc".parse::<List<AmpMode>>().unwrap().0,
            vec![AmpMode::CcAmplify]
        );
        assert!("tri".parse::<List<Lattice>>().is_err());
    }
}
