//! Run configuration: command-line flags layered over an optional TOML file
//! layered over builtin defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use qldpc::bp::DEFAULT_SATURATION;
use qldpc::codes::{default_eta, resolve};
use qldpc::decoders::{OsdParams, RelayParams, RestartBeliefParams};
use qldpc::sim::{MonteCarloConfig, PriorMode, Sectors};
use qldpc::{BpConfig, CssCode, DecoderSpec};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderName {
    Bp,
    BpOsd,
    Bpgd,
    Relay,
    Rb,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorArg {
    #[default]
    Marginal,
    RawP,
}

impl From<PriorArg> for PriorMode {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Marginal => PriorMode::Marginal,
            PriorArg::RawP => PriorMode::RawP,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorsArg {
    #[default]
    Both,
    ZOnly,
}

impl From<SectorsArg> for Sectors {
    fn from(s: SectorsArg) -> Self {
        match s {
            SectorsArg::Both => Sectors::Both,
            SectorsArg::ZOnly => Sectors::ZOnly,
        }
    }
}

/// Decoder choice and parameter overrides. Unset fields take the defaults of
/// the chosen decoder.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderOptions {
    #[arg(long, value_enum)]
    #[serde(rename = "name")]
    pub decoder: Option<DecoderName>,
    /// BP iterations for bp, bp-osd and bpgd.
    #[arg(long)]
    pub iters: Option<usize>,
    /// LLR clip magnitude.
    #[arg(long)]
    pub saturation: Option<f64>,
    #[arg(long)]
    pub t_root: Option<usize>,
    #[arg(long)]
    pub t_branch: Option<usize>,
    /// Restart Belief branches; defaults to the tuned value of a benchmark
    /// code, otherwise the code length.
    #[arg(long)]
    pub eta: Option<usize>,
    #[arg(long)]
    pub osd_order: Option<u8>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub t1: Option<usize>,
    #[arg(long)]
    pub t2: Option<usize>,
    #[arg(long)]
    pub legs: Option<usize>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_c: Option<f64>,
    #[arg(long)]
    pub gamma_w: Option<f64>,
}

macro_rules! layer {
    ($top:expr, $bottom:expr; $($field:ident),+) => {
        Self { $($field: $top.$field.or($bottom.$field)),+ }
    };
}

impl DecoderOptions {
    /// Fields set in `self` win over those in `fallback`.
    pub fn or(self, fallback: Self) -> Self {
        layer!(self, fallback; decoder, iters, saturation, t_root, t_branch, eta, osd_order, lambda,
            t1, t2, legs, candidates, gamma_c, gamma_w)
    }

    /// Fills every unset parameter. `code` supplies the default branch count.
    pub fn resolve(&self, code: &CssCode) -> Result<DecoderSettings, CliError> {
        let name = self
            .decoder
            .ok_or_else(|| CliError::Usage("no decoder given (use --decoder)".into()))?;
        let relay = RelayParams::default();
        let rb = RestartBeliefParams::default();
        let osd = OsdParams::default();
        Ok(DecoderSettings {
            name,
            iters: self.iters.unwrap_or(BpConfig::default().max_iters),
            saturation: self.saturation.unwrap_or(DEFAULT_SATURATION),
            t_root: self.t_root.unwrap_or(rb.t_root),
            t_branch: self.t_branch.unwrap_or(rb.t_branch),
            eta: self.eta.unwrap_or_else(|| default_eta(&code.name).unwrap_or(code.n)),
            osd_order: self.osd_order.unwrap_or(osd.order),
            lambda: self.lambda.unwrap_or(osd.lambda),
            t1: self.t1.unwrap_or(relay.t1),
            t2: self.t2.unwrap_or(relay.t2),
            legs: self.legs.unwrap_or(relay.legs),
            candidates: self.candidates.unwrap_or(relay.candidates),
            gamma_c: self.gamma_c.unwrap_or(relay.gamma_c),
            gamma_w: self.gamma_w.unwrap_or(relay.gamma_w),
        })
    }
}

/// Fully resolved decoder parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderSettings {
    pub name: DecoderName,
    pub iters: usize,
    pub saturation: f64,
    pub t_root: usize,
    pub t_branch: usize,
    pub eta: usize,
    pub osd_order: u8,
    pub lambda: usize,
    pub t1: usize,
    pub t2: usize,
    pub legs: usize,
    pub candidates: usize,
    pub gamma_c: f64,
    pub gamma_w: f64,
}

impl DecoderSettings {
    pub fn to_spec(&self) -> DecoderSpec {
        let bp = BpConfig {
            max_iters: self.iters,
            saturation: self.saturation,
            ..BpConfig::default()
        };
        match self.name {
            DecoderName::Bp => DecoderSpec::Bp(bp),
            DecoderName::BpOsd => DecoderSpec::BpOsd {
                bp,
                osd: OsdParams {
                    order: self.osd_order,
                    lambda: self.lambda,
                },
            },
            DecoderName::Bpgd => DecoderSpec::Bpgd(bp),
            DecoderName::Relay => DecoderSpec::Relay(RelayParams {
                legs: self.legs,
                t1: self.t1,
                t2: self.t2,
                candidates: self.candidates,
                gamma_c: self.gamma_c,
                gamma_w: self.gamma_w,
                saturation: self.saturation,
                ..RelayParams::default()
            }),
            DecoderName::Rb => DecoderSpec::RestartBelief(RestartBeliefParams {
                t_root: self.t_root,
                t_branch: self.t_branch,
                eta: self.eta,
                saturation: self.saturation,
                ..RestartBeliefParams::default()
            }),
        }
    }

    fn into_options(self) -> DecoderOptions {
        DecoderOptions {
            decoder: Some(self.name),
            iters: Some(self.iters),
            saturation: Some(self.saturation),
            t_root: Some(self.t_root),
            t_branch: Some(self.t_branch),
            eta: Some(self.eta),
            osd_order: Some(self.osd_order),
            lambda: Some(self.lambda),
            t1: Some(self.t1),
            t2: Some(self.t2),
            legs: Some(self.legs),
            candidates: Some(self.candidates),
            gamma_c: Some(self.gamma_c),
            gamma_w: Some(self.gamma_w),
        }
    }
}

/// Sweep options as given on the command line or in a config file.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    /// Builtin code name or path to a code manifest.
    #[arg(long)]
    pub code: Option<String>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<f64>>,
    /// Stop each point after this many failures.
    #[arg(long)]
    pub failures: Option<u64>,
    #[arg(long)]
    pub max_trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub prior: Option<PriorArg>,
    #[arg(long, value_enum)]
    pub sectors: Option<SectorsArg>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default, rename = "decoder")]
    pub decoder: DecoderOptions,
}

pub const DEFAULT_P: f64 = 0.01;
pub const DEFAULT_FAILURES: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;

impl SimOptions {
    pub fn or(self, fallback: Self) -> Self {
        Self {
            code: self.code.or(fallback.code),
            p: self.p.or(fallback.p),
            failures: self.failures.or(fallback.failures),
            max_trials: self.max_trials.or(fallback.max_trials),
            seed: self.seed.or(fallback.seed),
            workers: self.workers.or(fallback.workers),
            prior: self.prior.or(fallback.prior),
            sectors: self.sectors.or(fallback.sectors),
            output: self.output.or(fallback.output),
            decoder: self.decoder.or(fallback.decoder),
        }
    }

    pub fn from_toml(origin: &Path, text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(path, &text)
    }

    /// Applies builtin defaults and loads the code.
    pub fn resolve(&self, data_dir: Option<&Path>) -> Result<(RunConfig, CssCode), CliError> {
        let spec = self
            .code
            .clone()
            .ok_or_else(|| CliError::Usage("no code given (use --code)".into()))?;
        let code = resolve(&spec, data_dir)?;
        let decoder = self.decoder.resolve(&code)?;
        let config = RunConfig {
            code: spec,
            p: self.p.clone().unwrap_or_else(|| vec![DEFAULT_P]),
            failures: self.failures.unwrap_or(DEFAULT_FAILURES),
            max_trials: self.max_trials.unwrap_or(DEFAULT_MAX_TRIALS),
            seed: self.seed.unwrap_or(0),
            workers: self.workers.unwrap_or(1),
            prior: self.prior.unwrap_or_default(),
            sectors: self.sectors.unwrap_or_default(),
            output: self.output.clone(),
            decoder,
        };
        Ok((config, code))
    }
}

/// A sweep with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub code: String,
    pub p: Vec<f64>,
    pub failures: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub prior: PriorArg,
    pub sectors: SectorsArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub decoder: DecoderSettings,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn into_options(self) -> SimOptions {
        SimOptions {
            code: Some(self.code),
            p: Some(self.p),
            failures: Some(self.failures),
            max_trials: Some(self.max_trials),
            seed: Some(self.seed),
            workers: Some(self.workers),
            prior: Some(self.prior),
            sectors: Some(self.sectors),
            output: self.output,
            decoder: self.decoder.into_options(),
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            failure_target: self.failures,
            max_trials: self.max_trials,
            seed: self.seed,
            workers: self.workers,
            prior: self.prior.into(),
            sectors: self.sectors.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_form_round_trips() {
        let opts = SimOptions {
            code: Some("surface-d3".into()),
            p: Some(vec![0.01, 0.02]),
            decoder: DecoderOptions {
                decoder: Some(DecoderName::Relay),
                gamma_c: Some(-0.3),
                ..Default::default()
            },
            ..Default::default()
        };
        let (config, _) = opts.resolve(None).unwrap();
        let text = config.to_toml();
        let reparsed = SimOptions::from_toml(Path::new("<mem>"), &text).unwrap();
        assert_eq!(reparsed.resolve(None).unwrap().0, config);
        assert_eq!(config.clone().into_options().resolve(None).unwrap().0, config);
    }

    #[test]
    fn eta_defaults_per_code() {
        let opts = |code: &str| SimOptions {
            code: Some(code.into()),
            decoder: DecoderOptions {
                decoder: Some(DecoderName::Rb),
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(opts("gb-48").resolve(None).unwrap().0.decoder.eta, 48);
        assert_eq!(opts("gross").resolve(None).unwrap().0.decoder.eta, 35);
        assert_eq!(opts("surface-d7").resolve(None).unwrap().0.decoder.eta, 8);
        assert_eq!(opts("hgp-145").resolve(None).unwrap().0.decoder.eta, 6);
        assert_eq!(opts("surface-d5").resolve(None).unwrap().0.decoder.eta, 41);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let err = SimOptions::from_toml(Path::new("x.toml"), "code = \"gb-48\"\nfailure = 3\n").unwrap_err();
        assert!(err.to_string().contains("failure"), "{err}");
    }
}
