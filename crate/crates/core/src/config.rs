//! Command options with three layers of precedence: command-line flags, then
//! a JSON config file, then built-in defaults.
//!
//! [`Options`] is the partial form (every field optional) used for both flags
//! and files; [`Settings`] is the resolved form. Unknown keys in a config
//! file are rejected.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::encoders::{default_t_late, LatencyConfig, LifEncoderConfig, RateConfig, RateMode};
use crate::error::{Error, Result};
use crate::experiments::{Protocol, DEFAULT_RUNS, DEFAULT_SWEEP_REPS, DEFAULT_SWEEP_SIZES};
use crate::geometry::GeometryParams;
use crate::io;
use crate::sampler::{SplitParams, SplitSpec};
use crate::tinynet::{AdamConfig, TrainConfig};

macro_rules! options {
    ($( $(#[doc = $doc:literal])* $name:ident : $ty:ty = $default:expr ; )*) => {
        /// Partially specified options.
        #[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Options {
            $(
                $(#[doc = $doc])*
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $name: Option<$ty>,
            )*
        }

        /// Fully resolved options.
        #[derive(Clone, Debug, PartialEq, Serialize)]
        pub struct Settings {
            $( $(#[doc = $doc])* pub $name: $ty, )*
        }

        impl Default for Settings {
            fn default() -> Self {
                Self { $( $name: $default, )* }
            }
        }

        impl Settings {
            /// Each option comes from `flags` if set there, else `file`, else `defaults`.
            pub fn resolve(defaults: Settings, file: &Options, flags: &Options) -> Settings {
                Settings {
                    $( $name: flags.$name.clone().or_else(|| file.$name.clone()).unwrap_or(defaults.$name), )*
                }
            }
        }

        /// Every option key, as spelled in config files.
        pub const OPTION_NAMES: &[&str] = &[$(stringify!($name)),*];
    };
}

options! {
    /// Dataset seed for `generate` (default 42), base seed for `train` and
    /// `experiment`, Poisson stream seed for `encode` (default 0 for those).
    seed: u64 = 0;
    /// Number of samples for `generate`.
    size: usize = 5000;
    r_big: f64 = 0.5;
    r_small: f64 = 0.1;
    train_seed: u64 = 42;
    val_seed: u64 = 41;
    test_seed: u64 = 40;
    train_size: usize = 5000;
    val_size: usize = 1000;
    test_size: usize = 1000;
    epochs: usize = 300;
    batch_size: usize = 20;
    lr: f64 = 0.01;
    beta1: f64 = 0.9;
    beta2: f64 = 0.999;
    eps: f64 = 1e-8;
    /// Hidden layer width for `train`.
    hidden: usize = 30;
    /// Train a network without hidden layer.
    shallow: bool = false;
    /// Freeze the input-to-hidden weights at initialization.
    freeze_lower: bool = false;
    runs: usize = DEFAULT_RUNS;
    reps: usize = DEFAULT_SWEEP_REPS;
    sizes: Vec<usize> = DEFAULT_SWEEP_SIZES.to_vec();
    /// Worker threads for experiments; 0 picks one per core.
    workers: usize = 0;
    /// One of latency, lif, continuous, poisson, regular.
    scheme: String = "latency".to_string();
    t_early: f64 = 0.0;
    /// Defaults to `tau_m + tau_syn`.
    t_late: Option<f64> = None;
    tau_m: f64 = 10.0;
    tau_syn: f64 = 5.0;
    theta_i: f64 = 1.0;
    /// Defaults to `2 * theta_i`.
    i_scale: Option<f64> = None;
    r_max: f64 = 100.0;
    window_ms: f64 = 100.0;
    population_size: usize = 1;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Generate,
    Encode,
    Train,
    Experiment,
    Plot,
}

impl Settings {
    pub fn defaults_for(command: Command) -> Settings {
        let mut s = Settings::default();
        if command == Command::Generate {
            s.seed = 42;
        }
        s
    }

    /// Resolves against the per-command defaults, reading the config file if given.
    pub fn load(command: Command, config_file: Option<&Path>, flags: &Options) -> Result<Settings> {
        let file = match config_file {
            Some(path) => Options::from_json_file(path)?,
            None => Options::default(),
        };
        Ok(Settings::resolve(Settings::defaults_for(command), &file, flags))
    }

    pub fn geometry(&self) -> Result<GeometryParams> {
        GeometryParams::new(self.r_big, self.r_small)
    }

    pub fn splits(&self) -> SplitSpec {
        SplitSpec {
            train: SplitParams { seed: self.train_seed, size: self.train_size },
            validation: SplitParams { seed: self.val_seed, size: self.val_size },
            test: SplitParams { seed: self.test_seed, size: self.test_size },
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol { epochs: self.epochs, batch_size: self.batch_size, adam: self.adam(), workers: self.workers }
    }

    pub fn train_config(&self, init_seed: u64, shuffle_seed: u64) -> TrainConfig {
        self.protocol().train_config(init_seed, shuffle_seed)
    }

    pub fn latency(&self) -> Result<LatencyConfig> {
        let t_late = match self.t_late {
            Some(t) => t,
            None => default_t_late(self.tau_m, self.tau_syn)?,
        };
        LatencyConfig::new(self.t_early, t_late)
    }

    pub fn lif(&self) -> Result<LifEncoderConfig> {
        let c = LifEncoderConfig {
            tau_m: self.tau_m,
            theta_i: self.theta_i,
            i_scale: self.i_scale.unwrap_or(2.0 * self.theta_i),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn rate(&self, mode: RateMode) -> Result<RateConfig> {
        let c = RateConfig { r_max: self.r_max, window: self.window_ms, population_size: self.population_size, mode };
        c.validate()?;
        Ok(c)
    }
}

impl Options {
    pub fn from_json(text: &str) -> Result<Options> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("config file: {e}")))
    }

    pub fn from_json_file(path: &Path) -> Result<Options> {
        Self::from_json(&io::read_to_string(path)?)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }
}
