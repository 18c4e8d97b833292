//! Spike-time and rate encodings of feature vectors.
//!
//! Times are in milliseconds and rates in Hz throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::sampler::FeatureVector;

pub const CHANNELS: usize = 4;

/// Upper bound on the expected number of Poisson events per encoded sample.
pub const MAX_EXPECTED_EVENTS: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub neuron_id: usize,
    pub time_ms: f64,
}

/// Events sorted by `(time, neuron_id)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpikeTrain {
    events: Vec<SpikeEvent>,
    neurons: usize,
}

impl SpikeTrain {
    /// Sorts `events` stably by time, then neuron id.
    pub fn from_events(mut events: Vec<SpikeEvent>, neurons: usize) -> Self {
        debug_assert!(events.iter().all(|e| e.neuron_id < neurons && e.time_ms >= 0.0));
        events.sort_by(|a, b| a.time_ms.total_cmp(&b.time_ms).then(a.neuron_id.cmp(&b.neuron_id)));
        Self { events, neurons }
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count_for(&self, neuron_id: usize) -> usize {
        self.events.iter().filter(|e| e.neuron_id == neuron_id).count()
    }

    /// Spike time of `neuron_id`, if it fired. Meaningful for single-spike encodings.
    pub fn time_of(&self, neuron_id: usize) -> Option<f64> {
        self.events.iter().find(|e| e.neuron_id == neuron_id).map(|e| e.time_ms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyConfig {
    pub t_early: f64,
    pub t_late: f64,
}

impl LatencyConfig {
    pub fn new(t_early: f64, t_late: f64) -> Result<Self> {
        let c = Self { t_early, t_late };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_early >= 0.0 && self.t_late > self.t_early && self.t_late.is_finite()) {
            return Err(Error::config(format!(
                "latency encoding needs t_late > t_early >= 0, got t_early={}, t_late={}",
                self.t_early, self.t_late
            )));
        }
        Ok(())
    }
}

/// Recommended latest spike time: the sum of membrane and synaptic time constants.
pub fn default_t_late(tau_m: f64, tau_syn: f64) -> Result<f64> {
    if !(tau_m > 0.0 && tau_syn > 0.0) {
        return Err(Error::config(format!(
            "time constants must be positive, got tau_m={tau_m}, tau_syn={tau_syn}"
        )));
    }
    Ok(tau_m + tau_syn)
}

/// One spike per channel at `t_early + f_k (t_late - t_early)`.
pub fn encode_latency(f: &FeatureVector, c: &LatencyConfig) -> Result<SpikeTrain> {
    c.validate()?;
    let span = c.t_late - c.t_early;
    let events = f
        .0
        .iter()
        .enumerate()
        .map(|(k, &v)| SpikeEvent { neuron_id: k, time_ms: c.t_early + v * span })
        .collect();
    Ok(SpikeTrain::from_events(events, CHANNELS))
}

/// Constant-current drive into a leaky integrate-and-fire neuron.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifEncoderConfig {
    pub tau_m: f64,
    /// Rheobase: the smallest constant current that makes the neuron fire.
    pub theta_i: f64,
    /// Current per unit of feature value.
    pub i_scale: f64,
}

impl Default for LifEncoderConfig {
    /// `i_scale = 2 theta_i`, so a feature of 1 fires at `tau_m ln 2`.
    fn default() -> Self {
        Self { tau_m: 10.0, theta_i: 1.0, i_scale: 2.0 }
    }
}

impl LifEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_m > 0.0 && self.theta_i > 0.0 && self.i_scale > 0.0) {
            return Err(Error::config(format!(
                "LIF encoder needs tau_m, theta_i, i_scale > 0, got {}, {}, {}",
                self.tau_m, self.theta_i, self.i_scale
            )));
        }
        Ok(())
    }

    /// First threshold crossing of a neuron starting at rest under constant
    /// current `current`, or `None` when the current never reaches threshold.
    pub fn spike_time(&self, current: f64) -> Option<f64> {
        (current > self.theta_i).then(|| self.tau_m * (current / (current - self.theta_i)).ln())
    }
}

/// Channels whose current stays at or below the rheobase emit nothing.
pub fn encode_lif_current(f: &FeatureVector, c: &LifEncoderConfig) -> Result<SpikeTrain> {
    c.validate()?;
    let events = f
        .0
        .iter()
        .enumerate()
        .filter_map(|(k, &v)| c.spike_time(c.i_scale * v).map(|t| SpikeEvent { neuron_id: k, time_ms: t }))
        .collect();
    Ok(SpikeTrain::from_events(events, CHANNELS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    Continuous,
    Poisson,
    Regular,
}

impl std::str::FromStr for RateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(RateMode::Continuous),
            "poisson" => Ok(RateMode::Poisson),
            "regular" => Ok(RateMode::Regular),
            other => Err(Error::config(format!("unknown rate mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    /// Rate for a feature value of 1, in Hz.
    pub r_max: f64,
    /// Encoding duration in ms.
    pub window: f64,
    /// Neurons per input channel.
    pub population_size: usize,
    pub mode: RateMode,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self { r_max: 100.0, window: 100.0, population_size: 1, mode: RateMode::Poisson }
    }
}

impl RateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite() && self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::config(format!(
                "rate encoding needs r_max > 0 and window > 0, got r_max={}, window={}",
                self.r_max, self.window
            )));
        }
        if self.population_size == 0 {
            return Err(Error::config("population_size must be at least 1"));
        }
        if self.mode == RateMode::Poisson {
            let expected = self.r_max * self.window / 1000.0 * (CHANNELS * self.population_size) as f64;
            if expected > MAX_EXPECTED_EVENTS {
                return Err(Error::config(format!(
                    "Poisson encoding would produce ~{expected:.3e} events per sample (limit {MAX_EXPECTED_EVENTS:e})"
                )));
            }
        }
        Ok(())
    }

    pub fn neurons(&self) -> usize {
        CHANNELS * self.population_size
    }
}

/// Output of [`encode_rate`]. Neuron `k * population_size + m` is member `m`
/// of channel `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum RateEncoding {
    /// One rate in Hz per neuron.
    Rates(Vec<f64>),
    Spikes(SpikeTrain),
}

/// Rates proportional to the features, optionally realized as spike trains.
///
/// Poisson trains draw exponential inter-spike intervals from `rng`,
/// channel-major then member-major. Regular trains fire at `(j + 1) / r` for
/// `j = 0, 1, ...` up to and including the window end, with zero phase.
pub fn encode_rate(f: &FeatureVector, c: &RateConfig, rng: &mut Rng) -> Result<RateEncoding> {
    c.validate()?;
    let rates: Vec<f64> = f.0.iter().map(|&v| c.r_max * v).collect();
    let pop = c.population_size;
    match c.mode {
        RateMode::Continuous => Ok(RateEncoding::Rates(
            rates.iter().flat_map(|&r| std::iter::repeat_n(r, pop)).collect(),
        )),
        RateMode::Poisson => {
            let mut events = Vec::new();
            for (k, &rate) in rates.iter().enumerate() {
                let per_ms = rate / 1000.0;
                for m in 0..pop {
                    if per_ms <= 0.0 {
                        continue;
                    }
                    let neuron_id = k * pop + m;
                    let mut t = rng.exponential(per_ms);
                    while t <= c.window {
                        events.push(SpikeEvent { neuron_id, time_ms: t });
                        t += rng.exponential(per_ms);
                    }
                }
            }
            Ok(RateEncoding::Spikes(SpikeTrain::from_events(events, c.neurons())))
        }
        RateMode::Regular => {
            let mut events = Vec::new();
            for (k, &rate) in rates.iter().enumerate() {
                if rate <= 0.0 {
                    continue;
                }
                for m in 0..pop {
                    let neuron_id = k * pop + m;
                    for j in 1u64.. {
                        let t = 1000.0 * j as f64 / rate;
                        if t > c.window {
                            break;
                        }
                        events.push(SpikeEvent { neuron_id, time_ms: t });
                    }
                }
            }
            Ok(RateEncoding::Spikes(SpikeTrain::from_events(events, c.neurons())))
        }
    }
}
