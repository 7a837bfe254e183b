//! Scenario configuration: flat TOML files (key = value grouped in sections),
//! one file per scenario, plus the validation layer that turns them into
//! runnable descriptions.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use qecell::special::j1_zero;
use qecell::ModelParams64;

/// Observables a scenario may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Level occupations at each scheduled snapshot time.
    Snapshot,
    /// Per-cell probabilities over the series time grid.
    Cells,
    /// Time-averaged per-cell probabilities over the averaging window.
    TimeAverage,
    /// Penetration beyond the cell-2/3 barrier after a fixed time.
    Penetration,
    /// Penetration versus 1/h over the scan grid.
    Scan,
    /// Spreading boundary of the final snapshot.
    SpreadBoundary,
    /// Husimi distributions of the selected states.
    Husimi,
    /// Spectrum (and eigenvector matrix) dump.
    Spectrum,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Snapshot => "snapshot",
            Observable::Cells => "cells",
            Observable::TimeAverage => "time_average",
            Observable::Penetration => "penetration",
            Observable::Scan => "scan",
            Observable::SpreadBoundary => "spread_boundary",
            Observable::Husimi => "husimi",
            Observable::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub h: f64,
    pub v0: f64,
    pub delta: f64,
    pub n_levels: usize,
    pub n_switch: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Single excited level `C_n = delta_{n, level}`.
    pub level: Option<usize>,
    /// Eigenstate index of the solved spectrum.
    pub eigenstate: Option<usize>,
    /// Explicit amplitudes (normalized on load).
    pub amplitudes_re: Option<Vec<f64>>,
    pub amplitudes_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Times (in periods) at which snapshots are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// `[t_min, t_max]` of the cells series grid.
    pub series_window: Option<[f64; 2]>,
    pub series_points: Option<usize>,
    /// `[t_min, t_max]` of the time-averaging window.
    pub average_window: Option<[f64; 2]>,
    pub average_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Centre of the 1/h grid.
    pub center: f64,
    /// Half-width of the 1/h grid.
    pub half_span: f64,
    #[serde(default = "default_scan_points")]
    pub points: usize,
    #[serde(default = "default_scan_time")]
    pub time: f64,
}

fn default_scan_points() -> usize {
    401
}

fn default_scan_time() -> f64 {
    4e4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenetrationConfig {
    #[serde(default = "default_scan_time")]
    pub time: f64,
    /// Explicit barrier coupling index; defaults to the cell-2/3 boundary.
    pub barrier: Option<usize>,
}

impl Default for PenetrationConfig {
    fn default() -> Self {
        Self {
            time: default_scan_time(),
            barrier: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadConfig {
    #[serde(default = "default_spread_threshold")]
    pub threshold: f64,
}

fn default_spread_threshold() -> f64 {
    1e-10
}

impl Default for SpreadConfig {
    fn default() -> Self {
        Self {
            threshold: default_spread_threshold(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HusimiConfig {
    #[serde(default = "default_husimi_resolution")]
    pub resolution: usize,
    /// State selectors: "top", "bottom", "initial", "final" or "q<index>".
    #[serde(default = "default_husimi_states")]
    pub states: Vec<String>,
}

fn default_husimi_resolution() -> usize {
    256
}

fn default_husimi_states() -> Vec<String> {
    vec!["top".into(), "bottom".into()]
}

impl Default for HusimiConfig {
    fn default() -> Self {
        Self {
            resolution: default_husimi_resolution(),
            states: default_husimi_states(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// One scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub params: ParamsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub output: OutputConfig,
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub penetration: PenetrationConfig,
    #[serde(default)]
    pub spread: SpreadConfig,
    #[serde(default)]
    pub husimi: HusimiConfig,
    /// Second value of `h` for the time-average comparison profile.
    pub compare_h: Option<f64>,
}

fn default_name() -> String {
    "custom".into()
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario file {}", path.display()))?;
        let config: ScenarioConfig = toml::from_str(&text)
            .with_context(|| format!("parsing scenario file {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn model_params(&self) -> Result<ModelParams64> {
        let mut params = ModelParams64::new(
            self.params.h,
            self.params.v0,
            self.params.delta,
            self.params.n_levels,
        )
        .map_err(|e| anyhow::anyhow!("params: {e}"))?;
        if let Some(s) = self.params.n_switch {
            params = params.with_branch_switch(s);
        }
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params()?;
        let n = self.params.n_levels;

        let mut chosen = 0;
        if self.initial.level.is_some() {
            chosen += 1;
        }
        if self.initial.eigenstate.is_some() {
            chosen += 1;
        }
        if self.initial.amplitudes_re.is_some() {
            chosen += 1;
        }
        if chosen != 1 {
            bail!("initial: exactly one of level, eigenstate, amplitudes_re must be set");
        }
        if let Some(level) = self.initial.level {
            if level >= n {
                bail!("initial.level: {level} out of range [0, {n})");
            }
        }
        if let Some(q) = self.initial.eigenstate {
            if q >= n {
                bail!("initial.eigenstate: {q} out of range [0, {n})");
            }
        }
        if let Some(re) = &self.initial.amplitudes_re {
            if re.len() != n {
                bail!(
                    "initial.amplitudes_re: {} entries, expected n_levels = {n}",
                    re.len()
                );
            }
            if let Some(im) = &self.initial.amplitudes_im {
                if im.len() != n {
                    bail!(
                        "initial.amplitudes_im: {} entries, expected n_levels = {n}",
                        im.len()
                    );
                }
            }
            let norm: f64 = re
                .iter()
                .zip(
                    self.initial
                        .amplitudes_im
                        .as_deref()
                        .unwrap_or(&[])
                        .iter()
                        .chain(std::iter::repeat(&0.0)),
                )
                .map(|(r, i)| r * r + i * i)
                .sum();
            if norm <= 0.0 {
                bail!("initial.amplitudes_re: zero norm");
            }
        } else if self.initial.amplitudes_im.is_some() {
            bail!("initial.amplitudes_im: set without initial.amplitudes_re");
        }

        for (i, &t) in self.schedule.snapshots.iter().enumerate() {
            if !(t >= 0.0) || !t.is_finite() {
                bail!("schedule.snapshots[{i}]: times must be finite and >= 0, got {t}");
            }
        }
        for (label, window) in [
            ("schedule.series_window", self.schedule.series_window),
            ("schedule.average_window", self.schedule.average_window),
        ] {
            if let Some([lo, hi]) = window {
                if !(lo > 0.0) || !(hi > lo) {
                    bail!("{label}: need 0 < t_min < t_max, got [{lo}, {hi}]");
                }
            }
        }
        if let Some(p) = self.schedule.series_points {
            if p < 2 {
                bail!("schedule.series_points: need at least 2, got {p}");
            }
        }
        if let Some(p) = self.schedule.average_samples {
            if p < 2 {
                bail!("schedule.average_samples: need at least 2, got {p}");
            }
        }

        if self.observables.is_empty() {
            bail!("observables: at least one observable is required");
        }
        if self.observables.contains(&Observable::Scan) {
            let scan = self
                .scan
                .as_ref()
                .context("scan: section required when the scan observable is requested")?;
            if !(scan.center > 0.0) || !(scan.half_span > 0.0) {
                bail!(
                    "scan: center and half_span must be positive, got {} and {}",
                    scan.center,
                    scan.half_span
                );
            }
            if scan.points < 2 {
                bail!("scan.points: need at least 2, got {}", scan.points);
            }
            if !(scan.time > 0.0) {
                bail!("scan.time: must be positive, got {}", scan.time);
            }
        }
        if !(self.spread.threshold > 0.0) || !(self.spread.threshold < 1.0) {
            bail!(
                "spread.threshold: must lie in (0, 1), got {}",
                self.spread.threshold
            );
        }
        if let Some(b) = self.penetration.barrier {
            if b + 1 >= n {
                bail!("penetration.barrier: {b} out of range [0, {})", n - 1);
            }
        }
        if self.husimi.resolution < 2 {
            bail!(
                "husimi.resolution: need at least 2, got {}",
                self.husimi.resolution
            );
        }
        for s in &self.husimi.states {
            parse_husimi_selector(s, n)?;
        }
        if let Some(h) = self.compare_h {
            if !(h > 0.0) {
                bail!("compare_h: must be positive, got {h}");
            }
        }
        Ok(())
    }
}

/// Husimi state selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HusimiState {
    Top,
    Bottom,
    Initial,
    Final,
    Eigenstate(usize),
}

pub fn parse_husimi_selector(s: &str, n_levels: usize) -> Result<HusimiState> {
    match s {
        "top" => Ok(HusimiState::Top),
        "bottom" => Ok(HusimiState::Bottom),
        "initial" => Ok(HusimiState::Initial),
        "final" => Ok(HusimiState::Final),
        other => {
            let q: usize = other
                .strip_prefix('q')
                .and_then(|d| d.parse().ok())
                .with_context(|| {
                    format!(
                        "husimi.states: '{other}' is not one of top, bottom, initial, final, q<index>"
                    )
                })?;
            if q >= n_levels {
                bail!("husimi.states: q{q} out of range [0, {n_levels})");
            }
            Ok(HusimiState::Eigenstate(q))
        }
    }
}

/// The builtin scenarios in stable order, plus their one-line descriptions.
pub fn builtin_names() -> Vec<(&'static str, String)> {
    vec![
        (
            "fig1",
            "Husimi maps of the extremal QE eigenstates; N = 100, h = 0.52, V0 = 0.1, delta = 0"
                .into(),
        ),
        (
            "fig2",
            "Probability snapshots over seven cells at t = 4e5 and 7e5; h = 0.6, V0 = 0.1, \
             N = 432, start at the centre of cell 1"
                .into(),
        ),
        (
            "fig3",
            "Cell probabilities P1(t), P2(t) on a log time grid in [1e2, 1e6]; same parameters \
             as fig2"
                .into(),
        ),
        (
            "fig4",
            "Time-averaged cell profile over [1e3, 1e6] for h = 0.6 and h = 0.52; other \
             parameters as fig2"
                .into(),
        ),
        (
            "fig5",
            "Penetration coefficient from cell 2 versus 1/h over two blocking periods; \
             t = 4e4, N = 100, V0 = 0.1, delta = 0"
                .into(),
        ),
        (
            "fig6",
            "Near-resonance spreading snapshot at t = 4e6; detuning magnitude 0.003, h = 0.52, \
             V0 = 0.1, N = 100, start at level 6"
                .into(),
        ),
    ]
}

/// Constructs a builtin scenario by name.
pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    let base_a = ParamsConfig {
        h: 0.6,
        v0: 0.1,
        delta: 0.0,
        n_levels: 432,
        n_switch: None,
    };
    let config = match name {
        "fig1" => ScenarioConfig {
            name: "fig1".into(),
            params: ParamsConfig {
                h: 0.52,
                v0: 0.1,
                delta: 0.0,
                n_levels: 100,
                n_switch: None,
            },
            initial: InitialConfig {
                eigenstate: Some(99),
                ..Default::default()
            },
            schedule: ScheduleConfig::default(),
            observables: vec![Observable::Husimi, Observable::Spectrum],
            output: OutputConfig::default(),
            scan: None,
            penetration: PenetrationConfig::default(),
            spread: SpreadConfig::default(),
            husimi: HusimiConfig::default(),
            compare_h: None,
        },
        "fig2" => ScenarioConfig {
            name: "fig2".into(),
            params: base_a,
            initial: InitialConfig {
                level: Some(6),
                ..Default::default()
            },
            schedule: ScheduleConfig {
                snapshots: vec![4e5, 7e5],
                ..Default::default()
            },
            observables: vec![Observable::Snapshot],
            output: OutputConfig::default(),
            scan: None,
            penetration: PenetrationConfig::default(),
            spread: SpreadConfig::default(),
            husimi: HusimiConfig::default(),
            compare_h: None,
        },
        "fig3" => ScenarioConfig {
            name: "fig3".into(),
            params: base_a,
            initial: InitialConfig {
                level: Some(6),
                ..Default::default()
            },
            schedule: ScheduleConfig {
                series_window: Some([1e2, 1e6]),
                series_points: Some(200),
                ..Default::default()
            },
            observables: vec![Observable::Cells],
            output: OutputConfig::default(),
            scan: None,
            penetration: PenetrationConfig::default(),
            spread: SpreadConfig::default(),
            husimi: HusimiConfig::default(),
            compare_h: None,
        },
        "fig4" => ScenarioConfig {
            name: "fig4".into(),
            params: base_a,
            initial: InitialConfig {
                level: Some(6),
                ..Default::default()
            },
            schedule: ScheduleConfig {
                average_window: Some([1e3, 1e6]),
                average_samples: Some(200),
                ..Default::default()
            },
            observables: vec![Observable::TimeAverage],
            output: OutputConfig::default(),
            scan: None,
            penetration: PenetrationConfig::default(),
            spread: SpreadConfig::default(),
            husimi: HusimiConfig::default(),
            compare_h: Some(0.52),
        },
        "fig5" => {
            let b2: f64 = j1_zero(2).expect("second J1 zero");
            ScenarioConfig {
                name: "fig5".into(),
                params: ParamsConfig {
                    h: 0.6,
                    v0: 0.1,
                    delta: 0.0,
                    n_levels: 100,
                    n_switch: None,
                },
                initial: InitialConfig {
                    level: Some(26),
                    ..Default::default()
                },
                schedule: ScheduleConfig::default(),
                observables: vec![Observable::Scan],
                output: OutputConfig::default(),
                scan: Some(ScanConfig {
                    center: 82.0 / (b2 * b2),
                    half_span: 2.0 / (b2 * b2),
                    points: 401,
                    time: 4e4,
                }),
                penetration: PenetrationConfig::default(),
                spread: SpreadConfig::default(),
                husimi: HusimiConfig::default(),
                compare_h: None,
            }
        }
        "fig6" => ScenarioConfig {
            name: "fig6".into(),
            params: ParamsConfig {
                h: 0.52,
                v0: 0.1,
                delta: -0.003,
                n_levels: 100,
                n_switch: None,
            },
            initial: InitialConfig {
                level: Some(6),
                ..Default::default()
            },
            schedule: ScheduleConfig {
                snapshots: vec![4e6],
                ..Default::default()
            },
            observables: vec![Observable::Snapshot, Observable::SpreadBoundary],
            output: OutputConfig::default(),
            scan: None,
            penetration: PenetrationConfig::default(),
            spread: SpreadConfig::default(),
            husimi: HusimiConfig::default(),
            compare_h: None,
        },
        _ => return None,
    };
    config.validate().expect("builtin scenarios are valid");
    Some(config)
}
