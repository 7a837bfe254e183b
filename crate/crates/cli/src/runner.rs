//! Scenario execution: builds the chain, solves, computes the requested
//! observables, writes CSVs and a manifest recording parameters and the full
//! invariant-suite outcome.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex;

use qecell::evolve::{
    cell_probabilities, evolve, log_spaced_times, penetration_coefficient, scan_penetration,
    spread_boundary, time_averaged_cells, BarrierRule, StateVector,
};
use qecell::export;
use qecell::export::fmt17;
use qecell::husimi::{export_with_contours, husimi, GridSpec};
use qecell::invariants::{run_invariant_suite, InvariantCheck};
use qecell::model::{cell_partition, CellPartition, CouplingChain, ModelParams};
use qecell::spectrum::{solve, QeSpectrum};
use qecell::{ModelParams64, QeSpectrum64, StateVector64};

use crate::config::{parse_husimi_selector, HusimiState, Observable, ScenarioConfig};

/// Summary of one run, echoed to stdout and into the manifest.
pub struct RunReport {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub invariants: Vec<InvariantCheck>,
    pub results: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn invariants_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }
}

fn initial_state(config: &ScenarioConfig, spectrum: &QeSpectrum64) -> Result<StateVector64> {
    let n = config.params.n_levels;
    if let Some(level) = config.initial.level {
        return Ok(StateVector::delta_at(level, n)?);
    }
    if let Some(q) = config.initial.eigenstate {
        return Ok(StateVector::from_eigenstate(spectrum, q)?);
    }
    let re = config
        .initial
        .amplitudes_re
        .as_ref()
        .expect("validated initial state");
    let zeros = vec![0.0; n];
    let im = config.initial.amplitudes_im.as_deref().unwrap_or(&zeros);
    let norm: f64 = re
        .iter()
        .zip(im)
        .map(|(r, i)| r * r + i * i)
        .sum::<f64>()
        .sqrt();
    let amplitudes: Vec<Complex<f64>> = re
        .iter()
        .zip(im)
        .map(|(&r, &i)| Complex::new(r / norm, i / norm))
        .collect();
    Ok(StateVector::from_amplitudes(amplitudes, 0.0)?)
}

/// Deterministic file tag for a time value: `4e5`, `1.25e3`, ...
fn time_tag(t: f64) -> String {
    format!("{t:e}")
}

fn husimi_metadata(config: &ScenarioConfig, label: &str) -> Vec<String> {
    vec![
        format!("scenario = {}", config.name),
        format!("state = {label}"),
        format!(
            "h = {}, v0 = {}, delta = {}, n_levels = {}",
            config.params.h, config.params.v0, config.params.delta, config.params.n_levels
        ),
    ]
}

/// Executes a validated scenario, writing everything under `out_dir`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    let params: ModelParams64 = config.model_params()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let chain = CouplingChain::build(params)?;
    let partition = cell_partition(&chain).ok();
    let spectrum = solve(chain)?;
    let state0 = initial_state(config, &spectrum)?;

    let mut report = RunReport {
        output_dir: out_dir.to_path_buf(),
        files: Vec::new(),
        invariants: Vec::new(),
        results: Vec::new(),
        warnings: Vec::new(),
    };

    for observable in &config.observables {
        match observable {
            Observable::Snapshot => {
                if config.schedule.snapshots.is_empty() {
                    report
                        .warnings
                        .push("snapshot requested without schedule.snapshots".into());
                }
                for &t in &config.schedule.snapshots {
                    let state = evolve(&state0, &spectrum, t)?;
                    let file = format!("snapshot_t{}.csv", time_tag(t));
                    export::write_snapshot(&out_dir.join(&file), &state)?;
                    report.files.push(file);
                }
            }
            Observable::Cells => {
                let partition = require_partition(&partition)?;
                let [lo, hi] = config.schedule.series_window.unwrap_or([1e2, 1e6]);
                let points = config.schedule.series_points.unwrap_or(200);
                let times = log_spaced_times(lo, hi, points)?;
                let mut rows = Vec::with_capacity(times.len());
                for &t in &times {
                    let state = evolve(&state0, &spectrum, t)?;
                    rows.push(cell_probabilities(&state, partition));
                }
                export::write_cell_series(&out_dir.join("cells.csv"), &times, &rows)?;
                report.files.push("cells.csv".into());
            }
            Observable::TimeAverage => {
                let partition = require_partition(&partition)?;
                let [lo, hi] = config.schedule.average_window.unwrap_or([1e3, 1e6]);
                let samples = config.schedule.average_samples.unwrap_or(200);
                let profile = time_averaged_cells(&state0, &spectrum, partition, lo, hi, samples)?;
                let file = format!("profile_h{}.csv", config.params.h);
                export::write_cell_profile(&out_dir.join(&file), &profile)?;
                report.files.push(file);
                if let Some(h2) = config.compare_h {
                    let params2 = ModelParams::new(h2, params.v0, params.delta, params.n_levels)?;
                    let chain2 = CouplingChain::build(params2)?;
                    let partition2 = cell_partition(&chain2)?;
                    let spectrum2 = solve(chain2)?;
                    let start2 = partition2.cells()[0].center();
                    let state2 = StateVector::delta_at(start2, params.n_levels)?;
                    let profile2 =
                        time_averaged_cells(&state2, &spectrum2, &partition2, lo, hi, samples)?;
                    let file2 = format!("profile_h{h2}.csv");
                    export::write_cell_profile(&out_dir.join(&file2), &profile2)?;
                    report.files.push(file2);
                }
            }
            Observable::Penetration => {
                let barrier = match config.penetration.barrier {
                    Some(b) => b,
                    None => second_cell_barrier(&spectrum, &partition)?,
                };
                let state = evolve(&state0, &spectrum, config.penetration.time)?;
                let p = penetration_coefficient(&state, barrier)?;
                report
                    .results
                    .push(("penetration_barrier".into(), barrier.to_string()));
                report
                    .results
                    .push(("penetration_time".into(), time_tag(config.penetration.time)));
                report.results.push(("penetration".into(), fmt17(p)));
            }
            Observable::Scan => {
                let scan = config.scan.as_ref().expect("validated scan section");
                let points = scan.points;
                let step = 2.0 * scan.half_span / (points - 1) as f64;
                let centre_index = (points - 1) as f64 / 2.0;
                let grid: Vec<f64> = (0..points)
                    .map(|i| scan.center + (i as f64 - centre_index) * step)
                    .collect();
                let results =
                    scan_penetration(&params, &grid, scan.time, BarrierRule::SecondCellBoundary)?;
                for point in &results {
                    if point.penetration.is_none() {
                        report.warnings.push(format!(
                            "scan point 1/h = {} skipped ({} cells)",
                            point.inv_h, point.cells
                        ));
                    }
                }
                export::write_scan(&out_dir.join("scan.csv"), &results)?;
                report.files.push("scan.csv".into());
            }
            Observable::SpreadBoundary => {
                let t = config
                    .schedule
                    .snapshots
                    .last()
                    .copied()
                    .unwrap_or(config.penetration.time);
                let state = evolve(&state0, &spectrum, t)?;
                let boundary = spread_boundary(&state, config.spread.threshold)?;
                report
                    .results
                    .push(("spread_boundary".into(), boundary.to_string()));
                report.results.push(("spread_time".into(), time_tag(t)));
                // reference marker: the cell edge of the matching resonant chain
                let resonant = ModelParams::new(params.h, params.v0, 0.0, params.n_levels)?;
                if let Ok(chain0) = CouplingChain::build(resonant) {
                    if let Ok(cells0) = cell_partition(&chain0) {
                        if let Some(&edge) = cells0.boundaries().get(1) {
                            report
                                .results
                                .push(("resonant_cell2_edge".into(), edge.to_string()));
                        }
                    }
                }
            }
            Observable::Husimi => {
                let grid_spec = GridSpec {
                    half_width: None,
                    resolution: config.husimi.resolution,
                };
                for selector in &config.husimi.states {
                    let parsed = parse_husimi_selector(selector, params.n_levels)
                        .expect("validated selector");
                    let (label, state) = match parsed {
                        HusimiState::Top => (
                            "top".to_string(),
                            StateVector::from_eigenstate(&spectrum, spectrum.len() - 1)?,
                        ),
                        HusimiState::Bottom => (
                            "bottom".to_string(),
                            StateVector::from_eigenstate(&spectrum, 0)?,
                        ),
                        HusimiState::Initial => ("initial".to_string(), state0.clone()),
                        HusimiState::Final => {
                            let t = config.schedule.snapshots.last().copied().unwrap_or(0.0);
                            ("final".to_string(), evolve(&state0, &spectrum, t)?)
                        }
                        HusimiState::Eigenstate(q) => {
                            (format!("q{q}"), StateVector::from_eigenstate(&spectrum, q)?)
                        }
                    };
                    let grid = husimi(&state, &grid_spec)?;
                    if grid.normalization_defect() > 0.02 {
                        report.warnings.push(format!(
                            "husimi {label}: grid captured only {} of the state",
                            fmt17(grid.captured_mass())
                        ));
                    }
                    let file = format!("husimi_{label}.csv");
                    export_with_contours(
                        &out_dir.join(&file),
                        &grid,
                        None,
                        &husimi_metadata(config, &label),
                    )?;
                    report.files.push(file);
                }
            }
            Observable::Spectrum => {
                export::write_spectrum(&out_dir.join("spectrum.csv"), &spectrum)?;
                export::write_eigenvectors(&out_dir.join("eigenvectors.csv"), &spectrum)?;
                report.files.push("spectrum.csv".into());
                report.files.push("eigenvectors.csv".into());
            }
        }
    }

    report.invariants = run_invariant_suite(&params)?;
    write_manifest(config, out_dir, &report)?;
    Ok(report)
}

fn require_partition(partition: &Option<CellPartition>) -> Result<&CellPartition> {
    partition
        .as_ref()
        .context("this observable needs a cell partition, but the chain has none (v0 = 0?)")
}

fn second_cell_barrier(
    spectrum: &QeSpectrum<f64>,
    partition: &Option<CellPartition>,
) -> Result<usize> {
    let partition = require_partition(partition)?;
    if partition.len() < 3 {
        bail!(
            "penetration barrier rule needs at least 3 cells, chain has {}",
            partition.len()
        );
    }
    let b = partition.boundaries()[1];
    let f = spectrum.chain().off_diagonal();
    Ok(if b >= 1 && f[b - 1].abs() < f[b].abs() {
        b - 1
    } else {
        b
    })
}

fn write_manifest(config: &ScenarioConfig, out_dir: &Path, report: &RunReport) -> Result<()> {
    let mut text = String::new();
    writeln!(text, "[scenario]")?;
    writeln!(text, "name = {:?}", config.name)?;
    writeln!(text, "tool_version = {:?}", env!("CARGO_PKG_VERSION"))?;
    writeln!(
        text,
        "observables = [{}]",
        config
            .observables
            .iter()
            .map(|o| format!("{:?}", o.name()))
            .collect::<Vec<_>>()
            .join(", ")
    )?;
    writeln!(text)?;
    writeln!(text, "[params]")?;
    writeln!(text, "h = {}", fmt17(config.params.h))?;
    writeln!(text, "v0 = {}", fmt17(config.params.v0))?;
    writeln!(text, "delta = {}", fmt17(config.params.delta))?;
    writeln!(text, "n_levels = {}", config.params.n_levels)?;
    if let Some(s) = config.params.n_switch {
        writeln!(text, "n_switch = {s}")?;
    }
    writeln!(text)?;
    writeln!(text, "[summary]")?;
    writeln!(
        text,
        "invariants_pass = {}",
        report.invariants.iter().all(|c| c.pass)
    )?;
    writeln!(text)?;
    writeln!(text, "[outputs]")?;
    writeln!(
        text,
        "files = [{}]",
        report
            .files
            .iter()
            .map(|f| format!("{f:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    )?;
    writeln!(text)?;
    if !report.results.is_empty() {
        writeln!(text, "[results]")?;
        for (key, value) in &report.results {
            writeln!(text, "{key} = {value:?}")?;
        }
        writeln!(text)?;
    }
    if !report.warnings.is_empty() {
        writeln!(text, "[warnings]")?;
        writeln!(
            text,
            "messages = [{}]",
            report
                .warnings
                .iter()
                .map(|w| format!("{w:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        writeln!(text)?;
    }
    for check in &report.invariants {
        writeln!(text, "[[invariants]]")?;
        writeln!(text, "name = {:?}", check.name)?;
        writeln!(text, "observed = {}", fmt17(check.observed))?;
        writeln!(text, "threshold = {}", fmt17(check.threshold))?;
        writeln!(text, "pass = {}", check.pass)?;
    }
    std::fs::write(out_dir.join("manifest.toml"), text)
        .with_context(|| format!("writing manifest in {}", out_dir.display()))?;
    Ok(())
}

/// Runs the invariant suite alone, printing one line per check.
pub fn run_check(config: &ScenarioConfig) -> Result<bool> {
    let params = config.model_params()?;
    let checks = run_invariant_suite(&params)?;
    let mut all_pass = true;
    for check in &checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!(
            "{status}  {:<32} observed {:>12.4e}  threshold {:>8.1e}",
            check.name, check.observed, check.threshold
        );
        all_pass &= check.pass;
    }
    Ok(all_pass)
}
