//! JSON reports and the phase timer.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use envt_core::envt::PassStats;
use envt_core::mesh::OrientationReport;
use envt_core::metrics::TracePoint;
use envt_core::{FlipReport, Observer, Phase, TriMesh};
use serde::Serialize;

use crate::io::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub msae_degrees: f64,
    /// `null` when the vertex error was not computed.
    pub e_v: Option<f64>,
}

impl From<TracePoint> for TraceRow {
    fn from(p: TracePoint) -> Self {
        TraceRow {
            iteration: p.iteration,
            msae_degrees: p.msae_degrees,
            e_v: p.e_v.is_finite().then_some(p.e_v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsReport {
    pub tau: f64,
    pub radius: Option<f64>,
    pub rho: f64,
    pub damping: f64,
    pub iterations: usize,
    pub vertex_iters: usize,
    pub step_scale: f64,
    pub neighborhood: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassCounts {
    pub planar: usize,
    pub edge: usize,
    pub corner: usize,
    pub degenerate: usize,
    pub unusable: usize,
    pub zero_result: usize,
}

impl From<PassStats> for ClassCounts {
    fn from(s: PassStats) -> Self {
        ClassCounts {
            planar: s.planar,
            edge: s.edge,
            corner: s.corner,
            degenerate: s.degenerate,
            unusable: s.unusable,
            zero_result: s.zero_result,
        }
    }
}

/// Metrics of a result against a reference. `msae_degrees` and `e_v` are
/// `null` when no reference was available.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub msae_degrees: Option<f64>,
    pub e_v: Option<f64>,
    pub trace: Vec<TraceRow>,
    pub timings_seconds: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ParamsReport>,
    /// Feature classes in the last filtering pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_pass: Option<ClassCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundJson {
    pub sigma_over_length: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipReportJson {
    /// `monte_carlo` (edges are simulated unit edges) or `meshes`.
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<&'static str>,
    pub total_edges: usize,
    pub flipped: usize,
    pub flip_fraction: f64,
    pub bound_checked: Option<BoundJson>,
}

impl FlipReportJson {
    pub fn new(source: &'static str, model: Option<&'static str>, r: &FlipReport) -> Self {
        FlipReportJson {
            source,
            model,
            total_edges: r.total_edges,
            flipped: r.flipped,
            flip_fraction: r.flip_fraction,
            bound_checked: r.bound_checked.map(|b| BoundJson {
                sigma_over_length: b.sigma_over_length,
                bound: b.bound,
                passed: b.passed,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrientationJson {
    pub total_edges: usize,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    pub inconsistent_edges: usize,
    pub consistent: bool,
}

impl From<OrientationReport> for OrientationJson {
    fn from(r: OrientationReport) -> Self {
        OrientationJson {
            total_edges: r.total_edges,
            boundary_edges: r.boundary_edges,
            non_manifold_edges: r.non_manifold_edges,
            inconsistent_edges: r.inconsistent_edges,
            consistent: r.is_consistent(),
        }
    }
}

/// Pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| IoError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| IoError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Wall-clock time per pipeline phase, plus per-iteration progress logging.
#[derive(Debug, Default)]
pub struct PhaseTimer {
    totals: BTreeMap<Phase, Duration>,
    running: Option<(Phase, Instant)>,
    pub iterations: usize,
    pub total_iterations: usize,
    pub last_pass: Option<PassStats>,
}

impl PhaseTimer {
    pub fn new(total_iterations: usize) -> Self {
        PhaseTimer {
            total_iterations,
            ..Default::default()
        }
    }

    pub fn seconds(&self, phase: Phase) -> f64 {
        self.totals.get(&phase).map_or(0.0, Duration::as_secs_f64)
    }

    /// `neighborhood`, `envt`, `vertex_update` and their sum as `total`.
    pub fn timings_seconds(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = Phase::ALL
            .iter()
            .map(|&p| (p.name().to_string(), self.seconds(p)))
            .collect();
        let total = out.values().sum();
        out.insert("total".into(), total);
        out
    }
}

impl Observer for PhaseTimer {
    fn phase_started(&mut self, phase: Phase) {
        self.running = Some((phase, Instant::now()));
    }

    fn phase_finished(&mut self, phase: Phase) {
        if let Some((p, start)) = self.running.take() {
            debug_assert_eq!(p, phase);
            *self.totals.entry(phase).or_default() += start.elapsed();
        }
    }

    fn iteration_finished(&mut self, iteration: usize, _mesh: &TriMesh, stats: &PassStats) {
        self.iterations = iteration;
        self.last_pass = Some(*stats);
        log::info!(
            "iteration {iteration}/{}: {} planar, {} edge, {} corner faces",
            self.total_iterations,
            stats.planar,
            stats.edge,
            stats.corner
        );
        if stats.degenerate + stats.unusable + stats.zero_result > 0 {
            log::debug!(
                "iteration {iteration}: {} degenerate, {} unusable, {} zero-result faces kept their normals",
                stats.degenerate,
                stats.unusable,
                stats.zero_result
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use envt_core::{denoise_pipeline, shapes, DenoiseParams, Serial};

    #[test]
    fn report_keys_are_stable() {
        let r = MetricsReport {
            msae_degrees: Some(1.5),
            e_v: None,
            trace: vec![TraceRow {
                iteration: 1,
                msae_degrees: 2.0,
                e_v: Some(0.1),
            }],
            ..Default::default()
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["e_v", "msae_degrees", "timings_seconds", "trace"]);
        assert!(v["e_v"].is_null());
        assert_eq!(v["trace"][0]["msae_degrees"], 2.0);
    }

    #[test]
    fn timer_covers_every_phase() {
        let m = shapes::subdivided_cube(4, 1.0);
        let mut timer = PhaseTimer::new(3);
        denoise_pipeline(&m, &DenoiseParams::new(0.3, 0.3, 3), &Serial, &mut timer).unwrap();
        assert_eq!(timer.iterations, 3);
        let t = timer.timings_seconds();
        assert_eq!(t.len(), 4);
        let parts: f64 = Phase::ALL.iter().map(|&p| timer.seconds(p)).sum();
        assert!(t["total"] > 0.0 && (t["total"] - parts).abs() < 1e-12);
    }

    #[test]
    fn empty_mesh_timings_are_near_zero() {
        let m = TriMesh::new(vec![envt_core::Vec3::ZERO], vec![]).unwrap();
        let mut timer = PhaseTimer::new(2);
        denoise_pipeline(&m, &DenoiseParams::new(0.3, 0.3, 2), &Serial, &mut timer).unwrap();
        assert!(timer.timings_seconds()["total"] < 0.01);
    }
}
