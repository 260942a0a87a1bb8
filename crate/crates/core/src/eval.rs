//! Per-frame results, aggregate metrics, report tables and heatmap overlays.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::raster::{write_bytes, Raster};
use crate::trajectory::TrajectoryVerdict;

/// Error threshold for a frame to count as correct, px.
pub const WITHIN_PX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Learned,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Learned => "learned",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Baseline => "SIFT baseline",
            Method::Learned => "Learned (stack)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub id: String,
    pub method: Method,
    pub predicted_px: Option<(f64, f64)>,
    pub failure: Option<String>,
    pub truth_px: (f64, f64),
    /// Euclidean error, infinite on failure.
    pub error: f64,
}

impl FrameResult {
    pub fn predicted(id: impl Into<String>, method: Method, predicted: (f64, f64), truth: (f64, f64)) -> Self {
        let error = ((predicted.0 - truth.0).powi(2) + (predicted.1 - truth.1).powi(2)).sqrt();
        FrameResult {
            id: id.into(),
            method,
            predicted_px: Some(predicted),
            failure: None,
            truth_px: truth,
            error: if error.is_finite() { error } else { f64::INFINITY },
        }
    }

    pub fn failed(id: impl Into<String>, method: Method, reason: impl Into<String>, truth: (f64, f64)) -> Self {
        FrameResult {
            id: id.into(),
            method,
            predicted_px: None,
            failure: Some(reason.into()),
            truth_px: truth,
            error: f64::INFINITY,
        }
    }

    pub fn within(&self, px: f64) -> bool {
        self.error < px
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub n: usize,
    pub failures: usize,
    /// Mean over frames with finite error; absent when every frame failed.
    pub mean_px_error: Option<f64>,
    pub pct_within_10px: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub index: usize,
    pub method: Method,
    pub verdict: TrajectoryVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub title: String,
    pub methods: Vec<MethodSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectories: Vec<TrajectoryEntry>,
    /// Input name -> sha256 hex digest.
    pub provenance: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

pub fn summarize(method: Method, results: &[&FrameResult]) -> Result<MethodSummary> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let finite: Vec<f64> = results.iter().map(|r| r.error).filter(|e| e.is_finite()).collect();
    let within = results.iter().filter(|r| r.within(WITHIN_PX)).count();
    Ok(MethodSummary {
        method,
        n: results.len(),
        failures: results.iter().filter(|r| r.failure.is_some() || !r.error.is_finite()).count(),
        mean_px_error: (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64),
        pct_within_10px: 100.0 * within as f64 / results.len() as f64,
    })
}

/// Aggregate per method (baseline first, as in the tables).
pub fn compute_metrics(results: &[FrameResult]) -> Result<EvalReport> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut by: BTreeMap<Method, Vec<&FrameResult>> = BTreeMap::new();
    for r in results {
        by.entry(r.method).or_default().push(r);
    }
    let methods = by.iter().map(|(&m, rs)| summarize(m, rs)).collect::<Result<_>>()?;
    Ok(EvalReport {
        methods,
        ..EvalReport::default()
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

impl EvalReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            writeln!(out, "{}", self.title).unwrap();
        }
        let w = self.methods.iter().map(|m| m.method.label().len()).max().unwrap_or(0).max(6);
        writeln!(out, "{:w$} | {:>9} | {:>26} | {:>5} | {:>8}", "", "px-error", "frames with error < 10px", "n", "failures").unwrap();
        writeln!(out, "{}", "-".repeat(w + 64)).unwrap();
        for m in &self.methods {
            let err = m.mean_px_error.map_or("-".to_string(), |e| format!("{e:.2}px"));
            let pct = format!("{:.1}%", m.pct_within_10px);
            writeln!(out, "{:w$} | {:>9} | {:>26} | {:>5} | {:>8}", m.method.label(), err, pct, m.n, m.failures).unwrap();
        }
        if !self.trajectories.is_empty() {
            writeln!(out).unwrap();
            writeln!(out, "trajectory | method   | within 10px | longest miss run | verdict").unwrap();
            for t in &self.trajectories {
                writeln!(
                    out,
                    "{:>10} | {:8} | {:>10.1}% | {:>16} | {}",
                    t.index,
                    t.method.as_str(),
                    100.0 * t.verdict.fraction_within,
                    t.verdict.longest_failure_run,
                    if t.verdict.success { "success" } else { "failure" }
                )
                .unwrap();
            }
            for m in [Method::Baseline, Method::Learned] {
                let vs: Vec<_> = self.trajectories.iter().filter(|t| t.method == m).collect();
                if !vs.is_empty() {
                    let ok = vs.iter().filter(|t| t.verdict.success).count();
                    writeln!(out, "{}: {ok}/{} trajectories successful", m.label(), vs.len()).unwrap();
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Text table at `<stem>.txt` and JSON at `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_bytes(&dir.join(format!("{stem}.txt")), self.render_table().as_bytes())?;
        write_bytes(&dir.join(format!("{stem}.json")), self.to_json().as_bytes())
    }
}

/// Per-frame results as tab-separated text.
pub fn results_to_text(results: &[FrameResult]) -> String {
    let mut out = String::from("id\tmethod\tpred_u\tpred_v\ttruth_u\ttruth_v\terror\tfailure\n");
    for r in results {
        let (pu, pv) = r.predicted_px.map_or(("-".into(), "-".into()), |p| (format!("{:.4}", p.0), format!("{:.4}", p.1)));
        writeln!(
            out,
            "{}\t{}\t{pu}\t{pv}\t{:.4}\t{:.4}\t{:.4}\t{}",
            r.id,
            r.method.as_str(),
            r.truth_px.0,
            r.truth_px.1,
            r.error,
            r.failure.as_deref().unwrap_or("-")
        )
        .unwrap();
    }
    out
}

const TINT: [f64; 3] = [255.0, 230.0, 0.0];
const TINT_ALPHA: f64 = 0.6;
const MARKER: [u8; 3] = [255, 0, 0];
const MARKER_RADIUS: f64 = 2.5;

/// RGB overlay: grayscale `image`, each heatmap cell tinted yellow in
/// proportion to `likelihood / max`, truth marked with a red dot.
pub fn overlay_rgb(image: &Raster, heatmap: &[f64], grid: usize, truth_px: (f64, f64)) -> Result<Vec<u8>> {
    if grid == 0 || heatmap.len() != grid * grid || image.width % grid != 0 || image.height % grid != 0 {
        return Err(Error::ShapeMismatch(format!(
            "{}-cell heatmap on a {}x{} image",
            heatmap.len(),
            image.width,
            image.height
        )));
    }
    let max = heatmap.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let (cw, ch) = (image.width / grid, image.height / grid);
    let mut rgb = Vec::with_capacity(image.width * image.height * 3);
    for y in 0..image.height {
        for x in 0..image.width {
            let g = image.get(x, y).clamp(0.0, 1.0) as f64 * 255.0;
            let p = heatmap[(y / ch) * grid + x / cw];
            let a = if max > 0.0 && p.is_finite() { TINT_ALPHA * (p / max).clamp(0.0, 1.0) } else { 0.0 };
            let d2 = (x as f64 - truth_px.0).powi(2) + (y as f64 - truth_px.1).powi(2);
            if d2 <= MARKER_RADIUS * MARKER_RADIUS {
                rgb.extend_from_slice(&MARKER);
            } else {
                for t in TINT {
                    rgb.push(((1.0 - a) * g + a * t).round() as u8);
                }
            }
        }
    }
    Ok(rgb)
}

/// Write the overlay as PNG when `out_path` ends in `.png`, PPM otherwise.
pub fn render_overlay(image: &Raster, heatmap: &[f64], grid: usize, truth_px: (f64, f64), out_path: &Path) -> Result<()> {
    let rgb = overlay_rgb(image, heatmap, grid, truth_px)?;
    let (w, h) = (image.width as u32, image.height as u32);
    if out_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        image::save_buffer(out_path, &rgb, w, h, image::ExtendedColorType::Rgb8)
            .map_err(|e| Error::write_failure(out_path, e))
    } else {
        let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
        bytes.extend_from_slice(&rgb);
        write_bytes(out_path, &bytes)
    }
}
