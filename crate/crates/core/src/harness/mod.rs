//! Monte Carlo experiments: configuration, shot workers, fits and the
//! results document.

pub mod engine;
pub mod fit;
pub mod scheduler;
pub mod sweep;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::decoders::InnerKind;
use crate::error::{Error, Result};
use crate::surface_code::BoundaryState;
use crate::windows::{CoreStyle, ScheduleParams, Scheme};
use engine::{build_graphs, decoder_set, CellEngine, WindowClock, WindowTiming};
use fit::{crossing_point, fit_logical_rate, upper_bound, FitResult, NPoint};

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the number of shot workers.
pub const WORKERS_ENV: &str = "SANDWICH_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distances: Vec<usize>,
    pub error_rates: Vec<f64>,
    pub scheme: Scheme,
    pub inner: InnerKind,
    /// Step size; defaults to `(d + 1) / 2`.
    pub step: Option<usize>,
    /// Buffer size; defaults to `s` for sandwich and `2s` for forward.
    pub buffer: Option<usize>,
    /// Window size, an alternative to `buffer`.
    pub window: Option<usize>,
    pub seam_offset: i64,
    pub core_style: CoreStyle,
    /// Condition on window sides that are not a time boundary of the
    /// experiment.
    pub artificial_boundary: BoundaryState,
    pub shots: u64,
    /// Cycle counts are `floor(k s / 2)` for `k` in this inclusive range.
    pub k_range: (usize, usize),
    /// Explicit cycle counts, replacing the `k` grid.
    pub rounds: Option<Vec<usize>>,
    pub seed: u64,
    /// Threads decoding shots.
    pub workers: usize,
    /// Threads decoding the windows of one shot.
    pub window_workers: usize,
    pub output: Option<PathBuf>,
    /// Optional per-shot failure dump.
    pub shot_dump: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            distances: vec![3],
            error_rates: vec![0.005],
            scheme: Scheme::Sandwich,
            inner: InnerKind::Uf,
            step: None,
            buffer: None,
            window: None,
            seam_offset: 0,
            core_style: CoreStyle::default(),
            artificial_boundary: BoundaryState::Open,
            shots: 10_000,
            k_range: (8, 20),
            rounds: None,
            seed: 0,
            workers: 1,
            window_workers: 1,
            output: None,
            shot_dump: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn step_for(&self, d: usize) -> usize {
        self.step.unwrap_or(d.div_ceil(2))
    }

    pub fn params_for(&self, d: usize) -> Result<ScheduleParams> {
        let s = self.step_for(d);
        let params = match self.scheme {
            Scheme::Batch => ScheduleParams::batch(),
            scheme => {
                let default_b = if scheme == Scheme::Sandwich { s } else { 2 * s };
                let params = match (self.buffer, self.window) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config("give either a buffer size or a window size, not both".into()))
                    }
                    (None, Some(w)) => ScheduleParams::from_window(scheme, w, s, self.seam_offset)?,
                    (b, None) if scheme == Scheme::Sandwich => {
                        ScheduleParams::sandwich(s, b.unwrap_or(default_b), self.seam_offset)?
                    }
                    (b, None) => ScheduleParams::forward(s, b.unwrap_or(default_b))?,
                };
                params
                    .with_core_style(self.core_style)
                    .with_artificial_boundary(self.artificial_boundary)
            }
        };
        params.validate()?;
        Ok(params)
    }

    /// Cycle counts for distance `d`, ascending and distinct.
    pub fn rounds_for(&self, d: usize) -> Vec<usize> {
        let mut rounds = match &self.rounds {
            Some(r) => r.clone(),
            None => {
                let s = self.step_for(d);
                (self.k_range.0..=self.k_range.1).map(|k| k * s / 2).collect()
            }
        };
        rounds.sort_unstable();
        rounds.dedup();
        rounds
    }

    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() || self.error_rates.is_empty() {
            return Err(Error::Config("need at least one distance and one error rate".into()));
        }
        for &d in &self.distances {
            if d < 3 || d % 2 == 0 {
                return Err(Error::InvalidDistance(d));
            }
            self.params_for(d)?;
            let rounds = self.rounds_for(d);
            if rounds.is_empty() || rounds[0] == 0 {
                return Err(Error::Config(format!("cycle counts for d={d} must be positive, got {rounds:?}")));
            }
            if rounds.len() > 64 {
                return Err(Error::Config(format!("at most 64 cycle counts, got {}", rounds.len())));
            }
        }
        for &p in &self.error_rates {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidErrorRate(p));
            }
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.k_range.0 > self.k_range.1 {
            return Err(Error::Config(format!("empty k range {:?}", self.k_range)));
        }
        if self.workers == 0 || self.window_workers == 0 {
            return Err(Error::Config("worker counts must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies the worker-count environment override, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            self.workers = v
                .trim()
                .parse()
                .ok()
                .filter(|&w: &usize| w > 0)
                .ok_or_else(|| Error::Config(format!("{WORKERS_ENV}={v} is not a positive integer")))?;
        }
        Ok(())
    }
}

/// Failures at one cycle count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundCount {
    pub n: usize,
    pub shots: u64,
    pub failures: u64,
    pub p_hat: f64,
    /// One-sided 95% upper bound.
    pub upper_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStats {
    pub windows: usize,
    pub type1_windows: usize,
    pub critical_path: usize,
    /// Window decodes per shot with reuse across cycle counts.
    pub decodes_per_shot: usize,
    /// Window decodes per shot if every cycle count were decoded alone.
    pub decodes_without_reuse: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub wall_seconds: f64,
    pub graph_seconds: f64,
    pub shots_per_second: f64,
    pub windows: Vec<WindowTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub d: usize,
    pub p: f64,
    pub params: ScheduleParams,
    pub seed: u64,
    pub shots: u64,
    pub counts: Vec<RoundCount>,
    pub fit: Option<FitResult>,
    pub fit_error: Option<String>,
    pub schedule: ScheduleStats,
    pub timing: CellTiming,
    /// Per-shot failure bits, bit `i` for the `i`-th cycle count.
    #[serde(skip)]
    pub shot_failures: Vec<u64>,
}

impl CellResult {
    pub fn p_l(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.p_l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub generator: String,
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
    /// Median crossing of the fitted curves of adjacent distances.
    pub crossing: Option<f64>,
    pub wall_seconds: f64,
}

impl ResultsDocument {
    pub fn cell(&self, d: usize, p: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.d == d && c.p == p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultsDocument = serde_json::from_str(text)?;
        if doc.schema_version != RESULTS_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "results schema version {} (expected {RESULTS_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    /// One row per `(d, p)` with the fitted rate.
    pub fn fit_csv(&self) -> String {
        let mut out = String::from("d,p,scheme,inner,s,b,w,t,artificial_boundary,shots,p_l,p_l_low,p_l_high,std_err,q\n");
        for c in &self.cells {
            let (p_l, lo, hi, se, q) = match &c.fit {
                Some(f) => (f.p_l, f.interval.0, f.interval.1, f.std_err, f.q),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.d,
                c.p,
                c.params.scheme,
                self.config.inner,
                c.params.s,
                c.params.b,
                c.params.w,
                c.params.t,
                boundary_name(c.params.artificial_boundary),
                c.shots,
                p_l,
                lo,
                hi,
                se,
                q
            );
        }
        out
    }

    /// One row per `(d, p, n)`.
    pub fn counts_csv(&self) -> String {
        let mut out = String::from("d,p,n,shots,failures,p_hat,upper_95\n");
        for c in &self.cells {
            for r in &c.counts {
                let _ = writeln!(out, "{},{},{},{},{},{},{}", c.d, c.p, r.n, r.shots, r.failures, r.p_hat, r.upper_95);
            }
        }
        out
    }

    /// `seed,d,p,shot,n,failed` lines for every shot and cycle count.
    pub fn shot_dump(&self) -> String {
        let mut out = String::from("seed,d,p,shot,n,failed\n");
        for c in &self.cells {
            for (shot, bits) in c.shot_failures.iter().enumerate() {
                for (i, r) in c.counts.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{},{shot},{},{}", c.seed, c.d, c.p, r.n, bits >> i & 1);
                }
            }
        }
        out
    }

    /// Writes `<stem>.json`, `<stem>.csv` and `<stem>_counts.csv`.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let json = path.with_extension("json");
        let csv = path.with_extension("csv");
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
        let counts = path.with_file_name(format!("{stem}_counts.csv"));
        std::fs::write(&json, self.to_json()?)?;
        std::fs::write(&csv, self.fit_csv())?;
        std::fs::write(&counts, self.counts_csv())?;
        Ok(vec![json, csv, counts])
    }
}

fn boundary_name(b: BoundaryState) -> &'static str {
    match b {
        BoundaryState::Open => "open",
        BoundaryState::Closed => "closed",
    }
}

/// Runs `shots` shots of one cell across `workers` threads.
pub fn run_cell(config: &ExperimentConfig, d: usize, p: f64) -> Result<CellResult> {
    let params = config.params_for(d)?;
    let rounds = config.rounds_for(d);
    let started = Instant::now();
    let graphs = build_graphs(d, p, &rounds)?;
    let graph_seconds = started.elapsed().as_secs_f64();
    let engine = CellEngine::new(&graphs, &params, config.seed, config.window_workers)?;
    let (fresh, total) = engine.decode_counts();
    let longest = engine.longest();
    let schedule = ScheduleStats {
        windows: longest.schedule.len(),
        type1_windows: longest.schedule.num_type1(),
        critical_path: longest.schedule.critical_path(),
        decodes_per_shot: fresh,
        decodes_without_reuse: total,
    };

    let shots = config.shots;
    let next = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let bits: Vec<AtomicU64> = (0..shots).map(|_| AtomicU64::new(0)).collect();
    let clocks: Mutex<WindowClock> = Mutex::new(WindowClock::default());
    const CHUNK: u64 = 16;
    let decode_started = Instant::now();
    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(shots as usize).max(1) {
            scope.spawn(|| {
                let mut decoders = decoder_set(config.inner, config.window_workers);
                let mut clock = WindowClock::default();
                'work: while !stop.load(Ordering::Relaxed) {
                    let first = next.fetch_add(CHUNK, Ordering::Relaxed);
                    if first >= shots {
                        break;
                    }
                    for shot in first..(first + CHUNK).min(shots) {
                        match engine.run_shot(shot, &mut decoders, &mut clock) {
                            Ok((outcome, _)) => bits[shot as usize].store(outcome.failures, Ordering::Relaxed),
                            Err(e) => {
                                stop.store(true, Ordering::Relaxed);
                                failure.lock().expect("error slot").get_or_insert(e);
                                break 'work;
                            }
                        }
                    }
                }
                clocks.lock().expect("clock lock").merge(&clock);
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("error slot") {
        return Err(e);
    }
    let decode_seconds = decode_started.elapsed().as_secs_f64();
    let shot_failures: Vec<u64> = bits.into_iter().map(AtomicU64::into_inner).collect();

    let counts: Vec<RoundCount> = rounds
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let failures = shot_failures.iter().filter(|&&b| b >> i & 1 == 1).count() as u64;
            RoundCount {
                n,
                shots,
                failures,
                p_hat: failures as f64 / shots as f64,
                upper_95: upper_bound(failures, shots),
            }
        })
        .collect();
    let points: Vec<NPoint> = counts.iter().map(|c| NPoint::from_counts(c.n, c.shots, c.failures)).collect();
    let (fit, fit_error) = match fit_logical_rate(d, &points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let clock = clocks.into_inner().expect("clock lock");
    let wall_seconds = started.elapsed().as_secs_f64();
    info!(
        "d={d} p={p} {}: {shots} shots in {wall_seconds:.1}s, p_L(d)={}",
        params.scheme,
        fit.as_ref().map_or("n/a".to_string(), |f| format!("{:.3e}", f.p_l))
    );
    Ok(CellResult {
        d,
        p,
        params,
        seed: config.seed,
        shots,
        counts,
        fit,
        fit_error,
        schedule,
        timing: CellTiming {
            wall_seconds,
            graph_seconds,
            shots_per_second: shots as f64 / decode_seconds.max(1e-12),
            windows: clock.timings(),
        },
        shot_failures,
    })
}

/// Runs every `(d, p)` cell of the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsDocument> {
    config.validate()?;
    let started = Instant::now();
    let mut cells = Vec::new();
    for &d in &config.distances {
        for &p in &config.error_rates {
            cells.push(run_cell(config, d, p)?);
        }
    }
    let series: Vec<(usize, Vec<(f64, f64)>)> = config
        .distances
        .iter()
        .map(|&d| {
            let pts = cells
                .iter()
                .filter(|c| c.d == d)
                .filter_map(|c| Some((c.p, c.p_l()?)))
                .collect();
            (d, pts)
        })
        .collect();
    let doc = ResultsDocument {
        schema_version: RESULTS_SCHEMA_VERSION,
        generator: format!("sandwich-core {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        crossing: crossing_point(&series),
        cells,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(path) = &config.output {
        doc.write(path)?;
    }
    if let Some(path) = &config.shot_dump {
        std::fs::write(path, doc.shot_dump())?;
    }
    Ok(doc)
}
