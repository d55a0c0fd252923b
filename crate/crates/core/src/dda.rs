//! Generic discrete data assimilation driver.
//!
//! A reference trajectory U is observed through an orthogonal projection P
//! at schedule times t_n. The approximating solution runs freely between
//! observations and is reset at each t_n by replacing its observed
//! component: u_{n+1} = Q S(t_{n+1}, t_n, u_n) + P U(t_{n+1}), Q = I - P.
//! The driver tracks delta = U - u, classifies runs as converged /
//! diverged / undecided, searches for empirical critical update intervals
//! and monitors solution boundedness.

use crate::integrators::{partition, step, IntegrateError, OdeSystem, StateOps, StepperConfig};
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DdaError {
    #[error("schedule must contain at least two strictly increasing finite times")]
    InvalidSchedule,
    #[error("uniform schedule requires h > 0 and n_max >= 1 (got h = {h}, n_max = {n_max})")]
    InvalidUniformSchedule { h: f64, n_max: usize },
    #[error("reference trajectory blew up at t = {t}; reference states must lie on the attractor")]
    ReferenceBlowUp { t: f64 },
    #[error("invalid threshold bracket: need majority convergence at h_lo = {h_lo} and majority failure at h_hi = {h_hi}; widen the bracket")]
    InvalidThresholdBracket { h_lo: f64, h_hi: f64 },
    #[error("threshold search needs at least one reference state")]
    NoReferences,
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Finite-rank orthogonal projection P with complement Q = I - P.
/// Implementations must satisfy P P = P, P Q = 0 and <Pu, Qv> = 0.
pub trait ObservationOp<S> {
    fn project(&self, s: &S) -> S;
    fn complement(&self, s: &S) -> S;
}

/// P = I: full observation.
#[derive(Debug, Clone, Copy)]
pub struct IdentityObs;

impl<S: StateOps> ObservationOp<S> for IdentityObs {
    fn project(&self, s: &S) -> S {
        s.clone()
    }

    fn complement(&self, s: &S) -> S {
        let mut z = s.clone();
        z.scale(0.0);
        z
    }
}

/// P = 0: no observation, the model runs free.
#[derive(Debug, Clone, Copy)]
pub struct ZeroObs;

impl<S: StateOps> ObservationOp<S> for ZeroObs {
    fn project(&self, s: &S) -> S {
        let mut z = s.clone();
        z.scale(0.0);
        z
    }

    fn complement(&self, s: &S) -> S {
        s.clone()
    }
}

/// Norms the driver reports for a system's states.
pub trait DaSystem: OdeSystem {
    /// (|delta|, optional higher norm) for delta = reference - approx.
    fn error_norms(&self, reference: &Self::State, approx: &Self::State) -> (f64, Option<f64>);
    /// Norm tracked by the boundedness monitor (the norm the system's
    /// boundedness result is stated in).
    fn monitor_norm(&self, s: &Self::State) -> f64;
}

/// Observation times t_0 < t_1 < ... < t_N.
#[derive(Debug, Clone)]
pub enum Schedule {
    Uniform { h: f64, n_max: usize },
    Explicit(Vec<f64>),
}

impl Schedule {
    pub fn uniform(h: f64, n_max: usize) -> Result<Self, DdaError> {
        if !(h > 0.0) || !h.is_finite() || n_max == 0 {
            return Err(DdaError::InvalidUniformSchedule { h, n_max });
        }
        Ok(Schedule::Uniform { h, n_max })
    }

    pub fn explicit(times: Vec<f64>) -> Result<Self, DdaError> {
        if times.len() < 2
            || times.iter().any(|t| !t.is_finite())
            || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(DdaError::InvalidSchedule);
        }
        Ok(Schedule::Explicit(times))
    }

    /// Explicit schedule starting at 0 with gaps drawn uniformly from
    /// (0, h_max], extended until the span is covered.
    pub fn random_gaps<R: rand::Rng>(h_max: f64, span: f64, rng: &mut R) -> Result<Self, DdaError> {
        if !(h_max > 0.0) || !(span > 0.0) {
            return Err(DdaError::InvalidSchedule);
        }
        let mut times = vec![0.0];
        let mut t = 0.0;
        while t < span {
            let u: f64 = rng.gen::<f64>(); // [0, 1)
            let gap = h_max * (1.0 - u); // (0, h_max]
            t += gap;
            times.push(t);
        }
        Self::explicit(times)
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            Schedule::Uniform { h, n_max } => (0..=*n_max).map(|n| n as f64 * h).collect(),
            Schedule::Explicit(ts) => ts.clone(),
        }
    }

    pub fn span(&self) -> (f64, f64) {
        match self {
            Schedule::Uniform { h, n_max } => (0.0, *n_max as f64 * h),
            Schedule::Explicit(ts) => (ts[0], *ts.last().unwrap()),
        }
    }

    pub fn max_gap(&self) -> f64 {
        match self {
            Schedule::Uniform { h, .. } => *h,
            Schedule::Explicit(ts) => ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        }
    }
}

/// Initial guess eta for the unobserved part of the state, with
/// P eta = 0 enforced by construction (eta <- Q eta).
#[derive(Debug, Clone)]
pub struct InitialGuess<S>(S);

impl<S: StateOps> InitialGuess<S> {
    pub fn new<O: ObservationOp<S>>(eta: S, obs: &O) -> Self {
        Self(obs.complement(&eta))
    }

    /// eta = 0 (in the shape of `template`).
    pub fn zero_like(template: &S) -> Self {
        let mut z = template.clone();
        z.scale(0.0);
        Self(z)
    }

    pub fn state(&self) -> &S {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged => write!(f, "converged"),
            Verdict::Diverged => write!(f, "diverged"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

/// Verdict thresholds. These are reporting conventions, not analytic
/// quantities, and are recorded in every run's metadata.
#[derive(Debug, Clone, Copy)]
pub struct VerdictConfig {
    /// Converged once the error stays below tol_rel * initial error.
    pub tol_rel: f64,
    /// Diverged once the error exceeds blowup_factor * initial error.
    pub blowup_factor: f64,
    /// Fraction of the horizon (from the end) over which the error must
    /// dwell below the convergence threshold.
    pub dwell_fraction: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            tol_rel: 1e-6,
            blowup_factor: 1e3,
            dwell_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Step,
    Update,
}

#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub err_l2: f64,
    pub err_h1: Option<f64>,
    pub event: Event,
}

pub type RunMeta = BTreeMap<String, String>;

#[derive(Debug, Clone)]
pub struct ErrorSeries {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
    pub blowup_t: Option<f64>,
    /// sup of the monitor norm of the approximating solution over every
    /// integration substep and update instant.
    pub sup_sol_norm: f64,
    /// sup of the monitor norm of the reference over the same points.
    pub sup_ref_norm: f64,
    pub meta: RunMeta,
}

impl ErrorSeries {
    pub fn initial_err(&self) -> f64 {
        self.samples.first().map(|s| s.err_l2).unwrap_or(f64::NAN)
    }

    pub fn final_err(&self) -> f64 {
        self.samples.last().map(|s| s.err_l2).unwrap_or(f64::NAN)
    }

    /// initial / final error; infinite when the final error is zero.
    pub fn reduction(&self) -> f64 {
        let e0 = self.initial_err();
        let e1 = self.final_err();
        if e1 == 0.0 {
            if e0 == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            e0 / e1
        }
    }

    /// Number of updates until the error drops below tol_rel * initial and
    /// stays there for the rest of the run.
    pub fn updates_to_converge(&self, tol_rel: f64) -> Option<usize> {
        let thr = tol_rel * self.initial_err();
        let mut last_above: Option<f64> = None;
        for s in &self.samples {
            if s.err_l2 > thr {
                last_above = Some(s.t);
            }
        }
        let t_ok = last_above;
        let mut n = 0usize;
        for s in &self.samples {
            if s.event == Event::Update {
                if t_ok.map_or(true, |t| s.t > t) {
                    return Some(n);
                }
                n += 1;
            }
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub stepper: StepperConfig,
    pub verdict: VerdictConfig,
    /// Record an in-window error sample every this many integrator steps
    /// (None: record only at update instants). The boundedness monitor
    /// norm is tracked at every substep regardless.
    pub substep_stride: Option<usize>,
    /// Caller metadata merged into the run report.
    pub meta: RunMeta,
}

impl RunConfig {
    pub fn new(stepper: StepperConfig) -> Self {
        Self {
            stepper,
            verdict: VerdictConfig::default(),
            substep_stride: None,
            meta: RunMeta::new(),
        }
    }
}

/// One assimilation update: keep the unobserved component of the freely
/// integrated state and overwrite the observed component with the
/// reference's. Componentwise this is an assignment, so the observed part
/// matches the reference bitwise.
pub fn assimilate_step<S, O>(free: &S, obs: &O, reference_next: &S) -> S
where
    S: StateOps,
    O: ObservationOp<S>,
{
    let mut out = obs.complement(free);
    out.scaled_add(1.0, &obs.project(reference_next));
    out
}

/// Classify a finished error series.
pub fn detect_convergence(samples: &[Sample], cfg: &VerdictConfig, span: (f64, f64)) -> Verdict {
    if samples.is_empty() {
        return Verdict::Undecided;
    }
    let initial = samples[0].err_l2;
    let thr_div = cfg.blowup_factor * initial;
    if samples.iter().any(|s| s.err_l2 > thr_div) {
        return Verdict::Diverged;
    }
    let thr_conv = cfg.tol_rel * initial;
    let dwell_start = span.1 - cfg.dwell_fraction * (span.1 - span.0);
    let mut seen_tail = false;
    for s in samples {
        if s.t >= dwell_start {
            seen_tail = true;
            if s.err_l2 > thr_conv {
                return Verdict::Undecided;
            }
        }
    }
    if seen_tail {
        Verdict::Converged
    } else {
        Verdict::Undecided
    }
}

/// Run discrete data assimilation along `schedule`. The reference and the
/// approximating solution use the same integrator and step size, so the
/// reported error measures assimilation error rather than scheme mismatch.
/// A blow-up of the approximating solution yields a Diverged verdict with
/// the blow-up time; a blow-up of the reference is an error.
pub fn run<Sys, O>(
    sys: &mut Sys,
    reference0: &Sys::State,
    obs: &O,
    schedule: &Schedule,
    eta: &InitialGuess<Sys::State>,
    cfg: &RunConfig,
) -> Result<ErrorSeries, DdaError>
where
    Sys: DaSystem,
    O: ObservationOp<Sys::State>,
{
    let times = schedule.times();
    if times.len() < 2 {
        return Err(DdaError::InvalidSchedule);
    }
    if !(cfg.stepper.dt > 0.0) || !cfg.stepper.dt.is_finite() {
        return Err(DdaError::Integrate(IntegrateError::InvalidStep {
            dt: cfg.stepper.dt,
        }));
    }

    let mut u_ref = reference0.clone();
    // u_0 = eta + P U(t_0) with P eta = 0.
    let mut u = assimilate_step(eta.state(), obs, &u_ref);

    let mut samples = Vec::new();
    let (e_l2, e_h1) = sys.error_norms(&u_ref, &u);
    samples.push(Sample {
        t: times[0],
        err_l2: e_l2,
        err_h1: e_h1,
        event: Event::Update,
    });

    let mut sup_sol = sys.monitor_norm(&u);
    let mut sup_ref = sys.monitor_norm(&u_ref);
    let mut blowup_t = None;

    'windows: for w in times.windows(2) {
        let (t_n, t_np1) = (w[0], w[1]);
        let (n_full, rem) = partition(t_np1 - t_n, cfg.stepper.dt);
        let total = n_full + u64::from(rem > 0.0);
        for i in 0..total {
            let (dt_i, t_i) = if i < n_full {
                (cfg.stepper.dt, t_n + (i + 1) as f64 * cfg.stepper.dt)
            } else {
                (rem, t_np1)
            };
            let next_ref = step(sys, &u_ref, dt_i, cfg.stepper.scheme);
            if !next_ref.all_finite() {
                return Err(DdaError::ReferenceBlowUp { t: t_i });
            }
            u_ref = next_ref;
            sup_ref = sup_ref.max(sys.monitor_norm(&u_ref));

            let next = step(sys, &u, dt_i, cfg.stepper.scheme);
            if !next.all_finite() {
                blowup_t = Some(t_i);
                break 'windows;
            }
            u = next;
            sup_sol = sup_sol.max(sys.monitor_norm(&u));

            if let Some(k) = cfg.substep_stride {
                if k > 0 && (i + 1) % k as u64 == 0 && i + 1 < total {
                    let (e_l2, e_h1) = sys.error_norms(&u_ref, &u);
                    samples.push(Sample {
                        t: t_i,
                        err_l2: e_l2,
                        err_h1: e_h1,
                        event: Event::Step,
                    });
                }
            }
        }
        u = assimilate_step(&u, obs, &u_ref);
        sup_sol = sup_sol.max(sys.monitor_norm(&u));
        let (e_l2, e_h1) = sys.error_norms(&u_ref, &u);
        samples.push(Sample {
            t: t_np1,
            err_l2: e_l2,
            err_h1: e_h1,
            event: Event::Update,
        });
    }

    let span = (times[0], *times.last().unwrap());
    let verdict = if blowup_t.is_some() {
        Verdict::Diverged
    } else {
        detect_convergence(&samples, &cfg.verdict, span)
    };

    let mut meta = cfg.meta.clone();
    meta.insert("dt".into(), format!("{}", cfg.stepper.dt));
    meta.insert("scheme".into(), format!("{:?}", cfg.stepper.scheme));
    meta.insert(
        "schedule".into(),
        match schedule {
            Schedule::Uniform { h, n_max } => format!("uniform h={h} n_max={n_max}"),
            Schedule::Explicit(ts) => format!(
                "explicit n={} span=({},{}) max_gap={}",
                ts.len(),
                ts[0],
                ts.last().unwrap(),
                schedule.max_gap()
            ),
        },
    );
    meta.insert("verdict.tol_rel".into(), format!("{}", cfg.verdict.tol_rel));
    meta.insert(
        "verdict.blowup_factor".into(),
        format!("{}", cfg.verdict.blowup_factor),
    );
    meta.insert(
        "verdict.dwell_fraction".into(),
        format!("{}", cfg.verdict.dwell_fraction),
    );
    meta.insert("verdict".into(), verdict.to_string());
    if let Some(t) = blowup_t {
        meta.insert("blowup_t".into(), format!("{t}"));
    }

    Ok(ErrorSeries {
        samples,
        verdict,
        blowup_t,
        sup_sol_norm: sup_sol,
        sup_ref_norm: sup_ref,
        meta,
    })
}

/// Bisection for the empirical critical update interval, driven by an
/// arbitrary majority-verdict probe. Returns (h_conv, h_div) with the
/// probe converging at h_conv, failing at h_div, and h_div - h_conv at or
/// below `resolution`.
pub fn threshold_search_by<F>(
    mut probe: F,
    h_lo: f64,
    h_hi: f64,
    resolution: f64,
) -> Result<(f64, f64, Vec<(f64, bool)>), DdaError>
where
    F: FnMut(f64) -> bool,
{
    let mut probes = Vec::new();
    let ok_lo = probe(h_lo);
    probes.push((h_lo, ok_lo));
    let ok_hi = probe(h_hi);
    probes.push((h_hi, ok_hi));
    if !ok_lo || ok_hi {
        return Err(DdaError::InvalidThresholdBracket { h_lo, h_hi });
    }
    let (mut lo, mut hi) = (h_lo, h_hi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        let ok = probe(mid);
        probes.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi, probes))
}

#[derive(Debug, Clone)]
pub struct ThresholdConfig {
    /// Final bracket width; defaults to (h_hi - h_lo) / 32.
    pub resolution: Option<f64>,
    /// Horizon (time units) of each probe run.
    pub horizon: f64,
    pub run: RunConfig,
}

#[derive(Debug, Clone)]
pub struct ThresholdProbe {
    pub h: f64,
    pub converged: usize,
    pub total: usize,
}

#[derive(Debug, Clone)]
pub struct ThresholdBracket {
    pub h_conv: f64,
    pub h_div: f64,
    pub probes: Vec<ThresholdProbe>,
}

/// Bisection for the critical update interval of a concrete system, with
/// a majority verdict over the supplied reference states (eta = 0). Near
/// the critical interval the outcome is trajectory-dependent, hence the
/// majority vote.
pub fn threshold_search<Sys, O>(
    sys: &mut Sys,
    references: &[Sys::State],
    obs: &O,
    h_lo: f64,
    h_hi: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdBracket, DdaError>
where
    Sys: DaSystem,
    O: ObservationOp<Sys::State>,
{
    if references.is_empty() {
        return Err(DdaError::NoReferences);
    }
    let resolution = cfg.resolution.unwrap_or((h_hi - h_lo) / 32.0);
    let mut detail: Vec<ThresholdProbe> = Vec::new();
    let mut failed: Option<DdaError> = None;
    let (h_conv, h_div, _) = {
        let probe = |h: f64| -> bool {
            if failed.is_some() {
                return false;
            }
            let n_max = (cfg.horizon / h).ceil().max(1.0) as usize;
            let schedule = match Schedule::uniform(h, n_max) {
                Ok(s) => s,
                Err(e) => {
                    failed = Some(e);
                    return false;
                }
            };
            let mut converged = 0;
            for r in references {
                let eta = InitialGuess::zero_like(r);
                match run(sys, r, obs, &schedule, &eta, &cfg.run) {
                    Ok(series) => {
                        if series.verdict == Verdict::Converged {
                            converged += 1;
                        }
                    }
                    Err(e) => {
                        failed = Some(e);
                        return false;
                    }
                }
            }
            detail.push(ThresholdProbe {
                h,
                converged,
                total: references.len(),
            });
            2 * converged > references.len()
        };
        threshold_search_by(probe, h_lo, h_hi, resolution)?
    };
    if let Some(e) = failed {
        return Err(e);
    }
    Ok(ThresholdBracket {
        h_conv,
        h_div,
        probes: detail,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BoundednessReport {
    /// sup of the monitor norm over all sampled instants of the run.
    pub sup_norm: f64,
    pub bound: f64,
    pub within: bool,
}

/// Compare the run's monitor-norm sup against an analytic bound.
pub fn boundedness_monitor(series: &ErrorSeries, bound: f64) -> BoundednessReport {
    let sup_norm = series.sup_sol_norm;
    BoundednessReport {
        sup_norm,
        bound,
        within: sup_norm <= bound,
    }
}

/// Write an error series as CSV: metadata as `# key=value` comment lines,
/// a header row, then one row per sample. The err_h1 column is present
/// only when the system reports a higher norm.
pub fn write_error_series_csv<W: Write>(w: &mut W, series: &ErrorSeries) -> io::Result<()> {
    for (k, v) in &series.meta {
        writeln!(w, "# {k}={v}")?;
    }
    let with_h1 = series.samples.first().map_or(false, |s| s.err_h1.is_some());
    if with_h1 {
        writeln!(w, "t,err_l2,err_h1,event")?;
    } else {
        writeln!(w, "t,err_l2,event")?;
    }
    for s in &series.samples {
        let event = match s.event {
            Event::Step => "step",
            Event::Update => "update",
        };
        if with_h1 {
            writeln!(
                w,
                "{},{},{},{}",
                s.t,
                s.err_l2,
                s.err_h1.unwrap_or(f64::NAN),
                event
            )?;
        } else {
            writeln!(w, "{},{},{}", s.t, s.err_l2, event)?;
        }
    }
    Ok(())
}

/// Read back a CSV produced by [`write_error_series_csv`]: returns the
/// metadata and samples.
pub fn read_error_series_csv<R: BufRead>(r: R) -> io::Result<(RunMeta, Vec<Sample>)> {
    let mut meta = RunMeta::new();
    let mut samples = Vec::new();
    let mut with_h1 = false;
    let mut header_seen = false;
    let bad = |line: &str| io::Error::new(io::ErrorKind::InvalidData, format!("bad line: {line}"));
    for line in r.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if !header_seen {
            with_h1 = line.split(',').any(|c| c == "err_h1");
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let expected = if with_h1 { 4 } else { 3 };
        if cols.len() != expected {
            return Err(bad(&line));
        }
        let t: f64 = cols[0].parse().map_err(|_| bad(&line))?;
        let err_l2: f64 = cols[1].parse().map_err(|_| bad(&line))?;
        let err_h1 = if with_h1 {
            Some(cols[2].parse().map_err(|_| bad(&line))?)
        } else {
            None
        };
        let event = match *cols.last().unwrap() {
            "step" => Event::Step,
            "update" => Event::Update,
            _ => return Err(bad(&line)),
        };
        samples.push(Sample {
            t,
            err_l2,
            err_h1,
            event,
        });
    }
    Ok((meta, samples))
}
