//! Region maps and transition curves over the `(beta, e)` rectangle.
//!
//! Grid cells are independent work items, classified in parallel and
//! assembled in index order so the output is deterministic regardless of the
//! thread count. Curves are isolated per row by probing for the relevant
//! class window and bisecting its edges; the shared foot of the s- and
//! m-curves at `e = 0` is a tangency rather than a crossing, so that row
//! falls back to locating the boundary band and returning its center.

use crate::monodromy::{classify, MonodromyError, StabilityClass};
use rayon::prelude::*;
use thiserror::Error;

/// Bisection stops once the bracket is narrower than this.
const BISECT_WIDTH: f64 = 1e-10;
/// Probe ladders: points used to hunt for a class window inside a bracket.
const WINDOW_LADDER: [usize; 3] = [64, 256, 1024];
const BAND_LADDER: [usize; 2] = [512, 4096];

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("classification failed at (beta, e) = ({beta}, {e}): {source}")]
    Monodromy {
        beta: f64,
        e: f64,
        source: MonodromyError,
    },
    #[error("invalid scan range: {0}")]
    InvalidRange(String),
    #[error(
        "bracket [{beta_lo}, {beta_hi}] at e = {e} has equal classes ({class}) \
         and no interior transition"
    )]
    InvalidBracket {
        e: f64,
        beta_lo: f64,
        beta_hi: f64,
        class: &'static str,
    },
    #[error("bracket endpoint at (beta, e) = ({beta}, {e}) is BOUNDARY; nudge the bracket")]
    BoundaryEndpoint { beta: f64, e: f64 },
    #[error("curve {label} lost at e = {e}: no transition of the required type on this row")]
    CurveLoss { label: CurveLabel, e: f64 },
    #[error(
        "curve {label} jumps at e = {e}: |d beta| = {observed:.3e} exceeds 10x the secant \
         prediction {predicted:.3e}"
    )]
    CurveJump {
        label: CurveLabel,
        e: f64,
        observed: f64,
        predicted: f64,
    },
}

fn classify_at(beta: f64, e: f64) -> Result<StabilityClass, ScanError> {
    classify(beta, e).map_err(|source| ScanError::Monodromy { beta, e, source })
}

/// Stability classes on a rectangular grid, classes stored e-row-major.
#[derive(Debug, Clone)]
pub struct RegionMap {
    pub beta_grid: Vec<f64>,
    pub e_grid: Vec<f64>,
    classes: Vec<StabilityClass>,
}

impl RegionMap {
    pub fn class_at(&self, e_index: usize, beta_index: usize) -> StabilityClass {
        self.classes[e_index * self.beta_grid.len() + beta_index]
    }

    pub fn row(&self, e_index: usize) -> &[StabilityClass] {
        let n = self.beta_grid.len();
        &self.classes[e_index * n..(e_index + 1) * n]
    }

    /// CSV with header `beta,e,class`, one row per node, e-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,e,class\n");
        for (ie, &e) in self.e_grid.iter().enumerate() {
            for (ib, &beta) in self.beta_grid.iter().enumerate() {
                out.push_str(&format!("{beta:.12},{e:.12},{}\n", self.class_at(ie, ib)));
            }
        }
        out
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Classifies every node of the grid `beta_range x e_range`.
pub fn grid_scan(
    beta_range: (f64, f64),
    e_range: (f64, f64),
    n_beta: usize,
    n_e: usize,
) -> Result<RegionMap, ScanError> {
    if n_beta == 0 || n_e == 0 {
        return Err(ScanError::InvalidRange(
            "grid dimensions must be positive".into(),
        ));
    }
    if !(0.0..=9.0).contains(&beta_range.0)
        || !(0.0..=9.0).contains(&beta_range.1)
        || beta_range.0 > beta_range.1
    {
        return Err(ScanError::InvalidRange(format!(
            "beta range [{}, {}] outside [0, 9]",
            beta_range.0, beta_range.1
        )));
    }
    if !(0.0..=0.99).contains(&e_range.0)
        || !(0.0..=0.99).contains(&e_range.1)
        || e_range.0 > e_range.1
    {
        return Err(ScanError::InvalidRange(format!(
            "e range [{}, {}] outside [0, 0.99]",
            e_range.0, e_range.1
        )));
    }

    let beta_grid = linspace(beta_range.0, beta_range.1, n_beta);
    let e_grid = linspace(e_range.0, e_range.1, n_e);
    let classes: Result<Vec<StabilityClass>, ScanError> = (0..n_beta * n_e)
        .into_par_iter()
        .map(|idx| classify_at(beta_grid[idx % n_beta], e_grid[idx / n_beta]))
        .collect();
    Ok(RegionMap {
        beta_grid,
        e_grid,
        classes: classes?,
    })
}

/// Bisects on a boolean predicate of the class; `pred` must be false at `lo`
/// and true at `hi`. Returns the bracket midpoint at width < 1e-10.
fn bisect_predicate(
    e: f64,
    mut lo: f64,
    mut hi: f64,
    pred: impl Fn(&StabilityClass) -> bool,
) -> Result<f64, ScanError> {
    while hi - lo >= BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if pred(&classify_at(mid, e)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Probes the open bracket for any point whose class differs in kind from
/// `reference`. Probing is parallel; the reported point is the first such
/// index, so the result does not depend on thread scheduling.
fn find_differing_point(
    e: f64,
    lo: f64,
    hi: f64,
    reference: StabilityClass,
    ladder: &[usize],
) -> Result<Option<(f64, StabilityClass)>, ScanError> {
    for &n in ladder {
        let classes: Result<Vec<(f64, StabilityClass)>, ScanError> = (1..n)
            .into_par_iter()
            .map(|i| {
                let beta = lo + (hi - lo) * i as f64 / n as f64;
                classify_at(beta, e).map(|c| (beta, c))
            })
            .collect();
        if let Some(&found) = classes?.iter().find(|(_, c)| !c.same_kind(&reference)) {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Locates the class transition inside `[beta_lo, beta_hi]` at fixed `e`.
///
/// With differing endpoint classes this is plain bisection. Equal endpoint
/// classes are accepted only when an interior point of another class exists
/// (a transition band crossed twice, e.g. the tangency at the s/m foot on
/// the `e = 0` line); the returned point is then the center of that band.
pub fn transition_bisect(e: f64, beta_lo: f64, beta_hi: f64) -> Result<f64, ScanError> {
    let class_lo = classify_at(beta_lo, e)?;
    let class_hi = classify_at(beta_hi, e)?;
    if class_lo.is_boundary() {
        return Err(ScanError::BoundaryEndpoint { beta: beta_lo, e });
    }
    if class_hi.is_boundary() {
        return Err(ScanError::BoundaryEndpoint { beta: beta_hi, e });
    }

    if !class_lo.same_kind(&class_hi) {
        return bisect_predicate(e, beta_lo, beta_hi, |c| !c.same_kind(&class_lo));
    }

    match find_differing_point(e, beta_lo, beta_hi, class_lo, &BAND_LADDER)? {
        Some((inside, _)) => {
            let left = bisect_predicate(e, beta_lo, inside, |c| !c.same_kind(&class_lo))?;
            let right = bisect_predicate(e, inside, beta_hi, |c| c.same_kind(&class_hi))?;
            Ok(0.5 * (left + right))
        }
        None => Err(ScanError::InvalidBracket {
            e,
            beta_lo,
            beta_hi,
            class: class_lo.label(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CurveLabel {
    S,
    M,
    K,
}

impl std::fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveLabel::S => "s",
            CurveLabel::M => "m",
            CurveLabel::K => "k",
        })
    }
}

impl std::str::FromStr for CurveLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s" => Ok(CurveLabel::S),
            "m" => Ok(CurveLabel::M),
            "k" => Ok(CurveLabel::K),
            other => Err(format!(
                "unknown curve label '{other}' (expected s, m, or k)"
            )),
        }
    }
}

/// One transition curve as `(e, beta)` points with strictly increasing `e`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Curve {
    pub label: CurveLabel,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    /// CSV with header `e,beta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("e,beta\n");
        for &(e, beta) in &self.points {
            out.push_str(&format!("{e:.12},{beta:.12}\n"));
        }
        out
    }
}

/// Start-of-trace search window for the s/m pair (the curves stay well below
/// this for every supported eccentricity).
const SM_WINDOW: (f64, f64) = (1e-3, 2.0);

/// Finds the EH window `[gamma_s, gamma_m]` on one row, if resolvable.
fn eh_window_on_row(e: f64, window: (f64, f64)) -> Result<Option<(f64, f64)>, ScanError> {
    let (wlo, whi) = window;
    let is_eh = |c: &StabilityClass| matches!(c, StabilityClass::EH);
    for &n in WINDOW_LADDER.iter() {
        let classes: Result<Vec<(f64, StabilityClass)>, ScanError> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let beta = wlo + (whi - wlo) * i as f64 / n as f64;
                classify_at(beta, e).map(|c| (beta, c))
            })
            .collect();
        let classes = classes?;
        let Some(first) = classes.iter().position(|(_, c)| is_eh(c)) else {
            continue;
        };
        let last = classes.iter().rposition(|(_, c)| is_eh(c)).unwrap();
        // Bracket each edge against the nearest non-EH probe.
        let lo_bracket = if first == 0 {
            wlo
        } else {
            classes[first - 1].0
        };
        let hi_bracket = if last == n { whi } else { classes[last + 1].0 };
        let gamma_s = bisect_predicate(e, lo_bracket, classes[first].0, |c| is_eh(c))?;
        // For the right edge the predicate flips: EH on the left, not-EH on the right.
        let gamma_m = bisect_predicate(e, classes[last].0, hi_bracket, |c| !is_eh(c))?;
        return Ok(Some((gamma_s, gamma_m)));
    }
    Ok(None)
}

/// Center of the boundary band around a tangency (the shared s/m foot).
fn boundary_band_center(e: f64, window: (f64, f64)) -> Result<Option<f64>, ScanError> {
    let (wlo, whi) = window;
    let reference = classify_at(wlo, e)?;
    match find_differing_point(e, wlo, whi, reference, &BAND_LADDER)? {
        Some((inside, _)) => {
            let left = bisect_predicate(e, wlo, inside, |c| !c.same_kind(&reference))?;
            let right = bisect_predicate(e, inside, whi, |c| c.same_kind(&reference))?;
            Ok(Some(0.5 * (left + right)))
        }
        None => Ok(None),
    }
}

/// Traces one transition curve over the given ascending e-grid.
///
/// Rows where the relevant window is unresolvable at probe resolution
/// (the collapsed EH strip at `e = 0`) are retried after the main pass with
/// a window predicted from the nearest resolved rows.
pub fn trace_curve(label: CurveLabel, e_grid: &[f64]) -> Result<Curve, ScanError> {
    if e_grid.is_empty() {
        return Err(ScanError::InvalidRange("empty e-grid".into()));
    }
    if e_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ScanError::InvalidRange(
            "e-grid must be strictly increasing".into(),
        ));
    }
    if *e_grid.last().unwrap() > 0.95 || e_grid[0] < 0.0 {
        return Err(ScanError::InvalidRange(
            "trace e-grid must lie in [0, 0.95]".into(),
        ));
    }

    let mut betas: Vec<Option<f64>> = vec![None; e_grid.len()];

    if label == CurveLabel::K {
        // Single monotone predicate: the class leaves EE for the hyperbolic
        // side exactly once per row.
        for (i, &e) in e_grid.iter().enumerate() {
            let beta = bisect_predicate(e, 1e-3, 9.0, |c| c.is_hyperbolic())?;
            betas[i] = Some(beta);
        }
    } else {
        // First pass: rows where the EH strip is resolvable.
        let mut prev: Option<(f64, f64, f64)> = None; // (e, gamma_s, gamma_m)
        for (i, &e) in e_grid.iter().enumerate() {
            let window = match prev {
                Some((pe, ps, pm)) => {
                    let margin = (0.2 * (e - pe).max(0.02)).max(3.0 * (pm - ps));
                    ((ps - margin).max(1e-3), (pm + margin).min(9.0))
                }
                None => SM_WINDOW,
            };
            if let Some((gs, gm)) = eh_window_on_row(e, window)? {
                betas[i] = Some(if label == CurveLabel::S { gs } else { gm });
                prev = Some((e, gs, gm));
            }
        }
        // Second pass: collapsed rows, centered on the nearest resolved row.
        for i in 0..e_grid.len() {
            if betas[i].is_some() {
                continue;
            }
            let neighbor = betas
                .iter()
                .enumerate()
                .filter_map(|(j, b)| b.map(|v| (e_grid[j], v)))
                .min_by(|a, b| (a.0 - e_grid[i]).abs().total_cmp(&(b.0 - e_grid[i]).abs()));
            let Some((ne, nb)) = neighbor else {
                return Err(ScanError::CurveLoss {
                    label,
                    e: e_grid[i],
                });
            };
            let spread = 2.0 * (e_grid[i] - ne).abs().max(0.01);
            let window = ((nb - spread).max(1e-3), (nb + spread).min(9.0));
            match boundary_band_center(e_grid[i], window)? {
                Some(center) => betas[i] = Some(center),
                None => {
                    return Err(ScanError::CurveLoss {
                        label,
                        e: e_grid[i],
                    })
                }
            }
        }
    }

    let points: Vec<(f64, f64)> = e_grid
        .iter()
        .copied()
        .zip(betas.into_iter().map(Option::unwrap))
        .collect();

    // Smooth-continuation check: each increment stays within 10x the local
    // secant prediction (with a small absolute floor for flat stretches).
    for i in 2..points.len() {
        let de_prev = points[i - 1].0 - points[i - 2].0;
        let de = points[i].0 - points[i - 1].0;
        let predicted = (points[i - 1].1 - points[i - 2].1).abs() * de / de_prev;
        let observed = (points[i].1 - points[i - 1].1).abs();
        if observed > 10.0 * predicted.max(1e-3) {
            return Err(ScanError::CurveJump {
                label,
                e: points[i].0,
                observed,
                predicted,
            });
        }
    }

    Ok(Curve { label, points })
}

/// Least-squares line fit returning (intercept, slope).
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (sy / n - slope * sx / n, slope)
}
