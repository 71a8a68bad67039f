use serde::Serialize;

use super::config::{ConfigEnumeration, ConfigMode, EffectiveCouplings, Reductions};
use super::levels::{binomial, semiclassical_level, SemiclassicalLevel};
use crate::error::{Error, Result};
use crate::exact::ground_state_energy;
use crate::model::{Alpha, Boundary, ChainSpec};

/// Semiclassical levels whose landscape has a minimum branch.
///
/// `EpsOnly` is sufficient for the lowest level: every landscape energy
/// decreases with both the coupling and the slope, and the slope is maximal
/// (1) for `xi = +1`, `l = S`. Wider modes are an opt-in full search.
pub fn stable_levels(spec: &ChainSpec, mode: ConfigMode) -> Result<Vec<SemiclassicalLevel>> {
    let e = ConfigEnumeration::new(
        spec,
        mode,
        Reductions {
            global_flip: true,
            mirror: true,
        },
    )?;
    e.distinct(spec.coupling())
        .iter()
        .filter(|c| c.stable)
        .map(|c| semiclassical_level(c)?.for_chain(spec))
        .collect()
}

/// Lowest semiclassical total energy over `levels` at field `b`.
pub fn lowest_semiclassical(levels: &[SemiclassicalLevel], b: f64) -> Option<f64> {
    levels
        .iter()
        .map(|l| l.total_energy(b))
        .min_by(f64::total_cmp)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub b: f64,
    pub exact: f64,
    pub semiclassical: f64,
    /// `(E_semiclassical - E_exact) / |E_exact|`
    pub d: f64,
}

/// Relative deviation of the semiclassical ground level from the exact ground
/// energy along a field grid.
pub fn deviation(spec: &ChainSpec, b_grid: &[f64]) -> Result<Vec<DeviationPoint>> {
    deviation_with_mode(spec, b_grid, ConfigMode::EpsOnly)
}

pub fn deviation_with_mode(
    spec: &ChainSpec,
    b_grid: &[f64],
    mode: ConfigMode,
) -> Result<Vec<DeviationPoint>> {
    use rayon::prelude::*;
    spec.finite_sites()?;
    if b_grid.is_empty() {
        return Err(Error::InvalidSpec("field grid is empty".into()));
    }
    let levels = stable_levels(spec, mode)?;
    if levels.is_empty() {
        return Err(Error::Precondition(
            "no configuration of this chain has a minimum branch".into(),
        ));
    }
    b_grid
        .par_iter()
        .enumerate()
        .map(|(i, &b)| {
            let point = spec.with_field(b);
            let exact = ground_state_energy(&point).map_err(|e| Error::at(i, e))?;
            let semi = lowest_semiclassical(&levels, b).expect("levels nonempty");
            if exact.abs() < 1e-12 {
                return Err(Error::at(i, Error::UndefinedPoint { b, e0: exact }));
            }
            Ok(DeviationPoint {
                b,
                exact,
                semiclassical: semi,
                d: (semi - exact) / exact.abs(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramSource {
    /// Closed-form level tables (all-to-all or nearest-neighbour couplings).
    Analytic,
    /// Enumeration of the `eps` configurations.
    Enumerated,
}

/// Log-binned histogram of bifurcation fields.
///
/// Two weightings are kept side by side: `counts` counts configurations,
/// `level_counts` counts each distinct `(j_mu, slope)` pair once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationHistogram {
    /// `counts.len() + 1` ascending edges, `10^(i / bins_per_decade)`.
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub level_counts: Vec<f64>,
    pub bins_per_decade: u32,
    pub stable_only: bool,
    pub source: HistogramSource,
    /// Contributing configurations (sum of `counts`).
    pub configurations: f64,
    /// Contributing distinct levels (sum of `level_counts`).
    pub levels: usize,
}

impl BifurcationHistogram {
    /// Geometric centre of the bin with the largest count under the chosen
    /// weighting.
    pub fn peak(&self, by_level: bool) -> Option<f64> {
        let c = if by_level {
            &self.level_counts
        } else {
            &self.counts
        };
        let (i, _) = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
        Some((self.edges[i] * self.edges[i + 1]).sqrt())
    }
}

/// Distinct couplings with multiplicities, separated into the `eps` part
/// (coupling) and the `xi` part (slope). With every length at `S` the
/// coupling depends on `eps` only and the slope on `xi` only, so the
/// `4^N` family is their Cartesian product.
fn factor_tables(
    spec: &ChainSpec,
) -> Result<(Vec<(f64, u128)>, Vec<(f64, u128)>, HistogramSource)> {
    let n = spec.finite_sites()?;
    let j0 = spec.coupling();
    let nf = n as f64;
    let slopes = (0..=n)
        .map(|k| Ok(((nf - 2.0 * k as f64) / nf, binomial(n as u64, k as u64)?)))
        .collect::<Result<Vec<_>>>()?;
    let analytic = n >= 2
        && match spec.alpha {
            Alpha::Finite(a) => a == 0.0,
            Alpha::Infinite => spec.boundary == Boundary::Open,
        };
    let couplings = if analytic {
        if spec.alpha.is_infinite() {
            // j = J0 (N - 1 - 2r) / N over r domain walls
            (0..n)
                .map(|r| {
                    Ok((
                        j0 * (nf - 1.0 - 2.0 * r as f64) / nf,
                        2 * binomial(n as u64 - 1, r as u64)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            // j = (J0 / 2N) [(N - 2s)^2 - N] over s inverted spins
            let mut t: Vec<(i64, u128)> = Vec::new();
            for s in 0..=n {
                let m = n as i64 - 2 * s as i64;
                let key = m * m - n as i64;
                let d = binomial(n as u64, s as u64)?;
                match t.iter_mut().find(|(k, _)| *k == key) {
                    Some(e) => e.1 += d,
                    None => t.push((key, d)),
                }
            }
            t.into_iter()
                .map(|(k, d)| (j0 * k as f64 / (2.0 * nf), d))
                .collect()
        }
    } else {
        ConfigEnumeration::new(spec, ConfigMode::EpsOnly, Reductions::default())?
            .distinct(j0)
            .into_iter()
            .map(|c| (c.j_mu, c.multiplicity))
            .collect()
    };
    let source = if analytic {
        HistogramSource::Analytic
    } else {
        HistogramSource::Enumerated
    };
    Ok((couplings, slopes, source))
}

/// Bifurcation fields `2|j| / |slope|` of all levels of the four-orientation
/// family (lengths at `S`), as `(b_c, configurations, stable)` triples, one
/// per distinct level.
pub fn bifurcation_points(spec: &ChainSpec) -> Result<(Vec<(f64, f64, bool)>, HistogramSource)> {
    let (couplings, slopes, source) = factor_tables(spec)?;
    let mut out = Vec::new();
    for &(j, dj) in &couplings {
        for &(s, ds) in &slopes {
            let c = EffectiveCouplings::new(j, s, 0);
            if let Ok(level) = semiclassical_level(&c) {
                out.push((level.b_c, dj as f64 * ds as f64, c.stable));
            }
        }
    }
    Ok((out, source))
}

pub fn bifurcation_histogram(
    spec: &ChainSpec,
    bins_per_decade: u32,
    stable_only: bool,
) -> Result<BifurcationHistogram> {
    if bins_per_decade == 0 {
        return Err(Error::InvalidSpec(
            "bins_per_decade must be positive".into(),
        ));
    }
    let (points, source) = bifurcation_points(spec)?;
    let points: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(_, _, stable)| stable || !stable_only)
        .map(|(b, w, _)| (b, w))
        .collect();
    let bpd = bins_per_decade as f64;
    let bin = |b: f64| (b.log10() * bpd).floor() as i64;
    let (lo, hi) = match (
        points.iter().map(|p| bin(p.0)).min(),
        points.iter().map(|p| bin(p.0)).max(),
    ) {
        (Some(lo), Some(hi)) => (lo - 1, hi + 1),
        _ => (-1, 1),
    };
    let nbins = (hi - lo + 1) as usize;
    let mut counts = vec![0.0; nbins];
    let mut level_counts = vec![0.0; nbins];
    for &(b, w) in &points {
        let i = (bin(b) - lo) as usize;
        counts[i] += w;
        level_counts[i] += 1.0;
    }
    let edges = (lo..=hi + 1).map(|i| 10f64.powf(i as f64 / bpd)).collect();
    Ok(BifurcationHistogram {
        edges,
        configurations: counts.iter().sum(),
        levels: points.len(),
        counts,
        level_counts,
        bins_per_decade,
        stable_only,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::config::enumerate_configs;
    use approx::assert_relative_eq;

    #[test]
    fn two_site_deviation() {
        let spec = ChainSpec::new(2, 1, Alpha::Finite(1.0), 1.0, 0.0);
        let d = deviation(&spec, &[0.0, 1.0]).unwrap();
        assert!(d[0].d.abs() < 1e-14);
        let r5 = 5f64.sqrt();
        assert_relative_eq!(d[1].d, (r5 - 2.0) / r5, max_relative = 1e-12);
        assert!(deviation(&spec.with_j0(0.0), &[0.0]).is_err());
    }

    #[test]
    fn ising_endpoint_bifurcation() {
        let spec = ChainSpec::new(20, 1, Alpha::Infinite, 1.0, 0.0);
        let (pts, source) = bifurcation_points(&spec).unwrap();
        assert_eq!(source, HistogramSource::Analytic);
        // all-equal configuration: j = J0 (N-1)/N, slope 1
        assert!(pts.iter().any(|p| p.2 && (p.0 - 1.9).abs() < 1e-14));
    }

    #[test]
    fn analytic_matches_enumeration() {
        for alpha in [Alpha::Finite(0.0), Alpha::Infinite] {
            for j0 in [1.0, -1.0] {
                let spec = ChainSpec::new(7, 1, alpha, j0, 0.0);
                let (mut fast, s) = bifurcation_points(&spec).unwrap();
                assert_eq!(s, HistogramSource::Analytic);
                let mut brute: Vec<(f64, f64, bool)> = Vec::new();
                for (_, c) in
                    enumerate_configs(&spec, ConfigMode::EpsXi, Reductions::default()).unwrap()
                {
                    if let Ok(l) = semiclassical_level(&c) {
                        match brute
                            .iter_mut()
                            .find(|p| (p.0 - l.b_c).abs() < 1e-12 && p.2 == c.stable)
                        {
                            Some(p) => p.1 += 1.0,
                            None => brute.push((l.b_c, 1.0, c.stable)),
                        }
                    }
                }
                // Merge the fast points by field as well, then compare totals.
                let mut merged: Vec<(f64, f64, bool)> = Vec::new();
                for p in fast.drain(..) {
                    match merged
                        .iter_mut()
                        .find(|q| (q.0 - p.0).abs() < 1e-12 && q.2 == p.2)
                    {
                        Some(q) => q.1 += p.1,
                        None => merged.push(p),
                    }
                }
                let key = |p: &(f64, f64, bool)| ((p.0 * 1e9).round() as i64, p.2);
                merged.sort_by_key(key);
                brute.sort_by_key(key);
                assert_eq!(merged.len(), brute.len());
                for (x, y) in merged.iter().zip(&brute) {
                    assert!((x.0 - y.0).abs() < 1e-12 && x.1 == y.1 && x.2 == y.2, "{x:?} {y:?} {alpha:?} {j0}");
                }
            }
        }
    }

    #[test]
    fn histogram_totals_and_duality() {
        let ferro = ChainSpec::new(9, 1, Alpha::Finite(1.5), 1.0, 0.0);
        let anti = ferro.with_j0(-1.0);
        let hf = bifurcation_histogram(&ferro, 10, true).unwrap();
        assert_eq!(hf.source, HistogramSource::Enumerated);
        let total: f64 = hf.counts.iter().sum();
        assert_eq!(total, hf.configurations);
        assert_eq!(hf.counts[0], 0.0);
        assert_eq!(*hf.counts.last().unwrap(), 0.0);
        // unstable points of the anti-ferromagnet coincide with the stable
        // points of the ferromagnet
        let (pf, _) = bifurcation_points(&ferro).unwrap();
        let (pa, _) = bifurcation_points(&anti).unwrap();
        let mut s: Vec<f64> = pf.iter().filter(|p| p.2).map(|p| p.0).collect();
        let mut u: Vec<f64> = pa.iter().filter(|p| !p.2).map(|p| p.0).collect();
        s.sort_by(f64::total_cmp);
        u.sort_by(f64::total_cmp);
        assert_eq!(s.len(), u.len());
        for (x, y) in s.iter().zip(&u) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
