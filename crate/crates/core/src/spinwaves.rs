//! Spin waves on a ring: mean-field energy, quadratic fluctuations and their
//! Bogoliubov spectra.
//!
//! For per-site angles `phi_i` (spin in the x-y plane, `s_i = sin phi_i` along
//! the coupling axis, `c_i = cos phi_i` along the field) the energy per
//! elementary spin is
//!
//! `E(phi) = -(1/N) sum_{i<j} J_ij s_i s_j - (B/N) sum_i c_i`.
//!
//! Expanding around a stationary point gives
//! `H_Q = sum_i W_i a_i^+ a_i + sum_{i != j} K_ij (a_i + a_i^+)(a_j + a_j^+)` with
//! `W_i = 2 s_i sum_j J_ij s_j + 2 B c_i` and `K_ij = -J_ij c_i c_j / 2`.
//! For translation-invariant patterns this is `2 sum_k [F a_k^+ a_k + G (...)/2]`
//! with `G(k) = -J0 c^2 C(k)`, `F = G - E0`, `E0 = -W / 2` and
//! `eps(k) = 2 sqrt(F^2 - G^2)`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{clausen_truncated, coupling_matrix, eta, index_set, ring_sum, zeta, Alpha, Boundary, ChainSpec, Sites, DEFAULT_TOL};

/// Number of quasimomenta sampled on `[-pi, pi)` in the thermodynamic limit.
pub const CONTINUUM_POINTS: usize = 1024;

/// Largest gradient component accepted as stationary.
pub const STATIONARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    /// All angles equal.
    Uniform,
    /// `phi_i = (-1)^i phi`.
    Alternating,
    /// Every other site rotated by `pi`, `cos phi = 0`.
    Intermediate1,
    /// Every other site rotated by `pi`, `sin phi = 0`.
    Intermediate2,
}

impl std::str::FromStr for StationaryKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" | "e" => Ok(StationaryKind::Uniform),
            "alternating" | "a" => Ok(StationaryKind::Alternating),
            "intermediate_1" | "intermediate1" => Ok(StationaryKind::Intermediate1),
            "intermediate_2" | "intermediate2" => Ok(StationaryKind::Intermediate2),
            other => Err(format!(
                "unknown configuration kind '{other}' (expected uniform or alternating)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `sin phi_c != 0`: spins tilted towards the coupling axis.
    Ordered,
    /// `sin phi_c = 0`: spins along (or against) the field.
    Polarized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryAngle {
    pub kind: StationaryKind,
    pub phi_c: f64,
    pub regime: Regime,
    /// Effective coupling of the pattern (uniform or alternating sum).
    pub j_eff_p: f64,
}

/// `sin_cos` with rounding residue at multiples of `pi / 2` cleared.
fn sin_cos(phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    (clean(s), clean(c))
}

fn require_ring(spec: &ChainSpec) -> Result<()> {
    spec.validate()?;
    if spec.boundary != Boundary::Periodic {
        return Err(Error::Precondition("spin waves are defined on a periodic ring".into()));
    }
    if let Sites::Finite(n) = spec.n_sites {
        if n < 2 {
            return Err(Error::Domain(format!("ring needs at least 2 sites, got {n}")));
        }
    }
    Ok(())
}

/// Energy per elementary spin and its gradient for per-site angles on a ring.
pub fn mean_field_energy_periodic(spec: &ChainSpec, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
    require_ring(spec)?;
    let n = spec.finite_sites()?;
    if phi.len() != n {
        return Err(Error::InvalidSpec(format!("{} angles for {n} sites", phi.len())));
    }
    let j = coupling_matrix(spec)?;
    let nf = n as f64;
    let (s, c): (Vec<f64>, Vec<f64>) = phi.iter().map(|&p| sin_cos(p)).unzip();
    let mut field = vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            field[i] += j[(i, k)] * s[k];
        }
    }
    let pair: f64 = (0..n).map(|i| s[i] * field[i]).sum::<f64>() / 2.0;
    let energy = -pair / nf - spec.b * c.iter().sum::<f64>() / nf;
    let gradient = (0..n)
        .map(|i| (-c[i] * field[i] + spec.b * s[i]) / nf)
        .collect();
    Ok((energy, gradient))
}

/// Hessian of [`mean_field_energy_periodic`].
pub fn mean_field_hessian_periodic(spec: &ChainSpec, phi: &[f64]) -> Result<Mat<f64>> {
    require_ring(spec)?;
    let n = spec.finite_sites()?;
    if phi.len() != n {
        return Err(Error::InvalidSpec(format!("{} angles for {n} sites", phi.len())));
    }
    let j = coupling_matrix(spec)?;
    let nf = n as f64;
    let (s, c): (Vec<f64>, Vec<f64>) = phi.iter().map(|&p| sin_cos(p)).unzip();
    Ok(Mat::from_fn(n, n, |a, b| {
        if a == b {
            let f: f64 = (0..n).map(|k| j[(a, k)] * s[k]).sum();
            (s[a] * f + spec.b * c[a]) / nf
        } else {
            -j[(a, b)] * c[a] * c[b] / nf
        }
    }))
}

/// `(J_e, J_a)` of a ring: `(J0/2) sum_{r in I_N^0} w_r` and the same with
/// `(-1)^r`; `(J0 zeta, -J0 eta)` in the thermodynamic limit.
pub fn effective_couplings_periodic(spec: &ChainSpec) -> Result<(f64, f64)> {
    Ok((uniform_coupling(spec)?, alternating_coupling(spec)?))
}

fn uniform_coupling(spec: &ChainSpec) -> Result<f64> {
    require_ring(spec)?;
    let j0 = spec.coupling();
    match (spec.n_sites, spec.alpha) {
        (Sites::Finite(n), alpha) => Ok(j0 * (0.5 * ring_sum(n, alpha, |_| 1.0)?)),
        (Sites::Infinite, Alpha::Infinite) => Ok(j0),
        (Sites::Infinite, Alpha::Finite(a)) => Ok(j0 * zeta(a, DEFAULT_TOL)?),
    }
}

fn alternating_coupling(spec: &ChainSpec) -> Result<f64> {
    require_ring(spec)?;
    let j0 = spec.coupling();
    let sign = |r: i64| if r.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match (spec.n_sites, spec.alpha) {
        (Sites::Finite(n), alpha) => Ok(j0 * (0.5 * ring_sum(n, alpha, sign)?)),
        (Sites::Infinite, Alpha::Infinite) => Ok(-j0),
        (Sites::Infinite, Alpha::Finite(a)) => Ok(-j0 * eta(a, DEFAULT_TOL)?),
    }
}

/// Per-site angles of a pattern with base angle `phi`.
pub fn expand_pattern(kind: StationaryKind, phi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| match kind {
            StationaryKind::Uniform => phi,
            StationaryKind::Alternating => {
                if i % 2 == 0 {
                    phi
                } else {
                    -phi
                }
            }
            // first site of each pair carries the extra pi
            StationaryKind::Intermediate1 | StationaryKind::Intermediate2 => {
                if i % 2 == 0 {
                    phi + PI
                } else {
                    phi
                }
            }
        })
        .collect()
}

fn pattern_coupling(spec: &ChainSpec, kind: StationaryKind) -> Result<f64> {
    match kind {
        StationaryKind::Uniform => uniform_coupling(spec),
        _ => alternating_coupling(spec),
    }
}

/// Stationary angle of a pattern on a ring.
///
/// Below the critical field the stationary angle satisfies
/// `cos phi_c = B / (2 j)` for the pattern coupling `j` (negative `j` gives a
/// maximum with `cos phi_c < 0`); above it `phi_c = 0` for `j > 0` and `pi`
/// for `j < 0`. The intermediate patterns exist at zero field only.
pub fn stationary_angle(spec: &ChainSpec, kind: StationaryKind) -> Result<StationaryAngle> {
    require_ring(spec)?;
    let j = pattern_coupling(spec, kind)?;
    let b = spec.b;
    let (phi_c, regime) = match kind {
        StationaryKind::Uniform | StationaryKind::Alternating => {
            if kind == StationaryKind::Uniform && !(j > 0.0) {
                return Err(Error::Branch(format!(
                    "uniform pattern needs a positive coupling, got {j}"
                )));
            }
            if j == 0.0 {
                return Err(Error::Branch("alternating coupling vanishes".into()));
            }
            if b < 2.0 * j.abs() {
                ((b / (2.0 * j)).acos(), Regime::Ordered)
            } else if j > 0.0 {
                (0.0, Regime::Polarized)
            } else {
                (PI, Regime::Polarized)
            }
        }
        StationaryKind::Intermediate1 | StationaryKind::Intermediate2 => {
            if b != 0.0 {
                return Err(Error::Precondition(
                    "intermediate patterns are stationary only at zero field".into(),
                ));
            }
            if kind == StationaryKind::Intermediate1 {
                (PI / 2.0, Regime::Ordered)
            } else {
                (0.0, Regime::Polarized)
            }
        }
    };
    if let Sites::Finite(n) = spec.n_sites {
        let (_, grad) = mean_field_energy_periodic(spec, &expand_pattern(kind, phi_c, n))?;
        let worst = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if !(worst < STATIONARITY_TOL) {
            return Err(Error::Precondition(format!(
                "pattern is not stationary on this ring (max gradient {worst:e}); odd rings cannot host two-site patterns"
            )));
        }
    }
    Ok(StationaryAngle {
        kind,
        phi_c,
        regime,
        j_eff_p: j,
    })
}

/// Critical field `2 |j|` of the uniform or alternating pattern.
pub fn critical_field(spec: &ChainSpec, kind: StationaryKind) -> Result<f64> {
    match kind {
        StationaryKind::Uniform | StationaryKind::Alternating => {
            let angle = stationary_angle(&spec.with_field(0.0), kind)?;
            Ok(2.0 * angle.j_eff_p.abs())
        }
        _ => Err(Error::Precondition(
            "critical fields are defined for the uniform and alternating patterns".into(),
        )),
    }
}

/// Quasimomenta `2 pi n / N`, `n` in `I_N` ascending, or `CONTINUUM_POINTS`
/// uniform points on `[-pi, pi)`.
pub fn k_grid(n: Sites) -> Result<Vec<f64>> {
    match n {
        Sites::Finite(n) => Ok(index_set(n, false)?
            .iter()
            .map(|m| 2.0 * PI * m as f64 / n as f64)
            .collect()),
        Sites::Infinite => Ok((0..CONTINUUM_POINTS)
            .map(|i| -PI + 2.0 * PI * i as f64 / CONTINUUM_POINTS as f64)
            .collect()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionCurve {
    pub kind: StationaryKind,
    pub b: f64,
    pub angle: StationaryAngle,
    pub k_grid: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub e0: f64,
    /// Bogoliubov angle with `tanh 2 theta = -G / F` (NaN where unstable).
    pub theta: Vec<f64>,
    /// `2 sqrt(F^2 - G^2)`, or 0 where `F^2 < G^2`.
    pub energy: Vec<f64>,
    /// `2 sqrt(G^2 - F^2)` where `F^2 < G^2`, else 0.
    pub imaginary: Vec<f64>,
    /// Real mode frequency, `F^2 >= G^2`.
    pub stable: Vec<bool>,
    /// `F > 0`: the mode raises the energy (false around maxima).
    pub positive_f: Vec<bool>,
    pub gap_mode: usize,
    pub gap: f64,
    /// `1 / sqrt(gap)`; `None` when the gap closes.
    pub corr_length: Option<f64>,
    pub warning: Option<String>,
}

/// Bogoliubov spectrum of the uniform or alternating pattern at field `b`.
pub fn dispersion(spec: &ChainSpec, kind: StationaryKind, b: f64) -> Result<DispersionCurve> {
    if !matches!(kind, StationaryKind::Uniform | StationaryKind::Alternating) {
        return Err(Error::Precondition(
            "use intermediate_config for the intermediate patterns".into(),
        ));
    }
    let spec = spec.with_field(b);
    let angle = stationary_angle(&spec, kind)?;
    let (s, c) = sin_cos(angle.phi_c);
    let j = angle.j_eff_p;
    let e0 = -2.0 * j * s * s - b * c;
    let j0 = spec.coupling();
    let ks = k_grid(spec.n_sites)?;
    let mut curve = DispersionCurve {
        kind,
        b,
        angle,
        k_grid: ks.clone(),
        g: Vec::with_capacity(ks.len()),
        f: Vec::with_capacity(ks.len()),
        e0,
        theta: Vec::with_capacity(ks.len()),
        energy: Vec::with_capacity(ks.len()),
        imaginary: Vec::with_capacity(ks.len()),
        stable: Vec::with_capacity(ks.len()),
        positive_f: Vec::with_capacity(ks.len()),
        gap_mode: 0,
        gap: f64::INFINITY,
        corr_length: None,
        warning: None,
    };
    for &k in &ks {
        let g = -j0 * c * c * clausen_truncated(spec.alpha, k, spec.n_sites)?;
        let f = g - e0;
        let d = f * f - g * g;
        curve.g.push(g);
        curve.f.push(f);
        curve.positive_f.push(f > 0.0);
        if d >= 0.0 {
            curve.stable.push(true);
            curve.energy.push(2.0 * d.sqrt());
            curve.imaginary.push(0.0);
            curve.theta.push(0.5 * (-g / f).atanh());
        } else {
            curve.stable.push(false);
            curve.energy.push(0.0);
            curve.imaginary.push(2.0 * (-d).sqrt());
            curve.theta.push(f64::NAN);
        }
    }
    let unstable = curve.stable.iter().filter(|s| !**s).count();
    if unstable > 0 {
        curve.warning = Some(format!(
            "{unstable} of {} modes are dynamically unstable (F^2 < G^2)",
            ks.len()
        ));
    }
    if let Some((i, &e)) = curve
        .energy
        .iter()
        .enumerate()
        .filter(|(i, _)| curve.stable[*i])
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        curve.gap_mode = i;
        curve.gap = e;
        curve.corr_length = (e > 0.0).then(|| 1.0 / e.sqrt());
    }
    Ok(curve)
}

/// Checks a Bogoliubov rotation against the closed form: returns
/// `(|cosh^2 - sinh^2 - 1|, residual off-diagonal, diagonal)` of
/// `T [[F, G], [G, F]] T` with `T = [[cosh, sinh], [sinh, cosh]]`.
pub fn bogoliubov_check(f: f64, g: f64) -> (f64, f64, f64) {
    let theta = 0.5 * (-g / f).atanh();
    let (u, v) = (theta.cosh(), theta.sinh());
    let norm = (u * u - v * v - 1.0).abs();
    let off = 2.0 * u * v * f + (u * u + v * v) * g;
    let diag = (u * u + v * v) * f + 2.0 * u * v * g;
    (norm, off.abs(), diag)
}

/// Real-space quadratic fluctuation Hamiltonian around per-site angles.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    /// On-site coefficients of `a_i^+ a_i`.
    pub omega: Vec<f64>,
    /// Coefficients of `(a_i + a_i^+)(a_j + a_j^+)`, zero on the diagonal.
    pub k: Mat<f64>,
}

pub fn quadratic_form(spec: &ChainSpec, phi: &[f64]) -> Result<QuadraticForm> {
    let h = mean_field_hessian_periodic(spec, phi)?;
    let n = phi.len();
    let nf = n as f64;
    Ok(QuadraticForm {
        omega: (0..n).map(|i| 2.0 * nf * h[(i, i)]).collect(),
        k: Mat::from_fn(n, n, |a, b| if a == b { 0.0 } else { nf / 2.0 * h[(a, b)] }),
    })
}

impl QuadraticForm {
    /// `[[diag W + 2K, 2K], [2K, diag W + 2K]]` in the basis `(a, a^+)`.
    pub fn bdg_matrix(&self) -> Mat<f64> {
        let n = self.omega.len();
        Mat::from_fn(2 * n, 2 * n, |r, c| {
            let (i, j) = (r % n, c % n);
            let mut v = 2.0 * self.k[(i, j)];
            if r == c {
                v += self.omega[i];
            }
            v
        })
    }

    /// Eigenvalues of `eta M` with `eta = diag(1, -1)`, sorted by real part.
    pub fn frequencies(&self) -> Result<Vec<Complex64>> {
        let n = self.omega.len();
        let mut m = self.bdg_matrix();
        for r in n..2 * n {
            for c in 0..2 * n {
                m[(r, c)] = -m[(r, c)];
            }
        }
        let mut ev: Vec<Complex64> = m
            .eigenvalues()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?
            .into_iter()
            .map(|z| Complex64::new(z.re, z.im))
            .collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(ev)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub b: f64,
    pub gap: f64,
    pub gap_k: f64,
    pub corr_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScan {
    pub kind: StationaryKind,
    pub b_c: f64,
    pub points: Vec<GapPoint>,
    /// Fitted exponent of `gap ~ |B - B_c|^x` over the decade nearest `B_c`.
    pub exponent_below: Option<f64>,
    pub exponent_above: Option<f64>,
}

pub fn gap_scan(spec: &ChainSpec, kind: StationaryKind, b_grid: &[f64]) -> Result<GapScan> {
    use rayon::prelude::*;
    if b_grid.is_empty() {
        return Err(Error::InvalidSpec("field grid is empty".into()));
    }
    let b_c = critical_field(spec, kind)?;
    let points = b_grid
        .par_iter()
        .enumerate()
        .map(|(i, &b)| {
            let d = dispersion(spec, kind, b).map_err(|e| Error::at(i, e))?;
            Ok(GapPoint {
                b,
                gap: d.gap,
                gap_k: d.k_grid[d.gap_mode],
                corr_length: d.corr_length,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let side = |above: bool| {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| if above { p.b > b_c } else { p.b < b_c })
            .map(|p| ((p.b - b_c).abs(), p.gap))
            .filter(|&(_, g)| g >= 1e-8)
            .collect();
        fit_nearest_decade(&pts)
    };
    Ok(GapScan {
        kind,
        b_c,
        exponent_below: side(false),
        exponent_above: side(true),
        points,
    })
}

/// Least-squares slope of `ln y` against `ln x` over `x` in `[x_min, 10 x_min]`.
pub fn fit_nearest_decade(points: &[(f64, f64)]) -> Option<f64> {
    let x_min = points
        .iter()
        .map(|p| p.0)
        .filter(|&x| x > 0.0)
        .min_by(f64::total_cmp)?;
    let sel: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= x_min && p.0 <= 10.0 * x_min * (1.0 + 1e-12) && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    log_log_slope(&sel)
}

/// Least-squares slope of already-logged points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DickeModes {
    pub eps_minus: f64,
    pub eps_plus: f64,
    /// Mean-field energy of the two-spin system, `2SN E` with `N = 2`.
    pub ground_offset: f64,
}

/// Closed-form two-mode spectrum of the two-site system.
pub fn dicke_limit_check(spin2: u32, b: f64, j0: f64) -> Result<DickeModes> {
    if !(b >= 0.0) || !(j0 > 0.0) || spin2 == 0 {
        return Err(Error::Domain(format!(
            "two-site limit needs B >= 0, J0 > 0 and spin2 >= 1 (got B = {b}, J0 = {j0})"
        )));
    }
    let s = spin2 as f64 / 2.0;
    Ok(if b >= j0 {
        DickeModes {
            eps_minus: 2.0 * (b * (b - j0)).sqrt(),
            eps_plus: 2.0 * (b * (b + j0)).sqrt(),
            ground_offset: -4.0 * s * b,
        }
    } else {
        DickeModes {
            eps_minus: 2.0 * (j0 * j0 - b * b).sqrt(),
            eps_plus: 2.0 * (j0 * j0 + b * b).sqrt(),
            ground_offset: -2.0 * s * (j0 + b * b / j0),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntermediateConfig {
    /// Energy at `cos phi = 0` (equals `-J_a`).
    pub energy_1: f64,
    /// Common on-site coefficient at `cos phi = 0` (equals `4 J_a`).
    pub diag_coeff_1: f64,
    /// Energy at `sin phi = 0` (zero).
    pub energy_2: f64,
    /// Dispersion at `sin phi = 0` after undoing the staggering.
    pub dispersion_2: Vec<f64>,
    pub flat_dispersion: bool,
}

/// The two stationary points of the staggered pattern with every other spin
/// rotated by `pi`, at zero field on an even ring.
pub fn intermediate_config(spec: &ChainSpec) -> Result<IntermediateConfig> {
    require_ring(spec)?;
    let n = spec.finite_sites()?;
    if n % 2 != 0 {
        return Err(Error::Precondition(format!(
            "staggered pattern needs an even ring, got N = {n}"
        )));
    }
    let a1 = stationary_angle(spec, StationaryKind::Intermediate1)?;
    let a2 = stationary_angle(spec, StationaryKind::Intermediate2)?;
    let phi1 = expand_pattern(StationaryKind::Intermediate1, a1.phi_c, n);
    let phi2 = expand_pattern(StationaryKind::Intermediate2, a2.phi_c, n);
    let (energy_1, _) = mean_field_energy_periodic(spec, &phi1)?;
    let (energy_2, _) = mean_field_energy_periodic(spec, &phi2)?;

    let q1 = quadratic_form(spec, &phi1)?;
    let diag_coeff_1 = q1.omega.iter().sum::<f64>() / n as f64;
    let spread = q1.omega.iter().map(|w| (w - diag_coeff_1).abs()).fold(0.0, f64::max);
    let offdiag = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| q1.k[(i, j)].abs())
        .fold(0.0, f64::max);
    if spread > 1e-12 * diag_coeff_1.abs().max(1.0) || offdiag > 1e-12 {
        return Err(Error::Precondition(
            "first staggered solution is not diagonal".into(),
        ));
    }

    // Undo the staggering: flip the sign of the bosons on the rotated sites,
    // K_ij -> (-1)^(i+j) K_ij, which makes the form translation invariant.
    let q2 = quadratic_form(spec, &phi2)?;
    let sign = |i: usize| if i % 2 == 0 { -1.0 } else { 1.0 };
    let kt = Mat::from_fn(n, n, |i, j| sign(i) * sign(j) * q2.k[(i, j)]);
    let w = q2.omega[0];
    let mut dispersion_2 = Vec::with_capacity(n);
    for &k in &k_grid(spec.n_sites)? {
        // K(k) = sum_r K(0, r) cos(k r); G = K(k), F = W/2 + K(k)
        let kk: f64 = (0..n).map(|r| kt[(0, r)] * (k * r as f64).cos()).sum();
        let g = kk;
        let f = w / 2.0 + kk;
        let d = f * f - g * g;
        dispersion_2.push(2.0 * d.max(0.0).sqrt());
    }
    let flat_dispersion = dispersion_2.iter().all(|&e| e.abs() <= 1e-12);
    Ok(IntermediateConfig {
        energy_1,
        diag_coeff_1,
        energy_2,
        dispersion_2,
        flat_dispersion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ring(n: usize, alpha: f64, b: f64) -> ChainSpec {
        ChainSpec::new(n, 1, Alpha::Finite(alpha), 1.0, b).periodic()
    }

    #[test]
    fn ring_couplings() {
        for a in [0.0, 1.3, 4.0] {
            let (je, ja) = effective_couplings_periodic(&ring(2, a, 0.0)).unwrap();
            assert_eq!(je, 0.5);
            assert_eq!(ja, -0.5);
        }
        let (je, ja) = effective_couplings_periodic(&ring(5, 2.0, 0.0)).unwrap();
        assert_relative_eq!(je, 1.25, max_relative = 1e-15);
        assert_relative_eq!(ja, -0.75, max_relative = 1e-15);
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(2.0), 1.0, 0.0);
        let (je, _) = effective_couplings_periodic(&inf).unwrap();
        assert_relative_eq!(je, PI * PI / 6.0, max_relative = 1e-12);
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(1.0), 1.0, 0.0);
        assert!(effective_couplings_periodic(&inf).is_err());
        assert!(effective_couplings_periodic(&ChainSpec::new(4, 1, Alpha::Finite(1.0), 1.0, 0.0)).is_err());
    }

    #[test]
    fn clausen_identity_exact() {
        for n in 2..=64 {
            for alpha in [Alpha::Finite(0.0), Alpha::Finite(0.5), Alpha::Finite(1.0), Alpha::Finite(2.0), Alpha::Finite(3.0), Alpha::Infinite] {
                let spec = ChainSpec::new(n, 1, alpha, 1.0, 0.0).periodic();
                let (je, _) = effective_couplings_periodic(&spec).unwrap();
                let c = clausen_truncated(alpha, 0.0, Sites::Finite(n)).unwrap();
                assert!((c - je).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn energy_examples() {
        let spec = ring(6, 1.3, 0.7);
        let (e, g) = mean_field_energy_periodic(&spec, &[0.0; 6]).unwrap();
        assert_relative_eq!(e, -0.7, max_relative = 1e-15);
        assert!(g.iter().all(|&x| x == 0.0));
        let spec = ring(6, 1.3, 0.0);
        let (je, _) = effective_couplings_periodic(&spec).unwrap();
        let (e, g) = mean_field_energy_periodic(&spec, &[PI / 2.0; 6]).unwrap();
        assert_relative_eq!(e, -je, max_relative = 1e-14);
        assert!(g.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn stationary_examples() {
        let spec = ring(8, 2.0, 0.0);
        let (je, ja) = effective_couplings_periodic(&spec).unwrap();
        let a = stationary_angle(&spec.with_field(2.0 * je), StationaryKind::Uniform).unwrap();
        assert_eq!(a.phi_c, 0.0);
        assert_eq!(a.regime, Regime::Polarized);
        let a = stationary_angle(&spec.with_field(je), StationaryKind::Uniform).unwrap();
        assert_relative_eq!(a.phi_c, PI / 3.0, max_relative = 1e-14);
        let a = stationary_angle(&spec.with_field(-2.0 * ja + 0.1), StationaryKind::Alternating).unwrap();
        assert_eq!(a.phi_c, PI);
        let a = stationary_angle(&spec.with_field(-ja), StationaryKind::Alternating).unwrap();
        assert!(a.phi_c.cos() < 0.0);
        assert!(stationary_angle(&spec.with_j0(-1.0), StationaryKind::Uniform).is_err());
        assert!(stationary_angle(&ring(7, 2.0, 0.3), StationaryKind::Alternating).is_err());
    }

    #[test]
    fn critical_fields() {
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(3.0), 1.0, 0.0);
        assert_relative_eq!(critical_field(&inf, StationaryKind::Uniform).unwrap(), 2.0 * 1.2020569031595942, max_relative = 1e-12);
        assert_relative_eq!(critical_field(&ring(2, 1.0, 0.0), StationaryKind::Uniform).unwrap(), 1.0);
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(2.0), 1.0, 0.0);
        assert_relative_eq!(critical_field(&inf, StationaryKind::Alternating).unwrap(), 1.6449340668482264, max_relative = 1e-12);
    }

    #[test]
    fn two_site_dispersion() {
        let d = dispersion(&ring(2, 1.0, 0.0), StationaryKind::Uniform, 2.0).unwrap();
        assert_eq!(d.k_grid, vec![-PI, 0.0]);
        assert_relative_eq!(d.energy[1], 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(d.energy[0], 2.0 * 6f64.sqrt(), max_relative = 1e-14);
        let m = dicke_limit_check(1, 2.0, 1.0).unwrap();
        assert_relative_eq!(m.eps_minus, 2.0 * 2f64.sqrt());
        assert_relative_eq!(m.eps_plus, 2.0 * 6f64.sqrt());
        let m = dicke_limit_check(1, 1.0, 1.0).unwrap();
        assert_eq!(m.eps_minus, 0.0);
        let m = dicke_limit_check(1, 0.0, 1.0).unwrap();
        assert_eq!((m.eps_minus, m.eps_plus), (2.0, 2.0));
    }

    #[test]
    fn flat_at_zero_field() {
        let spec = ring(10, 1.5, 0.0);
        let (je, _) = effective_couplings_periodic(&spec).unwrap();
        let d = dispersion(&spec, StationaryKind::Uniform, 0.0).unwrap();
        assert!(d.g.iter().all(|&g| g.abs() < 1e-15));
        for e in &d.energy {
            assert_relative_eq!(*e, 4.0 * je, max_relative = 1e-14);
        }
        let d = dispersion(&spec, StationaryKind::Uniform, 2.0 * je).unwrap();
        assert_eq!(d.gap, 0.0);
        assert_eq!(d.k_grid[d.gap_mode], 0.0);
        assert!(d.corr_length.is_none());
    }

    #[test]
    fn alternating_gap_closes_at_zone_boundary() {
        let spec = ring(12, 2.0, 0.0);
        let bc = critical_field(&spec, StationaryKind::Alternating).unwrap();
        let d = dispersion(&spec, StationaryKind::Alternating, bc).unwrap();
        assert!(d.gap.abs() < 1e-7);
        assert_eq!(d.k_grid[d.gap_mode].abs(), PI);
        assert!(d.stable.iter().all(|&s| s));
        assert!(d.positive_f.iter().all(|&p| !p));
    }

    #[test]
    fn dispersion_matches_real_space_bdg() {
        for (kind, b) in [
            (StationaryKind::Uniform, 0.4),
            (StationaryKind::Uniform, 3.5),
            (StationaryKind::Alternating, 0.3),
            (StationaryKind::Alternating, 2.5),
        ] {
            let spec = ring(8, 1.7, b);
            let d = dispersion(&spec, kind, b).unwrap();
            let phi = expand_pattern(kind, d.angle.phi_c, 8);
            let freqs = quadratic_form(&spec, &phi).unwrap().frequencies().unwrap();
            let mut positive: Vec<f64> = freqs.iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
            positive.sort_by(f64::total_cmp);
            let mut closed = d.energy.clone();
            closed.sort_by(f64::total_cmp);
            assert_eq!(positive.len(), closed.len());
            for (x, y) in positive.iter().zip(&closed) {
                assert!((x - y).abs() < 1e-10, "{kind:?} {b}: {x} vs {y}");
            }
            assert!(freqs.iter().all(|z| z.im.abs() < 1e-10));
        }
    }

    #[test]
    fn gap_exponent_near_critical_field() {
        let spec = ring(32, 2.0, 0.0);
        let bc = critical_field(&spec, StationaryKind::Uniform).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|i| bc + bc * 1e-3 * i as f64 / 4.0).filter(|b| *b != bc).collect();
        let scan = gap_scan(&spec, StationaryKind::Uniform, &grid).unwrap();
        assert!((scan.exponent_above.unwrap() - 0.5).abs() < 0.05);
        assert!((scan.exponent_below.unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn intermediate_solutions() {
        let spec = ring(6, 2.0, 0.0);
        let (_, ja) = effective_couplings_periodic(&spec).unwrap();
        let r = intermediate_config(&spec).unwrap();
        assert_relative_eq!(r.energy_1, -ja, max_relative = 1e-14);
        assert_relative_eq!(r.diag_coeff_1, 4.0 * ja, max_relative = 1e-14);
        assert_eq!(r.energy_2, 0.0);
        assert!(r.flat_dispersion);
        assert!(intermediate_config(&ring(7, 2.0, 0.0)).is_err());
        assert!(intermediate_config(&ring(6, 2.0, 0.5)).is_err());
    }

    #[test]
    fn converges_to_continuum() {
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(2.0), 1.0, 0.0);
        let b = 4.0;
        let mut last = f64::INFINITY;
        for n in [8, 16, 32, 64, 128] {
            let spec = ring(n, 2.0, 0.0);
            let d = dispersion(&spec, StationaryKind::Uniform, b).unwrap();
            let mut worst = 0.0f64;
            for (i, &k) in d.k_grid.iter().enumerate() {
                let c = clausen_truncated(Alpha::Finite(2.0), k, Sites::Infinite).unwrap();
                let (je, _) = effective_couplings_periodic(&inf).unwrap();
                // polarized: F^2 - G^2 = B (B - 2 G_inf') with G = -C
                let g = -c;
                let f = g + b;
                let e = 2.0 * (f * f - g * g).sqrt();
                assert!(b > 2.0 * je);
                worst = worst.max((d.energy[i] - e).abs());
            }
            assert!(worst < last);
            last = worst;
        }
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            n in 2usize..9,
            alpha in 0.0f64..4.0,
            b in 0.0f64..3.0,
            j0 in -2.0f64..2.0,
            phi in proptest::collection::vec(-PI..PI, 8),
        ) {
            let spec = ChainSpec::new(n, 1, Alpha::Finite(alpha), j0, b).periodic();
            let phi = &phi[..n];
            let (_, grad) = mean_field_energy_periodic(&spec, phi).unwrap();
            let h = 1e-6;
            for i in 0..n {
                let mut p = phi.to_vec();
                p[i] += h;
                let (ep, _) = mean_field_energy_periodic(&spec, &p).unwrap();
                p[i] -= 2.0 * h;
                let (em, _) = mean_field_energy_periodic(&spec, &p).unwrap();
                prop_assert!(((ep - em) / (2.0 * h) - grad[i]).abs() < 1e-6);
            }
        }

        #[test]
        fn dispersion_even_and_normalized(n in 2usize..40, alpha in 0.0f64..4.0, t in 0.0f64..3.0) {
            let spec = ring(n, alpha, 0.0);
            let (je, _) = effective_couplings_periodic(&spec).unwrap();
            let d = dispersion(&spec, StationaryKind::Uniform, t * je).unwrap();
            for (i, &k) in d.k_grid.iter().enumerate() {
                if let Some(j) = d.k_grid.iter().position(|&q| q == -k) {
                    prop_assert_eq!(d.energy[i], d.energy[j]);
                }
                if d.f[i] != 0.0 && (d.g[i] / d.f[i]).abs() < 1.0 - 1e-9 {
                    let (norm, off, diag) = bogoliubov_check(d.f[i], d.g[i]);
                    prop_assert!(norm < 1e-12 * (2.0 * d.theta[i]).cosh().powi(2));
                    prop_assert!(off < 1e-10 * d.f[i].abs().max(1.0));
                    prop_assert!((2.0 * diag.abs() - d.energy[i]).abs() < 1e-10 * d.f[i].abs().max(1.0));
                }
            }
        }
    }
}
