//! Two-sublattice fluctuations: sites `2l-1` (B) and `2l` (C) carry angles
//! `phi_B`, `phi_C`, and the quadratic Hamiltonian becomes a 4x4
//! Bogoliubov-de Gennes block per reduced momentum.
//!
//! Momenta `k` are in unit-cell units on `[-pi, pi)`; the physical momentum is
//! `q = k / 2`. Bosons are Fourier transformed with their physical positions,
//! so every block entry is real:
//!
//! `K_BB(k) = -(J0/2) c_B^2 sum_{r even} w_r cos(q r)`,
//! `K_BC(k) = -(J0/2) c_B c_C sum_{r odd} w_r cos(q r)`,
//! `H_k = [[D + 2K, 2K], [2K, D + 2K]]` with
//! `D = diag(W_B, W_C)`, `W_B = 2 J0 s_B (M_B s_C + M_C s_B) + 2 B c_B`.
//! Bands are the positive eigenvalues of `eta H_k`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{clausen_truncated, index_set, lerch, zeta, Alpha, Boundary, ChainSpec, Sites, DEFAULT_TOL};
use crate::spinwaves::CONTINUUM_POINTS;

pub const NEWTON_MAX_ITER: usize = 100;
pub const NEWTON_TOL: f64 = 1e-10;
/// Largest stationarity residual accepted by [`bdg_block`].
pub const STATIONARY_TOL: f64 = 1e-8;

/// `(M_B, M_C)`: sums of `w_r` over odd and even `r` in `I_N^0`.
pub fn sublattice_sums(n: Sites, alpha: Alpha) -> Result<(f64, f64)> {
    match n {
        Sites::Finite(n) => {
            if n % 2 != 0 || n < 2 {
                return Err(Error::Domain(format!("two sublattices need an even N >= 2, got {n}")));
            }
            let (mut mb, mut mc) = (0.0, 0.0);
            for r in index_set(n, true)?.iter() {
                let w = alpha.weight(r.unsigned_abs());
                if r % 2 == 0 {
                    mc += w;
                } else {
                    mb += w;
                }
            }
            Ok((mb, mc))
        }
        Sites::Infinite => match alpha {
            Alpha::Infinite => Ok((2.0, 0.0)),
            Alpha::Finite(a) => {
                let z = zeta(a, DEFAULT_TOL)?;
                Ok((2.0 * (1.0 - (-a).exp2()) * z, (1.0 - a).exp2() * z))
            }
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SublatticeConfig {
    pub phi_b: f64,
    pub phi_c: f64,
    pub m_b: f64,
    pub m_c: f64,
    pub n_sites: Sites,
    /// Largest absolute residual of the two stationarity equations.
    pub residual: f64,
    pub iterations: usize,
}

fn require_ring(spec: &ChainSpec) -> Result<()> {
    spec.validate()?;
    if spec.boundary != Boundary::Periodic {
        return Err(Error::Precondition("sublattice blocks are defined on a periodic ring".into()));
    }
    Ok(())
}

struct Equations {
    j0: f64,
    b: f64,
    mb: f64,
    mc: f64,
}

impl Equations {
    fn residual(&self, pb: f64, pc: f64) -> [f64; 2] {
        let (sb, cb) = pb.sin_cos();
        let (sc, cc) = pc.sin_cos();
        [
            -self.j0 * cb * (self.mb * sc + self.mc * sb) + self.b * sb,
            -self.j0 * cc * (self.mb * sb + self.mc * sc) + self.b * sc,
        ]
    }

    fn jacobian(&self, pb: f64, pc: f64) -> [[f64; 2]; 2] {
        let (sb, cb) = pb.sin_cos();
        let (sc, cc) = pc.sin_cos();
        let (j0, b, mb, mc) = (self.j0, self.b, self.mb, self.mc);
        [
            [
                j0 * sb * (mb * sc + mc * sb) - j0 * mc * cb * cb + b * cb,
                -j0 * mb * cb * cc,
            ],
            [
                -j0 * mb * cb * cc,
                j0 * sc * (mb * sb + mc * sc) - j0 * mc * cc * cc + b * cc,
            ],
        ]
    }
}

fn norm_inf(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn equations(spec: &ChainSpec) -> Result<Equations> {
    require_ring(spec)?;
    let (mb, mc) = sublattice_sums(spec.n_sites, spec.alpha)?;
    Ok(Equations {
        j0: spec.coupling(),
        b: spec.b,
        mb,
        mc,
    })
}

/// Residual of the stationarity equations at `(phi_b, phi_c)`.
pub fn stationarity_residual(spec: &ChainSpec, phi_b: f64, phi_c: f64) -> Result<[f64; 2]> {
    Ok(equations(spec)?.residual(phi_b, phi_c))
}

/// Solves the two coupled stationarity equations by damped Newton iteration.
pub fn stationary_angles(spec: &ChainSpec, initial: (f64, f64)) -> Result<SublatticeConfig> {
    let eq = equations(spec)?;
    let (mut pb, mut pc) = initial;
    let mut r = eq.residual(pb, pc);
    let mut iterations = 0;
    while norm_inf(r) >= NEWTON_TOL {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::RootFind {
                iterations,
                residual: norm_inf(r),
            });
        }
        iterations += 1;
        let j = eq.jacobian(pb, pc);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (db, dc) = if det.abs() > 1e-14 {
            (
                -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
                -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
            )
        } else {
            // gradient step on |r|^2 / 2
            (
                -(j[0][0] * r[0] + j[1][0] * r[1]),
                -(j[0][1] * r[0] + j[1][1] * r[1]),
            )
        };
        let base = r[0] * r[0] + r[1] * r[1];
        let mut t = 1.0;
        loop {
            let trial = eq.residual(pb + t * db, pc + t * dc);
            if trial[0] * trial[0] + trial[1] * trial[1] < base || t < 1e-6 {
                pb += t * db;
                pc += t * dc;
                r = trial;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(SublatticeConfig {
        phi_b: pb,
        phi_c: pc,
        m_b: eq.mb,
        m_c: eq.mc,
        n_sites: spec.n_sites,
        residual: norm_inf(r),
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BdGBlock {
    /// Reduced momentum in unit-cell units.
    pub k: f64,
    pub h_k: [[f64; 4]; 4],
    /// Eigenvalues of `eta H_k`, sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    /// The two eigenvalues with the largest real part, ascending.
    pub bands: [f64; 2],
    /// All eigenvalues real.
    pub stable: bool,
}

/// `(W_B, W_C)`: on-site coefficients of `a^+ a`.
pub fn onsite_frequencies(spec: &ChainSpec, config: &SublatticeConfig) -> (f64, f64) {
    let j0 = spec.coupling();
    let (sb, cb) = config.phi_b.sin_cos();
    let (sc, cc) = config.phi_c.sin_cos();
    (
        2.0 * j0 * sb * (config.m_b * sc + config.m_c * sb) + 2.0 * spec.b * cb,
        2.0 * j0 * sc * (config.m_b * sb + config.m_c * sc) + 2.0 * spec.b * cc,
    )
}

/// `(sum_{r even} w_r cos(q r), sum_{r odd} w_r cos(q r))` at `q = k / 2`.
fn displacement_sums(n: Sites, alpha: Alpha, k: f64) -> Result<(f64, f64)> {
    let q = k / 2.0;
    match n {
        Sites::Finite(n) => {
            let (mut even, mut odd) = (0.0, 0.0);
            for r in index_set(n, true)?.iter() {
                let v = alpha.weight(r.unsigned_abs()) * (q * r as f64).cos();
                if r % 2 == 0 {
                    even += v;
                } else {
                    odd += v;
                }
            }
            Ok((even, odd))
        }
        Sites::Infinite => match alpha {
            Alpha::Infinite => Ok((0.0, 2.0 * q.cos())),
            Alpha::Finite(a) => {
                let scale = 2.0 * (-a).exp2();
                let even = scale * clausen_truncated(alpha, k, Sites::Infinite)?;
                let odd = scale * (Complex64::from_polar(1.0, q) * lerch(k, a, 0.5)?.value).re;
                Ok((even, odd))
            }
        },
    }
}

/// Assembles `H_k` at a stationary configuration and finds its bosonic
/// eigenvalues.
pub fn bdg_block(spec: &ChainSpec, config: &SublatticeConfig, k: f64) -> Result<BdGBlock> {
    let r = stationarity_residual(spec, config.phi_b, config.phi_c)?;
    if !(norm_inf(r) < STATIONARY_TOL) {
        return Err(Error::Precondition(format!(
            "configuration is not stationary (residual {:e})",
            norm_inf(r)
        )));
    }
    if config.n_sites != spec.n_sites {
        return Err(Error::InvalidSpec("configuration was solved for a different chain".into()));
    }
    let j0 = spec.coupling();
    let (wb, wc) = onsite_frequencies(spec, config);
    let cb = config.phi_b.cos();
    let cc = config.phi_c.cos();
    let (even, odd) = displacement_sums(spec.n_sites, spec.alpha, k)?;
    let kbb = -0.5 * j0 * cb * cb * even;
    let kcc = -0.5 * j0 * cc * cc * even;
    let kbc = -0.5 * j0 * cb * cc * odd;
    let kk = [[2.0 * kbb, 2.0 * kbc], [2.0 * kbc, 2.0 * kcc]];
    let d = [wb, wc];
    let mut h_k = [[0.0; 4]; 4];
    for (bi, bj) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        for i in 0..2 {
            for j in 0..2 {
                h_k[bi + i][bj + j] = kk[i][j] + if bi == bj && i == j { d[i] } else { 0.0 };
            }
        }
    }
    let m = Mat::from_fn(4, 4, |i, j| if i < 2 { h_k[i][j] } else { -h_k[i][j] });
    let mut eigenvalues: Vec<Complex64> = m
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = h_k.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
    let stable = eigenvalues.iter().all(|z| z.im.abs() <= 1e-9 * scale);
    let bands = [eigenvalues[2].re.max(0.0), eigenvalues[3].re.max(0.0)];
    Ok(BdGBlock {
        k,
        h_k,
        eigenvalues,
        bands,
        stable,
    })
}

/// Reduced momenta `4 pi n / N`, `n` in `I_{N/2}`, or a uniform grid on
/// `[-pi, pi)` in the thermodynamic limit.
pub fn reduced_grid(n: Sites) -> Result<Vec<f64>> {
    match n {
        Sites::Finite(2) => Ok(vec![0.0]),
        Sites::Finite(n) => {
            if n % 2 != 0 {
                return Err(Error::Domain(format!("two sublattices need an even N, got {n}")));
            }
            Ok(index_set(n / 2, false)?
                .iter()
                .map(|m| 4.0 * PI * m as f64 / n as f64)
                .collect())
        }
        Sites::Infinite => Ok((0..CONTINUUM_POINTS)
            .map(|i| -PI + 2.0 * PI * i as f64 / CONTINUUM_POINTS as f64)
            .collect()),
    }
}

/// Both bands over the reduced zone, in ascending `k`.
pub fn bdg_bands(spec: &ChainSpec, config: &SublatticeConfig) -> Result<Vec<BdGBlock>> {
    reduced_grid(spec.n_sites)?
        .into_par_iter()
        .enumerate()
        .map(|(i, k)| bdg_block(spec, config, k).map_err(|e| Error::at(i, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinwaves::{dispersion, effective_couplings_periodic, StationaryKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ring(n: usize, alpha: f64, b: f64) -> ChainSpec {
        ChainSpec::new(n, 1, Alpha::Finite(alpha), 1.0, b).periodic()
    }

    #[test]
    fn sums_examples() {
        assert_eq!(sublattice_sums(Sites::Finite(4), Alpha::Finite(1.0)).unwrap(), (2.0, 0.5));
        let (mb, mc) = sublattice_sums(Sites::Infinite, Alpha::Finite(2.0)).unwrap();
        assert_relative_eq!(mb, PI * PI / 4.0, max_relative = 1e-13);
        assert_relative_eq!(mc, PI * PI / 12.0, max_relative = 1e-13);
        assert!(sublattice_sums(Sites::Finite(5), Alpha::Finite(1.0)).is_err());
        assert!(sublattice_sums(Sites::Infinite, Alpha::Finite(1.0)).is_err());
    }

    #[test]
    fn sums_converge() {
        let (mb, mc) = sublattice_sums(Sites::Infinite, Alpha::Finite(3.0)).unwrap();
        let (fb, fc) = sublattice_sums(Sites::Finite(20000), Alpha::Finite(3.0)).unwrap();
        assert!((mb - fb).abs() < 1e-8 && (mc - fc).abs() < 1e-8);
    }

    #[test]
    fn newton_examples() {
        let spec = ring(8, 2.0, 0.0);
        let (je, _) = effective_couplings_periodic(&spec).unwrap();
        let c = stationary_angles(&spec.with_field(3.0 * je), (0.4, 0.4)).unwrap();
        assert!(c.phi_b.abs() < 1e-10 && c.phi_c.abs() < 1e-10);
        let c = stationary_angles(&spec.with_field(je), (1.2, 1.2)).unwrap();
        assert!((c.phi_b - (0.5f64).acos()).abs() < 1e-10);
        assert!((c.phi_c - (0.5f64).acos()).abs() < 1e-10);
        assert!(c.residual < NEWTON_TOL);
        let c = stationary_angles(&spec, (PI / 2.0, PI / 2.0)).unwrap();
        assert_eq!(c.iterations, 0);
        assert!(c.residual < 1e-15);
    }

    #[test]
    fn zero_field_block_is_diagonal() {
        let spec = ring(8, 1.5, 0.0);
        let (je, _) = effective_couplings_periodic(&spec).unwrap();
        let c = stationary_angles(&spec, (PI / 2.0, PI / 2.0)).unwrap();
        let blk = bdg_block(&spec, &c, 0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert_relative_eq!(blk.h_k[i][i], 4.0 * je, max_relative = 1e-14);
                } else {
                    assert!(blk.h_k[i][j].abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn polarized_block() {
        let spec = ring(6, 2.0, 10.0);
        let c = stationary_angles(&spec, (0.0, 0.0)).unwrap();
        assert_eq!(onsite_frequencies(&spec, &c), (20.0, 20.0));
    }

    #[test]
    fn rejects_non_stationary() {
        let spec = ring(8, 2.0, 1.0);
        let mut c = stationary_angles(&spec, (0.0, 0.0)).unwrap();
        c.phi_b += 0.1;
        assert!(bdg_block(&spec, &c, 0.0).is_err());
    }

    fn fold_error(n: usize, alpha: f64, b: f64) -> f64 {
        let spec = ring(n, alpha, b);
        let d = dispersion(&spec, StationaryKind::Uniform, b).unwrap();
        let c = stationary_angles(&spec, (d.angle.phi_c, d.angle.phi_c)).unwrap();
        let lookup = |m: i64| {
            let idx = d
                .k_grid
                .iter()
                .position(|&q| ((q * n as f64 / (2.0 * PI)).round() as i64 - m).rem_euclid(n as i64) == 0)
                .unwrap();
            d.energy[idx]
        };
        let mut worst = 0.0f64;
        for blk in bdg_bands(&spec, &c).unwrap() {
            let m = (blk.k * n as f64 / (4.0 * PI)).round() as i64;
            let mut single = [lookup(m), lookup(m + n as i64 / 2)];
            single.sort_by(f64::total_cmp);
            assert!(blk.stable);
            worst = worst.max((blk.bands[0] - single[0]).abs()).max((blk.bands[1] - single[1]).abs());
        }
        worst
    }

    #[test]
    fn folds_onto_single_species() {
        for n in [4, 8, 16] {
            for alpha in [1.0, 2.0, 3.0] {
                let (je, _) = effective_couplings_periodic(&ring(n, alpha, 0.0)).unwrap();
                for t in [0.0, 0.7, 3.0] {
                    let err = fold_error(n, alpha, t * je);
                    assert!(err < 1e-9, "N={n} alpha={alpha} B={}: {err:e}", t * je);
                }
            }
        }
    }

    #[test]
    fn continuum_block_matches_large_ring() {
        let alpha = 2.5;
        let n = 4096;
        let (je, _) = effective_couplings_periodic(&ring(n, alpha, 0.0)).unwrap();
        let b = 0.8 * je;
        let fin = ring(n, alpha, b);
        let inf = ChainSpec::infinite_ring(1, Alpha::Finite(alpha), 1.0, b);
        let cf = stationary_angles(&fin, (1.0, 1.0)).unwrap();
        let ci = stationary_angles(&inf, (cf.phi_b, cf.phi_c)).unwrap();
        for m in [-1000i64, -300, 1, 77, 1500] {
            let k = 4.0 * PI * m as f64 / n as f64;
            let a = bdg_block(&fin, &cf, k).unwrap();
            let z = bdg_block(&inf, &ci, k).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a.h_k[i][j] - z.h_k[i][j]).abs() < 1e-4, "{m} {i}{j}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn partition_identity(half in 1usize..200, alpha in 0.0f64..5.0) {
            let n = 2 * half;
            let (mb, mc) = sublattice_sums(Sites::Finite(n), Alpha::Finite(alpha)).unwrap();
            let (je, _) = effective_couplings_periodic(&ring(n, alpha, 0.0)).unwrap();
            prop_assert!((mb + mc - 2.0 * je).abs() <= 1e-12 * je.abs().max(1.0));
        }

        #[test]
        fn eigenvalues_pair(half in 2usize..12, alpha in 0.5f64..4.0, t in 0.0f64..3.0, pb in 0.0f64..1.5, pc in 0.0f64..1.5) {
            let n = 2 * half;
            let (je, _) = effective_couplings_periodic(&ring(n, alpha, 0.0)).unwrap();
            let spec = ring(n, alpha, t * je);
            if let Ok(c) = stationary_angles(&spec, (pb, pc)) {
                for blk in bdg_bands(&spec, &c).unwrap() {
                    for i in 0..4 {
                        for j in 0..4 {
                            prop_assert_eq!(blk.h_k[i][j], blk.h_k[j][i]);
                        }
                    }
                    let ev = &blk.eigenvalues;
                    let scale = blk.h_k.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
                    // spectrum of eta H is closed under negation
                    for z in ev {
                        let partner = ev.iter().map(|w| (w + z).norm()).fold(f64::INFINITY, f64::min);
                        prop_assert!(partner < 1e-10 * scale, "{partner:e} {z}");
                    }
                }
            }
        }
    }
}
