use serde::{Deserialize, Serialize};

use super::config::{EffectiveCouplings, DEFAULT_ENUM_BUDGET};
use crate::error::{Error, Result};
use crate::model::{coupling_matrix, ChainSpec};

/// `E(phi) = -j sin^2 phi - b cos phi`, per elementary spin.
pub fn landscape_energy(j_mu: f64, b_mu: f64, phi: f64) -> f64 {
    let s = phi.sin();
    -j_mu * s * s - b_mu * phi.cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Min,
    Max,
}

/// Extremal energy of one landscape as a function of the field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SemiclassicalLevel {
    pub couplings: EffectiveCouplings,
    pub branch: Branch,
    /// Field at which the extremum leaves `phi != 0`.
    pub b_c: f64,
    /// Number of elementary spins `2SN` converting per-spin to total energies.
    pub elementary_spins: f64,
}

/// Level of a landscape whose coupling and slope are nonzero with equal signs.
pub fn semiclassical_level(couplings: &EffectiveCouplings) -> Result<SemiclassicalLevel> {
    let (j, s) = (couplings.j_mu, couplings.b_mu_per_field);
    let valid = j.is_finite() && s.is_finite() && j != 0.0 && s != 0.0 && (j > 0.0) == (s > 0.0);
    if !valid {
        return Err(Error::NotALevel { j_mu: j, slope: s });
    }
    Ok(SemiclassicalLevel {
        couplings: *couplings,
        branch: if j > 0.0 { Branch::Min } else { Branch::Max },
        b_c: 2.0 * j.abs() / s.abs(),
        elementary_spins: 1.0,
    })
}

impl SemiclassicalLevel {
    /// Same level with totals scaled by `2SN` of `spec`.
    pub fn for_chain(mut self, spec: &ChainSpec) -> Result<Self> {
        self.elementary_spins = spec.spin2 as f64 * spec.finite_sites()? as f64;
        Ok(self)
    }

    /// Per-spin extremal energy: `-j - B_mu^2 / 4j` below `b_c`, `-B_mu`
    /// (minimum) or `+|B_mu|` (maximum) above.
    pub fn energy(&self, b: f64) -> f64 {
        let j = self.couplings.j_mu;
        let bb = self.couplings.b_mu_per_field.abs() * b;
        if b < self.b_c {
            -j - bb * bb / (4.0 * j)
        } else {
            match self.branch {
                Branch::Min => -bb,
                Branch::Max => bb,
            }
        }
    }

    pub fn total_energy(&self, b: f64) -> f64 {
        self.elementary_spins * self.energy(b)
    }

    /// Extremal angle: `arccos(B_mu / 2j)` below `b_c` (either sign), 0 above.
    pub fn angle(&self, b: f64) -> f64 {
        let j = self.couplings.j_mu;
        let bmu = self.couplings.b_mu_per_field * b;
        if b < self.b_c {
            (bmu / (2.0 * j)).clamp(-1.0, 1.0).acos()
        } else if self.branch == Branch::Min {
            0.0
        } else {
            std::f64::consts::PI
        }
    }

    /// Jump of `d^2 E / dB^2` across `b_c`.
    pub fn curvature_jump(&self) -> f64 {
        let s = self.couplings.b_mu_per_field;
        s * s / (2.0 * self.couplings.j_mu.abs())
    }
}

fn value_assignments(spec: &ChainSpec) -> Result<(usize, usize)> {
    let n = spec.finite_sites()?;
    let levels = spec.spin2 as usize + 1;
    let total = (levels as u128).checked_pow(n as u32);
    match total {
        Some(t) if t <= DEFAULT_ENUM_BUDGET => Ok((n, t as usize)),
        _ => Err(Error::Budget {
            what: "value assignments",
            required: total.unwrap_or(u128::MAX),
            budget: DEFAULT_ENUM_BUDGET,
        }),
    }
}

/// Enumerates `sum over sites` quantities for every assignment of `m_i`.
fn for_each_assignment(spec: &ChainSpec, mut f: impl FnMut(&[i64])) -> Result<()> {
    let (n, total) = value_assignments(spec)?;
    let levels = spec.spin2 as usize + 1;
    let s2 = spec.spin2 as i64;
    let mut m2 = vec![0i64; n];
    for index in 0..total {
        let mut rest = index;
        for d in m2.iter_mut().rev() {
            *d = 2 * (rest % levels) as i64 - s2;
            rest /= levels;
        }
        f(&m2);
    }
    Ok(())
}

/// Spectrum at zero field: `-(2/S) sum_{i<j} J_ij m_i m_j` over all
/// assignments, ascending.
pub fn ferro_spectrum_b0(spec: &ChainSpec) -> Result<Vec<f64>> {
    let matrix = coupling_matrix(spec)?;
    let spin = spec.spin();
    let n = spec.finite_sites()?;
    let mut out = Vec::new();
    for_each_assignment(spec, |m2| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += matrix[(i, j)] * (m2[i] * m2[j]) as f64;
            }
        }
        out.push(-(2.0 / spin) * s / 4.0);
    })?;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Spectrum without coupling: `-2B sum_i m_i` over all assignments, ascending.
pub fn para_spectrum_j0(spec: &ChainSpec) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for_each_assignment(spec, |m2| {
        out.push(-spec.b * m2.iter().sum::<i64>() as f64);
    })?;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u128,
}

/// `C(n, k)`, failing on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) / (i + 1) is an integer at every step.
        let num = c.checked_mul((n - i) as u128).ok_or(Error::Budget {
            what: "binomial coefficient (u128)",
            required: u128::MAX,
            budget: u128::MAX,
        })?;
        c = num / (i + 1) as u128;
    }
    Ok(c)
}

fn check_table_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("level tables need n >= 2, got {n}")));
    }
    if n > 120 {
        return Err(Error::Budget {
            what: "sites in degeneracy table",
            required: n as u128,
            budget: 120,
        });
    }
    Ok(())
}

/// Nearest-neighbour open chain at zero field: `-J0 (N - 1 - 2r)` with
/// degeneracy `2 C(N-1, r)`, `r` the number of domain walls. Ascending in `r`.
pub fn ising_levels(n: usize, j0: f64) -> Result<Vec<Level>> {
    check_table_size(n)?;
    (0..n)
        .map(|r| {
            Ok(Level {
                energy: -j0 * (n as f64 - 1.0 - 2.0 * r as f64),
                degeneracy: 2 * binomial(n as u64 - 1, r as u64)?,
            })
        })
        .collect()
}

/// All-to-all chain at zero field: `-(J0/2)[(N - 2s)^2 - N]` over the number
/// `s` of inverted spins, with equal energies merged; ascending in energy for
/// `J0 > 0`.
pub fn lmg_levels(n: usize, j0: f64) -> Result<Vec<Level>> {
    check_table_size(n)?;
    let mut out: Vec<(i64, u128)> = Vec::new();
    for s in 0..=n {
        let m = n as i64 - 2 * s as i64;
        let key = m * m - n as i64;
        let d = binomial(n as u64, s as u64)?;
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 += d,
            None => out.push((key, d)),
        }
    }
    out.sort_by_key(|&(k, _)| -k);
    Ok(out
        .into_iter()
        .map(|(k, d)| Level {
            energy: -j0 * k as f64 / 2.0,
            degeneracy: d,
        })
        .collect())
}

/// Fraction of levels at or below `e` (a level exactly at `e` counts).
pub fn counting_function(levels: &[f64], e: f64) -> Result<f64> {
    if levels.is_empty() {
        return Err(Error::Domain(
            "counting function of an empty spectrum".into(),
        ));
    }
    let below = levels.iter().filter(|&&x| x <= e).count();
    Ok(below as f64 / levels.len() as f64)
}

/// Counting function of a degeneracy table.
pub fn counting_function_table(levels: &[Level], e: f64) -> Result<f64> {
    let total: f64 = levels.iter().map(|l| l.degeneracy as f64).sum();
    if levels.is_empty() || total == 0.0 {
        return Err(Error::Domain(
            "counting function of an empty spectrum".into(),
        ));
    }
    let below: f64 = levels
        .iter()
        .filter(|l| l.energy <= e)
        .map(|l| l.degeneracy as f64)
        .sum();
    Ok(below / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alpha;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn landscape_examples() {
        assert_eq!(landscape_energy(0.3, 0.7, 0.0), -0.7);
        assert_relative_eq!(landscape_energy(0.3, 0.7, PI / 2.0), -0.3, epsilon = 1e-15);
        assert_relative_eq!(landscape_energy(1.0, 1.0, PI / 3.0), -1.25, epsilon = 1e-15);
    }

    #[test]
    fn level_examples() {
        let l = semiclassical_level(&EffectiveCouplings::new(1.0, 1.0, 1)).unwrap();
        assert_eq!(l.branch, Branch::Min);
        assert_eq!(l.energy(0.0), -1.0);
        assert_eq!(l.b_c, 2.0);
        assert_relative_eq!(l.energy(2.0 - 1e-12), -2.0, epsilon = 1e-11);
        assert_eq!(l.energy(2.0), -2.0);
        let l = semiclassical_level(&EffectiveCouplings::new(0.5, 1.0, 1)).unwrap();
        assert_eq!(l.b_c, 1.0);
        let spec = ChainSpec::new(2, 1, Alpha::Finite(1.0), 1.0, 0.0);
        assert_eq!(l.for_chain(&spec).unwrap().total_energy(0.0), -1.0);
    }

    #[test]
    fn maximum_branch() {
        let l = semiclassical_level(&EffectiveCouplings::new(-1.0, -0.5, 1)).unwrap();
        assert_eq!(l.branch, Branch::Max);
        assert_eq!(l.b_c, 4.0);
        for b in [0.0, 1.0, 3.9, 4.0, 6.0] {
            let brute = (0..=20000)
                .map(|t| landscape_energy(-1.0, -0.5 * b, PI * t as f64 / 20000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((l.energy(b) - brute).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_non_levels() {
        for (j, s) in [(0.0, 1.0), (1.0, 0.0), (1.0, -1.0), (-1.0, 1.0)] {
            assert!(matches!(
                semiclassical_level(&EffectiveCouplings::new(j, s, 1)),
                Err(Error::NotALevel { .. })
            ));
        }
    }

    #[test]
    fn ising_tables() {
        let t = ising_levels(3, 1.0).unwrap();
        assert_eq!(
            t.iter()
                .map(|l| (l.energy, l.degeneracy))
                .collect::<Vec<_>>(),
            vec![(-2.0, 2), (0.0, 4), (2.0, 2)]
        );
        for n in 2..=20 {
            let sum: u128 = ising_levels(n, 1.0)
                .unwrap()
                .iter()
                .map(|l| l.degeneracy)
                .sum();
            assert_eq!(sum, 1 << n);
        }
        let t = ising_levels(11, 1.0).unwrap();
        assert_eq!(t[0].energy, -10.0);
        assert_eq!(t[10].energy, 10.0);
        assert_relative_eq!(
            counting_function_table(&ising_levels(3, 1.0).unwrap(), 0.0).unwrap(),
            0.75
        );
    }

    #[test]
    fn lmg_tables() {
        let t = lmg_levels(4, 1.0).unwrap();
        assert_eq!(
            t.iter()
                .map(|l| (l.energy, l.degeneracy))
                .collect::<Vec<_>>(),
            vec![(-6.0, 2), (0.0, 8), (2.0, 6)]
        );
        for n in 2..=30 {
            let sum: u128 = lmg_levels(n, 1.0)
                .unwrap()
                .iter()
                .map(|l| l.degeneracy)
                .sum();
            assert_eq!(sum, 1 << n);
        }
        // Per inverted-spin count the spacing grows linearly.
        let n = 9.0;
        let e = |s: f64| -0.5 * ((n - 2.0 * s).powi(2) - n);
        let d1: Vec<f64> = (0..5).map(|s| e(s as f64 + 1.0) - e(s as f64)).collect();
        for w in d1.windows(2) {
            assert_eq!(w[1] - w[0], -4.0);
        }
    }

    #[test]
    fn enumerated_spectra() {
        let spec = ChainSpec::new(11, 1, Alpha::Infinite, 1.0, 0.0);
        let ev = ferro_spectrum_b0(&spec).unwrap();
        for l in ising_levels(11, 1.0).unwrap() {
            let c = ev.iter().filter(|&&x| x == l.energy).count() as u128;
            assert_eq!(c, l.degeneracy);
        }
        let spec = ChainSpec::new(2, 2, Alpha::Finite(1.0), 1.0, 0.0);
        assert_eq!(
            ferro_spectrum_b0(&spec).unwrap(),
            vec![-2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 2.0]
        );
        let spec = ChainSpec::new(3, 1, Alpha::Finite(1.0), 0.0, 1.0);
        assert_eq!(
            para_spectrum_j0(&spec).unwrap(),
            vec![-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0]
        );
        let spec = ChainSpec::new(1, 5, Alpha::Finite(1.0), 0.0, 1.0);
        assert_eq!(
            para_spectrum_j0(&spec).unwrap(),
            vec![-5.0, -3.0, -1.0, 1.0, 3.0, 5.0]
        );
    }

    #[test]
    fn counting_edges() {
        let lv = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(counting_function(&lv, 0.5).unwrap(), 0.0);
        assert_eq!(counting_function(&lv, 2.0).unwrap(), 0.75);
        assert_eq!(counting_function(&lv, 5.0).unwrap(), 1.0);
        assert!(counting_function(&[], 0.0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3).unwrap(), 120);
        assert_eq!(binomial(100, 50).unwrap(), 100891344545564193334812497256);
        assert_eq!(binomial(3, 5).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn level_smooth_at_bifurcation(j in 0.05f64..5.0, s in 0.05f64..1.0, neg in any::<bool>()) {
            let (j, s) = if neg { (-j, -s) } else { (j, s) };
            let l = semiclassical_level(&EffectiveCouplings::new(j, s, 1)).unwrap();
            let (bc, h) = (l.b_c, 1e-5);
            prop_assert!((l.energy(bc - 1e-12) - l.energy(bc)).abs() < 1e-9);
            let left = (l.energy(bc) - l.energy(bc - h)) / h;
            let right = (l.energy(bc + h) - l.energy(bc)) / h;
            prop_assert!((left - right).abs() < 1e-4 * (1.0 + s.abs()));
            let second = |b: f64| (l.energy(b + h) - 2.0 * l.energy(b) + l.energy(b - h)) / (h * h);
            let jump = (second(bc + 10.0 * h) - second(bc - 10.0 * h)).abs();
            prop_assert!((jump - l.curvature_jump()).abs() < 1e-3 * (1.0 + l.curvature_jump()));
        }

        #[test]
        fn landscape_minimizers(j in 0.1f64..3.0, bmu in 0.0f64..8.0) {
            // Dense scan of (-pi, pi] at 1e-3 resolution.
            let steps = (2.0 * PI / 1e-3) as usize;
            let vals: Vec<(f64, f64)> = (0..steps)
                .map(|t| {
                    let phi = -PI + 2.0 * PI * (t as f64 + 1.0) / steps as f64;
                    (phi, landscape_energy(j, bmu, phi))
                })
                .collect();
            let mut minima = Vec::new();
            for i in 0..steps {
                let (prev, next) = (vals[(i + steps - 1) % steps].1, vals[(i + 1) % steps].1);
                if vals[i].1 < prev && vals[i].1 <= next {
                    minima.push(vals[i].0);
                }
            }
            if bmu < 2.0 * j - 1e-2 {
                let phi = (bmu / (2.0 * j)).acos();
                prop_assert_eq!(minima.len(), 2);
                prop_assert!(minima.iter().all(|m| (m.abs() - phi).abs() < 2e-3));
            } else if bmu > 2.0 * j + 1e-2 {
                prop_assert_eq!(minima.len(), 1);
                prop_assert!(minima[0].abs() < 2e-3);
            }
        }

        #[test]
        fn counting_monotone(levels in proptest::collection::vec(-10.0f64..10.0, 1..50), a in -12.0f64..12.0, b in -12.0f64..12.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let x = counting_function(&levels, lo).unwrap();
            let y = counting_function(&levels, hi).unwrap();
            prop_assert!(x <= y);
            prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        }
    }
}
