use std::collections::BTreeMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{coupling_matrix, ChainSpec};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUM_BUDGET: u128 = 1 << 26;

/// Product of spin coherent states, one per site.
///
/// Site `i` points along `(cos phi_i, sin phi_i)` with `sin phi_i = eps_i sin phi`
/// and `cos phi_i = xi_i cos phi`, so the four sign pairs reach the four
/// orientations `phi, -phi, phi + pi, pi - phi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    /// Twice the coherent-state length `l_i`.
    pub lengths2: Vec<u32>,
    pub eps: Vec<i8>,
    pub xi: Vec<i8>,
}

impl SpinConfiguration {
    pub fn uniform(n: usize, spin2: u32) -> Self {
        SpinConfiguration {
            lengths2: vec![spin2; n],
            eps: vec![1; n],
            xi: vec![1; n],
        }
    }

    /// `eps_i = (-1)^i`, starting with `+1` on the first site.
    pub fn alternating(n: usize, spin2: u32) -> Self {
        SpinConfiguration {
            lengths2: vec![spin2; n],
            eps: (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect(),
            xi: vec![1; n],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.eps.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.lengths2.iter().map(|&l| l as f64 / 2.0).collect()
    }

    /// Number of neighbouring pairs with opposite `eps`.
    pub fn domain_walls(&self) -> usize {
        self.eps.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of sites with `eps = -1`.
    pub fn inverted(&self) -> usize {
        self.eps.iter().filter(|&&e| e < 0).count()
    }

    /// Number of sites with `xi = -1`.
    pub fn flipped(&self) -> usize {
        self.xi.iter().filter(|&&x| x < 0).count()
    }

    fn validate(&self, spec: &ChainSpec, n: usize) -> Result<()> {
        if self.eps.len() != n || self.xi.len() != n || self.lengths2.len() != n {
            return Err(Error::InvalidSpec(format!(
                "configuration has {} sites, chain has {n}",
                self.eps.len()
            )));
        }
        let parity = spec.spin2 % 2;
        if self
            .lengths2
            .iter()
            .any(|&l| l > spec.spin2 || l % 2 != parity)
        {
            return Err(Error::InvalidSpec(format!(
                "lengths must satisfy delta <= l <= S in integer steps below S = {}",
                spec.spin()
            )));
        }
        if self.eps.iter().chain(&self.xi).any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpec(
                "orientation signs must be +1 or -1".into(),
            ));
        }
        Ok(())
    }
}

/// Coordinates of a one-dimensional landscape `-j sin^2 phi - slope B cos phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    pub j_mu: f64,
    /// Field coefficient per unit field: `B_mu = b_mu_per_field * B`.
    pub b_mu_per_field: f64,
    pub multiplicity: u128,
    /// Positive coupling and positive slope: the landscape has a minimum branch.
    pub stable: bool,
}

impl EffectiveCouplings {
    pub fn new(j_mu: f64, b_mu_per_field: f64, multiplicity: u128) -> Self {
        EffectiveCouplings {
            j_mu,
            b_mu_per_field,
            multiplicity,
            stable: j_mu > 0.0 && b_mu_per_field > 0.0,
        }
    }
}

/// Precomputed pieces for evaluating couplings of many configurations.
pub(crate) struct CouplingKernel {
    n: usize,
    spin: f64,
    matrix: Mat<f64>,
    /// All nonzero pair couplings equal: integer keys identify levels exactly.
    uniform_pairs: bool,
}

impl CouplingKernel {
    pub(crate) fn new(spec: &ChainSpec) -> Result<Self> {
        let n = spec.finite_sites()?;
        let matrix = coupling_matrix(spec)?;
        let mut value = None;
        let mut uniform_pairs = true;
        for i in 0..n {
            for j in 0..i {
                let v = matrix[(i, j)];
                if v != 0.0 {
                    match value {
                        None => value = Some(v),
                        Some(w) if w != v => uniform_pairs = false,
                        _ => {}
                    }
                }
            }
        }
        Ok(CouplingKernel {
            n,
            spin: spec.spin(),
            matrix,
            uniform_pairs,
        })
    }

    /// `(J0 / (S^2 N)) sum_{i<j} l_i eps_i l_j eps_j / d_ij^alpha`
    pub(crate) fn j_mu(&self, signed2: &[i64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..i {
                row += self.matrix[(i, j)] * signed2[j] as f64;
            }
            s += row * signed2[i] as f64;
        }
        s / (4.0 * self.spin * self.spin * self.n as f64)
    }

    /// `(1 / (S N)) sum_i l_i xi_i`
    pub(crate) fn slope(&self, signed2: &[i64]) -> f64 {
        signed2.iter().sum::<i64>() as f64 / (2.0 * self.spin * self.n as f64)
    }

    /// Integer key for the coupling sum, available when the pair weights are
    /// all equal.
    pub(crate) fn exact_j_key(&self, signed2: &[i64]) -> Option<i64> {
        if !self.uniform_pairs {
            return None;
        }
        let mut s = 0i64;
        for i in 0..self.n {
            for j in 0..i {
                if self.matrix[(i, j)] != 0.0 {
                    s += signed2[i] * signed2[j];
                }
            }
        }
        Some(s)
    }
}

pub fn effective_couplings(
    spec: &ChainSpec,
    config: &SpinConfiguration,
) -> Result<EffectiveCouplings> {
    let kernel = CouplingKernel::new(spec)?;
    config.validate(spec, kernel.n)?;
    let (a, b) = signed_lengths(config);
    Ok(EffectiveCouplings::new(
        kernel.j_mu(&a),
        kernel.slope(&b),
        1,
    ))
}

/// `(2 l_i eps_i, 2 l_i xi_i)`
fn signed_lengths(c: &SpinConfiguration) -> (Vec<i64>, Vec<i64>) {
    let a = c
        .lengths2
        .iter()
        .zip(&c.eps)
        .map(|(&l, &e)| l as i64 * e as i64)
        .collect();
    let b = c
        .lengths2
        .iter()
        .zip(&c.xi)
        .map(|(&l, &x)| l as i64 * x as i64)
        .collect();
    (a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigMode {
    /// `l = S`, `xi = +1`; `2^N` configurations.
    EpsOnly,
    /// `l = S`; `4^N` configurations.
    EpsXi,
    /// All lengths `delta..=S` and all four orientations.
    FullLengths,
}

impl std::str::FromStr for ConfigMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "eps_only" | "eps" => Ok(ConfigMode::EpsOnly),
            "eps_xi" => Ok(ConfigMode::EpsXi),
            "full_lengths" | "full" => Ok(ConfigMode::FullLengths),
            other => Err(format!(
                "unknown configuration mode '{other}' (expected eps_only, eps_xi or full_lengths)"
            )),
        }
    }
}

/// Symmetry reductions applied during enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reductions {
    /// Keep one of each pair related by `eps -> -eps`.
    pub global_flip: bool,
    /// Keep one of each pair related by `i -> N - 1 - i`.
    pub mirror: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SiteOption {
    l2: u32,
    eps: i8,
    xi: i8,
}

/// Lexicographic enumeration of configurations; site 0 is the most
/// significant position and each site runs through lengths from `S`
/// downwards, then `eps = +1, -1`, then `xi = +1, -1`.
pub struct ConfigEnumeration {
    kernel: CouplingKernel,
    options: Vec<SiteOption>,
    flip_of: Vec<usize>,
    total: u128,
    reductions: Reductions,
}

impl ConfigEnumeration {
    pub fn new(spec: &ChainSpec, mode: ConfigMode, reductions: Reductions) -> Result<Self> {
        Self::with_budget(spec, mode, reductions, DEFAULT_ENUM_BUDGET)
    }

    pub fn with_budget(
        spec: &ChainSpec,
        mode: ConfigMode,
        reductions: Reductions,
        budget: u128,
    ) -> Result<Self> {
        let kernel = CouplingKernel::new(spec)?;
        let s2 = spec.spin2;
        let lengths: Vec<u32> = match mode {
            ConfigMode::EpsOnly | ConfigMode::EpsXi => vec![s2],
            ConfigMode::FullLengths => (0..=s2 / 2).map(|t| s2 - 2 * t).collect(),
        };
        let xis: &[i8] = match mode {
            ConfigMode::EpsOnly => &[1],
            _ => &[1, -1],
        };
        let mut options = Vec::new();
        for &l2 in &lengths {
            for eps in [1i8, -1] {
                for &xi in xis {
                    options.push(SiteOption { l2, eps, xi });
                }
            }
        }
        let flip_of = options
            .iter()
            .map(|o| {
                options
                    .iter()
                    .position(|p| p.l2 == o.l2 && p.xi == o.xi && p.eps == -o.eps)
                    .expect("options closed under eps flip")
            })
            .collect();
        let total = (options.len() as u128)
            .checked_pow(kernel.n as u32)
            .filter(|&t| t <= budget)
            .ok_or(Error::Budget {
                what: "configuration enumeration",
                required: (options.len() as f64)
                    .powi(kernel.n as i32)
                    .min(u128::MAX as f64) as u128,
                budget,
            })?;
        Ok(ConfigEnumeration {
            kernel,
            options,
            flip_of,
            total,
            reductions,
        })
    }

    /// Number of configurations before symmetry reduction.
    pub fn total(&self) -> u128 {
        self.total
    }

    fn digits(&self, mut index: u128, out: &mut [usize]) {
        let base = self.options.len() as u128;
        for d in out.iter_mut().rev() {
            *d = (index % base) as usize;
            index /= base;
        }
    }

    fn index_of(&self, digits: impl Iterator<Item = usize>) -> u128 {
        let base = self.options.len() as u128;
        digits.fold(0u128, |acc, d| acc * base + d as u128)
    }

    /// Orbit size if `index` is the smallest member of its symmetry orbit.
    fn canonical(&self, index: u128, digits: &[usize]) -> Option<u128> {
        let r = self.reductions;
        if !r.global_flip && !r.mirror {
            return Some(1);
        }
        let mut images = vec![index];
        if r.global_flip {
            images.push(self.index_of(digits.iter().map(|&d| self.flip_of[d])));
        }
        if r.mirror {
            images.push(self.index_of(digits.iter().rev().copied()));
        }
        if r.global_flip && r.mirror {
            images.push(self.index_of(digits.iter().rev().map(|&d| self.flip_of[d])));
        }
        if images.iter().any(|&i| i < index) {
            return None;
        }
        images.sort_unstable();
        images.dedup();
        Some(images.len() as u128)
    }

    fn evaluate(&self, digits: &[usize]) -> (SpinConfiguration, Vec<i64>, Vec<i64>) {
        let opts: Vec<SiteOption> = digits.iter().map(|&d| self.options[d]).collect();
        let config = SpinConfiguration {
            lengths2: opts.iter().map(|o| o.l2).collect(),
            eps: opts.iter().map(|o| o.eps).collect(),
            xi: opts.iter().map(|o| o.xi).collect(),
        };
        let (a, b) = signed_lengths(&config);
        (config, a, b)
    }

    /// Stream of configurations with their couplings; `multiplicity` is the
    /// size of the symmetry orbit each yielded configuration represents.
    pub fn iter(&self) -> impl Iterator<Item = (SpinConfiguration, EffectiveCouplings)> + '_ {
        let mut digits = vec![0usize; self.kernel.n];
        (0..self.total).filter_map(move |index| {
            self.digits(index, &mut digits);
            let orbit = self.canonical(index, &digits)?;
            let (config, a, b) = self.evaluate(&digits);
            let c = EffectiveCouplings::new(self.kernel.j_mu(&a), self.kernel.slope(&b), orbit);
            Some((config, c))
        })
    }

    /// Distinct `(j_mu, slope)` pairs with summed multiplicities, sorted by
    /// `j_mu` then slope.
    ///
    /// Pairs are identified by exact integer sums when all pair couplings are
    /// equal, and by `j_mu / |J0|` and slope rounded to `1e-12` otherwise.
    pub fn distinct(&self, j_scale: f64) -> Vec<EffectiveCouplings> {
        let scale = if j_scale != 0.0 { j_scale.abs() } else { 1.0 };
        let mut map: BTreeMap<(i64, i64), EffectiveCouplings> = BTreeMap::new();
        let mut digits = vec![0usize; self.kernel.n];
        for index in 0..self.total {
            self.digits(index, &mut digits);
            let Some(orbit) = self.canonical(index, &digits) else {
                continue;
            };
            let (_, a, b) = self.evaluate(&digits);
            let j = self.kernel.j_mu(&a);
            let slope = self.kernel.slope(&b);
            let key = match self.kernel.exact_j_key(&a) {
                Some(k) => (k, b.iter().sum::<i64>()),
                None => (quantize(j / scale), quantize(slope)),
            };
            map.entry(key)
                .and_modify(|c| c.multiplicity += orbit)
                .or_insert_with(|| EffectiveCouplings::new(j, slope, orbit));
        }
        let mut out: Vec<EffectiveCouplings> = map.into_values().collect();
        out.sort_by(|x, y| {
            x.j_mu
                .total_cmp(&y.j_mu)
                .then(x.b_mu_per_field.total_cmp(&y.b_mu_per_field))
        });
        out
    }
}

fn quantize(x: f64) -> i64 {
    (x * 1e12).round() as i64
}

/// Convenience wrapper collecting the full stream.
pub fn enumerate_configs(
    spec: &ChainSpec,
    mode: ConfigMode,
    reductions: Reductions,
) -> Result<Vec<(SpinConfiguration, EffectiveCouplings)>> {
    Ok(ConfigEnumeration::new(spec, mode, reductions)?
        .iter()
        .collect())
}

/// Distinct coupling pairs of an enumeration, with multiplicities.
pub fn distinct_couplings(
    spec: &ChainSpec,
    mode: ConfigMode,
    reductions: Reductions,
) -> Result<Vec<EffectiveCouplings>> {
    Ok(ConfigEnumeration::new(spec, mode, reductions)?.distinct(spec.coupling()))
}

/// `(J_e, J_a)`: couplings of the uniform and alternating configurations of
/// an open chain.
pub fn effective_boundary_couplings(spec: &ChainSpec) -> Result<(f64, f64)> {
    if spec.boundary != crate::model::Boundary::Open {
        return Err(Error::Precondition(
            "effective_boundary_couplings expects an open chain".into(),
        ));
    }
    let n = spec.finite_sites()?;
    let e = effective_couplings(spec, &SpinConfiguration::uniform(n, spec.spin2))?;
    let a = effective_couplings(spec, &SpinConfiguration::alternating(n, spec.spin2))?;
    Ok((e.j_mu, a.j_mu))
}
