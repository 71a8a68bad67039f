use std::fmt;
use std::str::FromStr;

use faer::Mat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest Hilbert dimension accepted for dense diagonalization by default.
pub const DEFAULT_DIM_BUDGET: usize = 20_000;

/// Decay exponent of the pair coupling `J0 / d^alpha`.
///
/// `Infinite` is the nearest-neighbour limit: the weight is 1 at distance 1
/// and exactly 0 beyond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    /// Coupling weight `1/d^alpha` for a positive integer distance.
    pub fn weight(self, d: u64) -> f64 {
        debug_assert!(d >= 1);
        match self {
            Alpha::Infinite => {
                if d == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Alpha::Finite(a) if a == 0.0 => 1.0,
            Alpha::Finite(a) => (d as f64).powf(-a),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Alpha::Infinite)
    }

    /// Finite exponent, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Alpha::Finite(a) => Some(a),
            Alpha::Infinite => None,
        }
    }

    /// `true` when the exponent exceeds `x` (always true for the infinite sentinel).
    pub fn exceeds(self, x: f64) -> bool {
        match self {
            Alpha::Finite(a) => a > x,
            Alpha::Infinite => true,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Alpha::Infinite);
        }
        let a: f64 = t.parse().map_err(|_| format!("invalid alpha '{s}'"))?;
        if a.is_infinite() && a > 0.0 {
            Ok(Alpha::Infinite)
        } else if a.is_finite() && a >= 0.0 {
            Ok(Alpha::Finite(a))
        } else {
            Err(format!(
                "alpha must be a non-negative real or 'inf', got '{s}'"
            ))
        }
    }
}

/// Number of sites, with a thermodynamic-limit sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sites {
    Finite(usize),
    Infinite,
}

impl Sites {
    pub fn finite(self) -> Option<usize> {
        match self {
            Sites::Finite(n) => Some(n),
            Sites::Infinite => None,
        }
    }
}

impl fmt::Display for Sites {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sites::Finite(n) => write!(f, "{n}"),
            Sites::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Sites {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Sites::Infinite);
        }
        t.parse::<usize>()
            .map(Sites::Finite)
            .map_err(|_| format!("number of sites must be a positive integer or 'inf', got '{s}'"))
    }
}

// Both sentinels serialize as the string "inf" and otherwise as plain numbers.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrInf<T> {
    Num(T),
    Text(String),
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Finite(a) => s.serialize_f64(*a),
            Alpha::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrInf::<f64>::deserialize(d)? {
            NumOrInf::Num(a) => Alpha::from_str(&a.to_string()).map_err(serde::de::Error::custom),
            NumOrInf::Text(t) => Alpha::from_str(&t).map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Sites {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sites::Finite(n) => s.serialize_u64(*n as u64),
            Sites::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Sites {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrInf::<u64>::deserialize(d)? {
            NumOrInf::Num(n) => Ok(Sites::Finite(n as usize)),
            NumOrInf::Text(t) => Sites::from_str(&t).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" | "ring" => Ok(Boundary::Periodic),
            other => Err(format!(
                "unknown boundary '{other}' (expected open or periodic)"
            )),
        }
    }
}

/// Problem definition: `N` spins of length `S = spin2/2` with pair couplings
/// `J0/|i-j|^alpha` along x and a transverse field `B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: Sites,
    pub spin2: u32,
    pub alpha: Alpha,
    pub j0: f64,
    pub b: f64,
    pub boundary: Boundary,
    /// Replace `J0` by `J0/N` everywhere.
    pub kac_rescale: bool,
}

impl ChainSpec {
    /// Open chain of `n` sites.
    pub fn new(n: usize, spin2: u32, alpha: Alpha, j0: f64, b: f64) -> Self {
        ChainSpec {
            n_sites: Sites::Finite(n),
            spin2,
            alpha,
            j0,
            b,
            boundary: Boundary::Open,
            kac_rescale: false,
        }
    }

    /// Ring in the thermodynamic limit.
    pub fn infinite_ring(spin2: u32, alpha: Alpha, j0: f64, b: f64) -> Self {
        ChainSpec {
            n_sites: Sites::Infinite,
            spin2,
            alpha,
            j0,
            b,
            boundary: Boundary::Periodic,
            kac_rescale: false,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.boundary = Boundary::Periodic;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_field(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_j0(mut self, j0: f64) -> Self {
        self.j0 = j0;
        self
    }

    pub fn with_kac(mut self, on: bool) -> Self {
        self.kac_rescale = on;
        self
    }

    pub fn spin(&self) -> f64 {
        self.spin2 as f64 / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.spin2 < 1 {
            return Err(Error::InvalidSpec("spin2 must be at least 1".into()));
        }
        if let Sites::Finite(n) = self.n_sites {
            if n < 1 {
                return Err(Error::InvalidSpec("n_sites must be at least 1".into()));
            }
        } else if self.kac_rescale {
            return Err(Error::InvalidSpec(
                "Kac rescaling is undefined in the thermodynamic limit".into(),
            ));
        }
        if !self.j0.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "j0 must be finite, got {}",
                self.j0
            )));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "field b must be finite and non-negative, got {}",
                self.b
            )));
        }
        if let Alpha::Finite(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InvalidSpec(format!("alpha must be >= 0, got {a}")));
            }
        }
        Ok(())
    }

    /// Validated finite site count.
    pub fn finite_sites(&self) -> Result<usize> {
        self.validate()?;
        self.n_sites
            .finite()
            .ok_or_else(|| Error::InvalidSpec("operation needs a finite number of sites".into()))
    }

    /// Coupling constant after optional Kac rescaling.
    pub fn coupling(&self) -> f64 {
        match (self.kac_rescale, self.n_sites) {
            (true, Sites::Finite(n)) => self.j0 / n as f64,
            _ => self.j0,
        }
    }

    /// `(2S+1)^N`, or `None` on overflow or infinite size.
    pub fn hilbert_dim(&self) -> Option<usize> {
        let n = self.n_sites.finite()?;
        (self.spin2 as usize + 1).checked_pow(u32::try_from(n).ok()?)
    }

    /// Distance entering the coupling between sites `i` and `j` (zero-based).
    pub(crate) fn distance(&self, n: usize, i: usize, j: usize) -> u64 {
        let d = i.abs_diff(j);
        match self.boundary {
            Boundary::Open => d as u64,
            Boundary::Periodic => d.min(n - d) as u64,
        }
    }
}

/// Ordered displacement set `I_N` (or `I_N` without zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pub members: Vec<i64>,
}

impl IndexSet {
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn index_set(n: usize, exclude_zero: bool) -> Result<IndexSet> {
    if n < 2 {
        return Err(Error::Domain(format!("index set needs n >= 2, got {n}")));
    }
    let n = n as i64;
    let (lo, hi) = if n % 2 == 0 {
        (-n / 2, n / 2 - 1)
    } else {
        (-(n - 1) / 2, (n - 1) / 2)
    };
    let members = (lo..=hi).filter(|&r| !(exclude_zero && r == 0)).collect();
    Ok(IndexSet { members })
}

/// Symmetric, zero-diagonal matrix of pair couplings `J_ij`.
///
/// For rings the distance is the ring distance; the antipodal pair of an
/// even ring couples once, as in the displacement sum over `I_N^0`.
pub fn coupling_matrix(spec: &ChainSpec) -> Result<Mat<f64>> {
    let n = spec.finite_sites()?;
    let j0 = spec.coupling();
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = j0 * spec.alpha.weight(spec.distance(n, i, j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
