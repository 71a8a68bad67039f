//! Dense exact diagonalization in the `S_z` product basis.
//!
//! The field term is rotated from `S_y` to `S_z` by a global rotation about
//! the x axis, which leaves the spectrum unchanged and makes every matrix
//! element real:
//!
//! `H' = -(2/S) sum_{i<j} J_ij Sx_i Sx_j - 2B sum_i Sz_i`.

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{coupling_matrix, ChainSpec, DEFAULT_DIM_BUDGET};

#[derive(Clone, Debug)]
pub struct DenseHamiltonian {
    pub dim: usize,
    pub matrix: Mat<f64>,
    pub spec: ChainSpec,
}

/// Full spectra along a field grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSeries {
    pub b_grid: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
    pub ground_energy: Vec<f64>,
}

/// Basis enumeration for one block: a list of product states, each stored as
/// its mixed-radix index (site 0 is the least significant digit, digit
/// `k_i = m_i + S`).
struct Basis {
    states: Vec<usize>,
    /// Inverse of `states`; `usize::MAX` for states outside the block.
    position: Vec<usize>,
}

impl Basis {
    fn full(dim: usize) -> Self {
        Basis {
            states: (0..dim).collect(),
            position: (0..dim).collect(),
        }
    }

    /// States with `sum_i k_i` of the given parity; the exchange term moves two
    /// digits by one each and so never mixes the two sets.
    fn parity(dim: usize, levels: usize, n: usize, odd: bool) -> Self {
        let mut states = Vec::with_capacity(dim / 2 + 1);
        let mut position = vec![usize::MAX; dim];
        for s in 0..dim {
            let mut rest = s;
            let mut total = 0;
            for _ in 0..n {
                total += rest % levels;
                rest /= levels;
            }
            if (total % 2 == 1) == odd {
                position[s] = states.len();
                states.push(s);
            }
        }
        Basis { states, position }
    }
}

fn check_dim(spec: &ChainSpec, budget: usize) -> Result<usize> {
    spec.finite_sites()?;
    let dim = spec.hilbert_dim().ok_or(Error::Budget {
        what: "Hilbert space dimension",
        required: u128::MAX,
        budget: budget as u128,
    })?;
    if dim > budget {
        return Err(Error::Budget {
            what: "Hilbert space dimension",
            required: dim as u128,
            budget: budget as u128,
        });
    }
    Ok(dim)
}

/// Matrix of `H'` restricted to `basis`, assembled below the diagonal and
/// mirrored so that it is exactly symmetric.
fn assemble(spec: &ChainSpec, basis: &Basis) -> Result<Mat<f64>> {
    let n = spec.finite_sites()?;
    let s2 = spec.spin2 as i64;
    let levels = spec.spin2 as usize + 1;
    let spin = spec.spin();
    let couplings = coupling_matrix(spec)?;

    // Raising coefficient sqrt(S(S+1) - m(m+1)) from digit k, in doubled integers.
    let raise: Vec<f64> = (0..levels as i64)
        .map(|k| {
            let m2 = 2 * k - s2;
            (((s2 * (s2 + 2) - m2 * (m2 + 2)) as f64) / 4.0).sqrt()
        })
        .collect();
    let stride: Vec<usize> = (0..n).map(|i| levels.pow(i as u32)).collect();
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, -(2.0 / spin) * couplings[(i, j)] * 0.25))
        .filter(|&(_, _, c)| c != 0.0)
        .collect();

    let dim = basis.states.len();
    let mut h = Mat::<f64>::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    for (col, &state) in basis.states.iter().enumerate() {
        let mut rest = state;
        let mut m2_total = 0i64;
        for d in digits.iter_mut() {
            *d = rest % levels;
            rest /= levels;
            m2_total += 2 * *d as i64 - s2;
        }
        h[(col, col)] = -spec.b * m2_total as f64;
        for &(i, j, c) in &pairs {
            let (ki, kj) = (digits[i], digits[j]);
            // (target digit offset, ladder coefficient) for each site
            let moves = |k: usize| {
                let up = (k + 1 < levels).then(|| (1isize, raise[k]));
                let down = (k > 0).then(|| (-1isize, raise[k - 1]));
                [up, down]
            };
            for (di, ci) in moves(ki).into_iter().flatten() {
                for (dj, cj) in moves(kj).into_iter().flatten() {
                    let target = (state as isize
                        + di * stride[i] as isize
                        + dj * stride[j] as isize) as usize;
                    let row = basis.position[target];
                    if row > col {
                        h[(row, col)] += c * ci * cj;
                    }
                }
            }
        }
    }
    for col in 0..dim {
        for row in col + 1..dim {
            h[(col, row)] = h[(row, col)];
        }
    }
    Ok(h)
}

pub fn build_hamiltonian(spec: &ChainSpec) -> Result<DenseHamiltonian> {
    build_hamiltonian_with_budget(spec, DEFAULT_DIM_BUDGET)
}

pub fn build_hamiltonian_with_budget(spec: &ChainSpec, budget: usize) -> Result<DenseHamiltonian> {
    let dim = check_dim(spec, budget)?;
    let matrix = assemble(spec, &Basis::full(dim))?;
    Ok(DenseHamiltonian {
        dim,
        matrix,
        spec: *spec,
    })
}

fn eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?} (dimension {})", m.nrows())))?;
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver(format!(
            "non-finite eigenvalue (dimension {})",
            m.nrows()
        )));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

impl DenseHamiltonian {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.matrix)
    }

    /// Largest relative residual `|Hv - lv| / |H|_F` over `samples` evenly
    /// spaced eigenpairs.
    pub fn residual_spot_check(&self, samples: usize) -> Result<f64> {
        let evd = self
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let norm = self.matrix.norm_l2().max(f64::MIN_POSITIVE);
        let (u, s) = (evd.U(), evd.S().column_vector());
        let samples = samples.clamp(1, self.dim);
        let mut worst = 0.0f64;
        for t in 0..samples {
            let idx = if samples == 1 {
                0
            } else {
                t * (self.dim - 1) / (samples - 1)
            };
            let v = u.col(idx);
            let r = &self.matrix * v - v * s[idx];
            worst = worst.max(r.norm_l2() / norm);
        }
        Ok(worst)
    }
}

/// All eigenvalues, ascending.
pub fn spectrum(spec: &ChainSpec) -> Result<Vec<f64>> {
    build_hamiltonian(spec)?.eigenvalues()
}

/// One full spectrum per field value; points run in parallel and are returned
/// in grid order.
pub fn spectrum_sweep(spec: &ChainSpec, b_grid: &[f64]) -> Result<SpectrumSeries> {
    if b_grid.is_empty() {
        return Err(Error::InvalidSpec("field grid is empty".into()));
    }
    if b_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidSpec(
            "field grid must be strictly ascending".into(),
        ));
    }
    check_dim(spec, DEFAULT_DIM_BUDGET)?;
    let levels = b_grid
        .par_iter()
        .enumerate()
        .map(|(i, &b)| spectrum(&spec.with_field(b)).map_err(|e| Error::at(i, e)))
        .collect::<Result<Vec<_>>>()?;
    let ground_energy = levels.iter().map(|l| l[0]).collect();
    Ok(SpectrumSeries {
        b_grid: b_grid.to_vec(),
        levels,
        ground_energy,
    })
}

/// Lowest eigenvalue.
///
/// Diagonalizes the two parity blocks of `sum_i (m_i + S)` separately, which
/// quarters the work against the full matrix.
pub fn ground_state_energy(spec: &ChainSpec) -> Result<f64> {
    let dim = check_dim(spec, DEFAULT_DIM_BUDGET)?;
    let n = spec.finite_sites()?;
    let levels = spec.spin2 as usize + 1;
    let mut best = f64::INFINITY;
    for odd in [false, true] {
        let basis = Basis::parity(dim, levels, n, odd);
        if basis.states.is_empty() {
            continue;
        }
        best = best.min(eigenvalues(&assemble(spec, &basis)?)?[0]);
    }
    Ok(best)
}

/// Groups an ascending spectrum into `(value, degeneracy)` pairs; levels closer
/// than `1e-9` times the spectral width are merged.
pub fn distinct_levels(levels: &[f64]) -> Vec<(f64, usize)> {
    let Some((&lo, &hi)) = levels.first().zip(levels.last()) else {
        return Vec::new();
    };
    let tol = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut anchor = f64::NAN;
    for &x in levels {
        match out.last_mut() {
            Some((v, c)) if x - anchor <= tol => {
                *c += 1;
                *v += (x - *v) / *c as f64;
            }
            _ => {
                out.push((x, 1));
                anchor = x;
            }
        }
    }
    out
}
