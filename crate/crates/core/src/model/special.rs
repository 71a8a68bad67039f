//! Zeta-type special functions and the lattice Fourier sums built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::chain::{index_set, Alpha, Sites};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

/// Dirichlet eta function for real `alpha >= 0`.
///
/// Borwein's accelerated alternating series; the error after `n` terms is
/// bounded by `3 / (3 + sqrt 8)^n`.
pub fn eta(alpha: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("eta needs alpha >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(0.5);
    }
    if alpha.is_infinite() {
        return Ok(1.0);
    }
    let n = borwein_terms(tol);
    // d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0_f64;
    let mut acc = term;
    d.push(acc);
    for i in 0..n {
        let fi = i as f64;
        let fnn = n as f64;
        term *= 4.0 * (fnn + fi) * (fnn - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        acc += term;
        d.push(acc);
    }
    let dn = d[n];
    let mut s = 0.0;
    for k in (0..n).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * (d[k] - dn) * ((k + 1) as f64).powf(-alpha);
    }
    Ok(-s / dn)
}

/// Riemann zeta function for real `alpha > 1`, via `eta / (1 - 2^(1-alpha))`.
pub fn zeta(alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!(
            "zeta(alpha) diverges for alpha <= 1, got {alpha}"
        )));
    }
    if alpha.is_infinite() {
        return Ok(1.0);
    }
    let e = eta(alpha, tol)?;
    // 1 - 2^(1-alpha) without cancellation near alpha = 1
    let factor = -((1.0 - alpha) * std::f64::consts::LN_2).exp_m1();
    Ok(e / factor)
}

fn borwein_terms(tol: f64) -> usize {
    let n = ((3.0 / tol).ln() / (3.0 + 8f64.sqrt()).ln()).ceil() as usize + 2;
    n.clamp(4, 80)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Zeta and eta values at one exponent; `zeta` is `None` where it diverges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaEta {
    pub zeta: Option<f64>,
    pub eta: f64,
}

pub fn zeta_eta(alpha: Alpha, tol: f64) -> Result<ZetaEta> {
    match alpha {
        Alpha::Infinite => Ok(ZetaEta {
            zeta: Some(1.0),
            eta: 1.0,
        }),
        Alpha::Finite(a) => Ok(ZetaEta {
            zeta: if a > 1.0 { Some(zeta(a, tol)?) } else { None },
            eta: eta(a, tol)?,
        }),
    }
}

/// Thermodynamic-limit couplings of the uniform and alternating states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoCouplings {
    pub zeta_alpha: Option<f64>,
    pub eta_alpha: f64,
    /// `J0 zeta(alpha)`; `None` for `alpha <= 1`.
    pub j_e_inf: Option<f64>,
    /// `-J0 eta(alpha)`.
    pub j_a_inf: f64,
    /// Finite-size factor `1 - 1/N` (1 in the limit).
    pub c_n: f64,
}

impl ThermoCouplings {
    pub fn new(alpha: Alpha, j0: f64, n: Sites, tol: f64) -> Result<Self> {
        let ze = zeta_eta(alpha, tol)?;
        let c_n = match n {
            Sites::Finite(0) => {
                return Err(Error::InvalidSpec("n_sites must be at least 1".into()))
            }
            Sites::Finite(n) => 1.0 - 1.0 / n as f64,
            Sites::Infinite => 1.0,
        };
        Ok(ThermoCouplings {
            zeta_alpha: ze.zeta,
            eta_alpha: ze.eta,
            j_e_inf: ze.zeta.map(|z| j0 * z),
            j_a_inf: -j0 * ze.eta,
            c_n,
        })
    }
}

/// Hurwitz zeta `sum_{m>=0} (m+a)^-s` for `s > 1`, `a > 0` (Euler-Maclaurin).
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) || !(a > 0.0) {
        return Err(Error::Domain(format!(
            "Hurwitz zeta needs s > 1 and a > 0, got s = {s}, a = {a}"
        )));
    }
    if s.is_infinite() {
        return Ok(if a < 1.0 {
            f64::INFINITY
        } else if a == 1.0 {
            1.0
        } else {
            0.0
        });
    }
    const M: usize = 24;
    // B_{2j} / (2j)!
    const B2J: [f64; 10] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
        43867.0 / 5109094217170944000.0,
        -174611.0 / 802857662698291200000.0,
    ];
    let head: f64 = (0..M).map(|m| (m as f64 + a).powf(-s)).rev().sum();
    let x = M as f64 + a;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // (s)_{2j-1} x^{-s-2j+1}
    let mut rising = s;
    let mut xp = x.powf(-s - 1.0);
    for (j, b) in B2J.iter().enumerate() {
        let t = b * rising * xp;
        tail += t;
        if t.abs() < 1e-18 * tail.abs() {
            break;
        }
        let m = 2.0 * j as f64 + 1.0;
        rising *= (s + m) * (s + m + 1.0);
        xp /= x * x;
    }
    Ok(head + tail)
}

/// Sum of `f(r) / |r|^alpha` over the ordered displacement set `I_N^0`.
pub(crate) fn ring_sum(n: usize, alpha: Alpha, f: impl Fn(i64) -> f64) -> Result<f64> {
    let set = index_set(n, true)?;
    Ok(set
        .iter()
        .map(|r| f(r) * alpha.weight(r.unsigned_abs()))
        .sum())
}

/// Truncated Clausen sum `C_alpha^(N)(k) = (1/2) sum_{r in I_N^0} cos(k r) / |r|^alpha`.
///
/// `Sites::Infinite` gives `Re Li_alpha(e^{ik})`.
pub fn clausen_truncated(alpha: Alpha, k: f64, n: Sites) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::Domain(format!(
            "quasimomentum must be finite, got {k}"
        )));
    }
    match n {
        Sites::Finite(n) => Ok(0.5 * ring_sum(n, alpha, |r| (k * r as f64).cos())?),
        Sites::Infinite => clausen_limit(alpha, k),
    }
}

fn clausen_limit(alpha: Alpha, k: f64) -> Result<f64> {
    let a = match alpha {
        Alpha::Infinite => return Ok(k.cos()),
        Alpha::Finite(a) => a,
    };
    // Reduce to [0, pi]; the sum is even and 2 pi periodic.
    let mut kr = k.abs().rem_euclid(2.0 * PI);
    if kr > PI {
        kr = 2.0 * PI - kr;
    }
    if kr == 0.0 {
        return zeta(a, DEFAULT_TOL);
    }
    if kr == PI {
        return Ok(-eta(a, DEFAULT_TOL)?);
    }
    Ok(oscillatory_sum(kr, a, 0.0, 1)?.value.re)
}

/// Result of a truncated or accelerated Lerch-type sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LerchSum {
    pub value: Complex64,
    /// Estimated magnitude of what is missing from `value`.
    pub error_estimate: f64,
}

/// Partial sum `sum_{m=0}^{n_terms-1} e^{ikm} / (m+a)^alpha`.
///
/// `error_estimate` is the magnitude of the remaining tail (infinite when the
/// series diverges).
pub fn lerch_truncated(k: f64, alpha: f64, a: f64, n_terms: usize) -> Result<LerchSum> {
    check_lerch(k, alpha, a)?;
    if n_terms < 1 {
        return Err(Error::Domain("lerch_truncated needs n_terms >= 1".into()));
    }
    let z = Complex64::from_polar(1.0, k);
    let mut value = Complex64::new(0.0, 0.0);
    for m in 0..n_terms {
        value += Complex64::from_polar(1.0, k * m as f64) * (m as f64 + a).powf(-alpha);
    }
    let error_estimate = if is_multiple_of_two_pi(k) {
        if alpha > 1.0 {
            hurwitz_zeta(alpha, a + n_terms as f64)?
        } else {
            f64::INFINITY
        }
    } else if alpha > 0.0 {
        let (tail, err) = euler_tail(z, alpha, a, n_terms);
        tail.norm() + err
    } else {
        f64::INFINITY
    };
    Ok(LerchSum {
        value,
        error_estimate,
    })
}

/// Limit `sum_{m>=0} e^{ikm} / (m+a)^alpha` (Lerch transcendent `Phi(e^{ik}, alpha, a)`).
///
/// Requires `alpha > 1` at `k = 0 (mod 2 pi)` and `alpha > 0` elsewhere.
pub fn lerch(k: f64, alpha: f64, a: f64) -> Result<LerchSum> {
    check_lerch(k, alpha, a)?;
    if is_multiple_of_two_pi(k) {
        return Ok(LerchSum {
            value: Complex64::new(hurwitz_zeta(alpha, a)?, 0.0),
            error_estimate: 1e-15,
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "Lerch series diverges for alpha = {alpha}"
        )));
    }
    let kr = k.rem_euclid(2.0 * PI);
    oscillatory_sum(kr, alpha, a, 0)
}

fn check_lerch(k: f64, alpha: f64, a: f64) -> Result<()> {
    if !k.is_finite() || !(alpha >= 0.0) || !alpha.is_finite() || !(a > 0.0) {
        return Err(Error::Domain(format!(
            "Lerch sum needs finite k, alpha >= 0 and a > 0; got k = {k}, alpha = {alpha}, a = {a}"
        )));
    }
    Ok(())
}

fn is_multiple_of_two_pi(k: f64) -> bool {
    let r = k.rem_euclid(2.0 * PI);
    r == 0.0 || r == 2.0 * PI
}

const MAX_DIRECT_TERMS: usize = 50_000_000;

/// `sum_{m >= start} e^{ikm} (m+a)^-alpha` for `k` off the lattice `2 pi Z`:
/// a direct head followed by an asymptotic tail.
fn oscillatory_sum(k: f64, alpha: f64, a: f64, start: usize) -> Result<LerchSum> {
    let z = Complex64::from_polar(1.0, k);
    let gap = (1.0 - z).norm();
    let want = (40.0 * (alpha + 1.0) / gap).ceil().max(64.0);
    let cut = start + (want as usize).min(MAX_DIRECT_TERMS);
    let mut head = Complex64::new(0.0, 0.0);
    // Accumulate from the small end so the tail-like terms are not swamped.
    for m in (start..cut).rev() {
        head += Complex64::from_polar(1.0, k * m as f64) * (m as f64 + a).powf(-alpha);
    }
    let (tail, error_estimate) = euler_tail(z, alpha, a, cut);
    Ok(LerchSum {
        value: head + tail,
        error_estimate,
    })
}

const TAIL_ORDER: usize = 40;

/// Asymptotic expansion of `sum_{m >= n} z^m g(m)`, `g(m) = (m+a)^-alpha`:
/// `z^n sum_j c_j g^(j)(n)` with `sum_j c_j x^j = 1 / (1 - z e^x)`.
///
/// The generating function has its nearest pole at distance `d = |arg z|`, so
/// `|c_j| <~ d^-(j+1)` and term `j` is bounded by the envelope
/// `(alpha)_j / (x d)^j`. Summation stops at the envelope minimum; the
/// returned error is the envelope there.
fn euler_tail(z: Complex64, alpha: f64, a: f64, n: usize) -> (Complex64, f64) {
    let coeffs = tail_coefficients(z);
    let d = z.arg().abs();
    let x = n as f64 + a;
    let zn = Complex64::from_polar(1.0, z.arg() * n as f64);
    let scale = x.powf(-alpha);
    // g^(j)(n) / g(n) = (-1)^j (alpha)_j x^-j
    let mut ratio = 1.0;
    let mut env = 1.0 / d;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter().enumerate() {
        acc += c * ratio;
        let step = (alpha + j as f64) / x;
        let next = env * step / d;
        if next >= env || next <= 1e-18 * acc.norm() {
            env = next.min(env);
            break;
        }
        env = next;
        ratio *= -step;
    }
    (zn * acc * scale, env * scale)
}

fn tail_coefficients(z: Complex64) -> [Complex64; TAIL_ORDER] {
    // 1 - z e^x = (1 - z) - z sum_{j>=1} x^j / j!
    let mut b = [Complex64::new(0.0, 0.0); TAIL_ORDER];
    b[0] = 1.0 - z;
    let mut fact = 1.0;
    for (j, bj) in b.iter_mut().enumerate().skip(1) {
        fact *= j as f64;
        *bj = -z / fact;
    }
    let mut c = [Complex64::new(0.0, 0.0); TAIL_ORDER];
    c[0] = 1.0 / b[0];
    for j in 1..TAIL_ORDER {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 1..=j {
            s += b[i] * c[j - i];
        }
        c[j] = -s / b[0];
    }
    c
}
