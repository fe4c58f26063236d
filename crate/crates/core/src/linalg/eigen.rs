use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{frobenius_norm, DenseMatrix};
use crate::error::{LabError, Result};

pub const MAX_DIM: usize = 512;

/// Eigenvalues with multiplicity, ordered by [`spectral_order`].
///
/// `residual` is only filled by [`eigen_decomposition`], which recovers vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub residual: Option<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalue with the largest real part; among equal real parts the
    /// one with nonnegative imaginary part wins.
    pub fn rightmost(&self) -> Option<Complex64> {
        self.values.iter().copied().max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
    }
}

/// Descending modulus, then descending real part, then descending imaginary part.
pub fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

pub fn eigenvalues(a: &DenseMatrix) -> Result<Spectrum> {
    let mut values = raw_eigenvalues(a)?;
    values.sort_by(spectral_order);
    Ok(Spectrum { values, residual: None })
}

/// Eigenvalues plus unit eigenvectors from complex inverse iteration.
///
/// The reported residual is `max ‖Av − λv‖ / ‖v‖` over all recovered pairs.
pub fn eigen_decomposition(a: &DenseMatrix) -> Result<(Spectrum, Vec<Vec<Complex64>>)> {
    let mut spectrum = eigenvalues(a)?;
    let scale = frobenius_norm(a).max(1.0);
    let mut vectors = Vec::with_capacity(spectrum.len());
    let mut residual: f64 = 0.0;
    for &lambda in &spectrum.values {
        let v = inverse_iteration(a, lambda, scale)?;
        let av = complex_matvec(a, &v);
        let r = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lambda * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
        vectors.push(v);
    }
    spectrum.residual = Some(residual);
    Ok((spectrum, vectors))
}

fn raw_eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(LabError::Dimension(format!("eigenvalues of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n > MAX_DIM {
        return Err(LabError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

/// Radix-2 diagonal similarity scaling so row and column norms are comparable.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.rows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vtv: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vtv == 0.0 {
            continue;
        }
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * 2.0 / vtv;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() * 2.0 / vtv;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hqr(a: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let deflate_abs = 1e-12 * frobenius_norm(a);
    let cap = 60 * n;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                let h = a[(l, l - 1)].abs();
                if h <= f64::EPSILON * s || h <= deflate_abs {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                nn -= 1;
                break;
            }
            let y = a[(nu - 1, nu - 1)];
            let w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its >= cap {
                return Err(LabError::EigenNoConvergence { lo: l, hi: nu, iterations: its });
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let r0 = x - z;
                let s0 = y - z;
                p = (r0 * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - r0 - s0;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            for k in m..nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                    if k != nu - 1 {
                        pp += r * a[(k + 2, j)];
                        a[(k + 2, j)] -= pp * z;
                    }
                    a[(k + 1, j)] -= pp * y;
                    a[(k, j)] -= pp * x;
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != nu - 1 {
                        pp += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= pp * r;
                    }
                    a[(i, k + 1)] -= pp * q;
                    a[(i, k)] -= pp;
                }
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

fn complex_matvec(a: &DenseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.rows())
        .map(|i| a.row(i).iter().zip(v).map(|(&x, y)| y * x).sum())
        .collect()
}

/// Three rounds of shifted inverse iteration; returns a unit vector.
fn inverse_iteration(a: &DenseMatrix, lambda: Complex64, scale: f64) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let shift = lambda + Complex64::new(1e-10 * scale, 0.0);
    let mut lu: Vec<Complex64> = a.as_slice().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for i in 0..n {
        lu[i * n + i] -= shift;
    }
    let piv = complex_lu(&mut lu, n, 1e-300_f64.max(f64::EPSILON * scale * 1e-6));
    let mut v: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0 + (k % 7) as f64 / 10.0, 0.0)).collect();
    for _ in 0..3 {
        v = complex_lu_solve(&lu, &piv, n, &v);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(LabError::Singular);
        }
        for z in &mut v {
            *z /= norm;
        }
    }
    Ok(v)
}

fn complex_lu(a: &mut [Complex64], n: usize, tiny: f64) -> Vec<usize> {
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm())).unwrap_or(k);
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
        }
        if a[k * n + k].norm() < tiny {
            a[k * n + k] = Complex64::new(tiny, 0.0);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            a[i * n + k] = f;
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    piv
}

fn complex_lu_solve(lu: &[Complex64], piv: &[usize], n: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut x: Vec<Complex64> = piv.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = lu[i * n + j] * x[j];
            x[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = lu[i * n + j] * x[j];
            x[i] -= t;
        }
        x[i] /= lu[i * n + i];
    }
    x
}
