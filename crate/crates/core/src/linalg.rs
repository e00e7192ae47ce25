//! Linear algebra over Z/p^M: Smith form with transforms, Howell form, kernels.
//!
//! Matrices are dense row-major `Vec<Vec<u64>>` with entries reduced mod p^M.

use crate::padic::Modulus;
use crate::{Error, Result};

pub type Mat = Vec<Vec<u64>>;

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect()
}

pub fn mat_mul(m: &Modulus, a: &Mat, b: &Mat, inner: usize, cols: usize) -> Mat {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(0, |acc, k| m.add(acc, m.mul(row[k], b[k][j]))))
                .collect()
        })
        .collect()
}

pub fn mat_vec(m: &Modulus, a: &Mat, x: &[u64]) -> Vec<u64> {
    a.iter().map(|row| row.iter().zip(x).fold(0, |acc, (&r, &v)| m.add(acc, m.mul(r, v)))).collect()
}

/// Smith form `u · a · w = diag(p^{v_0}, …)`; `vals[t]` is `M` for a zero pivot.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: Mat,
    pub w: Mat,
    pub vals: Vec<u32>,
    pub rows: usize,
    pub cols: usize,
}

fn row_axpy(m: &Modulus, dst: &mut [u64], f: u64, src: &[u64]) {
    // dst -= f·src
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = m.sub(*d, m.mul(f, s));
    }
}

pub fn smith(m: &Modulus, a: &Mat, cols: usize) -> Result<Smith> {
    let rows = a.len();
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::LengthMismatch(cols, a.iter().map(|r| r.len()).find(|&l| l != cols).unwrap_or(0)));
    }
    let mut a: Mat = a.iter().map(|r| r.iter().map(|&x| m.reduce(x)).collect()).collect();
    let mut u = identity(rows);
    let mut w = identity(cols);
    let mut vals = Vec::new();
    let p = m.p as u64;
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = m.val(x);
                if v < m.prec && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        a.swap(t, i);
        u.swap(t, i);
        for r in a.iter_mut() {
            r.swap(t, j);
        }
        for r in w.iter_mut() {
            r.swap(t, j);
        }
        let pv = p.pow(v);
        let unit = m.inv(a[t][t] / pv)?;
        for x in a[t].iter_mut() {
            *x = m.mul(*x, unit);
        }
        for x in u[t].iter_mut() {
            *x = m.mul(*x, unit);
        }
        let (top, rest) = a.split_at_mut(t + 1);
        let (utop, urest) = u.split_at_mut(t + 1);
        for (ar, ur) in rest.iter_mut().zip(urest.iter_mut()) {
            if ar[t] != 0 {
                let f = ar[t] / pv;
                row_axpy(m, ar, f, &top[t]);
                row_axpy(m, ur, f, &utop[t]);
            }
        }
        for c in t + 1..cols {
            if a[t][c] != 0 {
                let f = a[t][c] / pv;
                for r in a.iter_mut() {
                    r[c] = m.sub(r[c], m.mul(f, r[t]));
                }
                for r in w.iter_mut() {
                    r[c] = m.sub(r[c], m.mul(f, r[t]));
                }
            }
        }
        vals.push(v);
    }
    Ok(Smith { u, w, vals, rows, cols })
}

impl Smith {
    fn val_at(&self, t: usize, prec: u32) -> u32 {
        self.vals.get(t).copied().unwrap_or(prec)
    }

    fn wcol(&self, t: usize) -> Vec<u64> {
        self.w.iter().map(|r| r[t]).collect()
    }
}

/// Generators of `{x : a·x = 0}` over Z/p^M.
pub fn kernel(m: &Modulus, a: &Mat, cols: usize) -> Result<Mat> {
    let s = smith(m, a, cols)?;
    let mut out = Vec::new();
    for t in 0..cols {
        let v = s.val_at(t, m.prec);
        if v == 0 {
            continue;
        }
        let scale = m.pow(m.p as u64, (m.prec - v) as u64);
        out.push(s.wcol(t).into_iter().map(|x| m.mul(x, scale)).collect());
    }
    Ok(out)
}

/// Image mod p^prec of the solution module of `a·x = 0` over Z_p, computed from
/// `a` known mod p^M. Directions whose pivot valuation lies strictly between
/// `M − prec` and `M` cannot be decided and are counted in `ambiguous`.
#[derive(Clone, Debug)]
pub struct SatKernel {
    pub basis: Mat,
    pub ambiguous: usize,
}

pub fn saturated_kernel(m: &Modulus, a: &Mat, cols: usize, prec: u32) -> Result<SatKernel> {
    if prec > m.prec {
        return Err(Error::PrecisionExhausted(format!("saturation at {prec} above working precision {}", m.prec)));
    }
    let s = smith(m, a, cols)?;
    let low = Modulus::new(m.p, prec)?;
    let mut basis = Vec::new();
    let mut ambiguous = 0;
    for t in 0..cols {
        let v = s.val_at(t, m.prec);
        if v >= m.prec {
            basis.push(s.wcol(t).into_iter().map(|x| low.reduce(x)).collect());
        } else if v + prec > m.prec {
            ambiguous += 1;
        }
    }
    Ok(SatKernel { basis, ambiguous })
}

/// Canonical Howell form of the row span.
pub fn howell(m: &Modulus, rows: &Mat, cols: usize) -> Result<Mat> {
    let p = m.p as u64;
    let mut pool: Mat = rows.iter().map(|r| r.iter().map(|&x| m.reduce(x)).collect::<Vec<_>>()).filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut out: Mat = Vec::new();
    let mut piv: Vec<(usize, u64)> = Vec::new();
    for c in 0..cols {
        let best = pool.iter().enumerate().filter(|(_, r)| r[c] != 0).min_by_key(|(_, r)| m.val(r[c])).map(|(i, _)| i);
        let Some(b) = best else { continue };
        let mut r = pool.swap_remove(b);
        let v = m.val(r[c]);
        let pv = p.pow(v);
        let unit = m.inv(r[c] / pv)?;
        for x in r.iter_mut() {
            *x = m.mul(*x, unit);
        }
        for s in pool.iter_mut() {
            if s[c] != 0 {
                let f = s[c] / pv;
                row_axpy(m, s, f, &r);
            }
        }
        pool.retain(|s| s.iter().any(|&x| x != 0));
        let ann = m.pow(p, (m.prec - v) as u64);
        let extra: Vec<u64> = r.iter().map(|&x| m.mul(x, ann)).collect();
        if extra.iter().any(|&x| x != 0) {
            pool.push(extra);
        }
        out.push(r);
        piv.push((c, pv));
    }
    for i in 0..out.len() {
        let (c, pv) = piv[i];
        let src = out[i].clone();
        for row in out.iter_mut().take(i) {
            let q = row[c] / pv;
            if q != 0 {
                row_axpy(m, row, q, &src);
            }
        }
    }
    Ok(out)
}

/// Invariant factors of the subgroup spanned by the rows: exponents `e` with
/// span ≅ ⊕ Z/p^e, sorted descending.
pub fn span_divisors(m: &Modulus, rows: &Mat, cols: usize) -> Result<Vec<u32>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let s = smith(m, rows, cols)?;
    let mut e: Vec<u32> = s.vals.iter().filter(|&&v| v < m.prec).map(|&v| m.prec - v).collect();
    e.sort_unstable_by(|a, b| b.cmp(a));
    Ok(e)
}

/// log_p of the order of the row span.
pub fn span_log_order(m: &Modulus, rows: &Mat, cols: usize) -> Result<u32> {
    Ok(span_divisors(m, rows, cols)?.iter().sum())
}

/// Embed a residue mod p^k into Z/p^M by multiplying with p^{M−k}.
pub fn embed_level(m: &Modulus, x: u64, k: u32) -> u64 {
    let k = k.min(m.prec);
    m.mul(x % (m.p as u64).pow(k), m.pow(m.p as u64, (m.prec - k) as u64))
}

/// Inverse of a square matrix invertible mod p.
pub fn inverse(m: &Modulus, a: &Mat) -> Result<Mat> {
    let n = a.len();
    let mut aug: Mat = a.iter().enumerate().map(|(i, r)| {
        let mut row: Vec<u64> = r.iter().map(|&x| m.reduce(x)).collect();
        row.extend((0..n).map(|j| u64::from(i == j) % m.m));
        row
    }).collect();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| m.val(aug[i][c]) == 0) else {
            return Err(Error::NotUnit("matrix is singular mod p".into()));
        };
        aug.swap(c, piv);
        let inv = m.inv(aug[c][c])?;
        for x in aug[c].iter_mut() {
            *x = m.mul(*x, inv);
        }
        let src = aug[c].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != c && row[c] != 0 {
                let f = row[c];
                row_axpy(m, row, f, &src);
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Whether `v` lies in the row span.
pub fn in_span(m: &Modulus, rows: &Mat, v: &[u64]) -> Result<bool> {
    let cols = v.len();
    let mut ext = rows.clone();
    ext.push(v.to_vec());
    Ok(span_log_order(m, rows, cols)? == span_log_order(m, &ext, cols)?)
}

/// Transpose of a rows×cols matrix.
pub fn transpose(a: &Mat, cols: usize) -> Mat {
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn md(p: u32, k: u32) -> Modulus {
        Modulus::new(p, k).unwrap()
    }

    #[test]
    fn inverse_example() {
        let m = md(3, 2);
        let a = vec![vec![1, 3], vec![3, 1]];
        let b = inverse(&m, &a).unwrap();
        assert_eq!(mat_mul(&m, &a, &b, 2, 2), identity(2));
        assert!(inverse(&m, &vec![vec![3, 0], vec![0, 1]]).is_err());
    }

    fn all_vectors(q: u64, n: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|v| (0..q).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    }

    fn span_set(m: &Modulus, rows: &Mat, cols: usize) -> BTreeSet<Vec<u64>> {
        let mut set: BTreeSet<Vec<u64>> = [vec![0; cols]].into();
        for r in rows {
            let cur: Vec<_> = set.iter().cloned().collect();
            for v in cur {
                let mut x = v.clone();
                for _ in 0..m.m {
                    x = x.iter().zip(r).map(|(&a, &b)| m.add(a, b)).collect();
                    set.insert(x.clone());
                }
            }
        }
        set
    }

    fn mat_strat(q: u64, r: usize, c: usize) -> impl Strategy<Value = Mat> {
        proptest::collection::vec(proptest::collection::vec(0..q, c), r)
    }

    #[test]
    fn smith_example() {
        let m = md(2, 3);
        let a = vec![vec![2, 4], vec![6, 4]];
        let s = smith(&m, &a, 2).unwrap();
        let d = mat_mul(&m, &mat_mul(&m, &s.u, &a, 2, 2), &s.w, 2, 2);
        // divisors over Z are (2, 8), so the second pivot vanishes mod 8
        assert_eq!(s.vals, vec![1]);
        assert_eq!(d, vec![vec![2, 0], vec![0, 0]]);
    }

    #[test]
    fn howell_example() {
        // span of (2, 1) over Z/4 contains (0, 2)
        let m = md(2, 2);
        assert_eq!(howell(&m, &vec![vec![2, 1]], 2).unwrap(), vec![vec![2, 1], vec![0, 2]]);
    }

    proptest! {
        #[test]
        fn smith_diagonalizes(a in mat_strat(8, 3, 4)) {
            let m = md(2, 3);
            let s = smith(&m, &a, 4).unwrap();
            let d = mat_mul(&m, &mat_mul(&m, &s.u, &a, 3, 4), &s.w, 4, 4);
            for (i, row) in d.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    let want = if i == j { s.vals.get(i).map_or(0, |&v| if v < 3 { 2u64.pow(v) } else { 0 }) } else { 0 };
                    prop_assert_eq!(x, want);
                }
            }
        }

        #[test]
        fn kernel_matches_enumeration(a in mat_strat(9, 2, 3)) {
            let m = md(3, 2);
            let gens = kernel(&m, &a, 3).unwrap();
            let brute: BTreeSet<Vec<u64>> = all_vectors(9, 3).into_iter().filter(|x| mat_vec(&m, &a, x).iter().all(|&y| y == 0)).collect();
            prop_assert_eq!(span_set(&m, &gens, 3), brute);
        }

        #[test]
        fn howell_is_canonical(a in mat_strat(8, 3, 3), mix in mat_strat(8, 3, 3)) {
            let m = md(2, 3);
            let h = howell(&m, &a, 3).unwrap();
            prop_assert_eq!(span_set(&m, &h, 3), span_set(&m, &a, 3));
            // rows of a plus arbitrary combinations span the same group
            let extra = mat_mul(&m, &mix, &a, 3, 3);
            let b: Mat = a.iter().chain(extra.iter()).cloned().rev().collect();
            prop_assert_eq!(howell(&m, &b, 3).unwrap(), h);
        }

        #[test]
        fn divisors_count_span(a in mat_strat(9, 3, 2)) {
            let m = md(3, 2);
            let e = span_log_order(&m, &a, 2).unwrap();
            prop_assert_eq!(span_set(&m, &a, 2).len() as u64, 3u64.pow(e));
        }

        #[test]
        fn saturation_recovers_integral_kernel(x in proptest::collection::vec(-5i64..6, 3), y in proptest::collection::vec(-5i64..6, 3)) {
            // a = rows orthogonal to nothing special: build a with known integral kernel spanned by x
            let cross = |u: &[i64], v: &[i64]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            let z = cross(&x, &y);
            prop_assume!(z.iter().any(|&c| c != 0));
            let w = cross(&x, &z);
            prop_assume!(w.iter().any(|&c| c != 0));
            let m = md(2, 12);
            let a = vec![z.iter().map(|&c| m.reduce_i128(c as i128)).collect(), w.iter().map(|&c| m.reduce_i128(c as i128)).collect()];
            let sat = saturated_kernel(&m, &a, 3, 2).unwrap();
            prop_assert_eq!(sat.ambiguous, 0);
            prop_assert_eq!(sat.basis.len(), 1);
            // the integral kernel line is spanned by x / gcd
            let g = x.iter().fold(0i64, |g, &c| num_integer::Integer::gcd(&g, &c));
            let lo = md(2, 2);
            let xv: Vec<u64> = x.iter().map(|&c| lo.reduce_i128((c / g) as i128)).collect();
            prop_assert_eq!(span_set(&lo, &sat.basis, 3), span_set(&lo, &vec![xv], 3));
        }
    }
}
