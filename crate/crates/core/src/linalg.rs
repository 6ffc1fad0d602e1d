//! Exact linear algebra over a local ring and over the integers.
//!
//! The local-ring Smith normal form pivots on entries of minimal
//! valuation, so one sweep produces a diagonal of the form
//! `diag(pi^{v_1}, ..., pi^{v_t})` with `v_1 <= v_2 <= ...` together
//! with the transformation matrices and their inverses. Kernels and
//! linear solves fall out of that decomposition.

use crate::ring::{LocalRing, RingElem};

/// A dense matrix over a [`LocalRing`], row major.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat {
    ring: LocalRing,
    rows: usize,
    cols: usize,
    data: Vec<RingElem>,
}

impl Mat {
    pub fn zero(ring: LocalRing, rows: usize, cols: usize) -> Mat {
        Mat { ring, rows, cols, data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: LocalRing, dim: usize) -> Mat {
        let mut m = Mat::zero(ring, dim, dim);
        for i in 0..dim {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_columns(ring: LocalRing, rows: usize, columns: &[Vec<RingElem>]) -> Mat {
        let mut m = Mat::zero(ring, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: RingElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<RingElem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<RingElem>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zero(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zero(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a.mul(other.get(k, j));
                    let cur = out.get(i, j).add(&add);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[RingElem]) -> Vec<RingElem> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = self.ring.zero();
                for j in 0..self.cols {
                    acc = acc.add(&self.get(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut m = Mat::zero(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, i: usize, c: &RingElem) {
        for j in 0..self.cols {
            let x = self.get(i, j).mul(c);
            self.set(i, j, x);
        }
    }

    fn scale_col(&mut self, j: usize, c: &RingElem) {
        for i in 0..self.rows {
            let x = self.get(i, j).mul(c);
            self.set(i, j, x);
        }
    }

    /// `row_a -= c * row_b`
    fn row_sub(&mut self, a: usize, c: &RingElem, b: usize) {
        for j in 0..self.cols {
            let x = self.get(a, j).sub(&c.mul(self.get(b, j)));
            self.set(a, j, x);
        }
    }

    /// `col_a -= c * col_b`
    fn col_sub(&mut self, a: usize, c: &RingElem, b: usize) {
        for i in 0..self.rows {
            let x = self.get(i, a).sub(&c.mul(self.get(i, b)));
            self.set(i, a, x);
        }
    }

    /// `col_a += c * col_b`
    fn col_add(&mut self, a: usize, c: &RingElem, b: usize) {
        for i in 0..self.rows {
            let x = self.get(i, a).add(&c.mul(self.get(i, b)));
            self.set(i, a, x);
        }
    }

    /// `row_a += c * row_b`
    fn row_add(&mut self, a: usize, c: &RingElem, b: usize) {
        for j in 0..self.cols {
            let x = self.get(a, j).add(&c.mul(self.get(b, j)));
            self.set(a, j, x);
        }
    }
}

/// `u * a * v = d` with `u, v` invertible over the ring and
/// `d = diag(pi^{v_1}, ..., pi^{v_t})`, `v_1 <= v_2 <= ...`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: Mat,
    pub uinv: Mat,
    pub v: Mat,
    pub vinv: Mat,
    /// Valuations of the diagonal entries, length `min(rows, cols)`,
    /// padded with `n` (the zero pivot) where the matrix ran out of rank.
    pub diag: Vec<u32>,
    rows: usize,
    cols: usize,
    ring: LocalRing,
}

/// Smith normal form over the local ring by minimal-valuation pivoting.
pub fn smith(a: &Mat) -> Smith {
    let ring = a.ring();
    let n = ring.n();
    let (rows, cols) = (a.rows(), a.cols());
    let mut m = a.clone();
    let mut u = Mat::identity(ring, rows);
    let mut uinv = Mat::identity(ring, rows);
    let mut v = Mat::identity(ring, cols);
    let mut vinv = Mat::identity(ring, cols);
    let limit = rows.min(cols);
    let mut diag = vec![n; limit];

    for t in 0..limit {
        // global minimal valuation in the remaining block
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..rows {
            for j in t..cols {
                let val = m.get(i, j).valuation();
                if val < n && best.map_or(true, |(_, _, bv)| val < bv) {
                    best = Some((i, j, val));
                }
            }
        }
        let Some((pi, pj, pval)) = best else { break };

        m.swap_rows(t, pi);
        u.swap_rows(t, pi);
        uinv.swap_cols(t, pi);
        m.swap_cols(t, pj);
        v.swap_cols(t, pj);
        vinv.swap_rows(t, pj);

        // normalize the pivot to pi^v
        let unit_inv = m.get(t, t).unit_part().invert_unit().expect("unit part is a unit");
        let unit = m.get(t, t).unit_part();
        m.scale_row(t, &unit_inv);
        u.scale_row(t, &unit_inv);
        uinv.scale_col(t, &unit);

        // clear the pivot column, then the pivot row
        for i in (t + 1)..rows {
            let e = m.get(i, t);
            if e.is_zero() {
                continue;
            }
            let q = e.divide_by_pi_power(pval).expect("pivot has minimal valuation");
            m.row_sub(i, &q, t);
            u.row_sub(i, &q, t);
            uinv.col_add(t, &q, i);
        }
        for j in (t + 1)..cols {
            let e = m.get(t, j);
            if e.is_zero() {
                continue;
            }
            let q = e.divide_by_pi_power(pval).expect("pivot has minimal valuation");
            m.col_sub(j, &q, t);
            v.col_sub(j, &q, t);
            vinv.row_add(t, &q, j);
        }
        diag[t] = pval;
    }

    Smith { u, uinv, v, vinv, diag, rows, cols, ring }
}

impl Smith {
    /// Valuation of the `j`-th elementary divisor, `n` past the rank.
    pub fn diag_val(&self, j: usize) -> u32 {
        self.diag.get(j).copied().unwrap_or(self.ring.n())
    }

    /// Generators of `{x : a x = 0}` as columns in `R^cols`.
    pub fn kernel_columns(&self) -> Vec<Vec<RingElem>> {
        let n = self.ring.n();
        let mut out = Vec::new();
        for j in 0..self.cols {
            let v = self.diag_val(j);
            if v == 0 {
                continue; // pi^n * col is zero, contributes nothing
            }
            let mut col = self.v.column(j);
            let shift = n - v;
            if shift > 0 {
                for e in col.iter_mut() {
                    *e = e.mul_pi_pow(shift);
                }
            }
            if col.iter().any(|e| !e.is_zero()) {
                out.push(col);
            }
        }
        out
    }

    /// One solution of `a x = b`, if any.
    pub fn solve(&self, b: &[RingElem]) -> Option<Vec<RingElem>> {
        assert_eq!(b.len(), self.rows);
        let ub = self.u.mul_vec(b);
        let mut y = vec![self.ring.zero(); self.cols];
        for (i, e) in ub.iter().enumerate() {
            let v = if i < self.cols { self.diag_val(i) } else { self.ring.n() };
            if e.valuation() < v {
                return None;
            }
            if i < self.cols && !e.is_zero() {
                y[i] = e.divide_by_pi_power(v).expect("checked valuation");
            }
        }
        Some(self.v.mul_vec(&y))
    }
}

/// Integer Smith normal form `u * a * v = d` with nonnegative diagonal
/// satisfying the divisibility chain `d_1 | d_2 | ...`.
pub fn snf_integer(a: &[Vec<i64>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<i128>> =
        a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u = ident(rows);
    let mut v = ident(cols);

    let limit = rows.min(cols);
    for t in 0..limit {
        loop {
            // move a minimal-magnitude nonzero entry to the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0
                        && best.map_or(true, |(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { return finish(m, u, v) };
            m.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);

            let mut dirty = false;
            for i in (t + 1)..rows {
                if m[i][t] != 0 {
                    let q = div_round(m[i][t], m[t][t]);
                    if q != 0 {
                        for j in 0..cols {
                            m[i][j] -= q * m[t][j];
                        }
                        for j in 0..rows {
                            u[i][j] -= q * u[t][j];
                        }
                    }
                    if m[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..cols {
                if m[t][j] != 0 {
                    let q = div_round(m[t][j], m[t][t]);
                    if q != 0 {
                        for i in 0..rows {
                            m[i][j] -= q * m[i][t];
                        }
                        for i in 0..cols {
                            v[i][j] -= q * v[i][t];
                        }
                    }
                    if m[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the whole remaining block for the chain
            let mut offender = None;
            'scan: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if m[i][j] % m[t][t] != 0 {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    for j in 0..cols {
                        m[t][j] += m[i][j];
                    }
                    for j in 0..rows {
                        u[t][j] += u[i][j];
                    }
                }
                None => break,
            }
        }
    }
    finish(m, u, v)
}

fn finish(
    mut m: Vec<Vec<i128>>,
    mut u: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    for t in 0..rows.min(cols) {
        if m[t][t] < 0 {
            for j in 0..cols {
                m[t][j] = -m[t][j];
            }
            for j in 0..rows {
                u[t][j] = -u[t][j];
            }
        }
    }
    (u, m, v)
}

fn ident(dim: usize) -> Vec<Vec<i128>> {
    (0..dim).map(|i| (0..dim).map(|j| i128::from(i == j)).collect()).collect()
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

fn div_round(a: i128, b: i128) -> i128 {
    // round-to-nearest keeps the remainders shrinking
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r < 0) == (b < 0) { 1 } else { -1 }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::LocalRing;

    fn mat_from(ring: LocalRing, rows: usize, cols: usize, entries: &[u64]) -> Mat {
        let mut m = Mat::zero(ring, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, ring.from_integer(entries[i * cols + j]));
            }
        }
        m
    }

    fn check_smith(a: &Mat) {
        let s = smith(a);
        let d = s.u.mul(a).mul(&s.v);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if i == j && i < s.diag.len() {
                    assert_eq!(*d.get(i, j), a.ring().pi_pow(s.diag[i]), "diag at {i}");
                } else {
                    assert!(d.get(i, j).is_zero(), "off-diagonal at ({i},{j})");
                }
            }
        }
        // transforms invert each other
        let id_r = Mat::identity(a.ring(), a.rows());
        let id_c = Mat::identity(a.ring(), a.cols());
        assert_eq!(s.u.mul(&s.uinv), id_r);
        assert_eq!(s.uinv.mul(&s.u), id_r);
        assert_eq!(s.v.mul(&s.vinv), id_c);
        assert_eq!(s.vinv.mul(&s.v), id_c);
        // divisibility chain
        for w in s.diag.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn smith_small_cases() {
        let z8 = LocalRing::zpn(2, 3).unwrap();
        check_smith(&mat_from(z8, 2, 2, &[1, 0, 0, 1]));
        check_smith(&mat_from(z8, 2, 2, &[2, 4, 6, 0]));
        check_smith(&mat_from(z8, 2, 3, &[4, 2, 6, 0, 4, 2]));
        check_smith(&mat_from(z8, 3, 2, &[0, 0, 0, 0, 0, 0]));

        let f9 = LocalRing::fpt(3, 2).unwrap();
        let t = f9.pi();
        let mut m = Mat::zero(f9, 2, 2);
        m.set(0, 0, t.clone());
        m.set(0, 1, f9.one());
        m.set(1, 0, f9.one());
        m.set(1, 1, t.clone());
        check_smith(&m);
    }

    #[test]
    fn smith_exhaustive_2x2_over_z4() {
        let z4 = LocalRing::zpn(2, 2).unwrap();
        for a in 0..4u64 {
            for b in 0..4u64 {
                for c in 0..4u64 {
                    for d in 0..4u64 {
                        check_smith(&mat_from(z4, 2, 2, &[a, b, c, d]));
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_columns_span_kernel() {
        // brute-force oracle: the kernel generated by the columns must
        // contain exactly the vectors annihilated by the matrix
        let z4 = LocalRing::zpn(2, 2).unwrap();
        let m = mat_from(z4, 2, 3, &[1, 2, 0, 2, 0, 2]);
        let s = smith(&m);
        let gens = s.kernel_columns();
        // collect span of generators
        let mut span = std::collections::BTreeSet::new();
        let mut frontier = vec![vec![z4.zero(); 3]];
        span.insert(frontier[0].clone());
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y: Vec<_> = x.iter().zip(g).map(|(a, b)| a.add(b)).collect();
                if span.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let mut count = 0;
        for c0 in z4.elements() {
            for c1 in z4.elements() {
                for c2 in z4.elements() {
                    let v = vec![c0.clone(), c1.clone(), c2.clone()];
                    let img = m.mul_vec(&v);
                    let in_kernel = img.iter().all(|e| e.is_zero());
                    if in_kernel {
                        count += 1;
                    }
                    assert_eq!(in_kernel, span.contains(&v));
                }
            }
        }
        assert_eq!(count, span.len());
    }

    #[test]
    fn solve_agrees_with_enumeration() {
        let z8 = LocalRing::zpn(2, 3).unwrap();
        let m = mat_from(z8, 2, 2, &[2, 3, 1, 4]);
        let s = smith(&m);
        for b0 in z8.elements() {
            for b1 in z8.elements() {
                let b = vec![b0.clone(), b1.clone()];
                let solvable = z8.elements().any(|x0| {
                    z8.elements().any(|x1| m.mul_vec(&[x0.clone(), x1.clone()]) == b)
                });
                match s.solve(&b) {
                    Some(x) => {
                        assert!(solvable);
                        assert_eq!(m.mul_vec(&x), b);
                    }
                    None => assert!(!solvable),
                }
            }
        }
    }

    #[test]
    fn snf_integer_examples() {
        let (_, d, _) = snf_integer(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(d[0][0], 1);
        assert_eq!(d[1][1], 1);

        // oracle: d1 = gcd of entries = 2, d1*d2 = |det| = 8
        let a = vec![vec![2i64, 4], vec![6, 8]];
        let det: i64 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let gcd = {
            let mut g = 0i64;
            for r in &a {
                for &x in r {
                    g = num_gcd(g, x);
                }
            }
            g
        };
        assert_eq!(gcd, 2);
        assert_eq!(det.abs() / gcd, 4);
        let (u, d, v) = snf_integer(&a);
        assert_eq!(d[0][0], 2);
        assert_eq!(d[1][1], 4);
        assert_eq!(d[0][1], 0);
        assert_eq!(d[1][0], 0);
        // u * a * v == d
        let prod = int_mul(&int_mul(&u, &to128(&a)), &v);
        assert_eq!(prod, d);

        let (_, d, _) = snf_integer(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(d[0][0], 0);
        assert_eq!(d[1][1], 0);
    }

    #[test]
    fn snf_integer_chain_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..4);
            let a: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-30..30)).collect())
                .collect();
            let (u, d, v) = snf_integer(&a);
            let prod = int_mul(&int_mul(&u, &to128(&a)), &v);
            assert_eq!(prod, d);
            assert_eq!(det_sign(&u).abs(), 1, "u unimodular");
            assert_eq!(det_sign(&v).abs(), 1, "v unimodular");
            let lim = rows.min(cols);
            for t in 0..lim {
                for j in 0..cols {
                    if j != t {
                        assert_eq!(d[t][j], 0);
                    }
                }
                assert!(d[t][t] >= 0);
                if t + 1 < lim && d[t][t] != 0 {
                    assert_eq!(d[t + 1][t + 1] % d[t][t], 0, "divisibility chain");
                }
                if d[t][t] == 0 && t + 1 < lim {
                    assert_eq!(d[t + 1][t + 1], 0);
                }
            }
        }
    }

    fn num_gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            num_gcd(b, a % b)
        }
    }

    fn to128(a: &[Vec<i64>]) -> Vec<Vec<i128>> {
        a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
    }

    fn int_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let n = a.len();
        let k = b.len();
        let m = if k == 0 { 0 } else { b[0].len() };
        (0..n)
            .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
            .collect()
    }

    fn det_sign(a: &[Vec<i128>]) -> i128 {
        // small matrices only; cofactor expansion
        let n = a.len();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return a[0][0];
        }
        let mut det = 0i128;
        for j in 0..n {
            let minor: Vec<Vec<i128>> = a[1..]
                .iter()
                .map(|r| {
                    r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            det += s * a[0][j] * det_sign(&minor);
        }
        det
    }
}
