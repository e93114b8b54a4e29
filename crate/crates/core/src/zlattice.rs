//! Exact integer linear algebra: Smith normal form with unimodular
//! transforms, integer kernels and cokernels, and Hermite-form lattice
//! membership. All arithmetic is arbitrary precision.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Rank of a free abelian group: a natural number or countably infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cardinal {
    Finite(u64),
    CountablyInfinite,
}

impl Cardinal {
    pub const ZERO: Cardinal = Cardinal::Finite(0);

    pub fn is_zero(self) -> bool {
        self == Cardinal::ZERO
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cardinal::Finite(n) => Some(n),
            Cardinal::CountablyInfinite => None,
        }
    }
}

impl Add for Cardinal {
    type Output = Cardinal;

    fn add(self, rhs: Cardinal) -> Cardinal {
        match (self, rhs) {
            (Cardinal::Finite(a), Cardinal::Finite(b)) => Cardinal::Finite(a + b),
            _ => Cardinal::CountablyInfinite,
        }
    }
}

impl std::iter::Sum for Cardinal {
    fn sum<I: Iterator<Item = Cardinal>>(iter: I) -> Cardinal {
        iter.fold(Cardinal::ZERO, Add::add)
    }
}

impl From<u64> for Cardinal {
    fn from(n: u64) -> Self {
        Cardinal::Finite(n)
    }
}

impl fmt::Display for Cardinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinal::Finite(n) => write!(f, "{n}"),
            Cardinal::CountablyInfinite => f.write_str("aleph0"),
        }
    }
}

/// Abelian group `Z^free ⊕ Z/d1 ⊕ ... ⊕ Z/dk` in invariant-factor form:
/// every `d_i ≥ 2` and `d_i | d_{i+1}`. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianGroup {
    free_rank: Cardinal,
    invariant_factors: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        Self::free(Cardinal::ZERO)
    }

    pub fn free(rank: impl Into<Cardinal>) -> Self {
        Self { free_rank: rank.into(), invariant_factors: Vec::new() }
    }

    /// `Z^free ⊕ ⨁ Z/n` for arbitrary cyclic orders `n`; an order of zero
    /// contributes a free summand, orders ±1 vanish.
    pub fn from_orders(free: impl Into<Cardinal>, orders: impl IntoIterator<Item = BigInt>) -> Self {
        let orders: Vec<BigInt> = orders.into_iter().collect();
        let mut free = free.into();
        let mut nonzero = Vec::new();
        for o in orders {
            if o.is_zero() {
                free = free + Cardinal::Finite(1);
            } else if !o.abs().is_one() {
                nonzero.push(o.abs());
            }
        }
        let n = nonzero.len();
        let diag = DenseIntMatrix::from_fn(n, n, |i, j| if i == j { nonzero[i].clone() } else { BigInt::zero() });
        let factors = invariant_diagonal(&diag).into_iter().filter(|d| !d.is_one()).collect();
        Self { free_rank: free, invariant_factors: factors }
    }

    pub fn free_rank(&self) -> Cardinal {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn is_free(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.is_free() && self.free_rank.is_zero()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        Self::from_orders(
            self.free_rank + other.free_rank,
            self.invariant_factors.iter().chain(&other.invariant_factors).cloned(),
        )
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            Cardinal::Finite(0) => {}
            Cardinal::Finite(1) => parts.push("Z".to_string()),
            Cardinal::Finite(n) => parts.push(format!("Z^{n}")),
            Cardinal::CountablyInfinite => parts.push("Z^(N)".to_string()),
        }
        parts.extend(self.invariant_factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" (+) "))
        }
    }
}

/// Finite integer matrix with only nonzero entries stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseIntMatrix {
    nrows: usize,
    ncols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseIntMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone().into());
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        assert!(i < self.nrows && j < self.ncols, "index out of bounds");
        if value.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), value);
        }
    }

    /// Adds `delta` to entry `(i, j)`, dropping it if it cancels.
    pub fn add_to(&mut self, i: usize, j: usize, delta: &BigInt) {
        let v = self.get(i, j) + delta;
        self.set(i, j, v);
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &BigInt)> + '_ {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DenseIntMatrix {
        let mut d = DenseIntMatrix::zeros(self.nrows, self.ncols);
        for (&(i, j), v) in &self.entries {
            d.rows[i][j] = v.clone();
        }
        d
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>, LatticeError> {
        check_dim(self.ncols, v.len())?;
        let mut out = vec![BigInt::zero(); self.nrows];
        for (&(i, j), a) in &self.entries {
            out[i] += a * &v[j];
        }
        Ok(out)
    }

    /// Columns as dense vectors.
    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        let mut cols = vec![vec![BigInt::zero(); self.nrows]; self.ncols];
        for (&(i, j), v) in &self.entries {
            cols[j][i] = v.clone();
        }
        cols
    }

    /// Matrix with rows and columns reordered: entry `(i, j)` moves to
    /// `(row_perm[i], col_perm[j])`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut m = Self::zeros(self.nrows, self.ncols);
        for (&(i, j), v) in &self.entries {
            m.set(row_perm[i], col_perm[j], v.clone());
        }
        m
    }
}

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseIntMatrix {
    rows: Vec<Vec<BigInt>>,
    ncols: usize,
}

impl DenseIntMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { rows: vec![vec![BigInt::zero(); ncols]; nrows], ncols }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { BigInt::one() } else { BigInt::zero() })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        Self { rows: (0..nrows).map(|i| (0..ncols).map(|j| f(i, j)).collect()).collect(), ncols }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn mul(&self, rhs: &DenseIntMatrix) -> DenseIntMatrix {
        assert_eq!(self.ncols, rhs.nrows(), "shape mismatch");
        let mut out = DenseIntMatrix::zeros(self.nrows(), rhs.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in rhs.rows[k].iter().enumerate() {
                    if !b.is_zero() {
                        out.rows[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| i == j || v.is_zero()))
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.nrows(), self.ncols, "square matrix required");
        let n = self.ncols;
        let mut a = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * prev
    }

    pub fn is_unimodular(&self) -> bool {
        self.nrows() == self.ncols && self.determinant().abs().is_one()
    }
}

impl From<&SparseIntMatrix> for DenseIntMatrix {
    fn from(m: &SparseIntMatrix) -> Self {
        m.to_dense()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), LatticeError> {
    if expected == found {
        Ok(())
    } else {
        Err(LatticeError::DimensionMismatch { expected, found })
    }
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal,
/// `d_1 | d_2 | ... | d_rank`, all positive, trailing diagonal zero.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: DenseIntMatrix,
    pub d: DenseIntMatrix,
    pub v: DenseIntMatrix,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d.get(i, i).clone()).collect()
    }

    /// Re-multiplies `U · M · V` and compares with `D`.
    pub fn verify(&self, m: &SparseIntMatrix) -> bool {
        let diag = self.diagonal();
        self.d.is_diagonal()
            && diag.iter().all(|d| d.is_positive())
            && diag.windows(2).all(|w| (&w[1] % &w[0]).is_zero())
            && self.u.mul(&m.to_dense()).mul(&self.v) == self.d
    }
}

/// Elimination state. Row operations are mirrored on `u`, column
/// operations on `v`, when those are tracked.
struct Reducer {
    a: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
    ncols: usize,
}

fn two_rows(rows: &mut [Vec<BigInt>], dst: usize, src: usize) -> (&mut Vec<BigInt>, &Vec<BigInt>) {
    assert_ne!(dst, src);
    if dst < src {
        let (lo, hi) = rows.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    }
}

/// `dst += q * src` on whole rows, skipping zero entries of `src`.
fn axpy_row(dst: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    if q.is_one() {
        for (d, s) in dst.iter_mut().zip(src) {
            if !s.is_zero() {
                *d += s;
            }
        }
    } else if (-q).is_one() {
        for (d, s) in dst.iter_mut().zip(src) {
            if !s.is_zero() {
                *d -= s;
            }
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            if !s.is_zero() {
                *d += q * s;
            }
        }
    }
}

impl Reducer {
    fn new(m: &DenseIntMatrix, track_u: bool, track_v: bool) -> Self {
        Self {
            a: m.rows.clone(),
            u: track_u.then(|| DenseIntMatrix::identity(m.nrows()).rows),
            v: track_v.then(|| DenseIntMatrix::identity(m.ncols).rows),
            ncols: m.ncols,
        }
    }

    fn nrows(&self) -> usize {
        self.a.len()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            if let Some(u) = &mut self.u {
                u.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for row in &mut self.a {
                row.swap(i, j);
            }
            if let Some(v) = &mut self.v {
                for row in v {
                    row.swap(i, j);
                }
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -std::mem::take(x);
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[i] {
                *x = -std::mem::take(x);
            }
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        let (d, s) = two_rows(&mut self.a, dst, src);
        axpy_row(d, s, q);
        if let Some(u) = &mut self.u {
            let (d, s) = two_rows(u, dst, src);
            axpy_row(d, s, q);
        }
    }

    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for row in &mut self.a {
            if !row[src].is_zero() {
                let delta = q * &row[src];
                row[dst] += delta;
            }
        }
        if let Some(v) = &mut self.v {
            for row in v {
                if !row[src].is_zero() {
                    let delta = q * &row[src];
                    row[dst] += delta;
                }
            }
        }
    }

    /// Smallest nonzero magnitude in the trailing block, ties broken by
    /// (row, col) order.
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.nrows() {
            for j in t..self.ncols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.a[bi][bj].magnitude() <= x.magnitude() => {}
                    _ => {
                        if x.magnitude().is_one() {
                            return Some((i, j));
                        }
                        best = Some((i, j));
                    }
                }
            }
        }
        best
    }

    /// Clears row and column `t` except for the pivot at `(t, t)`.
    fn clear_cross(&mut self, t: usize) {
        loop {
            for i in t + 1..self.nrows() {
                if !self.a[i][t].is_zero() {
                    let q = -(&self.a[i][t] / &self.a[t][t]);
                    self.add_row(i, t, &q);
                }
            }
            for j in t + 1..self.ncols {
                if !self.a[t][j].is_zero() {
                    let q = -(&self.a[t][j] / &self.a[t][t]);
                    self.add_col(j, t, &q);
                }
            }
            let below = (t + 1..self.nrows()).filter(|&i| !self.a[i][t].is_zero()).map(|i| (i, t));
            let right = (t + 1..self.ncols).filter(|&j| !self.a[t][j].is_zero()).map(|j| (t, j));
            let Some((i, j)) =
                below.chain(right).min_by(|x, y| self.a[x.0][x.1].magnitude().cmp(self.a[y.0][y.1].magnitude()))
            else {
                break;
            };
            if j == t {
                self.swap_rows(t, i);
            } else {
                self.swap_cols(t, j);
            }
        }
        if self.a[t][t].is_negative() {
            self.negate_row(t);
        }
    }

    fn diagonalize(&mut self) -> usize {
        let mut t = 0;
        while t < self.nrows().min(self.ncols) {
            let Some((i, j)) = self.find_pivot(t) else { break };
            self.swap_rows(t, i);
            self.swap_cols(t, j);
            self.clear_cross(t);
            t += 1;
        }
        t
    }

    /// Enforces `d_i | d_j` for `i < j` on an already diagonal block.
    fn fix_divisibility(&mut self, rank: usize) {
        for i in 0..rank {
            for j in i + 1..rank {
                if (&self.a[j][j] % &self.a[i][i]).is_zero() {
                    continue;
                }
                // bring d_j into column i and re-clear the 2x2 block
                self.add_col(i, j, &BigInt::one());
                self.clear_cross(i);
                if self.a[j][j].is_negative() {
                    self.negate_row(j);
                }
            }
        }
    }
}

pub fn smith_normal_form(m: &SparseIntMatrix) -> SmithForm {
    let mut r = Reducer::new(&m.to_dense(), true, true);
    let rank = r.diagonalize();
    r.fix_divisibility(rank);
    let form = SmithForm {
        u: DenseIntMatrix { rows: r.u.expect("tracked"), ncols: m.nrows },
        d: DenseIntMatrix { rows: r.a, ncols: m.ncols },
        v: DenseIntMatrix { rows: r.v.expect("tracked"), ncols: m.ncols },
        rank,
    };
    debug_assert!(form.verify(m), "Smith form failed re-multiplication check");
    form
}

/// Nonzero Smith diagonal without transforms.
fn invariant_diagonal(m: &DenseIntMatrix) -> Vec<BigInt> {
    let mut r = Reducer::new(m, false, false);
    let rank = r.diagonalize();
    r.fix_divisibility(rank);
    (0..rank).map(|i| r.a[i][i].clone()).collect()
}

pub fn rank(m: &SparseIntMatrix) -> usize {
    invariant_diagonal(&m.to_dense()).len()
}

/// Lattice basis of the integer kernel: the trailing columns of `V`.
pub fn kernel_basis(m: &SparseIntMatrix) -> Vec<Vec<BigInt>> {
    let mut r = Reducer::new(&m.to_dense(), false, true);
    let rank = r.diagonalize();
    let v = DenseIntMatrix { rows: r.v.expect("tracked"), ncols: m.ncols };
    (rank..m.ncols).map(|j| v.column(j)).collect()
}

/// `Z^rows / im(M)`.
pub fn cokernel(m: &SparseIntMatrix) -> AbelianGroup {
    let diag = invariant_diagonal(&m.to_dense());
    let free = (m.nrows - diag.len()) as u64;
    AbelianGroup {
        free_rank: Cardinal::Finite(free),
        invariant_factors: diag.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Row-style Hermite normal form of the lattice spanned by some generators:
/// echelon rows with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteBasis {
    dim: usize,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl HermiteBasis {
    pub fn new(dim: usize, generators: &[Vec<BigInt>]) -> Result<Self, LatticeError> {
        for g in generators {
            check_dim(dim, g.len())?;
        }
        let mut rows: Vec<Vec<BigInt>> =
            generators.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..dim {
            if r == rows.len() {
                break;
            }
            while let Some(best) = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&x, &y| rows[x][c].magnitude().cmp(rows[y][c].magnitude()))
            {
                rows.swap(r, best);
                let mut clean = true;
                for i in r + 1..rows.len() {
                    if rows[i][c].is_zero() {
                        continue;
                    }
                    let q = -(&rows[i][c] / &rows[r][c]);
                    let (d, s) = two_rows(&mut rows, i, r);
                    axpy_row(d, s, &q);
                    clean &= rows[i][c].is_zero();
                }
                if clean {
                    break;
                }
            }
            if r < rows.len() && !rows[r][c].is_zero() {
                if rows[r][c].is_negative() {
                    for x in &mut rows[r] {
                        *x = -std::mem::take(x);
                    }
                }
                for i in 0..r {
                    let q = -rows[i][c].div_floor(&rows[r][c]);
                    if !q.is_zero() {
                        let (d, s) = two_rows(&mut rows, i, r);
                        axpy_row(d, s, &q);
                    }
                }
                pivots.push(c);
                r += 1;
            }
        }
        rows.truncate(r);
        Ok(Self { dim, rows, pivots })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Back-substitution along the echelon pivots.
    pub fn contains(&self, v: &[BigInt]) -> Result<bool, LatticeError> {
        check_dim(self.dim, v.len())?;
        let mut rest = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if rest[..p].iter().any(|x| !x.is_zero()) {
                return Ok(false);
            }
            let (q, rem) = rest[p].div_rem(&row[p]);
            if !rem.is_zero() {
                return Ok(false);
            }
            if !q.is_zero() {
                axpy_row(&mut rest, row, &-q);
            }
        }
        Ok(rest.iter().all(Zero::is_zero))
    }

    pub fn contains_all(&self, vs: &[Vec<BigInt>]) -> Result<bool, LatticeError> {
        for v in vs {
            if !self.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn lattice_membership(v: &[BigInt], basis: &[Vec<BigInt>]) -> Result<bool, LatticeError> {
    HermiteBasis::new(v.len(), basis)?.contains(v)
}

/// Mutual containment of the lattices spanned by two generator sets in `Z^dim`.
pub fn lattice_equal(dim: usize, a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Result<bool, LatticeError> {
    let ha = HermiteBasis::new(dim, a)?;
    let hb = HermiteBasis::new(dim, b)?;
    Ok(ha.contains_all(b)? && hb.contains_all(a)?)
}

/// Basis of `L ∩ {v : v[c] = 0 for c in zero_coords}` where `L` is spanned
/// by `generators` in `Z^dim`.
pub fn sublattice_vanishing_on(
    dim: usize,
    generators: &[Vec<BigInt>],
    zero_coords: &[usize],
) -> Result<Vec<Vec<BigInt>>, LatticeError> {
    // order the vanishing coordinates first so echelon rows with later
    // pivots are exactly the vectors vanishing there
    let mut order: Vec<usize> = zero_coords.to_vec();
    order.sort_unstable();
    order.dedup();
    let lead = order.len();
    order.extend((0..dim).filter(|c| !zero_coords.contains(c)));
    let permuted: Vec<Vec<BigInt>> = generators
        .iter()
        .map(|g| {
            check_dim(dim, g.len())?;
            Ok(order.iter().map(|&c| g[c].clone()).collect())
        })
        .collect::<Result<_, LatticeError>>()?;
    let h = HermiteBasis::new(dim, &permuted)?;
    Ok(h.rows
        .iter()
        .zip(&h.pivots)
        .filter(|(_, &p)| p >= lead)
        .map(|(row, _)| {
            let mut v = vec![BigInt::zero(); dim];
            for (k, &c) in order.iter().enumerate() {
                v[c] = row[k].clone();
            }
            v
        })
        .collect())
}

pub fn to_i64_vec(v: &[BigInt]) -> Option<Vec<i64>> {
    v.iter().map(ToPrimitive::to_i64).collect()
}

pub fn bigint_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> SparseIntMatrix {
        SparseIntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn bi(v: &[i64]) -> Vec<BigInt> {
        bigint_vec(v)
    }

    /// Invariant factors from gcds of k-minors: d_1 ... d_k = gcd of all
    /// k-by-k minors. Independent of the elimination code.
    fn minor_oracle(a: &[&[i64]]) -> Vec<i64> {
        fn det(a: &[Vec<i64>]) -> i64 {
            if a.is_empty() {
                return 1;
            }
            (0..a.len())
                .map(|j| {
                    let sub: Vec<Vec<i64>> = a[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * a[0][j] * det(&sub)
                })
                .sum()
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            (k - 1..n)
                .flat_map(|last| {
                    subsets(last, k - 1).into_iter().map(move |mut s| {
                        s.push(last);
                        s
                    })
                })
                .collect()
        }
        let (r, c) = (a.len(), a[0].len());
        let mut out = Vec::new();
        let mut prev = 1i64;
        for k in 1..=r.min(c) {
            let mut g = 0i64;
            for rs in subsets(r, k) {
                for cs in subsets(c, k) {
                    let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| a[i][j]).collect()).collect();
                    g = g.gcd(&det(&sub));
                }
            }
            if g == 0 {
                break;
            }
            out.push(g / prev);
            prev = g;
        }
        out
    }

    #[test]
    fn minor_oracle_sanity() {
        assert_eq!(minor_oracle(&[&[2, 0], &[0, 3]]), vec![1, 6]);
        assert_eq!(minor_oracle(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]), vec![2, 6, 12]);
    }

    #[test]
    fn snf_diag_2_3() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), bi(&[1, 6]));
        assert!(s.verify(&a));
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
    }

    #[test]
    fn snf_zero_and_identity() {
        let z = SparseIntMatrix::zeros(2, 2);
        let s = smith_normal_form(&z);
        assert_eq!(s.rank, 0);
        assert_eq!(s.u, DenseIntMatrix::identity(2));
        assert_eq!(s.v, DenseIntMatrix::identity(2));
        let i = SparseIntMatrix::identity(4);
        let s = smith_normal_form(&i);
        assert_eq!(s.d, DenseIntMatrix::identity(4));
    }

    #[test]
    fn snf_matches_minor_oracle() {
        let cases: [&[&[i64]]; 4] = [
            &[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]],
            &[&[4, 6], &[6, 9], &[2, 3]],
            &[&[0, 2, 3], &[4, 0, 5]],
            &[&[6, 10, 15], &[0, 0, 0], &[12, 20, 30]],
        ];
        for a in cases {
            let s = smith_normal_form(&m(a));
            assert!(s.verify(&m(a)));
            let expected: Vec<BigInt> = minor_oracle(a).into_iter().map(BigInt::from).collect();
            assert_eq!(s.diagonal(), expected, "{a:?}");
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&SparseIntMatrix::zeros(2, 2)).len(), 2);
        assert!(kernel_basis(&SparseIntMatrix::identity(3)).is_empty());
        let k = kernel_basis(&m(&[&[1, 1]]));
        assert_eq!(k.len(), 1);
        assert!(lattice_equal(2, &k, &[bi(&[1, -1])]).unwrap());
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel(&SparseIntMatrix::zeros(2, 2)), AbelianGroup::free(2));
        let g = cokernel(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(g.free_rank(), Cardinal::ZERO);
        assert_eq!(g.invariant_factors(), &[BigInt::from(6)]);
        assert!(cokernel(&m(&[&[1]])).is_trivial());
    }

    #[test]
    fn membership_examples() {
        assert!(lattice_membership(&bi(&[2, 0]), &[bi(&[1, 0])]).unwrap());
        assert!(!lattice_membership(&bi(&[1, 1]), &[bi(&[2, 0]), bi(&[0, 2])]).unwrap());
        assert!(lattice_equal(2, &[bi(&[1, 0]), bi(&[0, 1])], &[bi(&[1, 1]), bi(&[0, 1])]).unwrap());
        assert!(!lattice_equal(2, &[bi(&[1, 0])], &[bi(&[2, 0])]).unwrap());
        assert_eq!(
            lattice_membership(&bi(&[1, 0, 0]), &[bi(&[1, 0])]).unwrap_err(),
            LatticeError::DimensionMismatch { expected: 3, found: 2 }
        );
    }

    #[test]
    fn hermite_is_canonical() {
        let a = HermiteBasis::new(2, &[bi(&[1, 0]), bi(&[0, 1])]).unwrap();
        let b = HermiteBasis::new(2, &[bi(&[1, 1]), bi(&[0, 1]), bi(&[3, 5])]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_sublattice() {
        // span{(1,1,0),(0,2,1)} ∩ {x0 = 0}: a(1,1,0)+b(0,2,1) with a = 0
        let gens = [bi(&[1, 1, 0]), bi(&[0, 2, 1])];
        let sub = sublattice_vanishing_on(3, &gens, &[0]).unwrap();
        assert!(lattice_equal(3, &sub, &[bi(&[0, 2, 1])]).unwrap());
        let none = sublattice_vanishing_on(3, &gens, &[0, 1]).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn abelian_group_normalizes() {
        let g = AbelianGroup::from_orders(1u64, [2, 3, 1, 0].map(BigInt::from));
        assert_eq!(g.free_rank(), Cardinal::Finite(2));
        assert_eq!(g.invariant_factors(), &[BigInt::from(6)]);
        assert_eq!(g.to_string(), "Z^2 (+) Z/6");
        let h = AbelianGroup::from_orders(0u64, [2, 4].map(BigInt::from));
        assert_eq!(h.to_string(), "Z/2 (+) Z/4");
        assert_eq!(AbelianGroup::trivial().to_string(), "0");
        assert_eq!(AbelianGroup::free(Cardinal::CountablyInfinite).to_string(), "Z^(N)");
        assert_eq!(AbelianGroup::free(1u64).to_string(), "Z");
    }

    #[test]
    fn cardinal_arithmetic() {
        assert_eq!(Cardinal::Finite(2) + Cardinal::Finite(3), Cardinal::Finite(5));
        assert_eq!(Cardinal::Finite(2) + Cardinal::CountablyInfinite, Cardinal::CountablyInfinite);
        assert_eq!([Cardinal::Finite(1); 3].into_iter().sum::<Cardinal>(), Cardinal::Finite(3));
    }
}
