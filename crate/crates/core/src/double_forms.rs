//! Double forms on a finite-dimensional inner-product space.
//!
//! A `(p,q)` double form is stored by its components on pairs of sorted index
//! subsets; subsets are bitmasks over `{0, …, n−1}` and a basis of `p`-subsets
//! is ordered lexicographically (`{0,1}, {0,2}, …, {1,2}, …`).
//!
//! The exterior product is the shuffle sum in each index group, so that
//! `(g∧g)(12;12) = 2` and `(g∧T)(ij;ij) = T_ii + T_jj` in an orthonormal frame.
//! With this convention `g^p/p!` has the `p×p` minors of `g` as components,
//! the unit sphere has `R = g²/2`, and a conformally flat curvature tensor is
//! `R = g∧A` with `A` the Schouten tensor.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::tensor::{cholesky_factor, ein_k, schouten, spectrum_rel, CurvaturePoint, Spectrum, SymTensor2};
use crate::{Error, Result};

/// Largest dimension accepted by the Weitzenböck operations.
pub const MAX_DIM: usize = 9;

/// Relative tolerance for the conformal flatness check `R = g∧A`.
pub const WEYL_TOL: f64 = 1e-6;

/// Lexicographically ordered `p`-subsets of `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetBasis {
    n: usize,
    p: usize,
    subsets: Vec<u32>,
    rank: Vec<usize>,
}

impl SubsetBasis {
    pub fn new(n: usize, p: usize) -> Self {
        assert!(n < 32, "subset bitmasks hold at most 31 indices");
        let mut subsets = Vec::new();
        fn rec(start: usize, n: usize, left: usize, mask: u32, out: &mut Vec<u32>) {
            if left == 0 {
                out.push(mask);
                return;
            }
            for i in start..=(n - left) {
                rec(i + 1, n, left - 1, mask | (1 << i), out);
            }
        }
        if p <= n {
            rec(0, n, p, 0, &mut subsets);
        }
        let mut rank = vec![usize::MAX; 1 << n];
        for (r, &m) in subsets.iter().enumerate() {
            rank[m as usize] = r;
        }
        Self { n, p, subsets, rank }
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn mask(&self, r: usize) -> u32 {
        self.subsets[r]
    }

    pub fn rank_of(&self, mask: u32) -> usize {
        self.rank[mask as usize]
    }

    /// Indices of the `r`-th subset, ascending.
    pub fn indices(&self, r: usize) -> Vec<usize> {
        bits(self.subsets[r]).collect()
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the shuffle placing `a` before `b`: `(−1)^{#(i∈a, j∈b, i>j)}`.
fn shuffle_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    for i in bits(a) {
        inversions += (b & ((1u32 << i) - 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All splittings of `mask` into `(sub, rest)` with `|sub| = k`, with signs.
fn splittings(mask: u32, k: usize) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    let mut sub = mask;
    loop {
        if sub.count_ones() as usize == k {
            let rest = mask & !sub;
            out.push((sub, rest, shuffle_sign(sub, rest)));
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    out
}

/// Sign of moving index `a` in front of the sorted subset `set`.
fn insertion_sign(a: usize, set: u32) -> f64 {
    if (set & ((1u32 << a) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the permutation sorting `idx`, and its bitmask; `None` on repeats.
fn sort_sign(idx: &[usize]) -> Option<(u32, f64)> {
    let mut mask = 0u32;
    let mut sign = 1.0;
    for (k, &i) in idx.iter().enumerate() {
        if mask & (1 << i) != 0 {
            return None;
        }
        mask |= 1 << i;
        for &j in &idx[..k] {
            if j > i {
                sign = -sign;
            }
        }
    }
    Some((mask, sign))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleForm {
    rows: SubsetBasis,
    cols: SubsetBasis,
    data: DMatrix<f64>,
}

impl DoubleForm {
    pub fn zeros(n: usize, p: usize, q: usize) -> Result<Self> {
        if p > n || q > n {
            return Err(Error::DegreeOutOfRange {
                deg: p.max(q),
                reason: format!("bidegree ({p},{q}) exceeds dimension {n}"),
            });
        }
        if n > 16 {
            return Err(Error::DimensionCap { n, cap: 16 });
        }
        let rows = SubsetBasis::new(n, p);
        let cols = SubsetBasis::new(n, q);
        let data = DMatrix::zeros(rows.len(), cols.len());
        Ok(Self { rows, cols, data })
    }

    /// The `(0,0)` form with value `v`.
    pub fn scalar(n: usize, v: f64) -> Self {
        let mut f = Self::zeros(n, 0, 0).expect("(0,0) always fits");
        f.data[(0, 0)] = v;
        f
    }

    /// A symmetric 2-tensor as a `(1,1)` form.
    pub fn from_sym(t: &SymTensor2) -> Self {
        let n = t.dim();
        let mut f = Self::zeros(n, 1, 1).expect("(1,1) fits for n >= 1");
        f.data.copy_from(t.matrix());
        f
    }

    /// The curvature tensor of a point as a `(2,2)` form.
    pub fn from_curvature(p: &CurvaturePoint) -> Result<Self> {
        let n = p.dim();
        let mut f = Self::zeros(n, 2, 2)?;
        for r in 0..f.rows.len() {
            let [i, j] = pair(&f.rows, r);
            for c in 0..f.cols.len() {
                let [k, l] = pair(&f.cols, c);
                f.data[(r, c)] = p.riemann(i, j, k, l);
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.rows.dim()
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.rows.degree(), self.cols.degree())
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row_basis(&self) -> &SubsetBasis {
        &self.rows
    }

    /// Component on ordered index tuples, with the antisymmetry sign applied.
    pub fn component(&self, rows: &[usize], cols: &[usize]) -> f64 {
        if rows.len() != self.rows.degree() || cols.len() != self.cols.degree() {
            return 0.0;
        }
        match (sort_sign(rows), sort_sign(cols)) {
            (Some((a, sa)), Some((b, sb))) => {
                sa * sb * self.data[(self.rows.rank_of(a), self.cols.rank_of(b))]
            }
            _ => 0.0,
        }
    }

    /// Full `n⁴` component array of a `(2,2)` form, row-major.
    pub fn to_riemann(&self) -> Result<Vec<f64>> {
        if self.bidegree() != (2, 2) {
            return Err(Error::DegreeOutOfRange {
                deg: self.rows.degree(),
                reason: "a curvature tensor is a (2,2) form".into(),
            });
        }
        let n = self.dim();
        let mut out = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out[((i * n + j) * n + k) * n + l] = self.component(&[i, j], &[k, l]);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            data: &self.data * c,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            data: &self.data + &other.data,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.bidegree() != other.bidegree() {
            return Err(Error::DegreeOutOfRange {
                deg: other.rows.degree(),
                reason: format!(
                    "bidegree {:?} does not match {:?}",
                    other.bidegree(),
                    self.bidegree()
                ),
            });
        }
        Ok(())
    }
}

fn pair(basis: &SubsetBasis, r: usize) -> [usize; 2] {
    let v = basis.indices(r);
    [v[0], v[1]]
}

/// Exterior product acting separately on the two index groups.
pub fn wedge(a: &DoubleForm, b: &DoubleForm) -> Result<DoubleForm> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    let (p, q) = a.bidegree();
    let (r, s) = b.bidegree();
    if p + r > n || q + s > n {
        return Err(Error::DegreeOutOfRange {
            deg: (p + r).max(q + s),
            reason: format!("product of ({p},{q}) and ({r},{s}) exceeds dimension {n}"),
        });
    }
    let mut out = DoubleForm::zeros(n, p + r, q + s)?;
    let row_splits: Vec<Vec<(usize, usize, f64)>> = (0..out.rows.len())
        .map(|i| {
            splittings(out.rows.mask(i), p)
                .into_iter()
                .map(|(x, y, sg)| (a.rows.rank_of(x), b.rows.rank_of(y), sg))
                .collect()
        })
        .collect();
    let col_splits: Vec<Vec<(usize, usize, f64)>> = (0..out.cols.len())
        .map(|j| {
            splittings(out.cols.mask(j), q)
                .into_iter()
                .map(|(x, y, sg)| (a.cols.rank_of(x), b.cols.rank_of(y), sg))
                .collect()
        })
        .collect();
    for (i, rs) in row_splits.iter().enumerate() {
        for (j, cs) in col_splits.iter().enumerate() {
            let mut acc = 0.0;
            for &(a1, b1, s1) in rs {
                for &(a2, b2, s2) in cs {
                    acc += s1 * s2 * a.data[(a1, a2)] * b.data[(b1, b2)];
                }
            }
            out.data[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// First contraction of a double form against `g`: one index from each group
/// traced with `g^{ab}`.
pub fn contract(a: &DoubleForm, g: &SymTensor2) -> Result<DoubleForm> {
    let n = a.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    let (p, q) = a.bidegree();
    if p == 0 || q == 0 {
        return Err(Error::DegreeOutOfRange {
            deg: 0,
            reason: "contraction needs at least one index in each group".into(),
        });
    }
    let g_inv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let mut out = DoubleForm::zeros(n, p - 1, q - 1)?;
    for i in 0..out.rows.len() {
        let im = out.rows.mask(i);
        for j in 0..out.cols.len() {
            let jm = out.cols.mask(j);
            let mut acc = 0.0;
            for x in (0..n).filter(|x| im & (1 << x) == 0) {
                let r = a.rows.rank_of(im | (1 << x));
                let sx = insertion_sign(x, im);
                for y in (0..n).filter(|y| jm & (1 << y) == 0) {
                    let c = a.cols.rank_of(jm | (1 << y));
                    acc += g_inv[(x, y)] * sx * insertion_sign(y, jm) * a.data[(r, c)];
                }
            }
            out.data[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `g^k/k!`, built as `P_k = P_{k−1}∧g/k`.
pub fn metric_power(g: &SymTensor2, k: usize) -> Result<DoubleForm> {
    let n = g.dim();
    let gf = DoubleForm::from_sym(g);
    let mut acc = DoubleForm::scalar(n, 1.0);
    for j in 1..=k {
        acc = wedge(&acc, &gf)?.scale(1.0 / j as f64);
    }
    Ok(acc)
}

/// Compound matrix: all `p×p` minors of `m`, rows and columns in subset order.
fn compound(m: &DMatrix<f64>, basis: &SubsetBasis) -> DMatrix<f64> {
    let len = basis.len();
    let idx: Vec<Vec<usize>> = (0..len).map(|r| basis.indices(r)).collect();
    let p = basis.degree();
    DMatrix::from_fn(len, len, |r, c| {
        if p == 0 {
            return 1.0;
        }
        DMatrix::from_fn(p, p, |a, b| m[(idx[r][a], idx[c][b])]).determinant()
    })
}

/// Symmetric operator on `p`-forms in the lexicographic basis of an
/// orthonormal coframe.
#[derive(Debug, Clone, PartialEq)]
pub struct PFormOperator {
    n: usize,
    p: usize,
    matrix: DMatrix<f64>,
}

impl PFormOperator {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Basis labels, 1-based, in the order of the matrix rows.
    pub fn basis_labels(&self) -> Vec<Vec<usize>> {
        let b = SubsetBasis::new(self.n, self.p);
        (0..b.len())
            .map(|r| b.indices(r).into_iter().map(|i| i + 1).collect())
            .collect()
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        Spectrum::from_values(eig.eigenvalues.iter().copied().collect())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().min()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.matrix.amax().max(1.0)
    }

    /// Largest entrywise difference to another operator of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n != other.n || self.p != other.p {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: other.matrix.nrows(),
            });
        }
        Ok((&self.matrix - &other.matrix).amax())
    }

    /// Positive definite with margin `tol · max(1, ‖M‖)`.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol * self.matrix.amax().max(1.0)
    }
}

/// Operator of a `(p,p)` form on `p`-forms, after orthonormalizing against
/// `g = LLᵀ`: `C_p(L⁻¹) · M · C_p(L⁻¹)ᵀ`.
pub fn as_operator(a: &DoubleForm, g: &SymTensor2) -> Result<PFormOperator> {
    let n = a.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.dim(),
        });
    }
    let (p, q) = a.bidegree();
    if p != q {
        return Err(Error::DegreeOutOfRange {
            deg: q,
            reason: format!("operator needs a (p,p) form, got ({p},{q})"),
        });
    }
    let l = cholesky_factor(g)?;
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::NotPositiveDefinite)?;
    let c = compound(&l_inv, &a.rows);
    let m = &c * &a.data * c.transpose();
    let asymmetry = (&m - m.transpose()).amax();
    if asymmetry > 1e-9 * m.amax().max(1.0) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(PFormOperator {
        n,
        p,
        matrix: (&m + m.transpose()) * 0.5,
    })
}

/// Sum of the `p` smallest eigenvalues of `t` relative to `g`.
pub fn sum_lowest_p(t: &SymTensor2, g: &SymTensor2, p: usize) -> Result<f64> {
    let n = t.dim();
    if p < 1 || p > n {
        return Err(Error::DegreeOutOfRange {
            deg: p,
            reason: format!("requires 1 <= p <= n = {n}"),
        });
    }
    Ok(spectrum_rel(g, t)?.sum_lowest(p))
}

/// `g^{p−1}/(p−1)! ∧ T` as an operator on `p`-forms. Its eigenvalues are the
/// sums of `p` eigenvalues of `T` over distinct indices.
pub fn subset_sum_operator(t: &SymTensor2, g: &SymTensor2, p: usize) -> Result<PFormOperator> {
    let n = t.dim();
    if p < 1 || p > n {
        return Err(Error::DegreeOutOfRange {
            deg: p,
            reason: format!("requires 1 <= p <= n = {n}"),
        });
    }
    let form = wedge(&metric_power(g, p - 1)?, &DoubleForm::from_sym(t))?;
    as_operator(&form, g)
}

fn check_weitzenbock_range(n: usize, deg: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(Error::DimensionCap { n, cap: MAX_DIM });
    }
    if deg < 2 || deg + 1 > n {
        return Err(Error::DegreeOutOfRange {
            deg,
            reason: format!("Weitzenböck term needs 2 <= p <= n-1 = {}", n.saturating_sub(1)),
        });
    }
    Ok(())
}

/// Curvature term `g^{p−2}/(p−2)! ∧ (g∧Ric/(p−1) − 2R)` on `deg`-forms.
pub fn weitzenbock_general(point: &CurvaturePoint, deg: usize) -> Result<PFormOperator> {
    let n = point.dim();
    check_weitzenbock_range(n, deg)?;
    let g = point.metric();
    let gf = DoubleForm::from_sym(g);
    let ric = DoubleForm::from_sym(point.ricci());
    let r = DoubleForm::from_curvature(point)?;
    let inner = wedge(&gf, &ric)?
        .scale(1.0 / (deg as f64 - 1.0))
        .sub(&r.scale(2.0))?;
    let form = wedge(&metric_power(g, deg - 2)?, &inner)?;
    as_operator(&form, g)
}

/// Largest component of `R − g∧A`, relative to `max(1, max|R|)`.
pub fn weyl_residual(point: &CurvaturePoint) -> Result<f64> {
    let a = schouten(point)?;
    let r = DoubleForm::from_curvature(point)?;
    let ga = wedge(&DoubleForm::from_sym(point.metric()), &DoubleForm::from_sym(&a))?;
    Ok(r.sub(&ga)?.max_abs() / r.max_abs().max(1.0))
}

/// `k₁ = (n−1)(2p−n)/(p−1)`.
pub fn k1(n: usize, deg: usize) -> f64 {
    let (n, p) = (n as f64, deg as f64);
    (n - 1.0) * (2.0 * p - n) / (p - 1.0)
}

/// Conformally flat form of the curvature term,
/// `(p−1)/((n−1)(n−2)) · g^{p−1}/(p−1)! ∧ Ein_{k₁}`.
pub fn weitzenbock_cflat(point: &CurvaturePoint, deg: usize) -> Result<PFormOperator> {
    let n = point.dim();
    check_weitzenbock_range(n, deg)?;
    let residual = weyl_residual(point)?;
    if residual > WEYL_TOL {
        return Err(Error::WeylNonzero { residual });
    }
    let nf = n as f64;
    let factor = (deg as f64 - 1.0) / ((nf - 1.0) * (nf - 2.0));
    let op = subset_sum_operator(&ein_k(point, k1(n, deg)), point.metric(), deg)?;
    Ok(PFormOperator {
        matrix: op.matrix * factor,
        ..op
    })
}

/// The conformally flat curvature term on `(n−deg)`-forms, which involves
/// `Ein_{k₂}` with `k₂ = (n−1)(n−2p)/(n−p−1)`.
pub fn weitzenbock_cflat_companion(point: &CurvaturePoint, deg: usize) -> Result<PFormOperator> {
    let n = point.dim();
    check_weitzenbock_range(n, deg)?;
    weitzenbock_cflat(point, n - deg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSummary {
    pub n: usize,
    pub p: usize,
    pub spectrum: Spectrum,
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
}

impl OperatorSummary {
    pub fn of(op: &PFormOperator, tol: f64) -> Self {
        let spectrum = op.spectrum();
        Self {
            n: op.n,
            p: op.p,
            min_eigenvalue: spectrum.min(),
            positive_definite: op.is_positive_definite(tol),
            spectrum,
        }
    }
}
