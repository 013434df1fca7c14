//! Representations, overflow-safe products, singular values, the gap subspaces
//! U_k and S_{d-k}, and the Grassmannian distance.
//!
//! A [`ScaledMatrix`] carries every exterior power Λ^j of the product, each as a
//! normalized core with a separate log-scale. Log singular values are read off as
//! differences of top singular values of consecutive exterior powers, and the
//! planes U_k, S_{d-k} come from the top singular vectors of Λ^k, so small
//! singular values and long products never need to be resolved directly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Letter, ReducedWord};

/// Margins below this (relative to the magnitudes involved) count as no gap.
pub const GAP_TOL: f64 = 1e-12;
/// Subspaces closer than this are equal.
pub const SUBSPACE_TOL: f64 = 1e-8;

/// Singular value decomposition with singular values in descending order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD. Singular vectors stay accurate on the nearly rank-one
/// cores produced by long products, where bidiagonal QR loses digits.
pub fn svd_sorted(m: &DMatrix<f64>) -> SortedSvd {
    if m.nrows() < m.ncols() {
        let t = svd_sorted(&m.transpose());
        return SortedSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (mat, len) in [(&mut a, rows), (&mut v, n)] {
                    for r in 0..len {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let mut u = DMatrix::<f64>::zeros(rows, n);
    for (c, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(c, &(a.column(j) / norms[j]));
        } else {
            // Complete with a unit vector orthogonal to the columns so far.
            let mut best = DVector::<f64>::zeros(rows);
            for e in 0..rows {
                let mut x = DVector::<f64>::zeros(rows);
                x[e] = 1.0;
                for _ in 0..2 {
                    for k in 0..c {
                        let proj = u.column(k).dot(&x);
                        x -= u.column(k) * proj;
                    }
                }
                if x.norm() > best.norm() {
                    best = x;
                }
            }
            u.set_column(c, &(&best / best.norm()));
        }
    }
    SortedSvd { u, sigma, v }
}

pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    svd_sorted(m).sigma[0]
}

/// Singular values of a square matrix, descending.
pub fn singular_values_dense(m: &DMatrix<f64>) -> Vec<f64> {
    svd_sorted(m).sigma
}

/// `‖m‖·‖m⁻¹‖`.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = svd_sorted(m).sigma;
    s[0] / s[s.len() - 1]
}

/// All j-subsets of 0..d in lexicographic order.
pub fn subsets(d: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, j, &mut Vec::new(), &mut out);
    out
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])]).determinant()
}

/// The j-th compound matrix: all j×j minors, rows and columns indexed by
/// lexicographically ordered subsets.
pub fn compound(m: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    let rows = subsets(m.nrows(), j);
    let cols = subsets(m.ncols(), j);
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| minor(m, &rows[r], &cols[c]))
}

/// The k-plane spanned by a decomposable k-vector, given in the basis of
/// lexicographic k-subsets of 0..d.
fn plane_from_multivector(omega: &[f64], d: usize, k: usize) -> Subspace {
    if k == 0 {
        return Subspace {
            frame: DMatrix::zeros(d, 0),
        };
    }
    let ks = subsets(d, k);
    let index = |s: &[usize]| ks.iter().position(|x| x == s).expect("subset present");
    let js = subsets(d, k - 1);
    let mut m = DMatrix::zeros(d, js.len());
    for (c, j) in js.iter().enumerate() {
        for i in 0..d {
            if j.contains(&i) {
                continue;
            }
            let mut s = j.clone();
            s.push(i);
            s.sort();
            let pos = s.iter().position(|&x| x == i).expect("inserted");
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            m[(i, c)] = sign * omega[index(&s)];
        }
    }
    let svd = svd_sorted(&m);
    Subspace {
        frame: svd.u.columns(0, k).into_owned(),
    }
}

/// A normalized matrix with a separate log-scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub core: DMatrix<f64>,
    pub logscale: f64,
}

impl Level {
    fn normalized(mut core: DMatrix<f64>, mut logscale: f64) -> Self {
        let f = core.norm();
        if f > 0.0 && !(0.5..=2.0).contains(&f) {
            core /= f;
            logscale += f.ln();
        }
        Level { core, logscale }
    }

    /// `ln ‖e^{logscale}·core‖₂`.
    fn log_norm(&self) -> f64 {
        self.logscale + op_norm(&self.core).ln()
    }
}

/// `e^{logscale}·core` together with all its exterior powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    levels: Vec<Level>,
}

impl ScaledMatrix {
    pub fn identity(d: usize) -> Self {
        let levels = (1..=d)
            .map(|j| {
                let n = subsets(d, j).len();
                Level {
                    core: DMatrix::identity(n, n),
                    logscale: 0.0,
                }
            })
            .collect();
        Self { levels }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let d = m.nrows();
        let levels = (1..=d)
            .map(|j| Level::normalized(compound(m, j), 0.0))
            .collect();
        Self { levels }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn core(&self) -> &DMatrix<f64> {
        &self.levels[0].core
    }

    pub fn logscale(&self) -> f64 {
        self.levels[0].logscale
    }

    /// The j-th exterior power, 1-based.
    pub fn level(&self, j: usize) -> &Level {
        &self.levels[j - 1]
    }

    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| Level::normalized(&a.core * &b.core, a.logscale + b.logscale))
            .collect();
        ScaledMatrix { levels }
    }

    /// The same product with every level multiplied by `e^{s·j}` (scalar factor e^s).
    pub fn scaled(&self, s: f64) -> ScaledMatrix {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| Level {
                core: l.core.clone(),
                logscale: l.logscale + s * (i + 1) as f64,
            })
            .collect();
        ScaledMatrix { levels }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.core() * self.logscale().exp()
    }

    /// `ln σ_1 + … + ln σ_j` for j = 1..d.
    pub fn log_norm_ladder(&self) -> Vec<f64> {
        self.levels.iter().map(Level::log_norm).collect()
    }

    /// `ln σ_1 ≥ … ≥ ln σ_d`.
    pub fn singular_values(&self) -> Vec<f64> {
        let ladder = self.log_norm_ladder();
        let mut out: Vec<f64> = Vec::with_capacity(ladder.len());
        let mut prev = 0.0;
        for (i, &l) in ladder.iter().enumerate() {
            let mut s = l - prev;
            if i > 0 {
                s = s.min(out[i - 1]);
            }
            out.push(s);
            prev = l;
        }
        out
    }

    /// `ln σ_k − ln σ_{k+1}`, with values below the gap tolerance reported as 0.
    pub fn gap_margin(&self, k: usize) -> f64 {
        let d = self.dim();
        assert!(k >= 1 && k < d, "gap index {k} out of range for d={d}");
        let ladder = self.log_norm_ladder();
        let prev = if k >= 2 { ladder[k - 2] } else { 0.0 };
        let gap = 2.0 * ladder[k - 1] - prev - ladder[k];
        let scale = 1.0f64.max(ladder[k - 1].abs()).max(prev.abs()).max(ladder[k].abs());
        if gap <= GAP_TOL * scale {
            0.0
        } else {
            gap
        }
    }

    fn check_gap(&self, k: usize) -> Result<()> {
        let d = self.dim();
        if k == 0 || k >= d {
            return Err(Error::BadIndex { k, d });
        }
        if self.gap_margin(k) <= 0.0 {
            return Err(Error::NoGap {
                k,
                word: String::new(),
            });
        }
        Ok(())
    }

    /// `U_k`: the span of the top-k left singular vectors.
    pub fn u_k(&self, k: usize) -> Result<Subspace> {
        self.check_gap(k)?;
        let svd = svd_sorted(&self.level(k).core);
        let omega: Vec<f64> = svd.u.column(0).iter().copied().collect();
        Ok(plane_from_multivector(&omega, self.dim(), k))
    }

    /// `S_{d−k}`: the span of the bottom-(d−k) right singular vectors.
    pub fn s_dk(&self, k: usize) -> Result<Subspace> {
        self.check_gap(k)?;
        let svd = svd_sorted(&self.level(k).core);
        let omega: Vec<f64> = svd.v.column(0).iter().copied().collect();
        Ok(plane_from_multivector(&omega, self.dim(), k).complement())
    }

    /// The image plane `M·V`, computed on the exterior power of matching degree.
    pub fn apply(&self, v: &Subspace) -> Subspace {
        let k = v.dim();
        let d = self.dim();
        if k == 0 || k == d {
            return v.clone();
        }
        let omega = compound(&v.frame, k);
        let image = &self.level(k).core * omega;
        let n = image.norm();
        let col: Vec<f64> = image.iter().map(|x| x / n).collect();
        plane_from_multivector(&col, d, k)
    }
}

/// A representation of F_n into GL(d, R) given by generator images.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    rank: usize,
    dim: usize,
    images: Vec<DMatrix<f64>>,
    scaled: Vec<ScaledMatrix>,
}

fn letter_index(l: Letter) -> usize {
    2 * l.generator() + usize::from(l.is_inverse())
}

impl Representation {
    pub fn new(generators: Vec<DMatrix<f64>>) -> Result<Self> {
        let rank = generators.len();
        if rank == 0 {
            return Err(Error::RankTooSmall(0));
        }
        let dim = generators[0].nrows();
        if dim == 0 {
            return Err(Error::DimensionMismatch("matrices must be nonempty".into()));
        }
        let mut images = Vec::with_capacity(2 * rank);
        for (g, m) in generators.into_iter().enumerate() {
            let name = Letter::gen(g).to_string();
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator {name} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NotInvertible(name, f64::INFINITY));
            }
            let cond = condition_number(&m);
            if !cond.is_finite() || cond > 1e12 {
                return Err(Error::NotInvertible(name, cond));
            }
            let inv = m
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::NotInvertible(name.clone(), cond))?;
            let residual = (&inv * &m - DMatrix::identity(dim, dim)).amax();
            if residual > 1e-10 {
                return Err(Error::NotInvertible(name, cond));
            }
            images.push(m);
            images.push(inv);
        }
        let scaled = images.iter().map(ScaledMatrix::from_matrix).collect();
        Ok(Self {
            rank,
            dim,
            images,
            scaled,
        })
    }

    /// Builds from row-major nested arrays.
    pub fn from_rows(generators: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mats = generators
            .iter()
            .enumerate()
            .map(|(g, rows)| {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch(format!(
                        "generator {} is not square",
                        Letter::gen(g)
                    )));
                }
                Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, l: Letter) -> &DMatrix<f64> {
        &self.images[letter_index(l)]
    }

    pub fn generators(&self) -> Vec<DMatrix<f64>> {
        (0..self.rank).map(|g| self.images[2 * g].clone()).collect()
    }

    pub fn generator_rows(&self) -> Vec<Vec<Vec<f64>>> {
        self.generators()
            .iter()
            .map(|m| (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
            .collect()
    }

    pub fn scaled_image(&self, l: Letter) -> &ScaledMatrix {
        &self.scaled[letter_index(l)]
    }

    /// `max_s ‖ρ(s)‖·‖ρ(s)⁻¹‖` over the generators.
    pub fn max_condition(&self) -> f64 {
        self.images
            .iter()
            .map(condition_number)
            .fold(1.0, f64::max)
    }

    /// `ρ(w)` as a rescaled product, left to right.
    pub fn evaluate(&self, w: &ReducedWord) -> ScaledMatrix {
        w.letters()
            .iter()
            .fold(ScaledMatrix::identity(self.dim), |acc, &l| {
                acc.mul(self.scaled_image(l))
            })
    }

    /// `ρ(w)` as a plain product; overflows for long words.
    pub fn evaluate_dense(&self, w: &ReducedWord) -> DMatrix<f64> {
        w.letters()
            .iter()
            .fold(DMatrix::identity(self.dim, self.dim), |acc, &l| acc * self.image(l))
    }

    /// `g ρ g⁻¹`.
    pub fn conjugated(&self, g: &DMatrix<f64>) -> Result<Self> {
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NotInvertible("conjugator".into(), f64::INFINITY))?;
        Self::new(self.generators().iter().map(|m| g * m * &inv).collect())
    }

    /// The representation with generator `g` replaced by `m`.
    pub fn with_generator(&self, g: usize, m: DMatrix<f64>) -> Result<Self> {
        let mut gens = self.generators();
        gens[g] = m;
        Self::new(gens)
    }
}

/// A k-plane in R^d, stored as an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SubspaceRepr", try_from = "SubspaceRepr")]
pub struct Subspace {
    frame: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    dimension: usize,
    frame: Vec<Vec<f64>>,
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr {
            dimension: s.dim(),
            frame: (0..s.frame.nrows())
                .map(|r| s.frame.row(r).iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;
    fn try_from(r: SubspaceRepr) -> Result<Self> {
        let d = r.frame.len();
        if r.frame.iter().any(|row| row.len() != r.dimension) {
            return Err(Error::DimensionMismatch("ragged frame".into()));
        }
        Subspace::span(&DMatrix::from_fn(d, r.dimension, |i, j| r.frame[i][j]))
    }
}

impl Subspace {
    /// The column span of `m`, which must have full column rank.
    pub fn span(m: &DMatrix<f64>) -> Result<Self> {
        let k = m.ncols();
        if k == 0 {
            return Ok(Self { frame: m.clone() });
        }
        let svd = svd_sorted(m);
        if svd.sigma[k - 1] <= 1e-12 * svd.sigma[0].max(f64::MIN_POSITIVE) {
            return Err(Error::DimensionMismatch("spanning vectors are dependent".into()));
        }
        Ok(Self {
            frame: svd.u.columns(0, k).into_owned(),
        })
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let d = vectors.first().map_or(0, Vec::len);
        Self::span(&DMatrix::from_fn(d, vectors.len(), |i, j| vectors[j][i]))
    }

    /// The span of the given standard basis vectors (0-based).
    pub fn coordinate(d: usize, axes: &[usize]) -> Self {
        Self {
            frame: DMatrix::from_fn(d, axes.len(), |i, j| if i == axes[j] { 1.0 } else { 0.0 }),
        }
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == 0 {
            return Self::coordinate(d, &(0..d).collect::<Vec<_>>());
        }
        let p = DMatrix::identity(d, d) - self.projector();
        let svd = svd_sorted(&p);
        Subspace {
            frame: svd.u.columns(0, d - k).into_owned(),
        }
    }

    /// `m·V` for a plain matrix.
    pub fn transformed(&self, m: &DMatrix<f64>) -> Result<Subspace> {
        Subspace::span(&(m * &self.frame))
    }

    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        grassmann_distance(self, other).is_ok_and(|d| d < tol)
    }
}

/// Sine of the largest principal angle.
pub fn grassmann_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.dim() != w.dim() || v.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of dimension {} and {}",
            v.dim(),
            w.dim()
        )));
    }
    if v.dim() == 0 {
        return Ok(0.0);
    }
    let r = &v.frame - &w.frame * (w.frame.transpose() * &v.frame);
    Ok(op_norm(&r).clamp(0.0, 1.0))
}

/// Smallest singular value of `[frame_V | frame_W]`; zero iff V ⊕ W ≠ R^d.
pub fn transversality_gap(v: &Subspace, w: &Subspace) -> Result<f64> {
    let d = v.ambient_dim();
    if w.ambient_dim() != d || v.dim() + w.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "dimensions {} + {} do not add up to {d}",
            v.dim(),
            w.dim()
        )));
    }
    let m = DMatrix::from_fn(d, d, |i, j| {
        if j < v.dim() {
            v.frame[(i, j)]
        } else {
            w.frame[(i, j - v.dim())]
        }
    });
    Ok(*svd_sorted(&m).sigma.last().expect("d >= 1"))
}

/// Rotation of the plane by `theta`.
pub fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}
