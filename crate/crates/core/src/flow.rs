//! The unit-time shift over geodesics of P, the bundle cocycle, dominated
//! splittings, the graph transform and a perturbation probe.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domination::{certify, CertifyOptions, DominationCertificate, Verdict};
use crate::error::{Error, Result};
use crate::limit::LimitMapSolver;
use crate::linalg::{
    grassmann_distance, op_norm, svd_sorted, transversality_gap, Representation, ScaledMatrix, Subspace,
};
use crate::stats::LinearFit;
use crate::subset::SubsetP;
use crate::word::{geodesic_through, BiInfiniteGeodesic, BoundaryPoint, ReducedWord};

/// A point of the shift space: a geodesic of P through id, `l(0) = id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub forward: BoundaryPoint,
    pub backward: BoundaryPoint,
}

impl ShiftPoint {
    pub fn new(subset: &SubsetP, forward: BoundaryPoint, backward: BoundaryPoint) -> Result<Self> {
        if !subset.contains_pair(&forward, &backward) {
            return Err(Error::PairNotInSubset(forward.to_string(), backward.to_string()));
        }
        if forward.gromov_product(&backward) != Some(0) {
            return Err(Error::OriginOffGeodesic(String::new()));
        }
        Ok(Self { forward, backward })
    }

    /// Re-bases a geodesic so that its origin sits at id.
    pub fn from_geodesic(subset: &SubsetP, l: &BiInfiniteGeodesic) -> Result<Self> {
        let back = l.origin().inverse();
        Self::new(subset, l.forward.translate(&back), l.backward.translate(&back))
    }

    pub fn geodesic(&self) -> BiInfiniteGeodesic {
        geodesic_through(&self.forward, &self.backward, &ReducedWord::identity())
            .expect("shift points pass through id")
    }

    /// The time-one shift: move the origin one step forward and re-base.
    pub fn shift(&self) -> ShiftPoint {
        let s = ReducedWord::letter(self.forward.letter_at(0)).inverse();
        ShiftPoint {
            forward: self.forward.translate(&s),
            backward: self.backward.translate(&s),
        }
    }

    pub fn unshift(&self) -> ShiftPoint {
        let r = ReducedWord::letter(self.backward.letter_at(0)).inverse();
        ShiftPoint {
            forward: self.forward.translate(&r),
            backward: self.backward.translate(&r),
        }
    }

    pub fn shift_by(&self, n: i64) -> ShiftPoint {
        let mut q = self.clone();
        for _ in 0..n.unsigned_abs() {
            q = if n > 0 { q.shift() } else { q.unshift() };
        }
        q
    }

    pub fn forward_word(&self, n: usize) -> ReducedWord {
        self.forward.prefix(n)
    }
}

/// `A^{(n)}(q) = ρ(prefix(q⁺, n))⁻¹`, evaluated as a product of inverse generators.
pub fn cocycle(rho: &Representation, q: &ShiftPoint, n: usize) -> ScaledMatrix {
    rho.evaluate(&q.forward_word(n).inverse())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCurve {
    pub point: ShiftPoint,
    /// `ln σ_{d−k} − ln σ_{d−k+1}` of `A^{(n)}` for n = 1..N.
    pub curve: Vec<f64>,
    pub slope: f64,
}

/// Gap curves of the cocycle at each point.
pub fn anosov_margins(rho: &Representation, k: usize, horizon: usize, points: &[ShiftPoint]) -> Result<Vec<PointCurve>> {
    let d = rho.dim();
    if k == 0 || k >= d {
        return Err(Error::BadIndex { k, d });
    }
    let lo = horizon.div_ceil(2);
    Ok(points
        .par_iter()
        .map(|q| {
            let mut acc = ScaledMatrix::identity(d);
            let mut curve = Vec::with_capacity(horizon);
            for n in 1..=horizon {
                let l = q.forward.letter_at(n - 1).inv();
                acc = rho.scaled_image(l).mul(&acc);
                curve.push(acc.gap_margin(d - k));
            }
            let xs: Vec<f64> = (lo..=horizon).map(|t| t as f64).collect();
            let slope = LinearFit::fit(&xs, &curve[lo - 1..]).map_or(f64::NAN, |f| f.slope);
            PointCurve {
                point: q.clone(),
                curve,
                slope,
            }
        })
        .collect())
}

/// Shift points through the witnesses of every word of length `L` in Γ_P^+.
pub fn witness_points(subset: &SubsetP, budget: usize) -> Result<Vec<ShiftPoint>> {
    let sample = subset.gamma_p_plus(budget)?;
    let mut out: Vec<ShiftPoint> = sample
        .bucket(budget)
        .iter()
        .filter_map(|u| sample.witness(u))
        .map(|(x, y)| ShiftPoint { forward: x, backward: y })
        .collect();
    out.sort_by(|a, b| (&a.forward, &a.backward).cmp(&(&b.forward, &b.backward)));
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConsistency {
    pub word_slope: f64,
    pub word_stderr: f64,
    /// `min_q` of the cocycle gap at time n.
    pub uniform_curve: Vec<f64>,
    pub flow_slope: f64,
    pub flow_stderr: f64,
    pub tolerance: f64,
    pub agree: bool,
    pub points: usize,
    /// Smallest per-point slope; uniform domination needs it at least the word slope.
    pub min_point_slope: f64,
    pub word_verdict: Verdict,
}

/// Compares the word-side certificate slope with the slope of the uniform
/// flow-side gap curve over shift points through all words of length L.
pub fn flow_consistency(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    budget: usize,
    opts: &CertifyOptions,
) -> Result<FlowConsistency> {
    let cert = certify(rho, subset, k, budget, opts)?;
    let points = witness_points(subset, budget)?;
    let curves = anosov_margins(rho, k, budget, &points)?;
    let uniform: Vec<f64> = (0..budget)
        .map(|i| curves.iter().map(|c| c.curve[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let lo = budget.div_ceil(2);
    let xs: Vec<f64> = (lo..=budget).map(|t| t as f64).collect();
    let fit = LinearFit::fit(&xs, &uniform[lo - 1..]).ok_or(Error::BudgetTooSmall(budget))?;
    let tolerance = 2.0 * (cert.slope_stderr.powi(2) + fit.slope_stderr.powi(2)).sqrt() + 1e-9;
    let min_point_slope = curves.iter().map(|c| c.slope).fold(f64::INFINITY, f64::min);
    Ok(FlowConsistency {
        word_slope: cert.slope,
        word_stderr: cert.slope_stderr,
        uniform_curve: uniform,
        flow_slope: fit.slope,
        flow_stderr: fit.slope_stderr,
        tolerance,
        agree: (fit.slope - cert.slope).abs() <= tolerance,
        points: points.len(),
        min_point_slope,
        word_verdict: cert.verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingSample {
    pub point: ShiftPoint,
    /// `lim S_k(A^{(n)}(q))`, dimension k.
    pub stable: Subspace,
    /// `lim U_{d−k}(A^{(n)}(T^{−n} q))`, dimension d−k.
    pub unstable: Subspace,
    pub iterations: usize,
    pub stable_step: f64,
    pub unstable_step: f64,
}

/// The dominated splitting at `q` as limits of singular subspaces of the cocycle.
pub fn bg_splitting(rho: &Representation, q: &ShiftPoint, k: usize, horizon: usize, tol: f64) -> Result<SplittingSample> {
    let d = rho.dim();
    if k == 0 || k >= d {
        return Err(Error::BadIndex { k, d });
    }
    // A^{(n)}(q) = ρ(x_n)⁻¹ A^{(n−1)}(q); A^{(n)}(T^{−n} q) = ρ(prefix(q⁻, n)).
    let mut fwd = ScaledMatrix::identity(d);
    let mut bwd = ScaledMatrix::identity(d);
    let (mut s_prev, mut u_prev): (Option<Subspace>, Option<Subspace>) = (None, None);
    let (mut s_step, mut u_step) = (f64::INFINITY, f64::INFINITY);
    let cond = rho.max_condition();
    for n in 1..=horizon {
        fwd = rho.scaled_image(q.forward.letter_at(n - 1).inv()).mul(&fwd);
        bwd = bwd.mul(rho.scaled_image(q.backward.letter_at(n - 1)));
        let s = fwd.s_dk(d - k).ok();
        let u = bwd.u_k(d - k).ok();
        s_step = match (&s_prev, &s) {
            (Some(a), Some(b)) => grassmann_distance(a, b)?,
            _ => f64::INFINITY,
        };
        u_step = match (&u_prev, &u) {
            (Some(a), Some(b)) => grassmann_distance(a, b)?,
            _ => f64::INFINITY,
        };
        // Successive steps can vanish before the tail is reached, e.g. along powers
        // of a symmetric generator; also require the gap bound K·e^{−margin}.
        let bound = cond * (-fwd.gap_margin(d - k).min(bwd.gap_margin(d - k))).exp();
        if s_step < tol && u_step < tol && bound < tol {
            return Ok(SplittingSample {
                point: q.clone(),
                stable: s.expect("step is finite"),
                unstable: u.expect("step is finite"),
                iterations: n,
                stable_step: s_step,
                unstable_step: u_step,
            });
        }
        s_prev = s;
        u_prev = u;
    }
    Err(Error::NoConvergence {
        point: format!("{} / {}", q.forward, q.backward),
        iterations: horizon,
        last_step: s_step.max(u_step),
        bound: f64::NAN,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub invariance_stable: f64,
    pub invariance_unstable: f64,
    /// `ln max ‖A^{(n)}v‖/‖A^{(n)}w‖` over unit `v ∈ E^s`, `w ∈ E^u`, n = 1..N.
    pub domination_curve: Vec<f64>,
    pub domination_slope: f64,
    pub endpoint_stable: f64,
    pub endpoint_unstable: f64,
    pub transversality: f64,
    pub pass: bool,
}

/// Residual checks of a splitting sample against its own shift, the restricted
/// cocycle, and the limit maps at the endpoints.
pub fn splitting_checks(
    rho: &Representation,
    sample: &SplittingSample,
    upper: &LimitMapSolver,
    lower: &LimitMapSolver,
    horizon: usize,
    domination_steps: usize,
    tol: f64,
) -> Result<SplittingReport> {
    let d = rho.dim();
    let k = sample.stable.dim();
    let q = &sample.point;
    let one = cocycle(rho, q, 1).to_dense();
    let next = bg_splitting(rho, &q.shift(), k, horizon, tol * 1e-3)?;
    let invariance_stable = grassmann_distance(&sample.stable.transformed(&one)?, &next.stable)?;
    let invariance_unstable = grassmann_distance(&sample.unstable.transformed(&one)?, &next.unstable)?;

    let mut orbit = vec![SplittingSample {
        stable: sample.stable.clone(),
        unstable: sample.unstable.clone(),
        ..next.clone()
    }];
    orbit[0].point = q.clone();
    orbit.push(next);
    while orbit.len() <= domination_steps {
        let p = orbit.last().expect("nonempty").point.shift();
        orbit.push(bg_splitting(rho, &p, k, horizon, tol * 1e-3)?);
    }
    let mut ps = ScaledMatrix::identity(k);
    let mut pu = ScaledMatrix::identity(d - k);
    let mut domination_curve = Vec::with_capacity(domination_steps);
    for j in 0..domination_steps {
        let a = cocycle(rho, &orbit[j].point, 1).to_dense();
        let bs = orbit[j + 1].stable.frame().transpose() * &a * orbit[j].stable.frame();
        let bu = orbit[j + 1].unstable.frame().transpose() * &a * orbit[j].unstable.frame();
        ps = ScaledMatrix::from_matrix(&bs).mul(&ps);
        pu = ScaledMatrix::from_matrix(&bu).mul(&pu);
        let s = ps.singular_values();
        let u = pu.singular_values();
        domination_curve.push(s[0] - u[u.len() - 1]);
    }
    let xs: Vec<f64> = (1..=domination_steps).map(|t| t as f64).collect();
    let domination_slope = LinearFit::fit(&xs, &domination_curve).map_or(f64::NAN, |f| f.slope);

    let endpoint_stable = grassmann_distance(&sample.stable, &upper.xi(&q.forward)?.subspace)?;
    let endpoint_unstable = grassmann_distance(&sample.unstable, &lower.xi(&q.backward)?.subspace)?;
    let transversality = transversality_gap(&sample.stable, &sample.unstable)?;
    let pass = invariance_stable < tol
        && invariance_unstable < tol
        && domination_slope < 0.0
        && endpoint_stable < tol
        && endpoint_unstable < tol
        && transversality > 0.0;
    Ok(SplittingReport {
        invariance_stable,
        invariance_unstable,
        domination_curve,
        domination_slope,
        endpoint_stable,
        endpoint_unstable,
        transversality,
        pass,
    })
}

/// The blocks of a linear map in coordinates `R^k ⊕ R^{d−k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub psi11: DMatrix<f64>,
    pub psi12: DMatrix<f64>,
    pub psi21: DMatrix<f64>,
    pub psi22: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisNorms {
    /// `‖ψ11‖·‖ψ22⁻¹‖`
    pub contraction: f64,
    /// `‖ψ11⁻¹ψ12‖`
    pub upper_coupling: f64,
    /// `‖ψ22⁻¹ψ21‖`
    pub lower_coupling: f64,
}

impl HypothesisNorms {
    pub fn hold(&self) -> bool {
        let third = 1.0 / 3.0 + 1e-12;
        self.contraction <= third && self.upper_coupling <= third && self.lower_coupling <= third
    }
}

fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let s = svd_sorted(m).sigma;
    if s[s.len() - 1] <= 1e-14 * s[0].max(f64::MIN_POSITIVE) {
        return Err(Error::SingularBlock);
    }
    m.clone().try_inverse().ok_or(Error::SingularBlock)
}

impl BlockSystem {
    pub fn from_matrix(m: &DMatrix<f64>, k: usize) -> Self {
        let d = m.nrows();
        BlockSystem {
            psi11: m.view((0, 0), (k, k)).into_owned(),
            psi12: m.view((0, k), (k, d - k)).into_owned(),
            psi21: m.view((k, 0), (d - k, k)).into_owned(),
            psi22: m.view((k, k), (d - k, d - k)).into_owned(),
        }
    }

    pub fn k(&self) -> usize {
        self.psi11.nrows()
    }

    pub fn hypotheses(&self) -> Result<HypothesisNorms> {
        let i11 = checked_inverse(&self.psi11)?;
        let i22 = checked_inverse(&self.psi22)?;
        Ok(HypothesisNorms {
            contraction: op_norm(&self.psi11) * op_norm(&i22),
            upper_coupling: op_norm(&(&i11 * &self.psi12)),
            lower_coupling: op_norm(&(&i22 * &self.psi21)),
        })
    }
}

/// `Ψ(f) = (ψ11 f + ψ12)(ψ21 f + ψ22)⁻¹` for `f: R^{d−k} → R^k`.
pub fn graph_transform(blocks: &BlockSystem, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let denom = &blocks.psi21 * f + &blocks.psi22;
    let inv = checked_inverse(&denom)?;
    Ok((&blocks.psi11 * f + &blocks.psi12) * inv)
}

/// `‖Ψ(f1) − Ψ(f2)‖ / ‖f1 − f2‖` in operator norm.
pub fn contraction_ratio(blocks: &BlockSystem, f1: &DMatrix<f64>, f2: &DMatrix<f64>) -> Result<f64> {
    let num = op_norm(&(graph_transform(blocks, f1)? - graph_transform(blocks, f2)?));
    Ok(num / op_norm(&(f1 - f2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSection {
    /// `f_j` at each orbit point, row-major.
    pub sections: Vec<Vec<Vec<f64>>>,
    pub iterations: usize,
    /// `max_j ‖Ψ_j(f_j) − f_{j+1}‖`.
    pub residual: f64,
    pub hypotheses: Vec<HypothesisNorms>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// Fixed point of the graph transform composed around a periodic orbit; block
/// `j` maps the fibre over orbit point `j` to the fibre over `j+1 (mod p)`.
pub fn invariant_section(orbit: &[BlockSystem], tol: f64, max_iter: usize) -> Result<InvariantSection> {
    if orbit.is_empty() {
        return Err(Error::EmptySubset("empty orbit".into()));
    }
    let mut hypotheses = Vec::with_capacity(orbit.len());
    for (index, b) in orbit.iter().enumerate() {
        let h = b.hypotheses().map_err(|_| Error::HypothesesFail {
            index,
            detail: "diagonal block is singular".into(),
        })?;
        if !h.hold() {
            return Err(Error::HypothesesFail {
                index,
                detail: format!(
                    "‖ψ11‖‖ψ22⁻¹‖ = {:.4}, ‖ψ11⁻¹ψ12‖ = {:.4}, ‖ψ22⁻¹ψ21‖ = {:.4} (need ≤ 1/3)",
                    h.contraction, h.upper_coupling, h.lower_coupling
                ),
            });
        }
        hypotheses.push(h);
    }
    let k = orbit[0].k();
    let dk = orbit[0].psi22.nrows();
    let p = orbit.len();
    let mut sections = vec![DMatrix::zeros(k, dk); p];
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let mut g = sections[0].clone();
        let mut next = Vec::with_capacity(p);
        next.push(g.clone());
        for (j, b) in orbit.iter().enumerate() {
            g = graph_transform(b, &g)?;
            if j + 1 < p {
                next.push(g.clone());
            }
        }
        change = (&g - &sections[0]).norm();
        next[0] = g;
        sections = next;
        if change <= tol * 1e-3 {
            break;
        }
    }
    let mut residual: f64 = 0.0;
    for (j, b) in orbit.iter().enumerate() {
        let image = graph_transform(b, &sections[j])?;
        residual = residual.max((image - &sections[(j + 1) % p]).norm());
    }
    if residual >= tol {
        return Err(Error::NoConvergence {
            point: "graph transform orbit".into(),
            iterations,
            last_step: change,
            bound: residual,
        });
    }
    Ok(InvariantSection {
        sections: sections.iter().map(rows).collect(),
        iterations,
        residual,
        hypotheses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrial {
    pub index: usize,
    pub verdict: Option<Verdict>,
    pub slope: f64,
    pub min_margin: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTable {
    pub epsilon: f64,
    pub seed: u64,
    pub base_slope: f64,
    pub trials: Vec<StabilityTrial>,
    pub certified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    /// Margins of the trial with the smallest fitted slope.
    pub worst_margins: Vec<Option<f64>>,
}

/// Generator images perturbed entry-wise by uniforms in `[−ε, ε]`, drawn from
/// stream `trial` of the seed.
pub fn perturb(rho: &Representation, epsilon: f64, seed: u64, trial: u64) -> Result<Representation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let gens = rho
        .generators()
        .into_iter()
        .map(|m| {
            m.map(|x| {
                if epsilon > 0.0 {
                    x + rng.random_range(-epsilon..=epsilon)
                } else {
                    x
                }
            })
        })
        .collect();
    Representation::new(gens)
}

/// Re-certifies randomly perturbed copies of a certified representation.
#[allow(clippy::too_many_arguments)]
pub fn stability_probe(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    epsilon: f64,
    trials: usize,
    budget: usize,
    seed: u64,
    opts: &CertifyOptions,
) -> Result<StabilityTable> {
    let base = certify(rho, subset, k, budget, opts)?;
    if !base.is_certified() {
        return Err(Error::NotCertified {
            k,
            verdict: base.verdict.to_string(),
        });
    }
    let results: Vec<(StabilityTrial, Option<DominationCertificate>)> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let outcome = perturb(rho, epsilon, seed, index as u64)
                .and_then(|r| certify(&r, subset, k, budget, opts));
            match outcome {
                Ok(c) => {
                    let min_margin = c.margins.iter().flatten().copied().fold(f64::INFINITY, f64::min);
                    (
                        StabilityTrial {
                            index,
                            verdict: Some(c.verdict),
                            slope: c.slope,
                            min_margin,
                            error: None,
                        },
                        Some(c),
                    )
                }
                Err(e) => (
                    StabilityTrial {
                        index,
                        verdict: None,
                        slope: f64::NAN,
                        min_margin: f64::NAN,
                        error: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();
    let count = |v: Verdict| results.iter().filter(|(t, _)| t.verdict == Some(v)).count();
    let worst = results
        .iter()
        .filter_map(|(_, c)| c.as_ref())
        .min_by(|a, b| a.slope.total_cmp(&b.slope))
        .map(|c| c.margins.clone())
        .unwrap_or_default();
    Ok(StabilityTable {
        epsilon,
        seed,
        base_slope: base.slope,
        certified: count(Verdict::Certified),
        refuted: count(Verdict::Refuted),
        inconclusive: trials - count(Verdict::Certified) - count(Verdict::Refuted),
        trials: results.into_iter().map(|(t, _)| t).collect(),
        worst_margins: worst,
    })
}
