//! Limit maps ξ^k and ξ_{d−k} at eventually periodic boundary points, with
//! transversality, dynamics-preserving, Cartan and Hölder checks.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domination::{certify, CertifyOptions, DominationCertificate};
use crate::error::{Error, Result};
use crate::linalg::{grassmann_distance, transversality_gap, Representation, ScaledMatrix, Subspace};
use crate::stats::LinearFit;
use crate::subset::SubsetP;
use crate::word::{BoundaryPoint, Letter, ReducedWord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitOptions {
    /// Stop when successive Grassmannian steps fall below this.
    pub tol: f64,
    pub n_max: usize,
    /// Word-length budget of the on-demand domination certificate.
    pub budget: usize,
    pub certify: CertifyOptions,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            n_max: 400,
            budget: 10,
            certify: CertifyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitMapValue {
    pub point: BoundaryPoint,
    pub subspace: Subspace,
    pub iterations: usize,
    pub last_step: f64,
    /// Certified bound on the distance from the returned plane to the limit.
    pub cauchy_bound: f64,
    /// Distance from id to the nearest geodesic of P ending at the point.
    pub offset: usize,
    /// Whether every successive step obeyed the per-step certificate bound.
    pub steps_within_rate: bool,
}

/// Computes ξ^k on `Q^{+∞}` of one subset, reusing a single certificate.
#[derive(Debug, Clone)]
pub struct LimitMapSolver<'a> {
    rho: &'a Representation,
    subset: SubsetP,
    k: usize,
    certificate: DominationCertificate,
    opts: LimitOptions,
    max_condition: f64,
}

impl<'a> LimitMapSolver<'a> {
    pub fn new(rho: &'a Representation, subset: &SubsetP, k: usize, opts: &LimitOptions) -> Result<Self> {
        let certificate = certify(rho, subset, k, opts.budget, &opts.certify)?;
        Self::with_certificate(rho, subset, certificate, opts)
    }

    pub fn with_certificate(
        rho: &'a Representation,
        subset: &SubsetP,
        certificate: DominationCertificate,
        opts: &LimitOptions,
    ) -> Result<Self> {
        if !certificate.is_certified() {
            return Err(Error::NotCertified {
                k: certificate.k,
                verdict: certificate.verdict.to_string(),
            });
        }
        Ok(Self {
            rho,
            subset: subset.clone(),
            k: certificate.k,
            certificate,
            opts: *opts,
            max_condition: rho.max_condition(),
        })
    }

    /// The solver for ξ_{d−k}: the same computation for P̂ and index d−k.
    pub fn dual(&self) -> Result<LimitMapSolver<'a>> {
        LimitMapSolver::new(self.rho, &self.subset.hat(), self.rho.dim() - self.k, &self.opts)
    }

    pub fn certificate(&self) -> &DominationCertificate {
        &self.certificate
    }

    pub fn subset(&self) -> &SubsetP {
        &self.subset
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn representation(&self) -> &Representation {
        self.rho
    }

    /// Certificate bound for `d(U_k(ρ(v z_m)), U_k(ρ(v z_{m+1})))`, `κ_v = ‖ρ(v)‖‖ρ(v)⁻¹‖`.
    fn step_bound(&self, log_kappa_v: f64, m: usize) -> f64 {
        let (log_c, lambda) = self.certificate.constants();
        (self.max_condition.ln() + log_kappa_v + log_c - lambda * m as f64).exp()
    }

    /// `ξ^k(x) = lim U_k(ρ(prefix(x, n)))`.
    pub fn xi(&self, x: &BoundaryPoint) -> Result<LimitMapValue> {
        let offset = self
            .subset
            .forward_offset(x)
            .ok_or_else(|| Error::NotInLimitSet(x.to_string()))?;
        let v = x.prefix(offset);
        let sv = self.rho.evaluate(&v).singular_values();
        let log_kappa_v = sv[0] - sv[sv.len() - 1];
        let lambda = self.certificate.slope;
        let tail_factor = 1.0 / (1.0 - (-lambda).exp());
        let tol = self.opts.tol;

        let mut acc = self.rho.evaluate(&v);
        let mut prev: Option<Subspace> = None;
        let mut last_step = f64::INFINITY;
        let mut bound = f64::INFINITY;
        let mut within_rate = true;
        let mut last_gap_ok = offset > 0 && acc.u_k(self.k).is_ok();
        for n in offset + 1..=offset + self.opts.n_max {
            acc = acc.mul(self.rho.scaled_image(x.letter_at(n - 1)));
            let m = n - offset;
            match acc.u_k(self.k) {
                Err(Error::NoGap { .. }) => {
                    prev = None;
                    last_gap_ok = false;
                    continue;
                }
                Err(e) => return Err(e),
                Ok(u) => {
                    last_gap_ok = true;
                    if let Some(p) = &prev {
                        last_step = grassmann_distance(p, &u)?;
                        if m >= 2 {
                            let allowed = self.step_bound(log_kappa_v, m - 1);
                            if last_step > allowed * (1.0 + 1e-6) + 1e-13 {
                                within_rate = false;
                            }
                        }
                    }
                    bound = self.step_bound(log_kappa_v, m) * tail_factor;
                    if last_step < tol && bound <= 10.0 * tol {
                        return Ok(LimitMapValue {
                            point: x.clone(),
                            subspace: u,
                            iterations: m,
                            last_step,
                            cauchy_bound: bound,
                            offset,
                            steps_within_rate: within_rate,
                        });
                    }
                    prev = Some(u);
                }
            }
        }
        if !last_gap_ok {
            return Err(Error::NoGap {
                k: self.k,
                word: x.prefix(offset + self.opts.n_max).to_string(),
            });
        }
        Err(Error::NoConvergence {
            point: x.to_string(),
            iterations: self.opts.n_max,
            last_step,
            bound,
        })
    }
}

/// `ξ^k(x)` for P.
pub fn xi_upper(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    x: &BoundaryPoint,
    opts: &LimitOptions,
) -> Result<LimitMapValue> {
    LimitMapSolver::new(rho, subset, k, opts)?.xi(x)
}

/// `ξ_{d−k}(y) = ξ^{d−k}_{P̂}(y)`.
pub fn xi_lower(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    y: &BoundaryPoint,
    opts: &LimitOptions,
) -> Result<LimitMapValue> {
    xi_upper(rho, &subset.hat(), rho.dim() - k, y, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityRow {
    pub forward: BoundaryPoint,
    pub backward: BoundaryPoint,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityTable {
    pub rows: Vec<TransversalityRow>,
    pub minimum: f64,
}

/// `transversality_gap(ξ^k(x), ξ_{d−k}(y))` for each pair `(x, y) ∈ P`.
pub fn transversality_table(
    upper: &LimitMapSolver,
    lower: &LimitMapSolver,
    pairs: &[(BoundaryPoint, BoundaryPoint)],
) -> Result<TransversalityTable> {
    let rows = pairs
        .par_iter()
        .map(|(x, y)| {
            if !upper.subset().contains_pair(x, y) {
                return Err(Error::PairNotInSubset(x.to_string(), y.to_string()));
            }
            let gap = transversality_gap(&upper.xi(x)?.subspace, &lower.xi(y)?.subspace)?;
            Ok(TransversalityRow {
                forward: x.clone(),
                backward: y.clone(),
                gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let minimum = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    Ok(TransversalityTable { rows, minimum })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub words: Vec<ReducedWord>,
    pub distances: Vec<f64>,
    pub final_value: f64,
    pub monotone_tail: bool,
    pub pass: bool,
}

impl ConvergenceCurve {
    fn new(words: Vec<ReducedWord>, distances: Vec<f64>, tol: f64) -> Self {
        let final_value = distances.last().copied().unwrap_or(f64::INFINITY);
        let tail = &distances[distances.len() / 2..];
        let noise = 1e-10f64.max(tol);
        let monotone_tail = tail.windows(2).all(|w| w[1] <= w[0] + noise);
        ConvergenceCurve {
            words,
            distances,
            final_value,
            monotone_tail,
            pass: final_value < tol && monotone_tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpResult {
    pub seed_transversality: f64,
    pub curve: ConvergenceCurve,
}

/// Distances `d(ρ(γ_n)·V, ξ^k(x))` along a schedule; by default the prefixes of
/// the geodesic from `y` to `x` beyond its point nearest to id.
pub fn sdp_check(
    upper: &LimitMapSolver,
    lower: &LimitMapSolver,
    x: &BoundaryPoint,
    y: &BoundaryPoint,
    seed: &Subspace,
    schedule: Option<Vec<ReducedWord>>,
    steps: usize,
    tol: f64,
) -> Result<SdpResult> {
    if !upper.subset().contains_pair(x, y) {
        return Err(Error::PairNotInSubset(x.to_string(), y.to_string()));
    }
    let w = lower.xi(y)?.subspace;
    let gap = transversality_gap(seed, &w)?;
    if gap < 1e-8 {
        return Err(Error::NonTransverseSeed(gap));
    }
    let target = upper.xi(x)?.subspace;
    let schedule = schedule.unwrap_or_else(|| {
        let c = x.gromov_product(y).expect("distinct");
        (1..=steps).map(|j| x.prefix(c + j)).collect()
    });
    let rho = upper.representation();
    let distances = schedule
        .iter()
        .map(|g| grassmann_distance(&rho.evaluate(g).apply(seed), &target))
        .collect::<Result<Vec<_>>>()?;
    Ok(SdpResult {
        seed_transversality: gap,
        curve: ConvergenceCurve::new(schedule, distances, tol),
    })
}

/// Distances `d(U_k(ρ(γ_n)), ξ^k(x))` for words verified to lie in
/// `Γ^+_{P,(1,0,b)}`.
pub fn cartan_check(
    solver: &LimitMapSolver,
    x: &BoundaryPoint,
    words: &[ReducedWord],
    b: usize,
    tol: f64,
) -> Result<ConvergenceCurve> {
    if let Some(bad) = words
        .iter()
        .find(|g| !solver.subset().in_extended_positive(g, b))
    {
        return Err(Error::MembershipUnverified(bad.to_string(), b));
    }
    let target = solver.xi(x)?.subspace;
    let rho = solver.representation();
    let distances = words
        .iter()
        .map(|g| {
            let u = rho.evaluate(g).u_k(solver.k()).map_err(|e| match e {
                Error::NoGap { k, .. } => Error::NoGap { k, word: g.to_string() },
                e => e,
            })?;
            grassmann_distance(&u, &target)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceCurve::new(words.to_vec(), distances, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSample {
    pub x: BoundaryPoint,
    pub y: BoundaryPoint,
    pub visual_distance: f64,
    pub grassmann_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Fitted exponent α̂.
    pub alpha: f64,
    /// Fitted log Ĉ in `d(ξ(x), ξ(y)) ≈ Ĉ d_κ(x, y)^α̂`.
    pub log_c: f64,
    pub r_squared: f64,
    pub eligible_pairs: usize,
    pub pairs_used: usize,
    pub seed: u64,
    pub samples: Vec<HolderSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolderOptions {
    pub max_period: usize,
    pub b: usize,
    pub kappa: f64,
    pub sample_size: usize,
    /// Pairs farther apart than this visual distance are left out of the fit.
    pub cutoff: f64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            max_period: 8,
            b: 0,
            kappa: 1.0,
            sample_size: 200,
            cutoff: (-2.0f64).exp(),
        }
    }
}

const MIN_HOLDER_PAIRS: usize = 10;

/// Log-log regression of `d(ξ^k(x), ξ^k(y))` against `d_κ(x, y)` over sampled
/// pairs of `Q^{+∞}_{P,(1,0,b)}` at small visual distance.
pub fn holder_estimate(solver: &LimitMapSolver, opts: &HolderOptions, seed: u64) -> Result<HolderFit> {
    let points: Vec<BoundaryPoint> = solver
        .subset()
        .q_plus_boundary(opts.max_period, opts.b)
        .into_iter()
        .collect();
    let mut eligible = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].visual_distance(&points[j], opts.kappa);
            if d > 0.0 && d <= opts.cutoff {
                eligible.push((i, j, d));
            }
        }
    }
    if eligible.len() < MIN_HOLDER_PAIRS {
        return Err(Error::InsufficientSample(eligible.len(), MIN_HOLDER_PAIRS));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = opts.sample_size.min(eligible.len());
    let mut chosen: Vec<usize> = sample(&mut rng, eligible.len(), amount).into_vec();
    chosen.sort_unstable();
    let mut needed: Vec<usize> = chosen
        .iter()
        .flat_map(|&c| [eligible[c].0, eligible[c].1])
        .collect();
    needed.sort_unstable();
    needed.dedup();
    let values: BTreeMap<usize, Subspace> = needed
        .par_iter()
        .map(|&i| solver.xi(&points[i]).map(|v| (i, v.subspace)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let mut samples = Vec::with_capacity(amount);
    for &c in &chosen {
        let (i, j, d) = eligible[c];
        let g = grassmann_distance(&values[&i], &values[&j])?;
        samples.push(HolderSample {
            x: points[i].clone(),
            y: points[j].clone(),
            visual_distance: d,
            grassmann_distance: g,
        });
    }
    let usable: Vec<&HolderSample> = samples.iter().filter(|s| s.grassmann_distance > 0.0).collect();
    if usable.len() < MIN_HOLDER_PAIRS {
        return Err(Error::InsufficientSample(usable.len(), MIN_HOLDER_PAIRS));
    }
    let xs: Vec<f64> = usable.iter().map(|s| s.visual_distance.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|s| s.grassmann_distance.ln()).collect();
    let fit = LinearFit::fit(&xs, &ys)
        .ok_or(Error::InsufficientSample(usable.len(), MIN_HOLDER_PAIRS))?;
    Ok(HolderFit {
        alpha: fit.slope,
        log_c: fit.intercept,
        r_squared: fit.r_squared,
        eligible_pairs: eligible.len(),
        pairs_used: usable.len(),
        seed,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityRow {
    pub m: usize,
    pub point: BoundaryPoint,
    pub visual_distance: f64,
    pub grassmann_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityProbe {
    pub axis_point: BoundaryPoint,
    pub axis_value: Subspace,
    pub rows: Vec<DiscontinuityRow>,
    /// Whether the visual distances decrease to below e^{-κ m_max}.
    pub distances_vanish: bool,
    pub min_grassmann: f64,
    /// Visual distances tend to 0 while the limit-map distances stay above 1/2.
    pub discontinuous: bool,
}

/// Compares `ξ^1(a^m b · a^∞)` with `ξ^1(a^∞)` for P the orbit of the axis of `a`.
pub fn discontinuity_probe(
    rho: &Representation,
    m_max: usize,
    kappa: f64,
    opts: &LimitOptions,
) -> Result<DiscontinuityProbe> {
    if rho.rank() < 2 {
        return Err(Error::RankTooSmall(rho.rank()));
    }
    let a = ReducedWord::letter(Letter::gen(0));
    let b = Letter::gen(1);
    let subset = SubsetP::axis_family(rho.rank(), std::slice::from_ref(&a))?;
    let solver = LimitMapSolver::new(rho, &subset, 1, opts)?;
    let axis_point = BoundaryPoint::periodic(&a)?;
    let axis_value = solver.xi(&axis_point)?.subspace;
    let mut rows = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let point = BoundaryPoint::from_limit(&a.pow(m).push(b), &a)?;
        let value = solver.xi(&point)?.subspace;
        rows.push(DiscontinuityRow {
            m,
            visual_distance: point.visual_distance(&axis_point, kappa),
            grassmann_distance: grassmann_distance(&value, &axis_value)?,
            point,
        });
    }
    let distances_vanish = rows.windows(2).all(|w| w[1].visual_distance < w[0].visual_distance)
        && rows
            .last()
            .is_some_and(|r| r.visual_distance <= (-kappa * m_max as f64).exp() * (1.0 + 1e-12));
    let min_grassmann = rows
        .iter()
        .map(|r| r.grassmann_distance)
        .fold(f64::INFINITY, f64::min);
    Ok(DiscontinuityProbe {
        axis_point,
        axis_value,
        rows,
        distances_vanish,
        min_grassmann,
        discontinuous: distances_vanish && min_grassmann > 0.5,
    })
}

/// `ρ(g)·V` for a word `g`.
pub fn act(rho: &Representation, g: &ReducedWord, v: &Subspace) -> Subspace {
    rho.evaluate(g).apply(v)
}

/// `ξ^k` evaluated directly from a long word, without the certificate.
pub fn u_k_of_word(rho: &Representation, w: &ReducedWord, k: usize) -> Result<Subspace> {
    let m: ScaledMatrix = rho.evaluate(w);
    m.u_k(k).map_err(|e| match e {
        Error::NoGap { k, .. } => Error::NoGap { k, word: w.to_string() },
        e => e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::FRAC_PI_4;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn p(s: &str) -> BoundaryPoint {
        s.parse().unwrap()
    }

    fn example_56() -> Representation {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        Representation::new(vec![diag(&[2.0, 0.5]), b]).unwrap()
    }

    fn schottky() -> Representation {
        let a = diag(&[5.0, 0.2]);
        let r = rotation2(FRAC_PI_4);
        let b = &r * &a * r.transpose();
        Representation::new(vec![a, b]).unwrap()
    }

    fn axis_a(rank: usize) -> SubsetP {
        SubsetP::axis_family(rank, &[w("a")]).unwrap()
    }

    #[test]
    fn example_56_limit_values() {
        let rho = example_56();
        let opts = LimitOptions::default();
        let solver = LimitMapSolver::new(&rho, &axis_a(2), 1, &opts).unwrap();
        let e1 = Subspace::coordinate(2, &[0]);
        let e2 = Subspace::coordinate(2, &[1]);
        let at_axis = solver.xi(&p("(a)")).unwrap();
        assert!(grassmann_distance(&at_axis.subspace, &e1).unwrap() < 1e-12);
        for m in 1..=5 {
            let x = BoundaryPoint::from_limit(&w("a").pow(m).push(Letter::gen(1)), &w("a")).unwrap();
            let v = solver.xi(&x).unwrap();
            assert!(grassmann_distance(&v.subspace, &e2).unwrap() < 1e-10, "m={m}");
            assert_eq!(v.offset, m + 1);
            assert!(v.steps_within_rate);
        }
    }

    #[test]
    fn lower_map_examples() {
        let rho = example_56();
        let opts = LimitOptions::default();
        let y = xi_lower(&rho, &axis_a(2), 1, &p("(A)"), &opts).unwrap();
        assert!(grassmann_distance(&y.subspace, &Subspace::coordinate(2, &[1])).unwrap() < 1e-12);
        let z = Representation::new(vec![diag(&[4.0, 0.5, 0.5])]).unwrap();
        let y = xi_lower(&z, &axis_a(1), 1, &p("(A)"), &opts).unwrap();
        assert_eq!(y.subspace.dim(), 2);
        assert!(grassmann_distance(&y.subspace, &Subspace::coordinate(3, &[1, 2])).unwrap() < 1e-12);
        assert!(matches!(
            xi_lower(&rho, &axis_a(2), 1, &p("(a)"), &opts),
            Err(Error::NotInLimitSet(_))
        ));
    }

    #[test]
    fn transversality_examples() {
        let rho = example_56();
        let opts = LimitOptions::default();
        let up = LimitMapSolver::new(&rho, &axis_a(2), 1, &opts).unwrap();
        let low = up.dual().unwrap();
        let t = transversality_table(&up, &low, &[(p("(a)"), p("(A)"))]).unwrap();
        assert!((t.minimum - 1.0).abs() < 1e-12);
        let z = Representation::new(vec![diag(&[4.0, 0.5, 0.5])]).unwrap();
        let up = LimitMapSolver::new(&z, &axis_a(1), 1, &opts).unwrap();
        let low = up.dual().unwrap();
        let t = transversality_table(&up, &low, &[(p("(a)"), p("(A)"))]).unwrap();
        assert!((t.minimum - 1.0).abs() < 1e-12);
        assert!(matches!(
            transversality_table(&up, &low, &[(p("(A)"), p("(a)"))]),
            Err(Error::PairNotInSubset(..))
        ));
    }

    #[test]
    fn sdp_examples() {
        let opts = LimitOptions::default();
        let z = Representation::new(vec![diag(&[4.0, 0.5, 0.5])]).unwrap();
        let up = LimitMapSolver::new(&z, &axis_a(1), 1, &opts).unwrap();
        let low = up.dual().unwrap();
        let seed = Subspace::from_vectors(&[vec![1.0, 1.0, 0.0]]).unwrap();
        let r = sdp_check(&up, &low, &p("(a)"), &p("(A)"), &seed, None, 20, 1e-10).unwrap();
        assert!(r.curve.pass);
        for (n, d) in r.curve.distances.iter().enumerate().take(10) {
            let exact = 1.0 / (1.0 + 64f64.powi(n as i32 + 1)).sqrt();
            assert!((d - exact).abs() < 1e-12 * exact.max(1e-4), "n={n} {d} {exact}");
        }
        let bad = Subspace::coordinate(3, &[1]);
        assert!(matches!(
            sdp_check(&up, &low, &p("(a)"), &p("(A)"), &bad, None, 20, 1e-10),
            Err(Error::NonTransverseSeed(_))
        ));
        let rho = example_56();
        let up = LimitMapSolver::new(&rho, &axis_a(2), 1, &opts).unwrap();
        let low = up.dual().unwrap();
        let seed = Subspace::from_vectors(&[vec![1.0, 1.0]]).unwrap();
        let r = sdp_check(&up, &low, &p("(a)"), &p("(A)"), &seed, None, 30, 1e-10).unwrap();
        assert!(r.curve.pass);
    }

    #[test]
    fn cartan_examples() {
        let opts = LimitOptions::default();
        let rho = example_56();
        let solver = LimitMapSolver::new(&rho, &axis_a(2), 1, &opts).unwrap();
        let words: Vec<ReducedWord> = (1..10).map(|n| w("a").pow(n)).collect();
        let c = cartan_check(&solver, &p("(a)"), &words, 0, 1e-10).unwrap();
        assert!(c.distances.iter().all(|&d| d < 1e-14));
        let drift: Vec<ReducedWord> = (1..10).map(|n| w("a").pow(n).push(Letter::gen(1))).collect();
        assert!(matches!(
            cartan_check(&solver, &p("(a)"), &drift, 3, 1e-10),
            Err(Error::MembershipUnverified(..))
        ));
        let rho = schottky();
        let solver = LimitMapSolver::new(&rho, &SubsetP::full(2), 1, &opts).unwrap();
        let x = p("(aB)");
        let words: Vec<ReducedWord> = (1..=24).map(|n| x.prefix(n)).collect();
        let c = cartan_check(&solver, &x, &words, 0, 1e-10).unwrap();
        assert!(c.pass);
        assert!(c.distances[0] > c.distances[10]);
    }

    #[test]
    fn holder_refusals() {
        let opts = LimitOptions::default();
        let z = Representation::new(vec![diag(&[4.0, 0.5, 0.5])]).unwrap();
        let solver = LimitMapSolver::new(&z, &axis_a(1), 1, &opts).unwrap();
        assert!(matches!(
            holder_estimate(&solver, &HolderOptions::default(), 1),
            Err(Error::InsufficientSample(0, _))
        ));
        let rho = schottky();
        let dir = SubsetP::directed(2, &[Letter::gen(0), Letter::gen(1)]).unwrap();
        let solver = LimitMapSolver::new(&rho, &dir, 1, &opts).unwrap();
        let period_one = HolderOptions {
            max_period: 1,
            ..HolderOptions::default()
        };
        assert!(matches!(
            holder_estimate(&solver, &period_one, 1),
            Err(Error::InsufficientSample(..))
        ));
    }

    #[test]
    fn discontinuity_examples() {
        let opts = LimitOptions::default();
        let probe = discontinuity_probe(&example_56(), 10, 1.0, &opts).unwrap();
        assert!(probe.discontinuous);
        let r3 = &probe.rows[2];
        assert!((r3.visual_distance - (-3.0f64).exp()).abs() < 1e-15);
        assert!((r3.grassmann_distance - 1.0).abs() < 1e-10);
        let r10 = &probe.rows[9];
        assert!((r10.visual_distance - (-10.0f64).exp()).abs() < 1e-15);
        assert!((r10.grassmann_distance - 1.0).abs() < 1e-10);
        let trivial_b =
            Representation::new(vec![diag(&[2.0, 0.5]), DMatrix::identity(2, 2)]).unwrap();
        let probe = discontinuity_probe(&trivial_b, 5, 1.0, &opts).unwrap();
        assert!(!probe.discontinuous);
        assert!(probe.rows.iter().all(|r| r.grassmann_distance < 1e-12));
    }

    #[test]
    fn uncertified_solver_refused() {
        let id = Representation::new(vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)]).unwrap();
        assert!(matches!(
            LimitMapSolver::new(&id, &SubsetP::full(2), 1, &LimitOptions::default()),
            Err(Error::NotCertified { .. })
        ));
    }
}
