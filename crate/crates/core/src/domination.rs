//! Singular value gap margins over Γ_P^+ and finite-scale domination certificates.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Representation, ScaledMatrix};
use crate::stats::LinearFit;
use crate::subset::SubsetP;
use crate::word::{Letter, ReducedWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    /// Smallest fitted slope accepted as growth.
    pub lambda_min: f64,
    /// Allowed undershoot of the margins below the certified line.
    pub eps_res: f64,
    /// A zero margin at this length or later refutes.
    pub t_refute: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            lambda_min: 0.02,
            eps_res: 1e-6,
            t_refute: 6,
        }
    }
}

/// Per-length minimum margins. Entry `t-1` is `None` when the sphere is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginTable {
    pub k: usize,
    pub budget: usize,
    pub margins: Vec<Option<f64>>,
    pub argmin: Vec<Option<ReducedWord>>,
    pub complete: bool,
}

impl MarginTable {
    pub fn at(&self, t: usize) -> Option<f64> {
        self.margins[t - 1]
    }

    /// `(t, m(t))` for the non-empty lengths.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.margins
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|m| (i + 1, m)))
            .collect()
    }

    fn push_min(&mut self, t: usize, margin: f64, w: &ReducedWord) {
        let slot = &mut self.margins[t - 1];
        let better = match *slot {
            None => true,
            Some(m) => {
                margin < m
                    || (margin == m && self.argmin[t - 1].as_ref().is_some_and(|a| w < a))
            }
        };
        if better {
            *slot = Some(margin);
            self.argmin[t - 1] = Some(w.clone());
        }
    }
}

fn check_setup(rho: &Representation, subset: &SubsetP, k: usize) -> Result<()> {
    let d = rho.dim();
    if k == 0 || k >= d {
        return Err(Error::BadIndex { k, d });
    }
    if rho.rank() != subset.rank() {
        return Err(Error::DimensionMismatch(format!(
            "representation has rank {}, subset has rank {}",
            rho.rank(),
            subset.rank()
        )));
    }
    Ok(())
}

/// `m(t) = min { ln σ_k − ln σ_{k+1} of ρ(γ) : γ ∈ Γ_P^+, |γ| = t }` for t = 1..L.
pub fn margins(rho: &Representation, subset: &SubsetP, k: usize, budget: usize) -> Result<MarginTable> {
    check_setup(rho, subset, k)?;
    if budget < 2 {
        return Err(Error::BudgetTooSmall(budget));
    }
    let sample = subset.gamma_p_plus(budget)?;
    let mut table = MarginTable {
        k,
        budget,
        margins: vec![None; budget],
        argmin: vec![None; budget],
        complete: sample.complete,
    };
    // Γ_P^+ ∩ ball(L) is prefix-closed, so each product extends its parent's.
    let mut parents: HashMap<ReducedWord, ScaledMatrix> = HashMap::new();
    parents.insert(ReducedWord::identity(), ScaledMatrix::identity(rho.dim()));
    for t in 1..=budget {
        let bucket = sample.bucket(t);
        let evaluated: Vec<(f64, ScaledMatrix)> = bucket
            .par_iter()
            .map(|w| {
                let parent = w.prefix(t - 1);
                let last = w.last().expect("nonempty");
                let m = match parents.get(&parent) {
                    Some(p) => p.mul(rho.scaled_image(last)),
                    None => rho.evaluate(w),
                };
                (m.gap_margin(k), m)
            })
            .collect();
        let mut next = HashMap::with_capacity(bucket.len());
        for (w, (margin, m)) in bucket.iter().zip(evaluated) {
            table.push_min(t, margin, w);
            next.insert(w.clone(), m);
        }
        parents = next;
    }
    if table.margins.iter().all(Option::is_none) {
        return Err(Error::EmptySubset(format!("Γ_P^+ of {subset} is empty up to length {budget}")));
    }
    Ok(table)
}

/// Margins over the conjugates `βωβ⁻¹` with `|β| ≤ r` and `ω ∈ Γ_P^+ ∩ ball(L)`,
/// indexed by the length of the conjugate.
pub fn conj_extension_margins(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    radius: usize,
    budget: usize,
) -> Result<MarginTable> {
    check_setup(rho, subset, k)?;
    if budget < 2 {
        return Err(Error::BudgetTooSmall(budget));
    }
    let sample = subset.gamma_p_plus(budget)?;
    let alphabet = Letter::alphabet(rho.rank());
    let conjugators: Vec<ReducedWord> = (0..=radius)
        .flat_map(|r| ReducedWord::sphere(&alphabet, r))
        .collect();
    let total = budget + 2 * radius;
    let mut table = MarginTable {
        k,
        budget: total,
        margins: vec![None; total],
        argmin: vec![None; total],
        complete: sample.complete,
    };
    let words: Vec<&ReducedWord> = sample.words().collect();
    let found: Vec<(ReducedWord, f64)> = words
        .par_iter()
        .flat_map_iter(|w| {
            conjugators.iter().filter_map(move |b| {
                let c = b.concat(w).concat(&b.inverse());
                (!c.is_empty()).then(|| {
                    let m = rho.evaluate(&c).gap_margin(k);
                    (c, m)
                })
            })
        })
        .collect();
    for (c, m) in found {
        table.push_min(c.len(), m, &c);
    }
    Ok(table)
}

/// Finite-scale evidence for k-domination on Γ_P^+.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub subset: String,
    pub k: usize,
    pub budget: usize,
    pub margins: Vec<Option<f64>>,
    pub argmin: Vec<Option<ReducedWord>>,
    /// Fitted rate λ̂ on the window.
    pub slope: f64,
    pub slope_stderr: f64,
    /// Least-squares intercept ĉ on the window.
    pub intercept: f64,
    /// `min_t (m(t) − λ̂ t)` over every tested length: with it,
    /// `σ_{k+1}/σ_k ≤ e^{−envelope_intercept} e^{−λ̂ |γ|}` holds on the whole sample.
    pub envelope_intercept: f64,
    pub fit_window: (usize, usize),
    /// `min_t (m(t) − λ̂ t − envelope_intercept)` over the window.
    pub residual_min: f64,
    /// `min_t (m(t) − λ̂ t − ĉ)` over the window.
    pub ls_residual_min: f64,
    pub verdict: Verdict,
    pub counterexample: Option<ReducedWord>,
    pub complete: bool,
    pub options: CertifyOptions,
    pub note: String,
}

impl DominationCertificate {
    /// `(log Ĉ, λ̂)` with `σ_{k+1}/σ_k ≤ Ĉ e^{−λ̂|γ|}` on the tested words.
    pub fn constants(&self) -> (f64, f64) {
        (-self.envelope_intercept, self.slope)
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Fits the window `[⌈L/2⌉, L]` and classifies a margin table.
pub fn certificate_from_table(
    table: &MarginTable,
    subset: &SubsetP,
    opts: &CertifyOptions,
) -> DominationCertificate {
    let budget = table.budget;
    let lo = budget.div_ceil(2);
    let points = table.points();
    let window: Vec<(usize, f64)> = points.iter().copied().filter(|&(t, _)| t >= lo).collect();
    let xs: Vec<f64> = window.iter().map(|&(t, _)| t as f64).collect();
    let ys: Vec<f64> = window.iter().map(|&(_, m)| m).collect();
    let fit = LinearFit::fit(&xs, &ys);
    let (slope, intercept, stderr) = fit.map_or((f64::NAN, f64::NAN, f64::NAN), |f| {
        (f.slope, f.intercept, f.slope_stderr)
    });
    let envelope = points
        .iter()
        .map(|&(t, m)| m - slope * t as f64)
        .fold(f64::INFINITY, f64::min);
    let residual_min = window
        .iter()
        .map(|&(t, m)| m - slope * t as f64 - envelope)
        .fold(f64::INFINITY, f64::min);
    let ls_residual_min = window
        .iter()
        .map(|&(t, m)| m - slope * t as f64 - intercept)
        .fold(f64::INFINITY, f64::min);
    let refutation = points
        .iter()
        .find(|&&(t, m)| t >= opts.t_refute && m == 0.0)
        .map(|&(t, _)| table.argmin[t - 1].clone().expect("non-empty bucket"));
    let verdict = if refutation.is_some() {
        Verdict::Refuted
    } else if fit.is_some()
        && slope.is_finite()
        && slope >= opts.lambda_min
        && residual_min >= -opts.eps_res
        && envelope.is_finite()
    {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    let mut note = format!("evidence at word-length scale {budget}, not a proof");
    if !table.complete {
        note.push_str("; Γ_P^+ enumeration truncated to periodic axis points");
    }
    DominationCertificate {
        subset: subset.to_string(),
        k: table.k,
        budget,
        margins: table.margins.clone(),
        argmin: table.argmin.clone(),
        slope,
        slope_stderr: stderr,
        intercept,
        envelope_intercept: envelope,
        fit_window: (lo, budget),
        residual_min,
        ls_residual_min,
        verdict,
        counterexample: refutation,
        complete: table.complete,
        options: *opts,
        note,
    }
}

pub fn certify(
    rho: &Representation,
    subset: &SubsetP,
    k: usize,
    budget: usize,
    opts: &CertifyOptions,
) -> Result<DominationCertificate> {
    let table = margins(rho, subset, k, budget)?;
    Ok(certificate_from_table(&table, subset, opts))
}

/// The gap index on ρ(γ) corresponding to the index `k` of the primitive-stable
/// and directed-Anosov definitions, which measure σ_{d−k}/σ_{d−k+1}.
pub fn gap_index_from_flag_index(d: usize, k: usize) -> usize {
    d - k
}

/// Certification on the axes of primitive elements of cyclic length ≤ `max_period`.
/// `k` is the gap index on ρ(γ).
pub fn primitive_stable_certify(
    rho: &Representation,
    max_period: usize,
    k: usize,
    budget: usize,
    opts: &CertifyOptions,
) -> Result<DominationCertificate> {
    let subset = SubsetP::primitive(rho.rank(), max_period)?;
    certify(rho, &subset, k, budget, opts)
}

/// Certification on bi-infinite words with letters in `s0`. `k` is the gap
/// index on ρ(γ).
pub fn directed_anosov_certify(
    rho: &Representation,
    s0: &[Letter],
    k: usize,
    budget: usize,
    opts: &CertifyOptions,
) -> Result<DominationCertificate> {
    let subset = SubsetP::directed(rho.rank(), s0)?;
    certify(rho, &subset, k, budget, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation2;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn z_example() -> (Representation, SubsetP) {
        let rho = Representation::new(vec![diag(&[4.0, 0.5, 0.5])]).unwrap();
        let p = SubsetP::axis_family(1, &[w("a")]).unwrap();
        (rho, p)
    }

    fn schottky() -> Representation {
        let a = diag(&[5.0, 0.2]);
        let r = rotation2(FRAC_PI_4);
        let b = &r * &a * r.transpose();
        Representation::new(vec![a, b]).unwrap()
    }

    #[test]
    fn z_example_margins() {
        let (rho, p) = z_example();
        let t1 = margins(&rho, &p, 1, 20).unwrap();
        for n in 1..=20 {
            assert!((t1.at(n).unwrap() - n as f64 * 8f64.ln()).abs() < 1e-10);
        }
        let t2 = margins(&rho, &p, 2, 20).unwrap();
        assert!(t2.margins.iter().all(|m| *m == Some(0.0)));
    }

    #[test]
    fn z_example_certificates() {
        let (rho, p) = z_example();
        let opts = CertifyOptions::default();
        let c1 = certify(&rho, &p, 1, 20, &opts).unwrap();
        assert_eq!(c1.verdict, Verdict::Certified);
        assert!((c1.slope - 8f64.ln()).abs() < 1e-9);
        assert!(c1.intercept.abs() < 1e-9);
        let c2 = certify(&rho, &p, 2, 20, &opts).unwrap();
        assert_eq!(c2.verdict, Verdict::Refuted);
        assert_eq!(c2.counterexample, Some(w("aaaaaa")));
    }

    #[test]
    fn identity_margins_vanish() {
        let rho = Representation::new(vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)]).unwrap();
        let t = margins(&rho, &SubsetP::full(2), 1, 4).unwrap();
        assert!(t.margins.iter().all(|m| *m == Some(0.0)));
        let c = primitive_stable_certify(&rho, 3, 1, 8, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn positive_pair_directed_certified() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 1.0, 1.0]);
        let rho = Representation::new(vec![a, b]).unwrap();
        let s0 = [Letter::gen(0), Letter::gen(1)];
        let c = directed_anosov_certify(&rho, &s0, 1, 12, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert!(c.slope > 0.0);
        assert_eq!(
            directed_anosov_certify(&rho, &[], 1, 12, &CertifyOptions::default()).unwrap_err(),
            Error::EmptySubset("directed letter set is empty".into())
        );
    }

    #[test]
    fn schottky_primitive_stable() {
        let c = primitive_stable_certify(&schottky(), 4, 1, 10, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert!(!c.complete);
        let rank_one = Representation::new(vec![diag(&[2.0, 0.5])]).unwrap();
        assert_eq!(
            primitive_stable_certify(&rank_one, 2, 1, 10, &CertifyOptions::default()).unwrap_err(),
            Error::RankTooSmall(1)
        );
    }

    #[test]
    fn conjugation_radius_zero_matches_margins() {
        let rho = schottky();
        let p = SubsetP::directed(2, &[Letter::gen(0), Letter::gen(1)]).unwrap();
        let a = margins(&rho, &p, 1, 6).unwrap();
        let b = conj_extension_margins(&rho, &p, 1, 0, 6).unwrap();
        assert_eq!(a.margins, b.margins);
    }

    #[test]
    fn conjugation_by_identity_images_keeps_slope() {
        let rho = Representation::new(vec![diag(&[4.0, 0.5, 0.5]), DMatrix::identity(3, 3)]).unwrap();
        let p = SubsetP::axis_family(2, &[w("a")]).unwrap();
        let t = conj_extension_margins(&rho, &p, 1, 1, 8).unwrap();
        for (len, m) in t.points() {
            let n = t.argmin[len - 1].as_ref().unwrap().abelianization(2)[0];
            assert!((m - n as f64 * 8f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn conjugation_by_rotation_keeps_margins() {
        let rho = Representation::new(vec![diag(&[2.0, 0.5]), rotation2(FRAC_PI_2)]).unwrap();
        let p = SubsetP::axis_family(2, &[w("a")]).unwrap();
        let t = conj_extension_margins(&rho, &p, 1, 1, 8).unwrap();
        for (len, m) in t.points() {
            let n = t.argmin[len - 1].as_ref().unwrap().abelianization(2)[0];
            assert!((m - n as f64 * 4f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_directed_matches_axis() {
        let rho = Representation::new(vec![diag(&[2.0, 0.5]), rotation2(FRAC_PI_2)]).unwrap();
        let dir = SubsetP::directed(2, &[Letter::gen(0), Letter::gen(0).inv()]).unwrap();
        let axis = SubsetP::axis_family(2, &[w("a"), w("A")]).unwrap();
        let a = margins(&rho, &dir, 1, 8).unwrap();
        let b = margins(&rho, &axis, 1, 8).unwrap();
        assert_eq!(a.margins, b.margins);
        let c = margins(&rho, &SubsetP::axis_family(2, &[w("a")]).unwrap(), 1, 8).unwrap();
        assert_eq!(a.margins, c.margins);
    }

    #[test]
    fn bad_index_rejected() {
        let (rho, p) = z_example();
        assert_eq!(margins(&rho, &p, 3, 5).unwrap_err(), Error::BadIndex { k: 3, d: 3 });
        assert_eq!(margins(&rho, &p, 1, 1).unwrap_err(), Error::BudgetTooSmall(1));
    }
}
