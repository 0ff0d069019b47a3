//! Closed-form generalization bounds for the three learners.
//!
//! Every bound is an instance of one base form,
//!
//! ```text
//! mult * R_hat + 2 sqrt(2) mu sqrt(c Lambda^2 r^2 / n) + 3 M sqrt(ln(2/delta) / (2n))
//! ```
//!
//! where `mu` and `M` are the Lipschitz constant and bound of the composed
//! loss, and `mult` is 1, c or c^2 depending on which measure is bounded.
//! [`BoundName`] records the `(mu, M, mult)` pattern of each result.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{MlcError, Result};
use crate::loss::Surrogate;
use crate::model::LinearModel;

/// Label attached to bounds evaluated with realized (a-posteriori) constants.
pub const DIAGNOSTIC_LABEL: &str = "diagnostic, not a valid a-priori bound";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    /// Lipschitz constant of the composed loss.
    pub mu: f64,
    /// Bound on the composed loss.
    pub m: f64,
    pub c: usize,
    pub n: usize,
    /// Norm bound of the hypothesis class.
    pub lambda: f64,
    /// Kernel bound, `kappa(x, x) <= r^2`.
    pub r: f64,
    pub delta: f64,
    pub empirical_risk: f64,
    pub multiplier: f64,
}

impl BoundQuery {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(MlcError::invalid(format!("{what} out of range: {v}")));
        if self.n == 0 {
            return Err(MlcError::invalid("n must be >= 1"));
        }
        if self.c == 0 {
            return Err(MlcError::invalid("c must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta (must be in (0,1))", self.delta);
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("Lambda (must be > 0)", self.lambda);
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return bad("r (must be > 0)", self.r);
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("mu (must be >= 0)", self.mu);
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return bad("M (must be >= 0)", self.m);
        }
        if !(self.empirical_risk >= 0.0 && self.empirical_risk.is_finite()) {
            return bad("empirical risk (must be >= 0)", self.empirical_risk);
        }
        if !(self.multiplier >= 0.0 && self.multiplier.is_finite()) {
            return bad("multiplier (must be >= 0)", self.multiplier);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub total: f64,
    pub risk_term: f64,
    pub complexity_term: f64,
    pub confidence_term: f64,
    /// Set when Lambda and r were taken from a trained model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Lipschitz constant (in the score vector, Euclidean norm) of a surrogate
/// built on a `rho`-Lipschitz base loss, as used by the named bounds.
///
/// For the ranking surrogate this is `rho`, the value every ranking bound is
/// built on. The sharp worst case is `sqrt(2) * rho`: with one relevant and one
/// irrelevant label, moving the two scores apart by `delta` each changes the
/// pair term by `2 delta` at distance `sqrt(2) delta`.
pub fn lipschitz_of(kind: Surrogate, rho: f64, c: usize) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(MlcError::invalid(format!("rho must be > 0, got {rho}")));
    }
    if c == 0 {
        return Err(MlcError::invalid("c must be >= 1"));
    }
    Ok(match kind {
        Surrogate::Hamming => rho / (c as f64).sqrt(),
        Surrogate::Subset | Surrogate::Ranking => rho,
    })
}

pub fn base_bound(q: &BoundQuery) -> Result<BoundReport> {
    q.validate()?;
    Ok(base_bound_named("base", q))
}

fn base_bound_named(name: &str, q: &BoundQuery) -> BoundReport {
    let n = q.n as f64;
    let risk_term = q.multiplier * q.empirical_risk;
    let complexity_term = 2.0 * 2f64.sqrt() * q.mu * (q.c as f64 * q.lambda * q.lambda * q.r * q.r / n).sqrt();
    let confidence_term = 3.0 * q.m * ((2.0 / q.delta).ln() / (2.0 * n)).sqrt();
    BoundReport {
        bound_name: name.to_string(),
        total: risk_term + complexity_term + confidence_term,
        risk_term,
        complexity_term,
        confidence_term,
        note: None,
    }
}

/// Inputs shared by every named bound: base-loss constants plus the class
/// and sample parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Lipschitz constant of the base loss.
    pub rho: f64,
    /// Bound of the base loss on the hypothesis class.
    pub b: f64,
    pub c: usize,
    pub n: usize,
    pub lambda: f64,
    pub r: f64,
    pub delta: f64,
    pub empirical_risk: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundName {
    /// Hamming-loss learner, Hamming-loss bound.
    AhHamming,
    AhSubset,
    AhRanking,
    /// Subset-loss learner; one bound covers subset and Hamming loss.
    AsSubsetHamming,
    AsRanking,
    ArRanking,
    ArHamming,
    ArSubset,
    /// Binary relevance: the Hamming learner with hinge loss.
    BrHamming,
    /// Rank-SVM: the ranking learner with hinge loss.
    RankSvmRanking,
}

impl BoundName {
    pub const ALL: [BoundName; 10] = [
        BoundName::AhHamming,
        BoundName::AhSubset,
        BoundName::AhRanking,
        BoundName::AsSubsetHamming,
        BoundName::AsRanking,
        BoundName::ArRanking,
        BoundName::ArHamming,
        BoundName::ArSubset,
        BoundName::BrHamming,
        BoundName::RankSvmRanking,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::AhHamming => "Ah_hamming",
            BoundName::AhSubset => "Ah_subset",
            BoundName::AhRanking => "Ah_ranking",
            BoundName::AsSubsetHamming => "As_subset_hamming",
            BoundName::AsRanking => "As_ranking",
            BoundName::ArRanking => "Ar_ranking",
            BoundName::ArHamming => "Ar_hamming",
            BoundName::ArSubset => "Ar_subset",
            BoundName::BrHamming => "BR_hamming",
            BoundName::RankSvmRanking => "RankSVM_ranking",
        }
    }

    /// `(mu, M, multiplier)` for base-loss constants `rho`, `b`.
    pub fn constants(&self, rho: f64, b: f64, c: usize) -> (f64, f64, f64) {
        let cf = c as f64;
        let sc = cf.sqrt();
        match self {
            BoundName::AhHamming => (rho / sc, b, 1.0),
            BoundName::BrHamming => (1.0 / sc, b, 1.0),
            BoundName::AhSubset | BoundName::AhRanking => (rho * sc, b * cf, cf),
            BoundName::AsSubsetHamming | BoundName::AsRanking | BoundName::ArRanking => (rho, b, 1.0),
            BoundName::RankSvmRanking => (1.0, b, 1.0),
            BoundName::ArHamming => (rho * cf, b * cf, cf),
            BoundName::ArSubset => (rho * cf * cf, b * cf * cf, cf * cf),
        }
    }

    pub fn query(&self, inp: &BoundInputs) -> BoundQuery {
        let (mu, m, multiplier) = self.constants(inp.rho, inp.b, inp.c);
        BoundQuery {
            mu,
            m,
            c: inp.c,
            n: inp.n,
            lambda: inp.lambda,
            r: inp.r,
            delta: inp.delta,
            empirical_risk: inp.empirical_risk,
            multiplier,
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = MlcError;

    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| MlcError::Unknown {
                what: "bound",
                name: s.to_string(),
            })
    }
}

pub fn named_bound(name: &str, inp: &BoundInputs) -> Result<BoundReport> {
    let which: BoundName = name.parse()?;
    evaluate(which, inp)
}

pub fn evaluate(which: BoundName, inp: &BoundInputs) -> Result<BoundReport> {
    if !(inp.rho > 0.0 && inp.rho.is_finite()) {
        return Err(MlcError::invalid(format!("rho must be > 0, got {}", inp.rho)));
    }
    let q = which.query(inp);
    q.validate()?;
    Ok(base_bound_named(which.as_str(), &q))
}

/// Empirical Rademacher complexity of the norm-ball class from the kernel
/// trace: `exact = Lambda sqrt(c Tr K) / n` and its relaxation
/// `sqrt(c Lambda^2 r^2 / n)` using `Tr K <= n r^2`.
pub fn rademacher_kernel_estimate(kernel_trace: f64, c: usize, lambda: f64, n: usize, r: f64) -> Result<(f64, f64)> {
    if !(kernel_trace >= 0.0 && kernel_trace.is_finite()) {
        return Err(MlcError::invalid(format!("kernel trace must be >= 0, got {kernel_trace}")));
    }
    if n == 0 || c == 0 {
        return Err(MlcError::invalid("n and c must be >= 1"));
    }
    if !(lambda >= 0.0 && r >= 0.0) {
        return Err(MlcError::invalid("Lambda and r must be >= 0"));
    }
    let nf = n as f64;
    let exact = lambda * (c as f64 * kernel_trace).sqrt() / nf;
    let relaxed = (c as f64 * lambda * lambda * r * r / nf).sqrt();
    Ok((exact, relaxed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl FromStr for Kernel {
    type Err = MlcError;

    /// `linear`, `rbf` or `rbf:<gamma>`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || MlcError::Unknown {
            what: "kernel",
            name: s.to_string(),
        };
        match s.split_once(':') {
            None if s.eq_ignore_ascii_case("linear") => Ok(Kernel::Linear),
            None if s.eq_ignore_ascii_case("rbf") => Ok(Kernel::Rbf { gamma: 1.0 }),
            Some((k, g)) if k.eq_ignore_ascii_case("rbf") => {
                let gamma: f64 = g.parse().map_err(|_| unknown())?;
                if gamma > 0.0 {
                    Ok(Kernel::Rbf { gamma })
                } else {
                    Err(unknown())
                }
            }
            _ => Err(unknown()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStats {
    /// `||W||_F`
    pub lambda_realized: f64,
    /// `max_i sqrt(kappa(x_i, x_i))`
    pub r_empirical: f64,
    /// `sum_i kappa(x_i, x_i)`
    pub kernel_trace: f64,
}

/// Realized norm and kernel statistics. For the linear kernel a bias column
/// contributes 1 to every `kappa(x, x)`.
pub fn hypothesis_stats(model: &LinearModel, ds: &Dataset, kernel: Kernel) -> Result<HypothesisStats> {
    if model.n_features() != ds.n_features() || model.n_labels() != ds.n_labels() {
        return Err(MlcError::invalid(format!(
            "model (d={}, c={}) does not match data (d={}, c={})",
            model.n_features(),
            model.n_labels(),
            ds.n_features(),
            ds.n_labels()
        )));
    }
    let (trace, max_k) = match kernel {
        Kernel::Rbf { .. } => (ds.n_samples() as f64, if ds.n_samples() > 0 { 1.0 } else { 0.0 }),
        Kernel::Linear => {
            let extra = if model.bias() { 1.0 } else { 0.0 };
            ds.features().rows().fold((0.0, 0.0f64), |(t, m), row| {
                let k = row.squared_norm() + extra;
                (t + k, m.max(k))
            })
        }
    };
    Ok(HypothesisStats {
        lambda_realized: model.frobenius_norm(),
        r_empirical: max_k.sqrt(),
        kernel_trace: trace,
    })
}

/// A named bound with `Lambda` and `r` replaced by the realized values of a
/// trained model on `ds`. Labeled with [`DIAGNOSTIC_LABEL`].
pub fn diagnostic_bound(
    which: BoundName,
    model: &LinearModel,
    ds: &Dataset,
    rho: f64,
    b: f64,
    delta: f64,
    empirical_risk: f64,
) -> Result<BoundReport> {
    let stats = hypothesis_stats(model, ds, Kernel::Linear)?;
    let inp = BoundInputs {
        rho,
        b,
        c: ds.n_labels(),
        n: ds.n_samples(),
        lambda: stats.lambda_realized,
        r: stats.r_empirical,
        delta,
        empirical_risk,
    };
    let mut report = evaluate(which, &inp)?;
    report.note = Some(DIAGNOSTIC_LABEL.to_string());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SparseMatrix;

    fn inputs(c: usize) -> BoundInputs {
        BoundInputs {
            rho: 1.0,
            b: 1.0,
            c,
            n: 100,
            lambda: 1.0,
            r: 1.0,
            delta: 0.05,
            empirical_risk: 0.1,
        }
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(lipschitz_of(Surrogate::Hamming, 1.0, 4).unwrap(), 0.5);
        assert_eq!(lipschitz_of(Surrogate::Subset, 1.0, 100).unwrap(), 1.0);
        assert_eq!(lipschitz_of(Surrogate::Hamming, 1.0, 1).unwrap(), 1.0);
        assert!(lipschitz_of(Surrogate::Ranking, 0.0, 3).is_err());
    }

    #[test]
    fn base_example() {
        let q = BoundQuery {
            mu: 1.0,
            m: 1.0,
            c: 4,
            n: 100,
            lambda: 1.0,
            r: 1.0,
            delta: 0.05,
            empirical_risk: 0.0,
            multiplier: 1.0,
        };
        let rep = base_bound(&q).unwrap();
        assert!((rep.complexity_term - 0.565_685_424_949_238).abs() < 1e-12);
        assert!((rep.confidence_term - 0.407_430_454_722_186).abs() < 1e-12);
        assert!((rep.total - 0.973_115_879_671_424).abs() < 1e-12);
        assert_eq!(rep.total, rep.risk_term + rep.complexity_term + rep.confidence_term);
        let zero = base_bound(&BoundQuery {
            mu: 0.0,
            m: 0.0,
            empirical_risk: 0.3,
            multiplier: 4.0,
            ..q
        })
        .unwrap();
        assert_eq!(zero.total, 4.0 * 0.3);
        for delta in [0.0, 1.0, -0.1] {
            assert!(base_bound(&BoundQuery { delta, ..q }).is_err());
        }
    }

    #[test]
    fn four_times_n_halves_terms() {
        let q = BoundQuery {
            mu: 0.7,
            m: 2.0,
            c: 3,
            n: 50,
            lambda: 1.5,
            r: 0.8,
            delta: 0.1,
            empirical_risk: 0.0,
            multiplier: 1.0,
        };
        let a = base_bound(&q).unwrap();
        let b = base_bound(&BoundQuery { n: 200, ..q }).unwrap();
        assert!((a.complexity_term / b.complexity_term - 2.0).abs() < 1e-12);
        assert!((a.confidence_term / b.confidence_term - 2.0).abs() < 1e-12);
    }

    #[test]
    fn named_ratios() {
        let ah = named_bound("Ah_hamming", &inputs(9)).unwrap();
        let as_ = named_bound("As_subset_hamming", &inputs(9)).unwrap();
        assert!((as_.complexity_term / ah.complexity_term - 3.0).abs() < 1e-12);
        let mut one = inputs(1);
        one.empirical_risk = 0.25;
        let ar_s = named_bound("Ar_subset", &one).unwrap();
        let ar_r = named_bound("Ar_ranking", &one).unwrap();
        assert_eq!(ar_s.total, ar_r.total);
        assert!(matches!(named_bound("nope", &one), Err(MlcError::Unknown { .. })));
        assert_eq!(named_bound("ah_subset", &one).unwrap().bound_name, "Ah_subset");
    }

    #[test]
    fn rademacher_examples() {
        let (exact, relaxed) = rademacher_kernel_estimate(3.0, 2, 1.0, 3, 1.0).unwrap();
        assert!((exact - 6f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((exact - relaxed).abs() < 1e-15);
        assert_eq!(rademacher_kernel_estimate(5.0, 3, 0.0, 7, 1.0).unwrap(), (0.0, 0.0));
        assert!(rademacher_kernel_estimate(-1.0, 3, 1.0, 7, 1.0).is_err());
    }

    #[test]
    fn kernel_stats() {
        let x = vec![vec![0.6, 0.8], vec![1.0, 0.0], vec![0.0, 0.5]];
        let ds = Dataset::new(SparseMatrix::from_dense(&x, 2).unwrap(), vec![1, -1, -1, 1, 1, 1], 2).unwrap();
        let zero = LinearModel::zeros(2, 2, false);
        let lin = hypothesis_stats(&zero, &ds, Kernel::Linear).unwrap();
        assert_eq!(lin.lambda_realized, 0.0);
        assert!((lin.r_empirical - 1.0).abs() < 1e-15);
        assert!((lin.kernel_trace - 2.25).abs() < 1e-15);
        let rbf = hypothesis_stats(&zero, &ds, "rbf:0.5".parse().unwrap()).unwrap();
        assert_eq!((rbf.r_empirical, rbf.kernel_trace), (1.0, 3.0));
        let biased = hypothesis_stats(&LinearModel::zeros(2, 2, true), &ds, Kernel::Linear).unwrap();
        assert!((biased.kernel_trace - 5.25).abs() < 1e-15);
        assert!("poly".parse::<Kernel>().is_err());
    }
}
