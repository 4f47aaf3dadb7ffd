//! Estimation losses and edge-recovery scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pd_check, SymMatrix};

/// Default magnitude at which an estimated off-diagonal entry counts as an edge.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSummary {
    pub omega_hat: SymMatrix,
    pub draws_used: usize,
}

/// Single-pass elementwise mean of a stream of matrices.
#[derive(Clone, Debug)]
pub struct PosteriorMeanAccumulator {
    dim: usize,
    sum: Vec<f64>,
    count: usize,
}

impl PosteriorMeanAccumulator {
    pub fn new(dim: usize) -> Self {
        PosteriorMeanAccumulator {
            dim,
            sum: vec![0.0; dim * dim],
            count: 0,
        }
    }

    pub fn push(&mut self, draw: &SymMatrix) -> Result<()> {
        if draw.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: draw.dim(),
            });
        }
        for (s, v) in self.sum.iter_mut().zip(draw.as_slice()) {
            *s += v;
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<EstimateSummary> {
        if self.count == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.count as f64;
        let p = self.dim;
        // (i, j) and (j, i) accumulate identical sums, so the mean stays exactly symmetric.
        let omega_hat = SymMatrix::from_fn(p, |i, j| self.sum[i * p + j] / n);
        Ok(EstimateSummary {
            omega_hat,
            draws_used: self.count,
        })
    }
}

pub fn posterior_mean<'a>(draws: impl IntoIterator<Item = &'a SymMatrix>) -> Result<EstimateSummary> {
    let mut iter = draws.into_iter().peekable();
    let first = iter.peek().ok_or(Error::EmptyStream)?;
    let mut acc = PosteriorMeanAccumulator::new(first.dim());
    for d in iter {
        acc.push(d)?;
    }
    acc.finish()
}

fn same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: b.dim(),
            got: a.dim(),
        })
    }
}

/// Stein's (entropy) loss `tr(Ω̂Σ) − log det(Ω̂Σ) − p` with `Σ = Ω_true⁻¹`.
pub fn stein_loss(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<f64> {
    same_dim(omega_hat, omega_true)?;
    let chol_hat = pd_check(omega_hat).ok_or(Error::NotPositiveDefinite)?;
    let chol_true = pd_check(omega_true).ok_or(Error::NotPositiveDefinite)?;
    let sigma = chol_true.inverse();
    let p = omega_hat.dim();
    let trace: f64 = (0..p)
        .map(|i| (0..p).map(|k| omega_hat.get(i, k) * sigma.get(k, i)).sum::<f64>())
        .sum();
    let log_det = chol_hat.log_det() - chol_true.log_det();
    Ok((trace - log_det - p as f64).max(0.0))
}

pub fn frobenius_loss(omega_hat: &SymMatrix, omega_true: &SymMatrix) -> Result<f64> {
    same_dim(omega_hat, omega_true)?;
    Ok(omega_hat
        .as_slice()
        .iter()
        .zip(omega_true.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Symmetric boolean adjacency with a false diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    dim: usize,
    edges: Vec<bool>,
}

impl Adjacency {
    pub fn empty(dim: usize) -> Self {
        Adjacency {
            dim,
            edges: vec![false; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut connected: impl FnMut(usize, usize) -> bool) -> Self {
        let mut adj = Self::empty(dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if connected(i, j) {
                    adj.edges[i * dim + j] = true;
                    adj.edges[j * dim + i] = true;
                }
            }
        }
        adj
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.edges[i * self.dim + j]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count() / 2
    }
}

/// Edges where the estimate clears `threshold`.
///
/// With `use_abs` the rule is `|ω̂ᵢⱼ| ≥ threshold`; without it, the signed
/// `ω̂ᵢⱼ ≥ threshold`.
pub fn adjacency_from_estimate(omega_hat: &SymMatrix, threshold: f64, use_abs: bool) -> Adjacency {
    Adjacency::from_fn(omega_hat.dim(), |i, j| {
        let v = omega_hat.get(i, j);
        let v = if use_abs { v.abs() } else { v };
        v >= threshold
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn scores(&self, mcc_as_printed: bool) -> StructureScores {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let pct = |num: f64, den: f64| if den > 0.0 { 100.0 * num / den } else { 0.0 };
        // The as-printed variant repeats (TN + FN) in place of (TN + FP).
        let third = if mcc_as_printed { tn + fn_ } else { tn + fp };
        let den = (tp + fp) * (tp + fn_) * third * (tn + fn_);
        let mcc = if den > 0.0 {
            100.0 * (tp * tn - fp * fn_) / den.sqrt()
        } else {
            0.0
        };
        StructureScores {
            counts: *self,
            specificity: pct(tn, tn + fp),
            sensitivity: pct(tp, tp + fn_),
            mcc,
        }
    }
}

/// Confusion counts plus the three criteria, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureScores {
    pub counts: ConfusionCounts,
    pub specificity: f64,
    pub sensitivity: f64,
    pub mcc: f64,
}

/// Compares unordered off-diagonal pairs; "positive" means connected.
pub fn confusion_counts(adj_hat: &Adjacency, adj_true: &Adjacency) -> Result<ConfusionCounts> {
    if adj_hat.dim() != adj_true.dim() {
        return Err(Error::DimensionMismatch {
            expected: adj_true.dim(),
            got: adj_hat.dim(),
        });
    }
    let mut c = ConfusionCounts::default();
    let p = adj_hat.dim();
    for i in 0..p {
        for j in (i + 1)..p {
            match (adj_hat.get(i, j), adj_true.get(i, j)) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
    }
    Ok(c)
}

pub fn structure_scores(adj_hat: &Adjacency, adj_true: &Adjacency, mcc_as_printed: bool) -> Result<StructureScores> {
    Ok(confusion_counts(adj_hat, adj_true)?.scores(mcc_as_printed))
}

/// `D^{-1/2} Ω D^{-1/2}` with `D = diag(Ω)`; the diagonal comes out exactly 1.
pub fn unit_diag_scale(omega: &SymMatrix) -> Result<SymMatrix> {
    let d = omega.diag();
    if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!("diagonal entry {i} is {v}, must be positive")));
    }
    let inv_sqrt: Vec<f64> = d.iter().map(|v| v.sqrt().recip()).collect();
    Ok(SymMatrix::from_fn(omega.dim(), |i, j| {
        if i == j {
            1.0
        } else {
            omega.get(i, j) * inv_sqrt[i] * inv_sqrt[j]
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::permute_to_last;
    use crate::rng::RngStream;
    use rand::Rng;

    fn random_pd(p: usize, rng: &mut RngStream) -> SymMatrix {
        let l: Vec<f64> = (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymMatrix::from_fn(p, |i, j| {
            (0..p).map(|k| l[i * p + k] * l[j * p + k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }
        })
    }

    #[test]
    fn posterior_mean_examples() {
        let m = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 3.0]]).unwrap();
        let est = posterior_mean([&m, &m, &m]).unwrap();
        assert!(est.omega_hat.max_abs_diff(&m) < 1e-15);
        assert_eq!(est.draws_used, 3);
        let i = SymMatrix::identity(3);
        let est = posterior_mean([&i, &i.scaled(3.0)]).unwrap();
        assert_eq!(est.omega_hat, i.scaled(2.0));
        assert!(matches!(posterior_mean(std::iter::empty::<&SymMatrix>()), Err(Error::EmptyStream)));
    }

    #[test]
    fn stein_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(stein_loss(&i2, &i2).unwrap(), 0.0);
        let expected = 4.0 - 4f64.ln() - 2.0;
        assert!((stein_loss(&i2.scaled(2.0), &i2).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.6137).abs() < 1e-4);
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(stein_loss(&bad, &i2).is_err());
    }

    #[test]
    fn stein_positive_and_permutation_invariant() {
        let mut rng = RngStream::new(30, 0);
        for _ in 0..100 {
            let truth = random_pd(4, &mut rng);
            let noise = random_pd(4, &mut rng).scaled(0.1);
            let hat = SymMatrix::from_fn(4, |i, j| truth.get(i, j) + noise.get(i, j));
            let loss = stein_loss(&hat, &truth).unwrap();
            assert!(loss > 0.0);
            assert!(stein_loss(&truth, &truth).unwrap() < 1e-12);
            let k = rng.gen_range(0..4);
            let permuted = stein_loss(&permute_to_last(&hat, k).unwrap(), &permute_to_last(&truth, k).unwrap()).unwrap();
            assert!((permuted - loss).abs() < 1e-10 * loss.max(1.0));
        }
    }

    #[test]
    fn frobenius_examples() {
        let a = SymMatrix::from_diag(&[1.0, 1.0]);
        let b = SymMatrix::from_diag(&[2.0, 3.0]);
        assert_eq!(frobenius_loss(&a, &a).unwrap(), 0.0);
        assert!((frobenius_loss(&a, &b).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!((5f64.sqrt() - 2.2361).abs() < 1e-4);
        let c = SymMatrix::from_fn(3, |i, j| (i + 2 * j) as f64);
        let d = SymMatrix::from_fn(3, |i, j| (i * j) as f64 - 1.0);
        let base = frobenius_loss(&c, &d).unwrap();
        for k in 0..3 {
            let perm = frobenius_loss(&permute_to_last(&c, k).unwrap(), &permute_to_last(&d, k).unwrap()).unwrap();
            assert!((perm - base).abs() < 1e-12);
        }
        assert!(frobenius_loss(&a, &SymMatrix::identity(3)).is_err());
    }

    #[test]
    fn threshold_rule() {
        let m = SymMatrix::from_rows(&[
            vec![1.0, 1e-3, 0.0],
            vec![1e-3, 1.0, -0.5],
            vec![0.0, -0.5, 1.0],
        ])
        .unwrap();
        let adj = adjacency_from_estimate(&m, DEFAULT_EDGE_THRESHOLD, true);
        assert!(adj.get(0, 1) && adj.get(1, 0));
        assert!(!adj.get(0, 2));
        assert!(adj.get(1, 2));
        assert!(!adj.get(0, 0));
        let signed = adjacency_from_estimate(&m, DEFAULT_EDGE_THRESHOLD, false);
        assert!(!signed.get(1, 2));
    }

    #[test]
    fn threshold_monotone() {
        let mut rng = RngStream::new(31, 0);
        for _ in 0..100 {
            let m = SymMatrix::from_fn(6, |_, _| rng.gen_range(-0.1..0.1));
            let t1 = rng.gen_range(1e-4..0.05);
            let t2 = t1 + rng.gen_range(0.0..0.05);
            let lo = adjacency_from_estimate(&m, t1, true);
            let hi = adjacency_from_estimate(&m, t2, true);
            for i in 0..6 {
                for j in 0..6 {
                    assert!(!hi.get(i, j) || lo.get(i, j));
                }
            }
        }
    }

    #[test]
    fn score_examples() {
        let truth = Adjacency::from_fn(5, |i, j| j == i + 1);
        let perfect = structure_scores(&truth, &truth, false).unwrap();
        assert_eq!((perfect.specificity, perfect.sensitivity, perfect.mcc), (100.0, 100.0, 100.0));
        assert_eq!(perfect.counts.fp + perfect.counts.fn_, 0);
        assert_eq!(perfect.counts.total(), 10);

        let c = ConfusionCounts { tp: 1, tn: 1, fp: 1, fn_: 1 };
        assert_eq!(c.scores(false).mcc, 0.0);

        let all = Adjacency::from_fn(5, |_, _| true);
        let s = structure_scores(&all, &truth, false).unwrap();
        assert_eq!(s.specificity, 0.0);
        assert_eq!(s.sensitivity, 100.0);
        assert_eq!(s.mcc, 0.0);

        // TP=3, TN=4, FP=2, FN=1: standard vs as-printed denominators
        let c = ConfusionCounts { tp: 3, tn: 4, fp: 2, fn_: 1 };
        let standard = 100.0 * (12.0 - 2.0) / (5.0f64 * 4.0 * 6.0 * 5.0).sqrt();
        let printed = 100.0 * (12.0 - 2.0) / (5.0f64 * 4.0 * 5.0 * 5.0).sqrt();
        assert!((c.scores(false).mcc - standard).abs() < 1e-12);
        assert!((c.scores(true).mcc - printed).abs() < 1e-12);
        assert!(structure_scores(&all, &Adjacency::empty(4), false).is_err());
    }

    #[test]
    fn unit_diag_examples() {
        assert_eq!(unit_diag_scale(&SymMatrix::identity(3)).unwrap(), SymMatrix::identity(3));
        let m = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(unit_diag_scale(&m).unwrap(), SymMatrix::from_fn(2, |_, _| 1.0));
        let bad = SymMatrix::from_diag(&[1.0, 0.0]);
        assert!(unit_diag_scale(&bad).is_err());
        let mut rng = RngStream::new(32, 0);
        for _ in 0..100 {
            let scaled = unit_diag_scale(&random_pd(5, &mut rng)).unwrap();
            assert!(scaled.diag().iter().all(|d| (d - 1.0).abs() < 1e-14));
        }
    }
}
