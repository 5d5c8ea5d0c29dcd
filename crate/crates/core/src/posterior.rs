//! Exact discrete posterior over theory indices.
//!
//! Masses live in log space and are renormalized with log-sum-exp after every
//! observation; a linear-space copy is kept alongside because every consumer
//! (cautious sets, bounds, policies) reads masses at each step.

use crate::error::{Error, Result};
use crate::theory::{Prior, TheoryIndex, TheorySpace};

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    log_mass: Vec<f64>,
    mass: Vec<f64>,
    t: usize,
}

impl Posterior {
    pub fn new<S: TheorySpace + ?Sized>(space: &S) -> Self {
        Self::from_prior(space.prior())
    }

    pub fn from_prior(prior: &Prior) -> Self {
        let mass = prior.masses().to_vec();
        Self {
            log_mass: mass.iter().map(|m| m.ln()).collect(),
            mass,
            t: 0,
        }
    }

    /// Absorbs `obs`, where `history` holds the `t` observations seen so far.
    ///
    /// On [`Error::AllZeroLikelihood`] the state is left untouched.
    pub fn update<S: TheorySpace + ?Sized>(
        &mut self,
        space: &S,
        history: &[S::Observation],
        obs: &S::Observation,
    ) -> Result<()> {
        assert_eq!(history.len(), self.t, "history length must equal t");
        assert_eq!(space.len(), self.log_mass.len(), "space size changed");
        let mut next: Vec<f64> = self
            .log_mass
            .iter()
            .zip(space.indices())
            .map(|(&lm, i)| {
                if lm == f64::NEG_INFINITY {
                    return lm;
                }
                let ll = space.log_likelihood(i, history, obs);
                assert!(!ll.is_nan(), "log-likelihood of {i} is NaN");
                lm + ll
            })
            .collect();
        let max = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::AllZeroLikelihood { t: self.t + 1 });
        }
        let sum: f64 = next.iter().map(|&x| (x - max).exp()).sum();
        let log_norm = max + sum.ln();
        for x in &mut next {
            *x -= log_norm;
        }
        self.mass = next.iter().map(|x| x.exp()).collect();
        self.log_mass = next;
        self.t += 1;
        Ok(())
    }

    /// Value-returning form of [`Posterior::update`].
    pub fn updated<S: TheorySpace + ?Sized>(
        &self,
        space: &S,
        history: &[S::Observation],
        obs: &S::Observation,
    ) -> Result<Self> {
        let mut next = self.clone();
        next.update(space, history, obs)?;
        Ok(next)
    }

    /// Absorbs a whole sequence starting from the current state.
    pub fn update_all<S: TheorySpace + ?Sized>(
        &mut self,
        space: &S,
        data: &[S::Observation],
    ) -> Result<()> {
        for t in 0..data.len() {
            self.update(space, &data[..t], &data[t])?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Number of observations absorbed.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn mass(&self, index: TheoryIndex) -> f64 {
        self.mass[index.0]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn log_mass(&self, index: TheoryIndex) -> f64 {
        self.log_mass[index.0]
    }

    pub fn log_masses(&self) -> &[f64] {
        &self.log_mass
    }

    /// Highest-mass index; ties go to the lowest index.
    pub fn map_index(&self) -> TheoryIndex {
        let mut best = 0;
        for (i, &m) in self.mass.iter().enumerate().skip(1) {
            if m > self.mass[best] {
                best = i;
            }
        }
        TheoryIndex(best)
    }

    /// Indices sorted by descending mass, ties in enumeration order.
    pub fn ranking(&self) -> Ranking {
        let mut order: Vec<TheoryIndex> = (0..self.len()).map(TheoryIndex).collect();
        order.sort_by(|a, b| self.mass[b.0].total_cmp(&self.mass[a.0]).then(a.cmp(b)));
        let mut cumulative = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        let ranked_mass: Vec<f64> = order
            .iter()
            .map(|i| {
                let m = self.mass[i.0];
                acc += m;
                cumulative.push(acc);
                m
            })
            .collect();
        Ranking {
            order,
            ranked_mass,
            cumulative,
        }
    }

    pub fn cautious_set(&self, alpha: f64) -> CautiousSet {
        self.ranking().cautious_set(alpha)
    }
}

/// A posterior's indices in rank order, with running mass totals.
///
/// Computing this once lets a caller evaluate cautious sets for many `alpha`
/// values without re-sorting.
#[derive(Clone, Debug)]
pub struct Ranking {
    order: Vec<TheoryIndex>,
    ranked_mass: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Ranking {
    pub fn order(&self) -> &[TheoryIndex] {
        &self.order
    }

    pub fn ranked_mass(&self) -> &[f64] {
        &self.ranked_mass
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Ranks `n` with `mass_n >= alpha * (mass_1 + ... + mass_n)`.
    ///
    /// Masses are nonincreasing and running totals nondecreasing along the
    /// ranking, so after the first rejected rank every later rank is rejected
    /// too and the scan can stop there.
    pub fn cautious_set(&self, alpha: f64) -> CautiousSet {
        assert!(
            alpha > 0.0 && alpha <= 1.0,
            "alpha must lie in (0, 1], got {alpha}"
        );
        let admitted = self
            .ranked_mass
            .iter()
            .zip(&self.cumulative)
            .take_while(|&(&m, &cum)| m >= alpha * cum)
            .count()
            .max(1);
        CautiousSet {
            alpha,
            members: self.order[..admitted].to_vec(),
            member_mass: self.cumulative[admitted - 1],
            map_mass: self.ranked_mass[0],
        }
    }
}

/// Indices that each hold at least `alpha` of the mass ranked at or above them.
#[derive(Clone, Debug, PartialEq)]
pub struct CautiousSet {
    alpha: f64,
    members: Vec<TheoryIndex>,
    member_mass: f64,
    map_mass: f64,
}

impl CautiousSet {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Members in rank order; the first is the MAP index.
    pub fn members(&self) -> &[TheoryIndex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: TheoryIndex) -> bool {
        self.members.contains(&index)
    }

    /// Posterior mass held by the members.
    pub fn total_mass(&self) -> f64 {
        self.member_mass
    }

    pub fn map_mass(&self) -> f64 {
        self.map_mass
    }

    /// `(1 / (1 - alpha))^(N - 1) * map_mass`, a lower bound on
    /// [`CautiousSet::total_mass`] for a set of `N` members.
    pub fn size_bound(&self) -> f64 {
        let growth = 1.0 / (1.0 - self.alpha);
        growth.powi(self.members.len() as i32 - 1) * self.map_mass
    }
}

/// Records `W_t = 1 / posterior(truth)`, the inverse posterior on the true theory.
///
/// `W_t` is a supermartingale under the truth. A hard elimination of the truth
/// is recorded as `W_t = +inf`.
#[derive(Clone, Debug)]
pub struct TruthTracker {
    truth: TheoryIndex,
    prior_truth: f64,
    w: Vec<f64>,
}

impl TruthTracker {
    pub fn new(truth: TheoryIndex, prior: &Prior) -> Result<Self> {
        let prior_truth = prior.mass(truth);
        if prior_truth <= 0.0 {
            return Err(Error::ZeroPriorTruth(truth.0));
        }
        Ok(Self {
            truth,
            prior_truth,
            w: vec![1.0 / prior_truth],
        })
    }

    pub fn truth(&self) -> TheoryIndex {
        self.truth
    }

    pub fn prior_truth(&self) -> f64 {
        self.prior_truth
    }

    pub fn record(&mut self, posterior: &Posterior) {
        let m = posterior.mass(self.truth);
        self.w.push(if m > 0.0 { 1.0 / m } else { f64::INFINITY });
    }

    pub fn w_history(&self) -> &[f64] {
        &self.w
    }

    pub fn current(&self) -> f64 {
        *self.w.last().expect("W_0 is always recorded")
    }

    pub fn sup(&self) -> f64 {
        self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest posterior mass on the truth seen so far.
    pub fn inf_truth_mass(&self) -> f64 {
        1.0 / self.sup()
    }

    /// Whether the posterior on the truth ever dropped strictly below
    /// `delta * prior(truth)`.
    pub fn violated(&self, delta: f64) -> bool {
        self.inf_truth_mass() < delta * self.prior_truth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::theory::{BernoulliFamily, FirstSymbolFamily, Generative};

    fn masses_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn init_copies_prior() {
        let fam = BernoulliFamily::uniform(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let post = Posterior::new(&fam);
        assert_eq!(post.masses(), &[0.25; 4]);
        assert_eq!(post.t(), 0);

        let fam = BernoulliFamily::new(vec![0.7, 0.5, 0.3], vec![0.5, 0.0, 0.5]).unwrap();
        let post = Posterior::new(&fam);
        assert_eq!(post.mass(TheoryIndex(1)), 0.0);
        assert_eq!(post.log_mass(TheoryIndex(1)), f64::NEG_INFINITY);
    }

    #[test]
    fn uniform_prior_over_bit_vectors() {
        let post = Posterior::from_prior(&Prior::uniform(1 << 10));
        assert!(post.masses().iter().all(|&m| m == 2f64.powi(-10)));
    }

    #[test]
    fn identical_likelihoods_leave_posterior_unchanged() {
        let fam = BernoulliFamily::uniform(vec![0.4, 0.4]).unwrap();
        let mut post = Posterior::new(&fam);
        post.update(&fam, &[], &true).unwrap();
        masses_close(post.masses(), &[0.5, 0.5], 1e-15);
        assert_eq!(post.t(), 1);
    }

    #[test]
    fn first_symbol_update() {
        let fam = FirstSymbolFamily::new(0.2, 0.5).unwrap();
        let post = Posterior::new(&fam).updated(&fam, &[], &true).unwrap();
        assert!((post.mass(FirstSymbolFamily::TRUTH) - 1.0 / 6.0).abs() < 1e-12);

        let fam = FirstSymbolFamily::new(0.5, 0.5).unwrap();
        let post = Posterior::new(&fam).updated(&fam, &[], &false).unwrap();
        assert_eq!(post.mass(FirstSymbolFamily::TRUTH), 1.0);
        assert_eq!(post.mass(FirstSymbolFamily::ALTERNATIVE), 0.0);
    }

    #[test]
    fn all_zero_likelihood_is_an_error() {
        let fam = BernoulliFamily::uniform(vec![1.0, 1.0]).unwrap();
        let mut post = Posterior::new(&fam);
        let before = post.clone();
        let err = post.update(&fam, &[], &false).unwrap_err();
        assert!(matches!(err, Error::AllZeroLikelihood { t: 1 }));
        assert_eq!(post, before);
    }

    #[test]
    fn single_theory_is_constant() {
        let fam = BernoulliFamily::new(vec![0.5], vec![1.0]).unwrap();
        let mut post = Posterior::new(&fam);
        post.update_all(&fam, &[true, false, false, true]).unwrap();
        assert_eq!(post.masses(), &[1.0]);
        assert_eq!(post.cautious_set(0.01).members(), &[TheoryIndex(0)]);
    }

    fn posterior_with(mass: Vec<f64>) -> Posterior {
        Posterior::from_prior(&Prior::new(mass).unwrap())
    }

    #[test]
    fn cautious_set_alpha_one_is_map() {
        let post = posterior_with(vec![0.2, 0.5, 0.3]);
        assert_eq!(post.cautious_set(1.0).members(), &[TheoryIndex(1)]);
        // ties go to the lowest index
        let post = posterior_with(vec![0.25, 0.375, 0.375]);
        assert_eq!(post.map_index(), TheoryIndex(1));
        assert_eq!(post.cautious_set(1.0).members(), &[TheoryIndex(1)]);
    }

    #[test]
    fn cautious_set_hand_example() {
        let post = posterior_with(vec![0.5, 0.3, 0.2]);
        let set = post.cautious_set(0.3);
        assert_eq!(set.members(), &[TheoryIndex(0), TheoryIndex(1)]);
        assert!((set.total_mass() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn cautious_set_excludes_zero_mass() {
        let post = posterior_with(vec![0.5, 0.0, 0.5]);
        let set = post.cautious_set(1e-9);
        assert_eq!(set.members(), &[TheoryIndex(0), TheoryIndex(2)]);
    }

    #[test]
    fn tracker_first_symbol() {
        let fam = FirstSymbolFamily::new(0.2, 0.5).unwrap();
        let mut tracker = TruthTracker::new(FirstSymbolFamily::TRUTH, fam.prior()).unwrap();
        assert_eq!(tracker.w_history(), &[2.0]);
        let post = Posterior::new(&fam).updated(&fam, &[], &true).unwrap();
        tracker.record(&post);
        assert!((tracker.current() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn tracker_records_elimination_as_infinity() {
        let fam = FirstSymbolFamily::new(0.2, 0.5).unwrap();
        let mut tracker = TruthTracker::new(FirstSymbolFamily::ALTERNATIVE, fam.prior()).unwrap();
        let post = Posterior::new(&fam).updated(&fam, &[], &false).unwrap();
        tracker.record(&post);
        assert_eq!(tracker.current(), f64::INFINITY);
        assert_eq!(tracker.inf_truth_mass(), 0.0);
        assert!(tracker.violated(1e-300));
    }

    #[test]
    fn tracker_rejects_zero_prior_truth() {
        let fam = BernoulliFamily::non_convergent(0.7).unwrap();
        assert!(matches!(
            TruthTracker::new(TheoryIndex(1), fam.prior()),
            Err(Error::ZeroPriorTruth(1))
        ));
    }

    #[test]
    fn posterior_concentrates_on_truth() {
        let fam = BernoulliFamily::uniform(vec![0.3, 0.5, 0.7]).unwrap();
        let mut rng = seeded(11);
        let data = fam.sample_sequence(TheoryIndex(2), 2000, &mut rng);
        let mut post = Posterior::new(&fam);
        post.update_all(&fam, &data).unwrap();
        assert_eq!(post.map_index(), TheoryIndex(2));
        assert!(post.mass(TheoryIndex(2)) > 0.99);
        let total: f64 = post.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
