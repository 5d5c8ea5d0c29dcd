//! Cautious-theory harm bounds over countable families of theories.
//!
//! A *theory* is a probability distribution over observation sequences. Given a
//! prior over an indexed family of theories and a stream of observations, this
//! crate maintains the exact discrete posterior and derives run-time upper
//! bounds on the probability of a harm event under the (unknown) true theory:
//!
//! - the i.i.d. cautious-theory bound, maximizing `posterior(i) * harm(i)`;
//! - the weak non-i.i.d. bound, `sup_i posterior(i) * harm(i) / (delta * prior(i*))`;
//! - the cautious-set bound, maximizing `harm(i)` over the set of indices that
//!   hold at least `alpha` of the mass of everything ranked above them;
//! - the posterior predictive harm probability (a non-conservative baseline).
//!
//! The [`bandit`] and [`guardrails`] modules turn these bounds into action
//! masks for an "exploding" multi-armed bandit, and [`harness`] drives the
//! reward/death sweeps, the tightness study and the statistical validation
//! suite. [`oracles`] holds brute-force references used by the tests.
//!
//! ```
//! use cautious::theory::BernoulliFamily;
//! use cautious::posterior::Posterior;
//!
//! let family = BernoulliFamily::new(vec![0.3, 0.5, 0.7], vec![1.0 / 3.0; 3]).unwrap();
//! let mut post = Posterior::new(&family);
//! let data = [true, true, false];
//! for t in 0..data.len() {
//!     post.update(&family, &data[..t], &data[t]).unwrap();
//! }
//! let set = post.cautious_set(0.3);
//! assert_eq!(set.members()[0], post.map_index());
//! ```

pub mod bandit;
pub mod bounds;
pub mod error;
pub mod guardrails;
pub mod harness;
pub mod oracles;
pub mod posterior;
pub mod rng;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
