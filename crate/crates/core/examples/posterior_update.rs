//! Sequential Bayesian updating over three coins, then the cautious set.

use cautious::posterior::Posterior;
use cautious::rng::seeded;
use cautious::theory::{BernoulliFamily, Generative, TheoryIndex};

fn main() -> cautious::Result<()> {
    let family = BernoulliFamily::uniform(vec![0.3, 0.5, 0.7])?;
    let truth = TheoryIndex(2);
    let data = family.sample_sequence(truth, 60, &mut seeded(1));

    let mut post = Posterior::new(&family);
    for t in 0..data.len() {
        post.update(&family, &data[..t], &data[t])?;
        if (t + 1) % 10 == 0 {
            let m = post.masses();
            println!("t={:>2}  p(0.3)={:.4}  p(0.5)={:.4}  p(0.7)={:.4}", t + 1, m[0], m[1], m[2]);
        }
    }

    for alpha in [0.001, 0.05, 0.5] {
        let set = post.cautious_set(alpha);
        let members: Vec<String> = set.members().iter().map(|i| i.to_string()).collect();
        println!(
            "alpha={alpha:<5}  I = {{{}}}  mass {:.4} (>= {:.4})",
            members.join(", "),
            set.total_mass(),
            set.size_bound()
        );
    }
    Ok(())
}
