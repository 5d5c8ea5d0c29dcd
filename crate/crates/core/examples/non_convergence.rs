//! Fair-coin data against coins of bias 0.7 and 0.3 (the fair coin has prior
//! zero). The log posterior ratio is a scaled simple random walk.

use cautious::oracles::walk_statistic;
use cautious::posterior::Posterior;
use cautious::rng::seeded;
use cautious::theory::{BernoulliFamily, TheoryIndex};
use rand::Rng;

fn main() -> cautious::Result<()> {
    let p = 0.7;
    let family = BernoulliFamily::non_convergent(p)?;
    let mut rng = seeded(5);
    let data: Vec<bool> = (0..5000).map(|_| rng.random()).collect();

    let mut post = Posterior::new(&family);
    let mut flips = 0;
    let mut leader = TheoryIndex(0);
    for t in 0..data.len() {
        post.update(&family, &data[..t], &data[t])?;
        let m = post.mass(TheoryIndex(0));
        let now = if m > 0.99 {
            TheoryIndex(0)
        } else if m < 0.01 {
            TheoryIndex(2)
        } else {
            leader
        };
        if now != leader {
            flips += 1;
            leader = now;
        }
        if (t + 1) % 500 == 0 {
            let ratio = post.log_mass(TheoryIndex(0)) - post.log_mass(TheoryIndex(2));
            println!(
                "t={:>4}  p(tau_0.7)={:.4}  log ratio {:>8.3}  walk {:>8.3}",
                t + 1,
                m,
                ratio,
                walk_statistic(p, &data[..=t])
            );
        }
    }
    println!("confident switches between the two wrong coins: {flips}");
    Ok(())
}
