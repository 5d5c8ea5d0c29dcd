//! Two theories that differ only in the first symbol. Seeing a 1 first sends
//! the truth's posterior to `delta p / (delta p + 1 - p)` and it never recovers.

use cautious::oracles::first_symbol_posterior;
use cautious::posterior::Posterior;
use cautious::rng::seeded;
use cautious::theory::{FirstSymbolFamily, Generative};

fn main() -> cautious::Result<()> {
    let delta = 0.2;
    let family = FirstSymbolFamily::new(delta, 0.5)?;
    let mut rng = seeded(3);

    let draws = 10_000;
    let ones = (0..draws)
        .filter(|_| family.sample_next(FirstSymbolFamily::TRUTH, &[], &mut rng))
        .count();
    println!("truth emits a leading 1 in {ones}/{draws} draws (delta = {delta})");

    for first in [false, true] {
        let mut data = vec![first];
        data.extend(family.sample_sequence(FirstSymbolFamily::TRUTH, 50, &mut rng).into_iter().skip(1));
        let mut post = Posterior::new(&family);
        post.update_all(&family, &data)?;
        println!(
            "leading {}: posterior(truth) after {} symbols = {:.6}",
            first as u8,
            data.len(),
            post.mass(FirstSymbolFamily::TRUTH)
        );
    }
    println!("closed form after a leading 1: {:.6}", first_symbol_posterior(delta, 0.5));
    Ok(())
}
