//! Compares the harm bounds on a hand-built posterior.

use cautious::bounds::{
    cautious_bound, cheating_bound, iid_cautious_bound, posterior_predictive, weak_bound, HarmProfile,
};
use cautious::posterior::Posterior;
use cautious::theory::{BernoulliFamily, TheoryIndex};

fn main() -> cautious::Result<()> {
    // five coins, data leaning towards the middle one
    let family = BernoulliFamily::uniform(vec![0.2, 0.35, 0.5, 0.65, 0.8])?;
    let data = [true, false, true, false, false, true, true, false, true, false];
    let mut post = Posterior::new(&family);
    post.update_all(&family, &data)?;

    let harm = HarmProfile::new(vec![0.9, 0.1, 0.4, 0.7, 0.2])?;
    let truth = TheoryIndex(2);
    println!("posterior {:?}", post.masses().iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>());
    println!("harm      {:?}", harm.values());

    let iid = iid_cautious_bound(&post, &harm);
    println!("iid cautious         {:.4}  witness {:?}", iid.value, iid.witness.first());
    println!("weak (delta=0.1)     {:.4}", weak_bound(&post, &harm, 0.1, 0.2).value);
    for alpha in [1e-6, 0.01, 0.1, 0.5, 1.0] {
        println!("cautious alpha={alpha:<6} {:.4}", cautious_bound(&post, &harm, alpha).value);
    }
    println!("posterior predictive {:.4}", posterior_predictive(&post, &harm).value);
    println!("cheating             {:.4}", cheating_bound(&harm, truth).value);
    Ok(())
}
