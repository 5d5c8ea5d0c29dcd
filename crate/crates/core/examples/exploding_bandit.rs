//! A single guarded episode of the exploding bandit, step by step.

use cautious::bandit::{boltzmann_policy, estimate_explosion_threshold, BanditInstance, Episode};
use cautious::guardrails::{admissible_mask, evaluate_all, GuardrailConfig, GuardrailKind};
use cautious::rng::seeded;

fn main() -> cautious::Result<()> {
    let mut rng = seeded(2024);
    let threshold = estimate_explosion_threshold(10, 10, 100_000, &mut rng);
    let instance = BanditInstance::sample(10, 10, threshold, &mut rng)?;
    println!("E = {threshold:.4}, v* = {:010b}", instance.v_star());
    println!(
        "true harm per arm: {}",
        (0..10).map(|a| format!("{:.3}", instance.true_harm(a))).collect::<Vec<_>>().join(" ")
    );

    let guardrail = GuardrailConfig::new(GuardrailKind::CautiousSet { alpha: 0.1 }, 0.1)?;
    let mut ep = Episode::new(instance, 25, true);
    while !ep.is_over() {
        let decisions = evaluate_all(&guardrail, ep.posterior(), ep.instance());
        let mask = admissible_mask(&decisions);
        let Ok(policy) = boltzmann_policy(ep.posterior(), ep.instance(), &mask, 2.0) else {
            println!("t={:>2}  every arm rejected, episode ends", ep.t());
            break;
        };
        let arm = policy.sample(&mut rng);
        let out = ep.step(arm, &mut rng)?;
        println!(
            "t={:>2}  allowed {:>2}/10  arm {}  bound {:.3}  reward {:>6.3}{}",
            ep.t(),
            mask.iter().filter(|&&m| m).count(),
            arm,
            decisions[arm].statistic,
            out.reward,
            if out.harmed { "  EXPLODED" } else { "" }
        );
    }
    println!("total reward {:.3}, alive: {}", ep.total_reward(), ep.alive());
    Ok(())
}
