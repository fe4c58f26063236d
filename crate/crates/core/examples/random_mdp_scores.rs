//! Exact returns and normalized scores on random MDPs.

use collapse_lab::envlab::{gen_random_mdp, normalized_score, optimal_actions, policy_return, Policy, ScoreRefs};

fn main() -> collapse_lab::Result<()> {
    println!("{:>4} {:>10} {:>10} {:>10}", "seed", "random", "expert", "eps=0.3");
    for seed in 0..5 {
        let mdp = gen_random_mdp(seed, 8, 4, 6, 0.9)?;
        let refs = ScoreRefs::for_mdp(&mdp)?;
        let noisy = Policy::epsilon_greedy(&optimal_actions(&mdp)?, 4, 0.3);
        let score = normalized_score(policy_return(&mdp, &noisy)?, &refs);
        println!("{seed:>4} {:>10.4} {:>10.4} {score:>10.2}", refs.r_random, refs.r_expert);
    }
    Ok(())
}
