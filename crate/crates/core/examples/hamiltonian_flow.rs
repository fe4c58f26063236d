//! Integrate the continuous-time Adam and AdamO flows on a quadratic and track
//! the energy `H` against its dissipation and budget terms.

use collapse_lab::dynamics::{budget_integral_check, integrate_hamiltonian, Objective, OdeConfig, OdeState, Quadratic};
use collapse_lab::network::ParamLayout;
use collapse_lab::optim::OrthConfig;
use collapse_lab::rng;

fn main() -> collapse_lab::Result<()> {
    let r = &mut rng::seeded(11);
    let z = rng::normal_matrix(r, 6, 6);
    let obj = Quadratic { a: z.t_matmul(&z).scale(0.2), b: rng::normal_vec(r, 6) };
    let layout = ParamLayout::sequential(&[("W", 3, 2, true)]);
    let cfg = OdeConfig { beta1: 0.9, beta2: 0.999, eps: 1e-8 };

    let w0 = rng::normal_vec(r, 6);
    let mut start = OdeState::new(w0.clone());
    start.v = obj.grad(&w0).iter().map(|g| g * g).collect();

    let budgeted = OrthConfig::budgeted();
    let runs = [("adam", None), ("adamo", Some((&budgeted, &layout)))];
    for (name, orth) in runs {
        let (end, trace) = integrate_hamiltonian(&obj, &cfg, orth, start.clone(), 1e-3, 3000)?;
        let first = &trace.points[0];
        let last = trace.points.last().unwrap();
        println!(
            "{name:>5}: H {:.5} -> {:.5}  L(end) {:.5}  max dH/dt {:+.2e}  slack {:+.2e}",
            first.h,
            last.h,
            obj.loss(&end.w),
            trace.max_rise_rate(),
            budget_integral_check(&trace)
        );
    }
    Ok(())
}
