//! The two-query and implicit members of the family, traced on the flat
//! line where every update can be checked by hand against f(x) = x^2/2:
//!
//! * extragradient: probe step, then a step along the gradient at the probe;
//! * optimistic gradient: like extragradient, but the probe reuses the
//!   previous iteration's oracle draw instead of paying a second query;
//! * proximal point: solves the implicit update x+ = x - gamma * x+ with an
//!   inner Picard iteration (two-cycle averaged at gamma = 1, where the
//!   plain iteration oscillates).
//!
//! ```text
//! cargo run --example two_step_methods
//! ```

use rrm::methods::{step_rog, step_rppm, step_rseg, MethodState};
use rrm::oracles::NoiseModel;
use rrm::{BuiltinObjective, Manifold, Stream};

fn main() {
    let m = Manifold::euclidean(1).unwrap();
    let f = BuiltinObjective::Quadratic {
        a: vec![0.5],
        b: vec![0.0],
    };
    let silent = NoiseModel::UniformSphereFrame { sigma: 0.0 };

    // extragradient from x = 1 with gamma = 0.5:
    // probe = 1 - 0.5*1 = 0.5, next = 1 - 0.5*0.5 = 0.75
    let mut state = MethodState::new(m.point(vec![1.0]).unwrap());
    step_rseg(&m, &f, &mut state, &silent, &mut Stream::new(1), 0.5).unwrap();
    println!("extragradient:      1 -> {}", state.current.coords[0]);

    // optimistic gradient bootstraps its stale draw at x and matches here
    let mut state = MethodState::new(m.point(vec![1.0]).unwrap());
    step_rog(&m, &f, &mut state, &silent, &mut Stream::new(2), 0.5).unwrap();
    println!(
        "optimistic:         1 -> {}   (leader was {})",
        state.current.coords[0],
        state.previous_leader.as_ref().unwrap().coords[0]
    );

    // implicit proximal point solves x+ = x/(1 + gamma)
    for gamma in [0.5, 1.0] {
        let mut state = MethodState::new(m.point(vec![1.0]).unwrap());
        let rec = step_rppm(&m, &f, &mut state, &silent, &mut Stream::new(3), gamma, 50, 1e-12)
            .unwrap();
        println!(
            "proximal gamma={gamma}: 1 -> {}   (exact {}, inner converged: {})",
            state.current.coords[0],
            1.0 / (1.0 + gamma),
            !rec.non_contractive
        );
    }

    // ten optimistic iterations, watching the stale-gradient leader trail
    // the iterate
    println!("\noptimistic descent trace (gamma = 0.3):");
    let mut state = MethodState::new(m.point(vec![1.0]).unwrap());
    let mut stream = Stream::new(4);
    println!("{:>4} {:>12} {:>12}", "n", "x", "leader");
    for n in 1..=10 {
        step_rog(&m, &f, &mut state, &silent, &mut stream, 0.3).unwrap();
        println!(
            "{n:>4} {:>12.6} {:>12.6}",
            state.current.coords[0],
            state.previous_leader.as_ref().unwrap().coords[0]
        );
    }
}
