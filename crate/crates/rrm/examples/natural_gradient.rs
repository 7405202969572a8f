//! Natural gradient descent on the positive orthant with the log-barrier
//! metric diag(1/x_i^2): coordinate updates preconditioned by G^{-1} = x^2.
//! The metric shrinks steps near the boundary, so the iterates stay interior
//! without any projection.
//!
//! ```text
//! cargo run --example natural_gradient
//! ```

use rrm::methods::{step_ngd, MethodState};
use rrm::oracles::NoiseModel;
use rrm::{BuiltinObjective, Manifold, Stream};

fn main() {
    let m = Manifold::log_barrier(2).unwrap();
    // f(x) = x1 + x2 pushes towards the origin; the barrier geometry slows
    // the march as the boundary approaches
    let f = BuiltinObjective::Linear { c: vec![1.0, 1.0] };
    let noise = NoiseModel::UniformSphereFrame { sigma: 0.02 };
    let mut state = MethodState::new(m.point(vec![2.0, 0.5]).unwrap());
    let mut stream = Stream::new(3);

    println!("{:>5} {:>22}", "step", "x");
    for n in 1..=2000u64 {
        let gamma = 0.2 / (n as f64).powf(0.6);
        step_ngd(&m, &f, &mut state, &noise, &mut stream, gamma).unwrap();
        if n % 250 == 0 || n == 1 {
            let x = &state.current.coords;
            println!("{n:>5} ({:.6}, {:.6})", x[0], x[1]);
        }
    }
    let x = &state.current.coords;
    assert!(x.iter().all(|xi| *xi > 0.0));
    println!("\niterates never left the open orthant: ({:.3e}, {:.3e})", x[0], x[1]);

    // the single-step hand value: f(x) = x on the half-line from x = 1 with
    // gamma = 0.1 lands exactly at 1 - 0.1 * (1^2 * 1) = 0.9
    let m1 = Manifold::log_barrier(1).unwrap();
    let f1 = BuiltinObjective::Linear { c: vec![1.0] };
    let mut s1 = MethodState::new(m1.point(vec![1.0]).unwrap());
    step_ngd(
        &m1,
        &f1,
        &mut s1,
        &NoiseModel::UniformSphereFrame { sigma: 0.0 },
        &mut Stream::new(0),
        0.1,
    )
    .unwrap();
    println!("one noiseless step from x = 1: {}", s1.current.coords[0]);
}
