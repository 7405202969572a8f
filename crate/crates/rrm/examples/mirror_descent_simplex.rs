//! Stochastic mirror descent on the probability simplex.
//!
//! Under the negative-entropy Legendre function the prox-mapping is the
//! multiplicative-weights update, and the whole scheme is a retraction-based
//! method for the Hessian metric diag(1/x_i): every step below also checks
//! itself against the prox retraction route. A linear cost drives the mass
//! onto the cheapest coordinate.
//!
//! ```text
//! cargo run --example mirror_descent_simplex
//! ```

use rrm::methods::{step_smd, MethodState};
use rrm::oracles::NoiseModel;
use rrm::Objective as _;
use rrm::{BuiltinObjective, Manifold, Stream};

fn main() {
    let m = Manifold::entropy_simplex(3).unwrap();
    let f = BuiltinObjective::Linear {
        c: vec![0.9, 0.1, 0.5],
    };
    let noise = NoiseModel::UniformSphereFrame { sigma: 0.05 };
    let mut state = MethodState::new(m.point(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap());
    let mut stream = Stream::new(99);

    println!("minimizing <c, x> with c = (0.9, 0.1, 0.5) over the simplex");
    println!("{:>5} {:>28} {:>10}", "step", "x", "<c,x>");
    for n in 1..=4000u64 {
        let gamma = 0.5 / (n as f64).powf(0.6);
        step_smd(&m, &f, &mut state, &noise, &mut stream, gamma).unwrap();
        if n % 500 == 0 || n == 1 {
            let x = &state.current.coords;
            println!(
                "{n:>5} ({:.4}, {:.4}, {:.4}) {:>10.4}",
                x[0],
                x[1],
                x[2],
                f.value(x)
            );
        }
    }
    let x = &state.current.coords;
    println!(
        "\nmass settles on coordinate 2 (cheapest): x = ({:.4}, {:.4}, {:.4})",
        x[0], x[1], x[2]
    );
    println!("sum of coordinates stays at {:.12}", x.iter().sum::<f64>());

    // the hand-checkable single step: from the midpoint of the 2-simplex a
    // dual step of (log 2, 0) moves the mass to (2/3, 1/3)
    let m2 = Manifold::entropy_simplex(2).unwrap();
    let x = m2.point(vec![0.5, 0.5]).unwrap();
    let p = m2.prox_mapping(&x, &[2.0f64.ln(), 0.0]).unwrap();
    println!("\nprox at (1/2,1/2) with dual (log 2, 0): ({:.6}, {:.6})", p.coords[0], p.coords[1]);
}
