//! Tour of the geometry kernels: exponential and log maps, parallel
//! transport, distances, retractions and the second-order geodesic offset,
//! on the sphere and the embedded torus.
//!
//! ```text
//! cargo run --example geodesic_toolbox
//! ```

use rrm::{Manifold, RetractionKind, Stream, Tangent};

fn main() {
    let sphere = Manifold::sphere(3).unwrap();
    let x = sphere.point(vec![1.0, 0.0, 0.0]).unwrap();
    let v = sphere
        .tangent(&x, vec![0.0, std::f64::consts::FRAC_PI_2, 0.0])
        .unwrap();

    let y = sphere.exp_map(&x, &v).unwrap();
    println!("sphere exp_x(pi/2 e2)      = {:?}", y.coords);
    let back = sphere.log_map(&x, &y).unwrap();
    println!("log recovers the velocity  = {:?}", back.vec);
    println!("distance x -> y            = {}", sphere.dist(&x, &y).unwrap());

    let w = sphere.tangent(&x, vec![0.0, 0.3, 0.0]).unwrap();
    let moved = sphere.transport(&x, &y, &w).unwrap();
    println!("transported (0, 0.3, 0)    = {:?} (norm preserved)", moved.vec);

    let r = sphere
        .retract(&x, &sphere.tangent(&x, vec![0.0, 1.0, 0.0]).unwrap(), RetractionKind::Projection)
        .unwrap();
    println!("projection retraction      = {:?}", r.coords);

    // the geodesic offset exp_x(v) - x - v is second order: the ratio
    // ||offset|| / t^2 stabilizes (at 1/2 on the unit sphere)
    println!("\nsphere offset ratios ||exp(tv)-x-tv||/t^2:");
    for t in [1e-1, 1e-2, 1e-3] {
        let tv = Tangent::new(x.clone(), vec![0.0, t, 0.0]);
        let off = sphere.geodesic_offset(&x, &tv).unwrap();
        println!("  t = {t:\u{2007}<5}: {:.6}", rrm::linalg::norm(&off) / (t * t));
    }

    // torus kernels run on a numeric geodesic integrator plus shooting
    let torus = Manifold::torus(2.0, 1.0).unwrap();
    let a = torus.point(vec![3.0, 0.0, 0.0]).unwrap();
    let b = torus.point(vec![1.0, 0.0, 0.0]).unwrap();
    println!("\ntorus distance (3,0,0)->(1,0,0) = {} (half a tube circle)", torus.dist(&a, &b).unwrap());

    let mut stream = Stream::new(7);
    let p = torus.random_point(&mut stream);
    let vel = torus.random_tangent(&p, 0.4, &mut stream);
    let q = torus.exp_map(&p, &vel).unwrap();
    let rec = torus.log_map(&p, &q).unwrap();
    let err = rrm::linalg::norm(&rrm::linalg::sub(&rec.vec, &vel.vec));
    println!("torus exp/log roundtrip error   = {err:.2e}");
    let carried = torus.transport(&p, &q, &vel).unwrap();
    println!(
        "transport isometry drift        = {:.2e}",
        (torus.norm(&carried) - torus.norm(&vel)).abs()
    );
}
