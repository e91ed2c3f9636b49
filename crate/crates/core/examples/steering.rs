//! The fish's three behaviors side by side: wander inside its sphere,
//! pursue a still hand, flee from it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mrr::steering::{flee_step, pursue_step, wander_step};
use mrr::{BehaviorParams, FishState, GameConfig, Vec3};

fn main() {
    let cfg = GameConfig::default();
    let tank = cfg.tank_world();
    let p = BehaviorParams::default();
    let dt = cfg.dt();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let hand = Vec3::planar(0.2, 0.1);

    let mut w = FishState::at_rest(p.wander_center);
    let mut a = w;
    let mut f = w;
    println!("{:>5}  {:>22}  {:>10}  {:>10}", "t", "wander pos", "pursue d", "flee d");
    for k in 1..=240 {
        w = wander_step(&w, &p, &tank, &mut rng, dt);
        a = pursue_step(&a, hand, &p, &tank, dt);
        f = flee_step(&f, hand, &p, &tank, &mut rng, dt);
        if k % 30 == 0 {
            println!(
                "{:>5.2}  ({:.3}, {:.3}, {:.3})  {:>10.4}  {:>10.4}",
                k as f64 * dt,
                w.pos.x,
                w.pos.y,
                w.pos.z,
                a.pos.distance(hand),
                f.pos.distance(hand)
            );
        }
    }
    println!("wander stayed {:.4} m from the centre (radius {})", w.pos.distance(p.wander_center), p.wander_radius);
}
