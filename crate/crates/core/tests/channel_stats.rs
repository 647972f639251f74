use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hpsim::channel::generate_channel;
use hpsim::{Channel, SystemConfig};

fn unit_fading(n_tx: usize, n_users: usize, n_paths: usize) -> SystemConfig {
    SystemConfig {
        n_tx,
        n_users,
        n_rf: n_users,
        n_paths,
        d_min_m: 1.0,
        d_max_m: 1.0,
        ..Default::default()
    }
}

#[test]
fn mean_channel_energy_is_array_size() {
    let cfg = unit_fading(16, 2, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let draws = 10_000;
    let mut total = 0.0;
    for _ in 0..draws {
        let ch: Channel = generate_channel(&cfg, &mut rng).unwrap();
        assert!(ch.large_scale.iter().all(|&x| x == 1.0));
        total += ch.h.frobenius_norm_sq();
    }
    let per_user = total / (draws * cfg.n_users) as f64;
    assert!((per_user / cfg.n_tx as f64 - 1.0).abs() < 0.03, "{per_user}");
}

#[test]
fn path_variances_scale_energy() {
    let mut cfg = unit_fading(8, 1, 2);
    cfg.path_gain_var = vec![3.0, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 10_000;
    let total: f64 = (0..draws)
        .map(|_| {
            let ch: Channel = generate_channel(&cfg, &mut rng).unwrap();
            ch.h.frobenius_norm_sq()
        })
        .sum();
    // N_T / L * (3 + 1) = 16
    let mean = total / draws as f64;
    assert!((mean / 16.0 - 1.0).abs() < 0.03, "{mean}");
}

#[test]
fn path_loss_follows_distance() {
    let cfg = SystemConfig {
        n_tx: 8,
        n_rf: 4,
        n_users: 4,
        n_paths: 2,
        ..Default::default()
    };
    let ch: Channel = generate_channel(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    for (d, xi) in ch.distances_m.iter().zip(&ch.large_scale) {
        assert_eq!(*xi, d.powf(-4.6));
    }
}
