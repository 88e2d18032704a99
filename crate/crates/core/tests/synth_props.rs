use dyadrec::metrics::{degree_assortativity, AssortativityMode};
use dyadrec::synth::{
    calibrate_dispersion, generate, mean_h_star, DegreeDistribution, SynthConfig,
};

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn dispersion_drives_mean_h_star() {
    let dispersions: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
    let h: Vec<f64> = dispersions
        .iter()
        .map(|&d| {
            let cfg = SynthConfig {
                vertex_count: 1000,
                dispersion: d,
                seed: 3,
                ..SynthConfig::default()
            };
            mean_h_star(&generate(&cfg).unwrap().graph)
        })
        .collect();
    let rho = spearman(&dispersions, &h);
    assert!(rho > 0.9, "spearman {rho}, mean H* {h:?}");
}

#[test]
fn default_power_law_hits_target_assortativity() {
    let out = generate(&SynthConfig::default()).unwrap();
    let r = degree_assortativity(&out.graph, AssortativityMode::MutualBackbone)
        .unwrap()
        .r;
    assert!((0.28..=0.38).contains(&r), "r = {r}");
    assert_eq!(out.graph.vertex_count(), 5000);
    let c = out.graph.dyad_census();
    assert_eq!(c.asymmetric, 0);
    assert!(out.graph.has_integer_weights());
}

#[test]
fn negative_targets_work_too() {
    let cfg = SynthConfig {
        vertex_count: 2000,
        degree_distribution: DegreeDistribution::Poisson { mean: 6.0 },
        target_assortativity: -0.2,
        ..SynthConfig::default()
    };
    let out = generate(&cfg).unwrap();
    let r = degree_assortativity(&out.graph, AssortativityMode::MutualBackbone)
        .unwrap()
        .r;
    assert!((r + 0.2).abs() < 0.02, "r = {r}");
}

#[test]
fn calibration_lands_near_target() {
    let cfg = SynthConfig {
        vertex_count: 2000,
        seed: 4,
        ..SynthConfig::default()
    };
    let out = calibrate_dispersion(&cfg, 0.3, 16).unwrap();
    let h = mean_h_star(&out.graph);
    assert!((h - 0.3).abs() < 0.02, "mean H* {h}");
}

#[test]
fn config_reads_from_partial_json() {
    let cfg: SynthConfig = serde_json::from_str(
        r#"{"vertex_count": 300, "degree_distribution": {"kind": "poisson", "mean": 4.0}}"#,
    )
    .unwrap();
    assert_eq!(cfg.vertex_count, 300);
    assert_eq!(
        cfg.degree_distribution,
        DegreeDistribution::Poisson { mean: 4.0 }
    );
    assert_eq!(
        cfg.target_assortativity,
        SynthConfig::default().target_assortativity
    );
}
