#![allow(dead_code)]

use std::path::{Path, PathBuf};

use airborne::write_csv;
use airborne_core::simulate::generate_replication;
use airborne_core::{Dataset, SyntheticConfig};

pub const FIRST_YEAR: i32 = 1959;

/// 64 years of errors-in-variables data laid out like the real file: the
/// three LULCC columns carry independent measurement errors around 1 GtC/yr.
pub fn synthetic_dataset(seed: u64) -> Dataset {
    let cfg = SyntheticConfig {
        t: 64,
        alpha_true: 0.45,
        gamma_true: Some((0.2, -0.6)),
        sigma_eta: 0.3,
        sigma_kappa: 0.3,
        seed,
        ..SyntheticConfig::default()
    };
    let a = generate_replication(&cfg, 0).unwrap();
    let b = generate_replication(&cfg, 1).unwrap();
    let lulcc = 1.0;
    let years: Vec<i32> = (FIRST_YEAR..FIRST_YEAR + 64).collect();
    let col = |name: &str, v: Vec<f64>| (name.to_string(), v);
    Dataset::from_columns(
        &years,
        vec![
            col("co2_growth", a.g.to_vec()),
            col("emissions_ff", a.e_star.iter().map(|e| e - lulcc).collect()),
            col(
                "lulcc_gcp",
                a.e1.iter()
                    .zip(a.e_star.iter())
                    .map(|(m, e)| lulcc + m - e)
                    .collect(),
            ),
            col(
                "lulcc_hc",
                a.e2.iter()
                    .zip(a.e_star.iter())
                    .map(|(m, e)| lulcc + m - e)
                    .collect(),
            ),
            col(
                "lulcc_vma",
                b.e2.iter()
                    .zip(b.e_star.iter())
                    .map(|(m, e)| lulcc + m - e)
                    .collect(),
            ),
            col("enso", a.enso.to_vec()),
            col("vai", a.vai.iter().map(|v| v.abs()).collect()),
        ],
    )
    .unwrap()
}

pub fn write_dataset(data: &Dataset, dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    write_csv(data, std::fs::File::create(&path).unwrap()).unwrap();
    path
}
