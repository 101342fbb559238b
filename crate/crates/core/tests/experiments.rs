use modadc::experiment::{
    run_experiment1, run_experiment2, run_pipeline, run_table1, ExperimentConfig, FoldMode, TABLE1_SETTINGS,
};

#[test]
fn modulo_branch_wins_every_amplitude_row() {
    let r = run_experiment1(&ExperimentConfig::default()).unwrap();
    assert_eq!(r.rows.len(), 8);
    for row in &r.rows {
        assert!(row.enob_usf > row.enob_conv, "{row:?}");
    }
    for bits in [6, 8, 10, 12] {
        let d = r.row(8.0, bits).unwrap().sinad_gain_db - r.row(4.0, bits).unwrap().sinad_gain_db;
        assert!((d - 6.02).abs() <= 1.5, "B={bits}: {d}");
    }
    for rho in [4.0, 8.0] {
        let e: Vec<f64> = [8, 10, 12].iter().map(|&b| r.row(rho, b).unwrap().enob_usf).collect();
        assert!(e.windows(2).all(|w| w[1] >= w[0]), "rho {rho}: {e:?}");
    }
}

#[test]
fn gain_tracks_twenty_log_alpha() {
    let r = run_experiment2(&ExperimentConfig::default()).unwrap();
    for row in &r.rows {
        let expected = 20.0 * row.alpha.log10();
        assert!((row.sinad_gain_db - expected).abs() <= 3.0, "{row:?}");
        assert_eq!(row.sinad_gain_db, row.sinad_usf_db - row.sinad_conv_db);
    }
}

#[test]
fn table_has_the_eight_settings_in_order() {
    let rows = run_table1(&ExperimentConfig::default()).unwrap();
    let got: Vec<(f64, f64)> = rows.iter().map(|r| (r.rho, r.alpha)).collect();
    assert_eq!(got, TABLE1_SETTINGS.to_vec());
    assert_eq!(rows[0].label, "rho8_alpha8_b8");
}

#[test]
fn circuit_mode_matches_ideal_gain() {
    let base = ExperimentConfig {
        rho: 4.0,
        sample_rate_hz: 20_000.0,
        ..Default::default()
    };
    let ideal = run_pipeline(&base).unwrap().row;
    let circuit = run_pipeline(&ExperimentConfig {
        mode: FoldMode::Circuit,
        ..base
    })
    .unwrap();
    assert!(
        (circuit.row.sinad_gain_db - ideal.sinad_gain_db).abs() <= 3.0,
        "{:?} vs {ideal:?}",
        circuit.row
    );
}

#[test]
fn noise_lowers_both_branches() {
    let clean = run_pipeline(&ExperimentConfig::default()).unwrap().row;
    let noisy = run_pipeline(&ExperimentConfig {
        noise_sigma_v: 0.01,
        seed: 5,
        ..Default::default()
    })
    .unwrap()
    .row;
    assert!(noisy.sinad_conv_db < clean.sinad_conv_db);
    assert!(noisy.sinad_usf_db < clean.sinad_usf_db);
}
