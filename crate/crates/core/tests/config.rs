use proptest::prelude::*;
use qarbench::dynamics::ModelKind;
use qarbench::experiments::{ConfigError, ExperimentConfig, GridSpec, Scale, Study};
use qarbench::model::CouplingKind;

#[test]
fn defaults_survive_a_round_trip() {
    let cfg = ExperimentConfig::default();
    assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    for study in Study::ALL {
        let p = study.preset();
        let mut q = ExperimentConfig::default();
        q.apply(&p.to_text()).unwrap();
        assert_eq!(q, p);
    }
}

#[test]
fn parses_comments_lists_and_grids() {
    let text = "\
# cooling-window style scan
T_c = 1          # cold bath
hamiltonian = resonant
model = local, global
delta_t = 0.5
grid.T_w.min = 1
grid.T_w.max = 50
grid.T_w.scale = log
";
    let cfg = ExperimentConfig::parse(text).unwrap();
    assert_eq!(cfg.hamiltonians, vec![CouplingKind::Resonant]);
    assert_eq!(cfg.models, vec![ModelKind::Local, ModelKind::Global]);
    assert_eq!(cfg.delta_t, Some(0.5));
    let tw = cfg.grid("T_w", GridSpec::linear(2.0, 3.0, 40)).unwrap();
    assert_eq!(tw, GridSpec { min: 1.0, max: 50.0, count: 40, scale: Scale::Log });
    let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_text(), cfg.to_text());
}

#[test]
fn unknown_keys_are_named() {
    for key in ["omega_x", "grid.q.min", "grid.g.step", "grid.g", "T_hot"] {
        let err = ExperimentConfig::parse(&format!("{key} = 1")).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey(key.into()));
        assert!(err.to_string().contains(key));
    }
}

#[test]
fn malformed_values_are_reported_with_their_key() {
    let cases = [
        ("chi = fast", "chi"),
        ("T_h = -1", "T_h"),
        ("g = -0.1", "g"),
        ("model = quantum", "model"),
        ("hamiltonian = ", "hamiltonian"),
        ("seed = -3", "seed"),
        ("panels = 1, 0", "panels"),
        ("grid.g.scale = cubic", "grid.g.scale"),
    ];
    for (text, key) in cases {
        match ExperimentConfig::parse(text) {
            Err(ConfigError::InvalidValue { key: k, .. }) => assert_eq!(k, key, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(ExperimentConfig::parse("chi 0.1"), Err(ConfigError::Syntax { line: 1, .. })));
}

#[test]
fn grid_invariants_are_checked_on_use() {
    let cfg = ExperimentConfig::parse("grid.g.count = 1").unwrap();
    let err = cfg.grid("g", GridSpec::log(1e-3, 1.0, 60)).unwrap_err();
    assert!(err.to_string().contains("grid.g.count"));
    let cfg = ExperimentConfig::parse("grid.kappa.min = 0").unwrap();
    assert!(cfg.grid("kappa", GridSpec::log(1e-3, 1.0, 50)).is_err());
    assert!(cfg.grid("kappa", GridSpec::linear(1e-3, 1.0, 50)).is_ok());
}

#[test]
fn grid_points_hit_both_endpoints() {
    let g = GridSpec::log(1e-3, 1.0, 60).points();
    assert_eq!(g.len(), 60);
    assert_eq!((g[0], g[59]), (1e-3, 1.0));
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(GridSpec::linear(0.1, 0.7, 4).points().len(), 4);
    assert!((GridSpec::linear(0.1, 0.7, 4).points()[1] - 0.3).abs() < 1e-15);
}

fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
    (
        (0.1f64..20.0, 0.1f64..20.0, 0.1f64..20.0, 0.0f64..2.0, 1e-4f64..0.5),
        (0.1f64..50.0, 0.1f64..50.0, 0.1f64..50.0, proptest::option::of(0.01f64..10.0)),
        (any::<u64>(), 1usize..5000, proptest::collection::vec(0.5f64..10.0, 1..7)),
        (proptest::sample::subsequence(vec![0usize, 1, 2], 1..=3), any::<bool>()),
        proptest::option::of((1e-4f64..1.0, 2usize..200, any::<bool>())),
    )
        .prop_map(|((wh, wc, ww, g, chi), (th, tc, tw, dt), (seed, samples, panels), (models, res), grid)| {
            let mut cfg = ExperimentConfig {
                omega_h: wh,
                omega_c: wc,
                omega_w: ww,
                g,
                chi,
                t_hot: th,
                t_cold: tc,
                t_work: tw,
                delta_t: dt,
                hamiltonians: if res {
                    vec![CouplingKind::Resonant, CouplingKind::Xxx]
                } else {
                    vec![CouplingKind::Xxx]
                },
                models: models.into_iter().map(|i| ModelKind::ALL[i]).collect(),
                seed,
                samples,
                panels,
                ..Default::default()
            };
            if let Some((min, count, log)) = grid {
                cfg.set("grid.g.min", &min.to_string()).unwrap();
                cfg.set("grid.g.count", &count.to_string()).unwrap();
                cfg.set("grid.g.scale", if log { "log" } else { "linear" }).unwrap();
            }
            cfg
        })
}

proptest! {
    #[test]
    fn serialisation_is_idempotent(cfg in config_strategy()) {
        let text = cfg.to_text();
        let parsed = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_text(), text);
    }
}
