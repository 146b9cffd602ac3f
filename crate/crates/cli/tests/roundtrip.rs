use proptest::prelude::*;
use quermass_cli::{Mode, RunConfig};
use quermass_core::{FlowConfig, FlowKind, ShapeSpec};

fn shape() -> impl Strategy<Value = ShapeSpec> {
    prop_oneof![
        prop::collection::vec((0usize..8, -2i64..=2, -0.1f64..0.1), 0..4)
            .prop_map(|m| ShapeSpec::harmonic(m.into_iter().map(|(l, m, a)| (l + 2, m, a)).collect())),
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(a, c)| ShapeSpec::spheroid(a, c)),
        (0usize..4, 4usize..10, 0.01f64..0.3).prop_map(|(a, b, c)| ShapeSpec::random_band(a, b, c)),
        (-0.3f64..0.3, -0.3f64..0.3).prop_map(|(x, z)| ShapeSpec::translated_ball([x, 0.0, z])),
    ]
}

proptest! {
    #[test]
    fn config_survives_write_and_reread(
        shape in shape(),
        symmetrize: bool,
        vp: bool,
        t_end in 0.0f64..10.0,
        alpha in 1.0f64..3.0,
        pinching in prop::option::of(0.0f64..1.0),
        seed: u64,
        svg: bool,
        lat in 4usize..64,
    ) {
        let mut cfg = RunConfig::new(Mode::Flow);
        cfg.shape = Some(shape.symmetrized(symmetrize));
        cfg.flow = Some(FlowConfig {
            kind: if vp { FlowKind::VolumePreserving } else { FlowKind::Inverse },
            t_end,
            alpha,
            pinching,
            ..Default::default()
        });
        cfg.seed = seed;
        cfg.emit_svg = svg;
        cfg.grid = (2 * lat, 4 * lat);
        let text = cfg.to_json();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}
