use optosync::integrator::IntegrationPlan;
use optosync::io::config::{parse_rate, to_document};
use optosync::io::svg::{portrait_panel, sync_error_panels, Panel, Series, Style};
use optosync::io::{parse_config, read_csv, render_svg, serialize_config, write_csv};
use optosync::scenarios::execute;
use optosync::{preset, Error, ScenarioConfig, Trajectory, PRESET_NAMES};
use proptest::prelude::*;

#[test]
fn every_preset_survives_serialization() {
    for name in PRESET_NAMES {
        let c: ScenarioConfig = preset(name).unwrap();
        let text = serialize_config(&c);
        let back = parse_config(&text).unwrap();
        assert_eq!(back, c, "{name}");
        assert_eq!(serialize_config(&back), text, "{name}");
    }
}

#[test]
fn unit_prefixes_agree_exactly() {
    assert_eq!(parse_rate("0.346 GHz").unwrap(), parse_rate("346 MHz").unwrap());
    assert_eq!(
        parse_rate("0.346 GHz").unwrap(),
        parse_rate("346000 kHz").unwrap()
    );
    assert_eq!(parse_rate("2.8 MHz").unwrap(), parse_rate("0.0028 GHz").unwrap());
}

#[test]
fn missing_mechanical_frequency_is_named() {
    let c: ScenarioConfig = preset("fig7").unwrap();
    let mut doc = to_document(&c);
    doc.rates.remove("omega_m");
    let text = serde_json::to_string_pretty(&doc).unwrap();
    match parse_config(&text) {
        Err(Error::Validation { field, .. }) => assert!(field.contains("omega"), "{field}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_documents_report_position_or_field() {
    match parse_config("{\n  \"name\": \"x\",\n  oops\n}") {
        Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let c: ScenarioConfig = preset("fig7").unwrap();
    let text = serialize_config(&c).replace("\"g_w\": \"25.2 MHz\"", "\"g_w\": \"-25.2 MHz\"");
    match parse_config(&text) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "rates.g_w"),
        other => panic!("{other:?}"),
    }
    let text = serialize_config(&c).replace("\"name\"", "\"nmae\"");
    assert!(matches!(parse_config(&text), Err(Error::Validation { .. })));
}

fn trajectory(rows: &[[f64; 3]]) -> Trajectory {
    let times = (0..rows.len()).map(|i| i as f64 * 0.25).collect();
    let data = rows.iter().flatten().copied().collect();
    let channels = ["re_alpha_s", "im_alpha_s", "u"].map(String::from).to_vec();
    Trajectory::from_parts(times, data, channels, IntegrationPlan::new(0.0, 1.0, 0.25)).unwrap()
}

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform3(any_finite()), 0..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = trajectory(&rows);
        write_csv(&t, None, &path).unwrap();
        let (header, back) = read_csv(&path).unwrap();
        prop_assert_eq!(header, vec!["t_ns", "re_alpha_s", "im_alpha_s", "u"]);
        prop_assert_eq!(back.len(), rows.len());
        for (i, (r, b)) in rows.iter().zip(&back).enumerate() {
            prop_assert_eq!(b[0].to_bits(), t.times()[i].to_bits());
            for k in 0..3 {
                prop_assert_eq!(b[k + 1].to_bits(), r[k].to_bits());
            }
        }
    }
}

#[test]
fn csv_line_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.csv");
    write_csv(&trajectory(&[[1.0, 2.0, 3.0]; 3]), None, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));

    let path = dir.path().join("empty.csv");
    write_csv(&trajectory(&[]), None, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "t_ns,re_alpha_s,im_alpha_s,u\n"
    );
}

#[test]
fn csv_selects_channels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let only = vec!["u".to_string()];
    write_csv(&trajectory(&[[1.0, 2.0, 3.0]]), Some(&only), &path).unwrap();
    assert_eq!(
        read_csv(&path).unwrap(),
        (vec!["t_ns".into(), "u".into()], vec![vec![0.0, 3.0]])
    );
    let bad = vec!["w".to_string()];
    assert!(write_csv(&trajectory(&[[1.0, 2.0, 3.0]]), Some(&bad), &path).is_err());
}

#[test]
fn sync_run_gives_a_two_panel_error_plot() {
    let c: ScenarioConfig = preset::<f64>("fig4_g1").unwrap().with_duration(20.0);
    let run = execute(&c).unwrap();
    let panels = sync_error_panels(&run.sync_errors[0], "fig4_g1");
    assert_eq!(panels.len(), 2);
    let svg = render_svg(&panels, &Style::default()).unwrap();
    assert!(svg.contains("amplitude error"));
    assert!(svg.contains("phase error"));
    assert_eq!(svg, render_svg(&panels, &Style::default()).unwrap());

    let portrait = portrait_panel(&run.trajectory, "re_alpha_1", "im_alpha_1", "u").unwrap();
    let a = render_svg(std::slice::from_ref(&portrait), &Style::default()).unwrap();
    assert_eq!(a, render_svg(&[portrait], &Style::default()).unwrap());
}

#[test]
fn single_point_plot_has_one_marker() {
    let p = Panel {
        series: vec![Series::scatter("p", vec![3.0], vec![-1.0])],
        ..Default::default()
    };
    let svg = render_svg(&[p], &Style::default()).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
}
