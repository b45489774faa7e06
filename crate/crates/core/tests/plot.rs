use kipp_core::classify::fit_disc;
use kipp_core::generators::jordan_shift;
use kipp_core::plot::{render_svg, Layer, PlotSpec, SVG_HEADER};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/j2_circle.svg");

fn j2_render() -> String {
    let a = jordan_shift(2).unwrap();
    let fit = fit_disc(&a, 240).unwrap();
    let spec = PlotSpec {
        width: 200,
        height: 200,
        samples: 24,
        layers: vec![Layer::Boundary, Layer::Eigenvalues, Layer::FittedDisc],
    };
    render_svg(&a, &spec, Some(&fit)).unwrap()
}

#[test]
fn j2_circle_matches_golden() {
    let svg = j2_render();
    if std::env::var_os("KIPP_BLESS").is_some() {
        std::fs::write(GOLDEN, &svg).unwrap();
    }
    let golden = std::fs::read_to_string(GOLDEN).unwrap();
    assert_eq!(svg, golden);
}

#[test]
fn render_is_well_formed() {
    let svg = j2_render();
    assert!(svg.starts_with(SVG_HEADER));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("id=\"boundary\"") && svg.contains("id=\"disc\""));
    assert!(!svg.contains("id=\"curve\""));
}

#[test]
fn invalid_spec_is_rejected() {
    let a = jordan_shift(2).unwrap();
    let spec = PlotSpec {
        layers: vec![],
        ..PlotSpec::default()
    };
    assert!(render_svg(&a, &spec, None).is_err());
}
