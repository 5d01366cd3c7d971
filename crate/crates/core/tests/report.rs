use std::collections::BTreeMap;

use spinboson::report::SpectrumReport;
use spinboson::*;

fn tc_doublet_report() -> SpectrumReport {
    let params: BTreeMap<String, f64> = [("w", 1.0), ("g_prime", 1.0), ("g", 0.1)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let model = preset(PresetName::TavisCummings, &params).unwrap();
    let sectors = enumerate_sectors(&model, Rational::half(1), 2).unwrap();
    let solved = solve_sectors(&model, &sectors, SolveOptions::default(), Exec::Sequential);
    let pairs = sectors.into_iter().zip(solved.into_iter().map(|r| r.unwrap())).collect();
    SpectrumReport::from_solved(pairs)
}

#[test]
fn json_round_trip_is_byte_identical() {
    let report = tc_doublet_report();
    let text = report.to_json();
    let parsed = SpectrumReport::from_json(&text).unwrap();
    assert_eq!(parsed, report);
    assert_eq!(parsed.to_json(), text);
}

#[test]
fn json_has_the_documented_shape() {
    let value: serde_json::Value = serde_json::from_str(&tc_doublet_report().to_json()).unwrap();
    let sector = &value["sectors"][1];
    assert_eq!(sector["labels"]["kappa"], "3/4");
    let state = &sector["states"][0];
    for key in ["E", "roots", "residual", "verified", "degenerate"] {
        assert!(state.get(key).is_some(), "missing {key}");
    }
    assert!((state["E"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(state["roots"][0].as_array().unwrap().len(), 2);
}

#[test]
fn csv_has_one_row_per_state() {
    let report = tc_doublet_report();
    let states: usize = report.sectors.iter().map(|s| s.states.len()).sum();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "j");
    assert!(headers.iter().any(|h| h == "kappa") && headers.iter().any(|h| h == "E"));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), states);
    let kappa = headers.iter().position(|h| h == "kappa").unwrap();
    assert_eq!(&rows[1][kappa], "3/4");
    assert_eq!(&rows[2][kappa], "3/4");
}

#[test]
fn infinite_residual_survives_json() {
    let mut report = tc_doublet_report();
    report.sectors[0].states[0].residual = None;
    let text = report.to_json();
    assert_eq!(SpectrumReport::from_json(&text).unwrap().to_json(), text);
}
