use pidigits::counter::CountTable;
use pidigits::digitgen::Base;
use pidigits::report::{emit_table, render_band_plot, TableFormat, CSV_HEADER};
use pidigits::stats::{frequencies, sigma_bands, variance_row, VarianceRow};
use proptest::prelude::*;

fn row_strategy() -> impl Strategy<Value = VarianceRow> {
    (
        prop_oneof![Just(10u32), Just(16)],
        1u32..=3,
        1u64..u64::MAX / 2,
        1e-30f64..1.0,
        1e-30f64..1.0,
        0.0f64..1.0,
        -1e3f64..1e3,
    )
        .prop_map(|(b, k, w, ev, unc, ov, dev)| VarianceRow {
            base: Base::new(b).unwrap(),
            k,
            window_count: w,
            expected_var: ev,
            expected_var_unc: unc,
            observed_var: ov,
            deviation_sigma: dev,
        })
}

fn close_to_six_digits(parsed: f64, original: f64) -> bool {
    (parsed - original).abs() <= 5e-6 * original.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn csv_parses_back(rows in prop::collection::vec(row_strategy(), 1..6)) {
        let csv = emit_table(&rows, TableFormat::Csv).unwrap();
        let mut lines = csv.lines();
        prop_assert_eq!(lines.next(), Some(CSV_HEADER));
        let mut parsed = 0;
        for (line, row) in lines.zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(fields.len(), 7);
            prop_assert_eq!(fields[0].parse::<u32>().unwrap(), row.base.get() as u32);
            prop_assert_eq!(fields[1].parse::<u32>().unwrap(), row.k);
            prop_assert_eq!(fields[2].parse::<u64>().unwrap(), row.window_count);
            let values = [row.expected_var, row.expected_var_unc, row.observed_var, row.deviation_sigma];
            for (text, &value) in fields[3..].iter().zip(&values) {
                let back: f64 = text.parse().unwrap();
                prop_assert!(close_to_six_digits(back, value), "{} vs {}", text, value);
            }
            parsed += 1;
        }
        prop_assert_eq!(parsed, rows.len());

        let json: serde_json::Value = serde_json::from_str(&emit_table(&rows, TableFormat::Json).unwrap()).unwrap();
        prop_assert_eq!(json.as_array().unwrap().len(), rows.len());
    }
}

#[test]
fn table_row_from_counts() {
    // Ten digits, each seen once except 3 (twice) and 7 (never).
    let mut counts = vec![1u64; 10];
    counts[3] = 2;
    counts[7] = 0;
    let table = CountTable::from_counts(Base::DECIMAL, 1, counts, 10).unwrap();
    let row = variance_row(&frequencies(&table).unwrap()).unwrap();
    let csv = emit_table(&[row], TableFormat::Csv).unwrap();
    let line = csv.lines().nth(1).unwrap();
    let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();

    let expected = 0.1 * 0.9 / 10.0;
    let observed = 2.0 * 0.01 / 9.0; // two frequencies off the mean by 0.1
    assert_eq!(&fields[..3], &[10.0, 1.0, 10.0]);
    assert!(close_to_six_digits(fields[3], expected));
    assert!(close_to_six_digits(fields[4], expected * (2.0f64 / 9.0).sqrt()));
    assert!(close_to_six_digits(fields[5], observed));
    assert!(close_to_six_digits(fields[6], (expected - observed) / (expected * (2.0f64 / 9.0).sqrt())));
}

#[test]
fn svg_is_well_formed_for_each_k() {
    for (base, k) in [(Base::DECIMAL, 1), (Base::DECIMAL, 3), (Base::HEX, 2)] {
        let bins = (base.get() as usize).pow(k);
        let counts: Vec<u64> = (0..bins as u64).map(|i| 50 + (i * 7919) % 11).collect();
        let w: u64 = counts.iter().sum();
        let table = CountTable::from_counts(base, k, counts, w).unwrap();
        let report = frequencies(&table).unwrap();
        let bands = sigma_bands(base, k, w + k as u64 - 1).unwrap();
        let svg = render_band_plot(&report, &bands).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let markers = doc
            .descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').any(|c| c == "marker")))
            .count();
        assert_eq!(markers, bins);
        for class in ["band-1sigma", "band-2sigma", "center"] {
            assert!(doc.descendants().any(|n| n.attribute("class") == Some(class)), "{class}");
        }
    }
}
