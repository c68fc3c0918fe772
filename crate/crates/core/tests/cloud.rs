use fisr::verifier::{emit_cloud, write_cloud, Domain, ErrorKind, SweepSpec, CLOUD_HEADER};

fn spec(domain: Domain) -> SweepSpec {
    SweepSpec {
        magic: 0x5F37_642F,
        iterations: 0,
        domain,
        error_kind: ErrorKind::Both,
    }
}

fn read(path: &std::path::Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn header_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.csv");
    let rows = emit_cloud(&spec(Domain::FullRangeRandom { count: 4000, seed: 1 }), &path).unwrap();
    assert_eq!(rows, 4000);
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), &csv::StringRecord::from(CLOUD_HEADER.to_vec()));
    let records = read(&path);
    assert_eq!(records.len(), 4000);
    let mut max_rel = 0f64;
    for r in &records {
        assert_eq!(&r[4], "0x5F37642F");
        assert_eq!(&r[5], "0");
        let x_tilde: f64 = r[1].parse().unwrap();
        assert!((1.0..4.0).contains(&x_tilde));
        max_rel = max_rel.max(r[2].parse::<f64>().unwrap().abs());
    }
    assert!(max_rel <= 0.034_212_9, "{max_rel}");
    assert!(max_rel > 0.030, "{max_rel}");
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let s = spec(Domain::UnitIntervalRandom { count: 500, seed: 99 });
    emit_cloud(&s, &a).unwrap();
    emit_cloud(&s, &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn zero_count_gives_header_only() {
    let mut buf = Vec::new();
    let rows = write_cloud(&spec(Domain::FullRangeRandom { count: 0, seed: 5 }), &mut buf).unwrap();
    assert_eq!(rows, 0);
    assert_eq!(String::from_utf8(buf).unwrap(), "x,x_tilde,error_relative,error_absolute,R,iterations\n");
}

#[test]
fn invalid_constant_is_rejected() {
    let bad = SweepSpec {
        magic: 0x1234_5678,
        ..spec(Domain::UnitIntervalRandom { count: 1, seed: 0 })
    };
    assert!(write_cloud(&bad, Vec::new()).is_err());
}
