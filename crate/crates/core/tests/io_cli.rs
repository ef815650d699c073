use std::path::PathBuf;
use std::process::Command;

use bl_duality::discrete::BLDatum;
use bl_duality::io::corpus::{generate_corpus, CorpusParams};
use bl_duality::io::{
    datum_digest, parse_datum, parse_datum_str, run_command, serialize_datum, Datum, Flags, ResultRecord, Status,
    Verb,
};
use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

const ALL_FILES: [&str; 7] = [
    "young_z.json",
    "diagonal_z2.json",
    "cyclic_mixed.json",
    "s3_diagonal.json",
    "z6_path.json",
    "gowers_h2.json",
    "diagonal_r2.json",
];

fn parse_err(text: &str) -> String {
    parse_datum_str(text, None).unwrap_err().to_string()
}

#[test]
fn shipped_files_parse() {
    for name in ALL_FILES {
        let parsed = parse_datum(data(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parsed.diagnostics.is_empty(), "{name}: {:?}", parsed.diagnostics);
    }
}

#[test]
fn malformed_input_is_located() {
    let bad_int = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"free_rank": 1}], "generators": [["2/3"]], "exponents": ["2"]}"#;
    let msg = parse_err(bad_int);
    assert!(msg.contains("$.generators[0][0]"), "{msg}");
    assert!(msg.contains("line 2"), "{msg}");

    let unknown = r#"{"schema_version": 1, "kind": "discrete", "groups": [], "exponents": [], "extra": 1}"#;
    assert!(parse_err(unknown).contains("extra"));

    let kind = r#"{"schema_version": 1, "kind": "projective"}"#;
    assert!(parse_err(kind).contains("$.kind"));

    let version = r#"{"schema_version": 9, "kind": "discrete", "groups": [], "exponents": []}"#;
    assert!(parse_err(version).contains("schema_version"));

    let exponent = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"free_rank": 1}], "generators": [[1]], "exponents": ["1/2"]}"#;
    assert!(parse_err(exponent).contains("$.exponents[0]"), "{}", parse_err(exponent));

    let width = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"free_rank": 1}], "generators": [[1, 2]], "exponents": ["2"]}"#;
    assert!(parse_err(width).contains("$.generators[0]"), "{}", parse_err(width));

    let modulus = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"torsion": [0]}], "generators": [], "exponents": ["2"]}"#;
    assert!(parse_err(modulus).contains("$.groups[0].torsion"), "{}", parse_err(modulus));

    let law = r#"{"schema_version": 1, "kind": "finite-table",
        "groups": [{"table": [[0, 0], [0, 0]]}], "subgroup": {"diagonal": true}, "weights": ["1"]}"#;
    assert!(parse_err(law).contains("$.groups[0]"), "{}", parse_err(law));

    let both = r#"{"schema_version": 1, "kind": "finite-table",
        "groups": [{"name": "S3"}], "subgroup": {"diagonal": true}, "weights": ["1"], "exponents": ["1"]}"#;
    assert!(parse_err(both).contains("exactly one"), "{}", parse_err(both));
}

#[test]
fn non_chain_torsion_is_normalized() {
    let text = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"torsion": [2, 3]}, {"torsion": [6]}],
        "generators": [[1, 1, 3]], "exponents": ["2", "2"]}"#;
    let parsed = parse_datum_str(text, None).unwrap();
    assert_eq!(parsed.diagnostics.len(), 1, "{:?}", parsed.diagnostics);
    let Datum::Discrete(d) = &parsed.datum else { panic!() };
    assert_eq!(d.groups()[0].order(), d.groups()[1].order());

    let chain = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"torsion": [6]}, {"torsion": [6]}],
        "generators": [[5, 3]], "exponents": ["2", "2"]}"#;
    let a = constant_of(&parse_datum_str(text, None).unwrap().datum);
    let b = constant_of(&parse_datum_str(chain, None).unwrap().datum);
    assert_eq!(a, b);
}

fn constant_of(d: &Datum) -> Value {
    let parsed = bl_duality::io::ParsedDatum {
        datum: d.clone(),
        diagnostics: vec![],
    };
    let r = run_command(Verb::Constant, Some(&parsed), &Flags::default()).unwrap();
    serde_json::to_value(&r.values["constant"]).unwrap()
}

#[test]
fn canonical_form_round_trips() {
    for name in ALL_FILES {
        let parsed = parse_datum(data(name)).unwrap();
        let canon = serialize_datum(&parsed.datum).unwrap();
        let again = parse_datum_str(&canon.to_string(), None).unwrap();
        assert_eq!(serialize_datum(&again.datum).unwrap(), canon, "{name}");
        assert_eq!(datum_digest(&again.datum).unwrap(), datum_digest(&parsed.datum).unwrap(), "{name}");
    }
}

#[test]
fn corpus_data_round_trip() {
    for d in generate_corpus(21, 60, &CorpusParams::default()) {
        let datum = Datum::Discrete(d);
        let canon = serialize_datum(&datum).unwrap();
        let again = parse_datum_str(&canon.to_string(), None).unwrap();
        assert!(again.diagnostics.is_empty());
        assert_eq!(serialize_datum(&again.datum).unwrap(), canon);
    }
}

#[test]
fn digest_ignores_presentation() {
    let a = r#"{"schema_version": 1, "kind": "discrete",
        "groups": [{"free_rank": 1}, {"free_rank": 1}], "generators": [[1, 1]], "exponents": ["2", 2]}"#;
    let b = r#"{"kind": "discrete", "schema_version": 1, "exponents": ["4/2", "2"],
        "groups": [{"free_rank": 1}, {"free_rank": 1}], "generators": [[-1, -1], [2, 2]]}"#;
    let da = parse_datum_str(a, None).unwrap().datum;
    let db = parse_datum_str(b, None).unwrap().datum;
    assert_eq!(datum_digest(&da).unwrap(), datum_digest(&db).unwrap());
    let c = a.replace(r#""2", 2"#, r#""2", "3""#);
    assert_ne!(datum_digest(&da).unwrap(), datum_digest(&parse_datum_str(&c, None).unwrap().datum).unwrap());
}

fn run_file(verb: Verb, name: &str, flags: &Flags) -> ResultRecord {
    run_command(verb, Some(&parse_datum(data(name)).unwrap()), flags).unwrap()
}

#[test]
fn diagonal_z2_constant_is_two() {
    let r = run_file(Verb::Constant, "diagonal_z2.json", &Flags::default());
    assert_eq!(r.values["constant"].exact, Some(json!({"2": "1"})));
    assert_eq!(r.values["constant"].decimal, "2.000000000000");
    let r = run_file(Verb::VerifyDuality, "diagonal_z2.json", &Flags::default());
    assert_eq!(r.status, Status::Pass);
}

#[test]
fn verbs_on_shipped_files() {
    let flags = Flags::default();
    let young = run_file(Verb::VerifyDuality, "young_z.json", &flags);
    assert_eq!(young.status, Status::Pass);
    assert!(young.values["discrete"].to_exact().unwrap().unwrap().is_one());

    let s3 = run_file(Verb::FiniteConstant, "s3_diagonal.json", &flags);
    assert_eq!(s3.values["constant"].exact, Some(json!({"2": "1/2", "3": "1/2"})));
    assert_eq!(run_file(Verb::Extremise, "s3_diagonal.json", &flags).status, Status::Pass);
    assert_eq!(run_file(Verb::Extremise, "z6_path.json", &flags).status, Status::Pass);

    let gowers = run_file(Verb::EuclidOptimize, "gowers_h2.json", &flags);
    let v: f64 = gowers.values["constant"].decimal.parse().unwrap();
    assert!((v - 4.0 / 27f64.sqrt()).abs() < 1e-4);
    assert_eq!(run_file(Verb::EuclidVerify, "gowers_h2.json", &flags).status, Status::Pass);

    assert_eq!(run_file(Verb::FourierCheck, "diagonal_z2.json", &flags).status, Status::Pass);
    let fin = run_file(Verb::Finiteness, "cyclic_mixed.json", &flags);
    assert_eq!(fin.verdicts["discrete"], "infinite");
    assert_eq!(fin.verdicts["compact"], "infinite");
    assert_eq!(fin.details["discrete_witness_reverified"], json!(true));

    let parsed = parse_datum(data("s3_diagonal.json")).unwrap();
    assert!(run_command(Verb::Dual, Some(&parsed), &flags).is_err());
    assert!(run_command(Verb::Constant, None, &flags).is_err());
}

#[test]
fn value_records_are_consistent() {
    let flags = Flags::default();
    for (verb, name) in [
        (Verb::Constant, "young_z.json"),
        (Verb::Constant, "cyclic_mixed.json"),
        (Verb::Dual, "diagonal_z2.json"),
        (Verb::FiniteConstant, "s3_diagonal.json"),
    ] {
        let r = run_file(verb, name, &flags);
        for v in r.values.values() {
            assert!(v.is_consistent(), "{name}: {v:?}");
        }
        let back: ResultRecord = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn corpus_is_reproducible() {
    let flags = Flags {
        seed: 7,
        count: 100,
        ..Flags::default()
    };
    let a = run_command(Verb::Corpus, None, &flags).unwrap();
    let b = run_command(Verb::Corpus, None, &flags).unwrap();
    assert_eq!(a.status, Status::Pass);
    assert_eq!(a.details["count"], json!(100));
    assert_eq!(a.without_timings(), b.without_timings());
    assert_eq!(a.without_timings().to_json(), b.without_timings().to_json());
    let other = run_command(Verb::Corpus, None, &Flags { seed: 8, ..flags }).unwrap();
    assert_ne!(a.input_digest, other.input_digest);
}

#[test]
fn verb_names_round_trip() {
    for v in Verb::ALL {
        assert_eq!(v.as_str().parse::<Verb>().unwrap(), v);
    }
    assert!("constants".parse::<Verb>().is_err());
}

fn bldual(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bldual")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn binary_exit_codes_and_output() {
    let young = data("young_z.json");
    let young = young.to_str().unwrap();
    let (code, stdout, _) = bldual(&["verify-duality", young]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["status"], "pass");

    let (code, stdout, _) = bldual(&["constant", young, "--format", "text"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("constant [discrete]"));

    let (code, _, stderr) = bldual(&["nonsense", young]);
    assert_eq!(code, 1);
    assert!(stderr.contains("unknown verb"));

    let dir = std::env::temp_dir().join(format!("bldual-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "kind": "discrete", "groups": 3}"#).unwrap();
    let (code, _, stderr) = bldual(&["constant", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("$.groups"), "{stderr}");

    // A Euclidean check with an impossible tolerance reports a failed verification.
    let gowers = data("gowers_h2.json");
    let (code, stdout, _) = bldual(&["fourier-check", data("diagonal_z2.json").to_str().unwrap(), "--tol", "-1"]);
    assert_eq!(code, 2, "{stdout}");
    let (code, _, _) = bldual(&["euclid-verify", gowers.to_str().unwrap()]);
    assert_eq!(code, 0);

    let (code, stdout, _) = bldual(&["corpus", "--seed", "3", "--count", "10"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["details"]["records"].as_array().unwrap().len(), 10);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn datum_builders_match_files() {
    let parsed = parse_datum(data("young_z.json")).unwrap();
    let Datum::Discrete(d) = &parsed.datum else { panic!() };
    let _: &BLDatum = d;
    assert_eq!(d.nfactors(), 3);
}
