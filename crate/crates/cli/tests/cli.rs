use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use easytime::semantics::compile_source;
use easytime::store::{create_db, rank_results, DataDir, Runner};
use easytime::vm::serialize_code;
use easytime::Registry;

const TRIATHLON: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/examples/triathlon.et");

fn easytime(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_easytime"))
        .arg("--data-dir")
        .arg(data)
        .args(args)
        .env_remove("EASYTIME_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn runners_csv(dir: &Path) -> PathBuf {
    write(dir, "runners.in.csv", "Id,RFID,LastName,FirstName\n7,TAG42,Novak,Ana\n8,TAG8,Kos,Luka\n9,TAG9,Zupan,Eva\n")
}

fn init(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let out = easytime(&data, &["init-db", TRIATHLON, "--runners", runners_csv(dir).to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    data
}

#[test]
fn compile_output_equals_library_serialization() {
    let dir = tempfile::tempdir().unwrap();
    let out = easytime(dir.path(), &["compile", TRIATHLON]);
    assert!(out.status.success());
    let lib = serialize_code(&compile_source(&fs::read_to_string(TRIATHLON).unwrap()).unwrap().unit);
    assert_eq!(stdout(&out), lib);

    let target = dir.path().join("pgm.txt");
    let out = easytime(dir.path(), &["compile", TRIATHLON, "-o", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(target).unwrap(), lib);
}

#[test]
fn check_reports_ok_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = easytime(dir.path(), &["check", TRIATHLON]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("OK"));

    let bad = write(dir.path(), "bad.et", "1 manual \"f\";\nvar X := 0;\nmp[1] -> agnt[1] {\n  upd GHOST;\n}\n");
    let out = easytime(dir.path(), &["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bad.et:4:3: error[E001]: variable `GHOST` is not declared"), "{err}");
    assert_eq!(err.lines().last(), Some("ERROR"));
}

#[test]
fn porcelain_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.et", "1 manual \"f\"; var X := 0; var X := 1; mp[1] -> agnt[1] { dec X; }");
    let out = easytime(dir.path(), &["--porcelain", "check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let lines: Vec<String> = stderr(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(fields[0], "diagnostic");
    assert_eq!(&fields[2..6], ["1", "27", "error", "E002"]);
    assert_eq!(lines[1], "status\tERROR");
}

#[test]
fn syntax_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.et", "1 manual \"f\"; var X := 0; mp[1] -> agnt[1] { }");
    let out = easytime(dir.path(), &["compile", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).is_empty());
}

#[test]
fn exit_codes_for_usage_and_io() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(easytime(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(easytime(dir.path(), &["compile"]).status.code(), Some(2));
    assert_eq!(easytime(dir.path(), &["check", "no/such/file.et"]).status.code(), Some(3));
    assert_eq!(easytime(&dir.path().join("empty"), &["run-batch", "x.txt"]).status.code(), Some(3));

    let data = init(dir.path());
    assert_eq!(easytime(&data, &["results", "--sort", "NOSUCH"]).status.code(), Some(2));
    assert_eq!(easytime(&data, &["results", "--sort", "RUN", "--diff", "RUN"]).status.code(), Some(2));
    assert_eq!(easytime(&data, &["simulate", "--competitors", "0"]).status.code(), Some(2));
}

#[test]
fn init_db_writes_the_data_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = init(dir.path());
    let d = DataDir::new(&data);
    assert!(d.archive_dir().is_dir());
    assert_eq!(
        fs::read_to_string(d.results_path()).unwrap().lines().next().unwrap(),
        "Id,ROUND1,INTER1,SWIM,TRANS1,ROUND2,INTER2,BIKE,TRANS2,ROUND3,INTER3,RUN"
    );
    let db = d.load_results().unwrap();
    assert_eq!(db.len(), 3);
    assert_eq!(db.get(9, "ROUND2"), Some(105));

    let again = easytime(&data, &["init-db", TRIATHLON, "--runners", runners_csv(dir.path()).to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(2));
    let forced = easytime(&data, &["init-db", TRIATHLON, "--runners", d.runners_path().to_str().unwrap(), "--force"]);
    assert!(forced.status.success(), "{}", stderr(&forced));
}

#[test]
fn run_batch_logs_each_event_and_archives() {
    let dir = tempfile::tempdir().unwrap();
    let data = init(dir.path());
    let events = write(dir.path(), "ev.txt", "7;1;3600\n# operator note\n8;2;4000\nbroken\n");
    let out = easytime(&data, &["run-batch", events.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("applied 2, skipped 1; archived to "));
    let log: Vec<String> = stderr(&out).lines().map(str::to_string).collect();
    assert_eq!(log[0], "1 applied 7;1;3600");
    assert_eq!(log[1], "2 applied 8;2;4000");
    assert!(log[2].starts_with("3 skipped("));
    assert!(!events.exists());
    assert_eq!(fs::read_dir(data.join("archive")).unwrap().count(), 1);

    let db = DataDir::new(&data).load_results().unwrap();
    assert_eq!(db.get(7, "SWIM"), Some(3600));
    assert_eq!(db.get(8, "TRANS1"), Some(4000));

    let quiet = write(dir.path(), "ev2.txt", "9;2;10\n");
    let out = easytime(&data, &["-q", "run-batch", quiet.to_str().unwrap()]);
    assert!(stderr(&out).is_empty());
}

#[test]
fn results_match_library_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let data = init(dir.path());
    let events = write(dir.path(), "ev.txt", "7;2;500\n8;2;400\n9;2;500\n");
    easytime(&data, &["-q", "run-batch", events.to_str().unwrap()]);

    let out = easytime(&data, &["--porcelain", "results", "--sort", "TRANS1", "--diff", "TRANS1-SWIM"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Rank\tId\tLastName\tFirstName\tTRANS1\tTRANS1-SWIM");
    assert_eq!(lines[1], "1\t8\tKos\tLuka\t400\t400");
    assert_eq!(lines[2], "2\t7\tNovak\tAna\t500\t500");
    assert_eq!(lines[3], "2\t9\tZupan\tEva\t500\t500");

    let d = DataDir::new(&data);
    let lib =
        rank_results(&d.load_results().unwrap(), &Registry::new(d.load_runners().unwrap()).unwrap(), "TRANS1", false)
            .unwrap();
    let ids: Vec<String> = lib.iter().map(|r| r.id.to_string()).collect();
    let cli_ids: Vec<&str> = lines[1..].iter().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(cli_ids, ids);

    let out = easytime(&data, &["results", "--sort", "RUN", "--dnf-zero"]);
    assert!(stdout(&out).lines().skip(1).all(|l| l.starts_with("DNF")));
}

#[test]
fn simulate_one_competitor() {
    let dir = tempfile::tempdir().unwrap();
    let out = easytime(dir.path(), &["simulate", "--competitors", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 181);
    assert_eq!(text.lines().next(), Some("# seed=0 competitors=1"));

    let auto = easytime(dir.path(), &["simulate", "--competitors", "2", "--auto", "--seed", "3"]);
    let line = stdout(&auto).lines().nth(1).unwrap().to_string();
    assert_eq!(line.split(';').count(), 4);
    assert!(line.contains(";TAG"));
}

#[test]
fn simulate_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ev.txt");
    let runners = dir.path().join("r.csv");
    let out = easytime(
        dir.path(),
        &[
            "simulate",
            "--competitors",
            "3",
            "--seed",
            "8",
            "-o",
            path.to_str().unwrap(),
            "--runners-out",
            runners.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let scenario = easytime::simulator::Scenario::with(3, 8);
    let mut expected = Vec::new();
    easytime::simulator::write_events(&mut expected, &scenario, &easytime::simulator::simulate(&scenario).unwrap())
        .unwrap();
    assert_eq!(fs::read(&path).unwrap(), expected);
    let loaded = easytime::store::load_runners(&runners).unwrap();
    assert_eq!(loaded, easytime::simulator::synthetic_runners(3));
}

#[test]
fn data_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("envdata");
    let prog = compile_source(&fs::read_to_string(TRIATHLON).unwrap()).unwrap();
    let d = DataDir::create(&data).unwrap();
    let runners = vec![Runner::new(1, "T1", "A", "B")];
    d.save_pgm(&prog.unit).unwrap();
    d.save_runners(&runners).unwrap();
    d.save_results(&create_db(&prog.state, &runners).unwrap()).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_easytime"))
        .args(["--porcelain", "results", "--sort", "ROUND1"])
        .env("EASYTIME_DATA_DIR", &data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().nth(1), Some("1\t1\tA\tB\t20"));
}
