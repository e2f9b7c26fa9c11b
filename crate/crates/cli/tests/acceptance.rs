//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use opcqkd::channel::{
    forward_matrix, hwp_matrix, round_trip_matrix, CouplingSpec, PerturbationSequence,
};
use opcqkd::linalg::{factor_su2n, haar_unitary, su2_embed, su2_product, ComplexMatrix, Su2Params};
use opcqkd::opc::{MirrorKind, OpcParams};
use opcqkd::protocol::{build_mub_pair, run_session, EveModel, Session, SessionConfig};
use opcqkd::rng::{RngSeed, StreamRole};
use opcqkd::states::{to_qudit, IntensityRole, PulseIntensity, QuditState};
use opcqkd::Complex64;

type Check = (bool, String);
type Criterion = (&'static str, fn() -> Check);

const CORES: [usize; 4] = [1, 2, 4, 8];

fn round_trip_grid(general: bool) -> Check {
    let start = Instant::now();
    let spec = CouplingSpec::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (ni, &n) in CORES.iter().enumerate() {
        let d = hwp_matrix(n);
        for q in 1..=8usize {
            for t in 0..100u64 {
                let mut rng = RngSeed(1000 + ni as u64).stream(q as u64 * 1000 + t, StreamRole::Channel);
                let seq = if general {
                    PerturbationSequence::random_general(n, q, &mut rng)
                } else {
                    PerturbationSequence::random_symmetric(n, q, &spec, &mut rng)
                }
                .unwrap();
                worst = worst.max(round_trip_matrix(&seq).max_abs_diff(&d));
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    (
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("max |M_T - D| = {worst:.2e} over {count} sequences in {:.2} s (limits 1e-9, 10 s)", elapsed.as_secs_f64()),
    )
}

fn scalar_subcase() -> Check {
    let spec = CouplingSpec::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for &n in &CORES {
        for q in 1..=8usize {
            for t in 0..100u64 {
                let mut rng = RngSeed(3).stream((n * 100 + q) as u64 * 1000 + t, StreamRole::Channel);
                let seq = PerturbationSequence::random_polarization_preserving(n, q, &spec, &mut rng).unwrap();
                let m = forward_matrix(&seq);
                let prod = &m.transpose() * &m.conj();
                worst = worst.max(prod.max_abs_diff(&ComplexMatrix::identity(2 * n)));
                count += 1;
            }
        }
    }
    (worst <= 1e-10, format!("max |M^t M* - I| = {worst:.2e} over {count} sequences (limit 1e-10)"))
}

fn su2_identity() -> Check {
    let d2 = hwp_matrix(1);
    let mut rng = RngSeed(4).rng();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let tau = std::f64::consts::TAU;
        let p = Su2Params::new(
            rng.random_range(-tau..tau),
            rng.random_range(-tau..tau),
            rng.random_range(-tau..tau),
            0,
            1,
        )
        .unwrap();
        let s = su2_embed(&p, 2).unwrap();
        let t = &(&d2 * &s.transpose()) * &d2;
        let lhs = &(&t * &d2) * &s.conj();
        worst = worst.max(lhs.max_abs_diff(&d2));
    }
    (worst <= 1e-12, format!("max |T D S* - D| = {worst:.2e} over 10000 triples (limit 1e-12)"))
}

fn bogoliubov() -> Check {
    let steps = 30_000;
    let mut worst = 0.0f64;
    for k in 1..steps {
        let kl = -1.5 + 3.0 * k as f64 / steps as f64;
        let p = OpcParams::new(kl).unwrap();
        worst = worst.max((p.s() * p.s() - p.t() * p.t() - 1.0).abs());
    }
    (worst <= 1e-12, format!("max |s^2 - t^2 - 1| = {worst:.2e} over {} points in (-1.5, 1.5) (limit 1e-12)", steps - 1))
}

fn factorization() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for dim in 2..=16usize {
        for t in 0..100u64 {
            let u = haar_unitary(dim, &mut RngSeed(6).stream(dim as u64 * 1000 + t, StreamRole::Channel));
            let factors = factor_su2n(&u, 1e-10).unwrap();
            worst = worst.max(su2_product(&factors, dim).unwrap().max_abs_diff(&u));
            count += 1;
        }
    }
    (worst <= 1e-9, format!("max reconstruction error {worst:.2e} over {count} Haar matrices, dims 2-16 (limit 1e-9)"))
}

fn noiseless_protocol() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1usize, 2, 4] {
        let mut cfg = SessionConfig::new(n, 5, 10_000);
        cfg.seed = Some(70 + n as u64);
        let stats = run_session(&cfg).unwrap();
        ok &= stats.errors == 0 && stats.sifted > 0;
        parts.push(format!("d={} errors {}/{}", 2 * n, stats.errors, stats.sifted));

        cfg.mirror = MirrorKind::Plain;
        let control = run_session(&cfg).unwrap();
        let qber = control.qber.unwrap_or(0.0);
        ok &= qber > 0.1;
        parts.push(format!("plain-mirror qber {qber:.3}"));
    }
    (ok, parts.join(", "))
}

fn pattern(theta: &[f64]) -> QuditState {
    let d = theta.len();
    let a = Complex64::new(0.0, -1.0 / (d as f64).sqrt());
    QuditState::new(
        theta
            .iter()
            .enumerate()
            .map(|(j, t)| a * Complex64::from_polar(if j % 2 == 0 { 1.0 } else { -1.0 }, *t))
            .collect(),
    )
    .unwrap()
}

fn final_state_form() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [1usize, 2, 4] {
        let mut cfg = SessionConfig::new(n, 5, 1000);
        cfg.seed = Some(80 + n as u64);
        let mut session = Session::new(cfg).unwrap();
        for r in 0..1000 {
            let rec = session.round(r).unwrap();
            if rec.bob_field.mean_photon_number() == 0.0 {
                continue;
            }
            let q = to_qudit(&rec.bob_field).unwrap();
            worst = worst.max(q.distance_up_to_phase(&pattern(&rec.encoding.theta)));
            count += 1;
        }
    }
    (worst <= 1e-9, format!("max distance to pattern {worst:.2e} over {count} pulses, d in {{2,4,8}} (limit 1e-9)"))
}

fn intercept_resend() -> Check {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1usize, 2, 4] {
        let d = 2 * n as u64;
        let mut cfg = SessionConfig::new(n, 5, 22_000);
        cfg.seed = Some(90 + d);
        cfg.eve = EveModel::InterceptResend;
        cfg.intensities = vec![PulseIntensity::new(5.0, IntensityRole::Signal).unwrap()];
        let stats = run_session(&cfg).unwrap();
        let expected = (d - 1) as f64 / (2 * d) as f64;
        let sigma = (expected * (1.0 - expected) / stats.sifted as f64).sqrt();
        let qber = stats.qber.unwrap_or(f64::NAN);
        let z = (qber - expected) / sigma;
        ok &= stats.sifted >= 10_000 && z.abs() <= 3.0;
        parts.push(format!("d={d} qber {qber:.4} vs {expected:.4} ({z:+.2} sigma, {} sifted)", stats.sifted));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    parts.push(format!("{:.1} s", elapsed.as_secs_f64()));
    (ok, parts.join(", "))
}

fn mub_overlaps() -> Check {
    let mut worst = 0.0f64;
    for d in [2usize, 4, 8, 16] {
        let m = build_mub_pair(d).unwrap();
        for u in m.basis(0) {
            for v in m.basis(1) {
                worst = worst.max((u.inner(v).norm_sqr() - 1.0 / d as f64).abs());
            }
        }
    }
    (worst <= 1e-12, format!("max ||<u|v>|^2 - 1/d| = {worst:.2e}, d in {{2,4,8,16}} (limit 1e-12)"))
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_opcqkd")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn without_timestamps(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("started_at");
    obj.remove("finished_at");
    v
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let config = p("config.json");
    std::fs::write(
        &config,
        r#"{"n_cores": 2, "q_perturbations": 4, "n_rounds": 3000, "eve": "intercept_resend", "seed": 5}"#,
    )
    .unwrap();

    let verify = ["verify", "--dim", "6", "--q", "4", "--trials", "20", "--seed", "9", "--mode", "general"];
    let (c1, v1) = cli(&verify);
    let (c2, v2) = cli(&verify);
    let verify_same = c1 == 0 && c2 == 0 && v1 == v2;

    let (s1, s2) = (p("s1.json"), p("s2.json"));
    let r1 = cli(&["session", "--config", &config, "--out", &s1]).0;
    let r2 = cli(&["session", "--config", &config, "--out", &s2]).0;
    let session_same = r1 == 0 && r2 == 0 && without_timestamps(Path::new(&s1)) == without_timestamps(Path::new(&s2));

    let (w1, w2) = (p("w1.csv"), p("w2.csv"));
    let sweep = |out: &str| cli(&["sweep", "--config", &config, "--axis", "q_perturbations", "--values", "0,3,6", "--out", out]).0;
    let (a, b) = (sweep(&w1), sweep(&w2));
    let sweep_same = a == 0 && b == 0 && std::fs::read(&w1).unwrap() == std::fs::read(&w2).unwrap();

    (
        verify_same && session_same && sweep_same,
        format!("identical payloads: verify {verify_same}, session {session_same}, sweep {sweep_same}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("round trip, symmetric segments", || round_trip_grid(false)),
        ("round trip, general SU(2N) segments", || round_trip_grid(true)),
        ("scalar sub-case M^t M* = I", scalar_subcase),
        ("SU(2) identity", su2_identity),
        ("Bogoliubov invariant", bogoliubov),
        ("SU(2N) factorization round trip", factorization),
        ("noiseless protocol and plain-mirror control", noiseless_protocol),
        ("final-state form", final_state_form),
        ("intercept-resend baseline", intercept_resend),
        ("MUB overlaps", mub_overlaps),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| (false, "panicked".into()));
        if !pass {
            failures += 1;
        }
        println!("{} [{:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
