//! Acceptance criteria; run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use fractarith::certifier::{self, Certificate, Orientation};
use fractarith::empirics;
use fractarith::exactnum::{RatInterval, Rational};
use fractarith::exprfn::Expr;
use fractarith::ifs_core::{CylinderWord, HomogeneousIfs, InfiniteCode, Thickness};
use fractarith::qexp::{self, Base, Decision, DigitSeq, QuasiGreedy, DEFAULT_BUDGET};

type Outcome = Result<(), String>;

fn rat(s: &str) -> Rational {
    s.parse().unwrap()
}

fn ival(lo: &str, hi: &str) -> RatInterval {
    RatInterval::new(rat(lo), rat(hi)).unwrap()
}

fn expr(s: &str) -> Expr {
    s.parse().unwrap()
}

fn word(s: &str) -> CylinderWord {
    s.parse().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn cantor() -> HomogeneousIfs {
    HomogeneousIfs::cantor()
}

fn check_replay(cert: &Certificate) -> Outcome {
    let r = certifier::replay(cert);
    ensure(r.valid, || format!("replay rejected: {:?}", r.first_failure))
}

fn cantor_sum() -> Result<Certificate, String> {
    let root = CylinderWord::empty();
    certifier::certify_rectangle(&cantor(), &cantor(), &expr("x+y"), &root, &root).map_err(|e| e.to_string())
}

fn criterion_1(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let cert = cantor_sum()?;
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure(cert.certified_interval == ival("0", "2"), || format!("interval {}", cert.certified_interval))?;
    ensure(cert.margins.m_row == rat("0") && cert.margins.m_gap == rat("2/3"), || format!("{:?}", cert.margins))?;
    check_replay(&cert)?;
    certs.push(cert);
    Ok(())
}

fn criterion_2(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let root = CylinderWord::empty();
    let cert = certifier::certify_rectangle(&cantor(), &cantor(), &expr("x-y"), &root, &root)
        .map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure(cert.certified_interval == ival("-1", "1"), || format!("interval {}", cert.certified_interval))?;
    check_replay(&cert)?;
    certs.push(cert);
    Ok(())
}

fn criterion_3(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let c = cantor();
    let f = expr("x/y");
    let (x_code, y_code): (InfiniteCode, InfiniteCode) = ("2(1)".parse().unwrap(), "(2)".parse().unwrap());
    let cert = certifier::auto_certify(&c, &c, &f, (&x_code, &y_code), 8).map_err(|e| e.to_string())?;
    let target = ival("2/3", "3/2");
    ensure(cert.certified_interval.is_subset_of(&target), || format!("interval {}", cert.certified_interval))?;
    check_replay(&cert)?;

    // both factors restricted to [2/3, 1]
    let two = word("2");
    let mut previous: Option<fractarith::union::IntervalUnion> = None;
    for rank in 1..=6 {
        let cover = empirics::image_cover(&c, &c, &f, (&two, &two), rank, 1 << 20).map_err(|e| e.to_string())?;
        ensure(cover.contains_interval(&cert.certified_interval), || format!("rank {rank} misses the certificate"))?;
        if let Some(p) = &previous {
            ensure(cover.is_subset_of(p), || format!("rank {rank} cover is not nested"))?;
        }
        previous = Some(cover);
    }
    let cover = previous.unwrap();
    ensure(cover.hull() == Some(target.clone()), || format!("rank 6 hull {:?}", cover.hull()))?;
    // on [2/3,1]²: |∂x| = 1/y <= 3/2, |∂y| = x/y² <= 9/4, sides 3^-6
    let oscillation = (rat("3/2") + rat("9/4")) * c.ratio_pow(6);
    let extra = 5usize;
    for w1 in CylinderWord::all(2, extra) {
        for w2 in CylinderWord::all(2, extra) {
            let (i, j) = (c.basic_interval(&two.concat(&w1)).unwrap(), c.basic_interval(&two.concat(&w2)).unwrap());
            let image = f.eval_interval(&i, &j).map_err(|e| e.to_string())?;
            ensure(image.width() <= oscillation, || format!("enclosure {image} wider than {oscillation}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    certs.push(cert);
    Ok(())
}

fn criterion_4() -> Outcome {
    let tau = match cantor().thickness_lower_bound() {
        Thickness::Finite(t) => t,
        Thickness::Infinite => return Err("thickness reported infinite".into()),
    };
    ensure(tau == rat("1"), || format!("thickness {tau}"))?;
    let product = &tau * &tau;
    ensure(!(product > rat("1")), || format!("thickness product {product} exceeds 1"))?;
    let cert = cantor_sum()?;
    check_replay(&cert)
}

fn criterion_5(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let c = cantor();
    let cert = certifier::certify_rectangle(&c, &c, &expr("x*y"), &word("122"), &word("21"))
        .map_err(|e| e.to_string())?;
    ensure(cert.certified_interval == ival("16/81", "7/27"), || format!("interval {}", cert.certified_interval))?;
    ensure(cert.orientation == Orientation::RowsY, || format!("{:?}", cert.orientation))?;
    ensure(cert.margins.m_row == rat("1/9") && cert.margins.m_gap == rat("1/27"), || format!("{:?}", cert.margins))?;
    check_replay(&cert)?;
    let oracle = empirics::oracle_check(&cert, 10, 1 << 24).map_err(|e| e.to_string())?;
    ensure(oracle.contained, || format!("{oracle:?}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    certs.push(cert);
    Ok(())
}

fn criterion_6() -> Outcome {
    let qs = qexp::qstar();
    let iv = qs.interval();
    ensure(iv.is_subset_of(&ival("1.80", "1.81")), || format!("isolating interval {iv}"))?;
    let poly: Vec<Rational> = qs.poly().coeffs().to_vec();
    ensure(poly == ["1", "-2", "-1", "1"].map(rat), || format!("polynomial {poly:?}"))?;
    let eta = qexp::quasi_greedy_one(&Base::qstar(), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let expected: DigitSeq = "11(01)".parse().unwrap();
    ensure(eta == expected, || format!("eta {eta}"))
}

fn criterion_7() -> Outcome {
    let q = Base::rational(rat("19/10")).unwrap();
    let report = qexp::verify_kq_in_uq(&q, DEFAULT_BUDGET);
    ensure(report.verdict == Decision::Yes, || format!("verdict {}", report.verdict))?;
    let k = qexp::kq_ifs(&q).map_err(|e| e.to_string())?;
    let qr = rat("19/10");
    let d = &qr * &qr - rat("1");
    let (a, b) = (rat("1") / &d, &qr / &d);
    ensure(k.convex_hull() == RatInterval::new(a.clone(), b.clone()).unwrap(), || format!("hull {}", k.convex_hull()))?;
    ensure(k.convex_hull() == ival("100/261", "190/261"), || format!("hull {}", k.convex_hull()))?;
    let lambda = rat("1") / (&qr * &qr);
    let bound = k.kappa() / (&b - &a);
    ensure(bound == rat("1") - rat("2") * &lambda && bound == rat("161/361"), || format!("kappa/(b-a) = {bound}"))
}

fn criterion_8(certs: &mut Vec<Certificate>) -> Outcome {
    let start = Instant::now();
    let q = Base::rational(rat("19/10")).unwrap();
    for f in ["x*y", "x/y", "x^2+y^2", "x^2-y^2"] {
        let uq = qexp::certify_uq_arith(&q, &expr(f), 12).map_err(|e| format!("{f}: {e}"))?;
        let cert = uq.certificate;
        ensure(!cert.certified_interval.is_point(), || format!("{f}: degenerate interval"))?;
        check_replay(&cert).map_err(|e| format!("{f}: {e}"))?;
        let oracle = empirics::oracle_check(&cert, 8, 1 << 24).map_err(|e| e.to_string())?;
        ensure(oracle.contained, || format!("{f}: oracle {oracle:?}"))?;
        certs.push(cert);
    }
    within(start.elapsed(), Duration::from_secs(60))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut eta_cache = std::collections::HashMap::new();
    let mut disagreements = Vec::new();
    let (mut yes, mut no) = (0, 0);
    for _ in 0..200 {
        let q = Rational::frac(rng.gen_range(151..=199), 100);
        let pre: Vec<u8> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..=1)).collect();
        let per: Vec<u8> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..=1)).collect();
        let seq = DigitSeq::new(pre, per).unwrap();
        let base = Base::rational(q.clone()).unwrap();
        let eta = eta_cache.entry(q.clone()).or_insert_with(|| QuasiGreedy::new(&base, DEFAULT_BUDGET));
        let decision = qexp::is_univoque_seq(&seq, eta);
        // a truncated frontier already means more than one expansion
        let count = qexp::count_expansions_bruteforce(&seq.value(&q), &q, 30, 256);
        match decision {
            Decision::Yes => yes += 1,
            Decision::No => no += 1,
            Decision::Unknown => {}
        }
        if (decision == Decision::Yes) != (count == 1) || decision == Decision::Unknown {
            disagreements.push(format!("{seq} at q={q}: {decision} vs {count}"));
        }
    }
    println!("    univoque sample: {yes} yes, {no} no");
    ensure(disagreements.is_empty(), || disagreements.join("; "))
}

fn criterion_10() -> Outcome {
    let c = cantor();
    let covers: Vec<_> = (4..=10).map(|k| (k, c.level_cover(k, 1 << 20).unwrap())).collect();
    let est = empirics::box_dim_estimate(&covers, c.ratio(), &c.hull_length()).map_err(|e| e.to_string())?;
    let target = 2f64.ln() / 3f64.ln();
    println!("    Cantor slope {:.6} (target {target:.6})", est.slope);
    ensure((est.slope - target).abs() <= 0.02, || format!("Cantor slope {}", est.slope))?;

    let q = Base::rational(rat("19/10")).unwrap();
    let k = qexp::kq_ifs(&q).map_err(|e| e.to_string())?;
    let covers: Vec<_> = (4..=10).map(|r| (r, k.level_cover(r, 1 << 20).unwrap())).collect();
    let est = empirics::box_dim_estimate(&covers, k.ratio(), &k.hull_length()).map_err(|e| e.to_string())?;
    let target = 2f64.ln() / (2.0 * 1.9f64.ln());
    println!("    K_19/10 slope {:.6} (target {target:.6})", est.slope);
    ensure((est.slope - target).abs() <= 0.03, || format!("K_q slope {}", est.slope))?;

    let grid: Vec<Base> = ["37/20", "19/10", "39/20"].iter().map(|s| s.parse().unwrap()).collect();
    println!("    U_q·U_q trend (depths 3..=7, no tolerance):");
    for row in empirics::uq_product_trend(&grid, 3..=7, 1 << 20) {
        match (&row.estimate, &row.note) {
            (Some(e), _) => println!("      q={:<6} slope {:.4}  residual {:.4}  counts {:?}", row.q, e.slope, e.residual, e.counts),
            (None, note) => println!("      q={:<6} {}", row.q, note.as_deref().unwrap_or("")),
        }
    }
    Ok(())
}

/// Single-field edits of a serialized certificate, each still well-formed.
fn tampers(cert: &Certificate) -> Vec<(String, Value)> {
    let base = serde_json::to_value(cert).unwrap();
    let bump = |v: &Value| Value::String((rat(v.as_str().unwrap()) + rat("1/7")).to_string());
    let mut out = Vec::new();
    let mut edit = |name: &str, f: &dyn Fn(&mut Value)| {
        let mut v = base.clone();
        f(&mut v);
        out.push((name.to_string(), v));
    };
    edit("format", &|v| v["format"] = "fractarith-certificate/0".into());
    edit("f", &|v| v["f"] = format!("({}) + 1", v["f"].as_str().unwrap()).into());
    edit("ifs1", &|v| {
        let t = v["ifs1"]["translations"][0].clone();
        v["ifs1"]["translations"][0] = Value::String((rat(t.as_str().unwrap()) - rat("1/7")).to_string());
    });
    edit("ifs2", &|v| {
        let t = v["ifs2"]["translations"][0].clone();
        v["ifs2"]["translations"][0] = Value::String((rat(t.as_str().unwrap()) - rat("1/7")).to_string());
    });
    edit("word1", &|v| v["word1"].as_array_mut().unwrap().push(1.into()));
    edit("word2", &|v| v["word2"].as_array_mut().unwrap().push(1.into()));
    edit("sign_case", &|v| {
        let flipped = if v["sign_case"]["sx"] == "+" { "-" } else { "+" };
        v["sign_case"]["sx"] = flipped.into();
    });
    edit("grad.dx", &|v| v["grad"]["dx"][0] = Value::String((rat(v["grad"]["dx"][0].as_str().unwrap()) - rat("1/7")).to_string()));
    edit("grad.dy", &|v| v["grad"]["dy"][0] = Value::String((rat(v["grad"]["dy"][0].as_str().unwrap()) - rat("1/7")).to_string()));
    edit("grad.rect", &|v| {
        v["grad"]["rect"][0][0] = Value::String((rat(v["grad"]["rect"][0][0].as_str().unwrap()) - rat("1/7")).to_string())
    });
    edit("orientation", &|v| {
        let other = if v["orientation"] == "rows-x" { "rows-y" } else { "rows-x" };
        v["orientation"] = other.into();
    });
    edit("margins", &|v| v["margins"]["m_row"] = bump(&v["margins"]["m_row"]));
    edit("transposed_margins", &|v| v["transposed_margins"]["m_gap"] = bump(&v["transposed_margins"]["m_gap"]));
    edit("certified_interval", &|v| {
        v["certified_interval"][0] =
            Value::String((rat(v["certified_interval"][0].as_str().unwrap()) - rat("1/7")).to_string())
    });
    out
}

fn criterion_11(certs: &[Certificate]) -> Outcome {
    ensure(certs.len() >= 8, || format!("only {} certificates collected", certs.len()))?;
    for cert in certs {
        let text = serde_json::to_string(cert).unwrap();
        let back: Certificate = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        ensure(&back == cert, || "serialization round trip changed the certificate".into())?;
        check_replay(&back)?;
        for (field, value) in tampers(cert) {
            let tampered: Certificate =
                serde_json::from_value(value).map_err(|e| format!("{field} tamper did not parse: {e}"))?;
            let r = certifier::replay(&tampered);
            ensure(!r.valid, || format!("{} tamper of {} still replays", field, cert.f))?;
        }
    }
    Ok(())
}

fn main() {
    let mut certs = Vec::new();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome, elapsed: Duration| match outcome {
        Ok(()) => println!("PASS criterion {n:>2}: {name} ({elapsed:.2?})"),
        Err(e) => {
            failures += 1;
            println!("FAIL criterion {n:>2}: {name} ({elapsed:.2?}): {e}");
        }
    };
    macro_rules! run {
        ($n:expr, $name:expr, $body:expr) => {{
            let t = Instant::now();
            let outcome = $body;
            report($n, $name, outcome, t.elapsed());
        }};
    }
    run!(1, "Cantor sumset certificate [0,2]", criterion_1(&mut certs));
    run!(2, "Cantor difference certificate [-1,1]", criterion_2(&mut certs));
    run!(3, "Cantor quotient near (2/3,1)", criterion_3(&mut certs));
    run!(4, "thickness product 1 yet certified", criterion_4());
    run!(5, "C·C sub-interval [16/81,7/27]", criterion_5(&mut certs));
    run!(6, "q* isolation and its quasi-greedy expansion", criterion_6());
    run!(7, "K_19/10 inside U_19/10, hull and gap bound", criterion_7());
    run!(8, "four certificates inside f(U_q,U_q) at q=19/10", criterion_8(&mut certs));
    run!(9, "univoque criterion vs brute force", criterion_9());
    run!(10, "box-counting probes", criterion_10());
    run!(11, "certificate integrity", criterion_11(&certs));
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
