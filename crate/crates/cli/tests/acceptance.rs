//! The acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use gcb::catalog::{self, EXAMPLES};
use gcb::run::triple_of;
use gcb::{parse, serialize, Check, Structure, Verdict};
use gcbundle::atiyah::{ce_differential_eval, lie_derivative_eval, Derivation, ValueKind};
use gcbundle::gcs::{check_almost, check_equations, check_integrable, check_jacobi, schouten_residual, GacsTriple};
use gcbundle::hitchin::{check_hitchin_pair, contact_to_atiyah, gcs_from_hitchin, hitchin_from_gcs, round_trip_triple};
use gcbundle::homog::{check_gc, check_homogeneity, check_symplectization, homogenize};
use gcbundle::imgroupoid::{check_im_form, check_multiplicative, decompose_atiyah, induced_im_form};
use gcbundle::sample;
use gcbundle::{parse_expr, Chart, KForm, Polyvector, RationalExpr, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn chart(n: usize) -> Chart {
    Chart::new(&["x", "y", "z", "w"][..n]).unwrap()
}

fn e(s: &str) -> RationalExpr {
    parse_expr(s).unwrap()
}

fn catalog() -> Vec<(&'static str, Structure)> {
    EXAMPLES.iter().map(|ex| (ex.name, parse(ex.source).unwrap())).collect()
}

fn catalog_triples() -> Vec<(&'static str, GacsTriple)> {
    catalog()
        .into_iter()
        .filter_map(|(n, st)| triple_of(&st).ok().map(|t| (n, t)))
        .collect()
}

fn c1_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let per = 100;
    for i in 0..per {
        let n = 1 + i % 4;
        let k = i % 3;
        let c = chart(n);
        // d∘d = 0
        let w = sample::kform(&mut rng, &c, k.min(n), 2);
        ensure(w.d().d().is_zero(), || format!("d∘d ≠ 0 on {w}"))?;
        // Cartan: ℒ_X ω by evaluation equals i_X dω + d i_X ω, and [ℒ_X, i_Y] = i_[X,Y]
        let k1 = 1 + i % n.min(2);
        let w = sample::kform(&mut rng, &c, k1, 2);
        let x = sample::vector_field(&mut rng, &c, 2);
        let y = sample::vector_field(&mut rng, &c, 1);
        let ys: Vec<VectorField> = (0..k1).map(|_| sample::vector_field(&mut rng, &c, 1)).collect();
        let refs: Vec<&VectorField> = ys.iter().collect();
        let mut by_eval = x.apply(&w.eval(&refs));
        for j in 0..k1 {
            let br = x.bracket(&ys[j]);
            let mut args = refs.clone();
            args[j] = &br;
            by_eval = &by_eval - &w.eval(&args);
        }
        let cartan = w.d().contract(&x).unwrap().add(&w.contract(&x).unwrap().d());
        ensure(cartan.eval(&refs) == by_eval, || format!("Cartan identity fails for {w}"))?;
        let lhs = w.contract(&y).unwrap().lie(&x).sub(&w.lie(&x).contract(&y).unwrap());
        ensure(lhs == w.contract(&x.bracket(&y)).unwrap(), || "[ℒ_X, i_Y] ≠ i_[X,Y]".into())?;
        // pullback functoriality
        let w = sample::kform(&mut rng, &c, k.min(n), 2);
        let f = sample::chart_map(&mut rng, &c, &c, 2);
        let g = sample::chart_map(&mut rng, &c, &c, 1);
        let lhs = w.pullback(&g.then(&f).unwrap()).unwrap();
        ensure(lhs == w.pullback(&f).unwrap().pullback(&g).unwrap(), || "(F∘G)* ≠ G*F*".into())?;
        ensure(w.d().pullback(&f).unwrap() == w.pullback(&f).unwrap().d(), || "F*d ≠ dF*".into())?;
        // Schouten bracket with a vector field against the Lie derivative
        if n >= 2 {
            let p = sample::polyvector(&mut rng, &c, 2, 2);
            let lie = x.to_polyvector().schouten(&p);
            for a in 0..n {
                for b in 0..n {
                    let unit = |i: usize| (0..n).map(|j| RationalExpr::from_i64((i == j) as i64)).collect::<Vec<_>>();
                    let grad = |f: &RationalExpr| (0..n).map(|j| c.partial(f, j)).collect::<Vec<_>>();
                    let expected = &(&x.apply(&p.eval(&[unit(a), unit(b)])) - &p.eval(&[grad(x.component(a)), unit(b)]))
                        - &p.eval(&[unit(a), grad(x.component(b))]);
                    ensure(lie.eval(&[unit(a), unit(b)]) == expected, || "[X, P] ≠ ℒ_X P".into())?;
                }
            }
        } else {
            let p = Polyvector::zero(&c, 2);
            ensure(x.to_polyvector().schouten(&p).is_zero(), || "[X, 0] ≠ 0".into())?;
        }
    }
    Ok(format!("{per} instances each of d∘d, Cartan, pullback functoriality, Schouten vs ℒ (n ≤ 4)"))
}

fn tuples(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| (0..len).map(move |i| [t.clone(), vec![i]].concat()))
            .collect();
    }
    out
}

fn c2_atiyah() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut evaluations = 0;
    for n in 1..=2 {
        let c = chart(n);
        let frame = Derivation::frame(&c);
        for degree in 0..=3 {
            for kind in [ValueKind::Line, ValueKind::Real] {
                let w = sample::atiyah_form(&mut rng, &c, degree, kind, 2);
                let delta = sample::derivation(&mut rng, &c, 1);
                let (dw, lw) = (w.d(), w.lie(&delta));
                for t in tuples(frame.len(), degree + 1) {
                    let args: Vec<&Derivation> = t.iter().map(|&i| &frame[i]).collect();
                    ensure(dw.eval(&args) == ce_differential_eval(&w, &args), || format!("d_DL on {t:?}"))?;
                    evaluations += 1;
                }
                for t in tuples(frame.len(), degree) {
                    let args: Vec<&Derivation> = t.iter().map(|&i| &frame[i]).collect();
                    ensure(lw.eval(&args) == lie_derivative_eval(&w, &delta, &args), || format!("ℒ_Δ on {t:?}"))?;
                    if degree > 0 {
                        let mut with = vec![&delta];
                        with.extend(&args[..degree - 1]);
                        let got = w.contract(&delta).unwrap().eval(&args[..degree - 1]);
                        ensure(got == w.eval(&with), || format!("i_Δ on {t:?}"))?;
                    }
                    evaluations += 2;
                }
                if kind == ValueKind::Line {
                    ensure(w.lie(&Derivation::identity(&c)) == w, || "ℒ_𝟙 ≠ id".into())?;
                }
            }
        }
    }
    Ok(format!("{evaluations} frame-tuple evaluations, degrees 0-3, ℒ_𝟙 = id"))
}

fn c3_dorfman() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let count = 100;
    for i in 0..count {
        let c = chart(1 + i % 2);
        let a = sample::omni(&mut rng, &c, 1);
        let b = sample::omni(&mut rng, &c, 1);
        let s = sample::omni(&mut rng, &c, 1);
        let f = sample::poly(&mut rng, &c, 2, 2);
        let lhs = a.dorfman(&b.dorfman(&s));
        let rhs = a.dorfman(&b).dorfman(&s).add(&b.dorfman(&a.dorfman(&s)));
        ensure(lhs == rhs, || format!("left Leibniz fails on triple {i}"))?;
        let lhs = a.dorfman(&b.scale(&f));
        let rhs = a.dorfman(&b).scale(&f).add(&b.scale(&a.der.symbol().apply(&f)));
        ensure(lhs == rhs, || format!("module Leibniz fails on triple {i}"))?;
    }
    Ok(format!("{count} random omni-section triples"))
}

fn c4_almost() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut total, mut hitchin_pass) = (0, 0);
    for i in 0..120 {
        let c = if i % 4 == 0 { chart(3) } else { chart(1) };
        let t = if i % 3 == 0 {
            sample::hitchin_triple(&mut rng, &c)
        } else {
            let t = sample::almost_triple(&mut rng, &c);
            if i % 2 == 0 {
                let bump = sample::atiyah_form(&mut rng, &c, 2, ValueKind::Line, 1);
                GacsTriple::new(t.phi.clone(), t.j.clone(), t.omega.add(&bump)).unwrap()
            } else {
                t
            }
        };
        let a = check_almost(&t);
        ensure(a.routes_agree(), || format!("routes disagree on triple {i}: {t}"))?;
        if i % 3 == 0 {
            ensure(a.passed(), || format!("Hitchin triple {i} is not almost"))?;
            hitchin_pass += 1;
        }
        total += 1;
    }
    ensure(hitchin_pass >= 10, || "too few Hitchin triples".into())?;
    Ok(format!("{total} triples, {hitchin_pass} passing from Hitchin data"))
}

fn c5_equivalence() -> Outcome {
    let mut checked = 0;
    let mut verdicts = [0usize; 2];
    let mut one = |name: &str, t: &GacsTriple| -> Result<(), String> {
        let n = check_integrable(t).map_err(|e| e.to_string())?.passed();
        let eqs = check_equations(t).map_err(|e| e.to_string())?.passed();
        ensure(n == eqs, || format!("{name}: N_I ≡ 0 is {n} but the equations give {eqs}"))?;
        checked += 1;
        verdicts[n as usize] += 1;
        Ok(())
    };
    for (name, t) in catalog_triples() {
        one(name, &t)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut random = 0;
    while random < 100 {
        let c = if random % 10 == 0 { chart(3) } else { chart(1) };
        let t = sample::almost_triple(&mut rng, &c);
        if !check_almost(&t).passed() {
            continue;
        }
        one(&format!("random #{random}"), &t)?;
        random += 1;
    }
    ensure(verdicts[0] > 0 && verdicts[1] > 0, || format!("one-sided sample {verdicts:?}"))?;
    Ok(format!(
        "{checked} almost structures ({} integrable, {} not)",
        verdicts[1], verdicts[0]
    ))
}

fn c6_contact() -> Outcome {
    let c = chart(3);
    let theta = KForm::one_form(&c, vec![e("-y"), e("0"), e("1")]).unwrap();
    let ca = contact_to_atiyah(&theta).map_err(|e| e.to_string())?;
    let dxdy = KForm::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
    ensure(ca.omega.comp0() == &dxdy, || format!("Ω₀ = {}", ca.omega.comp0()))?;
    ensure(ca.omega.comp1() == Some(&theta), || "Ω₁ ≠ θ".into())?;
    ensure(ca.omega.d().is_zero(), || "Ω not closed".into())?;
    ensure(ca.nondegenerate, || "Ω degenerate".into())?;
    let (mu0, mu1) = decompose_atiyah(&ca.omega).map_err(|e| e.to_string())?;
    ensure(mu0.is_zero() && mu1.as_ref() == Some(&theta), || "decomposition is not (0, θ)".into())?;
    let dz = contact_to_atiyah(&KForm::dx(&c, 2)).map_err(|e| e.to_string())?;
    ensure(!dz.nondegenerate, || "dz accepted as contact".into())?;
    let st = parse("[manifold]\ncoords = x, y, z\n[theta]\nz = 1\n").unwrap();
    let rep = gcb::run(&st, "dz", &[Check::Contact], false);
    ensure(rep.get("contact.nondegenerate").map(|c| c.verdict) == Some(Verdict::Fail), || {
        "CLI accepted dz".into()
    })?;
    Ok("Ω = (dx∧dy, dz - y dx), closed, nondegenerate, decomposes to (0, θ); dz rejected".into())
}

fn c7_jacobi() -> Outcome {
    let mut count = 0;
    for (name, st) in catalog() {
        let j = st.j.clone().or_else(|| triple_of(&st).ok().map(|t| t.j));
        if let Some(j) = j {
            ensure(check_jacobi(&j).routes_agree(), || format!("{name}: routes disagree"))?;
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut verdicts = [0usize; 2];
    for i in 0..60 {
        let c = chart(2 + i % 2);
        let j = sample::jacobi_pair(&mut rng, &c);
        let r = check_jacobi(&j);
        ensure(r.routes_agree(), || format!("random pair {i}: routes disagree on {j}"))?;
        verdicts[r.passed() as usize] += 1;
        count += 1;
    }
    let st = parse(catalog::find("non_jacobi").unwrap().source).unwrap();
    let j = st.j.unwrap();
    let c = chart(3);
    let expected = Polyvector::from_components(&c, 3, [(vec![0, 1, 2], e("-2"))]).unwrap();
    ensure(schouten_residual(&j) == expected, || format!("[Λ,Λ] = {}", schouten_residual(&j)))?;
    Ok(format!(
        "{count} bivectors ({} Jacobi, {} not); [Λ,Λ] = -2∂x∧∂y∧∂z",
        verdicts[1], verdicts[0]
    ))
}

fn c8_round_trips() -> Outcome {
    let mut count = 0;
    for (name, t) in catalog_triples() {
        if !check_almost(&t).passed() || t.j.is_zero() {
            continue;
        }
        let Ok(p) = hitchin_from_gcs(&t) else { continue };
        if !check_hitchin_pair(&p).passed() {
            continue;
        }
        let back = gcs_from_hitchin(&p).map_err(|e| e.to_string())?;
        ensure(back == t, || format!("{name}: gcs ∘ hitchin ≠ id"))?;
        ensure(hitchin_from_gcs(&back).unwrap() == p, || format!("{name}: hitchin ∘ gcs ≠ id"))?;
        count += 1;
    }
    let catalog_count = count;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..24 {
        let c = if i % 3 == 0 { chart(3) } else { chart(1) };
        let p = sample::hitchin_pair(&mut rng, &c);
        let t = gcs_from_hitchin(&p).map_err(|e| e.to_string())?;
        ensure(hitchin_from_gcs(&t).unwrap() == p, || format!("random pair {i}: hitchin ∘ gcs ≠ id"))?;
        ensure(round_trip_triple(&t) == Ok(true), || format!("random pair {i}: gcs ∘ hitchin ≠ id"))?;
        count += 1;
    }
    ensure(catalog_count >= 3, || "too few catalog pairs".into())?;
    Ok(format!("{catalog_count} catalog and {} random pairs", count - catalog_count))
}

fn c9_homogenization() -> Outcome {
    let mut count = 0;
    let mut symp = 0;
    for (name, st) in catalog() {
        let Ok(t) = triple_of(&st) else { continue };
        if !check_almost(&t).passed() {
            continue;
        }
        let on_m = check_integrable(&t).map_err(|e| e.to_string())?.passed();
        let g = homogenize(&t);
        let on_total = check_homogeneity(&g).passed() && check_gc(&g).passed();
        ensure(on_m == on_total, || format!("{name}: M says {on_m}, M̃ says {on_total}"))?;
        count += 1;
        if t.phi.is_zero() {
            if let Some(theta) = &st.theta {
                let r = check_symplectization(&g, theta);
                ensure(r.passed(), || format!("{name}: {r}"))?;
                symp += 1;
            }
        }
    }
    ensure(symp >= 3, || "too few φ = 0 contact triples".into())?;
    Ok(format!("{count} catalog triples agree; symplectization exact on {symp}"))
}

fn c10_im() -> Outcome {
    let mut lines = Vec::new();
    for name in ["pair_groupoid_r", "bundle_of_groups"] {
        let st = parse(catalog::find(name).unwrap().source).unwrap();
        let g = st.groupoid.as_ref().unwrap().build(&st.chart).map_err(|e| e.to_string())?;
        let w = st.form.as_ref().unwrap();
        ensure(check_multiplicative(&g, w).unwrap().passed(), || format!("{name}: not multiplicative"))?;
        let ind = induced_im_form(&g, w).map_err(|e| e.to_string())?;
        let set = check_im_form(&ind.algebroid, &ind.form).map_err(|e| e.to_string())?;
        ensure(set.passed() && ind.connection.passed(), || format!("{name}: induced form fails"))?;
        lines.push(name);
    }
    let st = parse(catalog::find("pair_groupoid_nonmult").unwrap().source).unwrap();
    let g = st.groupoid.as_ref().unwrap().build(&st.chart).unwrap();
    let r = check_multiplicative(&g, st.form.as_ref().unwrap()).unwrap();
    ensure(!r.passed(), || "non-multiplicative form passed".into())?;
    Ok(format!("{} pass check_im_form; pair_groupoid_nonmult residual {}", lines.join(", "), r.nonzero[0].1))
}

fn c11_atlas() -> Outcome {
    let verdict = |name: &str| {
        let st = parse(catalog::find(name).unwrap().source).unwrap();
        gcb::run(&st, name, &[Check::Contact], false).get("contact.atlas.v").map(|c| c.verdict)
    };
    ensure(verdict("noncoorientable_ptr2") == Some(Verdict::Pass), || "ptr2 fails".into())?;
    ensure(verdict("ptr2_wrong_cocycle") == Some(Verdict::Fail), || "broken cocycle passes".into())?;
    Ok("noncoorientable_ptr2 passes, ptr2_wrong_cocycle fails".into())
}

fn c12_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gcb");
    let manifest = catalog::manifest();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let top: BTreeSet<&str> = ["schema", "file", "verdict", "conventions", "checks", "timing_ms"].into();
    let entry: BTreeSet<&str> = ["name", "verdict", "checked", "nonzero", "residuals", "truncated", "error"].into();
    for ex in EXAMPLES {
        let st = parse(ex.source).map_err(|e| format!("{}: {e}", ex.name))?;
        let text = serialize(&st);
        ensure(parse(&text).ok().as_ref() == Some(&st), || format!("{}: round trip", ex.name))?;
        ensure(serialize(&parse(&text).unwrap()) == text, || format!("{}: serializer not stable", ex.name))?;

        let out = Command::new(bin).args(["examples", ex.name]).output().unwrap();
        ensure(out.stdout == ex.source.as_bytes(), || format!("{}: emitted file differs", ex.name))?;

        let mut reports = Vec::new();
        for i in 0..2 {
            let path = dir.path().join(format!("{}-{i}.json", ex.name));
            let out = Command::new(bin)
                .args(["check", &format!("examples/{}", ex.name), "--report", path.to_str().unwrap()])
                .output()
                .unwrap();
            let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
            let keys: BTreeSet<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
            ensure(keys == top, || format!("{}: report keys {keys:?}", ex.name))?;
            ensure(v["schema"] == 1, || "schema ≠ 1".into())?;
            for c in v["checks"].as_array().unwrap() {
                let keys: BTreeSet<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
                ensure(keys == entry, || format!("{}: check keys {keys:?}", ex.name))?;
            }
            let expected = &manifest[ex.name];
            let code = out.status.code();
            let want = if expected.verdict == Verdict::Pass { 0 } else { 1 };
            ensure(code == Some(want), || format!("{}: exit {code:?}, expected {want}", ex.name))?;
            let rep: gcb::Report = serde_json::from_value(v).unwrap();
            for (name, verdict) in &expected.checks {
                let got = rep.get(name).map(|c| c.verdict);
                ensure(got == Some(*verdict), || format!("{}: {name} is {got:?}", ex.name))?;
            }
            ensure(rep.checks.len() == expected.checks.len(), || format!("{}: check list changed", ex.name))?;
            reports.push(rep);
        }
        let strip = |r: &gcb::Report| gcb::Report { timing_ms: Default::default(), ..r.clone() };
        ensure(strip(&reports[0]) == strip(&reports[1]), || format!("{}: report not deterministic", ex.name))?;
    }
    let bad = dir.path().join("bad.gcb");
    std::fs::write(&bad, "[manifold]\ncoords = x\n[theta]\nx = w\n").unwrap();
    let code = Command::new(bin).args(["check", bad.to_str().unwrap()]).output().unwrap().status.code();
    ensure(code == Some(2), || format!("parse error exits {code:?}"))?;
    let code = Command::new(bin).args(["examples", "bogus"]).output().unwrap().status.code();
    ensure(code == Some(2), || format!("unknown example exits {code:?}"))?;
    Ok(format!("{} shipped files: round trip, exit codes, schema 1, manifest verdicts, determinism", EXAMPLES.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("kernel soundness", c1_kernel),
        ("Atiyah calculus oracle agreement", c2_atiyah),
        ("Dorfman-Jacobi axioms", c3_dorfman),
        ("almost structure: block relations vs I², I†", c4_almost),
        ("N_I ≡ 0 iff the integrability equations", c5_equivalence),
        ("contact form as Atiyah 2-form", c6_contact),
        ("Jacobi dual-route agreement", c7_jacobi),
        ("contact-Hitchin round trips", c8_round_trips),
        ("homogenization equivalence", c9_homogenization),
        ("multiplicative to IM forms", c10_im),
        ("atlas transition compatibility", c11_atlas),
        ("CLI contract", c12_cli),
    ];
    let start = Instant::now();
    let mut failed = 0;
    println!("acceptance suite");
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = t0.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
