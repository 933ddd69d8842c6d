//! End-to-end acceptance criteria. Every check is an exact identity over ℚ.
//! Run with `--nocapture` to see one line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use jetsym::conservation::{
    adjoint_residual, euler_operator, self_adjointness, self_adjointness_of_forms, solve_adjoint_determining,
};
use jetsym::covering::{we_ansatz, Covering, FlatnessResidual, WeReading, WeRepresentation};
use jetsym::expr::{Monomial, Poly};
use jetsym::symmetry::{
    apply_recursion, jacobi_bracket, solve_determining, span_contains, symmetry_residual, AnsatzSpec, RecursionOperator,
};
use jetsym::{
    parse, total_derivative, Coordinate, GeneratingFunction, JetContext, JetExpr, MultiIndex, Parallelism, PdeSystem,
    Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;

/// Number, check and runtime bound in seconds.
type Criterion = (u32, fn() -> Outcome, Option<u64>);

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

fn all_zero(v: &[JetExpr]) -> bool {
    v.iter().all(JetExpr::is_zero)
}

fn gf(text: &str, ctx: &JetContext) -> GeneratingFunction {
    GeneratingFunction::parse(text, ctx).unwrap()
}

/// Random differential polynomial over `pool` with small rational coefficients.
fn random_poly(rng: &mut ChaCha8Rng, pool: &[Coordinate], max_terms: usize) -> JetExpr {
    let mut p = Poly::zero();
    for _ in 0..rng.random_range(1..=max_terms) {
        let factors: Vec<(Coordinate, u32)> = (0..rng.random_range(0..=3))
            .map(|_| (pool[rng.random_range(0..pool.len())].clone(), rng.random_range(1..=2)))
            .collect();
        let q = Rational::new(rng.random_range(-6i64..=6).into(), rng.random_range(1i64..=3).into());
        p.add_term(Monomial::from_factors(factors), q);
    }
    JetExpr::from(p)
}

/// Mostly polynomials, one in four a genuine quotient.
fn random_expr(rng: &mut ChaCha8Rng, pool: &[Coordinate]) -> JetExpr {
    let p = random_poly(rng, pool, 4);
    if rng.random_range(0..4) > 0 {
        return p;
    }
    let q = &random_poly(rng, pool, 2) + &JetExpr::integer(1);
    p.checked_div(&q).unwrap_or(p)
}

fn full_pool(max_order: u32) -> Vec<Coordinate> {
    let mut out = vec![Coordinate::Independent(0), Coordinate::Independent(1)];
    out.extend(
        MultiIndex::all_up_to(2, max_order)
            .into_iter()
            .map(|s| Coordinate::Jet(0, s)),
    );
    out
}

fn internal_pool(sys: &PdeSystem, max_order: u32) -> Vec<Coordinate> {
    let mut out = vec![Coordinate::Independent(0), Coordinate::Independent(1)];
    out.extend(sys.internal_coordinates(max_order));
    out
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let free = full_pool(4);
    for k in 0..100 {
        let e = random_expr(&mut rng, &free);
        let d = |e: &JetExpr, i| total_derivative(e, i).unwrap();
        ensure(d(&d(&e, 0), 1) == d(&d(&e, 1), 0), || {
            format!("[D_x, D_t] nonzero on case {k}")
        })?;
    }
    for sys in [PdeSystem::burgers(), PdeSystem::kdv()] {
        let pool = internal_pool(&sys, 4);
        for k in 0..100 {
            let e = random_expr(&mut rng, &pool);
            let d = |e: &JetExpr, i| sys.restricted_total_derivative(e, i).unwrap();
            ensure(d(&d(&e, 0), 1) == d(&d(&e, 1), 0), || {
                format!("restricted commutator nonzero on case {k}")
            })?;
        }
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let sys = PdeSystem::burgers();
    let expected = ["u_x", "u_xx + u*u_x", "t*u_x + 1", "x*u_x + 2*t*(u_xx + u*u_x) + u"];
    let basis = solve_determining(&sys, &AnsatzSpec::new(2, 2, 1), Parallelism::default()).unwrap();
    for phi in expected {
        let phi = gf(phi, sys.ctx());
        ensure(all_zero(&symmetry_residual(&sys, &phi).unwrap()), || {
            format!("nonzero residual for {phi:?}")
        })?;
        ensure(span_contains(&basis, &phi).unwrap(), || {
            format!("{phi:?} outside the solver basis")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let sys = PdeSystem::kdv();
    let ctx = sys.ctx();
    let r = RecursionOperator::kdv(ctx).unwrap();
    let ux = gf("u_x", ctx);
    let r1 = apply_recursion(&r, &ux, &sys).unwrap();
    let r2 = apply_recursion(&r, &r1, &sys).unwrap();
    ensure(r1 == gf("u*u_x + u_xxx", ctx), || {
        format!("R(u_x) = {}", r1.to_text(ctx))
    })?;
    let fifth = gf("u_xxxxx + 5/3*u*u_xxx + 10/3*u_x*u_xx + 5/6*u^2*u_x", ctx);
    ensure(r2 == fifth, || format!("R^2(u_x) = {}", r2.to_text(ctx)))?;
    for phi in [&r1, &r2] {
        ensure(all_zero(&symmetry_residual(&sys, phi).unwrap()), || {
            format!("nonzero residual for {}", phi.to_text(ctx))
        })?;
    }
    ensure(all_zero(jacobi_bracket(&r1, &r2).unwrap().components()), || {
        "flows do not commute".into()
    })?;
    let basis = solve_determining(&sys, &AnsatzSpec::new(5, 3, 0), Parallelism::default()).unwrap();
    ensure(basis.len() == 3, || format!("dimension {}", basis.len()))?;
    let expected = [ux, r1, r2];
    for phi in &expected {
        ensure(span_contains(&basis, phi).unwrap(), || {
            format!("{} outside the basis", phi.to_text(ctx))
        })?;
    }
    for b in &basis {
        ensure(span_contains(&expected, b).unwrap(), || {
            format!("unexpected {}", b.to_text(ctx))
        })?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let sys = PdeSystem::kdv();
    let ctx = sys.ctx();
    let expected: Vec<_> = ["1", "u", "1/2*u^2 + u_xx"].iter().map(|s| gf(s, ctx)).collect();
    for u in &expected {
        ensure(all_zero(&adjoint_residual(&sys, u).unwrap()), || {
            format!("nonzero residual for {}", u.to_text(ctx))
        })?;
    }
    let rejected = adjoint_residual(&sys, &gf("u_x", ctx)).unwrap();
    ensure(rejected == [parse("-u_x^2", ctx).unwrap()], || {
        format!("u_x residual {rejected:?}")
    })?;
    let basis = solve_adjoint_determining(&sys, &AnsatzSpec::new(2, 2, 0), Parallelism::default()).unwrap();
    ensure(basis.len() == 3, || format!("dimension {}", basis.len()))?;
    for u in &expected {
        ensure(span_contains(&basis, u).unwrap(), || {
            format!("{} outside the basis", u.to_text(ctx))
        })?;
    }
    for b in &basis {
        ensure(span_contains(&expected, b).unwrap(), || {
            format!("unexpected {}", b.to_text(ctx))
        })?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool = full_pool(3);
    for k in 0..100 {
        let e = random_expr(&mut rng, &pool);
        let div = total_derivative(&e, rng.random_range(0..2)).unwrap();
        ensure(euler_operator(&div, &ctx).unwrap().is_zero(), || {
            format!("E(D e) nonzero on case {k}")
        })?;
    }
    let cases = [
        ("u_x^2/2", "-u_xx", "u_xx = 0"),
        ("u^3/6 - u_x^2/2", "u^2/2 + u_xx", "u_xx = -1/2*u^2"),
    ];
    for (omega, el, equation) in cases {
        let got = euler_operator(&parse(omega, &ctx).unwrap(), &ctx).unwrap();
        ensure(got == gf(el, &ctx), || format!("E({omega}) = {}", got.to_text(&ctx)))?;
        let diff = self_adjointness_of_forms(got.components(), &ctx, None).unwrap();
        ensure(diff.is_zero(), || {
            format!("Euler-Lagrange form of {omega} is not self-adjoint")
        })?;
        let sys = PdeSystem::parse(ctx.clone(), &[equation]).unwrap();
        let report = self_adjointness(&sys, None).unwrap();
        ensure(report.free && report.restricted, || {
            format!("{equation} is not self-adjoint")
        })?;
    }
    Ok(())
}

fn residual_text(cov: &Covering, res: &[FlatnessResidual]) -> String {
    let ctx = cov.ctx();
    let names = ctx.independent();
    res.iter()
        .map(|r| {
            format!(
                "[{},{},{}] {}",
                names[r.i],
                names[r.j],
                ctx.fibers()[r.fiber],
                r.residual.to_text(ctx)
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn criterion_6() -> Outcome {
    for file in ["kdv-potential.cov", "cole-hopf.cov"] {
        let cov = Covering::from_text(&read(file)).unwrap();
        ensure(cov.is_flat().unwrap(), || format!("{file} is not flat"))?;
    }
    let perturbed = Covering::from_text(&read("kdv-potential-perturbed.cov")).unwrap();
    ensure(!perturbed.is_flat().unwrap(), || "perturbed covering is flat".into())?;
    let rep = WeRepresentation::from_text(&read("we-abelian.rep")).unwrap();
    for (reading, flat) in [(WeReading::Corrected, true), (WeReading::Literal, false)] {
        let asm = we_ansatz(&rep, reading).unwrap();
        ensure(asm.relations_hold(), || "abelian relations fail".into())?;
        let res = asm.covering.check_flatness().unwrap();
        println!(
            "  WE {} reading: {}",
            reading.name(),
            residual_text(&asm.covering, &res)
        );
        let is_flat = res.iter().all(|r| r.residual.is_zero());
        ensure(is_flat == flat, || {
            format!("WE {} reading flat = {is_flat}", reading.name())
        })?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pool = full_pool(2);
    let br = |a: &GeneratingFunction, b: &GeneratingFunction| jacobi_bracket(a, b).unwrap();
    for k in 0..50 {
        let [a, b, c] = [0; 3].map(|_| GeneratingFunction::scalar(random_poly(&mut rng, &pool, 3)));
        let ab = br(&a, &b);
        let ba = br(&b, &a);
        ensure(ab.components()[0] == -&ba.components()[0], || {
            format!("antisymmetry fails on case {k}")
        })?;
        let cyclic = [br(&a, &br(&b, &c)), br(&b, &br(&c, &a)), br(&c, &ab)];
        let sum = cyclic.iter().fold(JetExpr::zero(), |s, t| &s + &t.components()[0]);
        ensure(sum.is_zero(), || format!("Jacobi identity fails on case {k}"))?;
    }
    let ux = gf("u_x", &ctx);
    for k in 0..50 {
        let psi = random_poly(&mut rng, &pool, 4);
        let got = br(&ux, &GeneratingFunction::scalar(psi.clone()));
        ensure(
            got.components()[0] == -&psi.partial(&Coordinate::Independent(0)),
            || format!("{{u_x, psi}} differs from -psi_x on case {k}"),
        )?;
    }
    Ok(())
}

fn cli_commands() -> Vec<Vec<String>> {
    let file = |n: &str| data(n).to_string_lossy().into_owned();
    let raw: Vec<Vec<String>> = vec![
        vec![
            "--system".into(),
            "burgers".into(),
            "check-symmetry".into(),
            "--phi".into(),
            "x*u_x + 2*t*(u_xx + u*u_x) + u".into(),
        ],
        vec![
            "--system".into(),
            "burgers".into(),
            "symmetries".into(),
            "--order".into(),
            "2".into(),
            "--degree".into(),
            "2".into(),
            "--xt-degree".into(),
            "1".into(),
        ],
        vec![
            "recursion".into(),
            "--phi".into(),
            "u_x".into(),
            "--steps".into(),
            "2".into(),
        ],
        vec![
            "symmetries".into(),
            "--order".into(),
            "5".into(),
            "--degree".into(),
            "3".into(),
        ],
        vec![
            "--format".into(),
            "json".into(),
            "symmetries".into(),
            "--order".into(),
            "5".into(),
            "--degree".into(),
            "3".into(),
        ],
        vec![
            "bracket".into(),
            "--phi".into(),
            "u*u_x + u_xxx".into(),
            "--psi".into(),
            "u_xxxxx + 5/3*u*u_xxx + 10/3*u_x*u_xx + 5/6*u^2*u_x".into(),
        ],
        vec![
            "conservation".into(),
            "--order".into(),
            "2".into(),
            "--degree".into(),
            "2".into(),
        ],
        vec!["check-conservation".into(), "--upsilon".into(), "u_x".into()],
        vec!["euler".into(), "--lagrangian".into(), "u^3/6 - u_x^2/2".into()],
        vec!["self-adjoint".into()],
        vec![
            "covering".into(),
            "check".into(),
            "--file".into(),
            file("kdv-potential.cov"),
        ],
        vec![
            "covering".into(),
            "check".into(),
            "--file".into(),
            file("cole-hopf.cov"),
        ],
        vec![
            "covering".into(),
            "check".into(),
            "--file".into(),
            file("kdv-potential-perturbed.cov"),
        ],
        vec!["covering".into(), "we".into(), "--rep".into(), file("we-abelian.rep")],
        vec![
            "--format".into(),
            "json".into(),
            "covering".into(),
            "we".into(),
            "--rep".into(),
            file("we-abelian.rep"),
        ],
    ];
    raw
}

fn criterion_8() -> Outcome {
    let run = |args: &[String]| Command::new(env!("CARGO_BIN_EXE_jetsym")).args(args).output().unwrap();
    for args in cli_commands() {
        let (a, b) = (run(&args), run(&args));
        ensure(a.status.code().is_some(), || format!("`{}` was killed", args.join(" ")))?;
        ensure(
            a.stdout == b.stdout && a.stderr == b.stderr && a.status == b.status,
            || format!("`{}` differs between runs", args.join(" ")),
        )?;
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        (1, criterion_1, Some(10)),
        (2, criterion_2, Some(30)),
        (3, criterion_3, Some(60)),
        (4, criterion_4, Some(30)),
        (5, criterion_5, None),
        (6, criterion_6, Some(10)),
        (7, criterion_7, Some(10)),
        (8, criterion_8, None),
    ];
    let mut failures = Vec::new();
    for (n, run, bound) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| match bound {
            Some(s) if elapsed >= Duration::from_secs(s) => Err(format!("took {elapsed:.2?}, bound {s} s")),
            _ => Ok(()),
        });
        match outcome {
            Ok(()) => println!("criterion {n}: PASS ({elapsed:.2?})"),
            Err(why) => {
                println!("criterion {n}: FAIL ({elapsed:.2?}): {why}");
                failures.push(n);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
