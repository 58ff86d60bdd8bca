//! End-to-end acceptance suite. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use summlab_core::index_lab::{
    cotype_branch_formula, cotype_seams, estimate_index, exact_index, fit_power_law, index_shift,
    lower_bound_pol_cotype, maximize_quotient, real_even_branch_formula, real_even_seams, seams_agree,
    summing_quotient, upper_bound_mult, Branch, ExactCase, Strategy,
};
use summlab_core::maps::{eval_polynomial, mixed_power_sum, operator_norm, DenseTensor, MapRef, MultilinearMap};
use summlab_core::oracles::{brute_force_mixed_sum, brute_force_weak_norm, konig_growth_check, pietsch_check};
use summlab_core::spaces::{Exponent, SpaceDescriptor};
use summlab_core::weak_norms::{weak_norm, weak_objective, VectorFamily};
use summlab_core::witnesses::{
    cotype_witness_with, identity_witness, real_even_witness_with, tensor_witness, AnchorStrategy,
    CoefficientConstraint, WitnessCoefficients, NORM_BOUND_TOL,
};
use summlab_core::{Result, SearchBudget};

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_space(rng: &mut ChaCha8Rng, dim: usize) -> SpaceDescriptor {
    match rng.random_range(0..5) {
        0 => SpaceDescriptor::lp(1.0, dim).unwrap(),
        1 => SpaceDescriptor::lp(1.5, dim).unwrap(),
        2 => SpaceDescriptor::lp(2.0, dim).unwrap(),
        3 => SpaceDescriptor::lp(3.0, dim).unwrap(),
        _ => SpaceDescriptor::sup(dim).unwrap(),
    }
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
        .collect()
}

fn scaled_basis(rng: &mut ChaCha8Rng, space: SpaceDescriptor, n: usize) -> VectorFamily {
    let d = space.dim();
    let mut slots: Vec<usize> = (0..d).collect();
    slots.shuffle(rng);
    let rows = (0..n)
        .map(|k| {
            let mut row = vec![0.0; d];
            row[slots[k % d]] = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            row
        })
        .collect();
    VectorFamily::from_rows(space, rows).unwrap()
}

fn criterion_1() -> Outcome {
    let budget = SearchBudget::default();
    for d in [1usize, 2, 4, 9, 16, 25, 32] {
        let r = lift(pietsch_check(d, &budget))?;
        ensure(r.passed, || {
            format!("d = {d}: best quotient {} vs √d = {}", r.quotient, r.expected)
        })?;
        let space = lift(SpaceDescriptor::lp(2.0, d))?;
        let id = lift(identity_witness(space))?;
        let basis = lift(summing_quotient(
            &id,
            &[lift(VectorFamily::basis(space, d))?],
            2.0,
            2.0,
            &budget,
        ))?;
        ensure((basis.quotient - r.expected).abs() <= 1e-12 * r.expected, || {
            format!("d = {d}: basis quotient {} is not √d", basis.quotient)
        })?;
    }
    Ok("best quotient equals √d for d ∈ {1,2,4,9,16,25,32}".into())
}

fn criterion_2() -> Outcome {
    let budget = SearchBudget::default();
    let mut worst_residual: f64 = 0.0;
    for m in 1..=3usize {
        let grid: &[usize] = if m == 3 { &[2, 4, 8] } else { &[2, 4, 8, 16] };
        let mut basis_samples = Vec::new();
        for &n in grid {
            let t = lift(tensor_witness(m, n, budget.tuple_budget))?;
            let basis = lift(maximize_quotient(
                MapRef::Multilinear(&t),
                n,
                2.0,
                2.0,
                &[Strategy::Basis],
                &budget,
            ))?;
            let best = lift(maximize_quotient(
                MapRef::Multilinear(&t),
                n,
                2.0,
                2.0,
                &[Strategy::Basis, Strategy::RandomAscent],
                &budget,
            ))?;
            let cap = (n as f64).powf(m as f64 / 2.0);
            ensure(best.quotient <= cap * (1.0 + 1e-6), || {
                format!(
                    "m = {m}, n = {n}: searched quotient {} exceeds n^(m/2) = {cap}",
                    best.quotient
                )
            })?;
            basis_samples.push(basis);
        }
        let est = lift(estimate_index(&basis_samples))?;
        ensure(
            (est.slope - m as f64 / 2.0).abs() <= 1e-9 && est.residual <= 1e-9,
            || format!("m = {m}: slope {} residual {}", est.slope, est.residual),
        )?;
        worst_residual = worst_residual.max(est.residual);
    }
    Ok(format!("slopes m/2 for m = 1, 2, 3, max residual {worst_residual:.1e}"))
}

fn criterion_3() -> Outcome {
    let budget = SearchBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let exps = [1.0, 1.5, 2.0, 3.0, 4.0];
    let (mut checked, mut skipped) = (0usize, 0usize);
    for m in 1..=2usize {
        for &p in &exps {
            for &q in &exps {
                let ub = upper_bound_mult(m, p, q);
                for n in [2usize, 4, 8] {
                    let mut maps: Vec<(MultilinearMap, Vec<Vec<VectorFamily>>)> = Vec::new();
                    let l2 = lift(SpaceDescriptor::lp(2.0, n))?;
                    let mut tensor_families = vec![vec![lift(VectorFamily::basis(l2, n))?; m]];
                    for _ in 0..3 {
                        tensor_families.push((0..m).map(|_| scaled_basis(&mut rng, l2, n)).collect());
                        if q == 2.0 {
                            tensor_families.push(
                                (0..m)
                                    .map(|_| VectorFamily::from_rows(l2, gaussian_rows(&mut rng, n, n)).unwrap())
                                    .collect(),
                            );
                        }
                    }
                    maps.push((lift(tensor_witness(m, n, budget.tuple_budget))?, tensor_families));
                    if m == 1 {
                        for space in [l2, lift(SpaceDescriptor::lp(1.0, n))?, lift(SpaceDescriptor::sup(n))?] {
                            let mut fams = vec![vec![lift(VectorFamily::basis(space, n))?]];
                            for _ in 0..3 {
                                fams.push(vec![scaled_basis(&mut rng, space, n)]);
                                let exact_random = space.is_sup_normed() || space.is_l1() || q == 2.0;
                                if exact_random {
                                    fams.push(vec![lift(VectorFamily::from_rows(
                                        space,
                                        gaussian_rows(&mut rng, n, n),
                                    ))?]);
                                }
                            }
                            maps.push((lift(identity_witness(space))?, fams));
                        }
                    }
                    for (t, family_sets) in &maps {
                        let norm = t.known_norm().ok_or("map without closed-form norm")?;
                        for fams in family_sets {
                            let s = lift(summing_quotient(t, fams, p, q, &budget))?;
                            if s.conservative {
                                skipped += 1;
                                continue;
                            }
                            checked += 1;
                            let cap = norm * (n as f64).powf(ub) * (1.0 + 1e-6);
                            ensure(s.quotient <= cap, || {
                                format!("m = {m}, p = {p}, q = {q}, n = {n}: quotient {} > {cap}", s.quotient)
                            })?;
                        }
                    }
                }
            }
        }
    }
    ensure(checked > 0, || "no exact-path quotients evaluated".into())?;
    Ok(format!(
        "{checked} exact-path quotients, 0 violations ({skipped} search-path skipped)"
    ))
}

fn criterion_4() -> Outcome {
    let budget = SearchBudget::default();
    let mut slopes = Vec::new();
    for q in [2.5, 3.0, 4.0] {
        let r = lift(konig_growth_check(q, &[2, 4, 8, 16], &budget))?;
        let slope = r.slope.ok_or("no slope")?;
        ensure(r.passed, || format!("q = {q}: slope {slope}, points {:?}", r.points))?;
        slopes.push(format!("{slope:.4}"));
    }
    Ok(format!("slopes {} for q = 2.5, 3, 4", slopes.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut seams = 0;
    for m in [2usize, 4] {
        for q in [1.0, 1.5, 2.0, 3.0] {
            for r in [2.0, 2.5, 3.0] {
                let r = Exponent::Finite(r);
                let (s1, s2) = cotype_seams(m, q, r);
                let f = |b, p| cotype_branch_formula(b, m, p, q, r);
                let mut pairs = Vec::new();
                if q <= 2.0 {
                    pairs.push((Branch::A, Branch::B, s1));
                }
                if q == 2.0 {
                    pairs.push((Branch::B, Branch::C, s2));
                }
                if q >= 2.0 {
                    pairs.push((Branch::C, Branch::D, s2));
                }
                for (a, b, p) in pairs {
                    seams += 1;
                    ensure(seams_agree(f(a, p), f(b, p)), || {
                        format!(
                            "cotype m = {m}, q = {q}, r = {r}: {a} {} vs {b} {} at p = {p}",
                            f(a, p),
                            f(b, p)
                        )
                    })?;
                    let picked = lift(lower_bound_pol_cotype(m, p, q, r))?;
                    ensure(seams_agree(picked.value, f(a, p)), || {
                        format!("selected value off at p = {p}")
                    })?;
                }
            }
            let (s1, s2) = real_even_seams(m, q);
            let f = |b, p| real_even_branch_formula(b, m, p, q);
            let mut pairs = Vec::new();
            if q <= 2.0 {
                pairs.push((Branch::A, Branch::B, s1));
            }
            if q >= 2.0 {
                pairs.push((Branch::C, Branch::D, s2));
            }
            for (a, b, p) in pairs {
                seams += 1;
                ensure(seams_agree(f(a, p), f(b, p)), || {
                    format!(
                        "real even m = {m}, q = {q}: {a} {} vs {b} {} at p = {p}",
                        f(a, p),
                        f(b, p)
                    )
                })?;
            }
        }
    }
    Ok(format!("{seams} seams agree to 1e-12"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    for _ in 0..100 {
        let m = rng.random_range(1..=5usize);
        let mf = m as f64;
        let (lo, hi) = (2.0 / (2.0 * mf + 1.0), 2.0 / (mf + 1.0));
        let p = lo + rng.random_range(0.0..1.0) * (hi - lo);
        let exact = lift(exact_index(ExactCase::L1ToL2 { m, p }))?.value;
        let lower = lift(lower_bound_pol_cotype(m, p, 1.0, Exponent::Finite(2.0)))?;
        let shift = lift(index_shift(p, hi, 0.0))?;
        ensure(
            lower.branch == Branch::B && close(exact, lower.value) && close(exact, shift),
            || format!("ℓ₁→ℓ₂ m = {m}, p = {p}: exact {exact}, lower {lower:?}, shift {shift}"),
        )?;
    }
    for _ in 0..100 {
        let r = rng.random_range(2.0..6.0);
        let lo = 2.0 * r / (r + 2.0);
        let p = lo + rng.random_range(1e-9..1.0) * (r - lo);
        if !(p > lo && p < r) {
            continue;
        }
        let r = Exponent::Finite(r);
        let exact = lift(exact_index(ExactCase::CkToF { p, r }))?.value;
        let lower = lift(lower_bound_pol_cotype(1, p, 2.0, r))?;
        let shift = lift(index_shift(p, r.value(), 0.0))?;
        ensure(
            lower.branch == Branch::D && close(exact, lower.value) && close(exact, shift),
            || format!("C(K)→F r = {r}, p = {p}: exact {exact}, lower {lower:?}, shift {shift}"),
        )?;
    }
    Ok("200 draws: exact values match lower-bound branches and Hölder shifts".into())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = SearchBudget::default();
    let mut worst_norm: f64 = 0.0;
    for trial in 0..50 {
        let n = rng.random_range(2..=5usize);
        let dim = n + rng.random_range(0..=2usize);
        let space = random_space(&mut rng, dim);
        let anchors = if rng.random_bool(0.5) {
            AnchorStrategy::Basis
        } else {
            AnchorStrategy::Custom(lift(VectorFamily::from_rows(space, gaussian_rows(&mut rng, n, dim)))?)
        };
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let (poly, anchors) = if trial % 2 == 0 {
            let m = rng.random_range(1..=3usize);
            let r = [2.0, 2.5, 3.0, 4.0][rng.random_range(0..4)];
            let p = rng.random_range(0.2..r);
            let c = lift(WitnessCoefficients::normalized(
                &raw,
                CoefficientConstraint::SumRP { r, p },
            ))?;
            lift(cotype_witness_with(m, p, space, r, &anchors, &c))?
        } else {
            let m = [2usize, 4][rng.random_range(0..2)];
            let p = rng.random_range(0.1..0.95);
            let c = lift(WitnessCoefficients::normalized(
                &raw,
                CoefficientConstraint::SumInvP { p },
            ))?;
            lift(real_even_witness_with(m, p, space, &anchors, &c))?
        };
        let est = lift(operator_norm(MapRef::Polynomial(&poly), &budget))?;
        worst_norm = worst_norm.max(est.value);
        ensure(est.value <= 1.0 + NORM_BOUND_TOL, || {
            format!("trial {trial}: norm search found {}", est.value)
        })?;
        let weights = poly.witness_weights().ok_or("witness without weights")?;
        for (k, x) in anchors.vectors().iter().enumerate() {
            let out = lift(eval_polynomial(&poly, x))?;
            let value = if poly.codomain().dim() == 1 {
                out.coords()[0]
            } else {
                out.norm()
            };
            let want = weights[k] * x.norm().powi(poly.degree() as i32);
            ensure(value >= want - 1e-10, || {
                format!("trial {trial}, anchor {k}: {value} < {want}")
            })?;
        }
    }
    Ok(format!("50 witnesses, largest searched norm {worst_norm:.12}"))
}

fn random_map(rng: &mut ChaCha8Rng) -> (MultilinearMap, Vec<VectorFamily>) {
    if rng.random_range(0..10) == 0 {
        let m = rng.random_range(1..=2usize);
        let n = rng.random_range(1..=5usize);
        let t = tensor_witness(m, n, 1_000_000).unwrap();
        let l2 = SpaceDescriptor::lp(2.0, n).unwrap();
        let fams = (0..m)
            .map(|_| VectorFamily::from_rows(l2, gaussian_rows(rng, n, n)).unwrap())
            .collect();
        return (t, fams);
    }
    let m = rng.random_range(1..=3usize);
    let max_n = match m {
        1 => 12,
        2 => 10,
        _ => 6,
    };
    let n = rng.random_range(1..=max_n);
    let space = |rng: &mut ChaCha8Rng| {
        let d = rng.random_range(1..=4);
        random_space(rng, d)
    };
    let domain: Vec<SpaceDescriptor> = (0..m).map(|_| space(rng)).collect();
    let codomain = space(rng);
    let shape: Vec<usize> = domain.iter().map(|s| s.dim()).chain([codomain.dim()]).collect();
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| StandardNormal.sample(rng)).collect();
    let t = MultilinearMap::dense(domain.clone(), codomain, DenseTensor::new(shape, data).unwrap()).unwrap();
    let fams = domain
        .iter()
        .map(|s| VectorFamily::from_rows(*s, gaussian_rows(rng, n, s.dim())).unwrap())
        .collect();
    (t, fams)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (t, fams) = random_map(&mut rng);
        let p = rng.random_range(0.5..4.0);
        let fast = lift(mixed_power_sum(&t, &fams, p, 100_000))?;
        let slow = lift(brute_force_mixed_sum(&t, &fams, p))?;
        let rel = if slow == 0.0 {
            fast.abs()
        } else {
            (fast - slow).abs() / slow
        };
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("instance {i}: {fast} vs {slow}"))?;
    }
    let budget = SearchBudget::default();
    let mut worst_gap: f64 = 0.0;
    for i in 0..12 {
        let d = 2 + i % 3;
        let n = rng.random_range(2..=5usize);
        let space = lift(SpaceDescriptor::lp(2.0, d))?;
        let fam = lift(VectorFamily::from_rows(space, gaussian_rows(&mut rng, n, d)))?;
        let svd = lift(weak_norm(&fam, 2.0, &budget))?;
        let oracle = lift(brute_force_weak_norm(&fam, 2.0, 1_000_000))?;
        let gap = (svd.value - oracle).abs() / svd.value;
        worst_gap = worst_gap.max(gap);
        ensure(svd.exact && gap <= 1e-3 && oracle <= svd.value * (1.0 + 1e-12), || {
            format!("family {i}: SVD {} vs sampled {oracle}", svd.value)
        })?;
    }
    Ok(format!(
        "200 sums (max rel {worst:.1e}), 12 weak norms (max gap {worst_gap:.1e})"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let budget = SearchBudget::default();
    let qs = [1.0, 1.5, 2.0, 3.0];
    for trial in 0..1000 {
        let d = rng.random_range(1..=4usize);
        let n = rng.random_range(1..=5usize);
        let space = random_space(&mut rng, d);
        let fam = lift(VectorFamily::from_rows(space, gaussian_rows(&mut rng, n, d)))?;
        match trial % 4 {
            0 => {
                let values = qs
                    .iter()
                    .map(|&q| weak_norm(&fam, q, &budget).map(|w| w.value))
                    .collect::<Result<Vec<_>>>();
                let values = lift(values)?;
                ensure(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), || {
                    format!("trial {trial}: not monotone in q: {values:?} in {space}")
                })?;
            }
            1 => {
                let q = qs[rng.random_range(0..4)];
                let lambda = rng.random_range(0.1..10.0);
                let base = lift(weak_norm(&fam, q, &budget))?;
                let scaled = lift(weak_norm(&fam.scaled(lambda), q, &budget))?;
                if base.exact && scaled.exact {
                    ensure(
                        (scaled.value - lambda * base.value).abs() <= 1e-12 * lambda * base.value,
                        || format!("trial {trial}: {} vs λ·{}", scaled.value, base.value),
                    )?;
                } else {
                    let re = weak_objective(&fam.scaled(lambda), base.certificate.coords(), q);
                    ensure((re - lambda * base.value).abs() <= 1e-12 * lambda * base.value, || {
                        format!("trial {trial}: certificate re-evaluates to {re}, want λ·{}", base.value)
                    })?;
                    ensure(scaled.value >= lambda * base.value * (1.0 - 1e-6), || {
                        format!("trial {trial}: scaled search {} below λ·{}", scaled.value, base.value)
                    })?;
                }
            }
            2 => {
                let q = qs[rng.random_range(0..4)];
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                let a = lift(weak_norm(&fam, q, &budget))?;
                let b = lift(weak_norm(&lift(fam.permuted(&order))?, q, &budget))?;
                let ok = if a.exact {
                    a.value == b.value
                } else {
                    (a.value - b.value).abs() <= 1e-9 * a.value
                };
                ensure(ok, || format!("trial {trial}: {} vs permuted {}", a.value, b.value))?;
            }
            _ => {
                let slope = rng.random_range(-2.0..2.0);
                let intercept = rng.random_range(-3.0..3.0);
                let mut grid: Vec<usize> = (1..=64).collect();
                grid.shuffle(&mut rng);
                grid.truncate(rng.random_range(3..=8));
                let points: Vec<(usize, f64)> = grid
                    .iter()
                    .map(|&n| (n, (intercept + slope * (n as f64).ln()).exp()))
                    .collect();
                let est = lift(fit_power_law(&points))?;
                ensure(
                    (est.slope - slope).abs() <= 1e-12 && (est.intercept - intercept).abs() <= 1e-12,
                    || {
                        format!(
                            "trial {trial}: fit ({}, {}) vs ({slope}, {intercept})",
                            est.slope, est.intercept
                        )
                    },
                )?;
            }
        }
    }
    Ok("1000 trials: monotone in q, homogeneous, permutation invariant, exact regression".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("pietsch equality", criterion_1),
        ("diagonal tensor slope m/2", criterion_2),
        ("upper-bound soundness", criterion_3),
        ("könig growth", criterion_4),
        ("seam continuity", criterion_5),
        ("exact-case consistency", criterion_6),
        ("witness inequalities", criterion_7),
        ("oracle equivalence", criterion_8),
        ("property suite", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail}; {secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
