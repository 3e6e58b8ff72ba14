//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

mod common;

use std::any::Any;
use std::collections::HashMap;
use std::panic;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cubecover::boost::{approx_cvp_boosted, boosted_gap, BoostConfig, SearchTrace};
use cubecover::covering::{
    count_grid_in_body, gen_box_cover, gen_ellipsoid_cover, grid_points, CoverBody, CoverIndex, GridSpec,
};
use cubecover::geometry::{AxisBox, AxisEllipsoid, Parallelepiped};
use cubecover::harness::{case_rng, gap_distance, random_basis, random_instance, random_slab};
use cubecover::linalg::{int, pow, rat, Rational, RationalMatrix, RationalVector};
use cubecover::oracles::{adversarial_2gap, box_ip_to_cvp, exact_as_gap, exact_cvp, GapOracle, GapResult};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use common::{brute_cvp_dist, brute_slab_feasible};

const SEED: u64 = 20_240_517;
const SAMPLES: usize = 10_000;
/// Sample coordinates are multiples of `1/SAMPLE_STEPS` of the cube width.
const SAMPLE_STEPS: u32 = 999_983;

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: [(u32, &str, Option<u64>, Check); 9] = [
        (1, "covering safety", Some(10), box_safety),
        (2, "covering completeness", Some(60), box_completeness),
        (3, "count bound", None, box_count),
        (4, "ellipsoid covering", None, ellipsoid_covering),
        (5, "grid cardinality and counting bounds", None, grid_counting),
        (6, "exact solver vs brute force", Some(60), exact_equivalence),
        (7, "boosted gap soundness and budget", None, boosted_gap_budget),
        (8, "end-to-end approximation", Some(300), end_to_end),
        (9, "IP-box reduction", None, ip_reduction),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| Err(panic_text(p)));
        let took = start.elapsed();
        let outcome = match (outcome, limit.map(Duration::from_secs)) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.1?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{:.2}s]", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why} [{:.2}s]", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn panic_text(p: Box<dyn Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn box_grid() -> Vec<(usize, Rational)> {
    let mut v = Vec::new();
    for n in 1..=3 {
        for eps in [rat(1, 2), rat(1, 10), rat(1, 100)] {
            v.push((n, eps));
        }
    }
    v
}

/// Largest `a` with `base^{-a} > eps`.
fn strict_exponent(eps: &Rational, base: i64) -> u32 {
    let mut a = 0;
    while pow(&int(base), -(i64::from(a) + 1)) > *eps {
        a += 1;
    }
    a
}

/// `floor(log2(1/eps))`.
fn floor_log2_inv(eps: &Rational) -> u32 {
    let inv = eps.recip();
    let mut k = 0;
    while pow(&int(2), i64::from(k) + 1) <= inv {
        k += 1;
    }
    k
}

fn ipow(b: u64, e: usize) -> u64 {
    b.pow(e as u32)
}

fn sample_point(rng: &mut ChaCha8Rng, dim: usize, eps: &Rational) -> RationalVector {
    let half = Rational::one() - eps;
    (0..dim)
        .map(|_| {
            let k: u32 = rng.random_range(0..=SAMPLE_STEPS);
            -&half + &half * Rational::new(BigInt::from(2 * u64::from(k)), BigInt::from(SAMPLE_STEPS))
        })
        .collect()
}

fn corners(dim: usize, eps: &Rational) -> Vec<RationalVector> {
    let c = Rational::one() - eps;
    (0..1usize << dim)
        .map(|mask| (0..dim).map(|j| if mask >> j & 1 == 1 { -&c } else { c.clone() }).collect())
        .collect()
}

fn orthant_of(x: &RationalVector) -> Vec<i8> {
    x.iter().map(|c| if c.is_negative() { -1 } else { 1 }).collect()
}

// 1

fn box_safety() -> Result<String, String> {
    let h = AxisBox::unit_cube(1);
    let mut bodies = 0;
    for (n, eps) in box_grid() {
        let h_n = AxisBox::unit_cube(n);
        for (index, p) in gen_box_cover(n, &eps).map_err(|e| e.to_string())? {
            bodies += 1;
            ensure(p.scaled_inside_box(&h_n, &int(2)), || format!("n={n} eps={eps}: {index:?} unsafe"))?;
            // Independent check on the diagonal form: [d - 2/e, d + 2/e] in [-1, 1].
            ensure(p.map().is_diagonal(), || format!("{index:?} is not axis aligned"))?;
            for j in 0..n {
                let reach = int(2) / p.map().get(j, j).abs();
                let x = RationalVector::new(vec![&p.center()[j] - &reach]);
                let y = RationalVector::new(vec![&p.center()[j] + &reach]);
                ensure(h.contains(&x).unwrap() && h.contains(&y).unwrap(), || {
                    format!("n={n} eps={eps}: {index:?} leaves H on axis {j}")
                })?;
            }
        }
    }
    Ok(format!("{bodies} bodies over 9 configurations, 0 unsafe"))
}

// 2

fn box_completeness() -> Result<String, String> {
    let mut checked = 0;
    for (ci, (n, eps)) in box_grid().into_iter().enumerate() {
        let table: HashMap<CoverIndex, Parallelepiped> =
            gen_box_cover(n, &eps).map_err(|e| e.to_string())?.collect();
        let top = strict_exponent(&eps, 3);
        let locate = |x: &RationalVector| CoverIndex {
            orthant: orthant_of(x),
            exponents: x
                .iter()
                .map(|c| (0..top).find(|&a| c.abs() <= Rational::one() - pow(&int(3), -(i64::from(a) + 1))).unwrap_or(top))
                .collect(),
        };
        let mut rng = case_rng(SEED, ci as u64);
        let mut points = corners(n, &eps);
        points.extend((0..SAMPLES).map(|_| sample_point(&mut rng, n, &eps)));
        for x in &points {
            let hit = table.get(&locate(x)).is_some_and(|p| p.contains(x, &int(1)).unwrap())
                || table.values().any(|p| p.contains(x, &int(1)).unwrap());
            ensure(hit, || format!("n={n} eps={eps}: {x} is uncovered"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} points (corners and samples), 0 uncovered"))
}

// 3

fn box_count() -> Result<String, String> {
    let mut rows = Vec::new();
    for (n, eps) in box_grid() {
        let emitted = gen_box_cover(n, &eps).map_err(|e| e.to_string())?.count() as u64;
        let expected = ipow(2, n) * ipow(u64::from(strict_exponent(&eps, 3)) + 1, n);
        // Flooring log2 only lowers the bound, so this is at least as strict.
        let bound = ipow(2, n) * ipow(1 + u64::from(floor_log2_inv(&eps)), n);
        ensure(emitted == expected, || format!("n={n} eps={eps}: emitted {emitted}, expected {expected}"))?;
        ensure(emitted <= bound, || format!("n={n} eps={eps}: {emitted} exceeds {bound}"))?;
        rows.push(format!("{n},{eps}:{emitted}<={bound}"));
    }
    Ok(rows.join(" "))
}

// 4

fn in_ellipsoid(e: &AxisEllipsoid, x: &RationalVector) -> bool {
    let sum: Rational = (0..x.dim())
        .map(|j| {
            let d = &x[j] - &e.center()[j];
            &d * &d / &e.sq_semi_axes()[j]
        })
        .sum();
    sum <= Rational::one()
}

fn ellipsoid_covering() -> Result<String, String> {
    let mut bodies = 0;
    let mut checked = 0;
    for (ci, n) in (2..=4).enumerate() {
        for (ei, eps) in [rat(1, 2), rat(1, 10)].into_iter().enumerate() {
            let cover = gen_ellipsoid_cover(n, &eps).map_err(|e| e.to_string())?;
            let ratio = cover.ratio().clone();
            let table: HashMap<CoverIndex, AxisEllipsoid> = cover.collect();
            let top = table.keys().flat_map(|i| i.exponents.iter().copied()).max().unwrap_or(0);
            let h = AxisBox::unit_cube(n);
            for (index, e) in &table {
                bodies += 1;
                ensure(e.inside_box(&h), || format!("n={n} eps={eps}: {index:?} leaves H"))?;
                for j in 0..n {
                    let room = Rational::one() - e.center()[j].abs();
                    ensure(!room.is_negative() && room.clone() * room >= e.sq_semi_axes()[j], || {
                        format!("n={n} eps={eps}: {index:?} leaves H on axis {j}")
                    })?;
                }
            }
            // In flipped coordinates y = 1 - |x| the body of exponent a spans [r^{-a-1}, r^{-a}].
            let locate = |x: &RationalVector| CoverIndex {
                orthant: orthant_of(x),
                exponents: x
                    .iter()
                    .map(|c| {
                        let y = Rational::one() - c.abs();
                        (0..top).find(|&a| y >= pow(&ratio, -(i64::from(a) + 1))).unwrap_or(top)
                    })
                    .collect(),
            };
            let mut rng = case_rng(SEED ^ 4, (3 * ci + ei) as u64);
            let mut points = corners(n, &eps);
            points.extend((0..SAMPLES).map(|_| sample_point(&mut rng, n, &eps)));
            for x in &points {
                let hit = table.get(&locate(x)).is_some_and(|e| in_ellipsoid(e, x))
                    || table.values().any(|e| in_ellipsoid(e, x));
                ensure(hit, || format!("n={n} eps={eps}: {x} is uncovered"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{bodies} ellipsoids inside H, {checked} points covered"))
}

// 5

fn grid_count(body: &CoverBody, spec: &GridSpec) -> u64 {
    let coords: Vec<Rational> = (0..spec.levels).map(|a| pow(&int(2), -i64::from(a))).collect();
    let mut count = 0;
    let mut idx = vec![0usize; spec.dim];
    loop {
        let x: RationalVector = idx.iter().map(|&a| coords[a].clone()).collect();
        let inside = match body {
            CoverBody::Parallelepiped(p) => p.contains(&x, &int(1)).unwrap(),
            CoverBody::Ellipsoid(e) => in_ellipsoid(e, &x),
        };
        count += u64::from(inside);
        let Some(j) = (0..spec.dim).find(|&j| idx[j] + 1 < coords.len()) else {
            return count;
        };
        idx[j] += 1;
        idx[..j].iter_mut().for_each(|a| *a = 0);
    }
}

fn sheared_parallelepiped(rng: &mut ChaCha8Rng, n: usize) -> Parallelepiped {
    let mut map = random_basis(rng, n, 4);
    let center: RationalVector = (0..n).map(|_| rat(rng.random_range(1..=16), 16)).collect();
    loop {
        let p = Parallelepiped::new(map.clone(), center.clone()).unwrap();
        if p.scaled_in_positive_orthant(&int(2)) {
            return p;
        }
        map = map.scale(&int(2));
    }
}

fn orthant_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> AxisEllipsoid {
    let c: Vec<Rational> = (0..n).map(|_| rat(rng.random_range(1..=64), 64)).collect();
    let s = c
        .iter()
        .map(|cj| if rng.random_bool(0.5) { cj * cj } else { cj * cj * rat(rng.random_range(1..=16), 16) })
        .collect();
    AxisEllipsoid::new(RationalVector::new(c), s).unwrap()
}

fn grid_counting() -> Result<String, String> {
    let (mut boxes, mut sheared, mut ellipsoids) = (0, 0, 0);
    let (mut box_max, mut ell_max) = (0, 0);
    for (ci, (n, eps)) in box_grid().into_iter().enumerate() {
        let spec = GridSpec::new(n, &eps).map_err(|e| e.to_string())?;
        let size = ipow(1 + u64::from(floor_log2_inv(&eps)), n);
        let listed = grid_points(&spec).count() as u64;
        ensure(listed == size && spec.size() == size, || format!("n={n} eps={eps}: |G| = {listed}, expected {size}"))?;

        let pp_bound = ipow(2, n);
        let mut rng = case_rng(SEED ^ 5, ci as u64);
        let moved = gen_box_cover(n, &eps)
            .map_err(|e| e.to_string())?
            .map(|(i, p)| CoverBody::from(p).to_positive_orthant(&i).unwrap());
        let random = (0..20).map(|_| CoverBody::from(sheared_parallelepiped(&mut rng, n)));
        for (k, body) in moved.map(|b| (true, b)).chain(random.map(|b| (false, b))) {
            let CoverBody::Parallelepiped(p) = &body else { unreachable!() };
            ensure(p.scaled_in_positive_orthant(&int(2)), || format!("n={n} eps={eps}: precondition fails"))?;
            let c = grid_count(&body, &spec);
            ensure(count_grid_in_body(&body, &spec).ok() == Some(c), || format!("count mismatch on {body:?}"))?;
            ensure(c <= pp_bound, || format!("n={n} eps={eps}: {c} grid points in {body:?}"))?;
            box_max = box_max.max(c);
            if k {
                boxes += 1;
            } else {
                sheared += 1;
            }
        }

        let ell_bound = n as u64 * ipow(3, n - 1) * (1 + u64::from(floor_log2_inv(&eps)));
        for _ in 0..25 {
            let e = orthant_ellipsoid(&mut rng, n);
            let body = CoverBody::from(e);
            let c = grid_count(&body, &spec);
            ensure(count_grid_in_body(&body, &spec).ok() == Some(c), || format!("count mismatch on {body:?}"))?;
            ensure(c <= ell_bound, || format!("n={n} eps={eps}: {c} > {ell_bound} grid points in {body:?}"))?;
            ell_max = ell_max.max(c);
            ellipsoids += 1;
        }
    }
    Ok(format!(
        "grid sizes exact; {boxes} cover and {sheared} sheared parallelepipeds (max {box_max} points), \
         {ellipsoids} ellipsoids (max {ell_max} points)"
    ))
}

// 6

fn exact_equivalence() -> Result<String, String> {
    for i in 0..200u64 {
        let n = 1 + (i % 3) as usize;
        let inst = random_instance(&mut case_rng(SEED ^ 6, i), n, 5);
        let sol = exact_cvp(inst.basis(), inst.target()).map_err(|e| e.to_string())?;
        let brute = brute_cvp_dist(inst.basis(), inst.target());
        ensure(sol.dist == brute, || format!("instance {i}: exact {} vs brute force {brute}", sol.dist))?;
        let v = inst.basis().mul_vec(&RationalVector::from_bigints(&sol.coeffs)).unwrap();
        ensure(v == sol.vector && v.sub(inst.target()).inf_norm() == sol.dist, || {
            format!("instance {i}: witness does not match its coefficients")
        })?;
    }
    Ok("200/200 distances agree".into())
}

// 7

fn witness_ok(basis: &RationalMatrix, target: &RationalVector, v: &RationalVector, x: &[BigInt], d: &Rational) -> bool {
    let ax: RationalVector = (0..basis.dim())
        .map(|i| (0..basis.dim()).map(|j| basis.get(i, j) * Rational::from(x[j].clone())).sum())
        .collect();
    ax == *v && v.sub(target).inf_norm() <= *d
}

fn boosted_gap_budget() -> Result<String, String> {
    let (mut found, mut empty, mut max_calls) = (0, 0, 0);
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let eps = if (i / 3) % 2 == 0 { rat(1, 2) } else { rat(1, 10) };
        let oracle: Arc<dyn GapOracle> = if (i / 6) % 2 == 0 {
            Arc::new(exact_as_gap(int(2)).unwrap())
        } else {
            Arc::new(adversarial_2gap(i))
        };
        let mut rng = case_rng(SEED ^ 7, i);
        let inst = random_instance(&mut rng, n, 5);
        let exact = brute_cvp_dist(inst.basis(), inst.target());
        let d = gap_distance(&mut rng, &exact, &eps);
        let inst = inst.with_dist(d.clone()).unwrap();
        let cfg = BoostConfig::new(eps.clone(), oracle).unwrap();
        let out = boosted_gap(&inst, &cfg).map_err(|e| format!("instance {i}: {e}"))?;
        let budget = ipow(2, n) * ipow(2 + u64::from(floor_log2_inv(&eps)), n);
        ensure(out.oracle_calls <= budget, || format!("instance {i}: {} calls > {budget}", out.oracle_calls))?;
        max_calls = max_calls.max(out.oracle_calls);
        match out.result {
            GapResult::Found { vector, coeffs } => {
                ensure(witness_ok(inst.basis(), inst.target(), &vector, &coeffs, &d), || {
                    format!("instance {i}: invalid witness {vector}")
                })?;
                found += 1;
            }
            GapResult::Empty => {
                ensure(&exact * (Rational::one() + &eps) > d, || {
                    format!("instance {i}: Empty although dist {exact} <= D/(1+eps) for D = {d}")
                })?;
                empty += 1;
            }
        }
    }
    Ok(format!("100/100 sound ({found} found, {empty} empty), at most {max_calls} base calls"))
}

// 8

fn ceil_log2(m: i64) -> u64 {
    let mut k = 0;
    while (1i64 << k) < m {
        k += 1;
    }
    k
}

fn check_trace(t: &SearchTrace) -> Result<(), String> {
    let m0 = t.initial_upper - t.initial_lower;
    let bound = ceil_log2(m0.max(1)) + 2;
    ensure(t.search_calls <= bound, || format!("{} search calls, bound {bound} for M0 = {m0}", t.search_calls))?;
    ensure(t.search_calls == t.steps.len() as u64 + 1, || "search calls do not match the steps".into())?;
    let mut prev = m0;
    for s in &t.steps {
        let m = s.upper - s.lower;
        ensure(2 * m <= prev + 2, || format!("bracket width {m} after {prev}"))?;
        prev = m;
    }
    Ok(())
}

fn end_to_end() -> Result<String, String> {
    let mut worst = Rational::zero();
    let mut runs = 0;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let eps = if (i / 3) % 2 == 0 { rat(1, 2) } else { rat(1, 10) };
        let inst = random_instance(&mut case_rng(SEED ^ 8, i), n, 5);
        let exact = exact_cvp(inst.basis(), inst.target()).unwrap().dist;
        let oracles: [Arc<dyn GapOracle>; 2] = [Arc::new(exact_as_gap(int(2)).unwrap()), Arc::new(adversarial_2gap(i))];
        for oracle in oracles {
            let name = oracle.name().to_string();
            let r = approx_cvp_boosted(inst.basis(), inst.target(), &eps, oracle)
                .map_err(|e| format!("instance {i} ({name}): {e}"))?;
            ensure(witness_ok(inst.basis(), inst.target(), &r.vector, &r.coeffs, &r.achieved_dist), || {
                format!("instance {i} ({name}): invalid answer")
            })?;
            ensure(r.vector.sub(inst.target()).inf_norm() == r.achieved_dist, || format!("instance {i}: wrong distance"))?;
            ensure(r.achieved_dist <= &exact * (Rational::one() + &eps), || {
                format!("instance {i} ({name}): {} vs exact {exact}, eps {eps}", r.achieved_dist)
            })?;
            if !exact.is_zero() {
                worst = worst.max(&r.achieved_dist / &exact);
            }
            if let Some(t) = &r.trace {
                check_trace(t).map_err(|e| format!("instance {i} ({name}): {e}"))?;
            } else {
                ensure(exact.is_zero(), || format!("instance {i} ({name}): no search trace"))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs}/200 runs within 1+eps, worst ratio {worst}"))
}

// 9

fn ip_reduction() -> Result<String, String> {
    let mut feasible = 0;
    for i in 0..50u64 {
        let n = 1 + (i % 3) as usize;
        let slab = random_slab(&mut case_rng(SEED ^ 9, i), n, 5);
        let inst = box_ip_to_cvp(&slab.a, &slab.l, &slab.u).map_err(|e| e.to_string())?;
        let by_cvp = exact_cvp(inst.basis(), inst.target()).unwrap().dist <= rat(1, 2);
        let by_sweep = brute_slab_feasible(&slab.a, &slab.l, &slab.u);
        ensure(by_cvp == by_sweep, || format!("slab {i}: reduction says {by_cvp}, sweep says {by_sweep}"))?;
        feasible += u32::from(by_sweep);
    }
    Ok(format!("50/50 agree ({feasible} feasible)"))
}
