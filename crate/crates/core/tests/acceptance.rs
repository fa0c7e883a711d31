//! The ten acceptance criteria, run in order with a pinned time limit each.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use sdex::category::{
    curated_family, is_groupoid, left_fractions_check, nerve, poset_injectivity_check,
};
use sdex::ex::ExTruncation;
use sdex::fibrancy::{is_fib_n, is_kan_up_to, terminal_map};
use sdex::hom::count_maps;
use sdex::metric::{
    attach_stage, certify_counterexample, edge_distance, lemma2d_check, lemma3d_check, SkeletonGraph, TowerStage,
};
use sdex::rays::{build_rays, verify_rays, RayClause};
use sdex::sset::{boundary, boundary_inclusion, horn, standard_simplex};
use sdex::subdivision::{sd, sd_iter, sd_iter_map};
use sdex::{SimplexRef, SimplicialSet};

/// Every simplicial set built by the suite, validated by criterion 10.
static BUILT: Mutex<Vec<(String, SimplicialSet)>> = Mutex::new(Vec::new());

fn keep(name: impl Into<String>, x: &SimplicialSet) {
    BUILT.lock().unwrap().push((name.into(), x.clone()));
}

fn arc(x: SimplicialSet) -> Arc<SimplicialSet> {
    Arc::new(x)
}

fn subdivision_counts() -> String {
    let mut tops = Vec::new();
    for n in 0..=5 {
        let x = sd_iter(&standard_simplex(2), n).unwrap();
        assert_eq!(x.count(2), 6usize.pow(n as u32), "top cells of Sd^{n} Δ₂");
        tops.push(x.count(2));
        if n <= 3 {
            keep(format!("Sd^{n} Δ₂"), &x);
        }
    }
    for n in 0..=4 {
        let x = sd_iter(&horn(2, 0).unwrap().0, n).unwrap();
        let edges = 2usize << n;
        assert_eq!(x.counts(), vec![edges + 1, edges], "Sd^{n} Λ⁰₂");
        let g = SkeletonGraph::new(&x);
        let degrees: Vec<usize> = (0..x.count(0)).map(|v| g.neighbors(v).len()).collect();
        assert_eq!(degrees.iter().filter(|&&d| d == 1).count(), 2, "a path has two ends");
        assert!(degrees.iter().all(|&d| d == 1 || d == 2));
        assert_eq!(edge_distance(&x, 1, 2).unwrap(), Some(edges), "the ends are joined along all edges");
        keep(format!("Sd^{n} Λ⁰₂"), &x);
    }
    format!("top cells {tops:?}; zig-zags of 2, 4, 8, 16, 32 edges")
}

fn distances() -> String {
    let mut found = Vec::new();
    for n in 0..=4 {
        let x = sd_iter(&standard_simplex(2), n).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(edge_distance(&x, a, b).unwrap(), Some(1 << n), "n = {n}, pair ({a}, {b})");
        }
        found.push(1 << n);
    }
    format!("corner distances {found:?}")
}

fn avoiding_minimum() -> String {
    let mut minima = Vec::new();
    for n in 1..=4 {
        let r = lemma2d_check(n).unwrap();
        assert!(r.holds(), "n = {n}: minimum {} below {}", r.minimum, r.lower_bound);
        minima.push(r.minimum);
    }
    assert_eq!(minima, vec![2, 4, 8, 16], "recorded exact minima");
    format!("exact minima {minima:?} against bounds [2, 4, 8, 16]")
}

fn ray_partition() -> String {
    for n in 0..=4 {
        let l = build_rays(n).unwrap();
        let report = verify_rays(&l);
        assert!(report.is_empty(), "n = {n}: {report:?}");
        let used: std::collections::BTreeSet<usize> = l.triangles.iter().map(|t| t.ray).collect();
        assert_eq!(used.len(), 1 << n);
        keep(format!("rays Sd^{n} Δ₂"), &l.space);
    }
    let l = build_rays(1).unwrap();
    for t in 0..6 {
        let chain = l.chain(t);
        let expected = match (chain[0].as_str(), chain[1].as_str()) {
            ("[0]", "[0,1]") | ("[1]", "[0,1]") | ("[1]", "[1,2]") => 1,
            ("[0]", "[0,2]") | ("[2]", "[0,2]") | ("[2]", "[1,2]") => 2,
            other => panic!("unexpected chain {other:?}"),
        };
        assert_eq!(l.triangles[t].ray, expected, "{chain:?}");
    }
    "verified for n = 0..4; n = 1 labels 1, 1, 1, 2, 2, 2 by corner".into()
}

fn boundary_distances() -> String {
    for (k, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        let report = lemma3d_check(k, n).unwrap();
        assert!(report.is_empty(), "(k, n) = ({k}, {n}): {report:?}");
        let f = sd_iter_map(&boundary_inclusion(k).unwrap(), n).unwrap();
        keep(format!("Sd^{n} ∂Δ_{k}"), f.source());
    }
    "no violations for (2,1) (2,2) (2,3) (3,1) (3,2)".into()
}

fn tower() -> String {
    let mut lines = Vec::new();
    for (n, j) in [(0, 2), (1, 1)] {
        let c = certify_counterexample(n, j, 2).unwrap();
        assert!(c.holds(), "n = {n}: {}", c.to_json());
        assert_eq!(c.stages.len(), j + 1);
        assert!(c.stages.iter().all(|s| s.distance == Some(2 << n)));
        let distances: Vec<usize> = c.stages.iter().filter_map(|s| s.distance).collect();
        lines.push(format!("n = {n}: distances {distances:?}, no lift"));
    }
    let u = sd_iter_map(&horn(2, 0).unwrap().1, 0).unwrap().source().clone();
    let s1 = attach_stage(&TowerStage::initial(u), 0, 2).unwrap();
    keep("R_1 over Λ⁰₂", &s1.space);
    lines.join("; ")
}

fn adjunction() -> String {
    let sources = [standard_simplex(0), standard_simplex(1), standard_simplex(2), horn(2, 0).unwrap().0];
    let targets = [standard_simplex(1), standard_simplex(2), horn(2, 0).unwrap().0, boundary(2).unwrap()];
    let mut pairs = 0;
    for x in targets {
        let x = arc(x);
        let ex = ExTruncation::new(&x, 2).unwrap();
        keep("Ex through dimension 2", ex.space());
        for a in &sources {
            let a = arc(a.clone());
            let sd_a = arc(sd(&a).unwrap());
            let left = count_maps(&sd_a, &x).unwrap();
            let right = count_maps(&a, ex.space()).unwrap();
            assert_eq!(left, right, "A = {:?}, X = {:?}", a.counts(), x.counts());
            pairs += 1;
        }
    }
    format!("{pairs} pairs agree")
}

fn kan_groupoid() -> String {
    let mut groupoids = 0;
    for (name, c) in curated_family() {
        let x = arc(nerve(&c, 3));
        keep(format!("nerve of {name}"), &x);
        let v = is_kan_up_to(&x, 3).unwrap();
        assert_eq!(is_groupoid(&c), v.holds(), "{name}");
        if let Some(f) = v.failure {
            assert!(f.k <= 2, "{name} first fails at dimension {}", f.k);
        } else {
            groupoids += 1;
        }
    }
    format!("{} categories, {groupoids} groupoids, every other one fails by dimension 2", curated_family().len())
}

fn fractions() -> String {
    let mut yes = 0;
    for (name, c) in curated_family() {
        let fractions = left_fractions_check(&c).is_none();
        let injective = poset_injectivity_check(&c, 1, 3).unwrap().holds();
        let x = arc(nerve(&c, 3));
        let fib = is_fib_n(&terminal_map(&x), 1, 3).unwrap().holds();
        assert!(fractions == injective && injective == fib, "{name}: {fractions} {injective} {fib}");
        yes += usize::from(fractions);
    }
    format!("three-way agreement on {} categories ({yes} with fractions)", curated_family().len())
}

fn monotone_family() -> Vec<(String, Arc<SimplicialSet>)> {
    let mut out: Vec<(String, Arc<SimplicialSet>)> = (1..=3).map(|k| (format!("Δ_{k}"), arc(standard_simplex(k)))).collect();
    out.push(("Λ⁰₂".into(), arc(horn(2, 0).unwrap().0)));
    out.push(("Λ¹₂".into(), arc(horn(2, 1).unwrap().0)));
    out.push(("∂Δ₂".into(), arc(boundary(2).unwrap())));
    for (name, c) in curated_family() {
        out.push((format!("nerve of {name}"), arc(nerve(&c, 2))));
    }
    out
}

fn structural_health() -> String {
    let built = std::mem::take(&mut *BUILT.lock().unwrap());
    for (name, x) in &built {
        assert!(x.validate().is_empty(), "{name} fails validation");
    }
    let mut implications = 0;
    for (name, x) in monotone_family() {
        assert!(x.validate().is_empty(), "{name} fails validation");
        let p = terminal_map(&x);
        for n in 0..2 {
            if is_fib_n(&p, n, 2).unwrap().holds() {
                assert!(is_fib_n(&p, n + 1, 2).unwrap().holds(), "{name}: fib_{n} without fib_{}", n + 1);
                implications += 1;
            }
        }
    }
    let d2 = standard_simplex(2);
    let top = SimplexRef::new(2, 0);
    let mut faces = d2.faces(top).to_vec();
    faces.swap(0, 2);
    assert!(!d2.with_faces_replaced(top, faces).unwrap().validate().is_empty(), "corrupted face table");
    let mut l = build_rays(2).unwrap();
    let t = l.triangles.iter().position(|t| t.ray == 2).unwrap();
    l.triangles[t].ray = 3;
    let report = verify_rays(&l);
    assert!(report.iter().any(|v| v.clause == RayClause::Orientation), "swapped ray label");
    format!("{} objects valid; {implications} fib_n => fib_n+1 checks; both faults reported", built.len())
}

fn main() -> ExitCode {
    type Criterion = (usize, &'static str, u64, fn() -> String);
    let criteria: [Criterion; 10] = [
        (1, "subdivision counts", 30, subdivision_counts),
        (2, "distances", 5, distances),
        (3, "avoiding-A minimum", 120, avoiding_minimum),
        (4, "ray partition", 60, ray_partition),
        (5, "boundary distances", 300, boundary_distances),
        (6, "counterexample tower", 600, tower),
        (7, "adjunction bijection", 120, adjunction),
        (8, "Kan iff groupoid", 120, kan_groupoid),
        (9, "fractions, injectivity and fib_1", 300, fractions),
        (10, "structural health", 600, structural_health),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(limit);
        let (ok, detail) = match result {
            Ok(detail) if elapsed <= limit => (true, detail),
            Ok(detail) => (false, format!("{detail}; over the time limit")),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, msg)
            }
        };
        failed += usize::from(!ok);
        println!(
            "criterion {id:>2} {:<4} {name} ({:.2}s, limit {}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
