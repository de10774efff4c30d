//! Critical exponents, their limits as `γ → 1`, and exact rational checks.

use memwave::criticality::{classify, compute_exponents, exact, gamma_limits, DataTraits};

fn main() -> memwave::Result<()> {
    println!("{:>2} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>6}", "n", "gamma", "p_c", "p_gamma", "p_1", "p_2", "p_3", "cap");
    for n in 1..=3 {
        for gamma in [0.3, 0.6, 0.75, 0.9, 0.99] {
            let e = compute_exponents(n, gamma)?;
            let f = |x: memwave::criticality::Extended| x.finite().map_or("inf".into(), |v| format!("{v:.5}"));
            println!(
                "{n:>2} {gamma:>6} {:>6.3} {:>10} {:>10} {:>10} {:>10} {:>6}",
                e.p_c,
                f(e.p_gamma),
                f(e.p_1),
                f(e.p_2),
                f(e.p_3),
                e.sobolev_cap.to_string()
            );
        }
    }

    for n in 1..=3 {
        let report = gamma_limits(n)?;
        let last = report.rows.last().unwrap();
        println!(
            "n = {n}: at gamma = {} |p_gamma - p_c| = {:.2e}, |p_1 - p_c| = {:.2e}",
            last.gamma, last.p_gamma_gap, last.p_1_gap
        );
    }

    let g = exact::rational(11, 16);
    let e = exact::exponents(3, &g);
    println!("n = 3, gamma = 11/16: p_3 = {}, cap = {}", e.p_3.unwrap(), e.sobolev_cap.unwrap());
    let g = exact::rational(9, 10);
    let pg = exact::exponents(1, &g).p_gamma.unwrap();
    let (e1, e2) = exact::scaling_exponents(1, &g, &pg);
    println!("n = 1, gamma = 9/10, p = p_gamma = {pg}: e1 = {e1}, e2 = {e2}");

    let traits = DataTraits {
        positive_mean: true,
        small_data: true,
        compact_support: true,
    };
    for p in [2.0, 3.75, 3.9, 4.0, 4.5] {
        let v = classify(1, 0.9, p, traits);
        println!("classify(n = 1, gamma = 0.9, p = {p}) = {} [{}]", v.tag.as_str(), v.citation);
    }
    Ok(())
}
