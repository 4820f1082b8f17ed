use hyperapprox::analysis::*;
use hyperapprox::moments::KernelDescriptor;
use std::time::Instant;

fn main() {
    let kernels = [
        ("alg_left", KernelDescriptor::IntervalAlgebraicLeft { a: -1.0 / 3.0 }),
        ("alg_right", KernelDescriptor::IntervalAlgebraicRight { a: -0.2 }),
        ("cheb_w", KernelDescriptor::IntervalChebyshevWeight),
    ];
    let n_list: Vec<usize> = (30..=120).step_by(3).collect();
    for (name, kernel) in &kernels {
        let t0 = Instant::now();
        let rows = run_interval_singular_sweep(kernel, &n_list, 1.1).unwrap();
        let wins = rows.iter().filter(|r| r.err_efficient <= r.err_classical).count();
        println!(
            "{name}: efficient <= classical in {wins}/{} rows ({:.0}%), {:.1}s",
            rows.len(),
            100.0 * wins as f64 / rows.len() as f64,
            t0.elapsed().as_secs_f64()
        );
        // print a few rows for inspection
        for row in rows.iter().step_by(10) {
            println!("  n={} m={} errC {:.3e} errE {:.3e}", row.n, row.m, row.err_classical, row.err_efficient);
        }
    }
    // monotone decay check for chebyshev weight at m-factor 1.5
    let rows = run_interval_singular_sweep(&kernels[2].1, &n_list, 1.5).unwrap();
    let decreasing = rows.windows(2).filter(|w| w[1].err_efficient <= w[0].err_efficient).count();
    println!("cheb_w @1.5: efficient decreasing steps {}/{}", decreasing, rows.len() - 1);
}
