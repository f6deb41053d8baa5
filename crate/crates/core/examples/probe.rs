use deltarules::*;
fn main() {
    // Criterion-6 shape: agrawal1, n=10000, 10 seeds, S3 +2, three settings.
    let config = RunConfig::default();
    let grid = [MinSamples::Count(1), MinSamples::Fraction(0.001), MinSamples::Fraction(0.01)];
    let gc = GridConfig {
        dataset: DatasetSource::Agrawal { function_id: 1 },
        scenarios: vec!["s3".into()],
        grid: grid.to_vec(),
        n_seeds: 10,
        master_seed: 42,
        run: config,
    };
    let t0 = std::time::Instant::now();
    let report = run_grid(&gc, |done, total, msg| eprintln!("[{done}/{total}] {msg}")).unwrap();
    for row in &report.aggregates {
        println!(
            "S3 {}: rec {:?} #r {:?} with_rules {}",
            row.min_samples, row.recall, row.num_rules, row.n_with_rules
        );
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
