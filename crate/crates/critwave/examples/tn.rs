fn main() {
    let cfg = critwave::interaction::TwoSolitonConfig::new(
        critwave::ground_state::SolitonParams::on_axis(-0.5, 1.0, 0.0, 1.0).unwrap(),
        critwave::ground_state::SolitonParams::on_axis(0.5, 1.0, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    for r in [1e3_f64, 1e4, 1e5] {
        let t = critwave::channels::linked_time(r);
        let start = std::time::Instant::now();
        let s = critwave::channels::signature_at(&cfg, r, t).unwrap();
        println!("R={} sig={:.6e} sigR5={:.4e} ({:.1}s)", r, s, s * r.powi(5), start.elapsed().as_secs_f64());
    }
}
