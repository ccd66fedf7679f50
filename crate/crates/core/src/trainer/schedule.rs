/// Linearly decaying learning rate, floored at `1e-5 * lr0`.
pub fn lr_schedule(lr0: f64, progress: f64) -> f64 {
    let p = progress.clamp(0.0, 1.0);
    (lr0 * (1.0 - p)).max(1e-5 * lr0)
}
