// Scratch diagnostic: h-refinement scan of the failing SM component.
use corridor_opt_core::gradcheck::{run_random_gate, GradCheckConfig};

fn main() {
    for h in [1e-3, 1e-4, 1e-5, 3e-6] {
        let cfg = GradCheckConfig { trials: 12, fd_step: h, ..Default::default() };
        let s = run_random_gate(&cfg).unwrap();
        println!(
            "h={h:.0e}  worst_scaled={:.3e}  failures={}",
            s.worst_scaled_error,
            s.failures.len()
        );
    }
}
