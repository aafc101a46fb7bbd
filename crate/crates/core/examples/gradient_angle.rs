//! Gradient-angle search with one global rate, and its per-dimension variant.
//!
//! The angle between tangent lines saturates for steep slopes, so this runs
//! on a quadratic whose slopes stay of order one.

use bfe::bfe_grad::{BfeGrad, BfeGradConfig, ThresholdMode, ZoomOutExit};
use bfe::problems::QuadraticObjective;
use bfe::{Batch, Optimizer, ParamVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bowl = QuadraticObjective::new(vec![0.5, 5.0, 50.0])?;
    let variants = [
        ("global, absolute 1 degree", BfeGradConfig::default()),
        ("global, quarter-step exit", BfeGradConfig { zoom_out_exit: ZoomOutExit::QuarterFreshStep, ..Default::default() }),
        ("global, relative 1%", BfeGradConfig { threshold_mode: ThresholdMode::Relative, ..Default::default() }),
        ("per-dimension", BfeGradConfig { adaptive: true, ..Default::default() }),
    ];
    for (name, cfg) in variants {
        let mut opt = BfeGrad::new(cfg, 3)?;
        let mut theta = ParamVector::new(vec![1.0, 1.0, 1.0]);
        let mut probes = 0;
        for t in 0..200 {
            let out = opt.step(&bowl, &theta, Batch::Full, t)?;
            probes += out.inner_loops;
            theta = out.theta_next;
        }
        let etas = opt.rate().dim_etas().unwrap_or_else(|| vec![opt.rate().eta()]);
        println!("{name:<28} theta {:?}", theta.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>());
        println!("{:<28} {probes} probes, rates {:?}", "", etas.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>());
    }
    Ok(())
}
