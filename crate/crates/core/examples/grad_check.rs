//! Checking an objective's analytic gradient against central differences,
//! including a user-defined objective.

use bfe::gradcheck::grad_check;
use bfe::problems::{gen_linear_data, LinRegObjective, LinRegSpec};
use bfe::{Batch, Gradient, Objective, ParamVector};

/// Rosenbrock valley in two dimensions.
struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn loss(&self, t: &[f64], _: Batch<'_>) -> f64 {
        (1.0 - t[0]).powi(2) + 100.0 * (t[1] - t[0] * t[0]).powi(2)
    }

    fn grad(&self, t: &[f64], _: Batch<'_>) -> Gradient {
        let r = t[1] - t[0] * t[0];
        Gradient::new(vec![-2.0 * (1.0 - t[0]) - 400.0 * t[0] * r, 200.0 * r])
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lin = LinRegObjective::new(gen_linear_data(&LinRegSpec { n: 1000, ..Default::default() })?)?;
    let points = [vec![0.0, 0.0], vec![5.0, 9.0], vec![-3.0, 12.5]];
    for p in &points {
        let err = grad_check(&lin, &ParamVector::new(p.clone()), Batch::Full, 1e-5)?;
        println!("linreg     at {p:?}: max relative error {err:.2e}");
        let err = grad_check(&Rosenbrock, &ParamVector::new(p.clone()), Batch::Full, 1e-5)?;
        println!("rosenbrock at {p:?}: max relative error {err:.2e}");
    }
    Ok(())
}
