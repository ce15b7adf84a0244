use optimargin::datagen::*;
use optimargin::mom::*;
use optimargin::lp::SolverOptions;
use std::time::Instant;

fn eval_match(report: &MomFitReport, samples: &[optimargin::margin::TrainingSample]) -> f64 {
    let opts = SolverOptions::default();
    let mut matches = 0;
    for s in samples {
        match mom_prescribe(&report.theta_hat, s.a(), s.b(), s.z(), &opts) {
            Ok((_, x_hat)) => {
                if (&x_hat - s.x_star()).amax() <= 1e-6 * (1.0 + s.x_star().amax()) { matches += 1; }
            }
            Err(_) => {}
        }
    }
    matches as f64 / samples.len() as f64
}

fn main() {
    let cfg = GenConfig::Fk(FkGenConfig {
        spec: KnapsackSpec { n_items: 10, d: 5, price_mode: PriceMode::Uniform01 },
        ..FkGenConfig::default()
    });
    for floor in [0.25, 0.3] {
        for (iters, sched) in [(3000, StepSchedule::InverseSqrt), (10000, StepSchedule::InverseSqrt), (3000, StepSchedule::PolyakStyle)] {
            let stream = match gen_separable_stream_with_floor(&cfg, 1, 2000, Some(1.0), floor) {
                Ok(s) => s, Err(e) => { println!("floor={floor}: gen failed {e}"); continue }
            };
            let theta_bar = stream.theta_star.norm();
            let fit_cfg = MomFitConfig { max_iters: iters, radius: 1.2 * theta_bar, step_schedule: sched, ..MomFitConfig::for_dataset_size(1000) };
            let t1 = Instant::now();
            let report = mom_fit(&stream.samples[..1000], &fit_cfg).unwrap();
            let rate = eval_match(&report, &stream.samples[1000..]);
            println!("floor={floor} iters={iters} {:?}: thetabar {:.1} | fit {:?} used {} conv {} F {:.4} | match {:.3}",
                sched, theta_bar, t1.elapsed(), report.iterations_used, report.converged, report.final_objective, rate);
        }
    }
}
