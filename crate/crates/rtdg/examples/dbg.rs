use rtdg::scenarios::scenario;
use rtdg::solver::{Simulation, TimeControls};
use rtdg::space::RtElement;

fn main() {
    let sc = scenario("test4").unwrap();
    let mesh = sc.mesh(128).unwrap();
    let sim = Simulation::new(&mesh, 0, &sc).unwrap();
    let state = sc.initial_state(&mesh, 0).unwrap();
    let result = sim.run(state, &TimeControls::new(0.5)).unwrap();
    let element = RtElement::new(0).unwrap();
    let mut rows = std::collections::BTreeMap::<usize, f64>::new();
    for j in 0..mesh.ny {
        let mut prev = f64::NEG_INFINITY;
        let mut worst = 0.0_f64;
        for i in 0..mesh.nx {
            let x = mesh.x_min + (i as f64 + 0.5) * mesh.dx;
            let y = mesh.y_min + (j as f64 + 0.5) * mesh.dy;
            let (bx, _) = result.state.eval_at(&mesh, &element, x, y);
            if prev > bx {
                worst = worst.max(prev - bx);
            }
            prev = bx;
        }
        if worst > 1e-10 {
            rows.insert(j, worst);
        }
    }
    println!("rows with decreases: {}", rows.len());
    let mut v: Vec<_> = rows.iter().collect();
    v.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap());
    for (j, w) in v.iter().take(8) {
        println!(
            "  row j={j} (y={:.3}): worst {w:.3e}",
            mesh.y_min + (**j as f64 + 0.5) * mesh.dy
        );
    }
}
