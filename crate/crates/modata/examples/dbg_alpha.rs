// scratch: debug alpha_hat pairs at nu=5
use modata::families::hg_fusion_closed_form;
use modata::sectors::build_systems;

fn main() {
    let nu = 5u64;
    let nn = 2usize;
    let nz = 5usize;
    let m = 14usize;
    let sys = build_systems(nu).unwrap();
    let h = &sys.delta_hat;
    let hdim = h.dim();
    let b = |i: usize| 1 + i;
    let c = |i: usize| 1 + nn + i;
    let mut labels = vec!["0".to_string(), "b".to_string()];
    labels.extend((1..=nn).map(|i| format!("a{i}")));
    for i in 1..=nn {
        labels.extend((0..nz).map(|j| format!("c{i},{j}")));
    }
    labels.extend((1..=m).map(|l| format!("d{l}")));
    let img = |x: usize| -> Vec<u64> {
        let mut hv = vec![0u64; hdim];
        let all = |hv: &mut Vec<u64>| {
            for i in 1..=nn {
                hv[b(i)] += 1;
                hv[c(i)] += 1;
            }
        };
        if x == 0 {
            hv[0] = 1;
        } else if x == 1 {
            hv[0] = 1;
            hv[1] = 1;
            all(&mut hv);
        } else if x < 2 + nn {
            let i = x - 1;
            hv[0] = 1;
            hv[1] = 2;
            all(&mut hv);
            hv[b(i)] -= 1;
        } else if x < 2 + nn + nn * nz {
            let rel = x - 2 - nn;
            let i = rel / nz + 1;
            let j = rel % nz;
            all(&mut hv);
            hv[c(i)] += 1;
            if j == 0 {
                hv[0] += 1;
            } else {
                hv[1] += 1;
                hv[b(i)] -= 1;
            }
        } else {
            hv[1] = 1;
            all(&mut hv);
        }
        hv
    };
    let dim = labels.len();
    let mut bad = 0;
    for x in 0..dim {
        for y in 0..dim {
            let lhs = h.product(&img(x), &img(y));
            let mut rhs = vec![0u64; hdim];
            for z in 0..dim {
                let nxy = hg_fusion_closed_form(nu, 0, x, y, z) as u64;
                for (r, v) in rhs.iter_mut().zip(&img(z)) {
                    *r += nxy * v;
                }
            }
            if lhs != rhs && bad < 6 {
                bad += 1;
                println!("pair ({}, {}): lhs {:?} rhs {:?}", labels[x], labels[y], lhs, rhs);
            }
        }
    }
    println!("total mismatched pairs (capped print): {}", bad);
}
