//! End-to-end smoke drive: construct a family, verify axioms exactly,
//! compute fusion, detect lamination, and rebuild the datum by grafting.

use modata::families::{dihedral_double, graft, haagerup_izumi, so_level2, Sign};
use modata::mdata::{verify_axioms, verlinde, VerifyMode};

fn main() {
    let hg = haagerup_izumi(&[3], 0).expect("construct");
    let report = verify_axioms(&hg, VerifyMode::Exact).expect("verify");
    assert!(report.passed() && report.unitary);
    println!("haagerup_izumi([3], 0): {} primaries, exact axioms pass", hg.dim());

    let nt = verlinde(&hg).expect("fusion");
    assert_eq!(nt.get(1, 2, 2), 2);
    println!("verlinde: N(b,a1,a1) = {}", nt.get(1, 2, 2));

    let base = dihedral_double(3, Sign::Plus, 0).expect("base");
    let donor = so_level2(6).expect("donor");
    let grafted = graft(&base, &donor).expect("graft");
    assert_eq!(grafted.s, hg.s);
    assert_eq!(grafted.t, hg.t);
    println!("graft(dihedral(3,+,0), so(13)_2) reproduces the datum entrywise");
}
