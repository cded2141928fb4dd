use super::{ring_pow, LatticeSpec, Ring};
use crate::error::{Error, Result};

/// Largest `Q^{MN}` enumerated by [`potts_bruteforce`].
pub const BRUTEFORCE_LIMIT: f64 = 4_194_304.0;
/// Largest edge count enumerated by [`fk_partition`].
pub const FK_EDGE_LIMIT: usize = 24;

/// Direct sum over all `Q^{MN}` spin assignments of
/// `prod e^{K1 delta}` over horizontal and `prod e^{K2 delta}` over vertical bonds.
///
/// Configurations are binned by their numbers of satisfied bonds first, so the
/// ring only sees one term per `(a, b)`.
pub fn potts_bruteforce<R: Ring>(spec: LatticeSpec, q: u32, exp_k1: &R, exp_k2: &R) -> Result<R> {
    if q == 0 {
        return Err(Error::Domain("Q must be positive".into()));
    }
    let (m, n) = (spec.m, spec.n);
    let sites = m * n;
    if (q as f64).powi(sites as i32) > BRUTEFORCE_LIMIT {
        return Err(Error::SizeGuard(format!("{q}^{sites} spin configurations")));
    }
    let q = q as usize;
    let mut hist = vec![vec![0u64; spec.vertical_bonds() + 1]; spec.horizontal_bonds() + 1];
    let mut spins = vec![0usize; sites];
    loop {
        let mut a = 0;
        let mut b = 0;
        for i in 0..m {
            for j in 0..n {
                let s = spins[i * n + j];
                if j + 1 < n && s == spins[i * n + j + 1] {
                    a += 1;
                }
                if i + 1 < m && s == spins[(i + 1) * n + j] {
                    b += 1;
                }
            }
        }
        hist[a][b] += 1;
        // odometer increment
        let mut k = 0;
        while k < sites {
            spins[k] += 1;
            if spins[k] < q {
                break;
            }
            spins[k] = 0;
            k += 1;
        }
        if k == sites {
            break;
        }
    }
    let mut z = R::zero();
    for (a, row) in hist.iter().enumerate() {
        for (b, &count) in row.iter().enumerate() {
            if count > 0 {
                z = z + count_in::<R>(count) * ring_pow(exp_k1, a) * ring_pow(exp_k2, b);
            }
        }
    }
    Ok(z)
}

fn count_in<R: Ring>(mut c: u64) -> R {
    // binary expansion keeps this exact in any ring
    let mut acc = R::zero();
    let mut p = R::one();
    while c > 0 {
        if c & 1 == 1 {
            acc = acc + p.clone();
        }
        p = p.clone() + p;
        c >>= 1;
    }
    acc
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Random-cluster sum `sum_A Q^{c(A)} v1^{|A_h|} v2^{|A_v|}` over edge subsets.
pub fn fk_partition<R: Ring>(spec: LatticeSpec, potts_q: &R, v1: &R, v2: &R) -> Result<R> {
    let (m, n) = (spec.m, spec.n);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if j + 1 < n {
                edges.push((i * n + j, i * n + j + 1, true));
            }
            if i + 1 < m {
                edges.push((i * n + j, (i + 1) * n + j, false));
            }
        }
    }
    if edges.len() > FK_EDGE_LIMIT {
        return Err(Error::SizeGuard(format!("{} edges in the random-cluster sum", edges.len())));
    }
    let sites = m * n;
    let (nh, nv) = (spec.horizontal_bonds(), spec.vertical_bonds());
    // hist[c][a][b]
    let mut hist = vec![vec![vec![0u64; nv + 1]; nh + 1]; sites + 1];
    let mut parent = vec![0usize; sites];
    for subset in 0u32..(1u32 << edges.len()) {
        for (k, p) in parent.iter_mut().enumerate() {
            *p = k;
        }
        let mut comps = sites;
        let (mut a, mut b) = (0, 0);
        for (k, &(x, y, horiz)) in edges.iter().enumerate() {
            if subset >> k & 1 == 0 {
                continue;
            }
            if horiz {
                a += 1;
            } else {
                b += 1;
            }
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                parent[rx] = ry;
                comps -= 1;
            }
        }
        hist[comps][a][b] += 1;
    }
    let mut z = R::zero();
    for (c, plane) in hist.iter().enumerate() {
        let qc = ring_pow(potts_q, c);
        for (a, row) in plane.iter().enumerate() {
            for (b, &count) in row.iter().enumerate() {
                if count > 0 {
                    z = z + count_in::<R>(count) * qc.clone() * ring_pow(v1, a) * ring_pow(v2, b);
                }
            }
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn zero_couplings_count_states() {
        let spec = LatticeSpec::new(2, 3).unwrap();
        let one = r(1, 1);
        assert_eq!(potts_bruteforce(spec, 3, &one, &one).unwrap(), r(729, 1));
        assert_eq!(fk_partition(spec, &r(3, 1), &r(0, 1), &r(0, 1)).unwrap(), r(729, 1));
    }

    #[test]
    fn single_bond() {
        let spec = LatticeSpec::new(1, 2).unwrap();
        let e = r(7, 3);
        let q = 4;
        let expect = r(q, 1) * e.clone() + r(q * (q - 1), 1);
        assert_eq!(potts_bruteforce(spec, q as u32, &e, &r(1, 1)).unwrap(), expect);
        let fk = fk_partition(spec, &r(q, 1), &(e - r(1, 1)), &r(0, 1)).unwrap();
        assert_eq!(fk, expect);
    }

    #[test]
    fn spin_sum_equals_cluster_sum() {
        let spec = LatticeSpec::new(2, 2).unwrap();
        let (e1, e2) = (r(11, 4), r(5, 3));
        let z = potts_bruteforce(spec, 3, &e1, &e2).unwrap();
        let fk = fk_partition(spec, &r(3, 1), &(e1 - r(1, 1)), &(e2 - r(1, 1))).unwrap();
        assert_eq!(z, fk);
    }

    #[test]
    fn guards() {
        assert!(potts_bruteforce(LatticeSpec::new(5, 5).unwrap(), 5, &1.0, &1.0).is_err());
        assert!(fk_partition(LatticeSpec::new(4, 5).unwrap(), &2.0, &1.0, &1.0).is_err());
    }
}
