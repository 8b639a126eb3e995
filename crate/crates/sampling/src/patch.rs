use dirlap_core::{Error, Kind, Result, SparseGraph};

/// Nonnegative mass added to a scaled-down sample so that row and column
/// sums hit their targets exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatchMatrix {
    pub entries: Vec<(usize, usize, f64)>,
    pub total_mass: f64,
}

impl PatchMatrix {
    pub fn to_graph(&self, n: usize, kind: Kind) -> Result<SparseGraph> {
        SparseGraph::from_triplets(n, kind, self.entries.iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Greedy two-pointer patch: rows ascending, columns ascending, each entry
/// of mass `min(rowDeficit_i, colDeficit_j)`.
///
/// With `forbid_diagonal`, a row never pairs with its own column. When the
/// last open row and column coincide, mass is rerouted through an earlier
/// patch entry `(a, b)` as `(a, i) + (i, b) − (a, b)`, which keeps every
/// other sum fixed.
pub fn patch_to_degrees(
    ahat: &SparseGraph,
    target_row: &[f64],
    target_col: &[f64],
    forbid_diagonal: bool,
) -> Result<PatchMatrix> {
    let n = ahat.n();
    if target_row.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target_row.len() });
    }
    if target_col.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target_col.len() });
    }
    let rs = ahat.row_sums();
    let cs = ahat.col_sums();
    let scale = target_row.iter().chain(target_col).fold(0.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    let deficits = |sums: &[f64], target: &[f64]| -> Result<Vec<f64>> {
        sums.iter()
            .zip(target)
            .enumerate()
            .map(|(i, (&s, &t))| {
                let d = t - s;
                if d < -slack {
                    Err(Error::TargetExceeded { index: i, excess: -d })
                } else {
                    Ok(d.max(0.0))
                }
            })
            .collect()
    };
    let mut rd = deficits(&rs, target_row)?;
    let mut cd = deficits(&cs, target_col)?;
    let (sr, sc): (f64, f64) = (rd.iter().sum(), cd.iter().sum());
    let total_target: f64 = target_row.iter().sum::<f64>().max(target_col.iter().sum());
    if (sr - sc).abs() > 1e-10 * total_target.max(f64::MIN_POSITIVE) {
        return Err(Error::DeficitMismatch { rows: sr, cols: sc });
    }
    // Deficits at rounding level relative to the scale are noise.
    let floor = 1e-14 * scale;
    rd.iter_mut().chain(cd.iter_mut()).for_each(|d| {
        if *d <= floor {
            *d = 0.0
        }
    });

    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut cols: Vec<usize> = (0..n).filter(|&j| cd[j] > 0.0).collect();
    let mut jp = 0;
    for i in 0..n {
        while rd[i] > 0.0 {
            while jp < cols.len() && cd[cols[jp]] <= 0.0 {
                jp += 1;
            }
            if jp >= cols.len() {
                break;
            }
            let mut pick = jp;
            if forbid_diagonal && cols[pick] == i {
                pick += 1;
                while pick < cols.len() && cd[cols[pick]] <= 0.0 {
                    pick += 1;
                }
                if pick >= cols.len() {
                    reroute_diagonal(i, &mut rd, &mut cd, &mut entries)?;
                    continue;
                }
            }
            let j = cols[pick];
            let m = rd[i].min(cd[j]);
            entries.push((i, j, m));
            rd[i] -= m;
            cd[j] -= m;
            if rd[i] <= floor {
                rd[i] = 0.0;
            }
            if cd[j] <= floor {
                cd[j] = 0.0;
            }
        }
    }
    cols.clear();
    entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let total_mass = entries.iter().map(|e| e.2).sum();
    Ok(PatchMatrix { entries, total_mass })
}

fn reroute_diagonal(
    i: usize,
    rd: &mut [f64],
    cd: &mut [f64],
    entries: &mut Vec<(usize, usize, f64)>,
) -> Result<()> {
    let need = rd[i].min(cd[i]);
    let mut left = need;
    let mut added = Vec::new();
    for e in entries.iter_mut() {
        if left <= 0.0 {
            break;
        }
        let (a, b, w) = *e;
        if a == i || b == i || w <= 0.0 {
            continue;
        }
        let m = w.min(left);
        e.2 -= m;
        added.push((a, i, m));
        added.push((i, b, m));
        left -= m;
    }
    if left > 0.0 {
        return Err(Error::DeficitMismatch { rows: rd[i], cols: cd[i] });
    }
    entries.retain(|e| e.2 > 0.0);
    entries.extend(added);
    rd[i] -= need;
    cd[i] -= need;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_targets_give_empty_patch() {
        let a = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let p = patch_to_degrees(&a, &[1.0, 1.0], &[1.0, 1.0], true).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn zero_sample_identity_order() {
        let z = SparseGraph::empty(2, Kind::Matrix);
        let p = patch_to_degrees(&z, &[1.0, 1.0], &[1.0, 1.0], false).unwrap();
        assert_eq!(p.entries, vec![(0, 0, 1.0), (1, 1, 1.0)]);
        let p = patch_to_degrees(&z, &[1.0, 1.0], &[1.0, 1.0], true).unwrap();
        assert_eq!(p.entries, vec![(0, 1, 1.0), (1, 0, 1.0)]);
    }

    #[test]
    fn half_permutation() {
        let a = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let p = patch_to_degrees(&a, &[1.0, 1.0], &[1.0, 1.0], true).unwrap();
        assert!((p.total_mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatch_detected() {
        let z = SparseGraph::empty(2, Kind::Matrix);
        assert!(matches!(
            patch_to_degrees(&z, &[1.0, 1.0], &[1.0, 0.0], false),
            Err(Error::DeficitMismatch { .. })
        ));
    }

    #[test]
    fn exceeded_target_detected() {
        let a = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, 2.0)]).unwrap();
        assert!(matches!(
            patch_to_degrees(&a, &[1.0, 1.0], &[1.0, 1.0], false),
            Err(Error::TargetExceeded { index: 0, .. })
        ));
    }

    #[test]
    fn diagonal_reroute() {
        // Rows 0 and 2 and columns 1 and 2 are short; the greedy sweep pairs
        // (0, 1) then meets only column 2 for row 2.
        let z = SparseGraph::empty(3, Kind::Matrix);
        let p = patch_to_degrees(&z, &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], true).unwrap();
        assert!(p.entries.iter().all(|&(i, j, _)| i != j));
        let g = p.to_graph(3, Kind::Matrix).unwrap();
        assert_eq!(g.row_sums(), vec![1.0, 0.0, 1.0]);
        assert_eq!(g.col_sums(), vec![0.0, 1.0, 1.0]);
    }
}
