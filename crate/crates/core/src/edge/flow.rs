use super::sweep::EdgeSweep;
use crate::math::SplitMix;
use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// A branch passing through `mu` between two neighbouring `t` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    /// Step index `a`: the crossing lies in `[t_a, t_{a+1}]`.
    pub step: usize,
    pub t_from: f64,
    pub t_to: f64,
    /// Level index at `t_a`.
    pub level: usize,
    pub branch: usize,
    /// `+1` for increasing, `-1` for decreasing.
    pub direction: i64,
    pub multiplicity: usize,
    pub left_mass: f64,
    /// Whether the crossing passes the localization filter.
    pub counted: bool,
}

/// A piece of the partition with its cutoff `c` and rank difference.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionInterval {
    /// First step of the interval.
    pub start: usize,
    /// Number of steps covered.
    pub steps: usize,
    pub cutoff: f64,
    pub contribution: i64,
}

/// Spectral flow bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAccount {
    pub crossings: Vec<Crossing>,
    /// Signed count of filtered crossings.
    pub total: i64,
    /// Sum of rank differences over the partition; equals `total`.
    pub partition_total: i64,
    pub partition: Vec<PartitionInterval>,
    pub theta: f64,
}

/// One segment of a branch over a single step, in coordinates `x = E - mu`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    /// Range of `x` covered; infinite ends for branches entering or leaving.
    lo: f64,
    hi: f64,
    counted: bool,
}

fn participates(left_mass: f64, theta: f64) -> bool {
    theta <= 0.0 || left_mass > theta
}

/// Sorted disjoint closed intervals of forbidden cutoffs.
#[derive(Debug, Clone, Default)]
struct Forbidden(Vec<(f64, f64)>);

impl Forbidden {
    fn add(&mut self, lo: f64, hi: f64) {
        self.0.push((lo, hi));
    }

    fn add_segment(&mut self, s: &Segment) {
        if s.lo <= s.hi {
            self.add(s.lo, s.hi);
            self.add(-s.hi, -s.lo);
        }
    }

    fn extend(&mut self, other: &Forbidden) {
        self.0.extend_from_slice(&other.0);
    }

    /// Open gaps in `(0, w)` not covered by any forbidden interval.
    fn gaps(&self, w: f64) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = self.0.iter().filter(|(a, b)| *b > 0.0 && *a < w).cloned().collect();
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut gaps = Vec::new();
        let mut cur = 0.0;
        for (a, b) in iv {
            if a > cur {
                gaps.push((cur, a.min(w)));
            }
            cur = cur.max(b);
            if cur >= w {
                break;
            }
        }
        if cur < w {
            gaps.push((cur, w));
        }
        gaps.retain(|(a, b)| b - a > 1e-14);
        gaps
    }
}

/// Filtered spectral flow through `mu` with the default partition.
pub fn spectral_flow_phillips(sweep: &EdgeSweep, theta: f64) -> Result<FlowAccount> {
    spectral_flow_seeded(sweep, theta, 0)
}

/// As [`spectral_flow_phillips`], with the partition and the cutoffs drawn
/// from `seed`. Seed 0 uses every `t` point as a partition point where allowed
/// and the middle of the widest admissible cutoff gap.
pub fn spectral_flow_seeded(sweep: &EdgeSweep, theta: f64, seed: u64) -> Result<FlowAccount> {
    let g = sweep.t_points();
    let w = sweep.half_window;
    let x = |a: usize, p: usize| sweep.levels[a][p].energy - sweep.mu;
    let zero_tol = 1e-12 * (1.0 + sweep.mu.abs());

    // Segments per step, crossings, and the filter status of each level on
    // each side of its t point.
    let mut segments: Vec<Vec<Segment>> = Vec::with_capacity(g);
    let mut crossings = Vec::new();
    let mut out_status: Vec<Vec<Option<bool>>> = sweep.levels.iter().map(|l| vec![None; l.len()]).collect();
    let mut in_status: Vec<Vec<Option<bool>>> = out_status.clone();
    for a in 0..g {
        let b = (a + 1) % g;
        let mut segs = Vec::new();
        let mut reached = vec![false; sweep.levels[b].len()];
        for (p, lp) in sweep.levels[a].iter().enumerate() {
            let x0 = x(a, p);
            match sweep.links[a][p] {
                Some(q) => {
                    reached[q] = true;
                    let lq = &sweep.levels[b][q];
                    let x1 = x(b, q);
                    let mass = 0.5 * (lp.left_mass + lq.left_mass);
                    let counted = participates(mass, theta);
                    out_status[a][p] = Some(counted);
                    in_status[b][q] = Some(counted);
                    segs.push(Segment { lo: x0.min(x1), hi: x0.max(x1), counted });
                    let direction = if x0 < 0.0 && x1 >= 0.0 {
                        1
                    } else if x0 >= 0.0 && x1 < 0.0 {
                        -1
                    } else {
                        0
                    };
                    if direction != 0 {
                        crossings.push(Crossing {
                            step: a,
                            t_from: sweep.t_angle(a),
                            t_to: sweep.t_angle(a) + 2.0 * core::f64::consts::PI / g as f64,
                            level: p,
                            branch: sweep.branches[a][p],
                            direction,
                            multiplicity: lp.multiplicity,
                            left_mass: mass,
                            counted,
                        });
                    }
                }
                None => {
                    let counted = participates(lp.left_mass, theta);
                    out_status[a][p] = Some(counted);
                    let (lo, hi) = if x0 >= 0.0 { (x0, f64::INFINITY) } else { (f64::NEG_INFINITY, x0) };
                    segs.push(Segment { lo, hi, counted });
                }
            }
        }
        for (q, lq) in sweep.levels[b].iter().enumerate() {
            if !reached[q] {
                let counted = participates(lq.left_mass, theta);
                in_status[b][q] = Some(counted);
                let x1 = x(b, q);
                let (lo, hi) = if x1 >= 0.0 { (x1, f64::INFINITY) } else { (f64::NEG_INFINITY, x1) };
                segs.push(Segment { lo, hi, counted });
            }
        }
        segments.push(segs);
    }

    let forbidden: Vec<Forbidden> = segments
        .iter()
        .map(|segs| {
            let mut f = Forbidden::default();
            for s in segs.iter().filter(|s| s.counted) {
                f.add_segment(s);
            }
            f
        })
        .collect();

    // Point b may end an interval unless a counted level sits at mu there;
    // two steps may share an interval only if no level changes filter status at b.
    let mut must_merge = vec![false; g];
    let mut can_merge = vec![true; g];
    for b in 0..g {
        for (q, l) in sweep.levels[b].iter().enumerate() {
            let st_in = in_status[b][q].unwrap_or(false);
            let st_out = out_status[b][q].unwrap_or(false);
            if (st_in || st_out) && (l.energy - sweep.mu).abs() < zero_tol {
                must_merge[b] = true;
            }
            if st_in != st_out && in_status[b][q].is_some() && out_status[b][q].is_some() {
                can_merge[b] = false;
            }
        }
        if must_merge[b] && !can_merge[b] {
            return Err(Error::RefineGrid(format!("G_t: a branch at mu changes localization at t-point {b}")));
        }
    }
    let mut rng = SplitMix::new(seed);
    let start = if seed == 0 {
        (0..g).find(|&b| !must_merge[b])
    } else {
        let candidates: Vec<usize> = (0..g).filter(|&b| !must_merge[b]).collect();
        if candidates.is_empty() {
            None
        } else {
            Some(candidates[(rng.next_u64() % candidates.len() as u64) as usize])
        }
    }
    .ok_or_else(|| Error::RefineGrid("G_t: every t point carries a crossing".into()))?;

    let count_at = |a: usize, c: f64, incoming: bool| -> i64 {
        sweep.levels[a]
            .iter()
            .enumerate()
            .filter(|(q, _)| if incoming { in_status[a][*q] } else { out_status[a][*q] }.unwrap_or(false))
            .filter(|(q, _)| {
                let v = x(a, *q);
                v >= 0.0 && v <= c
            })
            .map(|(_, l)| l.multiplicity as i64)
            .sum()
    };

    let mut partition = Vec::new();
    let mut a = start;
    let mut covered = 0;
    while covered < g {
        let mut acc = forbidden[a].clone();
        let mut steps = 1;
        let mut gaps = acc.gaps(w);
        loop {
            let b = (a + steps) % g;
            if covered + steps == g {
                break;
            }
            let forced = must_merge[b];
            let want = forced || (seed != 0 && can_merge[b] && rng.next_f64() < 0.5);
            if !want || !can_merge[b] {
                break;
            }
            let mut trial = acc.clone();
            trial.extend(&forbidden[b]);
            let trial_gaps = trial.gaps(w);
            if trial_gaps.is_empty() {
                if forced {
                    return Err(Error::RefineGrid(format!("G_t: no admissible cutoff around a crossing at t-point {b}")));
                }
                break;
            }
            acc = trial;
            gaps = trial_gaps;
            steps += 1;
        }
        if gaps.is_empty() {
            return Err(Error::RefineGrid(format!("G_t: no admissible cutoff on the step after t-point {a}")));
        }
        let cutoff = if seed == 0 {
            let (lo, hi) = gaps.iter().cloned().max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0))).unwrap();
            0.5 * (lo + hi)
        } else {
            let (lo, hi) = gaps[(rng.next_u64() % gaps.len() as u64) as usize];
            lo + (hi - lo) * (0.1 + 0.8 * rng.next_f64())
        };
        let end = (a + steps) % g;
        let contribution = count_at(end, cutoff, true) - count_at(a, cutoff, false);
        partition.push(PartitionInterval { start: a, steps, cutoff, contribution });
        covered += steps;
        a = end;
    }

    let total: i64 = crossings.iter().filter(|c| c.counted).map(|c| c.direction * c.multiplicity as i64).sum();
    let partition_total: i64 = partition.iter().map(|p| p.contribution).sum();
    if total != partition_total {
        return Err(Error::conditioning(
            format!("partition flow {partition_total} disagrees with the crossing count {total}"),
            Vec::new(),
        ));
    }
    Ok(FlowAccount { crossings, total, partition_total, partition, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge::sweep::SyntheticBranch;
    use core::f64::consts::PI;

    fn linear(g: usize, slope: f64, mass: f64) -> SyntheticBranch {
        SyntheticBranch::from_fn(g, mass, |t| slope * t / PI)
    }

    #[test]
    fn empty_sweep_has_no_flow() {
        let s = EdgeSweep::synthetic(0.0, 0.5, 16, &[]).unwrap();
        assert_eq!(spectral_flow_phillips(&s, 0.9).unwrap().total, 0);
    }

    #[test]
    fn single_increasing_branch() {
        for g in [16, 17, 96] {
            let s = EdgeSweep::synthetic(0.0, 0.5, g, &[linear(g, 1.0, 1.0)]).unwrap();
            let acc = spectral_flow_phillips(&s, 0.9).unwrap();
            assert_eq!(acc.total, 1, "G = {g}");
            assert_eq!(acc.partition_total, 1);
        }
    }

    #[test]
    fn filter_semantics() {
        let g = 32;
        let s = EdgeSweep::synthetic(0.0, 0.5, g, &[linear(g, 1.0, 1.0), linear(g, -1.0, 0.0)]).unwrap();
        assert_eq!(spectral_flow_phillips(&s, 0.9).unwrap().total, 1);
        assert_eq!(spectral_flow_phillips(&s, 0.0).unwrap().total, 0);
    }
}
