//! Blocked brute-force dot products.
//!
//! Every dot product accumulates into `LANES` f64 partial sums (element `i`
//! goes to lane `i % LANES`) reduced by a fixed tree, with a separate multiply
//! and add per element. The single-pair path, the multi-query tile path and
//! the SIMD instantiations all perform the same IEEE operations in the same
//! order, so a similarity does not depend on how queries and candidates were
//! blocked or which worker computed it.

use std::any::Any;

use super::store::Partition;
use crate::Scalar;

const LANES: usize = 8;
/// Queries scored together against one candidate row.
const TILE: usize = 4;
/// Candidate rows kept hot in cache while every query tile passes over them.
const CANDIDATE_BLOCK: usize = 512;

#[inline(always)]
fn reduce(acc: &[f64; LANES]) -> f64 {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

#[inline(always)]
fn tail<T: Scalar, const Q: usize>(
    queries: &[&[f64]; Q],
    candidate: &[T],
    acc: &mut [[f64; LANES]; Q],
) {
    let d = candidate.len();
    let full = d - d % LANES;
    for i in full..d {
        let c = candidate[i].widen();
        for j in 0..Q {
            acc[j][i - full] += queries[j][i] * c;
        }
    }
}

#[inline(always)]
fn dot_tile<T: Scalar, const Q: usize>(queries: &[&[f64]; Q], candidate: &[T]) -> [f64; Q] {
    let d = candidate.len();
    let full = d - d % LANES;
    let mut acc = [[0.0f64; LANES]; Q];
    let mut base = 0;
    while base < full {
        let c: [f64; LANES] = std::array::from_fn(|l| candidate[base + l].widen());
        for j in 0..Q {
            let q: &[f64; LANES] = queries[j][base..base + LANES].try_into().unwrap();
            for l in 0..LANES {
                acc[j][l] += q[l] * c[l];
            }
        }
        base += LANES;
    }
    tail(queries, candidate, &mut acc);
    acc.map(|a| reduce(&a))
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn dot_tile_f32_avx512(queries: &[&[f64]; TILE], candidate: &[f32]) -> [f64; TILE] {
    use std::arch::x86_64::*;
    let d = candidate.len();
    let full = d - d % LANES;
    for q in queries {
        assert_eq!(q.len(), d);
    }
    let mut acc = [_mm512_setzero_pd(); TILE];
    let mut base = 0;
    while base < full {
        // SAFETY: base + LANES <= d for the candidate and every query.
        let c = _mm512_cvtps_pd(unsafe { _mm256_loadu_ps(candidate.as_ptr().add(base)) });
        for j in 0..TILE {
            let q = unsafe { _mm512_loadu_pd(queries[j].as_ptr().add(base)) };
            acc[j] = _mm512_add_pd(acc[j], _mm512_mul_pd(q, c));
        }
        base += LANES;
    }
    let mut lanes = [[0.0f64; LANES]; TILE];
    for j in 0..TILE {
        // SAFETY: lanes[j] holds exactly LANES f64 values.
        unsafe { _mm512_storeu_pd(lanes[j].as_mut_ptr(), acc[j]) };
    }
    tail(queries, candidate, &mut lanes);
    lanes.map(|a| reduce(&a))
}

fn widen_row<T: Scalar>(row: &[T]) -> Vec<f64> {
    row.iter().map(|x| x.widen()).collect()
}

/// Dot product with widened accumulation. Panics if lengths differ.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot of vectors with different dimensions");
    let a = widen_row(a);
    dot_tile::<T, 1>(&[&a], b)[0]
}

/// Receives every (candidate, similarity) pair for one query, in candidate order.
pub(crate) trait Selector {
    fn offer(&mut self, candidate: usize, similarity: f64, ids: &[String]);
}

#[inline(always)]
fn scan_with<T, S, F>(
    partition: &Partition<T>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
    tile_fn: F,
) where
    T: Scalar,
    S: Selector,
    F: Fn(&[&[f64]; TILE], &[T]) -> [f64; TILE],
{
    debug_assert_eq!(queries.len(), selectors.len());
    let n = partition.len();
    let ids = partition.ids();
    let row = |i: usize| partition.row(i, dimension);
    let widened: Vec<Vec<f64>> = queries.iter().map(|&q| widen_row(row(q))).collect();
    let mut block_start = 0;
    while block_start < n {
        let block_end = (block_start + CANDIDATE_BLOCK).min(n);
        for (tile, sel) in widened.chunks(TILE).zip(selectors.chunks_mut(TILE)) {
            if let ([a, b, c, d], [sa, sb, sc, sd]) = (tile, &mut *sel) {
                let qs = [a.as_slice(), b, c, d];
                for cand in block_start..block_end {
                    let sims = tile_fn(&qs, row(cand));
                    sa.offer(cand, sims[0], ids);
                    sb.offer(cand, sims[1], ids);
                    sc.offer(cand, sims[2], ids);
                    sd.offer(cand, sims[3], ids);
                }
            } else {
                for (q, s) in tile.iter().zip(sel.iter_mut()) {
                    let qs = [q.as_slice()];
                    for cand in block_start..block_end {
                        s.offer(cand, dot_tile::<T, 1>(&qs, row(cand))[0], ids);
                    }
                }
            }
        }
        block_start = block_end;
    }
}

#[inline(always)]
fn scan_generic<T: Scalar, S: Selector>(
    partition: &Partition<T>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
) {
    scan_with(
        partition,
        dimension,
        queries,
        selectors,
        dot_tile::<T, TILE>,
    )
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn scan_avx512_f32<S: Selector>(
    partition: &Partition<f32>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
) {
    // SAFETY: callers check for AVX-512F.
    scan_with(partition, dimension, queries, selectors, |q, c| unsafe {
        dot_tile_f32_avx512(q, c)
    })
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn scan_avx512<T: Scalar, S: Selector>(
    partition: &Partition<T>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
) {
    scan_generic(partition, dimension, queries, selectors)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn scan_avx2<T: Scalar, S: Selector>(
    partition: &Partition<T>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
) {
    scan_generic(partition, dimension, queries, selectors)
}

/// Feeds every candidate of `partition` to the selector of each query row.
pub(crate) fn scan<T: Scalar, S: Selector>(
    partition: &Partition<T>,
    dimension: usize,
    queries: &[usize],
    selectors: &mut [S],
) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            if let Some(p) = (partition as &dyn Any).downcast_ref::<Partition<f32>>() {
                // SAFETY: the CPU supports AVX-512F, checked above.
                unsafe { scan_avx512_f32(p, dimension, queries, selectors) };
            } else {
                // SAFETY: as above.
                unsafe { scan_avx512(partition, dimension, queries, selectors) };
            }
            return;
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked above.
            unsafe { scan_avx2(partition, dimension, queries, selectors) };
            return;
        }
    }
    scan_generic(partition, dimension, queries, selectors)
}
