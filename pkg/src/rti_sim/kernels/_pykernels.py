"""NumPy implementation of the gate kernel.

Consumes the generator's double stream in exactly the order the compiled
kernel does (tick, then segment, then block, then constituent), so both
backends leave the generator in the same state and report the same hits.
"""

from __future__ import annotations

import numpy as np

CHUNK = 1 << 16

_EMPTY = np.empty(0, dtype=np.int64)
NO_FIRE = (-1, -1, _EMPTY, _EMPTY)


def first_fire(rng, counts, probs, seg_starts, n_ticks):
    """Run up to ``n_ticks`` gate ticks and stop after the first segment with a hit.

    ``counts[b]`` Bernoulli draws with success probability ``probs[b]`` are made
    for each block ``b``; segment ``e`` owns blocks ``seg_starts[e]:seg_starts[e+1]``.
    Returns ``(tick_offset, segment, hit_blocks, hit_indices)``, with
    ``tick_offset == -1`` when nothing fired.
    """
    counts = np.asarray(counts, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    seg_starts = np.asarray(seg_starts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0 or n_ticks <= 0:
        return NO_FIRE
    if total <= CHUNK:
        return _batched(rng, counts, probs, seg_starts, int(n_ticks), total)
    return _streamed(rng, counts, probs, seg_starts, int(n_ticks))


def _batched(rng, counts, probs, seg_starts, n_ticks, total):
    block_start = np.concatenate(([0], np.cumsum(counts)))
    seg_draw = block_start[seg_starts]
    p_flat = np.repeat(probs, counts)
    bg = rng.bit_generator
    per_batch = max(1, CHUNK // total)
    done = 0
    while done < n_ticks:
        k = min(per_batch, n_ticks - done)
        saved = bg.state
        hit = rng.random(k * total).reshape(k, total) < p_flat
        flat = np.flatnonzero(hit.ravel())
        if flat.size == 0:
            done += k
            continue
        t, pos = divmod(int(flat[0]), total)
        e = int(np.searchsorted(seg_draw, pos, side="right")) - 1
        lo, hi = int(seg_draw[e]), int(seg_draw[e + 1])
        rows = np.flatnonzero(hit[t, lo:hi]) + lo
        # rewind to the end of the firing segment, as a draw-by-draw loop would stop there
        bg.state = saved
        bg.advance(t * total + hi)
        blocks = np.searchsorted(block_start, rows, side="right") - 1
        return done + t, e, blocks.astype(np.int64), (rows - block_start[blocks]).astype(np.int64)
    return NO_FIRE


def _streamed(rng, counts, probs, seg_starts, n_ticks):
    n_seg = len(seg_starts) - 1
    for t in range(n_ticks):
        for e in range(n_seg):
            hb, hi = [], []
            for b in range(seg_starts[e], seg_starts[e + 1]):
                remaining, off = int(counts[b]), 0
                while remaining:
                    m = min(CHUNK, remaining)
                    idx = np.flatnonzero(rng.random(m) < probs[b])
                    if idx.size:
                        hb.append(np.full(idx.size, b, dtype=np.int64))
                        hi.append(idx + off)
                    remaining -= m
                    off += m
            if hb:
                return t, e, np.concatenate(hb), np.concatenate(hi).astype(np.int64)
    return NO_FIRE
