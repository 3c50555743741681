"""Hot inner loop of the event-driven simulator.

The kernel advances the (phase, level) process through one chunk of
pre-drawn randomness.  By default it is JIT-compiled with numba; setting
FLUIDTAIL_BACKEND=numpy (or a missing numba) selects the identical pure
Python/numpy code path, which consumes the same random stream and therefore
produces bit-identical samples.  benchmarks/bench_simulator.py compares the
two.
"""

import os

USE_NUMBA = os.environ.get("FLUIDTAIL_BACKEND", "numba").lower() != "numpy"
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised only without numba
        USE_NUMBA = False


def _advance_impl(phase, level, t, t_end, warmup, stride, next_sample, n_written,
                  lam, mu, c, r, exps, us, out_level, out_phase,
                  sojourn, block_len, n_blocks):
    """Advance through one chunk of randomness; returns the updated state.

    Between jumps the level moves linearly at the phase's net rate and is
    clamped at zero exactly: a sample landing after the hitting time reads
    zero, not a negative excursion.  Samples are taken every `stride` time
    units after `warmup`; per-phase occupation time is accumulated into
    consecutive blocks of length `block_len` for variance estimation.
    """
    n_events = exps.shape[0]
    max_out = out_level.shape[0]
    max_phase = sojourn.shape[1] - 1
    k = 0
    while k < n_events and t < t_end:
        service = phase * mu if phase < c else c * mu
        rate = lam + service
        tau = exps[k] / rate
        go_up = us[k] * rate < lam
        k += 1
        net = float(phase - c) if phase < c else r
        t_next = t + tau
        if t_next > t_end:
            t_next = t_end
            tau = t_end - t
            k -= 1  # the interrupted event is not consumed
        # sojourn accounting, split across block boundaries
        left = t
        while left < t_next:
            blk = int(left / block_len)
            if blk >= n_blocks:
                blk = n_blocks - 1
            edge = (blk + 1) * block_len
            seg = (t_next if t_next < edge else edge) - left
            ph = phase if phase < max_phase else max_phase
            sojourn[blk, ph] += seg
            left += seg
        # samples inside (t, t_next]
        while next_sample <= t_next:
            if next_sample > warmup and n_written < max_out:
                dt = next_sample - t
                x = level + net * dt
                if x < 0.0:
                    x = 0.0
                out_level[n_written] = x
                out_phase[n_written] = phase if phase < max_phase else max_phase
                n_written += 1
            next_sample += stride
        level += net * tau
        if level < 0.0:
            level = 0.0
        t = t_next
        if t >= t_end:
            break
        phase = phase + 1 if go_up else phase - 1
    return phase, level, t, next_sample, n_written, k


if USE_NUMBA:
    advance = njit(cache=True)(_advance_impl)
else:
    advance = _advance_impl
