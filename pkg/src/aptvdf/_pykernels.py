"""Reference (pure Python / numpy) implementations of the hot loops.

Used when the compiled ``_ckernels`` extension is missing, and as the second
route in the equivalence tests and the benchmark.
"""
import numpy as np
from scipy.signal import lfilter

# Rounding / overflow codes shared with _ckernels.pyx.
NEAREST_EVEN = 0
NEAREST_AWAY = 1
TRUNCATE = 2
SATURATE = 0
WRAP = 1


def allpass_cascade(x, alpha, coeffs, double_stage, complement_tap, state):
    """Run the tapped all-pass cascade over a block.

    ``state`` has one row ``(x_prev, y_prev)`` per first-order stage and is
    updated in place. Returns ``(y, max_abs)`` where ``max_abs`` is the largest
    magnitude seen on the input, any stage output, or the output.
    """
    x = np.asarray(x, dtype=np.float64)
    n_sections = len(coeffs) - 1
    per_section = 2 if double_stage else 1
    tap = x
    acc = coeffs[0] * tap
    max_abs = float(np.max(np.abs(x))) if x.size else 0.0
    d_tap = tap if complement_tap == 0 else None
    b = [-alpha, 1.0]
    a = [1.0, -alpha]
    for k in range(1, n_sections + 1):
        for j in range(per_section):
            s = (k - 1) * per_section + j
            zi = [state[s, 0] + alpha * state[s, 1]]
            out, _ = lfilter(b, a, tap, zi=zi)
            if x.size:
                state[s, 0] = tap[-1]
                state[s, 1] = out[-1]
                max_abs = max(max_abs, float(np.max(np.abs(out))))
            tap = out
        if double_stage:
            tap = -tap
        acc = acc + coeffs[k] * tap
        if k == complement_tap:
            d_tap = tap
    y = d_tap - acc if complement_tap >= 0 else acc
    if x.size:
        max_abs = max(max_abs, float(np.max(np.abs(y))))
    return np.asarray(y, dtype=np.float64), max_abs


def shift_round(v, s, rounding):
    """Divide integer ``v`` by ``2**s`` with the given rounding rule."""
    if s <= 0:
        return v << -s
    q = v >> s
    if rounding == TRUNCATE:
        return q
    r = v - (q << s)
    half = 1 << (s - 1)
    if r > half:
        return q + 1
    if r < half:
        return q
    if rounding == NEAREST_AWAY:
        return q + 1 if v > 0 else q
    return q + (q & 1)


def overflow(v, width, mode):
    lo = -(1 << (width - 1))
    hi = (1 << (width - 1)) - 1
    if lo <= v <= hi:
        return v
    if mode == SATURATE:
        return hi if v > hi else lo
    return ((v - lo) & ((1 << width) - 1)) + lo


def fixed_cascade(x, alpha_q, h_q, double_stage, complement_tap, x_prev, y_prev,
                  coeff_frac, data_width, acc_width, rounding, ovf):
    """Bit-accurate integer cascade.

    All data values are integers scaled by ``2**data_frac``; ``alpha_q`` and
    ``h_q`` are scaled by ``2**coeff_frac``. ``x_prev``/``y_prev`` are lists
    updated in place.
    """
    n_sections = len(h_q) - 1
    per_section = 2 if double_stage else 1
    one = 1 << coeff_frac
    out = []
    for xn in x:
        tap = xn
        acc = h_q[0] * tap
        d_tap = tap
        for k in range(1, n_sections + 1):
            for j in range(per_section):
                s = (k - 1) * per_section + j
                wide = -alpha_q * tap + x_prev[s] * one + alpha_q * y_prev[s]
                wide = overflow(wide, acc_width, ovf)
                yn = overflow(shift_round(wide, coeff_frac, rounding), data_width, ovf)
                x_prev[s] = tap
                y_prev[s] = yn
                tap = yn
            if double_stage:
                tap = overflow(-tap, data_width, ovf)
            acc += h_q[k] * tap
            if k == complement_tap:
                d_tap = tap
        if complement_tap >= 0:
            acc = d_tap * one - acc
        acc = overflow(acc, acc_width, ovf)
        out.append(overflow(shift_round(acc, coeff_frac, rounding), data_width, ovf))
    return out
