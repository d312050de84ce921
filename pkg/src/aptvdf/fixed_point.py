"""Bit-accurate fixed-point simulation of the warped filter.

Formats follow the ``[w_l, f_l]`` convention: ``w_l`` total bits (two's
complement, sign included) of which ``f_l`` are fractional, leaving
``i_l = w_l - f_l`` integer bits.

Dataflow model used by :func:`run_fixed`:

* coefficients and alpha are quantized to ``coeff_format``;
* input samples, every all-pass stage output and the filter output are
  quantized to ``data_format``;
* products are exact; sums are held in an accumulator of
  ``data.w + coeff.w + guard_bits`` bits and quantized once per stage and once
  at the output.
"""
from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from aptvdf import _kernels, _pykernels
from aptvdf.errors import SearchError, SpecError
from aptvdf.filter_core import AptVdfFilter, check_finite, run_float

RMSE_FLOOR_DB = -300.0


class Rounding(str, enum.Enum):
    NEAREST_EVEN = "nearest-even"
    NEAREST_AWAY = "nearest-away"
    TRUNCATE = "truncate"  # toward -inf, i.e. dropping LSBs


class Overflow(str, enum.Enum):
    SATURATE = "saturate"
    WRAP = "wrap"


_ROUND_CODE = {
    Rounding.NEAREST_EVEN: _pykernels.NEAREST_EVEN,
    Rounding.NEAREST_AWAY: _pykernels.NEAREST_AWAY,
    Rounding.TRUNCATE: _pykernels.TRUNCATE,
}
_OVF_CODE = {Overflow.SATURATE: _pykernels.SATURATE, Overflow.WRAP: _pykernels.WRAP}


@dataclass(frozen=True)
class QuantizationPolicy:
    rounding: Rounding = Rounding.NEAREST_EVEN
    overflow: Overflow = Overflow.SATURATE

    def __post_init__(self):
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        object.__setattr__(self, "overflow", Overflow(self.overflow))


DEFAULT_POLICY = QuantizationPolicy()


@dataclass(frozen=True)
class FixedPointFormat:
    word_length: int
    frac_length: int

    def __post_init__(self):
        w, f = self.word_length, self.frac_length
        if int(w) != w or int(f) != f:
            raise SpecError("word and fractional lengths must be integers")
        if w < 2:
            raise SpecError(f"word length must be >= 2, got {w}")
        if not 0 <= f < w:
            raise SpecError(f"fractional length must satisfy 0 <= f_l < w_l, got [{w},{f}]")

    @classmethod
    def parse(cls, text):
        """Parse ``"[12,10]"``, ``"12,10"`` or ``"12.10"``."""
        m = re.fullmatch(r"\s*\[?\s*(\d+)\s*[,.:]\s*(\d+)\s*\]?\s*", str(text))
        if not m:
            raise SpecError(f"cannot parse fixed-point format {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @property
    def integer_length(self):
        return self.word_length - self.frac_length

    @property
    def lsb(self):
        return math.ldexp(1.0, -self.frac_length)

    @property
    def min_int(self):
        return -(1 << (self.word_length - 1))

    @property
    def max_int(self):
        return (1 << (self.word_length - 1)) - 1

    @property
    def min_value(self):
        return math.ldexp(self.min_int, -self.frac_length)

    @property
    def max_value(self):
        return math.ldexp(self.max_int, -self.frac_length)

    def __str__(self):
        return f"[{self.word_length},{self.frac_length}]"


@dataclass(frozen=True)
class FixedSimConfig:
    coeff_format: FixedPointFormat
    data_format: FixedPointFormat
    guard_bits: int = 4
    policy: QuantizationPolicy = field(default_factory=QuantizationPolicy)

    def __post_init__(self):
        if not 0 <= self.guard_bits <= 32:
            raise SpecError("guard_bits must be in [0, 32]")

    @classmethod
    def uniform(cls, fmt, guard_bits=4, policy=DEFAULT_POLICY):
        """Same format for coefficients and data."""
        return cls(fmt, fmt, guard_bits, policy)

    @property
    def accumulator_width(self):
        return self.data_format.word_length + self.coeff_format.word_length + self.guard_bits


def quantize_int(x, fmt: FixedPointFormat, policy: QuantizationPolicy = DEFAULT_POLICY) -> int:
    """Integer code ``k`` such that ``k * 2**-f_l`` is the quantized value of ``x``."""
    x = float(x)
    if math.isnan(x):
        raise SpecError("cannot quantize NaN")
    if math.isinf(x):
        if policy.overflow is Overflow.WRAP:
            raise SpecError("cannot wrap an infinite value")
        return fmt.max_int if x > 0 else fmt.min_int
    v = math.ldexp(x, fmt.frac_length)
    if policy.rounding is Rounding.TRUNCATE:
        k = math.floor(v)
    elif policy.rounding is Rounding.NEAREST_EVEN:
        k = round(v)
    else:
        k = math.floor(v)
        r = v - k
        if r > 0.5 or (r == 0.5 and v > 0):
            k += 1
    return _pykernels.overflow(int(k), fmt.word_length, _OVF_CODE[policy.overflow])


def quantize(x, fmt: FixedPointFormat, policy: QuantizationPolicy = DEFAULT_POLICY) -> float:
    """Round ``x`` onto the ``fmt`` grid, handling overflow per ``policy``."""
    return math.ldexp(quantize_int(x, fmt, policy), -fmt.frac_length)


def _use_int64(config, n_sections):
    dw = config.data_format.word_length
    cw = config.coeff_format.word_length
    return (config.accumulator_width <= _kernels.INT64_SAFE_BITS
            and dw + cw + (n_sections + 2).bit_length() <= _kernels.INT64_SAFE_BITS)


def run_fixed(filt: AptVdfFilter, x, config: FixedSimConfig) -> np.ndarray:
    """Bit-accurate fixed-point run of ``filt`` over ``x`` from zero state."""
    x = check_finite(np.atleast_1d(x))
    pol = config.policy
    cf, df = config.coeff_format, config.data_format
    alpha_q = quantize_int(filt.alpha, cf, pol)
    h_q = [quantize_int(h, cf, pol) for h in filt.prototype.coefficients]
    x_q = [quantize_int(v, df, pol) for v in x]
    n_stages = filt.n_stages
    x_prev = [0] * n_stages
    y_prev = [0] * n_stages
    kernel = (_kernels.fixed_cascade if _use_int64(config, filt.n_sections)
              else _pykernels.fixed_cascade)
    out = kernel(x_q, alpha_q, h_q, bool(filt.mode.sel_f1), filt.complement_tap,
                 x_prev, y_prev, cf.frac_length, df.word_length,
                 config.accumulator_width, _ROUND_CODE[pol.rounding], _OVF_CODE[pol.overflow])
    return np.array([math.ldexp(k, -df.frac_length) for k in out])


def rmse_db(reference, test, floor_db: float = RMSE_FLOOR_DB) -> float:
    """``20 log10`` of the RMS difference; ``floor_db`` when identical."""
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    if ref.shape != tst.shape:
        raise SpecError(f"length mismatch: {ref.shape} vs {tst.shape}")
    if ref.size < 1:
        raise SpecError("need at least one sample")
    err = math.sqrt(float(np.mean((ref - tst) ** 2)))
    if err == 0.0:
        return floor_db
    return max(floor_db, 20 * math.log10(err))


def white_noise(n: int, seed: int = 0) -> np.ndarray:
    """Unit-amplitude uniform white noise on [-1, 1)."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, int(n))


def integer_length_for(max_abs: float) -> int:
    """Smallest i_l whose signed range strictly contains ``+-max_abs``."""
    if max_abs <= 0:
        return 1
    return max(1, math.floor(math.log2(max_abs)) + 2)


@dataclass
class WordLengthResult:
    config: FixedSimConfig
    rmse_db: float
    max_internal_abs: float
    seed: int | None = None

    @property
    def i_l(self):
        return self.config.data_format.integer_length

    @property
    def f_l(self):
        return self.config.data_format.frac_length

    def to_dict(self):
        return {
            "i_l": self.i_l,
            "f_l": self.f_l,
            "rmse_db": self.rmse_db,
            "max_internal_abs": self.max_internal_abs,
            "seed": self.seed,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def wordlength_search(filt: AptVdfFilter, stimulus, target_rmse_db: float, *,
                      max_frac_length: int = 30, guard_bits: int = 4,
                      policy: QuantizationPolicy = DEFAULT_POLICY,
                      seed: int | None = None) -> WordLengthResult:
    """Find the integer length from a float run, then the smallest f_l meeting the target."""
    stimulus = check_finite(np.atleast_1d(stimulus))
    if stimulus.size < 1000:
        raise SpecError("stimulus must have at least 1000 samples")
    reference, max_abs = run_float(filt, stimulus)
    i_l = integer_length_for(max_abs)
    best = math.inf
    for f_l in range(max(0, 2 - i_l), max_frac_length + 1):
        fmt = FixedPointFormat(i_l + f_l, f_l)
        config = FixedSimConfig.uniform(fmt, guard_bits, policy)
        err = rmse_db(reference, run_fixed(filt, stimulus, config))
        best = min(best, err)
        if err <= target_rmse_db:
            return WordLengthResult(config, err, max_abs, seed)
    raise SearchError(
        f"target {target_rmse_db} dB not reached with f_l <= {max_frac_length}; "
        f"best {best:.2f} dB", best_rmse_db=best)


def write_series_csv(path, values):
    """``n,value`` CSV used for stimulus and response export."""
    with open(path, "w") as fh:
        fh.write("n,value\n")
        for n, v in enumerate(values):
            fh.write(f"{n},{float(v)!r}\n")
