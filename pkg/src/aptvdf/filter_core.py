"""All-pass-transformation variable digital filter (APT-VDF).

A linear-phase FIR lowpass prototype ``H(z) = sum h[n] z^-n`` is turned into a
tunable filter by replacing every unit delay with the first-order all-pass

    A(z) = (-alpha + z^-1) / (1 - alpha z^-1),   |alpha| < 1.

Two select bits pick the filter type:

============  ======  ======
type          sel_f1  sel_f2
============  ======  ======
lowpass       0       0
bandpass      1       0
highpass      0       1
bandstop      1       1
============  ======  ======

``sel_f1`` swaps each section ``A(z)`` for ``-A(z)**2`` (moves the passband to
half Nyquist); ``sel_f2`` outputs the delay complement ``S**(N/2) - H`` where
``S`` is the section transfer. The complement branch taps the shared section
chain at ``N/2`` so it costs no extra arithmetic.
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from aptvdf import _kernels
from aptvdf.errors import (
    CoefficientParseError,
    DesignError,
    DomainError,
    NonFiniteInputError,
    SpecError,
    StructureError,
)

#: magnitudes below this are written as -300 dB
MAG_FLOOR = 1e-15


@dataclass(frozen=True)
class FrequencySpec:
    """Lowpass design target. Frequencies are normalized to Nyquist (0..1)."""

    cutoff: float
    transition_bw: float
    passband_ripple_db: float
    stopband_atten_db: float

    def __post_init__(self):
        if not 0 < self.cutoff < 1:
            raise SpecError(f"cutoff must be in (0, 1), got {self.cutoff}")
        if not 0 < self.transition_bw < 1:
            raise SpecError(f"transition_bw must be in (0, 1), got {self.transition_bw}")
        if self.cutoff + self.transition_bw >= 1:
            raise SpecError("cutoff + transition_bw must be < 1")
        if self.passband_ripple_db <= 0:
            raise SpecError("passband_ripple_db must be positive")
        if self.stopband_atten_db <= 0:
            raise SpecError("stopband_atten_db must be positive")

    @property
    def stopband_edge(self):
        return self.cutoff + self.transition_bw


#: Lowpass prototype used in the worked design example.
PAPER_SPEC = FrequencySpec(0.08, 0.14, 0.8, 40.0)


@dataclass(frozen=True)
class PrototypeFilter:
    coefficients: np.ndarray
    spec: FrequencySpec | None = None
    method: str = "given"

    def __post_init__(self):
        h = np.array(self.coefficients, dtype=np.float64)
        if h.ndim != 1 or h.size < 2:
            raise SpecError("prototype needs at least two coefficients (order >= 1)")
        if not np.all(np.isfinite(h)):
            raise SpecError("prototype coefficients must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "coefficients", h)

    @property
    def order(self):
        return self.coefficients.size - 1

    def is_symmetric(self, tol=0.0):
        h = self.coefficients
        return bool(np.all(np.abs(h - h[::-1]) <= tol))

    def response(self, omega):
        """Complex response at normalized frequencies ``omega``."""
        z_inv = np.exp(-1j * np.pi * np.asarray(omega, dtype=np.float64))
        return np.polynomial.polynomial.polyval(z_inv, self.coefficients)


class FilterMode(enum.Enum):
    LOWPASS = (0, 0)
    BANDPASS = (1, 0)
    HIGHPASS = (0, 1)
    BANDSTOP = (1, 1)

    @property
    def sel_f1(self):
        return self.value[0]

    @property
    def sel_f2(self):
        return self.value[1]

    @property
    def label(self):
        return self.name.lower()

    @classmethod
    def from_bits(cls, sel_f1, sel_f2):
        if sel_f1 not in (0, 1) or sel_f2 not in (0, 1):
            raise SpecError(f"select bits must be 0 or 1, got ({sel_f1}, {sel_f2})")
        return cls((int(sel_f1), int(sel_f2)))

    @classmethod
    def parse(cls, text):
        """Accept ``"01"``-style bit strings or type names like ``"highpass"``."""
        if isinstance(text, FilterMode):
            return text
        t = str(text).strip().lower()
        if len(t) == 2 and set(t) <= {"0", "1"}:
            return cls.from_bits(int(t[0]), int(t[1]))
        for m in cls:
            if m.label == t:
                return m
        raise SpecError(f"unknown filter mode {text!r}")


def check_alpha(alpha):
    alpha = float(alpha)
    if not math.isfinite(alpha) or abs(alpha) >= 1:
        raise DomainError(f"warping coefficient must satisfy |alpha| < 1, got {alpha}")
    return alpha


# -- design ------------------------------------------------------------------

def _ripple_to_deviation(ripple_db):
    g = 10 ** (ripple_db / 20)
    return (g - 1) / (g + 1)


def _design_grid(spec, n=4096):
    grid = np.linspace(0.0, 1.0, n)
    return np.union1d(grid, [spec.cutoff, spec.stopband_edge])


def measure_spec(h, spec, n_grid=4096):
    """Return ``(passband_ripple_db, stopband_atten_db)`` of ``h`` against ``spec``.

    Ripple is peak-to-peak in dB over ``[0, cutoff]``; attenuation is the
    smallest loss over ``[cutoff + transition_bw, 1]``.
    """
    grid = _design_grid(spec, n_grid)
    mag = np.abs(PrototypeFilter(h).response(grid))
    db = 20 * np.log10(np.maximum(mag, MAG_FLOOR))
    pb = db[grid <= spec.cutoff]
    sb = db[grid >= spec.stopband_edge]
    return float(pb.max() - pb.min()), float(-sb.max())


def _meets(h, spec):
    ripple, atten = measure_spec(h, spec)
    return ripple <= spec.passband_ripple_db and atten >= spec.stopband_atten_db


def _remez(order, spec):
    dp = _ripple_to_deviation(spec.passband_ripple_db)
    ds = 10 ** (-spec.stopband_atten_db / 20)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return signal.remez(
            order + 1,
            [0, spec.cutoff, spec.stopband_edge, 1],
            [1, 0],
            weight=[1 / dp, 1 / ds],
            fs=2,
            maxiter=100,
        )


def _kaiser(order, spec):
    beta = signal.kaiser_beta(spec.stopband_atten_db)
    return signal.firwin(order + 1, spec.cutoff + spec.transition_bw / 2,
                         window=("kaiser", beta), fs=2)


def design_prototype(spec: FrequencySpec, max_order: int = 200) -> PrototypeFilter:
    """Smallest even-order linear-phase lowpass meeting ``spec``.

    Each candidate order is designed with the Remez exchange, falling back to a
    Kaiser window when the exchange does not converge. The result is scaled to
    unity DC gain so that the delay-complement modes have an exact null.
    """
    if not isinstance(spec, FrequencySpec):
        raise SpecError("spec must be a FrequencySpec")
    for order in range(2, max_order + 1, 2):
        for method, fn in (("remez", _remez), ("kaiser", _kaiser)):
            try:
                h = fn(order, spec)
            except (ValueError, RuntimeWarning, UserWarning):
                continue
            if not np.all(np.isfinite(h)) or abs(h.sum()) < 1e-12:
                continue
            h = h / h.sum()
            h = 0.5 * (h + h[::-1])
            if _meets(h, spec):
                return PrototypeFilter(h, spec=spec, method=method)
    raise DesignError(f"no even order <= {max_order} meets {spec}")


def load_coefficients(path) -> PrototypeFilter:
    """Read one decimal coefficient per line; ``#`` lines and blanks are skipped."""
    values = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError:
                raise CoefficientParseError(f"cannot parse {line!r} as a number", lineno) from None
            if not math.isfinite(v):
                raise CoefficientParseError(f"non-finite coefficient {line!r}", lineno)
            values.append(v)
    if not values:
        raise CoefficientParseError(f"{path}: no coefficients found")
    if len(values) < 2:
        raise CoefficientParseError(f"{path}: need at least two coefficients")
    return PrototypeFilter(np.array(values), method="file")


def save_coefficients(prototype, path):
    with open(path, "w") as fh:
        if prototype.spec is not None:
            s = prototype.spec
            fh.write(f"# order {prototype.order}, {prototype.method}: cutoff={s.cutoff} "
                     f"transition_bw={s.transition_bw} ripple={s.passband_ripple_db}dB "
                     f"atten={s.stopband_atten_db}dB\n")
        for v in prototype.coefficients:
            fh.write(f"{float(v)!r}\n")


# -- warping -------------------------------------------------------------------

def compute_alpha(f_co: float, f_c: float) -> float:
    """Warping coefficient that moves cutoff ``f_co`` to ``f_c``."""
    for name, v in (("f_co", f_co), ("f_c", f_c)):
        if not 0 < v < 1:
            raise SpecError(f"{name} must be in (0, 1), got {v}")
    alpha = math.sin((f_co - f_c) * math.pi / 2) / math.sin((f_co + f_c) * math.pi / 2)
    return check_alpha(alpha)


def allpass_response(alpha, omega):
    """``A(e^{j pi omega})`` for the first-order section."""
    z_inv = np.exp(-1j * np.pi * np.asarray(omega, dtype=np.float64))
    return (-alpha + z_inv) / (1 - alpha * z_inv)


def warp_frequency(alpha, omega):
    """Prototype-domain frequency evaluated by the warped filter at ``omega``.

    Equals ``-arg A(e^{j pi omega}) / pi`` unwrapped onto [0, 1].
    """
    alpha = check_alpha(alpha)
    w = np.asarray(omega, dtype=np.float64)
    if np.any((w < 0) | (w > 1)):
        raise SpecError("omega must lie in [0, 1]")
    theta = np.pi * w
    out = (theta + 2 * np.arctan2(alpha * np.sin(theta), 1 - alpha * np.cos(theta))) / np.pi
    return float(out) if np.ndim(out) == 0 else out


# -- filter --------------------------------------------------------------------

@dataclass
class FrequencyResponse:
    grid: np.ndarray
    values: np.ndarray

    @property
    def magnitude(self):
        return np.abs(self.values)

    @property
    def magnitude_db(self):
        return 20 * np.log10(np.maximum(self.magnitude, MAG_FLOOR))

    @property
    def phase(self):
        return np.angle(self.values)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["freq_norm", "mag_db", "phase_rad"])
            for f, m, p in zip(self.grid, self.magnitude_db, self.phase):
                w.writerow([f"{f:.9g}", f"{m:.9g}", f"{p:.9g}"])


@dataclass
class AptVdfFilter:
    """Warped FIR filter with streaming state.

    ``state`` holds ``(x[n-1], y[n-1])`` for every first-order all-pass stage;
    bandpass/bandstop use two stages per section.
    """

    prototype: PrototypeFilter
    alpha: float
    mode: FilterMode = FilterMode.LOWPASS
    state: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.alpha = check_alpha(self.alpha)
        self.mode = FilterMode.parse(self.mode)
        if self.mode.sel_f2 and self.prototype.order % 2:
            raise StructureError(
                f"{self.mode.label} needs an even prototype order for the N/2 delay "
                f"complement, got N={self.prototype.order}")
        self.state = np.zeros((self.n_stages, 2))

    @property
    def n_sections(self):
        return self.prototype.order

    @property
    def stages_per_section(self):
        return 2 if self.mode.sel_f1 else 1

    @property
    def n_stages(self):
        return self.n_sections * self.stages_per_section

    @property
    def complement_tap(self):
        """Section index feeding the delay branch, or -1 when unused."""
        return self.n_sections // 2 if self.mode.sel_f2 else -1

    def reset(self):
        self.state[:] = 0.0

    def section_response(self, omega):
        a = allpass_response(self.alpha, omega)
        return -a * a if self.mode.sel_f1 else a

    def frequency_response(self, grid_size=1024):
        return frequency_response(self, grid_size)

    def response_at(self, omega):
        s = self.section_response(omega)
        main = np.polynomial.polynomial.polyval(s, self.prototype.coefficients)
        if self.mode.sel_f2:
            return s ** self.complement_tap - main
        return main

    def settling_horizon(self, tol=1e-9):
        """Samples after which the impulse response has decayed below ``tol``."""
        per = math.ceil(math.log(tol) / math.log(abs(self.alpha) + 1e-6))
        return per * self.n_stages

    def process(self, x):
        return process_block(self, x)


def build_filter(prototype: PrototypeFilter, alpha: float,
                 mode: FilterMode | str = FilterMode.LOWPASS) -> AptVdfFilter:
    return AptVdfFilter(prototype, alpha, FilterMode.parse(mode))


def frequency_response(filt: AptVdfFilter, grid_size: int = 1024) -> FrequencyResponse:
    if grid_size < 2:
        raise SpecError("grid_size must be >= 2")
    grid = np.linspace(0.0, 1.0, int(grid_size))
    return FrequencyResponse(grid, filt.response_at(grid))


def check_finite(x):
    x = np.asarray(x, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise NonFiniteInputError(int(bad[0]))
    return x


def process_block(filt: AptVdfFilter, x) -> np.ndarray:
    """Filter a block, continuing from (and updating) the filter state."""
    x = check_finite(np.atleast_1d(x))
    y, _ = _kernels.allpass_cascade(
        x, filt.alpha, filt.prototype.coefficients,
        bool(filt.mode.sel_f1), filt.complement_tap, filt.state)
    return y


def run_float(filt: AptVdfFilter, x):
    """Process ``x`` from reset state; returns ``(y, max_abs_internal)``."""
    x = check_finite(np.atleast_1d(x))
    state = np.zeros_like(filt.state)
    return _kernels.allpass_cascade(
        x, filt.alpha, filt.prototype.coefficients,
        bool(filt.mode.sel_f1), filt.complement_tap, state)
