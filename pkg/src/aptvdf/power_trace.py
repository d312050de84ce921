"""Shunt-resistor power measurement and reconfiguration-event extraction.

The rail current is the amplified shunt voltage divided by gain and shunt
resistance; rail power is that current times the rail voltage. Powers are in
mW, times in s, energies in uJ.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from aptvdf.errors import SpecError

#: Gain-setting constant of the AD620 gain law G = 1 + 49.4 kOhm / R_G.
AD620_GAIN_CONSTANT = 49_400.0


def amplifier_gain(gain_resistor_ohms: float, gain_constant: float = AD620_GAIN_CONSTANT) -> float:
    if not gain_resistor_ohms > 0:
        raise SpecError("gain resistor must be positive")
    if math.isinf(gain_resistor_ohms):
        return 1.0
    return 1.0 + gain_constant / gain_resistor_ohms


@dataclass(frozen=True)
class MeasurementChain:
    shunt_ohms: float = 0.01
    amp_gain: float = 1.0
    rail_volts: float = 1.0
    shunt_tolerance: float = 0.01

    def __post_init__(self):
        if not self.shunt_ohms > 0:
            raise SpecError("shunt_ohms must be positive")
        if not self.amp_gain >= 1:
            raise SpecError("amp_gain must be >= 1")
        if not self.rail_volts > 0:
            raise SpecError("rail_volts must be positive")
        if not 0 <= self.shunt_tolerance < 1:
            raise SpecError("shunt_tolerance must be in [0, 1)")

    @classmethod
    def from_gain_resistor(cls, gain_resistor_ohms, shunt_ohms=0.01, rail_volts=1.0,
                           shunt_tolerance=0.01, gain_constant=AD620_GAIN_CONSTANT):
        return cls(shunt_ohms, amplifier_gain(gain_resistor_ohms, gain_constant),
                   rail_volts, shunt_tolerance)

    @classmethod
    def from_dict(cls, d):
        if "gain" in d:
            gain = float(d["gain"])
        elif "gain_resistor_ohms" in d:
            gain = amplifier_gain(float(d["gain_resistor_ohms"]),
                                  float(d.get("gain_constant", AD620_GAIN_CONSTANT)))
        else:
            raise SpecError("chain config needs 'gain' or 'gain_resistor_ohms'")
        return cls(float(d["shunt_ohms"]), gain, float(d["rail_volts"]),
                   float(d.get("shunt_tolerance", 0.01)))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_power_mw(self, volts):
        v = np.asarray(volts, dtype=np.float64)
        return 1e3 * self.rail_volts * v / (self.amp_gain * self.shunt_ohms)

    def to_volts(self, power_mw):
        """Amplifier output that a rail power would produce (inverse model)."""
        current = np.asarray(power_mw, dtype=np.float64) * 1e-3 / self.rail_volts
        return current * self.shunt_ohms * self.amp_gain


@dataclass
class Trace:
    time_s: np.ndarray
    volts: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.time_s = np.asarray(self.time_s, dtype=np.float64)
        self.volts = np.asarray(self.volts, dtype=np.float64)
        _check_times(self.time_s, self.volts)


@dataclass
class PowerTrace:
    time_s: np.ndarray
    power_mw: np.ndarray
    label: str = ""
    lower_mw: np.ndarray | None = None
    upper_mw: np.ndarray | None = None

    def __post_init__(self):
        self.time_s = np.asarray(self.time_s, dtype=np.float64)
        self.power_mw = np.asarray(self.power_mw, dtype=np.float64)
        _check_times(self.time_s, self.power_mw)


def _check_times(t, v):
    if t.ndim != 1 or t.shape != v.shape:
        raise SpecError("time and value arrays must be 1-D and the same length")
    if t.size < 2:
        raise SpecError("trace needs at least two samples")
    if not np.all(np.diff(t) > 0):
        raise SpecError("trace times must be strictly increasing")


def read_trace_csv(path, skip_rows=0, time_col=0, volt_col=1, label=None) -> Trace:
    """Load a ``time_s,volts`` CSV.

    ``skip_rows`` drops oscilloscope metadata lines before the header; any
    remaining non-numeric row (the header) is skipped as well.
    """
    times, volts = [], []
    with open(path, newline="") as fh:
        for _ in range(skip_rows):
            fh.readline()
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                t, v = float(row[time_col]), float(row[volt_col])
            except (ValueError, IndexError):
                continue
            times.append(t)
            volts.append(v)
    return Trace(np.array(times), np.array(volts), label or str(path))


def write_trace_csv(path, trace: Trace):
    with open(path, "w") as fh:
        fh.write("time_s,volts\n")
        for t, v in zip(trace.time_s, trace.volts):
            fh.write(f"{float(t)!r},{float(v)!r}\n")


def trace_to_power(trace: Trace, chain: MeasurementChain) -> PowerTrace:
    """Convert amplified shunt voltage to rail power with a shunt-tolerance band."""
    p = chain.to_power_mw(trace.volts)
    tol = chain.shunt_tolerance
    lo, hi = p / (1 + tol), p / (1 - tol)
    return PowerTrace(trace.time_s.copy(), p, trace.label,
                      np.minimum(lo, hi), np.maximum(lo, hi))


@dataclass(frozen=True)
class ReconfigEvent:
    start_s: float
    end_s: float
    baseline_mw: float
    mean_delta_mw: float
    peak_delta_mw: float
    energy_overhead_uj: float
    polarity: int = 1  # +1 power rise, -1 power drop

    @property
    def duration_s(self):
        return self.end_s - self.start_s


def _runs(mask):
    """``[(start, stop_inclusive)]`` of consecutive True entries."""
    if not mask.any():
        return []
    d = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def _signed_runs(dev, thr):
    out = []
    for sign in (1, -1):
        out += [(a, b, sign) for a, b in _runs(sign * dev > thr)]
    return sorted(out)


def _threshold(sigma, sigma_k, baseline):
    return max(sigma_k * sigma, 1e-9 * max(1.0, abs(baseline)))


def detect_events(power: PowerTrace, min_duration_s: float, sigma_k: float = 6.0):
    """Find excursions from the baseline that last at least ``min_duration_s``.

    Baseline is the median, estimated once on the whole trace and again with
    the first-pass event windows excluded; the noise scale is a MAD estimate on
    the first pass and the standard deviation of the baseline samples on the
    second.
    """
    t, p = power.time_s, power.power_mw
    if p.size < 100:
        raise SpecError("event detection needs at least 100 samples")
    if not min_duration_s > 0:
        raise SpecError("min_duration_s must be positive")

    def keep(runs):
        return [(a, b, s) for a, b, s in runs if t[b] - t[a] >= min_duration_s]

    base = float(np.median(p))
    sigma = 1.4826 * float(np.median(np.abs(p - base)))
    first = keep(_signed_runs(p - base, _threshold(sigma, sigma_k, base)))

    outside = np.ones(p.size, dtype=bool)
    for a, b, _ in first:
        outside[a:b + 1] = False
    if outside.sum() >= 2:
        base = float(np.median(p[outside]))
        sigma = float(np.std(p[outside]))
    dev = p - base
    events = []
    for a, b, sign in keep(_signed_runs(dev, _threshold(sigma, sigma_k, base))):
        seg = sign * dev[a:b + 1]
        energy_uj = 1e3 * float(trapezoid(dev[a:b + 1], t[a:b + 1]))
        events.append(ReconfigEvent(float(t[a]), float(t[b]), base, float(seg.mean()),
                                    float(seg.max()), energy_uj, sign))
    return events


@dataclass
class OverheadReport:
    events: list[ReconfigEvent]

    @property
    def total_energy_uj(self):
        return float(sum(e.energy_overhead_uj for e in self.events))

    @property
    def total_duration_s(self):
        return float(sum(e.duration_s for e in self.events))

    @property
    def max_peak_delta_mw(self):
        return max((e.peak_delta_mw for e in self.events), default=0.0)

    def to_dict(self):
        return {
            "events": [dict(asdict(e), duration_s=e.duration_s) for e in self.events],
            "count": len(self.events),
            "total_energy_uj": self.total_energy_uj,
            "total_duration_s": self.total_duration_s,
            "max_peak_delta_mw": self.max_peak_delta_mw,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def overhead_report(events) -> OverheadReport:
    return OverheadReport(list(events))


def rectangular_pulse(baseline_mw=340.0, peak_mw=500.0, width_s=324e-6, dt=1e-6,
                      lead_s=1e-3, tail_s=1e-3, noise_mw=0.0, seed=0):
    """Synthetic power trace with one flat-topped event whose edges land on samples."""
    n_lead = round(lead_s / dt)
    n_width = round(width_s / dt)
    n = n_lead + n_width + 1 + round(tail_s / dt)
    t = np.arange(n) * dt
    p = np.full(n, float(baseline_mw))
    p[n_lead:n_lead + n_width + 1] = peak_mw
    if noise_mw:
        p = p + np.random.default_rng(seed).normal(0.0, noise_mw, n)
    return PowerTrace(t, p, "synthetic pulse")
