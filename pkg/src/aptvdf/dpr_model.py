"""Reconfiguration time/energy cost model and reference measurement records.

Unit conventions: throughput in bytes/second with ``MByte = 1e6`` bytes;
"KB" in the published full-bitstream size is taken as 1024 bytes.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass

from aptvdf.errors import SpecError

MEGA = 1_000_000
KIB = 1024


@dataclass(frozen=True)
class BitstreamInfo:
    label: str
    size_bytes: int
    frames: int = 0
    frame_regions: int = 0

    def __post_init__(self):
        if self.size_bytes <= 0:
            raise SpecError("size_bytes must be positive")
        if self.frames < 0 or self.frame_regions < 0:
            raise SpecError("frame counts must be non-negative")

    @classmethod
    def from_dict(cls, d):
        return cls(str(d.get("label", "")), int(d["size_bytes"]),
                   int(d.get("frames", 0)), int(d.get("frame_regions", 0)))


@dataclass(frozen=True)
class ReconfigInterface:
    name: str
    throughput: float  # bytes / s
    setup_overhead: float = 0.0  # s

    def __post_init__(self):
        if not self.throughput > 0:
            raise SpecError("throughput must be positive")
        if self.setup_overhead < 0:
            raise SpecError("setup_overhead must be non-negative")

    @classmethod
    def from_dict(cls, d):
        return cls(str(d.get("name", "")), float(d["throughput_bps"]),
                   float(d.get("setup_overhead_s", 0.0)))

    def to_dict(self):
        return {"name": self.name, "throughput_bps": self.throughput,
                "setup_overhead_s": self.setup_overhead}


@dataclass(frozen=True)
class ResourceReport:
    label: str
    lut: int | None = None
    fd: int | None = None
    slice_l: int | None = None
    slice_m: int | None = None
    slices_total: tuple[int, int] | None = None
    registers_total: tuple[int, int] | None = None
    luts_total: tuple[int, int] | None = None

    def __post_init__(self):
        for name in ("slices_total", "registers_total", "luts_total"):
            pair = getattr(self, name)
            if pair is not None and pair[0] > pair[1]:
                raise SpecError(f"{name}: used {pair[0]} exceeds available {pair[1]}")


@dataclass(frozen=True)
class PowerProfile:
    label: str
    static_mw: float
    dynamic_mw: float
    total_mw: float

    def __post_init__(self):
        if min(self.static_mw, self.dynamic_mw, self.total_mw) < 0:
            raise SpecError("power values must be non-negative")
        if self.total_mw < self.static_mw:
            raise SpecError("total power below static power")

    def consistency_error(self):
        """``static + dynamic - total`` in mW."""
        return self.static_mw + self.dynamic_mw - self.total_mw


def icap_throughput(word_bits: int, clock_hz: float) -> float:
    """Peak ICAP throughput: one word per clock."""
    if word_bits not in (8, 32):
        raise SpecError(f"ICAP word width must be 8 or 32 bits, got {word_bits}")
    if not clock_hz > 0:
        raise SpecError("clock_hz must be positive")
    return word_bits / 8 * clock_hz


def reconfig_time(bitstream: BitstreamInfo, interface: ReconfigInterface) -> float:
    return bitstream.size_bytes / interface.throughput + interface.setup_overhead


def calibrate_throughput(size_bytes: int, measured_time: float,
                         setup_overhead: float = 0.0) -> float:
    """Throughput implied by a measured reconfiguration time."""
    effective = measured_time - setup_overhead
    if effective <= 0:
        raise SpecError("measured_time must exceed setup_overhead")
    return size_bytes / effective


def reconfig_energy(delta_power_w: float, duration_s: float) -> float:
    """Energy overhead in joules."""
    if duration_s < 0:
        raise SpecError("duration must be non-negative")
    return delta_power_w * duration_s


@dataclass(frozen=True)
class ModeRow:
    bitstream: BitstreamInfo
    interface: ReconfigInterface
    measured_s: float | None = None

    @property
    def predicted_s(self):
        return reconfig_time(self.bitstream, self.interface)


@dataclass
class ComparisonReport:
    rows: list[ModeRow]

    def speedups(self, measured=False):
        """``{(slow, fast): t_slow / t_fast}`` for every ordered pair of rows."""
        out = {}
        for a, b in itertools.permutations(self.rows, 2):
            ta, tb = (a.measured_s, b.measured_s) if measured else (a.predicted_s, b.predicted_s)
            if ta is None or tb is None:
                continue
            out[(a.interface.name, b.interface.name)] = ta / tb
        return out

    def speedup(self, slow, fast, measured=False):
        return self.speedups(measured)[(slow, fast)]

    def to_dict(self):
        rows = []
        for r in self.rows:
            rows.append({
                "mode": r.interface.name,
                "bitstream": asdict(r.bitstream),
                "interface": r.interface.to_dict(),
                "predicted_s": r.predicted_s,
                "measured_s": r.measured_s,
            })
        pairs = []
        meas = self.speedups(measured=True)
        for (a, b), s in self.speedups().items():
            pairs.append({"slow": a, "fast": b, "predicted_speedup": s,
                          "measured_speedup": meas.get((a, b))})
        return {"rows": rows, "speedups": pairs}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_text(self):
        head = ("mode", "bytes", "throughput B/s", "overhead s", "predicted s", "measured s")
        body = [
            (r.interface.name, str(r.bitstream.size_bytes), f"{r.interface.throughput:.6g}",
             f"{r.interface.setup_overhead:.6g}", f"{r.predicted_s:.6g}",
             "-" if r.measured_s is None else f"{r.measured_s:.6g}")
            for r in self.rows
        ]
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                 for row in [head, *body]]
        meas = self.speedups(measured=True)
        lines.append("")
        for (a, b), s in self.speedups().items():
            if s < 1:
                continue
            m = meas.get((a, b))
            extra = "" if m is None else f" (measured {m:.6g}x)"
            lines.append(f"{a} -> {b}: {s:.6g}x{extra}")
        return "\n".join(lines)


def compare_modes(rows) -> ComparisonReport:
    """Predicted times and pairwise speedups for two or more configurations.

    ``rows`` holds ``ModeRow`` objects or ``(bitstream, interface)`` /
    ``(bitstream, interface, measured_s)`` tuples.
    """
    norm = [r if isinstance(r, ModeRow) else ModeRow(*r) for r in rows]
    if len(norm) < 2:
        raise SpecError("need at least two rows to compare")
    return ComparisonReport(norm)


# -- reference measurements ----------------------------------------------------

PARTIAL_BYTES = 94_464
FULL_BYTES = 1716 * KIB
ICAP_SETUP_S = 80e-6


@dataclass(frozen=True)
class TimingRecord:
    label: str
    size_bytes: int
    measured_s: float


TIMING = (
    TimingRecord("Full (JTAG)", FULL_BYTES, 3.80),
    TimingRecord("Partial (JTAG)", PARTIAL_BYTES, 208.9e-3),
    TimingRecord("Partial (ICAP32 DMA)", PARTIAL_BYTES, 324e-6),
)

# Reconfigurable-region resources. Column headings read "Highpass"/"Bandpass";
# the accompanying text attributes them to modes (0,1) and (1,1).
RR_RESOURCES = {
    (0, 1): (ResourceReport("highpass", lut=315, fd=0, slice_l=67, slice_m=23),
             BitstreamInfo("highpass", PARTIAL_BYTES, frames=16, frame_regions=2)),
    (1, 1): (ResourceReport("bandpass", lut=336, fd=336, slice_l=77, slice_m=26),
             BitstreamInfo("bandpass", PARTIAL_BYTES, frames=16, frame_regions=2)),
}

TOTAL_RESOURCES = {
    (0, 1): ResourceReport("(0,1)", slices_total=(2364, 7200),
                           registers_total=(3843, 28800), luts_total=(4850, 28800)),
    (1, 1): ResourceReport("(1,1)", slices_total=(2427, 7200),
                           registers_total=(4179, 28800), luts_total=(4998, 28800)),
}

POWER_ESTIMATES = {
    (0, 1): PowerProfile("(0,1)", static_mw=450, dynamic_mw=256, total_mw=707),
    (1, 1): PowerProfile("(1,1)", static_mw=450, dynamic_mw=270, total_mw=720),
}

# Core-rail observations around reconfiguration (mW).
CORE_FULL_RECONFIG_MW = 220.0
CORE_OPERATIONAL_MW = 360.0
CORE_PARTIAL_BASELINE_MW = 340.0
CORE_PARTIAL_PEAK_MW = 500.0


def paper_interfaces():
    """Interfaces for the three published reconfiguration paths.

    ICAP32 DMA uses the 32-bit/100 MHz peak rate plus the constant setup
    overhead; the JTAG rates are calibrated from their own measurements.
    """
    full, partial, _ = TIMING
    return (
        ReconfigInterface(full.label, calibrate_throughput(full.size_bytes, full.measured_s)),
        ReconfigInterface(partial.label,
                          calibrate_throughput(partial.size_bytes, partial.measured_s)),
        ReconfigInterface("Partial (ICAP32 DMA)", icap_throughput(32, 100e6), ICAP_SETUP_S),
    )


def paper_rows():
    return [ModeRow(BitstreamInfo(rec.label, rec.size_bytes), iface, rec.measured_s)
            for rec, iface in zip(TIMING, paper_interfaces())]


def table3_consistency(tol_mw: float = 2.0):
    """``[(label, static + dynamic - total, ok)]`` for each power estimate."""
    return [(p.label, p.consistency_error(), abs(p.consistency_error()) <= tol_mw)
            for p in POWER_ESTIMATES.values()]
