"""Spectrum tables and their CSV / JSON serialisations."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, RangeError
from .moduli import check_bc
from .serialize import dumps

SOURCES = ("exact", "dispersion", "fem")
CSV_HEADER = "index,eigenvalue,multiplicity,angular_order,radial_index,bc,source"
FLOAT_FMT = "%.12e"


def fmt(value: float) -> str:
    return FLOAT_FMT % value


@dataclass(frozen=True)
class ModeIndex:
    family: str  # "scalar" | "elastic"
    angular_order: int
    radial_index: int
    bc: str


@dataclass
class SpectrumTable:
    """Sorted eigenvalues with multiplicities.

    Rows with equal eigenvalue may appear separately when they come from
    different angular orders.  ``angular_order`` / ``radial_index`` use -1 for
    rows without a mode label (FEM output, rigid motions).
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    bc: str
    source: str
    max_reliable: float
    angular_order: np.ndarray = field(default=None)
    radial_index: np.ndarray = field(default=None)

    def __post_init__(self):
        self.bc = check_bc(self.bc)
        if self.source not in SOURCES:
            raise ConfigError(f"unknown spectrum source {self.source!r}")
        ev = np.asarray(self.eigenvalues, dtype=float)
        mult = np.asarray(self.multiplicities, dtype=int)
        if ev.shape != mult.shape:
            raise ConfigError("eigenvalues and multiplicities must align")
        if mult.size and mult.min() < 1:
            raise ConfigError("multiplicities must be positive")
        ao = np.full(ev.shape, -1, dtype=int) if self.angular_order is None else np.asarray(self.angular_order, dtype=int)
        ri = np.full(ev.shape, -1, dtype=int) if self.radial_index is None else np.asarray(self.radial_index, dtype=int)
        order = np.lexsort((ri, ao, ev))
        self.eigenvalues = ev[order]
        self.multiplicities = mult[order]
        self.angular_order = ao[order]
        self.radial_index = ri[order]
        self.max_reliable = float(self.max_reliable)

    def __len__(self):
        return self.eigenvalues.size

    @property
    def total_count(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity, ascending."""
        return np.repeat(self.eigenvalues, self.multiplicities)

    def count(self, Lambda: float) -> int:
        """Multiplicity-weighted ``#{tau <= Lambda}`` (right-continuous)."""
        if Lambda > self.max_reliable * (1 + 1e-12):
            raise RangeError(f"Lambda={Lambda:g} exceeds certified range {self.max_reliable:g}")
        k = np.searchsorted(self.eigenvalues, Lambda, side="right")
        return int(self.multiplicities[:k].sum())

    def certified(self) -> "SpectrumTable":
        keep = self.eigenvalues <= self.max_reliable
        return SpectrumTable(self.eigenvalues[keep], self.multiplicities[keep], self.bc, self.source,
                             self.max_reliable, self.angular_order[keep], self.radial_index[keep])

    def lowest(self, k: int) -> np.ndarray:
        return self.expanded()[:k]

    def clustered(self, rel_gap: float = 1e-6) -> "SpectrumTable":
        """Merge rows whose eigenvalues differ by less than ``rel_gap`` (relative)."""
        ev, mult = self.eigenvalues, self.multiplicities
        if ev.size == 0:
            return self
        groups = [[0]]
        for i in range(1, ev.size):
            ref = ev[groups[-1][0]]
            if abs(ev[i] - ref) <= rel_gap * max(abs(ref), abs(ev[i])) or (ev[i] == ref):
                groups[-1].append(i)
            else:
                groups.append([i])
        vals = [float(np.average(ev[g], weights=mult[g])) for g in groups]
        mults = [int(mult[g].sum()) for g in groups]
        return SpectrumTable(vals, mults, self.bc, self.source, self.max_reliable)

    # serialisation

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for i, (ev, m, ao, ri) in enumerate(zip(self.eigenvalues, self.multiplicities,
                                                self.angular_order, self.radial_index)):
            ao_s = "" if ao < 0 else str(ao)
            ri_s = "" if ri < 0 else str(ri)
            buf.write(f"{i},{fmt(ev)},{m},{ao_s},{ri_s},{self.bc},{self.source}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "bc": self.bc,
            "source": self.source,
            "count": self.total_count,
            "max_reliable": self.max_reliable,
            "eigenvalues": self.expanded().tolist(),
        }

    def to_json(self) -> str:
        return dumps(self.summary()) + "\n"

    @classmethod
    def from_csv(cls, text: str, max_reliable: float | None = None) -> "SpectrumTable":
        lines = [ln for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0].strip() != CSV_HEADER:
            raise ConfigError("spectrum CSV header mismatch")
        ev, mult, ao, ri = [], [], [], []
        bc = source = None
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 7:
                raise ConfigError(f"malformed spectrum row: {ln!r}")
            ev.append(float(parts[1]))
            mult.append(int(parts[2]))
            ao.append(int(parts[3]) if parts[3] else -1)
            ri.append(int(parts[4]) if parts[4] else -1)
            bc, source = parts[5], parts[6]
        if bc is None:
            raise ConfigError("empty spectrum CSV")
        top = max(ev) if max_reliable is None else max_reliable
        return cls(ev, mult, bc, source, top, ao, ri)
