"""Grid evaluation of agents and CSV emission.

Floats are written with 17 significant digits so they parse back to the same
binary value. Infinite bounds are written as ``inf``, missing values as ``nan``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IOFailure

GRID_HEADER = ("round", "agent", "x", "m_true", "m_hat", "bound", "source", "abs_error")
EVOLUTION_HEADER = ("round", "agent", "delta", "mean_bound", "max_bound")
LAB_HEADER = ("test", "config_hash", "parameters", "rate", "standard_error")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


@dataclass
class GridReport:
    round: int
    agent: int
    x: np.ndarray
    m_true: np.ndarray
    m_hat: np.ndarray
    bound: np.ndarray
    source: list[str]

    @property
    def usable(self) -> np.ndarray:
        return np.array([s != "none" for s in self.source])

    @property
    def abs_error(self) -> np.ndarray:
        err = np.abs(self.m_hat - self.m_true)
        return np.where(self.usable, err, np.nan)

    def rows(self):
        err = self.abs_error
        for i in range(len(self.x)):
            yield (self.round, self.agent, self.x[i], self.m_true[i], self.m_hat[i],
                   self.bound[i], self.source[i], err[i])


@dataclass(frozen=True)
class EvolutionRow:
    round: int
    agent: int
    delta: float
    mean_bound: float
    max_bound: float

    def row(self):
        return (self.round, self.agent, self.delta, self.mean_bound, self.max_bound)


def uniform_grid(domain: tuple[float, float], grid_size: int) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    return np.linspace(domain[0], domain[1], grid_size)


def collect_grid(agents: Sequence, phenomenon, grid: np.ndarray, round_index: int) -> list[GridReport]:
    """Run every agent's exploit on ``grid``. Unusable points carry source ``none``."""
    m_true = np.asarray(phenomenon(grid), dtype=float)
    reports = []
    for a in agents:
        res = a.exploit_many(grid)
        reports.append(GridReport(
            round=round_index, agent=a.id, x=np.asarray(grid, dtype=float), m_true=m_true,
            m_hat=np.array([r.m_hat for r in res]), bound=np.array([r.bound for r in res]),
            source=[r.source for r in res],
        ))
    return reports


def evolution_rows(reports: Iterable[GridReport], delta: float) -> list[EvolutionRow]:
    return [EvolutionRow(r.round, r.agent, delta, float(np.mean(r.bound)), float(np.max(r.bound)))
            for r in reports]


def write_rows(path: Path, header, rows) -> None:
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as e:
        raise IOFailure(f"cannot write {path}: {e}") from e


def write_grid_csv(reports: Iterable[GridReport], path) -> None:
    write_rows(path, GRID_HEADER, (row for r in reports for row in r.rows()))


def write_evolution_csv(rows: Iterable[EvolutionRow], path) -> None:
    write_rows(path, EVOLUTION_HEADER, (r.row() for r in rows))


def write_lab_csv(rows: Iterable[tuple], path) -> None:
    write_rows(path, LAB_HEADER, rows)


def _read(path, header):
    try:
        with Path(path).open(newline="") as fh:
            r = csv.reader(fh)
            got = tuple(next(r))
            if got != tuple(header):
                raise ValueError(f"unexpected header {got}")
            return list(r)
    except OSError as e:
        raise IOFailure(f"cannot read {path}: {e}") from e


def read_grid_csv(path) -> list[GridReport]:
    """Parse a grid CSV back into reports, grouped by (round, agent)."""
    groups: dict[tuple[int, int], list] = {}
    for row in _read(path, GRID_HEADER):
        groups.setdefault((int(row[0]), int(row[1])), []).append(row)
    out = []
    for (rnd, agent), rows in groups.items():
        out.append(GridReport(
            round=rnd, agent=agent,
            x=np.array([float(r[2]) for r in rows]),
            m_true=np.array([float(r[3]) for r in rows]),
            m_hat=np.array([float(r[4]) for r in rows]),
            bound=np.array([float(r[5]) for r in rows]),
            source=[r[6] for r in rows],
        ))
    return out


def read_evolution_csv(path) -> list[EvolutionRow]:
    return [EvolutionRow(int(r[0]), int(r[1]), float(r[2]), float(r[3]), float(r[4]))
            for r in _read(path, EVOLUTION_HEADER)]
