"""Finite scenario spaces, portfolios and empirical distributions.

Random variables are plain 1-D float arrays indexed by scenario. A
:class:`ScenarioSet` owns the scenario probabilities and the decomposition
``X = X_1 + ... + X_n`` as an ``n x m`` matrix.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels

PROB_TOL = 1e-12
# cumulative probabilities are compared against levels with this slack
LEVEL_TOL = 1e-12


class ScenarioError(ValueError):
    """Raised for invalid scenario data or dimension mismatches."""


class ScenarioFormatError(ScenarioError):
    """Scenario CSV violation with the 1-based row/column where it occurred."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Probability vector ``probs`` (m,) and outcome matrix ``positions`` (n, m)."""

    probs: np.ndarray
    positions: np.ndarray
    labels: tuple[str, ...]

    def __init__(self, probs, positions, labels: Sequence[str] | None = None):
        probs = np.asarray(probs, dtype=float)
        positions = np.asarray(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions[None, :]
        if probs.ndim != 1 or probs.size == 0:
            raise ScenarioError("probs must be a non-empty 1-D vector")
        if positions.ndim != 2 or positions.shape[0] == 0:
            raise ScenarioError("positions must be an n x m matrix with n >= 1")
        if positions.shape[1] != probs.size:
            raise ScenarioError(
                f"positions have {positions.shape[1]} scenarios, probs has {probs.size}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            j = int(np.flatnonzero(~(np.isfinite(probs) & (probs > 0)))[0])
            raise ScenarioError(f"scenario {j}: probability must be > 0, got {probs[j]}")
        total = _kernels.cumulative(probs)[-1]
        if abs(total - 1.0) > PROB_TOL:
            raise ScenarioError(f"probabilities sum to {total!r}, expected 1")
        if not np.all(np.isfinite(positions)):
            i, j = np.argwhere(~np.isfinite(positions))[0]
            raise ScenarioError(f"position {i}, scenario {j}: outcome is not finite")
        n = positions.shape[0]
        if labels is None:
            labels = tuple(f"X{i + 1}" for i in range(n))
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise ScenarioError(f"expected {n} labels, got {len(labels)}")
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "positions", _frozen(positions))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def m(self) -> int:
        return self.positions.shape[1]

    def position(self, i: int) -> np.ndarray:
        return self.positions[i]

    def total(self) -> np.ndarray:
        """The aggregate ``X = sum_i X_i``."""
        return aggregate(self, np.ones(self.n))

    @classmethod
    def uniform(cls, positions, labels=None) -> "ScenarioSet":
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        m = positions.shape[1]
        return cls(np.full(m, 1.0 / m), positions, labels)

    def with_positions(self, positions, labels=None) -> "ScenarioSet":
        """Same probability space, different decomposition."""
        return ScenarioSet(self.probs, positions, labels)


def as_outcome(x, scn: ScenarioSet) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != scn.m:
        raise ScenarioError(f"outcome must have {scn.m} scenario values, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ScenarioError("outcome values must be finite")
    return x


def aggregate(scn: ScenarioSet, u) -> np.ndarray:
    """``sum_i u[i] * X_i``, summed left to right over positions."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != scn.n:
        raise ScenarioError(f"portfolio weights: expected n={scn.n}, got {u.size}")
    if not np.all(np.isfinite(u)):
        raise ScenarioError("portfolio weights must be finite")
    return _kernels.aggregate(scn.positions, u)


def expectation(x, scn: ScenarioSet) -> float:
    return float(_kernels.weighted_sum(scn.probs, as_outcome(x, scn)))


@dataclass(frozen=True)
class Support:
    """Sorted view of an outcome used by every distribution-based measure.

    ``order`` sorts scenarios ascending by value (stable). ``values`` are the
    distinct support points and ``cdf[k] = P[X <= values[k]]`` with the last
    entry pinned to exactly 1.
    """

    order: np.ndarray
    sorted_values: np.ndarray
    sorted_probs: np.ndarray
    values: np.ndarray
    cdf: np.ndarray
    scenario_cdf: np.ndarray  # cdf at each sorted scenario, ties share the group value

    @property
    def distinct(self) -> bool:
        return self.values.size == self.sorted_values.size


def support(x, scn: ScenarioSet) -> Support:
    x = as_outcome(x, scn)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ps = scn.probs[order]
    cum = np.array(_kernels.cumulative(ps))
    cum[-1] = 1.0
    last_of_group = np.ones(xs.size, dtype=bool)
    last_of_group[:-1] = xs[1:] != xs[:-1]
    values = xs[last_of_group]
    cdf = cum[last_of_group]
    group = np.cumsum(np.concatenate(([0], last_of_group[:-1].astype(int))))
    return Support(order, xs, ps, values, cdf, cdf[group])


def empirical_cdf(x, scn: ScenarioSet, t: float) -> float:
    """``P[X <= t]``."""
    s = support(x, scn)
    k = int(np.searchsorted(s.values, t, side="right"))
    return 0.0 if k == 0 else float(s.cdf[k - 1])


def quantile(x, scn: ScenarioSet, p: float) -> float:
    """Lower quantile ``inf{x : F(x) >= p}`` for ``0 < p <= 1``."""
    if not (0.0 < p <= 1.0):
        raise ScenarioError(f"quantile level must lie in (0, 1], got {p}")
    s = support(x, scn)
    k = int(np.searchsorted(s.cdf, p - LEVEL_TOL, side="left"))
    return float(s.values[min(k, s.values.size - 1)])


# -- CSV ---------------------------------------------------------------------

def parse_scenarios(text: str, source: str = "<string>") -> ScenarioSet:
    """Parse ``prob,<label_1>,...,<label_n>`` CSV; ``#`` lines are comments."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append((lineno, line))
    if not rows:
        raise ScenarioFormatError(f"{source}: no header found")
    header_line, header = rows[0]
    fields = [f.strip() for f in next(csv.reader([header]))]
    if len(fields) < 2 or fields[0].lower() != "prob":
        raise ScenarioFormatError(
            f"{source}: header must be 'prob,<label_1>,...'", row=header_line, column=1
        )
    labels = fields[1:]
    if any(not lab for lab in labels):
        raise ScenarioFormatError(f"{source}: empty position label", row=header_line)
    if len(set(labels)) != len(labels):
        raise ScenarioFormatError(f"{source}: duplicate position labels", row=header_line)
    probs, cols = [], []
    for lineno, line in rows[1:]:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != len(fields):
            raise ScenarioFormatError(
                f"{source}: expected {len(fields)} fields, got {len(cells)}", row=lineno
            )
        vals = []
        for col, cell in enumerate(cells, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ScenarioFormatError(
                    f"{source}: not a number: {cell!r}", row=lineno, column=col
                ) from None
            if not np.isfinite(v):
                raise ScenarioFormatError(f"{source}: value not finite", row=lineno, column=col)
            if col == 1 and v <= 0:
                raise ScenarioFormatError(
                    f"{source}: probability must be > 0", row=lineno, column=col
                )
            vals.append(v)
        probs.append(vals[0])
        cols.append(vals[1:])
    if not probs:
        raise ScenarioFormatError(f"{source}: no scenario rows")
    total = _kernels.cumulative(np.array(probs))[-1]
    if abs(total - 1.0) > PROB_TOL:
        raise ScenarioFormatError(
            f"{source}: probabilities sum to {total!r}, expected 1", row=rows[-1][0], column=1
        )
    return ScenarioSet(probs, np.array(cols).T, labels)


def load_scenarios(path) -> ScenarioSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    return parse_scenarios(text, source=str(path))


def format_scenarios(scn: ScenarioSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["prob", *scn.labels])
    for j in range(scn.m):
        w.writerow([repr(float(scn.probs[j]))] + [repr(float(v)) for v in scn.positions[:, j]])
    return buf.getvalue()
