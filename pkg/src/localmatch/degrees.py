"""Degree-distribution models: specification, sampling and truncated pmfs.

Models are parsed from CLI strings of the form ``regular:d=3``,
``uniform:a=1,b=5``, ``poisson:rho=2.0`` or ``explicit:file=pmf.csv`` (CSV
rows ``degree,prob``).  Sampling is by inversion of the c.d.f. against a
single uniform draw per node, so a fixed seed reproduces the same degree
vector on every platform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NoPositiveMass, SupportExceeded, TailTooHeavy
from .measures import RealMeasure

POISSON_DEGREE_CAP = 10_000
_PMF_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DegreeModel:
    """One of Regular(d), UniformRange(a,b), Poisson(rho), Explicit(pmf)."""

    kind: str
    d: int = 0
    a: int = 0
    b: int = 0
    rho: float = 0.0
    pmf: np.ndarray | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "regular":
            if self.d < 0:
                raise ConfigError("regular degree must be >= 0")
            if self.d == 0:
                raise NoPositiveMass("degree model concentrated on 0")
        elif self.kind == "uniform":
            if not 0 <= self.a <= self.b:
                raise ConfigError("uniform range needs 0 <= a <= b")
            if self.b == 0:
                raise NoPositiveMass("degree model concentrated on 0")
        elif self.kind == "poisson":
            if not self.rho > 0:
                raise ConfigError("poisson rate must be > 0")
        elif self.kind == "explicit":
            p = np.asarray(self.pmf, dtype=float)
            if p.ndim != 1 or p.size == 0:
                raise ConfigError("explicit pmf must be a nonempty vector")
            if np.any(p < 0):
                raise ConfigError("explicit pmf entries must be >= 0")
            if abs(p.sum() - 1.0) > _PMF_SUM_TOL:
                raise ConfigError(f"explicit pmf sums to {p.sum()!r}, not 1")
            if p[1:].sum() <= 0:
                raise NoPositiveMass("degree model concentrated on 0")
            object.__setattr__(self, "pmf", p)
        else:
            raise ConfigError(f"unknown degree model kind {self.kind!r}")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "regular":
            return f"regular:d={self.d}"
        if self.kind == "uniform":
            return f"uniform:a={self.a},b={self.b}"
        if self.kind == "poisson":
            return f"poisson:rho={self.rho:g}"
        return f"explicit:n={self.pmf.size - 1}"

    def finite_support(self) -> int | None:
        """Largest degree for finite-support models, None for Poisson."""
        if self.kind == "regular":
            return self.d
        if self.kind == "uniform":
            return self.b
        if self.kind == "explicit":
            return int(np.max(np.nonzero(self.pmf)[0]))
        return None

    def mean(self) -> float:
        if self.kind == "regular":
            return float(self.d)
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        if self.kind == "poisson":
            return self.rho
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    def _inversion_cdf(self) -> np.ndarray:
        if self.kind == "uniform":
            p = np.zeros(self.b + 1)
            p[self.a : self.b + 1] = 1.0 / (self.b - self.a + 1)
        elif self.kind == "poisson":
            ks = np.arange(POISSON_DEGREE_CAP + 1)
            logp = ks * math.log(self.rho) - self.rho - np.array([math.lgamma(k + 1) for k in ks])
            p = np.exp(logp)
        elif self.kind == "explicit":
            p = self.pmf
        else:
            raise ValueError("regular model needs no inversion table")
        cdf = np.cumsum(p)
        cdf[-1] = max(cdf[-1], 1.0)
        return cdf


@dataclass(frozen=True)
class DegreeVector:
    """Sampled degrees with an even total; `evenized` records the parity fixup."""

    degrees: np.ndarray
    evenized: bool

    def __post_init__(self):
        d = np.asarray(self.degrees, dtype=np.int64)
        if int(d.sum()) % 2 != 0:
            raise ValueError("degree vector total must be even")
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return self.degrees.size


def sample_degree_vector(model: DegreeModel, n: int, rng) -> DegreeVector:
    """Draw n i.i.d. degrees and repair odd parity.

    If the total is odd, the last positive component (in index order) is
    decremented by one; the choice is deterministic so a seed pins the vector.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if model.kind == "regular":
        degrees = np.full(n, model.d, dtype=np.int64)
    else:
        cdf = model._inversion_cdf()
        degrees = np.empty(n, dtype=np.int64)
        for i in range(n):
            u = rng.uniform()
            degrees[i] = int(np.searchsorted(cdf, u, side="right"))
    evenized = False
    if int(degrees.sum()) % 2 != 0:
        positive = np.nonzero(degrees > 0)[0]
        degrees[positive[-1]] -= 1
        evenized = True
    return DegreeVector(degrees=degrees, evenized=evenized)


def pmf_truncated(model: DegreeModel, support_bound: int, eps: float) -> RealMeasure:
    """Model pmf on 0..N; for Poisson the tail mass (< eps) folds into bucket N.

    Finite-support models are returned exactly and must fit under N.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    top = model.finite_support()
    if top is not None:
        if top > support_bound:
            raise SupportExceeded(f"model support {top} > bound {support_bound}")
        w = np.zeros(support_bound + 1)
        if model.kind == "regular":
            w[model.d] = 1.0
        elif model.kind == "uniform":
            w[model.a : model.b + 1] = 1.0 / (model.b - model.a + 1)
        else:
            w[: model.pmf.size] = model.pmf
        return RealMeasure(w)
    # Poisson: explicit tail control.
    ks = np.arange(support_bound + 1)
    logp = ks * math.log(model.rho) - model.rho - np.array([math.lgamma(k + 1) for k in ks])
    w = np.exp(logp)
    tail = 1.0 - w.sum()
    if tail >= eps:
        raise TailTooHeavy(f"tail beyond {support_bound} is {tail:.3e} >= {eps:.3e}")
    w[-1] += max(tail, 0.0)
    return RealMeasure(w)


def poisson_support_bound(rho: float, eps: float) -> int:
    """Smallest N <= 10^4 with Poisson(rho) tail mass below eps."""
    ks = np.arange(POISSON_DEGREE_CAP + 1)
    logp = ks * math.log(rho) - rho - np.array([math.lgamma(k + 1) for k in ks])
    tails = 1.0 - np.cumsum(np.exp(logp))
    ok = np.nonzero(tails < eps)[0]
    if ok.size == 0:
        raise TailTooHeavy(f"no N <= {POISSON_DEGREE_CAP} reaches tail < {eps:.3e}")
    return int(ok[0])


def parse_model_spec(spec: str) -> DegreeModel:
    """Parse a CLI model string; explicit models read their pmf file here."""
    try:
        kind, _, rest = spec.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, value = item.partition("=")
                if not value:
                    raise ConfigError(f"malformed parameter {item!r}")
                params[key.strip()] = value.strip()
        if kind == "regular":
            return DegreeModel(kind="regular", d=int(params["d"]), label=spec)
        if kind == "uniform":
            return DegreeModel(kind="uniform", a=int(params["a"]), b=int(params["b"]), label=spec)
        if kind == "poisson":
            return DegreeModel(kind="poisson", rho=float(params["rho"]), label=spec)
        if kind == "explicit":
            pmf = _read_pmf_csv(params["file"])
            return DegreeModel(kind="explicit", pmf=pmf, label=spec)
    except KeyError as exc:
        raise ConfigError(f"model {spec!r} is missing parameter {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"model {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown model kind in {spec!r}")


def _read_pmf_csv(path: str) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append((int(row[0]), float(row[1])))
            except ValueError:
                if not rows:
                    continue  # header line
                raise ConfigError(f"bad pmf row {row!r} in {path}")
    if not rows:
        raise ConfigError(f"no pmf rows in {path}")
    top = max(d for d, _ in rows)
    pmf = np.zeros(top + 1)
    for d, p in rows:
        pmf[d] += p
    return pmf
