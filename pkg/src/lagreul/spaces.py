"""Discrete estimators for Hölder, Lebesgue and path-space norms on periodic grids.

The Hölder seminorm is a maximum of difference quotients over a deterministic
pair set: every offset inside a small window, axis-aligned dyadic offsets, and
a seeded batch of random far pairs.  All distances are torus distances.
"""
import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InsufficientDataError
from .grid import gradient

FAR_PAIR_CHUNK = 1 << 18


@dataclass(frozen=True)
class HolderParams:
    alpha: float = 0.5
    p: float = 2.0
    pairs: int | None = None
    window: int = 4
    seed: int = 0
    dyadic: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 1 < self.p < np.inf:
            raise ValueError(f"p must lie in (1, inf), got {self.p}")
        if self.window < 1:
            raise ValueError("window must be at least one cell")
        if self.pairs is not None and self.pairs < 0:
            raise ValueError("pair budget must be nonnegative")

    def pair_budget(self, grid):
        return 10 * grid.size if self.pairs is None else self.pairs


@dataclass(frozen=True)
class NormReport:
    lp: float
    linf: float
    holder: float
    grad_lp: float | None = None
    grad_linf: float | None = None
    grad_holder: float | None = None

    @property
    def c_alpha(self):
        return self.linf + self.holder

    @property
    def c_alpha_p(self):
        return self.lp + self.linf + self.holder

    @property
    def c1_alpha(self):
        self._need_grad()
        return self.linf + self.grad_linf + self.grad_holder

    @property
    def w1p(self):
        self._need_grad()
        return self.lp + self.grad_lp

    @property
    def c1_alpha_p(self):
        return self.c1_alpha + self.w1p

    def _need_grad(self):
        if self.grad_linf is None:
            raise ValueError("report was computed without gradient entries")

    def to_dict(self):
        out = asdict(self)
        out["c_alpha_p"] = self.c_alpha_p
        if self.grad_linf is not None:
            out["c1_alpha_p"] = self.c1_alpha_p
        return out


@dataclass(frozen=True)
class PathNorms:
    sup_norm: float
    lip_quotient: float | None
    samples: int

    @property
    def lip_norm(self):
        if self.lip_quotient is None:
            raise InsufficientDataError(f"Lipschitz path norm needs at least 2 samples, got {self.samples}")
        return self.lip_quotient + self.sup_norm


def _components(f, grid):
    f = np.asarray(f, dtype=float)
    return f.reshape((-1,) + grid.shape)


def _window_offsets(d, w):
    """Nonzero offsets in ``[-w, w]^d`` from one half-space (the other half gives the same pairs)."""
    out = []
    for o in itertools.product(range(-w, w + 1), repeat=d):
        nz = [c for c in o if c != 0]
        if nz and nz[0] > 0:
            out.append(o)
    return out


def _dyadic_offsets(grid, w):
    out = []
    step = 1
    while step <= grid.n // 2:
        if step > w:
            for a in range(grid.d):
                o = [0] * grid.d
                o[a] = step
                out.append(tuple(o))
        step *= 2
    return out


def _offset_distance(offset, grid):
    o = np.abs(np.asarray(offset))
    o = np.minimum(o, grid.n - o)
    return grid.h * np.sqrt((o**2).sum())


def holder_seminorm(f, grid, params=HolderParams()):
    """Estimate ``[f]_alpha`` (component-wise maximum for vector and tensor fields)."""
    comps = _components(f, grid)
    if not np.any(comps):
        return 0.0
    axes = tuple(range(1, grid.d + 1))
    offsets = _window_offsets(grid.d, min(params.window, grid.n // 2))
    if params.dyadic:
        offsets += _dyadic_offsets(grid, params.window)
    best = 0.0
    for o in offsets:
        diff = np.abs(comps - np.roll(comps, o, axis=axes)).max()
        best = max(best, diff / _offset_distance(o, grid) ** params.alpha)
    flat = comps.reshape(comps.shape[0], -1)
    rng = np.random.default_rng(params.seed)
    remaining = params.pair_budget(grid)
    shape = np.array(grid.shape)
    while remaining > 0:
        m = min(remaining, FAR_PAIR_CHUNK)
        remaining -= m
        i = rng.integers(0, grid.size, m)
        j = rng.integers(0, grid.size, m)
        di = np.abs(np.array(np.unravel_index(i, grid.shape)) - np.array(np.unravel_index(j, grid.shape)))
        di = np.minimum(di, shape[:, None] - di)
        dist = grid.h * np.sqrt((di**2).sum(axis=0))
        keep = dist > 0
        if not keep.any():
            continue
        diff = np.abs(flat[:, i[keep]] - flat[:, j[keep]]).max(axis=0)
        best = max(best, float((diff / dist[keep] ** params.alpha).max()))
    return float(best)


def lp_norm(f, grid, p):
    """Riemann-sum ``L^p`` norm with the pointwise Euclidean norm over components."""
    comps = _components(f, grid)
    mag = np.sqrt((comps**2).sum(axis=0))
    return float((np.sum(mag**p) * grid.cell_volume) ** (1.0 / p))


def linf_norm(f, grid):
    return float(np.abs(_components(f, grid)).max())


def c_norms(f, grid, params=HolderParams()):
    return NormReport(lp_norm(f, grid, params.p), linf_norm(f, grid), holder_seminorm(f, grid, params))


def c1_norms(f, grid, params=HolderParams()):
    g = gradient(np.asarray(f, dtype=float), grid)
    return NormReport(
        lp_norm(f, grid, params.p),
        linf_norm(f, grid),
        holder_seminorm(f, grid, params),
        grad_lp=lp_norm(g, grid, params.p),
        grad_linf=linf_norm(g, grid),
        grad_holder=holder_seminorm(g, grid, params),
    )


NORMS = {
    "c_alpha_p": lambda f, grid, params: c_norms(f, grid, params).c_alpha_p,
    "c_alpha": lambda f, grid, params: linf_norm(f, grid) + holder_seminorm(f, grid, params),
    "c1_alpha_p": lambda f, grid, params: c1_norms(f, grid, params).c1_alpha_p,
    "c1_alpha": lambda f, grid, params: c1_norms(f, grid, params).c1_alpha,
    "w1p": lambda f, grid, params: c1_norms(f, grid, params).w1p,
    "linf": lambda f, grid, params: linf_norm(f, grid),
}


def field_norm(f, grid, params=HolderParams(), kind="c_alpha_p"):
    try:
        return NORMS[kind](f, grid, params)
    except KeyError:
        raise ValueError(f"unknown norm {kind!r}; choose from {sorted(NORMS)}") from None


def path_norms(samples, T, norm=None):
    """Sup and consecutive-sample Lipschitz quotient of a uniformly sampled path.

    ``samples[j]`` is the path at ``t_j = j T / (len(samples) - 1)``.  ``norm``
    maps one sample to its ``Y`` norm; the default treats samples as scalars.
    """
    norm = (lambda a: float(np.abs(a).max())) if norm is None else norm
    samples = list(samples)
    if not samples:
        raise InsufficientDataError("path has no samples")
    sup = max(norm(s) for s in samples)
    if len(samples) < 2:
        return PathNorms(sup, None, len(samples))
    if not T > 0:
        raise ValueError(f"path duration must be positive, got {T}")
    dt = T / (len(samples) - 1)
    lip = max(norm(np.asarray(b) - np.asarray(a)) for a, b in zip(samples[:-1], samples[1:])) / dt
    return PathNorms(sup, lip, len(samples))


def field_path_norms(path, grid, T, params=HolderParams(), kind="c_alpha_p"):
    """Path norms of a field path ``path[j]`` measured in one of :data:`NORMS`."""
    return path_norms(path, T, lambda f: field_norm(f, grid, params, kind))


def m_x(displacement, grid, params=HolderParams()):
    """``1 + sup_t ||X(t) - Id||_{C^{1+alpha}}`` from a displacement path (or a FlowMap)."""
    disp = getattr(displacement, "displacement", displacement)
    return 1.0 + max(c1_norms(s, grid, params).c1_alpha for s in disp)
