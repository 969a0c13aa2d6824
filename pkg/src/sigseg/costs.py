"""Interval cost evaluators fitted once per signal.

Each evaluator answers c(a, b), the single-regime fit cost of samples
a+1 .. b (1-based), i.e. rows a .. b-1 of the data matrix, from summaries
precomputed at fit time (prefix sums, rank signal, Gram matrix, lag
matrix).  Fitted state is immutable, so eval may be called concurrently;
the lazily cached kernel path synchronizes internally and returns values
identical to the fully cached path.

Natural logarithms throughout.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .signals import Signal, Segmentation, as_signal

COST_KINDS = (
    "l2",
    "normal",
    "poisson",
    "linear",
    "linear_l1",
    "ar",
    "mahalanobis",
    "rank",
    "ecdf",
    "kernel_linear",
    "kernel_rbf",
    "kernel_poly",
    "kernel_chi2",
)

KERNEL_KINDS = ("linear", "rbf", "polynomial", "chi2")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and parameters for the kernel cost.

    gamma is the bandwidth (rbf, chi2); const and deg parametrize the
    polynomial kernel (k(x, y) = (<x, y> + const)^deg).  A missing gamma is
    resolved at fit time by the median heuristic on the fitted signal.
    """

    kind: str
    gamma: float | None = None
    const: float = 1.0
    deg: int = 2

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}, expected one of {KERNEL_KINDS}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.deg < 1:
            raise ValueError("deg must be >= 1")


class Covariates:
    """Regressors for the piecewise linear costs.

    x holds the per-segment (changing) regressors, z the optional
    regressors shared across segments; per-segment fits treat both as free.
    """

    __slots__ = ("x", "z")

    def __init__(self, x, z=None):
        self.x = self._matrix(x, "x")
        self.z = None if z is None else self._matrix(z, "z")
        if self.z is not None and self.z.shape[0] != self.x.shape[0]:
            raise ValueError("x and z must have the same number of rows")

    @staticmethod
    def _matrix(arr, name):
        out = np.asarray(arr, dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        if out.ndim != 2:
            raise ValueError(f"covariates {name} must be 1-D or 2-D")
        if not np.isfinite(out).all():
            raise ValueError(f"covariates {name} contain NaN or Inf")
        out = out.copy()
        out.flags.writeable = False
        return out

    @property
    def design(self) -> np.ndarray:
        if self.z is None:
            return self.x
        return np.hstack([self.x, self.z])

    @property
    def n_params(self) -> int:
        return self.x.shape[1] + (0 if self.z is None else self.z.shape[1])


class CostModel:
    """Base interval evaluator; subclasses implement _values."""

    kind = "?"

    def __init__(self, signal: Signal, min_size: int = 1):
        self._signal = signal
        self.min_size = int(min_size)

    @property
    def signal(self) -> Signal:
        return self._signal

    def eval(self, a: int, b: int) -> float:
        """Cost of the sub-signal covering samples a+1 .. b."""
        vals = self.eval_batch(np.array([a]), np.array([b]))
        return float(vals[0])

    def eval_batch(self, starts, ends) -> np.ndarray:
        """Vectorized eval over parallel arrays of interval bounds."""
        starts, ends = np.broadcast_arrays(np.asarray(starts, dtype=np.int64),
                                           np.asarray(ends, dtype=np.int64))
        if starts.ndim != 1:
            starts, ends = starts.ravel(), ends.ravel()
        T = self._signal.T
        if starts.size and (starts.min() < 0 or ends.max() > T):
            raise ValueError(f"interval out of range for T={T}")
        if starts.size and (ends - starts).min() < self.min_size:
            raise ValueError(f"segment shorter than min_size={self.min_size} for cost {self.kind!r}")
        return self._values(starts, ends)

    def _values(self, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        # Vectorized costs override this; the rest loop over _one.
        return np.array([self._one(int(a), int(b)) for a, b in zip(starts, ends)], dtype=float)

    def _one(self, a: int, b: int) -> float:
        raise NotImplementedError


class L2Cost(CostModel):
    """Sum of squared deviations from the segment mean."""

    kind = "l2"

    def __init__(self, signal: Signal):
        super().__init__(signal, min_size=1)
        Y = signal.data
        self._sq = _prefix(np.sum(Y * Y, axis=1))
        self._sm = _prefix(Y)

    def _values(self, starts, ends):
        n = (ends - starts).astype(float)
        q = self._sq[ends] - self._sq[starts]
        s = self._sm[ends] - self._sm[starts]
        return np.maximum(0.0, q - np.einsum("ij,ij->i", s, s) / n)


class MahalanobisCost(CostModel):
    """Squared deviations from the segment mean under a PSD metric M."""

    kind = "mahalanobis"

    def __init__(self, signal: Signal, metric):
        super().__init__(signal, min_size=1)
        M = np.asarray(metric, dtype=float)
        d = signal.d
        if M.shape != (d, d):
            raise ValueError(f"metric must be {d}x{d}, got {M.shape}")
        scale = max(1.0, np.abs(M).max())
        if np.abs(M - M.T).max() > 1e-8 * scale:
            raise ValueError("metric matrix is not symmetric")
        if np.linalg.eigvalsh((M + M.T) / 2).min() < -1e-8 * scale:
            raise ValueError("metric matrix is not positive semi-definite")
        self._M = M
        Y = signal.data
        self._sq = _prefix(np.sum((Y @ M) * Y, axis=1))
        self._sm = _prefix(Y)

    def _values(self, starts, ends):
        n = (ends - starts).astype(float)
        q = self._sq[ends] - self._sq[starts]
        s = self._sm[ends] - self._sm[starts]
        return np.maximum(0.0, q - np.einsum("ij,ij->i", s @ self._M, s) / n)


class SigmaCost(CostModel):
    """Gaussian mean-and-covariance fit cost: n * (log det of the segment
    MLE covariance + d).

    Near-singular covariances are ridge-regularized by 1e-6 * (tr/d) unless
    regularization is disabled, in which case they raise.
    """

    kind = "normal"

    _EPS = 1e-6
    _SINGULAR_TOL = 1e-10

    def __init__(self, signal: Signal, regularize: bool = True):
        super().__init__(signal, min_size=signal.d + 1)
        Y = signal.data
        self._sm = _prefix(Y)
        self._so = _prefix(np.einsum("ti,tj->tij", Y, Y))
        self._regularize = bool(regularize)

    def _one(self, a, b):
        n = float(b - a)
        mean = (self._sm[b] - self._sm[a]) / n
        cov = (self._so[b] - self._so[a]) / n - np.outer(mean, mean)
        d = self._signal.d
        tr_norm = float(np.trace(cov)) / d
        if np.linalg.eigvalsh(cov).min() < self._SINGULAR_TOL * tr_norm:
            if not self._regularize:
                raise ValueError(f"singular covariance on interval ({a}, {b}]")
            cov = cov + self._EPS * tr_norm * np.eye(d)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0 or not np.isfinite(logdet):
            raise ValueError(f"singular covariance on interval ({a}, {b}]")
        return n * (logdet + d)


class PoissonCost(CostModel):
    """Poisson rate fit cost, -n * mean * log(mean), summed over dimensions.

    0 * log 0 counts as 0.  Requires nonnegative data.
    """

    kind = "poisson"

    def __init__(self, signal: Signal):
        super().__init__(signal, min_size=1)
        if (signal.data < 0).any():
            raise ValueError("poisson cost requires nonnegative data")
        self._sm = _prefix(signal.data)

    def _values(self, starts, ends):
        n = (ends - starts).astype(float)
        means = (self._sm[ends] - self._sm[starts]) / n[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(means > 0, means * np.log(means), 0.0)
        return -n * terms.sum(axis=1)


class LinearCost(CostModel):
    """Least-squares residual of regressing the signal on covariates.

    Rank-deficient designs fall back to the minimum-norm solution.
    """

    kind = "linear"

    def __init__(self, signal: Signal, covariates: Covariates):
        if signal.d != 1:
            raise ValueError("linear cost expects a univariate response")
        if covariates.x.shape[0] != signal.T:
            raise ValueError("covariates must have the same length as the signal")
        super().__init__(signal, min_size=covariates.n_params)
        self._design = covariates.design
        self._y = signal.data[:, 0]

    def _one(self, a, b):
        W = self._design[a:b]
        y = self._y[a:b]
        coef = np.linalg.lstsq(W, y, rcond=None)[0]
        resid = y - W @ coef
        return float(resid @ resid)


class LinearL1Cost(CostModel):
    """Least absolute deviations residual, solved by reweighted least squares."""

    kind = "linear_l1"

    def __init__(self, signal: Signal, covariates: Covariates):
        if signal.d != 1:
            raise ValueError("linear_l1 cost expects a univariate response")
        if covariates.x.shape[0] != signal.T:
            raise ValueError("covariates must have the same length as the signal")
        super().__init__(signal, min_size=covariates.n_params)
        self._design = covariates.design
        self._y = signal.data[:, 0]

    def _one(self, a, b):
        return irls_lad(self._design[a:b], self._y[a:b])[0]


def irls_lad(design, y, *, weight_floor=1e-8, max_iter=50, rel_tol=1e-10):
    """Minimize sum |y - design @ u| by iteratively reweighted least squares.

    Starts from the least-squares fit; each accepted iterate lowers the
    objective (worsening steps are rejected, which ends the loop), so the
    returned history is non-increasing.  Returns (objective, history).
    """
    coef = np.linalg.lstsq(design, y, rcond=None)[0]
    resid = y - design @ coef
    best = float(np.abs(resid).sum())
    history = [best]
    for _ in range(max_iter):
        w = np.sqrt(1.0 / np.maximum(np.abs(resid), weight_floor))
        coef = np.linalg.lstsq(design * w[:, None], y * w, rcond=None)[0]
        resid = y - design @ coef
        cur = float(np.abs(resid).sum())
        if cur > best:
            break
        history.append(cur)
        converged = best - cur < rel_tol * max(best, 1.0)
        best = cur
        if converged:
            break
    return best, history


class ARCost(CostModel):
    """Residual of regressing each sample on its lagged values plus an
    intercept.

    Lag vectors come from the full signal, so a segment is fitted against
    true history across its left boundary.  The first segment (a = 0) is
    conditioned on the first `order` samples; interior intervals starting
    before `order` are rejected.
    """

    kind = "ar"

    def __init__(self, signal: Signal, order: int):
        if signal.d != 1:
            raise ValueError("ar cost expects a univariate signal")
        order = int(order)
        if order < 1:
            raise ValueError("ar order must be >= 1")
        if order >= signal.T:
            raise ValueError(f"ar order {order} too large for T={signal.T}")
        super().__init__(signal, min_size=order + 1)
        y = signal.data[:, 0]
        self.order = order
        # Row i describes sample order+i: its `order` lags and an intercept.
        cols = [y[order - k - 1 : signal.T - k - 1] for k in range(order)]
        cols.append(np.ones(signal.T - order))
        self._design = np.column_stack(cols)
        self._resp = y[order:]

    def _one(self, a, b):
        p = self.order
        if 0 < a < p:
            raise ValueError(f"ar cost needs interval start 0 or >= order ({p}), got {a}")
        s = max(a, p)
        W = self._design[s - p : b - p]
        y = self._resp[s - p : b - p]
        coef = np.linalg.lstsq(W, y, rcond=None)[0]
        resid = y - W @ coef
        return float(resid @ resid)


class RankCost(CostModel):
    """Homogeneity of centered per-dimension rank statistics.

    Invariant under strictly increasing maps of tie-free data.
    """

    kind = "rank"

    def __init__(self, signal: Signal):
        super().__init__(signal, min_size=1)
        Y = signal.data
        T = signal.T
        ranks = np.empty_like(Y)
        for j in range(signal.d):
            col = Y[:, j]
            ranks[:, j] = np.searchsorted(np.sort(col), col, side="right")
        r = ranks - (T + 1) / 2.0
        self._pr = _prefix(r)
        shifted = r + 0.5
        cov = (shifted.T @ shifted) / T
        self._inv = np.linalg.pinv(cov, hermitian=True)

    def _values(self, starts, ends):
        n = (ends - starts).astype(float)
        rbar = (self._pr[ends] - self._pr[starts]) / n[:, None]
        quad = np.einsum("ij,jk,ik->i", rbar, self._inv, rbar)
        return -n * quad


class EcdfCost(CostModel):
    """Nonparametric likelihood cost from segment empirical cdfs.

    The segment cdf is evaluated at every order statistic u_(j) of the full
    signal, with weights 1 / ((j - 0.5) * (T - j + 0.5)); equal values count
    one half.  Univariate only.
    """

    kind = "ecdf"

    def __init__(self, signal: Signal):
        if signal.d != 1:
            raise ValueError("ecdf cost is defined for univariate signals only")
        super().__init__(signal, min_size=1)
        self._y = signal.data[:, 0]
        self._sorted = np.sort(self._y)
        j = np.arange(1, signal.T + 1, dtype=float)
        self._weights = 1.0 / ((j - 0.5) * (signal.T - j + 0.5))

    def _one(self, a, b):
        n = float(b - a)
        seg = np.sort(self._y[a:b])
        less = np.searchsorted(seg, self._sorted, side="left")
        leq = np.searchsorted(seg, self._sorted, side="right")
        F = (less + 0.5 * (leq - less)) / n
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(
                (F > 0) & (F < 1),
                F * np.log(F) + (1.0 - F) * np.log(1.0 - F),
                0.0,
            )
        return -n * float(np.sum(g * self._weights))


class KernelCost(CostModel):
    """Scatter of the signal around its segment mean in kernel feature space.

    c(a, b) = sum_t k(y_t, y_t) - (1/n) sum_{s,t} k(y_s, y_t) over the
    segment.  The Gram matrix is held in full when T <= gram_cap, otherwise
    rows are computed on demand and cached under a lock; both storage paths
    return identical values.
    """

    kind = "kernel"

    def __init__(self, signal: Signal, spec: KernelSpec, gram_cap: int = 10_000):
        super().__init__(signal, min_size=1)
        if spec.kind == "chi2" and (signal.data < 0).any():
            raise ValueError("chi2 kernel requires nonnegative data")
        if spec.kind in ("rbf", "chi2") and spec.gamma is None:
            spec = KernelSpec(spec.kind, gamma=self._median_gamma(signal, spec.kind),
                              const=spec.const, deg=spec.deg)
        self.spec = spec
        self.kind = f"kernel_{'poly' if spec.kind == 'polynomial' else spec.kind}"
        self._Y = signal.data
        self._diag_prefix = _prefix(self._diag())
        self._lock = threading.Lock()
        self._rows: dict[int, np.ndarray] | None = None
        self._gram: np.ndarray | None = None
        if signal.T <= gram_cap:
            self._gram = np.stack([self._krow(t) for t in range(signal.T)])
        else:
            self._rows = {}

    @staticmethod
    def _median_gamma(signal: Signal, kind: str) -> float:
        # Median heuristic on an evenly spaced subsample; deterministic.
        idx = np.unique(np.linspace(0, signal.T - 1, min(signal.T, 256)).astype(int))
        Y = signal.data[idx]
        diff = Y[:, None, :] - Y[None, :, :]
        if kind == "chi2":
            den = Y[:, None, :] + Y[None, :, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                dist = np.where(den > 0, diff * diff / den, 0.0).sum(axis=2)
        else:
            dist = np.sum(diff * diff, axis=2)
        med = float(np.median(dist[np.triu_indices(len(idx), k=1)])) if len(idx) > 1 else 0.0
        return 1.0 / med if med > 0 else 1.0

    def _diag(self) -> np.ndarray:
        Y = self._Y
        if self.spec.kind == "linear":
            return np.sum(Y * Y, axis=1)
        if self.spec.kind == "polynomial":
            return (np.sum(Y * Y, axis=1) + self.spec.const) ** self.spec.deg
        return np.ones(len(Y))  # rbf and chi2: k(x, x) = 1

    def _krow(self, t: int) -> np.ndarray:
        Y, spec = self._Y, self.spec
        if spec.kind == "linear":
            return Y @ Y[t]
        if spec.kind == "polynomial":
            return (Y @ Y[t] + spec.const) ** spec.deg
        if spec.kind == "rbf":
            diff = Y - Y[t]
            return np.exp(-spec.gamma * np.sum(diff * diff, axis=1))
        diff = (Y - Y[t]) ** 2
        den = Y + Y[t]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(den > 0, diff / den, 0.0)
        return np.exp(-spec.gamma * terms.sum(axis=1))

    def _block(self, a: int, b: int) -> np.ndarray:
        if self._gram is not None:
            return np.ascontiguousarray(self._gram[a:b, a:b])
        with self._lock:
            rows = []
            for t in range(a, b):
                row = self._rows.get(t)
                if row is None:
                    row = self._krow(t)
                    self._rows[t] = row
                rows.append(row[a:b])
        return np.stack(rows)

    def _one(self, a, b):
        n = float(b - a)
        diag = self._diag_prefix[b] - self._diag_prefix[a]
        return float(diag - np.sum(self._block(a, b)) / n)


def _prefix(values: np.ndarray) -> np.ndarray:
    """Cumulative sums with a leading zero row, so prefix[b] - prefix[a]
    aggregates rows a .. b-1."""
    out = np.zeros((len(values) + 1,) + values.shape[1:])
    np.cumsum(values, axis=0, out=out[1:])
    return out


def fit(kind: str, signal, *, covariates=None, order=None, metric=None,
        gamma=None, const=1.0, deg=2, gram_cap=10_000, regularize=True) -> CostModel:
    """Build the cost evaluator named by `kind` for a signal.

    Extra state is per kind: Covariates for the linear costs, the lag order
    for "ar", a PSD metric matrix for "mahalanobis", kernel parameters for
    the kernel costs.
    """
    signal = as_signal(signal)
    if kind == "l2":
        return L2Cost(signal)
    if kind == "normal":
        return SigmaCost(signal, regularize=regularize)
    if kind == "poisson":
        return PoissonCost(signal)
    if kind in ("linear", "linear_l1"):
        if covariates is None:
            raise ValueError(f"{kind} cost requires covariates")
        if not isinstance(covariates, Covariates):
            covariates = Covariates(covariates)
        cls = LinearCost if kind == "linear" else LinearL1Cost
        return cls(signal, covariates)
    if kind == "ar":
        if order is None:
            raise ValueError("ar cost requires the lag order")
        return ARCost(signal, order)
    if kind == "mahalanobis":
        if metric is None:
            raise ValueError("mahalanobis cost requires a metric matrix")
        return MahalanobisCost(signal, metric)
    if kind == "rank":
        return RankCost(signal)
    if kind == "ecdf":
        return EcdfCost(signal)
    if kind.startswith("kernel_"):
        name = kind[len("kernel_"):]
        name = "polynomial" if name == "poly" else name
        spec = KernelSpec(name, gamma=gamma, const=const, deg=deg)
        return KernelCost(signal, spec, gram_cap=gram_cap)
    raise ValueError(f"unknown cost kind {kind!r}, expected one of {COST_KINDS}")


def sum_of_costs(cost: CostModel, seg: Segmentation) -> float:
    """Total cost of a segmentation: the sum of per-segment costs."""
    bounds = np.fromiter(seg.bkps, dtype=np.int64)
    starts = np.concatenate(([0], bounds[:-1]))
    return float(np.sum(cost.eval_batch(starts, bounds)))
