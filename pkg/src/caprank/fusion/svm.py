"""Linear SVM classification and epsilon-insensitive regression.

Both tasks share one equality-constrained dual

    minimize 0.5 v'Kv - c'v + eps * sum(|v_i|)   subject to  l <= v <= u,
                                                             sum(v) = 0

over the linear Gram matrix K = X X'.  Classification uses v_i = y_i a_i,
c = y (labels in {-1,+1}), eps = 0, boxes [0,C] / [-C,0]; regression uses
c = y, eps > 0, boxes [-C,C].  The sum(v) = 0 constraint is the dual of an
unregularized bias, so constant-label regression recovers the constant
exactly.  Updates move two coordinates at a time (one up, one down), each
step solving the two-coordinate subproblem exactly, which makes the recorded
dual objective non-increasing by construction.  The bias falls out of the
KKT interval midpoint at convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin

from ..store import BINARY_CLASSIFICATION, REGRESSION, DimMismatch
from .standardize import FeatureStandardizer, as_float_matrix, as_float_vector


class SingleClassInput(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SvmHyperparams:
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-4
    max_epochs: int = 1000
    seed: int = 0


@dataclass(slots=True)
class LinearModel:
    task: str
    weights: np.ndarray  # float64, standardized feature space
    bias: float
    standardizer: FeatureStandardizer | None
    hyperparams: SvmHyperparams
    objective_trace: list[float] = field(default_factory=list)
    epochs: int = 0


@njit(cache=True, nogil=True)
def _delta_objective(eta, gdiff, eps, vp, vq, d):
    return (
        0.5 * eta * d * d
        + gdiff * d
        + eps * (abs(vp + d) - abs(vp))
        + eps * (abs(vq - d) - abs(vq))
    )


@njit(cache=True, nogil=True)
def _sweep(K, G, v, c, lo, hi, eps, order):
    """One epoch over `order`; returns (max violation, dual objective)."""
    n = v.shape[0]
    max_viol = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        du_i = G[i] + (eps if v[i] >= 0.0 else -eps)
        dd_i = G[i] + (eps if v[i] > 0.0 else -eps)
        can_up_i = v[i] < hi[i]
        can_dn_i = v[i] > lo[i]

        best_dn_val = -np.inf  # partner to move down
        best_dn_j = -1
        best_up_val = np.inf  # partner to move up
        best_up_j = -1
        for j in range(n):
            if j == i:
                continue
            if v[j] > lo[j]:
                val = G[j] + (eps if v[j] > 0.0 else -eps)
                if val > best_dn_val:
                    best_dn_val = val
                    best_dn_j = j
            if v[j] < hi[j]:
                val = G[j] + (eps if v[j] >= 0.0 else -eps)
                if val < best_up_val:
                    best_up_val = val
                    best_up_j = j

        viol_a = best_dn_val - du_i if (can_up_i and best_dn_j >= 0) else -np.inf
        viol_b = dd_i - best_up_val if (can_dn_i and best_up_j >= 0) else -np.inf
        if viol_a >= viol_b:
            viol, p, q = viol_a, i, best_dn_j
        else:
            viol, p, q = viol_b, best_up_j, i
        if viol <= 0.0:
            continue
        if viol > max_viol:
            max_viol = viol

        lo_d = max(lo[p] - v[p], v[q] - hi[q])
        hi_d = min(hi[p] - v[p], v[q] - lo[q])
        if hi_d <= lo_d:
            continue
        eta = K[p, p] + K[q, q] - 2.0 * K[p, q]
        gdiff = G[p] - G[q]
        best_d = 0.0
        best_f = 0.0
        # candidates: box ends, |v| breakpoints, per-sign-segment minimizers
        for k in range(8):
            if k == 0:
                d = lo_d
            elif k == 1:
                d = hi_d
            elif k == 2:
                d = -v[p]
            elif k == 3:
                d = v[q]
            elif eta > 0.0:
                si = 1.0 if (k - 4) // 2 == 0 else -1.0
                sj = 1.0 if (k - 4) % 2 == 0 else -1.0
                d = -(gdiff + eps * (si - sj)) / eta
            else:
                continue
            if d < lo_d:
                d = lo_d
            elif d > hi_d:
                d = hi_d
            f = _delta_objective(eta, gdiff, eps, v[p], v[q], d)
            if f < best_f:
                best_f = f
                best_d = d
        if best_d == 0.0:
            continue
        # Land exactly on whichever wall or |v| kink the step was chosen to
        # hit.  A coordinate left an ulp shy of its bound by subtraction
        # round-off keeps advertising a violation that no feasible step can
        # reduce, which livelocks the whole sweep on that coordinate.
        old_p = v[p]
        old_q = v[q]
        if best_d > 0.0:
            if best_d == hi[p] - old_p:
                v[p] = hi[p]
            elif best_d == -old_p:
                v[p] = 0.0
            else:
                v[p] = old_p + best_d
            if best_d == old_q - lo[q]:
                v[q] = lo[q]
            elif best_d == old_q:
                v[q] = 0.0
            else:
                v[q] = old_q - best_d
        else:
            if best_d == lo[p] - old_p:
                v[p] = lo[p]
            elif best_d == -old_p:
                v[p] = 0.0
            else:
                v[p] = old_p + best_d
            if best_d == old_q - hi[q]:
                v[q] = hi[q]
            elif best_d == old_q:
                v[q] = 0.0
            else:
                v[q] = old_q - best_d
        if v[p] < lo[p]:
            v[p] = lo[p]
        elif v[p] > hi[p]:
            v[p] = hi[p]
        if v[q] < lo[q]:
            v[q] = lo[q]
        elif v[q] > hi[q]:
            v[q] = hi[q]
        dp = v[p] - old_p
        dq = v[q] - old_q
        for j in range(n):
            G[j] += dp * K[p, j] + dq * K[q, j]

    obj = 0.0
    for j in range(n):
        obj += 0.5 * v[j] * (G[j] - c[j]) + eps * abs(v[j])
    return max_viol, obj


def _solve_box_dual(
    X: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    eps: float,
    hp: SvmHyperparams,
) -> tuple[np.ndarray, float, list[float], int]:
    """Run epochs of two-coordinate descent; returns (v, bias, trace, epochs)."""
    n = X.shape[0]
    K = np.ascontiguousarray(X @ X.T)
    v = np.zeros(n)
    G = -c.copy()  # G = Kv - c at v = 0
    rng = np.random.default_rng(hp.seed)
    trace: list[float] = []
    epochs = 0
    for _ in range(hp.max_epochs):
        order = np.ascontiguousarray(rng.permutation(n))
        max_viol, obj = _sweep(K, G, v, c, lo, hi, eps, order)
        epochs += 1
        trace.append(float(obj))
        if max_viol < hp.tol:
            break
        G = K @ v - c  # fresh gradient: bounds within-epoch float drift

    G = K @ v - c
    up_vals = G + np.where(v >= 0.0, eps, -eps)
    dn_vals = G + np.where(v > 0.0, eps, -eps)
    can_up = v < hi
    can_dn = v > lo
    m = up_vals[can_up].min() if can_up.any() else np.inf
    M = dn_vals[can_dn].max() if can_dn.any() else -np.inf
    if np.isinf(m) and np.isinf(M):
        bias = 0.0
    elif np.isinf(m):
        bias = -M
    elif np.isinf(M):
        bias = -m
    else:
        bias = -(m + M) / 2.0
    return v, float(bias), trace, epochs


def train_classifier(
    X,
    y,
    hp: SvmHyperparams = SvmHyperparams(),
    standardizer: FeatureStandardizer | None = None,
) -> LinearModel:
    """L2-regularized hinge-loss linear classifier on labels {0,1}."""
    X = as_float_matrix(X)
    y = as_float_vector(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    signs = np.where(y > 0.5, 1.0, -1.0)
    if signs.min() == signs.max():
        raise SingleClassInput("training data contains a single class")
    lo = np.where(signs > 0, 0.0, -hp.C)
    hi = np.where(signs > 0, hp.C, 0.0)
    v, bias, trace, epochs = _solve_box_dual(X, signs.copy(), lo, hi, 0.0, hp)
    weights = X.T @ v
    return LinearModel(BINARY_CLASSIFICATION, weights, bias, standardizer, hp, trace, epochs)


def train_regressor(
    X,
    y,
    hp: SvmHyperparams = SvmHyperparams(),
    standardizer: FeatureStandardizer | None = None,
) -> LinearModel:
    """Linear epsilon-insensitive support vector regression."""
    X = as_float_matrix(X)
    y = as_float_vector(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise ValueError("regression needs at least two examples")
    n = X.shape[0]
    lo = np.full(n, -hp.C)
    hi = np.full(n, hp.C)
    v, bias, trace, epochs = _solve_box_dual(X, y.copy(), lo, hi, hp.epsilon, hp)
    weights = X.T @ v
    return LinearModel(REGRESSION, weights, bias, standardizer, hp, trace, epochs)


def _standardized(model: LinearModel, X: np.ndarray) -> np.ndarray:
    if model.standardizer is not None:
        return model.standardizer.transform(X)
    return X


def predict_many(model: LinearModel, X) -> np.ndarray:
    X = as_float_matrix(X)
    if X.shape[1] != model.weights.shape[0]:
        raise DimMismatch(
            f"model expects {model.weights.shape[0]} features, got {X.shape[1]}"
        )
    return _standardized(model, X) @ model.weights + model.bias


def predict(model: LinearModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector")
    return float(predict_many(model, x[None, :])[0])


class LinearHingeSVC(BaseEstimator):
    """Hinge-loss linear classifier with a deterministic dual solver.

    Rows are used as given; pair a FeatureStandardizer in front when features
    are on uneven scales.
    """

    def __init__(self, C=1.0, tol=1e-4, max_epochs=1000, seed=0):
        self.C = C
        self.tol = tol
        self.max_epochs = max_epochs
        self.seed = seed

    def _hp(self) -> SvmHyperparams:
        return SvmHyperparams(
            C=self.C, tol=self.tol, max_epochs=self.max_epochs, seed=self.seed
        )

    def fit(self, X, y):
        self.model_ = train_classifier(X, y, self._hp())
        self.n_features_in_ = self.model_.weights.shape[0]
        return self

    def decision_function(self, X):
        return predict_many(self.model_, X)

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(np.float64)


class LinearEpsilonSVR(BaseEstimator, RegressorMixin):
    """Epsilon-insensitive linear regressor with the same solver."""

    def __init__(self, C=1.0, epsilon=0.1, tol=1e-4, max_epochs=1000, seed=0):
        self.C = C
        self.epsilon = epsilon
        self.tol = tol
        self.max_epochs = max_epochs
        self.seed = seed

    def _hp(self) -> SvmHyperparams:
        return SvmHyperparams(
            C=self.C,
            epsilon=self.epsilon,
            tol=self.tol,
            max_epochs=self.max_epochs,
            seed=self.seed,
        )

    def fit(self, X, y):
        self.model_ = train_regressor(X, y, self._hp())
        self.n_features_in_ = self.model_.weights.shape[0]
        return self

    def predict(self, X):
        return predict_many(self.model_, X)
