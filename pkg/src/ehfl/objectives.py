"""Synthetic per-client objectives with exact and stochastic gradient oracles.

Two families are provided: quadratics with per-client optima (analytic global
optimum, known smoothness constant) and synthetic logistic regression with a
label-skew knob for heterogeneity (no closed-form optimum, so distance-based
metrics fall back to loss).  Gradient noise is zero-mean and bounded, with
per-component magnitude at most ``sigma / sqrt(d)``, so the stochastic oracle
has bounded variance by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as streams


class DivergenceError(RuntimeError):
    """Local training produced a non-finite iterate (learning rate too large)."""

    def __init__(self, client_id: int, message: str = ""):
        self.client_id = client_id
        self.epoch: int | None = None
        super().__init__(message or f"client {client_id} diverged during local training")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Declarative description of the objective family for one experiment."""

    kind: str = "quadratic"     # "quadratic" | "logistic"
    dim: int = 2
    curvature: float = 1.0      # quadratic curvature; also its smoothness constant
    spread: float = 1.0         # scale of per-client heterogeneity
    offset: float = 1.0         # common shift of client optima away from the origin
    n_samples: int = 32         # logistic: samples per client
    label_skew: float = 0.5     # logistic: per-client class-balance shift


def smoothness_of(spec: ObjectiveSpec) -> float | None:
    """Known smoothness constant of the family, or None when not analytic."""
    return spec.curvature if spec.kind == "quadratic" else None


class QuadraticObjective:
    """f_i(x) = (curvature / 2) * ||x - c_i||^2 with per-client centers c_i."""

    def __init__(self, centers: np.ndarray, curvature: float, noise_scale: float):
        self.centers = centers
        self.curvature = curvature
        self.noise_scale = noise_scale
        self.dim = centers.shape[1]
        self.n_clients = centers.shape[0]

    @property
    def smoothness(self) -> float:
        return self.curvature

    def local_loss(self, i: int, x: np.ndarray) -> float:
        d = x - self.centers[i]
        return 0.5 * self.curvature * float(d @ d)

    def global_loss(self, x: np.ndarray) -> float:
        d = x[None, :] - self.centers
        return 0.5 * self.curvature * float(np.mean(np.sum(d * d, axis=1)))

    def full_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape {(self.dim,)}, got {x.shape}")
        return self.curvature * (x - self.centers[i])

    def global_optimum(self) -> np.ndarray:
        return self.centers.mean(axis=0)


class LogisticObjective:
    """Per-client logistic regression on synthetic, label-skewed data."""

    def __init__(self, features: np.ndarray, labels: np.ndarray, noise_scale: float):
        # features: (n_clients, m, d); labels: (n_clients, m) in {0, 1}
        self.features = features
        self.labels = labels
        self.noise_scale = noise_scale
        self.n_clients, self.n_samples, self.dim = features.shape

    @property
    def smoothness(self) -> None:
        return None

    def local_loss(self, i: int, x: np.ndarray) -> float:
        z = self.features[i] @ x
        return float(np.mean(np.logaddexp(0.0, z) - self.labels[i] * z))

    def global_loss(self, x: np.ndarray) -> float:
        z = self.features @ x
        return float(np.mean(np.logaddexp(0.0, z) - self.labels * z))

    def full_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape {(self.dim,)}, got {x.shape}")
        z = self.features[i] @ x
        p = 1.0 / (1.0 + np.exp(-z))
        return self.features[i].T @ (p - self.labels[i]) / self.n_samples

    def global_optimum(self) -> None:
        return None


Objective = QuadraticObjective | LogisticObjective


def build_objective(spec: ObjectiveSpec, n_clients: int, sigma: float, seed: int) -> Objective:
    """Materialize the objective for a run; generation is seed-deterministic."""
    gen = streams.stream(seed, streams.OBJECTIVE)
    if spec.kind == "quadratic":
        centers = spec.offset + spec.spread * gen.uniform(-1.0, 1.0, size=(n_clients, spec.dim))
        return QuadraticObjective(centers, spec.curvature, sigma)
    if spec.kind == "logistic":
        feats = gen.standard_normal((n_clients, spec.n_samples, spec.dim))
        base_w = spec.offset * np.ones(spec.dim) / max(1.0, np.sqrt(spec.dim))
        w = base_w[None, :] + spec.spread * gen.uniform(-1.0, 1.0, size=(n_clients, spec.dim))
        bias = spec.label_skew * gen.uniform(-1.0, 1.0, size=(n_clients, 1))
        probs = 1.0 / (1.0 + np.exp(-(np.einsum("nmd,nd->nm", feats, w) + bias)))
        labels = (gen.random((n_clients, spec.n_samples)) < probs).astype(float)
        return LogisticObjective(feats, labels, sigma)
    raise ValueError(f"unknown objective kind: {spec.kind!r}")


def stochastic_gradient(obj: Objective, i: int, x: np.ndarray,
                        gen: np.random.Generator) -> np.ndarray:
    """Unbiased gradient sample; exact when the noise scale is zero."""
    g = obj.full_gradient(i, x)
    if obj.noise_scale == 0.0:
        return g
    bound = obj.noise_scale / np.sqrt(obj.dim)
    return g + gen.uniform(-bound, bound, size=obj.dim)


def local_train(obj: Objective, i: int, x: np.ndarray, gamma: float, n_steps: int,
                gen: np.random.Generator) -> np.ndarray:
    """Run ``n_steps`` stochastic-gradient steps from x and return the net move."""
    y = x
    for _ in range(n_steps):
        y = y - gamma * stochastic_gradient(obj, i, y, gen)
    if not np.all(np.isfinite(y)):
        raise DivergenceError(i)
    return y - x
