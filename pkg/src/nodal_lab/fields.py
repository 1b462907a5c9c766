"""Evaluable planar fields.

Every field the lab measures is a real function on R^2 that can be sampled
pointwise and on tensor grids. Eigenfunctions, their Planck windows and
Gaussian samples are all finite plane-wave sums and share
:class:`PlaneWaveField`; analytic test fields (linear, constant) are wrapped in
:class:`FunctionField`.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np

TWO_PI = 2.0 * math.pi

# Rows of a grid evaluated per matmul; bounds the complex work buffer.
GRID_STRIP = 1024
POINT_CHUNK = 4096
GRADIENT_STEP = 1e-6


class Field(ABC):
    """Abstract base class for real scalar fields on R^2."""

    @abstractmethod
    def values(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        """Evaluate at broadcastable coordinate arrays.

        Args:
            y1: First coordinates
            y2: Second coordinates

        Returns:
            Real array with the broadcast shape of ``y1`` and ``y2``
        """
        pass

    def gradient(self, y1: np.ndarray, y2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Central-difference gradient; subclasses with a closed form override it."""
        b1, b2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        h = GRADIENT_STEP
        g1 = (self.values(b1 + h, b2) - self.values(b1 - h, b2)) / (2.0 * h)
        g2 = (self.values(b1, b2 + h) - self.values(b1, b2 - h)) / (2.0 * h)
        return np.asarray(g1, dtype=float), np.asarray(g2, dtype=float)

    @property
    def gradient_bound(self) -> float | None:
        """Upper bound for sup |grad f| over R^2, if one is known."""
        return None

    @property
    def hessian_bound(self) -> float | None:
        """Upper bound for the operator norm of the Hessian over R^2, if one is known."""
        return None

    def __call__(self, y1: float, y2: float) -> float:
        return float(self.values(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)))

    def grid(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Values on the tensor grid, ``G[i, j] = f(xs[i], ys[j])``."""
        g1, g2 = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
        return np.asarray(self.values(g1, g2), dtype=float)


class FunctionField(Field):
    """A field given by a vectorised callable ``func(y1, y2)``."""

    def __init__(
        self,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        gradient_bound: float | None = None,
    ):
        self.func = func
        self._gradient_bound = gradient_bound

    def values(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        out = np.asarray(self.func(y1, y2), dtype=float)
        return np.broadcast_to(out, np.broadcast_shapes(np.shape(y1), np.shape(y2)))

    @property
    def gradient_bound(self) -> float | None:
        return self._gradient_bound


class PlaneWaveField(Field):
    """f(y) = Re sum_k c_k e(<k, y>) with e(t) = exp(2 pi i t).

    Hermitian-symmetric sums are stored as one representative per pair with the
    amplitude doubled, which gives the same real part with half the terms.
    """

    def __init__(self, frequencies: np.ndarray, amplitudes: np.ndarray):
        freqs = np.asarray(frequencies, dtype=float).reshape(-1, 2)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if len(freqs) != len(amps):
            raise ValueError(
                f"{len(freqs)} frequencies but {len(amps)} amplitudes"
            )
        self.frequencies = freqs
        self.amplitudes = amps

    def __len__(self) -> int:
        return len(self.amplitudes)

    def _phases(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        return np.exp(
            1j
            * TWO_PI
            * (y1[:, None] * self.frequencies[:, 0] + y2[:, None] * self.frequencies[:, 1])
        )

    def values(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        b1, b2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        flat1, flat2 = b1.ravel(), b2.ravel()
        out = np.empty(flat1.shape)
        for s in range(0, len(flat1), POINT_CHUNK):
            e = slice(s, s + POINT_CHUNK)
            out[e] = (self._phases(flat1[e], flat2[e]) @ self.amplitudes).real
        return out.reshape(b1.shape)

    def gradient(self, y1: np.ndarray, y2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Analytic gradient, ``Re sum_k c_k 2 pi i k e(<k, y>)``."""
        b1, b2 = np.broadcast_arrays(np.asarray(y1, float), np.asarray(y2, float))
        flat1, flat2 = b1.ravel(), b2.ravel()
        g1 = np.empty(flat1.shape)
        g2 = np.empty(flat1.shape)
        weights = 1j * TWO_PI * self.amplitudes
        for s in range(0, len(flat1), POINT_CHUNK):
            e = slice(s, s + POINT_CHUNK)
            ph = self._phases(flat1[e], flat2[e])
            g1[e] = (ph @ (weights * self.frequencies[:, 0])).real
            g2[e] = (ph @ (weights * self.frequencies[:, 1])).real
        return g1.reshape(b1.shape), g2.reshape(b1.shape)

    def grid(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        # Separable: e(<k, y>) = e(k1 x) e(k2 y), so G = Re(U diag(c) V^T).
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        v = np.exp(1j * TWO_PI * np.outer(ys, self.frequencies[:, 1]))
        out = np.empty((len(xs), len(ys)))
        for s in range(0, len(xs), GRID_STRIP):
            u = np.exp(1j * TWO_PI * np.outer(xs[s : s + GRID_STRIP], self.frequencies[:, 0]))
            out[s : s + GRID_STRIP] = ((u * self.amplitudes) @ v.T).real
        return out

    @property
    def sup_bound(self) -> float:
        return float(np.abs(self.amplitudes).sum())

    @property
    def gradient_bound(self) -> float:
        """Bernstein-type bound ``2 pi sum_k |c_k| |k|``."""
        return float(TWO_PI * np.sum(np.abs(self.amplitudes) * np.hypot(*self.frequencies.T)))

    @property
    def hessian_bound(self) -> float:
        """``4 pi^2 sum_k |c_k| |k|^2``."""
        sq = np.sum(self.frequencies**2, axis=1)
        return float(TWO_PI**2 * np.sum(np.abs(self.amplitudes) * sq))

    def translate(self, tau: tuple[float, float]) -> "PlaneWaveField":
        """The field ``y -> f(y + tau)``."""
        shift = np.exp(1j * TWO_PI * (self.frequencies @ np.asarray(tau, dtype=float)))
        return PlaneWaveField(self.frequencies, self.amplitudes * shift)

    def affine(self, center: tuple[float, float], scale: float) -> "PlaneWaveField":
        """The field ``y -> f(center + scale * y)``."""
        shifted = self.translate(center)
        return PlaneWaveField(scale * self.frequencies, shifted.amplitudes)

    def rotate90(self) -> "PlaneWaveField":
        """The field ``(y1, y2) -> f(-y2, y1)``."""
        rotated = np.column_stack([self.frequencies[:, 1], -self.frequencies[:, 0]])
        return PlaneWaveField(rotated, self.amplitudes)
