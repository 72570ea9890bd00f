"""Bilinear-quadratic saddles (mu_x/2)||x||^2 + y'(Ax - b) - (mu_y/2)||y||^2."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError
from .base import BallDomain, MinimaxConstants, MinimaxProblem, SampleSet


@dataclass(frozen=True)
class BilinearStructure:
    """Shape and moduli needed to decode samples and solve the family exactly."""

    dim_x: int
    dim_y: int
    mu_x: float
    mu_y: float
    matrix_bound: float
    offset_bound: float

    def decode(self, samples: SampleSet) -> tuple[np.ndarray, np.ndarray]:
        """Return the stacked matrices (n, d_y, d_x) and offsets (n, d_y)."""
        split = self.dim_x * self.dim_y
        matrices = samples.data[:, :split].reshape(-1, self.dim_y, self.dim_x)
        return matrices, samples.data[:, split:]

    def means(self, samples: SampleSet) -> tuple[np.ndarray, np.ndarray]:
        matrices, offsets = self.decode(samples)
        return matrices.mean(axis=0), offsets.mean(axis=0)


def encode_bilinear_samples(matrices: np.ndarray, offsets: np.ndarray) -> SampleSet:
    """Flatten per-sample (A_i, b_i) pairs into rows [vec(A_i), b_i]."""
    matrices = np.asarray(matrices, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if matrices.ndim != 3:
        raise ArgumentError(f"Expected a stack of matrices (n, d_y, d_x), got {matrices.shape}")
    n, dim_y, _ = matrices.shape
    if offsets.ndim == 1:
        offsets = offsets.reshape(1, -1) if n == 1 else offsets.reshape(-1, 1)
    if offsets.shape != (n, dim_y):
        raise ArgumentError(f"Offsets must have shape ({n}, {dim_y}), got {offsets.shape}")
    return SampleSet(np.hstack([matrices.reshape(n, -1), offsets]))


def make_bilinear_saddle_problem(
    matrices: np.ndarray,
    offsets: np.ndarray,
    mu_x: float,
    mu_y: float,
    domain_x: BallDomain,
    domain_y: BallDomain,
    matrix_bound: Optional[float] = None,
    offset_bound: Optional[float] = None,
) -> MinimaxProblem:
    """
    Build the bilinear-quadratic finite-sum saddle problem.

    Args:
        matrices: Per-sample A_i, shape (n, d_y, d_x)
        offsets: Per-sample b_i, shape (n, d_y)
        mu_x: Strong convexity in x (0 for convex-concave)
        mu_y: Strong concavity in y (0 for convex-concave)
        domain_x: Ball for x
        domain_y: Ball for y
        matrix_bound: Certified bound on ||A_i||_2; defaults to the largest observed
        offset_bound: Certified bound on ||b_i||; defaults to the largest observed

    Returns:
        MinimaxProblem with constants derived from the matrix and offset bounds

    Raises:
        ArgumentError: On shape mismatches or negative moduli
    """
    if mu_x < 0 or mu_y < 0:
        raise ArgumentError("Bilinear moduli must be non-negative")
    samples = encode_bilinear_samples(matrices, offsets)
    matrices = np.asarray(matrices, dtype=float)
    offsets = samples.data[:, matrices.shape[1] * matrices.shape[2]:]
    _, dim_y, dim_x = matrices.shape
    if domain_x.dimension != dim_x or domain_y.dimension != dim_y:
        raise ArgumentError(
            f"Domains ({domain_x.dimension}, {domain_y.dimension}) do not match "
            f"matrix shape ({dim_y}, {dim_x})"
        )
    observed_matrix = float(np.max(np.linalg.norm(matrices, ord=2, axis=(1, 2))))
    observed_offset = float(np.max(np.linalg.norm(offsets, axis=1)))
    if matrix_bound is None:
        matrix_bound = observed_matrix
    elif observed_matrix > matrix_bound * (1.0 + 1e-12):
        raise ArgumentError(f"A sample matrix exceeds the declared bound {matrix_bound}")
    if offset_bound is None:
        offset_bound = observed_offset
    elif observed_offset > offset_bound * (1.0 + 1e-12):
        raise ArgumentError(f"A sample offset exceeds the declared bound {offset_bound}")

    bound_x, bound_y = domain_x.norm_bound, domain_y.norm_bound
    grad_x_bound = mu_x * bound_x + matrix_bound * bound_y
    grad_y_bound = matrix_bound * bound_x + offset_bound + mu_y * bound_y
    lipschitz = float(np.hypot(grad_x_bound, grad_y_bound))
    smoothness = max(mu_x, mu_y) + matrix_bound
    if lipschitz == 0.0 or smoothness == 0.0:
        raise ArgumentError("A bilinear problem with all-zero data and moduli is degenerate")

    split = dim_x * dim_y

    def unpack(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return xi[:split].reshape(dim_y, dim_x), xi[split:]

    def value(x: np.ndarray, y: np.ndarray, xi: np.ndarray) -> float:
        a, b = unpack(xi)
        return float(0.5 * mu_x * (x @ x) + y @ (a @ x - b) - 0.5 * mu_y * (y @ y))

    def grad_x(x: np.ndarray, y: np.ndarray, xi: np.ndarray) -> np.ndarray:
        a, _ = unpack(xi)
        return mu_x * x + a.T @ y

    def grad_y(x: np.ndarray, y: np.ndarray, xi: np.ndarray) -> np.ndarray:
        a, b = unpack(xi)
        return a @ x - b - mu_y * y

    def batch_value(x: np.ndarray, y: np.ndarray, data: np.ndarray) -> np.ndarray:
        stack = data[:, :split].reshape(-1, dim_y, dim_x)
        residual = stack @ x - data[:, split:]
        return 0.5 * mu_x * float(x @ x) + residual @ y - 0.5 * mu_y * float(y @ y)

    def batch_grad(
        x: np.ndarray, y: np.ndarray, data: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        stack = data[:, :split].reshape(-1, dim_y, dim_x)
        gx = np.einsum("nij,i->nj", stack, y) + mu_x * x
        gy = stack @ x - data[:, split:] - mu_y * y
        return gx, gy

    return MinimaxProblem(
        samples=samples,
        value=value,
        grad_x=grad_x,
        grad_y=grad_y,
        domain_x=domain_x,
        domain_y=domain_y,
        constants=MinimaxConstants(
            lipschitz=lipschitz, smoothness=smoothness, mu_x=mu_x, mu_y=mu_y
        ),
        family="bilinear",
        structure=BilinearStructure(
            dim_x=dim_x,
            dim_y=dim_y,
            mu_x=mu_x,
            mu_y=mu_y,
            matrix_bound=float(matrix_bound),
            offset_bound=float(offset_bound),
        ),
        batch_value=batch_value,
        batch_grad=batch_grad,
    )
