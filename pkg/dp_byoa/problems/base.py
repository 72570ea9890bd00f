"""Datasets, ball domains and finite-sum problem descriptors."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional, Union

import numpy as np

from ..exceptions import ArgumentError


logger = logging.getLogger(__name__)

# A point within this relative slack of the radius counts as inside; keeps projection idempotent.
_RADIUS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An ordered, immutable collection of equally sized sample vectors."""

    data: np.ndarray
    indices: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.ndim != 2:
            raise ArgumentError(f"Samples must form a 2-D array, got shape {data.shape}")
        if data.shape[0] < 1:
            raise ArgumentError("A sample set needs at least one sample")
        if data.shape[1] < 1:
            raise ArgumentError("Samples must have positive dimension")
        if self.indices is None:
            indices = np.arange(data.shape[0])
        else:
            indices = np.array(self.indices, dtype=int, copy=True)
            if indices.shape != (data.shape[0],):
                raise ArgumentError("One original index is required per sample")
        data.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "indices", indices)

    @property
    def size(self) -> int:
        """Number of samples n."""
        return int(self.data.shape[0])

    @property
    def dimension(self) -> int:
        """Length p of every sample vector."""
        return int(self.data.shape[1])

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> np.ndarray:
        return self.data[i]

    def block(self, start: int, stop: int) -> "SampleSet":
        """Return the contiguous block [start, stop) keeping original indices."""
        return SampleSet(self.data[start:stop], self.indices[start:stop])

    def replace(self, i: int, sample: np.ndarray) -> "SampleSet":
        """
        Build the neighbouring dataset that swaps sample i for a new one.

        Args:
            i: Position of the sample to swap out
            sample: Replacement vector of the same dimension

        Returns:
            A new SampleSet differing from this one in exactly position i
        """
        sample = np.asarray(sample, dtype=float).reshape(-1)
        if sample.shape[0] != self.dimension:
            raise ArgumentError(
                f"Replacement sample has dimension {sample.shape[0]}, expected {self.dimension}"
            )
        data = self.data.copy()
        data[i] = sample
        return SampleSet(data, self.indices)

    def mean(self) -> np.ndarray:
        return self.data.mean(axis=0)


@dataclass(frozen=True, eq=False)
class BallDomain:
    """Closed Euclidean ball {z : ||z - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        center = np.array(self.center, dtype=float, copy=True).reshape(-1)
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ArgumentError(f"Ball radius must be positive, got {self.radius}")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def centered(cls, dimension: int, radius: float) -> "BallDomain":
        """Ball of the given radius around the origin."""
        if dimension < 1:
            raise ArgumentError(f"Dimension must be positive, got {dimension}")
        return cls(np.zeros(dimension), radius)

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    @property
    def norm_bound(self) -> float:
        """Upper bound on ||z|| over the ball."""
        return float(np.linalg.norm(self.center)) + self.radius

    def check_point(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float).reshape(-1)
        if point.shape[0] != self.dimension:
            raise ArgumentError(
                f"Point has dimension {point.shape[0]}, domain has dimension {self.dimension}"
            )
        return point

    def contains(self, point: np.ndarray, tol: float = 1e-9) -> bool:
        point = self.check_point(point)
        return bool(np.linalg.norm(point - self.center) <= self.radius * (1.0 + tol))

    def project(self, point: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the ball."""
        point = self.check_point(point)
        offset = point - self.center
        distance = float(np.linalg.norm(offset))
        if distance <= self.radius * (1.0 + _RADIUS_SLACK):
            return point.copy()
        return self.center + (self.radius / distance) * offset


def project(domain: BallDomain, point: np.ndarray) -> np.ndarray:
    """
    Project a point onto a ball domain.

    Args:
        domain: Target ball
        point: Point of the domain's dimension

    Returns:
        The point itself when inside, otherwise center + D (point - center)/||point - center||

    Raises:
        ArgumentError: If the dimensions differ
    """
    return domain.project(point)


def sample_in_ball(domain: BallDomain, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` points uniformly from the ball, shape (size, dimension)."""
    d = domain.dimension
    directions = rng.standard_normal((size, d))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    radii = domain.radius * rng.random((size, 1)) ** (1.0 / d)
    return domain.center + radii * directions / norms


@dataclass(frozen=True)
class MinConstants:
    """Certified constants of a per-sample loss: L-Lipschitz, l-smooth, mu-strongly convex."""

    lipschitz: float
    smoothness: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        if self.lipschitz <= 0 or self.smoothness <= 0:
            raise ArgumentError("Lipschitz and smoothness constants must be positive")
        if self.mu < 0:
            raise ArgumentError(f"Strong convexity modulus must be non-negative, got {self.mu}")


@dataclass(frozen=True)
class MinimaxConstants:
    """Certified constants of a per-sample convex-concave function."""

    lipschitz: float
    smoothness: float
    mu_x: float = 0.0
    mu_y: float = 0.0

    def __post_init__(self) -> None:
        if self.lipschitz <= 0 or self.smoothness <= 0:
            raise ArgumentError("Lipschitz and smoothness constants must be positive")
        if self.mu_x < 0 or self.mu_y < 0:
            raise ArgumentError("Strong convexity/concavity moduli must be non-negative")

    @property
    def mu(self) -> float:
        return min(self.mu_x, self.mu_y)


LossOracle = Callable[[np.ndarray, np.ndarray], float]
GradOracle = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class MinProblem:
    """Finite-sum minimization problem (1/n) sum_i f(x; xi_i) over a ball."""

    samples: SampleSet
    loss: LossOracle
    grad: GradOracle
    domain: BallDomain
    constants: MinConstants
    family: str = "custom"
    structure: Any = None
    batch_loss: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    batch_grad: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def restrict(self, samples: SampleSet) -> "MinProblem":
        """Same loss and constants over another sample set (e.g. a phase block)."""
        return replace(self, samples=samples)

    def sample_losses(self, x: np.ndarray) -> np.ndarray:
        if self.batch_loss is not None:
            return np.asarray(self.batch_loss(x, self.samples.data), dtype=float)
        return np.array([self.loss(x, xi) for xi in self.samples.data])

    def sample_grads(self, x: np.ndarray) -> np.ndarray:
        if self.batch_grad is not None:
            return np.asarray(self.batch_grad(x, self.samples.data), dtype=float)
        return np.array([self.grad(x, xi) for xi in self.samples.data])


@dataclass(frozen=True, eq=False)
class MinimaxProblem:
    """Finite-sum saddle problem min_x max_y (1/n) sum_i f(x, y; xi_i) over two balls."""

    samples: SampleSet
    value: Callable[[np.ndarray, np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    grad_y: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    domain_x: BallDomain
    domain_y: BallDomain
    constants: MinimaxConstants
    family: str = "custom"
    structure: Any = None
    batch_value: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None
    batch_grad: Optional[
        Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    ] = None

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def dim_x(self) -> int:
        return self.domain_x.dimension

    @property
    def dim_y(self) -> int:
        return self.domain_y.dimension

    @property
    def norm_bound(self) -> float:
        """Common bound D on ||x|| and ||y|| over both domains."""
        return max(self.domain_x.norm_bound, self.domain_y.norm_bound)

    def restrict(self, samples: SampleSet) -> "MinimaxProblem":
        return replace(self, samples=samples)

    def sample_values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.batch_value is not None:
            return np.asarray(self.batch_value(x, y, self.samples.data), dtype=float)
        return np.array([self.value(x, y, xi) for xi in self.samples.data])

    def sample_grads(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.batch_grad is not None:
            gx, gy = self.batch_grad(x, y, self.samples.data)
            return np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
        gx = np.array([self.grad_x(x, y, xi) for xi in self.samples.data])
        gy = np.array([self.grad_y(x, y, xi) for xi in self.samples.data])
        return gx, gy


Problem = Union[MinProblem, MinimaxProblem]


def empirical_value(
    problem: Problem, x: np.ndarray, y: Optional[np.ndarray] = None
) -> float:
    """
    Empirical objective (1/n) sum_i f(.; xi_i).

    Args:
        problem: Minimization or minimax problem
        x: Primal point
        y: Dual point, required for minimax problems

    Returns:
        The arithmetic mean of the per-sample values
    """
    if isinstance(problem, MinimaxProblem):
        if y is None:
            raise ArgumentError("Minimax problems need both x and y")
        x = problem.domain_x.check_point(x)
        y = problem.domain_y.check_point(y)
        return float(np.mean(problem.sample_values(x, y)))
    x = problem.domain.check_point(x)
    return float(np.mean(problem.sample_losses(x)))


def empirical_grad(
    problem: Problem, x: np.ndarray, y: Optional[np.ndarray] = None
) -> Union[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Mean per-sample gradient; a (grad_x, grad_y) pair for minimax problems."""
    if isinstance(problem, MinimaxProblem):
        if y is None:
            raise ArgumentError("Minimax problems need both x and y")
        x = problem.domain_x.check_point(x)
        y = problem.domain_y.check_point(y)
        gx, gy = problem.sample_grads(x, y)
        return gx.mean(axis=0), gy.mean(axis=0)
    x = problem.domain.check_point(x)
    return problem.sample_grads(x).mean(axis=0)


def block_bounds(n: int, k: int) -> list[tuple[int, int]]:
    """Index ranges of K contiguous blocks of size floor(n/K); the remainder joins the last."""
    if k < 1:
        raise ArgumentError(f"Block count must be positive, got {k}")
    if k > n:
        raise ArgumentError(f"Cannot split {n} samples into {k} non-empty blocks")
    size = n // k
    bounds = [(i * size, (i + 1) * size) for i in range(k)]
    bounds[-1] = (bounds[-1][0], n)
    return bounds


def partition_disjoint(samples: SampleSet, k: int) -> list[SampleSet]:
    """
    Split a sample set into K disjoint contiguous blocks.

    Args:
        samples: Dataset to split
        k: Number of blocks

    Returns:
        K blocks of size floor(n/K), the last one also holding the remainder

    Raises:
        ArgumentError: If K > n
    """
    return [samples.block(start, stop) for start, stop in block_bounds(samples.size, k)]


def load_samples(path: Union[str, Path]) -> SampleSet:
    """Read a plain-text matrix: one sample per line, whitespace-separated decimals."""
    path = Path(path)
    try:
        data = np.loadtxt(path, dtype=float, ndmin=2)
    except (OSError, ValueError) as e:
        raise ArgumentError(f"Could not read samples from {path}: {e}") from e
    logger.info(f"Loaded {data.shape[0]} samples of dimension {data.shape[1]} from {path}")
    return SampleSet(data)


def save_samples(samples: SampleSet, path: Union[str, Path]) -> None:
    np.savetxt(Path(path), samples.data, fmt="%.17g")


@dataclass
class ConstantsReport:
    """Violation counts from random probing of certified constants."""

    pairs: int
    lipschitz_violations: int = 0
    smoothness_violations: int = 0
    convexity_violations: int = 0
    details: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.lipschitz_violations == 0
            and self.smoothness_violations == 0
            and self.convexity_violations == 0
        )


def _within(lhs: float, rhs: float, scale: float = 1.0) -> bool:
    return lhs <= rhs * (1.0 + 1e-9) + 1e-12 * max(1.0, scale)


def probe_constants(
    problem: Problem, rng: np.random.Generator, pairs: int = 10_000
) -> ConstantsReport:
    """
    Spot-check the certified constants of a problem on random probe pairs.

    Args:
        problem: Problem whose constants are being checked
        rng: Random stream for probe points and sample choice
        pairs: Number of random probe pairs

    Returns:
        ConstantsReport with per-inequality violation counts
    """
    report = ConstantsReport(pairs=pairs)
    if isinstance(problem, MinimaxProblem):
        _probe_minimax(problem, rng, report)
    else:
        _probe_min(problem, rng, report)
    if not report.ok:
        logger.warning(f"Certified constants violated on {problem.family} problem: {report}")
    return report


def _probe_min(problem: MinProblem, rng: np.random.Generator, report: ConstantsReport) -> None:
    c = problem.constants
    xs1 = sample_in_ball(problem.domain, rng, report.pairs)
    xs2 = sample_in_ball(problem.domain, rng, report.pairs)
    picks = rng.integers(problem.n, size=report.pairs)
    for x1, x2, i in zip(xs1, xs2, picks):
        xi = problem.samples[i]
        dist = float(np.linalg.norm(x1 - x2))
        f1, f2 = problem.loss(x1, xi), problem.loss(x2, xi)
        if not _within(abs(f1 - f2), c.lipschitz * dist, abs(f1)):
            report.lipschitz_violations += 1
        g1, g2 = problem.grad(x1, xi), problem.grad(x2, xi)
        if not _within(float(np.linalg.norm(g1 - g2)), c.smoothness * dist):
            report.smoothness_violations += 1
        if c.mu > 0:
            mid = 0.5 * (x1 + x2)

            def shifted(z: np.ndarray) -> float:
                return problem.loss(z, xi) - 0.5 * c.mu * float(z @ z)

            lhs = shifted(mid)
            rhs = 0.5 * (shifted(x1) + shifted(x2))
            if lhs > rhs + 1e-9 * (1.0 + abs(rhs)):
                report.convexity_violations += 1


def _probe_minimax(
    problem: MinimaxProblem, rng: np.random.Generator, report: ConstantsReport
) -> None:
    c = problem.constants
    xs1 = sample_in_ball(problem.domain_x, rng, report.pairs)
    xs2 = sample_in_ball(problem.domain_x, rng, report.pairs)
    ys1 = sample_in_ball(problem.domain_y, rng, report.pairs)
    ys2 = sample_in_ball(problem.domain_y, rng, report.pairs)
    picks = rng.integers(problem.n, size=report.pairs)
    for x1, x2, y1, y2, i in zip(xs1, xs2, ys1, ys2, picks):
        xi = problem.samples[i]
        dist = float(np.sqrt(np.sum((x1 - x2) ** 2) + np.sum((y1 - y2) ** 2)))
        f1, f2 = problem.value(x1, y1, xi), problem.value(x2, y2, xi)
        if not _within(abs(f1 - f2), c.lipschitz * dist, abs(f1)):
            report.lipschitz_violations += 1
        dgx = problem.grad_x(x1, y1, xi) - problem.grad_x(x2, y2, xi)
        dgy = problem.grad_y(x1, y1, xi) - problem.grad_y(x2, y2, xi)
        if not _within(float(np.sqrt(dgx @ dgx + dgy @ dgy)), c.smoothness * dist):
            report.smoothness_violations += 1
        xm, ym = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
        # convex in x at fixed y1 (after removing mu_x), concave in y at fixed x1
        hx = [problem.value(z, y1, xi) - 0.5 * c.mu_x * float(z @ z) for z in (x1, x2, xm)]
        hy = [problem.value(x1, z, xi) + 0.5 * c.mu_y * float(z @ z) for z in (y1, y2, ym)]
        tol_x = 1e-9 * (1.0 + abs(hx[0]) + abs(hx[1]))
        tol_y = 1e-9 * (1.0 + abs(hy[0]) + abs(hy[1]))
        if hx[2] > 0.5 * (hx[0] + hx[1]) + tol_x or hy[2] < 0.5 * (hy[0] + hy[1]) - tol_y:
            report.convexity_violations += 1
