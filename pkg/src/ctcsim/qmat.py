"""Dense complex linear algebra and information measures.

Everything downstream (circuits, the fixed-point engine, the discrimination
experiments) is built on the primitives here. One global convention applies
throughout the package: in a tensor product the FIRST factor is the most
significant, i.e. ``kron(a, b)`` has block structure indexed by ``a`` and the
row-major index of ``|i⟩⊗|j⟩`` is ``i * dim_b + j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class ValidationError(ValueError):
    """An input failed matrix validation (shape, hermiticity, trace, ...)."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across the package.

    Attributes:
        hermiticity: max entrywise deviation allowed for M vs M†, and for
            unit trace / unitarity defect checks.
        psd_floor: eigenvalues in [-psd_floor, 0) are treated as zero;
            anything below is an error, never silently repaired.
        fixed_point_residual: acceptance bound on ½‖E(σ)−σ‖₁ for solver
            output.
        eigenvalue_one_window: superoperator eigenvalues within this distance
            of 1 count as the fixed subspace.
    """

    hermiticity: float = 1e-10
    psd_floor: float = 1e-10
    fixed_point_residual: float = 1e-9
    eigenvalue_one_window: float = 1e-9

    def __post_init__(self):
        for name in ("hermiticity", "psd_floor", "fixed_point_residual",
                     "eigenvalue_one_window"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"tolerance {name} must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate`: each violation as (invariant name, magnitude)."""

    kind: str
    violations: tuple[tuple[str, float], ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def message(self) -> str:
        if self.ok:
            return f"valid {self.kind}"
        parts = ", ".join(f"{name} (violation {mag:.3e})"
                          for name, mag in self.violations)
        return f"invalid {self.kind}: {parts}"


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise ValidationError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def kron(*factors) -> np.ndarray:
    """Kronecker product with the first factor most significant.

    ``kron(a, b, c)`` equals ``kron(kron(a, b), c)``; dimensions multiply.
    """
    if not factors:
        raise ValidationError("kron needs at least one factor")
    out = _as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, _as_matrix(f))
    return out


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out all tensor factors not listed in `keep`.

    Args:
        m: square matrix over the full tensor space.
        dims: subsystem dimensions in order, product must match m. Entries
            of 1 are permitted (trivial factors).
        keep: indices of the subsystems to retain; the result keeps them in
            ascending index order. Must be a nonempty subset.

    Returns:
        The reduced matrix on the kept subsystems; trace is preserved.
    """
    a = _as_matrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValidationError("subsystem dimensions must be >= 1")
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise ValidationError(
            f"dims {dims} imply shape ({total}, {total}), got {a.shape}")
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep or any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep must be a nonempty subset of 0..{n - 1}")
    t = a.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out_axes = keep + [i + n for i in keep]
    reduced = np.einsum(t, row + col, out_axes)
    dk = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(dk, dk)


def trace_distance(a, b) -> float:
    """½ Σ|eigenvalues of (a − b)| for equal-dimension Hermitian inputs.

    The difference is Hermitized before the eigendecomposition; this is a
    diagnostic, not a validator.
    """
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValidationError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = (diff + dagger(diff)) / 2
    return float(np.abs(scipy.linalg.eigvalsh(diff)).sum() / 2)


def _clipped_spectrum(rho, floor: float) -> np.ndarray:
    """Eigenvalues with the PSD repair policy applied.

    Values in [-floor, 0) are clipped to 0; anything below -floor raises.
    """
    h = _as_matrix(rho)
    h = (h + dagger(h)) / 2
    lam = scipy.linalg.eigvalsh(h)
    if lam[0] < -floor:
        raise ValidationError(
            f"eigenvalue {lam[0]:.3e} below the PSD floor -{floor:.1e}")
    return np.clip(lam, 0.0, None)


def von_neumann_entropy(rho, tol: Tolerances = DEFAULT_TOL) -> float:
    """−Σ λ log₂ λ in bits, with 0·log 0 = 0."""
    lam = _clipped_spectrum(rho, tol.psd_floor)
    lam = lam[lam > 0]
    return float(-(lam * np.log2(lam)).sum())


def mutual_information(rho_ab, dims, tol: Tolerances = DEFAULT_TOL) -> float:
    """S(A) + S(B) − S(AB) in bits across the bipartition `dims` = (dA, dB).

    Numerical noise may produce tiny negatives; values in [−1e−8, 0) are
    clamped to 0 and anything lower is an error.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise ValidationError("mutual_information needs exactly two subsystems")
    rho_a = partial_trace(rho_ab, dims, keep=[0])
    rho_b = partial_trace(rho_ab, dims, keep=[1])
    mi = (von_neumann_entropy(rho_a, tol) + von_neumann_entropy(rho_b, tol)
          - von_neumann_entropy(rho_ab, tol))
    if mi < -1e-8:
        raise ValidationError(f"mutual information {mi:.3e} below -1e-8")
    return max(mi, 0.0)


def validate(m, kind: str, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    """Check matrix invariants without raising.

    Args:
        m: square matrix.
        kind: "density" (Hermitian, PSD within psd_floor, unit trace) or
            "unitary" (M†M = I within the hermiticity tolerance).

    Returns:
        A ValidationReport listing each violated invariant and its magnitude.
        Malformed input (not square, non-finite entries) is itself reported
        as a violation, never raised.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return ValidationReport(kind, (("square shape", float("nan")),))
    if not np.isfinite(a).all():
        return ValidationReport(kind, (("finite entries", float("nan")),))
    violations: list[tuple[str, float]] = []
    if kind == "density":
        herm = float(np.abs(a - dagger(a)).max())
        if herm > tol.hermiticity:
            violations.append(("hermiticity", herm))
        tr = float(abs(a.trace() - 1.0))
        if tr > tol.hermiticity:
            violations.append(("unit trace", tr))
        lam_min = float(scipy.linalg.eigvalsh((a + dagger(a)) / 2)[0])
        if lam_min < -tol.psd_floor:
            violations.append(("positive semidefinite", -lam_min))
    elif kind == "unitary":
        defect = float(np.abs(dagger(a) @ a - np.eye(a.shape[0])).max())
        if defect > tol.hermiticity:
            violations.append(("unitarity", defect))
    else:
        raise ValidationError(f"unknown validation kind {kind!r}")
    return ValidationReport(kind, tuple(violations))


def require_density(m, tol: Tolerances = DEFAULT_TOL, what: str = "state") -> np.ndarray:
    """Validate as a density matrix, raising ValidationError on failure."""
    a = _as_matrix(m)
    report = validate(a, "density", tol)
    if not report.ok:
        raise ValidationError(f"{what}: {report.message()}")
    return a


def require_unitary(m, tol: Tolerances = DEFAULT_TOL, what: str = "matrix") -> np.ndarray:
    """Validate as a unitary, raising ValidationError on failure."""
    a = _as_matrix(m)
    report = validate(a, "unitary", tol)
    if not report.ok:
        raise ValidationError(f"{what}: {report.message()}")
    return a
