"""Gate-level circuit model, JSON circuit format, and named circuit builders.

A circuit declares two wire registers: causality-respecting (CR) wires first,
then the wires that loop through the time machine (CTC wires). Gates act on
explicitly listed wires; the gate matrix is expressed with the first listed
wire as the most significant tensor factor, matching the package-wide
convention. Gate list order is temporal order, so the compiled unitary is the
reversed matrix product.

The on-disk format is strict JSON:

    { "cr_dims": [int, ...], "ctc_dims": [int, ...],
      "gates": [ { "name": str, "wires": [int, ...],
                   "matrix": [[[re, im], ...], ...] } ... ] }

Matrices are row-major arrays of [re, im] pairs. The builtin names "swap",
"h", "x" and "cnot" may omit "matrix"; unknown names must carry one. Parse
errors are annotated with the JSON path of the offending element.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .qmat import (DEFAULT_TOL, Tolerances, ValidationError, dagger, kron,
                   require_unitary, validate)

BUILTIN_GATES = ("swap", "h", "x", "cnot")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class CircuitFormatError(ValueError):
    """A circuit document violates the schema or its semantic invariants."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


def builtin_matrix(name: str, wire_dims: tuple[int, ...]) -> np.ndarray:
    """The canonical matrix of a builtin gate for the given wire dimensions."""
    if name == "swap":
        if len(wire_dims) != 2 or wire_dims[0] != wire_dims[1]:
            raise ValidationError(
                f"swap needs two wires of equal dimension, got {wire_dims}")
        d = wire_dims[0]
        s = np.zeros((d * d, d * d), dtype=complex)
        for a in range(d):
            for b in range(d):
                s[b * d + a, a * d + b] = 1.0
        return s
    if name == "h" or name == "x":
        if wire_dims != (2,):
            raise ValidationError(f"{name} needs one qubit wire, got {wire_dims}")
        return _H.copy() if name == "h" else _X.copy()
    if name == "cnot":
        if wire_dims != (2, 2):
            raise ValidationError(f"cnot needs two qubit wires, got {wire_dims}")
        cx = np.eye(4, dtype=complex)
        cx[2, 2] = cx[3, 3] = 0.0
        cx[2, 3] = cx[3, 2] = 1.0
        return cx
    raise ValidationError(f"unknown builtin gate {name!r}")


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate: a name, the wires it acts on, and optionally its matrix.

    matrix is None for builtin gates, whose canonical matrix is resolved from
    the wire dimensions at compile time.
    """

    name: str
    wires: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if self.matrix is not None:
            object.__setattr__(self, "matrix",
                               np.asarray(self.matrix, dtype=complex))

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if self.name != other.name or self.wires != other.wires:
            return False
        if (self.matrix is None) != (other.matrix is None):
            return False
        return self.matrix is None or np.array_equal(self.matrix, other.matrix)


def _check_gate(gate: Gate, dims: tuple[int, ...], tol: Tolerances) -> None:
    """Semantic gate checks against the declared wire dimensions."""
    n = len(dims)
    if len(set(gate.wires)) != len(gate.wires):
        raise ValidationError(f"gate {gate.name!r} lists duplicate wires {gate.wires}")
    if not gate.wires:
        raise ValidationError(f"gate {gate.name!r} lists no wires")
    for w in gate.wires:
        if w < 0 or w >= n:
            raise ValidationError(
                f"gate {gate.name!r} wire {w} out of range 0..{n - 1}")
    wire_dims = tuple(dims[w] for w in gate.wires)
    span = int(np.prod(wire_dims))
    if gate.matrix is None:
        if gate.name not in BUILTIN_GATES:
            raise ValidationError(
                f"gate {gate.name!r} is not builtin and has no matrix")
        builtin_matrix(gate.name, wire_dims)
        return
    m = gate.matrix
    if m.shape != (span, span):
        raise ValidationError(
            f"gate {gate.name!r} matrix shape {m.shape} does not match wire "
            f"dimensions {wire_dims} (expected {(span, span)})")
    if not np.isfinite(m).all():
        raise ValidationError(f"gate {gate.name!r} matrix has non-finite entries")
    report = validate(m, "unitary", tol)
    if not report.ok:
        raise ValidationError(f"gate {gate.name!r} matrix not unitary "
                              f"(deviation {report.violations[0][1]:.3e})")
    if gate.name in BUILTIN_GATES:
        canonical = builtin_matrix(gate.name, wire_dims)
        if np.abs(m - canonical).max() > 1e-12:
            raise ValidationError(
                f"gate {gate.name!r} matrix conflicts with the builtin definition")


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered gate list over declared CR and CTC wire registers."""

    cr_dims: tuple[int, ...]
    ctc_dims: tuple[int, ...]
    gates: tuple[Gate, ...] = ()
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "cr_dims", tuple(int(d) for d in self.cr_dims))
        object.__setattr__(self, "ctc_dims", tuple(int(d) for d in self.ctc_dims))
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        for reg_name, reg in (("cr_dims", self.cr_dims), ("ctc_dims", self.ctc_dims)):
            if not reg:
                raise ValidationError(f"{reg_name} must not be empty")
            if any(d < 2 for d in reg):
                raise ValidationError(f"{reg_name} entries must be >= 2, got {reg}")
        if self.labels is not None and len(self.labels) != self.n_wires:
            raise ValidationError(
                f"labels count {len(self.labels)} != wire count {self.n_wires}")
        for g in self.gates:
            _check_gate(g, self.dims, DEFAULT_TOL)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cr_dims + self.ctc_dims

    @property
    def n_wires(self) -> int:
        return len(self.dims)

    @property
    def cr_dim(self) -> int:
        return int(np.prod(self.cr_dims))

    @property
    def ctc_dim(self) -> int:
        return int(np.prod(self.ctc_dims))

    @property
    def total_dim(self) -> int:
        return self.cr_dim * self.ctc_dim

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.cr_dims == other.cr_dims
                and self.ctc_dims == other.ctc_dims
                and self.labels == other.labels
                and self.gates == other.gates)


def _resolve_matrix(gate: Gate, dims: tuple[int, ...]) -> np.ndarray:
    if gate.matrix is not None:
        return gate.matrix
    wire_dims = tuple(dims[w] for w in gate.wires)
    return builtin_matrix(gate.name, wire_dims)


def _embed(matrix: np.ndarray, wires: tuple[int, ...],
           dims: tuple[int, ...]) -> np.ndarray:
    """Embed a gate matrix on `wires` into the full tensor space."""
    n = len(dims)
    total = int(np.prod(dims))
    rest = [i for i in range(n) if i not in wires]
    order = list(wires) + rest
    # perm[p] = flat index, in declared wire order, of the p-th basis vector
    # when factors are reordered as (wires..., rest...)
    perm = np.transpose(np.arange(total).reshape(dims), axes=order).reshape(-1)
    rest_dim = int(np.prod([dims[i] for i in rest])) if rest else 1
    big = np.kron(matrix, np.eye(rest_dim, dtype=complex))
    out = np.zeros((total, total), dtype=complex)
    out[np.ix_(perm, perm)] = big
    return out


def compile_unitary(circuit: Circuit) -> np.ndarray:
    """Full-dimension unitary of the circuit.

    The leftmost gate acts first, so it sits rightmost in the matrix product.
    An empty gate list compiles to the identity.
    """
    total = circuit.total_dim
    u = np.eye(total, dtype=complex)
    for gate in circuit.gates:
        u = _embed(_resolve_matrix(gate, circuit.dims), gate.wires, circuit.dims) @ u
    return u


# ---------------------------------------------------------------------------
# deterministic unitary completion
# ---------------------------------------------------------------------------

_GS_THRESHOLD = 1e-7


def _gram_schmidt_extend(vectors: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Orthonormalize `vectors`, then extend to a full basis with standard
    basis vectors taken in index order. Residuals below the fixed threshold
    are skipped for basis vectors and are an error for constraint vectors."""
    basis: list[np.ndarray] = []
    for k, v in enumerate(vectors):
        w = np.asarray(v, dtype=complex).copy()
        for b in basis:
            w -= b * np.vdot(b, w)
        nw = float(np.linalg.norm(w))
        if nw <= _GS_THRESHOLD:
            raise ValidationError(f"constraint vectors linearly dependent (vector {k})")
        basis.append(w / nw)
    for idx in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[idx] = 1.0
        w = e
        for b in basis:
            w = w - b * np.vdot(b, w)
        nw = float(np.linalg.norm(w))
        if nw > _GS_THRESHOLD:
            basis.append(w / nw)
    if len(basis) != dim:
        raise ValidationError("Gram-Schmidt extension failed to reach full rank")
    return basis


def complete_unitary(constraints, dim: int) -> np.ndarray:
    """Deterministic unitary satisfying input -> output vector constraints.

    The constraint inputs and outputs are each orthonormalized and extended to
    full bases by Gram-Schmidt over the standard basis in index order; the
    k-th appended input residual maps to the k-th appended output residual.
    Identical constraints therefore yield a bit-identical matrix.

    Args:
        constraints: pairs (input vector, output vector), each of length dim,
            with linearly independent inputs and pairwise-preserved inner
            products (required for a unitary to exist).
        dim: matrix dimension.

    Raises:
        ValidationError: inconsistent (inner-product mismatch, naming the
            violating pair) or linearly dependent constraints.
    """
    pairs = [(np.asarray(a, dtype=complex).reshape(-1),
              np.asarray(b, dtype=complex).reshape(-1)) for a, b in constraints]
    if not pairs:
        raise ValidationError("complete_unitary needs at least one constraint")
    for k, (vin, vout) in enumerate(pairs):
        if vin.shape != (dim,) or vout.shape != (dim,):
            raise ValidationError(f"constraint {k} vectors must have length {dim}")
    for i in range(len(pairs)):
        for j in range(i, len(pairs)):
            gin = np.vdot(pairs[i][0], pairs[j][0])
            gout = np.vdot(pairs[i][1], pairs[j][1])
            if abs(gin - gout) > 1e-10:
                raise ValidationError(
                    f"constraints {i} and {j} do not preserve inner products "
                    f"(<in_{i}|in_{j}> = {gin:.6g}, <out_{i}|out_{j}> = {gout:.6g})")
    basis_in = _gram_schmidt_extend([p[0] for p in pairs], dim)
    basis_out = _gram_schmidt_extend([p[1] for p in pairs], dim)
    u = np.zeros((dim, dim), dtype=complex)
    for bi, bo in zip(basis_in, basis_out):
        u += np.outer(bo, bi.conj())
    require_unitary(u, what="completed unitary")
    return u


# ---------------------------------------------------------------------------
# named circuit builders
# ---------------------------------------------------------------------------


def _basis(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def _as_state(v, what: str = "state") -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.isfinite(a).all():
        raise ValidationError(f"{what} has non-finite entries")
    n = float(np.linalg.norm(a))
    if abs(n - 1.0) > 1e-10:
        raise ValidationError(f"{what} not normalized (norm {n:.12g})")
    return a


def pad_with_ancillas(state, dim: int) -> np.ndarray:
    """Tensor |0...0> ancillas onto `state` to reach total dimension `dim`."""
    a = np.asarray(state, dtype=complex).reshape(-1)
    if dim % a.size != 0:
        raise ValidationError(
            f"cannot pad a dimension-{a.size} state to dimension {dim}")
    extra = dim // a.size
    return a if extra == 1 else np.kron(a, _basis(0, extra))


def build_epr_swap() -> Circuit:
    """Two CR qubits A, B and one CTC qubit; the single gate swaps B into the
    time machine. Feeding the maximally entangled pair on AB disentangles it:
    the consistent CTC state is I/2 and the output is I/4."""
    return Circuit(cr_dims=(2, 2), ctc_dims=(2,),
                   gates=(Gate("swap", (1, 2)),),
                   labels=("A", "B", "CTC"))


def build_bhw2(psi) -> Circuit:
    """Two-state discriminator: maps designated inputs |0> and |psi> to the
    orthogonal outputs |0> and |1> via time-machine self-consistency.

    Layout: one CR qubit and one CTC qubit; a controlled-U with the CTC wire
    as control and the CR wire as target, then a swap of the two wires. U is
    the deterministic completion of {psi -> |1>, psi_perp -> -|0>} where
    psi_perp is the normalized Gram-Schmidt residual of |0> against psi. The
    sign on the second constraint makes the consistent CTC state diagonal for
    every mixture of the designated inputs, which is what erases label-state
    correlations at the mixture level.

    Raises:
        ValidationError: psi not normalized, wrong dimension, or equal to |0>
            up to phase (nothing to discriminate).
    """
    psi = _as_state(psi, "psi")
    if psi.shape != (2,):
        raise ValidationError("psi must be a single-qubit state")
    e0, e1 = _basis(0, 2), _basis(1, 2)
    if 1.0 - abs(np.vdot(psi, e0)) <= 1e-10:
        raise ValidationError("psi coincides with |0> up to phase")
    residual = e0 - psi * np.vdot(psi, e0)
    psi_perp = residual / np.linalg.norm(residual)
    u = complete_unitary([(psi, e1), (psi_perp, -e0)], 2)
    p0 = np.diag([1.0 + 0j, 0.0])
    p1 = np.diag([0.0, 1.0 + 0j])
    cu = kron(np.eye(2, dtype=complex), p0) + kron(u, p1)
    return Circuit(cr_dims=(2,), ctc_dims=(2,),
                   gates=(Gate("cu", (0, 1), cu), Gate("swap", (0, 1))),
                   labels=("CR", "CTC"))


def build_bhw_multi(states) -> Circuit:
    """Multi-state discriminator: designated pure inputs map to orthogonal
    basis outputs via time-machine self-consistency.

    The CR register is the input system padded with |0...0> ancillas to
    dimension D, the next power of two >= max(state count, input dimension);
    the CTC register mirrors it. For each CTC basis value i < n there is a
    controlled-V_i, then the registers are fully swapped. V_i constrains the
    whole padded input subspace: the designated state goes to |i> and the k-th
    Gram-Schmidt residual of the padded input basis goes to |(i+k) mod D>.
    Leftover CTC basis values n <= i < D get a controlled shift of the padded
    input subspace, basis vector b -> |(i+1+b) mod D>. Spreading every branch
    this way keeps the consistent CTC state unique on each designated input
    (weight parked on any control value flows back to the absorbing one); on
    input phi_i the fixed point is |i><i| and the CR output is |i>.

    Args:
        states: n >= 2 normalized vectors of one common power-of-two
            dimension, pairwise distinct as rays.
    """
    vecs = [_as_state(s, f"states[{k}]") for k, s in enumerate(states)]
    n = len(vecs)
    if n < 2:
        raise ValidationError("need at least two states to discriminate")
    d_in = vecs[0].size
    if any(v.size != d_in for v in vecs):
        raise ValidationError("states must share one dimension")
    if d_in < 2 or d_in & (d_in - 1):
        raise ValidationError(f"state dimension must be a power of two >= 2, got {d_in}")
    for i in range(n):
        for j in range(i + 1, n):
            if 1.0 - abs(np.vdot(vecs[i], vecs[j])) <= 1e-10:
                raise ValidationError(f"states {i} and {j} coincide up to phase")
    total = 1
    while total < max(n, d_in):
        total *= 2
    m = total.bit_length() - 1
    pad = total // d_in

    branch_unitaries = []
    for i, phi in enumerate(vecs):
        phi_p = pad_with_ancillas(phi, total)
        constraints = [(phi_p, _basis(i, total))]
        acc = [phi_p]
        k = 0
        for b in range(d_in):
            w = pad_with_ancillas(_basis(b, d_in), total)
            for q in acc:
                w = w - q * np.vdot(q, w)
            nw = float(np.linalg.norm(w))
            if nw <= _GS_THRESHOLD:
                continue
            w = w / nw
            acc.append(w)
            k += 1
            constraints.append((w, _basis((i + k) % total, total)))
        branch_unitaries.append(complete_unitary(constraints, total))
    for i in range(n, total):
        constraints = []
        for b in range(d_in):
            w = pad_with_ancillas(_basis(b, d_in), total)
            constraints.append((w, _basis((i + 1 + b) % total, total)))
        branch_unitaries.append(complete_unitary(constraints, total))

    gates = []
    eye = np.eye(total, dtype=complex)
    for i, v in enumerate(branch_unitaries):
        proj = np.outer(_basis(i, total), _basis(i, total).conj())
        cv = kron(v, proj) + kron(eye, eye - proj)
        gates.append(Gate(f"cv{i}", tuple(range(2 * m)), cv))
    for j in range(m):
        gates.append(Gate("swap", (j, m + j)))
    wire_dims = (2,) * m
    return Circuit(cr_dims=wire_dims, ctc_dims=wire_dims, gates=tuple(gates))


# ---------------------------------------------------------------------------
# JSON parsing and serialization
# ---------------------------------------------------------------------------


def _parse_dim_list(obj, path: str) -> tuple[int, ...]:
    if not isinstance(obj, list) or not obj:
        raise CircuitFormatError("expected a nonempty array of integers", path)
    out = []
    for k, v in enumerate(obj):
        if not isinstance(v, int) or isinstance(v, bool) or v < 2:
            raise CircuitFormatError("expected an integer >= 2", f"{path}[{k}]")
        out.append(v)
    return tuple(out)


def _parse_matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise CircuitFormatError("expected a nonempty array of rows", path)
    rows = []
    width = None
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise CircuitFormatError("expected an array of [re, im] pairs",
                                     f"{path}[{r}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CircuitFormatError(
                f"row length {len(row)} != {width} of earlier rows", f"{path}[{r}]")
        entries = []
        for c, cell in enumerate(row):
            if (not isinstance(cell, list) or len(cell) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                               for x in cell)):
                raise CircuitFormatError("expected an [re, im] number pair",
                                         f"{path}[{r}][{c}]")
            entries.append(complex(cell[0], cell[1]))
        rows.append(entries)
    m = np.array(rows, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise CircuitFormatError(f"matrix not square: {m.shape[0]}x{m.shape[1]}", path)
    return m


def parse_circuit(doc) -> Circuit:
    """Parse and validate a circuit document.

    Args:
        doc: JSON text or an already-decoded dict.

    Returns:
        The validated Circuit.

    Raises:
        CircuitFormatError: schema violation, non-unitary gate, out-of-range
            wire, unknown matrixless gate; the error carries the JSON path of
            the offending element.
    """
    if isinstance(doc, (str, bytes)):
        try:
            data = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise CircuitFormatError(f"not valid JSON: {exc}") from exc
    else:
        data = doc
    if not isinstance(data, dict):
        raise CircuitFormatError("top level must be an object")
    allowed = {"cr_dims", "ctc_dims", "gates", "labels"}
    for key in data:
        if key not in allowed:
            raise CircuitFormatError("unknown key", f"$.{key}")
    for key in ("cr_dims", "ctc_dims", "gates"):
        if key not in data:
            raise CircuitFormatError(f"missing required key {key!r}")
    cr_dims = _parse_dim_list(data["cr_dims"], "$.cr_dims")
    ctc_dims = _parse_dim_list(data["ctc_dims"], "$.ctc_dims")
    dims = cr_dims + ctc_dims

    labels = None
    if "labels" in data:
        raw = data["labels"]
        if (not isinstance(raw, list)
                or not all(isinstance(s, str) for s in raw)):
            raise CircuitFormatError("expected an array of strings", "$.labels")
        if len(raw) != len(dims):
            raise CircuitFormatError(
                f"labels count {len(raw)} != wire count {len(dims)}", "$.labels")
        labels = tuple(raw)

    if not isinstance(data["gates"], list):
        raise CircuitFormatError("expected an array of gate objects", "$.gates")
    gates = []
    for k, raw in enumerate(data["gates"]):
        gpath = f"$.gates[{k}]"
        if not isinstance(raw, dict):
            raise CircuitFormatError("expected a gate object", gpath)
        for key in raw:
            if key not in ("name", "wires", "matrix"):
                raise CircuitFormatError("unknown key", f"{gpath}.{key}")
        if "name" not in raw or not isinstance(raw["name"], str):
            raise CircuitFormatError("missing or non-string 'name'", gpath)
        if "wires" not in raw or not isinstance(raw["wires"], list) or not all(
                isinstance(w, int) and not isinstance(w, bool) for w in raw["wires"]):
            raise CircuitFormatError("missing or non-integer-array 'wires'", gpath)
        matrix = None
        if "matrix" in raw:
            matrix = _parse_matrix(raw["matrix"], f"{gpath}.matrix")
        gate = Gate(raw["name"], tuple(raw["wires"]), matrix)
        try:
            _check_gate(gate, dims, DEFAULT_TOL)
        except ValidationError as exc:
            raise CircuitFormatError(str(exc), gpath) from exc
        if gate.name in BUILTIN_GATES and gate.matrix is not None:
            gate = Gate(gate.name, gate.wires, None)  # canonical form
        gates.append(gate)
    return Circuit(cr_dims=cr_dims, ctc_dims=ctc_dims, gates=tuple(gates),
                   labels=labels)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(cell.real), float(cell.imag)] for cell in row] for row in m]


def serialize_circuit(circuit: Circuit) -> str:
    """Serialize to the JSON circuit format.

    Builtin gates are written without a matrix, so parse(serialize(c)) == c
    bit-exactly on the Circuit value.
    """
    doc: dict = {"cr_dims": list(circuit.cr_dims),
                 "ctc_dims": list(circuit.ctc_dims)}
    if circuit.labels is not None:
        doc["labels"] = list(circuit.labels)
    doc["gates"] = []
    for g in circuit.gates:
        entry: dict = {"name": g.name, "wires": list(g.wires)}
        if g.matrix is not None:
            entry["matrix"] = _matrix_to_json(g.matrix)
        doc["gates"].append(entry)
    return json.dumps(doc, indent=2) + "\n"
