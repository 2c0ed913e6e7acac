"""Finite-difference assembly of the four eigenvalue problems for p-forms
on axis-aligned boxes.

On a flat box the Hodge Laplacian acts as the scalar Laplacian on each of
the C(n,p) components of a p-form, and the boundary systems decouple per
component per face, so every problem assembles as a block-diagonal pair of
scalar operators.  Grids are vertex-centered: `cells` interior nodes per
axis with spacing h = extent/(cells+1); a face whose condition fixes the
value eliminates its boundary nodes, a face whose condition fixes the
normal derivative keeps them and closes the stencil by ghost reflection
(ghost value = mirror interior value, the centered derivative = 0 rule).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "BoundaryKind",
    "ProblemKind",
    "FaceCondition",
    "BoxDomain",
    "ComponentIndex",
    "ComponentBlock",
    "FormProblem",
    "build_domain",
    "component_conditions",
    "assemble",
    "kernel_basis",
]


class BoundaryKind(str, enum.Enum):
    CLAMPED = "clamped"
    DIRICHLET = "dirichlet"
    ABSOLUTE = "absolute"


class ProblemKind(str, enum.Enum):
    CLAMPED_PLATE = "clamped_plate"
    BUCKLING = "buckling"
    DIRICHLET_LAPLACE = "dirichlet_laplace"
    ABSOLUTE_LAPLACE = "absolute_laplace"

    @property
    def boundary(self) -> BoundaryKind:
        if self in (ProblemKind.CLAMPED_PLATE, ProblemKind.BUCKLING):
            return BoundaryKind.CLAMPED
        if self is ProblemKind.DIRICHLET_LAPLACE:
            return BoundaryKind.DIRICHLET
        return BoundaryKind.ABSOLUTE

    @property
    def is_fourth_order(self) -> bool:
        return self in (ProblemKind.CLAMPED_PLATE, ProblemKind.BUCKLING)


class FaceCondition(str, enum.Enum):
    VALUE = "value"                # component vanishes on the face
    DERIVATIVE = "derivative"      # normal derivative of the component vanishes
    CLAMPED = "clamped"            # both


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box with a uniform interior grid per axis."""

    dim: int
    extent: tuple[float, ...]
    cells: tuple[int, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be in {{1,2,3}}, got {self.dim}")
        for name, seq in (("extent", self.extent), ("cells", self.cells),
                          ("spacing", self.spacing)):
            if len(seq) != self.dim:
                raise ValueError(f"{name} must have length {self.dim}, got {seq!r}")
        if any(not e > 0.0 for e in self.extent):
            raise ValueError(f"extents must be positive, got {self.extent}")
        if any(c < 3 for c in self.cells):
            raise ValueError(f"need at least 3 interior nodes per axis, got {self.cells}")
        if any(not h > 0.0 for h in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def key(self) -> tuple:
        return (self.dim, self.extent, self.cells)

    @property
    def interior_count(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))


def build_domain(dim: int, extent: Sequence[float], cells: Sequence[int]) -> BoxDomain:
    """Validated BoxDomain with spacing h_k = extent_k / (cells_k + 1)."""
    extent_t = tuple(float(e) for e in extent)
    cells_t = tuple(int(c) for c in cells)
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be in {{1,2,3}}, got {dim}")
    if len(extent_t) != dim or len(cells_t) != dim:
        raise ValueError(
            f"extent and cells must each have {dim} entries, got {extent!r}, {cells!r}"
        )
    spacing = tuple(e / (c + 1) for e, c in zip(extent_t, cells_t))
    return BoxDomain(dim=dim, extent=extent_t, cells=cells_t, spacing=spacing)


@dataclass(frozen=True)
class ComponentIndex:
    """Multi-index I of a component omega_I dx^I; axes are 1-based."""

    degree: int
    axes: tuple[int, ...]

    def __post_init__(self):
        if len(self.axes) != self.degree:
            raise ValueError(f"|axes| must equal degree, got {self.axes} vs {self.degree}")
        if any(a < 1 for a in self.axes):
            raise ValueError(f"axes are 1-based, got {self.axes}")
        if any(a >= b for a, b in zip(self.axes, self.axes[1:])):
            raise ValueError(f"axes must be strictly increasing, got {self.axes}")

    @staticmethod
    def all_for(n: int, p: int) -> tuple["ComponentIndex", ...]:
        """All C(n,p) components in lexicographic order."""
        if not 0 <= p <= n:
            raise ValueError(f"degree must satisfy 0 <= p <= {n}, got {p}")
        return tuple(
            ComponentIndex(degree=p, axes=axes)
            for axes in itertools.combinations(range(1, n + 1), p)
        )

    def label(self) -> str:
        return "dx^{" + ",".join(map(str, self.axes)) + "}" if self.axes else "scalar"


def component_conditions(
    domain: BoxDomain, component: ComponentIndex, kind: BoundaryKind
) -> dict[tuple[int, int], FaceCondition]:
    """Per-face scalar condition for one component.

    Keys are (axis, side) with axis in 1..n and side in {-1, +1}.  Clamped
    fixes value and normal derivative on every face; Dirichlet fixes the
    value; the absolute condition fixes the value where the face normal
    axis belongs to the component's multi-index and the normal derivative
    where it does not.
    """
    if component.degree > domain.dim or (component.axes and component.axes[-1] > domain.dim):
        raise ValueError(f"component {component} does not fit in dimension {domain.dim}")
    out: dict[tuple[int, int], FaceCondition] = {}
    for axis in range(1, domain.dim + 1):
        if kind is BoundaryKind.CLAMPED:
            cond = FaceCondition.CLAMPED
        elif kind is BoundaryKind.DIRICHLET:
            cond = FaceCondition.VALUE
        else:
            cond = FaceCondition.VALUE if axis in component.axes else FaceCondition.DERIVATIVE
        out[(axis, -1)] = cond
        out[(axis, +1)] = cond
    return out


# ---------------------------------------------------------------------------
# scalar building blocks
# ---------------------------------------------------------------------------

def _axis_stiffness(cells: int, h: float, cond: FaceCondition) -> tuple[sp.csr_matrix, np.ndarray]:
    """1D stiffness S and lumped mass weights w for one axis.

    VALUE faces drop the boundary nodes (classical interior Laplacian);
    DERIVATIVE faces keep them, with half mass weight and corner entries
    from the ghost reflection so that S stays symmetric.
    """
    if cond is FaceCondition.VALUE:
        m = cells
        main = np.full(m, 2.0 / h)
        weights = np.full(m, h)
    elif cond is FaceCondition.DERIVATIVE:
        m = cells + 2
        main = np.full(m, 2.0 / h)
        main[0] = main[-1] = 1.0 / h
        weights = np.full(m, h)
        weights[0] = weights[-1] = h / 2.0
    else:
        raise ValueError(f"no second-order axis operator for {cond}")
    off = np.full(m - 1, -1.0 / h)
    stiff = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    return stiff, weights


def _kron_chain(mats: Iterable[sp.spmatrix]) -> sp.csr_matrix:
    out = None
    for m in mats:
        out = m if out is None else sp.kron(out, m, format="csr")
    return out.tocsr()


def _symmetrize(a: sp.spmatrix) -> sp.csr_matrix:
    out = ((a + a.T) * 0.5).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def _second_order_operators(
    domain: BoxDomain, conds: tuple[FaceCondition, ...]
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(K, M) for the componentwise Laplacian with per-axis conditions."""
    axes = [_axis_stiffness(c, h, cond)
            for c, h, cond in zip(domain.cells, domain.spacing, conds)]
    masses = [sp.diags(w, format="csr") for _, w in axes]
    size = int(np.prod([m.shape[0] for m in masses]))
    stiff = sp.csr_matrix((size, size))
    for k in range(domain.dim):
        factors = [axes[k][0] if j == k else masses[j] for j in range(domain.dim)]
        stiff = stiff + _kron_chain(factors)
    mass = _kron_chain(masses)
    return _symmetrize(stiff), mass.tocsr()


def _interior_laplacian(domain: BoxDomain) -> sp.csr_matrix:
    """Standard (2n+1)-point Laplacian on interior nodes, value-zero faces."""
    mats = []
    eyes = [sp.identity(c, format="csr") for c in domain.cells]
    for k, (c, h) in enumerate(zip(domain.cells, domain.spacing)):
        main = np.full(c, 2.0 / h ** 2)
        off = np.full(c - 1, -1.0 / h ** 2)
        second = sp.diags([off, main, off], [-1, 0, 1], format="csr")
        factors = [second if j == k else eyes[j] for j in range(domain.dim)]
        mats.append(_kron_chain(factors))
    out = mats[0]
    for m in mats[1:]:
        out = out + m
    return out.tocsr()


def _face_rows(domain: BoxDomain) -> tuple[sp.csr_matrix, np.ndarray]:
    """Laplacian evaluation rows on face-interior boundary nodes for clamped data.

    With value zero on the whole face and ghost reflection for the normal
    derivative, the Laplacian at a boundary node interior to the face with
    normal e_k reduces to -2 u(adjacent interior node) / h_k^2; nodes lying
    on two or more faces contribute nothing.  Row weights carry the halved
    trapezoidal quadrature in the normal direction.
    """
    n_int = domain.interior_count
    flat = np.arange(n_int).reshape(domain.cells)
    rows, cols, vals, weights = [], [], [], []
    volume = domain.cell_volume
    row = 0
    for k in range(domain.dim):
        h = domain.spacing[k]
        for layer in (0, domain.cells[k] - 1):
            adjacent = np.take(flat, layer, axis=k).ravel()
            for col in adjacent:
                rows.append(row)
                cols.append(int(col))
                vals.append(-2.0 / h ** 2)
                weights.append(volume / 2.0)
                row += 1
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(row, n_int))
    return mat, np.asarray(weights)


@dataclass(frozen=True)
class ComponentBlock:
    """One scalar diagonal block of an assembled p-form problem."""

    component: ComponentIndex
    offset: int
    size: int
    a: sp.csr_matrix
    b: sp.csr_matrix
    signature: tuple
    laplacian: Optional[sp.csr_matrix] = None   # evaluation-grid Laplacian (fourth order)
    eval_weights: Optional[np.ndarray] = None   # quadrature weights of its rows


@dataclass(frozen=True)
class FormProblem:
    """Assembled symmetric pencil (A, B) for one degree and problem kind."""

    domain: BoxDomain
    degree: int
    kind: ProblemKind
    A: sp.csr_matrix
    B: sp.csr_matrix
    dof_count: int
    blocks: tuple[ComponentBlock, ...]


def _fourth_order_block(domain: BoxDomain, kind: ProblemKind) -> dict:
    interior = _interior_laplacian(domain)
    face, face_w = _face_rows(domain)
    lap = sp.vstack([interior, face], format="csr")
    weights = np.concatenate([np.full(domain.interior_count, domain.cell_volume), face_w])
    a = _symmetrize(lap.T @ sp.diags(weights) @ lap)
    if kind is ProblemKind.CLAMPED_PLATE:
        b = (sp.identity(domain.interior_count, format="csr") * domain.cell_volume).tocsr()
        b_tag = "mass"
    else:
        b = _symmetrize(interior * domain.cell_volume)
        b_tag = "stiffness"
    conds = tuple(FaceCondition.CLAMPED for _ in range(domain.dim))
    return {
        "a": a,
        "b": b,
        "laplacian": lap,
        "eval_weights": weights,
        "signature": ("biharmonic", b_tag, domain.key, conds),
    }


def _second_order_block(domain: BoxDomain, conds: tuple[FaceCondition, ...]) -> dict:
    stiff, mass = _second_order_operators(domain, conds)
    return {
        "a": stiff,
        "b": mass,
        "laplacian": None,
        "eval_weights": None,
        "signature": ("laplacian", "mass", domain.key, conds),
    }


def assemble(domain: BoxDomain, degree: int, kind: ProblemKind) -> FormProblem:
    """Assemble the block-diagonal pencil (A, B) for p-forms of the given kind.

    Clamped plate: A = L^T M~ L against the mass matrix.  Buckling: the same
    A against the Dirichlet stiffness K.  Dirichlet / absolute Laplacian:
    K against the (trapezoidal) mass, with per-component face conditions.
    """
    kind = ProblemKind(kind)
    n = domain.dim
    if not 0 <= degree <= n:
        raise ValueError(f"degree must satisfy 0 <= p <= {n}, got {degree}")
    components = ComponentIndex.all_for(n, degree)
    cache: dict[tuple, dict] = {}
    blocks: list[ComponentBlock] = []
    offset = 0
    for comp in components:
        face_map = component_conditions(domain, comp, kind.boundary)
        axis_conds = tuple(face_map[(axis, -1)] for axis in range(1, n + 1))
        if kind.is_fourth_order:
            key = ("biharmonic", kind.value, axis_conds)
            if key not in cache:
                cache[key] = _fourth_order_block(domain, kind)
        else:
            key = ("laplacian", axis_conds)
            if key not in cache:
                cache[key] = _second_order_block(domain, axis_conds)
        built = cache[key]
        size = built["a"].shape[0]
        blocks.append(ComponentBlock(
            component=comp,
            offset=offset,
            size=size,
            a=built["a"],
            b=built["b"],
            signature=built["signature"],
            laplacian=built["laplacian"],
            eval_weights=built["eval_weights"],
        ))
        offset += size
    a_full = sp.block_diag([blk.a for blk in blocks], format="csr")
    b_full = sp.block_diag([blk.b for blk in blocks], format="csr")
    return FormProblem(
        domain=domain,
        degree=degree,
        kind=kind,
        A=a_full,
        B=b_full,
        dof_count=offset,
        blocks=tuple(blocks),
    )


def kernel_basis(problem: FormProblem) -> list[np.ndarray]:
    """Known kernel vectors of A to deflate before reporting first eigenvalues.

    On a box the only harmonic space compatible with the absolute condition
    is the constants at p = 0 (the Neumann kernel); every other assembled
    pencil here is positive definite.
    """
    if problem.kind is ProblemKind.ABSOLUTE_LAPLACE and problem.degree == 0:
        return [np.ones(problem.dof_count)]
    return []
