"""Constant evaluation, the eigenvalue-inequality battery, and mesh-convergence
studies with Richardson extrapolation.

Check semantics: a strict check ('<') passes only when its margin exceeds the
combined numerical tolerance of its inputs (solver residuals plus, when
available, a convergence-study error estimate); a broad check ('<=') passes
when the relation is not violated beyond that tolerance.  Checks whose inputs
are missing are reported as skipped, never dropped, and the two families that
would need curved-domain eigensolves are reported "constants-only".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .bessel import BallSpectrum
from .discretize import BoxDomain, ProblemKind, assemble, build_domain
from .eigensolve import Spectrum, solve_problem
from .errors import NumericalFailure

__all__ = [
    "ConstantsBundle",
    "InequalityCheck",
    "InequalityReport",
    "SpectrumSet",
    "ConvergenceStudy",
    "evaluate_constants",
    "halfdegree_identity_gap",
    "check_inequalities",
    "convergence_study",
    "box_battery",
]


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsBundle:
    """Dimension constants for the curvature-driven lower bounds.

    c_np is the mixing constant of the degree-coupling estimates;
    dirichlet/buckling bounds are gamma * p * (n - p + 1) and the clamped
    bound is its square.
    """

    dim: int
    degree: int
    gamma: float
    c_np: float
    dirichlet_bound: float
    buckling_bound: float
    clamped_bound: float


def _c_np_exact(n: int, p: int) -> Fraction:
    shift = Fraction((n - 2 * p) ** 2)
    weight = Fraction(p * (n - p + 1))
    return n + (4 + 2 * shift) / weight + n * shift / weight ** 2


def evaluate_constants(n: int, p: int, gamma: float) -> ConstantsBundle:
    """Exact evaluation of the degree-coupling constant and curvature bounds."""
    if not (isinstance(n, int) and isinstance(p, int)):
        raise ValueError("n and p must be integers")
    if not 1 <= p <= n // 2:
        raise ValueError(f"degree must satisfy 1 <= p <= floor(n/2), got p={p}, n={n}")
    if not gamma > 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    weight = p * (n - p + 1)
    return ConstantsBundle(
        dim=n,
        degree=p,
        gamma=float(gamma),
        c_np=float(_c_np_exact(n, p)),
        dirichlet_bound=gamma * weight,
        buckling_bound=gamma * weight,
        clamped_bound=(gamma * weight) ** 2,
    )


def halfdegree_identity_gap(n: int) -> float:
    """|C_{n,n/2}/n - (1 + 16/(n^2(n+2)))|, computed in exact rationals."""
    if n % 2 != 0 or n < 2:
        raise ValueError(f"identity needs even n >= 2, got {n}")
    lhs = _c_np_exact(n, n // 2) / n
    rhs = 1 + Fraction(16, n * n * (n + 2))
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# inequality report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityCheck:
    name: str
    relation: str                       # "<" or "<="
    lhs: Optional[float]
    rhs: Optional[float]
    margin: Optional[float]
    status: str                         # pass | fail | skipped | constants-only
    provenance: tuple[str, ...] = ()
    tolerance: float = 0.0
    note: str = ""


@dataclass
class InequalityReport:
    checks: list[InequalityCheck] = field(default_factory=list)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def __getitem__(self, name: str) -> InequalityCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def failures(self) -> list[InequalityCheck]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures


class _Quantity:
    """A value with an absolute uncertainty, combined linearly."""

    __slots__ = ("value", "tol")

    def __init__(self, value: float, tol: float):
        self.value = float(value)
        self.tol = float(tol)

    def times(self, other: "_Quantity") -> "_Quantity":
        return _Quantity(self.value * other.value,
                         abs(self.value) * other.tol + abs(other.value) * self.tol)

    def squared(self) -> "_Quantity":
        return _Quantity(self.value ** 2, 2.0 * abs(self.value) * self.tol)

    def sqrt(self) -> "_Quantity":
        root = math.sqrt(self.value)
        return _Quantity(root, self.tol / (2.0 * root) if root > 0.0 else self.tol)


@dataclass
class SpectrumSet:
    """Labeled spectra feeding the inequality battery."""

    dim: int
    spectra: dict[tuple[str, int], Spectrum] = field(default_factory=dict)
    ball: Optional[BallSpectrum] = None
    error_estimates: dict[tuple[str, int], float] = field(default_factory=dict)

    def add(self, spectrum: Spectrum) -> None:
        if spectrum.kind is None or spectrum.degree is None:
            raise ValueError("spectrum must carry kind and degree labels")
        key = (str(spectrum.kind), int(spectrum.degree))
        if key in self.spectra:
            raise ValueError(f"duplicate spectrum label {key}")
        self.spectra[key] = spectrum

    def degrees(self) -> list[int]:
        return sorted({degree for _, degree in self.spectra})

    def quantity(self, kind: str, degree: int, index: int = 0) -> Optional[_Quantity]:
        spec = self.spectra.get((kind, degree))
        if spec is None or index >= spec.values.size:
            return None
        value = float(spec.values[index])
        tol = float(spec.residuals[index]) * abs(value)
        tol += self.error_estimates.get((kind, degree), 0.0)
        return _Quantity(value, tol)

    def label(self, kind: str, degree: int) -> str:
        return f"{kind} p={degree}"


_CLAMPED = ProblemKind.CLAMPED_PLATE.value
_BUCKLING = ProblemKind.BUCKLING.value
_DIRICHLET = ProblemKind.DIRICHLET_LAPLACE.value
_ABSOLUTE = ProblemKind.ABSOLUTE_LAPLACE.value

# relative uncertainty carried by the closed-form ball values (zero finder 1e-10)
_BALL_RTOL = 1e-8


def _compare(name, lhs: _Quantity, rhs: _Quantity, relation: str,
             provenance: tuple[str, ...], note: str = "") -> InequalityCheck:
    margin = rhs.value - lhs.value
    tolerance = lhs.tol + rhs.tol
    if relation == "<":
        ok = margin > tolerance
    elif relation == "<=":
        ok = margin >= -tolerance
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return InequalityCheck(
        name=name, relation=relation, lhs=lhs.value, rhs=rhs.value,
        margin=margin, status="pass" if ok else "fail",
        provenance=provenance, tolerance=tolerance, note=note,
    )


def _skipped(name, relation, provenance, note) -> InequalityCheck:
    return InequalityCheck(name=name, relation=relation, lhs=None, rhs=None,
                           margin=None, status="skipped",
                           provenance=provenance, note=note)


def _constants_only(name, note, provenance=()) -> InequalityCheck:
    return InequalityCheck(name=name, relation="<", lhs=None, rhs=None,
                           margin=None, status="constants-only",
                           provenance=provenance, note=note)


def check_inequalities(spectra: SpectrumSet) -> InequalityReport:
    """Run the full battery over the provided spectra set."""
    n = spectra.dim
    checks: list[InequalityCheck] = []

    def fetch(kind: str, degree: int, index: int = 0):
        return spectra.quantity(kind, degree, index)

    def per_degree(p: int) -> None:
        gam = fetch(_CLAMPED, p)
        lam_big = fetch(_BUCKLING, p)
        lam = fetch(_DIRICHLET, p)
        prov = (spectra.label(_CLAMPED, p), spectra.label(_BUCKLING, p),
                spectra.label(_DIRICHLET, p))

        name = f"clamped_below_buckling_squared[p={p}]"
        if gam and lam_big:
            checks.append(_compare(name, gam, lam_big.squared(), "<", prov[:2]))
        else:
            checks.append(_skipped(name, "<", prov[:2], "missing clamped or buckling spectrum"))

        name = f"buckling_dirichlet_product_below_clamped[p={p}]"
        if gam and lam_big and lam:
            checks.append(_compare(name, lam_big.times(lam), gam, "<", prov))
        else:
            checks.append(_skipped(name, "<", prov, "missing spectra"))

        name = f"dirichlet_below_sqrt_clamped[p={p}]"
        if gam and lam:
            checks.append(_compare(name, lam, gam.sqrt(), "<", (prov[2], prov[0])))
        else:
            checks.append(_skipped(name, "<", (prov[2], prov[0]), "missing spectra"))

        name = f"sqrt_clamped_below_buckling[p={p}]"
        if gam and lam_big:
            checks.append(_compare(name, gam.sqrt(), lam_big, "<", (prov[0], prov[1])))
        else:
            checks.append(_skipped(name, "<", (prov[0], prov[1]), "missing spectra"))

        name = f"dirichlet_below_buckling[p={p}]"
        if lam and lam_big:
            checks.append(_compare(name, lam, lam_big, "<", (prov[2], prov[1])))
        else:
            checks.append(_skipped(name, "<", (prov[2], prov[1]), "missing spectra"))

        if p >= 1:
            name = f"adjacent_dirichlet_below_buckling[p={p}]"
            neighbors = [fetch(_DIRICHLET, q) for q in (p - 1, p + 1) if 0 <= q <= n]
            neighbors = [q for q in neighbors if q is not None]
            if neighbors and lam_big:
                smallest = min(neighbors, key=lambda q: q.value)
                checks.append(_compare(
                    name, smallest, lam_big, "<=",
                    (f"{_DIRICHLET} p={p}+-1", spectra.label(_BUCKLING, p))))
            else:
                checks.append(_skipped(name, "<=", (), "missing adjacent Dirichlet spectra"))

        name = f"absolute_pair_below_buckling[p={p}]"
        mu_lo = fetch(_ABSOLUTE, p)
        mu_hi = fetch(_ABSOLUTE, n - p)
        if mu_lo and mu_hi and lam_big:
            largest = max((mu_lo, mu_hi), key=lambda q: q.value)
            checks.append(_compare(
                name, largest, lam_big, "<=",
                (spectra.label(_ABSOLUTE, p), spectra.label(_ABSOLUTE, n - p),
                 spectra.label(_BUCKLING, p))))
        else:
            checks.append(_skipped(name, "<=", (), "missing absolute spectra at p and n-p"))

        if p >= 1:
            for kind, tag in ((_BUCKLING, "buckling"), (_CLAMPED, "clamped"),
                              (_DIRICHLET, "dirichlet")):
                name = f"degree_independence_{tag}[p={p}]"
                base = fetch(kind, 0)
                here = fetch(kind, p)
                if base and here:
                    gap = _Quantity(abs(here.value - base.value), 0.0)
                    budget = _Quantity(base.tol + here.tol + 1e-12 * abs(base.value), 0.0)
                    checks.append(_compare(
                        name, gap, budget, "<=",
                        (spectra.label(kind, p), spectra.label(kind, 0)),
                        note="flat-domain spectra are degree independent"))
                else:
                    checks.append(_skipped(name, "<=", (), f"missing {tag} spectra"))

        if 1 <= p <= n // 2:
            checks.append(_constants_only(
                f"sphere_domain_clamped_mix[p={p}]",
                "sphere-cap eigensolves are out of scope; "
                f"coupling constant C = {float(_c_np_exact(n, p))!r} evaluated only"))
            checks.append(_constants_only(
                f"sphere_domain_buckling_mix[p={p}]",
                "sphere-cap eigensolves are out of scope; "
                f"coupling constant C = {float(_c_np_exact(n, p))!r} evaluated only"))

    for p in spectra.degrees():
        per_degree(p)

    # Hodge-star duality: p and n-p spectra of the star-symmetric kinds come
    # from permuted-identical block operators, so they agree exactly.  The
    # absolute problem instead pairs with the relative one at degree n-p
    # (verified structurally in the test suite, not recomputable here).
    for kind, tag in ((_CLAMPED, "clamped"), (_BUCKLING, "buckling"),
                      (_DIRICHLET, "dirichlet")):
        for p in spectra.degrees():
            q = n - p
            if p >= q or (kind, p) not in spectra.spectra:
                continue
            name = f"degree_complement_duality_{tag}[p={p} vs p={q}]"
            low = fetch(kind, p)
            high = fetch(kind, q)
            if low and high:
                gap = _Quantity(abs(low.value - high.value), 0.0)
                budget = _Quantity(low.tol + high.tol + 1e-12 * abs(low.value), 0.0)
                checks.append(_compare(
                    name, gap, budget, "<=",
                    (spectra.label(kind, p), spectra.label(kind, q)),
                    note="star duality: blocks are identical up to component relabeling"))
            else:
                checks.append(_skipped(name, "<=", (),
                                       f"missing {tag} spectrum at degree {q}"))

    # fixed-degree checks
    lam1_one = fetch(_DIRICHLET, 1)
    buck0 = fetch(_BUCKLING, 0)
    name = "gradient_dirichlet_below_scalar_buckling"
    if lam1_one and buck0:
        checks.append(_compare(name, lam1_one, buck0, "<=",
                               (spectra.label(_DIRICHLET, 1), spectra.label(_BUCKLING, 0))))
    else:
        checks.append(_skipped(name, "<=", (), "missing dirichlet p=1 or buckling p=0"))

    name = "second_dirichlet_below_scalar_buckling"
    lam2 = fetch(_DIRICHLET, 0, index=1)
    if n != 2:
        checks.append(_skipped(name, "<=", (), "stated for planar domains only"))
    elif lam2 and buck0:
        checks.append(_compare(name, lam2, buck0, "<=",
                               (spectra.label(_DIRICHLET, 0), spectra.label(_BUCKLING, 0))))
    else:
        checks.append(_skipped(name, "<=", (), "missing second Dirichlet value or buckling p=0"))

    mu0 = fetch(_ABSOLUTE, 0)
    lam0 = fetch(_DIRICHLET, 0)
    name = "scalar_neumann_below_scalar_dirichlet"
    if mu0 and lam0:
        checks.append(_compare(name, mu0, lam0, "<",
                               (spectra.label(_ABSOLUTE, 0), spectra.label(_DIRICHLET, 0))))
    else:
        checks.append(_skipped(name, "<", (), "missing absolute or dirichlet p=0"))

    name = "scalar_neumann_below_scalar_buckling"
    if mu0 and buck0:
        checks.append(_compare(name, mu0, buck0, "<",
                               (spectra.label(_ABSOLUTE, 0), spectra.label(_BUCKLING, 0))))
    else:
        checks.append(_skipped(name, "<", (), "missing absolute or buckling p=0"))

    # closed-form ball chain
    ball = spectra.ball
    prov_ball = (f"ball n={ball.dim} R={ball.radius}",) if ball else ()
    if ball:
        lam = _Quantity(ball.lambda1, _BALL_RTOL * ball.lambda1)
        big_lam = _Quantity(ball.big_lambda1, _BALL_RTOL * ball.big_lambda1)
        big_gam = _Quantity(ball.big_gamma1, _BALL_RTOL * ball.big_gamma1)
        checks.append(_compare("ball_chain_clamped_below_buckling_squared",
                               big_gam, big_lam.squared(), "<", prov_ball))
        checks.append(_compare("ball_chain_product_below_clamped",
                               big_lam.times(lam), big_gam, "<", prov_ball))
        checks.append(_compare("ball_chain_dirichlet_squared_below_product",
                               lam.squared(), big_lam.times(lam), "<", prov_ball))
    else:
        for name in ("ball_chain_clamped_below_buckling_squared",
                     "ball_chain_product_below_clamped",
                     "ball_chain_dirichlet_squared_below_product"):
            checks.append(_skipped(name, "<", (), "no ball spectrum provided"))

    # curvature-driven lower bounds have no discrete home on flat boxes
    checks.append(_constants_only(
        "curvature_dirichlet_lower_bound",
        "flat box: the curvature term vanishes, so the hypothesis gamma > 0 "
        "is empty; bound evaluated at formula level via evaluate_constants"))
    checks.append(_constants_only(
        "curvature_buckling_clamped_lower_bounds",
        "flat box: evaluated at formula level via evaluate_constants"))

    # half-degree algebraic identity, exact in rationals
    if n % 2 == 0 and n >= 2:
        gap = _Quantity(halfdegree_identity_gap(n), 0.0)
        checks.append(_compare(
            f"halfdegree_coupling_identity[n={n}]", gap, _Quantity(1e-14, 0.0), "<=",
            (), note="C(n, n/2)/n == 1 + 16/(n^2 (n+2))"))

    return InequalityReport(checks=checks)


# ---------------------------------------------------------------------------
# mesh convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceStudy:
    """First-eigenvalue refinement series with Richardson extrapolation."""

    label: str
    resolutions: tuple[int, ...]
    values: tuple[float, ...]
    extrapolated: float
    observed_order: float

    @property
    def error_estimate(self) -> float:
        return abs(self.extrapolated - self.values[-1])


def convergence_study(dim: int, extent: Sequence[float], kind: ProblemKind,
                      degree: int, resolutions: Sequence[int],
                      tol: float = 1e-9, m: int = 1,
                      cache: Optional[dict] = None) -> ConvergenceStudy:
    """Solve the problem on successively refined grids and extrapolate.

    The observed order comes from the last three levels, which must share a
    common refinement ratio in (cells + 1).
    """
    res = tuple(int(r) for r in resolutions)
    if len(res) < 3:
        raise ValueError("need at least 3 resolutions")
    if any(a >= b for a, b in zip(res, res[1:])):
        raise ValueError(f"resolutions must be strictly increasing, got {res}")
    kind = ProblemKind(kind)
    values = []
    for r in res:
        domain = build_domain(dim, extent, [r] * dim)
        problem = assemble(domain, degree, kind)
        spectrum = solve_problem(problem, m=m, tol=tol, cache=cache)
        values.append(float(spectrum.values[0]))
    coarse, mid, fine = values[-3], values[-2], values[-1]
    rc, rm, rf = res[-3], res[-2], res[-1]
    rho_cm = (rm + 1) / (rc + 1)
    rho_mf = (rf + 1) / (rm + 1)
    if abs(rho_cm - rho_mf) > 1e-12 * rho_mf:
        raise ValueError(
            f"last three levels must share one refinement ratio, got {rho_cm} vs {rho_mf}")
    if mid == fine:
        return ConvergenceStudy(
            label=f"{kind.value} p={degree} dim={dim}",
            resolutions=res, values=tuple(values),
            extrapolated=fine, observed_order=math.inf)
    ratio = (coarse - mid) / (mid - fine)
    if not ratio > 1.0:
        raise NumericalFailure(
            f"refinement did not converge monotonically (ratio {ratio})",
            partial=tuple(values))
    order = math.log(ratio) / math.log(rho_mf)
    extrapolated = fine + (fine - mid) / (rho_mf ** order - 1.0)
    return ConvergenceStudy(
        label=f"{kind.value} p={degree} dim={dim}",
        resolutions=res, values=tuple(values),
        extrapolated=extrapolated, observed_order=order)


# ---------------------------------------------------------------------------
# batteries
# ---------------------------------------------------------------------------

def box_battery(domain: BoxDomain, degrees: Sequence[int], m: int = 4,
                tol: float = 1e-9, with_error_estimates: bool = False,
                cache: Optional[dict] = None) -> tuple[SpectrumSet, InequalityReport]:
    """Solve all four problems on a box for the given degrees and run the checks.

    Absolute spectra are also computed at the complementary degrees n - p,
    which the pairing inequality needs.  With `with_error_estimates`, each
    (kind, degree) gets a discretization-error estimate from a three-level
    convergence study ending at this grid (requires cells + 1 divisible by 4
    and a cubic grid), and the combined check tolerances include it.
    """
    degrees = sorted(set(int(p) for p in degrees))
    if any(not 0 <= p <= domain.dim for p in degrees):
        raise ValueError(f"degrees must lie in [0, {domain.dim}], got {degrees}")
    cache = {} if cache is None else cache
    spectra = SpectrumSet(dim=domain.dim)
    absolute_degrees = sorted(set(degrees) | {domain.dim - p for p in degrees})
    for p in degrees:
        for kind in (ProblemKind.CLAMPED_PLATE, ProblemKind.BUCKLING,
                     ProblemKind.DIRICHLET_LAPLACE):
            spectra.add(solve_problem(assemble(domain, p, kind), m=m, tol=tol, cache=cache))
    for p in absolute_degrees:
        spectra.add(solve_problem(assemble(domain, p, ProblemKind.ABSOLUTE_LAPLACE),
                                  m=m, tol=tol, cache=cache))
    if with_error_estimates:
        cells = domain.cells[0]
        uniform = all(c == cells for c in domain.cells)
        if not uniform or (cells + 1) % 4:
            raise ValueError("error estimates need a cubic grid with cells + 1 divisible by 4")
        ladder = ((cells + 1) // 4 - 1, (cells + 1) // 2 - 1, cells)
        for (kind_value, p) in list(spectra.spectra):
            study = convergence_study(domain.dim, domain.extent, ProblemKind(kind_value),
                                      p, ladder, tol=tol, m=m, cache=cache)
            spectra.error_estimates[(kind_value, p)] = study.error_estimate
    return spectra, check_inequalities(spectra)
