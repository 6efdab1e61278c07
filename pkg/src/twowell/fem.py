"""Direct minimization of the discretized two-well energy.

P1 triangles on a regular grid (each grid cell split along its lower-left
to upper-right diagonal) make the deformation piecewise affine, so the
surface term is a pure jump measure: the exact total variation of the
gradient is the sum over interior edges of edge length times the Frobenius
norm of the gradient jump.  A Huber smoothing with small parameter delta
makes it differentiable; reported final energies are also recomputed with
the exact (unsmoothed) jump norm.

Descent is limited-memory BFGS with Armijo backtracking on the interior
nodes; boundary nodes are pinned to the identity.  No global-optimality
claim is made, nonconvexity is handled by multi-start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .energy import EnergyBreakdown
from .piecewise import PiecewiseDeformation, Rect
from .wells import WellSpec, well_matrices

__all__ = [
    "Mesh",
    "DiscreteField",
    "MinimizeOptions",
    "MinimizeResult",
    "discrete_energy",
    "discrete_gradient",
    "minimize",
    "seed_from_construction",
    "default_huber_delta",
]


class Mesh:
    """Regular nx-by-ny triangulated grid on a rectangle."""

    def __init__(self, nx: int, ny: int, rect: Rect):
        if nx < 2 or ny < 2:
            raise ValueError("mesh needs at least 2 cells per direction")
        self.nx, self.ny, self.rect = nx, ny, rect
        self.hx = rect.width / nx
        self.hy = rect.height / ny
        xs = rect.x0 + self.hx * np.arange(nx + 1)
        ys = rect.y0 + self.hy * np.arange(ny + 1)
        X, Y = np.meshgrid(xs, ys, indexing="xy")
        self.nodes = np.column_stack([X.ravel(), Y.ravel()])
        self.n_nodes = (nx + 1) * (ny + 1)

        def nid(i, j):
            return j * (nx + 1) + i

        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        I, J = I.ravel(), J.ravel()
        n00 = nid(I, J)
        n10 = nid(I + 1, J)
        n01 = nid(I, J + 1)
        n11 = nid(I + 1, J + 1)
        lower = np.column_stack([n00, n10, n11])
        upper = np.column_stack([n00, n11, n01])
        self.tris = np.vstack([lower, upper])
        ncell = nx * ny
        self.n_tris = 2 * ncell

        # Constant per-triangle gradient operators: d_x u = cx . u(tri nodes).
        cx = np.empty((self.n_tris, 3))
        cy = np.empty((self.n_tris, 3))
        cx[:ncell] = np.array([-1.0 / self.hx, 1.0 / self.hx, 0.0])
        cy[:ncell] = np.array([0.0, -1.0 / self.hy, 1.0 / self.hy])
        cx[ncell:] = np.array([0.0, 1.0 / self.hx, -1.0 / self.hx])
        cy[ncell:] = np.array([-1.0 / self.hy, 0.0, 1.0 / self.hy])
        self.cx, self.cy = cx, cy
        self.tri_area = 0.5 * self.hx * self.hy

        # Interior edges as (left tri, right tri, length).
        edges = []
        diag = math.hypot(self.hx, self.hy)
        cell = lambda i, j: j * nx + i  # noqa: E731
        for j in range(ny):
            for i in range(nx):
                lo = cell(i, j)
                up = cell(i, j) + ncell
                edges.append((lo, up, diag))
                if i + 1 < nx:
                    edges.append((lo, cell(i + 1, j) + ncell, self.hy))
                if j + 1 < ny:
                    edges.append((up, cell(i, j + 1), self.hx))
        e = np.array(edges)
        self.edge_tris = e[:, :2].astype(int)
        self.edge_len = e[:, 2].astype(float)

        on_bnd = np.zeros(self.n_nodes, dtype=bool)
        ii = self.nodes
        on_bnd |= np.isclose(ii[:, 0], rect.x0) | np.isclose(ii[:, 0], rect.x1)
        on_bnd |= np.isclose(ii[:, 1], rect.y0) | np.isclose(ii[:, 1], rect.y1)
        self.boundary_mask = on_bnd
        self.free_mask = ~on_bnd
        self.n_free = int(np.sum(self.free_mask))

    def gradients(self, values: np.ndarray) -> np.ndarray:
        """Per-triangle deformation gradient, shape (n_tris, 2, 2)."""
        ut = values[self.tris]  # (nt, 3, 2)
        F = np.empty((self.n_tris, 2, 2))
        F[:, :, 0] = np.einsum("tk,tkc->tc", self.cx, ut)
        F[:, :, 1] = np.einsum("tk,tkc->tc", self.cy, ut)
        return F


@dataclass
class DiscreteField:
    """Nodal deformed positions, by default pinned to the identity on the
    boundary (the admissible class of the minimization).  ``pinned=False``
    allows analysis fields such as sampled laminates that violate the
    lateral boundary data; :func:`minimize` requires a pinned field."""

    mesh: Mesh
    values: np.ndarray  # (n_nodes, 2)
    pinned: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.mesh.n_nodes, 2)
        b = self.mesh.boundary_mask
        if self.pinned and not np.allclose(self.values[b], self.mesh.nodes[b],
                                           atol=1e-12):
            raise ValueError("boundary nodes must carry identity values")

    @classmethod
    def identity(cls, mesh: Mesh) -> "DiscreteField":
        return cls(mesh, mesh.nodes.copy())


def default_huber_delta(spec: WellSpec) -> float:
    return 1e-6 * spec.alpha


def _huber(t: np.ndarray, delta: float) -> np.ndarray:
    small = t <= delta
    return np.where(small, t * t / (2.0 * delta), t - 0.5 * delta)


def _edge_jumps(mesh: Mesh, F: np.ndarray):
    J = F[mesh.edge_tris[:, 0]] - F[mesh.edge_tris[:, 1]]
    jn = np.sqrt(np.einsum("eij,eij->e", J, J))
    return J, jn


def discrete_energy(field: DiscreteField, spec: WellSpec, eps: float,
                    delta: float | None = None):
    """(elastic, tv, total): per-triangle well distance plus Huberized
    edge-jump total variation; ``total = elastic + eps * tv``."""
    mesh = field.mesh
    delta = default_huber_delta(spec) if delta is None else delta
    A, B = well_matrices(spec)
    F = mesh.gradients(field.values)
    d2, _ = kernels.dist2_two_wells(F, A, B)
    elastic = mesh.tri_area * float(np.sum(d2))
    _, jn = _edge_jumps(mesh, F)
    tv = float(np.sum(mesh.edge_len * _huber(jn, delta)))
    return elastic, tv, elastic + eps * tv


def exact_tv(field: DiscreteField) -> float:
    """Unsmoothed jump total variation of the piecewise-affine field."""
    _, jn = _edge_jumps(field.mesh, field.mesh.gradients(field.values))
    return float(np.sum(field.mesh.edge_len * jn))


def _scatter(mesh: Mesh, dF: np.ndarray) -> np.ndarray:
    """Chain per-triangle dE/dF back to nodal values."""
    contrib = (np.einsum("tc,tk->tkc", dF[:, :, 0], mesh.cx)
               + np.einsum("tc,tk->tkc", dF[:, :, 1], mesh.cy))
    out = np.zeros((mesh.n_nodes, 2))
    np.add.at(out, mesh.tris.ravel(), contrib.reshape(-1, 2))
    return out


def discrete_gradient(field: DiscreteField, spec: WellSpec, eps: float,
                      delta: float | None = None) -> np.ndarray:
    """Exact gradient of :func:`discrete_energy` w.r.t. free nodal values
    (boundary rows are zero).  The nearest-well branch is differentiated,
    ties toward well A."""
    mesh = field.mesh
    delta = default_huber_delta(spec) if delta is None else delta
    A, B = well_matrices(spec)
    F = mesh.gradients(field.values)
    _, dW = kernels.dist2_two_wells_grad(F, A, B)
    dF = mesh.tri_area * dW

    if eps != 0.0:
        J, jn = _edge_jumps(mesh, F)
        w = eps * mesh.edge_len * np.where(jn <= delta, 1.0 / delta,
                                           1.0 / np.maximum(jn, 1e-300))
        dJ = w[:, None, None] * J
        np.add.at(dF, mesh.edge_tris[:, 0], dJ)
        np.add.at(dF, mesh.edge_tris[:, 1], -dJ)

    grad = _scatter(mesh, dF)
    grad[mesh.boundary_mask] = 0.0
    return grad


@dataclass(frozen=True)
class MinimizeOptions:
    max_iter: int = 5000
    grad_tol_scale: float = 1e-8   # tolerance = scale * sqrt(free dof count)
    memory: int = 10
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 40
    delta_huber: float | None = None


@dataclass
class MinimizeResult:
    field: DiscreteField
    energy_trace: np.ndarray
    final_energy: EnergyBreakdown
    iterations: int
    converged: bool
    gradient_norm: float
    status: str  # "gtol" | "stalled" | "max_iter"


def minimize(initial: DiscreteField, spec: WellSpec, eps: float,
             options: MinimizeOptions | None = None) -> MinimizeResult:
    """L-BFGS descent of the Huberized discrete energy from a pinned start.

    Stops when the free-node gradient norm drops below the tolerance
    ("gtol"), when backtracking cannot decrease the energy any further
    ("stalled": numerically at a local minimum of the smoothed energy), or
    at the iteration budget ("max_iter")."""
    opts = options or MinimizeOptions()
    if not initial.pinned:
        raise ValueError("minimization requires an identity-pinned start")
    mesh = initial.mesh
    delta = opts.delta_huber if opts.delta_huber is not None else default_huber_delta(spec)
    free = mesh.free_mask
    tol = opts.grad_tol_scale * math.sqrt(2.0 * mesh.n_free)

    work = DiscreteField(mesh, initial.values.copy())

    def unpack(x):
        work.values[free] = x.reshape(-1, 2)
        return work

    def f_and_g(x):
        fld = unpack(x)
        _, _, tot = discrete_energy(fld, spec, eps, delta)
        g = discrete_gradient(fld, spec, eps, delta)[free].ravel()
        return tot, g

    x = initial.values[free].ravel().copy()
    f, g = f_and_g(x)
    trace = [f]
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    status = "max_iter"
    it = 0
    for it in range(1, opts.max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            status = "gtol"
            break
        # Two-loop recursion.
        q = -g.copy()
        alphas = []
        for s, y in zip(reversed(s_list), reversed(y_list)):
            rho = 1.0 / float(y @ s)
            a = rho * float(s @ q)
            alphas.append((a, rho, s, y))
            q -= a * y
        if y_list:
            y = y_list[-1]
            s = s_list[-1]
            q *= float(s @ y) / float(y @ y)
        for a, rho, s, y in reversed(alphas):
            b = rho * float(y @ q)
            q += (a - b) * s
        d = q
        slope = float(g @ d)
        if slope >= 0.0:
            d = -g
            slope = -float(g @ g)
        # Armijo backtracking.
        t = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            x_new = x + t * d
            f_new, g_new = f_and_g(x_new)
            if f_new <= f + opts.armijo * t * slope:
                accepted = True
                break
            t *= opts.shrink
        if not accepted:
            status = "stalled"
            break
        s_vec = x_new - x
        y_vec = g_new - g
        if float(s_vec @ y_vec) > 1e-300:
            s_list.append(s_vec)
            y_list.append(y_vec)
            if len(s_list) > opts.memory:
                s_list.pop(0)
                y_list.pop(0)
        x, f, g = x_new, f_new, g_new
        trace.append(f)

    final = unpack(x)
    out_field = DiscreteField(mesh, final.values.copy())
    elastic, _, _ = discrete_energy(out_field, spec, eps, delta)
    tvj = exact_tv(out_field)
    breakdown = EnergyBreakdown.combine(elastic, 0.0, tvj, eps, 0.0)
    gnorm = float(np.linalg.norm(g))
    return MinimizeResult(out_field, np.asarray(trace), breakdown, it,
                          status == "gtol", gnorm, status)


def seed_from_construction(def_: PiecewiseDeformation, mesh: Mesh):
    """Sample a construction at the mesh nodes.

    Returns ``(field, notes)``; a note flags meshes too coarse for the
    finest oscillation period of the construction (finer than two grid
    cells along the oscillation axis)."""
    d, r = def_.domain, mesh.rect
    if (abs(d.x0 - r.x0) > 1e-12 or abs(d.y0 - r.y0) > 1e-12
            or abs(d.width - r.width) > 1e-12 or abs(d.height - r.height) > 1e-12):
        raise ValueError("construction domain and mesh rectangle differ")
    u, _ = def_.evaluate(mesh.nodes)
    u[mesh.boundary_mask] = mesh.nodes[mesh.boundary_mask]
    notes = []
    period = def_.meta.get("finest_period")
    if period is not None:
        spacing = mesh.hy if def_.meta.get("period_axis", "y") == "y" else mesh.hx
        if period < 2.0 * spacing:
            notes.append(
                f"under-resolved: finest period {period:.3e} spans fewer than "
                f"two mesh cells (spacing {spacing:.3e})")
    return DiscreteField(mesh, u), notes
