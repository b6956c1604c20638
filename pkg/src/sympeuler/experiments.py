"""Scripted experiments and numerical probes.

Three families:

* a 2D Euler vorticity-stream oracle used to cross-check the n=1 solver
  (the two systems coincide there);
* bounded-constant probes for the Riesz commutator, the disjoint-support
  norm inequality, and the logarithmic multiplier estimate;
* the nonuniform-dependence experiment: shrinking symplectic bumps v_k
  around a point x_star plus a fixed probe direction w_star/k separate
  the time-1 flows by ~m_star/k while the initial distance is 1/k.

All constants in the experiment (C1..C5, m_star) are measured, logged in
a JSON sidecar, and never asserted a priori.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile

import numpy as np

from .eulerian import (
    cfl_timestep,
    dt_for_speed,
    integrate,
    max_speed,
    step_count,
    write_diagnostics_csv,
)
from .fields import ScalarField, VectorField
from .grids import GridSpec
from .initial_conditions import (
    bump,
    bump_symplectic,
    constant_field,
    random_symplectic,
    random_vector,
    scale_to_sobolev,
    trig_potential,
)
from .lagrangian import DiffeoMap, compose, flow_from_velocity, invert
from .operators import (
    riesz_commutator_ratio,
    symplectic_divergence,
    symplectic_gradient,
)
from .spectral import (
    dealias_mask,
    derivative_symbol,
    lebesgue_norms,
    riesz_transform,
    sobolev_norm,
    two_thirds_truncate,
)

__all__ = [
    "ResolutionGuardError",
    "build_bump_potential",
    "oracle_2d_solve",
    "disjoint_support_probe",
    "log_estimate_probe",
    "log_probe_family",
    "commutator_sweep",
    "probe_report",
    "NonuniformConfig",
    "NonuniformRow",
    "NonuniformReport",
    "exp_via_flow",
    "find_probe_direction",
    "build_nonuniform_config",
    "run_nonuniform",
]


class ResolutionGuardError(RuntimeError):
    """Requested scales cannot be resolved on the given grid."""


def build_bump_potential(center, radius: float, grid: GridSpec) -> ScalarField:
    """Smooth compactly supported bump; radius must be < box_length/4."""
    return bump(grid, center, radius)


# ---------------------------------------------------------------------------
# 2D Euler oracle (n = 1)


def oracle_2d_solve(u0: VectorField, t_final: float, dt: float) -> VectorField:
    """Vorticity-stream pseudo-spectral 2D Euler; independent of the
    constraint-force code path."""
    grid = u0.grid
    if grid.n != 1:
        raise ValueError("oracle is specific to n=1 (two dimensions)")
    steps = step_count(t_final, dt)
    d1 = derivative_symbol(grid, 0)
    d2 = derivative_symbol(grid, 1)
    xi2 = grid.frequency_squared
    with np.errstate(divide="ignore"):
        inv_lap = np.where(xi2 > 0.0, -1.0 / np.where(xi2 > 0.0, xi2, 1.0), 0.0)
    mask = dealias_mask(grid)
    mean = u0.values.mean(axis=(1, 2))

    def velocity(zeta_hat):
        psi_hat = inv_lap * zeta_hat
        u1 = np.real(np.fft.ifft2(-d2 * psi_hat))
        u2 = np.real(np.fft.ifft2(d1 * psi_hat))
        return u1 + mean[0], u2 + mean[1]

    def rhs(zeta_hat):
        u1, u2 = velocity(zeta_hat)
        gz1 = np.real(np.fft.ifft2(d1 * zeta_hat))
        gz2 = np.real(np.fft.ifft2(d2 * zeta_hat))
        return -np.fft.fft2(u1 * gz1 + u2 * gz2) * mask

    u_hat = np.fft.fft2(u0.values, axes=(1, 2))
    zeta_hat = (d1 * u_hat[1] - d2 * u_hat[0]) * mask
    for _ in range(steps):
        k1 = rhs(zeta_hat)
        k2 = rhs(zeta_hat + 0.5 * dt * k1)
        k3 = rhs(zeta_hat + 0.5 * dt * k2)
        k4 = rhs(zeta_hat + dt * k3)
        zeta_hat = zeta_hat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(zeta_hat)):
            raise RuntimeError("oracle produced NaN/Inf")
    u1, u2 = velocity(zeta_hat)
    return VectorField(grid, np.stack([u1, u2]))


# ---------------------------------------------------------------------------
# probes


def disjoint_support_probe(sigma: float, d: float, grid: GridSpec,
                           second_amplitude: float = 1.0) -> float:
    """(||f||_{H^sigma} + ||g||_{H^sigma}) / ||f+g||_{H^sigma} for bumps
    of radius d/4 centered d apart; second_amplitude=0 degenerates to 1."""
    if not 0 < d <= grid.box_length / 4:
        raise ValueError("d must lie in (0, box_length/4]")
    if d / 4 < 4 * grid.spacing:
        raise ResolutionGuardError(
            f"bump radius {d / 4:.4g} under 4 grid cells")
    center = np.full(grid.dim, grid.box_length / 2)
    p1, p2 = center.copy(), center.copy()
    p1[0] -= d / 2
    p2[0] += d / 2
    f = bump(grid, p1, d / 4)
    g = bump(grid, p2, d / 4, amplitude=second_amplitude)
    total = ScalarField(grid, f.values + g.values)
    return ((sobolev_norm(f, sigma) + sobolev_norm(g, sigma))
            / sobolev_norm(total, sigma))


def log_estimate_probe(f: ScalarField, s: float):
    """LHS and RHS ingredients of the logarithmic multiplier bound with
    T(D) = R_1 R_2; returns (lhs, (1, ||f||_L2, ||f||_Linf, ||f||_Linf *
    ln(1+||f||_{H^{s-1}})))."""
    tf = riesz_transform(riesz_transform(f, 0), 1)
    _, lhs = lebesgue_norms(tf)
    l2, linf = lebesgue_norms(f)
    hs1 = sobolev_norm(f, s - 1.0)
    return lhs, (1.0, l2, linf, linf * math.log1p(hs1))


def log_probe_family(grid: GridSpec, level: int) -> ScalarField:
    """sum_{j<=level} sin(2^j x_1) sin(2^j x_2) / j, scaled to the box.

    Diagonal modes keep the multiplier R_1 R_2 active (pure-x_1 waves
    lie in its kernel); the H^{s-1} norm grows like 4^level so the log
    term is exercised.
    """
    coords = grid.coordinate_arrays()
    xi0 = 2.0 * np.pi / grid.box_length
    vals = np.zeros(grid.shape)
    for j in range(1, level + 1):
        k = 2 ** j
        vals = vals + np.sin(k * xi0 * coords[0]) * np.sin(k * xi0 * coords[1]) / j
    return ScalarField(grid, vals)


def commutator_sweep(grid: GridSpec, s: float, seed: int,
                     wavenumbers) -> list[float]:
    """Commutator probe ratios for f = sin(k x_1), fixed random u."""
    u = random_symplectic(grid, seed=seed, decay=0.6, s=s, norm=1.0)
    xi0 = 2.0 * np.pi / grid.box_length
    x1 = grid.coordinate_arrays()[0]
    out = []
    for k in wavenumbers:
        f = ScalarField(grid, np.broadcast_to(
            np.sin(k * xi0 * x1), grid.shape).copy())
        out.append(riesz_commutator_ratio(u, f, axis=1, s=s))
    return out


def _prefix_stability(values) -> float:
    """max over the first half divided by max over the whole sweep."""
    values = list(values)
    half = max(values[: max(1, len(values) // 2)])
    full = max(values)
    return half / full


def probe_report(grid: GridSpec | None = None, s: float = 3.0,
                 seed: int = 2024) -> dict:
    """Runs the three probe sweeps; returns fitted constants and their
    half-sweep stability ratios (1.0 = perfectly stable)."""
    if grid is None:
        grid = GridSpec(n=1, points_per_axis=128)
    band = (grid.points_per_axis - 1) // 3

    waves = list(range(1, band + 1, max(1, band // 16)))
    comm = commutator_sweep(grid, s, seed, waves)

    # wide box so the canonical sweep distances satisfy d <= L/4
    wide = GridSpec(n=1, points_per_axis=512, box_length=4.0 * np.pi)
    distances = [0.5, 1.0, 2.0]
    disjoint = [disjoint_support_probe(s, d, wide) for d in distances]

    max_level = int(math.floor(math.log2(band / math.sqrt(2.0))))
    log_rows = []
    for level in range(1, max_level + 1):
        lhs, terms = log_estimate_probe(log_probe_family(grid, level), s)
        log_rows.append(lhs / sum(terms))

    return {
        "commutator": {
            "constant": max(comm),
            "stability": _prefix_stability(comm),
            "sweep": comm,
            "wavenumbers": waves,
        },
        "disjoint_support": {
            "constant": max(disjoint),
            "stability": _prefix_stability(disjoint),
            "sweep": disjoint,
            "distances": distances,
        },
        "log_estimate": {
            "constant": max(log_rows),
            "stability": _prefix_stability(log_rows),
            "sweep": log_rows,
            "levels": list(range(1, max_level + 1)),
        },
    }


# ---------------------------------------------------------------------------
# nonuniform-dependence experiment


def exp_via_flow(u0: VectorField, cfl: float = 0.7, cutoff_radius: float = 1.0,
                 dt: float | None = None) -> DiffeoMap:
    """Time-1 flow map of the Eulerian solution (equivalent to the
    geodesic exponential; much cheaper for repeated probing).

    Finite-difference probes of exp must pass a shared dt: integrator
    error is odd in a velocity boost, so it cancels between matched +eps
    and -eps runs but not between runs with independently chosen steps.
    """
    if dt is None:
        dt = cfl_timestep(u0, 1.0, cfl)
    result = integrate(u0, 1.0, dt, cutoff_radius=cutoff_radius,
                       diag_every=10 ** 9, record_velocity=True)
    return flow_from_velocity(result.velocities, dt)


def find_probe_direction(u_star: VectorField, candidates, epsilon: float,
                         exp_evaluator=exp_via_flow):
    """Central-difference directional derivative of exp at u_star; picks
    the candidate and point with the largest response.

    Returns (w_star, x_star, m_star, index). Candidates must be
    H^s-normalized (checked at s inferred from ||.||=1 being scale-free:
    the caller's normalization is trusted to 1e-8).
    """
    grid = u_star.grid
    best = None
    for idx, w in enumerate(candidates):
        plus = exp_evaluator(VectorField(grid, u_star.values + epsilon * w.values))
        minus = exp_evaluator(VectorField(grid, u_star.values - epsilon * w.values))
        delta = (plus.displacement.values - minus.displacement.values) / (2 * epsilon)
        mag = np.sqrt(np.einsum("i...,i...->...", delta, delta))
        m_here = float(mag.max())
        if best is None or m_here > best[0]:
            best = (m_here, idx, mag)
    m_star, idx, mag = best
    if m_star < 1e-6:
        raise RuntimeError("all candidates gave derivative below 1e-6; "
                           "pick a different base point")
    # tie-break toward the box center (keeps experiment data central)
    coords = np.stack(np.broadcast_arrays(*grid.coordinate_arrays()))
    tied = mag >= m_star * (1.0 - 1e-12)
    center = grid.box_length / 2.0
    dist2 = np.sum((coords - center) ** 2, axis=0)
    flat = int(np.argmin(np.where(tied, dist2, np.inf)))
    idx_nd = np.unravel_index(flat, grid.shape)
    x_star = np.array([grid.axis_coordinates[i] for i in idx_nd])
    return candidates[idx], x_star, m_star, idx


@dataclasses.dataclass
class NonuniformConfig:
    grid: GridSpec
    s: float
    R: float
    R_used: float
    K: int
    x_star: np.ndarray
    base_potential: ScalarField
    bump_potential: ScalarField
    u_star: VectorField
    w_star: VectorField
    m_star: float
    radii: np.ndarray
    constants: dict
    cutoff_radius: float = 1.0


@dataclasses.dataclass
class NonuniformRow:
    k: int
    input_dist_hs: float
    output_gap_hs: float
    sdiv_gap_hsm1: float
    separation: float
    r_k: float


@dataclasses.dataclass
class NonuniformReport:
    rows: list
    constants: dict

    COLUMNS = ("k", "input_dist_hs", "output_gap_hs", "sdiv_gap_hsm1",
               "separation", "r_k")

    def write_csv(self, path) -> None:
        records = [_RowAdapter(r) for r in self.rows]
        write_diagnostics_csv(path, records, columns=self.COLUMNS)

    def write_json(self, path) -> None:
        payload = json.dumps(self.constants, indent=2, sort_keys=True)
        _atomic_write_text(path, payload + "\n")


class _RowAdapter:
    def __init__(self, row: NonuniformRow):
        self._row = row

    def row(self):
        return tuple(getattr(self._row, c) for c in NonuniformReport.COLUMNS)


def _atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _candidate_builders(s: float):
    """Unit-H^s candidate directions, buildable on any grid."""

    def const(direction):
        def build(grid):
            return scale_to_sobolev(constant_field(grid, direction), s, 1.0)
        return build

    def trig(grid):
        H = trig_potential(grid, [{"amplitude": 1.0,
                                   "mode": [1] * grid.dim, "phase": 0.0}])
        return scale_to_sobolev(symplectic_gradient(H), s, 1.0)

    return [("constant_0", const(0)), ("constant_1", const(1)),
            ("trig_diag", trig)]


def _flow_lipschitz(phi: DiffeoMap) -> float:
    """Max over grid points of the spectral norm of d(phi) = I + d(disp)."""
    J = phi.jacobian_matrix()
    d = J.shape[0]
    mats = np.moveaxis(J.reshape(d, d, -1), -1, 0)
    return float(np.linalg.svd(mats, compute_uv=False)[:, 0].max())


def _measure_constants(u_star: VectorField, R: float, s: float, seed: int,
                       w_star: VectorField, delta: VectorField,
                       exp_evaluator, exp_evaluator_fine=None) -> dict:
    """Empirical analogues of the composition/exponential constant chain
    on the radius-R ball around u_star."""
    grid = u_star.grid
    rng_seed = seed + 17

    center_map = exp_evaluator(u_star)
    p_w = VectorField(grid, u_star.values + 0.5 * R * w_star.values)
    p_d = VectorField(grid, u_star.values + 0.5 * R * delta.values)
    map_w = exp_evaluator(p_w)
    map_d = exp_evaluator(p_d)

    # C2: Lipschitz constant of the flow maps themselves
    c2 = max(_flow_lipschitz(m) for m in (center_map, map_w, map_d))

    # C1: norm equivalence under composition with phi^{-1}; the boosted
    # map is near a rigid translation, so include the deformed one too
    c1 = 1.0
    for phi in (map_w, map_d):
        inv = invert(phi)
        for probe_seed in (rng_seed + 1, rng_seed + 2):
            f = random_vector(grid, seed=probe_seed, decay=1.0, s=s, norm=1.0)
            composed = compose(f, inv)
            num = sobolev_norm(f, s - 1.0)
            den = sobolev_norm(composed, s - 1.0)
            c1 = max(c1, num / den, den / num)

    # C4: Lipschitz modulus of exp on the sampled pairs
    pairs = [(p_w, u_star, map_w, center_map), (p_d, u_star, map_d, center_map),
             (p_w, p_d, map_w, map_d)]
    c4 = 0.0
    for pa, pb, ma, mb in pairs:
        dmap = VectorField(grid, ma.displacement.values - mb.displacement.values)
        dvel = VectorField(grid, pa.values - pb.values)
        c4 = max(c4, sobolev_norm(dmap, s) / sobolev_norm(dvel, s))

    # C3: second derivative of exp along sampled directions. Uses the
    # refined-step evaluator when given: the integrator's error is even
    # along a boost, so the second difference keeps its O(dt^4) part
    fine = exp_evaluator_fine if exp_evaluator_fine is not None else exp_evaluator
    center_fine = fine(u_star)
    c3 = 0.0
    eps = 0.25 * R
    for h in (w_star, delta):
        plus = fine(VectorField(grid, u_star.values + eps * h.values))
        minus = fine(VectorField(grid, u_star.values - eps * h.values))
        second = (plus.displacement.values + minus.displacement.values
                  - 2.0 * center_fine.displacement.values) / eps**2
        c3 = max(c3, sobolev_norm(VectorField(grid, second), s))

    # C5: embedding |w(x)| <= C5 ||w||_{H^s}, constants included
    c5 = 0.0
    for f in (w_star, delta,
              random_vector(grid, seed=rng_seed + 3, decay=1.0, s=s, norm=1.0)):
        mag = np.sqrt(np.einsum("i...,i...->...", f.values, f.values))
        c5 = max(c5, float(mag.max()) / sobolev_norm(f, s))

    return {"C1": float(c1), "C2": float(c2), "C3": float(c3),
            "C4": float(c4), "C5": float(c5)}


def build_nonuniform_config(grid: GridSpec | None = None,
                            probe_grid: GridSpec | None = None,
                            s: float = 3.0, R: float = 0.5, K: int = 6,
                            seed: int = 7, epsilon: float = 0.05,
                            cfl: float = 0.7,
                            exp_evaluator=None) -> NonuniformConfig:
    """Measures m_star, x_star and the constant chain on the probe grid,
    then assembles the main-grid configuration with the radius sequence
    r_k = m_star / (8 k C2) and its resolution guards."""
    if grid is None:
        grid = GridSpec(n=1, points_per_axis=256, box_length=0.75)
    if probe_grid is None:
        probe_grid = GridSpec(n=grid.n, points_per_axis=grid.points_per_axis // 2,
                              box_length=grid.box_length)

    L = grid.box_length
    center = np.full(grid.dim, L / 2.0)
    base_radius = 0.22 * L

    def u_star_on(g: GridSpec) -> VectorField:
        # band-limit: frozen super-band modes would break the translation
        # equivariance of the dealiased dynamics at H^s-visible size
        raw = two_thirds_truncate(bump_symplectic(g, center, base_radius))
        return scale_to_sobolev(raw, s, 1.0)

    builders = _candidate_builders(s)
    probe_candidates = [b(probe_grid) for _, b in builders]
    u_star_probe = u_star_on(probe_grid)
    delta = random_symplectic(probe_grid, seed=seed + 17, decay=1.0, s=s,
                              norm=1.0)
    exp_evaluator_fine = None
    if exp_evaluator is None:
        # one dt for every probe-phase solve; see exp_via_flow
        speed = max_speed(u_star_probe) + max(epsilon, 0.5 * R) * max(
            max_speed(f) for f in probe_candidates + [delta])
        probe_dt = dt_for_speed(probe_grid, speed, 1.0, cfl)
        fine_dt = dt_for_speed(probe_grid, speed, 1.0, 0.5 * cfl)
        exp_evaluator = lambda u: exp_via_flow(u, dt=probe_dt)
        exp_evaluator_fine = lambda u: exp_via_flow(u, dt=fine_dt)

    _, x_star, m_star, idx = find_probe_direction(
        u_star_probe, probe_candidates, epsilon, exp_evaluator)
    w_star_probe = probe_candidates[idx]

    constants = _measure_constants(u_star_probe, R, s, seed, w_star_probe,
                                   delta, exp_evaluator, exp_evaluator_fine)
    c3c5 = constants["C3"] * constants["C5"]
    r_used = min(R, m_star / (16.0 * c3c5)) if c3c5 > 0 else R

    radii = m_star / (8.0 * np.arange(1, K + 1) * constants["C2"])
    if radii[0] >= L / 4.0:
        raise ResolutionGuardError(
            f"r_1={radii[0]:.4g} exceeds box_length/4={L / 4:.4g}")
    if radii[-1] < 8.0 * grid.spacing:
        raise ResolutionGuardError(
            f"r_K={radii[-1]:.4g} spans under 8 grid cells "
            f"(spacing {grid.spacing:.4g})")

    w_star = builders[idx][1](grid)
    base_potential = bump(grid, center, base_radius)
    constants.update({
        "m_star": float(m_star),
        "x_star": [float(v) for v in x_star],
        "R": float(R),
        "R_used": float(r_used),
        "s": float(s),
        "K": int(K),
        "candidate": builders[idx][0],
        "radii": [float(r) for r in radii],
        "probe_points_per_axis": probe_grid.points_per_axis,
    })
    return NonuniformConfig(
        grid=grid, s=s, R=R, R_used=r_used, K=K, x_star=x_star,
        base_potential=base_potential,
        bump_potential=bump(grid, x_star, radii[0]),
        u_star=u_star_on(grid), w_star=w_star, m_star=m_star,
        radii=radii, constants=constants)


def run_nonuniform(config: NonuniformConfig, cfl: float = 0.7,
                   csv_path=None, json_path=None,
                   progress=None) -> NonuniformReport:
    """Runs the K paired time-1 solves and assembles the report.

    Asserts the separation bracket m_star/(2k) <= |phi_tilde(x_star) -
    phi(x_star)| <= 3 m_star/k; everything else is recorded, not judged.
    """
    grid, s = config.grid, config.s
    pts = config.x_star.reshape(-1, 1)
    rows = []
    for k in range(1, config.K + 1):
        r_k = float(config.radii[k - 1])
        vk_raw = bump_symplectic(grid, config.x_star, r_k)
        v_k = scale_to_sobolev(vk_raw, s, config.R_used / 2.0)
        u0 = VectorField(grid, config.u_star.values + v_k.values)
        u0_tilde = VectorField(grid, u0.values + config.w_star.values / k)
        runs = []
        for w in (u0, u0_tilde):
            dt = cfl_timestep(w, 1.0, cfl)
            runs.append(integrate(w, 1.0, dt, cutoff_radius=config.cutoff_radius,
                                  diag_every=10 ** 9, trace_points=pts))
        base, tilde = runs
        input_dist = sobolev_norm(
            VectorField(grid, u0_tilde.values - u0.values), s)
        diff = VectorField(grid, tilde.state.u.values - base.state.u.values)
        output_gap = sobolev_norm(diff, s)
        sdiv_gap = sobolev_norm(
            ScalarField(grid, symplectic_divergence(tilde.state.u).values
                        - symplectic_divergence(base.state.u).values),
            s - 1.0)
        separation = float(np.linalg.norm(tilde.trace[-1] - base.trace[-1]))
        lower, upper = config.m_star / (2.0 * k), 3.0 * config.m_star / k
        if not lower <= separation <= upper:
            raise RuntimeError(
                f"k={k}: separation {separation:.6g} outside "
                f"[{lower:.6g}, {upper:.6g}]")
        rows.append(NonuniformRow(k, input_dist, output_gap, sdiv_gap,
                                  separation, r_k))
        if progress is not None:
            progress(rows[-1])
    constants = dict(config.constants)
    gaps = [r.output_gap_hs for r in rows]
    constants["gap_floor"] = min(gaps)
    constants["gap_floor_over_k1"] = min(gaps) / gaps[0]
    constants["C_floor"] = constants["C1"] * constants["C4"]
    report = NonuniformReport(rows, constants)
    if csv_path is not None:
        report.write_csv(csv_path)
    if json_path is not None:
        report.write_json(json_path)
    return report
