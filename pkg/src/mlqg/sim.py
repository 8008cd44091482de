"""Time integration of the layered PV transport equation.

A State couples the advected PV q, the inverted streamfunction psi, and
the per-layer boundary constants l.  Each step solves the implicit
midpoint-velocity fixed point by Picard iteration: advect q^n along the
velocity of (psi^n + psi^(k))/2, re-invert, and repeat until successive
PV iterates agree.  The structure mirrors the contraction on which the
existence argument for the continuous problem rests, and the stopping
rule is a relative sup-norm test since sup|q| is the quantity the a
priori estimate controls.
"""

from dataclasses import dataclass, field

import numpy as np

from .disk import Field, build_grid, gradient, integrate, laplacian, perp_gradient
from .elliptic import solve_coupled
from .layers import LayerStack
from . import presets
from .transport import CharacteristicTracer, advect_pv

__all__ = [
    "State",
    "DiagnosticsRecord",
    "Trajectory",
    "PicardConvergenceError",
    "SimulationAbort",
    "initialize",
    "picard_step",
    "diagnostics",
    "run",
    "weak_residual",
    "twin_divergence",
    "SeparableTestFunction",
    "default_test_function",
]

MAX_STEP_RETRIES = 5

# numpy 2.0 renamed trapz to trapezoid
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class PicardConvergenceError(RuntimeError):
    """Fixed-point iteration failed; the step should be retried with smaller dt."""

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Picard iteration did not converge in {iterations} sweeps "
            f"(last residual {residual:.3e})"
        )


class SimulationAbort(RuntimeError):
    """Step rejection persisted through all dt halvings."""


@dataclass
class State:
    """Solution snapshot: PV, streamfunction, and boundary constants."""

    time: float
    psi: Field
    q: Field
    l: np.ndarray
    stack: LayerStack

    @property
    def grid(self):
        return self.psi.grid

    def copy(self):
        return State(self.time, self.psi.copy(), self.q.copy(), self.l.copy(), self.stack)


def initialize(grid, stack, q0=None, psi0=None, time=0.0):
    """Build a consistent State from either a PV field or a streamfunction.

    The PV entry is canonical.  A supplied psi0 is first converted to its
    PV and then re-inverted, which projects it onto the constant-boundary,
    zero-mean class.
    """
    if (q0 is None) == (psi0 is None):
        raise ValueError("provide exactly one of q0 and psi0")
    if psi0 is not None:
        lap = laplacian(psi0)
        q0 = Field(
            grid,
            lap.data + np.einsum("ij,jkl->ikl", stack.coupling, psi0.data),
        )
    if q0.n_layers != stack.n_layers:
        raise ValueError(
            f"initial PV has {q0.n_layers} layers, stack has {stack.n_layers}"
        )
    psi, l = solve_coupled(stack, q0)
    return State(time, psi, q0, l, stack)


def consistency_residual(state):
    """max |lap(psi) + L psi - q|, the State's defining relation."""
    lap = laplacian(state.psi, boundary_values=state.l)
    res = (
        lap.data
        + np.einsum("ij,jkl->ikl", state.stack.coupling, state.psi.data)
        - state.q.data
    )
    return float(np.abs(res).max())


def picard_step(
    state,
    forcing,
    dt,
    tol=1e-10,
    max_iter=50,
    monotone=False,
    substeps=None,
    boundary_flux_tol=None,
):
    """Advance one step; returns (new_state, iterations).

    Starting from q^(0) = q^n, each sweep advects q^n with the velocity of
    (psi^n + psi^(k))/2 and re-inverts.  Convergence:
    max|q^(k+1) - q^(k)| <= tol (1 + max|q^(k)|).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = state.grid
    qn, psin, ln = state.q, state.psi, state.l
    q_prev, psi_k, l_k = qn, psin, ln
    res = np.inf
    for k in range(1, max_iter + 1):
        psi_avg = Field(grid, 0.5 * (psin.data + psi_k.data))
        l_avg = 0.5 * (ln + l_k)
        vel = perp_gradient(psi_avg, boundary_values=l_avg)
        tracer = CharacteristicTracer(
            grid, vel, substeps=substeps, boundary_flux_tol=boundary_flux_tol
        )
        q_new = advect_pv(tracer, qn, forcing, state.time, dt, monotone=monotone)
        psi_new, l_new = solve_coupled(state.stack, q_new)
        res = float(np.abs(q_new.data - q_prev.data).max())
        if res <= tol * (1.0 + float(np.abs(q_prev.data).max())):
            return State(state.time + dt, psi_new, q_new, l_new, state.stack), k
        q_prev, psi_k, l_k = q_new, psi_new, l_new
    raise PicardConvergenceError(res, max_iter)


def _attempt_step(state, forcing, dt, config_like):
    """picard_step with rejection handling: halve dt up to MAX_STEP_RETRIES times."""
    for retry in range(MAX_STEP_RETRIES + 1):
        try:
            new_state, _ = picard_step(
                state,
                forcing,
                dt,
                tol=config_like.picard_tol,
                max_iter=config_like.picard_max_iter,
                monotone=config_like.interpolation == "monotone",
            )
            return new_state
        except PicardConvergenceError as exc:
            last = exc
            dt *= 0.5
    raise SimulationAbort(
        f"step at t={state.time:.6g} rejected {MAX_STEP_RETRIES + 1} times; "
        f"smallest dt tried {dt * 2:.3e}: {last}"
    ) from last


@dataclass
class DiagnosticsRecord:
    """Scalar diagnostics of one State; arrays are per layer."""

    time: float
    energy: np.ndarray
    enstrophy: np.ndarray
    pv_min: np.ndarray
    pv_max: np.ndarray
    pv_inf: np.ndarray
    circulation: np.ndarray
    mass: np.ndarray
    boundary: np.ndarray
    total_energy: float
    coupling_energy: float
    modal_energy: np.ndarray


def diagnostics(state):
    grid = state.grid
    stack = state.stack
    psi, q, l = state.psi, state.q, state.l

    g = gradient(psi, boundary_values=l)
    speed2 = Field(grid, g.ux**2 + g.uy**2)
    energy = 0.5 * integrate(speed2)

    enstrophy = integrate(Field(grid, q.data**2))
    circulation = integrate(q)
    mass = integrate(psi)
    pv_min = q.data.min(axis=(1, 2))
    pv_max = q.data.max(axis=(1, 2))
    pv_inf = np.abs(q.data).max(axis=(1, 2))

    coupled = np.einsum("ij,jkl->ikl", stack.coupling, psi.data)
    coupling_energy = -0.5 * float(
        np.sum(integrate(Field(grid, coupled * psi.data)))
    )

    psi_hat = Field(grid, np.einsum("ij,jkl->ikl", stack.modes.T, psi.data))
    l_hat = stack.modes.T @ l
    gh = gradient(psi_hat, boundary_values=l_hat)
    kinetic = 0.5 * integrate(Field(grid, gh.ux**2 + gh.uy**2))
    potential = -0.5 * stack.eigenvalues * integrate(Field(grid, psi_hat.data**2))
    modal_energy = kinetic + potential

    return DiagnosticsRecord(
        time=state.time,
        energy=energy,
        enstrophy=enstrophy,
        pv_min=pv_min,
        pv_max=pv_max,
        pv_inf=pv_inf,
        circulation=circulation,
        mass=mass,
        boundary=l.copy(),
        total_energy=float(np.sum(energy)) + coupling_energy,
        coupling_energy=coupling_energy,
        modal_energy=modal_energy,
    )


@dataclass
class Trajectory:
    """Run output: diagnostics at their cadence, full states at snapshot cadence."""

    grid: object
    stack: LayerStack
    forcing: object
    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    states: list = field(default_factory=list)  # (step index, State)

    @property
    def final_state(self):
        return self.states[-1][1]


def build_initial_pv(config, grid, stack):
    if config.ic_preset == "zero":
        return Field.zeros(grid, stack.n_layers)
    if config.ic_preset == "gaussian_blob":
        return presets.gaussian_blob_pv(
            grid,
            stack.n_layers,
            config.ic_amplitude,
            (config.ic_center_x, config.ic_center_y),
            config.ic_width,
            config.ic_layer_weights or None,
        )
    if config.ic_preset == "radial":
        return presets.radial_pv(
            grid,
            stack.n_layers,
            config.ic_amplitude,
            config.ic_power,
            config.ic_layer_weights or None,
        )
    if config.ic_preset == "manufactured":
        _, q, _ = presets.manufactured_state(
            grid, stack, config.ic_amplitude, config.ic_layer_weights or None
        )
        return q
    raise ValueError(f"unknown ic preset {config.ic_preset!r}")


def build_forcing(config, stack):
    if config.forcing_preset == "none":
        return None
    if config.forcing_preset == "constant":
        return presets.ConstantForcing(
            stack.n_layers,
            config.forcing_amplitude,
            config.forcing_layer_weights or None,
        )
    if config.forcing_preset == "rotating_dipole":
        return presets.RotatingDipoleForcing(
            stack.n_layers,
            config.forcing_amplitude,
            config.forcing_frequency,
            config.forcing_layer_weights or None,
        )
    raise ValueError(f"unknown forcing preset {config.forcing_preset!r}")


def run(config):
    """Run the configured simulation; deterministic for a given config."""
    grid = build_grid(config.n_r, config.n_theta)
    stack = LayerStack(config.n_layers, config.froude)
    q0 = build_initial_pv(config, grid, stack)
    forcing = build_forcing(config, stack)
    state = initialize(grid, stack, q0=q0)

    traj = Trajectory(grid=grid, stack=stack, forcing=forcing)
    traj.times.append(state.time)
    traj.records.append(diagnostics(state))
    traj.states.append((0, state))

    t_end = config.t_end
    eps = 1e-12 * max(1.0, t_end)
    step = 0
    while state.time < t_end - eps:
        dt_step = min(config.dt, t_end - state.time)
        state = _attempt_step(state, forcing, dt_step, config)
        step += 1
        last = not state.time < t_end - eps
        if step % config.diagnostics_every == 0 or last:
            traj.times.append(state.time)
            traj.records.append(diagnostics(state))
        if (config.snapshot_every > 0 and step % config.snapshot_every == 0) or last:
            traj.states.append((step, state))
    return traj


class SeparableTestFunction:
    """Space-time test function w_i S(x, y) g(t) with analytic derivatives.

    S must vanish on the boundary circle and g at the final time, as the
    weak formulation requires.
    """

    def __init__(self, spatial, spatial_grad, temporal, temporal_dt, weights):
        self.spatial = spatial
        self.spatial_grad = spatial_grad
        self.temporal = temporal
        self.temporal_dt = temporal_dt
        self.weights = np.asarray(weights, dtype=float)


def default_test_function(t_final, n_layers):
    """phi_i = w_i (1 - r^2) cos(pi t / (2 T)): vanishes on dM and at t = T."""
    w = 1.0 - 0.3 * np.arange(n_layers)
    half_pi_over_t = 0.5 * np.pi / t_final
    return SeparableTestFunction(
        spatial=lambda x, y: 1.0 - x**2 - y**2,
        spatial_grad=lambda x, y: (-2.0 * x, -2.0 * y),
        temporal=lambda t: np.cos(half_pi_over_t * t),
        temporal_dt=lambda t: -half_pi_over_t * np.sin(half_pi_over_t * t),
        weights=w,
    )


def weak_residual(trajectory, test_function):
    """Space-time quadrature residual of the weak form along a trajectory.

    Computes | -Int q(0) phi(0) - IntInt q dphi/dt - IntInt q (u . grad phi)
    - IntInt f phi | with q = lap(psi) + L psi recomputed from the stored
    states, trapezoidal in time over the stored snapshots.
    """
    grid = trajectory.grid
    stack = trajectory.stack
    phi = test_function

    xs, ys = grid.xs, grid.ys
    s_vals = phi.spatial(xs, ys)
    gx, gy = phi.spatial_grad(xs, ys)
    w_layers = phi.weights

    times = np.array([s.time for _, s in trajectory.states])
    interior = np.empty(times.size)
    initial_term = 0.0
    for m, (_, state) in enumerate(trajectory.states):
        qh = (
            laplacian(state.psi, boundary_values=state.l).data
            + np.einsum("ij,jkl->ikl", stack.coupling, state.psi.data)
        )
        u = perp_gradient(state.psi, boundary_values=state.l)
        g_t = phi.temporal_dt(state.time)
        g_v = phi.temporal(state.time)

        # sum over layers of Int q (dphi/dt + u . grad phi) + Int f phi
        dphi_dt = g_t * s_vals[None] * w_layers[:, None, None]
        adv = g_v * (u.ux * gx[None] + u.uy * gy[None]) * w_layers[:, None, None]
        total = qh * (dphi_dt + adv)
        if trajectory.forcing is not None:
            f = trajectory.forcing.on_grid(grid, state.time)
            total = total + f.data * g_v * s_vals[None] * w_layers[:, None, None]
        interior[m] = float(np.sum(integrate(Field(grid, total))))

        if m == 0:
            phi0 = phi.temporal(state.time) * s_vals[None] * w_layers[:, None, None]
            initial_term = float(np.sum(integrate(Field(grid, qh * phi0))))

    return abs(-initial_term - _trapezoid(interior, times))


def twin_divergence(config, delta):
    """H1-seminorm separation of a run and its delta-perturbed twin.

    The perturbation is a smooth seeded field added to the initial PV.
    Returns (times, norms) with norms[k, i] the layer-i seminorm of
    h# = (psi_A - psi_B) - (l_A - l_B) at times[k]; for delta = 0 the
    series is identically zero because the runs are bit-identical.
    """
    grid = build_grid(config.n_r, config.n_theta)
    stack = LayerStack(config.n_layers, config.froude)
    q0 = build_initial_pv(config, grid, stack)
    forcing = build_forcing(config, stack)

    if delta != 0.0:
        pert = presets.perturbation_field(grid, stack.n_layers, config.seed)
        qb = Field(grid, q0.data + delta * pert.data)
    else:
        qb = q0.copy()

    state_a = initialize(grid, stack, q0=q0)
    state_b = initialize(grid, stack, q0=qb)

    def separation():
        h = state_a.psi.data - state_b.psi.data
        shift = state_a.l - state_b.l
        hs = Field(grid, h - shift[:, None, None])
        g = gradient(hs, boundary_values=np.zeros(stack.n_layers))
        return np.sqrt(integrate(Field(grid, g.ux**2 + g.uy**2)))

    times = [0.0]
    norms = [separation()]
    t_end = config.t_end
    eps = 1e-12 * max(1.0, t_end)
    kwargs = dict(
        tol=config.picard_tol,
        max_iter=config.picard_max_iter,
        monotone=config.interpolation == "monotone",
    )
    while state_a.time < t_end - eps:
        dt_step = min(config.dt, t_end - state_a.time)
        # lockstep, no per-run dt adaptation: the twins must share the exact
        # step sequence or the comparison is at mismatched times
        state_a, _ = picard_step(state_a, forcing, dt_step, **kwargs)
        state_b, _ = picard_step(state_b, forcing, dt_step, **kwargs)
        times.append(state_a.time)
        norms.append(separation())
    return np.array(times), np.stack(norms)
