"""Modal engine: fundamental solutions, trajectory reconstruction from
modal constants, epoch remapping, maneuver constraints, the stationary
plane of the spherical reduced coordinates, and variation of the
constants under control or extra forces.

All trajectory-level evaluations run in the theta domain
(x(theta) = sum_i c_i P(theta) v_i, plus the drift chain); the constants
dynamics integrate in the time domain.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .floquet import (ModalConstants, balanced_solve, eigvecs_closed,
                      is_epoch_singular, lf_transform, lti_closed,
                      modal_constants, qns_r21)
from .orbit import eval_at_theta, shorthand_abc, time_to_theta


@dataclass(frozen=True)
class ModeSampler:
    """One fundamental solution; callable over unwrapped theta."""

    mode_index: int        # 1..6
    eval_fn: object
    secular: bool

    def __call__(self, theta):
        return self.eval_fn(theta)


@dataclass(frozen=True)
class StationaryPlane:
    """Geometry of the reduced spherical coordinates.

    The active block rho = (chi1, chi4, chi5) obeys
    rho' = alpha (rho . n_vec) zeta with zeta . n_vec = 0, so rho . n_vec
    is conserved and motion starting on the plane rho . n_vec = 0 stays
    fixed. chi2 integrates alpha Cq (Bq+1)^2 / (gamma a) times the same
    conserved quantity; chi3 and chi6 are constant.
    """

    n_vec: np.ndarray
    zeta: np.ndarray
    alpha: float
    R_f: np.ndarray
    chi2_coeff: float

    def rho_rate(self, rho):
        return self.alpha * float(np.dot(rho, self.n_vec)) * self.zeta

    def chi2_rate(self, rho):
        return self.chi2_coeff * float(np.dot(rho, self.n_vec))


@dataclass(frozen=True)
class FamilyMember:
    """One bounded trajectory of a position-anchored one-parameter family."""

    xdot0: float
    ydot0: float
    state0: np.ndarray
    constants: ModalConstants


def _modal_factors(chief, domain, indep="theta"):
    p = lf_transform(chief, domain, indep)
    sys = lti_closed(chief, domain, indep)
    return p, sys


def modal_state_matrix(chief, domain, theta, p=None, sys=None):
    """Psi(theta) = P(theta) V (I + (theta-theta0) E_56): maps constants to
    the state at theta. Built on the theta-domain reduction."""
    if p is None or sys is None:
        p, sys = _modal_factors(chief, domain)
    dtheta = theta - chief.theta0
    m = sys.V.copy()
    m[:, 5] += dtheta * sys.V[:, 4]
    return p(theta) @ m


def reconstruct(chief, constants, theta, domain=None, p=None, sys=None):
    """State at theta from modal constants (theta may be an array)."""
    domain = domain or constants.domain
    if p is None or sys is None:
        p, sys = _modal_factors(chief, domain)
    c = constants.as_array() if hasattr(constants, "as_array") else np.asarray(constants)
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty((thetas.size, 6))
    for j, th in enumerate(thetas):
        out[j] = modal_state_matrix(chief, domain, th, p, sys) @ c
    return out[0] if np.isscalar(theta) else out


def extract_constants(chief, state, theta, domain, p=None, sys=None):
    """Constants whose modal solution passes through `state` at theta.

    At theta = theta0 this reduces to the balanced solve against V; the
    closed-form route is modal_constants.
    """
    if p is None or sys is None:
        p, sys = _modal_factors(chief, domain)
    m = sys.V.copy()
    m[:, 5] += (theta - chief.theta0) * sys.V[:, 4]
    chi = np.linalg.solve(p(theta), np.asarray(state, dtype=float))
    c = balanced_solve(m, chi)
    return ModalConstants(c=c, domain=domain, theta0=chief.theta0,
                          regularized=sys.regularized)


def build_mode_samplers(chief, domain):
    """The six fundamental solutions in the requested coordinates."""
    p, sys = _modal_factors(chief, domain)
    samplers = []
    for i in range(6):
        if i == 5:
            def eval_fn(theta, _p=p, _v=sys.V):
                return _p(theta) @ (_v[:, 4] * (theta - chief.theta0) + _v[:, 5])
            secular = True
        else:
            def eval_fn(theta, _p=p, _vi=sys.V[:, i]):
                return _p(theta) @ _vi
            secular = False
        samplers.append(ModeSampler(mode_index=i + 1, eval_fn=eval_fn,
                                    secular=secular))
    return samplers


def mode_trajectory(chief, mode_index, theta_grid, domain, normalize=False):
    """Sample one fundamental solution on a theta grid.

    With normalize=True the whole 6-vector is divided by the largest
    position norm on the grid, so the maximum relative distance is one.
    """
    if not 1 <= mode_index <= 6:
        raise ValueError("mode index must be 1..6")
    sampler = build_mode_samplers(chief, domain)[mode_index - 1]
    theta_grid = np.asarray(theta_grid, dtype=float)
    out = np.empty((theta_grid.size, 6))
    for j, th in enumerate(theta_grid):
        out[j] = sampler(th)
    if normalize:
        scale = np.max(np.linalg.norm(out[:, :3], axis=1))
        if scale > 0.0:
            out = out / scale
    return out


def rebase_chief(chief, theta0_new):
    """Same orbit with the epoch moved to theta0_new (t = 0 there)."""
    return dataclasses.replace(chief, theta0=theta0_new)


def remap_epoch(chief, constants, theta0_new):
    """Constants of the same physical trajectory for a new epoch angle.

    c' = V'(theta0')^-1 Phi(theta0', theta0) V(theta0) c, where Phi is the
    state transition matrix in the local coordinates and V' belongs to the
    rebased chief. Reconstructing with the rebased chief and the returned
    constants reproduces the original trajectory.
    """
    domain = constants.domain
    p, sys = _modal_factors(chief, domain)
    dtheta = theta0_new - chief.theta0
    # Phi(theta0', theta0) = P(theta0') (I + R dtheta)
    phi = p(theta0_new) @ (np.eye(6) + sys.R * dtheta)
    chief_new = rebase_chief(chief, theta0_new)
    v_new = eigvecs_closed(chief_new, domain, regularize=True)
    c_new = balanced_solve(v_new, phi @ sys.V @ constants.as_array())
    return ModalConstants(
        c=c_new, domain=domain, theta0=theta0_new,
        regularized=constants.regularized or is_epoch_singular(chief_new),
    )


def no_drift_maneuver_line(chief, theta=None):
    """Unit in-plane direction along which an impulse leaves the drift
    constant unchanged: dv_y = -(vr/vt) dv_x at the maneuver point."""
    if theta is None:
        theta = chief.theta0
    st = eval_at_theta(chief, theta)
    d = np.array([1.0, -st.vr / st.vt])
    return d / np.linalg.norm(d)


def stationary_plane(chief):
    """Stationary-plane geometry of the reduced spherical coordinates."""
    sh = shorthand_abc(chief)
    a_, b_, c_ = sh.Aq, sh.Bq, sh.Cq
    ga = sh.gamma * chief.a
    alpha = 2.0 * qns_r21(chief) * chief.a / sh.gamma
    n_vec = np.array([(b_ + 2.0) / c_, a_, ga])
    zeta = np.array([a_ * c_, b_, -2.0 * a_ * (b_ + 1.0) / ga])
    r_f = alpha * np.array([
        a_ * c_, c_ * (b_ + 1.0) ** 2 / ga, 0.0,
        b_, -2.0 * a_ * (b_ + 1.0) / ga, 0.0,
    ])
    chi2_coeff = alpha * c_ * (b_ + 1.0) ** 2 / ga
    return StationaryPlane(n_vec=n_vec, zeta=zeta, alpha=alpha, R_f=r_f,
                           chi2_coeff=chi2_coeff)


def sweep_bounded_family(chief, x0, y0, xdot0_list, domain="cartesian"):
    """Bounded planar trajectories through a fixed initial position.

    For each radial rate in xdot0_list the along-track rate is chosen to
    zero the drift constant, which is affine in ydot0 with unit
    coefficient. Only c3 varies across the family; c1 and c5 are pinned
    by the anchor position.
    """
    if domain != "cartesian":
        raise ValueError("the family sweep anchors a Cartesian position")
    st0 = eval_at_theta(chief, chief.theta0)
    sh = shorthand_abc(chief)
    r0, vr0, vt0 = st0.r, st0.vr, st0.vt
    p, n, eta3 = chief.p, chief.n, chief.eta**3
    members = []
    for xd0 in xdot0_list:
        yd0 = -((p / r0 + 1.0) * (p / r0) * n / eta3 * x0
                + vr0 / (vt0 * sh.Cq) * y0 + vr0 / vt0 * xd0)
        state0 = np.array([x0, y0, 0.0, xd0, yd0, 0.0])
        constants = modal_constants(chief, state0, "cartesian")
        members.append(FamilyMember(xdot0=xd0, ydot0=yd0, state0=state0,
                                    constants=constants))
    return members


# ---------------------------------------------------------------------------
# variation of the modal constants
# ---------------------------------------------------------------------------

_B_CART = np.vstack([np.zeros((3, 3)), np.eye(3)])


def psi_time_factory(chief, domain):
    """Time-domain solution matrix Psi(t) = P_t V (I + n (t-t0) E_56).

    Psi(t) c is the modal state at time t since epoch; built on the
    time-domain reduction so the secular term advances with mean motion.
    """
    p = lf_transform(chief, domain, indep="time")
    sys = lti_closed(chief, domain, indep="time")
    n = chief.n

    def psi(t):
        theta = time_to_theta(chief, t)
        m = sys.V.copy()
        m[:, 5] += n * t * sys.V[:, 4]
        return p(theta) @ m

    return psi


def constants_dynamics(psi_mat, state, control=None, extra_fn=None):
    """Rate of the modal constants: Psi^-1 (f(x, u, t) - A x).

    `extra_fn(state)` supplies any deviation of the true state rate from
    the nominal linear model beyond the control input (for example
    deltaA @ x); with neither control nor deviation the constants are
    stationary.
    """
    rhs = np.zeros(6)
    if control is not None:
        rhs += _B_CART @ np.asarray(control, dtype=float)
    if extra_fn is not None:
        rhs = rhs + np.asarray(extra_fn(state), dtype=float)
    return np.linalg.solve(psi_mat, rhs)


def integrate_constants(chief, domain, c0, t_grid, control_fn=None,
                        extra_fn=None, rtol=1e-12, atol=1e-14):
    """Integrate the variation of the constants over t_grid.

    control_fn(t, x) returns the LVLH control acceleration (km/s^2);
    extra_fn(t, x) returns a 6-vector deviation from the nominal linear
    state rate. Returns an array (len(t_grid), 6) of constants.
    """
    psi = psi_time_factory(chief, domain)

    def rhs(t, c):
        m = psi(t)
        x = m @ c
        vec = np.zeros(6)
        if control_fn is not None:
            vec += _B_CART @ np.asarray(control_fn(t, x), dtype=float)
        if extra_fn is not None:
            vec = vec + np.asarray(extra_fn(t, x), dtype=float)
        return np.linalg.solve(m, vec)

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), np.asarray(c0, dtype=float),
                    method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"constants integration failed: {sol.message}")
    return sol.y.T
