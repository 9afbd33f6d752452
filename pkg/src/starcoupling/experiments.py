"""Experiment orchestration: constants, spectra, convergence rates, oracle.

Each command produces a uniform row set (columns quantity, epsilon, k,
kappa, value, error, tail_bound; unused fields empty) plus a JSON-able
summary. Identical configurations produce bit-identical output: quadrature
orders and solver sequences are fixed and nothing here draws random
numbers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .epsilon import (
    EpsOperator,
    find_pole,
    pole_asymptotic,
    resolvent_eps_kernel,
    smeared_factor_coefficients,
    zeta,
)
from .fdoracle import (
    aligned_grid,
    oracle_eigenvalue,
    oracle_resolvent_column,
    oracle_smatrix,
)
from .graph import (
    EdgeCoordinate,
    ScalingFunction,
    StarPotential,
    boundary_matrices,
    check_selfadjoint,
    coupling_constants,
)
from .limit import (
    Momentum,
    free_kernel,
    lambda_matrix,
    limit_point_spectrum,
    resolvent_kernel_limit,
    smatrix_limit,
)
from .piecewise import PiecewisePolynomial
from .quadrature import QuadratureRule
from .scattering import smatrix_eps

CSV_COLUMNS = ("quantity", "epsilon", "k", "kappa", "value", "error", "tail_bound")


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(error) against log(eps)."""

    quantity: str
    pairs: tuple
    slope: float
    intercept: float
    r_squared: float

    def as_dict(self):
        return {
            "quantity": self.quantity,
            "pairs": [[e, v] for e, v in self.pairs],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def fit_rate(quantity, eps_values, errors):
    """Fit error ~ C * eps^slope by least squares in log-log coordinates."""
    if len(eps_values) < 4:
        raise ValueError("rate fits need at least 4 points")
    if any(e <= 0 for e in errors):
        raise ValueError("rate fits need positive errors")
    x = np.log(np.asarray(eps_values, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(
        quantity=quantity,
        pairs=tuple(zip(map(float, eps_values), map(float, errors))),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
    )


@dataclass
class Report:
    """Result bundle of one command: uniform rows plus a JSON summary."""

    command: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool = True


def _row(quantity, epsilon=None, k=None, kappa=None, value=None, error=None, tail=None):
    return {
        "quantity": quantity,
        "epsilon": epsilon,
        "k": k,
        "kappa": kappa,
        "value": value,
        "error": error,
        "tail_bound": tail,
    }


def _fmt(cell):
    if cell is None:
        return ""
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def write_report(report, out_dir):
    """Write <command>.csv and <command>_summary.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.command}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    json_path = out / f"{report.command}_summary.json"
    json_path.write_text(json.dumps(report.summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


# ---------------------------------------------------------------------------
# Hilbert-Schmidt distance between the finite-eps and limit resolvents
# ---------------------------------------------------------------------------

#: Gauss-Legendre order per unit panel of the Hilbert-Schmidt grid
HS_PANEL_ORDER = 16


def _hs_breaks(profile, eps, L):
    pts = [0.0, min(eps, L), 1.0] + [float(t) for t in range(2, math.ceil(L))] + [L]
    pts += [eps * t for t in profile.breakpoints if 0.0 < eps * t < L]
    pts = sorted({p for p in pts if 0.0 <= p <= L})
    return np.array(pts)


def hs_distance(op, kappa, panel_order=HS_PANEL_ORDER):
    """Truncated Hilbert-Schmidt distance between the two resolvent kernels.

    Integrates |difference|^2 over [0, L]^2 per edge pair with
    L = 1 + 8/kappa; beyond max(eps, 1) both kernels coincide with exact
    multiples of e^{-kappa(x+y)}, so the omitted remainder of the squared
    integral has the closed-form bound returned alongside the distance.
    """
    eps_kernel = resolvent_eps_kernel(op, kappa)
    lim_kernel = resolvent_kernel_limit(op.constants)
    mom = Momentum.resolvent(1j * kappa)
    L = 1.0 + 8.0 / kappa
    rule = QuadratureRule(order=panel_order, split_diagonal=False)

    grids = []
    for profile in op.potential.profiles:
        breaks = _hs_breaks(profile, op.eps, L)
        nodes, weights = [], []
        for a, b in zip(breaks[:-1], breaks[1:]):
            x, w = rule.points(a, b)
            nodes.append(x)
            weights.append(w)
        grids.append((np.concatenate(nodes), np.concatenate(weights)))

    total = 0.0
    for i in range(1, op.n + 1):
        xi, wi = grids[i - 1]
        for j in range(1, op.n + 1):
            yj, wj = grids[j - 1]
            diff = eps_kernel.on_grid(i, j, xi, yj) - lim_kernel.on_grid(
                i, j, xi, yj, mom
            )
            total += float(np.sum(wi[:, None] * wj[None, :] * np.abs(diff) ** 2))

    # far-field coefficients are exact: diff = E_ij e^{-kappa(x+y)} there
    b = smeared_factor_coefficients(op, kappa)
    z = zeta(op, kappa)
    lam = lambda_matrix(-(kappa**2) + 0j, op.constants).real
    E = z * (op.eps / (2.0 * kappa)) ** 2 * np.outer(b, b) + lam
    tail_sq = float(np.sum(E**2)) * math.exp(-2.0 * kappa * L) / (2.0 * kappa**2)
    tail_sq *= 1.001  # headroom over the 1e-10-certified quadrature factors
    return math.sqrt(total), tail_sq


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_constants(config):
    """Derived constants, boundary matrices, and the self-adjointness verdict."""
    potential = config.build_potential()
    scaling = config.build_scaling()
    cc = coupling_constants(potential, scaling)
    bp = boundary_matrices(cc.theta, cc.beta)
    selfadjoint = check_selfadjoint(bp)

    report = Report(command="constants")
    for i, t in enumerate(cc.theta, start=1):
        report.rows.append(_row(f"theta_{i}", value=float(t)))
    report.rows.append(_row("A", value=cc.A))
    report.rows.append(_row("B", value=cc.B))
    report.rows.append(_row("beta", value=cc.beta))
    for i in range(cc.n):
        for j in range(cc.n):
            report.rows.append(_row(f"Pi_{i + 1}_{j + 1}", value=float(cc.Pi[i, j])))
    for i in range(cc.n):
        for j in range(cc.n):
            report.rows.append(
                _row(f"boundary_A_{i + 1}_{j + 1}", value=float(bp.Amat[i, j]))
            )
            report.rows.append(
                _row(f"boundary_B_{i + 1}_{j + 1}", value=float(bp.Bmat[i, j]))
            )
    report.rows.append(_row("selfadjoint", value=1.0 if selfadjoint else 0.0))
    report.summary = {
        "n": cc.n,
        "theta": [float(t) for t in cc.theta],
        "A": cc.A,
        "B": cc.B,
        "beta": cc.beta,
        "Pi": cc.Pi.tolist(),
        "boundary_A": bp.Amat.tolist(),
        "boundary_B": bp.Bmat.tolist(),
        "selfadjoint": bool(selfadjoint),
    }
    return report


def _spectrum_one_eps(config, eps):
    potential = config.build_potential()
    scaling = config.build_scaling()
    rule = config.build_rule()
    op = EpsOperator(potential=potential, scaling=scaling, eps=eps, quad=rule)
    predictor = pole_asymptotic(op)
    pole = find_pole(op)
    # the discrete oracle must resolve the scaled support (>= 10 cells) and
    # track the eps^3-amplified stiffness of the rank-one term: the
    # eigenvalue error constant scales like h^2/eps^3, so h ~ eps^(3/2)
    # keeps the (h, h/2) pair inside the Richardson regime on the ladder
    h_target = min(config.oracle["h"], eps / 10.0, 0.3 * eps**1.5)
    L_fd, h_fd = aligned_grid(eps, config.oracle["L"], h_target)
    fd = oracle_eigenvalue(op, L=L_fd, h=h_fd)
    return predictor, pole, fd


def _spectrum_worker(payload):
    config, eps = payload
    return _spectrum_one_eps(config, eps)


def cmd_spectrum(config, parallel=1):
    """Limit eigenvalue, per-eps root-found pole, predictor, and FD oracle."""
    potential = config.build_potential()
    scaling = config.build_scaling()
    cc = coupling_constants(potential, scaling)
    limit_ev = limit_point_spectrum(cc)

    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(
                pool.map(_spectrum_worker, [(config, e) for e in config.epsilons])
            )
    else:
        results = [_spectrum_one_eps(config, e) for e in config.epsilons]

    report = Report(command="spectrum")
    report.rows.append(_row("eigenvalue_limit", value=limit_ev))
    entries = []
    for eps, (predictor, pole, fd) in zip(config.epsilons, results):
        entry = {"epsilon": eps, "kappa_predictor": predictor}
        report.rows.append(_row("kappa_predictor", epsilon=eps, value=predictor))
        if pole is None:
            report.rows.append(_row("kappa_root", epsilon=eps))
            report.rows.append(_row("eigenvalue", epsilon=eps))
            entry.update({"kappa_root": None, "eigenvalue": None})
        else:
            err = abs(pole.eigenvalue - limit_ev) if limit_ev is not None else None
            report.rows.append(
                _row("kappa_root", epsilon=eps, kappa=pole.kappa, value=pole.kappa)
            )
            report.rows.append(
                _row(
                    "eigenvalue",
                    epsilon=eps,
                    kappa=pole.kappa,
                    value=pole.eigenvalue,
                    error=err,
                )
            )
            entry.update({"kappa_root": pole.kappa, "eigenvalue": pole.eigenvalue})
        fd_err = None if (fd is None or pole is None) else abs(fd - pole.eigenvalue)
        report.rows.append(_row("eigenvalue_fd", epsilon=eps, value=fd, error=fd_err))
        entry["eigenvalue_fd"] = fd
        entries.append(entry)
    report.summary = {
        "eigenvalue_limit": limit_ev,
        "note": "no eigenvalue" if limit_ev is None else "bound state present",
        "per_epsilon": entries,
    }
    return report


def _converge_one_eps(config, eps):
    potential = config.build_potential()
    scaling = config.build_scaling()
    rule = config.build_rule()
    op = EpsOperator(potential=potential, scaling=scaling, eps=eps, quad=rule)
    cc = op.constants
    rows = []
    distance, tail = hs_distance(op, config.kappa)
    rows.append(
        _row(
            "hs_distance",
            epsilon=eps,
            kappa=config.kappa,
            value=distance,
            error=distance,
            tail=tail,
        )
    )
    for k in config.momenta:
        s_eps = smatrix_eps(op, k)
        s_lim = smatrix_limit(k, cc)
        err = float(np.linalg.norm(s_eps.entries - s_lim.entries, 2))
        rows.append(_row("smatrix_error", epsilon=eps, k=k, value=err, error=err))
    return rows


def cmd_converge(config, parallel=1):
    """Distances to the limit objects per eps plus log-log rate fits."""
    if len(config.epsilons) < 4:
        raise ValueError("convergence study needs at least 4 eps values")
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_converge_worker, [(config, e) for e in config.epsilons]))
    else:
        chunks = [_converge_one_eps(config, e) for e in config.epsilons]

    report = Report(command="converge")
    for chunk in chunks:
        report.rows.extend(chunk)

    fits = []
    quantities = [("hs_distance", None)] + [
        (f"smatrix_error_k_{k}", k) for k in config.momenta
    ]
    for name, k in quantities:
        base = "hs_distance" if k is None else "smatrix_error"
        pairs = [
            (r["epsilon"], r["error"])
            for r in report.rows
            if r["quantity"] == base and (k is None or r["k"] == k)
        ]
        errors = [p[1] for p in pairs]
        if min(errors) <= 1e-14:
            # identically vanishing distances (e.g. zero potential): no rate
            fits.append({"quantity": name, "degenerate": True, "max_error": max(errors)})
        else:
            fits.append(fit_rate(name, [p[0] for p in pairs], errors).as_dict())
    report.summary = {
        "kappa": config.kappa,
        "momenta": list(config.momenta),
        "epsilons": list(config.epsilons),
        "rate_fits": fits,
        "max_tail_bound": max(
            r["tail_bound"] for r in report.rows if r["tail_bound"] is not None
        ),
    }
    return report


def _converge_worker(payload):
    config, eps = payload
    return _converge_one_eps(config, eps)


def cmd_oracle(config):
    """Cross-validate analytic routes against the finite-difference oracle."""
    potential = config.build_potential()
    scaling = config.build_scaling()
    rule = config.build_rule()
    tol = config.tolerances
    oracle = config.oracle
    report = Report(command="oracle")
    checks = []

    # bound-state eigenvalue
    op_eig = EpsOperator(
        potential=potential, scaling=scaling, eps=oracle["epsilon_eigenvalue"], quad=rule
    )
    pole = find_pole(op_eig)
    L_eig, h_eig = aligned_grid(op_eig.eps, oracle["L"], oracle["h"])
    fd_ev = oracle_eigenvalue(op_eig, L=L_eig, h=h_eig)
    if pole is None and fd_ev is None:
        eig_err, eig_ok = None, True
    elif pole is None or fd_ev is None:
        eig_err, eig_ok = None, False
    else:
        eig_err = abs(fd_ev - pole.eigenvalue) / abs(pole.eigenvalue)
        eig_ok = eig_err <= tol["oracle_eigenvalue_rel"]
    report.rows.append(
        _row(
            "oracle_eigenvalue_rel_error",
            epsilon=oracle["epsilon_eigenvalue"],
            value=eig_err,
            error=tol["oracle_eigenvalue_rel"],
        )
    )
    checks.append({"check": "eigenvalue", "error": eig_err, "passed": eig_ok})

    # free resolvent column against the closed-form kernel
    zero_pot = StarPotential([PiecewisePolynomial.zero() for _ in range(config.n)])
    op_free = EpsOperator(
        potential=zero_pot,
        scaling=ScalingFunction(lambda1=1.0, resonant=False, lambda0=1.0),
        eps=oracle["epsilon_smatrix"],
        quad=rule,
    )
    source_edge = oracle["resolvent_source_edge"]
    source_x = oracle["resolvent_source_x"]
    col = oracle_resolvent_column(
        op_free,
        config.kappa,
        EdgeCoordinate(source_edge, source_x),
        L=oracle["L"],
        h=oracle["h"],
    )
    kernel = free_kernel(config.n)
    mom = Momentum.resolvent(1j * config.kappa)
    free_err = 0.0
    for j in range(1, config.n + 1):
        exact = kernel.on_grid(source_edge, j, np.array([source_x]), col.x, mom)[0]
        free_err = max(free_err, float(np.max(np.abs(col.values[j - 1] - exact.real))))
    free_ok = free_err <= tol["oracle_free_column_sup"]
    report.rows.append(
        _row(
            "oracle_free_column_sup_error",
            kappa=config.kappa,
            value=free_err,
            error=tol["oracle_free_column_sup"],
        )
    )
    checks.append({"check": "free_column", "error": free_err, "passed": free_ok})

    # finite-eps resolvent column (kappa away from the bound-state pole)
    col_kappa = oracle["resolvent_kappa"]
    op_s = EpsOperator(
        potential=potential, scaling=scaling, eps=oracle["epsilon_smatrix"], quad=rule
    )
    col = oracle_resolvent_column(
        op_s,
        col_kappa,
        EdgeCoordinate(source_edge, source_x),
        L=oracle["L"],
        h=oracle["h"],
    )
    eps_k = resolvent_eps_kernel(op_s, col_kappa)
    eps_err = 0.0
    for j in range(1, config.n + 1):
        exact = eps_k.on_grid(source_edge, j, np.array([source_x]), col.x)[0]
        diff = np.abs(col.values[j - 1] - exact.real)
        if j == source_edge:
            diff = diff[np.abs(col.x - source_x) >= 0.1]
        eps_err = max(eps_err, float(np.max(diff)))
    eps_ok = eps_err <= tol["oracle_eps_column_sup"]
    report.rows.append(
        _row(
            "oracle_eps_column_sup_error",
            epsilon=oracle["epsilon_smatrix"],
            kappa=col_kappa,
            value=eps_err,
            error=tol["oracle_eps_column_sup"],
        )
    )
    checks.append({"check": "eps_column", "error": eps_err, "passed": eps_ok})

    # scattering matrix
    k = oracle["smatrix_k"]
    s_fd = oracle_smatrix(op_s, k, L=oracle["L_scattering"], h=oracle["h"])
    s_an = smatrix_eps(op_s, k)
    s_err = float(np.max(np.abs(s_fd.entries - s_an.entries)))
    s_ok = s_err <= tol["oracle_smatrix_abs"]
    report.rows.append(
        _row(
            "oracle_smatrix_max_error",
            epsilon=oracle["epsilon_smatrix"],
            k=k,
            value=s_err,
            error=tol["oracle_smatrix_abs"],
        )
    )
    checks.append({"check": "smatrix", "error": s_err, "passed": s_ok})

    report.passed = all(c["passed"] for c in checks)
    report.summary = {"checks": checks, "passed": report.passed}
    return report
