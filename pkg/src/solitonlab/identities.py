"""Executable verification of the determinant identities.

Each verify_* function evaluates both sides of one identity on a grid and
returns a VerificationReport. Proportionality ("LHS is a constant multiple
of RHS") is measured as std/|mean| of the pointwise ratio, so drift
anywhere on the grid is detected without privileging any single point;
equalities are measured as a grid-normalized residual. Points where either
side has underflowed below 1e-280 are excluded and counted — a ratio of
underflowed quantities is noise, not evidence.

Random-configuration fuzzing (run_identity_suite) is part of the module
itself: sweeping these identities over random spectral data is the
product, not merely its QA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, jet_exp, jet_log_d2
from .solitons import (
    ConfigError,
    SolitonConfig,
    drop_rule,
    eigenfunction,
    pair_rule,
    deletion_rule,
    potential,
    random_config,
    rescale_rule,
    tau_jet_sum,
)
from .transforms import eigenfunction_seeds, free_seed, wronskian

#: magnitudes below this are excluded from ratio statistics
UNDERFLOW_FLOOR = 1e-280

CONSTANCY_TOL = 1e-9
POINTWISE_TOL = 1e-10


@dataclass(frozen=True)
class VerificationReport:
    identity_name: str
    tag: str
    grid: tuple
    max_abs_deviation: float
    constancy_measure: float | None
    tolerance: float
    passed: bool
    excluded_points: int = 0
    measured_constant: float | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.identity_name,
            "tag": self.tag,
            "tolerance": self.tolerance,
            "max_abs_deviation": self.max_abs_deviation,
            "constancy_measure": self.constancy_measure,
            "measured_constant": self.measured_constant,
            "excluded_points": self.excluded_points,
            "grid_points": len(self.grid),
            "pass": self.passed,
        }


def _ratio_report(name, tag, grid, log_lhs, sign_lhs, log_rhs, sign_rhs, tol):
    """Constancy report for LHS = const * RHS given both sides in
    (log|.|, sign) form."""
    log_lhs = np.asarray(log_lhs)
    log_rhs = np.asarray(log_rhs)
    ok = (log_lhs > math.log(UNDERFLOW_FLOOR)) & (log_rhs > math.log(UNDERFLOW_FLOOR))
    excluded = int(np.sum(~ok))
    ratios = np.asarray(sign_lhs)[ok] * np.asarray(sign_rhs)[ok] * np.exp(log_lhs[ok] - log_rhs[ok])
    if len(ratios) == 0:
        return VerificationReport(name, tag, tuple(grid), math.inf, math.inf, tol, False, excluded)
    mean = float(np.mean(ratios))
    constancy = float(np.std(ratios) / abs(mean)) if mean != 0 else math.inf
    dev = float(np.max(np.abs(ratios - mean)))
    return VerificationReport(
        name, tag, tuple(grid), dev, constancy, tol, constancy <= tol, excluded, mean
    )


# ---------------------------------------------------------------------------
# Closed-form tail integrals


def inner_tail_gauged(cfg: SolitonConfig, j: int, l: int, x: float, order: int):
    """Gauged jet of the tail integral int_x^inf phi_j phi_l dy, whose
    closed form is (pair-rewritten tau / tau) e^{-(k_j+k_l)x}/(k_j+k_l).
    Returns (jet, log_gauge, sign); true value = sign*e^gauge*jet."""
    cfg = cfg.flowed()
    kj = cfg.k[j - 1]
    kl = cfg.k[l - 1]
    num = tau_jet_sum(cfg, pair_rule(cfg, j, l), x, order)
    den = tau_jet_sum(cfg, None, x, order)
    jet = (num.jet / den.jet) * jet_exp(-(kj + kl), x, order, unit=True) * (1.0 / (kj + kl))
    gauge = num.gauge_exponent - den.gauge_exponent - (kj + kl) * x
    return jet, gauge, num.sign * den.sign


def inner_tail(cfg: SolitonConfig, j: int, l: int, x: float) -> float:
    """Tail integral int_x^inf phi_j phi_l dy in closed form. As
    x -> -infinity this tends to 1/c_j for j=l and to 0 otherwise
    (orthogonality with normalization (phi_j, phi_j) = 1/c_j)."""
    jet, gauge, sign = inner_tail_gauged(cfg, j, l, x, 0)
    return sign * math.exp(gauge) * float(jet.coeffs[0])


# ---------------------------------------------------------------------------
# Identity checks


def verify_wronskian_identity(cfg: SolitonConfig, deleted, grid, tol: float = CONSTANCY_TOL) -> VerificationReport:
    """W[phi_{d1},...,phi_{dM}] is a constant multiple of
    (rewritten tau / tau) e^{-sum k_d x}."""
    cfg = cfg.flowed()
    dset = sorted(set(int(d) for d in deleted))
    seeds = eigenfunction_seeds(cfg, dset)
    ksum = sum(cfg.k[d - 1] for d in dset)
    log_l, sgn_l, log_r, sgn_r = [], [], [], []
    rule = deletion_rule(cfg, dset, 1)
    for x in grid:
        w = wronskian(seeds, float(x), 0)
        v = float(w.coeffs[0])
        log_l.append(math.log(abs(v)) if v != 0 else -math.inf)
        sgn_l.append(math.copysign(1.0, v) if v != 0 else 0.0)
        num = tau_jet_sum(cfg, rule, float(x), 0)
        den = tau_jet_sum(cfg, None, float(x), 0)
        log_r.append(num.log_abs - den.log_abs - ksum * x)
        sgn_r.append(num.sign * den.sign)
    return _ratio_report(
        f"wronskian_identity D={dset}", "wronskian_ratio", grid, log_l, sgn_l, log_r, sgn_r, tol
    )


def verify_bilinear_derivative(cfg: SolitonConfig, j: int, l: int, grid, tol: float = POINTWISE_TOL) -> VerificationReport:
    """phi_j phi_l equals minus the x-derivative of the closed-form tail
    antiderivative, pointwise."""
    cfg = cfg.flowed()
    lhs = []
    rhs = []
    for x in grid:
        pj = eigenfunction(cfg, j, float(x), 0).coeffs[0]
        pl = pj if l == j else eigenfunction(cfg, l, float(x), 0).coeffs[0]
        lhs.append(float(pj * pl))
        jet, gauge, sign = inner_tail_gauged(cfg, j, l, float(x), 1)
        rhs.append(-sign * math.exp(gauge) * float(jet.deriv(1)))
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    scale = max(float(np.max(np.abs(lhs))), UNDERFLOW_FLOOR)
    dev = float(np.max(np.abs(lhs - rhs))) / scale
    return VerificationReport(
        f"bilinear_derivative j={j} l={l}", "bilinear_derivative", tuple(grid), dev, None, tol, dev <= tol
    )


def _tail_matrix_logdet(cfg: SolitonConfig, dset, x: float):
    """(log|det|, sign) of the matrix of tail integrals over the deleted
    set, with per-row gauges factored outside the jet determinant."""
    m = len(dset)
    tails = [[inner_tail_gauged(cfg, a, b, x, 0) for b in dset] for a in dset]
    log_gauge = 0.0
    rows = []
    for a in range(m):
        g = max(t[1] for t in tails[a])
        log_gauge += g
        rows.append([Jet(float(x), t[0].coeffs * (t[2] * math.exp(t[1] - g))) for t in tails[a]])
    vals = np.array([[r.coeffs[0] for r in row] for row in rows])
    sign, logabs = np.linalg.slogdet(vals)
    return log_gauge + float(logabs), float(sign)


def verify_deletion_determinant(cfg: SolitonConfig, deleted, grid, tol: float = CONSTANCY_TOL) -> VerificationReport:
    """det of the tail-integral matrix over the deleted set is a constant
    multiple of (squared-rewrite tau / tau) e^{-2 sum k_d x}."""
    cfg = cfg.flowed()
    dset = sorted(set(int(d) for d in deleted))
    ksum = sum(cfg.k[d - 1] for d in dset)
    rule = deletion_rule(cfg, dset, 2)
    log_l, sgn_l, log_r, sgn_r = [], [], [], []
    for x in grid:
        la, sa = _tail_matrix_logdet(cfg, dset, float(x))
        log_l.append(la)
        sgn_l.append(sa)
        num = tau_jet_sum(cfg, rule, float(x), 0)
        den = tau_jet_sum(cfg, None, float(x), 0)
        log_r.append(num.log_abs - den.log_abs - 2.0 * ksum * x)
        sgn_r.append(num.sign * den.sign)
    return _ratio_report(
        f"deletion_determinant D={dset}", "deletion_determinant", grid, log_l, sgn_l, log_r, sgn_r, tol
    )


def verify_addition_determinant(cfg: SolitonConfig, deleted, e, grid, tol: float = CONSTANCY_TOL) -> VerificationReport:
    """det(e_j delta_jl + overlap of unit-normalized bound states up to x)
    is a constant multiple of (rescaled tau / tau); the rescale is
    c_d -> e_d/(e_d+1) c_d."""
    cfg = cfg.flowed()
    dset = sorted(set(int(d) for d in deleted))
    e = [float(v) for v in e]
    if len(e) != len(dset) or any(v <= 0 for v in e):
        raise ConfigError("one positive parameter e per index required")
    rule = None
    for d, ed in zip(dset, e):
        r = rescale_rule(cfg.n, d, ed / (ed + 1.0))
        rule = r if rule is None else rule.compose(r)
    sqc = {d: math.sqrt(cfg.c[d - 1]) for d in dset}
    log_l, sgn_l, log_r, sgn_r = [], [], [], []
    for x in grid:
        m = len(dset)
        fm = np.empty((m, m))
        for a, da in enumerate(dset):
            for b, db in enumerate(dset):
                jet, g, s = inner_tail_gauged(cfg, da, db, float(x), 0)
                tail = s * math.exp(g) * float(jet.coeffs[0])
                full = 1.0 if da == db else 0.0
                fm[a, b] = (e[a] if a == b else 0.0) + full - sqc[da] * sqc[db] * tail
        sign, logabs = np.linalg.slogdet(fm)
        log_l.append(float(logabs))
        sgn_l.append(float(sign))
        num = tau_jet_sum(cfg, rule, float(x), 0)
        den = tau_jet_sum(cfg, None, float(x), 0)
        log_r.append(num.log_abs - den.log_abs)
        sgn_r.append(num.sign * den.sign)
    return _ratio_report(
        f"addition_determinant D={dset}", "addition_determinant", grid, log_l, sgn_l, log_r, sgn_r, tol
    )


def verify_tau_split(cfg: SolitonConfig, j: int, grid, tol: float = POINTWISE_TOL) -> VerificationReport:
    """tau = tau|_{c_j->0} + (c_j/2k_j) e^{-2 k_j x} * squared-rewrite
    tau, checked as a relative residual in a common gauge."""
    cfg = cfg.flowed()
    kj = cfg.k[j - 1]
    cj = cfg.c[j - 1]
    wrule = pair_rule(cfg, j, j)
    devs = []
    for x in grid:
        u = tau_jet_sum(cfg, None, float(x), 0)
        uj = tau_jet_sum(cfg, drop_rule(cfg.n, j), float(x), 0)
        wj = tau_jet_sum(cfg, wrule, float(x), 0)
        a = uj.sign * math.exp(uj.log_abs - u.log_abs)
        logb = math.log(cj / (2.0 * kj)) - 2.0 * kj * x + wj.log_abs - u.log_abs
        b = wj.sign * math.exp(logb)
        devs.append(abs(1.0 - a - b))
    dev = float(np.max(devs))
    return VerificationReport(f"tau_split j={j}", "tau_split", tuple(grid), dev, None, tol, dev <= tol)


def verify_seed_wronskian(k, ctilde, grid, tol: float = CONSTANCY_TOL) -> VerificationReport:
    """The Wronskian of the free seeds e^{kx} + ctilde e^{-kx} (with the
    alternating sign pattern) equals prod_{j>l}(k_j-k_l) e^{sum k_j x}
    times the tau of the matched config — checked as ratio == 1, which
    also validates the ctilde -> c parameter map."""
    from .transforms import seed_config_from_free

    k = [float(v) for v in k]
    ctilde = [float(v) for v in ctilde]
    cfg = seed_config_from_free(k, ctilde)  # validates the sign pattern
    n = len(k)
    log_vdm = 0.0
    for a in range(n):
        for b in range(a):
            log_vdm += math.log(k[a] - k[b])
    devs = []
    for x in grid:
        x = float(x)
        # per-column gauge keeps the Wronskian entries in floating range
        cols = []
        gauge = 0.0
        for kj, ct in zip(k, ctilde):
            s = max(kj * x, -kj * x + math.log(abs(ct)))
            gauge += s

            def ev(xx, order, kj=kj, ct=ct, s=s):
                grow = jet_exp(kj, xx, order, unit=True) * math.exp(kj * xx - s)
                decay = jet_exp(-kj, xx, order, unit=True) * math.copysign(
                    math.exp(-kj * xx + math.log(abs(ct)) - s), ct
                )
                return grow + decay

            cols.append(ev)
        w = wronskian(cols, x, 0)
        wv = float(w.coeffs[0])
        if wv <= 0:
            return VerificationReport(
                "seed_wronskian", "seed_wronskian", tuple(grid), math.inf, None, tol, False
            )
        log_w = gauge + math.log(wv)
        u = tau_jet_sum(cfg, None, x, 0)
        log_rhs = log_vdm + sum(k) * x + u.log_abs
        devs.append(abs(math.exp(log_w - log_rhs) - 1.0))
    dev = float(np.max(devs))
    return VerificationReport("seed_wronskian", "seed_wronskian", tuple(grid), dev, None, tol, dev <= tol)


# ---------------------------------------------------------------------------
# Fuzzing suite


def run_identity_suite(
    seed: int = 0,
    n_configs: int = 50,
    grid_points: int = 21,
    constancy_tol: float = CONSTANCY_TOL,
    pointwise_tol: float = POINTWISE_TOL,
) -> list:
    """Sweep all identities over random valid configurations
    (N in 1..6, k in (0.2, 4), c in (0.1, 10), grid +-6/k_1).
    Deterministic given the seed."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(n_configs):
        cfg = random_config(rng)
        grid = np.linspace(-6.0 / cfg.k[0], 6.0 / cfg.k[0], grid_points)
        msize = int(rng.integers(1, min(cfg.n, 3) + 1))
        dset = sorted(rng.choice(np.arange(1, cfg.n + 1), size=msize, replace=False).tolist())
        j = int(rng.integers(1, cfg.n + 1))
        l = int(rng.integers(1, cfg.n + 1))
        e = rng.uniform(0.5, 5.0, msize).tolist()
        ctilde = [((-1.0) ** i) * float(rng.uniform(0.2, 5.0)) for i in range(cfg.n)]
        reports.append(verify_wronskian_identity(cfg, dset, grid, constancy_tol))
        reports.append(verify_bilinear_derivative(cfg, j, l, grid, pointwise_tol))
        reports.append(verify_deletion_determinant(cfg, dset, grid, constancy_tol))
        reports.append(verify_addition_determinant(cfg, dset, e, grid, constancy_tol))
        reports.append(verify_tau_split(cfg, j, grid, pointwise_tol))
        reports.append(verify_seed_wronskian(cfg.k, ctilde, grid, constancy_tol))
    return reports
