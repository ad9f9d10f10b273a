"""Consensusability tests for linear interconnected multi-agent systems.

A model couples identical single-input subsystems through a physical graph
(Laplacian coupling on the state) and a cyber graph (distributed static state
feedback). Consensusability reduces to simultaneous stabilizability of the
modal pairs obtained by jointly diagonalizing the two Laplacians. Four tests
are provided: a scalar algebraic test with explicit gain intervals, the
LP-based sufficient test, an analytic sufficient test for proportional
physical coupling, and a determinant-based necessary test.
"""

from dataclasses import dataclass, field

import numpy as np

from . import simstab
from .control import SystemPair, is_schur, sigma_c, solve_mare
from .errors import (
    CyberGraphDisconnected,
    DimensionMismatch,
    LimasError,
    SingularControllability,
)
from .graph import (
    LaplacianSpectrum,
    commute_check,
    is_connected,
    laplacian,
    modal_decomposition,
)

# Test names
SCALAR_TEST = "scalar_s1_s2"
LP_TEST = "lp_sufficient"
ANALYTIC_TEST = "analytic_sufficient"
NECESSARY_TEST = "necessary"
DESIGN = "design_gain"

# Verdicts
CONSENSUSABLE_SUFFICIENT = "consensusable_sufficient"
NOT_CONCLUDED = "not_concluded"
NECESSARY_VIOLATED = "necessary_violated"
ASSUMPTION_VIOLATION = "assumption_violation"

_DET_BAND = 1e-10  # |det| values this close to 1 are classified conservatively
_ALPHA_RTOL = 1e-8  # relative residual for accepting proportional physical coupling

_FIXED_FIELDS = ("gamma_c", "delta_p", "sigma_c", "sigma", "k_star", "intervals", "n_flags")


@dataclass(frozen=True)
class LimasModel:
    """Homogeneous LIMAS: identical (A, A_p, B) plus physical and cyber graphs."""

    a_mat: np.ndarray
    ap_mat: np.ndarray
    b_vec: np.ndarray
    g_p: object  # WeightedGraph
    g_c: object  # WeightedGraph

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_mat, dtype=float))
        ap = np.atleast_2d(np.asarray(self.ap_mat, dtype=float))
        b = np.asarray(self.b_vec, dtype=float).reshape(-1)
        n = a.shape[0]
        if a.shape != (n, n) or ap.shape != (n, n) or b.shape != (n,):
            raise DimensionMismatch(
                f"inconsistent matrix shapes A{a.shape} A_p{ap.shape} B{b.shape}"
            )
        if self.g_p.n_nodes != self.g_c.n_nodes:
            raise DimensionMismatch("physical and cyber graphs differ in node count")
        if self.g_p.n_nodes < 2:
            raise DimensionMismatch("need at least two agents")
        if not is_connected(self.g_c):
            raise CyberGraphDisconnected("cyber graph must be connected")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "ap_mat", ap)
        object.__setattr__(self, "b_vec", b)

    @property
    def n_agents(self):
        return self.g_c.n_nodes

    @property
    def order(self):
        return self.a_mat.shape[0]

    def lap_p(self):
        return laplacian(self.g_p)

    def lap_c(self):
        return laplacian(self.g_c)


@dataclass(frozen=True)
class ModalPairs:
    """Decoupled single-input pairs (A - lp*A_p, lc*B) with eigenvalue provenance."""

    pairs: tuple  # of SystemPair
    eigen: tuple  # of (lambda_p, lambda_c)
    commuting: bool  # False when the pairing fell back to magnitude order


@dataclass
class TestReport:
    """Outcome of one consensusability test with structured diagnostics."""

    test_name: str
    verdict: str
    gain: np.ndarray | None = None
    details: dict = field(default_factory=dict)

    def to_json_dict(self):
        """Serialize with the fixed diagnostic field names at top level."""
        out = {
            "test": self.test_name,
            "verdict": self.verdict,
            "gain": None if self.gain is None else [float(x) for x in np.ravel(self.gain)],
        }
        rest = dict(self.details)
        for key in _FIXED_FIELDS:
            out[key] = rest.pop(key, None)
        out["details"] = _jsonable(rest)
        return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)
    return value


@dataclass(frozen=True)
class AssumptionReport:
    """Which of the commuting / controllability / proportionality assumptions hold."""

    a1_commuting: bool
    a2_controllable: bool
    a3_proportional: bool
    alpha: float | None
    messages: tuple


def _physical_eigenvalues(model):
    """Eigenvalues of the physical Laplacian restricted to the consensus complement."""
    return np.linalg.eigvalsh(model.lap_p())[1:]


def _cyber_eigenvalues(model):
    return np.linalg.eigvalsh(model.lap_c())[1:]


def check_assumptions(model):
    """Evaluate the commuting, modal-controllability, and proportionality assumptions.

    The proportionality factor alpha is recovered by Frobenius projection of
    A_p onto A and accepted only when the residual is at rounding level.
    """
    messages = []
    a1 = commute_check(model.lap_p(), model.lap_c())
    if not a1:
        messages.append("physical and cyber Laplacians do not commute")

    a2 = True
    for lam_p in _physical_eigenvalues(model):
        try:
            SystemPair(model.a_mat - lam_p * model.ap_mat, model.b_vec)
        except SingularControllability:
            a2 = False
            messages.append(f"modal pair at lambda_p={lam_p:g} is uncontrollable")
            break

    a = model.a_mat
    ap = model.ap_mat
    denom = float(np.sum(a * a))
    if denom == 0.0:
        alpha = 0.0 if np.abs(ap).max(initial=0.0) == 0.0 else None
    else:
        alpha = float(np.sum(ap * a) / denom)
    if alpha is None:
        a3 = False
    else:
        ap_scale = np.abs(ap).max(initial=0.0)
        a3 = bool(np.abs(ap - alpha * a).max(initial=0.0) <= _ALPHA_RTOL * max(ap_scale, 1e-300))
        if ap_scale == 0.0:
            a3, alpha = True, 0.0
    if not a3:
        alpha = None
        messages.append("A_p is not proportional to A")
    return AssumptionReport(a1, a2, a3, alpha, tuple(messages))


def modal_pairs(model, allow_noncommuting=False):
    """Decoupled pairs (A - lp*A_p, lc*B) for the simultaneous-stabilization layer.

    With commuting Laplacians the eigenvalue pairing comes from the shared
    eigenbasis. When they do not commute and `allow_noncommuting` is set, the
    sorted spectra are paired by magnitude order as a heuristic; the result is
    then flagged as carrying no consensusability certificate.
    """
    lap_p, lap_c = model.lap_p(), model.lap_c()
    commuting = commute_check(lap_p, lap_c)
    if commuting:
        eigen = modal_decomposition(lap_p, lap_c).pairs
    elif allow_noncommuting:
        eigen = tuple(zip(np.linalg.eigvalsh(lap_p)[1:], np.linalg.eigvalsh(lap_c)[1:]))
    else:
        raise LimasError("Laplacians do not commute; pass allow_noncommuting to force pairing")
    pairs = tuple(
        SystemPair(model.a_mat - lam_p * model.ap_mat, lam_c * model.b_vec)
        for lam_p, lam_c in eigen
    )
    return ModalPairs(pairs, tuple(eigen), commuting)


def scalar_test(a, spect_p, spect_c):
    """Algebraic consensusability test for scalar subsystems (B lumped to 1).

    Evaluates the two eigenvalue-bound conditions and, when one holds, picks
    the midpoint of the admissible sub-interval of the corresponding gain
    interval (nonnegative gains for the first condition, negative for the
    second).
    """
    a = float(a)
    lp_min, lp_max = spect_p.lambda_min, spect_p.lambda_max
    lc_min, lc_max = spect_c.lambda_min, spect_c.lambda_max
    gamma_c, delta_p = spect_c.gamma_c, spect_p.delta_p

    s1 = lp_min > a - 1.0 and (gamma_c - 1.0) * (1.0 - a + lp_min) < gamma_c * (2.0 - delta_p)
    s2 = lp_max < 1.0 + a and (gamma_c - 1.0) * (1.0 + a - lp_max) < gamma_c * (2.0 - delta_p)

    k_plus = ((-1.0 - a + lp_max) / lc_min, (1.0 - a + lp_min) / lc_max)
    k_minus = ((-1.0 - a + lp_max) / lc_max, (1.0 - a + lp_min) / lc_min)

    gain = None
    if s1:
        low = max(k_plus[0], 0.0)
        gain = np.array([0.5 * (low + k_plus[1])])
    elif s2:
        high = min(k_minus[1], 0.0)
        gain = np.array([0.5 * (k_minus[0] + high)])

    verdict = CONSENSUSABLE_SUFFICIENT if (s1 or s2) else NOT_CONCLUDED
    details = {
        "gamma_c": gamma_c,
        "delta_p": delta_p,
        "intervals": {"k_plus": list(k_plus), "k_minus": list(k_minus)},
        "s1": s1,
        "s2": s2,
        "a": a,
    }
    return TestReport(SCALAR_TEST, verdict, gain, details)


def lp_sufficient_test(model, min_margin=simstab.DEFAULT_MIN_MARGIN, allow_noncommuting=True):
    """LP-based sufficient test on the modal pairs.

    With commuting Laplacians a feasible LP certifies consensusability and
    yields a gain. Without commuting (and `allow_noncommuting`), the LP is
    still evaluated on magnitude-ordered pairs as a diagnostic, but feasibility
    then carries no certificate and the verdict stays inconclusive.
    """
    assumptions = check_assumptions(model)
    if not assumptions.a2_controllable:
        return TestReport(
            LP_TEST, ASSUMPTION_VIOLATION, None,
            {"assumptions": assumptions.messages, "failed": "controllability"},
        )
    if not assumptions.a1_commuting and not allow_noncommuting:
        return TestReport(
            LP_TEST, ASSUMPTION_VIOLATION, None,
            {"assumptions": assumptions.messages, "failed": "commuting"},
        )
    pairs = modal_pairs(model, allow_noncommuting=allow_noncommuting)
    verdict_lp = simstab.simultaneous_gain(pairs.pairs, min_margin)
    details = {
        "lp_feasible": verdict_lp.feasible,
        "lp_margin": verdict_lp.margin,
        "commuting": pairs.commuting,
        "eigen_pairs": list(pairs.eigen),
    }
    if verdict_lp.feasible and pairs.commuting:
        details["gain_verified"] = simstab.verify_gain(pairs.pairs, verdict_lp.gain)
        return TestReport(LP_TEST, CONSENSUSABLE_SUFFICIENT, verdict_lp.gain, details)
    return TestReport(LP_TEST, NOT_CONCLUDED, None, details)


def analytic_sufficient_test(model):
    """Riccati-based sufficient test for proportional physical coupling A_p = alpha*A."""
    assumptions = check_assumptions(model)
    if not (assumptions.a1_commuting and assumptions.a2_controllable and assumptions.a3_proportional):
        return TestReport(
            ANALYTIC_TEST, ASSUMPTION_VIOLATION, None, {"assumptions": assumptions.messages}
        )
    alpha = assumptions.alpha
    lam_p = _physical_eigenvalues(model)
    lam_c = _cyber_eigenvalues(model)
    alphas = 1.0 - alpha * lam_p
    alpha_max = float(np.abs(alphas).max())
    alpha_min = float(np.abs(alphas).min())
    a_bar = alpha_max * model.a_mat
    crit = sigma_c(a_bar)
    details = {"alpha": alpha, "sigma_c": crit, "alpha_min": alpha_min, "alpha_max": alpha_max}

    if is_schur(a_bar):
        gain = np.zeros(model.order)
        details["branch"] = "a_bar_schur"
        return TestReport(ANALYTIC_TEST, CONSENSUSABLE_SUFFICIENT, gain, details)

    if alpha_min ** 2 - alpha_max ** 2 * crit <= 0.0:
        details["branch"] = "critical_gap_nonpositive"
        return TestReport(ANALYTIC_TEST, NOT_CONCLUDED, None, details)

    # Worst-case cross pairing of the alpha ratios over both eigenvalue lists.
    ratios = alphas[:, None] / lam_c[None, :]
    r_min, r_max = float(ratios.min()), float(ratios.max())
    lc_max = float(lam_c.max())
    lhs = ((r_max - r_min) / 2.0) ** 2
    rhs = (alpha_min ** 2 - alpha_max ** 2 * crit) / lc_max ** 2
    details["condition_lhs"] = lhs
    details["condition_rhs"] = rhs
    if not lhs < rhs:
        details["branch"] = "condition_failed"
        return TestReport(ANALYTIC_TEST, NOT_CONCLUDED, None, details)

    k_star = 0.5 * (r_min + r_max)
    sigma = float(
        np.min(2.0 * alphas[:, None] * lam_c[None, :] * k_star - (lam_c[None, :] * k_star) ** 2)
        / alpha_max ** 2
    )
    details["k_star"] = k_star
    details["sigma"] = sigma
    try:
        solution = solve_mare(a_bar, model.b_vec, sigma)
    except LimasError as exc:
        # Existence is guaranteed when the condition holds, so a failure here
        # is a tolerance problem, not a refutation.
        details["branch"] = "mare_failure"
        details["mare_error"] = str(exc)
        return TestReport(ANALYTIC_TEST, NOT_CONCLUDED, None, details)
    b = model.b_vec.reshape(-1, 1)
    pb = solution.p_mat @ b
    gain = (-k_star / (b.T @ pb).item()) * (pb.T @ model.a_mat)
    details["branch"] = "mare_gain"
    details["mare_residual"] = solution.residual
    return TestReport(ANALYTIC_TEST, CONSENSUSABLE_SUFFICIENT, gain.reshape(-1), details)


def necessary_test(model):
    """Determinant-based necessary conditions; failing all of them refutes consensusability.

    The three conditions use only the modal determinant extremes and the cyber
    eigenratio, so no eigenvalue pairing is needed. For scalar subsystems the
    commuting assumption is not required; for higher orders it is and its
    violation is reported instead of a verdict.
    """
    assumptions = check_assumptions(model)
    if not assumptions.a2_controllable:
        return TestReport(
            NECESSARY_TEST, ASSUMPTION_VIOLATION, None,
            {"assumptions": assumptions.messages, "failed": "controllability"},
        )
    if model.order > 1 and not assumptions.a1_commuting:
        return TestReport(
            NECESSARY_TEST, ASSUMPTION_VIOLATION, None,
            {"assumptions": assumptions.messages, "failed": "commuting"},
        )
    lam_p = _physical_eigenvalues(model)
    dets = np.array(
        [abs(np.linalg.det(model.a_mat - lp * model.ap_mat)) for lp in lam_p]
    )
    d_max, d_min = float(dets.max()), float(dets.min())
    gamma_c = spectrum_of_cyber(model).gamma_c

    flagged = bool(abs(d_max - 1.0) <= _DET_BAND or abs(d_min - 1.0) <= _DET_BAND)
    # Conservative band handling: borderline determinants must not produce a
    # refutation, so "< 1" in N1 treats the band as >= 1 and the N3
    # precondition ">= 1" treats the band as < 1.
    d_max_below_one = d_max < 1.0 - _DET_BAND
    d_min_below_one = d_min < 1.0 + _DET_BAND
    eq26 = d_max - 1.0 < gamma_c * d_min + gamma_c
    eq27 = gamma_c * (d_min - 1.0) < d_max + 1.0
    n1 = d_max_below_one
    n2 = (not d_max_below_one) and d_min_below_one and eq26
    n3 = (not d_min_below_one) and eq26 and eq27
    verdict = NOT_CONCLUDED if (n1 or n2 or n3) else NECESSARY_VIOLATED
    details = {
        "gamma_c": gamma_c,
        "n_flags": {"n1": n1, "n2": n2, "n3": n3, "eq26": eq26, "eq27": eq27},
        "det_max": d_max,
        "det_min": d_min,
        "det_band_flagged": flagged,
    }
    return TestReport(NECESSARY_TEST, verdict, None, details)


def spectrum_of_cyber(model):
    """Laplacian spectrum of the cyber graph."""
    from .graph import spectrum

    return spectrum(model.lap_c())


def scalar_model_test(model):
    """Scalar-path test with A_p lumped into the physical spectrum and B into the gain."""
    a = float(model.a_mat[0, 0])
    ap = float(model.ap_mat[0, 0])
    b = float(model.b_vec[0])
    lam_p = ap * _physical_eigenvalues(model)
    lam_c = _cyber_eigenvalues(model)
    spect_p = LaplacianSpectrum(
        np.concatenate([[0.0], np.sort(lam_p)]),
        np.inf,
        float(np.sort(lam_p)[-1] - np.sort(lam_p)[0]),
    )
    spect_c = spectrum_of_cyber(model)
    report = scalar_test(a, spect_p, spect_c)
    if report.gain is not None:
        report.gain = report.gain / b
        report.details["b_lumped"] = b
    return report


def design_gain(model, min_margin=simstab.DEFAULT_MIN_MARGIN):
    """Run the consensusability tests in refute-first, cheapest-first order.

    The necessary test runs first and short-circuits on refutation; then the
    scalar test (first-order subsystems only), the LP test, and the analytic
    test, returning the first sufficient verdict with its gain. All individual
    reports are kept under details["reports"].
    """
    reports = [necessary_test(model)]
    if reports[0].verdict == NECESSARY_VIOLATED:
        return _merged(NECESSARY_VIOLATED, None, reports)
    if model.order == 1:
        reports.append(scalar_model_test(model))
        if reports[-1].verdict == CONSENSUSABLE_SUFFICIENT:
            return _merged(CONSENSUSABLE_SUFFICIENT, reports[-1].gain, reports)
    reports.append(lp_sufficient_test(model, min_margin))
    if reports[-1].verdict == CONSENSUSABLE_SUFFICIENT:
        return _merged(CONSENSUSABLE_SUFFICIENT, reports[-1].gain, reports)
    reports.append(analytic_sufficient_test(model))
    if reports[-1].verdict == CONSENSUSABLE_SUFFICIENT:
        return _merged(CONSENSUSABLE_SUFFICIENT, reports[-1].gain, reports)
    if any(r.verdict == NOT_CONCLUDED for r in reports):
        return _merged(NOT_CONCLUDED, None, reports)
    return _merged(ASSUMPTION_VIOLATION, None, reports)


def _merged(verdict, gain, reports):
    return TestReport(
        DESIGN,
        verdict,
        gain,
        {"reports": [r.to_json_dict() for r in reports]},
    )
