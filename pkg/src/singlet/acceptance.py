"""Self-test criteria run by `singlet selftest`.

Each criterion returns (passed, detail). Random samples come from a seeded
numpy generator, so repeated runs check the same points.
"""
import concurrent.futures
import dataclasses
import logging
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from singlet.domain import characters, fusion, labels, model, modular, qdim, qmf, value, variety

logger = logging.getLogger(__name__)

SEED = 20240601
TIME_LIMIT = 300.0

Outcome = Tuple[bool, str]


@dataclasses.dataclass()
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


def _rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


def _continuous_eps(count: int) -> List[complex]:
    rng = _rng()
    return [complex(re, im) for re, im in zip(rng.uniform(0.05, 0.5, count), rng.uniform(-0.5, 0.5, count))]


# ---- Series and characters ----
def theta_modularity() -> Outcome:
    worst = 0.0
    for a, b in ((1, 0), (2, 1), (6, 5)):
        for u in (0, 0.1):
            for tau in (1j, 0.3 + 0.8j):
                report = modular.verify_theta_transform(value.ThetaIndex(a, b), u, value.EvalContext(tau=tau))
                worst = max(worst, report.abs_residual)
    return worst < 1e-10, f"max residual {worst:.2e}"


def _resolution_forms(params, label) -> List[Callable]:
    r, s, n = label.r, label.s, label.n
    if isinstance(label, labels.AtypicalIPlus):
        return [lambda ctx: characters.char_plus_resolution(params, r, s, n, ctx)]
    if isinstance(label, labels.AtypicalIMinus):
        return [lambda ctx: characters.char_minus_resolution(params, r, s, n, ctx)]
    return [
        lambda ctx: characters.char_from_plus(params, r, s, n, ctx),
        lambda ctx: characters.char_from_minus(params, r, s, n, ctx),
        lambda ctx: characters.char_fock_resolution(params, r, s, n, ctx),
    ]


def character_consistency() -> Outcome:
    params = value.ModelParams(2, 3)
    candidates = []
    for n in range(-2, 3):
        candidates += [labels.AtypicalI(1, s, n) for s in (1, 2)]
        candidates += [labels.AtypicalIPlus(1, s, n) for s in (1, 2, 3)]
        candidates += [labels.AtypicalIMinus(r, s, n) for r in (1, 2) for s in (1, 2)]
    worst = 0.0
    for eps in (0, 0.1):
        ctx = value.EvalContext(tau=1.3j, eps=eps)
        for label in candidates:
            reference = characters.character(params, label, ctx)
            for form in _resolution_forms(params, label):
                worst = max(worst, value.ResidualReport.build(reference, form(ctx)).rel_residual)
    return worst < 1e-9, f"{len(candidates)} labels, max relative deviation {worst:.2e}"


# ---- S-transformations ----
def typical_s_transform() -> Outcome:
    params = value.ModelParams(2, 3)
    label = labels.Typical(params.alpha_zero / 2 + mpmath.mpf("0.37"))
    report = modular.verify_s_transform(params, label, value.EvalContext(tau=2j, eps=0.25))
    return report.rel_residual < 1e-6, f"relative residual {report.rel_residual:.2e}"


def atypical_s_transform() -> Outcome:
    params = value.ModelParams(2, 3)
    worst = 0.0
    for label in (labels.AtypicalI(1, 1, 0), labels.AtypicalI(1, 2, 1)):
        for eps in (0.3, -0.3):
            report = modular.verify_s_transform(params, label, value.EvalContext(tau=1.7j, eps=eps))
            worst = max(worst, report.rel_residual)
    return worst < 1e-5, f"max relative residual {worst:.2e}"


def correction_limit() -> Outcome:
    params = value.ModelParams(2, 3)
    limit = modular.correction_Y_limit(params, 1, 2, 1, value.EvalContext(tau=1j))
    gaps = [
        abs(modular.correction_Y(params, 1, 2, 1, value.EvalContext(tau=1j, eps=eps)) - limit)
        for eps in (1e-2, 1e-3)
    ]
    ratio = float(gaps[0] / gaps[1])
    return 8.0 <= ratio <= 12.0, f"gap ratio {ratio:.3f}"


# ---- Quantum dimensions ----
def qdim_limits() -> Outcome:
    params = value.ModelParams(2, 3)
    eps = 1e-6
    worst = 0.0
    for r in (1, 2):
        for s in (1, 2, 3):
            worst = max(worst, float(abs(qdim.qdim_closed(params, labels.AtypicalI(r, s, 0), eps) - r * s)))
    typical = float(abs(qdim.qdim_closed(params, labels.Typical(0.37), eps) - params.lattice_rank))
    virasoro = qdim.qdim_closed(params, labels.Virasoro.of(1, 2), eps)
    passed = worst < 1e-5 and typical < 1e-5 and virasoro == 0
    return passed, f"atypical deviation {worst:.2e}, typical deviation {typical:.2e}"


def qdim_numeric_agreement() -> Outcome:
    params = value.ModelParams(2, 3)
    label_set = [
        labels.AtypicalI(1, 1, 0),
        labels.AtypicalI(1, 2, 0),
        labels.AtypicalI(2, 1, 0),
        labels.AtypicalI(1, 1, 1),
        labels.AtypicalI(1, 2, -1),
        labels.AtypicalI(2, 3, 0),
        labels.AtypicalIPlus(1, 1, 0),
        labels.AtypicalIMinus(1, 1, 0),
        labels.Typical(0.37),
        labels.Typical(0.2 + 0.1j),
    ]
    eps_set = (0.3, 0.5, 0.2 + 0.1j, 0.4 - 0.1j, 0.25 + 0.05j)
    worst = 0.0
    for eps in eps_set:
        for label in label_set:
            closed = qdim.qdim_closed(params, label, eps)
            estimate = qdim.qdim_numeric(params, label, eps)
            worst = max(worst, float(abs(estimate.value - closed) / max(1, abs(closed))))
    return worst < 1e-3, f"max relative deviation {worst:.2e}"


def leak_points() -> Outcome:
    cases = [
        (value.ModelParams.one_p(3), (1, 2), [labels.AtypicalI(1, 2, 0), labels.AtypicalI(1, 1, 1)]),
        (value.ModelParams(2, 3), (1, 5), [labels.AtypicalI(1, 2, 0), labels.AtypicalI(2, 1, 0)]),
    ]
    worst = 0.0
    for params, ms, label_set in cases:
        for m in ms:
            for label in label_set:
                report = qdim.leak_check(params, label, m)
                worst = max(worst, float(abs(report.left - report.right)))
    return worst < 1e-6, f"max one-sided gap {worst:.2e}"


# ---- Fusion ----
def generator_relations() -> Outcome:
    checked = 0
    worst = 0.0
    for params in (value.ModelParams(2, 3), value.ModelParams(2, 5)):
        checked += fusion.validate_dictionary(params)
        relations = fusion.generator_relations(params, range(-1, 2))
        for eps in _continuous_eps(10):
            for _, left, right, expected in relations:
                product = fusion.qdim_of_element(params, left, eps) * fusion.qdim_of_element(params, right, eps)
                report = value.ResidualReport.build(product, fusion.qdim_of_element(params, expected, eps))
                worst = max(worst, report.rel_residual)
    return worst < 1e-9, f"{checked} exact relations, qdim deviation {worst:.2e}"


def verlinde_oracle() -> Outcome:
    lee_yang = value.ModelParams(2, 5)
    table = model.kac_table(lee_yang)
    vacuum = table.index(model.minimal_model_vacuum(lee_yang))
    phi = 1 - vacuum
    tensor = fusion.verlinde_coeffs(modular.smatrix_virasoro(lee_yang), vacuum)
    lee_yang_ok = tensor[phi, phi, vacuum] == 1 and tensor[phi, phi, phi] == 1
    su2_ok = all(
        np.array_equal(fusion.verlinde_coeffs(modular.smatrix_wzw(k)), fusion.su2_fusion_rules(k))
        for k in range(7)
    )
    return lee_yang_ok and su2_ok, f"Lee-Yang {'ok' if lee_yang_ok else 'wrong'}, SU(2) {'ok' if su2_ok else 'wrong'}"


def strip_images() -> Outcome:
    reports = [fusion.image_ring_check(value.ModelParams.one_p(p), 1) for p in (3, 4, 5)]
    reports.append(fusion.image_ring_check(value.ModelParams(2, 5), 1))
    failed = [f"{report.target}" for report in reports if not report.matches()]
    return not failed, "all images match" if not failed else f"mismatch: {', '.join(failed)}"


# ---- Varieties ----
def _curves() -> List[value.ModelParams]:
    return [value.ModelParams.one_p(p) for p in range(2, 7)] + [
        value.ModelParams(2, 3),
        value.ModelParams(2, 5),
        value.ModelParams(3, 4),
    ]


def fusion_varieties() -> Outcome:
    problems = []
    for params in _curves():
        expected = (
            params.p_minus - 1
            if params.is_one_p_family
            else (params.p_plus - 1) * (params.p_minus - 1) // 2
        )
        found = len(variety.singular_points(params))
        if found != expected:
            problems.append(f"({params.p_plus},{params.p_minus}) has {found} singular points, expected {expected}")
    rng = _rng()
    worst = 0.0
    with mpmath.workdps(30):
        for params in _curves():
            for radius, angle in zip(rng.uniform(0.8, 1.25, 20), rng.uniform(0, 2 * np.pi, 20)):
                t = mpmath.mpc(radius * np.cos(angle), radius * np.sin(angle))
                residuals = variety.curve_eval(params, variety.parametrize(params, t))
                worst = max(worst, float(max(abs(x) for x in residuals)))
    if worst >= 1e-12:
        problems.append(f"parametrisation residual {worst:.2e}")
    params = value.ModelParams(2, 3)
    uniform = max(variety.uniformisation_check(params, eps).rel_residual for eps in _continuous_eps(5))
    if uniform >= 1e-9:
        problems.append(f"uniformisation residual {uniform:.2e}")
    return not problems, "; ".join(problems) or f"parametrisation {worst:.1e}, uniformisation {uniform:.1e}"


# ---- Quantum modular forms ----
def halfint_cocycle() -> Outcome:
    worst = 0.0
    matrix_gap = 0.0
    for p in (2, 3, 4):
        S = qmf.s_matrix(p)
        reference = modular.smatrix_wzw(p - 2)
        matrix_gap = max(
            matrix_gap,
            max(float(abs(S[i, j] - reference[i, j])) for i in range(p - 1) for j in range(p - 1)),
        )
        for w in (-0.2 - 0.6j, -0.5 - 0.5j):
            worst = max(worst, qmf.cocycle_check_halfint(p, value.LowerHalfPoint(w)).abs_residual)
    return worst < 1e-4 and matrix_gap < 1e-14, f"cocycle {worst:.2e}, S-matrix {matrix_gap:.1e}"


def weight32_cocycle() -> Outcome:
    worst = 0.0
    for params, w in ((value.ModelParams(2, 3), -0.3 - 0.7j), (value.ModelParams(2, 5), -0.2 - 0.5j)):
        worst = max(worst, qmf.cocycle_check_weight32(params, value.LowerHalfPoint(w)).abs_residual)
    return worst < 1e-3, f"max residual {worst:.2e}"


CRITERIA: Dict[int, Tuple[str, Callable[[], Outcome]]] = {
    1: ("theta modularity", theta_modularity),
    2: ("character consistency", character_consistency),
    3: ("typical S-transform", typical_s_transform),
    4: ("atypical S-transform", atypical_s_transform),
    5: ("correction term limit", correction_limit),
    6: ("quantum dimension limits", qdim_limits),
    7: ("numeric against closed quantum dimensions", qdim_numeric_agreement),
    8: ("leak points", leak_points),
    9: ("fusion generator relations", generator_relations),
    10: ("Verlinde oracle", verlinde_oracle),
    11: ("strip images", strip_images),
    12: ("fusion varieties", fusion_varieties),
    13: ("weight 1/2 cocycle", halfint_cocycle),
    14: ("weight 3/2 cocycle", weight32_cocycle),
}
RUNTIME_CRITERION = 15


def _evaluate(number: int, title: str, check: Callable[[], Outcome]) -> CriterionResult:
    started = time.perf_counter()
    try:
        passed, detail = check()
    except Exception as error:
        passed, detail = False, f"{type(error).__name__}: {error}"
    result = CriterionResult(number, title, bool(passed), detail, time.perf_counter() - started)
    logger.info("Criterion %d (%s): %s, %s", number, title, "passed" if passed else "FAILED", detail)
    return result


def _evaluate_number(number: int) -> CriterionResult:
    return _evaluate(number, *CRITERIA[number])


def run_selftest(only: Optional[Sequence[int]] = None, workers: Optional[int] = None) -> List[CriterionResult]:
    """Run the selected criteria; criterion 15 times whatever else ran.

    Several criteria are mapped over worker processes and reported in number
    order. A single criterion, or workers=1, runs in-process.
    """
    selected = sorted(set(only)) if only else sorted(CRITERIA) + [RUNTIME_CRITERION]
    unknown = [n for n in selected if n not in CRITERIA and n != RUNTIME_CRITERION]
    if unknown:
        raise ValueError(f"Unknown criteria {unknown}; choose from 1 to {RUNTIME_CRITERION}")
    numbers = [n for n in selected if n in CRITERIA]
    if workers == 1 or len(numbers) < 2:
        results = [_evaluate_number(n) for n in numbers]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_evaluate_number, numbers))
    if RUNTIME_CRITERION in selected:
        total = sum(result.seconds for result in results)
        passed = total < TIME_LIMIT
        results.append(
            CriterionResult(RUNTIME_CRITERION, "selftest runtime", passed, f"{total:.1f} s", total)
        )
        logger.info("Criterion %d (selftest runtime): %.1f s", RUNTIME_CRITERION, total)
    return results
